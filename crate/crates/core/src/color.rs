//! Color values and the math used to judge and adjust them.
//!
//! Everything downstream rests on four pieces: 8-bit sRGB colors as they
//! appear in resource files, the HSV cylinder used for style-preserving
//! adjustments, WCAG relative luminance / contrast ratios, and the
//! coarse predicates (saturation level, neutrality, hue consistency)
//! that decide whether a replacement color "looks like" the original.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Per-channel tolerance used whenever two colors are matched "approximately":
/// reference-DB background lookup, foreground/background swap detection, and
/// raster recoloring. 16 (~6%) absorbs compression and rendering noise while
/// keeping visibly different design colors apart.
pub const CHANNEL_MATCH_TOLERANCE: u8 = 16;

/// Saturation at or below this is treated as achromatic (black/white/gray).
pub const NEUTRAL_SATURATION_MAX: f64 = 0.10;

/// Two hues belong to the same hue family when their circular distance does
/// not exceed this many degrees (one conventional color-wheel sector).
pub const HUE_CONSISTENCY_MAX_DEG: f64 = 30.0;

/// Required contrast for image-contrast defects, independent of size.
pub const IMAGE_CONTRAST_THRESHOLD: f64 = 3.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColorParseError {
    #[error("color literal must be #RRGGBB or #AARRGGBB, got {0:?}")]
    BadFormat(String),
    #[error("invalid hex digits in color literal {0:?}")]
    BadHex(String),
}

/// An 8-bit sRGB color, the form colors take in layout and resource files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Srgb8 {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Srgb8 {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const BLACK: Srgb8 = Srgb8::new(0, 0, 0);
    pub const WHITE: Srgb8 = Srgb8::new(255, 255, 255);

    /// Parses the strict 7-character `#RRGGBB` form.
    pub fn parse_hex(s: &str) -> Result<Self, ColorParseError> {
        let hex = s
            .strip_prefix('#')
            .ok_or_else(|| ColorParseError::BadFormat(s.to_string()))?;
        if hex.len() != 6 || !hex.is_ascii() {
            return Err(ColorParseError::BadFormat(s.to_string()));
        }
        let byte = |i: usize| {
            u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| ColorParseError::BadHex(s.to_string()))
        };
        Ok(Srgb8::new(byte(0)?, byte(2)?, byte(4)?))
    }

    /// Uppercase `#RRGGBB` form; inverse of [`Srgb8::parse_hex`].
    pub fn to_hex(self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl fmt::Display for Srgb8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Srgb8 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Srgb8 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let lit = ColorLiteral::parse(&s).map_err(D::Error::custom)?;
        Ok(lit.rgb)
    }
}

/// A color literal as written in a resource file: `#RRGGBB` or `#AARRGGBB`.
///
/// The alpha prefix is carried verbatim so patches can rewrite the RGB part
/// without touching it; contrast math ignores alpha entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorLiteral {
    /// Original two alpha hex chars, exactly as written, when present.
    pub alpha_hex: Option<String>,
    pub rgb: Srgb8,
}

impl ColorLiteral {
    pub fn parse(s: &str) -> Result<Self, ColorParseError> {
        let hex = s
            .strip_prefix('#')
            .ok_or_else(|| ColorParseError::BadFormat(s.to_string()))?;
        match hex.len() {
            6 => Ok(Self {
                alpha_hex: None,
                rgb: Srgb8::parse_hex(s)?,
            }),
            8 => {
                if !hex.is_ascii() || u8::from_str_radix(&hex[0..2], 16).is_err() {
                    return Err(ColorParseError::BadHex(s.to_string()));
                }
                let rgb = Srgb8::parse_hex(&format!("#{}", &hex[2..]))?;
                Ok(Self {
                    alpha_hex: Some(hex[0..2].to_string()),
                    rgb,
                })
            }
            _ => Err(ColorParseError::BadFormat(s.to_string())),
        }
    }

    /// Re-serializes with the RGB part replaced, alpha prefix untouched.
    pub fn with_rgb(&self, rgb: Srgb8) -> String {
        match &self.alpha_hex {
            Some(a) => format!(
                "#{}{:02X}{:02X}{:02X}",
                a, rgb.r, rgb.g, rgb.b
            ),
            None => rgb.to_hex(),
        }
    }
}

/// Hue in degrees `[0,360)`, saturation and value as fractions in `[0,1]`.
///
/// Saturation-zero colors carry the canonical hue 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl Hsv {
    pub fn new(h: f64, s: f64, v: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&s), "saturation out of range: {s}");
        debug_assert!((0.0..=1.0).contains(&v), "value out of range: {v}");
        Self {
            h: wrap_degrees(h),
            s,
            v,
        }
    }
}

/// Normalizes an angle into `[0,360)`.
pub fn wrap_degrees(h: f64) -> f64 {
    let w = h.rem_euclid(360.0);
    if w == 360.0 {
        0.0
    } else {
        w
    }
}

/// Circular distance between two hue angles, in `[0,180]`.
pub fn hue_distance_deg(a: f64, b: f64) -> f64 {
    let d = (wrap_degrees(a) - wrap_degrees(b)).abs();
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// RGB → HSV over channel fractions (channel / 255).
///
/// Hue is the four-way case split on which channel is the maximum, scaled by
/// 60°, with negative results wrapped into `[0,360)`; saturation is
/// `(max−min)/max` (0 when max is 0); value is the max fraction.
pub fn rgb_to_hsv(c: Srgb8) -> Hsv {
    let r = c.r as f64 / 255.0;
    let g = c.g as f64 / 255.0;
    let b = c.b as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);

    let h = if max == min {
        0.0
    } else if max == r {
        60.0 * (g - b) / (max - min)
    } else if max == g {
        60.0 * (b - r) / (max - min) + 120.0
    } else {
        60.0 * (r - g) / (max - min) + 240.0
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    let s = if max == 0.0 { 0.0 } else { (max - min) / max };

    Hsv { h, s, v: max }
}

/// HSV → RGB, the standard sector-wise inverse, channels rounded to 8 bits.
pub fn hsv_to_rgb(c: Hsv) -> Srgb8 {
    if c.s <= 0.0 {
        let v = to_channel(c.v);
        return Srgb8::new(v, v, v);
    }
    let h = wrap_degrees(c.h) / 60.0;
    let sector = (h.floor() as u32) % 6;
    let f = h - h.floor();
    let p = c.v * (1.0 - c.s);
    let q = c.v * (1.0 - c.s * f);
    let t = c.v * (1.0 - c.s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (c.v, t, p),
        1 => (q, c.v, p),
        2 => (p, c.v, t),
        3 => (p, q, c.v),
        4 => (t, p, c.v),
        _ => (c.v, p, q),
    };
    Srgb8::new(to_channel(r), to_channel(g), to_channel(b))
}

fn to_channel(x: f64) -> u8 {
    (x * 255.0).round().clamp(0.0, 255.0) as u8
}

/// WCAG 2.x relative luminance in `[0,1]`.
pub fn relative_luminance(c: Srgb8) -> f64 {
    let lut = linearize_lut();
    0.2126 * lut[c.r as usize] + 0.7152 * lut[c.g as usize] + 0.0722 * lut[c.b as usize]
}

// channel linearization is hot in the adjustment sweeps; 256 values suffice
fn linearize_lut() -> &'static [f64; 256] {
    static LUT: std::sync::OnceLock<[f64; 256]> = std::sync::OnceLock::new();
    LUT.get_or_init(|| std::array::from_fn(|i| linearize(i as u8)))
}

fn linearize(channel: u8) -> f64 {
    let u = channel as f64 / 255.0;
    if u <= 0.03928 {
        u / 12.92
    } else {
        ((u + 0.055) / 1.055).powf(2.4)
    }
}

/// WCAG contrast ratio, `(L1+0.05)/(L2+0.05)` with `L1 ≥ L2`; range `[1,21]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ContrastRatio(f64);

impl ContrastRatio {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ContrastRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}:1", self.0)
    }
}

pub fn contrast_ratio(a: Srgb8, b: Srgb8) -> ContrastRatio {
    let la = relative_luminance(a);
    let lb = relative_luminance(b);
    let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
    ContrastRatio((hi + 0.05) / (lo + 0.05))
}

/// Required contrast for visible text: 4.5 below 18pt regular / 14pt bold,
/// 3.0 at or above those sizes.
pub fn contrast_threshold(text_size_pt: f64, bold: bool) -> f64 {
    let large = if bold {
        text_size_pt >= 14.0
    } else {
        text_size_pt >= 18.0
    };
    if large {
        3.0
    } else {
        4.5
    }
}

/// Three-level saturation bucket; boundaries belong to the lower bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SaturationLevel {
    Low,
    Medium,
    High,
}

pub fn saturation_level(s: f64) -> SaturationLevel {
    debug_assert!((0.0..=1.0).contains(&s), "saturation out of range: {s}");
    if s <= 0.33 {
        SaturationLevel::Low
    } else if s <= 0.67 {
        SaturationLevel::Medium
    } else {
        SaturationLevel::High
    }
}

/// True for black, white, gray and other near-achromatic colors.
pub fn is_neutral(c: Srgb8) -> bool {
    rgb_to_hsv(c).s <= NEUTRAL_SATURATION_MAX
}

/// True when two hues stay within the same hue family.
///
/// Callers are responsible for never passing hues of neutral colors here;
/// a gray's hue carries no design intent.
pub fn hue_consistent(h1: f64, h2: f64) -> bool {
    hue_distance_deg(h1, h2) <= HUE_CONSISTENCY_MAX_DEG
}
