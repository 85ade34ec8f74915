//! Context-aware selection of the optimal replacement color.
//!
//! The reference-DB path filters candidates down to those consistent with the
//! original component (same hue family, same saturation level) and picks the
//! one most harmonious with the page's fitted template. Only when that yields
//! nothing does the complementary path adjust the original color directly:
//! value-only for neutrals, constrained hue/saturation sweeps otherwise, with
//! a last-resort value sweep before giving up.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{
    contrast_ratio, hsv_to_rgb, hue_consistent, is_neutral, rgb_to_hsv, saturation_level,
    wrap_degrees, Hsv, Srgb8, HUE_CONSISTENCY_MAX_DEG,
};
use crate::harmony::{hue_distance_to_template, TemplateFit};

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("no color satisfies the contrast requirement; attempts: {}", trail.join(" -> "))]
    Unsatisfiable { trail: Vec<String> },
    #[error("both adjustment candidates absent")]
    BothAbsent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionInput {
    pub original_fg: Srgb8,
    pub bg: Srgb8,
    pub required_contrast: f64,
    /// Candidate foregrounds from the reference DB, already ordered.
    pub candidates: Vec<Srgb8>,
    /// Fitted page template; absent when the page has no chromatic hue mass.
    pub template: Option<TemplateFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    ReferenceDb,
    ComplementaryNeutral,
    ComplementaryChromatic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub color: Srgb8,
    pub strategy: SelectionStrategy,
    /// Distance of the chosen hue to the page template, on the DB path with a
    /// template present.
    pub harmonic_distance: Option<f64>,
    /// True when the chromatic fallback had to sweep value as a last resort.
    pub value_escalated: bool,
}

/// Keeps only candidates consistent with the original component's design:
/// same hue family and same saturation level. A neutral original admits only
/// neutral candidates; the hue test is skipped since grays carry no hue.
pub fn filter_consistent(candidates: &[Srgb8], original_fg: Srgb8) -> Vec<Srgb8> {
    let orig = rgb_to_hsv(original_fg);
    if is_neutral(original_fg) {
        return candidates
            .iter()
            .copied()
            .filter(|&c| is_neutral(c))
            .collect();
    }
    candidates
        .iter()
        .copied()
        .filter(|&c| {
            if is_neutral(c) {
                return false;
            }
            let h = rgb_to_hsv(c);
            hue_consistent(h.h, orig.h) && saturation_level(h.s) == saturation_level(orig.s)
        })
        .collect()
}

/// Euclidean distance in the HSV cone embedding
/// `(s·v·cos h, s·v·sin h, v)`; respects hue circularity and damps hue
/// differences at low saturation.
pub fn hsv_cone_distance(a: Hsv, b: Hsv) -> f64 {
    let (xa, ya) = polar(a);
    let (xb, yb) = polar(b);
    ((xa - xb).powi(2) + (ya - yb).powi(2) + (a.v - b.v).powi(2)).sqrt()
}

fn polar(c: Hsv) -> (f64, f64) {
    let rad = c.h.to_radians();
    (c.s * c.v * rad.cos(), c.s * c.v * rad.sin())
}

/// Of the up-to-two adjustment results, the one closest to the original in
/// the HSV cone; ties prefer the first.
pub fn min_changed(
    original: Srgb8,
    a: Option<Srgb8>,
    b: Option<Srgb8>,
) -> Result<Srgb8, SelectError> {
    let orig = rgb_to_hsv(original);
    match (a, b) {
        (None, None) => Err(SelectError::BothAbsent),
        (Some(x), None) => Ok(x),
        (None, Some(y)) => Ok(y),
        (Some(x), Some(y)) => {
            let dx = hsv_cone_distance(rgb_to_hsv(x), orig);
            let dy = hsv_cone_distance(rgb_to_hsv(y), orig);
            Ok(if dx <= dy { x } else { y })
        }
    }
}

/// Nearest-first scan of `center ± k·step` clamped to `[lo, hi]`.
///
/// Yields the center first, then pairs at growing distance, down before up.
fn nearest_first(center: f64, step: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let steps = ((hi - lo) / step).ceil() as i64 + 1;
    for k in 0..=steps {
        let delta = k as f64 * step;
        let down = center - delta;
        let up = center + delta;
        if k == 0 {
            if center >= lo && center <= hi {
                out.push(center);
            }
            continue;
        }
        if down >= lo {
            out.push(down);
        }
        if up <= hi {
            out.push(up);
        }
    }
    out
}

/// Value-only adjustment for neutral originals: walk V away from the original
/// in 1/255 steps, hue and saturation untouched, and stop at the nearest
/// value meeting the required contrast. Equidistant candidates in both
/// directions prefer the one with more contrast headroom.
pub fn adjust_v_neutral(
    original: Srgb8,
    bg: Srgb8,
    required_contrast: f64,
) -> Result<Srgb8, SelectError> {
    let orig = rgb_to_hsv(original);
    let step = 1.0 / 255.0;
    for k in 0..=255 {
        let delta = k as f64 * step;
        let mut found: Option<(Srgb8, f64)> = None;
        for v in [orig.v - delta, orig.v + delta] {
            if !(0.0..=1.0).contains(&v) {
                continue;
            }
            let candidate = hsv_to_rgb(Hsv::new(orig.h, orig.s, v));
            let ratio = contrast_ratio(candidate, bg).value();
            if ratio >= required_contrast {
                match found {
                    Some((_, best)) if best >= ratio => {}
                    _ => found = Some((candidate, ratio)),
                }
            }
            if delta == 0.0 {
                break;
            }
        }
        if let Some((c, _)) = found {
            return Ok(c);
        }
    }
    Err(SelectError::Unsatisfiable {
        trail: vec!["adjust_v_neutral: no value level meets contrast".to_string()],
    })
}

/// Hue values within the consistency window around the original, 1° steps,
/// nearest first.
fn hue_sweep(h0: f64) -> Vec<f64> {
    let mut out = vec![h0];
    let max = HUE_CONSISTENCY_MAX_DEG as i64;
    for k in 1..=max {
        out.push(wrap_degrees(h0 - k as f64));
        out.push(wrap_degrees(h0 + k as f64));
    }
    out
}

/// Saturation values staying inside the original's saturation-level bucket,
/// 1/100 steps, nearest first.
fn saturation_sweep(s0: f64) -> Vec<f64> {
    let level = saturation_level(s0);
    nearest_first(s0, 0.01, 0.0, 1.0)
        .into_iter()
        .filter(|&s| saturation_level(s) == level)
        .collect()
}

/// Value levels within ±0.25 of the original, 1/255 steps, nearest first;
/// used only by the escalated fallback.
fn value_sweep(v0: f64) -> Vec<f64> {
    nearest_first(v0, 1.0 / 255.0, (v0 - 0.25).max(0.0), (v0 + 0.25).min(1.0))
}

fn adjust_two_axis(
    original: Srgb8,
    bg: Srgb8,
    required_contrast: f64,
    hue_outer: bool,
    sweep_value: bool,
) -> Option<Srgb8> {
    let orig = rgb_to_hsv(original);
    let hues = hue_sweep(orig.h);
    let sats = saturation_sweep(orig.s);
    let values = if sweep_value {
        value_sweep(orig.v)
    } else {
        vec![orig.v]
    };
    let check = |h: f64, s: f64| -> Option<Srgb8> {
        for &v in &values {
            let c = hsv_to_rgb(Hsv::new(h, s, v));
            if contrast_ratio(c, bg).value() >= required_contrast {
                return Some(c);
            }
        }
        None
    };
    if hue_outer {
        for &h in &hues {
            for &s in &sats {
                if let Some(c) = check(h, s) {
                    return Some(c);
                }
            }
        }
    } else {
        for &s in &sats {
            for &h in &hues {
                if let Some(c) = check(h, s) {
                    return Some(c);
                }
            }
        }
    }
    None
}

/// Hue-then-saturation adjustment for chromatic originals, value fixed.
pub fn adjust_hs(original: Srgb8, bg: Srgb8, required_contrast: f64) -> Option<Srgb8> {
    adjust_two_axis(original, bg, required_contrast, true, false)
}

/// Saturation-then-hue adjustment for chromatic originals, value fixed.
pub fn adjust_sh(original: Srgb8, bg: Srgb8, required_contrast: f64) -> Option<Srgb8> {
    adjust_two_axis(original, bg, required_contrast, false, false)
}

/// The full selection: DB candidates under the two consistency criteria and
/// the harmonic argmin, falling back to direct adjustment of the original.
pub fn select_optimal(input: &SelectionInput) -> Result<SelectionResult, SelectError> {
    let mut trail = Vec::new();
    let orig = rgb_to_hsv(input.original_fg);

    let filtered = filter_consistent(&input.candidates, input.original_fg);
    // stored pairs used a matched-but-not-identical bg: re-check against the
    // actual one and drop failures before the argmin
    let viable: Vec<Srgb8> = filtered
        .into_iter()
        .filter(|&c| contrast_ratio(c, input.bg).value() >= input.required_contrast)
        .collect();

    if !viable.is_empty() {
        let harmonic = |c: Srgb8| -> Option<f64> {
            let t = input.template.as_ref()?;
            if is_neutral(c) {
                // grays do not participate in the page's hue wheel
                return Some(0.0);
            }
            Some(hue_distance_to_template(t.kind, t.alpha, rgb_to_hsv(c).h))
        };
        let cone = |c: Srgb8| hsv_cone_distance(rgb_to_hsv(c), orig);

        let mut best_idx = 0;
        for idx in 1..viable.len() {
            let (cur, best) = (viable[idx], viable[best_idx]);
            let better = match (harmonic(cur), harmonic(best)) {
                (Some(dc), Some(db)) => {
                    dc < db || (dc == db && cone(cur) < cone(best))
                }
                // template absent: rank by closeness to the original
                _ => cone(cur) < cone(best),
            };
            if better {
                best_idx = idx;
            }
        }
        let chosen = viable[best_idx];
        return Ok(SelectionResult {
            color: chosen,
            strategy: SelectionStrategy::ReferenceDb,
            harmonic_distance: harmonic(chosen),
            value_escalated: false,
        });
    }
    trail.push("reference DB candidates exhausted".to_string());

    if is_neutral(input.original_fg) {
        let color = adjust_v_neutral(input.original_fg, input.bg, input.required_contrast)
            .map_err(|e| match e {
                SelectError::Unsatisfiable { trail: t } => {
                    trail.extend(t);
                    SelectError::Unsatisfiable { trail: trail.clone() }
                }
                other => other,
            })?;
        return Ok(SelectionResult {
            color,
            strategy: SelectionStrategy::ComplementaryNeutral,
            harmonic_distance: None,
            value_escalated: false,
        });
    }

    let hs = adjust_hs(input.original_fg, input.bg, input.required_contrast);
    let sh = adjust_sh(input.original_fg, input.bg, input.required_contrast);
    if hs.is_some() || sh.is_some() {
        let color = min_changed(input.original_fg, hs, sh)?;
        return Ok(SelectionResult {
            color,
            strategy: SelectionStrategy::ComplementaryChromatic,
            harmonic_distance: None,
            value_escalated: false,
        });
    }
    trail.push("adjust_hs/adjust_sh: constrained region infeasible".to_string());

    // last resort: the same sweeps with value allowed to move ±0.25
    let hs = adjust_two_axis(input.original_fg, input.bg, input.required_contrast, true, true);
    let sh = adjust_two_axis(input.original_fg, input.bg, input.required_contrast, false, true);
    if hs.is_some() || sh.is_some() {
        let color = min_changed(input.original_fg, hs, sh)?;
        return Ok(SelectionResult {
            color,
            strategy: SelectionStrategy::ComplementaryChromatic,
            harmonic_distance: None,
            value_escalated: true,
        });
    }
    trail.push("value escalation ±0.25 infeasible".to_string());

    Err(SelectError::Unsatisfiable { trail })
}
