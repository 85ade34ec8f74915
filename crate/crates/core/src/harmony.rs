//! Harmonic hue templates and page-level template fitting.
//!
//! A template is a set of wedge-shaped sectors on the hue wheel; a page whose
//! hues all fall inside some rotation of a template reads as harmonious.
//! Fitting finds the (kind, rotation) pair minimizing the saturation-weighted
//! distance of the page's hues to the sectors, and the resulting fit scores
//! candidate replacement hues.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{hue_distance_deg, is_neutral, rgb_to_hsv, wrap_degrees, Srgb8};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HarmonyError {
    #[error("page has no chromatic color to fit a template to")]
    EmptyPage,
    #[error("histogram carries no weight")]
    EmptyHistogram,
}

/// The eight template kinds. `N` is the grayscale-only template and owns no
/// chromatic sector.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateKind {
    i,
    V,
    L,
    I,
    T,
    Y,
    X,
    N,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 8] = [
        TemplateKind::i,
        TemplateKind::V,
        TemplateKind::L,
        TemplateKind::I,
        TemplateKind::T,
        TemplateKind::Y,
        TemplateKind::X,
        TemplateKind::N,
    ];

    /// The seven kinds with at least one chromatic sector.
    pub const CHROMATIC: [TemplateKind; 7] = [
        TemplateKind::i,
        TemplateKind::V,
        TemplateKind::L,
        TemplateKind::I,
        TemplateKind::T,
        TemplateKind::Y,
        TemplateKind::X,
    ];

    /// Sectors as `(center offset from rotation origin, width)` in degrees.
    pub fn sectors(self) -> &'static [(f64, f64)] {
        match self {
            TemplateKind::i => &[(0.0, 18.0)],
            TemplateKind::V => &[(0.0, 93.6)],
            TemplateKind::L => &[(0.0, 18.0), (90.0, 79.2)],
            TemplateKind::I => &[(0.0, 18.0), (180.0, 18.0)],
            TemplateKind::T => &[(0.0, 180.0)],
            TemplateKind::Y => &[(0.0, 93.6), (180.0, 18.0)],
            TemplateKind::X => &[(0.0, 93.6), (180.0, 93.6)],
            TemplateKind::N => &[],
        }
    }

    pub fn total_width(self) -> f64 {
        self.sectors().iter().map(|(_, w)| w).sum()
    }
}

/// Best template kind and rotation for a page, with the residual error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemplateFit {
    pub kind: TemplateKind,
    /// Rotation in degrees, `[0,360)`.
    pub alpha: f64,
    /// Sum of weighted hue distances to the nearest sector; 0 iff every
    /// weighted hue lies inside a sector.
    pub fit_error: f64,
}

/// Saturation-weighted hue mass per integer degree.
#[derive(Debug, Clone)]
pub struct HueHistogram {
    bins: [f64; 360],
}

impl HueHistogram {
    pub fn new() -> Self {
        Self { bins: [0.0; 360] }
    }

    pub fn add(&mut self, hue_deg: f64, weight: f64) {
        let bin = (wrap_degrees(hue_deg).round() as usize) % 360;
        self.bins[bin] += weight;
    }

    pub fn total_weight(&self) -> f64 {
        self.bins.iter().sum()
    }

    /// Non-empty bins as `(degree, weight)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(d, w)| (d, *w))
    }
}

impl Default for HueHistogram {
    fn default() -> Self {
        Self::new()
    }
}

/// Builds the hue histogram of a page from weighted colors.
///
/// Neutral colors contribute nothing; chromatic colors contribute
/// `weight · saturation` at their integer hue degree, so near-grays cannot
/// drag the template.
pub fn page_hue_histogram(colors: &[(Srgb8, f64)]) -> Result<HueHistogram, HarmonyError> {
    let mut h = HueHistogram::new();
    for &(c, w) in colors {
        debug_assert!(w >= 0.0, "negative weight");
        if w <= 0.0 || is_neutral(c) {
            continue;
        }
        let hsv = rgb_to_hsv(c);
        h.add(hsv.h, w * hsv.s);
    }
    if h.total_weight() <= 0.0 {
        return Err(HarmonyError::EmptyPage);
    }
    Ok(h)
}

/// Distance from a hue to the nearest border of the rotated template; 0 when
/// the hue lies inside any sector. `N` has no sector, so everything is
/// infinitely far from it.
pub fn hue_distance_to_template(kind: TemplateKind, alpha: f64, hue: f64) -> f64 {
    let sectors = kind.sectors();
    if sectors.is_empty() {
        return f64::INFINITY;
    }
    sectors
        .iter()
        .map(|&(center, width)| {
            let d = hue_distance_deg(hue, center + alpha);
            (d - width / 2.0).max(0.0)
        })
        .fold(f64::INFINITY, f64::min)
}

fn template_error(h: &HueHistogram, kind: TemplateKind, alpha: f64) -> f64 {
    h.nonzero()
        .map(|(deg, w)| w * hue_distance_to_template(kind, alpha, deg as f64))
        .sum()
}

/// Exhaustive fit over the chromatic kinds and integer rotations.
///
/// Ties break toward the kind with the smaller total sector width, then the
/// smaller rotation, so the result is a total order and deterministic.
pub fn fit_template(h: &HueHistogram) -> Result<TemplateFit, HarmonyError> {
    if h.total_weight() <= 0.0 {
        return Err(HarmonyError::EmptyHistogram);
    }
    let mut best: Option<TemplateFit> = None;
    for kind in TemplateKind::CHROMATIC {
        for alpha_deg in 0..360u32 {
            let alpha = alpha_deg as f64;
            let err = template_error(h, kind, alpha);
            let better = match &best {
                None => true,
                Some(b) => {
                    err < b.fit_error
                        || (err == b.fit_error
                            && (kind.total_width() < b.kind.total_width()
                                || (kind.total_width() == b.kind.total_width()
                                    && alpha < b.alpha)))
                }
            };
            if better {
                best = Some(TemplateFit {
                    kind,
                    alpha,
                    fit_error: err,
                });
            }
        }
    }
    Ok(best.expect("chromatic kinds are non-empty"))
}
