//! Functional-image classification and recoloring.
//!
//! Only images wired to an interaction (clickable, onClick handler,
//! ImageButton) are recolored; ornamental images keep their meaning by
//! staying untouched. Raster repairs move matched foreground pixels toward
//! the replacement color with linear edge blending so anti-aliased glyph
//! edges stay smooth; vector repairs rewrite paint attribute literals in
//! place.

use std::path::PathBuf;

use image::RgbaImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{ColorLiteral, Srgb8, CHANNEL_MATCH_TOLERANCE};
use crate::localizer::{ElementRef, ResourceTree};
use crate::refdb::channel_distance;
use crate::report::UiNode;
use crate::xmlspan::{splice, SpanDoc};

#[derive(Debug, Error)]
pub enum ImageRepairError {
    #[error("no pixel near the expected foreground color")]
    NoForegroundPixels,
    #[error("no paint attribute equals the expected color")]
    NoMatchingPaint,
    #[error("not a vector drawable (root tag {0:?})")]
    NotAVector(String),
    #[error("drawable {0:?} not found in any res/drawable* directory")]
    DrawableNotFound(String),
    #[error("xml error: {0}")]
    Xml(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageKind {
    Functional,
    Ornamental,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageClassification {
    pub kind: ImageKind,
    /// Which attributes fired; non-empty exactly when functional.
    pub evidence: Vec<String>,
}

/// Functional iff the layout marks it clickable, wires an onClick handler,
/// the matched dump node reports clickable, or the element is an
/// ImageButton.
pub fn classify_image(
    tree: &ResourceTree,
    element: &ElementRef,
    dump_node: Option<&UiNode>,
) -> ImageClassification {
    let mut evidence = Vec::new();
    if let Some(el) = tree.element(element) {
        if el
            .attr("android:clickable")
            .map(|a| a.value == "true")
            .unwrap_or(false)
        {
            evidence.push("android:clickable=\"true\"".to_string());
        }
        if el.attr("android:onClick").is_some() {
            evidence.push("android:onClick".to_string());
        }
        if crate::localizer::normalize_component_type(&el.tag) == "ImageButton" {
            evidence.push("tag:ImageButton".to_string());
        }
    }
    if dump_node.map(|n| n.clickable).unwrap_or(false) {
        evidence.push("dump:clickable".to_string());
    }
    let kind = if evidence.is_empty() {
        ImageKind::Ornamental
    } else {
        ImageKind::Functional
    };
    ImageClassification { kind, evidence }
}

/// Recolors pixels near `from` toward `to`, preserving alpha byte-for-byte.
///
/// A pixel at per-channel distance `d ≤ 16` from `from` moves toward `to` by
/// the factor `(16−d)/16`: exact matches become exactly `to`, partial matches
/// interpolate linearly so anti-aliased edges degrade smoothly, and pixels
/// beyond the tolerance are returned bit-identical.
pub fn recolor_raster(
    pixels: &RgbaImage,
    from: Srgb8,
    to: Srgb8,
) -> Result<RgbaImage, ImageRepairError> {
    let tol = CHANNEL_MATCH_TOLERANCE as f64;
    let mut out = pixels.clone();
    let mut matched = 0u64;
    for p in out.pixels_mut() {
        let c = Srgb8::new(p.0[0], p.0[1], p.0[2]);
        let d = channel_distance(c, from);
        if d > CHANNEL_MATCH_TOLERANCE {
            continue;
        }
        matched += 1;
        let t = (tol - d as f64) / tol;
        let blend = |cur: u8, target: u8| -> u8 {
            (cur as f64 + t * (target as f64 - cur as f64)).round() as u8
        };
        p.0[0] = blend(c.r, to.r);
        p.0[1] = blend(c.g, to.g);
        p.0[2] = blend(c.b, to.b);
        // p.0[3] untouched
    }
    if matched == 0 {
        return Err(ImageRepairError::NoForegroundPixels);
    }
    Ok(out)
}

const PAINT_ATTRS: [&str; 3] = ["android:fillColor", "android:strokeColor", "android:tint"];

/// Rewrites vector-drawable paint literals equal to `from` (alpha prefix
/// tolerated and preserved) to `to`, leaving every other byte unchanged.
pub fn recolor_vector(xml: &str, from: Srgb8, to: Srgb8) -> Result<String, ImageRepairError> {
    let doc = SpanDoc::parse(xml).map_err(|e| ImageRepairError::Xml(e.to_string()))?;
    if doc.root_tag != "vector" {
        return Err(ImageRepairError::NotAVector(doc.root_tag.clone()));
    }
    // collect matching spans first; rewrite back-to-front so offsets hold
    let mut edits: Vec<(std::ops::Range<usize>, String)> = Vec::new();
    for el in &doc.elements {
        for attr in &el.attrs {
            if !PAINT_ATTRS.contains(&attr.qualified().as_str()) {
                continue;
            }
            let Ok(lit) = ColorLiteral::parse(&attr.value) else {
                continue; // @color references route through the resource chain
            };
            if lit.rgb == from {
                edits.push((attr.value_span.clone(), lit.with_rgb(to)));
            }
        }
    }
    if edits.is_empty() {
        return Err(ImageRepairError::NoMatchingPaint);
    }
    edits.sort_by_key(|(span, _)| std::cmp::Reverse(span.start));
    let mut text = xml.to_string();
    for (span, replacement) in edits {
        text = splice(&text, span, &replacement);
    }
    Ok(text)
}

/// All files implementing a drawable across every density directory; each
/// variant gets the identical repair so densities stay consistent.
pub fn resolve_drawable(
    tree: &ResourceTree,
    name: &str,
) -> Result<Vec<PathBuf>, ImageRepairError> {
    const EXTENSIONS: [&str; 5] = ["png", "webp", "jpg", "jpeg", "xml"];
    let res = tree.root.join("res");
    let mut out = Vec::new();
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&res)
        .into_iter()
        .flatten()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n == "drawable" || n.starts_with("drawable-"))
                .unwrap_or(false)
        })
        .collect();
    dirs.sort();
    for dir in dirs {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .into_iter()
            .flatten()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_stem().and_then(|s| s.to_str()) == Some(name)
                    && p.extension()
                        .and_then(|e| e.to_str())
                        .map(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                        .unwrap_or(false)
            })
            .collect();
        files.sort();
        for f in files {
            out.push(f.strip_prefix(&tree.root).unwrap_or(&f).to_path_buf());
        }
    }
    if out.is_empty() {
        return Err(ImageRepairError::DrawableNotFound(name.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgba;
    use std::fs;
    use tempfile::TempDir;

    #[test]
    fn solid_glyph_recolors_exactly() {
        let mut img = RgbaImage::from_pixel(8, 8, Rgba([0, 0, 0, 0]));
        for x in 2..6 {
            img.put_pixel(x, 3, Rgba([0, 0, 0, 255]));
        }
        let to = Srgb8::new(0x44, 0x44, 0x44);
        let out = recolor_raster(&img, Srgb8::BLACK, to).unwrap();
        for x in 2..6 {
            assert_eq!(out.get_pixel(x, 3), &Rgba([0x44, 0x44, 0x44, 255]));
        }
        // alpha plane byte-identical
        for (a, b) in img.pixels().zip(out.pixels()) {
            assert_eq!(a.0[3], b.0[3]);
        }
    }

    #[test]
    fn edge_pixels_blend_linearly() {
        // d = 8 of 16 → pixel moves halfway toward the target
        let edge = Rgba([8, 8, 8, 200]);
        let img = RgbaImage::from_pixel(2, 1, edge);
        let to = Srgb8::new(100, 100, 100);
        let out = recolor_raster(&img, Srgb8::BLACK, to).unwrap();
        let expected = (8.0_f64 + 0.5 * (100.0 - 8.0)).round() as u8;
        assert_eq!(out.get_pixel(0, 0), &Rgba([expected, expected, expected, 200]));
    }

    #[test]
    fn unmatched_pixels_bit_identical() {
        let mut img = RgbaImage::from_pixel(4, 1, Rgba([200, 10, 10, 255]));
        img.put_pixel(0, 0, Rgba([0, 0, 0, 255]));
        let out = recolor_raster(&img, Srgb8::BLACK, Srgb8::new(60, 60, 60)).unwrap();
        for x in 1..4 {
            assert_eq!(out.get_pixel(x, 0), img.get_pixel(x, 0));
        }
    }

    #[test]
    fn missing_foreground_is_an_error() {
        let img = RgbaImage::from_pixel(4, 4, Rgba([200, 200, 200, 255]));
        assert!(matches!(
            recolor_raster(&img, Srgb8::BLACK, Srgb8::WHITE),
            Err(ImageRepairError::NoForegroundPixels)
        ));
    }

    const VECTOR: &str = r##"<vector xmlns:android="http://schemas.android.com/apk/res/android"
    android:width="24dp" android:height="24dp"
    android:viewportWidth="24" android:viewportHeight="24">
    <path android:fillColor="#FF000000" android:pathData="M0,0h24v24H0z"/>
    <path android:fillColor="@color/accent" android:pathData="M2,2h2v2H2z"/>
    <path android:strokeColor="#000000" android:pathData="M4,4h2v2H4z"/>
</vector>"##;

    #[test]
    fn vector_rewrite_preserves_alpha_prefix_and_structure() {
        let to = Srgb8::new(0x44, 0x44, 0x44);
        let out = recolor_vector(VECTOR, Srgb8::BLACK, to).unwrap();
        assert!(out.contains("android:fillColor=\"#FF444444\""));
        assert!(out.contains("android:strokeColor=\"#444444\""));
        // the @color reference is left for the resource chain
        assert!(out.contains("android:fillColor=\"@color/accent\""));
        // only attribute values changed
        assert_eq!(out.len(), VECTOR.len());
    }

    #[test]
    fn vector_without_matching_paint() {
        assert!(matches!(
            recolor_vector(VECTOR, Srgb8::new(1, 2, 3), Srgb8::WHITE),
            Err(ImageRepairError::NoMatchingPaint)
        ));
        assert!(matches!(
            recolor_vector("<shape/>", Srgb8::BLACK, Srgb8::WHITE),
            Err(ImageRepairError::NotAVector(_))
        ));
    }

    #[test]
    fn drawable_lookup_spans_densities() {
        let dir = TempDir::new().unwrap();
        for rel in [
            "res/drawable/statsimg.png",
            "res/drawable-mdpi/icon.png",
            "res/drawable-xhdpi/icon.png",
        ] {
            let p = dir.path().join(rel);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(p, b"x").unwrap();
        }
        let tree = ResourceTree::load(dir.path()).unwrap();
        let single = resolve_drawable(&tree, "statsimg").unwrap();
        assert_eq!(single, vec![PathBuf::from("res/drawable/statsimg.png")]);
        let multi = resolve_drawable(&tree, "icon").unwrap();
        assert_eq!(multi.len(), 2);
        assert!(matches!(
            resolve_drawable(&tree, "missing"),
            Err(ImageRepairError::DrawableNotFound(_))
        ));
    }
}
