//! Detection-report and runtime UI-dump ingestion.
//!
//! The report format is a canonical JSON schema (see `docs/report-schema.md`)
//! that mirrors the content accessibility detectors emit: issue kind, the
//! component's resource-id and/or on-screen bounds, the reported color pair,
//! and the thresholds in force. UI dumps are uiautomator-style XML trees.

use std::fmt;
use std::path::PathBuf;

use image::RgbaImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{
    contrast_ratio, contrast_threshold, ColorLiteral, Srgb8, CHANNEL_MATCH_TOLERANCE,
    IMAGE_CONTRAST_THRESHOLD,
};
use crate::refdb::channel_distance;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed issue report: {0}")]
    MalformedReport(String),
    #[error("malformed UI dump: {0}")]
    MalformedDump(String),
}

/// Pixel rectangle in the `[x1,y1][x2,y2]` dump notation, exclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Bounds {
    pub x1: i32,
    pub y1: i32,
    pub x2: i32,
    pub y2: i32,
}

impl Bounds {
    pub fn new(x1: i32, y1: i32, x2: i32, y2: i32) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let inner = s
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| format!("bad bounds {s:?}"))?;
        let (a, b) = inner
            .split_once("][")
            .ok_or_else(|| format!("bad bounds {s:?}"))?;
        let pair = |t: &str| -> Result<(i32, i32), String> {
            let (x, y) = t.split_once(',').ok_or_else(|| format!("bad bounds {s:?}"))?;
            Ok((
                x.trim().parse().map_err(|_| format!("bad bounds {s:?}"))?,
                y.trim().parse().map_err(|_| format!("bad bounds {s:?}"))?,
            ))
        };
        let (x1, y1) = pair(a)?;
        let (x2, y2) = pair(b)?;
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn well_ordered(&self) -> bool {
        self.x1 < self.x2 && self.y1 < self.y2
    }

    pub fn width(&self) -> i32 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> i32 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> i64 {
        self.width() as i64 * self.height() as i64
    }

    pub fn contains(&self, other: &Bounds) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}][{},{}]", self.x1, self.y1, self.x2, self.y2)
    }
}

impl TryFrom<String> for Bounds {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        Bounds::parse(&s)
    }
}

impl From<Bounds> for String {
    fn from(b: Bounds) -> String {
        b.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    TextContrast,
    ImageContrast,
}

/// One detected color-contrast defect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IssueRecord {
    /// Position in the report's `issues` array; patches refer back to it.
    pub index: usize,
    pub kind: IssueKind,
    pub activity: String,
    pub resource_id: Option<String>,
    pub bounds: Option<Bounds>,
    pub fg: Srgb8,
    pub bg: Srgb8,
    pub observed_contrast: f64,
    pub required_contrast: f64,
    pub text_size_pt: Option<f64>,
    pub bold: Option<bool>,
    pub screenshot: Option<PathBuf>,
}

/// Page-level color inventory a detector may include alongside the issues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageColors {
    pub activity: String,
    pub colors: Vec<Srgb8>,
}

#[derive(Debug, Clone)]
pub struct ParsedReport {
    pub app_id: String,
    pub issues: Vec<IssueRecord>,
    pub pages: Vec<PageColors>,
    /// Entries dropped for violating record invariants, with the reason.
    pub warnings: Vec<String>,
    /// Total number of entries in the report, including dropped ones.
    pub total_entries: usize,
}

#[derive(Deserialize)]
struct RawReport {
    app_id: String,
    issues: Vec<serde_json::Value>,
    #[serde(default)]
    pages: Vec<PageColors>,
}

#[derive(Deserialize)]
struct RawIssue {
    kind: IssueKind,
    activity: String,
    #[serde(default)]
    resource_id: Option<String>,
    #[serde(default)]
    bounds: Option<String>,
    fg: String,
    bg: String,
    #[serde(default)]
    observed_contrast: Option<f64>,
    #[serde(default)]
    required_contrast: Option<f64>,
    #[serde(default)]
    text_size_pt: Option<f64>,
    #[serde(default)]
    bold: Option<bool>,
    #[serde(default)]
    screenshot: Option<PathBuf>,
}

/// Parses a canonical JSON issue report.
///
/// Unknown fields are ignored. Entries violating record invariants are
/// downgraded to warnings instead of failing the whole report; only a broken
/// envelope is fatal.
pub fn parse_issue_report(doc: &str) -> Result<ParsedReport, ReportError> {
    let raw: RawReport = serde_json::from_str(doc)
        .map_err(|e| ReportError::MalformedReport(e.to_string()))?;
    let total_entries = raw.issues.len();
    let mut issues = Vec::new();
    let mut warnings = Vec::new();

    for (index, value) in raw.issues.into_iter().enumerate() {
        let entry: RawIssue = match serde_json::from_value(value) {
            Ok(e) => e,
            Err(e) => {
                warnings.push(format!("issue {index}: {e}"));
                continue;
            }
        };
        match validate_issue(index, entry) {
            Ok(rec) => issues.push(rec),
            Err(msg) => warnings.push(format!("issue {index}: {msg}")),
        }
    }

    Ok(ParsedReport {
        app_id: raw.app_id,
        issues,
        pages: raw.pages,
        warnings,
        total_entries,
    })
}

fn validate_issue(index: usize, raw: RawIssue) -> Result<IssueRecord, String> {
    let bounds = match raw.bounds {
        Some(s) => {
            let b = Bounds::parse(&s)?;
            if !b.well_ordered() {
                return Err(format!("bounds not well-ordered: {b}"));
            }
            Some(b)
        }
        None => None,
    };
    if raw.resource_id.is_none() && bounds.is_none() {
        return Err("neither resource_id nor bounds present".to_string());
    }
    let fg = ColorLiteral::parse(&raw.fg).map_err(|e| e.to_string())?.rgb;
    let bg = ColorLiteral::parse(&raw.bg).map_err(|e| e.to_string())?.rgb;

    let required = match raw.required_contrast {
        Some(r) if r == 3.0 || r == 4.5 => r,
        Some(r) => return Err(format!("required_contrast {r} not in {{3.0, 4.5}}")),
        None => match raw.kind {
            IssueKind::ImageContrast => IMAGE_CONTRAST_THRESHOLD,
            // absent size/weight default to small regular text, the
            // conservative threshold that never under-repairs
            IssueKind::TextContrast => contrast_threshold(
                raw.text_size_pt.unwrap_or(12.0),
                raw.bold.unwrap_or(false),
            ),
        },
    };
    let observed = raw
        .observed_contrast
        .unwrap_or_else(|| contrast_ratio(fg, bg).value());

    Ok(IssueRecord {
        index,
        kind: raw.kind,
        activity: raw.activity,
        resource_id: raw.resource_id.filter(|s| !s.is_empty()),
        bounds,
        fg,
        bg,
        observed_contrast: observed,
        required_contrast: required,
        text_size_pt: raw.text_size_pt,
        bold: raw.bold,
        screenshot: raw.screenshot,
    })
}

/// One node of a runtime UI dump.
#[derive(Debug, Clone, PartialEq)]
pub struct UiNode {
    pub class_name: String,
    pub resource_id: Option<String>,
    pub text: Option<String>,
    pub bounds: Bounds,
    pub clickable: bool,
    pub children: Vec<UiNode>,
}

impl UiNode {
    /// Depth-first walk over the node and its descendants with depth.
    pub fn walk(&self) -> Vec<(usize, &UiNode)> {
        let mut out = Vec::new();
        fn rec<'a>(n: &'a UiNode, depth: usize, out: &mut Vec<(usize, &'a UiNode)>) {
            out.push((depth, n));
            for c in &n.children {
                rec(c, depth + 1, out);
            }
        }
        rec(self, 0, &mut out);
        out
    }

    pub fn find_by_resource_id(&self, id_name: &str) -> Option<&UiNode> {
        self.walk().into_iter().map(|(_, n)| n).find(|n| {
            n.resource_id
                .as_deref()
                .map(|rid| rid.rsplit('/').next() == Some(id_name))
                .unwrap_or(false)
        })
    }
}

/// Parses a uiautomator-style hierarchy dump.
pub fn parse_ui_dump(xml: &str) -> Result<UiNode, ReportError> {
    let doc = roxmltree::Document::parse(xml)
        .map_err(|e| ReportError::MalformedDump(e.to_string()))?;
    let root = doc.root_element();
    let node_el = if root.tag_name().name() == "node" {
        root
    } else {
        root.children()
            .find(|c| c.is_element() && c.tag_name().name() == "node")
            .ok_or_else(|| ReportError::MalformedDump("no <node> element".to_string()))?
    };
    build_node(node_el)
}

fn build_node(el: roxmltree::Node<'_, '_>) -> Result<UiNode, ReportError> {
    let attr = |name: &str| el.attribute(name).map(str::to_string);
    let bounds_raw = el
        .attribute("bounds")
        .ok_or_else(|| ReportError::MalformedDump("node missing bounds".to_string()))?;
    let bounds = Bounds::parse(bounds_raw).map_err(ReportError::MalformedDump)?;
    let mut children = Vec::new();
    for c in el.children().filter(|c| c.is_element()) {
        if c.tag_name().name() == "node" {
            children.push(build_node(c)?);
        }
    }
    Ok(UiNode {
        class_name: attr("class").unwrap_or_default(),
        resource_id: attr("resource-id").filter(|s| !s.is_empty()),
        text: attr("text").filter(|s| !s.is_empty()),
        bounds,
        clickable: el.attribute("clickable") == Some("true"),
        children,
    })
}

/// Fixes reports whose foreground/background assignment is reversed.
///
/// Within the issue's bounds the background should own more pixels than the
/// foreground; when the population near the reported foreground strictly
/// exceeds the one near the reported background, the two are swapped. The
/// contrast value is symmetric and stays as is. Without a screenshot or
/// bounds the record passes through unchanged.
pub fn correct_fg_bg_swap(rec: &IssueRecord, screenshot: &RgbaImage) -> IssueRecord {
    let Some(bounds) = rec.bounds else {
        return rec.clone();
    };
    let x1 = bounds.x1.max(0) as u32;
    let y1 = bounds.y1.max(0) as u32;
    let x2 = (bounds.x2.max(0) as u32).min(screenshot.width());
    let y2 = (bounds.y2.max(0) as u32).min(screenshot.height());
    if x1 >= x2 || y1 >= y2 {
        return rec.clone();
    }
    let mut fg_count = 0u64;
    let mut bg_count = 0u64;
    for y in y1..y2 {
        for x in x1..x2 {
            let p = screenshot.get_pixel(x, y);
            let c = Srgb8::new(p.0[0], p.0[1], p.0[2]);
            if channel_distance(c, rec.fg) <= CHANNEL_MATCH_TOLERANCE {
                fg_count += 1;
            }
            if channel_distance(c, rec.bg) <= CHANNEL_MATCH_TOLERANCE {
                bg_count += 1;
            }
        }
    }
    if fg_count > bg_count {
        let mut fixed = rec.clone();
        fixed.fg = rec.bg;
        fixed.bg = rec.fg;
        return fixed;
    }
    rec.clone()
}
