//! Reference database of issue-free foreground/background color pairs.
//!
//! Records are indexed twice, per app and per component type, and persist as
//! canonically sorted JSON lines so two databases merge by concatenation plus
//! a rebuild. Only pairs meeting the strict 4.5:1 small-text threshold are
//! admitted, which makes every stored pair safe for any consumer.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::RgbaImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{contrast_ratio, Srgb8, CHANNEL_MATCH_TOLERANCE};

/// Admission threshold for stored pairs, independent of the source text size.
pub const ADMISSION_MIN_CONTRAST: f64 = 4.5;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("component crop has fewer than two distinct opaque colors")]
    Monochrome,
    #[error("malformed reference DB line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RecordSource {
    ReportColors,
    ScreenshotExtraction,
}

/// One issue-free foreground/background pair observed in a real app.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorPairRecord {
    pub app_id: String,
    pub component_type: String,
    pub fg: Srgb8,
    pub bg: Srgb8,
    pub source: RecordSource,
}

impl ColorPairRecord {
    fn key(&self) -> (&str, &str, Srgb8, Srgb8) {
        (&self.app_id, &self.component_type, self.fg, self.bg)
    }

    fn sort_key(&self) -> (String, String, Srgb8, Srgb8, RecordSource) {
        (
            self.app_id.clone(),
            self.component_type.clone(),
            self.fg,
            self.bg,
            self.source,
        )
    }
}

/// The two-index store. Both indexes always hold identical record sets.
#[derive(Debug, Default, Clone)]
pub struct ReferenceDb {
    by_app: std::collections::BTreeMap<String, Vec<ColorPairRecord>>,
    by_type: std::collections::BTreeMap<String, Vec<ColorPairRecord>>,
    rejected_contrast: u64,
}

impl ReferenceDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.by_app.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_app.is_empty()
    }

    /// Count of ingests rejected for failing the admission contrast.
    pub fn rejected_contrast(&self) -> u64 {
        self.rejected_contrast
    }

    /// Inserts a record if it meets the admission contrast; returns whether
    /// it is present afterwards. Duplicate (app, type, fg, bg) tuples are
    /// stored once; on a source conflict the lexically smaller source wins so
    /// ingest order never changes the result.
    pub fn ingest_record(&mut self, rec: ColorPairRecord) -> bool {
        if contrast_ratio(rec.fg, rec.bg).value() < ADMISSION_MIN_CONTRAST {
            self.rejected_contrast += 1;
            return false;
        }
        let app_vec = self.by_app.entry(rec.app_id.clone()).or_default();
        if let Some(existing) = app_vec.iter_mut().find(|r| r.key() == rec.key()) {
            if rec.source < existing.source {
                existing.source = rec.source;
                let type_vec = self
                    .by_type
                    .get_mut(&rec.component_type)
                    .expect("indexes in sync");
                type_vec
                    .iter_mut()
                    .find(|r| r.key() == rec.key())
                    .expect("indexes in sync")
                    .source = rec.source;
            }
            return true;
        }
        let pos = app_vec
            .binary_search_by_key(&rec.sort_key(), |r| r.sort_key())
            .unwrap_err();
        app_vec.insert(pos, rec.clone());
        let type_vec = self.by_type.entry(rec.component_type.clone()).or_default();
        let pos = type_vec
            .binary_search_by_key(&rec.sort_key(), |r| r.sort_key())
            .unwrap_err();
        type_vec.insert(pos, rec);
        true
    }

    /// Replacement foreground candidates for a problematic component.
    ///
    /// App-local pairs whose stored background is within the match tolerance
    /// of the query background come first; only when that tier is empty does
    /// the per-type tier (records from *other* apps) apply. Every returned
    /// foreground is re-checked against the query background at the caller's
    /// threshold rather than trusted from the stored pair. Order is
    /// descending contrast, then hex, deduplicated.
    pub fn candidates_for(
        &self,
        app_id: &str,
        component_type: &str,
        bg: Srgb8,
        required_contrast: f64,
    ) -> Vec<Srgb8> {
        let bg_matches = |rec: &ColorPairRecord| {
            channel_distance(rec.bg, bg) <= CHANNEL_MATCH_TOLERANCE
        };
        let passes = |fg: Srgb8| contrast_ratio(fg, bg).value() >= required_contrast;

        let tier = |records: &[ColorPairRecord], exclude_app: Option<&str>| -> Vec<Srgb8> {
            let mut fgs: Vec<Srgb8> = records
                .iter()
                .filter(|r| exclude_app != Some(r.app_id.as_str()))
                .filter(|r| bg_matches(r))
                .map(|r| r.fg)
                .filter(|&fg| passes(fg))
                .collect();
            fgs.sort_by(|a, b| {
                contrast_ratio(*b, bg)
                    .value()
                    .partial_cmp(&contrast_ratio(*a, bg).value())
                    .unwrap()
                    .then(a.cmp(b))
            });
            fgs.dedup();
            fgs
        };

        if let Some(records) = self.by_app.get(app_id) {
            let local = tier(records, None);
            if !local.is_empty() {
                return local;
            }
        }
        match self.by_type.get(component_type) {
            Some(records) => tier(records, Some(app_id)),
            None => Vec::new(),
        }
    }

    /// All records in canonical order.
    pub fn records(&self) -> impl Iterator<Item = &ColorPairRecord> {
        self.by_app.values().flatten()
    }

    /// Canonical JSONL form: one record per line, sorted by
    /// (app, type, fg, bg, source).
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in self.records() {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, DbError> {
        let mut db = ReferenceDb::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: ColorPairRecord =
                serde_json::from_str(line).map_err(|e| DbError::MalformedLine {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            db.ingest_record(rec);
        }
        db.check_consistency();
        Ok(db)
    }

    pub fn save(&self, path: &Path) -> Result<(), DbError> {
        fs::write(path, self.to_jsonl()).map_err(|e| DbError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DbError> {
        let text = fs::read_to_string(path).map_err(|e| DbError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_jsonl(&text)
    }

    fn check_consistency(&self) {
        let by_app: usize = self.by_app.values().map(Vec::len).sum();
        let by_type: usize = self.by_type.values().map(Vec::len).sum();
        assert_eq!(by_app, by_type, "reference DB indexes out of sync");
    }
}

pub fn channel_distance(a: Srgb8, b: Srgb8) -> u8 {
    let d = |x: u8, y: u8| x.abs_diff(y);
    d(a.r, b.r).max(d(a.g, b.g)).max(d(a.b, b.b))
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BuildStats {
    pub apps: usize,
    pub ingested: usize,
    pub rejected_contrast: u64,
    pub skipped_monochrome: u64,
    pub skipped_issue_components: u64,
}

#[derive(serde::Deserialize)]
struct ExplicitComponent {
    component_type: String,
    fg: Srgb8,
    bg: Srgb8,
}

/// Builds a database from a directory of per-app capture directories.
///
/// Each app directory may contain `components.json` (explicit issue-free
/// pairs a detector reported directly) and/or `dumps/*.xml` with matching
/// `screens/<stem>.png` page screenshots, from which pairs are extracted as
/// the two dominant colors of each issue-free leaf component's crop.
/// Components named in `report.json` as defective are excluded.
pub fn build_from_apps_dir(apps_dir: &Path) -> Result<(ReferenceDb, BuildStats), DbError> {
    use crate::localizer::{id_name, normalize_component_type};
    use crate::report::{parse_issue_report, parse_ui_dump};

    let mut db = ReferenceDb::new();
    let mut stats = BuildStats::default();

    let mut app_dirs: Vec<PathBuf> = fs::read_dir(apps_dir)
        .map_err(|e| DbError::Io {
            path: apps_dir.display().to_string(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    app_dirs.sort();

    for app_dir in app_dirs {
        let app_id = app_dir
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_default();
        stats.apps += 1;

        let components = app_dir.join("components.json");
        if components.is_file() {
            let text = fs::read_to_string(&components).map_err(|e| DbError::Io {
                path: components.display().to_string(),
                source: e,
            })?;
            let explicit: Vec<ExplicitComponent> =
                serde_json::from_str(&text).map_err(|e| DbError::MalformedLine {
                    line: 0,
                    msg: format!("{}: {e}", components.display()),
                })?;
            for c in explicit {
                let accepted = db.ingest_record(ColorPairRecord {
                    app_id: app_id.clone(),
                    component_type: c.component_type,
                    fg: c.fg,
                    bg: c.bg,
                    source: RecordSource::ReportColors,
                });
                if accepted {
                    stats.ingested += 1;
                }
            }
        }

        // components flagged in the report are defective and never stored
        let mut issue_ids: std::collections::BTreeSet<String> = Default::default();
        let mut issue_bounds: std::collections::BTreeSet<String> = Default::default();
        let report_path = app_dir.join("report.json");
        if report_path.is_file() {
            let text = fs::read_to_string(&report_path).map_err(|e| DbError::Io {
                path: report_path.display().to_string(),
                source: e,
            })?;
            if let Ok(report) = parse_issue_report(&text) {
                for issue in &report.issues {
                    if let Some(id) = issue.resource_id.as_deref() {
                        issue_ids.insert(id_name(id).to_string());
                    }
                    if let Some(b) = issue.bounds {
                        issue_bounds.insert(b.to_string());
                    }
                }
            }
        }

        let dumps_dir = app_dir.join("dumps");
        let screens_dir = app_dir.join("screens");
        let mut dump_files: Vec<PathBuf> = fs::read_dir(&dumps_dir)
            .into_iter()
            .flatten()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|x| x.to_str()) == Some("xml"))
            .collect();
        dump_files.sort();

        for dump_path in dump_files {
            let stem = dump_path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_default();
            let screen_path = screens_dir.join(format!("{stem}.png"));
            if !screen_path.is_file() {
                continue;
            }
            let Ok(text) = fs::read_to_string(&dump_path) else {
                continue;
            };
            let Ok(root) = parse_ui_dump(&text) else {
                continue;
            };
            let Ok(img) = image::open(&screen_path) else {
                continue;
            };
            let img = img.to_rgba8();

            for (_, node) in root.walk() {
                if !node.children.is_empty() || node.bounds.area() <= 0 {
                    continue;
                }
                let flagged = node
                    .resource_id
                    .as_deref()
                    .map(|id| issue_ids.contains(id_name(id)))
                    .unwrap_or(false)
                    || issue_bounds.contains(&node.bounds.to_string());
                if flagged {
                    stats.skipped_issue_components += 1;
                    continue;
                }
                let x1 = node.bounds.x1.max(0) as u32;
                let y1 = node.bounds.y1.max(0) as u32;
                let x2 = (node.bounds.x2.max(0) as u32).min(img.width());
                let y2 = (node.bounds.y2.max(0) as u32).min(img.height());
                if x1 >= x2 || y1 >= y2 {
                    continue;
                }
                let crop =
                    image::imageops::crop_imm(&img, x1, y1, x2 - x1, y2 - y1).to_image();
                match extract_dominant_pair(&crop) {
                    Ok((fg, bg)) => {
                        let accepted = db.ingest_record(ColorPairRecord {
                            app_id: app_id.clone(),
                            component_type: normalize_component_type(&node.class_name),
                            fg,
                            bg,
                            source: RecordSource::ScreenshotExtraction,
                        });
                        if accepted {
                            stats.ingested += 1;
                        }
                    }
                    Err(DbError::Monochrome) => stats.skipped_monochrome += 1,
                    Err(_) => {}
                }
            }
        }
    }
    stats.rejected_contrast = db.rejected_contrast();
    Ok((db, stats))
}

/// The two most used opaque colors of a component crop.
///
/// Pixel frequencies are counted on exact 8-bit values; the more frequent
/// color is taken as the background (a component's background dominates its
/// area) and the runner-up as the foreground. Fully transparent pixels are
/// ignored.
pub fn extract_dominant_pair(pixels: &RgbaImage) -> Result<(Srgb8, Srgb8), DbError> {
    let mut counts: HashMap<Srgb8, u64> = HashMap::new();
    for p in pixels.pixels() {
        if p.0[3] == 0 {
            continue;
        }
        *counts
            .entry(Srgb8::new(p.0[0], p.0[1], p.0[2]))
            .or_insert(0) += 1;
    }
    if counts.len() < 2 {
        return Err(DbError::Monochrome);
    }
    let mut ordered: Vec<(Srgb8, u64)> = counts.into_iter().collect();
    ordered.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let bg = ordered[0].0;
    let fg = ordered[1].0;
    Ok((fg, bg))
}
