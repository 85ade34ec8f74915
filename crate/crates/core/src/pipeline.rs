//! End-to-end repair: ingest → localize → select → patch → verify.
//!
//! Each issue is corrected for swapped colors, localized to its edit sites,
//! given a replacement color, and turned into minimal textual patches. A
//! target shared by several issues is patched once. Edits to a `<color>`
//! resource referenced by unrelated elements are redirected to a freshly
//! minted resource so nothing else on the page repaints. A verification pass
//! re-resolves every patched issue's literal and recomputes its contrast.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use image::RgbaImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{contrast_ratio, ColorLiteral, Srgb8, CHANNEL_MATCH_TOLERANCE};
use crate::harmony::{fit_template, HueHistogram, TemplateFit};
use crate::image_repair::{
    classify_image, recolor_raster, recolor_vector, ImageKind, ImageRepairError,
};
use crate::localizer::{
    attribute_set_for, elements_referencing_color, is_edit_text, locate_smali_settextcolor,
    normalize_component_type, parse_smali_int, resolve_by_bounds, resolve_by_id,
    resolve_color_reference, ElementRef, LocalizeError, LocatedTarget, ResourceTree,
    TargetKind, TargetLocator, TargetOrigin,
};
use crate::refdb::{channel_distance, ReferenceDb};
use crate::report::{correct_fg_bg_swap, IssueKind, IssueRecord, ParsedReport, UiNode};
use crate::selector::{select_optimal, SelectError, SelectionInput, SelectionStrategy};
use crate::xmlspan::{path_from_string, splice, SpanDoc};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("stale patch on {file}: {detail}")]
    StalePatch { file: String, detail: String },
    #[error(transparent)]
    Localize(#[from] LocalizeError),
    #[error("image error on {file}: {source}")]
    Image {
        file: String,
        #[source]
        source: image::ImageError,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One concrete edit applied to the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub kind: TargetKind,
    pub file: PathBuf,
    pub locator: TargetLocator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    pub old_value: String,
    pub new_value: String,
    /// Every issue this edit covers; a component shared across pages is
    /// patched once.
    pub issue_indexes: Vec<usize>,
    pub strategy: SelectionStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub value_escalated: bool,
    /// Set when a JPEG had to be re-encoded (quality 95).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lossy_reencode: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnrepairedReason {
    NotFound,
    NoDumpNode,
    MissingDump,
    NoText,
    AmbiguousText,
    NoRepairableAttribute,
    DanglingReference,
    CycleDetected,
    OrnamentalImage,
    NoForegroundPixels,
    NoMatchingPaint,
    DrawableNotFound,
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnrepairedEntry {
    pub issue_index: usize,
    pub reason: UnrepairedReason,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    EditTextFiltered,
    OperatorSkipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub issue_index: usize,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub issue_index: usize,
    pub new_contrast: f64,
    pub pass: bool,
}

/// The machine-readable result of one repair run
/// (schema in `docs/patch-report-schema.md`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    pub schema: String,
    pub app_id: String,
    pub patches: Vec<Patch>,
    pub unrepaired: Vec<UnrepairedEntry>,
    pub skipped: Vec<SkippedEntry>,
    /// Issues whose current resolved color already meets the requirement;
    /// repairing repaired output lands everything here.
    pub already_satisfied: Vec<usize>,
    pub verification: Vec<VerifyEntry>,
    pub repair_rate: f64,
}

pub const PATCH_REPORT_SCHEMA: &str = "patch-report/1";

/// Repaired / in-scope. In-scope excludes EditText-filtered and
/// operator-skipped issues; issues needing no edit count as repaired.
pub fn compute_repair_rate(report: &PatchReport) -> f64 {
    let mut repaired: BTreeSet<usize> = report.already_satisfied.iter().copied().collect();
    for p in &report.patches {
        repaired.extend(p.issue_indexes.iter().copied());
    }
    let in_scope = repaired.len() + report.unrepaired.len();
    if in_scope == 0 {
        return 1.0;
    }
    repaired.len() as f64 / in_scope as f64
}

/// Everything one repair run needs.
pub struct RepairRequest<'a> {
    /// Decompiled tree to repair (already copied to the output location).
    pub tree_root: &'a Path,
    pub report: &'a ParsedReport,
    /// Runtime UI dumps keyed by activity name (full or last segment).
    pub dumps: &'a BTreeMap<String, UiNode>,
    /// Page screenshots keyed the same way.
    pub screenshots: &'a BTreeMap<String, RgbaImage>,
    pub db: &'a ReferenceDb,
    pub skip_issues: &'a [usize],
}

fn lookup_activity<'m, V>(map: &'m BTreeMap<String, V>, activity: &str) -> Option<&'m V> {
    if let Some(v) = map.get(activity) {
        return Some(v);
    }
    let short = activity.rsplit(['.', '/']).next().unwrap_or(activity);
    map.get(short)
}

enum Localized {
    Skipped(SkipReason),
    Failed(UnrepairedReason, String),
    Ok {
        elements: Vec<ElementRef>,
        component_type: String,
        targets: Vec<LocatedTarget>,
    },
}

/// Runs the full pipeline against `tree_root` in place and returns the
/// patch report. Only I/O faults abort; per-issue failures become
/// `unrepaired` entries.
pub fn repair_app(req: &RepairRequest<'_>) -> Result<PatchReport, PipelineError> {
    let tree = ResourceTree::load(req.tree_root)?;
    let skip_set: BTreeSet<usize> = req.skip_issues.iter().copied().collect();

    // swap-corrected issues, then localization per issue
    let issues: Vec<IssueRecord> = req
        .report
        .issues
        .iter()
        .map(|rec| match lookup_activity(req.screenshots, &rec.activity) {
            Some(shot) if rec.bounds.is_some() => correct_fg_bg_swap(rec, shot),
            _ => rec.clone(),
        })
        .collect();

    let mut localized: Vec<Localized> = Vec::new();
    for issue in &issues {
        if skip_set.contains(&issue.index) {
            localized.push(Localized::Skipped(SkipReason::OperatorSkipped));
            continue;
        }
        localized.push(localize_issue(&tree, req, issue));
    }

    // page template per activity, from report page entries, issue colors and
    // the localized layout files; screenshots only when those carry no color
    let templates = fit_page_templates(&tree, req, &issues, &localized);

    // selection and patch materialization, in report order
    let mut patches: Vec<Patch> = Vec::new();
    let mut unrepaired: Vec<UnrepairedEntry> = Vec::new();
    let mut skipped: Vec<SkippedEntry> = Vec::new();
    let mut already_satisfied: Vec<usize> = Vec::new();

    for (issue, loc) in issues.iter().zip(&localized) {
        match loc {
            Localized::Skipped(reason) => skipped.push(SkippedEntry {
                issue_index: issue.index,
                reason: *reason,
            }),
            Localized::Failed(reason, detail) => unrepaired.push(UnrepairedEntry {
                issue_index: issue.index,
                reason: *reason,
                detail: detail.clone(),
            }),
            Localized::Ok {
                elements,
                component_type,
                targets,
            } => {
                let template = templates.get(&issue.activity).copied().flatten();
                match repair_one(
                    &tree,
                    req,
                    issue,
                    elements,
                    component_type,
                    targets,
                    template,
                    &mut patches,
                ) {
                    Ok(RepairOutcome::Patched) => {}
                    Ok(RepairOutcome::AlreadySatisfied) => {
                        already_satisfied.push(issue.index)
                    }
                    Err((reason, detail)) => unrepaired.push(UnrepairedEntry {
                        issue_index: issue.index,
                        reason,
                        detail,
                    }),
                }
            }
        }
    }

    apply_patches(req.tree_root, &patches)?;

    let verification = verify(req.tree_root, &issues, &patches)?;

    let mut report = PatchReport {
        schema: PATCH_REPORT_SCHEMA.to_string(),
        app_id: req.report.app_id.clone(),
        patches,
        unrepaired,
        skipped,
        already_satisfied,
        verification,
        repair_rate: 0.0,
    };
    report.repair_rate = compute_repair_rate(&report);
    Ok(report)
}

fn localize_issue(
    tree: &ResourceTree,
    req: &RepairRequest<'_>,
    issue: &IssueRecord,
) -> Localized {
    let elements = match locate_elements(tree, req, issue) {
        Ok(els) => els,
        Err(out) => return out,
    };

    let first_tag = tree
        .element(&elements[0])
        .map(|e| e.tag.clone())
        .unwrap_or_default();
    if is_edit_text(&first_tag) {
        return Localized::Skipped(SkipReason::EditTextFiltered);
    }
    let component_type = normalize_component_type(&first_tag);

    if issue.kind == IssueKind::ImageContrast {
        let dump_node = lookup_activity(req.dumps, &issue.activity).and_then(|dump| {
            issue
                .bounds
                .and_then(|b| dump.walk().into_iter().map(|(_, n)| n).find(|n| n.bounds == b))
                .or_else(|| {
                    issue
                        .resource_id
                        .as_deref()
                        .and_then(|id| dump.find_by_resource_id(crate::localizer::id_name(id)))
                })
        });
        let class = classify_image(tree, &elements[0], dump_node);
        if class.kind == ImageKind::Ornamental {
            return Localized::Failed(
                UnrepairedReason::OrnamentalImage,
                "image has no interaction evidence".to_string(),
            );
        }
    }

    let mut targets: Vec<LocatedTarget> = Vec::new();
    let mut last_err: Option<LocalizeError> = None;
    for el in &elements {
        match attribute_set_for(tree, issue.kind, el) {
            Ok(ts) => {
                for t in ts {
                    let key = (
                        t.target.file.clone(),
                        t.target.locator.clone(),
                        t.target.attribute.clone(),
                    );
                    if !targets.iter().any(|e| {
                        (
                            e.target.file.clone(),
                            e.target.locator.clone(),
                            e.target.attribute.clone(),
                        ) == key
                    }) {
                        targets.push(t);
                    }
                }
            }
            Err(e) => last_err = Some(e),
        }
    }

    if targets.is_empty() {
        // the XML route failed everywhere; text issues with an id may still
        // be set programmatically through a constant setTextColor
        if issue.kind == IssueKind::TextContrast {
            if let Some(id) = issue.resource_id.as_deref() {
                targets = locate_smali_settextcolor(tree, id);
            }
        }
    }
    if targets.is_empty() {
        let (reason, detail) = match last_err {
            Some(e) => (localize_reason(&e), e.to_string()),
            None => (
                UnrepairedReason::NoRepairableAttribute,
                "no repairable attribute".to_string(),
            ),
        };
        return Localized::Failed(reason, detail);
    }

    Localized::Ok {
        elements,
        component_type,
        targets,
    }
}

fn locate_elements(
    tree: &ResourceTree,
    req: &RepairRequest<'_>,
    issue: &IssueRecord,
) -> Result<Vec<ElementRef>, Localized> {
    if let Some(id) = issue.resource_id.as_deref() {
        return resolve_by_id(tree, id)
            .map_err(|e| Localized::Failed(localize_reason(&e), e.to_string()));
    }
    let bounds = issue.bounds.expect("record invariant: id or bounds");
    let Some(dump) = lookup_activity(req.dumps, &issue.activity) else {
        return Err(Localized::Failed(
            UnrepairedReason::MissingDump,
            format!("no UI dump for activity {:?}", issue.activity),
        ));
    };
    match resolve_by_bounds(tree, bounds, dump) {
        Ok(el) => Ok(vec![el]),
        Err(LocalizeError::NoText { resource_id }) => {
            // an image component may still be reachable through the dump's id
            if issue.kind == IssueKind::ImageContrast {
                if let Some(id) = resource_id.as_deref() {
                    return resolve_by_id(tree, id)
                        .map_err(|e| Localized::Failed(localize_reason(&e), e.to_string()));
                }
            }
            Err(Localized::Failed(
                UnrepairedReason::NoText,
                "dump node has no text".to_string(),
            ))
        }
        Err(e) => Err(Localized::Failed(localize_reason(&e), e.to_string())),
    }
}

fn localize_reason(e: &LocalizeError) -> UnrepairedReason {
    match e {
        LocalizeError::NotFound(_) => UnrepairedReason::NotFound,
        LocalizeError::NoDumpNode(_) => UnrepairedReason::NoDumpNode,
        LocalizeError::NoText { .. } => UnrepairedReason::NoText,
        LocalizeError::Ambiguous { .. } => UnrepairedReason::AmbiguousText,
        LocalizeError::NoRepairableAttribute => UnrepairedReason::NoRepairableAttribute,
        LocalizeError::DanglingReference(_) => UnrepairedReason::DanglingReference,
        LocalizeError::CycleDetected(_) => UnrepairedReason::CycleDetected,
        LocalizeError::Io { .. } | LocalizeError::Xml { .. } => UnrepairedReason::NotFound,
    }
}

fn fit_page_templates(
    tree: &ResourceTree,
    req: &RepairRequest<'_>,
    issues: &[IssueRecord],
    localized: &[Localized],
) -> BTreeMap<String, Option<TemplateFit>> {
    let mut files_by_activity: BTreeMap<&str, BTreeSet<&Path>> = BTreeMap::new();
    for (issue, loc) in issues.iter().zip(localized) {
        if let Localized::Ok { elements, .. } = loc {
            let entry = files_by_activity.entry(&issue.activity).or_default();
            for el in elements {
                entry.insert(&el.file);
            }
        }
    }

    let mut out = BTreeMap::new();
    let activities: BTreeSet<&str> = issues.iter().map(|i| i.activity.as_str()).collect();
    for activity in activities {
        let mut colors: Vec<(Srgb8, f64)> = Vec::new();
        for page in &req.report.pages {
            if page.activity == activity {
                colors.extend(page.colors.iter().map(|&c| (c, 1.0)));
            }
        }
        for issue in issues.iter().filter(|i| i.activity == activity) {
            colors.push((issue.fg, 1.0));
            colors.push((issue.bg, 1.0));
        }
        if let Some(files) = files_by_activity.get(activity) {
            for file in files {
                colors.extend(tree.layout_colors(file).into_iter().map(|c| (c, 1.0)));
            }
        }
        let mut fit = crate::harmony::page_hue_histogram(&colors)
            .ok()
            .and_then(|h| fit_template(&h).ok());
        if fit.is_none() {
            if let Some(shot) = lookup_activity(req.screenshots, activity) {
                fit = fit_template(&screenshot_histogram(shot)).ok();
            }
        }
        out.insert(activity.to_string(), fit);
    }
    out
}

fn screenshot_histogram(shot: &RgbaImage) -> HueHistogram {
    let mut counts: BTreeMap<Srgb8, u64> = BTreeMap::new();
    for p in shot.pixels() {
        if p.0[3] == 0 {
            continue;
        }
        *counts.entry(Srgb8::new(p.0[0], p.0[1], p.0[2])).or_insert(0) += 1;
    }
    let colors: Vec<(Srgb8, f64)> = counts.into_iter().map(|(c, n)| (c, n as f64)).collect();
    crate::harmony::page_hue_histogram(&colors).unwrap_or_default()
}

enum RepairOutcome {
    Patched,
    AlreadySatisfied,
}

#[allow(clippy::too_many_arguments)]
fn repair_one(
    tree: &ResourceTree,
    req: &RepairRequest<'_>,
    issue: &IssueRecord,
    elements: &[ElementRef],
    component_type: &str,
    targets: &[LocatedTarget],
    template: Option<TemplateFit>,
    patches: &mut Vec<Patch>,
) -> Result<RepairOutcome, (UnrepairedReason, String)> {
    // a target that already resolves to a satisfying color needs no edit;
    // this is what makes a second run over repaired output a no-op
    if targets
        .iter()
        .all(|t| target_already_satisfies(req.tree_root, t, issue))
    {
        return Ok(RepairOutcome::AlreadySatisfied);
    }

    let candidates = req.db.candidates_for(
        &req.report.app_id,
        component_type,
        issue.bg,
        issue.required_contrast,
    );
    let selection = select_optimal(&SelectionInput {
        original_fg: issue.fg,
        bg: issue.bg,
        required_contrast: issue.required_contrast,
        candidates,
        template,
    })
    .map_err(|e| match e {
        SelectError::Unsatisfiable { .. } => {
            (UnrepairedReason::Unsatisfiable, e.to_string())
        }
        other => (UnrepairedReason::Unsatisfiable, other.to_string()),
    })?;

    let mut issue_patches: Vec<Patch> = Vec::new();
    for lt in targets {
        match build_patches(tree, req.tree_root, issue, elements, lt, &selection) {
            Ok(ps) => issue_patches.extend(ps),
            Err((reason, detail)) => return Err((reason, detail)),
        }
    }

    for mut patch in issue_patches {
        let key = (patch.file.clone(), patch.locator.clone(), patch.attribute.clone());
        if let Some(existing) = patches.iter_mut().find(|p| {
            (p.file.clone(), p.locator.clone(), p.attribute.clone()) == key
        }) {
            // shared component already patched by an earlier issue
            if !existing.issue_indexes.contains(&issue.index) {
                existing.issue_indexes.push(issue.index);
            }
            continue;
        }
        if patch.kind == TargetKind::DrawableFile {
            patch.lossy_reencode = matches!(
                patch.file.extension().and_then(|e| e.to_str()),
                Some("jpg") | Some("jpeg")
            );
        }
        patches.push(patch);
    }
    Ok(RepairOutcome::Patched)
}

fn target_already_satisfies(root: &Path, lt: &LocatedTarget, issue: &IssueRecord) -> bool {
    let current = match lt.target.kind {
        TargetKind::XmlAttribute | TargetKind::ColorResource | TargetKind::StyleItem => {
            ColorLiteral::parse(&lt.target.current_value).map(|l| l.rgb).ok()
        }
        TargetKind::SmaliConst => parse_smali_int(&lt.target.current_value)
            .map(|v| rgb_from_argb(v as u32)),
        TargetKind::DrawableFile => image_current_fg(root, &lt.target.file, issue.fg),
    };
    match current {
        Some(c) => contrast_ratio(c, issue.bg).value() >= issue.required_contrast,
        None => false,
    }
}

fn rgb_from_argb(v: u32) -> Srgb8 {
    Srgb8::new((v >> 16) as u8, (v >> 8) as u8, v as u8)
}

/// The dominant opaque color near the expected foreground, or the overall
/// dominant opaque color when nothing is near it anymore.
fn image_current_fg(root: &Path, file: &Path, expected_fg: Srgb8) -> Option<Srgb8> {
    let abs = root.join(file);
    if file.extension().and_then(|e| e.to_str()) == Some("xml") {
        let text = std::fs::read_to_string(&abs).ok()?;
        let doc = SpanDoc::parse(&text).ok()?;
        let mut paints: Vec<Srgb8> = Vec::new();
        for el in &doc.elements {
            for attr in &el.attrs {
                if ["android:fillColor", "android:strokeColor", "android:tint"]
                    .contains(&attr.qualified().as_str())
                {
                    if let Ok(lit) = ColorLiteral::parse(&attr.value) {
                        paints.push(lit.rgb);
                    }
                }
            }
        }
        return paints
            .iter()
            .copied()
            .find(|&p| p == expected_fg)
            .or_else(|| paints.first().copied());
    }
    let img = image::open(&abs).ok()?.to_rgba8();
    let mut counts: BTreeMap<Srgb8, u64> = BTreeMap::new();
    for p in img.pixels() {
        if p.0[3] == 0 {
            continue;
        }
        *counts.entry(Srgb8::new(p.0[0], p.0[1], p.0[2])).or_insert(0) += 1;
    }
    let near = counts
        .iter()
        .filter(|(c, _)| channel_distance(**c, expected_fg) <= CHANNEL_MATCH_TOLERANCE)
        .max_by_key(|(c, n)| (**n, std::cmp::Reverse(**c)));
    if let Some((c, _)) = near {
        return Some(*c);
    }
    counts
        .iter()
        .max_by_key(|(c, n)| (**n, std::cmp::Reverse(**c)))
        .map(|(c, _)| *c)
}

fn build_patches(
    tree: &ResourceTree,
    root: &Path,
    issue: &IssueRecord,
    issue_elements: &[ElementRef],
    lt: &LocatedTarget,
    selection: &crate::selector::SelectionResult,
) -> Result<Vec<Patch>, (UnrepairedReason, String)> {
    let meta = |kind: TargetKind,
                file: PathBuf,
                locator: TargetLocator,
                attribute: Option<String>,
                old: String,
                new: String| Patch {
        kind,
        file,
        locator,
        attribute,
        old_value: old,
        new_value: new,
        issue_indexes: vec![issue.index],
        strategy: selection.strategy,
        harmonic_distance: selection.harmonic_distance,
        value_escalated: selection.value_escalated,
        lossy_reencode: false,
    };

    match lt.target.kind {
        TargetKind::XmlAttribute | TargetKind::StyleItem => {
            let lit = ColorLiteral::parse(&lt.target.current_value)
                .map_err(|e| (UnrepairedReason::NotFound, e.to_string()))?;
            Ok(vec![meta(
                lt.target.kind,
                lt.target.file.clone(),
                lt.target.locator.clone(),
                lt.target.attribute.clone(),
                lt.target.current_value.clone(),
                lit.with_rgb(selection.color),
            )])
        }
        TargetKind::ColorResource => {
            let TargetLocator::Resource { name } = &lt.target.locator else {
                unreachable!("color resource target carries a resource locator");
            };
            let shared_by_others = elements_referencing_color(tree, name)
                .into_iter()
                .any(|(el, _)| !issue_elements.contains(&el));
            let lit = ColorLiteral::parse(&lt.target.current_value)
                .map_err(|e| (UnrepairedReason::NotFound, e.to_string()))?;
            let new_literal = lit.with_rgb(selection.color);
            if !shared_by_others {
                return Ok(vec![meta(
                    TargetKind::ColorResource,
                    lt.target.file.clone(),
                    lt.target.locator.clone(),
                    None,
                    lt.target.current_value.clone(),
                    new_literal,
                )]);
            }
            // the resource repaints unrelated elements: mint a fresh one and
            // retarget only the problematic reference
            let minted = format!(
                "iris_fix_{}",
                new_literal.trim_start_matches('#').to_ascii_lowercase()
            );
            let mint = meta(
                TargetKind::ColorResource,
                lt.target.file.clone(),
                TargetLocator::Resource {
                    name: minted.clone(),
                },
                None,
                String::new(),
                new_literal,
            );
            let retarget = match lt.origin.as_ref() {
                Some(TargetOrigin::Attribute {
                    element,
                    attribute,
                    reference,
                }) => meta(
                    TargetKind::XmlAttribute,
                    element.file.clone(),
                    TargetLocator::Element {
                        path: crate::xmlspan::path_to_string(&element.path),
                    },
                    Some(attribute.clone()),
                    reference.clone(),
                    format!("@color/{minted}"),
                ),
                Some(TargetOrigin::StyleItem {
                    file,
                    style,
                    item,
                    reference,
                }) => meta(
                    TargetKind::StyleItem,
                    file.clone(),
                    TargetLocator::StyleItem {
                        style: style.clone(),
                        item: item.clone(),
                    },
                    None,
                    reference.clone(),
                    format!("@color/{minted}"),
                ),
                None => {
                    return Err((
                        UnrepairedReason::NoRepairableAttribute,
                        "shared color resource without a retargetable reference".to_string(),
                    ))
                }
            };
            Ok(vec![mint, retarget])
        }
        TargetKind::SmaliConst => {
            let old = lt.target.current_value.clone();
            let old_val = parse_smali_int(&old)
                .ok_or((UnrepairedReason::NotFound, format!("bad literal {old}")))?;
            let alpha = (old_val as u32) >> 24;
            let argb: u32 = (alpha << 24)
                | ((selection.color.r as u32) << 16)
                | ((selection.color.g as u32) << 8)
                | selection.color.b as u32;
            Ok(vec![meta(
                TargetKind::SmaliConst,
                lt.target.file.clone(),
                lt.target.locator.clone(),
                None,
                old,
                format_smali_int(argb as i32),
            )])
        }
        TargetKind::DrawableFile => {
            // validate the recolor up front so a wrong foreground color
            // surfaces as unrepaired rather than a half-applied patch
            let abs = root.join(&lt.target.file);
            let is_xml = lt.target.file.extension().and_then(|e| e.to_str()) == Some("xml");
            if is_xml {
                let text = std::fs::read_to_string(&abs)
                    .map_err(|e| (UnrepairedReason::DrawableNotFound, e.to_string()))?;
                recolor_vector(&text, issue.fg, selection.color)
                    .map_err(|e| (image_reason(&e), e.to_string()))?;
            } else {
                let img = image::open(&abs)
                    .map_err(|e| (UnrepairedReason::DrawableNotFound, e.to_string()))?
                    .to_rgba8();
                recolor_raster(&img, issue.fg, selection.color)
                    .map_err(|e| (image_reason(&e), e.to_string()))?;
            }
            Ok(vec![meta(
                TargetKind::DrawableFile,
                lt.target.file.clone(),
                TargetLocator::File,
                lt.target.attribute.clone(),
                issue.fg.to_hex(),
                selection.color.to_hex(),
            )])
        }
    }
}

fn image_reason(e: &ImageRepairError) -> UnrepairedReason {
    match e {
        ImageRepairError::NoForegroundPixels => UnrepairedReason::NoForegroundPixels,
        ImageRepairError::NoMatchingPaint => UnrepairedReason::NoMatchingPaint,
        ImageRepairError::DrawableNotFound(_) => UnrepairedReason::DrawableNotFound,
        _ => UnrepairedReason::NoMatchingPaint,
    }
}

pub fn format_smali_int(v: i32) -> String {
    if v < 0 {
        format!("-0x{:x}", (v as i64).unsigned_abs())
    } else {
        format!("0x{v:x}")
    }
}

fn locator_sort_key(l: &TargetLocator) -> (u8, Vec<usize>, String, usize) {
    match l {
        TargetLocator::Element { path } => (
            0,
            path_from_string(path).unwrap_or_default(),
            String::new(),
            0,
        ),
        TargetLocator::Resource { name } => (1, Vec::new(), name.clone(), 0),
        TargetLocator::StyleItem { style, item } => {
            (2, Vec::new(), format!("{style}/{item}"), 0)
        }
        TargetLocator::SmaliLine { line } => (3, Vec::new(), String::new(), *line),
        TargetLocator::File => (4, Vec::new(), String::new(), 0),
    }
}

/// Applies patches to the tree: minimal splices for text targets, recoloring
/// for image targets, atomic per-file writes. A patch whose `old_value` no
/// longer matches the file is rejected as stale and nothing of it is written.
pub fn apply_patches(root: &Path, patches: &[Patch]) -> Result<(), PipelineError> {
    let mut by_file: BTreeMap<PathBuf, Vec<&Patch>> = BTreeMap::new();
    for p in patches {
        by_file.entry(p.file.clone()).or_default().push(p);
    }
    for (file, mut group) in by_file {
        group.sort_by_key(|p| locator_sort_key(&p.locator));
        for patch in group {
            apply_one(root, &file, patch)?;
        }
    }
    Ok(())
}

fn apply_one(root: &Path, file: &Path, patch: &Patch) -> Result<(), PipelineError> {
    let abs = root.join(file);
    let stale = |detail: String| PipelineError::StalePatch {
        file: file.display().to_string(),
        detail,
    };
    match patch.kind {
        TargetKind::XmlAttribute => {
            let text = std::fs::read_to_string(&abs).map_err(|e| io_err(&abs, e))?;
            let doc = SpanDoc::parse(&text)
                .map_err(|e| stale(format!("unparsable xml: {e}")))?;
            let TargetLocator::Element { path } = &patch.locator else {
                return Err(stale("attribute patch without element locator".into()));
            };
            let el_path = path_from_string(path)
                .ok_or_else(|| stale(format!("bad locator {path}")))?;
            let el = doc
                .element(&el_path)
                .ok_or_else(|| stale(format!("no element at {path}")))?;
            let attr_name = patch.attribute.as_deref().unwrap_or_default();
            let attr = el
                .attr(attr_name)
                .ok_or_else(|| stale(format!("no attribute {attr_name}")))?;
            if attr.raw_value != patch.old_value {
                return Err(stale(format!(
                    "expected {:?}, found {:?}",
                    patch.old_value, attr.raw_value
                )));
            }
            write_atomic(
                &abs,
                splice(&text, attr.value_span.clone(), &patch.new_value).as_bytes(),
            )
        }
        TargetKind::ColorResource => {
            let TargetLocator::Resource { name } = &patch.locator else {
                return Err(stale("resource patch without resource locator".into()));
            };
            let text = std::fs::read_to_string(&abs).map_err(|e| io_err(&abs, e))?;
            let doc = SpanDoc::parse(&text)
                .map_err(|e| stale(format!("unparsable xml: {e}")))?;
            let existing = doc.elements.iter().find(|el| {
                el.tag == "color" && el.attr("name").map(|a| a.value == *name).unwrap_or(false)
            });
            if patch.old_value.is_empty() {
                // minting: insert before </resources>; a prior identical mint
                // makes this a no-op
                if let Some(el) = existing {
                    let current = el.text.as_ref().map(|(t, _)| t.trim()).unwrap_or("");
                    if current == patch.new_value {
                        return Ok(());
                    }
                    return Err(stale(format!(
                        "resource {name} already exists with value {current:?}"
                    )));
                }
                let close = text
                    .rfind("</resources>")
                    .ok_or_else(|| stale("no </resources> close tag".into()))?;
                let line = format!("    <color name=\"{name}\">{}</color>\n", patch.new_value);
                write_atomic(&abs, splice(&text, close..close, &line).as_bytes())
            } else {
                let el = existing
                    .ok_or_else(|| stale(format!("no color resource {name}")))?;
                let (current, span) = el
                    .text
                    .as_ref()
                    .ok_or_else(|| stale(format!("resource {name} has no text")))?;
                if current.trim() != patch.old_value {
                    return Err(stale(format!(
                        "expected {:?}, found {:?}",
                        patch.old_value,
                        current.trim()
                    )));
                }
                write_atomic(
                    &abs,
                    splice(&text, span.clone(), &patch.new_value).as_bytes(),
                )
            }
        }
        TargetKind::StyleItem => {
            let TargetLocator::StyleItem { style, item } = &patch.locator else {
                return Err(stale("style patch without style locator".into()));
            };
            let text = std::fs::read_to_string(&abs).map_err(|e| io_err(&abs, e))?;
            let doc = SpanDoc::parse(&text)
                .map_err(|e| stale(format!("unparsable xml: {e}")))?;
            let style_el = doc
                .elements
                .iter()
                .find(|el| {
                    el.tag == "style"
                        && el.attr("name").map(|a| a.value == *style).unwrap_or(false)
                })
                .ok_or_else(|| stale(format!("no style {style}")))?;
            let item_el = doc
                .elements
                .iter()
                .filter(|el| el.path.len() == style_el.path.len() + 1)
                .filter(|el| el.path.starts_with(&style_el.path))
                .find(|el| {
                    el.tag == "item"
                        && el.attr("name").map(|a| a.value == *item).unwrap_or(false)
                })
                .ok_or_else(|| stale(format!("no item {item} in style {style}")))?;
            let (current, span) = item_el
                .text
                .as_ref()
                .ok_or_else(|| stale(format!("item {item} has no text")))?;
            if current.trim() != patch.old_value {
                return Err(stale(format!(
                    "expected {:?}, found {:?}",
                    patch.old_value,
                    current.trim()
                )));
            }
            write_atomic(
                &abs,
                splice(&text, span.clone(), &patch.new_value).as_bytes(),
            )
        }
        TargetKind::SmaliConst => {
            let TargetLocator::SmaliLine { line } = &patch.locator else {
                return Err(stale("smali patch without line locator".into()));
            };
            let text = std::fs::read_to_string(&abs).map_err(|e| io_err(&abs, e))?;
            let mut lines: Vec<&str> = text.split_inclusive('\n').collect();
            let idx = line - 1;
            let Some(old_line) = lines.get(idx) else {
                return Err(stale(format!("file has no line {line}")));
            };
            let trimmed = old_line.trim_end_matches(['\n', '\r']);
            if !trimmed.trim_start().starts_with("const")
                || !trimmed.ends_with(&patch.old_value)
            {
                return Err(stale(format!(
                    "line {line} does not end with literal {:?}: {trimmed:?}",
                    patch.old_value
                )));
            }
            let new_line = rewrite_const_line(trimmed, &patch.old_value, &patch.new_value);
            let terminator = &old_line[trimmed.len()..];
            let replacement = format!("{new_line}{terminator}");
            lines[idx] = &replacement;
            let joined: String = lines.concat();
            write_atomic(&abs, joined.as_bytes())
        }
        TargetKind::DrawableFile => {
            let from = Srgb8::parse_hex(&patch.old_value)
                .map_err(|e| stale(e.to_string()))?;
            let to = Srgb8::parse_hex(&patch.new_value)
                .map_err(|e| stale(e.to_string()))?;
            let ext = file
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or_default()
                .to_ascii_lowercase();
            if ext == "xml" {
                let text = std::fs::read_to_string(&abs).map_err(|e| io_err(&abs, e))?;
                let out = recolor_vector(&text, from, to)
                    .map_err(|e| stale(e.to_string()))?;
                write_atomic(&abs, out.as_bytes())
            } else {
                let img = image::open(&abs)
                    .map_err(|e| stale(e.to_string()))?
                    .to_rgba8();
                let out =
                    recolor_raster(&img, from, to).map_err(|e| stale(e.to_string()))?;
                write_image(&abs, &ext, &out)
            }
        }
    }
}

fn rewrite_const_line(line: &str, old_lit: &str, new_lit: &str) -> String {
    let lit_start = line.len() - old_lit.len();
    let prefix = &line[..lit_start];
    let new_val = parse_smali_int(new_lit).unwrap_or_default();
    let indent: String = prefix.chars().take_while(|c| c.is_whitespace()).collect();
    let body = prefix.trim_start();
    let opcode = body.split_whitespace().next().unwrap_or("const");
    let fits = match opcode {
        "const/high16" => (new_val as u32) & 0xFFFF == 0,
        "const/4" => (-8..=7).contains(&new_val),
        "const/16" => i16::try_from(new_val).is_ok(),
        _ => true,
    };
    if fits {
        format!("{prefix}{new_lit}")
    } else {
        // re-encode as a full-width const; the assembler accepts any i32
        let reg = body
            .split_whitespace()
            .nth(1)
            .unwrap_or("v0")
            .trim_end_matches(',');
        format!("{indent}const {reg}, {new_lit}")
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().unwrap_or_default().to_string_lossy()
    ));
    std::fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn write_image(path: &Path, ext: &str, img: &RgbaImage) -> Result<(), PipelineError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp.{ext}",
        path.file_name().unwrap_or_default().to_string_lossy()
    ));
    let img_err = |e: image::ImageError| PipelineError::Image {
        file: path.display().to_string(),
        source: e,
    };
    match ext {
        "png" => img.save_with_format(&tmp, image::ImageFormat::Png).map_err(img_err)?,
        "webp" => {
            let f = std::fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
            let enc = image::codecs::webp::WebPEncoder::new_lossless(std::io::BufWriter::new(f));
            enc.encode(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgba8)
                .map_err(img_err)?;
        }
        "jpg" | "jpeg" => {
            // lossy format: re-encode at high quality and flag it in the patch
            let f = std::fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
            let mut enc =
                image::codecs::jpeg::JpegEncoder::new_with_quality(std::io::BufWriter::new(f), 95);
            enc.encode_image(&image::DynamicImage::ImageRgba8(img.clone()).to_rgb8())
                .map_err(img_err)?;
        }
        other => {
            return Err(PipelineError::StalePatch {
                file: path.display().to_string(),
                detail: format!("unsupported image extension {other:?}"),
            })
        }
    }
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Recomputes contrast for every patched issue against the patched tree.
///
/// The final foreground literal is re-resolved through whatever indirection
/// the patch left in place (attribute → resource chain → literal, smali
/// constant, recolored image) rather than trusted from the patch.
pub fn verify(
    root: &Path,
    issues: &[IssueRecord],
    patches: &[Patch],
) -> Result<Vec<VerifyEntry>, PipelineError> {
    let tree = ResourceTree::load(root)?;
    let by_issue: BTreeMap<usize, Vec<&Patch>> = {
        let mut m: BTreeMap<usize, Vec<&Patch>> = BTreeMap::new();
        for p in patches {
            for &i in &p.issue_indexes {
                m.entry(i).or_default().push(p);
            }
        }
        m
    };
    let mut out = Vec::new();
    for (issue_index, issue_patches) in by_issue {
        let Some(issue) = issues.iter().find(|i| i.index == issue_index) else {
            continue;
        };
        let fg = issue_patches
            .iter()
            .find_map(|p| resolve_patch_fg(&tree, root, p));
        let entry = match fg {
            Some(fg) => {
                let ratio = contrast_ratio(fg, issue.bg).value();
                VerifyEntry {
                    issue_index,
                    new_contrast: ratio,
                    pass: ratio >= issue.required_contrast,
                }
            }
            None => VerifyEntry {
                issue_index,
                new_contrast: 0.0,
                pass: false,
            },
        };
        out.push(entry);
    }
    Ok(out)
}

fn resolve_patch_fg(tree: &ResourceTree, root: &Path, patch: &Patch) -> Option<Srgb8> {
    match patch.kind {
        TargetKind::XmlAttribute => {
            let TargetLocator::Element { path } = &patch.locator else {
                return None;
            };
            let el_ref = ElementRef {
                file: patch.file.clone(),
                path: path_from_string(path)?,
            };
            let el = tree.element(&el_ref)?;
            let value = el.attr(patch.attribute.as_deref()?)?.value.clone();
            resolve_color_reference(tree, &value).ok().map(|(l, _)| l.rgb)
        }
        TargetKind::ColorResource => {
            if patch.old_value.is_empty() {
                return None; // minted entry: the retarget patch resolves it
            }
            let TargetLocator::Resource { name } = &patch.locator else {
                return None;
            };
            resolve_color_reference(tree, &format!("@color/{name}"))
                .ok()
                .map(|(l, _)| l.rgb)
        }
        TargetKind::StyleItem => {
            let TargetLocator::StyleItem { style: _, item: _ } = &patch.locator else {
                return None;
            };
            let abs = root.join(&patch.file);
            let text = std::fs::read_to_string(abs).ok()?;
            let doc = SpanDoc::parse(&text).ok()?;
            let TargetLocator::StyleItem { style, item } = &patch.locator else {
                return None;
            };
            let style_el = doc.elements.iter().find(|el| {
                el.tag == "style" && el.attr("name").map(|a| a.value == *style).unwrap_or(false)
            })?;
            let item_el = doc
                .elements
                .iter()
                .filter(|el| el.path.len() == style_el.path.len() + 1)
                .filter(|el| el.path.starts_with(&style_el.path))
                .find(|el| {
                    el.tag == "item"
                        && el.attr("name").map(|a| a.value == *item).unwrap_or(false)
                })?;
            let (value, _) = item_el.text.as_ref()?;
            resolve_color_reference(tree, value.trim())
                .ok()
                .map(|(l, _)| l.rgb)
        }
        TargetKind::SmaliConst => {
            let TargetLocator::SmaliLine { line } = &patch.locator else {
                return None;
            };
            let abs = root.join(&patch.file);
            let text = std::fs::read_to_string(abs).ok()?;
            let l = text.lines().nth(line - 1)?;
            let lit = l.trim().rsplit(", ").next()?;
            parse_smali_int(lit).map(|v| rgb_from_argb(v as u32))
        }
        TargetKind::DrawableFile => {
            let expected = Srgb8::parse_hex(&patch.new_value).ok()?;
            image_current_fg(root, &patch.file, expected)
        }
    }
}

/// Copies a directory tree file-by-file, preserving structure.
pub fn copy_tree(src: &Path, dst: &Path) -> Result<(), PipelineError> {
    for entry in walkdir::WalkDir::new(src).sort_by_file_name() {
        let entry = entry.map_err(|e| PipelineError::Io {
            path: src.display().to_string(),
            source: e.into_io_error().unwrap_or_else(|| {
                std::io::Error::new(std::io::ErrorKind::Other, "walk error")
            }),
        })?;
        let rel = entry.path().strip_prefix(src).expect("walk stays under src");
        let target = dst.join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&target).map_err(|e| io_err(&target, e))?;
        } else {
            if let Some(parent) = target.parent() {
                std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
            }
            std::fs::copy(entry.path(), &target).map_err(|e| io_err(&target, e))?;
        }
    }
    Ok(())
}
