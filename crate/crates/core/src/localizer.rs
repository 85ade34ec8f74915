//! Attribute-to-repair localization over a decompiled resource tree.
//!
//! Maps a detected issue to concrete edit sites: a color attribute in a
//! layout file, a `<color>` resource reached through a reference chain, a
//! style item, a constant `setTextColor` literal in smali, or drawable files.
//! Matching starts from the component id when the report has one and falls
//! back to bounds → dump text → `android:text` otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{ColorLiteral, Srgb8};
use crate::report::{Bounds, IssueKind, UiNode};
use crate::xmlspan::{path_to_string, ElementPath, SpanDoc, SpanElement};

/// Reference chains longer than this are treated as cycles gone undetected.
pub const MAX_REFERENCE_DEPTH: usize = 8;

#[derive(Debug, Error)]
pub enum LocalizeError {
    #[error("no element found for {0}")]
    NotFound(String),
    #[error("no dump node matches bounds {0}")]
    NoDumpNode(Bounds),
    #[error("dump node has no text to match on")]
    NoText { resource_id: Option<String> },
    #[error("text {text:?} matches {count} layout elements")]
    Ambiguous { text: String, count: usize },
    #[error("element has no repairable color attribute")]
    NoRepairableAttribute,
    #[error("dangling resource reference {0}")]
    DanglingReference(String),
    #[error("reference cycle through {0}")]
    CycleDetected(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("xml error in {path}: {msg}")]
    Xml { path: String, msg: String },
}

/// A layout file parsed with spans, addressed relative to the tree root.
#[derive(Debug, Clone)]
pub struct LayoutDocument {
    pub file: PathBuf,
    pub doc: SpanDoc,
}

/// Stable handle to one element of one layout file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementRef {
    pub file: PathBuf,
    pub path: ElementPath,
}

#[derive(Debug, Clone)]
struct ColorDef {
    file: PathBuf,
    raw: String,
}

#[derive(Debug, Clone)]
struct StyleItemDef {
    raw: String,
}

#[derive(Debug, Clone, Default)]
struct StyleDef {
    file: PathBuf,
    items: BTreeMap<String, StyleItemDef>,
}

/// The loaded decompiled tree: layouts, value resources, and the id table.
#[derive(Debug)]
pub struct ResourceTree {
    pub root: PathBuf,
    pub layouts: Vec<LayoutDocument>,
    colors: BTreeMap<String, ColorDef>,
    styles: BTreeMap<String, StyleDef>,
    strings: BTreeMap<String, String>,
    id_table: BTreeMap<String, i64>,
    pub warnings: Vec<String>,
}

impl ResourceTree {
    pub fn load(root: &Path) -> Result<Self, LocalizeError> {
        let mut tree = ResourceTree {
            root: root.to_path_buf(),
            layouts: Vec::new(),
            colors: BTreeMap::new(),
            styles: BTreeMap::new(),
            strings: BTreeMap::new(),
            id_table: BTreeMap::new(),
            warnings: Vec::new(),
        };
        let res = root.join("res");
        let mut dirs: Vec<PathBuf> = match std::fs::read_dir(&res) {
            Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).collect(),
            Err(_) => Vec::new(),
        };
        dirs.sort();
        for dir in dirs {
            let Some(dir_name) = dir.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            if dir_name == "layout" || dir_name.starts_with("layout-") {
                tree.load_layout_dir(&dir)?;
            } else if dir_name == "values" || dir_name.starts_with("values-") {
                tree.load_values_dir(&dir)?;
            }
        }
        Ok(tree)
    }

    fn rel(&self, path: &Path) -> PathBuf {
        path.strip_prefix(&self.root).unwrap_or(path).to_path_buf()
    }

    fn load_layout_dir(&mut self, dir: &Path) -> Result<(), LocalizeError> {
        for path in sorted_xml_files(dir) {
            let text = read(&path)?;
            match SpanDoc::parse(&text) {
                Ok(doc) => self.layouts.push(LayoutDocument {
                    file: self.rel(&path),
                    doc,
                }),
                Err(e) => self
                    .warnings
                    .push(format!("skipping {}: {e}", path.display())),
            }
        }
        Ok(())
    }

    fn load_values_dir(&mut self, dir: &Path) -> Result<(), LocalizeError> {
        for path in sorted_xml_files(dir) {
            let text = read(&path)?;
            let doc = match SpanDoc::parse(&text) {
                Ok(d) => d,
                Err(e) => {
                    self.warnings
                        .push(format!("skipping {}: {e}", path.display()));
                    continue;
                }
            };
            let rel = self.rel(&path);
            for el in &doc.elements {
                match el.tag.as_str() {
                    "color" => {
                        if let (Some(name), Some((raw, _))) = (el.attr("name"), &el.text) {
                            self.colors.entry(name.value.clone()).or_insert(ColorDef {
                                file: rel.clone(),
                                raw: raw.trim().to_string(),
                            });
                        }
                    }
                    "string" => {
                        if let (Some(name), Some((raw, _))) = (el.attr("name"), &el.text) {
                            self.strings
                                .entry(name.value.clone())
                                .or_insert(raw.clone());
                        }
                    }
                    "style" => {
                        if let Some(name) = el.attr("name") {
                            let style =
                                self.styles.entry(name.value.clone()).or_insert(StyleDef {
                                    file: rel.clone(),
                                    items: BTreeMap::new(),
                                });
                            // items are the element children of this style
                            for item in doc
                                .elements
                                .iter()
                                .filter(|c| c.path.len() == el.path.len() + 1)
                                .filter(|c| c.path.starts_with(&el.path))
                                .filter(|c| c.tag == "item")
                            {
                                if let (Some(iname), Some((raw, _))) =
                                    (item.attr("name"), &item.text)
                                {
                                    style
                                        .items
                                        .entry(iname.value.clone())
                                        .or_insert(StyleItemDef {
                                            raw: raw.trim().to_string(),
                                        });
                                }
                            }
                        }
                    }
                    "public" => {
                        if el.attr("type").map(|a| a.value.as_str()) == Some("id") {
                            if let (Some(name), Some(id)) = (el.attr("name"), el.attr("id")) {
                                if let Some(v) = parse_smali_int(&id.value) {
                                    self.id_table.entry(name.value.clone()).or_insert(v);
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn element(&self, r: &ElementRef) -> Option<&SpanElement> {
        self.layouts
            .iter()
            .find(|l| l.file == r.file)
            .and_then(|l| l.doc.element(&r.path))
    }

    pub fn string_resource(&self, name: &str) -> Option<&str> {
        self.strings.get(name).map(String::as_str)
    }

    pub fn color_resource_raw(&self, name: &str) -> Option<&str> {
        self.colors.get(name).map(|d| d.raw.as_str())
    }

    pub fn numeric_id(&self, name: &str) -> Option<i64> {
        self.id_table.get(name).copied()
    }

    /// Every literal color reachable from one layout file's attributes,
    /// following `@color/...` references to their literals.
    pub fn layout_colors(&self, file: &Path) -> Vec<Srgb8> {
        let Some(layout) = self.layouts.iter().find(|l| l.file == file) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for el in &layout.doc.elements {
            for attr in &el.attrs {
                if let Ok((lit, _)) = resolve_color_reference(self, &attr.value) {
                    out.push(lit.rgb);
                }
            }
        }
        out
    }
}

fn sorted_xml_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("xml"))
        .collect();
    files.sort();
    files
}

fn read(path: &Path) -> Result<String, LocalizeError> {
    std::fs::read_to_string(path).map_err(|e| LocalizeError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Widget class as it appears in layout tags and DB component types:
/// the segment after the last dot.
pub fn normalize_component_type(class_or_tag: &str) -> String {
    class_or_tag
        .rsplit('.')
        .next()
        .unwrap_or(class_or_tag)
        .to_string()
}

/// Input-hint components are excluded from repair.
pub fn is_edit_text(tag: &str) -> bool {
    normalize_component_type(tag) == "EditText"
}

/// Strips the runtime package prefix of a report id: `pkg:id/name` → `name`.
pub fn id_name(resource_id: &str) -> &str {
    resource_id.rsplit('/').next().unwrap_or(resource_id)
}

fn element_id_matches(attr_value: &str, name: &str) -> bool {
    attr_value.starts_with('@')
        && attr_value.contains("id/")
        && attr_value.rsplit('/').next() == Some(name)
}

/// All layout elements carrying the id, across every layout variant.
pub fn resolve_by_id(
    tree: &ResourceTree,
    resource_id: &str,
) -> Result<Vec<ElementRef>, LocalizeError> {
    let name = id_name(resource_id);
    let mut out = Vec::new();
    for layout in &tree.layouts {
        for el in &layout.doc.elements {
            if el
                .attr("android:id")
                .map(|a| element_id_matches(&a.value, name))
                .unwrap_or(false)
            {
                out.push(ElementRef {
                    file: layout.file.clone(),
                    path: el.path.clone(),
                });
            }
        }
    }
    if out.is_empty() {
        return Err(LocalizeError::NotFound(format!("id {resource_id}")));
    }
    Ok(out)
}

/// Bounds → dump node → text → unique `android:text` match.
///
/// Exact bounds equality wins (deepest node on ties); otherwise the smallest
/// node enclosing the issue bounds, which recovers dumps offset by a status
/// bar without grabbing siblings.
pub fn resolve_by_bounds(
    tree: &ResourceTree,
    bounds: Bounds,
    dump: &UiNode,
) -> Result<ElementRef, LocalizeError> {
    let nodes = dump.walk();
    let node = nodes
        .iter()
        .filter(|(_, n)| n.bounds == bounds)
        .max_by_key(|(depth, _)| *depth)
        .or_else(|| {
            nodes
                .iter()
                .filter(|(_, n)| n.bounds.contains(&bounds) && n.bounds.area() > 0)
                .min_by_key(|(depth, n)| (n.bounds.area(), std::cmp::Reverse(*depth)))
        })
        .map(|(_, n)| *n)
        .ok_or(LocalizeError::NoDumpNode(bounds))?;

    let Some(text) = node.text.as_deref() else {
        return Err(LocalizeError::NoText {
            resource_id: node.resource_id.clone(),
        });
    };

    let mut matches = Vec::new();
    for layout in &tree.layouts {
        for el in &layout.doc.elements {
            let Some(attr) = el.attr("android:text") else {
                continue;
            };
            let matched = attr.value == text
                || attr
                    .value
                    .strip_prefix("@string/")
                    .and_then(|k| tree.string_resource(k))
                    == Some(text);
            if matched {
                matches.push(ElementRef {
                    file: layout.file.clone(),
                    path: el.path.clone(),
                });
            }
        }
    }
    match matches.len() {
        0 => Err(LocalizeError::NotFound(format!("text {text:?}"))),
        1 => Ok(matches.remove(0)),
        n => Err(LocalizeError::Ambiguous {
            text: text.to_string(),
            count: n,
        }),
    }
}

/// One hop of a `@color/...` chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub name: String,
    pub file: PathBuf,
    pub raw: String,
}

/// Follows `@color/name` chains to the literal.
///
/// Returns the literal and the chain walked; the last link is the default
/// edit site. Plain literals return an empty chain.
pub fn resolve_color_reference(
    tree: &ResourceTree,
    reference: &str,
) -> Result<(ColorLiteral, Vec<ChainLink>), LocalizeError> {
    if reference.starts_with('#') {
        let lit = ColorLiteral::parse(reference)
            .map_err(|_| LocalizeError::DanglingReference(reference.to_string()))?;
        return Ok((lit, Vec::new()));
    }
    let mut chain = Vec::new();
    let mut seen = BTreeSet::new();
    let mut current = reference.to_string();
    for _ in 0..=MAX_REFERENCE_DEPTH {
        let Some(name) = current.strip_prefix("@color/") else {
            return Err(LocalizeError::DanglingReference(current));
        };
        if !seen.insert(name.to_string()) {
            return Err(LocalizeError::CycleDetected(name.to_string()));
        }
        let def = tree
            .colors
            .get(name)
            .ok_or_else(|| LocalizeError::DanglingReference(current.clone()))?;
        chain.push(ChainLink {
            name: name.to_string(),
            file: def.file.clone(),
            raw: def.raw.clone(),
        });
        if def.raw.starts_with('#') {
            let lit = ColorLiteral::parse(&def.raw)
                .map_err(|_| LocalizeError::DanglingReference(def.raw.clone()))?;
            return Ok((lit, chain));
        }
        current = def.raw.clone();
    }
    Err(LocalizeError::CycleDetected(reference.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    XmlAttribute,
    ColorResource,
    StyleItem,
    SmaliConst,
    DrawableFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum TargetLocator {
    Element { path: String },
    Resource { name: String },
    StyleItem { style: String, item: String },
    SmaliLine { line: usize },
    File,
}

impl fmt::Display for TargetLocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetLocator::Element { path } => write!(f, "e:{path}"),
            TargetLocator::Resource { name } => write!(f, "color:{name}"),
            TargetLocator::StyleItem { style, item } => write!(f, "style:{style}/{item}"),
            TargetLocator::SmaliLine { line } => write!(f, "line:{line}"),
            TargetLocator::File => write!(f, "file"),
        }
    }
}

/// One concrete edit site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairTarget {
    pub kind: TargetKind,
    /// Relative to the tree root.
    pub file: PathBuf,
    pub locator: TargetLocator,
    pub attribute: Option<String>,
    pub current_value: String,
}

/// Where a color-resource target was referenced from; needed when a shared
/// resource forces minting a fresh one and retargeting the reference.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetOrigin {
    Attribute {
        element: ElementRef,
        attribute: String,
        reference: String,
    },
    StyleItem {
        file: PathBuf,
        style: String,
        item: String,
        reference: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocatedTarget {
    pub target: RepairTarget,
    pub origin: Option<TargetOrigin>,
    pub chain: Vec<ChainLink>,
}

const TEXT_COLOR_ATTRS: [&str; 3] = [
    "android:textColor",
    "android:textColorLink",
    "android:titleTextColor",
];

/// The edit sites for one located element under one issue kind.
///
/// Text issues target the text-color attributes present on the element, or
/// the style's `android:textColor` item when none is; `@color` references are
/// chased to the literal definition. Image issues target the drawable files
/// behind `android:src` / `android:background`. EditText elements produce no
/// targets at all.
pub fn attribute_set_for(
    tree: &ResourceTree,
    issue_kind: IssueKind,
    element: &ElementRef,
) -> Result<Vec<LocatedTarget>, LocalizeError> {
    let el = tree
        .element(element)
        .ok_or_else(|| LocalizeError::NotFound(format!("element {:?}", element.path)))?;
    if is_edit_text(&el.tag) {
        return Ok(Vec::new());
    }
    match issue_kind {
        IssueKind::TextContrast => text_targets(tree, element, el),
        IssueKind::ImageContrast => image_targets(tree, element, el),
    }
}

fn text_targets(
    tree: &ResourceTree,
    element: &ElementRef,
    el: &SpanElement,
) -> Result<Vec<LocatedTarget>, LocalizeError> {
    let mut out = Vec::new();
    for attr_name in TEXT_COLOR_ATTRS {
        let Some(attr) = el.attr(attr_name) else {
            continue;
        };
        if let Some(t) = value_target(tree, &attr.value, || TargetOrigin::Attribute {
            element: element.clone(),
            attribute: attr_name.to_string(),
            reference: attr.value.clone(),
        })? {
            out.push(located_or_direct(
                t,
                element,
                attr_name,
                &attr.raw_value,
            ));
        }
    }
    if !out.is_empty() {
        return Ok(out);
    }

    // no direct attribute: follow the style reference into styles.xml
    if let Some(style_attr) = el.attr("style") {
        if let Some(style_name) = style_attr.value.strip_prefix("@style/") {
            if let Some(style) = tree.styles.get(style_name) {
                if let Some(item) = style.items.get("android:textColor") {
                    let origin = || TargetOrigin::StyleItem {
                        file: style.file.clone(),
                        style: style_name.to_string(),
                        item: "android:textColor".to_string(),
                        reference: item.raw.clone(),
                    };
                    if let Some(t) = value_target(tree, &item.raw, origin)? {
                        let located = match t {
                            ValueTarget::Literal => LocatedTarget {
                                target: RepairTarget {
                                    kind: TargetKind::StyleItem,
                                    file: style.file.clone(),
                                    locator: TargetLocator::StyleItem {
                                        style: style_name.to_string(),
                                        item: "android:textColor".to_string(),
                                    },
                                    attribute: None,
                                    current_value: item.raw.clone(),
                                },
                                origin: None,
                                chain: Vec::new(),
                            },
                            ValueTarget::Chain { chain, origin } => {
                                chain_target(chain, origin)
                            }
                        };
                        return Ok(vec![located]);
                    }
                }
            }
        }
    }
    Err(LocalizeError::NoRepairableAttribute)
}

enum ValueTarget {
    Literal,
    Chain {
        chain: Vec<ChainLink>,
        origin: TargetOrigin,
    },
}

fn value_target(
    tree: &ResourceTree,
    value: &str,
    origin: impl Fn() -> TargetOrigin,
) -> Result<Option<ValueTarget>, LocalizeError> {
    if value.starts_with('#') {
        ColorLiteral::parse(value)
            .map_err(|_| LocalizeError::DanglingReference(value.to_string()))?;
        return Ok(Some(ValueTarget::Literal));
    }
    if value.starts_with("@color/") {
        let (_lit, chain) = resolve_color_reference(tree, value)?;
        return Ok(Some(ValueTarget::Chain {
            chain,
            origin: origin(),
        }));
    }
    // theme references and other indirections are out of reach
    Ok(None)
}

fn located_or_direct(
    t: ValueTarget,
    element: &ElementRef,
    attr_name: &str,
    raw_value: &str,
) -> LocatedTarget {
    match t {
        ValueTarget::Literal => LocatedTarget {
            target: RepairTarget {
                kind: TargetKind::XmlAttribute,
                file: element.file.clone(),
                locator: TargetLocator::Element {
                    path: path_to_string(&element.path),
                },
                attribute: Some(attr_name.to_string()),
                current_value: raw_value.to_string(),
            },
            origin: None,
            chain: Vec::new(),
        },
        ValueTarget::Chain { chain, origin } => chain_target(chain, origin),
    }
}

fn chain_target(chain: Vec<ChainLink>, origin: TargetOrigin) -> LocatedTarget {
    let last = chain.last().expect("chain is non-empty").clone();
    LocatedTarget {
        target: RepairTarget {
            kind: TargetKind::ColorResource,
            file: last.file,
            locator: TargetLocator::Resource { name: last.name },
            attribute: None,
            current_value: last.raw,
        },
        origin: Some(origin),
        chain,
    }
}

fn image_targets(
    tree: &ResourceTree,
    element: &ElementRef,
    el: &SpanElement,
) -> Result<Vec<LocatedTarget>, LocalizeError> {
    for attr_name in ["android:src", "android:background"] {
        let Some(attr) = el.attr(attr_name) else {
            continue;
        };
        let Some(name) = attr.value.strip_prefix("@drawable/") else {
            continue;
        };
        let files = crate::image_repair::resolve_drawable(tree, name).map_err(|_| {
            LocalizeError::DanglingReference(attr.value.clone())
        })?;
        let targets = files
            .into_iter()
            .map(|file| LocatedTarget {
                target: RepairTarget {
                    kind: TargetKind::DrawableFile,
                    file,
                    locator: TargetLocator::File,
                    attribute: Some(attr_name.to_string()),
                    current_value: attr.value.clone(),
                },
                origin: Some(TargetOrigin::Attribute {
                    element: element.clone(),
                    attribute: attr_name.to_string(),
                    reference: attr.value.clone(),
                }),
                chain: Vec::new(),
            })
            .collect();
        return Ok(targets);
    }
    Err(LocalizeError::NoRepairableAttribute)
}

/// Every element whose attributes resolve through the given color resource.
///
/// Editing a shared `<color>` in place would repaint every one of these, so
/// the patcher mints a fresh resource when any of them is not part of the
/// issue under repair.
pub fn elements_referencing_color(
    tree: &ResourceTree,
    resource_name: &str,
) -> Vec<(ElementRef, String)> {
    let mut out = Vec::new();
    for layout in &tree.layouts {
        for el in &layout.doc.elements {
            for attr in &el.attrs {
                let Some(start) = attr.value.strip_prefix("@color/") else {
                    continue;
                };
                let mut hits = start == resource_name;
                if !hits {
                    if let Ok((_, chain)) = resolve_color_reference(tree, &attr.value) {
                        hits = chain.iter().any(|l| l.name == resource_name);
                    }
                }
                if hits {
                    out.push((
                        ElementRef {
                            file: layout.file.clone(),
                            path: el.path.clone(),
                        },
                        attr.qualified(),
                    ));
                }
            }
        }
    }
    out
}

/// Parses a smali integer literal: `-0x1`, `0x7f090001`, or decimal.
pub fn parse_smali_int(s: &str) -> Option<i64> {
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let v = if let Some(hex) = rest.strip_prefix("0x") {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        rest.parse::<i64>().ok()?
    };
    Some(if neg { -v } else { v })
}

/// Constant-literal `setTextColor` call sites wired to the issue's view.
///
/// The pattern is: a `const` loading the id literal feeding `findViewById`,
/// the result landing in a register via `move-result-object`, and later a
/// `const` color literal in the same basic block as the
/// `invoke-virtual {view, color} ... ->setTextColor(I)V` that consumes it.
/// Colors computed through helper calls never match.
pub fn locate_smali_settextcolor(
    tree: &ResourceTree,
    resource_id: &str,
) -> Vec<LocatedTarget> {
    let name = id_name(resource_id);
    let Some(numeric_id) = tree.numeric_id(name) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut smali_files: Vec<PathBuf> = walkdir::WalkDir::new(&tree.root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| {
            e.file_type().is_file()
                && e.path().extension().and_then(|x| x.to_str()) == Some("smali")
                && e.path()
                    .strip_prefix(&tree.root)
                    .ok()
                    .and_then(|r| r.components().next())
                    .map(|c| c.as_os_str().to_string_lossy().starts_with("smali"))
                    .unwrap_or(false)
        })
        .map(|e| e.into_path())
        .collect();
    smali_files.sort();

    for path in smali_files {
        let Ok(text) = std::fs::read_to_string(&path) else {
            continue;
        };
        let rel = tree.rel2(&path);
        out.extend(scan_smali(&text, numeric_id, &rel));
    }
    out
}

impl ResourceTree {
    fn rel2(&self, path: &Path) -> PathBuf {
        path.strip_prefix(&self.root).unwrap_or(path).to_path_buf()
    }
}

fn scan_smali(text: &str, numeric_id: i64, file: &Path) -> Vec<LocatedTarget> {
    let mut out = Vec::new();
    let mut in_method = false;
    // register -> pending const literal (value, 1-based line, literal text)
    let mut consts: BTreeMap<String, (i64, usize, String)> = BTreeMap::new();
    let mut view_regs: BTreeSet<String> = BTreeSet::new();
    let mut pending_view = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        let line_no = idx + 1;
        if line.starts_with(".method") {
            in_method = true;
            consts.clear();
            view_regs.clear();
            pending_view = false;
            continue;
        }
        if line.starts_with(".end method") {
            in_method = false;
            continue;
        }
        if !in_method || line.is_empty() || line.starts_with('#') || line.starts_with(".line") {
            continue;
        }
        // basic-block boundary: a candidate color const must not survive it
        if line.starts_with(':')
            || line.starts_with("goto")
            || line.starts_with("if-")
            || line.starts_with("return")
            || line.starts_with("throw")
            || line.starts_with("packed-switch")
            || line.starts_with("sparse-switch")
        {
            consts.clear();
            pending_view = false;
            continue;
        }
        if line.starts_with("const") {
            if let Some((reg, lit_text, value)) = parse_const_line(line) {
                view_regs.remove(&reg);
                consts.insert(reg, (value, line_no, lit_text));
            }
            pending_view = false;
            continue;
        }
        if line.starts_with("move-result-object") {
            if let Some(reg) = line.split_whitespace().nth(1) {
                let reg = reg.trim_end_matches(',').to_string();
                consts.remove(&reg);
                if pending_view {
                    view_regs.insert(reg);
                }
            }
            pending_view = false;
            continue;
        }
        if line.starts_with("check-cast") {
            continue;
        }
        if line.starts_with("invoke-") {
            let regs = invoke_registers(line);
            if line.contains("->findViewById(I)") {
                pending_view = regs
                    .last()
                    .and_then(|r| consts.get(r))
                    .map(|(v, _, _)| *v == numeric_id)
                    .unwrap_or(false);
            } else if line.contains("->setTextColor(I)V") && regs.len() == 2 {
                if view_regs.contains(&regs[0]) {
                    if let Some((_, const_line, lit_text)) = consts.get(&regs[1]) {
                        out.push(LocatedTarget {
                            target: RepairTarget {
                                kind: TargetKind::SmaliConst,
                                file: file.to_path_buf(),
                                locator: TargetLocator::SmaliLine { line: *const_line },
                                attribute: None,
                                current_value: lit_text.clone(),
                            },
                            origin: None,
                            chain: Vec::new(),
                        });
                    }
                }
                pending_view = false;
            } else {
                pending_view = false;
            }
            continue;
        }
    }
    out
}

fn parse_const_line(line: &str) -> Option<(String, String, i64)> {
    // e.g. `const v1, -0x1` or `const/high16 v0, 0x7f090000`
    let rest = line.split_once(' ')?.1;
    let (reg, lit) = rest.split_once(',')?;
    let lit = lit.trim();
    let value = parse_smali_int(lit)?;
    Some((reg.trim().to_string(), lit.to_string(), value))
}

fn invoke_registers(line: &str) -> Vec<String> {
    let Some(open) = line.find('{') else {
        return Vec::new();
    };
    let Some(close) = line.find('}') else {
        return Vec::new();
    };
    line[open + 1..close]
        .split(',')
        .map(|r| r.trim().to_string())
        .filter(|r| !r.is_empty())
        .collect()
}
