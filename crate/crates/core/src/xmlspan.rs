//! Span-preserving XML access.
//!
//! Parses a document and records, for every element, its index path in
//! document order plus the exact byte span of each attribute value and of the
//! element's text content. Patches rewrite those spans in the raw text, so
//! every other byte of the file survives untouched and locators stay stable
//! across parse → serialize → parse.

use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Error)]
#[error("xml parse error: {0}")]
pub struct XmlError(String);

/// Path of element-child indices from the root element (which is `[]`).
pub type ElementPath = Vec<usize>;

pub fn path_to_string(path: &[usize]) -> String {
    path.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn path_from_string(s: &str) -> Option<ElementPath> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split('/').map(|p| p.parse().ok()).collect()
}

#[derive(Debug, Clone)]
pub struct SpanAttr {
    /// Namespace prefix as written (`android` in `android:textColor`).
    pub prefix: Option<String>,
    pub name: String,
    pub value: String,
    /// Byte span of the value between its quotes, in the raw document.
    pub value_span: Range<usize>,
    /// Raw text inside the quotes; differs from `value` only when escaped.
    pub raw_value: String,
}

impl SpanAttr {
    /// `prefix:name` as written in the document.
    pub fn qualified(&self) -> String {
        match &self.prefix {
            Some(p) => format!("{p}:{}", self.name),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpanElement {
    pub path: ElementPath,
    pub tag: String,
    pub attrs: Vec<SpanAttr>,
    /// First non-empty text child: parsed text and its byte span.
    pub text: Option<(String, Range<usize>)>,
}

impl SpanElement {
    pub fn attr(&self, qualified: &str) -> Option<&SpanAttr> {
        self.attrs.iter().find(|a| a.qualified() == qualified)
    }
}

#[derive(Debug, Clone)]
pub struct SpanDoc {
    pub text: String,
    pub elements: Vec<SpanElement>,
    pub root_tag: String,
}

impl SpanDoc {
    pub fn parse(text: &str) -> Result<Self, XmlError> {
        let doc = roxmltree::Document::parse(text).map_err(|e| XmlError(e.to_string()))?;
        let root = doc.root_element();
        let mut elements = Vec::new();
        collect(text, root, Vec::new(), &mut elements);
        Ok(SpanDoc {
            text: text.to_string(),
            elements,
            root_tag: root.tag_name().name().to_string(),
        })
    }

    pub fn element(&self, path: &[usize]) -> Option<&SpanElement> {
        self.elements.iter().find(|e| e.path == path)
    }
}

fn collect(
    raw: &str,
    node: roxmltree::Node<'_, '_>,
    path: ElementPath,
    out: &mut Vec<SpanElement>,
) {
    let attrs = node
        .attributes()
        .map(|a| {
            let span = attr_value_span(raw, a.range());
            SpanAttr {
                prefix: node
                    .lookup_prefix(a.namespace().unwrap_or(""))
                    .filter(|p| !p.is_empty())
                    .map(str::to_string),
                name: a.name().to_string(),
                value: a.value().to_string(),
                raw_value: raw[span.clone()].to_string(),
                value_span: span,
            }
        })
        .collect();
    let text = node
        .children()
        .find(|c| c.is_text() && c.text().is_some_and(|t| !t.trim().is_empty()))
        .map(|t| (t.text().unwrap_or("").to_string(), t.range()));
    out.push(SpanElement {
        path: path.clone(),
        tag: node.tag_name().name().to_string(),
        attrs,
        text,
    });
    let mut child_idx = 0;
    for child in node.children().filter(|c| c.is_element()) {
        let mut child_path = path.clone();
        child_path.push(child_idx);
        collect(raw, child, child_path, out);
        child_idx += 1;
    }
}

/// Narrows a `name="value"` attribute span to the bytes between the quotes.
fn attr_value_span(raw: &str, attr_range: Range<usize>) -> Range<usize> {
    let slice = &raw[attr_range.clone()];
    let eq = slice.find('=').expect("attribute has '='");
    let after = &slice[eq + 1..];
    let quote_off = after
        .find(['"', '\''])
        .expect("attribute value is quoted");
    let start = attr_range.start + eq + 1 + quote_off + 1;
    let quote = after.as_bytes()[quote_off];
    let end = raw[start..].find(quote as char).expect("closing quote") + start;
    start..end
}

/// Replaces a byte span, returning the new document text.
pub fn splice(text: &str, span: Range<usize>, replacement: &str) -> String {
    let mut out = String::with_capacity(text.len() + replacement.len());
    out.push_str(&text[..span.start]);
    out.push_str(replacement);
    out.push_str(&text[span.end..]);
    out
}
