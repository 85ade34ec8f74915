//! Automatic repair of color-contrast accessibility defects in Android
//! resource trees.
//!
//! The pipeline ingests detection reports and runtime UI dumps, selects a
//! replacement color that keeps the component's and the page's design style
//! (reference-DB candidates first, direct HSV adjustment as fallback),
//! locates the concrete attribute/resource/smali/image edit site in the
//! decompiled tree, applies minimal textual patches, and verifies the result
//! by recomputing contrast on the patched tree.

pub mod color;
pub mod harmony;
pub mod image_repair;
pub mod localizer;
pub mod pipeline;
pub mod refdb;
pub mod report;
pub mod selector;
mod xmlspan;

pub use xmlspan::{path_from_string, path_to_string};
