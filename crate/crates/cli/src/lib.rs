//! File formats, rendering and command dispatch for the `tas` tool.

pub mod app;
pub mod dimacs;
pub mod doc;
pub mod render;
pub mod report;

pub use app::{run, Outcome};
pub use doc::{parse_document, parse_system, serialize_document, serialize_system, DocError, Document, System};
