//! ASAP: analysis and structuring of software process pattern texts.
//!
//! The toolkit runs a staged annotation pipeline (tokenize, split
//! sentences, gazetteer lookup, rule transduction) over plain-text
//! pattern descriptions, carves the annotated documents into a unified
//! six-facet pattern XML, and evaluates annotation quality against
//! hand-annotated references with strict/lenient/average precision,
//! recall and F-measure.

pub mod annotation;
pub mod cli;
pub mod diff;
pub mod inline_xml;
pub mod jape;
pub mod pipeline;
pub mod structurer;

pub use annotation::{Annotation, AnnotationSet, Corpus, Document, SpanRelation, DEFAULT_SET};
pub use inline_xml::{parse_inline_xml, serialize_inline_xml};
pub use jape::{parse_rule_file, run_phase, run_pipeline, Phase};
pub use pipeline::{gazetteer_lookup, split_sentences, tokenize, Gazetteer};
