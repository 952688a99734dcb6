//! Structuring phase: strip non-facet annotations, carve the document
//! into facet sections, assemble the unified six-facet pattern, emit and
//! validate its XML form.

pub mod mapping;
pub mod unified;

use thiserror::Error;

use crate::annotation::Document;

pub use mapping::{FacetMapping, MappingError, TargetPath};
pub use unified::{
    build_unified_pattern, emit_pattern_xml, validate_pattern, ArtifactRef, Relationship,
    UnifiedPattern, ValidationReport,
};

/// Annotation types the pipeline adds that are not facets; stripped by
/// default before structuring.
pub const DEFAULT_STRIP_TYPES: &[&str] = &["Sentence", "Token", "SpaceToken", "Lookup"];

/// The six facets of the unified pattern description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facet {
    Identification,
    Core,
    Relationships,
    Guidance,
    Evaluation,
    Management,
}

/// Canonical facet annotation types and their unified-model home.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetLabel {
    Name,
    Identifier,
    Author,
    Keyword,
    Classification,
    AbstractionLevel,
    Domain,
    TypeOfPattern,
    Artifact,
    Role,
    Collection,
    Problem,
    Context,
    Solution,
    Alternative,
    Similar,
    Use,
    Relationship,
    Guidance,
    Evaluation,
    Management,
}

impl FacetLabel {
    pub fn facet(self) -> Facet {
        use FacetLabel::*;
        match self {
            Name | Identifier | Author | Keyword | Classification | AbstractionLevel | Domain
            | TypeOfPattern | Artifact | Role | Collection => Facet::Identification,
            Problem | Context | Solution => Facet::Core,
            Alternative | Similar | Use | Relationship => Facet::Relationships,
            Guidance => Facet::Guidance,
            Evaluation => Facet::Evaluation,
            Management => Facet::Management,
        }
    }

    pub fn from_type_name(name: &str) -> Option<FacetLabel> {
        use FacetLabel::*;
        Some(match name {
            "Name" => Name,
            "Identifier" => Identifier,
            "Author" => Author,
            "Keyword" => Keyword,
            "Classification" => Classification,
            "AbstractionLevel" => AbstractionLevel,
            "Domain" => Domain,
            "TypeOfPattern" => TypeOfPattern,
            "Artifact" => Artifact,
            "Role" => Role,
            "Collection" => Collection,
            "Problem" => Problem,
            "Context" => Context,
            "Solution" => Solution,
            "Alternative" => Alternative,
            "Similar" => Similar,
            "Use" => Use,
            "Relationship" => Relationship,
            "Guidance" => Guidance,
            "Evaluation" => Evaluation,
            "Management" => Management,
            _ => return None,
        })
    }
}

/// A heading annotation plus the content running up to the next heading.
/// The label is the annotation type name; synonym headings (e.g. Intent)
/// are resolved later through the facet mapping table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetSection {
    pub label: String,
    pub heading_span: (usize, usize),
    pub content_span: (usize, usize),
    pub content_text: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no facet annotations found in document")]
pub struct NoFacetsFound;

/// Removes all annotations of the listed types from all sets.
pub fn strip_annotations(doc: &mut Document, types: &[&str]) -> usize {
    doc.strip_types(types)
}

/// Carves the document into facet sections. Facet annotations sorted by
/// start act as headings; each section's content runs from its heading's
/// end to the next heading's start (or end of text), trimmed. Overlapping
/// headings keep the earlier-starting one; the other is dropped with a
/// warning.
pub fn extract_sections(doc: &Document) -> Result<(Vec<FacetSection>, Vec<String>), NoFacetsFound> {
    let mut warnings = Vec::new();
    let headings: Vec<(String, usize, usize)> = doc
        .default_set()
        .iter()
        .filter(|a| !DEFAULT_STRIP_TYPES.contains(&a.type_name.as_str()))
        .map(|a| (a.type_name.clone(), a.start, a.end))
        .collect();
    if headings.is_empty() {
        return Err(NoFacetsFound);
    }

    // drop headings overlapping an earlier-kept one
    let mut kept: Vec<(String, usize, usize)> = Vec::new();
    for (label, start, end) in headings {
        if let Some((plabel, pstart, pend)) = kept.last() {
            if start < *pend {
                warnings.push(format!(
                    "dropping {label} heading at [{start},{end}) overlapping {plabel} at [{pstart},{pend})"
                ));
                continue;
            }
        }
        kept.push((label, start, end));
    }

    if kept[0].1 > 0 {
        let preamble = doc.covered_text(0, kept[0].1);
        if !preamble.trim().is_empty() {
            warnings.push(format!(
                "text before first heading is not part of any facet ({} characters dropped)",
                kept[0].1
            ));
        }
    }

    let mut sections = Vec::new();
    for (i, (label, hstart, hend)) in kept.iter().enumerate() {
        let content_end = kept.get(i + 1).map(|n| n.1).unwrap_or_else(|| doc.len());
        let raw = doc.covered_text(*hend, content_end);
        // trim, keeping offsets in sync
        let leading = raw.chars().take_while(|c| c.is_whitespace()).count();
        let trailing = raw
            .chars()
            .rev()
            .take_while(|c| c.is_whitespace())
            .count()
            .min(raw.chars().count() - leading);
        let cstart = hend + leading;
        let cend = content_end - trailing;
        let content_text = doc.covered_text(cstart, cend);
        if content_text.is_empty() {
            warnings.push(format!("empty content for {label} heading at [{hstart},{hend})"));
        }
        sections.push(FacetSection {
            label: label.clone(),
            heading_span: (*hstart, *hend),
            content_span: (cstart, cend),
            content_text,
        });
    }
    Ok((sections, warnings))
}
