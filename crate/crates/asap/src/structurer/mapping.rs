//! The facet mapping table: an external file mapping annotation types to
//! unified-model paths, so terminological synonyms (Intent for Problem,
//! Consequences for Resulting Context) stay configuration.
//!
//! File format: lines `AnnotationType -> facet.path[.list]`, `#` comments.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("cannot read mapping file {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed mapping line {line}: {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("unknown target path {path:?} on line {line}")]
    UnknownPath { line: usize, path: String },
}

/// Where a section's content lands in the unified pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetPath {
    IdentificationName,
    Identifiers,
    Authors,
    Keywords,
    ClassificationType,
    ClassificationCategory,
    ClassificationAbstractionLevel,
    ClassificationAspect,
    OriginProject,
    OriginParticipants,
    Artifacts { usage: Option<String> },
    CoreProblem,
    CoreContext,
    CoreSolution,
    Relationship { kind: String },
    GuidanceKnownUses,
    GuidanceExample,
    GuidanceLiterature,
    GuidanceIllustration,
    EvaluationDiscussion,
    EvaluationConfidence,
    EvaluationMaturity,
    ManagementVersion,
    ManagementCreationDate,
}

impl TargetPath {
    /// Whether the path appends to a list rather than filling a single slot.
    pub fn is_list(&self) -> bool {
        matches!(
            self,
            TargetPath::Identifiers
                | TargetPath::Authors
                | TargetPath::Keywords
                | TargetPath::OriginParticipants
                | TargetPath::Artifacts { .. }
                | TargetPath::Relationship { .. }
        )
    }

    pub fn parse(path: &str) -> Option<TargetPath> {
        // trailing ".list" marks list semantics explicitly; the list paths
        // below already append, so it is accepted and dropped
        let path = path.strip_suffix(".list").unwrap_or(path);
        Some(match path {
            "identification.name" => TargetPath::IdentificationName,
            "identification.identifiers" => TargetPath::Identifiers,
            "identification.authors" => TargetPath::Authors,
            "identification.keywords" => TargetPath::Keywords,
            "identification.classification.type" => TargetPath::ClassificationType,
            "identification.classification.category" => TargetPath::ClassificationCategory,
            "identification.classification.abstractionLevel" => {
                TargetPath::ClassificationAbstractionLevel
            }
            "identification.classification.aspect" => TargetPath::ClassificationAspect,
            "identification.origin.project" => TargetPath::OriginProject,
            "identification.origin.participants" => TargetPath::OriginParticipants,
            "identification.artifacts" => TargetPath::Artifacts { usage: None },
            "identification.artifacts.used" => {
                TargetPath::Artifacts { usage: Some("used".into()) }
            }
            "identification.artifacts.produced" => {
                TargetPath::Artifacts { usage: Some("produced".into()) }
            }
            "core.problem" => TargetPath::CoreProblem,
            "core.context" => TargetPath::CoreContext,
            "core.solution" => TargetPath::CoreSolution,
            "guidance.knownUses" => TargetPath::GuidanceKnownUses,
            "guidance.example" => TargetPath::GuidanceExample,
            "guidance.literature" => TargetPath::GuidanceLiterature,
            "guidance.illustration" => TargetPath::GuidanceIllustration,
            "evaluation.discussion" => TargetPath::EvaluationDiscussion,
            "evaluation.confidence" => TargetPath::EvaluationConfidence,
            "evaluation.maturity" => TargetPath::EvaluationMaturity,
            "management.version" => TargetPath::ManagementVersion,
            "management.creationDate" => TargetPath::ManagementCreationDate,
            other => {
                let kind = other.strip_prefix("relationships.")?;
                if kind.is_empty() || kind.contains('.') {
                    return None;
                }
                TargetPath::Relationship { kind: kind.to_string() }
            }
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct FacetMapping {
    entries: BTreeMap<String, TargetPath>,
}

impl FacetMapping {
    pub fn load(path: &Path) -> Result<FacetMapping, MappingError> {
        let text = fs::read_to_string(path).map_err(|e| MappingError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        FacetMapping::parse(&text)
    }

    pub fn parse(text: &str) -> Result<FacetMapping, MappingError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((label, target)) = line.split_once("->") else {
                return Err(MappingError::MalformedLine {
                    line: lineno + 1,
                    text: raw.to_string(),
                });
            };
            let label = label.trim();
            let target = target.trim();
            if label.is_empty() || target.is_empty() {
                return Err(MappingError::MalformedLine {
                    line: lineno + 1,
                    text: raw.to_string(),
                });
            }
            let path = TargetPath::parse(target).ok_or_else(|| MappingError::UnknownPath {
                line: lineno + 1,
                path: target.to_string(),
            })?;
            entries.insert(label.to_string(), path);
        }
        Ok(FacetMapping { entries })
    }

    pub fn lookup(&self, label: &str) -> Option<&TargetPath> {
        self.entries.get(label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mapping_lines() {
        let mapping = FacetMapping::parse(
            "# comment\nIntent -> core.problem\nAuthor -> identification.authors.list\n",
        )
        .unwrap();
        assert_eq!(mapping.lookup("Intent"), Some(&TargetPath::CoreProblem));
        assert_eq!(mapping.lookup("Author"), Some(&TargetPath::Authors));
        assert!(mapping.lookup("Author").unwrap().is_list());
    }

    #[test]
    fn relationship_kind_paths() {
        let p = TargetPath::parse("relationships.anti-pattern").unwrap();
        assert_eq!(p, TargetPath::Relationship { kind: "anti-pattern".into() });
        assert!(p.is_list());
    }

    #[test]
    fn unknown_path_rejected() {
        let err = FacetMapping::parse("X -> nowhere.at.all\n").unwrap_err();
        assert!(matches!(err, MappingError::UnknownPath { line: 1, .. }));
    }

    #[test]
    fn malformed_line_rejected() {
        let err = FacetMapping::parse("Intent core.problem\n").unwrap_err();
        assert!(matches!(err, MappingError::MalformedLine { line: 1, .. }));
    }
}
