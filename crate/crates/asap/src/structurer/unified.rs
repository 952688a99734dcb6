//! The unified six-facet pattern: assembly from facet sections, XML
//! emission and validation.

use thiserror::Error;

use super::mapping::{FacetMapping, TargetPath};
use super::FacetSection;

pub const KNOWN_RELATIONSHIP_KINDS: &[&str] =
    &["similar", "refinement", "subsequent", "anti-pattern", "alternative", "use"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classification {
    pub type_of_pattern: Option<String>,
    pub category: Option<String>,
    pub abstraction_level: Option<String>,
    pub aspect: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Origin {
    pub project: Option<String>,
    pub participants: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArtifactRef {
    pub text: String,
    pub usage: Option<String>, // "used" | "produced"
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Identification {
    pub name: Option<String>,
    pub identifiers: Vec<String>,
    pub authors: Vec<String>,
    pub keywords: Vec<String>,
    pub classification: Classification,
    pub origin: Origin,
    pub artifacts: Vec<ArtifactRef>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Core {
    pub problem: Option<String>,
    pub context: Option<String>,
    pub solution: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Relationship {
    pub kind: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Guidance {
    pub known_uses: Option<String>,
    pub example: Option<String>,
    pub literature: Option<String>,
    pub illustration: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evaluation {
    pub discussion: Option<String>,
    pub confidence: Option<String>,
    pub maturity: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Management {
    pub version: Option<String>,
    pub creation_date: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnifiedPattern {
    pub identification: Identification,
    pub core: Core,
    pub relationships: Vec<Relationship>,
    pub guidance: Guidance,
    pub evaluation: Evaluation,
    pub management: Management,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no mapping entry for section label {0:?}")]
pub struct UnmappedLabel(pub String);

/// Places each section's content at the unified-model path given by the
/// mapping table. Repeated single-valued labels keep the first and warn;
/// list-valued labels append.
pub fn build_unified_pattern(
    sections: &[FacetSection],
    mapping: &FacetMapping,
) -> Result<(UnifiedPattern, Vec<String>), UnmappedLabel> {
    let mut pattern = UnifiedPattern::default();
    let mut warnings = Vec::new();

    let set_single = |slot: &mut Option<String>, label: &str, value: &str, warnings: &mut Vec<String>| {
        if slot.is_some() {
            warnings.push(format!("repeated {label} section; keeping the first"));
        } else {
            *slot = Some(value.to_string());
        }
    };

    for section in sections {
        let path = mapping
            .lookup(&section.label)
            .ok_or_else(|| UnmappedLabel(section.label.clone()))?;
        let text = section.content_text.as_str();
        let p = &mut pattern;
        match path {
            TargetPath::IdentificationName => {
                set_single(&mut p.identification.name, &section.label, text, &mut warnings)
            }
            TargetPath::Identifiers => p.identification.identifiers.push(text.into()),
            TargetPath::Authors => p.identification.authors.push(text.into()),
            TargetPath::Keywords => p.identification.keywords.push(text.into()),
            TargetPath::ClassificationType => set_single(
                &mut p.identification.classification.type_of_pattern,
                &section.label,
                text,
                &mut warnings,
            ),
            TargetPath::ClassificationCategory => set_single(
                &mut p.identification.classification.category,
                &section.label,
                text,
                &mut warnings,
            ),
            TargetPath::ClassificationAbstractionLevel => set_single(
                &mut p.identification.classification.abstraction_level,
                &section.label,
                text,
                &mut warnings,
            ),
            TargetPath::ClassificationAspect => set_single(
                &mut p.identification.classification.aspect,
                &section.label,
                text,
                &mut warnings,
            ),
            TargetPath::OriginProject => set_single(
                &mut p.identification.origin.project,
                &section.label,
                text,
                &mut warnings,
            ),
            TargetPath::OriginParticipants => {
                p.identification.origin.participants.push(text.into())
            }
            TargetPath::Artifacts { usage } => p.identification.artifacts.push(ArtifactRef {
                text: text.into(),
                usage: usage.clone(),
            }),
            TargetPath::CoreProblem => {
                set_single(&mut p.core.problem, &section.label, text, &mut warnings)
            }
            TargetPath::CoreContext => {
                set_single(&mut p.core.context, &section.label, text, &mut warnings)
            }
            TargetPath::CoreSolution => {
                set_single(&mut p.core.solution, &section.label, text, &mut warnings)
            }
            TargetPath::Relationship { kind } => p.relationships.push(Relationship {
                kind: kind.clone(),
                text: text.into(),
            }),
            TargetPath::GuidanceKnownUses => {
                set_single(&mut p.guidance.known_uses, &section.label, text, &mut warnings)
            }
            TargetPath::GuidanceExample => {
                set_single(&mut p.guidance.example, &section.label, text, &mut warnings)
            }
            TargetPath::GuidanceLiterature => {
                set_single(&mut p.guidance.literature, &section.label, text, &mut warnings)
            }
            TargetPath::GuidanceIllustration => {
                set_single(&mut p.guidance.illustration, &section.label, text, &mut warnings)
            }
            TargetPath::EvaluationDiscussion => {
                set_single(&mut p.evaluation.discussion, &section.label, text, &mut warnings)
            }
            TargetPath::EvaluationConfidence => {
                set_single(&mut p.evaluation.confidence, &section.label, text, &mut warnings)
            }
            TargetPath::EvaluationMaturity => {
                set_single(&mut p.evaluation.maturity, &section.label, text, &mut warnings)
            }
            TargetPath::ManagementVersion => {
                set_single(&mut p.management.version, &section.label, text, &mut warnings)
            }
            TargetPath::ManagementCreationDate => {
                set_single(&mut p.management.creation_date, &section.label, text, &mut warnings)
            }
        }
    }
    Ok((pattern, warnings))
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

struct XmlWriter {
    out: String,
    depth: usize,
}

impl XmlWriter {
    fn new() -> Self {
        XmlWriter { out: String::new(), depth: 0 }
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    fn open(&mut self, name: &str) {
        self.indent();
        self.out.push('<');
        self.out.push_str(name);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.indent();
        self.out.push_str("</");
        self.out.push_str(name);
        self.out.push_str(">\n");
    }

    fn leaf(&mut self, name: &str, value: &str) {
        self.leaf_attr(name, None, value);
    }

    fn leaf_attr(&mut self, name: &str, attr: Option<(&str, &str)>, value: &str) {
        self.indent();
        self.out.push('<');
        self.out.push_str(name);
        if let Some((k, v)) = attr {
            self.out.push(' ');
            self.out.push_str(k);
            self.out.push_str("=\"");
            self.out.push_str(&escape(v));
            self.out.push('"');
        }
        self.out.push('>');
        self.out.push_str(&escape(value));
        self.out.push_str("</");
        self.out.push_str(name);
        self.out.push_str(">\n");
    }

    fn opt_leaf(&mut self, name: &str, value: &Option<String>) {
        if let Some(v) = value {
            self.leaf(name, v);
        }
    }
}

fn classification_is_empty(c: &Classification) -> bool {
    c.type_of_pattern.is_none()
        && c.category.is_none()
        && c.abstraction_level.is_none()
        && c.aspect.is_none()
}

fn identification_is_empty(i: &Identification) -> bool {
    i.name.is_none()
        && i.identifiers.is_empty()
        && i.authors.is_empty()
        && i.keywords.is_empty()
        && classification_is_empty(&i.classification)
        && i.origin.project.is_none()
        && i.origin.participants.is_empty()
        && i.artifacts.is_empty()
}

fn core_is_empty(c: &Core) -> bool {
    c.problem.is_none() && c.context.is_none() && c.solution.is_none()
}

fn guidance_is_empty(g: &Guidance) -> bool {
    g.known_uses.is_none() && g.example.is_none() && g.literature.is_none() && g.illustration.is_none()
}

fn evaluation_is_empty(e: &Evaluation) -> bool {
    e.discussion.is_none() && e.confidence.is_none() && e.maturity.is_none()
}

fn management_is_empty(m: &Management) -> bool {
    m.version.is_none() && m.creation_date.is_none()
}

/// Deterministic UTF-8 XML: root `<processPattern>`, the six facet
/// elements in fixed order, empty facets omitted.
pub fn emit_pattern_xml(pattern: &UnifiedPattern) -> String {
    let p = pattern;
    if identification_is_empty(&p.identification)
        && core_is_empty(&p.core)
        && p.relationships.is_empty()
        && guidance_is_empty(&p.guidance)
        && evaluation_is_empty(&p.evaluation)
        && management_is_empty(&p.management)
    {
        return "<processPattern/>\n".to_string();
    }

    let mut w = XmlWriter::new();
    w.open("processPattern");

    if !identification_is_empty(&p.identification) {
        let i = &p.identification;
        w.open("identification");
        w.opt_leaf("name", &i.name);
        if !i.identifiers.is_empty() {
            w.open("identifiers");
            for id in &i.identifiers {
                w.leaf("identifier", id);
            }
            w.close("identifiers");
        }
        if !i.authors.is_empty() {
            w.open("authors");
            for a in &i.authors {
                w.leaf("author", a);
            }
            w.close("authors");
        }
        if !i.keywords.is_empty() {
            w.open("keywords");
            for k in &i.keywords {
                w.leaf("keyword", k);
            }
            w.close("keywords");
        }
        if !classification_is_empty(&i.classification) {
            w.open("classification");
            w.opt_leaf("type", &i.classification.type_of_pattern);
            w.opt_leaf("category", &i.classification.category);
            w.opt_leaf("abstractionLevel", &i.classification.abstraction_level);
            w.opt_leaf("aspect", &i.classification.aspect);
            w.close("classification");
        }
        if i.origin.project.is_some() || !i.origin.participants.is_empty() {
            w.open("origin");
            w.opt_leaf("project", &i.origin.project);
            if !i.origin.participants.is_empty() {
                w.open("participants");
                for part in &i.origin.participants {
                    w.leaf("participant", part);
                }
                w.close("participants");
            }
            w.close("origin");
        }
        if !i.artifacts.is_empty() {
            w.open("artifacts");
            for art in &i.artifacts {
                let attr = art.usage.as_deref().map(|u| ("usage", u));
                w.leaf_attr("artifact", attr, &art.text);
            }
            w.close("artifacts");
        }
        w.close("identification");
    }

    if !core_is_empty(&p.core) {
        w.open("core");
        w.opt_leaf("problem", &p.core.problem);
        w.opt_leaf("context", &p.core.context);
        w.opt_leaf("solution", &p.core.solution);
        w.close("core");
    }

    if !p.relationships.is_empty() {
        w.open("relationships");
        for rel in &p.relationships {
            w.leaf_attr("relationship", Some(("kind", &rel.kind)), &rel.text);
        }
        w.close("relationships");
    }

    if !guidance_is_empty(&p.guidance) {
        w.open("guidance");
        w.opt_leaf("knownUses", &p.guidance.known_uses);
        w.opt_leaf("example", &p.guidance.example);
        w.opt_leaf("literature", &p.guidance.literature);
        w.opt_leaf("illustration", &p.guidance.illustration);
        w.close("guidance");
    }

    if !evaluation_is_empty(&p.evaluation) {
        w.open("evaluation");
        w.opt_leaf("discussion", &p.evaluation.discussion);
        w.opt_leaf("confidence", &p.evaluation.confidence);
        w.opt_leaf("maturity", &p.evaluation.maturity);
        w.close("evaluation");
    }

    if !management_is_empty(&p.management) {
        w.open("management");
        w.opt_leaf("version", &p.management.version);
        w.opt_leaf("creationDate", &p.management.creation_date);
        w.close("management");
    }

    w.close("processPattern");
    w.out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<(String, String)>,
    pub warnings: Vec<(String, String)>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.errors.is_empty()
    }

    /// Machine-readable rendering: `ERROR|WARN <path> <message>` lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (path, msg) in &self.errors {
            out.push_str(&format!("ERROR {path} {msg}\n"));
        }
        for (path, msg) in &self.warnings {
            out.push_str(&format!("WARN {path} {msg}\n"));
        }
        out
    }
}

/// Checks the assembled pattern against the unified model: a pattern
/// without any core facet is invalid; thin spots are warnings.
pub fn validate_pattern(pattern: &UnifiedPattern) -> ValidationReport {
    let mut report = ValidationReport::default();
    if core_is_empty(&pattern.core) {
        report.errors.push((
            "core".into(),
            "none of problem, context or solution is present".into(),
        ));
    }
    match &pattern.identification.name {
        None => report
            .warnings
            .push(("identification.name".into(), "pattern name missing".into())),
        Some(n) if n.trim().is_empty() => report
            .warnings
            .push(("identification.name".into(), "pattern name is empty".into())),
        _ => {}
    }
    for rel in &pattern.relationships {
        if !KNOWN_RELATIONSHIP_KINDS.contains(&rel.kind.as_str()) {
            report.warnings.push((
                "relationships".into(),
                format!("unknown relationship kind {:?}", rel.kind),
            ));
        }
    }
    let empty_leaf = |report: &mut ValidationReport, path: &str, value: &Option<String>| {
        if let Some(v) = value {
            if v.trim().is_empty() {
                report
                    .warnings
                    .push((path.to_string(), "empty section content".into()));
            }
        }
    };
    empty_leaf(&mut report, "core.problem", &pattern.core.problem);
    empty_leaf(&mut report, "core.context", &pattern.core.context);
    empty_leaf(&mut report, "core.solution", &pattern.core.solution);
    empty_leaf(&mut report, "guidance.knownUses", &pattern.guidance.known_uses);
    empty_leaf(&mut report, "guidance.example", &pattern.guidance.example);
    empty_leaf(&mut report, "guidance.literature", &pattern.guidance.literature);
    empty_leaf(&mut report, "guidance.illustration", &pattern.guidance.illustration);
    empty_leaf(&mut report, "evaluation.discussion", &pattern.evaluation.discussion);
    empty_leaf(&mut report, "evaluation.confidence", &pattern.evaluation.confidence);
    empty_leaf(&mut report, "evaluation.maturity", &pattern.evaluation.maturity);
    empty_leaf(&mut report, "management.version", &pattern.management.version);
    empty_leaf(&mut report, "management.creationDate", &pattern.management.creation_date);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structurer::mapping::FacetMapping;
    use crate::structurer::FacetSection;

    fn section(label: &str, text: &str) -> FacetSection {
        FacetSection {
            label: label.into(),
            heading_span: (0, 0),
            content_span: (0, 0),
            content_text: text.into(),
        }
    }

    fn core_mapping() -> FacetMapping {
        FacetMapping::parse(
            "Problem -> core.problem\nContext -> core.context\nSolution -> core.solution\n\
             Author -> identification.authors.list\nIntent -> core.problem\n",
        )
        .unwrap()
    }

    #[test]
    fn core_sections_fill_core_facet() {
        let sections = vec![
            section("Problem", "How to reuse?"),
            section("Context", "Team starts design."),
            section("Solution", "Apply pattern X."),
        ];
        let (pattern, warnings) = build_unified_pattern(&sections, &core_mapping()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(pattern.core.problem.as_deref(), Some("How to reuse?"));
        assert_eq!(pattern.core.context.as_deref(), Some("Team starts design."));
        assert_eq!(pattern.core.solution.as_deref(), Some("Apply pattern X."));
    }

    #[test]
    fn repeated_list_label_appends() {
        let sections = vec![section("Author", "Ambler"), section("Author", "Gnatz")];
        let (pattern, _) = build_unified_pattern(&sections, &core_mapping()).unwrap();
        assert_eq!(pattern.identification.authors, vec!["Ambler", "Gnatz"]);
    }

    #[test]
    fn repeated_single_label_keeps_first_and_warns() {
        let sections = vec![section("Problem", "first"), section("Problem", "second")];
        let (pattern, warnings) = build_unified_pattern(&sections, &core_mapping()).unwrap();
        assert_eq!(pattern.core.problem.as_deref(), Some("first"));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn intent_maps_to_problem_via_table() {
        let sections = vec![section("Intent", "reuse proven solutions")];
        let (pattern, _) = build_unified_pattern(&sections, &core_mapping()).unwrap();
        assert_eq!(pattern.core.problem.as_deref(), Some("reuse proven solutions"));
    }

    #[test]
    fn unmapped_label_is_an_error() {
        let sections = vec![section("Mystery", "?")];
        let err = build_unified_pattern(&sections, &core_mapping()).unwrap_err();
        assert_eq!(err, UnmappedLabel("Mystery".into()));
    }

    #[test]
    fn emit_core_only() {
        let pattern = UnifiedPattern {
            core: Core {
                problem: Some("P".into()),
                context: Some("C".into()),
                solution: Some("S".into()),
            },
            ..UnifiedPattern::default()
        };
        let xml = emit_pattern_xml(&pattern);
        assert_eq!(
            xml,
            "<processPattern>\n  <core>\n    <problem>P</problem>\n    <context>C</context>\n    <solution>S</solution>\n  </core>\n</processPattern>\n"
        );
    }

    #[test]
    fn emit_empty_pattern() {
        assert_eq!(emit_pattern_xml(&UnifiedPattern::default()), "<processPattern/>\n");
    }

    #[test]
    fn emission_is_deterministic() {
        let pattern = UnifiedPattern {
            core: Core { solution: Some("S & <more>".into()), ..Core::default() },
            relationships: vec![Relationship { kind: "similar".into(), text: "pattern Y".into() }],
            ..UnifiedPattern::default()
        };
        assert_eq!(emit_pattern_xml(&pattern), emit_pattern_xml(&pattern.clone()));
        assert!(emit_pattern_xml(&pattern).contains("S &amp; &lt;more&gt;"));
    }

    #[test]
    fn validation_requires_a_core_leaf() {
        let pattern = UnifiedPattern {
            guidance: Guidance { example: Some("E".into()), ..Guidance::default() },
            ..UnifiedPattern::default()
        };
        let report = validate_pattern(&pattern);
        assert!(!report.valid());
        assert_eq!(report.errors[0].0, "core");
    }

    #[test]
    fn solution_only_is_valid_with_warnings() {
        let pattern = UnifiedPattern {
            core: Core { solution: Some("S".into()), ..Core::default() },
            ..UnifiedPattern::default()
        };
        let report = validate_pattern(&pattern);
        assert!(report.valid());
        assert!(report
            .warnings
            .iter()
            .any(|(p, _)| p == "identification.name"));
    }

    #[test]
    fn unknown_relationship_kind_warns() {
        let pattern = UnifiedPattern {
            core: Core { problem: Some("P".into()), ..Core::default() },
            relationships: vec![Relationship { kind: "related".into(), text: "X".into() }],
            ..UnifiedPattern::default()
        };
        let report = validate_pattern(&pattern);
        assert!(report.valid());
        assert!(report.warnings.iter().any(|(p, _)| p == "relationships"));
        assert!(report.render().contains("WARN relationships"));
    }
}
