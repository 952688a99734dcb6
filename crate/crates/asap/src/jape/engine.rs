//! Phase execution: pattern matching over annotation sequences and
//! annotation-creating actions.

use std::collections::BTreeMap;

use crate::annotation::{Annotation, Document, FeatureMap, DEFAULT_SET};
use crate::pipeline::{gazetteer_lookup, split_sentences, tokenize, Gazetteer};

use super::{Control, PatternElement, Phase, PredicateOp, Quantifier, Rule};

/// Character span covered by the annotations consumed under one label.
type Bindings = BTreeMap<String, (usize, usize)>;

#[derive(Debug, Clone)]
struct Match {
    /// Index just past the last consumed annotation.
    end: usize,
    bindings: Bindings,
}

fn constraint_matches(ann: &Annotation, type_name: &str, predicates: &[super::Predicate]) -> bool {
    if ann.type_name != type_name {
        return false;
    }
    predicates.iter().all(|p| match ann.features.get(&p.feature) {
        Some(v) => match p.op {
            PredicateOp::Eq => v == &p.value,
            PredicateOp::Ne => v != &p.value,
        },
        // a missing feature fails ==, satisfies !=
        None => p.op == PredicateOp::Ne,
    })
}

fn merge_binding(bindings: &mut Bindings, label: &str, start: usize, end: usize) {
    bindings
        .entry(label.to_string())
        .and_modify(|(s, e)| {
            *s = (*s).min(start);
            *e = (*e).max(end);
        })
        .or_insert((start, end));
}

/// Explores every way `elem` can match starting at `pos`, invoking `sink`
/// with each resulting position and binding set. Longer consumptions are
/// explored first; callers keep the best completion they see.
fn explore(
    elem: &PatternElement,
    seq: &[&Annotation],
    pos: usize,
    bindings: &Bindings,
    sink: &mut dyn FnMut(usize, &Bindings),
) {
    match elem {
        PatternElement::Constraint { type_name, predicates } => {
            if let Some(ann) = seq.get(pos) {
                if constraint_matches(ann, type_name, predicates) {
                    sink(pos + 1, bindings);
                }
            }
        }
        PatternElement::Sequence(elems) => explore_seq(elems, seq, pos, bindings, sink),
        PatternElement::Alternation(branches) => {
            for branch in branches {
                explore(branch, seq, pos, bindings, sink);
            }
        }
        PatternElement::Group { element, quantifier, binding } => {
            let mut record = |end: usize, b: &Bindings| {
                if let Some(label) = binding {
                    if end > pos {
                        let mut b = b.clone();
                        let start_off = seq[pos].start;
                        let end_off = seq[end - 1].end;
                        merge_binding(&mut b, label, start_off, end_off);
                        sink(end, &b);
                        return;
                    }
                }
                sink(end, b);
            };
            match quantifier {
                Quantifier::One => explore(element, seq, pos, bindings, &mut record),
                Quantifier::Optional => {
                    explore(element, seq, pos, bindings, &mut record);
                    record(pos, bindings);
                }
                Quantifier::Plus => explore_repeat(element, seq, pos, bindings, 1, &mut record),
                Quantifier::Star => {
                    explore_repeat(element, seq, pos, bindings, 1, &mut record);
                    record(pos, bindings);
                }
            }
        }
    }
}

/// One-or-more repetitions of `element`; stops on iterations that consume
/// nothing to avoid looping on nullable inner patterns.
fn explore_repeat(
    element: &PatternElement,
    seq: &[&Annotation],
    pos: usize,
    bindings: &Bindings,
    _min: usize,
    sink: &mut dyn FnMut(usize, &Bindings),
) {
    explore(element, seq, pos, bindings, &mut |end, b| {
        sink(end, b);
        if end > pos {
            explore_repeat(element, seq, end, b, 0, sink);
        }
    });
}

fn explore_seq(
    elems: &[PatternElement],
    seq: &[&Annotation],
    pos: usize,
    bindings: &Bindings,
    sink: &mut dyn FnMut(usize, &Bindings),
) {
    match elems.split_first() {
        None => sink(pos, bindings),
        Some((head, rest)) => {
            explore(head, seq, pos, bindings, &mut |end, b| {
                explore_seq(rest, seq, end, b, sink);
            });
        }
    }
}

/// The longest match of `rule` at `pos`, if any. Among equal-length
/// matches the first in greedy exploration order wins.
fn longest_match(rule: &Rule, seq: &[&Annotation], pos: usize) -> Option<Match> {
    let mut best: Option<Match> = None;
    explore(&rule.pattern, seq, pos, &Bindings::new(), &mut |end, b| {
        if end > pos && best.as_ref().map_or(true, |m| end > m.end) {
            best = Some(Match { end, bindings: b.clone() });
        }
    });
    best
}

fn apply_actions(doc: &mut Document, rule: &Rule, m: &Match) -> usize {
    let mut added = 0;
    for action in &rule.actions {
        // label may be unbound at runtime when its group matched empty
        let Some(&(start, end)) = m.bindings.get(&action.label) else {
            continue;
        };
        let features: FeatureMap = action
            .feature_assignments
            .iter()
            .cloned()
            .collect();
        doc.add_annotation(DEFAULT_SET, action.new_type.clone(), start, end, features)
            .expect("action spans come from matched annotations");
        added += 1;
    }
    added
}

/// Runs one phase over the document's default set. Returns the number of
/// annotations added.
pub fn run_phase(doc: &mut Document, phase: &Phase) -> usize {
    let input_types: Vec<&str> = phase.input_types.iter().map(String::as_str).collect();
    for t in &input_types {
        if doc.default_set().of_type(t).is_empty() {
            log::warn!(
                "phase {}: no annotations of input type {t} present",
                phase.name
            );
        }
    }
    let seq_owned: Vec<Annotation> = doc
        .default_set()
        .of_types(&input_types)
        .into_iter()
        .cloned()
        .collect();
    let seq: Vec<&Annotation> = seq_owned.iter().collect();

    // (rule index, match) pairs to apply after the scan
    let mut fired: Vec<(usize, Match)> = Vec::new();
    let mut pos = 0;
    'scan: while pos < seq.len() {
        match phase.control {
            Control::Appelt | Control::Once => {
                let mut best: Option<(usize, Match)> = None;
                for (ri, rule) in phase.rules.iter().enumerate() {
                    if let Some(m) = longest_match(rule, &seq, pos) {
                        let better = match &best {
                            None => true,
                            Some((bri, bm)) => {
                                // longest match, ties by priority then file order
                                m.end > bm.end
                                    || (m.end == bm.end
                                        && rule.priority > phase.rules[*bri].priority)
                            }
                        };
                        if better {
                            best = Some((ri, m));
                        }
                    }
                }
                if let Some((ri, m)) = best {
                    let end = m.end;
                    fired.push((ri, m));
                    pos = end;
                    if phase.control == Control::Once {
                        break 'scan;
                    }
                } else {
                    pos += 1;
                }
            }
            Control::First => {
                let mut advanced = false;
                for (ri, rule) in phase.rules.iter().enumerate() {
                    if let Some(m) = longest_match(rule, &seq, pos) {
                        let end = m.end;
                        fired.push((ri, m));
                        pos = end;
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    pos += 1;
                }
            }
            Control::All | Control::Brill => {
                for (ri, rule) in phase.rules.iter().enumerate() {
                    if let Some(m) = longest_match(rule, &seq, pos) {
                        fired.push((ri, m));
                    }
                }
                pos += 1;
            }
        }
    }

    let mut added = 0;
    for (ri, m) in fired {
        added += apply_actions(doc, &phase.rules[ri], &m);
    }
    added
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    AlreadyTokenized(#[from] crate::pipeline::AlreadyTokenized),
    #[error(transparent)]
    MissingTokens(#[from] crate::pipeline::MissingTokens),
}

/// Runs the full analysis pipeline on a fresh document: tokenize, split
/// sentences, gazetteer lookup, then each phase in order. Later phases see
/// annotations created by earlier ones.
pub fn run_pipeline(
    doc: &mut Document,
    gaz: &Gazetteer,
    phases: &[Phase],
) -> Result<usize, PipelineError> {
    let mut added = tokenize(doc)?;
    added += split_sentences(doc)?;
    added += gazetteer_lookup(doc, gaz);
    for phase in phases {
        added += run_phase(doc, phase);
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jape::parse_rule_file;

    const SOLUTION_PHASE: &str = r#"
Phase: Solution
Input: Token SpaceToken
Options: control = appel

Rule: solution
(
  ( {Token.string == "Solution"} | {Token.string == "SOLUTION"} | {Token.string == "solution"} )
  ( {SpaceToken} | {Token.string == ":"} )+
):Solution
-->
:Solution.Solution = { kind = "Solution", rule = "solution" }
"#;

    fn run_on(text: &str, src: &str) -> Document {
        let mut doc = Document::new("d", text);
        tokenize(&mut doc).unwrap();
        for phase in parse_rule_file(src).unwrap() {
            run_phase(&mut doc, &phase);
        }
        doc
    }

    #[test]
    fn solution_rule_matches_spaced_heading() {
        let doc = run_on("Solution :", SOLUTION_PHASE);
        let anns = doc.annotations_of_type(DEFAULT_SET, "Solution");
        assert_eq!(anns.len(), 1);
        assert_eq!((anns[0].start, anns[0].end), (0, 10));
        assert_eq!(anns[0].features.get("kind").unwrap(), "Solution");
        assert_eq!(anns[0].features.get("rule").unwrap(), "solution");
    }

    #[test]
    fn problem_rule_matches_intent_heading() {
        let src = r#"
Phase: Problem
Input: Token SpaceToken
Options: control = appelt
Rule: Problem1
(
  ( {Token.string == "Intent"} | {Token.string == "INTENT"} )
  ( {SpaceToken} | {Token.string == ":"} )+
):Problem
-->
:Problem.Problem = { kind = "Problem", rule = "Problem1" }
"#;
        let doc = run_on("Intent :", src);
        let anns = doc.annotations_of_type(DEFAULT_SET, "Problem");
        assert_eq!(anns.len(), 1);
        assert_eq!((anns[0].start, anns[0].end), (0, 8));
        assert_eq!(anns[0].features.get("kind").unwrap(), "Problem");
        assert_eq!(anns[0].features.get("rule").unwrap(), "Problem1");
    }

    #[test]
    fn appelt_prefers_longest_match() {
        let src = r#"
Phase: P
Input: Token
Options: control = appelt
Rule: short
({Token.string == "a"}):x --> :x.Short = {}
Rule: long
({Token.string == "a"} {Token.string == "b"}):x --> :x.Long = {}
"#;
        let doc = run_on("a b", src);
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "Long").len(), 1);
        assert!(doc.annotations_of_type(DEFAULT_SET, "Short").is_empty());
    }

    #[test]
    fn appelt_tie_breaks_by_priority() {
        let src = r#"
Phase: P
Input: Token
Options: control = appelt
Rule: low
({Token.string == "a"}):x --> :x.Low = {}
Rule: high
Priority: 10
({Token.string == "a"}):x --> :x.High = {}
"#;
        let doc = run_on("a", src);
        assert!(doc.annotations_of_type(DEFAULT_SET, "Low").is_empty());
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "High").len(), 1);
    }

    #[test]
    fn first_takes_file_order() {
        let src = r#"
Phase: P
Input: Token
Options: control = first
Rule: one
({Token.string == "a"}):x --> :x.One = {}
Rule: two
({Token.string == "a"} {Token.string == "b"}):x --> :x.Two = {}
"#;
        let doc = run_on("a b", src);
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "One").len(), 1);
        assert!(doc.annotations_of_type(DEFAULT_SET, "Two").is_empty());
    }

    #[test]
    fn all_fires_every_rule() {
        let src = r#"
Phase: P
Input: Token
Options: control = all
Rule: one
({Token.string == "a"}):x --> :x.One = {}
Rule: two
({Token.string == "a"} {Token.string == "b"}):x --> :x.Two = {}
"#;
        let doc = run_on("a b", src);
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "One").len(), 1);
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "Two").len(), 1);
    }

    #[test]
    fn once_stops_after_first_match() {
        let src = r#"
Phase: P
Input: Token
Options: control = once
Rule: r
({Token.string == "a"}):x --> :x.Hit = {}
"#;
        let doc = run_on("a a a", src);
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "Hit").len(), 1);
    }

    #[test]
    fn ne_predicate_and_missing_feature() {
        // Sentence annotations carry no "string" feature: != succeeds, == fails
        let src = r#"
Phase: P
Input: Token
Options: control = all
Rule: r
({Token.orth != "lowercase"}):x --> :x.NotLower = {}
"#;
        let doc = run_on("Big small :", src);
        let anns = doc.annotations_of_type(DEFAULT_SET, "NotLower");
        // "Big" (upperInitial) and ":" (no orth feature at all)
        assert_eq!(anns.len(), 2);
    }

    #[test]
    fn output_features_are_exactly_the_assignments() {
        let doc = run_on("Solution :", SOLUTION_PHASE);
        let ann = &doc.annotations_of_type(DEFAULT_SET, "Solution")[0];
        assert_eq!(ann.features.len(), 2);
    }

    #[test]
    fn phase_is_non_destructive() {
        let mut doc = Document::new("d", "Solution :");
        tokenize(&mut doc).unwrap();
        let before = doc.annotation_count();
        let phases = parse_rule_file(SOLUTION_PHASE).unwrap();
        run_phase(&mut doc, &phases[0]);
        assert!(doc.annotation_count() > before);
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "Token").len(), 2);
    }

    #[test]
    fn empty_pipeline_on_empty_document() {
        let mut doc = Document::new("d", "");
        let gaz = Gazetteer::default();
        let added = run_pipeline(&mut doc, &gaz, &[]).unwrap();
        assert_eq!(added, 0);
        assert_eq!(doc.annotation_count(), 0);
    }
}
