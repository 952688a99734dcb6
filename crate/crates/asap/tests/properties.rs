//! Property-based invariants over the annotation model, pipeline stages,
//! serialization and the evaluator.

use proptest::prelude::*;

use asap::annotation::{span_relation, Document, FeatureMap, SpanRelation, DEFAULT_SET};
use asap::diff::{f_measure, precision, recall, Criterion, DiffCounts};
use asap::inline_xml::{parse_inline_xml, serialize_inline_xml};
use asap::jape::parse_rule_file;
use asap::pipeline::tokenize;

proptest! {
    /// Token and SpaceToken covered substrings, in order, concatenate back
    /// to the document text exactly.
    #[test]
    fn token_partition(text in "\\PC{0,120}") {
        let mut doc = Document::new("p", text.clone());
        tokenize(&mut doc).unwrap();
        let mut rebuilt = String::new();
        for ann in doc.default_set().iter() {
            prop_assert!(ann.type_name == "Token" || ann.type_name == "SpaceToken");
            rebuilt.push_str(&doc.covered_text(ann.start, ann.end));
        }
        prop_assert_eq!(rebuilt, text);
    }

    /// Tokens never overlap.
    #[test]
    fn tokens_disjoint(text in "\\PC{0,120}") {
        let mut doc = Document::new("p", text);
        tokenize(&mut doc).unwrap();
        let anns: Vec<_> = doc.default_set().iter().collect();
        for pair in anns.windows(2) {
            prop_assert!(pair[0].end <= pair[1].start);
        }
    }

    /// Annotation ids are unique within a document, across all sets.
    #[test]
    fn annotation_ids_unique(spans in prop::collection::vec((0usize..40, 1usize..10), 0..30)) {
        let mut doc = Document::new("p", "x".repeat(50));
        let mut ids = std::collections::HashSet::new();
        for (i, (start, len)) in spans.iter().enumerate() {
            let set = if i % 2 == 0 { DEFAULT_SET } else { "other" };
            let id = doc
                .add_annotation(set, "T", *start, start + len, FeatureMap::new())
                .unwrap();
            prop_assert!(ids.insert(id), "id {} repeated", id);
        }
    }

    /// Inline-XML serialization round-trips text and annotations for
    /// non-overlapping spans.
    #[test]
    fn inline_xml_round_trip(
        text in "[a-zA-Z0-9 <>&\"'\\n]{1,60}",
        cuts in prop::collection::btree_set(0usize..60, 0..8),
    ) {
        let len = text.chars().count();
        let mut doc = Document::new("p", text);
        let bounds: Vec<usize> = cuts.into_iter().filter(|c| *c < len).collect();
        for pair in bounds.windows(2) {
            let mut features = FeatureMap::new();
            features.insert("k".into(), format!("v{}", pair[0]));
            doc.add_annotation(DEFAULT_SET, "T", pair[0], pair[1], features).unwrap();
        }
        let xml = serialize_inline_xml(&doc, DEFAULT_SET, None).unwrap();
        let parsed = parse_inline_xml(&xml, "p").unwrap();
        prop_assert_eq!(parsed.text(), doc.text());
        let before: Vec<_> = doc
            .default_set()
            .iter()
            .map(|a| (a.type_name.clone(), a.start, a.end, a.features.clone()))
            .collect();
        let after: Vec<_> = parsed
            .default_set()
            .iter()
            .map(|a| (a.type_name.clone(), a.start, a.end, a.features.clone()))
            .collect();
        prop_assert_eq!(before, after);
    }

    /// strict <= average <= lenient for precision and recall, over
    /// arbitrary non-negative count tuples.
    #[test]
    fn criterion_ordering(
        correct in 0usize..50,
        partial in 0usize..50,
        missing in 0usize..50,
        false_positive in 0usize..50,
    ) {
        let counts = DiffCounts { correct, partial, missing, false_positive };
        let p = |c| precision(counts, c);
        let r = |c| recall(counts, c);
        prop_assert!(p(Criterion::Strict) <= p(Criterion::Average) + 1e-12);
        prop_assert!(p(Criterion::Average) <= p(Criterion::Lenient) + 1e-12);
        prop_assert!(r(Criterion::Strict) <= r(Criterion::Average) + 1e-12);
        prop_assert!(r(Criterion::Average) <= r(Criterion::Lenient) + 1e-12);
    }

    /// F with beta = 1 is the harmonic mean of precision and recall.
    #[test]
    fn f1_is_harmonic_mean(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
        let f = f_measure(p, r, 1.0).unwrap();
        let expected = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        prop_assert!((f - expected).abs() < 1e-12);
    }

    /// span_relation is symmetric.
    #[test]
    fn span_relation_symmetry(
        s1 in 0usize..20, l1 in 0usize..10,
        s2 in 0usize..20, l2 in 0usize..10,
    ) {
        let mut doc = Document::new("p", "x".repeat(40));
        let a = doc.add_annotation(DEFAULT_SET, "T", s1, s1 + l1, FeatureMap::new()).unwrap();
        let b = doc.add_annotation(DEFAULT_SET, "T", s2, s2 + l2, FeatureMap::new()).unwrap();
        let set = doc.default_set();
        let a = set.get(a).unwrap();
        let b = set.get(b).unwrap();
        prop_assert_eq!(span_relation(a, b), span_relation(b, a));
        if (s1, s1 + l1) == (s2, s2 + l2) {
            prop_assert_eq!(span_relation(a, b), SpanRelation::Coextensive);
        }
    }

    /// Longest-match control on a run-recognizing rule: every produced
    /// annotation covers an `a` followed by the maximal run of `b` tokens,
    /// and matches never start inside an earlier match.
    #[test]
    fn appelt_takes_maximal_runs(letters in prop::collection::vec(prop::bool::ANY, 1..50)) {
        let text: String = letters
            .iter()
            .map(|&is_a| if is_a { "a " } else { "b " })
            .collect();
        let phase = &parse_rule_file(
            "Phase: Runs\nInput: Token\nOptions: control = appelt\n\
             Rule: run\n( {Token.string == \"a\"} ( {Token.string == \"b\"} )* ):r\n\
             --> :r.Run = {}",
        )
        .unwrap()[0];
        let mut doc = Document::new("p", text);
        tokenize(&mut doc).unwrap();
        asap::jape::run_phase(&mut doc, phase);

        // expected runs straight from the generating sequence
        let mut expected = Vec::new();
        let mut i = 0;
        while i < letters.len() {
            if letters[i] {
                let start = i;
                let mut j = i + 1;
                while j < letters.len() && !letters[j] {
                    j += 1;
                }
                // token k covers chars [2k, 2k+1)
                expected.push((2 * start, 2 * (j - 1) + 1));
                i = j;
            } else {
                i += 1;
            }
        }
        let got: Vec<(usize, usize)> = doc
            .annotations_of_type(DEFAULT_SET, "Run")
            .iter()
            .map(|a| (a.start, a.end))
            .collect();
        prop_assert_eq!(got, expected);
    }
}
