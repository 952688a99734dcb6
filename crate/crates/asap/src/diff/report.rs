//! Per-type diff reports with a side-by-side rendering of paired rows and
//! the 3x3 metric grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::annotation::{Annotation, Document, DEFAULT_SET};

use super::{match_annotations, DiffCounts, DiffError, MatchClass, MetricSet, Pairing, CRITERIA};

#[derive(Debug, Clone)]
pub struct DiffReport {
    pub type_name: String,
    pub pairings: Vec<Pairing>,
    pub missing_key_ids: Vec<u32>,
    pub false_response_ids: Vec<u32>,
    pub counts: DiffCounts,
    pub metrics: MetricSet,
}

fn features_text(ann: &Annotation) -> String {
    if ann.features.is_empty() {
        return "0".to_string();
    }
    let inner: Vec<String> = ann
        .features
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    format!("{{{}}}", inner.join(", "))
}

fn single_line(text: &str) -> String {
    text.replace(['\n', '\r', '\t'], " ")
}

/// One DiffReport per requested type. Missing types yield all-zero counts
/// and vacuous metrics.
pub fn diff_report(
    key_doc: &Document,
    response_doc: &Document,
    types: &[&str],
    beta: f64,
) -> Result<Vec<DiffReport>, DiffError> {
    let mut reports = Vec::new();
    for type_name in types {
        let key = key_doc.annotations_of_type(DEFAULT_SET, type_name);
        let response = response_doc.annotations_of_type(DEFAULT_SET, type_name);
        let (counts, pairings) = match_annotations(&key, &response, None)?;
        let paired_keys: Vec<u32> = pairings.iter().map(|p| p.key_id).collect();
        let paired_responses: Vec<u32> = pairings.iter().map(|p| p.response_id).collect();
        let missing_key_ids = key
            .iter()
            .map(|a| a.id())
            .filter(|id| !paired_keys.contains(id))
            .collect();
        let false_response_ids = response
            .iter()
            .map(|a| a.id())
            .filter(|id| !paired_responses.contains(id))
            .collect();
        reports.push(DiffReport {
            type_name: type_name.to_string(),
            pairings,
            missing_key_ids,
            false_response_ids,
            counts,
            metrics: MetricSet::compute(counts, beta)?,
        });
    }
    Ok(reports)
}

impl DiffReport {
    /// Human-readable rendering: paired rows with start/end/covered text/
    /// features, then the summary block with the 3x3 metric grid.
    pub fn render(&self, key_doc: &Document, response_doc: &Document) -> String {
        let key_by_id: BTreeMap<u32, &Annotation> = key_doc
            .annotations_of_type(DEFAULT_SET, &self.type_name)
            .into_iter()
            .map(|a| (a.id(), a))
            .collect();
        let resp_by_id: BTreeMap<u32, &Annotation> = response_doc
            .annotations_of_type(DEFAULT_SET, &self.type_name)
            .into_iter()
            .map(|a| (a.id(), a))
            .collect();

        let mut out = String::new();
        let _ = writeln!(out, "AnnotationDiff: type {}", self.type_name);
        let _ = writeln!(
            out,
            "{:<7}{:<7}{:<24}{:<28}{:<4}{:<7}{:<7}{:<24}{}",
            "Start", "End", "Key", "Features", "=?", "Start", "End", "Response", "Features"
        );
        for p in &self.pairings {
            let k = key_by_id[&p.key_id];
            let r = resp_by_id[&p.response_id];
            let marker = match p.match_class {
                MatchClass::Correct => "=",
                MatchClass::Partial => "~",
            };
            let _ = writeln!(
                out,
                "{:<7}{:<7}{:<24}{:<28}{:<4}{:<7}{:<7}{:<24}{}",
                k.start,
                k.end,
                single_line(&key_doc.covered_text(k.start, k.end)),
                features_text(k),
                marker,
                r.start,
                r.end,
                single_line(&response_doc.covered_text(r.start, r.end)),
                features_text(r),
            );
        }
        for id in &self.missing_key_ids {
            let k = key_by_id[id];
            let _ = writeln!(
                out,
                "{:<7}{:<7}{:<24}{:<28}{:<4}missing",
                k.start,
                k.end,
                single_line(&key_doc.covered_text(k.start, k.end)),
                features_text(k),
                "-?"
            );
        }
        for id in &self.false_response_ids {
            let r = resp_by_id[id];
            let _ = writeln!(
                out,
                "{:<7}{:<7}{:<24}{:<28}{:<4}{:<7}{:<7}{:<24}{}",
                "", "", "false positive", "", "?-",
                r.start,
                r.end,
                single_line(&response_doc.covered_text(r.start, r.end)),
                features_text(r),
            );
        }
        let c = self.counts;
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<24}{:>10}{:>12}{:>12}",
            format!("Correct: {}", c.correct),
            "Recall",
            "Precision",
            "F-measure"
        );
        let rows = [
            (format!("Partially correct: {}", c.partial), CRITERIA[0]),
            (format!("Missing: {}", c.missing), CRITERIA[1]),
            (format!("False positives: {}", c.false_positive), CRITERIA[2]),
        ];
        for (left, criterion) in rows {
            let (p, r, f) = self.metrics.get(criterion);
            let _ = writeln!(
                out,
                "{:<24}{:>1}: {:>6.2}{:>12.2}{:>12.2}",
                left,
                criterion.as_str(),
                r,
                p,
                f
            );
        }
        out
    }

    /// Machine-readable rendering: one `pair`/`missing`/`false` record per
    /// annotation and one `summary` record with counts and the nine
    /// metric values, tab-separated.
    pub fn render_records(&self, key_doc: &Document, response_doc: &Document) -> String {
        let key_by_id: BTreeMap<u32, &Annotation> = key_doc
            .annotations_of_type(DEFAULT_SET, &self.type_name)
            .into_iter()
            .map(|a| (a.id(), a))
            .collect();
        let resp_by_id: BTreeMap<u32, &Annotation> = response_doc
            .annotations_of_type(DEFAULT_SET, &self.type_name)
            .into_iter()
            .map(|a| (a.id(), a))
            .collect();
        let mut out = String::new();
        let ann_fields = |a: &Annotation, doc: &Document| {
            format!(
                "{}\t{}\t{}\t{}",
                a.start,
                a.end,
                single_line(&doc.covered_text(a.start, a.end)),
                features_text(a)
            )
        };
        for p in &self.pairings {
            let class = match p.match_class {
                MatchClass::Correct => "correct",
                MatchClass::Partial => "partial",
            };
            let _ = writeln!(
                out,
                "pair\t{}\t{}\t{}\t{}",
                self.type_name,
                class,
                ann_fields(key_by_id[&p.key_id], key_doc),
                ann_fields(resp_by_id[&p.response_id], response_doc),
            );
        }
        for id in &self.missing_key_ids {
            let _ = writeln!(
                out,
                "missing\t{}\t{}",
                self.type_name,
                ann_fields(key_by_id[id], key_doc)
            );
        }
        for id in &self.false_response_ids {
            let _ = writeln!(
                out,
                "false\t{}\t{}",
                self.type_name,
                ann_fields(resp_by_id[id], response_doc)
            );
        }
        let c = self.counts;
        let mut metrics = String::new();
        for criterion in CRITERIA {
            let (p, r, f) = self.metrics.get(criterion);
            let _ = write!(metrics, "\t{p:.6}\t{r:.6}\t{f:.6}");
        }
        let _ = writeln!(
            out,
            "summary\t{}\t{}\t{}\t{}\t{}{}",
            self.type_name, c.correct, c.partial, c.missing, c.false_positive, metrics
        );
        out
    }
}
