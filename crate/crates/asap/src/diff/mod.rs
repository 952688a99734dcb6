//! Annotation-diff evaluation: pair key (hand-annotated) against response
//! (system) annotations, tally correct/partial/missing/false, and compute
//! strict/lenient/average precision, recall and F-measure.

pub mod report;

use thiserror::Error;

use crate::annotation::{Annotation, SpanRelation};

pub use report::{diff_report, DiffReport};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiffCounts {
    pub correct: usize,
    pub partial: usize,
    pub missing: usize,
    pub false_positive: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Strict,
    Lenient,
    Average,
}

pub const CRITERIA: [Criterion; 3] = [Criterion::Strict, Criterion::Lenient, Criterion::Average];

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Strict => "Strict",
            Criterion::Lenient => "Lenient",
            Criterion::Average => "Average",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchClass {
    Correct,
    Partial,
}

/// One matched key/response pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing {
    pub key_id: u32,
    pub response_id: u32,
    pub match_class: MatchClass,
}

#[derive(Debug, Error, PartialEq)]
pub enum DiffError {
    #[error("inputs mix annotation types: {0} and {1}")]
    MixedTypes(String, String),
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
}

fn check_single_type(anns: &[&Annotation], seen: &mut Option<String>) -> Result<(), DiffError> {
    for a in anns {
        match seen {
            None => *seen = Some(a.type_name.clone()),
            Some(t) if *t != a.type_name => {
                return Err(DiffError::MixedTypes(t.clone(), a.type_name.clone()))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Deterministic maximum bipartite matching between leftover key and
/// response annotations under the overlap relation, seeded in (start, id)
/// order (Kuhn's augmenting paths).
fn max_overlap_matching(keys: &[&Annotation], responses: &[&Annotation]) -> Vec<(usize, usize)> {
    let adj: Vec<Vec<usize>> = keys
        .iter()
        .map(|k| {
            responses
                .iter()
                .enumerate()
                .filter(|(_, r)| span_overlaps(k, r))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let mut response_of_key: Vec<Option<usize>> = vec![None; keys.len()];
    let mut key_of_response: Vec<Option<usize>> = vec![None; responses.len()];

    fn try_assign(
        k: usize,
        adj: &[Vec<usize>],
        key_of_response: &mut [Option<usize>],
        response_of_key: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &r in &adj[k] {
            if visited[r] {
                continue;
            }
            visited[r] = true;
            let free = match key_of_response[r] {
                None => true,
                Some(owner) => {
                    try_assign(owner, adj, key_of_response, response_of_key, visited)
                }
            };
            if free {
                key_of_response[r] = Some(k);
                response_of_key[k] = Some(r);
                return true;
            }
        }
        false
    }

    for k in 0..keys.len() {
        let mut visited = vec![false; responses.len()];
        try_assign(k, &adj, &mut key_of_response, &mut response_of_key, &mut visited);
    }

    response_of_key
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.map(|r| (k, r)))
        .collect()
}

fn span_overlaps(a: &Annotation, b: &Annotation) -> bool {
    a.start.max(b.start) < a.end.min(b.end)
}

/// Matches key against response annotations of one type. Pass 1 pairs
/// coextensive annotations as correct; pass 2 pairs remaining overlapping
/// ones as partial (a maximum matching, so no achievable pair is lost).
/// When `compare_features` is given, a coextensive pair whose listed
/// feature values differ is demoted to partial.
pub fn match_annotations(
    key: &[&Annotation],
    response: &[&Annotation],
    compare_features: Option<&[&str]>,
) -> Result<(DiffCounts, Vec<Pairing>), DiffError> {
    let mut seen = None;
    check_single_type(key, &mut seen)?;
    check_single_type(response, &mut seen)?;

    let mut key: Vec<&Annotation> = key.to_vec();
    let mut response: Vec<&Annotation> = response.to_vec();
    key.sort_by_key(|a| (a.start, a.id()));
    response.sort_by_key(|a| (a.start, a.id()));

    let mut pairings = Vec::new();
    let mut response_used = vec![false; response.len()];
    let mut key_used = vec![false; key.len()];

    // pass 1: coextensive pairs
    for (ki, k) in key.iter().enumerate() {
        for (ri, r) in response.iter().enumerate() {
            if response_used[ri] {
                continue;
            }
            if crate::annotation::span_relation(k, r) == SpanRelation::Coextensive {
                let demoted = compare_features.is_some_and(|feats| {
                    feats.iter().any(|f| k.features.get(*f) != r.features.get(*f))
                });
                pairings.push(Pairing {
                    key_id: k.id(),
                    response_id: r.id(),
                    match_class: if demoted { MatchClass::Partial } else { MatchClass::Correct },
                });
                response_used[ri] = true;
                key_used[ki] = true;
                break;
            }
        }
    }

    // pass 2: overlapping pairs among the remainder
    let rest_keys: Vec<&Annotation> = key
        .iter()
        .enumerate()
        .filter(|(i, _)| !key_used[*i])
        .map(|(_, a)| *a)
        .collect();
    let rest_responses: Vec<&Annotation> = response
        .iter()
        .enumerate()
        .filter(|(i, _)| !response_used[*i])
        .map(|(_, a)| *a)
        .collect();
    for (k, r) in max_overlap_matching(&rest_keys, &rest_responses) {
        pairings.push(Pairing {
            key_id: rest_keys[k].id(),
            response_id: rest_responses[r].id(),
            match_class: MatchClass::Partial,
        });
    }

    let correct = pairings
        .iter()
        .filter(|p| p.match_class == MatchClass::Correct)
        .count();
    let partial = pairings.len() - correct;
    let counts = DiffCounts {
        correct,
        partial,
        missing: key.len() - pairings.len(),
        false_positive: response.len() - pairings.len(),
    };
    Ok((counts, pairings))
}

/// Precision under a criterion. A zero denominator yields 1.0.
pub fn precision(counts: DiffCounts, criterion: Criterion) -> f64 {
    let c = counts.correct as f64;
    let p = counts.partial as f64;
    let f = counts.false_positive as f64;
    let (num, den) = match criterion {
        Criterion::Strict => (c, c + f + p),
        Criterion::Lenient => (c + p, c + f + p),
        Criterion::Average => (c + 0.5 * p, c + f + 0.5 * p),
    };
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// Recall under a criterion. A zero denominator yields 1.0.
pub fn recall(counts: DiffCounts, criterion: Criterion) -> f64 {
    let c = counts.correct as f64;
    let p = counts.partial as f64;
    let m = counts.missing as f64;
    let (num, den) = match criterion {
        Criterion::Strict => (c, c + m + p),
        Criterion::Lenient => (c + p, c + m + p),
        Criterion::Average => (c + 0.5 * p, c + m + 0.5 * p),
    };
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// Weighted combination of precision and recall; 0.0 when both are 0.
pub fn f_measure(precision: f64, recall: f64, beta: f64) -> Result<f64, DiffError> {
    if beta <= 0.0 {
        return Err(DiffError::NonPositiveBeta(beta));
    }
    let b2 = beta * beta;
    let den = b2 * recall + precision;
    if den == 0.0 {
        Ok(0.0)
    } else {
        Ok(((b2 + 1.0) * precision * recall) / den)
    }
}

/// Precision, recall and F-measure for each criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSet {
    pub beta: f64,
    pub strict: (f64, f64, f64),
    pub lenient: (f64, f64, f64),
    pub average: (f64, f64, f64),
}

impl MetricSet {
    pub fn compute(counts: DiffCounts, beta: f64) -> Result<MetricSet, DiffError> {
        let one = |criterion| -> Result<(f64, f64, f64), DiffError> {
            let p = precision(counts, criterion);
            let r = recall(counts, criterion);
            Ok((p, r, f_measure(p, r, beta)?))
        };
        Ok(MetricSet {
            beta,
            strict: one(Criterion::Strict)?,
            lenient: one(Criterion::Lenient)?,
            average: one(Criterion::Average)?,
        })
    }

    pub fn get(&self, criterion: Criterion) -> (f64, f64, f64) {
        match criterion {
            Criterion::Strict => self.strict,
            Criterion::Lenient => self.lenient,
            Criterion::Average => self.average,
        }
    }
}
