//! Gazetteer: terminology lists compiled for longest-match lookup over
//! token sequences.
//!
//! Index file (`lists.def`): one line per list, `file.lst:majorType[:minorType]`,
//! `#` comments allowed. List files: one entry per line, UTF-8, blank lines
//! and `#` comments ignored, surrounding whitespace trimmed.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::annotation::{Annotation, Document, FeatureMap, DEFAULT_SET};
use crate::pipeline::tokenizer::{SPACE_TOKEN, TOKEN};

pub const LOOKUP: &str = "Lookup";

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("gazetteer index not found: {0}")]
    IndexNotFound(PathBuf),
    #[error("gazetteer list not found: {0}")]
    ListNotFound(String),
    #[error("malformed index line {line}: {text:?}")]
    MalformedIndexLine { line: usize, text: String },
}

#[derive(Debug, Clone)]
pub struct GazetteerList {
    pub file_name: String,
    pub major_type: String,
    pub minor_type: Option<String>,
    pub case_sensitive: bool,
    pub entries: Vec<String>,
}

/// One matching unit of a compiled entry: a word/number/punctuation token
/// string, or a single whitespace separator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Piece {
    Token(String),
    Space,
}

#[derive(Debug, Clone)]
struct CompiledEntry {
    pieces: Vec<Piece>,
    list_index: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    pub lists: Vec<GazetteerList>,
    // keyed by first piece for cheap candidate lookup
    index: HashMap<Piece, Vec<CompiledEntry>>,
    pub warnings: Vec<String>,
}

/// Splits an entry phrase into pieces with the same boundaries the
/// tokenizer would produce. Runs of whitespace become a single separator.
fn entry_pieces(entry: &str, fold_case: bool) -> Vec<Piece> {
    let mut pieces = Vec::new();
    let mut word = String::new();
    let folded: String = if fold_case { entry.to_lowercase() } else { entry.to_string() };
    let flush = |word: &mut String, pieces: &mut Vec<Piece>| {
        if !word.is_empty() {
            pieces.push(Piece::Token(std::mem::take(word)));
        }
    };
    let mut prev_kind: Option<bool> = None; // true = alphabetic, false = numeric
    for c in folded.chars() {
        if c.is_whitespace() {
            flush(&mut word, &mut pieces);
            if pieces.last() != Some(&Piece::Space) {
                pieces.push(Piece::Space);
            }
            prev_kind = None;
        } else if c.is_alphabetic() || c.is_numeric() {
            let kind = c.is_alphabetic();
            if prev_kind.is_some() && prev_kind != Some(kind) {
                flush(&mut word, &mut pieces);
            }
            word.push(c);
            prev_kind = Some(kind);
        } else {
            flush(&mut word, &mut pieces);
            pieces.push(Piece::Token(c.to_string()));
            prev_kind = None;
        }
    }
    flush(&mut word, &mut pieces);
    pieces
}

impl Gazetteer {
    pub fn load(index_path: &Path) -> Result<Gazetteer, GazetteerError> {
        let index_text = fs::read_to_string(index_path)
            .map_err(|_| GazetteerError::IndexNotFound(index_path.to_path_buf()))?;
        let dir = index_path.parent().unwrap_or_else(|| Path::new("."));

        let mut gaz = Gazetteer::default();
        for (lineno, raw) in index_text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(':');
            let file_name = parts.next().unwrap_or("").trim().to_string();
            let major = parts.next().map(str::trim).unwrap_or("");
            if file_name.is_empty() || major.is_empty() {
                return Err(GazetteerError::MalformedIndexLine {
                    line: lineno + 1,
                    text: raw.to_string(),
                });
            }
            let minor = parts.next().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            let list_path = dir.join(&file_name);
            let body = fs::read_to_string(&list_path)
                .map_err(|_| GazetteerError::ListNotFound(file_name.clone()))?;
            let entries: Vec<String> = body
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect();
            if entries.is_empty() {
                gaz.warnings.push(format!("empty gazetteer list: {file_name}"));
            }
            gaz.lists.push(GazetteerList {
                file_name,
                major_type: major.to_string(),
                minor_type: minor,
                case_sensitive: false,
                entries,
            });
        }
        gaz.compile();
        Ok(gaz)
    }

    /// Builds a gazetteer directly from lists (used by tests).
    pub fn from_lists(lists: Vec<GazetteerList>) -> Gazetteer {
        let mut gaz = Gazetteer { lists, ..Gazetteer::default() };
        gaz.compile();
        gaz
    }

    fn compile(&mut self) {
        self.index.clear();
        for (li, list) in self.lists.iter().enumerate() {
            for entry in &list.entries {
                let pieces = entry_pieces(entry, !list.case_sensitive);
                if pieces.is_empty() {
                    continue;
                }
                self.index
                    .entry(pieces[0].clone())
                    .or_default()
                    .push(CompiledEntry { pieces, list_index: li });
            }
        }
    }

    pub fn entry_count(&self) -> usize {
        self.lists.iter().map(|l| l.entries.len()).sum()
    }
}

fn token_piece(ann: &Annotation, fold_case: bool) -> Piece {
    if ann.type_name == SPACE_TOKEN {
        Piece::Space
    } else {
        let s = ann.features.get("string").cloned().unwrap_or_default();
        Piece::Token(if fold_case { s.to_lowercase() } else { s })
    }
}

/// Marks occurrences of gazetteer entries with `Lookup` annotations.
/// Matching is longest-match per start position per list, anchored at
/// token boundaries; after a match the scan resumes past it.
pub fn gazetteer_lookup(doc: &mut Document, gaz: &Gazetteer) -> usize {
    let tokens: Vec<(u32, usize, usize, Piece, Piece)> = doc
        .default_set()
        .of_types(&[TOKEN, SPACE_TOKEN])
        .iter()
        .map(|a| {
            (
                a.id(),
                a.start,
                a.end,
                token_piece(a, true),
                token_piece(a, false),
            )
        })
        .collect();

    // (start, end, list_index) per match, resolved per list
    let mut matches: Vec<(usize, usize, usize)> = Vec::new();
    for (li, list) in gaz.lists.iter().enumerate() {
        let fold = !list.case_sensitive;
        let mut i = 0;
        while i < tokens.len() {
            let first = if fold { &tokens[i].3 } else { &tokens[i].4 };
            let mut best_end_token: Option<usize> = None;
            if let Some(cands) = gaz.index.get(first) {
                for cand in cands.iter().filter(|c| c.list_index == li) {
                    if cand.pieces.len() > tokens.len() - i {
                        continue;
                    }
                    let matched = cand.pieces.iter().enumerate().all(|(k, p)| {
                        let tok = if fold { &tokens[i + k].3 } else { &tokens[i + k].4 };
                        tok == p
                    });
                    if matched {
                        let last = i + cand.pieces.len() - 1;
                        if best_end_token.map_or(true, |b| last > b) {
                            best_end_token = Some(last);
                        }
                    }
                }
            }
            if let Some(last) = best_end_token {
                matches.push((tokens[i].1, tokens[last].2, li));
                i = last + 1;
            } else {
                i += 1;
            }
        }
    }

    matches.sort();
    let added = matches.len();
    for (start, end, li) in matches {
        let list = &gaz.lists[li];
        let mut features = FeatureMap::new();
        features.insert("majorType".into(), list.major_type.clone());
        if let Some(minor) = &list.minor_type {
            features.insert("minorType".into(), minor.clone());
        }
        features.insert("list".into(), list.file_name.clone());
        doc.add_annotation(DEFAULT_SET, LOOKUP, start, end, features)
            .expect("lookup spans come from token spans");
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::tokenizer::tokenize;

    fn solution_list() -> GazetteerList {
        GazetteerList {
            file_name: "solution.lst".into(),
            major_type: "solution".into(),
            minor_type: None,
            case_sensitive: false,
            entries: vec![
                "Activity".into(),
                "Formal solution".into(),
                "Intent".into(),
                "process".into(),
                "Rule".into(),
                "Sample execution".into(),
                "Semi-formal solution".into(),
                "Solution".into(),
                "Solution modèle".into(),
                "Solution démarche".into(),
            ],
        }
    }

    fn lookups(text: &str, gaz: &Gazetteer) -> Vec<(usize, usize, String)> {
        let mut doc = Document::new("d", text);
        tokenize(&mut doc).unwrap();
        gazetteer_lookup(&mut doc, gaz);
        doc.annotations_of_type(DEFAULT_SET, LOOKUP)
            .iter()
            .map(|a| {
                (
                    a.start,
                    a.end,
                    a.features.get("majorType").cloned().unwrap_or_default(),
                )
            })
            .collect()
    }

    #[test]
    fn longest_match_wins() {
        let gaz = Gazetteer::from_lists(vec![solution_list()]);
        let found = lookups("Semi-formal solution applies", &gaz);
        assert_eq!(found, vec![(0, 20, "solution".to_string())]);
    }

    #[test]
    fn case_insensitive_by_default() {
        let gaz = Gazetteer::from_lists(vec![solution_list()]);
        let found = lookups("INTENT", &gaz);
        assert_eq!(found, vec![(0, 6, "solution".to_string())]);
    }

    #[test]
    fn token_anchoring_blocks_substrings() {
        let gaz = Gazetteer::from_lists(vec![solution_list()]);
        assert!(lookups("solutions", &gaz).is_empty());
    }

    #[test]
    fn accented_entries_match() {
        let gaz = Gazetteer::from_lists(vec![solution_list()]);
        let found = lookups("See the Solution démarche now", &gaz);
        assert_eq!(found, vec![(8, 25, "solution".to_string())]);
    }

    #[test]
    fn case_sensitive_override() {
        let mut list = solution_list();
        list.case_sensitive = true;
        let gaz = Gazetteer::from_lists(vec![list]);
        assert!(lookups("INTENT", &gaz).is_empty());
        assert_eq!(lookups("Intent", &gaz).len(), 1);
    }

    #[test]
    fn multiword_requires_single_separator() {
        let gaz = Gazetteer::from_lists(vec![solution_list()]);
        // tab still is one whitespace separator token
        assert_eq!(lookups("Formal\tsolution", &gaz).len(), 1);
    }
}
