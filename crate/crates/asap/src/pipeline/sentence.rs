//! Rule-based sentence splitter. A sentence ends at `.` `!` `?` followed
//! by whitespace, at a blank line, or at end of document. Terminators
//! belonging to a small abbreviation list do not split.

use thiserror::Error;

use crate::annotation::{Document, FeatureMap, DEFAULT_SET};
use crate::pipeline::tokenizer::{SPACE_TOKEN, TOKEN};

pub const SENTENCE: &str = "Sentence";

const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "fig.", "al.", "resp.", "no.", "approx.",
];

#[derive(Debug, Error, PartialEq, Eq)]
#[error("document has not been tokenized")]
pub struct MissingTokens;

/// True when the non-whitespace run ending at `end` (exclusive) is a known
/// abbreviation.
fn is_abbreviation(chars: &[char], end: usize) -> bool {
    let mut start = end;
    while start > 0 && !chars[start - 1].is_whitespace() {
        start -= 1;
    }
    let word: String = chars[start..end].iter().collect();
    ABBREVIATIONS.contains(&word.to_lowercase().as_str())
}

/// Adds non-overlapping `Sentence` annotations covering all non-whitespace
/// text. Requires `tokenize` to have run first.
pub fn split_sentences(doc: &mut Document) -> Result<usize, MissingTokens> {
    let set = doc.default_set();
    if !doc.is_empty() && set.of_type(TOKEN).is_empty() && set.of_type(SPACE_TOKEN).is_empty() {
        return Err(MissingTokens);
    }

    let chars: Vec<char> = doc.text().chars().collect();
    let mut boundaries: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_nonspace_end = 0;
    let mut newlines_in_gap = 0;

    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            if c == '\n' && start.is_some() {
                newlines_in_gap += 1;
                if newlines_in_gap >= 2 {
                    // blank line between sentences
                    boundaries.push((start.take().unwrap(), last_nonspace_end));
                    newlines_in_gap = 0;
                }
            }
            continue;
        }
        newlines_in_gap = 0;
        if start.is_none() {
            start = Some(i);
        }
        last_nonspace_end = i + 1;
        if matches!(c, '.' | '!' | '?') {
            let followed_by_space = chars.get(i + 1).map_or(true, |n| n.is_whitespace());
            if followed_by_space && !(c == '.' && is_abbreviation(&chars, i + 1)) {
                boundaries.push((start.take().unwrap(), i + 1));
            }
        }
    }
    if let Some(s) = start {
        boundaries.push((s, last_nonspace_end));
    }

    let added = boundaries.len();
    for (s, e) in boundaries {
        doc.add_annotation(DEFAULT_SET, SENTENCE, s, e, FeatureMap::new())
            .expect("sentence spans are in bounds");
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::tokenizer::tokenize;

    fn sentences(text: &str) -> Vec<(usize, usize)> {
        let mut doc = Document::new("d", text);
        tokenize(&mut doc).unwrap();
        split_sentences(&mut doc).unwrap();
        doc.annotations_of_type(DEFAULT_SET, SENTENCE)
            .iter()
            .map(|a| (a.start, a.end))
            .collect()
    }

    #[test]
    fn terminator_splits() {
        assert_eq!(sentences("Reuse it. Apply it."), vec![(0, 9), (10, 19)]);
    }

    #[test]
    fn abbreviation_does_not_split() {
        assert_eq!(sentences("e.g. patterns help."), vec![(0, 19)]);
    }

    #[test]
    fn blank_line_splits() {
        assert_eq!(sentences("Problem\n\nSolution"), vec![(0, 7), (9, 17)]);
    }

    #[test]
    fn requires_tokens() {
        let mut doc = Document::new("d", "Hello there.");
        assert_eq!(split_sentences(&mut doc), Err(MissingTokens));
    }

    #[test]
    fn empty_document_has_no_sentences() {
        let mut doc = Document::new("d", "");
        tokenize(&mut doc).unwrap();
        assert_eq!(split_sentences(&mut doc), Ok(0));
    }

    #[test]
    fn unterminated_tail_is_a_sentence() {
        assert_eq!(sentences("One. Two without end"), vec![(0, 4), (5, 20)]);
    }

    #[test]
    fn question_and_exclamation_split() {
        assert_eq!(sentences("Why? Do it!"), vec![(0, 4), (5, 11)]);
    }
}
