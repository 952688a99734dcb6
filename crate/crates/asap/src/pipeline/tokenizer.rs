//! Maximal-munch tokeniser. Adds `Token` annotations (word, number,
//! punctuation, symbol) and `SpaceToken` annotations so that every
//! character of the text is covered by exactly one token.

use thiserror::Error;

use crate::annotation::{Document, FeatureMap, DEFAULT_SET};

pub const TOKEN: &str = "Token";
pub const SPACE_TOKEN: &str = "SpaceToken";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
    Symbol,
    Space,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Word => "word",
            TokenKind::Number => "number",
            TokenKind::Punctuation => "punctuation",
            TokenKind::Symbol => "symbol",
            TokenKind::Space => "space",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("document already contains Token/SpaceToken annotations")]
pub struct AlreadyTokenized;

// ASCII punctuation plus the common typographic marks; everything else
// that is neither letter, digit nor whitespace counts as a symbol.
fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2010}'..='\u{2027}' // hyphens, dashes, quotes, ellipsis
                | '«' | '»' | '¡' | '¿' | '·'
        )
}

fn char_kind(c: char) -> TokenKind {
    if c.is_whitespace() {
        TokenKind::Space
    } else if c.is_alphabetic() {
        TokenKind::Word
    } else if c.is_numeric() {
        TokenKind::Number
    } else if is_punctuation(c) {
        TokenKind::Punctuation
    } else {
        TokenKind::Symbol
    }
}

fn orth(word: &str) -> Option<&'static str> {
    let mut chars = word.chars();
    let first = chars.next()?;
    let has_cased = word.chars().any(|c| c.is_uppercase() || c.is_lowercase());
    if !has_cased {
        return None;
    }
    let all_upper = word.chars().all(|c| !c.is_lowercase());
    let all_lower = word.chars().all(|c| !c.is_uppercase());
    if all_lower {
        Some("lowercase")
    } else if first.is_uppercase() && word.chars().skip(1).all(|c| !c.is_uppercase()) {
        // single capitals ("I", "X") count as upperInitial
        Some("upperInitial")
    } else if all_upper {
        Some("allCaps")
    } else {
        Some("mixedCaps")
    }
}

/// Tokenizes the document text. Words and numbers are maximal runs of
/// letters resp. digits, space tokens maximal runs of whitespace, and
/// punctuation/symbol characters stand alone.
pub fn tokenize(doc: &mut Document) -> Result<usize, AlreadyTokenized> {
    let set = doc.default_set();
    if !set.of_type(TOKEN).is_empty() || !set.of_type(SPACE_TOKEN).is_empty() {
        return Err(AlreadyTokenized);
    }

    let chars: Vec<char> = doc.text().chars().collect();
    let mut added = 0;
    let mut pos = 0;
    while pos < chars.len() {
        let kind = char_kind(chars[pos]);
        let start = pos;
        pos += 1;
        if matches!(kind, TokenKind::Word | TokenKind::Number | TokenKind::Space) {
            while pos < chars.len() && char_kind(chars[pos]) == kind {
                pos += 1;
            }
        }
        let covered: String = chars[start..pos].iter().collect();
        let mut features = FeatureMap::new();
        features.insert("string".into(), covered.clone());
        features.insert("kind".into(), kind.as_str().into());
        features.insert("length".into(), (pos - start).to_string());
        if kind == TokenKind::Word {
            if let Some(o) = orth(&covered) {
                features.insert("orth".into(), o.into());
            }
        }
        let type_name = if kind == TokenKind::Space { SPACE_TOKEN } else { TOKEN };
        doc.add_annotation(DEFAULT_SET, type_name, start, pos, features)
            .expect("token spans are in bounds");
        added += 1;
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn token_strings(doc: &Document, type_name: &str) -> Vec<(String, String)> {
        doc.annotations_of_type(DEFAULT_SET, type_name)
            .iter()
            .map(|a| {
                (
                    a.features.get("string").cloned().unwrap_or_default(),
                    a.features.get("kind").cloned().unwrap_or_default(),
                )
            })
            .collect()
    }

    #[test]
    fn heading_with_colon() {
        let mut doc = Document::new("d", "Intent:");
        tokenize(&mut doc).unwrap();
        let toks = token_strings(&doc, TOKEN);
        assert_eq!(
            toks,
            vec![
                ("Intent".to_string(), "word".to_string()),
                (":".to_string(), "punctuation".to_string())
            ]
        );
        let intent = &doc.annotations_of_type(DEFAULT_SET, TOKEN)[0];
        assert_eq!(intent.features.get("orth").unwrap(), "upperInitial");
    }

    #[test]
    fn hyphenated_all_caps() {
        let mut doc = Document::new("d", "UML-PP");
        tokenize(&mut doc).unwrap();
        let toks = token_strings(&doc, TOKEN);
        assert_eq!(toks[0], ("UML".into(), "word".into()));
        assert_eq!(toks[1], ("-".into(), "punctuation".into()));
        assert_eq!(toks[2], ("PP".into(), "word".into()));
        let anns = doc.annotations_of_type(DEFAULT_SET, TOKEN);
        assert_eq!(anns[0].features.get("orth").unwrap(), "allCaps");
        assert_eq!(anns[2].features.get("orth").unwrap(), "allCaps");
    }

    #[test]
    fn number_space_word() {
        let mut doc = Document::new("d", "15 patterns");
        tokenize(&mut doc).unwrap();
        let toks = token_strings(&doc, TOKEN);
        assert_eq!(toks[0], ("15".into(), "number".into()));
        assert_eq!(toks[1], ("patterns".into(), "word".into()));
        let spaces = token_strings(&doc, SPACE_TOKEN);
        assert_eq!(spaces, vec![(" ".to_string(), "space".to_string())]);
        let patterns = &doc.annotations_of_type(DEFAULT_SET, TOKEN)[1];
        assert_eq!(patterns.features.get("orth").unwrap(), "lowercase");
    }

    #[test]
    fn accented_letters_are_word_chars() {
        let mut doc = Document::new("d", "Solution modèle");
        tokenize(&mut doc).unwrap();
        let toks = token_strings(&doc, TOKEN);
        assert_eq!(toks[1].0, "modèle");
    }

    #[test]
    fn double_tokenize_rejected() {
        let mut doc = Document::new("d", "x");
        tokenize(&mut doc).unwrap();
        assert_eq!(tokenize(&mut doc), Err(AlreadyTokenized));
    }

    #[test]
    fn mixed_caps_orth() {
        let mut doc = Document::new("d", "McPattern");
        tokenize(&mut doc).unwrap();
        let ann = &doc.annotations_of_type(DEFAULT_SET, TOKEN)[0];
        assert_eq!(ann.features.get("orth").unwrap(), "mixedCaps");
    }
}
