//! Inline-XML interchange for annotated documents.
//!
//! The document text is emitted with each selected annotation rendered as
//! an element named after its type and features as attributes, wrapped in
//! a root `<asapDoc name="...">` element. Selected annotations must be
//! properly nestable; partial overlaps are rejected.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::annotation::{Annotation, Document, FeatureMap};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum XmlError {
    #[error("annotations {a} and {b} partially overlap; cannot nest")]
    OverlapNotNestable { a: String, b: String },
    #[error("malformed input at line {line}, column {col}: {message}")]
    MalformedInput { line: usize, col: usize, message: String },
}

fn escape_into(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

fn describe(a: &Annotation) -> String {
    format!("{}[{},{})", a.type_name, a.start, a.end)
}

/// Serializes the document text with the selected annotations inlined as
/// XML elements. `types = None` selects all types in the set.
pub fn serialize_inline_xml(
    doc: &Document,
    set_name: &str,
    types: Option<&[&str]>,
) -> Result<String, XmlError> {
    let selected: Vec<&Annotation> = match doc.get_set(set_name) {
        Some(set) => match types {
            Some(ts) => set.of_types(ts),
            None => set.iter().collect(),
        },
        None => Vec::new(),
    };
    serialize_selected(doc, selected)
}

/// Like [`serialize_inline_xml`] but selecting annotations by id, so a
/// caller can pre-filter a non-nestable set.
pub fn serialize_inline_xml_ids(
    doc: &Document,
    set_name: &str,
    ids: &[u32],
) -> Result<String, XmlError> {
    let selected: Vec<&Annotation> = match doc.get_set(set_name) {
        Some(set) => set.iter().filter(|a| ids.contains(&a.id())).collect(),
        None => Vec::new(),
    };
    serialize_selected(doc, selected)
}

fn serialize_selected(doc: &Document, mut selected: Vec<&Annotation>) -> Result<String, XmlError> {
    // Opening order at equal start: wider element first, then by id.
    selected.sort_by_key(|a| (a.start, std::cmp::Reverse(a.end), a.id()));

    let mut out = String::new();
    out.push_str("<asapDoc name=\"");
    escape_into(&mut out, &doc.source_name);
    out.push_str("\">");

    let chars: Vec<char> = doc.text().chars().collect();
    let mut stack: Vec<&Annotation> = Vec::new();
    let mut next = selected.iter().peekable();

    for pos in 0..=chars.len() {
        while let Some(top) = stack.last() {
            if top.end == pos {
                out.push_str("</");
                out.push_str(&top.type_name);
                out.push('>');
                stack.pop();
            } else {
                break;
            }
        }
        while let Some(ann) = next.peek() {
            if ann.start != pos {
                break;
            }
            let ann = *next.next().unwrap();
            if let Some(top) = stack.last() {
                if ann.end > top.end {
                    return Err(XmlError::OverlapNotNestable {
                        a: describe(top),
                        b: describe(ann),
                    });
                }
            }
            out.push('<');
            out.push_str(&ann.type_name);
            for (k, v) in &ann.features {
                out.push(' ');
                out.push_str(k);
                out.push_str("=\"");
                escape_into(&mut out, v);
                out.push('"');
            }
            if ann.end == pos {
                out.push_str("/>");
            } else {
                out.push('>');
                stack.push(ann);
            }
        }
        if pos < chars.len() {
            match chars[pos] {
                '&' => out.push_str("&amp;"),
                '<' => out.push_str("&lt;"),
                '>' => out.push_str("&gt;"),
                '"' => out.push_str("&quot;"),
                c => out.push(c),
            }
        }
    }
    out.push_str("</asapDoc>");
    Ok(out)
}

/// Drops annotations that would partially overlap an earlier-selected one,
/// returning a nestable subset (ids) plus descriptions of the dropped ones.
pub fn nestable_subset(doc: &Document, set_name: &str) -> (Vec<u32>, Vec<String>) {
    let mut anns: Vec<&Annotation> = match doc.get_set(set_name) {
        Some(set) => set.iter().collect(),
        None => Vec::new(),
    };
    anns.sort_by_key(|a| (a.start, std::cmp::Reverse(a.end), a.id()));
    let mut kept: Vec<&Annotation> = Vec::new();
    let mut dropped = Vec::new();
    'outer: for ann in anns {
        for k in &kept {
            let partial = ann.start < k.end && k.start < ann.end
                && !(k.start <= ann.start && ann.end <= k.end)
                && !(ann.start <= k.start && k.end <= ann.end);
            if partial {
                dropped.push(describe(ann));
                continue 'outer;
            }
        }
        kept.push(ann);
    }
    (kept.iter().map(|a| a.id()).collect(), dropped)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn new(input: &str) -> Self {
        Cursor { chars: input.chars().collect(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, message: impl Into<String>) -> XmlError {
        XmlError::MalformedInput { line: self.line, col: self.col, message: message.into() }
    }

    fn expect(&mut self, c: char) -> Result<(), XmlError> {
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected '{c}', found '{got}'"))),
            None => Err(self.err(format!("expected '{c}', found end of input"))),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn name(&mut self) -> Result<String, XmlError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if out.is_empty() {
            Err(self.err("expected a name"))
        } else {
            Ok(out)
        }
    }

    fn entity(&mut self) -> Result<char, XmlError> {
        // positioned just after '&'
        let mut body = String::new();
        loop {
            match self.bump() {
                Some(';') => break,
                Some(c) if body.len() < 8 => body.push(c),
                Some(_) => return Err(self.err("entity reference too long")),
                None => return Err(self.err("unterminated entity reference")),
            }
        }
        match body.as_str() {
            "amp" => Ok('&'),
            "lt" => Ok('<'),
            "gt" => Ok('>'),
            "quot" => Ok('"'),
            "apos" => Ok('\''),
            _ => {
                let code = if let Some(hex) = body.strip_prefix("#x") {
                    u32::from_str_radix(hex, 16).ok()
                } else if let Some(dec) = body.strip_prefix('#') {
                    dec.parse().ok()
                } else {
                    None
                };
                code.and_then(char::from_u32)
                    .ok_or_else(|| self.err(format!("unknown entity &{body};")))
            }
        }
    }

    fn attributes(&mut self) -> Result<FeatureMap, XmlError> {
        let mut attrs = BTreeMap::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('/') | Some('>') | None => return Ok(attrs),
                _ => {}
            }
            let key = self.name()?;
            self.skip_ws();
            self.expect('=')?;
            self.skip_ws();
            self.expect('"')?;
            let mut value = String::new();
            loop {
                match self.bump() {
                    Some('"') => break,
                    Some('&') => value.push(self.entity()?),
                    Some(c) => value.push(c),
                    None => return Err(self.err("unterminated attribute value")),
                }
            }
            attrs.insert(key, value);
        }
    }
}

/// Parses a document previously written by [`serialize_inline_xml`], or a
/// hand-annotated file in the same convention. Annotation ids are
/// renumbered.
pub fn parse_inline_xml(input: &str, fallback_name: &str) -> Result<Document, XmlError> {
    let mut cur = Cursor::new(input);
    cur.skip_ws();
    // optional XML declaration
    if cur.chars.get(cur.pos) == Some(&'<') && cur.chars.get(cur.pos + 1) == Some(&'?') {
        while let Some(c) = cur.bump() {
            if c == '>' {
                break;
            }
        }
        cur.skip_ws();
    }
    cur.expect('<')?;
    let root = cur.name()?;
    if root != "asapDoc" {
        return Err(cur.err(format!("expected root element asapDoc, found {root}")));
    }
    let attrs = cur.attributes()?;
    cur.expect('>')?;
    let source_name = attrs
        .get("name")
        .cloned()
        .unwrap_or_else(|| fallback_name.to_string());

    // (type, features, start, open sequence) for currently open elements
    let mut open: Vec<(String, FeatureMap, usize, usize)> = Vec::new();
    // (type, start, end, features, open sequence)
    let mut done: Vec<(String, usize, usize, FeatureMap, usize)> = Vec::new();
    let mut seq = 0usize;
    let mut text = String::new();
    let mut offset = 0usize;
    let mut closed_root = false;

    while let Some(c) = cur.peek() {
        if c == '<' {
            cur.bump();
            if cur.peek() == Some('/') {
                cur.bump();
                let name = cur.name()?;
                cur.skip_ws();
                cur.expect('>')?;
                if name == "asapDoc" {
                    if let Some((open_name, _, _, _)) = open.last() {
                        return Err(cur.err(format!("unclosed element {open_name}")));
                    }
                    closed_root = true;
                    break;
                }
                match open.pop() {
                    Some((open_name, feats, start, opened)) if open_name == name => {
                        done.push((open_name, start, offset, feats, opened));
                    }
                    Some((open_name, _, _, _)) => {
                        return Err(cur.err(format!(
                            "mismatched close tag: expected </{open_name}>, found </{name}>"
                        )));
                    }
                    None => return Err(cur.err(format!("unexpected close tag </{name}>"))),
                }
            } else {
                let name = cur.name()?;
                let feats = cur.attributes()?;
                if cur.peek() == Some('/') {
                    cur.bump();
                    cur.expect('>')?;
                    done.push((name, offset, offset, feats, seq));
                } else {
                    cur.expect('>')?;
                    open.push((name, feats, offset, seq));
                }
                seq += 1;
            }
        } else if c == '&' {
            cur.bump();
            text.push(cur.entity()?);
            offset += 1;
        } else {
            text.push(c);
            cur.bump();
            offset += 1;
        }
    }
    if !closed_root {
        return Err(cur.err("missing </asapDoc>"));
    }

    let mut doc = Document::new(source_name, text);
    // deterministic ids: (start, end desc), ties in document open order so
    // coextensive annotations keep their outer-to-inner ordering
    done.sort_by_key(|(_, start, end, _, opened)| (*start, std::cmp::Reverse(*end), *opened));
    for (type_name, start, end, feats, _) in done {
        doc.add_annotation(crate::annotation::DEFAULT_SET, type_name, start, end, feats)
            .map_err(|e| XmlError::MalformedInput {
                line: 0,
                col: 0,
                message: e.to_string(),
            })?;
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::DEFAULT_SET;

    fn feats(pairs: &[(&str, &str)]) -> FeatureMap {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn serialize_single_annotation() {
        let mut doc = Document::new("d", "Intent: reuse");
        doc.add_annotation(
            DEFAULT_SET,
            "Problem",
            0,
            7,
            feats(&[("kind", "Problem"), ("rule", "Problem1")]),
        )
        .unwrap();
        let xml = serialize_inline_xml(&doc, DEFAULT_SET, None).unwrap();
        assert_eq!(
            xml,
            "<asapDoc name=\"d\"><Problem kind=\"Problem\" rule=\"Problem1\">Intent:</Problem> reuse</asapDoc>"
        );
    }

    #[test]
    fn serialize_escapes_reserved_chars() {
        let doc = Document::new("d", "a < b & c > \"d\"");
        let xml = serialize_inline_xml(&doc, DEFAULT_SET, None).unwrap();
        assert_eq!(
            xml,
            "<asapDoc name=\"d\">a &lt; b &amp; c &gt; &quot;d&quot;</asapDoc>"
        );
    }

    #[test]
    fn partial_overlap_rejected() {
        let mut doc = Document::new("d", "abcdefgh");
        doc.add_annotation(DEFAULT_SET, "Solution", 0, 5, FeatureMap::new()).unwrap();
        doc.add_annotation(DEFAULT_SET, "Solution", 3, 8, FeatureMap::new()).unwrap();
        let err = serialize_inline_xml(&doc, DEFAULT_SET, None).unwrap_err();
        assert!(matches!(err, XmlError::OverlapNotNestable { .. }));
    }

    #[test]
    fn round_trip_preserves_annotations() {
        let mut doc = Document::new("d", "Intent: reuse");
        doc.add_annotation(
            DEFAULT_SET,
            "Problem",
            0,
            7,
            feats(&[("kind", "Problem"), ("rule", "Problem1")]),
        )
        .unwrap();
        let xml = serialize_inline_xml(&doc, DEFAULT_SET, None).unwrap();
        let back = parse_inline_xml(&xml, "x").unwrap();
        assert_eq!(back.text(), doc.text());
        let anns = back.annotations_of_type(DEFAULT_SET, "Problem");
        assert_eq!(anns.len(), 1);
        assert_eq!((anns[0].start, anns[0].end), (0, 7));
        assert_eq!(anns[0].features, feats(&[("kind", "Problem"), ("rule", "Problem1")]));
    }

    #[test]
    fn parse_hand_annotated_key() {
        let xml = "<asapDoc name=\"key\">\
            <Problem>Intent:</Problem> one <Problem>Intent:</Problem> two</asapDoc>";
        let doc = parse_inline_xml(xml, "x").unwrap();
        assert_eq!(doc.annotations_of_type(DEFAULT_SET, "Problem").len(), 2);
    }

    #[test]
    fn truncated_input_is_malformed() {
        let err = parse_inline_xml("<asapDoc name=\"d\">abc", "x").unwrap_err();
        assert!(matches!(err, XmlError::MalformedInput { .. }));
        let err = parse_inline_xml("<asapDoc name=\"d\"><T>abc</asapDoc>", "x").unwrap_err();
        assert!(matches!(err, XmlError::MalformedInput { .. }));
    }

    #[test]
    fn zero_length_annotation_round_trips() {
        let mut doc = Document::new("d", "ab");
        doc.add_annotation(DEFAULT_SET, "Mark", 1, 1, FeatureMap::new()).unwrap();
        let xml = serialize_inline_xml(&doc, DEFAULT_SET, None).unwrap();
        assert_eq!(xml, "<asapDoc name=\"d\">a<Mark/>b</asapDoc>");
        let back = parse_inline_xml(&xml, "x").unwrap();
        let anns = back.annotations_of_type(DEFAULT_SET, "Mark");
        assert_eq!((anns[0].start, anns[0].end), (1, 1));
    }
}
