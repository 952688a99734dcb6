//! Stand-off annotation model: documents, typed span annotations with
//! feature maps, and ordered annotation sets.
//!
//! Offsets count Unicode scalar values, not bytes. Every annotation
//! satisfies `0 <= start <= end <= text length`.

use std::collections::BTreeMap;

use thiserror::Error;

/// Name of the default (unnamed) annotation set.
pub const DEFAULT_SET: &str = "";

pub type FeatureMap = BTreeMap<String, String>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("span [{start},{end}) out of bounds for text of length {len}")]
    OffsetOutOfBounds { start: usize, end: usize, len: usize },
    #[error("inverted span: start {start} > end {end}")]
    InvertedSpan { start: usize, end: usize },
}

/// A typed span over the document text with a string feature map.
/// The id is unique within the owning document and immutable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    id: u32,
    pub type_name: String,
    pub start: usize,
    pub end: usize,
    pub features: FeatureMap,
}

impl Annotation {
    pub fn id(&self) -> u32 {
        self.id
    }

    /// Comparison key giving the canonical (start, id) iteration order.
    fn order_key(&self) -> (usize, u32) {
        (self.start, self.id)
    }
}

/// Relation between two spans. Touching spans ([0,5) and [5,9)) are
/// disjoint; overlap requires at least one shared character.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanRelation {
    Coextensive,
    Overlapping,
    Disjoint,
}

pub fn span_relation(a: &Annotation, b: &Annotation) -> SpanRelation {
    if a.start == b.start && a.end == b.end {
        SpanRelation::Coextensive
    } else if a.start.max(b.start) < a.end.min(b.end) {
        SpanRelation::Overlapping
    } else {
        SpanRelation::Disjoint
    }
}

/// An ordered collection of annotations. Iteration order is total and
/// deterministic: ascending start, ties broken by ascending id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationSet {
    pub name: String,
    annotations: Vec<Annotation>,
}

impl AnnotationSet {
    pub fn new(name: impl Into<String>) -> Self {
        AnnotationSet {
            name: name.into(),
            annotations: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter()
    }

    pub fn get(&self, id: u32) -> Option<&Annotation> {
        self.annotations.iter().find(|a| a.id == id)
    }

    /// Annotations of one type, in (start, id) order.
    pub fn of_type<'a>(&'a self, type_name: &str) -> Vec<&'a Annotation> {
        self.annotations
            .iter()
            .filter(|a| a.type_name == type_name)
            .collect()
    }

    /// Annotations whose type is in `types`, in (start, id) order.
    pub fn of_types<'a>(&'a self, types: &[&str]) -> Vec<&'a Annotation> {
        self.annotations
            .iter()
            .filter(|a| types.contains(&a.type_name.as_str()))
            .collect()
    }

    pub fn type_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.annotations.iter().map(|a| a.type_name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    fn insert(&mut self, ann: Annotation) {
        let key = ann.order_key();
        let pos = self
            .annotations
            .partition_point(|a| a.order_key() <= key);
        self.annotations.insert(pos, ann);
    }

    fn remove_types(&mut self, types: &[&str]) -> usize {
        let before = self.annotations.len();
        self.annotations
            .retain(|a| !types.contains(&a.type_name.as_str()));
        before - self.annotations.len()
    }
}

/// A text with its stand-off annotation sets. The default set has the
/// empty name. Annotation ids are document-scoped and monotonically
/// increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub source_name: String,
    text: String,
    text_len: usize,
    sets: BTreeMap<String, AnnotationSet>,
    next_id: u32,
}

impl Document {
    pub fn new(source_name: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let text_len = text.chars().count();
        let mut sets = BTreeMap::new();
        sets.insert(DEFAULT_SET.to_string(), AnnotationSet::new(DEFAULT_SET));
        Document {
            source_name: source_name.into(),
            text,
            text_len,
            sets,
            next_id: 0,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Document length in Unicode scalar values.
    pub fn len(&self) -> usize {
        self.text_len
    }

    pub fn is_empty(&self) -> bool {
        self.text_len == 0
    }

    /// The substring covered by a character-offset span.
    pub fn covered_text(&self, start: usize, end: usize) -> String {
        self.text
            .chars()
            .skip(start)
            .take(end.saturating_sub(start))
            .collect()
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn set(&mut self, name: &str) -> &mut AnnotationSet {
        self.sets
            .entry(name.to_string())
            .or_insert_with(|| AnnotationSet::new(name))
    }

    pub fn get_set(&self, name: &str) -> Option<&AnnotationSet> {
        self.sets.get(name)
    }

    pub fn default_set(&self) -> &AnnotationSet {
        self.sets.get(DEFAULT_SET).expect("default set always exists")
    }

    pub fn set_names(&self) -> impl Iterator<Item = &str> {
        self.sets.keys().map(String::as_str)
    }

    /// Adds an annotation and returns its fresh id. The set is created on
    /// first use.
    pub fn add_annotation(
        &mut self,
        set_name: &str,
        type_name: impl Into<String>,
        start: usize,
        end: usize,
        features: FeatureMap,
    ) -> Result<u32, AnnotationError> {
        if start > end {
            return Err(AnnotationError::InvertedSpan { start, end });
        }
        if end > self.text_len {
            return Err(AnnotationError::OffsetOutOfBounds {
                start,
                end,
                len: self.text_len,
            });
        }
        let id = self.next_id;
        self.next_id += 1;
        let ann = Annotation {
            id,
            type_name: type_name.into(),
            start,
            end,
            features,
        };
        self.set(set_name).insert(ann);
        Ok(id)
    }

    /// All annotations of one type in one set, in (start, id) order.
    /// Unknown set or type yields an empty list.
    pub fn annotations_of_type(&self, set_name: &str, type_name: &str) -> Vec<&Annotation> {
        self.sets
            .get(set_name)
            .map(|s| s.of_type(type_name))
            .unwrap_or_default()
    }

    /// Removes all annotations of the listed types from all sets.
    pub fn strip_types(&mut self, types: &[&str]) -> usize {
        self.sets.values_mut().map(|s| s.remove_types(types)).sum()
    }

    pub fn annotation_count(&self) -> usize {
        self.sets.values().map(AnnotationSet::len).sum()
    }

    /// Counts of annotations per type across all sets, sorted by type name.
    pub fn counts_by_type(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for set in self.sets.values() {
            for ann in set.iter() {
                *counts.entry(ann.type_name.clone()).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// An ordered list of documents with unique source names.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("duplicate document source name: {0}")]
pub struct DuplicateSourceName(pub String);

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    pub fn push(&mut self, doc: Document) -> Result<(), DuplicateSourceName> {
        if self.documents.iter().any(|d| d.source_name == doc.source_name) {
            return Err(DuplicateSourceName(doc.source_name));
        }
        self.documents.push(doc);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.documents.iter()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feats(pairs: &[(&str, &str)]) -> FeatureMap {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn create_document_is_empty() {
        let doc = Document::new("p1", "Intent: reuse code.");
        assert_eq!(doc.len(), 19);
        assert_eq!(doc.annotation_count(), 0);
        assert_eq!(doc.next_id(), 0);
    }

    #[test]
    fn empty_text_rejects_nonzero_end() {
        let mut doc = Document::new("p2", "");
        assert!(doc.is_empty());
        let err = doc
            .add_annotation(DEFAULT_SET, "Token", 0, 1, FeatureMap::new())
            .unwrap_err();
        assert!(matches!(err, AnnotationError::OffsetOutOfBounds { .. }));
    }

    #[test]
    fn offsets_count_scalar_values() {
        let doc = Document::new("p3", "é-ü");
        assert_eq!(doc.len(), 3);
    }

    #[test]
    fn add_annotation_counter_semantics() {
        let mut doc = Document::new("d", "Intent: reuse code.");
        let id0 = doc
            .add_annotation(DEFAULT_SET, "Problem", 0, 7, feats(&[("kind", "Problem")]))
            .unwrap();
        let id1 = doc
            .add_annotation(DEFAULT_SET, "Problem", 8, 13, FeatureMap::new())
            .unwrap();
        assert_eq!(id0, 0);
        assert_eq!(id1, 1);
        assert_eq!(doc.next_id(), 2);
    }

    #[test]
    fn zero_length_span_accepted() {
        let mut doc = Document::new("d", "abc");
        assert!(doc.add_annotation(DEFAULT_SET, "X", 0, 0, FeatureMap::new()).is_ok());
    }

    #[test]
    fn out_of_bounds_rejected() {
        let mut doc = Document::new("d", "Intent: reuse code.");
        let err = doc
            .add_annotation(DEFAULT_SET, "X", 5, 30, FeatureMap::new())
            .unwrap_err();
        assert_eq!(
            err,
            AnnotationError::OffsetOutOfBounds { start: 5, end: 30, len: 19 }
        );
        let err = doc
            .add_annotation(DEFAULT_SET, "X", 4, 2, FeatureMap::new())
            .unwrap_err();
        assert_eq!(err, AnnotationError::InvertedSpan { start: 4, end: 2 });
    }

    #[test]
    fn annotations_of_type_ordering() {
        let text = "x".repeat(3000);
        let mut doc = Document::new("d", text);
        doc.add_annotation(DEFAULT_SET, "Problem", 2785, 2793, FeatureMap::new())
            .unwrap();
        doc.add_annotation(DEFAULT_SET, "Problem", 308, 316, FeatureMap::new())
            .unwrap();
        let anns = doc.annotations_of_type(DEFAULT_SET, "Problem");
        assert_eq!(anns.len(), 2);
        assert_eq!(anns[0].start, 308);
        assert_eq!(anns[1].start, 2785);
    }

    #[test]
    fn equal_start_orders_by_id() {
        let mut doc = Document::new("d", "abcdef");
        let a = doc.add_annotation(DEFAULT_SET, "T", 1, 4, FeatureMap::new()).unwrap();
        let b = doc.add_annotation(DEFAULT_SET, "T", 1, 2, FeatureMap::new()).unwrap();
        let anns = doc.annotations_of_type(DEFAULT_SET, "T");
        assert_eq!(anns[0].id(), a);
        assert_eq!(anns[1].id(), b);
    }

    #[test]
    fn unknown_type_or_set_is_empty() {
        let doc = Document::new("d", "abc");
        assert!(doc.annotations_of_type(DEFAULT_SET, "Foo").is_empty());
        assert!(doc.annotations_of_type("nope", "Foo").is_empty());
    }

    #[test]
    fn span_relation_cases() {
        let mut doc = Document::new("d", "x".repeat(20000));
        let mk = |doc: &mut Document, s, e| {
            let id = doc.add_annotation(DEFAULT_SET, "T", s, e, FeatureMap::new()).unwrap();
            doc.default_set().get(id).unwrap().clone()
        };
        let a = mk(&mut doc, 13638, 13646);
        let b = mk(&mut doc, 13638, 13646);
        assert_eq!(span_relation(&a, &b), SpanRelation::Coextensive);
        let c = mk(&mut doc, 0, 5);
        let d = mk(&mut doc, 3, 8);
        assert_eq!(span_relation(&c, &d), SpanRelation::Overlapping);
        let e = mk(&mut doc, 5, 9);
        assert_eq!(span_relation(&c, &e), SpanRelation::Disjoint);
    }

    #[test]
    fn corpus_rejects_duplicate_names() {
        let mut corpus = Corpus::new();
        corpus.push(Document::new("a", "x")).unwrap();
        assert!(corpus.push(Document::new("a", "y")).is_err());
    }
}
