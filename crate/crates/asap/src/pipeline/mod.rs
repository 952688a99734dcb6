//! Pre-transduction pipeline stages: tokeniser, sentence splitter and
//! gazetteer lookup.

pub mod gazetteer;
pub mod sentence;
pub mod tokenizer;

pub use gazetteer::{gazetteer_lookup, Gazetteer, GazetteerError, GazetteerList, LOOKUP};
pub use sentence::{split_sentences, MissingTokens, SENTENCE};
pub use tokenizer::{tokenize, AlreadyTokenized, TokenKind, SPACE_TOKEN, TOKEN};
