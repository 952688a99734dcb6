//! Parser for the rule DSL.
//!
//! ```text
//! Phase: Solution
//! Input: Token SpaceToken
//! Options: control = appelt
//!
//! Rule: solution
//! ( {Token.string == "Solution"} ( {SpaceToken} | {Token.string == ":"} )+ ):Solution
//! -->
//! :Solution.Solution = { kind = "Solution", rule = "solution" }
//! ```
//!
//! `//` starts a line comment. The literal `appel` is accepted as an
//! alias for `appelt`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{
    Action, Control, PatternElement, Phase, Predicate, PredicateOp, Quantifier, Rule,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: expected {expected}, found {found}")]
    SyntaxError { line: usize, col: usize, expected: String, found: String },
    #[error("rule {rule}: action references label {label:?} which is never bound")]
    UnboundLabel { rule: String, label: String },
    #[error("unknown control keyword: {0}")]
    UnknownControl(String),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(i32),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Pipe,
    Question,
    Star,
    Plus,
    Colon,
    Dot,
    Comma,
    Eq,     // =
    EqEq,   // ==
    NotEq,  // !=
    Arrow,  // -->
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Question => "'?'".into(),
            Tok::Star => "'*'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Colon => "':'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Comma => "','".into(),
            Tok::Eq => "'='".into(),
            Tok::EqEq => "'=='".into(),
            Tok::NotEq => "'!='".into(),
            Tok::Arrow => "'-->'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(source: &str) -> Self {
        Lexer { chars: source.chars().collect(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
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

    fn skip_trivia(&mut self) {
        loop {
            while matches!(self.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            if self.peek() == Some('/') && self.peek2() == Some('/') {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                return;
            }
        }
    }

    fn err(&self, expected: &str, found: String) -> ParseError {
        ParseError::SyntaxError {
            line: self.line,
            col: self.col,
            expected: expected.into(),
            found,
        }
    }

    /// Next token plus its source position.
    fn next(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        self.skip_trivia();
        let line = self.line;
        let col = self.col;
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match c {
            '{' => { self.bump(); Tok::LBrace }
            '}' => { self.bump(); Tok::RBrace }
            '(' => { self.bump(); Tok::LParen }
            ')' => { self.bump(); Tok::RParen }
            '|' => { self.bump(); Tok::Pipe }
            '?' => { self.bump(); Tok::Question }
            '*' => { self.bump(); Tok::Star }
            '+' => { self.bump(); Tok::Plus }
            ':' => { self.bump(); Tok::Colon }
            '.' => { self.bump(); Tok::Dot }
            ',' => { self.bump(); Tok::Comma }
            '=' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::EqEq
                } else {
                    Tok::Eq
                }
            }
            '!' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::NotEq
                } else {
                    return Err(self.err("'!='", "'!'".into()));
                }
            }
            '-' => {
                if self.chars.get(self.pos..self.pos + 3) == Some(&['-', '-', '>']) {
                    self.bump();
                    self.bump();
                    self.bump();
                    Tok::Arrow
                } else if self.peek2().is_some_and(|d| d.is_ascii_digit()) {
                    self.bump();
                    let n = self.integer()?;
                    Tok::Int(-n)
                } else {
                    return Err(self.err("'-->' or a number", "'-'".into()));
                }
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(e) => s.push(e),
                            None => return Err(self.err("closing '\"'", "end of input".into())),
                        },
                        Some(ch) => s.push(ch),
                        None => return Err(self.err("closing '\"'", "end of input".into())),
                    }
                }
                Tok::Str(s)
            }
            d if d.is_ascii_digit() => Tok::Int(self.integer()?),
            a if a.is_alphabetic() || a == '_' => {
                let mut s = String::new();
                while let Some(ch) = self.peek() {
                    if ch.is_alphanumeric() || ch == '_' || ch == '-' {
                        s.push(ch);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(self.err("a token", format!("'{other}'"))),
        };
        Ok((tok, line, col))
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s.parse()
            .map_err(|_| self.err("an integer", format!("{s:?}")))
    }
}

struct Parser {
    tokens: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(source);
        let mut tokens = Vec::new();
        loop {
            let t = lexer.next()?;
            let eof = t.0 == Tok::Eof;
            tokens.push(t);
            if eof {
                break;
            }
        }
        Ok(Parser { tokens, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> ParseError {
        let (tok, line, col) = &self.tokens[self.pos];
        ParseError::SyntaxError {
            line: *line,
            col: *col,
            expected: expected.into(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(&want.describe()))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.err_here(expected)),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == word => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err_here(&format!("keyword {word:?}"))),
        }
    }

    fn at_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn file(&mut self) -> Result<Vec<Phase>, ParseError> {
        let mut phases = Vec::new();
        while *self.peek() != Tok::Eof {
            phases.push(self.phase()?);
        }
        if phases.is_empty() {
            return Err(self.err_here("at least one phase"));
        }
        Ok(phases)
    }

    fn phase(&mut self) -> Result<Phase, ParseError> {
        self.keyword("Phase")?;
        self.expect(Tok::Colon)?;
        let name = self.ident("phase name")?;

        self.keyword("Input")?;
        self.expect(Tok::Colon)?;
        let mut input_types = Vec::new();
        while let Tok::Ident(s) = self.peek() {
            if s == "Options" {
                break;
            }
            input_types.push(s.clone());
            self.bump();
        }
        if input_types.is_empty() {
            return Err(self.err_here("at least one input annotation type"));
        }

        self.keyword("Options")?;
        self.expect(Tok::Colon)?;
        self.keyword("control")?;
        self.expect(Tok::Eq)?;
        let kw = self.ident("control keyword")?;
        let control = match kw.as_str() {
            "appelt" | "appel" => Control::Appelt,
            "all" => Control::All,
            "first" => Control::First,
            "once" => Control::Once,
            "brill" => Control::Brill,
            other => return Err(ParseError::UnknownControl(other.to_string())),
        };

        let mut rules = Vec::new();
        while self.at_keyword("Rule") {
            rules.push(self.rule()?);
        }
        if rules.is_empty() {
            return Err(self.err_here("at least one rule"));
        }
        Ok(Phase { name, input_types, control, rules })
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        self.keyword("Rule")?;
        self.expect(Tok::Colon)?;
        let name = self.ident("rule name")?;
        let mut priority = -1;
        if self.at_keyword("Priority") {
            self.bump();
            self.expect(Tok::Colon)?;
            match self.bump() {
                Tok::Int(n) => priority = n,
                _ => return Err(self.err_here("an integer priority")),
            }
        }
        let pattern = self.alternation()?;
        self.expect(Tok::Arrow)?;
        let mut actions = vec![self.action()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            actions.push(self.action()?);
        }
        let bound = pattern.bound_labels();
        for action in &actions {
            if !bound.contains(&action.label.as_str()) {
                return Err(ParseError::UnboundLabel {
                    rule: name,
                    label: action.label.clone(),
                });
            }
        }
        Ok(Rule { name, priority, pattern, actions })
    }

    fn alternation(&mut self) -> Result<PatternElement, ParseError> {
        let mut branches = vec![self.sequence()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            branches.push(self.sequence()?);
        }
        if branches.len() == 1 {
            Ok(branches.pop().unwrap())
        } else {
            Ok(PatternElement::Alternation(branches))
        }
    }

    fn sequence(&mut self) -> Result<PatternElement, ParseError> {
        let mut elems = vec![self.postfix()?];
        while matches!(self.peek(), Tok::LParen | Tok::LBrace) {
            elems.push(self.postfix()?);
        }
        if elems.len() == 1 {
            Ok(elems.pop().unwrap())
        } else {
            Ok(PatternElement::Sequence(elems))
        }
    }

    fn postfix(&mut self) -> Result<PatternElement, ParseError> {
        let inner = match self.peek() {
            Tok::LParen => {
                self.bump();
                let e = self.alternation()?;
                self.expect(Tok::RParen)?;
                e
            }
            Tok::LBrace => self.constraint()?,
            _ => return Err(self.err_here("'(' or '{'")),
        };
        let quantifier = match self.peek() {
            Tok::Question => { self.bump(); Some(Quantifier::Optional) }
            Tok::Star => { self.bump(); Some(Quantifier::Star) }
            Tok::Plus => { self.bump(); Some(Quantifier::Plus) }
            _ => None,
        };
        // a binding colon only if not the start of an action (':label.Type =')
        let binding = if *self.peek() == Tok::Colon && !self.at_action_start() {
            self.bump();
            Some(self.ident("binding label")?)
        } else {
            None
        };
        if quantifier.is_none() && binding.is_none() {
            Ok(inner)
        } else {
            Ok(PatternElement::Group {
                element: Box::new(inner),
                quantifier: quantifier.unwrap_or(Quantifier::One),
                binding,
            })
        }
    }

    /// True when the upcoming tokens look like `: label . Type =` — an
    /// action rather than a binding. Only relevant after `-->`, which the
    /// grammar reaches before any stray colon, so a simple lookahead works:
    /// a binding is followed by `-->`, `)`, `(`, `{`, `|` or a quantifier.
    fn at_action_start(&self) -> bool {
        matches!(self.tokens.get(self.pos + 2).map(|t| &t.0), Some(Tok::Dot))
    }

    fn constraint(&mut self) -> Result<PatternElement, ParseError> {
        self.expect(Tok::LBrace)?;
        let type_name = self.ident("annotation type")?;
        let mut predicates = Vec::new();
        loop {
            if *self.peek() == Tok::Dot {
                self.bump();
                let feature = self.ident("feature name")?;
                let op = match self.bump() {
                    Tok::EqEq => PredicateOp::Eq,
                    Tok::NotEq => PredicateOp::Ne,
                    _ => return Err(self.err_here("'==' or '!='")),
                };
                let value = match self.bump() {
                    Tok::Str(s) => s,
                    Tok::Ident(s) => s,
                    Tok::Int(n) => n.to_string(),
                    _ => return Err(self.err_here("a string literal")),
                };
                predicates.push(Predicate { feature, op, value });
            }
            match self.bump() {
                Tok::RBrace => break,
                Tok::Comma => {
                    // further predicates must name the same annotation type
                    let t = self.ident("annotation type")?;
                    if t != type_name {
                        return Err(self.err_here(&format!(
                            "predicates on type {type_name:?} (found {t:?})"
                        )));
                    }
                }
                _ => return Err(self.err_here("'}' or ','")),
            }
        }
        Ok(PatternElement::Constraint { type_name, predicates })
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        self.expect(Tok::Colon)?;
        let label = self.ident("action label")?;
        self.expect(Tok::Dot)?;
        let new_type = self.ident("new annotation type")?;
        self.expect(Tok::Eq)?;
        self.expect(Tok::LBrace)?;
        let mut feature_assignments = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let key = self.ident("feature name")?;
                self.expect(Tok::Eq)?;
                let value = match self.bump() {
                    Tok::Str(s) => s,
                    Tok::Ident(s) => s,
                    Tok::Int(n) => n.to_string(),
                    _ => return Err(self.err_here("a feature value")),
                };
                feature_assignments.push((key, value));
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    _ => break,
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(Action { label, new_type, feature_assignments })
    }
}

/// Parses one rule file into its phases.
pub fn parse_rule_file(source: &str) -> Result<Vec<Phase>, ParseError> {
    Parser::new(source)?.file()
}

/// Loads a multiphase file: a `MultiPhase:` header, a `Phases:` line, then
/// one phase file name per line (`.jape` appended, resolved next to the
/// multiphase file).
pub fn load_multiphase(path: &Path) -> Result<Vec<Phase>, ParseError> {
    let text = fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut names = Vec::new();
    let mut seen_header = false;
    for raw in text.lines() {
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("MultiPhase:") {
            let _ = rest;
            seen_header = true;
        } else if line == "Phases:" {
            continue;
        } else {
            names.push(line.to_string());
        }
    }
    if !seen_header {
        return Err(ParseError::SyntaxError {
            line: 1,
            col: 1,
            expected: "MultiPhase: header".into(),
            found: "none".into(),
        });
    }
    let mut phases = Vec::new();
    for name in names {
        let file = dir.join(format!("{name}.jape"));
        let source = fs::read_to_string(&file).map_err(|e| ParseError::Io {
            path: file.clone(),
            message: e.to_string(),
        })?;
        phases.extend(parse_rule_file(&source)?);
    }
    Ok(phases)
}
