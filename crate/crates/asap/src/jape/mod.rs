//! A JAPE-subset transduction engine: phases of pattern rules matched
//! over annotation sequences, whose actions create new annotations.

pub mod engine;
pub mod parser;

pub use engine::{run_phase, run_pipeline};
pub use parser::{load_multiphase, parse_rule_file, ParseError};

/// Phase control style: which matching rules fire at a position and how
/// the matcher advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    /// Longest match wins; ties broken by priority, then file order.
    Appelt,
    /// Every matching rule fires; advance one annotation.
    All,
    /// First matching rule in file order wins.
    First,
    /// Like appelt, but the phase stops after its first match.
    Once,
    /// Alias of `All`.
    Brill,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicateOp {
    Eq,
    Ne,
}

/// `Type.feature == "value"` inside a constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub feature: String,
    pub op: PredicateOp,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    One,
    Optional,
    Star,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternElement {
    /// Matches one annotation of the given type whose predicates all hold.
    Constraint {
        type_name: String,
        predicates: Vec<Predicate>,
    },
    Sequence(Vec<PatternElement>),
    Alternation(Vec<PatternElement>),
    Group {
        element: Box<PatternElement>,
        quantifier: Quantifier,
        binding: Option<String>,
    },
}

impl PatternElement {
    /// All labels bound anywhere in this pattern.
    pub fn bound_labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PatternElement::Constraint { .. } => {}
            PatternElement::Sequence(elems) | PatternElement::Alternation(elems) => {
                for e in elems {
                    e.collect_labels(out);
                }
            }
            PatternElement::Group { element, binding, .. } => {
                if let Some(b) = binding {
                    out.push(b);
                }
                element.collect_labels(out);
            }
        }
    }
}

/// `:label.NewType = {k=v, ...}` — creates one annotation spanning the
/// annotations consumed under `label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub label: String,
    pub new_type: String,
    pub feature_assignments: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub priority: i32,
    pub pattern: PatternElement,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub name: String,
    pub input_types: Vec<String>,
    pub control: Control,
    pub rules: Vec<Rule>,
}
