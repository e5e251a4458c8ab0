use std::fmt;

use super::ScltlError;

/// Maximum number of atomic propositions a compiled automaton may range over.
///
/// Letters are enumerated exhaustively, so the transition table has `2^|AP|`
/// columns per state.
pub const MAX_PROPS: usize = 16;

/// A letter of the alphabet `2^AP`, stored as a bit-set over the proposition
/// ordering of the owning [`Props`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u32);

impl Letter {
    pub const EMPTY: Letter = Letter(0);

    pub fn contains(self, prop: usize) -> bool {
        self.0 & (1 << prop) != 0
    }

    pub fn with(self, prop: usize) -> Letter {
        Letter(self.0 | (1 << prop))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered set of atomic proposition names. Position in the list is the bit
/// used for that proposition inside a [`Letter`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Props(Vec<String>);

impl Props {
    pub fn new<I, S>(names: I) -> Result<Self, ScltlError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            let valid = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || super::parse::is_keyword(&name) {
                return Err(ScltlError::InvalidPropName(name));
            }
            if out.contains(&name) {
                return Err(ScltlError::DuplicateProp(name));
            }
            out.push(name);
        }
        if out.len() > 31 {
            return Err(ScltlError::TooManyProps {
                count: out.len(),
                max: 31,
            });
        }
        Ok(Props(out))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|p| p == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    /// Number of letters in `2^AP`.
    pub fn alphabet_size(&self) -> usize {
        1usize << self.0.len()
    }

    /// Builds a letter from proposition names.
    pub fn letter(&self, names: &[&str]) -> Result<Letter, ScltlError> {
        let mut letter = Letter::EMPTY;
        for name in names {
            let idx = self
                .index_of(name)
                .ok_or_else(|| ScltlError::UnknownProp((*name).to_string()))?;
            letter = letter.with(idx);
        }
        Ok(letter)
    }

    /// Renders a letter as `{p,q}`.
    pub fn format_letter(&self, letter: Letter) -> String {
        let names: Vec<&str> = (0..self.len())
            .filter(|&i| letter.contains(i))
            .map(|i| self.name(i))
            .collect();
        format!("{{{}}}", names.join(","))
    }
}

/// scLTL abstract syntax. Negation only occurs on atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    True,
    False,
    Atom(usize),
    NegAtom(usize),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Next(Box<Expr>),
    Until(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Expr, r: Expr) -> Expr {
        Expr::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(e: Expr) -> Expr {
        Expr::Next(Box::new(e))
    }

    pub fn until(l: Expr, r: Expr) -> Expr {
        Expr::Until(Box::new(l), Box::new(r))
    }

    /// `X^k e`.
    pub fn next_n(mut e: Expr, k: usize) -> Expr {
        for _ in 0..k {
            e = Expr::next(e);
        }
        e
    }

    /// Tree depth, counting a leaf as depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::True | Expr::False | Expr::Atom(_) | Expr::NegAtom(_) => 1,
            Expr::Next(e) => 1 + e.depth(),
            Expr::And(l, r) | Expr::Or(l, r) | Expr::Until(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Largest atom index referenced, if any.
    pub fn max_atom(&self) -> Option<usize> {
        match self {
            Expr::True | Expr::False => None,
            Expr::Atom(p) | Expr::NegAtom(p) => Some(*p),
            Expr::Next(e) => e.max_atom(),
            Expr::And(l, r) | Expr::Or(l, r) | Expr::Until(l, r) => {
                match (l.max_atom(), r.max_atom()) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }
}

/// A parsed scLTL formula together with the proposition set it ranges over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    expr: Expr,
    props: Props,
}

impl Formula {
    pub fn new(expr: Expr, props: Props) -> Result<Self, ScltlError> {
        if let Some(max) = expr.max_atom() {
            if max >= props.len() {
                return Err(ScltlError::AtomOutOfRange {
                    index: max,
                    props: props.len(),
                });
            }
        }
        Ok(Formula { expr, props })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn props(&self) -> &Props {
        &self.props
    }
}

struct Show<'a> {
    expr: &'a Expr,
    props: &'a Props,
}

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e| Show {
            expr: e,
            props: self.props,
        };
        match self.expr {
            Expr::True => write!(f, "true"),
            Expr::False => write!(f, "false"),
            Expr::Atom(p) => write!(f, "{}", self.props.name(*p)),
            Expr::NegAtom(p) => write!(f, "!{}", self.props.name(*p)),
            Expr::And(l, r) => write!(f, "({} & {})", sub(l), sub(r)),
            Expr::Or(l, r) => write!(f, "({} | {})", sub(l), sub(r)),
            Expr::Next(e) => write!(f, "X {}", sub(e)),
            Expr::Until(l, r) => write!(f, "({} U {})", sub(l), sub(r)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Show {
            expr: &self.expr,
            props: &self.props,
        }
        .fmt(f)
    }
}
