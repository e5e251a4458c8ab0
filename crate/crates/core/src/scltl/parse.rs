//! Recursive-descent parser for the textual scLTL syntax.
//!
//! ```text
//! until := or ('U' until)?                 right-associative, loosest
//! or    := and ('|' and)*
//! and   := unary ('&' unary)*
//! unary := '!' unary | 'X' ('^' INT)? unary
//!        | 'G' '[' INT ',' INT ']' unary | 'F' '[' INT ',' INT ']' unary
//!        | primary
//! primary := 'true' | 'false' | IDENT | '(' until ')'
//! ```
//!
//! Bounded operators are expanded on the spot: `G[a,b] p` becomes
//! `X^a p & (X^(a+1) p & ... )` and `F[a,b] p` the matching disjunction.

use super::formula::{Expr, Formula, Props};
use super::ScltlError;

const KEYWORDS: &[&str] = &["true", "false", "X", "U", "G", "F"];

/// Upper limit on bounded-operator indices; expansion is linear in the bound.
const MAX_BOUND: usize = 10_000;

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Not,
    And,
    Or,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Caret,
}

fn describe(tok: Option<&Tok>) -> String {
    match tok {
        None => "end of input".to_string(),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(Tok::Int(n)) => format!("`{n}`"),
        Some(t) => format!("{t:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ScltlError> {
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '!' | '¬' => Some(Tok::Not),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '^' => Some(Tok::Caret),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            _ => None,
        };
        if let Some(tok) = single {
            // accept `&&` and `||` as aliases
            if matches!(tok, Tok::And | Tok::Or) && bytes.get(i + 1).map(|b| b.1) == Some(c) {
                i += 1;
            }
            out.push((pos, tok));
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = bytes[start..i].iter().map(|b| b.1).collect();
            let n = s.parse::<usize>().map_err(|_| ScltlError::Syntax {
                pos,
                msg: format!("integer `{s}` out of range"),
            })?;
            out.push((pos, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_ascii_alphanumeric() || bytes[i].1 == '_') {
                i += 1;
            }
            let s: String = bytes[start..i].iter().map(|b| b.1).collect();
            out.push((pos, Tok::Ident(s)));
        } else {
            return Err(ScltlError::Syntax {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    props: &'a Props,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.1.clone());
        self.at += 1;
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ScltlError> {
        Err(ScltlError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ScltlError> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            self.error(format!(
                "expected {}, found {}",
                describe(Some(&want)),
                describe(self.peek())
            ))
        }
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }

    fn until(&mut self) -> Result<Expr, ScltlError> {
        let lhs = self.or()?;
        if self.is_ident("U") {
            self.at += 1;
            let rhs = self.until()?;
            return Ok(Expr::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ScltlError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            let rhs = self.and()?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ScltlError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            let rhs = self.unary()?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn int(&mut self) -> Result<usize, ScltlError> {
        match self.peek() {
            Some(Tok::Int(n)) if *n <= MAX_BOUND => {
                let n = *n;
                self.at += 1;
                Ok(n)
            }
            Some(Tok::Int(n)) => self.error(format!("bound {n} exceeds {MAX_BOUND}")),
            other => self.error(format!("expected integer, found {}", describe(other))),
        }
    }

    fn interval(&mut self) -> Result<(usize, usize), ScltlError> {
        self.expect(Tok::LBracket)?;
        let lo = self.int()?;
        self.expect(Tok::Comma)?;
        let pos = self.pos();
        let hi = self.int()?;
        self.expect(Tok::RBracket)?;
        if lo > hi {
            return Err(ScltlError::Syntax {
                pos,
                msg: format!("empty interval [{lo},{hi}]"),
            });
        }
        Ok((lo, hi))
    }

    fn unary(&mut self) -> Result<Expr, ScltlError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Not) => {
                self.at += 1;
                match self.unary()? {
                    Expr::Atom(p) => Ok(Expr::NegAtom(p)),
                    _ => Err(ScltlError::NegatedNonAtom { pos }),
                }
            }
            Some(Tok::Ident(s)) if s == "X" => {
                self.at += 1;
                let k = if self.peek() == Some(&Tok::Caret) {
                    self.at += 1;
                    self.int()?
                } else {
                    1
                };
                let body = self.unary()?;
                Ok(Expr::next_n(body, k))
            }
            Some(Tok::Ident(s)) if s == "G" || s == "F" => {
                let always = s == "G";
                self.at += 1;
                let (lo, hi) = self.interval()?;
                let body = self.unary()?;
                let mut acc = Expr::next_n(body.clone(), hi);
                for k in (lo..hi).rev() {
                    let term = Expr::next_n(body.clone(), k);
                    acc = if always {
                        Expr::and(term, acc)
                    } else {
                        Expr::or(term, acc)
                    };
                }
                Ok(acc)
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ScltlError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::LParen) => {
                let e = self.until()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(s)) if s == "true" => Ok(Expr::True),
            Some(Tok::Ident(s)) if s == "false" => Ok(Expr::False),
            Some(Tok::Ident(s)) if !is_keyword(&s) => self
                .props
                .index_of(&s)
                .map(Expr::Atom)
                .ok_or(ScltlError::UnknownProp(s)),
            other => Err(ScltlError::Syntax {
                pos,
                msg: format!("expected formula, found {}", describe(other.as_ref())),
            }),
        }
    }
}

/// Parses `text` into a [`Formula`] over `props`.
pub fn parse(text: &str, props: &Props) -> Result<Formula, ScltlError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        at: 0,
        end: text.len(),
        props,
    };
    let expr = parser.until()?;
    if parser.at < parser.toks.len() {
        return parser.error(format!("unexpected {}", describe(parser.peek())));
    }
    Formula::new(expr, props.clone())
}
