//! Boolean guards over proposition valuations.
//!
//! Guards label DFA edges and are evaluated against arena label sets. Unlike
//! formulas, negation is unrestricted here (`!(f | g | n | o)` is a typical
//! edge guard).

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GuardError {
    #[error("syntax error in guard at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("temporal operator `{op}` not allowed in a guard (position {pos})")]
    Temporal { op: char, pos: usize },
}

/// A Boolean expression over proposition names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Guard {
    True,
    False,
    Prop(String),
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    /// Evaluates the guard against a label set. Total for any set.
    pub fn eval(&self, labels: &BTreeSet<String>) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Prop(p) => labels.contains(p),
            Guard::Not(g) => !g.eval(labels),
            Guard::And(gs) => gs.iter().all(|g| g.eval(labels)),
            Guard::Or(gs) => gs.iter().any(|g| g.eval(labels)),
        }
    }

    /// Proposition names referenced by the guard, in first-use order.
    pub fn props(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut Vec<String>) {
        match self {
            Guard::True | Guard::False => {}
            Guard::Prop(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Guard::Not(g) => g.collect_props(out),
            Guard::And(gs) | Guard::Or(gs) => {
                for g in gs {
                    g.collect_props(out);
                }
            }
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, inner: &Guard) -> fmt::Result {
            match inner {
                Guard::True | Guard::False | Guard::Prop(_) | Guard::Not(_) => {
                    write!(f, "{inner}")
                }
                _ => write!(f, "({inner})"),
            }
        }
        match self {
            Guard::True => f.write_str("true"),
            Guard::False => f.write_str("false"),
            Guard::Prop(p) => f.write_str(p),
            Guard::Not(g) => {
                f.write_str("!")?;
                paren(f, g)
            }
            Guard::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    paren(f, g)?;
                }
                Ok(())
            }
            Guard::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    paren(f, g)?;
                }
                Ok(())
            }
        }
    }
}

// Grammar: or := and (`|` and)* ; and := unary (`&` unary)* ;
// unary := `!` unary | primary ; primary := prop | true | false | `(` or `)`.
struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && (self.bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.bytes.get(self.pos).map(|&b| b as char)
    }

    fn parse_or(&mut self) -> Result<Guard, GuardError> {
        let mut terms = vec![self.parse_and()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            terms.push(self.parse_and()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Guard::Or(terms)
        })
    }

    fn parse_and(&mut self) -> Result<Guard, GuardError> {
        let mut terms = vec![self.parse_unary()?];
        while self.peek() == Some('&') {
            self.pos += 1;
            terms.push(self.parse_unary()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Guard::And(terms)
        })
    }

    fn parse_unary(&mut self) -> Result<Guard, GuardError> {
        if self.peek() == Some('!') {
            self.pos += 1;
            return Ok(Guard::Not(Box::new(self.parse_unary()?)));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Guard, GuardError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.parse_or()?;
                if self.peek() != Some(')') {
                    return Err(GuardError::Syntax {
                        pos: self.pos,
                        msg: "expected `)`".to_string(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && ((self.bytes[self.pos] as char).is_ascii_alphanumeric()
                        || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let word = &self.text[start..self.pos];
                match word {
                    "true" => Ok(Guard::True),
                    "false" => Ok(Guard::False),
                    "F" | "X" | "U" | "W" | "G" => Err(GuardError::Temporal {
                        op: word.chars().next().unwrap(),
                        pos: start,
                    }),
                    _ => Ok(Guard::Prop(word.to_string())),
                }
            }
            Some(c) => Err(GuardError::Syntax {
                pos: self.pos,
                msg: format!("unexpected character `{c}`"),
            }),
            None => Err(GuardError::Syntax {
                pos: self.pos,
                msg: "unexpected end of guard".to_string(),
            }),
        }
    }
}

/// Parses a guard from its surface syntax.
pub fn parse_guard(text: &str) -> Result<Guard, GuardError> {
    let mut p = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
    };
    let g = p.parse_or()?;
    if p.peek().is_some() {
        return Err(GuardError::Syntax {
            pos: p.pos,
            msg: "trailing input".to_string(),
        });
    }
    Ok(g)
}
