//! Recursive-descent parser for the co-safe LTL surface grammar.
//!
//! Tokens: `F` (eventually), `X` (next), `U` (until), `!`, `&`, `|`, `->`,
//! `true`, `false`, parentheses, and proposition identifiers. Precedence,
//! loosest to tightest: `U`, `->`, `|`, `&`, unary (`!`, `F`, `X`). `U` and
//! `->` associate to the right. Implications are desugared to `!lhs | rhs`
//! and the negation restriction is re-checked afterwards, so a negated
//! non-atom on the left of `->` is rejected. `W` (weak until) and `G`
//! (always) are not part of the fragment and are rejected with a dedicated
//! error.

use super::ast::Formula;
use crate::arena::DECOY_AP;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("weak until `W` is outside the co-safe fragment (position {pos})")]
    WeakUntil { pos: usize },
    #[error("`G` (always) is outside the co-safe fragment (position {pos})")]
    Globally { pos: usize },
    #[error("negation above a non-atomic subformula at position {pos} violates the co-safe fragment")]
    CosafetyViolation { pos: usize },
    #[error("the proposition `decoy` is reserved and may not appear in formulas (position {pos})")]
    ReservedProposition { pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Eventually,
    Until,
    WeakUntil,
    Globally,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '!' => {
                toks.push((Tok::Not, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::And, i));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Or, i));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Implies, i));
                    i += 2;
                } else {
                    return Err(ParseError::Syntax {
                        pos: i,
                        msg: "expected `->`".to_string(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "F" => Tok::Eventually,
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "W" => Tok::WeakUntil,
                    "G" => Tok::Globally,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(toks)
}

/// Pre-desugaring syntax tree. Negation and implication are unrestricted
/// here; lowering enforces the fragment.
#[derive(Debug)]
enum Raw {
    True,
    False,
    Atom(String, usize),
    Not(Box<Raw>, usize),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Implies(Box<Raw>, Box<Raw>),
    Next(Box<Raw>),
    Eventually(Box<Raw>),
    Until(Box<Raw>, Box<Raw>),
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&(Tok, usize)> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: &str) -> ParseError {
        let pos = self.peek().map(|(_, p)| *p).unwrap_or(self.end);
        ParseError::Syntax {
            pos,
            msg: msg.to_string(),
        }
    }

    // until := implies (`U` until)?
    fn parse_until(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.parse_implies()?;
        match self.peek() {
            Some((Tok::Until, _)) => {
                self.bump();
                let rhs = self.parse_until()?;
                Ok(Raw::Until(Box::new(lhs), Box::new(rhs)))
            }
            Some((Tok::WeakUntil, p)) => Err(ParseError::WeakUntil { pos: *p }),
            _ => Ok(lhs),
        }
    }

    // implies := or (`->` implies)?
    fn parse_implies(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.parse_or()?;
        if let Some((Tok::Implies, _)) = self.peek() {
            self.bump();
            let rhs = self.parse_implies()?;
            return Ok(Raw::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.parse_and()?;
        while let Some((Tok::Or, _)) = self.peek() {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = Raw::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.parse_unary()?;
        while let Some((Tok::And, _)) = self.peek() {
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Raw::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Raw, ParseError> {
        match self.peek() {
            Some((Tok::Not, p)) => {
                let p = *p;
                self.bump();
                let inner = self.parse_unary()?;
                Ok(Raw::Not(Box::new(inner), p))
            }
            Some((Tok::Eventually, _)) => {
                self.bump();
                Ok(Raw::Eventually(Box::new(self.parse_unary()?)))
            }
            Some((Tok::Next, _)) => {
                self.bump();
                Ok(Raw::Next(Box::new(self.parse_unary()?)))
            }
            Some((Tok::Globally, p)) => Err(ParseError::Globally { pos: *p }),
            Some((Tok::WeakUntil, p)) => Err(ParseError::WeakUntil { pos: *p }),
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Raw, ParseError> {
        match self.bump() {
            Some((Tok::Ident(name), p)) => Ok(Raw::Atom(name.clone(), *p)),
            Some((Tok::True, _)) => Ok(Raw::True),
            Some((Tok::False, _)) => Ok(Raw::False),
            Some((Tok::LParen, p)) => {
                let p = *p;
                let inner = self.parse_until()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((_, q)) => Err(ParseError::Syntax {
                        pos: *q,
                        msg: "expected `)`".to_string(),
                    }),
                    None => Err(ParseError::Syntax {
                        pos: p,
                        msg: "unclosed `(`".to_string(),
                    }),
                }
            }
            Some((Tok::Globally, p)) => Err(ParseError::Globally { pos: *p }),
            Some((Tok::WeakUntil, p)) => Err(ParseError::WeakUntil { pos: *p }),
            Some((tok, p)) => Err(ParseError::Syntax {
                pos: *p,
                msg: format!("unexpected token {tok:?}"),
            }),
            None => Err(ParseError::Syntax {
                pos: self.end,
                msg: "unexpected end of input".to_string(),
            }),
        }
    }
}

/// Lowers the raw tree into the fragment: desugars `a -> b` to `!a | b`,
/// pushes nothing else, and rejects negation above non-atoms.
fn lower(raw: &Raw) -> Result<Formula, ParseError> {
    match raw {
        Raw::True => Ok(Formula::True),
        Raw::False => Ok(Formula::False),
        Raw::Atom(name, pos) => {
            if name == DECOY_AP {
                return Err(ParseError::ReservedProposition { pos: *pos });
            }
            Ok(Formula::atom(name.clone()))
        }
        Raw::Not(inner, pos) => lower_negated(inner, *pos),
        Raw::And(a, b) => Ok(Formula::and(vec![lower(a)?, lower(b)?])),
        Raw::Or(a, b) => Ok(Formula::or(vec![lower(a)?, lower(b)?])),
        Raw::Implies(a, b) => {
            let neg_pos = raw_pos(a);
            Ok(Formula::or(vec![lower_negated(a, neg_pos)?, lower(b)?]))
        }
        Raw::Next(f) => Ok(Formula::next(lower(f)?)),
        Raw::Eventually(f) => Ok(Formula::eventually(lower(f)?)),
        Raw::Until(a, b) => Ok(Formula::until(lower(a)?, lower(b)?)),
    }
}

fn lower_negated(inner: &Raw, pos: usize) -> Result<Formula, ParseError> {
    match inner {
        Raw::True => Ok(Formula::False),
        Raw::False => Ok(Formula::True),
        Raw::Atom(name, p) => {
            if name == DECOY_AP {
                return Err(ParseError::ReservedProposition { pos: *p });
            }
            Ok(Formula::not_atom(name.clone()))
        }
        _ => Err(ParseError::CosafetyViolation { pos }),
    }
}

fn raw_pos(raw: &Raw) -> usize {
    match raw {
        Raw::Atom(_, p) | Raw::Not(_, p) => *p,
        Raw::And(a, _) | Raw::Or(a, _) | Raw::Implies(a, _) | Raw::Until(a, _) => raw_pos(a),
        Raw::Next(f) | Raw::Eventually(f) => raw_pos(f),
        Raw::True | Raw::False => 0,
    }
}

/// Parses a co-safe LTL formula from its surface syntax.
pub fn parse_scltl(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
    };
    let raw = parser.parse_until()?;
    if let Some((tok, p)) = parser.peek() {
        return Err(ParseError::Syntax {
            pos: *p,
            msg: format!("trailing input starting with {tok:?}"),
        });
    }
    lower(&raw)
}
