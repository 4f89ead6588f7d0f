//! Syntactically co-safe LTL formulas.
//!
//! Negation may appear only directly above an atom; weak until is not part
//! of the fragment. The `and`/`or` constructors keep formulas in a flattened,
//! sorted, constant-folded normal form so that progressed formulas can be
//! compared structurally.

use std::collections::BTreeSet;
use std::fmt;

/// A co-safe LTL formula in negation-restricted form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    /// Negation directly above an atom; the only place negation may occur.
    NotAtom(String),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn not_atom(name: impl Into<String>) -> Formula {
        Formula::NotAtom(name.into())
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            other => Formula::Eventually(Box::new(other)),
        }
    }

    pub fn until(lhs: Formula, rhs: Formula) -> Formula {
        match (&lhs, &rhs) {
            (_, Formula::True) => return Formula::True,
            (_, Formula::False) => return Formula::False,
            (Formula::True, _) => return Formula::eventually(rhs),
            (Formula::False, _) => return rhs,
            _ => {}
        }
        Formula::Until(Box::new(lhs), Box::new(rhs))
    }

    /// Conjunction in normal form: flattened, sorted, deduplicated, with
    /// constants folded, `p ∧ ¬p` collapsed, and `x ∧ (x ∨ …)` absorbed.
    pub fn and(items: Vec<Formula>) -> Formula {
        let mut flat = BTreeSet::new();
        let mut stack = items;
        while let Some(f) = stack.pop() {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(children) => stack.extend(children),
                other => {
                    flat.insert(other);
                }
            }
        }
        for f in &flat {
            if let Formula::Atom(p) = f {
                if flat.contains(&Formula::NotAtom(p.clone())) {
                    return Formula::False;
                }
            }
        }
        let absorbed: Vec<Formula> = flat
            .iter()
            .filter(|f| match f {
                Formula::Or(children) => !children.iter().any(|c| flat.contains(c)),
                _ => true,
            })
            .cloned()
            .collect();
        match absorbed.len() {
            0 => Formula::True,
            1 => absorbed.into_iter().next().unwrap(),
            _ => Formula::And(absorbed),
        }
    }

    /// Disjunction in normal form; dual of [`Formula::and`].
    pub fn or(items: Vec<Formula>) -> Formula {
        let mut flat = BTreeSet::new();
        let mut stack = items;
        while let Some(f) = stack.pop() {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(children) => stack.extend(children),
                other => {
                    flat.insert(other);
                }
            }
        }
        for f in &flat {
            if let Formula::Atom(p) = f {
                if flat.contains(&Formula::NotAtom(p.clone())) {
                    return Formula::True;
                }
            }
        }
        let absorbed: Vec<Formula> = flat
            .iter()
            .filter(|f| match f {
                Formula::And(children) => !children.iter().any(|c| flat.contains(c)),
                _ => true,
            })
            .cloned()
            .collect();
        match absorbed.len() {
            0 => Formula::False,
            1 => absorbed.into_iter().next().unwrap(),
            _ => Formula::Or(absorbed),
        }
    }

    /// All atomic propositions occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p) | Formula::NotAtom(p) => {
                out.insert(p.clone());
            }
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.collect_atoms(out);
                }
            }
            Formula::Next(f) | Formula::Eventually(f) => f.collect_atoms(out),
            Formula::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, inner: &Formula) -> fmt::Result {
            match inner {
                Formula::True
                | Formula::False
                | Formula::Atom(_)
                | Formula::NotAtom(_)
                | Formula::Next(_)
                | Formula::Eventually(_) => write!(f, "{inner}"),
                _ => write!(f, "({inner})"),
            }
        }
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(p) => f.write_str(p),
            Formula::NotAtom(p) => write!(f, "!{p}"),
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    paren(f, c)?;
                }
                Ok(())
            }
            Formula::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    paren(f, c)?;
                }
                Ok(())
            }
            Formula::Next(g) => {
                f.write_str("X ")?;
                paren(f, g)
            }
            Formula::Eventually(g) => {
                f.write_str("F ")?;
                paren(f, g)
            }
            Formula::Until(a, b) => {
                paren(f, a)?;
                f.write_str(" U ")?;
                paren(f, b)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_or_normal_form() {
        let p = Formula::atom("p");
        let q = Formula::atom("q");
        assert_eq!(Formula::and(vec![]), Formula::True);
        assert_eq!(Formula::or(vec![]), Formula::False);
        assert_eq!(Formula::and(vec![p.clone()]), p);
        assert_eq!(
            Formula::and(vec![p.clone(), Formula::True, p.clone()]),
            p
        );
        assert_eq!(
            Formula::and(vec![p.clone(), Formula::not_atom("p")]),
            Formula::False
        );
        assert_eq!(
            Formula::or(vec![p.clone(), Formula::not_atom("p")]),
            Formula::True
        );
        // nested flattening is order-insensitive
        let a = Formula::and(vec![p.clone(), Formula::and(vec![q.clone(), p.clone()])]);
        let b = Formula::and(vec![q, p]);
        assert_eq!(a, b);
    }

    #[test]
    fn absorption() {
        let p = Formula::atom("p");
        let q = Formula::atom("q");
        let or_pq = Formula::or(vec![p.clone(), q.clone()]);
        // p & (p | q) = p
        assert_eq!(Formula::and(vec![p.clone(), or_pq.clone()]), p);
        // p | (p & q) = p
        let and_pq = Formula::and(vec![p.clone(), q]);
        assert_eq!(Formula::or(vec![p.clone(), and_pq]), p);
    }

    #[test]
    fn until_constant_folding() {
        let p = Formula::atom("p");
        assert_eq!(Formula::until(Formula::True, p.clone()), Formula::eventually(p.clone()));
        assert_eq!(Formula::until(p.clone(), Formula::False), Formula::False);
        assert_eq!(Formula::until(p, Formula::True), Formula::True);
    }
}
