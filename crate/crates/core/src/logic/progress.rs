//! Formula progression: translating co-safe LTL into a specification DFA.
//!
//! States of the resulting DFA are normalized progressed formulas; reading a
//! label set rewrites the formula to what must still hold of the future.
//! `true` is the unique accepting state (reaching it means the consumed
//! prefix is good), and it is absorbing by construction. States are numbered
//! in discovery order: breadth-first from the initial formula, symbols
//! enumerated in bitmask order over the atom list, so state names are stable
//! across runs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::ast::Formula;
use super::dfa::{Dfa, DfaEdge, DfaError};
use super::guard::Guard;

/// Subsets of this many atoms are enumerated per state; larger formulas are
/// outside the desk scale this translation targets.
pub const MAX_FORMULA_ATOMS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum TranslateError {
    #[error("formula atom `{0}` does not appear in the proposition set")]
    AtomNotDeclared(String),
    #[error("formula has {0} atoms, exceeding the translation cap of {MAX_FORMULA_ATOMS}")]
    TooManyAtoms(usize),
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

/// One progression step: the residual obligation after observing `sigma`.
pub fn progress(f: &Formula, sigma: &BTreeSet<String>) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(p) => {
            if sigma.contains(p) {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::NotAtom(p) => {
            if sigma.contains(p) {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::And(cs) => Formula::and(cs.iter().map(|c| progress(c, sigma)).collect()),
        Formula::Or(cs) => Formula::or(cs.iter().map(|c| progress(c, sigma)).collect()),
        Formula::Next(g) => (**g).clone(),
        Formula::Eventually(g) => Formula::or(vec![progress(g, sigma), f.clone()]),
        Formula::Until(a, b) => Formula::or(vec![
            progress(b, sigma),
            Formula::and(vec![progress(a, sigma), f.clone()]),
        ]),
    }
}

/// Translates a co-safe formula into a deterministic, complete DFA over the
/// given proposition set. Language-equivalent, not state-minimal.
pub fn to_dfa(phi: &Formula, aps: &[String]) -> Result<Dfa, TranslateError> {
    let atoms = phi.atoms();
    for a in &atoms {
        if !aps.iter().any(|p| p == a) {
            return Err(TranslateError::AtomNotDeclared(a.clone()));
        }
    }
    if atoms.len() > MAX_FORMULA_ATOMS {
        return Err(TranslateError::TooManyAtoms(atoms.len()));
    }
    // alphabet order follows the caller's proposition order
    let alphabet: Vec<String> = aps.iter().filter(|p| atoms.contains(*p)).cloned().collect();
    let n_symbols = 1usize << alphabet.len();
    let symbols: Vec<BTreeSet<String>> = (0..n_symbols)
        .map(|mask| {
            alphabet
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect();

    let mut index: BTreeMap<Formula, u32> = BTreeMap::new();
    let mut states: Vec<Formula> = Vec::new();
    let mut queue = VecDeque::new();
    let initial = phi.clone();
    index.insert(initial.clone(), 0);
    states.push(initial);
    queue.push_back(0u32);

    let mut edges = Vec::new();
    while let Some(q) = queue.pop_front() {
        for (mask, sigma) in symbols.iter().enumerate() {
            let next = progress(&states[q as usize], sigma);
            let to = match index.get(&next) {
                Some(&i) => i,
                None => {
                    let i = states.len() as u32;
                    index.insert(next.clone(), i);
                    states.push(next);
                    queue.push_back(i);
                    i
                }
            };
            edges.push(DfaEdge {
                from: q,
                guard: minterm(&alphabet, mask),
                to,
            });
        }
    }

    let accepting: BTreeSet<u32> = states
        .iter()
        .enumerate()
        .filter(|(_, f)| **f == Formula::True)
        .map(|(i, _)| i as u32)
        .collect();
    let ids: Vec<String> = (0..states.len()).map(|i| i.to_string()).collect();
    Ok(Dfa::new(ids, 0, accepting, edges)?)
}

/// The conjunction of literals selecting exactly one label subset.
fn minterm(alphabet: &[String], mask: usize) -> Guard {
    if alphabet.is_empty() {
        return Guard::True;
    }
    let lits: Vec<Guard> = alphabet
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if mask & (1 << i) != 0 {
                Guard::Prop(p.clone())
            } else {
                Guard::Not(Box::new(Guard::Prop(p.clone())))
            }
        })
        .collect();
    if lits.len() == 1 {
        lits.into_iter().next().unwrap()
    } else {
        Guard::And(lits)
    }
}
