//! Specification DFAs with guard-labeled edges.
//!
//! A DFA here is deterministic and complete over its alphabet: for every
//! state and every label set exactly one outgoing guard fires. Accepting
//! states are absorbing; reaching one means a good prefix of the co-safe
//! objective has been produced. Both properties are machine-checked by a
//! validation pass rather than assumed.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::guard::{parse_guard, Guard, GuardError};
use crate::arena::DECOY_AP;

/// Validation enumerates all label sets over the referenced propositions;
/// beyond this many propositions the check is refused rather than silently
/// skipped.
pub const MAX_ALPHABET_PROPS: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum DfaError {
    #[error("invalid dfa document: {0}")]
    Document(String),
    #[error("guard on edge {from} -> {to}: {source}")]
    Guard {
        from: String,
        to: String,
        source: GuardError,
    },
    #[error("duplicate dfa state `{0}`")]
    DuplicateState(String),
    #[error("unknown dfa state `{0}`")]
    UnknownState(String),
    #[error("dfa references the reserved proposition `decoy` (edge {from} -> {to})")]
    ReservedProposition { from: String, to: String },
    #[error("dfa alphabet has {0} propositions, exceeding the validation cap of {MAX_ALPHABET_PROPS}")]
    AlphabetTooLarge(usize),
    #[error("dfa incomplete: no edge from `{state}` fires on {symbol:?}")]
    Incomplete { state: String, symbol: Vec<String> },
    #[error("dfa nondeterministic: edges to `{to_a}` and `{to_b}` from `{state}` both fire on {symbol:?}")]
    Nondeterministic {
        state: String,
        symbol: Vec<String>,
        to_a: String,
        to_b: String,
    },
    #[error("accepting state `{state}` is not absorbing: {symbol:?} leaves the accepting set")]
    NotAbsorbing { state: String, symbol: Vec<String> },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaEdgeDoc {
    pub from: String,
    pub guard: String,
    pub to: String,
}

/// On-disk DFA schema: `states`, `initial`, `accepting`, `edges`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaDoc {
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub edges: Vec<DfaEdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfaEdge {
    pub from: u32,
    pub guard: Guard,
    pub to: u32,
}

/// A validated specification DFA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    state_ids: Vec<String>,
    initial: u32,
    accepting: BTreeSet<u32>,
    edges: Vec<DfaEdge>,
    /// Edge indices grouped by source state.
    out: Vec<Vec<usize>>,
    /// Propositions referenced by any guard, in first-use order.
    alphabet: Vec<String>,
}

impl Dfa {
    /// Builds and validates a DFA from parts. Checks determinism,
    /// completeness, and that accepting states are absorbing.
    pub fn new(
        state_ids: Vec<String>,
        initial: u32,
        accepting: BTreeSet<u32>,
        edges: Vec<DfaEdge>,
    ) -> Result<Dfa, DfaError> {
        let mut out = vec![Vec::new(); state_ids.len()];
        let mut alphabet: Vec<String> = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            out[e.from as usize].push(i);
            for p in e.guard.props() {
                if !alphabet.contains(&p) {
                    alphabet.push(p);
                }
            }
        }
        let dfa = Dfa {
            state_ids,
            initial,
            accepting,
            edges,
            out,
            alphabet,
        };
        dfa.validate()?;
        Ok(dfa)
    }

    fn validate(&self) -> Result<(), DfaError> {
        if self.alphabet.len() > MAX_ALPHABET_PROPS {
            return Err(DfaError::AlphabetTooLarge(self.alphabet.len()));
        }
        for p in &self.alphabet {
            if p == DECOY_AP {
                // find a witnessing edge for the message
                let e = self
                    .edges
                    .iter()
                    .find(|e| e.guard.props().iter().any(|q| q == DECOY_AP))
                    .expect("witness edge");
                return Err(DfaError::ReservedProposition {
                    from: self.state_ids[e.from as usize].clone(),
                    to: self.state_ids[e.to as usize].clone(),
                });
            }
        }
        let n_symbols = 1usize << self.alphabet.len();
        for q in 0..self.state_ids.len() {
            for mask in 0..n_symbols {
                let symbol = self.symbol(mask);
                let mut fired: Option<usize> = None;
                for &ei in &self.out[q] {
                    if self.edges[ei].guard.eval(&symbol) {
                        if let Some(prev) = fired {
                            return Err(DfaError::Nondeterministic {
                                state: self.state_ids[q].clone(),
                                symbol: symbol.into_iter().collect(),
                                to_a: self.state_ids[self.edges[prev].to as usize].clone(),
                                to_b: self.state_ids[self.edges[ei].to as usize].clone(),
                            });
                        }
                        fired = Some(ei);
                    }
                }
                let Some(ei) = fired else {
                    return Err(DfaError::Incomplete {
                        state: self.state_ids[q].clone(),
                        symbol: symbol.into_iter().collect(),
                    });
                };
                if self.accepting.contains(&(q as u32))
                    && !self.accepting.contains(&self.edges[ei].to)
                {
                    return Err(DfaError::NotAbsorbing {
                        state: self.state_ids[q].clone(),
                        symbol: symbol.into_iter().collect(),
                    });
                }
            }
        }
        Ok(())
    }

    fn symbol(&self, mask: usize) -> BTreeSet<String> {
        self.alphabet
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| p.clone())
            .collect()
    }

    pub fn n_states(&self) -> usize {
        self.state_ids.len()
    }

    pub fn state_ids(&self) -> &[String] {
        &self.state_ids
    }

    pub fn state_id(&self, q: u32) -> &str {
        &self.state_ids[q as usize]
    }

    pub fn state_idx(&self, id: &str) -> Result<u32, DfaError> {
        self.state_ids
            .iter()
            .position(|s| s == id)
            .map(|i| i as u32)
            .ok_or_else(|| DfaError::UnknownState(id.to_string()))
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<u32> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: u32) -> bool {
        self.accepting.contains(&q)
    }

    pub fn edges(&self) -> &[DfaEdge] {
        &self.edges
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// The unique successor of `q` under the label set `sigma`.
    pub fn step(&self, q: u32, sigma: &BTreeSet<String>) -> Result<u32, DfaError> {
        let mut fired: Option<usize> = None;
        for &ei in &self.out[q as usize] {
            if self.edges[ei].guard.eval(sigma) {
                if let Some(prev) = fired {
                    return Err(DfaError::Nondeterministic {
                        state: self.state_ids[q as usize].clone(),
                        symbol: sigma.iter().cloned().collect(),
                        to_a: self.state_ids[self.edges[prev].to as usize].clone(),
                        to_b: self.state_ids[self.edges[ei].to as usize].clone(),
                    });
                }
                fired = Some(ei);
            }
        }
        match fired {
            Some(ei) => Ok(self.edges[ei].to),
            None => Err(DfaError::Incomplete {
                state: self.state_ids[q as usize].clone(),
                symbol: sigma.iter().cloned().collect(),
            }),
        }
    }

    /// Runs the DFA over a word; true when some prefix reaches an accepting
    /// state.
    pub fn accepts_prefix(&self, word: &[BTreeSet<String>]) -> Result<bool, DfaError> {
        let mut q = self.initial;
        if self.is_accepting(q) {
            return Ok(true);
        }
        for sigma in word {
            q = self.step(q, sigma)?;
            if self.is_accepting(q) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn to_doc(&self) -> DfaDoc {
        DfaDoc {
            states: self.state_ids.clone(),
            initial: self.state_ids[self.initial as usize].clone(),
            accepting: self
                .accepting
                .iter()
                .map(|&q| self.state_ids[q as usize].clone())
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| DfaEdgeDoc {
                    from: self.state_ids[e.from as usize].clone(),
                    guard: e.guard.to_string(),
                    to: self.state_ids[e.to as usize].clone(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &DfaDoc) -> Result<Dfa, DfaError> {
        let mut index = BTreeMap::new();
        for (i, id) in doc.states.iter().enumerate() {
            if index.insert(id.clone(), i as u32).is_some() {
                return Err(DfaError::DuplicateState(id.clone()));
            }
        }
        let lookup = |id: &str| -> Result<u32, DfaError> {
            index
                .get(id)
                .copied()
                .ok_or_else(|| DfaError::UnknownState(id.to_string()))
        };
        let initial = lookup(&doc.initial)?;
        let accepting = doc
            .accepting
            .iter()
            .map(|id| lookup(id))
            .collect::<Result<BTreeSet<u32>, _>>()?;
        let edges = doc
            .edges
            .iter()
            .map(|e| {
                let guard = parse_guard(&e.guard).map_err(|source| DfaError::Guard {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    source,
                })?;
                Ok(DfaEdge {
                    from: lookup(&e.from)?,
                    guard,
                    to: lookup(&e.to)?,
                })
            })
            .collect::<Result<Vec<_>, DfaError>>()?;
        Dfa::new(doc.states.clone(), initial, accepting, edges)
    }
}

/// Parses and validates a DFA document from JSON text.
pub fn load_dfa_str(text: &str) -> Result<Dfa, DfaError> {
    let doc: DfaDoc = serde_json::from_str(text).map_err(|e| DfaError::Document(e.to_string()))?;
    Dfa::from_doc(&doc)
}

/// Loads a DFA document from a file.
pub fn load_dfa(path: &Path) -> Result<Dfa, DfaError> {
    let text = std::fs::read_to_string(path)?;
    load_dfa_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig2a() -> Dfa {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/fig2a-dfa.json");
        load_dfa(Path::new(path)).expect("bundled dfa loads")
    }

    fn sigma(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn fig2a_loads_and_steps() {
        let dfa = fig2a();
        assert_eq!(dfa.n_states(), 4);
        assert_eq!(dfa.accepting().len(), 1);
        assert!(dfa.is_accepting(dfa.state_idx("3").unwrap()));

        let q0 = dfa.state_idx("0").unwrap();
        let q1 = dfa.state_idx("1").unwrap();
        let q3 = dfa.state_idx("3").unwrap();
        assert_eq!(dfa.step(q0, &sigma(&["f"])).unwrap(), q1);
        assert_eq!(dfa.step(q3, &sigma(&["g"])).unwrap(), q3);
        assert_eq!(dfa.step(q0, &sigma(&[])).unwrap(), q0);
        // perceived labels never contain decoy, but stepping on a raw label
        // set is still well-defined
        assert_eq!(dfa.step(q0, &sigma(&["n"])).unwrap(), q3);
    }

    #[test]
    fn incomplete_dfa_rejected_with_witness() {
        let doc = r#"{
            "states": ["0", "1"],
            "initial": "0",
            "accepting": ["1"],
            "edges": [
                {"from": "0", "guard": "f", "to": "1"},
                {"from": "1", "guard": "true", "to": "1"}
            ]
        }"#;
        match load_dfa_str(doc) {
            Err(DfaError::Incomplete { state, symbol }) => {
                assert_eq!(state, "0");
                assert!(symbol.is_empty(), "witness should be the empty label set");
            }
            other => panic!("expected incompleteness error, got {other:?}"),
        }
    }

    #[test]
    fn nondeterministic_dfa_rejected_with_witness() {
        // both `f` and `g` fire on {f, g}
        let doc = r#"{
            "states": ["0", "1", "2"],
            "initial": "0",
            "accepting": [],
            "edges": [
                {"from": "0", "guard": "f", "to": "1"},
                {"from": "0", "guard": "g", "to": "2"},
                {"from": "0", "guard": "!f & !g", "to": "0"},
                {"from": "1", "guard": "true", "to": "1"},
                {"from": "2", "guard": "true", "to": "2"}
            ]
        }"#;
        match load_dfa_str(doc) {
            Err(DfaError::Nondeterministic { state, symbol, .. }) => {
                assert_eq!(state, "0");
                assert_eq!(symbol, vec!["f".to_string(), "g".to_string()]);
            }
            other => panic!("expected nondeterminism error, got {other:?}"),
        }
    }

    #[test]
    fn non_absorbing_accepting_rejected() {
        let doc = r#"{
            "states": ["0", "1"],
            "initial": "0",
            "accepting": ["1"],
            "edges": [
                {"from": "0", "guard": "true", "to": "1"},
                {"from": "1", "guard": "p", "to": "1"},
                {"from": "1", "guard": "!p", "to": "0"}
            ]
        }"#;
        assert!(matches!(
            load_dfa_str(doc),
            Err(DfaError::NotAbsorbing { .. })
        ));
    }

    #[test]
    fn decoy_in_guard_rejected() {
        let doc = r#"{
            "states": ["0"],
            "initial": "0",
            "accepting": [],
            "edges": [{"from": "0", "guard": "decoy | !decoy", "to": "0"}]
        }"#;
        assert!(matches!(
            load_dfa_str(doc),
            Err(DfaError::ReservedProposition { .. })
        ));
    }

    #[test]
    fn doc_round_trip() {
        let dfa = fig2a();
        let doc = dfa.to_doc();
        let reloaded = Dfa::from_doc(&doc).unwrap();
        assert_eq!(dfa, reloaded);
    }
}
