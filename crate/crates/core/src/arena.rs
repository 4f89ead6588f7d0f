//! Two-player turn-based deterministic game arenas.
//!
//! An arena is a labeled transition system shared by both players: the
//! defender (P1) moves at his states, the attacker (P2) at hers, and every
//! transition is deterministic. Labels over atomic propositions drive the
//! specification automaton downstream. The reserved proposition `decoy`
//! marks trap states in the ground-truth labeling; the attacker's perceived
//! labeling strips it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Reserved proposition marking decoy states. Invisible to the attacker.
pub const DECOY_AP: &str = "decoy";

/// Which player controls a state or an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Player {
    /// The defender. Drawn as a circle in the bundled examples.
    P1,
    /// The attacker. Drawn as a square in the bundled examples.
    P2,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }

    fn from_doc(owner: u8) -> Result<Player, ArenaError> {
        match owner {
            1 => Ok(Player::P1),
            2 => Ok(Player::P2),
            other => Err(ArenaError::BadOwner(other)),
        }
    }

    fn to_doc(self) -> u8 {
        match self {
            Player::P1 => 1,
            Player::P2 => 2,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::P1 => f.write_str("P1"),
            Player::P2 => f.write_str("P2"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ArenaError {
    #[error("invalid arena document: {0}")]
    Document(String),
    #[error("state owner must be 1 or 2, got {0}")]
    BadOwner(u8),
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("duplicate action id `{0}`")]
    DuplicateAction(String),
    #[error("duplicate proposition `{0}`")]
    DuplicateAp(String),
    #[error("unknown state id `{0}`")]
    UnknownState(String),
    #[error("unknown action id `{0}`")]
    UnknownAction(String),
    #[error("state `{state}` labeled with `{ap}` which is not in the proposition set")]
    UnknownAp { state: String, ap: String },
    #[error("duplicate transition for (`{state}`, `{action}`)")]
    DuplicateTransition { state: String, action: String },
    #[error("owner mismatch: state `{state}` is {state_owner} but action `{action}` is {action_owner}")]
    OwnerMismatch {
        state: String,
        state_owner: Player,
        action: String,
        action_owner: Player,
    },
    #[error("dead-end state `{0}`: no transition defined for its owner's actions")]
    DeadEnd(String),
    #[error("decoy placement at `{0}` requires `decoy` in the proposition set")]
    DecoyNotDeclared(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Document model (the on-disk schema)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: String,
    pub owner: u8,
    #[serde(default)]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionDoc {
    pub id: String,
    pub owner: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionDoc {
    pub from: String,
    pub action: String,
    pub to: String,
}

/// On-disk arena schema: `aps`, `states`, `actions`, `transitions`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArenaDoc {
    pub aps: Vec<String>,
    pub states: Vec<StateDoc>,
    pub actions: Vec<ActionDoc>,
    pub transitions: Vec<TransitionDoc>,
}

// ---------------------------------------------------------------------------
// Arena
// ---------------------------------------------------------------------------

/// A validated game arena. Immutable after construction; id ordering follows
/// the source document, which fixes every downstream tie-break.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arena {
    aps: Vec<String>,
    state_ids: Vec<String>,
    owners: Vec<Player>,
    /// Ground-truth labels as indices into `aps`.
    labels: Vec<BTreeSet<u32>>,
    action_ids: Vec<String>,
    action_owners: Vec<Player>,
    /// Per state: (action index, successor state index), sorted by action.
    moves: Vec<Vec<(u32, u32)>>,
    state_index: BTreeMap<String, u32>,
    action_index: BTreeMap<String, u32>,
}

impl Arena {
    /// Validates a document and compiles it into an arena.
    pub fn from_doc(doc: &ArenaDoc) -> Result<Arena, ArenaError> {
        let mut ap_index: BTreeMap<&str, u32> = BTreeMap::new();
        for (i, ap) in doc.aps.iter().enumerate() {
            if ap_index.insert(ap, i as u32).is_some() {
                return Err(ArenaError::DuplicateAp(ap.clone()));
            }
        }

        let mut state_index = BTreeMap::new();
        let mut owners = Vec::with_capacity(doc.states.len());
        let mut labels = Vec::with_capacity(doc.states.len());
        for (i, s) in doc.states.iter().enumerate() {
            if state_index.insert(s.id.clone(), i as u32).is_some() {
                return Err(ArenaError::DuplicateState(s.id.clone()));
            }
            owners.push(Player::from_doc(s.owner)?);
            let mut set = BTreeSet::new();
            for ap in &s.labels {
                let idx = ap_index.get(ap.as_str()).ok_or_else(|| ArenaError::UnknownAp {
                    state: s.id.clone(),
                    ap: ap.clone(),
                })?;
                set.insert(*idx);
            }
            labels.push(set);
        }

        let mut action_index = BTreeMap::new();
        let mut action_owners = Vec::with_capacity(doc.actions.len());
        for (i, a) in doc.actions.iter().enumerate() {
            if action_index.insert(a.id.clone(), i as u32).is_some() {
                return Err(ArenaError::DuplicateAction(a.id.clone()));
            }
            action_owners.push(Player::from_doc(a.owner)?);
        }

        let mut moves: Vec<Vec<(u32, u32)>> = vec![Vec::new(); doc.states.len()];
        let mut seen = BTreeSet::new();
        for t in &doc.transitions {
            let from = *state_index
                .get(&t.from)
                .ok_or_else(|| ArenaError::UnknownState(t.from.clone()))?;
            let action = *action_index
                .get(&t.action)
                .ok_or_else(|| ArenaError::UnknownAction(t.action.clone()))?;
            let to = *state_index
                .get(&t.to)
                .ok_or_else(|| ArenaError::UnknownState(t.to.clone()))?;
            if owners[from as usize] != action_owners[action as usize] {
                return Err(ArenaError::OwnerMismatch {
                    state: t.from.clone(),
                    state_owner: owners[from as usize],
                    action: t.action.clone(),
                    action_owner: action_owners[action as usize],
                });
            }
            if !seen.insert((from, action)) {
                return Err(ArenaError::DuplicateTransition {
                    state: t.from.clone(),
                    action: t.action.clone(),
                });
            }
            moves[from as usize].push((action, to));
        }
        for row in &mut moves {
            row.sort_unstable();
        }
        for (i, row) in moves.iter().enumerate() {
            if row.is_empty() {
                return Err(ArenaError::DeadEnd(doc.states[i].id.clone()));
            }
        }

        Ok(Arena {
            aps: doc.aps.clone(),
            state_ids: doc.states.iter().map(|s| s.id.clone()).collect(),
            owners,
            labels,
            action_ids: doc.actions.iter().map(|a| a.id.clone()).collect(),
            action_owners,
            moves,
            state_index,
            action_index,
        })
    }

    /// Serializes back to the document schema. Reloading the result yields an
    /// identical arena.
    pub fn to_doc(&self) -> ArenaDoc {
        ArenaDoc {
            aps: self.aps.clone(),
            states: self
                .state_ids
                .iter()
                .enumerate()
                .map(|(i, id)| StateDoc {
                    id: id.clone(),
                    owner: self.owners[i].to_doc(),
                    labels: self.labels[i].iter().map(|&a| self.aps[a as usize].clone()).collect(),
                })
                .collect(),
            actions: self
                .action_ids
                .iter()
                .enumerate()
                .map(|(i, id)| ActionDoc {
                    id: id.clone(),
                    owner: self.action_owners[i].to_doc(),
                })
                .collect(),
            transitions: self
                .moves
                .iter()
                .enumerate()
                .flat_map(|(s, row)| {
                    row.iter().map(move |&(a, to)| (s as u32, a, to))
                })
                .map(|(s, a, to)| TransitionDoc {
                    from: self.state_ids[s as usize].clone(),
                    action: self.action_ids[a as usize].clone(),
                    to: self.state_ids[to as usize].clone(),
                })
                .collect(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.state_ids.len()
    }

    pub fn n_actions(&self) -> usize {
        self.action_ids.len()
    }

    pub fn n_transitions(&self) -> usize {
        self.moves.iter().map(Vec::len).sum()
    }

    pub fn aps(&self) -> &[String] {
        &self.aps
    }

    pub fn state_ids(&self) -> &[String] {
        &self.state_ids
    }

    pub fn action_ids(&self) -> &[String] {
        &self.action_ids
    }

    pub fn state_id(&self, s: u32) -> &str {
        &self.state_ids[s as usize]
    }

    pub fn action_id(&self, a: u32) -> &str {
        &self.action_ids[a as usize]
    }

    pub fn state_idx(&self, id: &str) -> Result<u32, ArenaError> {
        self.state_index
            .get(id)
            .copied()
            .ok_or_else(|| ArenaError::UnknownState(id.to_string()))
    }

    pub fn owner(&self, s: u32) -> Player {
        self.owners[s as usize]
    }

    pub fn action_owner(&self, a: u32) -> Player {
        self.action_owners[a as usize]
    }

    /// Defined transitions at `s`, sorted by action index.
    pub fn moves_from(&self, s: u32) -> &[(u32, u32)] {
        &self.moves[s as usize]
    }

    /// Ground-truth label set of `s`, including `decoy` where placed.
    pub fn label(&self, s: u32) -> BTreeSet<String> {
        self.labels[s as usize]
            .iter()
            .map(|&a| self.aps[a as usize].clone())
            .collect()
    }

    /// The attacker's perceived label set: `L2(s) = L(s) \ {decoy}`.
    pub fn perceived_label_idx(&self, s: u32) -> BTreeSet<String> {
        let mut set = self.label(s);
        set.remove(DECOY_AP);
        set
    }

    /// States whose ground-truth label contains `decoy`, in document order.
    pub fn decoy_states(&self) -> Vec<u32> {
        let decoy = self.aps.iter().position(|a| a == DECOY_AP).map(|i| i as u32);
        match decoy {
            None => Vec::new(),
            Some(d) => (0..self.n_states() as u32)
                .filter(|&s| self.labels[s as usize].contains(&d))
                .collect(),
        }
    }

    /// States with no incoming transition from another state. These are the
    /// entry points from which the trimmed (figure-visible) product region is
    /// grown; when the arena has none, every state counts as an entry.
    pub fn entry_states(&self) -> Vec<u32> {
        let mut has_incoming = vec![false; self.n_states()];
        for (s, row) in self.moves.iter().enumerate() {
            for &(_, to) in row {
                if to as usize != s {
                    has_incoming[to as usize] = true;
                }
            }
        }
        let entries: Vec<u32> = (0..self.n_states() as u32)
            .filter(|&s| !has_incoming[s as usize])
            .collect();
        if entries.is_empty() {
            (0..self.n_states() as u32).collect()
        } else {
            entries
        }
    }
}

/// The attacker's view of an arena's labeling: the base arena with the
/// `decoy` proposition stripped from every label.
#[derive(Debug, Clone, Copy)]
pub struct PerceptualLabeling<'a> {
    base: &'a Arena,
}

impl<'a> PerceptualLabeling<'a> {
    pub fn new(base: &'a Arena) -> Self {
        PerceptualLabeling { base }
    }

    /// The proposition removed from the ground truth: exactly `{decoy}`.
    pub fn stripped(&self) -> &'static str {
        DECOY_AP
    }

    pub fn label(&self, s: u32) -> BTreeSet<String> {
        self.base.perceived_label_idx(s)
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses and validates an arena document from JSON text.
pub fn load_arena_str(text: &str) -> Result<Arena, ArenaError> {
    let doc: ArenaDoc =
        serde_json::from_str(text).map_err(|e| ArenaError::Document(e.to_string()))?;
    Arena::from_doc(&doc)
}

/// Loads an arena document from a file.
pub fn load_arena(path: &Path) -> Result<Arena, ArenaError> {
    let text = std::fs::read_to_string(path)?;
    load_arena_str(&text)
}

/// The attacker's perceived label of `s`: the ground truth minus `decoy`.
pub fn perceived_label(arena: &Arena, s: &str) -> Result<BTreeSet<String>, ArenaError> {
    let idx = arena.state_idx(s)?;
    Ok(arena.perceived_label_idx(idx))
}

/// Returns a copy of `arena` whose labels add `decoy` at exactly the states
/// of `decoys`; all other fields are unchanged.
pub fn with_decoys(arena: &Arena, decoys: &BTreeSet<String>) -> Result<Arena, ArenaError> {
    let mut out = arena.clone();
    if decoys.is_empty() {
        return Ok(out);
    }
    let decoy_idx = arena
        .aps
        .iter()
        .position(|a| a == DECOY_AP)
        .map(|i| i as u32)
        .ok_or_else(|| ArenaError::DecoyNotDeclared(decoys.iter().next().unwrap().clone()))?;
    for id in decoys {
        let s = arena.state_idx(id)?;
        out.labels[s as usize].insert(decoy_idx);
    }
    Ok(out)
}
