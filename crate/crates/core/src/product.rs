//! Product and hypergame construction.
//!
//! The product of an arena and a specification DFA tracks the attacker's
//! progress toward her objective. Because the DFA is driven by the
//! *perceived* labeling (decoys stripped), the product graph is identical
//! for every decoy placement; only the decoy target set varies. On top of
//! the product sit the attacker's perceptual winning regions, the pruning to
//! subjectively rationalizable actions, and the defender's deceptive
//! reachability game in which the attacker's goal states become sinks.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::arena::{with_decoys, Arena, ArenaError, Player, DECOY_AP};
use crate::logic::{Dfa, DfaError};
use crate::solver::{GameView, Region};

#[derive(Debug, thiserror::Error)]
pub enum ProductError {
    #[error("dfa references proposition `{0}` which the arena does not declare")]
    PropositionMismatch(String),
    #[error("node {0} is not a state of this game")]
    NodeOutOfRange(u32),
    #[error("region references node {0} outside the game")]
    RegionOutsideGame(u32),
    #[error("state pair ({state}, {dfa_state}) is not a state of this game")]
    UnknownPair { state: String, dfa_state: String },
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

/// An arena state paired with a DFA state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductState {
    pub s: u32,
    pub q: u32,
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.s, self.q)
    }
}

/// The hypergame on graph: the attacker's perceptual product game plus the
/// defender-only decoy target set `FD`.
#[derive(Debug, Clone)]
pub struct ProductGame {
    arena: Arena,
    dfa: Dfa,
    nq: u32,
    /// Per node: (arena action index, successor node), sorted by action.
    moves: Vec<Vec<(u32, u32)>>,
    /// Nodes whose DFA component is accepting — the attacker's goal.
    f2: BTreeSet<u32>,
    /// Nodes whose arena state carries `decoy` — the defender's goal.
    fd: BTreeSet<u32>,
    /// Arena state `s` starts the play at `init[s]`.
    init: Vec<u32>,
}

impl ProductGame {
    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn n_nodes(&self) -> usize {
        self.arena.n_states() * self.nq as usize
    }

    pub fn node(&self, ps: ProductState) -> u32 {
        ps.s * self.nq + ps.q
    }

    pub fn pair(&self, node: u32) -> ProductState {
        ProductState {
            s: node / self.nq,
            q: node % self.nq,
        }
    }

    /// Human-readable "(state, dfa-state)" id pair for a node.
    pub fn node_ids(&self, node: u32) -> (String, String) {
        let ps = self.pair(node);
        (
            self.arena.state_id(ps.s).to_string(),
            self.dfa.state_id(ps.q).to_string(),
        )
    }

    pub fn node_by_ids(&self, state: &str, dfa_state: &str) -> Result<u32, ProductError> {
        let s = self
            .arena
            .state_idx(state)
            .map_err(|_| ProductError::UnknownPair {
                state: state.to_string(),
                dfa_state: dfa_state.to_string(),
            })?;
        let q = self
            .dfa
            .state_idx(dfa_state)
            .map_err(|_| ProductError::UnknownPair {
                state: state.to_string(),
                dfa_state: dfa_state.to_string(),
            })?;
        Ok(self.node(ProductState { s, q }))
    }

    pub fn owner(&self, node: u32) -> Player {
        self.arena.owner(self.pair(node).s)
    }

    pub fn moves_from(&self, node: u32) -> &[(u32, u32)] {
        &self.moves[node as usize]
    }

    pub fn moves_table(&self) -> &[Vec<(u32, u32)>] {
        &self.moves
    }

    pub fn f2(&self) -> &BTreeSet<u32> {
        &self.f2
    }

    pub fn fd(&self) -> &BTreeSet<u32> {
        &self.fd
    }

    /// The product node from which a play starting at arena state `s`
    /// begins: `(s, δ(ι, L2(s)))`.
    pub fn initial_node(&self, s: u32) -> u32 {
        self.init[s as usize]
    }

    /// The view in which the attacker is the reacher of her goal set.
    pub fn attacker_view(&self) -> GameView<'_> {
        let n = self.n_nodes();
        let mut reacher_owned = vec![false; n];
        for v in 0..n {
            reacher_owned[v] = self.owner(v as u32) == Player::P2;
        }
        GameView {
            in_game: vec![true; n],
            reacher_owned,
            moves: &self.moves,
            target: self.f2.clone(),
        }
    }

    /// The figure-visible node set used by trimmed counting and exports:
    /// the forward closure of the initializations of the arena's entry
    /// states, minus terminal nodes that are already decided against the
    /// attacker (all arena moves self-loop and the DFA component is not
    /// accepting). Independent of the decoy placement.
    pub fn visible_nodes(&self) -> BTreeSet<u32> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for s in self.arena.entry_states() {
            let v = self.init[s as usize];
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &(_, w) in &self.moves[v as usize] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.retain(|&v| {
            let ps = self.pair(v);
            if self.dfa.is_accepting(ps.q) {
                return true;
            }
            self.arena.moves_from(ps.s).iter().any(|&(_, to)| to != ps.s)
        });
        seen
    }

    /// Renders a node set as sorted (state, dfa-state) id pairs.
    pub fn region_ids(&self, nodes: &BTreeSet<u32>) -> Vec<(String, String)> {
        nodes.iter().map(|&v| self.node_ids(v)).collect()
    }
}

/// Builds the hypergame on graph for a decoy placement `decoys`.
///
/// The transition structure is driven by perceived labels, so it is the same
/// for every placement; `fd` is the only component that varies.
pub fn build_hypergame(
    arena: &Arena,
    dfa: &Dfa,
    decoys: &BTreeSet<String>,
) -> Result<ProductGame, ProductError> {
    for p in dfa.alphabet() {
        if !arena.aps().iter().any(|a| a == p) {
            return Err(ProductError::PropositionMismatch(p.clone()));
        }
        if p == DECOY_AP {
            return Err(ProductError::PropositionMismatch(p.clone()));
        }
    }
    let truth = with_decoys(arena, decoys)?;
    let ns = truth.n_states();
    let nq = dfa.n_states();

    let perceived: Vec<BTreeSet<String>> = (0..ns as u32)
        .map(|s| truth.perceived_label_idx(s))
        .collect();
    // DFA successor for every (dfa state, entered arena state)
    let mut step = vec![vec![0u32; ns]; nq];
    for q in 0..nq as u32 {
        for s in 0..ns {
            step[q as usize][s] = dfa.step(q, &perceived[s])?;
        }
    }

    let n_nodes = ns * nq;
    let mut moves: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_nodes];
    let mut f2 = BTreeSet::new();
    let mut fd = BTreeSet::new();
    for s in 0..ns as u32 {
        let is_decoy = truth.label(s).contains(DECOY_AP);
        for q in 0..nq as u32 {
            let node = s * nq as u32 + q;
            if dfa.is_accepting(q) {
                f2.insert(node);
            }
            if is_decoy {
                fd.insert(node);
            }
            moves[node as usize] = truth
                .moves_from(s)
                .iter()
                .map(|&(a, s2)| (a, s2 * nq as u32 + step[q as usize][s2 as usize]))
                .collect();
        }
    }
    let init = (0..ns)
        .map(|s| s as u32 * nq as u32 + step[dfa.initial() as usize][s])
        .collect();

    Ok(ProductGame {
        arena: truth,
        dfa: dfa.clone(),
        nq: nq as u32,
        moves,
        f2,
        fd,
        init,
    })
}

/// Subjectively rationalizable actions of `player` at `node`, given that
/// player's own perceived winning region: inside the region, exactly the
/// actions that stay in it; at losing states, every defined action.
pub fn sr_actions(
    pg: &ProductGame,
    win_player: &Region,
    node: u32,
    player: Player,
) -> Result<Vec<u32>, ProductError> {
    if node as usize >= pg.n_nodes() {
        return Err(ProductError::NodeOutOfRange(node));
    }
    if pg.owner(node) != player {
        // no action of this player is defined here
        return Ok(Vec::new());
    }
    let moves = pg.moves_from(node);
    if win_player.contains(node) {
        Ok(moves
            .iter()
            .filter(|&&(_, w)| win_player.contains(w))
            .map(|&(a, _)| a)
            .collect())
    } else {
        Ok(moves.iter().map(|&(a, _)| a).collect())
    }
}

/// The defender's deceptive reachability game: the hypergame restricted to
/// the attacker's perceptual winning region, transitions pruned to
/// subjectively rationalizable actions, and attacker-goal states turned into
/// all-action self-loop sinks.
#[derive(Debug, Clone)]
pub struct DeceptiveGame<'p> {
    pg: &'p ProductGame,
    nodes: BTreeSet<u32>,
    moves: Vec<Vec<(u32, u32)>>,
    sinks: BTreeSet<u32>,
    targets: BTreeSet<u32>,
}

impl<'p> DeceptiveGame<'p> {
    pub fn product(&self) -> &'p ProductGame {
        self.pg
    }

    /// Game nodes: the attacker's perceptual winning region.
    pub fn nodes(&self) -> &BTreeSet<u32> {
        &self.nodes
    }

    /// The pruned transition table (empty rows outside the game).
    pub fn moves_table(&self) -> &[Vec<(u32, u32)>] {
        &self.moves
    }

    pub fn moves_from(&self, node: u32) -> &[(u32, u32)] {
        &self.moves[node as usize]
    }

    /// Attacker-goal nodes kept as self-loop sinks.
    pub fn sinks(&self) -> &BTreeSet<u32> {
        &self.sinks
    }

    /// The defender's reachability target: decoy nodes inside the game,
    /// excluding sinks (a decoy the attacker reaches only together with her
    /// own goal protects nothing).
    pub fn targets(&self) -> &BTreeSet<u32> {
        &self.targets
    }

    /// The view in which the defender is the reacher of `target`.
    pub fn defender_view(&self, target: BTreeSet<u32>) -> GameView<'_> {
        let n = self.pg.n_nodes();
        let mut in_game = vec![false; n];
        let mut reacher_owned = vec![false; n];
        for &v in &self.nodes {
            in_game[v as usize] = true;
            reacher_owned[v as usize] = self.pg.owner(v) == Player::P1;
        }
        GameView {
            in_game,
            reacher_owned,
            moves: &self.moves,
            target,
        }
    }

    /// Decoy target nodes for a hypothetical placement on this game's
    /// graph: every in-game pairing of a placed state, minus sinks. Because
    /// the graph is placement-independent, this is exactly `FD ∩ Win₂² \
    /// sinks` for that placement.
    pub fn decoy_targets(&self, decoys: &BTreeSet<String>) -> Result<BTreeSet<u32>, ProductError> {
        let mut out = BTreeSet::new();
        for id in decoys {
            let s = self.pg.arena.state_idx(id)?;
            for q in 0..self.pg.nq {
                let node = s * self.pg.nq + q;
                if self.nodes.contains(&node) && !self.sinks.contains(&node) {
                    out.insert(node);
                }
            }
        }
        Ok(out)
    }
}

/// Builds the deceptive reachability game from the hypergame and the
/// attacker's perceptual winning region.
pub fn build_deceptive_game<'p>(
    pg: &'p ProductGame,
    win2_2: &Region,
) -> Result<DeceptiveGame<'p>, ProductError> {
    let n = pg.n_nodes();
    for &v in &win2_2.members {
        if v as usize >= n {
            return Err(ProductError::RegionOutsideGame(v));
        }
    }
    let all: BTreeSet<u32> = (0..n as u32).collect();
    let win1_members: BTreeSet<u32> = all.difference(&win2_2.members).copied().collect();
    let win1 = Region::from_members(win1_members);

    let n_actions = pg.arena.n_actions() as u32;
    let mut moves: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    let mut sinks = BTreeSet::new();
    for &v in &win2_2.members {
        if pg.f2.contains(&v) {
            sinks.insert(v);
            moves[v as usize] = (0..n_actions).map(|a| (a, v)).collect();
            continue;
        }
        let owner = pg.owner(v);
        let win_owner = match owner {
            Player::P1 => &win1,
            Player::P2 => win2_2,
        };
        let sr = sr_actions(pg, win_owner, v, owner)?;
        moves[v as usize] = pg
            .moves_from(v)
            .iter()
            .filter(|&&(a, _)| sr.contains(&a))
            .copied()
            .collect();
        debug_assert!(
            moves[v as usize].iter().all(|&(_, w)| win2_2.contains(w)),
            "pruned transitions must stay in the attacker's winning region"
        );
    }
    let targets = pg
        .fd
        .iter()
        .copied()
        .filter(|v| win2_2.contains(*v) && !sinks.contains(v))
        .collect();

    Ok(DeceptiveGame {
        pg,
        nodes: win2_2.members.clone(),
        moves,
        sinks,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::load_arena;
    use crate::logic::load_dfa;
    use crate::solver::{attacker_perceptual_regions, dswin};
    use std::path::Path;

    fn fig_setup(decoys: &[&str]) -> ProductGame {
        let arena = load_arena(Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/fig1-arena.json"
        )))
        .unwrap();
        let dfa = load_dfa(Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/fig2a-dfa.json"
        )))
        .unwrap();
        let d: BTreeSet<String> = decoys.iter().map(|s| s.to_string()).collect();
        build_hypergame(&arena, &dfa, &d).unwrap()
    }

    fn ids(pg: &ProductGame, nodes: &BTreeSet<u32>) -> BTreeSet<(String, String)> {
        nodes.iter().map(|&v| pg.node_ids(v)).collect()
    }

    fn pairs(items: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        items
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn hypergame_shape_and_example_transition() {
        let pg = fig_setup(&["h", "k"]);
        assert_eq!(pg.n_nodes(), 60);

        // entering f from (c, 0) advances the DFA to "owe n"
        let c0 = pg.node_by_ids("c", "0").unwrap();
        let f1 = pg.node_by_ids("f", "1").unwrap();
        assert!(pg.moves_from(c0).iter().any(|&(_, w)| w == f1));

        // decoy pairings present among the figure-visible nodes
        let visible = pg.visible_nodes();
        let fd_visible: BTreeSet<u32> = pg.fd().intersection(&visible).copied().collect();
        assert_eq!(
            ids(&pg, &fd_visible),
            pairs(&[("h", "0"), ("k", "1"), ("k", "2")])
        );

        // no decoys, no targets
        let pg0 = fig_setup(&[]);
        assert!(pg0.fd().is_empty());
    }

    #[test]
    fn graph_stable_under_placement() {
        let pg_hk = fig_setup(&["h", "k"]);
        let pg_none = fig_setup(&[]);
        assert_eq!(pg_hk.moves, pg_none.moves);
        assert_eq!(pg_hk.f2, pg_none.f2);
        assert_eq!(pg_hk.init, pg_none.init);
        assert_ne!(pg_hk.fd, pg_none.fd);
    }

    #[test]
    fn visible_nodes_match_figure() {
        let pg = fig_setup(&["h", "k"]);
        let expected = pairs(&[
            ("a", "0"),
            ("b", "0"),
            ("c", "0"),
            ("d", "0"),
            ("e", "0"),
            ("f", "1"),
            ("g", "2"),
            ("h", "0"),
            ("i", "0"),
            ("j", "1"),
            ("k", "1"),
            ("k", "2"),
            ("l", "0"),
            ("m", "0"),
            ("n", "3"),
            ("o", "3"),
        ]);
        assert_eq!(ids(&pg, &pg.visible_nodes()), expected);
    }

    #[test]
    fn perceptual_regions_sizes() {
        // hand-solved attractor on the full 60-node product
        let pg = fig_setup(&["h", "k"]);
        let (win1, win2) = attacker_perceptual_regions(&pg).unwrap();
        assert_eq!(win2.len(), 41);
        assert_eq!(win1.len(), 19);
        for pair in [("a", "0"), ("b", "0"), ("o", "1"), ("n", "2")] {
            let v = pg.node_by_ids(pair.0, pair.1).unwrap();
            assert!(win1.contains(v), "{pair:?} should be defender-winning");
        }
    }

    #[test]
    fn sr_actions_examples() {
        let pg = fig_setup(&["h", "k"]);
        let (win1, win2) = attacker_perceptual_regions(&pg).unwrap();

        // the defender at (b, 0) is winning and must stay in his region
        let b0 = pg.node_by_ids("b", "0").unwrap();
        let sr = sr_actions(&pg, &win1, b0, Player::P1).unwrap();
        let b_to_a = pg.arena().action_ids().iter().position(|a| a == "b->a").unwrap() as u32;
        assert_eq!(sr, vec![b_to_a]);

        // the attacker at (c, 0) must not step into the defender's region
        let c0 = pg.node_by_ids("c", "0").unwrap();
        let sr = sr_actions(&pg, &win2, c0, Player::P2).unwrap();
        let names: Vec<&str> = sr
            .iter()
            .map(|&a| pg.arena().action_id(a))
            .collect();
        assert_eq!(names, vec!["c->f", "c->g", "c->h"]);

        // at a losing state every defined action is rationalizable: the
        // defender at (f, 1) is inside the attacker's region
        let f1 = pg.node_by_ids("f", "1").unwrap();
        assert!(!win1.contains(f1));
        let sr = sr_actions(&pg, &win1, f1, Player::P1).unwrap();
        assert_eq!(sr.len(), pg.moves_from(f1).len());
        assert_eq!(sr.len(), 2);

        // asking for the non-owner's actions yields nothing
        assert!(sr_actions(&pg, &win2, c0, Player::P1).unwrap().is_empty());
        assert!(matches!(
            sr_actions(&pg, &win2, 10_000, Player::P1),
            Err(ProductError::NodeOutOfRange(_))
        ));
    }

    #[test]
    fn deceptive_game_matches_figure() {
        let pg = fig_setup(&["h", "k"]);
        let (_, win2) = attacker_perceptual_regions(&pg).unwrap();
        let dg = build_deceptive_game(&pg, &win2).unwrap();

        // (a,0), (b,0) are gone; the visible remainder is the figure
        let visible = pg.visible_nodes();
        let dg_visible: BTreeSet<u32> = dg.nodes().intersection(&visible).copied().collect();
        assert_eq!(dg_visible.len(), 14);
        for pair in [("a", "0"), ("b", "0")] {
            let v = pg.node_by_ids(pair.0, pair.1).unwrap();
            assert!(!dg.nodes().contains(&v));
        }

        // the attacker's pruned choice at (c,0) no longer includes c->b
        let c0 = pg.node_by_ids("c", "0").unwrap();
        assert_eq!(dg.moves_from(c0).len(), 3);

        // sinks self-loop under every action
        let n3 = pg.node_by_ids("n", "3").unwrap();
        assert!(dg.sinks().contains(&n3));
        assert_eq!(dg.moves_from(n3).len(), pg.arena().n_actions());
        assert!(dg.moves_from(n3).iter().all(|&(_, w)| w == n3));

        // targets are the decoy pairings inside the game
        let targets = ids(&pg, dg.targets());
        assert!(targets.contains(&("h".to_string(), "0".to_string())));
        assert!(targets.contains(&("k".to_string(), "1".to_string())));

        // pruning soundness: every pruned edge exists in the product
        for &v in dg.nodes() {
            if dg.sinks().contains(&v) {
                continue;
            }
            for m in dg.moves_from(v) {
                assert!(pg.moves_from(v).contains(m));
            }
        }
    }

    #[test]
    fn empty_region_empty_game() {
        let pg = fig_setup(&[]);
        let dg = build_deceptive_game(&pg, &Region::default()).unwrap();
        assert!(dg.nodes().is_empty());
        assert!(dg.targets().is_empty());
        assert!(dswin(&dg).unwrap().is_empty());
    }

    #[test]
    fn region_outside_game_rejected() {
        let pg = fig_setup(&[]);
        let bad = Region::from_members([9_999u32].into());
        assert!(matches!(
            build_deceptive_game(&pg, &bad),
            Err(ProductError::RegionOutsideGame(_))
        ));
    }

    #[test]
    fn alphabet_mismatch_rejected() {
        let arena = crate::arena::load_arena_str(
            r#"{
                "aps": ["p"],
                "states": [{"id": "s", "owner": 2, "labels": ["p"]}],
                "actions": [{"id": "loop", "owner": 2}],
                "transitions": [{"from": "s", "action": "loop", "to": "s"}]
            }"#,
        )
        .unwrap();
        let dfa = crate::logic::load_dfa_str(
            r#"{
                "states": ["0", "1"],
                "initial": "0",
                "accepting": ["1"],
                "edges": [
                    {"from": "0", "guard": "q", "to": "1"},
                    {"from": "0", "guard": "!q", "to": "0"},
                    {"from": "1", "guard": "true", "to": "1"}
                ]
            }"#,
        )
        .unwrap();
        assert!(matches!(
            build_hypergame(&arena, &dfa, &BTreeSet::new()),
            Err(ProductError::PropositionMismatch(p)) if p == "q"
        ));
    }

    #[test]
    fn decoy_inside_goal_becomes_sink() {
        // x -> y -> z(self), and z satisfies the attacker's objective on
        // arrival; placing the only decoy at z protects nothing
        let arena = crate::arena::load_arena_str(
            r#"{
                "aps": ["p", "decoy"],
                "states": [
                    {"id": "x", "owner": 2, "labels": []},
                    {"id": "y", "owner": 1, "labels": []},
                    {"id": "z", "owner": 2, "labels": ["p"]}
                ],
                "actions": [
                    {"id": "go", "owner": 2},
                    {"id": "step", "owner": 1},
                    {"id": "stay", "owner": 2}
                ],
                "transitions": [
                    {"from": "x", "action": "go", "to": "y"},
                    {"from": "y", "action": "step", "to": "z"},
                    {"from": "z", "action": "stay", "to": "z"}
                ]
            }"#,
        )
        .unwrap();
        let phi = crate::logic::parse_scltl("F p").unwrap();
        let dfa = crate::logic::to_dfa(&phi, &["p".to_string()]).unwrap();
        let d: BTreeSet<String> = ["z".to_string()].into();
        let pg = build_hypergame(&arena, &dfa, &d).unwrap();
        let (_, win2) = attacker_perceptual_regions(&pg).unwrap();
        let dg = build_deceptive_game(&pg, &win2).unwrap();

        // the pairing that satisfies the objective is a sink, not a target
        for &v in pg.fd() {
            let q = pg.pair(v).q;
            if pg.dfa().is_accepting(q) && dg.nodes().contains(&v) {
                assert!(dg.sinks().contains(&v));
                assert!(!dg.targets().contains(&v));
            }
        }

        // brute-force trace enumeration: no play from any initialization
        // ever reaches a remaining target (they are unreachable pairings)
        let mut reach: BTreeSet<u32> = (0..arena.n_states() as u32)
            .map(|s| pg.initial_node(s))
            .collect();
        let mut queue: Vec<u32> = reach.iter().copied().collect();
        while let Some(v) = queue.pop() {
            for &(_, w) in pg.moves_from(v) {
                if reach.insert(w) {
                    queue.push(w);
                }
            }
        }
        assert!(reach.is_disjoint(dg.targets()));

        // so the protected region is empty on the visible game
        let won = dswin(&dg).unwrap();
        assert!(won.members.is_disjoint(&reach));
        assert!(won.members.is_disjoint(&pg.visible_nodes()));
    }
}
