//! Zero-sum reachability game solving.
//!
//! One attractor routine serves every role in the pipeline: the attacker's
//! perceptual winning region (reacher = P2 over the product game), and the
//! defender's deceptive sure-winning region (reacher = P1 over the pruned
//! deceptive game). The implementation is a worklist with per-state
//! outdegree counters — linear in state-action pairs — and records for each
//! attractor member the index of the first synchronous iterate containing
//! it, which drives strategy extraction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::product::{DeceptiveGame, ProductGame};
use crate::arena::Player;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("target node {0} is not part of the game view")]
    TargetOutsideGame(u32),
    #[error("move from {from} leads to {to}, which is outside the game view")]
    MoveOutsideGame { from: u32, to: u32 },
    #[error("avoider-owned node {0} has no defined action; the universal predecessor is meaningless")]
    AvoiderDeadEnd(u32),
    #[error("solver inconsistency: winning node {0} has no rank-decreasing action")]
    NoRankDecreasingAction(u32),
    #[error("solver inconsistency: avoider-winning node {0} has no action staying in its region")]
    NoSafeAction(u32),
}

/// Which side of the reachability objective a strategy serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Forces a visit to the target set.
    Reacher,
    /// Keeps the play outside the target set forever.
    Avoider,
}

/// A set of game nodes, with attractor ranks where applicable. A member's
/// level is the index of the first synchronous attractor iterate containing
/// it; target members have level 0, and every level-`i` member has a
/// one-step route into level `< i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Region {
    pub members: BTreeSet<u32>,
    pub levels: BTreeMap<u32, u32>,
}

impl Region {
    pub fn from_members(members: BTreeSet<u32>) -> Region {
        Region {
            members,
            levels: BTreeMap::new(),
        }
    }

    pub fn contains(&self, node: u32) -> bool {
        self.members.contains(&node)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A deterministic memoryless strategy: one chosen action per node.
#[derive(Debug, Clone)]
pub struct Strategy {
    pub role: Role,
    pub choice: BTreeMap<u32, u32>,
}

/// A role-parametric view of a reachability game. `reacher_owned` marks V1
/// (the states where the reacher picks the action); everything else in the
/// game is the avoider's. The same graph can be viewed with either player as
/// the reacher.
#[derive(Debug, Clone)]
pub struct GameView<'g> {
    pub in_game: Vec<bool>,
    pub reacher_owned: Vec<bool>,
    pub moves: &'g [Vec<(u32, u32)>],
    pub target: BTreeSet<u32>,
}

impl<'g> GameView<'g> {
    pub fn node_count(&self) -> usize {
        self.in_game.len()
    }

    fn validate(&self) -> Result<(), SolverError> {
        for &t in &self.target {
            if !self.in_game.get(t as usize).copied().unwrap_or(false) {
                return Err(SolverError::TargetOutsideGame(t));
            }
        }
        for v in 0..self.node_count() {
            if !self.in_game[v] {
                continue;
            }
            for &(_, w) in &self.moves[v] {
                if !self.in_game.get(w as usize).copied().unwrap_or(false) {
                    return Err(SolverError::MoveOutsideGame {
                        from: v as u32,
                        to: w as u32,
                    });
                }
            }
            if !self.reacher_owned[v] && self.moves[v].is_empty() {
                return Err(SolverError::AvoiderDeadEnd(v as u32));
            }
        }
        Ok(())
    }
}

/// Computes both players' sure-winning regions by attractor iteration.
///
/// Returns `(win_reacher, win_avoider)`; the two partition the game nodes,
/// which is exactly the determinacy of finite reachability games.
pub fn sure_win(view: &GameView) -> Result<(Region, Region), SolverError> {
    view.validate()?;
    let n = view.node_count();

    // reverse adjacency; an avoider node appears once per edge so the
    // counter semantics below are exact
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut pending: Vec<u32> = vec![0; n];
    for v in 0..n {
        if !view.in_game[v] {
            continue;
        }
        pending[v] = view.moves[v].len() as u32;
        for &(_, w) in &view.moves[v] {
            rev[w as usize].push(v as u32);
        }
    }

    const UNSET: u32 = u32::MAX;
    let mut level: Vec<u32> = vec![UNSET; n];
    let mut queue: VecDeque<u32> = VecDeque::new();
    for &t in &view.target {
        level[t as usize] = 0;
        queue.push_back(t);
    }

    while let Some(w) = queue.pop_front() {
        let next_level = level[w as usize] + 1;
        for &v in &rev[w as usize] {
            let vu = v as usize;
            if level[vu] != UNSET {
                if !view.reacher_owned[vu] {
                    pending[vu] = pending[vu].saturating_sub(1);
                }
                continue;
            }
            if view.reacher_owned[vu] {
                level[vu] = next_level;
                queue.push_back(v);
            } else {
                pending[vu] -= 1;
                if pending[vu] == 0 {
                    level[vu] = next_level;
                    queue.push_back(v);
                }
            }
        }
    }

    let mut win_reacher = Region::default();
    let mut win_avoider = Region::default();
    for v in 0..n {
        if !view.in_game[v] {
            continue;
        }
        if level[v] != UNSET {
            win_reacher.members.insert(v as u32);
            win_reacher.levels.insert(v as u32, level[v]);
        } else {
            win_avoider.members.insert(v as u32);
        }
    }
    Ok((win_reacher, win_avoider))
}

/// Extracts deterministic memoryless strategies from solved regions.
///
/// The reacher's choice at each winning node outside the target is the
/// action with the smallest successor rank (strictly below the node's own),
/// ties broken by action index; the avoider's choice at each of her winning
/// nodes is the first action staying inside her region.
pub fn extract_strategy(
    view: &GameView,
    win_reacher: &Region,
    win_avoider: &Region,
) -> Result<(Strategy, Strategy), SolverError> {
    let mut reacher = Strategy {
        role: Role::Reacher,
        choice: BTreeMap::new(),
    };
    for &v in &win_reacher.members {
        if !view.reacher_owned[v as usize] || view.target.contains(&v) {
            continue;
        }
        let my_level = win_reacher.levels[&v];
        let mut best: Option<(u32, u32)> = None;
        for &(a, w) in &view.moves[v as usize] {
            if let Some(&wl) = win_reacher.levels.get(&w) {
                if best.map_or(true, |(bl, _)| wl < bl) {
                    best = Some((wl, a));
                }
            }
        }
        match best {
            Some((wl, a)) if wl < my_level => {
                reacher.choice.insert(v, a);
            }
            _ => return Err(SolverError::NoRankDecreasingAction(v)),
        }
    }

    let mut avoider = Strategy {
        role: Role::Avoider,
        choice: BTreeMap::new(),
    };
    for &v in &win_avoider.members {
        if view.reacher_owned[v as usize] {
            continue;
        }
        let safe = view.moves[v as usize]
            .iter()
            .find(|&&(_, w)| win_avoider.members.contains(&w));
        match safe {
            Some(&(a, _)) => {
                avoider.choice.insert(v, a);
            }
            None => return Err(SolverError::NoSafeAction(v)),
        }
    }
    Ok((reacher, avoider))
}

/// The attacker's perceptual winning regions over her product game: P2 as
/// the reacher of `F2`, P1 as the avoider. Returns `(win1_2, win2_2)`.
pub fn attacker_perceptual_regions(pg: &ProductGame) -> Result<(Region, Region), SolverError> {
    let view = pg.attacker_view();
    let (win2, win1) = sure_win(&view)?;
    Ok((win1, win2))
}

/// The defender's deceptive sure-winning region: P1 as the reacher of the
/// decoy set inside the pruned deceptive game.
pub fn dswin(dg: &DeceptiveGame) -> Result<Region, SolverError> {
    dswin_with_target(dg, dg.targets())
}

/// Deceptive-game solve against an explicit target set (used by the
/// composition operator and the allocation loop).
pub fn dswin_with_target(dg: &DeceptiveGame, target: &BTreeSet<u32>) -> Result<Region, SolverError> {
    let view = dg.defender_view(target.clone());
    let (win, _) = sure_win(&view)?;
    Ok(win)
}

/// Extracts the defender's deceptive strategy on a solved deceptive game.
pub fn deceptive_strategy(dg: &DeceptiveGame, region: &Region) -> Result<Strategy, SolverError> {
    let view = dg.defender_view(dg.targets().clone());
    let complement: BTreeSet<u32> = dg
        .nodes()
        .iter()
        .copied()
        .filter(|v| !region.contains(*v))
        .collect();
    let (reacher, _) = extract_strategy(&view, region, &Region::from_members(complement))?;
    Ok(reacher)
}

// ---------------------------------------------------------------------------
// Adversarial traversal: the independent soundness check for strategies
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlayDefect {
    /// The play entered a sink (the attacker satisfied her objective).
    EntersSink,
    /// The play can cycle forever without touching the target.
    CycleWithoutTarget,
    /// The strategy has no choice at a node it is supposed to win from.
    MissingChoice,
}

/// A concrete bad play found by exhaustive traversal.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub play: Vec<u32>,
    pub defect: PlayDefect,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Unseen,
    OnStack,
    Good,
}

/// Exhaustively checks that from every node of `region`, every play that
/// follows `strategy` at reacher nodes and branches over all defined moves
/// at avoider nodes reaches `target` without first entering `sinks`. The
/// check is memoryless-exhaustive: cycle-freedom bounds every play by the
/// node count.
pub fn check_reach_under_strategy(
    view: &GameView,
    sinks: &BTreeSet<u32>,
    strategy: &Strategy,
    region: &Region,
) -> Result<(), Counterexample> {
    let n = view.node_count();
    let mut marks = vec![Mark::Unseen; n];

    fn visit(
        v: u32,
        view: &GameView,
        sinks: &BTreeSet<u32>,
        strategy: &Strategy,
        marks: &mut Vec<Mark>,
        play: &mut Vec<u32>,
    ) -> Result<(), Counterexample> {
        play.push(v);
        if view.target.contains(&v) {
            play.pop();
            return Ok(());
        }
        if sinks.contains(&v) {
            return Err(Counterexample {
                play: play.clone(),
                defect: PlayDefect::EntersSink,
            });
        }
        match marks[v as usize] {
            Mark::Good => {
                play.pop();
                return Ok(());
            }
            Mark::OnStack => {
                return Err(Counterexample {
                    play: play.clone(),
                    defect: PlayDefect::CycleWithoutTarget,
                })
            }
            Mark::Unseen => {}
        }
        marks[v as usize] = Mark::OnStack;
        if view.reacher_owned[v as usize] {
            let Some(&a) = strategy.choice.get(&v) else {
                return Err(Counterexample {
                    play: play.clone(),
                    defect: PlayDefect::MissingChoice,
                });
            };
            let Some(&(_, w)) = view.moves[v as usize].iter().find(|&&(b, _)| b == a) else {
                return Err(Counterexample {
                    play: play.clone(),
                    defect: PlayDefect::MissingChoice,
                });
            };
            visit(w, view, sinks, strategy, marks, play)?;
        } else {
            for &(_, w) in &view.moves[v as usize] {
                visit(w, view, sinks, strategy, marks, play)?;
            }
        }
        marks[v as usize] = Mark::Good;
        play.pop();
        Ok(())
    }

    for &v in &region.members {
        let mut play = Vec::new();
        visit(v, view, sinks, strategy, &mut marks, &mut play)?;
    }
    Ok(())
}

/// Owner-to-role helper: the view role of `player` when `reacher` reaches.
pub fn role_of(player: Player, reacher: Player) -> Role {
    if player == reacher {
        Role::Reacher
    } else {
        Role::Avoider
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A little builder for hand-made and random test games over dense
    /// nodes.
    pub(crate) struct TestGame {
        pub moves: Vec<Vec<(u32, u32)>>,
        pub reacher_owned: Vec<bool>,
    }

    impl TestGame {
        pub(crate) fn view(&self, target: &[u32]) -> GameView<'_> {
            GameView {
                in_game: vec![true; self.moves.len()],
                reacher_owned: self.reacher_owned.clone(),
                moves: &self.moves,
                target: target.iter().copied().collect(),
            }
        }
    }

    #[test]
    fn empty_target_and_full_target() {
        let g = TestGame {
            moves: vec![vec![(0, 1)], vec![(0, 0)]],
            reacher_owned: vec![true, false],
        };
        let (win_r, win_a) = sure_win(&g.view(&[])).unwrap();
        assert!(win_r.is_empty());
        assert_eq!(win_a.len(), 2);

        let (win_r, win_a) = sure_win(&g.view(&[0, 1])).unwrap();
        assert_eq!(win_r.len(), 2);
        assert!(win_a.is_empty());
        assert!(win_r.levels.values().all(|&l| l == 0));
    }

    #[test]
    fn empty_game_is_fine() {
        let moves: Vec<Vec<(u32, u32)>> = Vec::new();
        let view = GameView {
            in_game: Vec::new(),
            reacher_owned: Vec::new(),
            moves: &moves,
            target: BTreeSet::new(),
        };
        let (win_r, win_a) = sure_win(&view).unwrap();
        assert!(win_r.is_empty() && win_a.is_empty());
    }

    #[test]
    fn reacher_needs_one_route_avoider_needs_all() {
        // 0 (reacher) -> {1, 2}; 1 avoider -> {3, 2}; 3 target; 2 trap loop
        let g = TestGame {
            moves: vec![
                vec![(0, 1), (1, 2)],
                vec![(0, 3), (1, 2)],
                vec![(0, 2)],
                vec![(0, 3)],
            ],
            reacher_owned: vec![true, false, true, false],
        };
        let (win_r, win_a) = sure_win(&g.view(&[3])).unwrap();
        // the avoider at 1 escapes to 2, so only the target itself wins
        assert_eq!(win_r.members, [3u32].into());
        assert_eq!(win_a.members, [0u32, 1, 2].into());

        // remove the escape: 1 -> {3} only
        let g = TestGame {
            moves: vec![
                vec![(0, 1), (1, 2)],
                vec![(0, 3)],
                vec![(0, 2)],
                vec![(0, 3)],
            ],
            reacher_owned: vec![true, false, true, false],
        };
        let (win_r, _) = sure_win(&g.view(&[3])).unwrap();
        assert_eq!(win_r.members, [0u32, 1, 3].into());
        assert_eq!(win_r.levels[&3], 0);
        assert_eq!(win_r.levels[&1], 1);
        assert_eq!(win_r.levels[&0], 2);
    }

    #[test]
    fn avoider_dead_end_rejected() {
        let g = TestGame {
            moves: vec![vec![]],
            reacher_owned: vec![false],
        };
        assert!(matches!(
            sure_win(&g.view(&[])),
            Err(SolverError::AvoiderDeadEnd(0))
        ));
    }

    #[test]
    fn target_outside_game_rejected() {
        let moves = vec![vec![(0u32, 0u32)]];
        let view = GameView {
            in_game: vec![false],
            reacher_owned: vec![true],
            moves: &moves,
            target: [0u32].into(),
        };
        assert!(matches!(
            sure_win(&view),
            Err(SolverError::TargetOutsideGame(0))
        ));
    }

    #[test]
    fn strategy_reaches_target_on_random_games() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(0xdecaf);
        for round in 0..200 {
            let n = 20;
            let mut moves = Vec::new();
            let mut reacher_owned = Vec::new();
            for _ in 0..n {
                reacher_owned.push(rng.gen_bool(0.5));
                let d = rng.gen_range(1..=3);
                let mut row: Vec<(u32, u32)> = (0..d)
                    .map(|a| (a as u32, rng.gen_range(0..n) as u32))
                    .collect();
                row.sort_unstable();
                row.dedup_by_key(|&mut (a, _)| a);
                moves.push(row);
            }
            let g = TestGame {
                moves,
                reacher_owned,
            };
            let target: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.15)).collect();
            let view = g.view(&target);
            let (win_r, win_a) = sure_win(&view).unwrap();

            // determinacy partition
            assert!(win_r.members.is_disjoint(&win_a.members));
            assert_eq!(win_r.len() + win_a.len(), n, "round {round}");

            let (reacher, avoider) = extract_strategy(&view, &win_r, &win_a).unwrap();
            // every play under the reacher strategy hits the target within n
            // steps; exhaustive over all avoider behaviors
            check_reach_under_strategy(&view, &BTreeSet::new(), &reacher, &win_r)
                .unwrap_or_else(|ce| panic!("round {round}: bad play {:?}", ce));

            // the avoider strategy never leaves the avoider region
            for (&v, &a) in &avoider.choice {
                let (_, w) = *view.moves[v as usize]
                    .iter()
                    .find(|&&(b, _)| b == a)
                    .unwrap();
                assert!(win_a.members.contains(&w), "round {round}");
            }

            // fixpoint soundness: rank-decreasing route at reacher nodes,
            // all-stay at avoider nodes
            for &v in &win_r.members {
                let lv = win_r.levels[&v];
                if lv == 0 {
                    continue;
                }
                if view.reacher_owned[v as usize] {
                    assert!(view.moves[v as usize]
                        .iter()
                        .any(|&(_, w)| win_r.levels.get(&w).is_some_and(|&lw| lw < lv)));
                } else {
                    assert!(view.moves[v as usize]
                        .iter()
                        .all(|&(_, w)| win_r.members.contains(&w)));
                }
            }
        }
    }

    #[test]
    fn tampered_strategy_caught() {
        // 0 reacher -> {1 target, 2 trap}
        let g = TestGame {
            moves: vec![vec![(0, 1), (1, 2)], vec![(0, 1)], vec![(0, 2)]],
            reacher_owned: vec![true, false, false],
        };
        let view = g.view(&[1]);
        let (win_r, win_a) = sure_win(&view).unwrap();
        let (mut reacher, _) = extract_strategy(&view, &win_r, &win_a).unwrap();
        assert_eq!(reacher.choice[&0], 0);
        // corrupt the choice at node 0 toward the trap
        reacher.choice.insert(0, 1);
        let err = check_reach_under_strategy(&view, &BTreeSet::new(), &reacher, &win_r)
            .expect_err("tampered strategy must fail");
        assert_eq!(err.defect, PlayDefect::CycleWithoutTarget);
        assert!(err.play.starts_with(&[0, 2]));
    }
}
