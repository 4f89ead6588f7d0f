//! Deceptive defense synthesis for attack-defend games on graphs.
//!
//! The attacker (P2) pursues a co-safe LTL objective over a two-player
//! turn-based game arena; the defender (P1) plants hidden decoys and plays a
//! stealthy strategy that lures a rational attacker into them. The library
//! builds the attacker's perceptual product game, solves reachability games
//! by attractor iteration, restricts play to subjectively rationalizable
//! actions, computes the defender's deceptive sure-winning region for a
//! decoy placement, and optimizes placements under a budget by composing
//! single-decoy solutions.
//!
//! Modules follow the pipeline: [`arena`] ingests game graphs, [`logic`]
//! handles objectives (parsing, DFA translation and validation), [`product`]
//! builds the perceptual product and deceptive games, [`solver`] computes
//! winning regions and strategies, [`allocate`] optimizes decoy placement,
//! [`gen`] produces seeded random instances, and [`dot`] renders graphs.

pub mod allocate;
pub mod arena;
pub mod dot;
pub mod gen;
pub mod logic;
pub mod product;
pub mod solver;

pub use allocate::{
    check_theorem1, compose, exact_optimal, greedy_max, greedy_set_cover, AllocationProblem,
    AllocationResult, Counting, Method,
};
pub use arena::{load_arena, perceived_label, with_decoys, Arena, ArenaError, Player, DECOY_AP};
pub use logic::{load_dfa, parse_scltl, to_dfa, Dfa, Formula, Guard};
pub use product::{
    build_deceptive_game, build_hypergame, sr_actions, DeceptiveGame, ProductGame, ProductState,
};
pub use solver::{
    attacker_perceptual_regions, check_reach_under_strategy, deceptive_strategy, dswin,
    dswin_with_target, extract_strategy, sure_win, Counterexample, GameView, PlayDefect, Region,
    Role, Strategy,
};
