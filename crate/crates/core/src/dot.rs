//! Graphviz exports following the bundled figures' conventions: boxes for
//! attacker-owned nodes, ellipses for defender-owned ones, double borders on
//! attacker-goal nodes, red fill for decoy targets, blue fill for the
//! protected (deceptive sure-winning) region.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::arena::{Arena, Player};
use crate::product::{DeceptiveGame, ProductGame};
use crate::solver::Region;

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    /// Restrict to the figure-visible node set.
    pub trim: bool,
    /// Highlight a protected region in blue.
    pub dswin: Option<Region>,
}

fn quote(s: &str) -> String {
    s.replace('"', "\\\"")
}

pub fn arena_dot(arena: &Arena) -> String {
    let mut out = String::from("digraph arena {\n  rankdir=TB;\n");
    for s in 0..arena.n_states() as u32 {
        let shape = match arena.owner(s) {
            Player::P2 => "box",
            Player::P1 => "ellipse",
        };
        let labels: Vec<String> = arena.label(s).into_iter().collect();
        let label = if labels.is_empty() {
            arena.state_id(s).to_string()
        } else {
            format!("{}\\n{{{}}}", arena.state_id(s), labels.join(", "))
        };
        let _ = writeln!(
            out,
            "  \"{}\" [shape={shape}, label=\"{}\"];",
            quote(arena.state_id(s)),
            label
        );
    }
    for s in 0..arena.n_states() as u32 {
        for &(a, to) in arena.moves_from(s) {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                quote(arena.state_id(s)),
                quote(arena.state_id(to)),
                quote(arena.action_id(a))
            );
        }
    }
    out.push_str("}\n");
    out
}

fn node_line(
    pg: &ProductGame,
    v: u32,
    f2: &BTreeSet<u32>,
    fd: &BTreeSet<u32>,
    dswin: Option<&Region>,
) -> String {
    let (s, q) = pg.node_ids(v);
    let shape = match pg.owner(v) {
        Player::P2 => "box",
        Player::P1 => "ellipse",
    };
    let peripheries = if f2.contains(&v) { 2 } else { 1 };
    let fill = if fd.contains(&v) {
        Some("indianred1")
    } else if dswin.map_or(false, |r| r.contains(v)) {
        Some("lightblue")
    } else {
        None
    };
    let style = match fill {
        Some(color) => format!(", style=filled, fillcolor={color}"),
        None => String::new(),
    };
    format!(
        "  \"({s},{q})\" [shape={shape}, peripheries={peripheries}, label=\"({s}, {q})\"{style}];",
    )
}

fn graph_dot(
    pg: &ProductGame,
    name: &str,
    nodes: &BTreeSet<u32>,
    moves_of: impl Fn(u32) -> Vec<(u32, u32)>,
    opts: &DotOptions,
) -> String {
    let visible: Option<BTreeSet<u32>> = opts.trim.then(|| pg.visible_nodes());
    let keep = |v: u32| visible.as_ref().map_or(true, |set| set.contains(&v));
    let mut out = format!("digraph {name} {{\n  rankdir=TB;\n");
    for &v in nodes {
        if !keep(v) {
            continue;
        }
        out.push_str(&node_line(pg, v, pg.f2(), pg.fd(), opts.dswin.as_ref()));
        out.push('\n');
    }
    for &v in nodes {
        if !keep(v) {
            continue;
        }
        let (vs, vq) = pg.node_ids(v);
        let mut drawn = BTreeSet::new();
        for (a, w) in moves_of(v) {
            if !nodes.contains(&w) || !keep(w) {
                continue;
            }
            // sinks map every action to themselves; one self-edge is enough
            if !drawn.insert(w) {
                continue;
            }
            let (ws, wq) = pg.node_ids(w);
            let _ = writeln!(
                out,
                "  \"({vs},{vq})\" -> \"({ws},{wq})\" [label=\"{}\"];",
                quote(pg.arena().action_id(a))
            );
        }
    }
    out.push_str("}\n");
    out
}

/// The attacker's perceptual product game (the hypergame graph).
pub fn product_dot(pg: &ProductGame, opts: &DotOptions) -> String {
    let nodes: BTreeSet<u32> = (0..pg.n_nodes() as u32).collect();
    graph_dot(pg, "product", &nodes, |v| pg.moves_from(v).to_vec(), opts)
}

/// The defender's deceptive reachability game.
pub fn deceptive_dot(dg: &DeceptiveGame, opts: &DotOptions) -> String {
    graph_dot(
        dg.product(),
        "deceptive",
        dg.nodes(),
        |v| dg.moves_from(v).to_vec(),
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::load_arena;
    use crate::logic::load_dfa;
    use crate::product::{build_deceptive_game, build_hypergame};
    use crate::solver::{attacker_perceptual_regions, dswin};
    use std::path::Path;

    #[test]
    fn figure_conventions_present() {
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
        let decoys = ["h".to_string(), "k".to_string()].into();
        let pg = build_hypergame(&arena, &dfa, &decoys).unwrap();
        let (_, win2) = attacker_perceptual_regions(&pg).unwrap();
        let dg = build_deceptive_game(&pg, &win2).unwrap();
        let region = dswin(&dg).unwrap();

        let dot = deceptive_dot(
            &dg,
            &DotOptions {
                trim: true,
                dswin: Some(region),
            },
        );
        // decoy nodes are red, protected non-decoy nodes blue, goals doubled
        assert!(dot.contains("\"(h,0)\" [shape=ellipse, peripheries=1, label=\"(h, 0)\", style=filled, fillcolor=indianred1]"));
        assert!(dot.contains("\"(f,1)\" [shape=ellipse, peripheries=1, label=\"(f, 1)\", style=filled, fillcolor=lightblue]"));
        assert!(dot.contains("\"(n,3)\" [shape=ellipse, peripheries=2"));
        assert!(dot.contains("\"(k,1)\" [shape=box"));
        // trimmed export omits invisible nodes
        assert!(!dot.contains("(c,1)"));
        // sinks keep a single self-edge
        assert_eq!(dot.matches("\"(n,3)\" -> \"(n,3)\"").count(), 1);

        let full = product_dot(&pg, &DotOptions::default());
        assert!(full.contains("(c,1)"));

        let arena_graph = arena_dot(&arena);
        assert!(arena_graph.contains("\"a\" [shape=box"));
        assert!(arena_graph.contains("\"b\" [shape=ellipse"));
    }
}
