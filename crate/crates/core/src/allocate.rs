//! Decoy allocation optimization.
//!
//! Solving one deceptive game tells the defender what a fixed placement
//! protects; this module searches over placements. The key fact is
//! compositional: the protected region of a union of decoy sets equals the
//! sure-winning region toward the *union of the singleton regions*, so a
//! budget-constrained search only ever re-solves reachability toward unions
//! of cached singleton solutions. Three searches are provided: the
//! incremental greedy over the composed objective, the classic greedy over
//! the union (set-cover) under-approximation, and the exhaustive oracle.
//! A separate checker verifies the order-theoretic facts (monotonicity,
//! union containment, and the submodularity/supermodularity hypotheses) on a
//! concrete instance.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::product::{DeceptiveGame, ProductError};
use crate::solver::{dswin_with_target, Region, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum AllocError {
    #[error("no candidates to allocate from")]
    NoCandidates,
    #[error("duplicate candidate `{0}`")]
    DuplicateCandidate(String),
    #[error("subset enumeration needs {needed} evaluations, over the cap of {cap}")]
    CapExceeded { needed: u64, cap: u64 },
    #[error("region references node {0} outside the deceptive game")]
    RegionOutsideGame(u32),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// How protected regions are sized for the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Counting {
    /// Count only figure-visible nodes (the default, matching the bundled
    /// example's reported sizes).
    Trimmed,
    /// Count over the whole product state space.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    GreedyMax,
    SetCover,
    Exact,
}

/// Default cap on exhaustive subset enumeration.
pub const DEFAULT_SUBSET_CAP: u64 = 1 << 20;

/// A budgeted decoy-allocation instance over a fixed deceptive game.
pub struct AllocationProblem<'g, 'p> {
    dg: &'g DeceptiveGame<'p>,
    candidates: Vec<String>,
    k: usize,
    counting: Counting,
    subset_cap: u64,
    count_set: Option<BTreeSet<u32>>,
    singleton_cache: BTreeMap<String, Region>,
}

impl<'g, 'p> AllocationProblem<'g, 'p> {
    pub fn new(
        dg: &'g DeceptiveGame<'p>,
        candidates: Vec<String>,
        k: usize,
        counting: Counting,
    ) -> Result<Self, AllocError> {
        let mut seen = BTreeSet::new();
        for c in &candidates {
            dg.product().arena().state_idx(c).map_err(ProductError::from)?;
            if !seen.insert(c.clone()) {
                return Err(AllocError::DuplicateCandidate(c.clone()));
            }
        }
        let count_set = match counting {
            Counting::Trimmed => Some(dg.product().visible_nodes()),
            Counting::Full => None,
        };
        Ok(AllocationProblem {
            dg,
            candidates,
            k,
            counting,
            subset_cap: DEFAULT_SUBSET_CAP,
            count_set,
            singleton_cache: BTreeMap::new(),
        })
    }

    pub fn with_subset_cap(mut self, cap: u64) -> Self {
        self.subset_cap = cap;
        self
    }

    pub fn game(&self) -> &'g DeceptiveGame<'p> {
        self.dg
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counting(&self) -> Counting {
        self.counting
    }

    /// The objective value of a region under this problem's counting mode.
    pub fn objective(&self, region: &Region) -> usize {
        match &self.count_set {
            None => region.len(),
            Some(set) => region.members.iter().filter(|v| set.contains(v)).count(),
        }
    }

    /// Region members that participate in counting, as id pairs.
    pub fn counted_ids(&self, region: &Region) -> Vec<(String, String)> {
        let pg = self.dg.product();
        region
            .members
            .iter()
            .filter(|v| self.count_set.as_ref().map_or(true, |set| set.contains(v)))
            .map(|&v| pg.node_ids(v))
            .collect()
    }

    /// The single-decoy protected region for `candidate`, cached.
    pub fn singleton(&mut self, candidate: &str) -> Result<&Region, AllocError> {
        if !self.singleton_cache.contains_key(candidate) {
            let region = self.direct_region(std::slice::from_ref(&candidate.to_string()))?;
            self.singleton_cache.insert(candidate.to_string(), region);
        }
        Ok(&self.singleton_cache[candidate])
    }

    fn ensure_cache(&mut self) -> Result<(), AllocError> {
        for c in self.candidates.clone() {
            self.singleton(&c)?;
        }
        Ok(())
    }

    /// Solves the deceptive game directly for a concrete placement: decoy
    /// target construction plus one attractor, no composition involved.
    pub fn direct_region(&self, placement: &[String]) -> Result<Region, AllocError> {
        let set: BTreeSet<String> = placement.iter().cloned().collect();
        let targets = self.dg.decoy_targets(&set)?;
        Ok(dswin_with_target(self.dg, &targets)?)
    }
}

/// One round of a greedy search, for audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub round: usize,
    /// Candidate scores in candidate order. For the composed greedy these
    /// are objective values after adding the candidate; for set cover, the
    /// number of newly covered nodes.
    pub scores: Vec<(String, usize)>,
    pub chosen: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The outcome of an allocation search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocationResult {
    pub method: Method,
    /// Chosen placement, in selection order.
    pub chosen: Vec<String>,
    /// Size of the final protected region under the problem's counting.
    pub objective: usize,
    /// Counted members of the final protected region, as (state, dfa) ids.
    pub region: Vec<(String, String)>,
    pub trace: Vec<IterationTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopped_early: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsets_evaluated: Option<u64>,
    /// The full protected region (all product nodes), for verification.
    #[serde(skip)]
    pub region_nodes: Region,
}

/// Reachability toward the union of two protected regions. By composition
/// this equals the protected region of the united placements.
pub fn compose(
    dg: &DeceptiveGame,
    r1: &Region,
    r2: &Region,
) -> Result<Region, AllocError> {
    for &v in r1.members.iter().chain(r2.members.iter()) {
        if !dg.nodes().contains(&v) {
            return Err(AllocError::RegionOutsideGame(v));
        }
    }
    let target: BTreeSet<u32> = r1.members.union(&r2.members).copied().collect();
    Ok(dswin_with_target(dg, &target)?)
}

fn argmax_by_order(scores: &[(String, usize)]) -> (usize, bool) {
    let mut best = 0;
    let mut tied = false;
    for (i, (_, v)) in scores.iter().enumerate().skip(1) {
        if *v > scores[best].1 {
            best = i;
            tied = false;
        } else if *v == scores[best].1 {
            tied = true;
        }
    }
    (best, tied)
}

fn verify_against_direct(
    problem: &AllocationProblem,
    chosen: &[String],
    region: &Region,
) -> Result<(), AllocError> {
    let direct = problem.direct_region(chosen)?;
    if direct.members != region.members {
        return Err(AllocError::Internal(format!(
            "composed region for {chosen:?} disagrees with the direct solve: {} vs {} nodes",
            region.len(),
            direct.len()
        )));
    }
    Ok(())
}

/// Incremental greedy over the composed objective: each round adds the
/// candidate whose composition with the current region protects the most.
/// Stops early when no candidate improves the objective.
pub fn greedy_max(problem: &mut AllocationProblem) -> Result<AllocationResult, AllocError> {
    if problem.candidates.is_empty() && problem.k >= 1 {
        return Err(AllocError::NoCandidates);
    }
    problem.ensure_cache()?;

    let mut chosen: Vec<String> = Vec::new();
    let mut region = Region::default();
    let mut trace = Vec::new();
    let mut stopped_early = None;

    for round in 0..problem.k {
        let remaining: Vec<String> = problem
            .candidates
            .iter()
            .filter(|c| !chosen.contains(c))
            .cloned()
            .collect();
        if remaining.is_empty() {
            break;
        }
        let mut scores = Vec::with_capacity(remaining.len());
        let mut regions = Vec::with_capacity(remaining.len());
        for c in &remaining {
            let cached = problem.singleton_cache[c].clone();
            let composed = compose(problem.dg, &region, &cached)?;
            scores.push((c.clone(), problem.objective(&composed)));
            regions.push(composed);
        }
        let (best, tied) = argmax_by_order(&scores);
        if scores[best].1 <= problem.objective(&region) {
            stopped_early = Some(format!(
                "stopped after {round} of {} rounds: no remaining candidate increases the objective past {}",
                problem.k,
                problem.objective(&region)
            ));
            break;
        }
        let note = tied.then(|| "tie broken by candidate order".to_string());
        trace.push(IterationTrace {
            round,
            scores: scores.clone(),
            chosen: scores[best].0.clone(),
            note,
        });
        chosen.push(scores[best].0.clone());
        region = regions.swap_remove(best);
    }

    verify_against_direct(problem, &chosen, &region)?;
    Ok(AllocationResult {
        method: Method::GreedyMax,
        objective: problem.objective(&region),
        region: problem.counted_ids(&region),
        chosen,
        trace,
        stopped_early,
        subsets_evaluated: None,
        region_nodes: region,
    })
}

/// Classic greedy over the union of cached singleton regions (maximum set
/// cover). The reported region and objective are the true composed values
/// for the chosen placement; the trace records the cover gains.
pub fn greedy_set_cover(problem: &mut AllocationProblem) -> Result<AllocationResult, AllocError> {
    if problem.candidates.is_empty() && problem.k >= 1 {
        return Err(AllocError::NoCandidates);
    }
    problem.ensure_cache()?;

    let counted = |problem: &AllocationProblem, r: &Region| -> BTreeSet<u32> {
        r.members
            .iter()
            .copied()
            .filter(|v| problem.count_set.as_ref().map_or(true, |set| set.contains(v)))
            .collect()
    };

    let mut chosen: Vec<String> = Vec::new();
    let mut covered: BTreeSet<u32> = BTreeSet::new();
    let mut trace = Vec::new();
    for round in 0..problem.k {
        let remaining: Vec<String> = problem
            .candidates
            .iter()
            .filter(|c| !chosen.contains(c))
            .cloned()
            .collect();
        if remaining.is_empty() {
            break;
        }
        let mut scores = Vec::with_capacity(remaining.len());
        for c in &remaining {
            let gain = counted(problem, &problem.singleton_cache[c])
                .difference(&covered)
                .count();
            scores.push((c.clone(), gain));
        }
        let (best, tied) = argmax_by_order(&scores);
        let mut note = tied.then(|| "tie broken by candidate order".to_string());
        if scores[best].1 == 0 {
            note = Some(match note {
                Some(n) => format!("{n}; zero coverage gain"),
                None => "zero coverage gain".to_string(),
            });
        }
        trace.push(IterationTrace {
            round,
            scores: scores.clone(),
            chosen: scores[best].0.clone(),
            note,
        });
        let name = scores[best].0.clone();
        covered.extend(counted(problem, &problem.singleton_cache[&name]));
        chosen.push(name);
    }

    // the true protected region, rebuilt by composing the chosen singletons
    let mut region = Region::default();
    for c in &chosen {
        let cached = problem.singleton_cache[c].clone();
        region = compose(problem.dg, &region, &cached)?;
    }
    verify_against_direct(problem, &chosen, &region)?;
    Ok(AllocationResult {
        method: Method::SetCover,
        objective: problem.objective(&region),
        region: problem.counted_ids(&region),
        chosen,
        trace,
        stopped_early: None,
        subsets_evaluated: None,
        region_nodes: region,
    })
}

fn subsets_to_evaluate(n: usize, k: usize) -> u64 {
    // sum of C(n, 0..=min(k, n)), saturating
    let mut total: u64 = 0;
    let mut row: u64 = 1;
    for i in 0..=k.min(n) {
        total = total.saturating_add(row);
        row = row
            .saturating_mul((n - i) as u64)
            .checked_div((i + 1) as u64)
            .unwrap_or(u64::MAX);
    }
    total
}

/// Exhaustive oracle: evaluates every placement of size at most `k` with a
/// direct solve and returns a global maximizer (first in lexicographic
/// subset order on ties).
pub fn exact_optimal(problem: &mut AllocationProblem) -> Result<AllocationResult, AllocError> {
    let n = problem.candidates.len();
    let needed = subsets_to_evaluate(n, problem.k);
    if needed > problem.subset_cap {
        return Err(AllocError::CapExceeded {
            needed,
            cap: problem.subset_cap,
        });
    }

    let mut evaluated: u64 = 0;
    let mut best: Option<(Vec<String>, usize, Region)> = None;

    fn recurse(
        problem: &AllocationProblem,
        start: usize,
        current: &mut Vec<String>,
        evaluated: &mut u64,
        best: &mut Option<(Vec<String>, usize, Region)>,
    ) -> Result<(), AllocError> {
        let region = problem.direct_region(current)?;
        let obj = problem.objective(&region);
        *evaluated += 1;
        let better = match best {
            None => true,
            Some((_, b, _)) => obj > *b,
        };
        if better {
            *best = Some((current.clone(), obj, region));
        }
        if current.len() == problem.k {
            return Ok(());
        }
        for i in start..problem.candidates.len() {
            current.push(problem.candidates[i].clone());
            recurse(problem, i + 1, current, evaluated, best)?;
            current.pop();
        }
        Ok(())
    }

    let mut current = Vec::new();
    recurse(problem, 0, &mut current, &mut evaluated, &mut best)?;
    let (chosen, objective, region) = best.expect("the empty placement is always evaluated");
    Ok(AllocationResult {
        method: Method::Exact,
        objective,
        region: problem.counted_ids(&region),
        chosen,
        trace: Vec::new(),
        stopped_early: None,
        subsets_evaluated: Some(evaluated),
        region_nodes: region,
    })
}

// ---------------------------------------------------------------------------
// Order-theoretic condition checking
// ---------------------------------------------------------------------------

/// Findings of the monotonicity/submodularity/supermodularity audit on a
/// concrete instance. Hypothesis violations are diagnoses, not failures:
/// they mean the corresponding modularity guarantee does not apply here.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// Objective never decreases when a decoy is added.
    pub monotone_ok: bool,
    pub monotone_witnesses: Vec<String>,
    /// Union containment: region(D) ∪ region({s}) ⊆ region(D ∪ {s}).
    pub containment_ok: bool,
    pub containment_witnesses: Vec<String>,
    /// The union objective never exceeds the composed objective.
    pub cover_bound_ok: bool,
    pub cover_bound_witnesses: Vec<String>,
    /// Whether region(D ∪ {s}) = region(D) ∪ region({s}) everywhere.
    pub condition_b_holds: bool,
    pub condition_b_witnesses: Vec<String>,
    /// Checked only when condition (b) holds.
    pub submodular_ok: Option<bool>,
    /// Whether region(D) = region(D ∪ {s1}) ∩ region(D ∪ {s2}) everywhere.
    pub condition_c_holds: bool,
    pub condition_c_witnesses: Vec<String>,
    /// Checked only when condition (c) holds.
    pub supermodular_ok: Option<bool>,
    pub subsets_evaluated: u64,
}

impl Theorem1Report {
    /// True when every property Thm-style guaranteed to hold did hold.
    pub fn guaranteed_ok(&self) -> bool {
        self.monotone_ok
            && self.containment_ok
            && self.cover_bound_ok
            && self.submodular_ok.unwrap_or(true)
            && self.supermodular_ok.unwrap_or(true)
    }
}

const MAX_WITNESSES: usize = 10;

fn push_witness(list: &mut Vec<String>, witness: String) {
    if list.len() < MAX_WITNESSES {
        list.push(witness);
    }
}

/// Exhaustively audits the instance: monotonicity and union containment on
/// every (D, s), the cover lower bound on every D, and the hypotheses under
/// which the composed objective is submodular or supermodular (with the
/// corresponding inequality verified whenever its hypothesis holds).
pub fn check_theorem1(problem: &mut AllocationProblem) -> Result<Theorem1Report, AllocError> {
    let n = problem.candidates.len();
    if n >= 63 || (1u64 << n) > problem.subset_cap {
        return Err(AllocError::CapExceeded {
            needed: if n >= 63 { u64::MAX } else { 1u64 << n },
            cap: problem.subset_cap,
        });
    }
    let candidates = problem.candidates.clone();
    let names = |mask: u64| -> Vec<&str> {
        (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| candidates[i].as_str())
            .collect()
    };
    let set_label = |mask: u64| format!("{{{}}}", names(mask).join(", "));

    // solve every subset directly
    let total = 1u64 << n;
    let mut regions: Vec<Region> = Vec::with_capacity(total as usize);
    let mut values: Vec<usize> = Vec::with_capacity(total as usize);
    for mask in 0..total {
        let placement: Vec<String> = names(mask).iter().map(|s| s.to_string()).collect();
        let region = problem.direct_region(&placement)?;
        values.push(problem.objective(&region));
        regions.push(region);
    }

    let pg = problem.dg.product();
    let mut report = Theorem1Report {
        monotone_ok: true,
        monotone_witnesses: Vec::new(),
        containment_ok: true,
        containment_witnesses: Vec::new(),
        cover_bound_ok: true,
        cover_bound_witnesses: Vec::new(),
        condition_b_holds: true,
        condition_b_witnesses: Vec::new(),
        submodular_ok: None,
        condition_c_holds: true,
        condition_c_witnesses: Vec::new(),
        supermodular_ok: None,
        subsets_evaluated: total,
    };

    for mask in 0..total {
        // cover bound: |∪ singletons| ≤ |composed| under the same counting
        let mut union_nodes = BTreeSet::new();
        for i in 0..n {
            if mask & (1 << i) != 0 {
                union_nodes.extend(regions[1usize << i].members.iter().copied());
            }
        }
        let union_val = problem.objective(&Region::from_members(union_nodes));
        if union_val > values[mask as usize] {
            report.cover_bound_ok = false;
            push_witness(
                &mut report.cover_bound_witnesses,
                format!(
                    "D={}: union objective {} exceeds composed objective {}",
                    set_label(mask),
                    union_val,
                    values[mask as usize]
                ),
            );
        }

        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            let bigger = mask | (1 << i);
            if values[mask as usize] > values[bigger as usize] {
                report.monotone_ok = false;
                push_witness(
                    &mut report.monotone_witnesses,
                    format!(
                        "adding {} to D={} drops the objective {} -> {}",
                        candidates[i],
                        set_label(mask),
                        values[mask as usize],
                        values[bigger as usize]
                    ),
                );
            }
            let single = 1u64 << i;
            let union: BTreeSet<u32> = regions[mask as usize]
                .members
                .union(&regions[single as usize].members)
                .copied()
                .collect();
            if !union.is_subset(&regions[bigger as usize].members) {
                report.containment_ok = false;
                let stray = union
                    .difference(&regions[bigger as usize].members)
                    .next()
                    .copied()
                    .unwrap();
                let (s, q) = pg.node_ids(stray);
                push_witness(
                    &mut report.containment_witnesses,
                    format!(
                        "D={}, s={}: ({s}, {q}) escapes the united region",
                        set_label(mask),
                        candidates[i]
                    ),
                );
            }
            if regions[bigger as usize].members != union {
                report.condition_b_holds = false;
                let extra = regions[bigger as usize]
                    .members
                    .difference(&union)
                    .next()
                    .copied();
                if let Some(v) = extra {
                    let (s, q) = pg.node_ids(v);
                    push_witness(
                        &mut report.condition_b_witnesses,
                        format!(
                            "D={}, s={}: ({s}, {q}) is protected jointly but by neither side",
                            set_label(mask),
                            candidates[i]
                        ),
                    );
                }
            }
            for j in (i + 1)..n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let with_i = mask | (1 << i);
                let with_j = mask | (1 << j);
                let meet: BTreeSet<u32> = regions[with_i as usize]
                    .members
                    .intersection(&regions[with_j as usize].members)
                    .copied()
                    .collect();
                if meet != regions[mask as usize].members {
                    report.condition_c_holds = false;
                    push_witness(
                        &mut report.condition_c_witnesses,
                        format!(
                            "D={}, s1={}, s2={}: intersection of the extended regions differs",
                            set_label(mask),
                            candidates[i],
                            candidates[j]
                        ),
                    );
                }
            }
        }
    }

    // marginal-gain comparisons across nested sets, when a hypothesis holds
    if report.condition_b_holds || report.condition_c_holds {
        let mut sub_ok = true;
        let mut super_ok = true;
        for small in 0..total {
            // enumerate supersets of `small`
            let rest = !small & (total - 1);
            let mut extra = rest;
            loop {
                let big = small | extra;
                for i in 0..n {
                    if big & (1 << i) != 0 {
                        continue;
                    }
                    let gain_small = values[(small | (1 << i)) as usize] as i64
                        - values[small as usize] as i64;
                    let gain_big =
                        values[(big | (1 << i)) as usize] as i64 - values[big as usize] as i64;
                    if gain_small < gain_big {
                        sub_ok = false;
                    }
                    if gain_small > gain_big {
                        super_ok = false;
                    }
                }
                if extra == 0 {
                    break;
                }
                extra = (extra - 1) & rest;
            }
        }
        if report.condition_b_holds {
            report.submodular_ok = Some(sub_ok);
        }
        if report.condition_c_holds {
            report.supermodular_ok = Some(super_ok);
        }
    }

    Ok(report)
}
