//! Internal exact search over tournament plans.
//!
//! Flights are enumerated in a canonical form: races sorted by their
//! smallest member (so team 1 always sails race 1) with teams ascending
//! inside each race. A plan is explored as a nondecreasing sequence of
//! canonical flight indices, which kills flight-permutation symmetry; with
//! `symmetry` enabled the first flight is additionally pinned to the
//! consecutive-blocks partition, which is sound because any plan can be
//! relabeled so that one of its flights is exactly that partition.
//!
//! Optimization is a monotone sweep of fixed-bound feasibility probes: the
//! candidate window `a..=b` acts as the incumbent, widening until a probe
//! finds a plan. The probes prune on pair counts directly (any count above
//! `b`, or one that cannot reach `a` in the remaining flights) and on
//! per-team pairing capacity.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::budget::{Budget, BudgetClock};
use crate::core::{CoreError, LeagueParams, TournamentPlan};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("infeasible window: need 0 <= a <= b <= {flights}, got a={a}, b={b}")]
    InvalidWindow { a: u32, b: u32, flights: u32 },
    #[error("search space too large: {flights} canonical flights exceeds cap {cap}")]
    SearchSpaceTooLarge { flights: u64, cap: u64 },
    #[error("brute force node cap {0} exceeded")]
    NodeCapExceeded(u64),
    #[error("prefix has {prefix} flights, cannot extend to {total}")]
    PrefixTooLong { prefix: u32, total: u32 },
    #[error("extension step must be at least 1")]
    ZeroStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

/// Result of a solver run. `proof` lists the `(a, b)` windows that were
/// exhaustively shown infeasible; for an optimal outcome it covers every
/// window strictly better than the optimum.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub best_plan: Option<TournamentPlan>,
    pub best_utility: Option<u32>,
    pub proof: Vec<(u32, u32)>,
    pub nodes_explored: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Pin the first flight to the consecutive-blocks partition.
    pub symmetry: bool,
    /// Worker threads for feasibility probes. 1 = deterministic.
    pub threads: usize,
    /// Reserved for randomized strategies; the exhaustive search ignores it.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { symmetry: true, threads: 1, seed: 0 }
    }
}

/// Cap on the number of canonical flights the exact search will enumerate.
const FLIGHT_ENUM_CAP: u64 = 2_000_000;

/// Default node cap for the brute-force oracle.
pub const BRUTE_FORCE_DEFAULT_CAP: u64 = 10_000_000;

/// One canonical flight: the team-to-race assignment plus the flat indices
/// of the team pairs it brings together.
#[derive(Debug, Clone)]
pub struct FlightPattern {
    pub assignment: Vec<u32>,
    pub pairs: Vec<u32>,
}

fn pair_index(k: usize, l: usize) -> usize {
    debug_assert!(l < k);
    k * (k - 1) / 2 + l
}

/// Enumerates every canonical flight for the given team count and race
/// size, in lexicographic order of the assignment vector. The first entry
/// is always the consecutive-blocks partition.
pub fn canonical_flights(params: &LeagueParams) -> Result<Vec<FlightPattern>, SolverError> {
    use num_traits::ToPrimitive;
    let count = crate::core::all_flights_count(params)?;
    match count.to_u64() {
        Some(c) if c <= FLIGHT_ENUM_CAP => {}
        other => {
            return Err(SolverError::SearchSpaceTooLarge {
                flights: other.unwrap_or(u64::MAX),
                cap: FLIGHT_ENUM_CAP,
            })
        }
    }
    let n = params.n_teams() as usize;
    let r = params.n_inrace() as usize;
    let mut out = Vec::new();
    let mut assignment = vec![0u32; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    gen_flights(&mut assignment, &mut remaining, 1, r, &mut out);
    Ok(out)
}

fn gen_flights(
    assignment: &mut Vec<u32>,
    remaining: &mut Vec<usize>,
    race: u32,
    r: usize,
    out: &mut Vec<FlightPattern>,
) {
    if remaining.is_empty() {
        let n = assignment.len();
        let mut pairs = Vec::new();
        for k in 0..n {
            for l in 0..k {
                if assignment[l] == assignment[k] {
                    pairs.push(pair_index(k, l) as u32);
                }
            }
        }
        out.push(FlightPattern { assignment: assignment.clone(), pairs });
        return;
    }
    // The smallest remaining team anchors the next race; choose its r-1
    // companions in ascending combinations, which yields lexicographic order.
    let anchor = remaining[0];
    let pool: Vec<usize> = remaining[1..].to_vec();
    let mut combo = vec![0usize; r - 1];
    choose_companions(&pool, 0, 0, &mut combo, &mut |companions| {
        assignment[anchor] = race;
        for &c in companions {
            assignment[c] = race;
        }
        let used: BTreeSet<usize> = companions.iter().copied().chain([anchor]).collect();
        let mut next: Vec<usize> = remaining.iter().copied().filter(|t| !used.contains(t)).collect();
        gen_flights(assignment, &mut next, race + 1, r, out);
    });
}

fn choose_companions(
    pool: &[usize],
    start: usize,
    depth: usize,
    combo: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if depth == combo.len() {
        visit(combo);
        return;
    }
    let needed = combo.len() - depth;
    for i in start..=pool.len().saturating_sub(needed) {
        combo[depth] = pool[i];
        choose_companions(pool, i + 1, depth + 1, combo, visit);
    }
}

/// Shared search context for one parameter set.
struct SearchSpace {
    params: LeagueParams,
    flights: Vec<FlightPattern>,
    pair_count: usize,
    /// For each team, the flat pair indices of its pairs with every other team.
    team_pairs: Vec<Vec<usize>>,
    /// Pairings every team gains per flight: `n_inrace - 1`.
    gain: u32,
}

impl SearchSpace {
    fn build(params: &LeagueParams) -> Result<Self, SolverError> {
        let flights = canonical_flights(params)?;
        let n = params.n_teams() as usize;
        let pair_count = n * (n - 1) / 2;
        let team_pairs = (0..n)
            .map(|t| {
                (0..n)
                    .filter(|&u| u != t)
                    .map(|u| pair_index(t.max(u), t.min(u)))
                    .collect()
            })
            .collect();
        Ok(SearchSpace {
            params: *params,
            flights,
            pair_count,
            team_pairs,
            gain: params.n_inrace() - 1,
        })
    }

    fn plan_from_indices(&self, indices: &[usize]) -> TournamentPlan {
        let grid = indices
            .iter()
            .map(|&i| self.flights[i].assignment.clone())
            .collect();
        let params = self
            .params
            .with_flights(indices.len() as u32)
            .expect("flight count is positive");
        TournamentPlan::new(params, grid).expect("canonical flights form a valid grid")
    }
}

trait Ticker {
    fn tick(&mut self) -> bool;
}

impl Ticker for BudgetClock {
    fn tick(&mut self) -> bool {
        BudgetClock::tick(self)
    }
}

/// Budget tracking shared by probe workers.
struct SharedClock {
    budget: Budget,
    start: Instant,
    nodes: AtomicU64,
    stop: AtomicBool,
}

struct SharedTicker<'a>(&'a SharedClock);

impl Ticker for SharedTicker<'_> {
    fn tick(&mut self) -> bool {
        if self.0.stop.load(Ordering::Relaxed) {
            return false;
        }
        let n = self.0.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(cap) = self.0.budget.max_nodes {
            if n > cap {
                return false;
            }
        }
        if let Some(cap) = self.0.budget.max_time {
            if n % 1024 == 0 && self.0.start.elapsed() > cap {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, PartialEq, Eq)]
enum DfsOutcome {
    Found(Vec<usize>),
    Exhausted,
    BudgetOut,
}

/// Can the partial assignment still reach a plan with all pair counts in
/// `[a, b]` after `rem` more flights?
#[inline]
fn window_reachable(space: &SearchSpace, counts: &[u32], a: u32, b: u32, rem: u32) -> bool {
    for &c in counts {
        if c > b || c + rem < a {
            return false;
        }
    }
    // Each team gains exactly rem * (n_inrace - 1) more pairings.
    let forced = rem * space.gain;
    for pairs in &space.team_pairs {
        let mut need = 0u32;
        let mut cap = 0u32;
        for &p in pairs {
            let c = counts[p];
            need += a.saturating_sub(c);
            cap += (b - c).min(rem);
        }
        if need > forced || cap < forced {
            return false;
        }
    }
    true
}

fn probe_dfs<T: Ticker>(
    space: &SearchSpace,
    a: u32,
    b: u32,
    depth: usize,
    min_idx: usize,
    n_flights: usize,
    counts: &mut [u32],
    chosen: &mut Vec<usize>,
    ticker: &mut T,
) -> DfsOutcome {
    if depth == n_flights {
        // Pruning kept every count in [a, b] through the last flight.
        return DfsOutcome::Found(chosen.clone());
    }
    let rem = (n_flights - depth - 1) as u32;
    let mut budget_hit = false;
    for idx in min_idx..space.flights.len() {
        if !ticker.tick() {
            return DfsOutcome::BudgetOut;
        }
        let flight = &space.flights[idx];
        for &p in &flight.pairs {
            counts[p as usize] += 1;
        }
        if window_reachable(space, counts, a, b, rem) {
            chosen.push(idx);
            match probe_dfs(space, a, b, depth + 1, idx, n_flights, counts, chosen, ticker) {
                DfsOutcome::Found(plan) => return DfsOutcome::Found(plan),
                DfsOutcome::BudgetOut => budget_hit = true,
                DfsOutcome::Exhausted => {}
            }
            chosen.pop();
        }
        for &p in &flight.pairs {
            counts[p as usize] -= 1;
        }
        if budget_hit {
            break;
        }
    }
    if budget_hit {
        DfsOutcome::BudgetOut
    } else {
        DfsOutcome::Exhausted
    }
}

/// Quick arithmetic exclusions before any search: the total pairing mass is
/// fixed, so a window that cannot hold the average is infeasible outright.
fn window_trivially_infeasible(space: &SearchSpace, a: u32, b: u32, n_flights: u32) -> bool {
    let races_per_flight = space.params.n_teams() / space.params.n_inrace();
    let r = u64::from(space.params.n_inrace());
    let total = u64::from(n_flights) * u64::from(races_per_flight) * r * (r - 1) / 2;
    let p = space.pair_count as u64;
    u64::from(a) * p > total || u64::from(b) * p < total
}

fn probe_space(
    space: &SearchSpace,
    n_flights: usize,
    a: u32,
    b: u32,
    budget: Budget,
    opts: &SolveOptions,
) -> (DfsOutcome, u64) {
    if window_trivially_infeasible(space, a, b, n_flights as u32) {
        return (DfsOutcome::Exhausted, 0);
    }
    let mut counts = vec![0u32; space.pair_count];
    let mut chosen = Vec::with_capacity(n_flights);
    let (start_depth, min_idx) = if opts.symmetry {
        let first = &space.flights[0];
        for &p in &first.pairs {
            counts[p as usize] += 1;
        }
        chosen.push(0);
        if !window_reachable(space, &counts, a, b, (n_flights - 1) as u32) {
            return (DfsOutcome::Exhausted, 1);
        }
        (1, 0)
    } else {
        (0, 0)
    };
    if start_depth == n_flights {
        return (DfsOutcome::Found(chosen), 1);
    }
    if opts.threads <= 1 {
        let mut clock = BudgetClock::start(budget);
        let out = probe_dfs(space, a, b, start_depth, min_idx, n_flights, &mut counts, &mut chosen, &mut clock);
        (out, clock.nodes())
    } else {
        probe_parallel(space, a, b, start_depth, n_flights, counts, chosen, budget, opts.threads)
    }
}

/// Splits the first free level across worker threads. Results are exact but
/// node counts and which witness plan is found first are scheduling
/// dependent.
#[allow(clippy::too_many_arguments)]
fn probe_parallel(
    space: &SearchSpace,
    a: u32,
    b: u32,
    depth: usize,
    n_flights: usize,
    counts: Vec<u32>,
    chosen: Vec<usize>,
    budget: Budget,
    threads: usize,
) -> (DfsOutcome, u64) {
    let clock = SharedClock {
        budget,
        start: Instant::now(),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
    };
    let queue = Mutex::new((0..space.flights.len()).collect::<Vec<usize>>());
    let found: Mutex<Option<Vec<usize>>> = Mutex::new(None);
    let budget_hit = AtomicBool::new(false);
    let rem = (n_flights - depth - 1) as u32;

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| {
                let mut ticker = SharedTicker(&clock);
                loop {
                    let idx = {
                        let mut q = queue.lock().unwrap();
                        match q.pop() {
                            Some(i) => i,
                            None => break,
                        }
                    };
                    if clock.stop.load(Ordering::Relaxed) {
                        break;
                    }
                    if !ticker.tick() {
                        budget_hit.store(true, Ordering::Relaxed);
                        break;
                    }
                    let mut local_counts = counts.clone();
                    let mut local_chosen = chosen.clone();
                    let flight = &space.flights[idx];
                    for &p in &flight.pairs {
                        local_counts[p as usize] += 1;
                    }
                    if !window_reachable(space, &local_counts, a, b, rem) {
                        continue;
                    }
                    local_chosen.push(idx);
                    match probe_dfs(
                        space, a, b, depth + 1, idx, n_flights,
                        &mut local_counts, &mut local_chosen, &mut ticker,
                    ) {
                        DfsOutcome::Found(plan) => {
                            *found.lock().unwrap() = Some(plan);
                            clock.stop.store(true, Ordering::Relaxed);
                            break;
                        }
                        DfsOutcome::BudgetOut => {
                            budget_hit.store(true, Ordering::Relaxed);
                            break;
                        }
                        DfsOutcome::Exhausted => {}
                    }
                }
            });
        }
    });

    let nodes = clock.nodes.load(Ordering::Relaxed);
    let found = found.into_inner().unwrap();
    match found {
        Some(plan) => (DfsOutcome::Found(plan), nodes),
        None if budget_hit.load(Ordering::Relaxed) => (DfsOutcome::BudgetOut, nodes),
        None => (DfsOutcome::Exhausted, nodes),
    }
}

/// Searches for a plan whose pairing counts all lie in `[a, b]`.
pub fn probe_feasibility(
    params: &LeagueParams,
    a: u32,
    b: u32,
    budget: Budget,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    if a > b || b > params.n_flights() {
        return Err(SolverError::InvalidWindow { a, b, flights: params.n_flights() });
    }
    let start = Instant::now();
    let space = SearchSpace::build(params)?;
    let (outcome, nodes) = probe_space(&space, params.n_flights() as usize, a, b, budget, opts);
    Ok(match outcome {
        DfsOutcome::Found(indices) => {
            let plan = space.plan_from_indices(&indices);
            let u = plan.utility();
            SolveOutcome {
                status: SolveStatus::Feasible,
                best_utility: Some(u.utility),
                best_plan: Some(plan),
                proof: Vec::new(),
                nodes_explored: nodes,
                wall_time: start.elapsed(),
            }
        }
        DfsOutcome::Exhausted => SolveOutcome {
            status: SolveStatus::Infeasible,
            best_plan: None,
            best_utility: None,
            proof: vec![(a, b)],
            nodes_explored: nodes,
            wall_time: start.elapsed(),
        },
        DfsOutcome::BudgetOut => SolveOutcome {
            status: SolveStatus::Unknown,
            best_plan: None,
            best_utility: None,
            proof: Vec::new(),
            nodes_explored: nodes,
            wall_time: start.elapsed(),
        },
    })
}

/// All windows of width `width` that could contain the average pairing
/// count, in ascending order of the lower bound.
fn candidate_windows(params: &LeagueParams, width: u32) -> Vec<(u32, u32)> {
    let derived = params.derive().expect("divisibility checked by caller");
    let lambda = derived.lambda_avg;
    let floor = (lambda.numer() / lambda.denom()) as u32;
    let ceil = lambda.ceil().to_integer() as u32;
    let mut out = Vec::new();
    for a in ceil.saturating_sub(width)..=floor {
        let b = a + width;
        if b >= ceil && b <= params.n_flights() {
            out.push((a, b));
        }
    }
    out
}

/// Exact optimization: sweeps candidate windows by increasing width until a
/// feasibility probe succeeds; every narrower window exhausted on the way
/// becomes part of the optimality proof.
pub fn solve_exact(
    params: &LeagueParams,
    budget: Budget,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    let start = Instant::now();
    let derived = params.derive()?;
    let space = SearchSpace::build(params)?;
    let n_flights = params.n_flights() as usize;
    let mut total_nodes = 0u64;
    let mut proof = Vec::new();

    // Any valid plan is a fallback incumbent if the budget runs out.
    let (outcome, nodes) =
        probe_space(&space, n_flights, 0, params.n_flights(), budget, opts);
    total_nodes += nodes;
    let incumbent = match outcome {
        DfsOutcome::Found(indices) => space.plan_from_indices(&indices),
        _ => {
            return Ok(SolveOutcome {
                status: SolveStatus::Unknown,
                best_plan: None,
                best_utility: None,
                proof,
                nodes_explored: total_nodes,
                wall_time: start.elapsed(),
            })
        }
    };
    let mut incumbent_utility = incumbent.utility().utility;
    let mut incumbent = incumbent;

    let min_utility = if derived.lambda_avg.is_integer() { 0 } else { 1 };
    for width in min_utility..=incumbent_utility {
        if width == incumbent_utility {
            // Everything narrower is excluded; the incumbent is optimal.
            break;
        }
        let mut width_done = true;
        for (a, b) in candidate_windows(params, width) {
            let res =
                probe_feasibility(params, a, b, remaining(&budget, &start, total_nodes), opts)?;
            total_nodes += res.nodes_explored;
            match res.status {
                SolveStatus::Feasible => {
                    incumbent = res.best_plan.expect("feasible probe carries a plan");
                    incumbent_utility = incumbent.utility().utility;
                    debug_assert!(incumbent_utility <= width);
                    width_done = true;
                    break;
                }
                SolveStatus::Infeasible => proof.push((a, b)),
                _ => {
                    width_done = false;
                    break;
                }
            }
        }
        if !width_done {
            return Ok(SolveOutcome {
                status: SolveStatus::Feasible,
                best_utility: Some(incumbent_utility),
                best_plan: Some(incumbent),
                proof,
                nodes_explored: total_nodes,
                wall_time: start.elapsed(),
            });
        }
        if incumbent_utility <= width {
            break;
        }
    }

    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        best_utility: Some(incumbent_utility),
        best_plan: Some(incumbent),
        proof,
        nodes_explored: total_nodes,
        wall_time: start.elapsed(),
    })
}

/// What is left of a shared budget after `spent_nodes` nodes and the time
/// elapsed since `start`.
fn remaining(budget: &Budget, start: &Instant, spent_nodes: u64) -> Budget {
    Budget {
        max_nodes: budget.max_nodes.map(|cap| cap.saturating_sub(spent_nodes)),
        max_time: budget.max_time.map(|cap| cap.saturating_sub(start.elapsed())),
    }
}

/// Finds the best feasible utility and certifies it by exhausting every
/// strictly better window.
pub fn prove_optimal_utility(
    params: &LeagueParams,
    budget: Budget,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    solve_exact(params, budget, opts)
}

/// Extends `prefix` to `total_flights` rows, appending `step` flights at a
/// time; each block is chosen to minimize the utility of the extended plan.
/// A greedy heuristic: the final result can be strictly worse than a plan
/// optimized over all flights at once.
pub fn greedy_extend(
    prefix: &TournamentPlan,
    total_flights: u32,
    step: u32,
    budget: Budget,
) -> Result<TournamentPlan, SolverError> {
    if step == 0 {
        return Err(SolverError::ZeroStep);
    }
    let have = prefix.params().n_flights();
    if have > total_flights {
        return Err(SolverError::PrefixTooLong { prefix: have, total: total_flights });
    }
    let space = SearchSpace::build(prefix.params())?;
    let mut clock = BudgetClock::start(budget);

    let mut plan = prefix.clone();
    while plan.params().n_flights() < total_flights {
        let block = step.min(total_flights - plan.params().n_flights());
        let mut counts = vec![0u32; space.pair_count];
        let m = plan.pairing_matrix();
        let n = plan.params().n_teams() as usize;
        for k in 0..n {
            for l in 0..k {
                counts[pair_index(k, l)] = m.count(k, l);
            }
        }
        let mut best: Option<(u32, Vec<usize>)> = None;
        let mut chosen = Vec::new();
        extend_block_dfs(&space, block as usize, 0, &mut counts, &mut chosen, &mut best, &mut clock);
        let (_, indices) = best.expect("block search always reaches at least one leaf");
        let rows: Vec<Vec<u32>> = indices
            .iter()
            .map(|&i| space.flights[i].assignment.clone())
            .collect();
        plan = crate::transforms::add_flights(&plan, &rows)
            .expect("canonical flights are valid partitions");
    }
    Ok(plan)
}

/// Exhaustive search over one appended block with incumbent pruning; falls
/// back to the best block found when the budget runs out mid-way.
fn extend_block_dfs(
    space: &SearchSpace,
    depth_left: usize,
    min_idx: usize,
    counts: &mut Vec<u32>,
    chosen: &mut Vec<usize>,
    best: &mut Option<(u32, Vec<usize>)>,
    clock: &mut BudgetClock,
) -> bool {
    if depth_left == 0 {
        let max = *counts.iter().max().unwrap();
        let min = *counts.iter().min().unwrap();
        let util = max - min;
        if best.as_ref().map_or(true, |(u, _)| util < *u) {
            *best = Some((util, chosen.clone()));
        }
        return true;
    }
    for idx in min_idx..space.flights.len() {
        if !clock.tick() {
            return best.is_some();
        }
        let flight = &space.flights[idx];
        for &p in &flight.pairs {
            counts[p as usize] += 1;
        }
        // Bound: counts only grow, so the final spread is at least the
        // current maximum minus the best reachable minimum.
        let rem = (depth_left - 1) as u32;
        let max = *counts.iter().max().unwrap();
        let reachable_min = counts.iter().map(|&c| c + rem).min().unwrap();
        let lb = max.saturating_sub(reachable_min);
        let prune = best.as_ref().map_or(false, |(u, _)| lb >= *u);
        if !prune {
            chosen.push(idx);
            let keep_going =
                extend_block_dfs(space, depth_left - 1, idx, counts, chosen, best, clock);
            chosen.pop();
            if !keep_going {
                for &p in &flight.pairs {
                    counts[p as usize] -= 1;
                }
                return best.is_some();
            }
        }
        for &p in &flight.pairs {
            counts[p as usize] -= 1;
        }
    }
    true
}

/// Full feasibility information from exhaustive enumeration: every
/// `(lambda_min, lambda_max)` profile any plan achieves.
#[derive(Debug, Clone)]
pub struct BruteForceOutcome {
    pub outcome: SolveOutcome,
    pub achieved_bounds: BTreeSet<(u32, u32)>,
}

impl BruteForceOutcome {
    /// Is there a plan with every pairing count in `[a, b]`?
    pub fn window_feasible(&self, a: u32, b: u32) -> bool {
        self.achieved_bounds.iter().any(|&(lo, hi)| lo >= a && hi <= b)
    }
}

/// Exhaustively enumerates every sequence of canonical flights (no symmetry
/// reduction beyond per-flight canonical form). The oracle for acceptance
/// tests; errors if the node cap would be exceeded.
pub fn brute_force_detailed(
    params: &LeagueParams,
    node_cap: u64,
) -> Result<BruteForceOutcome, SolverError> {
    let start = Instant::now();
    let space = SearchSpace::build(params)?;
    let mut counts = vec![0u32; space.pair_count];
    let mut chosen = Vec::new();
    let mut nodes = 0u64;
    let mut best: Option<(u32, Vec<usize>)> = None;
    let mut achieved = BTreeSet::new();
    bf_rec(
        &space,
        params.n_flights() as usize,
        &mut counts,
        &mut chosen,
        &mut nodes,
        node_cap,
        &mut best,
        &mut achieved,
    )?;
    let (utility, indices) = best.expect("at least one plan exists");
    let plan = space.plan_from_indices(&indices);
    Ok(BruteForceOutcome {
        outcome: SolveOutcome {
            status: SolveStatus::Optimal,
            best_plan: Some(plan),
            best_utility: Some(utility),
            proof: Vec::new(),
            nodes_explored: nodes,
            wall_time: start.elapsed(),
        },
        achieved_bounds: achieved,
    })
}

/// Convenience wrapper with the default node cap.
pub fn brute_force(params: &LeagueParams) -> Result<SolveOutcome, SolverError> {
    brute_force_detailed(params, BRUTE_FORCE_DEFAULT_CAP).map(|d| d.outcome)
}

#[allow(clippy::too_many_arguments)]
fn bf_rec(
    space: &SearchSpace,
    depth_left: usize,
    counts: &mut Vec<u32>,
    chosen: &mut Vec<usize>,
    nodes: &mut u64,
    cap: u64,
    best: &mut Option<(u32, Vec<usize>)>,
    achieved: &mut BTreeSet<(u32, u32)>,
) -> Result<(), SolverError> {
    *nodes += 1;
    if *nodes > cap {
        return Err(SolverError::NodeCapExceeded(cap));
    }
    if depth_left == 0 {
        let max = *counts.iter().max().unwrap();
        let min = *counts.iter().min().unwrap();
        achieved.insert((min, max));
        let util = max - min;
        if best.as_ref().map_or(true, |(u, _)| util < *u) {
            *best = Some((util, chosen.clone()));
        }
        return Ok(());
    }
    for idx in 0..space.flights.len() {
        let flight = &space.flights[idx];
        for &p in &flight.pairs {
            counts[p as usize] += 1;
        }
        chosen.push(idx);
        let res = bf_rec(space, depth_left - 1, counts, chosen, nodes, cap, best, achieved);
        chosen.pop();
        for &p in &flight.pairs {
            counts[p as usize] -= 1;
        }
        res?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: u32, f: u32, r: u32) -> LeagueParams {
        LeagueParams::new(t, f, r).unwrap()
    }

    #[test]
    fn canonical_flight_counts() {
        assert_eq!(canonical_flights(&params(4, 1, 2)).unwrap().len(), 3);
        assert_eq!(canonical_flights(&params(6, 1, 3)).unwrap().len(), 10);
        assert_eq!(canonical_flights(&params(8, 1, 4)).unwrap().len(), 35);
        assert_eq!(canonical_flights(&params(10, 1, 5)).unwrap().len(), 126);
        // All teams in one race: a single trivial flight.
        assert_eq!(canonical_flights(&params(4, 1, 4)).unwrap().len(), 1);
    }

    #[test]
    fn first_canonical_flight_is_blocks() {
        let flights = canonical_flights(&params(6, 1, 3)).unwrap();
        assert_eq!(flights[0].assignment, vec![1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn enumeration_cap_guards_large_spaces() {
        assert!(matches!(
            canonical_flights(&params(18, 1, 6)),
            Err(SolverError::SearchSpaceTooLarge { flights: 2_858_856, .. })
        ));
    }

    #[test]
    fn brute_force_tiny_instances() {
        // 1-factorization of 4 teams exists: optimum 0.
        let d = brute_force_detailed(&params(4, 3, 2), 1_000_000).unwrap();
        assert_eq!(d.outcome.best_utility, Some(0));
        // One trivial race holding all teams.
        let d = brute_force_detailed(&params(4, 1, 4), 100).unwrap();
        assert_eq!(d.outcome.best_utility, Some(0));
    }

    #[test]
    fn brute_force_cap_errors() {
        assert!(matches!(
            brute_force_detailed(&params(6, 5, 2), 10),
            Err(SolverError::NodeCapExceeded(10))
        ));
    }

    #[test]
    fn solve_exact_tiny() {
        let opts = SolveOptions::default();
        let out = solve_exact(&params(4, 3, 2), Budget::unlimited(), &opts).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert_eq!(out.best_utility, Some(0));
        let plan = out.best_plan.unwrap();
        assert_eq!(plan.utility().utility, 0);
    }

    #[test]
    fn probe_window_validation() {
        assert!(matches!(
            probe_feasibility(&params(4, 3, 2), 2, 1, Budget::unlimited(), &SolveOptions::default()),
            Err(SolverError::InvalidWindow { .. })
        ));
    }

    #[test]
    fn probe_monotone_windows() {
        let p = params(6, 4, 3);
        let opts = SolveOptions::default();
        let oracle = brute_force_detailed(&p, 1_000_000).unwrap();
        for a in 0..=4u32 {
            for b in a..=4u32 {
                let res = probe_feasibility(&p, a, b, Budget::unlimited(), &opts).unwrap();
                let feasible = res.status == SolveStatus::Feasible;
                assert_eq!(feasible, oracle.window_feasible(a, b), "window ({a},{b})");
                if feasible {
                    let u = res.best_plan.unwrap().utility();
                    assert!(u.lambda_min >= a && u.lambda_max <= b);
                }
            }
        }
    }

    #[test]
    fn symmetry_on_off_agree() {
        for (t, f, r) in [(4, 3, 2), (6, 3, 2), (6, 4, 3), (8, 3, 4)] {
            let p = params(t, f, r);
            let on = solve_exact(&p, Budget::unlimited(), &SolveOptions { symmetry: true, ..Default::default() }).unwrap();
            let off = solve_exact(&p, Budget::unlimited(), &SolveOptions { symmetry: false, ..Default::default() }).unwrap();
            assert_eq!(on.best_utility, off.best_utility, "({t},{f},{r})");
        }
    }

    #[test]
    fn deterministic_outcome() {
        let p = params(6, 4, 3);
        let opts = SolveOptions::default();
        let a = solve_exact(&p, Budget::unlimited(), &opts).unwrap();
        let b = solve_exact(&p, Budget::unlimited(), &opts).unwrap();
        assert_eq!(a.nodes_explored, b.nodes_explored);
        assert_eq!(a.best_plan, b.best_plan);
    }

    #[test]
    fn greedy_extend_basics() {
        // step covering all remaining flights equals exact search with the
        // prefix fixed; from a 1-flight prefix of a (4, ., 2) league the
        // extension reaches the perfect 3-flight plan.
        let p = params(4, 1, 2);
        let prefix = TournamentPlan::new(p, vec![vec![1, 1, 2, 2]]).unwrap();
        let full = greedy_extend(&prefix, 3, 2, Budget::unlimited()).unwrap();
        assert_eq!(full.params().n_flights(), 3);
        assert_eq!(full.utility().utility, 0);
        // Extending by zero flights is the identity.
        let same = greedy_extend(&prefix, 1, 1, Budget::unlimited()).unwrap();
        assert_eq!(same, prefix);
    }

    #[test]
    fn greedy_extend_perfect_plus_one() {
        // One flight appended to a perfect plan with more teams than one
        // race lands on utility exactly 1.
        let plan = crate::catalog::load_builtin("ppl-8-7-4").unwrap();
        let extended = greedy_extend(&plan, 8, 1, Budget::unlimited()).unwrap();
        assert_eq!(extended.utility().utility, 1);
    }
}
