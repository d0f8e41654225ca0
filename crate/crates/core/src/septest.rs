//! Separability decision over a finite grid.
//!
//! A dataset is separably rationalizable on the grid iff some strict total
//! order on the z-parts (the u-order) that ranks componentwise larger z-parts
//! higher makes the combined relation acyclic. The combined relation is the
//! revealed relation plus, for every pair of grid points with `o ≥ o'`, an
//! edge `(z, o) → (z', o')` when `z = z'` (and `o ≠ o'`) or `z` ranks above
//! `z'`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula};
use crate::numerics::{Dominance, RVector};
use crate::reduction::BasePoints;
use crate::rpcore::{find_cycle, revealed_relation, topological_order, Dataset, EdgeKind, Grid, RevealedGraph, TieMode};
use crate::satcore::{SatError, SatResult, Solver, SolverConfig};

/// Largest number of z-parts brute force accepts.
pub const BRUTE_FORCE_MAX_Z: usize = 9;
/// `Method::Auto` uses brute force up to this many z-parts.
pub const AUTO_BRUTE_FORCE_MAX_Z: usize = 8;

#[derive(Debug, Error)]
pub enum SepError {
    #[error("brute force refuses {z_parts} z-parts (limit {limit}); use the cegar method")]
    GuardExceeded { z_parts: usize, limit: usize },
    #[error("SAT conflict budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error(transparent)]
    Sat(SatError),
    #[error("assignment does not satisfy the formula")]
    NotSatisfying,
    #[error("dataset is not a reduction of this formula: {0}")]
    NotAReduction(String),
    #[error("no u-order extending the assignment's relation is acyclic; cycle through grid points {0:?}")]
    CyclicExtension(Vec<usize>),
}

impl From<SatError> for SepError {
    fn from(e: SatError) -> Self {
        match e {
            SatError::BudgetExhausted { limit } => SepError::BudgetExhausted(limit),
            other => SepError::Sat(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bruteforce,
    Cegar,
    Auto,
}

impl Method {
    /// Concrete method for a grid; `Auto` picks brute force iff the grid has
    /// at most [`AUTO_BRUTE_FORCE_MAX_Z`] z-parts.
    pub fn resolve(self, grid: &Grid) -> Method {
        match self {
            Method::Auto if grid.z_parts.len() <= AUTO_BRUTE_FORCE_MAX_Z => Method::Bruteforce,
            Method::Auto => Method::Cegar,
            m => m,
        }
    }
}

/// Where a witness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessSource {
    Bruteforce,
    Cegar,
    Assignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Rationalizable,
    NotRationalizable,
}

/// Z-part indices, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UOrder(pub Vec<usize>);

impl UOrder {
    /// `rank[z]` = position of `z`, 0 being best.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![usize::MAX; self.0.len()];
        for (pos, &z) in self.0.iter().enumerate() {
            rank[z] = pos;
        }
        rank
    }

    fn from_ranks(rank: &[usize]) -> UOrder {
        let mut order: Vec<usize> = (0..rank.len()).collect();
        order.sort_by_key(|&z| rank[z]);
        UOrder(order)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparabilityWitness {
    pub u_order: UOrder,
    /// Grid point indices, best first.
    pub v_order: Vec<usize>,
    pub method: WitnessSource,
    pub iterations: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideStats {
    pub z_parts: usize,
    pub grid_points: usize,
    /// Brute force: prefixes and complete orders visited.
    pub orders_explored: u64,
    /// CEGAR: SAT calls made.
    pub cegar_iterations: u64,
    pub sat_conflicts: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SeparabilityWitness>,
    pub stats: DecideStats,
}

impl TestVerdict {
    pub fn is_rationalizable(&self) -> bool {
        self.status == Status::Rationalizable
    }
}

/// Pairs `(a, b)` of z-parts with `a` componentwise ≥ `b` and `a ≠ b`.
pub fn z_dominance(grid: &Grid) -> Vec<(usize, usize)> {
    let n = grid.z_parts.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && grid.z_parts[a].dominates(&grid.z_parts[b]).expect("same n_z") == Dominance::StrictlyGreater {
                out.push((a, b));
            }
        }
    }
    out
}

/// Edges of the combined relation split by whether they depend on the order.
struct OrderProblem {
    n_z: usize,
    n_points: usize,
    /// 1-edges and same-z dominance edges.
    unconditional: Vec<(usize, usize)>,
    unconditional_set: HashSet<(usize, usize)>,
    /// `conditional[a * n_z + b]`: point edges present iff `a` ranks above `b`.
    conditional: Vec<Vec<(usize, usize)>>,
    dominance: Vec<(usize, usize)>,
}

impl OrderProblem {
    fn new(ds: &Dataset, grid: &Grid, tie: TieMode) -> OrderProblem {
        let n_z = grid.z_parts.len();
        let n_o = grid.o_parts.len();
        let mut o_ge = vec![false; n_o * n_o];
        for a in 0..n_o {
            for b in 0..n_o {
                o_ge[a * n_o + b] = grid.o_parts[a].ge(&grid.o_parts[b]).expect("same n_o");
            }
        }
        let mut unconditional: Vec<(usize, usize)> =
            revealed_relation(ds, grid, tie).edges.iter().map(|e| (e.from, e.to)).collect();
        let mut conditional = vec![Vec::new(); n_z * n_z];
        for (u, pu) in grid.points.iter().enumerate() {
            for (v, pv) in grid.points.iter().enumerate() {
                if u == v || !o_ge[pu.o * n_o + pv.o] {
                    continue;
                }
                if pu.z == pv.z {
                    unconditional.push((u, v));
                } else {
                    conditional[pu.z * n_z + pv.z].push((u, v));
                }
            }
        }
        unconditional.sort_unstable();
        unconditional.dedup();
        let unconditional_set = unconditional.iter().copied().collect();
        OrderProblem {
            n_z,
            n_points: grid.len(),
            unconditional,
            unconditional_set,
            conditional,
            dominance: z_dominance(grid),
        }
    }

    /// Adjacency with every conditional edge whose z-pair satisfies
    /// `rank[a] < rank[b]`. Unranked z-parts share the rank `n_z`, so a
    /// partial ranking yields exactly the edges already decided.
    fn adjacency(&self, rank: &[usize]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_points];
        for &(u, v) in &self.unconditional {
            adj[u].push(v);
        }
        for a in 0..self.n_z {
            for b in 0..self.n_z {
                if rank[a] < rank[b] {
                    for &(u, v) in &self.conditional[a * self.n_z + b] {
                        adj[u].push(v);
                    }
                }
            }
        }
        adj
    }

    fn witness(&self, rank: &[usize], method: WitnessSource, iterations: u64) -> Option<SeparabilityWitness> {
        let v_order = topological_order(&self.adjacency(rank))?;
        Some(SeparabilityWitness { u_order: UOrder::from_ranks(rank), v_order, method, iterations })
    }

    fn stats(&self) -> DecideStats {
        DecideStats { z_parts: self.n_z, grid_points: self.n_points, ..DecideStats::default() }
    }
}

/// The combined relation for a given u-order.
pub fn combined_relation(ds: &Dataset, grid: &Grid, tie: TieMode, u: &UOrder) -> RevealedGraph {
    let mut g = revealed_relation(ds, grid, tie);
    let rank = u.ranks();
    for (a, pa) in grid.points.iter().enumerate() {
        for (b, pb) in grid.points.iter().enumerate() {
            if a == b || !grid.o_parts[pa.o].ge(&grid.o_parts[pb.o]).expect("same n_o") {
                continue;
            }
            if pa.z == pb.z {
                g.push(a, b, EdgeKind::Dominance);
            } else if rank[pa.z] < rank[pb.z] {
                let kind = if pa.o == pb.o { EdgeKind::Order } else { EdgeKind::Dominance };
                g.push(a, b, kind);
            }
        }
    }
    g
}

pub fn decide(
    ds: &Dataset,
    grid: &Grid,
    tie: TieMode,
    method: Method,
    conflict_budget: Option<u64>,
) -> Result<TestVerdict, SepError> {
    match method.resolve(grid) {
        Method::Bruteforce => decide_bruteforce(ds, grid, tie),
        _ => decide_cegar(ds, grid, tie, conflict_budget),
    }
}

/// Enumerates dominance-respecting u-orders in lexicographic order, pruning
/// any prefix whose already-decided edges close a cycle.
pub fn decide_bruteforce(ds: &Dataset, grid: &Grid, tie: TieMode) -> Result<TestVerdict, SepError> {
    let n = grid.z_parts.len();
    if n > BRUTE_FORCE_MAX_Z {
        return Err(SepError::GuardExceeded { z_parts: n, limit: BRUTE_FORCE_MAX_Z });
    }
    let prob = OrderProblem::new(ds, grid, tie);
    let mut stats = prob.stats();
    let mut rank = vec![n; n];
    if find_cycle(&prob.adjacency(&rank)).is_some() {
        return Ok(TestVerdict { status: Status::NotRationalizable, witness: None, stats });
    }
    let mut dominators = vec![Vec::new(); n];
    for &(a, b) in &prob.dominance {
        dominators[b].push(a);
    }

    fn search(
        prob: &OrderProblem,
        dominators: &[Vec<usize>],
        rank: &mut [usize],
        depth: usize,
        explored: &mut u64,
    ) -> bool {
        let n = rank.len();
        if depth == n {
            return true;
        }
        for z in 0..n {
            if rank[z] != n || dominators[z].iter().any(|&d| rank[d] == n) {
                continue;
            }
            rank[z] = depth;
            *explored += 1;
            if find_cycle(&prob.adjacency(rank)).is_none() && search(prob, dominators, rank, depth + 1, explored) {
                return true;
            }
            rank[z] = n;
        }
        false
    }

    let found = search(&prob, &dominators, &mut rank, 0, &mut stats.orders_explored);
    let witness = if found {
        Some(prob.witness(&rank, WitnessSource::Bruteforce, stats.orders_explored).expect("checked acyclic"))
    } else {
        None
    };
    let status = if found { Status::Rationalizable } else { Status::NotRationalizable };
    Ok(TestVerdict { status, witness, stats })
}

/// SAT encoding of strict total orders on z-parts.
struct OrderEncoding {
    n: usize,
}

impl OrderEncoding {
    fn var_count(&self) -> usize {
        self.n * self.n.saturating_sub(1)
    }

    /// DIMACS variable for "a ranks above b".
    fn ord(&self, a: usize, b: usize) -> i32 {
        debug_assert_ne!(a, b);
        let col = if b < a { b } else { b - 1 };
        (a * (self.n - 1) + col + 1) as i32
    }

    fn add_axioms(&self, solver: &mut Solver, dominance: &[(usize, usize)]) -> Result<(), SatError> {
        let n = self.n;
        for a in 0..n {
            for b in a + 1..n {
                solver.add_clause(&[self.ord(a, b), self.ord(b, a)])?;
                solver.add_clause(&[-self.ord(a, b), -self.ord(b, a)])?;
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        solver.add_clause(&[-self.ord(a, b), -self.ord(b, c), self.ord(a, c)])?;
                    }
                }
            }
        }
        for &(a, b) in dominance {
            solver.add_clause(&[self.ord(a, b)])?;
        }
        Ok(())
    }

    /// Rank by number of z-parts beaten; transitivity makes this a permutation.
    fn ranks(&self, model: &[bool]) -> Vec<usize> {
        (0..self.n)
            .map(|a| (0..self.n).filter(|&b| b != a && model[(self.ord(b, a) - 1) as usize]).count())
            .collect()
    }
}

/// Lazy refinement: solve for a u-order, block the order literals of the
/// first cycle found, repeat.
pub fn decide_cegar(
    ds: &Dataset,
    grid: &Grid,
    tie: TieMode,
    conflict_budget: Option<u64>,
) -> Result<TestVerdict, SepError> {
    cegar_with_fixed(ds, grid, tie, conflict_budget, &[], WitnessSource::Cegar)
}

/// [`decide_cegar`] restricted to u-orders ranking `a` above `b` for every
/// `(a, b)` in `fixed`.
pub fn decide_cegar_extending(
    ds: &Dataset,
    grid: &Grid,
    tie: TieMode,
    conflict_budget: Option<u64>,
    fixed: &[(usize, usize)],
) -> Result<TestVerdict, SepError> {
    cegar_with_fixed(ds, grid, tie, conflict_budget, fixed, WitnessSource::Cegar)
}

fn cegar_with_fixed(
    ds: &Dataset,
    grid: &Grid,
    tie: TieMode,
    conflict_budget: Option<u64>,
    fixed: &[(usize, usize)],
    source: WitnessSource,
) -> Result<TestVerdict, SepError> {
    let prob = OrderProblem::new(ds, grid, tie);
    let mut stats = prob.stats();
    let n = prob.n_z;
    if find_cycle(&prob.adjacency(&vec![n; n])).is_some() {
        return Ok(TestVerdict { status: Status::NotRationalizable, witness: None, stats });
    }
    let enc = OrderEncoding { n };
    let mut solver = Solver::new(enc.var_count(), SolverConfig { conflict_limit: conflict_budget });
    enc.add_axioms(&mut solver, &prob.dominance)?;
    for &(a, b) in fixed {
        solver.add_clause(&[enc.ord(a, b)])?;
    }
    loop {
        stats.cegar_iterations += 1;
        let result = solver.solve();
        stats.sat_conflicts = solver.stats().conflicts;
        let model = match result? {
            SatResult::Unsat => return Ok(TestVerdict { status: Status::NotRationalizable, witness: None, stats }),
            SatResult::Sat(model) => model,
        };
        let rank = enc.ranks(&model);
        let adj = prob.adjacency(&rank);
        let Some(cycle) = find_cycle(&adj) else {
            let witness = prob.witness(&rank, source, stats.cegar_iterations).expect("checked acyclic");
            log::debug!("cegar: acyclic order after {} iterations", stats.cegar_iterations);
            return Ok(TestVerdict { status: Status::Rationalizable, witness: Some(witness), stats });
        };
        let mut blocking = Vec::new();
        for (i, &u) in cycle.iter().enumerate() {
            let v = cycle[(i + 1) % cycle.len()];
            if prob.unconditional_set.contains(&(u, v)) {
                continue;
            }
            let lit = -enc.ord(grid.points[u].z, grid.points[v].z);
            if !blocking.contains(&lit) {
                blocking.push(lit);
            }
        }
        log::trace!("cegar: blocking {} order literals from a {}-cycle", blocking.len(), cycle.len());
        // an all-unconditional cycle was ruled out before the loop
        debug_assert!(!blocking.is_empty());
        solver.add_clause(&blocking)?;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessViolation {
    #[error("malformed witness: {0}")]
    Malformed(String),
    #[error("u-order ranks z-part {lower} above z-part {higher}, which dominates it")]
    DominanceInverted { higher: usize, lower: usize },
    #[error("observation {k} reveals grid point {point} but v-order does not rank its bundle higher")]
    Observation { k: usize, point: usize },
    #[error("v-order ranks grid point {to} above {from} against the u-order")]
    Order { from: usize, to: usize },
}

fn check_permutation(order: &[usize], n: usize, what: &str) -> Result<Vec<usize>, WitnessViolation> {
    if order.len() != n {
        return Err(WitnessViolation::Malformed(format!("{what} has {} entries, expected {n}", order.len())));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in order.iter().enumerate() {
        if x >= n || pos[x] != usize::MAX {
            return Err(WitnessViolation::Malformed(format!("{what} is not a permutation of 0..{n}")));
        }
        pos[x] = i;
    }
    Ok(pos)
}

/// Rechecks a witness from the bundles themselves, without the relation
/// builders used by the deciders.
pub fn verify_witness(
    ds: &Dataset,
    grid: &Grid,
    w: &SeparabilityWitness,
    tie: TieMode,
) -> Result<(), WitnessViolation> {
    let urank = check_permutation(&w.u_order.0, grid.z_parts.len(), "u_order")?;
    let vpos = check_permutation(&w.v_order, grid.len(), "v_order")?;

    for (a, za) in grid.z_parts.iter().enumerate() {
        for (b, zb) in grid.z_parts.iter().enumerate() {
            if a != b && za.ge(zb).expect("same n_z") && urank[a] > urank[b] {
                return Err(WitnessViolation::DominanceInverted { higher: a, lower: b });
            }
        }
    }

    let bundles: Vec<RVector> = (0..grid.len()).map(|i| grid.bundle(i)).collect();
    for (k, obs) in ds.observations.iter().enumerate() {
        let budget = obs.p.dot(&obs.x).expect("validated");
        let Some(chosen) = bundles.iter().position(|b| b == &obs.x) else {
            return Err(WitnessViolation::Malformed(format!("observation {k} is not a grid point")));
        };
        for (t, b) in bundles.iter().enumerate() {
            if t != chosen && tie.reveals(&obs.p.dot(b).expect("validated"), &budget) && vpos[chosen] > vpos[t] {
                return Err(WitnessViolation::Observation { k, point: t });
            }
        }
    }

    for (a, pa) in grid.points.iter().enumerate() {
        for (b, pb) in grid.points.iter().enumerate() {
            if a == b || vpos[a] < vpos[b] {
                continue;
            }
            let o_ge = grid.o_parts[pa.o].ge(&grid.o_parts[pb.o]).expect("same n_o");
            if o_ge && (pa.z == pb.z || urank[pa.z] < urank[pb.z]) {
                return Err(WitnessViolation::Order { from: a, to: b });
            }
        }
    }
    Ok(())
}

/// Pairs `(a, b)` of z-parts meaning "a ranks above b" induced by a truth
/// assignment: `z¹_i` above `z²_i` when `x_i` is true, else the reverse.
/// Variables whose base points are not on the grid are skipped.
pub fn assignment_relation(grid: &Grid, a: &Assignment) -> Vec<(usize, usize)> {
    let bp = BasePoints::new(a.var_count().max(1));
    let mut out = Vec::new();
    for i in 1..=a.var_count() {
        if let (Some(z1), Some(z2)) = (grid.z_index(bp.z(i, 1)), grid.z_index(bp.z(i, 2))) {
            out.push(if a.value(i) { (z1, z2) } else { (z2, z1) });
        }
    }
    out
}

/// Builds a witness from a satisfying assignment: the lowest-index linear
/// extension of the assignment relation and dominance gives the u-order. If
/// that order leaves a cycle, other extensions of the assignment relation are
/// searched before giving up.
pub fn truth_assignment_to_witness(
    f: &CnfFormula,
    ds: &Dataset,
    grid: &Grid,
    a: &Assignment,
    tie: TieMode,
) -> Result<SeparabilityWitness, SepError> {
    if a.var_count() != f.var_count() || !f.evaluate(a) {
        return Err(SepError::NotSatisfying);
    }
    if ds.n_z != 2 {
        return Err(SepError::NotAReduction(format!("n_z = {}", ds.n_z)));
    }
    let n = grid.z_parts.len();
    let b_rel = assignment_relation(grid, a);
    let mut adj = vec![Vec::new(); n];
    for &(x, y) in b_rel.iter().chain(z_dominance(grid).iter()) {
        adj[x].push(y);
    }
    let u = topological_order(&adj)
        .ok_or_else(|| SepError::NotAReduction("assignment relation contradicts dominance".into()))?;
    let u = UOrder(u);
    let prob = OrderProblem::new(ds, grid, tie);
    if let Some(w) = prob.witness(&u.ranks(), WitnessSource::Assignment, 0) {
        return Ok(w);
    }
    log::debug!("linear extension of the assignment relation is cyclic; searching other extensions");
    let verdict = cegar_with_fixed(ds, grid, tie, None, &b_rel, WitnessSource::Assignment)?;
    match verdict.witness {
        Some(w) => Ok(w),
        None => {
            let cycle = find_cycle(&prob.adjacency(&u.ranks())).expect("cyclic above");
            Err(SepError::CyclicExtension(cycle))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Literal;
    use crate::numerics::RVector;
    use crate::reduction::{reduce, OffsetMode, ReduceOptions};
    use crate::rpcore::{GridMode, Observation};

    fn obs(x: &[i64], p: &[i64]) -> Observation {
        Observation { x: RVector::from_ints(x), p: RVector::from_ints(p), clause: None, k: None }
    }

    fn single_clause() -> (CnfFormula, Dataset, Grid) {
        let f = CnfFormula::from_triples(3, &[[1, 2, 3]]).unwrap();
        let ds = reduce(&f, &ReduceOptions::new(OffsetMode::Paper)).unwrap();
        let grid = Grid::build(&ds, GridMode::PerLevelUnion).unwrap();
        (f, ds, grid)
    }

    #[test]
    fn single_clause_grid_sizes() {
        let (_, _, grid) = single_clause();
        assert_eq!(grid.z_parts.len(), 9);
        assert_eq!(grid.o_parts.len(), 6);
        assert_eq!(grid.len(), 54);
    }

    #[test]
    fn one_point_is_rationalizable() {
        let ds = Dataset::plain(1, 1, vec![obs(&[1, 1], &[1, 1])], vec![]);
        let grid = Grid::build(&ds, GridMode::FullProduct).unwrap();
        for v in [decide_bruteforce(&ds, &grid, TieMode::Strict).unwrap(), decide_cegar(&ds, &grid, TieMode::Strict, None).unwrap()] {
            assert!(v.is_rationalizable());
            verify_witness(&ds, &grid, v.witness.as_ref().unwrap(), TieMode::Strict).unwrap();
        }
    }

    #[test]
    fn one_edge_cycle_needs_no_iterations() {
        let ds = Dataset::plain(1, 1, vec![obs(&[2, 0], &[2, 1]), obs(&[0, 2], &[1, 2])], vec![]);
        let grid = Grid::build(&ds, GridMode::FullProduct).unwrap();
        let v = decide_cegar(&ds, &grid, TieMode::Strict, None).unwrap();
        assert_eq!(v.status, Status::NotRationalizable);
        assert_eq!(v.stats.cegar_iterations, 0);
        assert!(v.witness.is_none());
    }

    #[test]
    fn single_clause_deciders_agree() {
        let (_, ds, grid) = single_clause();
        let bf = decide_bruteforce(&ds, &grid, TieMode::Strict).unwrap();
        let cg = decide_cegar(&ds, &grid, TieMode::Strict, None).unwrap();
        assert_eq!(bf.status, Status::Rationalizable);
        assert_eq!(cg.status, Status::Rationalizable);
        for v in [&bf, &cg] {
            verify_witness(&ds, &grid, v.witness.as_ref().unwrap(), TieMode::Strict).unwrap();
        }
    }

    #[test]
    fn guard_refuses_large_grids() {
        let f = CnfFormula::from_triples(3, &[[1, 2, 3], [-1, -2, -3]]).unwrap();
        let ds = reduce(&f, &ReduceOptions::new(OffsetMode::Paper)).unwrap();
        let grid = Grid::build(&ds, GridMode::PerLevelUnion).unwrap();
        assert!(grid.z_parts.len() > BRUTE_FORCE_MAX_Z);
        assert!(matches!(decide_bruteforce(&ds, &grid, TieMode::Strict), Err(SepError::GuardExceeded { .. })));
        assert_eq!(Method::Auto.resolve(&grid), Method::Cegar);
    }

    #[test]
    fn transposition_names_the_observation() {
        let (_, ds, grid) = single_clause();
        let v = decide_bruteforce(&ds, &grid, TieMode::Strict).unwrap();
        let mut w = v.witness.unwrap();
        // w_1 → w_2 is a 1-edge of observation 0; move w_2 directly above w_1
        let w1 = grid.observation_points[0];
        let w2 = grid.observation_points[1];
        let p1 = w.v_order.iter().position(|&x| x == w1).unwrap();
        w.v_order.retain(|&x| x != w2);
        w.v_order.insert(p1, w2);
        assert_eq!(
            verify_witness(&ds, &grid, &w, TieMode::Strict),
            Err(WitnessViolation::Observation { k: 0, point: w2 })
        );
    }

    #[test]
    fn inverted_dominance_is_rejected() {
        let (_, ds, grid) = single_clause();
        let mut w = decide_bruteforce(&ds, &grid, TieMode::Strict).unwrap().witness.unwrap();
        // z-part of w_2 (ẑ¹_j + ε(1,1)) dominates that of w_3 (ẑ¹_j)
        let z2 = grid.points[grid.gadget_point(&ds, 1, 2).unwrap()].z;
        let z3 = grid.points[grid.gadget_point(&ds, 1, 3).unwrap()].z;
        let (i2, i3) = (w.u_order.0.iter().position(|&z| z == z2).unwrap(), w.u_order.0.iter().position(|&z| z == z3).unwrap());
        assert!(i2 < i3);
        w.u_order.0.swap(i2, i3);
        assert_eq!(
            verify_witness(&ds, &grid, &w, TieMode::Strict),
            Err(WitnessViolation::DominanceInverted { higher: z2, lower: z3 })
        );
    }

    #[test]
    fn malformed_witness() {
        let (_, ds, grid) = single_clause();
        let w = SeparabilityWitness { u_order: UOrder(vec![0, 0]), v_order: vec![], method: WitnessSource::Cegar, iterations: 0 };
        assert!(matches!(verify_witness(&ds, &grid, &w, TieMode::Strict), Err(WitnessViolation::Malformed(_))));
    }

    #[test]
    fn assignment_must_satisfy() {
        let (f, ds, grid) = single_clause();
        let a = Assignment::new(vec![false; 3]);
        assert!(matches!(truth_assignment_to_witness(&f, &ds, &grid, &a, TieMode::Strict), Err(SepError::NotSatisfying)));
    }

    #[test]
    fn assignment_relation_orientation() {
        let f = CnfFormula::new(3, vec![crate::cnf::Clause::new([Literal::neg(1), Literal::pos(2), Literal::pos(3)]).unwrap()]).unwrap();
        let ds = reduce(&f, &ReduceOptions::new(OffsetMode::Paper)).unwrap();
        let grid = Grid::build(&ds, GridMode::PerLevelUnion).unwrap();
        let bp = BasePoints::new(3);
        let rel = assignment_relation(&grid, &Assignment::new(vec![false, true, true]));
        let z = |i, q| grid.z_index(bp.z(i, q)).unwrap();
        assert!(rel.contains(&(z(1, 2), z(1, 1))));
        assert!(rel.contains(&(z(2, 1), z(2, 2))));
    }

    #[test]
    fn witness_json_shape() {
        let (_, ds, grid) = single_clause();
        let w = decide_cegar(&ds, &grid, TieMode::Strict, None).unwrap().witness.unwrap();
        let v: serde_json::Value = serde_json::to_value(&w).unwrap();
        assert!(v["u_order"].is_array() && v["v_order"].is_array());
        assert_eq!(v["method"], "cegar");
        assert!(v["iterations"].is_u64());
        let back: SeparabilityWitness = serde_json::from_value(v).unwrap();
        assert_eq!(back, w);
    }
}
