use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::grid::Grid;
use crate::numerics::Rational;

/// How budget ties are treated when revealing preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieMode {
    /// `p_k·w < p_k·x_k` only.
    Strict,
    /// `p_k·w ≤ p_k·x_k`, as in the rationalization inequality.
    Weak,
}

impl TieMode {
    /// Weak when every price is strictly positive. With a zero price
    /// coordinate the weak relation ties each chosen bundle with itself plus a
    /// free good, which monotonicity then ranks strictly higher, so strict
    /// mode is used instead.
    pub fn auto_for(ds: &Dataset) -> TieMode {
        if ds.has_positive_prices() {
            TieMode::Weak
        } else {
            TieMode::Strict
        }
    }

    pub fn reveals(self, cost: &Rational, budget: &Rational) -> bool {
        match self {
            TieMode::Strict => cost < budget,
            TieMode::Weak => cost <= budget,
        }
    }
}

/// Why an edge exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Revealed by observation `k` (a "1-edge").
    Observation(usize),
    /// Same o-part, z ranked higher (a "2-edge").
    Order,
    /// Higher or equal u-rank together with a larger o-part.
    Dominance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// Directed graph over grid points; an edge `a → b` reads "a is preferred to b".
#[derive(Debug, Clone, Default)]
pub struct RevealedGraph {
    pub node_count: usize,
    pub edges: Vec<Edge>,
}

impl RevealedGraph {
    pub fn new(node_count: usize) -> Self {
        RevealedGraph { node_count, edges: Vec::new() }
    }

    pub fn push(&mut self, from: usize, to: usize, kind: EdgeKind) {
        debug_assert!(from != to, "self-edge on {from}");
        debug_assert!(from < self.node_count && to < self.node_count);
        self.edges.push(Edge { from, to, kind });
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        for succ in &mut adj {
            succ.sort_unstable();
            succ.dedup();
        }
        adj
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        find_cycle(&self.adjacency())
    }

    pub fn topological_order(&self) -> Option<Vec<usize>> {
        topological_order(&self.adjacency())
    }
}

/// Per-observation part costs, so the cost of any grid point is one addition.
pub(crate) struct PartCosts {
    pub z: Vec<Rational>,
    pub o: Vec<Rational>,
    pub budget: Rational,
}

pub(crate) fn part_costs(ds: &Dataset, grid: &Grid) -> Vec<PartCosts> {
    ds.observations
        .iter()
        .map(|obs| {
            let (pz, po) = ds.split(&obs.p);
            PartCosts {
                z: grid.z_parts.iter().map(|z| pz.dot(z).expect("dimension checked")).collect(),
                o: grid.o_parts.iter().map(|o| po.dot(o).expect("dimension checked")).collect(),
                budget: obs.p.dot(&obs.x).expect("dimension checked"),
            }
        })
        .collect()
}

/// Edges `x_k → w` for every grid point `w ≠ x_k` affordable at `p_k`.
pub fn revealed_relation(ds: &Dataset, grid: &Grid, tie: TieMode) -> RevealedGraph {
    let mut g = RevealedGraph::new(grid.len());
    for (k, costs) in part_costs(ds, grid).iter().enumerate() {
        let from = grid.observation_points[k];
        for (to, gp) in grid.points.iter().enumerate() {
            if to == from {
                continue;
            }
            let cost = &costs.z[gp.z] + &costs.o[gp.o];
            if tie.reveals(&cost, &costs.budget) {
                g.push(from, to, EdgeKind::Observation(k));
            }
        }
    }
    g
}

/// Iterative depth-first search from nodes in index order. Returns the first
/// cycle found as `[v0, v1, …, vn]` with edges `v0→v1→…→vn→v0`.
pub fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = adj.len();
    let mut mark = vec![Mark::New; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Active;
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            if i < adj[v].len() {
                top.1 += 1;
                let u = adj[v][i];
                match mark[u] {
                    Mark::New => {
                        mark[u] = Mark::Active;
                        parent[u] = v;
                        stack.push((u, 0));
                    }
                    Mark::Active => {
                        let mut cycle = vec![v];
                        let mut x = v;
                        while x != u {
                            x = parent[x];
                            cycle.push(x);
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Kahn's algorithm, always releasing the lowest-index ready node first.
pub fn topological_order(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for succ in adj {
        for &u in succ {
            indeg[u] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &u in &adj[v] {
            indeg[u] -= 1;
            if indeg[u] == 0 {
                ready.push(Reverse(u));
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GarpResult {
    Consistent,
    /// Observation indices `[k0, …, kn]` with `x_k0 R x_k1 R … R x_kn R x_k0`,
    /// at least one step strict.
    Violation(Vec<usize>),
}

/// GARP over the observations alone.
pub fn garp_check(ds: &Dataset) -> GarpResult {
    let n = ds.observations.len();
    let mut weak = vec![vec![false; n]; n];
    let mut strict = vec![vec![false; n]; n];
    for (k, obs) in ds.observations.iter().enumerate() {
        let budget = obs.p.dot(&obs.x).expect("validated");
        for (t, other) in ds.observations.iter().enumerate() {
            if t == k {
                continue;
            }
            let cost = obs.p.dot(&other.x).expect("validated");
            weak[k][t] = cost <= budget;
            strict[k][t] = cost < budget;
        }
    }
    let adj: Vec<Vec<usize>> = weak.iter().map(|row| (0..n).filter(|&t| row[t]).collect()).collect();
    // a violation is a strict edge t → k closed by a weak path k ⇝ t
    for (t, row) in strict.iter().enumerate() {
        for k in (0..n).filter(|&k| row[k]) {
            if let Some(path) = shortest_path(&adj, k, t) {
                let mut cycle = vec![t];
                cycle.extend(path.into_iter().take_while(|&v| v != t));
                return GarpResult::Violation(cycle);
            }
        }
    }
    GarpResult::Consistent
}

fn shortest_path(adj: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = std::collections::VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut x = to;
            while x != from {
                x = prev[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    None
}

/// Graphviz rendering with stable node names (see [`Grid::node_name`]).
pub fn to_dot(ds: &Dataset, grid: &Grid, graph: &RevealedGraph) -> String {
    let mut out = String::from("digraph revealed {\n  rankdir=LR;\n");
    let names: Vec<String> = (0..grid.len()).map(|i| grid.node_name(ds, i)).collect();
    for (i, name) in names.iter().enumerate() {
        let shape = if grid.observation_points.contains(&i) { "box" } else { "ellipse" };
        let _ = writeln!(out, "  {name} [shape={shape}, label=\"{name}\\n{:?}\"];", grid.bundle(i));
    }
    for e in &graph.edges {
        let label = match e.kind {
            EdgeKind::Observation(k) => format!("r{k}"),
            EdgeKind::Order => "u".to_string(),
            EdgeKind::Dominance => "dom".to_string(),
        };
        let _ = writeln!(out, "  {} -> {} [label=\"{label}\"];", names[e.from], names[e.to]);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RVector;
    use crate::rpcore::dataset::Observation;
    use crate::rpcore::grid::GridMode;

    fn obs(x: &[i64], p: &[i64]) -> Observation {
        Observation { x: RVector::from_ints(x), p: RVector::from_ints(p), clause: None, k: None }
    }

    #[test]
    fn cycle_examples() {
        assert_eq!(find_cycle(&[vec![1], vec![2], vec![]]), None);
        assert_eq!(find_cycle(&[vec![1], vec![0]]), Some(vec![0, 1]));
        assert_eq!(find_cycle(&[vec![1], vec![2], vec![1]]), Some(vec![1, 2]));
    }

    #[test]
    fn topo_lowest_index_first() {
        let adj = vec![vec![], vec![0], vec![0]];
        assert_eq!(topological_order(&adj), Some(vec![1, 2, 0]));
        assert_eq!(topological_order(&[vec![1], vec![0]]), None);
    }

    #[test]
    fn garp_examples() {
        // each bundle strictly cheaper than the other at the other's prices
        let ds = Dataset::plain(1, 1, vec![obs(&[2, 0], &[2, 1]), obs(&[0, 2], &[1, 2])], vec![]);
        assert!(matches!(garp_check(&ds), GarpResult::Violation(c) if c.len() == 2));

        let single = Dataset::plain(1, 1, vec![obs(&[1, 1], &[1, 1])], vec![]);
        assert_eq!(garp_check(&single), GarpResult::Consistent);
    }

    #[test]
    fn weak_mode_includes_ties() {
        // x_1 costs 2 at p_0, same as x_0
        let ds = Dataset::plain(1, 1, vec![obs(&[1, 1], &[1, 1]), obs(&[2, 0], &[1, 3])], vec![]);
        let grid = Grid::build(&ds, GridMode::FullProduct).unwrap();
        let a = grid.observation_points[0];
        let b = grid.observation_points[1];
        assert!(revealed_relation(&ds, &grid, TieMode::Weak).has_edge(a, b));
        assert!(!revealed_relation(&ds, &grid, TieMode::Strict).has_edge(a, b));
    }

    #[test]
    fn single_point_has_no_edges() {
        let ds = Dataset::plain(1, 1, vec![obs(&[1, 1], &[1, 1])], vec![]);
        let grid = Grid::build(&ds, GridMode::FullProduct).unwrap();
        assert!(revealed_relation(&ds, &grid, TieMode::Weak).edges.is_empty());
    }
}
