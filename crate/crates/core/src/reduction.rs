//! Compiles a 3SAT formula into a consumption dataset with nine goods.
//!
//! Each variable `x_i` gets two bundles on the hyperbola `θ₂ = 1/θ₁`,
//! `z¹_i = (i, 1/i)` and `z²_i = (i+1/2, 1/(i+1/2))`, each with the price
//! vector of its supporting line `p·θ = 1`. A clause becomes nine bundles
//! `w_1..w_9` in eight goods (two z-goods, six o-goods) of which six are
//! observed purchases; clauses are stacked by embedding into nine goods and
//! shifting along the ninth good by an increasing per-clause offset.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, CnfFormula};
use crate::numerics::{RVector, Rational};
use crate::rpcore::{Dataset, EvaluationPoint, Grid, GridError, GridMode, Observation};

/// Number of z-goods.
pub const N_Z: usize = 2;
/// Number of o-goods after embedding (six gadget goods plus the level good).
pub const N_O: usize = 7;
/// Dimension of a single-clause gadget before embedding.
pub const GADGET_DIM: usize = 8;
/// Gadget indices of the purchased bundles.
pub const OBSERVED: [usize; 6] = [1, 2, 4, 5, 7, 8];
/// Gadget indices of the auxiliary (never purchased) bundles.
pub const AUXILIARY: [usize; 3] = [3, 6, 9];
/// Strict revealed relation among `w_1..w_9` of every clause gadget.
pub const GADGET_EDGES: [(usize, usize); 6] = [(1, 2), (2, 3), (4, 5), (5, 6), (7, 8), (8, 9)];

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("construction invariant violated: {0}")]
    Invariant(String),
    #[error("positive-price perturbation {eta} is too large: {reason}")]
    PerturbationTooLarge { eta: Rational, reason: String },
    #[error("positive-price perturbation must be > 0, got {0}")]
    NonPositivePerturbation(Rational),
    #[error("level separation fails: {0}")]
    LevelSeparation(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetMode {
    /// Offsets `M·2^l`.
    #[default]
    Paper,
    /// Offsets `l·C` with `C` bounding every cross-level cost gap.
    Linear,
}

/// Base points `z[i,q]` and their supporting prices `p[i,q]`, `i ∈ 1..=I`,
/// `q ∈ {1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePoints {
    var_count: usize,
    z: Vec<[RVector; 2]>,
    p: Vec<[RVector; 2]>,
}

impl BasePoints {
    pub fn new(var_count: usize) -> BasePoints {
        assert!(var_count >= 1, "need at least one variable");
        let mut z = Vec::with_capacity(var_count);
        let mut p = Vec::with_capacity(var_count);
        for i in 1..=var_count as i64 {
            let ri = Rational::from(i);
            z.push([
                RVector::new(vec![ri.clone(), Rational::frac(1, i)]),
                RVector::new(vec![Rational::frac(2 * i + 1, 2), Rational::frac(2, 2 * i + 1)]),
            ]);
            p.push([
                RVector::new(vec![Rational::frac(1, 2 * i), Rational::frac(i, 2)]),
                RVector::new(vec![Rational::frac(1, 2 * i + 1), Rational::frac(2 * i + 1, 4)]),
            ]);
        }
        let bp = BasePoints { var_count, z, p };
        if let Err(msg) = bp.verify() {
            panic!("base points violate the supporting-price inequalities: {msg}");
        }
        bp
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn z(&self, i: usize, q: usize) -> &RVector {
        &self.z[i - 1][q - 1]
    }

    pub fn p(&self, i: usize, q: usize) -> &RVector {
        &self.p[i - 1][q - 1]
    }

    /// All `(i, q)` in the order `(1,1), (1,2), (2,1), …`.
    pub fn keys(&self) -> impl Iterator<Item = (usize, usize)> + Clone {
        (1..=self.var_count).flat_map(|i| [(i, 1), (i, 2)])
    }

    /// Ordered pairs of distinct keys.
    fn distinct_pairs(&self) -> impl Iterator<Item = ((usize, usize), (usize, usize))> + '_ {
        let keys = self.keys();
        keys.clone().flat_map(move |a| keys.clone().filter(move |&b| b != a).map(move |b| (a, b)))
    }

    /// `p[i,q]·z[i,q] = 1` and `p[i,q]·z[i',q'] > 1` for distinct pairs.
    pub fn verify(&self) -> Result<(), String> {
        let one = Rational::one();
        for (i, q) in self.keys() {
            let own = self.p(i, q).dot(self.z(i, q)).map_err(|e| e.to_string())?;
            if own != one {
                return Err(format!("p[{i},{q}]·z[{i},{q}] = {own}"));
            }
        }
        for ((i, q), (j, r)) in self.distinct_pairs() {
            let v = self.p(i, q).dot(self.z(j, r)).map_err(|e| e.to_string())?;
            if v <= one {
                return Err(format!("p[{i},{q}]·z[{j},{r}] = {v} ≤ 1"));
            }
        }
        Ok(())
    }
}

/// ε and M of the gadget, plus the quantities they were derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetConstants {
    pub epsilon: Rational,
    pub big_m: Rational,
    /// `min p[a]·z[b] − 1` over distinct pairs.
    pub delta: Rational,
    /// `max p[a]·(1,1)`.
    pub max_price_sum: Rational,
}

/// `ε = δ/(2S)` and `M = 1 + max (p[a]·z[b] + ε·p[a]·(1,1))`.
pub fn compute_epsilon_m(bp: &BasePoints) -> GadgetConstants {
    let one = Rational::one();
    let cross = |a: (usize, usize), b: (usize, usize)| bp.p(a.0, a.1).dot(bp.z(b.0, b.1)).expect("2-dim");
    let delta = bp.distinct_pairs().map(|(a, b)| &cross(a, b) - &one).min().expect("at least two keys");
    let max_price_sum = bp.keys().map(|(i, q)| bp.p(i, q).sum()).max().expect("nonempty");
    let epsilon = &delta / &(Rational::from(2) * &max_price_sum);
    let big_m = &one
        + bp.distinct_pairs()
            .map(|(a, b)| cross(a, b) + &epsilon * &bp.p(a.0, a.1).sum())
            .max()
            .expect("nonempty");
    let gc = GadgetConstants { epsilon, big_m, delta, max_price_sum };
    if let Err(msg) = verify_constants(bp, &gc) {
        panic!("computed gadget constants are invalid: {msg}");
    }
    gc
}

/// Checks both defining inequalities of ε and M over every distinct pair.
pub fn verify_constants(bp: &BasePoints, gc: &GadgetConstants) -> Result<(), String> {
    let one = Rational::one();
    for ((i, q), (j, r)) in bp.distinct_pairs() {
        let p = bp.p(i, q);
        let slack = &gc.epsilon * &p.sum();
        let mid = &one + &slack;
        let other = p.dot(bp.z(j, r)).map_err(|e| e.to_string())?;
        if !(one < mid && mid < other) {
            return Err(format!("ε bound fails at ({i},{q}) vs ({j},{r}): 1 < {mid} < {other}"));
        }
        if &other + &slack >= gc.big_m {
            return Err(format!("M bound fails at ({i},{q}) vs ({j},{r})"));
        }
    }
    Ok(())
}

/// Nine bundles and six prices in eight goods for one clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseGadget {
    /// `bundles[t-1] = w_t`.
    pub bundles: Vec<RVector>,
    /// `(k, r_k)` for `k ∈ OBSERVED`.
    pub prices: Vec<(usize, RVector)>,
    /// Hat points `[(var, q) for ẑ¹, (var, q) for ẑ²]` for the literals at
    /// positions i, j, h of the clause.
    pub literal_map: [[(usize, usize); 2]; 3],
}

impl ClauseGadget {
    pub fn bundle(&self, t: usize) -> &RVector {
        &self.bundles[t - 1]
    }

    pub fn price(&self, k: usize) -> Option<&RVector> {
        self.prices.iter().find(|(kk, _)| *kk == k).map(|(_, p)| p)
    }

    /// Strict relation `{(k, t) : r_k·w_t < r_k·w_k}` among the nine bundles.
    pub fn strict_relation(&self) -> BTreeSet<(usize, usize)> {
        strict_relation(&self.prices, &self.bundles)
    }
}

fn strict_relation(prices: &[(usize, RVector)], bundles: &[RVector]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (k, r) in prices {
        let own = r.dot(&bundles[k - 1]).expect("same dimension");
        for (t0, w) in bundles.iter().enumerate() {
            if t0 + 1 != *k && r.dot(w).expect("same dimension") < own {
                out.insert((*k, t0 + 1));
            }
        }
    }
    out
}

fn gadget_edge_set() -> BTreeSet<(usize, usize)> {
    GADGET_EDGES.into_iter().collect()
}

fn e(k: usize) -> RVector {
    RVector::unit(GADGET_DIM, k - 1)
}

fn sum(vs: &[RVector]) -> RVector {
    vs.iter().skip(1).fold(vs[0].clone(), |acc, v| acc.add(v).expect("gadget dimension"))
}

pub fn build_clause_gadget(
    clause: &Clause,
    bp: &BasePoints,
    gc: &GadgetConstants,
) -> Result<ClauseGadget, ReductionError> {
    let hat = |pos: usize, q: usize| {
        let lit = clause.literals()[pos];
        (lit.var, if lit.negated { 3 - q } else { q })
    };
    let literal_map = [0, 1, 2].map(|pos| [hat(pos, 1), hat(pos, 2)]);
    let z = |pos: usize, q: usize| {
        let (v, qq) = hat(pos, q);
        bp.z(v, qq).embed(GADGET_DIM)
    };
    let rho = |pos: usize, q: usize| {
        let (v, qq) = hat(pos, q);
        bp.p(v, qq).embed(GADGET_DIM)
    };
    let (i, j, h) = (0, 1, 2);
    let eps12 = sum(&[e(1), e(2)]).scale(&gc.epsilon);
    let m = &gc.big_m;
    let two_m = m * &Rational::from(2);

    let bundles = vec![
        sum(&[z(i, 2), e(3)]),
        sum(&[z(j, 1), eps12.clone(), e(4)]),
        sum(&[z(j, 1), e(3), e(7)]),
        sum(&[z(j, 2), e(3), e(7)]),
        sum(&[z(h, 1), eps12.clone(), e(5)]),
        sum(&[z(h, 1), e(3), e(8)]),
        sum(&[z(h, 2), e(3), e(8)]),
        sum(&[z(i, 1), eps12, e(6)]),
        sum(&[z(i, 1), e(3)]),
    ];
    let prices = vec![
        (1, sum(&[rho(i, 2), e(3).scale(m), sum(&[e(5), e(6)]).scale(&two_m)])),
        (2, rho(j, 1)),
        // ρ(ẑ²_j): the hat is needed for r_4·w_4 = 1 + M when y_j is negated
        (4, sum(&[rho(j, 2), e(3).scale(m), sum(&[e(4), e(6)]).scale(&two_m)])),
        (5, rho(h, 1)),
        (7, sum(&[rho(h, 2), e(3).scale(m), sum(&[e(4), e(5)]).scale(&two_m)])),
        (8, rho(i, 1)),
    ];
    let gadget = ClauseGadget { bundles, prices, literal_map };
    let rel = gadget.strict_relation();
    if rel != gadget_edge_set() {
        return Err(ReductionError::Invariant(format!("gadget for {clause} reveals {rel:?}")));
    }
    Ok(gadget)
}

/// Knobs for [`reduce`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    pub offset_mode: OffsetMode,
    /// η > 0 added to every zero price coordinate.
    pub positive_prices: Option<Rational>,
}

impl ReduceOptions {
    pub fn new(offset_mode: OffsetMode) -> Self {
        ReduceOptions { offset_mode, positive_prices: None }
    }
}

fn perturb(gadget: &mut ClauseGadget, eta: &Rational) -> Result<(), ReductionError> {
    for (_, r) in gadget.prices.iter_mut() {
        *r = r.iter().map(|c| if c.is_zero() { eta.clone() } else { c.clone() }).collect();
    }
    let rel = gadget.strict_relation();
    if rel != gadget_edge_set() {
        return Err(ReductionError::PerturbationTooLarge {
            eta: eta.clone(),
            reason: format!("gadget relation becomes {rel:?}"),
        });
    }
    Ok(())
}

/// `1 + max |r·x − r·w_k|` over every gadget price and every (z, o)
/// combination of gadget parts across all clauses.
fn linear_step(gadgets: &[ClauseGadget]) -> Rational {
    let mut zs: Vec<RVector> = Vec::new();
    let mut os: Vec<RVector> = Vec::new();
    for g in gadgets {
        for w in &g.bundles {
            zs.push(w.slice(0..N_Z));
            os.push(w.slice(N_Z..GADGET_DIM));
        }
    }
    let mut spread = Rational::zero();
    for g in gadgets {
        for (k, r) in &g.prices {
            let (rz, ro) = (r.slice(0..N_Z), r.slice(N_Z..GADGET_DIM));
            let budget = r.dot(g.bundle(*k)).expect("dim");
            let zc: Vec<Rational> = zs.iter().map(|z| rz.dot(z).expect("dim")).collect();
            let oc: Vec<Rational> = os.iter().map(|o| ro.dot(o).expect("dim")).collect();
            let hi = zc.iter().max().unwrap() + oc.iter().max().unwrap();
            let lo = zc.iter().min().unwrap() + oc.iter().min().unwrap();
            spread = spread.max(&hi - &budget).max(&budget - &lo);
        }
    }
    spread + Rational::one()
}

/// Builds the full dataset. Observations are ordered by clause, then by
/// gadget index; evaluation points likewise.
pub fn reduce(f: &CnfFormula, opts: &ReduceOptions) -> Result<Dataset, ReductionError> {
    let bp = BasePoints::new(f.var_count());
    let gc = compute_epsilon_m(&bp);
    let mut gadgets = f.clauses().iter().map(|c| build_clause_gadget(c, &bp, &gc)).collect::<Result<Vec<_>, _>>()?;

    let eta = match &opts.positive_prices {
        Some(eta) if !eta.is_positive() => return Err(ReductionError::NonPositivePerturbation(eta.clone())),
        Some(eta) => {
            for g in &mut gadgets {
                perturb(g, eta)?;
            }
            Some(eta.clone())
        }
        None => None,
    };

    let offsets: Vec<Rational> = match opts.offset_mode {
        OffsetMode::Paper => (1..=gadgets.len()).map(|l| &gc.big_m * &Rational::pow2(l as u32)).collect(),
        OffsetMode::Linear => {
            let step = linear_step(&gadgets);
            (1..=gadgets.len()).map(|l| &step * &Rational::from(l as i64)).collect()
        }
    };

    let dim = N_Z + N_O;
    let level_unit = RVector::unit(dim, dim - 1);
    let mut observations = Vec::with_capacity(6 * gadgets.len());
    let mut evaluation_points = Vec::with_capacity(3 * gadgets.len());
    for (l0, (g, c)) in gadgets.iter().zip(&offsets).enumerate() {
        let lift = |w: &RVector| w.embed(dim).add(&level_unit.scale(c)).expect("dim");
        for &(k, ref r) in &g.prices {
            observations.push(Observation {
                x: lift(g.bundle(k)),
                p: r.embed(dim).add(&level_unit).expect("dim"),
                clause: Some(l0 + 1),
                k: Some(k),
            });
        }
        for t in AUXILIARY {
            evaluation_points.push(EvaluationPoint { x: lift(g.bundle(t)), clause: Some(l0 + 1), t: Some(t) });
        }
    }

    let ds = Dataset {
        n_z: N_Z,
        n_o: N_O,
        offset_mode: Some(opts.offset_mode),
        epsilon: Some(gc.epsilon.clone()),
        big_m: Some(gc.big_m.clone()),
        positive_prices: eta,
        observations,
        evaluation_points,
    };
    let grid = Grid::build(&ds, GridMode::PerLevelUnion)?;
    check_level_separation(&ds, &grid).map_err(ReductionError::LevelSeparation)?;
    for l in 1..=f.clauses().len() {
        let rel = level_relation(&ds, l);
        if rel != gadget_edge_set() {
            return Err(ReductionError::Invariant(format!("level {l} reveals {rel:?} after embedding")));
        }
    }
    Ok(ds)
}

/// For levels `l' < l`: every observation at level `l` strictly prefers every
/// grid point at level `l'`, and no observation at `l'` can afford any point
/// at level `l`, even weakly.
pub fn check_level_separation(ds: &Dataset, grid: &Grid) -> Result<(), String> {
    let costs = crate::rpcore::graph::part_costs(ds, grid);
    for (k, pc) in costs.iter().enumerate() {
        let Some(level) = grid.levels[grid.observation_points[k]] else {
            return Err("grid has no levels".into());
        };
        for (idx, gp) in grid.points.iter().enumerate() {
            let Some(other) = grid.levels[idx] else { continue };
            let cost = &pc.z[gp.z] + &pc.o[gp.o];
            if other < level && cost >= pc.budget {
                return Err(format!("observation {k} (level {level}) does not strictly prefer point {idx} (level {other})"));
            }
            if other > level && cost <= pc.budget {
                return Err(format!("observation {k} (level {level}) can afford point {idx} (level {other})"));
            }
        }
    }
    Ok(())
}

/// Strict relation among the nine tagged gadget bundles of one level, as
/// `(k, t)` gadget-index pairs.
pub fn level_relation(ds: &Dataset, level: usize) -> BTreeSet<(usize, usize)> {
    let mut bundles: Vec<(usize, &RVector)> = Vec::new();
    let mut prices: Vec<(usize, RVector)> = Vec::new();
    for o in ds.observations.iter().filter(|o| o.clause == Some(level)) {
        let k = o.k.expect("tagged observation");
        bundles.push((k, &o.x));
        prices.push((k, o.p.clone()));
    }
    for e in ds.evaluation_points.iter().filter(|e| e.clause == Some(level)) {
        bundles.push((e.t.expect("tagged point"), &e.x));
    }
    bundles.sort_by_key(|(t, _)| *t);
    let ordered: Vec<RVector> = bundles.iter().map(|(_, w)| (*w).clone()).collect();
    assert_eq!(bundles.iter().map(|(t, _)| *t).collect::<Vec<_>>(), (1..=9).collect::<Vec<_>>());
    strict_relation(&prices, &ordered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{all_sign_patterns, Literal};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn v(xs: &[&str]) -> RVector {
        xs.iter().map(|s| q(s)).collect()
    }

    fn clause(signs: [bool; 3]) -> Clause {
        Clause::new([1, 2, 3].map(|var| Literal { var, negated: signs[var - 1] })).unwrap()
    }

    #[test]
    fn base_points_one_variable() {
        let bp = BasePoints::new(1);
        assert_eq!(bp.z(1, 1), &v(&["1", "1"]));
        assert_eq!(bp.z(1, 2), &v(&["3/2", "2/3"]));
        assert_eq!(bp.p(1, 1), &v(&["1/2", "1/2"]));
        assert_eq!(bp.p(1, 2), &v(&["1/3", "3/4"]));
    }

    #[test]
    fn base_points_cross_value() {
        let bp = BasePoints::new(2);
        assert_eq!(bp.p(1, 1).dot(bp.z(2, 2)).unwrap(), q("29/20"));
    }

    #[test]
    fn constants_two_variables() {
        // oracle: the 12 ordered distinct pairs, enumerated by hand
        let bp = BasePoints::new(2);
        let one = Rational::one();
        let mut gaps = Vec::new();
        for a in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            for b in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                if a != b {
                    gaps.push(&bp.p(a.0, a.1).dot(bp.z(b.0, b.1)).unwrap() - &one);
                }
            }
        }
        assert_eq!(gaps.len(), 12);
        let gc = compute_epsilon_m(&bp);
        assert_eq!(gc.delta, gaps.into_iter().min().unwrap());
        assert_eq!(gc.delta, q("1/40"));
        assert_eq!(gc.max_price_sum, q("29/20"));
        assert_eq!(gc.epsilon, q("1/116"));
    }

    #[test]
    fn constants_one_variable() {
        let bp = BasePoints::new(1);
        let gc = compute_epsilon_m(&bp);
        // p[1,1]·z[1,2] − 1 = 1/12, p[1,2]·z[1,1] − 1 = 1/12
        assert_eq!(gc.delta, q("1/12"));
        assert!(verify_constants(&bp, &gc).is_ok());
    }

    #[test]
    fn gadget_first_bundle() {
        let bp = BasePoints::new(3);
        let gc = compute_epsilon_m(&bp);
        let g = build_clause_gadget(&clause([false; 3]), &bp, &gc).unwrap();
        assert_eq!(g.bundle(1), &v(&["3/2", "2/3", "1", "0", "0", "0", "0", "0"]));
        let neg = build_clause_gadget(&clause([true, false, false]), &bp, &gc).unwrap();
        assert_eq!(neg.bundle(1), &v(&["1", "1", "1", "0", "0", "0", "0", "0"]));
    }

    #[test]
    fn gadget_table_cells() {
        let bp = BasePoints::new(3);
        let gc = compute_epsilon_m(&bp);
        let g = build_clause_gadget(&clause([false; 3]), &bp, &gc).unwrap();
        assert_eq!(g.price(1).unwrap().dot(g.bundle(1)).unwrap(), &Rational::one() + &gc.big_m);
        assert_eq!(g.price(2).unwrap().dot(g.bundle(3)).unwrap(), Rational::one());
        assert_eq!(g.price(4).unwrap().dot(g.bundle(4)).unwrap(), &Rational::one() + &gc.big_m);
        assert_eq!(g.price(8).unwrap().dot(g.bundle(9)).unwrap(), Rational::one());
    }

    #[test]
    fn gadget_relation_every_sign_pattern() {
        let bp = BasePoints::new(3);
        let gc = compute_epsilon_m(&bp);
        for m in 0..8u8 {
            let c = clause([m & 4 != 0, m & 2 != 0, m & 1 != 0]);
            let g = build_clause_gadget(&c, &bp, &gc).unwrap();
            assert_eq!(g.strict_relation(), gadget_edge_set(), "{c}");
        }
    }

    #[test]
    fn unhatted_fourth_price_breaks_negated_middle_literal() {
        // documents why r_4 uses the hatted supporting price
        let bp = BasePoints::new(3);
        let gc = compute_epsilon_m(&bp);
        let mut g = build_clause_gadget(&clause([false, true, false]), &bp, &gc).unwrap();
        let m = &gc.big_m;
        let two_m = m * &Rational::from(2);
        let unhatted = sum(&[
            bp.p(2, 2).embed(GADGET_DIM),
            e(3).scale(m),
            sum(&[e(4), e(6)]).scale(&two_m),
        ]);
        g.prices[2].1 = unhatted;
        assert_ne!(g.strict_relation(), gadget_edge_set());
    }

    #[test]
    fn w2_separates_w3_from_w4() {
        // r_1 reveals w_2 but not w_4, while w_2 reveals w_3 (its z-part is
        // ẑ¹_j shifted by ε(1,1)) but not w_4
        let bp = BasePoints::new(3);
        let gc = compute_epsilon_m(&bp);
        let g = build_clause_gadget(&clause([false; 3]), &bp, &gc).unwrap();
        let rel = g.strict_relation();
        assert!(rel.contains(&(1, 2)) && rel.contains(&(2, 3)));
        assert!(!rel.contains(&(1, 3)) && !rel.contains(&(1, 4)) && !rel.contains(&(2, 4)));
    }

    #[test]
    fn doubling_offsets_shift_costs_by_4m_on_level_two() {
        let f = CnfFormula::from_triples(3, &[[1, 2, 3], [-1, 2, -3]]).unwrap();
        let ds = reduce(&f, &ReduceOptions::new(OffsetMode::Paper)).unwrap();
        let bp = BasePoints::new(3);
        let gc = compute_epsilon_m(&bp);
        let g = build_clause_gadget(&f.clauses()[1], &bp, &gc).unwrap();
        let four_m = &gc.big_m * &Rational::from(4);
        let level2: Vec<&Observation> = ds.observations.iter().filter(|o| o.clause == Some(2)).collect();
        for o in &level2 {
            let k = o.k.unwrap();
            for t in 1..=9 {
                let lifted = ds
                    .observations
                    .iter()
                    .map(|o| (o.clause, o.k, &o.x))
                    .chain(ds.evaluation_points.iter().map(|e| (e.clause, e.t, &e.x)))
                    .find(|(c, tt, _)| *c == Some(2) && *tt == Some(t))
                    .unwrap()
                    .2;
                let diff = &o.p.dot(lifted).unwrap() - &g.price(k).unwrap().dot(g.bundle(t)).unwrap();
                assert_eq!(diff, four_m);
            }
        }
    }

    #[test]
    fn sizes_and_modes() {
        let f = all_sign_patterns();
        for mode in [OffsetMode::Paper, OffsetMode::Linear] {
            let ds = reduce(&f, &ReduceOptions::new(mode)).unwrap();
            assert_eq!(ds.observations.len(), 48);
            assert_eq!(ds.evaluation_points.len(), 24);
            assert!(ds.observations.iter().all(|o| o.x.dim() == 9 && o.p.dim() == 9));
        }
    }

    #[test]
    fn positive_prices_perturbation() {
        let f = CnfFormula::from_triples(3, &[[1, 2, 3], [-1, -2, 3]]).unwrap();
        let eta = q("1/1000000");
        let opts = ReduceOptions { offset_mode: OffsetMode::Linear, positive_prices: Some(eta) };
        let ds = reduce(&f, &opts).unwrap();
        assert!(ds.has_positive_prices());

        let huge = ReduceOptions { offset_mode: OffsetMode::Paper, positive_prices: Some(q("1000")) };
        assert!(matches!(reduce(&f, &huge), Err(ReductionError::PerturbationTooLarge { .. })));
        let zero = ReduceOptions { offset_mode: OffsetMode::Paper, positive_prices: Some(q("0")) };
        assert!(matches!(reduce(&f, &zero), Err(ReductionError::NonPositivePerturbation(_))));
    }

    #[test]
    fn reduce_is_deterministic() {
        let f = CnfFormula::from_triples(4, &[[1, -2, 4], [2, 3, -4]]).unwrap();
        let opts = ReduceOptions::new(OffsetMode::Linear);
        assert_eq!(reduce(&f, &opts).unwrap(), reduce(&f, &opts).unwrap());
    }
}
