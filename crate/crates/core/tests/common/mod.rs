#![allow(dead_code)]

use rand::Rng;
use seprat_core::cnf::{brute_force_sat, random_3sat, CnfFormula};
use seprat_core::numerics::{RVector, Rational};
use seprat_core::rpcore::{Dataset, EvaluationPoint, Observation};

fn small_rational(rng: &mut impl Rng, lo: i64) -> Rational {
    Rational::frac(rng.gen_range(lo..=4), rng.gen_range(1..=3))
}

fn bundle(rng: &mut impl Rng, dim: usize, lo: i64) -> RVector {
    (0..dim).map(|_| small_rational(rng, lo)).collect()
}

/// Random dataset that did not come from a reduction, with at most
/// `max_z` bundles in total (so at most `max_z` distinct z-parts).
pub fn random_foreign_dataset(rng: &mut impl Rng, max_z: usize) -> Dataset {
    let n_z = rng.gen_range(1..=2);
    let n_o = rng.gen_range(1..=2);
    let dim = n_z + n_o;
    let n_obs = rng.gen_range(1..=max_z.min(4));
    let n_eval = rng.gen_range(0..=max_z - n_obs);
    let observations = (0..n_obs)
        .map(|_| {
            let mut p = bundle(rng, dim, 0);
            if p.iter().all(Rational::is_zero) {
                p = RVector::from_ints(&vec![1; dim]);
            }
            Observation { x: bundle(rng, dim, 0), p, clause: None, k: None }
        })
        .collect();
    let evaluation_points =
        (0..n_eval).map(|_| EvaluationPoint { x: bundle(rng, dim, 0), clause: None, t: None }).collect();
    let ds = Dataset::plain(n_z, n_o, observations, evaluation_points);
    ds.validate().expect("generated dataset is valid");
    ds
}

/// Seeded corpus: `count` random formulas with `3 ≤ I ≤ max_vars`,
/// `1 ≤ L ≤ max_clauses`.
pub fn random_formulas(rng: &mut impl Rng, count: usize, max_vars: usize, max_clauses: usize) -> Vec<CnfFormula> {
    (0..count)
        .map(|_| {
            let i = rng.gen_range(3..=max_vars);
            let l = rng.gen_range(1..=max_clauses);
            random_3sat(rng, i, l)
        })
        .collect()
}

pub fn satisfiable(f: &CnfFormula) -> bool {
    brute_force_sat(f).expect("small formula").is_some()
}
