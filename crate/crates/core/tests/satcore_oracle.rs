use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seprat_core::cnf::{brute_force_sat, random_3sat, Assignment, CnfFormula};
use seprat_core::satcore::{solve, SatInstance, SatResult, Solver, SolverConfig};

/// Independent enumeration over integer clauses.
fn enumerate(var_count: usize, clauses: &[Vec<i32>]) -> bool {
    (0u32..1 << var_count).any(|bits| {
        clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = (bits >> (l.unsigned_abs() - 1)) & 1 == 1;
                if l > 0 { v } else { !v }
            })
        })
    })
}

fn random_cnf(rng: &mut impl Rng, var_count: usize) -> Vec<Vec<i32>> {
    let n_clauses = rng.gen_range(1..=5 * var_count);
    (0..n_clauses)
        .map(|_| {
            let len = rng.gen_range(1..=4);
            (0..len)
                .map(|_| {
                    let v = rng.gen_range(1..=var_count) as i32;
                    if rng.gen_bool(0.5) { v } else { -v }
                })
                .collect()
        })
        .collect()
}

#[test]
fn agrees_with_enumeration_on_random_cnfs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = [0usize; 2];
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let clauses = random_cnf(&mut rng, n);
        let inst = SatInstance::new(n, clauses.clone()).unwrap();
        let res = solve(&inst, SolverConfig::default()).unwrap();
        assert_eq!(res.is_sat(), enumerate(n, &clauses), "{}", inst.to_dimacs());
        if let SatResult::Sat(model) = &res {
            assert!(inst.is_satisfied_by(model));
        }
        counts[res.is_sat() as usize] += 1;
    }
    assert!(counts[0] > 20 && counts[1] > 20, "unbalanced corpus {counts:?}");
}

#[test]
fn agrees_with_brute_force_on_random_3sat() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(3..=8);
        let l = rng.gen_range(1..=30);
        let f = random_3sat(&mut rng, n, l);
        let inst = SatInstance::new(n, f.int_clauses()).unwrap();
        let res = solve(&inst, SolverConfig::default()).unwrap();
        let bf = brute_force_sat(&f).unwrap();
        assert_eq!(res.is_sat(), bf.is_some());
        if let Some(m) = res.model() {
            assert!(f.evaluate(&Assignment::new(m.to_vec())));
        }
    }
}

#[test]
fn incremental_clauses_match_fresh_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let n = rng.gen_range(3..=8);
        let clauses = random_cnf(&mut rng, n);
        let mut solver = Solver::new(n, SolverConfig::default());
        for (i, c) in clauses.iter().enumerate() {
            solver.add_clause(c).unwrap();
            let res = solver.solve().unwrap();
            assert_eq!(res.is_sat(), enumerate(n, &clauses[..=i]));
        }
    }
}

#[test]
fn pigeonhole_is_unsat() {
    // 4 pigeons, 3 holes; p(i,h) = 3i + h + 1
    let var = |i: i32, h: i32| 3 * i + h + 1;
    let mut clauses: Vec<Vec<i32>> = (0..4).map(|i| (0..3).map(|h| var(i, h)).collect()).collect();
    for h in 0..3 {
        for i in 0..4 {
            for j in i + 1..4 {
                clauses.push(vec![-var(i, h), -var(j, h)]);
            }
        }
    }
    let inst = SatInstance::new(12, clauses).unwrap();
    assert_eq!(solve(&inst, SolverConfig::default()).unwrap(), SatResult::Unsat);
}

#[test]
fn dimacs_round_trip_through_both_models() {
    let f = CnfFormula::from_triples(4, &[[1, -2, 3], [-1, 2, 4]]).unwrap();
    let inst = SatInstance::from_dimacs(&f.to_dimacs()).unwrap();
    assert_eq!(inst.clauses(), f.int_clauses().as_slice());
}
