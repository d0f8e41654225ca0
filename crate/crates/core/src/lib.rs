//! Exact-arithmetic reduction from 3SAT to consumption datasets, and a
//! decision procedure for separable rationalizability over a finite grid.

pub mod cnf;
pub mod numerics;
pub mod reduction;
pub mod rpcore;
pub mod satcore;
pub mod septest;
