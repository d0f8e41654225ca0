//! A small CDCL SAT solver.
//!
//! Two-watched-literal propagation, first-UIP clause learning, VSIDS-style
//! activities with a lowest-index tie-break, phase saving and Luby restarts.
//! There is no randomness anywhere: the same clause sequence always produces
//! the same verdict and the same model. The solver is incremental; clauses may
//! be added between calls to [`Solver::solve`] and learned clauses are kept.

use thiserror::Error;

use crate::cnf::{parse_dimacs_raw, write_dimacs, CnfError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("literal 0 is not allowed inside a clause")]
    ZeroLiteral,
    #[error("literal {lit} out of range for {var_count} variables")]
    LiteralOutOfRange { lit: i32, var_count: usize },
    #[error("conflict budget of {limit} exhausted")]
    BudgetExhausted { limit: u64 },
    #[error("internal error: model falsifies clause {0}")]
    ModelCheckFailed(usize),
    #[error(transparent)]
    Dimacs(#[from] CnfError),
}

/// A CNF over variables `1..=var_count` with clauses of any width.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SatInstance {
    var_count: usize,
    clauses: Vec<Vec<i32>>,
}

fn check_clause(var_count: usize, clause: &[i32]) -> Result<(), SatError> {
    for &lit in clause {
        if lit == 0 {
            return Err(SatError::ZeroLiteral);
        }
        if lit.unsigned_abs() as usize > var_count {
            return Err(SatError::LiteralOutOfRange { lit, var_count });
        }
    }
    Ok(())
}

impl SatInstance {
    pub fn new(var_count: usize, clauses: Vec<Vec<i32>>) -> Result<Self, SatError> {
        for c in &clauses {
            check_clause(var_count, c)?;
        }
        Ok(SatInstance { var_count, clauses })
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Returns a copy with one more clause. An empty clause makes the instance
    /// unsatisfiable.
    pub fn add_clause_incremental(&self, clause: &[i32]) -> Result<SatInstance, SatError> {
        check_clause(self.var_count, clause)?;
        let mut next = self.clone();
        next.clauses.push(clause.to_vec());
        Ok(next)
    }

    pub fn to_dimacs(&self) -> String {
        write_dimacs(self.var_count, &self.clauses)
    }

    pub fn from_dimacs(text: &str) -> Result<Self, SatError> {
        let raw = parse_dimacs_raw(text)?;
        Self::new(raw.var_count, raw.clauses)
    }

    /// Whether `model` (indexed by variable − 1) satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| lit_true(model, l)))
    }
}

fn lit_true(model: &[bool], lit: i32) -> bool {
    model[lit.unsigned_abs() as usize - 1] == (lit > 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Model indexed by variable − 1.
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverConfig {
    /// Total conflicts allowed per `solve` call; `None` means unbounded.
    pub conflict_limit: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
}

/// Solves a standalone instance.
pub fn solve(inst: &SatInstance, config: SolverConfig) -> Result<SatResult, SatError> {
    let mut s = Solver::new(inst.var_count, config);
    for c in &inst.clauses {
        s.add_clause(c)?;
    }
    let result = s.solve()?;
    if let SatResult::Sat(model) = &result {
        if let Some(i) = inst.clauses.iter().position(|c| !c.iter().any(|&l| lit_true(model, l))) {
            return Err(SatError::ModelCheckFailed(i));
        }
    }
    Ok(result)
}

// Internal literal: 2*var + (1 if negative).
type Lit = u32;

fn to_lit(l: i32) -> Lit {
    let v = l.unsigned_abs() - 1;
    2 * v + u32::from(l < 0)
}

fn lit_var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Value {
    True,
    False,
    Unassigned,
}

struct ClauseData {
    lits: Vec<Lit>,
}

pub struct Solver {
    var_count: usize,
    config: SolverConfig,
    clauses: Vec<ClauseData>,
    // original (problem) clauses in external form, for model verification
    originals: Vec<Vec<i32>>,
    watches: Vec<Vec<usize>>,
    values: Vec<Value>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    inconsistent: bool,
    stats: SolverStats,
}

const VAR_DECAY: f64 = 0.95;
const RESTART_UNIT: u64 = 64;

fn luby(mut i: u64) -> u64 {
    // 1, 1, 2, 1, 1, 2, 4, ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

impl Solver {
    pub fn new(var_count: usize, config: SolverConfig) -> Self {
        Solver {
            var_count,
            config,
            clauses: Vec::new(),
            originals: Vec::new(),
            watches: vec![Vec::new(); 2 * var_count],
            values: vec![Value::Unassigned; var_count],
            level: vec![0; var_count],
            reason: vec![None; var_count],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; var_count],
            var_inc: 1.0,
            phase: vec![false; var_count],
            seen: vec![false; var_count],
            inconsistent: false,
            stats: SolverStats::default(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    fn value(&self, l: Lit) -> Value {
        match self.values[lit_var(l)] {
            Value::Unassigned => Value::Unassigned,
            v => {
                let positive = v == Value::True;
                if positive == (l & 1 == 0) {
                    Value::True
                } else {
                    Value::False
                }
            }
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = lit_var(l);
        debug_assert_eq!(self.values[v], Value::Unassigned);
        self.values[v] = if l & 1 == 0 { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn backtrack(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let start = self.trail_lim[target];
        for &l in &self.trail[start..] {
            let v = lit_var(l);
            self.phase[v] = l & 1 == 0;
            self.values[v] = Value::Unassigned;
            self.reason[v] = None;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(target);
        self.qhead = start;
    }

    /// Adds a clause between solve calls. Tautologies are dropped; an empty
    /// clause (after removing root-level false literals) makes the solver
    /// permanently unsatisfiable.
    pub fn add_clause(&mut self, clause: &[i32]) -> Result<(), SatError> {
        check_clause(self.var_count, clause)?;
        self.originals.push(clause.to_vec());
        self.backtrack(0);
        if self.inconsistent {
            return Ok(());
        }
        let mut lits: Vec<Lit> = clause.iter().map(|&l| to_lit(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == neg(w[1])) {
            return Ok(());
        }
        if lits.iter().any(|&l| self.value(l) == Value::True) {
            return Ok(());
        }
        lits.retain(|&l| self.value(l) != Value::False);
        match lits.len() {
            0 => self.inconsistent = true,
            1 => {
                self.enqueue(lits[0], None);
                if self.propagate().is_some() {
                    self.inconsistent = true;
                }
            }
            _ => {
                self.attach(lits);
            }
        }
        Ok(())
    }

    fn attach(&mut self, lits: Vec<Lit>) -> usize {
        let idx = self.clauses.len();
        self.watches[lits[0] as usize].push(idx);
        self.watches[lits[1] as usize].push(idx);
        self.clauses.push(ClauseData { lits });
        idx
    }

    /// Returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let assigned = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = neg(assigned);
            let mut watchers = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut conflict = None;
            while i < watchers.len() {
                let ci = watchers[i];
                {
                    let lits = &mut self.clauses[ci].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[ci].lits[0];
                if self.value(first) == Value::True {
                    i += 1;
                    continue;
                }
                let len = self.clauses[ci].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let cand = self.clauses[ci].lits[k];
                    if self.value(cand) != Value::False {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[cand as usize].push(ci);
                        watchers.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                match self.value(first) {
                    Value::False => {
                        conflict = Some(ci);
                        break;
                    }
                    Value::Unassigned => self.enqueue(first, Some(ci)),
                    Value::True => unreachable!(),
                }
                i += 1;
            }
            self.watches[false_lit as usize] = watchers;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP analysis. Returns the learned clause (asserting literal first)
    /// and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();

        loop {
            let lits = self.clauses[confl].lits.clone();
            let skip = usize::from(p.is_some());
            for &q in &lits[skip..] {
                let v = lit_var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[lit_var(self.trail[idx])] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[lit_var(pl)] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
            confl = self.reason[lit_var(pl)].expect("implied literal has a reason");
        }
        learnt[0] = neg(p.expect("conflict at positive level"));
        for &l in &learnt[1..] {
            self.seen[lit_var(l)] = false;
        }

        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[lit_var(learnt[i])] > self.level[lit_var(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[lit_var(learnt[1])];
        }
        self.var_inc /= VAR_DECAY;
        (learnt, back)
    }

    fn pick_branch(&self) -> Option<Lit> {
        let mut best: Option<usize> = None;
        for v in 0..self.var_count {
            if self.values[v] != Value::Unassigned {
                continue;
            }
            match best {
                Some(b) if self.activity[v] <= self.activity[b] => {}
                _ => best = Some(v),
            }
        }
        best.map(|v| 2 * v as u32 + u32::from(!self.phase[v]))
    }

    pub fn solve(&mut self) -> Result<SatResult, SatError> {
        self.backtrack(0);
        if self.inconsistent {
            return Ok(SatResult::Unsat);
        }
        if self.propagate().is_some() {
            self.inconsistent = true;
            return Ok(SatResult::Unsat);
        }
        let mut conflicts_here = 0u64;
        let mut restart_idx = 0u64;
        let mut until_restart = luby(restart_idx) * RESTART_UNIT;

        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.inconsistent = true;
                    return Ok(SatResult::Unsat);
                }
                if let Some(limit) = self.config.conflict_limit {
                    if conflicts_here > limit {
                        self.backtrack(0);
                        return Err(SatError::BudgetExhausted { limit });
                    }
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                self.stats.learned += 1;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(asserting, Some(ci));
                }
                until_restart = until_restart.saturating_sub(1);
                continue;
            }
            if until_restart == 0 {
                self.stats.restarts += 1;
                restart_idx += 1;
                until_restart = luby(restart_idx) * RESTART_UNIT;
                self.backtrack(0);
                continue;
            }
            match self.pick_branch() {
                None => {
                    let model: Vec<bool> = self.values.iter().map(|&v| v == Value::True).collect();
                    self.backtrack(0);
                    if let Some(i) = self.originals.iter().position(|c| !c.iter().any(|&l| lit_true(&model, l))) {
                        return Err(SatError::ModelCheckFailed(i));
                    }
                    return Ok(SatResult::Sat(model));
                }
                Some(l) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, None);
                }
            }
        }
    }
}
