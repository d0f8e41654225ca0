//! 3SAT formulas: DIMACS input, validation, and a brute-force oracle.

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

/// Largest variable count the enumeration oracle accepts.
pub const BRUTE_FORCE_MAX_VARS: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("brute force refuses {vars} variables (limit {limit})")]
    TooManyVariables { vars: usize, limit: usize },
    #[error("invalid formula: {0}")]
    Invalid(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> CnfError {
    CnfError::Parse { line, msg: msg.into() }
}

/// A DIMACS body with arbitrary clause widths, before any 3SAT validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCnf {
    pub var_count: usize,
    pub clauses: Vec<Vec<i32>>,
    /// Line on which each clause's terminating `0` appeared.
    pub clause_lines: Vec<usize>,
}

/// Reads the `p cnf` dialect: comments (`c ...`) may appear anywhere before
/// or between clauses, clauses are `0`-terminated and may span lines.
pub fn parse_dimacs_raw(text: &str) -> Result<RawCnf, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut clause_lines = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate header"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(parse_err(lineno, format!("malformed header {trimmed:?}")));
            }
            let vars: usize = fields[2]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad variable count {:?}", fields[2])))?;
            let count: usize = fields[3]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad clause count {:?}", fields[3])))?;
            header = Some((vars, count));
            continue;
        }
        let (vars, count) = header.ok_or_else(|| parse_err(lineno, "clause data before 'p cnf' header"))?;
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| parse_err(lineno, format!("unexpected token {tok:?}")))?;
            if lit == 0 {
                if clauses.len() == count {
                    return Err(parse_err(lineno, format!("more than {count} clauses")));
                }
                clauses.push(std::mem::take(&mut current));
                clause_lines.push(lineno);
            } else {
                if lit.unsigned_abs() as usize > vars {
                    return Err(parse_err(lineno, format!("literal {lit} out of range 1..={vars}")));
                }
                if clauses.len() == count {
                    return Err(parse_err(lineno, format!("trailing literal {lit} after {count} clauses")));
                }
                current.push(lit as i32);
            }
        }
    }

    let (var_count, count) = header.ok_or_else(|| parse_err(last_line.max(1), "missing 'p cnf' header"))?;
    if !current.is_empty() {
        return Err(parse_err(last_line, "unterminated clause (missing 0)"));
    }
    if clauses.len() != count {
        return Err(parse_err(last_line, format!("header declares {count} clauses, found {}", clauses.len())));
    }
    Ok(RawCnf { var_count, clauses, clause_lines })
}

/// Writes clauses in the same dialect [`parse_dimacs_raw`] reads.
pub fn write_dimacs(var_count: usize, clauses: &[Vec<i32>]) -> String {
    let mut out = format!("p cnf {} {}\n", var_count, clauses.len());
    for clause in clauses {
        for lit in clause {
            out.push_str(&lit.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    pub fn to_dimacs(self) -> i32 {
        if self.negated {
            -(self.var as i32)
        } else {
            self.var as i32
        }
    }

    pub fn eval(self, a: &Assignment) -> bool {
        a.value(self.var) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// Three literals over three distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clause([Literal; 3]);

impl Clause {
    pub fn new(lits: [Literal; 3]) -> Result<Self, CnfError> {
        let [a, b, c] = lits;
        if a.var == b.var || a.var == c.var || b.var == c.var {
            return Err(CnfError::Invalid(format!("clause {a} ∨ {b} ∨ {c} repeats a variable")));
        }
        if lits.iter().any(|l| l.var == 0) {
            return Err(CnfError::Invalid("variable index 0".into()));
        }
        Ok(Clause(lits))
    }

    pub fn from_dimacs(lits: [i32; 3]) -> Result<Self, CnfError> {
        let conv = |l: i32| Literal { var: l.unsigned_abs() as usize, negated: l < 0 };
        Self::new([conv(lits[0]), conv(lits[1]), conv(lits[2])])
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.0
    }

    pub fn eval(&self, a: &Assignment) -> bool {
        self.0.iter().any(|l| l.eval(a))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} ∨ {} ∨ {})", self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    var_count: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(var_count: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if var_count == 0 {
            return Err(CnfError::Invalid("formula needs at least one variable".into()));
        }
        for c in &clauses {
            if let Some(l) = c.literals().iter().find(|l| l.var > var_count) {
                return Err(CnfError::Invalid(format!("{l} out of range 1..={var_count}")));
            }
        }
        Ok(CnfFormula { var_count, clauses })
    }

    /// Convenience constructor from DIMACS-style signed triples.
    pub fn from_triples(var_count: usize, triples: &[[i32; 3]]) -> Result<Self, CnfError> {
        let clauses = triples.iter().map(|t| Clause::from_dimacs(*t)).collect::<Result<_, _>>()?;
        Self::new(var_count, clauses)
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn evaluate(&self, a: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.eval(a))
    }

    pub fn to_dimacs(&self) -> String {
        let raw: Vec<Vec<i32>> =
            self.clauses.iter().map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect()).collect();
        write_dimacs(self.var_count, &raw)
    }

    /// The formula as signed integer clauses.
    pub fn int_clauses(&self) -> Vec<Vec<i32>> {
        self.clauses.iter().map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect()).collect()
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "⊤");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses a 3SAT instance: every clause must have exactly three literals over
/// three distinct variables. Duplicate and complementary literals are rejected.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let raw = parse_dimacs_raw(text)?;
    if raw.var_count == 0 {
        return Err(parse_err(1, "variable count must be positive"));
    }
    let mut clauses = Vec::with_capacity(raw.clauses.len());
    for (lits, &line) in raw.clauses.iter().zip(&raw.clause_lines) {
        let triple: [i32; 3] = lits
            .as_slice()
            .try_into()
            .map_err(|_| parse_err(line, format!("clause has {} literals, expected 3", lits.len())))?;
        let clause = Clause::from_dimacs(triple)
            .map_err(|_| parse_err(line, format!("clause {lits:?} does not use 3 distinct variables")))?;
        clauses.push(clause);
    }
    CnfFormula::new(raw.var_count, clauses)
}

/// Truth table over variables `1..=var_count`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all(var_count: usize, value: bool) -> Self {
        Assignment(vec![value; var_count])
    }

    pub fn var_count(&self) -> usize {
        self.0.len()
    }

    /// Value of 1-based variable `var`.
    pub fn value(&self, var: usize) -> bool {
        self.0[var - 1]
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

/// Enumerates assignments from all-false to all-true, treating `x1` as the most
/// significant position, and returns the first satisfying one.
pub fn brute_force_sat(f: &CnfFormula) -> Result<Option<Assignment>, CnfError> {
    let n = f.var_count();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(CnfError::TooManyVariables { vars: n, limit: BRUTE_FORCE_MAX_VARS });
    }
    let mut values = vec![false; n];
    for bits in 0u64..(1u64 << n) {
        for (i, v) in values.iter_mut().enumerate() {
            *v = bits >> (n - 1 - i) & 1 == 1;
        }
        let a = Assignment(values.clone());
        if f.evaluate(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Uniform random 3SAT: each clause picks three distinct variables and
/// independent signs.
pub fn random_3sat<R: Rng + ?Sized>(rng: &mut R, var_count: usize, clause_count: usize) -> CnfFormula {
    assert!(var_count >= 3, "3SAT needs at least three variables");
    let clauses = (0..clause_count)
        .map(|_| {
            let vars = sample(rng, var_count, 3);
            let lits = [0, 1, 2].map(|i| Literal { var: vars.index(i) + 1, negated: rng.gen_bool(0.5) });
            Clause::new(lits).expect("sampled variables are distinct")
        })
        .collect();
    CnfFormula::new(var_count, clauses).expect("in range by construction")
}

/// The eight clauses over `x1, x2, x3` with every sign pattern; unsatisfiable.
pub fn all_sign_patterns() -> CnfFormula {
    let clauses = (0..8u8)
        .map(|m| {
            Clause::new([1, 2, 3].map(|v| Literal { var: v, negated: m >> (3 - v) & 1 == 1 }))
                .expect("distinct")
        })
        .collect();
    CnfFormula::new(3, clauses).expect("in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_single_clause() {
        let f = parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
        assert_eq!(f.var_count(), 3);
        assert_eq!(f.clauses(), &[Clause::new([Literal::pos(1), Literal::pos(2), Literal::pos(3)]).unwrap()]);
    }

    #[test]
    fn parse_two_clauses_with_comments() {
        let f = parse_dimacs("c hello\np cnf 3 2\n1 2 3 0\nc between\n-1 -2\n -3 0\n").unwrap();
        assert_eq!(f.clauses().len(), 2);
        assert!(f.clauses()[1].literals().iter().all(|l| l.negated));
    }

    #[test]
    fn parse_rejections() {
        let cases = [
            ("p cnf 2 1\n1 -1 2 0\n", 2),
            ("p cnf 3 1\n1 1 2 0\n", 2),
            ("p cnf 3 1\n1 2 0\n", 2),
            ("p cnf 3 1\n1 2 4 0\n", 2),
            ("p cnf 3 1\n1 2 3 0\n4\n", 3),
            ("p cnf 3 1\n1 2 3 0 x\n", 2),
            ("p cnf 3 2\n1 2 3 0\n", 2),
            ("p cnf 3 1\n1 2 3\n", 2),
            ("p dnf 3 1\n1 2 3 0\n", 1),
            ("1 2 3 0\n", 1),
            ("", 1),
        ];
        for (text, line) in cases {
            match parse_dimacs(text) {
                Err(CnfError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        let f = parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
        let a = brute_force_sat(&f).unwrap().unwrap();
        assert_eq!(a.values(), &[false, false, true]);

        assert_eq!(brute_force_sat(&all_sign_patterns()).unwrap(), None);

        let empty = CnfFormula::new(1, vec![]).unwrap();
        assert_eq!(brute_force_sat(&empty).unwrap().unwrap().values(), &[false]);

        let big = CnfFormula::new(26, vec![]).unwrap();
        assert!(matches!(brute_force_sat(&big), Err(CnfError::TooManyVariables { vars: 26, .. })));
    }

    #[test]
    fn dimacs_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = random_3sat(&mut rng, 5, 7);
            assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
            if let Some(a) = brute_force_sat(&f).unwrap() {
                assert!(f.evaluate(&a));
            }
        }
    }
}
