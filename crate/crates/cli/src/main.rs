use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use seprat_core::cnf::{brute_force_sat, parse_dimacs, random_3sat, Assignment, CnfFormula, BRUTE_FORCE_MAX_VARS};
use seprat_core::numerics::Rational;
use seprat_core::reduction::{reduce, OffsetMode, ReduceOptions};
use seprat_core::rpcore::{revealed_relation, to_dot, Dataset, Grid, GridMode, TieMode};
use seprat_core::satcore::{self, SatError, SatInstance, SatResult, SolverConfig};
use seprat_core::septest::{decide, Method, SepError, TestVerdict};

const EXIT_DISAGREE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NEGATIVE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "seprat", version, about = "3SAT to separable-rationalizability reduction and tester")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a DIMACS 3SAT formula to a dataset (JSON).
    Reduce {
        cnf: PathBuf,
        #[command(flatten)]
        reduce: ReduceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide separable rationalizability of a dataset on its grid.
    Test {
        dataset: PathBuf,
        #[command(flatten)]
        decide: DecideArgs,
        /// Exit 3 on a not-rationalizable verdict.
        #[arg(long)]
        exit_code: bool,
    },
    /// Solve a DIMACS formula with the built-in CDCL solver.
    Sat {
        cnf: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        /// Exit 3 when unsatisfiable.
        #[arg(long)]
        exit_code: bool,
    },
    /// Check that the reduction's verdict matches satisfiability of the formula.
    Verify {
        cnf: PathBuf,
        #[command(flatten)]
        reduce: ReduceArgs,
        #[command(flatten)]
        decide: DecideArgs,
    },
    /// Time reduce + decide on seeded random formulas; writes CSV.
    Bench {
        /// Variable counts, e.g. `3..5` or `3,4`.
        #[arg(long, default_value = "3..4")]
        vars: String,
        /// Clause counts, e.g. `1..3` or `1,2`.
        #[arg(long, default_value = "1..2")]
        clauses: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        reduce: ReduceArgs,
        #[command(flatten)]
        decide: DecideArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the revealed relation of a dataset's grid in Graphviz format.
    ExportDot {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = GridArg::PerLevelUnion)]
        grid_mode: GridArg,
        #[arg(long, value_enum, default_value_t = TieArg::Auto)]
        tie_mode: TieArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct ReduceArgs {
    #[arg(long, value_enum, default_value_t = OffsetArg::Paper)]
    offset_mode: OffsetArg,
    /// Add this rational (e.g. `1/1000000`) to every zero price coordinate.
    #[arg(long)]
    positive_prices: Option<String>,
}

#[derive(Args, Clone)]
struct DecideArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = TieArg::Auto)]
    tie_mode: TieArg,
    #[arg(long, value_enum, default_value_t = GridArg::PerLevelUnion)]
    grid_mode: GridArg,
    /// SAT conflicts allowed per solver call.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OffsetArg {
    Paper,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Bruteforce,
    Cegar,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Auto,
    Weak,
    Strict,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    PerLevelUnion,
    FullProduct,
}

impl From<OffsetArg> for OffsetMode {
    fn from(a: OffsetArg) -> Self {
        match a {
            OffsetArg::Paper => OffsetMode::Paper,
            OffsetArg::Linear => OffsetMode::Linear,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(a: MethodArg) -> Self {
        match a {
            MethodArg::Auto => Method::Auto,
            MethodArg::Bruteforce => Method::Bruteforce,
            MethodArg::Cegar => Method::Cegar,
        }
    }
}

impl From<GridArg> for GridMode {
    fn from(a: GridArg) -> Self {
        match a {
            GridArg::PerLevelUnion => GridMode::PerLevelUnion,
            GridArg::FullProduct => GridMode::FullProduct,
        }
    }
}

impl TieArg {
    fn resolve(self, ds: &Dataset) -> TieMode {
        match self {
            TieArg::Auto => TieMode::auto_for(ds),
            TieArg::Weak => TieMode::Weak,
            TieArg::Strict => TieMode::Strict,
        }
    }
}

/// Failure classes with their exit codes.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Budget(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Budget(_) => EXIT_BUDGET,
            Failure::Other(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Budget(e) | Failure::Other(e) => e,
        }
    }
}

impl From<SepError> for Failure {
    fn from(e: SepError) -> Self {
        match e {
            SepError::BudgetExhausted(_) => Failure::Budget(e.into()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<SatError> for Failure {
    fn from(e: SatError) -> Self {
        match e {
            SatError::BudgetExhausted { .. } => Failure::Budget(e.into()),
            other => Failure::Other(other.into()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn input<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Input(e.into()))
}

fn other<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Other(e.into()))
}

fn read(path: &Path) -> Result<String, Failure> {
    input(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())))
}

fn read_cnf(path: &Path) -> Result<CnfFormula, Failure> {
    let text = read(path)?;
    input(parse_dimacs(&text).with_context(|| format!("in {}", path.display())))
}

fn read_dataset(path: &Path) -> Result<Dataset, Failure> {
    let text = read(path)?;
    input(Dataset::from_json(&text).with_context(|| format!("in {}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => other(fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            other(stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()))
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

impl ReduceArgs {
    fn options(&self) -> Result<ReduceOptions, Failure> {
        let positive_prices = match &self.positive_prices {
            Some(s) => Some(input(s.parse::<Rational>().with_context(|| format!("--positive-prices {s}")))?),
            None => None,
        };
        Ok(ReduceOptions { offset_mode: self.offset_mode.into(), positive_prices })
    }

    fn run(&self, f: &CnfFormula) -> Result<Dataset, Failure> {
        let opts = self.options()?;
        other(reduce(f, &opts))
    }
}

impl DecideArgs {
    fn run(&self, ds: &Dataset) -> Result<TestVerdict, Failure> {
        let grid = other(Grid::build(ds, self.grid_mode.into()))?;
        let tie = self.tie_mode.resolve(ds);
        log::info!("grid: {} points, {} z-parts, tie mode {:?}", grid.len(), grid.z_parts.len(), tie);
        Ok(decide(ds, &grid, tie, self.method.into(), self.budget)?)
    }
}

fn cmd_reduce(cnf: &Path, args: &ReduceArgs, out: Option<&Path>) -> CmdResult {
    let f = read_cnf(cnf)?;
    let ds = args.run(&f)?;
    eprintln!(
        "L = {}, I = {}, observations = {}, evaluation points = {}, epsilon = {}, M = {}",
        f.clauses().len(),
        f.var_count(),
        ds.observations.len(),
        ds.evaluation_points.len(),
        ds.epsilon.as_ref().expect("set by reduce"),
        ds.big_m.as_ref().expect("set by reduce"),
    );
    let mut text = ds.to_json();
    text.push('\n');
    emit(out, &text)?;
    Ok(0)
}

fn cmd_test(path: &Path, args: &DecideArgs, exit_code: bool) -> CmdResult {
    let ds = read_dataset(path)?;
    let verdict = args.run(&ds)?;
    emit(None, &pretty(&verdict))?;
    Ok(if exit_code && !verdict.is_rationalizable() { EXIT_NEGATIVE } else { 0 })
}

fn cmd_sat(path: &Path, budget: Option<u64>, exit_code: bool) -> CmdResult {
    let text = read(path)?;
    let inst = input(SatInstance::from_dimacs(&text))?;
    let result = satcore::solve(&inst, SolverConfig { conflict_limit: budget })?;
    let report = match &result {
        SatResult::Sat(model) => {
            let lits: Vec<i64> =
                model.iter().enumerate().map(|(i, &b)| if b { i as i64 + 1 } else { -(i as i64 + 1) }).collect();
            json!({ "status": "sat", "model": lits })
        }
        SatResult::Unsat => json!({ "status": "unsat" }),
    };
    emit(None, &pretty(&report))?;
    Ok(if exit_code && !result.is_sat() { EXIT_NEGATIVE } else { 0 })
}

/// Satisfiability by enumeration when small enough, else by the CDCL solver.
fn oracle(f: &CnfFormula) -> Result<(bool, &'static str), Failure> {
    if f.var_count() <= BRUTE_FORCE_MAX_VARS {
        return Ok((other(brute_force_sat(f))?.is_some(), "enumeration"));
    }
    let inst = other(SatInstance::new(f.var_count(), f.int_clauses()))?;
    let res = satcore::solve(&inst, SolverConfig::default())?;
    if let Some(model) = res.model() {
        assert!(f.evaluate(&Assignment::new(model.to_vec())), "solver model must satisfy the formula");
    }
    Ok((res.is_sat(), "satcore"))
}

fn cmd_verify(path: &Path, rargs: &ReduceArgs, dargs: &DecideArgs) -> CmdResult {
    let f = read_cnf(path)?;
    let (satisfiable, oracle_name) = oracle(&f)?;
    let ds = rargs.run(&f)?;
    let verdict = dargs.run(&ds)?;
    let agree = satisfiable == verdict.is_rationalizable();
    let report = json!({
        "result": if agree { "AGREE" } else { "DISAGREE" },
        "satisfiable": satisfiable,
        "oracle": oracle_name,
        "status": verdict.status,
        "stats": verdict.stats,
    });
    emit(None, &pretty(&report))?;
    if !agree {
        eprintln!("DISAGREE: satisfiable = {satisfiable}, verdict = {:?}", verdict.status);
    }
    Ok(if agree { 0 } else { EXIT_DISAGREE })
}

/// `a..b` (inclusive), `a,b,c` or a single number.
fn parse_range(s: &str) -> anyhow::Result<Vec<usize>> {
    let s = s.trim();
    let values: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        anyhow::ensure!(a <= b, "empty range {s}");
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>()?
    };
    anyhow::ensure!(!values.is_empty(), "empty range {s}");
    Ok(values)
}

#[derive(Serialize)]
struct BenchRow {
    vars: usize,
    clauses: usize,
    formula: String,
    satisfiable: bool,
    status: String,
    agree: bool,
    z_parts: usize,
    grid_points: usize,
    orders_explored: u64,
    cegar_iterations: u64,
    reduce_ms: f64,
    decide_ms: f64,
}

fn cmd_bench(
    vars: &str,
    clauses: &str,
    seed: u64,
    rargs: &ReduceArgs,
    dargs: &DecideArgs,
    out: Option<&Path>,
) -> CmdResult {
    let vars = input(parse_range(vars).context("--vars"))?;
    let clauses = input(parse_range(clauses).context("--clauses"))?;
    if clauses.contains(&0) {
        return Err(Failure::Input(anyhow::anyhow!("clause count 0 would give an empty formula")));
    }
    if let Some(&v) = vars.iter().find(|&&v| v < 3) {
        return Err(Failure::Input(anyhow::anyhow!("{v} variables cannot form a 3SAT clause")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut writer = csv::Writer::from_writer(Vec::new());
    for &i in &vars {
        for &l in &clauses {
            let f = random_3sat(&mut rng, i, l);
            let (satisfiable, _) = oracle(&f)?;
            let t0 = Instant::now();
            let ds = rargs.run(&f)?;
            let reduce_ms = t0.elapsed().as_secs_f64() * 1e3;
            let t1 = Instant::now();
            let verdict = dargs.run(&ds)?;
            let decide_ms = t1.elapsed().as_secs_f64() * 1e3;
            let formula = f
                .int_clauses()
                .iter()
                .map(|c| c.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join(";");
            let status = serde_json::to_value(verdict.status).expect("serializable");
            other(writer.serialize(BenchRow {
                vars: i,
                clauses: l,
                formula,
                satisfiable,
                status: status.as_str().unwrap_or_default().to_string(),
                agree: satisfiable == verdict.is_rationalizable(),
                z_parts: verdict.stats.z_parts,
                grid_points: verdict.stats.grid_points,
                orders_explored: verdict.stats.orders_explored,
                cegar_iterations: verdict.stats.cegar_iterations,
                reduce_ms,
                decide_ms,
            }))?;
        }
    }
    let bytes = other(writer.into_inner())?;
    emit(out, &String::from_utf8(bytes).expect("csv is utf-8"))?;
    Ok(0)
}

fn cmd_export_dot(path: &Path, grid_mode: GridArg, tie: TieArg, out: Option<&Path>) -> CmdResult {
    let ds = read_dataset(path)?;
    let grid = other(Grid::build(&ds, grid_mode.into()))?;
    let graph = revealed_relation(&ds, &grid, tie.resolve(&ds));
    emit(out, &to_dot(&ds, &grid, &graph))?;
    Ok(0)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Reduce { cnf, reduce, out } => cmd_reduce(&cnf, &reduce, out.as_deref()),
        Command::Test { dataset, decide, exit_code } => cmd_test(&dataset, &decide, exit_code),
        Command::Sat { cnf, budget, exit_code } => cmd_sat(&cnf, budget, exit_code),
        Command::Verify { cnf, reduce, decide } => cmd_verify(&cnf, &reduce, &decide),
        Command::Bench { vars, clauses, seed, reduce, decide, out } => {
            cmd_bench(&vars, &clauses, seed, &reduce, &decide, out.as_deref())
        }
        Command::ExportDot { dataset, grid_mode, tie_mode, out } => {
            cmd_export_dot(&dataset, grid_mode, tie_mode, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEPRAT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
