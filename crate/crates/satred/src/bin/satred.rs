use clap::{Parser, Subcommand, ValueEnum};
use satred::formula::{Class, Formula};
use satred::frechetred::{reduce_to_frechet, FrechetInstance};
use satred::harness::{
    bench, bench_csv, verify, BenchConfig, BenchSolver, Caps,
};
use satred::lcsred::{default_k, reduce_to_lcs, LcsInstance, Variant};
use satred::pairsolve::{four_russians, solve_ineq_naive, solve_naive, FrMode};
use satred::regexred::{reduce_to_regex, RegexInstance};
use satred::splitlist::{split_f1, split_f2, IneqInstance, PairInstance};
use std::fs;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "satred", about = "formula-to-sequence reduction toolkit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReduceTarget {
    Lcs,
    LcsSimple,
    Regex,
    Frechet,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveTarget {
    /// Naive pair scan over a pair instance
    Naive,
    /// Block-tabulated pair scan over a pair instance
    FourRussians,
    /// Naive scan over an inequality pair instance
    Ineq,
    Lcs,
    LcsSimple,
    Regex,
    Frechet,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Naive,
    FourRussians,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split a formula and compile the pair instance for a target problem
    Reduce {
        #[arg(long, value_enum)]
        target: ReduceTarget,
        /// Formula file (surface syntax with `;; class=...` header)
        #[arg(long)]
        input: String,
        #[arg(long)]
        out: String,
        /// Alphabet budget for the constant-alphabet LCS variant
        #[arg(long, default_value_t = 256)]
        sigma: u32,
        /// Arity for depth reduction before gadget construction
        #[arg(long)]
        k: Option<u32>,
    },
    /// Decide a previously written instance file
    Solve {
        #[arg(long, value_enum)]
        target: SolveTarget,
        #[arg(long)]
        instance: String,
        /// Block-length fraction for four-russians
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
    },
    /// Run the end-to-end differential verifier
    Verify {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        max_nvars: u32,
        #[arg(long, default_value_t = 24)]
        max_gates: usize,
        #[arg(long, default_value_t = 256)]
        sigma: u32,
        #[arg(long, default_value_t = 8)]
        coeff_bound: i64,
    },
    /// Time the pair solvers on growing random instances; prints CSV
    Bench {
        #[arg(long, value_enum, default_value_t = SolverArg::Both)]
        solver: SolverArg,
        #[arg(long)]
        nmin: usize,
        #[arg(long)]
        nmax: usize,
        /// Vector width in bits
        #[arg(long, default_value_t = 14)]
        m: u32,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn fail(msg: String) -> ExitCode {
    eprintln!("satred: {msg}");
    ExitCode::from(2)
}

fn read(path: &str) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
}

fn write(path: &str, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{path}: {e}"))
}

fn split_pair(f: &Formula) -> Result<PairInstance, String> {
    if f.class() != Class::F1 {
        return Err(format!("target needs an F1 formula, got {}", f.class().token()));
    }
    split_f1(f).map_err(|e| e.to_string())
}

fn run_reduce(
    target: ReduceTarget,
    input: &str,
    out: &str,
    sigma: u32,
    k: Option<u32>,
) -> Result<String, String> {
    let f = Formula::parse(&read(input)?).map_err(|e| e.to_string())?;
    match target {
        ReduceTarget::Lcs | ReduceTarget::LcsSimple => {
            let inst = split_pair(&f)?;
            let variant = if target == ReduceTarget::Lcs { Variant::Constant } else { Variant::Simple };
            let k = k.unwrap_or_else(|| default_k(variant, inst.formula.size()));
            let l = reduce_to_lcs(&inst, variant, sigma, k).map_err(|e| e.to_string())?;
            write(out, &l.to_text())?;
            Ok(format!("lcs instance: |x| = {}, |y| = {}, threshold {}", l.x.len(), l.y.len(), l.rho_prime))
        }
        ReduceTarget::Regex => {
            let inst = split_pair(&f)?;
            let r = reduce_to_regex(&inst);
            write(out, &r.to_text())?;
            Ok(format!("regex instance: |text| = {}, pattern size {}", r.text.len(), r.pattern.size()))
        }
        ReduceTarget::Frechet => {
            if f.class() != Class::F2 {
                return Err(format!("frechet target needs an F2 formula, got {}", f.class().token()));
            }
            let inst = split_f2(&f).map_err(|e| e.to_string())?;
            let fi = reduce_to_frechet(&inst).map_err(|e| e.to_string())?;
            write(out, &fi.to_text())?;
            let mut msg = format!("frechet instance: |P| = {}, |Q| = {}", fi.p.len(), fi.q.len());
            for n in &fi.notes {
                msg.push_str(&format!("\n  {n}"));
            }
            Ok(msg)
        }
    }
}

fn run_solve(target: SolveTarget, path: &str, epsilon: f64) -> Result<String, String> {
    let text = read(path)?;
    let sat = |v: bool| if v { "sat".to_string() } else { "unsat".to_string() };
    match target {
        SolveTarget::Naive => {
            let inst = PairInstance::parse(&text).map_err(|e| e.to_string())?;
            Ok(match solve_naive(&inst) {
                Some((i, j)) => format!("sat: pair ({i}, {j})"),
                None => "unsat".into(),
            })
        }
        SolveTarget::FourRussians => {
            let inst = PairInstance::parse(&text).map_err(|e| e.to_string())?;
            let r = four_russians(&inst, epsilon, 1 << 28, FrMode::Decide).map_err(|e| e.to_string())?;
            Ok(match r.witness {
                Some((i, j)) => format!("sat: pair ({i}, {j})"),
                None => "unsat".into(),
            })
        }
        SolveTarget::Ineq => {
            let inst = IneqInstance::parse(&text).map_err(|e| e.to_string())?;
            Ok(match solve_ineq_naive(&inst) {
                Some((i, j)) => format!("sat: pair ({i}, {j})"),
                None => "unsat".into(),
            })
        }
        SolveTarget::Lcs | SolveTarget::LcsSimple => {
            let inst = LcsInstance::parse(&text).map_err(|e| e.to_string())?;
            Ok(sat(inst.decide()))
        }
        SolveTarget::Regex => {
            let inst = RegexInstance::parse(&text).map_err(|e| e.to_string())?;
            Ok(sat(inst.decide()))
        }
        SolveTarget::Frechet => {
            let inst = FrechetInstance::parse(&text).map_err(|e| e.to_string())?;
            Ok(sat(inst.decide()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Reduce { target, input, out, sigma, k } => {
            match run_reduce(target, &input, &out, sigma, k) {
                Ok(msg) => {
                    println!("{msg}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Solve { target, instance, epsilon } => match run_solve(target, &instance, epsilon) {
            Ok(msg) => {
                println!("{msg}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Cmd::Verify { seed, trials, max_nvars, max_gates, sigma, coeff_bound } => {
            let caps = Caps { max_nvars, max_gates, sigma, coeff_bound };
            let report = verify(seed, trials, &caps);
            print!("{}", report.to_text());
            if report.all_agree() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Cmd::Bench { solver, nmin, nmax, m, epsilon, seed } => {
            let solver = match solver {
                SolverArg::Naive => BenchSolver::Naive,
                SolverArg::FourRussians => BenchSolver::FourRussians,
                SolverArg::Both => BenchSolver::Both,
            };
            let cfg = BenchConfig {
                solver,
                nmin,
                nmax,
                width: m,
                eps: epsilon,
                seed,
                table_cap: 1 << 30,
            };
            print!("{}", bench_csv(&bench(&cfg)));
            ExitCode::SUCCESS
        }
    }
}
