//! Random formula generation, the brute-force SAT oracle, the end-to-end
//! differential verifier, and the benchmark runner behind the CLI.

use crate::formula::{Builder, Class, Formula, Node, NodeId, Side, Table};
use crate::frechetred::reduce_to_frechet;
use crate::lcsred::{occurrence_diagnostics, reduce_to_lcs, default_k, Variant, MAX_SIGMA};
use crate::pairsolve::{count_naive, four_russians, solve_ineq_naive, solve_naive, FrMode};
use crate::regexred::reduce_to_regex;
use crate::splitlist::{split_f1, split_f2, PairInstance, MAX_WIDTH};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("formula has {nvars} variables, brute force capped at {cap}")]
    SatCap { nvars: u32, cap: u32 },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

/// Default variable cap for exhaustive SAT.
pub const SAT_CAP: u32 = 20;

/// Work caps for the reduction columns. Deep draws can make one decide
/// take minutes (constant-variant strings grow like (1 + 7/tau)^depth),
/// so oversized instances record a skipped column instead of a verdict.
/// The reductions produce input-independent sizes per formula shape, so
/// skipping on size cannot bias the verdicts that do get compared.
const LCS_CELL_CAP: usize = 2_000_000_000;
const REGEX_STEP_CAP: usize = 1_000_000_000;
const FRECHET_PAIR_CAP: usize = 4_000_000;

pub fn brute_force_sat(f: &Formula) -> Result<bool, HarnessError> {
    brute_force_sat_capped(f, SAT_CAP)
}

/// Exhaustive evaluation over all assignments, half by half.
pub fn brute_force_sat_capped(f: &Formula, cap: u32) -> Result<bool, HarnessError> {
    let n = f.nvars();
    if n > cap {
        return Err(HarnessError::SatCap { nvars: n, cap });
    }
    let half = n / 2;
    for a in 0..1u64 << half {
        for b in 0..1u64 << half {
            if f.eval_halves(a, b) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn grow_tree(b: &mut Builder, rng: &mut ChaCha8Rng, ids: &[NodeId]) -> NodeId {
    if ids.len() == 1 {
        return ids[0];
    }
    let cut = rng.random_range(1..ids.len());
    let l = grow_tree(b, rng, &ids[..cut]);
    let r = grow_tree(b, rng, &ids[cut..]);
    if rng.random() {
        b.and(vec![l, r])
    } else {
        b.or(vec![l, r])
    }
}

/// Seeded random formula of the given class. `ngates` is the class size
/// measure: leaves for deMorgan, first-layer gates for F1, first-layer plus
/// threshold gates for F2. `m` bounds F2 coefficients and thresholds.
pub fn random_formula(
    seed: u64,
    class: Class,
    nvars: u32,
    ngates: usize,
    m: i64,
) -> Result<Formula, HarnessError> {
    if nvars == 0 || nvars % 2 != 0 {
        return Err(HarnessError::Infeasible(format!("nvars {nvars} must be positive and even")));
    }
    let half = nvars / 2;
    if ngates == 0 {
        return Err(HarnessError::Infeasible("ngates must be positive".into()));
    }
    if class != Class::DeMorgan && half > 16 {
        return Err(HarnessError::Infeasible(format!(
            "first-layer tables over {half} variables are too wide"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    let root = match class {
        Class::DeMorgan => {
            let leaves: Vec<NodeId> = (0..ngates)
                .map(|_| {
                    let side = if rng.random() { Side::Left } else { Side::Right };
                    b.lit(side, rng.random_range(0..half), rng.random())
                })
                .collect();
            if leaves.len() == 1 {
                b.and(leaves)
            } else {
                grow_tree(&mut b, &mut rng, &leaves)
            }
        }
        Class::F1 => {
            let gates: Vec<NodeId> = (0..ngates)
                .map(|_| {
                    let side = if rng.random() { Side::Left } else { Side::Right };
                    let mut t = Table::new_false(half);
                    for p in 0..1usize << half {
                        t.set(p, rng.random());
                    }
                    b.first_layer(side, t)
                })
                .collect();
            if gates.len() == 1 {
                b.and(gates)
            } else {
                grow_tree(&mut b, &mut rng, &gates)
            }
        }
        Class::F2 => {
            if ngates < 2 {
                return Err(HarnessError::Infeasible("F2 needs a first layer and a threshold".into()));
            }
            if m < 1 {
                return Err(HarnessError::Infeasible(format!("coefficient bound {m} below 1")));
            }
            let nfl = rng.random_range(1..=(ngates - 1).min(5));
            let nthr = ngates - nfl;
            let fls: Vec<NodeId> = (0..nfl)
                .map(|i| {
                    // alternate sides so both halves carry signal
                    let side = if i % 2 == 0 { Side::Left } else { Side::Right };
                    let mut t = Table::new_false(half);
                    for p in 0..1usize << half {
                        t.set(p, rng.random());
                    }
                    b.first_layer(side, t)
                })
                .collect();
            let mut picks_per_thr: Vec<Vec<NodeId>> = (0..nthr)
                .map(|_| {
                    let kterms = rng.random_range(1..=fls.len());
                    let mut picks = fls.clone();
                    picks.shuffle(&mut rng);
                    picks.truncate(kterms);
                    picks
                })
                .collect();
            // every first-layer gate must feed some threshold or it drops
            // out of the reachable size
            for &g in &fls {
                if !picks_per_thr.iter().any(|p| p.contains(&g)) {
                    let at = rng.random_range(0..nthr);
                    picks_per_thr[at].push(g);
                }
            }
            let thrs: Vec<NodeId> = picks_per_thr
                .into_iter()
                .map(|picks| {
                    let terms: Vec<(i64, NodeId)> =
                        picks.iter().map(|&g| (rng.random_range(-m..=m), g)).collect();
                    let t = rng.random_range(-m..=m);
                    b.thr(t, terms)
                })
                .collect();
            if thrs.len() == 1 {
                b.and(thrs)
            } else {
                grow_tree(&mut b, &mut rng, &thrs)
            }
        }
    };
    let coeff = if class == Class::F2 { m } else { 0 };
    b.finish(root, class, nvars, coeff)
        .map_err(|e| HarnessError::Infeasible(e.to_string()))
}

/// Random pair instance: a read-once formula over all `2*width` inputs and
/// two lists of `n` random vectors. Benchmark fodder.
pub fn random_pair_instance(seed: u64, width: u32, n: usize) -> PairInstance {
    assert!((1..=MAX_WIDTH).contains(&width) && n > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    let mut leaves: Vec<NodeId> = Vec::new();
    for side in [Side::Left, Side::Right] {
        for i in 0..width {
            leaves.push(b.lit(side, i, rng.random()));
        }
    }
    leaves.shuffle(&mut rng);
    let root = grow_tree(&mut b, &mut rng, &leaves);
    let formula = b.finish(root, Class::DeMorgan, 2 * width, 0).unwrap();
    let mask = (1u64 << width) as u64 - 1;
    let mut draw = || (0..n).map(|_| (rng.random::<u64>() & mask) as u32).collect();
    let a: Vec<u32> = draw();
    let b: Vec<u32> = draw();
    PairInstance { width, a, b, formula }
}

/// FNV-1a over the serialized formula; stable identifier for reports.
pub fn formula_digest(f: &Formula) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in f.to_text().bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Verdict columns of a trial, in report order.
pub const COLUMNS: [&str; 7] =
    ["brute", "pair-naive", "four-russians", "lcs", "lcs-simple", "regex", "frechet"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Value(bool),
    Skipped(String),
}

impl Verdict {
    pub fn value(&self) -> Option<bool> {
        match self {
            Verdict::Value(v) => Some(*v),
            Verdict::Skipped(_) => None,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Value(true) => write!(f, "sat"),
            Verdict::Value(false) => write!(f, "unsat"),
            Verdict::Skipped(r) => write!(f, "skip({r})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub class: Class,
    pub digest: String,
    pub nvars: u32,
    pub size: usize,
    /// Parallel to [`COLUMNS`].
    pub verdicts: [Verdict; 7],
    /// Instance size measures: list entries, string/text/curve lengths.
    pub sizes: Vec<(&'static str, usize)>,
    pub notes: Vec<String>,
    pub millis: u128,
}

impl TrialRecord {
    /// All populated verdicts equal.
    pub fn agree(&self) -> bool {
        let mut vals = self.verdicts.iter().filter_map(Verdict::value);
        match vals.next() {
            Some(first) => vals.all(|v| v == first),
            None => true,
        }
    }
}

/// Verification limits; defaults keep every oracle in the sub-second range.
#[derive(Debug, Clone)]
pub struct Caps {
    pub max_nvars: u32,
    pub max_gates: usize,
    pub sigma: u32,
    pub coeff_bound: i64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps { max_nvars: 10, max_gates: 24, sigma: 256, coeff_bound: 8 }
    }
}

/// Test-mode corruption injected into a built gadget before its verdict is
/// read; the differential columns must catch it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Move the first vertex of the compiled P curve out of reach.
    DisplaceFrechetStart,
    /// Erase the compiled text, leaving the pattern nothing to match.
    EmptyRegexText,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub seed: u64,
    pub caps: Caps,
    pub records: Vec<TrialRecord>,
    /// Minimized dumps, one per disagreeing trial.
    pub dumps: Vec<String>,
}

impl VerificationReport {
    pub fn disagreements(&self) -> usize {
        self.records.iter().filter(|r| !r.agree()).count()
    }

    pub fn all_agree(&self) -> bool {
        self.disagreements() == 0
    }

    /// Report text without timing columns; byte-identical across runs with
    /// the same seed and caps.
    pub fn stable_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {} trials {}", self.seed, self.records.len());
        for r in &self.records {
            let _ = write!(
                out,
                "trial {:>3} {:<8} {} nvars {:>2} size {:>2} |",
                r.trial,
                r.class.token(),
                r.digest,
                r.nvars,
                r.size
            );
            for (name, v) in COLUMNS.iter().zip(&r.verdicts) {
                let _ = write!(out, " {name}={v}");
            }
            for (name, len) in &r.sizes {
                let _ = write!(out, " {name}:{len}");
            }
            for note in &r.notes {
                let _ = write!(out, " [{note}]");
            }
            let _ = writeln!(out, " {}", if r.agree() { "agree" } else { "DISAGREE" });
        }
        let _ = writeln!(
            out,
            "agreements {} disagreements {}",
            self.records.len() - self.disagreements(),
            self.disagreements()
        );
        for d in &self.dumps {
            let _ = writeln!(out, "{d}");
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = self.stable_text();
        let total: u128 = self.records.iter().map(|r| r.millis).sum();
        let _ = writeln!(out, "wall {total} ms");
        out
    }
}

/// One differential pass: F1 formulas run the deMorgan pair pipeline
/// (naive, Four-Russians, both LCS variants, regex), F2 formulas the
/// threshold pipeline (inequality naive, Fréchet), with brute-force SAT as
/// the shared baseline.
pub fn verify(seed: u64, trials: usize, caps: &Caps) -> VerificationReport {
    verify_faulted(seed, trials, caps, None)
}

pub fn verify_faulted(
    seed: u64,
    trials: usize,
    caps: &Caps,
    fault: Option<Fault>,
) -> VerificationReport {
    let mut records = Vec::with_capacity(trials);
    let mut dumps = Vec::new();
    for trial in 0..trials {
        let t0 = Instant::now();
        let trial_seed = seed ^ (trial as u64).wrapping_mul(0x9e3779b97f4a7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let class = if trial % 2 == 0 { Class::F1 } else { Class::F2 };
        let nvars = 2 * rng.random_range(1..=caps.max_nvars / 2).max(1);
        let lo = if class == Class::F2 { 2 } else { 1 };
        let ngates = rng.random_range(lo..=caps.max_gates.min(12).max(lo));
        let m = rng.random_range(1..=caps.coeff_bound.max(1));
        let f = random_formula(trial_seed, class, nvars, ngates, m)
            .expect("caps yield feasible parameters");
        let (verdicts, sizes, notes) = run_columns(&f, caps, fault);
        let record = TrialRecord {
            trial,
            class,
            digest: formula_digest(&f),
            nvars,
            size: f.size(),
            verdicts,
            sizes,
            notes,
            millis: t0.elapsed().as_millis(),
        };
        if !record.agree() {
            dumps.push(minimize_and_dump(trial, &f, caps, fault));
        }
        records.push(record);
    }
    VerificationReport { seed, caps: caps.clone(), records, dumps }
}

type Columns = ([Verdict; 7], Vec<(&'static str, usize)>, Vec<String>);

fn run_columns(f: &Formula, caps: &Caps, fault: Option<Fault>) -> Columns {
    let skip = |r: &str| Verdict::Skipped(r.to_string());
    let mut sizes = Vec::new();
    let mut notes = Vec::new();
    let brute = match brute_force_sat(f) {
        Ok(v) => Verdict::Value(v),
        Err(e) => Verdict::Skipped(e.to_string()),
    };
    let mut verdicts = [
        brute,
        skip("unsplit"),
        skip("unsplit"),
        skip("unsplit"),
        skip("unsplit"),
        skip("unsplit"),
        skip("unsplit"),
    ];
    match f.class() {
        Class::F1 => {
            let inst = match split_f1(f) {
                Ok(i) => i,
                Err(e) => {
                    let s = Verdict::Skipped(e.to_string());
                    for v in &mut verdicts[1..] {
                        *v = s.clone();
                    }
                    return (verdicts, sizes, notes);
                }
            };
            sizes.push(("entries", inst.a.len()));
            verdicts[1] = Verdict::Value(solve_naive(&inst).is_some());
            verdicts[2] = match four_russians(&inst, 0.25, 1 << 26, FrMode::Decide) {
                Ok(r) => Verdict::Value(r.witness.is_some()),
                Err(e) => Verdict::Skipped(e.to_string()),
            };

            // Constant-alphabet symbols wrap modulo sigma; escalate until the
            // occurrence diagnostics clear.
            let reduced = inst.formula.binarize().depth_reduce(default_k(
                Variant::Constant,
                inst.formula.binarize().size(),
            ));
            let mut sigma = caps.sigma;
            while sigma <= MAX_SIGMA && !occurrence_diagnostics(&reduced, sigma, 0, 0).is_empty()
            {
                sigma *= 2;
            }
            if sigma != caps.sigma {
                notes.push(format!("sigma escalated to {sigma}"));
            }
            verdicts[3] = if sigma > MAX_SIGMA {
                Verdict::Skipped(format!("no collision-free sigma under {MAX_SIGMA}"))
            } else {
                match reduce_to_lcs(&inst, Variant::Constant, sigma, default_k(Variant::Constant, inst.formula.size())) {
                    Ok(l) => {
                        sizes.push(("lcs", l.x.len()));
                        if l.x.len() * l.y.len() > LCS_CELL_CAP {
                            Verdict::Skipped(format!(
                                "combined DP needs {} cells, cap {LCS_CELL_CAP}",
                                l.x.len() * l.y.len()
                            ))
                        } else {
                            Verdict::Value(l.decide())
                        }
                    }
                    Err(e) => Verdict::Skipped(e.to_string()),
                }
            };
            verdicts[4] = match reduce_to_lcs(
                &inst,
                Variant::Simple,
                caps.sigma,
                default_k(Variant::Simple, inst.formula.size()),
            ) {
                Ok(l) => {
                    sizes.push(("lcs-simple", l.x.len()));
                    if l.x.len() * l.y.len() > LCS_CELL_CAP {
                        Verdict::Skipped(format!(
                            "combined DP needs {} cells, cap {LCS_CELL_CAP}",
                            l.x.len() * l.y.len()
                        ))
                    } else {
                        Verdict::Value(l.decide())
                    }
                }
                Err(e) => Verdict::Skipped(e.to_string()),
            };

            let mut rx = reduce_to_regex(&inst);
            if fault == Some(Fault::EmptyRegexText) {
                rx.text.clear();
                notes.push("fault: regex text emptied".into());
            }
            sizes.push(("text", rx.text.len()));
            sizes.push(("pattern", rx.pattern.size()));
            verdicts[5] = if rx.text.len() * rx.pattern.size() > REGEX_STEP_CAP {
                Verdict::Skipped(format!(
                    "matcher needs {} steps, cap {REGEX_STEP_CAP}",
                    rx.text.len() * rx.pattern.size()
                ))
            } else {
                Verdict::Value(rx.decide())
            };
            verdicts[6] = skip("threshold path only");
        }
        Class::F2 => {
            let inst = match split_f2(f) {
                Ok(i) => i,
                Err(e) => {
                    let s = Verdict::Skipped(e.to_string());
                    for v in &mut verdicts[1..] {
                        *v = s.clone();
                    }
                    return (verdicts, sizes, notes);
                }
            };
            sizes.push(("entries", inst.a.len()));
            verdicts[1] = Verdict::Value(solve_ineq_naive(&inst).is_some());
            for v in &mut verdicts[2..6] {
                *v = skip("deMorgan pair path only");
            }
            verdicts[6] = match reduce_to_frechet(&inst) {
                Ok(mut fi) => {
                    if fault == Some(Fault::DisplaceFrechetStart) {
                        fi.p[0].1 += num::BigRational::from_integer(8.into());
                        notes.push("fault: P start displaced".into());
                    }
                    sizes.push(("curve", fi.p.len().max(fi.q.len())));
                    notes.extend(fi.notes.iter().cloned());
                    if fi.p.len() * fi.q.len() > FRECHET_PAIR_CAP {
                        Verdict::Skipped(format!(
                            "close table needs {} rational pairs, cap {FRECHET_PAIR_CAP}",
                            fi.p.len() * fi.q.len()
                        ))
                    } else {
                        Verdict::Value(fi.decide())
                    }
                }
                Err(e) => Verdict::Skipped(e.to_string()),
            };
        }
        Class::DeMorgan => {
            for v in &mut verdicts[1..] {
                *v = skip("no split path for raw deMorgan formulas");
            }
        }
    }
    (verdicts, sizes, notes)
}

/// Copies `f` minus one child edge of one gate; None when the drop would
/// empty the gate or the shrunk formula fails validation.
fn drop_child(f: &Formula, gate: NodeId, child: usize) -> Option<Formula> {
    fn go(b: &mut Builder, f: &Formula, id: NodeId, gate: NodeId, child: usize) -> NodeId {
        match f.node(id) {
            Node::Lit { side, index, neg } => b.lit(*side, *index, *neg),
            Node::FirstLayer { side, table } => b.first_layer(*side, table.clone()),
            Node::Thr { t, terms } => {
                let terms =
                    terms.iter().map(|&(c, ch)| (c, go(b, f, ch, gate, child))).collect();
                b.thr(*t, terms)
            }
            Node::And(c) | Node::Or(c) => {
                let kids: Vec<NodeId> = c
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| !(id == gate && i == child))
                    .map(|(_, &ch)| go(b, f, ch, gate, child))
                    .collect();
                if matches!(f.node(id), Node::And(_)) {
                    b.and(kids)
                } else {
                    b.or(kids)
                }
            }
        }
    }
    let mut b = Builder::new();
    let root = go(&mut b, f, f.root(), gate, child);
    b.finish(root, f.class(), f.nvars(), f.coeff_bound()).ok()
}

fn shrink_candidates(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    for id in f.reachable_ids() {
        if let Node::And(c) | Node::Or(c) = f.node(id) {
            if c.len() >= 2 {
                for i in 0..c.len() {
                    out.extend(drop_child(f, id, i));
                }
            }
        }
    }
    out
}

/// Greedy gate removal preserving the disagreement, then a full dump.
fn minimize_and_dump(trial: usize, f: &Formula, caps: &Caps, fault: Option<Fault>) -> String {
    let disagrees = |g: &Formula| {
        let (v, _, _) = run_columns(g, caps, fault);
        let mut vals = v.iter().filter_map(Verdict::value);
        match vals.next() {
            Some(first) => vals.any(|x| x != first),
            None => false,
        }
    };
    let mut cur = f.clone();
    let mut rounds = 0;
    'outer: while rounds < 64 {
        rounds += 1;
        for cand in shrink_candidates(&cur) {
            if disagrees(&cand) {
                cur = cand;
                continue 'outer;
            }
        }
        break;
    }
    let (verdicts, _, notes) = run_columns(&cur, caps, fault);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "disagreement on trial {trial}: formula {} shrunk {} -> {} nodes",
        formula_digest(f),
        f.reachable_count(),
        cur.reachable_count()
    );
    for (name, v) in COLUMNS.iter().zip(&verdicts) {
        let _ = write!(out, " {name}={v}");
    }
    let _ = writeln!(out);
    for n in &notes {
        let _ = writeln!(out, " note: {n}");
    }
    out.push_str(&cur.to_text());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchSolver {
    Naive,
    FourRussians,
    Both,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub solver: BenchSolver,
    pub nmin: usize,
    pub nmax: usize,
    pub width: u32,
    pub eps: f64,
    pub seed: u64,
    pub table_cap: usize,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub n: usize,
    pub width: u32,
    pub naive_ms: Option<f64>,
    pub four_russians_ms: Option<f64>,
    /// naive / four-russians
    pub ratio: Option<f64>,
    pub counts_agree: Option<bool>,
    pub note: String,
}

/// Times full satisfying-pair counts (no early exit, so measurements do not
/// depend on where the first witness happens to sit) on doubling list sizes.
pub fn bench(cfg: &BenchConfig) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    let mut n = cfg.nmin.max(1);
    while n <= cfg.nmax {
        let inst = random_pair_instance(cfg.seed ^ n as u64, cfg.width, n);
        let mut naive_ms = None;
        let mut naive_count = None;
        if cfg.solver != BenchSolver::FourRussians {
            let t = Instant::now();
            naive_count = Some(count_naive(&inst));
            naive_ms = Some(t.elapsed().as_secs_f64() * 1e3);
        }
        let mut fr_ms = None;
        let mut fr_count = None;
        let mut note = String::new();
        if cfg.solver != BenchSolver::Naive {
            let t = Instant::now();
            match four_russians(&inst, cfg.eps, cfg.table_cap, FrMode::Count) {
                Ok(r) => {
                    fr_ms = Some(t.elapsed().as_secs_f64() * 1e3);
                    fr_count = r.count;
                }
                Err(e) => note = e.to_string(),
            }
        }
        let ratio = match (naive_ms, fr_ms) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        let counts_agree = match (naive_count, fr_count) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        };
        rows.push(BenchRow { n, width: cfg.width, naive_ms, four_russians_ms: fr_ms, ratio, counts_agree, note });
        n *= 2;
    }
    rows
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,width,naive_ms,four_russians_ms,ratio,counts_agree,note\n");
    let fmt_f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.width,
            fmt_f(r.naive_ms),
            fmt_f(r.four_russians_ms),
            fmt_f(r.ratio),
            r.counts_agree.map(|b| b.to_string()).unwrap_or_default(),
            r.note
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_frozen_cases() {
        let mut b = Builder::new();
        let x = b.lit(Side::Left, 0, false);
        let nx = b.lit(Side::Left, 0, true);
        let root = b.and(vec![x, nx]);
        let f = b.finish(root, Class::DeMorgan, 2, 0).unwrap();
        assert_eq!(brute_force_sat(&f).unwrap(), false, "x and not x");

        let mut b = Builder::new();
        let x = b.lit(Side::Left, 0, false);
        let nx = b.lit(Side::Left, 0, true);
        let root = b.or(vec![x, nx]);
        let f = b.finish(root, Class::DeMorgan, 2, 0).unwrap();
        assert_eq!(brute_force_sat(&f).unwrap(), true, "x or not x");

        let wide = random_formula(1, Class::DeMorgan, 24, 6, 0).unwrap();
        assert!(matches!(brute_force_sat(&wide), Err(HarnessError::SatCap { .. })));
    }

    #[test]
    fn brute_force_matches_split_pipeline() {
        for seed in 0..20 {
            let f = random_formula(seed, Class::F1, 8, 4, 0).unwrap();
            let inst = split_f1(&f).unwrap();
            assert_eq!(
                brute_force_sat(&f).unwrap(),
                solve_naive(&inst).is_some(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn random_formula_is_deterministic() {
        for class in [Class::DeMorgan, Class::F1, Class::F2] {
            let a = random_formula(7, class, 6, 5, 3).unwrap();
            let b = random_formula(7, class, 6, 5, 3).unwrap();
            assert_eq!(a.to_text(), b.to_text());
            let c = random_formula(8, class, 6, 5, 3).unwrap();
            assert_ne!(a.to_text(), c.to_text(), "different seeds diverge");
        }
    }

    #[test]
    fn random_formula_respects_class_and_size() {
        for seed in 0..12 {
            for (class, ngates) in [(Class::DeMorgan, 7), (Class::F1, 4), (Class::F2, 5)] {
                let f = random_formula(seed, class, 8, ngates, 4).unwrap();
                assert_eq!(f.class(), class);
                let diff = f.size().abs_diff(ngates);
                assert!(diff <= 1, "size {} vs ngates {ngates}", f.size());
                // round-trips through the surface syntax
                let back = Formula::parse(&f.to_text()).unwrap();
                assert_eq!(back.to_text(), f.to_text());
            }
        }
        assert!(random_formula(0, Class::F2, 7, 5, 4).is_err(), "odd nvars");
        assert!(random_formula(0, Class::F2, 8, 1, 4).is_err(), "too few gates");
        assert!(random_formula(0, Class::F1, 8, 0, 0).is_err(), "zero gates");
    }

    #[test]
    fn verify_small_run_agrees() {
        let caps = Caps { max_nvars: 6, max_gates: 5, ..Caps::default() };
        let report = verify(11, 6, &caps);
        assert_eq!(report.records.len(), 6);
        assert!(report.all_agree(), "{}", report.to_text());
        assert!(report.dumps.is_empty());
        // every column is populated or carries a reason
        for r in &report.records {
            for v in &r.verdicts {
                if let Verdict::Skipped(reason) = v {
                    assert!(!reason.is_empty());
                }
            }
        }
    }

    #[test]
    fn verify_is_deterministic_modulo_timing() {
        let caps = Caps { max_nvars: 6, max_gates: 4, ..Caps::default() };
        let a = verify(5, 4, &caps);
        let b = verify(5, 4, &caps);
        assert_eq!(a.stable_text(), b.stable_text());
    }

    #[test]
    fn verify_zero_trials_is_empty() {
        let report = verify(1, 0, &Caps::default());
        assert!(report.records.is_empty() && report.all_agree());
    }

    #[test]
    fn injected_faults_are_detected() {
        let caps = Caps { max_nvars: 6, max_gates: 5, ..Caps::default() };
        // sanity: the same trials agree without the fault
        assert!(verify(11, 6, &caps).all_agree());
        for fault in [Fault::DisplaceFrechetStart, Fault::EmptyRegexText] {
            let report = verify_faulted(11, 6, &caps, Some(fault));
            assert!(report.disagreements() > 0, "{fault:?} went unnoticed");
            assert_eq!(report.dumps.len(), report.disagreements());
            assert!(report.dumps[0].contains("shrunk"));
        }
    }

    #[test]
    fn bench_emits_rows_and_csv() {
        let cfg = BenchConfig {
            solver: BenchSolver::Both,
            nmin: 64,
            nmax: 128,
            width: 6,
            eps: 0.25,
            seed: 3,
            table_cap: 1 << 24,
        };
        let rows = bench(&cfg);
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert_eq!(r.counts_agree, Some(true));
            assert!(r.ratio.unwrap() > 0.0);
        }
        let csv = bench_csv(&rows);
        assert!(csv.starts_with("n,width,naive_ms,four_russians_ms,ratio,counts_agree"));
        assert_eq!(csv.lines().count(), 3);
    }
}
