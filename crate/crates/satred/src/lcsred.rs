//! Pair instances compiled into longest-common-subsequence instances, plus
//! the reference LCS solver.
//!
//! Two gadget compilers share one shape: per gate they emit a string pair
//! whose LCS never exceeds a target `rho` and reaches it exactly when the
//! gate evaluates true. The constant-alphabet compiler keeps the alphabet at
//! `5*sigma^2 + 4` symbols no matter how large the formula gets; the simple
//! compiler spends fresh symbols per gate (at most `3*|F| + 4`) and gets
//! much shorter strings in return. An alignment combiner then ORs one
//! candidate pair per half-assignment into a single instance whose LCS
//! reaches `rho'` exactly when some pair satisfies the formula.

use crate::formula::{Class, Formula, Node, NodeId, Side};
use crate::splitlist::PairInstance;
use std::fmt::Write as _;
use thiserror::Error;

pub type Symbol = u32;

/// Largest accepted `sigma`; keeps `5*sigma^2 + 4` inside `u32`.
pub const MAX_SIGMA: u32 = 1 << 14;

/// Constant in the combined-instance length bound
/// `|X|, |Y| <= C * n * tau * |F| * (1 + 7/tau)^depth`, sized for the
/// two-level guard combiner at list lengths up to 64.
pub const COMBINED_LENGTH_C: f64 = 1024.0;

#[derive(Debug, Error)]
pub enum LcsError {
    #[error("candidate string has length {got}, want {want}")]
    LengthMismatch { want: usize, got: usize },
    #[error("candidate lists must be non-empty")]
    EmptyList,
    #[error("lcs instance format: {0}")]
    Format(String),
}

/// Per-gate string pair: `x` encodes the gate under the A-side bits, `y`
/// under the B-side bits. Invariants: `|x| = |y|`, `lcs(x, y) <= rho` with
/// equality exactly when the gate evaluates true, and `rho` and the length
/// depend only on the gate, never on the inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateGadget {
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
    pub rho: usize,
}

impl GateGadget {
    /// Common length of both strings.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// One LCS decision instance. The source instance is satisfiable exactly
/// when `lcs(&x, &y)` reaches `rho_prime`; it can never exceed it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcsInstance {
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
    /// Total alphabet size; every symbol is below it.
    pub alphabet: u32,
    pub rho_prime: usize,
    /// Construction parameter: `sigma` for the constant-alphabet variant,
    /// the compiler's fresh-symbol count for the simple variant. Zero on
    /// instances read from a file; the format does not record it.
    pub sigma: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `5*sigma^2 + 4` symbols total, independent of formula size.
    Constant,
    /// Fresh symbols per gate; shorter strings, no `sigma` tuning.
    Simple,
}

/// LCS length by the standard quadratic dynamic program. Serves as the
/// oracle for every gadget test.
pub fn lcs(x: &[Symbol], y: &[Symbol]) -> usize {
    let (s, l) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    if s.is_empty() {
        return 0;
    }
    let mut prev = vec![0u32; s.len() + 1];
    let mut cur = vec![0u32; s.len() + 1];
    for &cl in l {
        for (i, &cs) in s.iter().enumerate() {
            cur[i + 1] = if cs == cl { prev[i] + 1 } else { prev[i + 1].max(cur[i]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[s.len()] as usize
}

fn push_run(v: &mut Vec<Symbol>, s: Symbol, n: usize) {
    v.resize(v.len() + n, s);
}

/// Symbol layout for the constant-alphabet compiler. Every gate owns the
/// five-symbol block alphabet indexed by (height mod sigma, rank mod sigma):
/// height is the gate's distance to the root, rank its left-to-right
/// position among gates of equal height, both from one pre-order walk.
struct GadgetCtx {
    tau: f64,
    tau2: f64,
    /// First symbol id of each node's block alphabet.
    base: Vec<Symbol>,
}

impl GadgetCtx {
    fn new(f: &Formula, sigma: u32) -> GadgetCtx {
        assert!((2..=MAX_SIGMA).contains(&sigma), "sigma must be in 2..={MAX_SIGMA}");
        assert_eq!(f.class(), Class::DeMorgan, "gadgets compile deMorgan trees");
        let tau2 = (sigma as f64).log2().sqrt();
        let mut base = vec![0; f.node_count()];
        let mut next_rank: Vec<u32> = Vec::new();
        let mut seen = vec![false; f.node_count()];
        let mut stack = vec![(f.root(), 0usize)];
        while let Some((id, h)) = stack.pop() {
            assert!(!seen[id], "gadget formulas must be trees");
            seen[id] = true;
            if next_rank.len() <= h {
                next_rank.resize(h + 1, 0);
            }
            let rank = next_rank[h];
            next_rank[h] += 1;
            base[id] = 5 * ((h as u32 % sigma) * sigma + rank % sigma);
            match f.node(id) {
                Node::Lit { .. } => {}
                Node::And(c) | Node::Or(c) => {
                    assert!(!c.is_empty(), "empty gate");
                    assert!(c.len() <= 2, "gadgets need fanin at most 2");
                    for &ch in c.iter().rev() {
                        stack.push((ch, h + 1));
                    }
                }
                _ => unreachable!("class checked above"),
            }
        }
        GadgetCtx { tau: tau2.sqrt(), tau2, base }
    }

    /// Block width for a gate over child lengths summing to `n12`.
    fn beta(&self, n12: usize) -> usize {
        (n12 as f64 / self.tau2).ceil() as usize
    }

    fn build(&self, f: &Formula, id: NodeId, a: u32, b: u32) -> ConstBuild {
        let (gadget, nodes, depth) = match f.node(id) {
            Node::Lit { side, index, neg } => {
                let s = |v: bool| self.base[id] + v as u32;
                let (x, y) = match side {
                    Side::Left => (vec![s(((a >> index) & 1 == 1) != *neg)], vec![s(true)]),
                    Side::Right => (vec![s(true)], vec![s(((b >> index) & 1 == 1) != *neg)]),
                };
                (GateGadget { x, y, rho: 1 }, 1, 0)
            }
            Node::And(c) | Node::Or(c) if c.len() == 1 => {
                let r = self.build(f, c[0], a, b);
                (r.gadget, r.nodes + 1, r.depth + 1)
            }
            Node::And(c) => {
                let g1 = self.build(f, c[0], a, b);
                let g2 = self.build(f, c[1], a, b);
                let beta = self.beta(g1.gadget.len() + g2.gadget.len());
                let s = |v: u32| self.base[id] + v;
                let mut x = g1.gadget.x;
                push_run(&mut x, s(0), beta);
                push_run(&mut x, s(1), beta);
                x.extend_from_slice(&g2.gadget.x);
                let mut y = g1.gadget.y;
                push_run(&mut y, s(0), beta);
                push_run(&mut y, s(1), beta);
                y.extend_from_slice(&g2.gadget.y);
                (
                    GateGadget { x, y, rho: 2 * beta + g1.gadget.rho + g2.gadget.rho },
                    g1.nodes + g2.nodes + 1,
                    1 + g1.depth.max(g2.depth),
                )
            }
            Node::Or(c) => {
                let g1 = self.build(f, c[0], a, b);
                let g2 = self.build(f, c[1], a, b);
                let beta = self.beta(g1.gadget.len() + g2.gadget.len());
                // Equalize targets by prepending pad symbols to the smaller
                // child on both sides, then cross the children so exactly
                // one of them can take full credit.
                let pad1 = g2.gadget.rho.saturating_sub(g1.gadget.rho);
                let pad2 = g1.gadget.rho.saturating_sub(g2.gadget.rho);
                let s = |v: u32| self.base[id] + v;
                let mut x = Vec::new();
                push_run(&mut x, s(0), beta);
                push_run(&mut x, s(1), beta);
                push_run(&mut x, s(4), pad1);
                x.extend_from_slice(&g1.gadget.x);
                push_run(&mut x, s(2), beta);
                push_run(&mut x, s(3), beta);
                push_run(&mut x, s(4), pad2);
                x.extend_from_slice(&g2.gadget.x);
                push_run(&mut x, s(0), beta);
                push_run(&mut x, s(1), beta);
                let mut y = Vec::new();
                push_run(&mut y, s(2), beta);
                push_run(&mut y, s(3), beta);
                push_run(&mut y, s(4), pad2);
                y.extend_from_slice(&g2.gadget.y);
                push_run(&mut y, s(0), beta);
                push_run(&mut y, s(1), beta);
                push_run(&mut y, s(4), pad1);
                y.extend_from_slice(&g1.gadget.y);
                push_run(&mut y, s(2), beta);
                push_run(&mut y, s(3), beta);
                (
                    GateGadget { x, y, rho: 4 * beta + g1.gadget.rho.max(g2.gadget.rho) },
                    g1.nodes + g2.nodes + 1,
                    1 + g1.depth.max(g2.depth),
                )
            }
            _ => unreachable!("class checked at layout time"),
        };
        // Length bounds: n(g) <= 6 tau |F_g| (1+7/tau)^depth and
        // rho(g) <= 6 |F_g| (1+7/tau)^depth.
        let growth = (1.0 + 7.0 / self.tau).powi(depth as i32);
        assert_eq!(gadget.x.len(), gadget.y.len());
        assert!(gadget.x.len() as f64 <= 6.0 * self.tau * nodes as f64 * growth);
        assert!(gadget.rho as f64 <= 6.0 * nodes as f64 * growth);
        assert!(gadget.rho <= gadget.x.len());
        ConstBuild { gadget, nodes, depth }
    }
}

struct ConstBuild {
    gadget: GateGadget,
    nodes: usize,
    depth: usize,
}

/// Compiles gate `g` of `f` under half-assignments (`a`, `b`) with the
/// constant-alphabet layout. `f` must be a fanin-2 deMorgan tree; heights
/// are measured from `f`'s root, so a subtree keeps the alphabet it would
/// have inside the full formula.
pub fn gate_gadget(f: &Formula, g: NodeId, a: u32, b: u32, sigma: u32) -> GateGadget {
    GadgetCtx::new(f, sigma).build(f, g, a, b).gadget
}

struct SimpleBuild {
    gadget: GateGadget,
    /// Symbols consumed, starting at the base the call was given.
    fresh: u32,
    leaves: usize,
    depth: usize,
}

fn build_simple(f: &Formula, id: NodeId, a: u32, b: u32, base: Symbol) -> SimpleBuild {
    let out = match f.node(id) {
        Node::Lit { side, index, neg } => {
            let (x, y) = match side {
                Side::Left => {
                    (vec![base + (((a >> index) & 1 == 1) != *neg) as u32], vec![base + 1])
                }
                Side::Right => {
                    (vec![base + 1], vec![base + (((b >> index) & 1 == 1) != *neg) as u32])
                }
            };
            SimpleBuild { gadget: GateGadget { x, y, rho: 1 }, fresh: 2, leaves: 1, depth: 0 }
        }
        Node::And(c) | Node::Or(c) if c.len() == 1 => {
            let mut r = build_simple(f, c[0], a, b, base);
            r.depth += 1;
            r
        }
        Node::And(c) => {
            let g1 = build_simple(f, c[0], a, b, base);
            let g2 = build_simple(f, c[1], a, b, base + g1.fresh);
            let mut x = g1.gadget.x;
            x.extend_from_slice(&g2.gadget.x);
            let mut y = g1.gadget.y;
            y.extend_from_slice(&g2.gadget.y);
            SimpleBuild {
                gadget: GateGadget { x, y, rho: g1.gadget.rho + g2.gadget.rho },
                fresh: g1.fresh + g2.fresh,
                leaves: g1.leaves + g2.leaves,
                depth: 1 + g1.depth.max(g2.depth),
            }
        }
        Node::Or(c) => {
            let g1 = build_simple(f, c[0], a, b, base);
            let g2 = build_simple(f, c[1], a, b, base + g1.fresh);
            let fresh = g1.fresh + g2.fresh + 1;
            let crossing = base + g1.fresh + g2.fresh;
            let (leaves, depth) = (g1.leaves + g2.leaves, 1 + g1.depth.max(g2.depth));
            // The child with the larger target comes first; the crossing
            // symbol tops the smaller one up, so either child alone can
            // reach the gate target but never both together.
            let (hi, lo) =
                if g1.gadget.rho >= g2.gadget.rho { (g1.gadget, g2.gadget) } else { (g2.gadget, g1.gadget) };
            let delta = hi.rho - lo.rho;
            let mut x = hi.x;
            x.extend_from_slice(&lo.x);
            push_run(&mut x, crossing, delta);
            let mut y = lo.y;
            push_run(&mut y, crossing, delta);
            y.extend_from_slice(&hi.y);
            SimpleBuild {
                gadget: GateGadget { x, y, rho: hi.rho },
                fresh,
                leaves,
                depth,
            }
        }
        _ => panic!("gadgets compile deMorgan trees"),
    };
    // Length bound n(g) <= (depth+1) * |F_g| in leaves; targets never
    // exceed the leaf count.
    assert_eq!(out.gadget.x.len(), out.gadget.y.len());
    assert!(out.gadget.x.len() <= (out.depth + 1) * out.leaves);
    assert!(out.gadget.rho <= out.leaves);
    assert!(out.fresh as usize <= 3 * out.leaves);
    out
}

/// Compiles gate `g` with the large-alphabet layout: child alphabets are
/// disjoint by shifting, an OR spends one extra crossing symbol. Symbol ids
/// start at 0 for the subtree rooted at `g`.
pub fn gate_gadget_simple(f: &Formula, g: NodeId, a: u32, b: u32) -> GateGadget {
    assert_eq!(f.class(), Class::DeMorgan, "gadgets compile deMorgan trees");
    build_simple(f, g, a, b, 0).gadget
}

/// ORs candidate string pairs into one instance: `lcs(X, Y)` never exceeds
/// `rho'` and reaches it exactly when some pair (x_i, y_j) reaches `rho`.
/// Callers guarantee `lcs(x_i, y_j) <= rho` for all pairs and a uniform
/// length `lambda`; fresh guard symbols take ids `alphabet` and
/// `alphabet + 1`, and the instance allocates four so downstream relabeling
/// stays stable.
///
/// Scheme: a guard-separated row U of all x_i decides `max_i lcs(x_i, y)`
/// exactly for any y wrapped in saturating guard runs; nesting the same
/// step once more ranges over the y_j. Both outputs grow as
/// O(n*lambda + n^2*rho) because the outer guard runs repeat per slot; the
/// exactness argument needs them on both strings.
pub fn combine_or(
    xs: &[Vec<Symbol>],
    ys: &[Vec<Symbol>],
    lambda: usize,
    rho: usize,
    alphabet: u32,
) -> Result<LcsInstance, LcsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(LcsError::EmptyList);
    }
    for s in xs.iter().chain(ys) {
        if s.len() != lambda {
            return Err(LcsError::LengthMismatch { want: lambda, got: s.len() });
        }
        debug_assert!(s.iter().all(|&c| c < alphabet));
    }
    let (g1, g2) = (alphabet, alphabet + 1);
    let (na, nb) = (xs.len(), ys.len());
    let gamma = rho.max(1);
    // inner = guard budget around each y_j; one level of the row-max step
    // contributes (na+1)*gamma to every LCS value, so level two guards with
    // gamma2 = that plus rho.
    let inner = (na + 1) * gamma;
    let gamma2 = inner + rho;
    let outer = (nb + 1) * gamma2;

    let mut u = Vec::with_capacity(inner + na * lambda);
    push_run(&mut u, g1, gamma);
    for x in xs {
        u.extend_from_slice(x);
        push_run(&mut u, g1, gamma);
    }

    let mut x_out = Vec::with_capacity((nb + 1) * gamma2 + nb * (lambda + 2 * inner));
    push_run(&mut x_out, g2, gamma2);
    for y in ys {
        push_run(&mut x_out, g1, inner);
        x_out.extend_from_slice(y);
        push_run(&mut x_out, g1, inner);
        push_run(&mut x_out, g2, gamma2);
    }

    let mut y_out = Vec::with_capacity(2 * outer + u.len());
    push_run(&mut y_out, g2, outer);
    y_out.extend_from_slice(&u);
    push_run(&mut y_out, g2, outer);

    Ok(LcsInstance {
        x: x_out,
        y: y_out,
        alphabet: alphabet + 4,
        rho_prime: outer + inner + rho,
        sigma: 0,
    })
}

/// Default depth-reduction arity per variant. The constant-alphabet
/// analysis wants an arity near sqrt(tau), below the reducer's minimum of
/// 2, so the smallest legal value; the simple variant takes
/// `2^ceil(sqrt(log2 |F|))`, which leaves typical desk-scale formulas
/// untouched.
pub fn default_k(variant: Variant, size: usize) -> u32 {
    match variant {
        Variant::Constant => 2,
        Variant::Simple => {
            let e = (size.max(2) as f64).log2().sqrt().ceil() as u32;
            2u32.saturating_pow(e).max(2)
        }
    }
}

/// Compiles a pair instance into one LCS instance: binarize, reduce depth
/// with arity `k`, build one root gadget string per list entry, then OR the
/// candidates. `sigma` only matters for the constant-alphabet variant.
pub fn reduce_to_lcs(
    inst: &PairInstance,
    variant: Variant,
    sigma: u32,
    k: u32,
) -> Result<LcsInstance, LcsError> {
    let f = inst.formula.binarize().depth_reduce(k);
    let root = f.root();
    let (xs, ys, rho, alphabet, sigma_field, tau) = match variant {
        Variant::Constant => {
            let ctx = GadgetCtx::new(&f, sigma);
            let probe = ctx.build(&f, root, 0, 0).gadget;
            let xs: Vec<_> = inst
                .a
                .iter()
                .map(|&av| {
                    let g = ctx.build(&f, root, av, 0).gadget;
                    assert!(g.rho == probe.rho && g.len() == probe.len());
                    g.x
                })
                .collect();
            let ys: Vec<_> = inst
                .b
                .iter()
                .map(|&bv| {
                    let g = ctx.build(&f, root, 0, bv).gadget;
                    assert!(g.rho == probe.rho && g.len() == probe.len());
                    g.y
                })
                .collect();
            (xs, ys, probe.rho, 5 * sigma * sigma, sigma, Some(ctx.tau))
        }
        Variant::Simple => {
            let probe = build_simple(&f, root, 0, 0, 0);
            let xs: Vec<_> = inst
                .a
                .iter()
                .map(|&av| {
                    let g = build_simple(&f, root, av, 0, 0);
                    assert!(g.gadget.rho == probe.gadget.rho && g.fresh == probe.fresh);
                    g.gadget.x
                })
                .collect();
            let ys: Vec<_> =
                inst.b.iter().map(|&bv| build_simple(&f, root, 0, bv, 0).gadget.y).collect();
            (xs, ys, probe.gadget.rho, probe.fresh, probe.fresh, None)
        }
    };
    let lambda = xs[0].len();
    let mut out = combine_or(&xs, &ys, lambda, rho, alphabet)?;
    out.sigma = sigma_field;
    if let Some(tau) = tau {
        let n = inst.a.len().max(inst.b.len());
        if n <= 64 {
            let bound = COMBINED_LENGTH_C
                * n as f64
                * tau
                * f.reachable_count() as f64
                * (1.0 + 7.0 / tau).powi(f.depth() as i32);
            assert!(
                out.x.len() as f64 <= bound && out.y.len() as f64 <= bound,
                "combined instance length exceeds its budget"
            );
        }
    }
    Ok(out)
}

/// Checks the block-symbol occurrence cap of the constant-alphabet layout:
/// for every fanin-2 gate, each of its five block symbols may occur at most
/// `(n1+n2) / (48 tau^2)` times in each child string. Returns one line per
/// violation; the layout keeps gate alphabets disjoint until heights or
/// ranks wrap around `sigma`, so violations flag exactly those collisions.
pub fn occurrence_diagnostics(f: &Formula, sigma: u32, a: u32, b: u32) -> Vec<String> {
    let ctx = GadgetCtx::new(f, sigma);
    let mut out = Vec::new();
    for id in f.reachable_ids() {
        let (c1, c2) = match f.node(id) {
            Node::And(c) | Node::Or(c) if c.len() == 2 => (c[0], c[1]),
            _ => continue,
        };
        let g1 = ctx.build(f, c1, a, b).gadget;
        let g2 = ctx.build(f, c2, a, b).gadget;
        let cap = ((g1.len() + g2.len()) as f64 / (48.0 * ctx.tau2)).floor() as usize;
        for v in 0..5u32 {
            let s = ctx.base[id] + v;
            for (name, w) in [("x1", &g1.x), ("x2", &g2.x), ("y1", &g1.y), ("y2", &g2.y)] {
                let count = w.iter().filter(|&&c| c == s).count();
                if count > cap {
                    out.push(format!(
                        "gate {id}: block symbol {s} occurs {count} times in {name}, cap {cap}"
                    ));
                }
            }
        }
    }
    out
}

impl LcsInstance {
    /// True exactly when the encoded source instance is satisfiable.
    pub fn decide(&self) -> bool {
        let l = lcs(&self.x, &self.y);
        assert!(l <= self.rho_prime, "instance invariant broken: lcs {l} > {}", self.rho_prime);
        l == self.rho_prime
    }

    /// Serializes as the header `|x| |y| alphabetSize rhoPrime` followed by
    /// the two strings as space-separated symbols, one per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.x.len(),
            self.y.len(),
            self.alphabet,
            self.rho_prime
        );
        for string in [&self.x, &self.y] {
            let line: Vec<String> = string.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<LcsInstance, LcsError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| LcsError::Format("empty input".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| LcsError::Format(format!("bad header field `{t}`"))))
            .collect::<Result<_, _>>()?;
        let [xn, yn, alphabet, rho_prime] = fields[..] else {
            return Err(LcsError::Format("header wants `|x| |y| alphabetSize rhoPrime`".into()));
        };
        let alphabet = u32::try_from(alphabet)
            .map_err(|_| LcsError::Format("alphabet size out of range".into()))?;
        let mut read = |want: usize, name: &str| -> Result<Vec<Symbol>, LcsError> {
            let line = lines.next().unwrap_or("");
            let s: Vec<Symbol> = line
                .split_whitespace()
                .map(|t| {
                    t.parse().map_err(|_| LcsError::Format(format!("bad symbol `{t}` in {name}")))
                })
                .collect::<Result<_, _>>()?;
            if s.len() != want {
                return Err(LcsError::Format(format!(
                    "{name} has {} symbols, header says {want}",
                    s.len()
                )));
            }
            if let Some(c) = s.iter().find(|&&c| c >= alphabet) {
                return Err(LcsError::Format(format!("symbol {c} outside alphabet {alphabet}")));
            }
            Ok(s)
        };
        let x = read(xn, "x")?;
        let y = read(yn, "y")?;
        Ok(LcsInstance { x, y, alphabet, rho_prime, sigma: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Builder;
    use crate::oracles::lcs_by_enumeration;
    use crate::splitlist::split_f1;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const SIGMA: u32 = 256;

    fn random_tree(rng: &mut ChaCha8Rng, width: u32) -> Formula {
        let mut leaves: Vec<(Side, u32, bool)> = (0..width)
            .flat_map(|i| [(Side::Left, i, rng.random()), (Side::Right, i, rng.random())])
            .collect();
        leaves.shuffle(rng);
        let keep = rng.random_range(2..=leaves.len());
        leaves.truncate(keep);
        let mut b = Builder::new();
        fn grow(b: &mut Builder, rng: &mut ChaCha8Rng, leaves: &[(Side, u32, bool)]) -> NodeId {
            if leaves.len() == 1 {
                let (s, i, n) = leaves[0];
                return b.lit(s, i, n);
            }
            let cut = rng.random_range(1..leaves.len());
            let l = grow(b, rng, &leaves[..cut]);
            let r = grow(b, rng, &leaves[cut..]);
            if rng.random() {
                b.and(vec![l, r])
            } else {
                b.or(vec![l, r])
            }
        }
        let root = grow(&mut b, rng, &leaves);
        b.finish(root, Class::DeMorgan, 2 * width, 0).unwrap()
    }

    fn random_string(rng: &mut ChaCha8Rng, len: usize, alphabet: u32) -> Vec<Symbol> {
        (0..len).map(|_| rng.random_range(0..alphabet)).collect()
    }

    #[test]
    fn lcs_frozen_values() {
        assert_eq!(lcs(&[1], &[1]), 1);
        assert_eq!(lcs(&[], &[1, 2]), 0);
        assert_eq!(lcs(&[0, 1], &[1, 0]), 1);
        // classic textbook pair, symbols as letters
        let x = [0, 1, 2, 1, 3, 0, 1];
        let y = [1, 3, 2, 0, 1, 0];
        assert_eq!(lcs(&x, &y), 4);
    }

    #[test]
    fn lcs_matches_enumeration_on_short_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..300 {
            let (lx, ly) = (rng.random_range(0..=8), rng.random_range(0..=8));
            let x = random_string(&mut rng, lx, 4);
            let y = random_string(&mut rng, ly, 4);
            assert_eq!(lcs(&x, &y), lcs_by_enumeration(&x, &y));
        }
    }

    #[test]
    fn lcs_greedy_prefix_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let (lx, ly) = (rng.random_range(0..=8), rng.random_range(0..=8));
            let x = random_string(&mut rng, lx, 3);
            let y = random_string(&mut rng, ly, 3);
            let k = rng.random_range(1..=5usize);
            let ones = vec![1u32; k];
            let px: Vec<u32> = ones.iter().chain(&x).copied().collect();
            let py: Vec<u32> = ones.iter().chain(&y).copied().collect();
            assert_eq!(lcs(&px, &py), k + lcs(&x, &y));
        }
    }

    #[test]
    fn input_gadgets_frozen() {
        let f = Formula::parse("(x 1)").unwrap();
        let g = gate_gadget(&f, f.root(), 1, 0, SIGMA);
        assert_eq!((g.x.as_slice(), g.y.as_slice(), g.rho), ([1].as_slice(), [1].as_slice(), 1));
        let g = gate_gadget(&f, f.root(), 0, 0, SIGMA);
        assert_eq!(g.x, vec![0]);
        assert_eq!(lcs(&g.x, &g.y), 0);

        let g = gate_gadget_simple(&f, f.root(), 1, 0);
        assert_eq!((g.x.as_slice(), g.y.as_slice(), g.rho), ([1].as_slice(), [1].as_slice(), 1));
        let g = gate_gadget_simple(&f, f.root(), 0, 0);
        assert_eq!(lcs(&g.x, &g.y), 0);

        // b-side leaf mirrors the roles
        let f = Formula::parse("(y 1)").unwrap();
        let g = gate_gadget(&f, f.root(), 0, 1, SIGMA);
        assert_eq!(lcs(&g.x, &g.y), 1);
        let g = gate_gadget(&f, f.root(), 0, 0, SIGMA);
        assert_eq!(lcs(&g.x, &g.y), 0);
    }

    #[test]
    fn and_gadget_frozen_layout() {
        // two leaves at height 1 get block alphabets 1280.. and 1285..,
        // the root gets 0..; beta = ceil(2 / sqrt(8)) = 1
        let f = Formula::parse("(and (x 1) (y 1))").unwrap();
        let g = gate_gadget(&f, f.root(), 1, 1, SIGMA);
        assert_eq!(g.x, vec![1281, 0, 1, 1286]);
        assert_eq!(g.y, vec![1281, 0, 1, 1286]);
        assert_eq!(g.rho, 4);
    }

    #[test]
    fn and_or_gadgets_match_dp_exactly() {
        for (text, op_and) in [("(and (x 1) (y 1))", true), ("(or (x 1) (y 1))", false)] {
            let f = Formula::parse(text).unwrap();
            let leaf = |on: bool| on as usize;
            for a in 0..2u32 {
                for b in 0..2u32 {
                    let g = gate_gadget(&f, f.root(), a, b, SIGMA);
                    let l = lcs(&g.x, &g.y);
                    let (l1, l2) = (leaf(a == 1), leaf(b == 1));
                    let expect = if op_and { 2 + l1 + l2 } else { 4 + l1.max(l2) };
                    assert_eq!(l, expect);
                    let truth = if op_and { a & b == 1 } else { a | b == 1 };
                    assert_eq!(l == g.rho, truth, "a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn simple_gadgets_frozen() {
        let f = Formula::parse("(or (x 1) (y 1))").unwrap();
        for (a, b) in [(0u32, 0u32), (0, 1), (1, 0), (1, 1)] {
            let g = gate_gadget_simple(&f, f.root(), a, b);
            assert_eq!(g.x, vec![a, 3]);
            assert_eq!(g.y, vec![2 + b, 1]);
            assert_eq!(g.rho, 1);
            assert_eq!(lcs(&g.x, &g.y) == g.rho, a | b == 1);
        }
        let f = Formula::parse("(and (x 1) (y 1))").unwrap();
        for (a, b) in [(0u32, 0u32), (0, 1), (1, 0), (1, 1)] {
            let g = gate_gadget_simple(&f, f.root(), a, b);
            assert_eq!(g.x, vec![a, 3]);
            assert_eq!(g.y, vec![1, 2 + b]);
            assert_eq!(g.rho, 2);
            assert_eq!(lcs(&g.x, &g.y) == g.rho, a & b == 1);
        }
    }

    #[test]
    fn gate_iff_on_random_trees_both_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..25 {
            let width = rng.random_range(2..=3);
            let f = random_tree(&mut rng, width).binarize();
            for g in f.reachable_ids() {
                for a in 0..1u32 << width {
                    for b in 0..1u32 << width {
                        let truth = f.eval_node(g, a as u64, b as u64);
                        let gd = gate_gadget(&f, g, a, b, SIGMA);
                        let l = lcs(&gd.x, &gd.y);
                        assert!(l <= gd.rho);
                        assert_eq!(l == gd.rho, truth, "constant variant at gate {g}");
                        let gd = gate_gadget_simple(&f, g, a, b);
                        let l = lcs(&gd.x, &gd.y);
                        assert!(l <= gd.rho);
                        assert_eq!(l == gd.rho, truth, "simple variant at gate {g}");
                    }
                }
            }
        }
    }

    #[test]
    fn gadget_strings_depend_on_one_side_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let f = random_tree(&mut rng, 3).binarize();
        let base = gate_gadget(&f, f.root(), 5, 2, SIGMA);
        for other in 0..8u32 {
            let g = gate_gadget(&f, f.root(), 5, other, SIGMA);
            assert_eq!(g.x, base.x);
            let g = gate_gadget(&f, f.root(), other, 2, SIGMA);
            assert_eq!(g.y, base.y);
            assert_eq!(g.rho, base.rho);
            assert_eq!(g.len(), base.len());
        }
    }

    // The builders assert the per-gate length bounds on every construction;
    // these sweeps make the bounds part of the visible test surface.
    #[test]
    fn simple_variant_length_bound_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..200 {
            let width = rng.random_range(2..=16);
            let f = random_tree(&mut rng, width).binarize();
            let b = build_simple(&f, f.root(), rng.random(), rng.random(), 0);
            assert!(b.gadget.len() <= (f.depth() + 1) * f.leaf_count());
        }
    }

    #[test]
    fn constant_variant_length_bound_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..50 {
            let width = rng.random_range(2..=8);
            let f = random_tree(&mut rng, width).binarize();
            let g = gate_gadget(&f, f.root(), rng.random(), rng.random(), SIGMA);
            let tau = 8f64.sqrt().sqrt();
            let bound =
                6.0 * tau * f.reachable_count() as f64 * (1.0 + 7.0 / tau).powi(f.depth() as i32);
            assert!(g.len() as f64 <= bound);
            assert!(g.rho as f64 <= bound / tau);
        }
    }

    /// All strings of `lambda` bits, as every n-tuple.
    fn bit_tuples(lambda: usize, n: usize) -> Vec<Vec<Vec<Symbol>>> {
        let strings: Vec<Vec<Symbol>> = (0..1u32 << lambda)
            .map(|code| (0..lambda).map(|i| (code >> i) & 1).collect())
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            out.push(idx.iter().map(|&i| strings[i].clone()).collect());
            let mut j = 0;
            loop {
                if j == n {
                    return out;
                }
                idx[j] += 1;
                if idx[j] < strings.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    fn check_combiner(xs: &[Vec<Symbol>], ys: &[Vec<Symbol>], lambda: usize, alphabet: u32) {
        let best =
            xs.iter().flat_map(|x| ys.iter().map(move |y| lcs(x, y))).max().unwrap();
        for rho in [best, best + 1] {
            let inst = combine_or(xs, ys, lambda, rho, alphabet).unwrap();
            let l = lcs(&inst.x, &inst.y);
            assert!(l <= inst.rho_prime);
            assert_eq!(l == inst.rho_prime, rho == best, "rho={rho} best={best}");
        }
    }

    #[test]
    fn combiner_exhaustive_small() {
        for lambda in 1..=3usize {
            for na in 1..=2usize {
                for nb in 1..=2usize {
                    for xs in bit_tuples(lambda, na) {
                        for ys in bit_tuples(lambda, nb) {
                            check_combiner(&xs, &ys, lambda, 2);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn combiner_random_larger() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..400 {
            let lambda = rng.random_range(1..=6);
            let alphabet = rng.random_range(2..=4);
            let xs: Vec<_> = (0..rng.random_range(1..=5))
                .map(|_| random_string(&mut rng, lambda, alphabet))
                .collect();
            let ys: Vec<_> = (0..rng.random_range(1..=5))
                .map(|_| random_string(&mut rng, lambda, alphabet))
                .collect();
            check_combiner(&xs, &ys, lambda, alphabet);
        }
    }

    #[test]
    fn combiner_rejects_bad_inputs() {
        let a = vec![vec![0u32, 1]];
        let b = vec![vec![0u32]];
        assert!(matches!(
            combine_or(&a, &b, 2, 1, 2),
            Err(LcsError::LengthMismatch { want: 2, got: 1 })
        ));
        assert!(matches!(combine_or(&[], &b, 1, 1, 2), Err(LcsError::EmptyList)));
    }

    fn random_f1(rng: &mut ChaCha8Rng, nvars: u32, per_side: usize) -> Formula {
        let half = nvars / 2;
        let mut b = Builder::new();
        let mut gates = Vec::new();
        for side in [Side::Left, Side::Right] {
            for _ in 0..rng.random_range(1..=per_side) {
                let mut t = crate::formula::Table::new_false(half);
                for p in 0..1usize << half {
                    t.set(p, rng.random());
                }
                gates.push(b.first_layer(side, t));
            }
        }
        gates.shuffle(rng);
        fn grow(b: &mut Builder, rng: &mut ChaCha8Rng, g: &[NodeId]) -> NodeId {
            if g.len() == 1 {
                return g[0];
            }
            let cut = rng.random_range(1..g.len());
            let l = grow(b, rng, &g[..cut]);
            let r = grow(b, rng, &g[cut..]);
            if rng.random() {
                b.and(vec![l, r])
            } else {
                b.or(vec![l, r])
            }
        }
        let root = if gates.len() == 1 {
            let g = gates[0];
            b.and(vec![g])
        } else {
            grow(&mut b, rng, &gates)
        };
        b.finish(root, Class::F1, nvars, 0).unwrap()
    }

    #[test]
    fn reduce_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for round in 0..12 {
            let nvars = [2, 4, 4, 6][round % 4];
            let f = random_f1(&mut rng, nvars, 3);
            let half = nvars / 2;
            let sat = (0..1u64 << half)
                .any(|a| (0..1u64 << half).any(|b| f.eval_halves(a, b)));
            let inst = split_f1(&f).unwrap();
            for variant in [Variant::Constant, Variant::Simple] {
                let k = default_k(variant, inst.formula.size());
                let out = reduce_to_lcs(&inst, variant, SIGMA, k).unwrap();
                assert_eq!(out.decide(), sat, "nvars={nvars} variant={variant:?}");
            }
        }
    }

    #[test]
    fn instance_file_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let f = random_f1(&mut rng, 4, 2);
        let inst = split_f1(&f).unwrap();
        let out = reduce_to_lcs(&inst, Variant::Simple, SIGMA, 2).unwrap();
        let text = out.to_text();
        let back = LcsInstance::parse(&text).unwrap();
        assert_eq!(back.x, out.x);
        assert_eq!(back.y, out.y);
        assert_eq!(back.alphabet, out.alphabet);
        assert_eq!(back.rho_prime, out.rho_prime);

        assert!(LcsInstance::parse("").is_err());
        assert!(LcsInstance::parse("1 1 2\n0\n0\n").is_err());
        assert!(LcsInstance::parse("1 1 2 1\n0\n5\n").is_err());
        assert!(LcsInstance::parse("2 1 2 1\n0\n0\n").is_err());
    }

    #[test]
    fn diagnostics_clean_at_default_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..10 {
            let f = random_tree(&mut rng, 4).binarize();
            let diag = occurrence_diagnostics(&f, SIGMA, rng.random(), rng.random());
            assert!(diag.is_empty(), "{diag:?}");
        }
    }
}
