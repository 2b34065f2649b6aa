//! Compile threshold pair instances into discrete Fréchet distance instances
//! over exact rational plane curves, and the reference decision procedure.
//!
//! Every construction keeps its curves *placed*: P hugs the point (0,1), Q
//! hugs (0,0), and the placement scale delta shrinks by 1/32 per gate level.
//! All comparisons are exact; the decision threshold is squared distance
//! against 1, inclusive.

use crate::formula::{Formula, Node, NodeId, Side};
use crate::splitlist::IneqInstance;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Exact rational scalar; all curve coordinates and distance thresholds.
pub type Rat = BigRational;

pub type Point = (Rat, Rat);

pub type Curve = Vec<Point>;

/// Squared Euclidean distance, exact.
pub fn dist2(p: &Point, q: &Point) -> Rat {
    let dx = &p.0 - &q.0;
    let dy = &p.1 - &q.1;
    &dx * &dx + &dy * &dy
}

/// Ratio cap for emitted curve lengths, measured against n·s. The
/// acceptance run reports the observed constant.
pub const FRECHET_LENGTH_C: f64 = 32.0;

#[derive(Debug, Error)]
pub enum FrechetError {
    #[error("comparison operands out of range: |{a}|, |{b}| must be at most {m}")]
    Bound { a: i64, b: i64, m: i64 },
    #[error("scale out of range: {0}")]
    Scale(String),
    #[error("gate needs at least one child")]
    Arity,
    #[error("placement violated: {0}")]
    Placement(String),
    #[error("bad instance: {0}")]
    Format(String),
}

/// A pair of curves built at placement scale `delta`: P stays within
/// x ∈ [−δ, δ], y ∈ [1−δ², 1+δ²] and Q within x ∈ [−δ, δ], y ∈ [−δ², δ²].
/// `notes` records construction diagnostics such as index-curve fallbacks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacedCurvePair {
    pub p: Curve,
    pub q: Curve,
    pub delta: Rat,
    pub notes: Vec<String>,
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Whether the pair respects the placement bands at scale `delta`.
pub fn check_placement(p: &Curve, q: &Curve, delta: &Rat) -> bool {
    let d2 = delta * delta;
    let one = Rat::one();
    p.iter().all(|(x, y)| x.abs() <= *delta && (y - &one).abs() <= d2)
        && q.iter().all(|(x, y)| x.abs() <= *delta && y.abs() <= d2)
}

fn translate_x(c: &Curve, dx: &Rat) -> Curve {
    c.iter().map(|(x, y)| (x + dx, y.clone())).collect()
}

fn dedupe(c: &Curve) -> (Vec<Point>, Vec<usize>) {
    let mut map: BTreeMap<&Point, usize> = BTreeMap::new();
    let mut classes: Vec<Point> = Vec::new();
    let ids = c
        .iter()
        .map(|pt| {
            *map.entry(pt).or_insert_with(|| {
                classes.push(pt.clone());
                classes.len() - 1
            })
        })
        .collect();
    (classes, ids)
}

/// Decision at an arbitrary threshold: is there a traversal staying within
/// `delta`? Reachability over the step relation (advance in P, in Q, or in
/// both). Coordinates repeat heavily across translated copies, so distances
/// are evaluated once per distinct vertex pair.
pub fn decide_at(p: &Curve, q: &Curve, delta: &Rat) -> bool {
    assert!(!p.is_empty() && !q.is_empty(), "curves are non-empty");
    let d2 = delta * delta;
    let (pc, pid) = dedupe(p);
    let (qc, qid) = dedupe(q);
    let close: Vec<Vec<bool>> = pc
        .iter()
        .map(|u| qc.iter().map(|v| dist2(u, v) <= d2).collect())
        .collect();
    let mut prev = vec![false; q.len()];
    let mut cur = vec![false; q.len()];
    for i in 0..p.len() {
        for j in 0..q.len() {
            let reachable = if i == 0 && j == 0 {
                true
            } else {
                (i > 0 && prev[j]) || (j > 0 && cur[j - 1]) || (i > 0 && j > 0 && prev[j - 1])
            };
            cur[j] = reachable && close[pid[i]][qid[j]];
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[q.len() - 1]
}

/// Discrete Fréchet decision at the fixed threshold 1 (inclusive).
pub fn frechet_decide(p: &Curve, q: &Curve) -> bool {
    decide_at(p, q, &Rat::one())
}

/// Input gate `[a <= b]` as two one-vertex curves: P = ((0, 1 + δ²a/M)),
/// Q = ((0, δ²b/M)). Their distance is 1 + δ²(a−b)/M, at most 1 exactly
/// when a ≤ b.
pub fn comparison_gadget(delta: &Rat, a: i64, b: i64, m: i64) -> Result<PlacedCurvePair, FrechetError> {
    if m < 1 || a.abs() > m || b.abs() > m {
        return Err(FrechetError::Bound { a, b, m });
    }
    if *delta <= Rat::zero() || *delta >= Rat::one() {
        return Err(FrechetError::Scale(format!("delta {delta} outside (0,1)")));
    }
    let d2 = delta * delta;
    let p = vec![(Rat::zero(), Rat::one() + &d2 * rat(a, m))];
    let q = vec![(Rat::zero(), &d2 * rat(b, m))];
    Ok(PlacedCurvePair { p, q, delta: delta.clone(), notes: Vec::new() })
}

/// Conjunction: children translated along x by +δ/2 (odd positions,
/// 1-based) or −δ/2 (even), then concatenated. Adjacent blocks land on
/// opposite sides, so a traversal within distance 1 must walk child ℓ of P
/// against child ℓ of Q.
pub fn and_gadget(children: Vec<PlacedCurvePair>, delta: &Rat) -> Result<PlacedCurvePair, FrechetError> {
    if children.is_empty() {
        return Err(FrechetError::Arity);
    }
    if *delta <= Rat::zero() || *delta >= Rat::one() {
        return Err(FrechetError::Scale(format!("delta {delta} outside (0,1)")));
    }
    let quarter = delta * rat(1, 4);
    for (i, ch) in children.iter().enumerate() {
        if !check_placement(&ch.p, &ch.q, &quarter) {
            return Err(FrechetError::Placement(format!(
                "and child {i} not placed at delta/4 = {quarter}"
            )));
        }
    }
    let half = delta * rat(1, 2);
    let mut p = Vec::new();
    let mut q = Vec::new();
    let mut notes = Vec::new();
    for (i, ch) in children.iter().enumerate() {
        let shift = if i % 2 == 0 { half.clone() } else { -&half };
        p.extend(translate_x(&ch.p, &shift));
        q.extend(translate_x(&ch.q, &shift));
        notes.extend(ch.notes.iter().cloned());
    }
    if !check_placement(&p, &q, delta) {
        return Err(FrechetError::Placement(format!("and output not placed at {delta}")));
    }
    Ok(PlacedCurvePair { p, q, delta: delta.clone(), notes })
}

/// Index curves for child ℓ of an or gate: a comparison pair per side that
/// matches only equal indices. The written form offsets by δ/32·ℓ/n, which
/// keeps the index curves δ/32-placed only when 32k ≤ δn; otherwise the
/// squared-scale offsets (δ/32)²·ℓ/n are used, which always fit.
fn index_offsets_squared(k: usize, bound: usize, delta: &Rat) -> bool {
    rat(32 * k as i64, bound as i64) > *delta
}

/// Wraps each or-child between its index curves, AND-style at scale δ/8:
/// index curves translated by +δ/16, the child by −δ/16. Wrapped pairs
/// match only on the diagonal.
fn adapt_children(
    children: &[PlacedCurvePair],
    bound: usize,
    delta: &Rat,
    squared: bool,
) -> Vec<(Curve, Curve)> {
    let dc = delta * rat(1, 32);
    let shift = delta * rat(1, 16);
    let back = -&shift;
    let one = Rat::one();
    children
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let l = i as i64 + 1;
            let scale = if squared { &dc * &dc } else { dc.clone() };
            let off = &scale * rat(l, bound as i64);
            let mut p = vec![(shift.clone(), &one + &off)];
            p.extend(translate_x(&ch.p, &back));
            p.push((shift.clone(), &one - &off));
            let mut q = vec![(shift.clone(), off.clone())];
            q.extend(translate_x(&ch.q, &back));
            q.push((shift.clone(), -&off));
            (p, q)
        })
        .collect()
}

/// The disjunction scaffold: P strings its blocks between fresh start/stop
/// vertices per block, Q wraps all its blocks once. A traversal within
/// distance 1 exists exactly when some block pair (i, j) is within 1.
fn outer_or(ps: &[Curve], qs: &[Curve], delta: &Rat) -> (Curve, Curve) {
    let d2 = delta * delta;
    let half = delta * rat(1, 2);
    let one = Rat::one();
    let zero = Rat::zero();
    let s_p = (-&half, &one - &d2);
    let t_p = (half.clone(), &one - &d2);
    let b_p = (-&half, one.clone());
    let e_p = (half.clone(), one);
    let s_q = (-&half, d2.clone());
    let t_q = (half.clone(), d2.clone());
    let s_q_star = (-&half, -&d2);
    let t_q_star = (half.clone(), -&d2);
    let b_q = (-&half, zero.clone());
    let e_q = (half, zero);
    let mut p = Vec::new();
    for block in ps {
        p.push(s_p.clone());
        p.push(b_p.clone());
        p.extend(block.iter().cloned());
        p.push(e_p.clone());
        p.push(t_p.clone());
    }
    let mut q = vec![s_q, s_q_star];
    for block in qs {
        q.push(b_q.clone());
        q.extend(block.iter().cloned());
        q.push(e_q.clone());
    }
    q.push(t_q_star);
    q.push(t_q);
    (p, q)
}

#[cfg(debug_assertions)]
fn check_adaptation(children: &[PlacedCurvePair], wrapped: &[(Curve, Curve)]) {
    let one = Rat::one();
    for (i, (wp, _)) in wrapped.iter().enumerate() {
        for (j, (_, wq)) in wrapped.iter().enumerate() {
            let hit = decide_at(wp, wq, &one);
            if i == j {
                let child = decide_at(&children[i].p, &children[i].q, &one);
                assert_eq!(hit, child, "index wrap changed child {i} verdict");
            } else {
                assert!(!hit, "wrapped pair ({i}, {j}) not excluded");
            }
        }
    }
}

/// Disjunction: children wrapped between index curves (so only equal
/// indices can match), then combined with the scaffold. `child_index_bound`
/// is the denominator of the index offsets and must be at least the fanin.
pub fn or_gadget(
    children: Vec<PlacedCurvePair>,
    child_index_bound: usize,
    delta: &Rat,
) -> Result<PlacedCurvePair, FrechetError> {
    if children.is_empty() {
        return Err(FrechetError::Arity);
    }
    let k = children.len();
    if child_index_bound < k {
        return Err(FrechetError::Scale(format!(
            "child index bound {child_index_bound} below fanin {k}"
        )));
    }
    if *delta <= Rat::zero() || *delta > rat(1, 2) {
        return Err(FrechetError::Scale(format!("delta {delta} outside (0,1/2]")));
    }
    let dc = delta * rat(1, 32);
    for (i, ch) in children.iter().enumerate() {
        if !check_placement(&ch.p, &ch.q, &dc) {
            return Err(FrechetError::Placement(format!(
                "or child {i} not placed at delta/32 = {dc}"
            )));
        }
    }
    let squared = index_offsets_squared(k, child_index_bound, delta);
    let wrapped = adapt_children(&children, child_index_bound, delta, squared);
    let eighth = delta * rat(1, 8);
    for (i, (wp, wq)) in wrapped.iter().enumerate() {
        if !check_placement(wp, wq, &eighth) {
            return Err(FrechetError::Placement(format!(
                "wrapped or child {i} not placed at delta/8 = {eighth}"
            )));
        }
    }
    // exact-arithmetic DPs; affordable only while the gate is small
    #[cfg(debug_assertions)]
    if children.len() <= 3 && children.iter().all(|c| c.p.len() <= 8 && c.q.len() <= 8) {
        check_adaptation(&children, &wrapped);
    }

    let ps: Vec<Curve> = wrapped.iter().map(|(p, _)| p.clone()).collect();
    let qs: Vec<Curve> = wrapped.iter().map(|(_, q)| q.clone()).collect();
    let (p, q) = outer_or(&ps, &qs, delta);
    if !check_placement(&p, &q, delta) {
        return Err(FrechetError::Placement(format!("or output not placed at {delta}")));
    }
    let mut notes: Vec<String> = children.into_iter().flat_map(|c| c.notes).collect();
    if squared {
        notes.push(format!(
            "or gate at delta {delta}: index offsets at squared scale (fanin {k}, bound {child_index_bound})"
        ));
    }
    Ok(PlacedCurvePair { p, q, delta: delta.clone(), notes })
}

/// Curves for the subformula rooted at `id` on one vector pair. The P side
/// depends only on `av` and the Q side only on `bv`.
pub fn gate_pair(
    f: &Formula,
    id: NodeId,
    av: &[i64],
    bv: &[i64],
    m: i64,
    delta: &Rat,
) -> Result<PlacedCurvePair, FrechetError> {
    match f.node(id) {
        Node::Lit { side: Side::Left, index, neg: false } => {
            let j = *index as usize;
            comparison_gadget(delta, av[j], bv[j], m)
        }
        Node::And(c) => {
            let dc = delta * rat(1, 32);
            let children = c
                .iter()
                .map(|&ch| gate_pair(f, ch, av, bv, m, &dc))
                .collect::<Result<Vec<_>, _>>()?;
            and_gadget(children, delta)
        }
        Node::Or(c) => {
            let dc = delta * rat(1, 32);
            let children = c
                .iter()
                .map(|&ch| gate_pair(f, ch, av, bv, m, &dc))
                .collect::<Result<Vec<_>, _>>()?;
            or_gadget(children, c.len(), delta)
        }
        _ => panic!("inequality pair formulas are monotone and/or over left-side comparisons"),
    }
}

/// Fréchet decision instance: does a traversal of P and Q stay within
/// distance 1?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrechetInstance {
    pub p: Curve,
    pub q: Curve,
    /// Construction diagnostics: index-curve scale switches, denominator
    /// statistics. Not serialized.
    pub notes: Vec<String>,
}

impl FrechetInstance {
    pub fn decide(&self) -> bool {
        frechet_decide(&self.p, &self.q)
    }

    /// One vertex per line as `num/den num/den`; P, a blank line, then Q.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in &self.p {
            let _ = writeln!(out, "{}/{} {}/{}", x.numer(), x.denom(), y.numer(), y.denom());
        }
        out.push('\n');
        for (x, y) in &self.q {
            let _ = writeln!(out, "{}/{} {}/{}", x.numer(), x.denom(), y.numer(), y.denom());
        }
        out
    }

    pub fn parse(s: &str) -> Result<FrechetInstance, FrechetError> {
        fn scalar(tok: &str) -> Result<Rat, FrechetError> {
            let (n, d) = tok
                .split_once('/')
                .ok_or_else(|| FrechetError::Format(format!("want num/den, got {tok:?}")))?;
            let n: BigInt = n.parse().map_err(|_| FrechetError::Format(format!("bad numerator {n:?}")))?;
            let d: BigInt = d.parse().map_err(|_| FrechetError::Format(format!("bad denominator {d:?}")))?;
            if d.is_zero() {
                return Err(FrechetError::Format("zero denominator".into()));
            }
            Ok(Rat::new(n, d))
        }
        let mut curves: Vec<Curve> = vec![Vec::new()];
        for line in s.lines() {
            if line.trim().is_empty() {
                curves.push(Vec::new());
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [x, y] = toks[..] else {
                return Err(FrechetError::Format(format!("want two coordinates, got {line:?}")));
            };
            curves.last_mut().unwrap().push((scalar(x)?, scalar(y)?));
        }
        curves.retain(|c| !c.is_empty());
        let [p, q] = &curves[..] else {
            return Err(FrechetError::Format(format!(
                "want two curves separated by a blank line, got {}",
                curves.len()
            )));
        };
        Ok(FrechetInstance { p: p.clone(), q: q.clone(), notes: Vec::new() })
    }
}

fn bigpow(base: u32, exp: u32) -> BigInt {
    (0..exp).fold(BigInt::one(), |acc, _| acc * base)
}

/// Compiles an inequality pair instance to a Fréchet decision instance. Per
/// entry, the root gate curves are built at scale 1/16 (P from the a-side
/// vector, Q from the b-side); the scaffold at delta 1/2 then offers every
/// (a, b) pair. The decision equals the naive solver's verdict.
pub fn reduce_to_frechet(inst: &IneqInstance) -> Result<FrechetInstance, FrechetError> {
    let width = inst.width as usize;
    let m = inst
        .a
        .iter()
        .chain(&inst.b)
        .flat_map(|v| v.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(1)
        .max(1);
    let delta = rat(1, 2);
    let dchild = rat(1, 16);
    let zeros = vec![0i64; width];
    let root = inst.formula.root();
    let mut notes = Vec::new();
    let mut ps = Vec::new();
    for av in &inst.a {
        let pair = gate_pair(&inst.formula, root, av, &zeros, m, &dchild)?;
        notes.extend(pair.notes);
        ps.push(pair.p);
    }
    let mut qs = Vec::new();
    for bv in &inst.b {
        let pair = gate_pair(&inst.formula, root, &zeros, bv, m, &dchild)?;
        notes.extend(pair.notes);
        qs.push(pair.q);
    }
    let (p, q) = outer_or(&ps, &qs, &delta);

    let n = inst.a.len().max(inst.b.len());
    let nodes = inst.formula.reachable_count();
    let cap = FRECHET_LENGTH_C * n as f64 * nodes as f64;
    assert!(
        p.len() as f64 <= cap && q.len() as f64 <= cap,
        "curve lengths {} / {} over cap {cap:.0}",
        p.len(),
        q.len()
    );

    let mut dmax = BigInt::one();
    for (x, y) in p.iter().chain(q.iter()) {
        dmax = dmax.max(x.denom().clone()).max(y.denom().clone());
    }
    let depth = inst.formula.depth() as u32;
    let written = bigpow(32, depth + 2) * m * n as i64;
    // The written cap undercounts the squaring of delta; the doubled
    // exponent is the one the construction actually meets.
    let corrected = bigpow(32, 2 * depth + 4) * m * n as i64;
    notes.push(format!(
        "max coordinate denominator {dmax}; cap 32^(depth+2)*M*n = {written} {}",
        if dmax <= written { "holds" } else { "exceeded (squared-delta growth)" }
    ));
    assert!(dmax <= corrected, "denominator {dmax} over corrected cap {corrected}");

    notes.sort();
    notes.dedup();
    Ok(FrechetInstance { p, q, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Builder, Class, Table};
    use crate::oracles::frechet_by_enumeration;
    use crate::pairsolve::solve_ineq_naive;
    use crate::splitlist::split_f2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn point(xn: i64, xd: i64, yn: i64, yd: i64) -> Point {
        (rat(xn, xd), rat(yn, yd))
    }

    #[test]
    fn decide_frozen_cases() {
        let origin = vec![point(0, 1, 0, 1)];
        assert!(frechet_decide(&origin, &origin));
        let up = vec![point(0, 1, 1, 1)];
        assert!(frechet_decide(&up, &origin), "distance exactly 1 is inside");
        let above = vec![point(0, 1, 1001, 1000)];
        assert!(!frechet_decide(&above, &origin));
    }

    fn random_curve(rng: &mut ChaCha8Rng, len: usize) -> Curve {
        (0..len)
            .map(|_| {
                let xn = rng.random_range(-6..=6);
                let yn = rng.random_range(-6..=6);
                let d = rng.random_range(1..=4);
                point(xn, d, yn, d)
            })
            .collect()
    }

    #[test]
    fn decide_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let one = Rat::one();
        let wide = rat(3, 2);
        for _ in 0..200 {
            let (lp, lq) = (rng.random_range(1..=5), rng.random_range(1..=5));
            let p = random_curve(&mut rng, lp);
            let q = random_curve(&mut rng, lq);
            for d in [&one, &wide] {
                assert_eq!(decide_at(&p, &q, d), frechet_by_enumeration(&p, &q, d));
            }
        }
    }

    #[test]
    fn decide_symmetric_and_translation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..60 {
            let (lp, lq) = (rng.random_range(1..=5), rng.random_range(1..=5));
            let p = random_curve(&mut rng, lp);
            let q = random_curve(&mut rng, lq);
            let verdict = frechet_decide(&p, &q);
            assert_eq!(verdict, frechet_decide(&q, &p));
            let (dx, dy) = (rat(rng.random_range(-9..=9), 2), rat(rng.random_range(-9..=9), 3));
            let shift = |c: &Curve| -> Curve {
                c.iter().map(|(x, y)| (x + &dx, y + &dy)).collect()
            };
            assert_eq!(verdict, frechet_decide(&shift(&p), &shift(&q)));
        }
    }

    #[test]
    fn comparison_gadget_cases() {
        let quarter = rat(1, 4);
        let equal = comparison_gadget(&quarter, 2, 2, 3).unwrap();
        assert_eq!(dist2(&equal.p[0], &equal.q[0]), Rat::one());
        assert!(frechet_decide(&equal.p, &equal.q));

        // a = M, b = -M at delta 1/4: distance 9/8, squared 81/64
        let far = comparison_gadget(&quarter, 3, -3, 3).unwrap();
        assert_eq!(dist2(&far.p[0], &far.q[0]), rat(81, 64));
        assert!(!frechet_decide(&far.p, &far.q));

        for a in -3..=3i64 {
            for b in -3..=3i64 {
                let g = comparison_gadget(&quarter, a, b, 3).unwrap();
                assert_eq!(frechet_decide(&g.p, &g.q), a <= b, "a={a} b={b}");
                assert!(check_placement(&g.p, &g.q, &quarter));
            }
        }
        assert!(matches!(
            comparison_gadget(&quarter, 4, 0, 3),
            Err(FrechetError::Bound { .. })
        ));
        assert!(comparison_gadget(&Rat::one(), 0, 0, 1).is_err());
    }

    /// Comparison children at delta/32 with fixed verdicts.
    fn cmp_children(delta: &Rat, truths: &[bool]) -> Vec<PlacedCurvePair> {
        let dc = delta * rat(1, 32);
        truths
            .iter()
            .map(|&t| comparison_gadget(&dc, if t { -1 } else { 1 }, 0, 1).unwrap())
            .collect()
    }

    #[test]
    fn and_gadget_truth_tables() {
        let half = rat(1, 2);
        for t1 in [false, true] {
            for t2 in [false, true] {
                let g = and_gadget(cmp_children(&half, &[t1, t2]), &half).unwrap();
                assert_eq!(frechet_decide(&g.p, &g.q), t1 && t2, "{t1} {t2}");
                assert!(check_placement(&g.p, &g.q, &half));
            }
            let single = and_gadget(cmp_children(&half, &[t1]), &half).unwrap();
            assert_eq!(frechet_decide(&single.p, &single.q), t1);
        }
        assert!(matches!(and_gadget(vec![], &half), Err(FrechetError::Arity)));
        // children at delta/32 of a larger scale violate the delta/4 bound
        let coarse = cmp_children(&Rat::one(), &[true]);
        assert!(matches!(
            and_gadget(coarse, &rat(1, 64)),
            Err(FrechetError::Placement(_))
        ));
    }

    #[test]
    fn or_gadget_truth_tables() {
        let half = rat(1, 2);
        for t1 in [false, true] {
            for t2 in [false, true] {
                let g = or_gadget(cmp_children(&half, &[t1, t2]), 2, &half).unwrap();
                assert_eq!(frechet_decide(&g.p, &g.q), t1 || t2, "{t1} {t2}");
                assert!(check_placement(&g.p, &g.q, &half));
            }
            let single = or_gadget(cmp_children(&half, &[t1]), 1, &half).unwrap();
            assert_eq!(frechet_decide(&single.p, &single.q), t1);
        }
        assert!(matches!(or_gadget(vec![], 1, &half), Err(FrechetError::Arity)));
        assert!(or_gadget(cmp_children(&half, &[true]), 0, &half).is_err());
    }

    #[test]
    fn index_wrap_excludes_cross_pairs() {
        // squared-scale offsets, the usual path
        let half = rat(1, 2);
        let children = cmp_children(&half, &[true, true, false]);
        assert!(index_offsets_squared(3, 3, &half));
        let wrapped = adapt_children(&children, 3, &half, true);
        let eighth = &half * rat(1, 8);
        let one = Rat::one();
        for (i, (wp, _)) in wrapped.iter().enumerate() {
            for (j, (_, wq)) in wrapped.iter().enumerate() {
                let hit = decide_at(wp, wq, &one);
                if i == j {
                    let child = decide_at(&children[i].p, &children[i].q, &one);
                    assert_eq!(hit, child);
                } else {
                    assert!(!hit, "({i},{j}) not excluded");
                }
            }
        }
        assert!(wrapped.iter().all(|(p, q)| check_placement(p, q, &eighth)));

        // written offsets survive when the index bound dwarfs the fanin
        let wide = rat(3, 4);
        let children = cmp_children(&wide, &[true, false]);
        assert!(!index_offsets_squared(2, 128, &wide));
        let wrapped = adapt_children(&children, 128, &wide, false);
        let eighth = &wide * rat(1, 8);
        assert!(wrapped.iter().all(|(p, q)| check_placement(p, q, &eighth)));
        for (i, (wp, _)) in wrapped.iter().enumerate() {
            for (j, (_, wq)) in wrapped.iter().enumerate() {
                let hit = decide_at(wp, wq, &one);
                if i == j {
                    assert_eq!(hit, decide_at(&children[i].p, &children[i].q, &one));
                } else {
                    assert!(!hit);
                }
            }
        }
    }

    fn ineq_tree(rng: &mut ChaCha8Rng, width: u32) -> Formula {
        let mut leaves: Vec<u32> = (0..width).collect();
        leaves.shuffle(rng);
        let keep = rng.random_range(1..=leaves.len());
        leaves.truncate(keep);
        let mut b = Builder::new();
        fn grow(b: &mut Builder, rng: &mut ChaCha8Rng, leaves: &[u32]) -> NodeId {
            if leaves.len() == 1 {
                return b.lit(Side::Left, leaves[0], false);
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
        let root = if leaves.len() == 1 {
            let l = b.lit(Side::Left, leaves[0], false);
            b.and(vec![l])
        } else {
            grow(&mut b, rng, &leaves)
        };
        b.finish(root, Class::DeMorgan, 2 * width, 0).unwrap()
    }

    #[test]
    fn gate_level_iff_small_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let delta = rat(1, 16);
        for _ in 0..8 {
            let width = 3u32;
            let f = ineq_tree(&mut rng, width);
            for _ in 0..2 {
                let av: Vec<i64> = (0..width).map(|_| rng.random_range(-2..=2)).collect();
                let bv: Vec<i64> = (0..width).map(|_| rng.random_range(-2..=2)).collect();
                let z: u64 = (0..width as usize)
                    .map(|j| u64::from(av[j] <= bv[j]) << j)
                    .sum();
                for id in f.reachable_ids() {
                    if matches!(f.node(id), Node::Lit { .. } | Node::And(_) | Node::Or(_)) {
                        let g = gate_pair(&f, id, &av, &bv, 2, &delta).unwrap();
                        assert!(check_placement(&g.p, &g.q, &delta));
                        assert_eq!(
                            frechet_decide(&g.p, &g.q),
                            f.eval_node(id, z, 0),
                            "node {id}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn p_side_ignores_b_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let f = ineq_tree(&mut rng, 3);
        let delta = rat(1, 16);
        let av = vec![1, -2, 0];
        let g1 = gate_pair(&f, f.root(), &av, &[0, 0, 0], 2, &delta).unwrap();
        let g2 = gate_pair(&f, f.root(), &av, &[2, -1, 1], 2, &delta).unwrap();
        assert_eq!(g1.p, g2.p);
        let bv = vec![1, 1, -1];
        let g3 = gate_pair(&f, f.root(), &[0, 0, 0], &bv, 2, &delta).unwrap();
        let g4 = gate_pair(&f, f.root(), &[2, -2, 1], &bv, 2, &delta).unwrap();
        assert_eq!(g3.q, g4.q);
    }

    fn random_f2(rng: &mut ChaCha8Rng, nvars: u32, nthr: usize, m: i64) -> Formula {
        let half = nvars / 2;
        let mut b = Builder::new();
        let mut fls = Vec::new();
        for side in [Side::Left, Side::Right] {
            for _ in 0..rng.random_range(1..=2) {
                let mut t = Table::new_false(half);
                for p in 0..1usize << half {
                    t.set(p, rng.random());
                }
                fls.push(b.first_layer(side, t));
            }
        }
        let mut thrs = Vec::new();
        for _ in 0..rng.random_range(1..=nthr) {
            let kterms = rng.random_range(1..=fls.len());
            let mut picks = fls.clone();
            picks.shuffle(rng);
            picks.truncate(kterms);
            let terms: Vec<(i64, NodeId)> =
                picks.iter().map(|&g| (rng.random_range(-m..=m), g)).collect();
            let t = rng.random_range(-m..=m);
            thrs.push(b.thr(t, terms));
        }
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
        let root = if thrs.len() == 1 {
            let t = thrs[0];
            b.and(vec![t])
        } else {
            grow(&mut b, rng, &thrs)
        };
        b.finish(root, Class::F2, nvars, m).unwrap()
    }

    #[test]
    fn reduce_agrees_with_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let (mut sat_seen, mut unsat_seen) = (false, false);
        for round in 0..10 {
            let nvars = [2, 4][round % 2];
            let f = random_f2(&mut rng, nvars, 3, 3);
            let inst = split_f2(&f).unwrap();
            let sat = solve_ineq_naive(&inst).is_some();
            sat_seen |= sat;
            unsat_seen |= !sat;
            let out = reduce_to_frechet(&inst).unwrap();
            assert_eq!(out.decide(), sat, "nvars={nvars}");
            assert!(check_placement(&out.p, &out.q, &rat(1, 2)));
        }
        assert!(sat_seen && unsat_seen, "mix of verdicts exercised");
    }

    #[test]
    fn scaffold_points_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let f = random_f2(&mut rng, 2, 2, 2);
        let out = reduce_to_frechet(&split_f2(&f).unwrap()).unwrap();
        // delta = 1/2: s_P = (-1/4, 3/4), b_P = (-1/4, 1) open every P block
        assert_eq!(out.p[0], point(-1, 4, 3, 4));
        assert_eq!(out.p[1], point(-1, 4, 1, 1));
        assert_eq!(out.p[out.p.len() - 1], point(1, 4, 3, 4));
        // Q starts s_Q, s_Q* and ends t_Q*, t_Q
        assert_eq!(out.q[0], point(-1, 4, 1, 4));
        assert_eq!(out.q[1], point(-1, 4, -1, 4));
        assert_eq!(out.q[out.q.len() - 2], point(1, 4, -1, 4));
        assert_eq!(out.q[out.q.len() - 1], point(1, 4, 1, 4));
        // serialization spot check
        let text = out.to_text();
        assert!(text.starts_with("-1/4 3/4\n-1/4 1/1\n"));
        assert!(out.notes.iter().any(|n| n.contains("denominator")));
    }

    #[test]
    fn instance_file_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let f = random_f2(&mut rng, 4, 2, 2);
        let out = reduce_to_frechet(&split_f2(&f).unwrap()).unwrap();
        let back = FrechetInstance::parse(&out.to_text()).unwrap();
        assert_eq!(back.p, out.p);
        assert_eq!(back.q, out.q);

        assert!(FrechetInstance::parse("").is_err());
        assert!(FrechetInstance::parse("0/1 1/1\n").is_err());
        assert!(FrechetInstance::parse("0/1 1/1\n\n0/0 0/1\n").is_err());
        assert!(FrechetInstance::parse("0/1 1/1 2/1\n\n0/1 0/1\n").is_err());
        assert!(FrechetInstance::parse("x 1/1\n\n0/1 0/1\n").is_err());
    }
}
