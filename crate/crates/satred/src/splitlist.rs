//! Split a formula over its two input halves into vector lists plus a small
//! pair formula.
//!
//! For an F1 formula, every first-layer gate depends on one half of the
//! inputs only, so enumerating the `2^(nvars/2)` assignments of each half
//! tabulates all gate outputs into two lists of bit vectors `A` and `B`. The
//! original formula is satisfiable iff some pair `(A[i], B[j])` satisfies the
//! *pair formula*: the and/or superstructure re-read over fresh inputs, one
//! per first-layer gate. F2 formulas split the same way except that each
//! threshold gate turns into a comparison `a_j <= b_j` between one number
//! contributed by each side.
//!
//! Lists are indexed by the half-assignment order of [`crate::formula::Table`]
//! (variable `i` of the half is bit `i` of the index), and vector position
//! `j` is the `j`-th gate of that half in arena order.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Builder, Class, Formula, Node, NodeId, Side};

/// Widest supported vector; gate outputs are packed into `u32`.
pub const MAX_WIDTH: u32 = 32;

/// Largest supported half size when enumerating half-assignments.
pub const MAX_ENUM_HALF: u32 = 20;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("expected a {expected:?} formula, got {got:?}")]
    WrongClass { expected: Class, got: Class },
    #[error("{0} gates on one side exceed the supported width {MAX_WIDTH}")]
    TooWide(usize),
    #[error("half size {0} too large to enumerate")]
    HalfTooLarge(u32),
    #[error("malformed instance text: {0}")]
    Format(String),
}

/// Two lists of equal-width bit vectors and a pair formula over fresh inputs
/// `x_1..x_m` (bits of an `A` entry) and `y_1..y_m` (bits of a `B` entry).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairInstance {
    /// Vector width in bits; pair formula has `nvars = 2 * width`.
    pub width: u32,
    /// Bit `j` of an entry is the output of the `j`-th gate of that half.
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub formula: Formula,
}

impl PairInstance {
    /// Evaluates the pair formula on one vector pair.
    pub fn eval_pair(&self, av: u32, bv: u32) -> bool {
        self.formula.eval_halves(av as u64, bv as u64)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.width, self.a.len()).unwrap();
        out.push_str(&self.formula.to_text());
        for list in [&self.a, &self.b] {
            for &v in list {
                for j in 0..self.width {
                    out.push(if (v >> j) & 1 == 1 { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<PairInstance, SplitError> {
        let (width, n, formula, rest) = parse_common(text)?;
        if width > MAX_WIDTH {
            return Err(SplitError::TooWide(width as usize));
        }
        let mut lists = [Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut lines = rest.iter();
        for list in &mut lists {
            for _ in 0..n {
                let line = lines
                    .next()
                    .ok_or_else(|| SplitError::Format("missing vector line".into()))?;
                if line.len() != width as usize {
                    return Err(SplitError::Format(format!(
                        "vector line has {} bits, expected {width}",
                        line.len()
                    )));
                }
                let mut v = 0u32;
                for (j, c) in line.bytes().enumerate() {
                    match c {
                        b'0' => {}
                        b'1' => v |= 1 << j,
                        _ => {
                            return Err(SplitError::Format(format!(
                                "vector line may contain only 0/1, found {:?}",
                                c as char
                            )))
                        }
                    }
                }
                list.push(v);
            }
        }
        if lines.next().is_some() {
            return Err(SplitError::Format("trailing lines after vectors".into()));
        }
        let [a, b] = lists;
        let inst = PairInstance { width, a, b, formula };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<(), SplitError> {
        if self.formula.class() != Class::DeMorgan {
            return Err(SplitError::WrongClass {
                expected: Class::DeMorgan,
                got: self.formula.class(),
            });
        }
        if self.formula.nvars() != 2 * self.width {
            return Err(SplitError::Format(format!(
                "pair formula over {} vars does not match width {}",
                self.formula.nvars(),
                self.width
            )));
        }
        if self.a.len() != self.b.len() {
            return Err(SplitError::Format("lists differ in length".into()));
        }
        Ok(())
    }
}

/// Two lists of integer vectors and a pair formula whose `j`-th input fires
/// iff `a[j] <= b[j]` for the chosen vector pair. The formula reads its
/// inputs as left-side literals `x_1..x_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IneqInstance {
    /// Comparisons per pair; pair formula has `nvars = 2 * width`.
    pub width: u32,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub formula: Formula,
}

impl IneqInstance {
    /// Evaluates the pair formula on one vector pair.
    pub fn eval_pair(&self, av: &[i64], bv: &[i64]) -> bool {
        let mut z = 0u64;
        for j in 0..self.width as usize {
            if av[j] <= bv[j] {
                z |= 1 << j;
            }
        }
        self.formula.eval_halves(z, 0)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.width, self.a.len()).unwrap();
        out.push_str(&self.formula.to_text());
        for list in [&self.a, &self.b] {
            for v in list {
                let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                writeln!(out, "{}", line.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<IneqInstance, SplitError> {
        let (width, n, formula, rest) = parse_common(text)?;
        let mut lists = [Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut lines = rest.iter();
        for list in &mut lists {
            for _ in 0..n {
                let line = lines
                    .next()
                    .ok_or_else(|| SplitError::Format("missing vector line".into()))?;
                let v: Result<Vec<i64>, _> =
                    line.split_whitespace().map(|t| t.parse::<i64>()).collect();
                let v = v.map_err(|e| SplitError::Format(format!("bad integer: {e}")))?;
                if v.len() != width as usize {
                    return Err(SplitError::Format(format!(
                        "vector line has {} entries, expected {width}",
                        v.len()
                    )));
                }
                list.push(v);
            }
        }
        if lines.next().is_some() {
            return Err(SplitError::Format("trailing lines after vectors".into()));
        }
        let [a, b] = lists;
        let inst = IneqInstance { width, a, b, formula };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<(), SplitError> {
        if self.formula.nvars() != 2 * self.width {
            return Err(SplitError::Format(format!(
                "pair formula over {} vars does not match width {}",
                self.formula.nvars(),
                self.width
            )));
        }
        if self.a.len() != self.b.len() {
            return Err(SplitError::Format("lists differ in length".into()));
        }
        Ok(())
    }
}

/// Shared instance-file prelude: `width n`, then a formula (an optional run
/// of `;;` header lines and one expression line), then the vector lines.
fn parse_common(text: &str) -> Result<(u32, usize, Formula, Vec<&str>), SplitError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let dims = lines.next().ok_or_else(|| SplitError::Format("empty instance".into()))?;
    let mut it = dims.split_whitespace();
    let width: u32 = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| SplitError::Format("bad width".into()))?;
    let n: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| SplitError::Format("bad list length".into()))?;
    if it.next().is_some() {
        return Err(SplitError::Format("dimension line has extra fields".into()));
    }
    let mut formula_text = String::new();
    let mut rest = Vec::new();
    let mut seen_expr = false;
    for line in lines {
        if !seen_expr {
            formula_text.push_str(line);
            formula_text.push('\n');
            if !line.trim_start().starts_with(";;") {
                seen_expr = true;
            }
        } else {
            rest.push(line);
        }
    }
    if !seen_expr {
        return Err(SplitError::Format("missing formula".into()));
    }
    let formula =
        Formula::parse(&formula_text).map_err(|e| SplitError::Format(e.to_string()))?;
    Ok((width, n, formula, rest))
}

/// Splits an F1 formula into gate-output lists over each input half plus the
/// pair formula. Satisfiability is preserved pairwise:
/// `f(alpha ++ beta) == pair(A[alpha], B[beta])` for all half-assignments.
pub fn split_f1(f: &Formula) -> Result<PairInstance, SplitError> {
    if f.class() != Class::F1 {
        return Err(SplitError::WrongClass { expected: Class::F1, got: f.class() });
    }
    let half = f.half();
    if half > MAX_ENUM_HALF {
        return Err(SplitError::HalfTooLarge(half));
    }
    // Gates per side in arena order; a gate's list position is its fresh
    // input index in the pair formula.
    let mut gates: [Vec<NodeId>; 2] = [Vec::new(), Vec::new()];
    for id in f.reachable_ids() {
        if let Node::FirstLayer { side, .. } = f.node(id) {
            gates[*side as usize].push(id);
        }
    }
    let m_l = gates[0].len();
    let m_r = gates[1].len();
    let width = m_l.max(m_r).max(1);
    if width > MAX_WIDTH as usize {
        return Err(SplitError::TooWide(width));
    }

    let tabulate = |side: usize| -> Vec<u32> {
        (0..1usize << half)
            .map(|p| {
                let mut v = 0u32;
                for (j, &id) in gates[side].iter().enumerate() {
                    let Node::FirstLayer { table, .. } = f.node(id) else { unreachable!() };
                    if table.get(p) {
                        v |= 1 << j;
                    }
                }
                v
            })
            .collect()
    };
    let a = tabulate(0);
    let b = tabulate(1);

    let mut builder = Builder::new();
    let mut memo = vec![usize::MAX; f.node_count()];
    let root = rebuild(f, f.root(), &mut builder, &mut memo, &mut |id, bld| {
        let Node::FirstLayer { side, .. } = f.node(id) else { return None };
        let pos = gates[*side as usize].iter().position(|&g| g == id).expect("gate collected");
        Some(bld.lit(*side, pos as u32, false))
    });
    let formula = builder
        .finish(root, Class::DeMorgan, 2 * width as u32, 0)
        .map_err(|e| SplitError::Format(e.to_string()))?;
    Ok(PairInstance { width: width as u32, a, b, formula })
}

/// Splits an F2 formula: each threshold gate `sum c_i C_i <= t` becomes the
/// comparison `a_j <= b_j` with `a_j = (left-side sum) - t` and
/// `b_j = -(right-side sum)`, evaluated per half-assignment.
pub fn split_f2(f: &Formula) -> Result<IneqInstance, SplitError> {
    if f.class() != Class::F2 {
        return Err(SplitError::WrongClass { expected: Class::F2, got: f.class() });
    }
    let half = f.half();
    if half > MAX_ENUM_HALF {
        return Err(SplitError::HalfTooLarge(half));
    }
    let thrs: Vec<NodeId> = f
        .reachable_ids()
        .into_iter()
        .filter(|&id| matches!(f.node(id), Node::Thr { .. }))
        .collect();
    let width = thrs.len();
    if width > MAX_WIDTH as usize {
        return Err(SplitError::TooWide(width));
    }

    let n = 1usize << half;
    let mut a = vec![vec![0i64; width]; n];
    let mut b = vec![vec![0i64; width]; n];
    for (j, &id) in thrs.iter().enumerate() {
        let Node::Thr { t, terms } = f.node(id) else { unreachable!() };
        for p in 0..n {
            let mut left = 0i64;
            let mut right = 0i64;
            for &(c, ch) in terms {
                let Node::FirstLayer { side, table } = f.node(ch) else { unreachable!() };
                match side {
                    Side::Left => {
                        if table.get(p) {
                            left += c;
                        }
                    }
                    Side::Right => {
                        if table.get(p) {
                            right += c;
                        }
                    }
                }
            }
            a[p][j] = left - t;
            b[p][j] = -right;
        }
    }

    let mut builder = Builder::new();
    let mut memo = vec![usize::MAX; f.node_count()];
    let root = rebuild(f, f.root(), &mut builder, &mut memo, &mut |id, bld| {
        if !matches!(f.node(id), Node::Thr { .. }) {
            return None;
        }
        let pos = thrs.iter().position(|&g| g == id).expect("threshold collected");
        Some(bld.lit(Side::Left, pos as u32, false))
    });
    let formula = builder
        .finish(root, Class::DeMorgan, 2 * width as u32, 0)
        .map_err(|e| SplitError::Format(e.to_string()))?;
    Ok(IneqInstance { width: width as u32, a, b, formula })
}

/// Copies the and/or structure of `f` into `builder`, replacing nodes for
/// which `leaf` returns an id. Shared nodes are copied once.
fn rebuild(
    f: &Formula,
    id: NodeId,
    builder: &mut Builder,
    memo: &mut Vec<usize>,
    leaf: &mut dyn FnMut(NodeId, &mut Builder) -> Option<NodeId>,
) -> NodeId {
    if memo[id] != usize::MAX {
        return memo[id];
    }
    let new = match leaf(id, builder) {
        Some(n) => n,
        None => match f.node(id) {
            Node::And(c) => {
                let kids = c.iter().map(|&ch| rebuild(f, ch, builder, memo, leaf)).collect();
                builder.and(kids)
            }
            Node::Or(c) => {
                let kids = c.iter().map(|&ch| rebuild(f, ch, builder, memo, leaf)).collect();
                builder.or(kids)
            }
            other => unreachable!("unhandled node in rebuild: {other:?}"),
        },
    };
    memo[id] = new;
    new
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exhaustive_agreement_f1(f: &Formula) {
        let inst = split_f1(f).expect("split");
        assert!(inst.formula.is_read_once());
        let half = f.half();
        for alpha in 0..1u64 << half {
            for beta in 0..1u64 << half {
                let direct = f.eval_halves(alpha, beta);
                let paired =
                    inst.eval_pair(inst.a[alpha as usize], inst.b[beta as usize]);
                assert_eq!(direct, paired, "alpha={alpha:#b} beta={beta:#b}");
            }
        }
    }

    #[test]
    fn single_and_of_two_identity_gates() {
        // One gate per side, each the identity of its half's only variable.
        let f = Formula::parse(";; nvars=2\n(and (fl left \"01\") (fl right \"01\"))").unwrap();
        let inst = split_f1(&f).unwrap();
        assert_eq!(inst.width, 1);
        assert_eq!(inst.a, vec![0, 1]);
        assert_eq!(inst.b, vec![0, 1]);
        assert_eq!(inst.formula.to_text().lines().last().unwrap(), "(and (x 1) (y 1))");
        exhaustive_agreement_f1(&f);
    }

    #[test]
    fn split_agrees_exhaustively() {
        let texts = [
            ";; nvars=4\n(or (and (fl left \"0110\") (fl right \"1000\")) (fl left \"1110\"))",
            ";; nvars=4\n(and (or (fl left \"0001\") (fl right \"0111\") (fl left \"1001\")) \
             (or (fl right \"1100\") (fl left \"0101\")))",
            ";; nvars=6\n(or (fl left \"01101001\") (and (fl right \"11100100\") \
             (fl left \"00011011\")))",
        ];
        for t in texts {
            exhaustive_agreement_f1(&Formula::parse(t).unwrap());
        }
    }

    #[test]
    fn uneven_sides_pad_to_common_width() {
        let f = Formula::parse(
            ";; nvars=4\n(or (and (fl left \"0110\") (fl left \"1000\")) (fl right \"0111\"))",
        )
        .unwrap();
        let inst = split_f1(&f).unwrap();
        assert_eq!(inst.width, 2);
        // Right side has one gate; bit 1 of every B entry is padding.
        assert!(inst.b.iter().all(|&v| v >> 1 == 0));
        exhaustive_agreement_f1(&f);
    }

    #[test]
    fn threshold_split_signs() {
        // Single threshold x1 + y1 <= 1 over identity gates.
        let f = Formula::parse(
            ";; class=F2 nvars=2 M=2\n(thr 1 (1 (fl left \"01\")) (1 (fl right \"01\")))",
        )
        .unwrap();
        let inst = split_f2(&f).unwrap();
        assert_eq!(inst.width, 1);
        // a = C(alpha) - 1, b = -C'(beta)
        assert_eq!(inst.a, vec![vec![-1], vec![0]]);
        assert_eq!(inst.b, vec![vec![0], vec![-1]]);
        for alpha in 0..2usize {
            for beta in 0..2usize {
                let direct = f.eval_halves(alpha as u64, beta as u64);
                assert_eq!(direct, inst.eval_pair(&inst.a[alpha], &inst.b[beta]));
            }
        }
    }

    #[test]
    fn f2_split_agrees_exhaustively() {
        let texts = [
            ";; class=F2 nvars=4 M=4\n(or (thr 1 (2 (fl left \"0110\")) (-1 (fl right \"1001\"))) \
             (thr 0 (1 (fl left \"0011\")) (1 (fl right \"0101\"))))",
            ";; class=F2 nvars=4 M=3\n(and (thr -1 (-2 (fl right \"1110\")) (1 (fl left \"1000\"))) \
             (or (thr 2 (3 (fl left \"0100\"))) (thr 0 (-1 (fl right \"0010\")))))",
        ];
        for t in texts {
            let f = Formula::parse(t).unwrap();
            let inst = split_f2(&f).unwrap();
            let half = f.half();
            for alpha in 0..1usize << half {
                for beta in 0..1usize << half {
                    let direct = f.eval_halves(alpha as u64, beta as u64);
                    assert_eq!(
                        direct,
                        inst.eval_pair(&inst.a[alpha], &inst.b[beta]),
                        "alpha={alpha} beta={beta} in {t}"
                    );
                }
            }
        }
    }

    #[test]
    fn pair_instance_text_round_trip() {
        let f = Formula::parse(
            ";; nvars=4\n(or (and (fl left \"0110\") (fl right \"1000\")) (fl left \"1110\"))",
        )
        .unwrap();
        let inst = split_f1(&f).unwrap();
        let text = inst.to_text();
        let back = PairInstance::parse(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn ineq_instance_text_round_trip() {
        let f = Formula::parse(
            ";; class=F2 nvars=4 M=4\n(or (thr 1 (2 (fl left \"0110\")) (-1 (fl right \"1001\"))) \
             (thr 0 (1 (fl left \"0011\")) (1 (fl right \"0101\"))))",
        )
        .unwrap();
        let inst = split_f2(&f).unwrap();
        let text = inst.to_text();
        let back = IneqInstance::parse(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn wrong_class_rejected() {
        let f = Formula::parse("(and (x 1) (y 1))").unwrap();
        assert!(matches!(split_f1(&f), Err(SplitError::WrongClass { .. })));
        assert!(matches!(split_f2(&f), Err(SplitError::WrongClass { .. })));
    }
}
