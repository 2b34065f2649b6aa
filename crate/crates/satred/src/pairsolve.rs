//! Solvers for the vector-pair satisfiability instances produced by the
//! split-and-list step.
//!
//! [`solve_naive`] tries every pair. [`four_russians`] groups one list into
//! blocks of `L = ceil(eps * log2 n)` vectors, cuts the pair formula into
//! parts of bounded weight ([`decompose`]), and tabulates each part's output
//! on a whole block at once, so a block's worth of pairs costs a few table
//! lookups and word operations per part instead of a formula evaluation per
//! pair.

use thiserror::Error;

use crate::formula::{Class, Formula, Node, NodeId, Side};
use crate::splitlist::{IneqInstance, PairInstance};

/// First satisfying pair `(i, j)` with `A[i], B[j]`, scanning `i` outermost.
pub fn solve_naive(inst: &PairInstance) -> Option<(usize, usize)> {
    for (i, &av) in inst.a.iter().enumerate() {
        for (j, &bv) in inst.b.iter().enumerate() {
            if inst.eval_pair(av, bv) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Number of satisfying pairs.
pub fn count_naive(inst: &PairInstance) -> u64 {
    let mut total = 0;
    for &av in &inst.a {
        for &bv in &inst.b {
            if inst.eval_pair(av, bv) {
                total += 1;
            }
        }
    }
    total
}

/// First satisfying pair of an inequality instance, scanning `i` outermost.
pub fn solve_ineq_naive(inst: &IneqInstance) -> Option<(usize, usize)> {
    for (i, av) in inst.a.iter().enumerate() {
        for (j, bv) in inst.b.iter().enumerate() {
            if inst.eval_pair(av, bv) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Number of satisfying pairs of an inequality instance.
pub fn count_ineq_naive(inst: &IneqInstance) -> u64 {
    let mut total = 0;
    for av in &inst.a {
        for bv in &inst.b {
            if inst.eval_pair(av, bv) {
                total += 1;
            }
        }
    }
    total
}

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("decomposition needs a deMorgan formula, got {0:?}")]
    WrongClass(Class),
    #[error("decomposition needs fanin at most two; binarize first")]
    NotBinary,
    #[error("block weight must be at least 2, got {0}")]
    BlockTooSmall(u64),
}

/// One piece of a decomposed formula: a small and/or tree whose leaves are
/// input positions or the outputs of earlier parts (*specials*).
#[derive(Debug, Clone)]
pub struct Part {
    pub nodes: Vec<PartNode>,
    pub root: usize,
    /// Left-half input indices read by this part; [`PartNode::AVar`] `pos`
    /// points here. Order is first use in a left-to-right walk.
    pub a_leaves: Vec<u32>,
    pub b_leaves: Vec<u32>,
    /// Indices of earlier parts feeding this one, in first-use order.
    pub specials: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub enum PartNode {
    AVar { pos: usize, neg: bool },
    BVar { pos: usize, neg: bool },
    Special { slot: usize },
    And(usize, usize),
    Or(usize, usize),
}

impl Part {
    /// Evaluates the part on packed leaf patterns and special inputs. Bit
    /// `pos` of `apat`/`bpat` is the leaf at that position of
    /// `a_leaves`/`b_leaves`; bit `slot` of `specials` is that special.
    pub fn eval(&self, apat: u32, bpat: u32, specials: u32) -> bool {
        let mut vals = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match *n {
                PartNode::AVar { pos, neg } => ((apat >> pos) & 1 == 1) != neg,
                PartNode::BVar { pos, neg } => ((bpat >> pos) & 1 == 1) != neg,
                PartNode::Special { slot } => (specials >> slot) & 1 == 1,
                PartNode::And(l, r) => vals[l] && vals[r],
                PartNode::Or(l, r) => vals[l] || vals[r],
            };
            vals.push(v);
        }
        vals[self.root]
    }
}

/// A formula cut into parts; parts are in dependency order and the last
/// part's output is the formula's.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub parts: Vec<Part>,
    /// Weight threshold the cut was performed at.
    pub block: u64,
    /// Node count of the input formula, for the part-count bound.
    pub source_nodes: usize,
}

impl Decomposition {
    /// Evaluates the whole decomposition on packed half-assignments, part by
    /// part. Agrees with the source formula on every input.
    pub fn eval(&self, a_bits: u64, b_bits: u64) -> bool {
        let mut outs: u64 = 0;
        let mut last = false;
        for (idx, p) in self.parts.iter().enumerate() {
            let apat = extract(a_bits, &p.a_leaves);
            let bpat = extract(b_bits, &p.b_leaves);
            let mut sp = 0u32;
            for (slot, &src) in p.specials.iter().enumerate() {
                if (outs >> src) & 1 == 1 {
                    sp |= 1 << slot;
                }
            }
            last = p.eval(apat, bpat, sp);
            if last {
                outs |= 1 << idx;
            }
        }
        last
    }
}

fn extract(bits: u64, positions: &[u32]) -> u32 {
    let mut pat = 0u32;
    for (k, &p) in positions.iter().enumerate() {
        if (bits >> p) & 1 == 1 {
            pat |= 1 << k;
        }
    }
    pat
}

/// Working tree for the cut: leaves weigh 1, gates 1, cut stubs `block`.
enum DTree {
    Leaf { side: Side, index: u32, neg: bool },
    Cut { part: usize },
    Gate { is_and: bool, kids: Box<(DTree, DTree)> },
}

impl DTree {
    fn weight(&self, block: u64) -> u64 {
        match self {
            DTree::Leaf { .. } => 1,
            DTree::Cut { .. } => block,
            DTree::Gate { kids, .. } => 1 + kids.0.weight(block) + kids.1.weight(block),
        }
    }

    fn from_formula(f: &Formula, id: NodeId) -> Result<DTree, DecomposeError> {
        match f.node(id) {
            Node::Lit { side, index, neg } => {
                Ok(DTree::Leaf { side: *side, index: *index, neg: *neg })
            }
            Node::And(c) | Node::Or(c) => {
                if c.len() != 2 {
                    return Err(DecomposeError::NotBinary);
                }
                let l = DTree::from_formula(f, c[0])?;
                let r = DTree::from_formula(f, c[1])?;
                Ok(DTree::Gate {
                    is_and: matches!(f.node(id), Node::And(_)),
                    kids: Box::new((l, r)),
                })
            }
            _ => Err(DecomposeError::WrongClass(f.class())),
        }
    }
}

/// Cuts a binary deMorgan formula into parts of weight below `3 * block`:
/// repeatedly walk from the root toward the heavier child until the subtree
/// weight falls in `[5*block/4, 3*block)`, detach that subtree as a part,
/// and leave a stub of weight `block` in its place; the final remainder
/// (weight below `5*block/4`) is the last part.
///
/// Guarantees, asserted here and re-checked by the invariant suite: every
/// part has fewer than `3 * block` nodes and at most 2 specials, and there
/// are at most `4 * nodes / block + 1` parts.
pub fn decompose(f: &Formula, block: u64) -> Result<Decomposition, DecomposeError> {
    if f.class() != Class::DeMorgan {
        return Err(DecomposeError::WrongClass(f.class()));
    }
    if block < 2 {
        return Err(DecomposeError::BlockTooSmall(block));
    }
    let source_nodes = f.reachable_count();
    let mut tree = DTree::from_formula(f, f.root())?;
    let mut parts: Vec<Part> = Vec::new();
    while 4 * tree.weight(block) >= 5 * block {
        let sub = cut_once(&mut tree, block, parts.len());
        parts.push(to_part(sub));
    }
    parts.push(to_part(tree));
    for (idx, p) in parts.iter().enumerate() {
        assert!(p.nodes.len() < 3 * block as usize, "part too large");
        assert!(p.specials.len() <= 2, "too many specials");
        assert!(p.specials.iter().all(|&s| s < idx), "parts must feed forward");
    }
    assert!(
        parts.len() as u64 <= 4 * source_nodes as u64 / block + 1,
        "too many parts: {} for {} nodes at block {}",
        parts.len(),
        source_nodes,
        block
    );
    Ok(Decomposition { parts, block, source_nodes })
}

/// Detaches one part subtree. Caller guarantees `4 * weight >= 5 * block`.
fn cut_once(t: &mut DTree, block: u64, part_idx: usize) -> DTree {
    let w = t.weight(block);
    debug_assert!(4 * w >= 5 * block);
    if w < 3 * block {
        return std::mem::replace(t, DTree::Cut { part: part_idx });
    }
    let DTree::Gate { kids, .. } = t else {
        unreachable!("nodes above the cut threshold are gates")
    };
    if kids.0.weight(block) >= kids.1.weight(block) {
        cut_once(&mut kids.0, block, part_idx)
    } else {
        cut_once(&mut kids.1, block, part_idx)
    }
}

fn to_part(sub: DTree) -> Part {
    let mut part =
        Part { nodes: Vec::new(), root: 0, a_leaves: Vec::new(), b_leaves: Vec::new(), specials: Vec::new() };
    part.root = part_node(sub, &mut part);
    part
}

fn part_node(t: DTree, p: &mut Part) -> usize {
    let node = match t {
        DTree::Leaf { side: Side::Left, index, neg } => {
            p.a_leaves.push(index);
            PartNode::AVar { pos: p.a_leaves.len() - 1, neg }
        }
        DTree::Leaf { side: Side::Right, index, neg } => {
            p.b_leaves.push(index);
            PartNode::BVar { pos: p.b_leaves.len() - 1, neg }
        }
        DTree::Cut { part } => {
            let slot = p.specials.iter().position(|&s| s == part).unwrap_or_else(|| {
                p.specials.push(part);
                p.specials.len() - 1
            });
            PartNode::Special { slot }
        }
        DTree::Gate { is_and, kids } => {
            let l = part_node(kids.0, p);
            let r = part_node(kids.1, p);
            if is_and {
                PartNode::And(l, r)
            } else {
                PartNode::Or(l, r)
            }
        }
    };
    p.nodes.push(node);
    p.nodes.len() - 1
}

/// Per-part pattern space cap: `2^(a_leaves + b_leaves)` table rows.
pub const PATTERN_CAP: usize = 4096;

/// Hard cap on the block length; block words are `u32`.
pub const MAX_BLOCK: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrMode {
    Decide,
    Count,
}

#[derive(Debug, Clone)]
pub struct FrStats {
    /// Block length actually used (vectors per word).
    pub block: u64,
    pub parts: usize,
    pub table_bytes: usize,
    /// True when the instance was too small for blocking and the naive
    /// solver ran instead.
    pub fell_back: bool,
}

#[derive(Debug, Clone)]
pub struct FrResult {
    pub witness: Option<(usize, usize)>,
    /// Satisfying-pair count; present in [`FrMode::Count`].
    pub count: Option<u64>,
    pub stats: FrStats,
}

#[derive(Debug, Error)]
pub enum FrError {
    #[error("{0}")]
    Decompose(#[from] DecomposeError),
    #[error(
        "part tables need {needed} bytes (cap {cap}); largest block that fits is \
         {max_block:?}, so lower epsilon accordingly"
    )]
    TableBudget { needed: usize, cap: usize, max_block: Option<u64> },
}

/// Block solver with the block length chosen as `ceil(eps * log2 n)`.
/// Instances with `n < 4` or a resulting block below 2 fall back to the
/// naive scan. Table memory beyond `table_cap` bytes is refused with a hint
/// for how far `eps` must drop.
pub fn four_russians(
    inst: &PairInstance,
    eps: f64,
    table_cap: usize,
    mode: FrMode,
) -> Result<FrResult, FrError> {
    let n = inst.a.len();
    let block = (eps * (n.max(1) as f64).log2()).ceil() as i64;
    if n < 4 || block < 2 {
        return Ok(fallback(inst, mode));
    }
    let block = (block as u64).min(MAX_BLOCK);
    four_russians_with_block(inst, block, table_cap, mode)
}

fn fallback(inst: &PairInstance, mode: FrMode) -> FrResult {
    let (witness, count) = match mode {
        FrMode::Decide => (solve_naive(inst), None),
        FrMode::Count => (solve_naive(inst), Some(count_naive(inst))),
    };
    FrResult {
        witness,
        count,
        stats: FrStats { block: 1, parts: 0, table_bytes: 0, fell_back: true },
    }
}

/// Block solver with an explicit block length (2..=32).
pub fn four_russians_with_block(
    inst: &PairInstance,
    block: u64,
    table_cap: usize,
    mode: FrMode,
) -> Result<FrResult, FrError> {
    assert!((2..=MAX_BLOCK).contains(&block));
    let fbin = inst.formula.binarize();
    let d = decompose(&fbin, block)?;
    let n = inst.a.len();
    let l = block as usize;
    let bundles = n.div_ceil(l);

    if let Some(needed) = table_bytes(&d, bundles) {
        if needed > table_cap {
            let max_block = (2..block)
                .rev()
                .find(|&b| {
                    decompose(&fbin, b)
                        .ok()
                        .and_then(|d2| table_bytes(&d2, n.div_ceil(b as usize)))
                        .is_some_and(|t| t <= table_cap)
                });
            return Err(FrError::TableBudget { needed, cap: table_cap, max_block });
        }
    } else {
        let max_block = (2..block).rev().find(|&b| {
            decompose(&fbin, b)
                .ok()
                .and_then(|d2| table_bytes(&d2, n.div_ceil(b as usize)))
                .is_some_and(|t| t <= table_cap)
        });
        return Err(FrError::TableBudget { needed: usize::MAX, cap: table_cap, max_block });
    }

    // Per-part packed leaf patterns of every A vector.
    let apats: Vec<Vec<u16>> = d
        .parts
        .iter()
        .map(|p| inst.a.iter().map(|&av| extract(av as u64, &p.a_leaves) as u16).collect())
        .collect();

    // Part output tables: for each part, bundle, special combination and
    // b-pattern, the output word over the bundle's vectors (bit j = vector
    // `bundle*l + j`). Built by evaluating the part once per full pattern
    // and gathering along each bundle's a-patterns.
    let mut tables: Vec<Vec<u32>> = Vec::with_capacity(d.parts.len());
    let mut table_total = 0usize;
    for (pi, p) in d.parts.iter().enumerate() {
        let nap = 1usize << p.a_leaves.len();
        let nbp = 1usize << p.b_leaves.len();
        let nsp = 1usize << p.specials.len();
        // memo[(s * nbp + bpat) * nap + apat] = part output bit
        let mut memo = vec![false; nsp * nbp * nap];
        for s in 0..nsp {
            for bpat in 0..nbp {
                for apat in 0..nap {
                    memo[(s * nbp + bpat) * nap + apat] =
                        p.eval(apat as u32, bpat as u32, s as u32);
                }
            }
        }
        let mut table = vec![0u32; bundles * nsp * nbp];
        for lb in 0..bundles {
            for s in 0..nsp {
                for bpat in 0..nbp {
                    let base = (s * nbp + bpat) * nap;
                    let mut w = 0u32;
                    for j in 0..l.min(n - lb * l) {
                        if memo[base + apats[pi][lb * l + j] as usize] {
                            w |= 1 << j;
                        }
                    }
                    table[(lb * nsp + s) * nbp + bpat] = w;
                }
            }
        }
        table_total += table.len() * 4;
        tables.push(table);
    }

    // Sweep all B vectors; per bundle, feed part output words forward.
    let full: u32 = ((1u64 << block) - 1) as u32;
    let tail_len = n - (bundles - 1) * l;
    let tail_mask: u32 = ((1u64 << tail_len) - 1) as u32;
    let mut outs = vec![0u32; d.parts.len()];
    let mut bpats = vec![0usize; d.parts.len()];
    let mut witness = None;
    let mut count: u64 = 0;
    'sweep: for (bj, &bv) in inst.b.iter().enumerate() {
        for (pi, p) in d.parts.iter().enumerate() {
            bpats[pi] = extract(bv as u64, &p.b_leaves) as usize;
        }
        for lb in 0..bundles {
            for (pi, p) in d.parts.iter().enumerate() {
                let nbp = 1usize << p.b_leaves.len();
                let nsp = 1usize << p.specials.len();
                let at = |s: usize| tables[pi][(lb * nsp + s) * nbp + bpats[pi]];
                let w = match *p.specials.as_slice() {
                    [] => at(0),
                    [s0] => {
                        let w0 = outs[s0];
                        (at(0) & !w0) | (at(1) & w0)
                    }
                    [s0, s1] => {
                        let (w0, w1) = (outs[s0], outs[s1]);
                        (at(0) & !w0 & !w1)
                            | (at(1) & w0 & !w1)
                            | (at(2) & !w0 & w1)
                            | (at(3) & w0 & w1)
                    }
                    _ => unreachable!("parts have at most two specials"),
                };
                outs[pi] = w;
            }
            let mask = if lb + 1 == bundles { tail_mask } else { full };
            let hits = outs[d.parts.len() - 1] & mask;
            if hits != 0 {
                if witness.is_none() {
                    witness = Some((lb * l + hits.trailing_zeros() as usize, bj));
                }
                if mode == FrMode::Decide {
                    break 'sweep;
                }
                count += hits.count_ones() as u64;
            }
        }
    }

    Ok(FrResult {
        witness,
        count: (mode == FrMode::Count).then_some(count),
        stats: FrStats {
            block,
            parts: d.parts.len(),
            table_bytes: table_total,
            fell_back: false,
        },
    })
}

/// Total table bytes for a decomposition, or `None` when some part exceeds
/// the per-part pattern cap.
fn table_bytes(d: &Decomposition, bundles: usize) -> Option<usize> {
    let mut total = 0usize;
    for p in &d.parts {
        let patterns = 1usize.checked_shl((p.a_leaves.len() + p.b_leaves.len()) as u32)?;
        if patterns > PATTERN_CAP {
            return None;
        }
        let nsp = 1usize << p.specials.len();
        let nbp = 1usize << p.b_leaves.len();
        total = total.checked_add(bundles.checked_mul(nsp * nbp * 4)?)?;
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Builder;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Random read-once tree over x_0..x_{w-1}, y_0..y_{w-1}.
    fn random_pair_formula(rng: &mut ChaCha8Rng, width: u32) -> Formula {
        let mut leaves: Vec<(Side, u32, bool)> = (0..width)
            .flat_map(|i| [(Side::Left, i, rng.random()), (Side::Right, i, rng.random())])
            .collect();
        leaves.shuffle(rng);
        let keep = rng.random_range(2..=leaves.len());
        leaves.truncate(keep);
        let mut b = Builder::new();
        fn grow(
            b: &mut Builder,
            rng: &mut ChaCha8Rng,
            leaves: &[(Side, u32, bool)],
        ) -> NodeId {
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

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, width: u32) -> PairInstance {
        let mask = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
        PairInstance {
            width,
            a: (0..n).map(|_| rng.random::<u32>() & mask).collect(),
            b: (0..n).map(|_| rng.random::<u32>() & mask).collect(),
            formula: random_pair_formula(rng, width),
        }
    }

    #[test]
    fn naive_finds_known_pair() {
        let f = Formula::parse(";; nvars=2\n(and (fl left \"01\") (fl right \"01\"))").unwrap();
        let inst = crate::splitlist::split_f1(&f).unwrap();
        assert_eq!(solve_naive(&inst), Some((1, 1)));
        assert_eq!(count_naive(&inst), 1);
    }

    #[test]
    fn decompose_matches_formula_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let width = rng.random_range(2..=6);
            let f = random_pair_formula(&mut rng, width).binarize();
            for block in 2..=8u64 {
                let d = decompose(&f, block).unwrap();
                for a in 0..1u64 << width {
                    for b in 0..1u64 << width {
                        assert_eq!(
                            d.eval(a, b),
                            f.eval_halves(a, b),
                            "block={block} a={a:#b} b={b:#b}\n{}",
                            f.to_text()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn decompose_invariants_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..60 {
            let width = rng.random_range(2..=16);
            let f = random_pair_formula(&mut rng, width).binarize();
            let m = f.reachable_count() as u64;
            for block in [2u64, 3, 5, 8, 13, 16] {
                let d = decompose(&f, block).unwrap();
                // The asserts inside decompose() are the invariant check;
                // re-state the headline ones here.
                assert!(d.parts.len() as u64 <= 4 * m / block + 1);
                for p in &d.parts {
                    assert!(p.nodes.len() < 3 * block as usize);
                    assert!(p.specials.len() <= 2);
                }
            }
        }
    }

    #[test]
    fn decompose_single_leaf() {
        let mut b = Builder::new();
        let root = b.lit(Side::Left, 0, true);
        let f = b.finish(root, Class::DeMorgan, 2, 0).unwrap();
        let d = decompose(&f, 4).unwrap();
        assert_eq!(d.parts.len(), 1);
        assert!(d.eval(0, 0));
        assert!(!d.eval(1, 0));
    }

    #[test]
    fn block_solver_agrees_with_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for round in 0..60 {
            let n = rng.random_range(4..=50);
            let width = rng.random_range(2..=8);
            let inst = random_instance(&mut rng, n, width);
            let naive_w = solve_naive(&inst);
            let naive_c = count_naive(&inst);
            for block in [2u64, 3, 4, 5] {
                let r = four_russians_with_block(&inst, block, 1 << 30, FrMode::Count)
                    .expect("within budget");
                assert!(!r.stats.fell_back);
                assert_eq!(r.count, Some(naive_c), "round {round} block {block}");
                assert_eq!(r.witness.is_some(), naive_w.is_some());
                if let Some((i, j)) = r.witness {
                    assert!(inst.eval_pair(inst.a[i], inst.b[j]), "witness must satisfy");
                }
            }
        }
    }

    #[test]
    fn block_solver_decide_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..40 {
            let n = rng.random_range(4..=40);
            let width = rng.random_range(2..=6);
            let inst = random_instance(&mut rng, n, width);
            let r = four_russians_with_block(&inst, 3, 1 << 30, FrMode::Decide).unwrap();
            assert_eq!(r.witness.is_some(), solve_naive(&inst).is_some());
            assert!(r.count.is_none());
        }
    }

    #[test]
    fn eps_drives_block_and_fallback() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let inst = random_instance(&mut rng, 64, 4);
        // eps = 0.5, n = 64: block = 3.
        let r = four_russians(&inst, 0.5, 1 << 30, FrMode::Count).unwrap();
        assert_eq!(r.stats.block, 3);
        assert_eq!(r.count, Some(count_naive(&inst)));
        // Tiny eps: block below 2 falls back to naive.
        let r = four_russians(&inst, 0.01, 1 << 30, FrMode::Count).unwrap();
        assert!(r.stats.fell_back);
        assert_eq!(r.count, Some(count_naive(&inst)));
        // Tiny list: fallback regardless of eps.
        let small = random_instance(&mut rng, 3, 3);
        let r = four_russians(&small, 1.0, 1 << 30, FrMode::Count).unwrap();
        assert!(r.stats.fell_back);
    }

    #[test]
    fn table_budget_refusal_reports_a_fitting_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let inst = random_instance(&mut rng, 64, 8);
        let err = four_russians_with_block(&inst, 8, 64, FrMode::Count).unwrap_err();
        match err {
            FrError::TableBudget { needed, cap, max_block } => {
                assert!(needed > cap);
                if let Some(mb) = max_block {
                    assert!(mb < 8);
                    let r = four_russians_with_block(&inst, mb, 64, FrMode::Count);
                    assert!(r.is_ok(), "suggested block must fit");
                }
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn pattern_cap_triggers_on_wide_parts() {
        // A block of 16 admits parts with up to 47 nodes, so a wide formula
        // can put more than 12 leaves in one part.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut found = false;
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 64, 16);
            if let Err(FrError::TableBudget { .. }) =
                four_russians_with_block(&inst, 16, usize::MAX, FrMode::Count)
            {
                found = true;
                break;
            }
        }
        assert!(found, "no instance tripped the pattern cap");
    }

    #[test]
    fn tail_bundle_is_masked() {
        // n = 5 with block 4 leaves a 1-vector tail; padding bits must not
        // leak into the verdict. Formula: x_1 (fires iff bit 0 of A set).
        let mut b = Builder::new();
        let root = b.lit(Side::Left, 0, false);
        let f = b.finish(root, Class::DeMorgan, 2, 0).unwrap();
        let inst = PairInstance { width: 1, a: vec![0, 0, 0, 0, 0], b: vec![0; 5], formula: f };
        let r = four_russians_with_block(&inst, 4, 1 << 20, FrMode::Count).unwrap();
        assert_eq!(r.count, Some(0));
        assert!(r.witness.is_none());
    }

    #[test]
    fn ineq_naive_matches_pair_semantics() {
        let f = Formula::parse(
            ";; class=F2 nvars=4 M=4\n(or (thr 1 (2 (fl left \"0110\")) (-1 (fl right \"1001\"))) \
             (thr 0 (1 (fl left \"0011\")) (1 (fl right \"0101\"))))",
        )
        .unwrap();
        let inst = crate::splitlist::split_f2(&f).unwrap();
        let mut expect = 0u64;
        let mut first = None;
        for alpha in 0..4usize {
            for beta in 0..4usize {
                if f.eval_halves(alpha as u64, beta as u64) {
                    expect += 1;
                    if first.is_none() {
                        first = Some((alpha, beta));
                    }
                }
            }
        }
        assert_eq!(count_ineq_naive(&inst), expect);
        assert_eq!(solve_ineq_naive(&inst), first);
    }
}
