//! Formula ASTs, the three input classes, and structural operations.
//!
//! A [`Formula`] is an arena of [`Node`]s over `nvars` Boolean inputs. The
//! inputs are split into a left half (vars `0..nvars/2`, written `(x i)`) and
//! a right half (written `(y i)`); the half split is what the split-and-list
//! step operates on. Three classes are supported:
//!
//! * [`Class::DeMorgan`]: and/or gates over possibly negated literals.
//!   Size is the number of leaves.
//! * [`Class::F1`]: leaves are *first-layer gates*, each an arbitrary function
//!   of one input half given by an explicit truth table; above them only
//!   and/or. Size is the number of first-layer gates.
//! * [`Class::F2`]: first-layer gates feed *threshold gates*
//!   (`sum c_i * child_i <= t` with `|c_i|, |t| <= coeff_bound`), and the
//!   and/or superstructure reads only threshold gates. Size is the number of
//!   first-layer plus threshold gates.

use std::fmt::Write as _;

use thiserror::Error;

pub type NodeId = usize;

/// Which input half a literal or first-layer gate reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn token(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Truth table of a function of one input half, one bit per half-assignment.
///
/// The half-assignment with integer index `p` assigns variable `i` of the
/// half the bit `(p >> i) & 1`, so the first variable of the half is the
/// least significant bit of the index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table {
    half: u32,
    bits: Vec<u64>,
}

impl Table {
    pub fn new_false(half: u32) -> Table {
        assert!(half <= MAX_TABLE_HALF, "truth table half too large");
        let words = (1usize << half).div_ceil(64);
        Table { half, bits: vec![0; words] }
    }

    /// Parses a bit string of length `2^half`, position `p` giving the value
    /// on the half-assignment with index `p`.
    pub fn from_bit_str(s: &str) -> Result<Table, String> {
        let n = s.len();
        if n == 0 || n & (n - 1) != 0 {
            return Err(format!("table length {n} is not a power of two"));
        }
        let half = n.trailing_zeros();
        if half > MAX_TABLE_HALF {
            return Err(format!("table over {half} variables is too large"));
        }
        let mut t = Table::new_false(half);
        for (p, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => t.set(p, true),
                _ => return Err(format!("table may contain only 0/1, found {:?}", c as char)),
            }
        }
        Ok(t)
    }

    pub fn half(&self) -> u32 {
        self.half
    }

    pub fn len(&self) -> usize {
        1usize << self.half
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, p: usize) -> bool {
        debug_assert!(p < self.len());
        (self.bits[p >> 6] >> (p & 63)) & 1 == 1
    }

    pub fn set(&mut self, p: usize, v: bool) {
        debug_assert!(p < self.len());
        if v {
            self.bits[p >> 6] |= 1 << (p & 63);
        } else {
            self.bits[p >> 6] &= !(1 << (p & 63));
        }
    }

    pub fn complement(&self) -> Table {
        let mut t = self.clone();
        for w in &mut t.bits {
            *w = !*w;
        }
        let tail = self.len() & 63;
        if tail != 0 {
            *t.bits.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        t
    }

    pub fn bit_str(&self) -> String {
        (0..self.len()).map(|p| if self.get(p) { '1' } else { '0' }).collect()
    }
}

/// Hard cap on truth-table width: tables are materialized bit-for-bit.
pub const MAX_TABLE_HALF: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    /// Input literal, optionally negated. `index` is 0-based within the half.
    Lit { side: Side, index: u32, neg: bool },
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    /// First-layer gate: explicit function of one input half.
    FirstLayer { side: Side, table: Table },
    /// Threshold gate: fires iff `sum c_i * child_i <= t`.
    Thr { t: i64, terms: Vec<(i64, NodeId)> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    DeMorgan,
    F1,
    F2,
}

impl Class {
    pub fn token(self) -> &'static str {
        match self {
            Class::DeMorgan => "demorgan",
            Class::F1 => "F1",
            Class::F2 => "F2",
        }
    }
}

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid formula: {0}")]
    Invalid(String),
}

/// A formula over `nvars` inputs (nvars even; left half first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    class: Class,
    nvars: u32,
    /// Coefficient/threshold magnitude bound for F2; 0 otherwise.
    coeff_bound: i64,
    nodes: Vec<Node>,
    root: NodeId,
}

/// Incremental arena for building formulas by hand.
#[derive(Debug, Default)]
pub struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    pub fn new() -> Builder {
        Builder::default()
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    pub fn lit(&mut self, side: Side, index: u32, neg: bool) -> NodeId {
        self.push(Node::Lit { side, index, neg })
    }

    pub fn and(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(Node::And(children))
    }

    pub fn or(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(Node::Or(children))
    }

    pub fn first_layer(&mut self, side: Side, table: Table) -> NodeId {
        self.push(Node::FirstLayer { side, table })
    }

    pub fn thr(&mut self, t: i64, terms: Vec<(i64, NodeId)>) -> NodeId {
        self.push(Node::Thr { t, terms })
    }

    pub fn finish(
        self,
        root: NodeId,
        class: Class,
        nvars: u32,
        coeff_bound: i64,
    ) -> Result<Formula, FormulaError> {
        let f = Formula { class, nvars, coeff_bound, nodes: self.nodes, root };
        f.validate()?;
        Ok(f)
    }
}

impl Formula {
    pub fn class(&self) -> Class {
        self.class
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn half(&self) -> u32 {
        self.nvars / 2
    }

    pub fn coeff_bound(&self) -> i64 {
        self.coeff_bound
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn validate(&self) -> Result<(), FormulaError> {
        let err = |m: String| Err(FormulaError::Invalid(m));
        if self.nvars == 0 || self.nvars % 2 != 0 {
            return err(format!("nvars must be even and positive, got {}", self.nvars));
        }
        if self.root >= self.nodes.len() {
            return err("root out of range".into());
        }
        // Reachability + acyclicity: children must have smaller ids than the
        // arena would allow cycles otherwise. Ids are insertion-ordered but
        // not necessarily topological, so walk with an explicit visit state.
        let mut state = vec![0u8; self.nodes.len()]; // 0 unseen, 1 open, 2 done
        let mut stack = vec![(self.root, 0usize)];
        state[self.root] = 1;
        while let Some(&mut (id, ref mut ci)) = stack.last_mut() {
            let children: &[NodeId] = match &self.nodes[id] {
                Node::Lit { .. } | Node::FirstLayer { .. } => &[],
                Node::And(c) | Node::Or(c) => c,
                Node::Thr { terms, .. } => {
                    // visit via index without allocating
                    if *ci < terms.len() {
                        let ch = terms[*ci].1;
                        *ci += 1;
                        if ch >= self.nodes.len() {
                            return err("child id out of range".into());
                        }
                        match state[ch] {
                            0 => {
                                state[ch] = 1;
                                stack.push((ch, 0));
                            }
                            1 => return err("cycle in node graph".into()),
                            _ => {}
                        }
                        continue;
                    }
                    state[id] = 2;
                    stack.pop();
                    continue;
                }
            };
            if *ci < children.len() {
                let ch = children[*ci];
                *ci += 1;
                if ch >= self.nodes.len() {
                    return err("child id out of range".into());
                }
                match state[ch] {
                    0 => {
                        state[ch] = 1;
                        stack.push((ch, 0));
                    }
                    1 => return err("cycle in node graph".into()),
                    _ => {}
                }
            } else {
                state[id] = 2;
                stack.pop();
            }
        }

        let half = self.nvars / 2;
        for (id, n) in self.nodes.iter().enumerate() {
            if state[id] != 2 {
                continue; // unreachable nodes are ignored
            }
            match n {
                Node::Lit { index, .. } => {
                    if *index >= half {
                        return err(format!(
                            "literal index {} out of range for half size {half}",
                            index + 1
                        ));
                    }
                }
                Node::FirstLayer { table, .. } => {
                    if table.half() != half {
                        return err(format!(
                            "first-layer table over {} vars, but half size is {half}",
                            table.half()
                        ));
                    }
                }
                Node::And(c) | Node::Or(c) => {
                    if c.is_empty() {
                        return err("and/or gate with no children".into());
                    }
                }
                Node::Thr { t, terms } => {
                    if terms.is_empty() {
                        return err("threshold gate with no children".into());
                    }
                    if self.class == Class::F2 {
                        let m = self.coeff_bound;
                        if m < 1 {
                            return err("F2 requires coeff bound >= 1".into());
                        }
                        if t.abs() > m {
                            return err(format!("threshold constant {t} exceeds bound {m}"));
                        }
                        for (c, _) in terms {
                            if c.abs() > m {
                                return err(format!("coefficient {c} exceeds bound {m}"));
                            }
                        }
                    }
                }
            }
        }

        // Class shape.
        match self.class {
            Class::DeMorgan => {
                for (id, n) in self.nodes.iter().enumerate() {
                    if state[id] != 2 {
                        continue;
                    }
                    match n {
                        Node::Lit { .. } | Node::And(_) | Node::Or(_) => {}
                        _ => return err("deMorgan formulas use only literals, and, or".into()),
                    }
                }
            }
            Class::F1 => {
                for (id, n) in self.nodes.iter().enumerate() {
                    if state[id] != 2 {
                        continue;
                    }
                    match n {
                        Node::FirstLayer { .. } | Node::And(_) | Node::Or(_) => {}
                        _ => {
                            return err(
                                "F1 formulas use first-layer gates under and/or only".into()
                            )
                        }
                    }
                }
            }
            Class::F2 => {
                // and/or read thresholds (or and/or); thresholds read
                // first-layer gates only.
                for (id, n) in self.nodes.iter().enumerate() {
                    if state[id] != 2 {
                        continue;
                    }
                    match n {
                        Node::Lit { .. } => {
                            return err("F2 formulas have no raw literals".into());
                        }
                        Node::FirstLayer { .. } => {}
                        Node::Thr { terms, .. } => {
                            for (_, ch) in terms {
                                if !matches!(self.nodes[*ch], Node::FirstLayer { .. }) {
                                    return err(
                                        "threshold children must be first-layer gates".into(),
                                    );
                                }
                            }
                        }
                        Node::And(c) | Node::Or(c) => {
                            for ch in c {
                                if matches!(self.nodes[*ch], Node::FirstLayer { .. }) {
                                    return err(
                                        "F2 and/or gates read thresholds, not first-layer gates"
                                            .into(),
                                    );
                                }
                            }
                        }
                    }
                }
                if matches!(self.nodes[self.root], Node::FirstLayer { .. }) {
                    return err("F2 root must not be a bare first-layer gate".into());
                }
            }
        }
        Ok(())
    }

    /// Evaluates the formula on a full assignment (left half first).
    pub fn eval(&self, assign: &[bool]) -> bool {
        assert_eq!(assign.len(), self.nvars as usize);
        let half = (self.nvars / 2) as usize;
        let mut a: u64 = 0;
        let mut b: u64 = 0;
        for i in 0..half {
            if assign[i] {
                a |= 1 << i;
            }
            if assign[half + i] {
                b |= 1 << i;
            }
        }
        self.eval_halves(a, b)
    }

    /// Evaluates on packed half-assignments: bit `i` of `a` is left var `i`,
    /// bit `i` of `b` is right var `i`.
    pub fn eval_halves(&self, a: u64, b: u64) -> bool {
        assert!(self.nvars / 2 <= 64);
        self.eval_node(self.root, a, b)
    }

    /// Evaluates the subformula rooted at `id` on packed half-assignments.
    pub fn eval_node(&self, id: NodeId, a: u64, b: u64) -> bool {
        match &self.nodes[id] {
            Node::Lit { side, index, neg } => {
                let bits = match side {
                    Side::Left => a,
                    Side::Right => b,
                };
                ((bits >> index) & 1 == 1) != *neg
            }
            Node::And(c) => c.iter().all(|&ch| self.eval_node(ch, a, b)),
            Node::Or(c) => c.iter().any(|&ch| self.eval_node(ch, a, b)),
            Node::FirstLayer { side, table } => {
                let bits = match side {
                    Side::Left => a,
                    Side::Right => b,
                };
                table.get((bits & ((1u64 << table.half()) - 1)) as usize)
            }
            Node::Thr { t, terms } => {
                let mut sum: i64 = 0;
                for (c, ch) in terms {
                    if self.eval_node(*ch, a, b) {
                        sum += c;
                    }
                }
                sum <= *t
            }
        }
    }

    /// Class-specific size: leaves for deMorgan, first-layer gates for F1,
    /// first-layer plus threshold gates for F2. Counts reachable nodes only.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(|node| match self.class {
            Class::DeMorgan => {
                if matches!(node, Node::Lit { .. }) {
                    n += 1;
                }
            }
            Class::F1 => {
                if matches!(node, Node::FirstLayer { .. }) {
                    n += 1;
                }
            }
            Class::F2 => {
                if matches!(node, Node::FirstLayer { .. } | Node::Thr { .. }) {
                    n += 1;
                }
            }
        });
        n
    }

    /// Number of leaves (literals and first-layer gates) reachable from root.
    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.walk(|node| {
            if matches!(node, Node::Lit { .. } | Node::FirstLayer { .. }) {
                n += 1;
            }
        });
        n
    }

    /// Number of reachable nodes, counting repeats once per arena entry.
    pub fn reachable_count(&self) -> usize {
        let mut n = 0;
        self.walk(|_| n += 1);
        n
    }

    /// Reachable node ids in increasing arena order.
    pub fn reachable_ids(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(id) = stack.pop() {
            let mut push = |ch: NodeId| {
                if !seen[ch] {
                    seen[ch] = true;
                    stack.push(ch);
                }
            };
            match &self.nodes[id] {
                Node::Lit { .. } | Node::FirstLayer { .. } => {}
                Node::And(c) | Node::Or(c) => c.iter().copied().for_each(&mut push),
                Node::Thr { terms, .. } => terms.iter().for_each(|&(_, ch)| push(ch)),
            }
        }
        (0..self.nodes.len()).filter(|&i| seen[i]).collect()
    }

    fn walk(&self, mut f: impl FnMut(&Node)) {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            f(n);
            let mut push = |ch: NodeId| {
                if !seen[ch] {
                    seen[ch] = true;
                    stack.push(ch);
                }
            };
            match n {
                Node::Lit { .. } | Node::FirstLayer { .. } => {}
                Node::And(c) | Node::Or(c) => c.iter().copied().for_each(&mut push),
                Node::Thr { terms, .. } => terms.iter().for_each(|&(_, ch)| push(ch)),
            }
        }
    }

    /// Longest root-to-leaf path in gate edges; literals, first-layer gates
    /// and bare threshold gates have depth 0.
    pub fn depth(&self) -> usize {
        self.depth_of(self.root)
    }

    /// Depth of the subformula rooted at `id`, by the same measure.
    pub fn depth_of(&self, id: NodeId) -> usize {
        match &self.nodes[id] {
            Node::Lit { .. } | Node::FirstLayer { .. } => 0,
            Node::Thr { terms, .. } => {
                1 + terms.iter().map(|&(_, ch)| self.depth_of(ch)).max().unwrap_or(0)
            }
            Node::And(c) | Node::Or(c) => {
                1 + c.iter().map(|&ch| self.depth_of(ch)).max().unwrap_or(0)
            }
        }
    }

    /// True iff every input position is read by at most one reachable leaf.
    pub fn is_read_once(&self) -> bool {
        let half = (self.nvars / 2) as usize;
        let mut used = vec![false; 2 * half];
        let mut ok = true;
        self.walk(|node| {
            if let Node::Lit { side, index, .. } = node {
                let pos = match side {
                    Side::Left => *index as usize,
                    Side::Right => half + *index as usize,
                };
                if used[pos] {
                    ok = false;
                }
                used[pos] = true;
            }
        });
        ok
    }

    /// Rebuilds the and/or structure with fanin at most two, splitting child
    /// lists in half so chains become balanced trees. Single-child and/or
    /// gates collapse into their child. Leaves and threshold gates are kept.
    pub fn binarize(&self) -> Formula {
        let mut b = Builder::new();
        let root = self.binarize_node(self.root, &mut b);
        Formula {
            class: self.class,
            nvars: self.nvars,
            coeff_bound: self.coeff_bound,
            nodes: b.nodes,
            root,
        }
    }

    fn binarize_node(&self, id: NodeId, b: &mut Builder) -> NodeId {
        match &self.nodes[id] {
            n @ (Node::Lit { .. } | Node::FirstLayer { .. }) => b.push(n.clone()),
            Node::Thr { t, terms } => {
                let terms =
                    terms.iter().map(|&(c, ch)| (c, self.binarize_node(ch, b))).collect();
                b.thr(*t, terms)
            }
            Node::And(c) => {
                let kids: Vec<NodeId> = c.iter().map(|&ch| self.binarize_node(ch, b)).collect();
                balance(&kids, true, b)
            }
            Node::Or(c) => {
                let kids: Vec<NodeId> = c.iter().map(|&ch| self.binarize_node(ch, b)).collect();
                balance(&kids, false, b)
            }
        }
    }

    /// Serializes to the textual format: a header line then one s-expression.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write!(out, ";; class={} nvars={}", self.class.token(), self.nvars).unwrap();
        if self.class == Class::F2 {
            write!(out, " M={}", self.coeff_bound).unwrap();
        }
        out.push('\n');
        self.write_node(self.root, &mut out);
        out.push('\n');
        out
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        match &self.nodes[id] {
            Node::Lit { side, index, neg } => {
                if *neg {
                    out.push_str("(not ");
                }
                let tag = match side {
                    Side::Left => 'x',
                    Side::Right => 'y',
                };
                write!(out, "({tag} {})", index + 1).unwrap();
                if *neg {
                    out.push(')');
                }
            }
            Node::And(c) | Node::Or(c) => {
                let tag = if matches!(self.nodes[id], Node::And(_)) { "and" } else { "or" };
                write!(out, "({tag}").unwrap();
                for &ch in c {
                    out.push(' ');
                    self.write_node(ch, out);
                }
                out.push(')');
            }
            Node::FirstLayer { side, table } => {
                write!(out, "(fl {} \"{}\")", side.token(), table.bit_str()).unwrap();
            }
            Node::Thr { t, terms } => {
                write!(out, "(thr {t}").unwrap();
                for &(c, ch) in terms {
                    write!(out, " ({c} ").unwrap();
                    self.write_node(ch, out);
                    out.push(')');
                }
                out.push(')');
            }
        }
    }

    /// Parses the textual format produced by [`Formula::to_text`].
    ///
    /// The header is optional; without it the class is inferred from the node
    /// inventory, `nvars` from the largest index used (or the table width),
    /// and the coefficient bound from the largest magnitude present.
    pub fn parse(text: &str) -> Result<Formula, FormulaError> {
        parse::formula(text)
    }

    /// Replaces every literal with a first-layer gate computing it, yielding
    /// an equivalent F1 formula of size equal to the deMorgan leaf count.
    pub fn lift_to_f1(&self) -> Formula {
        assert_eq!(self.class, Class::DeMorgan);
        let half = self.nvars / 2;
        let mut b = Builder::new();
        let root = lift_f1_node(self, self.root, half, &mut b);
        let f = Formula { class: Class::F1, nvars: self.nvars, coeff_bound: 0, nodes: b.nodes, root };
        debug_assert!(f.validate().is_ok());
        f
    }

    /// Interposes a unit threshold gate above every first-layer gate,
    /// yielding an equivalent F2 formula with coefficient bound 1.
    pub fn lift_to_f2(&self) -> Formula {
        assert_eq!(self.class, Class::F1);
        let mut b = Builder::new();
        let root = lift_f2_node(self, self.root, &mut b);
        let f = Formula { class: Class::F2, nvars: self.nvars, coeff_bound: 1, nodes: b.nodes, root };
        debug_assert!(f.validate().is_ok());
        f
    }

    /// Returns an equivalent deMorgan formula of depth at most
    /// `3k ln2 * log2(size)` (size = leaf count, floored at 2). Formulas
    /// already within the budget are returned unchanged; otherwise the tree
    /// is rebalanced by recursive restructuring around a splitting subtree,
    /// which can duplicate leaves.
    pub fn depth_reduce(&self, k: u32) -> Formula {
        assert_eq!(self.class, Class::DeMorgan);
        assert!(k >= 2, "depth budget is defined for k >= 2");
        let bound = depth_budget(k, self.size());
        if self.depth() as f64 <= bound {
            return self.clone();
        }
        let tree = Tree::from_formula(self, self.root);
        let reduced = spira(&tree);
        let out = reduced.into_formula(self.nvars);
        debug_assert!(out.validate().is_ok());
        assert!(
            out.depth() as f64 <= depth_budget(k, out.size().max(self.size())),
            "depth reduction exceeded its budget"
        );
        out
    }
}

/// The depth budget `3k ln2 * log2(max(size, 2))`.
pub fn depth_budget(k: u32, size: usize) -> f64 {
    3.0 * k as f64 * std::f64::consts::LN_2 * (size.max(2) as f64).log2()
}

fn balance(kids: &[NodeId], is_and: bool, b: &mut Builder) -> NodeId {
    match kids.len() {
        0 => unreachable!("validated gates have children"),
        1 => kids[0],
        _ => {
            let mid = kids.len() / 2;
            let l = balance(&kids[..mid], is_and, b);
            let r = balance(&kids[mid..], is_and, b);
            if is_and {
                b.and(vec![l, r])
            } else {
                b.or(vec![l, r])
            }
        }
    }
}

fn lift_f1_node(f: &Formula, id: NodeId, half: u32, b: &mut Builder) -> NodeId {
    match f.node(id) {
        Node::Lit { side, index, neg } => {
            let mut table = Table::new_false(half);
            for p in 0..table.len() {
                let bit = (p >> index) & 1 == 1;
                table.set(p, bit != *neg);
            }
            b.first_layer(*side, table)
        }
        Node::And(c) => {
            let kids = c.iter().map(|&ch| lift_f1_node(f, ch, half, b)).collect();
            b.and(kids)
        }
        Node::Or(c) => {
            let kids = c.iter().map(|&ch| lift_f1_node(f, ch, half, b)).collect();
            b.or(kids)
        }
        _ => unreachable!("deMorgan formulas contain no other nodes"),
    }
}

fn lift_f2_node(f: &Formula, id: NodeId, b: &mut Builder) -> NodeId {
    match f.node(id) {
        Node::FirstLayer { side, table } => {
            let fl = b.first_layer(*side, table.clone());
            // -1 * C <= -1 holds exactly when C fires.
            b.thr(-1, vec![(-1, fl)])
        }
        Node::And(c) => {
            let kids = c.iter().map(|&ch| lift_f2_node(f, ch, b)).collect();
            b.and(kids)
        }
        Node::Or(c) => {
            let kids = c.iter().map(|&ch| lift_f2_node(f, ch, b)).collect();
            b.or(kids)
        }
        _ => unreachable!("F1 formulas contain no other nodes"),
    }
}

/// Owned binary-tree view used by depth reduction.
#[derive(Debug, Clone)]
enum Tree {
    Leaf { side: Side, index: u32, neg: bool },
    And(Box<Tree>, Box<Tree>),
    Or(Box<Tree>, Box<Tree>),
}

impl Tree {
    fn from_formula(f: &Formula, id: NodeId) -> Tree {
        match f.node(id) {
            Node::Lit { side, index, neg } => Tree::Leaf { side: *side, index: *index, neg: *neg },
            Node::And(c) => tree_balance(f, c, true),
            Node::Or(c) => tree_balance(f, c, false),
            _ => unreachable!("deMorgan formulas contain no other nodes"),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Tree::Leaf { .. } => 1,
            Tree::And(l, r) | Tree::Or(l, r) => l.leaves() + r.leaves(),
        }
    }

    fn negate(&self) -> Tree {
        match self {
            Tree::Leaf { side, index, neg } => {
                Tree::Leaf { side: *side, index: *index, neg: !neg }
            }
            Tree::And(l, r) => Tree::Or(Box::new(l.negate()), Box::new(r.negate())),
            Tree::Or(l, r) => Tree::And(Box::new(l.negate()), Box::new(r.negate())),
        }
    }

    fn into_formula(self, nvars: u32) -> Formula {
        let mut b = Builder::new();
        let root = self.emit(&mut b);
        Formula { class: Class::DeMorgan, nvars, coeff_bound: 0, nodes: b.nodes, root }
    }

    fn emit(&self, b: &mut Builder) -> NodeId {
        match self {
            Tree::Leaf { side, index, neg } => b.lit(*side, *index, *neg),
            Tree::And(l, r) => {
                let l = l.emit(b);
                let r = r.emit(b);
                b.and(vec![l, r])
            }
            Tree::Or(l, r) => {
                let l = l.emit(b);
                let r = r.emit(b);
                b.or(vec![l, r])
            }
        }
    }
}

fn tree_balance(f: &Formula, kids: &[NodeId], is_and: bool) -> Tree {
    match kids.len() {
        0 => unreachable!("validated gates have children"),
        1 => Tree::from_formula(f, kids[0]),
        _ => {
            let mid = kids.len() / 2;
            let l = Box::new(tree_balance(f, &kids[..mid], is_and));
            let r = Box::new(tree_balance(f, &kids[mid..], is_and));
            if is_and {
                Tree::And(l, r)
            } else {
                Tree::Or(l, r)
            }
        }
    }
}

/// Constant-or-tree result of substituting a constant into a context.
enum Folded {
    Const(bool),
    T(Tree),
}

/// Restructures `t` to depth `O(log leaves)`: pick a subtree `v` holding
/// between a third and two thirds of the leaves, then
/// `t = (v and t[v:=1]) or (not v and t[v:=0])`, recursing on all four parts.
/// Each part has at most two thirds of the leaves, so the depth recurrence
/// `d(s) <= d(2s/3) + 2` gives roughly `3.42 log2 s`.
fn spira(t: &Tree) -> Tree {
    let s = t.leaves();
    if s <= 2 {
        return t.clone();
    }
    // Walk toward the heavier child until the subtree holds <= 2s/3 leaves;
    // the stop node still holds > s/3 because its parent held > 2s/3.
    let mut path: Vec<bool> = Vec::new(); // false = left, true = right
    let mut cur = t;
    loop {
        if 3 * cur.leaves() <= 2 * s {
            break;
        }
        match cur {
            Tree::Leaf { .. } => break, // s == 1 can't happen here; defensive stop
            Tree::And(l, r) | Tree::Or(l, r) => {
                if l.leaves() >= r.leaves() {
                    path.push(false);
                    cur = l;
                } else {
                    path.push(true);
                    cur = r;
                }
            }
        }
    }
    let v = cur.clone();
    let pos = spira(&v);
    let neg = spira(&v.negate());
    let on = substitute(t, &path, true);
    let off = substitute(t, &path, false);
    let arm = |guard: Tree, ctx: Folded| -> Option<Tree> {
        match ctx {
            Folded::Const(true) => Some(guard),
            Folded::Const(false) => None,
            Folded::T(c) => Some(Tree::And(Box::new(guard), Box::new(spira(&c)))),
        }
    };
    match (arm(pos, on), arm(neg, off)) {
        (Some(a), Some(b)) => Tree::Or(Box::new(a), Box::new(b)),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => unreachable!("context arms cannot both be constant false"),
    }
}

/// Replaces the subtree at `path` with the constant `value` and folds.
fn substitute(t: &Tree, path: &[bool], value: bool) -> Folded {
    if path.is_empty() {
        return Folded::Const(value);
    }
    let (l, r, is_and) = match t {
        Tree::And(l, r) => (l, r, true),
        Tree::Or(l, r) => (l, r, false),
        Tree::Leaf { .. } => unreachable!("path descends only through gates"),
    };
    let (changed, kept) = if path[0] {
        (substitute(r, &path[1..], value), l.as_ref())
    } else {
        (substitute(l, &path[1..], value), r.as_ref())
    };
    match changed {
        Folded::Const(c) => {
            if c == is_and {
                // and with true / or with false: the other child decides.
                Folded::T(kept.clone())
            } else {
                Folded::Const(c)
            }
        }
        Folded::T(sub) => {
            let (a, b) = (Box::new(sub), Box::new(kept.clone()));
            Folded::T(if is_and { Tree::And(a, b) } else { Tree::Or(a, b) })
        }
    }
}

mod parse {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    enum Tok {
        LParen,
        RParen,
        Atom(String),
        Str(String),
    }

    struct Lexer<'a> {
        src: &'a [u8],
        pos: usize,
        line: usize,
        col: usize,
    }

    pub(super) struct P<'a> {
        lx: Lexer<'a>,
        peeked: Option<(Tok, usize, usize)>,
    }

    fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Parse { line, col, msg: msg.into() })
    }

    impl<'a> Lexer<'a> {
        fn new(src: &'a str) -> Lexer<'a> {
            Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
        }

        fn bump(&mut self) -> Option<u8> {
            let c = *self.src.get(self.pos)?;
            self.pos += 1;
            if c == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
            Some(c)
        }

        fn next_tok(&mut self) -> Result<Option<(Tok, usize, usize)>, FormulaError> {
            loop {
                let (line, col) = (self.line, self.col);
                let Some(c) = self.bump() else { return Ok(None) };
                match c {
                    b' ' | b'\t' | b'\r' | b'\n' => continue,
                    b';' => {
                        // comment to end of line
                        while let Some(c) = self.bump() {
                            if c == b'\n' {
                                break;
                            }
                        }
                    }
                    b'(' => return Ok(Some((Tok::LParen, line, col))),
                    b')' => return Ok(Some((Tok::RParen, line, col))),
                    b'"' => {
                        let start = self.pos;
                        loop {
                            match self.bump() {
                                Some(b'"') => break,
                                Some(_) => {}
                                None => return perr(line, col, "unterminated string"),
                            }
                        }
                        let s = std::str::from_utf8(&self.src[start..self.pos - 1])
                            .map_err(|_| FormulaError::Parse {
                                line,
                                col,
                                msg: "string is not utf-8".into(),
                            })?
                            .to_string();
                        return Ok(Some((Tok::Str(s), line, col)));
                    }
                    _ => {
                        let start = self.pos - 1;
                        while let Some(&c) = self.src.get(self.pos) {
                            if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b'"' {
                                break;
                            }
                            self.pos += 1;
                            self.col += 1;
                        }
                        let s = std::str::from_utf8(&self.src[start..self.pos])
                            .map_err(|_| FormulaError::Parse {
                                line,
                                col,
                                msg: "atom is not utf-8".into(),
                            })?
                            .to_string();
                        return Ok(Some((Tok::Atom(s), line, col)));
                    }
                }
            }
        }
    }

    impl<'a> P<'a> {
        fn next(&mut self) -> Result<Option<(Tok, usize, usize)>, FormulaError> {
            if let Some(t) = self.peeked.take() {
                return Ok(Some(t));
            }
            self.lx.next_tok()
        }

        fn expect(&mut self, what: &str) -> Result<(Tok, usize, usize), FormulaError> {
            match self.next()? {
                Some(t) => Ok(t),
                None => perr(self.lx.line, self.lx.col, format!("expected {what}, found end")),
            }
        }

        fn peek(&mut self) -> Result<Option<&(Tok, usize, usize)>, FormulaError> {
            if self.peeked.is_none() {
                self.peeked = self.lx.next_tok()?;
            }
            Ok(self.peeked.as_ref())
        }
    }

    /// Parsed node with sided literals; ids index into `nodes`.
    struct Ctx {
        nodes: Vec<Node>,
        max_index: [u32; 2], // 1-based maximum per side
        table_half: Option<u32>,
        has_thr: bool,
        has_fl: bool,
        max_mag: i64,
    }

    pub(super) fn formula(text: &str) -> Result<Formula, FormulaError> {
        // Header: `;; key=value ...` lines before the expression are scanned
        // for class/nvars/M. The lexer then skips them as comments.
        let mut class: Option<Class> = None;
        let mut nvars: Option<u32> = None;
        let mut coeff_bound: Option<i64> = None;
        for (lineno, line) in text.lines().enumerate() {
            let t = line.trim_start();
            if t.is_empty() {
                continue;
            }
            if !t.starts_with(";;") {
                break;
            }
            for field in t.trim_start_matches(';').split_whitespace() {
                let Some((k, v)) = field.split_once('=') else { continue };
                let bad = |msg: String| FormulaError::Parse { line: lineno + 1, col: 1, msg };
                match k {
                    "class" => {
                        class = Some(match v {
                            "demorgan" => Class::DeMorgan,
                            "F1" => Class::F1,
                            "F2" => Class::F2,
                            _ => return Err(bad(format!("unknown class {v:?}"))),
                        })
                    }
                    "nvars" => {
                        nvars = Some(
                            v.parse().map_err(|_| bad(format!("bad nvars {v:?}")))?,
                        )
                    }
                    "M" => {
                        coeff_bound =
                            Some(v.parse().map_err(|_| bad(format!("bad M {v:?}")))?)
                    }
                    _ => {}
                }
            }
        }

        let mut p = P { lx: Lexer::new(text), peeked: None };
        let mut ctx = Ctx {
            nodes: Vec::new(),
            max_index: [0, 0],
            table_half: None,
            has_thr: false,
            has_fl: false,
            max_mag: 1,
        };
        let root = expr(&mut p, &mut ctx)?;
        if let Some((_, line, col)) = p.next()? {
            return perr(line, col, "trailing input after formula");
        }

        let class = class.unwrap_or(if ctx.has_thr {
            Class::F2
        } else if ctx.has_fl {
            Class::F1
        } else {
            Class::DeMorgan
        });
        let needed_half = ctx.max_index[0].max(ctx.max_index[1]).max(ctx.table_half.unwrap_or(0));
        let nvars = match nvars {
            Some(n) => n,
            None => 2 * needed_half.max(1),
        };
        let coeff_bound = match class {
            Class::F2 => coeff_bound.unwrap_or(ctx.max_mag),
            _ => 0,
        };
        let f = Formula { class, nvars, coeff_bound, nodes: ctx.nodes, root };
        f.validate()?;
        Ok(f)
    }

    fn expr(p: &mut P, ctx: &mut Ctx) -> Result<NodeId, FormulaError> {
        let (tok, line, col) = p.expect("an expression")?;
        if tok != Tok::LParen {
            return perr(line, col, "expected (");
        }
        let (head, hline, hcol) = p.expect("an operator")?;
        let Tok::Atom(op) = head else {
            return perr(hline, hcol, "expected an operator name");
        };
        match op.as_str() {
            "x" | "y" => lit_tail(p, ctx, &op, false),
            "not" => {
                let (tok, l2, c2) = p.expect("a literal")?;
                if tok != Tok::LParen {
                    return perr(l2, c2, "negation applies to inputs only; expected (x i) or (y i)");
                }
                let (head, l3, c3) = p.expect("x or y")?;
                let id = match head {
                    Tok::Atom(s) if s == "x" || s == "y" => lit_tail(p, ctx, &s, true)?,
                    _ => return perr(l3, c3, "negation applies to inputs only"),
                };
                close(p)?;
                Ok(id)
            }
            "and" | "or" => {
                let mut kids = Vec::new();
                loop {
                    match p.peek()? {
                        Some((Tok::RParen, ..)) => {
                            p.next()?;
                            break;
                        }
                        Some(_) => kids.push(expr(p, ctx)?),
                        None => return perr(hline, hcol, "unclosed gate"),
                    }
                }
                if kids.is_empty() {
                    return perr(hline, hcol, format!("({op}) needs at least one child"));
                }
                ctx.nodes.push(if op == "and" { Node::And(kids) } else { Node::Or(kids) });
                Ok(ctx.nodes.len() - 1)
            }
            "fl" => {
                let (tok, l2, c2) = p.expect("left or right")?;
                let side = match tok {
                    Tok::Atom(s) if s == "left" => Side::Left,
                    Tok::Atom(s) if s == "right" => Side::Right,
                    _ => return perr(l2, c2, "expected left or right"),
                };
                let (tok, l3, c3) = p.expect("a quoted bit string")?;
                let Tok::Str(bits) = tok else {
                    return perr(l3, c3, "expected a quoted bit string");
                };
                let table = Table::from_bit_str(&bits)
                    .map_err(|msg| FormulaError::Parse { line: l3, col: c3, msg })?;
                match ctx.table_half {
                    Some(h) if h != table.half() => {
                        return perr(l3, c3, "first-layer tables must agree on width");
                    }
                    _ => ctx.table_half = Some(table.half()),
                }
                close(p)?;
                ctx.has_fl = true;
                ctx.nodes.push(Node::FirstLayer { side, table });
                Ok(ctx.nodes.len() - 1)
            }
            "thr" => {
                let (tok, l2, c2) = p.expect("an integer threshold")?;
                let Tok::Atom(ts) = tok else { return perr(l2, c2, "expected an integer") };
                let t: i64 =
                    ts.parse().map_err(|_| FormulaError::Parse {
                        line: l2,
                        col: c2,
                        msg: format!("bad threshold {ts:?}"),
                    })?;
                ctx.max_mag = ctx.max_mag.max(t.abs());
                let mut terms = Vec::new();
                loop {
                    match p.peek()? {
                        Some((Tok::RParen, ..)) => {
                            p.next()?;
                            break;
                        }
                        Some((Tok::LParen, ..)) => {
                            p.next()?;
                            let (tok, l3, c3) = p.expect("an integer coefficient")?;
                            let Tok::Atom(cs) = tok else {
                                return perr(l3, c3, "expected an integer coefficient");
                            };
                            let c: i64 = cs.parse().map_err(|_| FormulaError::Parse {
                                line: l3,
                                col: c3,
                                msg: format!("bad coefficient {cs:?}"),
                            })?;
                            ctx.max_mag = ctx.max_mag.max(c.abs());
                            let child = expr(p, ctx)?;
                            close(p)?;
                            terms.push((c, child));
                        }
                        Some(&(_, l3, c3)) => {
                            return perr(l3, c3, "expected (coefficient child)")
                        }
                        None => return perr(hline, hcol, "unclosed threshold gate"),
                    }
                }
                if terms.is_empty() {
                    return perr(hline, hcol, "(thr) needs at least one term");
                }
                ctx.has_thr = true;
                ctx.nodes.push(Node::Thr { t, terms });
                Ok(ctx.nodes.len() - 1)
            }
            _ => perr(hline, hcol, format!("unknown operator {op:?}")),
        }
    }

    fn lit_tail(p: &mut P, ctx: &mut Ctx, tag: &str, neg: bool) -> Result<NodeId, FormulaError> {
        let (tok, l2, c2) = p.expect("an input index")?;
        let Tok::Atom(is) = tok else { return perr(l2, c2, "expected an input index") };
        let i: u32 = is.parse().map_err(|_| FormulaError::Parse {
            line: l2,
            col: c2,
            msg: format!("bad input index {is:?}"),
        })?;
        if i == 0 {
            return perr(l2, c2, "input indices start at 1");
        }
        close(p)?;
        let side = if tag == "x" { Side::Left } else { Side::Right };
        let s = if tag == "x" { 0 } else { 1 };
        ctx.max_index[s] = ctx.max_index[s].max(i);
        ctx.nodes.push(Node::Lit { side, index: i - 1, neg });
        Ok(ctx.nodes.len() - 1)
    }

    fn close(p: &mut P) -> Result<(), FormulaError> {
        let (tok, line, col) = p.expect(")")?;
        if tok != Tok::RParen {
            return perr(line, col, "expected )");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Formula {
        Formula::parse(s).expect("parse")
    }

    #[test]
    fn parse_eval_demorgan() {
        let f = parse("(and (x 1) (or (not (y 1)) (x 2)))");
        assert_eq!(f.class(), Class::DeMorgan);
        assert_eq!(f.nvars(), 4);
        // vars: x1 x2 | y1 y2
        assert!(f.eval(&[true, false, false, false]));
        assert!(!f.eval(&[true, false, true, false]));
        assert!(f.eval(&[true, true, true, false]));
        assert!(!f.eval(&[false, true, false, false]));
        assert_eq!(f.size(), 3);
        assert_eq!(f.depth(), 2);
    }

    #[test]
    fn parse_round_trip() {
        let texts = [
            "(and (x 1) (y 1))",
            "(or (and (x 1) (not (x 2))) (and (y 1) (y 2)) (not (y 1)))",
            "(fl left \"0110\")",
            "(and (fl left \"0110\") (or (fl right \"1001\") (fl left \"1110\")))",
            "(or (thr 2 (1 (fl left \"01\")) (2 (fl right \"11\"))) (thr -1 (-1 (fl left \"10\"))))",
        ];
        for t in texts {
            let f = parse(t);
            let printed = f.to_text();
            let g = Formula::parse(&printed).expect("reparse");
            assert_eq!(f, g, "round trip changed {t}");
        }
    }

    #[test]
    fn header_fixes_nvars_and_class() {
        let f = parse(";; class=demorgan nvars=8\n(and (x 1) (y 1))");
        assert_eq!(f.nvars(), 8);
        let f = parse("(and (x 1) (x 2))"); // no right-side use
        assert_eq!(f.nvars(), 4); // inferred: half = 2
    }

    #[test]
    fn first_layer_table_semantics() {
        // Table "0110" over 1 half-var? length 2 -> half=1; "0110" -> half=2.
        // Half-assignment index p: bit i of p is var i+1 of the half.
        let f = parse(";; nvars=4\n(fl left \"0110\")");
        // p = x1 + 2*x2; table fires on p=1 (x1=1,x2=0) and p=2 (x1=0,x2=1).
        assert!(!f.eval(&[false, false, false, false]));
        assert!(f.eval(&[true, false, false, false]));
        assert!(f.eval(&[false, true, false, false]));
        assert!(!f.eval(&[true, true, false, false]));
        assert_eq!(f.size(), 1);
    }

    #[test]
    fn threshold_semantics() {
        // thr fires iff sum of c*child <= t.
        let c1 = "(fl left \"01\")"; // = x1
        let c2 = "(fl right \"01\")"; // = y1
        let f = parse(&format!(";; class=F2 nvars=2 M=3\n(thr 1 (2 {c1}) (-1 {c2}))"));
        // sum = 2*x1 - y1 <= 1
        assert!(f.eval(&[false, false])); // 0 <= 1
        assert!(!f.eval(&[true, false])); // 2 > 1
        assert!(f.eval(&[true, true])); // 1 <= 1
        assert!(f.eval(&[false, true])); // -1 <= 1
        assert_eq!(f.size(), 3); // two first-layer gates + one threshold
    }

    #[test]
    fn f2_bound_enforced() {
        let c1 = "(fl left \"01\")";
        let r = Formula::parse(&format!(";; class=F2 nvars=2 M=3\n(thr 9 (1 {c1}))"));
        assert!(r.is_err());
        let r = Formula::parse(&format!(";; class=F2 nvars=2 M=3\n(thr 1 (-7 {c1}))"));
        assert!(r.is_err());
    }

    #[test]
    fn class_shape_rejections() {
        // F1 must not contain raw literals.
        assert!(Formula::parse(";; class=F1 nvars=2\n(and (x 1) (fl right \"01\"))").is_err());
        // F2 and/or must not read first-layer gates directly.
        assert!(Formula::parse(
            ";; class=F2 nvars=2 M=1\n(and (fl left \"01\") (thr 0 (1 (fl right \"01\"))))"
        )
        .is_err());
        // deMorgan must not contain tables.
        assert!(Formula::parse(";; class=demorgan nvars=2\n(fl left \"01\")").is_err());
        // Negation of a gate is a parse error.
        assert!(Formula::parse("(not (and (x 1) (y 1)))").is_err());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = Formula::parse("(and (x 1)\n  (z 2))").unwrap_err();
        match e {
            FormulaError::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 4);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn binarize_preserves_semantics_and_bounds_fanin() {
        let f = parse("(or (x 1) (x 2) (and (y 1) (y 2) (x 3) (not (y 3))) (y 1))");
        let b = f.binarize();
        let mut max_fanin = 0;
        b.walk(|n| {
            if let Node::And(c) | Node::Or(c) = n {
                max_fanin = max_fanin.max(c.len());
            }
        });
        assert!(max_fanin <= 2);
        assert_eq!(b.size(), f.size());
        let n = f.nvars() as usize;
        for bits in 0..1u32 << n {
            let assign: Vec<bool> = (0..n).map(|i| (bits >> i) & 1 == 1).collect();
            assert_eq!(f.eval(&assign), b.eval(&assign));
        }
    }

    #[test]
    fn lift_to_f1_preserves_semantics() {
        let f = parse("(or (and (x 1) (not (y 2))) (and (not (x 2)) (y 1)))");
        let g = f.lift_to_f1();
        assert_eq!(g.class(), Class::F1);
        assert_eq!(g.size(), f.size());
        let n = f.nvars() as usize;
        for bits in 0..1u32 << n {
            let assign: Vec<bool> = (0..n).map(|i| (bits >> i) & 1 == 1).collect();
            assert_eq!(f.eval(&assign), g.eval(&assign));
        }
    }

    #[test]
    fn lift_to_f2_preserves_semantics() {
        let f = parse("(or (and (x 1) (not (y 2))) (and (not (x 2)) (y 1)))").lift_to_f1();
        let g = f.lift_to_f2();
        assert_eq!(g.class(), Class::F2);
        assert_eq!(g.coeff_bound(), 1);
        let n = f.nvars() as usize;
        for bits in 0..1u32 << n {
            let assign: Vec<bool> = (0..n).map(|i| (bits >> i) & 1 == 1).collect();
            assert_eq!(f.eval(&assign), g.eval(&assign));
        }
    }

    /// Right-leaning and-chain over 12 distinct literals: depth 11, far over
    /// the k=2 budget for size 12 (~14.9 needs depth > 14; use a longer chain).
    fn deep_chain(n: u32) -> Formula {
        let mut b = Builder::new();
        let half = n / 2;
        let mut cur = b.lit(Side::Left, 0, false);
        for i in 1..n {
            let (side, idx) =
                if i < half { (Side::Left, i) } else { (Side::Right, i - half) };
            let l = b.lit(side, idx, i % 3 == 0);
            cur = if i % 2 == 0 { b.and(vec![cur, l]) } else { b.or(vec![cur, l]) };
        }
        b.finish(cur, Class::DeMorgan, n, 0).unwrap()
    }

    #[test]
    fn depth_reduce_within_budget_and_equivalent() {
        for n in [6u32, 8, 10, 12] {
            let f = deep_chain(n);
            let g = f.depth_reduce(2);
            let budget = depth_budget(2, g.size().max(f.size()));
            assert!(
                (g.depth() as f64) <= budget,
                "depth {} over budget {budget}",
                g.depth()
            );
            for bits in 0..1u32 << n {
                let assign: Vec<bool> = (0..n as usize).map(|i| (bits >> i) & 1 == 1).collect();
                assert_eq!(f.eval(&assign), g.eval(&assign), "differ at {bits:#b} for n={n}");
            }
        }
    }

    #[test]
    fn depth_reduce_identity_when_within_budget() {
        let f = parse("(and (x 1) (or (y 1) (x 2)))");
        let g = f.depth_reduce(2);
        assert_eq!(f, g);
    }

    #[test]
    fn read_once_detection() {
        assert!(parse("(and (x 1) (y 1))").is_read_once());
        assert!(!parse("(and (x 1) (or (x 1) (y 1)))").is_read_once());
    }

    #[test]
    fn size_measures() {
        let f = parse("(or (and (x 1) (y 1)) (and (x 1) (not (y 2))))");
        assert_eq!(f.size(), 4); // leaves
        assert_eq!(f.leaf_count(), 4);
        assert_eq!(f.reachable_count(), 7);
        assert_eq!(f.depth(), 2);
    }
}
