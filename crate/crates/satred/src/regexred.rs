//! Pair instances compiled into regular-expression substring matching over
//! the alphabet {0, 1}, plus the reference Thompson-NFA matcher.
//!
//! Numbers travel inside the bit strings as framed blocks `#(m)`. Gate
//! separators use block values strictly above everything their subtexts can
//! contain, so a separator occurrence in a well-formed text pins down its
//! position exactly. The whole reduction rests on that alignment property;
//! [`substring_property_check`] is its testable core.

use crate::formula::{Formula, Node, NodeId, Side};
use crate::splitlist::PairInstance;
use std::fmt::{self, Write as _};
use thiserror::Error;

/// Ratio cap for emitted text length and pattern size, measured against
/// n·s·log2(s+2). The acceptance run reports the observed constant.
pub const REGEX_LENGTH_C: f64 = 64.0;

#[derive(Debug, Error)]
pub enum RegexError {
    /// Pattern text that does not parse.
    #[error("pattern syntax error at byte {at}: {msg}")]
    Syntax { at: usize, msg: String },
    /// Instance file that does not parse.
    #[error("bad instance: {0}")]
    Format(String),
}

/// Regular expression over the binary alphabet. Concatenation is explicit in
/// the tree and implicit in the textual form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    Literal(u8),
    Concat(Vec<Regex>),
    Union(Vec<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    /// Node count of the expression tree.
    pub fn size(&self) -> usize {
        match self {
            Regex::Literal(_) => 1,
            Regex::Concat(parts) | Regex::Union(parts) => {
                1 + parts.iter().map(Regex::size).sum::<usize>()
            }
            Regex::Star(inner) => 1 + inner.size(),
        }
    }

    /// Parses the textual form: `0`, `1`, concatenation by juxtaposition,
    /// `|` for union, postfix `*`, parentheses for grouping. Star binds
    /// tighter than concatenation, which binds tighter than union.
    pub fn parse(text: &str) -> Result<Regex, RegexError> {
        let bytes = text.as_bytes();
        let mut pos = 0;
        let r = parse_union(bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(RegexError::Syntax { at: pos, msg: "unmatched ')'".into() });
        }
        Ok(r)
    }

    fn prec(&self) -> u8 {
        match self {
            Regex::Literal(_) => 3,
            Regex::Star(_) => 2,
            Regex::Concat(_) => 1,
            Regex::Union(_) => 0,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
        if self.prec() < need {
            f.write_char('(')?;
            self.fmt_prec(f, 0)?;
            return f.write_char(')');
        }
        match self {
            Regex::Literal(b) => f.write_char(if *b == 0 { '0' } else { '1' }),
            Regex::Concat(parts) => parts.iter().try_for_each(|p| p.fmt_prec(f, 2)),
            Regex::Union(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_char('|')?;
                    }
                    p.fmt_prec(f, 1)?;
                }
                Ok(())
            }
            Regex::Star(inner) => {
                inner.fmt_prec(f, 2)?;
                f.write_char('*')
            }
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn parse_union(b: &[u8], pos: &mut usize) -> Result<Regex, RegexError> {
    let mut alts = vec![parse_concat(b, pos)?];
    while b.get(*pos) == Some(&b'|') {
        *pos += 1;
        alts.push(parse_concat(b, pos)?);
    }
    Ok(union_of(alts))
}

fn parse_concat(b: &[u8], pos: &mut usize) -> Result<Regex, RegexError> {
    let mut parts = Vec::new();
    loop {
        let atom = match b.get(*pos) {
            Some(b'0') => {
                *pos += 1;
                Regex::Literal(0)
            }
            Some(b'1') => {
                *pos += 1;
                Regex::Literal(1)
            }
            Some(b'(') => {
                let open = *pos;
                *pos += 1;
                let inner = parse_union(b, pos)?;
                if b.get(*pos) != Some(&b')') {
                    return Err(RegexError::Syntax { at: open, msg: "unclosed '('".into() });
                }
                *pos += 1;
                inner
            }
            Some(b'*') => {
                return Err(RegexError::Syntax { at: *pos, msg: "'*' needs an operand".into() })
            }
            Some(b')') | Some(b'|') | None => break,
            Some(&c) => {
                return Err(RegexError::Syntax {
                    at: *pos,
                    msg: format!("unexpected {:?}", c as char),
                })
            }
        };
        let mut item = atom;
        while b.get(*pos) == Some(&b'*') {
            *pos += 1;
            item = Regex::Star(Box::new(item));
        }
        parts.push(item);
    }
    if parts.is_empty() {
        return Err(RegexError::Syntax { at: *pos, msg: "empty expression".into() });
    }
    Ok(concat_of(parts))
}

fn concat_of(mut parts: Vec<Regex>) -> Regex {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Regex::Concat(parts)
    }
}

fn union_of(mut parts: Vec<Regex>) -> Regex {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Regex::Union(parts)
    }
}

fn literal_run(bits: &[u8]) -> Regex {
    Regex::Concat(bits.iter().map(|&b| Regex::Literal(b)).collect())
}

fn any_bits() -> Regex {
    Regex::Star(Box::new(Regex::Union(vec![Regex::Literal(0), Regex::Literal(1)])))
}

/// Framed binary encoding of `m`: `11`, then each bit of `m` preceded by a
/// `0` (most significant first, k = max(1, floor(log2 m) + 1) bits), then
/// `011`. No encoding is a substring of another one's interior, which makes
/// block boundaries in concatenations recoverable.
pub fn encode_number(m: u32) -> Vec<u8> {
    let k = if m == 0 { 1 } else { 32 - m.leading_zeros() };
    let mut out = vec![1, 1];
    for i in (0..k).rev() {
        out.push(0);
        out.push(((m >> i) & 1) as u8);
    }
    out.extend([0, 1, 1]);
    out
}

/// Splits a concatenation of `#(y)` blocks back into the values, or `None`
/// when `text` is not such a concatenation. The parse is deterministic: a
/// payload bit is always preceded by `0` and a payload `1` is always
/// followed by `0`, so two symbols of lookahead decide where a block ends.
pub fn split_blocks(text: &[u8]) -> Option<Vec<u32>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        if text.get(i..i + 2)? != [1, 1] {
            return None;
        }
        i += 2;
        let mut bits: Vec<u8> = Vec::new();
        loop {
            if *text.get(i)? != 0 {
                return None;
            }
            i += 1;
            if text.get(i..i + 2) == Some(&[1, 1][..]) {
                i += 2;
                break;
            }
            bits.push(*text.get(i)?);
            i += 1;
        }
        // the canonical encoding has no leading zeros and fits a u32
        if bits.is_empty() || bits.len() > 32 || (bits.len() > 1 && bits[0] == 0) {
            return None;
        }
        out.push(bits.iter().fold(0u32, |acc, &b| acc * 2 + b as u32));
    }
    Some(out)
}

/// Whether `#(x)` occurs as a substring of `#(y_1)…#(y_k)`. By the framing
/// of [`encode_number`] this holds exactly when x is one of the ys.
pub fn substring_property_check(x: u32, ys: &[u32]) -> bool {
    let needle = encode_number(x);
    let hay: Vec<u8> = ys.iter().flat_map(|&y| encode_number(y)).collect();
    hay.len() >= needle.len() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Per-node longest path to a descendant: 0 at leaves, 1 + max over
/// children at gates. Arena order puts children before parents, so one
/// forward pass suffices.
fn heights(f: &Formula) -> Vec<u32> {
    let mut h = vec![0u32; f.node_count()];
    for id in 0..f.node_count() {
        h[id] = match f.node(id) {
            Node::Lit { .. } | Node::FirstLayer { .. } => 0,
            Node::And(c) | Node::Or(c) => 1 + c.iter().map(|&ch| h[ch]).max().unwrap_or(0),
            Node::Thr { terms, .. } => {
                1 + terms.iter().map(|&(_, ch)| h[ch]).max().unwrap_or(0)
            }
        };
    }
    h
}

fn assert_tree(f: &Formula) {
    let mut seen = vec![false; f.node_count()];
    let mut stack = vec![f.root()];
    while let Some(id) = stack.pop() {
        assert!(!seen[id], "regex gadgets need tree-shaped formulas");
        seen[id] = true;
        match f.node(id) {
            Node::Lit { .. } | Node::FirstLayer { .. } => {}
            Node::And(c) | Node::Or(c) => stack.extend(c.iter().copied()),
            Node::Thr { terms, .. } => stack.extend(terms.iter().map(|&(_, ch)| ch)),
        }
    }
}

/// Text and pattern for the subformula rooted at `id` on one input pair;
/// the pattern matches a substring of the text exactly when the gate
/// fires. Gate-level verification hook.
pub fn gate_strings(f: &Formula, id: NodeId, a: u32, b: u32) -> (Vec<u8>, Regex) {
    assert_tree(f);
    let h = heights(f);
    let mut text = Vec::new();
    text_of(f, id, a, &h, &mut text);
    (text, pattern_of(f, id, b, &h))
}

fn text_of(f: &Formula, id: NodeId, a: u32, h: &[u32], out: &mut Vec<u8>) {
    match f.node(id) {
        Node::Lit { side, index, neg } => {
            let v = match side {
                Side::Left => ((a >> index) & 1) ^ (*neg as u32),
                Side::Right => 1,
            };
            out.extend_from_slice(&encode_number(v));
        }
        Node::And(c) | Node::Or(c) if c.len() == 1 => text_of(f, c[0], a, h, out),
        Node::And(c) | Node::Or(c) if c.len() == 2 => {
            text_of(f, c[0], a, h, out);
            out.extend_from_slice(&encode_number(h[id] + 1));
            text_of(f, c[1], a, h, out);
        }
        _ => panic!("regex gadgets cover binarized deMorgan pair formulas only"),
    }
}

fn pattern_of(f: &Formula, id: NodeId, b: u32, h: &[u32]) -> Regex {
    match f.node(id) {
        Node::Lit { side, index, neg } => {
            let v = match side {
                Side::Left => 1,
                Side::Right => ((b >> index) & 1) ^ (*neg as u32),
            };
            literal_run(&encode_number(v))
        }
        Node::And(c) | Node::Or(c) if c.len() == 1 => pattern_of(f, c[0], b, h),
        Node::And(c) if c.len() == 2 => {
            let sep = literal_run(&encode_number(h[id] + 1));
            Regex::Concat(vec![pattern_of(f, c[0], b, h), sep, pattern_of(f, c[1], b, h)])
        }
        Node::Or(c) if c.len() == 2 => {
            let sep = encode_number(h[id] + 1);
            Regex::Union(vec![
                Regex::Concat(vec![pattern_of(f, c[0], b, h), literal_run(&sep), any_bits()]),
                Regex::Concat(vec![any_bits(), literal_run(&sep), pattern_of(f, c[1], b, h)]),
            ])
        }
        _ => panic!("regex gadgets cover binarized deMorgan pair formulas only"),
    }
}

/// Text side of the gate construction: leaf reading the left entry `a`
/// becomes `#(bit)`, a right-side leaf becomes `#(1)`, and a binary gate
/// joins its children with the separator `#(h+1)` for gate height h.
pub fn build_text(f: &Formula, a: u32) -> Vec<u8> {
    assert_tree(f);
    let h = heights(f);
    let mut out = Vec::new();
    text_of(f, f.root(), a, &h, &mut out);
    out
}

/// Pattern side, mirror of [`build_text`]: left-side leaves become `#(1)`,
/// right-side leaves `#(bit)`. An and-gate concatenates through the
/// separator; an or-gate offers each child next to its separator with a
/// `(0|1)*` absorbing the rest. The pattern matches a substring of the text
/// exactly when the formula is true on (a, b).
pub fn build_pattern(f: &Formula, b: u32) -> Regex {
    assert_tree(f);
    let h = heights(f);
    pattern_of(f, f.root(), b, &h)
}

/// Substring-matching instance: does some substring of `text` belong to the
/// language of `pattern`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegexInstance {
    pub text: Vec<u8>,
    pub pattern: Regex,
    /// Top separator value; the text starts and ends with `#(h_top)`.
    pub h_top: u32,
}

impl RegexInstance {
    pub fn decide(&self) -> bool {
        regex_match_substring(&self.pattern, &self.text)
    }

    /// Two lines: the text bits, then the pattern in its textual form.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.text.len() + 64);
        for &b in &self.text {
            out.push(if b == 0 { '0' } else { '1' });
        }
        out.push('\n');
        let _ = write!(out, "{}", self.pattern);
        out.push('\n');
        out
    }

    /// Inverse of [`to_text`]. The top separator is recovered from the
    /// leading block when the text is block-formed, 0 otherwise.
    pub fn parse(s: &str) -> Result<RegexInstance, RegexError> {
        let mut lines = s.lines();
        let tline = lines
            .next()
            .ok_or_else(|| RegexError::Format("missing text line".into()))?;
        let pline = lines
            .next()
            .ok_or_else(|| RegexError::Format("missing pattern line".into()))?;
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(RegexError::Format("trailing content".into()));
        }
        let mut text = Vec::with_capacity(tline.len());
        for (i, c) in tline.chars().enumerate() {
            match c {
                '0' => text.push(0),
                '1' => text.push(1),
                _ => {
                    return Err(RegexError::Format(format!(
                        "text byte {i} is {c:?}, want 0 or 1"
                    )))
                }
            }
        }
        let pattern = Regex::parse(pline)?;
        let h_top = split_blocks(&text).and_then(|v| v.first().copied()).unwrap_or(0);
        Ok(RegexInstance { text, pattern, h_top })
    }
}

/// Compiles a pair instance to substring matching. The text strings all
/// left entries together between copies of a fresh top separator; the
/// pattern is the union over right entries of the per-entry pattern
/// bracketed by that separator. The match verdict equals the naive solver's.
pub fn reduce_to_regex(inst: &PairInstance) -> RegexInstance {
    let f = inst.formula.binarize();
    assert_tree(&f);
    let h = heights(&f);
    let top = h[f.root()] + 2;
    let sep = encode_number(top);

    let mut text = sep.clone();
    for &av in &inst.a {
        text_of(&f, f.root(), av, &h, &mut text);
        text.extend_from_slice(&sep);
    }
    let branches = inst
        .b
        .iter()
        .map(|&bv| {
            Regex::Concat(vec![
                literal_run(&sep),
                pattern_of(&f, f.root(), bv, &h),
                literal_run(&sep),
            ])
        })
        .collect();
    let pattern = union_of(branches);

    let blocks = split_blocks(&text).expect("emitted texts are block concatenations");
    assert!(blocks.iter().all(|&v| v <= top), "blocks stay within the top separator");

    let n = inst.a.len().max(inst.b.len()) as f64;
    let s = inst.formula.size() as f64;
    let cap = REGEX_LENGTH_C * n * s * (s + 2.0).log2();
    assert!(text.len() as f64 <= cap, "text length {} over cap {cap:.1}", text.len());
    let psize = pattern.size();
    assert!((psize as f64) <= cap, "pattern size {psize} over cap {cap:.1}");

    RegexInstance { text, pattern, h_top: top }
}

/// Thompson construction: one optional consuming edge and a list of epsilon
/// edges per state.
struct Nfa {
    sym: Vec<Option<(u8, usize)>>,
    eps: Vec<Vec<usize>>,
    start: usize,
    accept: usize,
}

impl Nfa {
    fn compile(r: &Regex) -> Nfa {
        let mut nfa = Nfa { sym: Vec::new(), eps: Vec::new(), start: 0, accept: 0 };
        let (s, a) = nfa.build(r);
        nfa.start = s;
        nfa.accept = a;
        nfa
    }

    fn state(&mut self) -> usize {
        self.sym.push(None);
        self.eps.push(Vec::new());
        self.sym.len() - 1
    }

    fn build(&mut self, r: &Regex) -> (usize, usize) {
        match r {
            Regex::Literal(b) => {
                let s = self.state();
                let a = self.state();
                self.sym[s] = Some((*b, a));
                (s, a)
            }
            Regex::Concat(parts) => {
                let s = self.state();
                let mut cur = s;
                for p in parts {
                    let (ps, pa) = self.build(p);
                    self.eps[cur].push(ps);
                    cur = pa;
                }
                (s, cur)
            }
            Regex::Union(parts) => {
                let s = self.state();
                let a = self.state();
                for p in parts {
                    let (ps, pa) = self.build(p);
                    self.eps[s].push(ps);
                    self.eps[pa].push(a);
                }
                (s, a)
            }
            Regex::Star(inner) => {
                let s = self.state();
                let a = self.state();
                let (is, ia) = self.build(inner);
                self.eps[s].push(is);
                self.eps[s].push(a);
                self.eps[ia].push(is);
                self.eps[ia].push(a);
                (s, a)
            }
        }
    }

    /// Closes `set` under epsilon edges in place.
    fn closure(&self, set: &mut [u64]) {
        let mut stack: Vec<usize> = Vec::new();
        for (wi, &w) in set.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                stack.push(wi * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        while let Some(q) = stack.pop() {
            for &r in &self.eps[q] {
                if set[r / 64] >> (r % 64) & 1 == 0 {
                    set[r / 64] |= 1 << (r % 64);
                    stack.push(r);
                }
            }
        }
    }
}

/// Whether some substring of `text` (the empty one included) is in the
/// language of `pattern`. NFA simulation with the start state re-seeded at
/// every position, O(|text|·|pattern|).
pub fn regex_match_substring(pattern: &Regex, text: &[u8]) -> bool {
    let nfa = Nfa::compile(pattern);
    let words = nfa.sym.len().div_ceil(64);
    let mut cur = vec![0u64; words];
    cur[nfa.start / 64] |= 1 << (nfa.start % 64);
    nfa.closure(&mut cur);
    if cur[nfa.accept / 64] >> (nfa.accept % 64) & 1 == 1 {
        return true;
    }
    let mut next = vec![0u64; words];
    for &c in text {
        next.iter_mut().for_each(|w| *w = 0);
        for (wi, &w) in cur.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let q = wi * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                if let Some((b, to)) = nfa.sym[q] {
                    if b == c {
                        next[to / 64] |= 1 << (to % 64);
                    }
                }
            }
        }
        next[nfa.start / 64] |= 1 << (nfa.start % 64);
        nfa.closure(&mut next);
        if next[nfa.accept / 64] >> (nfa.accept % 64) & 1 == 1 {
            return true;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Builder, Class, Table};
    use crate::oracles::regex_language;
    use crate::splitlist::split_f1;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn encoding_frozen_values() {
        assert_eq!(encode_number(0), bits("1100011"));
        assert_eq!(encode_number(1), bits("1101011"));
        assert_eq!(encode_number(5), bits("11010001011"));
        for m in 0..40u32 {
            let k = if m == 0 { 1 } else { 32 - m.leading_zeros() };
            assert_eq!(encode_number(m).len() as u32, 2 * k + 5);
        }
    }

    #[test]
    fn block_splitting_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..200 {
            let vals: Vec<u32> = (0..rng.random_range(0..6))
                .map(|_| rng.random_range(0..100))
                .collect();
            let text: Vec<u8> = vals.iter().flat_map(|&v| encode_number(v)).collect();
            assert_eq!(split_blocks(&text), Some(vals));
        }
        assert_eq!(split_blocks(&[]), Some(vec![]));
        assert_eq!(split_blocks(&bits("11011")), None); // empty payload
        assert_eq!(split_blocks(&bits("110101")), None); // truncated terminator
        assert_eq!(split_blocks(&bits("011010110")), None); // stray framing bits
        assert_eq!(split_blocks(&bits("110001011")), None); // leading zero payload
        assert_eq!(split_blocks(&bits("110101100")), None); // junk after a block
    }

    #[test]
    fn substring_property_matches_membership() {
        assert!(substring_property_check(2, &[1, 2, 3]));
        assert!(!substring_property_check(0, &[]));
        let mut ys = vec![0u32; 3];
        for k in 0..=3usize {
            let mut idx = vec![0u32; k];
            loop {
                let tuple = &idx[..];
                for x in 0..=20u32 {
                    ys[..k].copy_from_slice(tuple);
                    assert_eq!(
                        substring_property_check(x, &ys[..k]),
                        tuple.contains(&x),
                        "x={x} ys={tuple:?}"
                    );
                }
                let mut j = k;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    if idx[j] < 20 {
                        idx[j] += 1;
                        break;
                    }
                    idx[j] = 0;
                    if j == 0 {
                        j = usize::MAX;
                        break;
                    }
                }
                if j == usize::MAX || k == 0 {
                    break;
                }
            }
        }
    }

    fn random_regex(rng: &mut ChaCha8Rng, budget: usize) -> Regex {
        if budget <= 1 {
            return Regex::Literal(rng.random_range(0..2));
        }
        match rng.random_range(0..4) {
            0 => Regex::Literal(rng.random_range(0..2)),
            1 => Regex::Star(Box::new(random_regex(rng, budget - 1))),
            2 => {
                let cut = rng.random_range(1..budget);
                Regex::Concat(vec![
                    random_regex(rng, cut),
                    random_regex(rng, budget - cut),
                ])
            }
            _ => {
                let cut = rng.random_range(1..budget);
                Regex::Union(vec![
                    random_regex(rng, cut),
                    random_regex(rng, budget - cut),
                ])
            }
        }
    }

    #[test]
    fn regex_print_parse_roundtrip() {
        let samples = ["(0|1)*", "0*1|10", "0**", "(01)*0", "1", "((0|1)(0|1))*"];
        for s in samples {
            let r = Regex::parse(s).unwrap();
            assert_eq!(format!("{r}"), s, "canonical form of {s}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..200 {
            let budget = rng.random_range(1..12);
            let r = random_regex(&mut rng, budget);
            let printed = format!("{r}");
            let back = Regex::parse(&printed).unwrap();
            assert_eq!(back, r, "{printed}");
        }
    }

    #[test]
    fn regex_parse_rejects_malformed() {
        for bad in ["", "(", "()", "0|", "|0", "*", "0(1", "0)1", "2", "0 1"] {
            assert!(Regex::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn matcher_frozen_cases() {
        let star0 = Regex::parse("0*").unwrap();
        assert!(regex_match_substring(&star0, &bits("11"))); // empty substring
        let any = Regex::parse("(0|1)*").unwrap();
        for t in ["", "0", "10110"] {
            assert!(regex_match_substring(&any, &bits(t)));
        }
        let one = Regex::Literal(1);
        assert!(!regex_match_substring(&one, &bits("000")));
        assert!(regex_match_substring(&Regex::parse("11").unwrap(), &bits("011")));
        assert!(!regex_match_substring(&Regex::parse("11").unwrap(), &bits("0101")));
    }

    #[test]
    fn matcher_agrees_with_language_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..150 {
            let budget = rng.random_range(1..=8);
            let p = random_regex(&mut rng, budget);
            let tlen = rng.random_range(0..=10usize);
            let t: Vec<u8> = (0..tlen).map(|_| rng.random_range(0..2)).collect();
            let brute = (0..=t.len()).any(|len| {
                let words = regex_language(&p, len);
                if len == 0 {
                    !words.is_empty()
                } else {
                    words.iter().any(|w| t.windows(len).any(|s| s == &w[..]))
                }
            });
            assert_eq!(regex_match_substring(&p, &t), brute, "p={p} t={t:?}");
        }
    }

    #[test]
    fn closure_reaches_fixpoint() {
        let p = Regex::parse("(0|1*)*1").unwrap();
        let nfa = Nfa::compile(&p);
        let words = nfa.sym.len().div_ceil(64);
        let mut set = vec![0u64; words];
        set[nfa.start / 64] |= 1 << (nfa.start % 64);
        nfa.closure(&mut set);
        let once = set.clone();
        nfa.closure(&mut set);
        assert_eq!(set, once);
    }

    fn leaf_formula(side: Side, neg: bool) -> Formula {
        let mut b = Builder::new();
        let l = b.lit(side, 0, neg);
        let root = b.and(vec![l]);
        b.finish(root, Class::DeMorgan, 2, 0).unwrap()
    }

    #[test]
    fn input_gate_examples() {
        let f = leaf_formula(Side::Left, false);
        // a-side leaf: text #(a bit), pattern #(1)
        assert_eq!(build_text(&f, 1), encode_number(1));
        assert_eq!(build_text(&f, 0), encode_number(0));
        assert_eq!(format!("{}", build_pattern(&f, 0)), "1101011");
        assert!(regex_match_substring(&build_pattern(&f, 0), &build_text(&f, 1)));
        assert!(!regex_match_substring(&build_pattern(&f, 0), &build_text(&f, 0)));

        // b-side leaf: text #(1), pattern #(b bit)
        let g = leaf_formula(Side::Right, false);
        assert_eq!(build_text(&g, 0), encode_number(1));
        for b in 0..2u32 {
            let hit = regex_match_substring(&build_pattern(&g, b), &build_text(&g, 0));
            assert_eq!(hit, b == 1);
        }

        // negation flips the owning side
        let n = leaf_formula(Side::Left, true);
        assert_eq!(build_text(&n, 1), encode_number(0));
        assert_eq!(build_text(&n, 0), encode_number(1));
    }

    #[test]
    fn or_gate_over_all_four_inputs() {
        let mut b = Builder::new();
        let x = b.lit(Side::Left, 0, false);
        let y = b.lit(Side::Right, 0, false);
        let root = b.or(vec![x, y]);
        let f = b.finish(root, Class::DeMorgan, 2, 0).unwrap();
        for a in 0..2u32 {
            for bv in 0..2u32 {
                let hit = regex_match_substring(&build_pattern(&f, bv), &build_text(&f, a));
                assert_eq!(hit, a == 1 || bv == 1, "a={a} b={bv}");
            }
        }
    }

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

    #[test]
    fn gate_level_soundness_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let f = random_tree(&mut rng, 3);
            let h = heights(&f);
            for id in f.reachable_ids() {
                for a in 0..8u32 {
                    for bv in 0..8u32 {
                        let mut t = Vec::new();
                        text_of(&f, id, a, &h, &mut t);
                        let p = pattern_of(&f, id, bv, &h);
                        let want = f.eval_node(id, a as u64, bv as u64);
                        assert_eq!(
                            regex_match_substring(&p, &t),
                            want,
                            "node {id} a={a} b={bv}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn texts_split_into_bounded_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..20 {
            let f = random_tree(&mut rng, 4);
            let h = heights(&f);
            let t = build_text(&f, rng.random_range(0..16));
            let vals = split_blocks(&t).expect("texts are block concatenations");
            assert!(vals.iter().all(|&v| v <= h[f.root()] + 1));
        }
    }

    fn random_f1(rng: &mut ChaCha8Rng, nvars: u32, per_side: usize) -> Formula {
        let half = nvars / 2;
        let mut b = Builder::new();
        let mut gates = Vec::new();
        for side in [Side::Left, Side::Right] {
            for _ in 0..rng.random_range(1..=per_side) {
                let mut t = Table::new_false(half);
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
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let (mut sat_seen, mut unsat_seen) = (false, false);
        for round in 0..16 {
            let nvars = [2, 4, 4, 6][round % 4];
            let f = random_f1(&mut rng, nvars, 3);
            let half = nvars / 2;
            let sat = (0..1u64 << half)
                .any(|a| (0..1u64 << half).any(|b| f.eval_halves(a, b)));
            sat_seen |= sat;
            unsat_seen |= !sat;
            let inst = split_f1(&f).unwrap();
            let out = reduce_to_regex(&inst);
            assert_eq!(out.decide(), sat, "nvars={nvars}");
            let vals = split_blocks(&out.text).unwrap();
            assert!(vals.iter().all(|&v| v <= out.h_top));
        }
        assert!(sat_seen && unsat_seen, "mix of verdicts exercised");
    }

    #[test]
    fn reduce_handles_constant_verdicts() {
        for value in [false, true] {
            let mut b = Builder::new();
            let mut t = Table::new_false(1);
            t.set(0, value);
            t.set(1, value);
            let g = b.first_layer(Side::Left, t);
            let root = b.and(vec![g]);
            let f = b.finish(root, Class::F1, 2, 0).unwrap();
            let out = reduce_to_regex(&split_f1(&f).unwrap());
            assert_eq!(out.decide(), value);
        }
    }

    #[test]
    fn reduce_respects_length_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let mut worst: f64 = 0.0;
        for _ in 0..30 {
            let f = random_f1(&mut rng, 6, 4);
            let inst = split_f1(&f).unwrap();
            let out = reduce_to_regex(&inst);
            let n = inst.a.len().max(inst.b.len()) as f64;
            let s = inst.formula.size() as f64;
            let denom = n * s * (s + 2.0).log2();
            worst = worst
                .max(out.text.len() as f64 / denom)
                .max(out.pattern.size() as f64 / denom);
        }
        assert!(worst <= REGEX_LENGTH_C, "observed ratio {worst:.1}");
    }

    #[test]
    fn instance_file_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let f = random_f1(&mut rng, 4, 2);
        let out = reduce_to_regex(&split_f1(&f).unwrap());
        let back = RegexInstance::parse(&out.to_text()).unwrap();
        assert_eq!(back, out);

        assert!(RegexInstance::parse("").is_err());
        assert!(RegexInstance::parse("0101\n").is_err());
        assert!(RegexInstance::parse("012\n1\n").is_err());
        assert!(RegexInstance::parse("01\n(1\n").is_err());
        assert!(RegexInstance::parse("01\n1\njunk\n").is_err());
    }
}
