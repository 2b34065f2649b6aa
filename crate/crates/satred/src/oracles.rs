//! Independent brute-force checkers for the reference solvers.
//!
//! Everything here is written for transparency, not speed: subsequences,
//! regular-language members, and curve traversals are enumerated outright.
//! The fast solvers are trusted only because they agree with these on small
//! inputs.

/// Longest common subsequence length by enumerating every subsequence of the
/// shorter string. Exponential; callers keep the shorter side at ~8 symbols.
pub fn lcs_by_enumeration(x: &[u32], y: &[u32]) -> usize {
    let (short, long) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    assert!(short.len() <= 20, "enumeration oracle needs a short side");
    let mut best = 0;
    for mask in 0u32..1 << short.len() {
        let picked: Vec<u32> = (0..short.len())
            .filter(|&i| (mask >> i) & 1 == 1)
            .map(|i| short[i])
            .collect();
        if picked.len() > best && is_subsequence(&picked, long) {
            best = picked.len();
        }
    }
    best
}

pub fn is_subsequence(needle: &[u32], hay: &[u32]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// All words of length `len` over `{0,1}` matched by `pattern`, by testing
/// every word with a straightforward backtracking matcher.
pub fn regex_language(pattern: &crate::regexred::Regex, len: usize) -> Vec<Vec<u8>> {
    assert!(len <= 16);
    let mut out = Vec::new();
    for w in 0u32..1 << len {
        let word: Vec<u8> = (0..len).map(|i| ((w >> i) & 1) as u8).collect();
        if regex_accepts(pattern, &word) {
            out.push(word);
        }
    }
    out
}

/// Backtracking acceptance test, structurally recursive on the pattern.
pub fn regex_accepts(pattern: &crate::regexred::Regex, word: &[u8]) -> bool {
    // match_at(p, w) = set of suffix offsets reachable after matching a
    // prefix of w against p. Exponential in the worst case; oracle-only.
    fn match_ends(p: &crate::regexred::Regex, word: &[u8], from: usize) -> Vec<usize> {
        use crate::regexred::Regex::*;
        match p {
            Literal(c) => {
                if word.get(from) == Some(c) {
                    vec![from + 1]
                } else {
                    vec![]
                }
            }
            Concat(parts) => {
                let mut cur = vec![from];
                for part in parts {
                    let mut next = Vec::new();
                    for &f in &cur {
                        for e in match_ends(part, word, f) {
                            if !next.contains(&e) {
                                next.push(e);
                            }
                        }
                    }
                    cur = next;
                    if cur.is_empty() {
                        break;
                    }
                }
                cur
            }
            Union(parts) => {
                let mut out = Vec::new();
                for part in parts {
                    for e in match_ends(part, word, from) {
                        if !out.contains(&e) {
                            out.push(e);
                        }
                    }
                }
                out
            }
            Star(inner) => {
                let mut out = vec![from];
                let mut frontier = vec![from];
                while let Some(f) = frontier.pop() {
                    for e in match_ends(inner, word, f) {
                        if e > f && !out.contains(&e) {
                            out.push(e);
                            frontier.push(e);
                        }
                    }
                }
                out
            }
        }
    }
    match_ends(pattern, word, 0).contains(&word.len())
}

/// Discrete Fréchet decision by enumerating all monotone traversals of the
/// two curves. Exponential; curves are kept at <= 5 vertices each.
pub fn frechet_by_enumeration(
    p: &crate::frechetred::Curve,
    q: &crate::frechetred::Curve,
    delta: &crate::frechetred::Rat,
) -> bool {
    let np = p.len();
    let nq = q.len();
    assert!(np >= 1 && nq >= 1);
    assert!(np <= 6 && nq <= 6, "enumeration oracle needs tiny curves");
    let d2 = delta * delta;
    let close = |i: usize, j: usize| crate::frechetred::dist2(&p[i], &q[j]) <= d2;
    // Depth-first over (i, j) with moves (i+1,j), (i,j+1), (i+1,j+1).
    fn walk(
        i: usize,
        j: usize,
        np: usize,
        nq: usize,
        close: &dyn Fn(usize, usize) -> bool,
        seen: &mut Vec<Vec<bool>>,
    ) -> bool {
        if !close(i, j) || seen[i][j] {
            return false;
        }
        seen[i][j] = true;
        if i == np - 1 && j == nq - 1 {
            return true;
        }
        let mut moves = Vec::new();
        if i + 1 < np {
            moves.push((i + 1, j));
        }
        if j + 1 < nq {
            moves.push((i, j + 1));
        }
        if i + 1 < np && j + 1 < nq {
            moves.push((i + 1, j + 1));
        }
        moves.into_iter().any(|(a, b)| walk(a, b, np, nq, close, seen))
    }
    let mut seen = vec![vec![false; nq]; np];
    walk(0, 0, np, nq, &close, &mut seen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsequence_basics() {
        assert!(is_subsequence(&[1, 3], &[1, 2, 3]));
        assert!(!is_subsequence(&[3, 1], &[1, 2, 3]));
        assert!(is_subsequence(&[], &[]));
    }

    #[test]
    fn lcs_enumeration_known_values() {
        assert_eq!(lcs_by_enumeration(&[1, 2, 3], &[2, 1, 3]), 2);
        assert_eq!(lcs_by_enumeration(&[], &[1, 2]), 0);
        assert_eq!(lcs_by_enumeration(&[5, 5, 5], &[5, 5]), 2);
        assert_eq!(lcs_by_enumeration(&[1, 2, 3, 4], &[1, 2, 3, 4]), 4);
    }
}
