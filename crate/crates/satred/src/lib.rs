//! Compile Boolean formulas into satisfiability-equivalent instances of
//! longest-common-subsequence, regex matching, and discrete Fréchet distance,
//! and verify the compilations end to end against reference solvers.
//!
//! The pipeline: a formula over `n` inputs is split over the two halves of its
//! variables into lists of gate-output vectors plus a small *pair formula*
//! ([`splitlist`]); deciding whether some vector pair satisfies the pair
//! formula is then either solved directly ([`pairsolve`]) or compiled into a
//! string or curve instance ([`lcsred`], [`regexred`], [`frechetred`]) whose
//! reference solver answers the original satisfiability question.
//! [`harness`] wires the routes together behind a CLI and a randomized
//! differential verifier.

pub mod formula;
pub mod oracles;

pub mod splitlist;

pub mod pairsolve;

pub mod lcsred;

pub mod regexred;

pub mod frechetred;

pub mod harness;

/// The narrative guide, one module per chapter of `book/`. Each chapter is
/// included verbatim so its examples compile and run under
/// `cargo test --doc`; edit the book sources, not these stubs.
pub mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod overview {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    pub mod formulas {}
    #[doc = include_str!("../../../book/src/split-and-list.md")]
    pub mod split_and_list {}
    #[doc = include_str!("../../../book/src/pair-solvers.md")]
    pub mod pair_solvers {}
    #[doc = include_str!("../../../book/src/lcs-reduction.md")]
    pub mod lcs_reduction {}
    #[doc = include_str!("../../../book/src/regex-reduction.md")]
    pub mod regex_reduction {}
    #[doc = include_str!("../../../book/src/frechet-reduction.md")]
    pub mod frechet_reduction {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
