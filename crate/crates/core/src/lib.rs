//! Finite-scale tools around thin and restricted versions of Hindman's
//! theorem: exact exponent-set arithmetic, staged enumeration traces, the
//! prime-gap coloring and its decoder, an algorithmic local-lemma
//! two-coloring, largeness splitting with the layered hard coloring built
//! from it, and brute-force solvers that act as independent oracles.

pub mod binum;
pub mod gap;
pub mod largeness;
pub mod lll;
pub mod oracle;
pub mod search;
pub mod seed;
pub mod workbench;
