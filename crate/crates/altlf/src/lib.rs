//! Monitor compiler for finite-trace temporal properties over linear
//! arithmetic constraints with lookahead, producing anticipatory verdicts.

pub mod arith;
pub mod automata;
pub mod cli;
pub mod dot;
pub mod error;
pub mod formula;
pub mod monitor;
pub mod oracle;
pub mod summary;
pub mod trace;
pub mod verdict;

pub use error::{Error, Result};
pub use verdict::Verdict;
