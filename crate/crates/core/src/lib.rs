//! Equivalent transformation of linear marking constraints on ordinary Petri
//! nets with uncontrollable transitions into logic expressions that describe
//! their admissible-marking sets, with a brute-force oracle for checking the
//! results on bounded instances.

pub mod cli;
pub mod constraint;
pub mod driver;
pub mod error;
pub mod expression;
pub mod marking_set;
pub mod net;
pub mod netfile;
pub mod orbit;
pub mod render;

pub use error::{Error, Result};
