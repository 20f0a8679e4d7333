//! Syntactic, Boolean and quantum circuits with a slice/compose calculus.

pub mod boolean;
pub mod decomposition;
pub mod ir;
pub mod order;
pub mod quantum;
pub mod random;
pub mod text;
