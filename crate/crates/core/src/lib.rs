//! `sizedcheck`: a batch type checker, totality checker and evaluator for a
//! small dependently typed language whose inductive and coinductive types
//! carry explicit size indices.

pub mod check;
pub mod conv;
pub mod diagnostic;
pub mod driver;
pub mod eval;
pub mod parser;
pub mod scope;
pub mod signature;
pub mod size;
pub mod syntax;
pub mod totality;
