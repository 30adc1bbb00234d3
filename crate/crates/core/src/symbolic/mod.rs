//! Exact symbolic layer: rationals, polynomials, formulas, ODE systems.
//!
//! Nothing in this module rounds. All values are immutable after
//! construction and every operation is a pure function, so the whole
//! layer is safe to share across threads.

mod formula;
mod ode;
mod poly;
pub mod rat;
mod vars;

pub use formula::{square_free_status, Atom, Rel, SemiAlgebraicFormula, SquareFree};
pub use ode::{
    neighborhood, EquilibriumStatus, NeighborhoodError, OdeSystem, Radius, TargetSet, Translated,
};
pub use poly::Polynomial;
pub use rat::Rat;
pub use vars::VarSet;

use thiserror::Error;

/// Errors raised by symbolic-layer operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable count mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial is not supported here: {0}")]
    UnsupportedShape(String),
}
