//! Stability certification for polynomial ODE systems.
//!
//! The crate is organized in four layers:
//!
//! - [`symbolic`]: exact multivariate polynomial arithmetic over the
//!   rationals, Lie derivatives, semialgebraic formulas with syntactic
//!   closure/boundary, ODE systems and target sets.
//! - [`certify`]: sound three-valued discharge of polynomial sign
//!   conditions over boxes, annuli, punctured balls and the whole space,
//!   via exact quadratic-form factorization and rational interval
//!   branch-and-bound, plus sampling-based falsification.
//! - [`rules`]: Lyapunov-function proof rules for stability, asymptotic,
//!   exponential, global, set and general (two-set) stability. Each rule
//!   assembles the arithmetic premises, runs them through `certify`, and
//!   extracts quantitative witnesses.
//! - [`sim`]: floating-point trajectory integration and empirical ε-δ
//!   stability, attractivity, exponential-envelope and energy checks.
//!   Everything here is evidence, never a certificate.
//!
//! All certification-path arithmetic is exact; floating point appears
//! only in [`sim`].

pub mod certify;
pub mod rules;
pub mod sim;
pub mod symbolic;

pub use certify::{CheckResult, ProofEvidence, SignCondition, UnknownReason};
pub use rules::{CertificationReport, LyapunovCandidate, StabilityProperty, Verdict};
pub use symbolic::{OdeSystem, Polynomial, Rat, SemiAlgebraicFormula, TargetSet, VarSet};
