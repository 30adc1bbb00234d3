//! Lyapunov-function proof rules.
//!
//! Each `vc_*` function assembles the arithmetic premises of one derived
//! stability rule, discharges them through [`crate::certify`], and
//! returns a [`CertificationReport`] with per-premise outcomes and
//! extracted quantitative witnesses. `Certified` requires every premise
//! `Proved`; a `Disproved` premise makes the report `Refuted` with the
//! exact witness; anything else is `Inconclusive`.
//!
//! Premise checks within one report are independent of each other and
//! the verdict is a deterministic fold over them (Disproved dominates,
//! then Unknown, then Proved), so reports do not depend on scheduling.

mod general;
mod origin;
mod set;

pub use general::{vc_eps_stability, vc_general_lyap, GeneralPost};
pub use origin::{
    vc_exp_lyap, vc_exp_lyap_global, vc_lyap, vc_strict_lyap, vc_strict_lyap_global,
};
pub use set::{vc_set_lyap, vc_set_lyap_general};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::certify::{
    check_sign_bb, CheckResult, ProofEvidence, ProofMethod, Region, SignCondition, UnknownReason,
};
use crate::certify::bb::{prove_sign_on, BbConfig, BbOutcome, RegionFilter};
use crate::certify::interval::BoxRegion;
use crate::symbolic::rat::{self, Rat};
use crate::symbolic::{
    EquilibriumStatus, OdeSystem, Polynomial, Rel, SemiAlgebraicFormula, SymbolicError, TargetSet,
};

/// The stability specification a report certifies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityProperty {
    Stab,
    Attr,
    AStab,
    ExpStab,
    GlobalAStab,
    GlobalExpStab,
    SetStab(TargetSet),
    SetAStab(TargetSet),
    GlobalSetAStab(TargetSet),
    GeneralStab {
        pre: TargetSet,
        /// Radius of the ball-around-origin postcondition; `None` means
        /// the postcondition is the origin itself.
        post_radius: Option<Rat>,
    },
    EpsStab(Rat),
}

impl StabilityProperty {
    pub fn name(&self) -> String {
        match self {
            StabilityProperty::Stab => "stability".into(),
            StabilityProperty::Attr => "attractivity".into(),
            StabilityProperty::AStab => "asymptotic stability".into(),
            StabilityProperty::ExpStab => "exponential stability".into(),
            StabilityProperty::GlobalAStab => "global asymptotic stability".into(),
            StabilityProperty::GlobalExpStab => "global exponential stability".into(),
            StabilityProperty::SetStab(_) => "set stability".into(),
            StabilityProperty::SetAStab(_) => "set asymptotic stability".into(),
            StabilityProperty::GlobalSetAStab(_) => "global set asymptotic stability".into(),
            StabilityProperty::GeneralStab { .. } => "general stability".into(),
            StabilityProperty::EpsStab(e) => format!("ε-stability (ε = {})", rat::display(e)),
        }
    }
}

/// Lyapunov candidate data: the function plus optional rate constants,
/// ball radius and level.
#[derive(Debug, Clone)]
pub struct LyapunovCandidate {
    pub v: Polynomial,
    pub k1: Option<Rat>,
    pub k2: Option<Rat>,
    pub k3: Option<Rat>,
    pub gamma: Option<Rat>,
    pub level: Option<Rat>,
}

impl LyapunovCandidate {
    pub fn new(v: Polynomial) -> Self {
        LyapunovCandidate {
            v,
            k1: None,
            k2: None,
            k3: None,
            gamma: None,
            level: None,
        }
    }
}

/// One discharged premise.
#[derive(Debug, Clone)]
pub struct PremiseReport {
    pub name: String,
    pub result: CheckResult,
    /// Self-contained re-verification payload: a `Disproved` witness
    /// must violate `poly rel 0` under exact evaluation. Premises whose
    /// refutation is not a point fact (e.g. a ray direction) carry none.
    pub check: Option<(Polynomial, Rel)>,
}

impl PremiseReport {
    pub fn new(name: impl Into<String>, result: CheckResult) -> Self {
        PremiseReport {
            name: name.into(),
            result,
            check: None,
        }
    }

    pub fn with_check(
        name: impl Into<String>,
        result: CheckResult,
        poly: Polynomial,
        rel: Rel,
    ) -> Self {
        PremiseReport {
            name: name.into(),
            result,
            check: Some((poly, rel)),
        }
    }
}

/// Quantitative witnesses extracted from a certified rule, when the
/// rule's derivation constructs them: α = k₂/k₁, β = k₃, δ = (k₁/k₂)·γ
/// for the exponential rules; the ball radius γ, perturbation δ and
/// level k for the set/general rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witnesses {
    pub gamma: Option<Rat>,
    pub delta: Option<Rat>,
    pub level: Option<Rat>,
    pub alpha: Option<Rat>,
    pub beta: Option<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted { premise: String, witness: Vec<Rat> },
    Inconclusive,
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }
}

#[derive(Debug, Clone)]
pub struct CertificationReport {
    pub property: StabilityProperty,
    pub rule: &'static str,
    pub premises: Vec<PremiseReport>,
    pub witnesses: Witnesses,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl CertificationReport {
    fn assemble(
        property: StabilityProperty,
        rule: &'static str,
        premises: Vec<PremiseReport>,
        witnesses: Witnesses,
        notes: Vec<String>,
    ) -> Self {
        let verdict = fold_verdict(&premises);
        let witnesses = match verdict {
            Verdict::Certified => witnesses,
            _ => Witnesses::default(),
        };
        CertificationReport {
            property,
            rule,
            premises,
            witnesses,
            verdict,
            notes,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict.is_certified()
    }
}

/// Deterministic fold: first Disproved premise refutes; otherwise any
/// Unknown makes the report inconclusive; all Proved certifies.
fn fold_verdict(premises: &[PremiseReport]) -> Verdict {
    for p in premises {
        if let CheckResult::Disproved { witness, .. } = &p.result {
            return Verdict::Refuted {
                premise: p.name.clone(),
                witness: witness.clone(),
            };
        }
    }
    if premises.iter().all(|p| p.result.is_proved()) && !premises.is_empty() {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, Error)]
pub enum RuleError {
    /// Refusal to run a compactness-requiring rule on a non-compact
    /// target: dropping boundedness is unsound (the cex1 corpus entry
    /// is a witness system). Use the general set rule instead.
    #[error("non-compact target set: {0}")]
    NonCompactTarget(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// Schedules making the rules' existential quantifiers reproducible.
#[derive(Debug, Clone)]
pub struct Schedules {
    /// Candidate ball radii, largest first (default 1, 1/2, …, 2⁻¹⁰).
    pub gamma: Vec<Rat>,
    /// Candidate ε entries for the general rules (default = gamma).
    pub eps: Vec<Rat>,
    /// Branch-and-bound box budget.
    pub budget: u64,
    /// Seed for any deterministic sampling.
    pub seed: u64,
}

impl Default for Schedules {
    fn default() -> Self {
        let geometric: Vec<Rat> = (0..=10).map(|k| rat::frac(1, 1 << k)).collect();
        Schedules {
            gamma: geometric.clone(),
            eps: geometric,
            budget: 100_000,
            seed: 0,
        }
    }
}

impl Schedules {
    pub fn with_budget(budget: u64) -> Self {
        Schedules {
            budget,
            ..Default::default()
        }
    }
}

/// Rules operate on parameter-free systems; parameter grids are
/// instantiated by the caller (one report per grid point).
pub(crate) fn ensure_param_free(ode: &OdeSystem) -> Result<(), RuleError> {
    if ode.vars().n_params() > 0 {
        return Err(RuleError::InvalidInput(
            "instantiate parameters before running a rule".into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_candidate_vars(ode: &OdeSystem, v: &Polynomial) -> Result<(), RuleError> {
    v.check_vars(ode.vars()).map_err(RuleError::from)
}

/// Cartesian product of per-parameter value axes, in declaration order.
pub fn cartesian_grid(axes: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for val in axis {
                let mut row = prefix.clone();
                row.push(val.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Re-verification payload for a punctured-positivity premise: the
/// origin-value disproof violates `poly = 0`, an interior witness
/// violates the sign relation itself.
pub(crate) fn punctured_payload(
    poly: &Polynomial,
    default_rel: Rel,
    res: &CheckResult,
) -> (Polynomial, Rel) {
    if let CheckResult::Disproved { violated, .. } = res {
        if violated.contains("(0)") {
            return (poly.clone(), Rel::Eq);
        }
    }
    (poly.clone(), default_rel)
}

/// Exact equilibrium premise `f(0) = 0`.
pub(crate) fn equilibrium_premise(ode: &OdeSystem) -> PremiseReport {
    let origin = vec![rat::zero(); ode.n_state()];
    match ode.equilibrium_check(&origin) {
        Ok(EquilibriumStatus::Equilibrium) => PremiseReport::new(
            "f(0) = 0",
            CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero)),
        ),
        Ok(EquilibriumStatus::NotEquilibrium { component, value }) => PremiseReport::with_check(
            "f(0) = 0",
            CheckResult::Disproved {
                witness: origin,
                violated: format!(
                    "f(0) = 0 (component {} evaluates to {})",
                    component,
                    rat::display(&value)
                ),
            },
            ode.rhs()[component].clone(),
            Rel::Eq,
        ),
        Ok(EquilibriumStatus::Residual(_)) => PremiseReport::new(
            "f(0) = 0",
            CheckResult::unsupported("symbolic parameters in equilibrium check"),
        ),
        Err(e) => PremiseReport::new("f(0) = 0", CheckResult::unsupported(e.to_string())),
    }
}

/// Exact premise `v(0) = 0`.
pub(crate) fn origin_value_premise(v: &Polynomial) -> PremiseReport {
    let origin = vec![rat::zero(); v.nvars()];
    let result = if v.eval(&origin).is_zero() {
        CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
    } else {
        CheckResult::Disproved {
            witness: origin,
            violated: "v(0) = 0".to_string(),
        }
    };
    PremiseReport::with_check("v(0) = 0", result, v.clone(), Rel::Eq)
}

/// `p rel 0` on the closed ball `‖x‖² ≤ γ²`, via the exact quadratic
/// path when `p` is a form (ball and global coincide by scaling) and
/// interval branch-and-bound on the enclosing box otherwise.
pub(crate) fn check_on_ball(
    p: &Polynomial,
    rel: Rel,
    gamma: &Rat,
    budget: u64,
    label: &str,
) -> CheckResult {
    if p.is_zero() {
        return match rel {
            Rel::Ge | Rel::Le | Rel::Eq => {
                CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
            }
            _ => CheckResult::Disproved {
                witness: vec![rat::zero(); p.nvars()],
                violated: label.to_string(),
            },
        };
    }
    if p.is_quadratic_form() {
        let mode = match rel {
            Rel::Ge => Some(crate::certify::DefinitenessMode::Psd),
            Rel::Gt => Some(crate::certify::DefinitenessMode::Pd),
            Rel::Le => Some(crate::certify::DefinitenessMode::Nsd),
            Rel::Lt => Some(crate::certify::DefinitenessMode::Nd),
            _ => None,
        };
        if let Some(mode) = mode {
            return match crate::certify::check_quadratic_form(p, mode) {
                CheckResult::Disproved { witness, .. } => {
                    // A form's sign is scale-invariant; pull the witness
                    // inside the ball.
                    let gamma2 = gamma * gamma;
                    let w = scale_into_ball(witness, &gamma2);
                    CheckResult::Disproved {
                        witness: w,
                        violated: label.to_string(),
                    }
                }
                other => other,
            };
        }
    }
    let outer = BoxRegion::centered_cube(p.nvars(), gamma);
    let cond = SignCondition::new(p.clone(), rel, Region::Box(outer));
    match check_sign_bb(&cond, budget) {
        CheckResult::Disproved { witness, .. } => CheckResult::Disproved {
            witness,
            violated: label.to_string(),
        },
        other => other,
    }
}

pub(crate) fn scale_into_ball(mut w: Vec<Rat>, gamma2: &Rat) -> Vec<Rat> {
    loop {
        let norm2: Rat = w.iter().map(|c| rat::pow(c, 2)).sum();
        if norm2 <= *gamma2 {
            return w;
        }
        for c in w.iter_mut() {
            *c /= rat::int(2);
        }
    }
}

/// Necessary-condition invariance check.
///
/// Coordinate subspaces are decided by exact substitution: zeroing the
/// subspace variables must annihilate each zeroed component of the
/// vector field. Sublevel sets `p ≤ 0` use the sufficient
/// differential-invariant condition `Lie(p) ≤ 0` on the level surface,
/// checked by branch-and-bound over a shell of leaves meeting `p = 0`.
pub fn invariance_check(ode: &OdeSystem, target: &TargetSet) -> CheckResult {
    match target {
        TargetSet::Origin => match equilibrium_premise(ode).result {
            r @ CheckResult::Proved(_) => r,
            CheckResult::Disproved { witness, .. } => CheckResult::Disproved {
                witness,
                violated: "invariance of the origin (f(0) = 0)".to_string(),
            },
            u => u,
        },
        TargetSet::CoordinateSubspace(zeroed) => {
            let n = ode.vars().len();
            let subs: Vec<Option<Rat>> = (0..n)
                .map(|i| {
                    if zeroed.contains(&i) {
                        Some(rat::zero())
                    } else {
                        None
                    }
                })
                .collect();
            for &i in zeroed {
                let restricted = ode.rhs()[i].substitute_partial(&subs);
                if !restricted.is_zero() {
                    let witness = nonzero_point_on_subspace(&restricted, zeroed, n);
                    return CheckResult::Disproved {
                        witness,
                        violated: format!(
                            "invariance of the subspace (component {} does not vanish on it)",
                            ode.vars().name(i)
                        ),
                    };
                }
            }
            CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
        }
        TargetSet::Formula { formula, .. } => invariance_check_formula(ode, formula),
    }
}

fn invariance_check_formula(ode: &OdeSystem, formula: &SemiAlgebraicFormula) -> CheckResult {
    use SemiAlgebraicFormula as F;
    match formula {
        F::True => CheckResult::Proved(ProofEvidence::method(ProofMethod::Vacuous)),
        F::Atom(a) if a.rel == Rel::Le => {
            // Sublevel set p ≤ 0: Lie(p) ≤ 0 on the level surface p = 0
            // inside a box bounding the surface.
            let lie = match ode.lie_derivative(&a.poly) {
                Ok(l) => l,
                Err(e) => return CheckResult::unsupported(e.to_string()),
            };
            if lie.is_zero() {
                return CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero));
            }
            let radius = match sublevel_bounding_radius(&a.poly) {
                Some(r) => r,
                None => return CheckResult::unsupported("unbounded sublevel set"),
            };
            let outer = BoxRegion::centered_cube(ode.vars().len(), &radius);
            let filter = RegionFilter::LevelSet {
                poly: a.poly.clone(),
                level: rat::zero(),
            };
            match prove_sign_on(
                &lie,
                Rel::Le,
                &outer,
                &filter,
                &BbConfig::default(),
            ) {
                BbOutcome::Proved { margin, boxes } => {
                    let mut ev = ProofEvidence::method(ProofMethod::IntervalBranchBound);
                    ev.margin = margin;
                    ev.boxes = boxes;
                    CheckResult::Proved(ev)
                }
                BbOutcome::Disproved { witness } => CheckResult::Disproved {
                    witness,
                    violated: "Lie(p) ≤ 0 on the level surface".to_string(),
                },
                BbOutcome::BudgetExhausted { .. } => {
                    CheckResult::unknown(UnknownReason::BudgetExhausted)
                }
            }
        }
        _ => CheckResult::unsupported(
            "invariance is decided for coordinate subspaces and sublevel sets p ≤ 0",
        ),
    }
}

/// Radius `R` with `{p ≤ 0} ⊆ ball(R)`, from top-form dominance.
pub(crate) fn sublevel_bounding_radius(p: &Polynomial) -> Option<Rat> {
    let (dtop, ptop) = p.top_form()?;
    if dtop == 0 {
        return None;
    }
    let gram = crate::certify::quadform::gram_matrix(&ptop);
    let low = if let Some(g) = gram {
        let (lo, _) = crate::certify::quadform::sphere_value_bounds(&g, 40);
        if lo > rat::zero() {
            Some(lo)
        } else {
            None
        }
    } else {
        None
    }?;
    let rest: Rat = p
        .homogeneous_components()
        .into_iter()
        .filter(|(d, _)| *d < dtop)
        .map(|(_, q)| q.coeff_l1())
        .sum();
    // p(x) ≥ low·‖x‖^d − rest·max(1, ‖x‖)^{d-1} > 0 for ‖x‖ > rest/low + 1.
    Some(&(&rest / &low) + &rat::int(2))
}

/// Exact rational point on the subspace where the restricted polynomial
/// does not vanish (it exists since the polynomial is nonzero).
fn nonzero_point_on_subspace(restricted: &Polynomial, zeroed: &[usize], n: usize) -> Vec<Rat> {
    let free: Vec<usize> = (0..n).filter(|i| !zeroed.contains(i)).collect();
    let candidates: Vec<Rat> = vec![
        rat::zero(),
        rat::one(),
        -rat::one(),
        rat::frac(1, 2),
        rat::int(2),
        rat::frac(-1, 2),
    ];
    // Small deterministic grid first, then seeded random points.
    for val in &candidates {
        let mut pt = vec![rat::zero(); n];
        for &i in &free {
            pt[i] = val.clone();
        }
        if !restricted.eval(&pt).is_zero() {
            return pt;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1ab);
    for _ in 0..1000 {
        let mut pt = vec![rat::zero(); n];
        for &i in &free {
            pt[i] = rat::frac(rng.gen_range(-64i64..=64), rng.gen_range(1i64..=16));
        }
        if !restricted.eval(&pt).is_zero() {
            return pt;
        }
    }
    vec![rat::zero(); n]
}

/// Rewrites a formula target to its syntactic closure before rule
/// dispatch (stability of a set and of its closure coincide). Returns
/// the normalized target and a note when a rewrite happened.
pub fn closure_normalize(target: &TargetSet) -> Result<(TargetSet, Option<String>), RuleError> {
    match target {
        TargetSet::Formula { formula, compact } => {
            if formula.contains_ne() {
                return Err(RuleError::InvalidInput(
                    "target formulas with != atoms are not supported by closure normalization"
                        .into(),
                ));
            }
            let closed = formula.syntactic_closure()?;
            if closed == *formula {
                Ok((target.clone(), None))
            } else {
                Ok((
                    TargetSet::Formula {
                        formula: closed,
                        compact: *compact,
                    },
                    Some("target replaced by its syntactic closure".to_string()),
                ))
            }
        }
        other => Ok((other.clone(), None)),
    }
}
