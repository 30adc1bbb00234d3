//! Sound three-valued discharge of polynomial sign conditions.
//!
//! `Proved` means the relation holds on the whole region, certified by
//! exact rational arithmetic (quadratic-form factorization, interval
//! branch-and-bound, or homogeneous dominance). `Disproved` always
//! carries a rational witness that violates the condition under exact
//! re-evaluation. Everything else is `Unknown` — there is no guessing
//! path anywhere in this module.

pub mod bb;
pub mod interval;
pub mod quadform;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symbolic::rat::{self, Rat};
use crate::symbolic::{Polynomial, Rel, SemiAlgebraicFormula};

use bb::{prove_sign_on, BbConfig, BbOutcome, RegionFilter};
use interval::BoxRegion;
use quadform::{gram_matrix, psd_analysis, sphere_value_bounds, PsdOutcome};

/// Region over which a sign condition is asserted.
#[derive(Debug, Clone)]
pub enum Region {
    /// A compact axis-aligned box.
    Box(BoxRegion),
    /// `r_min² ≤ ‖x‖² ≤ r_max²` centered at the origin.
    Annulus { r2_min: Rat, r2_max: Rat },
    /// `0 < ‖x‖² ≤ γ²`; never handled by naive subdivision.
    PuncturedBall { gamma2: Rat },
    /// Box minus a semialgebraic set.
    SetMinus {
        outer: BoxRegion,
        subtracted: SemiAlgebraicFormula,
    },
    /// All of ℝⁿ.
    Global,
}

/// A universally quantified polynomial sign condition over a region.
#[derive(Debug, Clone)]
pub struct SignCondition {
    pub poly: Polynomial,
    pub rel: Rel,
    pub region: Region,
}

impl SignCondition {
    pub fn new(poly: Polynomial, rel: Rel, region: Region) -> Self {
        SignCondition { poly, rel, region }
    }

    /// Human-readable description of the violated condition.
    pub fn describe(&self) -> String {
        format!("p {} 0", self.rel.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownReason {
    BudgetExhausted,
    UnsupportedShape(String),
}

impl std::fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnknownReason::BudgetExhausted => write!(f, "budget-exhausted"),
            UnknownReason::UnsupportedShape(s) => write!(f, "unsupported-shape: {s}"),
        }
    }
}

/// How a `Proved` outcome was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofMethod {
    SyntacticZero,
    QuadraticForm,
    IntervalBranchBound,
    HomogeneousDominance,
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofEvidence {
    pub method: ProofMethod,
    /// Positive rational margin for strict relations, when available.
    pub margin: Option<Rat>,
    /// Effective (possibly shrunk) squared ball radius for punctured-ball
    /// proofs.
    pub gamma2: Option<Rat>,
    /// Boxes explored by branch-and-bound.
    pub boxes: u64,
    pub notes: Vec<String>,
}

impl ProofEvidence {
    pub fn method(method: ProofMethod) -> Self {
        ProofEvidence {
            method,
            margin: None,
            gamma2: None,
            boxes: 0,
            notes: Vec::new(),
        }
    }
}

/// Three-valued certification outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Proved(ProofEvidence),
    /// The witness violates `violated` under exact rational evaluation.
    Disproved { witness: Vec<Rat>, violated: String },
    Unknown { reason: UnknownReason },
}

impl CheckResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, CheckResult::Proved(_))
    }

    pub fn is_disproved(&self) -> bool {
        matches!(self, CheckResult::Disproved { .. })
    }

    pub fn unknown(reason: UnknownReason) -> Self {
        CheckResult::Unknown { reason }
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        CheckResult::Unknown {
            reason: UnknownReason::UnsupportedShape(msg.into()),
        }
    }

    /// Merge for conjunctions of premises: Disproved dominates, then
    /// Unknown, then Proved. Associative and commutative, so the result
    /// is independent of premise scheduling.
    pub fn merge(self, other: CheckResult) -> CheckResult {
        use CheckResult::*;
        match (self, other) {
            (d @ Disproved { .. }, _) | (_, d @ Disproved { .. }) => d,
            (u @ Unknown { .. }, _) | (_, u @ Unknown { .. }) => u,
            (Proved(a), Proved(_)) => Proved(a),
        }
    }
}

/// Definiteness question for a quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefinitenessMode {
    Psd,
    Pd,
    Nsd,
    Nd,
}

/// Decides (semi)definiteness of a homogeneous quadratic form exactly.
/// Non-quadratic input yields `Unknown(unsupported-shape)`.
pub fn check_quadratic_form(q: &Polynomial, mode: DefinitenessMode) -> CheckResult {
    let (form, label) = match mode {
        DefinitenessMode::Psd => (q.clone(), "positive semidefiniteness"),
        DefinitenessMode::Pd => (q.clone(), "positive definiteness"),
        DefinitenessMode::Nsd => (-q, "negative semidefiniteness"),
        DefinitenessMode::Nd => (-q, "negative definiteness"),
    };
    let gram = match gram_matrix(&form) {
        Some(g) => g,
        None => {
            return CheckResult::unsupported("not a homogeneous quadratic form");
        }
    };
    let strict = matches!(mode, DefinitenessMode::Pd | DefinitenessMode::Nd);
    match psd_analysis(&gram) {
        PsdOutcome::PositiveDefinite => CheckResult::Proved(ProofEvidence::method(
            ProofMethod::QuadraticForm,
        )),
        PsdOutcome::SemidefiniteSingular { kernel_vector } => {
            if strict {
                CheckResult::Disproved {
                    witness: kernel_vector,
                    violated: label.to_string(),
                }
            } else {
                CheckResult::Proved(ProofEvidence::method(ProofMethod::QuadraticForm))
            }
        }
        PsdOutcome::NotPsd { witness } => CheckResult::Disproved {
            witness,
            violated: label.to_string(),
        },
    }
}

/// Certifies a sign condition by interval branch-and-bound with the
/// given subdivision budget. Punctured balls are refused here (the
/// dominance strategy is mandatory for them) and global regions are
/// routed to [`check_global`].
pub fn check_sign_bb(cond: &SignCondition, budget: u64) -> CheckResult {
    let cfg = BbConfig::with_budget(budget);
    let (outer, filter) = match &cond.region {
        Region::Box(b) => (b.clone(), RegionFilter::All),
        Region::Annulus { r2_min, r2_max } => {
            if *r2_min <= rat::zero() || r2_min >= r2_max {
                return CheckResult::unsupported("annulus needs 0 < r_min² < r_max²");
            }
            let r = rat_sqrt_upper(r2_max);
            (
                BoxRegion::centered_cube(cond.poly.nvars(), &r),
                RegionFilter::Shell {
                    vars: (0..cond.poly.nvars()).collect(),
                    r2_min: r2_min.clone(),
                    r2_max: r2_max.clone(),
                },
            )
        }
        Region::PuncturedBall { .. } => {
            return CheckResult::unsupported(
                "punctured balls are handled by the homogeneous-dominance strategy",
            );
        }
        Region::SetMinus { outer, subtracted } => (
            outer.clone(),
            RegionFilter::OutsideFormula {
                formula: subtracted.clone(),
            },
        ),
        Region::Global => return check_global(cond),
    };
    bb_to_check(prove_sign_on(&cond.poly, cond.rel, &outer, &filter, &cfg), cond)
}

fn bb_to_check(out: BbOutcome, cond: &SignCondition) -> CheckResult {
    match out {
        BbOutcome::Proved { margin, boxes } => {
            let mut ev = ProofEvidence::method(ProofMethod::IntervalBranchBound);
            ev.margin = margin;
            ev.boxes = boxes;
            CheckResult::Proved(ev)
        }
        BbOutcome::Disproved { witness } => CheckResult::Disproved {
            witness,
            violated: cond.describe(),
        },
        BbOutcome::BudgetExhausted { .. } => CheckResult::unknown(UnknownReason::BudgetExhausted),
    }
}

/// Result of a sphere positivity analysis for a homogeneous form.
enum SphereBound {
    /// `form ≥ bound · ‖x‖^deg` everywhere, with `bound > 0`.
    Positive(Rat),
    /// Exact direction with `form ≤ 0`.
    NotPositive(Vec<Rat>),
    Unknown,
}

/// Certified positive lower bound of a homogeneous form on the unit
/// sphere, or an exact non-positive direction.
fn sphere_form_bound(form: &Polynomial, budget: u64) -> SphereBound {
    let n = form.nvars();
    if form.is_zero() {
        let mut e1 = vec![rat::zero(); n];
        e1[0] = rat::one();
        return SphereBound::NotPositive(e1);
    }
    if form.is_quadratic_form() {
        let gram = gram_matrix(form).expect("quadratic form");
        match psd_analysis(&gram) {
            PsdOutcome::PositiveDefinite => {
                for iters in [40u32, 120] {
                    let (lo, _) = sphere_value_bounds(&gram, iters);
                    if lo > rat::zero() {
                        return SphereBound::Positive(lo);
                    }
                }
                return SphereBound::Unknown;
            }
            PsdOutcome::SemidefiniteSingular { kernel_vector } => {
                return SphereBound::NotPositive(kernel_vector)
            }
            PsdOutcome::NotPsd { witness } => return SphereBound::NotPositive(witness),
        }
    }
    // General homogeneous form: branch and bound on a shell enclosing
    // the unit sphere; homogeneity transfers the bound to every radius.
    let outer = BoxRegion::centered_cube(n, &rat::one());
    let filter = RegionFilter::Shell {
        vars: (0..n).collect(),
        r2_min: rat::frac(1, 4),
        r2_max: rat::one(),
    };
    match prove_sign_on(form, Rel::Gt, &outer, &filter, &BbConfig::with_budget(budget)) {
        BbOutcome::Proved { margin, .. } => match margin {
            Some(m) if m > rat::zero() => SphereBound::Positive(m),
            _ => SphereBound::Unknown,
        },
        BbOutcome::Disproved { witness } => SphereBound::NotPositive(witness),
        BbOutcome::BudgetExhausted { .. } => SphereBound::Unknown,
    }
}

/// Scales a nonzero direction by powers of 1/2 until the point lies in
/// the ball `‖x‖² ≤ gamma2` (if given) and `pred` holds exactly.
fn shrink_until(
    v: &Polynomial,
    dir: &[Rat],
    gamma2: Option<&Rat>,
    pred: impl Fn(&Rat) -> bool,
) -> Option<Vec<Rat>> {
    let mut pt: Vec<Rat> = dir.to_vec();
    if pt.iter().all(Zero::is_zero) {
        return None;
    }
    for _ in 0..300 {
        let norm2: Rat = pt.iter().map(|c| rat::pow(c, 2)).sum();
        let inside = gamma2.map(|g2| norm2 <= *g2).unwrap_or(true);
        if inside && pred(&v.eval(&pt)) {
            return Some(pt);
        }
        for c in pt.iter_mut() {
            *c /= rat::int(2);
        }
    }
    None
}

/// Doubles a nonzero direction until `pred` holds exactly (far-field
/// counterexamples).
fn grow_until(v: &Polynomial, dir: &[Rat], pred: impl Fn(&Rat) -> bool) -> Option<Vec<Rat>> {
    let mut pt: Vec<Rat> = dir.to_vec();
    if pt.iter().all(Zero::is_zero) {
        return None;
    }
    for _ in 0..200 {
        if pred(&v.eval(&pt)) {
            return Some(pt);
        }
        for c in pt.iter_mut() {
            *c *= rat::int(2);
        }
    }
    None
}

/// Two-tier certificate for `v > 0` on the punctured ball
/// `0 < ‖x‖² ≤ gamma2`.
///
/// The origin value must vanish: `v(0) ≠ 0` is reported as `Disproved`
/// with the origin as witness, since dropping that premise is exactly
/// the unsoundness exercised by the regression corpus.
///
/// Tier 1 decides positive definiteness exactly when `v` is a quadratic
/// form, which certifies the premise for every radius. Tier 2 proves the
/// lowest-degree homogeneous part positive on the unit sphere and shrinks
/// the radius until it dominates the higher-order remainder; the shrunk
/// γ² is recorded in the evidence.
pub fn check_punctured_positivity(v: &Polynomial, gamma2: &Rat) -> CheckResult {
    let n = v.nvars();
    let origin = vec![rat::zero(); n];
    let v0 = v.eval(&origin);
    if !v0.is_zero() {
        return CheckResult::Disproved {
            witness: origin,
            violated: "v(0) = 0".to_string(),
        };
    }
    if v.is_zero() {
        let mut e1 = vec![rat::zero(); n];
        e1[0] = rat::one();
        let w = shrink_until(v, &e1, Some(gamma2), |val| *val <= rat::zero())
            .expect("zero polynomial violates strict positivity everywhere");
        return CheckResult::Disproved {
            witness: w,
            violated: "v > 0 on the punctured ball".to_string(),
        };
    }
    punctured_positive_ball(v, gamma2, 100_000)
}

fn punctured_positive_ball(v: &Polynomial, gamma2: &Rat, budget: u64) -> CheckResult {
    let (d0, p0) = v.lowest_form().expect("nonzero polynomial");
    match sphere_form_bound(&p0, budget) {
        SphereBound::Positive(low) => {
            let rest_l1: Rat = v
                .homogeneous_components()
                .into_iter()
                .filter(|(d, _)| *d > d0)
                .map(|(_, p)| p.coeff_l1())
                .sum();
            let mut ev = ProofEvidence::method(if v.is_homogeneous(d0) {
                if d0 == 2 {
                    ProofMethod::QuadraticForm
                } else {
                    ProofMethod::HomogeneousDominance
                }
            } else {
                ProofMethod::HomogeneousDominance
            });
            ev.margin = Some(low.clone());
            if rest_l1.is_zero() {
                ev.gamma2 = Some(gamma2.clone());
                return CheckResult::Proved(ev);
            }
            // v ≥ ‖x‖^d0 (L − C‖x‖) > 0 for ‖x‖ ≤ ρ < L/C, ρ ≤ 1.
            let rho = &low / &(&low + &rest_l1);
            let rho2 = &rho * &rho;
            let g2 = if rho2 < *gamma2 {
                ev.notes
                    .push(format!("ball radius shrunk: γ² = {}", rat::display(&rho2)));
                rho2
            } else {
                gamma2.clone()
            };
            ev.gamma2 = Some(g2);
            CheckResult::Proved(ev)
        }
        SphereBound::NotPositive(dir) => {
            let val = p0.eval(&dir);
            if val < rat::zero() {
                if let Some(w) = shrink_until(v, &dir, Some(gamma2), |x| *x <= rat::zero()) {
                    return CheckResult::Disproved {
                        witness: w,
                        violated: "v > 0 on the punctured ball".to_string(),
                    };
                }
            } else if v.is_homogeneous(d0) {
                // Homogeneous with an exact zero direction: scaling the
                // direction into the ball keeps v = 0, violating > 0.
                if let Some(w) = shrink_until(v, &dir, Some(gamma2), |x| *x <= rat::zero()) {
                    return CheckResult::Disproved {
                        witness: w,
                        violated: "v > 0 on the punctured ball".to_string(),
                    };
                }
            }
            CheckResult::unknown(UnknownReason::BudgetExhausted)
        }
        SphereBound::Unknown => CheckResult::unknown(UnknownReason::BudgetExhausted),
    }
}

/// Strict positivity of `p` on all of `ℝⁿ ∖ {0}`: lowest-form dominance
/// near the origin, top-form dominance in the far field, and compact
/// interval branch-and-bound on the remaining shell.
pub fn check_punctured_global(p: &Polynomial, budget: u64) -> CheckResult {
    let n = p.nvars();
    if p.is_zero() {
        let mut e1 = vec![rat::zero(); n];
        e1[0] = rat::one();
        return CheckResult::Disproved {
            witness: e1,
            violated: "v > 0 off the origin".to_string(),
        };
    }
    if let Some(w) = falsify_global(p, Rel::Gt, true, 512, 0x5ab0) {
        return CheckResult::Disproved {
            witness: w,
            violated: "v > 0 off the origin".to_string(),
        };
    }
    if p.is_quadratic_form() {
        return check_quadratic_form(p, DefinitenessMode::Pd);
    }
    let comps = p.homogeneous_components();
    if comps.len() == 1 {
        let (_, form) = comps.into_iter().next().unwrap();
        return match sphere_form_bound(&form, budget) {
            SphereBound::Positive(m) => {
                let mut ev = ProofEvidence::method(ProofMethod::HomogeneousDominance);
                ev.margin = Some(m);
                CheckResult::Proved(ev)
            }
            SphereBound::NotPositive(w) => CheckResult::Disproved {
                witness: w,
                violated: "v > 0 off the origin".to_string(),
            },
            SphereBound::Unknown => CheckResult::unknown(UnknownReason::BudgetExhausted),
        };
    }
    three_zone(p, Rel::Gt, budget)
}

/// Global check split at the origin and at a computed far-field radius.
fn three_zone(p: &Polynomial, rel: Rel, budget: u64) -> CheckResult {
    debug_assert!(matches!(rel, Rel::Gt | Rel::Ge));
    let n = p.nvars();
    let comps = p.homogeneous_components();
    let (d0, p0) = comps.iter().next().map(|(d, q)| (*d, q.clone())).unwrap();
    let (dtop, ptop) = comps
        .iter()
        .next_back()
        .map(|(d, q)| (*d, q.clone()))
        .unwrap();

    // Near zone: lowest form dominates for ‖x‖ ≤ ρ.
    let near_low = if d0 == 0 {
        let c = p0.as_constant().expect("degree-zero form");
        if c <= rat::zero() {
            return CheckResult::Disproved {
                witness: vec![rat::zero(); n],
                violated: "positivity at the origin".to_string(),
            };
        }
        Some(c)
    } else {
        match sphere_form_bound(&p0, budget) {
            SphereBound::Positive(m) => Some(m),
            SphereBound::NotPositive(dir) => {
                if p0.eval(&dir) < rat::zero() {
                    if let Some(w) = shrink_until(p, &dir, None, |x| !rel.holds(x)) {
                        return CheckResult::Disproved {
                            witness: w,
                            violated: "sign condition near the origin".to_string(),
                        };
                    }
                }
                None
            }
            SphereBound::Unknown => None,
        }
    };
    let low = match near_low {
        Some(l) => l,
        None => return CheckResult::unknown(UnknownReason::BudgetExhausted),
    };
    let mid_l1: Rat = comps
        .iter()
        .filter(|(d, _)| **d > d0)
        .map(|(_, q)| q.coeff_l1())
        .sum();
    let rho = if mid_l1.is_zero() {
        rat::one()
    } else {
        &low / &(&low + &mid_l1)
    };

    // Far zone: top form dominates for ‖x‖ ≥ r_far.
    let top_bound = match sphere_form_bound(&ptop, budget) {
        SphereBound::Positive(m) => m,
        SphereBound::NotPositive(dir) => {
            if ptop.eval(&dir) < rat::zero() {
                if let Some(w) = grow_until(p, &dir, |x| !rel.holds(x)) {
                    return CheckResult::Disproved {
                        witness: w,
                        violated: "sign condition in the far field".to_string(),
                    };
                }
            }
            return CheckResult::unknown(UnknownReason::BudgetExhausted);
        }
        SphereBound::Unknown => return CheckResult::unknown(UnknownReason::BudgetExhausted),
    };
    let low_l1: Rat = comps
        .iter()
        .filter(|(d, _)| **d < dtop)
        .map(|(_, q)| q.coeff_l1())
        .sum();
    let r_far = &(&low_l1 / &top_bound) + &rat::one();

    // Middle zone: compact shell, interval branch-and-bound.
    let rho2 = &rho * &rho;
    let rfar2 = &r_far * &r_far;
    if rho2 < rfar2 {
        let outer = BoxRegion::centered_cube(n, &r_far);
        let filter = RegionFilter::Shell {
            vars: (0..n).collect(),
            r2_min: rho2,
            r2_max: rfar2,
        };
        match prove_sign_on(p, rel, &outer, &filter, &BbConfig::with_budget(budget)) {
            BbOutcome::Proved { .. } => {}
            BbOutcome::Disproved { witness } => {
                return CheckResult::Disproved {
                    witness,
                    violated: "sign condition on the middle shell".to_string(),
                }
            }
            BbOutcome::BudgetExhausted { .. } => {
                return CheckResult::unknown(UnknownReason::BudgetExhausted)
            }
        }
    }
    let mut ev = ProofEvidence::method(ProofMethod::HomogeneousDominance);
    ev.margin = Some(low);
    ev.notes.push(format!(
        "zones: dominance below ρ = {}, shell check up to R = {}, top-form dominance beyond",
        rat::display(&rho),
        rat::display(&r_far)
    ));
    CheckResult::Proved(ev)
}

/// Certifies a condition over all of ℝⁿ. Quadratic differences go
/// through the exact definiteness test; otherwise the top homogeneous
/// form is certified on the sphere and lower forms are dominated.
pub fn check_global(cond: &SignCondition) -> CheckResult {
    let (g, rel) = match cond.rel {
        Rel::Ge => (cond.poly.clone(), Rel::Ge),
        Rel::Gt => (cond.poly.clone(), Rel::Gt),
        Rel::Le => (-&cond.poly, Rel::Ge),
        Rel::Lt => (-&cond.poly, Rel::Gt),
        Rel::Eq => {
            return if cond.poly.is_zero() {
                CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
            } else {
                match falsify_global(&cond.poly, Rel::Eq, false, 256, 0x5ab1) {
                    Some(w) => CheckResult::Disproved {
                        witness: w,
                        violated: cond.describe(),
                    },
                    None => CheckResult::unsupported("global equality"),
                }
            }
        }
        Rel::Ne => return CheckResult::unsupported("global disequality"),
    };
    let n = g.nvars();
    if g.is_zero() {
        return match rel {
            Rel::Ge => CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero)),
            _ => CheckResult::Disproved {
                witness: vec![rat::zero(); n],
                violated: cond.describe(),
            },
        };
    }
    if let Some(w) = falsify_global(&g, rel, false, 512, 0x5ab2) {
        return CheckResult::Disproved {
            witness: w,
            violated: cond.describe(),
        };
    }
    if g.is_quadratic_form() {
        let mode = if rel == Rel::Ge {
            DefinitenessMode::Psd
        } else {
            DefinitenessMode::Pd
        };
        return check_quadratic_form(&g, mode);
    }
    let origin = vec![rat::zero(); n];
    let g0 = g.eval(&origin);
    if (rel == Rel::Gt && g0 <= rat::zero()) || (rel == Rel::Ge && g0 < rat::zero()) {
        return CheckResult::Disproved {
            witness: origin,
            violated: cond.describe(),
        };
    }
    let comps = g.homogeneous_components();
    if comps.len() == 1 {
        // Homogeneous: the sphere decides globally by scaling.
        let (_, form) = comps.into_iter().next().unwrap();
        let outer = BoxRegion::centered_cube(n, &rat::one());
        let filter = RegionFilter::Shell {
            vars: (0..n).collect(),
            r2_min: rat::frac(1, 4),
            r2_max: rat::one(),
        };
        return bb_to_check(
            prove_sign_on(&form, rel, &outer, &filter, &BbConfig::default()),
            cond,
        );
    }
    three_zone(&g, rel, 100_000)
}

/// Radial unboundedness of `v`: sublevel sets `{v ≤ b}` are bounded.
/// Sufficient condition: the top homogeneous form is strictly positive
/// on the unit sphere. Disproved when a ray direction along which `v`
/// does not increase is exactly verified.
pub fn check_radial_unboundedness(v: &Polynomial) -> CheckResult {
    let n = v.nvars();
    if v.as_constant().is_some() {
        let mut e1 = vec![rat::zero(); n];
        e1[0] = rat::one();
        return CheckResult::Disproved {
            witness: e1,
            violated: "radial unboundedness (v constant along a ray)".to_string(),
        };
    }
    let (_, top) = v.top_form().expect("nonconstant polynomial");
    match sphere_form_bound(&top, 100_000) {
        SphereBound::Positive(m) => {
            let mut ev = ProofEvidence::method(ProofMethod::HomogeneousDominance);
            ev.margin = Some(m);
            CheckResult::Proved(ev)
        }
        SphereBound::NotPositive(dir) => {
            // v restricted to the ray t·dir: constant or decreasing
            // leading behavior means unbounded sublevel sets.
            let ray = ray_polynomial(v, &dir);
            let leading = ray.top_form().map(|(d, p)| {
                (d, p.as_constant().unwrap_or_else(rat::zero))
            });
            match leading {
                None => CheckResult::Disproved {
                    witness: dir,
                    violated: "radial unboundedness (v constant along a ray)".to_string(),
                },
                Some((0, _)) => CheckResult::Disproved {
                    witness: dir,
                    violated: "radial unboundedness (v constant along a ray)".to_string(),
                },
                Some((_, c)) if c < rat::zero() => CheckResult::Disproved {
                    witness: dir,
                    violated: "radial unboundedness (v decreasing along a ray)".to_string(),
                },
                Some(_) => CheckResult::unknown(UnknownReason::BudgetExhausted),
            }
        }
        SphereBound::Unknown => CheckResult::unknown(UnknownReason::BudgetExhausted),
    }
}

/// `v(t·dir)` as a univariate polynomial in `t`.
fn ray_polynomial(v: &Polynomial, dir: &[Rat]) -> Polynomial {
    let lines: Vec<Polynomial> = dir
        .iter()
        .map(|c| Polynomial::var(1, 0).scale(c))
        .collect();
    v.substitute_all(&lines, 1)
}

/// Draws deterministic pseudo-random rational points in the region and
/// returns the first exactly verified violation, if any.
pub fn falsify(cond: &SignCondition, samples: u32, seed: u64) -> Option<Vec<Rat>> {
    let n = cond.poly.nvars();
    let (outer, member): (BoxRegion, Box<dyn Fn(&[Rat]) -> bool>) = match &cond.region {
        Region::Box(b) => (b.clone(), Box::new(|_| true)),
        Region::Annulus { r2_min, r2_max } => {
            let r = rat_sqrt_upper(r2_max);
            let (lo, hi) = (r2_min.clone(), r2_max.clone());
            (
                BoxRegion::centered_cube(n, &r),
                Box::new(move |pt: &[Rat]| {
                    let s: Rat = pt.iter().map(|c| rat::pow(c, 2)).sum();
                    lo <= s && s <= hi
                }),
            )
        }
        Region::PuncturedBall { gamma2 } => {
            let r = rat_sqrt_upper(gamma2);
            let g2 = gamma2.clone();
            (
                BoxRegion::centered_cube(n, &r),
                Box::new(move |pt: &[Rat]| {
                    let s: Rat = pt.iter().map(|c| rat::pow(c, 2)).sum();
                    s > rat::zero() && s <= g2
                }),
            )
        }
        Region::SetMinus { outer, subtracted } => {
            let f = subtracted.clone();
            (outer.clone(), Box::new(move |pt: &[Rat]| !f.holds_at(pt)))
        }
        Region::Global => (
            BoxRegion::centered_cube(n, &rat::int(4)),
            Box::new(|_| true),
        ),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0u32;
    let mut attempts = 0u32;
    while accepted < samples && attempts < samples.saturating_mul(4) {
        attempts += 1;
        let pt = random_point(&outer, &mut rng);
        if !member(&pt) {
            continue;
        }
        accepted += 1;
        if !cond.rel.holds(&cond.poly.eval(&pt)) {
            return Some(pt);
        }
    }
    None
}

fn falsify_global(p: &Polynomial, rel: Rel, exclude_origin: bool, samples: u32, seed: u64) -> Option<Vec<Rat>> {
    let n = p.nvars();
    let outer = BoxRegion::centered_cube(n, &rat::int(4));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let pt = random_point(&outer, &mut rng);
        if exclude_origin && pt.iter().all(Zero::is_zero) {
            continue;
        }
        if !rel.holds(&p.eval(&pt)) {
            return Some(pt);
        }
    }
    None
}

/// Exact rational sample with dyadic coordinates inside the box.
fn random_point(bx: &BoxRegion, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    const GRID: i64 = 1 << 20;
    bx.dims
        .iter()
        .map(|iv| {
            let k: i64 = rng.gen_range(0..=GRID);
            let u = rat::frac(k, GRID);
            &iv.lo + &(iv.width() * u)
        })
        .collect()
}

/// Rational upper bound on √q for q ≥ 0: start from (q+1)/2 ≥ √q and
/// tighten with Newton steps (each preserves the upper-bound property).
pub fn rat_sqrt_upper(q: &Rat) -> Rat {
    if q.is_zero() {
        return rat::zero();
    }
    let mut s = (q + rat::one()) / rat::int(2);
    for _ in 0..6 {
        s = (&s + &(q / &s)) / rat::int(2);
    }
    s
}

/// Rational lower bound on √q for q ≥ 0, via q / upper(√q).
pub fn rat_sqrt_lower(q: &Rat) -> Rat {
    if q.is_zero() {
        return rat::zero();
    }
    q / rat_sqrt_upper(q)
}

pub use interval::{eval_poly as interval_eval, RatInterval as Interval};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{frac, int};

    fn var(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn quadratic_form_identity_pd() {
        let q = Polynomial::sum_of_squares(2, &[0, 1]);
        assert!(check_quadratic_form(&q, DefinitenessMode::Pd).is_proved());
        assert!(check_quadratic_form(&q, DefinitenessMode::Psd).is_proved());
        assert!(check_quadratic_form(&q, DefinitenessMode::Nsd).is_disproved());
    }

    #[test]
    fn indefinite_form_witness_reverifies() {
        let q = &var(2, 0).pow(2) - &var(2, 1).pow(2);
        match check_quadratic_form(&q, DefinitenessMode::Psd) {
            CheckResult::Disproved { witness, .. } => assert!(q.eval(&witness) < int(0)),
            other => panic!("expected disproved, got {other:?}"),
        }
    }

    #[test]
    fn punctured_positivity_rejects_nonvanishing_origin() {
        let v = Polynomial::one(1);
        match check_punctured_positivity(&v, &int(1)) {
            CheckResult::Disproved { witness, violated } => {
                assert_eq!(witness, vec![int(0)]);
                assert!(violated.contains("v(0)"));
            }
            other => panic!("expected disproved, got {other:?}"),
        }
    }

    #[test]
    fn punctured_positivity_quartic() {
        // v = x⁴ in one variable: tier 2 with no remainder.
        let v = var(1, 0).pow(4);
        match check_punctured_positivity(&v, &int(1)) {
            CheckResult::Proved(ev) => assert_eq!(ev.gamma2, Some(int(1))),
            other => panic!("expected proved, got {other:?}"),
        }
    }

    #[test]
    fn punctured_positivity_shrinks_gamma() {
        // v = x² - x³: PD lowest form, remainder forces a smaller ball.
        let v = &var(1, 0).pow(2) - &var(1, 0).pow(3);
        match check_punctured_positivity(&v, &int(4)) {
            CheckResult::Proved(ev) => {
                let g2 = ev.gamma2.unwrap();
                assert!(g2 < int(4));
                assert!(g2 > int(0));
            }
            other => panic!("expected proved, got {other:?}"),
        }
    }

    #[test]
    fn punctured_indefinite_disproved_with_scaled_witness() {
        let v = &var(2, 0).pow(2) - &var(2, 1).pow(2);
        let g2 = frac(1, 100);
        match check_punctured_positivity(&v, &g2) {
            CheckResult::Disproved { witness, .. } => {
                let norm2: Rat = witness.iter().map(|c| rat::pow(c, 2)).sum();
                assert!(norm2 <= g2 && norm2 > int(0));
                assert!(v.eval(&witness) <= int(0));
            }
            other => panic!("expected disproved, got {other:?}"),
        }
    }

    #[test]
    fn global_quartic_vs_quadratic() {
        // x⁴ - x² ≥ 0 fails on (0,1).
        let p = &var(1, 0).pow(4) - &var(1, 0).pow(2);
        let cond = SignCondition::new(p.clone(), Rel::Ge, Region::Global);
        match check_global(&cond) {
            CheckResult::Disproved { witness, .. } => {
                assert!(p.eval(&witness) < int(0));
            }
            other => panic!("expected disproved, got {other:?}"),
        }
    }

    #[test]
    fn global_sum_of_even_powers_proved() {
        // x⁴ + y⁴ ≥ 0 globally (homogeneous, non-quadratic).
        let p = &var(2, 0).pow(4) + &var(2, 1).pow(4);
        let cond = SignCondition::new(p, Rel::Ge, Region::Global);
        assert!(check_global(&cond).is_proved());
    }

    #[test]
    fn radial_unboundedness_cases() {
        let v = Polynomial::sum_of_squares(2, &[0, 1]);
        assert!(check_radial_unboundedness(&v).is_proved());

        let d = &var(2, 0) - &var(2, 1);
        let sq = &d * &d;
        match check_radial_unboundedness(&sq) {
            CheckResult::Disproved { witness, .. } => {
                // Direction along the diagonal: v constant (zero) there.
                let ray = ray_polynomial(&sq, &witness);
                assert!(ray.is_zero());
            }
            other => panic!("expected disproved, got {other:?}"),
        }
    }

    #[test]
    fn falsify_finds_witness_below_threshold() {
        let p = &var(1, 0).pow(2) - &Polynomial::constant(1, frac(1, 2));
        let bx = BoxRegion::new(vec![Interval::new(int(0), int(1))]);
        let cond = SignCondition::new(p.clone(), Rel::Ge, Region::Box(bx));
        let w = falsify(&cond, 100, 7).expect("witness exists");
        assert!(p.eval(&w) < int(0));
        // w² < 1/2 so |w| < 1/√2.
        assert!(rat::pow(&w[0], 2) < frac(1, 2));
    }

    #[test]
    fn falsify_none_for_valid_condition() {
        let p = var(1, 0).pow(2);
        let bx = BoxRegion::centered_cube(1, &int(1));
        let cond = SignCondition::new(p, Rel::Ge, Region::Box(bx));
        assert!(falsify(&cond, 200, 3).is_none());
    }

    #[test]
    fn falsify_constant_false_first_sample() {
        let p = Polynomial::constant(1, int(-1));
        let bx = BoxRegion::centered_cube(1, &int(1));
        let cond = SignCondition::new(p, Rel::Gt, Region::Box(bx));
        assert!(falsify(&cond, 1, 0).is_some());
    }

    #[test]
    fn sqrt_bounds_bracket() {
        for q in [frac(1, 4), int(2), int(9), frac(17, 3)] {
            let up = rat_sqrt_upper(&q);
            let lo = rat_sqrt_lower(&q);
            assert!(&up * &up >= q);
            assert!(&lo * &lo <= q);
            assert!(lo <= up);
        }
    }

    #[test]
    fn bb_rejects_punctured_region() {
        let cond = SignCondition::new(
            Polynomial::one(1),
            Rel::Gt,
            Region::PuncturedBall { gamma2: int(1) },
        );
        assert!(matches!(
            check_sign_bb(&cond, 1000),
            CheckResult::Unknown {
                reason: UnknownReason::UnsupportedShape(_)
            }
        ));
    }
}
