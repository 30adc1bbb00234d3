//! General (two-set) stability rule and its ε-stability instance.
//!
//! The rule certifies `StabPR(P, R)`: solutions from a δ-neighborhood
//! of the precondition P stay within every ε-neighborhood of the
//! postcondition R. Supported shapes: P the origin (or a subspace,
//! which can only be refuted against a bounded R), R either the origin
//! or an open ball around it.


use crate::certify::quadform::{gram_matrix, sphere_value_bounds};
use crate::certify::{
    check_punctured_positivity, check_sign_bb, CheckResult, ProofEvidence, ProofMethod, Region,
    SignCondition, UnknownReason,
};
use crate::symbolic::rat::{self, Rat};
use crate::symbolic::{OdeSystem, Polynomial, Rel, TargetSet};

use super::origin::vc_lyap;
use super::{
    check_candidate_vars, check_on_ball, ensure_param_free, equilibrium_premise,
    CertificationReport, PremiseReport, RuleError, Schedules, StabilityProperty, Witnesses,
};

/// Postcondition shape for the general rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneralPost {
    /// R is the origin itself.
    Origin,
    /// R is the open ball `‖x‖ < radius` around the origin.
    Ball { radius: Rat },
}

/// General Lyapunov rule.
///
/// The invariance conjunct of the rule ("R ∨ v < k stays true within the
/// closed γ-neighborhood of R") is discharged by a sufficient
/// differential-invariant condition: `Lie(v) ≤ 0` on
/// `closure(U_γ(R)) ∖ R`, together with `v < k` on ∂R when R is open
/// (for closed R = {0}, invariance of R itself — `f(0) = 0` — replaces
/// the boundary condition). Exact invariance is strictly stronger, so
/// candidates that need it come back `Inconclusive`, never wrongly
/// `Certified`.
///
/// The rule's leading `∀ε` quantifier is handled in two parts: a passing
/// schedule entry γ* covers every ε ≥ γ* (the premise body does not
/// mention ε beyond γ ≤ ε), and the regime below γ* is closed by scale
/// invariance when R is the origin, or by an auxiliary origin-stability
/// premise when R is a ball (stability of the origin keeps solutions
/// inside R itself, hence inside every U_ε(R)). Without either closure
/// the verdict stays `Inconclusive` and the gap is recorded.
pub fn vc_general_lyap(
    ode: &OdeSystem,
    pre: &TargetSet,
    post: &GeneralPost,
    v: &Polynomial,
    sched: &Schedules,
) -> Result<CertificationReport, RuleError> {
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    let property = StabilityProperty::GeneralStab {
        pre: pre.clone(),
        post_radius: match post {
            GeneralPost::Origin => None,
            GeneralPost::Ball { radius } => Some(radius.clone()),
        },
    };
    general_rule(ode, pre, post, v, sched, property, "general-lyapunov")
}

/// ε-stability as the general-rule instance with P the origin and R the
/// ε-ball around it.
pub fn vc_eps_stability(
    ode: &OdeSystem,
    eps: &Rat,
    v: &Polynomial,
    sched: &Schedules,
) -> Result<CertificationReport, RuleError> {
    if *eps <= rat::zero() {
        return Err(RuleError::InvalidInput("ε must be positive".into()));
    }
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    general_rule(
        ode,
        &TargetSet::Origin,
        &GeneralPost::Ball {
            radius: eps.clone(),
        },
        v,
        sched,
        StabilityProperty::EpsStab(eps.clone()),
        "eps-stability",
    )
}

fn general_rule(
    ode: &OdeSystem,
    pre: &TargetSet,
    post: &GeneralPost,
    v: &Polynomial,
    sched: &Schedules,
    property: StabilityProperty,
    rule: &'static str,
) -> Result<CertificationReport, RuleError> {
    let mut notes = Vec::new();
    let mut premises = vec![precondition_premise(ode, pre, post)];
    if premises[0].result.is_disproved() {
        return Ok(CertificationReport::assemble(
            property,
            rule,
            premises,
            Witnesses::default(),
            notes,
        ));
    }

    match post {
        GeneralPost::Origin => {
            origin_post_premises(ode, v, sched, &mut premises, &mut notes)?;
        }
        GeneralPost::Ball { radius } => {
            ball_post_premises(ode, v, radius, sched, &mut premises, &mut notes)?;
        }
    }

    let gamma = premise_gamma(&premises, &notes);
    Ok(CertificationReport::assemble(
        property,
        rule,
        premises,
        Witnesses {
            gamma,
            ..Default::default()
        },
        notes,
    ))
}

fn premise_gamma(premises: &[PremiseReport], _notes: &[String]) -> Option<Rat> {
    for p in premises {
        if let CheckResult::Proved(ev) = &p.result {
            if let Some(g2) = &ev.gamma2 {
                return Some(crate::certify::rat_sqrt_lower(g2));
            }
        }
    }
    None
}

/// Premise `P → R`.
fn precondition_premise(ode: &OdeSystem, pre: &TargetSet, post: &GeneralPost) -> PremiseReport {
    let n = ode.vars().len();
    let name = "P → R";
    let result = match pre {
        TargetSet::Origin => {
            CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
        }
        TargetSet::CoordinateSubspace(zeroed) => {
            if zeroed.len() == ode.n_state() {
                CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
            } else {
                // A proper subspace contains points arbitrarily far out,
                // so it is not inside any ball (nor equal to the origin).
                let free = (0..ode.n_state())
                    .find(|i| !zeroed.contains(i))
                    .expect("proper subspace has a free variable");
                let mut w = vec![rat::zero(); n];
                w[free] = match post {
                    GeneralPost::Origin => rat::one(),
                    GeneralPost::Ball { radius } => radius * rat::int(2),
                };
                CheckResult::Disproved {
                    witness: w,
                    violated: "P → R".to_string(),
                }
            }
        }
        TargetSet::Formula { .. } => {
            CheckResult::unsupported("formula preconditions are not supported by this rule")
        }
    };
    PremiseReport::new(name, result)
}

/// P = R = origin: the level construction k(γ) = low·γ^m, δ(γ) = γ/2^j
/// scales to every ε when the candidate is a positive homogeneous form.
fn origin_post_premises(
    ode: &OdeSystem,
    v: &Polynomial,
    sched: &Schedules,
    premises: &mut Vec<PremiseReport>,
    notes: &mut Vec<String>,
) -> Result<(), RuleError> {
    // R = {0} is closed; its invariance replaces the open-boundary
    // condition in the invariance discharge.
    premises.push(equilibrium_premise(ode));

    let bounds = match quadratic_bounds(v) {
        Some(b) => b,
        None => {
            premises.push(PremiseReport::new(
                "separating level exists (v ≥ k on ∂U_γ(R), v < k on U_δ(P) ∖ R)",
                CheckResult::unsupported(
                    "level construction implemented for positive quadratic candidates",
                ),
            ));
            return Ok(());
        }
    };
    let (low, high) = match bounds {
        QuadBounds::Positive { low, high } => (low, high),
        QuadBounds::NotPositive { witness } => {
            premises.push(PremiseReport::new(
                "separating level exists (v ≥ k on ∂U_γ(R), v < k on U_δ(P) ∖ R)",
                CheckResult::Disproved {
                    witness,
                    violated: "v > 0 near the origin".to_string(),
                },
            ));
            return Ok(());
        }
        QuadBounds::Unknown => {
            premises.push(PremiseReport::new(
                "separating level exists",
                CheckResult::unknown(UnknownReason::BudgetExhausted),
            ));
            return Ok(());
        }
    };

    let gamma0 = sched.eps.first().cloned().unwrap_or_else(rat::one);
    let mut j = 1u32;
    while &high / &rat::pow(&rat::int(2), 2 * j) >= low && j < 64 {
        j += 1;
    }
    let mut lv = ProofEvidence::method(ProofMethod::QuadraticForm);
    lv.notes.push(format!(
        "k(γ) = {}·γ², δ(γ) = γ/2^{}; scales to every ε with γ := min(ε, {})",
        rat::display(&low),
        j,
        rat::display(&gamma0)
    ));
    premises.push(PremiseReport::new(
        "separating level exists (v ≥ k on ∂U_γ(R), v < k on U_δ(P) ∖ R)",
        CheckResult::Proved(lv),
    ));

    let lie = ode.lie_derivative(v)?;
    premises.push(PremiseReport::new(
        "Lie(v) ≤ 0 on closure(U_γ(R)) ∖ R",
        check_on_ball(
            &lie,
            Rel::Le,
            &gamma0,
            sched.budget,
            "Lie(v) ≤ 0 on closure(U_γ(R)) ∖ R",
        ),
    ));
    notes.push(format!(
        "γ schedule head {}; smaller γ regions are subsets of the checked one",
        rat::display(&gamma0)
    ));
    Ok(())
}

/// R = ball(ε₀): per-entry barrier construction between the spheres of
/// radius ε₀ and ε₀+γ, plus the small-ε closure premise.
fn ball_post_premises(
    ode: &OdeSystem,
    v: &Polynomial,
    eps0: &Rat,
    sched: &Schedules,
    premises: &mut Vec<PremiseReport>,
    notes: &mut Vec<String>,
) -> Result<(), RuleError> {
    let lie = ode.lie_derivative(v)?;

    if v.is_zero() {
        // The trivial candidate cannot separate ∂R from the γ-boundary:
        // it needs both v ≥ k (forcing k ≤ 0) and v < k on ∂R (forcing
        // k > 0). The inner-sphere point witnesses the contradiction.
        let n = v.nvars();
        let mut w = vec![rat::zero(); n];
        w[0] = eps0.clone();
        premises.push(PremiseReport::new(
            "separating level exists (v ≥ k on ∂U_γ(R), v < k on ∂R)",
            CheckResult::Disproved {
                witness: w,
                violated: "v ≥ k > v on the two spheres is unsatisfiable for v = 0".to_string(),
            },
        ));
        return Ok(());
    }

    let bounds = quadratic_bounds(v);
    let mut passing: Option<(Rat, Rat)> = None; // (γ*, k)
    match bounds {
        Some(QuadBounds::Positive { low, high }) => {
            for eps in &sched.eps {
                let gamma = eps.clone();
                let sigma = eps0 + &gamma;
                let inner_sup = &high * &(eps0 * eps0);
                let outer_inf = &low * &(&sigma * &sigma);
                if inner_sup < outer_inf {
                    let k = rat::midpoint(&inner_sup, &outer_inf);
                    passing = Some((gamma, k));
                    break;
                }
                notes.push(format!(
                    "ε = {}: no separating level (sup ∂R bound {} ≥ inf outer bound {})",
                    rat::display(eps),
                    rat::display(&inner_sup),
                    rat::display(&outer_inf)
                ));
            }
        }
        Some(QuadBounds::NotPositive { witness }) => {
            premises.push(PremiseReport::new(
                "separating level exists (v ≥ k on ∂U_γ(R), v < k on ∂R)",
                CheckResult::Disproved {
                    witness,
                    violated: "v > 0 away from the origin".to_string(),
                },
            ));
            return Ok(());
        }
        Some(QuadBounds::Unknown) | None => {
            premises.push(PremiseReport::new(
                "separating level exists",
                CheckResult::unsupported(
                    "level search implemented for quadratic candidates",
                ),
            ));
            return Ok(());
        }
    }

    match passing {
        Some((gamma, k)) => {
            let sigma = eps0 + &gamma;
            let mut b1 = ProofEvidence::method(ProofMethod::QuadraticForm);
            b1.gamma2 = Some(&gamma * &gamma);
            b1.notes.push(format!(
                "k = {} at γ = {}: v ≥ inf-bound on the sphere ‖x‖ = {}",
                rat::display(&k),
                rat::display(&gamma),
                rat::display(&sigma)
            ));
            premises.push(PremiseReport::new(
                "v ≥ k on ∂U_γ(R)",
                CheckResult::Proved(b1),
            ));
            let mut b2 = ProofEvidence::method(ProofMethod::Vacuous);
            b2.notes.push(format!(
                "δ = min(γ, ε₀) keeps U_δ(P) inside R = ball({})",
                rat::display(eps0)
            ));
            premises.push(PremiseReport::new(
                "v < k on U_δ(P) ∖ R for some 0 < δ ≤ γ",
                CheckResult::Proved(b2),
            ));
            let mut b3 = ProofEvidence::method(ProofMethod::QuadraticForm);
            b3.notes
                .push("sup bound on ∂R is below k (open R boundary condition)".to_string());
            premises.push(PremiseReport::new(
                "v < k on ∂R",
                CheckResult::Proved(b3),
            ));

            // Lie(v) ≤ 0 on the closed annulus ε₀ ≤ ‖x‖ ≤ ε₀ + γ.
            // The punctured-ball certificate on radius σ is stronger
            // and cheap; fall back to annulus branch-and-bound.
            let sigma2 = &sigma * &sigma;
            let strong = check_punctured_positivity(&-&lie, &sigma2);
            let lie_res = match &strong {
                CheckResult::Proved(ev)
                    if ev.gamma2.as_ref().map(|g2| g2 >= &sigma2).unwrap_or(false) =>
                {
                    let mut e = ev.clone();
                    e.notes
                        .push("via strict decrease on the punctured σ-ball".to_string());
                    CheckResult::Proved(e)
                }
                _ => check_sign_bb(
                    &SignCondition::new(
                        lie.clone(),
                        Rel::Le,
                        Region::Annulus {
                            r2_min: eps0 * eps0,
                            r2_max: sigma2.clone(),
                        },
                    ),
                    sched.budget,
                ),
            };
            premises.push(PremiseReport::new(
                "Lie(v) ≤ 0 on closure(U_γ(R)) ∖ R",
                lie_res,
            ));
            notes.push(format!(
                "schedule entry γ* = {} passes; the premise body covers every ε ≥ γ*",
                rat::display(&gamma)
            ));
        }
        None => {
            premises.push(PremiseReport::new(
                "separating level exists",
                CheckResult::unknown(UnknownReason::BudgetExhausted),
            ));
            notes.push("no scheduled ε admitted a separating level".to_string());
            return Ok(());
        }
    }

    // Small-ε closure: plain origin stability keeps solutions inside R
    // itself, hence inside U_ε(R) for every ε below the passing entry.
    let aux = vc_lyap(ode, v, sched)?;
    let aux_result = match &aux.verdict {
        super::Verdict::Certified => {
            let mut ev = ProofEvidence::method(ProofMethod::HomogeneousDominance);
            ev.notes.push(
                "origin stability certificate covers the ε range below the passing entry"
                    .to_string(),
            );
            CheckResult::Proved(ev)
        }
        super::Verdict::Refuted { premise, witness } => CheckResult::Disproved {
            witness: witness.clone(),
            violated: format!("origin-stability closure premise ({premise})"),
        },
        super::Verdict::Inconclusive => {
            notes.push(
                "ε below the passing entry remains unverified (origin-stability premise \
                 inconclusive); recorded as a completeness gap"
                    .to_string(),
            );
            CheckResult::unknown(UnknownReason::BudgetExhausted)
        }
    };
    premises.push(PremiseReport::new(
        "small-ε regime via origin stability",
        aux_result,
    ));
    Ok(())
}

enum QuadBounds {
    Positive { low: Rat, high: Rat },
    NotPositive { witness: Vec<Rat> },
    Unknown,
}

/// Certified sphere bounds for a quadratic-form candidate.
fn quadratic_bounds(v: &Polynomial) -> Option<QuadBounds> {
    if !v.is_quadratic_form() || v.is_zero() {
        return None;
    }
    let gram = gram_matrix(v)?;
    let (lo, hi) = sphere_value_bounds(&gram, 60);
    if lo > rat::zero() {
        return Some(QuadBounds::Positive { low: lo, high: hi });
    }
    Some(match crate::certify::quadform::psd_analysis(&gram) {
        crate::certify::quadform::PsdOutcome::NotPsd { witness } => {
            QuadBounds::NotPositive { witness }
        }
        crate::certify::quadform::PsdOutcome::SemidefiniteSingular { kernel_vector } => {
            QuadBounds::NotPositive {
                witness: kernel_vector,
            }
        }
        crate::certify::quadform::PsdOutcome::PositiveDefinite => QuadBounds::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Verdict;
    use crate::symbolic::rat::{frac, int};
    use crate::symbolic::VarSet;

    fn contraction() -> (OdeSystem, Polynomial) {
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![x.scale(&int(-1))], None).unwrap();
        (ode, Polynomial::var(1, 0).pow(2))
    }

    #[test]
    fn origin_to_origin_certifies_contraction() {
        let (ode, v) = contraction();
        let r = vc_general_lyap(
            &ode,
            &TargetSet::Origin,
            &GeneralPost::Origin,
            &v,
            &Schedules::default(),
        )
        .unwrap();
        assert!(r.is_certified(), "verdict {:?}", r.verdict);
    }

    #[test]
    fn eps_stability_certifies_contraction() {
        let (ode, v) = contraction();
        let r = vc_eps_stability(&ode, &frac(1, 100), &v, &Schedules::default()).unwrap();
        assert!(r.is_certified(), "verdict {:?}", r.verdict);
    }

    #[test]
    fn eps_stability_rejects_nonpositive_radius() {
        let (ode, v) = contraction();
        assert!(matches!(
            vc_eps_stability(&ode, &int(0), &v, &Schedules::default()),
            Err(RuleError::InvalidInput(_))
        ));
    }

    #[test]
    fn zero_candidate_refused_at_level_premise() {
        let (ode, _) = contraction();
        let r = vc_eps_stability(&ode, &int(10), &Polynomial::zero(1), &Schedules::default())
            .unwrap();
        match &r.verdict {
            Verdict::Refuted { premise, .. } => {
                assert!(premise.contains("separating level"));
            }
            other => panic!("expected refuted, got {other:?}"),
        }
    }

    #[test]
    fn subspace_precondition_refutes_subset_premise() {
        let vars = VarSet::states(vec!["x", "y"]);
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let ode =
            OdeSystem::new(vars, vec![x.scale(&int(-1)), y.scale(&int(-1))], None).unwrap();
        let pre = TargetSet::subspace(vec![0], ode.vars()).unwrap();
        let v = Polynomial::sum_of_squares(2, &[0, 1]);
        let r = vc_general_lyap(
            &ode,
            &pre,
            &GeneralPost::Ball { radius: int(1) },
            &v,
            &Schedules::default(),
        )
        .unwrap();
        match &r.verdict {
            Verdict::Refuted { premise, witness } => {
                assert_eq!(premise, "P → R");
                // Witness lies on P but outside R.
                assert_eq!(witness[0], int(0));
                assert!(witness[1] > int(1));
            }
            other => panic!("expected refuted, got {other:?}"),
        }
    }
}
