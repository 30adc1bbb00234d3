//! Rules for stability of the origin: plain and strict Lyapunov,
//! exponential, and the global variants.


use crate::certify::{
    check_punctured_global, check_punctured_positivity, check_radial_unboundedness, check_global,
    CheckResult, Region, SignCondition,
};
use crate::certify::rat_sqrt_lower;
use crate::symbolic::rat::{self, Rat};
use crate::symbolic::{OdeSystem, Polynomial, Rel};

use super::{
    check_candidate_vars, check_on_ball, ensure_param_free, equilibrium_premise,
    origin_value_premise, CertificationReport, PremiseReport, RuleError, Schedules,
    StabilityProperty, Witnesses,
};

/// Searches the γ schedule for a radius on which both ball premises
/// hold. `strict_lie` selects `Lie(v) < 0` on the punctured ball instead
/// of `Lie(v) ≤ 0` on the closed ball.
fn ball_premise_search(
    ode: &OdeSystem,
    v: &Polynomial,
    strict_lie: bool,
    sched: &Schedules,
    premises: &mut Vec<PremiseReport>,
    notes: &mut Vec<String>,
) -> Option<Rat> {
    let lie = ode
        .lie_derivative(v)
        .expect("candidate variables already checked");
    let pos_name = "v > 0 on 0 < ‖x‖² ≤ γ²";
    let lie_name = if strict_lie {
        "Lie(v) < 0 on 0 < ‖x‖² ≤ γ²"
    } else {
        "Lie(v) ≤ 0 on ‖x‖² ≤ γ²"
    };
    let neg_lie = -&lie;
    let lie_scale_invariant = lie.is_zero() || lie.is_quadratic_form();

    let lie_rel = if strict_lie { Rel::Lt } else { Rel::Le };
    let mut last_pos: Option<CheckResult> = None;
    let mut last_lie: Option<CheckResult> = None;
    for gamma in &sched.gamma {
        let gamma2 = gamma * gamma;
        let pos = check_punctured_positivity(v, &gamma2);
        if pos.is_disproved() {
            // Both disproof paths (indefinite form, negative direction of
            // the lowest form) violate the premise inside every ball.
            let (vp, vr) = super::punctured_payload(v, Rel::Gt, &pos);
            premises.push(PremiseReport::with_check(pos_name, pos, vp, vr));
            let lie_res = if strict_lie {
                check_punctured_positivity(&neg_lie, &gamma2)
            } else {
                check_on_ball(&lie, Rel::Le, gamma, sched.budget, lie_name)
            };
            let (lp, lr) = super::punctured_payload(&lie, lie_rel, &lie_res);
            premises.push(PremiseReport::with_check(lie_name, lie_res, lp, lr));
            return None;
        }
        let effective = match &pos {
            CheckResult::Proved(ev) => {
                let g2 = ev.gamma2.clone().unwrap_or_else(|| gamma2.clone());
                if g2 == gamma2 {
                    gamma.clone()
                } else {
                    // Shrunk ball: use an exact rational radius inside it.
                    rat_sqrt_lower(&g2)
                }
            }
            _ => {
                notes.push(format!(
                    "γ = {}: positivity {}",
                    rat::display(gamma),
                    describe(&pos)
                ));
                last_pos = Some(pos);
                continue;
            }
        };
        let eff2 = &effective * &effective;
        let lie_res = if strict_lie {
            check_punctured_positivity(&neg_lie, &eff2)
        } else {
            check_on_ball(&lie, Rel::Le, &effective, sched.budget, lie_name)
        };
        match &lie_res {
            CheckResult::Proved(_) => {
                if effective != *gamma {
                    notes.push(format!(
                        "γ = {} shrunk to {} by higher-order dominance",
                        rat::display(gamma),
                        rat::display(&effective)
                    ));
                }
                premises.push(PremiseReport::new(pos_name, pos));
                premises.push(PremiseReport::new(lie_name, lie_res));
                return Some(effective);
            }
            CheckResult::Disproved { .. } if strict_lie || lie_scale_invariant => {
                // Scale-invariant disproof: no smaller γ can help.
                premises.push(PremiseReport::new(pos_name, pos));
                let (lp, lr) = super::punctured_payload(&lie, lie_rel, &lie_res);
                premises.push(PremiseReport::with_check(lie_name, lie_res, lp, lr));
                return None;
            }
            other => {
                notes.push(format!(
                    "γ = {}: Lie premise {}",
                    rat::display(gamma),
                    describe(other)
                ));
                last_pos = Some(pos);
                last_lie = Some(lie_res);
            }
        }
    }
    if let Some(p) = last_pos {
        premises.push(PremiseReport::new(pos_name, p));
    }
    if let Some(l) = last_lie {
        premises.push(PremiseReport::new(lie_name, l));
    }
    notes.push("γ schedule exhausted without certifying the ball premises".to_string());
    None
}

fn describe(r: &CheckResult) -> String {
    match r {
        CheckResult::Proved(_) => "proved".to_string(),
        CheckResult::Disproved { .. } => "disproved".to_string(),
        CheckResult::Unknown { reason } => format!("unknown ({reason})"),
    }
}

/// Non-strict Lyapunov rule: `f(0)=0 ∧ v(0)=0` and, for some scheduled
/// γ, `v > 0` on the punctured ball with `Lie(v) ≤ 0` on the closed
/// ball. Certifies stability of the origin.
pub fn vc_lyap(
    ode: &OdeSystem,
    v: &Polynomial,
    sched: &Schedules,
) -> Result<CertificationReport, RuleError> {
    rule_lyap(ode, v, sched, false)
}

/// Strict Lyapunov rule: as [`vc_lyap`] with `Lie(v) < 0` on the
/// punctured ball. Certifies asymptotic stability of the origin.
pub fn vc_strict_lyap(
    ode: &OdeSystem,
    v: &Polynomial,
    sched: &Schedules,
) -> Result<CertificationReport, RuleError> {
    rule_lyap(ode, v, sched, true)
}

fn rule_lyap(
    ode: &OdeSystem,
    v: &Polynomial,
    sched: &Schedules,
    strict: bool,
) -> Result<CertificationReport, RuleError> {
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    let mut premises = vec![equilibrium_premise(ode), origin_value_premise(v)];
    let mut notes = Vec::new();
    let gamma = ball_premise_search(ode, v, strict, sched, &mut premises, &mut notes);
    let witnesses = Witnesses {
        gamma,
        ..Default::default()
    };
    let (property, rule) = if strict {
        (StabilityProperty::AStab, "strict-lyapunov")
    } else {
        (StabilityProperty::Stab, "lyapunov")
    };
    Ok(CertificationReport::assemble(
        property, rule, premises, witnesses, notes,
    ))
}

/// Exponential Lyapunov rule on a ball of radius γ:
/// `k₁²‖x‖² ≤ v ≤ k₂²‖x‖²` and `Lie(v) ≤ -2k₃·v` on `‖x‖² ≤ γ²`.
/// A certificate carries the explicit witnesses α = k₂/k₁, β = k₃ and
/// δ = (k₁/k₂)·γ.
pub fn vc_exp_lyap(
    ode: &OdeSystem,
    v: &Polynomial,
    k1: &Rat,
    k2: &Rat,
    k3: &Rat,
    gamma: &Rat,
) -> Result<CertificationReport, RuleError> {
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    validate_rates(k1, k2, k3)?;
    if *gamma <= rat::zero() {
        return Err(RuleError::InvalidInput("γ must be positive".into()));
    }
    let premises = exp_premises(ode, v, k1, k2, k3, Some(gamma))?;
    let witnesses = Witnesses {
        gamma: Some(gamma.clone()),
        delta: Some(&(k1 / k2) * gamma),
        alpha: Some(k2 / k1),
        beta: Some(k3.clone()),
        level: None,
    };
    Ok(CertificationReport::assemble(
        StabilityProperty::ExpStab,
        "exp-lyapunov",
        premises,
        witnesses,
        Vec::new(),
    ))
}

/// Global exponential rule: the three exponential inequalities over all
/// of ℝⁿ. Certifies global exponential stability with α = k₂/k₁ and
/// β = k₃.
pub fn vc_exp_lyap_global(
    ode: &OdeSystem,
    v: &Polynomial,
    k1: &Rat,
    k2: &Rat,
    k3: &Rat,
) -> Result<CertificationReport, RuleError> {
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    validate_rates(k1, k2, k3)?;
    let premises = exp_premises(ode, v, k1, k2, k3, None)?;
    let witnesses = Witnesses {
        alpha: Some(k2 / k1),
        beta: Some(k3.clone()),
        ..Default::default()
    };
    Ok(CertificationReport::assemble(
        StabilityProperty::GlobalExpStab,
        "exp-lyapunov-global",
        premises,
        witnesses,
        Vec::new(),
    ))
}

fn validate_rates(k1: &Rat, k2: &Rat, k3: &Rat) -> Result<(), RuleError> {
    for (name, k) in [("k1", k1), ("k2", k2), ("k3", k3)] {
        if *k <= rat::zero() {
            return Err(RuleError::InvalidInput(format!("{name} must be positive")));
        }
    }
    if k1 > k2 {
        return Err(RuleError::InvalidInput(
            "k1 > k2 makes the sandwich premises unsatisfiable".into(),
        ));
    }
    Ok(())
}

fn exp_premises(
    ode: &OdeSystem,
    v: &Polynomial,
    k1: &Rat,
    k2: &Rat,
    k3: &Rat,
    ball: Option<&Rat>,
) -> Result<Vec<PremiseReport>, RuleError> {
    let n = ode.vars().len();
    let state: Vec<usize> = ode.vars().state_indices().collect();
    let sum_sq = Polynomial::sum_of_squares(n, &state);
    let lie = ode.lie_derivative(v)?;
    let lower = v - &sum_sq.scale(&(k1 * k1));
    let upper = &sum_sq.scale(&(k2 * k2)) - v;
    let decay = &(-&lie) - &v.scale(&(rat::int(2) * k3));
    let items = [
        ("k₁²‖x‖² ≤ v", lower),
        ("v ≤ k₂²‖x‖²", upper),
        ("Lie(v) ≤ -2k₃·v", decay),
    ];
    let mut premises = Vec::new();
    for (name, poly) in items {
        let res = match ball {
            Some(gamma) => check_on_ball(&poly, Rel::Ge, gamma, 100_000, name),
            None => check_global(&SignCondition::new(poly, Rel::Ge, Region::Global)),
        };
        let scope = match ball {
            Some(g) => format!("{name} on ‖x‖² ≤ {}²", rat::display(g)),
            None => format!("{name} globally"),
        };
        premises.push(PremiseReport::new(scope, res));
    }
    Ok(premises)
}

/// Global strict Lyapunov rule: `f(0)=0 ∧ v(0)=0`, `v > 0` and
/// `Lie(v) < 0` off the origin, and radial unboundedness of `v`.
/// Certifies global asymptotic stability.
pub fn vc_strict_lyap_global(
    ode: &OdeSystem,
    v: &Polynomial,
    sched: &Schedules,
) -> Result<CertificationReport, RuleError> {
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    let lie = ode.lie_derivative(v)?;
    let premises = vec![
        equilibrium_premise(ode),
        origin_value_premise(v),
        PremiseReport::new("v > 0 for x ≠ 0", check_punctured_global(v, sched.budget)),
        PremiseReport::new(
            "Lie(v) < 0 for x ≠ 0",
            relabel(check_punctured_global(&-&lie, sched.budget), "Lie(v) < 0 for x ≠ 0"),
        ),
        PremiseReport::new(
            "radial unboundedness of v",
            check_radial_unboundedness(v),
        ),
    ];
    Ok(CertificationReport::assemble(
        StabilityProperty::GlobalAStab,
        "strict-lyapunov-global",
        premises,
        Witnesses::default(),
        Vec::new(),
    ))
}

fn relabel(r: CheckResult, label: &str) -> CheckResult {
    match r {
        CheckResult::Disproved { witness, .. } => CheckResult::Disproved {
            witness,
            violated: label.to_string(),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Verdict;
    use crate::symbolic::rat::{frac, int};
    use crate::symbolic::VarSet;

    /// x' = -x with v = x².
    fn contraction() -> (OdeSystem, Polynomial) {
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![x.scale(&int(-1))], None).unwrap();
        (ode, Polynomial::var(1, 0).pow(2))
    }

    /// Instantiated pendulum θ' = ω, ω' = -aθ - bω with the energy
    /// candidate, both parameter-free.
    fn pendulum(a: i64, b_num: i64, b_den: i64) -> (OdeSystem, Polynomial) {
        let a = int(a);
        let b = frac(b_num, b_den);
        let vars = VarSet::states(vec!["theta", "omega"]);
        let theta = Polynomial::var(2, 0);
        let omega = Polynomial::var(2, 1);
        let rhs = vec![
            omega.clone(),
            &theta.scale(&-a.clone()) - &omega.scale(&b),
        ];
        let ode = OdeSystem::new(vars, rhs, None).unwrap();
        let btw = &theta.scale(&b) + &omega;
        let v = &(&theta * &theta).scale(&(a / int(2)))
            + &(&(&btw * &btw) + &(&omega * &omega)).scale(&frac(1, 4));
        (ode, v)
    }

    #[test]
    fn contraction_certifies_everything() {
        let (ode, v) = contraction();
        let sched = Schedules::default();
        assert!(vc_lyap(&ode, &v, &sched).unwrap().is_certified());
        assert!(vc_strict_lyap(&ode, &v, &sched).unwrap().is_certified());
        let one = int(1);
        let r = vc_exp_lyap(&ode, &v, &one, &one, &one, &one).unwrap();
        assert!(r.is_certified());
        assert_eq!(r.witnesses.alpha, Some(int(1)));
        assert!(vc_exp_lyap_global(&ode, &v, &one, &one, &one)
            .unwrap()
            .is_certified());
        assert!(vc_strict_lyap_global(&ode, &v, &sched)
            .unwrap()
            .is_certified());
    }

    #[test]
    fn pendulum_nonstrict_certifies_with_unit_gamma() {
        let (ode, v) = pendulum(1, 1, 1);
        let r = vc_lyap(&ode, &v, &Schedules::default()).unwrap();
        assert!(r.is_certified());
        assert_eq!(r.witnesses.gamma, Some(int(1)));
    }

    #[test]
    fn frictionless_pendulum_fails_strict_rule() {
        let (ode, v) = pendulum(1, 0, 1);
        let strict = vc_strict_lyap(&ode, &v, &Schedules::default()).unwrap();
        assert!(!strict.is_certified());
        assert!(matches!(strict.verdict, Verdict::Refuted { .. }));
        // The non-strict rule still certifies plain stability.
        assert!(vc_lyap(&ode, &v, &Schedules::default()).unwrap().is_certified());
    }

    #[test]
    fn constant_candidate_refuted_at_origin_premise() {
        let vars = VarSet::states(vec!["y"]);
        let y = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![y], None).unwrap();
        let v = Polynomial::one(1);
        let r = vc_lyap(&ode, &v, &Schedules::default()).unwrap();
        match &r.verdict {
            Verdict::Refuted { premise, witness } => {
                assert_eq!(premise, "v(0) = 0");
                assert_eq!(witness, &vec![int(0)]);
            }
            other => panic!("expected refuted, got {other:?}"),
        }
    }

    #[test]
    fn exp_rule_rejects_inverted_rates() {
        let (ode, v) = contraction();
        let err = vc_exp_lyap(&ode, &v, &int(2), &int(1), &int(1), &int(1));
        assert!(matches!(err, Err(RuleError::InvalidInput(_))));
    }

    #[test]
    fn exp_rule_refutes_wrong_lower_bound() {
        let (ode, v) = pendulum(1, 1, 1);
        let r = vc_exp_lyap(&ode, &v, &int(1), &int(1), &frac(1, 4), &int(1)).unwrap();
        match &r.verdict {
            Verdict::Refuted { premise, .. } => assert!(premise.contains("k₁²")),
            other => panic!("expected refuted, got {other:?}"),
        }
    }
}
