//! Set-stability rules: the compact-target rule pair and the general
//! rule that also covers non-compact invariant targets such as
//! coordinate subspaces.

use num_traits::Zero;

use crate::certify::bb::{prove_sign_on, BbConfig, BbOutcome, RegionFilter};
use crate::certify::interval::BoxRegion;
use crate::certify::quadform::{gram_matrix, sphere_value_bounds};
use crate::certify::{
    check_punctured_positivity, check_sign_bb, CheckResult, ProofEvidence, ProofMethod, Region,
    SignCondition, UnknownReason,
};
use crate::symbolic::rat::{self, Rat};
use crate::symbolic::{OdeSystem, Polynomial, Rel, SemiAlgebraicFormula, TargetSet};

use super::{
    check_candidate_vars, check_on_ball, closure_normalize, ensure_param_free, invariance_check,
    sublevel_bounding_radius, CertificationReport, PremiseReport, RuleError, Schedules,
    StabilityProperty, Witnesses,
};

/// Is the target set compact? Origin is; a coordinate subspace is only
/// when it pins every state variable (and is then the origin); formula
/// targets carry a user-asserted flag.
fn compactness(target: &TargetSet, n_state: usize) -> Result<(), RuleError> {
    match target {
        TargetSet::Origin => Ok(()),
        TargetSet::CoordinateSubspace(zeroed) => {
            if zeroed.len() == n_state {
                Ok(())
            } else {
                Err(RuleError::NonCompactTarget(
                    "a proper coordinate subspace is unbounded; use the general set rule \
                     (the cex1 corpus entry shows why boundedness cannot be dropped)"
                        .into(),
                ))
            }
        }
        TargetSet::Formula { compact, .. } => {
            if *compact {
                Ok(())
            } else {
                Err(RuleError::NonCompactTarget(
                    "formula target not asserted compact; the compact-set rule is unsound \
                     without boundedness (see the cex1 corpus entry)"
                        .into(),
                ))
            }
        }
    }
}

/// Set Lyapunov rule for a compact invariant target: invariance of P,
/// `v > 0` (and `Lie(v) ≤ 0`, strict `< 0`) off P within a box bounding
/// `U₁(P)`, and `v ≤ 0` on the boundary of P. Refuses non-compact
/// targets outright.
pub fn vc_set_lyap(
    ode: &OdeSystem,
    target: &TargetSet,
    v: &Polynomial,
    strict: bool,
    sched: &Schedules,
) -> Result<CertificationReport, RuleError> {
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    let (target, mut notes) = {
        let (t, note) = closure_normalize(target)?;
        (t, note.into_iter().collect::<Vec<_>>())
    };
    compactness(&target, ode.n_state())?;

    let property = if strict {
        StabilityProperty::SetAStab(target.clone())
    } else {
        StabilityProperty::SetStab(target.clone())
    };
    let rule = if strict {
        "set-lyapunov-strict"
    } else {
        "set-lyapunov"
    };

    // Necessary-condition gate: a closed set that is not invariant is
    // not stable, so no other premise runs.
    let inv = invariance_check(ode, &target);
    if inv.is_disproved() {
        notes.push("invariance gate failed; remaining premises skipped".to_string());
        let premises = vec![PremiseReport::new("P invariant", inv)];
        return Ok(CertificationReport::assemble(
            property,
            rule,
            premises,
            Witnesses::default(),
            notes,
        ));
    }
    let mut premises = vec![PremiseReport::new("P invariant", inv)];

    match &target {
        TargetSet::Origin | TargetSet::CoordinateSubspace(_) => {
            // Compact gate passed, so this is the origin; the premises
            // coincide with the origin ball premises on U₁.
            let lie = ode.lie_derivative(v)?;
            let gamma2 = rat::one();
            let pos = check_punctured_positivity(v, &gamma2);
            let eff = match &pos {
                CheckResult::Proved(ev) => ev.gamma2.clone().unwrap_or_else(rat::one),
                _ => gamma2.clone(),
            };
            if eff != gamma2 {
                notes.push(format!(
                    "off-P premises certified within γ² = {}",
                    rat::display(&eff)
                ));
            }
            premises.push(PremiseReport::new("v > 0 off P near P", pos));
            let radius = crate::certify::rat_sqrt_lower(&eff);
            let lie_res = if strict {
                check_punctured_positivity(&-&lie, &eff)
            } else {
                check_on_ball(&lie, Rel::Le, &radius, sched.budget, "Lie(v) ≤ 0 near P")
            };
            premises.push(PremiseReport::new(
                if strict {
                    "Lie(v) < 0 off P near P"
                } else {
                    "Lie(v) ≤ 0 near P"
                },
                lie_res,
            ));
            let origin = vec![rat::zero(); v.nvars()];
            let vb = v.eval(&origin);
            premises.push(PremiseReport::new(
                "v ≤ 0 on ∂P",
                if vb <= rat::zero() {
                    CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
                } else {
                    CheckResult::Disproved {
                        witness: origin,
                        violated: "v ≤ 0 on ∂P".to_string(),
                    }
                },
            ));
        }
        TargetSet::Formula { formula, .. } => {
            formula_premises(ode, formula, v, strict, sched, &mut premises, &mut notes)?;
        }
    }

    Ok(CertificationReport::assemble(
        property,
        rule,
        premises,
        Witnesses::default(),
        notes,
    ))
}

/// Premises for a compact formula target (single sublevel atom `p ≤ 0`,
/// or the trivial formula).
fn formula_premises(
    ode: &OdeSystem,
    formula: &SemiAlgebraicFormula,
    v: &Polynomial,
    strict: bool,
    sched: &Schedules,
    premises: &mut Vec<PremiseReport>,
    notes: &mut Vec<String>,
) -> Result<(), RuleError> {
    use SemiAlgebraicFormula as F;
    if matches!(formula, F::True) {
        // ¬P and ∂P are empty; invariance alone decides.
        premises.push(PremiseReport::new(
            "v > 0 off P",
            CheckResult::Proved(ProofEvidence::method(ProofMethod::Vacuous)),
        ));
        premises.push(PremiseReport::new(
            "Lie(v) sign off P",
            CheckResult::Proved(ProofEvidence::method(ProofMethod::Vacuous)),
        ));
        premises.push(PremiseReport::new(
            "v ≤ 0 on ∂P",
            CheckResult::Proved(ProofEvidence::method(ProofMethod::Vacuous)),
        ));
        return Ok(());
    }
    let atom = match formula {
        F::Atom(a) if a.rel == Rel::Le => a.clone(),
        _ => {
            premises.push(PremiseReport::new(
                "target shape",
                CheckResult::unsupported(
                    "compact formula targets must be a single sublevel atom p ≤ 0",
                ),
            ));
            return Ok(());
        }
    };
    let p = &atom.poly;
    let radius = match sublevel_bounding_radius(p) {
        Some(r) => &r + &rat::one(),
        None => {
            premises.push(PremiseReport::new(
                "bounding box of U₁(P)",
                CheckResult::unsupported("no top-form bound for the sublevel set"),
            ));
            return Ok(());
        }
    };
    let n = v.nvars();
    let outer = BoxRegion::centered_cube(n, &radius);
    let lie = ode.lie_derivative(v)?;

    // v > 0 off P: syntactic when v is a positive multiple of the
    // defining polynomial (then ¬P = {v > 0} literally).
    let prop = positive_multiple(v, p);
    let pos_res = if let Some(lambda) = &prop {
        let mut ev = ProofEvidence::method(ProofMethod::SyntacticZero);
        ev.notes
            .push(format!("v = {}·p with p defining P", rat::display(lambda)));
        CheckResult::Proved(ev)
    } else {
        let cond = SignCondition::new(
            v.clone(),
            Rel::Gt,
            Region::SetMinus {
                outer: outer.clone(),
                subtracted: formula.clone(),
            },
        );
        check_sign_bb(&cond, sched.budget)
    };
    premises.push(PremiseReport::new("v > 0 off P (within box)", pos_res));

    let lie_rel = if strict { Rel::Lt } else { Rel::Le };
    let lie_cond = SignCondition::new(
        lie,
        lie_rel,
        Region::SetMinus {
            outer: outer.clone(),
            subtracted: formula.clone(),
        },
    );
    premises.push(PremiseReport::new(
        if strict {
            "Lie(v) < 0 off P (within box)"
        } else {
            "Lie(v) ≤ 0 off P (within box)"
        },
        check_sign_bb(&lie_cond, sched.budget),
    ));

    // v ≤ 0 on ∂P = {p = 0}.
    let bd_res = if prop.is_some() {
        CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
    } else {
        match prove_sign_on(
            v,
            Rel::Le,
            &outer,
            &RegionFilter::LevelSet {
                poly: p.clone(),
                level: rat::zero(),
            },
            &BbConfig::with_budget(sched.budget),
        ) {
            BbOutcome::Proved { boxes, margin } => {
                let mut ev = ProofEvidence::method(ProofMethod::IntervalBranchBound);
                ev.boxes = boxes;
                ev.margin = margin;
                CheckResult::Proved(ev)
            }
            BbOutcome::Disproved { witness } => CheckResult::Disproved {
                witness,
                violated: "v ≤ 0 on ∂P".to_string(),
            },
            BbOutcome::BudgetExhausted { .. } => {
                CheckResult::unknown(UnknownReason::BudgetExhausted)
            }
        }
    };
    premises.push(PremiseReport::new("v ≤ 0 on ∂P", bd_res));
    let _ = notes;
    Ok(())
}

/// Is `v = λ·p` for a positive rational λ?
fn positive_multiple(v: &Polynomial, p: &Polynomial) -> Option<Rat> {
    if v.is_zero() || p.is_zero() {
        return None;
    }
    let (e, c) = p.terms().next()?;
    let vc = v.coeff(e);
    if vc.is_zero() {
        return None;
    }
    let lambda = &vc / c;
    if lambda <= rat::zero() {
        return None;
    }
    if p.scale(&lambda) == *v {
        Some(lambda)
    } else {
        None
    }
}

/// Transverse analysis of the candidate for the general set rule: a
/// homogeneous form in the distance-bearing variables with certified
/// sphere bounds `0 < low ≤ v ≤ high` at unit radius.
struct TransverseForm {
    degree: u32,
    low: Rat,
    high: Rat,
    note: String,
}

fn analyze_transverse(v_t: &Polynomial, budget: u64) -> Result<TransverseForm, CheckResult> {
    if v_t.is_zero() {
        let n = v_t.nvars();
        let mut e1 = vec![rat::zero(); n];
        e1[0] = rat::one();
        return Err(CheckResult::Disproved {
            witness: e1,
            violated: "v > 0 transverse to P".to_string(),
        });
    }
    let comps = v_t.homogeneous_components();
    if comps.len() != 1 {
        return Err(CheckResult::unsupported(
            "candidate is not homogeneous in the transverse variables; \
             no scale-invariant level construction",
        ));
    }
    let (degree, form) = comps.into_iter().next().unwrap();
    if degree == 0 {
        return Err(CheckResult::unsupported("constant candidate"));
    }
    // Diagonal quadratic: exact closed-form sphere extrema.
    if degree == 2 {
        if let Some(gram) = gram_matrix(&form) {
            let diag_only = gram
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, x)| i == j || x.is_zero()));
            if diag_only {
                let mut lo = gram[0][0].clone();
                let mut hi = gram[0][0].clone();
                for i in 1..gram.len() {
                    if gram[i][i] < lo {
                        lo = gram[i][i].clone();
                    }
                    if gram[i][i] > hi {
                        hi = gram[i][i].clone();
                    }
                }
                if lo <= rat::zero() {
                    return Err(diagonal_nonpositive_witness(&gram, &form));
                }
                return Ok(TransverseForm {
                    degree,
                    low: lo,
                    high: hi,
                    note: "diagonal form: exact sphere extrema".to_string(),
                });
            }
            let (lo, hi) = sphere_value_bounds(&gram, 60);
            if lo > rat::zero() {
                return Ok(TransverseForm {
                    degree,
                    low: lo,
                    high: hi,
                    note: "quadratic form: certified sphere bounds".to_string(),
                });
            }
            return Err(match crate::certify::quadform::psd_analysis(&gram) {
                crate::certify::quadform::PsdOutcome::NotPsd { witness } => {
                    CheckResult::Disproved {
                        witness,
                        violated: "v > 0 transverse to P".to_string(),
                    }
                }
                crate::certify::quadform::PsdOutcome::SemidefiniteSingular { kernel_vector } => {
                    CheckResult::Disproved {
                        witness: kernel_vector,
                        violated: "v > 0 transverse to P".to_string(),
                    }
                }
                crate::certify::quadform::PsdOutcome::PositiveDefinite => {
                    CheckResult::unknown(UnknownReason::BudgetExhausted)
                }
            });
        }
    }
    // Even-degree homogeneous: shell branch-and-bound for the lower
    // bound, coefficient norm for the upper bound.
    let outer = BoxRegion::centered_cube(v_t.nvars(), &rat::one());
    let filter = RegionFilter::Shell {
        vars: (0..v_t.nvars()).collect(),
        r2_min: rat::frac(1, 4),
        r2_max: rat::one(),
    };
    match prove_sign_on(&form, Rel::Gt, &outer, &filter, &BbConfig::with_budget(budget)) {
        BbOutcome::Proved {
            margin: Some(m), ..
        } if m > rat::zero() => Ok(TransverseForm {
            degree,
            low: m,
            high: form.coeff_l1(),
            note: "homogeneous form: shell margin and coefficient bound".to_string(),
        }),
        BbOutcome::Disproved { witness } => Err(CheckResult::Disproved {
            witness,
            violated: "v > 0 transverse to P".to_string(),
        }),
        _ => Err(CheckResult::unknown(UnknownReason::BudgetExhausted)),
    }
}

fn diagonal_nonpositive_witness(
    gram: &crate::certify::quadform::Gram,
    form: &Polynomial,
) -> CheckResult {
    let n = gram.len();
    for i in 0..n {
        if gram[i][i] <= rat::zero() {
            let mut w = vec![rat::zero(); n];
            w[i] = rat::one();
            debug_assert!(form.eval(&w) <= rat::zero());
            return CheckResult::Disproved {
                witness: w,
                violated: "v > 0 transverse to P".to_string(),
            };
        }
    }
    CheckResult::unknown(UnknownReason::BudgetExhausted)
}

/// General set Lyapunov rule for origin or coordinate-subspace targets.
///
/// For a candidate that is a homogeneous positive form in the transverse
/// variables the level construction scales: with sphere bounds
/// `low ≤ v ≤ high` at unit radius, every ε admits γ := min(ε, γ₀),
/// level k = low·γ^m on the γ-boundary and δ = γ/2^j with
/// `high/2^{j·m} < low`, so the premise holds for all ε, not just the
/// scheduled entries. `Lie(v) ≤ 0` is checked once on the largest γ and
/// holds on every smaller region by inclusion.
pub fn vc_set_lyap_general(
    ode: &OdeSystem,
    target: &TargetSet,
    v: &Polynomial,
    sched: &Schedules,
) -> Result<CertificationReport, RuleError> {
    ensure_param_free(ode)?;
    check_candidate_vars(ode, v)?;
    let transverse = match target.transverse_vars(ode.vars()) {
        Some(t) => t,
        None => {
            return Err(RuleError::InvalidInput(
                "general set rule needs an origin or coordinate-subspace target".into(),
            ))
        }
    };
    let property = StabilityProperty::SetStab(target.clone());
    let rule = "set-lyapunov-general";
    let mut notes = Vec::new();

    let inv = invariance_check(ode, target);
    if inv.is_disproved() {
        notes.push("invariance gate failed; remaining premises skipped".to_string());
        return Ok(CertificationReport::assemble(
            property,
            rule,
            vec![PremiseReport::new("P invariant", inv)],
            Witnesses::default(),
            notes,
        ));
    }
    let mut premises = vec![PremiseReport::new("P invariant", inv)];

    // The candidate must measure distance to P: only transverse
    // variables may occur.
    let v_t = match v.project(&transverse) {
        Some(p) => p,
        None => {
            premises.push(PremiseReport::new(
                "v depends only on the transverse variables",
                CheckResult::unsupported(
                    "candidate mentions variables along P; no compact level construction",
                ),
            ));
            return Ok(CertificationReport::assemble(
                property,
                rule,
                premises,
                Witnesses::default(),
                notes,
            ));
        }
    };

    let analysis = match analyze_transverse(&v_t, sched.budget) {
        Ok(a) => a,
        Err(res) => {
            let res = embed_witness(res, &transverse, ode.vars().len());
            premises.push(PremiseReport::new(
                "separating level exists (v ≥ k on ∂U_γ(P), v < k near P)",
                res,
            ));
            return Ok(CertificationReport::assemble(
                property,
                rule,
                premises,
                Witnesses::default(),
                notes,
            ));
        }
    };
    notes.push(analysis.note.clone());

    let gamma0 = sched
        .eps
        .first()
        .cloned()
        .unwrap_or_else(rat::one);
    let m = analysis.degree;
    let level = &analysis.low * &rat::pow(&gamma0, m);
    // δ = γ/2^j with high/2^{j·m} < low.
    let mut j = 1u32;
    let mut shrink = rat::pow(&rat::frac(1, 2), m);
    while &analysis.high * &shrink >= analysis.low && j < 64 {
        j += 1;
        shrink = rat::pow(&rat::frac(1, 2), j * m);
    }
    if j >= 64 {
        premises.push(PremiseReport::new(
            "δ construction",
            CheckResult::unknown(UnknownReason::BudgetExhausted),
        ));
        return Ok(CertificationReport::assemble(
            property,
            rule,
            premises,
            Witnesses::default(),
            notes,
        ));
    }
    let delta = &gamma0 / &rat::pow(&rat::int(2), j);

    let mut bd = ProofEvidence::method(if m == 2 {
        ProofMethod::QuadraticForm
    } else {
        ProofMethod::HomogeneousDominance
    });
    bd.margin = Some(analysis.low.clone());
    bd.notes.push(format!(
        "k(γ) = {}·γ^{} by homogeneity",
        rat::display(&analysis.low),
        m
    ));
    premises.push(PremiseReport::new(
        "v ≥ k on ∂U_γ(P)",
        CheckResult::Proved(bd),
    ));

    let mut nd = ProofEvidence::method(ProofMethod::HomogeneousDominance);
    nd.notes.push(format!(
        "v ≤ {}·dist^{} gives v < k on U_δ(P) ∖ P with δ(γ) = γ/2^{}",
        rat::display(&analysis.high),
        m,
        j
    ));
    premises.push(PremiseReport::new(
        "v < k on U_δ(P) ∖ P for some 0 < δ ≤ γ",
        CheckResult::Proved(nd),
    ));

    // Lie(v) ≤ 0 on closure(U_γ(P)) ∖ P at the largest scheduled γ;
    // smaller γ regions are subsets.
    let lie = ode.lie_derivative(v)?;
    let lie_res = if lie.is_zero() {
        CheckResult::Proved(ProofEvidence::method(ProofMethod::SyntacticZero))
    } else if let Some(lie_t) = lie.project(&transverse) {
        match check_on_ball(
            &lie_t,
            Rel::Le,
            &gamma0,
            sched.budget,
            "Lie(v) ≤ 0 on closure(U_γ(P)) ∖ P",
        ) {
            CheckResult::Disproved { witness, violated } => CheckResult::Disproved {
                witness: embed_point(&witness, &transverse, ode.vars().len()),
                violated,
            },
            other => other,
        }
    } else {
        CheckResult::unsupported(
            "Lie(v) depends on variables along P; no compact region for the decrease premise",
        )
    };
    premises.push(PremiseReport::new(
        "Lie(v) ≤ 0 on closure(U_γ(P)) ∖ P",
        lie_res,
    ));

    for eps in sched.eps.iter().take(4) {
        let g = if eps < &gamma0 { eps.clone() } else { gamma0.clone() };
        notes.push(format!(
            "ε = {}: γ = {}, k = {}, δ = {}",
            rat::display(eps),
            rat::display(&g),
            rat::display(&(&analysis.low * &rat::pow(&g, m))),
            rat::display(&(&g / &rat::pow(&rat::int(2), j)))
        ));
    }
    notes.push(
        "scale invariance extends the scheduled entries to every ε > 0 (γ := min(ε, γ₀))"
            .to_string(),
    );

    let witnesses = Witnesses {
        gamma: Some(gamma0),
        delta: Some(delta),
        level: Some(level),
        ..Default::default()
    };
    Ok(CertificationReport::assemble(
        property, rule, premises, witnesses, notes,
    ))
}

fn embed_witness(res: CheckResult, transverse: &[usize], n: usize) -> CheckResult {
    match res {
        CheckResult::Disproved { witness, violated } => CheckResult::Disproved {
            witness: embed_point(&witness, transverse, n),
            violated,
        },
        other => other,
    }
}

fn embed_point(pt: &[Rat], transverse: &[usize], n: usize) -> Vec<Rat> {
    let mut full = vec![rat::zero(); n];
    for (k, &i) in transverse.iter().enumerate() {
        full[i] = pt[k].clone();
    }
    full
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Verdict;
    use crate::symbolic::rat::{frac, int};
    use crate::symbolic::VarSet;

    /// Rigid-body rotation with inertias (3, 2, 1), instantiated.
    fn rigid_body() -> OdeSystem {
        let vars = VarSet::states(vec!["x1", "x2", "x3"]);
        let n = 3;
        let x1 = Polynomial::var(n, 0);
        let x2 = Polynomial::var(n, 1);
        let x3 = Polynomial::var(n, 2);
        // (I2-I3)/I1 = 1/3, (I3-I1)/I2 = -1, (I1-I2)/I3 = 1
        let rhs = vec![
            (&x2 * &x3).scale(&frac(1, 3)),
            (&x3 * &x1).scale(&int(-1)),
            &x1 * &x2,
        ];
        OdeSystem::new(vars, rhs, None).unwrap()
    }

    #[test]
    fn compact_rule_refuses_subspace() {
        let ode = rigid_body();
        let target = TargetSet::subspace(vec![1, 2], ode.vars()).unwrap();
        let v = Polynomial::sum_of_squares(3, &[1, 2]).scale(&frac(1, 2));
        let err = vc_set_lyap(&ode, &target, &v, false, &Schedules::default());
        assert!(matches!(err, Err(RuleError::NonCompactTarget(_))));
    }

    #[test]
    fn general_rule_certifies_first_axis() {
        let ode = rigid_body();
        let target = TargetSet::subspace(vec![1, 2], ode.vars()).unwrap();
        // v = (x2² + x3²)/2, the instantiated paper candidate.
        let v = Polynomial::sum_of_squares(3, &[1, 2]).scale(&frac(1, 2));
        let r = vc_set_lyap_general(&ode, &target, &v, &Schedules::default()).unwrap();
        assert!(r.is_certified(), "report: {:?}", r.verdict);
        assert_eq!(r.witnesses.level, Some(frac(1, 2)));
        assert_eq!(r.witnesses.delta, Some(frac(1, 2)));
    }

    #[test]
    fn general_rule_rejects_indefinite_candidate() {
        let ode = rigid_body();
        let target = TargetSet::subspace(vec![0, 2], ode.vars()).unwrap();
        // Indefinite in the transverse variables (x1, x3).
        let v = &Polynomial::var(3, 0).pow(2).scale(&frac(1, 6))
            - &Polynomial::var(3, 2).pow(2).scale(&frac(1, 2));
        let r = vc_set_lyap_general(&ode, &target, &v, &Schedules::default()).unwrap();
        assert!(matches!(r.verdict, Verdict::Refuted { .. }));
    }

    #[test]
    fn sublevel_target_certifies_nonstrict() {
        // x' = -x, P = {x² - 1 ≤ 0}, v = x² - 1.
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![x.scale(&int(-1))], None).unwrap();
        let p = &Polynomial::var(1, 0).pow(2) - &Polynomial::one(1);
        let target = TargetSet::Formula {
            formula: SemiAlgebraicFormula::atom(p.clone(), Rel::Le),
            compact: true,
        };
        let r = vc_set_lyap(&ode, &target, &p, false, &Schedules::default()).unwrap();
        assert!(r.is_certified(), "verdict {:?}", r.verdict);
    }

    #[test]
    fn whole_space_target_reduces_to_invariance() {
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![x], None).unwrap();
        let target = TargetSet::Formula {
            formula: SemiAlgebraicFormula::True,
            compact: true,
        };
        let v = Polynomial::zero(1);
        let r = vc_set_lyap(&ode, &target, &v, false, &Schedules::default()).unwrap();
        assert!(r.is_certified());
    }

    #[test]
    fn invariance_gate_reports_refuted_first() {
        // x' = 1 does not keep {x = 0} invariant.
        let vars = VarSet::states(vec!["x"]);
        let ode = OdeSystem::new(vars, vec![Polynomial::one(1)], None).unwrap();
        let target = TargetSet::Origin;
        let v = Polynomial::var(1, 0).pow(2);
        let r = vc_set_lyap(&ode, &target, &v, false, &Schedules::default()).unwrap();
        assert_eq!(r.premises.len(), 1);
        assert!(matches!(r.verdict, Verdict::Refuted { .. }));
    }
}
