//! Property suites over the symbolic and certification layers.

use proptest::prelude::*;

use stabcert_core::certify::{
    check_quadratic_form, check_sign_bb, falsify, interval::BoxRegion, interval::RatInterval,
    CheckResult, DefinitenessMode, Region, SignCondition,
};
use stabcert_core::symbolic::rat::{self, Rat};
use stabcert_core::symbolic::{
    neighborhood, OdeSystem, Polynomial, Radius, Rel, SemiAlgebraicFormula, TargetSet, VarSet,
};

const NVARS: usize = 4;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat::frac(n, d))
}

/// Sparse polynomial over 4 variables with total degree ≤ 4.
fn poly() -> impl Strategy<Value = Polynomial> {
    let term = (proptest::collection::vec(0u32..=2, NVARS), small_rat()).prop_filter_map(
        "degree cap",
        |(exps, c)| {
            if exps.iter().sum::<u32>() <= 4 {
                Some((exps, c))
            } else {
                None
            }
        },
    );
    proptest::collection::vec(term, 0..6)
        .prop_map(|terms| Polynomial::from_terms(NVARS, terms))
}

fn point() -> impl Strategy<Value = Vec<Rat>> {
    proptest::collection::vec(small_rat(), NVARS)
}

fn random_ode() -> impl Strategy<Value = OdeSystem> {
    proptest::collection::vec(poly(), NVARS).prop_map(|rhs| {
        let vars = VarSet::states(vec!["x1", "x2", "x3", "x4"]);
        OdeSystem::new(vars, rhs, None).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ring_addition_is_associative_and_commutative(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&p + &q, &q + &p);
    }

    #[test]
    fn ring_multiplication_distributes(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&p * &q, &q * &p);
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(p in poly(), q in poly(), x in point()) {
        prop_assert_eq!((&p + &q).eval(&x), p.eval(&x) + q.eval(&x));
        prop_assert_eq!((&p * &q).eval(&x), p.eval(&x) * q.eval(&x));
    }

    #[test]
    fn lie_derivative_satisfies_leibniz(ode in random_ode(), p in poly(), q in poly()) {
        let lhs = ode.lie_derivative(&(&p * &q)).unwrap();
        let rhs = &(&ode.lie_derivative(&p).unwrap() * &q)
            + &(&p * &ode.lie_derivative(&q).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lie_derivative_is_linear(ode in random_ode(), p in poly(), q in poly(), c in small_rat()) {
        let lhs = ode.lie_derivative(&(&p.scale(&c) + &q)).unwrap();
        let rhs = &ode.lie_derivative(&p).unwrap().scale(&c) + &ode.lie_derivative(&q).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

fn formula() -> impl Strategy<Value = SemiAlgebraicFormula> {
    let rel = prop_oneof![
        Just(Rel::Ge),
        Just(Rel::Gt),
        Just(Rel::Le),
        Just(Rel::Lt),
        Just(Rel::Eq),
    ];
    let atom = (poly(), rel).prop_map(|(p, r)| SemiAlgebraicFormula::atom(p, r));
    atom.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| SemiAlgebraicFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SemiAlgebraicFormula::or(a, b)),
            inner.prop_map(SemiAlgebraicFormula::not),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn syntactic_closure_is_idempotent(f in formula()) {
        // Negated equations produce ≠ atoms, which closure rejects.
        prop_assume!(!f.nnf().contains_ne());
        let c1 = f.syntactic_closure().unwrap();
        let c2 = c1.syntactic_closure().unwrap();
        prop_assert_eq!(c1, c2);
    }

    #[test]
    fn closure_is_weaker_pointwise(f in formula(), x in point()) {
        prop_assume!(!f.nnf().contains_ne());
        // Closure can only add points, never remove them.
        let c = f.syntactic_closure().unwrap();
        if f.holds_at(&x) {
            prop_assert!(c.holds_at(&x));
        }
    }

    #[test]
    fn nnf_preserves_truth(f in formula(), x in point()) {
        prop_assert_eq!(f.holds_at(&x), f.nnf().holds_at(&x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neighborhood_is_monotone_in_radius(x in point(), e1 in 1i64..=8, e2 in 1i64..=8) {
        prop_assume!(e1 < e2);
        let vars = VarSet::states(vec!["x1", "x2", "x3", "x4"]);
        let n1 = neighborhood(&TargetSet::Origin, &Radius::Const(rat::frac(e1, 4)), &vars).unwrap();
        let n2 = neighborhood(&TargetSet::Origin, &Radius::Const(rat::frac(e2, 4)), &vars).unwrap();
        if n1.holds_at(&x) {
            prop_assert!(n2.holds_at(&x));
        }
    }
}

/// Random symmetric Gram matrix as a quadratic form over `dim` vars.
fn quad_form(dim: usize) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec(small_rat(), dim * (dim + 1) / 2).prop_map(move |coeffs| {
        let mut p = Polynomial::zero(dim);
        let mut it = coeffs.into_iter();
        for i in 0..dim {
            for j in i..dim {
                let c = it.next().unwrap();
                let term = &Polynomial::var(dim, i) * &Polynomial::var(dim, j);
                p = &p + &term.scale(&c);
            }
        }
        p
    })
}

/// Jacobi eigenvalue iteration for small symmetric matrices; the float
/// oracle lives only in tests.
fn eigenvalues_sym(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _ in 0..200 {
        // Largest off-diagonal element.
        let (mut p, mut q, mut max) = (0, 1, 0.0f64);
        for i in 0..n {
            for j in i + 1..n {
                if a[i][j].abs() > max {
                    max = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if max < 1e-13 {
            break;
        }
        let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let (ap, aq): (Vec<f64>, Vec<f64>) = (a[p].clone(), a[q].clone());
        for k in 0..n {
            a[p][k] = c * ap[k] - s * aq[k];
            a[q][k] = s * ap[k] + c * aq[k];
        }
        for k in 0..n {
            let (akp, akq) = (a[k][p], a[k][q]);
            a[k][p] = c * akp - s * akq;
            a[k][q] = s * akp + c * akq;
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn gram_to_f64(q: &Polynomial, dim: usize) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; dim]; dim];
    for (exps, coeff) in q.terms() {
        let idx: Vec<usize> = exps
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, _)| i)
            .collect();
        let c = rat::to_f64(coeff);
        match idx.as_slice() {
            [i] => g[*i][*i] = c,
            [i, j] => {
                g[*i][*j] = c / 2.0;
                g[*j][*i] = c / 2.0;
            }
            _ => unreachable!(),
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// The exact PSD test agrees with a float eigenvalue oracle whenever
    /// the minimum eigenvalue is clearly away from zero.
    #[test]
    fn quadratic_checker_agrees_with_eigenvalue_oracle(q in quad_form(4)) {
        let lam_min = eigenvalues_sym(&gram_to_f64(&q, 4))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let exact = check_quadratic_form(&q, DefinitenessMode::Psd);
        if lam_min > 1e-6 {
            prop_assert!(exact.is_proved(), "λ_min = {lam_min} but exact said {exact:?}");
        }
        if lam_min < -1e-6 {
            prop_assert!(exact.is_disproved(), "λ_min = {lam_min} but exact said {exact:?}");
        }
        // Disproof witnesses always re-verify exactly.
        if let CheckResult::Disproved { witness, .. } = &exact {
            prop_assert!(q.eval(witness) <= rat::zero());
        }
    }

    /// Branch-and-bound agrees with the exact form test up to Unknown,
    /// and enlarging the budget never flips a definite answer.
    #[test]
    fn bb_agrees_with_form_test_up_to_unknown(q in quad_form(3)) {
        let form = check_quadratic_form(&q, DefinitenessMode::Psd);
        let bx = BoxRegion::centered_cube(3, &rat::int(1));
        let cond = SignCondition::new(q.clone(), Rel::Ge, Region::Box(bx));
        let small = check_sign_bb(&cond, 500);
        let large = check_sign_bb(&cond, 20_000);
        for bb in [&small, &large] {
            match (&form, bb) {
                (CheckResult::Proved(_), CheckResult::Disproved { .. }) => {
                    prop_assert!(false, "bb disproved a PSD form");
                }
                (CheckResult::Disproved { .. }, CheckResult::Proved(_)) => {
                    prop_assert!(false, "bb proved a non-PSD form");
                }
                _ => {}
            }
        }
        // Budget monotonicity: definite answers never flip.
        match (&small, &large) {
            (CheckResult::Proved(_), CheckResult::Disproved { .. })
            | (CheckResult::Disproved { .. }, CheckResult::Proved(_)) => {
                prop_assert!(false, "budget flip: {small:?} vs {large:?}");
            }
            _ => {}
        }
    }

    /// Sampling can never contradict a Proved branch-and-bound result.
    #[test]
    fn falsification_respects_proved(q in quad_form(2), seed in 0u64..1000) {
        let bx = BoxRegion::new(vec![
            RatInterval::new(rat::frac(-3, 2), rat::one()),
            RatInterval::new(rat::frac(-1, 2), rat::int(2)),
        ]);
        let cond = SignCondition::new(q, Rel::Ge, Region::Box(bx));
        if check_sign_bb(&cond, 20_000).is_proved() {
            prop_assert!(falsify(&cond, 500, seed).is_none());
        }
    }
}
