//! Exact definiteness analysis of rational quadratic forms.
//!
//! The test is a symmetric elimination (LDLᵀ) with diagonal pivoting,
//! carried out over the rationals. A congruence transform is tracked
//! column-by-column so that every negative answer comes with an explicit
//! rational vector on which the form takes the offending value.

use crate::symbolic::rat::{self, Rat};
use crate::symbolic::Polynomial;

/// Symmetric rational matrix, dense.
pub type Gram = Vec<Vec<Rat>>;

/// Extracts the Gram matrix of a homogeneous quadratic form over its
/// full variable table. Returns `None` for anything that is not a
/// quadratic form (the zero polynomial counts as one).
pub fn gram_matrix(q: &Polynomial) -> Option<Gram> {
    if !q.is_zero() && !q.is_quadratic_form() {
        return None;
    }
    let n = q.nvars();
    let mut g = vec![vec![rat::zero(); n]; n];
    for (exps, coeff) in q.terms() {
        let idx: Vec<usize> = exps
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, _)| i)
            .collect();
        match idx.as_slice() {
            [i] => g[*i][*i] = coeff.clone(),
            [i, j] => {
                let half = coeff / rat::int(2);
                g[*i][*j] = half.clone();
                g[*j][*i] = half;
            }
            _ => unreachable!("degree-two term has one or two variables"),
        }
    }
    Some(g)
}

/// Outcome of the positive-semidefiniteness analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsdOutcome {
    /// All pivots positive with full rank.
    PositiveDefinite,
    /// PSD with nontrivial kernel; the vector satisfies `q(v) = 0`.
    SemidefiniteSingular { kernel_vector: Vec<Rat> },
    /// Not PSD; the vector satisfies `q(v) < 0` exactly.
    NotPsd { witness: Vec<Rat> },
}

/// Decides positive (semi)definiteness of a symmetric rational matrix.
pub fn psd_analysis(gram: &Gram) -> PsdOutcome {
    let n = gram.len();
    let mut m: Gram = gram.clone();
    // Congruence columns in original coordinates: m = Cᵀ·gram·C on the
    // active block, so m[i][i] is the exact form value at column i.
    let mut cols: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut e = vec![rat::zero(); n];
            e[i] = rat::one();
            e
        })
        .collect();

    for k in 0..n {
        // Largest remaining diagonal entry as pivot.
        let mut best = k;
        for i in k + 1..n {
            if m[i][i] > m[best][best] {
                best = i;
            }
        }
        if m[best][best] > rat::zero() {
            if best != k {
                m.swap(k, best);
                for row in m.iter_mut() {
                    row.swap(k, best);
                }
                cols.swap(k, best);
            }
            let d = m[k][k].clone();
            let factors: Vec<Rat> = (k + 1..n).map(|j| &m[k][j] / &d).collect();
            for (off, f) in factors.iter().enumerate() {
                if num_traits::Zero::is_zero(f) {
                    continue;
                }
                let j = k + 1 + off;
                let ck = cols[k].clone();
                for (cj, ckv) in cols[j].iter_mut().zip(&ck) {
                    *cj -= f * ckv;
                }
            }
            for r in k + 1..n {
                for c in k + 1..n {
                    let delta = &m[r][k] * &m[k][c] / &d;
                    m[r][c] = &m[r][c] - &delta;
                }
            }
            for j in k + 1..n {
                m[k][j] = rat::zero();
                m[j][k] = rat::zero();
            }
            continue;
        }
        // Max diagonal ≤ 0 on the remaining block.
        for i in k..n {
            if m[i][i] < rat::zero() {
                return PsdOutcome::NotPsd {
                    witness: cols[i].clone(),
                };
            }
        }
        // All remaining diagonals are zero: PSD forces the block to be
        // zero, otherwise a 2×2 hyperbolic block yields a witness.
        for i in k..n {
            for j in i + 1..n {
                if !num_traits::Zero::is_zero(&m[i][j]) {
                    let sign_pos = m[i][j] > rat::zero();
                    let mut w = cols[i].clone();
                    for (wv, cj) in w.iter_mut().zip(&cols[j]) {
                        if sign_pos {
                            *wv -= cj;
                        } else {
                            *wv += cj;
                        }
                    }
                    return PsdOutcome::NotPsd { witness: w };
                }
            }
        }
        return PsdOutcome::SemidefiniteSingular {
            kernel_vector: cols[k].clone(),
        };
    }
    PsdOutcome::PositiveDefinite
}

/// `gram(a) - λ·gram(b)` for the shift bisections.
fn shift(a: &Gram, lambda: &Rat, b: &Gram) -> Gram {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| x - &(lambda * y))
                .collect()
        })
        .collect()
}

fn identity(n: usize) -> Gram {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { rat::one() } else { rat::zero() })
                .collect()
        })
        .collect()
}

fn is_psd(g: &Gram) -> bool {
    !matches!(psd_analysis(g), PsdOutcome::NotPsd { .. })
}

/// Gershgorin bounds enclosing all eigenvalues of a symmetric matrix.
fn gershgorin(g: &Gram) -> (Rat, Rat) {
    let n = g.len();
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for i in 0..n {
        let mut radius = rat::zero();
        for j in 0..n {
            if j != i {
                radius += rat::abs(&g[i][j]);
            }
        }
        let l = &g[i][i] - &radius;
        let h = &g[i][i] + &radius;
        lo = Some(match lo {
            None => l,
            Some(cur) => {
                if l < cur {
                    l
                } else {
                    cur
                }
            }
        });
        hi = Some(match hi {
            None => h,
            Some(cur) => {
                if h > cur {
                    h
                } else {
                    cur
                }
            }
        });
    }
    (lo.unwrap_or_else(rat::zero), hi.unwrap_or_else(rat::zero))
}

/// Certified rational bounds `(lo, hi)` on the values of the quadratic
/// form on the unit sphere: `q - lo·I` and `hi·I - q` are both PSD, so
/// `lo·‖x‖² ≤ q(x) ≤ hi·‖x‖²` for all `x`. Obtained by dyadic bisection
/// from exact Gershgorin enclosures.
pub fn sphere_value_bounds(gram: &Gram, iters: u32) -> (Rat, Rat) {
    let n = gram.len();
    let id = identity(n);
    let (glo, ghi) = gershgorin(gram);

    // Largest λ with q - λI PSD; Gershgorin's glo is always feasible.
    let mut feas_lo = glo.clone();
    let mut infeas_lo = ghi.clone();
    for _ in 0..iters {
        let mid = rat::midpoint(&feas_lo, &infeas_lo);
        if is_psd(&shift(gram, &mid, &id)) {
            feas_lo = mid;
        } else {
            infeas_lo = mid;
        }
    }

    // Smallest μ with μI - q PSD: largest ν with (-q) - νI PSD, μ = -ν.
    let neg: Gram = gram
        .iter()
        .map(|r| r.iter().map(|x| -x.clone()).collect())
        .collect();
    let mut feas_hi = -ghi;
    let mut infeas_hi = -glo;
    for _ in 0..iters {
        let mid = rat::midpoint(&feas_hi, &infeas_hi);
        if is_psd(&shift(&neg, &mid, &id)) {
            feas_hi = mid;
        } else {
            infeas_hi = mid;
        }
    }
    (feas_lo, -feas_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{frac, int};

    fn form(coeffs: &[(usize, usize, Rat)], n: usize) -> Polynomial {
        let mut p = Polynomial::zero(n);
        for (i, j, c) in coeffs {
            let t = &Polynomial::var(n, *i) * &Polynomial::var(n, *j);
            p = &p + &t.scale(c);
        }
        p
    }

    #[test]
    fn identity_form_is_pd() {
        let q = Polynomial::sum_of_squares(2, &[0, 1]);
        let g = gram_matrix(&q).unwrap();
        assert_eq!(psd_analysis(&g), PsdOutcome::PositiveDefinite);
    }

    #[test]
    fn hyperbolic_form_has_exact_witness() {
        // x1² - x2²: indefinite, witness must evaluate negative.
        let q = form(&[(0, 0, int(1)), (1, 1, int(-1))], 2);
        let g = gram_matrix(&q).unwrap();
        match psd_analysis(&g) {
            PsdOutcome::NotPsd { witness } => {
                assert!(q.eval(&witness) < int(0));
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn rank_deficient_psd_yields_kernel_vector() {
        // (x1 - x2)² = x1² - 2x1x2 + x2²
        let q = form(&[(0, 0, int(1)), (0, 1, int(-2)), (1, 1, int(1))], 2);
        let g = gram_matrix(&q).unwrap();
        match psd_analysis(&g) {
            PsdOutcome::SemidefiniteSingular { kernel_vector } => {
                assert_eq!(q.eval(&kernel_vector), int(0));
                assert!(kernel_vector.iter().any(|v| *v != int(0)));
            }
            other => panic!("expected singular PSD, got {other:?}"),
        }
    }

    #[test]
    fn pendulum_candidate_gram_is_pd() {
        // 3/4·θ² + 1/2·θω + 1/2·ω², Gram [[3/4,1/4],[1/4,1/2]].
        let q = form(
            &[(0, 0, frac(3, 4)), (0, 1, frac(1, 2)), (1, 1, frac(1, 2))],
            2,
        );
        let g = gram_matrix(&q).unwrap();
        assert_eq!(g[0][0], frac(3, 4));
        assert_eq!(g[0][1], frac(1, 4));
        assert_eq!(psd_analysis(&g), PsdOutcome::PositiveDefinite);
    }

    #[test]
    fn off_diagonal_zero_block_witness() {
        // 2·x1x2 alone: diagonal zero, off-diagonal nonzero.
        let q = form(&[(0, 1, int(2))], 2);
        let g = gram_matrix(&q).unwrap();
        match psd_analysis(&g) {
            PsdOutcome::NotPsd { witness } => assert!(q.eval(&witness) < int(0)),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn sphere_bounds_bracket_eigenvalues() {
        // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
        let q = form(&[(0, 0, int(2)), (0, 1, int(2)), (1, 1, int(2))], 2);
        let g = gram_matrix(&q).unwrap();
        let (lo, hi) = sphere_value_bounds(&g, 40);
        assert!(lo <= int(1) && lo > frac(9, 10));
        assert!(hi >= int(3) && hi < frac(31, 10));
    }

    #[test]
    fn non_quadratic_rejected() {
        let p = Polynomial::var(1, 0).pow(3);
        assert!(gram_matrix(&p).is_none());
        let q = &Polynomial::var(1, 0) + &Polynomial::one(1);
        assert!(gram_matrix(&q).is_none());
    }
}
