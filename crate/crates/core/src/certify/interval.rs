//! Closed rational intervals and interval evaluation of polynomials
//! over boxes. Endpoints are exact rationals, so no directed rounding
//! is involved anywhere.


use crate::symbolic::rat::{self, Rat};
use crate::symbolic::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl RatInterval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        RatInterval { lo, hi }
    }

    pub fn point(v: Rat) -> Self {
        RatInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn contains(&self, v: &Rat) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= rat::zero() && rat::zero() <= self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        rat::midpoint(&self.lo, &self.hi)
    }

    pub fn add(&self, other: &Self) -> Self {
        RatInterval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c >= &rat::zero() {
            RatInterval::new(&self.lo * c, &self.hi * c)
        } else {
            RatInterval::new(&self.hi * c, &self.lo * c)
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        RatInterval::new(lo, hi)
    }

    /// Tight power: even exponents of sign-changing intervals produce a
    /// zero lower bound instead of the naive product bound. This
    /// tightening is what lets `x² ≥ 0` certify at depth zero.
    pub fn pow(&self, k: u32) -> Self {
        if k == 0 {
            return RatInterval::point(rat::one());
        }
        if k == 1 {
            return self.clone();
        }
        let plo = rat::pow(&self.lo, k);
        let phi = rat::pow(&self.hi, k);
        if k % 2 == 1 {
            RatInterval::new(plo, phi)
        } else if self.lo >= rat::zero() {
            RatInterval::new(plo, phi)
        } else if self.hi <= rat::zero() {
            RatInterval::new(phi, plo)
        } else {
            let hi = if plo > phi { plo } else { phi };
            RatInterval::new(rat::zero(), hi)
        }
    }
}

/// An axis-aligned box: one closed interval per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxRegion {
    pub dims: Vec<RatInterval>,
}

impl BoxRegion {
    pub fn new(dims: Vec<RatInterval>) -> Self {
        BoxRegion { dims }
    }

    /// The cube `[-r, r]^n`.
    pub fn centered_cube(n: usize, r: &Rat) -> Self {
        BoxRegion {
            dims: (0..n)
                .map(|_| RatInterval::new(-r.clone(), r.clone()))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn contains(&self, point: &[Rat]) -> bool {
        point
            .iter()
            .zip(&self.dims)
            .all(|(v, iv)| iv.contains(v))
    }

    /// Index of the widest dimension; ties break toward the lowest
    /// variable index for reproducible subdivision.
    pub fn widest_dim(&self) -> usize {
        let mut best = 0;
        let mut best_w = self.dims[0].width();
        for (i, iv) in self.dims.iter().enumerate().skip(1) {
            let w = iv.width();
            if w > best_w {
                best_w = w;
                best = i;
            }
        }
        best
    }

    /// Bisects along `dim` at the exact midpoint.
    pub fn bisect(&self, dim: usize) -> (BoxRegion, BoxRegion) {
        let mid = self.dims[dim].midpoint();
        let mut lo = self.clone();
        let mut hi = self.clone();
        lo.dims[dim] = RatInterval::new(self.dims[dim].lo.clone(), mid.clone());
        hi.dims[dim] = RatInterval::new(mid, self.dims[dim].hi.clone());
        (lo, hi)
    }

    /// Exact bounds of Σ x_i² over the box, restricted to `vars`.
    pub fn norm2_range(&self, vars: &[usize]) -> RatInterval {
        let mut lo = rat::zero();
        let mut hi = rat::zero();
        for &i in vars {
            let sq = self.dims[i].pow(2);
            lo += sq.lo;
            hi += sq.hi;
        }
        RatInterval::new(lo, hi)
    }

    pub fn corners(&self) -> Vec<Vec<Rat>> {
        let n = self.n();
        let mut out = Vec::with_capacity(1 << n.min(16));
        for mask in 0..(1usize << n) {
            let pt: Vec<Rat> = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 0 {
                        self.dims[i].lo.clone()
                    } else {
                        self.dims[i].hi.clone()
                    }
                })
                .collect();
            out.push(pt);
        }
        out
    }

    pub fn center(&self) -> Vec<Rat> {
        self.dims.iter().map(|iv| iv.midpoint()).collect()
    }
}

/// Interval enclosure of `p` over the box, monomial by monomial with
/// tight even powers.
pub fn eval_poly(p: &Polynomial, bx: &BoxRegion) -> RatInterval {
    let mut acc = RatInterval::point(rat::zero());
    for (exps, coeff) in p.terms() {
        let mut t = RatInterval::point(rat::one());
        for (i, &k) in exps.iter().enumerate() {
            if k > 0 {
                t = t.mul(&bx.dims[i].pow(k));
            }
        }
        acc = acc.add(&t.scale(coeff));
    }
    if acc.lo > acc.hi {
        // Cannot happen with exact endpoint arithmetic; keep the
        // invariant explicit for debug builds.
        unreachable!("interval enclosure inverted");
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{frac, int};

    #[test]
    fn even_power_is_tight_at_zero() {
        let iv = RatInterval::new(int(-2), int(1));
        let sq = iv.pow(2);
        assert_eq!(sq.lo, int(0));
        assert_eq!(sq.hi, int(4));
    }

    #[test]
    fn odd_power_keeps_sign() {
        let iv = RatInterval::new(int(-2), int(1));
        let cb = iv.pow(3);
        assert_eq!(cb.lo, int(-8));
        assert_eq!(cb.hi, int(1));
    }

    #[test]
    fn poly_enclosure_contains_sampled_values() {
        // p = x² - 1/2 on [0, 1]
        let x = Polynomial::var(1, 0);
        let p = &(&x * &x) - &Polynomial::constant(1, frac(1, 2));
        let bx = BoxRegion::new(vec![RatInterval::new(int(0), int(1))]);
        let iv = eval_poly(&p, &bx);
        for k in 0..=4 {
            let v = p.eval(&[frac(k, 4)]);
            assert!(iv.contains(&v));
        }
        assert_eq!(iv.lo, frac(-1, 2));
        assert_eq!(iv.hi, frac(1, 2));
    }

    #[test]
    fn negative_sos_has_zero_upper_bound() {
        // -(x² + y²)/2 over a centered box must have hi = 0 exactly.
        let p = Polynomial::sum_of_squares(2, &[0, 1]).scale(&frac(-1, 2));
        let bx = BoxRegion::centered_cube(2, &int(1));
        let iv = eval_poly(&p, &bx);
        assert_eq!(iv.hi, int(0));
        assert_eq!(iv.lo, int(-1));
    }

    #[test]
    fn bisection_is_exact_and_deterministic() {
        let bx = BoxRegion::new(vec![
            RatInterval::new(int(0), int(4)),
            RatInterval::new(int(0), int(1)),
        ]);
        assert_eq!(bx.widest_dim(), 0);
        let (lo, hi) = bx.bisect(0);
        assert_eq!(lo.dims[0].hi, int(2));
        assert_eq!(hi.dims[0].lo, int(2));
    }
}
