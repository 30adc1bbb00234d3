//! Exact multivariate polynomials over the rationals.
//!
//! Terms are stored in a `BTreeMap` keyed by fixed-length exponent
//! vectors, so structural equality after normalization is plain `==`.
//! Zero coefficients are never stored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::rat::{self, Rat};
use super::{SymbolicError, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, rat::one())
    }

    /// The monomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(exps, rat::one());
        p
    }

    /// Builds a polynomial from raw `(exponents, coefficient)` pairs.
    pub fn from_terms(nvars: usize, terms: Vec<(Vec<u32>, Rat)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length mismatch");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, coeff);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff the polynomial is a constant (including zero).
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(rat::zero());
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.terms.get(exps).cloned().unwrap_or_else(rat::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Set of variable indices that actually occur.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for e in self.terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    s.insert(i);
                }
            }
        }
        s
    }

    pub fn mentions(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, k)| (e.clone(), k * c))
            .collect();
        Polynomial {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Exact evaluation at a full rational point.
    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.nvars, "evaluation point dimension");
        let mut acc = rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= rat::pow(&point[i], k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[i];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] = k - 1;
            out.add_term(e2, c * rat::int(k as i64));
        }
        out
    }

    /// Substitutes polynomial `values[i]` for every variable `i`.
    /// All replacement polynomials must share a variable table of size
    /// `out_nvars`.
    pub fn substitute_all(&self, values: &[Polynomial], out_nvars: usize) -> Self {
        assert_eq!(values.len(), self.nvars);
        let mut acc = Self::zero(out_nvars);
        // Memoized powers per variable, grown on demand.
        let mut powers: Vec<Vec<Polynomial>> =
            values.iter().map(|v| vec![Self::one(out_nvars), v.clone()]).collect();
        for (e, c) in &self.terms {
            let mut t = Self::constant(out_nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = {
                        let ps = &powers[i];
                        ps.last().unwrap() * &ps[1]
                    };
                    powers[i].push(next);
                }
                t = &t * &powers[i][k as usize];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Substitutes rational constants for a subset of variables, keeping
    /// the variable table unchanged. `values[i] = None` leaves `x_i`.
    pub fn substitute_partial(&self, values: &[Option<Rat>]) -> Self {
        assert_eq!(values.len(), self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            let mut e2 = e.clone();
            for (i, v) in values.iter().enumerate() {
                if let Some(val) = v {
                    if e[i] > 0 {
                        coeff *= rat::pow(val, e[i]);
                        e2[i] = 0;
                    }
                }
            }
            out.add_term(e2, coeff);
        }
        out
    }

    /// Shift of coordinates `x_i -> x_i + offset[i]` (exact expansion).
    pub fn shift(&self, offset: &[Rat]) -> Self {
        assert_eq!(offset.len(), self.nvars);
        let values: Vec<Polynomial> = (0..self.nvars)
            .map(|i| {
                let mut p = Self::var(self.nvars, i);
                p.add_term(vec![0; self.nvars], offset[i].clone());
                p
            })
            .collect();
        self.substitute_all(&values, self.nvars)
    }

    /// Re-expresses the polynomial over a smaller variable table given by
    /// `keep` (old indices in order). Returns `None` if a dropped
    /// variable occurs.
    pub fn project(&self, keep: &[usize]) -> Option<Self> {
        let mut pos = vec![usize::MAX; self.nvars];
        for (new_i, &old_i) in keep.iter().enumerate() {
            pos[old_i] = new_i;
        }
        let mut out = Self::zero(keep.len());
        for (e, c) in &self.terms {
            let mut e2 = vec![0u32; keep.len()];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    if pos[i] == usize::MAX {
                        return None;
                    }
                    e2[pos[i]] = k;
                }
            }
            out.add_term(e2, c.clone());
        }
        Some(out)
    }

    /// Embeds into a larger variable table; `map[i]` is the new index of
    /// old variable `i`.
    pub fn embed(&self, new_nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = Self::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u32; new_nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] = k;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Splits into homogeneous components keyed by degree.
    pub fn homogeneous_components(&self) -> BTreeMap<u32, Polynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d: u32 = e.iter().sum();
            out.entry(d)
                .or_insert_with(|| Self::zero(self.nvars))
                .add_term(e.clone(), c.clone());
        }
        out
    }

    /// Lowest-degree nonzero homogeneous part, with its degree.
    pub fn lowest_form(&self) -> Option<(u32, Polynomial)> {
        self.homogeneous_components().into_iter().next()
    }

    /// Highest-degree nonzero homogeneous part, with its degree.
    pub fn top_form(&self) -> Option<(u32, Polynomial)> {
        self.homogeneous_components().into_iter().next_back()
    }

    /// True iff every term has total degree exactly `d`.
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == d)
    }

    /// True iff the polynomial is a (possibly zero) quadratic form, i.e.
    /// homogeneous of degree two.
    pub fn is_quadratic_form(&self) -> bool {
        self.is_homogeneous(2)
    }

    /// Sum of absolute values of all coefficients.
    pub fn coeff_l1(&self) -> Rat {
        let mut acc = rat::zero();
        for c in self.terms.values() {
            acc += rat::abs(c);
        }
        acc
    }

    /// Σ_i x_i² over the given variable indices.
    pub fn sum_of_squares(nvars: usize, vars: &[usize]) -> Self {
        let mut p = Self::zero(nvars);
        for &i in vars {
            let mut e = vec![0; nvars];
            e[i] = 2;
            p.add_term(e, rat::one());
        }
        p
    }

    /// Checks that the free variables are within the table.
    pub fn check_vars(&self, vars: &VarSet) -> Result<(), SymbolicError> {
        if self.nvars != vars.len() {
            return Err(SymbolicError::DimensionMismatch {
                expected: vars.len(),
                got: self.nvars,
            });
        }
        Ok(())
    }

    /// Renders with the given variable names; inverse of the frontend
    /// expression parser on normalized output.
    pub fn display_with(&self, vars: &VarSet) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        // Graded order, highest degree first; ties by exponent vector.
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut out = String::new();
        for (pos, e) in keys.iter().enumerate() {
            let c = &self.terms[*e as &Vec<u32>];
            let neg = c < &rat::zero();
            let mag = rat::abs(c);
            if pos == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const_term = e.iter().all(|&k| k == 0);
            if mag != rat::one() || is_const_term {
                factors.push(rat::display(&mag));
            }
            for (i, &k) in e.iter().enumerate() {
                if k == 1 {
                    factors.push(vars.name(i).to_string());
                } else if k > 1 {
                    factors.push(format!("{}^{}", vars.name(i), k));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable table mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable table mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), -c.clone()))
            .collect();
        Polynomial {
            nvars: self.nvars,
            terms,
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable table mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("x{}", i + 1)).collect();
        let vs = VarSet::states(names);
        write!(f, "{}", self.display_with(&vs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{frac, int};

    fn p_x2_minus_half(n: usize) -> Polynomial {
        // x1^2 - 1/2
        let x = Polynomial::var(n, 0);
        &(&x * &x) - &Polynomial::constant(n, frac(1, 2))
    }

    #[test]
    fn no_zero_terms_after_cancellation() {
        let x = Polynomial::var(1, 0);
        let p = &x - &x;
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn eval_exact() {
        let p = p_x2_minus_half(1);
        assert_eq!(p.eval(&[frac(1, 2)]), frac(-1, 4));
        assert_eq!(p.eval(&[int(0)]), frac(-1, 2));
    }

    #[test]
    fn shift_expands_binomial() {
        // (x + 2)^2 = x^2 + 4x + 4
        let x = Polynomial::var(1, 0);
        let sq = &x * &x;
        let shifted = sq.shift(&[int(2)]);
        let expected = Polynomial::from_terms(
            1,
            vec![(vec![2], int(1)), (vec![1], int(4)), (vec![0], int(4))],
        );
        assert_eq!(shifted, expected);
    }

    #[test]
    fn homogeneous_split() {
        let p = p_x2_minus_half(1);
        let comps = p.homogeneous_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[&0], Polynomial::constant(1, frac(-1, 2)));
        assert!(comps[&2].is_quadratic_form());
    }

    #[test]
    fn projection_detects_dropped_support() {
        let n = 3;
        let p = Polynomial::var(n, 1); // x2
        assert!(p.project(&[0]).is_none());
        let q = p.project(&[1, 2]).unwrap();
        assert_eq!(q, Polynomial::var(2, 0));
    }

    #[test]
    fn display_is_canonical() {
        let vs = VarSet::states(vec!["theta", "omega"]);
        let p = Polynomial::from_terms(
            2,
            vec![
                (vec![2, 0], frac(3, 4)),
                (vec![1, 1], frac(1, 2)),
                (vec![0, 2], frac(1, 2)),
            ],
        );
        assert_eq!(
            p.display_with(&vs),
            "3/4*theta^2 + 1/2*theta*omega + 1/2*omega^2"
        );
    }
}
