//! Quantifier-free semialgebraic formulas: atoms `p ~ 0` closed under
//! conjunction, disjunction and negation, with syntactic closure,
//! interior and boundary on the fragment without `≠` atoms.

use num_traits::Zero;

use super::poly::Polynomial;
use super::rat::{self, Rat};
use super::{SymbolicError, VarSet};

/// Comparison of a polynomial against zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
}

impl Rel {
    pub fn holds(self, value: &Rat) -> bool {
        let z = rat::zero();
        match self {
            Rel::Eq => *value == z,
            Rel::Ne => *value != z,
            Rel::Ge => *value >= z,
            Rel::Gt => *value > z,
            Rel::Le => *value <= z,
            Rel::Lt => *value < z,
        }
    }

    pub fn negate(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
            Rel::Le => Rel::Gt,
            Rel::Lt => Rel::Ge,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Le => "<=",
            Rel::Lt => "<",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Gt | Rel::Lt | Rel::Ne)
    }
}

/// An atomic constraint `poly rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub poly: Polynomial,
    pub rel: Rel,
}

impl Atom {
    pub fn new(poly: Polynomial, rel: Rel) -> Self {
        Atom { poly, rel }
    }

    pub fn holds_at(&self, point: &[Rat]) -> bool {
        self.rel.holds(&self.poly.eval(point))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SemiAlgebraicFormula {
    True,
    False,
    Atom(Atom),
    And(Box<SemiAlgebraicFormula>, Box<SemiAlgebraicFormula>),
    Or(Box<SemiAlgebraicFormula>, Box<SemiAlgebraicFormula>),
    Not(Box<SemiAlgebraicFormula>),
}

use SemiAlgebraicFormula as F;

impl SemiAlgebraicFormula {
    pub fn atom(poly: Polynomial, rel: Rel) -> Self {
        F::Atom(Atom::new(poly, rel))
    }

    pub fn and(a: Self, b: Self) -> Self {
        F::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        F::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Self) -> Self {
        F::Not(Box::new(a))
    }

    /// Conjunction of a list; `True` when empty.
    pub fn conj(items: Vec<Self>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => F::True,
            Some(first) => it.fold(first, F::and),
        }
    }

    /// Exact truth value at a rational point.
    pub fn holds_at(&self, point: &[Rat]) -> bool {
        match self {
            F::True => true,
            F::False => false,
            F::Atom(a) => a.holds_at(point),
            F::And(a, b) => a.holds_at(point) && b.holds_at(point),
            F::Or(a, b) => a.holds_at(point) || b.holds_at(point),
            F::Not(a) => !a.holds_at(point),
        }
    }

    /// Negation-normal form: negations pushed to atoms and absorbed into
    /// the comparison relation. Total on all formulas.
    pub fn nnf(&self) -> Self {
        fn go(f: &F, negate: bool) -> F {
            match f {
                F::True => {
                    if negate {
                        F::False
                    } else {
                        F::True
                    }
                }
                F::False => {
                    if negate {
                        F::True
                    } else {
                        F::False
                    }
                }
                F::Atom(a) => {
                    let rel = if negate { a.rel.negate() } else { a.rel };
                    F::atom(a.poly.clone(), rel)
                }
                F::And(a, b) => {
                    if negate {
                        F::or(go(a, true), go(b, true))
                    } else {
                        F::and(go(a, false), go(b, false))
                    }
                }
                F::Or(a, b) => {
                    if negate {
                        F::and(go(a, true), go(b, true))
                    } else {
                        F::or(go(a, false), go(b, false))
                    }
                }
                F::Not(a) => go(a, !negate),
            }
        }
        go(self, false)
    }

    pub fn contains_ne(&self) -> bool {
        match self {
            F::True | F::False => false,
            F::Atom(a) => a.rel == Rel::Ne,
            F::And(a, b) | F::Or(a, b) => a.contains_ne() || b.contains_ne(),
            F::Not(a) => a.contains_ne(),
        }
    }

    /// Collects every atom polynomial (for square-freeness warnings).
    pub fn atom_polys(&self) -> Vec<&Polynomial> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a F, out: &mut Vec<&'a Polynomial>) {
            match f {
                F::True | F::False => {}
                F::Atom(a) => out.push(&a.poly),
                F::And(a, b) | F::Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                F::Not(a) => walk(a, out),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Syntactic topological closure: strict atoms become non-strict.
    /// Requires negation-normal form without `≠` atoms; the result is an
    /// over-approximation of the true closure for non-regular atoms.
    pub fn syntactic_closure(&self) -> Result<Self, SymbolicError> {
        let f = self.nnf();
        if f.contains_ne() {
            return Err(SymbolicError::UnsupportedShape(
                "closure/boundary reject != atoms".into(),
            ));
        }
        fn go(f: &F) -> F {
            match f {
                F::True => F::True,
                F::False => F::False,
                F::Atom(a) => {
                    let rel = match a.rel {
                        Rel::Gt => Rel::Ge,
                        Rel::Lt => Rel::Le,
                        r => r,
                    };
                    F::atom(a.poly.clone(), rel)
                }
                F::And(a, b) => F::and(go(a), go(b)),
                F::Or(a, b) => F::or(go(a), go(b)),
                F::Not(_) => unreachable!("nnf has no negations"),
            }
        }
        Ok(go(&f))
    }

    /// Syntactic interior: non-strict atoms become strict, equations
    /// become `False`. Dual companion of [`Self::syntactic_closure`].
    pub fn syntactic_interior(&self) -> Result<Self, SymbolicError> {
        let f = self.nnf();
        if f.contains_ne() {
            return Err(SymbolicError::UnsupportedShape(
                "closure/boundary reject != atoms".into(),
            ));
        }
        fn go(f: &F) -> F {
            match f {
                F::True => F::True,
                F::False => F::False,
                F::Atom(a) => match a.rel {
                    Rel::Ge => F::atom(a.poly.clone(), Rel::Gt),
                    Rel::Le => F::atom(a.poly.clone(), Rel::Lt),
                    Rel::Eq => F::False,
                    r => F::atom(a.poly.clone(), r),
                },
                F::And(a, b) => F::and(go(a), go(b)),
                F::Or(a, b) => F::or(go(a), go(b)),
                F::Not(_) => unreachable!("nnf has no negations"),
            }
        }
        Ok(go(&f))
    }

    /// Syntactic boundary: `closure ∧ ¬interior`. A single atom reduces
    /// to the equation `p = 0`.
    pub fn syntactic_boundary(&self) -> Result<Self, SymbolicError> {
        let f = self.nnf();
        if let F::Atom(a) = &f {
            if a.rel != Rel::Ne {
                return Ok(F::atom(a.poly.clone(), Rel::Eq));
            }
        }
        let cl = f.syntactic_closure()?;
        let int = f.syntactic_interior()?;
        Ok(simplify(F::and(cl, F::not(int).nnf())))
    }

    pub fn display_with(&self, vars: &VarSet) -> String {
        fn prec(f: &F) -> u8 {
            match f {
                F::Or(..) => 0,
                F::And(..) => 1,
                _ => 2,
            }
        }
        fn go(f: &F, vars: &VarSet) -> String {
            match f {
                F::True => "true".into(),
                F::False => "false".into(),
                F::Atom(a) => {
                    format!("{} {} 0", a.poly.display_with(vars), a.rel.symbol())
                }
                F::And(a, b) => {
                    let sa = if prec(a) < 1 {
                        format!("({})", go(a, vars))
                    } else {
                        go(a, vars)
                    };
                    let sb = if prec(b) < 1 {
                        format!("({})", go(b, vars))
                    } else {
                        go(b, vars)
                    };
                    format!("{} & {}", sa, sb)
                }
                F::Or(a, b) => format!("{} | {}", go(a, vars), go(b, vars)),
                F::Not(a) => format!("!({})", go(a, vars)),
            }
        }
        go(self, vars)
    }
}

/// Constant folding for `True`/`False` leaves.
fn simplify(f: F) -> F {
    match f {
        F::And(a, b) => match (simplify(*a), simplify(*b)) {
            (F::False, _) | (_, F::False) => F::False,
            (F::True, x) | (x, F::True) => x,
            (x, y) => F::and(x, y),
        },
        F::Or(a, b) => match (simplify(*a), simplify(*b)) {
            (F::True, _) | (_, F::True) => F::True,
            (F::False, x) | (x, F::False) => x,
            (x, y) => F::or(x, y),
        },
        F::Not(a) => match simplify(*a) {
            F::True => F::False,
            F::False => F::True,
            x => F::not(x),
        },
        other => other,
    }
}

/// Outcome of the square-freeness test backing closure warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareFree {
    Yes,
    No,
    Unknown,
}

/// Square-freeness of a polynomial, decided by restricting to a few
/// fixed pseudo-random rational lines and running the univariate
/// `gcd(u, u')` criterion. A repeated factor survives restriction to
/// every line that preserves the degree, so a degree-preserving
/// square-free restriction certifies square-freeness of the input; the
/// converse direction is a warning heuristic.
pub fn square_free_status(p: &Polynomial) -> SquareFree {
    let d = p.total_degree();
    if d <= 1 {
        return SquareFree::Yes;
    }
    let n = p.nvars();
    // Fixed line parameters; small primes keep coefficients tame.
    let seeds: [(i64, i64); 3] = [(3, 2), (5, 7), (11, 13)];
    let mut saw_repeated = false;
    let mut saw_degenerate = false;
    for (sa, sb) in seeds {
        let a: Vec<Rat> = (0..n).map(|i| rat::frac(sa * (i as i64 + 1) % 17 - 8, 3)).collect();
        let b: Vec<Rat> = (0..n).map(|i| rat::frac(sb * (i as i64 + 2) % 19 - 9, 2)).collect();
        let u = restrict_to_line(p, &a, &b);
        let deg_u = u.len().saturating_sub(1);
        if deg_u != d as usize {
            saw_degenerate = true;
            continue;
        }
        if univariate_is_square_free(&u) {
            return SquareFree::Yes;
        }
        saw_repeated = true;
    }
    if saw_repeated && !saw_degenerate {
        SquareFree::No
    } else {
        SquareFree::Unknown
    }
}

/// Dense coefficients (ascending degree) of `p(a + t·b)`.
fn restrict_to_line(p: &Polynomial, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = p.nvars();
    let lines: Vec<Polynomial> = (0..n)
        .map(|i| {
            let t = Polynomial::var(1, 0);
            &t.scale(&b[i]) + &Polynomial::constant(1, a[i].clone())
        })
        .collect();
    let u = p.substitute_all(&lines, 1);
    let deg = u.total_degree() as usize;
    let mut coeffs = vec![rat::zero(); deg + 1];
    for (e, c) in u.terms() {
        coeffs[e[0] as usize] = c.clone();
    }
    while coeffs.len() > 1 && coeffs.last().map(Zero::is_zero).unwrap_or(false) {
        coeffs.pop();
    }
    coeffs
}

fn univariate_derivative(u: &[Rat]) -> Vec<Rat> {
    if u.len() <= 1 {
        return vec![rat::zero()];
    }
    (1..u.len())
        .map(|k| &u[k] * rat::int(k as i64))
        .collect()
}

fn univariate_trim(u: &mut Vec<Rat>) {
    while u.len() > 1 && u.last().map(Zero::is_zero).unwrap_or(false) {
        u.pop();
    }
}

/// Euclidean remainder of dense univariate rationals.
fn univariate_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r = a.to_vec();
    univariate_trim(&mut r);
    let db = b.len() - 1;
    let lead_b = &b[db];
    while r.len() - 1 >= db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let factor = &r[dr] / lead_b;
        for k in 0..=db {
            let idx = dr - db + k;
            let delta = &b[k] * &factor;
            r[idx] = &r[idx] - &delta;
        }
        univariate_trim(&mut r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        if r.len() - 1 < db {
            break;
        }
    }
    r
}

fn univariate_is_square_free(u: &[Rat]) -> bool {
    let du = univariate_derivative(u);
    if du.len() == 1 && du[0].is_zero() {
        return false;
    }
    // gcd(u, u') constant <=> square-free in characteristic zero.
    let mut a = u.to_vec();
    let mut b = du;
    univariate_trim(&mut a);
    univariate_trim(&mut b);
    loop {
        if b.len() == 1 && b[0].is_zero() {
            return a.len() == 1;
        }
        let r = univariate_rem(&a, &b);
        a = b;
        b = r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{frac, int};

    fn ball_atom(rel: Rel) -> SemiAlgebraicFormula {
        // x1^2 + x2^2 - 1 rel 0
        let p = &Polynomial::sum_of_squares(2, &[0, 1]) - &Polynomial::one(2);
        SemiAlgebraicFormula::atom(p, rel)
    }

    #[test]
    fn closure_of_open_ball_is_closed_ball() {
        let open = ball_atom(Rel::Lt);
        let closed = ball_atom(Rel::Le);
        assert_eq!(open.syntactic_closure().unwrap(), closed);
    }

    #[test]
    fn closure_is_idempotent() {
        let f = SemiAlgebraicFormula::or(ball_atom(Rel::Gt), ball_atom(Rel::Ge));
        let c1 = f.syntactic_closure().unwrap();
        let c2 = c1.syntactic_closure().unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn boundary_of_ball_is_sphere() {
        let open = ball_atom(Rel::Lt);
        let sphere = ball_atom(Rel::Eq);
        assert_eq!(open.syntactic_boundary().unwrap(), sphere);
    }

    #[test]
    fn closure_distributes_over_or() {
        let f = SemiAlgebraicFormula::or(ball_atom(Rel::Gt), ball_atom(Rel::Ge));
        let expect = SemiAlgebraicFormula::or(ball_atom(Rel::Ge), ball_atom(Rel::Ge));
        assert_eq!(f.syntactic_closure().unwrap(), expect);
    }

    #[test]
    fn ne_atoms_rejected() {
        let f = ball_atom(Rel::Ne);
        assert!(f.syntactic_closure().is_err());
        assert!(f.syntactic_boundary().is_err());
    }

    #[test]
    fn nnf_pushes_negation_to_atoms() {
        let f = SemiAlgebraicFormula::not(SemiAlgebraicFormula::and(
            ball_atom(Rel::Lt),
            ball_atom(Rel::Ge),
        ));
        let g = f.nnf();
        assert_eq!(
            g,
            SemiAlgebraicFormula::or(ball_atom(Rel::Ge), ball_atom(Rel::Lt))
        );
    }

    #[test]
    fn eval_respects_relations() {
        let f = ball_atom(Rel::Lt);
        assert!(f.holds_at(&[frac(1, 2), int(0)]));
        assert!(!f.holds_at(&[int(1), int(0)]));
    }

    #[test]
    fn square_free_detects_perfect_square() {
        // -x1^2 is a repeated factor;  x1^2 + x2^2 - 1 is square-free.
        let sq = Polynomial::var(2, 0).pow(2).scale(&int(-1));
        assert_eq!(square_free_status(&sq), SquareFree::No);
        let circle = &Polynomial::sum_of_squares(2, &[0, 1]) - &Polynomial::one(2);
        assert_eq!(square_free_status(&circle), SquareFree::Yes);
        let diff_sq = {
            let d = &Polynomial::var(2, 0) - &Polynomial::var(2, 1);
            &d * &d
        };
        assert_eq!(square_free_status(&diff_sq), SquareFree::No);
    }
}
