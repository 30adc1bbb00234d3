//! ODE systems `x' = f(x) & Q`, target sets, Lie derivatives,
//! ε-neighborhoods and translation of equilibria to the origin.

use super::formula::{Rel, SemiAlgebraicFormula};
use super::poly::Polynomial;
use super::rat::{self, Rat};
use super::{SymbolicError, VarSet};

use thiserror::Error;

/// A polynomial ODE system with named state variables, constant
/// parameters and an optional evolution domain constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdeSystem {
    vars: VarSet,
    rhs: Vec<Polynomial>,
    domain: Option<SemiAlgebraicFormula>,
}

impl OdeSystem {
    pub fn new(
        vars: VarSet,
        rhs: Vec<Polynomial>,
        domain: Option<SemiAlgebraicFormula>,
    ) -> Result<Self, SymbolicError> {
        if rhs.len() != vars.n_state() {
            return Err(SymbolicError::DimensionMismatch {
                expected: vars.n_state(),
                got: rhs.len(),
            });
        }
        for p in &rhs {
            p.check_vars(&vars)?;
        }
        Ok(OdeSystem { vars, rhs, domain })
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn n_state(&self) -> usize {
        self.vars.n_state()
    }

    pub fn rhs(&self) -> &[Polynomial] {
        &self.rhs
    }

    pub fn domain(&self) -> Option<&SemiAlgebraicFormula> {
        self.domain.as_ref()
    }

    /// Lie derivative of `p` along the vector field: Σ_i (∂p/∂x_i)·f_i.
    /// Parameters are constants along the flow, so they contribute no
    /// derivative term.
    pub fn lie_derivative(&self, p: &Polynomial) -> Result<Polynomial, SymbolicError> {
        p.check_vars(&self.vars)?;
        let mut acc = Polynomial::zero(self.vars.len());
        for i in self.vars.state_indices() {
            let dp = p.partial(i);
            if dp.is_zero() {
                continue;
            }
            acc = &acc + &(&dp * &self.rhs[i]);
        }
        Ok(acc)
    }

    /// Exact equilibrium test at a rational state point.
    pub fn equilibrium_check(&self, x0: &[Rat]) -> Result<EquilibriumStatus, SymbolicError> {
        if x0.len() != self.vars.n_state() {
            return Err(SymbolicError::DimensionMismatch {
                expected: self.vars.n_state(),
                got: x0.len(),
            });
        }
        let mut subs: Vec<Option<Rat>> = vec![None; self.vars.len()];
        for (i, v) in x0.iter().enumerate() {
            subs[i] = Some(v.clone());
        }
        let mut residuals = Vec::new();
        for (i, f) in self.rhs.iter().enumerate() {
            let g = f.substitute_partial(&subs);
            match g.as_constant() {
                Some(c) if c == rat::zero() => {}
                Some(c) => {
                    return Ok(EquilibriumStatus::NotEquilibrium {
                        component: i,
                        value: c,
                    })
                }
                None => residuals.push(SemiAlgebraicFormula::atom(g, Rel::Eq)),
            }
        }
        if residuals.is_empty() {
            Ok(EquilibriumStatus::Equilibrium)
        } else {
            Ok(EquilibriumStatus::Residual(SemiAlgebraicFormula::conj(
                residuals,
            )))
        }
    }

    /// Change of coordinates `y = x - x0`, giving `y' = f(y + x0)`.
    /// The returned status records whether `x0` is an equilibrium, so a
    /// translation to a non-equilibrium point is flagged, not silent.
    pub fn translate_to_origin(&self, x0: &[Rat]) -> Result<Translated, SymbolicError> {
        let equilibrium = self.equilibrium_check(x0)?;
        let mut offset: Vec<Rat> = vec![rat::zero(); self.vars.len()];
        for (i, v) in x0.iter().enumerate() {
            offset[i] = v.clone();
        }
        let rhs = self.rhs.iter().map(|f| f.shift(&offset)).collect();
        let system = OdeSystem {
            vars: self.vars.clone(),
            rhs,
            domain: self.domain.clone(),
        };
        Ok(Translated {
            system,
            equilibrium,
        })
    }

    /// Substitutes rational values for every parameter, producing a
    /// parameter-free system over the state variables only.
    pub fn instantiate_params(&self, values: &[Rat]) -> Result<OdeSystem, SymbolicError> {
        if values.len() != self.vars.n_params() {
            return Err(SymbolicError::DimensionMismatch {
                expected: self.vars.n_params(),
                got: values.len(),
            });
        }
        let rhs = self
            .rhs
            .iter()
            .map(|p| self.instantiate_poly(p, values))
            .collect::<Result<Vec<_>, _>>()?;
        let domain = match &self.domain {
            None => None,
            Some(f) => Some(map_formula_polys(f, &|p| self.instantiate_poly(p, values))?),
        };
        OdeSystem::new(self.vars.without_params(), rhs, domain)
    }

    /// Instantiates parameters inside an arbitrary polynomial over this
    /// system's variable table.
    pub fn instantiate_poly(
        &self,
        p: &Polynomial,
        values: &[Rat],
    ) -> Result<Polynomial, SymbolicError> {
        p.check_vars(&self.vars)?;
        let mut subs: Vec<Option<Rat>> = vec![None; self.vars.len()];
        for (k, idx) in self.vars.param_indices().enumerate() {
            subs[idx] = Some(values[k].clone());
        }
        let g = p.substitute_partial(&subs);
        let keep: Vec<usize> = self.vars.state_indices().collect();
        g.project(&keep).ok_or_else(|| {
            SymbolicError::UnsupportedShape("parameter left after instantiation".into())
        })
    }
}

/// Result of an exact equilibrium test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquilibriumStatus {
    /// Every component of `f(x0)` is identically zero.
    Equilibrium,
    /// Some component evaluates to a nonzero rational.
    NotEquilibrium { component: usize, value: Rat },
    /// Symbolic parameters remain: the conjunction `f_i(x0) = 0` is
    /// returned for the caller to discharge per parameter instance.
    Residual(SemiAlgebraicFormula),
}

impl EquilibriumStatus {
    pub fn is_equilibrium(&self) -> bool {
        matches!(self, EquilibriumStatus::Equilibrium)
    }
}

/// A translated system together with the equilibrium status of the
/// translation point.
#[derive(Debug, Clone)]
pub struct Translated {
    pub system: OdeSystem,
    pub equilibrium: EquilibriumStatus,
}

/// The set whose stability is asserted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetSet {
    /// The origin of the state space.
    Origin,
    /// `{ x : x_i = 0 for i in vars }`; indices are state variables,
    /// sorted and non-empty.
    CoordinateSubspace(Vec<usize>),
    /// A general semialgebraic set; compactness is asserted by the user,
    /// never inferred.
    Formula {
        formula: SemiAlgebraicFormula,
        compact: bool,
    },
}

impl TargetSet {
    pub fn subspace(mut zeroed: Vec<usize>, vars: &VarSet) -> Result<Self, SymbolicError> {
        zeroed.sort_unstable();
        zeroed.dedup();
        if zeroed.is_empty() {
            return Err(SymbolicError::UnsupportedShape(
                "coordinate subspace needs at least one zeroed variable".into(),
            ));
        }
        if zeroed.iter().any(|&i| !vars.is_state(i)) {
            return Err(SymbolicError::UnsupportedShape(
                "coordinate subspace must zero state variables".into(),
            ));
        }
        Ok(TargetSet::CoordinateSubspace(zeroed))
    }

    /// State-variable indices transverse to the set (those measured by
    /// the distance): all of them for `Origin`, the zeroed ones for a
    /// subspace, none for a general formula.
    pub fn transverse_vars(&self, vars: &VarSet) -> Option<Vec<usize>> {
        match self {
            TargetSet::Origin => Some(vars.state_indices().collect()),
            TargetSet::CoordinateSubspace(s) => Some(s.clone()),
            TargetSet::Formula { .. } => None,
        }
    }

    /// Squared Euclidean distance to the set as a polynomial, when it
    /// has closed form (origin and coordinate subspaces).
    pub fn dist_squared(&self, vars: &VarSet) -> Option<Polynomial> {
        let tv = self.transverse_vars(vars)?;
        Some(Polynomial::sum_of_squares(vars.len(), &tv))
    }

    /// Exact membership for supported shapes; formula targets evaluate
    /// the formula.
    pub fn contains(&self, vars: &VarSet, state: &[Rat]) -> bool {
        match self {
            TargetSet::Origin => state.iter().all(|v| *v == rat::zero()),
            TargetSet::CoordinateSubspace(s) => s.iter().all(|&i| state[i] == rat::zero()),
            TargetSet::Formula { formula, .. } => {
                // Formula may be over state+params; callers pass
                // parameter-free systems here.
                let _ = vars;
                formula.holds_at(state)
            }
        }
    }
}

/// Radius of an ε-neighborhood: a positive rational or a declared
/// parameter variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Radius {
    Const(Rat),
    Param(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeighborhoodError {
    #[error("no closed-form distance for a general formula target; supply an origin or coordinate-subspace target")]
    UnsupportedNeighborhood,
    #[error("neighborhood radius must be positive")]
    NonPositiveRadius,
    #[error("symbolic radius must be a parameter variable")]
    BadRadiusVariable,
}

/// The ε-neighborhood `U_ε(P)` as a quantifier-free formula, for target
/// shapes with a closed-form distance:
/// `Origin -> ‖x‖² < ε²`, `CoordinateSubspace(S) -> Σ_{i∈S} x_i² < ε²`.
pub fn neighborhood(
    target: &TargetSet,
    radius: &Radius,
    vars: &VarSet,
) -> Result<SemiAlgebraicFormula, NeighborhoodError> {
    let dist2 = target
        .dist_squared(vars)
        .ok_or(NeighborhoodError::UnsupportedNeighborhood)?;
    let r2 = match radius {
        Radius::Const(r) => {
            if *r <= rat::zero() {
                return Err(NeighborhoodError::NonPositiveRadius);
            }
            Polynomial::constant(vars.len(), r * r)
        }
        Radius::Param(idx) => {
            if !vars.is_param(*idx) {
                return Err(NeighborhoodError::BadRadiusVariable);
            }
            Polynomial::var(vars.len(), *idx).pow(2)
        }
    };
    Ok(SemiAlgebraicFormula::atom(&dist2 - &r2, Rel::Lt))
}

fn map_formula_polys(
    f: &SemiAlgebraicFormula,
    op: &impl Fn(&Polynomial) -> Result<Polynomial, SymbolicError>,
) -> Result<SemiAlgebraicFormula, SymbolicError> {
    use SemiAlgebraicFormula as F;
    Ok(match f {
        F::True => F::True,
        F::False => F::False,
        F::Atom(a) => F::atom(op(&a.poly)?, a.rel),
        F::And(a, b) => F::and(map_formula_polys(a, op)?, map_formula_polys(b, op)?),
        F::Or(a, b) => F::or(map_formula_polys(a, op)?, map_formula_polys(b, op)?),
        F::Not(a) => F::not(map_formula_polys(a, op)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{frac, int};

    /// Damped linear pendulum with symbolic coefficients:
    /// theta' = omega, omega' = -a*theta - b*omega.
    pub fn pendulum_symbolic() -> OdeSystem {
        let vars = VarSet::new(vec!["theta", "omega"], vec!["a", "b"]).unwrap();
        let n = vars.len();
        let theta = Polynomial::var(n, 0);
        let omega = Polynomial::var(n, 1);
        let a = Polynomial::var(n, 2);
        let b = Polynomial::var(n, 3);
        let rhs = vec![omega.clone(), &(&a * &theta).scale(&int(-1)) - &(&b * &omega)];
        OdeSystem::new(vars, rhs, None).unwrap()
    }

    /// Energy-like candidate a·θ²/2 + ((bθ+ω)² + ω²)/4 over the symbolic
    /// pendulum table.
    pub fn pendulum_candidate() -> Polynomial {
        let n = 4;
        let theta = Polynomial::var(n, 0);
        let omega = Polynomial::var(n, 1);
        let a = Polynomial::var(n, 2);
        let b = Polynomial::var(n, 3);
        let t1 = (&a * &(&theta * &theta)).scale(&frac(1, 2));
        let btw = &(&b * &theta) + &omega;
        let t2 = (&(&btw * &btw) + &(&omega * &omega)).scale(&frac(1, 4));
        &t1 + &t2
    }

    #[test]
    fn lie_derivative_of_pendulum_candidate() {
        let ode = pendulum_symbolic();
        let v = pendulum_candidate();
        let lie = ode.lie_derivative(&v).unwrap();
        // -(b/2)(a·θ² + ω²)
        let n = 4;
        let theta = Polynomial::var(n, 0);
        let omega = Polynomial::var(n, 1);
        let a = Polynomial::var(n, 2);
        let b = Polynomial::var(n, 3);
        let expected = (&(&b * &(&a * &(&theta * &theta))) + &(&b * &(&omega * &omega)))
            .scale(&frac(-1, 2));
        assert_eq!(lie, expected);
    }

    #[test]
    fn lie_derivative_of_constant_is_zero() {
        let ode = pendulum_symbolic();
        let c = Polynomial::constant(4, frac(7, 3));
        assert!(ode.lie_derivative(&c).unwrap().is_zero());
    }

    #[test]
    fn neighborhood_of_origin() {
        let vars = VarSet::states(vec!["x1", "x2"]);
        let f = neighborhood(&TargetSet::Origin, &Radius::Const(frac(1, 2)), &vars).unwrap();
        let expect = SemiAlgebraicFormula::atom(
            &Polynomial::sum_of_squares(2, &[0, 1]) - &Polynomial::constant(2, frac(1, 4)),
            Rel::Lt,
        );
        assert_eq!(f, expect);
    }

    #[test]
    fn neighborhood_rejects_formula_targets() {
        let vars = VarSet::states(vec!["x1", "x2"]);
        let p = &Polynomial::var(2, 0) * &Polynomial::var(2, 1);
        let t = TargetSet::Formula {
            formula: SemiAlgebraicFormula::atom(p, Rel::Ge),
            compact: false,
        };
        assert_eq!(
            neighborhood(&t, &Radius::Const(int(1)), &vars),
            Err(NeighborhoodError::UnsupportedNeighborhood)
        );
    }

    #[test]
    fn translate_affine_flow() {
        // x' = -(x - 1) translated by x0 = 1 gives y' = -y.
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        let f = &Polynomial::one(1) - &x;
        let ode = OdeSystem::new(vars, vec![f], None).unwrap();
        let tr = ode.translate_to_origin(&[int(1)]).unwrap();
        assert!(tr.equilibrium.is_equilibrium());
        let y = Polynomial::var(1, 0);
        assert_eq!(tr.system.rhs()[0], (&y).scale(&int(-1)));
    }

    #[test]
    fn translate_flags_non_equilibrium() {
        // x' = x², shifted by 2: y' = y² + 4y + 4, and f(2) = 4 ≠ 0.
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![&x * &x], None).unwrap();
        let tr = ode.translate_to_origin(&[int(2)]).unwrap();
        match &tr.equilibrium {
            EquilibriumStatus::NotEquilibrium { component: 0, value } => {
                assert_eq!(*value, int(4));
            }
            other => panic!("expected non-equilibrium, got {other:?}"),
        }
        let expected = Polynomial::from_terms(
            1,
            vec![(vec![2], int(1)), (vec![1], int(4)), (vec![0], int(4))],
        );
        assert_eq!(tr.system.rhs()[0], expected);
    }

    #[test]
    fn equilibrium_with_symbolic_params_reduces_to_true() {
        // At the origin the pendulum rhs vanishes identically even with
        // symbolic a, b.
        let ode = pendulum_symbolic();
        let st = ode.equilibrium_check(&[int(0), int(0)]).unwrap();
        assert!(st.is_equilibrium());
    }

    #[test]
    fn instantiation_produces_state_only_system() {
        let ode = pendulum_symbolic();
        let inst = ode.instantiate_params(&[int(1), int(1)]).unwrap();
        assert_eq!(inst.vars().len(), 2);
        // omega' = -theta - omega
        let theta = Polynomial::var(2, 0);
        let omega = Polynomial::var(2, 1);
        assert_eq!(inst.rhs()[1], &(&theta).scale(&int(-1)) - &omega);
    }
}
