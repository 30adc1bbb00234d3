//! Interval branch-and-bound over boxes with region filters.
//!
//! The engine certifies `p rel 0` on (outer box ∩ region) by bisecting
//! the widest dimension until every surviving leaf either proves the
//! relation through its interval enclosure or exhibits an exactly
//! verified rational counterexample. Answers are sound in both
//! directions; running out of budget yields `Unknown`, never a guess.

use std::collections::VecDeque;

use num_traits::Zero;

use crate::symbolic::rat::{self, Rat};
use crate::symbolic::{Polynomial, Rel, SemiAlgebraicFormula};

use super::interval::{eval_poly, BoxRegion, RatInterval};

#[derive(Debug, Clone)]
pub struct BbConfig {
    /// Maximum bisection depth per leaf.
    pub max_depth: u32,
    /// Maximum number of boxes processed.
    pub max_boxes: u64,
}

impl Default for BbConfig {
    fn default() -> Self {
        BbConfig {
            max_depth: 20,
            max_boxes: 100_000,
        }
    }
}

impl BbConfig {
    pub fn with_budget(max_boxes: u64) -> Self {
        BbConfig {
            max_boxes,
            ..Default::default()
        }
    }
}

/// Restriction of the outer box to the actual region of interest.
#[derive(Debug, Clone)]
pub enum RegionFilter {
    /// The whole outer box.
    All,
    /// `r2_min ≤ Σ_{i∈vars} x_i² ≤ r2_max`. A degenerate shell with
    /// `r2_min = r2_max` selects a sphere.
    Shell {
        vars: Vec<usize>,
        r2_min: Rat,
        r2_max: Rat,
    },
    /// Complement of the slab `|x_i| ≤ halfwidth` for all `i ∈ vars`
    /// (used when subtracting a coordinate subspace for strict
    /// conditions; the residual slab is the caller's obligation).
    OutsideSlab { vars: Vec<usize>, halfwidth: Rat },
    /// Complement of a formula set; leaves certainly inside the formula
    /// are pruned.
    OutsideFormula { formula: SemiAlgebraicFormula },
    /// The level set `poly = level`.
    LevelSet { poly: Polynomial, level: Rat },
}

impl RegionFilter {
    /// May the leaf contain region points? `false` prunes the leaf.
    fn relevant(&self, bx: &BoxRegion) -> bool {
        match self {
            RegionFilter::All => true,
            RegionFilter::Shell {
                vars,
                r2_min,
                r2_max,
            } => {
                let iv = bx.norm2_range(vars);
                !(iv.hi < *r2_min || iv.lo > *r2_max)
            }
            RegionFilter::OutsideSlab { vars, halfwidth } => {
                let inside_slab = vars.iter().all(|&i| {
                    bx.dims[i].lo >= -halfwidth.clone() && bx.dims[i].hi <= halfwidth.clone()
                });
                !inside_slab
            }
            RegionFilter::OutsideFormula { formula } => !certainly_true(formula, bx),
            RegionFilter::LevelSet { poly, level } => eval_poly(poly, bx).contains(level),
        }
    }

    /// Exact membership of a rational point in the region.
    pub fn member(&self, pt: &[Rat]) -> bool {
        match self {
            RegionFilter::All => true,
            RegionFilter::Shell {
                vars,
                r2_min,
                r2_max,
            } => {
                let mut s = rat::zero();
                for &i in vars {
                    s += rat::pow(&pt[i], 2);
                }
                *r2_min <= s && s <= *r2_max
            }
            RegionFilter::OutsideSlab { vars, halfwidth } => {
                vars.iter().any(|&i| rat::abs(&pt[i]) > *halfwidth)
            }
            RegionFilter::OutsideFormula { formula } => !formula.holds_at(pt),
            RegionFilter::LevelSet { poly, level } => poly.eval(pt) == *level,
        }
    }
}

/// Interval certification that a formula holds on the entire box.
pub fn certainly_true(f: &SemiAlgebraicFormula, bx: &BoxRegion) -> bool {
    use SemiAlgebraicFormula as F;
    match f {
        F::True => true,
        F::False => false,
        F::Atom(a) => {
            let iv = eval_poly(&a.poly, bx);
            match a.rel {
                Rel::Ge => iv.lo >= rat::zero(),
                Rel::Gt => iv.lo > rat::zero(),
                Rel::Le => iv.hi <= rat::zero(),
                Rel::Lt => iv.hi < rat::zero(),
                Rel::Eq => iv.lo.is_zero() && iv.hi.is_zero(),
                Rel::Ne => !iv.contains_zero(),
            }
        }
        F::And(a, b) => certainly_true(a, bx) && certainly_true(b, bx),
        F::Or(a, b) => certainly_true(a, bx) || certainly_true(b, bx),
        F::Not(a) => certainly_false(a, bx),
    }
}

fn certainly_false(f: &SemiAlgebraicFormula, bx: &BoxRegion) -> bool {
    use SemiAlgebraicFormula as F;
    match f {
        F::True => false,
        F::False => true,
        F::Atom(a) => {
            let iv = eval_poly(&a.poly, bx);
            match a.rel.negate() {
                Rel::Ge => iv.lo >= rat::zero(),
                Rel::Gt => iv.lo > rat::zero(),
                Rel::Le => iv.hi <= rat::zero(),
                Rel::Lt => iv.hi < rat::zero(),
                Rel::Eq => iv.lo.is_zero() && iv.hi.is_zero(),
                Rel::Ne => !iv.contains_zero(),
            }
        }
        F::And(a, b) => certainly_false(a, bx) || certainly_false(b, bx),
        F::Or(a, b) => certainly_false(a, bx) && certainly_false(b, bx),
        F::Not(a) => certainly_true(a, bx),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BbOutcome {
    /// Relation certified on every leaf meeting the region. For strict
    /// relations the margin is a positive rational bound on |p|.
    Proved { margin: Option<Rat>, boxes: u64 },
    /// Exactly verified violating point inside the region.
    Disproved { witness: Vec<Rat> },
    /// Budget exhausted before every leaf resolved.
    BudgetExhausted { boxes: u64 },
}

/// Does the interval certify `rel` on the whole leaf?
fn leaf_proves(rel: Rel, iv: &RatInterval) -> bool {
    match rel {
        Rel::Ge => iv.lo >= rat::zero(),
        Rel::Gt => iv.lo > rat::zero(),
        Rel::Le => iv.hi <= rat::zero(),
        Rel::Lt => iv.hi < rat::zero(),
        Rel::Eq => iv.lo.is_zero() && iv.hi.is_zero(),
        Rel::Ne => !iv.contains_zero(),
    }
}

/// Does the interval show the relation fails on the whole leaf?
fn leaf_refutes(rel: Rel, iv: &RatInterval) -> bool {
    leaf_proves(rel.negate(), iv)
}

/// Distance of the proving bound from zero, used as a strictness margin.
fn leaf_margin(rel: Rel, iv: &RatInterval) -> Rat {
    match rel {
        Rel::Ge | Rel::Gt => iv.lo.clone(),
        Rel::Le | Rel::Lt => -iv.hi.clone(),
        Rel::Eq | Rel::Ne => rat::zero(),
    }
}

/// Deterministic in-leaf witness candidates: corners in ascending mask
/// order, then the center.
fn leaf_samples(bx: &BoxRegion) -> Vec<Vec<Rat>> {
    let mut pts = if bx.n() <= 10 {
        bx.corners()
    } else {
        Vec::new()
    };
    pts.push(bx.center());
    pts
}

/// Certifies `poly rel 0` on `outer ∩ filter`.
pub fn prove_sign_on(
    poly: &Polynomial,
    rel: Rel,
    outer: &BoxRegion,
    filter: &RegionFilter,
    cfg: &BbConfig,
) -> BbOutcome {
    if poly.is_zero() {
        return match rel {
            Rel::Ge | Rel::Le | Rel::Eq => BbOutcome::Proved {
                margin: None,
                boxes: 0,
            },
            Rel::Gt | Rel::Lt | Rel::Ne => {
                // Zero violates everywhere; any region point refutes.
                match find_region_point(outer, filter) {
                    Some(w) => BbOutcome::Disproved { witness: w },
                    None => BbOutcome::Proved {
                        margin: None,
                        boxes: 0,
                    },
                }
            }
        };
    }

    let mut queue: VecDeque<(BoxRegion, u32)> = VecDeque::new();
    queue.push_back((outer.clone(), 0));
    let mut boxes: u64 = 0;
    let mut unresolved = false;
    let mut margin: Option<Rat> = None;

    while let Some((bx, depth)) = queue.pop_front() {
        boxes += 1;
        if boxes > cfg.max_boxes {
            return BbOutcome::BudgetExhausted { boxes };
        }
        if !filter.relevant(&bx) {
            continue;
        }
        let iv = eval_poly(poly, &bx);
        if leaf_proves(rel, &iv) {
            let m = leaf_margin(rel, &iv);
            margin = Some(match margin {
                None => m,
                Some(cur) => {
                    if m < cur {
                        m
                    } else {
                        cur
                    }
                }
            });
            continue;
        }
        if leaf_refutes(rel, &iv) {
            // Every region point in the leaf violates; find one exactly.
            for pt in leaf_samples(&bx) {
                if filter.member(&pt) && !rel.holds(&poly.eval(&pt)) {
                    return BbOutcome::Disproved { witness: pt };
                }
            }
            // No exact member sampled (thin region); keep refining.
        }
        if depth >= cfg.max_depth {
            unresolved = true;
            continue;
        }
        let dim = bx.widest_dim();
        if bx.dims[dim].width().is_zero() {
            unresolved = true;
            continue;
        }
        let (lo, hi) = bx.bisect(dim);
        queue.push_back((lo, depth + 1));
        queue.push_back((hi, depth + 1));
    }

    if unresolved {
        BbOutcome::BudgetExhausted { boxes }
    } else {
        BbOutcome::Proved { margin, boxes }
    }
}

/// Finds some exact region point by subdividing toward membership.
fn find_region_point(outer: &BoxRegion, filter: &RegionFilter) -> Option<Vec<Rat>> {
    let mut queue: VecDeque<(BoxRegion, u32)> = VecDeque::new();
    queue.push_back((outer.clone(), 0));
    while let Some((bx, depth)) = queue.pop_front() {
        if !filter.relevant(&bx) {
            continue;
        }
        for pt in leaf_samples(&bx) {
            if filter.member(&pt) {
                return Some(pt);
            }
        }
        if depth < 16 {
            let (lo, hi) = bx.bisect(bx.widest_dim());
            queue.push_back((lo, depth + 1));
            queue.push_back((hi, depth + 1));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{frac, int};

    #[test]
    fn constant_proves_at_depth_zero() {
        let one = Polynomial::one(2);
        let bx = BoxRegion::centered_cube(2, &int(3));
        let out = prove_sign_on(&one, Rel::Gt, &bx, &RegionFilter::All, &BbConfig::default());
        match out {
            BbOutcome::Proved { boxes, .. } => assert_eq!(boxes, 1),
            other => panic!("expected proved, got {other:?}"),
        }
    }

    #[test]
    fn nonstrict_negative_sos_proves_on_box() {
        let p = Polynomial::sum_of_squares(2, &[0, 1]).scale(&frac(-1, 2));
        let bx = BoxRegion::centered_cube(2, &int(1));
        let out = prove_sign_on(&p, Rel::Le, &bx, &RegionFilter::All, &BbConfig::default());
        assert!(matches!(out, BbOutcome::Proved { .. }));
    }

    #[test]
    fn disproves_with_exact_witness() {
        // x² - 1/2 ≥ 0 fails on [0, 1].
        let x = Polynomial::var(1, 0);
        let p = &(&x * &x) - &Polynomial::constant(1, frac(1, 2));
        let bx = BoxRegion::new(vec![RatInterval::new(int(0), int(1))]);
        match prove_sign_on(&p, Rel::Ge, &bx, &RegionFilter::All, &BbConfig::default()) {
            BbOutcome::Disproved { witness } => {
                assert!(p.eval(&witness) < int(0));
                assert!(bx.contains(&witness));
            }
            other => panic!("expected disproved, got {other:?}"),
        }
    }

    #[test]
    fn shell_filter_certifies_positivity_off_origin() {
        // x1² + x2² > 0 on the shell 1/4 ≤ ‖x‖² ≤ 1.
        let p = Polynomial::sum_of_squares(2, &[0, 1]);
        let bx = BoxRegion::centered_cube(2, &int(1));
        let filter = RegionFilter::Shell {
            vars: vec![0, 1],
            r2_min: frac(1, 4),
            r2_max: int(1),
        };
        match prove_sign_on(&p, Rel::Gt, &bx, &filter, &BbConfig::default()) {
            BbOutcome::Proved { margin, .. } => {
                assert!(margin.unwrap() > int(0));
            }
            other => panic!("expected proved, got {other:?}"),
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // Dependency problem: (x1-x2)² ≥ 0 cannot be certified by plain
        // interval arithmetic near the diagonal.
        let d = &Polynomial::var(2, 0) - &Polynomial::var(2, 1);
        let p = &d * &d;
        let bx = BoxRegion::centered_cube(2, &int(1));
        let cfg = BbConfig {
            max_depth: 6,
            max_boxes: 2_000,
        };
        let out = prove_sign_on(&p, Rel::Ge, &bx, &RegionFilter::All, &cfg);
        assert!(matches!(out, BbOutcome::BudgetExhausted { .. }));
    }
}
