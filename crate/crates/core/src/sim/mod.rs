//! Trajectory integration and empirical stability checks.
//!
//! Everything in this module is floating-point and labeled EVIDENCE:
//! simulation supports or undermines a claim, it never certifies one.
//! The certification path in [`crate::certify`] and [`crate::rules`]
//! stays exact.

use crate::certify::bb::{prove_sign_on, BbConfig, BbOutcome, RegionFilter};
use crate::certify::interval::{BoxRegion, RatInterval};
use crate::rules::{vc_lyap, Schedules, Verdict};
use crate::symbolic::rat::{self, Rat};
use crate::symbolic::{OdeSystem, Polynomial, Rel, SemiAlgebraicFormula, TargetSet, VarSet};

/// Nearest-f64 evaluation of a polynomial; evidence paths only.
pub fn eval_f64(p: &Polynomial, point: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (exps, coeff) in p.terms() {
        let mut t = rat::to_f64(coeff);
        for (i, &k) in exps.iter().enumerate() {
            if k > 0 {
                t *= point[i].powi(k as i32);
            }
        }
        acc += t;
    }
    acc
}

fn formula_holds_f64(f: &SemiAlgebraicFormula, point: &[f64]) -> bool {
    use SemiAlgebraicFormula as F;
    match f {
        F::True => true,
        F::False => false,
        F::Atom(a) => {
            let v = eval_f64(&a.poly, point);
            match a.rel {
                Rel::Eq => v == 0.0,
                Rel::Ne => v != 0.0,
                Rel::Ge => v >= 0.0,
                Rel::Gt => v > 0.0,
                Rel::Le => v <= 0.0,
                Rel::Lt => v < 0.0,
            }
        }
        F::And(a, b) => formula_holds_f64(a, point) && formula_holds_f64(b, point),
        F::Or(a, b) => formula_holds_f64(a, point) || formula_holds_f64(b, point),
        F::Not(a) => !formula_holds_f64(a, point),
    }
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationFlag {
    /// Reached the time horizon.
    Completed,
    /// State norm exceeded the divergence cutoff (finite-time or
    /// numerical blow-up surrogate).
    BlowUp,
    /// Left the evolution domain constraint.
    DomainExit,
    /// Step limit hit before the horizon.
    StepLimit,
}

/// A numerically integrated solution sample path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub flag: TerminationFlag,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(|s| s.as_slice()).unwrap_or(&[])
    }
}

/// Configuration for the empirical checks. All fields must be positive
/// and the sample count at least one.
#[derive(Debug, Clone)]
pub struct EmpiricalConfig {
    pub horizon: f64,
    pub eps_schedule: Vec<f64>,
    /// δ bisection lower bound, as a fraction of ε.
    pub delta_min_frac: f64,
    pub bisection_iters: u32,
    pub samples_per_ball: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub divergence_cutoff: f64,
    pub seed: u64,
    /// Fixed step size (disables adaptivity); used by convergence tests.
    pub fixed_step: Option<f64>,
    /// Fraction of the horizon that must lie inside the ε-ball for the
    /// eventually-always check.
    pub tail_frac: f64,
    /// Extent of the base grid along unbounded target sets.
    pub along_extent: f64,
    /// Ball radius for attractivity sampling.
    pub attr_delta: f64,
    pub envelope_slack: f64,
    pub max_steps: usize,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        EmpiricalConfig {
            horizon: 50.0,
            eps_schedule: vec![0.5, 0.1, 0.01],
            delta_min_frac: (2.0f64).powi(-10),
            bisection_iters: 10,
            samples_per_ball: 50,
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            divergence_cutoff: 1e8,
            seed: 0,
            fixed_step: None,
            tail_frac: 0.2,
            along_extent: 1.0,
            attr_delta: 0.1,
            envelope_slack: 1e-6,
            max_steps: 2_000_000,
        }
    }
}

impl EmpiricalConfig {
    fn validate(&self) {
        assert!(self.horizon > 0.0, "horizon must be positive");
        assert!(self.samples_per_ball >= 1, "need at least one sample");
        assert!(self.rel_tol > 0.0 && self.abs_tol > 0.0);
        assert!(self.divergence_cutoff > 0.0);
    }
}

// Dormand-Prince 5(4) embedded pair (autonomous form; polynomial ODEs
// carry time as a state variable when needed).
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Right-hand side as compiled f64 closures.
struct CompiledRhs {
    polys: Vec<Polynomial>,
}

impl CompiledRhs {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (i, p) in self.polys.iter().enumerate() {
            out[i] = eval_f64(p, x);
        }
    }
}

/// Adaptive Dormand-Prince integration with an embedded 4th/5th order
/// error estimate; the local error per step is controlled against
/// `abs_tol + rel_tol·|y|`. Integration stops early on divergence
/// (norm beyond the cutoff) or on leaving the domain constraint.
pub fn integrate(ode: &OdeSystem, x0: &[f64], cfg: &EmpiricalConfig) -> Trajectory {
    cfg.validate();
    assert_eq!(ode.vars().n_params(), 0, "instantiate parameters first");
    assert_eq!(x0.len(), ode.n_state());
    let rhs = CompiledRhs {
        polys: ode.rhs().to_vec(),
    };
    let n = x0.len();
    let mut t = 0.0;
    let mut y = x0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut flag = TerminationFlag::Completed;

    if let Some(d) = ode.domain() {
        if !formula_holds_f64(d, &y) {
            return Trajectory {
                times,
                states,
                accepted_steps: 0,
                rejected_steps: 0,
                flag: TerminationFlag::DomainExit,
            };
        }
    }

    let mut h = cfg
        .fixed_step
        .unwrap_or_else(|| (cfg.horizon / 1000.0).min(1e-2))
        .min(cfg.horizon);
    let mut k = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut steps = 0usize;

    while t < cfg.horizon {
        steps += 1;
        if steps > cfg.max_steps {
            flag = TerminationFlag::StepLimit;
            break;
        }
        let h_eff = h.min(cfg.horizon - t);
        rhs.eval(&y, &mut k[0]);
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    acc += DP_A[stage - 1][j] * kj[i];
                }
                ytmp[i] = y[i] + h_eff * acc;
            }
            let (_, tail) = k.split_at_mut(stage);
            rhs.eval(&ytmp, &mut tail[0]);
        }
        let mut y5 = vec![0.0; n];
        let mut err = 0.0f64;
        for i in 0..n {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for j in 0..7 {
                acc5 += DP_B5[j] * k[j][i];
                acc4 += DP_B4[j] * k[j][i];
            }
            y5[i] = y[i] + h_eff * acc5;
            let y4 = y[i] + h_eff * acc4;
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4) / scale;
            err += e * e;
        }
        let err_norm = (err / n as f64).sqrt();

        let accept = cfg.fixed_step.is_some() || err_norm <= 1.0 || h_eff <= 1e-14;
        if accept {
            t += h_eff;
            y = y5;
            times.push(t);
            states.push(y.clone());
            accepted += 1;
            let norm2: f64 = y.iter().map(|v| v * v).sum();
            if norm2.sqrt() > cfg.divergence_cutoff || !norm2.is_finite() {
                flag = TerminationFlag::BlowUp;
                break;
            }
            if let Some(d) = ode.domain() {
                if !formula_holds_f64(d, &y) {
                    flag = TerminationFlag::DomainExit;
                    break;
                }
            }
        } else {
            rejected += 1;
        }
        if cfg.fixed_step.is_none() {
            let scale = (0.9 * (1.0 / err_norm.max(1e-12)).powf(0.2)).clamp(0.2, 5.0);
            h = (h_eff * scale).max(1e-14);
        }
    }

    Trajectory {
        times,
        states,
        accepted_steps: accepted,
        rejected_steps: rejected,
        flag,
    }
}

/// Euclidean distance to a target with closed-form distance.
pub fn dist_to_target(target: &TargetSet, vars: &VarSet, x: &[f64]) -> f64 {
    let tv = target
        .transverse_vars(vars)
        .expect("empirical checks need origin or subspace targets");
    tv.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt()
}

/// Deterministic low-discrepancy initial states at transverse distances
/// δ·{1/4, 1/2, 3/4, 1} from the target, plus axis-aligned extremes;
/// for unbounded targets the along-coordinates range over a small base
/// grid so instabilities that need a carrier motion are exercised.
pub fn sample_initials(
    target: &TargetSet,
    vars: &VarSet,
    delta: f64,
    cfg: &EmpiricalConfig,
) -> Vec<Vec<f64>> {
    let n = vars.n_state();
    let tv = target
        .transverse_vars(vars)
        .expect("empirical checks need origin or subspace targets");
    let along: Vec<usize> = (0..n).filter(|i| !tv.contains(i)).collect();
    let base_values: Vec<f64> = if along.is_empty() {
        vec![0.0]
    } else {
        vec![0.0, cfg.along_extent, -cfg.along_extent, cfg.along_extent / 2.0]
    };
    let radii = [0.25, 0.5, 0.75, 1.0];

    // Kronecker sequence directions on the transverse sphere.
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let offset = (cfg.seed % 97) as f64;
    let mut kseq = 0usize;
    while dirs.len() * radii.len() * base_values.len().min(2)
        < cfg.samples_per_ball.saturating_sub(2 * tv.len())
        && kseq < 4 * cfg.samples_per_ball + 8
    {
        kseq += 1;
        let mut d: Vec<f64> = (0..tv.len())
            .map(|i| {
                let u = ((kseq as f64 + offset) * PRIMES[i % PRIMES.len()].sqrt()).fract();
                2.0 * u - 1.0
            })
            .collect();
        let norm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for v in d.iter_mut() {
            *v /= norm;
        }
        dirs.push(d);
    }
    // Axis extremes guarantee boundary coverage.
    for i in 0..tv.len() {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; tv.len()];
            d[i] = sign;
            dirs.push(d);
        }
    }

    let mut out = Vec::new();
    'outer: for base in &base_values {
        for dir in &dirs {
            for r in radii {
                let mut x = vec![0.0; n];
                for &i in &along {
                    x[i] = *base;
                }
                for (k, &i) in tv.iter().enumerate() {
                    x[i] = dir[k] * r * delta;
                }
                out.push(x);
                if out.len() >= cfg.samples_per_ball {
                    break 'outer;
                }
            }
        }
    }
    out
}

/// One ε row of the empirical stability report.
#[derive(Debug, Clone)]
pub struct EpsRow {
    pub eps: f64,
    /// Largest δ on the bisection grid whose sampled ball stays inside
    /// the ε-tube; `None` when even the smallest grid δ fails.
    pub delta_found: Option<f64>,
    pub samples: usize,
    pub worst_excursion: f64,
}

/// Empirical ε-δ stability report. Always evidence, never a proof.
#[derive(Debug, Clone)]
pub struct StabilityEvidence {
    pub rows: Vec<EpsRow>,
    pub label: &'static str,
}

impl StabilityEvidence {
    pub fn all_eps_pass(&self) -> bool {
        self.rows.iter().all(|r| r.delta_found.is_some())
    }
}

/// For each scheduled ε, bisect for the largest δ whose sampled initial
/// states keep `dist(x(t), P) < ε` over the horizon.
pub fn empirical_stability(
    ode: &OdeSystem,
    target: &TargetSet,
    cfg: &EmpiricalConfig,
) -> StabilityEvidence {
    cfg.validate();
    let vars = ode.vars();
    let mut rows = Vec::new();
    for &eps in &cfg.eps_schedule {
        let trial = |delta: f64| -> (bool, usize, f64) {
            let initials = sample_initials(target, vars, delta, cfg);
            let count = initials.len();
            let mut worst: f64 = 0.0;
            for x0 in initials {
                let tr = integrate(ode, &x0, cfg);
                if tr.flag == TerminationFlag::BlowUp {
                    return (false, count, f64::INFINITY);
                }
                for s in &tr.states {
                    let d = dist_to_target(target, vars, s);
                    worst = worst.max(d);
                    if d >= eps {
                        return (false, count, worst);
                    }
                }
            }
            (true, count, worst)
        };
        let hi = eps;
        let lo = eps * cfg.delta_min_frac;
        let (hi_ok, samples, worst_hi) = trial(hi);
        let row = if hi_ok {
            EpsRow {
                eps,
                delta_found: Some(hi),
                samples,
                worst_excursion: worst_hi,
            }
        } else {
            let (lo_ok, _, worst_lo) = trial(lo);
            if !lo_ok {
                EpsRow {
                    eps,
                    delta_found: None,
                    samples,
                    worst_excursion: worst_lo,
                }
            } else {
                // Invariant: lo passes, hi fails.
                let mut pass = lo;
                let mut fail = hi;
                let mut worst = worst_lo;
                for _ in 0..cfg.bisection_iters {
                    let mid = 0.5 * (pass + fail);
                    let (ok, _, w) = trial(mid);
                    if ok {
                        pass = mid;
                        worst = w;
                    } else {
                        fail = mid;
                    }
                }
                EpsRow {
                    eps,
                    delta_found: Some(pass),
                    samples,
                    worst_excursion: worst,
                }
            }
        };
        rows.push(row);
    }
    StabilityEvidence {
        rows,
        label: "EVIDENCE",
    }
}

#[derive(Debug, Clone)]
pub struct AttrRow {
    pub eps: f64,
    pub passed: bool,
    /// Worst first-entry time (certified mode) or settle time
    /// (eventually-always mode) across samples.
    pub entry_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AttractivityEvidence {
    pub rows: Vec<AttrRow>,
    /// `eventual-entry` when a stability certificate licenses the
    /// simpler check, `eventually-always` otherwise.
    pub mode: &'static str,
    pub label: &'static str,
}

impl AttractivityEvidence {
    pub fn all_eps_pass(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Empirical attractivity. With a stability certificate in hand the
/// check simplifies to eventual entry into each ε-ball; otherwise the
/// trajectory must be inside the ball on the whole tail window.
pub fn empirical_attractivity(
    ode: &OdeSystem,
    target: &TargetSet,
    cfg: &EmpiricalConfig,
    stability_certified: bool,
) -> AttractivityEvidence {
    cfg.validate();
    let vars = ode.vars();
    let initials = sample_initials(target, vars, cfg.attr_delta, cfg);
    let trajectories: Vec<Trajectory> = initials.iter().map(|x0| integrate(ode, x0, cfg)).collect();
    let tail_start = cfg.horizon * (1.0 - cfg.tail_frac);
    let mut rows = Vec::new();
    for &eps in &cfg.eps_schedule {
        let mut passed = true;
        let mut worst_entry: f64 = 0.0;
        for tr in &trajectories {
            if tr.flag == TerminationFlag::BlowUp {
                passed = false;
                break;
            }
            if stability_certified {
                // Eventual entry only.
                let entry = tr
                    .times
                    .iter()
                    .zip(&tr.states)
                    .find(|(_, s)| dist_to_target(target, vars, s) < eps)
                    .map(|(t, _)| *t);
                match entry {
                    Some(t) => worst_entry = worst_entry.max(t),
                    None => {
                        passed = false;
                        break;
                    }
                }
            } else {
                // Eventually-always via tail window: the last excursion
                // must end before the tail starts.
                let last_exit = tr
                    .times
                    .iter()
                    .zip(&tr.states)
                    .filter(|(_, s)| dist_to_target(target, vars, s) >= eps)
                    .map(|(t, _)| *t)
                    .last();
                if tr.flag != TerminationFlag::Completed {
                    passed = false;
                    break;
                }
                match last_exit {
                    None => {}
                    Some(t) if t <= tail_start => worst_entry = worst_entry.max(t),
                    Some(_) => {
                        passed = false;
                        break;
                    }
                }
            }
        }
        rows.push(AttrRow {
            eps,
            passed,
            entry_time: if passed { Some(worst_entry) } else { None },
        });
    }
    AttractivityEvidence {
        rows,
        mode: if stability_certified {
            "eventual-entry"
        } else {
            "eventually-always"
        },
        label: "EVIDENCE",
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeEvidence {
    pub passed: bool,
    /// max over samples of ‖x(t)‖² / y(t).
    pub worst_ratio: f64,
    pub samples: usize,
    pub label: &'static str,
}

/// Checks the exponential envelope `‖x(t)‖² ≤ y(t)` along trajectories
/// of the system augmented with the ghost `y' = -2βy`, `y(0) = α²‖x₀‖²`,
/// for sampled initial states in the δ-ball.
pub fn exp_envelope_check(
    ode: &OdeSystem,
    alpha: f64,
    beta: f64,
    delta: f64,
    cfg: &EmpiricalConfig,
) -> EnvelopeEvidence {
    cfg.validate();
    assert_eq!(ode.vars().n_params(), 0);
    let n = ode.n_state();
    // Augmented variable table: states then the ghost y.
    let mut names: Vec<String> = ode.vars().names().to_vec();
    names.push("__ghost_y".to_string());
    let aug_vars = VarSet::states(names);
    let map: Vec<usize> = (0..n).collect();
    let mut rhs: Vec<Polynomial> = ode
        .rhs()
        .iter()
        .map(|p| p.embed(n + 1, &map))
        .collect();
    let beta_rat = Rat::from_float(beta).unwrap_or_else(rat::zero);
    rhs.push(Polynomial::var(n + 1, n).scale(&(beta_rat * rat::int(-2))));
    let aug = OdeSystem::new(aug_vars, rhs, None).expect("augmented system");

    let initials = sample_initials(&TargetSet::Origin, ode.vars(), delta, cfg);
    let samples = initials.len();
    let mut worst: f64 = 0.0;
    let mut passed = true;
    for x0 in initials {
        let norm2: f64 = x0.iter().map(|v| v * v).sum();
        let mut z0 = x0.clone();
        z0.push(alpha * alpha * norm2);
        let tr = integrate(&aug, &z0, cfg);
        if tr.flag == TerminationFlag::BlowUp {
            passed = false;
            worst = f64::INFINITY;
            continue;
        }
        for s in &tr.states {
            let xn2: f64 = s[..n].iter().map(|v| v * v).sum();
            let y = s[n];
            if y > 0.0 {
                worst = worst.max(xn2 / y);
            }
            if xn2 > y * (1.0 + cfg.envelope_slack) + cfg.abs_tol {
                passed = false;
            }
        }
    }
    EnvelopeEvidence {
        passed,
        worst_ratio: worst,
        samples,
        label: "EVIDENCE",
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdRow {
    pub by_time: f64,
    pub fraction_of_initial: f64,
    pub attained: bool,
}

#[derive(Debug, Clone)]
pub struct EnergyEvidence {
    pub non_increasing: bool,
    pub thresholds: Vec<ThresholdRow>,
    pub samples: usize,
    pub label: &'static str,
}

/// Monitors an energy-like polynomial along sampled trajectories:
/// passes when it never increases beyond the relative tolerance and
/// drops below each scheduled fraction of its initial value in time.
pub fn energy_monitor(
    ode: &OdeSystem,
    energy: &Polynomial,
    thresholds: &[(f64, f64)],
    sample_radius: f64,
    monotony_rel_tol: f64,
    cfg: &EmpiricalConfig,
) -> EnergyEvidence {
    cfg.validate();
    let initials = sample_initials(&TargetSet::Origin, ode.vars(), sample_radius, cfg);
    let samples = initials.len();
    let mut non_increasing = true;
    let mut rows: Vec<ThresholdRow> = thresholds
        .iter()
        .map(|&(by_time, fraction_of_initial)| ThresholdRow {
            by_time,
            fraction_of_initial,
            attained: true,
        })
        .collect();
    for x0 in initials {
        let tr = integrate(ode, &x0, cfg);
        let e0 = eval_f64(energy, &x0);
        let mut prev = e0;
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let e = eval_f64(energy, s);
            if e > prev * (1.0 + monotony_rel_tol) + cfg.abs_tol {
                non_increasing = false;
            }
            prev = e;
            for row in rows.iter_mut() {
                if *t >= row.by_time && e > row.fraction_of_initial * e0 {
                    row.attained = false;
                }
            }
        }
        if tr.flag != TerminationFlag::Completed {
            for row in rows.iter_mut() {
                if tr.final_time() < row.by_time {
                    row.attained = false;
                }
            }
        }
    }
    EnergyEvidence {
        non_increasing,
        thresholds: rows,
        samples,
        label: "EVIDENCE",
    }
}

/// Identifier of a shipped counterexample regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleId {
    /// Unbounded invariant set: the premises of the compactness-free
    /// set rule all hold while the set is empirically unstable.
    Cex1,
    /// Constant candidate: all premises except `v(0) = 0` hold while
    /// solutions blow up.
    Cex2,
}

impl CounterexampleId {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cex1" => Some(CounterexampleId::Cex1),
            "cex2" => Some(CounterexampleId::Cex2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub id: CounterexampleId,
    /// Harness-verified premise outcomes (name, holds).
    pub premises: Vec<(String, bool)>,
    /// The divergence that the premises fail to rule out.
    pub failure_observed: bool,
    pub details: Vec<String>,
}

impl ReplayReport {
    pub fn premises_all_pass(&self) -> bool {
        self.premises.iter().all(|(_, ok)| *ok)
    }
}

/// Replays a shipped counterexample: verifies the symbolic premises the
/// unsound rule variant would accept and demonstrates the divergence
/// empirically.
pub fn counterexample_replay(id: CounterexampleId, cfg: &EmpiricalConfig) -> ReplayReport {
    match id {
        CounterexampleId::Cex1 => replay_cex1(cfg),
        CounterexampleId::Cex2 => replay_cex2(cfg),
    }
}

/// y' = y, t' = 1, w' = -2w with P = {y = 0} and v = y²·w, where the
/// ghost w stands for the decaying exponential (w(0) = 1, so w > 0
/// along every run).
pub fn cex1_system() -> (OdeSystem, TargetSet, Polynomial) {
    let vars = VarSet::states(vec!["y", "t", "w"]);
    let n = 3;
    let y = Polynomial::var(n, 0);
    let w = Polynomial::var(n, 2);
    let rhs = vec![
        y.clone(),
        Polynomial::one(n),
        w.scale(&rat::int(-2)),
    ];
    let ode = OdeSystem::new(vars, rhs, None).unwrap();
    let target = TargetSet::subspace(vec![0], ode.vars()).unwrap();
    let v = &(&y * &y) * &w;
    (ode, target, v)
}

fn replay_cex1(cfg: &EmpiricalConfig) -> ReplayReport {
    let (ode, target, v) = cex1_system();
    let mut premises = Vec::new();
    let mut details = Vec::new();

    // v = 0 on P: substitute y := 0 exactly.
    let on_p = v.substitute_partial(&[Some(rat::zero()), None, None]);
    premises.push(("v = 0 on P".to_string(), on_p.is_zero()));

    // Lie(v) = 0 symbolically: 2y·w·y + y²·(-2w) = 0.
    let lie = ode.lie_derivative(&v).unwrap();
    premises.push(("Lie(v) = 0".to_string(), lie.is_zero()));

    // v > 0 off P within the ghost domain w ∈ [1/4, 2]. Two parts:
    // strict positivity outside a thin slab |y| ≤ 2⁻¹⁰, and the
    // dominance bound v ≥ y²/4 covering the residual slab (checked in
    // shifted coordinates u = w - 1/4, where the enclosure is tight).
    let halfwidth = rat::frac(1, 1 << 10);
    let t_iv = RatInterval::new(rat::int(-2), rat::int(2));
    let w_iv = RatInterval::new(rat::frac(1, 4), rat::int(2));
    let mut off_slab = true;
    for y_iv in [
        RatInterval::new(halfwidth.clone(), rat::int(2)),
        RatInterval::new(rat::int(-2), -halfwidth.clone()),
    ] {
        let bx = BoxRegion::new(vec![y_iv, t_iv.clone(), w_iv.clone()]);
        off_slab &= matches!(
            prove_sign_on(&v, Rel::Gt, &bx, &RegionFilter::All, &BbConfig::default()),
            BbOutcome::Proved { .. }
        );
    }
    let quarter_y2 = Polynomial::var(3, 0).pow(2).scale(&rat::frac(1, 4));
    let slack = (&v - &quarter_y2).shift(&[rat::zero(), rat::zero(), rat::frac(1, 4)]);
    let shifted_box = BoxRegion::new(vec![
        RatInterval::new(rat::int(-2), rat::int(2)),
        t_iv,
        RatInterval::new(rat::zero(), rat::frac(7, 4)),
    ]);
    let dominated = matches!(
        prove_sign_on(
            &slack,
            Rel::Ge,
            &shifted_box,
            &RegionFilter::All,
            &BbConfig::default(),
        ),
        BbOutcome::Proved { .. }
    );
    premises.push((
        "v > 0 off P (within the ghost domain w ≥ 1/4)".to_string(),
        off_slab && dominated,
    ));
    details.push(
        "v ≥ y²/4 on the ghost domain, and y²/4 is positive definite transverse to P".to_string(),
    );

    // Empirically P is unstable: no δ keeps |y| below ε = 1.
    let mut sim_cfg = cfg.clone();
    sim_cfg.eps_schedule = vec![1.0];
    sim_cfg.horizon = cfg.horizon.min(30.0);
    let ev = empirical_stability(&ode, &target, &sim_cfg);
    let failure = ev.rows.iter().all(|r| r.delta_found.is_none());
    details.push(format!(
        "empirical stability at ε = 1: δ found = {:?}",
        ev.rows[0].delta_found
    ));

    ReplayReport {
        id: CounterexampleId::Cex1,
        premises,
        failure_observed: failure,
        details,
    }
}

/// y' = y with v = 1: every premise of the non-strict rule holds except
/// `v(0) = 0`, and solutions blow up.
pub fn cex2_system() -> (OdeSystem, Polynomial) {
    let vars = VarSet::states(vec!["y"]);
    let y = Polynomial::var(1, 0);
    let ode = OdeSystem::new(vars, vec![y], None).unwrap();
    (ode, Polynomial::one(1))
}

fn replay_cex2(cfg: &EmpiricalConfig) -> ReplayReport {
    let (ode, v) = cex2_system();
    let mut premises = Vec::new();
    let mut details = Vec::new();

    let report = vc_lyap(&ode, &v, &Schedules::default()).expect("param-free");
    let refused_at_origin = matches!(
        &report.verdict,
        Verdict::Refuted { premise, .. } if premise == "v(0) = 0"
    );
    premises.push(("rule refuses at v(0) = 0".to_string(), refused_at_origin));

    // The premises the unsound variant would accept: v > 0 everywhere
    // and Lie(v) ≤ 0.
    let lie = ode.lie_derivative(&v).unwrap();
    premises.push(("v > 0".to_string(), v.eval(&[rat::zero()]) > rat::zero()));
    premises.push(("Lie(v) ≤ 0".to_string(), lie.is_zero()));

    let mut sim_cfg = cfg.clone();
    sim_cfg.horizon = 20.0;
    let tr = integrate(&ode, &[1.0], &sim_cfg);
    let blow_up = tr.flag == TerminationFlag::BlowUp && tr.final_time() < 20.0;
    details.push(format!(
        "trajectory from y(0) = 1 flagged {:?} at t = {:.3}",
        tr.flag,
        tr.final_time()
    ));

    ReplayReport {
        id: CounterexampleId::Cex2,
        premises,
        failure_observed: blow_up,
        details,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::int;

    fn linear_decay() -> OdeSystem {
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        OdeSystem::new(vars, vec![x.scale(&int(-1))], None).unwrap()
    }

    #[test]
    fn integrates_exponential_decay_accurately() {
        let ode = linear_decay();
        let cfg = EmpiricalConfig {
            horizon: 10.0,
            ..Default::default()
        };
        let tr = integrate(&ode, &[1.0], &cfg);
        assert_eq!(tr.flag, TerminationFlag::Completed);
        let expected = (-10.0f64).exp();
        let got = tr.final_state()[0];
        assert!((got - expected).abs() < 1e-6, "got {got}, want {expected}");
    }

    #[test]
    fn flags_blow_up_before_horizon() {
        let vars = VarSet::states(vec!["y"]);
        let y = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![y], None).unwrap();
        let cfg = EmpiricalConfig {
            horizon: 30.0,
            divergence_cutoff: 1e6,
            ..Default::default()
        };
        let tr = integrate(&ode, &[1.0], &cfg);
        assert_eq!(tr.flag, TerminationFlag::BlowUp);
        assert!(tr.final_time() < 20.0);
    }

    #[test]
    fn constant_flow_gives_delta_equal_eps() {
        let vars = VarSet::states(vec!["x"]);
        let ode = OdeSystem::new(vars, vec![Polynomial::zero(1)], None).unwrap();
        let cfg = EmpiricalConfig {
            horizon: 5.0,
            eps_schedule: vec![0.5],
            samples_per_ball: 8,
            ..Default::default()
        };
        let ev = empirical_stability(&ode, &TargetSet::Origin, &cfg);
        // x' = 0 keeps dist constant: the boundary sample at radius δ
        // pins the found δ to ε up to the bisection grid.
        let d = ev.rows[0].delta_found.expect("constant flow is stable");
        assert!(d > 0.45 && d < 0.5, "δ = {d}");
    }

    #[test]
    fn attractivity_fails_for_constant_flow() {
        let vars = VarSet::states(vec!["x"]);
        let ode = OdeSystem::new(vars, vec![Polynomial::zero(1)], None).unwrap();
        let cfg = EmpiricalConfig {
            horizon: 5.0,
            eps_schedule: vec![0.01],
            samples_per_ball: 8,
            attr_delta: 0.5,
            ..Default::default()
        };
        let ev = empirical_attractivity(&ode, &TargetSet::Origin, &cfg, false);
        assert!(!ev.rows[0].passed);
    }

    #[test]
    fn envelope_exact_for_matched_decay() {
        let ode = linear_decay();
        let cfg = EmpiricalConfig {
            horizon: 10.0,
            samples_per_ball: 10,
            ..Default::default()
        };
        let ev = exp_envelope_check(&ode, 1.0, 1.0, 0.5, &cfg);
        assert!(ev.passed, "worst ratio {}", ev.worst_ratio);
        assert!(ev.worst_ratio <= 1.0 + 1e-6);
    }

    #[test]
    fn envelope_fails_for_small_alpha() {
        let ode = linear_decay();
        let cfg = EmpiricalConfig {
            horizon: 2.0,
            samples_per_ball: 6,
            ..Default::default()
        };
        let ev = exp_envelope_check(&ode, 0.1, 0.25, 0.25, &cfg);
        assert!(!ev.passed);
    }

    #[test]
    fn energy_monitor_flags_growth() {
        let vars = VarSet::states(vec!["x"]);
        let x = Polynomial::var(1, 0);
        let ode = OdeSystem::new(vars, vec![x], None).unwrap();
        let energy = Polynomial::var(1, 0).pow(2);
        let cfg = EmpiricalConfig {
            horizon: 3.0,
            samples_per_ball: 4,
            ..Default::default()
        };
        let ev = energy_monitor(&ode, &energy, &[], 0.5, 1e-6, &cfg);
        assert!(!ev.non_increasing);
    }

    #[test]
    fn replay_cex2_matches_expectations() {
        let rep = counterexample_replay(CounterexampleId::Cex2, &EmpiricalConfig::default());
        assert!(rep.premises_all_pass());
        assert!(rep.failure_observed);
    }
}
