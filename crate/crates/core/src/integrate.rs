//! Time integration of the canonical equations, with the attitude carried
//! along by `dR/dt = R·ω̃` and diagnostics recomputed at every sample.

use crate::energetics::{InertiaSpec, Potential};
use crate::error::{Error, Result};
use crate::hamiltonian::{angular_velocity_from_state, eom_closed_form, hamiltonian, CanonicalState, STATE_DIM};
use crate::kinematics::{assemble_placement, PlacementMatrix, Rotation3};
use crate::linalg::{orthonormalize, Mat3};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method<T> {
    /// Classical Runge–Kutta with a fixed step.
    Rk4Fixed { dt: T },
    /// Dormand–Prince 5(4) with an error-per-step controller.
    Rk45Adaptive { rel_tol: T, abs_tol: T, dt_min: T, dt_max: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub method: Method<T>,
    pub t_end: T,
    /// Record every `sample_stride`-th accepted step (the initial and final
    /// states are always recorded).
    pub sample_stride: usize,
    /// Stop when `|λ² − μ²|` falls below this absolute gap.
    pub degeneracy_epsilon: T,
}

pub const DEFAULT_DEGENERACY_EPSILON: f64 = 1e-6;

impl<T: Scalar> IntegratorConfig<T> {
    pub fn rk4(dt: T, t_end: T) -> Self {
        Self {
            method: Method::Rk4Fixed { dt },
            t_end,
            sample_stride: 1,
            degeneracy_epsilon: T::of(DEFAULT_DEGENERACY_EPSILON),
        }
    }

    pub fn rk45(rel_tol: T, abs_tol: T, t_end: T) -> Self {
        Self {
            method: Method::Rk45Adaptive {
                rel_tol,
                abs_tol,
                dt_min: T::of(1e-12),
                dt_max: t_end,
            },
            t_end,
            sample_stride: 1,
            degeneracy_epsilon: T::of(DEFAULT_DEGENERACY_EPSILON),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("t_end", self.t_end)?;
        positive("degeneracy_epsilon", self.degeneracy_epsilon)?;
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig("sample_stride must be at least 1".into()));
        }
        match self.method {
            Method::Rk4Fixed { dt } => positive("dt", dt),
            Method::Rk45Adaptive {
                rel_tol,
                abs_tol,
                dt_min,
                dt_max,
            } => {
                positive("rel_tol", rel_tol)?;
                positive("abs_tol", abs_tol)?;
                positive("dt_min", dt_min)?;
                positive("dt_max", dt_max)?;
                if dt_min > dt_max {
                    return Err(Error::InvalidConfig(format!("dt_min ({dt_min}) exceeds dt_max ({dt_max})")));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    pub state: CanonicalState<T>,
    pub energy: T,
    pub p_theta: T,
    /// Eigenvalues of the Green tensor, descending.
    pub invariants: [T; 3],
    pub attitude: Option<Rotation3<T>>,
}

impl<T: Scalar> TrajectorySample<T> {
    pub fn new<P: Potential<T>>(t: T, state: CanonicalState<T>, j: &InertiaSpec<T>, v: &P) -> Result<Self> {
        Ok(Self {
            t,
            state,
            energy: hamiltonian(&state, j, v)?,
            p_theta: state.mom.p_theta,
            invariants: state.shape.sorted_squares(),
            attitude: state.attitude,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservationReport<T> {
    pub max_rel_energy_drift: T,
    pub max_abs_p_theta_drift: T,
    pub min_degeneracy_gap: T,
    pub attitude_orthogonality_max_defect: T,
    /// Largest `|K_i(t) − K_i(0)|` over all steps.
    pub max_invariant_drift: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination<T> {
    Completed,
    /// `|λ² − μ²|` fell below the configured epsilon.
    Degeneracy { t: T, gap: T },
    NonFinite { t: T },
    NonPositiveStretch { t: T },
    /// The adaptive controller wanted a step below `dt_min`.
    StepSizeUnderflow { t: T, dt: T },
}

impl<T> Termination<T> {
    pub fn is_completed(&self) -> bool {
        matches!(self, Self::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::Degeneracy { .. } => "degeneracy",
            Self::NonFinite { .. } => "non_finite",
            Self::NonPositiveStretch { .. } => "non_positive_stretch",
            Self::StepSizeUnderflow { .. } => "step_size_underflow",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub samples: Vec<TrajectorySample<T>>,
    pub report: ConservationReport<T>,
    pub termination: Termination<T>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last(&self) -> &TrajectorySample<T> {
        self.samples.last().expect("a trajectory always holds its initial sample")
    }
}

/// Canonical coordinates plus the raw (not yet re-orthonormalized) attitude.
#[derive(Clone, Copy)]
struct Point<T> {
    x: [T; STATE_DIM],
    r: Option<Mat3<T>>,
}

impl<T: Scalar> Point<T> {
    fn of(state: &CanonicalState<T>) -> Self {
        Self {
            x: state.to_array(),
            r: state.attitude.map(|r| r.into_inner()),
        }
    }

    fn axpy(&self, h: T, terms: &[(T, &Point<T>)]) -> Self {
        let mut out = *self;
        for (c, k) in terms {
            let w = h * *c;
            for i in 0..STATE_DIM {
                out.x[i] += w * k.x[i];
            }
            if let (Some(r), Some(kr)) = (out.r.as_mut(), k.r) {
                *r = *r + kr.scale(w);
            }
        }
        out
    }
}

fn rhs<T: Scalar, P: Potential<T>>(p: &Point<T>, j: &InertiaSpec<T>, v: &P) -> Result<Point<T>> {
    let state = CanonicalState::from_array(&p.x);
    let d = eom_closed_form(&state, j, v)?;
    let r = match p.r {
        Some(r) => Some(r * Mat3::comoving_skew(angular_velocity_from_state(&state, j)?)),
        None => None,
    };
    Ok(Point { x: d.to_array(), r })
}

fn finish<T: Scalar>(p: Point<T>) -> Result<CanonicalState<T>> {
    let mut state = CanonicalState::from_array(&p.x);
    if let Some(r) = p.r {
        let q = orthonormalize(&r).ok_or(Error::SingularMatrix)?;
        state.attitude = Some(Rotation3::new(q)?);
    }
    Ok(state)
}

fn rk4_point<T: Scalar, P: Potential<T>>(p: &Point<T>, dt: T, j: &InertiaSpec<T>, v: &P) -> Result<Point<T>> {
    let h = T::half();
    let k1 = rhs(p, j, v)?;
    let k2 = rhs(&p.axpy(dt, &[(h, &k1)]), j, v)?;
    let k3 = rhs(&p.axpy(dt, &[(h, &k2)]), j, v)?;
    let k4 = rhs(&p.axpy(dt, &[(T::one(), &k3)]), j, v)?;
    let sixth = T::one() / T::of(6.0);
    let third = T::one() / T::of(3.0);
    Ok(p.axpy(dt, &[(sixth, &k1), (third, &k2), (third, &k3), (sixth, &k4)]))
}

/// One classical Runge–Kutta step of the closed-form vector field. The
/// attitude, if present, is advanced on the same stages and then projected
/// back onto SO(3).
pub fn step_rk4<T: Scalar, P: Potential<T>>(
    state: &CanonicalState<T>,
    dt: T,
    j: &InertiaSpec<T>,
    v: &P,
) -> Result<CanonicalState<T>> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(Error::InvalidConfig(format!("dt must be positive and finite, got {dt}")));
    }
    finish(rk4_point(&Point::of(state), dt, j, v)?)
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Step-size multiplier for a scaled error norm (fifth-order controller).
fn step_factor(err: f64) -> f64 {
    if !err.is_finite() {
        MIN_FACTOR
    } else if err == 0.0 {
        MAX_FACTOR
    } else {
        (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
    }
}

// Dormand–Prince 5(4) tableau; the field is autonomous so the nodes are not needed.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince attempt: the fifth-order solution and the scaled
/// error norm (accept when ≤ 1).
fn dopri_point<T: Scalar, P: Potential<T>>(
    p: &Point<T>,
    dt: T,
    rel_tol: T,
    abs_tol: T,
    j: &InertiaSpec<T>,
    v: &P,
) -> Result<(Point<T>, T)> {
    let mut ks: Vec<Point<T>> = Vec::with_capacity(7);
    ks.push(rhs(p, j, v)?);
    for (stage, row) in DP_A.iter().enumerate().skip(1) {
        let terms: Vec<(T, &Point<T>)> = row[..stage].iter().map(|a| T::of(*a)).zip(ks.iter()).collect();
        let y = p.axpy(dt, &terms);
        ks.push(rhs(&y, j, v)?);
    }
    let combine = |b: &[f64; 7]| {
        let terms: Vec<(T, &Point<T>)> = b.iter().map(|c| T::of(*c)).zip(ks.iter()).collect();
        p.axpy(dt, &terms)
    };
    let y5 = combine(&DP_B5);
    let y4 = combine(&DP_B4);
    let mut err = T::zero();
    for i in 0..STATE_DIM {
        let scale = abs_tol + rel_tol * p.x[i].abs().max(y5.x[i].abs());
        err = err.max((y5.x[i] - y4.x[i]).abs() / scale);
    }
    Ok((y5, err))
}

enum StepOutcome<T> {
    Ok(CanonicalState<T>),
    Stop(Termination<T>),
}

fn classify<T: Scalar>(e: Error, t: T, gap: T) -> Result<Termination<T>> {
    match e {
        Error::Degenerate { .. } => Ok(Termination::Degeneracy { t, gap }),
        Error::Domain(_) => Ok(Termination::NonPositiveStretch { t }),
        Error::SingularMatrix | Error::Orientation { .. } | Error::Structure(_) => Ok(Termination::NonFinite { t }),
        other => Err(other),
    }
}

fn gap_of<T: Scalar>(s: &CanonicalState<T>) -> T {
    (s.shape.lambda.sq() - s.shape.mu.sq()).abs()
}

/// Post-step guard. `prev` is the accepted state before the step: a change
/// of sign of `λ − μ` means the chart boundary was crossed inside the step.
fn check_state<T: Scalar>(prev: &CanonicalState<T>, s: &CanonicalState<T>, t: T, eps: T) -> Option<Termination<T>> {
    if !s.is_finite() {
        return Some(Termination::NonFinite { t });
    }
    let sh = &s.shape;
    if sh.lambda <= T::zero() || sh.mu <= T::zero() || sh.rho <= T::zero() {
        return Some(Termination::NonPositiveStretch { t });
    }
    let gap = gap_of(s);
    let crossed = (prev.shape.lambda > prev.shape.mu) != (sh.lambda > sh.mu);
    if gap < eps || crossed {
        return Some(Termination::Degeneracy { t, gap });
    }
    None
}

struct Monitor<T> {
    h0: T,
    p_theta0: T,
    k0: [T; 3],
    report: ConservationReport<T>,
}

impl<T: Scalar> Monitor<T> {
    fn new(first: &TrajectorySample<T>) -> Self {
        let defect = first
            .attitude
            .map_or(T::zero(), |r| r.matrix().orthogonality_defect());
        Self {
            h0: first.energy,
            p_theta0: first.p_theta,
            k0: first.invariants,
            report: ConservationReport {
                max_rel_energy_drift: T::zero(),
                max_abs_p_theta_drift: T::zero(),
                min_degeneracy_gap: gap_of(&first.state),
                attitude_orthogonality_max_defect: defect,
                max_invariant_drift: T::zero(),
            },
        }
    }

    fn observe(&mut self, s: &TrajectorySample<T>) {
        let r = &mut self.report;
        let scale = if self.h0 == T::zero() { T::one() } else { self.h0.abs() };
        r.max_rel_energy_drift = r.max_rel_energy_drift.max((s.energy - self.h0).abs() / scale);
        r.max_abs_p_theta_drift = r.max_abs_p_theta_drift.max((s.p_theta - self.p_theta0).abs());
        r.min_degeneracy_gap = r.min_degeneracy_gap.min(gap_of(&s.state));
        if let Some(a) = s.attitude {
            r.attitude_orthogonality_max_defect = r.attitude_orthogonality_max_defect.max(a.matrix().orthogonality_defect());
        }
        for k in 0..3 {
            r.max_invariant_drift = r.max_invariant_drift.max((s.invariants[k] - self.k0[k]).abs());
        }
    }
}

/// Integrates from `state0` over `[0, t_end]`.
///
/// Invalid configurations and invalid or degenerate initial states are
/// errors. Anything that goes wrong along the way ends the run early with a
/// flagged [`Termination`] and the samples gathered so far.
pub fn integrate<T: Scalar, P: Potential<T>>(
    state0: &CanonicalState<T>,
    config: &IntegratorConfig<T>,
    j: &InertiaSpec<T>,
    v: &P,
) -> Result<Trajectory<T>> {
    config.validate()?;
    state0.shape.validate()?;
    if !state0.is_finite() {
        return Err(Error::Domain("initial state has non-finite entries".into()));
    }
    let gap0 = gap_of(state0);
    if gap0 < config.degeneracy_epsilon {
        let scale = state0.shape.lambda.sq().max(state0.shape.mu.sq());
        return Err(Error::Degenerate {
            gap: gap0.to_f64_lossy(),
            threshold: config.degeneracy_epsilon.min(scale).to_f64_lossy(),
        });
    }
    // surfaces Misuse / Degenerate before any stepping
    eom_closed_form(state0, j, v)?;

    let first = TrajectorySample::new(T::zero(), *state0, j, v)?;
    let mut monitor = Monitor::new(&first);
    let mut samples = vec![first];
    let mut state = *state0;
    let mut t = T::zero();
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut termination = Termination::Completed;
    let t_end = config.t_end;

    let record = |t: T, s: &CanonicalState<T>, accepted: usize, force: bool, samples: &mut Vec<TrajectorySample<T>>, monitor: &mut Monitor<T>| -> Result<()> {
        let sample = TrajectorySample::new(t, *s, j, v)?;
        monitor.observe(&sample);
        if force || accepted.is_multiple_of(config.sample_stride) {
            samples.push(sample);
        }
        Ok(())
    };

    match config.method {
        Method::Rk4Fixed { dt } => {
            let ratio = (t_end / dt).to_f64_lossy();
            let n_round = ratio.round();
            let n = if (ratio - n_round).abs() <= 1e-9 * ratio.max(1.0) {
                n_round as usize
            } else {
                ratio.ceil() as usize
            }
            .max(1);
            for k in 1..=n {
                let t_next = if k == n { t_end } else { dt * T::of(k as f64) };
                let h = t_next - t;
                let outcome = match rk4_point(&Point::of(&state), h, j, v).and_then(finish) {
                    Ok(s) => match check_state(&state, &s, t_next, config.degeneracy_epsilon) {
                        Some(stop) => StepOutcome::Stop(stop),
                        None => StepOutcome::Ok(s),
                    },
                    Err(e) => StepOutcome::Stop(classify(e, t, gap_of(&state))?),
                };
                match outcome {
                    StepOutcome::Ok(s) => {
                        state = s;
                        t = t_next;
                        accepted += 1;
                        record(t, &state, accepted, k == n, &mut samples, &mut monitor)?;
                    }
                    StepOutcome::Stop(stop) => {
                        termination = stop;
                        break;
                    }
                }
            }
        }
        Method::Rk45Adaptive {
            rel_tol,
            abs_tol,
            dt_min,
            dt_max,
        } => {
            let mut dt = dt_max.min(t_end).min(T::of(1e-2) * t_end).max(dt_min);
            let shrink = T::of(MIN_FACTOR);
            while t < t_end {
                let last = t + dt >= t_end;
                let h = if last { t_end - t } else { dt };
                let attempt = dopri_point(&Point::of(&state), h, rel_tol, abs_tol, j, v);
                let (y, err) = match attempt {
                    Ok(pair) => pair,
                    Err(Error::Degenerate { .. }) | Err(Error::Domain(_)) if h > dt_min => {
                        // a stage wandered off the chart; retry smaller
                        rejected += 1;
                        dt = (h * shrink).max(dt_min);
                        continue;
                    }
                    Err(e) => {
                        termination = classify(e, t, gap_of(&state))?;
                        break;
                    }
                };
                let factor = T::of(step_factor(err.to_f64_lossy()));
                if err.is_finite() && err <= T::one() {
                    let next = match finish(y) {
                        Ok(s) => s,
                        Err(e) => {
                            termination = classify(e, t, gap_of(&state))?;
                            break;
                        }
                    };
                    let t_next = if last { t_end } else { t + h };
                    if let Some(stop) = check_state(&state, &next, t_next, config.degeneracy_epsilon) {
                        termination = stop;
                        break;
                    }
                    state = next;
                    t = t_next;
                    accepted += 1;
                    record(t, &state, accepted, last, &mut samples, &mut monitor)?;
                    dt = (h * factor).min(dt_max).max(dt_min);
                } else {
                    rejected += 1;
                    if h <= dt_min {
                        termination = Termination::StepSizeUnderflow { t, dt: h };
                        break;
                    }
                    dt = (h * factor).max(dt_min);
                }
            }
        }
    }

    if !termination.is_completed() {
        let tail = samples.last().map(|s| s.t);
        if tail != Some(t) {
            let sample = TrajectorySample::new(t, state, j, v)?;
            monitor.observe(&sample);
            samples.push(sample);
        }
    }

    Ok(Trajectory {
        samples,
        report: monitor.report,
        termination,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// `Φ(t)` assembled from a sample's attitude and shape.
pub fn reconstruct_placement<T: Scalar>(sample: &TrajectorySample<T>) -> Result<PlacementMatrix<T>> {
    let r = sample
        .attitude
        .ok_or_else(|| Error::Misuse("sample carries no attitude; integrate with an initial attitude".into()))?;
    Ok(assemble_placement(&r, &sample.state.shape))
}
