//! Hamiltonian, Lie–Poisson structure and equations of motion for the
//! isotropic body (`J1 = J2 = J`).
//!
//! Canonical pairs `(q, p)` for `q ∈ {λ, μ, ϱ, θ}` obey `{q, p} = 1`; the
//! spins obey `{s_i, s_j} = −ε_ijk s_k` with `ε_123 = +1`, so that
//! `ds/dt = s × ∂H/∂s`.

use crate::energetics::{
    kinetic_energy_canonical, legendre_inverse_isotropic, InertiaSpec, MomentumCoords, Potential, PotentialSpec,
};
use crate::error::Result;
use crate::kinematics::{Rotation3, ShapeCoords};
use crate::linalg::Mat3;
use crate::scalar::{DoubleF64, Scalar};
use crate::tolerance::check_nondegenerate;

/// Number of canonical coordinates (attitude excluded).
pub const STATE_DIM: usize = 11;

/// Relative finite-difference step of the bracket oracle.
pub const ORACLE_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalState<T> {
    pub shape: ShapeCoords<T>,
    pub mom: MomentumCoords<T>,
    /// Spatial attitude `R`, carried only for reconstructing the placement.
    pub attitude: Option<Rotation3<T>>,
}

impl<T: Scalar> CanonicalState<T> {
    pub fn new(shape: ShapeCoords<T>, mom: MomentumCoords<T>) -> Self {
        Self { shape, mom, attitude: None }
    }

    pub fn with_attitude(mut self, r: Rotation3<T>) -> Self {
        self.attitude = Some(r);
        self
    }

    /// `[λ, μ, ϱ, θ, p_λ, p_μ, p_ϱ, p_θ, s1, s2, s3]`.
    pub fn to_array(&self) -> [T; STATE_DIM] {
        let (s, p) = (&self.shape, &self.mom);
        [
            s.lambda, s.mu, s.rho, s.theta, p.p_lambda, p.p_mu, p.p_rho, p.p_theta, p.s1, p.s2, p.s3,
        ]
    }

    /// Inverse of [`Self::to_array`]; the attitude is left empty.
    pub fn from_array(x: &[T; STATE_DIM]) -> Self {
        Self {
            shape: ShapeCoords {
                lambda: x[0],
                mu: x[1],
                rho: x[2],
                theta: x[3],
            },
            mom: MomentumCoords {
                p_lambda: x[4],
                p_mu: x[5],
                p_rho: x[6],
                p_theta: x[7],
                s1: x[8],
                s2: x[9],
                s3: x[10],
            },
            attitude: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> CanonicalState<U> {
        let x = self.to_array().map(|v| U::of(v.to_f64_lossy()));
        let mut out = CanonicalState::from_array(&x);
        out.attitude = self.attitude.map(|r| {
            let m = r.into_inner().to_row_array().map(|v| U::of(v.to_f64_lossy()));
            Rotation3::new(Mat3::from_row_slice(&m)).unwrap_or_else(|_| Rotation3::identity())
        });
        out
    }
}

/// Time derivatives of the canonical coordinates (and of `R` when the
/// state carries an attitude).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDerivative<T> {
    pub lambda: T,
    pub mu: T,
    pub rho: T,
    pub theta: T,
    pub p_lambda: T,
    pub p_mu: T,
    pub p_rho: T,
    pub p_theta: T,
    pub s1: T,
    pub s2: T,
    pub s3: T,
    pub attitude: Option<Mat3<T>>,
}

impl<T: Scalar> StateDerivative<T> {
    /// Same ordering as [`CanonicalState::to_array`].
    pub fn to_array(&self) -> [T; STATE_DIM] {
        [
            self.lambda,
            self.mu,
            self.rho,
            self.theta,
            self.p_lambda,
            self.p_mu,
            self.p_rho,
            self.p_theta,
            self.s1,
            self.s2,
            self.s3,
        ]
    }

    pub fn from_array(x: &[T; STATE_DIM], attitude: Option<Mat3<T>>) -> Self {
        Self {
            lambda: x[0],
            mu: x[1],
            rho: x[2],
            theta: x[3],
            p_lambda: x[4],
            p_mu: x[5],
            p_rho: x[6],
            p_theta: x[7],
            s1: x[8],
            s2: x[9],
            s3: x[10],
            attitude,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite()) && self.attitude.is_none_or(|m| m.is_finite())
    }
}

/// `H = T(canonical) + V_λμ(λ, μ) + V_ϱ(ϱ)`.
pub fn hamiltonian<T: Scalar, P: Potential<T>>(state: &CanonicalState<T>, j: &InertiaSpec<T>, v: &P) -> Result<T> {
    let s = &state.shape;
    Ok(kinetic_energy_canonical(s, &state.mom, j)? + v.value(s.lambda, s.mu, s.rho)?)
}

/// `(ω1, ω2, ω3)` from the spins and `p_θ`.
pub fn angular_velocity_from_state<T: Scalar>(state: &CanonicalState<T>, j: &InertiaSpec<T>) -> Result<[T; 3]> {
    Ok(legendre_inverse_isotropic(&state.shape, &state.mom, j)?.omega())
}

fn attitude_rate<T: Scalar>(state: &CanonicalState<T>, omega: [T; 3]) -> Option<Mat3<T>> {
    state.attitude.map(|r| *r.matrix() * Mat3::comoving_skew(omega))
}

/// Closed-form right-hand sides of the canonical equations.
pub fn eom_closed_form<T: Scalar, P: Potential<T>>(
    state: &CanonicalState<T>,
    j: &InertiaSpec<T>,
    v: &P,
) -> Result<StateDerivative<T>> {
    let jj = j.require_isotropic()?;
    let ShapeCoords { lambda: l, mu: m, rho: r, .. } = state.shape;
    check_nondegenerate(l, m)?;
    let MomentumCoords {
        s1,
        s2,
        s3,
        p_theta: pt,
        p_lambda,
        p_mu,
        p_rho,
    } = state.mom;
    let [gl, gm, gr] = v.gradient(l, m, r)?;

    let (l2, m2) = (l.sq(), m.sq());
    let j3r2 = j.j3 * r.sq();
    let a_mu = jj * m2 + j3r2; // J μ² + J3 ϱ²
    let a_lam = jj * l2 + j3r2; // J λ² + J3 ϱ²
    let diff = l2 - m2;
    let two = T::two();
    let three = T::of(3.0);
    let lm2 = two * l * m;
    let spin_sq = s3.sq() + pt.sq();
    let cross_term = s3 * pt;

    let theta_dot = ((l2 + m2) * pt - lm2 * s3) / (jj * diff.sq());
    let omega = [
        s1 / a_mu,
        s2 / a_lam,
        ((l2 + m2) * s3 - lm2 * pt) / (jj * diff.sq()),
    ];

    let ds1 = s2 / (jj * diff.sq())
        * ((jj * m2 * (three * l2 - m2) + j3r2 * (l2 + m2)) / a_lam * s3 - lm2 * pt);
    let ds2 = s1 / (jj * diff.sq())
        * ((jj * l2 * (l2 - three * m2) - j3r2 * (l2 + m2)) / a_mu * s3 + lm2 * pt);
    let ds3 = jj * (m2 - l2) * s1 * s2 / (a_lam * a_mu);

    let cube = jj * diff * diff.sq();
    let dp_lambda = -gl
        + jj * l * s2.sq() / a_lam.sq()
        + (l * (l2 + three * m2) * spin_sq - two * m * (m2 + three * l2) * cross_term) / cube;
    let dp_mu = -gm + jj * m * s1.sq() / a_mu.sq()
        - (m * (m2 + three * l2) * spin_sq - two * l * (l2 + three * m2) * cross_term) / cube;
    let dp_rho = -gr + j.j3 * r * s1.sq() / a_mu.sq() + j.j3 * r * s2.sq() / a_lam.sq();

    Ok(StateDerivative {
        lambda: p_lambda / jj,
        mu: p_mu / jj,
        rho: p_rho / j.j3,
        theta: theta_dot,
        p_lambda: dp_lambda,
        p_mu: dp_mu,
        p_rho: dp_rho,
        p_theta: T::zero(),
        s1: ds1,
        s2: ds2,
        s3: ds3,
        attitude: attitude_rate(state, omega),
    })
}

fn levi_civita(i: usize, j: usize, k: usize) -> i32 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// `ds_i/dt = {s_i, H} = Σ_jk −ε_ijk · s_k · ∂H/∂s_j`.
pub fn spin_bracket_rate<T: Scalar>(spin: [T; 3], grad_spin: [T; 3]) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        for jx in 0..3 {
            for k in 0..3 {
                match levi_civita(i, jx, k) {
                    1 => *o -= spin[k] * grad_spin[jx],
                    -1 => *o += spin[k] * grad_spin[jx],
                    _ => {}
                }
            }
        }
    }
    out
}

/// Gradient of `H` in the ordering of [`CanonicalState::to_array`] by
/// centered differences with step `1e-6 · max(1, |x_i|)`.
pub fn hamiltonian_gradient_fd<T: Scalar, P: Potential<T>>(
    state: &CanonicalState<T>,
    j: &InertiaSpec<T>,
    v: &P,
) -> Result<[T; STATE_DIM]> {
    let x = state.to_array();
    let mut g = [T::zero(); STATE_DIM];
    for i in 0..STATE_DIM {
        let h = T::of(ORACLE_STEP) * T::one().max(x[i].abs());
        let mut xp = x;
        let mut xm = x;
        xp[i] += h;
        xm[i] -= h;
        // the actual step, as represented
        let span = xp[i] - xm[i];
        let hp = hamiltonian(&CanonicalState::from_array(&xp), j, v)?;
        let hm = hamiltonian(&CanonicalState::from_array(&xm), j, v)?;
        g[i] = (hp - hm) / span;
    }
    Ok(g)
}

/// Equations of motion assembled from the basic brackets alone, with every
/// partial derivative of `H` taken by finite differences. Independent of
/// [`eom_closed_form`]; used as its reference.
pub fn eom_bracket_oracle<T: Scalar, P: Potential<T>>(
    state: &CanonicalState<T>,
    j: &InertiaSpec<T>,
    v: &P,
) -> Result<StateDerivative<T>> {
    j.require_isotropic()?;
    check_nondegenerate(state.shape.lambda, state.shape.mu)?;
    let g = hamiltonian_gradient_fd(state, j, v)?;
    let spin = state.mom.spin();
    let grad_spin = [g[8], g[9], g[10]];
    let ds = spin_bracket_rate(spin, grad_spin);
    let x = [
        g[4], g[5], g[6], g[7], // dq/dt = ∂H/∂p
        -g[0], -g[1], -g[2], -g[3], // dp/dt = −∂H/∂q
        ds[0], ds[1], ds[2],
    ];
    Ok(StateDerivative::from_array(&x, attitude_rate(state, grad_spin)))
}

/// [`eom_bracket_oracle`] evaluated in double-double arithmetic and rounded
/// back, so that the differencing error is dominated by truncation rather
/// than by cancellation in `H`.
pub fn eom_bracket_oracle_extended(
    state: &CanonicalState<f64>,
    j: &InertiaSpec<f64>,
    v: &PotentialSpec<f64>,
) -> Result<StateDerivative<f64>> {
    let jx = InertiaSpec::<DoubleF64>::new(j.j1.into(), j.j2.into(), j.j3.into())?;
    let vx: PotentialSpec<DoubleF64> = v.cast();
    let d = eom_bracket_oracle(&state.cast::<DoubleF64>(), &jx, &vx)?;
    let att = d.attitude.map(|m| Mat3::from_row_slice(&m.to_row_array().map(|x| x.to_f64_lossy())));
    Ok(StateDerivative::from_array(&d.to_array().map(|x| x.to_f64_lossy()), att))
}

/// Rate of change of `H` along a derivative field: `Σ ∂H/∂x_i · ẋ_i`.
pub fn energy_rate(grad: &[f64; STATE_DIM], d: &StateDerivative<f64>) -> f64 {
    grad.iter().zip(d.to_array()).map(|(g, x)| g * x).sum()
}
