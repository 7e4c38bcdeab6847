//! Stationary ellipses: motions with constant `λ, μ, ϱ`, `ω1 = ω2 = 0` and
//! uniform rotations `ω3`, `θ̇`.

use crate::energetics::{legendre_inverse_isotropic, InertiaSpec, MomentumCoords, PotentialSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::CanonicalState;
use crate::kinematics::{assemble_placement, theta_generator, u_inverse_matrix, PlacementMatrix, Rotation3, ShapeCoords};
use crate::linalg::{exp_antisymmetric, Mat3};
use crate::scalar::Scalar;
use crate::tolerance::check_nondegenerate;

pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 60;
const JACOBIAN_STEP: f64 = 1e-7;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 40;
/// Roots with `μ/λ` below this sit on the rank-deficient boundary `μ → 0`
/// (where the `μ` equation vanishes trivially) and are not accepted.
pub const BOUNDARY_RATIO: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryProblem<T> {
    pub s3: T,
    pub p_theta: T,
    pub inertia: InertiaSpec<T>,
    pub potential: PotentialSpec<T>,
    /// Starting point `(λ₀, μ₀, ϱ₀)`.
    pub guess: [T; 3],
}

impl<T: Scalar> StationaryProblem<T> {
    pub fn validate(&self) -> Result<()> {
        self.inertia.require_isotropic()?;
        self.potential.flat.validate()?;
        self.potential.thickness.validate()?;
        for (name, v) in [("s3", self.s3), ("p_theta", self.p_theta)] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in ["lambda", "mu", "rho"].into_iter().zip(self.guess) {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidConfig(format!("guess {name} must be positive, got {v}")));
            }
        }
        check_nondegenerate(self.guess[0], self.guess[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarySolution<T> {
    pub lambda_star: T,
    pub mu_star: T,
    pub rho_star: T,
    pub omega3: T,
    pub theta_dot: T,
    /// `‖residual‖∞` at the returned point.
    pub residual_norm: T,
    pub iterations: usize,
}

/// `(∂V/∂λ − F_λ, ∂V/∂μ − F_μ, dV_ϱ/dϱ)` where `F_λ, F_μ` are the
/// centrifugal terms produced by `s3` and `p_θ`. Zero exactly at a
/// stationary ellipse.
pub fn stationary_residual<T: Scalar>(lambda: T, mu: T, rho: T, problem: &StationaryProblem<T>) -> Result<[T; 3]> {
    let jj = problem.inertia.require_isotropic()?;
    check_nondegenerate(lambda, mu)?;
    let [gl, gm, gr] = crate::energetics::Potential::gradient(&problem.potential, lambda, mu, rho)?;
    let (l, m) = (lambda, mu);
    let (l2, m2) = (l.sq(), m.sq());
    let three = T::of(3.0);
    let two = T::two();
    let spin_sq = problem.s3.sq() + problem.p_theta.sq();
    let cross = problem.s3 * problem.p_theta;
    let denom = jj * (l2 - m2) * (l2 - m2).sq();
    let f_lambda = (l * (l2 + three * m2) * spin_sq - two * m * (m2 + three * l2) * cross) / denom;
    let f_mu = (two * l * (l2 + three * m2) * cross - m * (m2 + three * l2) * spin_sq) / denom;
    Ok([gl - f_lambda, gm - f_mu, gr])
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a.max(x.abs()))
}

/// Root of the monotone `dV_ϱ/dϱ` by bracketing and bisection.
fn solve_thickness<T: Scalar>(problem: &StationaryProblem<T>) -> Result<T> {
    let th = &problem.potential.thickness;
    let d = |r: T| th.derivative(r);
    let (mut lo, mut hi) = (problem.guess[2], problem.guess[2]);
    let two = T::two();
    for _ in 0..2000 {
        if d(lo)? <= T::zero() {
            break;
        }
        lo /= two;
    }
    for _ in 0..2000 {
        if d(hi)? >= T::zero() {
            break;
        }
        hi *= two;
    }
    if d(lo)? > T::zero() || d(hi)? < T::zero() {
        return Err(Error::NoSolution {
            reason: "could not bracket the thickness equilibrium".into(),
            best_residual: d(problem.guess[2])?.abs().to_f64_lossy(),
            iterations: 0,
        });
    }
    for _ in 0..400 {
        let mid = T::half() * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid)? < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if d(lo)?.abs() <= d(hi)?.abs() { lo } else { hi })
}

/// Acceptable Newton iterate: positive, strictly inside the `λ > μ` chart.
fn admissible<T: Scalar>(x: [T; 2]) -> bool {
    x[0].is_finite() && x[1].is_finite() && x[1] > T::zero() && x[0] > x[1] && check_nondegenerate(x[0], x[1]).is_ok()
}

fn planar_residual<T: Scalar>(x: [T; 2], rho: T, problem: &StationaryProblem<T>) -> Result<[T; 2]> {
    let r = stationary_residual(x[0], x[1], rho, problem)?;
    Ok([r[0], r[1]])
}

/// Damped Newton on the in-plane pair after the decoupled thickness
/// equation has been solved.
///
/// A guess with `λ₀ < μ₀` is mirrored into the `λ > μ` chart first and the
/// iterates are kept inside it. Failure to converge is reported as
/// [`Error::NoSolution`] with the best residual seen; for some potentials
/// and spin values the system has no root at all.
pub fn solve_stationary<T: Scalar>(problem: &StationaryProblem<T>) -> Result<StationarySolution<T>> {
    problem.validate()?;
    let rho = solve_thickness(problem)?;
    let tol = T::of(RESIDUAL_TOL);

    let (g0, g1) = (problem.guess[0], problem.guess[1]);
    let mut x = if g0 > g1 { [g0, g1] } else { [g1, g0] };
    let mut r = planar_residual(x, rho, problem)?;
    let mut norm = inf_norm(&r);
    let mut best = norm;
    let mut iterations = 0;

    while norm > tol {
        if iterations == MAX_ITERATIONS {
            return Err(no_solution("iteration cap reached", best, iterations));
        }
        iterations += 1;

        let mut jac = [[T::zero(); 2]; 2];
        for k in 0..2 {
            let h = T::of(JACOBIAN_STEP) * T::one().max(x[k].abs());
            let mut xp = x;
            xp[k] += h;
            let h = xp[k] - x[k];
            let rp = planar_residual(xp, rho, problem)?;
            for i in 0..2 {
                jac[i][k] = (rp[i] - r[i]) / h;
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == T::zero() || !det.is_finite() {
            return Err(no_solution("singular Jacobian", best, iterations));
        }
        let dx = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];

        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = [x[0] + alpha * dx[0], x[1] + alpha * dx[1]];
            if admissible(cand) {
                let rc = planar_residual(cand, rho, problem)?;
                let nc = inf_norm(&rc);
                if nc < norm {
                    accepted = Some((cand, rc, nc));
                    break;
                }
            }
            alpha *= T::of(BACKTRACK);
        }
        let Some((cand, rc, nc)) = accepted else {
            if near_diagonal(x) {
                return Err(Error::Degenerate {
                    gap: (x[0].sq() - x[1].sq()).abs().to_f64_lossy(),
                    threshold: (T::of(1e-3) * x[0].sq()).to_f64_lossy(),
                });
            }
            return Err(no_solution("line search could not reduce the residual", best, iterations));
        };
        x = cand;
        r = rc;
        norm = nc;
        best = best.min(norm);
    }

    if x[1] < T::of(BOUNDARY_RATIO) * x[0] {
        return Err(no_solution(
            "iterates collapsed onto the mu -> 0 boundary; no interior root",
            best,
            iterations,
        ));
    }
    let total = inf_norm(&stationary_residual(x[0], x[1], rho, problem)?);
    let vel = legendre_inverse_isotropic(
        &ShapeCoords {
            lambda: x[0],
            mu: x[1],
            rho,
            theta: T::zero(),
        },
        &spin_only(problem),
        &problem.inertia,
    )?;
    Ok(StationarySolution {
        lambda_star: x[0],
        mu_star: x[1],
        rho_star: rho,
        omega3: vel.omega3,
        theta_dot: vel.theta_dot,
        residual_norm: total,
        iterations,
    })
}

fn near_diagonal<T: Scalar>(x: [T; 2]) -> bool {
    (x[0].sq() - x[1].sq()).abs() < T::of(1e-3) * x[0].sq().max(x[1].sq())
}

fn no_solution<T: Scalar>(reason: &str, best: T, iterations: usize) -> Error {
    Error::NoSolution {
        reason: reason.into(),
        best_residual: best.to_f64_lossy(),
        iterations,
    }
}

fn spin_only<T: Scalar>(problem: &StationaryProblem<T>) -> MomentumCoords<T> {
    let z = T::zero();
    MomentumCoords {
        s1: z,
        s2: z,
        s3: problem.s3,
        p_theta: problem.p_theta,
        p_lambda: z,
        p_mu: z,
        p_rho: z,
    }
}

/// Canonical state sitting on the stationary ellipse, with material angle
/// `theta0`.
pub fn stationary_initial_state<T: Scalar>(
    sol: &StationarySolution<T>,
    problem: &StationaryProblem<T>,
    theta0: T,
) -> Result<CanonicalState<T>> {
    let shape = ShapeCoords::new(sol.lambda_star, sol.mu_star, sol.rho_star, theta0)?;
    check_nondegenerate(shape.lambda, shape.mu)?;
    Ok(CanonicalState::new(shape, spin_only(problem)))
}

/// `Φ(t) = R₀·e^{ω̃t}·D·(U₀·e^{ϑt})⁻¹` with constant `ω̃` (only `ω3`) and
/// `ϑ = θ̇·K`.
pub fn reconstruct_stationary_motion<T: Scalar>(
    sol: &StationarySolution<T>,
    r0: &Rotation3<T>,
    theta0: T,
    t: T,
) -> PlacementMatrix<T> {
    let omega = Mat3::comoving_skew([T::zero(), T::zero(), sol.omega3]);
    let vartheta = theta_generator::<T>().scale(sol.theta_dot);
    let d = Mat3::diag(sol.lambda_star, sol.mu_star, sol.rho_star);
    let body = *r0.matrix() * exp_antisymmetric(&omega.scale(t));
    // (U₀·e^{ϑt})⁻¹ = e^{−ϑt}·U₀⁻¹
    let material = exp_antisymmetric(&vartheta.scale(-t)) * u_inverse_matrix(theta0);
    PlacementMatrix(body * d * material)
}

/// The same motion written in spatial form, `e^{ω̂t}·Φ₀·e^{−ϑ̂t}` with
/// `ω̂ = R₀ω̃R₀⁻¹` and `ϑ̂ = U₀ϑU₀⁻¹`.
pub fn reconstruct_stationary_motion_spatial<T: Scalar>(
    sol: &StationarySolution<T>,
    r0: &Rotation3<T>,
    theta0: T,
    t: T,
) -> Result<PlacementMatrix<T>> {
    let shape = ShapeCoords::new(sol.lambda_star, sol.mu_star, sol.rho_star, theta0)?;
    let phi0 = assemble_placement(r0, &shape);
    let r = *r0.matrix();
    let u0_inv = u_inverse_matrix(theta0);
    let u0 = u0_inv.transpose();
    let omega_hat = r * Mat3::comoving_skew([T::zero(), T::zero(), sol.omega3]) * r.transpose();
    let vartheta_hat = u0 * theta_generator::<T>().scale(sol.theta_dot) * u0_inv;
    Ok(PlacementMatrix(
        exp_antisymmetric(&omega_hat.scale(t)) * *phi0.matrix() * exp_antisymmetric(&vartheta_hat.scale(-t)),
    ))
}

/// Coarse scan of `‖residual‖∞` over a `λ > μ` grid at the given thickness.
/// Returns the best `(λ, μ, norm)`; a diagnostic for failed solves.
pub fn grid_scan<T: Scalar>(
    problem: &StationaryProblem<T>,
    rho: T,
    lambda_range: (T, T),
    mu_range: (T, T),
    n: usize,
) -> Option<(T, T, T)> {
    let n = n.max(2);
    let step = |(a, b): (T, T), i: usize| a + (b - a) * T::of(i as f64 / (n - 1) as f64);
    let mut best: Option<(T, T, T)> = None;
    for i in 0..n {
        let l = step(lambda_range, i);
        for k in 0..n {
            let m = step(mu_range, k);
            if !(m > T::zero() && l > m) {
                continue;
            }
            let Ok(r) = stationary_residual(l, m, rho, problem) else {
                continue;
            };
            let norm = inf_norm(&r[..2]);
            if best.is_none_or(|b| norm < b.2) {
                best = Some((l, m, norm));
            }
        }
    }
    best
}
