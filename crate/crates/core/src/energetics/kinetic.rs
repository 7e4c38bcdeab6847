use crate::error::{Error, Result};
use crate::kinematics::{theta_generator, u_inverse_matrix, Rotation3, ShapeCoords};
use crate::linalg::{solve_dense, Mat3};
use crate::scalar::Scalar;
use crate::tolerance::check_nondegenerate;

/// Diagonal inertia quadrupole `diag(J1, J2, J3)` in the material frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertiaSpec<T> {
    pub j1: T,
    pub j2: T,
    pub j3: T,
}

impl<T: Scalar> InertiaSpec<T> {
    pub fn new(j1: T, j2: T, j3: T) -> Result<Self> {
        for (name, v) in [("J1", j1), ("J2", j2), ("J3", j3)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { j1, j2, j3 })
    }

    /// `J1 = J2 = j`, thickness inertia `j3`.
    pub fn isotropic(j: T, j3: T) -> Result<Self> {
        Self::new(j, j, j3)
    }

    pub fn is_isotropic(&self) -> bool {
        self.j1 == self.j2
    }

    pub(crate) fn require_isotropic(&self) -> Result<T> {
        if self.is_isotropic() {
            Ok(self.j1)
        } else {
            Err(Error::Misuse(format!(
                "isotropic formula called with anisotropic inertia (J1 = {}, J2 = {})",
                self.j1, self.j2
            )))
        }
    }
}

/// Generalized velocities: co-moving angular velocity `ω = R⁻¹Ṙ` and the
/// rates of the shape variables.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VelocityCoords<T> {
    pub omega1: T,
    pub omega2: T,
    pub omega3: T,
    pub lambda_dot: T,
    pub mu_dot: T,
    pub rho_dot: T,
    pub theta_dot: T,
}

impl<T: Scalar> VelocityCoords<T> {
    /// Ordered as `[ω1, ω2, ω3, θ̇, λ̇, μ̇, ϱ̇]`, pairing with
    /// [`MomentumCoords::to_array`].
    pub fn to_array(&self) -> [T; 7] {
        [
            self.omega1,
            self.omega2,
            self.omega3,
            self.theta_dot,
            self.lambda_dot,
            self.mu_dot,
            self.rho_dot,
        ]
    }

    pub fn from_array(a: [T; 7]) -> Self {
        Self {
            omega1: a[0],
            omega2: a[1],
            omega3: a[2],
            theta_dot: a[3],
            lambda_dot: a[4],
            mu_dot: a[5],
            rho_dot: a[6],
        }
    }

    pub fn omega(&self) -> [T; 3] {
        [self.omega1, self.omega2, self.omega3]
    }
}

/// Canonical momenta: spins `s_i` conjugate to `ω_i` and the momenta
/// conjugate to the shape variables.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentumCoords<T> {
    pub s1: T,
    pub s2: T,
    pub s3: T,
    pub p_theta: T,
    pub p_lambda: T,
    pub p_mu: T,
    pub p_rho: T,
}

impl<T: Scalar> MomentumCoords<T> {
    /// Ordered as `[s1, s2, s3, p_θ, p_λ, p_μ, p_ϱ]`.
    pub fn to_array(&self) -> [T; 7] {
        [self.s1, self.s2, self.s3, self.p_theta, self.p_lambda, self.p_mu, self.p_rho]
    }

    pub fn from_array(a: [T; 7]) -> Self {
        Self {
            s1: a[0],
            s2: a[1],
            s3: a[2],
            p_theta: a[3],
            p_lambda: a[4],
            p_mu: a[5],
            p_rho: a[6],
        }
    }

    pub fn spin(&self) -> [T; 3] {
        [self.s1, self.s2, self.s3]
    }
}

/// `Φ̇ = R·(Ḋ + ω·D − D·ϑ)·U⁻¹` with `ω` in the co-moving convention and
/// `ϑ = θ̇·K`.
pub fn placement_velocity<T: Scalar>(r: &Rotation3<T>, shape: &ShapeCoords<T>, vel: &VelocityCoords<T>) -> Mat3<T> {
    let d = shape.stretch_matrix();
    let d_dot = Mat3::diag(vel.lambda_dot, vel.mu_dot, vel.rho_dot);
    let omega = Mat3::comoving_skew(vel.omega());
    let vartheta = theta_generator::<T>().scale(vel.theta_dot);
    *r.matrix() * (d_dot + omega * d - d * vartheta) * u_inverse_matrix(shape.theta)
}

/// `T = ½·Tr(J·Φ̇ᵀ·Φ̇)` for diagonal `J`.
pub fn kinetic_energy_trace<T: Scalar>(phi_dot: &Mat3<T>, j: &InertiaSpec<T>) -> T {
    let jd = [j.j1, j.j2, j.j3];
    let col_sq = |a: usize| (0..3).map(|i| phi_dot[(i, a)].sq()).sum::<T>();
    T::half() * (0..3).map(|a| jd[a] * col_sq(a)).sum::<T>()
}

/// Material-frame weights `(J1 cos²θ + J2 sin²θ, J1 sin²θ + J2 cos²θ,
/// (J1 − J2) sinθ cosθ)`.
fn frame_weights<T: Scalar>(theta: T, j: &InertiaSpec<T>) -> (T, T, T) {
    let (s, c) = theta.sin_cos();
    (
        j.j1 * c.sq() + j.j2 * s.sq(),
        j.j1 * s.sq() + j.j2 * c.sq(),
        (j.j1 - j.j2) * s * c,
    )
}

/// Kinetic energy in the two-polar velocities for a general diagonal `J`.
pub fn kinetic_energy_velocities<T: Scalar>(shape: &ShapeCoords<T>, vel: &VelocityCoords<T>, j: &InertiaSpec<T>) -> T {
    let (a, b, x) = frame_weights(shape.theta, j);
    let ShapeCoords { lambda: l, mu: m, rho: r, .. } = *shape;
    let VelocityCoords {
        omega1: w1,
        omega2: w2,
        omega3: w3,
        lambda_dot: ld,
        mu_dot: md,
        rho_dot: rd,
        theta_dot: td,
    } = *vel;
    let h = T::half();
    let j3r2 = j.j3 * r.sq();
    h * a * ld.sq()
        + h * b * md.sq()
        + h * j.j3 * rd.sq()
        + h * (b * m.sq() + j3r2) * w1.sq()
        + h * (a * l.sq() + j3r2) * w2.sq()
        + (j.j1 + j.j2) * l * m * w3 * td
        + x * ((m * md - l * ld) * td + (l * md - m * ld) * w3 + l * m * w1 * w2)
        + h * (a * l.sq() + b * m.sq()) * w3.sq()
        + h * (b * l.sq() + a * m.sq()) * td.sq()
}

/// Kinetic energy for `J1 = J2 = J`.
pub fn kinetic_energy_isotropic<T: Scalar>(
    shape: &ShapeCoords<T>,
    vel: &VelocityCoords<T>,
    j: &InertiaSpec<T>,
) -> Result<T> {
    let jj = j.require_isotropic()?;
    let ShapeCoords { lambda: l, mu: m, rho: r, .. } = *shape;
    let h = T::half();
    let j3r2 = j.j3 * r.sq();
    Ok(h * jj * (vel.lambda_dot.sq() + vel.mu_dot.sq())
        + h * j.j3 * vel.rho_dot.sq()
        + h * (jj * m.sq() + j3r2) * vel.omega1.sq()
        + h * (jj * l.sq() + j3r2) * vel.omega2.sq()
        + T::two() * jj * l * m * vel.omega3 * vel.theta_dot
        + h * jj * (l.sq() + m.sq()) * (vel.omega3.sq() + vel.theta_dot.sq()))
}

/// Velocity-to-momentum map `p = ∂T/∂v` for a general diagonal `J`.
pub fn legendre_forward<T: Scalar>(shape: &ShapeCoords<T>, vel: &VelocityCoords<T>, j: &InertiaSpec<T>) -> MomentumCoords<T> {
    let (a, b, x) = frame_weights(shape.theta, j);
    let ShapeCoords { lambda: l, mu: m, rho: r, .. } = *shape;
    let j3r2 = j.j3 * r.sq();
    let jsum = j.j1 + j.j2;
    let v = vel;
    MomentumCoords {
        s1: (b * m.sq() + j3r2) * v.omega1 + x * l * m * v.omega2,
        s2: (a * l.sq() + j3r2) * v.omega2 + x * l * m * v.omega1,
        s3: (a * l.sq() + b * m.sq()) * v.omega3
            + jsum * l * m * v.theta_dot
            + x * (l * v.mu_dot - m * v.lambda_dot),
        p_theta: (b * l.sq() + a * m.sq()) * v.theta_dot
            + jsum * l * m * v.omega3
            + x * (m * v.mu_dot - l * v.lambda_dot),
        p_lambda: a * v.lambda_dot - x * (l * v.theta_dot + m * v.omega3),
        p_mu: b * v.mu_dot + x * (m * v.theta_dot + l * v.omega3),
        p_rho: j.j3 * v.rho_dot,
    }
}

/// The symmetric 7×7 matrix `M` with `p = M·v` (orderings of
/// [`MomentumCoords::to_array`] and [`VelocityCoords::to_array`]), built
/// column by column from [`legendre_forward`].
pub fn mass_matrix<T: Scalar>(shape: &ShapeCoords<T>, j: &InertiaSpec<T>) -> [[T; 7]; 7] {
    let mut m = [[T::zero(); 7]; 7];
    for k in 0..7 {
        let mut e = [T::zero(); 7];
        e[k] = T::one();
        let col = legendre_forward(shape, &VelocityCoords::from_array(e), j).to_array();
        for (i, v) in col.into_iter().enumerate() {
            m[i][k] = v;
        }
    }
    m
}

/// Closed-form momentum-to-velocity map for `J1 = J2 = J`.
pub fn legendre_inverse_isotropic<T: Scalar>(
    shape: &ShapeCoords<T>,
    mom: &MomentumCoords<T>,
    j: &InertiaSpec<T>,
) -> Result<VelocityCoords<T>> {
    let jj = j.require_isotropic()?;
    let ShapeCoords { lambda: l, mu: m, rho: r, .. } = *shape;
    check_nondegenerate(l, m)?;
    let (l2, m2) = (l.sq(), m.sq());
    let j3r2 = j.j3 * r.sq();
    let denom = jj * (l2 - m2).sq();
    let two_lm = T::two() * l * m;
    Ok(VelocityCoords {
        omega1: mom.s1 / (jj * m2 + j3r2),
        omega2: mom.s2 / (jj * l2 + j3r2),
        omega3: ((l2 + m2) * mom.s3 - two_lm * mom.p_theta) / denom,
        theta_dot: ((l2 + m2) * mom.p_theta - two_lm * mom.s3) / denom,
        lambda_dot: mom.p_lambda / jj,
        mu_dot: mom.p_mu / jj,
        rho_dot: mom.p_rho / j.j3,
    })
}

/// Momentum-to-velocity map for any diagonal `J`: the closed form when
/// `J1 = J2`, otherwise a linear solve against [`mass_matrix`].
///
/// The anisotropic branch is experimental; the equations of motion in
/// [`crate::hamiltonian`] cover the isotropic case only.
pub fn legendre_inverse<T: Scalar>(
    shape: &ShapeCoords<T>,
    mom: &MomentumCoords<T>,
    j: &InertiaSpec<T>,
) -> Result<VelocityCoords<T>> {
    if j.is_isotropic() {
        return legendre_inverse_isotropic(shape, mom, j);
    }
    check_nondegenerate(shape.lambda, shape.mu)?;
    let m = mass_matrix(shape, j);
    let a = m.iter().map(|row| row.to_vec()).collect();
    let v = solve_dense(a, mom.to_array().to_vec()).ok_or(Error::SingularMatrix)?;
    Ok(VelocityCoords::from_array([v[0], v[1], v[2], v[3], v[4], v[5], v[6]]))
}

/// Kinetic energy in canonical variables for `J1 = J2 = J`.
pub fn kinetic_energy_canonical<T: Scalar>(shape: &ShapeCoords<T>, mom: &MomentumCoords<T>, j: &InertiaSpec<T>) -> Result<T> {
    let jj = j.require_isotropic()?;
    let ShapeCoords { lambda: l, mu: m, rho: r, .. } = *shape;
    check_nondegenerate(l, m)?;
    let (l2, m2) = (l.sq(), m.sq());
    let j3r2 = j.j3 * r.sq();
    let two = T::two();
    let spin_sq = mom.s3.sq() + mom.p_theta.sq();
    Ok(mom.s1.sq() / (two * (jj * m2 + j3r2))
        + mom.s2.sq() / (two * (jj * l2 + j3r2))
        + ((l2 + m2) * spin_sq - T::of(4.0) * l * m * mom.p_theta * mom.s3) / (two * jj * (l2 - m2).sq())
        + (mom.p_lambda.sq() + mom.p_mu.sq()) / (two * jj)
        + mom.p_rho.sq() / (two * j.j3))
}
