//! Constrained placement `Φ = R·D·U(θ)⁻¹`, its decomposition, deformation
//! tensors and invariants.
//!
//! `R` is the spatial attitude, `D = diag(λ, μ, ϱ)` holds the two in-plane
//! stretches and the thickness stretch, and `U(θ)` is a rotation about the
//! material normal. The third column of every such placement is parallel to
//! the cross product of the first two (Kirchhoff–Love condition).

use crate::error::{Error, Result};
use crate::linalg::{close, cross, dot, norm, orthonormalize, symmetric_eigen, Mat3};
use crate::scalar::Scalar;
use crate::tolerance::check_nondegenerate;

/// Relative tolerance used to decide whether a matrix has the constrained
/// block structure (third column orthogonal to the first two).
pub const STRUCTURE_TOL: f64 = 1e-9;

fn rotation_tol<T: Scalar>() -> T {
    T::of(1e-12).max(T::of(64.0) * T::epsilon())
}

fn structure_tol<T: Scalar>() -> T {
    T::of(STRUCTURE_TOL).max(T::of(64.0) * T::epsilon())
}

/// Two-polar shape variables: in-plane stretches `lambda`, `mu`, thickness
/// stretch `rho` and material angle `theta` (radians).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeCoords<T> {
    pub lambda: T,
    pub mu: T,
    pub rho: T,
    pub theta: T,
}

impl<T: Scalar> ShapeCoords<T> {
    pub fn new(lambda: T, mu: T, rho: T, theta: T) -> Result<Self> {
        let s = Self { lambda, mu, rho, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.mu.is_finite() && self.rho.is_finite() && self.theta.is_finite()) {
            return Err(Error::Domain("shape coordinates must be finite".into()));
        }
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu), ("rho", self.rho)] {
            if v <= T::zero() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Canonical ordering `lambda > mu`.
    pub fn is_ordered(&self) -> bool {
        self.lambda > self.mu
    }

    /// `diag(λ, μ, ϱ)`.
    pub fn stretch_matrix(&self) -> Mat3<T> {
        Mat3::diag(self.lambda, self.mu, self.rho)
    }

    /// Squared stretches sorted descending.
    pub fn sorted_squares(&self) -> [T; 3] {
        let mut v = [self.lambda.sq(), self.mu.sq(), self.rho.sq()];
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        v
    }
}

/// A proper orthogonal 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation3<T>(Mat3<T>);

impl<T: Scalar> Rotation3<T> {
    /// Validates `RᵀR = I` and `det R = 1` to `1e-12` entrywise.
    pub fn new(m: Mat3<T>) -> Result<Self> {
        let tol = rotation_tol::<T>();
        if !m.is_finite() {
            return Err(Error::Domain("rotation entries must be finite".into()));
        }
        let defect = m.orthogonality_defect();
        if defect > tol {
            return Err(Error::Domain(format!("matrix is not orthogonal (defect {defect})")));
        }
        if (m.det() - T::one()).abs() > tol {
            return Err(Error::Domain("rotation must have determinant +1".into()));
        }
        Ok(Self(m))
    }

    /// Projects a nearly orthogonal matrix with positive determinant onto
    /// SO(3) and validates the result.
    pub fn from_nearly_orthogonal(m: &Mat3<T>) -> Result<Self> {
        let r = orthonormalize(m).ok_or_else(|| Error::Domain("cannot orthonormalize matrix".into()))?;
        Self::new(r)
    }

    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.0
    }

    pub fn into_inner(self) -> Mat3<T> {
        self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }
}

/// A 3×3 placement matrix Φ. Any matrix may be wrapped; the operations
/// that need the constrained structure check it themselves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacementMatrix<T>(pub Mat3<T>);

impl<T: Scalar> PlacementMatrix<T> {
    pub fn matrix(&self) -> &Mat3<T> {
        &self.0
    }

    pub fn from_row_slice(v: &[T; 9]) -> Self {
        Self(Mat3::from_row_slice(v))
    }
}

/// Symmetric positive-definite deformation tensor (Green or Cauchy).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationTensor<T>(pub Mat3<T>);

impl<T: Scalar> DeformationTensor<T> {
    pub fn matrix(&self) -> &Mat3<T> {
        &self.0
    }
}

/// Generator `K` of rotations about the material normal: `U(θ) = exp(θK)`.
pub(crate) fn theta_generator<T: Scalar>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    Mat3::from_rows([[z, -o, z], [o, z, z], [z, z, z]])
}

pub(crate) fn u_inverse_matrix<T: Scalar>(theta: T) -> Mat3<T> {
    let (s, c) = theta.sin_cos();
    let (o, z) = (T::one(), T::zero());
    Mat3::from_rows([[c, s, z], [-s, c, z], [z, z, o]])
}

/// `U(θ)⁻¹ = [[cos θ, sin θ, 0], [−sin θ, cos θ, 0], [0, 0, 1]]`.
pub fn material_rotation<T: Scalar>(theta: T) -> Result<Rotation3<T>> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be finite, got {theta}")));
    }
    Ok(Rotation3(u_inverse_matrix(theta)))
}

/// `U(θ)` itself, the transpose of [`material_rotation`].
pub fn material_frame<T: Scalar>(theta: T) -> Result<Rotation3<T>> {
    material_rotation(theta).map(|u| u.inverse())
}

/// `Φ = R·diag(λ, μ, ϱ)·U(θ)⁻¹`.
pub fn assemble_placement<T: Scalar>(r: &Rotation3<T>, shape: &ShapeCoords<T>) -> PlacementMatrix<T> {
    PlacementMatrix(*r.matrix() * shape.stretch_matrix() * u_inverse_matrix(shape.theta))
}

/// Inverse of [`assemble_placement`].
///
/// The result is in canonical form: `lambda ≥ mu`, both factors proper
/// rotations and `theta ∈ (−π/2, π/2]`. The two-polar factors are only
/// determined up to the simultaneous half-turn `U ↦ U·diag(−1, −1, 1)`,
/// `R ↦ R·diag(−1, −1, 1)`, which shifts θ by π; the canonical range picks
/// one representative.
pub fn two_polar_decompose<T: Scalar>(phi: &PlacementMatrix<T>) -> Result<(Rotation3<T>, ShapeCoords<T>)> {
    let m = phi.matrix();
    if !m.is_finite() {
        return Err(Error::Domain("placement entries must be finite".into()));
    }
    let det = m.det();
    if det <= T::zero() {
        return Err(Error::Orientation { det: det.to_f64_lossy() });
    }
    let g = m.transpose() * *m;
    let tol = structure_tol::<T>();
    for k in 0..2 {
        let bound = tol * (g[(k, k)] * g[(2, 2)]).sqrt();
        if g[(k, 2)].abs() > bound {
            return Err(Error::Structure(format!(
                "third material direction is not a principal direction (G[{}][2] = {})",
                k,
                g[(k, 2)]
            )));
        }
    }

    let (a, b, c) = (g[(0, 0)], g[(1, 1)], g[(0, 1)]);
    let half_diff = (a - b) * T::half();
    let radius = (half_diff.sq() + c.sq()).sqrt();
    let mean = (a + b) * T::half();
    let l2 = mean + radius;
    let m2 = (a * b - c.sq()) / l2;
    check_nondegenerate(l2.sqrt(), m2.abs().sqrt())?;

    let theta = c.atan2(half_diff) * T::half();
    let (s, co) = theta.sin_cos();
    // Columns of Φ·U(θ) = R·D
    let e1 = m.mul_vec(&[co, s, T::zero()]);
    let e2 = m.mul_vec(&[-s, co, T::zero()]);
    let e3 = m.col(2);
    let (lambda, mu, rho) = (norm(&e1), norm(&e2), norm(&e3));
    let mut rd = Mat3::zeros();
    rd.set_col(0, e1.map(|x| x / lambda));
    rd.set_col(1, e2.map(|x| x / mu));
    rd.set_col(2, e3.map(|x| x / rho));
    let defect = rd.orthogonality_defect();
    if defect > structure_tol::<T>() {
        return Err(Error::Structure(format!(
            "left factor is not orthogonal (defect {defect}); no rotation about the material normal diagonalizes the placement"
        )));
    }
    let r = Rotation3::from_nearly_orthogonal(&rd)?;
    let shape = ShapeCoords::new(lambda, mu, rho, theta)?;
    Ok((r, shape))
}

/// Closed form of `G = ΦᵀΦ = U·D²·U⁻¹`.
pub fn green_tensor<T: Scalar>(shape: &ShapeCoords<T>) -> DeformationTensor<T> {
    let (s, c) = shape.theta.sin_cos();
    let (l2, m2) = (shape.lambda.sq(), shape.mu.sq());
    let off = (l2 - m2) * s * c;
    let z = T::zero();
    DeformationTensor(Mat3::from_rows([
        [l2 * c.sq() + m2 * s.sq(), off, z],
        [off, l2 * s.sq() + m2 * c.sq(), z],
        [z, z, shape.rho.sq()],
    ]))
}

/// `ΦᵀΦ` of an arbitrary placement.
pub fn green_tensor_of<T: Scalar>(phi: &PlacementMatrix<T>) -> DeformationTensor<T> {
    let m = phi.matrix();
    DeformationTensor((m.transpose() * *m).symmetric_part())
}

/// Spatial (Cauchy) deformation tensor, taken in the `R·D²·R⁻¹ = Φ·Φᵀ`
/// reading: its eigenvalues are `{λ², μ², ϱ²}`, the same as those of G.
pub fn cauchy_tensor<T: Scalar>(phi: &PlacementMatrix<T>) -> Result<DeformationTensor<T>> {
    let m = phi.matrix();
    let det = m.det();
    let scale = m.max_abs();
    if !det.is_finite() || det.abs() <= T::epsilon() * scale * scale * scale {
        return Err(Error::SingularMatrix);
    }
    Ok(DeformationTensor((*m * m.transpose()).symmetric_part()))
}

/// Roots of `det[G − K·I] = 0`, sorted descending.
pub fn deformation_invariants<T: Scalar>(g: &DeformationTensor<T>) -> Result<[T; 3]> {
    let m = g.matrix();
    if !m.is_finite() {
        return Err(Error::Domain("tensor entries must be finite".into()));
    }
    let tol = rotation_tol::<T>();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if !close(m[(i, j)], m[(j, i)], tol) {
            return Err(Error::Domain("deformation tensor is not symmetric".into()));
        }
    }
    let (vals, _) = symmetric_eigen(m);
    if vals[2] <= T::zero() {
        return Err(Error::Domain(format!("deformation tensor is not positive definite (eigenvalue {})", vals[2])));
    }
    Ok(vals)
}

/// The factor `ℓ` with `column3 = ℓ·(column1 × column2)`.
pub fn kirchhoff_love_parameter<T: Scalar>(phi: &PlacementMatrix<T>) -> Result<T> {
    let m = phi.matrix();
    let (c1, c2, c3) = (m.col(0), m.col(1), m.col(2));
    let n = cross(&c1, &c2);
    let nn = dot(&n, &n);
    if nn <= T::epsilon().sq() * dot(&c1, &c1) * dot(&c2, &c2) {
        return Err(Error::DegenerateColumns);
    }
    let ell = dot(&c3, &n) / nn;
    let resid = [c3[0] - ell * n[0], c3[1] - ell * n[1], c3[2] - ell * n[2]];
    let c3n = norm(&c3);
    let deviation = if c3n > T::zero() { norm(&resid) / c3n } else { T::one() };
    if deviation > structure_tol::<T>() || ell == T::zero() {
        return Err(Error::ConstraintViolation {
            deviation: deviation.to_f64_lossy(),
        });
    }
    if ell < T::zero() {
        return Err(Error::Orientation {
            det: m.det().to_f64_lossy(),
        });
    }
    Ok(ell)
}

/// Minimal-norm left inverse `(φᵀφ)⁻¹φᵀ` of a 3×2 matrix of rank 2.
pub fn left_inverse<T: Scalar>(phi: &[[T; 2]; 3]) -> Result<[[T; 3]; 2]> {
    let mut a = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] = (0..3).map(|k| phi[k][i] * phi[k][j]).sum();
        }
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let tr = a[0][0] + a[1][1];
    if !det.is_finite() || det <= T::of(16.0) * T::epsilon() * tr.sq() {
        return Err(Error::RankDeficient);
    }
    let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
    let mut out = [[T::zero(); 3]; 2];
    for i in 0..2 {
        for k in 0..3 {
            out[i][k] = inv[i][0] * phi[k][0] + inv[i][1] * phi[k][1];
        }
    }
    Ok(out)
}

/// `dG/dt = U·(ϑ·D² − D²·ϑ)·U⁻¹` for a material rotation rate `theta_dot`.
pub fn green_tensor_rate<T: Scalar>(shape: &ShapeCoords<T>, theta_dot: T) -> Mat3<T> {
    let vartheta = theta_generator::<T>().scale(theta_dot);
    let d2 = Mat3::diag(shape.lambda.sq(), shape.mu.sq(), shape.rho.sq());
    let u_inv = u_inverse_matrix(shape.theta);
    let u = u_inv.transpose();
    u * (vartheta * d2 - d2 * vartheta) * u_inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_close;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn shape(l: f64, m: f64, r: f64, t: f64) -> ShapeCoords<f64> {
        ShapeCoords::new(l, m, r, t).unwrap()
    }

    #[test]
    fn material_rotation_examples() {
        let u0 = material_rotation(0.0).unwrap();
        assert_eq!(*u0.matrix(), Mat3::identity());
        let u = material_rotation(FRAC_PI_2).unwrap();
        let expect = Mat3::from_rows([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(mat_close(u.matrix(), &expect, 1e-15));
        let u = material_rotation(0.3).unwrap();
        assert!((*u.matrix() * u.matrix().transpose() - Mat3::identity()).max_abs() <= 1e-15);
        assert!(matches!(material_rotation(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn assemble_examples() {
        let r = Rotation3::identity();
        let phi = assemble_placement(&r, &shape(2.0, 1.0, 0.5, 0.0));
        assert_eq!(*phi.matrix(), Mat3::diag(2.0, 1.0, 0.5));
        let phi = assemble_placement(&r, &shape(2.0, 1.0, 0.5, FRAC_PI_2));
        let expect = Mat3::from_rows([[0.0, 2.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.5]]);
        assert!(mat_close(phi.matrix(), &expect, 1e-15));
        assert!((phi.matrix().det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decompose_diagonal() {
        let (r, s) = two_polar_decompose(&PlacementMatrix(Mat3::diag(2.0, 1.0, 0.5))).unwrap();
        assert!(mat_close(r.matrix(), &Mat3::identity(), 1e-15));
        assert_eq!((s.lambda, s.mu, s.rho, s.theta), (2.0, 1.0, 0.5, 0.0));
    }

    #[test]
    fn decompose_errors() {
        assert!(matches!(
            two_polar_decompose(&PlacementMatrix(Mat3::diag(1.0, 1.0, 0.5))),
            Err(Error::Degenerate { .. })
        ));
        assert!(matches!(
            two_polar_decompose(&PlacementMatrix(Mat3::diag(2.0, -1.0, 0.5))),
            Err(Error::Orientation { .. })
        ));
        let mut m = Mat3::diag(2.0, 1.0, 0.5);
        m[(0, 2)] = 0.3;
        assert!(matches!(two_polar_decompose(&PlacementMatrix(m)), Err(Error::Structure(_))));
    }

    #[test]
    fn decompose_reorders_swapped_stretches() {
        let s = shape(1.0, 2.0, 0.5, 0.2);
        let phi = assemble_placement(&Rotation3::identity(), &s);
        let (r, d) = two_polar_decompose(&phi).unwrap();
        assert!(d.is_ordered());
        assert!((d.lambda - 2.0).abs() < 1e-14 && (d.mu - 1.0).abs() < 1e-14);
        assert!(mat_close(assemble_placement(&r, &d).matrix(), phi.matrix(), 1e-14));
    }

    #[test]
    fn green_examples() {
        let g = green_tensor(&shape(2.0, 1.0, 0.5, 0.0));
        assert_eq!(*g.matrix(), Mat3::diag(4.0, 1.0, 0.25));
        let g = green_tensor(&shape(2.0, 1.0, 0.5, FRAC_PI_4));
        assert!((g.0[(0, 0)] - 2.5).abs() < 1e-15);
        assert!((g.0[(1, 1)] - 2.5).abs() < 1e-15);
        assert!((g.0[(0, 1)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn cauchy_examples() {
        let c = cauchy_tensor(&PlacementMatrix(Mat3::diag(2.0, 1.0, 0.5))).unwrap();
        assert_eq!(deformation_invariants(&c).unwrap(), [4.0, 1.0, 0.25]);
        let c = cauchy_tensor(&PlacementMatrix(Mat3::<f64>::identity())).unwrap();
        assert_eq!(*c.matrix(), Mat3::identity());
        let mut sing = Mat3::diag(2.0, 1.0, 0.5);
        sing.set_col(2, [0.0; 3]);
        assert_eq!(cauchy_tensor(&PlacementMatrix(sing)), Err(Error::SingularMatrix));
    }

    #[test]
    fn invariants_examples() {
        let k = deformation_invariants(&green_tensor(&shape(2.0, 1.0, 0.5, 0.3))).unwrap();
        for (a, b) in k.iter().zip([4.0, 1.0, 0.25]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(deformation_invariants(&DeformationTensor(Mat3::<f64>::identity())).unwrap(), [1.0; 3]);
        assert!(deformation_invariants(&DeformationTensor(Mat3::diag(1.0, -1.0, 2.0))).is_err());
        let mut asym = Mat3::<f64>::identity();
        asym[(0, 1)] = 0.1;
        assert!(deformation_invariants(&DeformationTensor(asym)).is_err());
    }

    #[test]
    fn kirchhoff_love_examples() {
        let ell = kirchhoff_love_parameter(&PlacementMatrix(Mat3::diag(2.0, 1.0, 0.5))).unwrap();
        assert_eq!(ell, 0.25);
        assert_eq!(kirchhoff_love_parameter(&PlacementMatrix(Mat3::<f64>::identity())).unwrap(), 1.0);
        let mut bad = Mat3::diag(2.0, 1.0, 0.5);
        bad.set_col(2, [1.0, 0.0, 0.0]);
        assert!(matches!(
            kirchhoff_love_parameter(&PlacementMatrix(bad)),
            Err(Error::ConstraintViolation { .. })
        ));
        let mut flat = Mat3::diag(2.0, 1.0, 0.5);
        flat.set_col(1, [4.0, 0.0, 0.0]);
        assert_eq!(kirchhoff_love_parameter(&PlacementMatrix(flat)), Err(Error::DegenerateColumns));
    }

    #[test]
    fn left_inverse_examples() {
        let inj = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        assert_eq!(left_inverse(&inj).unwrap(), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let same = [[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert_eq!(left_inverse(&same), Err(Error::RankDeficient));
    }

    #[test]
    fn green_rate_vanishes_without_material_rotation_or_anisotropy() {
        let s = shape(2.0, 1.0, 0.5, 0.4);
        assert_eq!(green_tensor_rate(&s, 0.0).max_abs(), 0.0);
        let iso = ShapeCoords { lambda: 1.5, mu: 1.5, rho: 0.5, theta: 0.4 };
        assert!(green_tensor_rate(&iso, 0.9).max_abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let s = ShapeCoords::<f32>::new(2.0, 1.0, 0.5, 0.3).unwrap();
        let phi = assemble_placement(&Rotation3::identity(), &s);
        let (_, d) = two_polar_decompose(&phi).unwrap();
        assert!((d.lambda - 2.0).abs() < 1e-5);
        assert!((d.theta - 0.3).abs() < 1e-5);
    }
}
