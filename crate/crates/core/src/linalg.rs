//! Small fixed-size linear algebra over [`Scalar`].

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::Scalar;

pub type Vec3<T> = [T; 3];

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> Mat3<T> {
    pub fn from_rows(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    /// Builds a matrix from nine row-major entries.
    pub fn from_row_slice(v: &[T; 9]) -> Self {
        Self::from_rows([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn to_row_array(&self) -> [T; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn zeros() -> Self {
        Self { m: [[T::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let z = T::zero();
        Self::from_rows([[a, z, z], [z, b, z], [z, z, c]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::from_rows([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    pub fn set_col(&mut self, j: usize, v: Vec3<T>) {
        for (i, x) in v.into_iter().enumerate() {
            self.m[i][j] = x;
        }
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by cofactors; `None` when the determinant is zero or not finite.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        let m = &self.m;
        let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = Self::from_rows([
            [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
            [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
            [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
        ]);
        Some(adj.scale(T::one() / d))
    }

    pub fn max_abs(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.m.iter().flatten().map(|x| x.sq()).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }

    /// Largest entrywise deviation of `selfᵀ·self` from the identity.
    pub fn orthogonality_defect(&self) -> T {
        (self.transpose() * *self - Self::identity()).max_abs()
    }

    pub fn symmetric_part(&self) -> Self {
        (*self + self.transpose()).scale(T::half())
    }

    /// Antisymmetric matrix in the co-moving convention
    /// `[[0, w3, -w2], [-w3, 0, w1], [w2, -w1, 0]]`.
    pub fn comoving_skew(w: Vec3<T>) -> Self {
        let z = T::zero();
        Self::from_rows([[z, w[2], -w[1]], [-w[2], z, w[0]], [w[1], -w[0], z]])
    }
}

impl<T: Scalar> Add for Mat3<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.m.iter_mut().flatten().zip(rhs.m.iter().flatten()) {
            *a += *b;
        }
        self
    }
}

impl<T: Scalar> Sub for Mat3<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.m.iter_mut().flatten().zip(rhs.m.iter().flatten()) {
            *a -= *b;
        }
        self
    }
}

impl<T: Scalar> Neg for Mat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.m[i][j]
    }
}

pub fn dot<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm<T: Scalar>(a: &Vec3<T>) -> T {
    dot(a, a).sqrt()
}

/// Entrywise closeness: absolute for entries of magnitude ≤ 1, relative above.
pub fn close<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

pub fn mat_close<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>, tol: T) -> bool {
    a.m.iter()
        .flatten()
        .zip(b.m.iter().flatten())
        .all(|(x, y)| close(*x, *y, tol))
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending and the matching eigenvectors as
/// the columns of the second element.
pub fn symmetric_eigen<T: Scalar>(a: &Mat3<T>) -> ([T; 3], Mat3<T>) {
    let mut a = a.symmetric_part();
    let mut v = Mat3::identity();
    for _sweep in 0..64 {
        let off = a[(0, 1)].sq() + a[(0, 2)].sq() + a[(1, 2)].sq();
        let diag = a[(0, 0)].sq() + a[(1, 1)].sq() + a[(2, 2)].sq();
        if off <= T::epsilon().sq() * diag || off == T::zero() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == T::zero() {
                continue;
            }
            let tau = (a[(q, q)] - a[(p, p)]) / (T::two() * apq);
            let sign = if tau >= T::zero() { T::one() } else { -T::one() };
            let t = sign / (tau.abs() + (T::one() + tau.sq()).sqrt());
            let c = T::one() / (T::one() + t.sq()).sqrt();
            let s = t * c;
            // A <- Jᵀ A J with J the (p, q) Givens rotation
            for k in 0..3 {
                let akp = a[(k, p)];
                let akq = a[(k, q)];
                a[(k, p)] = c * akp - s * akq;
                a[(k, q)] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[(p, k)];
                let aqk = a[(q, k)];
                a[(p, k)] = c * apk - s * aqk;
                a[(q, k)] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let vkp = v[(k, p)];
                let vkq = v[(k, q)];
                v[(k, p)] = c * vkp - s * vkq;
                v[(k, q)] = s * vkp + c * vkq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    let d = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut vecs = Mat3::zeros();
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_col(dst, v.col(src));
    }
    ([d[order[0]], d[order[1]], d[order[2]]], vecs)
}

/// Matrix exponential of an antisymmetric matrix (Rodrigues formula).
pub fn exp_antisymmetric<T: Scalar>(a: &Mat3<T>) -> Mat3<T> {
    let axis = [a[(2, 1)], a[(0, 2)], a[(1, 0)]];
    let angle = norm(&axis);
    let a2 = *a * *a;
    let (f1, f2) = if angle < T::of(1e-4) {
        // Taylor coefficients of sin(x)/x and (1 - cos x)/x²
        let x2 = angle.sq();
        (
            T::one() - x2 / T::of(6.0) + x2.sq() / T::of(120.0),
            T::half() - x2 / T::of(24.0) + x2.sq() / T::of(720.0),
        )
    } else {
        (angle.sin() / angle, (T::one() - angle.cos()) / angle.sq())
    };
    Mat3::identity() + a.scale(f1) + a2.scale(f2)
}

/// Nearest rotation in the polar sense, by the Newton iteration
/// `X <- (X + X⁻ᵀ) / 2`. Requires `det(x) > 0`.
pub fn orthonormalize<T: Scalar>(x: &Mat3<T>) -> Option<Mat3<T>> {
    let mut r = *x;
    for _ in 0..50 {
        let inv_t = r.inverse()?.transpose();
        let next = (r + inv_t).scale(T::half());
        let delta = (next - r).max_abs();
        r = next;
        if delta <= T::of(4.0) * T::epsilon() {
            break;
        }
    }
    (r.det() > T::zero()).then_some(r)
}

/// Solves the dense system `a·x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` for a (numerically) singular matrix.
pub fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].abs() <= scale * T::of(n as f64) * T::epsilon() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let bc = b[col];
            b[row] -= f * bc;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
