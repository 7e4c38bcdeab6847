//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| <= ulp(hi) / 2`, giving about 106 bits of significand.
//!
//! Addition, multiplication, division and square root are accurate to the
//! full double-double precision (Dekker / Knuth error-free transformations).
//! `sin`, `cos` and `atan2` are only `f64`-accurate; nothing in the
//! Hamiltonian evaluation path depends on them.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

use super::Scalar;

#[derive(Clone, Copy, Default)]
pub struct DoubleF64 {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleF64 {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn normalized(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p1, mut p2) = two_prod(self.hi, b);
        p2 += self.lo * b;
        Self::normalized(p1, p2)
    }

    fn trunc(self) -> Self {
        let h = self.hi.trunc();
        if h != self.hi {
            return Self::from_f64(h);
        }
        let l = if self.hi > 0.0 && self.lo < 0.0 {
            self.lo.floor()
        } else if self.hi < 0.0 && self.lo > 0.0 {
            self.lo.ceil()
        } else {
            self.lo.trunc()
        };
        Self::normalized(h, l)
    }
}

impl From<f64> for DoubleF64 {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Add for DoubleF64 {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Self::normalized(s1, s2 + t2)
    }
}

impl Neg for DoubleF64 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleF64 {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleF64 {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p1, mut p2) = two_prod(self.hi, b.hi);
        p2 += self.hi * b.lo + self.lo * b.hi;
        Self::normalized(p1, p2)
    }
}

impl Div for DoubleF64 {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::from_f64(q3)
    }
}

impl Rem for DoubleF64 {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleF64 {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}

assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl PartialEq for DoubleF64 {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Zero for DoubleF64 {
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleF64 {
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Num for DoubleF64 {
    type FromStrRadixErr = std::num::ParseFloatError;

    /// Parses through `f64`, so only `f64` precision is retained.
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            // Forces the standard parse error for unsupported radices.
            return "".parse::<f64>().map(Self::from_f64);
        }
        s.parse::<f64>().map(Self::from_f64)
    }
}

impl FromPrimitive for DoubleF64 {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::normalized(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::normalized(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Self::from_f64(x))
    }
}

impl ToPrimitive for DoubleF64 {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        (t.hi as i128 + t.lo as i128).try_into().ok()
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc();
        (t.hi as i128 + t.lo as i128).try_into().ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl Sum for DoubleF64 {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl fmt::Debug for DoubleF64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleF64({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleF64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi + self.lo), f)
    }
}

impl Scalar for DoubleF64 {
    fn epsilon() -> Self {
        // 2^-104
        Self::from_f64(4.930_380_657_631_324e-32)
    }

    fn pi() -> Self {
        Self::new(std::f64::consts::PI, 1.224_646_799_147_353_2e-16)
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::zero()
            } else {
                Self::from_f64(f64::NAN)
            };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Self::from_f64(ax);
        let corr = (self - ax_dd * ax_dd).hi * (x * 0.5);
        ax_dd + Self::from_f64(corr)
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn sin(self) -> Self {
        let (s, c) = self.hi.sin_cos();
        Self::from_f64(s + c * self.lo)
    }

    fn cos(self) -> Self {
        let (s, c) = self.hi.sin_cos();
        Self::from_f64(c - s * self.lo)
    }

    fn atan2(self, other: Self) -> Self {
        Self::from_f64((self.hi + self.lo).atan2(other.hi + other.lo))
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(x: f64) -> DoubleF64 {
        DoubleF64::from_f64(x)
    }

    #[test]
    fn one_third_times_three_is_one_to_dd_precision() {
        let third = dd(1.0) / dd(3.0);
        let back = third * dd(3.0) - dd(1.0);
        assert!(back.abs().hi() < 1e-31, "{back:?}");
        // f64 would lose the tail entirely
        assert!(third.lo().abs() > 0.0);
    }

    #[test]
    fn sqrt_two_squared() {
        let r = dd(2.0).sqrt();
        let e = r * r - dd(2.0);
        assert!(e.abs().hi() < 1e-30, "{e:?}");
        assert_eq!(dd(0.0).sqrt().hi(), 0.0);
        assert!(dd(-1.0).sqrt().hi().is_nan());
    }

    #[test]
    fn cancellation_is_preserved() {
        // (1 + 2^-60) - 1 is exact in double-double
        let tiny = 2f64.powi(-60);
        let a = dd(1.0) + dd(tiny);
        assert_eq!((a - dd(1.0)).to_f64_lossy(), tiny);
    }

    #[test]
    fn ordering_uses_tail() {
        let a = DoubleF64::new(1.0, 1e-20);
        let b = DoubleF64::new(1.0, -1e-20);
        assert!(a > b);
        assert!(b < dd(1.0));
    }

    #[test]
    fn integer_conversions_and_rem() {
        let big = (1i64 << 60) + 1;
        let d = DoubleF64::from_i64(big).unwrap();
        assert_eq!(d.to_i64(), Some(big));
        let r = dd(7.5) % dd(2.0);
        assert_eq!(r.to_f64_lossy(), 1.5);
        assert_eq!((dd(-7.5) % dd(2.0)).to_f64_lossy(), -1.5);
    }

    #[test]
    fn parse_and_display() {
        let x: DoubleF64 = Num::from_str_radix("2.5", 10).unwrap();
        assert_eq!(x.to_string(), "2.5");
        assert!(<DoubleF64 as Num>::from_str_radix("2.5", 16).is_err());
    }
}
