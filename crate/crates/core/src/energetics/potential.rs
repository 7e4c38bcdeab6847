use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anything that can serve as the deformation potential `V(λ, μ, ϱ)`.
pub trait Potential<T: Scalar> {
    fn value(&self, lambda: T, mu: T, rho: T) -> Result<T>;

    /// `(∂V/∂λ, ∂V/∂μ, ∂V/∂ϱ)`.
    fn gradient(&self, lambda: T, mu: T, rho: T) -> Result<[T; 3]>;
}

/// In-plane potential `V_λμ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlatPotential<T> {
    /// `k/2 · (λ² + μ²)`
    Harmonic { k: T },
    /// `c·(λ⁻² + λ²) + d·(μ⁻² + μ²)`
    SeparatedInverse { c: T, d: T },
    /// `κ·(1/(λμ) + (λ² + μ²)/2)`
    TraceInverse { kappa: T },
}

/// Thickness potential `V_ϱ = a/ϱ + b/2 · ϱ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThicknessPotential<T> {
    pub a: T,
    pub b: T,
}

/// Separable potential `V = V_λμ(λ, μ) + V_ϱ(ϱ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSpec<T> {
    pub flat: FlatPotential<T>,
    pub thickness: ThicknessPotential<T>,
}

fn require_positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("potential coefficient {name} must be positive, got {v}")))
    }
}

fn check_stretches<T: Scalar>(vals: &[(&str, T)]) -> Result<()> {
    for (name, v) in vals {
        if !(v.is_finite() && *v > T::zero()) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

impl<T: Scalar> FlatPotential<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Harmonic { k } => require_positive("k", k),
            Self::SeparatedInverse { c, d } => require_positive("c", c).and(require_positive("d", d)),
            Self::TraceInverse { kappa } => require_positive("kappa", kappa),
        }
    }

    pub fn value(&self, l: T, m: T) -> Result<T> {
        check_stretches(&[("lambda", l), ("mu", m)])?;
        let h = T::half();
        Ok(match *self {
            Self::Harmonic { k } => h * k * (l.sq() + m.sq()),
            Self::SeparatedInverse { c, d } => c * (T::one() / l.sq() + l.sq()) + d * (T::one() / m.sq() + m.sq()),
            Self::TraceInverse { kappa } => kappa * (T::one() / (l * m) + h * (l.sq() + m.sq())),
        })
    }

    /// `(∂V_λμ/∂λ, ∂V_λμ/∂μ)`.
    pub fn gradient(&self, l: T, m: T) -> Result<[T; 2]> {
        check_stretches(&[("lambda", l), ("mu", m)])?;
        let two = T::two();
        Ok(match *self {
            Self::Harmonic { k } => [k * l, k * m],
            Self::SeparatedInverse { c, d } => [
                c * (two * l - two / (l * l.sq())),
                d * (two * m - two / (m * m.sq())),
            ],
            Self::TraceInverse { kappa } => [
                kappa * (l - T::one() / (l.sq() * m)),
                kappa * (m - T::one() / (l * m.sq())),
            ],
        })
    }

    pub fn cast<U: Scalar>(&self) -> FlatPotential<U> {
        let c = |x: T| U::of(x.to_f64_lossy());
        match *self {
            Self::Harmonic { k } => FlatPotential::Harmonic { k: c(k) },
            Self::SeparatedInverse { c: cc, d } => FlatPotential::SeparatedInverse { c: c(cc), d: c(d) },
            Self::TraceInverse { kappa } => FlatPotential::TraceInverse { kappa: c(kappa) },
        }
    }
}

impl<T: Scalar> ThicknessPotential<T> {
    pub fn validate(&self) -> Result<()> {
        require_positive("a", self.a).and(require_positive("b", self.b))
    }

    pub fn value(&self, r: T) -> Result<T> {
        check_stretches(&[("rho", r)])?;
        Ok(self.a / r + T::half() * self.b * r.sq())
    }

    pub fn derivative(&self, r: T) -> Result<T> {
        check_stretches(&[("rho", r)])?;
        Ok(self.b * r - self.a / r.sq())
    }

    /// The unique critical point `(a/b)^{1/3}` of `V_ϱ`.
    pub fn equilibrium(&self) -> T {
        let q = self.a / self.b;
        // f64 seed, then Newton on x³ = q in the working precision
        let mut x = T::of(q.to_f64_lossy().cbrt());
        for _ in 0..4 {
            x -= (x * x.sq() - q) / (T::of(3.0) * x.sq());
        }
        x
    }
}

impl<T: Scalar> PotentialSpec<T> {
    pub fn new(flat: FlatPotential<T>, thickness: ThicknessPotential<T>) -> Result<Self> {
        flat.validate()?;
        thickness.validate()?;
        Ok(Self { flat, thickness })
    }

    pub fn cast<U: Scalar>(&self) -> PotentialSpec<U> {
        PotentialSpec {
            flat: self.flat.cast(),
            thickness: ThicknessPotential {
                a: U::of(self.thickness.a.to_f64_lossy()),
                b: U::of(self.thickness.b.to_f64_lossy()),
            },
        }
    }
}

impl<T: Scalar> Potential<T> for PotentialSpec<T> {
    fn value(&self, lambda: T, mu: T, rho: T) -> Result<T> {
        Ok(self.flat.value(lambda, mu)? + self.thickness.value(rho)?)
    }

    fn gradient(&self, lambda: T, mu: T, rho: T) -> Result<[T; 3]> {
        let [gl, gm] = self.flat.gradient(lambda, mu)?;
        Ok([gl, gm, self.thickness.derivative(rho)?])
    }
}

/// Canonical text form, e.g. `harmonic(k=1)+thickness(a=1,b=8)`.
impl<T: Scalar> fmt::Display for PotentialSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flat {
            FlatPotential::Harmonic { k } => write!(f, "harmonic(k={k})")?,
            FlatPotential::SeparatedInverse { c, d } => write!(f, "separated_inverse(c={c},d={d})")?,
            FlatPotential::TraceInverse { kappa } => write!(f, "trace_inverse(kappa={kappa})")?,
        }
        write!(f, "+thickness(a={},b={})", self.thickness.a, self.thickness.b)
    }
}

fn parse_term(term: &str) -> Result<(String, Vec<(String, f64)>)> {
    let bad = || Error::InvalidConfig(format!("malformed potential term `{term}`"));
    let open = term.find('(').ok_or_else(bad)?;
    let inner = term[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let name = term[..open].trim().to_ascii_lowercase();
    let mut args = Vec::new();
    for kv in inner.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(bad)?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("potential coefficient `{}` is not a number", k.trim())))?;
        args.push((k.trim().to_ascii_lowercase(), v));
    }
    Ok((name, args))
}

fn take(args: &[(String, f64)], key: &str, term: &str) -> Result<f64> {
    args.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidConfig(format!("potential term `{term}` is missing coefficient `{key}`")))
}

fn expect_keys(args: &[(String, f64)], allowed: &[&str], term: &str) -> Result<()> {
    match args.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(Error::InvalidConfig(format!("unknown coefficient `{k}` in potential term `{term}`"))),
        None => Ok(()),
    }
}

impl FromStr for PotentialSpec<f64> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut flat = None;
        let mut thickness = None;
        for term in compact.split('+') {
            let (name, args) = parse_term(term)?;
            match name.as_str() {
                "harmonic" => {
                    expect_keys(&args, &["k"], term)?;
                    flat = Some(FlatPotential::Harmonic { k: take(&args, "k", term)? });
                }
                "separated_inverse" => {
                    expect_keys(&args, &["c", "d"], term)?;
                    flat = Some(FlatPotential::SeparatedInverse {
                        c: take(&args, "c", term)?,
                        d: take(&args, "d", term)?,
                    });
                }
                "trace_inverse" => {
                    expect_keys(&args, &["kappa"], term)?;
                    flat = Some(FlatPotential::TraceInverse {
                        kappa: take(&args, "kappa", term)?,
                    });
                }
                "thickness" => {
                    expect_keys(&args, &["a", "b"], term)?;
                    thickness = Some(ThicknessPotential {
                        a: take(&args, "a", term)?,
                        b: take(&args, "b", term)?,
                    });
                }
                other => return Err(Error::InvalidConfig(format!("unknown potential model `{other}`"))),
            }
        }
        let flat = flat.ok_or_else(|| Error::InvalidConfig("potential needs an in-plane model".into()))?;
        let thickness = thickness.ok_or_else(|| Error::InvalidConfig("potential needs a thickness(a=..,b=..) term".into()))?;
        PotentialSpec::new(flat, thickness)
    }
}
