use std::path::{Path, PathBuf};

use flatbody::integrate::{IntegratorConfig, Method, DEFAULT_DEGENERACY_EPSILON};
use flatbody::{
    CanonicalState, FlatPotential, InertiaSpec, Mat3, MomentumCoords, PotentialSpec, Rotation3, ShapeCoords, ThicknessPotential,
};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inertia: InertiaConfig,
    pub potential: PotentialConfig,
    pub initial_state: Option<StateConfig>,
    pub integrator: Option<IntegratorSection>,
    #[serde(default)]
    pub output: OutputConfig,
    pub stationary: Option<StationarySection>,
    /// Extra runs, each overriding parts of `initial_state`.
    pub sweep: Option<Vec<StateOverride>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaConfig {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
}

/// Either the compact text form (`"harmonic(k=1)+thickness(a=1,b=8)"`) or
/// an object.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PotentialConfig {
    Text(String),
    Object(PotentialObject),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialObject {
    pub flat: FlatConfig,
    pub thickness: ThicknessConfig,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlatConfig {
    Harmonic { k: f64 },
    SeparatedInverse { c: f64, d: f64 },
    TraceInverse { kappa: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThicknessConfig {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub p_lambda: f64,
    #[serde(default)]
    pub p_mu: f64,
    #[serde(default)]
    pub p_rho: f64,
    #[serde(default)]
    pub p_theta: f64,
    #[serde(default)]
    pub s1: f64,
    #[serde(default)]
    pub s2: f64,
    #[serde(default)]
    pub s3: f64,
    /// Row-major 3×3 rotation; identity when omitted.
    pub attitude: Option<[f64; 9]>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateOverride {
    pub label: Option<String>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub theta: Option<f64>,
    pub p_lambda: Option<f64>,
    pub p_mu: Option<f64>,
    pub p_rho: Option<f64>,
    pub p_theta: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub s3: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Rk4,
    Rk45,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: MethodName,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    #[serde(default = "one")]
    pub sample_stride: usize,
    #[serde(default = "default_eps")]
    pub degeneracy_epsilon: f64,
}

fn one() -> usize {
    1
}

fn default_eps() -> f64 {
    DEFAULT_DEGENERACY_EPSILON
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub trajectory: Option<String>,
    pub summary: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    pub s3: f64,
    pub p_theta: f64,
    pub guess: [f64; 3],
    #[serde(default)]
    pub theta0: f64,
    pub attitude: Option<[f64; 9]>,
}

pub fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            Failure::Config(format!("invalid config: {}", e.inner()))
        } else {
            Failure::Config(format!("invalid config at `{path}`: {}", e.inner()))
        }
    })
}

fn finite(key: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Config(format!("`{key}` must be finite, got {v}")))
    }
}

fn config_err(key: &str, e: flatbody::Error) -> Failure {
    Failure::Config(format!("`{key}`: {e}"))
}

impl RunConfig {
    pub fn inertia(&self) -> Result<InertiaSpec<f64>, Failure> {
        let i = &self.inertia;
        let j = InertiaSpec::new(finite("inertia.j1", i.j1)?, finite("inertia.j2", i.j2)?, finite("inertia.j3", i.j3)?)
            .map_err(|e| config_err("inertia", e))?;
        if !j.is_isotropic() {
            return Err(Failure::Config(format!(
                "`inertia`: the equations of motion need j1 == j2 (got j1 = {}, j2 = {})",
                i.j1, i.j2
            )));
        }
        Ok(j)
    }

    pub fn potential(&self) -> Result<PotentialSpec<f64>, Failure> {
        match &self.potential {
            PotentialConfig::Text(s) => s.parse().map_err(|e| config_err("potential", e)),
            PotentialConfig::Object(o) => {
                let flat = match o.flat {
                    FlatConfig::Harmonic { k } => FlatPotential::Harmonic { k },
                    FlatConfig::SeparatedInverse { c, d } => FlatPotential::SeparatedInverse { c, d },
                    FlatConfig::TraceInverse { kappa } => FlatPotential::TraceInverse { kappa },
                };
                let th = ThicknessPotential {
                    a: o.thickness.a,
                    b: o.thickness.b,
                };
                PotentialSpec::new(flat, th).map_err(|e| config_err("potential", e))
            }
        }
    }

    pub fn integrator(&self) -> Result<IntegratorConfig<f64>, Failure> {
        let s = self
            .integrator
            .as_ref()
            .ok_or_else(|| Failure::Config("missing section `integrator`".into()))?;
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Failure::Config(format!("`integrator.{name}` is required for method {:?}", s.method)))
                .and_then(|x| finite(&format!("integrator.{name}"), x))
        };
        let method = match s.method {
            MethodName::Rk4 => Method::Rk4Fixed { dt: need("dt", s.dt)? },
            MethodName::Rk45 => Method::Rk45Adaptive {
                rel_tol: need("rel_tol", s.rel_tol)?,
                abs_tol: need("abs_tol", s.abs_tol)?,
                dt_min: s.dt_min.unwrap_or(1e-12),
                dt_max: s.dt_max.unwrap_or(s.t_end),
            },
        };
        let cfg = IntegratorConfig {
            method,
            t_end: s.t_end,
            sample_stride: s.sample_stride,
            degeneracy_epsilon: s.degeneracy_epsilon,
        };
        cfg.validate().map_err(|e| match e {
            flatbody::Error::InvalidConfig(msg) => Failure::Config(format!("`integrator`: {msg}")),
            other => config_err("integrator", other),
        })?;
        Ok(cfg)
    }
}

pub fn rotation(key: &str, rows: Option<[f64; 9]>) -> Result<Rotation3<f64>, Failure> {
    match rows {
        None => Ok(Rotation3::identity()),
        Some(v) => {
            for x in v {
                finite(key, x)?;
            }
            Rotation3::new(Mat3::from_row_slice(&v)).map_err(|e| config_err(key, e))
        }
    }
}

impl StateConfig {
    pub fn apply(&self, o: &StateOverride) -> StateConfig {
        let mut s = self.clone();
        let pick = |base: f64, v: Option<f64>| v.unwrap_or(base);
        s.lambda = pick(s.lambda, o.lambda);
        s.mu = pick(s.mu, o.mu);
        s.rho = pick(s.rho, o.rho);
        s.theta = pick(s.theta, o.theta);
        s.p_lambda = pick(s.p_lambda, o.p_lambda);
        s.p_mu = pick(s.p_mu, o.p_mu);
        s.p_rho = pick(s.p_rho, o.p_rho);
        s.p_theta = pick(s.p_theta, o.p_theta);
        s.s1 = pick(s.s1, o.s1);
        s.s2 = pick(s.s2, o.s2);
        s.s3 = pick(s.s3, o.s3);
        s
    }

    /// Builds and validates the state, including the degeneracy precondition.
    pub fn build(&self, key: &str) -> Result<CanonicalState<f64>, Failure> {
        let f = |name: &str, v: f64| finite(&format!("{key}.{name}"), v);
        let shape = ShapeCoords::new(f("lambda", self.lambda)?, f("mu", self.mu)?, f("rho", self.rho)?, f("theta", self.theta)?)
            .map_err(|e| config_err(key, e))?;
        flatbody::tolerance::check_nondegenerate(shape.lambda, shape.mu)
            .map_err(|e| Failure::Config(format!("`{key}`: degenerate initial state (lambda = mu): {e}")))?;
        let mom = MomentumCoords {
            s1: f("s1", self.s1)?,
            s2: f("s2", self.s2)?,
            s3: f("s3", self.s3)?,
            p_theta: f("p_theta", self.p_theta)?,
            p_lambda: f("p_lambda", self.p_lambda)?,
            p_mu: f("p_mu", self.p_mu)?,
            p_rho: f("p_rho", self.p_rho)?,
        };
        let r = rotation(&format!("{key}.attitude"), self.attitude)?;
        Ok(CanonicalState::new(shape, mom).with_attitude(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "inertia": {"j1": 1, "j2": 1, "j3": 1},
        "potential": "harmonic(k=1)+thickness(a=1,b=1)",
        "initial_state": {"lambda": 1.4, "mu": 0.4, "rho": 1.1, "s3": 2, "p_theta": 1},
        "integrator": {"method": "rk4", "dt": 0.001, "t_end": 1}
    }"#;

    #[test]
    fn parses_a_minimal_config() {
        let c = parse(BASE).unwrap();
        assert_eq!(c.inertia().unwrap(), InertiaSpec::isotropic(1.0, 1.0).unwrap());
        let st = c.initial_state.as_ref().unwrap().build("initial_state").unwrap();
        assert_eq!(st.mom.s3, 2.0);
        assert_eq!(st.attitude, Some(Rotation3::identity()));
        assert!(matches!(c.integrator().unwrap().method, Method::Rk4Fixed { dt } if dt == 0.001));
    }

    #[test]
    fn object_potential_form() {
        let text = BASE.replace(
            r#""harmonic(k=1)+thickness(a=1,b=1)""#,
            r#"{"flat": {"model": "separated_inverse", "c": 1, "d": 2}, "thickness": {"a": 1, "b": 8}}"#,
        );
        let v = parse(&text).unwrap().potential().unwrap();
        assert_eq!(v.flat, FlatPotential::SeparatedInverse { c: 1.0, d: 2.0 });
    }

    fn message(f: Failure) -> String {
        match f {
            Failure::Config(m) => m,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = BASE.replace(r#""t_end": 1"#, r#""t_end": 1, "tend": 2"#);
        let m = message(parse(&text).unwrap_err());
        assert!(m.contains("tend"), "{m}");
    }

    #[test]
    fn negative_dt_is_named() {
        let text = BASE.replace("0.001", "-0.001");
        let m = message(parse(&text).unwrap().integrator().unwrap_err());
        assert!(m.contains("dt"), "{m}");
    }

    #[test]
    fn equal_stretches_are_rejected_up_front() {
        let text = BASE.replace(r#""mu": 0.4"#, r#""mu": 1.4"#);
        let c = parse(&text).unwrap();
        let m = message(c.initial_state.unwrap().build("initial_state").unwrap_err());
        assert!(m.contains("degenerate"), "{m}");
    }

    #[test]
    fn anisotropic_inertia_is_a_config_error() {
        let text = BASE.replace(r#""j2": 1"#, r#""j2": 2"#);
        assert!(parse(&text).unwrap().inertia().is_err());
    }
}
