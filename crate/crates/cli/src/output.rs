use std::fs;
use std::path::{Path, PathBuf};

use flatbody::integrate::{ConservationReport, Termination, Trajectory, TrajectorySample};
use flatbody::StationarySolution;
use serde::Serialize;

use crate::Failure;

pub const CSV_HEADER: [&str; 16] = [
    "t", "lambda", "mu", "rho", "theta", "p_lambda", "p_mu", "p_rho", "p_theta", "s1", "s2", "s3", "energy", "K1", "K2", "K3",
];

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv(path: &Path, samples: &[TrajectorySample<f64>]) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Io(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(CSV_HEADER).map_err(io)?;
    for s in samples {
        let st = &s.state;
        let row = [
            s.t,
            st.shape.lambda,
            st.shape.mu,
            st.shape.rho,
            st.shape.theta,
            st.mom.p_lambda,
            st.mom.p_mu,
            st.mom.p_rho,
            st.mom.p_theta,
            st.mom.s1,
            st.mom.s2,
            st.mom.s3,
            s.energy,
            s.invariants[0],
            s.invariants[1],
            s.invariants[2],
        ];
        w.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("creating {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

#[derive(Serialize)]
pub struct StateJson {
    pub t: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub theta: f64,
    pub p_lambda: f64,
    pub p_mu: f64,
    pub p_rho: f64,
    pub p_theta: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub energy: f64,
    pub invariants: [f64; 3],
    pub attitude: Option<[f64; 9]>,
}

impl From<&TrajectorySample<f64>> for StateJson {
    fn from(s: &TrajectorySample<f64>) -> Self {
        let st = &s.state;
        Self {
            t: s.t,
            lambda: st.shape.lambda,
            mu: st.shape.mu,
            rho: st.shape.rho,
            theta: st.shape.theta,
            p_lambda: st.mom.p_lambda,
            p_mu: st.mom.p_mu,
            p_rho: st.mom.p_rho,
            p_theta: st.mom.p_theta,
            s1: st.mom.s1,
            s2: st.mom.s2,
            s3: st.mom.s3,
            energy: s.energy,
            invariants: s.invariants,
            attitude: s.attitude.map(|r| r.matrix().to_row_array()),
        }
    }
}

#[derive(Serialize)]
pub struct ReportJson {
    pub max_rel_energy_drift: f64,
    pub max_abs_p_theta_drift: f64,
    pub min_degeneracy_gap: f64,
    pub attitude_orthogonality_max_defect: f64,
    pub max_invariant_drift: f64,
}

impl From<&ConservationReport<f64>> for ReportJson {
    fn from(r: &ConservationReport<f64>) -> Self {
        Self {
            max_rel_energy_drift: r.max_rel_energy_drift,
            max_abs_p_theta_drift: r.max_abs_p_theta_drift,
            min_degeneracy_gap: r.min_degeneracy_gap,
            attitude_orthogonality_max_defect: r.attitude_orthogonality_max_defect,
            max_invariant_drift: r.max_invariant_drift,
        }
    }
}

#[derive(Serialize)]
pub struct TerminationJson {
    pub reason: &'static str,
    pub t: Option<f64>,
    pub detail: Option<String>,
}

impl From<&Termination<f64>> for TerminationJson {
    fn from(t: &Termination<f64>) -> Self {
        let (at, detail) = match *t {
            Termination::Completed => (None, None),
            Termination::Degeneracy { t, gap } => (Some(t), Some(format!("|lambda^2 - mu^2| = {gap:e}"))),
            Termination::NonFinite { t } => (Some(t), Some("non-finite state".into())),
            Termination::NonPositiveStretch { t } => (Some(t), Some("a stretch reached zero".into())),
            Termination::StepSizeUnderflow { t, dt } => (Some(t), Some(format!("step {dt:e} below dt_min"))),
        };
        Self {
            reason: t.label(),
            t: at,
            detail,
        }
    }
}

#[derive(Serialize)]
pub struct RunJson {
    pub index: usize,
    pub label: Option<String>,
    pub termination: TerminationJson,
    pub final_state: StateJson,
    pub report: ReportJson,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub trajectory: String,
}

impl RunJson {
    pub fn new(index: usize, label: Option<String>, tr: &Trajectory<f64>, trajectory: String) -> Self {
        Self {
            index,
            label,
            termination: (&tr.termination).into(),
            final_state: tr.last().into(),
            report: (&tr.report).into(),
            samples: tr.samples.len(),
            accepted_steps: tr.accepted_steps,
            rejected_steps: tr.rejected_steps,
            trajectory,
        }
    }
}

#[derive(Serialize)]
pub struct SimulateSummary {
    pub command: &'static str,
    pub status: &'static str,
    #[serde(flatten)]
    pub base: RunJson,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<RunJson>,
}

#[derive(Serialize)]
pub struct ProblemJson {
    pub s3: f64,
    pub p_theta: f64,
    pub guess: [f64; 3],
}

#[derive(Serialize)]
pub struct SolutionJson {
    pub lambda_star: f64,
    pub mu_star: f64,
    pub rho_star: f64,
    pub omega3: f64,
    pub theta_dot: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl From<&StationarySolution<f64>> for SolutionJson {
    fn from(s: &StationarySolution<f64>) -> Self {
        Self {
            lambda_star: s.lambda_star,
            mu_star: s.mu_star,
            rho_star: s.rho_star,
            omega3: s.omega3,
            theta_dot: s.theta_dot,
            residual_norm: s.residual_norm,
            iterations: s.iterations,
        }
    }
}

#[derive(Serialize)]
pub struct NoSolutionJson {
    pub reason: String,
    pub best_residual: f64,
    pub iterations: usize,
}

#[derive(Serialize)]
pub struct StationarySummary {
    pub command: &'static str,
    pub status: &'static str,
    pub problem: ProblemJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_solution: Option<NoSolutionJson>,
}
