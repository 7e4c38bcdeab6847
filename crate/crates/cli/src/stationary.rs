use std::path::Path;

use flatbody::stationary::solve_stationary;
use flatbody::{Error, InertiaSpec, PotentialSpec, StationaryProblem};

use crate::config::{RunConfig, StationarySection};
use crate::output::{self, NoSolutionJson, ProblemJson, SolutionJson, StationarySummary};
use crate::Failure;

pub fn problem_from(
    sec: &StationarySection,
    j: &InertiaSpec<f64>,
    v: &PotentialSpec<f64>,
) -> Result<StationaryProblem<f64>, Failure> {
    let p = StationaryProblem {
        s3: sec.s3,
        p_theta: sec.p_theta,
        inertia: *j,
        potential: *v,
        guess: sec.guess,
    };
    p.validate().map_err(|e| Failure::Config(format!("`stationary`: {e}")))?;
    Ok(p)
}

/// Solver errors: genuine absence of a root (or a collapse onto the
/// degenerate diagonal) is a no-solution outcome, anything else a config
/// problem.
pub fn classify(e: Error) -> Failure {
    match e {
        Error::NoSolution { .. } | Error::Degenerate { .. } => Failure::NoSolution(e.to_string()),
        other => Failure::Config(format!("`stationary`: {other}")),
    }
}

/// Returns `true` when a solution was found.
pub fn run(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<bool, Failure> {
    let sec = cfg
        .stationary
        .as_ref()
        .ok_or_else(|| Failure::Config("missing section `stationary`".into()))?;
    let j = cfg.inertia()?;
    let v = cfg.potential()?;
    let problem = problem_from(sec, &j, &v)?;
    let problem_json = ProblemJson {
        s3: sec.s3,
        p_theta: sec.p_theta,
        guess: sec.guess,
    };
    let summary = match solve_stationary(&problem) {
        Ok(sol) => StationarySummary {
            command: "stationary",
            status: "found",
            problem: problem_json,
            solution: Some(SolutionJson::from(&sol)),
            no_solution: None,
        },
        Err(e) => {
            let (reason, best_residual, iterations) = match e {
                Error::NoSolution {
                    reason,
                    best_residual,
                    iterations,
                } => (reason, best_residual, iterations),
                Error::Degenerate { gap, .. } => ("iterates approached lambda = mu".to_string(), gap, 0),
                other => return Err(classify(other)),
            };
            StationarySummary {
                command: "stationary",
                status: "no_solution",
                problem: problem_json,
                solution: None,
                no_solution: Some(NoSolutionJson {
                    reason,
                    best_residual,
                    iterations,
                }),
            }
        }
    };
    let found = summary.solution.is_some();
    let dir = output::ensure_dir(out_dir)?;
    let name = cfg.output.summary.clone().unwrap_or_else(|| "summary.json".into());
    output::write_json(&dir.join(name), &summary)?;
    if !quiet {
        println!("{}", serde_json::to_string_pretty(&summary).map_err(|e| Failure::Io(e.to_string()))?);
    }
    Ok(found)
}
