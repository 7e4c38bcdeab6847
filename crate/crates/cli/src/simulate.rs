use std::path::Path;

use flatbody::integrate::{integrate, IntegratorConfig, Trajectory};
use flatbody::stationary::{solve_stationary, stationary_initial_state};
use flatbody::{CanonicalState, InertiaSpec, PotentialSpec};

use crate::config::{self, RunConfig};
use crate::output::{self, RunJson, SimulateSummary};
use crate::stationary::problem_from;
use crate::Failure;

struct Job {
    label: Option<String>,
    state: CanonicalState<f64>,
    trajectory_file: String,
}

fn initial_state(cfg: &RunConfig, j: &InertiaSpec<f64>, v: &PotentialSpec<f64>) -> Result<CanonicalState<f64>, Failure> {
    if let Some(s) = &cfg.initial_state {
        return s.build("initial_state");
    }
    let Some(sec) = &cfg.stationary else {
        return Err(Failure::Config("need `initial_state` or a `stationary` section to start from".into()));
    };
    let problem = problem_from(sec, j, v)?;
    let sol = solve_stationary(&problem).map_err(crate::stationary::classify)?;
    let r = config::rotation("stationary.attitude", sec.attitude)?;
    stationary_initial_state(&sol, &problem, sec.theta0)
        .map(|s| s.with_attitude(r))
        .map_err(|e| Failure::Config(format!("`stationary`: {e}")))
}

fn suffixed(name: &str, index: usize) -> String {
    match name.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_sweep{index}.{ext}"),
        None => format!("{name}_sweep{index}"),
    }
}

fn run_all(
    jobs: &[Job],
    icfg: &IntegratorConfig<f64>,
    j: &InertiaSpec<f64>,
    v: &PotentialSpec<f64>,
) -> Vec<flatbody::Result<Trajectory<f64>>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    if workers == 1 {
        return jobs.iter().map(|job| integrate(&job.state, icfg, j, v)).collect();
    }
    // Independent runs fan out; results land at their job index.
    let mut results: Vec<Option<flatbody::Result<Trajectory<f64>>>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = jobs.len().div_ceil(workers);
        for (jobs, slots) in jobs.chunks(chunk).zip(results.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (job, slot) in jobs.iter().zip(slots) {
                    *slot = Some(integrate(&job.state, icfg, j, v));
                }
            });
        }
    });
    results.into_iter().map(|r| r.expect("every job slot is filled")).collect()
}

/// Returns whether any run ended with a flagged termination.
pub fn run(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<bool, Failure> {
    let j = cfg.inertia()?;
    let v = cfg.potential()?;
    let icfg = cfg.integrator()?;
    let base = initial_state(cfg, &j, &v)?;

    let traj_name = cfg.output.trajectory.clone().unwrap_or_else(|| "trajectory.csv".into());
    let summary_name = cfg.output.summary.clone().unwrap_or_else(|| "summary.json".into());
    let mut jobs = vec![Job {
        label: None,
        state: base,
        trajectory_file: traj_name.clone(),
    }];
    if let Some(sweep) = &cfg.sweep {
        let Some(init) = &cfg.initial_state else {
            return Err(Failure::Config("`sweep` overrides `initial_state`, which is missing".into()));
        };
        for (i, o) in sweep.iter().enumerate() {
            let key = format!("sweep[{i}]");
            let mut state = init.apply(o).build(&key)?;
            state.attitude = base.attitude;
            jobs.push(Job {
                label: o.label.clone(),
                state,
                trajectory_file: suffixed(&traj_name, i),
            });
        }
    }

    let results = run_all(&jobs, &icfg, &j, &v);
    let dir = output::ensure_dir(out_dir)?;
    let mut runs = Vec::with_capacity(jobs.len());
    let mut flagged = false;
    for (i, (job, res)) in jobs.iter().zip(results).enumerate() {
        // config-level problems only surface here (before any stepping)
        let tr = res.map_err(|e| Failure::Config(format!("cannot start run {i}: {e}")))?;
        flagged |= !tr.termination.is_completed();
        output::write_trajectory_csv(&dir.join(&job.trajectory_file), &tr.samples)?;
        if !quiet {
            let last = tr.last();
            eprintln!(
                "run {i}: {} at t = {} ({} samples, energy drift {:.3e})",
                tr.termination.label(),
                last.t,
                tr.samples.len(),
                tr.report.max_rel_energy_drift
            );
        }
        runs.push(RunJson::new(i, job.label.clone(), &tr, job.trajectory_file.clone()));
    }
    let mut runs = runs.into_iter();
    let summary = SimulateSummary {
        command: "simulate",
        status: if flagged { "flagged" } else { "completed" },
        base: runs.next().expect("the base run always exists"),
        sweep: runs.collect(),
    };
    output::write_json(&dir.join(summary_name), &summary)?;
    Ok(flagged)
}
