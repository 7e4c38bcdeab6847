//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use flatbody::energetics::{
    kinetic_energy_canonical, kinetic_energy_isotropic, kinetic_energy_trace, kinetic_energy_velocities, legendre_forward,
    legendre_inverse, placement_velocity,
};
use flatbody::hamiltonian::{eom_bracket_oracle_extended, eom_closed_form, hamiltonian};
use flatbody::integrate::{integrate, reconstruct_placement, IntegratorConfig};
use flatbody::kinematics::{
    assemble_placement, deformation_invariants, green_tensor_of, green_tensor_rate, kirchhoff_love_parameter, left_inverse,
    two_polar_decompose,
};
use flatbody::linalg::{cross, exp_antisymmetric, norm};
use flatbody::stationary::{reconstruct_stationary_motion, solve_stationary, stationary_initial_state};
use flatbody::{
    CanonicalState, FlatPotential, InertiaSpec, Mat3, MomentumCoords, Potential, PotentialSpec, Rotation3, ShapeCoords,
    StationaryProblem, ThicknessPotential, VelocityCoords,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: u64 = 0xacce97;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn new(offset: u64) -> Self {
        Sampler(ChaCha8Rng::seed_from_u64(SEED + offset))
    }

    fn u(&mut self, a: f64, b: f64) -> f64 {
        self.0.gen_range(a..b)
    }

    fn shape(&mut self) -> ShapeCoords<f64> {
        loop {
            let (l, m) = (self.u(0.5, 3.0), self.u(0.5, 3.0));
            if (l - m).abs() >= 0.2 {
                let (r, t) = (self.u(0.3, 3.0), self.u(-1.5, 1.5));
                return ShapeCoords::new(l.max(m), l.min(m), r, t).unwrap();
            }
        }
    }

    fn seven(&mut self) -> [f64; 7] {
        [(); 7].map(|_| self.u(-2.0, 2.0))
    }

    fn rotation(&mut self) -> Rotation3<f64> {
        let w = [(); 3].map(|_| self.u(-2.0, 2.0));
        Rotation3::new(exp_antisymmetric(&Mat3::comoving_skew(w))).unwrap()
    }

    fn potential(&mut self, which: usize) -> PotentialSpec<f64> {
        let flat = match which % 3 {
            0 => FlatPotential::Harmonic { k: self.u(0.5, 3.0) },
            1 => FlatPotential::SeparatedInverse { c: self.u(0.5, 3.0), d: self.u(0.5, 3.0) },
            _ => FlatPotential::TraceInverse { kappa: self.u(0.5, 3.0) },
        };
        PotentialSpec::new(flat, ThicknessPotential { a: self.u(0.5, 3.0), b: self.u(0.5, 3.0) }).unwrap()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn bounded_fixture() -> (CanonicalState<f64>, InertiaSpec<f64>, PotentialSpec<f64>) {
    let cfg = common::read_json(&common::fixture("bounded_harmonic.json"));
    let s = &cfg["initial_state"];
    let g = |k: &str| s[k].as_f64().unwrap();
    let shape = ShapeCoords::new(g("lambda"), g("mu"), g("rho"), g("theta")).unwrap();
    let mom = MomentumCoords {
        p_lambda: g("p_lambda"),
        p_mu: g("p_mu"),
        p_rho: g("p_rho"),
        p_theta: g("p_theta"),
        s1: g("s1"),
        s2: g("s2"),
        s3: g("s3"),
    };
    let j = InertiaSpec::isotropic(1.0, 1.0).unwrap();
    let v = PotentialSpec::new(FlatPotential::Harmonic { k: 1.0 }, ThicknessPotential { a: 1.0, b: 1.0 }).unwrap();
    (CanonicalState::new(shape, mom).with_attitude(Rotation3::identity()), j, v)
}

fn separated_problem(s3: f64, p_theta: f64) -> StationaryProblem<f64> {
    StationaryProblem {
        s3,
        p_theta,
        inertia: InertiaSpec::isotropic(1.0, 1.0).unwrap(),
        potential: PotentialSpec::new(FlatPotential::SeparatedInverse { c: 1.0, d: 1.0 }, ThicknessPotential { a: 1.0, b: 8.0 })
            .unwrap(),
        guess: [1.5, 0.7, 1.0],
    }
}

fn c1_equations_of_motion() -> Outcome {
    let mut rng = Sampler::new(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for case in 0..1000 {
        let st = CanonicalState::new(rng.shape(), MomentumCoords::from_array(rng.seven()));
        let j = InertiaSpec::isotropic(rng.u(0.5, 3.0), rng.u(0.5, 3.0)).unwrap();
        let v = rng.potential(case);
        let a = eom_closed_form(&st, &j, &v).unwrap().to_array();
        let b = eom_bracket_oracle_extended(&st, &j, &v).unwrap().to_array();
        for k in 0..a.len() {
            let mag = a[k].abs().max(b[k].abs());
            let err = (a[k] - b[k]).abs();
            let allowed = if mag < 1e-6 { 1e-9 } else { 1e-6 * mag };
            if err > allowed {
                failures += 1;
            }
            worst = worst.max(err / allowed);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 10.0,
        format!("1000 states, {failures} mismatches, worst error/tolerance {worst:.2e}, {secs:.2} s"),
    )
}

fn c2_conservation() -> Outcome {
    let (st, j, v) = bounded_fixture();
    let tr = integrate(&st, &IntegratorConfig::rk4(1e-3, 10.0), &j, &v).unwrap();
    let h0 = hamiltonian(&st, &j, &v).unwrap();
    let de = tr.samples.iter().map(|s| rel(s.energy, h0)).fold(0.0, f64::max);
    let dp = tr.samples.iter().map(|s| (s.p_theta - st.mom.p_theta).abs()).fold(0.0, f64::max);
    outcome(
        tr.termination.is_completed() && de <= 1e-6 && dp <= 1e-12,
        format!("|dH|/|H0| = {de:.2e}, |dp_theta| = {dp:.2e}, {}", tr.termination.label()),
    )
}

fn c3_legendre() -> Outcome {
    let mut rng = Sampler::new(3);
    let (mut round, mut euler) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let s = rng.shape();
        let iso = InertiaSpec::isotropic(rng.u(0.5, 3.0), rng.u(0.5, 3.0)).unwrap();
        let v = rng.seven();
        let back = legendre_inverse(&s, &legendre_forward(&s, &VelocityCoords::from_array(v), &iso), &iso).unwrap();
        for (a, b) in back.to_array().iter().zip(v) {
            round = round.max((a - b).abs() / (1.0 + b.abs()));
        }
        let p = rng.seven();
        let fwd = legendre_forward(&s, &legendre_inverse(&s, &MomentumCoords::from_array(p), &iso).unwrap(), &iso);
        for (a, b) in fwd.to_array().iter().zip(p) {
            round = round.max((a - b).abs() / (1.0 + b.abs()));
        }
        let general = InertiaSpec::new(rng.u(0.5, 3.0), rng.u(0.5, 3.0), rng.u(0.5, 3.0)).unwrap();
        let vel = VelocityCoords::from_array(rng.seven());
        let mom = legendre_forward(&s, &vel, &general);
        let pairing: f64 = mom.to_array().iter().zip(vel.to_array()).map(|(p, q)| p * q).sum();
        euler = euler.max(rel(pairing, 2.0 * kinetic_energy_velocities(&s, &vel, &general)));
    }
    outcome(round <= 1e-12 && euler <= 1e-10, format!("round trip {round:.2e}, Euler relation {euler:.2e}"))
}

fn c4_energy_chain() -> Outcome {
    let mut rng = Sampler::new(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = rng.shape();
        let r = rng.rotation();
        let vel = VelocityCoords::from_array(rng.seven());
        let (jj, j3) = (rng.u(0.5, 3.0), rng.u(0.5, 3.0));
        let general = InertiaSpec::new(jj, rng.u(0.5, 3.0), j3).unwrap();
        let trace = kinetic_energy_trace(&placement_velocity(&r, &s, &vel), &general);
        worst = worst.max(rel(trace, kinetic_energy_velocities(&s, &vel, &general)));
        let iso = InertiaSpec::isotropic(jj, j3).unwrap();
        let trace = kinetic_energy_trace(&placement_velocity(&r, &s, &vel), &iso);
        worst = worst.max(rel(trace, kinetic_energy_velocities(&s, &vel, &iso)));
        worst = worst.max(rel(trace, kinetic_energy_isotropic(&s, &vel, &iso).unwrap()));
        let mom = legendre_forward(&s, &vel, &iso);
        worst = worst.max(rel(trace, kinetic_energy_canonical(&s, &mom, &iso).unwrap()));
    }
    outcome(worst <= 1e-10, format!("worst relative disagreement {worst:.2e}"))
}

fn c5_stationary() -> Outcome {
    let mut rng = Sampler::new(5);
    let (mut res, mut drift, mut rho) = (0.0f64, 0.0f64, 0.0f64);
    let mut failed = None;
    for _ in 0..8 {
        let (s3, pt) = (rng.u(0.5, 1.2), rng.u(-0.3, 0.3));
        let p = separated_problem(s3, pt);
        let sol = match solve_stationary(&p) {
            Ok(s) => s,
            Err(e) => {
                failed = Some(format!("s3 = {s3}, p_theta = {pt}: {e}"));
                break;
            }
        };
        res = res.max(sol.residual_norm);
        rho = rho.max((sol.rho_star - 0.5).abs());
        let st = stationary_initial_state(&sol, &p, 0.0).unwrap().with_attitude(Rotation3::identity());
        let tr = integrate(&st, &IntegratorConfig::rk4(1e-3, 10.0).with_stride(100), &p.inertia, &p.potential).unwrap();
        drift = drift.max(if tr.termination.is_completed() { tr.report.max_invariant_drift } else { f64::INFINITY });
    }
    if let Some(msg) = failed {
        return outcome(false, msg);
    }
    outcome(
        res <= 1e-10 && drift <= 1e-6 && rho <= 1e-12,
        format!("residual {res:.2e}, invariant drift {drift:.2e}, |rho* - 0.5| = {rho:.2e}"),
    )
}

fn c6_reconstruction() -> Outcome {
    let p = separated_problem(0.8, 0.15);
    let sol = solve_stationary(&p).unwrap();
    let r0 = Rotation3::new(exp_antisymmetric(&Mat3::comoving_skew([0.3, -0.2, 0.5]))).unwrap();
    let theta0 = 0.4;
    let st = stationary_initial_state(&sol, &p, theta0).unwrap().with_attitude(r0);
    let tr = integrate(&st, &IntegratorConfig::rk4(1e-3, 10.0).with_stride(100), &p.inertia, &p.potential).unwrap();
    let k0 = deformation_invariants(&green_tensor_of(&reconstruct_stationary_motion(&sol, &r0, theta0, 0.0))).unwrap();
    let (mut gap, mut inv, mut rate) = (0.0f64, 0.0f64, f64::INFINITY);
    for s in &tr.samples {
        let b = reconstruct_stationary_motion(&sol, &r0, theta0, s.t);
        gap = gap.max((*reconstruct_placement(s).unwrap().matrix() - *b.matrix()).max_abs());
        let k = deformation_invariants(&green_tensor_of(&b)).unwrap();
        inv = inv.max((0..3).map(|i| (k[i] - k0[i]).abs()).fold(0.0, f64::max));
        let shape = ShapeCoords::new(sol.lambda_star, sol.mu_star, sol.rho_star, theta0 + sol.theta_dot * s.t).unwrap();
        rate = rate.min(green_tensor_rate(&shape, sol.theta_dot).frobenius_norm());
    }
    outcome(
        tr.termination.is_completed() && gap <= 1e-5 && inv <= 1e-8 && rate > 0.0,
        format!("placement gap {gap:.2e}, invariant drift {inv:.2e}, min |dG/dt| {rate:.2e}"),
    )
}

fn c7_kinematics() -> Outcome {
    let mut rng = Sampler::new(7);
    let (mut placement, mut stretch, mut angle, mut invariants, mut ell, mut left) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let s = rng.shape();
        let phi = assemble_placement(&rng.rotation(), &s);
        let (r2, s2) = two_polar_decompose(&phi).unwrap();
        stretch = stretch.max((s2.lambda - s.lambda).abs().max((s2.mu - s.mu).abs()).max((s2.rho - s.rho).abs()));
        let d = (s2.theta - s.theta).rem_euclid(std::f64::consts::PI);
        angle = angle.max(d.min(std::f64::consts::PI - d));
        placement = placement.max((*assemble_placement(&r2, &s2).matrix() - *phi.matrix()).max_abs());
        let k = deformation_invariants(&green_tensor_of(&phi)).unwrap();
        let mut sq = [s.lambda * s.lambda, s.mu * s.mu, s.rho * s.rho];
        sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
        invariants = invariants.max((0..3).map(|i| (k[i] - sq[i]).abs() / sq[0].max(1.0)).fold(0.0, f64::max));
        ell = ell.max(rel(kirchhoff_love_parameter(&phi).unwrap(), s.rho / (s.lambda * s.mu)));

        let c = [(); 6].map(|_| rng.u(-3.0, 3.0));
        let a = [c[0], c[2], c[4]];
        let b = [c[1], c[3], c[5]];
        if norm(&cross(&a, &b)) > 0.1 {
            let cols = [[c[0], c[1]], [c[2], c[3]], [c[4], c[5]]];
            let li = left_inverse(&cols).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let v: f64 = (0..3).map(|k| li[i][k] * cols[k][j]).sum();
                    left = left.max((v - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
    }
    let pass = placement <= 1e-10 && stretch <= 1e-10 && angle <= 1e-10 && invariants <= 1e-10 && ell <= 1e-12 && left <= 1e-12;
    outcome(
        pass,
        format!(
            "placement {placement:.1e}, stretches {stretch:.1e}, angle {angle:.1e}, invariants {invariants:.1e}, \
             ell {ell:.1e}, left inverse {left:.1e}"
        ),
    )
}

fn c8_gradients() -> Outcome {
    let thickness = ThicknessPotential { a: 1.3, b: 0.7 };
    let models = [
        FlatPotential::Harmonic { k: 1.7 },
        FlatPotential::SeparatedInverse { c: 0.8, d: 1.4 },
        FlatPotential::TraceInverse { kappa: 0.9 },
    ];
    let grid: Vec<f64> = (0..10).map(|i| 0.3 + 2.7 * i as f64 / 9.0).collect();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for flat in models {
        let v = PotentialSpec::new(flat, thickness).unwrap();
        for &l in &grid {
            for &m in &grid {
                for &r in &grid {
                    let g = v.gradient(l, m, r).unwrap();
                    let x = [l, m, r];
                    for k in 0..3 {
                        let (mut xp, mut xm) = (x, x);
                        xp[k] += h;
                        xm[k] -= h;
                        let fd = (v.value(xp[0], xp[1], xp[2]).unwrap() - v.value(xm[0], xm[1], xm[2]).unwrap()) / (2.0 * h);
                        worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1.0));
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-6, format!("3 models x 1000 points, worst scaled error {worst:.2e}"))
}

fn c9_order() -> Outcome {
    let (st, j, v) = bounded_fixture();
    let end = |dt: f64| {
        let tr = integrate(&st, &IntegratorConfig::rk4(dt, 5.0), &j, &v).unwrap();
        assert!(tr.termination.is_completed());
        tr.last().state.to_array()
    };
    let reference = end(2.5e-4);
    let err = |dt: f64| end(dt).iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let (coarse, fine) = (err(0.02), err(0.01));
    let ratio = coarse / fine;
    outcome(
        (12.0..=20.0).contains(&ratio),
        format!("error {coarse:.2e} at dt = 0.02, {fine:.2e} at dt = 0.01, ratio {ratio:.2}"),
    )
}

fn c10_cli_no_solution() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = common::flatbody(&[
        "stationary",
        "--config",
        common::fixture("harmonic_no_solution.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--quiet",
    ]);
    let code = common::code(&out);
    let path = dir.path().join("summary.json");
    if !path.exists() {
        return outcome(false, format!("exit {code}, no summary written"));
    }
    let summary: Value = common::read_json(&path);
    let valid = common::validate(&common::summary_schema(), &summary);
    outcome(
        code == 3 && summary["status"] == "no_solution" && valid.is_ok(),
        format!("exit {code}, status {}, schema {}", summary["status"], if valid.is_ok() { "ok" } else { "invalid" }),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("equations of motion vs bracket oracle", c1_equations_of_motion),
        ("energy and p_theta conservation", c2_conservation),
        ("Legendre duality and Euler relation", c3_legendre),
        ("kinetic energy forms agree", c4_energy_chain),
        ("stationary solve and invariants", c5_stationary),
        ("stationary motion reconstruction", c6_reconstruction),
        ("kinematics round trips", c7_kinematics),
        ("potential gradients", c8_gradients),
        ("RK4 convergence order", c9_order),
        ("CLI reports missing stationary state", c10_cli_no_solution),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("[{}] {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
