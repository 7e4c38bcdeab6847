//! Built-in invariant suite behind `flatbody check`.

use flatbody::energetics::{
    kinetic_energy_canonical, kinetic_energy_trace, kinetic_energy_velocities, legendre_forward, legendre_inverse,
    placement_velocity,
};
use flatbody::hamiltonian::{eom_bracket_oracle_extended, eom_closed_form};
use flatbody::integrate::{integrate, reconstruct_placement, IntegratorConfig};
use flatbody::kinematics::{assemble_placement, kirchhoff_love_parameter, two_polar_decompose};
use flatbody::linalg::exp_antisymmetric;
use flatbody::stationary::{reconstruct_stationary_motion, solve_stationary, stationary_initial_state};
use flatbody::{
    CanonicalState, FlatPotential, InertiaSpec, Mat3, MomentumCoords, Potential, PotentialSpec, Rotation3, ShapeCoords,
    StationaryProblem, ThicknessPotential, VelocityCoords,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20080606;

pub struct CheckResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error.is_finite() && self.max_error <= self.tolerance
    }
}

pub struct Options {
    pub seed: u64,
    /// Relative perturbation applied to the closed-form `dp_λ/dt` before
    /// it is compared with the oracle (mutation-sensitivity hook).
    pub perturb_eom: f64,
}

/// Error measure used throughout: relative above 1e-6, absolute below,
/// scaled so that 1 is the tolerance edge for `(rel, abs)`.
fn scaled_err(a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    let mag = a.abs().max(b.abs());
    if mag < 1e-6 {
        (a - b).abs() / abs
    } else {
        (a - b).abs() / (rel * mag)
    }
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn u(&mut self, a: f64, b: f64) -> f64 {
        self.0.gen_range(a..b)
    }

    fn shape(&mut self) -> ShapeCoords<f64> {
        loop {
            let (l, m) = (self.u(0.5, 3.0), self.u(0.5, 3.0));
            if (l - m).abs() >= 0.2 {
                let (r, t) = (self.u(0.5, 3.0), self.u(-3.0, 3.0));
                return ShapeCoords::new(l.max(m), l.min(m), r, t).expect("positive by construction");
            }
        }
    }

    fn seven(&mut self) -> [f64; 7] {
        [(); 7].map(|_| self.u(-2.0, 2.0))
    }

    fn potential(&mut self, which: usize) -> PotentialSpec<f64> {
        let flat = match which % 3 {
            0 => FlatPotential::Harmonic { k: self.u(0.5, 3.0) },
            1 => FlatPotential::SeparatedInverse {
                c: self.u(0.5, 3.0),
                d: self.u(0.5, 3.0),
            },
            _ => FlatPotential::TraceInverse { kappa: self.u(0.5, 3.0) },
        };
        let th = ThicknessPotential {
            a: self.u(0.5, 3.0),
            b: self.u(0.5, 3.0),
        };
        PotentialSpec::new(flat, th).expect("positive coefficients")
    }

    fn rotation(&mut self) -> Rotation3<f64> {
        let w = [self.u(-2.0, 2.0), self.u(-2.0, 2.0), self.u(-2.0, 2.0)];
        Rotation3::new(exp_antisymmetric(&Mat3::comoving_skew(w))).expect("exponential of a skew matrix")
    }
}

fn bracket_oracle(rng: &mut Sampler, opts: &Options) -> f64 {
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let j = InertiaSpec::isotropic(rng.u(0.5, 3.0), rng.u(0.5, 3.0)).expect("positive");
        let v = rng.potential(case);
        let st = CanonicalState::new(rng.shape(), MomentumCoords::from_array(rng.seven()));
        let (Ok(mut a), Ok(b)) = (eom_closed_form(&st, &j, &v), eom_bracket_oracle_extended(&st, &j, &v)) else {
            return f64::INFINITY;
        };
        a.p_lambda *= 1.0 + opts.perturb_eom;
        for (x, y) in a.to_array().iter().zip(b.to_array()) {
            worst = worst.max(scaled_err(*x, y, 1e-6, 1e-9) * 1e-6);
        }
    }
    worst
}

fn legendre_round_trip(rng: &mut Sampler) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let s = rng.shape();
        let j = InertiaSpec::isotropic(rng.u(0.5, 3.0), rng.u(0.5, 3.0)).expect("positive");
        let v = rng.seven();
        let Ok(back) = legendre_inverse(&s, &legendre_forward(&s, &VelocityCoords::from_array(v), &j), &j) else {
            return f64::INFINITY;
        };
        for (a, b) in back.to_array().iter().zip(v) {
            worst = worst.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    worst
}

fn energy_forms(rng: &mut Sampler) -> f64 {
    let mut worst: f64 = 0.0;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    for _ in 0..200 {
        let s = rng.shape();
        let r = rng.rotation();
        let vel = VelocityCoords::from_array(rng.seven());
        let j = InertiaSpec::isotropic(rng.u(0.5, 3.0), rng.u(0.5, 3.0)).expect("positive");
        let trace = kinetic_energy_trace(&placement_velocity(&r, &s, &vel), &j);
        let mom = legendre_forward(&s, &vel, &j);
        let Ok(canonical) = kinetic_energy_canonical(&s, &mom, &j) else {
            return f64::INFINITY;
        };
        worst = worst
            .max(rel(trace, kinetic_energy_velocities(&s, &vel, &j)))
            .max(rel(trace, canonical));
    }
    worst
}

fn gradients() -> f64 {
    let mut worst: f64 = 0.0;
    let th = ThicknessPotential { a: 1.0, b: 8.0 };
    let h = 1e-6;
    for flat in [
        FlatPotential::Harmonic { k: 1.0 },
        FlatPotential::SeparatedInverse { c: 1.0, d: 1.0 },
        FlatPotential::TraceInverse { kappa: 1.0 },
    ] {
        let v = PotentialSpec::new(flat, th).expect("positive");
        for i in 0..6 {
            for k in 0..6 {
                for q in 0..6 {
                    let x = [0.3 + 0.5 * i as f64, 0.3 + 0.5 * k as f64, 0.3 + 0.5 * q as f64];
                    let Ok(g) = v.gradient(x[0], x[1], x[2]) else {
                        return f64::INFINITY;
                    };
                    for c in 0..3 {
                        let (mut xp, mut xm) = (x, x);
                        xp[c] += h;
                        xm[c] -= h;
                        let fd = (v.value(xp[0], xp[1], xp[2]).unwrap_or(f64::NAN)
                            - v.value(xm[0], xm[1], xm[2]).unwrap_or(f64::NAN))
                            / (2.0 * h);
                        worst = worst.max((fd - g[c]).abs() / g[c].abs().max(1.0));
                    }
                }
            }
        }
    }
    worst
}

fn decomposition(rng: &mut Sampler) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let s = rng.shape();
        let phi = assemble_placement(&rng.rotation(), &s);
        let Ok((r, back)) = two_polar_decompose(&phi) else {
            return f64::INFINITY;
        };
        let again = assemble_placement(&r, &back);
        worst = worst
            .max((*again.matrix() - *phi.matrix()).max_abs())
            .max((back.lambda - s.lambda).abs())
            .max((back.mu - s.mu).abs())
            .max((back.rho - s.rho).abs());
        match kirchhoff_love_parameter(&phi) {
            Ok(ell) => worst = worst.max((ell - s.rho / (s.lambda * s.mu)).abs()),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn bounded_fixture() -> (CanonicalState<f64>, InertiaSpec<f64>, PotentialSpec<f64>) {
    let st = CanonicalState::new(
        ShapeCoords::new(1.4, 0.4, 1.1, 0.3).expect("positive"),
        MomentumCoords {
            s1: 0.05,
            s2: 0.05,
            s3: 2.0,
            p_theta: 1.0,
            p_lambda: 0.05,
            p_mu: -0.05,
            p_rho: 0.1,
        },
    );
    let v = PotentialSpec::new(FlatPotential::Harmonic { k: 1.0 }, ThicknessPotential { a: 1.0, b: 1.0 }).expect("positive");
    (st.with_attitude(Rotation3::identity()), InertiaSpec::isotropic(1.0, 1.0).expect("positive"), v)
}

fn conservation() -> (f64, f64, f64) {
    let (st, j, v) = bounded_fixture();
    match integrate(&st, &IntegratorConfig::rk4(1e-3, 10.0).with_stride(1000), &j, &v) {
        Ok(tr) if tr.termination.is_completed() => (
            tr.report.max_rel_energy_drift,
            tr.report.max_abs_p_theta_drift,
            tr.report.attitude_orthogonality_max_defect,
        ),
        _ => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    }
}

fn stationary(rng: &mut Sampler) -> (f64, f64, f64) {
    let fail = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let problem = StationaryProblem {
        s3: rng.u(0.5, 1.2),
        p_theta: rng.u(-0.3, 0.3),
        inertia: InertiaSpec::isotropic(1.0, 1.0).expect("positive"),
        potential: PotentialSpec::new(FlatPotential::SeparatedInverse { c: 1.0, d: 1.0 }, ThicknessPotential { a: 1.0, b: 8.0 })
            .expect("positive"),
        guess: [1.5, 0.7, 1.0],
    };
    let Ok(sol) = solve_stationary(&problem) else {
        return fail;
    };
    let r0 = rng.rotation();
    let Ok(st) = stationary_initial_state(&sol, &problem, 0.3) else {
        return fail;
    };
    let st = st.with_attitude(r0);
    let Ok(tr) = integrate(&st, &IntegratorConfig::rk4(1e-3, 10.0).with_stride(100), &problem.inertia, &problem.potential) else {
        return fail;
    };
    let x0 = st.to_array();
    let mut drift: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for s in &tr.samples {
        let x = s.state.to_array();
        for k in [0, 1, 2, 7, 10] {
            drift = drift.max((x[k] - x0[k]).abs());
        }
        let Ok(a) = reconstruct_placement(s) else {
            return fail;
        };
        let b = reconstruct_stationary_motion(&sol, &r0, 0.3, s.t);
        recon = recon.max((*a.matrix() - *b.matrix()).max_abs());
    }
    (sol.residual_norm, drift, recon)
}

pub fn run(opts: &Options) -> Vec<CheckResult> {
    let mut rng = Sampler(ChaCha8Rng::seed_from_u64(opts.seed));
    let (energy, p_theta, attitude) = conservation();
    let (residual, drift, recon) = stationary(&mut rng);
    vec![
        CheckResult {
            name: "eom_vs_bracket_oracle",
            max_error: bracket_oracle(&mut rng, opts),
            tolerance: 1e-6,
        },
        CheckResult {
            name: "legendre_round_trip",
            max_error: legendre_round_trip(&mut rng),
            tolerance: 1e-12,
        },
        CheckResult {
            name: "kinetic_energy_forms",
            max_error: energy_forms(&mut rng),
            tolerance: 1e-10,
        },
        CheckResult {
            name: "potential_gradients",
            max_error: gradients(),
            tolerance: 1e-6,
        },
        CheckResult {
            name: "decomposition_round_trip",
            max_error: decomposition(&mut rng),
            tolerance: 1e-10,
        },
        CheckResult {
            name: "energy_conservation_rk4",
            max_error: energy,
            tolerance: 1e-6,
        },
        CheckResult {
            name: "p_theta_conservation",
            max_error: p_theta,
            tolerance: 1e-12,
        },
        CheckResult {
            name: "attitude_orthogonality",
            max_error: attitude,
            tolerance: 1e-9,
        },
        CheckResult {
            name: "stationary_residual",
            max_error: residual,
            tolerance: 1e-10,
        },
        CheckResult {
            name: "stationary_invariant_drift",
            max_error: drift,
            tolerance: 1e-6,
        },
        CheckResult {
            name: "stationary_reconstruction",
            max_error: recon,
            tolerance: 1e-5,
        },
    ]
}
