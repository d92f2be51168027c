//! Seeded randomized identity, consistency and lemma-bound checks, the
//! engine behind the `check` subcommand.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{log_spaced, make_gamma_law, PressureLaw, StressLaw};
use crate::entropy::euler::{self, EulerState, ModifiedPair};
use crate::entropy::lemmas;
use crate::entropy::{psystem, visco};
use crate::error::Result;
use crate::systems::RelaxationSystem;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &str, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed: true,
            detail,
        }
    }

    fn fail(name: &str, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed: false,
            detail,
        }
    }

    fn from_bound(name: &str, worst: f64, tol: f64) -> Self {
        if worst <= tol {
            Self::pass(name, format!("worst {worst:.3e} <= {tol:.1e}"))
        } else {
            Self::fail(name, format!("worst {worst:.3e} > {tol:.1e}"))
        }
    }
}

const TAYLOR_SAMPLES: usize = 10_000;
const FD_SAMPLES: usize = 1_000;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-6;

fn sample_rho(rng: &mut ChaCha8Rng) -> f64 {
    Uniform::new_inclusive(0.1, 10.0).unwrap().sample(rng)
}

fn sample_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    Uniform::new_inclusive(lo, hi).unwrap().sample(rng)
}

/// Finite-difference check of the pair relation grad q = grad eta . J_f on
/// the supplied states; returns the worst relative mismatch.
pub fn pair_consistency_fd(
    eta: &dyn Fn(&[f64]) -> f64,
    q: &dyn Fn(&[f64]) -> f64,
    flux: &dyn Fn(&[f64]) -> Vec<f64>,
    states: &[Vec<f64>],
    step: f64,
) -> f64 {
    let mut worst = 0.0f64;
    for s in states {
        let dim = s.len();
        let mut sp = s.clone();
        let mut sm = s.clone();
        let grad = |f: &dyn Fn(&[f64]) -> f64, sp: &mut [f64], sm: &mut [f64], j: usize| {
            sp[j] = s[j] + step;
            sm[j] = s[j] - step;
            let d = (f(sp) - f(sm)) / (2.0 * step);
            sp[j] = s[j];
            sm[j] = s[j];
            d
        };
        let deta: Vec<f64> = (0..dim).map(|j| grad(eta, &mut sp, &mut sm, j)).collect();
        for j in 0..dim {
            let dq = grad(q, &mut sp, &mut sm, j);
            // column j of the flux Jacobian
            sp[j] = s[j] + step;
            sm[j] = s[j] - step;
            let fp = flux(&sp);
            let fm = flux(&sm);
            sp[j] = s[j];
            sm[j] = s[j];
            let dot: f64 = (0..dim)
                .map(|i| deta[i] * (fp[i] - fm[i]) / (2.0 * step))
                .sum();
            worst = worst.max((dq - dot).abs() / (1.0 + dq.abs()));
        }
    }
    worst
}

fn euler_taylor_check(p: &PressureLaw, rng: &mut ChaCha8Rng) -> Result<f64> {
    let h = crate::constitutive::InternalEnergy::from_pressure(p);
    let mut worst = 0.0f64;
    for _ in 0..TAYLOR_SAMPLES {
        let s = EulerState::new(sample_rho(rng), 0.0);
        let s = EulerState::new(s.rho, s.rho * sample_in(rng, -2.0, 2.0));
        let sb = EulerState::new(sample_rho(rng), 0.0);
        let sb = EulerState::new(sb.rho, sb.rho * sample_in(rng, -2.0, 2.0));
        let pairs = [
            (
                euler::relative_entropy(s, sb, &h)?,
                euler::relative_entropy_taylor(s, sb, &h)?,
            ),
            (
                euler::relative_flux(s, sb, &h)?,
                euler::relative_flux_taylor(s, sb, &h, p)?,
            ),
            (
                euler::relative_flux_tensor(s, sb, p)?,
                euler::relative_flux_tensor_taylor(s, sb, p)?,
            ),
        ];
        for (cf, tr) in pairs {
            worst = worst.max((cf - tr).abs() / (1.0 + cf.abs()));
        }
    }
    Ok(worst)
}

fn psystem_taylor_check(tau: &StressLaw, rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..TAYLOR_SAMPLES {
        let s = psystem::PSystemState::new(sample_in(rng, -3.0, 3.0), sample_in(rng, -3.0, 3.0));
        let sb = psystem::PSystemState::new(sample_in(rng, -3.0, 3.0), sample_in(rng, -3.0, 3.0));
        let e = psystem::relative_energy(s, sb, tau);
        let et = psystem::relative_energy_taylor(s, sb, tau);
        let f = psystem::relative_flux(s, sb, tau);
        let ft = psystem::relative_flux_taylor(s, sb, tau);
        worst = worst.max((e - et).abs() / (1.0 + e.abs()));
        worst = worst.max((f - ft).abs() / (1.0 + f.abs()));
    }
    worst
}

fn visco_taylor_check(sigma: &StressLaw, mu: f64, rng: &mut ChaCha8Rng) -> f64 {
    let eps = 0.3;
    let mut worst = 0.0f64;
    for _ in 0..TAYLOR_SAMPLES {
        let s = visco::ViscoState::new(
            sample_in(rng, -3.0, 3.0),
            sample_in(rng, -3.0, 3.0),
            sample_in(rng, -3.0, 3.0),
        );
        let sb = visco::ViscoState::new(
            sample_in(rng, -3.0, 3.0),
            sample_in(rng, -3.0, 3.0),
            sample_in(rng, -3.0, 3.0),
        );
        let e = visco::relative_energy(s, sb, sigma, mu);
        let et = visco::relative_energy_taylor(s, sb, sigma, mu);
        let f = visco::relative_flux(s, sb, sigma, eps);
        let ft = visco::relative_flux_taylor(s, sb, sigma, mu, eps);
        worst = worst.max((e - et).abs() / (1.0 + e.abs()));
        worst = worst.max((f - ft).abs() / (1.0 + f.abs()));
    }
    worst
}

fn consistency_states(sys: &RelaxationSystem, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let dim = sys.state_dim();
    (0..FD_SAMPLES)
        .map(|_| {
            (0..dim)
                .map(|c| {
                    if c == 0 && matches!(sys, RelaxationSystem::EulerFriction { .. }) {
                        sample_in(rng, 0.3, 5.0)
                    } else {
                        sample_in(rng, -2.0, 2.0)
                    }
                })
                .collect()
        })
        .collect()
}

fn system_consistency_check(sys: &RelaxationSystem, rng: &mut ChaCha8Rng) -> f64 {
    let eps = 0.7;
    let dim = sys.state_dim();
    let states = consistency_states(sys, rng);
    let eta = |s: &[f64]| sys.entropy(s).unwrap();
    let q = |s: &[f64]| sys.entropy_flux(s, eps).unwrap();
    let flux = |s: &[f64]| {
        let mut out = [0.0; crate::systems::MAX_DIM];
        sys.flux(s, eps, &mut out);
        out[..dim].to_vec()
    };
    pair_consistency_fd(&eta, &q, &flux, &states, FD_STEP)
}

fn hessian_check(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..FD_SAMPLES {
        let rho = sample_rho(rng);
        let m = [
            sample_in(rng, -3.0, 3.0),
            sample_in(rng, -3.0, 3.0),
            sample_in(rng, -3.0, 3.0),
        ];
        let closed = euler::hessian_r_eigenvalues(rho, m);
        let hess = euler::hessian_r_3d(rho, m);
        let mat = nalgebra::Matrix4::from_fn(|i, j| hess[i][j]);
        let mut evs: Vec<f64> = mat
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (c, n) in closed.iter().zip(&evs) {
            worst = worst.max((c - n).abs() / (1.0 + c.abs()));
        }
        if closed[0] < -1e-12 {
            worst = f64::INFINITY;
        }
    }
    worst
}

fn gamma_equality_check(k: f64, gamma: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (p, h) = make_gamma_law(k, gamma)?;
    let mut worst = 0.0f64;
    for _ in 0..TAYLOR_SAMPLES {
        let rho = sample_rho(rng);
        let rho_b = sample_rho(rng);
        let lhs = p.p_rel(rho, rho_b);
        let rhs = (gamma - 1.0) * h.h_rel(rho, rho_b);
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok(worst)
}

fn nonnegativity_check(
    p: &PressureLaw,
    tau: &StressLaw,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let h = crate::constitutive::InternalEnergy::from_pressure(p);
    let mut worst = 0.0f64;
    for _ in 0..TAYLOR_SAMPLES {
        let s = EulerState::new(sample_rho(rng), sample_in(rng, -5.0, 5.0));
        let sb = EulerState::new(sample_rho(rng), sample_in(rng, -5.0, 5.0));
        worst = worst.min(euler::relative_entropy(s, sb, &h)?);
        worst = worst.min(euler::big_r(s, sb)?);
        worst = worst.min(h.h_rel(s.rho, sb.rho));
        // dissipativity of the source pairing
        worst = worst.min(s.m * s.m / s.rho);
        let u = sample_in(rng, -3.0, 3.0);
        let ub = sample_in(rng, -3.0, 3.0);
        worst = worst.min(tau.w_rel(u, ub));
    }
    Ok(-worst)
}

fn modified_pair_check(k: f64, gamma: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (p, h) = make_gamma_law(k, gamma)?;
    let mp = ModifiedPair::new(1.0, 3.0, &h)?;
    let mut worst = mp.eta_tilde(EulerState::new(1.0, 0.0), &h)?.abs();
    worst = worst.max(mp.eta_tilde(EulerState::new(3.0, 0.0), &h)?.abs());
    for _ in 0..FD_SAMPLES {
        let s = EulerState::new(sample_rho(rng), sample_in(rng, -2.0, 2.0));
        let sb = EulerState::new(sample_rho(rng), sample_in(rng, -2.0, 2.0));
        let plain = euler::relative_entropy(s, sb, &h)?;
        let tilde = mp.relative(s, sb, &h)?;
        worst = worst.max((plain - tilde).abs() / (1.0 + plain.abs()));
    }
    // pair consistency of (eta_tilde, q_tilde) under the Euler flux
    let states: Vec<Vec<f64>> = (0..200)
        .map(|_| vec![sample_in(rng, 0.3, 5.0), sample_in(rng, -2.0, 2.0)])
        .collect();
    let eta = |s: &[f64]| mp.eta_tilde(EulerState::new(s[0], s[1]), &h).unwrap();
    let q = |s: &[f64]| mp.q_tilde(EulerState::new(s[0], s[1]), &h).unwrap();
    let flux = |s: &[f64]| {
        let (f1, f2) = euler::flux(EulerState::new(s[0], s[1]), &p);
        vec![f1, f2]
    };
    let fd = pair_consistency_fd(&eta, &q, &flux, &states, FD_STEP);
    Ok(worst.max(fd))
}

/// Runs the full suite with a fixed seed and the given gamma-law parameters.
pub fn run_all(seed: u64, k: f64, gamma: f64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, _) = make_gamma_law(k, gamma)?;
    let tau = StressLaw::linear_cubic(1.0, 1.0)?;
    let mut results = Vec::new();

    results.push(CheckResult::from_bound(
        "taylor-equivalence-euler",
        euler_taylor_check(&p, &mut rng)?,
        1e-12,
    ));
    results.push(CheckResult::from_bound(
        "taylor-equivalence-psystem",
        psystem_taylor_check(&tau, &mut rng),
        1e-12,
    ));
    results.push(CheckResult::from_bound(
        "taylor-equivalence-visco",
        visco_taylor_check(&tau, 1.7, &mut rng),
        1e-12,
    ));

    let systems = [
        (
            "entropy-consistency-euler",
            RelaxationSystem::euler(p.clone()),
        ),
        (
            "entropy-consistency-psystem",
            RelaxationSystem::psystem(tau.clone()),
        ),
        (
            "entropy-consistency-visco",
            RelaxationSystem::visco(tau.clone(), 1.7)?,
        ),
    ];
    for (name, sys) in &systems {
        results.push(CheckResult::from_bound(
            name,
            system_consistency_check(sys, &mut rng),
            FD_TOL,
        ));
    }

    results.push(CheckResult::from_bound(
        "hessian-eigenvalues",
        hessian_check(&mut rng),
        1e-8,
    ));
    results.push(CheckResult::from_bound(
        "gamma-law-ph-equality",
        gamma_equality_check(k, gamma, &mut rng)?,
        1e-12,
    ));
    results.push(CheckResult::from_bound(
        "nonnegativity",
        nonnegativity_check(&p, &tau, &mut rng)?,
        1e-14,
    ));
    results.push(CheckResult::from_bound(
        "modified-pair",
        modified_pair_check(k, gamma, &mut rng)?,
        FD_TOL,
    ));

    let grid = log_spaced(0.1, 100.0, 256);
    let rep = lemmas::flux_bound_scan(&p, &crate::constitutive::InternalEnergy::from_pressure(&p),
        seed ^ 0x9e37, 100_000, (0.5, 4.0), (0.1, 10.0), 100.0)?;
    results.push(if rep.bounded {
        CheckResult::pass(
            "lemma-flux-bound",
            format!("C_flux {:.3}, c_ph {:.3} over {} samples", rep.c_flux, rep.c_ph, rep.samples),
        )
    } else {
        CheckResult::fail(
            "lemma-flux-bound",
            format!("unbounded ratio: C_flux {:.3e}, c_ph {:.3e}", rep.c_flux, rep.c_ph),
        )
    });

    let h = crate::constitutive::InternalEnergy::from_pressure(&p);
    let mut worst = 0.0f64;
    for rho_bar in [0.5, 1.0, 2.0, 4.0] {
        let lim = lemmas::quadratic_ratio_limit(&h, rho_bar, 1e-4);
        let target = 0.5 * h.d2h(rho_bar);
        worst = worst.max((lim - target).abs() / (1.0 + target.abs()));
    }
    results.push(CheckResult::from_bound("lemma-quadratic-ratio", worst, 1e-4));

    let srep = lemmas::stress_bound_scan(&StressLaw::linear_cubic(0.0, 1.0)?, (-1.0, 1.0), 1e3, 100, 1e3);
    results.push(if srep.bounded {
        CheckResult::pass("lemma-stress-bound", format!("C_tau {:.3}", srep.c_tau))
    } else {
        CheckResult::fail("lemma-stress-bound", format!("C_tau {:.3e}", srep.c_tau))
    });

    // hypothesis (A): holds for the gamma law, reported (not asserted) false
    // for the exponential pressure
    let arep = crate::constitutive::check_hypothesis_a(&p, &grid, 100.0);
    results.push(if arep.holds {
        CheckResult::pass(
            "hypothesis-A-gamma-law",
            format!("A = {:.3}", arep.constant),
        )
    } else {
        CheckResult::fail(
            "hypothesis-A-gamma-law",
            format!("violated at rho = {:?}", arep.witness),
        )
    });
    let pexp = PressureLaw::tabulated(
        std::sync::Arc::new(|r: f64| r.exp()),
        std::sync::Arc::new(|r: f64| r.exp()),
        std::sync::Arc::new(|r: f64| r.exp()),
    );
    let aexp = crate::constitutive::check_hypothesis_a(&pexp, &grid, 10.0);
    results.push(if aexp.holds {
        CheckResult::fail(
            "hypothesis-A-exponential",
            "expected the exponential pressure to violate hypothesis (A)".into(),
        )
    } else {
        CheckResult::pass(
            "hypothesis-A-exponential",
            format!("holds=false as expected (witness rho = {:.3})", aexp.witness.unwrap()),
        )
    });

    Ok(results)
}
