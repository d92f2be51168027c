//! Sampling checks for the lemma-level bounds relating relative fluxes,
//! pressures and energies to the relative entropy.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{InternalEnergy, PressureLaw, StressLaw};
use crate::entropy::euler::{self, EulerState};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct FluxBoundReport {
    /// Empirical sup of |f(s|sb)| / eta(s|sb).
    pub c_flux: f64,
    /// Empirical sup of p(rho|rhob) / h(rho|rhob).
    pub c_ph: f64,
    pub samples: usize,
    /// True when both ratios stayed below the configured cap.
    pub bounded: bool,
}

/// Monte-Carlo scan of the flux and pressure control constants with bar
/// densities confined to the compact set `bar_range`.
pub fn flux_bound_scan(
    p: &PressureLaw,
    h: &InternalEnergy,
    seed: u64,
    samples: usize,
    bar_range: (f64, f64),
    state_range: (f64, f64),
    cap: f64,
) -> Result<FluxBoundReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bar_d = Uniform::new_inclusive(bar_range.0, bar_range.1).unwrap();
    let rho_d = Uniform::new_inclusive(state_range.0, state_range.1).unwrap();
    let vel_d = Uniform::new_inclusive(-2.0, 2.0).unwrap();

    let mut c_flux = 0.0f64;
    let mut c_ph = 0.0f64;
    for _ in 0..samples {
        let rho = rho_d.sample(&mut rng);
        let rho_b = bar_d.sample(&mut rng);
        let s = EulerState::new(rho, rho * vel_d.sample(&mut rng));
        let sb = EulerState::new(rho_b, rho_b * vel_d.sample(&mut rng));
        let eta = euler::relative_entropy(s, sb, h)?;
        if eta < 1e-14 {
            continue;
        }
        let f = euler::relative_flux_tensor(s, sb, p)?;
        c_flux = c_flux.max(f.abs() / eta);
        let hrel = h.h_rel(rho, rho_b);
        if hrel > 1e-14 {
            c_ph = c_ph.max(p.p_rel(rho, rho_b) / hrel);
        }
    }
    Ok(FluxBoundReport {
        c_flux,
        c_ph,
        samples,
        bounded: c_flux <= cap && c_ph <= cap,
    })
}

/// Ratio h(rho|rhob)/(rho - rhob)^2 near rho = rhob; its limit is h''(rhob)/2.
pub fn quadratic_ratio_limit(h: &InternalEnergy, rho_bar: f64, delta: f64) -> f64 {
    let up = h.h_rel(rho_bar + delta, rho_bar) / (delta * delta);
    let dn = h.h_rel(rho_bar - delta, rho_bar) / (delta * delta);
    0.5 * (up + dn)
}

#[derive(Debug, Clone)]
pub struct StressBoundReport {
    /// Empirical sup of tau(u|ub)/W(u|ub).
    pub c_tau: f64,
    pub bounded: bool,
}

/// Grid scan of tau(u|ub) <= C W(u|ub) with ub in `bar_range`, |u| <= u_max.
pub fn stress_bound_scan(
    law: &StressLaw,
    bar_range: (f64, f64),
    u_max: f64,
    n: usize,
    cap: f64,
) -> StressBoundReport {
    let mut c_tau = 0.0f64;
    for i in 0..n {
        let ub = bar_range.0 + (bar_range.1 - bar_range.0) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let u = -u_max + 2.0 * u_max * j as f64 / (n - 1) as f64;
            let w = law.w_rel(u, ub);
            if w < 1e-12 {
                continue;
            }
            c_tau = c_tau.max(law.tau_rel(u, ub).abs() / w);
        }
    }
    StressBoundReport {
        c_tau,
        bounded: c_tau <= cap,
    }
}
