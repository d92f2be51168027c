//! Constitutive closures: pressure laws, internal energies and stress laws,
//! together with sampling-based hypothesis checks on their growth.

use std::fmt;
use std::sync::Arc;

use crate::error::{RelaxError, Result};
use crate::quadrature;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

// x^g with multiply fast paths for the small integer exponents that dominate
// solver inner loops; powf is roughly 30x a multiply
#[inline]
fn powg(x: f64, g: f64) -> f64 {
    if g == 0.0 {
        1.0
    } else if g == 1.0 {
        x
    } else if g == 2.0 {
        x * x
    } else if g == 3.0 {
        x * x * x
    } else {
        x.powf(g)
    }
}

/// Lower cut-off used when integrating tabulated energies toward vacuum.
pub const RHO_FLOOR: f64 = 1e-8;

/// Default quadrature tolerance for tabulated antiderivatives.
pub const QUAD_TOL: f64 = 1e-12;

#[derive(Clone)]
pub enum PressureKind {
    /// p(rho) = k rho^gamma with k > 0, gamma >= 1.
    GammaLaw { k: f64, gamma: f64 },
    /// Caller-supplied p, p', p'' on rho > 0.
    Tabulated {
        p: ScalarFn,
        dp: ScalarFn,
        d2p: ScalarFn,
    },
}

#[derive(Clone)]
pub struct PressureLaw {
    pub kind: PressureKind,
}

impl fmt::Debug for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PressureKind::GammaLaw { k, gamma } => {
                write!(f, "PressureLaw::GammaLaw(k={k}, gamma={gamma})")
            }
            PressureKind::Tabulated { .. } => write!(f, "PressureLaw::Tabulated"),
        }
    }
}

impl PressureLaw {
    pub fn gamma_law(k: f64, gamma: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(RelaxError::InvalidConstitutive(format!(
                "gamma law requires k > 0, got k = {k}"
            )));
        }
        if !(gamma >= 1.0) {
            return Err(RelaxError::InvalidConstitutive(format!(
                "gamma law requires gamma >= 1, got gamma = {gamma}"
            )));
        }
        Ok(PressureLaw {
            kind: PressureKind::GammaLaw { k, gamma },
        })
    }

    pub fn tabulated(p: ScalarFn, dp: ScalarFn, d2p: ScalarFn) -> Self {
        PressureLaw {
            kind: PressureKind::Tabulated { p, dp, d2p },
        }
    }

    pub fn p(&self, rho: f64) -> f64 {
        match &self.kind {
            PressureKind::GammaLaw { k, gamma } => k * powg(rho, *gamma),
            PressureKind::Tabulated { p, .. } => p(rho),
        }
    }

    pub fn dp(&self, rho: f64) -> f64 {
        match &self.kind {
            PressureKind::GammaLaw { k, gamma } => k * gamma * powg(rho, gamma - 1.0),
            PressureKind::Tabulated { dp, .. } => dp(rho),
        }
    }

    pub fn d2p(&self, rho: f64) -> f64 {
        match &self.kind {
            PressureKind::GammaLaw { k, gamma } => {
                k * gamma * (gamma - 1.0) * powg(rho, gamma - 2.0)
            }
            PressureKind::Tabulated { d2p, .. } => d2p(rho),
        }
    }

    /// Taylor remainder p(rho | rho_bar) = p(rho) - p(rho_bar) - p'(rho_bar)(rho - rho_bar).
    pub fn p_rel(&self, rho: f64, rho_bar: f64) -> f64 {
        self.p(rho) - self.p(rho_bar) - self.dp(rho_bar) * (rho - rho_bar)
    }
}

#[derive(Clone)]
enum EnergyKind {
    /// gamma > 1: h = k/(gamma-1) rho^gamma; gamma = 1: h = k rho log rho.
    GammaClosed { k: f64, gamma: f64 },
    /// h'' = p'/rho integrated from the anchor rho = 1 with h(1) = 0, h'(1) = p(1).
    Quadrature { law: PressureLaw, tol: f64 },
}

/// Internal energy density h(rho) = rho e(rho), tied to the pressure via
/// h''(rho) = p'(rho)/rho and rho h'(rho) = p(rho) + h(rho).
#[derive(Clone)]
pub struct InternalEnergy {
    kind: EnergyKind,
}

impl fmt::Debug for InternalEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EnergyKind::GammaClosed { k, gamma } => {
                write!(f, "InternalEnergy::GammaClosed(k={k}, gamma={gamma})")
            }
            EnergyKind::Quadrature { tol, .. } => write!(f, "InternalEnergy::Quadrature(tol={tol})"),
        }
    }
}

impl InternalEnergy {
    pub fn from_pressure(law: &PressureLaw) -> Self {
        match &law.kind {
            PressureKind::GammaLaw { k, gamma } => InternalEnergy {
                kind: EnergyKind::GammaClosed {
                    k: *k,
                    gamma: *gamma,
                },
            },
            PressureKind::Tabulated { .. } => InternalEnergy {
                kind: EnergyKind::Quadrature {
                    law: law.clone(),
                    tol: QUAD_TOL,
                },
            },
        }
    }

    pub fn h(&self, rho: f64) -> f64 {
        match &self.kind {
            EnergyKind::GammaClosed { k, gamma } => {
                if *gamma > 1.0 {
                    k / (gamma - 1.0) * powg(rho, *gamma)
                } else if rho == 0.0 {
                    0.0
                } else {
                    k * rho * rho.ln()
                }
            }
            EnergyKind::Quadrature { law, tol } => {
                // h(rho) = h(1) + h'(1)(rho - 1) + \int_1^rho (rho - s) p'(s)/s ds
                let lo = rho.max(RHO_FLOOR);
                law.p(1.0) * (rho - 1.0)
                    + quadrature::integrate(|s| (rho - s) * law.dp(s) / s, 1.0, lo, *tol)
            }
        }
    }

    pub fn dh(&self, rho: f64) -> f64 {
        match &self.kind {
            EnergyKind::GammaClosed { k, gamma } => {
                if *gamma > 1.0 {
                    k * gamma / (gamma - 1.0) * powg(rho, gamma - 1.0)
                } else {
                    k * (rho.ln() + 1.0)
                }
            }
            EnergyKind::Quadrature { law, tol } => {
                let lo = rho.max(RHO_FLOOR);
                law.p(1.0) + quadrature::integrate(|s| law.dp(s) / s, 1.0, lo, *tol)
            }
        }
    }

    pub fn d2h(&self, rho: f64) -> f64 {
        match &self.kind {
            EnergyKind::GammaClosed { k, gamma } => k * gamma * powg(rho, gamma - 2.0),
            EnergyKind::Quadrature { law, .. } => law.dp(rho) / rho,
        }
    }

    /// Taylor remainder h(rho | rho_bar).
    pub fn h_rel(&self, rho: f64, rho_bar: f64) -> f64 {
        self.h(rho) - self.h(rho_bar) - self.dh(rho_bar) * (rho - rho_bar)
    }
}

/// Builds the gamma-law pressure together with its closed-form energy.
pub fn make_gamma_law(k: f64, gamma: f64) -> Result<(PressureLaw, InternalEnergy)> {
    let law = PressureLaw::gamma_law(k, gamma)?;
    let energy = InternalEnergy::from_pressure(&law);
    Ok((law, energy))
}

#[derive(Clone)]
enum StressKind {
    /// tau(u) = lin*u + cubic*u^3; closed-form stored energy.
    LinearCubic { lin: f64, cubic: f64 },
    Custom { tau: ScalarFn, dtau: ScalarFn },
}

/// Monotone stress closure tau(u) (or sigma(u)) with its stored energy
/// W(u) = int_0^u tau(s) ds and a claimed tail growth exponent.
#[derive(Clone)]
pub struct StressLaw {
    kind: StressKind,
    pub growth_exponent: f64,
    quad_tol: f64,
}

impl fmt::Debug for StressLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StressKind::LinearCubic { lin, cubic } => {
                write!(f, "StressLaw({lin}*u + {cubic}*u^3, p={})", self.growth_exponent)
            }
            StressKind::Custom { .. } => write!(f, "StressLaw::Custom(p={})", self.growth_exponent),
        }
    }
}

impl StressLaw {
    pub fn linear_cubic(lin: f64, cubic: f64) -> Result<Self> {
        if lin < 0.0 || cubic < 0.0 || (lin == 0.0 && cubic == 0.0) {
            return Err(RelaxError::InvalidConstitutive(format!(
                "linear-cubic stress needs nonnegative coefficients, not both zero (lin={lin}, cubic={cubic})"
            )));
        }
        let growth = if cubic > 0.0 { 3.0 } else { 1.0 };
        Ok(StressLaw {
            kind: StressKind::LinearCubic { lin, cubic },
            growth_exponent: growth,
            quad_tol: QUAD_TOL,
        })
    }

    pub fn custom(tau: ScalarFn, dtau: ScalarFn, growth_exponent: f64) -> Self {
        StressLaw {
            kind: StressKind::Custom { tau, dtau },
            growth_exponent,
            quad_tol: QUAD_TOL,
        }
    }

    pub fn tau(&self, u: f64) -> f64 {
        match &self.kind {
            StressKind::LinearCubic { lin, cubic } => lin * u + cubic * u * u * u,
            StressKind::Custom { tau, .. } => tau(u),
        }
    }

    pub fn dtau(&self, u: f64) -> f64 {
        match &self.kind {
            StressKind::LinearCubic { lin, cubic } => lin + 3.0 * cubic * u * u,
            StressKind::Custom { dtau, .. } => dtau(u),
        }
    }

    /// Stored energy W(u) = int_0^u tau.
    pub fn w(&self, u: f64) -> f64 {
        match &self.kind {
            StressKind::LinearCubic { lin, cubic } => {
                0.5 * lin * u * u + 0.25 * cubic * u.powi(4)
            }
            StressKind::Custom { tau, .. } => {
                quadrature::integrate(|s| tau(s), 0.0, u, self.quad_tol)
            }
        }
    }

    pub fn tau_rel(&self, u: f64, u_bar: f64) -> f64 {
        self.tau(u) - self.tau(u_bar) - self.dtau(u_bar) * (u - u_bar)
    }

    pub fn w_rel(&self, u: f64, u_bar: f64) -> f64 {
        self.w(u) - self.w(u_bar) - self.tau(u_bar) * (u - u_bar)
    }
}

/// 512 log-spaced samples on [1e-3, 1e3]; the default grid for hypothesis checks.
pub fn default_sample_grid() -> Vec<f64> {
    log_spaced(1e-3, 1e3, 512)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone)]
pub struct HypothesisAReport {
    pub holds: bool,
    /// Density at which the ratio exceeded the cap, when the bound fails.
    pub witness: Option<f64>,
    /// Smallest A with p''(rho) <= A p'(rho)/rho over the sampled grid.
    pub constant: f64,
}

/// Samples the ratio rho p''(rho)/p'(rho); hypothesis (A) asks it to stay bounded.
pub fn check_hypothesis_a(law: &PressureLaw, sample_grid: &[f64], cap: f64) -> HypothesisAReport {
    assert!(!sample_grid.is_empty(), "sample grid must be nonempty");
    let mut a = 0.0f64;
    let mut witness = None;
    for &rho in sample_grid {
        assert!(rho > 0.0, "sample grid must be strictly positive");
        let ratio = rho * law.d2p(rho) / law.dp(rho);
        if ratio > a {
            a = ratio;
        }
        if ratio > cap && witness.is_none() {
            witness = Some(rho);
        }
    }
    HypothesisAReport {
        holds: witness.is_none(),
        witness,
        constant: a,
    }
}

#[derive(Debug, Clone)]
pub struct TailReport {
    pub holds: bool,
    pub residual: f64,
}

/// Growth condition (tail): p'(rho) / (k gamma rho^(gamma-1)) -> 1 as rho grows.
pub fn check_hypothesis_b(
    law: &PressureLaw,
    gamma_claim: f64,
    k_claim: f64,
    tail_grid: &[f64],
    tol: f64,
) -> TailReport {
    assert!(!tail_grid.is_empty());
    let last = *tail_grid.last().unwrap();
    let ratio = law.dp(last) / (k_claim * gamma_claim * last.powf(gamma_claim - 1.0));
    let residual = (ratio - 1.0).abs();
    TailReport {
        holds: residual <= tol,
        residual,
    }
}

/// Tail growth of a stress law on both ends: tau(u)/(sgn(u) |u|^p) -> 1.
pub fn check_growth_h(stress: &StressLaw, tail_grid: &[f64], tol: f64) -> TailReport {
    assert!(!tail_grid.is_empty());
    let u = *tail_grid.last().unwrap();
    let p = stress.growth_exponent;
    let plus = stress.tau(u) / u.abs().powf(p) - 1.0;
    let minus = stress.tau(-u) / -u.abs().powf(p) - 1.0;
    let residual = plus.abs().max(minus.abs());
    TailReport {
        holds: residual <= tol,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_law_energy_closed_forms() {
        let (_, h) = make_gamma_law(1.0, 2.0).unwrap();
        assert_eq!(h.h(3.0), 9.0);

        let (_, h1) = make_gamma_law(1.0, 1.0).unwrap();
        assert_eq!(h1.h(1.0), 0.0);

        // h''(rho) = p'(rho)/rho: k=2, gamma=3 at rho=2 gives 2*3*4/2 = 12.
        let (_, h3) = make_gamma_law(2.0, 3.0).unwrap();
        assert!((h3.d2h(2.0) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_law_rejects_bad_parameters() {
        assert!(make_gamma_law(0.0, 2.0).is_err());
        assert!(make_gamma_law(-1.0, 2.0).is_err());
        assert!(make_gamma_law(1.0, 0.9).is_err());
    }

    #[test]
    fn energy_identities_closed_form() {
        for (k, gamma) in [(1.0, 2.0), (0.5, 1.4), (2.0, 3.0), (1.0, 1.0)] {
            let (p, h) = make_gamma_law(k, gamma).unwrap();
            for rho in [0.1, 0.5, 1.0, 2.0, 7.5] {
                assert!(
                    (h.d2h(rho) - p.dp(rho) / rho).abs() <= 1e-10 * (1.0 + h.d2h(rho).abs()),
                    "h'' = p'/rho failed at rho={rho} for gamma={gamma}"
                );
                assert!(
                    (rho * h.dh(rho) - p.p(rho) - h.h(rho)).abs()
                        <= 1e-10 * (1.0 + p.p(rho).abs() + h.h(rho).abs()),
                    "rho h' = p + h failed at rho={rho} for gamma={gamma}"
                );
            }
        }
    }

    #[test]
    fn tabulated_energy_matches_quadrature_identities() {
        // p = rho^2 + rho, a non gamma-law but well-behaved pressure.
        let p = PressureLaw::tabulated(
            Arc::new(|r| r * r + r),
            Arc::new(|r| 2.0 * r + 1.0),
            Arc::new(|_| 2.0),
        );
        let h = InternalEnergy::from_pressure(&p);
        for rho in [0.2, 0.9, 1.0, 1.7, 4.0] {
            assert!((h.d2h(rho) - p.dp(rho) / rho).abs() < 1e-10);
            assert!(
                (rho * h.dh(rho) - p.p(rho) - h.h(rho)).abs() < 1e-8,
                "rho h' = p + h failed at rho={rho}"
            );
            // finite-difference check of h'
            let step = 1e-5;
            let fd = (h.h(rho + step) - h.h(rho - step)) / (2.0 * step);
            assert!((fd - h.dh(rho)).abs() < 1e-7);
        }
    }

    #[test]
    fn gamma_law_h_equals_p_over_gamma_minus_one() {
        let (p, h) = make_gamma_law(1.7, 2.3).unwrap();
        for rho in [0.3, 1.0, 5.0] {
            assert!((h.h(rho) - p.p(rho) / 1.3).abs() < 1e-12 * p.p(rho));
        }
    }

    #[test]
    fn hypothesis_a_gamma_laws() {
        let grid = log_spaced(0.1, 10.0, 128);
        let (p2, _) = make_gamma_law(1.0, 2.0).unwrap();
        let rep = check_hypothesis_a(&p2, &grid, 100.0);
        assert!(rep.holds);
        assert!((rep.constant - 1.0).abs() < 1e-12);

        let (p1, _) = make_gamma_law(1.0, 1.0).unwrap();
        let rep = check_hypothesis_a(&p1, &grid, 100.0);
        assert!(rep.holds);
        assert_eq!(rep.constant, 0.0);
    }

    #[test]
    fn hypothesis_a_exponential_pressure_fails() {
        let p = PressureLaw::tabulated(
            Arc::new(|r: f64| r.exp()),
            Arc::new(|r: f64| r.exp()),
            Arc::new(|r: f64| r.exp()),
        );
        let grid = log_spaced(1.0, 50.0, 64);
        let rep = check_hypothesis_a(&p, &grid, 10.0);
        assert!(!rep.holds);
        assert!(rep.witness.is_some());
        assert!(rep.witness.unwrap() > 10.0);
    }

    #[test]
    fn hypothesis_b_tail_ratio() {
        let tail = log_spaced(10.0, 1e6, 32);
        let (p, _) = make_gamma_law(2.0, 3.0).unwrap();
        let rep = check_hypothesis_b(&p, 3.0, 2.0, &tail, 1e-12);
        assert!(rep.holds);
        assert_eq!(rep.residual, 0.0);

        let (p2, _) = make_gamma_law(1.0, 2.0).unwrap();
        let rep = check_hypothesis_b(&p2, 3.0, 1.0, &tail, 1e-2);
        assert!(!rep.holds);

        let psum = PressureLaw::tabulated(
            Arc::new(|r| r * r + r),
            Arc::new(|r| 2.0 * r + 1.0),
            Arc::new(|_| 2.0),
        );
        let rep = check_hypothesis_b(&psum, 2.0, 1.0, &tail, 1e-3);
        assert!(rep.holds, "residual {}", rep.residual);
        // the residual shrinks along the tail
        let early = check_hypothesis_b(&psum, 2.0, 1.0, &tail[..4], 1.0);
        assert!(rep.residual < early.residual);
    }

    #[test]
    fn growth_h_stress_tails() {
        let tail = log_spaced(10.0, 1e4, 16);
        let cubic = StressLaw::linear_cubic(0.0, 1.0).unwrap();
        assert!(check_growth_h(&cubic, &tail, 1e-12).holds);

        let atan = StressLaw::custom(
            Arc::new(|u: f64| u + u.atan()),
            Arc::new(|u: f64| 1.0 + 1.0 / (1.0 + u * u)),
            1.0,
        );
        assert!(check_growth_h(&atan, &tail, 1e-3).holds);

        let mut wrong = StressLaw::linear_cubic(0.0, 1.0).unwrap();
        wrong.growth_exponent = 2.0;
        assert!(!check_growth_h(&wrong, &tail, 1e-3).holds);
    }

    #[test]
    fn stored_energy_matches_quadrature() {
        let s = StressLaw::linear_cubic(1.0, 1.0).unwrap();
        assert!((s.w(2.0) - (2.0 + 4.0)).abs() < 1e-12);
        let atan = StressLaw::custom(
            Arc::new(|u: f64| u + u.atan()),
            Arc::new(|u: f64| 1.0 + 1.0 / (1.0 + u * u)),
            1.0,
        );
        // W(u) = u^2/2 + u atan(u) - ln(1+u^2)/2
        let u = 1.5f64;
        let exact = 0.5 * u * u + u * u.atan() - 0.5 * (1.0 + u * u).ln();
        assert!((atan.w(u) - exact).abs() < 1e-10);
    }
}
