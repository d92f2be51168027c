//! Mechanical energy for viscoelasticity with memory.

use crate::constitutive::StressLaw;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscoState {
    pub u: f64,
    pub v: f64,
    pub z: f64,
}

impl ViscoState {
    pub fn new(u: f64, v: f64, z: f64) -> Self {
        ViscoState { u, v, z }
    }
}

/// E = Sigma(u) + v^2/2 + z^2/(2 mu).
pub fn energy(s: ViscoState, sigma: &StressLaw, mu: f64) -> f64 {
    assert!(mu > 0.0);
    sigma.w(s.u) + 0.5 * s.v * s.v + s.z * s.z / (2.0 * mu)
}

/// F_eps = -(eps sigma(u) v + v z).
pub fn energy_flux(s: ViscoState, sigma: &StressLaw, eps: f64) -> f64 {
    -(eps * sigma.tau(s.u) * s.v + s.v * s.z)
}

/// Scaled conserved flux (-eps v, -eps sigma(u) - z, -mu v); the solver applies 1/eps.
pub fn flux(s: ViscoState, sigma: &StressLaw, mu: f64, eps: f64) -> (f64, f64, f64) {
    (-eps * s.v, -eps * sigma.tau(s.u) - s.z, -mu * s.v)
}

/// E(s | sb) = Sigma(u | ub) + (v - vb)^2/2 + (z - zb)^2/(2 mu).
pub fn relative_energy(s: ViscoState, sb: ViscoState, sigma: &StressLaw, mu: f64) -> f64 {
    let dv = s.v - sb.v;
    let dz = s.z - sb.z;
    sigma.w_rel(s.u, sb.u) + 0.5 * dv * dv + dz * dz / (2.0 * mu)
}

/// Literal Taylor remainder of E about sb.
pub fn relative_energy_taylor(s: ViscoState, sb: ViscoState, sigma: &StressLaw, mu: f64) -> f64 {
    energy(s, sigma, mu)
        - energy(sb, sigma, mu)
        - sigma.tau(sb.u) * (s.u - sb.u)
        - sb.v * (s.v - sb.v)
        - sb.z / mu * (s.z - sb.z)
}

/// F_eps(s | sb) = -eps (sigma(u) - sigma(ub))(v - vb) - (v - vb)(z - zb).
pub fn relative_flux(s: ViscoState, sb: ViscoState, sigma: &StressLaw, eps: f64) -> f64 {
    let dv = s.v - sb.v;
    -eps * (sigma.tau(s.u) - sigma.tau(sb.u)) * dv - dv * (s.z - sb.z)
}

/// Defining combination F(s) - F(sb) - grad E(sb) . (flux(s) - flux(sb)).
pub fn relative_flux_taylor(
    s: ViscoState,
    sb: ViscoState,
    sigma: &StressLaw,
    mu: f64,
    eps: f64,
) -> f64 {
    let (f1, f2, f3) = flux(s, sigma, mu, eps);
    let (g1, g2, g3) = flux(sb, sigma, mu, eps);
    energy_flux(s, sigma, eps)
        - energy_flux(sb, sigma, eps)
        - sigma.tau(sb.u) * (f1 - g1)
        - sb.v * (f2 - g2)
        - sb.z / mu * (f3 - g3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> StressLaw {
        StressLaw::linear_cubic(1.0, 0.0).unwrap()
    }

    #[test]
    fn energy_value() {
        let e = energy(ViscoState::new(0.0, 1.0, 2.0), &linear(), 2.0);
        assert!((e - 1.5).abs() < 1e-14);
    }

    #[test]
    fn energy_flux_value() {
        let f = energy_flux(ViscoState::new(1.0, 1.0, 0.0), &linear(), 1.0);
        assert!((f + 1.0).abs() < 1e-14);
    }

    #[test]
    fn trivial_relative_values() {
        let law = StressLaw::linear_cubic(1.0, 1.0).unwrap();
        let s = ViscoState::new(0.4, -1.1, 0.2);
        assert_eq!(relative_energy(s, s, &law, 1.0), 0.0);
        assert_eq!(relative_flux(s, s, &law, 0.1), 0.0);
    }

    #[test]
    fn closed_forms_match_taylor_remainders() {
        let law = StressLaw::linear_cubic(1.0, 1.0).unwrap();
        let mu = 1.7;
        let eps = 0.25;
        for (s, sb) in [
            ((1.0, 0.5, -0.2), (0.0, 0.0, 0.0)),
            ((-0.6, 1.2, 0.9), (0.8, -0.3, 0.1)),
            ((2.0, 0.0, 1.0), (2.0, 1.0, -1.0)),
        ] {
            let s = ViscoState::new(s.0, s.1, s.2);
            let sb = ViscoState::new(sb.0, sb.1, sb.2);
            let cf = relative_energy(s, sb, &law, mu);
            let tr = relative_energy_taylor(s, sb, &law, mu);
            assert!((cf - tr).abs() <= 1e-12 * (1.0 + cf.abs()));
            let cf = relative_flux(s, sb, &law, eps);
            let tr = relative_flux_taylor(s, sb, &law, mu, eps);
            assert!((cf - tr).abs() <= 1e-12 * (1.0 + cf.abs()));
        }
    }

    #[test]
    fn relative_energy_nonnegative() {
        let law = StressLaw::linear_cubic(0.5, 2.0).unwrap();
        for mu in [0.5, 1.0, 3.0] {
            let e = relative_energy(
                ViscoState::new(1.2, -0.8, 0.5),
                ViscoState::new(-0.4, 0.6, -1.0),
                &law,
                mu,
            );
            assert!(e >= 0.0);
        }
    }
}
