//! Mechanical energy for the p-system with damping.

use crate::constitutive::StressLaw;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PSystemState {
    pub u: f64,
    pub v: f64,
}

impl PSystemState {
    pub fn new(u: f64, v: f64) -> Self {
        PSystemState { u, v }
    }
}

/// E = v^2/2 + W(u).
pub fn energy(s: PSystemState, law: &StressLaw) -> f64 {
    0.5 * s.v * s.v + law.w(s.u)
}

/// F = -v tau(u).
pub fn energy_flux(s: PSystemState, law: &StressLaw) -> f64 {
    -s.v * law.tau(s.u)
}

/// Conserved flux (-v, -tau(u)) of the unscaled system.
pub fn flux(s: PSystemState, law: &StressLaw) -> (f64, f64) {
    (-s.v, -law.tau(s.u))
}

/// E(s | sb) = (v - vb)^2/2 + W(u | ub).
pub fn relative_energy(s: PSystemState, sb: PSystemState, law: &StressLaw) -> f64 {
    let dv = s.v - sb.v;
    0.5 * dv * dv + law.w_rel(s.u, sb.u)
}

/// Literal Taylor remainder of E about sb.
pub fn relative_energy_taylor(s: PSystemState, sb: PSystemState, law: &StressLaw) -> f64 {
    energy(s, law) - energy(sb, law) - law.tau(sb.u) * (s.u - sb.u) - sb.v * (s.v - sb.v)
}

/// F(s | sb) = -(v - vb)(tau(u) - tau(ub)).
pub fn relative_flux(s: PSystemState, sb: PSystemState, law: &StressLaw) -> f64 {
    -(s.v - sb.v) * (law.tau(s.u) - law.tau(sb.u))
}

/// Defining combination F(s) - F(sb) - grad E(sb) . (f(s) - f(sb)).
pub fn relative_flux_taylor(s: PSystemState, sb: PSystemState, law: &StressLaw) -> f64 {
    let (f1, f2) = flux(s, law);
    let (g1, g2) = flux(sb, law);
    energy_flux(s, law) - energy_flux(sb, law) - law.tau(sb.u) * (f1 - g1) - sb.v * (f2 - g2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> StressLaw {
        StressLaw::linear_cubic(0.0, 1.0).unwrap()
    }

    #[test]
    fn trivial_relative_values() {
        let law = cubic();
        let s = PSystemState::new(1.3, -0.4);
        assert_eq!(relative_energy(s, s, &law), 0.0);
        assert_eq!(relative_flux(s, s, &law), 0.0);
    }

    #[test]
    fn relative_energy_value() {
        let law = cubic();
        let v = relative_energy(PSystemState::new(2.0, 0.0), PSystemState::new(0.0, 0.0), &law);
        assert!((v - 4.0).abs() < 1e-14);
    }

    #[test]
    fn relative_flux_value() {
        let law = cubic();
        let v = relative_flux(PSystemState::new(0.0, 1.0), PSystemState::new(1.0, 0.0), &law);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_taylor_remainders() {
        let law = StressLaw::linear_cubic(1.0, 1.0).unwrap();
        for (s, sb) in [
            ((2.0, 0.0), (0.0, 0.0)),
            ((0.0, 1.0), (1.0, 0.0)),
            ((-1.5, 0.3), (0.7, -2.0)),
        ] {
            let s = PSystemState::new(s.0, s.1);
            let sb = PSystemState::new(sb.0, sb.1);
            let cf = relative_energy(s, sb, &law);
            let tr = relative_energy_taylor(s, sb, &law);
            assert!((cf - tr).abs() <= 1e-12 * (1.0 + cf.abs()));
            let cf = relative_flux(s, sb, &law);
            let tr = relative_flux_taylor(s, sb, &law);
            assert!((cf - tr).abs() <= 1e-12 * (1.0 + cf.abs()));
        }
    }

    #[test]
    fn energy_is_nonnegative_relative_to_any_bar() {
        let law = StressLaw::linear_cubic(1.0, 1.0).unwrap();
        for ub in [-2.0, 0.0, 1.5] {
            for u in [-3.0, -0.5, 0.0, 2.5] {
                assert!(relative_energy(
                    PSystemState::new(u, 0.3),
                    PSystemState::new(ub, 0.0),
                    &law
                ) >= 0.0);
            }
        }
    }
}
