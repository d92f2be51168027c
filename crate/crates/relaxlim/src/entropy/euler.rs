//! Mechanical-energy entropy machinery for isentropic Euler with friction.

use crate::constitutive::{InternalEnergy, PressureLaw};
use crate::entropy::BAR_FLOOR;
use crate::error::{RelaxError, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub m: f64,
}

impl EulerState {
    pub fn new(rho: f64, m: f64) -> Self {
        EulerState { rho, m }
    }

    pub fn velocity(&self) -> f64 {
        self.m / self.rho
    }
}

fn require_bar(rho_bar: f64) -> Result<()> {
    if rho_bar < BAR_FLOOR {
        return Err(RelaxError::Vacuum(format!(
            "bar density {rho_bar} below floor {BAR_FLOOR}"
        )));
    }
    Ok(())
}

/// eta = m^2/(2 rho) + h(rho); extends to vacuum only at rest.
pub fn entropy(s: EulerState, h: &InternalEnergy) -> Result<f64> {
    if s.rho == 0.0 {
        if s.m != 0.0 {
            return Err(RelaxError::Vacuum(format!(
                "vacuum with nonzero momentum m = {}",
                s.m
            )));
        }
        return Ok(h.h(0.0));
    }
    Ok(0.5 * s.m * s.m / s.rho + h.h(s.rho))
}

/// q = m^3/(2 rho^2) + m h'(rho).
pub fn entropy_flux(s: EulerState, h: &InternalEnergy) -> Result<f64> {
    if s.rho <= 0.0 {
        return Err(RelaxError::Vacuum(format!(
            "entropy flux needs rho > 0, got {}",
            s.rho
        )));
    }
    Ok(0.5 * s.m.powi(3) / (s.rho * s.rho) + s.m * h.dh(s.rho))
}

/// Gradient of eta in the conserved variables (rho, m).
pub fn entropy_gradient(s: EulerState, h: &InternalEnergy) -> (f64, f64) {
    let u = s.velocity();
    (-0.5 * u * u + h.dh(s.rho), u)
}

/// Conserved flux (m, m^2/rho + p(rho)) of the unscaled system.
pub fn flux(s: EulerState, p: &PressureLaw) -> (f64, f64) {
    (s.m, s.m * s.m / s.rho + p.p(s.rho))
}

/// Closed form: rho (u - u_bar)^2 / 2 + h(rho | rho_bar).
pub fn relative_entropy(s: EulerState, sb: EulerState, h: &InternalEnergy) -> Result<f64> {
    require_bar(sb.rho)?;
    let kinetic = if s.rho == 0.0 {
        if s.m != 0.0 {
            return Err(RelaxError::Vacuum(
                "vacuum with nonzero momentum in relative entropy".into(),
            ));
        }
        0.0
    } else {
        0.5 * s.rho * (s.velocity() - sb.velocity()).powi(2)
    };
    Ok(kinetic + h.h_rel(s.rho, sb.rho))
}

/// Literal Taylor remainder eta(s) - eta(sb) - grad eta(sb) . (s - sb).
pub fn relative_entropy_taylor(s: EulerState, sb: EulerState, h: &InternalEnergy) -> Result<f64> {
    require_bar(sb.rho)?;
    let (gr, gm) = entropy_gradient(sb, h);
    Ok(entropy(s, h)? - entropy(sb, h)? - gr * (s.rho - sb.rho) - gm * (s.m - sb.m))
}

/// Closed form of Eq.-level relative entropy flux:
/// m (u - ub)^2 / 2 + rho (h'(rho) - h'(rhob)) (u - ub) + ub h(rho|rhob).
pub fn relative_flux(s: EulerState, sb: EulerState, h: &InternalEnergy) -> Result<f64> {
    require_bar(sb.rho)?;
    if s.rho <= 0.0 {
        return Err(RelaxError::Vacuum("relative flux needs rho > 0".into()));
    }
    let du = s.velocity() - sb.velocity();
    Ok(0.5 * s.m * du * du
        + s.rho * (h.dh(s.rho) - h.dh(sb.rho)) * du
        + sb.velocity() * h.h_rel(s.rho, sb.rho))
}

/// Defining combination q(s) - q(sb) - grad eta(sb) . (f(s) - f(sb)).
pub fn relative_flux_taylor(
    s: EulerState,
    sb: EulerState,
    h: &InternalEnergy,
    p: &PressureLaw,
) -> Result<f64> {
    require_bar(sb.rho)?;
    let (gr, gm) = entropy_gradient(sb, h);
    let (f1, f2) = flux(s, p);
    let (g1, g2) = flux(sb, p);
    Ok(entropy_flux(s, h)? - entropy_flux(sb, h)? - gr * (f1 - g1) - gm * (f2 - g2))
}

/// 1-D relative momentum-flux: rho (u - ub)^2 + p(rho | rhob).
pub fn relative_flux_tensor(s: EulerState, sb: EulerState, p: &PressureLaw) -> Result<f64> {
    require_bar(sb.rho)?;
    if s.rho <= 0.0 {
        return Err(RelaxError::Vacuum("relative flux tensor needs rho > 0".into()));
    }
    let du = s.velocity() - sb.velocity();
    Ok(s.rho * du * du + p.p_rel(s.rho, sb.rho))
}

/// Taylor remainder of the momentum flux f2 = m^2/rho + p(rho).
pub fn relative_flux_tensor_taylor(s: EulerState, sb: EulerState, p: &PressureLaw) -> Result<f64> {
    require_bar(sb.rho)?;
    let f2 = |st: EulerState| st.m * st.m / st.rho + p.p(st.rho);
    let ub = sb.velocity();
    let grad = (-ub * ub + p.dp(sb.rho), 2.0 * ub);
    Ok(f2(s) - f2(sb) - grad.0 * (s.rho - sb.rho) - grad.1 * (s.m - sb.m))
}

/// Relaxation dissipation density R = rho (u - ub)^2.
pub fn big_r(s: EulerState, sb: EulerState) -> Result<f64> {
    require_bar(sb.rho)?;
    if s.rho == 0.0 {
        return Ok(0.0);
    }
    Ok(s.rho * (s.velocity() - sb.velocity()).powi(2))
}

/// Q = -d^2_x h'(rho_bar) . f(s | sb), the quadratic bar-coefficient term.
pub fn big_q(s: EulerState, sb: EulerState, d2x_dh_bar: f64, p: &PressureLaw) -> Result<f64> {
    Ok(-d2x_dh_bar * relative_flux_tensor(s, sb, p)?)
}

/// E = e_bar (rho / rho_bar) (u - ub), the O(eps) error coupling.
pub fn big_e(s: EulerState, sb: EulerState, e_bar: f64) -> Result<f64> {
    require_bar(sb.rho)?;
    if s.rho == 0.0 {
        return Ok(0.0);
    }
    Ok(e_bar * (s.rho / sb.rho) * (s.velocity() - sb.velocity()))
}

/// Discrete error term e_bar = eps [Dx((Dx p)^2 / rho_bar) - Dx(p'(rho_bar) Lap p(rho_bar))].
pub fn error_term(grid: &Grid, rho_bar: &[f64], p: &PressureLaw, eps: f64) -> Result<Vec<f64>> {
    if let Some(i) = rho_bar.iter().position(|&r| r < BAR_FLOOR) {
        return Err(RelaxError::Vacuum(format!(
            "bar density {} below floor at cell {i}",
            rho_bar[i]
        )));
    }
    let (rl, rr) = grid.ghosts(rho_bar, 0);
    let pv: Vec<f64> = rho_bar.iter().map(|&r| p.p(r)).collect();
    let px = grid.dx_ext(&pv, p.p(rl), p.p(rr));
    // composed centered difference, matching the limit solver's Laplacian
    let pxx = grid.dx_ext(&px, 0.0, 0.0);
    let conv: Vec<f64> = px
        .iter()
        .zip(rho_bar)
        .map(|(&g, &r)| g * g / r)
        .collect();
    let grad_term: Vec<f64> = rho_bar
        .iter()
        .zip(&pxx)
        .map(|(&r, &l)| p.dp(r) * l)
        .collect();
    let d_conv = grid.dx_ext(&conv, 0.0, 0.0);
    let d_grad = grid.dx_ext(&grad_term, 0.0, 0.0);
    Ok(d_conv
        .iter()
        .zip(&d_grad)
        .map(|(&a, &b)| eps * (a - b))
        .collect())
}

/// Explicit 4x4 Hessian of R(rho, m) = |m|^2 / rho in 3-D, rows (rho, m1, m2, m3).
pub fn hessian_r_3d(rho: f64, m: [f64; 3]) -> [[f64; 4]; 4] {
    assert!(rho > 0.0);
    let m2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
    let mut hess = [[0.0; 4]; 4];
    hess[0][0] = 2.0 * m2 / rho.powi(3);
    for i in 0..3 {
        hess[0][i + 1] = -2.0 * m[i] / (rho * rho);
        hess[i + 1][0] = hess[0][i + 1];
        hess[i + 1][i + 1] = 2.0 / rho;
    }
    hess
}

/// Closed-form eigenvalues {0, 2/rho, 2/rho, 2/rho + 2|m|^2/rho^3}, ascending.
pub fn hessian_r_eigenvalues(rho: f64, m: [f64; 3]) -> [f64; 4] {
    assert!(rho > 0.0);
    let m2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
    let mut ev = [0.0, 2.0 / rho, 2.0 / rho, 2.0 / rho + 2.0 * m2 / rho.powi(3)];
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Entropy pair shifted by a trivial linear pair so it vanishes at two
/// far-field rest states (rho_minus, 0) and (rho_plus, 0).
#[derive(Debug, Clone)]
pub struct ModifiedPair {
    pub a: f64,
    pub offset: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
}

impl ModifiedPair {
    pub fn new(rho_minus: f64, rho_plus: f64, h: &InternalEnergy) -> Result<Self> {
        if rho_minus <= 0.0 || rho_plus <= 0.0 {
            return Err(RelaxError::InvalidConstitutive(format!(
                "far-field densities must be positive, got ({rho_minus}, {rho_plus})"
            )));
        }
        let a = if rho_minus == rho_plus {
            h.dh(rho_plus)
        } else {
            (h.h(rho_plus) - h.h(rho_minus)) / (rho_plus - rho_minus)
        };
        Ok(ModifiedPair {
            a,
            offset: 0.5 * (h.h(rho_plus) + h.h(rho_minus)),
            rho_minus,
            rho_plus,
        })
    }

    pub fn eta_tilde(&self, s: EulerState, h: &InternalEnergy) -> Result<f64> {
        let mid = 0.5 * (self.rho_plus + self.rho_minus);
        Ok(entropy(s, h)? - self.a * (s.rho - mid) - self.offset)
    }

    pub fn q_tilde(&self, s: EulerState, h: &InternalEnergy) -> Result<f64> {
        Ok(entropy_flux(s, h)? - self.a * s.m)
    }

    /// Relative form built from eta_tilde; the affine shift cancels, so this
    /// must coincide with the plain relative entropy.
    pub fn relative(&self, s: EulerState, sb: EulerState, h: &InternalEnergy) -> Result<f64> {
        require_bar(sb.rho)?;
        let grad_m = sb.velocity();
        let grad_rho = -0.5 * grad_m * grad_m + h.dh(sb.rho) - self.a;
        Ok(self.eta_tilde(s, h)?
            - self.eta_tilde(sb, h)?
            - grad_rho * (s.rho - sb.rho)
            - grad_m * (s.m - sb.m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::make_gamma_law;
    use std::f64::consts::PI;

    fn law12() -> (PressureLaw, InternalEnergy) {
        make_gamma_law(1.0, 2.0).unwrap()
    }

    #[test]
    fn entropy_values() {
        let (_, h) = law12();
        assert_eq!(entropy(EulerState::new(1.0, 0.0), &h).unwrap(), 1.0);
        assert_eq!(entropy(EulerState::new(1.0, 1.0), &h).unwrap(), 1.5);
        assert!(entropy(EulerState::new(0.0, 1.0), &h).is_err());
        assert_eq!(entropy(EulerState::new(0.0, 0.0), &h).unwrap(), 0.0);
    }

    #[test]
    fn relative_entropy_values() {
        let (_, h) = law12();
        let re = |a: (f64, f64), b: (f64, f64)| {
            relative_entropy(EulerState::new(a.0, a.1), EulerState::new(b.0, b.1), &h).unwrap()
        };
        assert!((re((2.0, 0.0), (1.0, 0.0)) - 1.0).abs() < 1e-14);
        assert!((re((1.0, 1.0), (1.0, 0.0)) - 0.5).abs() < 1e-14);
        assert_eq!(re((1.3, 0.7), (1.3, 0.7)), 0.0);
        assert!(relative_entropy(
            EulerState::new(1.0, 0.0),
            EulerState::new(0.0, 0.0),
            &h
        )
        .is_err());
    }

    #[test]
    fn closed_form_matches_taylor_remainder() {
        let (p, h) = law12();
        for (s, sb) in [
            ((2.0, 0.0), (1.0, 0.0)),
            ((1.0, 1.0), (1.0, 0.0)),
            ((2.0, 0.0), (1.0, 1.0)),
            ((0.3, -0.2), (4.0, 2.0)),
        ] {
            let s = EulerState::new(s.0, s.1);
            let sb = EulerState::new(sb.0, sb.1);
            let cf = relative_entropy(s, sb, &h).unwrap();
            let tr = relative_entropy_taylor(s, sb, &h).unwrap();
            assert!((cf - tr).abs() <= 1e-12 * (1.0 + cf.abs()));

            let cf = relative_flux(s, sb, &h).unwrap();
            let tr = relative_flux_taylor(s, sb, &h, &p).unwrap();
            assert!((cf - tr).abs() <= 1e-12 * (1.0 + cf.abs()));

            let cf = relative_flux_tensor(s, sb, &p).unwrap();
            let tr = relative_flux_tensor_taylor(s, sb, &p).unwrap();
            assert!((cf - tr).abs() <= 1e-12 * (1.0 + cf.abs()));
        }
    }

    #[test]
    fn relative_flux_values() {
        let (_, h) = law12();
        let s = EulerState::new(1.0, 1.0);
        let sb = EulerState::new(1.0, 0.0);
        assert!((relative_flux(s, sb, &h).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(relative_flux(sb, sb, &h).unwrap(), 0.0);
    }

    #[test]
    fn relative_flux_tensor_values() {
        let (p, _) = law12();
        let v = relative_flux_tensor(EulerState::new(2.0, 0.0), EulerState::new(1.0, 0.0), &p)
            .unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        let v = relative_flux_tensor(EulerState::new(4.0, 2.0), EulerState::new(1.0, 1.0), &p)
            .unwrap();
        assert!((v - 10.0).abs() < 1e-14);
    }

    #[test]
    fn r_q_e_values() {
        let (p, _) = law12();
        let s = EulerState::new(4.0, 2.0);
        let sb = EulerState::new(1.0, 1.0);
        assert!((big_r(s, sb).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(big_q(s, sb, 0.0, &p).unwrap(), 0.0);
        assert_eq!(big_e(s, sb, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn hessian_eigenvalues_closed_form() {
        let ev = hessian_r_eigenvalues(1.0, [0.0; 3]);
        assert_eq!(ev, [0.0, 2.0, 2.0, 2.0]);
        let ev = hessian_r_eigenvalues(1.0, [1.0, 0.0, 0.0]);
        assert_eq!(ev, [0.0, 2.0, 2.0, 4.0]);
    }

    #[test]
    fn error_term_constant_and_linear_in_eps() {
        let (p, _) = law12();
        let g = Grid::periodic(64, 0.0, 2.0 * PI).unwrap();
        let flat = vec![2.0; 64];
        let e = error_term(&g, &flat, &p, 0.1).unwrap();
        assert!(e.iter().all(|&v| v == 0.0));

        let prof: Vec<f64> = g.centers().iter().map(|x| 2.0 + 0.5 * x.sin()).collect();
        let e1 = error_term(&g, &prof, &p, 0.1).unwrap();
        let e2 = error_term(&g, &prof, &p, 0.2).unwrap();
        for (a, b) in e1.iter().zip(&e2) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn error_term_matches_symbolic_oracle() {
        // rho = 2 + sin(x)/2, p = rho^2:
        //   (p_x)^2/rho = 4 rho cos^2 x,  p'(rho) Lap p = 2 rho (2 rho cos x)_x
        // e/eps = d/dx[4 rho cos^2 x] - d/dx[2 rho (2 cos x (rho_x) ... )]
        // evaluated below by direct symbolic differentiation.
        let (p, _) = law12();
        let oracle = |x: f64| {
            let r = 2.0 + 0.5 * x.sin();
            let rx = 0.5 * x.cos();
            let rxx = -0.5 * x.sin();
            let px = 2.0 * r * rx;
            let pxx = 2.0 * (rx * rx + r * rxx);
            let pxxx = 2.0 * (3.0 * rx * rxx + r * (-0.5 * x.cos()));
            // d/dx (px^2 / r) - d/dx (2 r * pxx)
            (2.0 * px * pxx * r - px * px * rx) / (r * r) - 2.0 * (rx * pxx + r * pxxx)
        };
        let mut errs = Vec::new();
        for n in [128, 256] {
            let g = Grid::periodic(n, 0.0, 2.0 * PI).unwrap();
            let prof: Vec<f64> = g.centers().iter().map(|x| 2.0 + 0.5 * x.sin()).collect();
            let e = error_term(&g, &prof, &p, 0.1).unwrap();
            let err = g
                .centers()
                .iter()
                .zip(&e)
                .map(|(&x, &v)| (v - 0.1 * oracle(x)).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.8, "observed order {order}, errors {errs:?}");
    }

    #[test]
    fn modified_pair_vanishes_at_far_field_states() {
        let (_, h) = law12();
        let mp = ModifiedPair::new(1.0, 3.0, &h).unwrap();
        let z = |r| mp.eta_tilde(EulerState::new(r, 0.0), &h).unwrap();
        assert!(z(1.0).abs() < 1e-14);
        assert!(z(3.0).abs() < 1e-14);

        // the relative form is pair independent
        let s = EulerState::new(2.2, 0.4);
        let sb = EulerState::new(1.7, -0.3);
        let plain = relative_entropy(s, sb, &h).unwrap();
        let tilde = mp.relative(s, sb, &h).unwrap();
        assert!((plain - tilde).abs() < 1e-12);
    }
}
