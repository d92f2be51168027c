//! Descriptors for the three relaxation systems and their parabolic limits:
//! flux and stiff source, wave speeds, entropy hooks, bar-state reconstruction
//! and the bar error sources.
//!
//! Flux convention: the solver advances U_t + (1/eps) Fhat(U)_x = -(1/eps^2) s(U),
//! where Fhat carries any explicit eps factors of the mixed-scaling systems.

use crate::constitutive::{InternalEnergy, PressureLaw, StressLaw};
use crate::entropy::{euler, psystem, visco, BAR_FLOOR};
use crate::error::{RelaxError, Result};
use crate::grid::{Boundary, GridField};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemName {
    EulerFriction,
    PSystemDamping,
    ViscoMemory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitName {
    PorousMedia,
    TauDiffusion,
    RateTypeVisco,
}

#[derive(Debug, Clone)]
pub enum RelaxationSystem {
    EulerFriction {
        p: PressureLaw,
        h: InternalEnergy,
    },
    PSystemDamping {
        tau: StressLaw,
    },
    ViscoMemory {
        sigma: StressLaw,
        mu: f64,
    },
}

impl RelaxationSystem {
    pub fn euler(p: PressureLaw) -> Self {
        let h = InternalEnergy::from_pressure(&p);
        RelaxationSystem::EulerFriction { p, h }
    }

    pub fn psystem(tau: StressLaw) -> Self {
        RelaxationSystem::PSystemDamping { tau }
    }

    pub fn visco(sigma: StressLaw, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(RelaxError::InvalidConstitutive(format!(
                "viscoelasticity needs mu > 0, got {mu}"
            )));
        }
        Ok(RelaxationSystem::ViscoMemory { sigma, mu })
    }

    pub fn name(&self) -> SystemName {
        match self {
            RelaxationSystem::EulerFriction { .. } => SystemName::EulerFriction,
            RelaxationSystem::PSystemDamping { .. } => SystemName::PSystemDamping,
            RelaxationSystem::ViscoMemory { .. } => SystemName::ViscoMemory,
        }
    }

    pub fn limit_name(&self) -> LimitName {
        match self {
            RelaxationSystem::EulerFriction { .. } => LimitName::PorousMedia,
            RelaxationSystem::PSystemDamping { .. } => LimitName::TauDiffusion,
            RelaxationSystem::ViscoMemory { .. } => LimitName::RateTypeVisco,
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            RelaxationSystem::ViscoMemory { .. } => 3,
            _ => 2,
        }
    }

    /// Number of components carried by the limit equation.
    pub fn limit_dim(&self) -> usize {
        match self {
            RelaxationSystem::ViscoMemory { .. } => 2,
            _ => 1,
        }
    }

    /// Index of the component damped by the stiff source.
    pub fn damped_index(&self) -> usize {
        match self {
            RelaxationSystem::ViscoMemory { .. } => 2,
            _ => 1,
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            RelaxationSystem::ViscoMemory { mu, .. } => *mu,
            _ => 1.0,
        }
    }

    /// Scaled convective flux Fhat(U, eps); the 1/eps is applied by the solver.
    pub fn flux(&self, s: &[f64], eps: f64, out: &mut [f64]) {
        match self {
            RelaxationSystem::EulerFriction { p, .. } => {
                let (rho, m) = (s[0], s[1]);
                out[0] = m;
                out[1] = m * m / rho + p.p(rho);
            }
            RelaxationSystem::PSystemDamping { tau } => {
                out[0] = -s[1];
                out[1] = -tau.tau(s[0]);
            }
            RelaxationSystem::ViscoMemory { sigma, mu } => {
                out[0] = -eps * s[1];
                out[1] = -eps * sigma.tau(s[0]) - s[2];
                out[2] = -mu * s[1];
            }
        }
    }

    /// s(U) such that the source term is -(1/eps^2) s(U).
    pub fn stiff_source(&self, s: &[f64], out: &mut [f64]) {
        out[..self.state_dim()].fill(0.0);
        out[self.damped_index()] = s[self.damped_index()];
    }

    /// Largest characteristic speed of the scaled flux at a state.
    pub fn max_speed(&self, s: &[f64], eps: f64) -> f64 {
        match self {
            RelaxationSystem::EulerFriction { p, .. } => {
                let u = s[1] / s[0];
                u.abs() + p.dp(s[0]).max(0.0).sqrt()
            }
            RelaxationSystem::PSystemDamping { tau } => tau.dtau(s[0]).max(0.0).sqrt(),
            RelaxationSystem::ViscoMemory { sigma, mu } => {
                (eps * eps * sigma.dtau(s[0]).max(0.0) + mu).sqrt()
            }
        }
    }

    /// Entropy density eta(U) (mechanical energy).
    pub fn entropy(&self, s: &[f64]) -> Result<f64> {
        match self {
            RelaxationSystem::EulerFriction { h, .. } => {
                euler::entropy(euler::EulerState::new(s[0], s[1]), h)
            }
            RelaxationSystem::PSystemDamping { tau } => {
                Ok(psystem::energy(psystem::PSystemState::new(s[0], s[1]), tau))
            }
            RelaxationSystem::ViscoMemory { sigma, mu } => Ok(visco::energy(
                visco::ViscoState::new(s[0], s[1], s[2]),
                sigma,
                *mu,
            )),
        }
    }

    /// Entropy flux paired with the scaled convective flux (applied with 1/eps).
    pub fn entropy_flux(&self, s: &[f64], eps: f64) -> Result<f64> {
        match self {
            RelaxationSystem::EulerFriction { h, .. } => {
                euler::entropy_flux(euler::EulerState::new(s[0], s[1]), h)
            }
            RelaxationSystem::PSystemDamping { tau } => Ok(psystem::energy_flux(
                psystem::PSystemState::new(s[0], s[1]),
                tau,
            )),
            RelaxationSystem::ViscoMemory { sigma, .. } => Ok(visco::energy_flux(
                visco::ViscoState::new(s[0], s[1], s[2]),
                sigma,
                eps,
            )),
        }
    }

    /// Entropy dissipation density: the source term contributes
    /// -(1/eps^2) times this in the entropy inequality.
    pub fn dissipation(&self, s: &[f64]) -> f64 {
        match self {
            RelaxationSystem::EulerFriction { .. } => s[1] * s[1] / s[0],
            RelaxationSystem::PSystemDamping { .. } => s[1] * s[1],
            RelaxationSystem::ViscoMemory { mu, .. } => s[2] * s[2] / mu,
        }
    }

    /// Relative entropy between a state and a bar state.
    pub fn relative_entropy(&self, s: &[f64], sb: &[f64], eps: f64) -> Result<f64> {
        let _ = eps;
        match self {
            RelaxationSystem::EulerFriction { h, .. } => euler::relative_entropy(
                euler::EulerState::new(s[0], s[1]),
                euler::EulerState::new(sb[0], sb[1]),
                h,
            ),
            RelaxationSystem::PSystemDamping { tau } => Ok(psystem::relative_energy(
                psystem::PSystemState::new(s[0], s[1]),
                psystem::PSystemState::new(sb[0], sb[1]),
                tau,
            )),
            RelaxationSystem::ViscoMemory { sigma, mu } => Ok(visco::relative_energy(
                visco::ViscoState::new(s[0], s[1], s[2]),
                visco::ViscoState::new(sb[0], sb[1], sb[2]),
                sigma,
                *mu,
            )),
        }
    }

    /// Relative dissipation (the R-term): quadratic distance in the damped
    /// component, weighted as in the entropy inequality.
    pub fn relative_dissipation(&self, s: &[f64], sb: &[f64]) -> Result<f64> {
        match self {
            RelaxationSystem::EulerFriction { .. } => euler::big_r(
                euler::EulerState::new(s[0], s[1]),
                euler::EulerState::new(sb[0], sb[1]),
            ),
            RelaxationSystem::PSystemDamping { .. } => {
                let d = s[1] - sb[1];
                Ok(d * d)
            }
            RelaxationSystem::ViscoMemory { mu, .. } => {
                let d = s[2] - sb[2];
                Ok(d * d / mu)
            }
        }
    }
}

/// Far-field boundary for the bar state: the reconstructed non-equilibrium
/// components vanish where the profile is constant.
fn bar_boundary(boundary: &Boundary, dim: usize) -> Boundary {
    match boundary {
        Boundary::Periodic => Boundary::Periodic,
        Boundary::FarField { left, right } => {
            let mut l = vec![0.0; dim];
            let mut r = vec![0.0; dim];
            l[..left.len()].copy_from_slice(left);
            r[..right.len()].copy_from_slice(right);
            Boundary::FarField { left: l, right: r }
        }
    }
}

/// Lifts a limit-equation profile to the relaxation state space via the
/// discrete closure laws m = -eps Dx p, v = eps Dx tau, z = eps mu Dx v.
pub fn reconstruct_bar(sys: &RelaxationSystem, profile: &GridField, eps: f64) -> Result<GridField> {
    let grid = &profile.grid;
    let mut out_grid = grid.clone();
    out_grid.boundary = bar_boundary(&grid.boundary, sys.state_dim());
    match sys {
        RelaxationSystem::EulerFriction { p, .. } => {
            let rho = &profile.components[0];
            if let Some(i) = rho.iter().position(|&r| r < BAR_FLOOR) {
                return Err(RelaxError::Vacuum(format!(
                    "bar density {} below floor at cell {i}",
                    rho[i]
                )));
            }
            let (gl, gr) = grid.ghosts(rho, 0);
            let pv: Vec<f64> = rho.iter().map(|&r| p.p(r)).collect();
            let m: Vec<f64> = grid
                .dx_ext(&pv, p.p(gl), p.p(gr))
                .into_iter()
                .map(|g| -eps * g)
                .collect();
            Ok(GridField {
                grid: out_grid,
                components: vec![rho.clone(), m],
                t: profile.t,
            })
        }
        RelaxationSystem::PSystemDamping { tau } => {
            let u = &profile.components[0];
            let (gl, gr) = grid.ghosts(u, 0);
            let tv: Vec<f64> = u.iter().map(|&x| tau.tau(x)).collect();
            let v: Vec<f64> = grid
                .dx_ext(&tv, tau.tau(gl), tau.tau(gr))
                .into_iter()
                .map(|g| eps * g)
                .collect();
            Ok(GridField {
                grid: out_grid,
                components: vec![u.clone(), v],
                t: profile.t,
            })
        }
        RelaxationSystem::ViscoMemory { mu, .. } => {
            let u = &profile.components[0];
            let v = &profile.components[1];
            let z: Vec<f64> = grid
                .dx_op(v, 1)
                .into_iter()
                .map(|g| eps * mu * g)
                .collect();
            Ok(GridField {
                grid: out_grid,
                components: vec![u.clone(), v.clone(), z],
                t: profile.t,
            })
        }
    }
}

/// Bar error source: the exact residual left when the reconstructed bar state
/// is inserted into the relaxation system. Time derivatives are eliminated via
/// the limit PDE, so only spatial difference operators appear. The result acts
/// on the damped component's equation and is O(eps).
pub fn bar_error_source(sys: &RelaxationSystem, profile: &GridField, eps: f64) -> Result<Vec<f64>> {
    let grid = &profile.grid;
    match sys {
        RelaxationSystem::EulerFriction { p, .. } => {
            euler::error_term(grid, &profile.components[0], p, eps)
        }
        RelaxationSystem::PSystemDamping { tau } => {
            // v_t = eps Dx(tau'(u) u_t) with u_t = Dx Dx tau(u)
            let u = &profile.components[0];
            let (gl, gr) = grid.ghosts(u, 0);
            let tv: Vec<f64> = u.iter().map(|&x| tau.tau(x)).collect();
            let tx = grid.dx_ext(&tv, tau.tau(gl), tau.tau(gr));
            let txx = grid.dx_ext(&tx, 0.0, 0.0);
            let inner: Vec<f64> = u
                .iter()
                .zip(&txx)
                .map(|(&x, &l)| tau.dtau(x) * l)
                .collect();
            Ok(grid
                .dx_ext(&inner, 0.0, 0.0)
                .into_iter()
                .map(|g| eps * g)
                .collect())
        }
        RelaxationSystem::ViscoMemory { mu, .. } => {
            // z_t = eps mu Dx(v_t) with v_t = Dx sigma(u) + mu Dx Dx v
            let vt = visco_limit_vt(sys, profile)?;
            Ok(grid
                .dx_ext(&vt, 0.0, 0.0)
                .into_iter()
                .map(|g| eps * mu * g)
                .collect())
        }
    }
}

/// Spatial bar-state coefficient entering the quadratic Q-term of the
/// relative-entropy inequality: DxDx h'(rho_bar), DxDx tau(u_bar) or Dx v_bar.
pub fn q_coefficient(sys: &RelaxationSystem, profile: &GridField) -> Result<Vec<f64>> {
    let grid = &profile.grid;
    match sys {
        RelaxationSystem::EulerFriction { h, .. } => {
            let rho = &profile.components[0];
            if let Some(i) = rho.iter().position(|&r| r < BAR_FLOOR) {
                return Err(RelaxError::Vacuum(format!(
                    "bar density {} below floor at cell {i}",
                    rho[i]
                )));
            }
            let (gl, gr) = grid.ghosts(rho, 0);
            let hv: Vec<f64> = rho.iter().map(|&r| h.dh(r)).collect();
            let hx = grid.dx_ext(&hv, h.dh(gl), h.dh(gr));
            Ok(grid.dx_ext(&hx, 0.0, 0.0))
        }
        RelaxationSystem::PSystemDamping { tau } => {
            let u = &profile.components[0];
            let (gl, gr) = grid.ghosts(u, 0);
            let tv: Vec<f64> = u.iter().map(|&x| tau.tau(x)).collect();
            let tx = grid.dx_ext(&tv, tau.tau(gl), tau.tau(gr));
            Ok(grid.dx_ext(&tx, 0.0, 0.0))
        }
        RelaxationSystem::ViscoMemory { .. } => Ok(grid.dx_op(&profile.components[1], 1)),
    }
}

/// Q-term density at one cell, with the convention of the inequality
/// d/dt eta(.|.) + div(...) <= -(1/eps^2) R - Q - E.
pub fn q_term(sys: &RelaxationSystem, s: &[f64], sb: &[f64], coeff: f64) -> Result<f64> {
    match sys {
        RelaxationSystem::EulerFriction { p, .. } => euler::big_q(
            euler::EulerState::new(s[0], s[1]),
            euler::EulerState::new(sb[0], sb[1]),
            coeff,
            p,
        ),
        RelaxationSystem::PSystemDamping { tau } => Ok(-coeff * tau.tau_rel(s[0], sb[0])),
        RelaxationSystem::ViscoMemory { sigma, .. } => Ok(-coeff * sigma.tau_rel(s[0], sb[0])),
    }
}

/// E-term density at one cell, given the bar error source value there.
pub fn e_term(sys: &RelaxationSystem, s: &[f64], sb: &[f64], err: f64) -> Result<f64> {
    match sys {
        RelaxationSystem::EulerFriction { .. } => euler::big_e(
            euler::EulerState::new(s[0], s[1]),
            euler::EulerState::new(sb[0], sb[1]),
            err,
        ),
        RelaxationSystem::PSystemDamping { .. } => Ok(err * (s[1] - sb[1])),
        RelaxationSystem::ViscoMemory { mu, .. } => Ok(err * (s[2] - sb[2]) / mu),
    }
}

/// Right-hand side v_t = Dx sigma(u) + mu DxDx v of the rate-type limit.
pub fn visco_limit_vt(sys: &RelaxationSystem, profile: &GridField) -> Result<Vec<f64>> {
    let RelaxationSystem::ViscoMemory { sigma, mu } = sys else {
        return Err(RelaxError::Config(
            "visco limit evaluation on a non-visco system".into(),
        ));
    };
    let grid = &profile.grid;
    let u = &profile.components[0];
    let v = &profile.components[1];
    let (gl, gr) = grid.ghosts(u, 0);
    let sv: Vec<f64> = u.iter().map(|&x| sigma.tau(x)).collect();
    let sx = grid.dx_ext(&sv, sigma.tau(gl), sigma.tau(gr));
    let vx = grid.dx_op(v, 1);
    let vxx = grid.dx_ext(&vx, 0.0, 0.0);
    Ok(sx
        .iter()
        .zip(&vxx)
        .map(|(&a, &b)| a + mu * b)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{make_gamma_law, StressLaw};
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn euler12() -> RelaxationSystem {
        let (p, _) = make_gamma_law(1.0, 2.0).unwrap();
        RelaxationSystem::euler(p)
    }

    #[test]
    fn flux_values() {
        let mut out = [0.0; 3];
        euler12().flux(&[1.0, 1.0], 0.1, &mut out);
        assert_eq!(&out[..2], &[1.0, 2.0]);

        let ps = RelaxationSystem::psystem(StressLaw::linear_cubic(0.0, 1.0).unwrap());
        ps.flux(&[2.0, 0.0], 0.1, &mut out);
        assert_eq!(&out[..2], &[0.0, -8.0]);
    }

    #[test]
    fn stiff_source_vanishes_on_equilibrium() {
        let mut out = [0.0; 3];
        euler12().stiff_source(&[2.0, 0.0], &mut out);
        assert_eq!(&out[..2], &[0.0, 0.0]);
        euler12().stiff_source(&[2.0, 3.0], &mut out);
        assert_eq!(&out[..2], &[0.0, 3.0]);

        let vs = RelaxationSystem::visco(StressLaw::linear_cubic(1.0, 1.0).unwrap(), 1.0).unwrap();
        vs.stiff_source(&[1.0, 2.0, 0.5], &mut out);
        assert_eq!(out, [0.0, 0.0, 0.5]);
    }

    #[test]
    fn euler_wave_speed_closed_form() {
        let sys = euler12();
        // u +- sqrt(p'(rho)); rho=4, m=4: u=1, sqrt(2*4)=2*sqrt2
        let s = sys.max_speed(&[4.0, 4.0], 0.1);
        assert!((s - (1.0 + 8.0f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn visco_wave_speed_mixes_scales() {
        let vs = RelaxationSystem::visco(StressLaw::linear_cubic(1.0, 0.0).unwrap(), 1.0).unwrap();
        let s = vs.max_speed(&[0.0, 0.0, 0.0], 0.5);
        assert!((s - 1.25f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reconstruct_bar_constant_profile_is_at_equilibrium() {
        let sys = euler12();
        let g = Grid::periodic(32, 0.0, 1.0).unwrap();
        let prof = GridField::from_profiles(g, &[&|_| 2.0]);
        let bar = reconstruct_bar(&sys, &prof, 0.1).unwrap();
        assert!(bar.components[1].iter().all(|&m| m == 0.0));
    }

    #[test]
    fn reconstruct_bar_matches_continuum_darcy() {
        // rho = 2 + sin x, p = rho^2: m = -eps 2 rho cos x; at x near 0, -4 eps
        let sys = euler12();
        let eps = 0.1;
        let n = 256;
        let g = Grid::periodic(n, 0.0, 2.0 * PI).unwrap();
        let prof = GridField::from_profiles(g.clone(), &[&|x: f64| 2.0 + x.sin()]);
        let bar = reconstruct_bar(&sys, &prof, eps).unwrap();
        for (x, m) in g.centers().iter().zip(&bar.components[1]) {
            let exact = -eps * 2.0 * (2.0 + x.sin()) * x.cos();
            assert!((m - exact).abs() < 1e-3, "x={x}: {m} vs {exact}");
        }

        let bar2 = reconstruct_bar(&sys, &prof, 2.0 * eps).unwrap();
        for (a, b) in bar.components[1].iter().zip(&bar2.components[1]) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn reconstruct_bar_rejects_vacuum() {
        let sys = euler12();
        let g = Grid::periodic(32, 0.0, 1.0).unwrap();
        let prof = GridField::from_profiles(g, &[&|_| 0.0]);
        assert!(reconstruct_bar(&sys, &prof, 0.1).is_err());
    }

    #[test]
    fn bar_error_source_zero_for_constant_profiles() {
        let g = Grid::periodic(32, 0.0, 1.0).unwrap();
        let sys = euler12();
        let prof = GridField::from_profiles(g.clone(), &[&|_| 2.0]);
        assert!(bar_error_source(&sys, &prof, 0.1)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));

        let ps = RelaxationSystem::psystem(StressLaw::linear_cubic(1.0, 1.0).unwrap());
        let prof = GridField::from_profiles(g.clone(), &[&|_| 0.5]);
        assert!(bar_error_source(&ps, &prof, 0.1)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));

        let vs = RelaxationSystem::visco(StressLaw::linear_cubic(1.0, 1.0).unwrap(), 1.0).unwrap();
        let prof = GridField::from_profiles(g, &[&|_| 0.5, &|_| 0.0]);
        assert!(bar_error_source(&vs, &prof, 0.1)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn psystem_error_source_matches_symbolic_oracle() {
        // tau(u) = u, u = sin x: v_t = eps (u_xx)_x = -eps cos x
        let ps = RelaxationSystem::psystem(StressLaw::linear_cubic(1.0, 0.0).unwrap());
        let eps = 0.1;
        let g = Grid::periodic(256, 0.0, 2.0 * PI).unwrap();
        let prof = GridField::from_profiles(g.clone(), &[&|x: f64| x.sin()]);
        let src = bar_error_source(&ps, &prof, eps).unwrap();
        for (x, s) in g.centers().iter().zip(&src) {
            assert!((s + eps * x.cos()).abs() < 2e-3, "x={x}: {s}");
        }
    }

    #[test]
    fn hilbert_consistency_is_exact_to_round_off() {
        // Inserting the reconstructed bar state into the relaxation system and
        // substituting the limit PDE for time derivatives must leave exactly
        // the bar error source on the damped equation.
        let sys = euler12();
        let RelaxationSystem::EulerFriction { p, .. } = &sys else {
            unreachable!()
        };
        let eps = 0.1;
        let g = Grid::periodic(64, 0.0, 2.0 * PI).unwrap();
        let prof = GridField::from_profiles(g.clone(), &[&|x: f64| 2.0 + 0.5 * x.sin()]);
        let rho = &prof.components[0];
        let bar = reconstruct_bar(&sys, &prof, eps).unwrap();
        let m = &bar.components[1];

        // rho_t = DxDx p exactly cancels (1/eps) Dx m
        let (gl, gr) = g.ghosts(rho, 0);
        let pv: Vec<f64> = rho.iter().map(|&r| p.p(r)).collect();
        let px = g.dx_ext(&pv, p.p(gl), p.p(gr));
        let rho_t = g.dx_ext(&px, 0.0, 0.0);
        let dm = g.dx_ext(m, 0.0, 0.0);
        for (a, b) in rho_t.iter().zip(&dm) {
            assert!((a + b / eps).abs() < 1e-11, "{a} vs {}", -b / eps);
        }

        // momentum equation: m_t + (1/eps) Dx(m^2/rho + p) + m/eps^2 = e_bar
        let mt: Vec<f64> = {
            // m_t = -eps Dx(p'(rho) rho_t)
            let inner: Vec<f64> = rho.iter().zip(&rho_t).map(|(&r, &rt)| p.dp(r) * rt).collect();
            g.dx_ext(&inner, 0.0, 0.0).iter().map(|v| -eps * v).collect()
        };
        let f2: Vec<f64> = rho
            .iter()
            .zip(m)
            .map(|(&r, &mm)| mm * mm / r + p.p(r))
            .collect();
        let df2 = g.dx_ext(&f2, 0.0, 0.0);
        let ebar = bar_error_source(&sys, &prof, eps).unwrap();
        for i in 0..g.n {
            let resid = mt[i] + df2[i] / eps + m[i] / (eps * eps);
            assert!(
                (resid - ebar[i]).abs() < 1e-10,
                "cell {i}: residual {resid} vs e_bar {}",
                ebar[i]
            );
        }
    }
}
