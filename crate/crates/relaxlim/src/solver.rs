//! Time steppers: an IMEX finite-volume scheme for the relaxation systems
//! (Strang splitting, exact exponential stiff source, Rusanov or HLL fluxes)
//! and implicit finite-difference solvers for the limit equations.
//!
//! The limit solvers discretize the Laplacian as the composed centered
//! difference Dx(Dx .), the same operator used by the bar reconstruction, so
//! the discrete Hilbert-consistency identity holds to round-off. On even cell
//! counts that operator splits into independent odd/even sublattices, each a
//! (cyclic) tridiagonal system.

use crate::error::{RelaxError, Result};
use crate::grid::{Boundary, Grid, GridField};
use crate::systems::{RelaxationSystem, MAX_DIM};

/// Vacuum floor for the relaxation solver; crossing it aborts the run.
pub const RELAX_FLOOR: f64 = 1e-10;
/// Vacuum floor for limit profiles feeding bar reconstructions.
pub const LIMIT_FLOOR: f64 = 1e-6;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITERS: usize = 50;
/// Accuracy cap on limit-solver substeps, as a multiple of dx.
const LIMIT_DT_CAP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxScheme {
    Rusanov,
    Hll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceScheme {
    ExactExponential,
    ImplicitEuler,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub cfl: f64,
    pub flux: FluxScheme,
    pub source: SourceScheme,
    pub t_end: f64,
    pub output_stride: usize,
    /// Certification cap: the observed entropy-residual constant
    /// C = integral(r) / (dx + dt) must stay below this.
    pub cert_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl: 0.45,
            flux: FluxScheme::Rusanov,
            source: SourceScheme::ExactExponential,
            t_end: 0.25,
            output_stride: 16,
            cert_cap: 1e3,
        }
    }
}

/// Stable step size dt = cfl * eps * dx / max wave speed.
pub fn relaxation_dt(state: &GridField, sys: &RelaxationSystem, eps: f64, cfl: f64) -> f64 {
    let n = state.n();
    let dim = sys.state_dim();
    let mut amax = 0.0f64;
    let mut s = [0.0; MAX_DIM];
    for i in 0..n {
        for c in 0..dim {
            s[c] = state.components[c][i];
        }
        amax = amax.max(sys.max_speed(&s[..dim], eps));
    }
    if amax == 0.0 {
        return cfl * eps * state.grid.dx();
    }
    cfl * eps * state.grid.dx() / amax
}

fn source_factor(scheme: SourceScheme, dt: f64, eps: f64) -> f64 {
    match scheme {
        SourceScheme::ExactExponential => (-dt / (eps * eps)).exp(),
        SourceScheme::ImplicitEuler => 1.0 / (1.0 + dt / (eps * eps)),
    }
}

fn interface_flux(
    sys: &RelaxationSystem,
    scheme: FluxScheme,
    ul: &[f64],
    ur: &[f64],
    eps: f64,
    out: &mut [f64],
) {
    let dim = ul.len();
    let mut fl = [0.0; MAX_DIM];
    let mut fr = [0.0; MAX_DIM];
    sys.flux(ul, eps, &mut fl);
    sys.flux(ur, eps, &mut fr);
    let al = sys.max_speed(ul, eps);
    let ar = sys.max_speed(ur, eps);
    let a = al.max(ar);
    match scheme {
        FluxScheme::Rusanov => {
            for c in 0..dim {
                out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * a * (ur[c] - ul[c]);
            }
        }
        FluxScheme::Hll => {
            let (sl, sr) = (-a, a);
            if sl >= 0.0 {
                out[..dim].copy_from_slice(&fl[..dim]);
            } else if sr <= 0.0 {
                out[..dim].copy_from_slice(&fr[..dim]);
            } else {
                for c in 0..dim {
                    out[c] =
                        (sr * fl[c] - sl * fr[c] + sl * sr * (ur[c] - ul[c])) / (sr - sl);
                }
            }
        }
    }
}

fn gather(state: &GridField, i: usize, dim: usize, s: &mut [f64]) {
    for c in 0..dim {
        s[c] = state.components[c][i];
    }
}

fn ghost_state(state: &GridField, dim: usize, left: bool, s: &mut [f64]) {
    match &state.grid.boundary {
        Boundary::Periodic => {
            let i = if left { state.n() - 1 } else { 0 };
            gather(state, i, dim, s);
        }
        Boundary::FarField { left: l, right: r } => {
            let src = if left { l } else { r };
            s[..dim].copy_from_slice(&src[..dim]);
        }
    }
}

/// One full Strang step: half stiff source, hyperbolic step, half source.
pub fn step_relaxation(
    state: &mut GridField,
    sys: &RelaxationSystem,
    eps: f64,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<()> {
    let n = state.n();
    let dim = sys.state_dim();
    let damped = sys.damped_index();
    let lambda = dt * relax_speed_check(state, sys, eps)? / (eps * state.grid.dx());
    if lambda > 1.0 + 1e-12 {
        return Err(RelaxError::SolverAbort(format!(
            "CFL violation: lambda = {lambda:.3} > 1 at t = {}",
            state.t
        )));
    }

    let half = source_factor(cfg.source, 0.5 * dt, eps);
    for w in state.components[damped].iter_mut() {
        *w *= half;
    }

    // interface fluxes: index j is the interface left of cell j, j = 0..=n
    let mut fluxes = vec![[0.0; MAX_DIM]; n + 1];
    let mut ul = [0.0; MAX_DIM];
    let mut ur = [0.0; MAX_DIM];
    for j in 0..=n {
        if j == 0 {
            ghost_state(state, dim, true, &mut ul);
        } else {
            gather(state, j - 1, dim, &mut ul);
        }
        if j == n {
            ghost_state(state, dim, false, &mut ur);
        } else {
            gather(state, j, dim, &mut ur);
        }
        let mut out = [0.0; MAX_DIM];
        interface_flux(sys, cfg.flux, &ul[..dim], &ur[..dim], eps, &mut out);
        fluxes[j] = out;
    }
    let scale = dt / (eps * state.grid.dx());
    for c in 0..dim {
        let comp = &mut state.components[c];
        for i in 0..n {
            comp[i] -= scale * (fluxes[i + 1][c] - fluxes[i][c]);
        }
    }

    for w in state.components[damped].iter_mut() {
        *w *= half;
    }

    if matches!(sys, RelaxationSystem::EulerFriction { .. }) {
        if let Some(i) = state.components[0].iter().position(|&r| r < RELAX_FLOOR) {
            return Err(RelaxError::SolverAbort(format!(
                "density {} below vacuum floor at cell {i}, t = {}",
                state.components[0][i], state.t
            )));
        }
    }
    state.t += dt;
    state.assert_finite()
}

fn relax_speed_check(state: &GridField, sys: &RelaxationSystem, eps: f64) -> Result<f64> {
    let n = state.n();
    let dim = sys.state_dim();
    let mut s = [0.0; MAX_DIM];
    let mut amax = 0.0f64;
    for i in 0..n {
        gather(state, i, dim, &mut s);
        if matches!(sys, RelaxationSystem::EulerFriction { .. }) && s[0] < RELAX_FLOOR {
            return Err(RelaxError::SolverAbort(format!(
                "density {} below vacuum floor at cell {i}",
                s[0]
            )));
        }
        amax = amax.max(sys.max_speed(&s[..dim], eps));
    }
    Ok(amax)
}

/// Per-cell discrete entropy residual of one accepted step:
/// r = [eta(after) - eta(before)]/dt + Dx(q_num)/eps + diss(avg)/eps^2.
pub fn entropy_residual(
    before: &GridField,
    after: &GridField,
    sys: &RelaxationSystem,
    eps: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let n = before.n();
    let dim = sys.state_dim();
    let dx = before.grid.dx();
    let mut ul = [0.0; MAX_DIM];
    let mut ur = [0.0; MAX_DIM];
    // Rusanov-type numerical entropy flux at interfaces of the pre-step state
    let mut qf = vec![0.0; n + 1];
    for j in 0..=n {
        if j == 0 {
            ghost_state(before, dim, true, &mut ul);
        } else {
            gather(before, j - 1, dim, &mut ul);
        }
        if j == n {
            ghost_state(before, dim, false, &mut ur);
        } else {
            gather(before, j, dim, &mut ur);
        }
        let a = sys.max_speed(&ul[..dim], eps).max(sys.max_speed(&ur[..dim], eps));
        let el = sys.entropy(&ul[..dim])?;
        let er = sys.entropy(&ur[..dim])?;
        qf[j] = 0.5 * (sys.entropy_flux(&ul[..dim], eps)? + sys.entropy_flux(&ur[..dim], eps)?)
            - 0.5 * a * (er - el);
    }
    let mut r = vec![0.0; n];
    let mut sb = [0.0; MAX_DIM];
    let mut sa = [0.0; MAX_DIM];
    let mut avg = [0.0; MAX_DIM];
    for i in 0..n {
        gather(before, i, dim, &mut sb);
        gather(after, i, dim, &mut sa);
        for c in 0..dim {
            avg[c] = 0.5 * (sb[c] + sa[c]);
        }
        let de = (sys.entropy(&sa[..dim])? - sys.entropy(&sb[..dim])?) / dt;
        let dq = (qf[i + 1] - qf[i]) / (dx * eps);
        r[i] = de + dq + sys.dissipation(&avg[..dim]) / (eps * eps);
    }
    Ok(r)
}

// --- tridiagonal machinery ------------------------------------------------

/// Thomas algorithm for tri(sub, diag, sup) x = rhs. Overwrites the inputs.
fn thomas(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
}

/// Cyclic tridiagonal solve via the Sherman-Morrison correction.
/// `corner_top` is A[0, n-1], `corner_bot` is A[n-1, 0].
fn cyclic_thomas(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    corner_top: f64,
    corner_bot: f64,
    rhs: &[f64],
) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 3);
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= corner_top * corner_bot / gamma;

    let mut y = rhs.to_vec();
    let mut d1 = d.clone();
    thomas(sub, &mut d1, sup, &mut y);

    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_bot;
    let mut d2 = d;
    thomas(sub, &mut d2, sup, &mut u);

    // v = (1, 0, ..., 0, corner_top / gamma)
    let vy = y[0] + corner_top / gamma * y[n - 1];
    let vu = u[0] + corner_top / gamma * u[n - 1];
    let factor = vy / (1.0 + vu);
    y.iter_mut().zip(&u).for_each(|(yi, &ui)| *yi -= factor * ui);
    y
}

/// Composed centered second difference Dx(Dx f) with far-field value `far`.
fn dxdx(grid: &Grid, f: &[f64], far_left: f64, far_right: f64) -> Vec<f64> {
    let fx = grid.dx_ext(f, far_left, far_right);
    grid.dx_ext(&fx, 0.0, 0.0)
}

/// Solves (I - kappa4 * DxDx diag(coef)) x = rhs, where kappa4 multiplies the
/// raw stride-2 stencil (f[i+2] - 2 f[i] + f[i-2]) (i.e. kappa4 = kappa/(4h^2)).
/// The system splits into parity sublattices; `n` must be even for periodic
/// grids.
fn solve_dxdx_system(grid: &Grid, coef: &[f64], kappa4: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = grid.n;
    let periodic = matches!(grid.boundary, Boundary::Periodic);
    if periodic && n % 2 != 0 {
        return Err(RelaxError::Config(
            "periodic limit solver requires an even cell count".into(),
        ));
    }
    let mut x = vec![0.0; n];
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..n).step_by(2).collect();
        let m = idx.len();
        if m == 0 {
            continue;
        }
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut b = vec![0.0; m];
        for (j, &i) in idx.iter().enumerate() {
            b[j] = rhs[i];
            if periodic {
                diag[j] = 1.0 + 2.0 * kappa4 * coef[i];
                let prev = idx[(j + m - 1) % m];
                let next = idx[(j + 1) % m];
                if j > 0 {
                    sub[j] = -kappa4 * coef[prev];
                }
                if j + 1 < m {
                    sup[j] = -kappa4 * coef[next];
                }
            } else {
                // far-field rows: first and last sublattice cells see one
                // neighbor and a frozen ghost
                let first = j == 0;
                let last = j + 1 == m;
                let inner_first = i < 2;
                let inner_last = i + 2 >= n;
                let own = if inner_first && first {
                    if i == 0 {
                        1.0
                    } else {
                        2.0
                    }
                } else if inner_last && last {
                    if i == n - 1 {
                        1.0
                    } else {
                        2.0
                    }
                } else {
                    2.0
                };
                diag[j] = 1.0 + own * kappa4 * coef[i];
                if !first {
                    sub[j] = -kappa4 * coef[idx[j - 1]];
                }
                if !last {
                    sup[j] = -kappa4 * coef[idx[j + 1]];
                }
            }
        }
        let sol = if periodic && m >= 3 {
            let corner_top = -kappa4 * coef[idx[m - 1]];
            let corner_bot = -kappa4 * coef[idx[0]];
            cyclic_thomas(&sub, &diag, &sup, corner_top, corner_bot, &b)
        } else {
            let mut d = diag;
            let mut r = b;
            thomas(&sub, &mut d, &sup, &mut r);
            r
        };
        for (j, &i) in idx.iter().enumerate() {
            x[i] = sol[j];
        }
    }
    Ok(x)
}

/// One Crank-Nicolson step of w_t = DxDx g(w), solved by Newton iteration.
fn cn_diffusion_step(
    grid: &Grid,
    w: &mut [f64],
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    far: (f64, f64),
    dt: f64,
) -> Result<()> {
    let theta = 0.5;
    let h = grid.dx();
    let kappa4 = theta * dt / (4.0 * h * h);

    let gw_old: Vec<f64> = w.iter().map(|&x| g(x)).collect();
    let lap_old = dxdx(grid, &gw_old, g(far.0), g(far.1));
    let rhs_old: Vec<f64> = w
        .iter()
        .zip(&lap_old)
        .map(|(&x, &l)| x + (1.0 - theta) * dt * l)
        .collect();

    let scale = 1.0 + w.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut iters = 0;
    loop {
        let gw: Vec<f64> = w.iter().map(|&x| g(x)).collect();
        let lap = dxdx(grid, &gw, g(far.0), g(far.1));
        let residual: Vec<f64> = w
            .iter()
            .zip(&lap)
            .zip(&rhs_old)
            .map(|((&x, &l), &r)| x - theta * dt * l - r)
            .collect();
        let rmax = residual.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if !residual.iter().all(|r| r.is_finite()) {
            return Err(RelaxError::NewtonDiverged {
                iters,
                residual: f64::INFINITY,
            });
        }
        if rmax <= NEWTON_TOL * scale {
            return Ok(());
        }
        if iters >= NEWTON_MAX_ITERS {
            return Err(RelaxError::NewtonDiverged {
                iters,
                residual: rmax,
            });
        }
        let coef: Vec<f64> = w.iter().map(|&x| dg(x)).collect();
        let delta = solve_dxdx_system(grid, &coef, kappa4, &residual)?;
        for (wi, di) in w.iter_mut().zip(&delta) {
            *wi -= di;
        }
        iters += 1;
    }
}

/// Advances the limit profile by exactly `dt` (one scheme step).
pub fn step_limit(profile: &mut GridField, sys: &RelaxationSystem, dt: f64) -> Result<()> {
    let grid = profile.grid.clone();
    match sys {
        RelaxationSystem::EulerFriction { p, .. } => {
            let (gl, gr) = grid.ghosts(&profile.components[0], 0);
            cn_diffusion_step(
                &grid,
                &mut profile.components[0],
                &|r| p.p(r),
                &|r| p.dp(r),
                (gl, gr),
                dt,
            )?;
            if let Some(i) = profile.components[0].iter().position(|&r| r < LIMIT_FLOOR) {
                return Err(RelaxError::SolverAbort(format!(
                    "limit density {} below floor at cell {i}",
                    profile.components[0][i]
                )));
            }
        }
        RelaxationSystem::PSystemDamping { tau } => {
            let (gl, gr) = grid.ghosts(&profile.components[0], 0);
            cn_diffusion_step(
                &grid,
                &mut profile.components[0],
                &|u| tau.tau(u),
                &|u| tau.dtau(u),
                (gl, gr),
                dt,
            )?;
        }
        RelaxationSystem::ViscoMemory { sigma, mu } => {
            // u_t = Dx v explicit; v_t = Dx sigma(u) + mu DxDx v with the
            // viscous part Crank-Nicolson implicit
            let theta = 0.5;
            let u_old = profile.components[0].clone();
            let v_old = profile.components[1].clone();
            let vx = grid.dx_op(&v_old, 1);
            for (ui, d) in profile.components[0].iter_mut().zip(&vx) {
                *ui += dt * d;
            }
            let (gl, gr) = grid.ghosts(&u_old, 0);
            let sv: Vec<f64> = u_old.iter().map(|&x| sigma.tau(x)).collect();
            let sx = grid.dx_ext(&sv, sigma.tau(gl), sigma.tau(gr));
            let lap_v = dxdx(&grid, &v_old, 0.0, 0.0);
            let rhs: Vec<f64> = (0..grid.n)
                .map(|i| v_old[i] + dt * sx[i] + (1.0 - theta) * dt * mu * lap_v[i])
                .collect();
            let h = grid.dx();
            let kappa4 = theta * dt * mu / (4.0 * h * h);
            let coef = vec![1.0; grid.n];
            profile.components[1] = solve_dxdx_system(&grid, &coef, kappa4, &rhs)?;
        }
    }
    profile.t += dt;
    profile.assert_finite()
}

/// Advances the limit profile to time `t_target` in accuracy-capped substeps.
pub fn advance_limit_to(profile: &mut GridField, sys: &RelaxationSystem, t_target: f64) -> Result<()> {
    let gap = t_target - profile.t;
    if gap <= 0.0 {
        return Ok(());
    }
    let cap = LIMIT_DT_CAP * profile.grid.dx();
    let steps = (gap / cap).ceil().max(1.0) as usize;
    let dt = gap / steps as f64;
    for k in 0..steps {
        step_limit(profile, sys, dt)?;
        // pin the clock to avoid drift from repeated accumulation
        profile.t = t_target - (steps - 1 - k) as f64 * dt;
    }
    profile.t = t_target;
    Ok(())
}

/// Result of a paired relaxation/limit run.
#[derive(Debug, Clone)]
pub struct PairedRun {
    pub ledger: crate::diagnostics::EntropyLedger,
    pub final_state: GridField,
    pub final_profile: GridField,
    pub final_bar: GridField,
    /// Observed certification constant: max over steps of the positive part
    /// of the integrated entropy residual divided by (dx + dt).
    pub cert_constant: f64,
    pub certified: bool,
}

/// Advances the relaxation state and the limit profile together to t_end,
/// recording ledger rows every `output_stride` steps at exactly matched times.
pub fn run_paired(
    sys: &RelaxationSystem,
    mut state: GridField,
    mut profile: GridField,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<PairedRun> {
    use crate::diagnostics::{observe, EntropyLedger};
    use crate::systems::reconstruct_bar;

    let dx = state.grid.dx();
    let mass0 = state.integral(0);
    let mass_scale = mass0.abs().max(1.0);
    let mut ledger = EntropyLedger::new();
    let mut cert_constant = 0.0f64;
    let mut window_res_max = 0.0f64;
    let mut prev: Option<(f64, crate::diagnostics::Observation)> = None;
    let (mut diss_cum, mut q_cum, mut e_cum) = (0.0f64, 0.0f64, 0.0f64);

    let mut bar = reconstruct_bar(sys, &profile, eps)?;
    let mut record =
        |state: &GridField,
         profile: &mut GridField,
         bar: &mut GridField,
         ledger: &mut EntropyLedger,
         prev: &mut Option<(f64, crate::diagnostics::Observation)>,
         res_max: f64|
         -> Result<()> {
            advance_limit_to(profile, sys, state.t)?;
            *bar = reconstruct_bar(sys, profile, eps)?;
            let obs = observe(sys, state, bar, profile, eps)?;
            if let Some((t_prev, o_prev)) = prev {
                let w = 0.5 * (state.t - *t_prev);
                diss_cum += w * (o_prev.dissipation + obs.dissipation);
                q_cum += w * (o_prev.q_abs + obs.q_abs);
                e_cum += w * (o_prev.e_abs + obs.e_abs);
            }
            let mass_err = (state.integral(0) - mass0).abs() / mass_scale;
            ledger.push_row(state.t, obs.phi, diss_cum, q_cum, e_cum, res_max, mass_err);
            *prev = Some((state.t, obs));
            Ok(())
        };

    record(&state, &mut profile, &mut bar, &mut ledger, &mut prev, 0.0)?;

    let mut steps = 0usize;
    while state.t < cfg.t_end - 1e-14 {
        let dt = relaxation_dt(&state, sys, eps, cfg.cfl).min(cfg.t_end - state.t);
        let before = state.clone();
        step_relaxation(&mut state, sys, eps, dt, cfg)?;
        let r = entropy_residual(&before, &state, sys, eps, dt)?;
        let integ: f64 = r.iter().sum::<f64>() * dx;
        cert_constant = cert_constant.max(integ.max(0.0) / (dx + dt));
        window_res_max = window_res_max.max(r.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
        steps += 1;
        let done = state.t >= cfg.t_end - 1e-14;
        if steps % cfg.output_stride == 0 || done {
            record(
                &state,
                &mut profile,
                &mut bar,
                &mut ledger,
                &mut prev,
                window_res_max,
            )?;
            window_res_max = 0.0;
        }
    }

    let certified = cert_constant <= cfg.cert_cap;
    Ok(PairedRun {
        ledger,
        final_state: state,
        final_profile: profile,
        final_bar: bar,
        cert_constant,
        certified,
    })
}
