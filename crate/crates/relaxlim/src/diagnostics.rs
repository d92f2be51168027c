//! Distance functionals, inequality audits, rate fits and sweep reports.

use std::fmt::Write as _;

use crate::error::{RelaxError, Result};
use crate::grid::GridField;
use crate::systems::{self, RelaxationSystem, MAX_DIM};

/// Time series of the paired-run functionals, one row per observation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntropyLedger {
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    /// Cumulative integral of (1/eps^2) int R dx.
    pub dissipation_integral: Vec<f64>,
    /// Cumulative integral of int |Q| dx.
    pub q_integral: Vec<f64>,
    /// Cumulative integral of int |E| dx.
    pub e_integral: Vec<f64>,
    /// Largest per-cell entropy residual seen since the previous row.
    pub entropy_residual_max: Vec<f64>,
    /// Relative drift of the conserved quantity since t = 0.
    pub mass_error: Vec<f64>,
}

impl EntropyLedger {
    pub fn new() -> Self {
        EntropyLedger::default()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_row(
        &mut self,
        t: f64,
        phi: f64,
        diss_cum: f64,
        q_cum: f64,
        e_cum: f64,
        res_max: f64,
        mass_err: f64,
    ) {
        self.times.push(t);
        self.phi.push(phi);
        self.dissipation_integral.push(diss_cum);
        self.q_integral.push(q_cum);
        self.e_integral.push(e_cum);
        self.entropy_residual_max.push(res_max);
        self.mass_error.push(mass_err);
    }

    pub fn export(&self) -> String {
        let mut out = String::from("t,phi,diss_cum,Q_cum,E_cum,res_max,mass_err\n");
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.times[i],
                self.phi[i],
                self.dissipation_integral[i],
                self.q_integral[i],
                self.e_integral[i],
                self.entropy_residual_max[i],
                self.mass_error[i],
            )
            .unwrap();
        }
        out
    }

    pub fn import(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| RelaxError::Config("empty ledger file".into()))?;
        if header.trim() != "t,phi,diss_cum,Q_cum,E_cum,res_max,mass_err" {
            return Err(RelaxError::Config(format!(
                "unexpected ledger header: {header:?}"
            )));
        }
        let mut ledger = EntropyLedger::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|e| {
                        RelaxError::Config(format!("ledger line {}: {e}", lineno + 2))
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != 7 {
                return Err(RelaxError::Config(format!(
                    "ledger line {} has {} columns, expected 7",
                    lineno + 2,
                    vals.len()
                )));
            }
            ledger.push_row(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]);
        }
        Ok(ledger)
    }
}

/// Midpoint-rule integral of the relative entropy between matched fields.
pub fn compute_phi(
    sys: &RelaxationSystem,
    state: &GridField,
    bar: &GridField,
    eps: f64,
) -> Result<f64> {
    let n = state.n();
    let dim = sys.state_dim();
    let mut acc = 0.0;
    let mut s = [0.0; MAX_DIM];
    let mut b = [0.0; MAX_DIM];
    for i in 0..n {
        for c in 0..dim {
            s[c] = state.components[c][i];
            b[c] = bar.components[c][i];
        }
        acc += sys.relative_entropy(&s[..dim], &b[..dim], eps)?;
    }
    Ok(acc * state.grid.dx())
}

/// Instantaneous space integrals feeding the ledger between observations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Observation {
    pub phi: f64,
    /// int R dx / eps^2
    pub dissipation: f64,
    /// int |Q| dx
    pub q_abs: f64,
    /// int |E| dx
    pub e_abs: f64,
}

pub fn observe(
    sys: &RelaxationSystem,
    state: &GridField,
    bar: &GridField,
    limit_profile: &GridField,
    eps: f64,
) -> Result<Observation> {
    let n = state.n();
    let dim = sys.state_dim();
    let dx = state.grid.dx();
    let coeff = systems::q_coefficient(sys, limit_profile)?;
    let err = systems::bar_error_source(sys, limit_profile, eps)?;
    let mut obs = Observation::default();
    let mut s = [0.0; MAX_DIM];
    let mut b = [0.0; MAX_DIM];
    for i in 0..n {
        for c in 0..dim {
            s[c] = state.components[c][i];
            b[c] = bar.components[c][i];
        }
        let (s, b) = (&s[..dim], &b[..dim]);
        obs.phi += sys.relative_entropy(s, b, eps)?;
        obs.dissipation += sys.relative_dissipation(s, b)?;
        obs.q_abs += systems::q_term(sys, s, b, coeff[i])?.abs();
        obs.e_abs += systems::e_term(sys, s, b, err[i])?.abs();
    }
    obs.phi *= dx;
    obs.dissipation *= dx / (eps * eps);
    obs.q_abs *= dx;
    obs.e_abs *= dx;
    Ok(obs)
}

#[derive(Debug, Clone, Copy)]
pub struct GronwallAudit {
    /// Smallest C with phi(t) <= C (phi(0) + eps^4) over the run.
    pub c: f64,
    pub satisfied: bool,
}

pub fn gronwall_audit(ledger: &EntropyLedger, eps: f64, cap: f64) -> GronwallAudit {
    let denom = ledger.phi.first().copied().unwrap_or(0.0) + eps.powi(4);
    let mut c = 0.0f64;
    for &p in &ledger.phi {
        if denom > 0.0 {
            c = c.max(p / denom);
        } else if p > 0.0 {
            c = f64::INFINITY;
        }
    }
    GronwallAudit {
        c,
        satisfied: c <= cap,
    }
}

/// Least-squares slope of log phi(T) against log eps.
pub fn fit_rate(epsilons: &[f64], phi_at_t: &[f64]) -> Result<f64> {
    if epsilons.len() != phi_at_t.len() || epsilons.len() < 2 {
        return Err(RelaxError::Config(format!(
            "rate fit needs matching lists with >= 2 points, got {} and {}",
            epsilons.len(),
            phi_at_t.len()
        )));
    }
    if phi_at_t.iter().any(|&p| !(p > 0.0)) {
        return Err(RelaxError::Config(
            "rate fit needs strictly positive phi values".into(),
        ));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = phi_at_t.iter().map(|p| p.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Block-averages a fine-grid field onto a grid coarser by `ratio` (even),
/// matching cell centers to second order.
pub fn restrict(fine: &[f64], ratio: usize) -> Vec<f64> {
    assert!(ratio >= 2 && ratio % 2 == 0 && fine.len() % ratio == 0);
    let n = fine.len() / ratio;
    (0..n)
        .map(|i| {
            let mid = ratio * i + ratio / 2;
            0.5 * (fine[mid - 1] + fine[mid])
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct HilbertReport {
    /// Regression-recovered first-order momentum profile.
    pub m1: Vec<f64>,
    /// |m1 + Dx p(rho_bar)|_inf / |Dx p(rho_bar)|_inf.
    pub residual_rel: f64,
    /// Direct Darcy residuals |m_eps + eps Dx p|_inf / (eps |Dx p|_inf), per eps.
    pub per_eps_residual: Vec<f64>,
}

/// Fits m_eps(x) ~ eps m1(x) + eps^2 m2(x) cell by cell across the sweep and
/// compares m1 against the discrete Darcy closure -Dx p(rho_bar).
/// `momenta` must all live on the same (coarsest) grid, as must `darcy_rhs`,
/// which carries Dx p(rho_bar(T)).
pub fn hilbert_check(
    epsilons: &[f64],
    momenta: &[Vec<f64>],
    darcy_rhs: &[f64],
) -> Result<HilbertReport> {
    if epsilons.len() != momenta.len() || epsilons.len() < 3 {
        return Err(RelaxError::Config(format!(
            "Hilbert check needs >= 3 sweep points, got {}",
            epsilons.len()
        )));
    }
    let n = darcy_rhs.len();
    for m in momenta {
        if m.len() != n {
            return Err(RelaxError::Config(
                "Hilbert check needs momenta on a common grid".into(),
            ));
        }
    }
    // per-cell least squares for (m1, m2) in m ~ eps m1 + eps^2 m2
    let (mut a11, mut a12, mut a22) = (0.0f64, 0.0f64, 0.0f64);
    for &e in epsilons {
        a11 += e * e;
        a12 += e * e * e;
        a22 += e * e * e * e;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-30 {
        return Err(RelaxError::Config(
            "degenerate eps list in Hilbert regression".into(),
        ));
    }
    let mut m1 = vec![0.0; n];
    for i in 0..n {
        let (mut b1, mut b2) = (0.0f64, 0.0f64);
        for (k, &e) in epsilons.iter().enumerate() {
            b1 += e * momenta[k][i];
            b2 += e * e * momenta[k][i];
        }
        m1[i] = (a22 * b1 - a12 * b2) / det;
    }
    let darcy_norm = darcy_rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let resid = m1
        .iter()
        .zip(darcy_rhs)
        .map(|(&a, &b)| (a + b).abs())
        .fold(0.0f64, f64::max);
    let per_eps = epsilons
        .iter()
        .zip(momenta)
        .map(|(&e, m)| {
            let r = m
                .iter()
                .zip(darcy_rhs)
                .map(|(&mm, &d)| (mm + e * d).abs())
                .fold(0.0f64, f64::max);
            r / (e * darcy_norm)
        })
        .collect();
    Ok(HilbertReport {
        m1,
        residual_rel: resid / darcy_norm,
        per_eps_residual: per_eps,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct InequalityAudit {
    /// Largest violation of phi(t) + diss_cum <= phi(0) + Q_cum + E_cum + tol t.
    pub max_violation: f64,
    pub satisfied: bool,
}

pub fn inequality_audit(ledger: &EntropyLedger, tol: f64) -> InequalityAudit {
    let phi0 = ledger.phi.first().copied().unwrap_or(0.0);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..ledger.len() {
        let lhs = ledger.phi[k] + ledger.dissipation_integral[k];
        let rhs = phi0 + ledger.q_integral[k] + ledger.e_integral[k] + tol * ledger.times[k];
        worst = worst.max(lhs - rhs);
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    InequalityAudit {
        max_violation: worst,
        satisfied: worst <= 0.0,
    }
}

/// Aggregated sweep results.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub epsilons: Vec<f64>,
    pub phi_at_t: Vec<f64>,
    pub fitted_rate: f64,
    /// Geometric-mean prefactor exp(mean(log phi - rate log eps)).
    pub fitted_constant: f64,
    pub gronwall: Vec<f64>,
    pub cert_constants: Vec<f64>,
    pub ledgers: Vec<EntropyLedger>,
}

impl SweepReport {
    pub fn build(
        epsilons: Vec<f64>,
        phi_at_t: Vec<f64>,
        gronwall: Vec<f64>,
        cert_constants: Vec<f64>,
        ledgers: Vec<EntropyLedger>,
    ) -> Result<Self> {
        let fitted_rate = fit_rate(&epsilons, &phi_at_t)?;
        let n = epsilons.len() as f64;
        let log_c = epsilons
            .iter()
            .zip(&phi_at_t)
            .map(|(&e, &p)| p.ln() - fitted_rate * e.ln())
            .sum::<f64>()
            / n;
        Ok(SweepReport {
            epsilons,
            phi_at_t,
            fitted_rate,
            fitted_constant: log_c.exp(),
            gronwall,
            cert_constants,
            ledgers,
        })
    }

    pub fn export(&self) -> String {
        let mut out = String::from("epsilon,phi_T,gronwall_C,cert_C\n");
        for i in 0..self.epsilons.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.epsilons[i], self.phi_at_t[i], self.gronwall[i], self.cert_constants[i]
            )
            .unwrap();
        }
        writeln!(out, "rate,{:.17e}", self.fitted_rate).unwrap();
        writeln!(out, "constant,{:.17e}", self.fitted_constant).unwrap();
        out
    }

    /// Re-reads the summary rows written by `export` (without the ledgers).
    pub fn import_summary(text: &str) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
        let mut epsilons = Vec::new();
        let mut phi = Vec::new();
        let mut rate = None;
        let mut constant = None;
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != "epsilon,phi_T,gronwall_C,cert_C" {
                    return Err(RelaxError::Config(format!(
                        "unexpected sweep header {line:?}"
                    )));
                }
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            match parts.as_slice() {
                ["rate", v] => rate = Some(parse_f64(v, i)?),
                ["constant", v] => constant = Some(parse_f64(v, i)?),
                [e, p, _, _] => {
                    epsilons.push(parse_f64(e, i)?);
                    phi.push(parse_f64(p, i)?);
                }
                _ => {
                    return Err(RelaxError::Config(format!(
                        "bad sweep report line {}: {line:?}",
                        i + 1
                    )))
                }
            }
        }
        let rate = rate.ok_or_else(|| RelaxError::Config("missing rate row".into()))?;
        let constant = constant.ok_or_else(|| RelaxError::Config("missing constant row".into()))?;
        Ok((epsilons, phi, rate, constant))
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| RelaxError::Config(format!("sweep report line {}: {e}", line + 1)))
}

/// Delimited-text snapshot: one row per cell, columns x then the state
/// components in order.
pub fn export_field(field: &GridField) -> String {
    let mut out = String::from("x");
    for c in 0..field.dim() {
        write!(out, ",c{c}").unwrap();
    }
    out.push('\n');
    let xs = field.grid.centers();
    for i in 0..field.n() {
        write!(out, "{:.17e}", xs[i]).unwrap();
        for comp in &field.components {
            write!(out, ",{:.17e}", comp[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Re-reads a snapshot written by `export_field` as (x, components) columns.
pub fn import_field(text: &str) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| RelaxError::Config("empty snapshot".into()))?;
    let dim = header.split(',').count().saturating_sub(1);
    if dim == 0 || !header.starts_with("x,") {
        return Err(RelaxError::Config(format!(
            "unexpected snapshot header {header:?}"
        )));
    }
    let mut xs = Vec::new();
    let mut comps = vec![Vec::new(); dim];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| RelaxError::Config(format!("snapshot line {}: {e}", lineno + 2)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != dim + 1 {
            return Err(RelaxError::Config(format!(
                "snapshot line {} has {} columns, expected {}",
                lineno + 2,
                vals.len(),
                dim + 1
            )));
        }
        xs.push(vals[0]);
        for c in 0..dim {
            comps[c].push(vals[c + 1]);
        }
    }
    Ok((xs, comps))
}
