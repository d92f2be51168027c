//! Run orchestration: single paired runs and eps-sweeps with one worker per
//! sweep point. Results are merged by index, so worker count never changes
//! the output.

use std::sync::Mutex;

use crate::config::RunConfig;
use crate::diagnostics::{gronwall_audit, hilbert_check, restrict, HilbertReport, SweepReport};
use crate::error::{RelaxError, Result};
use crate::solver::{run_paired, FluxScheme, PairedRun, SolverConfig, SourceScheme};
use crate::systems::RelaxationSystem;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub eps: f64,
    pub n: usize,
    pub paired: PairedRun,
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        cfl: cfg.run.cfl,
        flux: match cfg.run.flux.as_str() {
            "hll" => FluxScheme::Hll,
            _ => FluxScheme::Rusanov,
        },
        source: match cfg.run.source.as_str() {
            "implicit" => SourceScheme::ImplicitEuler,
            _ => SourceScheme::ExactExponential,
        },
        t_end: cfg.run.t_end,
        output_stride: cfg.run.output_stride,
        cert_cap: cfg.run.cert_cap,
    }
}

/// One paired run at the given eps and cell count.
pub fn run_single(cfg: &RunConfig, eps: f64, n: usize) -> Result<RunOutcome> {
    let sys = cfg.build_system()?;
    let profile = cfg.initial_limit_profile(&sys, n)?;
    let state = cfg.initial_relaxation_state(&sys, n, eps)?;
    let scfg = solver_config(cfg);
    let paired = run_paired(&sys, state, profile, eps, &scfg)?;
    Ok(RunOutcome { eps, n, paired })
}

/// Runs every sweep point (at most `workers` concurrently) and aggregates the
/// report. Output is bit-identical for any worker count.
pub fn run_sweep(cfg: &RunConfig, workers: usize) -> Result<(SweepReport, Vec<RunOutcome>)> {
    let eps_list = cfg
        .run
        .epsilons
        .clone()
        .ok_or_else(|| RelaxError::Config("sweep needs run.epsilons".into()))?;
    let jobs: Vec<(usize, f64, usize)> = eps_list
        .iter()
        .enumerate()
        .map(|(i, &e)| (i, e, cfg.cells_for(&eps_list, i)))
        .collect();

    let slots: Mutex<Vec<Option<Result<RunOutcome>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = Mutex::new(0usize);
    let workers = workers.max(1).min(jobs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut guard = next.lock().unwrap();
                    if *guard >= jobs.len() {
                        return;
                    }
                    let i = *guard;
                    *guard += 1;
                    i
                };
                let (idx, eps, n) = jobs[i];
                let out = run_single(cfg, eps, n);
                slots.lock().unwrap()[idx] = Some(out);
            });
        }
    });

    let mut outcomes = Vec::with_capacity(jobs.len());
    for slot in slots.into_inner().unwrap() {
        outcomes.push(slot.expect("worker left a job unfinished")?);
    }

    let phi_at_t: Vec<f64> = outcomes
        .iter()
        .map(|o| *o.paired.ledger.phi.last().unwrap())
        .collect();
    let gronwall: Vec<f64> = outcomes
        .iter()
        .map(|o| gronwall_audit(&o.paired.ledger, o.eps, f64::INFINITY).c)
        .collect();
    let cert: Vec<f64> = outcomes.iter().map(|o| o.paired.cert_constant).collect();
    let ledgers = outcomes.iter().map(|o| o.paired.ledger.clone()).collect();
    let report = SweepReport::build(eps_list, phi_at_t, gronwall, cert, ledgers)?;
    Ok((report, outcomes))
}

/// Restricts a field to the coarsest sweep grid (cell counts must nest).
fn to_coarse(data: &[f64], n_coarse: usize) -> Result<Vec<f64>> {
    if data.len() == n_coarse {
        return Ok(data.to_vec());
    }
    if data.len() % n_coarse != 0 {
        return Err(RelaxError::Config(format!(
            "sweep grids do not nest: {} vs {}",
            data.len(),
            n_coarse
        )));
    }
    let ratio = data.len() / n_coarse;
    if ratio % 2 != 0 {
        return Err(RelaxError::Config(format!(
            "grid refinement ratio {ratio} must be even for restriction"
        )));
    }
    Ok(restrict(data, ratio))
}

/// Darcy/Hilbert verification data from an Euler sweep: final momenta of every
/// run and Dx p(rho_bar(T)) from the finest run, all on the coarsest grid.
pub fn hilbert_from_runs(cfg: &RunConfig, outcomes: &[RunOutcome]) -> Result<HilbertReport> {
    let sys = cfg.build_system()?;
    let RelaxationSystem::EulerFriction { p, .. } = &sys else {
        return Err(RelaxError::Config(
            "the Hilbert/Darcy check applies to the Euler system".into(),
        ));
    };
    let n0 = outcomes
        .iter()
        .map(|o| o.n)
        .min()
        .ok_or_else(|| RelaxError::Config("empty sweep".into()))?;
    let epsilons: Vec<f64> = outcomes.iter().map(|o| o.eps).collect();
    let momenta: Vec<Vec<f64>> = outcomes
        .iter()
        .map(|o| to_coarse(&o.paired.final_state.components[1], n0))
        .collect::<Result<_>>()?;

    let finest = outcomes
        .iter()
        .max_by_key(|o| o.n)
        .expect("nonempty checked above");
    let prof = &finest.paired.final_profile;
    let rho = &prof.components[0];
    let (gl, gr) = prof.grid.ghosts(rho, 0);
    let pv: Vec<f64> = rho.iter().map(|&r| p.p(r)).collect();
    let dpx = prof.grid.dx_ext(&pv, p.p(gl), p.p(gr));
    let darcy_rhs = to_coarse(&dpx, n0)?;
    hilbert_check(&epsilons, &momenta, &darcy_rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(epsilons: &str) -> RunConfig {
        RunConfig::from_toml(&format!(
            r#"
            [system]
            kind = "euler"

            [grid]
            n = 32
            x_min = 0.0
            x_max = 1.0

            [initial]
            profile = "sine"
            amplitude = 0.25
            mean = 2.0

            [run]
            {epsilons}
            t_end = 0.002
            output_stride = 8
        "#
        ))
        .unwrap()
    }

    #[test]
    fn single_run_produces_finite_ledger() {
        let cfg = config("epsilon = 0.1");
        let out = run_single(&cfg, 0.1, 32).unwrap();
        assert!(out.paired.ledger.len() >= 2);
        assert!(out.paired.ledger.phi.iter().all(|p| p.is_finite()));
        assert!(out.paired.certified);
    }

    #[test]
    fn sweep_is_deterministic_across_worker_counts() {
        let cfg = config("epsilons = [0.4, 0.2]");
        let (r1, _) = run_sweep(&cfg, 1).unwrap();
        let (r2, _) = run_sweep(&cfg, 4).unwrap();
        assert_eq!(r1.phi_at_t, r2.phi_at_t);
        assert_eq!(r1.fitted_rate, r2.fitted_rate);
        for (a, b) in r1.ledgers.iter().zip(&r2.ledgers) {
            assert_eq!(a, b);
        }
    }
}
