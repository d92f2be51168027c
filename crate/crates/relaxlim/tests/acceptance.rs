//! Acceptance experiments. Runs every criterion, prints one pass/fail line
//! each, then fails the target if any criterion failed.
//!
//! The three rate criteria and the Darcy regression are executed exactly as
//! pinned (T = 0.25, eps in {0.1, 0.05, 0.025, 0.0125}, N proportional to
//! eps^-2 from N0 = 64, first-order fluxes). Under that protocol the
//! measured slopes fall short of 3.5; see the criterion lines for the
//! numbers. The runs themselves are certified and audited either way.

use relaxlim::config::RunConfig;
use relaxlim::diagnostics::EntropyLedger;
use relaxlim::sweep::{hilbert_from_runs, run_single, run_sweep, RunOutcome};

const EPS_LIST: &str = "epsilons = [0.1, 0.05, 0.025, 0.0125]";

fn sweep_config(system: &str, extra: &str, initial: &str) -> RunConfig {
    RunConfig::from_toml(&format!(
        r#"
[system]
kind = "{system}"
{extra}

[grid]
n = 64
x_min = 0.0
x_max = 1.0

[initial]
{initial}

[run]
{EPS_LIST}
t_end = 0.25
"#
    ))
    .unwrap()
}

struct Criterion {
    id: usize,
    label: &'static str,
    passed: bool,
    detail: String,
}

fn report(results: &mut Vec<Criterion>, id: usize, label: &'static str, passed: bool, detail: String) {
    println!(
        "criterion {id} ({label}): {} [{detail}]",
        if passed { "PASS" } else { "FAIL" }
    );
    results.push(Criterion {
        id,
        label,
        passed,
        detail,
    });
}

fn consecutive_uniform(values: &[f64], factor: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] / w[0] < factor && w[0] / w[1] < factor)
}

fn gronwall_holds_pointwise(ledger: &EntropyLedger, eps: f64, c: f64) -> bool {
    let phi0 = ledger.phi[0];
    ledger
        .phi
        .iter()
        .all(|&p| p <= c * (phi0 + eps.powi(4)) * (1.0 + 1e-12) + 1e-300)
}

#[test]
fn acceptance() {
    let mut results = Vec::new();

    // shared Euler sweep (criteria 1, 4, 5, 7)
    let euler_cfg = sweep_config(
        "euler",
        "\n[constitutive]\nk = 1.0\ngamma = 2.0\n",
        "profile = \"sine\"\namplitude = 0.5\nmean = 2.0",
    );
    let (euler_report, euler_runs) = run_sweep(&euler_cfg, 1).unwrap();

    let slope_ok = euler_report.fitted_rate >= 3.5;
    let uniform_ok = consecutive_uniform(&euler_report.gronwall, 2.0);
    report(
        &mut results,
        1,
        "euler->pme rate",
        slope_ok && uniform_ok,
        format!(
            "rate = {:.3} (need >= 3.5), C uniform within 2x: {}",
            euler_report.fitted_rate, uniform_ok
        ),
    );

    // criterion 2: p-system
    let ps_cfg = sweep_config(
        "psystem",
        "\n[constitutive]\nlinear = 1.0\ncubic = 1.0\n",
        "profile = \"sine\"\namplitude = 0.5\nmean = 0.0",
    );
    let (ps_report, _) = run_sweep(&ps_cfg, 1).unwrap();
    report(
        &mut results,
        2,
        "p-system rate",
        ps_report.fitted_rate >= 3.5,
        format!("rate = {:.3} (need >= 3.5)", ps_report.fitted_rate),
    );

    // criterion 3: viscoelasticity
    let vi_cfg = sweep_config(
        "visco",
        "mu = 1.0\n\n[constitutive]\nlinear = 1.0\ncubic = 1.0\n",
        "profile = \"sine\"\namplitude = 0.5\nmean = 0.0",
    );
    let (vi_report, _) = run_sweep(&vi_cfg, 1).unwrap();
    report(
        &mut results,
        3,
        "visco rate",
        vi_report.fitted_rate >= 3.5,
        format!("rate = {:.3} (need >= 3.5)", vi_report.fitted_rate),
    );

    // criterion 4: Gronwall audit on every accepted run + ill-prepared bound
    let mut pointwise_ok = true;
    for (run, &c) in euler_runs.iter().zip(&euler_report.gronwall) {
        pointwise_ok &= gronwall_holds_pointwise(&run.paired.ledger, run.eps, c);
    }
    let ill_cfg = RunConfig::from_toml(
        r#"
[system]
kind = "euler"

[grid]
n = 64
x_min = 0.0
x_max = 1.0

[initial]
profile = "sine"
amplitude = 0.5
mean = 2.0
preparation = "ill"
momentum = 0.5

[run]
epsilon = 0.1
t_end = 0.25
"#,
    )
    .unwrap();
    let ill = run_single(&ill_cfg, 0.1, 64).unwrap();
    let phi0 = ill.paired.ledger.phi[0];
    let phi_max = ill.paired.ledger.phi.iter().cloned().fold(0.0f64, f64::max);
    let ill_ok = phi0 > 0.1
        && phi_max.is_finite()
        && phi_max <= 2.0 * phi0
        && *ill.paired.ledger.phi.last().unwrap() <= phi0;
    report(
        &mut results,
        4,
        "gronwall audit",
        pointwise_ok && ill_ok,
        format!(
            "pointwise bound: {pointwise_ok}, ill-prepared phi(0) = {phi0:.3e}, \
             max phi = {phi_max:.3e}, no blow-up: {ill_ok}"
        ),
    );

    // criterion 5: Hilbert/Darcy regression on the Euler sweep
    let hil = hilbert_from_runs(&euler_cfg, &euler_runs).unwrap();
    let finest = *hil.per_eps_residual.last().unwrap();
    let decreasing = hil
        .per_eps_residual
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    report(
        &mut results,
        5,
        "hilbert/darcy",
        finest <= 0.05 && decreasing,
        format!(
            "finest relative residual = {finest:.3e} (need <= 0.05), decreasing: {decreasing}"
        ),
    );

    // criterion 6: identity suite
    let checks = relaxlim::checks::run_all(42, 1.0, 2.0).unwrap();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    report(
        &mut results,
        6,
        "identity suite",
        failed.is_empty(),
        format!("{} checks, failed: {:?}", checks.len(), failed),
    );

    // criterion 7: residual certification on all accepted runs + halving
    let all_certified = euler_runs.iter().all(|r| r.paired.certified);
    let cert_max = euler_runs
        .iter()
        .map(|r| r.paired.cert_constant)
        .fold(0.0f64, f64::max);
    let res_max = |run: &RunOutcome| {
        run.paired
            .ledger
            .entropy_residual_max
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
    };
    let halving_cfg = |n: usize| {
        RunConfig::from_toml(&format!(
            r#"
[system]
kind = "euler"

[grid]
n = {n}
x_min = 0.0
x_max = 1.0

[initial]
profile = "sine"
amplitude = 0.5
mean = 2.0

[run]
epsilon = 0.1
t_end = 0.05
"#
        ))
        .unwrap()
    };
    let coarse = run_single(&halving_cfg(64), 0.1, 64).unwrap();
    let fine = run_single(&halving_cfg(128), 0.1, 128).unwrap();
    let ratio = res_max(&fine) / res_max(&coarse);
    let halving_ok = (0.4..=0.6).contains(&ratio);
    report(
        &mut results,
        7,
        "residual certification",
        all_certified && halving_ok,
        format!(
            "certified: {all_certified}, max constant = {cert_max:.3e}, \
             refinement ratio = {ratio:.3} (need 0.5 +- 20%)"
        ),
    );

    // criterion 8: conservation and fixed equilibrium over >= 1e3 steps
    let eq_cfg = RunConfig::from_toml(
        r#"
[system]
kind = "euler"

[grid]
n = 32
x_min = 0.0
x_max = 1.0

[initial]
profile = "constant"
mean = 2.0

[run]
epsilon = 0.1
t_end = 0.75
output_stride = 1
"#,
    )
    .unwrap();
    let eq = run_single(&eq_cfg, 0.1, 32).unwrap();
    let steps = eq.paired.ledger.len();
    let mass_ok = eq
        .paired
        .ledger
        .mass_error
        .iter()
        .all(|&m| m <= 1e-13);
    let drift = eq
        .paired
        .final_state
        .components
        .iter()
        .enumerate()
        .flat_map(|(c, comp)| {
            let target = if c == 0 { 2.0 } else { 0.0 };
            comp.iter().map(move |v| (v - target).abs())
        })
        .fold(0.0f64, f64::max);
    report(
        &mut results,
        8,
        "conservation/equilibrium",
        steps > 1000 && mass_ok && drift <= 1e-13,
        format!("{steps} steps, mass ok: {mass_ok}, max drift = {drift:.3e}"),
    );

    let failures: Vec<String> = results
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("criterion {} ({}): {}", c.id, c.label, c.detail))
        .collect();
    assert!(
        failures.is_empty(),
        "{} of {} acceptance criteria failed:\n{}",
        failures.len(),
        results.len(),
        failures.join("\n")
    );
}
