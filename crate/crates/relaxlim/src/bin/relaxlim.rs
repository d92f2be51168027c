use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relaxlim::config::RunConfig;
use relaxlim::diagnostics::export_field;
use relaxlim::error::{RelaxError, Result};
use relaxlim::sweep::{hilbert_from_runs, run_single, run_sweep};
use relaxlim::systems::SystemName;

#[derive(Parser)]
#[command(name = "relaxlim", version, about = "Relative-entropy verification of diffusive relaxation limits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One paired relaxation/limit run; writes ledger.csv and optional snapshots
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full eps-sweep with rate fit and Gronwall audit
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Randomized identity, consistency and lemma checks
    Check {
        /// Optional config supplying the gamma-law parameters
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Print the version string
    Version,
}

fn out_dir(cfg: &RunConfig, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn cmd_run(config: &Path, out: &Option<PathBuf>) -> Result<()> {
    let cfg = RunConfig::from_path(config)?;
    let eps = cfg
        .run
        .epsilon
        .or_else(|| cfg.run.epsilons.as_ref().map(|l| l[0]))
        .expect("validated");
    let outcome = run_single(&cfg, eps, cfg.grid.n)?;
    let dir = out_dir(&cfg, out);
    write_out(&dir, "ledger.csv", &outcome.paired.ledger.export())?;
    if cfg.output.snapshots {
        write_out(&dir, "state_final.csv", &export_field(&outcome.paired.final_state))?;
        write_out(&dir, "bar_final.csv", &export_field(&outcome.paired.final_bar))?;
        write_out(
            &dir,
            "profile_final.csv",
            &export_field(&outcome.paired.final_profile),
        )?;
    }
    let phi = outcome.paired.ledger.phi.last().copied().unwrap_or(0.0);
    println!(
        "run eps={eps:.6e} n={} phi(T)={phi:.6e} cert_constant={:.6e}",
        outcome.n, outcome.paired.cert_constant
    );
    if !outcome.paired.certified {
        return Err(RelaxError::Certification(format!(
            "entropy residual constant {:.3e} exceeds the cap",
            outcome.paired.cert_constant
        )));
    }
    Ok(())
}

fn cmd_sweep(config: &Path, out: &Option<PathBuf>, workers: usize) -> Result<()> {
    let cfg = RunConfig::from_path(config)?;
    let n_eps = cfg.run.epsilons.as_ref().map_or(0, |l| l.len());
    if n_eps < 4 {
        return Err(RelaxError::Config(format!(
            "sweep needs at least 4 epsilon values for a rate fit, got {n_eps}"
        )));
    }
    let (report, outcomes) = run_sweep(&cfg, workers)?;
    let dir = out_dir(&cfg, out);
    write_out(&dir, "sweep.csv", &report.export())?;
    for (i, outcome) in outcomes.iter().enumerate() {
        write_out(
            &dir,
            &format!("ledger_{i:02}.csv"),
            &outcome.paired.ledger.export(),
        )?;
    }
    if cfg.build_system()?.name() == SystemName::EulerFriction {
        let hil = hilbert_from_runs(&cfg, &outcomes)?;
        let mut text = String::from("eps,residual\n");
        for (e, r) in report.epsilons.iter().zip(&hil.per_eps_residual) {
            text.push_str(&format!("{e:.17e},{r:.17e}\n"));
        }
        text.push_str(&format!("combined,{:.17e}\n", hil.residual_rel));
        write_out(&dir, "hilbert.csv", &text)?;
    }
    println!(
        "sweep rate={:.4} constant={:.4e} gronwall_max={:.4e}",
        report.fitted_rate,
        report.fitted_constant,
        report.gronwall.iter().cloned().fold(0.0f64, f64::max)
    );
    let uncert = outcomes.iter().find(|o| !o.paired.certified);
    if let Some(o) = uncert {
        return Err(RelaxError::Certification(format!(
            "run at eps={:.3e} failed residual certification ({:.3e})",
            o.eps, o.paired.cert_constant
        )));
    }
    Ok(())
}

fn cmd_check(config: &Option<PathBuf>, seed: u64) -> Result<bool> {
    let (k, gamma) = match config {
        Some(path) => {
            let cfg = RunConfig::from_path(path)?;
            (
                cfg.constitutive.k.unwrap_or(1.0),
                cfg.constitutive.gamma.unwrap_or(2.0),
            )
        }
        None => (1.0, 2.0),
    };
    let results = relaxlim::checks::run_all(seed, k, gamma)?;
    let mut all_passed = true;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("check {:<28} {} ({})", r.name, tag, r.detail);
        all_passed &= r.passed;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { config, out } => cmd_run(config, out),
        Cmd::Sweep {
            config,
            out,
            workers,
        } => cmd_sweep(config, out, *workers),
        Cmd::Check { config, seed } => match cmd_check(config, *seed) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("error: one or more checks failed");
                return ExitCode::from(1);
            }
            Err(e) => Err(e),
        },
        Cmd::Version => {
            println!("relaxlim {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
