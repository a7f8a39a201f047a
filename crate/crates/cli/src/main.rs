use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use roadfront::waves::WaveKind;
use roadfront_harness::experiments::{spectra_report, wave_profiles};
use roadfront_harness::{
    run_experiment, run_with, ExperimentConfig, ExperimentKind, Report, RunSettings,
};

#[derive(Parser)]
#[command(
    name = "roadfront",
    version,
    about = "Road-field reaction-diffusion experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; defaults to `output` in the config.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, short, default_value_t = 0)]
    jobs: usize,
    /// Replace the contents of a non-empty output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveArg {
    FullSystem,
    RobinOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named by the config's `kind`.
    Run(Common),
    /// Bisect a threshold (`road_quench_threshold` or `mu_thresholds_check`).
    Bisect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
    /// Compute travelling waves at every sweep point.
    Wave {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "full-system")]
        kind: WaveArg,
    },
    /// Dispersion relation and spectral constants; no time stepping.
    Spectra(Common),
    /// Residual certificates (`certificate_check`).
    Certify(Common),
}

fn load(common: &Common) -> anyhow::Result<ExperimentConfig> {
    ExperimentConfig::load(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))
}

fn settings<'a>(
    common: &Common,
    cfg: &'a ExperimentConfig,
    out: &'a Option<PathBuf>,
) -> RunSettings<'a> {
    RunSettings {
        out: out.as_deref().or(cfg.output.as_deref()),
        force: common.force,
        jobs: common.jobs,
    }
}

fn require(cfg: &ExperimentConfig, kinds: &[ExperimentKind], path: &Path) -> anyhow::Result<()> {
    if !kinds.contains(&cfg.kind) {
        let names: Vec<_> = kinds.iter().map(|k| k.as_str()).collect();
        bail!(
            "{}: kind `{}` is not one of {}",
            path.display(),
            cfg.kind.as_str(),
            names.join(", ")
        );
    }
    Ok(())
}

fn execute(cmd: Command) -> anyhow::Result<Report> {
    let report = match cmd {
        Command::Run(c) => {
            let cfg = load(&c)?;
            run_experiment(&cfg, &settings(&c, &cfg, &c.out))?
        }
        Command::Bisect { common: c, lo, hi } => {
            let mut cfg = load(&c)?;
            require(
                &cfg,
                &[
                    ExperimentKind::RoadQuenchThreshold,
                    ExperimentKind::MuThresholdsCheck,
                ],
                &c.config,
            )?;
            if let Some(b) = cfg.bisect.as_mut() {
                b.lo = lo.unwrap_or(b.lo);
                b.hi = hi.unwrap_or(b.hi);
            }
            run_experiment(&cfg, &settings(&c, &cfg, &c.out))?
        }
        Command::Wave { common: c, kind } => {
            let cfg = load(&c)?;
            let kind = match kind {
                WaveArg::FullSystem => WaveKind::FullSystem,
                WaveArg::RobinOnly => WaveKind::RobinOnly,
            };
            run_with(&cfg, &settings(&c, &cfg, &c.out), |cfg| {
                wave_profiles(cfg, kind)
            })?
        }
        Command::Spectra(c) => {
            let cfg = load(&c)?;
            run_with(&cfg, &settings(&c, &cfg, &c.out), spectra_report)?
        }
        Command::Certify(c) => {
            let cfg = load(&c)?;
            require(&cfg, &[ExperimentKind::CertificateCheck], &c.config)?;
            run_experiment(&cfg, &settings(&c, &cfg, &c.out))?
        }
    };
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(report) => {
            for c in &report.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("{tag} {} = {:e} ({})", c.name, c.value, c.bound);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
