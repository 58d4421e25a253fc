use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rotorkick::error::{Error, Result};
use rotorkick::scan::{
    default_population_taus, emit_population_report, run_cd_scan, run_delay_scan, run_ld_scan, train_preview,
    write_populations, write_preview, write_scan, write_trace, Handedness, OutputFormat, RunConfig, ScanResult,
};

#[derive(Parser)]
#[command(name = "rotorkick", version, about = "Rotational coherence scans of kicked linear rotors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linear-dichroism amplitude versus double-kick separation.
    LdScan(Common),
    /// Circular-dichroism amplitude versus chiral-train period.
    CdScan(Common),
    /// Full dichroism trace at a single period.
    DelayScan {
        #[command(flatten)]
        common: Common,
        /// Excitation used when no configuration file is given.
        #[arg(long, value_enum, default_value_t = Kind::DoubleKick)]
        excitation: Kind,
        /// Circular probe handedness.
        #[arg(long, value_enum)]
        probe: Option<Hand>,
    },
    /// Final rotational populations for selected periods.
    Populations {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Kind::DoubleKick)]
        excitation: Kind,
        /// Periods to report (repeatable); overrides `--tau`.
        #[arg(long = "taus", value_delimiter = ',')]
        taus: Vec<f64>,
    },
    /// Pulse-train inspection.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Prints a default configuration as JSON.
    Config {
        #[arg(long, value_enum, default_value_t = Kind::DoubleKick)]
        excitation: Kind,
    },
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Time-domain intensity, polarization angle and kick reduction.
    Preview {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Kind::Chiral)]
        excitation: Kind,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Kick separation or train period in fs.
    #[arg(long)]
    tau: Option<f64>,
    /// Chiral twist angle in degrees.
    #[arg(long)]
    alpha_deg: Option<f64>,
    /// Sinusoidal phase-mask amplitude.
    #[arg(long)]
    mod_amp: Option<f64>,
    /// Total kick strength P.
    #[arg(long)]
    kick_strength: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    DoubleKick,
    Chiral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Hand {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Common {
    fn config(&self, kind: Kind) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => match kind {
                Kind::DoubleKick => RunConfig::ld_default(),
                Kind::Chiral => RunConfig::cd_default(),
            },
        };
        let ex = &mut cfg.excitation;
        if let Some(t) = self.tau {
            ex.tau_fs = t;
        }
        if let Some(a) = self.alpha_deg {
            ex.alpha_deg = a;
        }
        if let Some(a) = self.mod_amp {
            ex.mod_amp = a;
        }
        if let Some(p) = self.kick_strength {
            ex.kick_strength = p;
        }
        if let Some(f) = self.format {
            cfg.output.format = match f {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn jobs(&self) -> Result<usize> {
        if self.jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        Ok(self.jobs)
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn warn_scan(result: &ScanResult) {
    for s in &result.series {
        for r in s.rows.iter().filter(|r| !r.norm_ok || !r.converged || r.error.is_some()) {
            eprintln!(
                "warning: {} τ = {} fs: norm_ok={} converged={}{}",
                s.name,
                r.tau_fs,
                r.norm_ok,
                r.converged,
                r.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default()
            );
        }
    }
    if !result.continuity_outliers.is_empty() {
        eprintln!("warning: continuity outliers at τ = {:?} fs", result.continuity_outliers);
    }
}

fn scan(common: &Common, kind: Kind, run: fn(&RunConfig, usize) -> Result<ScanResult>) -> Result<()> {
    let cfg = common.config(kind)?;
    let result = run(&cfg, common.jobs()?)?;
    warn_scan(&result);
    report(&write_scan(&common.out, &result, cfg.output.format)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::LdScan(c) => scan(&c, Kind::DoubleKick, run_ld_scan),
        Command::CdScan(c) => scan(&c, Kind::Chiral, run_cd_scan),
        Command::DelayScan {
            common,
            excitation,
            probe,
        } => {
            let mut cfg = common.config(excitation)?;
            if let Some(h) = probe {
                cfg.probe.handedness = match h {
                    Hand::Plus => Handedness::Plus,
                    Hand::Minus => Handedness::Minus,
                };
            }
            let result = run_delay_scan(&cfg)?;
            let s = &result.summary;
            if !s.norm_ok || !s.converged {
                eprintln!("warning: norm_ok={} converged={}", s.norm_ok, s.converged);
            }
            report(&write_trace(&common.out, &result, cfg.output.format)?);
            Ok(())
        }
        Command::Populations {
            common,
            excitation,
            taus,
        } => {
            let cfg = common.config(excitation)?;
            let taus = if !taus.is_empty() {
                taus
            } else if let Some(t) = common.tau {
                vec![t]
            } else {
                default_population_taus(&cfg)
            };
            let report_ = emit_population_report(&cfg, &taus)?;
            report(&write_populations(&common.out, &report_, cfg.output.format)?);
            Ok(())
        }
        Command::Train(TrainCommand::Preview { common, excitation }) => {
            let cfg = common.config(excitation)?;
            let preview = train_preview(&cfg)?;
            if let Some(e) = &preview.reduction_error {
                eprintln!("warning: {e}");
            }
            report(&write_preview(&common.out, &preview, cfg.output.format)?);
            Ok(())
        }
        Command::Config { excitation } => {
            let cfg = match excitation {
                Kind::DoubleKick => RunConfig::ld_default(),
                Kind::Chiral => RunConfig::cd_default(),
            };
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config_error() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
