//! Command-line interface of the `alv` binary.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, CONFIG_ENV};
use crate::error::{AlvError, Result};
use crate::registry::MODEL_HELP;
use crate::report::{build_inputs, cmd_dynamics, cmd_homotopy, cmd_selftest, cmd_verify, pair_fields, write_fields_csv, ReportDocument};

/// Exit code for configuration and IO errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "alv", version, about = "Checks Anosov Liouville criteria for pairs of contact forms")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Model, e.g. sol:catmap, sol:kappa=0.5, sl2.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Pair, e.g. standard, counterexample:A=1, closed, file:PATH, with optional
    /// +gauge:EXPR or +conformal:EXPR actions.
    #[arg(long, global = true)]
    pub pair: Option<String>,
    /// Samples per grid axis.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Positivity and equality tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Width of the bump transition.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub tau_steps: Option<usize>,
    /// Sweep range `a:b:n` in s.
    #[arg(long, global = true)]
    pub s_range: Option<String>,
    /// JSON report path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV field dump path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Omit timings so reports are byte-identical across runs.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model registry.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Contact, Liouville, AL and Reeb criteria, plus the sigma roundtrip.
    Verify,
    /// Positivity of the interpolating 4-dimensional Liouville family.
    Homotopy,
    /// Lyapunov exponents and volume averages along orbits.
    Dynamics,
    /// Consistency checks of the exterior calculus.
    Selftest,
    /// CSV dump of the pair coefficients and invariants.
    DumpFields,
}

#[derive(Debug, Subcommand)]
pub enum ModelsAction {
    List,
}

impl GlobalArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.model {
            c.model = v.clone();
        }
        if let Some(v) = &self.pair {
            c.pair = v.clone();
        }
        if let Some(v) = self.grid {
            c.grid = v;
        }
        if let Some(v) = self.tol {
            c.tolerances.tau_pos = v;
            c.tolerances.tau_eq = v;
        }
        if let Some(v) = self.epsilon {
            c.homotopy.epsilon = v;
        }
        if let Some(v) = self.tau_steps {
            c.homotopy.tau_steps = v;
        }
        if let Some(v) = &self.s_range {
            c.set_s_range(v)?;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.csv.is_some() {
            c.csv = self.csv.clone();
        }
        c.deterministic |= self.deterministic;
        c.validate()?;
        Ok(c)
    }
}

fn emit_report(doc: &ReportDocument, config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let json = doc.to_json();
    match &config.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => writeln!(stdout, "{json}")?,
    }
    Ok(())
}

fn dump_fields(config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let (_, pair) = build_inputs(config)?;
    let fields = pair_fields(&pair)?;
    match &config.csv {
        Some(path) => write_fields_csv(File::create(path)?, &fields),
        None => write_fields_csv(stdout, &fields),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    if let Command::Models { action: ModelsAction::List } = cli.command {
        for (spec, help) in MODEL_HELP {
            writeln!(stdout, "{spec:<14} {help}")?;
        }
        return Ok(0);
    }
    let config = cli.global.resolve()?;
    let doc = match cli.command {
        Command::Verify => {
            let doc = cmd_verify(&config)?;
            if let Some(path) = &config.csv {
                let (_, pair) = build_inputs(&config)?;
                write_fields_csv(File::create(path)?, &pair_fields(&pair)?)?;
            }
            doc
        }
        Command::Homotopy => cmd_homotopy(&config)?,
        Command::Dynamics => cmd_dynamics(&config)?,
        Command::Selftest => cmd_selftest(&config)?,
        Command::DumpFields => {
            dump_fields(&config, stdout)?;
            return Ok(0);
        }
        Command::Models { .. } => unreachable!(),
    };
    for f in &doc.failures {
        log::warn!("check failed: {f}");
    }
    emit_report(&doc, &config, stdout)?;
    Ok(doc.exit_code())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            EXIT_ERROR
        }
    }
}

fn report_error(e: &AlvError) {
    eprintln!("error: {e}");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("alv").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let cli = parse(&["verify", "--model", "sl2", "--tol", "1e-8", "--s-range", "0:3:64", "--deterministic"]);
        let c = cli.global.resolve().unwrap();
        assert_eq!(c.model, "sl2");
        assert_eq!(c.tolerances.tau_eq, 1e-8);
        assert_eq!((c.homotopy.s_max, c.homotopy.s_samples), (3.0, 64));
        assert!(c.deterministic);
    }

    #[test]
    fn config_errors_exit_two() {
        let mut sink = Vec::new();
        let cli = parse(&["homotopy", "--epsilon", "0.02"]);
        assert!(matches!(execute(&cli, &mut sink), Err(AlvError::EpsilonTooLarge { .. })));
        let cli = parse(&["verify", "--model", "torus"]);
        assert!(execute(&cli, &mut sink).is_err());
    }

    #[test]
    fn models_list() {
        let mut sink = Vec::new();
        assert_eq!(execute(&parse(&["models", "list"]), &mut sink).unwrap(), 0);
        assert!(String::from_utf8(sink).unwrap().contains("sol:catmap"));
    }
}
