use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qkd_fluct::cli::{self, ConfigError, Mode, RunConfig};

/// Finite-key decoy-state key rates under detector after-pulsing.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// `key = value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// sweep, deviations, optimize or validate; overrides the file.
    #[arg(long)]
    mode: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed for validate mode; overrides the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write a gnuplot script for the output (requires --out).
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match &args.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => return config_error(format!("{}: {e}", p.display())),
        },
        None => String::new(),
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            let path = args.config.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            return config_error(format!("{path}: {e}"));
        }
    };
    if let Some(m) = &args.mode {
        match m.parse::<Mode>() {
            Ok(m) => cfg.mode = m,
            Err(e) => return config_error(ConfigError { line: None, message: e }),
        }
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.plot.is_some() && args.out.is_none() {
        return config_error("--plot needs --out for the data file");
    }

    let output = match cli::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &args.out {
        Some(p) => std::fs::write(p, &output.text),
        None => {
            print!("{}", output.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("i/o error: {e}");
        return ExitCode::from(2);
    }
    if let (Some(plot), Some(out)) = (&args.plot, &args.out) {
        if let Some(script) = cli::gnuplot_script(&cfg, &out.display().to_string()) {
            if let Err(e) = std::fs::write(plot, script) {
                eprintln!("i/o error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if output.failed {
        eprintln!("validation failed");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
