use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use lplab_cli::config::{load_config, Overrides};
use lplab_cli::instance::TranslationKind;
use lplab_cli::{generate_random_instance, init_threads, run, CliError, InstanceKind, InstanceSpec, RunReport};

#[derive(Parser)]
#[command(name = "lplab", version, about = "Affine L_p action laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write report.json, certificate.csv and plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's "out", else ./lplab-out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Emit a random (action, cocycle) instance as JSON.
    Generate {
        #[arg(long)]
        group: String,
        #[arg(long, value_parser = parse_kind)]
        kind: InstanceKind,
        #[arg(long)]
        atoms: Option<usize>,
        /// Comma-separated weights (nonsingular only).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Draw phases on the N-th roots of unity.
        #[arg(long)]
        phases: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        seed: u64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Pretty-print a stored report (a report.json or its directory).
    Report { path: PathBuf },
}

fn parse_kind(s: &str) -> Result<InstanceKind, String> {
    match s {
        "measure-preserving" => Ok(InstanceKind::MeasurePreserving),
        "nonsingular" => Ok(InstanceKind::Nonsingular),
        _ => Err(format!("expected measure-preserving or nonsingular, got {s:?}")),
    }
}

fn print_report(r: &RunReport) {
    println!("scenario {} (seed {})", r.scenario, r.seed.map_or("none".into(), |s| s.to_string()));
    for c in &r.checks {
        println!(
            "  {} {:<28} value {:<12.4e} threshold {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    match &r.first_failure {
        None if r.pass => println!("all {} checks passed", r.checks.len()),
        None => println!("no checks ran"),
        Some(name) => println!("first failing check: {name}"),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let result: Result<i32, CliError> = match cli.command {
        Command::Run { config, seed, out, tol } => (|| {
            let cfg = load_config(&config, Overrides { seed, tol })?;
            let out = out
                .or_else(|| cfg.out.as_ref().map(|o| cfg.base_dir.join(o)))
                .unwrap_or_else(|| PathBuf::from("lplab-out"));
            let start = Instant::now();
            let report = run(&cfg, &out)?;
            print_report(&report);
            println!("wrote {} in {:.2?}", out.display(), start.elapsed());
            Ok(if report.pass { 0 } else { 1 })
        })(),
        Command::Generate {
            group,
            kind,
            atoms,
            weights,
            phases,
            p,
            seed,
            out,
        } => (|| {
            let spec = InstanceSpec {
                group,
                kind,
                atoms,
                weights,
                phases,
                translation: TranslationKind::Random,
            };
            let inst = generate_random_instance(&spec, p, seed)?;
            let text = serde_json::to_string_pretty(&inst.to_doc())?;
            write_or_print(out.as_deref(), &text)?;
            Ok(0)
        })(),
        Command::Validate { config, seed, tol } => (|| {
            let cfg = load_config(&config, Overrides { seed, tol })?;
            println!("{}", serde_json::to_string_pretty(&cfg.echo())?);
            Ok(0)
        })(),
        Command::Report { path } => (|| {
            let path = if path.is_dir() { path.join("report.json") } else { path };
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let report: RunReport = serde_json::from_str(&text)?;
            print_report(&report);
            Ok(if report.pass { 0 } else { 1 })
        })(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
