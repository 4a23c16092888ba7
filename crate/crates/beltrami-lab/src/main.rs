use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beltrami_lab::config::{parse_config, RunConfig};
use beltrami_lab::run::{report_json, resolve_output_dir, run, RunReport};
use beltrami_lab::Error;

#[derive(Parser)]
#[command(name = "beltrami-lab", version, about = "Beltrami coefficient laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the coefficient on a grid and write the mapping.
    Solve(Common),
    /// Solve plus oracle comparison and residual diagnostics.
    Diagnose(Common),
    /// Pointwise and integral existence criteria.
    Criteria(Common),
    /// Asymptotic homogeneity profiles.
    Asymptotics(Common),
    /// Pretty-print a previously written report.json.
    Report { input: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Config file (key-value or JSON); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated truncation levels.
    #[arg(long)]
    schedule: Option<String>,
    /// Comma-separated op list; defaults depend on the subcommand.
    #[arg(long)]
    ops: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn build_config(common: &Common, default_ops: &[&str]) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &common.field {
        cfg.field = v.clone();
    }
    if let Some(v) = common.grid_n {
        cfg.grid_n = v;
    }
    if let Some(v) = common.half_width {
        cfg.half_width = v;
    }
    if let Some(v) = common.tol {
        cfg.tol = v;
    }
    if let Some(v) = &common.schedule {
        let mut levels = Vec::new();
        for part in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            levels.push(part.parse::<u32>().map_err(|_| Error::Config {
                key: "schedule".into(),
                line: 0,
                msg: format!("`{part}` is not an integer level"),
            })?);
        }
        cfg.schedule = levels;
    }
    if let Some(v) = &common.ops {
        cfg.ops = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(v) = &common.output_dir {
        cfg.output_dir = Some(v.clone());
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if cfg.ops.is_empty() {
        cfg.ops = default_ops.iter().map(|s| s.to_string()).collect();
    }
    resolve_output_dir(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn print_outcomes(report: &RunReport) {
    for op in &report.ops {
        match &op.error {
            None => println!("{}: ok", op.op),
            Some(e) => println!("{}: error: {e}", op.op),
        }
    }
}

fn execute(common: &Common, default_ops: &[&str]) -> ExitCode {
    let cfg = match build_config(common, default_ops) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok((report, _)) => {
            print_outcomes(&report);
            if cfg.output_dir.is_none() {
                print!("{}", report_json(&report));
            }
            if report.ops.iter().all(|o| o.ok) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::from(1)
        }
    }
}

fn show_report(input: &PathBuf) -> ExitCode {
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", input.display());
            return ExitCode::from(1);
        }
    };
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("not a report: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(ops) = value.get("ops").and_then(|v| v.as_array()) {
        for op in ops {
            let name = op.get("op").and_then(|v| v.as_str()).unwrap_or("?");
            let ok = op.get("ok").and_then(|v| v.as_bool()).unwrap_or(false);
            println!("{name}: {}", if ok { "ok" } else { "error" });
        }
    }
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Solve(c) => execute(&c, &["solve"]),
        Cmd::Diagnose(c) => execute(&c, &["solve", "oracle-compare"]),
        Cmd::Criteria(c) => execute(&c, &["lehto", "phi-divergence", "remark11", "infinity-tail"]),
        Cmd::Asymptotics(c) => execute(&c, &["homogeneity", "lavrentiev", "log-ratio", "theorem1"]),
        Cmd::Report { input } => show_report(&input),
    }
}
