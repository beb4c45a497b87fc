use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use pcp_bench::config::{Scenario, ScenarioConfig};
use pcp_bench::report;
use pcp_bench::scenarios::{self, write_series, write_snapshots};

#[derive(Parser)]
#[command(name = "pcp-bench", about = "Closest-point particle redistancing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its result files.
    Run {
        scenario: Scenario,
        /// Particle spacings (e.g. 0.03125 or 1/32).
        #[arg(long, num_args = 1.., value_parser = parse_spacing)]
        h: Option<Vec<f64>>,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, num_args = 1..)]
        alpha: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Resolutions used in the original experiments.
        #[arg(long)]
        full_scale: bool,
        /// TOML file overriding the defaults and the flags above.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_spacing(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            a / b
        }
        None => s.parse().map_err(|e| format!("{e}"))?,
    };
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("invalid spacing {s}"))
    }
}

fn main() -> anyhow::Result<()> {
    let Command::Run { scenario, h, degree, alpha, seed, out, full_scale, config } = Cli::parse().command;
    let mut cfg = ScenarioConfig::defaults(scenario, full_scale);
    if let Some(h) = h {
        cfg.h = h;
    }
    if let Some(d) = degree {
        cfg.degree = d;
    }
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    if let Some(path) = config {
        cfg = cfg.merge_file(&path)?;
    }
    cfg.validate()?;
    let result = scenarios::run_scenario(&cfg)?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let stem = cfg.scenario.name();
    report::write_csv_file(&result.rows, &cfg.out.join(format!("{stem}.csv")))?;
    let mut diag = std::io::BufWriter::new(std::fs::File::create(cfg.out.join(format!("{stem}_diagnostics.jsonl")))?);
    for line in &result.diagnostics {
        serde_json::to_writer(&mut diag, line)?;
        diag.write_all(b"\n")?;
    }
    diag.flush()?;
    if !result.series.is_empty() {
        write_series(&result.series, &cfg.out.join(format!("{stem}_series.csv")))?;
    }
    if !result.snapshots.is_empty() {
        write_snapshots(&result.snapshots, &cfg.out.join(format!("{stem}_snapshot.csv")))?;
    }
    print!("{}", report::summary(&result.rows));
    for (run, secs) in &result.timing {
        eprintln!("{run}: {secs:.2} s");
    }
    Ok(())
}
