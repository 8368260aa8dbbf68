use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use psc_plumb::par::Exec;
use psc_plumb::pipeline::{
    eta_report, report_lines, run_construction, topo_report, verify, write_outputs, EtaConfig, PipelineConfig, PipelineError,
};
use psc_plumb::plumbing::PlumbingTree;

#[derive(Parser)]
#[command(name = "psc-plumb", version, about = "Build and check positive scalar curvature profiles for plumbing trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config; defaults are used for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Recorded in the certificate.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Profile grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Boundary-condition tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Run without the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the construction over a plumbing tree.
    Construct {
        #[command(flatten)]
        common: Common,
        /// Plumbing tree JSON; a single trivial vertex when omitted.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-check a stored step without reconstructing it.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Output directory of a previous `construct`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        step: usize,
        /// Explicit profile CSV, overriding `--out`/`--step`.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Explicit step parameters JSON, overriding `--out`/`--step`.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Intersection form, Arf invariant and eta ledger of a tree.
    Topo {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Eta ledger for a list of chain lengths.
    Eta {
        /// JSON with `k`, `lengths` and `convention` (`paper` or `chain`).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print one line per check of a certificate.
    Report {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

fn load_config(c: &Common) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::from_json(&read(p)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(g) = c.grid {
        cfg.grid = g;
    }
    if let Some(t) = c.tol {
        cfg.bc_tol = t;
    }
    Ok(cfg)
}

fn exec(c: &Common) -> Exec {
    if c.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn verdict(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode, PipelineError> {
    match cli.command {
        Command::Construct { common, tree, out } => {
            let cfg = load_config(&common)?;
            let tree = match tree {
                Some(p) => PlumbingTree::from_json(&read(&p)?)?,
                None => PlumbingTree::trivial_vertex(cfg.v_spec.p, cfg.v_spec.q),
            };
            let start = Instant::now();
            let result = run_construction(&tree, &cfg.v_spec, &cfg, common.seed, exec(&common))?;
            write_outputs(&out, &result)?;
            for f in &result.certificate.failed_checks {
                eprintln!("failed: {f}");
            }
            eprintln!(
                "{} steps in {:.2}s, certificate {} written to {}",
                result.certificate.steps.len(),
                start.elapsed().as_secs_f64(),
                if result.certificate.passed { "PASS" } else { "FAIL" },
                out.join("certificate.json").display()
            );
            Ok(verdict(result.certificate.passed))
        }
        Command::Verify { common, out, step, profile, params } => {
            let profile = profile.unwrap_or_else(|| out.join(format!("profiles/step-{step}.csv")));
            let params = params.unwrap_or_else(|| out.join(format!("profiles/step-{step}.json")));
            let cert = verify(&profile, &params, common.seed, exec(&common))?;
            print!("{}", cert.to_json()?);
            Ok(verdict(cert.passed))
        }
        Command::Topo { tree } => {
            let tree = PlumbingTree::from_json(&read(&tree)?)?;
            println!("{}", serde_json::to_string_pretty(&topo_report(&tree)?)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Eta { config } => {
            let cfg: EtaConfig = match config {
                Some(p) => serde_json::from_str(&read(&p)?)?,
                None => EtaConfig::default(),
            };
            println!("{}", serde_json::to_string_pretty(&eta_report(&cfg)?)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { out } => {
            let cert: serde_json::Value = serde_json::from_str(&read(&out.join("certificate.json"))?)?;
            for line in report_lines(&cert)? {
                println!("{line}");
            }
            Ok(verdict(cert["passed"].as_bool() == Some(true)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
