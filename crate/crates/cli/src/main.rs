use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tamelab_cli::commands::{self, GenParams, McParams, Output, TransformParams};
use tamelab_cli::config::RunConfig;
use tamelab_core::error::Result;

/// Tameness checks, automorphism constructions and Monte-Carlo estimates for discrete
/// sequences in ℂⁿ, ℂⁿ∖{0}, Δ×ℂ and SLₙ(ℂ).
#[derive(Parser, Debug)]
#[command(name = "tamelab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with RunConfig keys (seed, det_tol, min_gap, distinct_tol, samples, probes, max_fiber).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for `report`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report on stdout instead of a summary line.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true)]
    min_gap: Option<f64>,
    #[arg(long, global = true)]
    det_tol: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    probes: Option<usize>,
    #[arg(long, global = true)]
    max_fiber: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sequence family.
    Gen {
        /// wellplaced2, diagtorus, sl2-gauss, cn-powers, punctured-accumulate or discplane-base.
        family: String,
        #[arg(long)]
        n: Option<usize>,
        /// Number of terms.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        /// q, qi or q-<d>.
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        height: Option<u32>,
        /// constant, boundary or interior.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Run a tameness criterion on a sequence file.
    Check {
        seq: PathBuf,
        /// rr-series, dp-classify, punctured, wellplaced, pi-tame, one-param or discreteness.
        criterion: String,
        /// diagonal or unipotent, for one-param.
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// Apply a construction and re-check its postcondition.
    Transform {
        seq: PathBuf,
        transform: String,
        /// "1+a", "identity" or a JSON lambda form.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        partner: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        tries: Option<usize>,
        /// general or even, for center-separate.
        #[arg(long)]
        family: Option<String>,
        /// Constant height for the push transforms.
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        axis: Option<usize>,
        #[arg(long)]
        driven_by: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        coeffs: Option<Vec<f64>>,
    },
    /// Monte-Carlo estimates: measure, g, threshold, omega or select.
    Mc {
        #[arg(value_name = "ACTION")]
        what: String,
        /// Radii of the probe points diag(R, 1/R).
        #[arg(long = "R", value_delimiter = ',')]
        radii: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        seq: Option<PathBuf>,
        /// conjugation or left-translation.
        #[arg(long)]
        action: Option<String>,
    },
    /// Run the acceptance experiments and write one report per criterion.
    Report {
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

fn config(g: &Global) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    cfg.min_gap = g.min_gap.unwrap_or(cfg.min_gap);
    cfg.det_tol = g.det_tol.unwrap_or(cfg.det_tol);
    cfg.samples = g.samples.unwrap_or(cfg.samples);
    cfg.probes = g.probes.unwrap_or(cfg.probes);
    cfg.max_fiber = g.max_fiber.unwrap_or(cfg.max_fiber);
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<Output> {
    let cfg = config(&cli.global)?;
    let out = cli.global.out.as_deref();
    match cli.command {
        Command::Gen { family, n, k, alpha, field, height, variant } => {
            commands::gen(&family, &GenParams { n, k, alpha, field, height, variant }, out)
        }
        Command::Check { seq, criterion, subgroup } => commands::check(&seq, &criterion, subgroup.as_deref(), &cfg),
        Command::Transform { seq, transform, lambda, partner, target, tries, family, zeta, axis, driven_by, coeffs } => {
            let p = TransformParams { lambda, partner, target, tries, family, zeta, axis, driven_by, coeffs };
            commands::transform(&seq, &transform, &p, &cfg, out)
        }
        Command::Mc { what, radii, r, levels, seq, action } => {
            commands::mc(&what, &McParams { radii, r, levels, seq, action }, &cfg, out)
        }
        Command::Report { criteria } => {
            let ids: Vec<u8> = if criteria.is_empty() { (1..=15).collect() } else { criteria };
            commands::report(&ids, &cfg, out)
        }
    }
}

fn write_files(files: &[(PathBuf, String)]) -> std::io::Result<()> {
    for (path, text) in files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.global.json;
    let wrote_out = cli.global.out.is_some();
    match dispatch(cli) {
        Ok(o) => {
            if let Err(e) = write_files(&o.files) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if json {
                print!("{}", commands::pretty(&o.report));
            } else if let (false, Some(text)) = (wrote_out, &o.stdout) {
                print!("{text}");
            } else {
                println!("{}", o.summary);
                for (p, _) in &o.files {
                    eprintln!("wrote {}", display(p));
                }
            }
            ExitCode::from(o.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
