//! `qsl`: distances, rate bounds, and speed limits for unitary evolution,
//! driven by JSON problem files and seeded random campaigns.
//!
//! Exit codes: 0 success / no violation, 1 a bound comparison failed,
//! 2 input or usage error.

mod problem;

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;

use qsl_core::bounds::{ml_rate_bound, mt_rate_bound, BoundValue};
use qsl_core::evolution::PureState;
use qsl_core::harness::{run_verify, CampaignSpec};
use qsl_core::linalg::{random_hermitian, random_pure_state};
use qsl_core::metrics::{overlap_derivative, DistanceSample, OverlapProfile};
use qsl_core::speed_limits::{check_saturation, optimal_state, SpeedLimitReport};
use qsl_core::{Config, Error, Generator};

use problem::{echo_problem, load_problem, Problem, ProblemFile};

/// Default grid density for the orthogonality search; sweeps default to 256.
const SEARCH_GRID: usize = 4096;

#[derive(Parser)]
#[command(
    name = "qsl",
    version,
    about = "Speed limits of unitary quantum evolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate overlap, distances, rates, and rate bounds along a sweep
    Sweep {
        #[arg(long)]
        problem: PathBuf,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override hbar from the problem file
        #[arg(long)]
        hbar: Option<f64>,
    },
    /// Report the minimum-time bounds and the orthogonality time
    SpeedLimits {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        hbar: Option<f64>,
    },
    /// Run the randomized bound, counterexample, and purification campaigns
    Verify {
        #[arg(long, default_value_t = CampaignSpec::default().n_instances)]
        instances: usize,
        /// Comma-separated list of dimensions, cycled over instances
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = Config::default().rng_seed)]
        seed: u64,
        /// Theta grid points per instance
        #[arg(long, default_value_t = CampaignSpec::default().grid_points)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        hbar: Option<f64>,
    },
    /// Tabulate the overlap derivative on a log-spaced grid from small theta
    Counterexample {
        /// Problem file; omit to generate a random instance from --seed
        #[arg(long, conflicts_with = "seed")]
        problem: Option<PathBuf>,
        /// Seed for a random instance (used when --problem is omitted)
        #[arg(long)]
        seed: Option<u64>,
        /// Dimension of the random instance
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        hbar: Option<f64>,
    },
    /// Construct the optimal state for a generator and check saturation
    Optimal {
        /// Problem file; only the generator is used
        #[arg(long)]
        problem: PathBuf,
        /// Relative phase between the extreme eigenvectors
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        hbar: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Sweep { problem, out, hbar } => cmd_sweep(&problem, out.as_deref(), hbar),
        Command::SpeedLimits { problem, out, hbar } => {
            cmd_speed_limits(&problem, out.as_deref(), hbar)
        }
        Command::Verify {
            instances,
            dims,
            seed,
            grid,
            out,
            hbar,
        } => cmd_verify(instances, dims, seed, grid, out.as_deref(), hbar),
        Command::Counterexample {
            problem,
            seed,
            dim,
            out,
            hbar,
        } => cmd_counterexample(problem.as_deref(), seed, dim, out.as_deref(), hbar),
        Command::Optimal {
            problem,
            phi,
            out,
            hbar,
        } => cmd_optimal(&problem, phi, out.as_deref(), hbar),
    }
}

fn write_output(out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, contents)
            .with_context(|| format!("cannot write {}", path.display())),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .context("cannot write to stdout"),
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt_sig(x: f64) -> String {
    format!("{x:.16e}")
}

fn config_with(hbar: f64) -> Config {
    Config {
        hbar,
        ..Config::default()
    }
}

fn require_state(problem: &Problem) -> anyhow::Result<&PureState> {
    problem.psi0.as_ref().ok_or_else(|| {
        anyhow::anyhow!("problem file needs psi0 (amplitudes, \"optimal\", or {{\"seed\": n}})")
    })
}

/// Sweep span: the file's theta_max, else one standard-deviation period.
fn default_span(g: &Generator, psi: &PureState, cfg: &Config) -> anyhow::Result<f64> {
    let profile = OverlapProfile::new(g, psi)?;
    let dk = profile.delta_k();
    Ok(if dk > 1e-12 {
        FRAC_PI_2 * cfg.hbar / dk
    } else {
        PI
    })
}

fn cmd_sweep(path: &Path, out: Option<&Path>, hbar: Option<f64>) -> anyhow::Result<u8> {
    let problem = load_problem(path, hbar)?;
    let cfg = config_with(problem.hbar);
    let psi = require_state(&problem)?;
    let g = &problem.generator;
    let theta_max = match problem.theta_max {
        Some(v) => v,
        None => default_span(g, psi, &cfg)?,
    };
    let grid = problem.grid_points.unwrap_or(256);

    let mut csv = String::from(
        "theta,overlap,s_w,s,ds_dtheta_fd,ds_dtheta_analytic,mt_bound,ml_bound,fs_path_length\n",
    );
    let mut violated = false;
    for j in 1..=grid {
        let theta = theta_max * j as f64 / grid as f64;
        let sample = DistanceSample::compute(g, psi, theta, &cfg)?;
        let mt = mt_rate_bound(g, psi, &cfg)?;
        let ml = ml_rate_bound(g, psi, theta, &cfg)?;

        if sample.ds_dtheta_fd > mt + cfg.tol_bound {
            violated = true;
        }
        let in_band = sample.s > cfg.sing_margin && sample.s < PI - cfg.sing_margin;
        if in_band && !ml.admits(sample.ds_dtheta_fd, cfg.tol_bound) {
            violated = true;
        }

        let analytic = sample.ds_dtheta_analytic.map(fmt_sig).unwrap_or_default();
        let ml_text = match ml {
            BoundValue::Finite(x) => fmt_sig(x),
            BoundValue::Infinite => "inf".to_string(),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(sample.theta),
            fmt_sig(sample.overlap),
            fmt_sig(sample.s_w),
            fmt_sig(sample.s),
            fmt_sig(sample.ds_dtheta_fd),
            analytic,
            fmt_sig(mt),
            ml_text,
            fmt_sig(sample.path_length),
        ));
    }
    write_output(out, &csv)?;
    Ok(if violated { 1 } else { 0 })
}

fn cmd_speed_limits(path: &Path, out: Option<&Path>, hbar: Option<f64>) -> anyhow::Result<u8> {
    let problem = load_problem(path, hbar)?;
    let cfg = config_with(problem.hbar);
    let psi = require_state(&problem)?;
    let grid = problem
        .grid_points
        .map(|g| g.max(16))
        .unwrap_or(SEARCH_GRID);
    let report = SpeedLimitReport::compute(&problem.generator, psi, problem.theta_max, grid, &cfg)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(out, &text)?;
    Ok(0)
}

fn cmd_verify(
    instances: usize,
    dims: Vec<usize>,
    seed: u64,
    grid: usize,
    out: Option<&Path>,
    hbar: Option<f64>,
) -> anyhow::Result<u8> {
    let spec = CampaignSpec {
        n_instances: instances,
        dims,
        grid_points: grid,
        seed,
        ..CampaignSpec::default()
    };
    spec.validate()?;
    let cfg = config_with(hbar.unwrap_or(1.0));
    let report = run_verify(&spec, &cfg);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(out, &text)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_counterexample(
    path: Option<&Path>,
    seed: Option<u64>,
    dim: usize,
    out: Option<&Path>,
    hbar: Option<f64>,
) -> anyhow::Result<u8> {
    let (g, psi, cfg, theta_max, grid) = match path {
        Some(path) => {
            let problem = load_problem(path, hbar)?;
            let cfg = config_with(problem.hbar);
            let psi = require_state(&problem)?.clone();
            let theta_max = match problem.theta_max {
                Some(v) => v,
                None => 4.0 * default_span(&problem.generator, &psi, &cfg)?,
            };
            let grid = problem.grid_points.unwrap_or(256);
            (problem.generator, psi, cfg, theta_max, grid)
        }
        None => {
            let seed = seed.ok_or_else(|| anyhow::anyhow!("pass --problem or --seed"))?;
            if dim < 2 {
                bail!("--dim must be at least 2, got {dim}");
            }
            let g = random_hermitian(dim, seed);
            let psi = random_pure_state(dim, seed.wrapping_add(1));
            let cfg = config_with(hbar.unwrap_or(1.0));
            let theta_max = 4.0 * default_span(&g, &psi, &cfg)?;
            (g, psi, cfg, theta_max, 256)
        }
    };

    const THETA_MIN: f64 = 1e-5;
    if theta_max <= THETA_MIN {
        bail!("theta_max must exceed {THETA_MIN:e}, got {theta_max}");
    }
    let profile = OverlapProfile::new(&g, &psi)?;
    let stationary = profile.delta_k() <= 1e-12;
    let note = if stationary { "stationary" } else { "" };

    let mut csv = String::from("theta,overlap,d_overlap_dtheta,note\n");
    let mut first_derivative: Option<f64> = None;
    let ratio = theta_max / THETA_MIN;
    for k in 0..grid {
        let theta = THETA_MIN * ratio.powf(k as f64 / (grid - 1) as f64);
        let ov = profile.overlap(theta, cfg.hbar);
        let (derivative_text, row_note) = match overlap_derivative(&g, &psi, theta, &cfg) {
            Ok(derivative) => {
                if first_derivative.is_none() {
                    first_derivative = Some(derivative);
                }
                (fmt_sig(derivative), note)
            }
            Err(Error::SingularOverlap(_)) => (String::new(), "singular overlap"),
            Err(e) => return Err(e.into()),
        };
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig(theta),
            fmt_sig(ov),
            derivative_text,
            row_note,
        ));
    }
    write_output(out, &csv)?;

    // The overlap starts at unity, so its initial slope cannot be positive;
    // a non-negative first row signals a broken build.
    if !stationary && first_derivative.is_some_and(|d| d >= 0.0) {
        eprintln!("counterexample check failed: derivative at small theta is non-negative");
        return Ok(1);
    }
    Ok(0)
}

#[derive(Serialize)]
struct OptimalReport {
    state: Vec<[f64; 2]>,
    saturates_mt: bool,
    geodesic: bool,
    speed_limits: SpeedLimitReport,
    /// Ready-to-use problem file for the constructed state.
    problem: ProblemFile,
}

fn cmd_optimal(path: &Path, phi: f64, out: Option<&Path>, hbar: Option<f64>) -> anyhow::Result<u8> {
    let problem = load_problem(path, hbar)?;
    let cfg = config_with(problem.hbar);
    let g = &problem.generator;
    let psi = optimal_state(g, phi)?;
    let saturation = check_saturation(g, &psi, &cfg)?;
    let grid = problem
        .grid_points
        .map(|g| g.max(16))
        .unwrap_or(SEARCH_GRID);
    let speed_limits = SpeedLimitReport::compute(g, &psi, problem.theta_max, grid, &cfg)?;
    let report = OptimalReport {
        state: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        saturates_mt: saturation.saturates_mt,
        geodesic: saturation.geodesic,
        speed_limits,
        problem: echo_problem(g, &psi, cfg.hbar),
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(out, &text)?;
    Ok(0)
}
