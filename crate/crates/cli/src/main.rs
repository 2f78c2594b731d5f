//! `hellinger`: command-line front end for robust two-point testing.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on bad input, 3 when a
//! reproduction preset fails one of its checks.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hellinger_core::adversarial::{
    base_pair, collision_probability, conditioning_tv_bound, family_distance_profile,
    indistinguishability_experiment, lecam_floor, schedule_bins, FamilyParams, Side,
};
use hellinger_core::harness::{estimate_error, sample_complexity_sweep, ExperimentFile};
use hellinger_core::reproduce::{preset_names, run_preset, PresetReport};
use hellinger_core::{
    critical_radius, geodesic_point, hellinger_midpoint, hellinger_sq, run_test, BinnedDistribution,
    DivergenceReport, SampleBatch, TestFamily, TestSpec,
};

/// Version of the JSON report layout.
const SCHEMA_VERSION: u32 = 1;
/// Collision constant of the default bin schedule `N = C(m−1)²`.
const SCHEDULE_CONSTANT: u64 = 4;

#[derive(Debug, Parser)]
#[command(name = "hellinger", version, about = "Robust hypothesis testing under the Hellinger distance")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for Monte Carlo trials.
    #[arg(long, global = true, env = "HELLINGER_THREADS")]
    threads: Option<usize>,
    /// Seed for every random draw; a fresh one is chosen and reported when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hellinger, Bhattacharyya, total variation and symmetric chi-square.
    Distances {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// A point on the Hellinger geodesic from `a` to `b`.
    Geodesic {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Angle from `a`, in radians.
        #[arg(long, required_unless_present = "midpoint", conflicts_with = "midpoint")]
        phi: Option<f64>,
        /// Emit the midpoint and the critical radius.
        #[arg(long)]
        midpoint: bool,
    },
    /// Run one test on a batch of samples.
    Decide {
        #[arg(long)]
        test: TestFamily,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Distances, collision bounds and an empirical error for the perturbed families.
    LowerBound {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        a1: f64,
        #[arg(long)]
        a2: f64,
        /// Bins per half; defaults to the smallest valid count at or above 4(m-1)².
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = TestFamily::Baraud)]
        test: TestFamily,
    },
    /// Estimate type-I and type-II error for one experiment file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Estimate error over a grid of sample counts.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Strictly increasing sample counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a named reproduction preset, or `all`.
    Reproduce {
        #[arg(long)]
        preset: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    /// `null` for commands that draw no randomness.
    seed: Option<u64>,
    result: T,
}

/// Failures are split so `main` can pick the exit status.
enum Failure {
    Input(anyhow::Error),
    Criterion(String),
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure::Input(err)
    }
}

impl From<hellinger_core::Error> for Failure {
    fn from(err: hellinger_core::Error) -> Self {
        Failure::Input(err.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let usage = err.use_stderr();
            let _ = err.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(Failure::Criterion(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.common.threads {
        if threads == 0 {
            return Err(anyhow::anyhow!("--threads must be positive").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let seed = cli.common.seed;
    let out = Output(cli.common.output);
    let resolved = || seed.unwrap_or_else(rand::random);

    match cli.command {
        Command::Distances { a, b } => {
            let (a, b) = (load_distribution(&a)?, load_distribution(&b)?);
            let report = DivergenceReport::compute(&a, &b).context("computing divergences")?;
            out.json("distances", None, &report)?;
        }
        Command::Geodesic { a, b, phi, midpoint } => {
            let (a, b) = (load_distribution(&a)?, load_distribution(&b)?);
            if midpoint {
                let u = hellinger_midpoint(&a, &b).context("computing the midpoint")?;
                let r = critical_radius(&a, &b)?;
                let result = json!({
                    "midpoint": u,
                    "critical_radius": r.radius,
                    "theta": r.theta,
                    "hellinger_sq_to_a": hellinger_sq(&u, &a)?,
                    "hellinger_sq_to_b": hellinger_sq(&u, &b)?,
                });
                out.json("geodesic", None, &result)?;
            } else {
                let phi = phi.expect("clap requires --phi without --midpoint");
                let point = geodesic_point(&a, &b, phi).context("computing the geodesic point")?;
                out.json("geodesic", None, &point)?;
            }
        }
        Command::Decide { test, a, b, samples } => {
            let (a, b) = (load_distribution(&a)?, load_distribution(&b)?);
            let batch = SampleBatch::load(&samples)
                .with_context(|| format!("reading samples from {}", samples.display()))?;
            let spec = TestSpec::new(test, a, b).context("building the test")?;
            let decision = run_test(&spec, &batch).context("running the test")?;
            out.json("decide", None, &decision)?;
        }
        Command::LowerBound { b, a1, a2, bins, m, trials, test } => {
            if m == 0 {
                return Err(anyhow::anyhow!("--m must be positive").into());
            }
            let seed = resolved();
            let params = match bins {
                Some(n) => FamilyParams::new(b, a1, a2, n),
                None => FamilyParams::with_min_bins(b, a1, a2, schedule_bins(SCHEDULE_CONSTANT, m as u64) as usize),
            }
            .context("invalid family parameters")?;
            let result = lower_bound(&params, m, trials, test, seed)?;
            out.json("lower-bound", Some(seed), &result)?;
        }
        Command::Simulate { config } => {
            let seed_used = resolved();
            let cfg = load_experiment(&config, seed, seed_used)?;
            let start = Instant::now();
            let estimate = estimate_error(&cfg).context("running the experiment")?;
            eprintln!("simulate: {:.2?}", start.elapsed());
            out.json("simulate", Some(cfg.seed), &estimate)?;
        }
        Command::Sweep { config, m, format } => {
            let seed_used = resolved();
            let cfg = load_experiment(&config, seed, seed_used)?;
            let start = Instant::now();
            let table = sample_complexity_sweep(&cfg, &m).context("running the sweep")?;
            eprintln!("sweep: {:.2?}", start.elapsed());
            match format {
                Format::Json => out.json("sweep", Some(cfg.seed), &table)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf).context("writing csv")?;
                    out.write(&buf)?;
                }
            }
        }
        Command::Reproduce { preset } => {
            let seed = resolved();
            let names: Vec<&str> = if preset == "all" {
                preset_names()
            } else {
                vec![preset.as_str()]
            };
            let mut reports = Vec::new();
            for name in names {
                let report = run_preset(name, seed).with_context(|| {
                    format!("running preset `{name}` (known presets: {})", preset_names().join(", "))
                })?;
                eprintln!(
                    "{} {name}: {:.2?}",
                    if report.passed { "PASS" } else { "FAIL" },
                    report.elapsed
                );
                reports.push(report);
            }
            let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.preset.clone()).collect();
            if reports.len() == 1 {
                out.json("reproduce", Some(seed), &reports[0])?;
            } else {
                out.json("reproduce", Some(seed), &reports as &Vec<PresetReport>)?;
            }
            if !failed.is_empty() {
                return Err(Failure::Criterion(format!("failed presets: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn load_distribution(path: &Path) -> Result<BinnedDistribution> {
    BinnedDistribution::load(path).with_context(|| format!("loading distribution {}", path.display()))
}

/// Load an experiment file; an explicit `--seed` overrides the file's seed,
/// which in turn overrides the freshly drawn one.
fn load_experiment(
    path: &Path,
    flag_seed: Option<u64>,
    fallback: u64,
) -> Result<hellinger_core::harness::ExperimentConfig> {
    let mut file = ExperimentFile::load(path).with_context(|| format!("loading experiment {}", path.display()))?;
    if flag_seed.is_some() {
        file.seed = flag_seed;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let config = file.resolve(base, fallback).context("resolving the experiment")?;
    config.validate().context("invalid experiment")?;
    Ok(config)
}

fn lower_bound(
    params: &FamilyParams,
    m: usize,
    trials: u64,
    test: TestFamily,
    seed: u64,
) -> Result<serde_json::Value> {
    let profile = family_distance_profile(params, Side::PerturbP1)?;
    let n = params.num_bins_half();
    let collision_free = collision_probability(n as u64, m as u64);
    let miss = 1.0 - collision_free;
    let tv_bound = conditioning_tv_bound(0.0, miss, miss)?;
    let floor = lecam_floor(tv_bound)?;
    let (p1, p2) = base_pair(params.b(), n)?;
    let prepared = TestSpec::new(test, p1, p2)?.prepare()?;
    let start = Instant::now();
    let empirical = indistinguishability_experiment(params, m, &prepared, trials, seed)?;
    eprintln!("lower-bound: {:.2?}", start.elapsed());
    Ok(json!({
        "params": params,
        "m": m,
        "test": test,
        "distance_profile": profile,
        "ratio": profile.hellinger_ratio,
        "chi2_ratio": profile.chi_sq_ratio,
        "collision_prob": collision_free,
        "tv_bound": tv_bound,
        "lecam_floor": floor,
        "empirical_error": empirical,
    }))
}

struct Output(Option<PathBuf>);

impl Output {
    fn json<T: Serialize>(&self, command: &str, seed: Option<u64>, result: &T) -> Result<()> {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            command,
            seed,
            result,
        };
        let mut text = serde_json::to_string_pretty(&report).context("serializing the report")?;
        text.push('\n');
        self.write(text.as_bytes())
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.0 {
            Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(bytes)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn geodesic_needs_phi_or_midpoint() {
        assert!(Cli::try_parse_from(["hellinger", "geodesic", "--a", "x", "--b", "y"]).is_err());
        assert!(Cli::try_parse_from(["hellinger", "geodesic", "--a", "x", "--b", "y", "--midpoint"]).is_ok());
        assert!(
            Cli::try_parse_from(["hellinger", "geodesic", "--a", "x", "--b", "y", "--midpoint", "--phi", "1"]).is_err()
        );
    }

    #[test]
    fn sweep_grid_is_comma_separated() {
        let cli = Cli::try_parse_from(["hellinger", "sweep", "--config", "c.json", "--m", "10,50,100"]).unwrap();
        match cli.command {
            Command::Sweep { m, .. } => assert_eq!(m, vec![10, 50, 100]),
            other => panic!("{other:?}"),
        }
    }
}
