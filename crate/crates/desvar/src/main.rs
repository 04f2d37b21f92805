use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use desvar::experiment::{
    compare_configurations, load_compare_spec, load_spec, run_experiment, ExperimentError,
};
use desvar::kernel::{run_replication, RunOptions};
use desvar::model::mm1_config;
use desvar::report::{render_report, write_outputs, ReportFormat};
use desvar::rng::{manifest_for_scenario, StreamSeed, VrtScenario};
use desvar::stats::sample_moments;

/// Discrete-event simulation experiments with variance-reduction
/// treatments and homogeneity-of-variance analysis.
#[derive(Parser)]
#[command(name = "desvar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a four-group experiment spec and write reports plus seed
    /// manifests.
    Run {
        /// Experiment spec file (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for report.{csv,json,txt}, replications.csv,
        /// and manifests/.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Report flavor echoed to stdout: csv, json, or table.
        #[arg(long, default_value = "table")]
        format: String,
        /// Worker threads for replication fan-out (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Paired-difference comparison of two configurations under
    /// synchronized vs independent streams.
    Compare {
        /// Compare spec file (JSON) naming the two model configs.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Kernel validation against the M/M/1 queueing closed forms.
    ValidateMm1,
    /// Print the seed manifest one group/replication would run with.
    PrintManifest {
        /// Experiment spec file (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Group label: Base, CRN, AV, or CV.
        #[arg(long)]
        group: String,
        /// Replication index.
        #[arg(long, default_value_t = 0)]
        rep: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { spec, out, format, jobs } => cmd_run(&spec, &out, &format, jobs),
        Command::Compare { spec } => cmd_compare(&spec),
        Command::ValidateMm1 => return cmd_validate_mm1(),
        Command::PrintManifest { spec, group, rep } => cmd_print_manifest(&spec, &group, rep),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn cmd_run(
    spec: &Path,
    out: &Path,
    format: &str,
    jobs: Option<usize>,
) -> Result<(), ExperimentError> {
    let format = ReportFormat::parse(format)?;
    let loaded = load_spec(spec)?;
    let run = run_experiment(&loaded, jobs)?;
    write_outputs(&run, out)?;
    print!("{}", render_report(&run.report, format)?);
    eprintln!(
        "wrote {} in {:.2}s",
        out.display(),
        run.report.wall_clock_seconds
    );
    Ok(())
}

fn cmd_compare(spec: &Path) -> Result<(), ExperimentError> {
    let (spec, model_a, model_b) = load_compare_spec(spec)?;
    let report = compare_configurations(&spec, &model_a, &model_b)?;
    println!("paired-difference comparison on `{}`, {} replications", report.measure, report.replications);
    println!(
        "  synchronized streams: Var(D) = {:.6}  [Var(A) {:.6}, Var(B) {:.6}, Cov {:.6}]",
        report.synchronized.var_d,
        report.synchronized.var_a,
        report.synchronized.var_b,
        report.synchronized.cov_ab
    );
    println!(
        "  independent streams:  Var(D) = {:.6}  [Var(A) {:.6}, Var(B) {:.6}, Cov {:.6}]",
        report.independent.var_d,
        report.independent.var_a,
        report.independent.var_b,
        report.independent.cov_ab
    );
    println!("  variance ratio (sync/independent): {:.4}", report.variance_ratio);
    Ok(())
}

fn cmd_validate_mm1() -> ExitCode {
    // lambda = 0.5/min, mu = 1/min: rho = 0.5, Wq = 1 min, W = 2 min, L = 1.
    let config = mm1_config(2.0, 1.0, 50_000.0);
    let model = match config.build() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut utilizations = Vec::new();
    let mut waits = Vec::new();
    let mut wips = Vec::new();
    let mut totals = Vec::new();
    for rep in 0..10u64 {
        let manifest = match manifest_for_scenario(
            model.randomness_sources(),
            VrtScenario::Crn,
            StreamSeed(0x4d4d31),
            rep,
        ) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        let out = match run_replication(&model, &manifest, &RunOptions::default()) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
        };
        utilizations.push(out.measure("Server Utilization").unwrap().unwrap());
        waits.push(out.measure("Mean Queue Wait").unwrap().unwrap());
        wips.push(out.measure("WIP").unwrap().unwrap());
        totals.push(out.measure("Entity Total Time").unwrap().unwrap());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let util = mean(&utilizations);
    let wait = mean(&waits);
    let wip = mean(&wips);
    let little = 0.5 * mean(&totals);
    let hw = sample_moments(&waits).unwrap();

    let mut ok = true;
    let mut check = |label: &str, value: f64, target: f64, tolerance: f64| {
        let pass = (value - target).abs() <= tolerance;
        ok &= pass;
        println!(
            "{} {label}: {value:.4} (target {target} +/- {tolerance})",
            if pass { "PASS" } else { "FAIL" }
        );
    };
    check("utilization", util, 0.5, 0.02);
    check("mean queue wait", wait, 1.0, 0.1);
    check("Little's-law WIP", wip, little, 0.05 * little);
    println!("     queue-wait stdev across replications: {:.4}", hw.stdev);
    if ok {
        println!("M/M/1 kernel validation passed");
        ExitCode::SUCCESS
    } else {
        println!("M/M/1 kernel validation FAILED");
        ExitCode::from(1)
    }
}

fn cmd_print_manifest(spec: &Path, group: &str, rep: u64) -> Result<(), ExperimentError> {
    let scenario = VrtScenario::parse(group)
        .ok_or_else(|| ExperimentError::Spec(format!("unknown group `{group}`")))?;
    let loaded = load_spec(spec)?;
    let manifest = manifest_for_scenario(
        loaded.model.randomness_sources(),
        scenario,
        StreamSeed(loaded.spec.base_seed),
        rep,
    )?;
    print!("{}", manifest.to_text());
    Ok(())
}
