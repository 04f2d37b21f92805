//! Orchestrates the four-group experiment design end-to-end: builds the
//! model, runs the Base / CRN / AV / CV scenario groups, applies each
//! group's estimator, tests variance homogeneity, and declares a winner.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::{run_replication, ReplicationOutput, RunOptions, SimError};
use crate::model::{ConfigError, MeasureRole, Model, ModelConfig};
use crate::rng::{manifest_for_scenario, ManifestError, StreamSeed, VrtScenario};
use crate::stats::{bartlett_test, ci_halfwidth, sample_moments, BartlettResult, Decision, GroupSet, StatsError};
use crate::vrt::{av_pair_series, crn_difference_variance, cv_adjust, CrnDifference, CvInput, PairedSeries};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("undefined measure `{measure}` in group {group}, replication {replication}; offending manifest:\n{manifest}")]
    UndefinedMeasure {
        measure: String,
        group: String,
        replication: u64,
        manifest: String,
    },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unknown report format `{0}` (expected csv, json, or table)")]
    UnknownFormat(String),
}

impl ExperimentError {
    /// 2 for validation problems, 3 for degenerate-statistics aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Spec(_)
            | ExperimentError::Config(_)
            | ExperimentError::Manifest(_)
            | ExperimentError::Io { .. }
            | ExperimentError::UnknownFormat(_) => 2,
            ExperimentError::Sim(_)
            | ExperimentError::Stats(_)
            | ExperimentError::UndefinedMeasure { .. } => 3,
        }
    }
}

/// One experiment: a model reference plus the experimental conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Model config path, resolved relative to the spec file.
    pub model_config: String,
    pub replications: u64,
    #[serde(default)]
    pub warm_up_minutes: f64,
    pub alpha: f64,
    pub groups: Vec<VrtScenario>,
    /// Analyzed output measures.
    pub measures: Vec<String>,
    /// The concomitant measure consumed by the CV estimator.
    pub control_variate: String,
    pub base_seed: u64,
    #[serde(default)]
    pub horizon_minutes: Option<f64>,
}

#[derive(Debug)]
pub struct LoadedExperiment {
    pub spec: ExperimentSpec,
    pub model_config: ModelConfig,
    pub model: Model,
    pub spec_path: PathBuf,
}

pub fn load_spec(path: &Path) -> Result<LoadedExperiment, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let spec: ExperimentSpec =
        serde_json::from_str(&text).map_err(|e| ExperimentError::Spec(e.to_string()))?;

    let model_path = {
        let candidate = PathBuf::from(&spec.model_config);
        if candidate.is_absolute() {
            candidate
        } else {
            path.parent().unwrap_or(Path::new(".")).join(candidate)
        }
    };
    let model_config = ModelConfig::from_path(&model_path)?;
    let model = model_config.build()?;
    validate_spec(&spec, &model)?;
    Ok(LoadedExperiment {
        spec,
        model_config,
        model,
        spec_path: path.to_path_buf(),
    })
}

fn validate_spec(spec: &ExperimentSpec, model: &Model) -> Result<(), ExperimentError> {
    let fail = |msg: String| Err(ExperimentError::Spec(msg));
    if spec.replications < 2 {
        return fail(format!("need at least 2 replications, got {}", spec.replications));
    }
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return fail(format!("alpha must lie in (0,1), got {}", spec.alpha));
    }
    if spec.warm_up_minutes < 0.0 {
        return fail("warm-up cannot be negative".into());
    }
    if spec.groups.is_empty() {
        return fail("at least one group is required".into());
    }
    for (i, g) in spec.groups.iter().enumerate() {
        if spec.groups[..i].contains(g) {
            return fail(format!("duplicate group {}", g.label()));
        }
    }
    if spec.groups.contains(&VrtScenario::Av) && !spec.replications.is_multiple_of(2) {
        return fail(format!(
            "antithetic pairing needs an even replication count, got {}",
            spec.replications
        ));
    }
    if spec.measures.is_empty() {
        return fail("at least one analyzed measure is required".into());
    }
    for (i, name) in spec.measures.iter().enumerate() {
        if spec.measures[..i].contains(name) {
            return fail(format!("duplicate measure `{name}`"));
        }
        if model.measure(name).is_none() {
            return fail(format!("unknown measure `{name}`: not in the model's registry"));
        }
        if *name == spec.control_variate {
            return fail(format!(
                "control variate `{name}` cannot also be an analyzed measure"
            ));
        }
    }
    match model.measure(&spec.control_variate) {
        None => {
            return fail(format!(
                "unknown control variate `{}`: not in the model's registry",
                spec.control_variate
            ))
        }
        Some(m) if m.role != MeasureRole::ControlVariate => {
            return fail(format!(
                "measure `{}` is not registered as the model's control variate",
                spec.control_variate
            ))
        }
        Some(_) => {}
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Per-group statistics for one measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: String,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub stdev: f64,
    pub ci_halfwidth: f64,
    pub manifests: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureReport {
    pub measure: String,
    pub groups: Vec<GroupStats>,
    pub bartlett_statistic: f64,
    pub bartlett_df: usize,
    pub p_value: f64,
    pub decision: Decision,
    pub winner: Option<String>,
    /// Extra context: no-winner-despite-rejection, degenerate controls.
    pub note: Option<String>,
    /// Some group has fewer than 5 observations; the chi-square reference
    /// leans on a normality assumption such samples cannot support.
    pub small_sample_warning: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecEcho {
    pub model: String,
    pub replications: u64,
    pub warm_up_minutes: f64,
    pub alpha: f64,
    pub horizon_minutes: f64,
    pub base_seed: u64,
    pub groups: Vec<String>,
    pub control_variate: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: SpecEcho,
    pub measures: Vec<MeasureReport>,
    pub manifest_dir: String,
    /// Excluded from serialized reports so identical inputs render
    /// identical bytes.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

/// A group's replication outputs, in replication order.
#[derive(Debug)]
pub struct GroupRuns {
    pub scenario: VrtScenario,
    pub outputs: Vec<ReplicationOutput>,
}

#[derive(Debug)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub group_runs: Vec<GroupRuns>,
}

pub fn manifest_file_name(scenario: VrtScenario, replication: u64) -> String {
    format!("{}-rep{:02}.seeds", scenario.label().to_lowercase(), replication)
}

/// Runs every group of the experiment and assembles the report.
///
/// `jobs` bounds the worker threads; replication outputs are collected in
/// index order, so the report bytes do not depend on the parallelism.
pub fn run_experiment(loaded: &LoadedExperiment, jobs: Option<usize>) -> Result<ExperimentRun, ExperimentError> {
    let started = Instant::now();
    let spec = &loaded.spec;
    let model = &loaded.model;
    let options = RunOptions {
        horizon: spec.horizon_minutes,
        stop_rule: None,
        warm_up: spec.warm_up_minutes,
        max_events: model.max_events(),
    };

    let tasks: Vec<(VrtScenario, u64)> = spec
        .groups
        .iter()
        .flat_map(|&g| (0..spec.replications).map(move |r| (g, r)))
        .collect();

    let run_one = |&(scenario, rep): &(VrtScenario, u64)| -> Result<ReplicationOutput, ExperimentError> {
        let manifest = manifest_for_scenario(
            model.randomness_sources(),
            scenario,
            StreamSeed(spec.base_seed),
            rep,
        )?;
        Ok(run_replication(model, &manifest, &options)?)
    };

    let results: Vec<Result<ReplicationOutput, ExperimentError>> = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ExperimentError::Spec(format!("cannot build thread pool: {e}")))?;
            pool.install(|| tasks.par_iter().map(run_one).collect())
        }
        None => tasks.par_iter().map(run_one).collect(),
    };

    let mut outputs = Vec::with_capacity(results.len());
    for result in results {
        outputs.push(result?);
    }

    let mut group_runs: Vec<GroupRuns> = Vec::new();
    for (idx, &scenario) in spec.groups.iter().enumerate() {
        let start = idx * spec.replications as usize;
        let end = start + spec.replications as usize;
        group_runs.push(GroupRuns {
            scenario,
            outputs: outputs[start..end].to_vec(),
        });
    }

    audit_group_seed_disjointness(&group_runs)?;

    let mut measure_reports = Vec::new();
    for measure in &spec.measures {
        measure_reports.push(analyze_measure(spec, &group_runs, measure)?);
    }

    let report = ExperimentReport {
        spec: SpecEcho {
            model: model.name.clone(),
            replications: spec.replications,
            warm_up_minutes: spec.warm_up_minutes,
            alpha: spec.alpha,
            horizon_minutes: spec.horizon_minutes.unwrap_or(model.horizon),
            base_seed: spec.base_seed,
            groups: spec.groups.iter().map(|g| g.label().to_string()).collect(),
            control_variate: spec.control_variate.clone(),
        },
        measures: measure_reports,
        manifest_dir: "manifests".to_string(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(ExperimentRun { report, group_runs })
}

/// The groups' seed spaces must never overlap, or Bartlett's independence
/// assumption degrades into shared randomness.
fn audit_group_seed_disjointness(group_runs: &[GroupRuns]) -> Result<(), ExperimentError> {
    let mut per_group: Vec<Vec<crate::rng::StreamSeed>> = Vec::new();
    for runs in group_runs {
        let mut seeds: Vec<crate::rng::StreamSeed> = runs
            .outputs
            .iter()
            .flat_map(|o| o.manifest.distinct_seeds())
            .collect();
        seeds.sort();
        seeds.dedup();
        per_group.push(seeds);
    }
    for i in 0..per_group.len() {
        for j in i + 1..per_group.len() {
            if per_group[i].iter().any(|s| per_group[j].binary_search(s).is_ok()) {
                return Err(ExperimentError::Spec(format!(
                    "seed spaces of groups {} and {} overlap",
                    group_runs[i].scenario.label(),
                    group_runs[j].scenario.label()
                )));
            }
        }
    }
    Ok(())
}

fn series_for(
    runs: &GroupRuns,
    measure: &str,
) -> Result<Vec<f64>, ExperimentError> {
    let mut series = Vec::with_capacity(runs.outputs.len());
    for (rep, output) in runs.outputs.iter().enumerate() {
        let value = output
            .measure(measure)
            .ok_or_else(|| ExperimentError::Spec(format!("measure `{measure}` missing from output")))?;
        match value {
            Some(v) => series.push(v),
            None => {
                return Err(ExperimentError::UndefinedMeasure {
                    measure: measure.to_string(),
                    group: runs.scenario.label().to_string(),
                    replication: rep as u64,
                    manifest: output.manifest.to_text(),
                })
            }
        }
    }
    Ok(series)
}

/// Applies each group's estimator to one measure and runs Bartlett's test
/// across the resulting series.
fn analyze_measure(
    spec: &ExperimentSpec,
    group_runs: &[GroupRuns],
    measure: &str,
) -> Result<MeasureReport, ExperimentError> {
    let mut labeled_series: Vec<(String, Vec<f64>)> = Vec::new();
    let mut group_stats = Vec::new();
    let mut degenerate_control = false;
    for runs in group_runs {
        let raw = series_for(runs, measure)?;
        let series = match runs.scenario {
            VrtScenario::Base | VrtScenario::Crn => raw,
            VrtScenario::Av => {
                let pairs: Vec<(f64, f64)> = raw.chunks_exact(2).map(|p| (p[0], p[1])).collect();
                av_pair_series(&PairedSeries::new(pairs)?)?.y_series
            }
            VrtScenario::Cv => {
                let control = series_for(runs, &spec.control_variate)?;
                let adjusted = cv_adjust(&CvInput::new(raw, control, None)?)?;
                degenerate_control |= adjusted.degenerate_control;
                adjusted.adjusted_series
            }
        };
        let moments = sample_moments(&series)?;
        group_stats.push(GroupStats {
            group: runs.scenario.label().to_string(),
            n: series.len(),
            mean: moments.mean,
            variance: moments.variance,
            stdev: moments.stdev,
            ci_halfwidth: ci_halfwidth(&series, spec.alpha)?,
            manifests: (0..runs.outputs.len() as u64)
                .map(|r| format!("manifests/{}", manifest_file_name(runs.scenario, r)))
                .collect(),
        });
        labeled_series.push((runs.scenario.label().to_string(), series));
    }

    let bartlett = bartlett_test(&GroupSet::new(labeled_series)?)?;
    let variances: Vec<(String, f64)> = group_stats
        .iter()
        .map(|g| (g.group.clone(), g.variance))
        .collect();
    let (decision, winner, mut note) = decide_and_rank(&variances, &bartlett, spec.alpha);
    if degenerate_control {
        let warning = "degenerate control: Var(X) = 0, CV coefficient forced to 0".to_string();
        note = Some(match note {
            Some(existing) => format!("{existing}; {warning}"),
            None => warning,
        });
    }

    Ok(MeasureReport {
        measure: measure.to_string(),
        groups: group_stats,
        bartlett_statistic: bartlett.statistic,
        bartlett_df: bartlett.df,
        p_value: bartlett.p_value,
        decision,
        winner,
        note,
        small_sample_warning: bartlett.small_sample_warning,
    })
}

/// The decision rule: reject when p < alpha; the winner is the
/// minimum-variance VRT group, declared only under rejection and only when
/// it actually undercuts the Base group.
pub fn decide_and_rank(
    variances: &[(String, f64)],
    bartlett: &BartlettResult,
    alpha: f64,
) -> (Decision, Option<String>, Option<String>) {
    let decision = bartlett.decision_at(alpha);
    if decision == Decision::FailToReject {
        return (decision, None, None);
    }
    let base = variances.iter().find(|(g, _)| g == "Base").map(|(_, v)| *v);
    let best_vrt = variances
        .iter()
        .filter(|(g, _)| g != "Base")
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned();
    match (base, best_vrt) {
        (Some(base_var), Some((group, var))) if var < base_var => (decision, Some(group), None),
        (Some(_), Some(_)) => (
            decision,
            None,
            Some("variance increased: no treatment fell below the Base group".to_string()),
        ),
        _ => (
            decision,
            None,
            Some("no Base group to compare against".to_string()),
        ),
    }
}

// ---------------------------------------------------------------------------
// Two-configuration comparison (the classical paired-difference reading)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareSpec {
    pub model_a: String,
    pub model_b: String,
    pub replications: u64,
    pub base_seed: u64,
    pub measure: String,
    #[serde(default)]
    pub horizon_minutes: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub measure: String,
    pub replications: u64,
    /// Difference analysis with per-source streams shared across the two
    /// configurations.
    pub synchronized: CrnDifference,
    /// The same design with disjoint seeds on each side.
    pub independent: CrnDifference,
    pub variance_ratio: f64,
}

pub fn load_compare_spec(path: &Path) -> Result<(CompareSpec, Model, Model), ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let spec: CompareSpec =
        serde_json::from_str(&text).map_err(|e| ExperimentError::Spec(e.to_string()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| {
        let candidate = PathBuf::from(p);
        if candidate.is_absolute() {
            candidate
        } else {
            dir.join(candidate)
        }
    };
    let model_a = ModelConfig::from_path(&resolve(&spec.model_a))?.build()?;
    let model_b = ModelConfig::from_path(&resolve(&spec.model_b))?.build()?;
    if spec.replications < 2 {
        return Err(ExperimentError::Spec(format!(
            "need at least 2 replications, got {}",
            spec.replications
        )));
    }
    Ok((spec, model_a, model_b))
}

/// Runs both configurations under synchronized streams and again under
/// independent streams, reporting the paired-difference variance
/// decomposition for each scheme.
pub fn compare_configurations(
    spec: &CompareSpec,
    model_a: &Model,
    model_b: &Model,
) -> Result<CompareReport, ExperimentError> {
    if model_a.randomness_sources() != model_b.randomness_sources() {
        return Err(ExperimentError::Spec(
            "the two configurations declare different randomness sources; synchronization is undefined"
                .into(),
        ));
    }
    for (model, which) in [(model_a, &spec.model_a), (model_b, &spec.model_b)] {
        if model.measure(&spec.measure).is_none() {
            return Err(ExperimentError::Spec(format!(
                "measure `{}` is not registered in `{which}`",
                spec.measure
            )));
        }
    }

    let collect = |model: &Model, tag: &str| -> Result<Vec<f64>, ExperimentError> {
        let options = RunOptions {
            horizon: spec.horizon_minutes,
            stop_rule: None,
            warm_up: 0.0,
            max_events: model.max_events(),
        };
        let mut series = Vec::with_capacity(spec.replications as usize);
        for rep in 0..spec.replications {
            let mut manifest = crate::rng::SeedManifest::new();
            for source in model.randomness_sources() {
                let seed = crate::rng::derive_seed(StreamSeed(spec.base_seed), tag, source, rep);
                manifest.insert(
                    source,
                    crate::rng::ManifestEntry {
                        seed,
                        mode: crate::rng::StreamMode::Direct,
                    },
                )?;
            }
            let output = run_replication(model, &manifest, &options)?;
            match output.measure(&spec.measure).expect("validated") {
                Some(v) => series.push(v),
                None => {
                    return Err(ExperimentError::UndefinedMeasure {
                        measure: spec.measure.clone(),
                        group: tag.to_string(),
                        replication: rep,
                        manifest: output.manifest.to_text(),
                    })
                }
            }
        }
        Ok(series)
    };

    // Shared tag on both sides: the i-th replication of A and of B consume
    // identical per-source streams.
    let sync_a = collect(model_a, "compare-crn")?;
    let sync_b = collect(model_b, "compare-crn")?;
    let ind_a = collect(model_a, "compare-ind-a")?;
    let ind_b = collect(model_b, "compare-ind-b")?;

    let synchronized = crn_difference_variance(&PairedSeries::from_slices(&sync_a, &sync_b)?)?;
    let independent = crn_difference_variance(&PairedSeries::from_slices(&ind_a, &ind_b)?)?;
    let variance_ratio = if independent.var_d > 0.0 {
        synchronized.var_d / independent.var_d
    } else {
        f64::NAN
    };
    Ok(CompareReport {
        measure: spec.measure.clone(),
        replications: spec.replications,
        synchronized,
        independent,
        variance_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mm1_config;
    use crate::rng::StreamMode;
    use std::path::PathBuf;

    fn configs_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
    }

    fn small_manufacturing_spec() -> LoadedExperiment {
        let mut loaded = load_spec(&configs_dir().join("manufacturing.experiment")).unwrap();
        loaded.spec.horizon_minutes = Some(2_000.0);
        loaded
    }

    #[test]
    fn shipped_spec_matches_experimental_conditions() {
        let loaded = load_spec(&configs_dir().join("manufacturing.experiment")).unwrap();
        assert_eq!(loaded.spec.replications, 10);
        assert_eq!(loaded.spec.warm_up_minutes, 0.0);
        assert_eq!(loaded.spec.alpha, 0.05);
        assert_eq!(loaded.spec.groups, VrtScenario::ALL.to_vec());
        assert_eq!(loaded.spec.measures.len(), 3);
        assert_eq!(loaded.model.horizon, 43_200.0);
    }

    #[test]
    fn spec_validation_rejects_bad_inputs() {
        let loaded = load_spec(&configs_dir().join("manufacturing.experiment")).unwrap();

        let mut one_rep = loaded.spec.clone();
        one_rep.replications = 1;
        assert!(validate_spec(&one_rep, &loaded.model).is_err());

        let mut odd_av = loaded.spec.clone();
        odd_av.replications = 9;
        assert!(validate_spec(&odd_av, &loaded.model).is_err());

        let mut cv_analyzed = loaded.spec.clone();
        cv_analyzed.measures.push(cv_analyzed.control_variate.clone());
        assert!(validate_spec(&cv_analyzed, &loaded.model).is_err());

        let mut unknown = loaded.spec.clone();
        unknown.measures.push("No Such Measure".into());
        assert!(validate_spec(&unknown, &loaded.model).is_err());
    }

    #[test]
    fn experiment_structure_matches_design() {
        let loaded = small_manufacturing_spec();
        let run = run_experiment(&loaded, Some(2)).unwrap();
        assert_eq!(run.report.measures.len(), 3);
        for measure in &run.report.measures {
            assert_eq!(measure.bartlett_df, 3);
            assert_eq!(measure.groups.len(), 4);
            for group in &measure.groups {
                let expected_n = if group.group == "AV" { 5 } else { 10 };
                assert_eq!(group.n, expected_n, "group {}", group.group);
                assert_eq!(group.manifests.len(), 10);
            }
        }
    }

    #[test]
    fn av_pair_manifests_complement() {
        let loaded = small_manufacturing_spec();
        let run = run_experiment(&loaded, None).unwrap();
        let av = run
            .group_runs
            .iter()
            .find(|g| g.scenario == VrtScenario::Av)
            .unwrap();
        for pair in av.outputs.chunks_exact(2) {
            for ((name_e, even), (name_o, odd)) in
                pair[0].manifest.entries().iter().zip(pair[1].manifest.entries())
            {
                assert_eq!(name_e, name_o);
                assert_eq!(even.seed, odd.seed);
                assert_eq!(even.mode, StreamMode::Direct);
                assert_eq!(odd.mode, StreamMode::Antithetic);
            }
        }
    }

    #[test]
    fn base_group_shares_one_stream_per_replication() {
        let loaded = small_manufacturing_spec();
        let run = run_experiment(&loaded, None).unwrap();
        let base = run
            .group_runs
            .iter()
            .find(|g| g.scenario == VrtScenario::Base)
            .unwrap();
        for output in &base.outputs {
            assert_eq!(output.manifest.distinct_seeds().len(), 1);
        }
    }

    #[test]
    fn decide_and_rank_rules() {
        let bartlett_reject = BartlettResult {
            statistic: 20.0,
            df: 3,
            p_value: 0.001,
            small_sample_warning: false,
        };
        let variances = vec![
            ("Base".to_string(), 4.0),
            ("CRN".to_string(), 3.0),
            ("AV".to_string(), 2.0),
            ("CV".to_string(), 1.0),
        ];
        let (decision, winner, note) = decide_and_rank(&variances, &bartlett_reject, 0.05);
        assert_eq!(decision, Decision::Reject);
        assert_eq!(winner.as_deref(), Some("CV"));
        assert!(note.is_none());

        let bartlett_keep = BartlettResult {
            p_value: 0.995,
            ..bartlett_reject
        };
        let (decision, winner, _) = decide_and_rank(&variances, &bartlett_keep, 0.05);
        assert_eq!(decision, Decision::FailToReject);
        assert!(winner.is_none());

        let inflated = vec![
            ("Base".to_string(), 1.0),
            ("CRN".to_string(), 3.0),
            ("AV".to_string(), 2.0),
            ("CV".to_string(), 5.0),
        ];
        let (decision, winner, note) = decide_and_rank(&inflated, &bartlett_reject, 0.05);
        assert_eq!(decision, Decision::Reject);
        assert!(winner.is_none());
        assert!(note.unwrap().contains("variance increased"));
    }

    #[test]
    fn undefined_measure_aborts_with_manifest() {
        // A horizon so short that no entity completes: tally measures come
        // back undefined and the run must abort, naming the manifest.
        let mut loaded = small_manufacturing_spec();
        loaded.spec.horizon_minutes = Some(0.5);
        let err = run_experiment(&loaded, None).unwrap_err();
        match err {
            ExperimentError::UndefinedMeasure { manifest, .. } => {
                assert!(manifest.contains("generator_id"));
            }
            other => panic!("expected undefined-measure abort, got {other}"),
        }
        assert_eq!(
            ExperimentError::UndefinedMeasure {
                measure: String::new(),
                group: String::new(),
                replication: 0,
                manifest: String::new()
            }
            .exit_code(),
            3
        );
    }

    #[test]
    fn compare_synchronized_beats_independent() {
        let spec = CompareSpec {
            model_a: "a".into(),
            model_b: "b".into(),
            replications: 10,
            base_seed: 7_777,
            measure: "Entity Total Time".into(),
            horizon_minutes: Some(2_000.0),
        };
        let model_a = mm1_config(2.0, 1.0, 2_000.0).build().unwrap();
        let model_b = mm1_config(2.0, 0.9, 2_000.0).build().unwrap();
        let report = compare_configurations(&spec, &model_a, &model_b).unwrap();
        assert!(report.synchronized.var_d < report.independent.var_d);
        assert!(report.synchronized.cov_ab > 0.0);
    }
}
