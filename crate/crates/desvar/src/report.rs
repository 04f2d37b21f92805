//! Report rendering and output writing: CSV and JSON for machine
//! consumption, a text table that mirrors the experiment's summary
//! sentences, per-replication rows, and the seed manifests for exact rerun.

use std::fmt::Write as _;
use std::path::Path;

use crate::experiment::{manifest_file_name, ExperimentError, ExperimentReport, ExperimentRun};
use crate::stats::Decision;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "table" | "txt" | "text" | "text-table" => Ok(ReportFormat::Table),
            other => Err(ExperimentError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Result<String, ExperimentError> {
    Ok(match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => render_json(report),
        ReportFormat::Table => render_table(report),
    })
}

fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn render_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("measure,group,n,mean,variance,stdev,ci_halfwidth,manifests\n");
    for measure in &report.measures {
        for group in &measure.groups {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                csv_field(&measure.measure),
                group.group,
                group.n,
                group.mean,
                group.variance,
                group.stdev,
                group.ci_halfwidth,
                csv_field(&group.manifests.join(";")),
            );
        }
    }
    out
}

/// JSON via a sorted-key value tree, so parse -> re-render is the identity
/// byte-for-byte.
fn render_json(report: &ExperimentReport) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut text = serde_json::to_string_pretty(&value).expect("value renders");
    text.push('\n');
    text
}

fn render_table(report: &ExperimentReport) -> String {
    let spec = &report.spec;
    let confidence = 100.0 * (1.0 - spec.alpha);
    let mut out = String::new();
    let _ = writeln!(out, "Variance-reduction experiment: {}", spec.model);
    let _ = writeln!(
        out,
        "replications: {} per group | alpha: {} | base seed: {}",
        spec.replications, spec.alpha, spec.base_seed
    );
    let _ = writeln!(
        out,
        "horizon: {} minutes | warm-up: {} minutes | groups: {}",
        spec.horizon_minutes,
        spec.warm_up_minutes,
        spec.groups.join(", ")
    );
    let _ = writeln!(out, "control variate: {}", spec.control_variate);
    let _ = writeln!(out, "seed manifests: {}/<group>-rep<NN>.seeds", report.manifest_dir);
    for measure in &report.measures {
        let _ = writeln!(out);
        let _ = writeln!(out, "== {} ==", measure.measure);
        let _ = writeln!(
            out,
            "  {:<6} {:>4} {:>14} {:>14} {:>14} {:>14}",
            "group", "n", "mean", "variance", "stdev", "halfwidth"
        );
        for group in &measure.groups {
            let _ = writeln!(
                out,
                "  {:<6} {:>4} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
                group.group, group.n, group.mean, group.variance, group.stdev, group.ci_halfwidth
            );
        }
        let _ = writeln!(
            out,
            "  Bartlett's test: statistic {:.6} (df {}), p-value {:.4}.",
            measure.bartlett_statistic, measure.bartlett_df, measure.p_value
        );
        match measure.decision {
            Decision::Reject => {
                let _ = writeln!(
                    out,
                    "  At the {confidence}% confidence level, the p-value ({:.3}) is less than the significance level ({}): reject the null hypothesis.",
                    measure.p_value, spec.alpha
                );
                let _ = writeln!(
                    out,
                    "  The difference in variance between {} ({}) is statistically significant.",
                    measure.measure,
                    spec.groups.join(", ")
                );
                match &measure.winner {
                    Some(winner) => {
                        let _ = writeln!(
                            out,
                            "  {winner} achieved the largest reduction in variance for {}.",
                            measure.measure
                        );
                    }
                    None => {
                        let _ = writeln!(out, "  No winner declared.");
                    }
                }
            }
            Decision::FailToReject => {
                let _ = writeln!(
                    out,
                    "  At the {confidence}% confidence level, the p-value ({:.3}) is greater than the significance level ({}): do not reject the null hypothesis.",
                    measure.p_value, spec.alpha
                );
                let _ = writeln!(
                    out,
                    "  The difference in variance between {} ({}) is statistically insignificant; no reduction in variance.",
                    measure.measure,
                    spec.groups.join(", ")
                );
            }
        }
        if let Some(note) = &measure.note {
            let _ = writeln!(out, "  note: {note}.");
        }
        if measure.small_sample_warning {
            let _ = writeln!(
                out,
                "  note: a group has fewer than 5 observations; the normality-based chi-square reference is fragile at that size."
            );
        }
    }
    out
}

fn render_replication_rows(run: &ExperimentRun) -> String {
    let measure_names: Vec<&str> = run
        .group_runs
        .first()
        .and_then(|g| g.outputs.first())
        .map(|o| o.measures.iter().map(|(n, _)| n.as_str()).collect())
        .unwrap_or_default();
    let mut out = String::from("group,replication");
    for name in &measure_names {
        let _ = write!(out, ",{}", csv_field(name));
    }
    out.push_str(",created,disposed,balked,end_time,manifest\n");
    for group in &run.group_runs {
        for (rep, output) in group.outputs.iter().enumerate() {
            let _ = write!(out, "{},{}", group.scenario.label(), rep);
            for name in &measure_names {
                match output.measure(name).flatten() {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push_str(",undefined"),
                }
            }
            let _ = writeln!(
                out,
                ",{},{},{},{},manifests/{}",
                output.created,
                output.disposed,
                output.balked,
                output.horizon,
                manifest_file_name(group.scenario, rep as u64)
            );
        }
    }
    out
}

/// Writes `report.csv`, `report.json`, `report.txt`, `replications.csv`,
/// and one seed manifest per (group, replication) under `out_dir`.
pub fn write_outputs(run: &ExperimentRun, out_dir: &Path) -> Result<(), ExperimentError> {
    let io_err = |path: &Path, source: std::io::Error| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let manifest_dir = out_dir.join(&run.report.manifest_dir);
    std::fs::create_dir_all(&manifest_dir).map_err(|e| io_err(&manifest_dir, e))?;

    for (name, contents) in [
        ("report.csv", render_csv(&run.report)),
        ("report.json", render_json(&run.report)),
        ("report.txt", render_table(&run.report)),
        ("replications.csv", render_replication_rows(run)),
    ] {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    }

    for group in &run.group_runs {
        for (rep, output) in group.outputs.iter().enumerate() {
            let path = manifest_dir.join(manifest_file_name(group.scenario, rep as u64));
            std::fs::write(&path, output.manifest.to_text()).map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{load_spec, run_experiment};
    use std::path::PathBuf;

    fn small_run() -> ExperimentRun {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut loaded = load_spec(&dir.join("manufacturing.experiment")).unwrap();
        loaded.spec.horizon_minutes = Some(1_500.0);
        run_experiment(&loaded, None).unwrap()
    }

    #[test]
    fn csv_row_count_is_measures_times_groups() {
        let run = small_run();
        let csv = render_report(&run.report, ReportFormat::Csv).unwrap();
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, run.report.measures.len() * run.report.spec.groups.len());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let run = small_run();
        let rendered = render_report(&run.report, ReportFormat::Json).unwrap();
        let value: serde_json::Value = serde_json::from_str(&rendered).unwrap();
        let mut re_rendered = serde_json::to_string_pretty(&value).unwrap();
        re_rendered.push('\n');
        assert_eq!(rendered, re_rendered);
    }

    #[test]
    fn table_mentions_significance_and_winner() {
        let run = small_run();
        let table = render_report(&run.report, ReportFormat::Table).unwrap();
        for measure in &run.report.measures {
            if measure.decision == Decision::Reject {
                assert!(table.contains("statistically significant"));
                if let Some(winner) = &measure.winner {
                    assert!(table.contains(&format!(
                        "{winner} achieved the largest reduction in variance"
                    )));
                }
            }
        }
        assert!(table.contains("manifests/"));
    }

    #[test]
    fn unknown_format_is_an_error() {
        let err = ReportFormat::parse("yaml").unwrap_err();
        assert!(err.to_string().contains("unknown report format"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn outputs_land_on_disk() {
        let run = small_run();
        let dir = std::env::temp_dir().join(format!("desvar-report-test-{}", std::process::id()));
        write_outputs(&run, &dir).unwrap();
        for name in ["report.csv", "report.json", "report.txt", "replications.csv"] {
            assert!(dir.join(name).is_file(), "{name}");
        }
        let manifests = std::fs::read_dir(dir.join("manifests")).unwrap().count();
        assert_eq!(manifests, 40);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
