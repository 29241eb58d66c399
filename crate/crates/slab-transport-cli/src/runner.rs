//! Orchestrates a configured run: fans the (case, scale) jobs out across
//! the worker pool, then serializes every artifact in a fixed order so the
//! same configuration always produces byte-identical files.

use crate::config::{EpsSpec, RunConfig};
use crate::plot::{emit_svg, Axes, Chart, Series};
use crate::table::{Cell, CsvTable};
use slab_transport::{
    build_suite_context, convergence_slope, coupled_case_data, make_case, parallel_map,
    pure_case_data, run_stability_probe, CaseId, CoupledCaseData, ErrorEntry, ProfilePoint,
    PureCaseData, StabilityRun,
};
use std::path::PathBuf;

#[derive(Debug)]
pub struct RunSummary {
    /// One line per failed (case, scale) job.
    pub failures: Vec<String>,
    /// Artifacts written, in emission order.
    pub written: Vec<PathBuf>,
}

enum JobData {
    Pure(PureCaseData),
    Coupled(CoupledCaseData),
    Stability(StabilityRun),
}

/// Error entry and final-time profile of one finished non-stability job.
struct CaseRun<'a> {
    eps: &'a EpsSpec,
    entry: ErrorEntry,
    profile: &'a [ProfilePoint],
}

type MetricPick = fn(&ErrorEntry) -> f64;

const METRICS: [(&str, MetricPick); 4] = [
    ("E_theta", |e| e.e_theta),
    ("E_f", |e| e.e_f),
    ("E_theta_inner", |e| e.e_theta_inner),
    ("E_f_inner", |e| e.e_f_inner),
];

/// Runs every configured job and writes the CSV and SVG artifacts. Job
/// failures are collected in the summary; anything that prevents artifact
/// emission itself (setup, io) is returned as a fatal error.
pub fn run(config: &RunConfig) -> Result<RunSummary, String> {
    std::fs::create_dir_all(&config.out)
        .map_err(|e| format!("cannot create output directory {}: {e}", config.out.display()))?;
    let ctx = build_suite_context(config.params.clone())
        .map_err(|e| format!("solver setup failed: {e}"))?;

    let jobs: Vec<(CaseId, &EpsSpec)> = config
        .cases
        .iter()
        .flat_map(|&case| config.eps.iter().map(move |eps| (case, eps)))
        .collect();

    let results = parallel_map(jobs.len(), ctx.params.threads, |k| {
        let (case_id, eps) = jobs[k];
        let case = make_case(case_id, ctx.eta);
        if case_id.is_pure() {
            pure_case_data(&ctx, &case, eps.value).map(JobData::Pure)
        } else if case_id.is_coupled() {
            coupled_case_data(&ctx, &case, eps.value, &[]).map(JobData::Coupled)
        } else {
            run_stability_probe(&ctx, eps.value, case.t_end).map(JobData::Stability)
        }
    });

    let mut failures = Vec::new();
    let mut done: Vec<(CaseId, &EpsSpec, JobData)> = Vec::new();
    for ((case_id, eps), result) in jobs.iter().zip(results) {
        match result {
            Ok(data) => done.push((*case_id, eps, data)),
            Err(e) => failures.push(format!("case {} eps {}: {e}", case_id.name(), eps.text)),
        }
    }

    let mut written = Vec::new();
    let by_case = |id: CaseId| -> Vec<CaseRun<'_>> {
        done.iter()
            .filter(|(c, _, _)| *c == id)
            .filter_map(|(_, eps, data)| match data {
                JobData::Pure(d) => Some(CaseRun {
                    eps,
                    entry: d.row.errors,
                    profile: &d.profile,
                }),
                JobData::Coupled(d) => {
                    let (_, entry) = d.row.at_times.last()?;
                    Some(CaseRun {
                        eps,
                        entry: *entry,
                        profile: &d.profile,
                    })
                }
                JobData::Stability(_) => None,
            })
            .collect()
    };

    // errors.csv: final-time error norms, cases in configured order, scales
    // descending within a case.
    let mut errors = CsvTable::new(
        "slab-transport/errors v1",
        &[
            "case",
            "epsilon",
            "E_theta",
            "E_f",
            "E_theta_inner",
            "E_f_inner",
        ],
    );
    for &case_id in &config.cases {
        for run in by_case(case_id) {
            errors
                .push_row(vec![
                    Cell::Text(case_id.name().to_string()),
                    Cell::Number(run.eps.value),
                    Cell::Number(run.entry.e_theta),
                    Cell::Number(run.entry.e_f),
                    Cell::Number(run.entry.e_theta_inner),
                    Cell::Number(run.entry.e_f_inner),
                ])
                .map_err(|e| format!("errors.csv: {e}"))?;
        }
    }
    emit_table(&errors, config.out.join("errors.csv"), &mut written)?;

    // slopes.csv: per-metric least-squares fits wherever two or more scales
    // succeeded and the metric is positive throughout.
    let mut slopes = CsvTable::new(
        "slab-transport/slopes v1",
        &["case", "metric", "slope", "intercept"],
    );
    for &case_id in &config.cases {
        let runs = by_case(case_id);
        if runs.len() < 2 {
            continue;
        }
        for (metric, pick) in METRICS {
            let pairs: Vec<(f64, f64)> = runs
                .iter()
                .map(|r| (r.eps.value, pick(&r.entry)))
                .collect();
            if let Ok((slope, intercept)) = convergence_slope(&pairs) {
                slopes
                    .push_row(vec![
                        Cell::Text(case_id.name().to_string()),
                        Cell::Text(metric.to_string()),
                        Cell::Number(slope),
                        Cell::Number(intercept),
                    ])
                    .map_err(|e| format!("slopes.csv: {e}"))?;
            }
        }
    }
    emit_table(&slopes, config.out.join("slopes.csv"), &mut written)?;

    // profiles_<case>_<eps>.csv: final-time heat profile against the
    // reference angular mean, one file per finished job.
    for &case_id in &config.cases {
        for run in by_case(case_id) {
            let mut table = CsvTable::new("slab-transport/profiles v1", &["x", "theta", "mean_f"]);
            for p in run.profile {
                table
                    .push_row(vec![
                        Cell::Number(p.x),
                        Cell::Number(p.theta),
                        Cell::Number(p.mean_f),
                    ])
                    .map_err(|e| format!("profile table: {e}"))?;
            }
            let name = format!("profiles_{}_{}.csv", case_id.name(), run.eps.label());
            emit_table(&table, config.out.join(name), &mut written)?;
        }
    }

    // deviation_vs_time.csv: the stability probe's full history per scale.
    let stability: Vec<(&EpsSpec, &StabilityRun)> = done
        .iter()
        .filter_map(|(_, eps, data)| match data {
            JobData::Stability(run) => Some((*eps, run)),
            _ => None,
        })
        .collect();
    if !stability.is_empty() {
        let mut table = CsvTable::new(
            "slab-transport/deviation v1",
            &["epsilon", "t", "deviation"],
        );
        for (eps, run) in &stability {
            for &(t, dev) in &run.history {
                table
                    .push_row(vec![
                        Cell::Number(eps.value),
                        Cell::Number(t),
                        Cell::Number(dev),
                    ])
                    .map_err(|e| format!("deviation_vs_time.csv: {e}"))?;
            }
        }
        emit_table(&table, config.out.join("deviation_vs_time.csv"), &mut written)?;
    }

    if config.plots {
        emit_plots(config, &by_case, &stability, &mut written)?;
    }

    Ok(RunSummary { failures, written })
}

fn emit_table(
    table: &CsvTable,
    path: PathBuf,
    written: &mut Vec<PathBuf>,
) -> Result<(), String> {
    table
        .write_to(&path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    written.push(path);
    Ok(())
}

fn emit_chart(chart: &Chart, path: PathBuf, written: &mut Vec<PathBuf>) -> Result<(), String> {
    emit_svg(chart, &path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    written.push(path);
    Ok(())
}

fn emit_plots<'a, F>(
    config: &RunConfig,
    by_case: &F,
    stability: &[(&EpsSpec, &StabilityRun)],
    written: &mut Vec<PathBuf>,
) -> Result<(), String>
where
    F: Fn(CaseId) -> Vec<CaseRun<'a>>,
{
    for &case_id in &config.cases {
        let runs = by_case(case_id);
        if runs.len() >= 2 {
            // Error against scale, one line per metric, ascending scale.
            let series = METRICS
                .iter()
                .map(|(metric, pick)| Series {
                    label: metric.to_string(),
                    points: runs
                        .iter()
                        .rev()
                        .map(|r| (r.eps.value, pick(&r.entry)))
                        .collect(),
                    dashed: false,
                })
                .collect();
            let chart = Chart {
                title: format!("convergence {}", case_id.name()),
                x_label: "epsilon".into(),
                y_label: "L2 error".into(),
                axes: Axes::LogLog,
                series,
                guide_slopes: vec![0.4, 0.5, 1.0],
                zoom: None,
            };
            let name = format!("convergence_{}.svg", case_id.name());
            emit_chart(&chart, config.out.join(name), written)?;
        }
        if !runs.is_empty() {
            // Final-time profiles with a zoom panel on the left boundary
            // layer; model solid, reference mean dashed.
            let mut series = Vec::new();
            for run in &runs {
                series.push(Series {
                    label: format!("theta {}", run.eps.text),
                    points: run.profile.iter().map(|p| (p.x, p.theta)).collect(),
                    dashed: false,
                });
                series.push(Series {
                    label: format!("reference {}", run.eps.text),
                    points: run.profile.iter().map(|p| (p.x, p.mean_f)).collect(),
                    dashed: true,
                });
            }
            let chart = Chart {
                title: format!("profiles {}", case_id.name()),
                x_label: "x".into(),
                y_label: "theta".into(),
                axes: Axes::Linear,
                series,
                guide_slopes: vec![],
                zoom: Some((-1.0, -0.8)),
            };
            let name = format!("profiles_{}.svg", case_id.name());
            emit_chart(&chart, config.out.join(name), written)?;
        }
    }
    if !stability.is_empty() {
        let series = stability
            .iter()
            .map(|(eps, run)| Series {
                label: format!("eps {}", eps.text),
                points: run.history.clone(),
                dashed: false,
            })
            .collect();
        let chart = Chart {
            title: "interface stability".into(),
            x_label: "t".into(),
            y_label: "L2 deviation".into(),
            axes: Axes::Linear,
            series,
            guide_slopes: vec![],
            zoom: None,
        };
        emit_chart(&chart, config.out.join("stability.svg"), written)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use slab_transport::{Kernel, SuiteParams};

    /// Coarse two-job plan, cheap enough for a unit test.
    fn tiny_config(out: PathBuf, plots: bool) -> RunConfig {
        RunConfig {
            cases: vec![CaseId::Pure1],
            eps: vec![
                EpsSpec::parse("1/4").unwrap(),
                EpsSpec::parse("1/8").unwrap(),
            ],
            params: SuiteParams {
                n_mu: 8,
                halfspace_order: 6,
                alpha: 0.1,
                kernel: Kernel::Anisotropic,
                kinetic_dx: Some(2e-2),
                cfl: 0.5,
                cap_dt: true,
                heat_dx: 1e-2,
                heat_dt: 1e-3,
                x_m: 0.0,
                coupled_dx: 2.5e-2,
                inner: (-0.9, 0.9),
                threads: 1,
            },
            out,
            plots,
            seed: 0,
        }
    }

    #[test]
    fn a_tiny_plan_emits_the_expected_files() {
        let dir = std::env::temp_dir().join("slab-runner-tiny");
        let _ = std::fs::remove_dir_all(&dir);
        let summary = run(&tiny_config(dir.clone(), true)).unwrap();
        assert!(summary.failures.is_empty(), "{:?}", summary.failures);
        let names: Vec<String> = summary
            .written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "errors.csv",
                "slopes.csv",
                "profiles_pure1_1_4.csv",
                "profiles_pure1_1_8.csv",
                "convergence_pure1.svg",
                "profiles_pure1.svg",
            ]
        );
        let errors = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
        assert!(errors.starts_with("# schema: slab-transport/errors v1\n"));
        assert_eq!(errors.lines().count(), 4);
        let slopes = std::fs::read_to_string(dir.join("slopes.csv")).unwrap();
        assert_eq!(slopes.lines().count(), 6, "{slopes}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn failed_jobs_are_collected_and_tables_still_emitted() {
        let dir = std::env::temp_dir().join("slab-runner-fail");
        let _ = std::fs::remove_dir_all(&dir);
        // A Courant number this large cannot come out of the config parser,
        // but a library caller can still request it; every transport step
        // then refuses to run and the plan finishes with only failures.
        let mut config = tiny_config(dir.clone(), false);
        config.params.cfl = 0.7;
        let summary = run(&config).unwrap();
        assert_eq!(summary.failures.len(), 2, "{:?}", summary.failures);
        assert!(summary.failures[0].contains("case pure1 eps 1/4"));
        let errors = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
        assert_eq!(errors.lines().count(), 2, "header and schema line only");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir_a = std::env::temp_dir().join("slab-runner-det-a");
        let dir_b = std::env::temp_dir().join("slab-runner-det-b");
        for d in [&dir_a, &dir_b] {
            let _ = std::fs::remove_dir_all(d);
        }
        let a = run(&tiny_config(dir_a.clone(), false)).unwrap();
        let b = run(&tiny_config(dir_b.clone(), false)).unwrap();
        assert_eq!(a.written.len(), b.written.len());
        for (pa, pb) in a.written.iter().zip(&b.written) {
            assert_eq!(
                std::fs::read(pa).unwrap(),
                std::fs::read(pb).unwrap(),
                "{} differs",
                pa.display()
            );
        }
        for d in [&dir_a, &dir_b] {
            std::fs::remove_dir_all(d).unwrap();
        }
    }
}
