// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Run summaries and their CSV forms.
//!
//! Success is a completion by the deadline. Everything else (late, killed,
//! rejected) is a deadline miss, so the two rates always sum to one.

use std::io::Write;
use std::path::Path;

use crate::engine::{JobState, JobStatus, Series};
use crate::error::{Error, Result};
use crate::num::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub completed: usize,
    pub missed: usize,
    pub killed: usize,
    pub rejected: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.completed + self.missed + self.killed + self.rejected
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport<T> {
    pub preset: String,
    pub seed: u64,
    pub success_rate: T,
    pub deadline_miss_rate: T,
    pub counts: Counts,
    /// CPU-hours consumed over `cpu_capacity * makespan`.
    pub mean_utilization: T,
    /// `(t, X)` at tick boundaries where X or F moved, plus the last tick.
    /// Each value holds until the next sample.
    pub threshold_series: Series<T>,
    /// `(t, F)` sampled at the same instants as `threshold_series`.
    pub failure_series: Series<T>,
}

/// Fraction of `[from, end]` during which the step series satisfies `pred`.
/// `None` if the interval is empty.
pub fn time_fraction<T: Scalar>(series: &[(T, T)], from: T, pred: impl Fn(T) -> bool) -> Option<T> {
    let mut hit = T::zero();
    let mut total = T::zero();
    for w in series.windows(2) {
        let (a, b) = (w[0].0.max(from), w[1].0);
        if b > a {
            total = total + (b - a);
            if pred(w[0].1) {
                hit = hit + (b - a);
            }
        }
    }
    (total > T::zero()).then(|| hit / total)
}

/// Time-weighted mean of the step series over `[from, end]`.
pub fn time_average<T: Scalar>(series: &[(T, T)], from: T) -> Option<T> {
    let mut acc = T::zero();
    let mut total = T::zero();
    for w in series.windows(2) {
        let (a, b) = (w[0].0.max(from), w[1].0);
        if b > a {
            acc = acc + w[0].1 * (b - a);
            total = total + (b - a);
        }
    }
    (total > T::zero()).then(|| acc / total)
}

impl<T: Scalar> RunReport<T> {
    pub fn total_jobs(&self) -> usize {
        self.counts.total()
    }
}

pub fn summarize<T: Scalar>(
    preset: String,
    seed: u64,
    jobs: &[JobState<T>],
    mean_utilization: T,
    threshold_series: Series<T>,
    failure_series: Series<T>,
) -> Result<RunReport<T>> {
    if jobs.is_empty() {
        return Err(Error::Degenerate("run generated no jobs".into()));
    }
    let mut counts = Counts::default();
    for job in jobs {
        match job.status {
            JobStatus::Completed => counts.completed += 1,
            JobStatus::Missed => counts.missed += 1,
            JobStatus::Killed => counts.killed += 1,
            JobStatus::Rejected => counts.rejected += 1,
            status => return Err(Error::Degenerate(format!("job {} still {status:?} at end of run", job.spec.id))),
        }
    }
    let success_rate = T::from_usize(counts.completed).unwrap() / T::from_usize(counts.total()).unwrap();
    Ok(RunReport {
        preset,
        seed,
        success_rate,
        deadline_miss_rate: T::one() - success_rate,
        counts,
        mean_utilization,
        threshold_series,
        failure_series,
    })
}

pub const SUMMARY_HEADER: &str =
    "preset,seed,success_rate,deadline_miss_rate,completed,missed,killed,rejected,utilization";
pub const SERIES_HEADER: &str = "t,x_thresh,f_measured";

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::File::create(path).and_then(|mut f| f.write_all(body.as_bytes())).map_err(|e| Error::io(path, e))
}

fn summary_row<T: Scalar>(r: &RunReport<T>) -> String {
    format!(
        "{},{},{:.6},{:.6},{},{},{},{},{:.6}\n",
        r.preset,
        r.seed,
        r.success_rate.as_f64(),
        r.deadline_miss_rate.as_f64(),
        r.counts.completed,
        r.counts.missed,
        r.counts.killed,
        r.counts.rejected,
        r.mean_utilization.as_f64()
    )
}

/// `summary.csv` with one row per report, in the given order.
pub fn write_summary_csv<T: Scalar>(reports: &[RunReport<T>], path: &Path) -> Result<()> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&summary_row(r));
    }
    write_file(path, &out)
}

pub fn write_report_csv<T: Scalar>(report: &RunReport<T>, path: &Path) -> Result<()> {
    write_summary_csv(std::slice::from_ref(report), path)
}

/// `timeseries.csv`: one row per change point of either series.
pub fn write_series_csv<T: Scalar>(report: &RunReport<T>, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(32 * report.threshold_series.len() + 32);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (&(t, x), &(_, f)) in report.threshold_series.iter().zip(&report.failure_series) {
        out.push_str(&format!("{:.6},{:.6},{:.6}\n", t.as_f64(), x.as_f64(), f.as_f64()));
    }
    write_file(path, &out)
}

/// A parsed `summary.csv` row.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub preset: String,
    pub seed: u64,
    pub success_rate: f64,
    pub deadline_miss_rate: f64,
    pub counts: Counts,
    pub utilization: f64,
}

impl<T: Scalar> From<&RunReport<T>> for SummaryRow {
    fn from(r: &RunReport<T>) -> Self {
        SummaryRow {
            preset: r.preset.clone(),
            seed: r.seed,
            success_rate: r.success_rate.as_f64(),
            deadline_miss_rate: r.deadline_miss_rate.as_f64(),
            counts: r.counts,
            utilization: r.mean_utilization.as_f64(),
        }
    }
}

impl SummaryRow {
    /// A report carrying this row's figures and empty series.
    pub fn to_report(&self) -> RunReport<f64> {
        RunReport {
            preset: self.preset.clone(),
            seed: self.seed,
            success_rate: self.success_rate,
            deadline_miss_rate: self.deadline_miss_rate,
            counts: self.counts,
            mean_utilization: self.utilization,
            threshold_series: Vec::new(),
            failure_series: Vec::new(),
        }
    }
}

fn read_lines(path: &Path, header: &str) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => return Err(Error::Parse { path: path.into(), line: 1, reason: format!("expected header `{header}`") }),
    }
    Ok(lines.filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l.to_string())).collect())
}

fn field<F: std::str::FromStr>(path: &Path, line: usize, name: &str, raw: Option<&str>) -> Result<F> {
    raw.and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Parse {
        path: path.into(),
        line,
        reason: format!("bad or missing `{name}`"),
    })
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    read_lines(path, SUMMARY_HEADER)?
        .into_iter()
        .map(|(n, line)| {
            let mut it = line.split(',');
            let preset: String = field(path, n, "preset", it.next())?;
            Ok(SummaryRow {
                preset,
                seed: field(path, n, "seed", it.next())?,
                success_rate: field(path, n, "success_rate", it.next())?,
                deadline_miss_rate: field(path, n, "deadline_miss_rate", it.next())?,
                counts: Counts {
                    completed: field(path, n, "completed", it.next())?,
                    missed: field(path, n, "missed", it.next())?,
                    killed: field(path, n, "killed", it.next())?,
                    rejected: field(path, n, "rejected", it.next())?,
                },
                utilization: field(path, n, "utilization", it.next())?,
            })
        })
        .collect()
}

/// Returns `(threshold_series, failure_series)`.
pub fn read_series_csv(path: &Path) -> Result<(Series<f64>, Series<f64>)> {
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    for (n, line) in read_lines(path, SERIES_HEADER)? {
        let mut it = line.split(',');
        let t: f64 = field(path, n, "t", it.next())?;
        xs.push((t, field(path, n, "x_thresh", it.next())?));
        fs.push((t, field(path, n, "f_measured", it.next())?));
    }
    Ok((xs, fs))
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{JobSpec, WorkloadClass};

    fn states(outcomes: &[(JobStatus, usize)]) -> Vec<JobState<f64>> {
        let mut out = Vec::new();
        for &(status, n) in outcomes {
            for _ in 0..n {
                let mut s = JobState::new(JobSpec {
                    id: out.len() as u64,
                    base_duration: 1.0,
                    arrival_time: 0.0,
                    deadline: 1.05,
                    cpu_demand: 1.0,
                    mem_demand: 1.0,
                    workload_class: WorkloadClass::CpuBound,
                });
                s.status = status;
                out.push(s);
            }
        }
        out
    }

    fn report(outcomes: &[(JobStatus, usize)]) -> RunReport<f64> {
        summarize("alg_2".into(), 3, &states(outcomes), 0.5, vec![], vec![]).unwrap()
    }

    #[test]
    fn rates_from_counts() {
        let r = report(&[(JobStatus::Completed, 42), (JobStatus::Killed, 58)]);
        assert!((r.success_rate - 0.42).abs() < 1e-12);
        assert!((r.deadline_miss_rate - 0.58).abs() < 1e-12);

        let r = report(&[(JobStatus::Completed, 9)]);
        assert_eq!((r.success_rate, r.deadline_miss_rate), (1.0, 0.0));

        let r = report(&[
            (JobStatus::Completed, 78),
            (JobStatus::Missed, 10),
            (JobStatus::Killed, 7),
            (JobStatus::Rejected, 5),
        ]);
        assert!((r.success_rate - 0.78).abs() < 1e-12);
        assert!((r.deadline_miss_rate - 0.22).abs() < 1e-12);
        assert_eq!(r.total_jobs(), 100);
    }

    #[test]
    fn no_jobs_is_degenerate() {
        let err = summarize::<f64>("x".into(), 0, &[], 0.0, vec![], vec![]).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn non_terminal_job_is_degenerate() {
        assert!(summarize("x".into(), 0, &states(&[(JobStatus::Running, 1)]), 0.0, vec![], vec![]).is_err());
    }

    #[test]
    fn summary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let reports: Vec<RunReport<f64>> = (1..=5)
            .map(|i| {
                let mut r = report(&[(JobStatus::Completed, i), (JobStatus::Missed, 7 - i)]);
                r.preset = format!("alg_{i}");
                r
            })
            .collect();
        write_summary_csv(&reports, &path).unwrap();
        let rows = read_summary_csv(&path).unwrap();
        assert_eq!(rows.len(), 5);
        for (row, r) in rows.iter().zip(&reports) {
            let expect = SummaryRow::from(r);
            assert_eq!(row.preset, expect.preset);
            assert_eq!(row.seed, expect.seed);
            assert_eq!(row.counts, expect.counts);
            assert!((row.success_rate - expect.success_rate).abs() <= 5e-7);
            assert!((row.deadline_miss_rate - expect.deadline_miss_rate).abs() <= 5e-7);
            assert!((row.utilization - expect.utilization).abs() <= 5e-7);
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next(), Some(SUMMARY_HEADER));
    }

    #[test]
    fn series_round_trip_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("timeseries.csv");
        let mut r = report(&[(JobStatus::Completed, 1)]);
        write_series_csv(&r, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{SERIES_HEADER}\n"));

        r.threshold_series = vec![(0.1, 0.9), (0.2, 0.89)];
        r.failure_series = vec![(0.1, 0.0), (0.2, 0.25)];
        write_series_csv(&r, &path).unwrap();
        let (xs, fs) = read_series_csv(&path).unwrap();
        assert_eq!(xs, r.threshold_series);
        assert_eq!(fs, r.failure_series);
    }

    #[test]
    fn csv_bytes_are_stable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let r = report(&[(JobStatus::Completed, 2), (JobStatus::Rejected, 1)]);
        write_report_csv(&r, &a).unwrap();
        write_report_csv(&r, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(
            std::fs::read_to_string(&a).unwrap().lines().nth(1),
            Some("alg_2,3,0.666667,0.333333,2,0,0,1,0.500000")
        );
    }

    #[test]
    fn mean_std_basics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_series_weighting() {
        // 0.9 on [0,1), 0.1 on [1,4), final sample closes the interval
        let xs = [(0.0f64, 0.9), (1.0, 0.1), (4.0, 0.1)];
        assert!((time_average(&xs, 0.0).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(time_average(&xs, 2.0).unwrap(), 0.1);
        assert_eq!(time_fraction(&xs, 0.0, |x| x <= 0.3).unwrap(), 0.75);
        assert_eq!(time_fraction(&xs, 5.0, |_| true), None);
        assert_eq!(time_average::<f64>(&[(1.0, 0.5)], 0.0), None);
    }
}
