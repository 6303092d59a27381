// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Synthetic job queues.
//!
//! A queue is a pure function of its [`WorkloadSpec`]: job classes, durations,
//! resource demands and Poisson arrivals are all drawn from one seeded stream.

use std::fmt;
use std::io::Write;
use std::ops::{Index, IndexMut};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::rng::{stream_rng, STREAM_WORKLOAD};

/// Dominant resource pressure of a job.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WorkloadClass {
    CpuBound,
    MemBound,
    IoBound,
}

impl WorkloadClass {
    pub const ALL: [WorkloadClass; 3] = [WorkloadClass::CpuBound, WorkloadClass::MemBound, WorkloadClass::IoBound];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadClass::CpuBound => "cpu_bound",
            WorkloadClass::MemBound => "mem_bound",
            WorkloadClass::IoBound => "io_bound",
        }
    }
}

impl fmt::Display for WorkloadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WorkloadClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cpu_bound" | "cpu" => Ok(WorkloadClass::CpuBound),
            "mem_bound" | "mem" => Ok(WorkloadClass::MemBound),
            "io_bound" | "io" => Ok(WorkloadClass::IoBound),
            other => {
                Err(Error::config("workload_class", format!("`{other}` is not one of cpu_bound, mem_bound, io_bound")))
            }
        }
    }
}

/// One value per [`WorkloadClass`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassMap<T>(pub [T; 3]);

impl<T: Copy> ClassMap<T> {
    pub fn new(cpu_bound: T, mem_bound: T, io_bound: T) -> Self {
        ClassMap([cpu_bound, mem_bound, io_bound])
    }

    pub fn iter(&self) -> impl Iterator<Item = (WorkloadClass, T)> + '_ {
        WorkloadClass::ALL.iter().map(move |&c| (c, self.0[c.index()]))
    }
}

impl<T> Index<WorkloadClass> for ClassMap<T> {
    type Output = T;

    fn index(&self, class: WorkloadClass) -> &T {
        &self.0[class.index()]
    }
}

impl<T> IndexMut<WorkloadClass> for ClassMap<T> {
    fn index_mut(&mut self, class: WorkloadClass) -> &mut T {
        &mut self.0[class.index()]
    }
}

/// A unit of HPC work as submitted to the node.
#[derive(Clone, Debug, PartialEq)]
pub struct JobSpec<T> {
    pub id: u64,
    /// Hours of work at physical (overhead-free) speed.
    pub base_duration: T,
    pub arrival_time: T,
    /// Absolute simulation time.
    pub deadline: T,
    /// Cores, fractional allowed.
    pub cpu_demand: T,
    /// GB.
    pub mem_demand: T,
    pub workload_class: WorkloadClass,
}

/// Low/high resource levels and how likely each class is to draw the high one.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandProfile<T> {
    pub cpu_levels: (T, T),
    pub mem_levels: (T, T),
    pub high_cpu_prob: ClassMap<T>,
    pub high_mem_prob: ClassMap<T>,
}

impl<T: Scalar> Default for DemandProfile<T> {
    fn default() -> Self {
        DemandProfile {
            cpu_levels: (T::lit(1.0), T::lit(2.0)),
            mem_levels: (T::lit(1.0), T::lit(3.0)),
            high_cpu_prob: ClassMap::new(T::lit(0.8), T::lit(0.2), T::lit(0.2)),
            high_mem_prob: ClassMap::new(T::lit(0.2), T::lit(0.8), T::lit(0.2)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec<T> {
    /// Target sum of `base_duration` over the queue.
    pub total_hours: T,
    /// Probability weights per class; must sum to 1.
    pub class_mix: ClassMap<T>,
    /// Inclusive `[min, max]` hours, sampled uniformly.
    pub duration_range: (T, T),
    /// Deadline buffer as a fraction of job duration.
    pub deadline_slack: T,
    /// Mean inter-arrival gap as a fraction of the mean job duration.
    pub arrival_gap: T,
    pub seed: u64,
    pub demand: DemandProfile<T>,
}

impl<T: Scalar> Default for WorkloadSpec<T> {
    fn default() -> Self {
        WorkloadSpec {
            total_hours: T::lit(100_000.0),
            class_mix: ClassMap::new(T::lit(0.4), T::lit(0.4), T::lit(0.2)),
            duration_range: (T::lit(1.0), T::lit(24.0)),
            deadline_slack: T::lit(0.05),
            arrival_gap: T::lit(4.0),
            seed: 0,
            demand: DemandProfile::default(),
        }
    }
}

impl<T: Scalar> WorkloadSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.total_hours > T::zero()) {
            return Err(Error::config("workload.total_hours", "must be > 0"));
        }
        let mut sum = T::zero();
        for (class, w) in self.class_mix.iter() {
            if !(w >= T::zero()) {
                return Err(Error::config(format!("workload.class_mix.{class}"), "weight must be nonnegative"));
            }
            sum = sum + w;
        }
        if (sum - T::one()).abs().as_f64() > 1e-9 {
            return Err(Error::config("workload.class_mix", format!("weights sum to {sum}, expected 1")));
        }
        let (lo, hi) = self.duration_range;
        if !(lo > T::zero()) {
            return Err(Error::config("workload.duration_min", "must be > 0"));
        }
        if !(hi >= lo) {
            return Err(Error::config("workload.duration_max", "must be >= workload.duration_min"));
        }
        if !(self.deadline_slack >= T::zero()) {
            return Err(Error::config("workload.deadline_slack", "must be >= 0"));
        }
        if !(self.arrival_gap > T::zero()) {
            return Err(Error::config("workload.arrival_gap", "must be > 0"));
        }
        let d = &self.demand;
        for (name, (low, high)) in [("cpu", d.cpu_levels), ("mem", d.mem_levels)] {
            if !(low > T::zero()) || !(high >= low) {
                return Err(Error::config(
                    format!("workload.{name}_low"),
                    "demand levels must satisfy 0 < low <= high",
                ));
            }
        }
        for (name, probs) in [("cpu", &d.high_cpu_prob), ("mem", &d.high_mem_prob)] {
            for (class, p) in probs.iter() {
                if !(p >= T::zero() && p <= T::one()) {
                    return Err(Error::config(
                        format!("workload.high_{name}_prob.{class}"),
                        "probability must lie in [0, 1]",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn mean_duration(&self) -> T {
        (self.duration_range.0 + self.duration_range.1) / T::lit(2.0)
    }
}

/// `arrival + duration * (1 + slack)`.
pub fn assign_deadline<T: Scalar>(job_duration: T, arrival: T, slack: T) -> Result<T> {
    if !(slack >= T::zero()) {
        return Err(Error::config("workload.deadline_slack", "must be >= 0"));
    }
    if !(job_duration > T::zero()) {
        return Err(Error::config("base_duration", "must be > 0"));
    }
    Ok(arrival + job_duration * (T::one() + slack))
}

fn draw<T: Scalar, R: Rng>(rng: &mut R) -> T {
    T::lit(rng.gen::<f64>())
}

fn pick_class<T: Scalar>(mix: &ClassMap<T>, u: T) -> WorkloadClass {
    let mut acc = T::zero();
    for (class, w) in mix.iter() {
        acc = acc + w;
        if u < acc {
            return class;
        }
    }
    // u fell into rounding slack above the last cumulative weight.
    WorkloadClass::ALL.iter().rev().copied().find(|&c| mix[c] > T::zero()).unwrap_or(WorkloadClass::CpuBound)
}

/// Builds the job queue described by `spec`, sorted by arrival time.
///
/// Durations are drawn until the queue volume reaches `total_hours`; the last
/// job is shortened to land on the target when that keeps it inside
/// `duration_range`.
pub fn generate_workload<T: Scalar>(spec: &WorkloadSpec<T>) -> Result<Vec<JobSpec<T>>> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, STREAM_WORKLOAD);
    let (dmin, dmax) = spec.duration_range;
    let mean_gap = spec.arrival_gap * spec.mean_duration();
    let demand = &spec.demand;

    let mut jobs = Vec::new();
    let mut volume = T::zero();
    let mut clock = T::zero();
    while volume < spec.total_hours {
        let u_gap: T = draw(&mut rng);
        let u_class: T = draw(&mut rng);
        let u_dur: T = draw(&mut rng);
        let u_cpu: T = draw(&mut rng);
        let u_mem: T = draw(&mut rng);

        clock = clock - (T::one() - u_gap).ln() * mean_gap;
        let class = pick_class(&spec.class_mix, u_class);
        let mut duration = dmin + (dmax - dmin) * u_dur;
        let left = spec.total_hours - volume;
        if duration >= left {
            if left >= dmin {
                duration = left;
            } else {
                break;
            }
        }
        let cpu = if u_cpu < demand.high_cpu_prob[class] { demand.cpu_levels.1 } else { demand.cpu_levels.0 };
        let mem = if u_mem < demand.high_mem_prob[class] { demand.mem_levels.1 } else { demand.mem_levels.0 };
        jobs.push(JobSpec {
            id: jobs.len() as u64,
            base_duration: duration,
            arrival_time: clock,
            deadline: assign_deadline(duration, clock, spec.deadline_slack)?,
            cpu_demand: cpu,
            mem_demand: mem,
            workload_class: class,
        });
        volume = volume + duration;
    }
    Ok(jobs)
}

/// Writes `id,arrival,base_duration,deadline,cpu,mem,class`.
pub fn write_queue_csv<T: Scalar>(jobs: &[JobSpec<T>], path: &Path) -> Result<()> {
    let mut out = String::from("id,arrival,base_duration,deadline,cpu,mem,class\n");
    for j in jobs {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            j.id,
            j.arrival_time.as_f64(),
            j.base_duration.as_f64(),
            j.deadline.as_f64(),
            j.cpu_demand.as_f64(),
            j.mem_demand.as_f64(),
            j.workload_class
        ));
    }
    std::fs::File::create(path).and_then(|mut f| f.write_all(out.as_bytes())).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(total: f64, seed: u64) -> WorkloadSpec<f64> {
        WorkloadSpec { total_hours: total, seed, ..WorkloadSpec::default() }
    }

    #[test]
    fn deadline_examples() {
        assert_eq!(assign_deadline(100.0, 0.0, 0.05).unwrap(), 105.0);
        assert_eq!(assign_deadline(10.0, 50.0, 0.0).unwrap(), 60.0);
        assert!((assign_deadline(24.0f64, 0.0, 0.05).unwrap() - 25.2).abs() < 1e-12);
        assert!(assign_deadline(10.0, 0.0, -0.01).is_err());
    }

    #[test]
    fn same_spec_same_queue() {
        let a = generate_workload(&spec(10_000.0, 7)).unwrap();
        let b = generate_workload(&spec(10_000.0, 7)).unwrap();
        assert_eq!(a, b);
        let c = generate_workload(&spec(10_000.0, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fixed_duration_gives_exact_count() {
        let s = WorkloadSpec { total_hours: 100.0, duration_range: (10.0, 10.0), ..WorkloadSpec::default() };
        let jobs = generate_workload(&s).unwrap();
        assert_eq!(jobs.len(), 10);
        assert!(jobs.iter().all(|j| j.base_duration == 10.0));
    }

    #[test]
    fn class_shares_follow_mix() {
        let s = WorkloadSpec { class_mix: ClassMap::new(0.5, 0.3, 0.2), ..spec(10_000.0, 3) };
        let jobs = generate_workload(&s).unwrap();
        let mut counts = [0usize; 3];
        for j in &jobs {
            counts[j.workload_class.index()] += 1;
        }
        for (class, w) in s.class_mix.iter() {
            let share = counts[class.index()] as f64 / jobs.len() as f64;
            assert!((share - w).abs() <= 0.05, "{class}: {share} vs {w}");
        }
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let bad_mix = WorkloadSpec { class_mix: ClassMap::new(0.5, 0.5, 0.5), ..spec(1000.0, 1) };
        let err = generate_workload(&bad_mix).unwrap_err().to_string();
        assert!(err.contains("workload.class_mix"), "{err}");

        let bad_range = WorkloadSpec { duration_range: (5.0, 2.0), ..spec(1000.0, 1) };
        let err = generate_workload(&bad_range).unwrap_err().to_string();
        assert!(err.contains("workload.duration_max"), "{err}");

        let negative = WorkloadSpec { class_mix: ClassMap::new(1.2, -0.2, 0.0), ..spec(1000.0, 1) };
        let err = generate_workload(&negative).unwrap_err().to_string();
        assert!(err.contains("mem_bound"), "{err}");
    }

    #[test]
    fn works_in_single_precision() {
        let s: WorkloadSpec<f32> = WorkloadSpec { total_hours: 2_000.0, seed: 11, ..WorkloadSpec::default() };
        let jobs = generate_workload(&s).unwrap();
        let volume: f32 = jobs.iter().map(|j| j.base_duration).sum();
        assert!((volume - 2_000.0).abs() / 2_000.0 <= 0.01);
    }

    #[test]
    fn queue_csv_has_header_and_rows() {
        let jobs = generate_workload(&spec(50.0, 2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("queue.csv");
        write_queue_csv(&jobs, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("id,arrival,base_duration,deadline,cpu,mem,class"));
        assert_eq!(lines.count(), jobs.len());
    }

    proptest! {
        #[test]
        fn generated_jobs_respect_invariants(
            seed in any::<u64>(),
            total in 1_000.0f64..20_000.0,
            dmin in 0.5f64..5.0,
            span in 0.0f64..30.0,
            w in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0),
            slack in 0.0f64..0.5,
            gap in 0.05f64..3.0,
        ) {
            let norm = w.0 + w.1 + w.2;
            prop_assume!(norm > 1e-3);
            let s = WorkloadSpec {
                total_hours: total,
                class_mix: ClassMap::new(w.0 / norm, w.1 / norm, w.2 / norm),
                duration_range: (dmin, dmin + span),
                deadline_slack: slack,
                arrival_gap: gap,
                seed,
                demand: DemandProfile::default(),
            };
            let jobs = generate_workload(&s).unwrap();
            let volume: f64 = jobs.iter().map(|j| j.base_duration).sum();
            prop_assert!((volume - total).abs() / total <= 0.01);
            for pair in jobs.windows(2) {
                prop_assert!(pair[0].arrival_time <= pair[1].arrival_time);
            }
            for j in &jobs {
                prop_assert!(j.base_duration > 0.0);
                prop_assert!(j.deadline > j.arrival_time);
                prop_assert!(j.cpu_demand > 0.0 && j.cpu_demand <= 4.0);
                prop_assert!(j.mem_demand > 0.0 && j.mem_demand <= 8.0);
            }
        }
    }
}
