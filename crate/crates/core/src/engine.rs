// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Discrete-event simulation of one node.
//!
//! Time moves in scheduler ticks of `scheduler_period` hours. Inside a tick,
//! arrivals, completions and deadline expiries are handled at their exact
//! instants, and every one of them triggers an admission pass over the FIFO
//! queue. Running jobs progress at the multiplier frozen at their admission
//! or at the last tick boundary, whichever is later. At the tick boundary the
//! engine, in order:
//!
//! 1. brings every running job's progress up to the boundary,
//! 2. retires queued jobs whose deadline has passed,
//! 3. kills running jobs whose x-factor reached the threshold,
//! 4. runs an admission pass,
//! 5. feeds the outcomes finished during the tick to the controller and lets
//!    it update, then refreshes dynamic multipliers from live co-residency.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{self, RunReport};
use crate::num::Scalar;
use crate::overhead::{advance_progress, OverheadModel};
use crate::policy::{x_factor, ControllerParams, Phase, ThresholdController, Verdict};
use crate::preset::Preset;
use crate::workload::{generate_workload, JobSpec, WorkloadSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JobStatus {
    Queued,
    Running,
    Completed,
    Missed,
    Killed,
    Rejected,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, JobStatus::Queued | JobStatus::Running)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobState<T> {
    pub spec: JobSpec<T>,
    /// Physical-speed hours of work left.
    pub work_remaining: T,
    pub status: JobStatus,
    pub admitted_at: Option<T>,
    pub admission_x: Option<T>,
    pub finished_at: Option<T>,
    /// Slowdown applied until the next refresh.
    pub multiplier: T,
    // Progress is measured from the last multiplier change so constant-rate
    // jobs accumulate no rounding drift.
    anchor_time: T,
    anchor_work: T,
}

impl<T: Scalar> JobState<T> {
    pub fn new(spec: JobSpec<T>) -> Self {
        JobState {
            work_remaining: spec.base_duration,
            anchor_work: spec.base_duration,
            spec,
            status: JobStatus::Queued,
            admitted_at: None,
            admission_x: None,
            finished_at: None,
            multiplier: T::one(),
            anchor_time: T::zero(),
        }
    }

    /// Finished by its deadline.
    pub fn succeeded(&self) -> bool {
        self.status == JobStatus::Completed
    }

    fn rebase(&mut self, now: T, multiplier: T) {
        self.anchor_time = now;
        self.anchor_work = self.work_remaining;
        self.multiplier = multiplier;
    }

    fn completion_time(&self) -> T {
        self.anchor_time + self.anchor_work * self.multiplier
    }

    fn set_terminal(&mut self, status: JobStatus, now: T) {
        debug_assert!(!self.status.is_terminal(), "terminal statuses are absorbing");
        self.status = status;
        self.finished_at = Some(now);
    }
}

/// Host capacity plus the indices of resident jobs.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState<T> {
    pub cpu_capacity: T,
    pub mem_capacity: T,
    pub running: Vec<usize>,
}

impl<T: Scalar> NodeState<T> {
    pub fn new(cpu_capacity: T, mem_capacity: T) -> Self {
        NodeState { cpu_capacity, mem_capacity, running: Vec::new() }
    }

    pub fn used(&self, jobs: &[JobState<T>]) -> (T, T) {
        self.running
            .iter()
            .fold((T::zero(), T::zero()), |(c, m), &i| (c + jobs[i].spec.cpu_demand, m + jobs[i].spec.mem_demand))
    }

    pub fn fits(&self, jobs: &[JobState<T>], job: &JobSpec<T>) -> bool {
        let (cpu, mem) = self.used(jobs);
        let slop = T::lit(1e-9);
        cpu + job.cpu_demand <= self.cpu_capacity + slop && mem + job.mem_demand <= self.mem_capacity + slop
    }

    /// Number of other VMs `job` shares the host with, counting it as resident.
    pub fn co_residents(&self, job: &JobState<T>) -> usize {
        match job.status {
            JobStatus::Running => self.running.len().saturating_sub(1),
            _ => self.running.len(),
        }
    }
}

/// Hours a job still needs at the slowdown it would see under the current
/// co-residency. A queued job is evaluated as if admitted now.
pub fn effective_remaining<T: Scalar>(job: &JobState<T>, model: &OverheadModel<T>, node: &NodeState<T>) -> T {
    job.work_remaining * model.multiplier(job.spec.workload_class, node.co_residents(job))
}

/// Which finished admitted jobs the controller counts as failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FailureCounting {
    /// Killed and deadline-missing jobs.
    Both,
    KilledOnly,
    MissedOnly,
}

impl FailureCounting {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureCounting::Both => "both",
            FailureCounting::KilledOnly => "killed",
            FailureCounting::MissedOnly => "missed",
        }
    }

    fn counts(self, status: JobStatus) -> bool {
        matches!(
            (self, status),
            (_, JobStatus::Completed)
                | (FailureCounting::Both, JobStatus::Killed | JobStatus::Missed)
                | (FailureCounting::KilledOnly, JobStatus::Killed)
                | (FailureCounting::MissedOnly, JobStatus::Missed)
        )
    }
}

impl fmt::Display for FailureCounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FailureCounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(FailureCounting::Both),
            "killed" => Ok(FailureCounting::KilledOnly),
            "missed" => Ok(FailureCounting::MissedOnly),
            other => {
                Err(Error::config("engine.failure_counting", format!("`{other}` is not one of both, killed, missed")))
            }
        }
    }
}

/// Everything a single run depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig<T> {
    /// Overrides `workload.seed`.
    pub seed: u64,
    pub workload: WorkloadSpec<T>,
    pub overhead: OverheadModel<T>,
    pub controller: ControllerParams<T>,
    /// Hours between policy ticks.
    pub scheduler_period: T,
    pub preset: Option<Preset>,
    pub kill_running: bool,
    /// Send rejected jobs to the back of the queue instead of dropping them.
    pub requeue_rejected: bool,
    pub failure_counting: FailureCounting,
    pub cpu_capacity: T,
    pub mem_capacity: T,
}

impl<T: Scalar> Default for SimConfig<T> {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            workload: WorkloadSpec::default(),
            overhead: OverheadModel::physical(),
            controller: ControllerParams::default(),
            scheduler_period: T::lit(0.1),
            preset: None,
            kill_running: true,
            requeue_rejected: false,
            failure_counting: FailureCounting::Both,
            cpu_capacity: T::lit(4.0),
            mem_capacity: T::lit(8.0),
        }
    }
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.scheduler_period > T::zero()) {
            return Err(Error::config("engine.scheduler_period", "must be > 0"));
        }
        if !(self.cpu_capacity > T::zero()) {
            return Err(Error::config("node.cpu", "must be > 0"));
        }
        if !(self.mem_capacity > T::zero()) {
            return Err(Error::config("node.mem", "must be > 0"));
        }
        self.workload.validate()?;
        self.overhead.validate()?;
        self.controller.validate()
    }

    pub fn workload_spec(&self) -> WorkloadSpec<T> {
        WorkloadSpec { seed: self.seed, ..self.workload.clone() }
    }
}

/// `(t, value)` change points of a step function: the first tick, every tick
/// where the value moves, and the last tick.
pub type Series<T> = Vec<(T, T)>;

/// A run in progress.
#[derive(Debug)]
pub struct Simulation<T> {
    config: SimConfig<T>,
    jobs: Vec<JobState<T>>,
    node: NodeState<T>,
    controller: ThresholdController<T>,
    queue: VecDeque<usize>,
    next_arrival: usize,
    now: T,
    ticks: u64,
    /// Admitted jobs that finished since the last tick boundary.
    finished: Vec<usize>,
    cpu_hours: T,
    last_event: T,
    threshold_series: Series<T>,
    failure_series: Series<T>,
}

impl<T: Scalar> Simulation<T> {
    /// Prepares a run over an explicit queue. Jobs must be sorted by arrival.
    pub fn new(config: SimConfig<T>, jobs: Vec<JobSpec<T>>) -> Result<Self> {
        config.validate()?;
        for job in &jobs {
            if !(job.cpu_demand > T::zero() && job.cpu_demand <= config.cpu_capacity) {
                return Err(Error::config(
                    "workload.cpu_high",
                    format!("job {} demands {} cores on a {}-core node", job.id, job.cpu_demand, config.cpu_capacity),
                ));
            }
            if !(job.mem_demand > T::zero() && job.mem_demand <= config.mem_capacity) {
                return Err(Error::config(
                    "workload.mem_high",
                    format!("job {} demands {} GB on a {} GB node", job.id, job.mem_demand, config.mem_capacity),
                ));
            }
            if !(job.base_duration > T::zero()) || !(job.deadline > job.arrival_time) {
                return Err(Error::config(
                    "workload",
                    format!("job {} has a non-positive duration or deadline window", job.id),
                ));
            }
        }
        if jobs.windows(2).any(|w| w[1].arrival_time < w[0].arrival_time) {
            return Err(Error::config("workload", "jobs must be sorted by arrival time"));
        }
        let controller = ThresholdController::new(config.controller.clone())?;
        let node = NodeState::new(config.cpu_capacity, config.mem_capacity);
        Ok(Simulation {
            jobs: jobs.into_iter().map(JobState::new).collect(),
            node,
            controller,
            queue: VecDeque::new(),
            next_arrival: 0,
            now: T::zero(),
            ticks: 0,
            finished: Vec::new(),
            cpu_hours: T::zero(),
            last_event: T::zero(),
            threshold_series: Vec::new(),
            failure_series: Vec::new(),
            config,
        })
    }

    pub fn now(&self) -> T {
        self.now
    }

    pub fn jobs(&self) -> &[JobState<T>] {
        &self.jobs
    }

    pub fn node(&self) -> &NodeState<T> {
        &self.node
    }

    pub fn controller(&self) -> &ThresholdController<T> {
        &self.controller
    }

    pub fn is_done(&self) -> bool {
        self.next_arrival == self.jobs.len() && self.queue.is_empty() && self.node.running.is_empty()
    }

    /// Advances one scheduler period. Returns `false` once every job is terminal.
    pub fn tick(&mut self) -> bool {
        if self.is_done() {
            return false;
        }
        self.ticks += 1;
        let boundary = self.config.scheduler_period * T::from_u64(self.ticks).unwrap();
        self.run_events_until(boundary);
        self.advance_to(boundary);

        self.expire_queued();
        if self.config.kill_running {
            self.kill_at_risk();
        }
        self.admit();
        self.feed_controller();
        self.refresh_multipliers();
        self.check_capacity();

        let done = self.is_done();
        self.log_series(done);
        !done
    }

    // Both series are step functions of time, so a sample is kept only where
    // either value moves, plus the first and last tick.
    fn log_series(&mut self, last: bool) {
        let x = self.controller.x_thresh();
        let f = self.controller.measured_failure_rate();
        let moved = match (self.threshold_series.last(), self.failure_series.last()) {
            (Some(&(_, px)), Some(&(_, pf))) => px != x || pf != f,
            _ => true,
        };
        if moved || last {
            self.threshold_series.push((self.now, x));
            self.failure_series.push((self.now, f));
        }
    }

    /// Runs to completion and summarizes.
    pub fn run(mut self) -> Result<RunReport<T>> {
        while self.tick() {}
        self.into_report()
    }

    pub fn into_report(self) -> Result<RunReport<T>> {
        let makespan = self.last_event;
        let utilization =
            if makespan > T::zero() { self.cpu_hours / (self.config.cpu_capacity * makespan) } else { T::zero() };
        let label = self.config.preset.map_or_else(|| "custom".to_string(), |p| p.to_string());
        metrics::summarize(label, self.config.seed, &self.jobs, utilization, self.threshold_series, self.failure_series)
    }

    fn run_events_until(&mut self, boundary: T) {
        loop {
            let arrival = self.jobs.get(self.next_arrival).map(|j| j.spec.arrival_time).filter(|&t| t <= boundary);
            let completion = self.running_min(JobState::completion_time);
            let expiry = self.running_min(|j| j.spec.deadline);

            let next = [arrival, completion.map(|c| c.1), expiry.map(|e| e.1)]
                .into_iter()
                .flatten()
                .filter(|&t| t <= boundary)
                .fold(None, |acc: Option<T>, t| Some(acc.map_or(t, |a| a.min(t))));
            let Some(at) = next else { break };
            let at = at.max(self.now);
            self.advance_to(at);

            // Order at a shared instant: completions, expiries, arrivals.
            if let Some((idx, t)) = completion {
                if t <= at {
                    self.jobs[idx].work_remaining = T::zero();
                    self.retire(idx, JobStatus::Completed);
                    self.admit();
                    continue;
                }
            }
            if let Some((idx, t)) = expiry {
                if t <= at {
                    self.retire(idx, JobStatus::Missed);
                    self.admit();
                    continue;
                }
            }
            while let Some(job) = self.jobs.get(self.next_arrival) {
                if job.spec.arrival_time > at {
                    break;
                }
                self.queue.push_back(self.next_arrival);
                self.next_arrival += 1;
            }
            self.admit();
        }
    }

    fn running_min(&self, key: impl Fn(&JobState<T>) -> T) -> Option<(usize, T)> {
        self.node.running.iter().map(|&i| (i, key(&self.jobs[i]))).fold(None, |best, (i, t)| match best {
            Some((_, bt)) if bt <= t => best,
            _ => Some((i, t)),
        })
    }

    fn advance_to(&mut self, t: T) {
        let dt = t - self.now;
        if dt > T::zero() {
            for &i in &self.node.running {
                let job = &mut self.jobs[i];
                let spent = (job.work_remaining * job.multiplier).min(dt);
                job.work_remaining = advance_progress(job.anchor_work, t - job.anchor_time, job.multiplier);
                self.cpu_hours = self.cpu_hours + job.spec.cpu_demand * spent;
            }
        }
        self.now = t;
    }

    fn retire(&mut self, idx: usize, status: JobStatus) {
        self.node.running.retain(|&i| i != idx);
        self.jobs[idx].set_terminal(status, self.now);
        self.finished.push(idx);
        self.last_event = self.now;
    }

    fn drop_queued(&mut self, idx: usize, status: JobStatus) {
        self.jobs[idx].set_terminal(status, self.now);
        self.last_event = self.now;
    }

    /// FIFO admission pass. A head job failing the x test is rejected
    /// immediately; one passing it but not fitting blocks the queue.
    fn admit(&mut self) {
        let mut budget = self.queue.len();
        while budget > 0 {
            let Some(&idx) = self.queue.front() else { break };
            budget -= 1;
            if self.jobs[idx].spec.deadline <= self.now {
                self.queue.pop_front();
                self.drop_queued(idx, JobStatus::Missed);
                continue;
            }
            let job = &self.jobs[idx];
            let mult = self.config.overhead.multiplier(job.spec.workload_class, self.node.running.len());
            let x =
                x_factor(job.work_remaining * mult, job.spec.deadline - self.now).expect("queued job has work left");
            match self.controller.decide(x, Phase::Admission).verdict {
                Verdict::Reject => {
                    self.queue.pop_front();
                    if self.config.requeue_rejected {
                        self.queue.push_back(idx);
                    } else {
                        self.drop_queued(idx, JobStatus::Rejected);
                    }
                }
                _ => {
                    if !self.node.fits(&self.jobs, &job.spec) {
                        break;
                    }
                    self.queue.pop_front();
                    let job = &mut self.jobs[idx];
                    job.status = JobStatus::Running;
                    job.admitted_at = Some(self.now);
                    job.admission_x = Some(x);
                    job.rebase(self.now, mult);
                    self.node.running.push(idx);
                }
            }
        }
    }

    fn expire_queued(&mut self) {
        let now = self.now;
        let expired: Vec<usize> = self.queue.iter().copied().filter(|&i| self.jobs[i].spec.deadline <= now).collect();
        if expired.is_empty() {
            return;
        }
        self.queue.retain(|&i| self.jobs[i].spec.deadline > now);
        for idx in expired {
            self.drop_queued(idx, JobStatus::Missed);
        }
    }

    fn kill_at_risk(&mut self) {
        let doomed: Vec<usize> = self
            .node
            .running
            .iter()
            .copied()
            .filter(|&i| {
                let job = &self.jobs[i];
                let remaining = effective_remaining(job, &self.config.overhead, &self.node);
                match x_factor(remaining, job.spec.deadline - self.now) {
                    Some(x) => self.controller.decide(x, Phase::Running).verdict == Verdict::Kill,
                    None => false,
                }
            })
            .collect();
        for idx in doomed {
            self.retire(idx, JobStatus::Killed);
        }
    }

    fn feed_controller(&mut self) {
        let counting = self.config.failure_counting;
        for idx in self.finished.drain(..) {
            let job = &self.jobs[idx];
            if counting.counts(job.status) {
                let x = job.admission_x.expect("finished jobs were admitted");
                self.controller.observe(x, job.succeeded());
            }
        }
        self.controller.on_tick();
    }

    fn refresh_multipliers(&mut self) {
        let co = self.node.running.len().saturating_sub(1);
        for &i in &self.node.running {
            let job = &mut self.jobs[i];
            let mult = self.config.overhead.multiplier(job.spec.workload_class, co);
            if mult != job.multiplier {
                job.rebase(self.now, mult);
            }
        }
    }

    fn check_capacity(&self) {
        let (cpu, mem) = self.node.used(&self.jobs);
        let slop = T::lit(1e-6);
        assert!(
            cpu <= self.node.cpu_capacity + slop && mem <= self.node.mem_capacity + slop,
            "node over capacity at t={}: cpu {cpu}, mem {mem}",
            self.now
        );
    }
}

/// Generates the configured workload and simulates it to completion.
pub fn run<T: Scalar>(config: &SimConfig<T>) -> Result<RunReport<T>> {
    let jobs = generate_workload(&config.workload_spec())?;
    Simulation::new(config.clone(), jobs)?.run()
}

/// Simulates an explicit queue, returning the report and the final job states.
pub fn run_jobs<T: Scalar>(config: &SimConfig<T>, jobs: Vec<JobSpec<T>>) -> Result<(RunReport<T>, Vec<JobState<T>>)> {
    let mut sim = Simulation::new(config.clone(), jobs)?;
    while sim.tick() {}
    let states = sim.jobs.clone();
    Ok((sim.into_report()?, states))
}
