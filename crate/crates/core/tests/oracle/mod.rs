// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Fine-grained replay of the scheduling rules, written against the rules
//! rather than the engine. Arrivals, completions and deadlines are located
//! analytically; policy runs at period multiples; dynamic slowdowns are
//! refreshed every `period / 100`.

use std::collections::VecDeque;

use vmsched::engine::SimConfig;
use vmsched::overhead::OverheadMode;
use vmsched::workload::JobSpec;
use vmsched::{ControllerKind, JobStatus};

pub const SUBSTEPS: u64 = 100;

struct Job {
    arrival: f64,
    deadline: f64,
    cpu: f64,
    mem: f64,
    class: usize,
    // progress line: work(t) = max(0, w0 - (t - t0) / m)
    t0: f64,
    w0: f64,
    m: f64,
    adm_x: f64,
    status: Option<JobStatus>,
}

impl Job {
    fn work_at(&self, t: f64) -> f64 {
        (self.w0 - (t - self.t0) / self.m).max(0.0)
    }
    fn done_at(&self) -> f64 {
        self.t0 + self.w0 * self.m
    }
}

struct Ctrl {
    kind: ControllerKind,
    x: f64,
    lo: f64,
    hi: f64,
    step: f64,
    target: f64,
    cap: usize,
    window: VecDeque<(f64, bool)>,
}

impl Ctrl {
    fn failure_rate(&self) -> f64 {
        if self.window.is_empty() {
            0.0
        } else {
            self.window.iter().filter(|o| !o.1).count() as f64 / self.window.len() as f64
        }
    }

    fn observe(&mut self, x: f64, ok: bool) {
        if self.window.len() == self.cap {
            self.window.pop_front();
        }
        self.window.push_back((x, ok));
        if self.kind == ControllerKind::Statistical {
            self.x = statistical_brute_force(&self.window, self.target, self.lo, self.hi, self.x);
        }
    }

    fn tick(&mut self) {
        if self.kind != ControllerKind::Adaptive {
            return;
        }
        let f = self.failure_rate();
        let delta = if self.target > f {
            self.step
        } else if self.target < f {
            -self.step
        } else {
            0.0
        };
        self.x = (self.x + delta).max(self.lo).min(self.hi);
    }
}

/// Quadratic reference for the statistical threshold.
pub fn statistical_brute_force(window: &VecDeque<(f64, bool)>, target: f64, lo: f64, hi: f64, current: f64) -> f64 {
    if window.is_empty() {
        return current;
    }
    let mut best: Option<f64> = None;
    for &(q, _) in window {
        let below: Vec<bool> = window.iter().filter(|o| o.0 <= q).map(|o| o.1).collect();
        let ok = below.iter().filter(|&&s| s).count() as f64 / below.len() as f64;
        if ok >= 1.0 - target && best.is_none_or(|b| q > b) {
            best = Some(q);
        }
    }
    match best {
        Some(q) => q.max(lo).min(hi),
        None => lo,
    }
}

fn slowdown(cfg: &SimConfig<f64>, class: usize, co: usize) -> f64 {
    let base = cfg.overhead.base_multiplier.0[class];
    match cfg.overhead.mode {
        OverheadMode::Physical => 1.0,
        OverheadMode::Static => base,
        OverheadMode::Dynamic => base * (1.0 + cfg.overhead.contention_coeff * co as f64),
    }
}

struct World<'a> {
    cfg: &'a SimConfig<f64>,
    jobs: Vec<Job>,
    queue: VecDeque<usize>,
    running: Vec<usize>,
    finished: Vec<usize>,
    ctrl: Ctrl,
}

impl World<'_> {
    fn end(&mut self, i: usize, status: JobStatus) {
        self.jobs[i].status = Some(status);
        if let Some(pos) = self.running.iter().position(|&r| r == i) {
            self.running.remove(pos);
            self.finished.push(i);
        }
    }

    fn fits(&self, i: usize) -> bool {
        let cpu: f64 = self.running.iter().map(|&r| self.jobs[r].cpu).sum();
        let mem: f64 = self.running.iter().map(|&r| self.jobs[r].mem).sum();
        cpu + self.jobs[i].cpu <= self.cfg.cpu_capacity + 1e-9 && mem + self.jobs[i].mem <= self.cfg.mem_capacity + 1e-9
    }

    fn admit(&mut self, t: f64) {
        for _ in 0..self.queue.len() {
            let Some(&i) = self.queue.front() else { return };
            if self.jobs[i].deadline <= t {
                self.queue.pop_front();
                self.end(i, JobStatus::Missed);
                continue;
            }
            let m = slowdown(self.cfg, self.jobs[i].class, self.running.len());
            let need = self.jobs[i].w0 * m;
            let x = 1.0 - (self.jobs[i].deadline - t) / need;
            if x >= self.ctrl.x {
                self.queue.pop_front();
                if self.cfg.requeue_rejected {
                    self.queue.push_back(i);
                } else {
                    self.end(i, JobStatus::Rejected);
                }
                continue;
            }
            if !self.fits(i) {
                return;
            }
            self.queue.pop_front();
            let j = &mut self.jobs[i];
            j.t0 = t;
            j.m = m;
            j.adm_x = x;
            self.running.push(i);
        }
    }

    fn refresh(&mut self, t: f64) {
        let co = self.running.len().saturating_sub(1);
        for &i in &self.running {
            let m = slowdown(self.cfg, self.jobs[i].class, co);
            let j = &mut self.jobs[i];
            if m != j.m {
                j.w0 = j.work_at(t);
                j.t0 = t;
                j.m = m;
            }
        }
    }
}

/// Terminal status of every job under the replay.
pub fn replay(cfg: &SimConfig<f64>, specs: &[JobSpec<f64>]) -> Vec<JobStatus> {
    let p = &cfg.controller;
    let mut w = World {
        cfg,
        jobs: specs
            .iter()
            .map(|s| Job {
                arrival: s.arrival_time,
                deadline: s.deadline,
                cpu: s.cpu_demand,
                mem: s.mem_demand,
                class: s.workload_class.index(),
                t0: 0.0,
                w0: s.base_duration,
                m: 1.0,
                adm_x: 0.0,
                status: None,
            })
            .collect(),
        queue: VecDeque::new(),
        running: Vec::new(),
        finished: Vec::new(),
        ctrl: Ctrl {
            kind: p.kind,
            x: p.initial_x,
            lo: p.x_min,
            hi: p.x_max,
            step: p.delta_x,
            target: p.failure_target,
            cap: p.window_size,
            window: VecDeque::new(),
        },
    };
    let n = specs.len();
    let period = cfg.scheduler_period;
    let h = period / SUBSTEPS as f64;
    let mut next = 0;
    let mut t = 0.0;
    let mut step = 0u64;
    while next < n || !w.queue.is_empty() || !w.running.is_empty() {
        step += 1;
        let tick = step.is_multiple_of(SUBSTEPS);
        let b = if tick { period * (step / SUBSTEPS) as f64 } else { h * step as f64 };

        loop {
            let mut at = f64::INFINITY;
            if next < n && w.jobs[next].arrival <= b {
                at = w.jobs[next].arrival;
            }
            for &i in &w.running {
                at = at.min(w.jobs[i].done_at()).min(w.jobs[i].deadline);
            }
            if at > b {
                break;
            }
            let at = at.max(t);
            t = at;
            let done: Vec<usize> = w.running.iter().copied().filter(|&i| w.jobs[i].done_at() <= at).collect();
            for i in done {
                w.end(i, JobStatus::Completed);
            }
            let late: Vec<usize> = w.running.iter().copied().filter(|&i| w.jobs[i].deadline <= at).collect();
            for i in late {
                w.end(i, JobStatus::Missed);
            }
            while next < n && w.jobs[next].arrival <= at {
                w.queue.push_back(next);
                next += 1;
            }
            w.admit(at);
        }
        t = b;

        if tick {
            let expired: Vec<usize> = w.queue.iter().copied().filter(|&i| w.jobs[i].deadline <= t).collect();
            w.queue.retain(|&i| w.jobs[i].deadline > t);
            for i in expired {
                w.end(i, JobStatus::Missed);
            }
            if cfg.kill_running {
                let co = w.running.len().saturating_sub(1);
                let doomed: Vec<usize> = w
                    .running
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let j = &w.jobs[i];
                        let need = j.work_at(t) * slowdown(cfg, j.class, co);
                        need > 0.0 && 1.0 - (j.deadline - t) / need >= w.ctrl.x
                    })
                    .collect();
                for i in doomed {
                    w.end(i, JobStatus::Killed);
                }
            }
            w.admit(t);
            for i in std::mem::take(&mut w.finished) {
                let ok = w.jobs[i].status == Some(JobStatus::Completed);
                let x = w.jobs[i].adm_x;
                w.ctrl.observe(x, ok);
            }
            w.ctrl.tick();
        }
        w.refresh(t);
    }
    w.jobs.iter().map(|j| j.status.expect("every job ends")).collect()
}
