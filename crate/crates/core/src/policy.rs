// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Deadline risk and the threshold controllers built on it.
//!
//! The risk of a job is its x-factor, the share of its remaining effective
//! duration that no longer fits before the deadline. A job proceeds (is
//! admitted, or keeps running) only while its x-factor is strictly below the
//! controller's threshold. Three controllers move that threshold:
//!
//! * [`ControllerKind::Fixed`] never moves it.
//! * [`ControllerKind::Adaptive`] steps it by `delta_x` toward the failure
//!   target once per scheduler tick: down while the measured failure rate is
//!   above target, up while it is below.
//! * [`ControllerKind::Statistical`] sets it to the largest admission x-factor
//!   whose empirical success fraction still meets `1 - failure_target`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::num::{clamp, Scalar};

/// `(work_remaining - time_to_deadline) / work_remaining`, evaluated as
/// `1 - time_to_deadline / work_remaining`.
///
/// Returns `None` when no work remains; such a job is complete and has no risk.
pub fn x_factor<T: Scalar>(work_remaining: T, time_to_deadline: T) -> Option<T> {
    if work_remaining > T::zero() {
        Some(T::one() - time_to_deadline / work_remaining)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Fixed,
    Adaptive,
    Statistical,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Fixed => "fixed",
            ControllerKind::Adaptive => "adaptive",
            ControllerKind::Statistical => "statistical",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(ControllerKind::Fixed),
            "adaptive" => Ok(ControllerKind::Adaptive),
            "statistical" => Ok(ControllerKind::Statistical),
            other => {
                Err(Error::config("controller.kind", format!("`{other}` is not one of fixed, adaptive, statistical")))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Admission,
    Running,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    Continue,
    Kill,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision<T> {
    pub verdict: Verdict,
    pub x_value: T,
}

/// A finished admitted job as seen by the controller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome<T> {
    pub admission_x: T,
    pub succeeded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerParams<T> {
    pub kind: ControllerKind,
    /// Threshold at the start of a run.
    pub initial_x: T,
    pub x_min: T,
    pub x_max: T,
    pub delta_x: T,
    pub failure_target: T,
    pub window_size: usize,
    /// Use the unsigned step `delta_x * |target - measured|` instead of the
    /// signed quantized step. Kept for comparison runs.
    pub unsigned_step: bool,
}

impl<T: Scalar> Default for ControllerParams<T> {
    fn default() -> Self {
        ControllerParams {
            kind: ControllerKind::Fixed,
            initial_x: T::lit(0.9),
            x_min: T::lit(0.1),
            x_max: T::lit(0.9),
            delta_x: T::lit(0.01),
            failure_target: T::lit(0.2),
            window_size: 50,
            unsigned_step: false,
        }
    }
}

impl<T: Scalar> ControllerParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min <= self.x_max) {
            return Err(Error::config("controller.x_min", "must be <= controller.x_max"));
        }
        if !(self.initial_x >= self.x_min && self.initial_x <= self.x_max) {
            return Err(Error::config(
                "controller.initial_x",
                format!("{} outside [{}, {}]", self.initial_x, self.x_min, self.x_max),
            ));
        }
        if !(self.delta_x > T::zero()) {
            return Err(Error::config("controller.delta_x", "must be > 0"));
        }
        if !(self.failure_target >= T::zero() && self.failure_target <= T::one()) {
            return Err(Error::config("controller.failure_target", "must lie in [0, 1]"));
        }
        if self.window_size == 0 {
            return Err(Error::config("controller.window_size", "must be >= 1"));
        }
        Ok(())
    }
}

/// Threshold plus the outcome history that drives it.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdController<T> {
    params: ControllerParams<T>,
    x_thresh: T,
    window: VecDeque<Outcome<T>>,
}

impl<T: Scalar> ThresholdController<T> {
    pub fn new(params: ControllerParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(ThresholdController {
            x_thresh: params.initial_x,
            window: VecDeque::with_capacity(params.window_size),
            params,
        })
    }

    pub fn params(&self) -> &ControllerParams<T> {
        &self.params
    }

    pub fn kind(&self) -> ControllerKind {
        self.params.kind
    }

    pub fn x_thresh(&self) -> T {
        self.x_thresh
    }

    pub fn window(&self) -> &VecDeque<Outcome<T>> {
        &self.window
    }

    /// Strict test: proceed iff `x < x_thresh`.
    pub fn decide(&self, x: T, phase: Phase) -> Decision<T> {
        let proceed = x < self.x_thresh;
        let verdict = match (phase, proceed) {
            (Phase::Admission, true) => Verdict::Accept,
            (Phase::Admission, false) => Verdict::Reject,
            (Phase::Running, true) => Verdict::Continue,
            (Phase::Running, false) => Verdict::Kill,
        };
        Decision { verdict, x_value: x }
    }

    /// Appends to the FIFO outcome window, evicting the oldest entry when full.
    pub fn record_outcome(&mut self, admission_x: T, succeeded: bool) {
        if self.window.len() == self.params.window_size {
            self.window.pop_front();
        }
        self.window.push_back(Outcome { admission_x, succeeded });
    }

    /// Failure fraction of the window; 0 for an empty window.
    pub fn measured_failure_rate(&self) -> T {
        if self.window.is_empty() {
            return T::zero();
        }
        let failures = self.window.iter().filter(|o| !o.succeeded).count();
        T::from_usize(failures).unwrap() / T::from_usize(self.window.len()).unwrap()
    }

    pub fn update_adaptive(&mut self) {
        let p = &self.params;
        let error = p.failure_target - self.measured_failure_rate();
        let step = if p.unsigned_step {
            p.delta_x * error.abs()
        } else if error > T::zero() {
            p.delta_x
        } else if error < T::zero() {
            -p.delta_x
        } else {
            T::zero()
        };
        self.x_thresh = clamp(self.x_thresh + step, p.x_min, p.x_max);
    }

    /// Largest window x-factor `q` with success fraction over `{x <= q}` of at
    /// least `1 - failure_target`, clamped to the bounds. Falls to `x_min`
    /// when no such `q` exists; leaves the threshold alone on an empty window.
    pub fn update_statistical(&mut self) {
        if self.window.is_empty() {
            return;
        }
        let required = T::one() - self.params.failure_target;
        let mut sorted: Vec<Outcome<T>> = self.window.iter().copied().collect();
        sorted.sort_by(|a, b| a.admission_x.partial_cmp(&b.admission_x).unwrap_or(std::cmp::Ordering::Equal));

        let mut best: Option<T> = None;
        let mut successes = 0usize;
        for (i, o) in sorted.iter().enumerate() {
            if o.succeeded {
                successes += 1;
            }
            let last_of_value = sorted.get(i + 1).is_none_or(|next| next.admission_x != o.admission_x);
            if !last_of_value {
                continue;
            }
            let fraction = T::from_usize(successes).unwrap() / T::from_usize(i + 1).unwrap();
            if fraction >= required {
                best = Some(o.admission_x);
            }
        }
        let p = &self.params;
        self.x_thresh = match best {
            Some(q) => clamp(q, p.x_min, p.x_max),
            None => p.x_min,
        };
    }

    /// Per-outcome hook: record, then refresh a statistical threshold.
    pub fn observe(&mut self, admission_x: T, succeeded: bool) {
        self.record_outcome(admission_x, succeeded);
        if self.params.kind == ControllerKind::Statistical {
            self.update_statistical();
        }
    }

    /// Per-tick hook: one quantized step for the adaptive controller.
    pub fn on_tick(&mut self) {
        if self.params.kind == ControllerKind::Adaptive {
            self.update_adaptive();
        }
    }
}
