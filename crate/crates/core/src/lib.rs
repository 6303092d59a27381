// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Deadline-aware scheduling of HPC jobs in virtual machines.
//!
//! A single contended node runs a FIFO queue of deadline-constrained jobs.
//! Each job suffers a virtualization slowdown that depends on its workload
//! class and, in dynamic mode, on how many VMs share the host. A threshold
//! controller compares every job's x-factor (the share of its remaining
//! effective duration that no longer fits before its deadline) against a
//! threshold to decide admission and early termination.
//!
//! All numeric code is generic over [`num::Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

// Validation writes `!(a > b)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod num;
pub mod overhead;
pub mod plot;
pub mod policy;
pub mod preset;
pub mod rng;
pub mod runner;
pub mod train;
pub mod workload;

pub use engine::{FailureCounting, JobStatus};
pub use error::{Error, Result};
pub use overhead::OverheadMode;
pub use policy::{ControllerKind, Phase, Verdict};
pub use preset::Preset;
pub use workload::WorkloadClass;

pub type JobSpec = workload::JobSpec<f64>;
pub type WorkloadSpec = workload::WorkloadSpec<f64>;
pub type ClassMap = workload::ClassMap<f64>;
pub type OverheadModel = overhead::OverheadModel<f64>;
pub type ControllerParams = policy::ControllerParams<f64>;
pub type ThresholdController = policy::ThresholdController<f64>;
pub type JobState = engine::JobState<f64>;
pub type NodeState = engine::NodeState<f64>;
pub type SimConfig = engine::SimConfig<f64>;
pub type Simulation = engine::Simulation<f64>;
pub type RunReport = metrics::RunReport<f64>;
pub type ExperimentConfig = config::ExperimentConfig<f64>;
pub type SweepGrid = train::SweepGrid<f64>;
pub type CalibratedParams = train::CalibratedParams<f64>;
