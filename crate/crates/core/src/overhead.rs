// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Virtualization slowdown.
//!
//! A job running with multiplier `m` completes one hour of physical work per
//! `m` wall-clock hours.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::workload::{ClassMap, WorkloadClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OverheadMode {
    /// Bare metal, multiplier is always 1.
    Physical,
    /// Per-class multiplier, independent of what else runs on the node.
    Static,
    /// Per-class multiplier inflated by live co-residency.
    Dynamic,
}

impl OverheadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OverheadMode::Physical => "physical",
            OverheadMode::Static => "static",
            OverheadMode::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for OverheadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OverheadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(OverheadMode::Physical),
            "static" => Ok(OverheadMode::Static),
            "dynamic" => Ok(OverheadMode::Dynamic),
            other => Err(Error::config("overhead.mode", format!("`{other}` is not one of physical, static, dynamic"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverheadModel<T> {
    pub mode: OverheadMode,
    pub base_multiplier: ClassMap<T>,
    /// Extra relative slowdown per co-resident VM; dynamic mode only.
    pub contention_coeff: T,
}

impl<T: Scalar> OverheadModel<T> {
    pub fn physical() -> Self {
        OverheadModel {
            mode: OverheadMode::Physical,
            base_multiplier: ClassMap::new(T::one(), T::one(), T::one()),
            contention_coeff: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (class, m) in self.base_multiplier.iter() {
            if !(m >= T::one()) {
                return Err(Error::config(
                    format!("overhead.{}.{class}", self.mode),
                    format!("multiplier {m} must be >= 1"),
                ));
            }
        }
        if !(self.contention_coeff >= T::zero()) {
            return Err(Error::config("overhead.contention_coeff", "must be >= 0"));
        }
        Ok(())
    }

    /// Slowdown for a job of `class` sharing the node with `co_residents` other VMs.
    pub fn multiplier(&self, class: WorkloadClass, co_residents: usize) -> T {
        overhead_multiplier(self, class, co_residents)
    }
}

pub fn overhead_multiplier<T: Scalar>(model: &OverheadModel<T>, class: WorkloadClass, co_residents: usize) -> T {
    match model.mode {
        OverheadMode::Physical => T::one(),
        OverheadMode::Static => model.base_multiplier[class],
        OverheadMode::Dynamic => {
            let n = T::from_usize(co_residents).unwrap_or_else(T::max_value);
            model.base_multiplier[class] * (T::one() + model.contention_coeff * n)
        }
    }
}

/// Work left after `wall_dt` hours at `multiplier`, floored at zero.
pub fn advance_progress<T: Scalar>(work_remaining: T, wall_dt: T, multiplier: T) -> T {
    (work_remaining - wall_dt / multiplier).max(T::zero())
}
