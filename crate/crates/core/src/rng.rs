// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Seed derivation.
//!
//! Every source of randomness is a ChaCha8 stream keyed by
//! `splitmix64(seed ^ stream_tag)`. Each module owns a fixed tag so adding
//! draws in one module never perturbs the sequence seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for job generation.
pub const STREAM_WORKLOAD: u64 = 0x574f_524b_4c4f_4144; // "WORKLOAD"
/// Stream tag reserved for test plants and exploratory tooling.
pub const STREAM_PLANT: u64 = 0x504c_414e_5400_0000; // "PLANT"

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator for `stream` under the run seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ stream))
}
