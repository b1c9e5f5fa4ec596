//! Seeded arrival streams.
//!
//! Trial `i` of a run with master seed `m` uses the stream seeded with
//! `trial_seed(m, i)`; each arrival consumes exactly one `u64`.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::wrap_angle;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed derived from the master seed and the trial index.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Uniform arrival angles in `(-pi, pi]`.
#[derive(Clone, Debug)]
pub struct ArrivalStream {
    rng: ChaCha8Rng,
}

impl ArrivalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_angle(&mut self) -> f64 {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        wrap_angle(-PI + 2.0 * PI * unit)
    }
}

/// Arrival instants `0, T, 2T, ...` up to and including `horizon`, each with
/// its angle.
pub fn schedule_arrivals(horizon: f64, period: f64, stream: &mut ArrivalStream) -> Vec<(f64, f64)> {
    if horizon.is_nan() || horizon < 0.0 || period.is_nan() || period <= 0.0 {
        return Vec::new();
    }
    let count = (horizon / period).floor() as u64 + 1;
    (0..count)
        .map(|n| n as f64 * period)
        .filter(|&t| t <= horizon)
        .map(|t| (t, stream.next_angle()))
        .collect()
}
