//! Fixtures shared by the criterion benchmarks under `benches/`.

use funcavg_core::distributions::{round_to_integers, sample_truncated_normal, TruncatedNormalSpec};
use funcavg_core::{RngStream, Sample};

/// `n` draws from TN(0, 15, 10, 3).
pub fn continuous(n: usize, seed: u64) -> Sample {
    let law = TruncatedNormalSpec::new(0.0, 15.0, 10.0, 3.0).expect("valid law");
    sample_truncated_normal(&law, n, &mut RngStream::new(seed, 0).rng()).expect("n > 0")
}

/// `n` rounded draws from TN(0, 40, 25, 8).
pub fn discrete(n: usize, seed: u64) -> Sample {
    let law = TruncatedNormalSpec::new(0.0, 40.0, 25.0, 8.0).expect("valid law");
    round_to_integers(&sample_truncated_normal(&law, n, &mut RngStream::new(seed, 1).rng()).expect("n > 0"))
}
