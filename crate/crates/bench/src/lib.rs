//! Shared fixtures for the benchmark targets.

use fluctus_core::{gen_arfima, ArfimaParams, BehaviorSeries, Profile, Subject};

/// Long-memory surrogate of the standard recording length.
pub fn surrogate(n: usize, d: f64, seed: u64) -> Vec<f64> {
    let params = ArfimaParams::fractional(d).expect("valid d");
    gen_arfima(&params, n, seed).expect("generation succeeds")
}

/// Profile of a long-memory surrogate.
pub fn surrogate_profile(n: usize, d: f64, seed: u64) -> Profile {
    Profile::from_values(&surrogate(n, d, seed), 1.0).expect("non-empty")
}

/// Deterministic 0/1 series for the event and spectrum paths.
pub fn coin_series(len: usize, seed: u64) -> BehaviorSeries {
    let mut state = seed | 1;
    let values: Vec<u8> = (0..len)
        .map(|_| {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            ((state.wrapping_mul(0x2545F4914F6CDD1D) >> 63) & 1) as u8
        })
        .collect();
    BehaviorSeries::new(values, 0.5, Subject::with_id("bench")).expect("valid series")
}
