#![allow(dead_code)] // shared by multiple test binaries, each using a subset

//! Shared helpers for the integration-test binaries.

/// Exact maximum of `Σ w_i (1 − exp(−t_i/τ_i))` over every grid point of
/// the budget simplex with step `T/steps`, computed by dynamic programming
/// over targets.
///
/// This enumerates the same set as brute force over all
/// `C(steps+P−1, P−1)` grid points, but in `O(P·steps²)` time, which is
/// what makes the dense-grid oracle affordable on thousands of instances.
pub fn simplex_grid_max(taus: &[f64], weights: &[f64], horizon: f64, steps: usize) -> f64 {
    let p = taus.len();
    assert!(p >= 1);
    let h = horizon / steps as f64;
    let value =
        |i: usize, k: usize| -> f64 { weights[i] * (1.0 - (-(k as f64) * h / taus[i]).exp()) };

    // best[b] = max criterion over the first i+1 targets spending exactly b*h
    let mut best: Vec<f64> = (0..=steps).map(|k| value(0, k)).collect();
    let mut next = vec![0.0f64; steps + 1];
    for i in 1..p {
        for (b, slot) in next.iter_mut().enumerate() {
            let mut m = f64::NEG_INFINITY;
            for k in 0..=b {
                let v = best[b - k] + value(i, k);
                if v > m {
                    m = v;
                }
            }
            *slot = m;
        }
        std::mem::swap(&mut best, &mut next);
    }
    best[steps]
}

/// Deterministic xorshift generator for seeded random instances.
pub struct Xorshift(pub u64);

impl Xorshift {
    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Log-uniform draw in `[lo, hi)`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (self.uniform(lo.ln(), hi.ln())).exp()
    }

    pub fn index(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}
