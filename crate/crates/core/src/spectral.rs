use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transform pair of fixed length with its own scratch.
///
/// `forward` is unnormalized; `inverse` divides by `n`, so the pair
/// round-trips exactly up to rounding.
pub(crate) struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl Spectral {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            scale: 1.0 / n as f64,
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        self.fwd.process_with_scratch(data, &mut self.scratch);
    }

    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        self.inv.process_with_scratch(data, &mut self.scratch);
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }

    /// Applies a diagonal momentum-space multiplier in place.
    pub(crate) fn apply_diagonal(&mut self, data: &mut [Complex64], factor: &[Complex64]) {
        self.forward(data);
        for (z, f) in data.iter_mut().zip(factor) {
            *z *= f;
        }
        self.inverse(data);
    }
}
