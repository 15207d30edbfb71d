//! Multi-dimensional DFT on row-major `n^d` blocks, one axis at a time.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::scalar::Real;

pub(crate) struct NdFft<T: Real> {
    n: usize,
    dim: usize,
    plan: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    lines: Vec<Complex<T>>,
}

impl<T: Real> NdFft<T> {
    pub fn new(n: usize, dim: usize, direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        let plan = planner.plan_fft(n, direction);
        let scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
        Self {
            n,
            dim,
            plan,
            scratch,
            lines: Vec::new(),
        }
    }

    /// Unnormalized transform of one contiguous `n^d` block in place.
    pub fn process(&mut self, buf: &mut [Complex<T>]) {
        let n = self.n;
        let total = n.pow(self.dim as u32);
        debug_assert_eq!(buf.len(), total);
        // Last axis: lines are contiguous.
        self.plan.process_with_scratch(buf, &mut self.scratch);
        // Remaining axes: gather a batch of strided lines, transform, scatter.
        for axis in (0..self.dim - 1).rev() {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            self.lines.resize(block, Complex::default());
            for start in (0..total).step_by(block) {
                let chunk = &mut buf[start..start + block];
                for inner in 0..stride {
                    for j in 0..n {
                        self.lines[inner * n + j] = chunk[j * stride + inner];
                    }
                }
                self.plan.process_with_scratch(&mut self.lines, &mut self.scratch);
                for inner in 0..stride {
                    for j in 0..n {
                        chunk[j * stride + inner] = self.lines[inner * n + j];
                    }
                }
            }
        }
    }
}
