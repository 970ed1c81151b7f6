//! Thin 2-d wrapper over `rustfft` with a process-wide plan cache.
//!
//! Transforms are unnormalized in both directions (forward kernel
//! `e^{-2πi jk/N}`, inverse `e^{+2πi jk/N}`); the normalization conventions
//! live with the callers in [`crate::field`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn plan_cache() -> &'static Mutex<HashMap<usize, (Plan, Plan)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plans(n: usize) -> (Plan, Plan) {
    let mut cache = plan_cache().lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (
                planner.plan_fft(n, FftDirection::Forward),
                planner.plan_fft(n, FftDirection::Inverse),
            )
        })
        .clone()
}

/// Planned transforms for an `n × n` complex array stored row-major.
pub struct Fft2 {
    n: usize,
    fwd: Plan,
    inv: Plan,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let (fwd, inv) = plans(n);
        Fft2 { n, fwd, inv }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn scratch_len(&self) -> usize {
        self.n * self.n + self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())
    }

    pub fn forward(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.transform(&self.fwd, data, scratch);
    }

    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.transform(&self.inv, data, scratch);
    }

    fn transform(&self, plan: &Plan, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer does not match plan size");
        scratch.resize(self.scratch_len(), Complex64::default());
        let (transpose_buf, fft_scratch) = scratch.split_at_mut(n * n);

        // Rows are contiguous: one batched pass over the whole buffer.
        plan.process_with_scratch(data, fft_scratch);
        transpose(data, transpose_buf, n);
        plan.process_with_scratch(transpose_buf, fft_scratch);
        transpose(transpose_buf, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}

/// Smallest integer `>= min` with prime factors in `{2, 3, 5}`; keeps padded
/// transforms on fast mixed-radix sizes.
pub fn next_fast_size(min: usize) -> usize {
    let mut s = min.max(2);
    loop {
        let mut m = s;
        for p in [2usize, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return s;
        }
        s += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_sizes() {
        assert_eq!(next_fast_size(12), 12);
        assert_eq!(next_fast_size(13), 15);
        assert_eq!(next_fast_size(97), 100);
        assert_eq!(next_fast_size(263), 270);
    }

    #[test]
    fn forward_inverse_roundtrip() {
        let n = 12;
        let fft = Fft2::new(n);
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let orig = data.clone();
        let mut scratch = Vec::new();
        fft.forward(&mut data, &mut scratch);
        fft.inverse(&mut data, &mut scratch);
        let scale = (n * n) as f64;
        for (a, b) in data.iter().zip(orig.iter()) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_dft() {
        // One nontrivial mode: forward DFT of e^{2πi(3x+5y)/n} concentrates
        // on bin (3, 5) with weight n².
        let n = 8;
        let fft = Fft2::new(n);
        let mut data = vec![Complex64::default(); n * n];
        for y in 0..n {
            for x in 0..n {
                let phase = 2.0 * std::f64::consts::PI * (3.0 * x as f64 + 5.0 * y as f64) / n as f64;
                data[y * n + x] = Complex64::from_polar(1.0, phase);
            }
        }
        let mut scratch = Vec::new();
        fft.forward(&mut data, &mut scratch);
        for y in 0..n {
            for x in 0..n {
                let expect = if x == 3 && y == 5 { (n * n) as f64 } else { 0.0 };
                assert!(
                    (data[y * n + x] - expect).norm() < 1e-9,
                    "bin ({x},{y}) = {}",
                    data[y * n + x]
                );
            }
        }
    }
}
