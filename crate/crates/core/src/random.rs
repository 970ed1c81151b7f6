//! Seeded randomness: every stochastic object in the crate is a deterministic
//! function of a 64-bit seed, so ensembles can be distributed over threads
//! and reproduced realization by realization.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::Field;
use crate::grid::Grid;
use crate::lp;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for realization `index` of an ensemble rooted at `base_seed`:
/// `base XOR splitmix64(index)`. Any subset of realizations can be reproduced
/// without generating the others.
pub fn realization_seed(base_seed: u64, index: u64) -> u64 {
    base_seed ^ splitmix64(index)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Real Gaussian field with independent unit-variance coefficients: the zero
/// mode is standard normal, each conjugate pair `±n` gets independent real
/// and imaginary parts of variance 1/2. This is exactly the white-noise law
/// in the orthonormal basis.
pub fn random_real_field<R: Rng>(grid: Grid, rng: &mut R) -> Field {
    let mut coeffs = vec![Complex64::default(); grid.bins()];
    let g0: f64 = rng.sample(StandardNormal);
    coeffs[grid.index(0, 0)] = Complex64::new(g0, 0.0);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for idx in 0..grid.bins() {
        if !grid.is_active(idx) {
            continue;
        }
        let (fx, fy) = grid.freq_pair(idx);
        if fy > 0 || (fy == 0 && fx > 0) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(re * half, im * half);
            coeffs[idx] = c;
            coeffs[grid.index(-fx, -fy)] = c.conj();
        }
    }
    Field::from_coeffs(grid, coeffs, true).expect("constructed with the right length")
}

/// Complex Gaussian field, independent standard complex normals per active
/// mode (no conjugate symmetry).
pub fn random_complex_field<R: Rng>(grid: Grid, rng: &mut R) -> Field {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut coeffs = vec![Complex64::default(); grid.bins()];
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if grid.is_active(idx) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *c = Complex64::new(re * half, im * half);
        }
    }
    Field::from_coeffs(grid, coeffs, false).expect("constructed with the right length")
}

/// Real Gaussian field with coefficients damped by `(1+|n|²)^{-decay/2}`;
/// a generic "smooth test function" generator.
pub fn random_smooth_field<R: Rng>(grid: Grid, decay: f64, rng: &mut R) -> Field {
    let mut f = random_real_field(grid, rng);
    let mut coeffs = f.coeffs().to_vec();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        *c *= (1.0 + grid.freq_sq(idx) as f64).powf(-decay / 2.0);
    }
    f = Field::from_coeffs(grid, coeffs, true).expect("length preserved");
    f.symmetrize_real();
    f
}

/// Real Gaussian data supported on Littlewood-Paley block `j`, normalized to
/// unit `L²` norm. Returns `None` when the block is empty on this grid.
pub fn random_block_field<R: Rng>(grid: Grid, j: i32, rng: &mut R) -> Option<Field> {
    let white = random_real_field(grid, rng);
    let mut blocked = lp::lp_project(&white, j);
    let norm = blocked.l2_norm();
    if norm == 0.0 {
        return None;
    }
    blocked.scale(1.0 / norm);
    Some(blocked)
}
