//! The renormalized operator `H = -Δ + (ξ_ε - c_ε) + shift`.
//!
//! At finite resolution the potential is an ordinary band-limited function
//! and the operator acts directly: Laplacian as a Fourier multiplier,
//! potential as a dealiased pointwise product, renormalization through the
//! subtracted constant. The product is evaluated on the smallest padded grid
//! that is alias-free for the potential's bandwidth, which matters in the
//! propagator hot loops.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fft::{next_fast_size, Fft2};
use crate::field::Field;
use crate::grid::Grid;
use crate::noise::EnhancedNoise;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub struct Hamiltonian {
    grid: Grid,
    potential: Field,
    shift: f64,
    pad: usize,
    /// Real potential values on the padded collocation grid.
    pot_values: Vec<f64>,
    pot_min: f64,
    pot_max: f64,
}

/// Reusable buffers for [`Hamiltonian::apply_with`].
pub struct ApplyScratch {
    buf: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
}

impl ApplyScratch {
    pub fn new() -> Self {
        ApplyScratch {
            buf: Vec::new(),
            fft_scratch: Vec::new(),
        }
    }
}

impl Default for ApplyScratch {
    fn default() -> Self {
        Self::new()
    }
}

impl Hamiltonian {
    pub fn new(potential: Field, shift: f64) -> Result<Self> {
        if !potential.is_real() {
            return Err(CoreError::InvalidParameter(
                "the potential must be a real field".into(),
            ));
        }
        let grid = potential.grid();
        let n = grid.size();
        // Per-axis bandwidth of the potential decides the alias-free pad:
        // the product of a band-B field (B = N/2-1) with a band-r potential
        // needs M ≥ 2B + r + 1 so that no alias lands back in the band.
        let mut r_inf: i64 = 0;
        for (idx, c) in potential.coeffs().iter().enumerate() {
            if c.norm_sqr() > 0.0 {
                let (fx, fy) = grid.freq_pair(idx);
                r_inf = r_inf.max(fx.abs().max(fy.abs()));
            }
        }
        let pad = next_fast_size((n as i64 - 1 + r_inf).max(n as i64) as usize);
        let pv = potential.point_values_on(pad);
        let mut pot_values = Vec::with_capacity(pv.len());
        let mut pot_min = f64::INFINITY;
        let mut pot_max = f64::NEG_INFINITY;
        for v in pv {
            pot_values.push(v.re);
            pot_min = pot_min.min(v.re);
            pot_max = pot_max.max(v.re);
        }
        Ok(Hamiltonian {
            grid,
            potential,
            shift,
            pad,
            pot_values,
            pot_min,
            pot_max,
        })
    }

    /// The renormalized operator of one enhanced-noise realization:
    /// `-Δ + ξ_ε + c_ε`.
    ///
    /// The counterterm recenters the logarithmically divergent second-order
    /// level shift: `E[λ₁(-Δ + ξ_ε)] ≈ -Σ_{0<|n|≤1/ε} |⟨φ_n, ξ_ε φ_0⟩|²/|n|²
    /// = -c_ε`, so adding `c_ε` is what makes the spectrum converge as the
    /// mollification is removed. (Equivalently: the expectation of the
    /// singular product `X_ε·ξ_ε` with `X = Δ^{-1}ξ` is `-c_ε`, and the
    /// operator subtracts that expectation.)
    pub fn renormalized(en: &EnhancedNoise) -> Result<Self> {
        let pot = en.xi_eps.add(&Field::constant(en.grid(), en.c_eps))?;
        Hamiltonian::new(pot, 0.0)
    }

    /// `-Δ + ξ_ε` without the counterterm, for drift comparisons.
    pub fn unrenormalized(en: &EnhancedNoise) -> Result<Self> {
        Hamiltonian::new(en.xi_eps.clone(), 0.0)
    }

    /// The free operator `-Δ`.
    pub fn free(grid: Grid) -> Self {
        Hamiltonian::new(Field::zero(grid), 0.0).expect("zero potential is real")
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn potential(&self) -> &Field {
        &self.potential
    }

    pub fn pad_size(&self) -> usize {
        self.pad
    }

    /// Rigorous enclosure of the spectrum: the quadratic form lies between
    /// `min V + shift` and `max|n|² + max V + shift` (potential bounds taken
    /// on the product grid, which is exactly where the operator multiplies).
    pub fn spectral_bounds(&self) -> (f64, f64) {
        (
            self.pot_min + self.shift,
            self.grid.max_freq_sq() as f64 + self.pot_max + self.shift,
        )
    }

    /// `Hu = -Δu + V·u + shift·u` with the product dealiased.
    pub fn apply(&self, u: &Field) -> Field {
        let mut scratch = ApplyScratch::new();
        self.apply_with(u, &mut scratch)
    }

    pub fn apply_with(&self, u: &Field, scratch: &mut ApplyScratch) -> Field {
        debug_assert_eq!(u.grid(), self.grid);
        let g = self.grid;
        let m = self.pad;
        let mi = m as i64;
        let fft = Fft2::new(m);

        scratch.buf.clear();
        scratch.buf.resize(m * m, Complex64::default());
        for idx in 0..g.bins() {
            let c = u.coeffs()[idx];
            if c != Complex64::default() {
                let (fx, fy) = g.freq_pair(idx);
                scratch.buf[fy.rem_euclid(mi) as usize * m + fx.rem_euclid(mi) as usize] = c;
            }
        }
        fft.inverse(&mut scratch.buf, &mut scratch.fft_scratch);
        for (v, p) in scratch.buf.iter_mut().zip(self.pot_values.iter()) {
            *v *= p / TWO_PI;
        }
        fft.forward(&mut scratch.buf, &mut scratch.fft_scratch);

        let scale = TWO_PI / ((m * m) as f64);
        let mut coeffs = vec![Complex64::default(); g.bins()];
        for (idx, out) in coeffs.iter_mut().enumerate() {
            if g.is_active(idx) {
                let (fx, fy) = g.freq_pair(idx);
                let vu = scratch.buf[fy.rem_euclid(mi) as usize * m + fx.rem_euclid(mi) as usize] * scale;
                let kinetic = g.freq_sq(idx) as f64 + self.shift;
                *out = vu + kinetic * u.coeffs()[idx];
            }
        }
        Field::from_coeffs(g, coeffs, u.is_real()).expect("length preserved")
    }
}

// ----- real trigonometric coordinates ---------------------------------------

/// Orthonormal real basis of the active band: the mean mode, then for each
/// canonical frequency pair `±n` the normalized cosine and sine combinations
/// `(φ_n + φ_{-n})/√2` and `i(φ_n - φ_{-n})/√2`. Real fields become real
/// coordinate vectors of length `(N-1)²`, with `L²` norms preserved; the
/// operator becomes a real symmetric matrix in these coordinates.
pub struct RealBasis {
    grid: Grid,
    /// (bin of n, bin of -n); the mean mode stores the zero bin twice.
    pairs: Vec<(usize, usize)>,
    /// For each entry of `pairs`, whether it is the cosine (true) or sine
    /// component; the mean mode is flagged as cosine.
    is_cos: Vec<bool>,
}

impl RealBasis {
    pub fn new(grid: Grid) -> Self {
        let zero = grid.index(0, 0);
        let mut pairs = vec![(zero, zero)];
        let mut is_cos = vec![true];
        for idx in 0..grid.bins() {
            if !grid.is_active(idx) {
                continue;
            }
            let (fx, fy) = grid.freq_pair(idx);
            if fy > 0 || (fy == 0 && fx > 0) {
                let conj = grid.index(-fx, -fy);
                pairs.push((idx, conj));
                is_cos.push(true);
                pairs.push((idx, conj));
                is_cos.push(false);
            }
        }
        debug_assert_eq!(pairs.len(), grid.active_bins());
        RealBasis { grid, pairs, is_cos }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn to_coords(&self, f: &Field) -> Vec<f64> {
        let sqrt2 = std::f64::consts::SQRT_2;
        self.pairs
            .iter()
            .zip(self.is_cos.iter())
            .map(|(&(idx, _), &cos)| {
                let c = f.coeffs()[idx];
                if idx == self.pairs[0].0 && cos && idx == self.pairs[0].1 {
                    // mean mode (only entry whose pair is (zero, zero))
                    c.re
                } else if cos {
                    sqrt2 * c.re
                } else {
                    sqrt2 * c.im
                }
            })
            .collect()
    }

    pub fn field_from_coords(&self, coords: &[f64]) -> Field {
        assert_eq!(coords.len(), self.dim());
        let mut raw = vec![Complex64::default(); self.grid.bins()];
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        raw[self.pairs[0].0] = Complex64::new(coords[0], 0.0);
        for k in 1..coords.len() {
            let (idx, conj) = self.pairs[k];
            if self.is_cos[k] {
                let v = coords[k] * inv_sqrt2;
                raw[idx] += Complex64::new(v, 0.0);
                raw[conj] += Complex64::new(v, 0.0);
            } else {
                let v = coords[k] * inv_sqrt2;
                raw[idx] += Complex64::new(0.0, v);
                raw[conj] += Complex64::new(0.0, -v);
            }
        }
        Field::from_coeffs(self.grid, raw, true).expect("length preserved")
    }

    /// Complex coordinates of a possibly complex field in the same real
    /// basis (used to expand propagated states over real eigenvectors).
    pub fn to_coords_complex(&self, f: &Field) -> Vec<Complex64> {
        let sqrt2_inv = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        self.pairs
            .iter()
            .zip(self.is_cos.iter())
            .enumerate()
            .map(|(k, (&(idx, conj), &cos))| {
                if k == 0 {
                    f.coeffs()[idx]
                } else if cos {
                    (f.coeffs()[idx] + f.coeffs()[conj]) * sqrt2_inv
                } else {
                    -i * (f.coeffs()[idx] - f.coeffs()[conj]) * sqrt2_inv
                }
            })
            .collect()
    }

    pub fn basis_field(&self, k: usize) -> Field {
        let mut coords = vec![0.0; self.dim()];
        coords[k] = 1.0;
        self.field_from_coords(&coords)
    }
}

/// Dense real symmetric matrix of the operator in [`RealBasis`] coordinates.
/// Guarded to small grids; this is the eigensolver oracle.
pub fn dense_matrix(h: &Hamiltonian, basis: &RealBasis) -> Result<Vec<f64>> {
    let n = h.grid().size();
    if n > 32 {
        return Err(CoreError::InvalidParameter(format!(
            "dense matrix assembly is limited to N <= 32 (got N = {n})"
        )));
    }
    let dim = basis.dim();
    let mut a = vec![0.0; dim * dim];
    let mut scratch = ApplyScratch::new();
    for j in 0..dim {
        let col = basis.to_coords(&h.apply_with(&basis.basis_field(j), &mut scratch));
        for i in 0..dim {
            a[i * dim + j] = col[i];
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::dealiased_product;
    use crate::noise::{build_enhanced, sample_white_noise};
    use crate::random::{random_complex_field, random_real_field, seeded_rng};

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn free_operator_on_modes() {
        let g = grid(8);
        let h = Hamiltonian::free(g);
        let u = Field::basis(g, 2, -1).unwrap();
        let hu = h.apply(&u);
        assert!(hu.sub(&u.scaled(5.0)).unwrap().l2_norm() < 1e-13);
        let shifted = Hamiltonian::free(g).with_shift(3.0);
        let hu = shifted.apply(&u);
        assert!(hu.sub(&u.scaled(8.0)).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn apply_matches_generic_dealiased_product() {
        let g = grid(16);
        let noise = sample_white_noise(g, 3);
        let en = build_enhanced(&noise, 0.25).unwrap();
        let h = Hamiltonian::renormalized(&en).unwrap();
        let mut rng = seeded_rng(17);
        let u = random_complex_field(g, &mut rng);
        let fast = h.apply(&u);
        let mut slow = u.laplacian().scaled(-1.0);
        slow.axpy(
            Complex64::new(1.0, 0.0),
            &dealiased_product(h.potential(), &u).unwrap(),
        );
        assert!(fast.sub(&slow).unwrap().l2_norm() < 1e-12 * slow.l2_norm().max(1.0));
    }

    #[test]
    fn operator_is_symmetric() {
        let g = grid(16);
        let noise = sample_white_noise(g, 4);
        let en = build_enhanced(&noise, 0.25).unwrap();
        let h = Hamiltonian::renormalized(&en).unwrap();
        let mut rng = seeded_rng(5);
        for _ in 0..5 {
            let u = random_real_field(g, &mut rng);
            let v = random_real_field(g, &mut rng);
            let a = h.apply(&u).inner(&v);
            let b = u.inner(&h.apply(&v));
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn real_basis_roundtrip_preserves_norms() {
        let g = grid(8);
        let basis = RealBasis::new(g);
        assert_eq!(basis.dim(), g.active_bins());
        let mut rng = seeded_rng(6);
        let u = random_real_field(g, &mut rng);
        let coords = basis.to_coords(&u);
        let norm_coords = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm_coords - u.l2_norm()).abs() < 1e-12);
        let back = basis.field_from_coords(&coords);
        assert!(back.sub(&u).unwrap().l2_norm() < 1e-12);
        // complex expansion agrees with the real one on real fields
        let cc = basis.to_coords_complex(&u);
        for (a, b) in cc.iter().zip(coords.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_matrix_zero_noise_is_diagonal() {
        let g = grid(8);
        let h = Hamiltonian::free(g);
        let basis = RealBasis::new(g);
        let a = dense_matrix(&h, &basis).unwrap();
        let dim = basis.dim();
        for r in 0..dim {
            for c in 0..dim {
                if r != c {
                    assert!(a[r * dim + c].abs() < 1e-12);
                }
            }
        }
        // diagonal carries |n|² of the underlying pair
        let diag: Vec<f64> = (0..dim).map(|k| a[k * dim + k]).collect();
        let mut sorted = diag.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let expect = crate::oracle::laplacian_spectrum(g);
        for (a, b) in sorted.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_matrix_is_symmetric_and_matches_apply() {
        let g = grid(8);
        let noise = sample_white_noise(g, 9);
        let en = build_enhanced(&noise, 0.25).unwrap();
        let h = Hamiltonian::renormalized(&en).unwrap();
        let basis = RealBasis::new(g);
        let a = dense_matrix(&h, &basis).unwrap();
        let dim = basis.dim();
        let mut asym = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                asym = asym.max((a[r * dim + c] - a[c * dim + r]).abs());
            }
        }
        assert!(asym < 1e-12, "asymmetry {asym}");
        // column-by-column agreement with apply on basis vectors
        let mut rng = seeded_rng(10);
        let u = random_real_field(g, &mut rng);
        let coords = basis.to_coords(&u);
        let via_matrix: Vec<f64> = (0..dim)
            .map(|r| (0..dim).map(|c| a[r * dim + c] * coords[c]).sum())
            .collect();
        let direct = basis.to_coords(&h.apply(&u));
        for (x, y) in via_matrix.iter().zip(direct.iter()) {
            assert!((x - y).abs() < 1e-11);
        }
        assert!(dense_matrix(&Hamiltonian::free(grid(64)), &RealBasis::new(grid(64))).is_err());
    }

    #[test]
    #[ignore = "timing probe, run explicitly"]
    fn bench_apply_large_grid() {
        let g = grid(256);
        let noise = sample_white_noise(g, 1);
        let en = build_enhanced(&noise, 0.125).unwrap();
        let h = Hamiltonian::renormalized(&en).unwrap();
        println!("pad size: {}", h.pad_size());
        let mut rng = seeded_rng(2);
        let u = random_complex_field(g, &mut rng);
        let mut scratch = ApplyScratch::new();
        let mut acc = h.apply_with(&u, &mut scratch);
        let start = std::time::Instant::now();
        let reps = 100;
        for _ in 0..reps {
            acc = h.apply_with(&acc, &mut scratch);
            acc.scale(1.0 / acc.l2_norm().max(1.0));
        }
        let per = start.elapsed().as_secs_f64() / reps as f64;
        println!("apply at N=256: {:.3} ms", per * 1e3);
    }

    #[test]
    fn spectral_bounds_enclose_rayleigh_quotients() {
        let g = grid(16);
        let noise = sample_white_noise(g, 12);
        let en = build_enhanced(&noise, 0.25).unwrap();
        let h = Hamiltonian::renormalized(&en).unwrap();
        let (lo, hi) = h.spectral_bounds();
        let mut rng = seeded_rng(13);
        for _ in 0..10 {
            let u = random_real_field(g, &mut rng);
            let q = h.apply(&u).inner(&u).re / u.l2_norm().powi(2);
            assert!(q >= lo - 1e-9 && q <= hi + 1e-9, "quotient {q} outside [{lo},{hi}]");
        }
    }
}
