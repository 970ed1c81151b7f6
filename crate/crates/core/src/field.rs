//! Complex coefficient fields on the torus.
//!
//! A [`Field`] stores the coefficients of a function `u` with respect to the
//! orthonormal basis `φ_n = e^{in·x} / (2π)`, `n` in the grid's frequency
//! lattice. With this convention Plancherel is exact bookkeeping:
//! `‖u‖²_{L²} = Σ_n |c_n|²`, and white noise has unit-variance coefficients.
//!
//! Point values are produced by unnormalized FFTs plus the `1/(2π)` basis
//! factor; synthesis on a zero-padded grid is used for dealiased products and
//! for `L^q` quadrature.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fft::{next_fast_size, Fft2};
use crate::grid::Grid;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl Field {
    /// The zero field (flagged real).
    pub fn zero(grid: Grid) -> Self {
        Field {
            grid,
            coeffs: vec![Complex64::default(); grid.bins()],
            real: true,
        }
    }

    /// The constant function `u(x) = value`, i.e. coefficient `2π·value` on
    /// the zero mode.
    pub fn constant(grid: Grid, value: f64) -> Self {
        let mut f = Field::zero(grid);
        f.coeffs[grid.index(0, 0)] = Complex64::new(TWO_PI * value, 0.0);
        f
    }

    /// The basis function `φ_n` (unit coefficient on mode `n`). Real only for
    /// `n = 0`.
    pub fn basis(grid: Grid, fx: i64, fy: i64) -> Result<Self> {
        let m = grid.max_active_freq();
        if fx.abs() > m || fy.abs() > m {
            return Err(CoreError::InvalidParameter(format!(
                "mode ({fx},{fy}) outside the active band |n_i| <= {m}"
            )));
        }
        let mut f = Field::zero(grid);
        f.coeffs[grid.index(fx, fy)] = Complex64::new(1.0, 0.0);
        f.real = fx == 0 && fy == 0;
        Ok(f)
    }

    /// Build from a raw coefficient vector in bin order. Inactive (Nyquist)
    /// bins are forced to zero.
    pub fn from_coeffs(grid: Grid, mut coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.bins() {
            return Err(CoreError::InvalidParameter(format!(
                "coefficient vector has length {}, grid needs {}",
                coeffs.len(),
                grid.bins()
            )));
        }
        for (idx, c) in coeffs.iter_mut().enumerate() {
            if !grid.is_active(idx) {
                *c = Complex64::default();
            }
        }
        let mut f = Field { grid, coeffs, real };
        if real {
            f.symmetrize_real();
        }
        Ok(f)
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.real
    }

    #[inline]
    pub fn coeff(&self, fx: i64, fy: i64) -> Complex64 {
        self.coeffs[self.grid.index(fx, fy)]
    }

    /// Set one coefficient. Panics on an inactive (Nyquist) mode; clears the
    /// realness flag because the symmetry is not re-established here.
    pub fn set_coeff(&mut self, fx: i64, fy: i64, value: Complex64) {
        let idx = self.grid.index(fx, fy);
        assert!(self.grid.is_active(idx), "mode ({fx},{fy}) is structurally zero");
        self.coeffs[idx] = value;
        self.real = false;
    }

    /// Force exact conjugate symmetry `c_{-n} = conj(c_n)` (averaging the two
    /// half-lattices), a real zero mode, and set the realness flag.
    pub fn symmetrize_real(&mut self) {
        let g = self.grid;
        for idx in 0..g.bins() {
            if !g.is_active(idx) {
                self.coeffs[idx] = Complex64::default();
                continue;
            }
            let (fx, fy) = g.freq_pair(idx);
            if fy > 0 || (fy == 0 && fx > 0) {
                let conj_idx = g.index(-fx, -fy);
                let a = self.coeffs[idx];
                let b = self.coeffs[conj_idx];
                let avg = 0.5 * (a + b.conj());
                self.coeffs[idx] = avg;
                self.coeffs[conj_idx] = avg.conj();
            }
        }
        let zero = g.index(0, 0);
        self.coeffs[zero] = Complex64::new(self.coeffs[zero].re, 0.0);
        self.real = true;
    }

    /// Largest violation of conjugate symmetry; zero for exactly real fields.
    pub fn realness_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst = self.coeffs[g.index(0, 0)].im.abs();
        for idx in 0..g.bins() {
            if !g.is_active(idx) {
                worst = worst.max(self.coeffs[idx].norm());
                continue;
            }
            let (fx, fy) = g.freq_pair(idx);
            if fy > 0 || (fy == 0 && fx > 0) {
                let diff = self.coeffs[idx] - self.coeffs[g.index(-fx, -fy)].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    // ----- linear algebra -------------------------------------------------

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn scale_complex(&mut self, a: Complex64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
        if a.im != 0.0 {
            self.real = false;
        }
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: Complex64, x: &Field) {
        debug_assert_eq!(self.grid, x.grid);
        for (c, xc) in self.coeffs.iter_mut().zip(x.coeffs.iter()) {
            *c += a * xc;
        }
        self.real = self.real && x.real && a.im == 0.0;
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other);
        Ok(out)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> Field {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch(self.grid.size(), other.grid.size()));
        }
        Ok(())
    }

    /// `⟨u, v⟩_{L²} = Σ_n c_n conj(d_n)`.
    pub fn inner(&self, other: &Field) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// `‖u‖_{L²}` via Plancherel.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    // ----- norms ----------------------------------------------------------

    /// Sobolev norm `(Σ_n (1+|n|²)^β |c_n|²)^{1/2}`.
    pub fn sobolev_norm(&self, beta: f64) -> f64 {
        let g = self.grid;
        let mut acc = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let w = (1.0 + g.freq_sq(idx) as f64).powf(beta);
            acc += w * c.norm_sqr();
        }
        acc.sqrt()
    }

    /// `L^q` norm. `q = 2` uses collocation quadrature like every other finite
    /// `q` (Parseval then holds up to quadrature round-off, which is itself a
    /// useful cross-check); `q = ∞` is the max over the padded collocation
    /// grid. Products `|u|^q` are evaluated on a grid padded to `2N` so that
    /// the quadrature is alias-free for `q = 4`.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(CoreError::InvalidParameter(format!("L^q norm needs q >= 1, got {q}")));
        }
        let m = next_fast_size(2 * self.grid.size());
        let pv = self.point_values_on(m);
        if q.is_infinite() {
            return Ok(pv.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        let w = (TWO_PI / m as f64) * (TWO_PI / m as f64);
        let sum: f64 = pv.iter().map(|v| v.norm().powf(q)).sum();
        Ok((w * sum).powf(1.0 / q))
    }

    pub fn linf_norm(&self) -> f64 {
        self.lq_norm(f64::INFINITY).expect("infinity is a valid exponent")
    }

    // ----- differential operators ------------------------------------------

    /// `Δu`: multiply coefficients by `-|n|²`.
    pub fn laplacian(&self) -> Field {
        let g = self.grid;
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            *c *= -(g.freq_sq(idx) as f64);
        }
        out
    }

    /// Mean-zero inverse of the Laplacian: multiply by `-1/|n|²` off the zero
    /// mode and annihilate the zero mode (the parametrix convention).
    pub fn inverse_laplacian(&self) -> Field {
        let g = self.grid;
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let nsq = g.freq_sq(idx);
            if nsq == 0 {
                *c = Complex64::default();
            } else {
                *c *= -1.0 / nsq as f64;
            }
        }
        out
    }

    // ----- point values -----------------------------------------------------

    /// Collocation values `u(x_j)`, `x_j = 2π j / N`, on the native grid.
    pub fn to_point_values(&self) -> Vec<Complex64> {
        self.point_values_on(self.grid.size())
    }

    /// Collocation values on an `m × m` refinement (`m >= N`), by zero-padded
    /// synthesis. Exact for band-limited fields.
    pub fn point_values_on(&self, m: usize) -> Vec<Complex64> {
        assert!(m >= self.grid.size(), "synthesis grid must not truncate");
        let g = self.grid;
        let mut buf = vec![Complex64::default(); m * m];
        let mi = m as i64;
        for idx in 0..g.bins() {
            let c = self.coeffs[idx];
            if c != Complex64::default() {
                let (fx, fy) = g.freq_pair(idx);
                let bx = fx.rem_euclid(mi) as usize;
                let by = fy.rem_euclid(mi) as usize;
                buf[by * m + bx] = c;
            }
        }
        let fft = Fft2::new(m);
        let mut scratch = Vec::new();
        fft.inverse(&mut buf, &mut scratch);
        for v in &mut buf {
            *v /= TWO_PI;
        }
        buf
    }

    /// Inverse of [`Field::to_point_values`] on the native grid.
    pub fn from_point_values(grid: Grid, values: &[Complex64]) -> Result<Field> {
        if values.len() != grid.bins() {
            return Err(CoreError::InvalidParameter(format!(
                "need {} point values, got {}",
                grid.bins(),
                values.len()
            )));
        }
        let mut buf = values.to_vec();
        let fft = Fft2::new(grid.size());
        let mut scratch = Vec::new();
        fft.forward(&mut buf, &mut scratch);
        let scale = TWO_PI / (grid.bins() as f64);
        for v in &mut buf {
            *v *= scale;
        }
        Field::from_coeffs(grid, buf, false)
    }

    /// Band-limit point values on an `m × m` grid back to this grid's active
    /// band (spectral truncation).
    pub fn from_point_values_padded(grid: Grid, m: usize, values: &mut [Complex64]) -> Field {
        assert_eq!(values.len(), m * m);
        let fft = Fft2::new(m);
        let mut scratch = Vec::new();
        fft.forward(values, &mut scratch);
        let scale = TWO_PI / ((m * m) as f64);
        let mi = m as i64;
        let mut out = Field::zero(grid);
        for idx in 0..grid.bins() {
            if grid.is_active(idx) {
                let (fx, fy) = grid.freq_pair(idx);
                let bx = fx.rem_euclid(mi) as usize;
                let by = fy.rem_euclid(mi) as usize;
                out.coeffs[idx] = values[by * m + bx] * scale;
            }
        }
        out.real = false;
        out
    }
}

/// Padded grid size used by [`dealiased_product`]: the classical `3N/2` rule
/// rounded up to an FFT-friendly length.
pub fn dealias_pad(n: usize) -> usize {
    next_fast_size(3 * n / 2 + (3 * n) % 2)
}

/// Pointwise product computed alias-free: both factors are synthesized on a
/// zero-padded grid (≥ 3N/2 per axis), multiplied there, and the result is
/// truncated back to the active band. Equals the exact coefficient
/// convolution restricted to the grid.
pub fn dealiased_product(u: &Field, v: &Field) -> Result<Field> {
    if u.grid() != v.grid() {
        return Err(CoreError::GridMismatch(u.grid().size(), v.grid().size()));
    }
    let real = u.is_real() && v.is_real();
    let m = dealias_pad(u.grid().size());
    let pu = u.point_values_on(m);
    let mut pv = v.point_values_on(m);
    for (b, a) in pv.iter_mut().zip(pu.iter()) {
        *b *= a;
    }
    let mut out = Field::from_point_values_padded(u.grid(), m, &mut pv);
    if real {
        out.symmetrize_real();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::random::{seeded_rng, random_real_field};

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn zero_field_synthesizes_to_zero() {
        let u = Field::zero(grid(8));
        assert!(u.to_point_values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn basis_zero_mode_is_constant() {
        let u = Field::basis(grid(8), 0, 0).unwrap();
        for v in u.to_point_values() {
            assert!((v - 1.0 / TWO_PI).norm() < 1e-14);
        }
    }

    #[test]
    fn point_value_roundtrip_is_identity() {
        let g = grid(8);
        let mut rng = seeded_rng(42);
        let u = random_real_field(g, &mut rng);
        let back = Field::from_point_values(g, &u.to_point_values()).unwrap();
        let err = u.sub(&back).unwrap().l2_norm();
        assert!(err < 1e-12 * u.l2_norm().max(1.0), "roundtrip error {err}");
    }

    #[test]
    fn synthesis_matches_direct_dft_oracle() {
        let g = grid(8);
        let mut rng = seeded_rng(7);
        let u = random_real_field(g, &mut rng);
        let direct = oracle::direct_synthesis(&u);
        let fftd = u.to_point_values();
        for (a, b) in direct.iter().zip(fftd.iter()) {
            assert!((a - b).norm() < 1e-11);
        }
        // Parseval against the quadrature sum on the native grid.
        let w = (TWO_PI / 8.0) * (TWO_PI / 8.0);
        let quad: f64 = fftd.iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
        let plancherel = u.l2_norm().powi(2);
        assert!((quad - plancherel).abs() <= 1e-12 * plancherel.max(1.0));
    }

    #[test]
    fn sobolev_single_mode_and_zero() {
        let g = grid(16);
        let u = Field::basis(g, 2, -1).unwrap();
        for beta in [-0.7, 0.0, 0.5, 2.0] {
            let expect = (1.0 + 5.0f64).powf(beta / 2.0);
            assert!((u.sobolev_norm(beta) - expect).abs() < 1e-14);
        }
        assert_eq!(Field::zero(g).sobolev_norm(1.3), 0.0);
    }

    #[test]
    fn sobolev_zero_matches_plancherel() {
        let g = grid(16);
        let mut rng = seeded_rng(3);
        let u = random_real_field(g, &mut rng);
        assert!((u.sobolev_norm(0.0) - u.l2_norm()).abs() < 1e-12 * u.l2_norm());
    }

    #[test]
    fn lq_norm_constant_field() {
        let g = grid(8);
        let u = Field::constant(g, -2.5);
        for q in [1.0, 2.0, 4.0, 7.5] {
            let expect = 2.5 * Grid::volume().powf(1.0 / q);
            let got = u.lq_norm(q).unwrap();
            assert!((got - expect).abs() < 1e-10 * expect, "q={q}: {got} vs {expect}");
        }
        assert!((u.linf_norm() - 2.5).abs() < 1e-12);
        assert!(u.lq_norm(0.5).is_err());
    }

    #[test]
    fn l2_quadrature_matches_plancherel() {
        let g = grid(16);
        let mut rng = seeded_rng(11);
        let u = random_real_field(g, &mut rng);
        let quad = u.lq_norm(2.0).unwrap();
        let exact = u.sobolev_norm(0.0);
        assert!((quad - exact).abs() < 1e-10 * exact.max(1.0));
    }

    #[test]
    fn lq_norm_stable_under_grid_refinement() {
        // Same trigonometric polynomial represented at N = 32 and N = 64.
        let coarse = grid(32);
        let fine = grid(64);
        let mut u32 = Field::basis(coarse, 0, 0).unwrap();
        u32.axpy(Complex64::new(0.5, 0.0), &Field::basis(coarse, 1, 0).unwrap());
        u32.axpy(Complex64::new(0.5, 0.0), &Field::basis(coarse, -1, 0).unwrap());
        u32.symmetrize_real();
        let mut u64f = Field::basis(fine, 0, 0).unwrap();
        u64f.axpy(Complex64::new(0.5, 0.0), &Field::basis(fine, 1, 0).unwrap());
        u64f.axpy(Complex64::new(0.5, 0.0), &Field::basis(fine, -1, 0).unwrap());
        u64f.symmetrize_real();
        let a = u32.lq_norm(4.0).unwrap();
        let b = u64f.lq_norm(4.0).unwrap();
        assert!((a - b).abs() < 1e-6 * b, "L4 at N=32: {a}, N=64: {b}");
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = grid(8);
        let u = Field::basis(g, 2, 1).unwrap();
        let lu = u.laplacian();
        assert!((lu.coeff(2, 1) + 5.0).norm() < 1e-15);
        // zero-mode convention of the inverse
        let c = Field::basis(g, 0, 0).unwrap();
        assert_eq!(c.inverse_laplacian().l2_norm(), 0.0);
    }

    #[test]
    fn laplacian_inverse_roundtrip_mean_zero() {
        let g = grid(16);
        let mut rng = seeded_rng(5);
        let mut u = random_real_field(g, &mut rng);
        // remove the mean
        let zero = g.index(0, 0);
        let mut coeffs = u.coeffs().to_vec();
        coeffs[zero] = Complex64::default();
        u = Field::from_coeffs(g, coeffs, true).unwrap();
        let back = u.inverse_laplacian().laplacian();
        assert!(u.sub(&back).unwrap().l2_norm() < 1e-12 * u.l2_norm());
    }

    #[test]
    fn dealiased_product_trivial_cases() {
        let g = grid(8);
        let one = Field::constant(g, 1.0);
        let p = dealiased_product(&one, &one).unwrap();
        assert!(p.sub(&one).unwrap().l2_norm() < 1e-12);

        let u = Field::basis(g, 1, 0).unwrap();
        let v = Field::basis(g, 0, 1).unwrap();
        let w = dealiased_product(&u, &v).unwrap();
        let expect = Field::basis(g, 1, 1).unwrap().scaled(1.0 / TWO_PI);
        assert!(w.sub(&expect).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn dealiased_product_matches_convolution_oracle() {
        let g = grid(8);
        let mut rng = seeded_rng(19);
        for _ in 0..5 {
            let u = random_real_field(g, &mut rng);
            let v = random_real_field(g, &mut rng);
            let fast = dealiased_product(&u, &v).unwrap();
            let slow = oracle::convolution_product(&u, &v);
            let err = fast.sub(&slow).unwrap().l2_norm();
            let scale = slow.l2_norm().max(1.0);
            assert!(err < 1e-12 * scale, "convolution mismatch {err}");
        }
    }

    #[test]
    fn realness_tracking_through_products() {
        let g = grid(8);
        let mut rng = seeded_rng(23);
        let u = random_real_field(g, &mut rng);
        let v = random_real_field(g, &mut rng);
        let w = dealiased_product(&u, &v).unwrap();
        assert!(w.is_real());
        assert!(w.realness_defect() < 1e-13);
    }
}
