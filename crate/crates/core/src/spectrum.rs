//! Computed eigenpairs of the operator and everything evaluated through
//! the eigenbasis: diagonal functional calculus, spectral projectors,
//! counting-function statistics, eigenvalue sandwich fits and eigenfunction
//! growth regressions.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::random::seeded_rng;
use crate::stats::{linear_fit, FitLine};

/// Relative tail energy past which eigenbasis evaluations refuse to run.
pub const SPECTRAL_TAIL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Dense,
    Iterative,
}

/// The lowest `K` eigenpairs of one operator realization.
///
/// Eigenvalues are those of the operator as solved (any positivity shift
/// included); `shift` records that offset so statistics can be reported for
/// the renormalized operator itself.
#[derive(Clone)]
pub struct Spectrum {
    pub grid: Grid,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Field>,
    pub residuals: Vec<f64>,
    pub kind: SolverKind,
    pub shift: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues of the unshifted (renormalized) operator.
    pub fn unshifted_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l - self.shift).collect()
    }

    /// Add `delta` to the operator (and so to every eigenvalue); the
    /// eigenvectors are unchanged.
    pub fn with_added_shift(&self, delta: f64) -> Spectrum {
        let mut out = self.clone();
        out.shift += delta;
        for l in &mut out.eigenvalues {
            *l += delta;
        }
        out
    }

    /// Shift so that the bottom eigenvalue is at least 1.
    pub fn positivized(&self) -> Spectrum {
        let delta = (1.0 - self.eigenvalues[0]).max(0.0);
        self.with_added_shift(delta)
    }

    /// Statistics are trusted only below this unshifted eigenvalue: the
    /// dealiased-bandwidth heuristic `0.5·(N/3)²` capped by the last
    /// computed eigenvalue (above which completeness is unknown).
    pub fn converged_limit(&self) -> f64 {
        let n = self.grid.size() as f64;
        let bandwidth = 0.5 * (n / 3.0) * (n / 3.0);
        let last = self.eigenvalues.last().map(|l| l - self.shift).unwrap_or(0.0);
        bandwidth.min(last)
    }

    /// Eigenbasis coefficients `⟨u, e_n⟩`.
    pub fn coefficients(&self, u: &Field) -> Vec<Complex64> {
        self.eigenvectors.iter().map(|e| u.inner(e)).collect()
    }

    /// Relative `L²` energy of `u` outside the computed span.
    pub fn tail_energy(&self, u: &Field) -> f64 {
        let total = u.l2_norm().powi(2);
        if total == 0.0 {
            return 0.0;
        }
        let captured: f64 = self.coefficients(u).iter().map(|c| c.norm_sqr()).sum();
        ((total - captured) / total).max(0.0)
    }

    /// Diagonal functional calculus `u ↦ Σ f(λ_n) ⟨u,e_n⟩ e_n`, refusing
    /// inputs with too much energy outside the span.
    pub fn spectral_map(&self, u: &Field, f: impl Fn(f64) -> Complex64) -> Result<Field> {
        self.spectral_map_with_tol(u, SPECTRAL_TAIL_TOL, f)
    }

    pub fn spectral_map_with_tol(
        &self,
        u: &Field,
        tail_tol: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Field> {
        let tail = self.tail_energy(u);
        if tail > tail_tol {
            return Err(CoreError::TailEnergy { tail });
        }
        let coeffs = self.coefficients(u);
        let mut out = Field::zero(self.grid);
        for ((c, e), l) in coeffs.iter().zip(self.eigenvectors.iter()).zip(self.eigenvalues.iter()) {
            out.axpy(c * f(*l), e);
        }
        Ok(out)
    }

    // ----- counting statistics ---------------------------------------------

    /// Counting function `N(λ) = #{n : λ_n ≤ λ}` (unshifted eigenvalues).
    /// Requires `λ` at or below the last computed eigenvalue — beyond it the
    /// count is unknowable from this spectrum.
    pub fn counting_function(&self, lambda: f64) -> Result<usize> {
        let limit = self.eigenvalues.last().map(|l| l - self.shift).unwrap_or(0.0);
        if lambda > limit {
            return Err(CoreError::WindowNotConverged {
                lo: lambda,
                hi: lambda,
                limit,
            });
        }
        Ok(self
            .unshifted_eigenvalues()
            .iter()
            .take_while(|&&l| l <= lambda)
            .count())
    }

    /// Least-squares slope of `N(λ)` against `λ`, sampled at integer `λ` up
    /// to `lambda_max` (clipped to the converged range).
    pub fn counting_slope(&self, lambda_max: f64) -> Result<FitLine> {
        let limit = self.converged_limit().min(lambda_max);
        let top = limit.floor() as i64;
        if top < 3 {
            return Err(CoreError::InsufficientData(format!(
                "converged range [0, {limit:.2}] too short for a counting fit"
            )));
        }
        let eigs = self.unshifted_eigenvalues();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for l in 1..=top {
            let lam = l as f64;
            let count = eigs.iter().take_while(|&&e| e <= lam).count();
            xs.push(lam);
            ys.push(count as f64);
        }
        Ok(linear_fit(&xs, &ys))
    }

    /// Smallest constants `(m1, m2)` with
    /// `λ_n - m1 ≤ λ_n(Ξ) ≤ (1+δ)·λ_n + m2` over the converged range,
    /// compared against the reference eigenvalues `lap` (ascending).
    pub fn eigenvalue_sandwich(&self, lap: &[f64], delta: f64) -> Result<(f64, f64)> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "sandwich parameter must be in (0,1), got {delta}"
            )));
        }
        let limit = self.converged_limit();
        let eigs = self.unshifted_eigenvalues();
        let mut m1 = f64::NEG_INFINITY;
        let mut m2 = f64::NEG_INFINITY;
        let mut used = 0;
        for (n, &l) in eigs.iter().enumerate() {
            if l > limit || n >= lap.len() {
                break;
            }
            m1 = m1.max(lap[n] - l);
            m2 = m2.max(l - (1.0 + delta) * lap[n]);
            used += 1;
        }
        if used == 0 {
            return Err(CoreError::InsufficientData("no converged eigenvalues".into()));
        }
        Ok((m1, m2))
    }

    // ----- spectral projectors and functions of H ---------------------------

    /// Projector onto the eigenvalues (unshifted) in `[λ, λ+1)`.
    pub fn window_projector(&self, lambda: f64, u: &Field) -> Result<Field> {
        let limit = self.converged_limit();
        if lambda + 1.0 > limit {
            return Err(CoreError::WindowNotConverged {
                lo: lambda,
                hi: lambda + 1.0,
                limit,
            });
        }
        let mut out = Field::zero(self.grid);
        for (e, &l) in self.eigenvectors.iter().zip(self.unshifted_eigenvalues().iter()) {
            if l >= lambda && l < lambda + 1.0 {
                out.axpy(u.inner(e), e);
            }
        }
        Ok(out)
    }

    /// Monte Carlo estimate of the `L² → L⁴` norm of the window projector:
    /// the sup of `‖v‖_{L⁴}` over unit-norm combinations of the window's
    /// eigenvectors (individual eigenfunctions included).
    pub fn window_l4_estimate(&self, lambda: f64, probes: usize, seed: u64) -> Result<f64> {
        let limit = self.converged_limit();
        if lambda + 1.0 > limit {
            return Err(CoreError::WindowNotConverged {
                lo: lambda,
                hi: lambda + 1.0,
                limit,
            });
        }
        let members: Vec<&Field> = self
            .eigenvectors
            .iter()
            .zip(self.unshifted_eigenvalues().iter())
            .filter(|(_, &l)| l >= lambda && l < lambda + 1.0)
            .map(|(e, _)| e)
            .collect();
        if members.is_empty() {
            return Ok(0.0);
        }
        let mut best: f64 = 0.0;
        for e in &members {
            best = best.max(e.lq_norm(4.0)?);
        }
        let mut rng = seeded_rng(seed);
        use rand::Rng;
        use rand_distr::StandardNormal;
        for _ in 0..probes {
            let mut v = Field::zero(self.grid);
            let mut norm_sq = 0.0;
            for e in &members {
                let c: f64 = rng.sample(StandardNormal);
                norm_sq += c * c;
                v.axpy(Complex64::new(c, 0.0), e);
            }
            v.scale(1.0 / norm_sq.sqrt());
            best = best.max(v.lq_norm(4.0)?);
        }
        Ok(best)
    }

    /// `H^{β/2} u` (positive shifted operator required).
    pub fn fractional_apply(&self, beta: f64, u: &Field) -> Result<Field> {
        if self.eigenvalues[0] <= 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "fractional powers need a positive operator (λ₀ = {})",
                self.eigenvalues[0]
            )));
        }
        self.spectral_map(u, |l| Complex64::new(l.powf(beta / 2.0), 0.0))
    }

    /// Integer-part operator `⌊H⌋`.
    pub fn floor_apply(&self, u: &Field) -> Result<Field> {
        if self.eigenvalues[0] < 0.0 {
            return Err(CoreError::InvalidParameter(
                "integer-part operator needs a nonnegative spectrum".into(),
            ));
        }
        self.spectral_map(u, |l| Complex64::new(l.floor(), 0.0))
    }

    /// `B = ⌊√H⌋`.
    pub fn sqrt_floor_apply(&self, u: &Field) -> Result<Field> {
        if self.eigenvalues[0] < 0.0 {
            return Err(CoreError::InvalidParameter(
                "integer-part operator needs a nonnegative spectrum".into(),
            ));
        }
        self.spectral_map(u, |l| Complex64::new(l.sqrt().floor(), 0.0))
    }

    /// Regression of `log ‖e_n‖_{L^q}` against `log √λ_n` over converged
    /// eigenfunctions with unshifted `λ_n ≥ 1`.
    pub fn eigenfunction_growth_fit(&self, q: f64) -> Result<FitLine> {
        if !(q > 2.0) || q.is_infinite() {
            return Err(CoreError::InvalidParameter(format!(
                "growth fit needs q in (2, ∞), got {q}"
            )));
        }
        let limit = self.converged_limit();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (e, &l) in self.eigenvectors.iter().zip(self.unshifted_eigenvalues().iter()) {
            if l >= 1.0 && l <= limit {
                xs.push(0.5 * l.ln());
                ys.push(e.lq_norm(q)?.ln());
            }
        }
        if xs.len() < 20 {
            return Err(CoreError::InsufficientData(format!(
                "growth fit needs at least 20 converged eigenfunctions, have {}",
                xs.len()
            )));
        }
        Ok(linear_fit(&xs, &ys))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{eigensolve, SolveMethod};
    use crate::hamiltonian::Hamiltonian;
    use crate::oracle;

    #[test]
    fn free_spectrum_statistics() {
        let g = Grid::new(8).unwrap();
        let h = Hamiltonian::free(g);
        let spec = eigensolve(&h, 20, SolveMethod::Dense).unwrap();
        // lattice eigenvalues 0,1,1,1,1,2,2,2,2,4,...
        assert!((spec.eigenvalues[0] - 0.0).abs() < 1e-10);
        for i in 1..5 {
            assert!((spec.eigenvalues[i] - 1.0).abs() < 1e-10);
        }
        // counting at 4.5 reproduces the lattice enumeration (13 modes)
        assert_eq!(spec.counting_function(4.5).unwrap(), oracle::lattice_count(4.5));
        // zero-noise sandwich constants vanish
        let lap = oracle::laplacian_spectrum(g);
        let (m1, m2) = spec.eigenvalue_sandwich(&lap, 0.5).unwrap();
        assert!(m1.abs() < 1e-9);
        assert!(m2 <= 1e-9);
    }

    #[test]
    fn projector_and_functional_calculus() {
        let g = Grid::new(8).unwrap();
        let h = Hamiltonian::free(g);
        let spec = eigensolve(&h, 13, SolveMethod::Dense).unwrap();
        let e2 = spec.eigenvectors[2].clone();
        // eigenvector inside the window passes through
        let p = spec.window_projector(1.0, &e2).unwrap();
        assert!(p.sub(&e2).unwrap().l2_norm() < 1e-10);
        // orthogonal data is annihilated
        let e0 = spec.eigenvectors[0].clone();
        assert!(spec.window_projector(1.0, &e0).unwrap().l2_norm() < 1e-10);
        // idempotent + contraction
        let pp = spec.window_projector(1.0, &p).unwrap();
        assert!(pp.sub(&p).unwrap().l2_norm() < 1e-10);
        assert!(p.l2_norm() <= e2.l2_norm() + 1e-12);

        // fractional powers on the positivized spectrum
        let pos = spec.positivized();
        let frac = pos.fractional_apply(0.8, &e2).unwrap();
        let expect = e2.scaled(pos.eigenvalues[2].powf(0.4));
        assert!(frac.sub(&expect).unwrap().l2_norm() < 1e-9);
        // β = 0 acts as the identity on the span
        let id = pos.fractional_apply(0.0, &e2).unwrap();
        assert!(id.sub(&e2).unwrap().l2_norm() < 1e-10);
    }

    #[test]
    fn floor_operators() {
        let g = Grid::new(8).unwrap();
        let h = Hamiltonian::free(g).with_shift(3.7);
        let spec = eigensolve(&h, 6, SolveMethod::Dense).unwrap();
        // λ = 3.7 → ⌊H⌋ = 3, B = ⌊√3.7⌋ = 1 on the ground mode
        let e0 = spec.eigenvectors[0].clone();
        let f = spec.floor_apply(&e0).unwrap();
        assert!(f.sub(&e0.scaled(3.0)).unwrap().l2_norm() < 1e-10);
        let b = spec.sqrt_floor_apply(&e0).unwrap();
        assert!(b.sub(&e0).unwrap().l2_norm() < 1e-10);
        // ‖(H - ⌊H⌋)u‖ ≤ ‖u‖ and ‖(√H - B)u‖ ≤ ‖u‖ on the span
        let u = {
            let mut u = Field::zero(g);
            for e in spec.eigenvectors.iter() {
                u.axpy(Complex64::new(0.4, 0.1), e);
            }
            u
        };
        let hu = spec.spectral_map(&u, |l| Complex64::new(l, 0.0)).unwrap();
        let fu = spec.floor_apply(&u).unwrap();
        assert!(hu.sub(&fu).unwrap().l2_norm() <= u.l2_norm() * (1.0 + 1e-12));
        let su = spec.spectral_map(&u, |l| Complex64::new(l.sqrt(), 0.0)).unwrap();
        let bu = spec.sqrt_floor_apply(&u).unwrap();
        assert!(su.sub(&bu).unwrap().l2_norm() <= u.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn tail_energy_guard_trips() {
        let g = Grid::new(8).unwrap();
        let h = Hamiltonian::free(g);
        let spec = eigensolve(&h, 5, SolveMethod::Dense).unwrap();
        // basis mode |n|²=4 is outside the computed span of 5 eigenpairs
        let u = Field::basis(g, 2, 0).unwrap();
        match spec.spectral_map(&u, |l| Complex64::new(l, 0.0)) {
            Err(CoreError::TailEnergy { tail }) => assert!(tail > 0.9),
            other => panic!("expected tail-energy error, got {other:?}"),
        }
    }

    #[test]
    fn zero_noise_growth_slope_is_flat() {
        // torus exponentials have |e_n| constant in modulus... but the real
        // eigenbasis mixes ±n into sines/cosines whose L⁴ norms are still
        // n-independent, so the regression slope sits near zero.
        let g = Grid::new(16).unwrap();
        let h = Hamiltonian::free(g);
        let spec = eigensolve(&h, 60, SolveMethod::Dense).unwrap();
        let fit = spec.eigenfunction_growth_fit(4.0).unwrap();
        assert!(fit.slope.abs() < 0.1, "slope {}", fit.slope);
    }
}
