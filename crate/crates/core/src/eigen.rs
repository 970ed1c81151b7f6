//! Eigensolvers for the operator: a dense solve in the real trigonometric
//! coordinates (small grids; the oracle path) and Lanczos with full
//! reorthogonalization for the lowest part of the spectrum at production
//! sizes. Both enforce the same residual and orthonormality contracts before
//! a [`Spectrum`] is returned.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::hamiltonian::{dense_matrix, ApplyScratch, Hamiltonian, RealBasis};
use crate::linalg::{sym_eigen_dense, sym_tridiag_eigen};
use crate::random::seeded_rng;
use crate::spectrum::{SolverKind, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Dense for `N ≤ 32`, Lanczos otherwise.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Residual contract: `‖He - λe‖ ≤ tol_scale · (1 + |λ|)`.
    pub residual_tol_scale: f64,
    /// Pairwise orthonormality contract.
    pub ortho_tol: f64,
    /// Seed of the deterministic Lanczos start vector.
    pub start_seed: u64,
    /// Hard cap on the Krylov dimension (defaults to the space dimension).
    pub max_dim: Option<usize>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            residual_tol_scale: 1e-8,
            ortho_tol: 1e-10,
            start_seed: 0x4C41_4E43_5A53_0001,
            max_dim: None,
        }
    }
}

pub fn eigensolve(h: &Hamiltonian, k: usize, method: SolveMethod) -> Result<Spectrum> {
    eigensolve_with(h, k, method, EigenOptions::default())
}

pub fn eigensolve_with(
    h: &Hamiltonian,
    k: usize,
    method: SolveMethod,
    opts: EigenOptions,
) -> Result<Spectrum> {
    if k == 0 {
        return Err(CoreError::InvalidParameter("need at least one eigenpair".into()));
    }
    let basis = RealBasis::new(h.grid());
    if k > basis.dim() {
        return Err(CoreError::InvalidParameter(format!(
            "requested {k} eigenpairs of a {}-dimensional operator",
            basis.dim()
        )));
    }
    let use_dense = match method {
        SolveMethod::Dense => true,
        SolveMethod::Lanczos => false,
        SolveMethod::Auto => h.grid().size() <= 32,
    };
    let spectrum = if use_dense {
        dense_solve(h, &basis, k)?
    } else {
        lanczos_solve(h, &basis, k, &opts)?
    };
    verify_contracts(h, &spectrum, &opts)?;
    Ok(spectrum)
}

fn dense_solve(h: &Hamiltonian, basis: &RealBasis, k: usize) -> Result<Spectrum> {
    let dim = basis.dim();
    let a = dense_matrix(h, basis)?;
    let eig = sym_eigen_dense(a, dim);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut scratch = ApplyScratch::new();
    for j in 0..k {
        let field = basis.field_from_coords(&eig.eigenvector(j));
        let lam = eig.values[j];
        let res = h
            .apply_with(&field, &mut scratch)
            .sub(&field.scaled(lam))?
            .l2_norm();
        eigenvalues.push(lam);
        eigenvectors.push(field);
        residuals.push(res);
    }
    Ok(Spectrum {
        grid: h.grid(),
        eigenvalues,
        eigenvectors,
        residuals,
        kind: SolverKind::Dense,
        shift: h.shift(),
    })
}

struct LanczosState<'a> {
    h: &'a Hamiltonian,
    basis: &'a RealBasis,
    dim: usize,
    /// Row `j` is the Lanczos vector `v_j`.
    vectors: Vec<f64>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    scratch: ApplyScratch,
    rng: rand_chacha::ChaCha8Rng,
}

impl<'a> LanczosState<'a> {
    fn new(h: &'a Hamiltonian, basis: &'a RealBasis, seed: u64) -> Self {
        let dim = basis.dim();
        let mut state = LanczosState {
            h,
            basis,
            dim,
            vectors: Vec::new(),
            alphas: Vec::new(),
            betas: Vec::new(),
            scratch: ApplyScratch::new(),
            rng: seeded_rng(seed),
        };
        let v0 = state.fresh_vector();
        state.vectors.extend_from_slice(&v0);
        state
    }

    fn steps(&self) -> usize {
        self.alphas.len()
    }

    fn stored(&self) -> usize {
        self.vectors.len() / self.dim
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    fn fresh_vector(&mut self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.dim).map(|_| self.rng.sample(StandardNormal)).collect();
        // orthogonalize against everything we already have
        for i in 0..self.stored() {
            let row = &self.vectors[i * self.dim..(i + 1) * self.dim];
            let d = dot(&v, row);
            for (x, r) in v.iter_mut().zip(row.iter()) {
                *x -= d * r;
            }
        }
        let norm = dot(&v, &v).sqrt();
        for x in &mut v {
            *x /= norm;
        }
        v
    }

    fn apply_operator(&mut self, coords: &[f64]) -> Vec<f64> {
        let field = self.basis.field_from_coords(coords);
        let out = self.h.apply_with(&field, &mut self.scratch);
        self.basis.to_coords(&out)
    }

    /// Extend the factorization to `target` steps with full (two-pass)
    /// reorthogonalization.
    fn extend_to(&mut self, target: usize, breakdown_tol: f64) {
        while self.steps() < target && self.stored() <= self.dim {
            let j = self.steps();
            let vj = self.row(j).to_vec();
            let mut w = self.apply_operator(&vj);
            if j > 0 {
                let beta_prev = self.betas[j - 1];
                let prev = self.row(j - 1).to_vec();
                for (x, p) in w.iter_mut().zip(prev.iter()) {
                    *x -= beta_prev * p;
                }
            }
            let alpha = dot(&w, &vj);
            for (x, v) in w.iter_mut().zip(vj.iter()) {
                *x -= alpha * v;
            }
            for _ in 0..2 {
                for i in 0..=j {
                    let row = &self.vectors[i * self.dim..(i + 1) * self.dim];
                    let d = dot(&w, row);
                    if d != 0.0 {
                        for (x, r) in w.iter_mut().zip(row.iter()) {
                            *x -= d * r;
                        }
                    }
                }
            }
            self.alphas.push(alpha);
            if self.stored() > self.dim - 1 {
                // the Krylov space is the whole space; no next vector exists
                self.betas.push(0.0);
                break;
            }
            let beta = dot(&w, &w).sqrt();
            if beta <= breakdown_tol {
                // invariant subspace: deflate with a fresh direction
                self.betas.push(0.0);
                let v = self.fresh_vector();
                self.vectors.extend_from_slice(&v);
            } else {
                self.betas.push(beta);
                for x in &mut w {
                    *x /= beta;
                }
                self.vectors.extend_from_slice(&w);
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn lanczos_solve(
    h: &Hamiltonian,
    basis: &RealBasis,
    k: usize,
    opts: &EigenOptions,
) -> Result<Spectrum> {
    let dim = basis.dim();
    let max_dim = opts.max_dim.unwrap_or(dim).min(dim);
    let (lo, hi) = h.spectral_bounds();
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let breakdown_tol = 1e-13 * scale;

    let mut state = LanczosState::new(h, basis, opts.start_seed);
    let mut m = max_dim.min((2 * k + 60).max(120));
    loop {
        state.extend_to(m, breakdown_tol);
        let steps = state.steps();
        let eig = sym_tridiag_eigen(&state.alphas, &state.betas[..steps.saturating_sub(1)], steps);
        // residual estimate |β_m · y[m-1]| for the lowest k Ritz pairs
        let beta_last = if steps < state.stored() {
            state.betas[steps - 1]
        } else {
            0.0
        };
        let mut all_small = true;
        for j in 0..k.min(steps) {
            let theta = eig.values[j];
            let y_last = eig.vectors[(steps - 1) * steps + j];
            let est = (beta_last * y_last).abs();
            if est > 0.1 * opts.residual_tol_scale * (1.0 + theta.abs()) {
                all_small = false;
                break;
            }
        }
        if all_small && steps >= k {
            // assemble Ritz vectors and verify for real
            let mut eigenvalues = Vec::with_capacity(k);
            let mut eigenvectors = Vec::with_capacity(k);
            let mut residuals = Vec::with_capacity(k);
            let mut ok = true;
            for j in 0..k {
                let mut coords = vec![0.0; dim];
                for i in 0..steps {
                    let w = eig.vectors[i * steps + j];
                    if w != 0.0 {
                        let row = state.row(i);
                        for (c, r) in coords.iter_mut().zip(row.iter()) {
                            *c += w * r;
                        }
                    }
                }
                let norm = dot(&coords, &coords).sqrt();
                for c in &mut coords {
                    *c /= norm;
                }
                let field = basis.field_from_coords(&coords);
                let lam = eig.values[j];
                let res = h
                    .apply_with(&field, &mut state.scratch)
                    .sub(&field.scaled(lam))?
                    .l2_norm();
                if res > opts.residual_tol_scale * (1.0 + lam.abs()) {
                    ok = false;
                }
                eigenvalues.push(lam);
                eigenvectors.push(field);
                residuals.push(res);
            }
            if ok {
                return Ok(Spectrum {
                    grid: h.grid(),
                    eigenvalues,
                    eigenvectors,
                    residuals,
                    kind: SolverKind::Iterative,
                    shift: h.shift(),
                });
            }
        }
        if m >= max_dim {
            let worst = state.betas.last().copied().unwrap_or(f64::NAN);
            return Err(CoreError::NonConvergence(format!(
                "Lanczos used the full budget (m = {m}, dim = {dim}); last coupling {worst:.3e}"
            )));
        }
        m = ((m as f64 * 1.6) as usize).min(max_dim);
    }
}

fn verify_contracts(h: &Hamiltonian, spec: &Spectrum, opts: &EigenOptions) -> Result<()> {
    for (i, (lam, res)) in spec.eigenvalues.iter().zip(spec.residuals.iter()).enumerate() {
        if !res.is_finite() || *res > opts.residual_tol_scale * (1.0 + lam.abs()) {
            return Err(CoreError::NonConvergence(format!(
                "eigenpair {i} (λ = {lam:.6}) has residual {res:.3e}"
            )));
        }
    }
    for i in 0..spec.len() {
        for j in i..spec.len() {
            let d = spec.eigenvectors[i].inner(&spec.eigenvectors[j]).norm();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (d - expect).abs() > opts.ortho_tol {
                return Err(CoreError::NonConvergence(format!(
                    "eigenvectors {i},{j} fail orthonormality by {:.3e}",
                    (d - expect).abs()
                )));
            }
        }
    }
    // ascending order is part of the contract
    for w in spec.eigenvalues.windows(2) {
        if w[1] < w[0] - 1e-12 {
            return Err(CoreError::NonConvergence("eigenvalues not ascending".into()));
        }
    }
    debug_assert_eq!(spec.grid, h.grid());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::grid::Grid;
    use crate::noise::{build_enhanced, sample_white_noise};
    use crate::oracle;

    #[test]
    fn dense_zero_noise_matches_lattice() {
        let g = Grid::new(8).unwrap();
        let h = Hamiltonian::free(g);
        let spec = eigensolve(&h, 20, SolveMethod::Dense).unwrap();
        let lattice = oracle::laplacian_spectrum(g);
        for (a, b) in spec.eigenvalues.iter().zip(lattice.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(spec.kind, SolverKind::Dense);
    }

    #[test]
    fn constant_potential_shifts_the_spectrum() {
        let g = Grid::new(8).unwrap();
        let c = 2.5;
        let h = Hamiltonian::new(Field::constant(g, c), 0.0).unwrap();
        let spec = eigensolve(&h, 10, SolveMethod::Dense).unwrap();
        let lattice = oracle::laplacian_spectrum(g);
        for (a, b) in spec.eigenvalues.iter().zip(lattice.iter()) {
            assert!((a - (b + c)).abs() < 1e-9);
        }
    }

    #[test]
    fn lanczos_matches_dense_on_noisy_operator() {
        let g = Grid::new(16).unwrap();
        let noise = sample_white_noise(g, 21);
        let en = build_enhanced(&noise, 0.25).unwrap();
        let h = Hamiltonian::renormalized(&en).unwrap();
        let dense = eigensolve(&h, 20, SolveMethod::Dense).unwrap();
        let lanczos = eigensolve(&h, 20, SolveMethod::Lanczos).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(lanczos.eigenvalues.iter()) {
            let rel = (a - b).abs() / (1.0 + a.abs());
            assert!(rel < 1e-8, "dense {a} vs lanczos {b}");
        }
        assert_eq!(lanczos.kind, SolverKind::Iterative);
    }

    #[test]
    fn variational_sandwich_for_a_deterministic_potential() {
        // V = cos(x₁): the ground state is pinched between min V and max V
        // added to the free ground state.
        let g = Grid::new(16).unwrap();
        let mut pot = Field::zero(g);
        use num_complex::Complex64;
        pot.axpy(
            Complex64::new(std::f64::consts::PI, 0.0),
            &Field::basis(g, 1, 0).unwrap(),
        );
        pot.axpy(
            Complex64::new(std::f64::consts::PI, 0.0),
            &Field::basis(g, -1, 0).unwrap(),
        );
        pot.symmetrize_real();
        // pot(x) = 2π·cos(x)/2π = cos(x₁)
        let h = Hamiltonian::new(pot, 0.0).unwrap();
        let spec = eigensolve(&h, 1, SolveMethod::Dense).unwrap();
        let l1 = spec.eigenvalues[0];
        assert!(l1 > -1.0 && l1 < 1.0, "ground state {l1} outside the min-max window");
    }

    #[test]
    fn rejects_zero_eigenpair_requests() {
        let g = Grid::new(8).unwrap();
        assert!(eigensolve(&Hamiltonian::free(g), 0, SolveMethod::Auto).is_err());
    }
}
