//! Bony paraproducts and the paracontrolled machinery on top of them.
//!
//! With the sharp Littlewood-Paley blocks `Δ_j`, a product decomposes exactly
//! into
//!
//! ```text
//! u·v = P_u v + Π(u,v) + P_v u,
//! P_f g = Σ_j S_{j-2} f · Δ_j g,     S_m f = Σ_{i<m} Δ_i f,
//! Π(f,g) = Σ_{|j-j'|≤2} Δ_j f · Δ_{j'} g,
//! ```
//!
//! where every block product is dealiased, so the three terms sum to the
//! dealiased product to round-off. The intertwined paraproduct conjugates
//! `P` by `L = -Δ` (`L ∘ P̃ = P ∘ L`), its truncation drops low output
//! blocks, and the pair of maps `remainder` / `reconstruct` parametrizes
//! functions whose rough part is slaved to the reference functions
//! `X₁ + X₂` of an enhanced noise.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::{dealiased_product, Field};
use crate::lp;
use crate::noise::EnhancedNoise;

fn check_grids(f: &Field, g: &Field) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(CoreError::GridMismatch(f.grid().size(), g.grid().size()));
    }
    Ok(())
}

/// Bony paraproduct `P_f g`, the low-high interactions with gap 2.
pub fn paraproduct(f: &Field, g: &Field) -> Result<Field> {
    check_grids(f, g)?;
    let grid = f.grid();
    let jmax = lp::max_block(grid);
    let mut acc = Field::zero(grid);
    // Running S_{j-2} f = blocks < j-2 of f, grown incrementally.
    let mut low = Field::zero(grid);
    let mut low_nonzero = false;
    for j in -1..=jmax {
        // Before handling output block j, S_{j-2} must contain blocks ≤ j-3.
        let newest = j - 3;
        if newest >= -1 {
            let blk = lp::lp_project(f, newest);
            if blk.l2_norm() > 0.0 {
                low.axpy(Complex64::new(1.0, 0.0), &blk);
                low_nonzero = true;
            }
        }
        if !low_nonzero {
            continue;
        }
        let gj = lp::lp_project(g, j);
        if gj.l2_norm() == 0.0 {
            continue;
        }
        acc.axpy(Complex64::new(1.0, 0.0), &dealiased_product(&low, &gj)?);
    }
    if f.is_real() && g.is_real() {
        acc.symmetrize_real();
    }
    Ok(acc)
}

/// Resonant term `Π(f,g)`: block interactions at distance at most 2.
pub fn resonant_product(f: &Field, g: &Field) -> Result<Field> {
    check_grids(f, g)?;
    let grid = f.grid();
    let jmax = lp::max_block(grid);
    let f_blocks = lp::lp_decompose(f);
    let g_blocks = lp::lp_decompose(g);
    let blk = |list: &[Field], j: i32| -> Option<Field> {
        if j < -1 || j > jmax {
            return None;
        }
        let b = &list[(j + 1) as usize];
        (b.l2_norm() > 0.0).then(|| b.clone())
    };
    let mut acc = Field::zero(grid);
    for j in -1..=jmax {
        let Some(fj) = blk(&f_blocks, j) else { continue };
        // Window Σ_{|j'-j|≤2} Δ_{j'} g.
        let mut window = Field::zero(grid);
        let mut any = false;
        for jp in (j - 2)..=(j + 2) {
            if let Some(gj) = blk(&g_blocks, jp) {
                window.axpy(Complex64::new(1.0, 0.0), &gj);
                any = true;
            }
        }
        if !any {
            continue;
        }
        acc.axpy(Complex64::new(1.0, 0.0), &dealiased_product(&fj, &window)?);
    }
    if f.is_real() && g.is_real() {
        acc.symmetrize_real();
    }
    Ok(acc)
}

/// Intertwined paraproduct `P̃_f g`, defined through `L ∘ P̃ = P ∘ L` with
/// `L = -Δ` inverted mean-zero; the zero mode of `P_f g` is restored so the
/// two paraproducts agree there.
pub fn intertwined_paraproduct(f: &Field, g: &Field) -> Result<Field> {
    check_grids(f, g)?;
    // L g = -Δ g ; L^{-1} h = -(Δ^{-1} h) with the zero mode annihilated.
    let lg = g.laplacian().scaled(-1.0);
    let core = paraproduct(f, &lg)?.inverse_laplacian().scaled(-1.0);
    let plain = paraproduct(f, g)?;
    let grid = f.grid();
    let mut out = core;
    let zero_mode = plain.coeff(0, 0);
    if zero_mode != Complex64::default() {
        let mut c = Field::zero(grid);
        c.axpy(zero_mode, &Field::basis(grid, 0, 0).expect("zero mode exists"));
        out.axpy(Complex64::new(1.0, 0.0), &c);
    }
    if f.is_real() && g.is_real() {
        out.symmetrize_real();
    }
    Ok(out)
}

/// Corrector `C(u, X, ξ) = Π(P̃_u X, ξ) - u·Π(X, ξ)`.
pub fn corrector(u: &Field, x: &Field, xi: &Field) -> Result<Field> {
    let first = resonant_product(&intertwined_paraproduct(u, x)?, xi)?;
    let second = dealiased_product(u, &resonant_product(x, xi)?)?;
    first.sub(&second)
}

/// Swap operator `S(f, g, h) = P_h P̃_f g - P_f P_h g`.
pub fn swap_commutator(f: &Field, g: &Field, h: &Field) -> Result<Field> {
    let first = paraproduct(h, &intertwined_paraproduct(f, g)?)?;
    let second = paraproduct(f, &paraproduct(h, g)?)?;
    first.sub(&second)
}

/// Diagnostics of one fixed-point solve.
#[derive(Clone, Copy, Debug)]
pub struct FixedPointReport {
    pub iterations: usize,
    pub residual: f64,
    /// Last observed ratio of successive update norms; `< 1` means the
    /// iteration was contracting when it stopped.
    pub contraction_factor: f64,
}

/// The truncated-paraproduct parametrization of the operator domain for one
/// enhanced-noise realization.
///
/// `s ∈ (0,1]` controls the truncation: output blocks below
/// `j_s = ⌈log₂ s^{-1/2}⌉` are dropped, which shrinks the slaved part and
/// makes the remainder map invertible by fixed-point iteration once `s` is
/// small enough for the iteration to contract.
pub struct ParacontrolledMaps {
    enhanced: EnhancedNoise,
    s: f64,
    j_s: i32,
    gamma_tol: f64,
    gamma_max_iter: usize,
    /// Cached `X₁ + X₂`.
    x_sum: Field,
}

impl ParacontrolledMaps {
    pub fn new(enhanced: &EnhancedNoise, s: f64, gamma_tol: f64, gamma_max_iter: usize) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "truncation parameter must lie in (0,1], got {s}"
            )));
        }
        if gamma_tol <= 0.0 || gamma_max_iter == 0 {
            return Err(CoreError::InvalidParameter(
                "fixed-point tolerance and iteration budget must be positive".into(),
            ));
        }
        let j_s = (-0.5 * s.log2() - 1e-12).ceil().max(0.0) as i32;
        let x_sum = enhanced.x1.add(&enhanced.x2)?;
        Ok(ParacontrolledMaps {
            enhanced: enhanced.clone(),
            s,
            j_s,
            gamma_tol,
            gamma_max_iter,
            x_sum,
        })
    }

    pub fn enhanced(&self) -> &EnhancedNoise {
        &self.enhanced
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Lowest output block kept by the truncated paraproduct.
    pub fn j_s(&self) -> i32 {
        self.j_s
    }

    pub fn gamma_tol(&self) -> f64 {
        self.gamma_tol
    }

    pub fn reference_sum(&self) -> &Field {
        &self.x_sum
    }

    /// Truncated intertwined paraproduct `P̃^s_f g`: keep output blocks
    /// `j ≥ j_s`.
    pub fn truncated_paraproduct(&self, f: &Field, g: &Field) -> Result<Field> {
        let full = intertwined_paraproduct(f, g)?;
        Ok(lp::lp_high_pass(&full, self.j_s))
    }

    /// The slaved part `P̃^s_u (X₁+X₂)` of `u`.
    pub fn slaved_part(&self, u: &Field) -> Result<Field> {
        self.truncated_paraproduct(u, &self.x_sum)
    }

    /// Remainder map `u ↦ u - P̃^s_u(X₁+X₂)`; linear, a perturbation of the
    /// identity.
    pub fn remainder(&self, u: &Field) -> Result<Field> {
        u.sub(&self.slaved_part(u)?)
    }

    /// Inverse of [`Self::remainder`] by fixed-point iteration:
    /// `v = u♯ + P̃^s_v(X₁+X₂)`. Fails loudly when the iteration does not
    /// contract or the budget runs out.
    pub fn reconstruct(&self, u_sharp: &Field) -> Result<(Field, FixedPointReport)> {
        let mut v = u_sharp.clone();
        let mut prev_update = f64::INFINITY;
        let mut contraction: f64 = 0.0;
        let mut growth_streak = 0usize;
        let scale = u_sharp.l2_norm().max(1.0);
        for it in 1..=self.gamma_max_iter {
            let next = u_sharp.add(&self.slaved_part(&v)?)?;
            let update = next.sub(&v)?.l2_norm();
            v = next;
            if update <= self.gamma_tol * scale {
                let residual = v
                    .sub(&u_sharp.add(&self.slaved_part(&v)?)?)?
                    .l2_norm();
                return Ok((
                    v,
                    FixedPointReport {
                        iterations: it,
                        residual,
                        contraction_factor: contraction,
                    },
                ));
            }
            if prev_update.is_finite() && prev_update > 0.0 {
                contraction = update / prev_update;
                if contraction >= 1.0 {
                    growth_streak += 1;
                    if growth_streak >= 3 {
                        return Err(CoreError::NonContraction {
                            factor: contraction,
                            iterations: it,
                        });
                    }
                } else {
                    growth_streak = 0;
                }
            }
            prev_update = update;
        }
        Err(CoreError::MaxIterations {
            max_iter: self.gamma_max_iter,
            residual: prev_update,
        })
    }
}
