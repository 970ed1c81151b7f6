//! Sharp Littlewood-Paley decomposition.
//!
//! Block `-1` holds the frequencies with `|n|² ≤ 1`; block `j ≥ 0` holds
//! `2^{2j} < |n|² ≤ 2^{2(j+1)}`. The blocks are indicator cutoffs, so they
//! partition the lattice exactly, reconstruction is exact and distinct blocks
//! are `L²`-orthogonal. Besov norms are block-sup / block-sum functionals on
//! top of this decomposition.

use crate::field::Field;
use crate::grid::Grid;

/// Block index of a squared frequency.
pub fn block_of(freq_sq: i64) -> i32 {
    if freq_sq <= 1 {
        return -1;
    }
    let mut j = 0i32;
    // 4^{j+1} >= freq_sq defines the block.
    let mut upper = 4i64;
    while upper < freq_sq {
        upper *= 4;
        j += 1;
    }
    j
}

/// Largest block that is nonempty on the grid.
pub fn max_block(grid: Grid) -> i32 {
    block_of(grid.max_freq_sq())
}

/// Zero all coefficients outside block `j`.
pub fn lp_project(u: &Field, j: i32) -> Field {
    let g = u.grid();
    let mut coeffs = u.coeffs().to_vec();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if block_of(g.freq_sq(idx)) != j {
            *c = num_complex::Complex64::default();
        }
    }
    Field::from_coeffs(g, coeffs, false).expect("length preserved")
}

/// Low-pass: keep blocks `< j` (the partial sum `S_j`).
pub fn lp_low_pass(u: &Field, j: i32) -> Field {
    let g = u.grid();
    let mut coeffs = u.coeffs().to_vec();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if block_of(g.freq_sq(idx)) >= j {
            *c = num_complex::Complex64::default();
        }
    }
    Field::from_coeffs(g, coeffs, false).expect("length preserved")
}

/// Keep output blocks `>= j` (used by the truncated paraproduct).
pub fn lp_high_pass(u: &Field, j: i32) -> Field {
    let g = u.grid();
    let mut coeffs = u.coeffs().to_vec();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if block_of(g.freq_sq(idx)) < j {
            *c = num_complex::Complex64::default();
        }
    }
    Field::from_coeffs(g, coeffs, false).expect("length preserved")
}

/// All blocks of `u`, indexed by `j + 1` (entry 0 is block `-1`).
pub fn lp_decompose(u: &Field) -> Vec<Field> {
    let jmax = max_block(u.grid());
    (-1..=jmax).map(|j| lp_project(u, j)).collect()
}

/// Range of blocks `j` carrying non-negligible coefficients (relative
/// threshold `1e-12` against the largest coefficient, so FFT round-off dust
/// does not count), as `(lowest, highest)`; `None` for the zero field.
pub fn block_support(u: &Field) -> Option<(i32, i32)> {
    let g = u.grid();
    let peak = u
        .coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    if peak == 0.0 {
        return None;
    }
    let floor = 1e-12 * peak;
    let mut lo = i32::MAX;
    let mut hi = i32::MIN;
    for (idx, c) in u.coeffs().iter().enumerate() {
        if c.norm() > floor {
            let j = block_of(g.freq_sq(idx));
            lo = lo.min(j);
            hi = hi.max(j);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Hölder-Besov proxy `‖u‖_{B^β_{∞,∞}}`: sup over blocks of
/// `2^{jβ} ‖Δ_j u‖_{L^∞}` (block `-1` enters with weight 1).
pub fn besov_inf_norm(u: &Field, beta: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, blk) in lp_decompose(u).into_iter().enumerate() {
        let j = k as i32 - 1;
        if blk.l2_norm() == 0.0 {
            continue;
        }
        let w = if j < 0 { 1.0 } else { (2.0f64).powf(j as f64 * beta) };
        worst = worst.max(w * blk.linf_norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_real_field, seeded_rng};
    use num_complex::Complex64;

    #[test]
    fn block_boundaries() {
        assert_eq!(block_of(0), -1);
        assert_eq!(block_of(1), -1);
        assert_eq!(block_of(2), 0);
        assert_eq!(block_of(4), 0);
        assert_eq!(block_of(5), 1);
        assert_eq!(block_of(16), 1);
        assert_eq!(block_of(17), 2);
    }

    #[test]
    fn single_modes_stay_in_their_block() {
        let g = Grid::new(16).unwrap();
        // |n|² = 1 lives in block -1.
        let u = Field::basis(g, 1, 0).unwrap();
        assert!(lp_project(&u, -1).sub(&u).unwrap().l2_norm() == 0.0);
        // |n|² = 4 lives in block 0 (1 < 4 ≤ 4).
        let v = Field::basis(g, 2, 0).unwrap();
        assert!(lp_project(&v, 0).sub(&v).unwrap().l2_norm() == 0.0);
        assert!(lp_project(&v, 1).l2_norm() == 0.0);
    }

    #[test]
    fn blocks_partition_and_are_orthogonal() {
        let g = Grid::new(16).unwrap();
        let u = random_real_field(g, &mut seeded_rng(2));
        let blocks = lp_decompose(&u);
        let mut sum = Field::zero(g);
        for b in &blocks {
            sum.axpy(Complex64::new(1.0, 0.0), b);
        }
        assert!(sum.sub(&u).unwrap().l2_norm() == 0.0, "reconstruction must be exact");
        for (i, a) in blocks.iter().enumerate() {
            for b in blocks.iter().skip(i + 1) {
                assert!(a.inner(b).norm() < 1e-14);
            }
        }
        // Plancherel splits across blocks.
        let total: f64 = blocks.iter().map(|b| b.l2_norm().powi(2)).sum();
        assert!((total - u.l2_norm().powi(2)).abs() < 1e-12 * total.max(1.0));
    }

    #[test]
    fn bernstein_inequality_on_block_data() {
        // For u in block j: ‖u‖_{H^α} ≤ 2^{(j+1)(α−β)} · 2^{|α−β|} · ‖u‖_{H^β}.
        let g = Grid::new(64).unwrap();
        let mut rng = seeded_rng(14);
        for j in 0..=max_block(g) {
            let u = lp_project(&random_real_field(g, &mut rng), j);
            if u.l2_norm() == 0.0 {
                continue;
            }
            for (alpha, beta) in [(1.0, 0.0), (0.9, 0.5), (2.0, 1.0), (0.5, -0.5)] {
                let lhs = u.sobolev_norm(alpha);
                let c = (2.0f64).powf((alpha - beta).abs());
                let rhs = (2.0f64).powf((j + 1) as f64 * (alpha - beta)) * c * u.sobolev_norm(beta);
                assert!(lhs <= rhs * (1.0 + 1e-12), "j={j} α={alpha} β={beta}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn tame_product_estimate() {
        // ‖uv‖_{H^σ} ≲ ‖u‖_{H^σ}‖v‖_∞ + ‖v‖_{H^σ}‖u‖_∞ with a modest constant.
        let g = Grid::new(64).unwrap();
        let mut rng = seeded_rng(8);
        for sigma in [0.5, 0.9] {
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let u = crate::random::random_smooth_field(g, 2.0, &mut rng);
                let v = crate::random::random_smooth_field(g, 2.0, &mut rng);
                let prod = crate::field::dealiased_product(&u, &v).unwrap();
                let denom = u.sobolev_norm(sigma) * v.linf_norm() + v.sobolev_norm(sigma) * u.linf_norm();
                worst = worst.max(prod.sobolev_norm(sigma) / denom);
            }
            assert!(worst <= 10.0, "tame ratio at σ={sigma}: {worst}");
        }
    }
}
