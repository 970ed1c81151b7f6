//! Independent reference implementations.
//!
//! Everything here is deliberately brute force — direct DFT sums, `O(N⁴)`
//! convolutions, shell-by-shell lattice enumeration, scaled Taylor matrix
//! exponentials, a fixed-step Runge-Kutta scalar integrator — and shares no
//! code path with the production routines it cross-checks. The verification
//! suites (and the `oracle` CLI subcommand) compare the fast implementations
//! against these.

use num_complex::Complex64;

use crate::field::Field;
use crate::grid::Grid;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Direct evaluation of `u(x_j) = Σ_n c_n e^{i n·x_j} / (2π)` on the native
/// collocation grid, `O(N⁴)`.
pub fn direct_synthesis(u: &Field) -> Vec<Complex64> {
    let g = u.grid();
    let n = g.size();
    let mut out = vec![Complex64::default(); n * n];
    for jy in 0..n {
        for jx in 0..n {
            let x = TWO_PI * jx as f64 / n as f64;
            let y = TWO_PI * jy as f64 / n as f64;
            let mut acc = Complex64::default();
            for idx in 0..g.bins() {
                let c = u.coeffs()[idx];
                if c != Complex64::default() {
                    let (fx, fy) = g.freq_pair(idx);
                    acc += c * Complex64::from_polar(1.0, fx as f64 * x + fy as f64 * y);
                }
            }
            out[jy * n + jx] = acc / TWO_PI;
        }
    }
    out
}

/// Exact coefficient convolution `(uv)_n = (1/2π) Σ_m u_m v_{n-m}` restricted
/// to the active band, `O(N⁴)`.
pub fn convolution_product(u: &Field, v: &Field) -> Field {
    let g = u.grid();
    assert_eq!(g, v.grid());
    let mf = g.max_active_freq();
    let mut out = Field::zero(g);
    let mut coeffs = vec![Complex64::default(); g.bins()];
    for nx in -mf..=mf {
        for ny in -mf..=mf {
            let mut acc = Complex64::default();
            for mx in -mf..=mf {
                let kx = nx - mx;
                if kx.abs() > mf {
                    continue;
                }
                for my in -mf..=mf {
                    let ky = ny - my;
                    if ky.abs() > mf {
                        continue;
                    }
                    let a = u.coeffs()[g.index(mx, my)];
                    if a == Complex64::default() {
                        continue;
                    }
                    acc += a * v.coeffs()[g.index(kx, ky)];
                }
            }
            coeffs[g.index(nx, ny)] = acc / TWO_PI;
        }
    }
    for (idx, c) in coeffs.into_iter().enumerate() {
        if c != Complex64::default() {
            let (fx, fy) = g.freq_pair(idx);
            out.set_coeff(fx, fy, c);
        }
    }
    out
}

/// Number of lattice points `n ∈ ℤ²` with `|n|² ≤ λ` (counting the origin).
pub fn lattice_count(lambda: f64) -> usize {
    if lambda < 0.0 {
        return 0;
    }
    let r = lambda.sqrt().floor() as i64 + 1;
    let mut count = 0usize;
    for nx in -r..=r {
        for ny in -r..=r {
            if ((nx * nx + ny * ny) as f64) <= lambda {
                count += 1;
            }
        }
    }
    count
}

/// Number of representations of `s` as a sum of two squares (ordered,
/// signed), by brute force.
fn two_square_representations(s: i64) -> usize {
    let r = (s as f64).sqrt() as i64 + 1;
    let mut count = 0;
    for nx in -r..=r {
        let rem = s - nx * nx;
        if rem < 0 {
            continue;
        }
        let ny = (rem as f64).sqrt().round() as i64;
        if ny * ny == rem {
            count += if ny == 0 { 1 } else { 2 };
        }
    }
    count
}

/// Shell-by-shell evaluation of `Σ_{0<|n|≤R} (2π)^{-2} |n|^{-2}` with
/// `R = 1/eps`; independent enumeration used to pin the renormalization
/// constant.
pub fn lattice_renorm_sum(eps: f64) -> f64 {
    let r2 = (1.0 / eps) * (1.0 / eps);
    let smax = r2.floor() as i64;
    let mut acc = 0.0;
    for s in 1..=smax {
        if (s as f64) <= r2 {
            acc += two_square_representations(s) as f64 / s as f64;
        }
    }
    acc / (TWO_PI * TWO_PI)
}

/// Dense complex matrix, row-major.
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::default(); d];
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            let mut acc = Complex64::default();
            for (a, b) in row.iter().zip(v.iter()) {
                acc += a * b;
            }
            out[r] = acc;
        }
        out
    }

    fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let d = self.dim;
        let mut data = vec![Complex64::default(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == Complex64::default() {
                    continue;
                }
                let row_b = &other.data[k * d..(k + 1) * d];
                let row_o = &mut data[r * d..(r + 1) * d];
                for (o, b) in row_o.iter_mut().zip(row_b.iter()) {
                    *o += a * b;
                }
            }
        }
        DenseMatrix { dim: d, data }
    }
}

/// `e^{i t A}` for a real symmetric matrix `A` (row-major, `dim²` entries) by
/// scaling-and-squaring with a machine-precision Taylor kernel.
pub fn expm_i_symmetric(a: &[f64], dim: usize, t: f64) -> DenseMatrix {
    assert_eq!(a.len(), dim * dim);
    // ‖A‖_∞ bound for scaling.
    let norm = (0..dim)
        .map(|r| a[r * dim..(r + 1) * dim].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let scaled = norm * t.abs();
    let s = if scaled > 0.25 {
        (scaled / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let h = t / (2.0f64).powi(s as i32);

    // Taylor of e^{ihA}: with ‖ihA‖ ≤ 0.25, 20 terms are far below 1e-16.
    let mut term = DenseMatrix {
        dim,
        data: identity(dim),
    };
    let mut acc = DenseMatrix {
        dim,
        data: identity(dim),
    };
    let ia: Vec<Complex64> = a.iter().map(|x| Complex64::new(0.0, h * x)).collect();
    let ia = DenseMatrix { dim, data: ia };
    for k in 1..=20 {
        term = term.matmul(&ia);
        let inv_k = 1.0 / k as f64;
        for v in &mut term.data {
            *v *= inv_k;
        }
        for (o, v) in acc.data.iter_mut().zip(term.data.iter()) {
            *o += v;
        }
    }
    let mut result = acc;
    for _ in 0..s {
        result = result.matmul(&result);
    }
    result
}

fn identity(dim: usize) -> Vec<Complex64> {
    let mut data = vec![Complex64::default(); dim * dim];
    for r in 0..dim {
        data[r * dim + r] = Complex64::new(1.0, 0.0);
    }
    data
}

/// Fixed-step classical Runge-Kutta for the scalar oscillator
/// `u'' = -shift·u - u³` (the spatially constant reduction of the cubic wave
/// equation); returns `(u, u')` at time `t_final`.
pub fn duffing_reference(shift: f64, u0: f64, v0: f64, t_final: f64, dt: f64) -> (f64, f64) {
    let f = |u: f64, v: f64| (v, -shift * u - u * u * u);
    let mut u = u0;
    let mut v = v0;
    let steps = (t_final / dt).round() as usize;
    let h = t_final / steps as f64;
    for _ in 0..steps {
        let (k1u, k1v) = f(u, v);
        let (k2u, k2v) = f(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = f(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = f(u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (u, v)
}

/// Grid restricted lattice spectrum of `-Δ`: the sorted `|n|²` over active
/// modes; the reference eigenvalue list of the noiseless operator.
pub fn laplacian_spectrum(grid: Grid) -> Vec<f64> {
    let mut eigs: Vec<f64> = (0..grid.bins())
        .filter(|&idx| grid.is_active(idx))
        .map(|idx| grid.freq_sq(idx) as f64)
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_count_small_values() {
        assert_eq!(lattice_count(0.0), 1);
        assert_eq!(lattice_count(1.0), 5);
        assert_eq!(lattice_count(2.0), 9);
        assert_eq!(lattice_count(4.5), 13);
    }

    #[test]
    fn renorm_shell_sum_at_radius_one() {
        // Four modes with |n| = 1 contribute 4 / (4π²) = 1/π².
        let c = lattice_renorm_sum(1.0);
        let expect = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((c - expect).abs() < 1e-15);
    }

    #[test]
    fn expm_identity_limit() {
        let a = vec![2.0, 0.0, 0.0, -1.0];
        let u = expm_i_symmetric(&a, 2, 0.7);
        // diagonal case: phases e^{1.4i}, e^{-0.7i}
        assert!((u.data[0] - Complex64::from_polar(1.0, 1.4)).norm() < 1e-14);
        assert!((u.data[3] - Complex64::from_polar(1.0, -0.7)).norm() < 1e-14);
        assert!(u.data[1].norm() < 1e-15);
    }

    #[test]
    fn expm_unitary_on_random_symmetric() {
        let dim = 6;
        let mut a = vec![0.0; dim * dim];
        let mut state = 1u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for r in 0..dim {
            for c in 0..=r {
                let v = next();
                a[r * dim + c] = v;
                a[c * dim + r] = v;
            }
        }
        let u = expm_i_symmetric(&a, dim, 0.9);
        // U U* = I
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::default();
                for k in 0..dim {
                    acc += u.data[r * dim + k] * u.data[c * dim + k].conj();
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((acc - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn duffing_conserves_energy() {
        let (u, v) = duffing_reference(1.0, 0.8, 0.0, 5.0, 1e-4);
        let e0 = 0.5 * 0.0 + 0.5 * 0.8f64.powi(2) + 0.25 * 0.8f64.powi(4);
        let e1 = 0.5 * v * v + 0.5 * u * u + 0.25 * u.powi(4);
        assert!((e0 - e1).abs() < 1e-10);
    }
}
