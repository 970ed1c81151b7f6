//! Chebyshev evaluation of functions of the operator.
//!
//! For a Hermitian `H` with spectrum enclosed in `[a,b]`, `f(H)u` is
//! evaluated as `Σ_k d_k T_k(Ĥ)u` with `Ĥ = (2H - (a+b))/(b-a)` and the
//! three-term recurrence; only `H`-applies are needed, never a matrix. For
//! the Schrödinger phase the coefficients are analytic
//! (`e^{izx} = Σ (2-δ_{k0}) i^k J_k(z) T_k(x)`), for the wave trigonometric
//! functions they are fitted adaptively at Chebyshev nodes. Coefficient
//! tails are driven below a requested tolerance, which bounds the operator
//! error uniformly on the spectral enclosure.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::Field;
use crate::hamiltonian::{ApplyScratch, Hamiltonian};

/// Chebyshev coefficients of a function on `[a, b]`: `f ≈ Σ_k d_k T_k`.
#[derive(Clone, Debug)]
pub struct ChebCoeffs {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<Complex64>,
}

// The wave kernels as entire functions of λ (cosh/sinh branches for λ < 0,
// power series across the removable singularity), so spectral enclosures
// that dip slightly below zero are handled exactly.

/// `cos(t√λ)`.
pub fn cos_sqrt(t: f64, l: f64) -> f64 {
    if l >= 0.0 {
        (t * l.sqrt()).cos()
    } else {
        (t * (-l).sqrt()).cosh()
    }
}

/// `sin(t√λ)/√λ` (→ `t` as `λ → 0`).
pub fn sinc_sqrt(t: f64, l: f64) -> f64 {
    if l.abs() < 1e-8 {
        t * (1.0 - t * t * l / 6.0)
    } else if l > 0.0 {
        (t * l.sqrt()).sin() / l.sqrt()
    } else {
        (t * (-l).sqrt()).sinh() / (-l).sqrt()
    }
}

/// `(1 - cos(t√λ))/λ` (→ `t²/2` as `λ → 0`).
pub fn one_minus_cos_over(t: f64, l: f64) -> f64 {
    if l.abs() < 1e-8 {
        0.5 * t * t * (1.0 - t * t * l / 12.0)
    } else {
        (1.0 - cos_sqrt(t, l)) / l
    }
}

/// `J_0..J_kmax` at real nonnegative argument by Miller's backward
/// recurrence with normalization `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(z: f64, kmax: usize) -> Vec<f64> {
    assert!(z >= 0.0);
    if z == 0.0 {
        let mut out = vec![0.0; kmax + 1];
        out[0] = 1.0;
        return out;
    }
    let start = kmax + 20 + (z as usize) / 2 + (15.0 * z.powf(1.0 / 3.0)) as usize;
    let mut jp1 = 0.0f64;
    let mut j = 1e-300f64;
    let mut out = vec![0.0; kmax + 1];
    let mut norm = 0.0f64;
    for k in (0..=start).rev() {
        let jm1 = (2.0 * (k as f64 + 1.0) / z) * j - jp1;
        jp1 = j;
        j = jm1;
        if k <= kmax {
            out[k] = j;
        }
        // normalization uses even orders: J_0 + 2 J_2 + 2 J_4 + ... = 1
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if j.abs() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp1 *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// Analytic Chebyshev coefficients of `λ ↦ e^{itλ}` on `[a, b]`:
/// `e^{itλ} = e^{it(a+b)/2} Σ_k (2-δ_{k0}) i^k J_k(z) T_k(x)`, `z = t(b-a)/2`.
pub fn schrodinger_phase_coeffs(t: f64, a: f64, b: f64, tol: f64) -> ChebCoeffs {
    let z = t * (b - a) / 2.0;
    let zabs = z.abs();
    let kmax = (zabs + 20.0 + 10.0 * zabs.powf(1.0 / 3.0)) as usize;
    let bessel = bessel_j_sequence(zabs, kmax);
    let center_phase = Complex64::from_polar(1.0, t * (a + b) / 2.0);
    let i = Complex64::new(0.0, 1.0);
    let sign: f64 = if z >= 0.0 { 1.0 } else { -1.0 };
    let mut coeffs = Vec::with_capacity(kmax + 1);
    for (k, &jk) in bessel.iter().enumerate() {
        let factor = if k == 0 { 1.0 } else { 2.0 };
        // J_k(-z) = (-1)^k J_k(z); fold the sign into the phase factor.
        let val = factor * jk * sign.powi(k as i32);
        coeffs.push(center_phase * i.powu(k as u32) * val);
    }
    // trim the tail below tolerance
    let scale: f64 = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let mut keep = coeffs.len();
    while keep > 2 && coeffs[keep - 1].norm() < tol * scale && coeffs[keep - 2].norm() < tol * scale {
        keep -= 1;
    }
    coeffs.truncate(keep);
    ChebCoeffs { a, b, coeffs }
}

/// Adaptive Chebyshev interpolation of an arbitrary (smooth) function on
/// `[a, b]`, doubling the order until the coefficient tail drops below
/// `tol` relative to the largest coefficient.
pub fn cheb_fit(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    max_order: usize,
) -> Result<ChebCoeffs> {
    let mut m = 32usize;
    loop {
        let mut samples = Vec::with_capacity(m);
        for j in 0..m {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
            let x = theta.cos();
            let lam = 0.5 * (b - a) * x + 0.5 * (a + b);
            samples.push((theta, f(lam)));
        }
        let mut coeffs = Vec::with_capacity(m);
        for k in 0..m {
            let mut acc = Complex64::default();
            for (theta, val) in &samples {
                acc += val * (k as f64 * theta).cos();
            }
            let w = if k == 0 { 1.0 } else { 2.0 };
            coeffs.push(acc * (w / m as f64));
        }
        let scale: f64 = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        let tail_len = (m / 8).max(4);
        let tail_ok = coeffs[m - tail_len..].iter().all(|c| c.norm() < tol * scale);
        if tail_ok {
            let mut keep = coeffs.len();
            while keep > 2 && coeffs[keep - 1].norm() < tol * scale && coeffs[keep - 2].norm() < tol * scale
            {
                keep -= 1;
            }
            coeffs.truncate(keep);
            return Ok(ChebCoeffs { a, b, coeffs });
        }
        if m >= max_order {
            return Err(CoreError::NonConvergence(format!(
                "Chebyshev fit did not reach tolerance {tol:.1e} within order {max_order}"
            )));
        }
        m *= 2;
    }
}

/// Evaluate `Σ_k d_k T_k(Ĥ) u` for several coefficient sets sharing the same
/// interval, reusing the `T_k(Ĥ)u` sweeps.
pub fn cheb_apply_multi(
    h: &Hamiltonian,
    sets: &[&ChebCoeffs],
    u: &Field,
    scratch: &mut ApplyScratch,
) -> Vec<Field> {
    assert!(!sets.is_empty());
    let a = sets[0].a;
    let b = sets[0].b;
    for s in sets {
        assert!(s.a == a && s.b == b, "coefficient sets must share the interval");
    }
    let longest = sets.iter().map(|s| s.coeffs.len()).max().unwrap();
    let center = 0.5 * (a + b);
    let halfwidth = 0.5 * (b - a);

    // Ĥ v = (H v - center v) / halfwidth
    let applied = |state: &mut LanczosFree<'_>, v: &Field| -> Field {
        let mut out = state.h.apply_with(v, state.scratch);
        out.axpy(Complex64::new(-center, 0.0), v);
        out.scale(1.0 / halfwidth);
        out
    };
    struct LanczosFree<'s> {
        h: &'s Hamiltonian,
        scratch: &'s mut ApplyScratch,
    }
    let mut st = LanczosFree { h, scratch };

    let mut outputs: Vec<Field> = sets
        .iter()
        .map(|s| {
            let mut acc = u.clone();
            acc.scale_complex(s.coeffs[0]);
            acc
        })
        .collect();
    if longest == 1 {
        return outputs;
    }
    let mut t_prev = u.clone();
    let mut t_curr = applied(&mut st, u);
    for (out, s) in outputs.iter_mut().zip(sets.iter()) {
        if s.coeffs.len() > 1 {
            out.axpy(s.coeffs[1], &t_curr);
        }
    }
    for k in 2..longest {
        let mut t_next = applied(&mut st, &t_curr);
        t_next.scale(2.0);
        t_next.axpy(Complex64::new(-1.0, 0.0), &t_prev);
        for (out, s) in outputs.iter_mut().zip(sets.iter()) {
            if k < s.coeffs.len() {
                out.axpy(s.coeffs[k], &t_next);
            }
        }
        t_prev = t_curr;
        t_curr = t_next;
    }
    outputs
}

pub fn cheb_apply(h: &Hamiltonian, set: &ChebCoeffs, u: &Field, scratch: &mut ApplyScratch) -> Field {
    cheb_apply_multi(h, &[set], u, scratch).pop().unwrap()
}

/// Enclosure `[a,b]` of the operator spectrum with a small safety margin
/// (Chebyshev series diverge outside their interval).
pub fn safe_bounds(h: &Hamiltonian) -> (f64, f64) {
    let (lo, hi) = h.spectral_bounds();
    let pad = 1e-6 * (hi - lo).max(1.0) + 0.5;
    (lo - pad, hi + pad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::noise::{build_enhanced, sample_white_noise};
    use crate::random::{random_complex_field, seeded_rng};

    #[test]
    fn bessel_matches_known_values() {
        // J_0(1) = 0.7651976865..., J_1(1) = 0.4400505857...
        let j = bessel_j_sequence(1.0, 5);
        assert!((j[0] - 0.7651976865579666).abs() < 1e-13);
        assert!((j[1] - 0.44005058574493355).abs() < 1e-13);
        // J_0(10) = -0.2459357644513483
        let j10 = bessel_j_sequence(10.0, 3);
        assert!((j10[0] + 0.2459357644513483).abs() < 1e-12);
    }

    #[test]
    fn phase_coeffs_reproduce_scalar_exponential() {
        // Evaluate Σ d_k T_k(x) directly and compare with e^{itλ}.
        let (a, b) = (-3.0, 40.0);
        let t = 0.73;
        let set = schrodinger_phase_coeffs(t, a, b, 1e-14);
        for lam in [-3.0, -1.2, 0.0, 5.5, 17.0, 39.9] {
            let x = (2.0 * lam - (a + b)) / (b - a);
            let mut t_prev = 1.0f64;
            let mut t_curr = x;
            let mut acc = set.coeffs[0] * t_prev;
            if set.coeffs.len() > 1 {
                acc += set.coeffs[1] * t_curr;
            }
            for k in 2..set.coeffs.len() {
                let t_next = 2.0 * x * t_curr - t_prev;
                acc += set.coeffs[k] * t_next;
                t_prev = t_curr;
                t_curr = t_next;
            }
            let exact = Complex64::from_polar(1.0, t * lam);
            assert!((acc - exact).norm() < 1e-11, "λ={lam}: {acc} vs {exact}");
        }
    }

    #[test]
    fn fitted_cosine_of_sqrt() {
        let (a, b) = (0.5, 900.0);
        let t = 0.3;
        let set = cheb_fit(|l| Complex64::new((t * l.sqrt()).cos(), 0.0), a, b, 1e-13, 1 << 14).unwrap();
        for lam in [0.5, 3.0, 123.0, 899.0] {
            let x = (2.0 * lam - (a + b)) / (b - a);
            let mut t_prev = 1.0f64;
            let mut t_curr = x;
            let mut acc = set.coeffs[0] * t_prev;
            if set.coeffs.len() > 1 {
                acc += set.coeffs[1] * t_curr;
            }
            for k in 2..set.coeffs.len() {
                let t_next = 2.0 * x * t_curr - t_prev;
                acc += set.coeffs[k] * t_next;
                t_prev = t_curr;
                t_curr = t_next;
            }
            let exact = (t * lam.sqrt()).cos();
            assert!((acc.re - exact).abs() < 1e-10 && acc.im.abs() < 1e-12);
        }
    }

    #[test]
    fn operator_phase_matches_eigen_route_free_case() {
        let g = Grid::new(8).unwrap();
        let h = Hamiltonian::free(g);
        let (a, b) = safe_bounds(&h);
        let t = 0.4;
        let set = schrodinger_phase_coeffs(t, a, b, 1e-13);
        let u = Field::basis(g, 2, -1).unwrap();
        let mut scratch = ApplyScratch::new();
        let got = cheb_apply(&h, &set, &u, &mut scratch);
        let expect = u.scaled(1.0).clone();
        let mut expect = expect;
        expect.scale_complex(Complex64::from_polar(1.0, t * 5.0));
        assert!(got.sub(&expect).unwrap().l2_norm() < 1e-11);
    }

    #[test]
    fn operator_phase_is_unitary_on_noisy_operator() {
        let g = Grid::new(16).unwrap();
        let noise = sample_white_noise(g, 17);
        let en = build_enhanced(&noise, 0.25).unwrap();
        let h = Hamiltonian::renormalized(&en).unwrap();
        let (a, b) = safe_bounds(&h);
        let set = schrodinger_phase_coeffs(0.05, a, b, 1e-13);
        let mut scratch = ApplyScratch::new();
        let u = random_complex_field(g, &mut seeded_rng(3));
        let v = cheb_apply(&h, &set, &u, &mut scratch);
        assert!((v.l2_norm() - u.l2_norm()).abs() < 1e-10 * u.l2_norm());
    }
}
