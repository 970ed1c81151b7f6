//! Dense real-symmetric eigensolver: Householder reduction to tridiagonal
//! form followed by the implicit-shift QL iteration, with eigenvector
//! accumulation. Used directly for the dense operator oracle and on the
//! Lanczos tridiagonal matrices.

/// Eigen-decomposition of a real symmetric matrix.
pub struct SymEigen {
    pub dim: usize,
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Row-major matrix whose column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
}

impl SymEigen {
    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.vectors[i * self.dim + j]).collect()
    }
}

/// Full eigen-decomposition of a symmetric matrix (row-major, destroyed).
pub fn sym_eigen_dense(mut a: Vec<f64>, dim: usize) -> SymEigen {
    assert_eq!(a.len(), dim * dim);
    let (mut d, mut e) = householder_tridiagonalize(&mut a, dim);
    ql_implicit(&mut d, &mut e, &mut a, dim);
    sort_pairs(d, a, dim)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix given by its
/// diagonal `d` and subdiagonal `e` (`e[i]` couples `i` and `i+1`).
pub fn sym_tridiag_eigen(d: &[f64], e: &[f64], dim: usize) -> SymEigen {
    assert_eq!(d.len(), dim);
    assert!(e.len() + 1 >= dim);
    let mut dd = d.to_vec();
    // ql_implicit expects the subdiagonal shifted by one (entry i couples i-1,i).
    let mut ee = vec![0.0; dim];
    for i in 1..dim {
        ee[i] = e[i - 1];
    }
    let mut z = vec![0.0; dim * dim];
    for i in 0..dim {
        z[i * dim + i] = 1.0;
    }
    ql_implicit_shifted(&mut dd, &mut ee, &mut z, dim);
    sort_pairs(dd, z, dim)
}

fn sort_pairs(d: Vec<f64>, z: Vec<f64>, dim: usize) -> SymEigen {
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let mut vectors = vec![0.0; dim * dim];
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..dim {
            vectors[i * dim + new_j] = z[i * dim + old_j];
        }
    }
    SymEigen { dim, values, vectors }
}

/// Householder reduction of a symmetric matrix to tridiagonal form; `a` is
/// replaced by the orthogonal transform (Q with QᵀAQ tridiagonal). Returns
/// the diagonal and the subdiagonal in shifted storage (`e[i]` couples
/// `i-1, i`; `e[0] = 0`).
fn householder_tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..i {
                    a[k * n + j] -= g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for j in 0..i {
            a[j * n + i] = 0.0;
            a[i * n + j] = 0.0;
        }
    }
    (d, e)
}

fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) {
    ql_implicit_shifted(d, e, z, n)
}

/// Implicit-shift QL on a tridiagonal matrix with accumulation of rotations
/// into `z` (columns become eigenvectors). `e` uses shifted storage.
fn ql_implicit_shifted(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 64, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, lambda: f64, v: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += a[r * n + c] * v[c];
            }
            worst = worst.max((acc - lambda * v[r]).abs());
        }
        worst
    }

    #[test]
    fn dense_eigen_on_random_symmetric() {
        let n = 24;
        let mut state = 42u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..=r {
                let v = next();
                a[r * n + c] = v;
                a[c * n + r] = v;
            }
        }
        let eig = sym_eigen_dense(a.clone(), n);
        for j in 0..n {
            let v = eig.eigenvector(j);
            assert!(residual(&a, n, eig.values[j], &v) < 1e-11);
        }
        // ascending and orthonormal
        for j in 1..n {
            assert!(eig.values[j] >= eig.values[j - 1]);
        }
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..n)
                    .map(|k| eig.vectors[k * n + i] * eig.vectors[k * n + j])
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn tridiagonal_laplacian_spectrum() {
        // Dirichlet 1-d Laplacian: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 50;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let eig = sym_tridiag_eigen(&d, &e, n);
        for (k, lam) in eig.values.iter().enumerate() {
            let expect = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((lam - expect).abs() < 1e-12, "k={k}: {lam} vs {expect}");
        }
    }

    #[test]
    fn handles_degenerate_eigenvalues() {
        // diag(1,1,1,5) plus a rotationally mixed block still yields an
        // orthonormal basis for the triple eigenvalue.
        let n = 4;
        let a = vec![
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 5.0,
        ];
        let eig = sym_eigen_dense(a.clone(), n);
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[2] - 1.0).abs() < 1e-14);
        assert!((eig.values[3] - 5.0).abs() < 1e-14);
        for j in 0..n {
            let v = eig.eigenvector(j);
            assert!(residual(&a, n, eig.values[j], &v) < 1e-13);
        }
    }
}
