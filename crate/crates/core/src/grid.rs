use crate::error::{CoreError, Result};

/// Square Fourier grid for the torus `[0,2π)²`.
///
/// The grid carries the integer frequencies `{-N/2, …, N/2-1}` per axis in
/// FFT bin order: frequency `n` lives in bin `n mod N`. The two lines with a
/// `-N/2` component have no conjugate partner on the lattice, so they are
/// kept identically zero on every field ("active" modes are the symmetric
/// band `|nᵢ| ≤ N/2 - 1`). This makes conjugate symmetry of real fields an
/// exact involution and keeps every operator Hermitian on the represented
/// space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(CoreError::InvalidParameter(format!(
                "grid size must be even and at least 4, got {n}"
            )));
        }
        Ok(Grid { n })
    }

    /// Modes per axis.
    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    /// Total number of stored bins (`N²`).
    #[inline]
    pub fn bins(&self) -> usize {
        self.n * self.n
    }

    /// Number of modes that can carry data (`(N-1)²`): the `-N/2` lines are
    /// structurally zero.
    #[inline]
    pub fn active_bins(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    /// Frequency represented by a one-dimensional bin index.
    #[inline]
    pub fn freq(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Bin index of a one-dimensional frequency.
    #[inline]
    pub fn bin(&self, f: i64) -> usize {
        f.rem_euclid(self.n as i64) as usize
    }

    /// Linear index of the mode `(fx, fy)`.
    #[inline]
    pub fn index(&self, fx: i64, fy: i64) -> usize {
        self.bin(fy) * self.n + self.bin(fx)
    }

    /// Frequency pair of a linear index.
    #[inline]
    pub fn freq_pair(&self, idx: usize) -> (i64, i64) {
        (self.freq(idx % self.n), self.freq(idx / self.n))
    }

    /// `|n|²` of a linear index.
    #[inline]
    pub fn freq_sq(&self, idx: usize) -> i64 {
        let (fx, fy) = self.freq_pair(idx);
        fx * fx + fy * fy
    }

    /// Whether the mode at `idx` is representable together with its conjugate
    /// partner (no `-N/2` component).
    #[inline]
    pub fn is_active(&self, idx: usize) -> bool {
        let ny = -(self.n as i64) / 2;
        let (fx, fy) = self.freq_pair(idx);
        fx != ny && fy != ny
    }

    /// Largest per-axis frequency magnitude of an active mode (`N/2 - 1`).
    #[inline]
    pub fn max_active_freq(&self) -> i64 {
        self.n as i64 / 2 - 1
    }

    /// Largest `|n|²` of an active mode.
    #[inline]
    pub fn max_freq_sq(&self) -> i64 {
        let m = self.max_active_freq();
        2 * m * m
    }

    /// Volume of the torus, `(2π)²`.
    pub fn volume() -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        two_pi * two_pi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(0).is_err());
        assert!(Grid::new(2).is_err());
        assert!(Grid::new(7).is_err());
        assert!(Grid::new(8).is_ok());
    }

    #[test]
    fn freq_bin_roundtrip() {
        let g = Grid::new(8).unwrap();
        for f in -4i64..4 {
            assert_eq!(g.freq(g.bin(f)), f);
        }
        assert_eq!(g.freq(0), 0);
        assert_eq!(g.freq(4), -4);
        assert_eq!(g.freq(7), -1);
    }

    #[test]
    fn nyquist_lines_are_inactive() {
        let g = Grid::new(8).unwrap();
        let mut active = 0;
        for idx in 0..g.bins() {
            if g.is_active(idx) {
                active += 1;
                let (fx, fy) = g.freq_pair(idx);
                assert!(fx > -4 && fy > -4);
            }
        }
        assert_eq!(active, g.active_bins());
        assert_eq!(active, 49);
    }
}
