//! Small statistics helpers: ordinary least squares and composite Simpson
//! quadrature, shared by the measurement routines and the harness.

/// Least-squares line `y ≈ slope · x + intercept`.
#[derive(Clone, Copy, Debug)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate.
    pub slope_stderr: f64,
    pub points: usize,
}

impl FitLine {
    /// Half-width of the 95% confidence interval on the slope (normal
    /// approximation).
    pub fn slope_ci95(&self) -> f64 {
        1.96 * self.slope_stderr
    }
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> FitLine {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 2, "need at least two points for a line");
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - mx) * (b - my)).sum();
    assert!(sxx > 0.0, "degenerate abscissae");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let slope_stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    FitLine {
        slope,
        intercept,
        slope_stderr,
        points: n,
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_stddev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
}

/// Standard error of the mean.
pub fn stderr(xs: &[f64]) -> f64 {
    sample_stddev(xs) / (xs.len() as f64).sqrt()
}

/// Composite Simpson rule over uniformly spaced samples (odd count).
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    assert!(n >= 3 && n % 2 == 1, "composite Simpson needs an odd sample count >= 3");
    let mut acc = samples[0] + samples[n - 1];
    for (i, v) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}
