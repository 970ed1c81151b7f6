//! Local-in-time solvers for the cubic multiplicative Schrödinger and wave
//! equations driven by the renormalized operator, plus a contraction probe
//! for the local well-posedness radius/time formulas.
//!
//! The Schrödinger solver is Strang splitting: the nonlinear substep is an
//! exact pointwise phase rotation (mass-preserving by construction, evaluated
//! on a dealiased grid with the re-projection loss monitored), the linear
//! substep is the exact operator exponential, either through the eigenbasis
//! or through the matrix-free Chebyshev route — the same flow, cross-checked
//! in the tests. The wave solver is a one-step trigonometric integrator with
//! the cubic term frozen at the midpoint.

use num_complex::Complex64;

use crate::cheb::{
    cheb_apply_multi, cheb_fit, cos_sqrt, one_minus_cos_over, safe_bounds,
    schrodinger_phase_coeffs, sinc_sqrt, ChebCoeffs,
};
use crate::dispersive::schrodinger_prop;
use crate::error::{CoreError, Result};
use crate::fft::next_fast_size;
use crate::field::Field;
use crate::hamiltonian::{ApplyScratch, Hamiltonian};
use crate::spectrum::Spectrum;
use crate::stats::linear_fit;

/// Snapshot of an evolution; diagnostics are recomputed from the state,
/// never accumulated.
#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub u: Field,
    /// Velocity (wave trajectories only).
    pub v: Option<Field>,
    pub mass: f64,
    pub energy: f64,
    pub linf: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Disable to propagate the linear flow through the same code path.
    pub nonlinearity: bool,
    /// Focusing sign (exploration only; the production sign is defocusing).
    pub focusing: bool,
    /// Record every `record_stride` steps (first and last always recorded).
    pub record_stride: usize,
    /// Per-step relative `L²` loss allowed in the dealiasing re-projection.
    pub reprojection_limit: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            nonlinearity: true,
            focusing: false,
            record_stride: 100,
            reprojection_limit: 1e-6,
        }
    }
}

/// Linear-propagation route for the solvers.
pub enum LinearRoute<'a> {
    /// Exact diagonal flow on the computed span.
    Eigen(&'a Spectrum),
    /// Matrix-free Chebyshev evaluation of the same exponential.
    Chebyshev(&'a Hamiltonian),
}

impl LinearRoute<'_> {
    /// `½⟨u, Hu⟩` for the operator the route propagates (shift included).
    fn quadratic_energy(&self, u: &Field, scratch: &mut ApplyScratch) -> Result<f64> {
        match self {
            LinearRoute::Eigen(s) => {
                let hu = s.spectral_map(u, |l| Complex64::new(l, 0.0))?;
                Ok(0.5 * u.inner(&hu).re)
            }
            LinearRoute::Chebyshev(h) => {
                let hu = h.apply_with(u, scratch);
                Ok(0.5 * u.inner(&hu).re)
            }
        }
    }

    fn shift(&self) -> f64 {
        match self {
            LinearRoute::Eigen(s) => s.shift,
            LinearRoute::Chebyshev(h) => h.shift(),
        }
    }
}

/// Energy of the cubic Schrödinger flow, split into its pieces. `total`
/// reports the unshifted energy `½⟨u,(H-shift)u⟩ + ¼‖u‖⁴_{L⁴}`; the shift
/// term is recorded separately.
#[derive(Clone, Copy, Debug)]
pub struct NlsEnergy {
    pub total: f64,
    pub quadratic: f64,
    pub quartic: f64,
    pub shift_contribution: f64,
}

pub fn nls_energy(spec: &Spectrum, u: &Field) -> Result<NlsEnergy> {
    nls_energy_route(&LinearRoute::Eigen(spec), u, &mut ApplyScratch::new())
}

fn nls_energy_route(route: &LinearRoute, u: &Field, scratch: &mut ApplyScratch) -> Result<NlsEnergy> {
    let raw_quadratic = route.quadratic_energy(u, scratch)?;
    let shift_contribution = 0.5 * route.shift() * u.l2_norm().powi(2);
    let quadratic = raw_quadratic - shift_contribution;
    let quartic = 0.25 * u.lq_norm(4.0)?.powi(2).powi(2);
    Ok(NlsEnergy {
        total: quadratic + quartic,
        quadratic,
        quartic,
        shift_contribution,
    })
}

/// Exact nonlinear substep `u ← u·e^{i·sign·τ·|u|²}` in point values on the
/// dealiased (2N) grid; returns the relative `L²` loss of the re-projection.
fn phase_step(u: &Field, tau: f64, sign: f64) -> Result<(Field, f64)> {
    let g = u.grid();
    let m = next_fast_size(2 * g.size());
    let mut pv = u.point_values_on(m);
    for v in &mut pv {
        let phase = sign * tau * v.norm_sqr();
        *v *= Complex64::from_polar(1.0, phase);
    }
    let out = Field::from_point_values_padded(g, m, &mut pv);
    let before = u.l2_norm().powi(2);
    let after = out.l2_norm().powi(2);
    let loss = if before > 0.0 { ((before - after) / before).max(0.0) } else { 0.0 };
    Ok((out, loss))
}

struct LinearStepper<'a> {
    route: &'a LinearRoute<'a>,
    coeffs: Option<ChebCoeffs>,
    dt: f64,
    scratch: ApplyScratch,
}

impl<'a> LinearStepper<'a> {
    fn new(route: &'a LinearRoute<'a>, dt: f64) -> Self {
        let coeffs = match route {
            LinearRoute::Eigen(_) => None,
            LinearRoute::Chebyshev(h) => {
                let (a, b) = safe_bounds(h);
                Some(schrodinger_phase_coeffs(dt, a, b, crate::dispersive::CHEB_PROP_TOL))
            }
        };
        LinearStepper {
            route,
            coeffs,
            dt,
            scratch: ApplyScratch::new(),
        }
    }

    fn advance(&mut self, u: &Field) -> Result<Field> {
        match self.route {
            LinearRoute::Eigen(spec) => schrodinger_prop(spec, u, self.dt),
            LinearRoute::Chebyshev(h) => Ok(crate::cheb::cheb_apply(
                h,
                self.coeffs.as_ref().expect("built in new"),
                u,
                &mut self.scratch,
            )),
        }
    }
}

fn check_finite(u: &Field, t: f64) -> Result<()> {
    if !u.is_finite() || u.l2_norm() > 1e12 {
        return Err(CoreError::Diverged { t });
    }
    Ok(())
}

/// Strang split-step integrator for `i∂_t u + Hu = -|u|²u` (defocusing; the
/// spatially constant zero-noise solution is `u₀·e^{i|u₀|²t}`).
pub fn nls_solve(
    route: &LinearRoute,
    u0: &Field,
    t_final: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<Vec<EvolutionState>> {
    if dt <= 0.0 || t_final < dt {
        return Err(CoreError::InvalidParameter(format!(
            "need 0 < dt <= t_final (dt = {dt}, t_final = {t_final})"
        )));
    }
    let steps = (t_final / dt).round() as usize;
    if ((steps as f64) * dt - t_final).abs() > 1e-9 * t_final {
        return Err(CoreError::InvalidParameter(format!(
            "t_final = {t_final} is not an integer multiple of dt = {dt}"
        )));
    }
    let sign = if opts.focusing { -1.0 } else { 1.0 };
    let mut stepper = LinearStepper::new(route, dt);
    let mut scratch = ApplyScratch::new();
    let mut u = u0.clone();
    let mut out = Vec::new();
    let record = |out: &mut Vec<EvolutionState>,
                  u: &Field,
                  t: f64,
                  scratch: &mut ApplyScratch|
     -> Result<()> {
        let energy = nls_energy_route(route, u, scratch)?;
        out.push(EvolutionState {
            t,
            u: u.clone(),
            v: None,
            mass: u.l2_norm().powi(2),
            energy: energy.total,
            linf: u.linf_norm(),
        });
        Ok(())
    };
    record(&mut out, &u, 0.0, &mut scratch)?;
    for step in 1..=steps {
        if opts.nonlinearity {
            let (next, loss) = phase_step(&u, 0.5 * dt, sign)?;
            if loss > opts.reprojection_limit {
                return Err(CoreError::ReprojectionLoss {
                    loss,
                    limit: opts.reprojection_limit,
                });
            }
            u = next;
        }
        u = stepper.advance(&u)?;
        if opts.nonlinearity {
            let (next, loss) = phase_step(&u, 0.5 * dt, sign)?;
            if loss > opts.reprojection_limit {
                return Err(CoreError::ReprojectionLoss {
                    loss,
                    limit: opts.reprojection_limit,
                });
            }
            u = next;
        }
        let t = step as f64 * dt;
        check_finite(&u, t)?;
        if step % opts.record_stride == 0 || step == steps {
            record(&mut out, &u, t, &mut scratch)?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// wave solver
// ---------------------------------------------------------------------------

/// `-√λ·sin(τ√λ)` (the velocity response to displacement data).
fn neg_d(tau: f64, l: f64) -> f64 {
    -l * sinc_sqrt(tau, l)
}

enum WaveKernels<'a> {
    Eigen(&'a Spectrum),
    Cheb {
        h: &'a Hamiltonian,
        cos_full: ChebCoeffs,
        sinc_full: ChebCoeffs,
        negd_full: ChebCoeffs,
        w_full: ChebCoeffs,
        cos_half: ChebCoeffs,
        sinc_half: ChebCoeffs,
        scratch: ApplyScratch,
    },
}

impl<'a> WaveKernels<'a> {
    fn new(route: &'a LinearRoute<'a>, dt: f64) -> Result<Self> {
        match route {
            LinearRoute::Eigen(spec) => {
                if spec.eigenvalues[0] < 0.0 {
                    return Err(CoreError::InvalidParameter(format!(
                        "wave stepping needs a nonnegative spectrum (λ₀ = {}); apply a shift",
                        spec.eigenvalues[0]
                    )));
                }
                Ok(WaveKernels::Eigen(spec))
            }
            LinearRoute::Chebyshev(h) => {
                let (a, b) = safe_bounds(h);
                let tol = crate::dispersive::CHEB_PROP_TOL;
                let fit_real = |f: &dyn Fn(f64) -> f64| -> Result<ChebCoeffs> {
                    cheb_fit(|l| Complex64::new(f(l), 0.0), a, b, tol, 1 << 14)
                };
                Ok(WaveKernels::Cheb {
                    h,
                    cos_full: fit_real(&|l| cos_sqrt(dt, l))?,
                    sinc_full: fit_real(&|l| sinc_sqrt(dt, l))?,
                    negd_full: fit_real(&|l| neg_d(dt, l))?,
                    w_full: fit_real(&|l| one_minus_cos_over(dt, l))?,
                    cos_half: fit_real(&|l| cos_sqrt(0.5 * dt, l))?,
                    sinc_half: fit_real(&|l| sinc_sqrt(0.5 * dt, l))?,
                    scratch: ApplyScratch::new(),
                })
            }
        }
    }

    /// One trigonometric step with constant forcing `g`:
    /// `u' = C u + S v + W g`, `v' = -D u + C v + S g`, plus the midpoint
    /// state `C_½ u + S_½ v` used to freeze the force.
    fn midpoint(&mut self, u: &Field, v: &Field, dt: f64) -> Result<Field> {
        match self {
            WaveKernels::Eigen(spec) => {
                let cu = spec.spectral_map(u, |l| Complex64::new(cos_sqrt(0.5 * dt, l), 0.0))?;
                let sv = spec.spectral_map(v, |l| Complex64::new(sinc_sqrt(0.5 * dt, l), 0.0))?;
                cu.add(&sv)
            }
            WaveKernels::Cheb {
                h,
                cos_half,
                sinc_half,
                scratch,
                ..
            } => {
                let cu = cheb_apply_multi(h, &[cos_half], u, scratch).pop().unwrap();
                let sv = cheb_apply_multi(h, &[sinc_half], v, scratch).pop().unwrap();
                cu.add(&sv)
            }
        }
    }

    fn step(&mut self, u: &Field, v: &Field, g: &Field, dt: f64) -> Result<(Field, Field)> {
        match self {
            WaveKernels::Eigen(spec) => {
                let cu = spec.spectral_map(u, |l| Complex64::new(cos_sqrt(dt, l), 0.0))?;
                let sv = spec.spectral_map(v, |l| Complex64::new(sinc_sqrt(dt, l), 0.0))?;
                let wg = spec.spectral_map(g, |l| Complex64::new(one_minus_cos_over(dt, l), 0.0))?;
                let du = spec.spectral_map(u, |l| Complex64::new(neg_d(dt, l), 0.0))?;
                let cv = spec.spectral_map(v, |l| Complex64::new(cos_sqrt(dt, l), 0.0))?;
                let sg = spec.spectral_map(g, |l| Complex64::new(sinc_sqrt(dt, l), 0.0))?;
                let mut unew = cu;
                unew.axpy(Complex64::new(1.0, 0.0), &sv);
                unew.axpy(Complex64::new(1.0, 0.0), &wg);
                let mut vnew = du;
                vnew.axpy(Complex64::new(1.0, 0.0), &cv);
                vnew.axpy(Complex64::new(1.0, 0.0), &sg);
                Ok((unew, vnew))
            }
            WaveKernels::Cheb {
                h,
                cos_full,
                sinc_full,
                negd_full,
                w_full,
                scratch,
                ..
            } => {
                let mut from_u = cheb_apply_multi(h, &[cos_full, negd_full], u, scratch);
                let du = from_u.pop().unwrap();
                let cu = from_u.pop().unwrap();
                let mut from_v = cheb_apply_multi(h, &[sinc_full, cos_full], v, scratch);
                let cv = from_v.pop().unwrap();
                let sv = from_v.pop().unwrap();
                let mut from_g = cheb_apply_multi(h, &[w_full, sinc_full], g, scratch);
                let sg = from_g.pop().unwrap();
                let wg = from_g.pop().unwrap();
                let mut unew = cu;
                unew.axpy(Complex64::new(1.0, 0.0), &sv);
                unew.axpy(Complex64::new(1.0, 0.0), &wg);
                let mut vnew = du;
                vnew.axpy(Complex64::new(1.0, 0.0), &cv);
                vnew.axpy(Complex64::new(1.0, 0.0), &sg);
                Ok((unew, vnew))
            }
        }
    }
}

/// Dealiased real cube `u³` (point values on the 2N grid, truncated back).
fn real_cube(u: &Field) -> Result<Field> {
    let g = u.grid();
    let m = next_fast_size(2 * g.size());
    let mut pv = u.point_values_on(m);
    for v in &mut pv {
        let r = v.re;
        *v = Complex64::new(r * r * r, 0.0);
    }
    let mut out = Field::from_point_values_padded(g, m, &mut pv);
    out.symmetrize_real();
    Ok(out)
}

/// Full wave energy `½‖v‖² + ½⟨u,Hu⟩ + ¼∫u⁴` (shifted operator).
fn wave_energy_route(
    route: &LinearRoute,
    u: &Field,
    v: &Field,
    quartic_on: bool,
    scratch: &mut ApplyScratch,
) -> Result<f64> {
    let quad = route.quadratic_energy(u, scratch)?;
    let quart = if quartic_on {
        0.25 * u.lq_norm(4.0)?.powi(2).powi(2)
    } else {
        0.0
    };
    Ok(0.5 * v.l2_norm().powi(2) + quad + quart)
}

/// One-step trigonometric (Gautschi-type) integrator for
/// `∂²_t u + Hu = -u³` with the cubic frozen at the linearly propagated
/// midpoint. Real data; requires a nonnegative operator.
pub fn wave_solve(
    route: &LinearRoute,
    u0: &Field,
    u1: &Field,
    t_final: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<Vec<EvolutionState>> {
    if dt <= 0.0 || t_final < dt {
        return Err(CoreError::InvalidParameter(format!(
            "need 0 < dt <= t_final (dt = {dt}, t_final = {t_final})"
        )));
    }
    if !u0.is_real() || !u1.is_real() {
        return Err(CoreError::InvalidParameter("wave data must be real".into()));
    }
    let steps = (t_final / dt).round() as usize;
    if ((steps as f64) * dt - t_final).abs() > 1e-9 * t_final {
        return Err(CoreError::InvalidParameter(format!(
            "t_final = {t_final} is not an integer multiple of dt = {dt}"
        )));
    }
    let sign = if opts.focusing { 1.0 } else { -1.0 };
    let mut kernels = WaveKernels::new(route, dt)?;
    let mut scratch = ApplyScratch::new();
    let mut u = u0.clone();
    let mut v = u1.clone();
    let mut out = Vec::new();
    let record = |out: &mut Vec<EvolutionState>,
                  u: &Field,
                  v: &Field,
                  t: f64,
                  scratch: &mut ApplyScratch|
     -> Result<()> {
        let energy = wave_energy_route(route, u, v, opts.nonlinearity, scratch)?;
        out.push(EvolutionState {
            t,
            u: u.clone(),
            v: Some(v.clone()),
            mass: u.l2_norm().powi(2),
            energy,
            linf: u.linf_norm(),
        });
        Ok(())
    };
    record(&mut out, &u, &v, 0.0, &mut scratch)?;
    let zero = Field::zero(u0.grid());
    for step in 1..=steps {
        let g = if opts.nonlinearity {
            let mid = kernels.midpoint(&u, &v, dt)?;
            real_cube(&mid)?.scaled(sign)
        } else {
            zero.clone()
        };
        let (unew, vnew) = kernels.step(&u, &v, &g, dt)?;
        u = unew;
        v = vnew;
        let t = step as f64 * dt;
        check_finite(&u, t)?;
        if step % opts.record_stride == 0 || step == steps {
            record(&mut out, &u, &v, t, &mut scratch)?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// local well-posedness contraction probe
// ---------------------------------------------------------------------------

/// Result of the contraction probe: the empirically measured Duhamel
/// constant, the induced ball radius and existence time, and the observed
/// Picard contraction factor at that time.
#[derive(Clone, Copy, Debug)]
pub struct LwpProbe {
    pub c_tilde: f64,
    pub radius: f64,
    pub t_formula: f64,
    pub contraction: f64,
}

/// `|u|²u` for complex data, dealiased.
fn cubic_modulus(u: &Field) -> Result<Field> {
    let g = u.grid();
    let m = next_fast_size(2 * g.size());
    let mut pv = u.point_values_on(m);
    for v in &mut pv {
        *v *= v.norm_sqr();
    }
    Ok(Field::from_point_values_padded(g, m, &mut pv))
}

/// Duhamel map `Ψ(v)(t_k) = e^{it_k H}u₀ - i∫₀^{t_k} e^{i(t_k-s)H}(|v|²v)(s) ds`
/// evaluated on the trajectory's node grid by trapezoid prefix sums.
fn picard_iterate(
    spec: &Spectrum,
    u0: &Field,
    traj: &[Field],
    times: &[f64],
) -> Result<Vec<Field>> {
    let n = times.len();
    let cubics: Vec<Field> = traj.iter().map(cubic_modulus).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let tk = times[k];
        let mut acc = schrodinger_prop(spec, u0, tk)?;
        if k > 0 {
            let mut integral = Field::zero(u0.grid());
            for j in 0..=k {
                let w = if j == 0 || j == k { 0.5 } else { 1.0 };
                let h = times[1] - times[0];
                let transported = schrodinger_prop(spec, &cubics[j], tk - times[j])?;
                integral.axpy(Complex64::new(w * h, 0.0), &transported);
            }
            acc.axpy(Complex64::new(0.0, -1.0), &integral);
        }
        out.push(acc);
    }
    Ok(out)
}

fn trajectory_norm(traj: &[Field], sigma: f64) -> f64 {
    traj.iter().map(|u| u.sobolev_norm(sigma)).fold(0.0, f64::max)
}

fn trajectory_diff_norm(a: &[Field], b: &[Field], sigma: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max(x.sub(y)?.sobolev_norm(sigma));
    }
    Ok(worst)
}

/// Measure the Duhamel constant on a deterministic ensemble of smooth data,
/// derive `(R, T)` from it, and run two Picard iterations from `u₀` checking
/// ball stability and contraction in the `C([0,T], H^σ)` proxy norm.
pub fn lwp_contraction_probe(
    spec: &Spectrum,
    u0: &Field,
    sigma: f64,
    p: f64,
) -> Result<LwpProbe> {
    if !(sigma > 0.5) {
        return Err(CoreError::InvalidParameter(format!(
            "contraction probe needs σ > 1/2, got {sigma}"
        )));
    }
    if !(p > 2.0) {
        return Err(CoreError::InvalidParameter(format!(
            "contraction probe needs p > 2, got {p}"
        )));
    }
    let c_tilde = measure_duhamel_constant(spec, sigma, p)?;
    let radius = 2.0 * c_tilde * u0.sobolev_norm(sigma);
    let t_formula = if radius > 0.0 {
        (1.0 / (3.0 * radius * radius * c_tilde)).powf(p / (p - 2.0)).min(1.0)
    } else {
        1.0
    };
    let contraction = if radius > 0.0 {
        picard_contraction(spec, u0, sigma, t_formula, radius)?
    } else {
        0.0
    };
    if contraction >= 1.0 {
        return Err(CoreError::NonContraction {
            factor: contraction,
            iterations: 2,
        });
    }
    Ok(LwpProbe {
        c_tilde,
        radius,
        t_formula,
        contraction,
    })
}

fn measure_duhamel_constant(spec: &Spectrum, sigma: f64, p: f64) -> Result<f64> {
    use crate::random::{random_smooth_field, seeded_rng};
    let mut rng = seeded_rng(0x4C57_5000);
    let t0 = 1.0;
    let nodes = 17;
    let times: Vec<f64> = (0..nodes).map(|k| t0 * k as f64 / (nodes - 1) as f64).collect();
    let mut c = 1.0f64;
    for _ in 0..5 {
        let mut w = random_smooth_field(spec.grid, 2.0, &mut rng);
        let norm = w.sobolev_norm(sigma);
        if norm == 0.0 {
            continue;
        }
        w.scale(1.0 / norm);
        // linear bound sup_t ‖e^{itH}w‖_{H^σ} / ‖w‖_{H^σ}
        let mut traj = Vec::with_capacity(times.len());
        for &t in &times {
            traj.push(schrodinger_prop(spec, &w, t)?);
        }
        c = c.max(trajectory_norm(&traj, sigma));
        // cubic Duhamel bound against T^{(p-2)/p}·(sup‖·‖)³
        let zero = Field::zero(spec.grid);
        let psi = picard_iterate(spec, &zero, &traj, &times)?;
        let cubic_part = trajectory_norm(&psi, sigma);
        let denom = t0.powf((p - 2.0) / p) * trajectory_norm(&traj, sigma).powi(3);
        if denom > 0.0 {
            c = c.max(cubic_part / denom);
        }
    }
    Ok(c)
}

/// Contraction factor of two Picard iterations from `u₀` on `[0, T]`,
/// additionally checking that the iterates stay in the ball of radius `R`.
pub fn picard_contraction(
    spec: &Spectrum,
    u0: &Field,
    sigma: f64,
    t_final: f64,
    radius: f64,
) -> Result<f64> {
    let nodes = 17;
    let times: Vec<f64> = (0..nodes)
        .map(|k| t_final * k as f64 / (nodes - 1) as f64)
        .collect();
    let mut v0 = Vec::with_capacity(nodes);
    for &t in &times {
        v0.push(schrodinger_prop(spec, u0, t)?);
    }
    let v1 = picard_iterate(spec, u0, &v0, &times)?;
    let v2 = picard_iterate(spec, u0, &v1, &times)?;
    for traj in [&v0, &v1, &v2] {
        let sup = trajectory_norm(traj, sigma);
        if radius > 0.0 && sup > 2.0 * radius {
            return Err(CoreError::NonContraction {
                factor: sup / radius,
                iterations: 2,
            });
        }
    }
    let d1 = trajectory_diff_norm(&v1, &v0, sigma)?;
    let d2 = trajectory_diff_norm(&v2, &v1, sigma)?;
    Ok(if d1 > 0.0 { d2 / d1 } else { 0.0 })
}

/// Largest time `T = 2^{-k/4} ≤ 1` (quarter-octave grid) at which the
/// Picard contraction factor stays below `threshold`.
pub fn lwp_observed_time(
    spec: &Spectrum,
    u0: &Field,
    sigma: f64,
    threshold: f64,
) -> Result<f64> {
    for k in 0..96 {
        let t = (2.0f64).powf(-(k as f64) / 4.0);
        match picard_contraction(spec, u0, sigma, t, f64::INFINITY) {
            Ok(kappa) if kappa < threshold => return Ok(t),
            Ok(_) | Err(CoreError::NonContraction { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(CoreError::NonConvergence(
        "no time above 2^{-24} yields the requested contraction".into(),
    ))
}

/// Fit of `log T*` against `log(‖u₀‖²)`: the existence-time scaling
/// exponent (reported as the magnitude of the slope).
pub fn lwp_time_scaling(
    spec: &Spectrum,
    base: &Field,
    amplitudes: &[f64],
    sigma: f64,
    threshold: f64,
) -> Result<crate::stats::FitLine> {
    if amplitudes.len() < 3 {
        return Err(CoreError::InsufficientData(
            "time-scaling fit needs at least 3 amplitudes".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &amp in amplitudes {
        let u0 = base.scaled(amp);
        let t_star = lwp_observed_time(spec, &u0, sigma, threshold)?;
        xs.push((u0.sobolev_norm(sigma).powi(2)).ln());
        ys.push(t_star.ln());
    }
    Ok(linear_fit(&xs, &ys))
}
