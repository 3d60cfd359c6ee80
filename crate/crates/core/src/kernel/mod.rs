//! The one-sided stable subordination kernel `f_α(t, s)`.
//!
//! `f_α(t, ·)` is the probability density on `s ≥ 0` whose Laplace transform
//! is `exp(-t z^α)`. [`eval_kernel`] evaluates it from the real contour
//! integral obtained by deforming the inversion contour onto the two rays
//! `r e^{±iθ}`, or in the left tail onto rays leaving the saddle point;
//! [`integrate_kernel`] forms weighted integrals against it.

mod density;
mod integral;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

pub use density::{tail_constant, StableDensity};
pub use integral::{integrate_components, KernelIntegral, TailModel};

use crate::error::{Error, Result};
use crate::quad;

/// Times below this are treated as the identity evolution.
pub const POINT_MASS_T: f64 = 1e-12;

/// Exponent `α ∈ (0, 1]`; `α = 1` is the classical, non-fractional case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain(format!("alpha = {alpha} outside the valid range 0 < alpha <= 1")))
        }
    }

    pub fn half() -> Self {
        Self(0.5)
    }

    pub fn classical() -> Self {
        Self(1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// Rejects `α = 1` where genuine kernel machinery is required.
    pub fn require_fractional(self) -> Result<f64> {
        if self.is_classical() {
            Err(Error::Domain(
                "alpha = 1 has no kernel density (the evolution is the classical one); use 0 < alpha < 1".into(),
            ))
        } else {
            Ok(self.0)
        }
    }
}

/// Quadrature controls shared by kernel evaluation and subordination.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Ray angle of the contour integral, in `(π/2, π]`. `None` picks `π`
    /// while `cos απ ≥ 1/2` and otherwise the midpoint of
    /// `(π/2, min(π, π/(2α)))`, the range where both exponents of the ray
    /// integrand decay.
    pub theta: Option<f64>,
    /// Cap on quadrature panels (initial plus refinements) per integral.
    pub max_panels: usize,
    /// Envelope cut for truncating the ray integral, and the density level
    /// that fixes the default truncation point in truncated mode.
    pub tail_cut: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, theta: None, max_panels: 20_000, tail_cut: 1e-14 }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if let Some(th) = self.theta {
            if !(th > FRAC_PI_2 && th <= PI) {
                return Err(Error::Domain(format!("theta = {th} outside (pi/2, pi]")));
            }
        }
        if self.max_panels < 1 {
            return Err(Error::Domain("max_panels must be at least 1".into()));
        }
        if !(self.tail_cut > 0.0) {
            return Err(Error::Domain("tail_cut must be positive".into()));
        }
        Ok(())
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    /// Contour angle actually used for stable index `alpha`.
    pub fn effective_theta(&self, alpha: f64) -> f64 {
        self.theta.unwrap_or_else(|| default_theta(alpha))
    }
}

/// θ = π keeps the phase linear but loses the `t`-damping as `cos απ → 0`;
/// past that point the middle of the admissible range is better conditioned.
fn default_theta(alpha: f64) -> f64 {
    if (PI * alpha).cos() >= 0.5 {
        PI
    } else {
        0.5 * (FRAC_PI_2 + (FRAC_PI_2 / alpha).min(PI))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    if t < POINT_MASS_T {
        return Err(Error::PointMass(t));
    }
    Ok(())
}

/// Result of one contour evaluation, before clamping.
#[derive(Debug, Clone, Copy)]
pub struct RayEstimate {
    pub value: f64,
    pub err: f64,
    pub panels: usize,
}

/// Ray integral in the variable `u = r^α`:
///
/// `f = 1/(πα) ∫ u^{1/α-1} exp(s u^{1/α} cos θ - t u cos αθ)
///       · sin(s u^{1/α} sin θ - t u sin αθ + θ) du`.
fn ray_integral(alpha: f64, t: f64, s: f64, theta: f64, cfg: &KernelConfig) -> Result<RayEstimate> {
    let p = 1.0 / alpha;
    let (st, ct) = theta.sin_cos();
    let (sat, cat) = (alpha * theta).sin_cos();
    let pref_ln = -(PI * alpha).ln();

    let exponent = |u: f64| (p - 1.0) * u.ln() + s * ct * u.powf(p) - t * cat * u;
    let slope = |u: f64| (p - 1.0) / u + s * ct * p * u.powf(p - 1.0) - t * cat;
    let phase_rate = |u: f64| s * st * p * u.powf(p - 1.0) - t * sat;

    // Truncation: envelope / decay rate below the cut.
    let cut = (cfg.abs_tol * 1e-2).min(cfg.tail_cut.max(cfg.abs_tol * 1e-4));
    let mut u_end = 1e-3 * (1.0 / t).min(s.powf(-alpha).max(1e-300)).max(1e-300);
    let mut guard = 0;
    loop {
        let k = -slope(u_end);
        if k > 0.0 {
            let env = (exponent(u_end) + pref_ln).exp();
            if env / k < cut {
                break;
            }
        }
        u_end *= 1.5;
        guard += 1;
        if guard > 4000 || !u_end.is_finite() {
            return Err(Error::Quadrature {
                context: format!("ray integrand does not decay (theta = {theta})"),
                estimate: f64::INFINITY,
                target: cfg.abs_tol,
            });
        }
    }

    // Panels with phase change at most π; for θ = π they sit on the zeros.
    let mut breaks = vec![0.0];
    let mut u = 0.0;
    let h_cap = u_end / 16.0;
    while u < u_end {
        let mut h = h_cap;
        for _ in 0..200 {
            let m = phase_rate(u.max(1e-300)).abs().max(phase_rate(u + h).abs());
            if m * h <= PI {
                break;
            }
            h = (PI / m).min(0.5 * h);
        }
        u = (u + h).min(u_end);
        breaks.push(u);
        if breaks.len() > cfg.max_panels {
            return Err(Error::Quadrature {
                context: "ray integral needs more panels than max_panels".into(),
                estimate: f64::INFINITY,
                target: cfg.abs_tol,
            });
        }
    }

    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let up = u.powf(p);
        let e = (p - 1.0) * u.ln() + s * ct * up - t * cat * u + pref_ln;
        let ph = s * st * up - t * sat * u + theta;
        e.exp() * ph.sin()
    };
    let r =
        quad::integrate(integrand, &breaks, |v: &f64| (0.5 * cfg.abs_tol).max(cfg.rel_tol * v.abs()), cfg.max_panels);
    if !r.converged {
        return Err(Error::Quadrature {
            context: format!("kernel contour integral at t = {t}, s = {s}"),
            estimate: r.err,
            target: cfg.abs_tol.max(cfg.rel_tol * r.value.abs()),
        });
    }
    Ok(RayEstimate { value: r.value, err: r.err, panels: r.intervals })
}

/// Left-tail form: the two rays leave the real saddle point
/// `c = (tα/s)^{1/(1-α)}` of `φ(z) = sz - t z^α` at angle `5π/8`, so
///
/// `f = e^{φ(c)}/π · Im ∫₀^∞ exp(φ(c + r e^{iθ}) - φ(c)) e^{iθ} dr`
///
/// carries the small factor `e^{φ(c)}` outside the integral instead of
/// recovering it by cancellation.
fn saddle_integral(alpha: f64, t: f64, s: f64, cfg: &KernelConfig) -> Result<RayEstimate> {
    const THETA: f64 = 5.0 * PI / 8.0;
    let c = (t * alpha / s).powf(1.0 / (1.0 - alpha));
    let ca = t * c.powf(alpha);
    let phi_c = -ca * (1.0 - alpha);
    // φ(c + w) - φ(c), written relative to c.
    let phi = |w: Complex64| s * w - ca * (principal_power(1.0 + w / c, alpha) - 1.0);
    let dir = Complex64::from_polar(1.0, THETA);
    let curvature = t * alpha * (1.0 - alpha) * c.powf(alpha - 2.0);
    let r0 = curvature.sqrt().recip();

    let mut r_end = r0;
    while phi(r_end * dir).re > -45.0 {
        r_end *= 1.5;
        if !r_end.is_finite() {
            return Err(Error::Quadrature {
                context: "saddle contour does not decay".into(),
                estimate: f64::INFINITY,
                target: cfg.abs_tol,
            });
        }
    }
    let h = r0.min(PI / (2.0 * s));
    let n = ((r_end / h).ceil() as usize).clamp(1, cfg.max_panels / 2);
    let breaks: Vec<f64> = (0..=n).map(|i| r_end * i as f64 / n as f64).collect();

    let r = quad::integrate(
        |r: f64| (phi(r * dir).exp() * dir).im,
        &breaks,
        |v: &f64| (1e-3 * cfg.abs_tol).max(cfg.rel_tol * 1e-2 * v.abs()),
        cfg.max_panels,
    );
    if !r.converged {
        return Err(Error::Quadrature {
            context: format!("kernel saddle contour at t = {t}, s = {s}"),
            estimate: r.err,
            target: cfg.rel_tol * r.value.abs(),
        });
    }
    let scale = phi_c.exp() / PI;
    Ok(RayEstimate { value: scale * r.value, err: scale * r.err, panels: r.intervals })
}

/// Depth `-φ(c)` of the saddle below which the saddle contour replaces the
/// origin rays under the automatic angle.
const SADDLE_DEPTH: f64 = 2.0;

/// `e^{-depth}` times any algebraic prefactor is below the smallest double.
const UNDERFLOW_DEPTH: f64 = 800.0;

fn contour_estimate(alpha: f64, t: f64, s: f64, cfg: &KernelConfig) -> Result<RayEstimate> {
    if cfg.theta.is_none() {
        let c = (t * alpha / s).powf(1.0 / (1.0 - alpha));
        let depth = s * c * (1.0 - alpha) / alpha;
        if depth > UNDERFLOW_DEPTH {
            return Ok(RayEstimate { value: 0.0, err: 0.0, panels: 0 });
        }
        if depth > SADDLE_DEPTH {
            return saddle_integral(alpha, t, s, cfg);
        }
    }
    ray_integral(alpha, t, s, cfg.effective_theta(alpha), cfg)
}

/// `f_α(t, s)` from the inversion contour. With an explicit angle the two
/// rays `r e^{±iθ}` are used everywhere; with the automatic angle the left
/// tail is taken through the saddle point instead, which keeps the relative
/// accuracy where `f` is exponentially small.
///
/// Returns 0 at `s = 0`. Values in `[-abs_tol, 0)` are clamped to 0; more
/// negative results are reported as quadrature failures.
pub fn eval_kernel(order: FractionalOrder, t: f64, s: f64, cfg: &KernelConfig) -> Result<f64> {
    let alpha = order.require_fractional()?;
    cfg.validate()?;
    check_time(t)?;
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s = {s} must be nonnegative")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let est = contour_estimate(alpha, t, s, cfg)?;
    clamp_nonnegative(est.value, est.err, cfg)
}

/// Like [`eval_kernel`] but also returns the error estimate and panel count.
pub fn eval_kernel_detailed(order: FractionalOrder, t: f64, s: f64, cfg: &KernelConfig) -> Result<RayEstimate> {
    let alpha = order.require_fractional()?;
    cfg.validate()?;
    check_time(t)?;
    if s == 0.0 {
        return Ok(RayEstimate { value: 0.0, err: 0.0, panels: 0 });
    }
    let est = contour_estimate(alpha, t, s, cfg)?;
    let value = clamp_nonnegative(est.value, est.err, cfg)?;
    Ok(RayEstimate { value, ..est })
}

fn clamp_nonnegative(v: f64, err: f64, cfg: &KernelConfig) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -cfg.abs_tol {
        Ok(0.0)
    } else {
        Err(Error::Quadrature {
            context: format!("negative kernel value {v:.3e}"),
            estimate: err.max(-v),
            target: cfg.abs_tol,
        })
    }
}

/// Elementary form at `α = 1/2`: `t/(2√π) s^{-3/2} exp(-t²/(4s))`.
pub fn eval_kernel_closed_half(t: f64, s: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s = {s} must be positive")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(t / (2.0 * PI.sqrt()) * s.powf(-1.5) * (-t * t / (4.0 * s)).exp())
}

/// Density through the non-oscillatory representation; no contour angle.
pub fn eval_kernel_positive(order: FractionalOrder, t: f64, s: f64) -> Result<f64> {
    let alpha = order.require_fractional()?;
    check_time(t)?;
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("s = {s} must be nonnegative")));
    }
    Ok(integral::density_for(alpha).density(t, s))
}

/// `∫₀^∞ f_α(t, s) w(s) ds` for a scalar weight.
///
/// `tail` describes what is known about the weight beyond the quadrature
/// window; without a bound or structure the call fails with
/// [`Error::DivergenceRisk`].
pub fn integrate_kernel<W>(
    order: FractionalOrder,
    t: f64,
    weight: W,
    tail: &TailModel,
    cfg: &KernelConfig,
) -> Result<KernelIntegral<Complex64>>
where
    W: Fn(f64) -> Complex64 + Sync,
{
    let r = integrate_components(order, t, |s| vec![weight(s)], tail, cfg)?;
    Ok(r.map(|v| v[0]))
}

/// Principal branch `z^α` with `arg z ∈ (-π, π]`.
pub fn principal_power(z: Complex64, alpha: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    Complex64::from_polar(z.norm().powf(alpha), alpha * z.arg())
}

/// Both sides of `∫ f_α(t,s) e^{-zs} ds = exp(-t z^α)`.
#[derive(Debug, Clone, Copy)]
pub struct LaplacePair {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub err_estimate: f64,
}

pub fn laplace_check(order: FractionalOrder, t: f64, z: Complex64, cfg: &KernelConfig) -> Result<LaplacePair> {
    if z.re < 0.0 {
        return Err(Error::Domain(format!("Re z = {} must be nonnegative", z.re)));
    }
    let alpha = order.value();
    let rhs = (-t * principal_power(z, alpha)).exp();
    let r = integrate_kernel(order, t, |s| (-z * s).exp(), &TailModel::Exponentials { rates: vec![-z] }, cfg)?;
    Ok(LaplacePair { lhs: r.value, rhs, err_estimate: r.err_estimate })
}
