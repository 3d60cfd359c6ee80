//! Weighted integrals `∫₀^∞ f_α(t, s) w(s) ds` with vector-valued weights.
//!
//! The half-line is split at a point `S`:
//!
//! * `[s_lo, S]` is integrated by adaptive Gauss-Kronrod against the real
//!   kernel, with the weight treated as a black box;
//! * `[S, ∞)` is handled according to the [`TailModel`]. For weights that
//!   are finite sums `Σ C_j e^{λ_j s}`, the coefficients are fitted from
//!   samples and each `∫_S^∞ f e^{λ(s-S)} ds` is taken along the ray from `S`
//!   on which `e^{λ(s-S)}` decays without oscillating, using the analytic
//!   continuation of the kernel.
//!
//! The heavy `s^{-1-α}` tail of the kernel makes plain truncation useless
//! for oscillating weights, which is why the structured models exist.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::density::{tail_constant, StableDensity};
use super::{FractionalOrder, KernelConfig, POINT_MASS_T};
use crate::error::{Error, Result};
use crate::quad::{self, QuadValue};

/// What is known about a weight beyond the quadrature window.
#[derive(Debug, Clone, PartialEq)]
pub enum TailModel {
    /// `sup |w| ≤ bound`, no further structure. The window is extended until
    /// `bound · P(S_t > S)` is below tolerance.
    Bounded { bound: f64 },
    /// `w(s) = Σ_j C_j e^{λ_j s}` with the listed rates, `Re λ_j ≤ 0`.
    Exponentials { rates: Vec<Complex64> },
    /// `w` is continuous and periodic with this period.
    Periodic { period: f64 },
    /// Integrate over `[0, s_max]` only. `None` picks the point where the
    /// tail density bound `c_α t s^{-1-α}` drops below `tail_cut`.
    Truncated { s_max: Option<f64> },
    /// Nothing known; rejected with [`Error::DivergenceRisk`].
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelIntegral<V> {
    pub value: V,
    pub err_estimate: f64,
    /// End of the explicitly integrated window in truncated and bounded modes.
    pub truncation_point: Option<f64>,
    /// Truncated mode: stable-tail density bound at the truncation point.
    /// Bounded mode: bound on the neglected tail contribution.
    pub tail_bound: Option<f64>,
    /// Set when `t` was below the point-mass threshold.
    pub point_mass: bool,
}

impl<V> KernelIntegral<V> {
    pub fn map<U>(self, f: impl FnOnce(V) -> U) -> KernelIntegral<U> {
        KernelIntegral {
            value: f(self.value),
            err_estimate: self.err_estimate,
            truncation_point: self.truncation_point,
            tail_bound: self.tail_bound,
            point_mass: self.point_mass,
        }
    }
}

pub(crate) fn density_for(alpha: f64) -> Arc<StableDensity> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<StableDensity>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = alpha.to_bits();
    if let Some(d) = cache.lock().expect("density cache poisoned").get(&key) {
        return Arc::clone(d);
    }
    let d = Arc::new(StableDensity::new(alpha));
    cache.lock().expect("density cache poisoned").entry(key).or_insert_with(|| Arc::clone(&d)).clone()
}

type Vector = Vec<Complex64>;

struct Setup<'a, F> {
    dens: &'a StableDensity,
    t: f64,
    sigma: f64,
    weight: &'a F,
    dim: usize,
    cfg: &'a KernelConfig,
}

impl<F: Fn(f64) -> Vector> Setup<'_, F> {
    fn integrand(&self, s: f64) -> Vector {
        let f = self.dens.standard(s / self.sigma) / self.sigma;
        if f == 0.0 {
            return vec![Complex64::new(0.0, 0.0); self.dim];
        }
        let mut w = (self.weight)(s);
        for z in w.iter_mut() {
            *z *= f;
        }
        w
    }

    fn body_breaks(&self, s_lo: f64, s_end: f64, width_cap: Option<f64>, align: Option<f64>) -> Result<Vec<f64>> {
        let mut breaks = vec![s_lo];
        let mut a = s_lo;
        let geo_end = align.map_or(s_end, |h| h.min(s_end));
        while a < geo_end {
            a = (a * 2.0).min(geo_end);
            breaks.push(a);
        }
        if let Some(h) = align {
            let mut k = (a / h).floor() + 1.0;
            while k * h < s_end {
                breaks.push(k * h);
                k += 1.0;
                if breaks.len() > self.cfg.max_panels {
                    break;
                }
            }
            if *breaks.last().unwrap() < s_end {
                breaks.push(s_end);
            }
        }
        if let Some(c) = width_cap {
            let mut refined = vec![breaks[0]];
            for w in breaks.windows(2) {
                let n = ((w[1] - w[0]) / c).ceil().max(1.0) as usize;
                for i in 1..=n {
                    refined.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
                }
                if refined.len() > self.cfg.max_panels {
                    break;
                }
            }
            breaks = refined;
        }
        if breaks.len() > self.cfg.max_panels {
            return Err(Error::Quadrature {
                context: format!("quadrature window [{s_lo:.3e}, {s_end:.3e}] needs more than max_panels panels"),
                estimate: f64::INFINITY,
                target: self.cfg.abs_tol,
            });
        }
        Ok(breaks)
    }

    fn body<T: Fn(&Vector) -> f64>(&self, breaks: &[f64], target: T) -> Result<quad::Integral<Vector>> {
        if breaks.len() < 2 || breaks[breaks.len() - 1] <= breaks[0] {
            return Ok(quad::Integral {
                value: vec![Complex64::new(0.0, 0.0); self.dim],
                err: 0.0,
                l1: 0.0,
                intervals: 0,
                converged: true,
            });
        }
        let r = quad::integrate(|s| self.integrand(s), breaks, &target, self.cfg.max_panels);
        if !r.converged {
            return Err(Error::Quadrature {
                context: format!(
                    "kernel-weighted integral over [{:.3e}, {:.3e}] at t = {}",
                    breaks[0],
                    breaks[breaks.len() - 1],
                    self.t
                ),
                estimate: r.err,
                target: target(&r.value),
            });
        }
        Ok(r)
    }

    /// `∫_S^∞ f_α(t, s) e^{λ (s - S)} ds`.
    fn exponential_tail(&self, s_start: f64, lambda: Complex64, abs_target: f64) -> Result<(Complex64, f64)> {
        if lambda.norm() == 0.0 {
            return Ok((Complex64::new(self.dens.survival(s_start / self.sigma), 0.0), 1e-15));
        }
        let mag = lambda.norm();
        let dir = -lambda.conj() / mag;
        let ell = (1.0 / mag).min(s_start);
        let integrand = |tau: f64| {
            let one_minus = 1.0 - tau;
            let rho = ell * tau / one_minus;
            let jac = ell / (one_minus * one_minus);
            let decay = (-mag * rho).exp();
            if decay == 0.0 || !jac.is_finite() {
                return Complex64::new(0.0, 0.0);
            }
            let s = Complex64::new(s_start, 0.0) + dir * rho;
            let f = self.dens.series_complex(s / self.sigma) / self.sigma;
            dir * f * (decay * jac)
        };
        let breaks = [0.0, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99, 0.999, 0.9999, 1.0];
        let r =
            quad::integrate(integrand, &breaks, |v: &Complex64| abs_target.max(1e-13 * v.norm()), self.cfg.max_panels);
        if !r.converged {
            return Err(Error::Quadrature {
                context: format!("tail integral along the steepest-descent ray for rate {lambda}"),
                estimate: r.err,
                target: abs_target,
            });
        }
        Ok((r.value, r.err))
    }

    /// Least-squares coefficients of `w(s) = Σ_j C_j e^{λ_j (s - S)}` from
    /// samples `S + m h`. Returns the coefficient rows and the max residual.
    fn fit(
        &self,
        s_start: f64,
        rates: &[Complex64],
        h: f64,
        samples: usize,
        check: bool,
    ) -> Result<(Vec<Vector>, f64)> {
        let k = rates.len();
        let mut design = DMatrix::<Complex64>::zeros(samples, k);
        let mut rhs = DMatrix::<Complex64>::zeros(samples, self.dim);
        let mut scale: f64 = 0.0;
        for m in 0..samples {
            let ds = m as f64 * h;
            for (j, lam) in rates.iter().enumerate() {
                design[(m, j)] = (lam * ds).exp();
            }
            let w = (self.weight)(s_start + ds);
            if w.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: w.len() });
            }
            for (c, z) in w.iter().enumerate() {
                rhs[(m, c)] = *z;
                scale = scale.max(z.norm());
            }
        }
        let svd = design.clone().svd(true, true);
        let max_sv = svd.singular_values.max();
        let coeffs = svd
            .solve(&rhs, 1e-12 * max_sv)
            .map_err(|e| Error::TailModel(format!("least-squares solve failed: {e}")))?;
        let resid = (&design * &coeffs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);

        let mut residual = resid;
        if check {
            // Off-grid validation at the midpoints.
            for m in 0..samples.saturating_sub(1) {
                let ds = (m as f64 + 0.5) * h;
                let w = (self.weight)(s_start + ds);
                for (c, z) in w.iter().enumerate() {
                    let mut model = Complex64::new(0.0, 0.0);
                    for (j, lam) in rates.iter().enumerate() {
                        model += coeffs[(j, c)] * (lam * ds).exp();
                    }
                    residual = residual.max((model - z).norm());
                }
            }
        }
        if residual > 1e-7 * scale.max(1e-300) + 1e-13 {
            return Err(Error::TailModel(format!("residual {residual:.3e} against sample scale {scale:.3e}")));
        }
        let rows = (0..k).map(|j| (0..self.dim).map(|c| coeffs[(j, c)]).collect()).collect();
        Ok((rows, residual))
    }

    fn combine_tail(
        &self,
        s_start: f64,
        rates: &[Complex64],
        coeffs: &[Vector],
        abs_target: f64,
    ) -> Result<(Vector, f64)> {
        let mut total = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut err = 0.0;
        for (lam, row) in rates.iter().zip(coeffs) {
            let cnorm = row.norm();
            if cnorm == 0.0 {
                continue;
            }
            let (tv, te) = self.exponential_tail(s_start, *lam, abs_target / (rates.len() as f64 * cnorm.max(1.0)))?;
            for (acc, c) in total.iter_mut().zip(row) {
                *acc += c * tv;
            }
            err += cnorm * te;
        }
        Ok((total, err))
    }
}

fn dedupe_rates(rates: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(rates.len());
    for r in rates {
        if !out.iter().any(|q| (q - r).norm() <= 1e-12 * (1.0 + r.norm())) {
            out.push(*r);
        }
    }
    out
}

/// Integrates a vector-valued weight against `f_α(t, ·)`.
///
/// All components share quadrature nodes; the error estimate is a max-norm
/// over components.
pub fn integrate_components<F>(
    order: FractionalOrder,
    t: f64,
    weight: F,
    tail: &TailModel,
    cfg: &KernelConfig,
) -> Result<KernelIntegral<Vector>>
where
    F: Fn(f64) -> Vector,
{
    cfg.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} must be nonnegative")));
    }
    let exact = |value: Vector, point_mass: bool| KernelIntegral {
        value,
        err_estimate: 0.0,
        truncation_point: None,
        tail_bound: None,
        point_mass,
    };
    if order.is_classical() {
        return Ok(exact(weight(t), false));
    }
    if matches!(tail, TailModel::Unbounded) {
        return Err(Error::DivergenceRisk);
    }
    if t < POINT_MASS_T {
        return Ok(exact(weight(0.0), true));
    }

    let alpha = order.value();
    let dens = density_for(alpha);
    let sigma = t.powf(1.0 / alpha);
    let probe = weight(0.0);
    let setup = Setup { dens: &dens, t, sigma, weight: &weight, dim: probe.len(), cfg };
    let s_lo = sigma * dens.left_cut();
    let s_series = sigma * dens.x_series();

    match tail {
        TailModel::Unbounded => unreachable!(),
        TailModel::Truncated { s_max } => {
            let s_max = match s_max {
                Some(v) if *v > 0.0 => *v,
                Some(v) => return Err(Error::Domain(format!("truncation point {v} must be positive"))),
                None => (tail_constant(alpha) * t / cfg.tail_cut).powf(1.0 / (1.0 + alpha)),
            };
            let breaks = setup.body_breaks(s_lo.min(s_max), s_max, None, None)?;
            let body = setup.body(&breaks, |v| cfg.abs_tol + cfg.rel_tol * v.norm())?;
            Ok(KernelIntegral {
                value: body.value,
                err_estimate: body.err,
                truncation_point: Some(s_max),
                tail_bound: Some(tail_constant(alpha) * t * s_max.powf(-1.0 - alpha)),
                point_mass: false,
            })
        }
        TailModel::Bounded { bound } => {
            if !(bound.is_finite() && *bound >= 0.0) {
                return Err(Error::Domain(format!("weight bound {bound} must be finite and nonnegative")));
            }
            let target = cfg.abs_tol + cfg.rel_tol * bound;
            let mut s_end = s_series.max(sigma);
            let mut steps = 0;
            while bound * dens.survival(s_end / sigma) > 0.1 * target {
                s_end *= 2.0;
                steps += 1;
                if steps > 3000 || !s_end.is_finite() {
                    return Err(Error::Quadrature {
                        context: "tail of the kernel too heavy for the requested tolerance".into(),
                        estimate: bound * dens.survival(s_end / sigma),
                        target,
                    });
                }
            }
            let tail_mass = bound * dens.survival(s_end / sigma);
            let breaks = setup.body_breaks(s_lo, s_end, None, None)?;
            let body = setup.body(&breaks, |_| 0.5 * target)?;
            Ok(KernelIntegral {
                value: body.value,
                err_estimate: body.err + tail_mass + bound * 1e-17,
                truncation_point: Some(s_end),
                tail_bound: Some(tail_mass),
                point_mass: false,
            })
        }
        TailModel::Exponentials { rates } => {
            if rates.is_empty() {
                return Err(Error::Domain("exponential tail model needs at least one rate".into()));
            }
            if let Some(bad) = rates.iter().find(|r| r.re > 1e-14) {
                return Err(Error::Domain(format!("rate {bad} has positive real part; weight unbounded")));
            }
            let rates = dedupe_rates(rates);
            let im_max = rates.iter().map(|r| r.im.abs()).fold(0.0, f64::max);
            let all_max = rates.iter().map(|r| r.norm()).fold(0.0, f64::max);
            let s_cap = if im_max > 0.0 { 64.0 * PI / im_max } else { f64::INFINITY };
            let s_end = s_series.max(sigma.min(s_cap));

            // Sampling: resolve the fastest rate, separate the closest pair.
            let h0 = if all_max > 0.0 { PI / (4.0 * all_max) } else { 1.0 };
            let sep = if rates.len() > 1 {
                let mut d = f64::INFINITY;
                for i in 0..rates.len() {
                    for j in 0..i {
                        d = d.min((rates[i] - rates[j]).norm());
                    }
                }
                d
            } else {
                f64::INFINITY
            };
            let span = if sep.is_finite() { 8.0 * PI / sep } else { 8.0 * h0 };
            let samples = ((span / h0).ceil() as usize + 1).clamp((4 * rates.len()).max(8), 8192);
            let h = h0.min(span / (samples - 1) as f64);
            let (coeffs, residual) = setup.fit(s_end, &rates, h, samples, true)?;

            let scale = coeffs.iter().map(|c| c.norm()).sum::<f64>().max(probe.norm());
            let target = cfg.abs_tol + cfg.rel_tol * scale;
            let cap = if im_max > 0.0 { Some(PI / im_max) } else { None };
            let breaks = setup.body_breaks(s_lo.min(s_end), s_end, cap, None)?;
            let body = setup.body(&breaks, |_| 0.5 * target)?;
            let (tail_value, tail_err) = setup.combine_tail(s_end, &rates, &coeffs, 0.1 * target)?;

            let mut value = body.value;
            value.add_scaled(1.0, &tail_value);
            let q = dens.survival(s_end / sigma);
            Ok(KernelIntegral {
                value,
                err_estimate: body.err + tail_err + residual * q + scale * 1e-17,
                truncation_point: None,
                tail_bound: None,
                point_mass: false,
            })
        }
        TailModel::Periodic { period } => {
            if !(period.is_finite() && *period > 0.0) {
                return Err(Error::Domain(format!("period {period} must be positive")));
            }
            let p = *period;
            let half = 0.5 * p;
            let s_end = {
                let raw = s_series.max(sigma.min(64.0 * p));
                (raw / half).ceil() * half
            };
            let mut harmonics = 8usize;
            let (rates, coeffs, residual) = loop {
                let rates: Vec<Complex64> = (-(harmonics as i64)..=harmonics as i64)
                    .map(|k| Complex64::new(0.0, 2.0 * PI * k as f64 / p))
                    .collect();
                let samples = 2 * rates.len() + 2;
                let h = p / samples as f64;
                match setup.fit(s_end, &rates, h, samples, true) {
                    Ok((c, r)) => break (rates, c, r),
                    Err(Error::TailModel(msg)) if harmonics < 256 => {
                        let _ = msg;
                        harmonics *= 2;
                    }
                    Err(e) => return Err(e),
                }
            };
            let scale = probe.norm().max(coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max));
            let target = cfg.abs_tol + cfg.rel_tol * scale;
            let breaks = setup.body_breaks(s_lo.min(s_end), s_end, None, Some(half))?;
            let body = setup.body(&breaks, |_| 0.5 * target)?;
            let (tail_value, tail_err) = setup.combine_tail(s_end, &rates, &coeffs, 0.1 * target)?;
            let mut value = body.value;
            value.add_scaled(1.0, &tail_value);
            let q = dens.survival(s_end / sigma);
            Ok(KernelIntegral {
                value,
                err_estimate: body.err + tail_err + residual * q + scale * 1e-17,
                truncation_point: None,
                tail_bound: None,
                point_mass: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(alpha: f64, t: f64, w: impl Fn(f64) -> Complex64, tail: TailModel) -> KernelIntegral<Complex64> {
        integrate_components(FractionalOrder::new(alpha).unwrap(), t, |s| vec![w(s)], &tail, &KernelConfig::default())
            .unwrap()
            .map(|v| v[0])
    }

    #[test]
    fn normalization_with_each_model() {
        let one = |_s: f64| Complex64::new(1.0, 0.0);
        for model in [
            TailModel::Bounded { bound: 1.0 },
            TailModel::Exponentials { rates: vec![Complex64::new(0.0, 0.0)] },
            TailModel::Periodic { period: 3.0 },
        ] {
            let r = scalar(0.5, 1.0, one, model.clone());
            assert!((r.value.re - 1.0).abs() < 1e-9, "{model:?}: {}", r.value);
        }
    }

    #[test]
    fn cosine_weight_matches_boundary_transform() {
        let want = (-(Complex64::new(0.0, -1.0)).powf(0.5)).exp();
        let r = scalar(
            0.5,
            1.0,
            |s| Complex64::new(s.cos(), 0.0),
            TailModel::Exponentials { rates: vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] },
        );
        assert!((r.value.re - want.re).abs() < 1e-9, "{} vs {}", r.value, want);
        let r = scalar(0.5, 1.0, |s| Complex64::new(s.cos(), 0.0), TailModel::Periodic { period: 2.0 * PI });
        assert!((r.value.re - want.re).abs() < 1e-9, "{} vs {}", r.value, want);
    }

    #[test]
    fn unbounded_is_refused() {
        let e = integrate_components(
            FractionalOrder::half(),
            1.0,
            |s| vec![Complex64::new(s, 0.0)],
            &TailModel::Unbounded,
            &KernelConfig::default(),
        );
        assert_eq!(e.unwrap_err(), Error::DivergenceRisk);
    }

    #[test]
    fn wrong_rate_hint_is_detected() {
        let e = integrate_components(
            FractionalOrder::half(),
            1.0,
            |s| vec![Complex64::new((2.0 * s).cos(), 0.0)],
            &TailModel::Exponentials { rates: vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] },
            &KernelConfig::default(),
        );
        assert!(matches!(e, Err(Error::TailModel(_))), "{e:?}");
    }

    #[test]
    fn truncated_reports_point_and_bound() {
        let r = scalar(0.5, 1.0, |s| Complex64::new(s, 0.0), TailModel::Truncated { s_max: Some(100.0) });
        assert_eq!(r.truncation_point, Some(100.0));
        let c = tail_constant(0.5);
        assert!((r.tail_bound.unwrap() - c * 100f64.powf(-1.5)).abs() < 1e-15);
        // ∫_0^S s f ds ≈ (t/√π) √S for large S
        assert!(r.value.re > 4.0 && r.value.re < 1.0 / PI.sqrt() * 10.0);
    }
}
