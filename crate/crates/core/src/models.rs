//! Closed-form fractional dynamics of the free particle and the harmonic
//! oscillator.
//!
//! Both systems have linear Heisenberg flows, so the fractional solution is
//! a 2×2 matrix acting on `(Q₀, P₀)` whose entries are kernel averages of
//! the classical coefficients.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{integrate_components, principal_power, tail_constant, FractionalOrder, KernelConfig, TailModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(m: f64, omega: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", m), ("omega", omega), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { m, omega, hbar })
    }
}

/// `C_α(t) = ∫ f_α(t,s) cos ωs ds`, `S_α(t) = ∫ f_α(t,s) sin ωs ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorEnvelope {
    pub c: f64,
    pub s: f64,
}

impl OscillatorEnvelope {
    pub fn modulus_sq(&self) -> f64 {
        self.c * self.c + self.s * self.s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeMode {
    /// Boundary value `exp(-t (-iω)^α)` of the kernel's Laplace transform.
    ClosedForm,
    /// Direct kernel quadrature against `cos ωs`, `sin ωs`.
    Quadrature,
}

/// Exponential damping rate `ω^α cos(απ/2)` of the envelope modulus.
pub fn damping_rate(order: FractionalOrder, omega: f64) -> f64 {
    let a = order.value();
    omega.powf(a) * (a * FRAC_PI_2).cos()
}

fn check_omega_t(omega: f64, t: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("omega = {omega} must be positive")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be nonnegative")));
    }
    Ok(())
}

pub fn oscillator_envelope(
    order: FractionalOrder,
    omega: f64,
    t: f64,
    mode: EnvelopeMode,
    cfg: &KernelConfig,
) -> Result<OscillatorEnvelope> {
    check_omega_t(omega, t)?;
    if t == 0.0 {
        return Ok(OscillatorEnvelope { c: 1.0, s: 0.0 });
    }
    if order.is_classical() {
        let (s, c) = (omega * t).sin_cos();
        return Ok(OscillatorEnvelope { c, s });
    }
    match mode {
        EnvelopeMode::ClosedForm => {
            let z = (-t * principal_power(Complex64::new(0.0, -omega), order.value())).exp();
            Ok(OscillatorEnvelope { c: z.re, s: z.im })
        }
        EnvelopeMode::Quadrature => {
            let rates = vec![Complex64::new(0.0, omega), Complex64::new(0.0, -omega)];
            let r = integrate_components(
                order,
                t,
                |s| {
                    let (sn, cs) = (omega * s).sin_cos();
                    vec![Complex64::new(cs, 0.0), Complex64::new(sn, 0.0)]
                },
                &TailModel::Exponentials { rates },
                cfg,
            )?;
            Ok(OscillatorEnvelope { c: r.value[0].re, s: r.value[1].re })
        }
    }
}

/// `K_{±1/2}(z) = √(π/(2z)) e^{-z}` on the principal branch.
pub fn macdonald_half_order(z: Complex64) -> Complex64 {
    (Complex64::new(PI, 0.0) / (2.0 * z)).sqrt() * (-z).exp()
}

fn macdonald_combination(omega: f64, t: f64, prefactor: f64) -> OscillatorEnvelope {
    let arg = 2.0 * (omega * t * t / 4.0).sqrt();
    let plus = Complex64::from_polar(1.0, PI / 8.0) * macdonald_half_order(Complex64::from_polar(arg, PI / 4.0));
    let minus = Complex64::from_polar(1.0, -PI / 8.0) * macdonald_half_order(Complex64::from_polar(arg, -PI / 4.0));
    let c = prefactor * (plus + minus);
    let s = Complex64::new(0.0, prefactor) * (plus - minus);
    OscillatorEnvelope { c: c.re, s: s.re }
}

/// `α = 1/2` envelopes through the `K_{-1/2}` combination, with prefactor
/// `(ωt²/(4π²))^{1/4}` (the value that reproduces the kernel integrals).
pub fn oscillator_envelope_macdonald_half(omega: f64, t: f64) -> Result<OscillatorEnvelope> {
    check_omega_t(omega, t)?;
    if t == 0.0 {
        return Ok(OscillatorEnvelope { c: 1.0, s: 0.0 });
    }
    Ok(macdonald_combination(omega, t, (omega * t * t / (4.0 * PI * PI)).powf(0.25)))
}

/// The same combination with the prefactor `(ωt²/(4π))^{1/4}`, which
/// overshoots the kernel integrals by the factor `π^{1/4}`.
pub fn oscillator_envelope_macdonald_printed(omega: f64, t: f64) -> Result<OscillatorEnvelope> {
    check_omega_t(omega, t)?;
    Ok(macdonald_combination(omega, t, (omega * t * t / (4.0 * PI)).powf(0.25)))
}

/// Linear map `(Q₀, P₀) ↦ (Q_t, P_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionCoeffs {
    pub m: [[f64; 2]; 2],
}

impl SolutionCoeffs {
    pub fn identity() -> Self {
        Self { m: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let a = &self.m;
        let b = &other.m;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { m: out }
    }

    pub fn apply(&self, q: f64, p: f64) -> (f64, f64) {
        (self.m[0][0] * q + self.m[0][1] * p, self.m[1][0] * q + self.m[1][1] * p)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        d
    }
}

/// `[[C, S/(mω)], [-mωS, C]]`.
pub fn oscillator_coeffs(
    params: &OscillatorParams,
    order: FractionalOrder,
    t: f64,
    mode: EnvelopeMode,
    cfg: &KernelConfig,
) -> Result<SolutionCoeffs> {
    let env = oscillator_envelope(order, params.omega, t, mode, cfg)?;
    Ok(coeffs_from_envelope(params, &env))
}

pub fn coeffs_from_envelope(params: &OscillatorParams, env: &OscillatorEnvelope) -> SolutionCoeffs {
    let mw = params.m * params.omega;
    SolutionCoeffs { m: [[env.c, env.s / mw], [-mw * env.s, env.c]] }
}

/// How the free-particle moment `g_α(t) = ∫ f_α(t,s) s ds` is assigned a value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FreeMode {
    /// `α = 1/2` only: `+t²/2`, the positive-sign assignment.
    PaperHalf,
    /// `α = 1/2` only: `-t²/2`, the analytic continuation of the Mellin
    /// moment `∫ f s^u ds = Γ(1 - u/α) t^{u/α} / Γ(1 - u)` to `u = 1`. This
    /// reproduces `Q_t = Q₀ - (t²/2m) P₀` and is the default.
    #[default]
    RegularizedHalf,
    /// Any `α`: the integral over `[0, s_max]`, with divergence diagnostics.
    TruncatedNumeric { s_max: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeDiagnostics {
    /// The defining improper integral diverges (always true for `α < 1`).
    pub divergent: bool,
    pub truncation_point: Option<f64>,
    /// Leading growth `c_α t S^{1-α}/(1-α)` of the partial integral at `S`.
    pub growth_term: Option<f64>,
    /// `log₁₀` ratio of successive decade increments of the partial
    /// integral; tends to `1 - α`.
    pub measured_exponent: Option<f64>,
    pub note: String,
}

fn require_half(order: FractionalOrder, mode: &str) -> Result<()> {
    if (order.value() - 0.5).abs() > 1e-15 {
        return Err(Error::UnsupportedMode(format!("{mode} is defined only for alpha = 1/2 (got {})", order.value())));
    }
    Ok(())
}

fn partial_moment(order: FractionalOrder, t: f64, s_max: f64, cfg: &KernelConfig) -> Result<f64> {
    let r = integrate_components(
        order,
        t,
        |s| vec![Complex64::new(s, 0.0)],
        &TailModel::Truncated { s_max: Some(s_max) },
        cfg,
    )?;
    Ok(r.value[0].re)
}

pub fn free_particle_g(
    order: FractionalOrder,
    t: f64,
    mode: FreeMode,
    cfg: &KernelConfig,
) -> Result<(f64, FreeDiagnostics)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be nonnegative")));
    }
    if order.is_classical() {
        let diag = FreeDiagnostics {
            divergent: false,
            truncation_point: None,
            growth_term: None,
            measured_exponent: None,
            note: "classical order: g = t".into(),
        };
        return Ok((t, diag));
    }
    let divergent_note =
        "the defining integral diverges for every alpha < 1 (kernel tail ~ s^(-1-alpha) against weight s)";
    match mode {
        FreeMode::PaperHalf => {
            require_half(order, "paper-half")?;
            let diag = FreeDiagnostics {
                divergent: true,
                truncation_point: None,
                growth_term: None,
                measured_exponent: None,
                note: format!("{divergent_note}; value +t^2/2 by sign convention"),
            };
            Ok((0.5 * t * t, diag))
        }
        FreeMode::RegularizedHalf => {
            require_half(order, "regularized-half")?;
            let diag = FreeDiagnostics {
                divergent: true,
                truncation_point: None,
                growth_term: None,
                measured_exponent: None,
                note: format!("{divergent_note}; value -t^2/2 by analytic continuation"),
            };
            Ok((-0.5 * t * t, diag))
        }
        FreeMode::TruncatedNumeric { s_max } => {
            let a = order.value();
            if t == 0.0 {
                let diag = FreeDiagnostics {
                    divergent: true,
                    truncation_point: None,
                    growth_term: None,
                    measured_exponent: None,
                    note: divergent_note.into(),
                };
                return Ok((0.0, diag));
            }
            let s_max = match s_max {
                Some(v) if v.is_finite() && v > 0.0 => v,
                Some(v) => return Err(Error::Domain(format!("truncation point {v} must be positive"))),
                None => (tail_constant(a) * t / cfg.tail_cut).powf(1.0 / (1.0 + a)),
            };
            let i0 = partial_moment(order, t, s_max, cfg)?;
            let i1 = partial_moment(order, t, s_max / 10.0, cfg)?;
            let i2 = partial_moment(order, t, s_max / 100.0, cfg)?;
            let measured = ((i0 - i1) / (i1 - i2)).log10();
            let growth = tail_constant(a) * t * s_max.powf(1.0 - a) / (1.0 - a);
            let diag = FreeDiagnostics {
                divergent: true,
                truncation_point: Some(s_max),
                growth_term: Some(growth),
                measured_exponent: Some(measured),
                note: format!(
                    "{divergent_note}; partial integral grows like S^{:.3} (measured {measured:.3})",
                    1.0 - a
                ),
            };
            Ok((i0, diag))
        }
    }
}

/// `[[1, g/m], [0, 1]]`.
pub fn free_particle_coeffs(
    order: FractionalOrder,
    t: f64,
    m: f64,
    mode: FreeMode,
    cfg: &KernelConfig,
) -> Result<(SolutionCoeffs, FreeDiagnostics)> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("mass = {m} must be positive")));
    }
    let (g, diag) = free_particle_g(order, t, mode, cfg)?;
    Ok((SolutionCoeffs { m: [[1.0, g / m], [0.0, 1.0]] }, diag))
}
