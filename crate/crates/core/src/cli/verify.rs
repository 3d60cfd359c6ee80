//! Invariant suites behind `frachq verify`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kernel::{
    eval_kernel, eval_kernel_closed_half, integrate_kernel, laplace_check, FractionalOrder, KernelConfig, TailModel,
};
use crate::models::{oscillator_envelope, oscillator_envelope_macdonald_half, EnvelopeMode};
use crate::spectral::{
    duality_check, eigendecompose, fractional_heisenberg_evolve, fractional_vonneumann_evolve, heisenberg_trajectory,
    max_abs_diff, random_density, random_hermitian, sigma_x, sigma_y, sigma_z, HermitianOperator,
};
use crate::subordinator::subordinate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("{status} {:<24} error: {e}", self.name),
            None => format!(
                "{status} {:<24} residual {:.3e} tolerance {:.1e} ({:.2} s)",
                self.name, self.residual, self.tolerance, self.seconds
            ),
        }
    }
}

fn check(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> CheckOutcome {
    let start = Instant::now();
    let r = f();
    let seconds = start.elapsed().as_secs_f64();
    match r {
        Ok(residual) => CheckOutcome {
            name,
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            seconds,
            error: None,
        },
        Err(e) => {
            CheckOutcome { name, residual: f64::NAN, tolerance, passed: false, seconds, error: Some(e.to_string()) }
        }
    }
}

const ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn normalization(cfg: &KernelConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in ALPHAS {
        for t in [0.1, 1.0, 10.0] {
            let r = integrate_kernel(
                FractionalOrder::new(a)?,
                t,
                |_| Complex64::new(1.0, 0.0),
                &TailModel::Bounded { bound: 1.0 },
                cfg,
            )?;
            worst = worst.max((r.value - 1.0).norm());
        }
    }
    Ok(worst)
}

fn laplace(cfg: &KernelConfig) -> Result<f64> {
    let zs = [
        Complex64::new(0.5, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut worst = 0.0f64;
    for a in ALPHAS {
        for z in zs {
            let p = laplace_check(FractionalOrder::new(a)?, 1.0, z, cfg)?;
            worst = worst.max((p.lhs - p.rhs).norm());
        }
    }
    Ok(worst)
}

/// `H = σ_z/2`, `A = σ_x` at `α = 1/2`, `t = 1`: spectral and quadrature
/// routes against `C σ_x - S σ_y`.
fn qubit_oracle(cfg: &KernelConfig) -> Result<f64> {
    let order = FractionalOrder::half();
    let h = HermitianOperator::new(sigma_z().into_inner() * Complex64::new(0.5, 0.0))?;
    let spec = eigendecompose(&h, 1.0)?;
    let env = oscillator_envelope(order, 1.0, 1.0, EnvelopeMode::ClosedForm, cfg)?;
    let expected =
        sigma_x().into_inner() * Complex64::new(env.c, 0.0) - sigma_y().into_inner() * Complex64::new(env.s, 0.0);
    let spectral = fractional_heisenberg_evolve(&spec, &sigma_x(), order, 1.0)?;
    let traj = heisenberg_trajectory(&spec, &sigma_x())?;
    let quad = subordinate(order, 1.0, &traj, cfg)?.value;
    Ok(max_abs_diff(spectral.entries(), &expected).max(max_abs_diff(&quad, &expected)))
}

/// `∫₀^s f(t₁,u) f(t₂,s-u) du = f(t₁+t₂,s)`, relative.
fn chapman_kolmogorov(cfg: &KernelConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in [0.3, 0.5, 0.7] {
        let order = FractionalOrder::new(a)?;
        for s in [0.5, 2.0, 5.0] {
            let (t1, t2) = (0.4, 0.6);
            let conv = integrate_kernel(
                order,
                t1,
                |u| {
                    if u < s {
                        Complex64::new(eval_kernel(order, t2, s - u, cfg).unwrap_or(f64::NAN), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                },
                &TailModel::Truncated { s_max: Some(s) },
                cfg,
            )?;
            let direct = eval_kernel(order, t1 + t2, s, cfg)?;
            worst = worst.max((conv.value.re - direct).abs() / direct);
        }
    }
    Ok(worst)
}

/// Most negative kernel value on a log grid, as a positive residual.
fn positivity(cfg: &KernelConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in ALPHAS {
        let order = FractionalOrder::new(a)?;
        for i in 0..=40 {
            let s = 10f64.powf(-3.0 + 6.0 * i as f64 / 40.0);
            let f = eval_kernel(order, 1.0, s, cfg)?;
            if f < 0.0 {
                worst = worst.max(-f);
            }
        }
    }
    Ok(worst)
}

/// Contour angles `π` and `3π/4`; restricted to `α ≤ 1/2`, where both rays
/// decay monotonically.
fn theta_independence(cfg: &KernelConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in [0.1, 0.3, 0.5] {
        let order = FractionalOrder::new(a)?;
        let c1 = cfg.clone().with_theta(PI);
        let c2 = cfg.clone().with_theta(0.75 * PI);
        for s in [0.05, 0.3, 1.0, 4.0, 20.0] {
            let f1 = eval_kernel(order, 1.0, s, &c1)?;
            let f2 = eval_kernel(order, 1.0, s, &c2)?;
            worst = worst.max((f1 - f2).abs() / f1.abs().max(1e-300));
        }
    }
    Ok(worst)
}

fn closed_half(cfg: &KernelConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for s in [0.05, 0.2, 1.0, 5.0, 25.0] {
            let q = eval_kernel(FractionalOrder::half(), t, s, cfg)?;
            let c = eval_kernel_closed_half(t, s)?;
            worst = worst.max((q - c).abs() / c);
        }
    }
    Ok(worst)
}

fn envelopes(cfg: &KernelConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in [0.3, 0.5, 0.8] {
        let order = FractionalOrder::new(a)?;
        for t in [0.5, 1.0, 2.0] {
            let q = oscillator_envelope(order, 1.0, t, EnvelopeMode::Quadrature, cfg)?;
            let c = oscillator_envelope(order, 1.0, t, EnvelopeMode::ClosedForm, cfg)?;
            worst = worst.max((q.c - c.c).abs()).max((q.s - c.s).abs());
        }
    }
    let m = oscillator_envelope_macdonald_half(1.0, 1.0)?;
    let c = oscillator_envelope(FractionalOrder::half(), 1.0, 1.0, EnvelopeMode::ClosedForm, cfg)?;
    Ok(worst.max((m.c - c.c).abs()).max((m.s - c.s).abs()))
}

fn density_positivity() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let h = random_hermitian(3, &mut rng);
        let rho = random_density(3, &mut rng);
        let spec = eigendecompose(&h, 1.0)?;
        let order = FractionalOrder::new([0.3, 0.5, 0.8][i % 3])?;
        for t in [0.5, 2.0] {
            let r = fractional_vonneumann_evolve(&spec, &rho, order, t)?;
            worst = worst.max(-r.min_eigenvalue()?).max((r.trace() - 1.0).abs());
        }
    }
    Ok(worst)
}

fn duality() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let h = random_hermitian(3, &mut rng);
        let a = random_hermitian(3, &mut rng);
        let rho = random_density(3, &mut rng);
        let spec = eigendecompose(&h, 1.0)?;
        let (l, r) = duality_check(&spec, &rho, &a, FractionalOrder::new([0.3, 0.5, 0.8][i % 3])?, 1.3)?;
        worst = worst.max((l - r).abs());
    }
    Ok(worst)
}

fn random_oracle(cfg: &KernelConfig) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for i in 0..6 {
        let n = 2 + i % 3;
        let h = random_hermitian(n, &mut rng);
        let a = random_hermitian(n, &mut rng);
        let spec = eigendecompose(&h, 1.0)?;
        let order = FractionalOrder::new([0.3, 0.5, 0.8][i % 3])?;
        let traj = heisenberg_trajectory(&spec, &a)?;
        let t = [0.5, 2.0][i % 2];
        let quad = subordinate(order, t, &traj, cfg)?.value;
        let spectral = fractional_heisenberg_evolve(&spec, &a, order, t)?;
        worst = worst.max(max_abs_diff(spectral.entries(), &quad));
    }
    Ok(worst)
}

/// Runs the suite for `level`. Every check runs even after a failure.
pub fn run_suite(level: Level, cfg: &KernelConfig) -> Vec<CheckOutcome> {
    let mut out = vec![
        check("kernel-normalization", 1e-8, || normalization(cfg)),
        check("laplace-identity", 1e-7, || laplace(cfg)),
        check("qubit-oracle", 1e-6, || qubit_oracle(cfg)),
    ];
    if level == Level::Full {
        out.push(check("chapman-kolmogorov", 1e-8, || chapman_kolmogorov(cfg)));
        out.push(check("kernel-positivity", 1e-14, || positivity(cfg)));
        out.push(check("theta-independence", 1e-8, || theta_independence(cfg)));
        out.push(check("closed-form-half", 1e-8, || closed_half(cfg)));
        out.push(check("envelope-agreement", 1e-6, || envelopes(cfg)));
        out.push(check("density-positivity", 1e-10, density_positivity));
        out.push(check("duality", 1e-10, duality));
        out.push(check("spectral-vs-quadrature", 1e-6, || random_oracle(cfg)));
    }
    out
}
