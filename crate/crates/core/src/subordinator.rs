//! Bochner-Phillips subordination of a trajectory `s ↦ Φ_s(A)`:
//!
//! `Φ^(α)_t(A) = ∫₀^∞ f_α(t, s) Φ_s(A) ds`.
//!
//! Trajectories may be real, complex, or complex matrices. Matrix entries
//! are integrated together against shared kernel samples, and errors are
//! reported in the max-norm over entries.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{integrate_components, FractionalOrder, KernelConfig, TailModel};

/// Values a trajectory can take.
pub trait TrajectoryValue: Clone + Send + Sync + 'static {
    fn components(&self) -> Vec<Complex64>;
    /// Rebuilds a value of the same shape as `self` from `components`.
    fn rebuild(&self, components: &[Complex64]) -> Self;
    fn max_norm(&self) -> f64;
}

impl TrajectoryValue for f64 {
    fn components(&self) -> Vec<Complex64> {
        vec![Complex64::new(*self, 0.0)]
    }
    fn rebuild(&self, c: &[Complex64]) -> Self {
        c[0].re
    }
    fn max_norm(&self) -> f64 {
        self.abs()
    }
}

impl TrajectoryValue for Complex64 {
    fn components(&self) -> Vec<Complex64> {
        vec![*self]
    }
    fn rebuild(&self, c: &[Complex64]) -> Self {
        c[0]
    }
    fn max_norm(&self) -> f64 {
        self.norm()
    }
}

impl TrajectoryValue for DMatrix<Complex64> {
    fn components(&self) -> Vec<Complex64> {
        self.as_slice().to_vec()
    }
    fn rebuild(&self, c: &[Complex64]) -> Self {
        DMatrix::from_column_slice(self.nrows(), self.ncols(), c)
    }
    fn max_norm(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

type Eval<V> = Arc<dyn Fn(f64) -> V + Send + Sync>;

/// A trajectory `s ↦ Φ_s(A)` together with what is known about its growth.
///
/// Without any hint the trajectory is treated as potentially unbounded and
/// subordination is refused.
#[derive(Clone)]
pub struct Trajectory<V> {
    evaluate: Eval<V>,
    pub bound_hint: Option<f64>,
    pub period_hint: Option<f64>,
    /// Rates `λ_j` such that every component is `Σ_j c_j e^{λ_j s}`.
    pub rates_hint: Option<Vec<Complex64>>,
    /// Opt-in truncation at `s_max` (`Some(None)` picks it from `tail_cut`).
    pub truncation: Option<Option<f64>>,
}

impl<V> std::fmt::Debug for Trajectory<V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trajectory")
            .field("bound_hint", &self.bound_hint)
            .field("period_hint", &self.period_hint)
            .field("rates_hint", &self.rates_hint)
            .field("truncation", &self.truncation)
            .finish_non_exhaustive()
    }
}

impl<V: TrajectoryValue> Trajectory<V> {
    pub fn new(evaluate: impl Fn(f64) -> V + Send + Sync + 'static) -> Self {
        Self { evaluate: Arc::new(evaluate), bound_hint: None, period_hint: None, rates_hint: None, truncation: None }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound_hint = Some(bound);
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period_hint = Some(period);
        self
    }

    pub fn with_rates(mut self, rates: Vec<Complex64>) -> Self {
        self.rates_hint = Some(rates);
        self
    }

    /// Oscillation frequencies `ω_j`: components are sums of `e^{i ω_j s}`.
    pub fn with_frequencies(self, omegas: &[f64]) -> Self {
        let rates = omegas.iter().map(|w| Complex64::new(0.0, *w)).collect();
        self.with_rates(rates)
    }

    pub fn truncated(mut self, s_max: Option<f64>) -> Self {
        self.truncation = Some(s_max);
        self
    }

    pub fn evaluate(&self, s: f64) -> V {
        (self.evaluate)(s)
    }

    /// Caches evaluations by exact `s`, for expensive trajectories sampled
    /// repeatedly across a time grid.
    pub fn memoized(self) -> Self {
        let inner = Arc::clone(&self.evaluate);
        let cache: Arc<Mutex<HashMap<u64, V>>> = Arc::new(Mutex::new(HashMap::new()));
        let evaluate: Eval<V> = Arc::new(move |s: f64| {
            let key = s.to_bits();
            if let Some(v) = cache.lock().expect("trajectory cache poisoned").get(&key) {
                return v.clone();
            }
            let v = inner(s);
            cache.lock().expect("trajectory cache poisoned").insert(key, v.clone());
            v
        });
        Self { evaluate, ..self }
    }

    /// Structured hints take precedence over a plain bound; truncation is
    /// used only when nothing else is known.
    pub fn tail_model(&self) -> TailModel {
        if let Some(rates) = &self.rates_hint {
            TailModel::Exponentials { rates: rates.clone() }
        } else if let Some(p) = self.period_hint {
            TailModel::Periodic { period: p }
        } else if let Some(b) = self.bound_hint {
            TailModel::Bounded { bound: b }
        } else if let Some(s_max) = self.truncation {
            TailModel::Truncated { s_max }
        } else {
            TailModel::Unbounded
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubordinationResult<V> {
    pub value: V,
    pub err_estimate: f64,
    pub truncation_point: Option<f64>,
    pub tail_bound: Option<f64>,
    /// `t` was below the point-mass threshold; `value` is `traj(0)`.
    pub point_mass: bool,
}

/// `∫₀^∞ f_α(t, s) traj(s) ds`. For `α = 1` this is `traj(t)` exactly.
pub fn subordinate<V: TrajectoryValue>(
    order: FractionalOrder,
    t: f64,
    traj: &Trajectory<V>,
    cfg: &KernelConfig,
) -> Result<SubordinationResult<V>> {
    let template = traj.evaluate(0.0);
    let expected = template.components().len();
    let r = integrate_components(
        order,
        t,
        |s| {
            let c = traj.evaluate(s).components();
            debug_assert_eq!(c.len(), expected);
            c
        },
        &traj.tail_model(),
        cfg,
    )?;
    if r.value.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: r.value.len() });
    }
    Ok(SubordinationResult {
        value: template.rebuild(&r.value),
        err_estimate: r.err_estimate,
        truncation_point: r.truncation_point,
        tail_bound: r.tail_bound,
        point_mass: r.point_mass,
    })
}

/// [`subordinate`] on every point of an ascending grid.
///
/// Points are evaluated in parallel; each entry is identical to a
/// sequential call. A failing point is reported in place without aborting
/// the others.
pub fn subordinate_series<V: TrajectoryValue>(
    order: FractionalOrder,
    t_grid: &[f64],
    traj: &Trajectory<V>,
    cfg: &KernelConfig,
) -> Result<Vec<Result<SubordinationResult<V>>>> {
    if t_grid.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    if let Some(bad) = t_grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::Domain(format!("time grid entry {bad} must be positive")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("time grid must be strictly ascending".into()));
    }
    cfg.validate()?;
    Ok(t_grid.par_iter().map(|&t| subordinate(order, t, traj, cfg)).collect())
}
