//! Evaluators for the standardized one-sided stable density `f_α(1, x)`.
//!
//! Two representations cover the whole half-line:
//!
//! * the convergent large-`x` expansion in powers of `y = x^{-α}`, which also
//!   continues analytically into `Re x > 0` and gives the survival function in
//!   closed series form;
//! * the non-oscillatory steepest-descent form of the inversion integral
//!   (positive integrand on `[0, π]`), used where the expansion cancels badly.
//!
//! `f_α(t, s) = t^{-1/α} f_α(1, s t^{-1/α})` reduces every `t` to `t = 1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::quad;

/// Largest tolerated series term; bounds cancellation to ~1e-13 absolute.
const MAX_TERM: f64 = 1e3;
const MAX_TERMS: usize = 1200;
const MAX_CANCEL: f64 = 1e3;

/// Precomputed series data for one stability index.
#[derive(Debug)]
pub struct StableDensity {
    alpha: f64,
    /// Density coefficients `a_k`, `k = 1..`, including the `1/π`.
    dens: Vec<f64>,
    dens_ln: Vec<f64>,
    /// Survival coefficients `(-1)^{k+1} / (k! Γ(1 - kα))`.
    surv: Vec<f64>,
    /// Largest `|y|` for which the expansion is used.
    y_series: f64,
    left_cut: OnceLock<f64>,
}

fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    (PI * r).sin()
}

impl StableDensity {
    /// `alpha` must lie in `(0, 1)`; callers validate through `FractionalOrder`.
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha < 1.0, "stable index out of range: {alpha}");
        let mut dens = Vec::with_capacity(MAX_TERMS);
        let mut dens_ln = Vec::with_capacity(MAX_TERMS);
        let mut surv = Vec::with_capacity(MAX_TERMS);
        for k in 1..=MAX_TERMS {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let s = sin_pi(kf * alpha);
            let ln_fact = ln_gamma(kf + 1.0);
            let ln_mag = ln_gamma(kf * alpha + 1.0) - ln_fact - PI.ln();
            let a = sign * s * ln_mag.exp();
            dens.push(a);
            dens_ln.push(ln_mag);
            // 1/Γ(1-kα) = sin(πkα) Γ(kα) / π
            let b = sign * s * (ln_gamma(kf * alpha) - ln_fact - PI.ln()).exp();
            surv.push(b);
        }

        let mut y: f64 = 0.05;
        loop {
            let next = y * 1.02;
            let ly = next.ln();
            let peak =
                dens_ln.iter().enumerate().map(|(i, l)| l + (i + 1) as f64 * ly).fold(f64::NEG_INFINITY, f64::max);
            // Terms must also have died out before the table ends.
            let last = dens_ln[MAX_TERMS - 1] + MAX_TERMS as f64 * ly;
            // Relative cancellation: the sum (= x f(x)) must stay within
            // MAX_CANCEL of the largest term.
            let sum = Self::horner_real(&dens, MAX_TERMS, next).abs();
            if peak > MAX_TERM.ln() || peak > (MAX_CANCEL * sum).ln() || last > -40.0 || next > 60.0 {
                break;
            }
            y = next;
        }

        Self { alpha, dens, dens_ln, surv, y_series: y, left_cut: OnceLock::new() }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Upper limit of `x^{-α}` for the series route.
    pub fn y_series(&self) -> f64 {
        self.y_series
    }

    /// Smallest standardized abscissa where the expansion is trusted.
    pub fn x_series(&self) -> f64 {
        self.y_series.powf(-1.0 / self.alpha)
    }

    fn term_count(&self, ln_y: f64) -> usize {
        let mut peak = f64::NEG_INFINITY;
        for (i, l) in self.dens_ln.iter().enumerate() {
            let v = l + (i + 1) as f64 * ln_y;
            peak = peak.max(v);
            if i > 4 && v < peak - 40.0 && v < -40.0 {
                return i + 1;
            }
        }
        MAX_TERMS
    }

    fn horner(coeffs: &[f64], n: usize, y: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in coeffs[..n].iter().rev() {
            acc = (acc + c) * y;
        }
        acc
    }

    fn horner_real(coeffs: &[f64], n: usize, y: f64) -> f64 {
        let mut acc = 0.0;
        for c in coeffs[..n].iter().rev() {
            acc = (acc + c) * y;
        }
        acc
    }

    /// Series value of `f_α(1, x)` for real `x > 0` with `x^{-α} ≤ y_series`.
    pub fn series(&self, x: f64) -> f64 {
        let y = x.powf(-self.alpha);
        let n = self.term_count(y.ln());
        Self::horner_real(&self.dens, n, y) / x
    }

    /// Analytic continuation of `f_α(1, ·)` to `Re x > 0` (series route).
    pub fn series_complex(&self, x: Complex64) -> Complex64 {
        let y = x.powf(-self.alpha);
        let n = self.term_count(y.norm().ln());
        Self::horner(&self.dens, n, y) / x
    }

    /// `P(X > x)` for the standardized law (series route).
    pub fn survival_series(&self, x: f64) -> f64 {
        let y = x.powf(-self.alpha);
        let n = self.term_count(y.ln());
        Self::horner_real(&self.surv, n, y)
    }

    fn kanter_ln(&self, phi: f64) -> f64 {
        let a = self.alpha;
        let sa = (a * phi).sin();
        let s1 = phi.sin();
        let sb = ((1.0 - a) * phi).sin();
        (sa.ln() - s1.ln()) / (1.0 - a) + sb.ln() - sa.ln()
    }

    fn kanter_breaks(&self, c: f64) -> Vec<f64> {
        let mut breaks = vec![0.0];
        let mut w = (1.0 / c.sqrt()).min(0.25);
        while w < PI * 0.5 {
            breaks.push(w);
            w *= 2.0;
        }
        breaks.extend_from_slice(&[PI * 0.5, PI * 0.75, PI * 0.9, PI]);
        breaks
    }

    /// Density through the positive steepest-descent integral.
    pub fn positive_form(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let p = 1.0 / (1.0 - a);
        let c = x.powf(-a * p);
        let ln_pref = (a * p / PI).ln() - p * x.ln();
        let breaks = self.kanter_breaks(c);
        let r = quad::integrate(
            |phi: f64| {
                let la = self.kanter_ln(phi);
                let e = la - c * la.exp() + ln_pref;
                if e < -745.0 {
                    0.0
                } else {
                    e.exp()
                }
            },
            &breaks,
            |v: &f64| 1e-300_f64.max(1e-13 * v.abs()),
            400,
        );
        r.value.max(0.0)
    }

    /// `P(X ≤ x)` through the positive steepest-descent integral.
    pub fn cdf_positive_form(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let c = x.powf(-a / (1.0 - a));
        let breaks = self.kanter_breaks(c);
        let r = quad::integrate(
            |phi: f64| {
                let e = -c * self.kanter_ln(phi).exp();
                if e < -745.0 {
                    0.0
                } else {
                    e.exp() / PI
                }
            },
            &breaks,
            |v: &f64| 1e-300_f64.max(1e-13 * v.abs()),
            400,
        );
        r.value.clamp(0.0, 1.0)
    }

    /// `f_α(1, x)` choosing the better-conditioned representation.
    pub fn standard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.powf(-self.alpha) <= self.y_series {
            self.series(x).max(0.0)
        } else {
            self.positive_form(x)
        }
    }

    /// `P(X > x)` for the standardized law.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x.powf(-self.alpha) <= self.y_series {
            self.survival_series(x).clamp(0.0, 1.0)
        } else {
            1.0 - self.cdf_positive_form(x)
        }
    }

    /// `f_α(t, s)`.
    pub fn density(&self, t: f64, s: f64) -> f64 {
        let scale = t.powf(1.0 / self.alpha);
        self.standard(s / scale) / scale
    }

    /// Standardized abscissa below which the remaining mass is negligible
    /// (`x f(x) < 1e-18`, with super-exponential decay further left).
    pub fn left_cut(&self) -> f64 {
        *self.left_cut.get_or_init(|| {
            let mut x = 1.0;
            let mut steps = 0;
            while steps < 2000 {
                let v = self.standard(x) * x;
                if v < 1e-18 && self.cdf_positive_form(x) < 1e-17 {
                    break;
                }
                x *= 0.5;
                steps += 1;
            }
            x
        })
    }
}

/// Heavy-tail constant: `f_α(t, s) ~ tail_constant(α)·t·s^{-1-α}` as `s → ∞`.
pub fn tail_constant(alpha: f64) -> f64 {
    (ln_gamma(1.0 + alpha)).exp() * (PI * alpha).sin() / PI
}
