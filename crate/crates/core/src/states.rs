//! Gaussian wave-packet statistics carried through linear solution maps.
//!
//! For the pure state `ψ(x) = (πb²)^{-1/4} exp(-(x-x₀)²/(2b²) + i p₀ x/ħ)` the
//! initial dispersions are `D_Q = b²/2`, `D_P = ħ²/(2b²)` with zero
//! symmetrized covariance, so a map `(Q, P) ↦ (aQ + bP, cQ + dP)` gives
//! `D(aQ + bP) = a² D_Q + b² D_P`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{OscillatorEnvelope, OscillatorParams, SolutionCoeffs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub x0: f64,
    pub p0: f64,
    pub b: f64,
    pub hbar: f64,
}

impl GaussianPacket {
    pub fn new(x0: f64, p0: f64, b: f64, hbar: f64) -> Result<Self> {
        if !(x0.is_finite() && p0.is_finite()) {
            return Err(Error::Domain("packet center must be finite".into()));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("width b = {b} must be positive")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Domain(format!("hbar = {hbar} must be positive")));
        }
        Ok(Self { x0, p0, b, hbar })
    }

    /// Normalized coordinate wavefunction.
    pub fn wavefunction(&self, x: f64) -> Complex64 {
        let norm = (PI * self.b * self.b).powf(-0.25);
        let d = x - self.x0;
        Complex64::from_polar(norm * (-d * d / (2.0 * self.b * self.b)).exp(), self.p0 * x / self.hbar)
    }

    fn disp_q0(&self) -> f64 {
        0.5 * self.b * self.b
    }

    fn disp_p0(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.b * self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub mean_q: f64,
    pub mean_p: f64,
    pub disp_q: f64,
    pub disp_p: f64,
    pub uncertainty_product: f64,
}

pub fn initial_moments(packet: &GaussianPacket) -> MomentReport {
    evolve_moments(packet, &SolutionCoeffs::identity())
}

pub fn evolve_moments(packet: &GaussianPacket, coeffs: &SolutionCoeffs) -> MomentReport {
    let (mean_q, mean_p) = coeffs.apply(packet.x0, packet.p0);
    let [[a, b], [c, d]] = coeffs.m;
    let disp_q = a * a * packet.disp_q0() + b * b * packet.disp_p0();
    let disp_p = c * c * packet.disp_q0() + d * d * packet.disp_p0();
    MomentReport { mean_q, mean_p, disp_q, disp_p, uncertainty_product: disp_q * disp_p }
}

/// Oscillator dispersions in the written-out envelope form
/// `D_P = (ħ²/2b²)C² + (b²m²ω²/2)S²`, `D_Q = (b²/2)C² + (ħ²/(2b²m²ω²))S²`.
pub fn oscillator_dispersions(
    packet: &GaussianPacket,
    params: &OscillatorParams,
    env: &OscillatorEnvelope,
) -> (f64, f64) {
    let (b2, h2) = (packet.b * packet.b, packet.hbar * packet.hbar);
    let mw2 = (params.m * params.omega).powi(2);
    let c2 = env.c * env.c;
    let s2 = env.s * env.s;
    let dq = 0.5 * b2 * c2 + h2 / (2.0 * b2 * mw2) * s2;
    let dp = h2 / (2.0 * b2) * c2 + 0.5 * b2 * mw2 * s2;
    (dq, dp)
}

/// Free-particle `D_Q(t)` in the quoted closed form `(b²/2)(1 + ħ²t⁴/(m²b⁴))`.
/// Propagating `Q_t = Q₀ - (t²/2m)P₀` gives `(b²/2)(1 + ħ²t⁴/(4m²b⁴))`
/// instead; both are reported by the free-particle command.
pub fn free_disp_q_printed(packet: &GaussianPacket, m: f64, t: f64) -> f64 {
    let b2 = packet.b * packet.b;
    0.5 * b2 * (1.0 + packet.hbar.powi(2) * t.powi(4) / (m * m * b2 * b2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_examples() {
        let r = initial_moments(&GaussianPacket::new(0.0, 0.0, 1.0, 1.0).unwrap());
        assert_eq!((r.mean_q, r.mean_p, r.disp_q, r.disp_p, r.uncertainty_product), (0.0, 0.0, 0.5, 0.5, 0.25));
        let r = initial_moments(&GaussianPacket::new(1.0, 2.0, 1.0, 1.0).unwrap());
        assert_eq!((r.mean_q, r.mean_p), (1.0, 2.0));
        let r = initial_moments(&GaussianPacket::new(0.0, 0.0, 2.0, 1.0).unwrap());
        assert_eq!((r.disp_q, r.disp_p), (2.0, 0.125));
    }

    #[test]
    fn wavefunction_moments_match() {
        let p = GaussianPacket::new(0.3, 0.0, 1.7, 1.0).unwrap();
        let (mut n, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let h = 1e-3;
        for i in -20_000..=20_000 {
            let x = i as f64 * h;
            let w = p.wavefunction(x).norm_sqr() * h;
            n += w;
            m1 += w * x;
            m2 += w * x * x;
        }
        assert!((n - 1.0).abs() < 1e-12);
        assert!((m2 - m1 * m1 - 0.5 * 1.7 * 1.7).abs() < 1e-10);
    }

    #[test]
    fn free_particle_dispersion_forms_differ_by_four() {
        let p = GaussianPacket::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let coeffs = SolutionCoeffs { m: [[1.0, -0.5], [0.0, 1.0]] };
        let r = evolve_moments(&p, &coeffs);
        assert_eq!(r.mean_q, -0.5);
        assert_eq!(r.disp_q, 0.5 * (1.0 + 0.25));
        assert_eq!(free_disp_q_printed(&p, 1.0, 1.0), 0.5 * (1.0 + 1.0));
    }
}
