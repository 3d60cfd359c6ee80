//! The free-particle moment `g_α(t)`: the two half-order assignments and the
//! truncated integral with its divergence diagnostics.

use frachq::kernel::{FractionalOrder, KernelConfig};
use frachq::models::{free_particle_coeffs, free_particle_g, FreeMode};
use frachq::states::{evolve_moments, free_disp_q_printed, GaussianPacket};

fn main() -> Result<(), frachq::error::Error> {
    let cfg = KernelConfig::default();
    let half = FractionalOrder::half();
    let packet = GaussianPacket::new(0.0, 1.0, 1.0, 1.0)?;
    for mode in [FreeMode::PaperHalf, FreeMode::RegularizedHalf] {
        let (coeffs, diag) = free_particle_coeffs(half, 1.0, 1.0, mode, &cfg)?;
        let m = evolve_moments(&packet, &coeffs);
        println!(
            "{mode:?}: mean_q={} D_Q={} (quoted closed form {})",
            m.mean_q,
            m.disp_q,
            free_disp_q_printed(&packet, 1.0, 1.0)
        );
        println!("  {}", diag.note);
    }
    for s_max in [1e4, 1e6, 1e8] {
        let (g, diag) = free_particle_g(half, 1.0, FreeMode::TruncatedNumeric { s_max: Some(s_max) }, &cfg)?;
        println!(
            "truncated at {s_max:e}: partial g = {g:.6}, growth exponent {:.6}",
            diag.measured_exponent.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
