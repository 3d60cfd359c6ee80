//! Damped oscillator envelopes `C_α`, `S_α` from the closed form, the
//! quadrature route and, at `α = 1/2`, the Macdonald form.

use frachq::kernel::{FractionalOrder, KernelConfig};
use frachq::models::{damping_rate, oscillator_envelope, oscillator_envelope_macdonald_half, EnvelopeMode};

fn main() -> Result<(), frachq::error::Error> {
    let cfg = KernelConfig::default();
    for alpha in [0.3, 0.5, 0.9] {
        let order = FractionalOrder::new(alpha)?;
        println!("alpha = {alpha}, damping rate {:.6}", damping_rate(order, 1.0));
        for t in [0.5, 1.0, 2.0, 4.0] {
            let c = oscillator_envelope(order, 1.0, t, EnvelopeMode::ClosedForm, &cfg)?;
            let q = oscillator_envelope(order, 1.0, t, EnvelopeMode::Quadrature, &cfg)?;
            println!(
                "  t={t:<4} C={:+.10} S={:+.10}  quadrature diff {:.1e}",
                c.c,
                c.s,
                (c.c - q.c).abs().max((c.s - q.s).abs())
            );
        }
    }
    let m = oscillator_envelope_macdonald_half(1.0, 1.0)?;
    println!("Macdonald form at alpha=1/2, t=1: C={:.12} S={:.12}", m.c, m.s);
    Ok(())
}
