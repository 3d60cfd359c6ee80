//! Gaussian packet statistics in the fractional oscillator: means spiral in,
//! dispersions and the uncertainty product shrink.

use frachq::kernel::{FractionalOrder, KernelConfig};
use frachq::models::{oscillator_coeffs, EnvelopeMode, OscillatorParams};
use frachq::states::{evolve_moments, GaussianPacket};

fn main() -> Result<(), frachq::error::Error> {
    let params = OscillatorParams::new(1.0, 1.0, 1.0)?;
    let packet = GaussianPacket::new(1.0, 0.0, 1.0, 1.0)?;
    let order = FractionalOrder::half();
    println!("{:>5} {:>12} {:>12} {:>12} {:>12} {:>12}", "t", "<Q>", "<P>", "D_Q", "D_P", "D_Q*D_P");
    for i in 0..=10 {
        let t = 0.5 * i as f64;
        let c = oscillator_coeffs(&params, order, t, EnvelopeMode::ClosedForm, &KernelConfig::default())?;
        let m = evolve_moments(&packet, &c);
        println!(
            "{t:>5} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8}",
            m.mean_q, m.mean_p, m.disp_q, m.disp_p, m.uncertainty_product
        );
    }
    Ok(())
}
