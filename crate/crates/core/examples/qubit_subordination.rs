//! Fractional Heisenberg evolution of `σ_x` under `H = σ_z/2`, computed
//! spectrally and by averaging the unitary trajectory over the kernel.

use frachq::kernel::{FractionalOrder, KernelConfig};
use frachq::spectral::{
    eigendecompose, fractional_heisenberg_evolve, heisenberg_trajectory, max_abs_diff, sigma_x, sigma_z,
    HermitianOperator,
};
use frachq::subordinator::subordinate;
use num_complex::Complex64;

fn main() -> Result<(), frachq::error::Error> {
    let h = HermitianOperator::new(sigma_z().into_inner() * Complex64::new(0.5, 0.0))?;
    let spec = eigendecompose(&h, 1.0)?;
    let order = FractionalOrder::half();
    let traj = heisenberg_trajectory(&spec, &sigma_x())?;
    for t in [0.5, 1.0, 2.0] {
        let a = fractional_heisenberg_evolve(&spec, &sigma_x(), order, t)?;
        let b = subordinate(order, t, &traj, &KernelConfig::default())?;
        println!("t = {t}");
        println!("  spectral     A_01 = {:.10}", a.entries()[(0, 1)]);
        println!("  subordinated A_01 = {:.10} (err est {:.1e})", b.value[(0, 1)], b.err_estimate);
        println!("  max |diff| = {:.2e}", max_abs_diff(a.entries(), &b.value));
    }
    Ok(())
}
