//! Checks `∫ f_α(t,s) e^{-zs} ds = exp(-t z^α)` at real, complex and
//! imaginary `z`.

use frachq::kernel::{laplace_check, FractionalOrder, KernelConfig};
use num_complex::Complex64;

fn main() -> Result<(), frachq::error::Error> {
    let cfg = KernelConfig::default();
    let zs = [Complex64::new(0.5, 0.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, -1.0)];
    for alpha in [0.3, 0.7] {
        let order = FractionalOrder::new(alpha)?;
        for z in zs {
            let p = laplace_check(order, 1.0, z, &cfg)?;
            println!(
                "alpha={alpha} z={z}: quadrature {:.12} closed {:.12} |diff| {:.2e}",
                p.lhs,
                p.rhs,
                (p.lhs - p.rhs).norm()
            );
        }
    }
    Ok(())
}
