//! Tabulates `f_α(1, s)` for a few orders by the contour and positive routes.
//!
//! ```text
//! cargo run --example kernel_table
//! ```

use frachq::kernel::{eval_kernel, eval_kernel_positive, FractionalOrder, KernelConfig};

fn main() -> Result<(), frachq::error::Error> {
    let cfg = KernelConfig::default();
    println!("{:>6} {:>10} {:>22} {:>22}", "alpha", "s", "contour", "positive");
    for alpha in [0.25, 0.5, 0.75] {
        let order = FractionalOrder::new(alpha)?;
        for s in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let a = eval_kernel(order, 1.0, s, &cfg)?;
            let b = eval_kernel_positive(order, 1.0, s)?;
            println!("{alpha:>6} {s:>10} {a:>22.15e} {b:>22.15e}");
        }
    }
    Ok(())
}
