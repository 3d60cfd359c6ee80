//! `Φ_{t₁} ∘ Φ_{t₂} = Φ_{t₁+t₂}` for the fractional Heisenberg flow, checked
//! spectrally and by nested kernel averages.

use frachq::kernel::{FractionalOrder, KernelConfig};
use frachq::spectral::{
    eigendecompose, fractional_heisenberg_evolve, heisenberg_trajectory, max_abs_diff, random_hermitian,
    HermitianOperator,
};
use frachq::subordinator::subordinate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), frachq::error::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_hermitian(3, &mut rng);
    let a = random_hermitian(3, &mut rng);
    let spec = eigendecompose(&h, 1.0)?;
    let order = FractionalOrder::new(0.7)?;
    let cfg = KernelConfig::default();
    let (t1, t2) = (0.4, 0.9);

    let direct = fractional_heisenberg_evolve(&spec, &a, order, t1 + t2)?;
    let step = fractional_heisenberg_evolve(&spec, &a, order, t2)?;
    let composed = fractional_heisenberg_evolve(&spec, &step, order, t1)?;
    println!("spectral   |Φ_t1 Φ_t2 - Φ_(t1+t2)| = {:.2e}", max_abs_diff(composed.entries(), direct.entries()));

    let inner = subordinate(order, t2, &heisenberg_trajectory(&spec, &a)?, &cfg)?;
    let inner = HermitianOperator::new(inner.value)?;
    let outer = subordinate(order, t1, &heisenberg_trajectory(&spec, &inner)?, &cfg)?;
    println!("quadrature |Φ_t1 Φ_t2 - Φ_(t1+t2)| = {:.2e}", max_abs_diff(&outer.value, direct.entries()));
    Ok(())
}
