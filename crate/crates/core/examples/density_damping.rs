//! Fractional von Neumann evolution of a random qutrit state: coherences
//! decay, populations stay put, trace and positivity are preserved.

use frachq::kernel::FractionalOrder;
use frachq::spectral::{duality_check, eigendecompose, fractional_vonneumann_evolve, random_density, random_hermitian};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), frachq::error::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_hermitian(3, &mut rng);
    let a = random_hermitian(3, &mut rng);
    let rho = random_density(3, &mut rng);
    let spec = eigendecompose(&h, 1.0)?;
    let order = FractionalOrder::new(0.6)?;
    for t in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let r = fractional_vonneumann_evolve(&spec, &rho, order, t)?;
        let coherence = spec.to_eigenbasis(r.entries());
        let off: f64 = (0..3)
            .flat_map(|j| (0..3).map(move |k| (j, k)))
            .filter(|(j, k)| j != k)
            .map(|jk| coherence[jk].norm())
            .sum();
        let (l, rr) = duality_check(&spec, &rho, &a, order, t)?;
        println!(
            "t={t:<4} trace={:.15} min_eig={:+.3e} coherence={off:.6} duality gap={:.1e}",
            r.trace(),
            r.min_eigenvalue()?,
            (l - rr).abs()
        );
    }
    Ok(())
}
