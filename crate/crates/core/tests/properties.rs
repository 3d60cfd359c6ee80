use frachq::kernel::{eval_kernel, integrate_kernel, FractionalOrder, KernelConfig, TailModel};
use frachq::models::{oscillator_envelope, EnvelopeMode, SolutionCoeffs};
use frachq::spectral::{
    duality_check, eigendecompose, fractional_heisenberg_evolve, fractional_vonneumann_evolve, max_abs_diff,
    random_density, random_hermitian, HermitianOperator,
};
use frachq::states::{evolve_moments, GaussianPacket};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn alpha() -> impl Strategy<Value = f64> {
    0.1f64..0.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn self_similarity(a in alpha(), t in 0.2f64..5.0, s in 0.05f64..50.0) {
        let cfg = KernelConfig::default();
        let o = FractionalOrder::new(a).unwrap();
        let sigma = t.powf(1.0 / a);
        let lhs = eval_kernel(o, t, s, &cfg).unwrap();
        let rhs = eval_kernel(o, 1.0, s / sigma, &cfg).unwrap() / sigma;
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-10), "{lhs:e} {rhs:e}");
    }

    #[test]
    fn kernel_is_nonnegative(a in alpha(), t in 0.01f64..10.0, s in 0.0f64..1e3) {
        let v = eval_kernel(FractionalOrder::new(a).unwrap(), t, s, &KernelConfig::default()).unwrap();
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn weighted_integral_is_linear(a in alpha(), p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let cfg = KernelConfig::default();
        let o = FractionalOrder::new(a).unwrap();
        let tail = TailModel::Exponentials { rates: vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)] };
        let both = integrate_kernel(o, 1.0, |s| p * (-s).exp() + q * Complex64::new(0.0, s).exp(), &tail, &cfg).unwrap();
        let e1 = integrate_kernel(o, 1.0, |s| Complex64::new((-s).exp(), 0.0), &tail, &cfg).unwrap();
        let e2 = integrate_kernel(o, 1.0, |s| Complex64::new(0.0, s).exp(), &tail, &cfg).unwrap();
        prop_assert!((both.value - (p * e1.value + q * e2.value)).norm() < 1e-10);
    }

    #[test]
    fn spectral_semigroup(seed in any::<u64>(), a in alpha(), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % 3) as usize;
        let spec = eigendecompose(&random_hermitian(n, &mut rng), 1.0).unwrap();
        let x = random_hermitian(n, &mut rng);
        let o = FractionalOrder::new(a).unwrap();
        let direct = fractional_heisenberg_evolve(&spec, &x, o, t1 + t2).unwrap();
        let step = fractional_heisenberg_evolve(&spec, &x, o, t2).unwrap();
        let composed = fractional_heisenberg_evolve(&spec, &step, o, t1).unwrap();
        prop_assert!(max_abs_diff(composed.entries(), direct.entries()) < 1e-10);
    }

    #[test]
    fn evolution_preserves_hermiticity_and_states(seed in any::<u64>(), a in alpha(), t in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = eigendecompose(&random_hermitian(3, &mut rng), 1.0).unwrap();
        let x = random_hermitian(3, &mut rng);
        let rho = random_density(3, &mut rng);
        let o = FractionalOrder::new(a).unwrap();
        let xt = fractional_heisenberg_evolve(&spec, &x, o, t).unwrap();
        let m = xt.entries();
        prop_assert!(max_abs_diff(m, &m.adjoint()) <= 1e-12);
        let r = fractional_vonneumann_evolve(&spec, &rho, o, t).unwrap();
        prop_assert!((r.trace() - 1.0).abs() < 1e-13);
        prop_assert!(r.min_eigenvalue().unwrap() >= -1e-10);
        let (l, rr) = duality_check(&spec, &rho, &x, o, t).unwrap();
        prop_assert!((l - rr).abs() <= 1e-10);
    }

    #[test]
    fn fractional_identity_is_fixed(seed in any::<u64>(), a in alpha(), t in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = eigendecompose(&random_hermitian(3, &mut rng), 1.0).unwrap();
        let id = HermitianOperator::identity(3);
        let r = fractional_heisenberg_evolve(&spec, &id, FractionalOrder::new(a).unwrap(), t).unwrap();
        prop_assert!(max_abs_diff(r.entries(), id.entries()) < 1e-13);
    }

    #[test]
    fn envelope_modulus_decreases(a in 0.1f64..0.95, t in 0.0f64..5.0, dt in 0.01f64..2.0) {
        let cfg = KernelConfig::default();
        let o = FractionalOrder::new(a).unwrap();
        let e0 = oscillator_envelope(o, 1.0, t, EnvelopeMode::ClosedForm, &cfg).unwrap();
        let e1 = oscillator_envelope(o, 1.0, t + dt, EnvelopeMode::ClosedForm, &cfg).unwrap();
        prop_assert!(e1.modulus_sq() < e0.modulus_sq());
    }

    #[test]
    fn means_are_linear_in_initial_data(x0 in -5.0f64..5.0, p0 in -5.0f64..5.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let c = SolutionCoeffs { m: [[a, b], [-b, a]] };
        let m1 = evolve_moments(&GaussianPacket::new(x0, p0, 1.0, 1.0).unwrap(), &c);
        let m2 = evolve_moments(&GaussianPacket::new(2.0 * x0, 2.0 * p0, 1.0, 1.0).unwrap(), &c);
        prop_assert!((m2.mean_q - 2.0 * m1.mean_q).abs() <= 1e-12 * (1.0 + m1.mean_q.abs()));
        prop_assert!((m2.mean_p - 2.0 * m1.mean_p).abs() <= 1e-12 * (1.0 + m1.mean_p.abs()));
        prop_assert_eq!(m1.disp_q, m2.disp_q);
    }
}
