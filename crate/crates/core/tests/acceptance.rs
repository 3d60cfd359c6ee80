//! Acceptance run: one line per criterion with its residual and wall time.
//! Exits nonzero if any attainable criterion fails.

use std::time::{Duration, Instant};

use frachq::cli::{run, run_suite, Level};
use frachq::kernel::{
    eval_kernel, eval_kernel_closed_half, integrate_kernel, laplace_check, FractionalOrder, KernelConfig, TailModel,
};
use frachq::models::{
    free_particle_coeffs, free_particle_g, oscillator_envelope, oscillator_envelope_macdonald_half, EnvelopeMode,
    FreeMode, OscillatorParams,
};
use frachq::spectral::{
    duality_check, eigendecompose, fractional_heisenberg_evolve, fractional_vonneumann_evolve, heisenberg_trajectory,
    max_abs_diff, random_density, random_hermitian, HermitianOperator,
};
use frachq::states::{evolve_moments, oscillator_dispersions, GaussianPacket};
use frachq::subordinator::subordinate;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Res<T> = Result<T, frachq::error::Error>;
type Criterion<'a> = (u32, &'static str, f64, Box<dyn Fn() -> Res<Outcome> + 'a>);

const ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

enum Verdict {
    Pass,
    Fail,
    /// The stated reference value itself is off; reported, not counted.
    Unattainable,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn c1(cfg: &KernelConfig) -> Res<Outcome> {
    let mut worst = 0.0f64;
    for a in ALPHAS {
        for t in [0.1, 1.0, 10.0] {
            let one = |_: f64| Complex64::new(1.0, 0.0);
            let r = integrate_kernel(FractionalOrder::new(a)?, t, one, &TailModel::Bounded { bound: 1.0 }, cfg)?;
            worst = worst.max((r.value - 1.0).norm());
        }
    }
    Ok(outcome(worst <= 1e-8, format!("max |∫f - 1| = {worst:.2e} (tol 1e-8)")))
}

fn c2(cfg: &KernelConfig) -> Res<Outcome> {
    let mut worst = 0.0f64;
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for s in [0.05, 0.2, 1.0, 5.0, 25.0] {
            let q = eval_kernel(FractionalOrder::half(), t, s, cfg)?;
            let c = eval_kernel_closed_half(t, s)?;
            worst = worst.max((q - c).abs() / c);
        }
    }
    Ok(outcome(worst <= 1e-8, format!("max relative error {worst:.2e} on 5x5 grid (tol 1e-8)")))
}

fn c3(cfg: &KernelConfig) -> Res<Outcome> {
    let zs = [
        Complex64::new(0.5, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut worst = 0.0f64;
    for a in ALPHAS {
        for t in [0.1, 1.0, 10.0] {
            for z in zs {
                let p = laplace_check(FractionalOrder::new(a)?, t, z, cfg)?;
                worst = worst.max((p.lhs - p.rhs).norm());
            }
        }
    }
    Ok(outcome(worst <= 1e-7, format!("max |lhs - rhs| = {worst:.2e} over 75 cases (tol 1e-7)")))
}

fn c4(cfg: &KernelConfig) -> Res<Outcome> {
    let mut agree = 0.0f64;
    for a in ALPHAS {
        for t in [0.25, 1.0, 3.0] {
            let o = FractionalOrder::new(a)?;
            let q = oscillator_envelope(o, 1.0, t, EnvelopeMode::Quadrature, cfg)?;
            let c = oscillator_envelope(o, 1.0, t, EnvelopeMode::ClosedForm, cfg)?;
            agree = agree.max((q.c - c.c).abs()).max((q.s - c.s).abs());
        }
    }
    let half = FractionalOrder::half();
    let q = oscillator_envelope(half, 1.0, 1.0, EnvelopeMode::Quadrature, cfg)?;
    let c = oscillator_envelope(half, 1.0, 1.0, EnvelopeMode::ClosedForm, cfg)?;
    let m = oscillator_envelope_macdonald_half(1.0, 1.0)?;
    let macdonald = (m.c - c.c).abs().max((m.s - c.s).abs());

    // Independent value: e^{-1/√2} (cos, sin)(1/√2).
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (exact_c, exact_s) = ((-r).exp() * r.cos(), (-r).exp() * r.sin());
    let vs_exact =
        [q.c - exact_c, q.s - exact_s, c.c - exact_c, c.s - exact_s].iter().fold(0.0f64, |w, d| w.max(d.abs()));
    let (lit_c, lit_s) = (0.3748529, 0.3203230);
    let vs_literal = [q.c - lit_c, q.s - lit_s, c.c - lit_c, c.s - lit_s].iter().fold(0.0f64, |w, d| w.max(d.abs()));

    let core = agree <= 1e-6 && macdonald <= 1e-12 && vs_exact <= 1e-6;
    let detail = format!(
        "quadrature vs closed {agree:.2e} (tol 1e-6); Macdonald {macdonald:.2e} (tol 1e-12); \
         (C,S)(1) = ({:.7}, {:.7}), vs e^(-1/sqrt2)(cos,sin) {vs_exact:.2e}; vs stated (0.3748529, 0.3203230) {vs_literal:.2e} (tol 1e-6)",
        c.c, c.s
    );
    let verdict = match (core, vs_literal <= 1e-6) {
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Unattainable,
        _ => Verdict::Fail,
    };
    Ok(Outcome { verdict, detail })
}

fn c5(cfg: &KernelConfig) -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for i in 0..20 {
        let n = [2, 3, 4][i % 3];
        let spec = eigendecompose(&random_hermitian(n, &mut rng), 1.0)?;
        let a = random_hermitian(n, &mut rng);
        let traj = heisenberg_trajectory(&spec, &a)?;
        for alpha in [0.3, 0.5, 0.8] {
            let o = FractionalOrder::new(alpha)?;
            for t in [0.5, 2.0] {
                let s = fractional_heisenberg_evolve(&spec, &a, o, t)?;
                let q = subordinate(o, t, &traj, cfg)?;
                worst = worst.max(max_abs_diff(s.entries(), &q.value));
                cases += 1;
            }
        }
    }
    Ok(outcome(worst <= 1e-6, format!("max-norm difference {worst:.2e} over {cases} cases (tol 1e-6)")))
}

fn c6() -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut herm, mut trace, mut min_eig, mut dual) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for i in 0..50 {
        let spec = eigendecompose(&random_hermitian(3, &mut rng), 1.0)?;
        let a = random_hermitian(3, &mut rng);
        let rho = random_density(3, &mut rng);
        let o = FractionalOrder::new([0.3, 0.5, 0.8][i % 3])?;
        for t in [0.3, 1.0, 4.0] {
            let at = fractional_heisenberg_evolve(&spec, &a, o, t)?;
            herm = herm.max(max_abs_diff(at.entries(), &at.entries().adjoint()));
            let r = fractional_vonneumann_evolve(&spec, &rho, o, t)?;
            herm = herm.max(max_abs_diff(r.entries(), &r.entries().adjoint()));
            trace = trace.max((r.trace() - rho.trace()).abs());
            min_eig = min_eig.min(r.min_eigenvalue()?);
            let (l, rr) = duality_check(&spec, &rho, &a, o, t)?;
            dual = dual.max((l - rr).abs());
        }
    }
    // Trace: populations are untouched in the eigenbasis, so only rounding remains.
    let ok = herm <= 1e-12 && trace <= 1e-14 && min_eig >= -1e-10 && dual <= 1e-10;
    Ok(outcome(
        ok,
        format!("hermiticity {herm:.1e} (1e-12); trace drift {trace:.1e} (rounding); min eig {min_eig:.3e} (>= -1e-10); duality {dual:.1e} (1e-10)"),
    ))
}

fn c7(cfg: &KernelConfig) -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut spectral, mut quad) = (0.0f64, 0.0f64);
    for (i, alpha) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let n = 2 + i;
        let spec = eigendecompose(&random_hermitian(n, &mut rng), 1.0)?;
        let a = random_hermitian(n, &mut rng);
        let o = FractionalOrder::new(alpha)?;
        let (t1, t2) = (0.7, 1.1);
        let direct = fractional_heisenberg_evolve(&spec, &a, o, t1 + t2)?;
        let step = fractional_heisenberg_evolve(&spec, &a, o, t2)?;
        let composed = fractional_heisenberg_evolve(&spec, &step, o, t1)?;
        spectral = spectral.max(max_abs_diff(composed.entries(), direct.entries()));

        let inner = subordinate(o, t2, &heisenberg_trajectory(&spec, &a)?, cfg)?;
        let inner = HermitianOperator::new(inner.value)?;
        let outer = subordinate(o, t1, &heisenberg_trajectory(&spec, &inner)?, cfg)?;
        let once = subordinate(o, t1 + t2, &heisenberg_trajectory(&spec, &a)?, cfg)?;
        quad = quad.max(max_abs_diff(&outer.value, &once.value));
    }
    Ok(outcome(
        spectral <= 1e-10 && quad <= 1e-5,
        format!("spectral {spectral:.2e} (tol 1e-10); quadrature {quad:.2e} (tol 1e-5)"),
    ))
}

fn c8(cfg: &KernelConfig) -> Res<Outcome> {
    let half = FractionalOrder::half();
    let mut mean_err = 0.0f64;
    for (x0, p0, m, t) in [(0.0, 1.0, 1.0, 1.0), (1.5, -2.0, 0.7, 2.3), (-0.3, 0.4, 3.0, 0.5)] {
        let packet = GaussianPacket::new(x0, p0, 1.0, 1.0)?;
        let (coeffs, _) = free_particle_coeffs(half, t, m, FreeMode::RegularizedHalf, cfg)?;
        let q = evolve_moments(&packet, &coeffs).mean_q;
        let want = x0 - t * t / (2.0 * m) * p0;
        mean_err = mean_err.max((q - want).abs() / want.abs().max(1.0));
    }
    let mut paper = 0.0f64;
    for t in [0.5, 1.0, 2.0, 3.0] {
        let (g, _) = free_particle_g(half, t, FreeMode::PaperHalf, cfg)?;
        paper = paper.max((g - t * t / 2.0).abs());
    }
    let (_, diag) = free_particle_g(half, 1.0, FreeMode::TruncatedNumeric { s_max: Some(1e8) }, cfg)?;
    let exponent = diag.measured_exponent.unwrap_or(f64::NAN);
    let ok = mean_err <= 4.0 * f64::EPSILON && paper == 0.0 && diag.divergent && (exponent - 0.5).abs() < 1e-3;
    Ok(outcome(
        ok,
        format!(
            "mean_q vs x0 - t^2 p0/(2m) {mean_err:.1e} (rounding); paper-half g - t^2/2 = {paper:.1e}; divergent = {}, growth exponent {exponent:.6} (sqrt: 0.5)",
            diag.divergent
        ),
    ))
}

fn c9(cfg: &KernelConfig) -> Res<Outcome> {
    let mut formula = 0.0f64;
    for (m, omega, hbar, b, alpha, t) in
        [(1.0, 1.0, 1.0, 1.0, 0.5, 1.0), (2.0, 0.5, 0.8, 1.3, 0.3, 2.0), (0.7, 3.0, 1.0, 0.6, 0.8, 0.4)]
    {
        let params = OscillatorParams::new(m, omega, hbar)?;
        let packet = GaussianPacket::new(0.2, -0.4, b, hbar)?;
        let env = oscillator_envelope(FractionalOrder::new(alpha)?, omega, t, EnvelopeMode::ClosedForm, cfg)?;
        let coeffs = frachq::models::coeffs_from_envelope(&params, &env);
        let r = evolve_moments(&packet, &coeffs);
        let (dq, dp) = oscillator_dispersions(&packet, &params, &env);
        formula = formula.max((r.disp_q - dq).abs()).max((r.disp_p - dp).abs());
    }
    let params = OscillatorParams::new(1.0, 1.0, 1.0)?;
    let packet = GaussianPacket::new(1.0, 1.0, 1.0, 1.0)?;
    let env = oscillator_envelope(FractionalOrder::half(), 1.0, 1.0, EnvelopeMode::ClosedForm, cfg)?;
    let (dq, dp) = oscillator_dispersions(&packet, &params, &env);
    let value = (dq - 0.121561).abs().max((dp - 0.121561).abs());
    Ok(outcome(
        formula <= 1e-12 && value <= 1e-5,
        format!("propagated vs written-out dispersions {formula:.1e} (tol 1e-12); D_Q = D_P = {dq:.7} vs 0.121561 ({value:.1e}, tol 1e-5)"),
    ))
}

fn c10() -> Res<Outcome> {
    let quick = run_suite(Level::Quick, &KernelConfig::default());
    let quick_ok = quick.iter().all(|o| o.passed);
    let runs: [&[&str]; 3] = [
        &["kernel", "--alpha", "0.3", "--s-start", "0", "--s-stop", "20", "--s-count", "201"],
        &["oscillator", "--alpha", "0.5", "--t-count", "101"],
        &["matrix-evolve", "--preset", "qubit", "--alpha", "0.7", "--t-count", "41", "--method", "subordination"],
    ];
    let mut identical = true;
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let mut out = Vec::new();
            let mut err = Vec::new();
            let argv = ["frachq"].into_iter().chain(args.iter().copied()).chain(["--threads", threads]);
            let code = run(argv, &mut out, &mut err);
            identical &= code == 0;
            outputs.push(out);
        }
        identical &= outputs[0] == outputs[1];
    }
    Ok(outcome(
        quick_ok && identical,
        format!(
            "quick suite {} ({} checks); CSV byte-identical at 1 and 4 threads: {identical}",
            if quick_ok { "passed" } else { "failed" },
            quick.len()
        ),
    ))
}

fn main() {
    let cfg = KernelConfig::default();
    let criteria: Vec<Criterion> = vec![
        (1, "kernel normalization", 5.0, Box::new(|| c1(&cfg))),
        (2, "half-order closed form", 2.0, Box::new(|| c2(&cfg))),
        (3, "Laplace identity", 5.0, Box::new(|| c3(&cfg))),
        (4, "oscillator envelopes", 5.0, Box::new(|| c4(&cfg))),
        (5, "spectral vs subordination", 30.0, Box::new(|| c5(&cfg))),
        (6, "state-space properties", 20.0, Box::new(c6)),
        (7, "semigroup", 10.0, Box::new(|| c7(&cfg))),
        (8, "free particle", 2.0, Box::new(|| c8(&cfg))),
        (9, "oscillator statistics", 2.0, Box::new(|| c9(&cfg))),
        (10, "CLI determinism", 15.0, Box::new(c10)),
    ];
    let mut failures = 0;
    for (id, name, budget, f) in &criteria {
        let start = Instant::now();
        let r = f();
        let elapsed = start.elapsed();
        let within = elapsed <= Duration::from_secs_f64(*budget);
        let (status, detail) = match r {
            Ok(o) => {
                let status = match (o.verdict, within) {
                    (Verdict::Pass, true) => "PASS",
                    (Verdict::Unattainable, true) => "FAIL (reference value unattainable, not counted)",
                    _ => {
                        failures += 1;
                        "FAIL"
                    }
                };
                (status, o.detail)
            }
            Err(e) => {
                failures += 1;
                ("FAIL", format!("error: {e}"))
            }
        };
        println!("criterion {id:>2} {status} [{:.3} s / {budget} s] {name}: {detail}", elapsed.as_secs_f64());
    }
    println!("acceptance: {} criteria, {failures} failed", criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
