//! Globally adaptive Gauss-Kronrod (10/21) quadrature over scalar and
//! vector-valued integrands.
//!
//! Vector integrands share one set of nodes, so every component of a matrix
//! trajectory is integrated against identical kernel samples. Errors are
//! measured in the max-norm over components.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

/// Values that can be accumulated by the quadrature engine.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, w: f64, x: &Self);
    /// Max-norm over components.
    fn norm(&self) -> f64;

    fn dist(&self, other: &Self) -> f64 {
        let mut d = self.clone();
        d.add_scaled(-1.0, other);
        d.norm()
    }
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        *self += w * x;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        *self += x * w;
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl QuadValue for Vec<Complex64> {
    fn zero_like(&self) -> Self {
        vec![Complex64::new(0.0, 0.0); self.len()]
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        debug_assert_eq!(self.len(), x.len());
        for (a, b) in self.iter_mut().zip(x) {
            *a += b * w;
        }
    }
    fn norm(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One application of the 21-point Kronrod rule on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Panel<V> {
    pub a: f64,
    pub b: f64,
    pub value: V,
    pub err: f64,
    /// Integral of the max-norm of the integrand (cancellation indicator).
    pub l1: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

pub fn gk21<V, F>(f: &mut F, a: f64, b: f64) -> Panel<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc.zero_like();
    let mut gauss = fc.zero_like();
    kron.add_scaled(WGK[10], &fc);
    let mut res_abs = WGK[10] * fc.norm();

    let mut samples: Vec<(V, V)> = Vec::with_capacity(10);
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron.add_scaled(WGK[j], &f1);
        kron.add_scaled(WGK[j], &f2);
        if j % 2 == 1 {
            gauss.add_scaled(WG[j / 2], &f1);
            gauss.add_scaled(WG[j / 2], &f2);
        }
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        samples.push((f1, f2));
    }

    let mut mean = kron.clone();
    mean.add_scaled(-0.5, &kron);
    let mut res_asc = WGK[10] * fc.dist(&mean);
    for (j, (f1, f2)) in samples.iter().enumerate() {
        res_asc += WGK[j] * (f1.dist(&mean) + f2.dist(&mean));
    }

    let raw_err = kron.dist(&gauss) * half.abs();
    let mut value = kron.zero_like();
    value.add_scaled(half, &kron);
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    Panel { a, b, value, err: rescale_error(raw_err, res_abs, res_asc), l1: res_abs }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Integral<V> {
    pub value: V,
    pub err: f64,
    pub l1: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Queued<V>(Panel<V>);

impl<V> PartialEq for Queued<V> {
    fn eq(&self, other: &Self) -> bool {
        self.0.err == other.0.err
    }
}
impl<V> Eq for Queued<V> {}
impl<V> PartialOrd for Queued<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Queued<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Ties broken by position so the refinement order is reproducible.
        self.0.err.total_cmp(&other.0.err).then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

/// Globally adaptive integration over the panels defined by `breaks`.
///
/// `tolerance` maps the current estimate to the absolute error target.
/// Bisects the worst panel until the summed error meets the target or the
/// panel count reaches `max_intervals`. Non-convergence is reported through
/// [`Integral::converged`], never by panicking.
pub fn integrate<V, F, T>(mut f: F, breaks: &[f64], tolerance: T, max_intervals: usize) -> Integral<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
    T: Fn(&V) -> f64,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel<V>> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(Queued(gk21(&mut f, w[0], w[1])));
        }
    }
    if heap.is_empty() {
        let z = f(breaks[0]).zero_like();
        return Integral { value: z, err: 0.0, l1: 0.0, intervals: 0, converged: true };
    }

    let totals = |heap: &BinaryHeap<Queued<V>>, frozen: &[Panel<V>]| {
        let mut it = heap.iter().map(|q| &q.0).chain(frozen.iter());
        let first = it.next().expect("nonempty");
        let mut v = first.value.clone();
        let mut e = first.err;
        let mut l = first.l1;
        for p in it {
            v.add_scaled(1.0, &p.value);
            e += p.err;
            l += p.l1;
        }
        (v, e, l)
    };

    loop {
        let (value, err, l1) = totals(&heap, &frozen);
        let count = heap.len() + frozen.len();
        let target = tolerance(&value);
        if err <= target || count >= max_intervals || heap.is_empty() {
            return Integral { value, err, l1, intervals: count, converged: err <= target };
        }
        // Refine in batches so the bookkeeping stays linear.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(Queued(worst)) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * worst.a.abs().max(worst.b.abs()) {
                frozen.push(worst);
                continue;
            }
            heap.push(Queued(gk21(&mut f, worst.a, mid)));
            heap.push(Queued(gk21(&mut f, mid, worst.b)));
            if heap.len() + frozen.len() >= max_intervals {
                break;
            }
        }
    }
}

/// Scalar convenience wrapper with the usual `max(abs_tol, rel_tol·|I|)` target.
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_intervals: usize) -> Integral<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(f, &[a, b], |v: &f64| abs_tol.max(rel_tol * v.abs()), max_intervals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate_scalar(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 1e-12, 10);
        assert!(r.value.abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn endpoint_singularity_refines() {
        let r = integrate_scalar(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-12, 1e-12, 400);
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn vector_components_share_nodes() {
        let r = integrate(
            |x: f64| vec![Complex64::new(x.cos(), x.sin()), Complex64::new(1.0, 0.0)],
            &[0.0, 1.0, 2.0],
            |_| 1e-13,
            100,
        );
        assert!((r.value[0] - Complex64::new(2f64.sin(), 1.0 - 2f64.cos())).norm() < 1e-12);
        assert!((r.value[1].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exhaustion_is_reported() {
        let r = integrate_scalar(|x: f64| (1.0 / x).sin(), 1e-9, 1.0, 1e-15, 0.0, 4);
        assert!(!r.converged);
        assert!(r.intervals <= 5);
    }
}
