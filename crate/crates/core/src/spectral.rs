//! Finite-dimensional fractional Heisenberg and von Neumann evolutions.
//!
//! The commutator superoperator `L⁻_H A = (1/iħ)[H, A]` has eigenvalues
//! `λ_jk = -i ω_jk`, `ω_jk = (E_j - E_k)/ħ`, on the matrix units of the
//! energy eigenbasis. Its fractional power acts by the principal branch
//! `λ^α`, so in the eigenbasis
//!
//! ```text
//! Heisenberg:    Ã_jk ↦ Ã_jk exp(-t (-i ω_jk)^α)
//! von Neumann:   ρ̃_jk ↦ ρ̃_jk exp(-t (+i ω_jk)^α)
//! ```
//!
//! At `α = 1` the first map is `e^{iHt/ħ} A e^{-iHt/ħ}`. For `α < 1` both
//! damp coherences, since `Re (±iω)^α = |ω|^α cos(απ/2) > 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{principal_power, FractionalOrder};
use crate::subordinator::Trajectory;

const HERMITIAN_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * c(0.5, 0.0)
}

fn check_square(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::Domain("matrix must be at least 1×1".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Dense self-adjoint operator. Construction validates and symmetrizes.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_square(&entries)?;
        let defect = hermitian_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { entries: symmetrize(&entries) })
    }

    pub fn from_real(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|x| c(x, 0.0)))
    }

    /// Output of a map that preserves self-adjointness; stored as computed,
    /// so any defect is rounding only.
    pub(crate) fn from_evolved(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) }
    }
}

pub fn sigma_x() -> HermitianOperator {
    HermitianOperator::from_evolved(DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
    ))
}

pub fn sigma_y() -> HermitianOperator {
    HermitianOperator::from_evolved(DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
    ))
}

pub fn sigma_z() -> HermitianOperator {
    HermitianOperator::from_evolved(DMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    ))
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_square(&entries)?;
        let defect = hermitian_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:.3e})")));
        }
        let entries = symmetrize(&entries);
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensity(format!("trace {} differs from 1", tr.re)));
        }
        let min_ev = min_eigenvalue(&entries)?;
        if min_ev < -1e-10 {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_ev:.3e}")));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_evolved(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) * c(1.0 / n as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.entries)
    }
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(DVector<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or_else(|| Error::Eigensolver(format!("no convergence for a {n}×{n} matrix")))?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> Result<f64> {
    let (ev, _) = hermitian_eigen(m)?;
    Ok(ev.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Energies (ascending) and the unitary eigenbasis of `H`, plus `ħ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    energies: Vec<f64>,
    basis: DMatrix<Complex64>,
    hbar: f64,
}

impl Spectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    fn scale(&self) -> f64 {
        self.energies.iter().fold(0.0, |m: f64, e| m.max(e.abs()))
    }

    /// `ω_jk = (E_j - E_k)/ħ`, exactly 0 inside a degenerate level.
    pub fn frequency(&self, j: usize, k: usize) -> f64 {
        let d = self.energies[j] - self.energies[k];
        if d.abs() <= DEGENERACY_TOL * self.scale() {
            0.0
        } else {
            d / self.hbar
        }
    }

    /// Distinct transition frequencies, including 0.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out: Vec<f64> = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let w = self.frequency(j, k);
                if !out.iter().any(|v| (v - w).abs() <= 1e-12 * (1.0 + w.abs())) {
                    out.push(w);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn to_eigenbasis(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.basis.adjoint() * m * &self.basis
    }

    pub fn from_eigenbasis(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        &self.basis * m * self.basis.adjoint()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: n });
        }
        Ok(())
    }

    /// Multiplies entry `(j, k)` of `m`'s eigenbasis image by `factor(ω_jk)`.
    fn apply(&self, m: &DMatrix<Complex64>, factor: impl Fn(f64) -> Result<Complex64>) -> Result<DMatrix<Complex64>> {
        let mut tilde = self.to_eigenbasis(m);
        let n = self.dim();
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    tilde[(j, k)] *= factor(self.frequency(j, k))?;
                }
            }
        }
        Ok(self.from_eigenbasis(&tilde))
    }
}

/// Columns spanning the same space as `block`, fixed by projecting the unit
/// vectors `e_0, e_1, …` in order and orthonormalizing.
fn canonical_block(block: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = block.nrows();
    let k = block.ncols();
    let proj = block * block.adjoint();
    let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(k);
    let mut candidates: Vec<(f64, DVector<Complex64>)> = Vec::new();
    for i in 0..n {
        if chosen.len() == k {
            break;
        }
        let mut v = proj.column(i).into_owned();
        for q in &chosen {
            let overlap = q.dotc(&v);
            v -= q * overlap;
        }
        let norm = v.norm();
        if norm > 1e-3 {
            chosen.push(v / c(norm, 0.0));
        } else {
            candidates.push((norm, v));
        }
    }
    // Only reached when rounding leaves every remaining projection short.
    while chosen.len() < k {
        let mut best = (0.0, DVector::zeros(n));
        for (_, v) in &candidates {
            let mut w = v.clone();
            for q in &chosen {
                let overlap = q.dotc(&w);
                w -= q * overlap;
            }
            let nw = w.norm();
            if nw > best.0 {
                best = (nw, w);
            }
        }
        if best.0 == 0.0 {
            break;
        }
        let (nw, w) = best;
        chosen.push(w / c(nw, 0.0));
    }
    DMatrix::from_columns(&chosen)
}

/// Hermitian eigendecomposition with a deterministic basis: ascending
/// energies, and each (possibly degenerate) level's columns fixed by
/// [`canonical_block`].
pub fn eigendecompose(h: &HermitianOperator, hbar: f64) -> Result<Spectrum> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::Domain(format!("hbar = {hbar} must be positive")));
    }
    let n = h.dim();
    let (values, vectors) = hermitian_eigen(h.entries())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let energies: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted = DMatrix::from_columns(&order.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>());

    let scale = energies.iter().fold(0.0, |m: f64, e| m.max(e.abs()));
    let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && energies[end] - energies[end - 1] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        let block = sorted.columns(start, end - start).into_owned();
        let canon = canonical_block(&block);
        columns.extend(canon.column_iter().map(|c| c.into_owned()));
        start = end;
    }
    let basis = DMatrix::from_columns(&columns);
    Ok(Spectrum { energies, basis, hbar })
}

/// Principal branch `λ^α`, `arg λ ∈ (-π, π]`, with `0^α = 0`.
pub fn power_branch(lambda: Complex64, order: FractionalOrder) -> Result<Complex64> {
    if lambda == c(0.0, 0.0) {
        return Ok(lambda);
    }
    if lambda.im == 0.0 && lambda.re < 0.0 {
        return Err(Error::BranchCut(format!("{lambda}")));
    }
    if order.is_classical() {
        return Ok(lambda);
    }
    Ok(principal_power(lambda, order.value()))
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be nonnegative")));
    }
    Ok(())
}

/// `A_t = e^{iHt/ħ} A e^{-iHt/ħ}`.
pub fn heisenberg_evolve(spec: &Spectrum, a: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
    spec.check_dim(a.dim())?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} must be finite")));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    let m = spec.apply(a.entries(), |w| Ok(Complex64::from_polar(1.0, w * t)))?;
    Ok(HermitianOperator::from_evolved(m))
}

/// Solution of the fractional Heisenberg equation at time `t`.
pub fn fractional_heisenberg_evolve(
    spec: &Spectrum,
    a: &HermitianOperator,
    order: FractionalOrder,
    t: f64,
) -> Result<HermitianOperator> {
    check_t(t)?;
    if order.is_classical() {
        return heisenberg_evolve(spec, a, t);
    }
    spec.check_dim(a.dim())?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    let m = spec.apply(a.entries(), |w| Ok((-t * power_branch(c(0.0, -w), order)?).exp()))?;
    Ok(HermitianOperator::from_evolved(m))
}

/// Solution of the fractional von Neumann equation at time `t`.
pub fn fractional_vonneumann_evolve(
    spec: &Spectrum,
    rho: &DensityMatrix,
    order: FractionalOrder,
    t: f64,
) -> Result<DensityMatrix> {
    check_t(t)?;
    spec.check_dim(rho.dim())?;
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let m = spec.apply(rho.entries(), |w| Ok((-t * power_branch(c(0.0, w), order)?).exp()))?;
    Ok(DensityMatrix::from_evolved(m))
}

/// `(Tr[ρ_t A], Tr[ρ A_t])`, equal by duality.
pub fn duality_check(
    spec: &Spectrum,
    rho: &DensityMatrix,
    a: &HermitianOperator,
    order: FractionalOrder,
    t: f64,
) -> Result<(f64, f64)> {
    let rho_t = fractional_vonneumann_evolve(spec, rho, order, t)?;
    let a_t = fractional_heisenberg_evolve(spec, a, order, t)?;
    let lhs = (rho_t.entries() * a.entries()).trace();
    let rhs = (rho.entries() * a_t.entries()).trace();
    Ok((lhs.re, rhs.re))
}

/// `s ↦ e^{iHs/ħ} A e^{-iHs/ħ}` as a subordination trajectory, with the
/// transition frequencies as its tail hint.
pub fn heisenberg_trajectory(spec: &Spectrum, a: &HermitianOperator) -> Result<Trajectory<DMatrix<Complex64>>> {
    spec.check_dim(a.dim())?;
    let n = spec.dim();
    let tilde = spec.to_eigenbasis(a.entries());
    let bound = tilde.iter().map(|z| z.norm()).sum::<f64>();
    let freqs = spec.frequencies();
    let spec = spec.clone();
    let traj = Trajectory::new(move |s: f64| {
        let mut m = tilde.clone();
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    m[(j, k)] *= Complex64::from_polar(1.0, spec.frequency(j, k) * s);
                }
            }
        }
        spec.from_eigenbasis(&m)
    });
    Ok(traj.with_frequencies(&freqs).with_bound(bound))
}

/// Max-norm distance between two operators.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Random Hermitian matrix with entries uniform in the unit square.
pub fn random_hermitian<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = c(rng.gen_range(-1.0..1.0), 0.0);
        for k in 0..j {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
    }
    HermitianOperator { entries: m }
}

/// Random full-rank density matrix `G G† / Tr(G G†)`.
pub fn random_density<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_evolved(m * c(1.0 / tr, 0.0))
}
