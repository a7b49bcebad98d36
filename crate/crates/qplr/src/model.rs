//! Quasiperiodic potentials and the finite operators built from them.
//!
//! A [`Potential`] is a finite Fourier series on the d-torus. From it the
//! module builds Dirichlet (or periodic) truncations of the effective
//! one-particle Hamiltonian
//!
//! ```text
//! (H(x) ψ)_n = ψ_{n+1} + ψ_{n-1} + v(x + nα) ψ_n
//! ```
//!
//! acting on a finite window of Z, the dual long-range operator
//!
//! ```text
//! (H̃(θ) ψ)_m = Σ_{m'} v̂_{m'} ψ_{m-m'} + 2 cos 2π(α·m + θ) ψ_m
//! ```
//!
//! truncated to a box in Z^d, and the velocity observable A.

use ndarray::Array2;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use thiserror::Error;

/// Golden-mean frequency (√5 − 1)/2, the canonical irrational for
/// single-frequency quasiperiodic models.
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("Fourier coefficient at k = {k:?} breaks Hermitian symmetry (|v̂(-k) - conj v̂(k)| = {residual:.3e})")]
    NotHermitian { k: Vec<i64>, residual: f64 },
    #[error("coefficient index has {found} components, potential dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frequency component {value} outside the open interval (0, 1)")]
    InvalidFrequency { value: f64 },
    #[error("window [{lo}, {hi}] has fewer than 2 sites")]
    WindowTooSmall { lo: i64, hi: i64 },
    #[error("phase point has {found} components, expected {expected}")]
    PhaseDimension { expected: usize, found: usize },
}

/// Reduce to the fundamental domain [0, 1).
#[inline]
pub fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Low-discrepancy additive offsets for phase sweeps: golden mean on the
/// first axis, fractional parts of square roots of primes after that
/// (jointly independent with the golden mean over Q).
pub(crate) fn equidistributed_offsets(d: usize) -> Vec<f64> {
    const PRIMES: [f64; 7] = [2.0, 3.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    assert!(d >= 1 && d <= 1 + PRIMES.len(), "unsupported torus dimension {d}");
    let mut out = vec![GOLDEN_MEAN];
    out.extend(PRIMES.iter().take(d - 1).map(|p| frac(p.sqrt())));
    out
}

/// Real-valued potential on T^d given by finitely many Fourier coefficients.
///
/// The constructor enforces v̂_{-k} = conj(v̂_k), so evaluation is real by
/// construction; a potential that cannot be evaluated to a real number is
/// unrepresentable.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl Potential {
    const SYMMETRY_TOL: f64 = 1e-12;

    pub fn new<I>(dim: usize, coeffs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k, v) in coeffs {
            if k.len() != dim {
                return Err(ModelError::DimensionMismatch { expected: dim, found: k.len() });
            }
            if v != Complex64::new(0.0, 0.0) {
                *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
            }
        }
        let scale = map.values().map(|v| v.norm()).fold(1.0f64, f64::max);
        for (k, v) in &map {
            let neg: Vec<i64> = k.iter().map(|c| -c).collect();
            let mirror = map.get(&neg).copied().unwrap_or(Complex64::new(0.0, 0.0));
            let residual = (mirror - v.conj()).norm();
            if residual > Self::SYMMETRY_TOL * scale {
                return Err(ModelError::NotHermitian { k: k.clone(), residual });
            }
        }
        Ok(Self { dim, coeffs: map })
    }

    /// The zero potential (free Laplacian).
    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    /// Constant potential v ≡ c.
    pub fn constant(dim: usize, c: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert(vec![0; dim], Complex64::new(c, 0.0));
        }
        Self { dim, coeffs }
    }

    /// Almost Mathieu potential v(x) = 2λ cos 2πx, i.e. v̂_{±1} = λ.
    pub fn almost_mathieu(lambda: f64) -> Self {
        Self::new(
            1,
            [
                (vec![1], Complex64::new(lambda, 0.0)),
                (vec![-1], Complex64::new(lambda, 0.0)),
            ],
        )
        .expect("cosine coefficients are Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.coeffs
    }

    /// True when every Fourier coefficient is real (then all built duals are
    /// real symmetric matrices).
    pub fn has_real_coefficients(&self) -> bool {
        self.coeffs.values().all(|v| v.im == 0.0)
    }

    /// Uniform bound Σ |v̂_k| ≥ sup |v|.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).sum()
    }

    /// Evaluate v(x) = Σ_k v̂_k e^{2πi k·x}; the imaginary part cancels by
    /// the symmetry invariant. Components of `x` are reduced mod 1.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, v) in &self.coeffs {
            let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * frac(xi)).sum();
            sum += v * Complex64::from_polar(1.0, TAU * phase);
        }
        debug_assert!(
            sum.im.abs() < 1e-12 * (1.0 + sum.re.abs()),
            "imaginary residue {} in potential evaluation",
            sum.im
        );
        sum.re
    }
}

/// Frequency vector α ∈ (0,1)^d. Rational independence of {1, α_1, …, α_d}
/// is not machine-checkable; it is recorded as a trust flag set by
/// construction and carried along for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    components: Vec<f64>,
    independence_assumed: bool,
}

impl FrequencyVector {
    pub fn new(components: Vec<f64>) -> Result<Self, ModelError> {
        for &a in &components {
            if !(a > 0.0 && a < 1.0) {
                return Err(ModelError::InvalidFrequency { value: a });
            }
        }
        Ok(Self { components, independence_assumed: true })
    }

    /// Single golden-mean frequency.
    pub fn golden() -> Self {
        Self { components: vec![GOLDEN_MEAN], independence_assumed: true }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }

    pub fn independence_assumed(&self) -> bool {
        self.independence_assumed
    }

    /// x + nα reduced to the torus, component by component.
    pub fn translate(&self, x: &[f64], n: i64) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.components.len());
        x.iter()
            .zip(&self.components)
            .map(|(&xi, &ai)| frac(xi + n as f64 * ai))
            .collect()
    }

    /// Dot product α·m for a multi-index m ∈ Z^d.
    pub fn dot(&self, m: &[i64]) -> f64 {
        self.components.iter().zip(m).map(|(&a, &mi)| a * mi as f64).sum()
    }
}

/// Inclusive integer interval of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntInterval {
    pub lo: i64,
    pub hi: i64,
}

impl IntInterval {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// Window of `len` sites centered at 0 (one extra site on the left for
    /// even lengths).
    pub fn centered(len: usize) -> Self {
        assert!(len >= 1);
        let lo = -((len / 2) as i64);
        Self { lo, hi: lo + len as i64 - 1 }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i64) -> bool {
        site >= self.lo && site <= self.hi
    }

    pub fn index_of(&self, site: i64) -> Option<usize> {
        self.contains(site).then_some((site - self.lo) as usize)
    }

    pub fn site(&self, index: usize) -> i64 {
        self.lo + index as i64
    }

    pub fn center(&self) -> f64 {
        (self.lo + self.hi) as f64 / 2.0
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn shifted(&self, by: i64) -> Self {
        Self { lo: self.lo + by, hi: self.hi + by }
    }
}

/// Truncation boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Dirichlet,
    Periodic,
}

/// Finite Hermitian window of H(x) or H̃(θ).
///
/// Effective Hamiltonians live on a 1-D window; duals live on a hypercube
/// box `window^dims` flattened row-major. The `hopping` map records the
/// generating offset → coefficient data for 1-D operators; the materialized
/// coupling list is authoritative for the matrix in every case.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    window: IntInterval,
    dims: usize,
    diagonal: Vec<f64>,
    hopping: BTreeMap<i64, Complex64>,
    boundary: Boundary,
    /// Upper-triangle couplings (i, j, c) with i < j: H[i,j] = c, H[j,i] = conj(c).
    couplings: Vec<(usize, usize, Complex64)>,
}

impl TruncatedOperator {
    pub fn window(&self) -> IntInterval {
        self.window
    }

    /// Number of lattice axes (1 for effective Hamiltonians, d for duals).
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Matrix dimension: window length to the power `dims`.
    pub fn matrix_dim(&self) -> usize {
        self.window.len().pow(self.dims as u32)
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn hopping(&self) -> &BTreeMap<i64, Complex64> {
        &self.hopping
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn couplings(&self) -> &[(usize, usize, Complex64)] {
        &self.couplings
    }

    /// Multi-index of the flattened matrix row `idx` (row-major box decode).
    pub fn multi_site(&self, idx: usize) -> Vec<i64> {
        let len = self.window.len();
        let mut rem = idx;
        let mut out = vec![0i64; self.dims];
        for a in (0..self.dims).rev() {
            out[a] = self.window.lo + (rem % len) as i64;
            rem /= len;
        }
        debug_assert_eq!(rem, 0);
        out
    }

    pub fn has_real_entries(&self) -> bool {
        self.couplings.iter().all(|&(_, _, c)| c.im == 0.0)
    }

    /// (diagonal, offdiagonal) when the operator is a real symmetric
    /// tridiagonal matrix; `None` otherwise (periodic wrap, long-range or
    /// complex couplings).
    pub fn tridiagonal_parts(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.matrix_dim();
        let mut off = vec![0.0f64; n.saturating_sub(1)];
        for &(i, j, c) in &self.couplings {
            if j != i + 1 || c.im != 0.0 {
                return None;
            }
            off[i] += c.re;
        }
        Some((self.diagonal.clone(), off))
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let n = self.matrix_dim();
        let mut m = Array2::zeros((n, n));
        for (i, &d) in self.diagonal.iter().enumerate() {
            m[[i, i]] = Complex64::new(d, 0.0);
        }
        for &(i, j, c) in &self.couplings {
            m[[i, j]] += c;
            m[[j, i]] += c.conj();
        }
        m
    }

    /// Dense real matrix, available when every coupling is real.
    pub fn to_dense_real(&self) -> Option<Array2<f64>> {
        if !self.has_real_entries() {
            return None;
        }
        let n = self.matrix_dim();
        let mut m = Array2::zeros((n, n));
        for (i, &d) in self.diagonal.iter().enumerate() {
            m[[i, i]] = d;
        }
        for &(i, j, c) in &self.couplings {
            m[[i, j]] += c.re;
            m[[j, i]] += c.re;
        }
        Some(m)
    }

    /// Gershgorin bound: every eigenvalue lies in [-b, b] shifted by the
    /// diagonal range.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.matrix_dim();
        let mut radius = vec![0.0f64; n];
        for &(i, j, c) in &self.couplings {
            radius[i] += c.norm();
            radius[j] += c.norm();
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            lo = lo.min(self.diagonal[i] - radius[i]);
            hi = hi.max(self.diagonal[i] + radius[i]);
        }
        (lo, hi)
    }
}

/// Dirichlet or periodic truncation of the effective Hamiltonian H(x) to a
/// window: diagonal v(x + nα), unit hopping at offset 1.
pub fn build_effective(
    p: &Potential,
    alpha: &FrequencyVector,
    x: &[f64],
    window: IntInterval,
    boundary: Boundary,
) -> Result<TruncatedOperator, ModelError> {
    if alpha.dim() != p.dim() {
        return Err(ModelError::DimensionMismatch { expected: p.dim(), found: alpha.dim() });
    }
    if x.len() != p.dim() {
        return Err(ModelError::PhaseDimension { expected: p.dim(), found: x.len() });
    }
    let n = window.len();
    if n < 2 {
        return Err(ModelError::WindowTooSmall { lo: window.lo, hi: window.hi });
    }
    let diagonal: Vec<f64> = window.sites().map(|s| p.eval(&alpha.translate(x, s))).collect();
    let one = Complex64::new(1.0, 0.0);
    let mut couplings: Vec<(usize, usize, Complex64)> = (0..n - 1).map(|i| (i, i + 1, one)).collect();
    if boundary == Boundary::Periodic {
        couplings.push((0, n - 1, one));
    }
    let mut hopping = BTreeMap::new();
    hopping.insert(1, one);
    Ok(TruncatedOperator { window, dims: 1, diagonal, hopping, boundary, couplings })
}

/// Dirichlet truncation of the dual operator H̃(θ) to the hypercube box
/// `window^d`: diagonal 2 cos 2π(α·m + θ), hopping v̂_{m'} at offset m'.
pub fn build_dual(
    p: &Potential,
    alpha: &FrequencyVector,
    theta: f64,
    window: IntInterval,
) -> Result<TruncatedOperator, ModelError> {
    if alpha.dim() != p.dim() {
        return Err(ModelError::DimensionMismatch { expected: p.dim(), found: alpha.dim() });
    }
    let d = p.dim();
    let len = window.len();
    let size = len.pow(d as u32);

    let op_shell = TruncatedOperator {
        window,
        dims: d,
        diagonal: Vec::new(),
        hopping: BTreeMap::new(),
        boundary: Boundary::Dirichlet,
        couplings: Vec::new(),
    };
    let mut diagonal = Vec::with_capacity(size);
    for idx in 0..size {
        let m = op_shell.multi_site(idx);
        diagonal.push(2.0 * (TAU * frac(alpha.dot(&m) + theta)).cos());
    }

    // canonical half of the Fourier support: first nonzero component positive
    let positive = |k: &[i64]| k.iter().find(|&&c| c != 0).map_or(false, |&c| c > 0);
    let mut hopping = BTreeMap::new();
    let mut couplings = Vec::new();
    for (k, &vk) in p.coefficients() {
        if !positive(k) {
            continue;
        }
        if d == 1 {
            hopping.insert(k[0], vk);
        }
        // H̃[idx(m), idx(m+k)] = v̂_{m-(m+k)} = conj(v̂_k); row-major flatten
        // keeps idx(m) < idx(m+k) for canonical k.
        for idx in 0..size {
            let m = op_shell.multi_site(idx);
            let shifted: Vec<i64> = m.iter().zip(k).map(|(&mi, &ki)| mi + ki).collect();
            if shifted.iter().any(|s| !window.contains(*s)) {
                continue;
            }
            let jdx = shifted
                .iter()
                .fold(0usize, |acc, &s| acc * len + (s - window.lo) as usize);
            debug_assert!(jdx > idx);
            couplings.push((idx, jdx, vk.conj()));
        }
    }

    Ok(TruncatedOperator { diagonal, hopping, couplings, ..op_shell })
}

/// Velocity observable on a window: the Hermitian matrix with
/// A[n+1, n] = i and A[n, n+1] = -i for adjacent sites, skew pairing of
/// nearest neighbors. ‖A‖ ≤ 2, and A is unitarily equivalent to the free
/// Laplacian via the diagonal phase gauge diag(i^n).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VelocityObservable {
    window: IntInterval,
}

/// Build the velocity observable for a window.
pub fn build_velocity(window: IntInterval) -> VelocityObservable {
    VelocityObservable { window }
}

impl VelocityObservable {
    pub fn window(&self) -> IntInterval {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for i in 0..n.saturating_sub(1) {
            m[[i, i + 1]] = Complex64::new(0.0, -1.0);
            m[[i + 1, i]] = Complex64::new(0.0, 1.0);
        }
        m
    }

    /// Apply A to a complex vector: (Aψ)_n = i ψ_{n-1} - i ψ_{n+1} in window
    /// coordinates, with Dirichlet edges.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(psi.len(), n);
        let i = Complex64::new(0.0, 1.0);
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                if k > 0 {
                    acc += i * psi[k - 1];
                }
                if k + 1 < n {
                    acc -= i * psi[k + 1];
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermiticity_residual;
    use proptest::prelude::*;

    #[test]
    fn eval_zero_potential() {
        let p = Potential::zero(1);
        assert_eq!(p.eval(&[0.3]), 0.0);
    }

    #[test]
    fn eval_almost_mathieu_values() {
        let p = Potential::almost_mathieu(1.0);
        assert!((p.eval(&[0.0]) - 2.0).abs() < 1e-14);
        let p = Potential::almost_mathieu(0.5);
        assert!(p.eval(&[0.25]).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_coefficients_rejected() {
        let err = Potential::new(1, [(vec![1], Complex64::new(1.0, 0.0))]);
        assert!(matches!(err, Err(ModelError::NotHermitian { .. })));
        let err = Potential::new(
            1,
            [
                (vec![1], Complex64::new(1.0, 0.5)),
                (vec![-1], Complex64::new(1.0, 0.5)),
            ],
        );
        assert!(matches!(err, Err(ModelError::NotHermitian { .. })));
    }

    #[test]
    fn free_effective_is_plain_laplacian() {
        let p = Potential::zero(1);
        let a = FrequencyVector::golden();
        let op = build_effective(&p, &a, &[0.0], IntInterval::new(0, 2), Boundary::Dirichlet).unwrap();
        let m = op.to_dense_real().unwrap();
        let expect = ndarray::array![[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        assert_eq!(m, expect);
    }

    #[test]
    fn amo_diagonal_entry_at_origin() {
        let p = Potential::almost_mathieu(1.0);
        let a = FrequencyVector::golden();
        let op = build_effective(&p, &a, &[0.0], IntInterval::new(0, 7), Boundary::Dirichlet).unwrap();
        assert!((op.diagonal()[0] - 2.0).abs() < 1e-14);
        assert_eq!(op.hopping().len(), 1);
        assert_eq!(op.hopping()[&1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tiny_window_rejected() {
        let p = Potential::zero(1);
        let a = FrequencyVector::golden();
        let r = build_effective(&p, &a, &[0.0], IntInterval::new(3, 3), Boundary::Dirichlet);
        assert!(matches!(r, Err(ModelError::WindowTooSmall { .. })));
    }

    #[test]
    fn free_dual_is_diagonal() {
        let p = Potential::zero(1);
        let a = FrequencyVector::golden();
        let theta = 0.17;
        let op = build_dual(&p, &a, theta, IntInterval::new(-3, 3)).unwrap();
        assert!(op.couplings().is_empty());
        for (idx, &d) in op.diagonal().iter().enumerate() {
            let m = op.window().site(idx) as f64;
            let expect = 2.0 * (TAU * frac(GOLDEN_MEAN * m + theta)).cos();
            assert!((d - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn amo_dual_hopping_is_lambda() {
        let p = Potential::almost_mathieu(0.7);
        let a = FrequencyVector::golden();
        let op = build_dual(&p, &a, 0.0, IntInterval::new(0, 9)).unwrap();
        assert_eq!(op.hopping()[&1], Complex64::new(0.7, 0.0));
        let m = op.to_dense_real().unwrap();
        assert!((m[[3, 4]] - 0.7).abs() < 1e-15);
        assert!((m[[4, 3]] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn dual_box_two_frequencies_is_hermitian() {
        let p = Potential::new(
            2,
            [
                (vec![1, 0], Complex64::new(0.3, 0.1)),
                (vec![-1, 0], Complex64::new(0.3, -0.1)),
                (vec![0, 1], Complex64::new(0.2, 0.0)),
                (vec![0, -1], Complex64::new(0.2, 0.0)),
            ],
        )
        .unwrap();
        let a = FrequencyVector::new(vec![GOLDEN_MEAN, std::f64::consts::SQRT_2 - 1.0]).unwrap();
        let op = build_dual(&p, &a, 0.11, IntInterval::new(-2, 2)).unwrap();
        assert_eq!(op.matrix_dim(), 25);
        assert!(hermiticity_residual(&op.to_dense()) < 1e-14);
    }

    #[test]
    fn velocity_matrix_two_sites() {
        let a = build_velocity(IntInterval::new(0, 1)).to_dense();
        assert_eq!(a[[0, 1]], Complex64::new(0.0, -1.0));
        assert_eq!(a[[1, 0]], Complex64::new(0.0, 1.0));
        assert_eq!(a[[0, 0]], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn periodic_boundary_adds_wrap_coupling() {
        let p = Potential::zero(1);
        let a = FrequencyVector::golden();
        let op = build_effective(&p, &a, &[0.0], IntInterval::new(0, 4), Boundary::Periodic).unwrap();
        let m = op.to_dense_real().unwrap();
        assert_eq!(m[[0, 4]], 1.0);
        assert_eq!(m[[4, 0]], 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn built_operators_are_hermitian(
            lambda in 0.05f64..3.0,
            phi in 0.0f64..1.0,
            x in 0.0f64..1.0,
            theta in 0.0f64..1.0,
        ) {
            let p = Potential::new(1, [
                (vec![1], Complex64::from_polar(lambda, TAU * phi)),
                (vec![-1], Complex64::from_polar(lambda, -TAU * phi)),
                (vec![2], Complex64::new(0.25, 0.0)),
                (vec![-2], Complex64::new(0.25, 0.0)),
            ]).unwrap();
            let a = FrequencyVector::golden();
            let w = IntInterval::new(-8, 8);
            let h = build_effective(&p, &a, &[x], w, Boundary::Dirichlet).unwrap();
            prop_assert!(hermiticity_residual(&h.to_dense()) < 1e-14);
            let dual = build_dual(&p, &a, theta, w).unwrap();
            prop_assert!(hermiticity_residual(&dual.to_dense()) < 1e-14);
        }

        #[test]
        fn shift_covariance(x in 0.0f64..1.0, lambda in 0.1f64..2.0) {
            let p = Potential::almost_mathieu(lambda);
            let a = FrequencyVector::golden();
            let shifted_phase = build_effective(
                &p, &a, &a.translate(&[x], 1), IntInterval::new(-5, 5), Boundary::Dirichlet,
            ).unwrap();
            let shifted_window = build_effective(
                &p, &a, &[x], IntInterval::new(-4, 6), Boundary::Dirichlet,
            ).unwrap();
            for (u, v) in shifted_phase.diagonal().iter().zip(shifted_window.diagonal()) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }

        #[test]
        fn potential_evaluation_is_real_bounded(x in 0.0f64..1.0, lam in 0.0f64..2.0) {
            let p = Potential::almost_mathieu(lam);
            let v = p.eval(&[x]);
            prop_assert!(v.abs() <= 2.0 * lam + 1e-12);
        }
    }
}
