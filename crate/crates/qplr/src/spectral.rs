//! Eigenvalue statistics: dense and tridiagonal eigensolves, the integrated
//! density of states by Dirichlet eigenvalue counting, its inverse E(N),
//! spectral gaps, and the group-velocity bound (1/π)·ess sup dE/dN.

use crate::linalg;
use crate::model::{
    build_effective, equidistributed_offsets, frac, Boundary, FrequencyVector, IntInterval,
    ModelError, Potential, TruncatedOperator,
};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("operator has complex couplings; use eigensolve_hermitian on its dense form")]
    ComplexCouplings,
    #[error("{what} = {value} outside supported range [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("degenerate spectrum: every finite-difference slope of E(N) was classified as a gap jump")]
    DegenerateSpectrum,
}

type Result<T> = std::result::Result<T, SpectralError>;

/// Vector-path size limit (dense storage of eigenvectors).
const MAX_DENSE: usize = 10_000;
/// Eigenvalues-only limit for the tridiagonal path.
const MAX_TRIDIAG: usize = 100_000;

/// Eigenvalues (ascending) and an orthonormal eigenvector frame of a
/// truncated operator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: Array2<f64>,
    pub window: IntInterval,
    pub dims: usize,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Matrix row index of a 1-D lattice site.
    pub fn site_index(&self, site: i64) -> Option<usize> {
        (self.dims == 1).then(|| self.window.index_of(site)).flatten()
    }

    /// max |UᵀU - I| over all entries.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.eigenvectors.t().dot(&self.eigenvectors);
        let n = g.nrows();
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                r = r.max((g[[i, j]] - target).abs());
            }
        }
        r
    }

    /// max |H - UΛUᵀ| over all entries.
    pub fn reconstruction_residual(&self, op: &TruncatedOperator) -> f64 {
        let lambda = Array2::from_diag(&ndarray::Array1::from(self.eigenvalues.clone()));
        let rebuilt = self.eigenvectors.dot(&lambda).dot(&self.eigenvectors.t());
        let dense = op.to_dense();
        let mut r: f64 = 0.0;
        for ((i, j), &v) in dense.indexed_iter() {
            r = r.max((rebuilt[[i, j]] - v.re).abs());
        }
        r
    }
}

/// Full eigendecomposition of a real truncated operator. Tridiagonal
/// windows go through the direct tridiagonal solver; anything else is
/// densified. Operators with complex couplings are rejected (they have no
/// real eigenvector frame); see [`eigensolve_hermitian`].
pub fn eigensolve(op: &TruncatedOperator) -> Result<SpectralData> {
    let n = op.matrix_dim();
    if n > MAX_DENSE {
        return Err(SpectralError::OutOfRange {
            what: "matrix dimension",
            value: n as f64,
            lo: 1.0,
            hi: MAX_DENSE as f64,
        });
    }
    let (eigenvalues, eigenvectors) = if let Some((d, e)) = op.tridiagonal_parts() {
        linalg::eig_tridiagonal(&d, &e)?
    } else if let Some(m) = op.to_dense_real() {
        linalg::eig_symmetric(m)?
    } else {
        return Err(SpectralError::ComplexCouplings);
    };
    Ok(SpectralData { eigenvalues, eigenvectors, window: op.window(), dims: op.dims() })
}

/// All eigenvalues (ascending) without eigenvectors; the tridiagonal fast
/// path supports windows an order of magnitude larger than the dense one.
pub fn eigenvalues_only(op: &TruncatedOperator) -> Result<Vec<f64>> {
    let n = op.matrix_dim();
    if let Some((d, e)) = op.tridiagonal_parts() {
        if n > MAX_TRIDIAG {
            return Err(SpectralError::OutOfRange {
                what: "tridiagonal dimension",
                value: n as f64,
                lo: 1.0,
                hi: MAX_TRIDIAG as f64,
            });
        }
        return Ok(linalg::eigvals_tridiagonal(&d, &e)?);
    }
    if n > MAX_DENSE {
        return Err(SpectralError::OutOfRange {
            what: "matrix dimension",
            value: n as f64,
            lo: 1.0,
            hi: MAX_DENSE as f64,
        });
    }
    match op.to_dense_real() {
        Some(m) => Ok(linalg::eigvals_symmetric(m)?),
        None => Ok(linalg::eigvals_hermitian(op.to_dense())?),
    }
}

/// Eigendecomposition of a dense complex Hermitian matrix (the path for
/// duals with complex Fourier data and for many-body blocks).
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<Complex64>,
}

pub fn eigensolve_hermitian(m: &Array2<Complex64>) -> Result<HermitianEigen> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let residual = linalg::hermiticity_residual(m);
    if residual > 1e-10 * scale {
        return Err(SpectralError::Linalg(linalg::LinalgError::NotHermitian { residual }));
    }
    let (eigenvalues, eigenvectors) = linalg::eig_hermitian(m.clone())?;
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// Phase sampling strategy for ergodic averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// x_j = j·β mod 1 with a golden-ratio offset vector; bit-exactly
    /// reproducible without a seed.
    Equidistributed,
    /// Uniform i.i.d. phases from a seeded generator.
    Random { seed: u64 },
}

/// Phase sample set specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpec {
    pub count: usize,
    pub mode: PhaseMode,
}

impl PhaseSpec {
    pub fn equidistributed(count: usize) -> Self {
        Self { count, mode: PhaseMode::Equidistributed }
    }

    pub fn random(count: usize, seed: u64) -> Self {
        Self { count, mode: PhaseMode::Random { seed } }
    }

    pub(crate) fn sample(&self, dim: usize) -> Vec<Vec<f64>> {
        assert!(self.count >= 1, "need at least one phase");
        match self.mode {
            PhaseMode::Equidistributed => {
                let beta = equidistributed_offsets(dim);
                (0..self.count)
                    .map(|j| beta.iter().map(|&b| frac(j as f64 * b)).collect())
                    .collect()
            }
            PhaseMode::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.count)
                    .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
                    .collect()
            }
        }
    }
}

/// Sampled integrated density of states: a monotone map E ↦ N(E) obtained
/// by counting Dirichlet eigenvalues below each grid energy, averaged over
/// phases. Raw pooled counts are kept so gap detection can ask for exact
/// emptiness.
#[derive(Debug, Clone)]
pub struct IdsTable {
    grid: Vec<f64>,
    n_values: Vec<f64>,
    counts: Vec<u64>,
    pub phase_count: usize,
    pub window_size: usize,
}

/// Energy grid covering the whole spectrum of any truncation of H(x):
/// symmetric Gershgorin bounds from the potential's Fourier data.
pub fn default_energy_grid(p: &Potential, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let bound = 2.0 + p.sup_bound() + 1e-9;
    (0..points)
        .map(|i| -bound + 2.0 * bound * i as f64 / (points - 1) as f64)
        .collect()
}

/// Integrated density of states by phase-averaged eigenvalue counting on
/// Dirichlet windows. Counting is a Sturm pivot count per (phase, energy),
/// so no factorization is stored and windows up to 10^5 sites are fine.
pub fn ids(
    p: &Potential,
    alpha: &FrequencyVector,
    window_size: usize,
    phases: PhaseSpec,
    e_grid: Vec<f64>,
) -> Result<IdsTable> {
    assert!(e_grid.len() >= 2, "energy grid needs at least two points");
    assert!(
        e_grid.windows(2).all(|w| w[0] < w[1]),
        "energy grid must be strictly ascending"
    );
    let window = IntInterval::centered(window_size);
    let xs = phases.sample(p.dim());
    let per_phase: Vec<Vec<u64>> = xs
        .par_iter()
        .map(|x| {
            let op = build_effective(p, alpha, x, window, Boundary::Dirichlet)?;
            let (d, e) = op.tridiagonal_parts().expect("effective operator is tridiagonal");
            Ok(e_grid
                .iter()
                .map(|&en| linalg::sturm_count_below(&d, &e, en) as u64)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; e_grid.len()];
    for row in &per_phase {
        for (c, &v) in counts.iter_mut().zip(row) {
            *c += v;
        }
    }
    let total = (window_size * phases.count) as f64;
    let n_values = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(IdsTable { grid: e_grid, n_values, counts, phase_count: phases.count, window_size })
}

impl IdsTable {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_values(&self) -> &[f64] {
        &self.n_values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// N(E) by linear interpolation of the table.
    pub fn n_at(&self, e: f64) -> f64 {
        let g = &self.grid;
        if e <= g[0] {
            return self.n_values[0];
        }
        if e >= *g.last().unwrap() {
            return *self.n_values.last().unwrap();
        }
        let i = g.partition_point(|&x| x < e);
        let (x0, x1) = (g[i - 1], g[i]);
        let (y0, y1) = (self.n_values[i - 1], self.n_values[i]);
        y0 + (e - x0) / (x1 - x0) * (y1 - y0)
    }

    /// Two-sided finite-difference estimate of dN/dE at bandwidth `h`.
    pub fn density_at(&self, e: f64, h: f64) -> f64 {
        (self.n_at(e + h) - self.n_at(e - h)) / (2.0 * h)
    }

    pub fn grid_spacing(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }
}

/// The inverse function E(N) of an IDS table: monotone, left-continuous at
/// the plateaus of N (spectral gaps), linearly interpolated inside rising
/// segments. Leading and trailing flats of the table are trimmed so that
/// E(0) and E(1) are the spectrum edges rather than the grid ends.
#[derive(Debug, Clone)]
pub struct EnergyQuantile {
    es: Vec<f64>,
    ns: Vec<f64>,
}

pub fn inverse_ids(t: &IdsTable) -> EnergyQuantile {
    let n = t.grid.len();
    let first_rise = t.n_values.iter().position(|&v| v > t.n_values[0]).unwrap_or(1);
    let last_val = *t.n_values.last().unwrap();
    let last_rise = n - 1 - t.n_values.iter().rev().position(|&v| v < last_val).unwrap_or(n - 2);
    let lo = first_rise.saturating_sub(1);
    let hi = last_rise.min(n - 1);
    EnergyQuantile {
        es: t.grid[lo..=hi].to_vec(),
        ns: t.n_values[lo..=hi].to_vec(),
    }
}

impl EnergyQuantile {
    /// E(q) for q ∈ [0, 1].
    pub fn eval(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        if q <= self.ns[0] {
            return self.es[0];
        }
        let i = self.ns.partition_point(|&v| v < q);
        if i >= self.ns.len() {
            return *self.es.last().unwrap();
        }
        let (n0, n1) = (self.ns[i - 1], self.ns[i]);
        let (e0, e1) = (self.es[i - 1], self.es[i]);
        debug_assert!(n1 > n0);
        e0 + (q - n0) / (n1 - n0) * (e1 - e0)
    }
}

/// Group-velocity bound ‖Q‖ = (1/π)·ess sup dE/dN, from gap-filtered
/// finite differences of the inverse IDS at spacing `delta_n`. Slopes above
/// `gap_filter_factor` times the median are the measure-zero jump set of
/// E(N) across spectral gaps and are excluded from the essential supremum.
/// The Lieb-Robinson velocity bound is twice the returned value.
///
/// Estimator validity needs the table resolution well below `delta_n`
/// (window·phases ≫ 1/delta_n) and grid cells pooling several eigenvalues.
/// For the almost Mathieu operator the bulk slopes and the gap jumps
/// separate by roughly a decade; a filter factor around 5 sits in the
/// middle of that window, while much larger factors let medium gaps
/// (and their Dirichlet boundary states) through as fake slopes.
pub fn group_velocity_bound(t: &IdsTable, delta_n: f64, gap_filter_factor: f64) -> Result<f64> {
    if !(1e-4..=1e-2).contains(&delta_n) {
        return Err(SpectralError::OutOfRange { what: "delta_n", value: delta_n, lo: 1e-4, hi: 1e-2 });
    }
    let quantile = inverse_ids(t);
    let steps = (1.0 / delta_n).floor() as usize;
    let mut slopes = Vec::with_capacity(steps);
    for k in 0..steps {
        let q0 = k as f64 * delta_n;
        let q1 = ((k + 1) as f64 * delta_n).min(1.0);
        let s = (quantile.eval(q1) - quantile.eval(q0)) / (q1 - q0);
        if s.is_finite() && s >= 0.0 {
            slopes.push(s);
        }
    }
    let mut sorted = slopes.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    if median <= 1e-12 {
        return Err(SpectralError::DegenerateSpectrum);
    }
    let cutoff = gap_filter_factor * median;
    let max_bulk = slopes.iter().copied().filter(|&s| s <= cutoff).fold(f64::NAN, f64::max);
    if !max_bulk.is_finite() {
        return Err(SpectralError::DegenerateSpectrum);
    }
    Ok(max_bulk / PI)
}

/// One detected spectral gap: an energy interval with no eigenvalue across
/// all sampled phases, labelled by the constant IDS value inside it.
#[derive(Debug, Clone, Copy)]
pub struct Gap {
    pub e_left: f64,
    pub e_right: f64,
    pub n_value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
}

impl GapReport {
    pub fn widest(&self) -> Option<&Gap> {
        self.gaps
            .iter()
            .max_by(|a, b| (a.e_right - a.e_left).partial_cmp(&(b.e_right - b.e_left)).unwrap())
    }
}

/// Maximal energy intervals of width at least `threshold` where the pooled
/// eigenvalue count is constant (and strictly inside the spectrum).
///
/// `threshold` must exceed the table's grid spacing, otherwise every cell
/// would qualify vacuously.
pub fn detect_gaps(t: &IdsTable, threshold: f64) -> GapReport {
    assert!(
        threshold > t.grid_spacing(),
        "gap threshold {threshold} must exceed the grid spacing {}",
        t.grid_spacing()
    );
    let total = (t.window_size * t.phase_count) as u64;
    let mut gaps = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..t.grid.len() - 1 {
        let empty = t.counts[i + 1] == t.counts[i] && t.counts[i] > 0 && t.counts[i] < total;
        match (empty, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                if t.grid[i] - t.grid[s] >= threshold {
                    gaps.push(Gap {
                        e_left: t.grid[s],
                        e_right: t.grid[i],
                        n_value: t.counts[s] as f64 / total as f64,
                    });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        let i = t.grid.len() - 1;
        if t.grid[i] - t.grid[s] >= threshold {
            gaps.push(Gap {
                e_left: t.grid[s],
                e_right: t.grid[i],
                n_value: t.counts[s] as f64 / total as f64,
            });
        }
    }
    GapReport { gaps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_dual, build_velocity, GOLDEN_MEAN};
    use proptest::prelude::*;

    fn golden() -> FrequencyVector {
        FrequencyVector::golden()
    }

    fn free_ids(window: usize, phases: usize, points: usize) -> IdsTable {
        let p = Potential::zero(1);
        ids(&p, &golden(), window, PhaseSpec::equidistributed(phases), default_energy_grid(&p, points))
            .unwrap()
    }

    #[test]
    fn free_laplacian_three_sites() {
        let p = Potential::zero(1);
        let op = build_effective(&p, &golden(), &[0.0], IntInterval::new(0, 2), Boundary::Dirichlet)
            .unwrap();
        let s = eigensolve(&op).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        for (got, want) in s.eigenvalues.iter().zip([-r2, 0.0, r2]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn free_dirichlet_closed_form_eigenvalues() {
        let p = Potential::zero(1);
        let n = 64usize;
        let op = build_effective(
            &p, &golden(), &[0.0], IntInterval::new(0, n as i64 - 1), Boundary::Dirichlet,
        )
        .unwrap();
        let vals = eigenvalues_only(&op).unwrap();
        for (j, &v) in vals.iter().enumerate() {
            let exact = 2.0 * (PI * (n - j) as f64 / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_dual_eigenvalues_are_sorted_diagonal() {
        let p = Potential::zero(1);
        let op = build_dual(&p, &golden(), 0.23, IntInterval::new(-8, 8)).unwrap();
        let s = eigensolve(&op).unwrap();
        let mut diag = op.diagonal().to_vec();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in s.eigenvalues.iter().zip(&diag) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn single_site_dual_box() {
        let p = Potential::zero(1);
        let theta = 0.05;
        let op = build_dual(&p, &golden(), theta, IntInterval::new(0, 0)).unwrap();
        let s = eigensolve(&op).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        let expect = 2.0 * (std::f64::consts::TAU * theta).cos();
        assert!((s.eigenvalues[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn spectral_data_invariants_amo() {
        let p = Potential::almost_mathieu(0.5);
        let op = build_effective(
            &p, &golden(), &[0.37], IntInterval::centered(300), Boundary::Dirichlet,
        )
        .unwrap();
        let s = eigensolve(&op).unwrap();
        assert!(s.orthonormality_residual() < 1e-10);
        let scale = s.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(s.reconstruction_residual(&op) < 1e-8 * scale);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_hermitian_matrix_rejected() {
        let mut m = Array2::<Complex64>::zeros((3, 3));
        m[[0, 1]] = Complex64::new(1.0, 0.0);
        m[[1, 0]] = Complex64::new(0.5, 0.0);
        assert!(eigensolve_hermitian(&m).is_err());
    }

    #[test]
    fn velocity_observable_spectrum_matches_laplacian() {
        // A is unitarily equivalent to the free Laplacian via diag(i^n)
        let n = 64usize;
        let a = build_velocity(IntInterval::new(0, n as i64 - 1)).to_dense();
        let eig = eigensolve_hermitian(&a).unwrap();
        for (j, &v) in eig.eigenvalues.iter().enumerate() {
            let exact = 2.0 * (PI * (n - j) as f64 / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_norm_near_two_on_large_window() {
        let a = build_velocity(IntInterval::centered(1024)).to_dense();
        let eig = eigensolve_hermitian(&a).unwrap();
        let norm = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!((norm - 2.0).abs() < 1e-4, "‖A‖ = {norm}");
    }

    #[test]
    fn ids_free_band_center_and_bulk() {
        let t = free_ids(2048, 4, 2001);
        assert!((t.n_at(0.0) - 0.5).abs() < 2.0 / 2048.0);
        assert!((t.n_at(std::f64::consts::SQRT_2) - 0.75).abs() < 0.005);
    }

    #[test]
    fn ids_saturates_outside_gershgorin_bounds() {
        let p = Potential::almost_mathieu(0.7);
        let t = ids(&p, &golden(), 256, PhaseSpec::equidistributed(4), default_energy_grid(&p, 501))
            .unwrap();
        assert_eq!(t.n_values()[0], 0.0);
        assert_eq!(*t.n_values().last().unwrap(), 1.0);
    }

    #[test]
    fn inverse_ids_free_quantiles() {
        let t = free_ids(2048, 4, 4001);
        let q = inverse_ids(&t);
        assert!(q.eval(0.5).abs() < 0.01);
        assert!((q.eval(0.75) - std::f64::consts::SQRT_2).abs() < 0.01);
        assert!((q.eval(0.0) + 2.0).abs() < 0.02);
        assert!((q.eval(1.0) - 2.0).abs() < 0.02);
    }

    #[test]
    fn inverse_composed_with_ids_is_identity_in_bulk() {
        let t = free_ids(1024, 4, 501);
        let q = inverse_ids(&t);
        for &e in &[-1.5, -0.8, 0.0, 0.4, 1.7] {
            assert!((q.eval(t.n_at(e)) - e).abs() < 2.0 * t.grid_spacing());
        }
    }

    #[test]
    fn group_velocity_free_case() {
        // for v = 0 every phase gives the same spectrum, so the quantile
        // resolution is set by the window alone; a big Sturm-counted window
        // with cells pooling many eigenvalues keeps the slopes clean
        let t = free_ids(8192, 2, 101);
        let gv = group_velocity_bound(&t, 1e-3, 20.0).unwrap();
        assert!((gv - 2.0).abs() < 0.05, "gv = {gv}");
    }

    #[test]
    fn group_velocity_rejects_bad_delta() {
        let t = free_ids(128, 2, 501);
        assert!(matches!(
            group_velocity_bound(&t, 0.5, 20.0),
            Err(SpectralError::OutOfRange { .. })
        ));
    }

    #[test]
    fn group_velocity_degenerate_flat_spectrum() {
        // hypothetical degenerate input: one jump carries all spectral weight
        let t = IdsTable {
            grid: (0..101).map(|i| -1.0 + 0.02 * i as f64).collect(),
            n_values: (0..101).map(|i| if i < 50 { 0.0 } else { 1.0 }).collect(),
            counts: (0..101).map(|i| if i < 50 { 0 } else { 6400 }).collect(),
            phase_count: 50,
            window_size: 128,
        };
        assert!(matches!(
            group_velocity_bound(&t, 1e-3, 20.0),
            Err(SpectralError::DegenerateSpectrum)
        ));
    }

    #[test]
    fn group_velocity_stable_under_window_doubling() {
        // same pooled eigenvalue count on both sides so the two estimators
        // share their sampling bias and the comparison sees finite-size
        // physics only
        let p = Potential::almost_mathieu(0.5);
        let a = golden();
        let grid = default_energy_grid(&p, 1001);
        let t1 = ids(&p, &a, 2048, PhaseSpec::equidistributed(16), grid.clone()).unwrap();
        let t2 = ids(&p, &a, 4096, PhaseSpec::equidistributed(8), grid).unwrap();
        let g1 = group_velocity_bound(&t1, 1e-3, 5.0).unwrap();
        let g2 = group_velocity_bound(&t2, 1e-3, 5.0).unwrap();
        assert!((g1 - g2).abs() / g2 < 0.03, "gv {g1} vs {g2}");
    }

    #[test]
    fn no_gaps_in_free_spectrum() {
        let t = free_ids(1024, 8, 2001);
        let report = detect_gaps(&t, 0.05);
        assert!(report.gaps.is_empty(), "spurious gaps: {:?}", report.gaps);
    }

    #[test]
    fn amo_largest_gap_matches_gap_labelling() {
        let p = Potential::almost_mathieu(0.5);
        let t = ids(&p, &golden(), 1024, PhaseSpec::equidistributed(16), default_energy_grid(&p, 4001))
            .unwrap();
        let report = detect_gaps(&t, 0.02);
        let widest = report.widest().expect("the almost Mathieu operator at λ=0.5 has gaps");
        // labels are kα mod 1; the two widest gaps carry k = ±1
        let dist = (widest.n_value - GOLDEN_MEAN)
            .abs()
            .min((widest.n_value - (1.0 - GOLDEN_MEAN)).abs());
        assert!(dist < 1e-2, "widest gap N = {}, gaps: {:?}", widest.n_value, report.gaps);
    }

    #[test]
    fn oversized_threshold_gives_empty_report() {
        let p = Potential::almost_mathieu(0.5);
        let t = ids(&p, &golden(), 256, PhaseSpec::equidistributed(4), default_energy_grid(&p, 501))
            .unwrap();
        assert!(detect_gaps(&t, 100.0).gaps.is_empty());
    }

    #[test]
    fn random_phase_mode_is_seed_deterministic() {
        let p = Potential::almost_mathieu(0.4);
        let grid = default_energy_grid(&p, 201);
        let t1 = ids(&p, &golden(), 128, PhaseSpec::random(8, 42), grid.clone()).unwrap();
        let t2 = ids(&p, &golden(), 128, PhaseSpec::random(8, 42), grid).unwrap();
        assert_eq!(t1.counts(), t2.counts());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn ids_is_nondecreasing(lam in 0.0f64..2.0, seed in 0u64..1000) {
            let p = Potential::almost_mathieu(lam);
            let t = ids(
                &p, &golden(), 64, PhaseSpec::random(4, seed), default_energy_grid(&p, 201),
            ).unwrap();
            prop_assert!(t.n_values().windows(2).all(|w| w[1] >= w[0]));
        }

        #[test]
        fn quantile_is_monotone(lam in 0.0f64..1.5) {
            let p = Potential::almost_mathieu(lam);
            let t = ids(
                &p, &golden(), 128, PhaseSpec::equidistributed(4), default_energy_grid(&p, 401),
            ).unwrap();
            let q = inverse_ids(&t);
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=50 {
                let e = q.eval(k as f64 / 50.0);
                prop_assert!(e >= prev - 1e-12);
                prev = e;
            }
        }
    }
}
