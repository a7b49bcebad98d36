//! Aubry-duality cross-checks.
//!
//! The dual operator H̃(θ) has pure point spectrum in the regime where H(x)
//! is ballistic, and the time-averaged dual velocity observable Q̃(θ) is
//! diagonal in its eigenbasis with entries
//!
//! ```text
//! d_k = Σ_m 2 sin(2π(m·α + θ)) |u_k(m)|².
//! ```
//!
//! The supremum of |d_k| over bulk-localized eigenvectors is a computable
//! stand-in for ‖Q̃‖ = sup_k |d(θ + kα)|, which in turn equals ‖Q‖ of the
//! primal operator; the reducibility matrices behind that identity are
//! never reconstructed (numerically ill-posed), only their diagonal trace
//! d(θ) is accessed through the eigenvectors.

use crate::model::{build_dual, build_effective, Boundary, FrequencyVector, IntInterval, ModelError, Potential};
use crate::spectral::{eigensolve, SpectralData, SpectralError};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DualityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("operation supports one-frequency (d = 1) potentials, got d = {dim}")]
    OneFrequencyOnly { dim: usize },
    #[error("no eigenvectors left after bulk filtering (window too small for edge fraction {edge_fraction})")]
    EmptyAfterFilter { edge_fraction: f64 },
}

type Result<T> = std::result::Result<T, DualityError>;

/// Diagonal entries of the dual averaged velocity operator Q̃(θ) in the
/// eigenbasis of a dual truncation, one entry per eigenvector, along with
/// the matching eigenvalues and localization centers.
#[derive(Debug, Clone)]
pub struct DualDiagonal {
    pub theta: f64,
    pub window: IntInterval,
    pub entries: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Weighted localization center Σ_m m |u_k(m)|² (flattened index for
    /// multi-frequency boxes).
    pub centers: Vec<f64>,
}

impl DualDiagonal {
    /// Sup of |entries| over eigenvectors whose center keeps at least
    /// `edge_fraction` of the window away from both Dirichlet edges.
    pub fn bulk_sup(&self, edge_fraction: f64) -> Result<f64> {
        let len = self.window.len() as f64;
        let lo = self.window.lo as f64 + edge_fraction * len;
        let hi = self.window.hi as f64 - edge_fraction * len;
        let best = self
            .centers
            .iter()
            .zip(&self.entries)
            .filter(|(&c, _)| c >= lo && c <= hi)
            .map(|(_, &e)| e.abs())
            .fold(f64::NAN, f64::max);
        if best.is_finite() {
            Ok(best)
        } else {
            Err(DualityError::EmptyAfterFilter { edge_fraction })
        }
    }
}

fn multi_site(window: IntInterval, dims: usize, idx: usize) -> Vec<i64> {
    let len = window.len();
    let mut rem = idx;
    let mut out = vec![0i64; dims];
    for a in (0..dims).rev() {
        out[a] = window.lo + (rem % len) as i64;
        rem /= len;
    }
    out
}

/// Q̃(θ) diagonal entries d_k = Σ_m 2 sin(2π(m·α + θ)) |u_k(m)|² for every
/// eigenvector of a dual truncation.
pub fn dual_q_diagonal(
    s: &SpectralData,
    alpha: &FrequencyVector,
    theta: f64,
) -> Result<DualDiagonal> {
    let n = s.dim();
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let m = multi_site(s.window, s.dims, i);
            2.0 * (TAU * (alpha.dot(&m) + theta)).sin()
        })
        .collect();
    let mut entries = Vec::with_capacity(n);
    let mut centers = Vec::with_capacity(n);
    for k in 0..n {
        let col = s.eigenvectors.column(k);
        let mut entry = 0.0;
        let mut center = 0.0;
        for i in 0..n {
            let w2 = col[i] * col[i];
            entry += weights[i] * w2;
            center += i as f64 * w2;
        }
        entries.push(entry);
        centers.push(if s.dims == 1 { s.window.lo as f64 + center } else { center });
    }
    Ok(DualDiagonal {
        theta,
        window: s.window,
        entries,
        eigenvalues: s.eigenvalues.clone(),
        centers,
    })
}

/// Hausdorff distance between two finite point sets on the line.
pub fn hausdorff_distance(a: &[f64], b: &[f64]) -> f64 {
    fn directed(from: &[f64], to_sorted: &[f64]) -> f64 {
        from.iter()
            .map(|&x| {
                let i = to_sorted.partition_point(|&y| y < x);
                let right = to_sorted.get(i).map(|&y| (y - x).abs());
                let left = (i > 0).then(|| (to_sorted[i - 1] - x).abs());
                match (left, right) {
                    (Some(l), Some(r)) => l.min(r),
                    (Some(l), None) => l,
                    (None, Some(r)) => r,
                    (None, None) => f64::INFINITY,
                }
            })
            .fold(0.0f64, f64::max)
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    directed(&sa, &sb).max(directed(&sb, &sa))
}

fn bulk_eigenvalues(s: &SpectralData, edge_fraction: f64) -> Vec<f64> {
    let n = s.dim();
    let len = n as f64;
    let lo = edge_fraction * len;
    let hi = len - 1.0 - edge_fraction * len;
    (0..n)
        .filter(|&k| {
            let col = s.eigenvectors.column(k);
            let center: f64 = (0..n).map(|i| i as f64 * col[i] * col[i]).sum();
            center >= lo && center <= hi
        })
        .map(|k| s.eigenvalues[k])
        .collect()
}

/// Bulk-filtered Hausdorff distance between the spectra of matched
/// truncations of H(x) and H̃(θ). Eigenvectors centered within 5% of a
/// window edge are dropped on both sides to suppress Dirichlet boundary
/// states. One-frequency potentials only.
pub fn dual_spectrum_check(
    p: &Potential,
    alpha: &FrequencyVector,
    theta: f64,
    x: &[f64],
    window: IntInterval,
) -> Result<f64> {
    if p.dim() != 1 {
        return Err(DualityError::OneFrequencyOnly { dim: p.dim() });
    }
    const EDGE: f64 = 0.05;
    let h = build_effective(p, alpha, x, window, Boundary::Dirichlet)?;
    let dual = build_dual(p, alpha, theta, window)?;
    let sh = eigensolve(&h)?;
    let sd = eigensolve(&dual)?;
    let eh = bulk_eigenvalues(&sh, EDGE);
    let ed = bulk_eigenvalues(&sd, EDGE);
    if eh.is_empty() || ed.is_empty() {
        return Err(DualityError::EmptyAfterFilter { edge_fraction: EDGE });
    }
    Ok(hausdorff_distance(&eh, &ed))
}

/// d(θ) candidate read off one eigenvector.
#[derive(Debug, Clone, Copy)]
pub struct DThetaCandidate {
    pub value: f64,
    pub eigenvalue: f64,
    pub center: f64,
}

/// The diagonal entry d(θ) of Q̃(θ) for the eigenvector localized nearest
/// the window center (the finite-volume proxy for the k = 0 label).
#[derive(Debug, Clone)]
pub struct DThetaResult {
    pub value: f64,
    pub eigenvalue: f64,
    pub center: f64,
    /// Set when a second eigenvector sits within one site of the same
    /// distance from the window center; its candidate value is reported
    /// alongside.
    pub ambiguous: bool,
    pub alternate: Option<DThetaCandidate>,
}

/// d(θ) from a dual truncation: the Q̃ diagonal entry of the eigenvector
/// whose localization center is nearest the window center.
pub fn d_theta(s: &SpectralData, alpha: &FrequencyVector, theta: f64) -> Result<DThetaResult> {
    let diag = dual_q_diagonal(s, alpha, theta)?;
    let mid = s.window.center();
    let mut order: Vec<usize> = (0..diag.entries.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (diag.centers[a] - mid).abs();
        let db = (diag.centers[b] - mid).abs();
        da.partial_cmp(&db).unwrap()
    });
    let best = order[0];
    let candidate = |k: usize| DThetaCandidate {
        value: diag.entries[k],
        eigenvalue: diag.eigenvalues[k],
        center: diag.centers[k],
    };
    let (ambiguous, alternate) = match order.get(1) {
        Some(&second) => {
            let d0 = (diag.centers[best] - mid).abs();
            let d1 = (diag.centers[second] - mid).abs();
            if (d1 - d0).abs() < 1.0 {
                (true, Some(candidate(second)))
            } else {
                (false, None)
            }
        }
        None => (false, None),
    };
    Ok(DThetaResult {
        value: diag.entries[best],
        eigenvalue: diag.eigenvalues[best],
        center: diag.centers[best],
        ambiguous,
        alternate,
    })
}
