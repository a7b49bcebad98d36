//! Exact isotropic XY chains at small size, the Jordan-Wigner frame, and
//! the many-body ⇄ one-particle covariance identity that pins every sign
//! convention in the crate; on top of it, the free-fermion light-cone
//! velocity fit.
//!
//! The chain Hamiltonian is
//!
//! ```text
//! H = -Σ_j (σˣ_j σˣ_{j+1} + σʸ_j σʸ_{j+1}) - Σ_j ν_j σᶻ_j
//! ```
//!
//! with open bonds (j runs over interior bonds only). Writing it through
//! the Jordan-Wigner operators c_j gives H = 2Γ(g) + const with the
//! one-particle generator g = diag(ν) - L, so the frame evolves as
//! C(t) = e^{-2itg} C. g is the parity-gauge conjugate of -(L + diag ν):
//! g = D (L + diag ν) D with D = diag((-1)^j) up to overall sign, hence
//! |⟨δ_r, e^{-2itg} δ_l⟩| equals the same amplitude for the effective
//! Hamiltonian L + diag(ν) and all light-cone radii agree between the two.
//! `covariance_check` verifies the identity operator-by-operator rather
//! than trusting the algebra.

use crate::linalg;
use crate::model::{build_effective, Boundary, FrequencyVector, IntInterval, Potential};
use crate::spectral::{eigensolve, SpectralError};
use crate::transport::{delta_state, evolve, TransportError};
use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("chain size {n} outside the supported range 2..=12")]
    SizeOutOfRange { n: usize },
    #[error("field vector has {found} entries for {expected} sites")]
    FieldLength { expected: usize, found: usize },
    #[error("site pair (l, r) = ({l}, {r}) violates 0 ≤ l ≤ r < {n}")]
    IndexViolation { l: usize, r: usize, n: usize },
    #[error("front threshold {threshold} never attained at any sampled time")]
    ThresholdNeverAttained { threshold: f64 },
    #[error("velocity fit needs at least 2 usable time points, got {points}")]
    NotEnoughPoints { points: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

type Result<T> = std::result::Result<T, ChainError>;

const MAX_SITES: usize = 12;

/// Site j occupies bit (n-1-j): site 0 is the leftmost tensor factor, and
/// basis index 0 is the all-up product state u_Λ.
#[inline]
fn site_bit(n: usize, j: usize) -> usize {
    1 << (n - 1 - j)
}

/// Dense many-body operator on n ≤ 12 sites. The XY Hamiltonian is real
/// symmetric in the product basis (σʸσʸ has real entries).
#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    pub n_sites: usize,
    pub nu: Vec<f64>,
    pub matrix: Array2<f64>,
}

/// Assemble H = -Σ(σˣσˣ + σʸσʸ) - Σ ν_j σᶻ on an open chain of n sites.
pub fn build_chain(nu: &[f64], n: usize) -> Result<ManyBodyOperator> {
    if !(2..=MAX_SITES).contains(&n) {
        return Err(ChainError::SizeOutOfRange { n });
    }
    if nu.len() != n {
        return Err(ChainError::FieldLength { expected: n, found: nu.len() });
    }
    let dim = 1usize << n;
    let mut h = Array2::<f64>::zeros((dim, dim));
    for s in 0..dim {
        let mut diag = 0.0;
        for (j, &f) in nu.iter().enumerate() {
            let z = if s & site_bit(n, j) == 0 { 1.0 } else { -1.0 };
            diag -= f * z;
        }
        h[[s, s]] = diag;
        // σˣσˣ + σʸσʸ acts as 2·(flip-flop) on antialigned bonds
        for j in 0..n - 1 {
            let (b1, b2) = (site_bit(n, j), site_bit(n, j + 1));
            if (s & b1 == 0) != (s & b2 == 0) {
                let t = s ^ b1 ^ b2;
                h[[t, s]] += -2.0;
            }
        }
    }
    Ok(ManyBodyOperator { n_sites: n, nu: nu.to_vec(), matrix: h })
}

/// A signed partial permutation: the exact form of Jordan-Wigner operators
/// and their products. Column s maps to at most one (row, sign) pair, so
/// composition and anticommutators can be evaluated without roundoff.
#[derive(Debug, Clone)]
pub struct FermionOp {
    dim: usize,
    map: Vec<Option<(usize, f64)>>,
}

impl FermionOp {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> FermionOp {
        let mut map = vec![None; self.dim];
        for (col, entry) in self.map.iter().enumerate() {
            if let Some((row, sign)) = entry {
                map[*row] = Some((col, *sign));
            }
        }
        FermionOp { dim: self.dim, map }
    }

    /// self ∘ rhs (rhs applied first).
    pub fn compose(&self, rhs: &FermionOp) -> FermionOp {
        let map = rhs
            .map
            .iter()
            .map(|e| {
                e.and_then(|(mid, s1)| self.map[mid].map(|(row, s2)| (row, s1 * s2)))
            })
            .collect();
        FermionOp { dim: self.dim, map }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (col, entry) in self.map.iter().enumerate() {
            if let Some((row, sign)) = entry {
                m[[*row, col]] = *sign;
            }
        }
        m
    }

    pub fn to_dense_complex(&self) -> Array2<Complex64> {
        self.to_dense().map(|&x| Complex64::new(x, 0.0))
    }
}

/// Max deviation of P∘Q + Q∘P from `target` (identity scaled by
/// `target_scale` times the unit matrix), evaluated exactly.
fn anticommutator_deviation(p: &FermionOp, q: &FermionOp, target_scale: f64) -> f64 {
    let pq = p.compose(q);
    let qp = q.compose(p);
    let mut dev: f64 = 0.0;
    for col in 0..p.dim {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for e in [pq.map[col], qp.map[col]].into_iter().flatten() {
            match entries.iter_mut().find(|(r, _)| *r == e.0) {
                Some((_, s)) => *s += e.1,
                None => entries.push(e),
            }
        }
        let mut diag = 0.0;
        for (row, s) in entries {
            if row == col {
                diag = s;
            } else {
                dev = dev.max(s.abs());
            }
        }
        dev = dev.max((diag - target_scale).abs());
    }
    dev
}

/// Jordan-Wigner operators on n sites: the string-dressed lowering family
/// c_j = σᶻ_0 ⋯ σᶻ_{j-1} a_j with a = [[0,1],[0,0]], plus the bare raising
/// operators a_j*.
#[derive(Debug, Clone)]
pub struct FermionFrame {
    pub n_sites: usize,
    lowering: Vec<FermionOp>,
    raising: Vec<FermionOp>,
}

pub fn jordan_wigner(n: usize) -> Result<FermionFrame> {
    if n == 0 || n > MAX_SITES {
        return Err(ChainError::SizeOutOfRange { n });
    }
    let dim = 1usize << n;
    let mut lowering = Vec::with_capacity(n);
    let mut raising = Vec::with_capacity(n);
    for j in 0..n {
        let bit = site_bit(n, j);
        let mut c_map = vec![None; dim];
        let mut a_dag_map = vec![None; dim];
        for s in 0..dim {
            if s & bit != 0 {
                // string sign: product of σᶻ over sites left of j
                let mut sign = 1.0;
                for k in 0..j {
                    if s & site_bit(n, k) != 0 {
                        sign = -sign;
                    }
                }
                c_map[s] = Some((s & !bit, sign));
            } else {
                a_dag_map[s] = Some((s | bit, 1.0));
            }
        }
        lowering.push(FermionOp { dim, map: c_map });
        raising.push(FermionOp { dim, map: a_dag_map });
    }
    Ok(FermionFrame { n_sites: n, lowering, raising })
}

impl FermionFrame {
    pub fn c(&self, j: usize) -> &FermionOp {
        &self.lowering[j]
    }

    pub fn a_dag(&self, j: usize) -> &FermionOp {
        &self.raising[j]
    }

    /// Max deviation from the canonical anticommutation relations
    /// {c_i, c_j*} = δ_ij, {c_i, c_j} = 0, over all pairs. Exact zeros and
    /// ones come out as exact floats, so this is 0.0 for a correct frame.
    pub fn car_max_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.n_sites {
            for j in 0..self.n_sites {
                let cj_dag = self.lowering[j].adjoint();
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max(anticommutator_deviation(&self.lowering[i], &cj_dag, target));
                dev = dev.max(anticommutator_deviation(&self.lowering[i], &self.lowering[j], 0.0));
            }
        }
        dev
    }
}

/// One-particle generator g = diag(ν) - L of the Jordan-Wigner frame
/// evolution C(t) = e^{-2itg} C, as (diagonal, offdiagonal).
pub fn effective_generator(nu: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (nu.to_vec(), vec![-1.0; nu.len().saturating_sub(1)])
}

/// G = e^{-2itg} on n sites.
pub fn one_particle_propagator(nu: &[f64], t: f64) -> Result<Array2<Complex64>> {
    let (d, e) = effective_generator(nu);
    let (vals, vecs) = linalg::eig_tridiagonal(&d, &e)?;
    let n = nu.len();
    let mut g = Array2::zeros((n, n));
    for l in 0..n {
        for r in 0..n {
            let mut z = Complex64::new(0.0, 0.0);
            for j in 0..n {
                z += Complex64::from_polar(1.0, -2.0 * t * vals[j]) * vecs[[l, j]] * vecs[[r, j]];
            }
            g[[l, r]] = z;
        }
    }
    Ok(g)
}

/// Frobenius-norm check of the covariance identity: evolves every frame
/// operator with the exact many-body propagator and compares against the
/// one-particle prediction Σ_k G_{jk} c_k. Returns the max deviation over
/// frame operators (Frobenius dominates the operator norm).
pub fn covariance_check(chain: &ManyBodyOperator, frame: &FermionFrame, t: f64) -> Result<f64> {
    assert_eq!(chain.n_sites, frame.n_sites, "chain and frame sizes differ");
    let n = chain.n_sites;
    let (vals, w) = linalg::eig_symmetric(chain.matrix.clone())?;
    let g = one_particle_propagator(&chain.nu, t)?;

    // frame operators in the many-body eigenbasis
    let tilde: Vec<Array2<f64>> = (0..n)
        .map(|k| w.t().dot(&frame.c(k).to_dense()).dot(&w))
        .collect();

    let dim = 1usize << n;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut dev2 = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                // c_j(t) entry in the eigenbasis
                let phase = Complex64::from_polar(1.0, (vals[a] - vals[b]) * t);
                let lhs = phase * tilde[j][[a, b]];
                let mut rhs = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    rhs += g[[j, k]] * tilde[k][[a, b]];
                }
                dev2 += (lhs - rhs).norm_sqr();
            }
        }
        worst = worst.max(dev2.sqrt());
    }
    Ok(worst)
}

/// Both sides of the commutator bound at one (l, r, t), plus the matrix
/// element ⟨u_Λ|[c_l(t), a_r*]|u_Λ⟩ that must reproduce the one-particle
/// propagator element exactly.
#[derive(Debug, Clone, Copy)]
pub struct CommutatorCheck {
    /// Exact operator norm ‖[c_l(t), a_r*]‖.
    pub commutator_norm: f64,
    /// |⟨δ_r, e^{-2itg} δ_l⟩| — the lower bound it must dominate.
    pub propagator_bound: f64,
    pub matrix_element: Complex64,
    pub one_particle_element: Complex64,
}

impl CommutatorCheck {
    pub fn bound_holds(&self) -> bool {
        self.commutator_norm >= self.propagator_bound - 1e-10
    }

    pub fn element_matches(&self) -> bool {
        (self.matrix_element - self.one_particle_element).norm() <= 1e-10
    }
}

pub fn commutator_bound_check(
    chain: &ManyBodyOperator,
    frame: &FermionFrame,
    l: usize,
    r: usize,
    t: f64,
) -> Result<CommutatorCheck> {
    assert_eq!(chain.n_sites, frame.n_sites, "chain and frame sizes differ");
    let n = chain.n_sites;
    if l > r || r >= n {
        return Err(ChainError::IndexViolation { l, r, n });
    }
    let (vals, w) = linalg::eig_symmetric(chain.matrix.clone())?;
    let dim = 1usize << n;

    // c_l(t) = W diag(e^{iλt}) Wᵀ c_l W diag(e^{-iλt}) Wᵀ
    let tilde = w.t().dot(&frame.c(l).to_dense()).dot(&w);
    let mut tilde_t = Array2::<Complex64>::zeros((dim, dim));
    for a in 0..dim {
        for b in 0..dim {
            tilde_t[[a, b]] = Complex64::from_polar(1.0, (vals[a] - vals[b]) * t) * tilde[[a, b]];
        }
    }
    let wc = w.map(|&x| Complex64::new(x, 0.0));
    let c_l_t = wc.dot(&tilde_t).dot(&wc.t());

    let a_dag = frame.a_dag(r).to_dense_complex();
    let comm = c_l_t.dot(&a_dag) - a_dag.dot(&c_l_t);

    let comm_dag = comm.map(|z| z.conj()).reversed_axes().to_owned();
    let gram = comm_dag.dot(&comm);
    let svals = linalg::eigvals_hermitian(gram)?;
    let commutator_norm = svals.iter().fold(0.0f64, |m, &v| m.max(v)).max(0.0).sqrt();

    let g = one_particle_propagator(&chain.nu, t)?;
    let one_particle_element = g[[l, r]];
    Ok(CommutatorCheck {
        commutator_norm,
        propagator_bound: one_particle_element.norm(),
        matrix_element: comm[[0, 0]],
        one_particle_element,
    })
}

/// Empirical Lieb-Robinson velocity from the growth of the free-fermion
/// light cone.
#[derive(Debug, Clone)]
pub struct VelocityFit {
    /// Least-squares slope of front radius vs T at the requested threshold.
    pub v_emp: f64,
    pub threshold: f64,
    pub slope_std_error: f64,
    pub intercept: f64,
    /// (T, front radius) points entering the fit.
    pub points: Vec<(f64, f64)>,
    /// Fitted slope at thresholds spanning one decade around the requested
    /// one: (threshold, slope).
    pub sensitivity: Vec<(f64, f64)>,
}

fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let se = if points.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some((slope, intercept, se))
}

/// Fit the Lieb-Robinson front velocity on the free-fermion path: evolve
/// δ at the window center under the one-particle propagator of 2·H_eff
/// (time 2T per chain time T, amplitudes identical to the frame generator
/// by the parity gauge), read the largest radius where |amplitude| still
/// reaches `threshold`, and fit radius against T.
///
/// Containment: evolved time 2T must obey the transport rule, i.e.
/// T ≤ window/16.
pub fn lr_velocity_fit(
    p: &Potential,
    alpha: &FrequencyVector,
    x: &[f64],
    window: IntInterval,
    t_grid: &[f64],
    threshold: f64,
) -> Result<VelocityFit> {
    assert!(threshold > 0.0, "threshold must be positive");
    let op = build_effective(p, alpha, x, window, Boundary::Dirichlet).map_err(SpectralError::from)?;
    let s = eigensolve(&op)?;
    let limit = window.len() as f64 / 16.0;
    for &t in t_grid {
        if !(t >= 0.0) || t > limit {
            return Err(ChainError::Transport(TransportError::Containment {
                t,
                window: window.len(),
                limit,
            }));
        }
    }
    let l = window.site(window.len() / 2);
    let psi0 = delta_state(window, l).expect("center site is inside the window");

    let mut profiles: Vec<(f64, Vec<f64>)> = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let psi = evolve(&s, &psi0, 2.0 * t)?;
        profiles.push((t, psi.iter().map(|z| z.norm()).collect()));
    }

    let radius_at = |thr: f64| -> Vec<(f64, f64)> {
        profiles
            .iter()
            .filter_map(|(t, amps)| {
                amps.iter()
                    .enumerate()
                    .filter(|(_, &a)| a >= thr)
                    .map(|(i, _)| (window.site(i) - l).abs())
                    .max()
                    .map(|r| (*t, r as f64))
            })
            .collect()
    };

    let points = radius_at(threshold);
    if points.is_empty() {
        return Err(ChainError::ThresholdNeverAttained { threshold });
    }
    let (v_emp, intercept, slope_std_error) =
        fit_line(&points).ok_or(ChainError::NotEnoughPoints { points: points.len() })?;

    let decade = 10.0f64.sqrt();
    let sensitivity = [threshold / decade, threshold, threshold * decade]
        .iter()
        .map(|&thr| {
            let slope = fit_line(&radius_at(thr)).map(|f| f.0).unwrap_or(f64::NAN);
            (thr, slope)
        })
        .collect();

    Ok(VelocityFit { v_emp, threshold, slope_std_error, intercept, points, sensitivity })
}
