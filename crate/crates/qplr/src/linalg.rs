//! Dense and tridiagonal eigensolvers plus small iterative kernels.
//!
//! Eigendecompositions go through LAPACK (dstevd/dsterf for symmetric
//! tridiagonal, dsyevd/zheevd for dense), linked via the system OpenBLAS.
//! Spectrum counting for the integrated density of states uses a
//! hand-rolled Sturm pivot count, which is O(n) per energy and needs no
//! factorization.
//!
//! Layout note: LAPACK is column-major while `ndarray` buffers here are
//! row-major. A real symmetric matrix is its own transpose, so the buffer
//! can be handed over as-is; eigenvectors then come back in the *rows*.
//! For complex Hermitian input LAPACK effectively diagonalizes the
//! conjugate, so rows additionally need conjugation. Both wrappers below
//! return eigenvectors in the conventional column layout.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::os::raw::c_char;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("matrix is not Hermitian: max asymmetry {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("matrix dimension {dim} exceeds the supported limit {limit}")]
    TooLarge { dim: usize, limit: usize },
}

type Result<T> = std::result::Result<T, LinalgError>;

const JOB_V: c_char = b'V' as c_char;
const JOB_N: c_char = b'N' as c_char;
const UPLO_L: c_char = b'L' as c_char;

/// Eigenvalues (ascending) and eigenvectors (columns) of a real symmetric
/// tridiagonal matrix, via dstevd.
pub(crate) fn eig_tridiagonal(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1), "offdiagonal length mismatch");
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0); // LAPACK allows length n-1 but a padded buffer keeps pointers valid for n = 1
    let mut z = vec![0.0f64; n * n];
    let ni = n as i32;
    let mut info = 0i32;
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::dstevd_(
            &JOB_V, &ni, d.as_mut_ptr(), e.as_mut_ptr(), z.as_mut_ptr(), &ni,
            &mut wkopt, &-1, &mut iwkopt, &-1, &mut info,
        );
        if info == 0 {
            let (lw, liw) = (wkopt as i32, iwkopt);
            let mut work = vec![0.0f64; lw.max(1) as usize];
            let mut iwork = vec![0i32; liw.max(1) as usize];
            lapack_sys::dstevd_(
                &JOB_V, &ni, d.as_mut_ptr(), e.as_mut_ptr(), z.as_mut_ptr(), &ni,
                work.as_mut_ptr(), &lw, iwork.as_mut_ptr(), &liw, &mut info,
            );
        }
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dstevd", info });
    }
    // z is column-major: eigenvector j occupies z[j*n..(j+1)*n].
    let mut vecs = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            vecs[[i, j]] = z[j * n + i];
        }
    }
    Ok((d, vecs))
}

/// All eigenvalues (ascending) of a real symmetric tridiagonal matrix, via dsterf.
pub(crate) fn eigvals_tridiagonal(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1), "offdiagonal length mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut info = 0i32;
    unsafe {
        lapack_sys::dsterf_(&(n as i32), d.as_mut_ptr(), e.as_mut_ptr(), &mut info);
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dsterf", info });
    }
    Ok(d)
}

fn dsyevd(a: &mut Array2<f64>, jobz: c_char) -> Result<Vec<f64>> {
    let n = a.nrows();
    let ni = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::dsyevd_(
            &jobz, &UPLO_L, &ni, a.as_mut_ptr(), &ni, w.as_mut_ptr(),
            &mut wkopt, &-1, &mut iwkopt, &-1, &mut info,
        );
        if info == 0 {
            let (lw, liw) = (wkopt as i32, iwkopt);
            let mut work = vec![0.0f64; lw.max(1) as usize];
            let mut iwork = vec![0i32; liw.max(1) as usize];
            lapack_sys::dsyevd_(
                &jobz, &UPLO_L, &ni, a.as_mut_ptr(), &ni, w.as_mut_ptr(),
                work.as_mut_ptr(), &lw, iwork.as_mut_ptr(), &liw, &mut info,
            );
        }
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dsyevd", info });
    }
    Ok(w)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a dense real
/// symmetric matrix. Consumes the input as workspace.
pub(crate) fn eig_symmetric(mut a: Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    let w = dsyevd(&mut a, JOB_V)?;
    // Rows of the row-major buffer now hold the eigenvectors; transpose to columns.
    Ok((w, a.t().as_standard_layout().to_owned()))
}

/// Eigenvalues only (ascending) of a dense real symmetric matrix.
pub(crate) fn eigvals_symmetric(mut a: Array2<f64>) -> Result<Vec<f64>> {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    dsyevd(&mut a, JOB_N)
}

fn zheevd(a: &mut Array2<Complex64>, jobz: c_char) -> Result<Vec<f64>> {
    let n = a.nrows();
    let ni = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let (mut wkopt, mut rwkopt, mut iwkopt) = (Complex64::new(0.0, 0.0), 0.0f64, 0i32);
    unsafe {
        lapack_sys::zheevd_(
            &jobz, &UPLO_L, &ni, a.as_mut_ptr() as *mut _, &ni, w.as_mut_ptr(),
            &mut wkopt as *mut _ as *mut _, &-1, &mut rwkopt, &-1, &mut iwkopt, &-1, &mut info,
        );
        if info == 0 {
            let (lw, lrw, liw) = (wkopt.re as i32, rwkopt as i32, iwkopt);
            let mut work = vec![Complex64::new(0.0, 0.0); lw.max(1) as usize];
            let mut rwork = vec![0.0f64; lrw.max(1) as usize];
            let mut iwork = vec![0i32; liw.max(1) as usize];
            lapack_sys::zheevd_(
                &jobz, &UPLO_L, &ni, a.as_mut_ptr() as *mut _, &ni, w.as_mut_ptr(),
                work.as_mut_ptr() as *mut _, &lw, rwork.as_mut_ptr(), &lrw,
                iwork.as_mut_ptr(), &liw, &mut info,
            );
        }
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zheevd", info });
    }
    Ok(w)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a dense complex
/// Hermitian matrix. Consumes the input as workspace.
///
/// In the row-major buffer LAPACK sees the transpose, i.e. the conjugate of
/// a Hermitian matrix, so the returned rows are conjugated before the
/// transpose back to column layout.
pub(crate) fn eig_hermitian(mut a: Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    let w = zheevd(&mut a, JOB_V)?;
    let vecs = a.t().map(|z| z.conj());
    Ok((w, vecs))
}

/// Eigenvalues only (ascending) of a dense complex Hermitian matrix.
pub(crate) fn eigvals_hermitian(mut a: Array2<Complex64>) -> Result<Vec<f64>> {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    zheevd(&mut a, JOB_N)
}

/// Number of eigenvalues strictly below `x` for the symmetric tridiagonal
/// matrix with the given diagonal and offdiagonal, by the Sturm pivot count
/// of the LDLᵀ factorization of (T − x). Zero pivots are nudged negative,
/// matching the LAPACK dlaneg convention.
pub(crate) fn sturm_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    const PIVMIN: f64 = 1e-300;
    let n = diag.len();
    debug_assert_eq!(off.len(), n.saturating_sub(1));
    let mut count = 0usize;
    let mut q = 1.0f64;
    for i in 0..n {
        let off2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - off2 / q;
        if q < 0.0 {
            count += 1;
        }
        if q.abs() < PIVMIN {
            q = -PIVMIN;
        }
    }
    count
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest |eigenvalue| of a Hermitian operator given only its action,
/// via Lanczos with full reorthogonalization and a deterministic seeded
/// start vector. Converges from below; `tol` is relative.
pub(crate) fn hermitian_opnorm<F>(dim: usize, apply: F, tol: f64, max_iter: usize, seed: u64) -> f64
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nq = cnorm(&q);
    q.iter_mut().for_each(|z| *z /= nq);

    let mut basis: Vec<Vec<Complex64>> = vec![q.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut last = f64::NAN;
    let mut stable = 0usize;

    for k in 0..max_iter.min(dim) {
        apply(&basis[k], &mut w);
        let alpha = cdot(&basis[k], &w).re;
        alphas.push(alpha);
        for (wi, qi) in w.iter_mut().zip(&basis[k]) {
            *wi -= alpha * qi;
        }
        if k > 0 {
            let beta_prev = betas[k - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[k - 1]) {
                *wi -= beta_prev * qi;
            }
        }
        // full reorthogonalization
        for qv in &basis {
            let c = cdot(qv, &w);
            for (wi, qi) in w.iter_mut().zip(qv) {
                *wi -= c * qi;
            }
        }
        let beta = cnorm(&w);
        let ritz_max = {
            let t = eigvals_tridiagonal(&alphas, &betas).unwrap_or_default();
            t.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
        };
        if beta < 1e-14 {
            return ritz_max;
        }
        // Ritz values can stall for a few iterations before the top
        // eigenvalue is resolved; require sustained agreement.
        if (ritz_max - last).abs() <= tol * ritz_max.max(1e-300) {
            stable += 1;
            if k >= 8 && stable >= 3 {
                return ritz_max;
            }
        } else {
            stable = 0;
        }
        last = ritz_max;
        betas.push(beta);
        let next: Vec<Complex64> = w.iter().map(|z| z / beta).collect();
        basis.push(next);
    }
    last
}

/// Max entrywise deviation from Hermitian symmetry.
pub(crate) fn hermiticity_residual(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    r
}
