//! Shared oracles for the integration and acceptance suites.
//!
//! Everything here is independent of the library's computation paths:
//! Bessel functions come from Miller's backward recurrence, closed forms
//! are plain formulas.

#![allow(dead_code)]

/// J_n(x) for n ≥ 0, x ≥ 0 by Miller's backward recurrence with the
/// Σ J_0 + 2 Σ J_{2k} = 1 normalization. Accurate to ~1e-13 for the
/// argument range used in the tests (x ≤ 1100, n ≤ x + 300).
pub fn bessel_j(n: usize, x: f64) -> f64 {
    assert!(x >= 0.0);
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 1e-6 && n >= 3 {
        return 0.0; // below double precision for the sizes used here
    }
    let start = (n.max(x as usize) as f64 + 40.0 + 1.8 * x.sqrt() * 4.0) as usize;
    let start = start + (start % 2); // even start index
    let mut jp = 0.0f64; // J_{start+1}
    let mut j = 1e-300f64; // J_{start}, arbitrary seed
    let mut norm = 0.0f64;
    let mut out = 0.0f64;
    for k in (0..start).rev() {
        let jm = 2.0 * (k as f64 + 1.0) / x * j - jp;
        jp = j;
        j = jm;
        // j now holds J_k
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == n {
            out = j;
        }
        if j.abs() > 1e250 {
            jp /= 1e250;
            j /= 1e250;
            norm /= 1e250;
            out /= 1e250;
        }
    }
    out / norm
}

/// Integrated density of states of the free Laplacian: 1 - arccos(E/2)/π
/// on [-2, 2], clamped outside.
pub fn free_ids(e: f64) -> f64 {
    if e <= -2.0 {
        0.0
    } else if e >= 2.0 {
        1.0
    } else {
        1.0 - (e / 2.0).acos() / std::f64::consts::PI
    }
}

/// Density of states of the free Laplacian: 1/(π √(4 - E²)).
pub fn free_dos(e: f64) -> f64 {
    1.0 / (std::f64::consts::PI * (4.0 - e * e).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        // frozen high-precision references
        let cases = [
            (0usize, 1.0, 0.7651976865579665),
            (1, 1.0, 0.4400505857449335),
            (7, 5.5, 0.08660122579161255),
            (50, 30.0, 2.0581656631564178e-8),
            (0, 200.0, -0.015437439930565092),
            (150, 200.0, -0.03159355927345842),
            (23, 14.2, 1.6257932796415129e-4),
            (2, 0.001, 1.2499998958333366e-7),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!(
                (got - want).abs() < 1e-13 * (1.0 + want.abs()),
                "J_{n}({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn bessel_sum_rule() {
        // Σ_r J_r(x)² = 1 over all integers (J_{-r} = (-1)^r J_r)
        let x = 37.0;
        let mut sum = bessel_j(0, x).powi(2);
        for r in 1..200 {
            sum += 2.0 * bessel_j(r, x).powi(2);
        }
        assert!((sum - 1.0).abs() < 1e-12, "sum = {sum}");
    }
}
