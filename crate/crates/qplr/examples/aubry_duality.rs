//! Aubry duality at work: primal and dual spectra coincide, and the
//! diagonal entries d_k of the dual averaged velocity operator recover the
//! primal ‖Q‖ through sup|d_k|.
//!
//! Run: cargo run --release -p qplr --example aubry_duality

use qplr::duality::{d_theta, dual_q_diagonal, dual_spectrum_check};
use qplr::model::{build_dual, build_effective, build_velocity, Boundary, FrequencyVector, IntInterval, Potential};
use qplr::spectral::eigensolve;
use qplr::transport::q_norm_curve;

fn main() {
    let alpha = FrequencyVector::golden();
    let theta = 0.137;

    println!("# Hausdorff distance between σ(H(x)) and σ(H̃(θ)), window 1024, 5% bulk filter");
    for lambda in [0.5, 1.0, 2.0] {
        let p = Potential::almost_mathieu(lambda);
        let d = dual_spectrum_check(&p, &alpha, theta, &[0.21], IntInterval::centered(1024)).unwrap();
        println!("λ = {lambda}: distance = {d:.4}");
    }

    // sup of dual diagonal entries vs the transport plateau at λ = 0.5
    let p = Potential::almost_mathieu(0.5);
    let dual = build_dual(&p, &alpha, theta, IntInterval::centered(1024)).unwrap();
    let sd = eigensolve(&dual).unwrap();
    let diag = dual_q_diagonal(&sd, &alpha, theta).unwrap();
    let sup = diag.bulk_sup(0.05).unwrap();

    let window = IntInterval::centered(1024);
    let op = build_effective(&p, &alpha, &[0.0], window, Boundary::Dirichlet).unwrap();
    let a = build_velocity(window);
    let t_grid: Vec<f64> = (1..=8).map(|k| 16.0 * k as f64).collect();
    let plateau = q_norm_curve(&op, &a, &t_grid).unwrap().plateau;

    println!("\n# λ = 0.5: sup_k |d_k| = {sup:.5} vs transport ‖Q‖ plateau = {plateau:.5}");

    let dt = d_theta(&sd, &alpha, theta).unwrap();
    println!(
        "# d(θ = {theta}): value {:+.5} from the eigenvector centered at {:+.1} (E = {:+.4}){}",
        dt.value,
        dt.center,
        dt.eigenvalue,
        if dt.ambiguous { " [center ambiguous]" } else { "" }
    );
}
