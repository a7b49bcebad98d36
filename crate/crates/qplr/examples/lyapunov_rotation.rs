//! Lyapunov exponent and fibered rotation number across the three coupling
//! regimes of the almost Mathieu operator, with the N(E) = 1 - 2ρ(E)
//! identity checked against eigenvalue counting.
//!
//! Run: cargo run --release -p qplr --example lyapunov_rotation

use qplr::cocycle::{lyapunov, rotation_number};
use qplr::model::{FrequencyVector, Potential};
use qplr::spectral::{default_energy_grid, ids, PhaseSpec};

fn main() {
    let alpha = FrequencyVector::golden();
    let x0 = [0.31];
    let steps = 50_000;

    for lambda in [0.5, 1.0, 2.0] {
        let p = Potential::almost_mathieu(lambda);
        let table = ids(
            &p,
            &alpha,
            1024,
            PhaseSpec::equidistributed(16),
            default_energy_grid(&p, 801),
        )
        .unwrap();

        println!("# λ = {lambda} (subcritical γ = 0 on σ, supercritical γ = ln λ)");
        println!("E,gamma,rho,N_from_rho,N_counted");
        let mut worst = 0.0f64;
        for k in 0..=24 {
            let e = -2.0 - 2.0 * lambda + (4.0 + 4.0 * lambda) * k as f64 / 24.0;
            let g = lyapunov(&p, &alpha, e, &x0, steps);
            let rho = rotation_number(&p, &alpha, e, &x0, steps);
            let n_rho = 1.0 - 2.0 * rho;
            let n_cnt = table.n_at(e);
            worst = worst.max((n_rho - n_cnt).abs());
            println!("{e:+.3},{g:.5},{rho:.5},{n_rho:.5},{n_cnt:.5}");
        }
        println!("# sup |1-2ρ - N| on this grid: {worst:.2e}");
        if lambda > 1.0 {
            println!("# expected plateau of γ on the spectrum: ln λ = {:.5}", lambda.ln());
        }
        println!();
    }
}
