//! The Cesàro-averaged velocity operator Q_T and its norm plateau in the
//! three regimes: free (‖Q_T‖ = 2 identically), subcritical (plateau at
//! the ballistic channel norm), supercritical (collapse).
//!
//! Run: cargo run --release -p qplr --example qnorm_plateau

use qplr::model::{build_effective, build_velocity, Boundary, FrequencyVector, IntInterval, Potential};
use qplr::transport::q_norm_curve;

fn main() {
    let alpha = FrequencyVector::golden();
    let window = IntInterval::centered(1024);
    let t_grid: Vec<f64> = (1..=8).map(|k| 16.0 * k as f64).collect();

    for (name, p) in [
        ("free (v = 0)", Potential::zero(1)),
        ("almost Mathieu λ = 0.5", Potential::almost_mathieu(0.5)),
        ("almost Mathieu λ = 2.0", Potential::almost_mathieu(2.0)),
    ] {
        let op = build_effective(&p, &alpha, &[0.0], window, Boundary::Dirichlet).unwrap();
        let a = build_velocity(window);
        let curve = q_norm_curve(&op, &a, &t_grid).unwrap();
        println!("# {name}");
        println!("T,central_norm,full_norm,min_singular");
        for pt in &curve.points {
            println!(
                "{:.1},{:.6},{:.6},{:.2e}",
                pt.t, pt.central_norm, pt.full_norm, pt.min_singular
            );
        }
        println!(
            "# plateau (median of last quartile): {:.6}, oscillation band {:.2e}\n",
            curve.plateau, curve.oscillation
        );
    }
}
