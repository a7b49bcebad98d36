//! Density of states two ways: the Kotani formula (phase average of
//! 1/Im m over the Weyl m-function) against finite differences of the
//! counted IDS.
//!
//! Run: cargo run --release -p qplr --example kotani_density

use qplr::cocycle::kotani_density;
use qplr::model::{FrequencyVector, Potential};
use qplr::spectral::{default_energy_grid, ids, inverse_ids, PhaseSpec};

fn main() {
    let p = Potential::almost_mathieu(0.5);
    let alpha = FrequencyVector::golden();

    let table = ids(
        &p,
        &alpha,
        2048,
        PhaseSpec::equidistributed(32),
        default_energy_grid(&p, 2001),
    )
    .unwrap();
    let quantile = inverse_ids(&table);

    println!("# dN/dE for the almost Mathieu operator at λ = 0.5, ε = 1e-4");
    println!("N,E,kotani,stderr,histogram,rel_dev");
    for k in 1..=17 {
        let q = 0.05 + 0.9 * (k - 1) as f64 / 16.0;
        let e = quantile.eval(q);
        let kot = kotani_density(&p, &alpha, e, 1e-4, 60).unwrap();
        let hist = table.density_at(e, 0.02);
        println!(
            "{q:.3},{e:+.4},{:.5},{:.1e},{hist:.5},{:+.3}",
            kot.density,
            kot.std_error,
            (kot.density - hist) / hist
        );
    }
    println!("# large deviations flag energies next to gap edges (van Hove points)");
}
