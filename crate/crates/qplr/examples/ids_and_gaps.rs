//! Integrated density of states of the almost Mathieu operator and its
//! spectral gaps, labelled against kα mod 1.
//!
//! Run: cargo run --release -p qplr --example ids_and_gaps

use qplr::model::{frac, FrequencyVector, Potential, GOLDEN_MEAN};
use qplr::spectral::{default_energy_grid, detect_gaps, ids, PhaseSpec};

fn main() {
    let lambda = 0.5;
    let p = Potential::almost_mathieu(lambda);
    let alpha = FrequencyVector::golden();

    let table = ids(
        &p,
        &alpha,
        2048,
        PhaseSpec::equidistributed(32),
        default_energy_grid(&p, 2001),
    )
    .unwrap();

    println!("# N(E) for the almost Mathieu operator, λ = {lambda}, golden frequency");
    println!("E,N");
    for (e, n) in table.grid().iter().zip(table.n_values()).step_by(50) {
        println!("{e:.4},{n:.6}");
    }

    let report = detect_gaps(&table, 0.02);
    println!("\n# {} gaps wider than 0.02, with gap labels", report.gaps.len());
    println!("E_left,E_right,width,N,nearest_k_alpha");
    for g in &report.gaps {
        // gap labelling: N values in gaps are kα mod 1
        let (k, label) = (1..=12)
            .map(|k| (k, frac(k as f64 * GOLDEN_MEAN)))
            .flat_map(|(k, f)| [(k as i64, f), (-(k as i64), frac(-(k as f64) * GOLDEN_MEAN))])
            .min_by(|a, b| {
                (a.1 - g.n_value).abs().partial_cmp(&(b.1 - g.n_value).abs()).unwrap()
            })
            .unwrap();
        println!(
            "{:+.4},{:+.4},{:.4},{:.4},k={k} ({label:.4})",
            g.e_left,
            g.e_right,
            g.e_right - g.e_left,
            g.n_value
        );
    }
}
