//! The full verification pipeline on the bundled quick config: spectral,
//! transport, duality and spin-chain stages feeding the cross-check report.
//!
//! Run: cargo run --release -p qplr --example verify_pipeline

use qplr::runner::{run_verify, ExperimentConfig};
use std::path::Path;

fn main() {
    let cfg_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quick.toml");
    let cfg = ExperimentConfig::from_path(&cfg_path).expect("bundled config parses");
    let out = std::env::temp_dir().join("qplr_verify_pipeline");
    let report = run_verify(&cfg, Some(&out)).expect("pipeline runs");

    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    println!("\nartifacts in {}", out.display());
    println!(
        "q_norm {:.4} | group velocity bound {:.4} | dual sup {:.4} | v_emp {:.4} => pass = {}",
        report.q_norm, report.group_velocity_bound, report.dual_sup, report.v_emp, report.pass
    );
}
