//! Golden-file regression for the quick verify pipeline: numeric fields
//! must reproduce the committed reference to 1e-9 relative. The tolerance
//! (rather than byte equality) absorbs libm differences across platforms;
//! byte-level determinism of repeated runs on one machine is covered by the
//! acceptance suite.

use qplr::runner::{run_verify, ExperimentConfig, VerificationReport};
use std::path::Path;

#[test]
fn quick_verify_matches_golden_report() {
    let base = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = ExperimentConfig::from_path(&base.join("configs/quick.toml")).unwrap();
    let report = run_verify(&cfg, None).unwrap();
    let golden: VerificationReport = serde_json::from_str(
        &std::fs::read_to_string(base.join("tests/golden/quick_verify_report.json")).unwrap(),
    )
    .unwrap();

    assert_eq!(report.config_hash, golden.config_hash, "config drifted");
    let close = |name: &str, a: f64, b: f64| {
        assert!(
            (a - b).abs() <= 1e-9 * b.abs().max(1e-12),
            "{name}: {a} vs golden {b}"
        );
    };
    close("q_norm", report.q_norm, golden.q_norm);
    close("q_norm_band", report.q_norm_band, golden.q_norm_band);
    close("group_velocity_bound", report.group_velocity_bound, golden.group_velocity_bound);
    close("lr_velocity_bound", report.lr_velocity_bound, golden.lr_velocity_bound);
    close("dual_sup", report.dual_sup, golden.dual_sup);
    close("v_emp", report.v_emp, golden.v_emp);
    assert_eq!(report.pass, golden.pass);
    assert_eq!(report.check_qnorm_vs_groupvel, golden.check_qnorm_vs_groupvel);
    assert_eq!(report.check_dual_vs_qnorm, golden.check_dual_vs_qnorm);
    assert_eq!(report.check_vemp_lower_bound, golden.check_vemp_lower_bound);
}
