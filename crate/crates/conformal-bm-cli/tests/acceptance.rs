//! Acceptance criterion 12: a full default run is reproducible across
//! worker counts — the JSON reports agree byte for byte once the runtime
//! fields are cleared.

use std::process::Command;

fn verdict(index: u32, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {index:02} {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

#[test]
fn criterion_12_full_run_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for workers in ["1", "8"] {
        let json = dir.path().join(format!("w{workers}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_conformal-bm"))
            .args([
                "all", "--seed", "0", "--workers", workers,
                "--json", json.to_str().unwrap(),
            ])
            .env_remove("CONFORMAL_BM_SEED")
            .output()
            .expect("binary runs");
        assert_eq!(
            out.status.code(),
            Some(0),
            "default run with {workers} workers must pass every check: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        paths.push(json);
    }

    let mut bodies = Vec::new();
    for path in &paths {
        let mut reports: Vec<serde_json::Value> =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let n = reports.len();
        assert_eq!(n, 22, "all four suites present");
        for r in &mut reports {
            r["runtime_ms"] = serde_json::json!(0.0);
        }
        bodies.push(serde_json::to_string(&reports).unwrap());
    }

    let identical = bodies[0] == bodies[1];
    assert!(
        verdict(
            12,
            identical,
            "all --seed 0 with 1 and 8 workers: 22 reports byte-identical modulo runtime",
        ),
        "worker count changed the reported numbers"
    );
}
