//! End-to-end checks of the CLI surface and the on-disk formats: config
//! parsing (including the unknown-key hard error), sweep CSV shape, trace
//! export, the observation-data CSV, and expectation-gap self-consistency.

use std::process::Command;

use rcar_exp::experiments::posterior1d;

fn rcar() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rcar"))
}

#[test]
fn cli_runs_reversibility_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcar()
        .args(["reversibility", "--seed", "3", "--replicas", "400"])
        .arg("--out")
        .arg(dir.path())
        .arg("--threads")
        .arg("2")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"), "no verdict lines in {stdout}");

    let base = dir.path().join("reversibility");
    let csv = std::fs::read_to_string(base.join("reversibility_modes.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "kernel,parameter,estimate,std_err,n_samples,p_value,pass"
    );
    // one row per (kernel, mode)
    assert_eq!(csv.lines().count(), 1 + 3 * 64);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "reversibility");
    assert_eq!(summary["master_seed"], 3);
    assert!(summary["build"].is_string());
    assert!(summary["config"]["chain.replicas"].is_string());
    assert!(summary["verdicts"].is_object());
}

#[test]
fn cli_applies_config_file_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    std::fs::write(&good, "[chain]\nreplicas = 300\nn_modes = 16\n").unwrap();
    let out = rcar()
        .args(["reversibility", "--seed", "5"])
        .arg("--config")
        .arg(&good)
        .arg("--out")
        .arg(dir.path())
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("reversibility/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["config"]["chain.n_modes"], "16");

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "[chain]\nreplicas = 300\ntypo_key = 1\n").unwrap();
    let out = rcar()
        .args(["reversibility"])
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .expect("binary runs");
    assert!(!out.status.success(), "unknown key must be a hard error");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("chain.typo_key"), "stderr: {stderr}");
}

#[test]
fn help_documents_defaults() {
    let out = rcar()
        .args(["mse-curve", "--help"])
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Defaults:"));
    assert!(stdout.contains("sweep.n_exp_max = 18"));
    assert!(stdout.contains("chain.replicas = 256"));
}

#[test]
fn trace_export_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = posterior1d::Config {
        n_steps: 500,
        checkpoints: vec![500],
        export_trace: true,
        ..Default::default()
    };
    let out = posterior1d::run(&cfg, 11).unwrap();
    out.write(dir.path()).unwrap();

    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "step,accepted,coeff(0)");
    assert_eq!(csv.lines().count(), 1 + 500);
    // accepted column is 0/1, step indices count up from 0
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert!(first[1] == "0" || first[1] == "1");
    first[2].parse::<f64>().unwrap();
}

#[test]
fn diagnostics_emits_observation_data_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = rcar_exp::experiments::diagnostics::Config {
        drift_reps: 1000,
        drift_directions: 2,
        contraction_pairs: 2,
        contraction_reps: 1000,
        smallset_pairs: 8,
        smallset_n_max: 8,
        triangle_triples: 500,
        ..Default::default()
    };
    let out = rcar_exp::experiments::diagnostics::run(&cfg, 2).unwrap();
    out.write(dir.path()).unwrap();
    let data = rcar_exp::synth::read_data_csv(&dir.path().join("data.csv"), cfg.sigma).unwrap();
    assert_eq!(data.len(), cfg.n_obs);
}

/// With the potential dropped, the chain's stationary law is the prior
/// itself; the histogram must match the Gamma quadrature oracle.
#[test]
fn posterior1d_zero_potential_recovers_prior() {
    let cfg = posterior1d::Config {
        zero_potential: true,
        n_steps: 200_000,
        checkpoints: vec![200_000],
        ..Default::default()
    };
    let out = posterior1d::run(&cfg, 17).unwrap();
    let body = serde_json::to_value(&out.summary.verdicts).unwrap();
    assert!(
        body.as_object().unwrap().values().all(|v| v.as_bool() == Some(true)),
        "verdicts: {body}"
    );
}

/// Two independent runs of the same chain agree in expectation: the gap of
/// batch means stays within 3 pooled standard errors.
#[test]
fn expectation_gap_self_consistency() {
    use rcar_core::basis::FieldVector;
    use rcar_core::mh::{run_chain_with_rng, ChainConfig, Functional};
    use rcar_core::rng::RngStream;
    use rcar_core::semimetric::expectation_gap;
    use rcar_exp::stats::batch_means;
    use rcar_exp::targets::oracle_1d;

    let (kernel, potential, _) = oracle_1d(0.5, 0.5, 1.0, 0.0).unwrap();
    let run = |replica: u64| {
        let cfg = ChainConfig::new(0.5, 200_000, 10_000, 99)
            .unwrap()
            .with_record(vec![Functional::Coeff(0)]);
        let mut rng = RngStream::replica(99, replica);
        let trace = run_chain_with_rng(
            FieldVector::scalar(1.0).unwrap(),
            &kernel,
            &potential,
            &cfg,
            &mut rng,
        )
        .unwrap();
        let col = trace.column("coeff(0)").unwrap();
        batch_means(&col[10_000..], 64)
    };
    let a = run(1);
    let b = run(2);
    let (gap, se) = expectation_gap(&a, &b).unwrap();
    assert!(gap <= 3.0 * se, "gap {gap} exceeds 3 pooled se {se}");
}
