//! End-to-end command tests against temporary directories, plus exit-code
//! checks through the installed binary.

use std::path::Path;
use std::process::Command;

use ergodikit_cli::commands::{cmd_check, cmd_infer, cmd_project, cmd_simulate, cmd_sweep};
use ergodikit_cli::config::RunConfig;
use ergodikit_cli::error::CliError;
use ergodikit_cli::formats;

use ergodikit::{make_tensor, project_chain, Alphabet};

fn base_config(out_dir: &Path) -> RunConfig {
    RunConfig {
        alphabet_size: 2,
        n_max: 3,
        seed: 11,
        sample_size: 3000,
        out_dir: out_dir.to_string_lossy().into_owned(),
        model_order: Some(1),
        model_alpha: 1.0,
        model_tensor: None,
        beta: vec![0.25; 4],
        alpha: vec![1.0; 4],
        grid: None,
        svg: true,
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_writes_model_and_trajectory_with_shared_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    cmd_simulate(&config).unwrap();
    let model = read(&dir.path().join("model.json"));
    let trajectory = read(&dir.path().join("trajectory.txt"));
    let header = format!("# ergodikit config={}\n", config.hash());
    assert!(model.starts_with(&header));
    assert!(trajectory.starts_with(&header));

    let x = formats::trajectory_from_text(Path::new("t"), &trajectory, Some(2)).unwrap();
    assert_eq!(x.len(), 3000);
    match formats::check_target_from_text(Path::new("m"), &model).unwrap() {
        formats::CheckTarget::Sequence(seq) => assert_eq!(seq.top_order(), 1),
        formats::CheckTarget::Tensor(_) => panic!("expected model document"),
    }
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let mut config_a = base_config(dir_a.path());
    config_a.model_order = None;
    let mut config_b = base_config(dir_b.path());
    config_b.model_order = None;
    cmd_simulate(&config_a).unwrap();
    cmd_simulate(&config_b).unwrap();
    assert_eq!(
        read(&dir_a.path().join("model.json")),
        read(&dir_b.path().join("model.json"))
    );
    assert_eq!(
        read(&dir_a.path().join("trajectory.txt")),
        read(&dir_b.path().join("trajectory.txt"))
    );
}

#[test]
fn simulate_accepts_a_tensor_file_and_rejects_an_order_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let tensor = make_tensor(
        1,
        vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        Alphabet::new(2).unwrap(),
    )
    .unwrap();
    let tensor_path = dir.path().join("tensor.json");
    formats::write_file(
        &tensor_path,
        &format!("{}\n", formats::tensor_to_json(&tensor, 0)),
    )
    .unwrap();

    let mut config = base_config(dir.path());
    config.model_tensor = Some(tensor_path.to_string_lossy().into_owned());
    config.model_order = None;
    cmd_simulate(&config).unwrap();
    let model = read(&dir.path().join("model.json"));
    assert!(model.contains("\"order\": 1,"));
    assert!(model.contains(&formats::fmt_float(0.9)));

    config.model_order = Some(2);
    let err = cmd_simulate(&config).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn infer_writes_a_parseable_posterior_document() {
    let dir = tempfile::tempdir().unwrap();
    let config = base_config(dir.path());
    cmd_simulate(&config).unwrap();
    cmd_infer(&config, &dir.path().join("trajectory.txt")).unwrap();

    let text = read(&dir.path().join("posterior.json"));
    let (comments, body) = formats::split_comments(&text);
    assert_eq!(comments.len(), 1);
    let doc: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(doc["format"], "ergodikit-posterior/1");
    assert_eq!(doc["n"], 3000);
    let masses: Vec<f64> = doc["order_posterior"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(masses.len(), 4);
    let total: f64 = masses.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(masses.iter().all(|m| m.is_finite() && *m >= 0.0));
    assert_eq!(doc["defect_ln"].as_array().unwrap().len(), 4);
    assert_eq!(doc["alphas"].as_array().unwrap().len(), 4);
    assert_eq!(doc["transition_counts"].as_array().unwrap().len(), 4);
}

#[test]
fn infer_puts_the_posterior_mode_at_order_one_for_alternating_data() {
    // Period two data leaves every defect above order one at exactly zero,
    // so the order posterior concentrates regardless of sample size.
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.model_order = None;
    let trajectory_path = dir.path().join("alternating.txt");
    let word: String = (0..400).map(|k| if k % 2 == 0 { '0' } else { '1' }).collect();
    std::fs::write(&trajectory_path, format!("#alphabet=2\n{word}\n")).unwrap();
    cmd_infer(&config, &trajectory_path).unwrap();

    let text = read(&dir.path().join("posterior.json"));
    let (_, body) = formats::split_comments(&text);
    let doc: serde_json::Value = serde_json::from_str(body).unwrap();
    let masses: Vec<f64> = doc["order_posterior"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let map = masses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(map, 1);
    assert!(masses[1] > 0.99);
    for order in 2..=3 {
        assert!(doc["defect_ln"][order].is_null());
    }
}

#[test]
fn sweep_writes_the_full_grid_and_honors_the_svg_switch() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.grid = Some(vec![100, 1000, 3000]);
    cmd_simulate(&config).unwrap();
    cmd_sweep(&config, &dir.path().join("trajectory.txt")).unwrap();

    let csv = read(&dir.path().join("sweep.csv"));
    let (_, body) = formats::split_comments(&csv);
    let lines: Vec<&str> = body.trim_end().lines().collect();
    assert_eq!(lines[0], "m,order,mass");
    assert_eq!(lines.len(), 1 + 3 * 4);
    assert!(lines[1].starts_with("100,0,"));
    assert!(lines[12].starts_with("3000,3,"));
    assert!(dir.path().join("sweep.svg").exists());

    let dir_plain = tempfile::tempdir().unwrap();
    let mut config_plain = base_config(dir_plain.path());
    config_plain.grid = Some(vec![100, 1000, 3000]);
    config_plain.svg = false;
    cmd_simulate(&config_plain).unwrap();
    cmd_sweep(&config_plain, &dir_plain.path().join("trajectory.txt")).unwrap();
    assert!(!dir_plain.path().join("sweep.svg").exists());
    assert_eq!(read(&dir_plain.path().join("sweep.csv")), csv);
}

#[test]
fn sweep_rejects_grid_points_beyond_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    cmd_simulate(&config).unwrap();
    config.grid = Some(vec![100, 5000]);
    let err = cmd_sweep(&config, &dir.path().join("trajectory.txt")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(matches!(err, CliError::Config(_)));
}

#[test]
fn project_output_matches_the_library_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let tensor = make_tensor(
        2,
        vec![
            vec![0.3, 0.7],
            vec![0.6, 0.4],
            vec![0.25, 0.75],
            vec![0.9, 0.1],
        ],
        Alphabet::new(2).unwrap(),
    )
    .unwrap();
    let tensor_path = dir.path().join("tensor.json");
    formats::write_file(
        &tensor_path,
        &format!("{}\n", formats::tensor_to_json(&tensor, 0)),
    )
    .unwrap();
    let out_path = dir.path().join("projected.json");
    cmd_project(&tensor_path, 1, &out_path).unwrap();

    let expected = project_chain(&tensor, 1).unwrap();
    let got = formats::tensor_from_text(&out_path, &read(&out_path)).unwrap();
    assert_eq!(got.order(), 1);
    for (a, b) in expected.rows().iter().zip(got.rows()) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn check_passes_simulated_models_and_fails_broken_ones() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.model_order = Some(2);
    cmd_simulate(&config).unwrap();
    let model_path = dir.path().join("model.json");
    cmd_check(&model_path, 6).unwrap();

    let text = read(&model_path);
    let (_, body) = formats::split_comments(&text);
    let mut doc: serde_json::Value = serde_json::from_str(body).unwrap();
    doc["kernels"][0]["rows"] = serde_json::json!([[0.5, 0.5]]);
    let broken_path = dir.path().join("broken.json");
    std::fs::write(&broken_path, doc.to_string()).unwrap();
    let err = cmd_check(&broken_path, 6).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(matches!(err, CliError::CheckFailed { .. }));
}

#[test]
fn large_alphabets_round_trip_through_comma_format() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base_config(dir.path());
    config.alphabet_size = 12;
    config.n_max = 1;
    config.model_order = Some(1);
    config.sample_size = 400;
    config.beta = vec![0.5; 2];
    config.alpha = vec![1.0; 2];
    cmd_simulate(&config).unwrap();
    let text = read(&dir.path().join("trajectory.txt"));
    assert!(text.contains("#alphabet=12"));
    assert!(text.contains(','));
    cmd_infer(&config, &dir.path().join("trajectory.txt")).unwrap();
}

#[test]
fn binary_reports_the_documented_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ergodikit");
    let dir = tempfile::tempdir().unwrap();

    let missing = Command::new(bin)
        .args(["infer", dir.path().join("nope.txt").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(4));

    let config_path = dir.path().join("bad.toml");
    std::fs::write(&config_path, "alphabet_size = 1\n").unwrap();
    let bad_config = Command::new(bin)
        .args(["simulate", "--config", config_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad_config.status.code(), Some(2));

    let unknown_field = dir.path().join("unknown.toml");
    std::fs::write(&unknown_field, "alphabt_size = 2\n").unwrap();
    let typo = Command::new(bin)
        .args(["simulate", "--config", unknown_field.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(typo.status.code(), Some(2));
}

#[test]
fn binary_simulate_then_check_succeeds() {
    let bin = env!("CARGO_BIN_EXE_ergodikit");
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        "alphabet_size = 2\nn_max = 2\nmodel_order = 2\nsample_size = 500\nseed = 3\n",
    )
    .unwrap();
    let simulate = Command::new(bin)
        .args([
            "simulate",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(simulate.status.code(), Some(0));
    let check = Command::new(bin)
        .args(["check", dir.path().join("model.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(check.status.code(), Some(0));
    let stdout = String::from_utf8(check.stdout).unwrap();
    assert!(stdout.contains("max_residual="));
    assert!(stdout.trim_end().ends_with("ok"));
}
