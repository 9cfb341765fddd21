//! Exit codes, determinism, and error-message contracts of the binary.

mod support;

use support::{fixture_dir, run_cli, stderr_of, stdout_of};

#[test]
fn help_lists_every_subcommand() {
    let out = run_cli(&["--help"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    for needle in ["dataset", "eval", "predict", "serve"] {
        assert!(text.contains(needle), "missing {needle} in help:\n{text}");
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run_cli(&["dataset", "validate", "--frobnicate", "x"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run_cli(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn split_is_byte_identical_for_equal_seeds() {
    let fixture = fixture_dir();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let output = run_cli(&[
            "dataset",
            "split",
            fixture.to_str().unwrap(),
            "--ratios",
            "0.7,0.2,0.1",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = dir.path().join("c.json");
    let output = run_cli(&[
        "dataset",
        "split",
        fixture.to_str().unwrap(),
        "--ratios",
        "0.7,0.2,0.1",
        "--seed",
        "43",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn split_sizes_follow_floor_rule() {
    let fixture = fixture_dir();
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("split.json");
    let output = run_cli(&[
        "dataset",
        "split",
        fixture.to_str().unwrap(),
        "--ratios",
        "0.7,0.2,0.1",
        "--seed",
        "7",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    // 40 images -> floor(28), floor(8), remainder 4
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for (_, set) in manifest["assignment"].as_object().unwrap() {
        *counts.entry(set.as_str().unwrap().to_string()).or_insert(0usize) += 1;
    }
    assert_eq!(counts.get("train"), Some(&28));
    assert_eq!(counts.get("test"), Some(&8));
    assert_eq!(counts.get("val"), Some(&4));
}

#[test]
fn eval_run_with_missing_dets_file_names_the_path() {
    let fixture = fixture_dir();
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&[
        "eval",
        "run",
        "--gt",
        fixture.to_str().unwrap(),
        "--dets",
        "/nonexistent/dets.jsonl",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("/nonexistent/dets.jsonl"),
        "stderr must name the missing path: {}",
        stderr_of(&out)
    );
}

#[test]
fn validate_strict_mode_fails_on_missing_label() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("images")).unwrap();
    std::fs::create_dir_all(dir.path().join("labels")).unwrap();
    std::fs::write(dir.path().join("classes.txt"), "Fowl Pox\nHealthy\n").unwrap();
    // copy one fixture image, provide no label
    std::fs::copy(
        fixture_dir().join("images/img_0000.png"),
        dir.path().join("images/lonely.png"),
    )
    .unwrap();

    let lenient = run_cli(&["dataset", "validate", dir.path().to_str().unwrap()]);
    assert_eq!(lenient.status.code(), Some(0), "{}", stdout_of(&lenient));
    assert!(stdout_of(&lenient).contains("image without label"));

    let strict = run_cli(&["dataset", "validate", dir.path().to_str().unwrap(), "--strict"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn validate_fails_on_broken_label() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("images")).unwrap();
    std::fs::create_dir_all(dir.path().join("labels")).unwrap();
    std::fs::write(dir.path().join("classes.txt"), "Fowl Pox\nHealthy\n").unwrap();
    std::fs::copy(
        fixture_dir().join("images/img_0000.png"),
        dir.path().join("images/bird.png"),
    )
    .unwrap();
    std::fs::write(dir.path().join("labels/bird.txt"), "0 0.5 0.5 0.0 0.2\n").unwrap();

    let out = run_cli(&["dataset", "validate", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("violation"));
}

#[test]
fn predict_prints_prediction_json() {
    let fixture = fixture_dir();
    let out = run_cli(&[
        "predict",
        "--fixture",
        fixture.join("replay.jsonl").to_str().unwrap(),
        "--image-id",
        "img_0003",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(value["image_id"], "img_0003");
    assert!(value["detections"].as_array().is_some());

    let missing = run_cli(&[
        "predict",
        "--fixture",
        fixture.join("replay.jsonl").to_str().unwrap(),
        "--image-id",
        "img_9999",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr_of(&missing).contains("no fixture"));
}

#[test]
fn augment_writes_a_parallel_corpus_deterministically() {
    let fixture = fixture_dir();
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{
            "rng_seed": 9,
            "transforms": [
                {"type": "horizontal_flip"},
                {"type": "letterbox", "target_w": 320, "target_h": 320, "pad_value": 114}
            ]
        }"#,
    )
    .unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = run_cli(&[
            "dataset",
            "augment",
            fixture.to_str().unwrap(),
            "--spec",
            spec_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }

    let label_a = std::fs::read(out_a.join("labels/img_0000.txt")).unwrap();
    let label_b = std::fs::read(out_b.join("labels/img_0000.txt")).unwrap();
    assert_eq!(label_a, label_b);
    let img_a = std::fs::read(out_a.join("images/img_0000.png")).unwrap();
    let img_b = std::fs::read(out_b.join("images/img_0000.png")).unwrap();
    assert_eq!(img_a, img_b);
    assert_eq!(
        std::fs::read_dir(out_a.join("images")).unwrap().count(),
        40,
        "every fixture image gets an augmented twin"
    );
}
