use std::path::Path;

use botscope_cli::run;

fn botscope(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["botscope".to_string()];
    for a in args {
        argv.push(a.replace("@", dir.to_str().unwrap()));
    }
    run(argv)
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(botscope(dir.path(), &["frobnicate"]), 2);
    assert_eq!(botscope(dir.path(), &["train", "--bogus"]), 2);
    assert_eq!(botscope(dir.path(), &["train"]), 2);
    assert_eq!(
        botscope(
            dir.path(),
            &["--trees", "many", "train", "--data", "x", "--out", "y"]
        ),
        2
    );
    assert_eq!(
        botscope(
            dir.path(),
            &[
                "calibrate",
                "--model",
                "m",
                "--data",
                "d",
                "--out",
                "o",
                "--prior",
                "1.5"
            ]
        ),
        2
    );
    assert_eq!(botscope(dir.path(), &["--help"]), 0);
}

#[test]
fn missing_files_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        botscope(
            dir.path(),
            &["train", "--data", "@/missing", "--out", "@/m.json"]
        ),
        1
    );
    assert_eq!(
        botscope(dir.path(), &["datasets", "load", "--dir", "@/missing"]),
        1
    );
}

#[test]
fn train_twice_gives_identical_bytes_and_versions_are_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let read = |name: &str| std::fs::read(d.join(name)).unwrap();
    assert_eq!(botscope(d, &["datasets", "synth", "--out", "@/corpus"]), 0);
    assert_eq!(
        botscope(d, &["--seed", "9", "datasets", "synth", "--out", "@/calib"]),
        0
    );
    assert_eq!(botscope(d, &["datasets", "load", "--dir", "@/corpus"]), 0);
    for out in ["a.json", "b.json"] {
        let out = format!("@/{out}");
        assert_eq!(
            botscope(
                d,
                &["--trees", "10", "train", "--data", "@/corpus", "--out", &out]
            ),
            0
        );
    }
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(
        botscope(
            d,
            &["--trees", "10", "--seed", "1", "train", "--data", "@/corpus", "--out", "@/c.json"]
        ),
        0
    );
    assert_ne!(read("a.json"), read("c.json"));

    assert_eq!(
        botscope(
            d,
            &[
                "calibrate",
                "--model",
                "@/a.json",
                "--data",
                "@/calib",
                "--out",
                "@/cal.json"
            ]
        ),
        0
    );
    assert_eq!(
        botscope(
            d,
            &[
                "score",
                "--model",
                "@/a.json",
                "--calibration",
                "@/cal.json",
                "--input",
                "@/calib/payloads.jsonl",
                "--out",
                "@/s.jsonl"
            ]
        ),
        0
    );
    assert_eq!(
        std::fs::read_to_string(d.join("s.jsonl"))
            .unwrap()
            .lines()
            .count(),
        500
    );
    // A calibration fitted for one model cannot be used with another.
    assert_eq!(
        botscope(
            d,
            &[
                "score",
                "--model",
                "@/c.json",
                "--calibration",
                "@/cal.json",
                "--input",
                "@/calib/payloads.jsonl",
                "--out",
                "@/x.jsonl"
            ]
        ),
        4
    );
    // Score files from two models cannot be analyzed together.
    assert_eq!(
        botscope(
            d,
            &[
                "score",
                "--model",
                "@/c.json",
                "--input",
                "@/calib/payloads.jsonl",
                "--out",
                "@/t.jsonl"
            ]
        ),
        0
    );
    let mixed = [read("s.jsonl"), read("t.jsonl")].concat();
    std::fs::write(d.join("mixed.jsonl"), mixed).unwrap();
    assert_eq!(
        botscope(
            d,
            &[
                "analyze",
                "validate",
                "--scores",
                "@/mixed.jsonl",
                "--data",
                "@/calib",
                "--out",
                "@/v.json"
            ]
        ),
        4
    );
    assert_eq!(
        botscope(
            d,
            &[
                "analyze",
                "validate",
                "--scores",
                "@/s.jsonl",
                "--data",
                "@/calib",
                "--out",
                "@/v.json"
            ]
        ),
        0
    );
    let v: serde_json::Value = serde_json::from_slice(&read("v.json")).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);

    assert_eq!(
        botscope(
            d,
            &[
                "probe",
                "--model",
                "@/a.json",
                "--input",
                "@/calib/payloads.jsonl",
                "--store",
                "@/series.jsonl"
            ]
        ),
        0
    );
    assert_eq!(
        botscope(
            d,
            &[
                "probe",
                "--model",
                "@/a.json",
                "--input",
                "@/calib/payloads.jsonl",
                "--store",
                "@/series.jsonl"
            ]
        ),
        0
    );
    assert_eq!(
        std::fs::read_to_string(d.join("series.jsonl"))
            .unwrap()
            .lines()
            .count(),
        500
    );
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), "seed = 3\ntrees = 5\n").unwrap();
    assert_eq!(botscope(d, &["datasets", "synth", "--out", "@/corpus"]), 0);
    assert_eq!(
        botscope(
            d,
            &[
                "--config",
                "@/run.toml",
                "train",
                "--data",
                "@/corpus",
                "--out",
                "@/a.json"
            ]
        ),
        0
    );
    assert_eq!(
        botscope(
            d,
            &["--seed", "3", "--trees", "5", "train", "--data", "@/corpus", "--out", "@/b.json"]
        ),
        0
    );
    assert_eq!(
        std::fs::read(d.join("a.json")).unwrap(),
        std::fs::read(d.join("b.json")).unwrap()
    );
    let model: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("a.json")).unwrap()).unwrap();
    assert_eq!(model["specialized"]["spammer"]["n_trees"], 5);
    std::fs::write(d.join("bad.toml"), "sed = 3\n").unwrap();
    assert_eq!(
        botscope(
            d,
            &[
                "--config",
                "@/bad.toml",
                "train",
                "--data",
                "@/corpus",
                "--out",
                "@/c.json"
            ]
        ),
        2
    );
}
