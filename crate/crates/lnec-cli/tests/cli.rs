//! End-to-end CLI tests: exit-code taxonomy, reproducibility, and the
//! construct -> analyze -> decode round trip over the JSON interfaces.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lnec"))
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn tmp(name: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn construct_analyze_round_trip_on_butterfly() {
    let code_path = tmp("bfly-code.json");
    let out = run(&[
        "construct",
        "--network",
        &data("butterfly.json"),
        "--kind",
        "multicast",
        "--field",
        "3",
        "--out",
        &code_path,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(Path::new(&code_path).exists());
    assert!(Path::new(&tmp("bfly-code.manifest.json")).exists());

    let out = run(&[
        "analyze",
        "--network",
        &data("butterfly.json"),
        "--code",
        &code_path,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["verdicts"]["multicast"], serde_json::json!(true));
    assert_eq!(report["regularity"]["regular"], serde_json::json!(true));
    // Redundancy-0 sinks: distance 1 with zero slack.
    let t1 = report["targets"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["target"]["node"] == "t1")
        .unwrap();
    assert_eq!(t1["d"], serde_json::json!(1));
    assert_eq!(t1["slack"], serde_json::json!(0));
}

#[test]
fn construct_outputs_are_byte_identical_across_runs() {
    for (label, extra) in [
        ("det", vec![]),
        ("rand", vec!["--method", "rand", "--seed", "7"]),
    ] {
        let a = tmp(&format!("rep-{label}-a.json"));
        let b = tmp(&format!("rep-{label}-b.json"));
        let net = data("three_path.json");
        for path in [&a, &b] {
            let mut args = vec![
                "construct",
                "--network",
                &net,
                "--kind",
                "multicast",
                "--out",
                path,
            ];
            args.extend(extra.iter());
            let out = run(&args);
            assert_eq!(out.status.code(), Some(0));
        }
        assert_eq!(
            std::fs::read(&a).unwrap(),
            std::fs::read(&b).unwrap(),
            "{label} construction must be reproducible"
        );
    }
}

#[test]
fn golden_butterfly_code() {
    // The committed golden file pins the deterministic construction output.
    let code_path = tmp("bfly-golden.json");
    let out = run(&[
        "construct",
        "--network",
        &data("butterfly.json"),
        "--kind",
        "multicast",
        "--field",
        "3",
        "--out",
        &code_path,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let got = std::fs::read_to_string(&code_path).unwrap();
    let want = std::fs::read_to_string(data("butterfly-gf3-multicast.json")).unwrap();
    assert_eq!(
        got, want,
        "deterministic output drifted from the golden file"
    );
}

#[test]
fn field_too_small_exits_2_and_names_the_block() {
    let out = run(&[
        "construct",
        "--network",
        &data("parallel4.json"),
        "--kind",
        "multicast",
        "--field",
        "2",
        "--out",
        &tmp("never.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("field of order 2 too small"), "stderr: {err}");
    assert!(
        err.contains("sink"),
        "stderr must name the blocking site: {err}"
    );
}

#[test]
fn usage_errors_exit_1() {
    // Unknown kind.
    let out = run(&[
        "construct",
        "--network",
        &data("butterfly.json"),
        "--kind",
        "bogus",
        "--field",
        "3",
        "--out",
        &tmp("x.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // No field anywhere.
    let out = run(&[
        "construct",
        "--network",
        &data("butterfly.json"),
        "--kind",
        "multicast",
        "--out",
        &tmp("x.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Malformed JSON gets line/column diagnostics.
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{\"source\": \"s\",").unwrap();
    let out = run(&[
        "construct",
        "--network",
        &bad,
        "--kind",
        "multicast",
        "--field",
        "3",
        "--out",
        &tmp("x.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "diagnostics carry a position: {err}");
}

#[test]
fn size_guards_exit_3() {
    // Construction guard: redundancy 21 patterns are refused.
    let out = run(&[
        "construct",
        "--network",
        &data("wide22.json"),
        "--kind",
        "multicast",
        "--field",
        "13",
        "--out",
        &tmp("wide-code.json"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Analysis guard: distances over 22 channels need --max-weight.
    let chain_code = tmp("chain-code.json");
    assert_eq!(
        run(&[
            "construct",
            "--network",
            &data("chain22.json"),
            "--kind",
            "multicast",
            "--field",
            "2",
            "--out",
            &chain_code,
        ])
        .status
        .code(),
        Some(0)
    );
    let out = run(&[
        "analyze",
        "--network",
        &data("chain22.json"),
        "--code",
        &chain_code,
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&[
        "analyze",
        "--network",
        &data("chain22.json"),
        "--code",
        &chain_code,
        "--max-weight",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // A weight cap below the distance also surfaces as a guard.
    let code_path = tmp("tp-code.json");
    assert_eq!(
        run(&[
            "construct",
            "--network",
            &data("three_path.json"),
            "--kind",
            "multicast",
            "--out",
            &code_path,
        ])
        .status
        .code(),
        Some(0)
    );
    let out = run(&[
        "decode",
        "--network",
        &data("three_path.json"),
        "--code",
        &code_path,
        "--node",
        "t",
        "--received",
        "1,1,1",
        "--max-weight",
        "0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn analyze_all_zero_code_reports_undefined_distances() {
    // Hand-written all-zero code for the butterfly.
    let code_path = tmp("zero-code.json");
    let net_text = std::fs::read_to_string(data("butterfly.json")).unwrap();
    let net: serde_json::Value = serde_json::from_str(&net_text).unwrap();
    let mut kernels = Vec::new();
    for node in net["nodes"].as_array().unwrap() {
        let node = node.as_str().unwrap();
        let rows: Vec<String> = if node == "s" {
            vec!["d1'".into(), "d2'".into()]
        } else {
            net["channels"]
                .as_array()
                .unwrap()
                .iter()
                .filter(|c| c["head"] == node)
                .map(|c| c["id"].as_str().unwrap().to_string())
                .collect()
        };
        let cols: Vec<String> = net["channels"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| c["tail"] == node)
            .map(|c| c["id"].as_str().unwrap().to_string())
            .collect();
        let entries: Vec<Vec<u32>> = rows.iter().map(|_| vec![0; cols.len()]).collect();
        kernels.push(serde_json::json!({
            "node": node, "rows": rows, "cols": cols, "entries": entries,
        }));
    }
    std::fs::write(
        &code_path,
        serde_json::to_string_pretty(&serde_json::json!({
            "field": {"p": 3, "m": 1},
            "kernels": kernels,
        }))
        .unwrap(),
    )
    .unwrap();

    let out = run(&[
        "analyze",
        "--network",
        &data("butterfly.json"),
        "--code",
        &code_path,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["regularity"]["regular"], serde_json::json!(false));
    assert_eq!(report["verdicts"]["multicast"], serde_json::json!(false));
    for t in report["targets"].as_array().unwrap() {
        assert_eq!(t["d"], serde_json::Value::Null);
        assert_eq!(t["dimPhi"], serde_json::json!(0));
    }
}

#[test]
fn decode_round_trip_with_injection() {
    let code_path = tmp("tp-decode.json");
    assert_eq!(
        run(&[
            "construct",
            "--network",
            &data("three_path.json"),
            "--kind",
            "multicast",
            "--out",
            &code_path,
        ])
        .status
        .code(),
        Some(0)
    );

    // Weight-1 injection corrects back to the message.
    let out = run(&[
        "decode",
        "--network",
        &data("three_path.json"),
        "--code",
        &code_path,
        "--node",
        "t",
        "--inject",
        "X=5;Z=e12:3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let res = stdout_json(&out);
    assert_eq!(res["status"], serde_json::json!("unique"));
    assert_eq!(res["message"], serde_json::json!([5]));
    // Either hop of the corrupted branch explains the syndrome at weight 1.
    assert_eq!(res["pattern"].as_array().unwrap().len(), 1);
    assert!(res["pattern"][0].as_str().unwrap().starts_with("e1"));

    // Weight-0 injection echoes the message.
    let out = run(&[
        "decode",
        "--network",
        &data("three_path.json"),
        "--code",
        &code_path,
        "--node",
        "t",
        "--inject",
        "X=7;Z=",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let res = stdout_json(&out);
    assert_eq!(res["message"], serde_json::json!([7]));
    assert_eq!(res["weight"], serde_json::json!(0));

    // Wrong received length is a usage error.
    let out = run(&[
        "decode",
        "--network",
        &data("three_path.json"),
        "--code",
        &code_path,
        "--node",
        "t",
        "--received",
        "1,2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bounds_reports_pattern_counts_and_binomials() {
    let out = run(&[
        "bounds",
        "--network",
        &data("three_path.json"),
        "--rate",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["multicast"]["tight"], serde_json::json!(15));
    assert_eq!(report["multicast"]["loose"], serde_json::json!(18));
    assert_eq!(
        report["multicast"]["tight_min_field"],
        serde_json::json!(16)
    );
    let sink = report["multicast"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["target"] == "t")
        .unwrap();
    assert_eq!(sink["patterns"], serde_json::json!(12));

    let out = run(&[
        "bounds",
        "--network",
        &data("butterfly.json"),
        "--rate",
        "2",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["multicast"]["tight"], serde_json::json!(2));
    assert_eq!(report["multicast"]["tight_min_field"], serde_json::json!(3));
    assert_eq!(report["broadcast"]["tight"], serde_json::json!(5));
}
