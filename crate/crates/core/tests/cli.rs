//! Command-line behaviour: documented examples, record schemas, exit codes
//! and thread-count independence.

use std::process::Command;

use dioph::cli::{run, EXIT_CONFIG, EXIT_GUARD, EXIT_OK};
use serde_json::Value;

/// Runs the CLI in-process; returns `(code, stdout, stderr)`.
fn dioph(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dioph").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_lines(stdout: &str) -> Vec<Value> {
    stdout.lines().map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{e}: {l}"))).collect()
}

fn records<'a>(lines: &'a [Value], kind: &str) -> Vec<&'a Value> {
    lines.iter().filter(|v| v["record"] == kind).collect()
}

#[test]
fn series_example_converges() {
    let (code, out, _) = dioph(&["series", "--kind", "theorem2", "--psi", "powerlog:1,2,0", "--s", "0.8", "--H", "1000000"]);
    assert_eq!(code, EXIT_OK);
    let lines = json_lines(&out);
    assert_eq!(lines[0]["record"], "config");
    let sums = records(&lines, "partial_sum");
    assert_eq!(sums.last().unwrap()["h"], 1_000_000);
    let values: Vec<f64> = sums.iter().map(|v| v["partial_sum"].as_f64().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(records(&lines, "verdict")[0]["kind"], "converges");
}

#[test]
fn count_example_on_unit_interval() {
    let (code, out, _) = dioph(&["count", "--curve", "parabola", "--interval", "0,1", "--Q", "4", "--delta", "1e-9", "--mode", "triples"]);
    assert_eq!(code, EXIT_OK);
    let lines = json_lines(&out);
    let row = records(&lines, "count")[0];
    assert_eq!(row["count"], 9);
    for key in ["count", "predicted_bound", "ratio", "mode", "boundary_ambiguous"] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_example_on_custom_polynomial() {
    let (code, out, _) = dioph(&["verify", "--curve", "poly:0,0,1@[0.1,1]", "--samples", "1000"]);
    assert_eq!(code, EXIT_OK);
    let lines = json_lines(&out);
    assert_eq!(records(&lines, "verify")[0]["ok"], true);
}

#[test]
fn config_record_echoes_resolved_arguments() {
    let (_, out, _) = dioph(&["tail", "--kind", "mult", "--psi", "pow:2", "--s", "0.8", "--n", "3", "--T", "5"]);
    let lines = json_lines(&out);
    let config = &lines[0];
    assert_eq!(config["record"], "config");
    assert_eq!(config["subcommand"], "tail");
    assert_eq!(config["curve"], "parabola");
    assert_eq!(config["psi"], "pow:2");
    assert_eq!(config["T"], 5);
    assert_eq!(config["format"], "json");
    assert_eq!(records(&lines, "block").len(), 3);
    assert_eq!(records(&lines, "summary")[0]["t_range"], serde_json::json!([3, 5]));
}

#[test]
fn csv_output_has_documented_header_and_parses() {
    let cases: [(&[&str], &str); 4] = [
        (&["--format", "csv", "count", "--Q", "16,32", "--psi", "pow:0.6"], "Q,delta,count,predicted_bound,ratio,mode,boundary_ambiguous,condition_holds"),
        (&["--format", "csv", "block-count", "--kind", "sim", "--psi", "pow:0.8", "--phi", "pow:0.8", "--t", "3,4"], "t,m,count,predicted_bound,ratio,mode,boundary_ambiguous"),
        (&["--format", "csv", "cover", "--kind", "mult", "--psi", "pow:2", "--s", "0.8", "--t", "3"], "t,q,p1,p2,m,source,x_lo,x_hi,diameter"),
        (&["--format", "csv", "hits", "--x", "0.3", "--q-max", "50", "--mode", "mult", "--psi", "pow:1"], "q,p1,p2,err_x,err_y,product_err,mode,m,case"),
    ];
    for (args, header) in cases {
        let (code, out, _) = dioph(args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        let mut comments = out.lines().take_while(|l| l.starts_with('#'));
        let config = comments.next().unwrap().strip_prefix("# config: ").unwrap();
        serde_json::from_str::<Value>(config).unwrap();
        let table: String = out.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        let mut reader = csv::Reader::from_reader(table.as_bytes());
        assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>().join(","), header);
        let rows = reader.records().collect::<Result<Vec<_>, _>>().unwrap().len();
        assert!(rows > 0, "{args:?}");
    }
    // The help text documents the same column orders.
    let (code, help, _) = dioph(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(help.contains("cover:       t,q,p1,p2,m,source,x_lo,x_hi,diameter"));
}

#[test]
fn every_json_record_round_trips() {
    let runs: [&[&str]; 6] = [
        &["verify", "--curve", "cubic"],
        &["block-count", "--kind", "mult", "--psi", "pow:2", "--t", "4", "--m=-1,0,1"],
        &["hits", "--curve", "circle-arc", "--x", "0.5", "--q-max", "200", "--mode", "sim", "--psi", "pow:0.5", "--phi", "pow:0.5"],
        &["cover", "--kind", "sim", "--psi", "pow:0.8", "--phi", "pow:0.8", "--t", "4"],
        &["measure", "--mode", "sim", "--psi", "pow:0.8", "--phi", "pow:0.8", "--grid", "100", "--n", "2,4", "--Q", "64"],
        &["mc", "--kind", "khintchine", "--psi", "pow:0.5", "--samples", "100", "--Q", "100", "--seed", "5"],
    ];
    for args in runs {
        let (code, out, err) = dioph(args);
        assert_eq!(code, EXIT_OK, "{args:?}: {err}");
        for v in json_lines(&out) {
            let text = serde_json::to_string(&v).unwrap();
            assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), v);
            assert!(v["record"].is_string());
        }
    }
}

#[test]
fn bad_tokens_exit_2_naming_the_token() {
    for (args, token) in [
        (vec!["count", "--curve", "spiral", "--Q", "4", "--delta", "0.1"], "spiral"),
        (vec!["tail", "--kind", "mult", "--psi", "expo:3", "--n", "2", "--T", "3"], "expo"),
        (vec!["count", "--Q", "4", "--delta", "0.1", "--mode", "halves"], "halves"),
        (vec!["frobnicate"], "frobnicate"),
    ] {
        let (code, out, err) = dioph(&args);
        assert_eq!(code, EXIT_CONFIG, "{args:?}");
        assert!(out.is_empty());
        assert!(err.contains(token), "{err}");
    }
}

#[test]
fn invalid_configurations_exit_2() {
    let (code, _, err) = dioph(&["block-count", "--kind", "sim", "--psi", "pow:1", "--phi", "pow:0.5", "--t", "3"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("swap"));
    let (code, _, _) = dioph(&["mc", "--kind", "gallagher", "--psi", "pow:1", "--samples", "10", "--Q", "10"]);
    assert_eq!(code, EXIT_CONFIG, "a seed is mandatory");
    let (code, _, err) = dioph(&["cover", "--kind", "mult", "--psi", "pow:6", "--s", "0.5", "--t", "8"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("tilde"));
}

#[test]
fn resource_guard_exits_3_with_the_prediction() {
    let (code, _, err) = dioph(&["cover", "--kind", "mult", "--psi", "pow:0.1", "--t", "30"]);
    assert_eq!(code, EXIT_GUARD);
    assert!(err.contains("predicted"));
}

#[test]
fn tilde_option_lifts_psi_onto_the_floor() {
    let (code, out, err) = dioph(&["cover", "--kind", "mult", "--psi", "pow:6", "--s", "0.5", "--t", "6", "--tilde"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(json_lines(&out).iter().any(|v| v["record"] == "element"));
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dioph");
    let ok = Command::new(bin).args(["verify", "--curve", "parabola"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).args(["verify", "--curve", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
    let guard = Command::new(bin).args(["cover", "--kind", "sim", "--psi", "const:0.4", "--phi", "const:0.4", "--t", "30"]).output().unwrap();
    assert_eq!(guard.status.code(), Some(EXIT_GUARD));
    // The environment supplies the default thread count.
    let env = Command::new(bin).env("DIOPH_THREADS", "2").args(["verify"]).output().unwrap();
    assert_eq!(env.stdout, ok.stdout);
}

#[test]
fn thread_count_never_changes_output() {
    let runs: [&[&str]; 4] = [
        &["count", "--Q", "64,128,256", "--psi", "pow:0.66"],
        &["--format", "csv", "cover", "--kind", "mult", "--psi", "pow:2", "--s", "0.8", "--t", "7"],
        &["tail", "--kind", "sim", "--psi", "pow:0.8", "--phi", "pow:0.8", "--n", "3", "--T", "8"],
        &["mc", "--kind", "gallagher", "--psi", "pow:0.5", "--samples", "2000", "--Q", "300", "--seed", "17"],
    ];
    for args in runs {
        let mut one = vec!["--threads", "1"];
        one.extend_from_slice(args);
        let mut eight = vec!["--threads", "8"];
        eight.extend_from_slice(args);
        let (c1, o1, _) = dioph(&one);
        let (c8, o8, _) = dioph(&eight);
        assert_eq!((c1, c8), (EXIT_OK, EXIT_OK));
        assert_eq!(o1, o8, "{args:?}");
    }
}
