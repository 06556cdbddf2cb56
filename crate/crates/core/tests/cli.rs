use std::process::{Command, Output};

use serde_json::Value;

fn syk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syk")).args(args).output().expect("run syk")
}

fn payload(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("json envelope");
    assert_eq!(v["schema_version"], "1");
    assert!(v.get("timestamp").is_none());
    v["payload"].clone()
}

fn payload_bytes(out: &Output) -> String {
    serde_json::to_string(&payload(out)).unwrap()
}

#[test]
fn rate_at_minimizer_is_zero() {
    let p = payload(&syk(&["rate", "--x", "1,0"]));
    assert_eq!(p["I"], 0.0);
    assert_eq!(p["J"], 1.0);
}

#[test]
fn rate_off_x0_is_infinite() {
    let p = payload(&syk(&["rate", "--x", "0.5,0.5,0.5"]));
    assert_eq!(p["I"], "inf");
}

#[test]
fn q2_output_is_byte_identical() {
    let a = syk(&["q2", "--n", "10", "--seed", "4"]);
    let b = syk(&["q2", "--n", "10", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn worker_count_does_not_change_payload() {
    let run = |w: &str| payload_bytes(&syk(&["smallball", "--x", "1", "--epsilon", "0.5,1", "--n", "12", "--trials", "300", "--workers", w]));
    assert_eq!(run("1"), run("4"));
    let run = |w: &str| payload_bytes(&syk(&["q2", "--n", "10", "--mode", "sampled", "--trials", "500", "--workers", w]));
    assert_eq!(run("1"), run("3"));
}

#[test]
fn exit_codes() {
    assert_eq!(syk(&["--version"]).status.code(), Some(0));
    assert_eq!(syk(&["nonsense"]).status.code(), Some(1));
    assert_eq!(syk(&["spectrum", "--n", "7", "--q", "2"]).status.code(), Some(1));
    assert_eq!(syk(&["rate", "--x", "1,0.2,0.9"]).status.code(), Some(1));
    assert_eq!(syk(&["dbl", "--mu", "0:0.5,1:0.4"]).status.code(), Some(1));
    // k_max too small for three coordinates: a numerical failure.
    assert_eq!(syk(&["reconstruct", "--x", "2,0.8,0.5,0.3", "--kmax", "2"]).status.code(), Some(2));
    assert_eq!(syk(&["selftest"]).status.code(), Some(0));
}

#[test]
fn csv_and_plot_outputs() {
    let dir = std::env::temp_dir().join(format!("syk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (out, plot) = (dir.join("q2.csv"), dir.join("q2.dat"));
    let o = syk(&["q2", "--n", "6", "--format", "csv", "--out", out.to_str().unwrap(), "--plot", plot.to_str().unwrap()]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["support", "weight"]);
    let total: f64 = rdr.records().map(|r| r.unwrap()[1].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let text = std::fs::read_to_string(&plot).unwrap();
    assert!(text.starts_with("# support weight\n"));
    assert_eq!(text.lines().count(), 9);

    let o = syk(&["rate", "--x", "1.2", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("key,value\n") && text.contains("x0,1.2"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn envelope_records_config_and_optional_timestamp() {
    let o = syk(&["mgf", "--n", "4", "--b", "0.1", "--trials", "1000", "--timestamp"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "mgf");
    assert_eq!(v["config"]["n"], 4);
    assert_eq!(v["config"]["trials"], 1000);
    assert!(v["timestamp"].is_u64());
    assert_eq!(v["payload"]["exact"], v["payload"]["bound"]);
}

#[test]
fn every_subcommand_runs() {
    let cases: &[&[&str]] = &[
        &["spectrum", "--n", "8", "--q", "3"],
        &["dbl", "--mu", "0,1", "--nu", "0.5"],
        &["dbl", "--mu", "-1,1", "--law", "semicircle", "--grid-bins", "256"],
        &["phi", "--x", "1.25,0.5,0.25"],
        &["phi", "--x", "1.25,0.5", "--mode", "sampled", "--trials", "1000"],
        &["reconstruct", "--x", "1,0.5,0.5"],
        &["shell", "--n", "8", "--a", "0.5", "--b", "1.5", "--trials", "100"],
        &["lipschitz", "--n", "6", "--q", "2", "--trials", "5"],
        &["sweep", "--plans", "6:2,8:2", "--f", "clipped-abs", "--trials", "10"],
    ];
    for args in cases {
        let o = syk(args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice::<Value>(&o.stdout).unwrap();
    }
}
