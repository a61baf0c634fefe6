use std::collections::BTreeSet;
use std::process::{Command, Output};

use serde_json::Value;

fn parityseq(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_parityseq"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("PARITYSEQ_THREADS", t),
        None => cmd.env_remove("PARITYSEQ_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn s_table() {
    let o = parityseq(&["gen", "--kind", "s_seq", "--upto", "11", "--format", "csv"], None);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0], "0,1");
    assert_eq!(rows[1], "1,1/2");
    assert_eq!(rows[11], "11,-691/4");
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["verify", "--id", "T2.3", "--seq", "signed_bernoulli", "--range", "n=1..25:2"];
    let a = parityseq(&args, None);
    let b = parityseq(&args, Some("1"));
    let c = parityseq(&args, Some("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let cargs = ["congruence", "--id", "T4.1", "--primes", "3..80", "--seq", "fibonacci"];
    assert_eq!(parityseq(&cargs, Some("1")).stdout, parityseq(&cargs, Some("3")).stdout);
}

#[test]
fn gen_csv_and_json_agree() {
    let base = ["gen", "--kind", "lucas_v_norm", "--param", "b=3", "c=2", "--upto", "20"];
    let json = parityseq(&[&base[..], &["--format", "json"]].concat(), None);
    let csv = parityseq(&[&base[..], &["--format", "csv"]].concat(), None);
    let from_json: BTreeSet<(String, String)> = stdout(&json)
        .lines()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            (v["n"].to_string(), v["value"].as_str().unwrap().to_string())
        })
        .collect();
    let from_csv: BTreeSet<(String, String)> = stdout(&csv)
        .lines()
        .skip(1)
        .map(|l| {
            let (n, v) = l.split_once(',').unwrap();
            (n.to_string(), v.to_string())
        })
        .collect();
    assert_eq!(from_json.len(), 21);
    assert_eq!(from_json, from_csv);
}

#[test]
fn verify_csv_and_json_agree() {
    let base = ["verify", "--id", "L2.3", "--range", "n=0..6", "--range", "m=0..6"];
    let json = parityseq(&[&base[..], &["--format", "json"]].concat(), None);
    let csv = parityseq(&[&base[..], &["--format", "csv"]].concat(), None);
    // m > n tuples are hypothesis errors
    assert_eq!(json.status.code(), Some(2));
    assert_eq!(csv.status.code(), Some(2));
    let key = |params: String, residual: String| (params, residual);
    let from_json: BTreeSet<_> = stdout(&json)
        .lines()
        .filter_map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            let residual = v.get("residual")?.as_str()?.to_string();
            let params: Vec<String> = v["params"]
                .as_object()
                .unwrap()
                .iter()
                .map(|(k, x)| format!("{k}={}", x.as_str().unwrap()))
                .collect();
            Some(key(params.join(";"), residual))
        })
        .collect();
    let from_csv: BTreeSet<_> = stdout(&csv)
        .lines()
        .skip(1)
        .filter(|l| !l.contains(",error,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            key(f[1].to_string(), f[4].to_string())
        })
        .collect();
    assert_eq!(from_json.len(), 28);
    assert_eq!(from_json, from_csv);
}

#[test]
fn exit_codes() {
    let ok = parityseq(&["verify", "--id", "C2.2", "--range", "n=0..50"], None);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).lines().count(), 51);

    let hyp = parityseq(&["verify", "--id", "T2.1", "--seq", "fibonacci", "--range", "n=1..9"], None);
    assert_eq!(hyp.status.code(), Some(2));
    assert!(stdout(&hyp).contains("hypothesis"));

    let refuted = parityseq(&["congruence", "--id", "C4.2b", "--primes", "3..20"], None);
    assert_eq!(refuted.status.code(), Some(1));

    let bad_flag = parityseq(&["gen", "--kind", "s_seq"], None);
    assert_eq!(bad_flag.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_flag.stderr).contains("--upto"));

    let bad_range = parityseq(&["verify", "--id", "C2.2", "--range", "n=a..b"], None);
    assert_eq!(bad_range.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_range.stderr).contains("--range"));
}

#[test]
fn classify_report() {
    let o = parityseq(&["classify", "--kind", "bernoulli", "--upto", "3"], None);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "Neither");
    assert_eq!(v["checked_upto"], 3);
    assert_eq!(v["first_violation"]["index"], 1);

    let o = parityseq(&["classify", "--kind", "half_pow"], None);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "EvenUpTo");
    assert_eq!(v["checked_upto"], 64);
    assert!(v.get("first_violation").is_none());
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("parityseq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("euler.csv");
    let o = parityseq(
        &["gen", "--kind", "euler", "--upto", "6", "--format", "csv", "--output", path.to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().last().unwrap(), "6,-61");
    std::fs::remove_dir_all(&dir).unwrap();
}
