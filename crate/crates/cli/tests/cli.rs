use std::path::Path;
use std::process::{Command, Output};

fn xt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xt")).current_dir(dir).args(args).output().expect("xt runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn body(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

#[test]
fn tsirelson_norm_of_two_units() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.vec"), "{2:1,3:1}\n").unwrap();
    let o = xt(dir.path(), &["norm", "t", "--vector", "f.vec"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(body(&o), vec!["1"]);
    assert!(stdout(&o).starts_with("# mode=strict seed=0 codebook="));
}

#[test]
fn negative_verdict_and_usage_error_exit_differently() {
    let dir = tempfile::tempdir().unwrap();
    let o = xt(dir.path(), &["schreier", "member", "--n", "1", "--set", "{1,2}"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(body(&o), vec!["false"]);
    let o = xt(dir.path(), &["schreier", "member", "--n", "1", "--set", "{2,3}"]);
    assert_eq!(o.status.code(), Some(0));
    let o = xt(dir.path(), &["schreier", "member", "--nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = xt(dir.path(), &["norm", "walpha", "--vector", "missing.vec"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_embeds_the_run_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.vec"), "{3:1, 4:1, 5:1}\n").unwrap();
    let o = xt(dir.path(), &["--format", "json", "--seed", "9", "norm", "walpha", "--vector", "x.vec", "--witness"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mode"], "strict");
    assert_eq!(v["seed"], 9);
    assert_eq!(v["codebook"].as_str().unwrap().len(), 64);
    assert_eq!(v["result"]["value"], "1");
}

#[test]
fn toy_outputs_carry_the_banner() {
    let dir = tempfile::tempdir().unwrap();
    let o = xt(dir.path(), &["--mode", "toy", "scc", "gen", "--n", "1", "--eps", "3/10", "--ground", "4.."]);
    let text = stdout(&o);
    assert!(text.contains("# NOTE: toy mode, non-paper parameters"));
    assert_eq!(body(&o), vec!["{4:1/4, 5:1/4, 6:1/4, 7:1/4}"]);
}

#[test]
fn synthesized_sequence_checks_against_its_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let toy = ["--mode", "toy", "--codebook", "cb.log"];
    let o = xt(dir.path(), &[&toy[..], &["analysis", "synth", "--len", "2", "--start", "2"]].concat());
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(dir.path().join("node.txt"), &o.stdout).unwrap();
    let log = std::fs::read_to_string(dir.path().join("cb.log")).unwrap();
    assert_eq!(log.lines().count(), 1);
    assert!(log.starts_with("ASSIGN "));

    let o = xt(dir.path(), &[&toy[..], &["analysis", "dependent", "--node", "node.txt"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = xt(dir.path(), &[&toy[..], &["tree", "validate", "--node", "node.txt"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let o = xt(dir.path(), &[&toy[..], &["codebook", "audit"]].concat());
    assert_eq!(o.status.code(), Some(0));

    // Without the codebook the second weight is not a coded value.
    let o = xt(dir.path(), &["--mode", "toy", "tree", "validate", "--node", "node.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = "wtd[1](avg[basic;1;+](unit(+,3)),avg[basic;9;++](unit(+,4),unit(+,5)))\n";
    std::fs::write(dir.path().join("f.cert"), cert).unwrap();
    std::fs::write(dir.path().join("x.vec"), "{3:1, 4:1, 5:1}\n").unwrap();
    let o = xt(dir.path(), &["wt", "eval", "--cert", "f.cert", "--vector", "x.vec"]);
    assert_eq!(body(&o), vec!["11/18"]);
    let o = xt(dir.path(), &["wt", "check", "--cert", "f.cert"]);
    assert_eq!(o.status.code(), Some(0));
    let o = xt(dir.path(), &["wt", "restrict", "--cert", "f.cert", "--interval", "[4,5]"]);
    assert!(body(&o)[0].starts_with("wtd[1](avg[basic;9;++](unit(+,4),unit(+,5)))"), "{:?}", body(&o));
    let o = xt(dir.path(), &["wt", "restrict", "--cert", "f.cert", "--interval", "[7,9]"]);
    assert_eq!(body(&o), vec!["0"]);
}

#[test]
fn reruns_are_byte_identical() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let o = xt(dir.path(), &["--seed", "5", "analysis", "harness", "--sccs", "3"]);
        (o.stdout, o.status.code())
    };
    assert_eq!(run(), run());
}
