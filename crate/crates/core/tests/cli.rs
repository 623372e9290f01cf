use std::path::Path;
use std::process::{Command, Output};

fn cpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpe")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn lb_on_best_arm_and_single_set() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.json", r#"{"means": [1, 0], "family": {"explicit": [[0], [1]]}}"#);
    let one = write(dir.path(), "one.json", r#"{"means": [1, 0], "family": {"explicit": [[0, 1]]}}"#);
    let text = stdout(&cpe(&["lb", &two, &one]));
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!((rows[0][2].parse::<f64>().unwrap() - 4.0).abs() < 1e-3);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 2.0);
    assert_eq!(rows[1][2].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("d.json");
    stdout(&cpe(&["gen", "disj-sets", "--k", "2", "--eps", "0.5", "--out", inst.to_str().unwrap()]));
    let go = |out: &str| {
        let o = dir.path().join(out);
        let args = ["run", inst.to_str().unwrap(), "--alg", "naive", "--trials", "1", "--seed", "42", "--no-wall"];
        stdout(&cpe(&[&args[..], &["--out", o.to_str().unwrap()]].concat()));
        std::fs::read(o).unwrap()
    };
    assert_eq!(go("a.csv"), go("b.csv"));
}

#[test]
fn malformed_json_names_the_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"means\": [1, 0],\n \"family\": {\"explicit\": [[0] [1]]}}");
    let o = cpe(&["run", &bad, "--alg", "naive"]);
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("column"), "{err}");
}

#[test]
fn incompatible_pairing_fails() {
    let dir = tempfile::tempdir().unwrap();
    let or = dir.path().join("or.json");
    stdout(&cpe(&["gen", "or", "--n", "4", "--gap", "0.5", "--special", "1", "--out", or.to_str().unwrap()]));
    assert!(!cpe(&["run", or.to_str().unwrap(), "--alg", "efficient"]).status.success());
    assert!(!cpe(&["run", or.to_str().unwrap(), "--alg", "thompson"]).status.success());
    let ok = stdout(&cpe(&["run", or.to_str().unwrap(), "--alg", "lpsample", "--delta", "0.01", "--trials", "2"]));
    assert_eq!(ok.lines().count(), 3);
}

#[test]
fn generators_emit_loadable_documents() {
    for args in [
        vec!["gen", "disj-sets", "--k", "3", "--eps", "0.25", "--paths"],
        vec!["gen", "or", "--n", "5", "--gap", "0.2"],
        vec!["gen", "nw", "--n", "100", "--m", "16"],
        vec!["gen", "ball", "--n", "8", "--spike", "2"],
    ] {
        let text = stdout(&cpe(&args));
        let doc = cpe_core::bench::InstanceDoc::parse(&text).unwrap();
        doc.build().unwrap();
    }
    assert!(!cpe(&["gen", "nw", "--n", "20", "--m", "1048576"]).status.success());
}

#[test]
fn ball_runs_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    stdout(&cpe(&["gen", "ball", "--n", "16", "--spike", "0", "--out", b.to_str().unwrap()]));
    let text = stdout(&cpe(&["run", b.to_str().unwrap(), "--alg", "ball", "--delta", "0.05", "--trials", "4"]));
    assert!(text.lines().skip(1).all(|l| l.contains(",outside,true,")));
}
