use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_sketchreg");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(json: &'a str, key: &str) -> &'a str {
    let tag = format!("\"{key}\": ");
    let start = json.find(&tag).unwrap_or_else(|| panic!("{key} missing in {json}")) + tag.len();
    let rest = &json[start..];
    let end = rest.find([',', '\n']).unwrap();
    &rest[..end]
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).display().to_string();
    let mut args = vec!["gen", "--n", "80", "--d", "5", "--seed", "4", "--out", &path];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn gen_then_fit_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.csv", &["--header"]);
    let summary = run(&["gen", "--n", "3", "--d", "2", "--out", &dir.path().join("t.csv").display().to_string()]);
    let text = stdout(&summary);
    assert!(text.contains("\"schema\": \"sketchreg/1\"") && text.contains("\"beta_true\""), "{text}");

    let fit = run(&["fit", "--data", &data, "--header", "--lambda", "0.5"]);
    assert_eq!(fit.status.code(), Some(0));
    let text = stdout(&fit);
    assert_eq!(field(&text, "command"), "\"fit\"");
    assert_eq!(field(&text, "converged"), "true");

    let b = run(&["bounds", "--data", &data, "--header", "--lambda", "1", "--sketch", "rand:2:9", "--xent"]);
    assert_eq!(b.status.code(), Some(0), "{}", String::from_utf8_lossy(&b.stderr));
    let text = stdout(&b);
    assert_eq!(field(&text, "sandwich_ok"), "true");
    assert!(text.contains("\"cross_entropy\""));
}

#[test]
fn libsvm_round_trip_gives_same_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = gen(dir.path(), "d.csv", &[]);
    let svm = gen(dir.path(), "d.svm", &["--format", "libsvm"]);
    let a = stdout(&run(&["fit", "--data", &csv, "--lambda", "1"]));
    let b = stdout(&run(&["fit", "--data", &svm, "--d-hint", "5", "--lambda", "1"]));
    assert_eq!(field(&a, "loss"), field(&b, "loss"));
}

#[test]
fn mu_cross_check_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.csv", &[]);
    let out = dir.path().join("mu.json");
    let o = run(&["mu", "--data", &data, "--cross-check", "--out", &out.display().to_string()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(field(&text, "status"), "\"finite\"");
    assert_eq!(field(&text, "agree"), "true");
}

#[test]
fn separable_data_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sep.csv");
    std::fs::write(&path, "1,2.0,0.5\n1,1.0,1.5\n-1,-1.0,-0.5\n-1,-2.0,0.3\n").unwrap();
    let p = path.display().to_string();
    let fit = run(&["fit", "--data", &p, "--lambda", "0"]);
    assert_eq!(fit.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&fit.stderr).contains("separable"));
    let mu = run(&["mu", "--data", &p]);
    assert_eq!(mu.status.code(), Some(0));
    assert_eq!(field(&stdout(&mu), "status"), "\"infinite_separable\"");
    assert_eq!(field(&stdout(&mu), "mu"), "null");
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.csv", &[]);
    let missing = dir.path().join("nope.csv").display().to_string();
    let bad_csv = dir.path().join("bad.csv");
    std::fs::write(&bad_csv, "1,2.0\n1,abc\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["fit".into(), "--data".into(), missing, "--lambda".into(), "1".into()],
        vec!["fit".into(), "--data".into(), data.clone(), "--lambda".into(), "-1".into()],
        vec!["bounds".into(), "--data".into(), data.clone(), "--lambda".into(), "1".into(), "--sketch".into(), "pca:0".into()],
        vec!["bounds".into(), "--data".into(), data, "--lambda".into(), "1".into(), "--sketch".into(), "coord:9".into()],
        vec!["fit".into(), "--data".into(), bad_csv.display().to_string(), "--lambda".into(), "1".into()],
        vec!["frobnicate".into()],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&refs);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let parse_err = run(&["fit", "--data", &bad_csv.display().to_string(), "--lambda", "1"]);
    assert!(String::from_utf8_lossy(&parse_err.stderr).contains("bad.csv:2:"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn lowrank_tightness_and_data() {
    let t = stdout(&run(&["lowrank", "--tightness", "--n", "10", "--x", "50", "--s", "1"]));
    let ratio: f64 = field(&t, "achieved_ratio").parse().unwrap();
    assert!(ratio >= 0.99);
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.csv", &[]);
    let o = run(&["lowrank", "--data", &data, "--k", "2", "--beta", "random:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "holds"), "true");
    let full = stdout(&run(&["lowrank", "--data", &data, "--k", "5"]));
    assert_eq!(field(&full, "gap"), "0.0000000000000000e0");
}

#[test]
fn experiment_writes_sorted_csv() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "d.csv", &["--header"]);
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "lambdas = [1.0, 0.1]\nsketches = [\"pca:2\", \"rand:3\"]\nseeds = [2, 1]\noutput = \"out.csv\"\n\n[data]\nkind = \"csv\"\npath = \"d.csv\"\nheader = true\n",
    )
    .unwrap();
    let o = run(&["experiment", &cfg.display().to_string()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("instance_id,seed,n,d,k,lambda,sketch"));
    assert!(lines[1].starts_with("d-s1,1,80,5,2,1.0000000000000001e-1,pca:2,"));
    assert!(lines[1].ends_with(",finite,"), "{}", lines[1]);

    std::fs::write(&cfg, "lambdas = [1.0]\nsketches = [\"pca:2\"]\ntypo = 3\n[data]\nkind = \"generative\"\nn = 10\nd = 3\n").unwrap();
    let o = run(&["experiment", &cfg.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("typo"));
}
