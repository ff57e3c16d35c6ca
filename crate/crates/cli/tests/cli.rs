use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios")
}

fn daniell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daniell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_shrinking_box_passes() {
    let f = scenarios().join("positive/cond2_shrinking.json");
    let o = daniell(&["check", "--scenario", path(&f)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("PASS"));
}

#[test]
fn integrate_prints_enclosure_json() {
    let f = scenarios().join("inputs/geom.json");
    let o = daniell(&["integrate", "--series", path(&f), "--eps", "1/1024"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["hi"], "1");
    assert_eq!(v["lo"], "511/512");
}

#[test]
fn unknown_family_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir, "s.json", r#"{"name":"u","check":"dct","family":"no_such_family"}"#);
    let o = daniell(&["check", "--scenario", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown family"), "{}", stderr(&o));
}

#[test]
fn malformed_scenario_names_json_path() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "s.json",
        r#"{"space":"boxes:1","prefix":[{"dim":1,"terms":[{"coef":"1/2","box":[["0","1.5"]]}]}]}"#,
    );
    let o = daniell(&["norm", "--series", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("prefix[0].terms[0].box[0][1]"), "{}", stderr(&o));
}

#[test]
fn budget_exhaustion_exits_two() {
    let f = scenarios().join("inputs/geom.json");
    let o = daniell(&["integrate", "--series", path(&f), "--budget", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        &dir,
        "s.json",
        r#"{"name":"slow","check":"subsequence","family":"harmonic","budget":100}"#,
    );
    let o = daniell(&["check", "--scenario", path(&s)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("INCONCLUSIVE"));
}

#[test]
fn suites_exit_by_worst_verdict() {
    let o = daniell(&["suite", path(&scenarios().join("positive"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = daniell(&["suite", path(&scenarios().join("faults")), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["verdict"], "fail", "{line}");
        assert!(v["witness"].is_string(), "{line}");
    }
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let f = scenarios().join("positive/axioms_boxes3.json");
    let a = daniell(&["check", "--scenario", path(&f), "--json", "--trace"]);
    let b = daniell(&["check", "--scenario", path(&f), "--json", "--trace"]);
    assert_eq!(a.stdout, b.stdout);
    let c = daniell(&["check", "--scenario", path(&f), "--json", "--seed", "99"]);
    assert!(stdout(&c).contains("\"seed\":99"));
}

#[test]
fn eval_measure_and_decompose() {
    let inputs = scenarios().join("inputs");
    let o = daniell(&["eval", "--series", path(&inputs.join("geom.json")), "--at", "3/2"]);
    assert_eq!(stdout(&o).trim(), r#"{"exact":"1/4"}"#);

    let o = daniell(&["measure", "--set", path(&inputs.join("two_boxes.json"))]);
    assert_eq!(stdout(&o).trim(), r#"{"finite":{"hi":"3/2","lo":"3/2"}}"#);
    let o = daniell(&["measure", "--set", path(&inputs.join("divergent_union.json"))]);
    assert_eq!(stdout(&o).trim(), r#"{"infinite":true}"#);

    let o = daniell(&["decompose", "--function", path(&inputs.join("steps.json")), "--n", "2"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["integral"], "25/16");
    assert_eq!(v["gap"], "7/16");
}

#[test]
fn overlapping_union_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "u.json",
        r#"{"kind":"indicator","space":"boxes:1","members":[[[["0","2"]]],[[["1","3"]]]]}"#,
    );
    let o = daniell(&["measure", "--set", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("overlap"), "{}", stderr(&o));
}

#[test]
fn bad_tolerance_is_rejected() {
    let f = scenarios().join("inputs/geom.json");
    let o = daniell(&["integrate", "--series", path(&f), "--eps", "0.001"]);
    assert_ne!(o.status.code(), Some(0));
    let o = daniell(&["integrate", "--series", path(&f), "--eps", "-1/2"]);
    assert_ne!(o.status.code(), Some(0));
}
