use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn loopinv(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_loopinv"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpus_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.loop"))
        .to_string_lossy()
        .into_owned()
}

const RUNNING: &str = "while (*) do (x,y) := (x + y*y, y + 1) done";

#[test]
fn text_output_for_running_example() {
    let o = loopinv(&["-", "--degree", "3"], RUNNING);
    assert!(o.status.success());
    assert!(stdout(&o).contains("6*x - y + 3*y^2 - 2*y^3 = k"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    assert_eq!(loopinv(&["-"], "while (*) do x := x*x done").status.code(), Some(3));
    assert_eq!(loopinv(&["-"], "while (*) do (x,y) := (x +, y) done").status.code(), Some(2));
    assert_eq!(
        loopinv(&["-", "-d", "2"], "while (*) do (x,y) := (x + y*y*y, y + 1) done").status.code(),
        Some(5)
    );
    assert_eq!(loopinv(&["-", "--init", "x=0"], RUNNING).status.code(), Some(6));
    assert_eq!(loopinv(&["/nonexistent/file.loop"], "").status.code(), Some(1));
    let nested = "while (*) do { x := x + 1; while (*) do y := y + 1 done } done";
    assert_eq!(loopinv(&["-"], nested).status.code(), Some(2));
}

#[test]
fn size_cap_is_reported_as_diagnostic() {
    let o = loopinv(
        &["-", "-d", "2", "--elevate-on-irrational", "--size-cap", "3", "-f", "json"],
        "while (*) do (x,y) := (y, 2*x) done",
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let diags = v["diagnostics"].as_array().unwrap();
    assert!(diags.iter().any(|d| d.as_str().unwrap().contains("skipped")), "{v}");
}

#[test]
fn annotated_eucli_div() {
    let o = loopinv(&[&corpus_file("eucli_div"), "-f", "annotated"], "");
    assert!(o.status.success());
    let out = stdout(&o);
    let inv = out.find("# invariant x + y*q = k").expect(&out);
    let lp = out.find("while").unwrap();
    assert!(inv < lp);
    assert!(out.contains("# invariant y = k  (evident)"), "{out}");
    assert!(out.contains("# invariant y^2 = k  (evident)"), "{out}");
}

#[test]
fn json_is_deterministic_and_schema_stable() {
    let path = corpus_file("lcm2");
    let a = stdout(&loopinv(&[&path, "-f", "json"], ""));
    let b = stdout(&loopinv(&[&path, "-f", "json"], ""));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["program", "degree", "basis", "invariants", "residual_spectrum", "diagnostics", "timings"] {
        assert!(keys.contains(&k), "{k} missing in {keys:?}");
    }
    assert!(v["timings"].is_null());
    assert_eq!(v["program"], "lcm2");
}

#[test]
fn init_and_oracle() {
    let o = loopinv(&["-", "-d", "3", "--init", "x=0,y=0", "--oracle-iters", "50"], RUNNING);
    assert!(o.status.success());
    assert!(stdout(&o).contains("= 0"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle: pass"));
}

#[test]
fn explain_and_dump() {
    let o = loopinv(
        &["-", "-d", "3", "--explain-solvability", "--dump-linearized", "-f", "json"],
        RUNNING,
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.get("solvability").is_some());
    assert!(v.get("linearized").is_some());
}

#[test]
fn empty_bench_directory() {
    let dir = std::env::temp_dir().join(format!("loopinv-empty-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let o = loopinv(&["--bench", dir.to_str().unwrap()], "");
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Name"));
}
