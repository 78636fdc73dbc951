use std::path::Path;
use std::process::{Command, Stdio};
use std::io::Write;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mininet-sim"))
}

fn scenario(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn reference_scenario_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run", scenario("reference20").to_str().unwrap(), "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}\n{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("AS ")).count(), 20);
    let m = std::fs::read_to_string(out.path().join("snapshots/final/matrix.json")).unwrap();
    assert!(!m.contains("\"r\""));
    assert!(out.path().join("grades/20-default.json").exists());
}

#[test]
fn hijack_scenario_grades_the_report() {
    let out = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run", scenario("hijack").to_str().unwrap(), "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    for tag in ["before", "hijacked", "mitigated"] {
        assert!(out.path().join("snapshots").join(tag).join("lg.txt").exists());
    }
    let lg = std::fs::read_to_string(out.path().join("snapshots/mitigated/lg.txt")).unwrap();
    assert!(lg.contains("5.64.0.0/10"));
}

#[test]
fn build_prints_matrix() {
    let topo = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/default-20as.topo");
    let o = bin().arg("build").arg(&topo).arg("--reference").output().unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.starts_with("20 ASes, 3 IXPs"), "{stdout}");
}

#[test]
fn grade_exit_code_follows_result() {
    let dir = tempfile::tempdir().unwrap();
    let rubric = dir.path().join("r.rubric");
    std::fs::write(&rubric, "check a addressing weight=1\n").unwrap();
    let run = |asn: &str| {
        bin()
            .args(["grade", "--as", asn, "--rubric"])
            .arg(&rubric)
            .output()
            .unwrap()
    };
    // AS 1 is configured automatically, AS 3 starts empty.
    assert!(run("1").status.success());
    assert!(!run("3").status.success());
}

#[test]
fn shell_denies_other_groups() {
    let mut child = bin()
        .args(["shell", "--as", "3"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"goto 4.ROUTER1\ngoto ROUTER1\nshow ip bgp\nexit\nexit\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success());
    assert!(s.contains("permission denied: 4.ROUTER1"), "{s}");
    assert!(s.contains("BGP table of 3.ROUTER1"), "{s}");
}

#[test]
fn malformed_scenario_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(scenario("reference20").join("topology.txt"), dir.path().join("topology.txt")).unwrap();
    std::fs::write(dir.path().join("events.txt"), "teleport 3\n").unwrap();
    let o = bin().arg("run").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}
