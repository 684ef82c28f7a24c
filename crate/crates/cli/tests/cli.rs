use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fulldisp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fulldisp"))
        .args(args)
        .env("FULLDISP_LOG", "error")
        .output()
        .expect("spawn fulldisp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn config_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.ini",
        "[grid]\nn = 64\n\n[params]\nmu = -1\neps = 0.1\nbogus = 3\n",
    );
    let o = fulldisp(&["dispersion-check", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("line 5"), "{err}");
    assert!(err.contains("line 7"), "{err}");
}

#[test]
fn missing_config_file_exits_2() {
    let o = fulldisp(&["simulate", "/nonexistent/run.ini"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn multiplier_check_reports_false_f3_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = fulldisp(&["multiplier-check", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("FAIL F3 <= 1/(1 + x/3)"), "{text}");
    assert!(text.contains("PASS F3 F1 = F2"), "{text}");
    assert!(text.contains("failing table:") && text.contains("multiplier_checks.csv"), "{text}");
    let symbols = fs::read_to_string(out.join("multiplier_symbols.csv")).unwrap();
    assert_eq!(symbols.lines().next(), Some("xi,F1,F2,F3,sqrtF3,F0(z=-1)"));
}

#[test]
fn dispersion_check_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = fulldisp(&["dispersion-check", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("dispersion.csv").exists());
}

#[test]
fn consistency_sweep_writes_point_table_and_gnuplot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.ini", "[sweep]\nmodels = FDGN1, GN1-classical\n");
    let out = dir.path().join("c");
    let o = fulldisp(&["consistency-sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2", "--emit-gnuplot"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = fs::read_to_string(out.join("consistency_sweep_points.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("mu,eps,err_name,value"));
    assert_eq!(table.lines().count(), 1 + 2 * 16);
    assert!(out.join("consistency_sweep.gp").exists());
    assert!(stdout(&o).contains("PASS FDGN1 below GN1-classical"));
}

#[test]
fn simulate_writes_snapshots_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        "s.ini",
        "[model]\nname = FDGN2\n[grid]\nn = 32\n[stepper]\ndt = 0.01\nt_end = 0.1\nsnapshot_every = 5\nrecord_every = 1\n",
    );
    let o = fulldisp(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().next(), Some("t,mass,momentum,energy"));
    assert_eq!(diag.lines().count(), 1 + 11);
    let snap = out.join("snapshot_00000.csv");
    assert!(fs::read_to_string(&snap).unwrap().contains("x,zeta,w"));

    let resume = write_config(
        dir.path(),
        "r.ini",
        &format!(
            "[model]\nname = FDGN2\n[grid]\nn = 32\n[stepper]\ndt = 0.01\nt_end = 0.1\n[output]\nresume = {}\n",
            snap.display()
        ),
    );
    let o = fulldisp(&["simulate", &resume, "--out", dir.path().join("r").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));

    let wrong = write_config(
        dir.path(),
        "w.ini",
        &format!(
            "[model]\nname = FDGN2\n[grid]\nn = 32\n[params]\nmu = 0.31\n[output]\nresume = {}\n",
            snap.display()
        ),
    );
    let o = fulldisp(&["simulate", &wrong, "--out", dir.path().join("w").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refusing to resume"), "{}", stderr(&o));
}
