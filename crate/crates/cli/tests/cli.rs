use std::path::Path;
use std::process::{Command, Output};

fn nullwave(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullwave"))
        .args(args)
        .current_dir(dir)
        .env("NULLWAVE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
[grid]
n = 24

[solver]
amplitude = 0.1

[data]
components = [{ width = 0.6 }]

[probes]
count = 5
order = 2

[outputs]
directory = "out"
"#;

#[test]
fn check_reports_null_and_non_null_tensors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("null.tensor"), "1\n1\n1 1 1 0 0 0 1\n1 1 1 0 1 1 -1\n1 1 1 0 2 2 -1\n1 1 1 0 3 3 -1\n").unwrap();
    std::fs::write(dir.path().join("bad.tensor"), "1\n1\n1 1 1 0 0 0 1\n").unwrap();
    std::fs::write(dir.path().join("asym.tensor"), "2\n1 1/2\n1 1 2 0 0 0 1\n").unwrap();
    std::fs::write(dir.path().join("broken.tensor"), "1\n1\n1 1 1 0 0\n").unwrap();

    let o = nullwave(&["check", "null.tensor", "--commutators"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("family 1: null"));
    assert!(stdout(&o).contains("72 sequences, 0 failures"));

    let o = nullwave(&["check", "bad.tensor"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("NOT null"));

    let o = nullwave(&["check", "asym.tensor"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("symmetry: FAILED at C^{112}_{000}"));

    let o = nullwave(&["check", "broken.tensor"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn run_writes_outputs_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), SMALL).unwrap();
    let o = nullwave(&["run", "run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("terminal: completed"));
    let csv = std::fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);

    // a second run refuses to replace the report
    let o = nullwave(&["run", "run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = nullwave(&["run", "run.toml", "--overwrite"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("out/series.csv")).unwrap(), csv);

    std::fs::write(dir.path().join("bad.toml"), "[solver]\ncfl = 2.0\n[grid]\nn = 2\n").unwrap();
    let o = nullwave(&["run", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert!(err.contains("solver.cfl") && err.contains("grid.n"), "{err}");
}

#[test]
fn blow_up_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("amplitude = 0.1", "amplitude = 3.0")
        + "\n[system]\nentries = [\"1 1 1 0 0 0 1\"]\n";
    std::fs::write(dir.path().join("run.toml"), text).unwrap();
    let o = nullwave(&["run", "run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("terminal: blow-up"));
}

#[test]
fn presets_list_print_and_reject_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let o = nullwave(&["preset"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    for name in ["null_global", "nonnull_blowup", "multispeed_nonresonant", "linear_baseline"] {
        assert!(stdout(&o).contains(name));
    }
    let o = nullwave(&["preset", "null_global", "--set", "solver.amplitude=0.02", "--print-config"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("amplitude = 0.02"));
    assert!(stdout(&o).contains("preset = \"null_global\""));

    assert_eq!(nullwave(&["preset", "nope"], dir.path()).status.code(), Some(4));
    let o = nullwave(&["preset", "null_global", "--set", "solver.bogus=1"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn short_preset_run_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str, n: &'static str| {
        vec![
            "preset", "null_global", "--set", n, "--set", "solver.t_end=0.5", "--set", "probes.count=3", "--set",
            "probes.order=2", "--out", out,
        ]
    };
    let o = nullwave(&args("a", "grid.n=40"), dir.path());
    // too short a window for the growth fit, so the preset checks fail
    assert_eq!(o.status.code(), Some(2), "{}{}", stdout(&o), stderr(&o));
    assert!(dir.path().join("a/report.json").exists());
    nullwave(&args("b", "grid.n=40"), dir.path());
    nullwave(&args("c", "grid.n=44"), dir.path());

    let o = nullwave(&["compare", "a", "b/report.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no differences"));

    let o = nullwave(&["compare", "a", "c"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not directly comparable"));

    std::fs::write(dir.path().join("junk.json"), "{}").unwrap();
    assert_eq!(nullwave(&["compare", "a", "junk.json"], dir.path()).status.code(), Some(4));
}

#[test]
fn convergence_prints_orders() {
    let dir = tempfile::tempdir().unwrap();
    let o = nullwave(&["convergence", "--speeds", "1,1/2", "--min-order", "3.5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 5);
    let o = nullwave(&["convergence", "--min-order", "9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_nullwave")).arg("preset").env("NULLWAVE_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}
