use std::path::Path;

use proptest::prelude::*;

use super::*;
use crate::solver::{DomainPolicy, Terminal};

fn issues(text: &str) -> Vec<Issue> {
    parse_config(text).unwrap().resolve(Path::new(".")).err().unwrap_or_default()
}

fn paths(text: &str) -> Vec<String> {
    issues(text).into_iter().map(|i| i.path).collect()
}

#[test]
fn minimal_file_takes_defaults() {
    let c = parse_config("").unwrap();
    assert_eq!(c, RunConfig::default());
    assert_eq!(c.grid, GridConfig { n: 64, dx: 0.25 });
    assert_eq!(c.solver.cfl, 0.4);
    assert_eq!(c.solver.t_end, None);
    assert_eq!(c.probes.count, 21);
    assert_eq!(c.probes.order, 3);
    let exp = c.resolve(Path::new(".")).unwrap();
    assert!(exp.system.is_linear());
    // clear radius 7.875 − 1.5, bump radius 2
    assert!((exp.t_end - 4.375).abs() < 1e-12);
}

#[test]
fn cfl_violation_names_the_field() {
    let p = paths("[solver]\ncfl = 2.0\n");
    assert_eq!(p, vec!["solver.cfl"]);
}

#[test]
fn asymmetric_tensor_reports_the_witness() {
    let text = "[system]\nspeeds = [\"1\", \"1/2\"]\nentries = [\"1 1 2 0 0 0 1\"]\n[data]\ncomponents = [{}, {}]\n";
    let i = issues(text);
    assert_eq!(i.len(), 1);
    assert_eq!(i[0].path, "system.tensor");
    assert!(i[0].message.contains("check_symmetry"), "{}", i[0]);
    assert!(i[0].message.contains("C^{112}_{000} = 1 but C^{121}_{000} = 0"), "{}", i[0]);
}

#[test]
fn all_issues_are_collected() {
    let text = r#"
[system]
speeds = ["1", "x"]

[grid]
n = 4

[solver]
cfl = 0.0
amplitude = -1.0

[probes]
order = 5
times = [-1.0]
"#;
    let p = paths(text);
    for want in ["system.speeds[1]", "grid.n", "solver.cfl", "solver.amplitude", "probes.order", "probes.times"] {
        assert!(p.iter().any(|x| x == want), "missing {want} in {p:?}");
    }
}

#[test]
fn entry_errors_point_at_the_entry() {
    let text = "[system]\nentries = [\"1 1 1 0 0 0 1\", \"1 1 1 0 0 9 1\"]\n";
    assert_eq!(paths(text), vec!["system.entries[1]"]);
}

#[test]
fn tensor_and_entries_are_exclusive() {
    let text = "[system]\ntensor = \"c.tensor\"\nentries = [\"1 1 1 0 0 0 1\"]\n";
    assert_eq!(paths(text), vec!["system.tensor"]);
}

#[test]
fn domain_and_probe_limits() {
    assert_eq!(paths("[solver]\nt_end = 30.0\n"), vec!["solver.domain_policy"]);
    assert!(paths("[solver]\nt_end = 30.0\ndomain_policy = \"ignore\"\n").is_empty());
    assert_eq!(paths("[solver]\nt_end = 1.0\n[probes]\ntimes = [0.5, 1.5]\n"), vec!["probes.times"]);
    assert_eq!(paths("[data]\ncomponents = [{ width = 9.0 }]\n"), vec!["solver.t_end"]);
}

#[test]
fn oversized_seed_is_rejected() {
    let c = RunConfig { seed: u64::MAX, ..Default::default() };
    assert_eq!(c.resolve(Path::new(".")).unwrap_err()[0].path, "seed");
    assert!(config_to_string(&c).is_err());
}

#[test]
fn unknown_keys_are_parse_errors() {
    assert!(matches!(parse_config("[grid]\nsize = 3\n"), Err(ConfigError::Parse(_))));
    assert!(matches!(parse_config("colour = 1\n"), Err(ConfigError::Parse(_))));
}

#[test]
fn tensor_file_is_read_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("sys")).unwrap();
    std::fs::write(dir.path().join("sys/c.tensor"), "1\n1\n1 1 1 0 0 0 1\n").unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[system]\ntensor = \"sys/c.tensor\"\n").unwrap();
    let c = load_config(&cfg).unwrap();
    let exp = c.resolve(Path::new("/nonexistent")).unwrap();
    assert!(!exp.system.is_null());

    std::fs::write(&cfg, "[system]\nspeeds = [\"2\"]\ntensor = \"sys/c.tensor\"\n").unwrap();
    match load_config(&cfg) {
        Err(ConfigError::Invalid(i)) => assert_eq!(i[0].path, "system.speeds"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(load_config(&dir.path().join("missing.toml")), Err(ConfigError::Io { .. })));
}

#[test]
fn invalid_error_lists_every_issue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[solver]\ncfl = 2.0\n[probes]\norder = 0\n").unwrap();
    let msg = load_config(&cfg).unwrap_err().to_string();
    assert!(msg.contains("solver.cfl") && msg.contains("probes.order"), "{msg}");
}

fn small_config(dir: &Path, n: usize) -> RunConfig {
    let mut c = Preset::NullGlobal.config();
    c.grid = GridConfig { n, dx: 0.25 };
    c.data = InitialData::bump(1, 0.6, 1.0);
    c.solver.amplitude = 0.1;
    c.probes.count = 6;
    c.outputs.directory = dir.to_path_buf();
    c
}

#[test]
fn experiment_writes_outputs_and_refuses_to_clobber() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path(), 24);
    c.outputs.snapshots = SnapshotPolicy::Final;
    let out = run_experiment(&c, false).unwrap();
    for f in ["config.toml", "series.csv", "series.ndjson", "report.json", "final.snap"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(out.report.terminal, Terminal::Completed);
    assert_eq!(out.report.records, 6);
    // the window is too short for a growth fit
    assert!(out.report.e3_fit.is_none() && out.report.e3_fit_error.is_some());
    let back = Report::from_json(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(back, out.report);
    let written = load_config(&dir.path().join("config.toml")).unwrap();
    assert_eq!(written, c);
    assert!(matches!(run_experiment(&c, false), Err(report::ScenarioError::Exists(_))));
    let again = run_experiment(&c, true).unwrap();
    assert_eq!(again.report, out.report);
}

#[test]
fn compare_identical_and_mismatched_grids() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = execute(&small_config(dir.path(), 24).resolve(Path::new(".")).unwrap()).unwrap();
    let d = compare(&a, &a).unwrap();
    assert!(d.is_empty(), "{d}");

    let (b, _) = execute(&small_config(dir.path(), 28).resolve(Path::new(".")).unwrap()).unwrap();
    let d = compare(&a, &b).unwrap();
    assert!(!d.comparable);
    assert!(d.note.as_deref().unwrap().contains("not directly comparable"));
    assert!(d.entries.iter().any(|e| e.metric == "e2_growth"));

    let mut c = a.clone();
    c.schema += 1;
    assert!(compare(&a, &c).is_err());

    let mut c = a.clone();
    c.terminal = Terminal::BlowUp { t: 0.5, reason: "test".into() };
    let d = compare(&a, &c).unwrap();
    assert!(d.entries.iter().any(|e| e.metric == "terminal"));
    assert!(d.entries.iter().any(|e| e.metric == "blowup_t"));
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        0..=i64::MAX as u64,
        prop::sample::select(vec![vec!["1"], vec!["1", "1/2"], vec!["3/2", "3/2"]]),
        16usize..80,
        0.05f64..0.5,
        0.01f64..0.7,
        prop::option::of(0.0f64..2.0),
        any::<bool>(),
        0.0f64..1.0,
        (0.3f64..3.0, 1usize..=3, 0usize..30),
    )
        .prop_map(|(seed, speeds, n, dx, cfl, t_end, ignore, amp, (width, order, count))| {
            let m = speeds.len();
            let mut c = RunConfig { seed, ..Default::default() };
            c.system.speeds = speeds.into_iter().map(String::from).collect();
            if m == 1 {
                c.system.entries = vec!["1 1 1 0 0 0 1/3".into(), "1 1 1 0 1 1 -1/3".into()];
            }
            c.grid = GridConfig { n, dx };
            c.solver = SolverConfig {
                cfl,
                t_end,
                domain_policy: if ignore { DomainPolicy::Ignore } else { DomainPolicy::Enforce },
                amplitude: amp,
            };
            c.data = InitialData::bump(m, width, 1.0);
            c.probes.order = order;
            c.probes.count = count;
            c.outputs.snapshots = if ignore { SnapshotPolicy::Final } else { SnapshotPolicy::None };
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_files(c in config_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        write_config(&c, &path).unwrap();
        let valid = c.resolve(Path::new(".")).is_ok();
        match load_config(&path) {
            Ok(back) => {
                prop_assert!(valid);
                prop_assert_eq!(&back, &c);
            }
            Err(ConfigError::Invalid(_)) => prop_assert!(!valid),
            Err(e) => prop_assert!(false, "{}", e),
        }
        prop_assert_eq!(parse_config(&config_to_string(&c).unwrap()).unwrap(), c);
    }
}

#[test]
fn inline_system_round_trips() {
    for p in Preset::ALL {
        let (speeds, tensor) = p.system();
        let exp = RunConfig { system: SystemConfig::inline(&speeds, &tensor), ..p.config() }.resolve(Path::new(".")).unwrap();
        assert_eq!(exp.system.tensor(), &tensor);
        assert_eq!(exp.system.speeds(), &speeds);
    }
}
