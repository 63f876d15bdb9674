use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nullwave_core::scenario::{
    compare, convergence_study, load_config, run_experiment, ConfigError, ExperimentPreset, Preset, Report,
    ScenarioError,
};
use nullwave_core::solver::speed_groups;
use nullwave_core::tensor::{
    check_null, check_null_extended, check_symmetry, iterated_commutators, parse_rational, parse_tensor_file,
    FamilyNull, SpeedVector, VectorField,
};

mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const CONDITION: u8 = 2;
    pub const BLOWUP: u8 = 3;
    pub const INVALID: u8 = 4;
}

#[derive(Parser)]
#[command(name = "nullwave", version, about = "Coupled quasilinear wave systems with distinct speeds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check symmetry and the null condition of a tensor file.
    Check {
        tensor: PathBuf,
        /// Also check that all single and double commutators stay null.
        #[arg(long)]
        commutators: bool,
    },
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Replace an existing report in the output directory.
        #[arg(long)]
        overwrite: bool,
    },
    /// Run a named preset, or list presets when no name is given.
    Preset {
        name: Option<String>,
        /// Override a config value, e.g. `--set solver.amplitude=0.02`.
        #[arg(long = "set", value_name = "PATH=VALUE")]
        overrides: Vec<String>,
        /// Output directory (default `nullwave-out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the expanded config and exit.
        #[arg(long)]
        print_config: bool,
        #[arg(long)]
        overwrite: bool,
    },
    /// Compare two reports (files or output directories).
    Compare { a: PathBuf, b: PathBuf },
    /// Standing-wave refinement study under dx/dt halving.
    Convergence {
        /// Comma-separated exact speeds.
        #[arg(long, default_value = "1")]
        speeds: String,
        /// Coarsest points per side.
        #[arg(long, default_value_t = 12)]
        n0: usize,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 0.4)]
        cfl: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Fail (exit 2) when the finest observed order is below this.
        #[arg(long)]
        min_order: Option<f64>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Self { code, message: message.to_string() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Config(_) => exit::INVALID,
            _ => exit::FAILURE,
        };
        Failure::new(code, e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Io { .. } => exit::FAILURE,
            _ => exit::INVALID,
        };
        Failure::new(code, e)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("NULLWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::new(exit::INVALID, format!("NULLWAVE_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::new(exit::FAILURE, e))
}

fn check(path: &Path, commutators: bool) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(exit::FAILURE, format!("{}: {e}", path.display())))?;
    let file = parse_tensor_file(&text).map_err(|e| Failure::new(exit::INVALID, format!("{}: {e}", path.display())))?;
    let (c, speeds) = (&file.tensor, &file.speeds);
    println!("families: {}, nonzero entries: {}", c.m(), c.nonzero().count());
    if let Some((i, j, k, a, b, g)) = check_symmetry(c).violation {
        println!("symmetry: FAILED at C^{{{}{}{}}}_{{{a}{b}{g}}}", i + 1, j + 1, k + 1);
        return Ok(exit::CONDITION);
    }
    println!("symmetry: ok");
    let mut ok = true;
    if speeds.has_repeats() {
        let r = check_null_extended(c, speeds, &speed_groups(speeds)).map_err(|e| Failure::new(exit::INVALID, e))?;
        match &r.witness {
            None => println!("null condition (equal-speed groups): holds"),
            Some(((i, j, k), w)) => {
                println!("null condition (equal-speed groups): FAILS for ({}, {}, {}): {w}", i + 1, j + 1, k + 1);
            }
        }
        ok &= r.null;
    } else {
        let r = check_null(c, speeds).map_err(|e| Failure::new(exit::INVALID, e))?;
        for (k, f) in r.families.iter().enumerate() {
            match f {
                FamilyNull::Null { factor } => {
                    let l: Vec<String> = factor.iter().map(|x| x.to_string()).collect();
                    println!("family {}: null, q = ({}·X)·Q", k + 1, l.join(", "));
                }
                FamilyNull::NotNull(w) => println!("NOT null: {w}"),
            }
        }
        ok &= r.all_null();
    }
    if commutators && ok {
        let fields = VectorField::ALL;
        let mut failures = 0;
        let mut sequences = fields.iter().map(|f| vec![*f]).collect::<Vec<_>>();
        sequences.extend(fields.iter().flat_map(|a| fields.iter().map(move |b| vec![*a, *b])));
        for d in &sequences {
            let k = iterated_commutators(c, d, 2).map_err(|e| Failure::new(exit::FAILURE, e))?;
            let null = if speeds.has_repeats() {
                check_null_extended(&k, speeds, &speed_groups(speeds)).map(|r| r.null)
            } else {
                check_null(&k, speeds).map(|r| r.all_null())
            }
            .map_err(|e| Failure::new(exit::FAILURE, e))?;
            if !null {
                failures += 1;
                println!("commutator {d:?}: NOT null");
            }
        }
        println!("commutators: {} sequences, {failures} failures", sequences.len());
        ok &= failures == 0;
    }
    Ok(if ok { exit::OK } else { exit::CONDITION })
}

fn outcome_code(report: &Report) -> u8 {
    if report.terminal.is_blowup() {
        exit::BLOWUP
    } else if !report.passed {
        exit::CONDITION
    } else {
        exit::OK
    }
}

fn run_config(path: &Path, overwrite: bool) -> Result<u8, Failure> {
    let config = load_config(path)?;
    let out = run_experiment(&config, overwrite)?;
    println!("{}", out.report);
    println!("wrote {}", config.outputs.directory.display());
    Ok(outcome_code(&out.report))
}

fn preset(
    name: Option<String>,
    overrides: Vec<String>,
    out: Option<PathBuf>,
    print_config: bool,
    overwrite: bool,
) -> Result<u8, Failure> {
    let Some(name) = name else {
        for p in Preset::ALL {
            println!("{:<24} {}", p.name(), p.summary());
        }
        return Ok(exit::OK);
    };
    let preset: Preset = name.parse().map_err(|e| Failure::new(exit::INVALID, e))?;
    let mut config = ExperimentPreset { preset, overrides }.expand()?;
    if let Some(dir) = out {
        config.outputs.directory = dir;
    }
    if print_config {
        print!("{}", nullwave_core::scenario::config_to_string(&config)?);
        return Ok(exit::OK);
    }
    let out = run_experiment(&config, overwrite)?;
    println!("{}", out.report);
    println!("wrote {}", config.outputs.directory.display());
    Ok(outcome_code(&out.report))
}

fn read_report(path: &Path) -> Result<Report, Failure> {
    let file = if path.is_dir() { path.join("report.json") } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file).map_err(|e| Failure::new(exit::FAILURE, format!("{}: {e}", file.display())))?;
    Report::from_json(&text).map_err(|e| Failure::new(exit::INVALID, format!("{}: {e}", file.display())))
}

fn compare_reports(a: &Path, b: &Path) -> Result<u8, Failure> {
    let d = compare(&read_report(a)?, &read_report(b)?).map_err(|e| Failure::new(exit::INVALID, e))?;
    println!("{d}");
    Ok(exit::OK)
}

fn convergence(speeds: &str, n0: usize, levels: usize, cfl: f64, t_end: f64, min_order: Option<f64>) -> Result<u8, Failure> {
    let exact = speeds
        .split(',')
        .map(|s| parse_rational(s.trim()).ok_or_else(|| Failure::new(exit::INVALID, format!("bad speed {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let speeds = SpeedVector::with_repeats(exact).map_err(|e| Failure::new(exit::INVALID, e))?;
    let report = convergence_study(&speeds, n0, levels, cfl, t_end).map_err(|e| Failure::new(exit::INVALID, e))?;
    print!("{report}");
    let order = report.observed_order().unwrap_or(f64::NAN);
    match min_order {
        Some(min) if !(order >= min) => {
            println!("observed order {order:.3} below {min}");
            Ok(exit::CONDITION)
        }
        _ => Ok(exit::OK),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Check { tensor, commutators } => check(&tensor, commutators),
        Command::Run { config, overwrite } => run_config(&config, overwrite),
        Command::Preset { name, overrides, out, print_config, overwrite } => {
            preset(name, overrides, out, print_config, overwrite)
        }
        Command::Compare { a, b } => compare_reports(&a, &b),
        Command::Convergence { speeds, n0, levels, cfl, t_end, min_order } => {
            convergence(&speeds, n0, levels, cfl, t_end, min_order)
        }
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
