//! `krein`: solve waves, compute stability indices, sweep parameters and dump
//! spectra and operators to files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use krein_core::export::{
    result_row, spectrum_csv, sweep_csv, write_atomic, write_json, write_matrix, write_profile,
    ProfileMetadata, SWEEP_HEADER,
};
use krein_core::operators::{bbm_linearization, kdv_linearization, sandwich};
use krein_core::spectra::HamiltonianKind;
use krein_core::verdicts::{
    classified_spectrum, schrodinger_sech2, self_check, stability_matrix, sweep, verdict, Axis, Numerics, SweepSpec,
    SELF_CHECK_CASES,
};
use krein_core::waves::{bbm_wave, kdv_wave, scaled_wave, solve_ground_state, Model};
use krein_core::Error;

const EXIT_OK: u8 = 0;
const EXIT_NUMERICAL: u8 = 1;
const EXIT_WARNING: u8 = 2;
const EXIT_THEORY: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
enum ModelArg {
    Fkdv,
    Fbbm,
    Schrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxisArg {
    P,
    C,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OperatorArg {
    /// `L` (fKdV, Schrödinger) or `L₀` (fBBM).
    Linearization,
    /// `R L R` with the regularized quarter root.
    Sandwich,
    /// The matrix the Hamiltonian spectrum is taken of.
    Stability,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    n: Option<usize>,
    half_length: Option<f64>,
}

/// Run configuration; every field may also come from the command line.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    model: Option<ModelArg>,
    s: Option<f64>,
    p: Option<f64>,
    c: Option<f64>,
    #[serde(default)]
    grid: GridConfig,
    /// Recognized keys: `solver`, `max_iters`.
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    output_dir: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Dispersion order in (0, 2].
    #[arg(long)]
    s: Option<f64>,
    /// Nonlinearity exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Wave speed.
    #[arg(long)]
    c: Option<f64>,
    /// Grid points (power of two recommended).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "half-length")]
    half_length: Option<f64>,
    /// Ground-state solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Parser)]
#[command(name = "krein", version, about = "Hamiltonian-Krein index toolkit for fractional KdV and BBM solitary waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the solitary wave and write the profile.
    SolveWave(Common),
    /// Compute the stability index and verdict.
    Index(Common),
    /// Run the verdict along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        end: f64,
        /// Spacing between points; the end point is included when it lands on the lattice.
        #[arg(long, conflicts_with = "steps")]
        step: Option<f64>,
        /// Number of points, endpoints included.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Write the classified Hamiltonian spectrum.
    Spectrum(Common),
    /// Write an operator matrix as raw little-endian doubles plus a JSON header.
    DumpOperator {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "stability")]
        operator: OperatorArg,
        /// Regularization for `--operator sandwich`.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Run a packaged set of consistency checks.
    SelfCheck {
        /// One of gkdv-p2, schrodinger-sech2, bo.
        case: String,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_theory_failure() {
            EXIT_THEORY
        } else if matches!(e.root(), Error::InvalidParameter(_)) {
            EXIT_USAGE
        } else {
            EXIT_NUMERICAL
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

/// Resolved configuration after merging file and flags.
struct Run {
    model: ModelArg,
    s: f64,
    p: Option<f64>,
    c: f64,
    numerics: Numerics,
    grid_given: bool,
    out: PathBuf,
    format: Format,
}

impl Run {
    fn p(&self) -> Result<f64, Failure> {
        self.p.ok_or_else(|| Failure::usage("missing --p (nonlinearity exponent)"))
    }

    fn wave_model(&self) -> Result<Model, Failure> {
        match self.model {
            ModelArg::Fkdv => Ok(Model::Fkdv),
            ModelArg::Fbbm => Ok(Model::Fbbm),
            ModelArg::Schrodinger => Err(Failure::usage("this command needs --model fkdv or fbbm")),
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
}

fn resolve(common: &Common) -> Result<Run, Failure> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    cfg.model = common.model.or(cfg.model);
    cfg.s = common.s.or(cfg.s);
    cfg.p = common.p.or(cfg.p);
    cfg.c = common.c.or(cfg.c);
    cfg.grid.n = common.n.or(cfg.grid.n);
    cfg.grid.half_length = common.half_length.or(cfg.grid.half_length);
    if let Some(t) = common.tol {
        cfg.tolerances.insert("solver".into(), t);
    }
    cfg.output_dir = common.out.clone().or(cfg.output_dir);
    cfg.format = common.format.or(cfg.format);

    let model = cfg.model.unwrap_or(ModelArg::Fkdv);
    let s = match model {
        ModelArg::Schrodinger => cfg.s.unwrap_or(2.0),
        _ => cfg.s.ok_or_else(|| Failure::usage("missing --s (dispersion order)"))?,
    };
    let c = cfg.c.unwrap_or(match model {
        ModelArg::Fbbm => 2.0,
        ModelArg::Schrodinger => 0.5,
        ModelArg::Fkdv => 1.0,
    });
    let mut numerics = match model {
        ModelArg::Fkdv => Numerics::for_model(Model::Fkdv, s),
        ModelArg::Fbbm => Numerics::for_model(Model::Fbbm, s),
        ModelArg::Schrodinger => Numerics {
            n: 512,
            half_length: 20.0,
            ..Numerics::for_order(s)
        },
    };
    let grid_given = cfg.grid.n.is_some() || cfg.grid.half_length.is_some();
    numerics.n = cfg.grid.n.unwrap_or(numerics.n);
    numerics.half_length = cfg.grid.half_length.unwrap_or(numerics.half_length);
    for (key, value) in &cfg.tolerances {
        match key.as_str() {
            "solver" => numerics.solver_tol = Some(*value),
            "max_iters" if *value >= 1.0 && value.fract() == 0.0 => numerics.max_iters = Some(*value as usize),
            _ => return Err(Failure::usage(format!("unknown or invalid tolerance {key:?} = {value}"))),
        }
    }
    Ok(Run {
        model,
        s,
        p: cfg.p,
        c,
        numerics,
        grid_given,
        out: cfg.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        format: cfg.format.unwrap_or(Format::Csv),
    })
}

fn io(e: Error) -> Failure {
    Failure {
        code: EXIT_NUMERICAL,
        message: format!("write failed: {e}"),
    }
}

fn cmd_solve_wave(common: &Common) -> Outcome {
    let run = resolve(common)?;
    let model = run.wave_model()?;
    let p = run.p()?;
    let grid = run.numerics.grid()?;
    let opts = run.numerics.solver(run.s);
    let q = solve_ground_state(run.s, p, &grid, &opts)?;
    let u = match model {
        Model::Fbbm => bbm_wave(&q, run.c, &opts)?,
        _ => kdv_wave(&q, run.c, &opts)?,
    };
    match run.format {
        Format::Csv => {
            write_profile(&run.out, "profile", &u).map_err(io)?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Profile {
                metadata: ProfileMetadata,
                x: Vec<f64>,
                u: Vec<f64>,
            }
            let body = Profile {
                metadata: ProfileMetadata::of(&u),
                x: grid.points(),
                u: u.values().to_vec(),
            };
            write_json(&run.out.join("profile.json"), &body).map_err(io)?;
        }
    }
    println!(
        "residual={:e} boundary={:e} peak={}",
        u.residual_norm,
        u.boundary_value,
        u.peak()
    );
    for w in &u.warnings {
        eprintln!("warning: {w}");
    }
    if u.truncated() {
        eprintln!("warning: profile truncated at the box edge ({:e}); enlarge --half-length", u.boundary_value);
        return Ok(EXIT_WARNING);
    }
    if u.residual_norm > 10.0 * opts.tol {
        eprintln!("warning: residual {:e} above tolerance {:e}", u.residual_norm, opts.tol);
        return Ok(EXIT_WARNING);
    }
    Ok(EXIT_OK)
}

fn cmd_index(common: &Common) -> Outcome {
    let run = resolve(common)?;
    let model = run.wave_model()?;
    let p = run.p()?;
    let result = match verdict(model, run.s, p, run.c, &run.numerics) {
        Ok(r) => r,
        Err(e) => {
            if let Error::IndexMismatch(r) = e.root() {
                write_json(&run.out.join("result.json"), r).map_err(io)?;
                println!("{}", r.summary_line());
            }
            return Err(e.into());
        }
    };
    write_json(&run.out.join("result.json"), &result).map_err(io)?;
    if run.format == Format::Csv {
        let row = format!("{}\n{},ok\n", SWEEP_HEADER, result_row(&result));
        write_atomic(&run.out.join("result.csv"), row.as_bytes()).map_err(io)?;
    }
    println!("{}", result.summary_line());
    for d in &result.diagnostics {
        eprintln!("note: {d}");
    }
    Ok(if result.accuracy_warning { EXIT_WARNING } else { EXIT_OK })
}

fn sweep_values(start: f64, end: f64, step: Option<f64>, steps: Option<usize>) -> Result<usize, Failure> {
    match (step, steps) {
        (_, Some(k)) => Ok(k),
        (Some(h), None) => {
            if !(h > 0.0) {
                return Err(Failure::usage("--step must be positive"));
            }
            if end < start {
                return Ok(0);
            }
            Ok(((end - start) / h + 1e-9).floor() as usize + 1)
        }
        (None, None) => Err(Failure::usage("give --step or --steps")),
    }
}

fn cmd_sweep(common: &Common, axis: AxisArg, start: f64, end: f64, step: Option<f64>, steps: Option<usize>) -> Outcome {
    let run = resolve(common)?;
    let model = run.wave_model()?;
    let axis = match axis {
        AxisArg::P => Axis::P,
        AxisArg::C => Axis::C,
        AxisArg::S => Axis::S,
    };
    let p = match axis {
        Axis::P => run.p.unwrap_or(start),
        _ => run.p()?,
    };
    let count = sweep_values(start, end, step, steps)?;
    if let Some(h) = step {
        // The lattice end point, so 3.5..4.5 step 0.1 stops at 4.5 exactly.
        if count > 0 && (start + (count - 1) as f64 * h - end).abs() > 1e-9 {
            return Err(Failure::usage(format!("range [{start}, {end}] is not a whole number of steps of {h}")));
        }
    }
    let spec = SweepSpec {
        axis,
        start,
        end,
        steps: count,
        s: run.s,
        p,
        c: run.c,
        model,
    };
    let numerics = run.grid_given.then_some(&run.numerics);
    let report = sweep(&spec, numerics);
    match run.format {
        Format::Csv => write_atomic(&run.out.join("sweep.csv"), sweep_csv(&report).as_bytes()).map_err(io)?,
        Format::Json => write_json(&run.out.join("sweep.json"), &report).map_err(io)?,
    }
    for line in report.bracket_lines() {
        println!("{line}");
    }
    let mut code = EXIT_OK;
    for pt in &report.points {
        if let Err(e) = &pt.result {
            eprintln!("point s={} p={} c={}: {e}", pt.s, pt.p, pt.c);
            code = code.max(if pt.theory_failure { EXIT_THEORY } else { EXIT_NUMERICAL });
        }
    }
    Ok(code)
}

fn cmd_spectrum(common: &Common) -> Outcome {
    let run = resolve(common)?;
    let (a, kind) = match run.model {
        ModelArg::Schrodinger => {
            let grid = run.numerics.grid()?;
            (schrodinger_sech2(&grid, run.c)?.assemble(), HamiltonianKind::Kdv)
        }
        _ => stability_matrix(run.wave_model()?, run.s, run.p()?, run.c, &run.numerics)?,
    };
    let k = classified_spectrum(&a, kind, &run.numerics)?;
    match run.format {
        Format::Csv => write_atomic(&run.out.join("spectrum.csv"), spectrum_csv(&k).as_bytes()).map_err(io)?,
        Format::Json => write_json(&run.out.join("spectrum.json"), &k).map_err(io)?,
    }
    println!(
        "k_r={} k_c={} k_i_minus={} zero={} indeterminate={}",
        k.k_r,
        k.k_c,
        k.k_i_minus,
        k.zero_count,
        k.indeterminate.len()
    );
    Ok(EXIT_OK)
}

fn cmd_dump_operator(common: &Common, operator: OperatorArg, eps: f64) -> Outcome {
    let run = resolve(common)?;
    let grid = run.numerics.grid()?;
    let lin = || -> Result<_, Failure> {
        Ok(match run.model {
            ModelArg::Schrodinger => schrodinger_sech2(&grid, run.c)?,
            ModelArg::Fkdv | ModelArg::Fbbm => {
                let opts = run.numerics.solver(run.s);
                let q = solve_ground_state(run.s, run.p()?, &grid, &opts)?;
                if run.model == ModelArg::Fbbm {
                    bbm_linearization(&scaled_wave(&q, Model::Fbbm, run.c)?)?
                } else {
                    kdv_linearization(&scaled_wave(&q, Model::Fkdv, run.c)?)?
                }
            }
        })
    };
    let m = match operator {
        OperatorArg::Linearization => lin()?.assemble(),
        OperatorArg::Sandwich => sandwich(&lin()?, eps)?,
        OperatorArg::Stability => match run.model {
            ModelArg::Schrodinger => lin()?.assemble(),
            _ => stability_matrix(run.wave_model()?, run.s, run.p()?, run.c, &run.numerics)?.0,
        },
    };
    let (bin, _) = write_matrix(&run.out, "operator", &m).map_err(io)?;
    println!("order={} label={} file={}", m.order(), m.label, bin.display());
    Ok(EXIT_OK)
}

fn cmd_self_check(case: &str) -> Outcome {
    if !SELF_CHECK_CASES.contains(&case) {
        return Err(Failure::usage(format!(
            "unknown self-check case {case:?}; known: {}",
            SELF_CHECK_CASES.join(", ")
        )));
    }
    let report = self_check(case)?;
    let width = report.entries.iter().map(|e| e.name.chars().count()).max().unwrap_or(0);
    for e in &report.entries {
        let pad = width - e.name.chars().count();
        println!(
            "{} {}{}  {}",
            if e.passed { "PASS" } else { "FAIL" },
            e.name,
            " ".repeat(pad),
            e.detail
        );
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_THEORY })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let outcome = match &cli.command {
        Command::SolveWave(c) => cmd_solve_wave(c),
        Command::Index(c) => cmd_index(c),
        Command::Sweep {
            common,
            axis,
            start,
            end,
            step,
            steps,
        } => cmd_sweep(common, *axis, *start, *end, *step, *steps),
        Command::Spectrum(c) => cmd_spectrum(c),
        Command::DumpOperator { common, operator, eps } => cmd_dump_operator(common, *operator, *eps),
        Command::SelfCheck { case } => cmd_self_check(case),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_counts() {
        assert_eq!(sweep_values(3.5, 4.5, Some(0.1), None).ok(), Some(11));
        assert_eq!(sweep_values(2.0, 2.0, Some(0.1), None).ok(), Some(1));
        assert_eq!(sweep_values(2.0, 1.0, Some(0.1), None).ok(), Some(0));
        assert!(sweep_values(0.0, 1.0, None, None).is_err());
    }

    #[test]
    fn config_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"model":"FKDV","s":2,"p":3,"c":2,"grid":{"n":256}}"#).unwrap();
        let cli = Cli::try_parse_from(["krein", "index", "--config", path.to_str().unwrap(), "--p", "5"]).unwrap();
        let Command::Index(common) = cli.command else { panic!() };
        let run = resolve(&common).unwrap();
        assert_eq!((run.s, run.p, run.c, run.numerics.n), (2.0, Some(5.0), 2.0, 256));
        assert_eq!(run.numerics.half_length, Numerics::for_order(2.0).half_length);
    }

    #[test]
    fn unknown_tolerance_is_usage() {
        let cli = Cli::try_parse_from(["krein", "index", "--s", "2"]).unwrap();
        let Command::Index(common) = cli.command else { panic!() };
        assert!(resolve(&common).unwrap().p().is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"s":2,"tolerances":{"bogus":1}}"#).unwrap();
        let cli = Cli::try_parse_from(["krein", "index", "--config", path.to_str().unwrap()]).unwrap();
        let Command::Index(common) = cli.command else { panic!() };
        assert_eq!(resolve(&common).err().map(|f| f.code), Some(EXIT_USAGE));
    }
}
