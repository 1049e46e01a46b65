//! `idiot`: command-line front end for the crash, the reference modes and
//! the QAP pipeline.
//!
//! Exit status: 0 success, 1 usage, 2 parse, 3 abandoned sample phase,
//! 4 unbounded ray, 5 oracle size guard.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use idiot_crash::general::{to_standard_form, VariableMap};
use idiot_crash::idiot::{run_idiot, IdiotConfig, IdiotError, IdiotStatus};
use idiot_crash::instances::random_bounded_lp;
use idiot_crash::lab::{self, LabConfig, Mode};
use idiot_crash::mps::{parse_mps, read_standard, write_mps};
use idiot_crash::oracle::{solve_by_enumeration, OracleError, OracleStatus};
use idiot_crash::qap::{aj_dimensions, aj_linearize, dualize, parse_qaplib, QapInstance};
use idiot_crash::report::{write_trace_csv, SolutionReport};
use idiot_crash::StandardFormLP;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("sample phase abandoned; no usable point")]
    Abandoned,
    #[error("unbounded ray detected")]
    Unbounded,
    #[error(transparent)]
    OracleGuard(#[from] OracleError),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Abandoned => 3,
            CliError::Unbounded => 4,
            CliError::OracleGuard(_) => 5,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Parser)]
#[command(name = "idiot", version, about = "Penalty crash for linear programs in standard form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the crash on an MPS file (`-` or no path reads stdin).
    Solve(SolveArgs),
    /// Linearize a QAPLIB instance and write it as MPS.
    Qapgen {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the dual of an MPS model's standard form as MPS.
    Dualize {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a tiny MPS model exactly by vertex enumeration.
    Oracle { input: PathBuf },
    /// Reference studies.
    Study {
        #[command(subcommand)]
        suite: Study,
    },
}

#[derive(Debug, Subcommand)]
enum Study {
    /// Exact-mode limit against the oracle on seeded random LPs.
    Theorem1 {
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Per-instance CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the three reference modes on one model and writes their traces.
    Modes {
        /// MPS model; the one-constraint LP `min x1 + x2, x1 + x2 = 1` if absent.
        input: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 30)]
        max_outer: usize,
    },
    /// Linearization sizes for n = 2..8 against the closed forms.
    QapDims,
}

#[derive(Debug, Args)]
struct SolveArgs {
    input: Option<PathBuf>,
    /// `key = value` lines using the config field names; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Known optimum; prints both relative error measures.
    #[arg(long, allow_hyphen_values = true)]
    fstar: Option<f64>,
    /// Per-iteration CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    outer_iterations: Option<String>,
    #[arg(long)]
    mu0: Option<String>,
    #[arg(long)]
    mu_factor: Option<String>,
    #[arg(long)]
    mu_update_period: Option<String>,
    #[arg(long)]
    warmup_sweeps: Option<String>,
    #[arg(long)]
    main_sweeps: Option<String>,
    #[arg(long)]
    progress_check_start: Option<String>,
    #[arg(long)]
    progress_check_stride: Option<String>,
    #[arg(long)]
    sample_iterations: Option<String>,
    #[arg(long)]
    sample_required_reduction: Option<String>,
    #[arg(long)]
    mu_floor: Option<String>,
    #[arg(long)]
    moving_average_window: Option<String>,
}

impl SolveArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 12] {
        [
            ("outer_iterations", &self.outer_iterations),
            ("mu0", &self.mu0),
            ("mu_factor", &self.mu_factor),
            ("mu_update_period", &self.mu_update_period),
            ("warmup_sweeps", &self.warmup_sweeps),
            ("main_sweeps", &self.main_sweeps),
            ("progress_check_start", &self.progress_check_start),
            ("progress_check_stride", &self.progress_check_stride),
            ("sample_iterations", &self.sample_iterations),
            ("sample_required_reduction", &self.sample_required_reduction),
            ("mu_floor", &self.mu_floor),
            ("moving_average_window", &self.moving_average_window),
        ]
    }

    fn config(&self) -> Result<IdiotConfig, CliError> {
        let mut cfg = IdiotConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            cfg.apply_kv_text(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        }
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| CliError::Usage(e.to_string()))?;
            }
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Everything a command produces; written only once the command succeeded.
#[derive(Default)]
struct Output {
    stdout: String,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Output {
    fn text(stdout: String) -> Self {
        Output { stdout, files: Vec::new() }
    }

    /// Text to `path` if given, else to stdout.
    fn to(path: &Option<PathBuf>, text: String) -> Self {
        match path {
            Some(p) => Output { stdout: String::new(), files: vec![(p.clone(), text.into_bytes())] },
            None => Output::text(text),
        }
    }

    fn flush(self) -> Result<(), CliError> {
        for (path, bytes) in &self.files {
            std::fs::write(path, bytes).map_err(io_err(path))?;
        }
        let mut out = io::stdout().lock();
        out.write_all(self.stdout.as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
        Ok(())
    }
}

fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).map_err(io_err(p)),
        _ => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text).map_err(io_err(Path::new("<stdin>")))?;
            Ok(text)
        }
    }
}

fn load_mps(path: Option<&Path>) -> Result<(StandardFormLP, VariableMap), CliError> {
    let text = read_input(path)?;
    read_standard(&text).map_err(|e| CliError::Parse(e.to_string()))
}

fn model_name(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("MODEL").to_string()
}

fn solve(args: &SolveArgs) -> Result<Output, CliError> {
    let cfg = args.config()?;
    let (lp, map) = load_mps(args.input.as_deref())?;
    let out = run_idiot(&lp, &cfg, None).map_err(|e| match e {
        IdiotError::UnboundedRay { .. } => CliError::Unbounded,
        other => CliError::Usage(other.to_string()),
    })?;
    match out.status {
        IdiotStatus::AbandonedSamplePhase => return Err(CliError::Abandoned),
        IdiotStatus::UnboundedRayDetected => return Err(CliError::Unbounded),
        IdiotStatus::ConvergedResidual | IdiotStatus::IterationLimit => {}
    }
    let r = &out.report;
    let mut report = SolutionReport::new(r.residual_norm, map.original_objective(r.objective), r.iterations, r.elapsed);
    if let Some(f_star) = args.fstar {
        report = report.with_reference(f_star).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut text = format!("status         {}\n{report}\n", out.status.as_str());
    if report.objective_error_relative.is_none() && args.fstar.is_some() {
        text.push_str("error_relative undefined (objective is zero)\n");
    }
    let mut output = Output::text(text);
    if let Some(path) = &args.trace {
        let mut csv = Vec::new();
        write_trace_csv(&mut csv, &out.trace, None).map_err(io_err(path))?;
        output.files.push((path.clone(), csv));
    }
    Ok(output)
}

fn qapgen(input: &Path, out: &Option<PathBuf>) -> Result<Output, CliError> {
    let text = std::fs::read_to_string(input).map_err(io_err(input))?;
    let q = parse_qaplib(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    let lp = aj_linearize(&q).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(Output::to(out, write_mps(&lp, &model_name(input))))
}

fn dualize_cmd(input: &Path, out: &Option<PathBuf>) -> Result<Output, CliError> {
    let (lp, _) = load_mps(Some(input))?;
    let (dual, _) = dualize(&lp).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(Output::to(out, write_mps(&dual, &format!("{}_DUAL", model_name(input)))))
}

fn oracle(input: &Path) -> Result<Output, CliError> {
    let text = read_input(Some(input))?;
    let general = parse_mps(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    let (lp, map) = to_standard_form(&general).map_err(|e| CliError::Parse(e.to_string()))?;
    let res = solve_by_enumeration(&lp)?;
    let mut out = String::new();
    let status = match res.status {
        OracleStatus::Optimal => "optimal",
        OracleStatus::Infeasible => "infeasible",
        OracleStatus::Unbounded => "unbounded",
    };
    writeln!(out, "status     {status}").unwrap();
    if let (Some(f), Some(v)) = (res.optimum, &res.vertex) {
        writeln!(out, "objective  {}", map.original_objective(f)).unwrap();
        let x = map.recover(v);
        for (col, xj) in general.columns.iter().zip(&x).filter(|(_, v)| **v != 0.0) {
            writeln!(out, "{:<10} {xj}", col.name).unwrap();
        }
    }
    Ok(Output::text(out))
}

fn theorem1(seeds: u64, out: &Option<PathBuf>) -> Result<Output, CliError> {
    let mut text = String::from("seed  m  n  oracle        objective     residual    gap\n");
    let mut csv = String::from("seed,m,n,oracle,objective,residual_norm,gap,note\n");
    let (mut worst_res, mut worst_gap) = (0.0f64, f64::NEG_INFINITY);
    for seed in 0..seeds {
        let (m, n) = (2 + (seed % 3) as usize, 6 + (seed % 3) as usize);
        let (inst, f_star) = random_bounded_lp(seed, m, n, 5);
        match lab::run_exact_idiot(&inst.lp, &LabConfig::new(Mode::ExactIdiot), None) {
            Ok(t) => {
                let last = t.last();
                let (res, gap) = (last.residual_norm(), last.objective - f_star);
                worst_res = worst_res.max(res);
                worst_gap = worst_gap.max(gap);
                writeln!(text, "{seed:<5} {m:<2} {n:<2} {f_star:<13.6} {:<13.6} {res:<11.3e} {gap:.3e}", last.objective)
                    .unwrap();
                writeln!(csv, "{seed},{m},{n},{f_star:?},{:?},{res:?},{gap:?},", last.objective).unwrap();
            }
            Err(e) => {
                writeln!(text, "{seed:<5} {m:<2} {n:<2} error: {e}").unwrap();
                writeln!(csv, "{seed},{m},{n},{f_star:?},,,,{}", e.to_string().replace(',', ";")).unwrap();
            }
        }
    }
    writeln!(text, "max residual {worst_res:.3e}  max gap {worst_gap:.3e}").unwrap();
    let mut output = Output::text(text);
    if let Some(p) = out {
        output.files.push((p.clone(), csv.into_bytes()));
    }
    Ok(output)
}

fn modes(input: Option<&Path>, out_dir: &Path, max_outer: usize) -> Result<Output, CliError> {
    let lp = match input {
        Some(p) => load_mps(Some(p))?.0,
        None => StandardFormLP::from_dense(vec![1.0, 1.0], &[vec![1.0, 1.0]], vec![1.0]).expect("valid literal"),
    };
    if !out_dir.is_dir() {
        return Err(CliError::Usage(format!("{}: not a directory", out_dir.display())));
    }
    let mut output = Output::default();
    for mode in Mode::ALL {
        let mut cfg = LabConfig::new(mode);
        cfg.max_outer = max_outer;
        let t = lab::run(&lp, &cfg, None).map_err(|e| CliError::Usage(e.to_string()))?;
        let last = t.last();
        writeln!(
            output.stdout,
            "{:<22} objective {:<14.8} residual {:.3e}  |lambda| {:.3e}",
            mode.as_str(),
            last.objective,
            last.residual_norm(),
            t.final_lambda.iter().fold(0.0f64, |a, l| a.max(l.abs()))
        )
        .unwrap();
        let path = out_dir.join(format!("{}.csv", mode.as_str()));
        let mut csv = Vec::new();
        t.write_csv(&mut csv).map_err(io_err(&path))?;
        output.files.push((path, csv));
    }
    Ok(output)
}

fn qap_dims() -> Result<Output, CliError> {
    let mut text = String::from("n  rows  cols  closed_rows  closed_cols\n");
    for n in 2..=8 {
        let zero = vec![vec![0.0; n]; n];
        let q = QapInstance::new(zero.clone(), zero).map_err(|e| CliError::Parse(e.to_string()))?;
        let lp = aj_linearize(&q).map_err(|e| CliError::Parse(e.to_string()))?;
        let (r, c) = aj_dimensions(n);
        writeln!(text, "{n:<2} {:<5} {:<5} {r:<12} {c}", lp.n_rows(), lp.n_cols()).unwrap();
    }
    Ok(Output::text(text))
}

fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Qapgen { input, out } => qapgen(input, out),
        Command::Dualize { input, out } => dualize_cmd(input, out),
        Command::Oracle { input } => oracle(input),
        Command::Study { suite } => match suite {
            Study::Theorem1 { seeds, out } => theorem1(*seeds, out),
            Study::Modes { input, out_dir, max_outer } => modes(input.as_deref(), out_dir, *max_outer),
            Study::QapDims => qap_dims(),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli).and_then(Output::flush) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
