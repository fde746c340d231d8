//! `rabi`: ground-state energies and photon numbers of the quantum Rabi
//! model from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rabi_core::baselines::baseline;
use rabi_core::checks::{faulty_energy_explicit, CheckSuite, Evaluators};
use rabi_core::ed::{exact_ground, EdConfig, Parity, DEFAULT_N_FOCK};
use rabi_core::gvm::{energy_explicit, ground_state, LambdaMethod, PerturbationConfig};
use rabi_core::sweep::{
    error_summary, run_sweep, to_csv_string, to_json_string, FigureId, Method, Observable, SweepSpec, SweptParam,
    DEFAULT_STEPS,
};
use rabi_core::{ModelParams, RabiError};
use serde::Serialize;
use serde_json::json;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_UNCONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "rabi", version, about = "Quantum Rabi model ground state: variational, GRWA and exact diagonalization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variational ground state with second-order corrections.
    Gvm(GvmArgs),
    /// Generalized rotating-wave baseline.
    Grwa(PointArgs),
    /// Exact diagonalization in a truncated Fock space.
    Ed(EdArgs),
    /// Custom sweep over Ω or g.
    Sweep(SweepArgs),
    /// Dataset behind one of the canonical figures.
    Figure(FigureArgs),
    /// Run the acceptance checks.
    Check(CheckArgs),
}

#[derive(Args)]
struct PointArgs {
    /// Photon frequency ω.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    omega: f64,
    /// Atomic transition frequency Ω.
    #[arg(long, allow_negative_numbers = true)]
    atom: f64,
    /// Coupling strength g.
    #[arg(long, allow_negative_numbers = true)]
    g: f64,
    /// Read --atom and --g in units of --omega.
    #[arg(long)]
    units_of_omega: bool,
}

impl PointArgs {
    fn params(&self) -> Result<ModelParams, RabiError> {
        let s = if self.units_of_omega { self.omega } else { 1.0 };
        ModelParams::new(self.omega, self.atom * s, self.g * s).validate()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Closed-form λ and energy, no second-order sums.
    Explicit,
    /// Rooted λ with second-order sums.
    Full,
}

#[derive(Args)]
struct GvmArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    mode: Mode,
    /// Largest photon index in the perturbative sums.
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    term_tol: Option<f64>,
    /// Stationarity residual bound, in units of ω.
    #[arg(long)]
    root_tol: Option<f64>,
}

impl GvmArgs {
    fn config(&self) -> PerturbationConfig {
        let d = PerturbationConfig::default();
        PerturbationConfig {
            n_max: self.nmax.unwrap_or(d.n_max),
            term_tol: self.term_tol.unwrap_or(d.term_tol),
            root_tol: self.root_tol.unwrap_or(d.root_tol),
        }
    }
}

#[derive(Args)]
struct EdArgs {
    #[command(flatten)]
    point: PointArgs,
    #[command(flatten)]
    fock: FockArgs,
}

#[derive(Args)]
struct FockArgs {
    /// Fock-space truncation per parity chain.
    #[arg(long, env = "RABI_NFOCK", default_value_t = DEFAULT_N_FOCK)]
    nfock: usize,
}

impl FockArgs {
    fn config(&self) -> Result<EdConfig, RabiError> {
        EdConfig::with_n_fock(self.nfock).validate()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Swept {
    Atom,
    G,
}

#[derive(Args)]
struct SweepArgs {
    /// Parameter to sweep.
    #[arg(long, value_enum)]
    param: Swept,
    /// First grid value, in units of ω.
    #[arg(long, allow_negative_numbers = true)]
    start: f64,
    /// Last grid value, in units of ω.
    #[arg(long, allow_negative_numbers = true)]
    stop: f64,
    /// Value of the other parameter, in units of ω.
    #[arg(long, allow_negative_numbers = true)]
    fixed: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    omega: f64,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    /// Comma-separated subset of gvm, gvm_full, grwa, ed.
    #[arg(long, value_delimiter = ',', default_value = "gvm,gvm_full,grwa,ed")]
    methods: Vec<String>,
    /// Comma-separated subset of energy, mean_photon.
    #[arg(long, value_delimiter = ',', default_value = "energy")]
    observables: Vec<String>,
    #[command(flatten)]
    fock: FockArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FigureArgs {
    /// One of 1a, 1b, 2a, 2b, 3, 4, 4i.
    #[arg(long)]
    id: String,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    fock: FockArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CheckArgs {
    /// Only the exactly solvable anchors.
    #[arg(long)]
    quick: bool,
    /// Detune the closed-form energy to exercise the failure path.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

enum Failure {
    Usage(String),
    Model(RabiError),
    Io(String),
}

impl From<RabiError> for Failure {
    fn from(e: RabiError) -> Self {
        Failure::Model(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Model(RabiError::Domain(_)) => EXIT_USAGE,
            Failure::Model(_) => EXIT_NUMERICAL,
            Failure::Io(_) => EXIT_USAGE,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let body = match self {
            Failure::Usage(m) => json!({ "kind": "usage", "message": m }),
            Failure::Io(m) => json!({ "kind": "io", "message": m }),
            Failure::Model(e) => {
                let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
                match e {
                    RabiError::DegenerateDenominator { state, gap } => {
                        v["state"] = json!(state);
                        v["gap"] = json!(gap);
                    }
                    RabiError::MissingOracle { x } => v["x"] = json!(x),
                    _ => {}
                }
                v
            }
        };
        json!({ "error": body })
    }
}

// what a successful command hands back for writing
struct Output {
    data: String,
    target: Option<PathBuf>,
    exit: u8,
}

impl Output {
    fn stdout(data: String) -> Self {
        Self { data, target: None, exit: 0 }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output") + "\n"
}

#[derive(Serialize)]
struct WavefunctionEntry {
    state: String,
    branch: &'static str,
    n: usize,
    coefficient: f64,
}

#[derive(Serialize)]
struct GvmReport {
    lambda: f64,
    e0_order0: f64,
    e0_order2: f64,
    e0_total: f64,
    mean_photon_full: f64,
    mean_photon_approx: f64,
    stationarity_residual: f64,
    mode: &'static str,
    /// First-order corrections to |−, 0⟩ (coefficient 1), unnormalized.
    wavefunction: Vec<WavefunctionEntry>,
}

fn cmd_gvm(args: &GvmArgs) -> Result<Output, Failure> {
    let params = args.point.params()?;
    let cfg = args.config().validate()?;
    let report = match args.mode {
        Mode::Full => {
            let gs = ground_state(&params, &cfg, LambdaMethod::ExactRoot)?;
            gvm_report(&gs, gs.solution.e0_unperturbed, gs.e0_order2, gs.e0_total, "full")
        }
        Mode::Explicit => {
            let gs = ground_state(&params, &cfg, LambdaMethod::ClosedForm)?;
            let e = energy_explicit(&params);
            gvm_report(&gs, e, 0.0, e, "explicit")
        }
    };
    Ok(Output::stdout(pretty(&report)))
}

fn gvm_report(gs: &rabi_core::gvm::GroundStateResult, e0: f64, e2: f64, total: f64, mode: &'static str) -> GvmReport {
    let wavefunction = gs
        .wavefunction
        .corrections()
        .map(|(label, c)| WavefunctionEntry {
            state: label.to_string(),
            branch: if label.branch == rabi_core::Branch::Plus { "plus" } else { "minus" },
            n: label.photon_n,
            coefficient: *c,
        })
        .collect();
    GvmReport {
        lambda: gs.solution.lam,
        e0_order0: e0,
        e0_order2: e2,
        e0_total: total,
        mean_photon_full: gs.mean_photon_full,
        mean_photon_approx: gs.mean_photon_approx,
        stationarity_residual: gs.solution.stationarity_residual,
        mode,
        wavefunction,
    }
}

fn cmd_grwa(args: &PointArgs) -> Result<Output, Failure> {
    let b = baseline(&args.params()?);
    Ok(Output::stdout(pretty(&json!({ "energy": b.e0_grwa, "mean_photon": b.mean_photon_grwa }))))
}

#[derive(Serialize)]
struct EdReport {
    energy: f64,
    mean_photon: f64,
    parity: Parity,
    converged: bool,
    n_fock: usize,
}

fn cmd_ed(args: &EdArgs) -> Result<Output, Failure> {
    let r = exact_ground(&args.point.params()?, &args.fock.config()?)?;
    let report =
        EdReport { energy: r.energy, mean_photon: r.mean_photon, parity: r.parity, converged: r.converged, n_fock: r.n_fock };
    let mut out = Output::stdout(pretty(&report));
    if !r.converged {
        out.exit = EXIT_UNCONVERGED;
    }
    Ok(out)
}

fn render(spec: &SweepSpec, points: &[rabi_core::sweep::CurvePoint], output: &OutputArgs) -> Result<Output, Failure> {
    let data = match output.format {
        Format::Csv => to_csv_string(spec, points)?,
        Format::Json => to_json_string(points)? + "\n",
    };
    Ok(Output { data, target: output.out.clone(), exit: 0 })
}

fn cmd_sweep(args: &SweepArgs) -> Result<Output, Failure> {
    let methods = args.methods.iter().map(|m| Method::from_str(m.trim())).collect::<Result<Vec<_>, _>>()?;
    let observables = args.observables.iter().map(|o| Observable::from_str(o.trim())).collect::<Result<Vec<_>, _>>()?;
    let spec = SweepSpec {
        swept: match args.param {
            Swept::Atom => SweptParam::AtomFreq,
            Swept::G => SweptParam::Coupling,
        },
        start: args.start,
        stop: args.stop,
        steps: args.steps,
        omega: args.omega,
        fixed: args.fixed,
        methods,
        observables,
    };
    let points = run_sweep(&spec, &PerturbationConfig::default(), &args.fock.config()?)?;
    render(&spec, &points, &args.output)
}

fn cmd_figure(args: &FigureArgs) -> Result<Output, Failure> {
    let id = FigureId::from_str(&args.id)?;
    let spec = id.spec(args.steps.unwrap_or(DEFAULT_STEPS));
    let points = run_sweep(&spec, &PerturbationConfig::default(), &args.fock.config()?)?;
    let observable = spec.observables[0];
    let mut summary = format!("figure {}: {} points", id.name(), points.len());
    for &m in spec.methods.iter().filter(|m| **m != Method::Ed) {
        let s = error_summary(&points, m, observable)?;
        summary.push_str(&format!(", max|{m}-ed| = {:.3e} at x = {}", s.max_abs, s.argmax_x));
    }
    let out = render(&spec, &points, &args.output)?;
    eprintln!("{summary}");
    Ok(out)
}

fn cmd_check(args: &CheckArgs) -> Result<Output, Failure> {
    let suite = if args.inject_fault {
        CheckSuite::with_evaluators(Evaluators { energy_explicit: faulty_energy_explicit })
    } else {
        CheckSuite::default()
    };
    let outcomes = if args.quick { suite.run_quick()? } else { suite.run_all()? };
    let mut report = String::new();
    for o in &outcomes {
        report.push_str(&format!("{o}\n"));
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    report.push_str(&format!("{passed}/{} checks passed\n", outcomes.len()));
    let mut out = Output::stdout(report);
    if passed != outcomes.len() {
        out.exit = EXIT_CHECK_FAILED;
    }
    Ok(out)
}

fn write_output(out: &Output) -> Result<(), Failure> {
    match &out.target {
        Some(path) => fs::write(path, &out.data).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(out.data.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.to_json());
    ExitCode::from(f.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(Failure::Usage(e.render().to_string().trim_end().to_string())),
    };
    let result = match &cli.command {
        Command::Gvm(a) => cmd_gvm(a),
        Command::Grwa(a) => cmd_grwa(a),
        Command::Ed(a) => cmd_ed(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Check(a) => cmd_check(a),
    };
    match result.and_then(|out| write_output(&out).map(|_| out.exit)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => fail(f),
    }
}
