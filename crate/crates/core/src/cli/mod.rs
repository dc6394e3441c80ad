//! Command-line front end. Every subcommand writes CSV or JSON either to
//! stdout or, with `--output`, atomically to a file.
//!
//! Exit codes: 0 on success, 2 on any validation failure, 3 on I/O failure.

mod input;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregate::{
    fit_error_slope, run_scaling_experiment, ExperimentConfig, ValueDistribution,
};
use crate::analysis::bounds::{self, LowerBoundConstants};
use crate::analysis::compare::{self, ComparisonKind};
use crate::analysis::optimal::{self, MIN_ETA};
use crate::analysis::{
    crossover_gap, crossover_root, lower_bound_curves, min_variance_numeric,
    optimal_eta_closed_form, scan_eta_feasibility, variance_analytic, worst_case_variance,
    write_curve_csv, write_feasibility_csv, CurvePoint,
};
use crate::domain::{
    derive_ptt_params, preset_params, rescale_from_unit, rescale_to_unit, DomainBounds, PresetName,
    PrivacyBudget, PttFamily, PttParams, UnitValue,
};
use crate::fmt::real;
use crate::mechanisms::{
    default_audit_grids, ldp_ratio_audit, multidim_perturb, MechanismKind, RandomSource,
};

pub use input::{read_table, InputTable};

/// Failure of a command, classified by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ptt-ldp",
    version,
    about = "Piecewise-transformation LDP mechanisms and their analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perturb input values with a mechanism.
    Perturb(PerturbArgs),
    /// Derive and print PTT parameters as JSON.
    Params(ParamsArgs),
    /// Closed-form variances, single point or swept over eta or epsilon.
    Variance(VarianceArgs),
    /// Budget at which the Duchi and Laplace variances cross.
    Crossover(CrossoverArgs),
    /// Variance-optimal eta: closed form and numeric minimizer.
    Optimize(OptimizeArgs),
    /// Sign scan of the feasibility polynomials over eta.
    Feasibility(FeasibilityArgs),
    /// Small-budget lower-bound curves.
    LowerBound(LowerBoundArgs),
    /// Auxiliary comparison functions, or PTT-vs-baseline variance gaps.
    Compare(CompareArgs),
    /// Error-scaling experiment.
    Simulate(SimulateArgs),
    /// Density-ratio audit of the LDP guarantee.
    Audit(AuditArgs),
    /// Lower-bound constants as JSON.
    Constants(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismChoice {
    Laplace,
    Duchi,
    Ptt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    Eta,
    Epsilon,
}

#[derive(Debug, Clone, Args)]
pub struct MechanismArgs {
    #[arg(long, value_enum, default_value_t = MechanismChoice::Ptt)]
    pub mechanism: MechanismChoice,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// type-i or type-ii.
    #[arg(long)]
    pub family: Option<PttFamily>,
    /// pm, theorem9 or optimal.
    #[arg(long)]
    pub preset: Option<PresetName>,
    /// In-band mass for the optimal preset.
    #[arg(long)]
    pub q: Option<f64>,
    /// PTT parameters as written by `params`.
    #[arg(long)]
    pub params_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write to this file (atomically) instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Sweep grid: lower end, upper end, point count.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "COUNT"], allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub mech: MechanismArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tuple dimension; values per row.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Input file; stdin when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column to perturb when the input has a header (d = 1).
    #[arg(long)]
    pub column: Option<String>,
    /// Original attribute range; inputs are rescaled to [-1, 1].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub bounds: Option<Vec<f64>>,
    /// Map outputs back to the original range given by --bounds.
    #[arg(long)]
    pub rescale_output: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub mech: MechanismArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub mech: MechanismArgs,
    /// Input value A in [-1, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub attr: Option<f64>,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepAxis>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CrossoverArgs {
    /// Input values A (comma separated).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0",
        allow_negative_numbers = true
    )]
    pub attr: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.01, 10.0])]
    pub bracket: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value = "type-i")]
    pub family: PttFamily,
    /// Input value for the numeric minimizer.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub attr: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FeasibilityArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LowerBoundArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// s1, p1, p2, i1, f1, f2, f3, f4 or eta-cubic; without it, PTT is
    /// compared with Laplace and Duchi across epsilon.
    #[arg(long)]
    pub kind: Option<ComparisonKind>,
    /// Band half-width for s1 and p1.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub family: Option<PttFamily>,
    /// Pointwise gaps at this input instead of worst-case gaps.
    #[arg(long, allow_negative_numbers = true)]
    pub attr: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub mech: MechanismArgs,
    /// Population sizes (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// uniform, constant:<c> or two-point:<c>.
    #[arg(long, default_value = "uniform")]
    pub distribution: ValueDistribution,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the log-log slope fit as JSON to this file.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub mech: MechanismArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Outcome of [`run_command`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub exit_code: i32,
    /// Files written.
    pub outputs: Vec<PathBuf>,
    /// Fully resolved command, including defaults.
    pub config: String,
    pub error: Option<String>,
}

/// Parses `args` (program name first) and runs the command, reading input
/// from `stdin` and writing non-file output to `stdout`.
pub fn run_command<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write) -> RunReport
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                return RunReport {
                    exit_code: 2,
                    outputs: Vec::new(),
                    config: String::new(),
                    error: Some(rendered),
                };
            }
            let code = match stdout.write_all(rendered.as_bytes()) {
                Ok(()) => 0,
                Err(_) => 3,
            };
            return RunReport {
                exit_code: code,
                outputs: Vec::new(),
                config: String::new(),
                error: None,
            };
        }
    };
    let config = format!("{:?}", cli.command);
    let mut ctx = Context {
        stdin,
        stdout,
        outputs: Vec::new(),
    };
    let result = dispatch(&cli.command, &mut ctx);
    let outputs = ctx.outputs;
    match result {
        Ok(()) => RunReport {
            exit_code: 0,
            outputs,
            config,
            error: None,
        },
        Err(e) => RunReport {
            exit_code: e.exit_code(),
            outputs,
            config,
            error: Some(e.message().to_string()),
        },
    }
}

struct Context<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    outputs: Vec<PathBuf>,
}

impl Context<'_> {
    fn emit(&mut self, out: &OutputArgs, bytes: &[u8]) -> CliResult<()> {
        match &out.output {
            Some(path) => self.write_file(path, bytes),
            None => self
                .stdout
                .write_all(bytes)
                .and_then(|_| self.stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}"))),
        }
    }

    /// Writes to a sibling temporary file and renames it into place.
    fn write_file(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        let name = path
            .file_name()
            .ok_or_else(|| invalid(format!("output path '{}' has no file name", path.display())))?;
        let mut tmp_name = std::ffi::OsString::from(".");
        tmp_name.push(name);
        tmp_name.push(format!(".{}.tmp", std::process::id()));
        let tmp = path.with_file_name(tmp_name);
        let write = || -> io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, path)
        };
        if let Err(e) = write() {
            let _ = fs::remove_file(&tmp);
            return Err(io_err(path, e));
        }
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn read_input(&mut self, path: Option<&Path>) -> CliResult<String> {
        match path {
            Some(p) => fs::read_to_string(p).map_err(|e| io_err(p, e)),
            None => {
                let mut s = String::new();
                self.stdin
                    .read_to_string(&mut s)
                    .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
                Ok(s)
            }
        }
    }
}

fn dispatch(command: &Command, ctx: &mut Context<'_>) -> CliResult<()> {
    match command {
        Command::Perturb(a) => perturb(a, ctx),
        Command::Params(a) => params(a, ctx),
        Command::Variance(a) => variance(a, ctx),
        Command::Crossover(a) => crossover(a, ctx),
        Command::Optimize(a) => optimize(a, ctx),
        Command::Feasibility(a) => feasibility(a, ctx),
        Command::LowerBound(a) => lower_bound(a, ctx),
        Command::Compare(a) => compare_cmd(a, ctx),
        Command::Simulate(a) => simulate(a, ctx),
        Command::Audit(a) => audit(a, ctx),
        Command::Constants(out) => {
            let json = LowerBoundConstants::get().to_json() + "\n";
            ctx.emit(out, json.as_bytes())
        }
    }
}

fn budget(epsilon: Option<f64>) -> CliResult<PrivacyBudget> {
    let e = epsilon.ok_or_else(|| invalid("--epsilon is required"))?;
    Ok(PrivacyBudget::new(e)?)
}

impl MechanismArgs {
    /// Builds the mechanism, rejecting flags that do not apply to it.
    pub fn resolve(&self) -> CliResult<MechanismKind> {
        if self.mechanism != MechanismChoice::Ptt {
            for (given, flag) in [
                (self.eta.is_some(), "--eta"),
                (self.family.is_some(), "--family"),
                (self.preset.is_some(), "--preset"),
                (self.q.is_some(), "--q"),
                (self.params_file.is_some(), "--params-file"),
            ] {
                if given {
                    return Err(invalid(format!("{flag} applies only to --mechanism ptt")));
                }
            }
            let eps = budget(self.epsilon)?;
            return Ok(match self.mechanism {
                MechanismChoice::Laplace => MechanismKind::laplace(eps),
                _ => MechanismKind::duchi(eps),
            });
        }
        Ok(MechanismKind::ptt(self.resolve_ptt()?)?)
    }

    pub fn resolve_ptt(&self) -> CliResult<PttParams> {
        if let Some(path) = &self.params_file {
            if self.eta.is_some()
                || self.preset.is_some()
                || self.family.is_some()
                || self.q.is_some()
            {
                return Err(invalid(
                    "--params-file cannot be combined with --eta, --family, --preset or --q",
                ));
            }
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let params = PttParams::from_json(&text)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            if let Some(e) = self.epsilon {
                if (e - params.epsilon).abs() > 1e-12 * e.abs() {
                    return Err(invalid(format!(
                        "--epsilon {e} disagrees with epsilon {} in {}",
                        params.epsilon,
                        path.display()
                    )));
                }
            }
            return Ok(params);
        }
        let eps = budget(self.epsilon)?;
        if let Some(preset) = self.preset {
            if self.eta.is_some() {
                return Err(invalid("--eta cannot be combined with --preset"));
            }
            if self.family.is_some_and(|f| f != PttFamily::TypeI) {
                return Err(invalid("presets are Type-I; drop --family type-ii"));
            }
            if self.q.is_some() && preset != PresetName::ClosedFormOptimal {
                return Err(invalid("--q applies only to --preset optimal"));
            }
            return Ok(preset_params(preset, eps, self.q)?);
        }
        if self.q.is_some() {
            return Err(invalid("--q applies only to --preset optimal"));
        }
        let eta = self
            .eta
            .ok_or_else(|| invalid("--mechanism ptt needs --eta, --preset or --params-file"))?;
        Ok(derive_ptt_params(
            eps,
            eta,
            self.family.unwrap_or(PttFamily::TypeI),
        )?)
    }
}

fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    crate::mechanisms::linspace(lo, hi, count)
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    linear_grid(a, b, count).into_iter().map(f64::exp).collect()
}

/// 50 log-spaced budgets on `[0.01, 10]`.
pub fn default_epsilon_grid() -> Vec<f64> {
    log_grid(0.01, 10.0, 50)
}

/// 200 evenly spaced ratios on `(1, 20]`.
pub fn default_eta_grid() -> Vec<f64> {
    (1..=200).map(|i| 1.0 + 19.0 * i as f64 / 200.0).collect()
}

impl GridArgs {
    fn parts(&self) -> CliResult<Option<(f64, f64, usize)>> {
        let Some(g) = &self.grid else { return Ok(None) };
        let (lo, hi, count) = (g[0], g[1], g[2]);
        if !(count >= 2.0 && count.fract() == 0.0 && count <= 1e7) {
            return Err(invalid(format!(
                "--grid count '{count}' must be an integer >= 2"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid(format!("--grid needs lo < hi, got {lo} {hi}")));
        }
        Ok(Some((lo, hi, count as usize)))
    }

    fn epsilon(&self) -> CliResult<Vec<f64>> {
        match self.parts()? {
            Some((lo, hi, n)) if lo > 0.0 => Ok(log_grid(lo, hi, n)),
            Some((lo, ..)) => Err(invalid(format!("epsilon grid needs lo > 0, got {lo}"))),
            None => Ok(default_epsilon_grid()),
        }
    }

    fn eta(&self) -> CliResult<Vec<f64>> {
        match self.parts()? {
            Some((lo, hi, n)) if lo >= MIN_ETA => Ok(linear_grid(lo, hi, n)),
            Some((lo, ..)) => Err(invalid(format!("eta grid needs lo > 1, got {lo}"))),
            None => Ok(default_eta_grid()),
        }
    }

    fn linear_or(&self, default: Vec<f64>) -> CliResult<Vec<f64>> {
        Ok(match self.parts()? {
            Some((lo, hi, n)) => linear_grid(lo, hi, n),
            None => default,
        })
    }
}

fn unit(x: f64, what: &str) -> CliResult<UnitValue> {
    UnitValue::new(x).map_err(|e| invalid(format!("{what}: {e}")))
}

fn curves_csv(points: &[CurvePoint]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, points).expect("writing to memory");
    buf
}

fn json_opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_else(|| "null".into())
}

fn perturb(args: &PerturbArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let mech = args.mech.resolve()?;
    if args.d == 0 {
        return Err(invalid("--d must be positive"));
    }
    let bounds = match &args.bounds {
        Some(b) => Some(DomainBounds::new(b[0], b[1])?),
        None => None,
    };
    if args.rescale_output && bounds.is_none() {
        return Err(invalid("--rescale-output needs --bounds"));
    }
    let text = ctx.read_input(args.input.as_deref())?;
    let table = read_table(&text)?;
    let columns: Vec<usize> = if args.d == 1 {
        match &args.column {
            Some(name) => vec![table.column_index(name)?],
            None => vec![0],
        }
    } else {
        if args.column.is_some() {
            return Err(invalid("--column applies only to d = 1"));
        }
        if table.width() != args.d {
            return Err(invalid(format!(
                "--d {} but the input has {} columns",
                args.d,
                table.width()
            )));
        }
        (0..args.d).collect()
    };
    // Validate every row before drawing any randomness.
    let mut inputs = Vec::with_capacity(table.rows.len());
    for (line, fields) in &table.rows {
        let tuple = columns
            .iter()
            .map(|&c| {
                let raw = fields[c];
                let mapped = match bounds {
                    Some(b) => rescale_to_unit(raw, b),
                    None => UnitValue::new(raw),
                };
                mapped.map_err(|e| invalid(format!("row {line}: value '{}': {e}", real(raw))))
            })
            .collect::<CliResult<Vec<UnitValue>>>()?;
        inputs.push((fields[columns[0]], tuple));
    }
    let restore = |y: f64| match (args.rescale_output, bounds) {
        (true, Some(b)) => rescale_from_unit(y, b),
        _ => y,
    };
    let mut rng = RandomSource::new(args.seed);
    let mut out = String::new();
    if args.d == 1 {
        out.push_str("input,output\n");
        for (raw, tuple) in &inputs {
            let y = mech.perturb(tuple[0], &mut rng)?;
            out.push_str(&format!("{},{}\n", real(*raw), real(restore(y))));
        }
    } else {
        let head: Vec<String> = (1..=args.d).map(|j| format!("out_{j}")).collect();
        out.push_str(&head.join(","));
        out.push_str(",chosen_index\n");
        for (_, tuple) in &inputs {
            let report = multidim_perturb(tuple, &mech, &mut rng)?;
            for v in &report.values {
                out.push_str(&real(restore(*v)));
                out.push(',');
            }
            out.push_str(&format!("{}\n", report.chosen_index));
        }
    }
    ctx.emit(&args.out, out.as_bytes())
}

fn params(args: &ParamsArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    if args.mech.mechanism != MechanismChoice::Ptt {
        return Err(invalid("params applies only to --mechanism ptt"));
    }
    let p = args.mech.resolve_ptt()?;
    ctx.emit(&args.out, (p.to_json() + "\n").as_bytes())
}

fn variance(args: &VarianceArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let attr = args.attr.map(|a| unit(a, "--attr")).transpose()?;
    let Some(axis) = args.sweep else {
        if args.grid.grid.is_some() {
            return Err(invalid("--grid needs --sweep"));
        }
        let mech = args.mech.resolve()?;
        let json = format!(
            "{{\"mechanism\":\"{}\",\"epsilon\":{},\"attr\":{},\"variance\":{},\"worst_case\":{}}}\n",
            mech.label(),
            real(mech.epsilon().value()),
            json_opt(attr.map(UnitValue::value)),
            json_opt(attr.map(|x| variance_analytic(&mech, x))),
            real(worst_case_variance(&mech))
        );
        return ctx.emit(&args.out, json.as_bytes());
    };
    let x = attr.unwrap_or_default();
    let family = args.mech.family.unwrap_or(PttFamily::TypeI);
    let mut points = Vec::new();
    match axis {
        SweepAxis::Eta => {
            let eps = budget(args.mech.epsilon)?;
            if let Some(q) = args.mech.q {
                if !(0.5..1.0).contains(&q) {
                    return Err(invalid(format!("--q {q} outside [1/2, 1)")));
                }
            }
            let series = format!("{}-normalized", family.label());
            for eta in args.grid.eta()? {
                if eta <= family.max_eta(eps) {
                    let v = optimal::normalized_variance(eps, eta, x, family)?;
                    points.push(CurvePoint::new(eta, v, series.clone()));
                }
                if let Some(q) = args.mech.q {
                    let v = optimal::fixed_q_variance(eps, q, eta, x.value());
                    points.push(CurvePoint::new(eta, v, "type-i-fixed-q"));
                }
                points.push(CurvePoint::new(
                    eta,
                    optimal::eta_cubic(eps, eta),
                    "eta-cubic",
                ));
            }
        }
        SweepAxis::Epsilon => {
            for e in args.grid.epsilon()? {
                let eps = PrivacyBudget::new(e)?;
                points.push(CurvePoint::new(
                    e,
                    variance_analytic(&MechanismKind::laplace(eps), x),
                    "laplace",
                ));
                points.push(CurvePoint::new(
                    e,
                    variance_analytic(&MechanismKind::duchi(eps), x),
                    "duchi",
                ));
                if let Some(eta) = args.mech.eta {
                    if eta > 1.0 && eta <= family.max_eta(eps) {
                        let v = optimal::normalized_variance(eps, eta, x, family)?;
                        points.push(CurvePoint::new(e, v, family.label()));
                    }
                }
                let best = min_variance_numeric(eps, x, PttFamily::TypeI)?;
                points.push(CurvePoint::new(e, best.var_star, "type-i-optimal"));
            }
        }
    }
    ctx.emit(&args.out, &curves_csv(&points))
}

fn crossover(args: &CrossoverArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let bracket = (args.bracket[0], args.bracket[1]);
    let attrs = args
        .attr
        .iter()
        .map(|&a| unit(a, "--attr"))
        .collect::<CliResult<Vec<_>>>()?;
    let grid = args.grid.epsilon()?;
    let mut points = Vec::new();
    for x in &attrs {
        if let Some(root) = crossover_root(*x, bracket)? {
            points.push(CurvePoint::new(x.value(), root, "root"));
        }
    }
    for x in &attrs {
        let series = format!("gap@{}", real(x.value()));
        for &e in &grid {
            points.push(CurvePoint::new(
                e,
                crossover_gap(e, x.value()),
                series.clone(),
            ));
        }
    }
    ctx.emit(&args.out, &curves_csv(&points))
}

fn optimize(args: &OptimizeArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let eps = PrivacyBudget::new(args.epsilon)?;
    let x = unit(args.attr, "--attr")?;
    let closed = optimal_eta_closed_form(eps, args.q)?;
    let numeric = min_variance_numeric(eps, x, args.family)?;
    let json = format!(
        "{{\"epsilon\":{},\"eta0\":{},\"residual\":{},\"q\":{},\"a\":{},\"family\":\"{}\",\"attr\":{},\"eta_star\":{},\"var_star\":{}}}\n",
        real(eps.value()),
        real(closed.eta0),
        real(closed.residual),
        json_opt(args.q),
        json_opt(closed.a),
        args.family.label(),
        real(x.value()),
        real(numeric.eta_star),
        real(numeric.var_star)
    );
    ctx.emit(&args.out, json.as_bytes())
}

fn feasibility(args: &FeasibilityArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let reports = scan_eta_feasibility(&args.grid.eta()?)?;
    let mut buf = Vec::new();
    write_feasibility_csv(&mut buf, &reports).expect("writing to memory");
    ctx.emit(&args.out, &buf)
}

fn lower_bound(args: &LowerBoundArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let worst = |eps: PrivacyBudget, eta: f64| -> CliResult<Option<f64>> {
        if eta > PttFamily::TypeI.max_eta(eps) {
            return Ok(None);
        }
        let p = derive_ptt_params(eps, eta, PttFamily::TypeI)?;
        Ok(Some(worst_case_variance(&MechanismKind::Ptt(p))))
    };
    let mut points = Vec::new();
    match (args.epsilon, args.eta) {
        (Some(e), Some(eta)) => {
            if args.grid.grid.is_some() {
                return Err(invalid(
                    "--grid is a sweep; give only one of --epsilon and --eta",
                ));
            }
            let eps = PrivacyBudget::new(e)?;
            let c = lower_bound_curves(eps, eta)?;
            let json = format!(
                "{{\"epsilon\":{},\"eta\":{},\"g1\":{},\"h1\":{},\"h2\":{},\"psi1\":{},\"psi2\":{},\"worst_case\":{}}}\n",
                real(e),
                real(eta),
                real(c.g1),
                real(c.h1),
                real(c.h2),
                real(c.psi1),
                real(c.psi2),
                json_opt(worst(eps, eta)?)
            );
            return ctx.emit(&args.out, json.as_bytes());
        }
        (None, Some(eta)) => {
            for e in args.grid.epsilon()? {
                let eps = PrivacyBudget::new(e)?;
                let c = lower_bound_curves(eps, eta)?;
                points.push(CurvePoint::new(e, c.g1, "g1"));
                points.push(CurvePoint::new(e, c.h1, "h1"));
                points.push(CurvePoint::new(e, c.h2, "h2"));
                if let Some(w) = worst(eps, eta)? {
                    points.push(CurvePoint::new(e, w, "worst-case"));
                }
            }
        }
        (Some(e), None) => {
            let eps = PrivacyBudget::new(e)?;
            for eta in args.grid.eta()? {
                let c = lower_bound_curves(eps, eta)?;
                points.push(CurvePoint::new(eta, c.g1, "g1"));
                points.push(CurvePoint::new(eta, c.h1, "h1"));
                points.push(CurvePoint::new(eta, c.h2, "h2"));
                if let Some(w) = worst(eps, eta)? {
                    points.push(CurvePoint::new(eta, w, "worst-case"));
                }
            }
        }
        (None, None) => {
            for eta in args.grid.eta()? {
                points.push(CurvePoint::new(eta, bounds::psi1(eta), "psi1"));
                points.push(CurvePoint::new(eta, bounds::psi2(eta), "psi2"));
            }
        }
    }
    ctx.emit(&args.out, &curves_csv(&points))
}

fn compare_cmd(args: &CompareArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let mut points = Vec::new();
    if let Some(kind) = args.kind {
        let eps = args.epsilon.map(PrivacyBudget::new).transpose()?;
        let grid = if kind.in_t() {
            args.grid.linear_or(linear_grid(0.0, 10.0, 201))?
        } else {
            args.grid.eta()?
        };
        for x in grid {
            let y = compare::comparison_polynomial(kind, x, args.a, args.eta, eps)?;
            points.push(CurvePoint::new(x, y, kind.label()));
        }
        return ctx.emit(&args.out, &curves_csv(&points));
    }
    if args.a.is_some() {
        return Err(invalid("--a applies only with --kind s1 or p1"));
    }
    let eta = args
        .eta
        .ok_or_else(|| invalid("compare needs --kind or --eta"))?;
    let family = args.family.unwrap_or(PttFamily::TypeI);
    let attr = args.attr.map(|a| unit(a, "--attr")).transpose()?;
    let grid = match args.epsilon {
        Some(e) => vec![e],
        None => args.grid.epsilon()?,
    };
    for e in grid {
        let eps = PrivacyBudget::new(e)?;
        if eta > family.max_eta(eps) {
            continue;
        }
        let ptt = MechanismKind::ptt(derive_ptt_params(eps, eta, family)?)?;
        let lap = compare::noisy_variance_gaps(&ptt, &MechanismKind::laplace(eps), attr)?;
        let duchi = compare::noisy_variance_gaps(&ptt, &MechanismKind::duchi(eps), attr)?;
        points.push(CurvePoint::new(e, lap, "vs-laplace"));
        points.push(CurvePoint::new(e, duchi, "vs-duchi"));
    }
    ctx.emit(&args.out, &curves_csv(&points))
}

fn simulate(args: &SimulateArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let mechanism = args.mech.resolve()?;
    let config = ExperimentConfig {
        ns: args.n.clone(),
        epsilon: mechanism.epsilon(),
        d: args.d,
        mechanism,
        trials: args.trials,
        beta: args.beta,
        distribution: args.distribution,
        seed: args.seed,
    };
    config.validate()?;
    let fit_ready = {
        let mut ns = args.n.clone();
        ns.sort_unstable();
        ns.dedup();
        ns.len() >= 3
    };
    if args.fit.is_some() && !fit_ready {
        return Err(invalid("--fit needs at least 3 distinct --n values"));
    }
    let table = run_scaling_experiment(&config)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf).expect("writing to memory");
    if let Some(path) = &args.fit {
        let fit = fit_error_slope(&table)?;
        ctx.write_file(path, (fit.to_json() + "\n").as_bytes())?;
    }
    ctx.emit(&args.out, &buf)
}

fn audit(args: &AuditArgs, ctx: &mut Context<'_>) -> CliResult<()> {
    let mech = args.mech.resolve()?;
    let (inputs, outputs) = default_audit_grids(&mech);
    let report = ldp_ratio_audit(&mech, &inputs, &outputs)?;
    let eps = mech.epsilon();
    let (xi, xj, y) = report.witness;
    let json = format!(
        "{{\"mechanism\":\"{}\",\"epsilon\":{},\"max_ratio\":{},\"bound\":{},\"within\":{},\"witness\":{{\"x\":{},\"x_prime\":{},\"y\":{}}}}}\n",
        mech.label(),
        real(eps.value()),
        real(report.max_ratio),
        real(eps.exp()),
        report.within(eps, 1e-9),
        real(xi),
        real(xj),
        real(y)
    );
    ctx.emit(&args.out, json.as_bytes())
}
