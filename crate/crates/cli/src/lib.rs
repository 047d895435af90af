//! `svv`: operator-valued norms, conditional Rényi entropies, verification
//! suites and spectral factorization from the command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or input error,
//! 3 numerical failure.

pub mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use svv_core::entropy::{
    coherent_info_alpha, cond_renyi_entropy_with, sandwiched_divergence, w_alpha_with,
    CoherentOptions, RenyiOrder,
};
use svv_core::linalg::{BipartiteOp, CMat, Channel, DensityMatrix, HermMat, MatrixFile};
use svv_core::schatten::{parse_order, schatten_interp_check, SchattenOrder};
use svv_core::specfact::{spectral_factorize, trig_from_json};
use svv_core::vvnorm::{
    pq_norm_hermitian_upper, pq_norm_inf_positive, pq_norm_sup_positive, BoundKind, PQQuery,
    PQResult,
};
use svv_core::Error;
use svv_verify::checks::{decoupling_bound, decoupling_estimate};
use svv_verify::{parse_suite, run_checks, Report, Row};

use crate::config::{load_config, Env, Overrides, ProcessEnv, Settings};
use crate::output::{num, Envelope};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_)
            | Error::NotHermitian { .. }
            | Error::NotPositive { .. }
            | Error::NotDensity(_)
            | Error::NonFinite
            | Error::InvalidOrder(_)
            | Error::InvalidArgument(_)
            | Error::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "svv",
    version,
    about = "Operator-valued Schatten norms, conditional Renyi entropies and spectral factorization"
)]
pub struct Cli {
    /// Print the machine-readable JSON envelope instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Report entropies in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed (overrides SVV_SEED and the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (overrides SVV_THREADS); never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Check tolerance; optimizers run at a tenth of it.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the primary output to FILE.
    #[arg(long, short, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// (p,q)-norm of a bipartite operator.
    Norm(NormArgs),
    /// Conditional Renyi entropy H_α(X|Y) or the correlation measure W_α.
    Entropy(EntropyArgs),
    /// Sandwiched Renyi divergence D_α(ρ‖σ).
    Divergence(DivergenceArgs),
    /// Renyi coherent information of a channel.
    Coherent(CoherentArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Monte-Carlo decoupling estimate against its bound.
    Decouple(DecoupleArgs),
    /// Spectral factorization of a matrix trigonometric polynomial.
    Specfact(SpecfactArgs),
    /// Schatten interpolation inequality for one matrix.
    Interp(InterpArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Form {
    Inf,
    Sup,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Orders "p,q" with p ≤ q, e.g. "1,2" or "1,inf".
    #[arg(long, value_parser = parse_pair)]
    pub pq: (SchattenOrder, SchattenOrder),
    /// Matrix file; `dims` gives the factor sizes (first factor is optimized over).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// inf: ‖m‖_(p,q); sup: ‖m‖_(q,p).
    #[arg(long, value_enum, default_value = "inf")]
    pub form: Form,
    #[arg(long, value_parser = parse_dims)]
    pub dims: Option<[usize; 2]>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Measure {
    H,
    W,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long, value_parser = parse_renyi)]
    pub alpha: RenyiOrder,
    /// State on Y ⊗ X (first factor conditions).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "h")]
    pub measure: Measure,
    #[arg(long, value_parser = parse_dims)]
    pub dims: Option<[usize; 2]>,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long, value_parser = parse_renyi)]
    pub alpha: RenyiOrder,
    #[arg(long, value_name = "FILE")]
    pub rho: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub sigma: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoherentArgs {
    #[arg(long, value_parser = parse_renyi)]
    pub alpha: RenyiOrder,
    /// JSON list of Kraus matrices, or {"kraus": [...]}.
    #[arg(long, value_name = "FILE")]
    pub kraus: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1500)]
    pub max_evals: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// "all" or a comma-separated list of checks.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Format of --out; defaults to the file extension, else CSV.
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Args)]
pub struct DecoupleArgs {
    /// State on Y ⊗ X; the projection acts on X.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Kept dimension d_X0.
    #[arg(long)]
    pub keep: usize,
    /// Orders in [1, 2], comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_renyi, default_value = "1,1.5,2")]
    pub alpha: Vec<RenyiOrder>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_parser = parse_dims)]
    pub dims: Option<[usize; 2]>,
}

#[derive(Debug, Args)]
pub struct SpecfactArgs {
    /// Trigonometric polynomial JSON {"d","N","coeffs":{"-N".."N"}}.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Residual tolerance on the grid.
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_schatten)]
    pub p0: SchattenOrder,
    #[arg(long, value_parser = parse_schatten)]
    pub p1: SchattenOrder,
    #[arg(long)]
    pub theta: f64,
}

fn parse_schatten(s: &str) -> Result<SchattenOrder, String> {
    SchattenOrder::new(parse_order(s)?).map_err(|e| e.to_string())
}

fn parse_renyi(s: &str) -> Result<RenyiOrder, String> {
    s.parse::<RenyiOrder>().map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(SchattenOrder, SchattenOrder), String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    Ok((parse_schatten(p.trim())?, parse_schatten(q.trim())?))
}

fn parse_dims(s: &str) -> Result<[usize; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected dA,dB")?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok([p(a)?, p(b)?])
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<MatrixFile, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_bipartite(path: &Path, dims: Option<[usize; 2]>) -> Result<BipartiteOp, CliError> {
    let mut f = read_matrix(path)?;
    if dims.is_some() {
        f.dims = dims;
    }
    if f.dims.is_none() {
        return Err(CliError::Usage(format!(
            "{}: factor dimensions missing; add \"dims\" or pass --dims",
            path.display()
        )));
    }
    Ok(f.to_bipartite()?)
}

fn read_density(path: &Path) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::new(read_matrix(path)?.to_matrix()?)?)
}

fn read_kraus(path: &Path) -> Result<Channel, CliError> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum KrausFile {
        List(Vec<MatrixFile>),
        Object { kraus: Vec<MatrixFile> },
    }
    let f: KrausFile = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let list = match f {
        KrausFile::List(l) | KrausFile::Object { kraus: l } => l,
    };
    let mats = list
        .iter()
        .map(|m| m.to_matrix())
        .collect::<svv_core::Result<Vec<CMat>>>()?;
    Ok(Channel::new(mats)?)
}

/// Optimizer settings derived from the merged configuration.
fn base_query(s: &Settings) -> PQQuery {
    PQQuery::new(SchattenOrder::one(), SchattenOrder::one())
        .with_seed(s.experiment.seed)
        .with_tol(s.experiment.tol / 10.0)
}

fn kind(k: BoundKind) -> Value {
    serde_json::to_value(k).expect("bound kind serializes")
}

fn pq_entry(quantity: &str, r: &PQResult, tol: f64) -> Value {
    json!({
        "quantity": quantity,
        "value": num(r.value),
        "tol": tol,
        "bound_kind": kind(r.bound_kind),
        "spread": num(r.spread),
        "iterations": r.iterations,
        "converged": r.converged,
        "optimizer": r.optimizer,
    })
}

struct Outcome {
    envelope: Envelope,
    /// Whether every check in the results passed.
    pass: bool,
    /// Artifact for `--out` when it differs from the envelope.
    artifact: Option<String>,
}

impl Outcome {
    fn ok(envelope: Envelope) -> Self {
        Self {
            envelope,
            pass: true,
            artifact: None,
        }
    }
}

fn unit_scale(bits: bool) -> (f64, &'static str) {
    if bits {
        (1.0 / std::f64::consts::LN_2, "bits")
    } else {
        (1.0, "nats")
    }
}

fn row_entry(r: &Row) -> Value {
    let mut v = json!({
        "check": r.check,
        "seed": r.seed,
        "lhs": num(r.lhs),
        "rhs": num(r.rhs),
        "margin": num(r.margin),
        "tol": r.tolerance,
        "pass": r.pass,
    });
    if let Some(n) = &r.note {
        v["note"] = Value::String(n.clone());
    }
    v
}

fn norm(cli: &Cli, a: &NormArgs, s: &Settings) -> Result<Outcome, CliError> {
    let m = read_bipartite(&a.input, a.dims)?;
    let (p, q) = a.pq;
    let mut query = PQQuery {
        p,
        q,
        ..base_query(s)
    };
    if let Some(r) = a.restarts {
        query.restarts = r.max(1);
    }
    let (label, r) = match a.form {
        Form::Inf => {
            let r = match pq_norm_inf_positive(&m, &query) {
                Err(Error::NotPositive { .. }) => pq_norm_hermitian_upper(&m, &query)?,
                other => other?,
            };
            (format!("norm_({p},{q})"), r)
        }
        Form::Sup => (format!("norm_({q},{p})"), pq_norm_sup_positive(&m, &query)?),
    };
    let mut env = Envelope::new("norm", cli, s);
    env.results.push(pq_entry(&label, &r, query.tol));
    Ok(Outcome::ok(env))
}

fn entropy(cli: &Cli, a: &EntropyArgs, s: &Settings) -> Result<Outcome, CliError> {
    let rho = read_bipartite(&a.input, a.dims)?;
    let query = base_query(s);
    let mut env = Envelope::new("entropy", cli, s);
    match a.measure {
        Measure::H => {
            let (scale, unit) = unit_scale(cli.bits);
            let h = cond_renyi_entropy_with(&rho, a.alpha, &query)?;
            // H is −α' log of an upper bound on the norm, hence a lower bound
            let bound = if a.alpha.is_one() {
                BoundKind::Exact
            } else {
                BoundKind::Lower
            };
            env.results.push(json!({
                "quantity": "H_alpha(X|Y)",
                "alpha": a.alpha,
                "value": num(h * scale),
                "unit": unit,
                "tol": query.tol,
                "bound_kind": kind(bound),
            }));
        }
        Measure::W => {
            let r = w_alpha_with(&rho, a.alpha, &query)?;
            let mut entry = pq_entry("W_alpha(X|Y)", &r, query.tol);
            entry["alpha"] = serde_json::to_value(a.alpha).expect("order serializes");
            env.results.push(entry);
        }
    }
    Ok(Outcome::ok(env))
}

fn divergence(cli: &Cli, a: &DivergenceArgs, s: &Settings) -> Result<Outcome, CliError> {
    let rho = read_density(&a.rho)?;
    let sigma = HermMat::new(read_matrix(&a.sigma)?.to_matrix()?)?;
    let d = sandwiched_divergence(&rho, &sigma, a.alpha)?;
    let (scale, unit) = unit_scale(cli.bits);
    let mut env = Envelope::new("divergence", cli, s);
    env.results.push(json!({
        "quantity": "D_alpha",
        "alpha": a.alpha,
        "value": num(d * scale),
        "unit": unit,
        "tol": 0.0,
        "bound_kind": kind(BoundKind::Exact),
    }));
    Ok(Outcome::ok(env))
}

fn coherent(cli: &Cli, a: &CoherentArgs, s: &Settings) -> Result<Outcome, CliError> {
    let ch = read_kraus(&a.kraus)?;
    let q = base_query(s);
    let opts = CoherentOptions {
        restarts: a.restarts.max(1),
        max_evals: a.max_evals,
        seed: s.experiment.seed,
        inner: q.with_restarts(2),
        tol: s.experiment.tol,
    };
    let r = coherent_info_alpha(&ch, a.alpha, &opts)?;
    let (scale, unit) = unit_scale(cli.bits);
    let mut env = Envelope::new("coherent", cli, s);
    env.results.push(json!({
        "quantity": "I_coh_alpha",
        "alpha": a.alpha,
        "value": num(r.value * scale),
        "unit": unit,
        "tol": opts.tol,
        "bound_kind": kind(r.bound_kind),
        "spread": num(r.spread * scale),
        "evaluations": r.evaluations,
    }));
    Ok(Outcome::ok(env))
}

fn verify(cli: &Cli, a: &VerifyArgs, s: &Settings) -> Result<Outcome, CliError> {
    let checks = parse_suite(&a.suite)?;
    let report: Report = run_checks(&s.experiment, &checks, s.threads)?;
    let mut env = Envelope::new("verify", cli, s);
    for check in &checks {
        let rows: Vec<&Row> = report.rows_of(check.name()).collect();
        let failed = rows.iter().filter(|r| !r.pass).count();
        let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        env.results.push(json!({
            "check": check.name(),
            "rows": rows.len(),
            "failed": failed,
            "worst_margin": num(worst),
            "pass": failed == 0,
        }));
    }
    let format = a.format.unwrap_or(
        match cli
            .out
            .as_ref()
            .and_then(|p| p.extension())
            .and_then(|e| e.to_str())
        {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        },
    );
    let artifact = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json() + "\n",
    };
    Ok(Outcome {
        envelope: env,
        pass: report.all_pass(),
        artifact: Some(artifact),
    })
}

fn decouple(cli: &Cli, a: &DecoupleArgs, s: &Settings) -> Result<Outcome, CliError> {
    let rho = read_bipartite(&a.input, a.dims)?;
    DensityMatrix::new(rho.as_mat().clone())?;
    let samples = a.samples.unwrap_or(s.experiment.mc_samples);
    let seed = s.experiment.seed;
    let est = decoupling_estimate(&rho, a.keep, samples, seed)?;
    let mut env = Envelope::new("decouple", cli, s);
    let mut pass = true;
    for (k, &alpha) in a.alpha.iter().enumerate() {
        let (bound, bk) =
            decoupling_bound(&rho, a.keep, alpha, seed.derive(samples as u64 + k as u64))?;
        let row = Row::le(
            "decoupling",
            seed.master,
            est.mean + 3.0 * est.stderr,
            bound,
            s.experiment.tol,
        );
        pass &= row.pass;
        let mut v = row_entry(&row);
        v["alpha"] = serde_json::to_value(alpha).expect("order serializes");
        v["mean"] = num(est.mean);
        v["stderr"] = num(est.stderr);
        v["samples"] = json!(samples);
        v["bound_kind"] = kind(bk);
        env.results.push(v);
    }
    Ok(Outcome {
        envelope: env,
        pass,
        artifact: None,
    })
}

fn specfact(cli: &Cli, a: &SpecfactArgs, s: &Settings) -> Result<Outcome, CliError> {
    let poly = trig_from_json::<f64>(&read(&a.input)?)?;
    let f = spectral_factorize(&poly, a.residual_tol, a.max_iter)?;
    let coeffs: serde_json::Map<String, Value> = f
        .factor
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, m)| {
            (
                k.to_string(),
                serde_json::to_value(MatrixFile::from_matrix(m, None)).expect("matrix serializes"),
            )
        })
        .collect();
    let factor = json!({ "d": f.factor.dim(), "K": f.factor.degree(), "coeffs": coeffs });
    let cert = match &f.certificate {
        Some(c) => json!({
            "winding": c.winding,
            "min_abs_det": num(c.min_abs_det),
            "boundary_min_abs_det": num(c.boundary_min_abs_det),
            "outer": c.is_outer(),
        }),
        None => json!({ "indeterminate": true, "outer": false }),
    };
    let mut env = Envelope::new("specfact", cli, s);
    env.results.push(json!({
        "quantity": "spectral_factor",
        "residual": num(f.residual),
        "refined_residual": num(f.refined_residual),
        "tol": a.residual_tol,
        "grid": f.grid,
        "iterations": f.iterations,
        "method": format!("{:?}", f.method).to_lowercase(),
        "certificate": cert,
        "factor": factor.clone(),
    }));
    let artifact = serde_json::to_string_pretty(&factor).expect("factor serializes") + "\n";
    Ok(Outcome {
        envelope: env,
        pass: true,
        artifact: Some(artifact),
    })
}

fn interp(cli: &Cli, a: &InterpArgs, s: &Settings) -> Result<Outcome, CliError> {
    let x = read_matrix(&a.input)?.to_matrix::<f64>()?;
    let m = schatten_interp_check(&x, a.p0, a.p1, a.theta)?;
    let tol = s.experiment.tol;
    let pass = m.holds(tol);
    let mut env = Envelope::new("interp", cli, s);
    env.results.push(json!({
        "check": "schatten_interp",
        "p0": a.p0,
        "p1": a.p1,
        "theta": a.theta,
        "lhs": num(m.lhs),
        "rhs": num(m.rhs),
        "margin": num(m.margin),
        "tol": tol,
        "pass": pass,
    }));
    Ok(Outcome {
        envelope: env,
        pass,
        artifact: None,
    })
}

fn dispatch(cli: &Cli, s: &Settings) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Norm(a) => norm(cli, a, s),
        Command::Entropy(a) => entropy(cli, a, s),
        Command::Divergence(a) => divergence(cli, a, s),
        Command::Coherent(a) => coherent(cli, a, s),
        Command::Verify(a) => verify(cli, a, s),
        Command::Decouple(a) => decouple(cli, a, s),
        Command::Specfact(a) => specfact(cli, a, s),
        Command::Interp(a) => interp(cli, a, s),
    }
}

fn overrides(cli: &Cli) -> Overrides {
    let (trials, mc_samples) = match &cli.command {
        Command::Verify(v) => (v.trials, v.mc_samples),
        _ => (None, None),
    };
    Overrides {
        seed: cli.seed,
        threads: cli.threads,
        tol: cli.tol,
        trials,
        mc_samples,
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, env: &dyn Env, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let result = load_config(cli.config.as_deref(), &overrides(&cli), env).and_then(|s| {
        let out = dispatch(&cli, &s)?;
        Ok(out)
    });
    let out = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return e.code();
        }
    };
    let shown = if cli.json {
        out.envelope.to_json()
    } else {
        out.envelope.to_table()
    };
    let _ = stdout.write_all(shown.as_bytes());
    if let Some(path) = &cli.out {
        let body = out
            .artifact
            .clone()
            .unwrap_or_else(|| out.envelope.to_json());
        if let Err(e) = std::fs::write(path, body) {
            let _ = writeln!(stderr, "error: {}: {e}", path.display());
            return 2;
        }
    }
    if out.pass {
        0
    } else {
        1
    }
}

/// Entry point for the binary.
pub fn main_with_process_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        &ProcessEnv,
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}
