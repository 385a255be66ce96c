use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use lpdecode::certify::{
    attack_arbitrary, attack_fixed_sign, exhaustive_search, search_violation, unsigned_margin, ConditionQuery,
    HEAD_SCALE_START,
};
use lpdecode::decoder::{decode, lp_objective, DecoderConfig};
use lpdecode::ensemble::{
    floor_count, make_instance_with_message, recovered, ErrorSpec, Instance, MessageLaw, SignPattern,
    DEFAULT_SUCCESS_TOL,
};
use lpdecode::grid::parse_grid;
use lpdecode::harness::{concentration_study, run_sweep, ErrorRegime, SweepPlan};
use lpdecode::threshold::{curve, CurveRequest};
use lpdecode::{io, SeedSpec};

const SEED_HELP: &str = "Master seed; falls back to $LPDECODE_SEED";

#[derive(Parser)]
#[command(name = "lpdecode", version, about = "Sparse error correction by lp-minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the recovery threshold curve rho*(p)
    #[command(
        after_help = "Output: CSV with header `p,z_star,rho_star,drho_dp` (drho_dp empty unless --derivative), \
                      9 significant digits."
    )]
    Threshold(ThresholdArgs),
    /// Decode one instance (generated or read from a sidecar) with IRLS
    #[command(after_help = "Output: JSON object with fields p, m, n, success, max_abs_error, objective, \
                      objective_truth, iterations, converged, x_hat.")]
    Decode(DecodeArgs),
    /// Monte Carlo phase-transition sweep over (p, rho)
    #[command(after_help = "Output: CSV with header \
                      `p,rho,m,n,trials,successes,success_rate,mean_objective_gap,wallclock_ms`. \
                      wallclock_ms is 0 unless --timing is given, so reruns are byte-identical. \
                      Grids accept `start:stop:step` (inclusive), comma lists, or one value. \
                      Rates are for the IRLS-lp local solver; they are not lp-optimal decoding rates.")]
    Phase(PhaseArgs),
    /// Search for a violation of the null-space condition on a Gaussian matrix
    #[command(after_help = "Output: JSON object with fields mode, p, rho, min_margin, violated, verdict, \
                      witness, restarts_used. A nonnegative min_margin is not a proof.")]
    Certify(CertifyArgs),
    /// Construct a worst-case error for a Gaussian instance
    #[command(after_help = "Output: JSON object with fields mode, p, rho, m, n, support_size, objective_truth, \
                      objective_alt, succeeded and mode-specific diagnostics.")]
    Attack(AttackArgs),
    /// Fixed-support fixed-sign concentration study
    #[command(after_help = "Output: CSV with header `rho,p,m,trials,ratio_Tminus,ratio_Tc,margin_sign`.")]
    Concentration(ConcentrationArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 0.05)]
    p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    p_max: f64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Also compute d rho*/dp
    #[arg(long)]
    derivative: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct DecodeArgs {
    /// Instance sidecar JSON (matrix CSV located via its `matrix` field)
    #[arg(long, conflicts_with_all = ["m", "n", "rho"])]
    instance: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Corrupted fraction for generated instances
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p: f64,
    /// Draw f = 0 instead of a standard normal message
    #[arg(long)]
    zero_message: bool,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_SUCCESS_TOL)]
    tol: f64,
    /// Write the generated instance as <PREFIX>.csv + <PREFIX>.json
    #[arg(long)]
    save_instance: Option<PathBuf>,
    #[arg(long, env = "LPDECODE_SEED", help = SEED_HELP)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Arbitrary,
    FixedSign,
    Adversarial,
}

impl From<RegimeArg> for ErrorRegime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Arbitrary => ErrorRegime::Arbitrary,
            RegimeArg::FixedSign => ErrorRegime::FixedSign,
            RegimeArg::Adversarial => ErrorRegime::Adversarial,
        }
    }
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, value_enum, default_value = "arbitrary")]
    regime: RegimeArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Exponent grid
    #[arg(long)]
    p: String,
    /// Corrupted-fraction grid
    #[arg(long)]
    rho: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_SUCCESS_TOL)]
    tol: f64,
    /// Worker threads (output does not depend on it)
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock time per cell
    #[arg(long)]
    timing: bool,
    #[arg(long, env = "LPDECODE_SEED", help = SEED_HELP)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Unsigned,
    Signed,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, value_enum, default_value = "unsigned")]
    mode: ConditionArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Corrupted fraction; in signed mode a random support of floor(rho m) rows
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Scan a sphere grid at this angular resolution instead (n <= 4)
    #[arg(long)]
    exhaustive: Option<f64>,
    #[arg(long, env = "LPDECODE_SEED", help = SEED_HELP)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackArg {
    Arbitrary,
    FixedSign,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum, default_value = "arbitrary")]
    mode: AttackArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    rho: f64,
    /// Violation-search restarts (fixed-sign mode)
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, env = "LPDECODE_SEED", help = SEED_HELP)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ConcentrationArgs {
    /// Corrupted-fraction grid
    #[arg(long)]
    rho: String,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 100_000)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, env = "LPDECODE_SEED", help = SEED_HELP)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<lpdecode::Error> for Failure {
    fn from(e: lpdecode::Error) -> Self {
        match e {
            lpdecode::Error::Domain(_) | lpdecode::Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn emit(out: &OutArg, text: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &OutArg, value: &T) -> CliResult<()> {
    emit(out, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn grid(flag: &str, spec: &str) -> CliResult<Vec<f64>> {
    parse_grid(spec).map_err(|e| Failure::Usage(format!("--{flag}: {e}")))
}

fn run_threshold(args: ThresholdArgs) -> CliResult<()> {
    let req =
        CurveRequest { p_min: args.p_min, p_max: args.p_max, steps: args.steps, with_derivative: args.derivative };
    let points = curve(&req)?;
    emit(&args.out, &io::curve_csv(&points))
}

#[derive(Serialize)]
struct DecodeReport {
    p: f64,
    m: usize,
    n: usize,
    success: bool,
    max_abs_error: f64,
    objective: f64,
    objective_truth: f64,
    iterations: usize,
    converged: bool,
    x_hat: Vec<f64>,
}

fn run_decode(args: DecodeArgs) -> CliResult<()> {
    let instance: Instance = match &args.instance {
        Some(path) => io::read_instance(path)?,
        None => {
            let (Some(m), Some(n), Some(rho)) = (args.m, args.n, args.rho) else {
                return Err(Failure::Usage("give --instance, or all of --m, --n and --rho".into()));
            };
            let seed = args.seed.ok_or_else(|| Failure::Usage("--seed is required to generate an instance".into()))?;
            let message = if args.zero_message { MessageLaw::Zero } else { MessageLaw::Gaussian };
            make_instance_with_message(m, n, &ErrorSpec::gaussian(rho), message, SeedSpec::new(seed, 0))?
        }
    };
    if let Some(prefix) = &args.save_instance {
        io::write_instance(&instance, prefix)?;
    }
    if args.restarts > 1 && args.seed.is_none() {
        return Err(Failure::Usage("--seed is required with --restarts > 1".into()));
    }
    let cfg = DecoderConfig { p: args.p, restarts: args.restarts, ..Default::default() };
    let seed = SeedSpec::new(args.seed.unwrap_or(0), 1);
    let res = decode(&instance.a, &instance.y, &cfg, seed)?;
    let f = instance.f.as_slice();
    let max_abs_error = res.x_hat.iter().zip(f).map(|(x, t)| (x - t).abs()).fold(0.0, f64::max);
    let report = DecodeReport {
        p: args.p,
        m: instance.m(),
        n: instance.n(),
        success: recovered(&res.x_hat, f, args.tol),
        max_abs_error,
        objective: res.objective,
        objective_truth: lp_objective(instance.e.as_slice(), args.p),
        iterations: res.iterations,
        converged: res.converged,
        x_hat: res.x_hat,
    };
    emit_json(&args.out, &report)
}

fn run_phase(args: PhaseArgs) -> CliResult<()> {
    let mut plan = SweepPlan::new(args.m, args.n, grid("p", &args.p)?, grid("rho", &args.rho)?, args.trials, args.seed);
    plan.regime = args.regime.into();
    plan.decoder.restarts = args.restarts;
    plan.success_tol = args.tol;
    plan.validate()?;
    let cells = match args.jobs {
        Some(0) => return Err(Failure::Usage("--jobs must be >= 1".into())),
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure::Runtime(e.to_string()))?
            .install(|| run_sweep(&plan))?,
        None => run_sweep(&plan)?,
    };
    emit(&args.out, &io::phase_csv(&cells, args.timing))
}

fn signed_pattern(m: usize, rho: f64, seed: SeedSpec) -> CliResult<SignPattern> {
    Ok(SignPattern::random(m, floor_count(rho, m), &mut seed.rng())?)
}

fn run_certify(args: CertifyArgs) -> CliResult<()> {
    let master = SeedSpec::new(args.seed, 0);
    let a = lpdecode::ensemble::gaussian_matrix(args.m, args.n, master)?;
    let q = match args.mode {
        ConditionArg::Unsigned => ConditionQuery::unsigned(a, args.p, args.rho),
        ConditionArg::Signed => {
            let pattern = signed_pattern(args.m, args.rho, master.with_stream(1))?;
            ConditionQuery::signed(a, args.p, pattern)
        }
    };
    let report = match args.exhaustive {
        Some(res) => exhaustive_search(&q, res)?,
        None => search_violation(&q, args.restarts, master.with_stream(2))?,
    };
    emit_json(&args.out, &report)
}

#[derive(Serialize)]
struct AttackReport {
    mode: &'static str,
    p: f64,
    rho: f64,
    m: usize,
    n: usize,
    support_size: usize,
    objective_truth: f64,
    objective_alt: f64,
    succeeded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    unsigned_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    signed_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    head_scale: Option<f64>,
}

fn run_attack(args: AttackArgs) -> CliResult<()> {
    let master = SeedSpec::new(args.seed, 0);
    let clean = make_instance_with_message(args.m, args.n, &ErrorSpec::gaussian(0.0), MessageLaw::Gaussian, master)?;
    let f = clean.f.as_slice();
    let report = match args.mode {
        AttackArg::Arbitrary => {
            let atk = attack_arbitrary(&clean.a, f, args.p, args.rho, None, master.with_stream(1))?;
            let margin = unsigned_margin(&clean.a, args.p, args.rho, &atk.direction)?;
            AttackReport {
                mode: "arbitrary",
                p: args.p,
                rho: args.rho,
                m: args.m,
                n: args.n,
                support_size: atk.support.len(),
                objective_truth: atk.objective_truth,
                objective_alt: atk.objective_alt,
                succeeded: atk.succeeded(),
                unsigned_margin: Some(margin),
                signed_margin: None,
                delta: None,
                head_scale: None,
            }
        }
        AttackArg::FixedSign => {
            let pattern = signed_pattern(args.m, args.rho, master.with_stream(1))?;
            let q = ConditionQuery::signed(clean.a.clone(), args.p, pattern.clone());
            let cert = search_violation(&q, args.restarts, master.with_stream(2))?;
            let mut report = AttackReport {
                mode: "fixed_sign",
                p: args.p,
                rho: args.rho,
                m: args.m,
                n: args.n,
                support_size: pattern.len(),
                objective_truth: f64::NAN,
                objective_alt: f64::NAN,
                succeeded: false,
                unsigned_margin: None,
                signed_margin: Some(cert.min_margin),
                delta: None,
                head_scale: None,
            };
            if cert.violated {
                let atk = attack_fixed_sign(&clean.a, f, args.p, &pattern, &cert.witness, HEAD_SCALE_START)?;
                // objectives of f and f - z on y = A f + e
                let e = DVector::from_vec(atk.e.clone());
                let y = &clean.a * &clean.f + &e;
                let x_alt = DVector::from_vec(atk.x_alt.clone());
                report.objective_truth = lp_objective((&y - &clean.a * &clean.f).as_slice(), args.p);
                report.objective_alt = lp_objective((&y - &clean.a * &x_alt).as_slice(), args.p);
                report.succeeded = atk.objective_change <= -0.5 * atk.delta;
                report.delta = Some(atk.delta);
                report.head_scale = Some(atk.head_scale);
            }
            report
        }
    };
    emit_json(&args.out, &report)
}

fn run_concentration(args: ConcentrationArgs) -> CliResult<()> {
    let rhos = grid("rho", &args.rho)?;
    let reports = rhos
        .iter()
        .enumerate()
        .map(|(i, &rho)| concentration_study(rho, args.p, args.m, args.trials, SeedSpec::new(args.seed, i as u64)))
        .collect::<lpdecode::Result<Vec<_>>>()?;
    emit(&args.out, &io::concentration_csv(&reports))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match cli.command {
        Command::Threshold(a) => run_threshold(a),
        Command::Decode(a) => run_decode(a),
        Command::Phase(a) => run_phase(a),
        Command::Certify(a) => run_certify(a),
        Command::Attack(a) => run_attack(a),
        Command::Concentration(a) => run_concentration(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
