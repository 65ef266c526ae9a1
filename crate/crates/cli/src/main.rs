//! `levy-moduli`: spectral values, constants, simulation, oracles, condition
//! checks and verification experiments from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use levy_moduli::gaussian::simulate_stationary_increment_path;
use levy_moduli::harness::{parse_power_spec, run_experiment, ConfigPairs, ExperimentConfig, ExperimentReport};
use levy_moduli::levy::{default_epsilon, estimate_local_time, simulate_path, StableIncrements};
use levy_moduli::oracles::{brownian_theorem_constant, local_time_diff_second_moment, local_time_moment};
use levy_moduli::spectral::{
    abs_moment_normal, c_beta_p, check_concavity, check_condition_cq, check_condition_lambda_gamma, local_time_factor,
    sigma0_sq, sigma_alpha_sq, sigma_tilde_sq, Thresholds, TrendReport,
};
use levy_moduli::{Error, Exponent, Query, Structure, Tabulated};

#[derive(Parser, Debug)]
#[command(name = "levy-moduli", version, about = "L^p moduli of Gaussian processes and Lévy local times")]
struct Cli {
    /// Significant digits of numeric output.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Print σ₀²(h), σ_α²(h) or σ̃_α²(h) of a characteristic exponent.
    Sigma(SigmaArgs),
    /// Print E|η|^p, the local-time factor, c(β, p) and the Brownian constant.
    Constants(ConstantsArgs),
    /// Simulate a path and emit it, or its local-time field, as CSV.
    Simulate(SimulateArgs),
    /// Print a local-time moment, or the second moment of a local-time difference.
    Oracle(OracleArgs),
    /// Check condition C_q, condition Λ_γ, or concavity of σ².
    Check(CheckArgs),
    /// Run a verification experiment and write its report.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    /// ψ = c|λ|^β (c = 1 unless --c is given).
    Stable,
    /// Standard Brownian motion, ψ = λ²/2.
    BrownianHalf,
    /// ψ interpolated from a CSV table (`lambda,psi`).
    Tabulated,
}

#[derive(Args, Debug)]
struct ExponentArgs {
    #[arg(long, value_enum, default_value_t = FamilyName::Stable)]
    family: FamilyName,
    /// Stability index β ∈ (1, 2].
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Scale c of ψ = c|λ|^β.
    #[arg(long)]
    c: Option<f64>,
    /// CSV table for the tabulated family: `lambda,psi` rows and a
    /// closing `#tail_exponent=<γ>` line.
    #[arg(long)]
    table: Option<PathBuf>,
}

impl ExponentArgs {
    fn exponent(&self) -> levy_moduli::Result<Exponent> {
        match self.family {
            FamilyName::BrownianHalf => Ok(Exponent::brownian_half()),
            FamilyName::Stable => match self.c {
                Some(c) => Exponent::scaled_stable(c, self.beta),
                None => Exponent::canonical_stable(self.beta),
            },
            FamilyName::Tabulated => {
                let path = self.table.as_ref().ok_or_else(|| Error::Config("--family tabulated needs --table".into()))?;
                Ok(Exponent::tabulated(Tabulated::load_csv(path)?))
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SigmaKind {
    /// σ₀²(h) = (2/π)∫(1 − cos λh)/ψ(λ) dλ.
    Sigma0,
    /// σ_α²(h) = (2/π)∫(1 − cos λh)/(α + ψ(λ)) dλ.
    Alpha,
    /// σ̃_α²(h) = σ₀²(h) − σ_α²(h).
    Tilde,
}

#[derive(Args, Debug)]
struct SigmaArgs {
    #[command(flatten)]
    exp: ExponentArgs,
    /// Lags, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    h: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SigmaKind::Sigma0)]
    kind: SigmaKind,
    /// α for --kind alpha or tilde.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Theorem {
    /// 2^{3p/2} Γ((p+1)/2)/√π.
    Brownian,
    /// c(β, p); needs --beta.
    Stable,
    /// E|η|^p.
    Moment,
    /// 2^{p/2} E|η|^p.
    Factor,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[arg(long)]
    p: f64,
    /// Print only this constant; all of them otherwise.
    #[arg(long, value_enum)]
    theorem: Option<Theorem>,
    /// β for c(β, p).
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SimOutput {
    /// `t,x` rows of a Lévy path, or `x,g` rows of a Gaussian path.
    Path,
    /// `x,ell` rows of the local-time field.
    LocalTime,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    exp: ExponentArgs,
    /// Simulate a Gaussian process with σ²(h) = c·h^r instead, e.g. `h^1.5`.
    #[arg(long)]
    gaussian: Option<String>,
    #[arg(long, value_enum, default_value_t = SimOutput::Path)]
    output: SimOutput,
    /// Time horizon.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Number of steps.
    #[arg(long, default_value_t = 1 << 16)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Local-time bin width; defaults to the smallest power of two ≥ 4 step scales.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Window [a, b]: local-time bins always cover it; Gaussian paths live on it.
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    b: f64,
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    exp: ExponentArgs,
    /// Moment order (≤ 3 off the diagonal).
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Level x.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    /// Starting point z.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    z: f64,
    /// Second level: print E(L^x − L^y)² instead.
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Condition {
    /// σ(1/(n(log n)^{q+1}))/σ(1/(log n)^q) → 0.
    Cq,
    /// λ^γ/ψ(λ) → 0.
    Lambda,
    /// σ² concave on [0, δ].
    Concavity,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum)]
    condition: Condition,
    #[command(flatten)]
    exp: ExponentArgs,
    /// Check σ²(h) = c·h^r given as `c*h^r` instead of σ₀² of the exponent.
    #[arg(long)]
    power: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Largest log10 n for C_q.
    #[arg(long, default_value_t = 12)]
    n_max: u32,
    #[arg(long, default_value_t = 1e12)]
    lambda_max: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Experiment kind, e.g. gaussian-mean or localtime-convergence.
    #[arg(required_unless_present = "replay")]
    kind: Option<String>,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run the config embedded in a JSON report and compare rows.
    #[arg(long, conflicts_with_all = ["kind", "config"])]
    replay: Option<PathBuf>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    json: Option<PathBuf>,
    /// CSV report path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// fbm, potential, brownian-half or stable.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Lags, comma separated and strictly decreasing.
    #[arg(long)]
    h: Option<String>,
    /// Lags as multiples of the grid step, comma separated.
    #[arg(long)]
    h_steps: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    std_ratio: Option<String>,
    /// Moment orders for lm-decay.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    qv_m: Option<String>,
    /// Concave test functions, `c*h^r` comma separated.
    #[arg(long)]
    concave: Option<String>,
    #[arg(long)]
    convex_r: Option<String>,
    #[arg(long)]
    quad_tol: Option<String>,
}

impl VerifyArgs {
    fn pairs(&self) -> levy_moduli::Result<ConfigPairs> {
        let mut pairs = match &self.config {
            Some(path) => ConfigPairs::parse(&std::fs::read_to_string(path)?)?,
            None => ConfigPairs::default(),
        };
        let flags = [
            ("family", &self.family),
            ("r", &self.r),
            ("beta", &self.beta),
            ("alpha", &self.alpha),
            ("p", &self.p),
            ("a", &self.a),
            ("b", &self.b),
            ("t", &self.t),
            ("n", &self.n),
            ("epsilon", &self.epsilon),
            ("h", &self.h),
            ("h_steps", &self.h_steps),
            ("replicas", &self.replicas),
            ("seed", &self.seed),
            ("tolerance", &self.tolerance),
            ("std_ratio", &self.std_ratio),
            ("m", &self.m),
            ("t_grid", &self.t_grid),
            ("qv_m", &self.qv_m),
            ("concave", &self.concave),
            ("convex_r", &self.convex_r),
            ("quad_tol", &self.quad_tol),
        ];
        if let Some(kind) = &self.kind {
            pairs.set("kind", kind.clone())?;
        }
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.set(key, v.clone())?;
            }
        }
        Ok(pairs)
    }
}

/// `x` to `digits` significant digits, trailing zeros dropped.
fn fmt_sig(x: f64, digits: u8) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        let s = format!("{:.*e}", usize::from(digits - 1), x);
        let (mantissa, e) = s.split_once('e').unwrap();
        let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        return format!("{mantissa}e{e}");
    }
    let decimals = (i32::from(digits) - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::QuadratureFailure { .. } | Error::Simulation(_) | Error::Json(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sigma(args: &SigmaArgs, digits: u8) -> Outcome {
    let exp = args.exp.exponent()?;
    let values = args
        .h
        .iter()
        .map(|&h| match args.kind {
            SigmaKind::Sigma0 => sigma0_sq(&exp, h, args.tol),
            SigmaKind::Alpha => sigma_alpha_sq(&exp, args.alpha, h, args.tol),
            SigmaKind::Tilde => sigma_tilde_sq(&exp, args.alpha, h, args.tol),
        })
        .collect::<levy_moduli::Result<Vec<f64>>>()?;
    if values.len() == 1 {
        println!("{}", fmt_sig(values[0], digits));
    } else {
        println!("h,value");
        for (h, v) in args.h.iter().zip(values) {
            println!("{h},{}", fmt_sig(v, digits));
        }
    }
    Ok(())
}

fn constants(args: &ConstantsArgs, digits: u8) -> Outcome {
    let p = args.p;
    let stable = || -> Result<f64, Failure> {
        let beta = args.beta.ok_or_else(|| Failure::Usage("c(β, p) needs --beta".into()))?;
        Ok(c_beta_p(beta, p)?)
    };
    match args.theorem {
        Some(Theorem::Brownian) => println!("{}", fmt_sig(brownian_theorem_constant(p)?, digits)),
        Some(Theorem::Stable) => println!("{}", fmt_sig(stable()?, digits)),
        Some(Theorem::Moment) => println!("{}", fmt_sig(abs_moment_normal(p)?, digits)),
        Some(Theorem::Factor) => println!("{}", fmt_sig(local_time_factor(p)?, digits)),
        None => {
            println!("abs_moment = {}", fmt_sig(abs_moment_normal(p)?, digits));
            println!("local_time_factor = {}", fmt_sig(local_time_factor(p)?, digits));
            println!("brownian = {}", fmt_sig(brownian_theorem_constant(p)?, digits));
            if args.beta.is_some() {
                println!("stable = {}", fmt_sig(stable()?, digits));
            }
        }
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Outcome {
    let mut w = sink(&args.out)?;
    if let Some(spec) = &args.gaussian {
        let (c, r) = parse_power_spec(spec)?;
        let sigma = Structure::scaled_power_law(c, r)?;
        let spacing = (args.b - args.a) / args.n as f64;
        let path = simulate_stationary_increment_path(&sigma, args.a, args.b, spacing, 0.0, args.seed)?;
        if args.output == SimOutput::LocalTime {
            return Err(Failure::Usage("local-time output needs a Lévy family".into()));
        }
        path.write_csv(&mut w)?;
    } else {
        let exp = args.exp.exponent()?;
        let path = simulate_path(&exp, args.t, args.n, args.seed)?;
        match args.output {
            SimOutput::Path => path.write_csv(&mut w)?,
            SimOutput::LocalTime => {
                let eps = match args.epsilon {
                    Some(e) => e,
                    None => default_epsilon(StableIncrements::new(&exp, path.step())?.scale()),
                };
                let field = estimate_local_time(&path, eps, args.a, args.b)?;
                if field.resolution_warning {
                    eprintln!("warning: ε = {eps} is below 4 one-step scales; the field is under-resolved");
                }
                field.write_csv(&mut w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn oracle(args: &OracleArgs, digits: u8) -> Outcome {
    let exp = args.exp.exponent()?;
    let value = match args.y {
        Some(y) => local_time_diff_second_moment(&exp, args.t, args.x, y, args.tol)?,
        None => local_time_moment(&Query::new(exp, args.m, args.t).at(args.x).from(args.z).with_tolerance(args.tol))?,
    };
    println!("{}", fmt_sig(value, digits));
    Ok(())
}

fn print_trend(name: &str, rep: &TrendReport, digits: u8) {
    println!("log10_x,ratio");
    for p in &rep.points {
        println!("{},{}", p.log10_x, fmt_sig(p.ratio, digits));
    }
    println!("{name}: {}", rep.verdict);
}

fn check(args: &CheckArgs, digits: u8) -> Outcome {
    let structure = || -> levy_moduli::Result<Structure> {
        match &args.power {
            Some(spec) => {
                let (c, r) = parse_power_spec(spec)?;
                Structure::scaled_power_law(c, r)
            }
            None => Ok(Structure::sigma0(args.exp.exponent()?)),
        }
    };
    match args.condition {
        Condition::Cq => print_trend("C_q", &check_condition_cq(&structure()?, args.q, args.n_max, Thresholds::default())?, digits),
        Condition::Lambda => {
            let exp = args.exp.exponent()?;
            let rep = check_condition_lambda_gamma(&exp, args.gamma, args.lambda_max, Thresholds::default())?;
            print_trend("Λ_γ", &rep, digits);
        }
        Condition::Concavity => {
            let rep = check_concavity(&structure()?, args.delta, args.grid)?;
            println!("concave = {}", rep.concave);
            println!("monotone = {}", rep.monotone);
            println!("worst_second_difference = {}", fmt_sig(rep.worst_second_difference, digits));
            println!("threshold = {}", fmt_sig(rep.threshold, digits));
        }
    }
    Ok(())
}

fn summarize(rep: &ExperimentReport, digits: u8) {
    let f = |x: f64| fmt_sig(x, digits);
    let mut e = io::stderr().lock();
    for r in &rep.rows {
        let _ = writeln!(
            e,
            "{} h={}{} mean={} se={}{}{}",
            r.statistic,
            f(r.h),
            r.t.map(|t| format!(" t={}", f(t))).unwrap_or_default(),
            f(r.ensemble_mean),
            f(r.stderr),
            r.target.map(|t| format!(" target={}", f(t))).unwrap_or_default(),
            r.pass.map(|p| if p { " pass" } else { " FAIL" }).unwrap_or_default()
        );
    }
    for c in &rep.checks {
        let _ = writeln!(e, "check {}: {} ({})", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail);
    }
    for w in &rep.warnings {
        let _ = writeln!(e, "warning: {w}");
    }
    let _ = writeln!(e, "verdict: {} ({:.1}s)", rep.verdict, rep.runtime_seconds);
}

fn verify(args: &VerifyArgs, digits: u8) -> Outcome {
    let (pairs, previous) = match &args.replay {
        Some(path) => {
            let old = ExperimentReport::from_json(&std::fs::read_to_string(path)?)?;
            (ConfigPairs(old.config.clone()), Some(old))
        }
        None => (args.pairs()?, None),
    };
    let cfg = ExperimentConfig::from_pairs(&pairs)?;
    let rep = run_experiment(&cfg)?;
    summarize(&rep, digits);
    match &args.json {
        Some(p) => rep.write_json(p)?,
        None => println!("{}", rep.to_json()?),
    }
    if let Some(p) = &args.csv {
        rep.save_csv(p)?;
    }
    if let Some(old) = previous {
        if old.rows_json()? != rep.rows_json()? {
            return Err(Failure::Numerical("replayed rows differ from the stored report".into()));
        }
        eprintln!("replay: rows identical");
    }
    if rep.passed() {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let digits = cli.precision;
    let outcome = match &cli.command {
        Command::Sigma(a) => sigma(a, digits),
        Command::Constants(a) => constants(a, digits),
        Command::Simulate(a) => simulate(a),
        Command::Oracle(a) => oracle(a, digits),
        Command::Check(a) => check(a, digits),
        Command::Verify(a) => verify(a, digits),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.5957691216057308, 6), "1.59577");
        assert_eq!(fmt_sig(4.0, 6), "4");
        assert_eq!(fmt_sig(4.000000000000001, 6), "4");
        assert_eq!(fmt_sig(0.00123456789, 3), "0.00123");
        assert_eq!(fmt_sig(-2.5, 6), "-2.5");
        assert_eq!(fmt_sig(1.25e-9, 6), "1.25e-9");
        assert_eq!(fmt_sig(123456.7, 3), "123457");
        assert_eq!(fmt_sig(0.0, 6), "0");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
