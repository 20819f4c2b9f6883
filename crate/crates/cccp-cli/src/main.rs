//! Command-line experiment harness: exact solves, seeded simulation,
//! analytic bounds, and parameter sweeps with reproducible CSV/JSON output.
//!
//! Exit codes: 0 success, 2 usage error, 3 domain error (invalid
//! parameters, p = 1 handed to the solver), 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cccp::bounds::{
    escape_rate, hitting_regime, mean_field_interval, metastability_deviation_bound,
    unconditional_lower_bound, unconditional_upper_bound, HittingRegime, MetastabilityVariant,
};
use cccp::chain::Params;
use cccp::hitting::{dense_oracle_solve, solve_hitting_times};
use cccp::marginal::{default_epsilon, MarginalModel};
use cccp::sim::{batch_hitting_stats, simulate_trajectory_rep, PRNG_ID};
use cccp::LogValue;

fn version_string() -> String {
    format!("{} (prng {PRNG_ID})", env!("CARGO_PKG_VERSION"))
}

fn version_static() -> &'static str {
    Box::leak(version_string().into_boxed_str())
}

#[derive(Parser)]
#[command(name = "cccp", about = "Careless coupon collector experiments", version = version_static())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact expected hitting time via the O(n^2) solver.
    Exact(ExactArgs),
    /// Monte Carlo hitting times, one CSV row per replication.
    Simulate(SimulateArgs),
    /// Mean collection fraction |S_t|/n over replicated trajectories.
    Trajectory(TrajectoryArgs),
    /// All analytic bounds and regime classification as JSON.
    Bounds(BoundsArgs),
    /// Exact + simulated + bound values across a p-grid.
    Sweep(SweepArgs),
    /// Metastable-band occupancy: analytic bound vs empirical frequency.
    Metastable(MetastableArgs),
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Include the full h(k) vector, not just h(0).
    #[arg(long)]
    full_vector: bool,
    /// Also run the dense pivoted reference solve and report the max
    /// relative difference (trustworthy only while h(0) is small; see docs).
    #[arg(long)]
    oracle: bool,
    /// Emit CSV instead of the default JSON.
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    runs: u64,
    #[arg(long, env = "CCCP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = cccp::sim::DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Per-replication CSV output path; the summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    horizon: u64,
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, env = "CCCP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Mixing tolerance; defaults to q*/n.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Metastable band half-width factor; enables the deviation bound.
    #[arg(long)]
    delta: Option<f64>,
    /// Window length for the deviation bound.
    #[arg(long, default_value_t = 10_000)]
    window: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated p values.
    #[arg(long, conflicts_with = "p_grid")]
    p_list: Option<String>,
    /// Inclusive grid `start:stop:step` (endpoints within 1e-12).
    #[arg(long)]
    p_grid: Option<String>,
    #[arg(long, default_value_t = 1000)]
    runs: u64,
    #[arg(long, env = "CCCP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = cccp::sim::DEFAULT_MAX_STEPS)]
    max_steps: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetastableArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    window: u64,
    #[arg(long, default_value_t = 100)]
    runs: u64,
    #[arg(long, env = "CCCP_SEED", default_value_t = 0)]
    seed: u64,
}

/// Reproducibility sidecar written next to every CSV output.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    argv: Vec<String>,
    seed: Option<u64>,
    version: String,
    prng: &'static str,
    /// Unix seconds; informational only, never part of the CSV body.
    timestamp: u64,
}

impl RunManifest {
    fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            seed,
            version: version_string(),
            prng: PRNG_ID,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
}

impl From<cccp::Error> for CliError {
    fn from(e: cccp::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Exact(a) => cmd_exact(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Trajectory(a) => cmd_trajectory(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Metastable(a) => cmd_metastable(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("domain error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(4)
        }
    }
}

/// A positive quantity that may exceed the f64 range: log10 always, linear
/// value only when representable.
#[derive(Serialize)]
struct LogQuantity {
    log10: f64,
    value: Option<f64>,
}

impl From<LogValue> for LogQuantity {
    fn from(v: LogValue) -> Self {
        LogQuantity {
            log10: v.log10(),
            value: v.is_representable().then(|| v.value()),
        }
    }
}

/// CSV to stdout with broken pipes treated as success, like [`print_json`].
fn write_csv_stdout<F>(fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut csv::Writer<std::io::Stdout>) -> Result<(), csv::Error>,
{
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let result = fill(&mut w).and_then(|()| Ok(w.flush()?));
    match result {
        Err(e) => match e.kind() {
            csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            _ => Err(e.into()),
        },
        Ok(()) => Ok(()),
    }
}

fn regime_label(r: HittingRegime) -> &'static str {
    match r {
        HittingRegime::Classical => "Classical",
        HittingRegime::SuperClassical => "SuperClassical",
        HittingRegime::MetastableI => "Metastable I",
        HittingRegime::MetastableII => "Metastable II",
        HittingRegime::MetastableIII => "Metastable III",
        HittingRegime::Infinite => "Infinite",
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    use std::io::Write;
    let s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(e.to_string()))?;
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    match writeln!(std::io::stdout(), "{s}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn cmd_exact(args: ExactArgs) -> Result<(), CliError> {
    let params = Params::new(args.n, args.p)?;
    let sol = solve_hitting_times(&params)?;
    let oracle_diff = if args.oracle {
        let slow = dense_oracle_solve(&params)?;
        Some(
            sol.h
                .iter()
                .zip(&slow.h)
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .map(|(a, b)| ((a - b) / b).abs())
                .fold(0.0f64, f64::max),
        )
    } else {
        None
    };

    if args.csv {
        return write_csv_stdout(|w| {
            if args.full_vector {
                w.write_record(["k", "h"])?;
                for (k, h) in sol.h.iter().enumerate() {
                    w.write_record([k.to_string(), h.to_string()])?;
                }
            } else {
                w.write_record(["n", "p", "h0", "residual_inf", "overflow"])?;
                w.write_record([
                    args.n.to_string(),
                    args.p.to_string(),
                    sol.h0().to_string(),
                    sol.residual_inf.to_string(),
                    sol.overflow.to_string(),
                ])?;
            }
            Ok(())
        });
    }

    #[derive(Serialize)]
    struct Report {
        n: usize,
        p: f64,
        h0: f64,
        residual_inf: f64,
        overflow: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        h: Option<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle_max_rel_diff: Option<f64>,
    }
    print_json(&Report {
        n: args.n,
        p: args.p,
        h0: sol.h0(),
        residual_inf: sol.residual_inf,
        overflow: sol.overflow,
        h: args.full_vector.then(|| sol.h.clone()),
        oracle_max_rel_diff: oracle_diff,
    })
}

#[derive(Serialize)]
struct SimRow {
    replication: u64,
    seed: u64,
    hitting_time: Option<u64>,
    censored: bool,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let params = Params::new(args.n, args.p)?;
    if args.runs < 1 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let stats = batch_hitting_stats(&params, args.runs, args.seed, args.max_steps);

    if let Some(out) = &args.out {
        let mut w = csv::Writer::from_path(out)?;
        for o in &stats.outcomes {
            w.serialize(SimRow {
                replication: o.replication,
                seed: o.seed,
                hitting_time: o.hitting_time,
                censored: o.censored(),
            })?;
        }
        w.flush()?;
        write_manifest(out, &RunManifest::new("simulate", Some(args.seed)))?;
    }

    #[derive(Serialize)]
    struct Summary {
        n: usize,
        p: f64,
        runs: u64,
        seed: u64,
        max_steps: u64,
        mean: Option<f64>,
        stderr: Option<f64>,
        censored: u64,
    }
    print_json(&Summary {
        n: args.n,
        p: args.p,
        runs: args.runs,
        seed: args.seed,
        max_steps: args.max_steps,
        mean: stats.mean,
        stderr: stats.stderr(),
        censored: stats.censored,
    })
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: u64,
    mean_fraction: f64,
    stderr: f64,
    theory: f64,
}

fn trajectory_rows(params: &Params, args: &TrajectoryArgs) -> Vec<TrajectoryRow> {
    let n = params.n() as f64;
    let model = MarginalModel::from_params(params);
    let len = args.horizon as usize + 1;
    let mut sum = vec![0.0f64; len];
    let mut sum_sq = vec![0.0f64; len];
    for r in 0..args.runs {
        let rec = simulate_trajectory_rep(params, args.seed, r, args.horizon);
        for (t, &k) in rec.sizes.iter().enumerate() {
            let frac = k as f64 / n;
            sum[t] += frac;
            sum_sq[t] += frac * frac;
        }
    }
    let runs = args.runs as f64;
    (0..len)
        .map(|t| {
            let mean = sum[t] / runs;
            let stderr = if args.runs < 2 {
                0.0
            } else {
                let var = (sum_sq[t] - runs * mean * mean).max(0.0) / (runs - 1.0);
                (var / runs).sqrt()
            };
            TrajectoryRow {
                t: t as u64,
                mean_fraction: mean,
                stderr,
                // E|S_t| = n q_t by symmetry, so the mean fraction is q_t.
                theory: model.q_at(t as u64, 0.0),
            }
        })
        .collect()
}

fn cmd_trajectory(args: TrajectoryArgs) -> Result<(), CliError> {
    let params = Params::new(args.n, args.p)?;
    if args.runs < 1 || args.horizon < 1 {
        return Err(CliError::Usage("--runs and --horizon must be at least 1".into()));
    }
    let rows = trajectory_rows(&params, &args);
    match &args.out {
        Some(out) => {
            let mut w = csv::Writer::from_path(out)?;
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
            write_manifest(out, &RunManifest::new("trajectory", Some(args.seed)))?;
        }
        None => write_csv_stdout(|w| {
            for row in &rows {
                w.serialize(row)?;
            }
            Ok(())
        })?,
    }
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let params = Params::new(args.n, args.p)?;
    let model = MarginalModel::from_params(&params);
    let epsilon = args.epsilon.unwrap_or_else(|| default_epsilon(&params));
    if epsilon <= 0.0 {
        return Err(CliError::Usage(format!(
            "--epsilon must be positive, got {epsilon}"
        )));
    }
    let regime = hitting_regime(&params);

    // The mean-field interval needs epsilon < q*; report it only when the
    // instance admits one (p < 1 and epsilon in range).
    let mean_field = mean_field_interval(&params, epsilon).ok();
    let (rho, upper) = if params.p() < 1.0 {
        let e = escape_rate(&params, epsilon)?;
        let ub = unconditional_upper_bound(&params, epsilon)?;
        (Some(e.rho), Some(ub))
    } else {
        (None, None)
    };

    let metastability = match args.delta {
        Some(delta) => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(CliError::Usage(format!(
                    "--delta must lie in (0, 1), got {delta}"
                )));
            }
            let variant = if params.n() as f64 * params.p() <= 10.0 {
                MetastabilityVariant::SmallP
            } else {
                MetastabilityVariant::LargeP
            };
            Some(metastability_deviation_bound(&params, delta, args.window, variant)?)
        }
        None => None,
    };

    #[derive(Serialize)]
    struct MeanFieldReport {
        rigor: &'static str,
        lower: LogQuantity,
        upper: LogQuantity,
    }
    #[derive(Serialize)]
    struct MetastabilityReport {
        rigor: &'static str,
        delta: f64,
        window: u64,
        variant: String,
        prob_bound: LogQuantity,
        vacuous: bool,
    }
    #[derive(Serialize)]
    struct Report {
        n: usize,
        p: f64,
        epsilon: f64,
        q_star: f64,
        a: f64,
        b: f64,
        t_mix: u64,
        regime: &'static str,
        regime_scale: LogQuantity,
        rigorous_lower: LogQuantity,
        #[serde(skip_serializing_if = "Option::is_none")]
        rigorous_upper: Option<LogQuantity>,
        #[serde(skip_serializing_if = "Option::is_none")]
        rho: Option<LogQuantity>,
        #[serde(skip_serializing_if = "Option::is_none")]
        mean_field: Option<MeanFieldReport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        metastability: Option<MetastabilityReport>,
    }
    print_json(&Report {
        n: args.n,
        p: args.p,
        epsilon,
        q_star: model.q_star(),
        a: model.a(),
        b: model.b(),
        t_mix: model.mixing_time(epsilon),
        regime: regime_label(regime.regime),
        regime_scale: regime.scale.into(),
        rigorous_lower: unconditional_lower_bound(&params).into(),
        rigorous_upper: upper.map(Into::into),
        rho: rho.map(Into::into),
        mean_field: mean_field.map(|mf| MeanFieldReport {
            rigor: "heuristic",
            lower: mf.lower.into(),
            upper: mf.upper.into(),
        }),
        metastability: metastability.map(|m| MetastabilityReport {
            rigor: "rigorous",
            delta: m.delta,
            window: m.window,
            variant: format!("{:?}", m.variant),
            prob_bound: m.prob_bound.into(),
            vacuous: m.vacuous,
        }),
    })
}

fn parse_p_values(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    let parse = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad p value: {s:?}")))
    };
    let values = match (&args.p_list, &args.p_grid) {
        (Some(list), None) => list
            .split(',')
            .map(parse)
            .collect::<Result<Vec<_>, _>>()?,
        (None, Some(grid)) => {
            let parts: Vec<&str> = grid.split(':').collect();
            if parts.len() != 3 {
                return Err(CliError::Usage(format!(
                    "--p-grid expects start:stop:step, got {grid:?}"
                )));
            }
            let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
            if step <= 0.0 || stop < start {
                return Err(CliError::Usage("--p-grid needs step > 0 and stop >= start".into()));
            }
            let mut values = Vec::new();
            let mut i = 0u64;
            loop {
                let v = start + i as f64 * step;
                if v > stop + 1e-12 {
                    break;
                }
                values.push(v.min(stop));
                i += 1;
            }
            values
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --p-list or --p-grid is required".into(),
            ))
        }
    };
    if values.is_empty() {
        return Err(CliError::Usage("empty p grid".into()));
    }
    Ok(values)
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    p: f64,
    exact_h0: f64,
    exact_overflow: bool,
    sim_mean: Option<f64>,
    sim_stderr: Option<f64>,
    censored: u64,
    lb_log10: f64,
    ub_log10: f64,
    mf_upper_log10: Option<f64>,
    regime: &'static str,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let p_values = parse_p_values(&args)?;
    let mut rows = Vec::with_capacity(p_values.len());
    for &p in &p_values {
        let params = Params::new(args.n, p)?;
        let q_star = MarginalModel::from_params(&params).q_star();
        let epsilon = 0.1 * q_star;

        let (exact_h0, exact_overflow) = match solve_hitting_times(&params) {
            Ok(sol) => (sol.h0(), sol.overflow),
            // p = 1: the collection never completes.
            Err(cccp::Error::NonAbsorbing) => (f64::INFINITY, true),
            Err(e) => return Err(e.into()),
        };
        let stats = batch_hitting_stats(&params, args.runs, args.seed, args.max_steps);
        let ub_log10 = if params.p() < 1.0 {
            unconditional_upper_bound(&params, epsilon)?.log10()
        } else {
            f64::INFINITY
        };
        let mf_upper_log10 = mean_field_interval(&params, epsilon)
            .ok()
            .map(|mf| mf.upper.log10());
        rows.push(SweepRow {
            n: args.n,
            p,
            exact_h0,
            exact_overflow,
            sim_mean: stats.mean,
            sim_stderr: stats.stderr(),
            censored: stats.censored,
            lb_log10: unconditional_lower_bound(&params).log10(),
            ub_log10,
            mf_upper_log10,
            regime: regime_label(hitting_regime(&params).regime),
        });
    }

    match &args.out {
        Some(out) => {
            let mut w = csv::Writer::from_path(out)?;
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
            write_manifest(out, &RunManifest::new("sweep", Some(args.seed)))?;
        }
        None => write_csv_stdout(|w| {
            for row in &rows {
                w.serialize(row)?;
            }
            Ok(())
        })?,
    }
    Ok(())
}

fn cmd_metastable(args: MetastableArgs) -> Result<(), CliError> {
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::Usage(format!(
            "--delta must lie in (0, 1), got {}",
            args.delta
        )));
    }
    if args.runs < 1 || args.window < 1 {
        return Err(CliError::Usage("--runs and --window must be at least 1".into()));
    }
    let params = Params::new(args.n, args.p)?;
    let model = MarginalModel::from_params(&params);
    let q_star = model.q_star();
    let n = params.n() as f64;

    let variant = if n * params.p() <= 10.0 {
        MetastabilityVariant::SmallP
    } else {
        MetastabilityVariant::LargeP
    };
    let bound = metastability_deviation_bound(&params, args.delta, args.window, variant)?;

    // Watch the band after the marginal has mixed to within delta q* / 2.
    let epsilon = (args.delta * q_star / 2.0).max(f64::MIN_POSITIVE);
    let t_mix = model.mixing_time(epsilon);
    let band = 2.0 * args.delta * q_star;
    let mut violating_runs = 0u64;
    for r in 0..args.runs {
        let rec = simulate_trajectory_rep(&params, args.seed, r, t_mix + args.window);
        let violated = rec.sizes[t_mix as usize..]
            .iter()
            .any(|&k| (k as f64 / n - q_star).abs() > band);
        if violated {
            violating_runs += 1;
        }
    }

    #[derive(Serialize)]
    struct Report {
        n: usize,
        p: f64,
        delta: f64,
        window: u64,
        runs: u64,
        seed: u64,
        q_star: f64,
        t_mix: u64,
        band_halfwidth: f64,
        variant: String,
        analytic_prob_bound: LogQuantity,
        vacuous: bool,
        empirical_violation_frequency: f64,
    }
    print_json(&Report {
        n: args.n,
        p: args.p,
        delta: args.delta,
        window: args.window,
        runs: args.runs,
        seed: args.seed,
        q_star,
        t_mix,
        band_halfwidth: band,
        variant: format!("{variant:?}"),
        analytic_prob_bound: bound.prob_bound.into(),
        vacuous: bound.vacuous,
        empirical_violation_frequency: violating_runs as f64 / args.runs as f64,
    })
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut path = out.as_os_str().to_owned();
    path.push(".manifest.json");
    let body = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, body + "\n")?;
    Ok(())
}
