//! `philos`: trust arithmetic, canonical trace replays, scenario
//! simulation, and incentive checks from the command line.
//!
//! Exit codes: 0 on success or verified output, 1 when a verification
//! fails (replay mismatch, incentive counterexample, battery failure),
//! 2 on usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use philos_trust::sim::{
    fig6_config, replay_figure, run_config, verify_figure, Figure, SimConfig, SimResult,
};
use philos_trust::trust::BridgeObservation;
use philos_trust::{
    boundary_scenarios, brute_force_incentive_check, calibrate_beta, max_safe_list_size,
    max_safe_list_size_avg, random_agreement_sweep, safe_size_soundness_sweep, update_trust,
    RawTrust, TrustParams,
};

/// Overridden by the `PHILOS_OUT_DIR` environment variable; flags win
/// over the environment.
const OUT_DIR_ENV: &str = "PHILOS_OUT_DIR";

const EXIT_VERIFICATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "philos",
    version,
    about = "Trust scoring, sync-list traces, and scenario simulation for the Philos blockchain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate the decay base and print the derived constants
    Params(ParamsArgs),
    /// Replay a canonical trace (fig3, fig4, fig5) and verify it
    Replay(ReplayArgs),
    /// Simulate scenario configs into trajectory and event CSV files
    Simulate(SimulateArgs),
    /// Sweep the sabotage-incentive condition and print size bounds
    Incentive(IncentiveArgs),
    /// Run the built-in verification battery
    Verify,
}

#[derive(Args)]
struct ParamsArgs {
    /// Months for a perfect peer to reach the target share of equilibrium
    #[arg(long, default_value_t = 6.0)]
    months: f64,
    /// Target share of equilibrium trust, in percent
    #[arg(long, default_value_t = 90.0)]
    pct: f64,
    /// Prime step length in minutes
    #[arg(long = "prime-min", default_value_t = 10.0)]
    prime_min: f64,
    /// Maximum bridge interval in prime steps
    #[arg(long, default_value_t = 48)]
    delta: u32,
}

#[derive(Args)]
struct ReplayArgs {
    /// Which trace to replay: fig3, fig4, or fig5
    figure: Figure,
    /// Output CSV path (default: <out-dir>/<figure>.csv)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output directory (default: $PHILOS_OUT_DIR or .)
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config file (default: the bundled three-policy config)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $PHILOS_OUT_DIR or .)
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct IncentiveArgs {
    /// Brute-force this many random scenarios against the closed form
    #[arg(long)]
    random: Option<u64>,
    /// Seed for the random sweep
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Print safe-list-size bounds for a system snapshot
    #[arg(long)]
    bound: bool,
    /// Total system trust for the bound
    #[arg(long = "total-trust")]
    total_trust: Option<f64>,
    /// Peer count for the averaged bound
    #[arg(long)]
    peers: Option<u64>,
    /// Average peer trust for the averaged bound
    #[arg(long = "avg-trust")]
    avg_trust: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Params(args) => cmd_params(&args),
        Command::Replay(args) => cmd_replay(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Incentive(args) => cmd_incentive(&args),
        Command::Verify => cmd_verify(),
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn io_error(path: &Path, err: &std::io::Error) -> ExitCode {
    eprintln!("error: {}: {err}", path.display());
    ExitCode::from(EXIT_VERIFICATION)
}

fn cmd_params(args: &ParamsArgs) -> ExitCode {
    let exact: f64 = match calibrate_beta(args.months, args.pct / 100.0, args.prime_min) {
        Ok(b) => b,
        Err(err) => {
            return usage_error(&format!(
                "{err}\nhint: --months > 0, 0 < --pct < 100, --prime-min > 0"
            ))
        }
    };
    // the system runs on the 10-decimal published form of the base, so
    // the derived constants are computed from it too
    let beta = (exact * 1e10).round() / 1e10;
    let params = match TrustParams::new(beta, args.delta, args.prime_min) {
        Ok(p) => p,
        Err(err) => return usage_error(&err.to_string()),
    };
    println!("beta         = {beta:.10}");
    println!("calibrated   = {exact}");
    println!("beta^delta   = {}", params.delta_decay());
    println!("T*           = {}", params.equilibrium_trust().value());
    println!(
        "steps/day    = {} ({} primaries per bridge interval)",
        params.steps_per_day(),
        params.delta()
    );
    ExitCode::SUCCESS
}

fn cmd_replay(args: &ReplayArgs) -> ExitCode {
    let trace = replay_figure(args.figure);
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| out_dir(&args.out_dir).join(format!("{}.csv", args.figure)));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(err) = fs::create_dir_all(parent) {
                return io_error(parent, &err);
            }
        }
    }
    if let Err(err) = fs::write(&path, trace.to_csv_string()) {
        return io_error(&path, &err);
    }
    match verify_figure(args.figure) {
        Ok(()) => {
            println!(
                "{}: {} rows, {} bridges, all match ({})",
                args.figure,
                trace.rows.len(),
                trace.bridges.len(),
                path.display()
            );
            ExitCode::SUCCESS
        }
        Err(mismatch) => {
            eprintln!("replay diverged: {mismatch}");
            ExitCode::from(EXIT_VERIFICATION)
        }
    }
}

fn summarize(result: &SimResult<f64>) {
    let s = &result.summary;
    let fraction = s
        .final_fraction
        .map(|f| format!("{f:.6}"))
        .unwrap_or_else(|| "n/a".to_string());
    let drawdown = match s.max_drawdown_step {
        Some(k) => format!("{:.6} at step {k}", s.max_drawdown),
        None => "none".to_string(),
    };
    println!(
        "{}: final trust {:.6} (fraction {fraction}), bridges {}, misses {}, max drawdown {drawdown}",
        s.label, s.final_trust, s.bridges, s.misses
    );
}

fn cmd_simulate(args: &SimulateArgs) -> ExitCode {
    let text = match &args.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(err) => {
                eprintln!("error: {}: {err}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => {
            println!("using the bundled three-policy config");
            philos_trust::FIG6_CONFIG_TOML.to_string()
        }
    };
    let cfg = match SimConfig::<f64>::from_toml_str(&text) {
        Ok(c) => c,
        Err(err) => return usage_error(&err.to_string()),
    };
    let results = match run_config(&cfg) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_VERIFICATION);
        }
    };

    let dir = out_dir(&args.out_dir);
    if let Err(err) = fs::create_dir_all(&dir) {
        return io_error(&dir, &err);
    }
    for result in &results {
        let label = result.trajectory.label();
        let trajectory_path = dir.join(format!("{label}_trajectory.csv"));
        if let Err(err) = fs::write(&trajectory_path, result.trajectory.to_csv_string()) {
            return io_error(&trajectory_path, &err);
        }
        let events_path = dir.join(format!("{label}_events.csv"));
        if let Err(err) = fs::write(&events_path, result.state.log().to_csv_string()) {
            return io_error(&events_path, &err);
        }
        summarize(result);
    }
    println!(
        "wrote {} trajectory/event file pairs to {}",
        results.len(),
        dir.display()
    );
    ExitCode::SUCCESS
}

fn cmd_incentive(args: &IncentiveArgs) -> ExitCode {
    let params: TrustParams = TrustParams::reference();
    if args.random.is_none() && !args.bound {
        return usage_error("nothing to do: pass --random <count> and/or --bound");
    }

    if args.bound {
        let picked = args.total_trust.is_some() || (args.peers.is_some() && args.avg_trust.is_some());
        if !picked {
            return usage_error("--bound needs --total-trust, or --peers with --avg-trust");
        }
        if let Some(total) = args.total_trust {
            let total = match RawTrust::new(total) {
                Ok(t) => t,
                Err(err) => return usage_error(&err.to_string()),
            };
            println!(
                "safe list size (total trust {}): {}",
                total.value(),
                max_safe_list_size(total, &params)
            );
        }
        if let (Some(peers), Some(avg)) = (args.peers, args.avg_trust) {
            let avg = match RawTrust::new(avg) {
                Ok(t) => t,
                Err(err) => return usage_error(&err.to_string()),
            };
            println!(
                "safe list size ({peers} peers averaging {}): {}",
                avg.value(),
                max_safe_list_size_avg(peers, avg, &params)
            );
        }
    }

    if let Some(count) = args.random {
        if count == 0 {
            return usage_error("--random needs at least one scenario");
        }
        let sweep = random_agreement_sweep(count, args.seed, &params, 1, 12);
        println!(
            "{}/{} agree, {} counterexamples (seed {})",
            sweep.agreements,
            sweep.checked,
            sweep.counterexamples.len(),
            args.seed
        );
        if !sweep.all_agree() {
            if let Some(cx) = sweep.counterexamples.first() {
                eprintln!(
                    "first counterexample (scenario {}): honest {} vs sabotage {}, condition {}",
                    cx.index,
                    cx.report.honest_utility,
                    cx.report.sabotage_utility,
                    cx.report.condition
                );
            }
            return ExitCode::from(EXIT_VERIFICATION);
        }
    }
    ExitCode::SUCCESS
}

type CheckResult = Result<String, String>;

fn check_calibration(params: &TrustParams) -> CheckResult {
    let six: f64 = calibrate_beta(6.0, 0.9, 10.0).map_err(|e| e.to_string())?;
    let twelve: f64 = calibrate_beta(12.0, 0.9, 10.0).map_err(|e| e.to_string())?;
    if (six - 0.999_911_169_6).abs() > 1e-9 {
        return Err(format!("6-month base {six:.12} off 0.9999111696"));
    }
    if (twelve - 0.999_955_583_8).abs() > 1e-9 {
        return Err(format!("12-month base {twelve:.12} off 0.9999555838"));
    }
    if (params.beta() - six).abs() > 1e-10 {
        return Err("default regime does not match the 6-month calibration".to_string());
    }
    Ok(format!("{six:.10} / {twelve:.10} within 1e-9"))
}

fn check_replays() -> CheckResult {
    for figure in Figure::ALL {
        verify_figure(figure).map_err(|m| m.to_string())?;
    }
    Ok("fig3, fig4, fig5 exact".to_string())
}

fn check_update_bounds(params: &TrustParams) -> CheckResult {
    let t_star = params.equilibrium_trust().value();
    let delta = u64::from(params.delta());
    let perfect = BridgeObservation::new(delta, 0, params.delta()).expect("perfect obs is valid");

    let at_star = update_trust(RawTrust::new(t_star).unwrap(), &perfect, params).value();
    if ((at_star - t_star) / t_star).abs() > 1e-12 {
        return Err(format!("equilibrium moved: {at_star} vs {t_star}"));
    }

    let one_minus_decay = 1.0 - params.delta_decay();
    for i in 0..10_000u64 {
        let t = t_star * (i as f64) / 10_000.0;
        let updated = update_trust(RawTrust::new(t).unwrap(), &perfect, params).value();
        let closed = t + one_minus_decay * (t_star - t);
        if updated <= t || ((updated - closed) / closed).abs() > 1e-12 {
            return Err(format!("perfect update broke closed form at {t}"));
        }
    }

    let ceiling = t_star * (1.0 + 1e-12);
    for elapsed in 1..=2 * delta {
        for s_m in 1..=elapsed.min(delta) as u32 {
            for i in 0..=8u64 {
                let prev = t_star * (i as f64) / 8.0;
                let obs = BridgeObservation::new(elapsed, 0, s_m).expect("grid obs is valid");
                let updated = update_trust(RawTrust::new(prev).unwrap(), &obs, params).value();
                if updated > ceiling {
                    return Err(format!(
                        "ceiling broken: {updated} (prev {prev}, elapsed {elapsed}, s_m {s_m})"
                    ));
                }
            }
        }
    }
    Ok("fixed point, closed form, ceiling held".to_string())
}

fn check_convergence(params: &TrustParams) -> CheckResult {
    let t_star = params.equilibrium_trust().value();
    let delta = u64::from(params.delta());
    let mut trust = RawTrust::new(0.0).unwrap();
    let mut bridges = 0u64;
    let mut crossed = None;
    while ((trust.value() - t_star) / t_star).abs() > 1e-9 {
        let k = (bridges + 1) * delta;
        let obs = BridgeObservation::new(k, k - delta, params.delta()).expect("cadence is valid");
        trust = update_trust(trust, &obs, params);
        bridges += 1;
        if crossed.is_none() && trust.value() >= 0.9 * t_star {
            crossed = Some(bridges);
        }
        if bridges >= 100_000 {
            return Err("no convergence after 100000 bridges".to_string());
        }
    }
    match crossed {
        Some(n) if (539..=541).contains(&n) => {
            Ok(format!("converged after {bridges} bridges, 0.9 crossed at {n}"))
        }
        Some(n) => Err(format!("0.9 equilibrium crossed at bridge {n}, expected 540 +/- 1")),
        None => Err("0.9 equilibrium never crossed".to_string()),
    }
}

fn check_yearlong_policies() -> CheckResult {
    let cfg = fig6_config::<f64>();
    let t_star = cfg.params.equilibrium_trust().value();
    let results = run_config(&cfg).map_err(|e| e.to_string())?;
    let steady = &results[0];
    let lapse = &results[1];
    let mixed = &results[2];

    for pair in steady.trajectory.samples().windows(2) {
        if pair[1].raw_trust < pair[0].raw_trust {
            return Err(format!("steady trust fell at step {}", pair[1].k));
        }
    }
    let bridge_540 = steady.trajectory.samples()[539];
    if bridge_540.k != 25_920 || ((bridge_540.raw_trust - 0.9 * t_star) / (0.9 * t_star)).abs() > 1e-3
    {
        return Err(format!(
            "540th steady bridge at step {} trust {}",
            bridge_540.k, bridge_540.raw_trust
        ));
    }

    if lapse.summary.max_drawdown_step != Some(18_289)
        || lapse.summary.max_drawdown <= mixed.summary.max_drawdown
        || lapse.summary.max_drawdown <= steady.summary.max_drawdown
    {
        return Err(format!(
            "gap bridge drop {:?} at {:?} is not the deepest",
            lapse.summary.max_drawdown, lapse.summary.max_drawdown_step
        ));
    }

    let finals = [
        steady.summary.final_trust,
        lapse.summary.final_trust,
        mixed.summary.final_trust,
    ];
    for a in finals {
        for b in finals {
            if (a - b).abs() / a.max(b) > 0.026 {
                return Err(format!("day-365 spread too wide: {a} vs {b}"));
            }
        }
    }
    Ok(format!(
        "steady monotone, deepest drop {:.4} at step 18289, finals within 2.6%",
        lapse.summary.max_drawdown
    ))
}

fn check_incentive_agreement(params: &TrustParams) -> CheckResult {
    let sweep = random_agreement_sweep(1000, 7, params, 1, 12);
    if !sweep.all_agree() {
        return Err(format!(
            "{} counterexamples in {} scenarios",
            sweep.counterexamples.len(),
            sweep.checked
        ));
    }
    let boundaries = boundary_scenarios::<f64>(12);
    for scenario in &boundaries {
        let report = brute_force_incentive_check(scenario).map_err(|e| e.to_string())?;
        let split = (report.honest_utility - report.sabotage_utility).abs();
        if (report.condition - 1.0).abs() > 1e-12
            || split > 1e-12 * report.honest_utility
            || !report.agree
        {
            return Err(format!("boundary tie broke: condition {}", report.condition));
        }
    }
    Ok(format!(
        "{}/{} random agree, {} exact ties agree",
        sweep.agreements,
        sweep.checked,
        boundaries.len()
    ))
}

fn check_size_bound_soundness(params: &TrustParams) -> CheckResult {
    let summary = safe_size_soundness_sweep(100, 42, params);
    if !summary.violations.is_empty() {
        return Err(format!(
            "{} profitable sabotages inside the bound",
            summary.violations.len()
        ));
    }
    if summary.witnesses_confirmed != summary.systems {
        return Err(format!(
            "only {}/{} above-bound witnesses profited",
            summary.witnesses_confirmed, summary.systems
        ));
    }
    Ok(format!(
        "{} lists across {} systems, zero violations, all witnesses profit",
        summary.lists_checked, summary.systems
    ))
}

fn cmd_verify() -> ExitCode {
    let params: TrustParams = TrustParams::reference();
    let checks: [(&str, CheckResult); 7] = [
        ("calibration", check_calibration(&params)),
        ("trace replays", check_replays()),
        ("update-rule bounds", check_update_bounds(&params)),
        ("equilibrium convergence", check_convergence(&params)),
        ("year-long policies", check_yearlong_policies()),
        ("incentive agreement", check_incentive_agreement(&params)),
        ("size-bound soundness", check_size_bound_soundness(&params)),
    ];
    let mut failed = 0;
    for (name, outcome) in &checks {
        match outcome {
            Ok(detail) => println!("ok   {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        println!("verified: {} checks passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("verification failed: {failed} of {} checks", checks.len());
        ExitCode::from(EXIT_VERIFICATION)
    }
}
