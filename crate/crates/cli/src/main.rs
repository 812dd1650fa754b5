//! `truncgrad` command line: run sparse online learning experiments, check
//! the acceptance criteria, sweep regret scaling, drive the reversible
//! circuit simulator, and Monte-Carlo test the estimator contracts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use truncgrad::acceptance::{run_all, Profile};
use truncgrad::circuit::{FixedPointFormat, TruncationCircuit};
use truncgrad::config::RunConfig;
use truncgrad::engine::{audit_run, ledger_closed_form, run_quantum_emulated, PresetSource};
use truncgrad::estimators::{
    derive_rng, est_inner_product, est_l1_norm, sample_index, AmplitudeEstimator, NoiseMode,
    NormMode,
};
use truncgrad::regret::{
    best_fixed_comparator, regularized_regret_lhs, scaling_experiment, theorem_rhs,
    ComparatorConfig, RunMode, ScalingConfig,
};
use truncgrad::trace::RunTrace;
use truncgrad::truncation::classical_online_run;
use truncgrad::{ProblemKind, Real};

/// Sparse online learning with truncated gradients, estimator emulation,
/// and a reversible-circuit simulator.
#[derive(Parser)]
#[command(name = "truncgrad", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one configured run and write trace/ledger/report files.
    Run(RunArgs),
    /// Run the acceptance suite; exits nonzero if any criterion fails.
    Verify(VerifyArgs),
    /// Regret-scaling sweep over a grid of horizons.
    Sweep(SweepArgs),
    /// Simulate the reversible truncation circuit.
    SimulateCircuit(SimulateArgs),
    /// Monte-Carlo checks of the estimator contracts.
    EstimatorsTest(EstimatorsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config's, then $TRUNCGRAD_OUT_DIR, then
    /// ./truncgrad-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Reduced horizons and seed counts; a smoke run.
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Problem kind: logistic | hinge | squared.
    #[arg(long)]
    kind: ProblemKind,
    /// Horizons to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![64usize, 256, 1024, 4096])]
    t_grid: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    seeds: usize,
    #[arg(long, default_value_t = 64)]
    dimension: usize,
    /// classical | quantum | both.
    #[arg(long, default_value = "both")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Total register bits (2..=24).
    #[arg(long, default_value_t = 12)]
    bits: u8,
    /// Fractional bits.
    #[arg(long, default_value_t = 6)]
    frac: u8,
    /// Shrinkage α (must lie on the format grid).
    #[arg(long)]
    alpha: f64,
    /// Threshold θ (must lie on the format grid).
    #[arg(long)]
    theta: f64,
    /// One input value to truncate.
    #[arg(long, conflicts_with = "exhaustive", allow_negative_numbers = true)]
    x: Option<f64>,
    /// Sweep every representable input.
    #[arg(long)]
    exhaustive: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimatorsArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::SimulateCircuit(args) => cmd_simulate(args),
        Command::EstimatorsTest(args) => cmd_estimators(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn resolve_out_dir(flag: Option<PathBuf>, config_dir: Option<&str>) -> PathBuf {
    flag.or_else(|| config_dir.map(PathBuf::from))
        .or_else(|| std::env::var_os("TRUNCGRAD_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("truncgrad-out"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct RunReport {
    kind: ProblemKind,
    rounds: usize,
    mean_loss: Real,
    final_nnz: Option<usize>,
    ledger_total: Option<Real>,
    ledger_closed_form: Option<Real>,
    regret_lhs: Option<Real>,
    regret_rhs: Option<Real>,
    bound_held: Option<bool>,
    comparator_norm: Option<Real>,
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut config: RunConfig<Real> =
        RunConfig::load(&args.config).with_context(|| "loading run config")?;
    config.validate()?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = resolve_out_dir(args.out_dir, config.output_dir.as_deref());
    std::fs::create_dir_all(&out_dir)?;

    let dataset = config.resolve_dataset()?;
    let t_rounds = config.effective_rounds(dataset.len());
    if t_rounds > dataset.len() {
        bail!(
            "config wants {t_rounds} rounds but the dataset has {} examples",
            dataset.len()
        );
    }
    let stream = &dataset.examples[..t_rounds];
    let params = config.engine_params(t_rounds)?;

    let started = Instant::now();
    let trace: RunTrace<Real> = match config.mode.into() {
        RunMode::QuantumEmulated => {
            if config.audit {
                audit_run(&params, stream)?
            } else {
                run_quantum_emulated(&params, stream)?
            }
        }
        RunMode::ClassicalExact => classical_online_run(config.kind, stream, &params.trunc, None)?,
    };
    let elapsed = started.elapsed();

    // Regret evaluation needs exact side data, which audit runs and
    // classical runs both carry.
    let has_exact = trace.rounds.iter().all(|r| r.y_hat_exact.is_some());
    let (regret_lhs, regret_rhs, bound_held, comparator_norm) = if has_exact {
        let comparator = best_fixed_comparator(config.kind, stream, &ComparatorConfig::default())?;
        let lhs =
            regularized_regret_lhs(&trace, stream, comparator.u_star.as_slice(), &params.trunc)?;
        let d_bound = match config.kind {
            ProblemKind::Squared => Some(
                trace
                    .rounds
                    .iter()
                    .map(|r| (r.y - r.y_hat_exact.unwrap()).abs())
                    .fold(0.0, Real::max),
            ),
            _ => None,
        };
        let rhs = theorem_rhs(
            config.kind,
            t_rounds,
            config.c_bound,
            params.trunc.gravity.g_max(),
            comparator.u_star.l2_norm(),
            d_bound,
        )?;
        (
            Some(lhs),
            Some(rhs),
            Some(lhs <= rhs),
            Some(comparator.u_star.l2_norm()),
        )
    } else {
        (None, None, None, None)
    };

    let report = RunReport {
        kind: config.kind,
        rounds: t_rounds,
        mean_loss: trace.mean_loss(),
        final_nnz: trace.rounds.last().and_then(|r| r.nnz),
        ledger_total: trace.ledger.as_ref().map(|l| l.total()),
        ledger_closed_form: (params.preset_source == PresetSource::Theorem
            && trace.ledger.is_some())
        .then(|| ledger_closed_form(&params)),
        regret_lhs,
        regret_rhs,
        bound_held,
        comparator_norm,
    };

    let trace_path = out_dir.join("trace.jsonl");
    let mut buf = Vec::new();
    trace.write_jsonl(&mut buf)?;
    std::fs::write(&trace_path, buf)?;
    if let Some(ledger) = &trace.ledger {
        write_json(&out_dir.join("ledger.json"), ledger)?;
    }
    write_json(&out_dir.join("report.json"), &report)?;
    write_json(&out_dir.join("config.json"), &config)?;
    // Timestamps stay out of the deterministic artifacts.
    write_json(
        &out_dir.join("meta.json"),
        &serde_json::json!({
            "elapsed_seconds": elapsed.as_secs_f64(),
            "unix_time": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )?;

    println!(
        "run complete: {} rounds, mean loss {:.6}, outputs in {}",
        t_rounds,
        report.mean_loss,
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let profile = if args.quick {
        Profile::Quick
    } else {
        Profile::Full
    };
    let reports = run_all(profile);
    let mut all_passed = true;
    for report in &reports {
        println!("{report}");
        all_passed &= report.passed;
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let modes: Vec<RunMode> = match args.mode.as_str() {
        "classical" => vec![RunMode::ClassicalExact],
        "quantum" => vec![RunMode::QuantumEmulated],
        "both" => vec![RunMode::ClassicalExact, RunMode::QuantumEmulated],
        other => bail!("unknown mode {other:?} (classical|quantum|both)"),
    };
    let out_dir = resolve_out_dir(args.out_dir, None);
    std::fs::create_dir_all(&out_dir)?;

    let mut csv = String::from("kind,mode,t,median,slope\n");
    let mut results = Vec::new();
    for mode in modes {
        let mut config =
            ScalingConfig::<Real>::new(args.kind, args.t_grid.clone(), args.seeds, mode);
        config.dimension = args.dimension;
        config.base_seed = args.seed;
        let result = scaling_experiment(&config)?;
        let slope_text = result
            .slope
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "degenerate".into());
        println!("{} / {:?}: slope {slope_text}", args.kind, mode);
        for (t, median) in &result.medians {
            println!("  T = {t:5}  median regret = {median:.6e}");
            csv.push_str(&format!(
                "{},{:?},{},{},{}\n",
                args.kind, mode, t, median, slope_text
            ));
        }
        results.push(serde_json::json!({
            "mode": format!("{mode:?}"),
            "medians": result.medians,
            "slope": result.slope,
            "degenerate": result.degenerate,
        }));
    }
    std::fs::write(out_dir.join("sweep.csv"), csv)?;
    write_json(&out_dir.join("sweep.json"), &results)?;
    println!("sweep outputs in {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CircuitRecord {
    x: f64,
    output: f64,
    ancilla_clean: bool,
    toffoli_count: u64,
    toffoli_depth: u64,
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let fmt = FixedPointFormat::new(args.bits, args.frac)?;
    let mut circuit =
        TruncationCircuit::build(fmt, fmt.encode(args.alpha)?, fmt.encode(args.theta)?)?;

    let inputs: Vec<u64> = if args.exhaustive {
        (0..fmt.cardinality()).collect()
    } else {
        let x = args
            .x
            .ok_or_else(|| anyhow::anyhow!("provide --x VALUE or --exhaustive"))?;
        vec![fmt.encode(x)?]
    };

    let mut records = Vec::with_capacity(inputs.len());
    let mut all_clean = true;
    for x in inputs {
        let run = circuit.run(x)?;
        all_clean &= run.ancilla_clean;
        records.push(CircuitRecord {
            x: fmt.decode(x),
            output: fmt.decode(run.output),
            ancilla_clean: run.ancilla_clean,
            toffoli_count: run.stats.toffoli_count,
            toffoli_depth: run.stats.toffoli_depth,
        });
    }

    let report = serde_json::json!({
        "format": fmt.describe(),
        "alpha": args.alpha,
        "theta": args.theta,
        "all_ancillas_clean": all_clean,
        "runs": records,
    });
    match &args.out {
        Some(path) => {
            write_json(path, &report)?;
            println!(
                "{} circuit runs written to {} (ancillas clean: {all_clean})",
                report["runs"].as_array().unwrap().len(),
                path.display()
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimators(args: EstimatorsArgs) -> anyhow::Result<ExitCode> {
    let trials = args.trials.max(10);
    let mut rng = derive_rng(args.seed, 0);
    let mut failures: Vec<String> = Vec::new();

    // Inner product at d = 512, ε = 0.05, δ = 0.05.
    {
        use truncgrad::Scalar;
        let d = 512;
        let u: Vec<Real> = (0..d).map(|_| Real::std_normal(&mut rng) * 0.3).collect();
        let v: Vec<Real> = (0..d).map(|_| Real::std_normal(&mut rng) * 0.3).collect();
        let truth: Real = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let (eps, delta) = (0.05, 0.05);
        let mut bad = 0usize;
        for _ in 0..trials {
            let est =
                est_inner_product(&u[..], &v[..], eps, delta, &mut rng, None, NoiseMode::Full)?;
            if (est - truth).abs() > eps {
                bad += 1;
            }
        }
        let fraction = bad as f64 / trials as f64;
        println!("inner-product failure fraction: {fraction:.4} (budget 0.08)");
        if fraction > 0.08 {
            failures.push(format!("inner product failed {fraction:.4} > 0.08"));
        }
    }

    // Additive norm estimation at d = 1024, ε = 0.01, δ = 0.05.
    {
        let d = 1024;
        let u: Vec<Real> = (0..d).map(|j| ((j % 17) as Real - 8.0) / 17.0).collect();
        let truth: Real = u.iter().map(|v| v.abs()).sum();
        let mut bad = 0usize;
        for _ in 0..trials {
            let est = est_l1_norm(
                &u[..],
                NormMode::Additive(0.01),
                0.05,
                &mut rng,
                None,
                NoiseMode::Full,
            )?;
            if (est - truth).abs() > 0.01 {
                bad += 1;
            }
        }
        let fraction = bad as f64 / trials as f64;
        println!("norm-estimation failure fraction: {fraction:.4} (budget 0.08)");
        if fraction > 0.08 {
            failures.push(format!("norm estimation failed {fraction:.4} > 0.08"));
        }
    }

    // Amplitude estimation contract at a = 0.3, t = 64, ε = 1e-3.
    {
        let (a, t_param, eps) = (0.3, 64u32, 1e-3);
        let est = AmplitudeEstimator::new(t_param, eps, &mut rng)?;
        let n = (trials * 100).max(10_000);
        let draws: Vec<Real> = (0..n)
            .map(|_| est.estimate(a, &mut rng))
            .collect::<truncgrad::Result<_>>()?;
        let mean = draws.iter().sum::<Real>() / n as Real;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<Real>() / (n - 1) as Real;
        let bound = 91.0 * a / (t_param as Real).powi(2) + eps;
        println!(
            "amplitude estimation: |mean - a| = {:.2e} (≤ 2e-3), var = {:.3e} (≤ {bound:.3e} + MC error)",
            (mean - a).abs(),
            var
        );
        if (mean - a).abs() > 2e-3 || var > bound * 1.1 {
            failures.push("amplitude estimation outside contract".into());
        }
    }

    // Index sampling point mass.
    {
        let u: [Real; 5] = [0.0, 0.0, 0.0, 1.0, 0.0];
        let zeta = 0.25;
        let n = trials.max(1000);
        let hits = (0..n)
            .filter(|_| {
                sample_index(&u[..], zeta, 0.05, &mut rng, None, NoiseMode::Full).unwrap() == 3
            })
            .count();
        let fraction = hits as f64 / n as f64;
        println!(
            "point-mass sampling hit rate: {fraction:.4} (≥ {})",
            1.0 - 2.0 * zeta
        );
        if fraction < 1.0 - 2.0 * zeta {
            failures.push("index sampling below 1 - 2ζ".into());
        }
    }

    if failures.is_empty() {
        println!("all estimator contracts satisfied");
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &failures {
            eprintln!("contract violation: {f}");
        }
        Ok(ExitCode::from(1))
    }
}
