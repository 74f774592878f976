//! Command-line interface: `simulate`, `fit`, `test`, `bocpd`, `cbocpd`,
//! and `eval` subcommands operating on one-column CSV series and JSON
//! reports. Every command is deterministic given its arguments (all
//! randomness flows from `--seed`) and prints a self-describing JSON report
//! embedding the resolved configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bocpd::{bocpd_run, BocpdConfig, HazardPolicy};
use crate::cbocpd::{cbocpd_run, CbocpdConfig};
use crate::error::Error;
use crate::eval::{paired_compare, score, PairedComparison, ScoreSummary};
use crate::glrt::{
    calibrate_empirical_thresholds, cov_lrt, run_test, theoretical_thresholds, variance_lrt,
    CandidateSet, LrtOutcome,
};
use crate::gp::{fit_hyperparameters, FitConfig, Series};
use crate::io;
use crate::kernels::{ChangeFamily, CrossKernel, KernelSpec, ScaleParam};
use crate::report::{DetectionReport, Report, TestReport};
use crate::synth::{preset, sample_piecewise_gp, Preset, ScenarioSpec};

/// Process exit codes: 0 success, 2 validation, 3 numerical, 4 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotPositiveDefinite { .. }
        | Error::ConvergenceFailure(_)
        | Error::NoPositiveRoot { .. } => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

#[derive(Debug, Parser)]
#[command(name = "gpcpd", version, about = "GP covariance change point detection")]
pub struct Cli {
    /// Cap on worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic series with planted covariance changes.
    Simulate(SimulateArgs),
    /// Fit kernel hyperparameters on a training range.
    Fit(FitArgs),
    /// Run a covariance-change likelihood ratio test on a whole series.
    Test(TestArgs),
    /// Bayesian online change point detection with a constant hazard.
    Bocpd(BocpdArgs),
    /// Confirmatory BOCPD with window tests overriding the hazard.
    Cbocpd(CbocpdArgs),
    /// Score predictions (NLL and MSE) or compare two score lists.
    Eval(EvalArgs),
}

pub fn run(cli: Cli) -> Result<(), Error> {
    if let Some(threads) = cli.threads {
        // Ignored if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Test(args) => cmd_test(args),
        Command::Bocpd(args) => cmd_bocpd(args),
        Command::Cbocpd(args) => cmd_cbocpd(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn print_report<T: Serialize>(report: &T) -> Result<(), Error> {
    let body = serde_json::to_string_pretty(report)
        .map_err(|e| Error::invalid("report", e.to_string()))?;
    println!("{body}");
    Ok(())
}

fn load_kernel(path: &Path) -> Result<KernelSpec, Error> {
    let k: KernelSpec = io::read_json(path)?;
    k.validate()?;
    Ok(k)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Built-in scenario: LEN_CHANGE or VAR_CHANGE.
    #[arg(long, conflicts_with = "spec_file")]
    preset: Option<String>,
    /// Scenario spec JSON (see the `synth` module schema).
    #[arg(long)]
    spec_file: Option<PathBuf>,
    /// Seed; required with --preset, overrides the spec file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Truth sidecar path (default: <out>.truth.json).
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SimulateBody {
    out: String,
    truth_out: String,
    true_change_points: Vec<usize>,
    n: usize,
}

#[derive(Debug, Serialize)]
struct TruthSidecar<'a> {
    version: &'static str,
    spec: &'a ScenarioSpec,
    true_change_points: &'a [usize],
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let spec = match (&args.preset, &args.spec_file) {
        (Some(name), None) => {
            let p: Preset = name.parse()?;
            let seed = args
                .seed
                .ok_or_else(|| Error::invalid("simulate", "--preset requires --seed"))?;
            preset(p, seed)
        }
        (None, Some(path)) => {
            let mut spec: ScenarioSpec = io::read_json(path)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            spec
        }
        _ => {
            return Err(Error::invalid(
                "simulate",
                "exactly one of --preset or --spec-file is required",
            ))
        }
    };
    let (series, true_cps) = sample_piecewise_gp(&spec)?;
    io::write_series_csv(&args.out, &series)?;
    let truth_path = args
        .truth_out
        .unwrap_or_else(|| args.out.with_extension("truth.json"));
    io::write_json(
        &truth_path,
        &TruthSidecar {
            version: crate::report::library_version(),
            spec: &spec,
            true_change_points: &true_cps,
        },
    )?;
    print_report(&Report::new(
        "simulate",
        spec,
        SimulateBody {
            out: args.out.display().to_string(),
            truth_out: truth_path.display().to_string(),
            true_change_points: true_cps,
            n: series.len(),
        },
    ))
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Column selector for multi-column CSVs (index or header name).
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value_t = 1)]
    train_start: usize,
    /// Last training index (default: end of series).
    #[arg(long)]
    train_end: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    init_signal_variance: f64,
    #[arg(long, default_value_t = 5.0)]
    init_length_scale: f64,
    #[arg(long, default_value_t = 0.1)]
    init_noise_variance: f64,
    /// Hold the noise variance at its initial value.
    #[arg(long)]
    fix_noise: bool,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Where to write the fitted kernel JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct FitConfigEcho {
    data: String,
    train_start: usize,
    train_end: usize,
    init: KernelSpec,
    fix_noise: bool,
    max_iters: usize,
}

#[derive(Debug, Serialize)]
struct FitBody {
    kernel: KernelSpec,
    log_marginal: f64,
    improved: bool,
    iterations: usize,
}

fn cmd_fit(args: FitArgs) -> Result<(), Error> {
    let series = io::read_series_csv(&args.data, args.column.as_deref())?;
    let train_end = args.train_end.unwrap_or(series.len());
    let train = series.slice(args.train_start, train_end)?;
    let init = KernelSpec::rbf(
        args.init_signal_variance,
        args.init_length_scale,
        args.init_noise_variance,
    )?;
    let cfg = FitConfig {
        max_iters: args.max_iters,
        fit_noise: !args.fix_noise,
        ..FitConfig::default()
    };
    let fit = fit_hyperparameters(&train, &init, &cfg)?;
    if let Some(out) = &args.out {
        io::write_json(out, &fit.kernel)?;
    }
    print_report(&Report::new(
        "fit",
        FitConfigEcho {
            data: args.data.display().to_string(),
            train_start: args.train_start,
            train_end,
            init,
            fix_noise: args.fix_noise,
            max_iters: args.max_iters,
        },
        FitBody {
            kernel: fit.kernel,
            log_marginal: fit.log_marginal,
            improved: fit.improved,
            iterations: fit.iterations,
        },
    ))
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    column: Option<String>,
    /// Null kernel JSON (required for kernel-based families).
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// structural_break | general | variance_only | scaled
    #[arg(long)]
    family: String,
    /// Alternative kernel JSON (defaults to the null kernel).
    #[arg(long)]
    alt_kernel: Option<PathBuf>,
    /// Cross-block for the general family: zero | pre | post.
    #[arg(long, default_value = "zero")]
    cross: String,
    /// Known pre-change total variance (variance_only family).
    #[arg(long)]
    pre_variance: Option<f64>,
    /// Post-change total variance; when omitted it is estimated per
    /// candidate in closed form.
    #[arg(long)]
    post_variance: Option<f64>,
    /// Covariance scale (scaled family): a number, or `estimate`.
    #[arg(long, default_value = "estimate")]
    scale: String,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// empirical | theoretical
    #[arg(long, default_value = "empirical")]
    mode: String,
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bound V on |x_t| for theoretical thresholds (default: max |x|).
    #[arg(long)]
    bound_v: Option<f64>,
    /// Candidate margin (default: max(2, ceil(0.05 n))).
    #[arg(long)]
    margin: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct TestConfigEcho {
    data: String,
    family: String,
    mode: String,
    delta: f64,
    mc_samples: usize,
    seed: u64,
    bound_v: Option<f64>,
    margin: usize,
    null_kernel: Option<KernelSpec>,
    alt_kernel: Option<KernelSpec>,
    pre_variance: Option<f64>,
    post_variance: Option<f64>,
    scale: String,
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    let series = io::read_series_csv(&args.data, args.column.as_deref())?;
    let n = series.len();
    let margin = args.margin.unwrap_or_else(|| crate::glrt::default_margin(n));
    let cands = CandidateSet::with_margin(n, margin)?;

    let null_k = args.kernel.as_deref().map(load_kernel).transpose()?;
    let alt_k = args.alt_kernel.as_deref().map(load_kernel).transpose()?;

    let need_kernel = || {
        null_k.ok_or_else(|| Error::invalid("test", "--kernel is required for this family"))
    };

    enum Plan {
        Family(ChangeFamily),
        VarianceEstimated { a: f64 },
    }

    let plan = match args.family.as_str() {
        "structural_break" => {
            let pre = need_kernel()?;
            Plan::Family(ChangeFamily::StructuralBreak {
                pre,
                post: alt_k.unwrap_or(pre),
            })
        }
        "general" => {
            let pre = need_kernel()?;
            let post = alt_k.unwrap_or(pre);
            let cross = match args.cross.as_str() {
                "zero" => CrossKernel::Zero,
                "pre" => CrossKernel::Kernel(pre),
                "post" => CrossKernel::Kernel(post),
                other => {
                    return Err(Error::invalid(
                        "test",
                        format!("unknown cross-block `{other}`"),
                    ))
                }
            };
            Plan::Family(ChangeFamily::GeneralChange { pre, post, cross })
        }
        "variance_only" => {
            let a = args.pre_variance.ok_or_else(|| {
                Error::invalid("test", "variance_only requires --pre-variance")
            })?;
            match args.post_variance {
                Some(b) => Plan::Family(ChangeFamily::VarianceOnly {
                    pre_variance: a,
                    post_variance: b,
                    noise_variance: 0.0,
                }),
                None => Plan::VarianceEstimated { a },
            }
        }
        "scaled" => {
            let base = need_kernel()?;
            let scale = if args.scale == "estimate" {
                ScaleParam::ToEstimate
            } else {
                let v: f64 = args
                    .scale
                    .parse()
                    .map_err(|_| Error::invalid("test", "bad --scale value"))?;
                ScaleParam::Fixed(v)
            };
            Plan::Family(ChangeFamily::ScaledCovariance { base, scale })
        }
        other => return Err(Error::invalid("test", format!("unknown family `{other}`"))),
    };

    let outcome = match &plan {
        Plan::Family(fam) => cov_lrt(&series, fam, &cands)?,
        Plan::VarianceEstimated { a } => variance_lrt(&series, *a, &cands)?,
    };

    let (outcome, no_valid): (LrtOutcome, Option<bool>) = match args.mode.as_str() {
        "empirical" => {
            let pre = need_kernel()?;
            if args.family != "structural_break" {
                return Err(Error::invalid(
                    "test",
                    "empirical thresholds are calibrated for the structural_break family; \
                     use --mode theoretical for other families",
                ));
            }
            let alt = alt_k.unwrap_or(pre);
            let (r0, r1) = calibrate_empirical_thresholds(
                &pre,
                &alt,
                n,
                args.delta,
                args.mc_samples,
                args.seed,
            )?;
            (run_test(outcome, r0, r1), None)
        }
        "theoretical" => {
            let fam = match &plan {
                Plan::Family(fam) => fam.clone(),
                Plan::VarianceEstimated { .. } => {
                    return Err(Error::invalid(
                        "test",
                        "theoretical thresholds need a fully specified family; \
                         pass --post-variance",
                    ))
                }
            };
            let v = args.bound_v.unwrap_or_else(|| {
                series
                    .values()
                    .iter()
                    .fold(0.0f64, |acc, x| acc.max(x.abs()))
            });
            let spec = theoretical_thresholds(&fam, n, args.delta, v, &cands)?;
            (
                run_test(outcome, spec.r_h0, spec.r_h1),
                Some(!spec.has_valid_range()),
            )
        }
        other => return Err(Error::invalid("test", format!("unknown mode `{other}`"))),
    };

    let report = Report::new(
        "test",
        TestConfigEcho {
            data: args.data.display().to_string(),
            family: args.family.clone(),
            mode: args.mode.clone(),
            delta: args.delta,
            mc_samples: args.mc_samples,
            seed: args.seed,
            bound_v: args.bound_v,
            margin,
            null_kernel: null_k,
            alt_kernel: alt_k,
            pre_variance: args.pre_variance,
            post_variance: args.post_variance,
            scale: args.scale.clone(),
        },
        TestReport::new(&outcome, no_valid),
    );
    if let Some(out) = &args.out {
        io::write_json(out, &report)?;
    }
    print_report(&report)
}

// ---------------------------------------------------------------------------
// bocpd / cbocpd
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct BocpdArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    column: Option<String>,
    #[arg(long)]
    kernel: PathBuf,
    /// Expected run length of the geometric prior (hazard = 1/lambda).
    #[arg(long, default_value_t = 200.0)]
    hazard_lambda: f64,
    #[arg(long, default_value_t = 256)]
    max_run_length: usize,
    #[arg(long)]
    eval_start: Option<usize>,
    #[arg(long)]
    eval_end: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    runlength_csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BocpdConfigEcho {
    data: String,
    kernel: KernelSpec,
    hazard_lambda: f64,
    bocpd: BocpdConfig,
    eval_start: Option<usize>,
    eval_end: Option<usize>,
}

fn maybe_score(
    predictives: &[crate::gp::PredictiveGaussian],
    series: &Series,
    start: Option<usize>,
    end: Option<usize>,
) -> Result<Option<ScoreSummary>, Error> {
    match (start, end) {
        (Some(s), Some(e)) => Ok(Some(score(predictives, series, s, e)?)),
        (None, None) => Ok(None),
        _ => Err(Error::invalid(
            "eval range",
            "--eval-start and --eval-end must be given together",
        )),
    }
}

fn cmd_bocpd(args: BocpdArgs) -> Result<(), Error> {
    let series = io::read_series_csv(&args.data, args.column.as_deref())?;
    let kernel = load_kernel(&args.kernel)?;
    if !(args.hazard_lambda > 1.0) {
        return Err(Error::invalid("hazard_lambda", "must exceed 1"));
    }
    let hazard = HazardPolicy::constant(1.0 / args.hazard_lambda)?;
    let cfg = BocpdConfig {
        max_run_length: args.max_run_length,
        ..BocpdConfig::default()
    };
    let run = bocpd_run(&series, &kernel, &hazard, &cfg)?;
    let scores = maybe_score(&run.predictives, &series, args.eval_start, args.eval_end)?;
    if let Some(path) = &args.runlength_csv {
        io::write_runlength_csv(path, &run.posterior)?;
    }
    let hazards = vec![1.0 / args.hazard_lambda; series.len()];
    let report = Report::new(
        "bocpd",
        BocpdConfigEcho {
            data: args.data.display().to_string(),
            kernel,
            hazard_lambda: args.hazard_lambda,
            bocpd: cfg,
            eval_start: args.eval_start,
            eval_end: args.eval_end,
        },
        DetectionReport::from_bocpd(&run, hazards, scores),
    );
    if let Some(out) = &args.out {
        io::write_json(out, &report)?;
    }
    print_report(&report)
}

#[derive(Debug, Args)]
struct CbocpdArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    column: Option<String>,
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long, default_value_t = 25)]
    half_window: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 200.0)]
    hazard_lambda: f64,
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    #[arg(long)]
    seed: u64,
    /// Use the null (or --fixed-alt) kernel instead of refitting each
    /// window's second half.
    #[arg(long)]
    no_refit: bool,
    #[arg(long)]
    fixed_alt: Option<PathBuf>,
    /// Force thresholds as `r_h0,r_h1` (accepts inf / -inf), skipping
    /// calibration.
    #[arg(long)]
    force_thresholds: Option<String>,
    #[arg(long, default_value_t = 256)]
    max_run_length: usize,
    #[arg(long)]
    eval_start: Option<usize>,
    #[arg(long)]
    eval_end: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    runlength_csv: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> Result<f64, Error> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse()
            .map_err(|_| Error::invalid("thresholds", format!("bad value `{other}`"))),
    }
}

#[derive(Debug, Serialize)]
struct CbocpdConfigEcho {
    data: String,
    kernel: KernelSpec,
    hazard_lambda: f64,
    cbocpd: CbocpdConfig,
    eval_start: Option<usize>,
    eval_end: Option<usize>,
}

fn cmd_cbocpd(args: CbocpdArgs) -> Result<(), Error> {
    let series = io::read_series_csv(&args.data, args.column.as_deref())?;
    let kernel = load_kernel(&args.kernel)?;
    if !(args.hazard_lambda > 1.0) {
        return Err(Error::invalid("hazard_lambda", "must exceed 1"));
    }
    let mut cfg = CbocpdConfig::new(
        args.half_window,
        args.delta,
        1.0 / args.hazard_lambda,
        args.seed,
    );
    cfg.mc_samples = args.mc_samples;
    cfg.refit_alternative = !args.no_refit;
    cfg.fixed_alternative = args.fixed_alt.as_deref().map(load_kernel).transpose()?;
    cfg.bocpd.max_run_length = args.max_run_length;
    if let Some(spec) = &args.force_thresholds {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::invalid(
                "thresholds",
                "expected two comma-separated values",
            ));
        }
        cfg.threshold_override = Some((parse_threshold(parts[0])?, parse_threshold(parts[1])?));
    }
    let run = cbocpd_run(&series, &kernel, &cfg)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    let scores = maybe_score(
        &run.bocpd.predictives,
        &series,
        args.eval_start,
        args.eval_end,
    )?;
    if let Some(path) = &args.runlength_csv {
        io::write_runlength_csv(path, &run.bocpd.posterior)?;
    }
    let report = Report::new(
        "cbocpd",
        CbocpdConfigEcho {
            data: args.data.display().to_string(),
            kernel,
            hazard_lambda: args.hazard_lambda,
            cbocpd: cfg,
            eval_start: args.eval_start,
            eval_end: args.eval_end,
        },
        DetectionReport::from_cbocpd(&run, scores),
    );
    if let Some(out) = &args.out {
        io::write_json(out, &report)?;
    }
    print_report(&report)
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct EvalArgs {
    /// Detection report JSON holding predictive_mean / predictive_variance.
    #[arg(long, required_unless_present = "paired_a")]
    predictions: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value_t = 1)]
    start: usize,
    #[arg(long)]
    end: Option<usize>,
    /// JSON array of per-run scores (paired comparison mode).
    #[arg(long, requires = "paired_b")]
    paired_a: Option<PathBuf>,
    #[arg(long)]
    paired_b: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EvalConfigEcho {
    predictions: Option<String>,
    data: Option<String>,
    start: usize,
    end: Option<usize>,
    paired_a: Option<String>,
    paired_b: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum EvalBody {
    Scores { scores: ScoreSummary },
    Paired { comparison: PairedComparison },
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let body = if let (Some(a_path), Some(b_path)) = (&args.paired_a, &args.paired_b) {
        let a: Vec<f64> = io::read_json(a_path)?;
        let b: Vec<f64> = io::read_json(b_path)?;
        EvalBody::Paired {
            comparison: paired_compare(&a, &b)?,
        }
    } else {
        let pred_path = args
            .predictions
            .as_ref()
            .ok_or_else(|| Error::invalid("eval", "--predictions is required"))?;
        let data_path = args
            .data
            .as_ref()
            .ok_or_else(|| Error::invalid("eval", "--data is required"))?;
        let series = io::read_series_csv(data_path, args.column.as_deref())?;
        let raw: serde_json::Value = io::read_json(pred_path)?;
        let grab = |key: &str| -> Result<Vec<f64>, Error> {
            raw.get(key)
                .and_then(|v| v.as_array())
                .map(|arr| {
                    arr.iter()
                        .map(|v| v.as_f64().unwrap_or(f64::NAN))
                        .collect::<Vec<f64>>()
                })
                .ok_or_else(|| {
                    Error::invalid("predictions", format!("missing `{key}` array"))
                })
        };
        let means = grab("predictive_mean")?;
        let vars = grab("predictive_variance")?;
        if means.len() != vars.len() {
            return Err(Error::Misalignment(
                "predictive mean/variance lengths differ".into(),
            ));
        }
        let predictives: Vec<crate::gp::PredictiveGaussian> = means
            .iter()
            .zip(&vars)
            .map(|(&mean, &variance)| crate::gp::PredictiveGaussian { mean, variance })
            .collect();
        let end = args.end.unwrap_or(series.len());
        EvalBody::Scores {
            scores: score(&predictives, &series, args.start, end)?,
        }
    };
    let report = Report::new(
        "eval",
        EvalConfigEcho {
            predictions: args.predictions.as_ref().map(|p| p.display().to_string()),
            data: args.data.as_ref().map(|p| p.display().to_string()),
            start: args.start,
            end: args.end,
            paired_a: args.paired_a.as_ref().map(|p| p.display().to_string()),
            paired_b: args.paired_b.as_ref().map(|p| p.display().to_string()),
        },
        body,
    );
    if let Some(out) = &args.out {
        io::write_json(out, &report)?;
    }
    print_report(&report)
}
