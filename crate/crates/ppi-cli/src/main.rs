//! `ppilab`: prediction-powered mean estimation from the command line.
//!
//! Subcommands: `estimate` (point estimates and intervals from CSV data),
//! `moments` (joint moments of data or a spec), `theory` (exact finite-sample
//! MSE reports), `oracle` (enumeration checks of the closed forms), `plan`
//! (tipping-point sample sizes), and `simulate` (seeded Monte Carlo
//! experiments). All outputs are JSON or CSV; field names are documented in
//! SCHEMA.md.
//!
//! Exit codes: 0 success, 1 oracle tolerance exceeded, 2 usage/parse errors,
//! 3 degenerate statistics, 4 enumeration budget exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppi_core::distributions::{
    read_csv_columns, read_csv_f_column, DistributionSpec, LabelEncoding,
};
use ppi_core::error::Error as CoreError;
use ppi_core::estimators::{self, EstimateReport, InfinitePopulationF};
use ppi_core::moments::{empirical_moments, EmpiricalMomentOptions, JointMoments};
use ppi_core::oracle::{oracle_theory_suite, DiscreteJointSpec, SuiteRow};
use ppi_core::simulate::{run_from_config, ExperimentConfig, SimulationSummary};
use ppi_core::theory::{self, MethodVariant};
use ppi_core::SignedBinaryPmf;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ppilab", version, about = "Prediction-powered mean estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a point estimate (and interval where defined) from CSV data.
    Estimate(EstimateArgs),
    /// Joint moments of a dataset or a generative spec.
    Moments(MomentsArgs),
    /// Exact finite-sample MSE decomposition for one estimator variant.
    Theory(TheoryArgs),
    /// Compare closed-form theory against the exact enumeration oracle.
    Oracle(OracleArgs),
    /// Smallest labeled sample size at which power tuning starts to help.
    Plan(PlanArgs),
    /// Run a seeded Monte Carlo experiment from a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Classical,
    Ppi,
    PpiPp,
    SingleSample,
    SplitSample,
    CrossFit,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VarianceArg {
    Optimistic,
    Naive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LabelsArg {
    Pm1,
    #[value(name = "01")]
    ZeroOne,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    SplitSample,
    CrossFit,
    SingleSampleGaussian,
}

impl From<VariantArg> for MethodVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::SplitSample => MethodVariant::SplitSample,
            VariantArg::CrossFit => MethodVariant::CrossFit,
            VariantArg::SingleSampleGaussian => MethodVariant::SingleSampleGaussian,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV with header column `y` (and `f` for the PPI family).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Unlabeled pseudo-label pool (CSV with column `f`) for ppi / ppi-pp.
    #[arg(long)]
    unlabeled: Option<PathBuf>,
    /// Known pseudo-label mean for the infinite-pool estimators.
    #[arg(long)]
    mu_f: Option<f64>,
    /// Known pseudo-label variance for the infinite-pool estimators.
    #[arg(long)]
    var_f: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,
    /// Variance estimator for single-sample intervals.
    #[arg(long, value_enum, default_value_t = VarianceArg::Optimistic)]
    variance: VarianceArg,
    /// Declared binary encoding; validates the columns without rescaling
    /// (every estimator here is affine-equivariant).
    #[arg(long, value_enum)]
    labels: Option<LabelsArg>,
}

#[derive(Args)]
struct MomentsArgs {
    /// CSV with header columns `y` and `f`.
    #[arg(long, conflicts_with = "spec")]
    input: Option<PathBuf>,
    /// JSON generative spec (see SCHEMA.md).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Divisor offset for empirical variances/covariances.
    #[arg(long, default_value_t = 1)]
    ddof: u8,
}

#[derive(Args)]
struct TheoryArgs {
    /// JSON generative spec supplying the joint moments.
    #[arg(long, conflicts_with = "input")]
    spec: Option<PathBuf>,
    /// CSV data supplying empirical moments instead of a spec.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Sample size in the variant's own convention (per fold for
    /// split-sample/cross-fit, total for single-sample-gaussian).
    #[arg(long)]
    n: u64,
    #[arg(long, value_enum)]
    variant: VariantArg,
}

#[derive(Args)]
struct OracleArgs {
    /// JSON spec: finite-discrete or signed-binary (see SCHEMA.md).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 2)]
    n_min: u64,
    #[arg(long, default_value_t = 5)]
    n_max: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Largest tolerated |oracle - formula|.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Args)]
struct PlanArgs {
    /// Pseudo-label quality as a Gaussian correlation.
    #[arg(long, conflicts_with_all = ["tpr", "fpr", "p_pos", "balanced", "binary"])]
    gaussian_rho: Option<f64>,
    /// Pseudo-label quality as a binary confusion matrix (with --tpr/--fpr).
    #[arg(long, requires = "tpr", requires = "fpr")]
    binary: bool,
    /// P(F=+1 | Y=+1).
    #[arg(long)]
    tpr: Option<f64>,
    /// P(F=+1 | Y=-1).
    #[arg(long)]
    fpr: Option<f64>,
    /// P(Y=+1) for the binary parameterization.
    #[arg(long, conflicts_with = "balanced")]
    p_pos: Option<f64>,
    /// Shorthand for --p-pos 0.5.
    #[arg(long)]
    balanced: bool,
    #[arg(long, value_enum, default_value_t = VariantArg::CrossFit)]
    variant: VariantArg,
    /// Largest sample size scanned.
    #[arg(long, default_value_t = 10_000)]
    n_max: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config JSON (see SCHEMA.md).
    #[arg(long)]
    config: PathBuf,
    /// Output prefix: writes `<prefix>.json` and `<prefix>.csv`.
    #[arg(long)]
    output: PathBuf,
}

/// CLI failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        let code = match err {
            CoreError::DegenerateF(_) | CoreError::DegenerateY(_) => 3,
            CoreError::EnumerationTooLarge(_) => 4,
            _ => 2,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Moments(args) => cmd_moments(args),
        Command::Theory(args) => cmd_theory(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(CoreError::from)?;
    println!("{text}");
    Ok(())
}

fn labeled_pairs(
    ys: &[f64],
    fs: Option<&Vec<f64>>,
    path: &Path,
) -> Result<Vec<(f64, f64)>, Failure> {
    let fs = fs.ok_or_else(|| {
        Failure::usage(format!(
            "{}: missing required column 'f' for this method",
            path.display()
        ))
    })?;
    Ok(ys.iter().copied().zip(fs.iter().copied()).collect())
}

fn population(args: &EstimateArgs) -> Result<InfinitePopulationF, Failure> {
    match (args.mu_f, args.var_f) {
        (Some(mu_f), Some(var_f)) => Ok(InfinitePopulationF::new(mu_f, var_f)?),
        _ => Err(Failure::usage(
            "this method needs the infinite-pool pseudo-label population: pass --mu-f and --var-f",
        )),
    }
}

fn validate_binary(values: &[f64], declared: LabelsArg, what: &str) -> CliResult {
    let detected = LabelEncoding::detect(values).map_err(Failure::from)?;
    let expected = match declared {
        LabelsArg::Pm1 => LabelEncoding::Pm1,
        LabelsArg::ZeroOne => LabelEncoding::ZeroOne,
    };
    // All-ones columns detect as Pm1 but are consistent with either encoding.
    if detected != expected && values.iter().any(|&v| v != 1.0) {
        return Err(Failure::usage(format!(
            "{what} does not match the declared --labels encoding"
        )));
    }
    Ok(())
}

fn split_even(pairs: &[(f64, f64)]) -> Result<(&[(f64, f64)], &[(f64, f64)]), Failure> {
    if pairs.len() % 2 != 0 || pairs.len() < 4 {
        return Err(Failure::usage(format!(
            "fold-based methods need an even number of rows (at least 4), got {}",
            pairs.len()
        )));
    }
    Ok(pairs.split_at(pairs.len() / 2))
}

fn cmd_estimate(args: EstimateArgs) -> CliResult {
    if !(args.ci_level > 0.0 && args.ci_level < 1.0) {
        return Err(Failure::usage("--ci-level must lie in (0, 1)"));
    }
    let (ys, fs) = read_csv_columns(&args.input)?;
    if let Some(declared) = args.labels {
        validate_binary(&ys, declared, "column 'y'")?;
        if let Some(fs) = &fs {
            validate_binary(fs, declared, "column 'f'")?;
        }
    }

    let report: EstimateReport = match args.method {
        MethodArg::Classical => estimators::classical(&ys)?,
        MethodArg::Ppi | MethodArg::PpiPp => {
            let pairs = labeled_pairs(&ys, fs.as_ref(), &args.input)?;
            let pool_path = args.unlabeled.as_ref().ok_or_else(|| {
                Failure::usage("ppi and ppi-pp need --unlabeled pointing at the pseudo-label pool")
            })?;
            let pool = read_csv_f_column(pool_path)?;
            match args.method {
                MethodArg::Ppi => estimators::ppi(&pairs, &pool)?,
                _ => estimators::ppi_pp_finite(&pairs, &pool)?,
            }
        }
        MethodArg::SingleSample => {
            let pairs = labeled_pairs(&ys, fs.as_ref(), &args.input)?;
            let pop = population(&args)?;
            let mut report = estimators::single_sample_ppi_pp(&pairs, &pop)?;
            report.variance_estimate = Some(match args.variance {
                VarianceArg::Optimistic => estimators::variance_optimistic(&pairs, &pop)?.value,
                VarianceArg::Naive => estimators::variance_naive_plugin(&pairs, &pop)?.value,
            });
            report
        }
        MethodArg::SplitSample => {
            let pairs = labeled_pairs(&ys, fs.as_ref(), &args.input)?;
            let pop = population(&args)?;
            let (fold_lambda, fold_estimate) = split_even(&pairs)?;
            let mut report = estimators::split_sample_ppi_pp(fold_lambda, fold_estimate, &pop)?;
            report.variance_estimate = Some(
                estimators::variance_lambda_fixed(fold_estimate, report.lambda_used, &pop)?.value,
            );
            report
        }
        MethodArg::CrossFit => {
            let pairs = labeled_pairs(&ys, fs.as_ref(), &args.input)?;
            let pop = population(&args)?;
            let (fold1, fold2) = split_even(&pairs)?;
            let mut report = estimators::cross_fit_ppi_pp(fold1, fold2, &pop)?;
            let a = estimators::split_sample_ppi_pp(fold1, fold2, &pop)?;
            let b = estimators::split_sample_ppi_pp(fold2, fold1, &pop)?;
            let va = estimators::variance_lambda_fixed(fold2, a.lambda_used, &pop)?.value;
            let vb = estimators::variance_lambda_fixed(fold1, b.lambda_used, &pop)?.value;
            report.variance_estimate = Some(0.25 * (va + vb));
            report
        }
    };
    let report = report.with_confidence_level(args.ci_level)?;
    print_json(&report)
}

fn load_spec(path: &Path) -> Result<DistributionSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(CoreError::from)?;
    let spec: DistributionSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn cmd_moments(args: MomentsArgs) -> CliResult {
    let moments: JointMoments = match (&args.input, &args.spec) {
        (Some(input), None) => {
            let (ys, fs) = read_csv_columns(input)?;
            let pairs = labeled_pairs(&ys, fs.as_ref(), input)?;
            empirical_moments(&pairs, EmpiricalMomentOptions { ddof: args.ddof })?
        }
        (None, Some(spec)) => load_spec(spec)?.moments()?,
        _ => return Err(Failure::usage("pass exactly one of --input or --spec")),
    };
    print_json(&moments)
}

fn cmd_theory(args: TheoryArgs) -> CliResult {
    let moments = match (&args.spec, &args.input) {
        (Some(spec), None) => load_spec(spec)?.moments()?,
        (None, Some(input)) => {
            let (ys, fs) = read_csv_columns(input)?;
            let pairs = labeled_pairs(&ys, fs.as_ref(), input)?;
            empirical_moments(&pairs, EmpiricalMomentOptions::default())?
        }
        _ => return Err(Failure::usage("pass exactly one of --spec or --input")),
    };
    let report = match MethodVariant::from(args.variant) {
        MethodVariant::SplitSample => theory::mse_split_sample(&moments, args.n)?,
        MethodVariant::CrossFit => theory::mse_cross_fit(&moments, args.n)?,
        MethodVariant::SingleSampleGaussian => {
            theory::mse_single_sample_gaussian(&moments, args.n)?
        }
    };
    print_json(&report)
}

fn discrete_for_oracle(path: &Path) -> Result<DiscreteJointSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(CoreError::from)?;
    // Accept either a tagged generative spec or a bare {support, probs} pmf.
    if let Ok(spec) = serde_json::from_str::<DistributionSpec>(&text) {
        spec.validate()?;
        return match spec {
            DistributionSpec::FiniteDiscrete { spec } => Ok(spec),
            DistributionSpec::SignedBinary { pmf } => Ok(pmf.to_discrete_spec()),
            _ => Err(Failure::usage(
                "the oracle enumerates finite discrete laws; pass a finite-discrete or signed-binary spec",
            )),
        };
    }
    let spec: DiscreteJointSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn suite_csv(rows: &[SuiteRow]) -> String {
    let mut out = String::from("n,statistic,oracle_value,formula_value,abs_diff\n");
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            row.statistic,
            row.oracle_value,
            cell(row.formula_value),
            cell(row.abs_diff),
        ));
    }
    out
}

fn cmd_oracle(args: OracleArgs) -> CliResult {
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(Failure::usage("need 2 <= n-min <= n-max"));
    }
    let spec = discrete_for_oracle(&args.spec)?;
    let n_values: Vec<u64> = (args.n_min..=args.n_max).collect();
    let rows = oracle_theory_suite(&spec, &n_values)?;
    let rendered = match args.format {
        FormatArg::Csv => suite_csv(&rows),
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&rows).map_err(CoreError::from)?;
            s.push('\n');
            s
        }
    };
    match &args.output {
        Some(path) => std::fs::write(path, rendered).map_err(CoreError::from)?,
        None => print!("{rendered}"),
    }
    let worst = rows
        .iter()
        .filter_map(|r| r.abs_diff)
        .fold(0.0_f64, f64::max);
    if worst > args.tolerance {
        return Err(Failure {
            code: 1,
            message: format!(
                "oracle disagreement: worst |oracle - formula| = {worst:e} exceeds {:e}",
                args.tolerance
            ),
        });
    }
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> CliResult {
    let variant = MethodVariant::from(args.variant);
    let (moments, quality) = match (args.gaussian_rho, args.binary) {
        (Some(rho), false) => {
            if !(-1.0..=1.0).contains(&rho) {
                return Err(Failure::usage("--gaussian-rho must lie in [-1, 1]"));
            }
            let m = ppi_core::moments::gaussian_moments(0.0, 0.0, 1.0, 1.0, rho)?;
            (m, json!({ "family": "gaussian", "rho": rho }))
        }
        (None, true) => {
            let (tpr, fpr) = (args.tpr.unwrap(), args.fpr.unwrap());
            let p_pos = if args.balanced {
                0.5
            } else {
                args.p_pos
                    .ok_or_else(|| Failure::usage("binary planning needs --p-pos or --balanced"))?
            };
            let pmf = SignedBinaryPmf::from_noise_rates(p_pos, tpr, fpr)?;
            let m = ppi_core::moments::signed_binary_moments(&pmf)?;
            (
                m,
                json!({
                    "family": "signed-binary",
                    "tpr": tpr,
                    "fpr": fpr,
                    "p_pos": p_pos,
                    "rho": m.rho(),
                }),
            )
        }
        _ => {
            return Err(Failure::usage(
                "pass exactly one quality parameterization: --gaussian-rho, or --binary with --tpr/--fpr",
            ))
        }
    };

    let tipping = theory::tipping_n(&moments, variant, args.n_max)?;
    let threshold = match (tipping, variant) {
        (Some(n), MethodVariant::SplitSample | MethodVariant::CrossFit)
            if moments.cov_y2f2 == 0.0 && moments.cov_yf2 == 0.0 =>
        {
            // Signed-binary law: report the closed-form binary threshold.
            let cond = theory::binary_condition(&moments, n)?;
            json!({
                "rule": "sqrt(n/(n^2-2) + A_n^2) - |A_n| < |rho|",
                "sufficient_threshold_at_n": cond.sufficient_threshold,
                "a_n": cond.a_n,
            })
        }
        (Some(n), _) => json!({
            "rule": "1/sqrt(c*n - 2) < |rho|",
            "threshold_at_n": theory::gaussian_threshold(n, variant).ok(),
        }),
        (None, _) => json!({
            "rule": "no sample size up to n_max satisfies the improvement condition",
        }),
    };
    print_json(&json!({
        "variant": variant.label(),
        "quality": quality,
        "n_convention": match variant {
            MethodVariant::SingleSampleGaussian => "total-samples",
            _ => "per-fold",
        },
        "n_max": args.n_max,
        "tipping_n": tipping,
        "threshold": threshold,
    }))
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.config).map_err(CoreError::from)?;
    let cfg = ExperimentConfig::from_json(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    let summary: SimulationSummary = run_from_config(&cfg)?;

    let json_path = args.output.with_extension("json");
    let csv_path = args.output.with_extension("csv");
    if let Some(parent) = json_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(CoreError::from)?;
        }
    }
    std::fs::write(&json_path, summary.to_json()?).map_err(CoreError::from)?;
    std::fs::write(&csv_path, summary.to_csv()).map_err(CoreError::from)?;

    for row in &summary.rows {
        let mut line = format!(
            "method={} n={} mse={:.6e} stderr={:.3e}",
            row.method, row.n, row.empirical_mse, row.mse_stderr
        );
        if let Some(t) = row.theory_mse {
            line.push_str(&format!(" theory={t:.6e}"));
        }
        if let Some(c) = row.coverage {
            line.push_str(&format!(" coverage={c:.4}"));
        }
        if let Some(w) = row.mean_ci_width {
            line.push_str(&format!(" width={w:.4}"));
        }
        println!("{line}");
    }
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}
