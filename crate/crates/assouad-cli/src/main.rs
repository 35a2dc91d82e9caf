//! Command-line front end: ingest spec files (or catalog names), run the
//! formula and empirical pipelines, and export reports and curves.
//!
//! Exit codes: 0 success, 1 domain or validation failure, 2 I/O failure.
//! Identical invocations produce byte-identical output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use assouad::catalog;
use assouad::construct::{build_levels, LevelStructure, Placement, RatioMode};
use assouad::estimate::{
    empirical_assouad, empirical_lower, empirical_spectrum_point, EmpiricalReport,
};
use assouad::formulas::{
    assouad_dim_formula, assouad_spectrum_formula, level_index, lower_dim_bound_formula,
    lower_spectrum_formula, spectrum_via_scale_function, DimensionEstimate, SpectrumVariant,
};
use assouad::sequences::SequenceSpec;
use assouad::verify::{run_suite, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "assouad",
    version,
    about = "Assouad-type dimensions and dimension spectra of Moran-type interval constructions"
)]
struct Cli {
    /// Cap the worker threads used by parallel sweeps
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a spec and check the class claims it makes
    Validate(ValidateArgs),
    /// Assouad dimension and the lower-dimension upper bound, by formula
    /// (and optionally re-estimated on a realization)
    Dim(DimArgs),
    /// Spectrum curves over a theta grid, by every available path
    Spectrum(SpectrumArgs),
    /// Cross-validation suite; exits non-zero if any check finds something
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SpecArg {
    /// Spec JSON path, or catalog:NAME for a built-in construction
    #[arg(long)]
    spec: String,
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    /// Children spread evenly, equal gaps between siblings
    Uniform,
    /// Children packed against the parent's left end
    Left,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Placement {
        match p {
            PlacementArg::Uniform => Placement::UniformGaps,
            PlacementArg::Left => Placement::LeftPacked,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Levels to probe for per-level rule violations
    #[arg(long, default_value_t = 256)]
    depth: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DimArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Prefix-table depth behind the formulas
    #[arg(long, default_value_t = 1024)]
    depth: usize,
    /// Fraction of the window sweep kept as the limit tail
    #[arg(long, default_value_t = 0.5)]
    tail: f64,
    /// Also realize the construction to this depth and report sampled
    /// two-scale exponents next to the formula values
    #[arg(long)]
    realize: Option<usize>,
    /// Level-pair grid `kmax,lmax` for the sampled estimates
    #[arg(long, default_value = "4,4")]
    pairs: String,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = PlacementArg::Uniform)]
    placement: PlacementArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Prefix-table depth behind the formulas
    #[arg(long, default_value_t = 1024)]
    depth: usize,
    /// Theta grid `start:end:step`, inside (0, 1)
    #[arg(long, default_value = "0.1:0.9:0.1")]
    theta_grid: String,
    /// Flag curve points where the paths drift further apart than this
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
    /// Add a sampled-spectrum column measured on a realization of this depth
    #[arg(long)]
    realize: Option<usize>,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = PlacementArg::Uniform)]
    placement: PlacementArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Prefix-table depth for the formula-vs-oracle comparison
    #[arg(long, default_value_t = 128)]
    depth: usize,
    /// Realization depth for the geometric checks
    #[arg(long, default_value_t = 12)]
    realize: usize,
    #[arg(long, value_enum, default_value_t = PlacementArg::Uniform)]
    placement: PlacementArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Corrupt the realization first, to prove the checks can fail
    #[arg(long)]
    negative_control: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    let io = err
        .chain()
        .any(|cause| cause.downcast_ref::<std::io::Error>().is_some());
    ExitCode::from(if io { 2 } else { 1 })
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate(args) => cmd_validate(args),
        Command::Dim(args) => cmd_dim(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn load_spec(arg: &str) -> Result<SequenceSpec> {
    if let Some(name) = arg.strip_prefix("catalog:") {
        return catalog::lookup(name).ok_or_else(|| {
            anyhow!(
                "unknown catalog spec {name:?}; built-ins: {}",
                catalog::NAMES.join(", ")
            )
        });
    }
    let text = fs::read_to_string(arg).with_context(|| format!("reading spec file {arg}"))?;
    // A file that does not parse as a spec document is a file-level failure
    // (exit 2), like an unreadable one; only specs that parse but violate
    // their class claims are domain failures (exit 1).
    let spec = serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
        .with_context(|| format!("parsing spec file {arg}"))?;
    Ok(spec)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)
            .with_context(|| format!("writing output file {}", path.display()))?,
        None => std::io::stdout()
            .write_all(bytes)
            .context("writing to stdout")?,
    }
    Ok(())
}

fn to_json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serializing output")?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Realization mode implied by the spec's own class claims.
fn mode_for(spec: &SequenceSpec) -> RatioMode {
    if spec.class_flags.moran {
        RatioMode::Moran
    } else {
        RatioMode::CantorLike
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let spec = load_spec(&args.spec.spec)?;
    let report = spec
        .validate(args.depth)
        .context("spec failed validation")?;
    emit(args.output.out.as_deref(), &to_json_bytes(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize, serde::Deserialize)]
struct DimOutput {
    spec: String,
    table_depth: usize,
    window_levels: usize,
    tail_levels: usize,
    assouad: DimensionEstimate,
    lower_dimension_upper_bound: DimensionEstimate,
    note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical_assouad: Option<EmpiricalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical_lower: Option<EmpiricalReport>,
}

const LOWER_BOUND_NOTE: &str = "lower_dimension_upper_bound is an upper bound on the lower \
                                dimension, not the lower dimension itself";

fn cmd_dim(args: DimArgs) -> Result<ExitCode> {
    if args.format == Format::Csv {
        bail!("dim reports are JSON; csv output is for spectrum curves");
    }
    if args.depth < 4 {
        bail!("--depth must be at least 4, got {}", args.depth);
    }
    if !(args.tail > 0.0 && args.tail <= 1.0) {
        bail!("--tail must lie in (0, 1], got {}", args.tail);
    }
    let spec = load_spec(&args.spec.spec)?;
    spec.validate(args.depth)
        .context("spec failed validation")?;

    let tables = spec.prefix_tables(args.depth);
    let window = args.depth / 2;
    let tail = ((window as f64 * args.tail).round() as usize).clamp(1, window);
    let assouad = assouad_dim_formula(&tables, window, tail)?;
    let lower = lower_dim_bound_formula(&tables, window, tail)?;

    let (empirical_assouad, empirical_lower) = match args.realize {
        None => (None, None),
        Some(depth) => {
            let ls = realize(&spec, depth, args.placement, args.seed)?;
            let (k_max, l_max) = parse_pairs(&args.pairs)?;
            let pairs: Vec<(usize, usize)> = (1..=k_max)
                .flat_map(|k| (1..=l_max).map(move |l| (k, l)))
                .filter(|&(k, l)| k + l + 1 <= depth)
                .collect();
            if pairs.is_empty() {
                bail!(
                    "--realize {depth} is too shallow for the pair grid {}x{l_max}",
                    k_max
                );
            }
            let sup = empirical_assouad(&ls, &pairs, args.samples)?;
            let inf = empirical_lower(&ls, &pairs, args.samples)?;
            (Some(sup), Some(inf))
        }
    };

    let output = DimOutput {
        spec: args.spec.spec.clone(),
        table_depth: args.depth,
        window_levels: window,
        tail_levels: tail,
        assouad,
        lower_dimension_upper_bound: lower,
        note: LOWER_BOUND_NOTE.to_owned(),
        empirical_assouad,
        empirical_lower,
    };
    emit(args.output.out.as_deref(), &to_json_bytes(&output)?)?;
    Ok(ExitCode::SUCCESS)
}

fn realize(
    spec: &SequenceSpec,
    depth: usize,
    placement: PlacementArg,
    seed: u64,
) -> Result<LevelStructure> {
    build_levels(spec, depth, placement.into(), mode_for(spec), seed)
        .context("realizing the construction")
}

fn parse_pairs(text: &str) -> Result<(usize, usize)> {
    let (k, l) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("--pairs expects kmax,lmax, got {text:?}"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| anyhow!("--pairs entries must be positive integers, got {s:?}"))
    };
    Ok((parse(k)?, parse(l)?))
}

fn parse_theta_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        bail!("--theta-grid expects start:end:step, got {text:?}");
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("bad number {s:?} in --theta-grid"))
    };
    let (start, end, step) = (num(start)?, num(end)?, num(step)?);
    if !(start > 0.0 && end < 1.0 && start <= end && step > 0.0) {
        bail!("--theta-grid needs 0 < start <= end < 1 and a positive step, got {text:?}");
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let theta = start + f64::from(i) * step;
        if theta > end + step * 1e-9 {
            break;
        }
        grid.push(theta);
        i += 1;
    }
    Ok(grid)
}

#[derive(Serialize, serde::Deserialize)]
struct SpectrumRow {
    theta: f64,
    assouad_formula: f64,
    lower_formula: f64,
    assouad_scalefn: f64,
    lower_scalefn: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<f64>,
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<ExitCode> {
    if args.depth < 16 {
        bail!("--depth must be at least 16, got {}", args.depth);
    }
    let spec = load_spec(&args.spec.spec)?;
    spec.validate(args.depth)
        .context("spec failed validation")?;
    if !spec.class_flags.cantor_like {
        bail!("spectrum curves need a spec claiming the cantor-like class");
    }
    let grid = parse_theta_grid(&args.theta_grid)?;
    if grid.is_empty() {
        bail!("--theta-grid {:?} contains no points", args.theta_grid);
    }

    let tables = spec.prefix_tables(args.depth);
    let log_delta = tables.log_length();
    // Deepest start level a given theta can pair within the tables, capped
    // so the window still has room under it.  Snapping k/theta to whole
    // levels costs O(1 / (k * (1/theta - 1))), so high theta needs the
    // deepest window it can get; sharing the smallest theta's window across
    // the grid would throw that depth away.
    let k_end_for = |theta: f64| -> usize {
        ((args.depth as f64 - 3.0) * theta)
            .floor()
            .clamp(1.0, (args.depth / 2).max(1) as f64) as usize
    };

    let realization = match args.realize {
        None => None,
        Some(depth) => Some(realize(&spec, depth, args.placement, args.seed)?),
    };

    let mut rows = Vec::with_capacity(grid.len());
    for &theta in &grid {
        let k_end = k_end_for(theta);
        // A theta close enough to 1 pairs shallow levels to themselves
        // (l(theta, k) == k up to k ~ theta/(1-theta)), and a self-paired
        // level contributes a spurious zero to the trace.  Refuse the
        // request when the summarized tail contains one rather than emit
        // values that estimate nothing.
        for k in (k_end / 2 + 1)..=k_end {
            let l = level_index(&tables, theta, k)
                .with_context(|| format!("pairing levels at theta = {theta}"))?;
            if l == k {
                let hint = ((16.0 * theta / (1.0 - theta)).ceil() as usize).max(16);
                bail!(
                    "theta = {theta} degenerates at --depth {}: levels up through {k} \
                     pair to themselves; try --depth {hint} or deeper",
                    args.depth
                );
            }
        }
        let log_r_grid: Vec<f64> = (1..=k_end)
            .map(|k| 0.5 * (log_delta[k - 1] + log_delta[k]))
            .collect();
        let empirical = match &realization {
            None => None,
            Some(ls) => {
                let depth = ls.depth() as f64;
                let k = ((theta * (depth - 1.5)).floor() as usize).max(1);
                let point = empirical_spectrum_point(
                    ls,
                    theta,
                    &[k],
                    args.samples,
                    SpectrumVariant::Assouad,
                )
                .with_context(|| {
                    format!("sampling the spectrum at theta = {theta}; try a deeper --realize")
                })?;
                Some(point.value)
            }
        };
        rows.push(SpectrumRow {
            theta,
            assouad_formula: assouad_spectrum_formula(&tables, theta, 1..=k_end)?.value,
            lower_formula: lower_spectrum_formula(&tables, theta, 1..=k_end)?.value,
            assouad_scalefn: spectrum_via_scale_function(
                &tables,
                theta,
                &log_r_grid,
                0.0,
                SpectrumVariant::Assouad,
            )?
            .value,
            lower_scalefn: spectrum_via_scale_function(
                &tables,
                theta,
                &log_r_grid,
                0.0,
                SpectrumVariant::Lower,
            )?
            .value,
            empirical,
        });
    }

    for row in &rows {
        let gap = (row.assouad_formula - row.assouad_scalefn)
            .abs()
            .max((row.lower_formula - row.lower_scalefn).abs());
        if gap > args.tolerance {
            eprintln!(
                "warning: paths disagree by {gap:.4} at theta = {} (tolerance {})",
                row.theta, args.tolerance
            );
        }
    }

    let bytes = match args.format {
        Format::Json => to_json_bytes(&rows)?,
        Format::Csv => {
            let mut text =
                String::from("theta,assouad_formula,lower_formula,assouad_scalefn,lower_scalefn");
            if realization.is_some() {
                text.push_str(",empirical");
            }
            text.push('\n');
            for row in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{}",
                    row.theta,
                    row.assouad_formula,
                    row.lower_formula,
                    row.assouad_scalefn,
                    row.lower_scalefn
                ));
                if let Some(e) = row.empirical {
                    text.push_str(&format!(",{e}"));
                }
                text.push('\n');
            }
            text.into_bytes()
        }
    };
    emit(args.output.out.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let spec = load_spec(&args.spec.spec)?;
    let cfg = SuiteConfig {
        table_depth: args.depth,
        realize_depth: args.realize,
        placement: args.placement.into(),
        mode: mode_for(&spec),
        seed: args.seed,
        samples: args.samples,
        corrupt: args.negative_control,
        ..SuiteConfig::default()
    };
    let report = run_suite(&spec, &cfg).context("verification suite could not run")?;
    emit(args.output.out.as_deref(), &to_json_bytes(&report)?)?;
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
