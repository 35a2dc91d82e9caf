//! Cross-validation suite: every quantity the toolkit can compute two ways
//! is computed both ways, and disagreements come back as findings rather
//! than panics. A clean run is the strongest internal-consistency statement
//! the toolkit can make about a spec.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::{
    build_levels, check_structure, BuildError, LevelStructure, Placement, RatioMode, StructureError,
};
use crate::estimate::{
    check_counting_lemmas, check_measure_properties, empirical_assouad, empirical_lower,
    exhaustive_cover_count, greedy_cover_count, EstimateError, Segment,
};
use crate::formulas::{assouad_dim_formula, lower_dim_bound_formula, oracle, FormulaError};
use crate::sequences::{SequenceSpec, SpecError};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("suite needs realization depth >= {required}, got {got}")]
    DepthTooSmall { required: usize, got: usize },
}

/// Which cross-check produced a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    Structure,
    CountingLemmas,
    MeasureProperties,
    MeasureDrift,
    CoveringOptimality,
    FormulaOracle,
    DimensionSandwich,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub check: CheckId,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks_run: usize,
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    fn flag(&mut self, check: CheckId, message: String) {
        self.findings.push(Finding { check, message });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Depth of the prefix tables behind the formula paths (capped at 256
    /// for the term-by-term oracle comparison, which is quadratic).
    pub table_depth: usize,
    /// Realization depth for the geometric checks.
    pub realize_depth: usize,
    pub placement: Placement,
    pub mode: RatioMode,
    pub seed: u64,
    /// Sample points per geometric check.
    pub samples: usize,
    /// Counting checks run at (k, l) in {1..span} x {1..span}.
    pub counting_span: usize,
    /// Randomized covering instances compared greedy-vs-exhaustive.
    pub cover_instances: usize,
    /// Negative control: corrupt the realization before checking, to prove
    /// the checks can fail.
    pub corrupt: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            table_depth: 128,
            realize_depth: 12,
            placement: Placement::UniformGaps,
            mode: RatioMode::Moran,
            seed: 0,
            samples: 64,
            counting_span: 3,
            cover_instances: 200,
            corrupt: false,
        }
    }
}

/// Runs the whole cross-validation suite for one spec.
///
/// Errors are reserved for inputs the suite cannot even set up (invalid
/// spec, depth too small to realize); everything discovered about a
/// successfully built structure is reported as findings.
pub fn run_suite(spec: &SequenceSpec, cfg: &SuiteConfig) -> Result<VerifyReport, SuiteError> {
    if cfg.realize_depth < 6 {
        return Err(SuiteError::DepthTooSmall {
            required: 6,
            got: cfg.realize_depth,
        });
    }
    let validation = spec.validate(cfg.realize_depth.max(64))?;
    let mut report = VerifyReport {
        checks_run: 0,
        findings: Vec::new(),
    };

    let mut ls = build_levels(spec, cfg.realize_depth, cfg.placement, cfg.mode, cfg.seed)?;
    if cfg.corrupt {
        ls = ls.with_injected_overlap();
    }

    structure_check(spec, &ls, &mut report);
    counting_check(&ls, cfg, &mut report);
    measure_check(spec, &ls, cfg, validation.inf_contraction, &mut report);
    covering_check(cfg, &mut report);
    formula_oracle_check(spec, cfg, &mut report);
    sandwich_check(
        spec,
        &ls,
        cfg,
        validation.band_sum.unwrap_or(0.0),
        &mut report,
    );

    Ok(report)
}

fn structure_check(spec: &SequenceSpec, ls: &LevelStructure, report: &mut VerifyReport) {
    report.checks_run += 1;
    if let Err(violation) = check_structure(ls, spec) {
        report.flag(CheckId::Structure, violation.to_string());
    }
}

fn counting_check(ls: &LevelStructure, cfg: &SuiteConfig, report: &mut VerifyReport) {
    for k in 1..=cfg.counting_span {
        for l in 1..=cfg.counting_span {
            if k + l + 1 > ls.depth() {
                continue;
            }
            report.checks_run += 1;
            match check_counting_lemmas(ls, k, l, cfg.samples) {
                Ok(counting) => {
                    for v in &counting.violations {
                        report.flag(
                            CheckId::CountingLemmas,
                            format!(
                                "(k={k}, l={l}) {:?} failed at x = {}, radius = {}, count = {}",
                                v.check, v.x, v.radius, v.count
                            ),
                        );
                    }
                }
                Err(e) => report.flag(
                    CheckId::CountingLemmas,
                    format!("(k={k}, l={l}) check could not run: {e}"),
                ),
            }
        }
    }
}

/// Measure constants at full depth and four levels shallower: the constants
/// themselves must be sane, and deepening the realization must not move
/// them much — a growing deviation constant is exactly the unboundedness
/// the scale-function bound rules out.
fn measure_check(
    spec: &SequenceSpec,
    ls: &LevelStructure,
    cfg: &SuiteConfig,
    inf_contraction: f64,
    report: &mut VerifyReport,
) {
    let shallow_depth = cfg.realize_depth - 4;
    let a = inf_contraction.clamp(0.05, 0.95);
    let shallow_ls = match build_levels(spec, shallow_depth, ls.placement(), ls.mode(), ls.seed()) {
        Ok(s) => s,
        Err(e) => {
            report.checks_run += 1;
            report.flag(CheckId::MeasureDrift, format!("shallow build failed: {e}"));
            return;
        }
    };
    // Radii resolvable even at the shallower depth; running both depths on
    // the identical set is what makes the drift comparison fair.
    let floor = crate::estimate::MEASURE_RESOLUTION_HEADROOM * shallow_ls.max_length(shallow_depth);
    let radii: Vec<f64> = (1..=shallow_depth)
        .map(|m| ls.tables().log_length()[m].exp())
        .filter(|&r| r >= floor)
        .collect();
    if radii.is_empty() {
        return;
    }
    report.checks_run += 1;
    let deep = match check_measure_properties(ls, &radii, cfg.samples / 2, a) {
        Ok(r) => r,
        Err(e) => {
            report.flag(
                CheckId::MeasureProperties,
                format!("check could not run: {e}"),
            );
            return;
        }
    };
    for (label, value) in [
        ("lambda", deep.lambda),
        ("alpha", deep.alpha),
        ("beta", deep.beta),
        ("sup deviation", deep.sup_deviation),
    ] {
        if !value.is_finite() {
            report.flag(
                CheckId::MeasureProperties,
                format!("{label} is not finite: {value}"),
            );
        }
    }
    if deep.alpha <= 1.0 {
        report.flag(
            CheckId::MeasureProperties,
            format!(
                "doubling lower constant alpha = {} does not exceed 1",
                deep.alpha
            ),
        );
    }

    // Ratios taken over one or two coarse radii are quotients of very small
    // interval counts and move in jumps; only judge drift across depths when
    // the shallow realization resolves a handful of them.
    if radii.len() < 4 {
        return;
    }
    report.checks_run += 1;
    let shallow = match check_measure_properties(&shallow_ls, &radii, cfg.samples / 2, a) {
        Ok(r) => r,
        Err(e) => {
            report.flag(CheckId::MeasureDrift, format!("shallow run failed: {e}"));
            return;
        }
    };
    let drift = (deep.lambda - shallow.lambda).abs() / shallow.lambda;
    if drift > 0.10 {
        report.flag(
            CheckId::MeasureDrift,
            format!(
                "lambda drifts {:.1}% when depth grows {} -> {} ({} -> {})",
                100.0 * drift,
                shallow_depth,
                cfg.realize_depth,
                shallow.lambda,
                deep.lambda
            ),
        );
    }
    if deep.sup_deviation > shallow.sup_deviation * 1.05 + 1e-9 {
        report.flag(
            CheckId::MeasureDrift,
            format!(
                "scale-function deviation grows with depth: {} -> {}",
                shallow.sup_deviation, deep.sup_deviation
            ),
        );
    }
}

fn covering_check(cfg: &SuiteConfig, report: &mut VerifyReport) {
    report.checks_run += 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed_c0de));
    for i in 0..cfg.cover_instances {
        let pieces = rng.random_range(1..=12usize);
        let mut cuts: Vec<f64> = (0..2 * pieces).map(|_| rng.random::<f64>()).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let segments: Vec<Segment> = cuts
            .chunks_exact(2)
            .map(|c| Segment {
                left: c[0],
                right: c[1],
            })
            .collect();
        let r = rng.random_range(0.01..0.2);
        let greedy = greedy_cover_count(&segments, r);
        let exact = exhaustive_cover_count(&segments, r);
        if greedy != exact {
            report.flag(
                CheckId::CoveringOptimality,
                format!(
                    "instance {i}: greedy used {greedy} balls, minimum is {exact} \
                     (r = {r}, segments = {segments:?})"
                ),
            );
        }
    }
}

/// Formula traces recomputed term by term from raw sequence values, with no
/// prefix tables, must match the table-driven path almost exactly.
fn formula_oracle_check(spec: &SequenceSpec, cfg: &SuiteConfig, report: &mut VerifyReport) {
    let depth = cfg.table_depth.clamp(16, 256);
    let tables = spec.prefix_tables(depth);
    let l_max = depth / 4;
    let tail = (l_max / 2).max(1);

    report.checks_run += 1;
    let fast_traces = assouad_dim_formula(&tables, l_max, tail)
        .and_then(|sup| lower_dim_bound_formula(&tables, l_max, tail).map(|inf| (sup, inf)));
    match fast_traces {
        Err(e) => report.flag(CheckId::FormulaOracle, format!("formula path failed: {e}")),
        Ok((sup_est, inf_est)) => {
            for (direction, est, is_sup) in [("sup", &sup_est, true), ("inf", &inf_est, false)] {
                let oracle_trace = oracle::dim_trace(spec, depth, l_max, is_sup);
                for (l0, (&fast, &(slow, _))) in
                    est.trace.iter().zip(oracle_trace.iter()).enumerate()
                {
                    if relative_gap(fast, slow) > 1e-10 {
                        report.flag(
                            CheckId::FormulaOracle,
                            format!(
                                "{direction} window trace diverges from direct recomputation \
                                 at l = {}: {fast} vs {slow}",
                                l0 + 1
                            ),
                        );
                    }
                }
            }
        }
    }

    report.checks_run += 1;
    let theta = 0.6;
    let k_end = (depth / 4).max(2);
    match crate::formulas::assouad_spectrum_formula(&tables, theta, 1..=k_end) {
        Err(e) => report.flag(CheckId::FormulaOracle, format!("spectrum path failed: {e}")),
        Ok(est) => match oracle::spectrum_trace(spec, theta, 1, k_end, depth) {
            None => report.flag(
                CheckId::FormulaOracle,
                "spectrum oracle could not pair levels at this depth".to_string(),
            ),
            Some(slow_trace) => {
                for (i, (&fast, &slow)) in est.trace.iter().zip(slow_trace.iter()).enumerate() {
                    if relative_gap(fast, slow) > 1e-10 {
                        report.flag(
                            CheckId::FormulaOracle,
                            format!(
                                "spectrum trace diverges from direct recomputation at \
                                 k = {}: {fast} vs {slow}",
                                i + 1
                            ),
                        );
                    }
                }
            }
        },
    }
}

/// Desk-scale sandwich: sampled exponents must sit below the Assouad
/// formula value (up to sampling slack) and the inf below the sup.
///
/// On banded realizations a short window's covering count carries the whole
/// accumulated ratio distortion, so those runs use deeper windows and widen
/// the slack by the worst log-distortion the band sum permits per window
/// level (`sum a_k` over `l_min` levels of contraction).
fn sandwich_check(
    spec: &SequenceSpec,
    ls: &LevelStructure,
    cfg: &SuiteConfig,
    band_sum: f64,
    report: &mut VerifyReport,
) {
    report.checks_run += 1;
    let (l_min, band_allowance) = match ls.mode() {
        RatioMode::Moran => (1usize, 0.0),
        RatioMode::CantorLike => {
            let c_max = spec
                .reachable_rules()
                .iter()
                .map(|&(_, r)| r.c)
                .fold(0.0f64, f64::max);
            let l_min = 4usize;
            (l_min, band_sum / (l_min as f64 * -c_max.ln()))
        }
    };
    let span = 3.min(ls.depth().saturating_sub(3));
    let pairs: Vec<(usize, usize)> = (1..=span)
        .flat_map(|k| (l_min..l_min + span).map(move |l| (k, l)))
        .filter(|&(k, l)| k + l + 1 <= ls.depth())
        .collect();
    let outcome = empirical_assouad(ls, &pairs, cfg.samples)
        .and_then(|sup| empirical_lower(ls, &pairs, cfg.samples).map(|inf| (sup, inf)));
    let (sup, inf) = match outcome {
        Ok(pair) => pair,
        Err(e) => {
            report.flag(
                CheckId::DimensionSandwich,
                format!("empirical estimates failed: {e}"),
            );
            return;
        }
    };
    if inf.value > sup.value + 1e-12 {
        report.flag(
            CheckId::DimensionSandwich,
            format!("sample inf {} exceeds sample sup {}", inf.value, sup.value),
        );
    }
    let depth = cfg.table_depth.clamp(16, 256);
    let tables = spec.prefix_tables(depth);
    match assouad_dim_formula(&tables, depth / 4, (depth / 8).max(1)) {
        Err(e) => report.flag(
            CheckId::DimensionSandwich,
            format!("formula value unavailable: {e}"),
        ),
        Ok(formula) => {
            let slack = 0.05 + band_allowance;
            if sup.value > formula.value + slack {
                report.flag(
                    CheckId::DimensionSandwich,
                    format!(
                        "sampled sup {} overshoots the formula value {} by more than {slack}",
                        sup.value, formula.value
                    ),
                );
            }
        }
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
