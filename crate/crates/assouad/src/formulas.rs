//! Closed-form dimension and spectrum formulas evaluated from prefix tables.
//!
//! Every quantity here is the finite truncation of a limsup or liminf, so
//! each result carries its full trace, the trailing index window the extremum
//! was taken over, and a spread diagnostic — a small spread says the trace
//! has settled, a large one says the value is still moving at this depth.
//!
//! The lower-dimension sweep deserves a loud caveat, repeated on its result
//! kind: for branching sequences that are merely bounded it yields an *upper
//! bound* on the lower dimension, not the lower dimension itself.

use std::fmt;
use std::io::{self, Write};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequences::PrefixTables;

/// Relative slack used when comparing log-lengths at level-pairing
/// boundaries, where an exact power like `delta_6 = delta_3^2` lands a few
/// ulps on the wrong side of the threshold.
const PAIRING_TIE_TOLERANCE: f64 = 1e-9;

/// Fraction of the inner sweep range that counts as "near the truncation
/// boundary" for the argmax warning.
const BOUNDARY_FRACTION: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulaError {
    #[error("tables of depth {depth} are too shallow: this sweep needs depth >= {required}")]
    DepthTooSmall { depth: usize, required: usize },
    #[error(
        "level pairing for theta = {theta}, k = {k} runs past depth {depth}; \
         roughly {required} levels are needed"
    )]
    PairingBeyondDepth {
        theta: f64,
        k: usize,
        required: usize,
        depth: usize,
    },
    #[error("theta must lie strictly between 0 and 1, got {theta}")]
    ThetaOutOfRange { theta: f64 },
    #[error("theta grid must be strictly increasing and inside (0, 1)")]
    BadThetaGrid,
    #[error("radius grid must be non-empty and strictly decreasing")]
    BadRadiusGrid,
    #[error("invalid sweep window: {0}")]
    BadWindow(String),
    #[error(
        "scale ln r = {log_r} lies at or below the deepest bracket \
         ln(delta_K * J) = {log_floor}; deepen the tables"
    )]
    ScaleBelowDepth { log_r: f64, log_floor: f64 },
    #[error("scale r must satisfy 0 < r < J (got ln r - ln J = {log_ratio})")]
    ScaleNotBelowDiameter { log_ratio: f64 },
}

/// What a [`DimensionEstimate`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    AssouadDimension,
    /// An upper bound on the lower dimension — not the lower dimension
    /// itself. The dual sweep is only an inequality for bounded branching.
    LowerDimensionUpperBound,
    AssouadSpectrumPoint,
    LowerSpectrumPoint,
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            EstimateKind::AssouadDimension => "Assouad dimension",
            EstimateKind::LowerDimensionUpperBound => {
                "upper bound on the lower dimension (not the lower dimension itself)"
            }
            EstimateKind::AssouadSpectrumPoint => "Assouad spectrum point",
            EstimateKind::LowerSpectrumPoint => "lower spectrum point",
        };
        f.write_str(label)
    }
}

/// Inclusive index range (in the trace's own index domain, `l` or `k`) that
/// the truncated limsup/liminf was taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailWindow {
    pub first: usize,
    pub last: usize,
}

/// A truncated limsup/liminf together with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub kind: EstimateKind,
    pub value: f64,
    /// One entry per swept outer index, starting at `first_index`.
    pub trace: Vec<f64>,
    pub first_index: usize,
    pub tail_window: TailWindow,
    /// max - min of the trace over the tail window.
    pub spread: f64,
    /// Outer index attaining `value` (first such, scanning the tail window).
    pub extremum_at: usize,
    /// Set when the extremal trace entry's inner argument sits in the last
    /// 10% of its truncated range — the tell of an unconverged sweep.
    pub boundary_warning: bool,
}

#[derive(Clone, Copy)]
enum Extremum {
    Max,
    Min,
}

/// Collapses a trace to a tail-window extremum plus diagnostics. `tail_len`
/// entries from the end form the window; `inner_boundary` reports, for a
/// given outer index, whether that entry's inner extremum hugged its
/// truncation boundary.
fn summarize(
    kind: EstimateKind,
    trace: Vec<f64>,
    first_index: usize,
    tail_len: usize,
    direction: Extremum,
    inner_boundary: impl Fn(usize) -> bool,
) -> DimensionEstimate {
    assert!(!trace.is_empty() && tail_len >= 1 && tail_len <= trace.len());
    let tail_start = trace.len() - tail_len;
    let mut best = trace[tail_start];
    let mut best_at = tail_start;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &v) in trace.iter().enumerate().skip(tail_start) {
        let better = match direction {
            Extremum::Max => v > best,
            Extremum::Min => v < best,
        };
        if better {
            best = v;
            best_at = i;
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let extremum_at = first_index + best_at;
    DimensionEstimate {
        kind,
        value: best,
        trace,
        first_index,
        tail_window: TailWindow {
            first: first_index + tail_start,
            last: first_index + tail_len - 1 + tail_start,
        },
        spread: hi - lo,
        extremum_at,
        boundary_warning: inner_boundary(extremum_at),
    }
}

/// One entry of the two-index sweep behind the dimension formulas: the
/// extremal window ratio over all window starts for a fixed window length.
/// The reported start index is the *smallest* one within 1e-9 relative of
/// the extremum, so flat traces (constant specs, where every ratio agrees up
/// to summation noise) don't spuriously report a boundary-hugging argmax.
fn sweep_entry(tables: &PrefixTables, l: usize, direction: Extremum) -> (f64, usize) {
    let depth = tables.depth();
    let ratio_at = |k: usize| tables.count_window(k, k + l) / -tables.length_window(k, k + l);
    let mut best = match direction {
        Extremum::Max => f64::NEG_INFINITY,
        Extremum::Min => f64::INFINITY,
    };
    for k in 1..=depth - l {
        let ratio = ratio_at(k);
        best = match direction {
            Extremum::Max => best.max(ratio),
            Extremum::Min => best.min(ratio),
        };
    }
    let slack = 1e-9 * best.abs();
    let best_k = (1..=depth - l)
        .find(|&k| match direction {
            Extremum::Max => ratio_at(k) >= best - slack,
            Extremum::Min => ratio_at(k) <= best + slack,
        })
        .expect("extremum was attained by some start index");
    (best, best_k)
}

fn dim_sweep(
    tables: &PrefixTables,
    l_max: usize,
    tail: usize,
    kind: EstimateKind,
    direction: Extremum,
) -> Result<DimensionEstimate, FormulaError> {
    if l_max == 0 || tail == 0 || tail > l_max {
        return Err(FormulaError::BadWindow(format!(
            "need 1 <= tail <= l_max, got l_max = {l_max}, tail = {tail}"
        )));
    }
    let required = l_max + tail;
    if tables.depth() < required {
        return Err(FormulaError::DepthTooSmall {
            depth: tables.depth(),
            required,
        });
    }
    let entries: Vec<(f64, usize)> = (1..=l_max)
        .into_par_iter()
        .map(|l| sweep_entry(tables, l, direction))
        .collect();
    let trace: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let depth = tables.depth();
    Ok(summarize(kind, trace, 1, tail, direction, |l| {
        let argmax_k = entries[l - 1].1;
        argmax_k as f64 >= BOUNDARY_FRACTION * (depth - l) as f64
    }))
}

/// Truncated evaluation of the Assouad-dimension formula: for each window
/// length `l` take the sup over all window starts of
/// `log(n_{k+1} ... n_{k+l}) / -log(c_{k+1} ... c_{k+l})`, then the max of
/// the last `tail` lengths.
pub fn assouad_dim_formula(
    tables: &PrefixTables,
    l_max: usize,
    tail: usize,
) -> Result<DimensionEstimate, FormulaError> {
    dim_sweep(
        tables,
        l_max,
        tail,
        EstimateKind::AssouadDimension,
        Extremum::Max,
    )
}

/// The dual sweep (inf over starts, min over the tail). The result is an
/// upper bound on the lower dimension only; its kind says so.
pub fn lower_dim_bound_formula(
    tables: &PrefixTables,
    l_max: usize,
    tail: usize,
) -> Result<DimensionEstimate, FormulaError> {
    dim_sweep(
        tables,
        l_max,
        tail,
        EstimateKind::LowerDimensionUpperBound,
        Extremum::Min,
    )
}

fn check_theta(theta: f64) -> Result<(), FormulaError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(FormulaError::ThetaOutOfRange { theta });
    }
    Ok(())
}

/// Deepest level whose intervals are still at least as long as
/// `delta_k^(1/theta)`: the largest `l` with `logDelta[l] >= logDelta[k]/theta`,
/// compared with a 1e-9 relative tie tolerance so exact powers resolve to
/// the deeper level. Always `>= k`.
pub fn level_index(tables: &PrefixTables, theta: f64, k: usize) -> Result<usize, FormulaError> {
    check_theta(theta)?;
    assert!(k >= 1, "level pairing starts at k = 1");
    let depth = tables.depth();
    if k > depth {
        return Err(FormulaError::PairingBeyondDepth {
            theta,
            k,
            required: (k as f64 / theta).ceil() as usize + 2,
            depth,
        });
    }
    let log_delta = tables.log_length();
    let threshold = log_delta[k] / theta;
    let slack = PAIRING_TIE_TOLERANCE * threshold.abs();
    // log_delta decreases in l; the accepted prefix is l with
    // log_delta[l] >= threshold (up to the tie slack).
    let l = log_delta.partition_point(|&v| v >= threshold - slack) - 1;
    if l == depth {
        return Err(FormulaError::PairingBeyondDepth {
            theta,
            k,
            required: (k as f64 / theta).ceil() as usize + 2,
            depth,
        });
    }
    debug_assert!(l >= k && log_delta[l + 1] < threshold + slack);
    Ok(l)
}

fn spectrum_sweep(
    tables: &PrefixTables,
    theta: f64,
    k_window: RangeInclusive<usize>,
    kind: EstimateKind,
    direction: Extremum,
) -> Result<DimensionEstimate, FormulaError> {
    check_theta(theta)?;
    let (start, end) = (*k_window.start(), *k_window.end());
    if start < 1 || end < start {
        return Err(FormulaError::BadWindow(format!(
            "need 1 <= start <= end, got {start}..={end}"
        )));
    }
    let log_n = tables.log_count();
    let log_delta = tables.log_length();
    let trace = (start..=end)
        .map(|k| {
            let l = level_index(tables, theta, k)?;
            let denominator = (1.0 - 1.0 / theta) * log_delta[k];
            assert!(
                denominator > 0.0,
                "spectrum denominator must be positive for theta in (0,1); \
                 tables or theta are corrupt (theta = {theta}, k = {k})"
            );
            Ok((log_n[l] - log_n[k]) / denominator)
        })
        .collect::<Result<Vec<f64>, FormulaError>>()?;
    let tail = trace.len().div_ceil(2);
    Ok(summarize(kind, trace, start, tail, direction, |_| false))
}

/// Spectrum value at `theta` from the level-pairing formula: the trace is
/// `t_k = (logN[l(theta,k)] - logN[k]) / ((1 - 1/theta) logDelta[k])` over
/// the swept `k` range, and the limsup is estimated as the max over the
/// trailing half of that range.
pub fn assouad_spectrum_formula(
    tables: &PrefixTables,
    theta: f64,
    k_window: RangeInclusive<usize>,
) -> Result<DimensionEstimate, FormulaError> {
    spectrum_sweep(
        tables,
        theta,
        k_window,
        EstimateKind::AssouadSpectrumPoint,
        Extremum::Max,
    )
}

/// Liminf variant of [`assouad_spectrum_formula`] (min over the tail).
pub fn lower_spectrum_formula(
    tables: &PrefixTables,
    theta: f64,
    k_window: RangeInclusive<usize>,
) -> Result<DimensionEstimate, FormulaError> {
    spectrum_sweep(
        tables,
        theta,
        k_window,
        EstimateKind::LowerSpectrumPoint,
        Extremum::Min,
    )
}

/// Which spectrum a curve or scale-function sweep estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumVariant {
    Assouad,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub theta: f64,
    pub estimate: DimensionEstimate,
}

/// Spectrum estimates along a strictly increasing theta grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumCurve {
    /// CSV rows `theta,value,spread` (with header, '.' decimals, newline
    /// terminated).
    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "theta,value,spread")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{}",
                p.theta, p.estimate.value, p.estimate.spread
            )?;
        }
        Ok(())
    }
}

fn check_theta_grid(theta_grid: &[f64]) -> Result<(), FormulaError> {
    let increasing = theta_grid.windows(2).all(|w| w[0] < w[1]);
    let in_range = theta_grid.iter().all(|&t| t > 0.0 && t < 1.0);
    if increasing && in_range {
        Ok(())
    } else {
        Err(FormulaError::BadThetaGrid)
    }
}

/// Pointwise spectrum formula along a theta grid (empty grid, empty curve).
pub fn spectrum_curve(
    tables: &PrefixTables,
    theta_grid: &[f64],
    k_window: RangeInclusive<usize>,
    variant: SpectrumVariant,
) -> Result<SpectrumCurve, FormulaError> {
    check_theta_grid(theta_grid)?;
    let points = theta_grid
        .par_iter()
        .map(|&theta| {
            let estimate = match variant {
                SpectrumVariant::Assouad => {
                    assouad_spectrum_formula(tables, theta, k_window.clone())?
                }
                SpectrumVariant::Lower => lower_spectrum_formula(tables, theta, k_window.clone())?,
            };
            Ok(SpectrumPoint { theta, estimate })
        })
        .collect::<Result<Vec<_>, FormulaError>>()?;
    Ok(SpectrumCurve { points })
}

/// Level `k` whose length bracket `(delta_k J, delta_{k-1} J]` contains the
/// scale with log `log_r`, given `log_j_diam = ln J`. Radii are handled in
/// log space throughout so brackets thousands of levels deep don't underflow.
pub fn bracket_level(
    tables: &PrefixTables,
    log_r: f64,
    log_j_diam: f64,
) -> Result<usize, FormulaError> {
    let t = log_r - log_j_diam;
    if t >= 0.0 {
        return Err(FormulaError::ScaleNotBelowDiameter { log_ratio: t });
    }
    let log_delta = tables.log_length();
    // First level strictly shorter than the scale; the prior level's length
    // is >= it by minimality, which is exactly the bracket.
    let k = log_delta.partition_point(|&v| v >= t);
    if k > tables.depth() {
        return Err(FormulaError::ScaleBelowDepth {
            log_r,
            log_floor: log_delta[tables.depth()] + log_j_diam,
        });
    }
    Ok(k)
}

/// The step scale function `h(r) = logN[k] / -logDelta[k]` on the bracket
/// `delta_k J < r <= delta_{k-1} J`.
pub fn scale_function(tables: &PrefixTables, r: f64, j_diam: f64) -> Result<f64, FormulaError> {
    assert!(r > 0.0 && j_diam > 0.0, "scales must be positive");
    let k = bracket_level(tables, r.ln(), j_diam.ln())?;
    Ok(tables.log_count()[k] / -tables.log_length()[k])
}

/// Spectrum estimate at `theta` recovered purely from the scale function:
/// per grid scale `r` the quotient
/// `|h(r) ln r - h(r^(1/theta)) ln(r^(1/theta))| / |(1 - 1/theta) ln r|`,
/// with the limsup (or liminf) taken over the smallest-scale half of the
/// grid. `log_r_grid` carries `ln r` values, strictly decreasing; working in
/// logs keeps scales like `delta_8000` representable.
pub fn spectrum_via_scale_function(
    tables: &PrefixTables,
    theta: f64,
    log_r_grid: &[f64],
    log_j_diam: f64,
    variant: SpectrumVariant,
) -> Result<DimensionEstimate, FormulaError> {
    check_theta(theta)?;
    if log_r_grid.is_empty() || log_r_grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(FormulaError::BadRadiusGrid);
    }
    let log_n = tables.log_count();
    let log_delta = tables.log_length();
    let h_at = |log_r: f64| -> Result<f64, FormulaError> {
        let k = bracket_level(tables, log_r, log_j_diam)?;
        Ok(log_n[k] / -log_delta[k])
    };
    let trace = log_r_grid
        .iter()
        .map(|&log_r| {
            let coarse = h_at(log_r)? * log_r;
            let fine = h_at(log_r / theta)? * (log_r / theta);
            Ok((coarse - fine).abs() / ((1.0 - 1.0 / theta) * log_r).abs())
        })
        .collect::<Result<Vec<f64>, FormulaError>>()?;
    let tail = trace.len().div_ceil(2);
    let (kind, direction) = match variant {
        SpectrumVariant::Assouad => (EstimateKind::AssouadSpectrumPoint, Extremum::Max),
        SpectrumVariant::Lower => (EstimateKind::LowerSpectrumPoint, Extremum::Min),
    };
    Ok(summarize(kind, trace, 0, tail, direction, |_| false))
}

/// Brute-force re-derivations of every formula trace, straight from the
/// per-level rules with term-by-term window sums — no prefix tables, no
/// shared code with the fast path. These exist to cross-check the real
/// implementations and are deliberately O(depth) per window.
pub mod oracle {
    use crate::sequences::SequenceSpec;

    /// `sum of ln n_i` over the window `j < i <= k`.
    pub fn window_log_count(spec: &SequenceSpec, j: usize, k: usize) -> f64 {
        (j + 1..=k).map(|i| (spec.eval(i).n as f64).ln()).sum()
    }

    /// `sum of ln c_i` over the window `j < i <= k`.
    pub fn window_log_length(spec: &SequenceSpec, j: usize, k: usize) -> f64 {
        (j + 1..=k).map(|i| spec.eval(i).c.ln()).sum()
    }

    /// Per-window-length sup (or inf) of the count/length ratio, with its
    /// attaining start index.
    pub fn dim_trace(
        spec: &SequenceSpec,
        depth: usize,
        l_max: usize,
        sup: bool,
    ) -> Vec<(f64, usize)> {
        (1..=l_max)
            .map(|l| {
                let mut best = if sup {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                };
                let mut best_k = 1;
                for k in 1..=depth - l {
                    let ratio =
                        window_log_count(spec, k, k + l) / -window_log_length(spec, k, k + l);
                    if (sup && ratio > best) || (!sup && ratio < best) {
                        best = ratio;
                        best_k = k;
                    }
                }
                (best, best_k)
            })
            .collect()
    }

    /// Largest `l <= depth` with `logDelta[l] >= logDelta[k]/theta`, by
    /// linear scan over raw products. `None` when the scan runs off the end.
    pub fn level_index(spec: &SequenceSpec, theta: f64, k: usize, depth: usize) -> Option<usize> {
        let threshold = window_log_length(spec, 0, k) / theta;
        let slack = 1e-9 * threshold.abs();
        let mut l = k;
        loop {
            if l + 1 > depth {
                return None;
            }
            if window_log_length(spec, 0, l + 1) >= threshold - slack {
                l += 1;
            } else {
                return Some(l);
            }
        }
    }

    /// Spectrum trace over a k range, from raw products.
    pub fn spectrum_trace(
        spec: &SequenceSpec,
        theta: f64,
        k_start: usize,
        k_end: usize,
        depth: usize,
    ) -> Option<Vec<f64>> {
        (k_start..=k_end)
            .map(|k| {
                let l = level_index(spec, theta, k, depth)?;
                let denominator = (1.0 - 1.0 / theta) * window_log_length(spec, 0, k);
                Some(window_log_count(spec, k, l) / denominator)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{ClassFlags, LevelRule, SequenceKind, SequenceSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn constant_spec(n: u32, c: f64) -> SequenceSpec {
        SequenceSpec::new(
            SequenceKind::Constant(LevelRule::new(n, c)),
            ClassFlags {
                moran: true,
                cantor_like: true,
            },
        )
    }

    fn periodic_spec(rules: Vec<LevelRule>) -> SequenceSpec {
        SequenceSpec::new(SequenceKind::Periodic(rules), ClassFlags::default())
    }

    fn dyadic_block_spec() -> SequenceSpec {
        SequenceSpec::new(
            SequenceKind::BlockRule {
                base: 4,
                factor: 2,
                inside: LevelRule::new(3, 0.25),
                outside: LevelRule::new(2, 0.25),
            },
            ClassFlags {
                moran: true,
                cantor_like: true,
            },
        )
    }

    #[test]
    fn constant_specs_collapse_to_log_ratio_in_all_four_sweeps() {
        for (n, c) in [(2u32, 1.0f64 / 3.0), (2, 0.25), (3, 0.2)] {
            let expected = (n as f64).ln() / -c.ln();
            let tables = constant_spec(n, c).prefix_tables(96);
            let a = assouad_dim_formula(&tables, 48, 24).unwrap();
            let l = lower_dim_bound_formula(&tables, 48, 24).unwrap();
            let sa = assouad_spectrum_formula(&tables, 0.5, 1..=40).unwrap();
            let sl = lower_spectrum_formula(&tables, 0.5, 1..=40).unwrap();
            for est in [&a, &l, &sa, &sl] {
                assert!(
                    (est.value - expected).abs() <= 1e-12,
                    "{:?} for constant ({n}, {c}): got {}, want {expected}",
                    est.kind,
                    est.value
                );
                assert!(est.spread <= 1e-12, "constant trace should be flat");
                assert!(!est.boundary_warning);
            }
        }
    }

    #[test]
    fn block_rule_assouad_approaches_dense_block_ratio() {
        let tables = dyadic_block_spec().prefix_tables(1024);
        let est = assouad_dim_formula(&tables, 512, 256).unwrap();
        let target = 3f64.ln() / 4f64.ln();
        assert!(
            (est.value - target).abs() < 0.02,
            "got {}, want ~{target}",
            est.value
        );
        assert!(
            !est.boundary_warning,
            "sup should be attained by an interior block"
        );
    }

    #[test]
    fn block_rule_lower_bound_is_exactly_half_at_this_depth() {
        // All-2 runs longer than any swept window keep the inf pinned at
        // log2/log4 = 1/2 for every window length in the tail.
        let tables = dyadic_block_spec().prefix_tables(1024);
        let est = lower_dim_bound_formula(&tables, 512, 256).unwrap();
        assert_abs_diff_eq!(est.value, 0.5, epsilon = 1e-12);
        assert_eq!(est.kind, EstimateKind::LowerDimensionUpperBound);
        assert!(est.kind.to_string().contains("upper bound"));
    }

    #[test]
    fn interleaving_periodic_lower_bound_near_its_limit() {
        let spec = periodic_spec(vec![LevelRule::new(2, 0.25), LevelRule::new(3, 0.25)]);
        let tables = spec.prefix_tables(256);
        let est = lower_dim_bound_formula(&tables, 128, 64).unwrap();
        let limit = 6f64.ln() / 16f64.ln();
        assert!(
            (est.value - limit).abs() < 0.01,
            "got {}, limit {limit}",
            est.value
        );
        assert!(
            est.value <= limit + 1e-12,
            "odd windows approach from below"
        );
    }

    #[test]
    fn dimension_sweeps_demand_enough_depth() {
        let tables = constant_spec(2, 0.25).prefix_tables(16);
        let err = assouad_dim_formula(&tables, 12, 8).unwrap_err();
        assert_eq!(
            err,
            FormulaError::DepthTooSmall {
                depth: 16,
                required: 20
            }
        );
        assert!(assouad_dim_formula(&tables, 0, 0).is_err());
        assert!(lower_dim_bound_formula(&tables, 8, 9).is_err());
    }

    #[test]
    fn boundary_warning_fires_when_sup_lives_at_the_truncation_edge() {
        // Branching jumps to 3 only in the last few levels, so every window
        // ratio peaks at the largest admissible start index.
        let spec = SequenceSpec::new(
            SequenceKind::ExplicitWithTail {
                head: vec![LevelRule::new(2, 0.25); 95],
                tail: LevelRule::new(3, 0.25),
            },
            ClassFlags::default(),
        );
        let tables = spec.prefix_tables(100);
        let est = assouad_dim_formula(&tables, 4, 2).unwrap();
        assert!(est.boundary_warning, "sup at the edge must be flagged");
    }

    #[test]
    fn level_index_resolves_exact_powers_to_the_deeper_level() {
        let tables_half = constant_spec(2, 0.5).prefix_tables(32);
        assert_eq!(level_index(&tables_half, 0.5, 3).unwrap(), 6);
        let tables_third = constant_spec(2, 1.0 / 3.0).prefix_tables(32);
        assert_eq!(level_index(&tables_third, 0.5, 4).unwrap(), 8);
    }

    #[test]
    fn level_index_errors_name_a_usable_depth() {
        let tables = constant_spec(2, 0.5).prefix_tables(10);
        let err = level_index(&tables, 0.5, 6).unwrap_err();
        match err {
            FormulaError::PairingBeyondDepth { required, .. } => {
                assert!(required >= 12, "hint {required} should cover k/theta")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn spectrum_rejects_theta_outside_unit_interval() {
        let tables = constant_spec(2, 0.5).prefix_tables(16);
        for theta in [0.0, 1.0, -0.5, 1.5] {
            assert!(matches!(
                assouad_spectrum_formula(&tables, theta, 1..=4),
                Err(FormulaError::ThetaOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn block_rule_spectrum_separates_the_two_variants() {
        let tables = dyadic_block_spec().prefix_tables(2560);
        let a = assouad_spectrum_formula(&tables, 0.5, 1..=1024).unwrap();
        let l = lower_spectrum_formula(&tables, 0.5, 1..=1024).unwrap();
        // Start indices just before an all-3 block put the whole paired
        // window inside it, so the sup is attained exactly.
        assert_abs_diff_eq!(a.value, 3f64.ln() / 4f64.ln(), epsilon = 1e-9);
        // The tail window narrowly misses the start indices whose windows sit
        // wholly in an all-2 run, leaving the min a whisker above 1/2.
        assert!(l.value > 0.5 && l.value < 0.55, "lower {}", l.value);
        assert!(l.value < a.value);
    }

    #[test]
    fn spectrum_curve_is_empty_on_empty_grid_and_rejects_disorder() {
        let tables = constant_spec(2, 0.25).prefix_tables(64);
        let curve = spectrum_curve(&tables, &[], 1..=16, SpectrumVariant::Assouad).unwrap();
        assert!(curve.points.is_empty());
        assert!(matches!(
            spectrum_curve(&tables, &[0.5, 0.5], 1..=16, SpectrumVariant::Assouad),
            Err(FormulaError::BadThetaGrid)
        ));
        assert!(matches!(
            spectrum_curve(&tables, &[0.2, 1.2], 1..=16, SpectrumVariant::Assouad),
            Err(FormulaError::BadThetaGrid)
        ));
    }

    #[test]
    fn spectrum_curve_csv_has_theta_value_spread_rows() {
        let tables = constant_spec(2, 1.0 / 3.0).prefix_tables(64);
        let grid = [0.25, 0.5, 0.75];
        let curve = spectrum_curve(&tables, &grid, 1..=12, SpectrumVariant::Assouad).unwrap();
        assert_eq!(curve.points.len(), 3);
        for p in &curve.points {
            assert_abs_diff_eq!(p.estimate.value, 2f64.ln() / 3f64.ln(), epsilon = 1e-12);
        }
        let mut out = Vec::new();
        curve.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("theta,value,spread\n0.25,"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn scale_function_brackets_match_hand_computed_levels() {
        let tables = constant_spec(2, 1.0 / 3.0).prefix_tables(16);
        // 1/9 < 0.2 <= 1/3 puts 0.2 in the level-2 bracket.
        assert_eq!(bracket_level(&tables, 0.2f64.ln(), 0.0).unwrap(), 2);
        assert_abs_diff_eq!(
            scale_function(&tables, 0.2, 1.0).unwrap(),
            2f64.ln() / 3f64.ln(),
            epsilon = 1e-12
        );
        // The bracket is left-open, so r = 1/3 itself falls to the (1/9, 1/3]
        // bracket; h is the same because the spec is constant.
        assert_abs_diff_eq!(
            scale_function(&tables, 1.0 / 3.0, 1.0).unwrap(),
            2f64.ln() / 3f64.ln(),
            epsilon = 1e-12
        );

        let periodic = periodic_spec(vec![LevelRule::new(2, 0.25), LevelRule::new(3, 0.2)]);
        let tables = periodic.prefix_tables(16);
        // delta_1 = 1/4, delta_2 = 1/20, delta_3 = 1/80; 1/80 < 0.03 <= 1/20.
        assert_eq!(bracket_level(&tables, 0.03f64.ln(), 0.0).unwrap(), 3);
        assert_abs_diff_eq!(
            scale_function(&tables, 0.03, 1.0).unwrap(),
            12f64.ln() / 80f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn scale_function_rejects_scales_outside_the_table_range() {
        let tables = constant_spec(2, 1.0 / 3.0).prefix_tables(8);
        assert!(matches!(
            scale_function(&tables, 1.0, 1.0),
            Err(FormulaError::ScaleNotBelowDiameter { .. })
        ));
        assert!(matches!(
            scale_function(&tables, 1e-6, 1.0),
            Err(FormulaError::ScaleBelowDepth { .. })
        ));
    }

    #[test]
    fn scale_function_spectrum_is_flat_for_constant_specs() {
        let tables = constant_spec(2, 1.0 / 3.0).prefix_tables(64);
        let log_third = (1.0f64 / 3.0).ln();
        let grid: Vec<f64> = (2..=20).map(|m| (m as f64 + 0.5) * log_third).collect();
        let est = spectrum_via_scale_function(&tables, 0.5, &grid, 0.0, SpectrumVariant::Assouad)
            .unwrap();
        assert_abs_diff_eq!(est.value, 2f64.ln() / 3f64.ln(), epsilon = 1e-12);
        assert!(est.spread <= 1e-12);

        let single =
            spectrum_via_scale_function(&tables, 0.5, &grid[..1], 0.0, SpectrumVariant::Assouad)
                .unwrap();
        assert_eq!(single.trace.len(), 1);
        assert_abs_diff_eq!(single.spread, 0.0);
    }

    #[test]
    fn scale_function_spectrum_rejects_bad_grids() {
        let tables = constant_spec(2, 1.0 / 3.0).prefix_tables(16);
        assert!(matches!(
            spectrum_via_scale_function(&tables, 0.5, &[], 0.0, SpectrumVariant::Assouad),
            Err(FormulaError::BadRadiusGrid)
        ));
        assert!(matches!(
            spectrum_via_scale_function(&tables, 0.5, &[-2.0, -1.0], 0.0, SpectrumVariant::Assouad),
            Err(FormulaError::BadRadiusGrid)
        ));
    }

    #[test]
    fn fast_sweeps_match_raw_product_oracles() {
        let spec = periodic_spec(vec![
            LevelRule::new(2, 0.3),
            LevelRule::new(4, 0.2),
            LevelRule::new(3, 0.25),
        ]);
        let depth = 128;
        let tables = spec.prefix_tables(depth);

        let fast = assouad_dim_formula(&tables, 48, 16).unwrap();
        let slow = oracle::dim_trace(&spec, depth, 48, true);
        for (f, (s, _)) in fast.trace.iter().zip(&slow) {
            assert!((f - s).abs() <= 1e-10 * s.abs(), "{f} vs {s}");
        }

        let fast = lower_dim_bound_formula(&tables, 48, 16).unwrap();
        let slow = oracle::dim_trace(&spec, depth, 48, false);
        for (f, (s, _)) in fast.trace.iter().zip(&slow) {
            assert!((f - s).abs() <= 1e-10 * s.abs(), "{f} vs {s}");
        }

        let fast = assouad_spectrum_formula(&tables, 0.6, 1..=40).unwrap();
        let slow = oracle::spectrum_trace(&spec, 0.6, 1, 40, depth).unwrap();
        for (f, s) in fast.trace.iter().zip(&slow) {
            assert!((f - s).abs() <= 1e-10 * s.abs(), "{f} vs {s}");
        }

        for k in [1, 5, 17] {
            assert_eq!(
                level_index(&tables, 0.37, k).unwrap(),
                oracle::level_index(&spec, 0.37, k, depth).unwrap()
            );
        }
    }

    proptest! {
        /// The returned pairing level always satisfies the defining bracket:
        /// lengths at l still clear the threshold, lengths at l+1 do not.
        #[test]
        fn level_index_bracketing_holds(
            c1 in 0.15f64..0.45,
            c2 in 0.15f64..0.45,
            theta in 0.15f64..0.9,
            k in 1usize..12,
        ) {
            let spec = periodic_spec(vec![LevelRule::new(2, c1), LevelRule::new(3, c2)]);
            let tables = spec.prefix_tables(256);
            let l = level_index(&tables, theta, k).unwrap();
            let threshold = tables.log_length()[k] / theta;
            let slack = 1e-9 * threshold.abs();
            prop_assert!(l >= k);
            prop_assert!(tables.log_length()[l] >= threshold - slack);
            prop_assert!(tables.log_length()[l + 1] < threshold + slack);
        }

        /// Min-based and max-based sweeps of the same trace keep their order,
        /// for both the dimension and the spectrum formulas.
        #[test]
        fn lower_never_exceeds_assouad(
            n1 in 2u32..5,
            n2 in 2u32..5,
            c1 in 0.1f64..0.3,
            c2 in 0.1f64..0.3,
            theta in 0.2f64..0.85,
        ) {
            let spec = periodic_spec(vec![LevelRule::new(n1, c1), LevelRule::new(n2, c2)]);
            let tables = spec.prefix_tables(128);
            let a = assouad_dim_formula(&tables, 32, 16).unwrap();
            let l = lower_dim_bound_formula(&tables, 32, 16).unwrap();
            prop_assert!(l.value <= a.value + 1e-12);
            let sa = assouad_spectrum_formula(&tables, theta, 1..=24).unwrap();
            let sl = lower_spectrum_formula(&tables, theta, 1..=24).unwrap();
            prop_assert!(sl.value <= sa.value + 1e-12);
        }

        /// Tail-window values and diagnostics are internally consistent.
        #[test]
        fn estimate_invariants_hold(
            n in 2u32..6,
            c in 0.1f64..0.4,
            l_max in 4usize..24,
        ) {
            let tables = constant_spec(n, c).prefix_tables(64);
            let tail = l_max / 2 + 1;
            let est = assouad_dim_formula(&tables, l_max, tail).unwrap();
            prop_assert!(est.spread >= 0.0);
            let window: Vec<f64> = est.trace
                [(est.tail_window.first - est.first_index)..=(est.tail_window.last - est.first_index)]
                .to_vec();
            let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(est.value >= lo && est.value <= hi);
        }
    }
}
