//! Exact covering numbers on finite-depth realizations and the empirical
//! dimension estimates built from them.
//!
//! The set is approximated by its deepest materialized level: once every
//! interval at that level is shorter than the covering radius `r`, covering
//! the skeleton and covering the underlying set need the same number of
//! balls, so "exact at desk scale" is a structural fact rather than a hope.
//! Balls are closed throughout; touching an interval at a single endpoint
//! counts as meeting it.
//!
//! Alongside the estimators live the proof-level checkers: the four
//! ball/interval counting facts used to bound covering numbers level by
//! level, and the doubling/uniformity constants of the natural measure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::{
    count_meeting, meeting_range, Interval, LevelStructure, LocateOutcome, StructureError,
};
use crate::formulas::{scale_function, FormulaError, SpectrumVariant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("scale pair needs 0 < r < R, got r = {r}, R = {big_r}")]
    BadScalePair { big_r: f64, r: f64 },
    #[error(
        "skeleton at level {level} is too coarse: longest interval {max_length} \
         exceeds the covering radius {r}; deepen the realization"
    )]
    SkeletonTooCoarse {
        level: usize,
        max_length: f64,
        r: f64,
    },
    #[error("x = {x} is not in the level-{level} skeleton")]
    PointOutsideSkeleton { x: f64, level: usize },
    #[error("no samples or scale pairs to take an extremum over")]
    EmptySample,
    #[error(
        "counting checks at (k = {k}, l = {l}) need depth >= {required}, structure has {depth}"
    )]
    CountingDepth {
        k: usize,
        l: usize,
        required: usize,
        depth: usize,
    },
    #[error("no radius in the list survives the level-{depth} discretization cutoff {cutoff}")]
    NoUsableRadii { cutoff: f64, depth: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Two covering scales, optionally tagged with the levels that produced them
/// (`R = delta_k`, `r = delta_(k+l)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePair {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub r: f64,
    pub levels: Option<(usize, usize)>,
}

impl ScalePair {
    pub fn new(big_r: f64, r: f64) -> Result<Self, EstimateError> {
        if !(r > 0.0 && r < big_r) {
            return Err(EstimateError::BadScalePair { big_r, r });
        }
        Ok(ScalePair {
            big_r,
            r,
            levels: None,
        })
    }

    /// Scale pair read off the nominal tables: `R = delta_k`, `r = delta_(k+l)`.
    pub fn from_levels(ls: &LevelStructure, k: usize, l: usize) -> Result<Self, EstimateError> {
        let log_delta = ls.tables().log_length();
        assert!(
            k >= 1 && l >= 1 && k + l <= ls.depth(),
            "levels out of range"
        );
        let mut pair = ScalePair::new(log_delta[k].exp(), log_delta[k + l].exp())?;
        pair.levels = Some((k, l));
        Ok(pair)
    }
}

/// A maximal run of set points inside the covering window: the clipped trace
/// of one skeleton interval. Zero length is legal — a window touching an
/// interval in a single point still has that point to cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
}

/// Minimal number of closed balls of radius `r` (length `2r`) covering the
/// segments (disjoint, in increasing order), by the greedy rule: anchor each
/// ball at the leftmost point not yet covered. Optimal for unions of
/// intervals on the line: any cover can slide its leftmost ball right until
/// it starts at the first uncovered point without uncovering anything, and
/// induction does the rest.
pub fn greedy_cover_count(segments: &[Segment], r: f64) -> u64 {
    greedy_cover_core(segments.len(), |i| (segments[i].left, segments[i].right), r)
}

/// Greedy covering over an indexed view of disjoint segments sorted left to
/// right (so right endpoints are nondecreasing too). Segments already behind
/// the frontier are skipped with a binary search instead of one at a time,
/// which is what keeps deep-skeleton windows holding millions of pieces
/// affordable; the ball arithmetic is otherwise the plain walk.
fn greedy_cover_core(len: usize, seg: impl Fn(usize) -> (f64, f64), r: f64) -> u64 {
    assert!(r > 0.0, "covering radius must be positive");
    let two_r = 2.0 * r;
    let mut frontier = f64::NEG_INFINITY;
    let mut count = 0u64;
    let mut i = 0;
    while i < len {
        let (mut a, mut b) = (i, len);
        while a < b {
            let mid = (a + b) / 2;
            if seg(mid).1 <= frontier {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        i = a;
        if i == len {
            break;
        }
        let (left, right) = seg(i);
        if left > frontier {
            count += 1;
            frontier = left + two_r;
        }
        while right > frontier {
            count += 1;
            frontier += two_r;
        }
        i += 1;
    }
    count
}

/// Brute-force minimal covering count, for cross-checking the greedy rule.
///
/// Any optimal cover normalizes (slide every ball right until it pins an
/// uncovered point) to one whose ball starts lie in the chain set
/// `{segment start + j * 2r}`, so searching all placements from that set is
/// exhaustive. States are memoized on the next point needing coverage;
/// intended for small instances (say up to a dozen segments).
pub fn exhaustive_cover_count(segments: &[Segment], r: f64) -> u64 {
    use std::collections::HashMap;

    assert!(r > 0.0, "covering radius must be positive");
    if segments.is_empty() {
        return 0;
    }
    let two_r = 2.0 * r;
    let span_end = segments.last().unwrap().right;

    // Candidate ball starts: chains stepping by exactly the ball length from
    // every segment start. The chain uses the same accumulation as the
    // greedy frontier so the two paths see bitwise-identical positions.
    let mut candidates: Vec<f64> = Vec::new();
    for seg in segments {
        let mut s = seg.left;
        while s <= span_end {
            candidates.push(s);
            s += two_r;
        }
        candidates.push(s);
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| a.to_bits() == b.to_bits());

    /// Leftmost coverage obligation: a point that is itself uncovered, or
    /// the open edge just past a frontier inside a segment.
    #[derive(Clone, Copy, PartialEq)]
    enum Need {
        At(f64),
        Past(f64),
    }

    let next_need = |frontier: f64| -> Option<Need> {
        for seg in segments {
            if seg.left > frontier {
                return Some(Need::At(seg.left));
            }
            if seg.right > frontier {
                return Some(Need::Past(frontier));
            }
        }
        None
    };

    fn solve(
        need: Need,
        candidates: &[f64],
        two_r: f64,
        next_need: &impl Fn(f64) -> Option<Need>,
        memo: &mut HashMap<(u64, bool), u64>,
    ) -> u64 {
        let key = match need {
            Need::At(p) => (p.to_bits(), false),
            Need::Past(p) => (p.to_bits(), true),
        };
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let p = match need {
            Need::At(p) | Need::Past(p) => p,
        };
        // A viable ball must reach back to p without overshooting it (any
        // start beyond p strands the obligation forever).
        let from = candidates.partition_point(|&s| s < p - two_r);
        let to = candidates.partition_point(|&s| s <= p);
        let mut best = u64::MAX;
        for &s in &candidates[from..to] {
            let end = s + two_r;
            let covers = match need {
                Need::At(point) => end >= point,
                Need::Past(edge) => end > edge,
            };
            if !covers {
                continue;
            }
            let rest = match next_need(end) {
                None => 0,
                Some(n) => solve(n, candidates, two_r, next_need, memo),
            };
            best = best.min(1 + rest);
        }
        memo.insert(key, best);
        best
    }

    let mut memo = HashMap::new();
    match next_need(f64::NEG_INFINITY) {
        None => 0,
        Some(need) => solve(need, &candidates, two_r, &next_need, &mut memo),
    }
}

/// Validated window view: the level's intervals meeting `[x-R, x+R]`, plus
/// the clip bounds. A view rather than clipped copies, because a deep
/// skeleton puts millions of intervals in a window and the greedy core only
/// ever looks at a handful of them.
fn skeleton_window(
    ls: &LevelStructure,
    x: f64,
    big_r: f64,
    r: f64,
    level: usize,
) -> Result<(&[Interval], f64, f64), EstimateError> {
    if !(r > 0.0 && r < big_r) {
        return Err(EstimateError::BadScalePair { big_r, r });
    }
    let intervals = ls.intervals_at_level(level)?;
    if ls.max_length(level) > r {
        return Err(EstimateError::SkeletonTooCoarse {
            level,
            max_length: ls.max_length(level),
            r,
        });
    }
    if ls.locate(x, level)? == LocateOutcome::InGap {
        return Err(EstimateError::PointOutsideSkeleton { x, level });
    }
    let (lo, hi) = (x - big_r, x + big_r);
    let (first, last) = meeting_range(intervals, lo, hi);
    Ok((&intervals[first..last], lo, hi))
}

/// Exact minimal number of closed radius-`r` balls covering
/// `B(x, R) ∩ E`, with `E` realized by its level-`level` skeleton.
pub fn covering_number(
    ls: &LevelStructure,
    x: f64,
    big_r: f64,
    r: f64,
    level: usize,
) -> Result<u64, EstimateError> {
    let (window, lo, hi) = skeleton_window(ls, x, big_r, r, level)?;
    Ok(greedy_cover_core(
        window.len(),
        |i| (window[i].left.max(lo), window[i].right().min(hi)),
        r,
    ))
}

/// The two-scale covering exponent `log N_r(B(x,R) ∩ E) / log(R/r)`.
pub fn two_scale_exponent(
    ls: &LevelStructure,
    x: f64,
    big_r: f64,
    r: f64,
    level: usize,
) -> Result<f64, EstimateError> {
    let n = covering_number(ls, x, big_r, r, level)?;
    Ok((n as f64).ln() / (big_r / r).ln())
}

/// Deterministic sample of set points: left endpoints of deepest-level
/// intervals, visited with a stride forced coprime to the interval count.
/// A stride sharing factors with the count would walk only endpoints that
/// are also endpoints of shallow levels, and the exactly-aligned ball edges
/// those produce systematically overcount small windows; a coprime stride
/// spreads the samples over generic addresses.
pub fn sample_points(ls: &LevelStructure, count: usize) -> Vec<f64> {
    let deepest = ls.level_unchecked(ls.depth());
    let n = deepest.len();
    let take = count.min(n);
    if take == 0 {
        return Vec::new();
    }
    let mut stride = (n / take).max(1);
    while gcd(stride, n) != 1 {
        stride += 1;
    }
    (0..take).map(|i| deepest[(i * stride) % n].left).collect()
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// What an [`EmpiricalReport`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimates", rename_all = "kebab-case")]
pub enum EmpiricalKind {
    /// Sample sup of two-scale exponents: approaches the Assouad dimension
    /// from below as the grids grow.
    Assouad,
    /// Sample inf of two-scale exponents: an estimate of the lower dimension
    /// from above (a finite inf can only overshoot the true inf).
    Lower,
    /// One spectrum ordinate with the two scales tied by `r = R^(1/theta)`.
    SpectrumPoint {
        theta: f64,
        variant: SpectrumVariant,
    },
}

/// The sample point and scale pair attaining a reported extremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub exponent: f64,
    pub x: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub kind: EmpiricalKind,
    pub value: f64,
    pub witness: Witness,
    pub pair_count: usize,
    pub samples_per_pair: usize,
    /// Realization depth; also the skeleton level the coverings ran on.
    pub depth: usize,
}

/// Extremum direction plus the deterministic lexicographic tie-break on
/// (exponent, x, R, r); the reduction is a total order, so parallel merge
/// order cannot change the winner.
fn prefer(challenger: &Witness, incumbent: &Witness, sup: bool) -> bool {
    let key_c = (challenger.x, challenger.big_r, challenger.r);
    let key_i = (incumbent.x, incumbent.big_r, incumbent.r);
    if challenger.exponent != incumbent.exponent {
        if sup {
            challenger.exponent > incumbent.exponent
        } else {
            challenger.exponent < incumbent.exponent
        }
    } else {
        key_c < key_i
    }
}

fn extremal_witness(
    ls: &LevelStructure,
    pairs: &[ScalePair],
    samples: &[f64],
    sup: bool,
) -> Result<Witness, EstimateError> {
    if pairs.is_empty() || samples.is_empty() {
        return Err(EstimateError::EmptySample);
    }
    let level = ls.depth();
    let per_pair: Vec<Witness> = pairs
        .par_iter()
        .map(|pair| {
            let mut best: Option<Witness> = None;
            for &x in samples {
                let exponent = two_scale_exponent(ls, x, pair.big_r, pair.r, level)?;
                let w = Witness {
                    exponent,
                    x,
                    big_r: pair.big_r,
                    r: pair.r,
                };
                if best.as_ref().is_none_or(|b| prefer(&w, b, sup)) {
                    best = Some(w);
                }
            }
            Ok(best.expect("samples is non-empty"))
        })
        .collect::<Result<Vec<_>, EstimateError>>()?;
    Ok(per_pair
        .into_iter()
        .reduce(|a, b| if prefer(&b, &a, sup) { b } else { a })
        .expect("pairs is non-empty"))
}

/// Sample sup of two-scale exponents over the given level pairs
/// (`R = delta_k`, `r = delta_(k+l)`) and sampled set points.
pub fn empirical_assouad(
    ls: &LevelStructure,
    level_pairs: &[(usize, usize)],
    samples_per_pair: usize,
) -> Result<EmpiricalReport, EstimateError> {
    empirical_dimension(ls, level_pairs, samples_per_pair, true)
}

/// Sample inf of the same exponents. Note the direction: a finite sample
/// bounds the true inf from above, so this estimates the lower dimension
/// from the safe side.
pub fn empirical_lower(
    ls: &LevelStructure,
    level_pairs: &[(usize, usize)],
    samples_per_pair: usize,
) -> Result<EmpiricalReport, EstimateError> {
    empirical_dimension(ls, level_pairs, samples_per_pair, false)
}

fn empirical_dimension(
    ls: &LevelStructure,
    level_pairs: &[(usize, usize)],
    samples_per_pair: usize,
    sup: bool,
) -> Result<EmpiricalReport, EstimateError> {
    let pairs = level_pairs
        .iter()
        .map(|&(k, l)| ScalePair::from_levels(ls, k, l))
        .collect::<Result<Vec<_>, _>>()?;
    let samples = sample_points(ls, samples_per_pair);
    let witness = extremal_witness(ls, &pairs, &samples, sup)?;
    Ok(EmpiricalReport {
        kind: if sup {
            EmpiricalKind::Assouad
        } else {
            EmpiricalKind::Lower
        },
        value: witness.exponent,
        witness,
        pair_count: pairs.len(),
        samples_per_pair: samples.len(),
        depth: ls.depth(),
    })
}

/// One spectrum ordinate measured on the realization: for each listed level
/// `k`, `R = delta_k` and `r = R^(1/theta)` exactly (not snapped to a level),
/// with the extremum over samples and levels.
pub fn empirical_spectrum_point(
    ls: &LevelStructure,
    theta: f64,
    k_list: &[usize],
    samples_per_level: usize,
    variant: SpectrumVariant,
) -> Result<EmpiricalReport, EstimateError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(FormulaError::ThetaOutOfRange { theta }.into());
    }
    let log_delta = ls.tables().log_length();
    let pairs = k_list
        .iter()
        .map(|&k| {
            assert!(k >= 1 && k <= ls.depth(), "spectrum level out of range");
            ScalePair::new(log_delta[k].exp(), (log_delta[k] / theta).exp())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let samples = sample_points(ls, samples_per_level);
    let sup = variant == SpectrumVariant::Assouad;
    let witness = extremal_witness(ls, &pairs, &samples, sup)?;
    Ok(EmpiricalReport {
        kind: EmpiricalKind::SpectrumPoint { theta, variant },
        value: witness.exponent,
        witness,
        pair_count: pairs.len(),
        samples_per_pair: samples.len(),
        depth: ls.depth(),
    })
}

/// Which of the four ball/interval counting facts a violation broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingCheck {
    /// `B(x, R)` contains at least one level-(k+1) interval.
    ContainsChildAtBigScale,
    /// `B(x, r)` meets at most four level-(k+l) intervals.
    MeetsAtMostFourDeep,
    /// `B(x, R)` meets at most four level-(k-1) intervals.
    MeetsAtMostFourShallow,
    /// `B(x, r)` contains at least one level-(k+l+1) interval.
    ContainsChildAtSmallScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingViolation {
    pub check: CountingCheck,
    pub x: f64,
    pub radius: f64,
    pub count: usize,
}

/// Outcome of the four counting checks at one (k, l), with the sharpest
/// observed constants so a reader can see how much slack the bound of four
/// really has.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub k: usize,
    pub l: usize,
    pub samples: usize,
    pub max_met_deep: usize,
    pub max_met_shallow: usize,
    pub violations: Vec<CountingViolation>,
}

impl CountingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the four covering-proof counting facts on sampled set points.
///
/// Radii are the realized lengths of the intervals containing each sample
/// (`R = |I_k(x)|`, `r = |I_(k+l)(x)|`), which equal the nominal lengths in
/// exact-ratio mode; on banded realizations this keeps the "contains at
/// least one child" checks structural rather than luck-dependent.
pub fn check_counting_lemmas(
    ls: &LevelStructure,
    k: usize,
    l: usize,
    samples: usize,
) -> Result<CountingReport, EstimateError> {
    assert!(k >= 1 && l >= 1, "counting checks start at k, l >= 1");
    if k + l + 1 > ls.depth() {
        return Err(EstimateError::CountingDepth {
            k,
            l,
            required: k + l + 1,
            depth: ls.depth(),
        });
    }
    let mut report = CountingReport {
        k,
        l,
        samples: 0,
        max_met_deep: 0,
        max_met_shallow: 0,
        violations: Vec::new(),
    };
    let containing_length = |x: f64, level: usize| -> Result<f64, EstimateError> {
        match ls.locate(x, level)? {
            LocateOutcome::Inside(i) => Ok(ls.intervals_at_level(level)?[i].length),
            LocateOutcome::InGap => Err(EstimateError::PointOutsideSkeleton { x, level }),
        }
    };
    for x in sample_points(ls, samples) {
        report.samples += 1;
        let big_r = containing_length(x, k)?;
        let r = containing_length(x, k + l)?;

        if !contains_some_interval(ls.level_unchecked(k + 1), x - big_r, x + big_r) {
            report.violations.push(CountingViolation {
                check: CountingCheck::ContainsChildAtBigScale,
                x,
                radius: big_r,
                count: 0,
            });
        }
        let deep = count_meeting(ls.level_unchecked(k + l), x - r, x + r);
        report.max_met_deep = report.max_met_deep.max(deep);
        if deep > 4 {
            report.violations.push(CountingViolation {
                check: CountingCheck::MeetsAtMostFourDeep,
                x,
                radius: r,
                count: deep,
            });
        }
        let shallow = count_meeting(ls.level_unchecked(k - 1), x - big_r, x + big_r);
        report.max_met_shallow = report.max_met_shallow.max(shallow);
        if shallow > 4 {
            report.violations.push(CountingViolation {
                check: CountingCheck::MeetsAtMostFourShallow,
                x,
                radius: big_r,
                count: shallow,
            });
        }
        if !contains_some_interval(ls.level_unchecked(k + l + 1), x - r, x + r) {
            report.violations.push(CountingViolation {
                check: CountingCheck::ContainsChildAtSmallScale,
                x,
                radius: r,
                count: 0,
            });
        }
    }
    Ok(report)
}

fn contains_some_interval(intervals: &[Interval], lo: f64, hi: f64) -> bool {
    let (first, last) = meeting_range(intervals, lo, hi);
    intervals[first..last]
        .iter()
        .any(|iv| iv.left >= lo && iv.right() <= hi)
}

/// How many deepest-level mesh lengths a radius must span before the
/// discretized measure resolves it: mass ratios at a radius only a couple of
/// mesh lengths wide are quotients of tiny interval counts, and those jump
/// around as the realization deepens instead of converging.
pub const MEASURE_RESOLUTION_HEADROOM: f64 = 16.0;

/// Empirical uniformity and doubling constants of the natural measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    /// Largest same-radius, cross-location mass ratio (folded to >= 1).
    pub lambda: f64,
    /// Smallest observed `mu(B(x,r)) / mu(B(x,ar))`.
    pub alpha: f64,
    /// Largest observed `mu(B(x,r)) / mu(B(x,ar))`.
    pub beta: f64,
    /// Sup of `|h(r) ln r - ln mu(B(x,r))|` — the boundedness constant tying
    /// the measure to the scale function.
    pub sup_deviation: f64,
    /// Inner scale factor used for the doubling ratios.
    pub scale_factor: f64,
    /// Radii that survived the discretization cutoff, largest first.
    pub radii_used: Vec<f64>,
    pub radii_skipped: usize,
    pub samples: usize,
    pub depth: usize,
}

/// Measures the natural-measure constants on sampled points: uniformity
/// (same radius, different centers), doubling (same center, radii `r` and
/// `a r`), and the deviation from the scale-function prediction.
///
/// Radii too close to the deepest-level mesh are excluded (the level-`D`
/// discretization cannot resolve them); the doubling part additionally
/// requires the inner radius `a r` to clear the cutoff.
pub fn check_measure_properties(
    ls: &LevelStructure,
    radii: &[f64],
    sample_pairs: usize,
    a: f64,
) -> Result<MeasureReport, EstimateError> {
    assert!(a > 0.0 && a < 1.0, "inner scale factor must be in (0,1)");
    let depth = ls.depth();
    let cutoff = MEASURE_RESOLUTION_HEADROOM * ls.max_length(depth);
    let usable: Vec<f64> = radii
        .iter()
        .copied()
        .filter(|&r| r >= cutoff && r < 1.0)
        .collect();
    if usable.is_empty() {
        return Err(EstimateError::NoUsableRadii { cutoff, depth });
    }
    let samples = sample_points(ls, 2 * sample_pairs.max(1));
    if samples.is_empty() {
        return Err(EstimateError::EmptySample);
    }
    let half = samples.len() / 2;

    let mut lambda = 1.0f64;
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    let mut sup_deviation = 0.0f64;
    for &r in &usable {
        let h = scale_function(ls.tables(), r, 1.0)?;
        for &x in &samples {
            let mass = ls.natural_measure_ball(x, r, depth)?;
            sup_deviation = sup_deviation.max((h * r.ln() - mass.ln()).abs());
            if a * r >= cutoff {
                let inner = ls.natural_measure_ball(x, a * r, depth)?;
                let ratio = mass / inner;
                alpha = alpha.min(ratio);
                beta = beta.max(ratio);
            }
        }
        for i in 0..half {
            let m1 = ls.natural_measure_ball(samples[i], r, depth)?;
            let m2 = ls.natural_measure_ball(samples[half + i], r, depth)?;
            lambda = lambda.max((m1 / m2).max(m2 / m1));
        }
    }
    Ok(MeasureReport {
        lambda,
        alpha,
        beta,
        sup_deviation,
        scale_factor: a,
        radii_skipped: radii.len() - usable.len(),
        radii_used: usable,
        samples: samples.len(),
        depth,
    })
}
