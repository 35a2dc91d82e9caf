//! Subdivision sequences and their prefix tables.
//!
//! Every set this crate works with is described by a sequence of per-level
//! rules `(n_k, c_k, a_k)`, k = 1, 2, ...: level k-1 intervals split into
//! `n_k` children, each child/parent length ratio is `c_k` (exactly, for
//! Moran-style constructions) or drawn from the band `[c_k(1-a_k), c_k(1+a_k)]`
//! (for Cantor-like constructions). A [`SequenceSpec`] is a finite description
//! of such a sequence, restricted to four shapes for which `sup n_k` and
//! `inf c_k` are computable exactly rather than sampled.
//!
//! [`PrefixTables`] caches cumulative log-products of the `n` and `c`
//! components so that interval counts and lengths far beyond f64 range stay
//! representable. All downstream dimension formulas consume these tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Subdivision rule for one level: `n` children, contraction `c`, band
/// half-width `a` (0 means exact ratios).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRule {
    pub n: u32,
    pub c: f64,
    #[serde(default)]
    pub a: f64,
}

impl LevelRule {
    pub fn new(n: u32, c: f64) -> Self {
        LevelRule { n, c, a: 0.0 }
    }

    pub fn with_band(n: u32, c: f64, a: f64) -> Self {
        LevelRule { n, c, a }
    }
}

/// Which structural classes the spec claims to belong to. Claims are
/// promises checked by [`SequenceSpec::validate`], not observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFlags {
    /// Homogeneous Moran class: requires `n_k >= 2` and `n_k * c_k < 1`.
    #[serde(default)]
    pub moran: bool,
    /// Cantor-like class: requires `inf c_k > 0` and a summable band
    /// sequence `sum a_k < infinity`.
    #[serde(default)]
    pub cantor_like: bool,
}

/// Deterministic rule producing `(n_k, c_k, a_k)` from the level index.
///
/// All four kinds take finitely many distinct values, so suprema and infima
/// over k are exact maxima/minima over a small set.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    /// One rule for every level.
    Constant(LevelRule),
    /// A finite cycle repeated forever.
    Periodic(Vec<LevelRule>),
    /// Explicit rules for `k <= head.len()`, then a constant tail.
    ExplicitWithTail {
        head: Vec<LevelRule>,
        tail: LevelRule,
    },
    /// Regime switching on geometric blocks: level k uses `inside` when
    /// `base^j <= k < factor * base^j` for some j >= 0, `outside` otherwise.
    /// Covers constructions like "n = 3 on blocks [4^j, 2*4^j), else n = 2".
    BlockRule {
        base: u64,
        factor: u64,
        inside: LevelRule,
        outside: LevelRule,
    },
}

/// Geometric override for the band sequence: `a_k = coeff * ratio^k`.
///
/// The per-rule `a` components are ignored when this is present. Because
/// `ratio < 1`, the band sum is `coeff * ratio / (1 - ratio)`, always finite,
/// which is what makes specs like "middle-third with a_k = 2^-k" expressible
/// while keeping summability decidable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricBand {
    pub coeff: f64,
    pub ratio: f64,
}

/// A finitely-described subdivision sequence plus class claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub perturbation: Option<GeometricBand>,
    pub class_flags: ClassFlags,
}

/// Exact facts about a validated spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Levels re-checked one by one (on top of the exact value-set checks).
    pub probe_depth: usize,
    /// `sup_k n_k`, exact over the reachable rule set.
    pub sup_branching: u32,
    /// `inf_k c_k`, exact over the reachable rule set.
    pub inf_contraction: f64,
    /// `sum_k a_k` when finite, `None` when the series diverges.
    pub band_sum: Option<f64>,
    /// Class invariants that were claimed and verified.
    pub checked: ClassFlags,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("level {k}: branching count n = {n} violates n >= 2")]
    BranchingTooSmall { k: usize, n: u32 },
    #[error("level {k}: contraction c = {c} outside (0, 1)")]
    ContractionOutOfRange { k: usize, c: f64 },
    #[error("level {k}: band half-width a = {a} outside [0, 1)")]
    BandOutOfRange { k: usize, a: f64 },
    #[error("level {k}: moran class requires n*c < 1, got {n} * {c}")]
    MoranBudgetExceeded { k: usize, n: u32, c: f64 },
    #[error("cantor-like class requires a summable band sequence, but a_k = {a} recurs forever from level {k}")]
    BandNotSummable { k: usize, a: f64 },
    #[error("perturbation requires coeff >= 0 and ratio in (0, 1), got coeff = {coeff}, ratio = {ratio}")]
    BadPerturbation { coeff: f64, ratio: f64 },
    #[error("{kind} spec {problem}")]
    Malformed {
        kind: &'static str,
        problem: &'static str,
    },
}

impl SequenceSpec {
    pub fn new(kind: SequenceKind, class_flags: ClassFlags) -> Self {
        SequenceSpec {
            kind,
            perturbation: None,
            class_flags,
        }
    }

    pub fn with_perturbation(mut self, band: GeometricBand) -> Self {
        self.perturbation = Some(band);
        self
    }

    /// The rule in force at level `k` (1-based), band override applied.
    pub fn eval(&self, k: usize) -> LevelRule {
        assert!(k >= 1, "level indices start at 1");
        let mut rule = match &self.kind {
            SequenceKind::Constant(r) => *r,
            SequenceKind::Periodic(cycle) => cycle[(k - 1) % cycle.len()],
            SequenceKind::ExplicitWithTail { head, tail } => {
                head.get(k - 1).copied().unwrap_or(*tail)
            }
            SequenceKind::BlockRule {
                base,
                factor,
                inside,
                outside,
            } => {
                if in_geometric_block(k as u64, *base, *factor) {
                    *inside
                } else {
                    *outside
                }
            }
        };
        if let Some(band) = &self.perturbation {
            rule.a = band.coeff * band.ratio.powi(k as i32);
        }
        rule
    }

    /// Every rule the sequence can ever produce, tagged with the first level
    /// at which it applies. Ignores the band override.
    pub(crate) fn reachable_rules(&self) -> Vec<(usize, LevelRule)> {
        match &self.kind {
            SequenceKind::Constant(r) => vec![(1, *r)],
            SequenceKind::Periodic(cycle) => {
                cycle.iter().enumerate().map(|(i, r)| (i + 1, *r)).collect()
            }
            SequenceKind::ExplicitWithTail { head, tail } => {
                let mut out: Vec<_> = head.iter().enumerate().map(|(i, r)| (i + 1, *r)).collect();
                out.push((head.len() + 1, *tail));
                out
            }
            SequenceKind::BlockRule {
                base,
                factor,
                inside,
                outside,
            } => {
                // k = 1 is always inside ([1, factor) with factor >= 2); the
                // first outside level is k = factor, which exists only when
                // the blocks leave gaps.
                let mut out = vec![(1, *inside)];
                if factor < base {
                    out.push((*factor as usize, *outside));
                }
                out
            }
        }
    }

    /// Checks every invariant of the spec and its claimed classes.
    ///
    /// Shape constraints, `n >= 2`, `c` in (0,1), `a` in [0,1), and the class
    /// invariants are decided exactly over the reachable rule set; the first
    /// `probe_depth` levels are additionally re-checked through [`Self::eval`]
    /// so a bug in rule dispatch cannot hide behind the exact path. Errors
    /// name the first offending level.
    pub fn validate(&self, probe_depth: usize) -> Result<ValidationReport, SpecError> {
        self.check_shape()?;

        if let Some(band) = &self.perturbation {
            let a1 = band.coeff * band.ratio;
            if !(band.coeff >= 0.0) || !(band.ratio > 0.0 && band.ratio < 1.0) || !(a1 < 1.0) {
                return Err(SpecError::BadPerturbation {
                    coeff: band.coeff,
                    ratio: band.ratio,
                });
            }
        }

        let rules = self.reachable_rules();
        for &(k, rule) in &rules {
            check_rule_base(k, &rule, self.perturbation.is_some())?;
            if self.class_flags.moran {
                check_rule_moran(k, &rule)?;
            }
        }

        // Band summability for the cantor-like claim. With a geometric
        // override the series is a geometric sum; otherwise it is finite
        // exactly when no forever-recurring rule carries a > 0.
        let band_sum = match &self.perturbation {
            Some(band) => Some(band.coeff * band.ratio / (1.0 - band.ratio)),
            None => self.exact_band_sum(),
        };
        if self.class_flags.cantor_like {
            if band_sum.is_none() {
                let (k, a) = self.first_recurring_band().expect("divergent band recurs");
                return Err(SpecError::BandNotSummable { k, a });
            }
        }

        for k in 1..=probe_depth {
            let rule = self.eval(k);
            check_rule_base(k, &rule, false)?;
            if self.class_flags.moran {
                check_rule_moran(k, &rule)?;
            }
        }

        let sup_branching = rules.iter().map(|(_, r)| r.n).max().expect("nonempty");
        let inf_contraction = rules.iter().map(|(_, r)| r.c).fold(f64::INFINITY, f64::min);

        Ok(ValidationReport {
            probe_depth,
            sup_branching,
            inf_contraction,
            band_sum,
            checked: self.class_flags,
        })
    }

    /// `sum a_k` without an override: finite iff every rule that recurs
    /// forever has `a = 0`, in which case only the explicit head contributes.
    fn exact_band_sum(&self) -> Option<f64> {
        match &self.kind {
            SequenceKind::Constant(r) => (r.a == 0.0).then_some(0.0),
            SequenceKind::Periodic(cycle) => cycle.iter().all(|r| r.a == 0.0).then_some(0.0),
            SequenceKind::ExplicitWithTail { head, tail } => {
                (tail.a == 0.0).then(|| head.iter().map(|r| r.a).sum())
            }
            SequenceKind::BlockRule {
                base,
                factor,
                inside,
                outside,
            } => {
                let outside_recurs = factor < base;
                (inside.a == 0.0 && (!outside_recurs || outside.a == 0.0)).then_some(0.0)
            }
        }
    }

    /// First level whose rule both recurs forever and has `a > 0`.
    fn first_recurring_band(&self) -> Option<(usize, f64)> {
        match &self.kind {
            SequenceKind::Constant(r) => (r.a > 0.0).then_some((1, r.a)),
            SequenceKind::Periodic(cycle) => cycle
                .iter()
                .enumerate()
                .find(|(_, r)| r.a > 0.0)
                .map(|(i, r)| (i + 1, r.a)),
            SequenceKind::ExplicitWithTail { head, tail } => {
                (tail.a > 0.0).then_some((head.len() + 1, tail.a))
            }
            SequenceKind::BlockRule {
                base,
                factor,
                inside,
                outside,
            } => {
                if inside.a > 0.0 {
                    Some((1, inside.a))
                } else if factor < base && outside.a > 0.0 {
                    Some((*factor as usize, outside.a))
                } else {
                    None
                }
            }
        }
    }

    fn check_shape(&self) -> Result<(), SpecError> {
        match &self.kind {
            SequenceKind::Constant(_) => Ok(()),
            SequenceKind::Periodic(cycle) => {
                if cycle.is_empty() {
                    Err(SpecError::Malformed {
                        kind: "periodic",
                        problem: "requires a nonempty cycle",
                    })
                } else {
                    Ok(())
                }
            }
            SequenceKind::ExplicitWithTail { .. } => Ok(()),
            SequenceKind::BlockRule { base, factor, .. } => {
                if *base < 2 {
                    Err(SpecError::Malformed {
                        kind: "block-rule",
                        problem: "requires base >= 2",
                    })
                } else if *factor < 2 || factor > base {
                    Err(SpecError::Malformed {
                        kind: "block-rule",
                        problem: "requires 2 <= factor <= base",
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Cumulative log tables for levels `0..=depth`.
    ///
    /// Entry k holds the compensated sums `sum_{i<=k} ln n_i` and
    /// `sum_{i<=k} ln c_i`, so `exp` of a window difference reproduces the
    /// directly multiplied product to near machine precision even at depths
    /// where raw products would overflow or underflow.
    pub fn prefix_tables(&self, depth: usize) -> PrefixTables {
        let mut log_count = Vec::with_capacity(depth + 1);
        let mut log_length = Vec::with_capacity(depth + 1);
        log_count.push(0.0);
        log_length.push(0.0);
        let mut count_sum = NeumaierSum::default();
        let mut length_sum = NeumaierSum::default();
        for k in 1..=depth {
            let rule = self.eval(k);
            count_sum.add((rule.n as f64).ln());
            length_sum.add(rule.c.ln());
            log_count.push(count_sum.value());
            log_length.push(length_sum.value());
        }
        PrefixTables {
            log_count,
            log_length,
        }
    }
}

fn check_rule_base(k: usize, rule: &LevelRule, skip_band: bool) -> Result<(), SpecError> {
    if rule.n < 2 {
        return Err(SpecError::BranchingTooSmall { k, n: rule.n });
    }
    if !(rule.c > 0.0 && rule.c < 1.0) {
        return Err(SpecError::ContractionOutOfRange { k, c: rule.c });
    }
    if !skip_band && !(rule.a >= 0.0 && rule.a < 1.0) {
        return Err(SpecError::BandOutOfRange { k, a: rule.a });
    }
    Ok(())
}

fn check_rule_moran(k: usize, rule: &LevelRule) -> Result<(), SpecError> {
    if rule.n as f64 * rule.c >= 1.0 {
        return Err(SpecError::MoranBudgetExceeded {
            k,
            n: rule.n,
            c: rule.c,
        });
    }
    Ok(())
}

fn in_geometric_block(k: u64, base: u64, factor: u64) -> bool {
    let mut block_start: u64 = 1;
    loop {
        if k < block_start {
            return false;
        }
        if k < block_start.saturating_mul(factor) {
            return true;
        }
        block_start = match block_start.checked_mul(base) {
            Some(next) => next,
            None => return false,
        };
    }
}

/// Compensated running sum (Neumaier's variant of Kahan summation). Keeps
/// prefix-table entries faithful to the exact sum, which the telescoping
/// invariants and the constant-spec collapse tests rely on.
#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Cumulative log-products of a subdivision sequence.
///
/// `log_count[k]` = ln(N_k) where N_k is the number of level-k intervals and
/// `log_length[k]` = ln(delta_k) where delta_k is the exact level-k interval
/// length of the unperturbed construction. Index 0 is the root: both zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixTables {
    log_count: Vec<f64>,
    log_length: Vec<f64>,
}

impl PrefixTables {
    /// Deepest tabulated level K.
    pub fn depth(&self) -> usize {
        self.log_count.len() - 1
    }

    /// `ln N_k` for `k <= depth`; strictly increasing, starts at 0.
    pub fn log_count(&self) -> &[f64] {
        &self.log_count
    }

    /// `ln delta_k` for `k <= depth`; strictly decreasing, starts at 0.
    pub fn log_length(&self) -> &[f64] {
        &self.log_length
    }

    /// `ln(n_{j+1} ... n_k)`, the log interval-count ratio between levels.
    pub fn count_window(&self, j: usize, k: usize) -> f64 {
        debug_assert!(j <= k && k <= self.depth());
        self.log_count[k] - self.log_count[j]
    }

    /// `ln(c_{j+1} ... c_k)`, the log length ratio between levels (negative).
    pub fn length_window(&self, j: usize, k: usize) -> f64 {
        debug_assert!(j <= k && k <= self.depth());
        self.log_length[k] - self.log_length[j]
    }
}

// --- serde document form --------------------------------------------------
//
// On disk a spec is a flat JSON object: {kind, values, tail, block,
// perturbation, class_flags}; which fields must be present depends on `kind`.
// The schema is documented in the repository README.

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KindTag {
    Constant,
    Periodic,
    ExplicitWithTail,
    BlockRule,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDocument {
    base: u64,
    factor: u64,
    inside: LevelRule,
    outside: LevelRule,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDocument {
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<LevelRule>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<LevelRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    block: Option<BlockDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    perturbation: Option<GeometricBand>,
    #[serde(default)]
    class_flags: ClassFlags,
}

impl TryFrom<SpecDocument> for SequenceSpec {
    type Error = SpecError;

    fn try_from(doc: SpecDocument) -> Result<Self, SpecError> {
        let kind = match doc.kind {
            KindTag::Constant => {
                let values = doc.values.ok_or(SpecError::Malformed {
                    kind: "constant",
                    problem: "requires a single-entry values list",
                })?;
                if values.len() != 1 || doc.tail.is_some() || doc.block.is_some() {
                    return Err(SpecError::Malformed {
                        kind: "constant",
                        problem: "takes exactly one values entry and no tail/block",
                    });
                }
                SequenceKind::Constant(values[0])
            }
            KindTag::Periodic => {
                let values = doc.values.ok_or(SpecError::Malformed {
                    kind: "periodic",
                    problem: "requires a nonempty values list",
                })?;
                if values.is_empty() || doc.tail.is_some() || doc.block.is_some() {
                    return Err(SpecError::Malformed {
                        kind: "periodic",
                        problem: "takes a nonempty values list and no tail/block",
                    });
                }
                SequenceKind::Periodic(values)
            }
            KindTag::ExplicitWithTail => {
                let head = doc.values.unwrap_or_default();
                let tail = doc.tail.ok_or(SpecError::Malformed {
                    kind: "explicit-with-tail",
                    problem: "requires a tail rule",
                })?;
                if doc.block.is_some() {
                    return Err(SpecError::Malformed {
                        kind: "explicit-with-tail",
                        problem: "takes values + tail and no block",
                    });
                }
                SequenceKind::ExplicitWithTail { head, tail }
            }
            KindTag::BlockRule => {
                let block = doc.block.ok_or(SpecError::Malformed {
                    kind: "block-rule",
                    problem: "requires a block object",
                })?;
                if doc.values.is_some() || doc.tail.is_some() {
                    return Err(SpecError::Malformed {
                        kind: "block-rule",
                        problem: "takes only the block object",
                    });
                }
                SequenceKind::BlockRule {
                    base: block.base,
                    factor: block.factor,
                    inside: block.inside,
                    outside: block.outside,
                }
            }
        };
        let spec = SequenceSpec {
            kind,
            perturbation: doc.perturbation,
            class_flags: doc.class_flags,
        };
        spec.check_shape()?;
        Ok(spec)
    }
}

impl From<SequenceSpec> for SpecDocument {
    fn from(spec: SequenceSpec) -> SpecDocument {
        let (kind, values, tail, block) = match spec.kind {
            SequenceKind::Constant(r) => (KindTag::Constant, Some(vec![r]), None, None),
            SequenceKind::Periodic(cycle) => (KindTag::Periodic, Some(cycle), None, None),
            SequenceKind::ExplicitWithTail { head, tail } => (
                KindTag::ExplicitWithTail,
                (!head.is_empty()).then_some(head),
                Some(tail),
                None,
            ),
            SequenceKind::BlockRule {
                base,
                factor,
                inside,
                outside,
            } => (
                KindTag::BlockRule,
                None,
                None,
                Some(BlockDocument {
                    base,
                    factor,
                    inside,
                    outside,
                }),
            ),
        };
        SpecDocument {
            kind,
            values,
            tail,
            block,
            perturbation: spec.perturbation,
            class_flags: spec.class_flags,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn middle_third() -> SequenceSpec {
        SequenceSpec::new(
            SequenceKind::Constant(LevelRule::new(2, 1.0 / 3.0)),
            ClassFlags {
                moran: true,
                cantor_like: true,
            },
        )
    }

    fn dyadic_block() -> SequenceSpec {
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
    fn constant_eval_is_level_independent() {
        let spec = middle_third();
        for k in [1, 2, 17, 1000] {
            assert_eq!(spec.eval(k), LevelRule::new(2, 1.0 / 3.0));
        }
    }

    #[test]
    fn periodic_eval_cycles() {
        let spec = SequenceSpec::new(
            SequenceKind::Periodic(vec![LevelRule::new(2, 0.25), LevelRule::new(3, 0.2)]),
            ClassFlags::default(),
        );
        assert_eq!(spec.eval(1).n, 2);
        assert_eq!(spec.eval(2).n, 3);
        assert_eq!(spec.eval(3).n, 2);
        assert_eq!(spec.eval(8).n, 3);
    }

    #[test]
    fn explicit_head_then_tail() {
        let spec = SequenceSpec::new(
            SequenceKind::ExplicitWithTail {
                head: vec![LevelRule::new(5, 0.1), LevelRule::new(4, 0.2)],
                tail: LevelRule::new(2, 0.3),
            },
            ClassFlags::default(),
        );
        assert_eq!(spec.eval(1).n, 5);
        assert_eq!(spec.eval(2).n, 4);
        assert_eq!(spec.eval(3).n, 2);
        assert_eq!(spec.eval(100).n, 2);
    }

    /// The block rule evaluated against a directly enumerated list of block
    /// boundaries, which is how the rule is defined in the first place.
    #[test]
    fn block_rule_matches_direct_enumeration() {
        let spec = dyadic_block();
        let mut inside_levels = Vec::new();
        let mut start: u64 = 1;
        while start <= 5000 {
            for k in start..(2 * start).min(5001) {
                inside_levels.push(k as usize);
            }
            start *= 4;
        }
        for k in 1..=5000usize {
            let expect_inside = inside_levels.contains(&k);
            let rule = spec.eval(k);
            assert_eq!(
                rule.n,
                if expect_inside { 3 } else { 2 },
                "level {k} regime mismatch"
            );
            assert_eq!(rule.c, 0.25);
        }
        // Spot checks on the boundaries themselves.
        assert_eq!(spec.eval(1).n, 3);
        assert_eq!(spec.eval(2).n, 2);
        assert_eq!(spec.eval(4).n, 3);
        assert_eq!(spec.eval(5).n, 3);
        assert_eq!(spec.eval(7).n, 3);
        assert_eq!(spec.eval(8).n, 2);
        assert_eq!(spec.eval(15).n, 2);
        assert_eq!(spec.eval(16).n, 3);
    }

    #[test]
    fn geometric_band_overrides_rule_band() {
        let spec = middle_third().with_perturbation(GeometricBand {
            coeff: 1.0,
            ratio: 0.5,
        });
        assert_eq!(spec.eval(1).a, 0.5);
        assert_eq!(spec.eval(2).a, 0.25);
        assert_eq!(spec.eval(10).a, 2f64.powi(-10));
    }

    #[test]
    fn validate_reports_exact_sup_and_inf() {
        let spec = SequenceSpec::new(
            SequenceKind::Periodic(vec![LevelRule::new(2, 0.25), LevelRule::new(3, 0.2)]),
            ClassFlags {
                moran: true,
                cantor_like: true,
            },
        );
        let report = spec.validate(64).unwrap();
        assert_eq!(report.sup_branching, 3);
        assert_eq!(report.inf_contraction, 0.2);
        assert_eq!(report.band_sum, Some(0.0));
    }

    #[test]
    fn validate_rejects_degenerate_branching() {
        let spec = SequenceSpec::new(
            SequenceKind::Constant(LevelRule::new(1, 0.5)),
            ClassFlags::default(),
        );
        assert_eq!(
            spec.validate(8),
            Err(SpecError::BranchingTooSmall { k: 1, n: 1 })
        );
    }

    #[test]
    fn validate_rejects_moran_budget_violation_naming_first_level() {
        // Second cycle entry is the first (and only) offender: 3 * 0.4 > 1.
        let spec = SequenceSpec::new(
            SequenceKind::Periodic(vec![LevelRule::new(2, 0.3), LevelRule::new(3, 0.4)]),
            ClassFlags {
                moran: true,
                cantor_like: false,
            },
        );
        assert_eq!(
            spec.validate(8),
            Err(SpecError::MoranBudgetExceeded { k: 2, n: 3, c: 0.4 })
        );
    }

    #[test]
    fn validate_rejects_divergent_band_for_cantor_claim() {
        let spec = SequenceSpec::new(
            SequenceKind::Constant(LevelRule::with_band(2, 0.3, 0.1)),
            ClassFlags {
                moran: false,
                cantor_like: true,
            },
        );
        assert_eq!(
            spec.validate(8),
            Err(SpecError::BandNotSummable { k: 1, a: 0.1 })
        );
    }

    #[test]
    fn validate_accepts_summable_band_via_perturbation() {
        let spec = middle_third().with_perturbation(GeometricBand {
            coeff: 1.0,
            ratio: 0.5,
        });
        let report = spec.validate(32).unwrap();
        // sum 2^-k = 1
        assert!((report.band_sum.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validate_accepts_finite_head_band() {
        // Band only in the head: sum is finite even though entries are large.
        let spec = SequenceSpec::new(
            SequenceKind::ExplicitWithTail {
                head: vec![LevelRule::with_band(2, 0.3, 0.5)],
                tail: LevelRule::new(2, 0.3),
            },
            ClassFlags {
                moran: true,
                cantor_like: true,
            },
        );
        assert_eq!(spec.validate(16).unwrap().band_sum, Some(0.5));
    }

    #[test]
    fn validate_rejects_recurring_tail_band() {
        let spec = SequenceSpec::new(
            SequenceKind::ExplicitWithTail {
                head: vec![LevelRule::new(2, 0.3)],
                tail: LevelRule::with_band(2, 0.3, 0.01),
            },
            ClassFlags {
                moran: false,
                cantor_like: true,
            },
        );
        assert_eq!(
            spec.validate(8),
            Err(SpecError::BandNotSummable { k: 2, a: 0.01 })
        );
    }

    #[test]
    fn prefix_tables_anchor_at_zero_and_stay_monotone() {
        let tables = dyadic_block().prefix_tables(4096);
        assert_eq!(tables.log_count()[0], 0.0);
        assert_eq!(tables.log_length()[0], 0.0);
        assert_eq!(tables.depth(), 4096);
        for k in 1..=4096 {
            assert!(tables.log_count()[k] > tables.log_count()[k - 1]);
            assert!(tables.log_length()[k] < tables.log_length()[k - 1]);
        }
    }

    /// Window differences of the tables must reproduce directly multiplied
    /// products while the products are still representable.
    #[test]
    fn prefix_tables_telescope_against_raw_products() {
        let spec = SequenceSpec::new(
            SequenceKind::Periodic(vec![
                LevelRule::new(2, 0.25),
                LevelRule::new(3, 0.2),
                LevelRule::new(4, 0.125),
            ]),
            ClassFlags::default(),
        );
        let tables = spec.prefix_tables(256);
        for (j, k) in [(0usize, 5usize), (3, 17), (100, 200), (0, 256), (255, 256)] {
            let mut count_product = 1f64;
            let mut length_product = 1f64;
            for i in (j + 1)..=k {
                let rule = spec.eval(i);
                count_product *= rule.n as f64;
                length_product *= rule.c;
            }
            let count = tables.count_window(j, k).exp();
            let length = tables.length_window(j, k).exp();
            assert!(
                (count - count_product).abs() <= 1e-12 * count_product,
                "count window ({j},{k}): {count} vs {count_product}"
            );
            assert!(
                (length - length_product).abs() <= 1e-12 * length_product,
                "length window ({j},{k}): {length} vs {length_product}"
            );
        }
    }

    #[test]
    fn spec_json_round_trips() {
        let specs = [
            middle_third(),
            dyadic_block(),
            middle_third().with_perturbation(GeometricBand {
                coeff: 1.0,
                ratio: 0.5,
            }),
            SequenceSpec::new(
                SequenceKind::ExplicitWithTail {
                    head: vec![LevelRule::with_band(5, 0.1, 0.0)],
                    tail: LevelRule::new(2, 0.3),
                },
                ClassFlags::default(),
            ),
        ];
        for spec in specs {
            let json = serde_json::to_string_pretty(&spec).unwrap();
            let back: SequenceSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn spec_json_rejects_malformed_documents() {
        // constant with two entries
        let bad = r#"{"kind":"constant","values":[{"n":2,"c":0.3},{"n":2,"c":0.3}]}"#;
        assert!(serde_json::from_str::<SequenceSpec>(bad).is_err());
        // block-rule without block object
        let bad = r#"{"kind":"block-rule"}"#;
        assert!(serde_json::from_str::<SequenceSpec>(bad).is_err());
        // unknown kind
        let bad = r#"{"kind":"fibonacci"}"#;
        assert!(serde_json::from_str::<SequenceSpec>(bad).is_err());
        // explicit-with-tail without tail
        let bad = r#"{"kind":"explicit-with-tail","values":[{"n":2,"c":0.3}]}"#;
        assert!(serde_json::from_str::<SequenceSpec>(bad).is_err());
    }

    #[test]
    fn spec_json_accepts_documented_schema() {
        let json = r#"{
            "kind": "block-rule",
            "block": {
                "base": 4,
                "factor": 2,
                "inside": {"n": 3, "c": 0.25},
                "outside": {"n": 2, "c": 0.25}
            },
            "class_flags": {"moran": true, "cantor_like": true}
        }"#;
        let spec: SequenceSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, dyadic_block());
    }
}
