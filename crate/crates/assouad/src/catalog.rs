//! Named built-in subdivision specs, so tests and command lines can say
//! `middle-third` instead of hand-writing JSON.

use crate::sequences::{ClassFlags, GeometricBand, LevelRule, SequenceKind, SequenceSpec};

/// Names accepted by [`lookup`], in display order.
pub const NAMES: [&str; 6] = [
    "middle-third",
    "uniform-2-4",
    "uniform-3-5",
    "quarter-fifth-cycle",
    "dyadic-block",
    "perturbed-middle-third",
];

pub fn lookup(name: &str) -> Option<SequenceSpec> {
    match name {
        "middle-third" => Some(middle_third()),
        "uniform-2-4" => Some(uniform(2, 0.25)),
        "uniform-3-5" => Some(uniform(3, 0.2)),
        "quarter-fifth-cycle" => Some(quarter_fifth_cycle()),
        "dyadic-block" => Some(dyadic_block()),
        "perturbed-middle-third" => Some(perturbed_middle_third()),
        _ => None,
    }
}

fn both_classes() -> ClassFlags {
    ClassFlags {
        moran: true,
        cantor_like: true,
    }
}

/// The classical ternary Cantor construction: two children, ratio 1/3.
pub fn middle_third() -> SequenceSpec {
    uniform(2, 1.0 / 3.0)
}

/// Constant subdivision with `n` children of ratio `c` at every level.
/// All dimensions coincide at `log n / -log c`.
pub fn uniform(n: u32, c: f64) -> SequenceSpec {
    SequenceSpec::new(SequenceKind::Constant(LevelRule::new(n, c)), both_classes())
}

/// Two-rule cycle (2, 1/4), (3, 1/5): the simplest spec whose window ratios
/// genuinely depend on the window, exercising the sweep machinery.
pub fn quarter_fifth_cycle() -> SequenceSpec {
    SequenceSpec::new(
        SequenceKind::Periodic(vec![LevelRule::new(2, 0.25), LevelRule::new(3, 0.2)]),
        both_classes(),
    )
}

/// Block-regime construction: three children on levels in `[4^j, 2*4^j)`,
/// two elsewhere, ratio 1/4 throughout. The branching runs differ at every
/// scale, which separates the Assouad dimension (log3/log4) from the
/// box-type average and keeps the lower bound at 1/2.
pub fn dyadic_block() -> SequenceSpec {
    SequenceSpec::new(
        SequenceKind::BlockRule {
            base: 4,
            factor: 2,
            inside: LevelRule::new(3, 0.25),
            outside: LevelRule::new(2, 0.25),
        },
        both_classes(),
    )
}

/// Middle-third construction with child ratios drawn from bands of relative
/// width `a_k = 2^-k` around 1/3. The band sum is finite, so the spectra
/// match the unperturbed construction.
pub fn perturbed_middle_third() -> SequenceSpec {
    SequenceSpec::new(
        SequenceKind::Constant(LevelRule::new(2, 1.0 / 3.0)),
        ClassFlags {
            moran: false,
            cantor_like: true,
        },
    )
    .with_perturbation(GeometricBand {
        coeff: 1.0,
        ratio: 0.5,
    })
}
