//! Assouad-type dimensions and dimension spectra of Moran and Cantor-like
//! interval constructions, computed two independent ways.
//!
//! The toolkit works with nested subdivision constructions on `[0, 1]`:
//! every level-(k-1) interval carries `n_k` children scaled by `c_k`
//! (optionally with per-level ratio bands for the Cantor-like variant).
//! For such sets it computes the Assouad dimension, an upper bound on the
//! lower dimension, and the Assouad/lower dimension spectra:
//!
//! - **Closed form** ([`formulas`]): window ratios of branching and length
//!   prefix sums, driven by [`sequences::PrefixTables`]. Exact up to
//!   floating-point rounding, depth-limited only by the tables.
//! - **Empirically** ([`estimate`]): exact minimal ball coverings on a
//!   finite-depth geometric realization ([`construct::LevelStructure`]),
//!   with sampled two-scale exponents.
//!
//! The two paths share nothing but the spec, which is what makes their
//! agreement evidence; [`verify::run_suite`] runs every cross-check and
//! returns disagreements as findings. [`catalog`] holds the named example
//! constructions used throughout the tests and the command-line tool.
//!
//! ```
//! use assouad::{catalog, formulas};
//!
//! let tables = catalog::middle_third().prefix_tables(64);
//! let dim = formulas::assouad_dim_formula(&tables, 16, 8).unwrap();
//! assert!((dim.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
//! ```

pub mod catalog;
pub mod construct;
pub mod estimate;
pub mod formulas;
pub mod sequences;
pub mod verify;

pub use construct::{build_levels, LevelStructure, Placement, RatioMode};
pub use estimate::{covering_number, empirical_assouad, empirical_lower, EmpiricalReport};
pub use formulas::{
    assouad_dim_formula, assouad_spectrum_formula, lower_dim_bound_formula, lower_spectrum_formula,
    spectrum_curve, DimensionEstimate, SpectrumCurve, SpectrumVariant,
};
pub use sequences::{LevelRule, SequenceKind, SequenceSpec};
pub use verify::{run_suite, SuiteConfig, VerifyReport};
