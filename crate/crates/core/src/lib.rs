//! Flatness certificates and atomic measure recovery for correlatively
//! sparse moment relaxations of polynomial optimization problems.
//!
//! The numerical core is generic over the scalar type through [`Real`]
//! (implemented for `f32` and `f64`). Concrete `f64` aliases are exported
//! at the crate root for the common case.
//!
//! Variables are 1-based in every file format and CLI report and 0-based
//! inside the library; conversion happens in [`io`].

pub mod altmeasure;
pub mod assemble;
pub mod certify;
pub mod cover;
pub mod error;
pub mod extract;
pub mod fixtures;
pub mod index;
pub mod io;
mod linalg;
pub mod matrices;
pub mod measure;
pub mod moments;
pub mod relax;
pub mod rip;
pub mod scalar;
mod simplex;

pub use error::{CoverViolation, Error, Result};
pub use scalar::Real;

pub use cover::{project_point, validate_cover, CliqueCover, Projection};
pub use index::{local_exponents, sparse_exponents, MultiIndex};
pub use moments::{riesz_eval, CliqueSubvector, Polynomial, SparseMomentVector};

pub use matrices::{
    localizing_block, localizing_matrix, moment_matrix, overlap_moment_matrix,
    ConstraintPolynomial, LabeledSymMatrix,
};

pub use rip::{check_rip, find_rip_order, rip_ordered, RipWitnesses};

pub use certify::{
    certify, d_half, numerical_rank, psd_check, zero_propagation_check, CliqueFlatness,
    FlatnessCertificate, OverlapFlatness, RankPolicy, RankReport, ZeroPropagation,
};

pub use measure::AtomicMeasure;

pub use extract::{
    constraint_feasibility_check, extract_atoms, extract_clique, verify_measure_against_subvector,
    ExtractOptions, FeasibilityReport,
};

pub use assemble::{
    assemble, match_marginals, maximal_support_set, pushforward, verify_global, MarginalGroups,
};

pub use altmeasure::{enumerate_extreme_measures, solve_weight_lp, WeightLp};

pub use relax::{
    build_relaxation, emit_sdpa, parse_sdpa, pipeline, solve_sdp_bundled, PopProblem, SdpInstance,
};

/// `f64` sparse moment vector.
pub type MomentVector = SparseMomentVector<f64>;
/// `f64` clique subvector.
pub type CliqueMoments = CliqueSubvector<f64>;
/// `f64` labeled symmetric matrix.
pub type MomentMatrix = LabeledSymMatrix<f64>;
/// `f64` atomic measure.
pub type Measure = AtomicMeasure<f64>;
/// `f64` constraint polynomial.
pub type Constraint = ConstraintPolynomial<f64>;
/// `f64` rank policy.
pub type Policy = RankPolicy<f64>;
/// `f64` flatness certificate.
pub type Certificate = FlatnessCertificate<f64>;
/// `f64` polynomial optimization problem.
pub type Pop = relax::PopProblem<f64>;
/// `f64` semidefinite relaxation.
pub type Sdp = relax::SdpInstance<f64>;

/// Single-precision moment vector.
pub type MomentVectorF32 = SparseMomentVector<f32>;
/// Single-precision atomic measure.
pub type MeasureF32 = AtomicMeasure<f32>;
