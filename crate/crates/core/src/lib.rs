//! Differentially private data depth.
//!
//! Depth values (halfspace, integrated rank-weighted, simplicial, projection),
//! their global sensitivities, a breakdown certificate for projection
//! outlyingness, and private estimators built on the Laplace, Gaussian,
//! exponential and propose-test-release mechanisms.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod depth;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod mechanisms;
pub mod oracle;
pub mod sensitivity;

pub use data::{
    empirical_quantile, load_dataset, project, read_dataset, sample_directions, sample_iqr,
    sample_mad, sample_median, Dataset, Direction, DirectionSet, FixedNoise, NoiseSource,
    NoiseVariant, PrivacyParams, ProjectedSample, RandomSource, SortedSample,
};
pub use depth::{
    depth, depth_vector, halfspace_depth, irw_depth, outlyingness, projection_depth,
    simplicial_depth, DepthKind, DepthValue, DepthVector, ProjectionProfile, Scale, SimplicialMode,
};
pub use error::{DepthError, Result};
pub use estimators::{
    default_eta, depth_median_probabilities, private_depth_median_exp, private_depth_point,
    private_depth_vector, private_projection_depth, private_projection_median_ptr,
    private_rank_sum_scale_test, DepthSpec, PrivateDepthReport, RankSumReport, RankVector,
    TruncatedOutlyingnessSpec,
};
pub use mechanisms::{
    compose_advanced, compose_basic, exponential_mechanism_discrete, gaussian_mechanism,
    laplace_mechanism, ptr, ptr_cost, ptr_exponential, ptr_exponential_cost, Audit, BudgetLedger,
    CandidateGrid, LedgerEntry, MechanismOutcome, Payload, Prior, PrivacyCost,
};
pub use sensitivity::{
    breakdown_holds, global_sensitivity, outlyingness_interval, vector_global_sensitivity,
    BreakdownCertifier, BreakdownQuery, Norm, OutlyingnessInterval, Scope, SensitivityBound,
};
