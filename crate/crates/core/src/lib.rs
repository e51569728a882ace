//! Value of information for finite-state decision problems.
//!
//! An agent facing a decision problem holds a prior over `K` states. Each
//! decision yields a payoff vector; the closed convex hull of those vectors is
//! the action set `A`, and the value of a belief `p` is the support function
//! `v_A(p) = max_{a in A} <p, a>`. Information is a distribution of posteriors
//! averaging to the prior, and its value is `E[v_A(q)] - v_A(prior)`.
//!
//! The crate is organised by concern:
//!
//! - [`geometry`]: hull reduction, support functions, exposed faces, normal
//!   cones and belief polytopes with projection.
//! - [`model`]: decision problems, priors, information structures and their
//!   JSON/CSV representation.
//! - [`analysis`]: value function, confidence sets, indifference kernels,
//!   regime classification and the three bound certificates.
//! - [`insurance`]: the CARA insurance problem in log-domain closed form.
//! - [`marginal`]: parameterized information families and the marginal value
//!   of information.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod insurance;
pub mod marginal;
pub mod model;

pub use analysis::{
    classify_prior, classify_prior_with, confidence_set, indifference_kernel,
    indifference_seminorm, is_valuable, numeric_hessian, optimal_actions, confident_bounds,
    confident_bounds_with_pitch, undecided_bounds, flexible_bounds, value_function, voi,
    BoundCertificate, ConvexBody, QuadraticScoringBody, Regime, RegimeConfig, RegimeReport,
    BoundKind,
};
pub use error::{Error, Result};
pub use geometry::{
    exposed_face, hull_reduce, polytope_is_empty, project_onto_polytope, revealed_beliefs,
    support_function, Action, ActionSet, Belief, BeliefPolytope, Halfspace, SignedMeasure,
};
pub use insurance::{InsuranceBody, InsuranceParams, Threshold};
pub use marginal::{
    classification_grid, instantiate, marginal_voi, ClassificationGrid, GridConfig, InfoFamily,
    MarginalClass, MarginalReport, Quadrature,
};
pub use model::{
    garble, validate_information_structure, Atom, DecisionProblem, InformationStructure, Prior,
    ValidationReport,
};

/// Library version, echoed into output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Numerical tolerances shared across modules.
pub mod tol {
    /// Feasibility band for simplex and halfspace membership.
    pub const FEAS: f64 = 1e-9;
    /// Bayes-plausibility residual allowed per coordinate.
    pub const BAYES: f64 = 1e-8;
    /// Smallest prior probability accepted.
    pub const EPS_SUPPORT: f64 = 1e-12;

    /// Band for argmax membership, relative to the support value.
    pub fn face(value: f64) -> f64 {
        1e-9 * (1.0 + value.abs())
    }

    /// Slack allowed in a bound certificate.
    pub fn cert(voi: f64) -> f64 {
        1e-7 * (1.0 + voi.abs())
    }
}
