//! Identification: which rankings are observationally equivalent to a
//! population probability assignment.

pub mod constraints;
pub mod linear;
pub mod membership;
pub mod semiparametric;
pub mod set;

pub use constraints::{ConstraintRef, ConstraintSystem, DirectedEdge, LinearRow};
pub use linear::{solve_linear_parametric, LinkFunction, DEFAULT_LINEAR_TOL};
pub use membership::{
    check_membership, check_membership_matrix, check_membership_matrix_merged, check_membership_tol,
    contract_ties,
};
pub use semiparametric::{
    check_membership_semiparametric, semiparametric_fit, semiparametric_slack, SemiparametricFit,
    DEFAULT_MARGIN,
};
pub use set::{identified_set, identified_set_tol, project_rank, IdentifiedSet};
