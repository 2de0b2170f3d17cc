//! Chern-connection curvature of Hermitian metrics given in local
//! holomorphic coordinates, the mixed curvature `α Ric + β H`, conformal
//! transformation laws and the surface identities built on them.

pub mod catalog;
pub mod cli;
pub mod conformal;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod metric;
pub mod mixed;
pub mod parser;
pub mod report;
pub mod surface;
pub mod tensor;
pub mod verify;

pub use num_complex::Complex64;

pub use curvature::{
    analyze, chern_curvature, holomorphic_sectional, kahler_defect, kahler_like_defect, ricci_bundle,
    to_unitary_frame, torsion, ChernCurvature, Frame, PointGeometry, RicciBundle, Torsion,
};
pub use error::{CatalogError, EvalError, GeometryError, ParseError};
pub use expr::{evaluate, fd_residual, wirtinger_diff, Expr, Wirtinger};
pub use metric::{metric_jet, Domain, MetricJet, MetricSpec};
pub use parser::{parse_expr, parse_metric};
pub use tensor::{orthonormal_frame, CMatrix, Tensor3, Tensor4};
pub use mixed::{
    constancy_tensor_residual, extremize, mixed_curvature, sphere_average_closed_form, sphere_average_monte_carlo,
    trace_identity_residual, ExtremizeOptions, ExtremumReport, MixedForm, MixedParams,
};
pub use conformal::{
    chern_laplacian, conformal_constancy_residual, conformal_curvature_via_formula, conformal_metric,
    surface_scalar_relation_residual, ConformalChange, ConformalFactor, ConformalJet,
};
pub use surface::{c1_squared_pointwise_residual, ricci_combination_residual, weyl_minus, OneOneForm, WeylMinus};
pub use catalog::{builtin, sample_points, CatalogEntry, Expected, Provenance, Quantity};
