//! L-geodesics, reduced distance and its derivatives.

pub mod bvp;
pub mod curve;
pub mod field;
pub mod shoot;

pub use bvp::{solve_bvp, solve_bvp_near, BvpSettings};
pub use curve::{l_energy, LCurve};
pub use field::{identity_residuals, reduced_field, FieldNode, FieldSpec, IdentityResidual, ReducedField};
pub use shoot::{shoot, LGeodesicResult, ShootSettings};
