//! Reduced geometry on symmetric model Ricci flows.
//!
//! The crate evaluates Perelman's reduced distance and reduced volume on
//! backward Ricci flows of warped-product models, assembles ancient solutions
//! from shrinking breathers, and measures the residuals of the identities and
//! bounds those objects satisfy.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

pub mod error;
pub mod flow;
pub mod lgeo;
pub mod metric;
pub mod monitor;
pub mod numerics;
pub mod scalar;
pub mod splice;

pub use error::{LabError, Result};
pub use scalar::Real;

/// `f64` instantiations of the main types.
pub type Profile = metric::Profile<f64>;
pub type MetricSnapshot = metric::MetricSnapshot<f64>;
pub type FlowHistory = flow::FlowHistory<f64>;
pub type ExactFlow = flow::ExactFlow<f64>;
pub type BreatherSpec = splice::BreatherSpec<f64>;
pub type SplicedFlow = splice::SplicedFlow<f64>;
pub type RescaledFlow = splice::RescaledFlow<f64>;
pub type Diffeo = splice::Diffeo<f64>;
pub type LGeodesicResult = lgeo::LGeodesicResult<f64>;
pub type FieldSpec = lgeo::FieldSpec<f64>;
pub type ReducedField = lgeo::ReducedField<f64>;
pub type ReducedVolumeSeries = monitor::ReducedVolumeSeries<f64>;
pub type BlowdownStage = monitor::BlowdownStage<f64>;
