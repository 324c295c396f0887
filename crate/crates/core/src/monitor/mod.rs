//! Reduced volume, blow-down stages and the soliton witnesses.

pub mod blowdown;
pub mod density;
pub mod residuals;
pub mod volume;

pub use blowdown::{base_offset, base_point_l, blowdown, BlowdownSettings, BlowdownStage, StageDiagnostics};
pub use density::{gaussian_density_limit, round_shrinker_density, DensityLimit, DensityVerdict};
pub use residuals::{local_bounds, stage_residuals, v_evolution_residual, LocalBounds, ResidualField, ResidualMaxima, StageResidual};
pub use volume::{
    monotonicity_certificate, reduced_volume, volume_radii, volume_series, weighted_gradient_bound, MonotonicityReport,
    ReducedVolumeSeries, VolumeSample,
};
