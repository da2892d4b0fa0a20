//! Rotationally symmetric f-minimal hypersurfaces in the sphere cylinder.

pub mod band;
pub mod chart;
pub mod integrals;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod series;
pub mod shoot;

pub use band::{band_verdict, uniform_band, pinching_band, BandVerdict, PinchingBand};
pub use chart::ProfileChart;
pub use integrals::{lemA_residuals, weighted_integral, weighted_volume, IntegralResiduals};
pub use profile::{integrate_profile, Closure, ProfileCurve, ProfileJets, ProfileState};
pub use shoot::{shoot_closed, ShootConfig, ShootOutcome};

/// The closed slice `ρ ∈ [0, πa]`, `t ≡ 0`, built like any shot profile.
pub fn slice_profile(model: &crate::ambient::AmbientModel, step: Option<f64>) -> crate::Result<ProfileCurve> {
    let config = ShootConfig { step, ..ShootConfig::default() };
    match shoot_closed(0.0, model, &config)? {
        ShootOutcome::Closed(c) => Ok(c.profile),
        ShootOutcome::NotFound { .. } => Err(crate::Error::Integration("slice did not close".into())),
    }
}
