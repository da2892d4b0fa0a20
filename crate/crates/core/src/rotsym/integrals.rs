//! Weighted integrals over closed rotational hypersurfaces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::ScalarField;

use super::profile::ProfileCurve;
use super::quadrature::{integrate_weighted, max_over_nodes, DEFAULT_NODES};

/// `|H_f|` above which a profile is not treated as f-minimal.
pub const FMIN_PROFILE_TOLERANCE: f64 = 1e-7;

fn require_closed(profile: &ProfileCurve) -> Result<()> {
    if profile.is_closed() {
        Ok(())
    } else {
        Err(Error::Precondition("profile is not closed".into()))
    }
}

/// `∫ φ e^{−f} dσ`.
pub fn weighted_integral(profile: &ProfileCurve, integrand: &ScalarField) -> Result<f64> {
    weighted_integral_with(profile, integrand, DEFAULT_NODES)
}

pub fn weighted_integral_with(profile: &ProfileCurve, integrand: &ScalarField, nodes: usize) -> Result<f64> {
    require_closed(profile)?;
    integrate_weighted(profile, nodes, |j| Ok(j.field(integrand)?.coeff(0)))
}

/// Weighted volume `V_f = ∫ e^{−f} dσ`.
pub fn weighted_volume(profile: &ProfileCurve) -> Result<f64> {
    weighted_integral(profile, &ScalarField::Constant(1.0))
}

/// `∫ Δ_f u e^{−f} dσ`, zero on closed hypersurfaces.
pub fn divergence_integral(profile: &ProfileCurve, u: &ScalarField) -> Result<f64> {
    require_closed(profile)?;
    integrate_weighted(profile, DEFAULT_NODES, |j| j.weighted_laplacian(&j.field(u)?))
}

/// Largest `|H_f|` over the quadrature nodes, with its location.
pub fn max_fminimality(profile: &ProfileCurve) -> Result<(f64, f64)> {
    max_over_nodes(profile, DEFAULT_NODES, |j| Ok(j.hf.coeff(0).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl IntegralResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

/// Residuals of the three integral identities for closed f-minimal
/// hypersurfaces of the cylinder soliton.
#[allow(non_snake_case)]
pub fn lemA_residuals(profile: &ProfileCurve) -> Result<IntegralResiduals> {
    require_closed(profile)?;
    let model = profile.model();
    if !model.is_default_cylinder() {
        return Err(Error::Argument(format!("integral identities need the soliton radius, got {model}")));
    }
    let (hf, at) = max_fminimality(profile)?;
    if !(hf <= FMIN_PROFILE_TOLERANCE) {
        return Err(Error::Precondition(format!("profile is not f-minimal: |H_f| = {hf:e} at s = {at}")));
    }
    let n1 = model.n as f64 - 1.0;
    let terms = |k: usize| {
        integrate_weighted(profile, DEFAULT_NODES, move |j| {
            let al = j.alpha.coeff(0);
            let a2 = j.a2.coeff(0);
            let h = j.h.coeff(0);
            let mix = al * al * (1.0 - al * al);
            Ok(match k {
                0 => j.grad2(&j.alpha) - al * al * a2,
                1 => -j.grad2(&j.h) + h * h * a2 + 0.25 * mix,
                _ => j.nabla_a2()? + a2 * (0.5 - a2) - mix / (2.0 * n1),
            })
        })
    };
    Ok(IntegralResiduals { r1: terms(0)?.abs(), r2: terms(1)?.abs(), r3: terms(2)?.abs() })
}
