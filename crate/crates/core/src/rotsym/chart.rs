//! A rotational hypersurface as an immersion chart in `(s, orbit angles)`.

use crate::ambient::AmbientModel;
use crate::charts::{sphere_domain, sphere_point};
use crate::error::{Error, Result};
use crate::hypersurface::ImmersionChart;
use crate::jet::Jet;
use crate::scalar::Scalar;

use super::profile::ProfileCurve;

/// Orbit radius below which the chart is considered too close to the axis.
const AXIS_CLEARANCE: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct ProfileChart {
    profile: ProfileCurve,
    s_range: (f64, f64),
    label: String,
}

impl ProfileChart {
    pub fn new(profile: ProfileCurve) -> Result<Self> {
        let a = profile.model().a;
        let mut start = None;
        let mut end = None;
        for [s, rho, _, _] in profile.samples() {
            let ok = (rho / a).sin() >= AXIS_CLEARANCE;
            match (ok, start) {
                (true, None) => start = Some(s),
                (true, Some(_)) => end = Some(s),
                (false, Some(_)) => break,
                _ => {}
            }
        }
        let s_range = match (start, end) {
            (Some(lo), Some(hi)) if hi > lo => (lo, hi),
            _ => return Err(Error::Geometry("profile never leaves the axis neighbourhood".into())),
        };
        Ok(ProfileChart { profile, s_range, label: "profile".into() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn profile(&self) -> &ProfileCurve {
        &self.profile
    }

    pub fn s_range(&self) -> (f64, f64) {
        self.s_range
    }
}

impl ImmersionChart for ProfileChart {
    fn model(&self) -> &AmbientModel {
        self.profile.model()
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        let mut d = vec![self.s_range];
        d.extend(sphere_domain(self.profile.model().n - 1));
        d
    }
    fn label(&self) -> String {
        self.label.clone()
    }
    fn map(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let a = self.profile.model().a;
        let s = &u[0];
        let (rho, t) = self.profile.local_series(s.value(), s.order().max(1));
        let rho = Jet::taylor_compose(rho.coeffs(), s);
        let t = Jet::taylor_compose(t.coeffs(), s);
        let arg = rho / a;
        let mut x = vec![arg.cos() * a];
        let r = arg.sin() * a;
        x.extend(sphere_point(&u[1..], 1.0).into_iter().map(|w| w * r));
        x.push(t);
        Ok(x)
    }
    fn orientation(&self, u: &[f64], _x: &[f64]) -> Vec<f64> {
        let a = self.profile.model().a;
        let (rho, t) = self.profile.local_series(u[0], 1);
        let (r0, r1, t1) = (rho.coeff(0), rho.coeff(1), t.coeff(1));
        let (sr, cr) = (r0 / a).sin_cos();
        // ν = −t′ ∂ρ + ρ′ ∂t
        let mut v = vec![t1 * sr];
        v.extend(sphere_point(&u[1..], 1.0).into_iter().map(|w| -t1 * cr * w));
        v.push(r1);
        v
    }
}
