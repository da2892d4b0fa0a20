//! The pinching band for `|A|²` in terms of `α` and `n`.

use serde::Serialize;

use crate::error::{Error, Result};

use super::profile::ProfileCurve;
use super::quadrature::{gauss_legendre, DEFAULT_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchingBand {
    pub n: usize,
    pub alpha: f64,
    pub lo: f64,
    pub hi: f64,
}

impl PinchingBand {
    pub fn contains(&self, a2: f64, tol: f64) -> bool {
        a2 >= self.lo - tol && a2 <= self.hi + tol
    }

    /// Distance of `a2` outside the band, zero inside.
    pub fn excess(&self, a2: f64) -> f64 {
        (self.lo - a2).max(a2 - self.hi).max(0.0)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Argument(format!("pinching band needs n >= 3, got {n}")));
    }
    Ok(())
}

pub fn pinching_band(n: usize, alpha: f64) -> Result<PinchingBand> {
    check_n(n)?;
    if !(alpha.abs() <= 1.0) {
        return Err(Error::Argument(format!("alpha must lie in [-1, 1], got {alpha}")));
    }
    let a2 = alpha * alpha;
    let disc = (1.0 - 8.0 / (n as f64 - 1.0) * a2 * (1.0 - a2)).max(0.0);
    let r = disc.sqrt();
    Ok(PinchingBand { n, alpha, lo: 0.25 * (1.0 - r), hi: 0.25 * (1.0 + r) })
}

/// The `α`-free band `¼(1 ± √(1 − 2/(n−1)))`.
pub fn uniform_band(n: usize) -> Result<(f64, f64)> {
    check_n(n)?;
    let r = (1.0 - 2.0 / (n as f64 - 1.0)).sqrt();
    Ok((0.25 * (1.0 - r), 0.25 * (1.0 + r)))
}

/// Tolerance on `|A|²` when testing band membership.
pub const BAND_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandVerdict {
    pub inside_everywhere: bool,
    pub samples: usize,
    pub worst_excess: f64,
    pub worst_s: f64,
    pub a2_min: f64,
    pub a2_max: f64,
}

/// Samples `|A|²` and `α` at the quadrature nodes of a closed profile.
pub fn band_verdict(profile: &ProfileCurve) -> Result<BandVerdict> {
    if !profile.is_closed() {
        return Err(Error::Precondition("band verdict needs a closed profile".into()));
    }
    let n = profile.model().n;
    check_n(n)?;
    let (x, _) = gauss_legendre(DEFAULT_NODES);
    let mut v = BandVerdict {
        inside_everywhere: true,
        samples: 0,
        worst_excess: 0.0,
        worst_s: 0.0,
        a2_min: f64::INFINITY,
        a2_max: f64::NEG_INFINITY,
    };
    for seg in profile.segments() {
        for xi in &x {
            let s = seg.s0 + 0.5 * seg.len * (xi + 1.0);
            let j = profile.jets(s)?;
            let a2 = j.a2.coeff(0);
            let band = pinching_band(n, j.alpha.coeff(0).clamp(-1.0, 1.0))?;
            let e = band.excess(a2);
            v.samples += 1;
            v.a2_min = v.a2_min.min(a2);
            v.a2_max = v.a2_max.max(a2);
            if e > v.worst_excess {
                v.worst_excess = e;
                v.worst_s = s;
            }
        }
    }
    v.inside_everywhere = v.worst_excess <= BAND_TOLERANCE;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_examples() {
        let b = pinching_band(3, 0.5f64.sqrt()).unwrap();
        assert!((b.lo - 0.25).abs() < 1e-12 && (b.hi - 0.25).abs() < 1e-12);
        let b = pinching_band(3, 1.0).unwrap();
        assert_eq!((b.lo, b.hi), (0.0, 0.5));
        let (lo, hi) = uniform_band(5).unwrap();
        assert!((lo - 0.25 * (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!((hi - 0.25 * (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
        assert!((lo - 0.07322).abs() < 1e-5 && (hi - 0.42678).abs() < 1e-5);
        assert!(pinching_band(2, 0.5).is_err());
        assert!(pinching_band(3, 1.5).is_err());
    }
}
