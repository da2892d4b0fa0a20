//! Gauss–Legendre rules and weighted integration over profile curves.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::profile::{ProfileCurve, ProfileJets};

pub const DEFAULT_NODES: usize = 8;

/// Nodes and weights of the `n`-point rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Area of the unit sphere `S^m`.
pub fn unit_sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * unit_sphere_area(m - 2),
    }
}

/// `∫ g e^{−f} dσ` over the rotational hypersurface, with `g` given on
/// the local profile geometry. Composite rule with `nodes` per segment.
pub fn integrate_weighted<G>(profile: &ProfileCurve, nodes: usize, g: G) -> Result<f64>
where
    G: Fn(&ProfileJets) -> Result<f64> + Sync,
{
    let (x, w) = gauss_legendre(nodes);
    let parts: Vec<f64> = profile
        .segments()
        .par_iter()
        .map(|seg| {
            let mut acc = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let s = seg.s0 + 0.5 * seg.len * (xi + 1.0);
                let j = profile.jets(s)?;
                let v = g(&j)?;
                acc += wi * v * j.density.coeff(0) * j.speed.coeff(0);
            }
            Ok(acc * 0.5 * seg.len)
        })
        .collect::<Result<_>>()?;
    let total: f64 = parts.iter().sum();
    if !total.is_finite() {
        return Err(Error::Numeric("weighted integral is not finite".into()));
    }
    Ok(unit_sphere_area(profile.model().n - 1) * total)
}

/// Maximum of `g` over all quadrature nodes.
pub fn max_over_nodes<G>(profile: &ProfileCurve, nodes: usize, g: G) -> Result<(f64, f64)>
where
    G: Fn(&ProfileJets) -> Result<f64> + Sync,
{
    let (x, _) = gauss_legendre(nodes);
    let parts: Vec<(f64, f64)> = profile
        .segments()
        .par_iter()
        .map(|seg| {
            let mut best = (f64::NEG_INFINITY, seg.s0);
            for xi in &x {
                let s = seg.s0 + 0.5 * seg.len * (xi + 1.0);
                let v = g(&profile.jets(s)?)?;
                if v > best.0 || v.is_nan() {
                    best = (v, s);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold((f64::NEG_INFINITY, 0.0), |b, p| if p.0 > b.0 || p.0.is_nan() { p } else { b }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials() {
        for n in [1, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert_eq!(unit_sphere_area(1), 2.0 * PI);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-14);
    }
}
