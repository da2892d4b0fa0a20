//! Spectrum and index of the stability operator
//! `L_f = Δ_f + |A|² + Ric_f(ν, ν)`, with eigenvalues defined by
//! `L_f u = −μ u`.

pub mod tridiag;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::ScalarField;
use crate::rotsym::profile::ProfileCurve;
use crate::rotsym::quadrature::{integrate_weighted, DEFAULT_NODES};

pub const CONVENTION: &str = "L_f u = -mu u";
/// Eigenvalues below `−ZERO_TOLERANCE` count towards the index.
pub const ZERO_TOLERANCE: f64 = 1e-9;
pub const MIN_GRID: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub mu: f64,
    pub multiplicity: usize,
    /// Orbit mode `m`; the harmonic degree `k` for the closed form.
    pub mode: usize,
    /// Position within its mode.
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub label: String,
    pub convention: String,
    pub eigenvalues: Vec<Eigenvalue>,
    pub index: usize,
    /// True when no eigenvalue outside the computed range can be negative.
    pub complete: bool,
}

impl SpectrumResult {
    fn new(label: String, mut eigenvalues: Vec<Eigenvalue>, complete: bool) -> Self {
        eigenvalues.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.mode.cmp(&b.mode)));
        let index = eigenvalues.iter().filter(|e| e.mu < -ZERO_TOLERANCE).map(|e| e.multiplicity).sum();
        SpectrumResult { label, convention: CONVENTION.into(), eigenvalues, index, complete }
    }

    /// Eigenvalues merged across modes when closer than `tol`.
    pub fn clusters(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize, f64)> = Vec::new();
        for e in &self.eigenvalues {
            match out.last_mut() {
                Some((mu, mult, first)) if (e.mu - *first).abs() <= tol => {
                    *mu = (*mu * *mult as f64 + e.mu * e.multiplicity as f64) / (*mult + e.multiplicity) as f64;
                    *mult += e.multiplicity;
                }
                _ => out.push((e.mu, e.multiplicity, e.mu)),
            }
        }
        out.into_iter().map(|(mu, m, _)| (mu, m)).collect()
    }

    pub fn lowest(&self) -> Option<f64> {
        self.eigenvalues.first().map(|e| e.mu)
    }

    /// Rows `mode,index,mu,multiplicity`, ascending in `μ`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,index,mu,multiplicity\n");
        for e in &self.eigenvalues {
            out.push_str(&format!("{},{},{:.15e},{}\n", e.mode, e.level, e.mu, e.multiplicity));
        }
        out
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of the degree-`k` spherical harmonics on `S^d`.
pub fn harmonic_dimension(d: usize, k: usize) -> usize {
    binomial(k + d, d) - if k >= 2 { binomial(k + d - 2, d) } else { 0 }
}

/// `μ_k = k(k+n−1)/(2(n−1)) − ½` on the slice of the cylinder soliton.
pub fn slice_spectrum_closed_form(n: usize, k_max: usize) -> Result<SpectrumResult> {
    if n < 2 {
        return Err(Error::Argument(format!("slice spectrum needs n >= 2, got {n}")));
    }
    let eig: Vec<Eigenvalue> = (0..=k_max)
        .map(|k| Eigenvalue {
            mu: (k * (k + n - 1)) as f64 / (2.0 * (n as f64 - 1.0)) - 0.5,
            multiplicity: harmonic_dimension(n, k),
            mode: k,
            level: 0,
        })
        .collect();
    let complete = eig.last().is_some_and(|e| e.mu >= 0.0);
    Ok(SpectrumResult::new(format!("slice:{n} (closed form)"), eig, complete))
}

/// Profile data sampled on a cell-centred grid.
struct Grid {
    h: f64,
    /// Density `e^{−f} R^{n−1}` at cell centres.
    w: Vec<f64>,
    /// Density at interior faces.
    wf: Vec<f64>,
    radius2: Vec<f64>,
    /// `|A|² + C` at cell centres.
    shift: Vec<f64>,
}

impl Grid {
    fn new(profile: &ProfileCurve, cells: usize) -> Result<Grid> {
        let len = profile.length();
        let h = len / cells as f64;
        let c = profile.model().soliton_constant;
        let centres: Vec<(f64, f64, f64)> = (0..cells)
            .into_par_iter()
            .map(|i| {
                let j = profile.jets((i as f64 + 0.5) * h)?;
                Ok((j.density.coeff(0), j.radius.coeff(0).powi(2), j.a2.coeff(0) + c))
            })
            .collect::<Result<_>>()?;
        let wf: Vec<f64> = (1..cells)
            .into_par_iter()
            .map(|i| Ok(profile.jets(i as f64 * h)?.density.coeff(0)))
            .collect::<Result<_>>()?;
        Ok(Grid {
            h,
            w: centres.iter().map(|c| c.0).collect(),
            radius2: centres.iter().map(|c| c.1).collect(),
            shift: centres.iter().map(|c| c.2).collect(),
            wf,
        })
    }

    fn potential(&self, i: usize, orbit: f64) -> f64 {
        orbit / self.radius2[i] - self.shift[i]
    }

    fn eigenvalues(&self, orbit: f64, count: usize) -> Result<Vec<f64>> {
        let n = self.w.len();
        let h2 = self.h * self.h;
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            let left = if i > 0 { self.wf[i - 1] } else { 0.0 };
            let right = if i + 1 < n { self.wf[i] } else { 0.0 };
            diag.push((left + right) / (h2 * self.w[i]) + self.potential(i, orbit));
        }
        let off: Vec<f64> = (0..n - 1).map(|i| -self.wf[i] / (h2 * (self.w[i] * self.w[i + 1]).sqrt())).collect();
        let mut ev = tridiag::symmetric_eigenvalues(&diag, &off)?;
        ev.truncate(count);
        Ok(ev)
    }

    /// Lower bound for every eigenvalue of an orbit mode.
    fn floor(&self, orbit: f64) -> f64 {
        (0..self.w.len()).map(|i| self.potential(i, orbit)).fold(f64::INFINITY, f64::min)
    }
}

/// Orbit Laplacian eigenvalue `m(m+n−2)` on the unit `S^{n−1}`.
fn orbit_eigenvalue(n: usize, m: usize) -> f64 {
    (m * (m + n - 2)) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlOptions {
    pub m_max: usize,
    pub grid: usize,
    /// Combine grids `N` and `N/2` as `(4μ_N − μ_{N/2})/3`.
    pub richardson: bool,
}

/// Per-mode finite-difference spectrum; mode `m` keeps its lowest
/// `m_max + 1 − m` eigenvalues.
pub fn sturm_liouville_spectrum(profile: &ProfileCurve, m_max: usize, grid: usize) -> Result<SpectrumResult> {
    sturm_liouville_with(profile, &SlOptions { m_max, grid, richardson: true })
}

pub fn sturm_liouville_with(profile: &ProfileCurve, opts: &SlOptions) -> Result<SpectrumResult> {
    if !profile.is_closed() {
        return Err(Error::Precondition("spectrum needs a closed profile".into()));
    }
    if opts.grid < MIN_GRID {
        return Err(Error::Argument(format!("grid must be at least {MIN_GRID}, got {}", opts.grid)));
    }
    if opts.richardson && !opts.grid.is_multiple_of(2) {
        return Err(Error::Argument(format!("grid must be even for extrapolation, got {}", opts.grid)));
    }
    let n = profile.model().n;
    let fine = Grid::new(profile, opts.grid)?;
    let coarse = if opts.richardson { Some(Grid::new(profile, opts.grid / 2)?) } else { None };
    let per_mode: Vec<(Vec<f64>, bool)> = (0..=opts.m_max)
        .into_par_iter()
        .map(|m| {
            let orbit = orbit_eigenvalue(n, m);
            let count = opts.m_max + 1 - m;
            let ev = fine.eigenvalues(orbit, count)?;
            let ev = match &coarse {
                Some(c) => {
                    let cv = c.eigenvalues(orbit, count)?;
                    ev.iter().zip(&cv).map(|(a, b)| (4.0 * a - b) / 3.0).collect()
                }
                None => ev,
            };
            let closed_off = ev.last().is_some_and(|&v| v >= 0.0);
            Ok((ev, closed_off))
        })
        .collect::<Result<_>>()?;
    let tail = fine.floor(orbit_eigenvalue(n, opts.m_max + 1)) >= 0.0
        && coarse.as_ref().is_none_or(|c| c.floor(orbit_eigenvalue(n, opts.m_max + 1)) >= 0.0);
    let complete = tail && per_mode.iter().all(|(_, ok)| *ok);
    let mut eig = Vec::new();
    for (m, (ev, _)) in per_mode.into_iter().enumerate() {
        let mult = harmonic_dimension(n - 1, m);
        eig.extend(ev.into_iter().enumerate().map(|(level, mu)| Eigenvalue { mu, multiplicity: mult, mode: m, level }));
    }
    Ok(SpectrumResult::new(format!("profile:{} (grid {})", profile.model(), opts.grid), eig, complete))
}

/// `B_f(φ, φ) / ∫ φ² e^{−f}`.
pub fn rayleigh_quotient(profile: &ProfileCurve, trial: &ScalarField) -> Result<f64> {
    if !profile.is_closed() {
        return Err(Error::Precondition("Rayleigh quotient needs a closed profile".into()));
    }
    let c = profile.model().soliton_constant;
    let norm = integrate_weighted(profile, DEFAULT_NODES, |j| Ok(j.field(trial)?.coeff(0).powi(2)))?;
    if !(norm.sqrt() > 1e-14) {
        return Err(Error::Argument(format!("trial field {trial} vanishes on the profile")));
    }
    let form = integrate_weighted(profile, DEFAULT_NODES, |j| {
        let phi = j.field(trial)?;
        let v = phi.coeff(0);
        Ok(j.grad2(&phi) - (j.a2.coeff(0) + c) * v * v)
    })?;
    Ok(form / norm)
}

/// Number of negative eigenvalues with multiplicity.
pub fn lf_index(spectrum: &SpectrumResult) -> Result<usize> {
    if !spectrum.complete {
        return Err(Error::IncompleteSpectrum(format!(
            "{}: computed range does not reach a non-negative eigenvalue in every mode",
            spectrum.label
        )));
    }
    Ok(spectrum.eigenvalues.iter().filter(|e| e.mu < -ZERO_TOLERANCE).map(|e| e.multiplicity).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let s = slice_spectrum_closed_form(2, 2).unwrap();
        let got: Vec<(f64, usize)> = s.eigenvalues.iter().map(|e| (e.mu, e.multiplicity)).collect();
        assert_eq!(got, vec![(-0.5, 1), (0.5, 3), (2.5, 5)]);
        assert_eq!(lf_index(&s).unwrap(), 1);
        let s = slice_spectrum_closed_form(3, 1).unwrap();
        assert_eq!(s.eigenvalues[1].mu, 0.25);
        assert!(lf_index(&slice_spectrum_closed_form(3, 0).unwrap()).is_err());
        assert!(slice_spectrum_closed_form(1, 3).is_err());
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!((0..5).map(|k| harmonic_dimension(1, k)).collect::<Vec<_>>(), vec![1, 2, 2, 2, 2]);
        assert_eq!((0..4).map(|k| harmonic_dimension(2, k)).collect::<Vec<_>>(), vec![1, 3, 5, 7]);
        assert_eq!((0..4).map(|k| harmonic_dimension(3, k)).collect::<Vec<_>>(), vec![1, 4, 9, 16]);
    }
}
