//! Shooting for closed profiles from the pole.
//!
//! A profile leaving the pole perpendicularly closes smoothly at the
//! opposite pole whenever it is symmetric about the equator: either it
//! crosses `ρ = πa/2` horizontally (mirror closure, `sin θ = 0`) or it
//! crosses at height zero (point closure, `t = 0`). Both conditions are
//! bisected over the launch height.

use std::f64::consts::PI;

use serde::Serialize;

use crate::ambient::AmbientModel;
use crate::error::{Error, Result};

use super::profile::{integrate_raw, Closure, ProfileCurve, ProfileState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootConfig {
    /// RK4 step; `None` means `a · 10⁻³`.
    pub step: Option<f64>,
    /// Launch heights are scanned over `t_start ± half_width`.
    pub half_width: f64,
    pub scan_points: usize,
    pub max_bisections: usize,
    /// Closure defect accepted as closed.
    pub tol: f64,
    /// Integration length cap in units of `πa`.
    pub max_length: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig { step: None, half_width: 0.25, scan_points: 16, max_bisections: 80, tol: 1e-6, max_length: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectSample {
    pub launch_height: f64,
    /// `sin θ` at the equator crossing.
    pub mirror_defect: Option<f64>,
    /// `t` at the equator crossing.
    pub point_defect: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ClosedProfile {
    pub profile: ProfileCurve,
    pub launch_height: f64,
    pub defect: f64,
}

#[derive(Debug, Clone)]
pub enum ShootOutcome {
    Closed(ClosedProfile),
    NotFound { trace: Vec<DefectSample> },
}

impl ShootOutcome {
    pub fn closed(&self) -> Option<&ClosedProfile> {
        match self {
            ShootOutcome::Closed(c) => Some(c),
            ShootOutcome::NotFound { .. } => None,
        }
    }
}

struct Shooter<'a> {
    model: &'a AmbientModel,
    step: f64,
    length: f64,
    trace: Vec<DefectSample>,
}

impl Shooter<'_> {
    fn half(&self, height: f64) -> Result<Option<Vec<super::profile::Segment>>> {
        let raw = integrate_raw(self.model, ProfileState::axis(height), self.step, self.length, true)?;
        Ok(raw.hit_equator.then_some(raw.segments))
    }

    fn defects(&mut self, height: f64) -> Result<DefectSample> {
        let sample = match self.half(height)? {
            Some(segs) => {
                let last = segs.last().expect("non-empty");
                let [_, t, theta] = last.eval(last.len);
                DefectSample { launch_height: height, mirror_defect: Some(theta.sin()), point_defect: Some(t) }
            }
            None => DefectSample { launch_height: height, mirror_defect: None, point_defect: None },
        };
        self.trace.push(sample);
        Ok(sample)
    }

    fn close(&self, height: f64, kind: Closure, defect: f64) -> Result<ClosedProfile> {
        let half = self
            .half(height)?
            .ok_or_else(|| Error::Integration(format!("launch height {height} lost the equator")))?;
        let profile = ProfileCurve::close_by_reflection(*self.model, self.step, half, kind)?;
        Ok(ClosedProfile { profile, launch_height: height, defect })
    }
}

fn pick(sample: &DefectSample, kind: Closure) -> Option<f64> {
    match kind {
        Closure::Mirror => sample.mirror_defect,
        _ => sample.point_defect,
    }
}

/// Searches for a closed profile launched near `t_start`.
pub fn shoot_closed(t_start: f64, model: &AmbientModel, config: &ShootConfig) -> Result<ShootOutcome> {
    if !model.is_cylinder() {
        return Err(Error::Argument(format!("shooting needs the sphere cylinder, got {model}")));
    }
    if !t_start.is_finite() || !(config.tol > 0.0) || config.scan_points < 2 {
        return Err(Error::Argument("invalid shooting configuration".into()));
    }
    let step = config.step.unwrap_or(1e-3 * model.a);
    let mut sh = Shooter { model, step, length: config.max_length * PI * model.a, trace: Vec::new() };
    let kinds = [Closure::Mirror, Closure::PointSymmetric];

    let first = sh.defects(t_start)?;
    for kind in kinds {
        if let Some(d) = pick(&first, kind).filter(|d| d.abs() <= config.tol) {
            return Ok(ShootOutcome::Closed(sh.close(t_start, kind, d.abs())?));
        }
    }

    let m = config.scan_points;
    let lo = t_start - config.half_width;
    let grid: Vec<f64> = (0..=m).map(|i| lo + 2.0 * config.half_width * i as f64 / m as f64).collect();
    let mut scan = Vec::with_capacity(grid.len());
    for &h in &grid {
        scan.push(sh.defects(h)?);
    }
    // brackets nearest to the requested launch height first
    let mut brackets: Vec<(f64, usize, Closure)> = Vec::new();
    for kind in kinds {
        for i in 0..m {
            if let (Some(a), Some(b)) = (pick(&scan[i], kind), pick(&scan[i + 1], kind)) {
                if a.signum() != b.signum() || a == 0.0 || b == 0.0 {
                    let mid = 0.5 * (grid[i] + grid[i + 1]);
                    brackets.push(((mid - t_start).abs(), i, kind));
                }
            }
        }
    }
    brackets.sort_by(|x, y| x.0.total_cmp(&y.0));

    for (_, i, kind) in brackets {
        let (mut a, mut b) = (grid[i], grid[i + 1]);
        let mut ga = pick(&scan[i], kind).expect("bracketed");
        let mut best = (ga.abs(), a);
        let gb = pick(&scan[i + 1], kind).expect("bracketed");
        if gb.abs() < best.0 {
            best = (gb.abs(), b);
        }
        for _ in 0..config.max_bisections {
            if best.0 <= 1e-13 || b - a <= 1e-15 * (1.0 + a.abs()) {
                break;
            }
            let mid = 0.5 * (a + b);
            let Some(g) = pick(&sh.defects(mid)?, kind) else { break };
            if g.abs() < best.0 {
                best = (g.abs(), mid);
            }
            if g.signum() == ga.signum() {
                a = mid;
                ga = g;
            } else {
                b = mid;
            }
        }
        if best.0 <= config.tol {
            return Ok(ShootOutcome::Closed(sh.close(best.1, kind, best.0)?));
        }
    }

    let mut trace = sh.trace;
    trace.sort_by(|x, y| x.launch_height.total_cmp(&y.launch_height));
    trace.dedup_by(|x, y| x.launch_height == y.launch_height);
    Ok(ShootOutcome::NotFound { trace })
}

/// Hausdorff distance of the profile samples to the slice `t = 0`.
pub fn distance_to_slice(profile: &ProfileCurve) -> f64 {
    profile.max_abs_height()
}
