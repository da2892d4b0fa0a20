//! Profile curves `(ρ(s), t(s), θ(s))` with piecewise Taylor dense output.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ambient::AmbientModel;
use crate::error::{Error, Result};
use crate::operators::ScalarField;
use crate::scalar::Scalar;

use super::ode::{axis_radius, axis_series, rk4_step, taylor_expansion};
use super::series::{Series, SERIES_CAP};

/// Degree of the per-step dense polynomials.
pub const DENSE_DEGREE: usize = 8;
/// Degree of the expansion used off the axis.
pub const AXIS_DEGREE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    Open,
    /// Reflection through the equator `ρ = πa/2`.
    Mirror,
    /// Point reflection through `(πa/2, 0)`.
    PointSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub rho: f64,
    pub t: f64,
    pub theta: f64,
}

impl ProfileState {
    /// Perpendicular launch from the pole at height `t`.
    pub fn axis(t: f64) -> Self {
        ProfileState { rho: 0.0, t, theta: 0.0 }
    }
}

/// One dense-output piece; polynomials are in `τ = s − s0`, `τ ∈ [0, len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub s0: f64,
    pub len: f64,
    pub rho: Series,
    pub t: Series,
    pub theta: Series,
}

impl Segment {
    pub fn eval(&self, tau: f64) -> [f64; 3] {
        [self.rho.eval(tau), self.t.eval(tau), self.theta.eval(tau)]
    }

    fn reflected(&self, total: f64, kind: Closure, a: f64) -> Segment {
        let rev = |p: &Series| p.shift(self.len).flip();
        let mut rho = -rev(&self.rho);
        rho.set_coeff(0, rho.coeff(0) + PI * a);
        let (t, theta) = match kind {
            Closure::Mirror => (rev(&self.t), -rev(&self.theta)),
            _ => (-rev(&self.t), rev(&self.theta)),
        };
        Segment { s0: total - self.s0 - self.len, len: self.len, rho, t, theta }
    }
}

#[derive(Debug, Clone)]
pub struct ProfileCurve {
    model: AmbientModel,
    step: f64,
    segments: Vec<Segment>,
    closure: Closure,
}

/// Result of an integration run that may stop at the equator.
pub(crate) struct RawIntegration {
    pub segments: Vec<Segment>,
    pub hit_equator: bool,
}

fn validate(model: &AmbientModel, step: f64, length: f64) -> Result<()> {
    if !model.is_cylinder() {
        return Err(Error::Argument(format!("profiles live in the sphere cylinder, not {model}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Argument(format!("length must be positive, got {length}")));
    }
    Ok(())
}

pub(crate) fn integrate_raw(
    model: &AmbientModel,
    initial: ProfileState,
    step: f64,
    length: f64,
    stop_at_equator: bool,
) -> Result<RawIntegration> {
    validate(model, step, length)?;
    let a = model.a;
    let equator = 0.5 * PI * a;
    let margin = (model.n as f64 - 1.0) * step;
    let mut segments = Vec::new();
    let mut s;
    let mut y;
    if initial.rho == 0.0 {
        if initial.theta != 0.0 {
            return Err(Error::Argument("launch from the axis must be perpendicular (theta = 0)".into()));
        }
        let series = axis_series(model, initial.t, AXIS_DEGREE)?;
        let r = axis_radius(&series, a).max(margin).min(length);
        let [rho, t, theta] = series;
        segments.push(Segment { s0: 0.0, len: r, rho, t, theta });
        y = [rho.eval(r), t.eval(r), theta.eval(r)];
        s = r;
    } else if initial.rho > 0.0 && initial.rho < PI * a {
        y = [initial.rho, initial.t, initial.theta];
        s = 0.0;
    } else {
        return Err(Error::Argument(format!("initial rho = {} outside [0, pi a)", initial.rho)));
    }
    let start = s;
    let mut k = 0usize;
    while s < length * (1.0 - 1e-14) {
        if y[0] < margin || y[0] > PI * a - margin {
            break;
        }
        let h = step.min(length - s);
        let [rho, t, theta] = taylor_expansion(model, y, DENSE_DEGREE)?;
        let next = rk4_step(model, y, h)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration(format!("non-finite state after s = {s}")));
        }
        let mut seg = Segment { s0: s, len: h, rho, t, theta };
        if stop_at_equator && y[0] < equator && next[0] >= equator {
            seg.len = crossing(&seg.rho, equator, h);
            segments.push(seg);
            return Ok(RawIntegration { segments, hit_equator: true });
        }
        segments.push(seg);
        k += 1;
        s = start + k as f64 * step;
        if s > length {
            s = length;
        }
        y = next;
    }
    Ok(RawIntegration { segments, hit_equator: false })
}

/// Root of `p(τ) = level` in `[0, h]`, assuming a sign change.
fn crossing(p: &Series, level: f64, h: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p.eval(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-17 * h.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Integrates the profile ODE with fixed-step RK4 and Taylor dense output.
///
/// `initial.rho == 0` starts on the axis through the series expansion.
/// Integration stops early when the curve comes within `(n−1)·step` of
/// either axis.
pub fn integrate_profile(model: &AmbientModel, initial: ProfileState, step: f64, length: f64) -> Result<ProfileCurve> {
    let raw = integrate_raw(model, initial, step, length, false)?;
    ProfileCurve::from_segments(*model, step, raw.segments, Closure::Open)
}

impl ProfileCurve {
    pub fn from_segments(model: AmbientModel, step: f64, segments: Vec<Segment>, closure: Closure) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Integration("profile has no segments".into()));
        }
        Ok(ProfileCurve { model, step, segments, closure })
    }

    /// Closes a half profile ending on the equator by reflection.
    pub fn close_by_reflection(model: AmbientModel, step: f64, half: Vec<Segment>, kind: Closure) -> Result<Self> {
        let last = half.last().ok_or_else(|| Error::Integration("empty half profile".into()))?;
        let total = 2.0 * (last.s0 + last.len);
        let mut segments = half.clone();
        segments.extend(half.iter().rev().map(|seg| seg.reflected(total, kind, model.a)));
        Self::from_segments(model, step, segments, kind)
    }

    pub fn model(&self) -> &AmbientModel {
        &self.model
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    pub fn is_closed(&self) -> bool {
        self.closure != Closure::Open
    }

    pub fn length(&self) -> f64 {
        let last = self.segments.last().expect("non-empty");
        last.s0 + last.len
    }

    fn locate(&self, s: f64) -> (&Segment, f64) {
        let s = s.clamp(0.0, self.length());
        let idx = self.segments.partition_point(|seg| seg.s0 <= s).saturating_sub(1);
        let seg = &self.segments[idx];
        (seg, s - seg.s0)
    }

    /// `(ρ, t, θ)` at arclength `s`.
    pub fn state(&self, s: f64) -> [f64; 3] {
        let (seg, tau) = self.locate(s);
        seg.eval(tau)
    }

    /// Taylor polynomials of `ρ` and `t` about `s`, truncated to `deg`.
    pub fn local_series(&self, s: f64, deg: usize) -> (Series, Series) {
        let (seg, tau) = self.locate(s);
        (seg.rho.shift(tau).truncated(deg), seg.t.shift(tau).truncated(deg))
    }

    /// `(s, ρ, t, θ)` at every segment start plus the end point.
    pub fn samples(&self) -> Vec<[f64; 4]> {
        let mut out: Vec<[f64; 4]> = self
            .segments
            .iter()
            .map(|seg| {
                let [r, t, th] = seg.eval(0.0);
                [seg.s0, r, t, th]
            })
            .collect();
        let last = self.segments.last().expect("non-empty");
        let [r, t, th] = last.eval(last.len);
        out.push([last.s0 + last.len, r, t, th]);
        out
    }

    /// Largest `|t|` over the samples and quadrature-scale interior points.
    pub fn max_abs_height(&self) -> f64 {
        let mut m: f64 = 0.0;
        for seg in &self.segments {
            for i in 0..=4 {
                m = m.max(seg.t.eval(seg.len * i as f64 / 4.0).abs());
            }
        }
        m
    }

    /// Local geometry at arclength `s`.
    pub fn jets(&self, s: f64) -> Result<ProfileJets> {
        let (rho, t) = self.local_series(s, 4);
        ProfileJets::new(&self.model, rho, t)
    }

    /// The same curve with `t` replaced by `t + ε sin²(πs/L)`, smooth through both poles.
    pub fn with_height_perturbation(&self, eps: f64) -> ProfileCurve {
        let w = 2.0 * PI / self.length();
        let mut out = self.clone();
        for seg in &mut out.segments {
            let deg = seg.t.deg();
            let mut fact = 1.0;
            for k in 0..=deg {
                if k > 0 {
                    fact *= k as f64;
                }
                let mut c = -0.5 * eps * w.powi(k as i32) * (w * seg.s0 + k as f64 * PI / 2.0).cos() / fact;
                if k == 0 {
                    c += 0.5 * eps;
                }
                seg.t.set_coeff(k, seg.t.coeff(k) + c);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ProfileFile {
            model: self.model.to_string(),
            n: self.model.n,
            a: self.model.a,
            step: self.step,
            closed: self.is_closed(),
            closure: self.closure,
            samples: self.samples(),
            segments: self
                .segments
                .iter()
                .map(|seg| SegmentRecord {
                    s0: seg.s0,
                    len: seg.len,
                    rho: seg.rho.coeffs().to_vec(),
                    t: seg.t.coeffs().to_vec(),
                    theta: seg.theta.coeffs().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let file: ProfileFile =
            serde_json::from_str(src).map_err(|e| Error::Parse(format!("profile file: {e}")))?;
        let model: AmbientModel = file.model.parse()?;
        if !model.is_cylinder() || model.n != file.n || (model.a - file.a).abs() > 1e-12 * file.a.abs().max(1.0) {
            return Err(Error::Parse(format!(
                "profile header mismatch: model {} with n = {}, a = {}",
                file.model, file.n, file.a
            )));
        }
        if file.closed != (file.closure != Closure::Open) {
            return Err(Error::Parse("profile 'closed' flag disagrees with 'closure'".into()));
        }
        let mut segments = Vec::with_capacity(file.segments.len());
        let mut expect = 0.0;
        for (i, rec) in file.segments.iter().enumerate() {
            let series = |c: &Vec<f64>, name: &str| -> Result<Series> {
                if c.is_empty() || c.len() > SERIES_CAP || c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parse(format!("segment {i}: bad {name} coefficients")));
                }
                Ok(Series::from_coeffs(c))
            };
            if !(rec.len > 0.0) || (rec.s0 - expect).abs() > 1e-9 * (1.0 + expect) {
                return Err(Error::Parse(format!("segment {i} is not contiguous")));
            }
            expect = rec.s0 + rec.len;
            let (rho, t, theta) = (series(&rec.rho, "rho")?, series(&rec.t, "t")?, series(&rec.theta, "theta")?);
            if rho.deg() < 4 || t.deg() < 4 {
                return Err(Error::Parse(format!("segment {i}: dense output below degree 4")));
            }
            segments.push(Segment { s0: rec.s0, len: rec.len, rho, t, theta });
        }
        if segments.is_empty() {
            return Err(Error::Parse("profile file has no segments".into()));
        }
        Self::from_segments(model, file.step, segments, file.closure)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&src)
    }
}

#[derive(Serialize, Deserialize)]
struct SegmentRecord {
    s0: f64,
    len: f64,
    rho: Vec<f64>,
    t: Vec<f64>,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    model: String,
    n: usize,
    a: f64,
    step: f64,
    closed: bool,
    closure: Closure,
    samples: Vec<[f64; 4]>,
    segments: Vec<SegmentRecord>,
}

/// Second-order Taylor data of the rotational geometry about one point
/// of the profile, as series in the curve parameter.
#[derive(Debug, Clone)]
pub struct ProfileJets {
    pub n: usize,
    pub rho: Series,
    pub t: Series,
    pub speed: Series,
    pub alpha: Series,
    pub kappa1: Series,
    pub kappa2: Series,
    pub h: Series,
    pub a2: Series,
    pub f: Series,
    /// Orbit radius `a sin(ρ/a)`.
    pub radius: Series,
    /// `e^{−f} R^{n−1}`.
    pub density: Series,
    /// `H − f′(t) α`.
    pub hf: Series,
}

impl ProfileJets {
    /// From degree-4 polynomials of `ρ` and `t` in the curve parameter.
    pub fn new(model: &AmbientModel, rho4: Series, t4: Series) -> Result<Self> {
        let a = model.a;
        let n1 = model.n as f64 - 1.0;
        let k = model.height_coefficient();
        let d1 = |p: &Series| p.derivative();
        let (r1, t1) = (d1(&rho4).truncated(2), d1(&t4).truncated(2));
        let (r2, t2) = (d1(&d1(&rho4)).truncated(2), d1(&d1(&t4)).truncated(2));
        let rho = rho4.truncated(2);
        let t = t4.truncated(2);
        let speed = (r1 * r1 + t1 * t1).sqrt()?;
        let alpha = r1.checked_div(&speed)?;
        let (sr, cr) = (rho / a).sin_cos();
        let cot = cr.checked_div(&sr)?;
        let kappa1 = -(r1 * t2 - t1 * r2).checked_div(&(speed * speed * speed))?;
        let kappa2 = -(t1.checked_div(&speed)? * cot) / a;
        let h = kappa1 + kappa2 * n1;
        let a2 = kappa1 * kappa1 + kappa2 * kappa2 * n1;
        let f = t * t * k;
        let radius = sr * a;
        let density = (-f).exp() * radius.powf(n1)?;
        let hf = h - t * (2.0 * k) * alpha;
        Ok(ProfileJets { n: model.n, rho, t, speed, alpha, kappa1, kappa2, h, a2, f, radius, density, hf })
    }

    /// Arclength derivative of a series at the base point.
    pub fn ds(&self, u: &Series) -> f64 {
        u.coeff(1) / self.speed.value()
    }

    /// `|∇u|²` for a rotationally invariant `u`.
    pub fn grad2(&self, u: &Series) -> f64 {
        self.ds(u).powi(2)
    }

    /// `Δ_f u = (w v)^{-1} (w u′ / v)′` with `w = e^{−f} R^{n−1}`.
    pub fn weighted_laplacian(&self, u: &Series) -> Result<f64> {
        let cut = |p: &Series| p.truncated(1);
        let inner = (cut(&self.density) * u.derivative()).checked_div(&cut(&self.speed))?;
        Ok(inner.coeff(1) / (self.density.value() * self.speed.value()))
    }

    /// `|∇A|²` from the principal curvatures and the orbit connection.
    pub fn nabla_a2(&self) -> Result<f64> {
        let n1 = self.n as f64 - 1.0;
        let k1 = self.ds(&self.kappa1);
        let k2 = self.ds(&self.kappa2);
        let gamma = self.ds(&self.radius) / self.radius.value();
        let gap = self.kappa1.value() - self.kappa2.value();
        Ok(k1 * k1 + n1 * (k2 * k2 + 2.0 * gamma * gamma * gap * gap))
    }

    /// A rotationally invariant scalar field as a series.
    pub fn field(&self, field: &ScalarField) -> Result<Series> {
        Ok(match field {
            ScalarField::HeightT => self.t,
            ScalarField::Alpha => self.alpha,
            ScalarField::H => self.h,
            ScalarField::HSquared => self.h * self.h,
            ScalarField::A2 => self.a2,
            ScalarField::AlphaSquared => self.alpha * self.alpha,
            ScalarField::FRestricted => self.f,
            ScalarField::Constant(c) => self.t.lift(*c),
            ScalarField::NormalDot(_) => {
                return Err(Error::Argument(format!("{field} is not defined on profile curves")));
            }
            ScalarField::Custom(e) => {
                let lookup = |name: &str| -> Option<Series> {
                    Some(match name {
                        "t" => self.t,
                        "f" => self.f,
                        "alpha" => self.alpha,
                        "H" => self.h,
                        "A2" => self.a2,
                        "rho" => self.rho,
                        _ => return None,
                    })
                };
                e.eval(&self.t, &lookup)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> AmbientModel {
        AmbientModel::cylinder(3).unwrap()
    }

    #[test]
    fn slice_from_axis_is_exact() {
        for n in 2..=4 {
            let m = AmbientModel::cylinder(n).unwrap();
            let p = integrate_profile(&m, ProfileState::axis(0.0), 1e-3 * m.a, PI * m.a).unwrap();
            assert_eq!(p.max_abs_height(), 0.0);
            assert!(p.length() > PI * m.a - 0.01 * m.a);
            for s in [0.3, 1.0, 2.0] {
                let j = p.jets(s).unwrap();
                assert!(j.hf.value().abs() < 1e-12);
                assert!((j.alpha.value() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn arclength_is_preserved() {
        let m = sample_model();
        let p = integrate_profile(&m, ProfileState { rho: 1.0, t: 0.4, theta: 0.3 }, 1e-3 * m.a, 1.5).unwrap();
        for s in [0.0, 0.37, 0.9, 1.4999] {
            let j = p.jets(s).unwrap();
            assert!((j.speed.value() - 1.0).abs() < 1e-10);
            assert!(j.hf.value().abs() < 1e-9, "H_f = {}", j.hf.value());
        }
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let m = sample_model();
        let init = ProfileState { rho: 0.8, t: 0.6, theta: 0.5 };
        // compare RK4 nodes, not dense output
        let node = |h: f64| {
            let p = integrate_profile(&m, init, h, 2.0).unwrap();
            let hit = p.samples().into_iter().find(|x| (x[0] - 1.95).abs() < 1e-9).unwrap();
            [hit[1], hit[2], hit[3]]
        };
        let (y1, y2, y3) = (node(0.05), node(0.025), node(0.0125));
        let e1 = (0..3).map(|i| (y1[i] - y2[i]).abs()).fold(0.0, f64::max);
        let e2 = (0..3).map(|i| (y2[i] - y3[i]).abs()).fold(0.0, f64::max);
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn json_roundtrip() {
        let m = sample_model();
        let p = integrate_profile(&m, ProfileState::axis(0.3), 2e-3 * m.a, 0.5).unwrap();
        let q = ProfileCurve::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(q.segments(), p.segments());
        assert_eq!(q.model(), p.model());
        assert!(ProfileCurve::from_json("{}").is_err());
    }

    #[test]
    fn reflection_keeps_polynomials_consistent() {
        let m = sample_model();
        let raw = integrate_raw(&m, ProfileState::axis(0.0), 1e-2, 10.0, true).unwrap();
        assert!(raw.hit_equator);
        let p = ProfileCurve::close_by_reflection(m, 1e-2, raw.segments, Closure::Mirror).unwrap();
        assert!((p.length() - PI * m.a).abs() < 1e-12);
        let [r, t, th] = p.state(p.length());
        assert!((r - PI * m.a).abs() < 1e-12 && t == 0.0 && th == 0.0);
        let [r, _, _] = p.state(0.75 * p.length());
        assert!((r - 0.75 * PI * m.a).abs() < 1e-12);
    }
}
