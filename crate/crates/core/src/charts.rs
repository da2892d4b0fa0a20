//! Built-in exact charts and the chart registry.

use std::f64::consts::PI;
use std::path::Path;

use crate::ambient::AmbientModel;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hypersurface::ImmersionChart;
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Margin keeping hyperspherical polar angles away from the poles.
const POLE_MARGIN: f64 = 0.15;

/// `r · ω(u)` for hyperspherical angles `u` on `S^m`, `m = u.len()`.
pub fn sphere_point<S: Scalar>(angles: &[S], radius: f64) -> Vec<S> {
    let m = angles.len();
    let mut out = Vec::with_capacity(m + 1);
    let mut prefix = angles[0].lift(radius);
    for u in angles {
        out.push(prefix.clone() * u.cos());
        prefix = prefix * u.sin();
    }
    out.push(prefix);
    out
}

/// Domain of the hyperspherical angles of `S^m`.
pub fn sphere_domain(m: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(POLE_MARGIN, PI - POLE_MARGIN); m.saturating_sub(1)];
    d.push((0.0, 2.0 * PI));
    d
}

fn value_of(x: &[f64], range: std::ops::Range<usize>) -> Vec<f64> {
    let mut v = vec![0.0; x.len()];
    v[range.clone()].copy_from_slice(&x[range]);
    v
}

/// The horizontal sphere `S^n(a) × {height}` in the cylinder.
#[derive(Debug, Clone)]
pub struct Slice {
    model: AmbientModel,
    height: f64,
}

impl Slice {
    pub fn new(model: AmbientModel, height: f64) -> Result<Self> {
        require_cylinder(&model, "slice")?;
        Ok(Slice { model, height })
    }
}

impl ImmersionChart for Slice {
    fn model(&self) -> &AmbientModel {
        &self.model
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        sphere_domain(self.model.n)
    }
    fn label(&self) -> String {
        if self.height == 0.0 {
            "slice".into()
        } else {
            format!("slice:{}", self.height)
        }
    }
    fn map(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let mut x = sphere_point(u, self.model.a);
        x.push(u[0].lift(self.height));
        Ok(x)
    }
    fn orientation(&self, _u: &[f64], _x: &[f64]) -> Vec<f64> {
        self.model.parallel_field()
    }
}

/// The equatorial `S^{n−1}(a) × ℝ = {x_0 = 0}` in the cylinder.
#[derive(Debug, Clone)]
pub struct EquatorCylinder {
    model: AmbientModel,
}

impl EquatorCylinder {
    pub fn new(model: AmbientModel) -> Result<Self> {
        require_cylinder(&model, "equator-cylinder")?;
        Ok(EquatorCylinder { model })
    }
}

impl ImmersionChart for EquatorCylinder {
    fn model(&self) -> &AmbientModel {
        &self.model
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        let mut d = sphere_domain(self.model.n - 1);
        d.push((-3.0, 3.0));
        d
    }
    fn label(&self) -> String {
        "equator-cylinder".into()
    }
    fn map(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.model.n;
        let mut x = vec![u[0].lift(0.0)];
        x.extend(sphere_point(&u[..n - 1], self.model.a));
        x.push(u[n - 1]);
        Ok(x)
    }
    fn orientation(&self, _u: &[f64], x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; x.len()];
        v[0] = 1.0;
        v
    }
}

/// The round sphere `S^n(√(2n))` in Gaussian space, outward normal.
#[derive(Debug, Clone)]
pub struct ShrinkerSphere {
    model: AmbientModel,
}

impl ShrinkerSphere {
    pub fn new(model: AmbientModel) -> Result<Self> {
        require_gaussian(&model, "shrinker-sphere")?;
        Ok(ShrinkerSphere { model })
    }

    pub fn radius(&self) -> f64 {
        (2.0 * self.model.n as f64).sqrt()
    }
}

impl ImmersionChart for ShrinkerSphere {
    fn model(&self) -> &AmbientModel {
        &self.model
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        sphere_domain(self.model.n)
    }
    fn label(&self) -> String {
        "shrinker-sphere".into()
    }
    fn map(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        Ok(sphere_point(u, self.radius()))
    }
    fn orientation(&self, _u: &[f64], x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// The round cylinder `S^{n−1}(√(2(n−1))) × ℝ` in Gaussian space.
#[derive(Debug, Clone)]
pub struct ShrinkerCylinder {
    model: AmbientModel,
}

impl ShrinkerCylinder {
    pub fn new(model: AmbientModel) -> Result<Self> {
        require_gaussian(&model, "shrinker-cylinder")?;
        Ok(ShrinkerCylinder { model })
    }
}

impl ImmersionChart for ShrinkerCylinder {
    fn model(&self) -> &AmbientModel {
        &self.model
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        let mut d = sphere_domain(self.model.n - 1);
        d.push((-3.0, 3.0));
        d
    }
    fn label(&self) -> String {
        "shrinker-cylinder".into()
    }
    fn map(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.model.n;
        let r = (2.0 * (n as f64 - 1.0)).sqrt();
        let mut x = sphere_point(&u[..n - 1], r);
        x.push(u[n - 1]);
        Ok(x)
    }
    fn orientation(&self, _u: &[f64], x: &[f64]) -> Vec<f64> {
        value_of(x, 0..self.model.n)
    }
}

/// A graph `t = φ(x)` over the slice, `φ` an expression in the Cartesian
/// sphere coordinates `x0 … xn`.
#[derive(Debug, Clone)]
pub struct Graph {
    model: AmbientModel,
    phi: Expr,
    name: String,
}

impl Graph {
    pub fn new(model: AmbientModel, phi: Expr, name: impl Into<String>) -> Result<Self> {
        require_cylinder(&model, "graph")?;
        let allowed: Vec<String> = (0..=model.n).map(|i| format!("x{i}")).collect();
        if let Some(bad) = phi.variables().into_iter().find(|v| !allowed.contains(v)) {
            return Err(Error::Parse(format!(
                "graph function uses '{bad}'; allowed variables are x0..x{}",
                model.n
            )));
        }
        Ok(Graph {
            model,
            phi,
            name: name.into(),
        })
    }

    pub fn from_file(model: AmbientModel, path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Graph::new(model, Expr::parse(&src)?, format!("graph:{}", path.display()))
    }
}

impl ImmersionChart for Graph {
    fn model(&self) -> &AmbientModel {
        &self.model
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        sphere_domain(self.model.n)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
    fn map(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let mut x = sphere_point(u, self.model.a);
        let lookup = |v: &str| -> Option<Jet> {
            v.strip_prefix('x')
                .and_then(|i| i.parse::<usize>().ok())
                .and_then(|i| x.get(i).copied())
        };
        let t = self.phi.eval(&u[0], &lookup)?;
        x.push(t);
        Ok(x)
    }
    fn orientation(&self, _u: &[f64], _x: &[f64]) -> Vec<f64> {
        self.model.parallel_field()
    }
}

fn require_cylinder(model: &AmbientModel, what: &str) -> Result<()> {
    if model.is_cylinder() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{what} lives in the sphere cylinder, got {model}")))
    }
}

fn require_gaussian(model: &AmbientModel, what: &str) -> Result<()> {
    if model.is_gaussian() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{what} lives in Gaussian space, got {model}")))
    }
}

/// Names accepted by [`build_chart`].
pub const CHART_NAMES: [&str; 6] = [
    "slice",
    "equator-cylinder",
    "shrinker-sphere",
    "shrinker-cylinder",
    "graph:<file>",
    "profile:<file>",
];

/// The ambient model a built-in chart lives in, for dimension `n`.
pub fn default_model(name: &str, n: usize) -> Result<AmbientModel> {
    if name.starts_with("shrinker-") {
        AmbientModel::gaussian(n)
    } else {
        AmbientModel::cylinder(n)
    }
}

/// Resolves a chart name. `model` overrides the default ambient model for
/// charts that accept several.
pub fn build_chart(
    name: &str,
    n: usize,
    model: Option<AmbientModel>,
) -> Result<Box<dyn ImmersionChart>> {
    let model = match model {
        Some(m) => m,
        None => default_model(name, n)?,
    };
    if let Some(rest) = name.strip_prefix("graph:") {
        return Ok(Box::new(Graph::from_file(model, Path::new(rest))?));
    }
    if let Some(rest) = name.strip_prefix("profile:") {
        let profile = crate::rotsym::profile::ProfileCurve::load(Path::new(rest))?;
        let chart = crate::rotsym::chart::ProfileChart::new(profile)?.with_label(name);
        return Ok(Box::new(chart));
    }
    if let Some(h) = name.strip_prefix("slice:") {
        let h: f64 = h
            .parse()
            .map_err(|_| Error::Argument(format!("bad slice height in '{name}'")))?;
        return Ok(Box::new(Slice::new(model, h)?));
    }
    match name {
        "slice" => Ok(Box::new(Slice::new(model, 0.0)?)),
        "equator-cylinder" => Ok(Box::new(EquatorCylinder::new(model)?)),
        "shrinker-sphere" => Ok(Box::new(ShrinkerSphere::new(model)?)),
        "shrinker-cylinder" => Ok(Box::new(ShrinkerCylinder::new(model)?)),
        _ => Err(Error::Argument(format!(
            "unknown surface '{name}'; expected one of {}",
            CHART_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{codazzi_defect, evaluate_geometry, fminimality_residual, frame_defect};
    use crate::sampling::halton_points;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn slice_is_totally_geodesic() {
        for n in [2, 3, 4] {
            let chart = Slice::new(AmbientModel::cylinder(n).unwrap(), 0.0).unwrap();
            for u in halton_points(&chart.domain(), 20, 1) {
                let g = evaluate_geometry(&chart, &u).unwrap();
                assert!(g.a.iter().flatten().all(|v| v.abs() < 1e-12));
                assert!(g.mean_curvature.abs() < 1e-12);
                assert!(g.weighted_mean_curvature.abs() < 1e-12);
                assert_close(g.alpha, 1.0, 1e-12);
                assert!(g.a2.abs() < 1e-12);
                assert!(frame_defect(&g) < 1e-12);
            }
        }
    }

    #[test]
    fn translated_slice_is_not_f_minimal() {
        let chart = Slice::new(AmbientModel::cylinder(2).unwrap(), 1.0).unwrap();
        let r = fminimality_residual(&chart, &[1.0, 2.0]).unwrap();
        assert_close(r, 0.5, 1e-12);
    }

    #[test]
    fn equator_cylinder() {
        for n in [2, 3] {
            let chart = EquatorCylinder::new(AmbientModel::cylinder(n).unwrap()).unwrap();
            for u in halton_points(&chart.domain(), 20, 2) {
                let g = evaluate_geometry(&chart, &u).unwrap();
                assert!(g.a.iter().flatten().all(|v| v.abs() < 1e-12));
                assert!(g.weighted_mean_curvature.abs() < 1e-12);
                assert!(g.alpha.abs() < 1e-12);
                let gt = g.grad_t.unwrap();
                assert_close(gt.iter().map(|v| v * v).sum::<f64>(), 1.0, 1e-12);
            }
        }
    }

    #[test]
    fn shrinker_sphere() {
        for n in [2, 3, 4] {
            let chart = ShrinkerSphere::new(AmbientModel::gaussian(n).unwrap()).unwrap();
            let r = (2.0 * n as f64).sqrt();
            for u in halton_points(&chart.domain(), 20, 3) {
                let g = evaluate_geometry(&chart, &u).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { 1.0 / r } else { 0.0 };
                        assert_close(g.a[i][j], expect, 1e-12);
                    }
                }
                assert_close(g.mean_curvature, (n as f64 / 2.0).sqrt(), 1e-12);
                assert!(g.weighted_mean_curvature.abs() < 1e-12);
                assert_close(g.a2, 0.5, 1e-12);
                assert!(g.nabla_a_norm2() < 1e-20);
            }
        }
    }

    #[test]
    fn shrinker_cylinder() {
        let chart = ShrinkerCylinder::new(AmbientModel::gaussian(2).unwrap()).unwrap();
        for u in halton_points(&chart.domain(), 20, 4) {
            let g = evaluate_geometry(&chart, &u).unwrap();
            assert_close(g.mean_curvature, 1.0 / 2f64.sqrt(), 1e-12);
            assert!(fminimality_residual(&chart, &u).unwrap() < 1e-12);
            assert_close(g.a2, 0.5, 1e-12);
        }
    }

    #[test]
    fn graph_geometry_is_consistent() {
        let model = AmbientModel::cylinder(2).unwrap();
        let phi = Expr::parse("0.3 * x0 * x1 + 0.2 * sin(x2)").unwrap();
        let chart = Graph::new(model, phi, "graph:test").unwrap();
        for u in halton_points(&chart.domain(), 50, 5) {
            let g = evaluate_geometry(&chart, &u).unwrap();
            assert!(codazzi_defect(&model, &g) < 1e-9, "{}", codazzi_defect(&model, &g));
            assert!(frame_defect(&g) < 1e-12);
            let gt = g.grad_t.unwrap();
            let ht: f64 = gt.iter().map(|v| v * v).sum();
            assert_close(ht + g.alpha * g.alpha, 1.0, 1e-10);
            let tr: f64 = (0..2).map(|i| g.a[i][i]).sum();
            assert_close(tr, g.mean_curvature, 1e-12);
            assert!((g.a[0][1] - g.a[1][0]).abs() < 1e-10);
        }
        assert!(Graph::new(model, Expr::parse("t").unwrap(), "bad").is_err());
    }

    #[test]
    fn registry() {
        assert!(build_chart("slice", 2, None).is_ok());
        assert!(build_chart("slice:1.5", 3, None).is_ok());
        assert!(build_chart("shrinker-sphere", 3, None).is_ok());
        assert!(matches!(build_chart("torus", 2, None), Err(Error::Argument(_))));
        assert!(matches!(
            build_chart("slice", 2, Some(AmbientModel::gaussian(2).unwrap())),
            Err(Error::Argument(_))
        ));
    }
}
