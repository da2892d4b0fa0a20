//! Weighted Laplacian `Δ_f u = Δu − ⟨∇f, ∇u⟩` and the stability operator
//! `L_f = Δ_f + |A|² + Ric_f(ν, ν)` on scalar fields over a chart.
//!
//! A field is evaluated as a jet in the chart variables. Fields built from
//! curvature (H, |A|²) come out of the same jet pipeline as the geometry,
//! two orders below the chart jets, so `Δ_f` needs chart jets of order 4.

use std::fmt;
use std::str::FromStr;

use crate::ambient::AmbientModel;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hypersurface::{ChartJets, GeometryAtPoint, ImmersionChart, FULL_ORDER};
use crate::jet::Jet;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    HeightT,
    Alpha,
    H,
    HSquared,
    A2,
    AlphaSquared,
    FRestricted,
    Constant(f64),
    /// `⟨V, ν⟩` for a constant flat vector `V`.
    NormalDot(Vec<f64>),
    /// Expression in `x0…`, `t`, `f`, `alpha`, `H`, `A2`.
    Custom(Expr),
}

/// How many derivatives of the immersion a named quantity consumes.
fn variable_depth(name: &str) -> Option<usize> {
    match name {
        "t" | "f" => Some(0),
        "alpha" => Some(1),
        "H" | "A2" => Some(2),
        _ => name
            .strip_prefix('x')
            .and_then(|i| i.parse::<usize>().ok())
            .map(|_| 0),
    }
}

impl ScalarField {
    /// Number of chart-jet orders lost when building the field.
    pub fn depth(&self) -> usize {
        match self {
            ScalarField::HeightT | ScalarField::FRestricted | ScalarField::Constant(_) => 0,
            ScalarField::Alpha | ScalarField::AlphaSquared | ScalarField::NormalDot(_) => 1,
            ScalarField::H | ScalarField::HSquared | ScalarField::A2 => 2,
            ScalarField::Custom(e) => e
                .variables()
                .iter()
                .filter_map(|v| variable_depth(v))
                .max()
                .unwrap_or(0),
        }
    }

    /// The field as a jet of order `jets.order − depth`.
    pub fn evaluate(&self, jets: &ChartJets) -> Result<Jet> {
        let order = jets
            .order
            .checked_sub(self.depth())
            .ok_or_else(|| Error::Capability(format!("jet order {} too low for {self}", jets.order)))?;
        let cut = |j: &Jet| j.truncate(order);
        Ok(match self {
            ScalarField::HeightT => cut(jets.height.as_ref().ok_or_else(|| {
                Error::Argument("the height field needs the sphere cylinder".into())
            })?),
            ScalarField::FRestricted => cut(&jets.weight),
            ScalarField::Constant(c) => jets.weight.truncate(order).lift(*c),
            ScalarField::Alpha => cut(&jets.alpha),
            ScalarField::AlphaSquared => cut(&jets.alpha).square(),
            ScalarField::NormalDot(v) => {
                if v.len() != jets.normal.len() {
                    return Err(Error::Argument(format!(
                        "vector has {} components, ambient has {}",
                        v.len(),
                        jets.normal.len()
                    )));
                }
                let nu: Vec<Jet> = jets.normal.iter().map(cut).collect();
                let vv: Vec<Jet> = v.iter().map(|c| nu[0].lift(*c)).collect();
                dot(&nu, &vv)
            }
            ScalarField::H => cut(&jets.mean_curvature),
            ScalarField::HSquared => cut(&jets.mean_curvature).square(),
            ScalarField::A2 => cut(&jets.a2),
            ScalarField::Custom(e) => {
                let like = jets.weight.truncate(order);
                let lookup = |name: &str| -> Option<Jet> {
                    Some(match name {
                        "t" => cut(jets.height.as_ref()?),
                        "f" => cut(&jets.weight),
                        "alpha" => cut(&jets.alpha),
                        "H" => cut(&jets.mean_curvature),
                        "A2" => cut(&jets.a2),
                        _ => cut(jets.x.get(name.strip_prefix('x')?.parse::<usize>().ok()?)?),
                    })
                };
                e.eval(&like, &lookup)?
            }
        })
    }
}

impl FromStr for ScalarField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "height_t" | "t" => ScalarField::HeightT,
            "alpha" => ScalarField::Alpha,
            "H" => ScalarField::H,
            "H_squared" => ScalarField::HSquared,
            "A2" => ScalarField::A2,
            "alpha_squared" => ScalarField::AlphaSquared,
            "f_restricted" | "f" => ScalarField::FRestricted,
            _ => {
                if let Some(c) = s.strip_prefix("const:") {
                    ScalarField::Constant(
                        c.parse()
                            .map_err(|_| Error::Argument(format!("bad constant '{c}'")))?,
                    )
                } else if let Some(src) = s.strip_prefix("expr:") {
                    let e = Expr::parse(src)?;
                    if let Some(bad) = e.variables().into_iter().find(|v| variable_depth(v).is_none()) {
                        return Err(Error::Parse(format!("unknown field variable '{bad}'")));
                    }
                    ScalarField::Custom(e)
                } else {
                    return Err(Error::Argument(format!("unknown scalar field '{s}'")));
                }
            }
        })
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::HeightT => write!(f, "height_t"),
            ScalarField::Alpha => write!(f, "alpha"),
            ScalarField::H => write!(f, "H"),
            ScalarField::HSquared => write!(f, "H_squared"),
            ScalarField::A2 => write!(f, "A2"),
            ScalarField::AlphaSquared => write!(f, "alpha_squared"),
            ScalarField::FRestricted => write!(f, "f_restricted"),
            ScalarField::Constant(c) => write!(f, "const:{c}"),
            ScalarField::NormalDot(v) => write!(f, "normal_dot:{v:?}"),
            ScalarField::Custom(e) => write!(f, "expr:{e}"),
        }
    }
}

/// Chart jets plus the value-level package at one point.
#[derive(Debug, Clone)]
pub struct PointContext {
    pub model: AmbientModel,
    pub jets: ChartJets,
    pub geometry: GeometryAtPoint,
}

impl PointContext {
    pub fn new(chart: &dyn ImmersionChart, u: &[f64]) -> Result<Self> {
        Self::with_order(chart, u, FULL_ORDER)
    }

    pub fn with_order(chart: &dyn ImmersionChart, u: &[f64], order: usize) -> Result<Self> {
        let jets = ChartJets::new(chart, u, order)?;
        let geometry = jets.geometry(chart.model())?;
        Ok(PointContext {
            model: *chart.model(),
            jets,
            geometry,
        })
    }

    pub fn field(&self, field: &ScalarField) -> Result<Jet> {
        field.evaluate(&self.jets)
    }

    /// Gradient of a scalar jet in the orthonormal tangent frame.
    pub fn gradient(&self, u: &Jet) -> Result<Vec<f64>> {
        if u.order() < 1 {
            return Err(Error::Capability("gradient needs a jet of order ≥ 1".into()));
        }
        Ok(self.geometry.frame_gradient(&u.gradient()))
    }

    /// `⟨∇u, ∇v⟩`.
    pub fn grad_dot(&self, u: &Jet, v: &Jet) -> Result<f64> {
        Ok(dot(&self.gradient(u)?, &self.gradient(v)?))
    }

    /// Laplace–Beltrami operator of the induced metric.
    pub fn laplacian(&self, u: &Jet) -> Result<f64> {
        if u.order() < 2 {
            return Err(Error::Capability(format!(
                "the Laplacian needs a field jet of order ≥ 2, got {}",
                u.order()
            )));
        }
        let g = &self.geometry;
        let n = g.metric.len();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut v = u.d2(a, b);
                for c in 0..n {
                    v -= g.christoffel[c][a][b] * u.d1(c);
                }
                s += g.metric_inv[a][b] * v;
            }
        }
        Ok(s)
    }

    /// `Δ_f u`.
    pub fn weighted_laplacian(&self, u: &Jet) -> Result<f64> {
        let lap = self.laplacian(u)?;
        let g = &self.geometry;
        let n = g.metric.len();
        let f = &self.jets.weight;
        let mut drift = 0.0;
        for a in 0..n {
            for b in 0..n {
                drift += g.metric_inv[a][b] * f.d1(a) * u.d1(b);
            }
        }
        Ok(lap - drift)
    }

    /// `Ric_f(ν, ν)`.
    pub fn ric_f_nn(&self) -> f64 {
        self.model.bakry_emery(&self.geometry.normal, &self.geometry.normal)
    }

    /// `L_f u`.
    pub fn lf(&self, u: &Jet) -> Result<f64> {
        Ok(self.weighted_laplacian(u)? + (self.geometry.a2 + self.ric_f_nn()) * u.value())
    }
}

/// `Δ_f` of a field at chart point `u`.
pub fn weighted_laplacian(chart: &dyn ImmersionChart, field: &ScalarField, u: &[f64]) -> Result<f64> {
    weighted_laplacian_at_order(chart, field, u, FULL_ORDER)
}

/// As [`weighted_laplacian`] with an explicit chart jet order.
pub fn weighted_laplacian_at_order(
    chart: &dyn ImmersionChart,
    field: &ScalarField,
    u: &[f64],
    order: usize,
) -> Result<f64> {
    if order < field.depth() + 2 {
        return Err(Error::Capability(format!(
            "Δ_f of {field} needs chart jets of order {}, got {order}",
            field.depth() + 2
        )));
    }
    let ctx = PointContext::with_order(chart, u, order.max(3))?;
    ctx.weighted_laplacian(&ctx.field(field)?)
}

/// `L_f` of a field at chart point `u`.
pub fn lf_apply(chart: &dyn ImmersionChart, field: &ScalarField, u: &[f64]) -> Result<f64> {
    let ctx = PointContext::new(chart, u)?;
    ctx.lf(&ctx.field(field)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{EquatorCylinder, Graph, ShrinkerSphere, Slice};
    use crate::hypersurface::ImmersionChart;
    use crate::sampling::halton_points;

    fn cyl(n: usize) -> AmbientModel {
        AmbientModel::cylinder(n).unwrap()
    }

    #[test]
    fn field_names_round_trip() {
        for name in ["height_t", "alpha", "H", "H_squared", "A2", "alpha_squared", "f_restricted"] {
            let f: ScalarField = name.parse().unwrap();
            assert_eq!(f.to_string(), name);
        }
        assert_eq!("const:2.5".parse::<ScalarField>().unwrap(), ScalarField::Constant(2.5));
        assert_eq!("expr:H * alpha".parse::<ScalarField>().unwrap().depth(), 2);
        assert!("expr:y".parse::<ScalarField>().is_err());
        assert!("curvature".parse::<ScalarField>().is_err());
    }

    #[test]
    fn laplacian_examples() {
        let slice = Slice::new(cyl(2), 0.0).unwrap();
        let eq = EquatorCylinder::new(cyl(2)).unwrap();
        let u = [1.1, 0.7];
        let one = ScalarField::Constant(1.0);
        assert!(weighted_laplacian(&slice, &one, &u).unwrap().abs() < 1e-14);
        assert!(weighted_laplacian(&slice, &ScalarField::FRestricted, &u).unwrap().abs() < 1e-14);
        let v = weighted_laplacian(&eq, &ScalarField::FRestricted, &[0.4, 2.0]).unwrap();
        assert!((v + 0.5).abs() < 1e-12, "{v}");
        assert!((lf_apply(&slice, &one, &u).unwrap() - 0.5).abs() < 1e-14);
        assert!((lf_apply(&slice, &ScalarField::Alpha, &u).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_dot_on_shrinker_sphere() {
        let chart = ShrinkerSphere::new(AmbientModel::gaussian(3).unwrap()).unwrap();
        let v = ScalarField::NormalDot(vec![0.3, -1.0, 2.0, 0.5]);
        for u in halton_points(&chart.domain(), 10, 3) {
            let ctx = PointContext::new(&chart, &u).unwrap();
            let j = ctx.field(&v).unwrap();
            assert!((ctx.lf(&j).unwrap() - 0.5 * j.value()).abs() < 1e-11);
        }
    }

    #[test]
    fn insufficient_order_is_a_capability_error() {
        let slice = Slice::new(cyl(2), 0.0).unwrap();
        let r = weighted_laplacian_at_order(&slice, &ScalarField::A2, &[1.0, 1.0], 3);
        assert!(matches!(r, Err(Error::Capability(_))));
        assert!(weighted_laplacian_at_order(&slice, &ScalarField::Alpha, &[1.0, 1.0], 3).is_ok());
        assert!(weighted_laplacian_at_order(&slice, &ScalarField::HeightT, &[1.0, 1.0], 2).is_ok());
    }

    #[test]
    fn linearity_and_product_rule() {
        let model = cyl(3);
        let phi = Expr::parse("0.2 * x0 * x1 + 0.1 * x3 * x3").unwrap();
        let chart = Graph::new(model, phi, "graph").unwrap();
        let u_field: ScalarField = "expr:sin(x0) + t * x2".parse().unwrap();
        let v_field = ScalarField::Alpha;
        for u in halton_points(&chart.domain(), 10, 8) {
            let ctx = PointContext::new(&chart, &u).unwrap();
            let p = ctx.field(&u_field).unwrap().truncate(3);
            let q = ctx.field(&v_field).unwrap();
            let comb = p * 2.0 - q * 3.0;
            let lhs = ctx.weighted_laplacian(&comb).unwrap();
            let rhs = 2.0 * ctx.weighted_laplacian(&p).unwrap() - 3.0 * ctx.weighted_laplacian(&q).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
            let sq = 0.5 * ctx.weighted_laplacian(&(q * q)).unwrap();
            let expect = ctx.grad_dot(&q, &q).unwrap() + q.value() * ctx.weighted_laplacian(&q).unwrap();
            assert!((sq - expect).abs() < 1e-8);
        }
    }
}
