//! The two weighted ambient spaces: Gaussian space `(ℝ^{n+1}, |x|²/4)` and
//! the sphere cylinder `S^n(a) × ℝ` with a quadratic height weight.
//!
//! Points and vectors of the cylinder are stored extrinsically in
//! `ℝ^{n+1} × ℝ`, the last coordinate being the height `t`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    GaussianSpace,
    SphereCylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientModel {
    pub kind: ModelKind,
    /// Hypersurface dimension.
    pub n: usize,
    /// Sphere radius (cylinder only, 0 for Gaussian space).
    pub a: f64,
    /// `C` with `Ric_f = C ḡ`.
    pub soliton_constant: f64,
}

/// `f`, `∇̄f`, `∇̄²f`, `∇̄³f` in an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDerivatives {
    pub f: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
    pub third: Vec<Vec<Vec<f64>>>,
}

/// Orthonormal ambient frame in flat Cartesian components.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalFrame {
    vectors: Vec<Vec<f64>>,
}

impl OrthonormalFrame {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(u, v) - target).abs() > 1e-10 {
                    return Err(Error::Geometry(format!(
                        "frame is not orthonormal: <e{i}, e{j}> = {}",
                        dot(u, v)
                    )));
                }
            }
        }
        Ok(OrthonormalFrame { vectors })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl AmbientModel {
    pub fn gaussian(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(AmbientModel {
            kind: ModelKind::GaussianSpace,
            n,
            a: 0.0,
            soliton_constant: 0.5,
        })
    }

    /// The cylinder soliton `S^n(√(2(n−1))) × ℝ` with `f = t²/4`.
    pub fn cylinder(n: usize) -> Result<Self> {
        let mut m = Self::cylinder_with_radius(n, (2.0 * (n as f64 - 1.0)).sqrt())?;
        m.soliton_constant = 0.5;
        Ok(m)
    }

    /// `S^n(a) × ℝ` with `f = (n−1) t² / (2a²)`, a gradient soliton with
    /// `C = (n−1)/a²`.
    pub fn cylinder_with_radius(n: usize, a: f64) -> Result<Self> {
        check_dim(n)?;
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Argument(format!("sphere radius must be positive, got {a}")));
        }
        Ok(AmbientModel {
            kind: ModelKind::SphereCylinder,
            n,
            a,
            soliton_constant: (n as f64 - 1.0) / (a * a),
        })
    }

    pub fn is_cylinder(&self) -> bool {
        self.kind == ModelKind::SphereCylinder
    }

    pub fn is_gaussian(&self) -> bool {
        self.kind == ModelKind::GaussianSpace
    }

    /// True for the cylinder at radius `√(2(n−1))`.
    pub fn is_default_cylinder(&self) -> bool {
        self.is_cylinder() && (self.a * self.a - 2.0 * (self.n as f64 - 1.0)).abs() <= 1e-12 * self.a * self.a
    }

    /// Dimension of the flat space the model is embedded in.
    pub fn flat_dim(&self) -> usize {
        match self.kind {
            ModelKind::GaussianSpace => self.n + 1,
            ModelKind::SphereCylinder => self.n + 2,
        }
    }

    /// Coefficient `k` in the cylinder weight `f = k t²`.
    pub fn height_coefficient(&self) -> f64 {
        self.soliton_constant / 2.0
    }

    /// `f'(t)` for the cylinder weight.
    pub fn weight_slope(&self, t: f64) -> f64 {
        2.0 * self.height_coefficient() * t
    }

    /// The weight evaluated on Cartesian components of any scalar type.
    pub fn weight<S: Scalar>(&self, x: &[S]) -> S {
        match self.kind {
            ModelKind::GaussianSpace => dot(x, x) * 0.25,
            ModelKind::SphereCylinder => x[self.n + 1].square() * self.height_coefficient(),
        }
    }

    /// Ambient gradient of `f` in Cartesian components.
    pub fn weight_gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            ModelKind::GaussianSpace => x.iter().map(|v| v / 2.0).collect(),
            ModelKind::SphereCylinder => {
                let mut g = vec![0.0; self.flat_dim()];
                g[self.n + 1] = self.weight_slope(x[self.n + 1]);
                g
            }
        }
    }

    /// The distinguished parallel field: `∂_t` on the cylinder, `e_0` in
    /// Gaussian space.
    pub fn parallel_field(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.flat_dim()];
        match self.kind {
            ModelKind::GaussianSpace => v[0] = 1.0,
            ModelKind::SphereCylinder => v[self.n + 1] = 1.0,
        }
        v
    }

    /// Rejects points off the model.
    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.flat_dim() {
            return Err(Error::Geometry(format!(
                "point has {} components, expected {}",
                p.len(),
                self.flat_dim()
            )));
        }
        if self.is_cylinder() {
            let r = dot(&p[..=self.n], &p[..=self.n]).sqrt();
            if (r - self.a).abs() > 1e-12 * self.a {
                return Err(Error::Geometry(format!(
                    "point off the cylinder: |x| = {r}, radius {}",
                    self.a
                )));
            }
        }
        Ok(())
    }

    /// Outward unit normal of `S^n(a) × ℝ` inside the flat space; `None` for
    /// Gaussian space.
    pub fn constraint_normal<S: Scalar>(&self, x: &[S]) -> Option<Vec<S>> {
        match self.kind {
            ModelKind::GaussianSpace => None,
            ModelKind::SphereCylinder => {
                let mut v: Vec<S> = x.iter().map(|c| c.clone() / self.a).collect();
                v[self.n + 1] = x[0].lift(0.0);
                Some(v)
            }
        }
    }

    fn vertical(&self, v: &[f64]) -> f64 {
        match self.kind {
            ModelKind::GaussianSpace => 0.0,
            ModelKind::SphereCylinder => v[self.n + 1],
        }
    }

    /// `Ric(u, v)`.
    pub fn ricci(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.kind {
            ModelKind::GaussianSpace => 0.0,
            ModelKind::SphereCylinder => {
                (self.n as f64 - 1.0) / (self.a * self.a)
                    * (dot(u, v) - self.vertical(u) * self.vertical(v))
            }
        }
    }

    /// `∇̄²f(u, v)`.
    pub fn weight_hessian(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.kind {
            ModelKind::GaussianSpace => 0.5 * dot(u, v),
            ModelKind::SphereCylinder => {
                2.0 * self.height_coefficient() * self.vertical(u) * self.vertical(v)
            }
        }
    }

    /// `Ric_f(u, v) = Ric(u, v) + ∇̄²f(u, v)`.
    pub fn bakry_emery(&self, u: &[f64], v: &[f64]) -> f64 {
        self.ricci(u, v) + self.weight_hessian(u, v)
    }

    /// `R̄(u1, u2, u3, u4)` with the sign convention `R̄(e, e', e, e') = K(e, e')`.
    pub fn curvature_vectors(&self, u1: &[f64], u2: &[f64], u3: &[f64], u4: &[f64]) -> f64 {
        match self.kind {
            ModelKind::GaussianSpace => 0.0,
            ModelKind::SphereCylinder => {
                let t = |v: &[f64]| self.vertical(v);
                let h = |x: &[f64], y: &[f64]| dot(x, y) - t(x) * t(y);
                (h(u1, u3) * h(u2, u4) - h(u1, u4) * h(u2, u3)) / (self.a * self.a)
            }
        }
    }

    /// `R̄_{ijkl}` in an orthonormal frame, from the closed form in the
    /// vertical components `T_i = ⟨e_i, ∂_t⟩`.
    pub fn curvature(&self, frame: &OrthonormalFrame, i: usize, j: usize, k: usize, l: usize) -> f64 {
        match self.kind {
            ModelKind::GaussianSpace => 0.0,
            ModelKind::SphereCylinder => {
                let e = frame.vectors();
                let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
                let t: Vec<f64> = e.iter().map(|v| self.vertical(v)).collect();
                (d(i, k) * d(j, l) - d(i, l) * d(j, k) - t[j] * t[l] * d(i, k) - t[i] * t[k] * d(j, l)
                    + t[j] * t[k] * d(i, l)
                    + t[i] * t[l] * d(j, k))
                    / (self.a * self.a)
            }
        }
    }

    /// `R̄_{ijkl;m}`. Both models are symmetric spaces.
    pub fn curvature_derivative(&self, _frame: &OrthonormalFrame, _idx: [usize; 5]) -> f64 {
        0.0
    }

    /// `(Ric_f)_{ik}` in an orthonormal frame.
    pub fn bakry_emery_ricci(&self, frame: &OrthonormalFrame, i: usize, k: usize) -> f64 {
        let e = frame.vectors();
        self.bakry_emery(&e[i], &e[k])
    }

    /// `f` and its covariant derivatives in an orthonormal frame at `p`.
    pub fn weight_derivatives(&self, p: &[f64], frame: &OrthonormalFrame) -> Result<WeightDerivatives> {
        self.check_point(p)?;
        let e = frame.vectors();
        let grad_flat = self.weight_gradient(p);
        let m = e.len();
        Ok(WeightDerivatives {
            f: self.weight(p),
            grad: e.iter().map(|v| dot(v, &grad_flat)).collect(),
            hess: e
                .iter()
                .map(|u| e.iter().map(|v| self.weight_hessian(u, v)).collect())
                .collect(),
            third: vec![vec![vec![0.0; m]; m]; m],
        })
    }
}

fn check_dim(n: usize) -> Result<()> {
    if !(2..=4).contains(&n) {
        return Err(Error::Argument(format!(
            "hypersurface dimension must be between 2 and 4, got {n}"
        )));
    }
    Ok(())
}

impl FromStr for AmbientModel {
    type Err = Error;

    /// `gaussian:n`, `cylinder:n` or `cylinder:n:a`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse_n = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::Argument(format!("bad dimension '{p}' in model '{s}'")))
        };
        match parts.as_slice() {
            ["gaussian", n] => AmbientModel::gaussian(parse_n(n)?),
            ["cylinder", n] => AmbientModel::cylinder(parse_n(n)?),
            ["cylinder", n, a] => {
                let a: f64 = a
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad radius '{a}' in model '{s}'")))?;
                AmbientModel::cylinder_with_radius(parse_n(n)?, a)
            }
            _ => Err(Error::Argument(format!("unknown ambient model '{s}'"))),
        }
    }
}

impl fmt::Display for AmbientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModelKind::GaussianSpace => write!(f, "gaussian:{}", self.n),
            ModelKind::SphereCylinder if self.is_default_cylinder() => write!(f, "cylinder:{}", self.n),
            ModelKind::SphereCylinder => write!(f, "cylinder:{}:{}", self.n, self.a),
        }
    }
}

/// Gram–Schmidt on flat vectors; returns `None` if they are dependent.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                let c = dot(&w, e);
                w.iter_mut().zip(e).for_each(|(wi, ei)| *wi -= c * ei);
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm < 1e-12 {
            return None;
        }
        out.push(w.into_iter().map(|x| x / norm).collect());
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cylinder_frame(model: &AmbientModel, rng: &mut ChaCha8Rng) -> (Vec<f64>, OrthonormalFrame) {
        let n = model.n;
        let mut x: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|c| *c *= model.a / r);
        let mut p = x.clone();
        p.push(rng.gen_range(-3.0..3.0));
        let mut raw = vec![model.constraint_normal(&p).unwrap()];
        for _ in 0..=n {
            raw.push((0..n + 2).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        let e = gram_schmidt(&raw).unwrap();
        (p, OrthonormalFrame::new(e[1..].to_vec()).unwrap())
    }

    #[test]
    fn parse_models() {
        let g: AmbientModel = "gaussian:2".parse().unwrap();
        assert_eq!(g.soliton_constant, 0.5);
        let c: AmbientModel = "cylinder:3".parse().unwrap();
        assert!((c.a - 2.0).abs() < 1e-15);
        assert!((c.soliton_constant - 0.5).abs() < 1e-15);
        assert!(c.is_default_cylinder());
        let c2: AmbientModel = "cylinder:3:1.5".parse().unwrap();
        assert!((c2.soliton_constant - 2.0 / 2.25).abs() < 1e-15);
        assert_eq!(c2.to_string(), "cylinder:3:1.5");
        assert!("torus:2".parse::<AmbientModel>().is_err());
        assert!("gaussian:7".parse::<AmbientModel>().is_err());
    }

    #[test]
    fn gaussian_weight_derivatives() {
        let g = AmbientModel::gaussian(2).unwrap();
        let frame = OrthonormalFrame::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let w = g.weight_derivatives(&[2.0, 0.0, 0.0], &frame).unwrap();
        assert_eq!(w.f, 1.0);
        assert_eq!(w.grad, vec![1.0, 0.0, 0.0]);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(w.hess[i][k], if i == k { 0.5 } else { 0.0 });
                assert!(w.third[i][k].iter().all(|&v| v == 0.0));
            }
        }
        assert_eq!(g.curvature(&frame, 0, 1, 0, 1), 0.0);
        assert_eq!(g.bakry_emery_ricci(&frame, 1, 1), 0.5);
        assert_eq!(g.bakry_emery_ricci(&frame, 0, 2), 0.0);
    }

    #[test]
    fn cylinder_weight_derivatives() {
        let c = AmbientModel::cylinder(2).unwrap();
        let a = c.a;
        let p = [a, 0.0, 0.0, 3.0];
        // e0, e1 horizontal tangent to S²(a) at p, e2 = ∂_t
        let frame = OrthonormalFrame::new(vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let w = c.weight_derivatives(&p, &frame).unwrap();
        assert!((w.f - 2.25).abs() < 1e-15);
        assert_eq!(w.grad[..2], [0.0, 0.0]);
        assert!((w.grad[2] - 1.5).abs() < 1e-15);
        assert_eq!(w.hess[2][2], 0.5);
        assert_eq!(w.hess[0][0], 0.0);
        assert_eq!(w.hess[0][2], 0.0);

        let w0 = c.weight_derivatives(&[a, 0.0, 0.0, 0.0], &frame).unwrap();
        assert_eq!(w0.f, 0.0);
        assert_eq!(w0.grad, vec![0.0, 0.0, 0.0]);

        assert!((c.curvature(&frame, 0, 1, 0, 1) - 0.5).abs() < 1e-15);
        for (i, j, k, l) in [(2, 0, 2, 0), (0, 2, 0, 2), (2, 1, 1, 2), (0, 1, 2, 1)] {
            assert!(c.curvature(&frame, i, j, k, l).abs() < 1e-15);
        }
        assert!(c.check_point(&[1.0, 0.0, 0.0, 0.0]).is_err());
        assert_eq!(c.parallel_field(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn curvature_symmetries_and_contractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let models = [
            AmbientModel::cylinder(2).unwrap(),
            AmbientModel::cylinder(3).unwrap(),
            AmbientModel::cylinder_with_radius(4, 1.3).unwrap(),
        ];
        let mut checked = 0usize;
        for trial in 0..3300 {
            let model = &models[trial % models.len()];
            let (p, frame) = random_cylinder_frame(model, &mut rng);
            let m = frame.len();
            let e = frame.vectors();
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            let r = model.curvature(&frame, i, j, k, l);
                            assert!((r + model.curvature(&frame, j, i, k, l)).abs() < 1e-12);
                            assert!((r - model.curvature(&frame, k, l, i, j)).abs() < 1e-12);
                            let bianchi = r
                                + model.curvature(&frame, i, k, l, j)
                                + model.curvature(&frame, i, l, j, k);
                            assert!(bianchi.abs() < 1e-12);
                            let direct = model.curvature_vectors(&e[i], &e[j], &e[k], &e[l]);
                            assert!((r - direct).abs() < 1e-12);
                            checked += 1;
                        }
                    }
                }
            }
            for i in 0..m {
                for k in 0..m {
                    let contracted: f64 = (0..m).map(|j| model.curvature(&frame, i, j, k, j)).sum();
                    assert!((contracted - model.ricci(&e[i], &e[k])).abs() < 1e-12);
                    let c = if i == k { model.soliton_constant } else { 0.0 };
                    assert!((model.bakry_emery_ricci(&frame, i, k) - c).abs() < 1e-12);
                }
            }
            let w = model.weight_derivatives(&p, &frame).unwrap();
            assert!((w.f - model.weight(&p)).abs() < 1e-15);
        }
        assert!(checked >= 1_000_000);
    }

    #[test]
    fn gauss_equation_for_horizontal_spheres() {
        // S^n(a) × {t} is totally geodesic, so the ambient sectional curvature of
        // horizontal planes is the sphere's 1/a².
        let c = AmbientModel::cylinder_with_radius(3, 0.7).unwrap();
        let frame = OrthonormalFrame::new(vec![
            vec![0.0, 1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!((c.curvature(&frame, 0, 1, 0, 1) - 1.0 / 0.49).abs() < 1e-12);
    }
}
