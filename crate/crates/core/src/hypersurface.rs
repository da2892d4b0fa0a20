//! Immersed hypersurfaces given by charts, and their pointwise geometry.
//!
//! A chart maps chart coordinates (as jets) to flat Cartesian coordinates of
//! the ambient model. Everything else (metric, normal, second fundamental
//! form, its covariant derivative) is obtained from the jets of that map.
//!
//! Conventions: `A(X, Y) = −⟨∇̄_X Y, ν⟩`, so a round sphere with outward
//! normal has positive `a_ij`, and `H = tr A`.

use crate::ambient::{gram_schmidt, AmbientModel, OrthonormalFrame};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{dot, Scalar};

/// Jet order used when the full package including `Δ_f` of second-order
/// quantities is needed.
pub const FULL_ORDER: usize = 4;

const GRAM_THRESHOLD: f64 = 1e-12;

pub trait ImmersionChart: Send + Sync {
    fn model(&self) -> &AmbientModel;

    fn dim(&self) -> usize {
        self.model().n
    }

    /// Coordinate box `[lo, hi]` per chart variable.
    fn domain(&self) -> Vec<(f64, f64)>;

    fn label(&self) -> String;

    /// Flat Cartesian coordinates of the immersion.
    fn map(&self, u: &[Jet]) -> Result<Vec<Jet>>;

    /// A vector whose inner product with the chosen normal must be positive.
    fn orientation(&self, u: &[f64], x: &[f64]) -> Vec<f64>;
}

/// Jets of everything the chart determines at one point.
#[derive(Debug, Clone)]
pub struct ChartJets {
    pub order: usize,
    pub u: Vec<f64>,
    /// Position, order `order`.
    pub x: Vec<Jet>,
    /// `∂_a X`, order `order − 1`.
    pub tangents: Vec<Vec<Jet>>,
    /// `g_ab`, order `order − 1`.
    pub metric: Vec<Vec<Jet>>,
    pub metric_inv: Vec<Vec<Jet>>,
    /// Unit normal, order `order − 1`.
    pub normal: Vec<Jet>,
    /// `h_ab = −⟨∂_a∂_b X, ν⟩`, order `order − 2`.
    pub h: Vec<Vec<Jet>>,
    /// Order `order − 2`.
    pub mean_curvature: Jet,
    /// `|A|²`, order `order − 2`.
    pub a2: Jet,
    /// `⟨X_par, ν⟩`, order `order − 1`.
    pub alpha: Jet,
    /// Weight restricted to the chart, order `order`.
    pub weight: Jet,
    /// Height `t` (cylinder only), order `order`.
    pub height: Option<Jet>,
}

/// The pointwise geometric package. Tensor components are in the
/// orthonormal tangent frame unless stated otherwise.
#[derive(Debug, Clone)]
pub struct GeometryAtPoint {
    pub u: Vec<f64>,
    pub point: Vec<f64>,
    pub tangent_frame: Vec<Vec<f64>>,
    pub normal: Vec<f64>,
    /// Chart basis.
    pub metric: Vec<Vec<f64>>,
    pub metric_inv: Vec<Vec<f64>>,
    /// `e_i = Σ_a frame_coeffs[i][a] ∂_a X` (lower triangular).
    pub frame_coeffs: Vec<Vec<f64>>,
    /// `Γ^c_ab` as `christoffel[c][a][b]`.
    pub christoffel: Vec<Vec<Vec<f64>>>,
    pub a: Vec<Vec<f64>>,
    /// `a_{ij,k}` as `nabla_a[i][j][k]`.
    pub nabla_a: Vec<Vec<Vec<f64>>>,
    pub mean_curvature: f64,
    pub weighted_mean_curvature: f64,
    pub a2: f64,
    pub alpha: f64,
    pub grad_h: Vec<f64>,
    pub grad_alpha: Vec<f64>,
    pub grad_t: Option<Vec<f64>>,
}

impl GeometryAtPoint {
    /// `|∇A|²`.
    pub fn nabla_a_norm2(&self) -> f64 {
        self.nabla_a.iter().flatten().flatten().map(|v| v * v).sum()
    }

    /// Orthonormal frame `{e_1, …, e_n, ν}`.
    pub fn ambient_frame(&self) -> Result<OrthonormalFrame> {
        let mut v = self.tangent_frame.clone();
        v.push(self.normal.clone());
        OrthonormalFrame::new(v)
    }

    /// Frame components of the chart gradient of a scalar.
    pub fn frame_gradient(&self, chart_grad: &[f64]) -> Vec<f64> {
        self.frame_coeffs
            .iter()
            .map(|row| dot(row, chart_grad))
            .collect()
    }
}

fn truncate_all(v: &[Jet], order: usize) -> Vec<Jet> {
    v.iter().map(|j| j.truncate(order)).collect()
}

/// Inverse of a small symmetric jet matrix by Gauss–Jordan elimination with
/// pivoting on constant terms.
pub fn invert_matrix(m: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = m.len();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m[0][0].lift(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].value().abs().total_cmp(&a[q][col].value().abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        if p.value().abs() <= GRAM_THRESHOLD {
            return Err(Error::Geometry("degenerate metric".into()));
        }
        for j in 0..n {
            a[col][j] = a[col][j].checked_div(&p)?;
            inv[col][j] = inv[col][j].checked_div(&p)?;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                for j in 0..n {
                    a[r][j] = a[r][j] - factor * a[col][j];
                    inv[r][j] = inv[r][j] - factor * inv[col][j];
                }
            }
        }
    }
    Ok(inv)
}

fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap_or(col);
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for j in col..n {
                a[r][j] -= f * a[col][j];
            }
        }
    }
    det
}

/// Orthonormalizes jet vectors in order.
fn gram_schmidt_jets(vectors: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let mut out: Vec<Vec<Jet>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for e in &out {
            let c = dot(&w, e);
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi = *wi - c * *ei;
            }
        }
        let norm = dot(&w, &w).sqrt()?;
        if norm.value() <= GRAM_THRESHOLD {
            return Err(Error::Geometry("dependent tangent vectors".into()));
        }
        out.push(w.iter().map(|c| *c / norm).collect());
    }
    Ok(out)
}

impl ChartJets {
    pub fn new(chart: &dyn ImmersionChart, u: &[f64], order: usize) -> Result<ChartJets> {
        if order < 2 {
            return Err(Error::Capability(format!(
                "chart jets need order ≥ 2 for curvature, got {order}"
            )));
        }
        let model = *chart.model();
        let n = chart.dim();
        if u.len() != n {
            return Err(Error::Argument(format!(
                "chart point has {} coordinates, expected {n}",
                u.len()
            )));
        }
        let vars: Vec<Jet> = u
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, n, order))
            .collect::<Result<_>>()?;
        let x = chart.map(&vars)?;
        if x.len() != model.flat_dim() {
            return Err(Error::Geometry(format!(
                "chart produced {} components, model needs {}",
                x.len(),
                model.flat_dim()
            )));
        }
        let xv: Vec<f64> = x.iter().map(|c| c.value()).collect();
        model.check_point(&xv)?;

        let tangents: Vec<Vec<Jet>> = (0..n)
            .map(|a| x.iter().map(|c| c.derivative(a)).collect())
            .collect();
        let metric: Vec<Vec<Jet>> = (0..n)
            .map(|a| (0..n).map(|b| dot(&tangents[a], &tangents[b])).collect())
            .collect();
        let gv: Vec<Vec<f64>> = metric
            .iter()
            .map(|r| r.iter().map(|j| j.value()).collect())
            .collect();
        if determinant(&gv) <= GRAM_THRESHOLD {
            return Err(Error::Geometry(format!(
                "degenerate metric at u = {u:?} (Gram determinant {})",
                determinant(&gv)
            )));
        }
        let metric_inv = invert_matrix(&metric)?;

        // normal: complete constraint normals and tangents by a coordinate axis
        let mut basis: Vec<Vec<Jet>> = Vec::new();
        if let Some(cn) = model.constraint_normal(&x) {
            basis.push(truncate_all(&cn, order - 1));
        }
        basis.extend(tangents.iter().cloned());
        let q = gram_schmidt_jets(&basis)?;
        let dim = model.flat_dim();
        let residual = |k: usize| {
            let mut w = vec![0.0; dim];
            w[k] = 1.0;
            for e in &q {
                let c = e[k].value();
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= c * ei.value();
                }
            }
            dot(&w, &w)
        };
        let axis = (0..dim)
            .max_by(|&p, &r| residual(p).total_cmp(&residual(r)))
            .unwrap_or(0);
        let zero = q[0][0].lift(0.0);
        let mut w: Vec<Jet> = (0..dim)
            .map(|k| if k == axis { zero + 1.0 } else { zero })
            .collect();
        for e in &q {
            let c = e[axis];
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi = *wi - c * *ei;
            }
        }
        let norm = dot(&w, &w).sqrt()?;
        let mut normal: Vec<Jet> = w.iter().map(|c| *c / norm).collect();
        let nv: Vec<f64> = normal.iter().map(|c| c.value()).collect();
        if dot(&nv, &chart.orientation(u, &xv)) < 0.0 {
            normal.iter_mut().for_each(|c| *c = -*c);
        }

        let normal_lo = truncate_all(&normal, order - 2);
        let h: Vec<Vec<Jet>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let xab: Vec<Jet> = tangents[a].iter().map(|c| c.derivative(b)).collect();
                        -dot(&xab, &normal_lo)
                    })
                    .collect()
            })
            .collect();
        let ginv_lo: Vec<Vec<Jet>> = metric_inv
            .iter()
            .map(|r| truncate_all(r, order - 2))
            .collect();
        let mut mean = h[0][0].lift(0.0);
        let mut a2 = mean;
        // shape operator S^a_b = g^{ac} h_cb
        let mut shape = vec![vec![mean; n]; n];
        for a in 0..n {
            for b in 0..n {
                mean = mean + ginv_lo[a][b] * h[a][b];
                for c in 0..n {
                    shape[a][b] = shape[a][b] + ginv_lo[a][c] * h[c][b];
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                a2 = a2 + shape[a][b] * shape[b][a];
            }
        }
        let par = model.parallel_field();
        let alpha = normal
            .iter()
            .zip(&par)
            .fold(normal[0].lift(0.0), |acc, (c, p)| acc + *c * *p);
        let weight = model.weight(&x);
        let height = model.is_cylinder().then(|| x[n + 1]);
        Ok(ChartJets {
            order,
            u: u.to_vec(),
            x,
            tangents,
            metric,
            metric_inv,
            normal,
            h,
            mean_curvature: mean,
            a2,
            alpha,
            weight,
            height,
        })
    }

    pub fn n(&self) -> usize {
        self.tangents.len()
    }

    pub fn normal_value(&self) -> Vec<f64> {
        self.normal.iter().map(|c| c.value()).collect()
    }

    pub fn point(&self) -> Vec<f64> {
        self.x.iter().map(|c| c.value()).collect()
    }

    /// Value-level package.
    pub fn geometry(&self, model: &AmbientModel) -> Result<GeometryAtPoint> {
        let n = self.n();
        let g: Vec<Vec<f64>> = self
            .metric
            .iter()
            .map(|r| r.iter().map(|j| j.value()).collect())
            .collect();
        let ginv: Vec<Vec<f64>> = self
            .metric_inv
            .iter()
            .map(|r| r.iter().map(|j| j.value()).collect())
            .collect();
        let frame_coeffs = cholesky_inverse(&g)?;
        let tv: Vec<Vec<f64>> = self
            .tangents
            .iter()
            .map(|r| r.iter().map(|j| j.value()).collect())
            .collect();
        let dim = model.flat_dim();
        let tangent_frame: Vec<Vec<f64>> = frame_coeffs
            .iter()
            .map(|row| {
                (0..dim)
                    .map(|k| (0..n).map(|a| row[a] * tv[a][k]).sum())
                    .collect()
            })
            .collect();

        // Γ^c_ab = ½ g^{cd}(∂_a g_bd + ∂_b g_ad − ∂_d g_ab)
        let dg = |a: usize, b: usize, d: usize| self.metric[a][b].d1(d);
        let christoffel: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|c| {
                (0..n)
                    .map(|a| {
                        (0..n)
                            .map(|b| {
                                0.5 * (0..n)
                                    .map(|d| ginv[c][d] * (dg(b, d, a) + dg(a, d, b) - dg(a, b, d)))
                                    .sum::<f64>()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let hv: Vec<Vec<f64>> = self
            .h
            .iter()
            .map(|r| r.iter().map(|j| j.value()).collect())
            .collect();
        let e = &frame_coeffs;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut s = 0.0;
                        for p in 0..n {
                            for q in 0..n {
                                s += e[i][p] * e[j][q] * hv[p][q];
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();

        // chart components of ∇h
        let nabla_h = |p: usize, q: usize, c: usize| -> f64 {
            let mut v = self.h[p][q].d1(c);
            for d in 0..n {
                v -= christoffel[d][c][p] * hv[d][q] + christoffel[d][c][q] * hv[p][d];
            }
            v
        };
        let mut nh = vec![vec![vec![0.0; n]; n]; n];
        for (p, plane) in nh.iter_mut().enumerate() {
            for (q, row) in plane.iter_mut().enumerate() {
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot = nabla_h(p, q, c);
                }
            }
        }
        let mut nabla_a = vec![vec![vec![0.0; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        for q in 0..n {
                            for c in 0..n {
                                s += e[i][p] * e[j][q] * e[k][c] * nh[p][q][c];
                            }
                        }
                    }
                    nabla_a[i][j][k] = s;
                }
            }
        }

        let point = self.point();
        let normal = self.normal_value();
        let mean_curvature = self.mean_curvature.value();
        let fnu = dot(&model.weight_gradient(&point), &normal);
        let fg = |j: &Jet| -> Vec<f64> {
            let cg = j.gradient();
            e.iter().map(|row| dot(row, &cg)).collect()
        };
        Ok(GeometryAtPoint {
            u: self.u.clone(),
            point,
            tangent_frame,
            normal,
            metric: g,
            metric_inv: ginv,
            christoffel,
            a,
            nabla_a,
            mean_curvature,
            weighted_mean_curvature: mean_curvature - fnu,
            a2: self.a2.value(),
            alpha: self.alpha.value(),
            grad_h: fg(&self.mean_curvature),
            grad_alpha: fg(&self.alpha),
            grad_t: self.height.as_ref().map(fg),
            frame_coeffs,
        })
    }
}

/// `L⁻¹` for the Cholesky factor `g = L Lᵀ`; its rows express the
/// Gram–Schmidt orthonormalization of the chart tangents.
fn cholesky_inverse(g: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = g[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= GRAM_THRESHOLD {
                    return Err(Error::Geometry("degenerate metric".into()));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        for i in col..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = rhs - (col..i).map(|k| l[i][k] * inv[k][col]).sum::<f64>();
            inv[i][col] = s / l[i][i];
        }
    }
    Ok(inv)
}

/// Full geometric package at chart point `u`.
pub fn evaluate_geometry(chart: &dyn ImmersionChart, u: &[f64]) -> Result<GeometryAtPoint> {
    ChartJets::new(chart, u, 3)?.geometry(chart.model())
}

/// `|H − ⟨∇̄f, ν⟩|`.
pub fn fminimality_residual(chart: &dyn ImmersionChart, u: &[f64]) -> Result<f64> {
    let g = evaluate_geometry(chart, u)?;
    Ok(g.weighted_mean_curvature.abs())
}

/// `a_{ik,j} − a_{ij,k} − R̄_{νikj}`, maximized over indices.
pub fn codazzi_defect(model: &AmbientModel, g: &GeometryAtPoint) -> f64 {
    let n = g.a.len();
    let e = &g.tangent_frame;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let r = model.curvature_vectors(&g.normal, &e[i], &e[k], &e[j]);
                let d = g.nabla_a[i][k][j] - g.nabla_a[i][j][k] - r;
                worst = worst.max(d.abs());
            }
        }
    }
    worst
}

/// Checks the flat-level frame: unit normal orthogonal to the tangents.
pub fn frame_defect(g: &GeometryAtPoint) -> f64 {
    let mut worst = (dot(&g.normal, &g.normal) - 1.0).abs();
    for e in &g.tangent_frame {
        worst = worst.max(dot(e, &g.normal).abs());
    }
    if let Some(f) = gram_schmidt(&g.tangent_frame) {
        for (a, b) in f.iter().zip(&g.tangent_frame) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    worst
}
