//! Pointwise residuals of the weighted-curvature identities satisfied by
//! f-minimal hypersurfaces.
//!
//! Each identity is assembled from its stated left and right hand sides
//! without algebraic simplification; the residual is `|lhs − rhs|`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::{AmbientModel, OrthonormalFrame};
use crate::error::{Error, Result};
use crate::hypersurface::ImmersionChart;
use crate::jet::Jet;
use crate::operators::{PointContext, ScalarField};
use crate::scalar::dot;

/// f-minimality tolerance required before any identity is evaluated.
pub const FMIN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[allow(non_camel_case_types)]
pub enum IdentityId {
    FLAP_H,
    LF_H,
    SIMONS_FULL,
    SIMONS_SOLITON,
    ALPHA_LAW,
    ALPHA_SOLITON,
    CYL_DALPHA2,
    CYL_DH2,
    CYL_DA2,
    SHRINKER_H2,
    SHRINKER_A2,
    SHRINKER_LFH,
    HEIGHT,
    DELTAF_F,
}

/// Ambient models an identity is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RequiredModel {
    Any,
    SphereCylinder,
    /// The cylinder at radius `√(2(n−1))` with `f = t²/4`.
    CylinderSoliton,
    GaussianSpace,
}

impl RequiredModel {
    pub fn admits(&self, model: &AmbientModel) -> bool {
        match self {
            RequiredModel::Any => true,
            RequiredModel::SphereCylinder => model.is_cylinder(),
            RequiredModel::CylinderSoliton => model.is_default_cylinder(),
            RequiredModel::GaussianSpace => model.is_gaussian(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: IdentityId,
    /// The identity in words, embedded in reports.
    pub anchor: &'static str,
    pub model: RequiredModel,
    /// Chart jet order needed to evaluate both sides.
    pub jet_order: usize,
}

pub const ALL_IDENTITIES: [IdentityId; 14] = [
    IdentityId::FLAP_H,
    IdentityId::LF_H,
    IdentityId::SIMONS_FULL,
    IdentityId::SIMONS_SOLITON,
    IdentityId::ALPHA_LAW,
    IdentityId::ALPHA_SOLITON,
    IdentityId::CYL_DALPHA2,
    IdentityId::CYL_DH2,
    IdentityId::CYL_DA2,
    IdentityId::SHRINKER_H2,
    IdentityId::SHRINKER_A2,
    IdentityId::SHRINKER_LFH,
    IdentityId::HEIGHT,
    IdentityId::DELTAF_F,
];

impl IdentityId {
    pub fn entry(self) -> CatalogEntry {
        use IdentityId::*;
        let (anchor, model, jet_order) = match self {
            FLAP_H => (
                "Δ_f H = 2Σ(∇̄³f)_{iνi} − Σ(∇̄³f)_{νii} + 2Σ a_ij(∇̄²f)_ij − Ric_f(ν,ν)H − |A|²H",
                RequiredModel::Any,
                4,
            ),
            LF_H => (
                "L_f H = 2Σ(∇̄³f)_{iνi} − Σ(∇̄³f)_{νii} + 2Σ a_ij(∇̄²f)_ij",
                RequiredModel::Any,
                4,
            ),
            SIMONS_FULL => (
                "½Δ_f|A|² = |∇A|² + 2Σ a_ij a_ik (Ric_f)_jk − (Ric_f)_νν|A|² − |A|⁴ + 2Σ a_ij (Ric_f)_{iν;j} − Σ a_ij (Ric_f)_{ij;ν} + Σ a_ij R̄_{iνjν;ν} − 2Σ a_ij a_ik R̄_{jνkν} − 2Σ a_ij a_lk R̄_{iljk}",
                RequiredModel::Any,
                4,
            ),
            SIMONS_SOLITON => (
                "½Δ_f|A|² = |∇A|² + C|A|² − |A|⁴ + Σ a_ij R̄_{iνjν;ν} − 2Σ a_ij a_ik R̄_{jνkν} − 2Σ a_ij a_lk R̄_{iljk}",
                RequiredModel::Any,
                4,
            ),
            ALPHA_LAW => (
                "Δ_f α = Ric_f(X,ν) − |A|²α − Ric_f(ν,ν)α and L_f α = Ric_f(X,ν), α = ⟨X,ν⟩, X parallel",
                RequiredModel::Any,
                3,
            ),
            ALPHA_SOLITON => ("L_f α = Cα", RequiredModel::Any, 3),
            CYL_DALPHA2 => (
                "½Δ_f α² = |∇α|² − |A|²α²",
                RequiredModel::CylinderSoliton,
                3,
            ),
            CYL_DH2 => (
                "½Δ_f H² = |∇H|² − (|A|² + ½)H² + ½⟨∇α², ∇f⟩",
                RequiredModel::CylinderSoliton,
                4,
            ),
            CYL_DA2 => (
                "½Δ_f|A|² = |∇A|² + |A|²(½ − |A|²) − (|∇α|² − α²|A|²)/(n−1) − (α²f − ⟨∇α², ∇f⟩)/(n−1)",
                RequiredModel::CylinderSoliton,
                4,
            ),
            SHRINKER_H2 => (
                "½Δ_f H² = |∇H|² + (½ − |A|²)H²",
                RequiredModel::GaussianSpace,
                4,
            ),
            SHRINKER_A2 => (
                "½Δ_f|A|² = |∇A|² + (½ − |A|²)|A|²",
                RequiredModel::GaussianSpace,
                4,
            ),
            SHRINKER_LFH => ("L_f H = H", RequiredModel::GaussianSpace, 4),
            HEIGHT => ("|∇t|² = 1 − α²", RequiredModel::SphereCylinder, 2),
            DELTAF_F => ("Δ_f f = ½(1 − α²) − f", RequiredModel::CylinderSoliton, 2),
        };
        CatalogEntry {
            id: self,
            anchor,
            model,
            jet_order,
        }
    }

    pub fn name(self) -> &'static str {
        use IdentityId::*;
        match self {
            FLAP_H => "FLAP_H",
            LF_H => "LF_H",
            SIMONS_FULL => "SIMONS_FULL",
            SIMONS_SOLITON => "SIMONS_SOLITON",
            ALPHA_LAW => "ALPHA_LAW",
            ALPHA_SOLITON => "ALPHA_SOLITON",
            CYL_DALPHA2 => "CYL_DALPHA2",
            CYL_DH2 => "CYL_DH2",
            CYL_DA2 => "CYL_DA2",
            SHRINKER_H2 => "SHRINKER_H2",
            SHRINKER_A2 => "SHRINKER_A2",
            SHRINKER_LFH => "SHRINKER_LFH",
            HEIGHT => "HEIGHT",
            DELTAF_F => "DELTAF_F",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL_IDENTITIES
            .iter()
            .copied()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Argument(format!("unknown identity '{s}'")))
    }
}

/// The static catalog.
pub fn list_identities() -> Vec<CatalogEntry> {
    ALL_IDENTITIES.iter().map(|id| id.entry()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub u: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub identity: IdentityId,
    pub anchor: String,
    pub chart: String,
    pub samples: Vec<SampleRecord>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Curvature contractions appearing in the Simons-type identities.
struct SimonsTerms {
    /// `Σ a_ij a_ik (Ric_f)_jk`
    a2_ric: f64,
    /// `Σ a_ij R̄_{iνjν;ν}`
    a_drm: f64,
    /// `Σ a_ij a_ik R̄_{jνkν}`
    a2_rm_nu: f64,
    /// `Σ a_ij a_lk R̄_{iljk}`
    aa_rm: f64,
    /// `Σ a_ij (Ric_f)_{iν;j}` and `Σ a_ij (Ric_f)_{ij;ν}`; parallel `Ric_f` in both models
    a_dric_mixed: f64,
    a_dric_normal: f64,
}

fn simons_terms(model: &AmbientModel, frame: &OrthonormalFrame, a: &[Vec<f64>]) -> SimonsTerms {
    let n = a.len();
    let nu = n;
    let rm = |i, j, k, l| model.curvature(frame, i, j, k, l);
    let ric = |i, k| model.bakry_emery_ricci(frame, i, k);
    let mut t = SimonsTerms {
        a2_ric: 0.0,
        a_drm: 0.0,
        a2_rm_nu: 0.0,
        aa_rm: 0.0,
        a_dric_mixed: 0.0,
        a_dric_normal: 0.0,
    };
    for i in 0..n {
        for j in 0..n {
            t.a_drm += a[i][j] * model.curvature_derivative(frame, [i, nu, j, nu, nu]);
            for k in 0..n {
                t.a2_ric += a[i][j] * a[i][k] * ric(j, k);
                t.a2_rm_nu += a[i][j] * a[i][k] * rm(j, nu, k, nu);
                for l in 0..n {
                    t.aa_rm += a[i][j] * a[l][k] * rm(i, l, j, k);
                }
            }
        }
    }
    t
}

/// `(lhs, rhs, residual)` for one identity at one point.
fn evaluate(id: IdentityId, ctx: &PointContext) -> Result<(f64, f64, f64)> {
    use IdentityId::*;
    let model = &ctx.model;
    let g = &ctx.geometry;
    let n = g.a.len();
    let nf = n as f64;
    let frame = g.ambient_frame()?;
    let wd = model.weight_derivatives(&g.point, &frame)?;
    let nu = n;
    let a2 = g.a2;
    let h = g.mean_curvature;
    let alpha = g.alpha;
    let ric_nn = ctx.ric_f_nn();
    let c = model.soliton_constant;

    let field = |f: ScalarField| ctx.field(&f);
    let half_lap = |j: &Jet| -> Result<f64> { Ok(0.5 * ctx.weighted_laplacian(j)?) };
    let grad2 = |v: &[f64]| dot(v, v);
    let ahess: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| g.a[i][j] * wd.hess[i][j])
        .sum();
    let third_terms: f64 = (0..n)
        .map(|i| 2.0 * wd.third[i][nu][i] - wd.third[nu][i][i])
        .sum();
    let weight = || field(ScalarField::FRestricted);

    let (lhs, rhs) = match id {
        FLAP_H => {
            let hj = field(ScalarField::H)?;
            (
                ctx.weighted_laplacian(&hj)?,
                third_terms + 2.0 * ahess - ric_nn * h - a2 * h,
            )
        }
        LF_H => {
            let hj = field(ScalarField::H)?;
            (ctx.lf(&hj)?, third_terms + 2.0 * ahess)
        }
        SIMONS_FULL | SIMONS_SOLITON => {
            let s = simons_terms(model, &frame, &g.a);
            let lhs = half_lap(&field(ScalarField::A2)?)?;
            let common = g.nabla_a_norm2() - a2 * a2 + s.a_drm - 2.0 * s.a2_rm_nu - 2.0 * s.aa_rm;
            let rhs = if id == SIMONS_FULL {
                common + 2.0 * s.a2_ric - ric_nn * a2 + 2.0 * s.a_dric_mixed - s.a_dric_normal
            } else {
                common + c * a2
            };
            (lhs, rhs)
        }
        ALPHA_LAW => {
            let aj = field(ScalarField::Alpha)?;
            let ric_xn = model.bakry_emery(&model.parallel_field(), &g.normal);
            let lhs = ctx.weighted_laplacian(&aj)?;
            let rhs = ric_xn - a2 * alpha - ric_nn * alpha;
            let second = (ctx.lf(&aj)? - ric_xn).abs();
            return Ok((lhs, rhs, (lhs - rhs).abs().max(second)));
        }
        ALPHA_SOLITON => {
            let aj = field(ScalarField::Alpha)?;
            (ctx.lf(&aj)?, c * alpha)
        }
        CYL_DALPHA2 => {
            let sq = field(ScalarField::AlphaSquared)?;
            (half_lap(&sq)?, grad2(&g.grad_alpha) - a2 * alpha * alpha)
        }
        CYL_DH2 => {
            let sq = field(ScalarField::HSquared)?;
            let asq = field(ScalarField::AlphaSquared)?;
            let rhs = grad2(&g.grad_h) - (a2 + 0.5) * h * h + 0.5 * ctx.grad_dot(&asq, &weight()?)?;
            (half_lap(&sq)?, rhs)
        }
        CYL_DA2 => {
            let asq = field(ScalarField::AlphaSquared)?;
            let f = wd.f;
            let rhs = g.nabla_a_norm2() + a2 * (0.5 - a2)
                - (grad2(&g.grad_alpha) - alpha * alpha * a2) / (nf - 1.0)
                - (alpha * alpha * f - ctx.grad_dot(&asq, &weight()?)?) / (nf - 1.0);
            (half_lap(&field(ScalarField::A2)?)?, rhs)
        }
        SHRINKER_H2 => {
            let sq = field(ScalarField::HSquared)?;
            (half_lap(&sq)?, grad2(&g.grad_h) + (0.5 - a2) * h * h)
        }
        SHRINKER_A2 => (
            half_lap(&field(ScalarField::A2)?)?,
            g.nabla_a_norm2() + (0.5 - a2) * a2,
        ),
        SHRINKER_LFH => (ctx.lf(&field(ScalarField::H)?)?, h),
        HEIGHT => {
            let gt = g
                .grad_t
                .as_ref()
                .ok_or_else(|| Error::Argument("HEIGHT needs the sphere cylinder".into()))?;
            (grad2(gt), 1.0 - alpha * alpha)
        }
        DELTAF_F => (
            ctx.weighted_laplacian(&weight()?)?,
            0.5 * (1.0 - alpha * alpha) - wd.f,
        ),
    };
    Ok((lhs, rhs, (lhs - rhs).abs()))
}

/// Rejects identity/model combinations the identity is not stated for.
pub fn check_compatible(id: IdentityId, model: &AmbientModel) -> Result<()> {
    let entry = id.entry();
    if entry.model.admits(model) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "{id} is stated for {:?}, not for {model}",
            entry.model
        )))
    }
}

/// Fails with a precondition error naming the worst point if the chart is
/// not f-minimal at all samples.
pub fn check_fminimal(chart: &dyn ImmersionChart, points: &[Vec<f64>]) -> Result<()> {
    let residuals: Vec<f64> = points
        .par_iter()
        .map(|u| crate::hypersurface::fminimality_residual(chart, u))
        .collect::<Result<_>>()?;
    let (worst, r) = residuals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, r)| (i, *r))
        .unwrap_or((0, 0.0));
    if r > FMIN_TOLERANCE {
        return Err(Error::Precondition(format!(
            "{} is not f-minimal: |H_f| = {r:.3e} at u = {:?}",
            chart.label(),
            points[worst]
        )));
    }
    Ok(())
}

/// Residuals of one identity over the given sample points.
pub fn check_identity(
    id: IdentityId,
    chart: &dyn ImmersionChart,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    check_compatible(id, chart.model())?;
    check_fminimal(chart, points)?;
    check_identity_unchecked(id, chart, points, tol, id.entry().jet_order)
}

/// Evaluates without the model and f-minimality guards, at an explicit jet
/// order.
pub fn check_identity_unchecked(
    id: IdentityId,
    chart: &dyn ImmersionChart,
    points: &[Vec<f64>],
    tol: f64,
    order: usize,
) -> Result<ResidualReport> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if order < id.entry().jet_order {
        return Err(Error::Capability(format!(
            "{id} needs chart jets of order {}, got {order}",
            id.entry().jet_order
        )));
    }
    let samples: Vec<SampleRecord> = points
        .par_iter()
        .map(|u| {
            let ctx = PointContext::with_order(chart, u, order.max(3))?;
            let (lhs, rhs, residual) = evaluate(id, &ctx)?;
            if !residual.is_finite() {
                return Err(Error::Numeric(format!("{id}: non-finite residual at u = {u:?}")));
            }
            Ok(SampleRecord {
                u: u.clone(),
                lhs,
                rhs,
                residual,
            })
        })
        .collect::<Result<_>>()?;
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(ResidualReport {
        identity: id,
        anchor: id.entry().anchor.to_string(),
        chart: chart.label(),
        samples,
        max_residual,
        tolerance: tol,
        pass: max_residual <= tol,
    })
}
