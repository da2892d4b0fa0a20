use fminlab::ambient::AmbientModel;
use fminlab::charts::{Graph, ShrinkerSphere};
use fminlab::expr::Expr;
use fminlab::hypersurface::ImmersionChart;
use fminlab::identities::{check_compatible, check_identity, ALL_IDENTITIES};
use fminlab::operators::{PointContext, ScalarField};
use fminlab::rotsym::integrals::divergence_integral;
use fminlab::rotsym::{integrate_profile, slice_profile, ProfileChart, ProfileState};
use fminlab::sampling::halton_points;
use fminlab::scalar::Scalar;

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = 1.0;
    for i in 0..n {
        let p = (i..n).max_by(|&x, &y| a[x][i].abs().total_cmp(&a[y][i].abs())).unwrap();
        if p != i {
            a.swap(p, i);
            d = -d;
        }
        d *= a[i][i];
        for r in i + 1..n {
            let k = a[r][i] / a[i][i];
            let pivot = a[i].clone();
            for (x, p) in a[r].iter_mut().zip(&pivot).skip(i) {
                *x -= k * p;
            }
        }
    }
    d
}

/// `√g e^{−f} g^{ij} ∂_j u`.
fn flux(chart: &dyn ImmersionChart, field: &ScalarField, u: &[f64]) -> Vec<f64> {
    let ctx = PointContext::new(chart, u).unwrap();
    let phi = ctx.field(field).unwrap();
    let g = &ctx.geometry;
    let scale = det(&g.metric).sqrt() * (-ctx.jets.weight.value()).exp();
    (0..u.len())
        .map(|i| scale * (0..u.len()).map(|j| g.metric_inv[i][j] * phi.d1(j)).sum::<f64>())
        .collect()
}

/// `Δ_f u` as `e^{f} g^{−1/2} ∂_i(√g e^{−f} g^{ij} ∂_j u)` with central differences.
fn divergence_form(chart: &dyn ImmersionChart, field: &ScalarField, u: &[f64], h: f64) -> f64 {
    let ctx = PointContext::new(chart, u).unwrap();
    let scale = det(&ctx.geometry.metric).sqrt() * (-ctx.jets.weight.value()).exp();
    let mut div = 0.0;
    for i in 0..u.len() {
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[i] += h / 2.0;
        dn[i] -= h / 2.0;
        div += (flux(chart, field, &up)[i] - flux(chart, field, &dn)[i]) / h;
    }
    div / scale
}

fn assert_divergence_form(chart: &dyn ImmersionChart, fields: &[&str], points: &[Vec<f64>]) {
    for src in fields {
        let field = ScalarField::Custom(Expr::parse(src).unwrap());
        for u in points {
            let ctx = PointContext::new(chart, u).unwrap();
            let direct = ctx.weighted_laplacian(&ctx.field(&field).unwrap()).unwrap();
            let fd = divergence_form(chart, &field, u, 1e-4);
            assert!(
                (direct - fd).abs() <= 1e-6 * (1.0 + direct.abs()),
                "{} {src} at {u:?}: {direct} vs {fd}",
                chart.label()
            );
        }
    }
}

fn interior(domain: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let shrunk: Vec<(f64, f64)> = domain
        .iter()
        .map(|&(lo, hi)| (lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)))
        .collect();
    halton_points(&shrunk, count, seed)
}

#[test]
fn weighted_laplacian_matches_divergence_form_on_graphs() {
    for n in 2..=3 {
        let model = AmbientModel::cylinder(n).unwrap();
        let chart = Graph::new(model, Expr::parse("0.3 * x0 * x1 + 0.2 * sin(x2)").unwrap(), "graph").unwrap();
        let pts = interior(&chart.domain(), 6, n as u64);
        assert_divergence_form(&chart, &["t", "x0 * t + alpha", "exp(0.5 * x1) + H"], &pts);
    }
}

#[test]
fn weighted_laplacian_matches_divergence_form_on_profile_charts() {
    for n in 2..=4 {
        let model = AmbientModel::cylinder(n).unwrap();
        let p = integrate_profile(&model, ProfileState { rho: 1.0, t: 0.4, theta: 0.3 }, 1e-3 * model.a, 2.0).unwrap();
        let chart = ProfileChart::new(p).unwrap();
        let pts = interior(&chart.domain(), 6, 10 + n as u64);
        assert_divergence_form(&chart, &["t", "alpha * t", "x1 + A2"], &pts);
    }
}

#[test]
fn weighted_laplacian_matches_divergence_form_on_the_shrinker_sphere() {
    for n in 2..=3 {
        let chart = ShrinkerSphere::new(AmbientModel::gaussian(n).unwrap()).unwrap();
        let pts = interior(&chart.domain(), 6, 20 + n as u64);
        assert_divergence_form(&chart, &["x0", "x0 * x1 + alpha", "sin(x1) * x2"], &pts);
    }
}

#[test]
fn identities_hold_on_profile_arcs() {
    let bounds = [(2, 1e-10), (3, 1e-8), (4, 1e-8)];
    for (n, tol) in bounds {
        let model = AmbientModel::cylinder(n).unwrap();
        for (i, start) in [
            ProfileState { rho: 1.0, t: 0.4, theta: 0.3 },
            ProfileState { rho: 0.8, t: -1.1, theta: 2.0 },
        ]
        .into_iter()
        .enumerate()
        {
            let p = integrate_profile(&model, start, 5e-4 * model.a, 1.5).unwrap();
            let chart = ProfileChart::new(p).unwrap();
            let pts = halton_points(&chart.domain(), 40, i as u64);
            let mut checked = 0;
            for id in ALL_IDENTITIES {
                if check_compatible(id, &model).is_err() {
                    continue;
                }
                let report = check_identity(id, &chart, &pts, tol).unwrap();
                assert!(report.pass, "n = {n}, {id}: {}", report.max_residual);
                checked += 1;
            }
            assert!(checked >= 10, "only {checked} identities apply");
        }
    }
}

#[test]
fn divergence_integrals_vanish_on_closed_profiles() {
    let fields = ["t", "f", "alpha", "alpha * t", "A2", "rho * t"];
    for n in 2..=4 {
        let model = AmbientModel::cylinder(n).unwrap();
        let slice = slice_profile(&model, None).unwrap();
        let bumped = slice.with_height_perturbation(0.3);
        for src in fields {
            let field = ScalarField::Custom(Expr::parse(src).unwrap());
            for p in [&slice, &bumped] {
                let v = divergence_integral(p, &field).unwrap();
                assert!(v.abs() < 1e-8, "n = {n}, {src}: {v}");
            }
        }
    }
}
