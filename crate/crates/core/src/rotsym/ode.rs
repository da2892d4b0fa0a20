//! The first-order system for rotational f-minimal profiles in `S^n(a) × ℝ`.
//!
//! With `ρ` the geodesic distance from the pole, `t` the height and `θ`
//! the tangent angle, the unit normal is `ν = −sin θ ∂ρ + cos θ ∂t`, so the
//! slice `θ ≡ 0` has `α = ⟨ν, ∂t⟩ = 1`. The profile curvature is `−θ′`, each
//! orbit direction contributes `−sin θ cot(ρ/a)/a`, and `H = f′(t) cos θ`.

use crate::ambient::AmbientModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::series::Series;

/// `(ρ′, t′, θ′)` at an interior state.
pub fn rhs<S: Scalar>(model: &AmbientModel, rho: &S, t: &S, theta: &S) -> Result<[S; 3]> {
    let a = model.a;
    let n1 = model.n as f64 - 1.0;
    let arg = rho.clone() / a;
    let cot = arg.cos().checked_div(&arg.sin())?;
    let (st, ct) = (theta.sin(), theta.cos());
    let slope = t.clone() * (2.0 * model.height_coefficient());
    let dtheta = -(st.clone() * cot * (n1 / a)) - slope * ct.clone();
    Ok([ct, st, dtheta])
}

/// Plain-float right-hand side with interior checks.
pub fn fmin_ode_step(model: &AmbientModel, state: [f64; 3]) -> Result<[f64; 3]> {
    if !model.is_cylinder() {
        return Err(Error::Argument("profile ODE needs the sphere cylinder".into()));
    }
    let [rho, t, theta] = state;
    if !(rho > 0.0 && rho < std::f64::consts::PI * model.a) {
        return Err(Error::Singularity(format!(
            "rho = {rho} is on or outside the axis; use the axis expansion"
        )));
    }
    let out = rhs(model, &rho, &t, &theta)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration(format!("non-finite derivative at {state:?}")));
    }
    Ok(out)
}

/// Taylor expansion of the solution leaving the pole `ρ = 0` at height `t0`
/// with perpendicular launch.
///
/// Multiplying the `θ` equation by `sin(ρ/a)` removes the singularity;
/// order by order the coefficient `θ_k` enters with factor `(k + n − 1)/a`.
pub fn axis_series(model: &AmbientModel, t0: f64, deg: usize) -> Result<[Series; 3]> {
    let a = model.a;
    let n1 = model.n as f64 - 1.0;
    let two_k = 2.0 * model.height_coefficient();
    let mut rho = Series::constant(0.0, deg);
    let mut t = Series::constant(t0, deg);
    let mut theta = Series::constant(0.0, deg);
    for k in 1..=deg {
        let (st, ct) = theta.sin_cos();
        rho.set_coeff(k, ct.coeff(k - 1) / k as f64);
        t.set_coeff(k, st.coeff(k - 1) / k as f64);
        let (st, ct) = theta.sin_cos();
        let (sr, cr) = (rho / a).sin_cos();
        let mut dtheta = Series::constant(0.0, deg);
        for j in 1..=deg {
            dtheta.set_coeff(j - 1, j as f64 * theta.coeff(j));
        }
        let e = sr * dtheta + st * cr * (n1 / a) + t * two_k * ct * sr;
        theta.set_coeff(k, -a * e.coeff(k) / (k as f64 + n1));
    }
    if [rho, t, theta].iter().any(|s| s.coeffs().iter().any(|c| !c.is_finite())) {
        return Err(Error::Integration(format!("axis expansion diverged at t0 = {t0}")));
    }
    Ok([rho, t, theta])
}

/// Radius within which the truncated axis expansion is accurate to
/// roughly `1e-15 a`.
pub fn axis_radius(series: &[Series; 3], a: f64) -> f64 {
    let mut r = f64::INFINITY;
    for s in series {
        let d = s.deg();
        for k in d.saturating_sub(1)..=d {
            let c = s.coeff(k).abs();
            if k > 0 && c > 0.0 {
                r = r.min((1e-15 * a / c).powf(1.0 / k as f64));
            }
        }
    }
    r.min(0.05 * a)
}

/// Taylor polynomial of the solution through `y0` by Picard iteration.
pub fn taylor_expansion(model: &AmbientModel, y0: [f64; 3], deg: usize) -> Result<[Series; 3]> {
    let mut y = y0.map(|v| Series::constant(v, deg));
    for _ in 0..deg {
        let f = rhs(model, &y[0], &y[1], &y[2])?;
        for i in 0..3 {
            y[i] = f[i].integral() + y0[i];
        }
    }
    Ok(y)
}

/// One classical Runge–Kutta step.
pub fn rk4_step(model: &AmbientModel, y: [f64; 3], h: f64) -> Result<[f64; 3]> {
    let add = |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
    let k1 = fmin_ode_step(model, y)?;
    let k2 = fmin_ode_step(model, add(y, k1, h / 2.0))?;
    let k3 = fmin_ode_step(model, add(y, k2, h / 2.0))?;
    let k4 = fmin_ode_step(model, add(y, k3, h))?;
    let mut out = y;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}
