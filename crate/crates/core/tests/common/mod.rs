#![allow(dead_code)]

use fminlab::jet::Jet;
use fminlab::scalar::Scalar;
use rand::Rng;

pub const CASES: u32 = 10_000;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn binom(beta: &[usize], gamma: &[usize]) -> f64 {
    beta.iter()
        .zip(gamma)
        .map(|(&b, &g)| factorial(b) / (factorial(g) * factorial(b - g)))
        .product()
}

/// Every multi-index `γ ≤ β` componentwise.
fn sub_indices(beta: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &b in beta {
        out = out
            .into_iter()
            .flat_map(|p| (0..=b).map(move |g| [p.clone(), vec![g]].concat()))
            .collect();
    }
    out
}

/// Compares every partial of `a·b` with its Leibniz expansion.
pub fn leibniz_check(a: &Jet, b: &Jet) -> Result<(), String> {
    let p = *a * *b;
    for beta in p.multi_indices() {
        let lhs = p.extract_partial(&beta).unwrap();
        let mut rhs = 0.0;
        let mut scale = 0.0;
        for gamma in sub_indices(&beta) {
            let rest: Vec<usize> = beta.iter().zip(&gamma).map(|(b, g)| b - g).collect();
            let term = binom(&beta, &gamma) * a.extract_partial(&gamma).unwrap() * b.extract_partial(&rest).unwrap();
            rhs += term;
            scale += term.abs();
        }
        if (lhs - rhs).abs() > 1e-12 * scale.max(1.0) {
            return Err(format!("beta {beta:?}: {lhs} vs {rhs}"));
        }
    }
    Ok(())
}

pub fn random_jet(rng: &mut impl Rng) -> (Jet, Jet) {
    let nv = rng.gen_range(1..=4);
    let ord = rng.gen_range(0..=4);
    let len = fminlab::jet::coeff_count(nv, ord);
    let mut draw = || -> Vec<f64> { (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect() };
    let (ca, cb) = (draw(), draw());
    (Jet::from_coeffs(nv, ord, &ca).unwrap(), Jet::from_coeffs(nv, ord, &cb).unwrap())
}

/// A composition exercising every elementary function.
pub fn probe<S: Scalar>(u: &[S], k: &[f64; 6]) -> S {
    let n = u.len();
    let x = u[0].clone();
    let y = u[1.min(n - 1)].clone();
    let z = u[n - 1].clone();
    let a = (x.clone() * y.clone() * k[0]).sin();
    let b = (z.clone() * k[1] + y.clone() * k[2]).cos() * x.clone();
    let c = ((x.clone() * k[3]).exp() + y.square() + 1.0).ln().unwrap();
    let d = (z.square() + 2.0).sqrt().unwrap() * (y.clone() + 3.0).powf(k[4]).unwrap();
    let e = (x.clone() + 4.0).checked_div(&(z * k[5] + 3.0)).unwrap();
    a + b + c * d + e
}

/// Nested central differences for `∂^β`.
pub fn central(u0: &[f64], beta: &[usize], h: f64, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    match beta.iter().position(|&b| b > 0) {
        None => f(u0),
        Some(i) => {
            let mut lower = beta.to_vec();
            lower[i] -= 1;
            let mut up = u0.to_vec();
            let mut dn = u0.to_vec();
            up[i] += h;
            dn[i] -= h;
            (central(&up, &lower, h, f) - central(&dn, &lower, h, f)) / (2.0 * h)
        }
    }
}

/// One random partial of a random composition against finite differences:
/// step 1e-4 and tolerance 1e-6 up to order 2, step 1e-2 and tolerance 1e-3
/// for orders 3 and 4.
pub fn finite_difference_case(rng: &mut impl Rng) -> Result<(), String> {
    let nv = rng.gen_range(1..=4);
    let u0: Vec<f64> = (0..nv).map(|_| rng.gen_range(-0.8..0.8)).collect();
    let k: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let jets: Vec<Jet> = (0..nv).map(|i| Jet::variable(u0[i], i, nv, 4).unwrap()).collect();
    let jet = probe(&jets, &k);
    let plain = |u: &[f64]| probe(u, &k);
    let all = jet.multi_indices();
    let beta = &all[rng.gen_range(1..all.len())];
    let deg: usize = beta.iter().sum();
    let exact = jet.extract_partial(beta).unwrap();
    let (h, tol) = if deg <= 2 { (1e-4, 1e-6) } else { (1e-2, 1e-3) };
    let fd = if deg <= 2 {
        central(&u0, beta, h, &plain)
    } else {
        // nested differences carry an O(h²) bias; extrapolate it away
        (4.0 * central(&u0, beta, h / 2.0, &plain) - central(&u0, beta, h, &plain)) / 3.0
    };
    if (exact - fd).abs() <= tol * (1.0 + exact.abs()) {
        Ok(())
    } else {
        Err(format!("beta {beta:?} at {u0:?}: jet {exact} vs fd {fd}"))
    }
}
