//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use fminlab::ambient::AmbientModel;
use fminlab::charts::{EquatorCylinder, ShrinkerCylinder, ShrinkerSphere, Slice};
use fminlab::hypersurface::{fminimality_residual, ImmersionChart};
use fminlab::identities::{check_compatible, check_identity, ALL_IDENTITIES};
use fminlab::operators::ScalarField;
use fminlab::rotsym::integrals::max_fminimality;
use fminlab::rotsym::shoot::distance_to_slice;
use fminlab::rotsym::{
    band_verdict, uniform_band, integrate_profile, lemA_residuals, pinching_band, shoot_closed, weighted_volume,
    ProfileChart, ProfileCurve, ProfileState, ShootConfig, ShootOutcome,
};
use fminlab::sampling::halton_points;
use fminlab::spectral::{lf_index, rayleigh_quotient, slice_spectrum_closed_form, sturm_liouville_spectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn check(cond: bool, msg: String) -> Verdict {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn cyl(n: usize) -> AmbientModel {
    AmbientModel::cylinder(n).unwrap()
}

/// A closed profile found while shooting, tagged with its dimension.
struct Shot {
    n: usize,
    launch: f64,
    profile: ProfileCurve,
}

fn slice_spectrum() -> Verdict {
    let mut notes = Vec::new();
    for n in [2, 3] {
        let start = Instant::now();
        let slice = fminlab::rotsym::slice_profile(&cyl(n), None).map_err(|e| e.to_string())?;
        let computed = sturm_liouville_spectrum(&slice, 10, 2000).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let exact = slice_spectrum_closed_form(n, 10).unwrap();
        let clusters = computed.clusters(1e-5);
        let mut worst = 0.0f64;
        for e in &exact.eigenvalues {
            let Some(found) = clusters.iter().find(|(mu, _)| (mu - e.mu).abs() < 1e-3) else {
                return Err(format!("n={n}: no eigenvalue near {}", e.mu));
            };
            if found.1 != e.multiplicity {
                return Err(format!("n={n}, k={}: multiplicity {} vs {}", e.mode, found.1, e.multiplicity));
            }
            worst = worst.max((found.0 - e.mu).abs());
        }
        let index = lf_index(&computed).map_err(|e| e.to_string())?;
        if worst > 1e-6 || index != 1 || secs >= 10.0 {
            return Err(format!("n={n}: max error {worst:.1e}, index {index}, {secs:.1}s"));
        }
        notes.push(format!("n={n}: max error {worst:.1e}, index {index}, {secs:.1}s"));
    }
    Ok(notes.join("; "))
}

fn identity_suite() -> Verdict {
    let start = Instant::now();
    let charts: Vec<Box<dyn ImmersionChart>> = vec![
        Box::new(Slice::new(cyl(2), 0.0).unwrap()),
        Box::new(Slice::new(cyl(3), 0.0).unwrap()),
        Box::new(EquatorCylinder::new(cyl(2)).unwrap()),
        Box::new(EquatorCylinder::new(cyl(3)).unwrap()),
        Box::new(ShrinkerSphere::new(AmbientModel::gaussian(2).unwrap()).unwrap()),
        Box::new(ShrinkerSphere::new(AmbientModel::gaussian(3).unwrap()).unwrap()),
        Box::new(ShrinkerCylinder::new(AmbientModel::gaussian(2).unwrap()).unwrap()),
    ];
    let mut runs = 0;
    let mut worst = 0.0f64;
    let mut covered = std::collections::BTreeSet::new();
    for chart in &charts {
        let pts = halton_points(&chart.domain(), 100, 0);
        for id in ALL_IDENTITIES {
            if check_compatible(id, chart.model()).is_err() {
                continue;
            }
            let r = check_identity(id, chart.as_ref(), &pts, 1e-8).map_err(|e| format!("{id} on {}: {e}", chart.label()))?;
            if !r.pass {
                return Err(format!("{id} on {}: residual {:.2e}", chart.label(), r.max_residual));
            }
            worst = worst.max(r.max_residual);
            covered.insert(id.name());
            runs += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        covered.len() == ALL_IDENTITIES.len() && secs < 60.0,
        format!("{runs} runs over {} charts, {} identities, max residual {worst:.1e}, {secs:.1}s", charts.len(), covered.len()),
    )
}

fn alpha_eigenfunction(shots: &[Shot]) -> Verdict {
    let mut worst = 0.0f64;
    for s in shots {
        let q = rayleigh_quotient(&s.profile, &ScalarField::Alpha).map_err(|e| e.to_string())?;
        worst = worst.max((q + 0.5).abs());
    }
    check(worst <= 1e-8, format!("{} closed profiles, max |Q(α) + 1/2| = {worst:.1e}", shots.len()))
}

fn integral_identities(shots: &[Shot]) -> Verdict {
    let mut worst = 0.0f64;
    for s in shots {
        let r = lemA_residuals(&s.profile).map_err(|e| format!("n={} launch {}: {e}", s.n, s.launch))?;
        worst = worst.max(r.max());
    }
    check(worst <= 1e-6, format!("{} closed profiles, max residual {worst:.1e}", shots.len()))
}

fn band_logic() -> Verdict {
    let b = pinching_band(3, 0.5f64.sqrt()).map_err(|e| e.to_string())?;
    let collapse = (b.lo - 0.25).abs().max((b.hi - 0.25).abs());
    let (lo, hi) = uniform_band(5).map_err(|e| e.to_string())?;
    let cor = (lo - 0.25 * (1.0 - 0.5f64.sqrt())).abs().max((hi - 0.25 * (1.0 + 0.5f64.sqrt())).abs());
    let slice = fminlab::rotsym::slice_profile(&cyl(3), None).map_err(|e| e.to_string())?;
    let v = band_verdict(&slice).map_err(|e| e.to_string())?;
    let full = pinching_band(3, 1.0).unwrap();
    let ok = collapse <= 1e-12
        && cor <= 1e-12
        && v.inside_everywhere
        && v.a2_max == 0.0
        && full.lo.abs() <= 1e-15
        && (full.hi - 0.5).abs() <= 1e-15;
    check(
        ok,
        format!("collapse {collapse:.1e}, n=5 band [{lo:.5}, {hi:.5}], slice |A|² in [{}, {}] inside", v.a2_min, v.a2_max),
    )
}

fn ode_chart_coherence() -> Verdict {
    let mut worst_t = 0.0f64;
    let mut worst_chart = 0.0f64;
    let mut worst_profile = 0.0f64;
    for n in 2..=4 {
        let model = cyl(n);
        let p = integrate_profile(&model, ProfileState::axis(0.0), 1e-3 * model.a, PI * model.a)
            .map_err(|e| e.to_string())?;
        worst_t = worst_t.max(p.max_abs_height());
        let (hf, _) = max_fminimality(&p).map_err(|e| e.to_string())?;
        worst_profile = worst_profile.max(hf);
        let chart = ProfileChart::new(p).map_err(|e| e.to_string())?;
        let (lo, hi) = chart.s_range();
        for i in 0..=200 {
            let mut u = vec![lo + (hi - lo) * i as f64 / 200.0];
            u.extend(vec![0.7; n - 1]);
            worst_chart = worst_chart.max(fminimality_residual(&chart, &u).map_err(|e| e.to_string())?);
        }
    }
    let model = cyl(3);
    let start = ProfileState { rho: 1.1, t: 0.3, theta: -0.4 };
    let end = |h: f64| integrate_profile(&model, start, h, 1.6).map(|p| p.state(1.6));
    let (a, b, c) = (
        end(0.02).map_err(|e| e.to_string())?,
        end(0.01).map_err(|e| e.to_string())?,
        end(0.005).map_err(|e| e.to_string())?,
    );
    let diff = |x: &[f64; 3], y: &[f64; 3]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let ratio = diff(&a, &b) / diff(&b, &c);
    check(
        worst_t <= 1e-10 && worst_chart <= 1e-7 && worst_profile <= 1e-7 && (12.0..=20.0).contains(&ratio),
        format!(
            "max |t| {worst_t:.1e}, chart |H_f| {worst_chart:.1e}, profile |H_f| {worst_profile:.1e}, halving ratio {ratio:.2}"
        ),
    )
}

fn jet_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..common::CASES {
        let (a, b) = common::random_jet(&mut rng);
        common::leibniz_check(&a, &b).map_err(|e| format!("product rule case {case}: {e}"))?;
    }
    for case in 0..common::CASES {
        common::finite_difference_case(&mut rng).map_err(|e| format!("finite differences case {case}: {e}"))?;
    }
    Ok(format!("{} product-rule and {} finite-difference cases", common::CASES, common::CASES))
}

fn weighted_volume_check() -> Verdict {
    let slice = fminlab::rotsym::slice_profile(&cyl(2), None).map_err(|e| e.to_string())?;
    let v = weighted_volume(&slice).map_err(|e| e.to_string())?;
    check((v - 8.0 * PI).abs() <= 1e-8, format!("V_f = {v:.15}, error {:.1e}", (v - 8.0 * PI).abs()))
}

fn classification_probes(shots: &[Shot], scanned: usize) -> Verdict {
    let others: Vec<&Shot> = shots.iter().filter(|s| distance_to_slice(&s.profile) > 1e-3).collect();
    for s in &others {
        if s.n >= 3 {
            let v = band_verdict(&s.profile).map_err(|e| e.to_string())?;
            if v.inside_everywhere {
                return Err(format!("CONTRADICTION: n={} launch {} stays inside the pinching band", s.n, s.launch));
            }
        }
        let computed = sturm_liouville_spectrum(&s.profile, 10, 2000).map_err(|e| e.to_string())?;
        let index = lf_index(&computed).map_err(|e| e.to_string())?;
        if index < 2 {
            return Err(format!("CONTRADICTION: n={} launch {} has index {index}", s.n, s.launch));
        }
    }
    Ok(format!(
        "{scanned} shots, {} closed, {} away from the slice",
        shots.len(),
        others.len()
    ))
}

/// Shoots from every launch height in parallel and keeps the closed profiles.
fn sweep() -> (Vec<Shot>, usize) {
    let mut jobs = Vec::new();
    for n in 2..=4 {
        jobs.push((n, 0.0));
        for i in 1..=12 {
            jobs.push((n, 0.5 * i as f64));
        }
    }
    let shots = jobs
        .par_iter()
        .filter_map(|&(n, t)| match shoot_closed(t, &cyl(n), &ShootConfig::default()) {
            Ok(ShootOutcome::Closed(c)) => Some(Shot { n, launch: c.launch_height, profile: c.profile }),
            _ => None,
        })
        .collect();
    (shots, jobs.len())
}

fn main() {
    let (shots, scanned) = sweep();
    let criteria: Vec<Criterion> = vec![
        ("slice spectrum reproduction", Box::new(slice_spectrum)),
        ("identity residual suite", Box::new(identity_suite)),
        ("alpha eigenfunction", Box::new(|| alpha_eigenfunction(&shots))),
        ("integral identities", Box::new(|| integral_identities(&shots))),
        ("pinching band logic", Box::new(band_logic)),
        ("ODE and chart coherence", Box::new(ode_chart_coherence)),
        ("jet property suite", Box::new(jet_suite)),
        ("weighted volume", Box::new(weighted_volume_check)),
        ("classification probes", Box::new(|| classification_probes(&shots, scanned))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, msg) = match run() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {}: {tag} {name}: {msg}", i + 1);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
