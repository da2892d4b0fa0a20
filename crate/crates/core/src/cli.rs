//! Command-line front end: argument parsing, config merging, report
//! assembly and exit codes.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ambient::AmbientModel;
use crate::charts::{build_chart, default_model};
use crate::error::{Error, Result};
use crate::identities::{check_compatible, check_fminimal, check_identity_unchecked, list_identities, IdentityId, ALL_IDENTITIES};
use crate::operators::ScalarField;
use crate::rotsym::{self, band_verdict, uniform_band, shoot_closed, ProfileCurve, ProfileState, ShootConfig, ShootOutcome};
use crate::sampling::halton_points;
use crate::spectral::{self, lf_index, slice_spectrum_closed_form, sturm_liouville_spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for an error escaping a run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Parse(_) | Error::Capability(_) | Error::Io(_) => EXIT_USAGE,
        Error::Precondition(_) | Error::IncompleteSpectrum(_) => EXIT_CHECK_FAILED,
        Error::Singularity(_) | Error::Geometry(_) | Error::Integration(_) | Error::Numeric(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(name = "fminlab", version, about = "Verification engine for f-minimal hypersurfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON file with default values for any knob; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Additional CSV summary.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Leave the timestamp out of reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check identities pointwise on a surface.
    Verify(Knobs),
    /// Spectrum and index of the stability operator.
    Spectrum(Knobs),
    /// Generate a rotational profile by shooting or plain integration.
    Generate(GenerateArgs),
    /// Integral identities, weighted volume and band verdict of a closed profile.
    Integrals(Knobs),
    /// Identity catalog and closed-form reference data.
    Report(Knobs),
}

/// Numeric knobs shared by all subcommands; each may also come from the
/// config file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Knobs {
    /// Chart name (slice, equator-cylinder, shrinker-sphere, shrinker-cylinder, graph:<file>, profile:<file>).
    #[arg(long)]
    pub surface: Option<String>,
    /// Profile file, shorthand for `--surface profile:<file>`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Hypersurface dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Ambient model, e.g. `cylinder:3` or `cylinder:3:2.5`.
    #[arg(long)]
    pub model: Option<String>,
    /// `all` or a comma-separated list of identity ids.
    #[arg(long)]
    pub identity: Option<String>,
    /// Sample points per identity (default 100)
    #[arg(long)]
    pub samples: Option<usize>,
    /// Check tolerance (default 1e-8 for verify, 1e-6 otherwise)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Cells per mode in the spectral discretization (default 2000)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Integration step (default a·1e-3)
    #[arg(long)]
    pub step: Option<f64>,
    /// Highest orbit mode (defaults to kmax)
    #[arg(long = "mmax")]
    #[serde(alias = "m_max")]
    pub m_max: Option<usize>,
    /// Highest closed-form level compared or reported (default 10)
    #[arg(long = "kmax")]
    #[serde(alias = "k_max")]
    pub k_max: Option<usize>,
    /// Seed of the sample-point shift (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Launch height for shooting.
    #[arg(long)]
    pub tstart: Option<f64>,
    #[arg(skip)]
    #[serde(rename = "format")]
    pub file_format: Option<Format>,
    #[arg(skip)]
    #[serde(rename = "out")]
    pub file_out: Option<PathBuf>,
    #[arg(skip)]
    #[serde(rename = "no-timestamp")]
    pub file_no_timestamp: Option<bool>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub knobs: Knobs,
    /// Shoot from the pole for a closed profile.
    #[arg(long)]
    pub shoot: bool,
    /// Interior start `rho,t,theta` for an open arc.
    #[arg(long, conflicts_with = "shoot")]
    pub initial: Option<String>,
    /// Arc length for `--initial`.
    #[arg(long)]
    pub length: Option<f64>,
}

impl Knobs {
    fn merged(self, file: &Knobs) -> Knobs {
        macro_rules! pick {
            ($($f:ident),*) => { Knobs { $($f: self.$f.or_else(|| file.$f.clone()),)* } };
        }
        pick!(
            surface, profile, n, model, identity, samples, tol, grid, step, m_max, k_max, seed, tstart,
            file_format, file_out, file_no_timestamp
        )
    }

    fn positive(&self, v: Option<f64>, name: &str, default: f64) -> Result<f64> {
        let v = v.unwrap_or(default);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Argument(format!("--{name} must be positive, got {v}")))
        }
    }

    fn tol(&self, default: f64) -> Result<f64> {
        self.positive(self.tol, "tol", default)
    }

    fn surface_name(&self) -> Result<String> {
        match (&self.surface, &self.profile) {
            (Some(_), Some(_)) => Err(Error::Argument("give either --surface or --profile".into())),
            (Some(s), None) => Ok(s.clone()),
            (None, Some(p)) => Ok(format!("profile:{}", p.display())),
            (None, None) => Err(Error::Argument("missing --surface".into())),
        }
    }

    fn model_for(&self, surface: &str) -> Result<AmbientModel> {
        if let Some(m) = &self.model {
            let model: AmbientModel = m.parse()?;
            if let Some(n) = self.n {
                if n != model.n {
                    return Err(Error::Argument(format!("--n {n} disagrees with --model {m}")));
                }
            }
            return Ok(model);
        }
        default_model(surface, self.n.unwrap_or(2))
    }

    fn identities(&self) -> Result<Vec<IdentityId>> {
        let sel = self.identity.as_deref().unwrap_or("all");
        if sel.eq_ignore_ascii_case("all") {
            return Ok(ALL_IDENTITIES.to_vec());
        }
        sel.split(',').map(|s| s.trim().parse()).collect()
    }
}

struct Output {
    value: Value,
    csv: Option<String>,
    pass: bool,
}

struct Env {
    out: Option<PathBuf>,
    format: Format,
    csv: Option<PathBuf>,
    timestamp: bool,
}

/// Parses `args`, runs, and returns the exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("fminlab: {e}");
        return exit_code(&e);
    }
    match run(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("fminlab: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("FMINLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Argument(format!("FMINLAB_THREADS must be a positive integer, got '{v}'")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<Knobs> {
    let Some(path) = path else { return Ok(Knobs::default()) };
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&src).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
}

/// Runs a parsed command; `Ok(false)` means a check failed.
pub fn run(cli: Cli) -> Result<bool> {
    let file = load_config(cli.config.as_deref())?;
    let (knobs, generate) = match &cli.command {
        Command::Generate(g) => (g.knobs.clone().merged(&file), Some(g)),
        Command::Verify(k) | Command::Spectrum(k) | Command::Integrals(k) | Command::Report(k) => {
            (k.clone().merged(&file), None)
        }
    };
    let env = Env {
        out: cli.out.clone().or(knobs.file_out.clone()),
        format: cli.format.or(knobs.file_format).unwrap_or(Format::Json),
        csv: cli.csv.clone(),
        timestamp: !(cli.no_timestamp || knobs.file_no_timestamp.unwrap_or(false)),
    };
    if let Some(g) = generate {
        return generate_profile(&knobs, g, &env);
    }
    let output = match &cli.command {
        Command::Verify(_) => verify(&knobs)?,
        Command::Spectrum(_) => spectrum(&knobs)?,
        Command::Integrals(_) => integrals(&knobs)?,
        Command::Report(_) => report(&knobs)?,
        Command::Generate(_) => unreachable!("handled above"),
    };
    emit(&env, output)
}

fn emit(env: &Env, mut output: Output) -> Result<bool> {
    if env.timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        output.value["generated_at"] = json!(secs);
    }
    output.value["pass"] = json!(output.pass);
    let body = match env.format {
        Format::Json => serde_json::to_string_pretty(&output.value)? + "\n",
        Format::Csv => output
            .csv
            .clone()
            .ok_or_else(|| Error::Argument("this command has no CSV form".into()))?,
    };
    match &env.out {
        Some(p) => write_atomic(p, &body)?,
        None => write_stdout(&body)?,
    }
    if let Some(p) = &env.csv {
        let csv = output.csv.as_ref().ok_or_else(|| Error::Argument("this command has no CSV form".into()))?;
        write_atomic(p, csv)?;
    }
    Ok(output.pass)
}

/// A reader closing the pipe early is not an error.
fn write_stdout(body: &str) -> Result<()> {
    use std::io::{ErrorKind, Write};
    let mut out = std::io::stdout().lock();
    match out.write_all(body.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Error::Io(format!("cannot write to stdout: {e}"))),
        _ => Ok(()),
    }
}

/// Writes through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Argument(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, body).map_err(|e| Error::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(format!("cannot move report into {}: {e}", path.display()))
    })
}

fn verify(k: &Knobs) -> Result<Output> {
    let surface = k.surface_name()?;
    let ids = k.identities()?;
    let tol = k.tol(1e-8)?;
    let samples = k.samples.unwrap_or(100);
    if samples == 0 {
        return Err(Error::Argument("--samples must be at least 1".into()));
    }
    let model = k.model_for(&surface)?;
    let chart = build_chart(&surface, model.n, Some(model))?;
    let model = *chart.model();
    let points = halton_points(&chart.domain(), samples, k.seed.unwrap_or(0));

    let fmin = check_fminimal(chart.as_ref(), &points);
    let mut rows = Vec::new();
    let mut csv = String::from("identity,status,max_residual,tolerance\n");
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for id in ids {
        let entry = id.entry();
        let mut row = json!({ "identity": id, "anchor": entry.anchor });
        let status = if let Err(e) = check_compatible(id, &model) {
            skipped += 1;
            row["reason"] = json!(e.to_string());
            "skipped"
        } else if let Err(e) = &fmin {
            failed += 1;
            row["reason"] = json!(e.to_string());
            "fail"
        } else {
            let rep = check_identity_unchecked(id, chart.as_ref(), &points, tol, entry.jet_order)?;
            row["max_residual"] = json!(rep.max_residual);
            row["samples"] = serde_json::to_value(&rep.samples)?;
            if rep.pass {
                passed += 1;
                "pass"
            } else {
                failed += 1;
                let worst = rep.samples.iter().max_by(|a, b| a.residual.total_cmp(&b.residual));
                if let Some(w) = worst {
                    row["reason"] = json!(format!(
                        "{id} on {}: residual {:.3e} at u = {:?}",
                        chart.label(),
                        w.residual,
                        w.u
                    ));
                }
                "fail"
            }
        };
        row["status"] = json!(status);
        csv.push_str(&format!(
            "{},{},{},{}\n",
            id,
            status,
            row.get("max_residual").and_then(Value::as_f64).map_or(String::new(), |r| format!("{r:.3e}")),
            tol
        ));
        rows.push(row);
    }
    let value = json!({
        "command": "verify",
        "surface": chart.label(),
        "model": model.to_string(),
        "samples": samples,
        "seed": k.seed.unwrap_or(0),
        "tolerance": tol,
        "identities": rows,
        "summary": { "checked": passed + failed, "passed": passed, "failed": failed, "skipped": skipped },
    });
    Ok(Output { value, csv: Some(csv), pass: failed == 0 })
}

/// A closed profile from a surface name: the slice is rebuilt by shooting.
fn closed_profile(k: &Knobs, surface: &str) -> Result<(ProfileCurve, bool)> {
    if surface == "slice" {
        let model = k.model_for(surface)?;
        let step = k.step.map(|s| k.positive(Some(s), "step", s)).transpose()?;
        return Ok((rotsym::slice_profile(&model, step)?, true));
    }
    if let Some(path) = surface.strip_prefix("profile:") {
        let p = ProfileCurve::load(Path::new(path))?;
        let is_slice = rotsym::shoot::distance_to_slice(&p) <= SLICE_DISTANCE;
        return Ok((p, is_slice));
    }
    Err(Error::Argument(format!("'{surface}' is not a rotational surface; use slice or profile:<file>")))
}

/// Sample distance below which a profile counts as the slice.
pub const SLICE_DISTANCE: f64 = 1e-3;

fn spectrum(k: &Knobs) -> Result<Output> {
    let surface = k.surface_name()?;
    let tol = k.tol(1e-6)?;
    let k_max = k.k_max.unwrap_or(10);
    let m_max = k.m_max.unwrap_or(k_max);
    let grid = k.grid.unwrap_or(2000);
    let (profile, is_slice) = closed_profile(k, &surface)?;
    let n = profile.model().n;
    let computed = sturm_liouville_spectrum(&profile, m_max, grid)?;
    let mut checks = Vec::new();
    let index = lf_index(&computed);
    checks.push(json!({
        "name": "spectrum-complete",
        "pass": index.is_ok(),
        "detail": index.as_ref().err().map(|e| e.to_string()),
    }));
    let mut value = json!({
        "command": "spectrum",
        "surface": surface,
        "model": profile.model().to_string(),
        "grid": grid,
        "m_max": m_max,
        "convention": spectral::CONVENTION,
        "index": computed.index,
        "complete": computed.complete,
        "eigenvalues": computed.eigenvalues,
    });
    if is_slice && surface == "slice" {
        let exact = slice_spectrum_closed_form(n, k_max)?;
        let mut worst: f64 = 0.0;
        for e in computed.eigenvalues.iter().filter(|e| e.mode + e.level <= k_max) {
            let mu = exact.eigenvalues[e.mode + e.level].mu;
            worst = worst.max((e.mu - mu).abs());
        }
        checks.push(json!({ "name": "closed-form", "pass": worst <= tol, "max_deviation": worst, "tolerance": tol }));
        checks.push(json!({ "name": "index-one", "pass": computed.index == 1 }));
        value["closed_form"] = serde_json::to_value(&exact.eigenvalues)?;
    } else {
        checks.push(json!({ "name": "index-at-least-one", "pass": computed.index >= 1 }));
        if !is_slice && computed.index == 1 {
            checks.push(json!({ "name": "index-one-characterization", "pass": false, "detail": "CONTRADICTION: non-slice profile of index one" }));
        }
    }
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    value["checks"] = json!(checks);
    Ok(Output { value, csv: Some(computed.to_csv()), pass })
}

fn integrals(k: &Knobs) -> Result<Output> {
    let surface = k.surface_name()?;
    let tol = k.tol(1e-6)?;
    let (profile, is_slice) = closed_profile(k, &surface)?;
    let n = profile.model().n;
    let res = rotsym::lemA_residuals(&profile)?;
    let volume = rotsym::weighted_volume(&profile)?;
    let mut div = serde_json::Map::new();
    let mut div_ok = true;
    for f in [ScalarField::Alpha, ScalarField::HeightT, ScalarField::FRestricted] {
        let v = rotsym::integrals::divergence_integral(&profile, &f)?;
        div_ok &= v.abs() <= tol;
        div.insert(f.to_string(), json!(v));
    }
    let rq = spectral::rayleigh_quotient(&profile, &ScalarField::Alpha)?;
    let rq_ok = (rq + 0.5).abs() <= 1e-8;
    let mut checks = vec![
        json!({ "name": "integral-identities", "pass": res.max() <= tol, "tolerance": tol }),
        json!({ "name": "divergence", "pass": div_ok, "tolerance": tol }),
        json!({ "name": "alpha-rayleigh", "pass": rq_ok, "value": rq }),
    ];
    let mut value = json!({
        "command": "integrals",
        "surface": surface,
        "model": profile.model().to_string(),
        "closure": profile.closure(),
        "weighted_volume": volume,
        "residuals": res,
        "divergence": div,
        "alpha_rayleigh_quotient": rq,
        "distance_to_slice": rotsym::shoot::distance_to_slice(&profile),
    });
    if n >= 3 {
        let verdict = band_verdict(&profile)?;
        let contradiction = !is_slice && verdict.inside_everywhere;
        checks.push(json!({
            "name": "pinching-band",
            "pass": !contradiction,
            "detail": contradiction.then_some("CONTRADICTION: non-slice profile inside the band"),
        }));
        value["band"] = serde_json::to_value(verdict)?;
    }
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    value["checks"] = json!(checks);
    let csv = format!("r1,r2,r3,weighted_volume,pass\n{:e},{:e},{:e},{},{}\n", res.r1, res.r2, res.r3, volume, pass);
    Ok(Output { value, csv: Some(csv), pass })
}

fn report(k: &Knobs) -> Result<Output> {
    let n = k.n.unwrap_or(3);
    let k_max = k.k_max.unwrap_or(10);
    let catalog: Vec<Value> = list_identities()
        .into_iter()
        .map(|e| json!({ "identity": e.id, "anchor": e.anchor, "model": format!("{:?}", e.model), "jet_order": e.jet_order }))
        .collect();
    let computed = slice_spectrum_closed_form(n, k_max)?;
    let mut value = json!({
        "command": "report",
        "n": n,
        "identities": catalog,
        "surfaces": crate::charts::CHART_NAMES,
        "slice_spectrum": computed,
    });
    if n >= 3 {
        let (lo, hi) = uniform_band(n)?;
        value["uniform_band"] = json!([lo, hi]);
    }
    let mut csv = String::from("identity,anchor\n");
    for e in list_identities() {
        csv.push_str(&format!("{},\"{}\"\n", e.id, e.anchor.replace('"', "'")));
    }
    Ok(Output { value, csv: Some(csv), pass: true })
}

fn generate_profile(k: &Knobs, g: &GenerateArgs, env: &Env) -> Result<bool> {
    let model = k.model_for("profile")?;
    if !model.is_cylinder() {
        return Err(Error::Argument("profiles need a cylinder model".into()));
    }
    let step = k.positive(k.step, "step", 1e-3 * model.a)?;
    let profile = if g.shoot {
        let cfg = ShootConfig { step: Some(step), ..ShootConfig::default() };
        match shoot_closed(k.tstart.unwrap_or(0.0), &model, &cfg)? {
            ShootOutcome::Closed(c) => c.profile,
            ShootOutcome::NotFound { trace } => {
                eprintln!("fminlab: no closed profile near t = {}", k.tstart.unwrap_or(0.0));
                eprintln!("{}", serde_json::to_string(&trace)?);
                return Ok(false);
            }
        }
    } else if let Some(init) = &g.initial {
        let v: Vec<f64> = init
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Argument(format!("--initial expects rho,t,theta, got '{init}'")))?;
        let [rho, t, theta] = v[..] else {
            return Err(Error::Argument(format!("--initial expects three values, got '{init}'")));
        };
        let length = k.positive(g.length, "length", std::f64::consts::PI * model.a)?;
        rotsym::integrate_profile(&model, ProfileState { rho, t, theta }, step, length)?
    } else {
        return Err(Error::Argument("generate needs --shoot or --initial".into()));
    };
    let body = profile.to_json()? + "\n";
    match &env.out {
        Some(p) => write_atomic(p, &body)?,
        None => write_stdout(&body)?,
    }
    Ok(true)
}
