//! The `pmcurve` command line.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage or input error, 3 solver error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{self, EtaAccumulator};
use crate::curve::{CurveState, Geometry, ProfileCurve, SingularEventKind, SolverConfig};
use crate::engine::{extend, sweep, RunSpec};
use crate::error::SolverError;
use crate::hfield::{periodicity_defect, Extrapolation, HField, Interpolation};
use crate::output::{self, EventRecord};
use crate::report::CheckReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pmcurve", version, about = "Profile curves with prescribed mean curvature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a profile curve across singular contacts and write CSV + events JSON.
    Extend(ExtendArgs),
    /// Run a verification suite and write a JSON report.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Render a curve CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum GeometryArg {
    Rot,
    Lm,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    #[arg(long, value_enum)]
    geometry: GeometryArg,
    /// Ambient dimension of the rotational case
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    l: u32,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Mean curvature as JSON, or @path to a JSON file
    #[arg(long = "H", value_name = "JSON")]
    h: String,
    /// x,y,xp,yp or s,x,y,xp,yp
    #[arg(long, allow_hyphen_values = true)]
    init: String,
    /// a,b
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long)]
    out: PathBuf,
    /// Output spacing in arc length; 0 keeps every solver node
    #[arg(long, default_value_t = 0.01)]
    sample_ds: f64,
    /// Solver configuration JSON file; missing keys take defaults
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Positivity of the normalized curves (three reference configurations by default).
    Thm31(PositivityArgs),
    /// Convergence bound for the family through (0, c).
    Thm32(FamilyArgs),
    /// Decay rate of the K-th order expansion remainder.
    Thm33(ScalingArgs),
    /// Limiting slope at an origin passage.
    Prop43(OriginArgs),
    /// Closedness integrals of the limit curve over one period.
    Periods(PeriodArgs),
}

#[derive(Debug, Args)]
struct CommonOut {
    /// Report path; the report is also printed to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PositivityArgs {
    #[arg(long = "H", value_name = "JSON")]
    h: Option<String>,
    #[arg(long, requires = "h")]
    n: Option<u32>,
    #[arg(long, requires = "h")]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value = "-4,4")]
    s_span: String,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long = "H", value_name = "JSON", default_value = r#"{"kind":"constant","value":1.0}"#)]
    h: String,
    #[arg(long, default_value = "4,8,16")]
    c: String,
    #[arg(long, allow_hyphen_values = true, default_value = "-2,2")]
    s_range: String,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[arg(long = "K", value_name = "K")]
    k: usize,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Debug, Args)]
struct OriginArgs {
    #[arg(long)]
    l: u32,
    #[arg(long)]
    m: u32,
    #[arg(long = "H", value_name = "JSON", default_value = r#"{"kind":"constant","value":0.0}"#)]
    h: String,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Debug, Args)]
struct PeriodArgs {
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long = "H", value_name = "JSON", default_value = r#"{"kind":"constant","value":1.0}"#)]
    h: String,
    /// Period length
    #[arg(long = "L", value_name = "L", default_value_t = std::f64::consts::PI)]
    l: f64,
    /// Tolerance on the closedness integrals
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Events JSON; defaults to <stem>.events.json next to the CSV
    #[arg(long)]
    events: Option<PathBuf>,
    /// Overlay Gamma_inf + (0, c)
    #[arg(long, requires_all = ["h", "c"])]
    overlay_gamma_inf: bool,
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long = "H", value_name = "JSON")]
    h: Option<String>,
    #[arg(long)]
    c: Option<f64>,
}

/// Replayable record of an extension run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// Runs are seed-free; same spec and build give byte-identical output.
    pub deterministic: bool,
    pub spec: RunSpec,
    pub outputs: ManifestOutputs,
}

#[derive(Debug, Serialize)]
pub struct ManifestOutputs {
    pub csv: PathBuf,
    pub events: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e.root() {
            SolverError::InvalidInput(_) | SolverError::UnsupportedOrder(_) => EXIT_USAGE,
            _ => EXIT_SOLVER,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Extend(a) => cmd_extend(&a),
        Command::Verify(v) => cmd_verify(v),
        Command::Plot(a) => cmd_plot(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn parse_list(text: &str, what: &str) -> std::result::Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Failure::usage(format!("{what}: cannot parse '{t}': {e}")))
        })
        .collect()
}

fn parse_pair(text: &str, what: &str) -> std::result::Result<(f64, f64), Failure> {
    match parse_list(text, what)?.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        [_, _] => Err(Failure::usage(format!("{what}: expected a < b"))),
        _ => Err(Failure::usage(format!("{what}: expected two comma-separated numbers"))),
    }
}

fn parse_h(text: &str) -> std::result::Result<HField, Failure> {
    let json = match text.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("--H: cannot read {path}: {e}")))?,
        None => text.to_string(),
    };
    HField::from_json(&json).map_err(|e| Failure::usage(format!("--H: {e}")))
}

fn parse_init(text: &str) -> std::result::Result<CurveState, Failure> {
    let v = parse_list(text, "--init")?;
    let st = match v.as_slice() {
        [x, y, xp, yp] => CurveState::new(0.0, *x, *y, *xp, *yp),
        [s, x, y, xp, yp] => CurveState::new(*s, *x, *y, *xp, *yp),
        _ => return Err(Failure::usage("--init: expected x,y,xp,yp or s,x,y,xp,yp")),
    };
    // tolerate rounding in hand-typed tangents, nothing more
    if st.speed_defect() > 1e-6 {
        return Err(Failure::usage(format!(
            "--init: tangent is not unit length (|t|^2 - 1 = {:e})",
            st.speed_defect()
        )));
    }
    Ok(st.renormalized())
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn cmd_extend(a: &ExtendArgs) -> CliResult {
    let geometry = match a.geometry {
        GeometryArg::Rot => Geometry::Rot { n: a.n },
        GeometryArg::Lm => Geometry::Product { l: a.l, m: a.m },
    };
    let cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::usage(format!("--config: {e}")))?;
            serde_json::from_str::<SolverConfig>(&text)
                .map_err(|e| Failure::usage(format!("--config: {e}")))?
        }
        None => SolverConfig::default(),
    };
    let spec = RunSpec {
        geometry,
        h: parse_h(&a.h)?,
        initial: parse_init(&a.init)?,
        s_window: parse_pair(&a.window, "--window")?,
        cfg,
        sample_ds: a.sample_ds,
    };
    let curve = extend(&spec)?;
    let events_path = sibling(&a.out, "events.json");
    write_file(&a.out, &output::curve_to_csv(&curve))?;
    let records = output::event_records(&curve);
    write_file(&events_path, &(to_json(&records) + "\n"))?;
    let manifest = RunManifest {
        tool: "pmcurve",
        version: env!("CARGO_PKG_VERSION"),
        deterministic: true,
        spec,
        outputs: ManifestOutputs { csv: a.out.clone(), events: events_path },
    };
    write_file(&sibling(&a.out, "manifest.json"), &(to_json(&manifest) + "\n"))?;
    println!(
        "{} samples, {} events -> {}",
        curve.samples().count(),
        records.len(),
        a.out.display()
    );
    Ok(EXIT_OK)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}

fn emit(reports: &[CheckReport], out: &Option<PathBuf>) -> CliResult {
    let text = if reports.len() == 1 {
        reports[0].to_json_pretty()
    } else {
        to_json(&reports)
    };
    println!("{text}");
    if let Some(p) = out {
        write_file(p, &text)?;
    }
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_verify(v: VerifyCommand) -> CliResult {
    match v {
        VerifyCommand::Thm31(a) => verify_positivity(&a),
        VerifyCommand::Thm32(a) => {
            let (acc, family) = family_run(&a)?;
            let r = asymptotics::check_convergence_bound(&family, &acc, parse_pair(&a.s_range, "--s-range")?, a.step)?;
            emit(&[r], &a.out.out)
        }
        VerifyCommand::Thm33(a) => {
            let (acc, family) = family_run(&a.family)?;
            let range = parse_pair(&a.family.s_range, "--s-range")?;
            let r = asymptotics::check_expansion_scaling(&family, &acc, a.k, range, a.family.step)?;
            emit(&[r], &a.family.out.out)
        }
        VerifyCommand::Prop43(a) => verify_origin(&a),
        VerifyCommand::Periods(a) => verify_periods(&a),
    }
}

/// The reference configurations: one per hypothesis of the positivity theorem and its remark.
pub fn positivity_configs() -> Vec<(HField, f64, u32)> {
    vec![
        (HField::constant(1.0), 2.0, 3),
        (HField::polynomial(vec![1.0, 0.0, 1.0]), 1.5, 4),
        (lorentzian(), 0.5, 3),
    ]
}

/// `1 / (1 + s^2)` on a cubic spline with spacing 0.01 over `[-8, 8]`.
pub fn lorentzian() -> HField {
    let pts: Vec<(f64, f64)> = (0..=1600)
        .map(|i| {
            let s = -8.0 + 0.01 * i as f64;
            (s, 1.0 / (1.0 + s * s))
        })
        .collect();
    HField::table(&pts, Interpolation::Cubic, Extrapolation::Clamp).expect("valid table")
}

fn verify_positivity(a: &PositivityArgs) -> CliResult {
    let span = parse_pair(&a.s_span, "--s-span")?;
    let configs = match &a.h {
        Some(h) => vec![(
            parse_h(h)?,
            a.c.ok_or_else(|| Failure::usage("--c is required with --H"))?,
            a.n.unwrap_or(3),
        )],
        None => positivity_configs(),
    };
    let cfg = SolverConfig::default();
    let reports = configs
        .iter()
        .map(|(h, c, n)| asymptotics::check_positivity(h, *c, *n, span, &cfg))
        .collect::<crate::Result<Vec<_>>>()?;
    emit(&reports, &a.out.out)
}

fn family_run(a: &FamilyArgs) -> std::result::Result<(EtaAccumulator, Vec<(f64, ProfileCurve)>), Failure> {
    let h = parse_h(&a.h)?;
    let cs = parse_list(&a.c, "--c")?;
    let range = parse_pair(&a.s_range, "--s-range")?;
    if !(a.step > 0.0) {
        return Err(Failure::usage("--step must be positive"));
    }
    let family = run_family(&h, a.n, &cs, range, a.step)?;
    Ok((EtaAccumulator::new(h, a.n), family))
}

/// Extends the normalized curves through `(0, c)` over `range`, sampled exactly at the
/// check grid so no interpolation enters the comparison.
pub fn run_family(
    h: &HField,
    n: u32,
    cs: &[f64],
    range: (f64, f64),
    step: f64,
) -> crate::Result<Vec<(f64, ProfileCurve)>> {
    let mut template = RunSpec::new(Geometry::Rot { n }, h.clone(), CurveState::new(0.0, 0.0, 1.0, 1.0, 0.0), range);
    template.sample_ds = step;
    sweep(&template, cs)
        .into_iter()
        .map(|(c, r)| r.map(|curve| (c, curve)).map_err(|e| e.at(c)))
        .collect()
}

/// Inbound ray of the minimal cone, unit distance from the origin.
pub fn cone_ray(l: u32, m: u32) -> CurveState {
    let t = (l + m) as f64;
    let (x, y) = ((l as f64 / t).sqrt(), (m as f64 / t).sqrt());
    CurveState::new(0.0, x, y, -x, -y)
}

fn verify_origin(a: &OriginArgs) -> CliResult {
    let h = parse_h(&a.h)?;
    let spec = RunSpec::new(Geometry::Product { l: a.l, m: a.m }, h, cone_ray(a.l, a.m), (0.0, 2.0));
    spec.validate()?;
    let curve = extend(&spec)?;
    let target = a.l as f64 / (a.l + a.m) as f64;
    let origin = curve.events.iter().find(|e| e.kind == SingularEventKind::OriginContact);
    let observed = origin.map(|e| e.incoming_slope_sq);
    let pass = observed.is_some_and(|s| (s - target).abs() <= crate::integrator::SLOPE_LIMIT_TOL);
    let mut notes = Vec::new();
    if origin.is_none() {
        notes.push("no origin contact inside the window".to_string());
    }
    let r = CheckReport {
        check: "origin_slope".into(),
        params: json!({"l": a.l, "m": a.m, "H": spec.h, "init": spec.initial}),
        observed: json!({"slope_sq": observed, "events": output::event_records(&curve)}),
        bound_or_expected: json!({"slope_sq": target, "tolerance": crate::integrator::SLOPE_LIMIT_TOL}),
        pass,
        notes,
    };
    emit(&[r], &a.out.out)
}

fn verify_periods(a: &PeriodArgs) -> CliResult {
    if !(a.l > 0.0) {
        return Err(Failure::usage("--L must be positive"));
    }
    let h = parse_h(&a.h)?;
    let acc = EtaAccumulator::new(h.clone(), a.n);
    let d = asymptotics::period_diagnostics(&acc, a.l);
    let defect = periodicity_defect(&h, a.l, -a.l, a.l, 400);
    let closes = d.int_cos.abs() <= a.tol && d.int_sin.abs() <= a.tol;
    let mut notes = Vec::new();
    if defect > 1e-9 {
        notes.push(format!("H is not L-periodic on [-L, L] (defect {defect:e})"));
    }
    let r = CheckReport {
        check: "period_diagnostics".into(),
        params: json!({"n": a.n, "H": h, "L": a.l}),
        observed: json!({"diagnostics": d, "periodicity_defect": defect}),
        bound_or_expected: json!({"int_cos": 0.0, "int_sin": 0.0, "tolerance": a.tol}),
        pass: closes,
        notes,
    };
    emit(&[r], &a.out.out)
}

fn cmd_plot(a: &PlotArgs) -> CliResult {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", a.input.display())))?;
    let rows = output::parse_csv(&text).map_err(Failure::usage)?;
    let events_path = a.events.clone().unwrap_or_else(|| sibling(&a.input, "events.json"));
    let events: Vec<EventRecord> = match fs::read_to_string(&events_path) {
        Ok(t) => serde_json::from_str(&t)
            .map_err(|e| Failure::usage(format!("{}: {e}", events_path.display())))?,
        Err(_) if a.events.is_none() => Vec::new(),
        Err(e) => return Err(Failure::usage(format!("{}: {e}", events_path.display()))),
    };
    let overlay = if a.overlay_gamma_inf {
        let h = parse_h(a.h.as_deref().unwrap_or_default())?;
        let c = a.c.unwrap_or_default();
        let acc = EtaAccumulator::new(h, a.n);
        let (s0, s1) = (rows[0].s, rows[rows.len() - 1].s);
        let k = 400;
        Some(
            (0..=k)
                .map(|i| {
                    let s = s0 + (s1 - s0) * i as f64 / k as f64;
                    let (x, y) = acc.gamma_infinity(s);
                    (x, y + c)
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    write_file(&a.out, &output::render_svg(&rows, &events, overlay.as_deref()))?;
    println!("{} samples, {} events -> {}", rows.len(), events.len(), a.out.display());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_renormalizes_small_defects_only() {
        let st = parse_init("1,1,-0.70710678,-0.70710678").unwrap();
        assert!(st.speed_defect() < 1e-15);
        assert_eq!(parse_init("1,1,1,1").unwrap_err().code, EXIT_USAGE);
        assert_eq!(parse_init("1,2,3").unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn pairs_need_order() {
        assert_eq!(parse_pair("-2,2", "w").unwrap(), (-2.0, 2.0));
        assert!(parse_pair("2,-2", "w").is_err());
    }

    #[test]
    fn missing_h_is_usage_error() {
        let code = run(["pmcurve", "extend", "--geometry", "rot", "--init", "0,1,1,0", "--window", "0,1", "--out", "x.csv"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn cone_ray_points_at_origin() {
        let st = cone_ray(1, 2);
        assert!(st.speed_defect() < 1e-15);
        assert!((st.x * st.yp - st.y * st.xp).abs() < 1e-15);
        assert!((st.xp * st.xp - 1.0 / 3.0).abs() < 1e-15);
    }
}
