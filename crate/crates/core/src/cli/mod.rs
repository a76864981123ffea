//! Command-line front end. [`run`] takes the argument list and output
//! streams so the binary and the tests drive the same code.
//!
//! Exit codes: `0` for a settled answer (and for `verify` when every check
//! passes), `2` when `analyze` returns `Undetermined`, `1` for errors and
//! failed checks.

pub mod ppm;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::cartan::{decide_cartan, CartanError, CartanVerdict, SpaceSelector};
use crate::dynamics::{
    classify_critical_points, escape_grid, Budget, Classifier, DynamicsError, Viewport, RENDER_MAX_ITER,
};
use crate::hilbert::{build_orbit_tree, run_identity_suite, HilbertError, TreeConfig};
use crate::parse::{parse_map, ParseError};
use crate::rational::{RationalMap, SpherePoint};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "CARTAN_SEED";
/// Random function draws per identity check in `verify`.
pub const VERIFY_SAMPLES: usize = 200;
const MAX_RENDER_SIDE: usize = 8192;

#[derive(Parser, Debug)]
#[command(name = "cartan", version, about = "Branch-point test for Cartan subalgebras of rational-map algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether the functions on a space form a Cartan subalgebra.
    Analyze {
        /// Rational map in z, for example "z^2 - 2" or "(z^2+1)/(2z)".
        #[arg(allow_hyphen_values = true)]
        map: String,
        #[arg(long, default_value = "julia")]
        space: SpaceSelector,
        #[arg(long, default_value_t = Budget::default().max_iter)]
        max_iter: usize,
        /// Landing tolerance for repelling cycles.
        #[arg(long, default_value_t = Budget::default().snap_tol)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Write an escape-time image as binary PPM.
    Render {
        /// Rational map in z, for example "z^2 - 2" or "(z^2+1)/(2z)".
        #[arg(allow_hyphen_values = true)]
        map: String,
        /// `x0,y0,x1,y1`
        #[arg(long, default_value = "-2,-2,2,2", allow_hyphen_values = true)]
        viewport: String,
        /// `WxH`
        #[arg(long, default_value = "256x256")]
        res: String,
        #[command(flatten)]
        common: Common,
    },
    /// Build an orbit tree and run the operator identity checks on it.
    Verify {
        /// Rational map in z, for example "z^2 - 2" or "(z^2+1)/(2z)".
        #[arg(allow_hyphen_values = true)]
        map: String,
        /// Backward levels below the base point.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Forward images above the base point.
        #[arg(long, default_value_t = 2)]
        forward: usize,
        /// Write the tree as JSON to this path.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// List critical points with local degrees and orbit classification.
    Critical {
        /// Rational map in z, for example "z^2 - 2" or "(z^2+1)/(2z)".
        #[arg(allow_hyphen_values = true)]
        map: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Decimal or 0x-prefixed hexadecimal.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl clap::ValueEnum for SpaceSelector {
    fn value_variants<'a>() -> &'a [Self] {
        &[SpaceSelector::Julia, SpaceSelector::Fatou, SpaceSelector::Sphere]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            SpaceSelector::Julia => "julia",
            SpaceSelector::Fatou => "fatou",
            SpaceSelector::Sphere => "sphere",
        }))
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

#[derive(Debug)]
enum CliError {
    Parse { source: String, error: ParseError },
    Usage(String),
    Cartan(CartanError),
    Dynamics(DynamicsError),
    Hilbert(HilbertError),
    Io { path: String, error: std::io::Error },
}

impl CliError {
    fn message(&self) -> String {
        match self {
            CliError::Parse { source, error } => format!("parse error: {}", error.caret_diagnostic(source)),
            CliError::Usage(m) => m.clone(),
            CliError::Cartan(CartanError::DegreeTooLow { degree })
            | CliError::Dynamics(DynamicsError::DegreeTooLow { degree })
            | CliError::Hilbert(HilbertError::DegreeTooLow { degree }) => {
                format!("DegreeTooLow: map degree {degree} is too low; at least 2 is required")
            }
            CliError::Cartan(e) => e.to_string(),
            CliError::Dynamics(e) => e.to_string(),
            CliError::Hilbert(e @ HilbertError::SizeCapExceeded { .. }) => format!("SizeCapExceeded: {e}"),
            CliError::Hilbert(HilbertError::GenericBaseNotFound { attempts }) => {
                format!("GenericBaseNotFound: no base point passed the genericity screen in {attempts} attempts")
            }
            CliError::Hilbert(e) => e.to_string(),
            CliError::Io { path, error } => format!("cannot write {path}: {error}"),
        }
    }
}

/// Runs the command line `args` (program name first) with the seed
/// override read from the process environment.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var(SEED_ENV).ok(), stdout, stderr)
}

/// [`run`] with an explicit value for the seed override.
pub fn run_with_env<I, T>(args: I, env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, env_seed, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            1
        }
    }
}

fn resolve_seed(common: &Common, env_seed: Option<String>) -> Result<u64, CliError> {
    match env_seed.filter(|s| !s.trim().is_empty()) {
        Some(s) => parse_seed(&s).map_err(|e| CliError::Usage(format!("{SEED_ENV}: {e}"))),
        None => Ok(common.seed.unwrap_or(DEFAULT_SEED)),
    }
}

fn load_map(source: &str) -> Result<RationalMap, CliError> {
    parse_map(source).map_err(|error| CliError::Parse { source: source.to_string(), error })
}

fn emit(common: &Common, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match &common.out {
        Some(path) => write_file(path, bytes),
        None => stdout.write_all(bytes).map_err(|error| CliError::Io { path: "<stdout>".into(), error }),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|error| CliError::Io { path: path.display().to_string(), error })
}

fn json_bytes(value: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("json values always serialize");
    s.push('\n');
    s.into_bytes()
}

fn dispatch(command: Command, env_seed: Option<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Analyze { map, space, max_iter, tol, common } => {
            let seed = resolve_seed(&common, env_seed)?;
            analyze(&map, space, max_iter, tol, seed, &common, stdout)
        }
        Command::Render { map, viewport, res, common } => {
            let seed = resolve_seed(&common, env_seed)?;
            render(&map, &viewport, &res, seed, &common, stdout)
        }
        Command::Verify { map, depth, forward, dump, common } => {
            let seed = resolve_seed(&common, env_seed)?;
            verify(&map, depth, forward, dump.as_deref(), seed, &common, stdout)
        }
        Command::Critical { map, common } => {
            let seed = resolve_seed(&common, env_seed)?;
            critical(&map, seed, &common, stdout)
        }
    }
}

fn analyze(
    source: &str,
    space: SpaceSelector,
    max_iter: usize,
    tol: f64,
    seed: u64,
    common: &Common,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be a positive number, got {tol}")));
    }
    let map = load_map(source)?;
    let budget = Budget { max_iter, snap_tol: tol, ..Budget::default() };
    let report = decide_cartan(&map, space, budget).map_err(CliError::Cartan)?;
    let bytes = match common.format {
        Format::Json => json_bytes(&json!({
            "map": map.to_string(),
            "space": report.space,
            "verdict": report.verdict,
            "witnesses": report.witnesses,
            "diagnostics": {
                "source": source,
                "degree": map.degree(),
                "critical_point_count": report.critical_point_count,
                "space_nonempty": report.space_nonempty,
                "attracting_cycles": report.attracting_cycles,
                "budget": report.budget,
                "notes": report.notes,
            },
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
        })),
        Format::Text => {
            let mut s = format!("map: {map}\nspace: {}\nverdict: {:?}\n", report.space, report.verdict);
            for w in &report.witnesses {
                s += &format!(
                    "witness {} (e = {}): {:?}, {}\n",
                    w.point,
                    w.branch_index,
                    w.membership.verdict,
                    certificate_summary(&w.membership.certificate)
                );
            }
            s += &format!("notes: {}\n", report.notes);
            s.into_bytes()
        }
    };
    emit(common, stdout, &bytes)?;
    Ok(if report.verdict == CartanVerdict::Undetermined { 2 } else { 0 })
}

fn certificate_summary(c: &crate::dynamics::Certificate) -> String {
    use crate::dynamics::Certificate::*;
    match c {
        PreperiodicToRepelling { cycle, multiplier, landing_iteration } => format!(
            "lands on a repelling cycle of period {} (multiplier {}) after {landing_iteration} steps",
            cycle.period,
            fmt_c(*multiplier)
        ),
        ConvergesToAttracting { cycle, multiplier, iterations } => format!(
            "converges to an attracting cycle of period {} (multiplier {}) in {iterations} steps",
            cycle.period,
            fmt_c(*multiplier)
        ),
        ConvergesToSuperattracting { cycle, iterations } => {
            format!("converges to a superattracting cycle of period {} in {iterations} steps", cycle.period)
        }
        EscapeToInfinity { iterations, escape_radius } => {
            format!("leaves the disk of radius {escape_radius} after {iterations} steps")
        }
        None => "no certificate".into(),
    }
}

fn fmt_c(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

fn parse_viewport(s: &str) -> Result<Viewport, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("invalid viewport '{s}': {e}")))?;
    let [x0, y0, x1, y1] = parts[..] else {
        return Err(CliError::Usage(format!("viewport '{s}' must have four values x0,y0,x1,y1")));
    };
    if !parts.iter().all(|v| v.is_finite()) || x0 >= x1 || y0 >= y1 {
        return Err(CliError::Usage(format!("viewport '{s}' must satisfy x0 < x1 and y0 < y1")));
    }
    Ok(Viewport::new(x0, y0, x1, y1))
}

fn parse_resolution(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("resolution '{s}' must be WxH with 1 <= W, H <= {MAX_RENDER_SIDE}"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 || w > MAX_RENDER_SIDE || h > MAX_RENDER_SIDE {
        return Err(bad());
    }
    Ok((w, h))
}

fn render(
    source: &str,
    viewport: &str,
    res: &str,
    seed: u64,
    common: &Common,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let viewport = parse_viewport(viewport)?;
    let resolution = parse_resolution(res)?;
    let map = load_map(source)?;
    let grid = escape_grid(&map, viewport, resolution, RENDER_MAX_ITER, seed).map_err(CliError::Dynamics)?;
    let image = ppm::encode(&grid);
    match &common.out {
        None => stdout.write_all(&image).map_err(|error| CliError::Io { path: "<stdout>".into(), error })?,
        Some(path) => {
            write_file(path, &image)?;
            let summary = match common.format {
                Format::Json => json_bytes(&json!({
                    "map": map.to_string(),
                    "out": path.display().to_string(),
                    "width": grid.width,
                    "height": grid.height,
                    "attractors": grid.attractor_count,
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": seed,
                })),
                Format::Text => {
                    format!("wrote {}x{} image of {map} to {}\n", grid.width, grid.height, path.display()).into_bytes()
                }
            };
            stdout.write_all(&summary).map_err(|error| CliError::Io { path: "<stdout>".into(), error })?;
        }
    }
    Ok(0)
}

/// Base hint for `verify` trees; the builder perturbs it if it fails the
/// genericity screen.
const VERIFY_BASE_HINT: Complex64 = Complex64::new(0.7, 0.3);

fn verify(
    source: &str,
    depth: usize,
    forward: usize,
    dump: Option<&Path>,
    seed: u64,
    common: &Common,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let map = load_map(source)?;
    let config = TreeConfig { backward_depth: depth, forward_depth: forward, seed, ..TreeConfig::default() };
    let tree = build_orbit_tree(&map, SpherePoint::finite(VERIFY_BASE_HINT), config).map_err(CliError::Hilbert)?;
    if let Some(path) = dump {
        write_file(path, &json_bytes(&tree.to_json()))?;
    }
    let checks = run_identity_suite(&tree, VERIFY_SAMPLES, seed).map_err(CliError::Hilbert)?;
    let all = checks.iter().all(|c| c.passed);
    let bytes = match common.format {
        Format::Json => json_bytes(&json!({
            "map": map.to_string(),
            "tree": {
                "nodes": tree.len(),
                "degree": tree.degree(),
                "backward_depth": tree.backward_depth(),
                "forward_depth": tree.forward_depth(),
                "base": tree.point(tree.base()),
                "attempts": tree.attempts(),
            },
            "checks": checks,
            "passed": all,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
        })),
        Format::Text => {
            let mut s = format!("map: {map}\ntree: {} nodes, base {}\n", tree.len(), tree.point(tree.base()));
            for c in &checks {
                s += &format!(
                    "{:<24} {}  cases {:>6}  max error {:.3e}\n",
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.cases,
                    c.max_error
                );
                if !c.passed {
                    s += &format!("    {}\n", c.detail);
                }
            }
            s.into_bytes()
        }
    };
    emit(common, stdout, &bytes)?;
    Ok(if all { 0 } else { 1 })
}

fn critical(source: &str, seed: u64, common: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let map = load_map(source)?;
    let classifier = Classifier::new(&map, Budget::default()).map_err(CliError::Dynamics)?;
    let data = classify_critical_points(&classifier).map_err(CliError::Dynamics)?;
    let bytes = match common.format {
        Format::Json => json_bytes(&Value::Array(
            data.iter()
                .map(|c| {
                    json!({
                        "point": c.point,
                        "e": c.branch_index,
                        "verdict": c.membership.verdict,
                        "certificate": c.membership.certificate,
                        "orbit_prefix": c.orbit_prefix,
                    })
                })
                .collect(),
        )),
        Format::Text => {
            let mut s = format!("map: {map}\nseed: {seed}\n");
            for c in &data {
                s += &format!(
                    "{} e = {} {:?}: {}\n",
                    c.point,
                    c.branch_index,
                    c.membership.verdict,
                    certificate_summary(&c.membership.certificate)
                );
            }
            s.into_bytes()
        }
    };
    emit(common, stdout, &bytes)?;
    Ok(0)
}
