//! Command-line front end: surface ingestion, scans, locus refinement and
//! tracing, curve indices, perturbation analysis, and JSON/CSV export.
//!
//! Exit codes: `0` for success, including mathematically negative findings
//! that are the answer to the question asked (refine finding no zero on a
//! nonumbilical surface, a perturbation flagged non-generic); `1` for
//! mathematical failure states (degenerate Levi form, rank-deficient locus,
//! unstable sampling); `2` for usage and I/O errors. Every output embeds the
//! resolved configuration and the tool version; identical configurations
//! produce bitwise-identical files.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::index::{self, ParamCurve};
use crate::locus;
use crate::perturb::{self, BidegreePoly};
use crate::surfaces::{SurfaceFile, SurfaceSpec};
use crate::tensor;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "umbilic", version, about = "umbilical locus computations on hypersurfaces in C^2")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate |Q| over a uniform chart grid.
    Scan(ScanArgs),
    /// Refine an umbilical zero from a seed (or from the scan minimum).
    Refine(RefineArgs),
    /// Trace the umbilical curve through a refined zero.
    Trace(TraceArgs),
    /// Winding-number index of a closed curve.
    Index(IndexArgs),
    /// Operate on a perturbation polynomial (q0, decompose, genericity scan).
    Perturb(PerturbArgs),
    /// Dense-grid nonvanishing check with a Lipschitz slack report.
    CheckNonumbilic(CheckArgs),
}

#[derive(Args, Debug, Clone)]
struct SurfaceArgs {
    /// Builtin surface: sphere | log_torus | ellipsoid.
    #[arg(long, conflicts_with = "spec")]
    surface: Option<String>,
    /// Surface parameter eps.
    #[arg(long)]
    eps: Option<f64>,
    /// Ellipsoid coefficient A.
    #[arg(long)]
    a: Option<f64>,
    /// Ellipsoid coefficient B.
    #[arg(long)]
    b: Option<f64>,
    /// TOML or JSON surface description file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl SurfaceArgs {
    fn build(&self) -> Result<SurfaceSpec> {
        if let Some(path) = &self.spec {
            return SurfaceSpec::load(path);
        }
        let name = self
            .surface
            .as_deref()
            .ok_or_else(|| Error::Config("missing --surface or --spec".into()))?;
        let file = SurfaceFile {
            kind: name.to_string(),
            eps: self.eps,
            a: self.a,
            b: self.b,
            term: vec![],
        };
        SurfaceSpec::from_file_spec(&file)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
}

fn parse_grid(text: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse_one = |valor: &str| valor.trim().parse::<usize>().map_err(|e| e.to_string());
    match parts.len() {
        1 => {
            let n = parse_one(parts[0])?;
            Ok([n, n, n])
        }
        3 => Ok([parse_one(parts[0])?, parse_one(parts[1])?, parse_one(parts[2])?]),
        _ => Err("grid must be N or N1,N2,N3".into()),
    }
}

fn parse_triple(text: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated numbers".into());
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.trim().parse::<f64>().map_err(|e| e.to_string())?;
    }
    Ok(out)
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Grid: N or N1,N2,N3.
    #[arg(long, value_parser = parse_grid)]
    grid: [usize; 3],
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RefineArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Seed chart parameters t1,t2,t3.
    #[arg(long, value_parser = parse_triple, required_unless_present = "from_scan")]
    seed: Option<[f64; 3]>,
    /// Seed from the minimum of a fresh scan with this grid.
    #[arg(long, value_parser = parse_grid)]
    from_scan: Option<[usize; 3]>,
    /// Override the |Q| scale the tolerances are relative to (must be > 0).
    #[arg(long)]
    q_scale: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Start point (refined first unless --no-refine).
    #[arg(long, value_parser = parse_triple)]
    seed: [f64; 3],
    /// Predictor step in chart parameters.
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Use the seed as-is without refining it first.
    #[arg(long)]
    no_refine: bool,
    /// Override the |Q| scale the tolerances are relative to (must be > 0).
    #[arg(long)]
    q_scale: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct IndexArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Circle center t1,t2,t3 in chart parameters.
    #[arg(long, value_parser = parse_triple, conflicts_with = "curve_file")]
    center: Option<[f64; 3]>,
    /// Circle plane normal n1,n2,n3.
    #[arg(long, value_parser = parse_triple)]
    normal: Option<[f64; 3]>,
    /// Circle radius.
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    /// JSON file with a closed polygon: [[t1,t2,t3], ...].
    #[arg(long)]
    curve_file: Option<PathBuf>,
    /// Initial sample count.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PerturbArgs {
    /// TOML or JSON file with monomial terms (the perturbed_sphere format).
    #[arg(long)]
    poly: PathBuf,
    /// Operation to run.
    #[arg(long, value_parser = ["q0", "decompose", "scan"])]
    op: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long, value_parser = parse_grid)]
    grid: [usize; 3],
    /// Random refinement seeds to try (all must fail to find a zero).
    #[arg(long, default_value_t = 0)]
    seeds: usize,
    #[command(flatten)]
    output: OutputArgs,
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success-style errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Io(_)
        | Error::Toml(_)
        | Error::Json(_)
        | Error::InvalidSurface(_)
        | Error::NotRealSymmetric
        | Error::PscGuard(_)
        | Error::GridTooCoarse => 2,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Scan(args) => cmd_scan(args),
        Cmd::Refine(args) => cmd_refine(args),
        Cmd::Trace(args) => cmd_trace(args),
        Cmd::Index(args) => cmd_index(args),
        Cmd::Perturb(args) => cmd_perturb(args),
        Cmd::CheckNonumbilic(args) => cmd_check(args),
    }
}

fn envelope<C: Serialize, R: Serialize>(config: &C, result: &R) -> serde_json::Value {
    json!({
        "schema": SCHEMA_VERSION,
        "tool": { "name": "umbilic", "version": env!("CARGO_PKG_VERSION") },
        "config": config,
        "result": result,
    })
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn write_json(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out, &text)
}

/// The fixed CSV column schema for per-point records.
const CSV_HEADER: &str = "theta1,theta2,theta3,z_re,z_im,w_re,w_im,q_re,q_im,abs_q,j";

fn csv_preamble<C: Serialize>(config: &C) -> Result<String> {
    let mut text = String::new();
    text.push_str(&format!("# schema: {SCHEMA_VERSION}\n"));
    text.push_str(&format!("# tool: umbilic {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# config: {}\n", serde_json::to_string(config)?));
    text.push_str(CSV_HEADER);
    text.push('\n');
    Ok(text)
}

fn csv_row(smp: &tensor::TensorSample) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}\n",
        smp.theta[0],
        smp.theta[1],
        smp.theta[2],
        smp.z_re,
        smp.z_im,
        smp.w_re,
        smp.w_im,
        smp.q_re,
        smp.q_im,
        smp.abs_q,
        smp.j_on_m
    )
}

#[derive(Serialize)]
struct ScanConfig {
    subcommand: &'static str,
    surface: SurfaceFile,
    grid: [usize; 3],
    format: String,
}

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let s = args.surface.build()?;
    let config = ScanConfig {
        subcommand: "scan",
        surface: s.to_file_spec(),
        grid: args.grid,
        format: args.output.format.clone(),
    };
    let result = locus::scan(&s, args.grid)?;
    if args.output.format == "csv" {
        let mut text = csv_preamble(&config)?;
        for smp in &result.samples {
            text.push_str(&csv_row(smp));
        }
        write_text(&args.output.out, &text)
    } else {
        write_json(&args.output.out, &envelope(&config, &result))
    }
}

#[derive(Serialize)]
struct RefineConfig {
    subcommand: &'static str,
    surface: SurfaceFile,
    seed: Option<[f64; 3]>,
    from_scan: Option<[usize; 3]>,
    q_scale: Option<f64>,
}

fn check_q_scale(q_scale: Option<f64>) -> Result<()> {
    if let Some(scale) = q_scale {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config("--q-scale must be positive".into()));
        }
    }
    Ok(())
}

fn cmd_refine(args: RefineArgs) -> Result<()> {
    check_q_scale(args.q_scale)?;
    let s = args.surface.build()?;
    let config = RefineConfig {
        subcommand: "refine",
        surface: s.to_file_spec(),
        seed: args.seed,
        from_scan: args.from_scan,
        q_scale: args.q_scale,
    };
    let (seed, default_scale) = match args.from_scan {
        Some(grid) => {
            let scan = locus::scan(&s, grid)?;
            (scan.min_at, scan.median_abs_q)
        }
        None => (args.seed.expect("clap enforces seed"), locus::local_q_scale(&s)?),
    };
    let scale = args.q_scale.unwrap_or(default_scale);
    // "no zero found" is a finding, not a tool failure
    let result = match locus::refine_zero_with(&s, seed, scale) {
        Ok(zero) => json!({ "found": true, "zero": zero }),
        Err(Error::NoZeroFound(steps)) => json!({
            "found": false,
            "finding": "no zero found",
            "steps": steps,
            "seed": seed,
        }),
        Err(e) => return Err(e),
    };
    write_json(&args.output.out, &envelope(&config, &result))
}

#[derive(Serialize)]
struct TraceConfig {
    subcommand: &'static str,
    surface: SurfaceFile,
    seed: [f64; 3],
    step: f64,
    no_refine: bool,
    q_scale: Option<f64>,
    format: String,
}

fn cmd_trace(args: TraceArgs) -> Result<()> {
    check_q_scale(args.q_scale)?;
    if !(args.step > 0.0 && args.step.is_finite()) {
        return Err(Error::Config("--step must be positive".into()));
    }
    let s = args.surface.build()?;
    let config = TraceConfig {
        subcommand: "trace",
        surface: s.to_file_spec(),
        seed: args.seed,
        step: args.step,
        no_refine: args.no_refine,
        q_scale: args.q_scale,
        format: args.output.format.clone(),
    };
    let scale = match args.q_scale {
        Some(scale) => scale,
        None => locus::local_q_scale(&s)?,
    };
    let start = if args.no_refine {
        args.seed
    } else {
        locus::refine_zero_with(&s, args.seed, scale)?.theta
    };
    let curve = locus::trace_curve_with(&s, start, args.step, scale)?;
    if args.output.format == "csv" {
        let mut text = csv_preamble(&config)?;
        for theta in &curve.thetas {
            text.push_str(&csv_row(&tensor::sample(&s, *theta)?));
        }
        write_text(&args.output.out, &text)
    } else {
        write_json(&args.output.out, &envelope(&config, &curve))
    }
}

#[derive(Serialize)]
struct IndexConfig {
    subcommand: &'static str,
    surface: SurfaceFile,
    curve: ParamCurve,
    samples: usize,
}

fn cmd_index(args: IndexArgs) -> Result<()> {
    let s = args.surface.build()?;
    let curve = if let Some(path) = &args.curve_file {
        let vertices: Vec<[f64; 3]> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if vertices.len() < 3 {
            return Err(Error::Config("curve file needs at least 3 vertices".into()));
        }
        ParamCurve::Polygon { vertices }
    } else {
        let center = args.center.ok_or_else(|| Error::Config("missing --center or --curve-file".into()))?;
        let normal = args.normal.unwrap_or([0.0, 0.0, 1.0]);
        let n = {
            let len = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
            if len == 0.0 {
                return Err(Error::Config("--normal must be nonzero".into()));
            }
            [normal[0] / len, normal[1] / len, normal[2] / len]
        };
        let axis = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let ucross = [
            n[1] * axis[2] - n[2] * axis[1],
            n[2] * axis[0] - n[0] * axis[2],
            n[0] * axis[1] - n[1] * axis[0],
        ];
        let ulen = (ucross[0] * ucross[0] + ucross[1] * ucross[1] + ucross[2] * ucross[2]).sqrt();
        let u = [ucross[0] / ulen, ucross[1] / ulen, ucross[2] / ulen];
        let v = [
            n[1] * u[2] - n[2] * u[1],
            n[2] * u[0] - n[0] * u[2],
            n[0] * u[1] - n[1] * u[0],
        ];
        ParamCurve::Circle { center, u, v, radius: args.radius }
    };
    let config = IndexConfig {
        subcommand: "index",
        surface: s.to_file_spec(),
        curve: curve.clone(),
        samples: args.samples,
    };
    let report = index::curve_index(&s, &curve, args.samples)?;
    write_json(&args.output.out, &envelope(&config, &report))
}

#[derive(Serialize)]
struct PerturbConfig {
    subcommand: &'static str,
    poly: Vec<perturb::TermSpec>,
    op: String,
}

fn cmd_perturb(args: PerturbArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.poly)?;
    let rho_prime = parse_poly_file(&text)?;
    let config = PerturbConfig {
        subcommand: "perturb",
        poly: rho_prime.to_terms(),
        op: args.op.clone(),
    };
    let result = match args.op.as_str() {
        "q0" => {
            let image = perturb::q0(&rho_prime);
            json!({
                "zero": image.is_empty(),
                "terms": image.to_terms(),
                "buckets": image.buckets().map(|(k, p)| json!({
                    "p": k.0, "q": k.1, "terms": p.num_terms(),
                })).collect::<Vec<_>>(),
            })
        }
        "decompose" => {
            json!({
                "almost_circular": perturb::is_almost_circular(&rho_prime),
                "degree": rho_prime.degree(),
                "buckets": rho_prime.buckets().map(|(k, p)| json!({
                    "p": k.0, "q": k.1, "terms": p.num_terms(),
                })).collect::<Vec<_>>(),
                "terms": rho_prime.to_terms(),
            })
        }
        "scan" => {
            let report = perturb::genericity_scan(&rho_prime, &perturb::default_zt_samples())?;
            json!({
                "generic": report.found(),
                "witness": report.witness,
                "windings": report.windings,
                "skipped": report.skipped,
            })
        }
        _ => unreachable!("clap validates op"),
    };
    write_json(&args.output.out, &envelope(&config, &result))
}

/// The perturbation file reuses the surface format's `term` list; a bare
/// `[[term]]` TOML array (or JSON `{"term": [...]}`) also works.
fn parse_poly_file(text: &str) -> Result<BidegreePoly> {
    #[derive(serde::Deserialize)]
    struct PolyFile {
        #[serde(default)]
        term: Vec<perturb::TermSpec>,
    }
    let trimmed = text.trim_start();
    let file: PolyFile =
        if trimmed.starts_with('{') { serde_json::from_str(trimmed)? } else { toml::from_str(text)? };
    if file.term.is_empty() {
        return Err(Error::Config("no [[term]] entries in polynomial file".into()));
    }
    BidegreePoly::from_terms(&file.term)
}

#[derive(Serialize)]
struct CheckConfig {
    subcommand: &'static str,
    surface: SurfaceFile,
    grid: [usize; 3],
    seeds: usize,
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let s = args.surface.build()?;
    let config = CheckConfig {
        subcommand: "check-nonumbilic",
        surface: s.to_file_spec(),
        grid: args.grid,
        seeds: args.seeds,
    };
    let scan = locus::scan(&s, args.grid)?;
    let report = locus::non_umbilic_report(&s, &scan);
    // deterministic pseudo-random seeds
    let mut state = 0x5851f42d4c957f2du64;
    let mut zeros_found = Vec::new();
    let mut failures = 0usize;
    for _ in 0..args.seeds {
        let mut theta = [0.0f64; 3];
        for (slot, (lo, hi)) in theta.iter_mut().zip(s.theta_domain()) {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *slot = lo + (hi - lo) * ((state >> 11) as f64 / (1u64 << 53) as f64);
        }
        match locus::refine_zero_with(&s, theta, scan.median_abs_q) {
            Ok(zero) => zeros_found.push(zero),
            Err(Error::NoZeroFound(_)) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    let result = json!({
        "nonumbilical_evidence": report.positive() && zeros_found.is_empty(),
        "report": report,
        "refine_seeds_tried": args.seeds,
        "refine_no_zero": failures,
        "zeros_found": zeros_found,
    });
    write_json(&args.output.out, &envelope(&config, &result))
}
