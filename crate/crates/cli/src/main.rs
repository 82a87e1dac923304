//! `extcert`: certify failure of the extension condition on annuli and
//! shells, verify the numerical identities, sweep the reduced integrals,
//! average sampled fields, and check planar geometries.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use extcert::certifier::{
    best_mode, certify_inflow_2d, certify_inflow_3d, certify_outflow_2d, certify_outflow_3d,
    identity_report, CertifyOptions, CheckTolerances, IdentityOptions,
};
use extcert::quadrature::format_f64;
use extcert::special::SpecialIntegrals;
use extcert::{
    average_sampled, AnnulusGeometry, EulerConvention, PlanarMultiDomain, QuadratureSpec,
    RotationSpec2D, RotationSpec3D, SampledCartesianField, ScalarProfile, ShellGeometry, Verdict,
};

#[derive(Parser, Debug)]
#[command(
    name = "extcert",
    version,
    about = "Certificates for failure of the Leray-Hopf extension condition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a violation certificate for an annulus or a spherical shell.
    Certify(CertifyArgs),
    /// Run the identity report on an annulus and the shell with the same radii.
    Verify(VerifyArgs),
    /// Tabulate F1, F2, G1, G2 and the minimal modes over a range of aspect ratios.
    Sweep(SweepArgs),
    /// Rotationally average a sampled Cartesian field file.
    Average(AverageArgs),
    /// Look for a separating circle around each inner boundary component.
    CheckGeometry(GeometryArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    Annulus,
    Shell,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Convention {
    Zyz,
    Zxz,
}

impl From<Convention> for EulerConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Zyz => EulerConvention::Zyz,
            Convention::Zxz => EulerConvention::Zxz,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct QuadratureArgs {
    /// Gauss-Legendre nodes in r.
    #[arg(long, default_value_t = 64)]
    nodes_r: usize,
    /// Trapezoid nodes in the azimuthal angle.
    #[arg(long, default_value_t = 128)]
    nodes_theta: usize,
    /// Gauss-Legendre nodes in cos(chi) (shell only).
    #[arg(long, default_value_t = 64)]
    nodes_chi: usize,
}

impl QuadratureArgs {
    fn spec(&self) -> Result<QuadratureSpec> {
        Ok(QuadratureSpec::new(
            self.nodes_r,
            self.nodes_theta,
            self.nodes_chi,
        )?)
    }
}

#[derive(Args, Debug)]
struct RotationArgs {
    /// Rotation angles for planar averaging.
    #[arg(long, default_value_t = 256)]
    angles: usize,
    /// Euler-angle nodes (alpha1 alpha2 alpha3) for spatial averaging.
    #[arg(long, num_args = 3, value_names = ["N1", "N2", "N3"], default_values_t = [64, 64, 32])]
    euler_nodes: Vec<usize>,
    /// Euler-angle convention.
    #[arg(long, value_enum, default_value_t = Convention::Zyz)]
    convention: Convention,
}

impl RotationArgs {
    fn specs(&self) -> Result<(RotationSpec2D, RotationSpec3D)> {
        let n = &self.euler_nodes;
        Ok((
            RotationSpec2D::new(self.angles)?,
            RotationSpec3D::new(n[0], n[1], n[2], self.convention.into())?,
        ))
    }
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Domain type.
    #[arg(long, value_enum, default_value_t = Domain::Annulus)]
    domain: Domain,
    /// Inner radius.
    #[arg(long, value_parser = finite)]
    r1: f64,
    /// Outer radius.
    #[arg(long, value_parser = finite)]
    r2: f64,
    /// Flow-rate through the outer boundary; positive is outflow.
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    flux: f64,
    /// Test-field mode (outflow); defaults to the minimal mode with positive kappa.
    #[arg(long, conflicts_with_all = ["profile", "modes"])]
    mode: Option<u32>,
    /// Search these modes for the largest epsilon_star (annulus outflow), e.g. 1-20 or 2,4,6.
    #[arg(long, conflicts_with = "profile")]
    modes: Option<String>,
    /// Inflow witness profile poly:c0,c1,...; defaults to the normalized bump when the flux is negative.
    #[arg(long)]
    profile: Option<String>,
    /// Swirl v(r) of the averaged annulus extension, poly:c0,c1,...
    #[arg(long)]
    swirl: Option<String>,
    #[command(flatten)]
    quadrature: QuadratureArgs,
    /// Absolute error floor added to the quadrature error estimate.
    #[arg(long, value_parser = finite, default_value_t = 1e-12)]
    tol: f64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Inner radius.
    #[arg(long, value_parser = finite, default_value_t = 1.0)]
    r1: f64,
    /// Outer radius.
    #[arg(long, value_parser = finite, default_value_t = 2.0)]
    r2: f64,
    /// Test-field modes, e.g. 1,3,5 or 1-6.
    #[arg(long, default_value = "1,3,5")]
    modes: String,
    #[command(flatten)]
    quadrature: QuadratureArgs,
    #[command(flatten)]
    rotations: RotationArgs,
    /// Single tolerance for every check, replacing the per-check defaults.
    #[arg(long, value_parser = finite)]
    tol: Option<f64>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Smallest aspect ratio (> 1).
    #[arg(long, value_parser = finite)]
    rho_min: f64,
    /// Largest aspect ratio.
    #[arg(long, value_parser = finite)]
    rho_max: f64,
    /// Number of equally spaced aspect ratios, endpoints included.
    #[arg(long)]
    steps: usize,
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AverageArgs {
    /// Sampled field file (polar-grid or spherical-grid header).
    #[arg(long)]
    input: PathBuf,
    /// Output path for the averaged samples; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    rotations: RotationArgs,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    /// Planar domain JSON: {"outer": circle, "inner": [circle, ...]}.
    #[arg(long)]
    spec: PathBuf,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}

fn parse_modes(s: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (u32, u32) = (a.trim().parse()?, b.trim().parse()?);
            if a > b {
                bail!("empty mode range {part}");
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().with_context(|| format!("bad mode '{part}'"))?);
        }
    }
    if out.is_empty() {
        bail!("no modes given");
    }
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn certify(args: &CertifyArgs) -> Result<u8> {
    let opts = CertifyOptions {
        quadrature: args.quadrature.spec()?,
        error_floor: args.tol,
        ..Default::default()
    };
    let profile = args
        .profile
        .as_deref()
        .map(ScalarProfile::parse)
        .transpose()?;
    let swirl = args
        .swirl
        .as_deref()
        .map(ScalarProfile::parse)
        .transpose()?;
    let inflow = profile.is_some() || args.flux < 0.0;
    if inflow && (args.mode.is_some() || args.modes.is_some()) {
        bail!("--mode/--modes select outflow witnesses; a negative flux or --profile selects the inflow witness");
    }
    let cert = match args.domain {
        Domain::Annulus => {
            let g = AnnulusGeometry::new(args.r1, args.r2)?;
            if inflow {
                if swirl.is_some() {
                    bail!("--swirl only applies to outflow certificates");
                }
                certify_inflow_2d(&g, args.flux, profile.as_ref(), &opts)?
            } else if let Some(list) = &args.modes {
                best_mode(&g, args.flux, &parse_modes(list)?, swirl.as_ref(), &opts)?.1
            } else {
                certify_outflow_2d(&g, args.flux, swirl.as_ref(), args.mode, &opts)?
            }
        }
        Domain::Shell => {
            if swirl.is_some() {
                bail!("--swirl only applies to the annulus");
            }
            if args.modes.is_some() {
                bail!("--modes only applies to the annulus");
            }
            let g = ShellGeometry::new(args.r1, args.r2)?;
            if inflow {
                certify_inflow_3d(&g, args.flux, profile.as_ref(), &opts)?
            } else {
                certify_outflow_3d(&g, args.flux, args.mode, &opts)?
            }
        }
    };
    let text = match args.format {
        Format::Json => cert.to_json(),
        Format::Text => format!(
            "domain {:?} r1 {} r2 {} phi {}\nwitness {:?}\nkappa {}\nlhs {}\ngrad_norm_sq {}\nepsilon_star {}\nverdict {:?}\n",
            cert.domain,
            format_f64(cert.r1),
            format_f64(cert.r2),
            format_f64(cert.phi),
            cert.mode_or_profile,
            format_f64(cert.kappa),
            format_f64(cert.lhs),
            format_f64(cert.grad_norm_sq),
            format_f64(cert.epsilon_star),
            cert.verdict
        ),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(if cert.verdict == Verdict::Violated {
        0
    } else {
        2
    })
}

fn verify(args: &VerifyArgs) -> Result<u8> {
    let g = AnnulusGeometry::new(args.r1, args.r2)?;
    let (rotations_2d, rotations_3d) = args.rotations.specs()?;
    let opts = IdentityOptions {
        tolerances: args.tol.map(CheckTolerances::uniform).unwrap_or_default(),
        quadrature: args.quadrature.spec()?,
        rotations_2d,
        rotations_3d,
    };
    let report = identity_report(&g, &parse_modes(&args.modes)?, &opts)?;
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{} {} residual {} tolerance {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    format_f64(c.residual),
                    format_f64(c.tolerance)
                )
            })
            .collect(),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(if report.all_passed() { 0 } else { 2 })
}

fn sweep(args: &SweepArgs) -> Result<u8> {
    if args.steps == 0 {
        bail!("--steps must be at least 1");
    }
    if !(args.rho_min > 1.0 && args.rho_max >= args.rho_min) {
        bail!("need 1 < rho-min <= rho-max");
    }
    let rhos: Vec<f64> = (0..args.steps)
        .map(|k| {
            if args.steps == 1 {
                args.rho_min
            } else {
                args.rho_min + (args.rho_max - args.rho_min) * k as f64 / (args.steps - 1) as f64
            }
        })
        .collect();
    let rows: Vec<SpecialIntegrals> = rhos
        .par_iter()
        .map(|&rho| SpecialIntegrals::new(rho))
        .collect::<extcert::Result<_>>()?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "rho",
        "F1",
        "F2",
        "G1",
        "G2",
        "m_star_2d",
        "m_star_3d",
        "kappa_at_mstar",
    ])?;
    for s in &rows {
        let m2 = s.minimal_m();
        w.write_record([
            format_f64(s.rho),
            format_f64(s.f1),
            format_f64(s.f2),
            format_f64(s.g1),
            format_f64(s.g2),
            m2.to_string(),
            s.minimal_m3().to_string(),
            format_f64(s.kappa(m2)),
        ])?;
    }
    let bytes = w.into_inner().context("csv buffer")?;
    match &args.csv {
        Some(p) => write_atomic(p, &bytes)?,
        None => io::stdout().write_all(&bytes)?,
    }
    Ok(0)
}

fn average(args: &AverageArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let field = SampledCartesianField::parse(&text)
        .with_context(|| format!("malformed field file {}", args.input.display()))?;
    let (s2, s3) = args.rotations.specs()?;
    let averaged = average_sampled(&field, &s2, &s3)?;
    emit(args.out.as_deref(), &averaged.to_text())?;
    Ok(0)
}

#[derive(Serialize)]
struct ComponentResult {
    component: usize,
    witness: Option<extcert::Circle>,
}

fn check_geometry(args: &GeometryArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("cannot read {}", args.spec.display()))?;
    let domain = PlanarMultiDomain::from_json(&text)?;
    let results = (1..=domain.inner().len())
        .map(|i| {
            Ok(ComponentResult {
                component: i,
                witness: domain.separating_circle(i)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let out = match args.format {
        Format::Json => to_json(&results)?,
        Format::Text => results
            .iter()
            .map(|r| match &r.witness {
                Some(c) => format!(
                    "component {}: separating circle center ({}, {}) radius {}\n",
                    r.component,
                    format_f64(c.cx),
                    format_f64(c.cy),
                    format_f64(c.r)
                ),
                None => format!("component {}: no separating circle found\n", r.component),
            })
            .collect(),
    };
    emit(args.out.as_deref(), &out)?;
    Ok(if results.iter().all(|r| r.witness.is_some()) {
        0
    } else {
        2
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Certify(a) => certify(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Average(a) => average(a),
        Command::CheckGeometry(a) => check_geometry(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
