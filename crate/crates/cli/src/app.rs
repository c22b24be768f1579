//! Command-line surface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flatnorm::complex::{Chain, SimplicialComplex};
use flatnorm::deform::{compare_bounds, deformation_bounds, refinement_convergence, retract_curve, DeformError, RetractOptions};
use flatnorm::exact::{int, parse_rational, to_f64};
use flatnorm::geometry::regularity_report;
use flatnorm::lp::{IlpOptions, LpStatus};
use flatnorm::msfn::{compute_msfn_with, euclidean_weights, lambda_sweep, unit_weights, LpMethod, MsfnError, MsfnOptions, MsfnProblem};
use flatnorm::tu::{certify, TuHints};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::io::{load_mesh, parse_chain, parse_curve, parse_weights_str, read_file, write_face, write_tetgen, IoError};
use crate::record::{self, InputDigest, ResultRecord};
use crate::synth::generate_noisy_pyramid;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "flatnorm", version, about = "Multiscale simplicial flat norm and related tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Flat norm decomposition of a chain at one scale.
    Msfn(MsfnArgs),
    /// Flat norm over a list of scales, with a CSV summary.
    Sweep(SweepArgs),
    /// Total unimodularity certificate for a boundary matrix.
    CertifyTu(CertifyArgs),
    /// Mesh regularity constants.
    Regularity(RegularityArgs),
    /// Deformation mass bounds and the comparison with Sullivan's.
    Bounds(BoundsArgs),
    /// Push a polygonal curve onto the 1-skeleton.
    Retract(RetractArgs),
    /// Retraction under repeated midpoint subdivision.
    RefineStudy(RefineArgs),
    /// Write a noisy pyramid surface inside a tetrahedralized cube.
    GenPyramid(PyramidArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Simplex,
    Network,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// `.off`, `.node` or `.ele` file.
    #[arg(long)]
    pub mesh: PathBuf,
    /// Chain file; defaults to the `.face` chain of a TetGen mesh.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Dimension of the input chain.
    #[arg(long)]
    pub dim: usize,
    /// `euclid`, `unit`, or a weights file.
    #[arg(long, default_value = "euclid")]
    pub weights: String,
    #[arg(long)]
    pub cap_multiplicity: bool,
    /// Include the exact weights used in the record.
    #[arg(long)]
    pub echo_weights: bool,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[arg(long, default_value_t = IlpOptions::default().node_budget)]
    pub node_budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MsfnArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Scale, as a decimal or `p/q`.
    #[arg(long)]
    pub lambda: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated scales.
    #[arg(long, conflicts_with = "lambda_range")]
    pub lambdas: Option<String>,
    /// `a:b:steps`, evenly spaced and inclusive.
    #[arg(long)]
    pub lambda_range: Option<String>,
    /// CSV path; defaults to the `--out` path with a `.csv` extension.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub dim: usize,
    /// The complex is embedded in one dimension above its top simplices.
    #[arg(long)]
    pub embedded_codim_one: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegularityArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub per_simplex: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub mass_t: f64,
    #[arg(long)]
    pub mass_bdt: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetractArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value_t = RetractOptions::default().samples)]
    pub samples: usize,
    #[arg(long, default_value_t = RetractOptions::default().retries)]
    pub retries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PyramidArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes `<prefix>.node`, `.ele` and `.face`.
    #[arg(long)]
    pub out_prefix: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl AppError {
    fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, kind: "parse", message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, kind: "internal", message: message.into() }
    }
}

impl From<IoError> for AppError {
    fn from(e: IoError) -> Self {
        Self::parse(e.to_string())
    }
}

impl From<MsfnError> for AppError {
    fn from(e: MsfnError) -> Self {
        let message = e.to_string();
        match e {
            MsfnError::Solver(LpStatus::Infeasible | LpStatus::Unbounded) => {
                Self { code: EXIT_INFEASIBLE, kind: "infeasible", message }
            }
            MsfnError::NodeBudgetExceeded { .. } => Self { code: EXIT_INFEASIBLE, kind: "budget", message },
            MsfnError::Complex(_) | MsfnError::NegativeLambda | MsfnError::NegativeWeight(_) | MsfnError::WeightLength { .. } => {
                Self::parse(message)
            }
            _ => Self::internal(message),
        }
    }
}

impl From<DeformError> for AppError {
    fn from(e: DeformError) -> Self {
        let message = e.to_string();
        match e {
            DeformError::CenterSamplingFailed { .. } => Self { code: EXIT_INFEASIBLE, kind: "budget", message },
            DeformError::CurveOutsideComplex { .. }
            | DeformError::DegenerateCurve { .. }
            | DeformError::InvalidDimension { .. }
            | DeformError::NegativeMass => Self::parse(message),
            _ => Self::internal(message),
        }
    }
}

fn internal<E: std::fmt::Display>(e: E) -> AppError {
    AppError::internal(e.to_string())
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), AppError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(internal)?;
    tmp.write_all(contents).map_err(internal)?;
    tmp.persist(path).map_err(|e| internal(e.error))?;
    Ok(())
}

fn parse_lambda(text: &str) -> Result<BigRational, AppError> {
    parse_rational(text.trim()).ok_or_else(|| AppError::parse(format!("bad scale {text:?}")))
}

fn lambda_list(args: &SweepArgs) -> Result<Vec<BigRational>, AppError> {
    if let Some(list) = &args.lambdas {
        return list.split(',').map(parse_lambda).collect();
    }
    let range = args.lambda_range.as_deref().ok_or_else(|| AppError::parse("give --lambdas or --lambda-range"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(AppError::parse(format!("expected a:b:steps, got {range:?}")));
    }
    let (a, b) = (parse_lambda(parts[0])?, parse_lambda(parts[1])?);
    let steps: i64 = parts[2].parse().map_err(|_| AppError::parse(format!("bad step count {:?}", parts[2])))?;
    if steps < 1 {
        return Err(AppError::parse("step count must be positive"));
    }
    if steps == 1 {
        return Ok(vec![a]);
    }
    Ok((0..steps).map(|i| &a + (&b - &a) * int(i) / int(steps - 1)).collect())
}

struct Loaded {
    complex: SimplicialComplex,
    chain: Chain,
    digest: InputDigest,
}

fn load_problem(args: &ProblemArgs) -> Result<Loaded, AppError> {
    let mesh = load_mesh(&args.mesh)?;
    let chain = match &args.chain {
        Some(path) => parse_chain(path, &mesh.complex, args.dim)?,
        None => match mesh.faces {
            Some(faces) if args.dim == 2 => faces,
            _ => return Err(AppError::parse("--chain is required unless the mesh has a .face file and --dim 2")),
        },
    };
    let mut digest = InputDigest::new();
    digest.add_complex(&mesh.complex).add_chain(&chain);
    digest.add("weights", args.weights.as_bytes());
    if !matches!(args.weights.as_str(), "euclid" | "unit") {
        digest.add("weights-file", read_file(Path::new(&args.weights))?.as_bytes());
    }
    digest.add("cap", &[u8::from(args.cap_multiplicity)]);
    Ok(Loaded { complex: mesh.complex, chain, digest })
}

fn build_problem<'a>(args: &ProblemArgs, loaded: &'a Loaded, lambda: BigRational) -> Result<MsfnProblem<'a>, AppError> {
    let k = &loaded.complex;
    let d = args.dim;
    let (w, v) = match args.weights.as_str() {
        "euclid" => (euclidean_weights(k, d)?, euclidean_weights(k, d + 1)?),
        "unit" => (unit_weights(k, d), unit_weights(k, d + 1)),
        path => parse_weights_str(&read_file(Path::new(path))?)?,
    };
    Ok(MsfnProblem::new(k, loaded.chain.clone(), lambda, w, v)?.with_multiplicity_cap(args.cap_multiplicity))
}

fn with_weights(mut outputs: Value, args: &ProblemArgs, problem: &MsfnProblem) -> Value {
    if args.echo_weights {
        let list = |ws: &[BigRational]| ws.iter().map(record::rational).collect::<Vec<_>>();
        outputs["weights"] = json!({ "w": list(problem.w()), "v": list(problem.v()) });
    }
    outputs
}

fn options(args: &ProblemArgs) -> MsfnOptions {
    let method = match args.method {
        MethodArg::Auto => LpMethod::Auto,
        MethodArg::Simplex => LpMethod::Simplex,
        MethodArg::Network => LpMethod::Network,
    };
    MsfnOptions { method, ilp: IlpOptions { node_budget: args.node_budget } }
}

fn mesh_digest(path: &Path) -> Result<(SimplicialComplex, InputDigest), AppError> {
    let mesh = load_mesh(path)?;
    let mut digest = InputDigest::new();
    digest.add_complex(&mesh.complex);
    Ok((mesh.complex, digest))
}

fn curve_digest(digest: &mut InputDigest, path: &Path) -> Result<flatnorm::deform::PLCurve, AppError> {
    let curve = parse_curve(path)?;
    let bytes: Vec<u8> = curve.points().iter().flatten().flat_map(|x| x.to_bits().to_le_bytes()).collect();
    digest.add("curve", &bytes).add("closed", &[u8::from(curve.closed())]);
    Ok(curve)
}

/// Output of one command before it is wrapped in a record.
struct Outcome {
    name: &'static str,
    digest: String,
    outputs: Value,
    out: Option<PathBuf>,
}

fn execute(command: &Command) -> Result<Outcome, AppError> {
    match command {
        Command::Msfn(args) => {
            let loaded = load_problem(&args.problem)?;
            let lambda = parse_lambda(&args.lambda)?;
            let problem = build_problem(&args.problem, &loaded, lambda.clone())?;
            let result = compute_msfn_with(&problem, options(&args.problem))?;
            let mut digest = loaded.digest.clone();
            digest.add("lambda", flatnorm::exact::format_rational(&lambda).as_bytes());
            Ok(Outcome {
                name: "msfn",
                digest: digest.hex(),
                outputs: with_weights(record::msfn_result(&loaded.complex, &lambda, &result), &args.problem, &problem),
                out: args.problem.out.clone(),
            })
        }
        Command::Sweep(args) => {
            let loaded = load_problem(&args.problem)?;
            let lambdas = lambda_list(args)?;
            let problem = build_problem(&args.problem, &loaded, BigRational::from_integer(0.into()))?;
            let sweep = lambda_sweep(&problem, &lambdas, options(&args.problem))?;
            let mut digest = loaded.digest.clone();
            for l in &lambdas {
                digest.add("lambda", flatnorm::exact::format_rational(l).as_bytes());
            }
            let csv_path = args.csv.clone().or_else(|| args.problem.out.as_ref().map(|p| p.with_extension("csv")));
            if let Some(path) = csv_path {
                let mut writer = csv::Writer::from_writer(Vec::new());
                writer.write_record(["lambda", "F", "x_mass", "s_mass", "solver_path"]).map_err(internal)?;
                for (l, r) in &sweep.points {
                    let path_name = format!("{:?}", r.solver_path);
                    writer
                        .write_record([
                            to_f64(l).to_string(),
                            to_f64(&r.flat_norm).to_string(),
                            to_f64(&r.x_mass).to_string(),
                            to_f64(&r.s_mass).to_string(),
                            path_name,
                        ])
                        .map_err(internal)?;
                }
                write_atomic(&path, &writer.into_inner().map_err(internal)?)?;
            }
            Ok(Outcome {
                name: "sweep",
                digest: digest.hex(),
                outputs: with_weights(record::sweep(&loaded.complex, &sweep), &args.problem, &problem),
                out: args.problem.out.clone(),
            })
        }
        Command::CertifyTu(args) => {
            let (k, mut digest) = mesh_digest(&args.mesh)?;
            digest.add("dim", &args.dim.to_le_bytes()).add("hint", &[u8::from(args.embedded_codim_one)]);
            let cert = certify(&k, args.dim, TuHints { embedded_codim_one: args.embedded_codim_one });
            let outputs = serde_json::to_value(&cert).map_err(internal)?;
            Ok(Outcome { name: "certify-tu", digest: digest.hex(), outputs, out: args.out.clone() })
        }
        Command::Regularity(args) => {
            let (k, digest) = mesh_digest(&args.mesh)?;
            let report = regularity_report(&k).map_err(|e| AppError::parse(e.to_string()))?;
            let mut outputs = serde_json::to_value(&report).map_err(internal)?;
            if !args.per_simplex {
                outputs.as_object_mut().map(|o| o.remove("per_simplex"));
            }
            Ok(Outcome { name: "regularity", digest: digest.hex(), outputs, out: args.out.clone() })
        }
        Command::Bounds(args) => {
            let (k, mut digest) = mesh_digest(&args.mesh)?;
            digest
                .add("dim", &args.dim.to_le_bytes())
                .add("mass_t", &args.mass_t.to_le_bytes())
                .add("mass_bdt", &args.mass_bdt.to_le_bytes());
            let report = regularity_report(&k).map_err(|e| AppError::parse(e.to_string()))?;
            let bounds = deformation_bounds(&report, args.dim, args.mass_t, args.mass_bdt)?;
            let comparison = compare_bounds(&report, args.dim, args.mass_t, args.mass_bdt).ok();
            let outputs = json!({ "bounds": bounds, "comparison": comparison });
            Ok(Outcome { name: "bounds", digest: digest.hex(), outputs, out: args.out.clone() })
        }
        Command::Retract(args) => {
            let (k, mut digest) = mesh_digest(&args.mesh)?;
            let curve = curve_digest(&mut digest, &args.curve)?;
            let opts = RetractOptions { samples: args.samples, retries: args.retries, seed: args.seed };
            digest.add("options", format!("{opts:?}").as_bytes());
            let trace = retract_curve(&k, &curve, opts)?;
            Ok(Outcome { name: "retract", digest: digest.hex(), outputs: record::retraction(&k, &trace), out: args.out.clone() })
        }
        Command::RefineStudy(args) => {
            let (k, mut digest) = mesh_digest(&args.mesh)?;
            let curve = curve_digest(&mut digest, &args.curve)?;
            let opts = RetractOptions { seed: args.seed, ..RetractOptions::default() };
            digest.add("levels", &args.levels.to_le_bytes()).add("options", format!("{opts:?}").as_bytes());
            let steps = refinement_convergence(&k, &curve, args.levels, opts)?;
            let outputs = serde_json::to_value(&steps).map_err(internal)?;
            Ok(Outcome { name: "refine-study", digest: digest.hex(), outputs, out: args.out.clone() })
        }
        Command::GenPyramid(args) => {
            if args.n < 4 {
                return Err(AppError::parse("--n must be at least 4"));
            }
            let (k, surface) = generate_noisy_pyramid(args.n, args.noise, args.seed);
            let (node, ele) = write_tetgen(&k)?;
            let prefix = &args.out_prefix;
            write_atomic(&prefix.with_extension("node"), node.as_bytes())?;
            write_atomic(&prefix.with_extension("ele"), ele.as_bytes())?;
            write_atomic(&prefix.with_extension("face"), write_face(&k, &surface).as_bytes())?;
            let mut digest = InputDigest::new();
            digest
                .add("n", &args.n.to_le_bytes())
                .add("noise", &args.noise.to_le_bytes())
                .add("seed", &args.seed.to_le_bytes());
            let content = InputDigest::new().add_complex(&k).add_chain(&surface).hex();
            let outputs = json!({
                "vertices": k.count(0),
                "triangles": k.count(2),
                "tetrahedra": k.count(3),
                "surface_triangles": surface.support_len(),
                "content_digest": content,
            });
            Ok(Outcome { name: "gen-pyramid", digest: digest.hex(), outputs, out: args.out.clone() })
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Msfn(_) => "msfn",
        Command::Sweep(_) => "sweep",
        Command::CertifyTu(_) => "certify-tu",
        Command::Regularity(_) => "regularity",
        Command::Bounds(_) => "bounds",
        Command::Retract(_) => "retract",
        Command::RefineStudy(_) => "refine-study",
        Command::GenPyramid(_) => "gen-pyramid",
    }
}

/// Runs one command and returns its record.
pub fn run_command(command: &Command) -> Result<ResultRecord, AppError> {
    let start = Instant::now();
    let outcome = execute(command)?;
    let record = ResultRecord {
        command: outcome.name.to_string(),
        inputs_digest: outcome.digest,
        outputs: outcome.outputs,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    if let Some(path) = &outcome.out {
        let mut text = serde_json::to_string_pretty(&record).map_err(internal)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    Ok(record)
}

/// Parses `args`, runs the command, prints the record (or an error record)
/// to `stdout` and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli.command) {
        Ok(record) => {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&record).unwrap_or_default());
            EXIT_OK
        }
        Err(e) => {
            let error = json!({
                "command": command_name(&cli.command),
                "error": { "kind": e.kind, "message": e.message },
                "exit_code": e.code,
            });
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&error).unwrap_or_default());
            e.code
        }
    }
}
