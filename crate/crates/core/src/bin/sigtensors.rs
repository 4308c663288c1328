//! Command-line front end: `sig`, `recover` and `bench`.
//!
//! Exit codes: 0 success, 1 recovery did not converge, 2 usage or shape
//! errors, 3 malformed input files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sigtensors::bench::{render_csv, render_table, run_bench, BenchConfig};
use sigtensors::io::{read_coef_csv, TextCoefficient};
use sigtensors::{
    sig, AnySequence, Algorithm, CoreKind, Error, FieldKind, GeomType, PathSpec, Rational,
    RecoveryOptions, RecoveryProblem, TensorAlgebraSpace, TensorSequence,
};

#[derive(Parser)]
#[command(name = "sigtensors", version, about = "Path signatures in the truncated tensor algebra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeomArg {
    Axis,
    Pwln,
    Poly,
    Spline,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Chen,
    Congruence,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Rational,
    Float64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Json,
    Flat,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoreArg {
    Axis,
    Monomial,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchFieldArg {
    Float64,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a truncated signature.
    Sig {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        level: usize,
        #[arg(long = "type", value_enum)]
        geom: GeomArg,
        /// CSV with one row per coordinate (required unless --type axis).
        #[arg(long)]
        coef: Option<PathBuf>,
        /// Spline piece degrees, e.g. "2,2".
        #[arg(long, value_delimiter = ',')]
        composition: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        regularity: i64,
        #[arg(long, value_enum, default_value = "chen")]
        algorithm: AlgorithmArg,
        #[arg(long, value_enum, default_value = "rational")]
        field: FieldArg,
        #[arg(long, value_enum, default_value = "json")]
        output: OutputArg,
    },
    /// Recover path coefficients from a signature.
    Recover {
        /// Target signature in JSON.
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        segments: usize,
        #[arg(long, value_enum, default_value = "axis")]
        core: CoreArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-iterations", default_value_t = 200)]
        max_iterations: usize,
        /// Initial guess as a CSV matrix.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Time Chen vs congruence on random piecewise-linear paths.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60")]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60")]
        segments: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "3,4")]
        levels: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_enum, default_value = "chen,congruence")]
        algorithms: Vec<AlgorithmArg>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        #[arg(long, value_enum, default_value = "float64")]
        field: BenchFieldArg,
    },
}

/// A failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Chen => Algorithm::Chen,
            AlgorithmArg::Congruence => Algorithm::Congruence,
        }
    }
}

struct SigArgs {
    dim: usize,
    level: usize,
    geom: GeomType,
    coef: Option<PathBuf>,
    composition: Option<Vec<usize>>,
    regularity: i64,
    algorithm: Algorithm,
}

fn compute_sig<S: TextCoefficient>(args: &SigArgs) -> Result<TensorSequence<S>, Failure> {
    let space = TensorAlgebraSpace::of::<S>(args.dim, args.level)?;
    let coef = match (&args.coef, args.geom) {
        (Some(_), GeomType::Axis) => {
            return Err(Error::InvalidArgument("--coef is not used with --type axis".into()).into())
        }
        (Some(path), _) => Some(read_coef_csv::<S>(path).map_err(|e| match e {
            Error::Io(io) => Failure {
                code: 2,
                message: format!("cannot read {}: {io}", path.display()),
            },
            other => other.into(),
        })?),
        (None, GeomType::Axis) => None,
        (None, _) => return Err(Error::InvalidArgument("--coef is required".into()).into()),
    };
    let spec = PathSpec {
        geom_type: args.geom,
        coef,
        composition: args.composition.clone(),
        regularity: args.regularity,
        algorithm: args.algorithm,
    };
    Ok(sig(space, &spec)?)
}

fn cmd_sig(args: SigArgs, field: FieldKind, output: OutputArg) -> Result<u8, Failure> {
    if args.regularity < 0 {
        return Err(Error::InvalidRegularity(args.regularity).into());
    }
    let result = match field {
        FieldKind::Rational => AnySequence::Rational(compute_sig::<Rational>(&args)?),
        FieldKind::Float64 => AnySequence::Float(compute_sig::<f64>(&args)?),
    };
    match output {
        OutputArg::Json => println!("{}", result.to_json_string()?),
        OutputArg::Flat => print!("{}", result.to_flat_text()),
    }
    Ok(0)
}

fn cmd_recover(
    target: PathBuf,
    segments: usize,
    core: CoreKind,
    options: RecoveryOptions,
    init: Option<PathBuf>,
) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(&target).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", target.display()),
    })?;
    let target = AnySequence::from_json_str(&text)?;
    let mut options = options;
    if let Some(path) = init {
        options.initial_guess = Some(read_coef_csv::<f64>(&path).map_err(|e| match e {
            Error::Io(io) => Failure {
                code: 2,
                message: format!("cannot read {}: {io}", path.display()),
            },
            other => other.into(),
        })?);
    }
    let problem = RecoveryProblem::new(target.to_f64(), segments, core, options).map_err(|e| {
        match e {
            Error::NotGroupElement(_) => Failure {
                code: 3,
                message: e.to_string(),
            },
            other => other.into(),
        }
    })?;
    let result = problem.recover()?;
    println!("{}", result.to_json());
    Ok(if result.converged { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Sig {
            dim,
            level,
            geom,
            coef,
            composition,
            regularity,
            algorithm,
            field,
            output,
        } => {
            let geom = match geom {
                GeomArg::Axis => GeomType::Axis,
                GeomArg::Pwln => GeomType::Pwln,
                GeomArg::Poly => GeomType::Poly,
                GeomArg::Spline => GeomType::Spline,
            };
            let field = match field {
                FieldArg::Rational => FieldKind::Rational,
                FieldArg::Float64 => FieldKind::Float64,
            };
            let args = SigArgs {
                dim,
                level,
                geom,
                coef,
                composition,
                regularity,
                algorithm: algorithm.into(),
            };
            cmd_sig(args, field, output)
        }
        Command::Recover {
            target,
            segments,
            core,
            tol,
            restarts,
            seed,
            max_iterations,
            init,
        } => {
            let core = match core {
                CoreArg::Axis => CoreKind::Axis,
                CoreArg::Monomial => CoreKind::Monomial,
            };
            let options = RecoveryOptions {
                max_iterations,
                residual_tolerance: tol,
                restarts,
                rng_seed: seed,
                initial_guess: None,
            };
            cmd_recover(target, segments, core, options, init)
        }
        Command::Bench {
            dims,
            segments,
            levels,
            algorithms,
            samples,
            seed,
            format,
            field: BenchFieldArg::Float64,
        } => {
            let config = BenchConfig {
                dimensions: dims,
                segments,
                levels,
                algorithms: algorithms.into_iter().map(Algorithm::from).collect(),
                samples,
                rng_seed: seed,
            };
            let rows = run_bench(&config)?;
            match format {
                FormatArg::Csv => print!("{}", render_csv(&rows)),
                FormatArg::Table => print!("{}", render_table(&rows)),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("sigtensors: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
