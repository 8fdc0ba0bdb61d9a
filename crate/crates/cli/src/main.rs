use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsdwt::bench::{run_bench, write_csv, BenchConfig, WallClock, THROUGHPUT_MODEL};
use nsdwt::pgm::read_pgm;
use nsdwt::report::{cmd_count, cmd_equiv, DEFAULT_TOLERANCE};
use nsdwt::rng::random_image;
use nsdwt::subband::write_subbands;
use nsdwt::{
    all_variants, build_variant, compile, polyphase_split, resolve_wavelet, Error, Extension, Precision, SchemeKind,
    WaveletSpec,
};

const EXIT_TOLERANCE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nsdwt",
    version,
    about = "Separable and non-separable 2-D wavelet transform schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the steps, factors and matrices of a scheme.
    Describe(DescribeArgs),
    /// Print steps and operations of every scheme as CSV.
    Count(CountArgs),
    /// Run every scheme on a random image and compare the outputs.
    Equiv(EquivArgs),
    /// Transform an image and write the four subbands.
    Transform(TransformArgs),
    /// Time schemes over a sweep of image sizes and write CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct WaveletArg {
    /// Built-in name (cdf53, cdf97, dd137) or path to a definition file.
    #[arg(long, short, default_value = "cdf53")]
    wavelet: String,
}

#[derive(Args)]
struct DescribeArgs {
    #[command(flatten)]
    wavelet: WaveletArg,
    /// Scheme id (sep-conv, sep-lift, ns-conv, ns-polyconv, ns-lift); all if omitted.
    #[arg(long, short)]
    scheme: Option<String>,
    /// Apply the constant-split optimization.
    #[arg(long)]
    optimize: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    wavelet: WaveletArg,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquivArgs {
    #[command(flatten)]
    wavelet: WaveletArg,
    /// Side length of the square test image.
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// periodic or symmetric
    #[arg(long, default_value = "periodic")]
    extension: String,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    wavelet: WaveletArg,
    #[arg(long, short, default_value = "ns-lift")]
    scheme: String,
    #[arg(long)]
    optimize: bool,
    /// PGM (P2 or P5) input; a seeded random image if omitted.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Side length of the random image used without --input.
    #[arg(long, default_value_t = 256)]
    size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "periodic")]
    extension: String,
    /// f32 or f64
    #[arg(long, default_value = "f32")]
    precision: String,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for the subbands.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    wavelet: WaveletArg,
    /// Scheme id; every scheme and optimized variant if omitted.
    #[arg(long, short)]
    scheme: Option<String>,
    #[arg(long)]
    optimize: bool,
    /// Comma-separated sizes, `N` or `WxH`.
    #[arg(long, default_value = "256,512,1024,2048,4096")]
    sizes: String,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value = "f32")]
    precision: String,
    #[arg(long, default_value = "periodic")]
    extension: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination; stdout if omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. }
            | Error::Csv(_)
            | Error::PgmHeader(_)
            | Error::PgmTruncated { .. }
            | Error::PgmMagic(_)
            | Error::SubbandHeader { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("I/O error on {}: {e}", path.display()),
    }
}

type CliResult = Result<(), Failure>;

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_scheme(id: &str, optimize: bool) -> Result<(SchemeKind, bool), Error> {
    match id.strip_suffix("+opt") {
        Some(base) => Ok((SchemeKind::from_id(base)?, true)),
        None => Ok((SchemeKind::from_id(id)?, optimize)),
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn describe(args: &DescribeArgs) -> CliResult {
    let w = resolve_wavelet(&args.wavelet.wavelet)?;
    let schemes = match &args.scheme {
        Some(id) => {
            let (kind, optimize) = parse_scheme(id, args.optimize)?;
            vec![build_variant(kind, &w, optimize)?]
        }
        None => all_variants(&w)?,
    };
    let text: Vec<String> = schemes.iter().map(|s| s.dump()).collect();
    emit(&text.join("\n"), args.out.as_deref())
}

fn count(args: &CountArgs) -> CliResult {
    let w = resolve_wavelet(&args.wavelet.wavelet)?;
    emit(&cmd_count(&w)?, args.out.as_deref())
}

fn equiv(args: &EquivArgs) -> CliResult {
    let w = resolve_wavelet(&args.wavelet.wavelet)?;
    let report = cmd_equiv(
        &w,
        args.size,
        args.seed,
        Extension::parse(&args.extension)?,
        args.tolerance,
    )?;
    print!("{}", report.render());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_TOLERANCE,
            message: format!(
                "deviation {:.3e} exceeds tolerance {:.1e}",
                report.max_pairwise, args.tolerance
            ),
        })
    }
}

fn transform(args: &TransformArgs) -> CliResult {
    let w = resolve_wavelet(&args.wavelet.wavelet)?;
    let (kind, optimize) = parse_scheme(&args.scheme, args.optimize)?;
    let precision = Precision::parse(&args.precision)?;
    let extension = Extension::parse(&args.extension)?;
    let img = match &args.input {
        Some(path) => read_pgm(path)?.to_precision(precision),
        None => random_image(args.size, args.size, args.seed, precision),
    };
    let input = polyphase_split(&img, extension)?;
    let scheme = build_variant(kind, &w, optimize)?;
    let plan = compile(
        &scheme,
        precision,
        extension,
        args.workers.unwrap_or_else(default_workers),
    );
    let out = plan.run(&input)?;
    for path in write_subbands(&out, &args.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> CliResult {
    let w: WaveletSpec = resolve_wavelet(&args.wavelet.wavelet)?;
    let schemes = match &args.scheme {
        Some(id) => vec![parse_scheme(id, args.optimize)?],
        None => SchemeKind::ALL.iter().flat_map(|&k| [(k, false), (k, true)]).collect(),
    };
    let config = BenchConfig {
        wavelet: w,
        schemes,
        sizes: nsdwt::bench::parse_sizes(&args.sizes)?,
        workers: args.workers.unwrap_or_else(default_workers),
        repeats: args.repeats,
        precision: Precision::parse(&args.precision)?,
        extension: Extension::parse(&args.extension)?,
        seed: args.seed,
    };
    let records = run_bench(&config, &mut WallClock)?;
    eprintln!("# {THROUGHPUT_MODEL}");
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_failure(path, e))?;
            write_csv(&records, BufWriter::new(file))?;
        }
        None => {
            let stdout = io::stdout();
            write_csv(&records, stdout.lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Describe(a) => describe(a),
        Command::Count(a) => count(a),
        Command::Equiv(a) => equiv(a),
        Command::Transform(a) => transform(a),
        Command::Bench(a) => bench(a),
    };
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nsdwt: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
