use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpix_cli::commands::{self, CliError, SearchMode, VerifyOptions, DEFAULT_SEED, DEFAULT_SHOTS};
use qpix_cli::image_io::{write_image, ImageFormat};
use qpix_cli::report;
use qpix_core::{PixelPosition, DEFAULT_MAX_RETRIES};

/// Encode grayscale images as NEQR quantum states and locate pixels with
/// Grover search on a statevector simulator.
///
/// Exit status: 0 success, 1 I/O / parse / validation error, 2 usage error,
/// 3 no pixel matches the search target, 4 search did not verify within the
/// retry budget, 5 verification property failed.
#[derive(Parser, Debug)]
#[command(name = "qpix", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a uniformly random image (PGM, or CSV for a .csv output path)
    Gen(GenArgs),
    /// Build the NEQR circuit of an image and sample its encoded state
    Encode(EncodeArgs),
    /// Run Grover search for a pixel and report the position histogram
    Search(SearchArgs),
    /// Check circuit/analytic equivalence and the Grover success law on random images
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report destination; stdout when omitted
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// PGM (P2/P5) or CSV image
    #[arg(long, short)]
    input: PathBuf,
    /// Bit depth for CSV input (PGM takes it from maxval)
    #[arg(long, default_value_t = 8)]
    csv_bits: u32,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Side exponent: the image is 2^n x 2^n
    #[arg(long = "side-exp", short = 'n', default_value_t = 1)]
    n: u32,
    /// Intensity bit depth
    #[arg(long = "bits", short = 'q', default_value_t = 8)]
    q: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write plain (P2) rather than binary (P5) PGM
    #[arg(long)]
    plain: bool,
    /// Image destination; plain PGM on stdout when omitted
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Target {
    /// Search for the minimum intensity
    #[arg(long)]
    darkest: bool,
    /// Search for pixels of this intensity
    #[arg(long, value_name = "V")]
    intensity: Option<u32>,
    /// Search for this position with a plain index oracle
    #[arg(long, value_name = "Y,X", value_parser = parse_position)]
    index: Option<PixelPosition>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    target: Target,
    /// Re-sampling attempts when the modal position fails verification
    #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
    max_retries: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    n_max: u32,
    #[arg(long, default_value_t = 8)]
    q_max: u32,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Drop one controlled-X from each preparation circuit (harness self-check)
    #[arg(long)]
    inject_fault: bool,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_position(s: &str) -> Result<PixelPosition, String> {
    let (y, x) = s.split_once(',').ok_or("expected Y,X")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok(PixelPosition::new(parse(y)?, parse(x)?))
}

fn emit(out: &OutputArgs, json: String, text: String) -> Result<(), CliError> {
    let body = match out.format {
        OutputFormat::Json => json,
        OutputFormat::Text => text,
    };
    match &out.output {
        Some(path) => commands::write_atomic(path, body.as_bytes()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => {
            let image = commands::generate_image(args.n, args.q, args.seed)?;
            match &args.output {
                Some(path) => {
                    let format = ImageFormat::for_path(path, args.plain);
                    commands::write_atomic(path, &write_image(&image, format))
                }
                None => {
                    let format = if args.plain {
                        ImageFormat::PlainPgm
                    } else {
                        ImageFormat::BinaryPgm
                    };
                    use std::io::Write;
                    std::io::stdout()
                        .write_all(&write_image(&image, format))
                        .map_err(|source| CliError::Io {
                            path: "<stdout>".into(),
                            source,
                        })
                }
            }
        }
        Command::Encode(args) => {
            let image = commands::read_image_file(&args.input.input, args.input.csv_bits)?;
            let r = commands::encode(&image, args.input.shots, args.input.seed)?;
            emit(&args.out, report::to_json(&r), report::encode_text(&r))
        }
        Command::Search(args) => {
            let image = commands::read_image_file(&args.input.input, args.input.csv_bits)?;
            let mode = match (
                args.target.darkest,
                args.target.intensity,
                args.target.index,
            ) {
                (_, Some(v), _) => SearchMode::Intensity(v),
                (_, _, Some(p)) => SearchMode::Index(p),
                _ => SearchMode::Darkest,
            };
            let r = commands::search(
                &image,
                mode,
                args.input.shots,
                args.input.seed,
                args.max_retries,
            )?;
            emit(&args.out, report::to_json(&r), report::search_text(&r))
        }
        Command::Verify(args) => {
            let r = commands::verify(VerifyOptions {
                n_max: args.n_max,
                q_max: args.q_max,
                trials: args.trials,
                seed: args.seed,
                inject_fault: args.inject_fault,
            })?;
            emit(&args.out, report::to_json(&r), report::verify_text(&r))?;
            if r.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = r
                    .properties
                    .iter()
                    .filter(|p| !p.passed)
                    .map(|p| p.name.as_str())
                    .collect();
                Err(CliError::VerifyFailed(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
