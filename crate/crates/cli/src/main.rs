//! `bbp`: digit extraction, family generation, identity checks and
//! evaluation for BBP-type formulas.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 formula not supported
//! by the digit extractor, 64 usage error, 65 malformed formula file,
//! 74 I/O error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bbp_core::formula::{emit_formula, eval_p, parse_formula, preset};
use bbp_core::numerics::BigInt;
use bbp_core::spigot::{build_plan, extract_bits_with_threads, extract_hex_with_threads};
use bbp_core::verify::{verify_corollary, verify_decomposition, verify_theorem};
use bbp_core::{family, BbpFormula, Error, Radix};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

const EXIT_FAILED: u8 = 1;
const EXIT_UNSUPPORTED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

/// Upper limit on the number of `t` values one `verify` call accepts.
const MAX_T_VALUES: usize = 10_000;

#[derive(Parser)]
#[command(
    name = "bbp",
    version,
    about = "BBP-type formulas: digits, families and identity checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a window of binary or hex digits starting after bit --pos
    Digits(DigitsArgs),
    /// Write the family formula for an integer t
    Family(FamilyArgs),
    /// Run identity checks, one REPORT line each
    Verify(VerifyArgs),
    /// Evaluate a formula with a certified error bound
    Eval(EvalArgs),
}

#[derive(Args)]
struct DigitsArgs {
    /// Built-in formula
    #[arg(long, value_parser = ["golden", "log2"], conflicts_with = "formula")]
    preset: Option<String>,
    /// Formula file
    #[arg(long)]
    formula: Option<PathBuf>,
    /// Bits to skip after the binary point
    #[arg(long, default_value_t = 0)]
    pos: u64,
    /// Window size in bits (at most 64)
    #[arg(long, default_value_t = 32)]
    count: usize,
    /// Output radix, 2 or 16; for 16, --pos and --count must be multiples of 4
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=16))]
    radix: u32,
}

#[derive(Args)]
struct FamilyArgs {
    /// Nonzero integer parameter
    #[arg(long, allow_hyphen_values = true)]
    t: BigInt,
    /// Use the sqrt(5) log(phi) normalization (t = 1 only)
    #[arg(long)]
    corollary: bool,
    /// Write here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Family identity for each t
    #[arg(long)]
    theorem: bool,
    /// sqrt(5) log(phi) identity
    #[arg(long)]
    corollary: bool,
    /// Li1 decomposition for each t
    #[arg(long)]
    decomposition: bool,
    /// Values of t: `3`, `-2`, `1..5` (inclusive) or a comma list of these
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Bits of agreement required
    #[arg(long, default_value_t = 500)]
    bits: u32,
    /// Print ms=0 in reports so output is byte-identical across runs
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Formula file
    #[arg(conflicts_with = "preset", required_unless_present = "preset")]
    path: Option<PathBuf>,
    /// Built-in formula
    #[arg(long, value_parser = ["golden", "log2"])]
    preset: Option<String>,
    /// Fractional bits of working precision (at least 64)
    #[arg(long, default_value_t = 256)]
    bits: u32,
    /// Decimal digits to print; uncertified requests are marked with `~`
    #[arg(long)]
    digits: Option<usize>,
}

/// A failure with its exit code and message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::UnsupportedBase(_) | Error::UnsupportedDegree(_) => EXIT_UNSUPPORTED,
            Error::Parse { .. } | Error::Validation { .. } => EXIT_DATA,
            Error::Domain(_) | Error::InvalidArgument(_) => EXIT_USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn load_formula(preset_name: Option<&str>, path: Option<&Path>) -> Result<BbpFormula, Failure> {
    match (preset_name, path) {
        (Some(name), _) => {
            preset(name).ok_or_else(|| Failure::usage(format!("unknown preset `{name}`")))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            parse_formula(&text).map_err(|e| {
                let mut f = Failure::from(e);
                f.message = format!("{}: {}", path.display(), f.message);
                f
            })
        }
        (None, None) => Ok(preset("golden").expect("golden preset")),
    }
}

fn thread_count() -> Result<usize, Failure> {
    match std::env::var("BBP_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::usage(format!(
                "BBP_THREADS must be a non-negative integer, got `{v}`"
            ))
        }),
    }
}

fn cmd_digits(args: DigitsArgs) -> Outcome {
    let radix = Radix::from_value(args.radix)
        .ok_or_else(|| Failure::usage(format!("--radix must be 2 or 16, got {}", args.radix)))?;
    if args.count == 0 || args.count > 64 {
        return Err(Failure::usage("--count must be between 1 and 64 bits"));
    }
    if radix == Radix::Hex && (!args.pos.is_multiple_of(4) || !args.count.is_multiple_of(4)) {
        return Err(Failure::usage(
            "with --radix 16, --pos and --count must be multiples of 4",
        ));
    }
    let threads = thread_count()?;
    let formula = load_formula(args.preset.as_deref(), args.formula.as_deref())?;
    let plan = build_plan(&formula)?;
    let window = match radix {
        Radix::Binary => extract_bits_with_threads(&plan, args.pos, args.count, threads)?,
        Radix::Hex => extract_hex_with_threads(&plan, args.pos / 4, args.count / 4, threads)?,
    };
    println!("{window}");
    Ok(0)
}

fn cmd_family(args: FamilyArgs) -> Outcome {
    let inst = family::family_coeffs(&args.t)?;
    let formula = if args.corollary {
        inst.corollary_formula()?
    } else {
        inst.formula().clone()
    };
    let text = emit_formula(&formula);
    match args.output {
        Some(path) => fs::write(&path, text).map_err(|e| Failure::io(&path, e))?,
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e))?,
    }
    Ok(0)
}

fn parse_t_values(list: &str) -> Result<Vec<BigInt>, Failure> {
    let bad = || Failure::usage(format!("cannot read --t `{list}`"));
    let mut out = Vec::new();
    for item in list.split(',') {
        match item.split_once("..") {
            Some((a, b)) => {
                let a: i64 = a.trim().parse().map_err(|_| bad())?;
                let b: i64 = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(Failure::usage(format!("empty range `{item}` in --t")));
                }
                if (b - a) as usize >= MAX_T_VALUES {
                    return Err(Failure::usage(format!(
                        "--t accepts at most {MAX_T_VALUES} values"
                    )));
                }
                out.extend((a..=b).map(BigInt::from));
            }
            None => out.push(item.trim().parse().map_err(|_| bad())?),
        }
        if out.len() > MAX_T_VALUES {
            return Err(Failure::usage(format!(
                "--t accepts at most {MAX_T_VALUES} values"
            )));
        }
    }
    Ok(out)
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    if !(args.theorem || args.corollary || args.decomposition) {
        return Err(Failure::usage(
            "choose at least one of --theorem, --corollary, --decomposition",
        ));
    }
    let needs_t = args.theorem || args.decomposition;
    let ts = match (&args.t, needs_t) {
        (Some(list), true) => parse_t_values(list)?,
        (None, true) => return Err(Failure::usage("--theorem and --decomposition need --t")),
        (Some(_), false) => return Err(Failure::usage("--t has no effect with --corollary alone")),
        (None, false) => Vec::new(),
    };
    if ts.iter().any(|t| t == &BigInt::from(0)) {
        return Err(Failure::usage("t must be nonzero"));
    }

    let mut all_passed = true;
    let mut emit = |report: bbp_core::VerificationReport| {
        all_passed &= report.passed;
        if args.no_timing {
            println!("{} ms=0", report.summary());
        } else {
            println!("{report}");
        }
    };
    if args.theorem {
        for t in &ts {
            emit(verify_theorem(t, args.bits)?);
        }
    }
    if args.corollary {
        emit(verify_corollary(args.bits)?);
    }
    if args.decomposition {
        for t in &ts {
            emit(verify_decomposition(t, args.bits)?);
        }
    }
    Ok(if all_passed { 0 } else { EXIT_FAILED })
}

fn cmd_eval(args: EvalArgs) -> Outcome {
    let formula = load_formula(args.preset.as_deref(), args.path.as_deref())?;
    let result = eval_p(&formula, args.bits)?;
    let x = &result.value;
    let value = match args.digits {
        Some(d) => x.to_decimal(d).to_string(),
        None => {
            // every digit the bound certifies, and nothing more
            let most = (x.frac_bits() as usize * 30103) / 100000 + 2;
            x.to_decimal(most).text
        }
    };
    println!(
        "value={value} frac_bits={} err_ulp={} terms={}",
        x.frac_bits(),
        x.err_ulp(),
        result.terms_used
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Digits(args) => cmd_digits(args),
        Command::Family(args) => cmd_family(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("bbp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
