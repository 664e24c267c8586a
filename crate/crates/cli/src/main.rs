//! `ccl`: validate theories, compute query bounds, export probabilistic
//! satisfiability instances and evaluate pairwise rankings.
//!
//! Exit status is 0 on success, 1 when the input is well formed but violates
//! a domain condition, and 2 on I/O or parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccl::inference::{
    credal_bounds_single_space, credal_bounds_strong_extension, icl_probability,
    independent_probability, outer_bound, IntervalResult,
};
use ccl::psat::{bisect_bounds, build_psat_instance};
use ccl::ranking::{
    evaluate, evaluate_counts, synthetic_dataset, Backend, CountMatrix, EvaluationOptions, Holdout,
    RankConvention, RankingDataset,
};
use ccl::rational::{parse_rational, to_f64, Pretty, Rational};
use ccl::theory::{parse_theory, Query, Theory, TheoryFile};
use ccl::worlds::WorldSpace;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ccl", version, about = "Credal choice logic inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a theory file and list every violated condition.
    Validate { theory: PathBuf },
    /// Bounds on the success probability of queries.
    Infer {
        theory: PathBuf,
        /// Comma-separated literals, e.g. `\+ a1g, \+ a2r`; defaults to the
        /// file's `query` lines.
        #[arg(long)]
        query: Option<String>,
        #[arg(long, value_enum, default_value_t = InferMethod::Auto)]
        method: InferMethod,
        /// Bisection tolerance for `psat`.
        #[arg(long, default_value = "2^-10")]
        epsilon: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Write the satisfiability instance for "P(query) = alpha".
    PsatExport {
        theory: PathBuf,
        #[arg(long)]
        query: Option<String>,
        #[arg(long)]
        alpha: String,
        /// Also write the probability-one formula in DIMACS form here.
        #[arg(long)]
        dimacs: Option<PathBuf>,
    },
    /// Pairwise preferences from rankings (one per line) or a counts CSV.
    Rank {
        /// Rankings file, or counts file when the name ends in `.csv`.
        input: Option<PathBuf>,
        #[arg(long, default_value = "1/2")]
        threshold: String,
        #[arg(long, value_enum, default_value_t = RankMethod::Lp)]
        method: RankMethod,
        #[arg(long, default_value = "2^-10")]
        epsilon: String,
        /// Equivalent size of the smoothing prior.
        #[arg(long, default_value = "2")]
        smoothing: String,
        #[arg(long, value_enum, default_value_t = Convention::BetterFirst)]
        convention: Convention,
        /// Share of rankings held out for ground truth (rankings input only).
        #[arg(long)]
        holdout: Option<String>,
        /// Seed for the holdout split and the synthetic generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generate a synthetic dataset over this many objects instead of reading input.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 200)]
        size: usize,
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Dump the possible worlds and world classes of a theory.
    Worlds {
        theory: PathBuf,
        /// Merge all choice spaces first.
        #[arg(long)]
        merge: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InferMethod {
    /// `lp` for one choice space, `vertex` otherwise.
    Auto,
    Lp,
    Vertex,
    Outer,
    Psat,
    /// Point value with independent alternatives.
    Icl,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankMethod {
    Lp,
    Psat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    BetterFirst,
    LargerIndexFirst,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

enum Failure {
    /// Well-formed input violating a domain condition.
    Domain(String),
    /// Unreadable or malformed input.
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Input(m) => m,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { theory } => validate(&theory),
        Command::Infer {
            theory,
            query,
            method,
            epsilon,
            format,
        } => infer(&theory, query.as_deref(), method, &epsilon, format),
        Command::PsatExport {
            theory,
            query,
            alpha,
            dimacs,
        } => psat_export(&theory, query.as_deref(), &alpha, dimacs.as_deref()),
        Command::Rank {
            input: path,
            threshold,
            method,
            epsilon,
            smoothing,
            convention,
            holdout,
            seed,
            synthetic,
            size,
            noise,
            format,
        } => {
            let opts = EvaluationOptions {
                threshold: rational(&threshold)?,
                smoothing: rational(&smoothing)?,
                backend: match method {
                    RankMethod::Lp => Backend::Lp,
                    RankMethod::Psat => Backend::Psat {
                        epsilon: rational(&epsilon)?,
                    },
                },
                convention: match convention {
                    Convention::BetterFirst => RankConvention::BetterFirst,
                    Convention::LargerIndexFirst => RankConvention::LargerIndexFirst,
                },
                holdout: match holdout {
                    None => Holdout::InSample,
                    Some(f) => Holdout::Split {
                        test_fraction: rational(&f)?,
                        seed,
                    },
                },
            };
            let report = match (synthetic, path) {
                (Some(n), _) => {
                    evaluate(&synthetic_dataset(n, size, noise, seed), &opts).map_err(domain)?
                }
                (None, Some(p)) if p.extension().is_some_and(|e| e == "csv") => {
                    let counts = CountMatrix::parse_csv(&read(&p)?).map_err(input)?;
                    evaluate_counts(&counts, &opts).map_err(domain)?
                }
                (None, Some(p)) => {
                    let data = RankingDataset::parse(&read(&p)?).map_err(input)?;
                    evaluate(&data, &opts).map_err(domain)?
                }
                (None, None) => return Err(input("give an input file or --synthetic")),
            };
            match format {
                Format::Json => println!("{}", report.to_json()),
                Format::Table => print!("{}", report.to_table()),
            }
            Ok(())
        }
        Command::Worlds {
            theory,
            merge,
            format,
        } => {
            let file = load(&theory)?;
            let t = if merge {
                file.theory.merge_all()
            } else {
                file.theory
            };
            let ws = WorldSpace::build(&t).map_err(domain)?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&ws.to_json()).expect("json")
                ),
                Format::Table => print!("{}", ws.to_table(&t)),
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<TheoryFile, Failure> {
    parse_theory(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn rational(text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(input)
}

fn queries(file: &TheoryFile, query: Option<&str>) -> Result<Vec<Query>, Failure> {
    match query {
        Some(text) => Ok(vec![Query::parse(text).map_err(input)?]),
        None if file.queries.is_empty() => Err(input("no query given and none in the file")),
        None => Ok(file.queries.clone()),
    }
}

fn validate(path: &Path) -> Result<(), Failure> {
    let file = load(path)?;
    let report = file.theory.validate();
    if report.is_ok() {
        println!(
            "valid: {} clauses, {} choice spaces, {} atomic choices",
            file.theory.program().len(),
            file.theory.spaces().len(),
            file.theory.atomic_choices().len()
        );
        Ok(())
    } else {
        println!("{report}");
        Err(Failure::Domain(format!(
            "{} violation(s)",
            report.violations.len()
        )))
    }
}

fn infer(
    path: &Path,
    query: Option<&str>,
    method: InferMethod,
    epsilon: &str,
    format: Format,
) -> Result<(), Failure> {
    let file = load(path)?;
    let t = &file.theory;
    t.ensure_valid().map_err(domain)?;
    let epsilon = rational(epsilon)?;
    for q in queries(&file, query)? {
        if let InferMethod::Icl = method {
            let v = if t.is_icl() {
                icl_probability(t, &q)
            } else {
                independent_probability(t, &q)
            };
            let v = v.map_err(domain)?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({ "value": v.to_string(), "value_dec": to_f64(&v), "method": "icl" })
                ),
                Format::Table => println!("{q}: {}", Pretty(&v)),
            }
            continue;
        }
        let r = bounds(t, &q, method, &epsilon)?;
        match format {
            Format::Json => println!("{}", r.to_json()),
            Format::Table => println!("{q}: {r}"),
        }
    }
    Ok(())
}

fn bounds(
    t: &Theory,
    q: &Query,
    method: InferMethod,
    epsilon: &Rational,
) -> Result<IntervalResult, Failure> {
    match method {
        InferMethod::Auto if t.spaces().len() == 1 => {
            credal_bounds_single_space(t, q).map_err(domain)
        }
        InferMethod::Auto | InferMethod::Vertex => {
            credal_bounds_strong_extension(t, q).map_err(domain)
        }
        InferMethod::Lp => credal_bounds_single_space(t, q).map_err(domain),
        InferMethod::Outer => outer_bound(t, q).map_err(domain),
        InferMethod::Psat => bisect_bounds(t, q, epsilon).map_err(domain),
        InferMethod::Icl => unreachable!("handled by the caller"),
    }
}

fn psat_export(
    path: &Path,
    query: Option<&str>,
    alpha: &str,
    dimacs: Option<&Path>,
) -> Result<(), Failure> {
    let file = load(path)?;
    let q = queries(&file, query)?.remove(0);
    let inst = build_psat_instance(&file.theory, &q, &rational(alpha)?).map_err(domain)?;
    print!("{}", inst.to_export_string().map_err(domain)?);
    if let Some(out) = dimacs {
        fs::write(out, inst.hard_dimacs().map_err(domain)?)
            .map_err(|e| input(format!("{}: {e}", out.display())))?;
    }
    Ok(())
}
