use std::fmt::Display;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdreduce::reductions::{
    check_proposition_conditions, reduce, ConstraintSpec, PaddingOptions, PaddingStrategy,
    Proposition, ReductionError, ReductionKind, ReductionRecord, ReductionRequest, SdInstance,
    DEFAULT_MAX_M, DEFAULT_MAX_N,
};
use sdreduce::solvers::{ExhaustiveConfig, PrangeConfig, SolveOutcome};
use sdreduce::tdm::TdmInstance;
use sdreduce::verify::{
    check_soundness, lift_solution, verify_roundtrip, RoundtripVerdict, SolverChoice,
    SoundnessConfig,
};

/// Exit codes.
const SOLVED: u8 = 0;
const UNSAT: u8 = 1;
const UNKNOWN: u8 = 2;
const INAPPLICABLE: u8 = 3;
const UNSOUND: u8 = 4;
const USAGE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "sdreduce",
    version,
    about = "Reductions from 3DM to syndrome decoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a 3DM instance
    Gen3dm {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        u: usize,
        /// Hide a perfect matching among the triples
        #[arg(long)]
        planted: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a 3DM instance to an SD instance plus its record
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        reduction: ReductionArgs,
        #[arg(long)]
        out_instance: PathBuf,
        #[arg(long)]
        out_record: PathBuf,
    },
    /// Solve an SD instance
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Solution file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift an SD solution back to a matching
    Lift {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Matching file with 0-based triple indices (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce, check soundness, solve and lift in one go
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        reduction: ReductionArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Prange iterations for sampled soundness checking
        #[arg(long, default_value_t = 0)]
        samples: u64,
        /// Where to write a non-lifting witness [default: <in>.witness]
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Check the sufficient conditions of a constraint family on a grid
    CheckProps {
        #[command(flatten)]
        constraint: ConstraintArgs,
        /// Range of t, e.g. 9..64 (inclusive)
        #[arg(long, value_parser = parse_range)]
        t: RangeInclusive<u64>,
        /// Range of u, e.g. 9..64 (inclusive)
        #[arg(long, value_parser = parse_range)]
        u: RangeInclusive<u64>,
        #[arg(long, value_enum, default_value_t = PropArg::Psd)]
        proposition: PropArg,
    },
}

#[derive(Args)]
struct ReductionArgs {
    #[arg(long, value_parser = parse_from_str::<ReductionKind>)]
    kind: ReductionKind,
    /// Padding of the subspace Goppa reductions
    #[arg(long, value_parser = parse_from_str::<PaddingStrategy>, default_value = "zero-rows")]
    strategy: PaddingStrategy,
    #[arg(long, default_value_t = 0)]
    padding_seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_M)]
    max_m: u32,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    max_n: u64,
    #[command(flatten)]
    constraint: ConstraintArgs,
}

#[derive(Args)]
struct ConstraintArgs {
    /// Named constraint family: goppa, goppa-psw or half-length
    #[arg(long, conflicts_with_all = ["f", "g"])]
    preset: Option<String>,
    /// Length constraint n = f(r, w)
    #[arg(long, requires = "g")]
    f: Option<String>,
    /// Redundancy r = g(t, u)
    #[arg(long, requires = "f")]
    g: Option<String>,
    /// Redundancy for odd t in the subspace variant
    #[arg(long, requires = "g")]
    g_odd: Option<String>,
    #[arg(long, default_value_t = 0, requires = "f")]
    lambda: u64,
    /// Upper bound P(t, u) on r
    #[arg(long, requires = "f")]
    p: Option<String>,
    /// Upper bound Q(t, u) on n
    #[arg(long, requires = "f")]
    q: Option<String>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Exhaustive)]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prange iterations
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    iterations: u64,
    /// Maximum supports examined by exhaustive search
    #[arg(long, default_value_t = 100_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Largest nullspace dimension enumerated in full
    #[arg(long, default_value_t = 24)]
    dim_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Prange,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropArg {
    Psd,
    Psw,
}

fn parse_from_str<T: FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

/// `a..b` or `a..=b` (both inclusive), or a single value.
fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let num = |x: &str| {
        x.trim()
            .parse::<u64>()
            .map_err(|_| format!("bad bound {x:?}"))
    };
    match s.split_once("..") {
        Some((a, b)) => Ok(num(a)?..=num(b.strip_prefix('=').unwrap_or(b))?),
        None => num(s).map(|v| v..=v),
    }
}

/// An error that ends the command with a given exit code.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(e: impl Display) -> Failure {
    Failure {
        code: USAGE,
        msg: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_file<T: FromStr>(path: &Path) -> Result<T, Failure>
where
    T::Err: Display,
{
    read(path)?
        .parse()
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl ConstraintArgs {
    fn spec(&self) -> Result<Option<ConstraintSpec>, Failure> {
        if let Some(name) = &self.preset {
            return ConstraintSpec::preset(name).map(Some).ok_or_else(|| {
                usage(format!(
                    "unknown preset {name:?} (known: {})",
                    ConstraintSpec::PRESETS.join(", ")
                ))
            });
        }
        let (Some(f), Some(g)) = (&self.f, &self.g) else {
            return Ok(None);
        };
        ConstraintSpec::parse(
            f,
            g,
            self.g_odd.as_deref(),
            self.lambda,
            self.p.as_deref(),
            self.q.as_deref(),
        )
        .map(Some)
        .map_err(usage)
    }
}

impl ReductionArgs {
    fn request(&self) -> Result<ReductionRequest, Failure> {
        let mut req = ReductionRequest::new(self.kind);
        req.padding = PaddingOptions {
            strategy: self.strategy,
            seed: self.padding_seed,
        };
        req.max_m = self.max_m;
        req.max_n = self.max_n;
        req.constraint = self.constraint.spec()?;
        Ok(req)
    }
}

impl SolverArgs {
    fn choice(&self) -> SolverChoice {
        match self.method {
            MethodArg::Exhaustive => SolverChoice::Exhaustive(ExhaustiveConfig {
                budget: self.budget,
                nullspace_dim_cap: self.dim_cap,
            }),
            MethodArg::Prange => SolverChoice::Prange(PrangeConfig {
                iterations: self.iterations,
                seed: self.seed,
            }),
        }
    }
}

fn reduction_failure(e: ReductionError) -> Failure {
    let code = match e {
        ReductionError::MissingConstraint(_) | ReductionError::Expr(_) => USAGE,
        _ => INAPPLICABLE,
    };
    Failure {
        code,
        msg: e.to_string(),
    }
}

fn outcome_code(o: &SolveOutcome) -> u8 {
    match o {
        SolveOutcome::Found(_) => SOLVED,
        SolveOutcome::Absent => UNSAT,
        SolveOutcome::Exhausted => UNKNOWN,
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Gen3dm {
            t,
            u,
            planted,
            seed,
            out,
        } => {
            let inst = if planted {
                TdmInstance::gen_planted(t, u, seed)
            } else {
                TdmInstance::gen_random(t, u, seed)
            }
            .map_err(usage)?;
            write(out.as_deref(), &inst.to_string())?;
            Ok(SOLVED)
        }
        Command::Reduce {
            input,
            reduction,
            out_instance,
            out_record,
        } => {
            let inst: TdmInstance = parse_file(&input)?;
            let red = reduce(&inst, &reduction.request()?).map_err(reduction_failure)?;
            write(Some(&out_instance), &red.instance.to_string())?;
            write(Some(&out_record), &red.record.to_string())?;
            eprintln!(
                "{}: n = {}, r = {}, w = {}",
                red.record.kind, red.record.n, red.record.r, red.record.w
            );
            Ok(SOLVED)
        }
        Command::Solve { input, solver, out } => {
            let inst: SdInstance = parse_file(&input)?;
            let outcome = solver.choice().solve(&inst);
            write(out.as_deref(), &outcome.to_string())?;
            Ok(outcome_code(&outcome))
        }
        Command::Lift {
            record,
            solution,
            out,
        } => {
            let rec: ReductionRecord = parse_file(&record)?;
            let outcome: SolveOutcome = parse_file(&solution)?;
            let sol = match outcome {
                SolveOutcome::Found(sol) => sol,
                other => {
                    eprintln!("nothing to lift: {}", other.to_string().trim());
                    return Ok(outcome_code(&other));
                }
            };
            match lift_solution(&rec, &sol).map_err(usage)? {
                Some(m) => {
                    let indices: Vec<String> = m.indices().iter().map(usize::to_string).collect();
                    write(out.as_deref(), &format!("{}\n", indices.join(" ")))?;
                    eprintln!("matching {}", m.labels());
                    Ok(SOLVED)
                }
                None => {
                    eprintln!("solution does not lift to a matching");
                    Ok(UNSOUND)
                }
            }
        }
        Command::Verify {
            input,
            reduction,
            solver,
            samples,
            witness_out,
        } => {
            let inst: TdmInstance = parse_file(&input)?;
            let req = reduction.request()?;
            let red = reduce(&inst, &req).map_err(reduction_failure)?;
            let witness_path = witness_out.unwrap_or_else(|| {
                let mut p = input.clone().into_os_string();
                p.push(".witness");
                PathBuf::from(p)
            });
            let cfg = SoundnessConfig {
                budget: solver.budget,
                nullspace_dim_cap: solver.dim_cap.min(30),
                samples,
                seed: solver.seed,
                probes: true,
            };
            let sound = check_soundness(&red.instance, &red.record, &cfg).map_err(usage)?;
            if let Some(w) = &sound.witness {
                write(
                    Some(&witness_path),
                    &SolveOutcome::Found(w.clone()).to_string(),
                )?;
                println!(
                    "verdict unsound soundness {} witness {}",
                    sound.method,
                    witness_path.display()
                );
                return Ok(UNSOUND);
            }
            let report =
                verify_roundtrip(&inst, &req, &solver.choice()).map_err(reduction_failure)?;
            let matching = report
                .matching
                .as_ref()
                .map_or_else(|| "-".to_string(), |m| m.labels());
            println!(
                "verdict {} soundness {} matching {matching}",
                report.verdict, sound.verdict
            );
            Ok(match report.verdict {
                RoundtripVerdict::Solved => SOLVED,
                RoundtripVerdict::AgreeUnsolvable => UNSAT,
                RoundtripVerdict::Unknown => UNKNOWN,
                RoundtripVerdict::LiftFailed => {
                    if let SolveOutcome::Found(sol) = &report.outcome {
                        write(
                            Some(&witness_path),
                            &SolveOutcome::Found(sol.clone()).to_string(),
                        )?;
                    }
                    UNSOUND
                }
                RoundtripVerdict::Disagree => UNSOUND,
            })
        }
        Command::CheckProps {
            constraint,
            t,
            u,
            proposition,
        } => {
            let spec = constraint
                .spec()?
                .ok_or_else(|| usage("check-props needs --preset or --f and --g"))?;
            let prop = match proposition {
                PropArg::Psd => Proposition::Psd,
                PropArg::Psw => Proposition::Psw,
            };
            let rep = check_proposition_conditions(&spec, t, u, prop).map_err(usage)?;
            print!("{rep}");
            Ok(if !rep.all_pass() {
                UNSAT
            } else if rep.vacuous() {
                UNKNOWN
            } else {
                SOLVED
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { SOLVED });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
