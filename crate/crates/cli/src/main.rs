//! `daniell`: integrals, norms, point values and measures of series
//! functions, and the scenario checks.
//!
//! Exit status: 0 when everything passed, 2 when something was
//! inconclusive (budget exhausted, no pointwise bound), 1 on a failed check
//! or an input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use daniell::completion::EvalResult;
use daniell::harness::codec::{decode_series, decode_set, decode_simple, decode_str, encode_simple, AnySeries, SetDoc, SpaceCodec};
use daniell::harness::{self, default_eps, Overrides, DEFAULT_BUDGET};
use daniell::measure::{dyadic_decomposition, mu_of, sigma_union};
use daniell::{CheckReport, ElementarySpace, Error, Rational, Scalar, SeriesFunction};

#[derive(Parser)]
#[command(name = "daniell", version, about = "Exact Daniell integration and convergence checks")]
struct Cli {
    /// Tolerance as a rational, e.g. 1/1024 (default 2^-20).
    #[arg(long, global = true, value_parser = parse_eps)]
    eps: Option<Rational>,
    /// Refinement budget (default 10000).
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON-lines reports instead of one summary line per check.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integral enclosure of a series function.
    Integrate {
        #[arg(long)]
        series: PathBuf,
    },
    /// Norm enclosure of a series function.
    Norm {
        #[arg(long)]
        series: PathBuf,
    },
    /// Value of a series function at a point (comma-separated coordinates or an index).
    Eval {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        at: String,
    },
    /// Measure of an integrable set or a disjoint union.
    Measure {
        #[arg(long)]
        set: PathBuf,
    },
    /// Dyadic level-set approximation f_n of a nonnegative simple function.
    Decompose {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Run scenario files.
    Check {
        #[arg(long, required = true)]
        scenario: Vec<PathBuf>,
        /// Record the per-step exact trace.
        #[arg(long)]
        trace: bool,
    },
    /// Run every scenario file in a directory.
    Suite {
        dir: PathBuf,
        #[arg(long)]
        trace: bool,
    },
}

fn parse_eps(s: &str) -> Result<Rational, String> {
    let q = Rational::parse_exact(s).ok_or_else(|| format!("invalid rational `{s}` (use p/q)"))?;
    if q <= Rational::from_int(0) {
        return Err(format!("tolerance must be positive, got {q}"));
    }
    Ok(q)
}

/// Input problems exit 1, undecided results exit 2.
enum Failure {
    Input(String),
    Inconclusive(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExhausted { .. } => Failure::Inconclusive(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

struct Ctx {
    eps: Rational,
    budget: usize,
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &PathBuf, r: Result<T, Error>) -> Result<T, Failure> {
    r.map_err(|e| match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn enclosure_json<Sp: ElementarySpace<Scalar = Rational>>(
    f: &SeriesFunction<Sp>,
    ctx: &Ctx,
    norm: bool,
) -> Result<Value, Failure> {
    let e = if norm {
        f.norm_enclosure_with(&ctx.eps, ctx.budget)?
    } else {
        f.integral_enclosure_with(&ctx.eps, ctx.budget)?
    };
    Ok(serde_json::to_value(e).expect("serializable"))
}

fn eval_json<Sp: SpaceCodec>(f: &SeriesFunction<Sp>, at: &str, ctx: &Ctx) -> Result<Value, Failure> {
    let x = f.space().parse_point(at)?;
    let r = f.eval_enclosure_with(&x, &ctx.eps, ctx.budget)?;
    let v = serde_json::to_value(&r).expect("serializable");
    match r {
        EvalResult::Unknown => Err(Failure::Inconclusive(format!("no pointwise bound at {at}: {v}"))),
        _ => Ok(v),
    }
}

fn series_command(path: &PathBuf, ctx: &Ctx, what: &str, at: Option<&str>) -> Result<Value, Failure> {
    let series = with_file(path, decode_series(&read(path)?))?;
    macro_rules! go {
        ($f:expr) => {
            match (what, at) {
                ("eval", Some(x)) => eval_json($f, x, ctx),
                (w, _) => enclosure_json($f, ctx, w == "norm"),
            }
        };
    }
    match &series {
        AnySeries::Boxes(f) => go!(f),
        AnySeries::Counting(f) => go!(f),
        AnySeries::Finite(f) => go!(f),
    }
}

fn measure_command(path: &PathBuf, ctx: &Ctx) -> Result<Value, Failure> {
    let doc = with_file(path, decode_set(&read(path)?))?;
    let value = match doc {
        SetDoc::Set(_, set) => mu_of(&set, &ctx.eps)?,
        SetDoc::Union(space, members, tail) => sigma_union(&space, &members, tail, &ctx.eps)?.measure,
    };
    Ok(serde_json::to_value(value).expect("serializable"))
}

fn decompose_command(path: &PathBuf, n: u32) -> Result<Value, Failure> {
    let v: Value = with_file(path, decode_str(&read(path)?))?;
    let f = with_file(path, decode_simple(&v, ""))?;
    let fnn = dyadic_decomposition(&f, n)?;
    Ok(json!({
        "n": n,
        "function": encode_simple(&fnn),
        "integral": fnn.integral().to_string(),
        "gap": (f.integral() - fnn.integral()).to_string(),
    }))
}

fn emit(reports: &[CheckReport], json: bool) {
    for r in reports {
        if json {
            println!("{}", r.to_json_line());
        } else {
            println!("{r}");
        }
    }
}

fn run_checks(files: &[PathBuf], overrides: &Overrides, json: bool) -> Result<i32, Failure> {
    let mut specs = Vec::new();
    for f in files {
        specs.extend(harness::load_scenarios(f).map_err(|e| Failure::Input(e.to_string()))?);
    }
    let reports = harness::run_all(&specs, overrides)
        .map_err(|(name, e)| Failure::Input(format!("scenario `{name}`: {e}")))?;
    emit(&reports, json);
    Ok(harness::exit_code(&reports))
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let ctx = Ctx {
        eps: cli.eps.clone().unwrap_or_else(default_eps),
        budget: cli.budget.unwrap_or(DEFAULT_BUDGET),
    };
    if ctx.budget == 0 {
        return Err(Failure::Input("budget must be at least 1".into()));
    }
    let overrides = |trace| Overrides {
        eps: cli.eps.clone(),
        budget: cli.budget,
        seed: cli.seed,
        trace,
    };
    let out = match &cli.command {
        Command::Integrate { series } => series_command(series, &ctx, "integrate", None)?,
        Command::Norm { series } => series_command(series, &ctx, "norm", None)?,
        Command::Eval { series, at } => series_command(series, &ctx, "eval", Some(at))?,
        Command::Measure { set } => measure_command(set, &ctx)?,
        Command::Decompose { function, n } => decompose_command(function, *n)?,
        Command::Check { scenario, trace } => return run_checks(scenario, &overrides(*trace), cli.json),
        Command::Suite { dir, trace } => {
            let files = harness::scenario_files(dir).map_err(|e| Failure::Input(e.to_string()))?;
            if files.is_empty() {
                return Err(Failure::Input(format!("{}: no scenario files", dir.display())));
            }
            return run_checks(&files, &overrides(*trace), cli.json);
        }
    };
    println!("{out}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Inconclusive(m)) => {
            eprintln!("inconclusive: {m}");
            ExitCode::from(2)
        }
    }
}
