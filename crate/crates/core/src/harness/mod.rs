//! Scenario harness: JSON scenarios dispatched to the convergence checks.
//!
//! A scenario names a space, a check, a family from [`library`] and its
//! parameters. Reports are JSON lines; identical scenario and seed give
//! byte-identical output.

pub mod checks;
pub mod codec;
pub mod library;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use num_traits::Signed;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::measure::stone_check;
use crate::report::{CheckReport, Verdict};
use crate::scalar::Scalar;
use crate::space::{axioms_probe, BoxSpace};
use crate::Rational;

use checks::CheckConfig;
use codec::{decode_str, parse_space, AnySpace, SpaceCodec};
use library::Params;

pub const DEFAULT_BUDGET: usize = 10_000;

/// `2^-20`.
pub fn default_eps() -> Rational {
    Rational::two_pow_neg(20)
}

pub const CHECKS: &[&str] = &[
    "axioms",
    "banach",
    "condition_ii",
    "dct",
    "fatou",
    "flatten",
    "mct",
    "stone",
    "subsequence",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub check: String,
    #[serde(default = "default_space")]
    pub space: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
    /// Rational string; defaults to `2^-20`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trace: bool,
}

fn default_space() -> String {
    "boxes:1".into()
}

/// Command-line values that take precedence over the scenario's own.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub eps: Option<Rational>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub trace: bool,
}

fn field_err(path: &str, message: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        message: message.into(),
    }
}

impl ScenarioSpec {
    fn config(&self, o: &Overrides) -> Result<CheckConfig<Rational>> {
        let eps = match (&o.eps, &self.eps) {
            (Some(e), _) => e.clone(),
            (None, Some(s)) => {
                Rational::parse_exact(s).ok_or_else(|| field_err("eps", format!("invalid rational `{s}`")))?
            }
            (None, None) => default_eps(),
        };
        if !eps.is_positive() {
            return Err(field_err("eps", format!("tolerance must be positive, got {eps}")));
        }
        let budget = o.budget.or(self.budget).unwrap_or(DEFAULT_BUDGET);
        if budget == 0 {
            return Err(field_err("budget", "budget must be at least 1"));
        }
        Ok(CheckConfig {
            scenario: self.name.clone(),
            eps,
            budget,
            seed: o.seed.unwrap_or(self.seed),
            trace: o.trace || self.trace,
        })
    }

    fn family(&self) -> Result<&str> {
        self.family
            .as_deref()
            .ok_or_else(|| field_err("family", format!("check `{}` needs a family", self.check)))
    }

    fn boxes(&self, space: &AnySpace) -> Result<BoxSpace<Rational>> {
        match space {
            AnySpace::Boxes(sp) => Ok(sp.clone()),
            _ => Err(field_err(
                "space",
                format!("check `{}` runs on box spaces, not {}", self.check, self.space),
            )),
        }
    }
}

fn generic_check<Sp: SpaceCodec>(
    spec: &ScenarioSpec,
    cfg: &CheckConfig<Rational>,
    space: &Sp,
) -> Result<CheckReport> {
    let params = Params(&spec.params);
    let mut report = match spec.check.as_str() {
        "condition_ii" => {
            let fam = library::decreasing_family(space, spec.family()?, &params)?;
            checks::check_condition_ii(cfg, space, fam.as_ref())
        }
        "banach" => {
            let f = library::banach_family(space, spec.family()?, &params)?;
            checks::check_banach_completeness(cfg, &f)
        }
        "axioms" => axioms_probe(space, params.count("trials", 200)?, cfg.seed),
        "stone" => stone_check(space, params.count("trials", 200)?, cfg.seed),
        other => return Err(Error::UnknownCheck(other.to_string())),
    };
    report.scenario = spec.name.clone();
    if let Some(f) = &spec.family {
        report.bounds.entry("family".into()).or_insert_with(|| f.clone());
    }
    Ok(report)
}

/// Runs one scenario. `Err` is an input error, not a failed check.
pub fn run_scenario(spec: &ScenarioSpec, overrides: &Overrides) -> Result<CheckReport> {
    let cfg = spec.config(overrides)?;
    let space = parse_space(&spec.space).map_err(|e| field_err("space", e.to_string()))?;
    let params = Params(&spec.params);
    match spec.check.as_str() {
        "mct" => {
            let sp = spec.boxes(&space)?;
            let fam = library::monotone_family(&sp, spec.family()?, &params)?;
            Ok(checks::check_mct(&cfg, &sp, &fam))
        }
        "dct" => {
            let sp = spec.boxes(&space)?;
            let fam = library::dominated_family(&sp, spec.family()?, &params)?;
            Ok(checks::check_dct(&cfg, &sp, &fam))
        }
        "fatou" => {
            let sp = spec.boxes(&space)?;
            let fam = library::fatou_family(&sp, spec.family()?, &params)?;
            Ok(checks::check_fatou(&cfg, &sp, &fam))
        }
        "flatten" => {
            let sp = spec.boxes(&space)?;
            let (flat, total) = library::flatten_family(&sp, spec.family()?, &params)?;
            let mut r = checks::check_flatten(&cfg, &flat, &total);
            r.bound("family", spec.family()?);
            Ok(r)
        }
        "subsequence" => {
            let sp = spec.boxes(&space)?;
            let norm = library::norm_family(&sp, spec.family()?, &params)?;
            let count = params.count("count", 10)?;
            let mut r = checks::check_subsequence(&cfg, &*norm, count);
            r.bound("family", spec.family()?);
            Ok(r)
        }
        _ => match &space {
            AnySpace::Boxes(sp) => generic_check(spec, &cfg, sp),
            AnySpace::Counting(sp) => generic_check(spec, &cfg, sp),
            AnySpace::Finite(sp) => generic_check(spec, &cfg, sp),
        },
    }
}

/// A file holds one scenario object or an array of them.
pub fn parse_scenarios(text: &str) -> Result<Vec<ScenarioSpec>> {
    let v: Value = decode_str(text)?;
    match v {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, item)| codec::decode(item, &format!("[{i}]")))
            .collect(),
        other => Ok(vec![codec::decode(&other, "")?]),
    }
}

/// An input error tied to the file it came from.
#[derive(Debug)]
pub struct FileError {
    pub file: PathBuf,
    pub error: Error,
}

impl std::fmt::Display for FileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.file.display(), self.error)
    }
}

pub fn load_scenarios(path: &Path) -> std::result::Result<Vec<ScenarioSpec>, FileError> {
    let wrap = |error| FileError {
        file: path.to_path_buf(),
        error,
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| wrap(Error::Unsupported(format!("cannot read file: {e}"))))?;
    parse_scenarios(&text).map_err(wrap)
}

/// `*.json` files directly inside `dir`, sorted.
pub fn scenario_files(dir: &Path) -> std::result::Result<Vec<PathBuf>, FileError> {
    let entries = std::fs::read_dir(dir).map_err(|e| FileError {
        file: dir.to_path_buf(),
        error: Error::Unsupported(format!("cannot read directory: {e}")),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs scenarios concurrently; reports come back ordered by scenario name.
pub fn run_all(
    specs: &[ScenarioSpec],
    overrides: &Overrides,
) -> std::result::Result<Vec<CheckReport>, (String, Error)> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(specs.len().max(1));
    let chunk = specs.len().div_ceil(workers).max(1);
    let mut results: Vec<(String, Result<CheckReport>)> = std::thread::scope(|s| {
        let handles: Vec<_> = specs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|spec| (spec.name.clone(), run_scenario(spec, overrides)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    results.sort_by(|a, b| a.0.cmp(&b.0));
    results
        .into_iter()
        .map(|(name, r)| r.map_err(|e| (name, e)))
        .collect()
}

/// 0 if every verdict passed, 2 if any was inconclusive, 1 on any fail.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    match reports.iter().map(|r| r.verdict).max() {
        None | Some(Verdict::Pass) => 0,
        Some(Verdict::Inconclusive) => 2,
        Some(Verdict::Fail) => 1,
    }
}
