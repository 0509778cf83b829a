//! Flat `key = value` experiment configuration with dotted section keys.
//!
//! ```text
//! # synthetic-er06 with ten gossip rounds
//! problem.kind = synthetic
//! problem.xi = 0.8
//! graph.kind = erdos_renyi
//! graph.p = 0.6
//! algorithm.kind = ddrs
//! beta_hat = 6000
//! t = 10
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("missing required setting: {0}")]
    MissingRequired(String),
    #[error("conflicting settings: {0}")]
    Conflict(String),
    #[error("line {line}: bad value for `{key}`: {msg}")]
    TypeError { key: String, line: usize, msg: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Synthetic {
        n: usize,
        m_per: usize,
        d: usize,
        r: usize,
        xi: f64,
        seed: Option<u64>,
    },
    Mnist {
        path: PathBuf,
        n: usize,
        r: usize,
        seed: Option<u64>,
    },
}

impl ProblemSpec {
    pub fn n(&self) -> usize {
        match self {
            Self::Synthetic { n, .. } | Self::Mnist { n, .. } => *n,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Synthetic { seed, .. } | Self::Mnist { seed, .. } => *seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Ring,
    ErdosRenyi { p: f64 },
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Ddrs,
    Iddrs { eps0: f64, rho: f64 },
    BaselineGt,
}

/// Either `α` directly or `β̂` with `α = β̂ n / Σ m_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSpec {
    Alpha(f64),
    BetaHat(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

/// How initial points are drawn: one shared random point or one per agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    Common,
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub graph: GraphSpec,
    pub graph_seed: Option<u64>,
    pub algorithm: AlgorithmSpec,
    pub step: StepSpec,
    pub t: usize,
    pub max_iters: usize,
    pub log_every: usize,
    pub output: Option<PathBuf>,
    pub format: RecordFormat,
    pub master_seed: u64,
    pub init: InitSpec,
}

const KEYS: &[&str] = &[
    "problem.kind",
    "problem.n",
    "problem.m_per",
    "problem.d",
    "problem.r",
    "problem.xi",
    "problem.seed",
    "problem.path",
    "graph.kind",
    "graph.p",
    "graph.seed",
    "algorithm.kind",
    "algorithm.eps0",
    "algorithm.rho",
    "alpha",
    "beta_hat",
    "t",
    "max_iters",
    "log_every",
    "output",
    "format",
    "master_seed",
    "init",
];

pub const DEFAULT_MNIST_PATH: &str = "data/train-images-idx3-ubyte";

struct Entries(BTreeMap<String, (String, usize)>);

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { key: key.into(), line });
            }
            if map.insert(key.to_string(), (value.to_string(), line)).is_some() {
                return Err(ConfigError::Conflict(format!("`{key}` set twice (line {line})")));
            }
        }
        Ok(Self(map))
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|(v, _)| v.as_str())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::TypeError {
                key: key.into(),
                line: *line,
                msg: format!("`{v}`: {e}"),
            }),
        }
    }

    fn bad(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::TypeError {
            key: key.into(),
            line: self.0.get(key).map_or(0, |e| e.1),
            msg: msg.into(),
        }
    }
}

fn positive<T: PartialOrd + Default + Copy>(e: &Entries, key: &str, v: T) -> Result<T, ConfigError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(e.bad(key, "must be positive"))
    }
}

/// Parses a configuration document with the built-in defaults as base.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_over(text, None)
}

/// Parses a configuration document whose keys override `base` (typically a
/// preset). Without a base, `problem.kind` and one of `alpha`/`beta_hat` are
/// required.
pub fn parse_config_over(text: &str, base: Option<&ExperimentConfig>) -> Result<ExperimentConfig, ConfigError> {
    let e = Entries::parse(text)?;
    if e.has("alpha") && e.has("beta_hat") {
        return Err(ConfigError::Conflict(
            "set either `alpha` or `beta_hat`, not both".into(),
        ));
    }

    let kind = match e.str("problem.kind") {
        Some(k) => k.to_string(),
        None => match base.map(|b| &b.problem) {
            Some(ProblemSpec::Synthetic { .. }) => "synthetic".into(),
            Some(ProblemSpec::Mnist { .. }) => "mnist".into(),
            None => return Err(ConfigError::MissingRequired("problem.kind".into())),
        },
    };
    // inherit base fields only when the problem kind is unchanged
    let base_problem = base.map(|b| b.problem.clone());
    let problem = match kind.as_str() {
        "synthetic" => {
            let (mut n, mut m_per, mut d, mut r, mut xi, mut seed) = (8, 1000, 10, 5, 0.8, None);
            if let Some(ProblemSpec::Synthetic {
                n: bn,
                m_per: bm,
                d: bd,
                r: br,
                xi: bx,
                seed: bs,
            }) = base_problem
            {
                (n, m_per, d, r, xi, seed) = (bn, bm, bd, br, bx, bs);
            }
            if e.has("problem.path") {
                return Err(ConfigError::Conflict("`problem.path` only applies to mnist".into()));
            }
            let n = positive(&e, "problem.n", e.get("problem.n")?.unwrap_or(n))?;
            let m_per = positive(&e, "problem.m_per", e.get("problem.m_per")?.unwrap_or(m_per))?;
            let d = positive(&e, "problem.d", e.get("problem.d")?.unwrap_or(d))?;
            let r = positive(&e, "problem.r", e.get("problem.r")?.unwrap_or(r))?;
            if r > d {
                return Err(e.bad("problem.r", format!("r = {r} exceeds d = {d}")));
            }
            if n * m_per < d {
                return Err(e.bad("problem.m_per", format!("n·m_per = {} < d = {d}", n * m_per)));
            }
            let xi: f64 = e.get("problem.xi")?.unwrap_or(xi);
            if !(xi > 0.0 && xi < 1.0) {
                return Err(e.bad("problem.xi", "must lie in (0, 1)"));
            }
            let seed = e.get("problem.seed")?.or(seed);
            ProblemSpec::Synthetic {
                n,
                m_per,
                d,
                r,
                xi,
                seed,
            }
        }
        "mnist" => {
            let (mut path, mut n, mut r, mut seed) = (PathBuf::from(DEFAULT_MNIST_PATH), 8, 5, None);
            if let Some(ProblemSpec::Mnist {
                path: bp,
                n: bn,
                r: br,
                seed: bs,
            }) = base_problem
            {
                (path, n, r, seed) = (bp, bn, br, bs);
            }
            for key in ["problem.m_per", "problem.d", "problem.xi"] {
                if e.has(key) {
                    return Err(ConfigError::Conflict(format!("`{key}` does not apply to mnist")));
                }
            }
            let path = e.str("problem.path").map(PathBuf::from).unwrap_or(path);
            let n = positive(&e, "problem.n", e.get("problem.n")?.unwrap_or(n))?;
            let r = positive(&e, "problem.r", e.get("problem.r")?.unwrap_or(r))?;
            let seed = e.get("problem.seed")?.or(seed);
            ProblemSpec::Mnist { path, n, r, seed }
        }
        other => return Err(e.bad("problem.kind", format!("`{other}` is not synthetic|mnist"))),
    };

    let base_graph = base.map(|b| b.graph.clone());
    let graph = match e.str("graph.kind") {
        None => match base_graph {
            Some(GraphSpec::ErdosRenyi { p }) => GraphSpec::ErdosRenyi {
                p: e.get("graph.p")?.unwrap_or(p),
            },
            Some(g) => g,
            None => GraphSpec::ErdosRenyi {
                p: e.get("graph.p")?.unwrap_or(0.6),
            },
        },
        Some("ring") => GraphSpec::Ring,
        Some("complete") => GraphSpec::Complete,
        Some("erdos_renyi") => {
            let inherited = match base_graph {
                Some(GraphSpec::ErdosRenyi { p }) => p,
                _ => 0.6,
            };
            GraphSpec::ErdosRenyi {
                p: e.get("graph.p")?.unwrap_or(inherited),
            }
        }
        Some(other) => return Err(e.bad("graph.kind", format!("`{other}` is not ring|erdos_renyi|complete"))),
    };
    match graph {
        GraphSpec::ErdosRenyi { p } if !(p > 0.0 && p <= 1.0) => return Err(e.bad("graph.p", "must lie in (0, 1]")),
        GraphSpec::Ring | GraphSpec::Complete if e.has("graph.p") => {
            return Err(ConfigError::Conflict("`graph.p` only applies to erdos_renyi".into()))
        }
        GraphSpec::Ring if problem.n() < 3 => return Err(e.bad("graph.kind", "a ring needs n >= 3")),
        _ => {}
    }
    let graph_seed = e.get("graph.seed")?.or(base.and_then(|b| b.graph_seed));

    let base_alg = base.map(|b| b.algorithm);
    let alg_kind = match e.str("algorithm.kind") {
        Some(k) => k.to_string(),
        None => match base_alg {
            Some(AlgorithmSpec::Iddrs { .. }) => "iddrs".into(),
            Some(AlgorithmSpec::BaselineGt) => "baseline_gt".into(),
            _ => "ddrs".into(),
        },
    };
    let algorithm = match alg_kind.as_str() {
        "ddrs" | "baseline_gt" => {
            for key in ["algorithm.eps0", "algorithm.rho"] {
                if e.has(key) {
                    return Err(ConfigError::Conflict(format!("`{key}` only applies to iddrs")));
                }
            }
            if alg_kind == "ddrs" {
                AlgorithmSpec::Ddrs
            } else {
                AlgorithmSpec::BaselineGt
            }
        }
        "iddrs" => {
            let (eps0, rho) = match base_alg {
                Some(AlgorithmSpec::Iddrs { eps0, rho }) => (eps0, rho),
                _ => (1e-6, 0.9),
            };
            let eps0: f64 = e.get("algorithm.eps0")?.unwrap_or(eps0);
            let rho: f64 = e.get("algorithm.rho")?.unwrap_or(rho);
            if !(eps0 >= 0.0 && eps0.is_finite()) {
                return Err(e.bad("algorithm.eps0", "must be finite and >= 0"));
            }
            if !(rho > 0.0 && rho < 1.0) {
                return Err(e.bad("algorithm.rho", "must lie in (0, 1)"));
            }
            AlgorithmSpec::Iddrs { eps0, rho }
        }
        other => return Err(e.bad("algorithm.kind", format!("`{other}` is not ddrs|iddrs|baseline_gt"))),
    };

    let step = match (e.get::<f64>("alpha")?, e.get::<f64>("beta_hat")?) {
        (Some(a), _) => StepSpec::Alpha(positive(&e, "alpha", a)?),
        (_, Some(b)) => StepSpec::BetaHat(positive(&e, "beta_hat", b)?),
        _ => base
            .map(|b| b.step)
            .ok_or_else(|| ConfigError::MissingRequired("`alpha` or `beta_hat`".into()))?,
    };
    let (StepSpec::Alpha(a) | StepSpec::BetaHat(a)) = step;
    if !a.is_finite() {
        return Err(ConfigError::Conflict("step size must be finite".into()));
    }

    let t = positive(&e, "t", e.get("t")?.or(base.map(|b| b.t)).unwrap_or(1))?;
    let max_iters = e.get("max_iters")?.or(base.map(|b| b.max_iters)).unwrap_or(500);
    let log_every = positive(
        &e,
        "log_every",
        e.get("log_every")?.or(base.map(|b| b.log_every)).unwrap_or(1),
    )?;
    let output = e
        .str("output")
        .map(PathBuf::from)
        .or(base.and_then(|b| b.output.clone()));
    let format = match e.str("format") {
        None => base.map_or(RecordFormat::Csv, |b| b.format),
        Some("csv") => RecordFormat::Csv,
        Some("jsonl") => RecordFormat::Jsonl,
        Some(other) => return Err(e.bad("format", format!("`{other}` is not csv|jsonl"))),
    };
    let master_seed = e.get("master_seed")?.or(base.map(|b| b.master_seed)).unwrap_or(0);
    let init = match e.str("init") {
        None => base.map_or(InitSpec::Independent, |b| b.init),
        Some("common") => InitSpec::Common,
        Some("independent") => InitSpec::Independent,
        Some(other) => return Err(e.bad("init", format!("`{other}` is not common|independent"))),
    };

    Ok(ExperimentConfig {
        problem,
        graph,
        graph_seed,
        algorithm,
        step,
        t,
        max_iters,
        log_every,
        output,
        format,
        master_seed,
        init,
    })
}

pub const PRESETS: &[&str] = &[
    "synthetic-er03",
    "synthetic-er03-t1",
    "synthetic-er03-t10",
    "synthetic-er06",
    "synthetic-er06-t1",
    "synthetic-er06-t10",
    "synthetic-ring",
    "synthetic-ring-t1",
    "synthetic-ring-t10",
    "mnist-er06",
];

/// `β̂` per (graph, t): the best final stationarity of DDRS over a coarse
/// grid (steps of 500 to 1000) on the synthetic presets with master seed 0.
fn tuned_beta_hat(graph: &str, t: usize) -> f64 {
    match (graph, t) {
        ("er03", 1) => 800.0,
        ("er03", _) => 5000.0,
        ("er06", 1) => 3500.0,
        ("ring", 1) => 2000.0,
        _ => 6000.0,
    }
}

/// Named configurations. A bare synthetic name is its `-t10` variant.
pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let unknown = || ConfigError::UnknownPreset(name.into());
    if name == "mnist-er06" {
        let path = std::env::var_os("DDRS_MNIST_PATH").map_or_else(|| PathBuf::from(DEFAULT_MNIST_PATH), PathBuf::from);
        return Ok(ExperimentConfig {
            problem: ProblemSpec::Mnist {
                path,
                n: 8,
                r: 5,
                seed: None,
            },
            graph: GraphSpec::ErdosRenyi { p: 0.6 },
            graph_seed: None,
            algorithm: AlgorithmSpec::Ddrs,
            // scale estimate giving αL_f ≈ 1/2 on pixel data in [0, 1]; untuned
            step: StepSpec::BetaHat(0.005),
            t: 10,
            max_iters: 500,
            log_every: 1,
            output: None,
            format: RecordFormat::Csv,
            master_seed: 0,
            init: InitSpec::Independent,
        });
    }
    let rest = name.strip_prefix("synthetic-").ok_or_else(unknown)?;
    let (graph_name, t) = match rest.rsplit_once('-') {
        Some((g, "t1")) => (g, 1),
        Some((g, "t10")) => (g, 10),
        Some(_) => return Err(unknown()),
        None => (rest, 10),
    };
    let graph = match graph_name {
        "er03" => GraphSpec::ErdosRenyi { p: 0.3 },
        "er06" => GraphSpec::ErdosRenyi { p: 0.6 },
        "ring" => GraphSpec::Ring,
        _ => return Err(unknown()),
    };
    Ok(ExperimentConfig {
        problem: ProblemSpec::Synthetic {
            n: 8,
            m_per: 1000,
            d: 10,
            r: 5,
            xi: 0.8,
            seed: None,
        },
        graph,
        graph_seed: None,
        algorithm: AlgorithmSpec::Ddrs,
        step: StepSpec::BetaHat(tuned_beta_hat(graph_name, t)),
        t,
        max_iters: 500,
        log_every: 1,
        output: None,
        format: RecordFormat::Csv,
        master_seed: 0,
        init: InitSpec::Independent,
    })
}
