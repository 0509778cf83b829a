//! Experiment driver: data, graph and initial point from independent seeded
//! substreams, then the solver loop with centralized monitoring.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{AlgorithmSpec, ExperimentConfig, GraphSpec, InitSpec, ProblemSpec, StepSpec};
use crate::algorithms::{
    advise_parameters, baseline_gt_init, baseline_gt_step, ddrs_init, ddrs_step, iddrs_step, AdvisorInputs,
    EpsSchedule, InitialGaps, ParameterAdvice, SolverParams,
};
use crate::error::{Error, Result};
use crate::manifold::{manifold_constants, subspace_distance, Mat, StiefelPoint};
use crate::metrics::{
    consensus_and_stationarity, dre_value, neighborhood_report, objective_at, rate_fit, IterationRecord, RecordField,
};
use crate::network::{gen_erdos_renyi, gen_ring, metropolis_weights, Graph, MixingMatrix};
use crate::problems::{
    gen_synthetic, load_idx, normalize_and_split, principal_subspace, Dataset, DpcaInstance, LocalObjective,
};

const DATA_STREAM: u64 = 1;
const GRAPH_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;

/// At most this many neighbourhood violation messages are kept per run.
const MAX_VIOLATION_MESSAGES: usize = 50;

/// Seeded generator for one purpose; distinct purposes never share a stream.
pub fn substream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub master: u64,
    pub data: u64,
    pub graph: u64,
    pub init: u64,
}

impl Seeds {
    pub fn resolve(config: &ExperimentConfig) -> Self {
        let m = config.master_seed;
        Self {
            master: m,
            data: config.problem.seed().unwrap_or(m),
            graph: config.graph_seed.unwrap_or(m),
            init: m,
        }
    }
}

/// Everything a run needs before the first iteration.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub dataset: Dataset,
    pub instances: Vec<DpcaInstance>,
    pub ground_truth: Option<StiefelPoint>,
    pub graph: Graph,
    pub w: MixingMatrix,
    pub alpha: f64,
    pub x0: Vec<StiefelPoint>,
    pub seeds: Seeds,
}

impl Prepared {
    pub fn params(&self, config: &ExperimentConfig) -> SolverParams {
        let p = SolverParams::new(self.alpha, config.t, config.max_iters);
        match config.algorithm {
            AlgorithmSpec::Iddrs { eps0, rho } => p.with_eps(EpsSchedule { eps0, rho }),
            _ => p,
        }
    }

    pub fn optimal_value(&self) -> Option<f64> {
        self.ground_truth
            .as_ref()
            .and_then(|gt| objective_at(gt, &self.instances).ok())
    }
}

pub fn build_dataset(problem: &ProblemSpec, seed: u64) -> Result<Dataset> {
    let mut rng = substream(seed, DATA_STREAM);
    match problem {
        ProblemSpec::Synthetic { n, m_per, d, r, xi, .. } => gen_synthetic(*n, *m_per, *d, *r, *xi, &mut rng),
        ProblemSpec::Mnist { path, n, r, .. } => {
            let images = load_idx(path)?;
            let mut ds = normalize_and_split(&images, *n, *r, &mut rng)?;
            ds.ground_truth = Some(principal_subspace(&ds.instances()?, *r)?);
            Ok(ds)
        }
    }
}

pub fn build_graph(spec: &GraphSpec, n: usize, seed: u64) -> Result<Graph> {
    match spec {
        GraphSpec::Ring => gen_ring(n),
        GraphSpec::Complete => Graph::complete(n),
        GraphSpec::ErdosRenyi { p } => gen_erdos_renyi(n, *p, &mut substream(seed, GRAPH_STREAM)),
    }
}

/// `α` itself, or `β̂ n / Σ m_i`.
pub fn resolve_alpha(step: StepSpec, n: usize, total_rows: usize) -> f64 {
    match step {
        StepSpec::Alpha(a) => a,
        StepSpec::BetaHat(b) => b * n as f64 / total_rows as f64,
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let seeds = Seeds::resolve(config);
    let dataset = build_dataset(&config.problem, seeds.data)?;
    let instances = dataset.instances()?;
    let n = instances.len();
    let graph = build_graph(&config.graph, n, seeds.graph)?;
    let w = metropolis_weights(&graph)?;
    let alpha = resolve_alpha(config.step, n, dataset.total_rows());
    let (d, r) = (dataset.meta.d, dataset.meta.r);
    let mut rng = substream(seeds.init, INIT_STREAM);
    let x0 = match config.init {
        InitSpec::Common => vec![StiefelPoint::random(d, r, &mut rng); n],
        InitSpec::Independent => (0..n).map(|_| StiefelPoint::random(d, r, &mut rng)).collect(),
    };
    Ok(Prepared {
        ground_truth: dataset.ground_truth.clone(),
        dataset,
        instances,
        graph,
        w,
        alpha,
        x0,
        seeds,
    })
}

/// Riemannian Lipschitz bound `L_f + max_i ‖∇f_i(0)‖ + L_f √r` used by the
/// advisor, together with `‖∇f(0)‖`.
pub fn lipschitz_estimate<O: LocalObjective>(problem: &[O], d: usize, r: usize) -> Result<(f64, f64)> {
    let zero = Mat::zeros(d, r);
    let lf = problem.iter().map(|f| f.smoothness()).fold(0.0, f64::max);
    let mut g0_max = 0.0f64;
    let mut g0_sq = 0.0;
    for f in problem {
        let g = f.egrad(&zero)?.norm();
        g0_max = g0_max.max(g);
        g0_sq += g * g;
    }
    Ok((lf + g0_max + lf * (r as f64).sqrt(), g0_sq.sqrt()))
}

pub fn advice_for(prep: &Prepared, config: &ExperimentConfig) -> Result<ParameterAdvice> {
    let (d, r) = (prep.dataset.meta.d, prep.dataset.meta.r);
    let c = manifold_constants(d, r);
    let (lipschitz, grad0_norm) = lipschitz_estimate(&prep.instances, d, r)?;
    let schedule = match config.algorithm {
        AlgorithmSpec::Iddrs { eps0, rho } => Some(EpsSchedule { eps0, rho }),
        _ => None,
    };
    let x: Vec<Mat> = prep.x0.iter().map(|p| p.as_mat().clone()).collect();
    // z₀ = x₀, ȳ₀ = P(x̂₀) and d₀ = 0 = x̂₀ − ŝ₀
    let initial = consensus_and_stationarity(&x, &prep.instances)
        .ok()
        .map(|snap| InitialGaps {
            z_minus_ybar_sq: snap.consensus_sq,
            tracking_sq: 0.0,
        });
    advise_parameters(
        &AdvisorInputs {
            lipschitz,
            gamma: c.gamma,
            zeta: c.zeta,
            sigma2: prep.w.sigma2(),
            n: prep.instances.len(),
            grad0_norm,
            schedule,
        },
        initial.as_ref(),
    )
}

/// Metrics of one snapshot. `s` defaults to `x_i + α∇f_i(x_i)`, whose prox
/// is `x_i`, for methods without DRS variables.
pub fn evaluate<O: LocalObjective>(
    k: usize,
    x: &[Mat],
    s: Option<&[Mat]>,
    problem: &[O],
    alpha: f64,
    ground_truth: Option<&StiefelPoint>,
    mu_sq_max: Option<f64>,
    wall_ns: u64,
) -> Result<IterationRecord> {
    let snap = consensus_and_stationarity(x, problem)?;
    let dre = match s {
        Some(s) => dre_value(s, problem, alpha)?,
        None => {
            let s: Vec<Mat> = x
                .iter()
                .zip(problem)
                .map(|(xi, f)| f.egrad(xi).map(|g| xi + g * alpha))
                .collect::<Result<_>>()?;
            dre_value(&s, problem, alpha)?
        }
    };
    let obj = objective_at(&snap.xbar, problem)?;
    let ds = ground_truth.map(|gt| subspace_distance(&snap.xbar, gt)).transpose()?;
    let rec = IterationRecord {
        k,
        consensus_sq: snap.consensus_sq,
        stationarity_sq: snap.stationarity_sq,
        dre,
        obj,
        ds,
        mu_sq_max,
        wall_ns,
    };
    if ![rec.consensus_sq, rec.stationarity_sq, rec.dre, rec.obj]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::NonFinite("iteration metrics"));
    }
    Ok(rec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Diverged,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub error: Option<String>,
    pub iterations: usize,
    pub alpha: f64,
    pub sigma2: Option<f64>,
    pub final_record: Option<IterationRecord>,
    /// Slope of the running-min stationarity over `k ∈ [10, 200]`.
    pub rate_slope: Option<f64>,
    pub advice: Option<ParameterAdvice>,
    pub violation_count: usize,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub seeds: Seeds,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<IterationRecord>,
    pub summary: RunSummary,
}

fn classify(e: &Error) -> RunStatus {
    match e {
        Error::RankDeficient { .. } | Error::NonFinite(_) | Error::SolverStall { .. } => RunStatus::Diverged,
        _ => RunStatus::Failed,
    }
}

enum Stack {
    Drs(crate::algorithms::AgentStack),
    Baseline(crate::algorithms::BaselineStack),
}

/// Runs one experiment. Module errors end the run early and are reported in
/// the summary status rather than returned.
pub fn run_experiment(config: &ExperimentConfig) -> RunOutput {
    let seeds = Seeds::resolve(config);
    let mut summary = RunSummary {
        status: RunStatus::Completed,
        error: None,
        iterations: 0,
        alpha: f64::NAN,
        sigma2: None,
        final_record: None,
        rate_slope: None,
        advice: None,
        violation_count: 0,
        violations: Vec::new(),
        warnings: Vec::new(),
        seeds,
        config: config.clone(),
    };
    let mut records = Vec::new();
    if let Err(e) = drive(config, &mut records, &mut summary) {
        summary.status = classify(&e);
        summary.error = Some(e.to_string());
    }
    summary.final_record = records.last().cloned();
    summary.rate_slope = rate_fit(&records, RecordField::Stationarity, 10, 200).ok().map(|f| f.0);
    RunOutput { records, summary }
}

fn drive(config: &ExperimentConfig, records: &mut Vec<IterationRecord>, summary: &mut RunSummary) -> Result<()> {
    let started = Instant::now();
    let prep = prepare(config)?;
    summary.alpha = prep.alpha;
    summary.sigma2 = Some(prep.w.sigma2());
    match advice_for(&prep, config) {
        Ok(a) => summary.advice = Some(a),
        Err(e) => summary.warnings.push(format!("advisor unavailable: {e}")),
    }
    let params = prep.params(config);
    let problem = &prep.instances;
    let gt = prep.ground_truth.as_ref();
    let constants = manifold_constants(prep.dataset.meta.d, prep.dataset.meta.r);

    let mut stack = match config.algorithm {
        AlgorithmSpec::Ddrs | AlgorithmSpec::Iddrs { .. } => {
            let (stack, warnings) = ddrs_init(problem, &prep.w, &params, &prep.x0)?;
            summary.warnings.extend(warnings);
            Stack::Drs(stack)
        }
        AlgorithmSpec::BaselineGt => {
            summary
                .warnings
                .extend(params.validate(crate::algorithms::Deltas::new(constants).delta2)?);
            Stack::Baseline(baseline_gt_init(problem, &prep.x0)?)
        }
    };
    let snapshot = |k: usize, stack: &Stack, mu: Option<f64>| {
        let wall_ns = started.elapsed().as_nanos().min(u64::MAX as u128) as u64;
        match stack {
            Stack::Drs(st) => evaluate(k, &st.x, Some(&st.s), problem, params.alpha, gt, mu, wall_ns),
            Stack::Baseline(st) => evaluate(k, &st.x, None, problem, params.alpha, gt, mu, wall_ns),
        }
    };
    records.push(snapshot(0, &stack, None)?);

    for k in 1..=config.max_iters {
        let mut mu = None;
        match &mut stack {
            Stack::Drs(st) => {
                match config.algorithm {
                    AlgorithmSpec::Iddrs { .. } => {
                        let m = iddrs_step(st, problem, &prep.w, &params, k - 1)?;
                        mu = Some(m.into_iter().fold(0.0, f64::max));
                    }
                    _ => ddrs_step(st, problem, &prep.w, &params)?,
                }
                let report = neighborhood_report(st, &prep.w, params.t, constants)?;
                for v in report.violations {
                    summary.violation_count += 1;
                    if summary.violations.len() < MAX_VIOLATION_MESSAGES {
                        summary.violations.push(v);
                    }
                }
            }
            Stack::Baseline(st) => baseline_gt_step(st, problem, &prep.w, &params)?,
        }
        summary.iterations = k;
        if k % config.log_every == 0 || k == config.max_iters {
            records.push(snapshot(k, &stack, mu)?);
        }
    }
    Ok(())
}
