//! Browser bindings for the `ddrs` demo page.
//!
//! Every export takes and returns JSON strings. The functions drive the
//! solvers step by step instead of calling `run_experiment`, so no wall
//! clock is read and the module runs on `wasm32-unknown-unknown`.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use ddrs::algorithms::{baseline_gt_init, baseline_gt_step, ddrs_init, ddrs_step, ParameterAdvice};
use ddrs::harness::{
    advice_for, prepare, AlgorithmSpec, ExperimentConfig, GraphSpec, InitSpec, ProblemSpec, RecordFormat, StepSpec,
};
use ddrs::manifold::Mat;
use ddrs::metrics::IterationRecord;
use ddrs::network::{block_mean, mix};

/// Largest accepted iteration budget and network size.
const MAX_ITERS: usize = 2000;
const MAX_AGENTS: usize = 64;

#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct TraceRequest {
    pub graph: String,
    pub p: f64,
    pub n: usize,
    pub m_per: usize,
    pub d: usize,
    pub r: usize,
    pub beta_hat: f64,
    pub t: usize,
    pub iters: usize,
    pub seed: u64,
    pub common_init: bool,
}

impl Default for TraceRequest {
    fn default() -> Self {
        Self {
            graph: "erdos_renyi".into(),
            p: 0.6,
            n: 8,
            m_per: 1000,
            d: 10,
            r: 5,
            beta_hat: 6000.0,
            t: 10,
            iters: 300,
            seed: 0,
            common_init: false,
        }
    }
}

impl TraceRequest {
    fn config(&self) -> Result<ExperimentConfig, String> {
        if self.iters > MAX_ITERS {
            return Err(format!("at most {MAX_ITERS} iterations"));
        }
        if self.n > MAX_AGENTS {
            return Err(format!("at most {MAX_AGENTS} agents"));
        }
        let graph = match self.graph.as_str() {
            "ring" => GraphSpec::Ring,
            "complete" => GraphSpec::Complete,
            "erdos_renyi" => GraphSpec::ErdosRenyi { p: self.p },
            other => return Err(format!("unknown graph `{other}`")),
        };
        Ok(ExperimentConfig {
            problem: ProblemSpec::Synthetic {
                n: self.n,
                m_per: self.m_per,
                d: self.d,
                r: self.r,
                xi: 0.8,
                seed: None,
            },
            graph,
            graph_seed: None,
            algorithm: AlgorithmSpec::Ddrs,
            step: StepSpec::BetaHat(self.beta_hat),
            t: self.t,
            max_iters: self.iters,
            log_every: 1,
            output: None,
            format: RecordFormat::Csv,
            master_seed: self.seed,
            init: if self.common_init {
                InitSpec::Common
            } else {
                InitSpec::Independent
            },
        })
    }
}

#[derive(Debug, Serialize)]
pub struct Trace {
    pub alpha: f64,
    pub sigma2: f64,
    pub ddrs: Vec<IterationRecord>,
    pub baseline: Vec<IterationRecord>,
    /// Set when a run stopped early.
    pub ddrs_error: Option<String>,
    pub baseline_error: Option<String>,
}

/// DDRS and the gradient-tracking baseline on the same data, graph and start.
pub fn trace(req: &TraceRequest) -> Result<Trace, String> {
    let cfg = req.config()?;
    let prep = prepare(&cfg).map_err(|e| e.to_string())?;
    let params = prep.params(&cfg);
    let problem = &prep.instances;
    let gt = prep.ground_truth.as_ref();
    let eval = |k, x: &[Mat], s: Option<&[Mat]>| {
        ddrs::harness::evaluate(k, x, s, problem, params.alpha, gt, None, 0).map_err(|e| e.to_string())
    };

    let mut ddrs = Vec::with_capacity(cfg.max_iters + 1);
    let mut ddrs_error = None;
    let (mut st, _) = ddrs_init(problem, &prep.w, &params, &prep.x0).map_err(|e| e.to_string())?;
    ddrs.push(eval(0, &st.x, Some(&st.s))?);
    for k in 1..=cfg.max_iters {
        match ddrs_step(&mut st, problem, &prep.w, &params)
            .map_err(|e| e.to_string())
            .and_then(|_| eval(k, &st.x, Some(&st.s)))
        {
            Ok(r) => ddrs.push(r),
            Err(e) => {
                ddrs_error = Some(e);
                break;
            }
        }
    }

    let mut baseline = Vec::with_capacity(cfg.max_iters + 1);
    let mut baseline_error = None;
    let mut bs = baseline_gt_init(problem, &prep.x0).map_err(|e| e.to_string())?;
    baseline.push(eval(0, &bs.x, None)?);
    for k in 1..=cfg.max_iters {
        match baseline_gt_step(&mut bs, problem, &prep.w, &params)
            .map_err(|e| e.to_string())
            .and_then(|_| eval(k, &bs.x, None))
        {
            Ok(r) => baseline.push(r),
            Err(e) => {
                baseline_error = Some(e);
                break;
            }
        }
    }
    Ok(Trace {
        alpha: prep.alpha,
        sigma2: prep.w.sigma2(),
        ddrs,
        baseline,
        ddrs_error,
        baseline_error,
    })
}

#[derive(Debug, Serialize)]
pub struct Contraction {
    pub sigma2: f64,
    /// `‖mix(W, t, X) − X̄‖ / ‖X − X̄‖` for `t = 1..=t_max`.
    pub ratio: Vec<f64>,
    /// `σ₂ᵗ`.
    pub bound: Vec<f64>,
}

/// Gossip contraction of the seeded starting stack on the requested graph.
pub fn contraction(req: &TraceRequest, t_max: usize) -> Result<Contraction, String> {
    let cfg = req.config()?;
    let prep = prepare(&cfg).map_err(|e| e.to_string())?;
    let w = &prep.w;
    let x: Vec<Mat> = prep.x0.iter().map(|p| p.as_mat().clone()).collect();
    let mean = block_mean(&x);
    let dev = |blocks: &[Mat]| blocks.iter().map(|b| (b - &mean).norm_squared()).sum::<f64>().sqrt();
    let start = dev(&x);
    let mut ratio = Vec::with_capacity(t_max);
    for t in 1..=t_max.min(MAX_ITERS) {
        let mixed = mix(w, t, &x).map_err(|e| e.to_string())?;
        ratio.push(if start > 0.0 { dev(&mixed) / start } else { 0.0 });
    }
    let sigma2 = w.sigma2();
    let bound = (1..=ratio.len()).map(|t| sigma2.powi(t as i32)).collect();
    Ok(Contraction { sigma2, ratio, bound })
}

pub fn advice(req: &TraceRequest) -> Result<ParameterAdvice, String> {
    let cfg = req.config()?;
    let prep = prepare(&cfg).map_err(|e| e.to_string())?;
    advice_for(&prep, &cfg).map_err(|e| e.to_string())
}

fn request(json: &str) -> Result<TraceRequest, String> {
    serde_json::from_str(json).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(v: Result<T, String>) -> Result<String, String> {
    v.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
}

pub fn run_trace_json(json: &str) -> Result<String, String> {
    to_json(request(json).and_then(|r| trace(&r)))
}

pub fn mixing_contraction_json(json: &str, t_max: usize) -> Result<String, String> {
    to_json(request(json).and_then(|r| contraction(&r, t_max)))
}

pub fn advise_json(json: &str) -> Result<String, String> {
    to_json(request(json).and_then(|r| advice(&r)))
}

#[wasm_bindgen]
pub fn run_trace(json: &str) -> Result<String, JsValue> {
    run_trace_json(json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mixing_contraction(json: &str, t_max: usize) -> Result<String, JsValue> {
    mixing_contraction_json(json, t_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn advise(json: &str) -> Result<String, JsValue> {
    advise_json(json).map_err(|e| JsValue::from_str(&e))
}
