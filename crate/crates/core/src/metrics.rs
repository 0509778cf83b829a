//! Centralized monitoring oracles: stationarity and consensus, the
//! Douglas-Rachford envelope, neighbourhood diagnostics and rate fits.
//!
//! These use global information (block means, the full stack) and are never
//! fed back to the agents.

use serde::{Deserialize, Serialize};

use crate::algorithms::{AgentStack, Deltas};
use crate::error::{Error, Result};
use crate::manifold::{project_stiefel, tangent_project_raw, ManifoldConstants, Mat, StiefelPoint};
use crate::network::{block_mean, mix, MixingMatrix};
use crate::problems::LocalObjective;

/// One row of a run trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `‖x − x̄‖²` over the stacked blocks.
    pub consensus_sq: f64,
    /// `‖Σ_i grad f_i(x̄)‖²`.
    pub stationarity_sq: f64,
    pub dre: f64,
    /// `Σ_i f_i(x̄)`.
    pub obj: f64,
    /// Subspace distance of `x̄` to the ground truth.
    pub ds: Option<f64>,
    /// Largest realised squared prox residual of the iteration.
    pub mu_sq_max: Option<f64>,
    pub wall_ns: u64,
}

/// Quantities at the induced arithmetic mean `x̄ = P(x̂)`.
#[derive(Clone, Debug)]
pub struct MeanSnapshot {
    pub xbar: StiefelPoint,
    pub consensus_sq: f64,
    pub stationarity_sq: f64,
}

pub fn consensus_and_stationarity<O: LocalObjective>(x: &[Mat], problem: &[O]) -> Result<MeanSnapshot> {
    if x.is_empty() || x.len() != problem.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} blocks", problem.len()),
            found: format!("{}", x.len()),
        });
    }
    let xbar = project_stiefel(&block_mean(x))?;
    let consensus_sq = x.iter().map(|xi| (xi - xbar.as_mat()).norm_squared()).sum();
    let mut grad = Mat::zeros(xbar.dims().0, xbar.dims().1);
    for f in problem {
        grad += tangent_project_raw(xbar.as_mat(), &f.egrad(xbar.as_mat())?);
    }
    Ok(MeanSnapshot {
        xbar,
        consensus_sq,
        stationarity_sq: grad.norm_squared(),
    })
}

/// `Σ_i f_i(x̄)`.
pub fn objective_at<O: LocalObjective>(xbar: &StiefelPoint, problem: &[O]) -> Result<f64> {
    problem.iter().map(|f| f.value(xbar.as_mat())).sum()
}

/// Douglas-Rachford envelope at the fixed-point variables `s`:
/// `Σ_i f_i(x_i) + ⟨∇f_i(x_i), ȳ − x_i⟩ + ‖ȳ − x_i‖²/(2α)` with
/// `x_i = prox(s_i)` and `ȳ = P(mean(x_i − α∇f_i(x_i)))`.
pub fn dre_value<O: LocalObjective>(s: &[Mat], problem: &[O], alpha: f64) -> Result<f64> {
    if s.is_empty() || s.len() != problem.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} blocks", problem.len()),
            found: format!("{}", s.len()),
        });
    }
    let mut xs = Vec::with_capacity(s.len());
    let mut grads = Vec::with_capacity(s.len());
    for (si, f) in s.iter().zip(problem) {
        let x = f.prox(alpha, si)?;
        grads.push(f.egrad(&x)?);
        xs.push(x);
    }
    let y: Vec<Mat> = xs.iter().zip(&grads).map(|(x, g)| x - g * alpha).collect();
    let ybar = project_stiefel(&block_mean(&y))?;
    let mut phi = 0.0;
    for ((x, g), f) in xs.iter().zip(&grads).zip(problem) {
        let gap = ybar.as_mat() - x;
        phi += f.value(x)? + g.dot(&gap) + gap.norm_squared() / (2.0 * alpha);
    }
    if !phi.is_finite() {
        return Err(Error::NonFinite("envelope value"));
    }
    Ok(phi)
}

/// `‖mean(d) − (mean(x) − mean(s))‖`.
pub fn tracking_residual(stack: &AgentStack) -> f64 {
    (block_mean(&stack.d) - (block_mean(&stack.x) - block_mean(&stack.s))).norm()
}

/// Neighbourhood and boundedness diagnostics of one stack.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborhoodReport {
    pub k: usize,
    /// `‖x̂ − x̄‖`, bound `δ₁`.
    pub x_dev: f64,
    /// `‖ẑ − z̄‖`, bound `10δ₂`.
    pub z_dev: f64,
    /// `max_i dist(Σ_j (Wᵗ)_ij x_j + d_i, M)`, bound `γ`.
    pub tube_max: f64,
    /// `max_i ‖s_i‖`, bound `ζ + δ₂`.
    pub s_max: f64,
    /// `max_i ‖x_i − s_i‖`, bound `δ₂`.
    pub xs_max: f64,
    /// `max_i ‖d_i‖`, bound `4δ₂`.
    pub d_max: f64,
    pub violations: Vec<String>,
}

impl NeighborhoodReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn mean_deviation(blocks: &[Mat]) -> f64 {
    let mean = block_mean(blocks);
    match project_stiefel(&mean) {
        Ok(p) => (&mean - p.as_mat()).norm(),
        Err(_) => f64::INFINITY,
    }
}

fn max_norm(it: impl Iterator<Item = Mat>) -> f64 {
    it.map(|m| m.norm()).fold(0.0, f64::max)
}

pub fn neighborhood_report(
    stack: &AgentStack,
    w: &MixingMatrix,
    t: usize,
    constants: ManifoldConstants,
) -> Result<NeighborhoodReport> {
    let deltas = Deltas::new(constants);
    let mixed = mix(w, t, &stack.x)?;
    let tube_max = mixed
        .iter()
        .zip(&stack.d)
        .map(|(m, d)| {
            let v = m + d;
            match project_stiefel(&v) {
                Ok(p) => (&v - p.as_mat()).norm(),
                Err(_) => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max);
    let x_dev = mean_deviation(&stack.x);
    let z_dev = mean_deviation(&stack.z);
    let s_max = max_norm(stack.s.iter().cloned());
    let xs_max = max_norm(stack.x.iter().zip(&stack.s).map(|(x, s)| x - s));
    let d_max = max_norm(stack.d.iter().cloned());

    let checks = [
        ("x_dev", x_dev, deltas.delta1),
        ("z_dev", z_dev, 10.0 * deltas.delta2),
        ("tube_max", tube_max, deltas.gamma),
        ("s_max", s_max, constants.zeta + deltas.delta2),
        ("xs_max", xs_max, deltas.delta2),
        ("d_max", d_max, 4.0 * deltas.delta2),
    ];
    let violations = checks
        .iter()
        .filter(|(_, v, b)| !(v <= b))
        .map(|(name, v, b)| format!("k={}: {name} = {v:.3e} > {b:.3e}", stack.k))
        .collect();
    Ok(NeighborhoodReport {
        k: stack.k,
        x_dev,
        z_dev,
        tube_max,
        s_max,
        xs_max,
        d_max,
        violations,
    })
}

/// Record field usable in a rate fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordField {
    Consensus,
    Stationarity,
    Dre,
    SubspaceDistance,
}

impl RecordField {
    pub fn get(self, r: &IterationRecord) -> Option<f64> {
        match self {
            Self::Consensus => Some(r.consensus_sq),
            Self::Stationarity => Some(r.stationarity_sq),
            Self::Dre => Some(r.dre),
            Self::SubspaceDistance => r.ds,
        }
    }
}

/// Least-squares slope and intercept of `log(min_{ℓ≤k} field)` against
/// `log k` for `k` in `[k_lo, k_hi]`.
pub fn rate_fit(records: &[IterationRecord], field: RecordField, k_lo: usize, k_hi: usize) -> Result<(f64, f64)> {
    let mut running = f64::INFINITY;
    let mut pts = Vec::new();
    for r in records {
        if let Some(v) = field.get(r) {
            running = running.min(v);
        }
        if r.k >= k_lo.max(1) && r.k <= k_hi && running > 0.0 && running.is_finite() {
            pts.push(((r.k as f64).ln(), running.ln()));
        }
    }
    fit_line(&pts)
}

/// Ordinary least squares on `(x, y)` pairs.
pub fn fit_line(pts: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pts.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 5 points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "rate fit needs distinct iteration indices".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
