//! Decentralized Douglas-Rachford splitting and a gradient-tracking baseline.
//!
//! One DDRS iteration, for every agent `i` in lockstep:
//!
//! ```text
//! s_i ← s_i + z_i − x_i
//! x_i ← prox_{αf_i}(s_i)
//! y_i ← 2x_i − s_i
//! d_i ← Σ_j (Wᵗ)_ij d_j + (x_i − s_i) − (x_i − s_i)_old
//! z_i ← P_M(Σ_j (Wᵗ)_ij x_j + d_i)
//! ```
//!
//! The inexact variant replaces the prox with a solve whose residual
//! satisfies `‖μ_i‖² ≤ ε_k`.

mod advisor;
mod baseline;
mod schedule;

pub use advisor::{advise_parameters, AdvisorInputs, Deltas, InitialGaps, ParameterAdvice, TClauses};
pub use baseline::{baseline_gt_init, baseline_gt_step, BaselineStack};
pub use schedule::{epsilon_schedule, EpsSchedule};

use crate::error::{Error, Result};
use crate::manifold::{manifold_constants, project_stiefel, Mat, StiefelPoint};
use crate::network::{block_mean, mix, MixingMatrix};
use crate::problems::LocalObjective;

/// Full per-agent DRS state.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentStack {
    pub s: Vec<Mat>,
    pub x: Vec<Mat>,
    pub y: Vec<Mat>,
    pub z: Vec<Mat>,
    pub d: Vec<Mat>,
    pub k: usize,
}

impl AgentStack {
    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Step size, gossip rounds, iteration budget and the inexactness schedule.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SolverParams {
    pub alpha: f64,
    pub t: usize,
    pub max_iters: usize,
    pub eps: EpsSchedule,
}

impl SolverParams {
    pub fn new(alpha: f64, t: usize, max_iters: usize) -> Self {
        Self {
            alpha,
            t,
            max_iters,
            eps: EpsSchedule::default(),
        }
    }

    pub fn with_eps(mut self, eps: EpsSchedule) -> Self {
        self.eps = eps;
        self
    }

    /// Checks hard constraints; returns warnings for soft ones.
    pub fn validate(&self, delta2: f64) -> Result<Vec<String>> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {}",
                self.alpha
            )));
        }
        if self.t == 0 {
            return Err(Error::InvalidArgument("need at least one communication round".into()));
        }
        self.eps.validate()?;
        let mut warnings = Vec::new();
        if self.eps.eps0 >= delta2 {
            warnings.push(format!(
                "eps0 = {:e} violates eps0 < delta2 = {delta2:e}; the inexact analysis does not apply",
                self.eps.eps0
            ));
        }
        Ok(warnings)
    }
}

fn check_problem<O: LocalObjective>(problem: &[O], w: &MixingMatrix, n: usize) -> Result<()> {
    if problem.len() != n || w.n() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n} agents"),
            found: format!("{} objectives, {}x{} mixing matrix", problem.len(), w.n(), w.n()),
        });
    }
    Ok(())
}

/// `s₀ = x₀`, `d₀ = 0`, `y₀ = z₀ = x₀`.
///
/// Returns warnings when the start violates the consensus neighbourhood
/// `‖x̂₀ − x̄₀‖ ≤ δ₁`; the run may proceed regardless.
pub fn ddrs_init<O: LocalObjective>(
    problem: &[O],
    w: &MixingMatrix,
    params: &SolverParams,
    x0: &[StiefelPoint],
) -> Result<(AgentStack, Vec<String>)> {
    check_problem(problem, w, x0.len())?;
    if x0.is_empty() {
        return Err(Error::InvalidArgument("no agents".into()));
    }
    let (d, r) = x0[0].dims();
    for (i, (p, f)) in x0.iter().zip(problem).enumerate() {
        if p.dims() != (d, r) || f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: format!("{d}x{r} at agent {i}"),
                found: format!("{:?} (objective dim {})", p.dims(), f.dim()),
            });
        }
    }
    let deltas = Deltas::new(manifold_constants(d, r));
    let mut warnings = params.validate(deltas.delta2)?;

    let x: Vec<Mat> = x0.iter().map(|p| p.as_mat().clone()).collect();
    let mean = block_mean(&x);
    let dev = match project_stiefel(&mean) {
        Ok(bar) => (&mean - bar.as_mat()).norm(),
        Err(_) => f64::INFINITY,
    };
    if dev > deltas.delta1 {
        warnings.push(format!(
            "initial point outside the consensus neighbourhood: ‖x̂ − x̄‖ = {dev:.3e} > delta1 = {:.3e}",
            deltas.delta1
        ));
    }
    let zeros = vec![Mat::zeros(d, r); x.len()];
    Ok((
        AgentStack {
            s: x.clone(),
            y: x.clone(),
            z: x.clone(),
            d: zeros,
            x,
            k: 0,
        },
        warnings,
    ))
}

/// One synchronous iteration with a caller-supplied x-update
/// `(agent, s_i) -> x_i`. The stack is left untouched on error.
pub fn ddrs_step_with<F>(stack: &mut AgentStack, w: &MixingMatrix, t: usize, mut x_update: F) -> Result<()>
where
    F: FnMut(usize, &Mat) -> Result<Mat>,
{
    let n = stack.n();
    let s_new: Vec<Mat> = (0..n).map(|i| &stack.s[i] + &stack.z[i] - &stack.x[i]).collect();
    let x_new = s_new
        .iter()
        .enumerate()
        .map(|(i, s)| x_update(i, s))
        .collect::<Result<Vec<_>>>()?;
    let y_new: Vec<Mat> = x_new.iter().zip(&s_new).map(|(x, s)| x * 2.0 - s).collect();

    let mixed_d = mix(w, t, &stack.d)?;
    let d_new: Vec<Mat> = (0..n)
        .map(|i| &mixed_d[i] + (&x_new[i] - &s_new[i]) - (&stack.x[i] - &stack.s[i]))
        .collect();

    let mixed_x = mix(w, t, &x_new)?;
    let z_new = (0..n)
        .map(|i| project_stiefel(&(&mixed_x[i] + &d_new[i])).map(StiefelPoint::into_mat))
        .collect::<Result<Vec<_>>>()?;

    stack.s = s_new;
    stack.x = x_new;
    stack.y = y_new;
    stack.d = d_new;
    stack.z = z_new;
    stack.k += 1;
    Ok(())
}

/// Exact DDRS iteration.
pub fn ddrs_step<O: LocalObjective>(
    stack: &mut AgentStack,
    problem: &[O],
    w: &MixingMatrix,
    params: &SolverParams,
) -> Result<()> {
    check_problem(problem, w, stack.n())?;
    ddrs_step_with(stack, w, params.t, |i, s| problem[i].prox(params.alpha, s))
}

/// Inexact DDRS iteration with tolerance `ε_k`; returns the realised
/// `‖μ_i‖²` per agent.
pub fn iddrs_step<O: LocalObjective>(
    stack: &mut AgentStack,
    problem: &[O],
    w: &MixingMatrix,
    params: &SolverParams,
    k: usize,
) -> Result<Vec<f64>> {
    check_problem(problem, w, stack.n())?;
    let eps = params.eps.at(k);
    let mut mu_sq = vec![0.0; stack.n()];
    ddrs_step_with(stack, w, params.t, |i, s| {
        let out = problem[i].prox_inexact(params.alpha, s, eps)?;
        mu_sq[i] = out.residual_sq();
        Ok(out.x)
    })?;
    Ok(mu_sq)
}
