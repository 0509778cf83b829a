use crate::error::{Error, Result};
use crate::manifold::{project_stiefel, tangent_project_raw, Mat, StiefelPoint};
use crate::network::{mix, MixingMatrix};
use crate::problems::LocalObjective;

use super::SolverParams;

/// State of the decentralized Riemannian gradient-tracking baseline.
///
/// A deliberately simple comparison method: one gradient tracker and a
/// polar retraction. Not a reimplementation of DRGTA or DPRGT.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineStack {
    pub x: Vec<Mat>,
    /// Gradient tracker.
    pub v: Vec<Mat>,
    /// `∇f_i(x_i)` at the current iterate.
    pub grad: Vec<Mat>,
    pub k: usize,
}

pub fn baseline_gt_init<O: LocalObjective>(problem: &[O], x0: &[StiefelPoint]) -> Result<BaselineStack> {
    if problem.len() != x0.len() || x0.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} agents", problem.len()),
            found: format!("{} initial points", x0.len()),
        });
    }
    let x: Vec<Mat> = x0.iter().map(|p| p.as_mat().clone()).collect();
    let grad = x
        .iter()
        .zip(problem)
        .map(|(x, f)| f.egrad(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(BaselineStack {
        v: grad.clone(),
        grad,
        x,
        k: 0,
    })
}

/// `x_i ← P(Σ_j (Wᵗ)_ij x_j − α P_T(v_i))`, then
/// `v_i ← Σ_j (Wᵗ)_ij v_j + ∇f_i(x_i) − ∇f_i(x_i^old)`.
pub fn baseline_gt_step<O: LocalObjective>(
    stack: &mut BaselineStack,
    problem: &[O],
    w: &MixingMatrix,
    params: &SolverParams,
) -> Result<()> {
    let n = stack.x.len();
    let mixed_x = mix(w, params.t, &stack.x)?;
    let x_new = (0..n)
        .map(|i| {
            let dir = tangent_project_raw(&stack.x[i], &stack.v[i]);
            project_stiefel(&(&mixed_x[i] - dir * params.alpha)).map(StiefelPoint::into_mat)
        })
        .collect::<Result<Vec<_>>>()?;
    let grad_new = x_new
        .iter()
        .zip(problem)
        .map(|(x, f)| f.egrad(x))
        .collect::<Result<Vec<_>>>()?;
    let mixed_v = mix(w, params.t, &stack.v)?;
    let v_new = (0..n).map(|i| &mixed_v[i] + &grad_new[i] - &stack.grad[i]).collect();
    stack.x = x_new;
    stack.v = v_new;
    stack.grad = grad_new;
    stack.k += 1;
    Ok(())
}
