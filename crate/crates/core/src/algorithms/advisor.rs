//! Step-size and communication-round bounds under which the convergence
//! theory applies, with the constants appearing in the rate bounds.
//!
//! These are certified-regime values; they are much more conservative than
//! the tuned steps used in practice.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::ManifoldConstants;

use super::EpsSchedule;

/// Neighbourhood radii `δ₁ = γ/4`, `δ₂ = δ₁/12`, `δ₃ = 2δ₂ + ζ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Deltas {
    pub gamma: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

impl Deltas {
    pub fn new(c: ManifoldConstants) -> Self {
        Self::from_gamma_zeta(c.gamma, c.zeta)
    }

    pub fn from_gamma_zeta(gamma: f64, zeta: f64) -> Self {
        let delta1 = gamma / 4.0;
        let delta2 = delta1 / 12.0;
        Self {
            gamma,
            delta1,
            delta2,
            delta3: 2.0 * delta2 + zeta,
        }
    }
}

/// What the advisor needs to know about the problem and network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdvisorInputs {
    /// Lipschitz constant `L` of the Riemannian gradients.
    pub lipschitz: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub sigma2: f64,
    pub n: usize,
    /// `‖∇f(0)‖` of the stacked objective.
    pub grad0_norm: f64,
    /// Tolerance schedule, for the inexact-variant bounds.
    pub schedule: Option<EpsSchedule>,
}

/// Squared initial gaps entering `C₂` and `C₄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InitialGaps {
    /// `‖z₀ − ȳ₀‖²`.
    pub z_minus_ybar_sq: f64,
    /// `‖d₀ − (x̂₀ − ŝ₀)‖²`.
    pub tracking_sq: f64,
}

/// Minimal rounds per clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TClauses {
    /// `σ₂ᵗ ≤ 1/(4√n)`.
    pub consensus: usize,
    /// `σ₂ᵗ ≤ δ₂/(√n δ₃)`.
    pub tube: usize,
    /// `σ₂ᵗ ≤ 1/(12√n)`.
    pub descent: usize,
    /// `σ₂ᵗ ≤ 1/n²`.
    pub inexact: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterAdvice {
    pub deltas: Deltas,
    pub clauses: TClauses,
    /// Rounds keeping the iterates in the neighbourhood (consensus and tube clauses).
    pub t_min_neighbourhood: usize,
    /// Rounds for the exact-variant rate bound.
    pub t_min: usize,
    /// Rounds for the inexact-variant rate bound.
    pub t_min_inexact: usize,
    /// `min{1/(2L), δ₂/(3‖∇f(0)‖ + 2L(ζ + δ₂))}`.
    pub alpha_max_neighbourhood: f64,
    /// Exact-variant step bound, evaluated at `t_min`.
    pub alpha_max: f64,
    pub c1: f64,
    pub c2: Option<f64>,
    /// Inexact-variant step bound, evaluated at `t_min_inexact`.
    pub alpha_max_inexact: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
    /// `𝒟 = Σ ε_k`.
    pub eps_total: Option<f64>,
    pub notes: Vec<String>,
}

/// Smallest `t ≥ 1` with `σᵗ ≤ bound`.
fn min_rounds(sigma: f64, bound: f64) -> usize {
    if sigma == 0.0 || bound >= 1.0 {
        return 1;
    }
    let t = (bound.ln() / sigma.ln() - 1e-9).ceil();
    (t.max(1.0)) as usize
}

fn c1(q: f64) -> f64 {
    32.0 / (1.0 - 4.0 * q).powi(2) * (4.0 * q + 4.0 / (1.0 - q).powi(2))
}

fn tracking_weight(q: f64) -> f64 {
    128.0 / ((1.0 - 4.0 * q).powi(2) * (1.0 - q * q))
}

fn z_weight(q: f64) -> f64 {
    4.0 / (1.0 - 16.0 * q * q)
}

pub fn advise_parameters(inputs: &AdvisorInputs, initial: Option<&InitialGaps>) -> Result<ParameterAdvice> {
    let AdvisorInputs {
        lipschitz: l,
        gamma,
        zeta,
        sigma2,
        n,
        grad0_norm,
        schedule,
    } = *inputs;
    if !(0.0..1.0).contains(&sigma2) {
        return Err(Error::SpectralGapViolation { sigma2 });
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constant must be positive, got {l}"
        )));
    }
    if n == 0 || !(gamma > 0.0) || !(zeta > 0.0) || !(grad0_norm >= 0.0) {
        return Err(Error::InvalidArgument("advisor inputs out of range".into()));
    }
    let deltas = Deltas::from_gamma_zeta(gamma, zeta);
    let Deltas { delta2, delta3, .. } = deltas;
    let rn = (n as f64).sqrt();

    let clauses = TClauses {
        consensus: min_rounds(sigma2, 1.0 / (4.0 * rn)),
        tube: min_rounds(sigma2, delta2 / (rn * delta3)),
        descent: min_rounds(sigma2, 1.0 / (12.0 * rn)),
        inexact: min_rounds(sigma2, 1.0 / (n as f64).powi(2)),
    };
    let t_min_neighbourhood = clauses.consensus.max(clauses.tube);
    let t_min = t_min_neighbourhood.max(clauses.descent);
    let t_min_inexact = clauses.inexact.max(clauses.tube).max(clauses.descent);

    let radius_step = delta2 / (3.0 * grad0_norm + 2.0 * l * (zeta + delta2));
    let alpha_max_neighbourhood = (1.0 / (2.0 * l)).min(radius_step);

    let q = sigma2.powi(t_min as i32);
    let c1 = c1(q);
    let alpha_max = (1.0 / (2.0 * (1.0 + 2.0 * l + c1 * l * l))).min(radius_step);
    let c2 = initial.map(|g| z_weight(q) * g.z_minus_ybar_sq + tracking_weight(q) * g.tracking_sq);

    let mut notes = vec![format!(
        "tube clause uses log_sigma2(delta2/(sqrt(n)*delta3)) = {}; the literal argument delta3/(delta2*sqrt(n)) > 1 gives a negative bound",
        clauses.tube
    )];

    let (mut alpha_max_inexact, mut c3, mut c4, mut c5, mut eps_total) = (None, None, None, None, None);
    if let Some(sched) = schedule {
        let total = sched.total();
        eps_total = Some(total);
        let qi = sigma2.powi(t_min_inexact as i32);
        let eps0 = sched.eps0;
        if eps0 >= delta2 {
            notes.push(format!("eps0 = {eps0:e} >= delta2 = {delta2:e}: inexact bounds void"));
        } else {
            let radius_inexact = (delta2 - eps0) / (3.0 * grad0_norm + 2.0 * l * (zeta + delta2) + 2.0 * eps0);
            let c3_at = |alpha: f64| {
                let a2l2 = alpha * alpha * l * l;
                128.0 / (1.0 - 4.0 * qi).powi(2) * (qi * qi * a2l2 + a2l2 / (1.0 - qi).powi(2)) * total
            };
            // C₃ grows with α²: evaluate at the bound without the C₃ clause,
            // the resulting α is smaller so the constant stays valid.
            let candidate = radius_inexact.min(1.0 / (2.0 * (1.0 + 2.0 * l)));
            let c3v = c3_at(candidate);
            alpha_max_inexact = Some(radius_inexact.min(1.0 / (2.0 * (1.0 + 2.0 * l + 2.0 * c3v * l * l))));
            c3 = Some(c3v);
        }
        let nf = n as f64;
        let schedule_part =
            (512.0 * nf + 128.0 * nf * (1.0 - qi).powi(2)) / ((1.0 - 4.0 * qi).powi(2) * (1.0 - qi).powi(2)) * total;
        if let Some(g) = initial {
            let c4v = schedule_part + tracking_weight(qi) * g.tracking_sq + z_weight(qi) * g.z_minus_ybar_sq;
            c4 = Some(c4v);
            c5 = Some(c4v + 2.0 * rn * total);
        }
        notes.push("C4 uses the full schedule sum D in place of the partial sum to k".into());
    }

    Ok(ParameterAdvice {
        deltas,
        clauses,
        t_min_neighbourhood,
        t_min,
        t_min_inexact,
        alpha_max_neighbourhood,
        alpha_max,
        c1,
        c2,
        alpha_max_inexact,
        c3,
        c4,
        c5,
        eps_total,
        notes,
    })
}
