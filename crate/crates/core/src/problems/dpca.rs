use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Cholesky, Dyn};

use super::{InexactProx, LocalObjective};
use crate::error::{check_dims, Error, Result};
use crate::manifold::{Mat, StiefelPoint};

type Factor = Arc<Cholesky<f64, Dyn>>;

/// Shifted local PCA objective `f(x) = −½ tr(xᵀ(AᵀA − ‖A‖₂² I)x)`.
///
/// With `H = ‖A‖₂² I − AᵀA ⪰ 0` this is the convex quadratic `½⟨x, Hx⟩`,
/// whose prox is the SPD solve `(I + αH) x = s`.
#[derive(Debug)]
pub struct DpcaInstance {
    gram: Mat,
    hess: Mat,
    shift: f64,
    lipschitz: f64,
    rows: usize,
    factors: Mutex<HashMap<u64, Factor>>,
}

impl Clone for DpcaInstance {
    fn clone(&self) -> Self {
        Self {
            gram: self.gram.clone(),
            hess: self.hess.clone(),
            shift: self.shift,
            lipschitz: self.lipschitz,
            rows: self.rows,
            factors: Mutex::new(self.lock().clone()),
        }
    }
}

impl DpcaInstance {
    /// Builds the instance from an `m×d` data block.
    pub fn new(a: &Mat) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("DPCA data block"));
        }
        Self::from_gram(a.transpose() * a, a.nrows())
    }

    /// Builds the instance from `AᵀA` directly.
    pub fn from_gram(gram: Mat, rows: usize) -> Result<Self> {
        if !gram.is_square() || gram.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "Gram matrix must be square and non-empty".into(),
            ));
        }
        let eig = gram.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.max().max(0.0);
        let lmin = eig.eigenvalues.min().max(0.0);
        let d = gram.nrows();
        let hess = Mat::identity(d, d) * lmax - &gram;
        Ok(Self {
            gram,
            hess,
            shift: lmax,
            lipschitz: lmax - lmin,
            rows,
            factors: Mutex::new(HashMap::new()),
        })
    }

    /// `‖A‖₂²`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    /// `‖A‖₂² I − AᵀA`.
    pub fn hessian(&self) -> &Mat {
        &self.hess
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `I + αH`.
    pub fn system_matrix(&self, alpha: f64) -> Mat {
        let d = self.hess.nrows();
        Mat::identity(d, d) + &self.hess * alpha
    }

    /// Number of distinct step sizes with a cached factorization.
    pub fn cached_factors(&self) -> usize {
        self.lock().len()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<u64, Factor>> {
        self.factors.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn factor(&self, alpha: f64) -> Result<Factor> {
        let key = alpha.to_bits();
        if let Some(f) = self.lock().get(&key) {
            return Ok(f.clone());
        }
        let chol = Cholesky::new(self.system_matrix(alpha))
            .ok_or_else(|| Error::InvalidArgument(format!("I + αH not positive definite for α = {alpha}")))?;
        let f = Arc::new(chol);
        self.lock().entry(key).or_insert_with(|| f.clone());
        Ok(f)
    }

    fn check_prox_args(&self, alpha: f64, s: &Mat) -> Result<()> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "prox step must be positive, got {alpha}"
            )));
        }
        if s.nrows() != self.dim() {
            check_dims("prox argument", (self.dim(), s.ncols()), s.shape())?;
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prox argument"));
        }
        Ok(())
    }

    fn apply_system(&self, alpha: f64, x: &Mat) -> Mat {
        x + (&self.hess * x) * alpha
    }

    /// Conjugate gradients on `(I + αH) x = s` in the Frobenius inner
    /// product, warm-started from `s`.
    fn conjugate_gradient(&self, alpha: f64, s: &Mat, eps: f64) -> Result<InexactProx> {
        let d = self.dim();
        let budget = 20 * d + 100;
        let mut x = s.clone();
        let mut r = s - self.apply_system(alpha, &x);
        let mut p = r.clone();
        let mut rr = r.norm_squared();
        let mut iterations = 0;
        loop {
            if rr <= eps {
                let residual = self.prox_residual(alpha, s, &x)?;
                if residual.norm_squared() <= eps {
                    return Ok(InexactProx {
                        x,
                        residual,
                        iterations,
                    });
                }
                // recurrence drifted from the true residual; restart from it
                r = -residual;
                p = r.clone();
                rr = r.norm_squared();
            }
            if iterations >= budget || rr == 0.0 {
                let achieved = self.prox_residual(alpha, s, &x)?.norm_squared();
                return Err(Error::SolverStall {
                    achieved,
                    target: eps,
                    iterations,
                });
            }
            let ap = self.apply_system(alpha, &p);
            let step = rr / p.dot(&ap);
            x += &p * step;
            r -= &ap * step;
            let rr_next = r.norm_squared();
            p = &r + &p * (rr_next / rr);
            rr = rr_next;
            iterations += 1;
        }
    }
}

impl LocalObjective for DpcaInstance {
    fn dim(&self) -> usize {
        self.hess.nrows()
    }

    fn value(&self, x: &Mat) -> Result<f64> {
        check_dims("DPCA argument", (self.dim(), x.ncols()), x.shape())?;
        Ok(0.5 * x.dot(&(&self.hess * x)))
    }

    fn egrad(&self, x: &Mat) -> Result<Mat> {
        check_dims("DPCA argument", (self.dim(), x.ncols()), x.shape())?;
        Ok(&self.hess * x)
    }

    fn prox(&self, alpha: f64, s: &Mat) -> Result<Mat> {
        self.check_prox_args(alpha, s)?;
        Ok(self.factor(alpha)?.solve(s))
    }

    fn prox_inexact(&self, alpha: f64, s: &Mat, eps: f64) -> Result<InexactProx> {
        self.check_prox_args(alpha, s)?;
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {eps}")));
        }
        if eps == 0.0 {
            let x = self.prox(alpha, s)?;
            let residual = self.prox_residual(alpha, s, &x)?;
            return Ok(InexactProx {
                x,
                residual,
                iterations: 0,
            });
        }
        self.conjugate_gradient(alpha, s, eps)
    }

    fn smoothness(&self) -> f64 {
        self.lipschitz
    }
}

/// Top-`r` eigenvectors of `Σ_i A_iᵀA_i`: the global DPCA minimiser.
pub fn principal_subspace(instances: &[DpcaInstance], r: usize) -> Result<StiefelPoint> {
    let d = instances
        .first()
        .ok_or_else(|| Error::InvalidArgument("no instances".into()))?
        .dim();
    if r == 0 || r > d {
        return Err(Error::InvalidArgument(format!("need 1 <= r <= {d}, got {r}")));
    }
    let mut total = Mat::zeros(d, d);
    for inst in instances {
        total += inst.gram();
    }
    let eig = total.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<_> = order[..r]
        .iter()
        .map(|&j| eig.eigenvectors.column(j).into_owned())
        .collect();
    StiefelPoint::new(Mat::from_columns(&cols)).map(|p| p.renormalize())
}

/// `Σ_i f_i(x*)`.
pub fn dpca_optimal_value(instances: &[DpcaInstance], xstar: &StiefelPoint) -> Result<f64> {
    instances.iter().map(|inst| inst.value(xstar.as_mat())).sum()
}
