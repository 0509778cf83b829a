//! Stiefel manifold geometry.
//!
//! `St(d, r) = { X ∈ ℝ^{d×r} : XᵀX = I_r }`. Points are stored as plain
//! column-major `nalgebra` matrices wrapped in [`StiefelPoint`], which only
//! ever holds matrices whose columns are orthonormal to
//! [`ORTHONORMALITY_TOL`].
//!
//! - Projection: `P(M) = UVᵀ` from the thin SVD `M = UΣVᵀ` (polar factor).
//! - Tangent space: `T_X = { Z : XᵀZ + ZᵀX = 0 }`.
//! - Normal space: `N_X = { XS : S = Sᵀ }`.
//! - Tangent projection: `P_X(Z) = Z − X sym(XᵀZ)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dims, Error, Result};

pub type Mat = DMatrix<f64>;

/// Maximum `‖XᵀX − I‖_F` accepted for a point on the manifold.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Projection is refused when the smallest singular value is at or below this.
pub const RANK_TOL: f64 = 1e-12;

/// Tube radius: the Stiefel manifold is 1-proximally smooth, i.e. 2γ = 1.
pub const GAMMA: f64 = 0.5;

/// A `d×r` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelPoint(Mat);

impl StiefelPoint {
    /// Wraps `mat` after checking orthonormality.
    pub fn new(mat: Mat) -> Result<Self> {
        let (d, r) = mat.shape();
        if r == 0 || d < r {
            return Err(Error::InvalidArgument(format!(
                "Stiefel point needs d >= r >= 1, got {d}x{r}"
            )));
        }
        let err = orthonormality_error(&mat);
        if !(err <= ORTHONORMALITY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "columns are not orthonormal (‖XᵀX − I‖ = {err:e})"
            )));
        }
        Ok(Self(mat))
    }

    /// First `r` columns of the `d×d` identity.
    pub fn identity(d: usize, r: usize) -> Result<Self> {
        Self::new(Mat::identity(d, r))
    }

    /// Polar projection of a standard Gaussian matrix; its distribution is
    /// invariant under left orthogonal transforms.
    pub fn random<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> Self {
        loop {
            let g = Mat::from_fn(d, r, |_, _| rng.sample::<f64, _>(StandardNormal));
            if let Ok(p) = project_stiefel(&g) {
                return p;
            }
        }
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.shape()
    }

    /// Re-projects onto the manifold to scrub accumulated rounding drift.
    pub fn renormalize(&self) -> Self {
        project_stiefel(&self.0).unwrap_or_else(|_| self.clone())
    }
}

impl AsRef<Mat> for StiefelPoint {
    fn as_ref(&self) -> &Mat {
        &self.0
    }
}

/// A direction in the tangent space at `base`.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: StiefelPoint,
    pub dir: Mat,
}

impl TangentVector {
    /// `‖sym(baseᵀ dir)‖_F`; zero for an exact tangent vector.
    pub fn skew_defect(&self) -> f64 {
        let xtv = self.base.as_mat().transpose() * &self.dir;
        (&xtv + xtv.transpose()).norm()
    }

    pub fn norm(&self) -> f64 {
        self.dir.norm()
    }
}

/// Proximal-smoothness radius and diameter of `St(d, r)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ManifoldConstants {
    pub gamma: f64,
    pub zeta: f64,
    pub d: usize,
    pub r: usize,
}

/// `‖MᵀM − I‖_F`.
pub fn orthonormality_error(m: &Mat) -> f64 {
    let r = m.ncols();
    (m.transpose() * m - Mat::identity(r, r)).norm()
}

/// `sym(A) = (A + Aᵀ)/2`.
pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Nearest point on the manifold, `UVᵀ` from the thin SVD of `m`.
pub fn project_stiefel(m: &Mat) -> Result<StiefelPoint> {
    let (d, r) = m.shape();
    if r == 0 || d < r {
        return Err(Error::InvalidArgument(format!(
            "cannot project a {d}x{r} matrix onto St(d, r)"
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("project_stiefel"));
    }
    let svd = m.clone().svd(true, true);
    let sigma_min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(sigma_min > RANK_TOL) {
        return Err(Error::RankDeficient { sigma_min });
    }
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        unreachable!("svd computed with both factors")
    };
    Ok(StiefelPoint(u * v_t))
}

/// `v − x sym(xᵀv)` on raw matrices.
pub(crate) fn tangent_project_raw(x: &Mat, v: &Mat) -> Mat {
    v - x * sym(&(x.transpose() * v))
}

/// Orthogonal projection of `v` onto `T_x`.
pub fn tangent_project(x: &StiefelPoint, v: &Mat) -> Result<TangentVector> {
    check_dims("tangent direction", x.dims(), v.shape())?;
    let dir = tangent_project_raw(x.as_mat(), v);
    Ok(TangentVector { base: x.clone(), dir })
}

/// Riemannian gradient for the embedded metric: the tangent projection of
/// the Euclidean gradient.
pub fn riemannian_grad(x: &StiefelPoint, egrad: &Mat) -> Result<TangentVector> {
    tangent_project(x, egrad)
}

/// `min_Q ‖xQ − x*‖` over orthogonal `Q`, via the singular values of `xᵀx*`.
pub fn subspace_distance(x: &StiefelPoint, xstar: &StiefelPoint) -> Result<f64> {
    check_dims("subspace distance", x.dims(), xstar.dims())?;
    let r = x.dims().1 as f64;
    let cross = x.as_mat().transpose() * xstar.as_mat();
    let nuclear: f64 = cross.singular_values().iter().sum();
    Ok((2.0 * r - 2.0 * nuclear).max(0.0).sqrt())
}

/// Distance from `m` to the manifold.
pub fn tube_distance(m: &Mat) -> Result<f64> {
    let p = project_stiefel(m)?;
    Ok((m - p.as_mat()).norm())
}

pub fn manifold_constants(d: usize, r: usize) -> ManifoldConstants {
    ManifoldConstants {
        gamma: GAMMA,
        // antipodal points x, −x realise the diameter
        zeta: 2.0 * (r as f64).sqrt(),
        d,
        r,
    }
}
