//! Agent objectives and the data they are built from.

mod dpca;
mod idx;
mod matrix_io;
mod synthetic;

pub use dpca::{dpca_optimal_value, principal_subspace, DpcaInstance};
pub use idx::{load_idx, normalize_and_split, parse_idx, IdxMatrix, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use matrix_io::{format_matrix, parse_matrix, read_matrix, write_matrix};
pub use synthetic::gen_synthetic;

use std::path::Path;

use crate::error::{Error, Result};
use crate::manifold::{Mat, StiefelPoint};

/// Outcome of an approximate proximal step: `x − s + α∇f(x) = residual`.
#[derive(Clone, Debug)]
pub struct InexactProx {
    pub x: Mat,
    pub residual: Mat,
    pub iterations: usize,
}

impl InexactProx {
    pub fn residual_sq(&self) -> f64 {
        self.residual.norm_squared()
    }
}

/// The local function `f_i` held by one agent.
pub trait LocalObjective {
    /// Ambient row dimension `d` of the arguments.
    fn dim(&self) -> usize;

    fn value(&self, x: &Mat) -> Result<f64>;

    fn egrad(&self, x: &Mat) -> Result<Mat>;

    /// `argmin_y f(y) + ‖y − s‖²/(2α)`.
    fn prox(&self, alpha: f64, s: &Mat) -> Result<Mat>;

    /// A point whose prox-optimality residual has squared norm at most `eps`.
    fn prox_inexact(&self, alpha: f64, s: &Mat, eps: f64) -> Result<InexactProx>;

    /// Lipschitz constant of the Euclidean gradient.
    fn smoothness(&self) -> f64;

    /// `x − s + α∇f(x)`.
    fn prox_residual(&self, alpha: f64, s: &Mat, x: &Mat) -> Result<Mat> {
        Ok(x - s + self.egrad(x)? * alpha)
    }

    /// `prox(s + μ)`, which satisfies the residual equation with exactly `μ`.
    /// Used to inject a prescribed inexactness.
    fn prox_perturbed(&self, alpha: f64, s: &Mat, mu: &Mat) -> Result<Mat> {
        self.prox(alpha, &(s + mu))
    }
}

/// Where a dataset came from.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub rows_per_agent: Vec<usize>,
    pub d: usize,
    pub r: usize,
    pub source: String,
}

/// Per-agent data blocks, plus the analytic solution when known.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub blocks: Vec<Mat>,
    pub ground_truth: Option<StiefelPoint>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn total_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    pub fn instances(&self) -> Result<Vec<DpcaInstance>> {
        self.blocks.iter().map(DpcaInstance::new).collect()
    }

    /// Writes `block_<i>.txt` (and `ground_truth.txt` when present) to `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (i, b) in self.blocks.iter().enumerate() {
            write_matrix(dir.join(format!("block_{i}.txt")), b)?;
        }
        if let Some(gt) = &self.ground_truth {
            write_matrix(dir.join("ground_truth.txt"), gt.as_mat())?;
        }
        Ok(())
    }

    /// Reads blocks written by [`Dataset::save`]; `r` comes from the ground
    /// truth when present, else from the argument.
    pub fn load(dir: impl AsRef<Path>, r: usize) -> Result<Self> {
        let dir = dir.as_ref();
        let mut blocks = Vec::new();
        while let Ok(text) = std::fs::read_to_string(dir.join(format!("block_{}.txt", blocks.len()))) {
            blocks.push(parse_matrix(&text)?);
        }
        if blocks.is_empty() {
            return Err(Error::InvalidArgument(format!("no blocks in {}", dir.display())));
        }
        let d = blocks[0].ncols();
        if blocks.iter().any(|b| b.ncols() != d) {
            return Err(Error::InvalidArgument("blocks disagree on column count".into()));
        }
        let gt_path = dir.join("ground_truth.txt");
        let ground_truth = if gt_path.exists() {
            Some(StiefelPoint::new(read_matrix(gt_path)?)?)
        } else {
            None
        };
        let r = ground_truth.as_ref().map_or(r, |g| g.dims().1);
        Ok(Self {
            meta: DatasetMeta {
                n: blocks.len(),
                rows_per_agent: blocks.iter().map(|b| b.nrows()).collect(),
                d,
                r,
                source: format!("file:{}", dir.display()),
            },
            blocks,
            ground_truth,
        })
    }
}
