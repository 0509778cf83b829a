use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Dataset, DatasetMeta};
use crate::error::{Error, Result};
use crate::manifold::{Mat, StiefelPoint};

fn orthonormal_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    let g = Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// `A = U diag(ξ¹, …, ξᵈ) Vᵀ` with seeded orthonormal `U` (`n·m_per × d`) and
/// orthogonal `V`, rows shuffled and dealt into `n` equal blocks. The ground
/// truth is the first `r` columns of `V`.
pub fn gen_synthetic<R: Rng + ?Sized>(
    n: usize,
    m_per: usize,
    d: usize,
    r: usize,
    xi: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "spectrum decay xi = {xi} not in (0, 1)"
        )));
    }
    if n == 0 || m_per == 0 || r == 0 || r > d || n * m_per < d {
        return Err(Error::InvalidArgument(format!(
            "infeasible synthetic dimensions n={n} m_per={m_per} d={d} r={r}"
        )));
    }
    let total = n * m_per;
    let u = orthonormal_columns(total, d, rng);
    let v = orthonormal_columns(d, d, rng);
    let spectrum = DVector::from_iterator(d, (1..=d).map(|j| xi.powi(j as i32)));
    let a = u * Mat::from_diagonal(&spectrum) * v.transpose();

    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);
    let blocks = order.chunks(m_per).map(|rows| a.select_rows(rows.iter())).collect();

    let ground_truth = StiefelPoint::new(v.columns(0, r).into_owned())?;
    Ok(Dataset {
        blocks,
        ground_truth: Some(ground_truth),
        meta: DatasetMeta {
            n,
            rows_per_agent: vec![m_per; n],
            d,
            r,
            source: format!("synthetic(xi={xi})"),
        },
    })
}
