use super::pca::top_right_singular;
use super::{DenseMatrix, TopicError, TopicModel};

/// Projects the centroids onto their two leading principal axes. Output is
/// `k x 2` and centred at the origin; with fewer than two input dimensions
/// the second coordinate is zero.
pub fn intertopic_map(model: &TopicModel) -> Result<DenseMatrix, TopicError> {
    let k = model.k;
    if k < 3 {
        return Err(TopicError::MapError(k));
    }
    let c = &model.centroids;
    let mut mean = vec![0.0; c.cols];
    for row in c.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= k as f64);
    let mut centred = c.clone();
    for r in 0..k {
        for (v, m) in centred.row_mut(r).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let n_axes = c.cols.min(2);
    let (axes, _) = top_right_singular(centred.to_nalgebra(), n_axes)?;
    let mut out = DenseMatrix::zeros(k, 2);
    for r in 0..k {
        for a in 0..n_axes {
            out.row_mut(r)[a] = axes.row(a).iter().zip(centred.row(r)).map(|(x, y)| x * y).sum();
        }
    }
    // Remove residual rounding drift from the centring.
    for a in 0..2 {
        let drift = (0..k).map(|r| out.row(r)[a]).sum::<f64>() / k as f64;
        for r in 0..k {
            out.row_mut(r)[a] -= drift;
        }
    }
    Ok(out)
}
