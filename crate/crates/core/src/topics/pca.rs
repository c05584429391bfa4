use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DenseMatrix, TopicError};

/// Streaming principal component model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `out_dim x d`, orthonormal rows.
    pub components: DenseMatrix,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub n_seen: usize,
}

impl PcaModel {
    pub fn out_dim(&self) -> usize {
        self.components.rows
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// Folds one batch into the model.
    ///
    /// The new basis comes from the SVD of the previous components scaled by
    /// their singular values, stacked on the centred batch and one
    /// mean-shift correction row.
    pub fn partial_fit(&mut self, batch: &DenseMatrix) -> Result<(), TopicError> {
        let out_dim = self.out_dim();
        check_batch(batch, self.input_dim(), out_dim)?;
        let d = self.input_dim();
        let n_new = batch.rows;
        let n_total = self.n_seen + n_new;
        let batch_mean = column_mean(batch);

        let stacked_rows = out_dim + n_new + 1;
        let mut stacked = DMatrix::<f64>::zeros(stacked_rows, d);
        for i in 0..out_dim {
            let s = self.singular_values[i];
            for (j, c) in self.components.row(i).iter().enumerate() {
                stacked[(i, j)] = s * c;
            }
        }
        for r in 0..n_new {
            for (j, v) in batch.row(r).iter().enumerate() {
                stacked[(out_dim + r, j)] = v - batch_mean[j];
            }
        }
        let scale = ((self.n_seen as f64 / n_total as f64) * n_new as f64).sqrt();
        for j in 0..d {
            stacked[(stacked_rows - 1, j)] = scale * (self.mean[j] - batch_mean[j]);
        }

        let (components, singular_values) = top_right_singular(stacked, out_dim)?;
        for (m, b) in self.mean.iter_mut().zip(&batch_mean) {
            *m = (*m * self.n_seen as f64 + b * n_new as f64) / n_total as f64;
        }
        self.components = components;
        self.singular_values = singular_values;
        self.n_seen = n_total;
        Ok(())
    }

    /// `(x - mean) . components^T` for every row.
    pub fn project(&self, vectors: &DenseMatrix) -> Result<DenseMatrix, TopicError> {
        if vectors.cols != self.input_dim() {
            return Err(TopicError::DimError(format!(
                "vectors have dimension {}, model expects {}",
                vectors.cols,
                self.input_dim()
            )));
        }
        let k = self.out_dim();
        let mut out = DenseMatrix::zeros(vectors.rows, k);
        let mut centred = vec![0.0; self.input_dim()];
        for i in 0..vectors.rows {
            for (c, (x, m)) in centred.iter_mut().zip(vectors.row(i).iter().zip(&self.mean)) {
                *c = x - m;
            }
            for (o, comp) in out.row_mut(i).iter_mut().zip(self.components.iter_rows()) {
                *o = comp.iter().zip(&centred).map(|(a, b)| a * b).sum();
            }
        }
        Ok(out)
    }
}

fn check_batch(batch: &DenseMatrix, d: usize, out_dim: usize) -> Result<(), TopicError> {
    if batch.cols != d {
        return Err(TopicError::DimError(format!(
            "batch has dimension {}, expected {d}",
            batch.cols
        )));
    }
    if batch.rows < out_dim {
        return Err(TopicError::BatchTooSmall {
            got: batch.rows,
            out_dim,
        });
    }
    Ok(())
}

fn column_mean(m: &DenseMatrix) -> Vec<f64> {
    let mut mean = vec![0.0; m.cols];
    for row in m.iter_rows() {
        for (a, v) in mean.iter_mut().zip(row) {
            *a += v;
        }
    }
    mean.iter_mut().for_each(|a| *a /= m.rows as f64);
    mean
}

/// Top `k` right singular vectors (as rows) and values, sorted descending,
/// each row's largest-magnitude entry made positive.
pub(crate) fn top_right_singular(
    m: DMatrix<f64>,
    k: usize,
) -> Result<(DenseMatrix, Vec<f64>), TopicError> {
    let d = m.ncols();
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| TopicError::DimError("SVD did not converge".into()))?;
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    if order.len() < k {
        return Err(TopicError::DimError(format!(
            "only {} singular vectors available for {k} components",
            order.len()
        )));
    }
    let mut comps = DenseMatrix::zeros(k, d);
    let mut values = Vec::with_capacity(k);
    for (out_row, &src) in order.iter().take(k).enumerate() {
        let row = v_t.row(src);
        let mut pivot = 0;
        for j in 1..d {
            if row[j].abs() > row[pivot].abs() {
                pivot = j;
            }
        }
        let sign = if row[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            comps.row_mut(out_row)[j] = sign * row[j];
        }
        values.push(s[src]);
    }
    Ok((comps, values))
}

/// Fits an incremental PCA over `batches`, in order.
pub fn fit_incremental_pca<'a, I>(batches: I, out_dim: usize) -> Result<PcaModel, TopicError>
where
    I: IntoIterator<Item = &'a DenseMatrix>,
{
    if out_dim == 0 {
        return Err(TopicError::InvalidParameter("out_dim must be positive".into()));
    }
    let mut iter = batches.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| TopicError::InvalidParameter("no batches to fit".into()))?;
    if first.cols < out_dim {
        return Err(TopicError::DimError(format!(
            "input dimension {} is below out_dim {out_dim}",
            first.cols
        )));
    }
    check_batch(first, first.cols, out_dim)?;
    let mean = column_mean(first);
    let mut centred = first.to_nalgebra();
    for mut row in centred.row_iter_mut() {
        for (v, m) in row.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let (components, singular_values) = top_right_singular(centred, out_dim)?;
    let mut model = PcaModel {
        mean,
        components,
        singular_values,
        n_seen: first.rows,
    };
    for batch in iter {
        model.partial_fit(batch)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn gram_is_identity(c: &DenseMatrix, tol: f64) {
        for i in 0..c.rows {
            for j in 0..c.rows {
                let dot: f64 = c.row(i).iter().zip(c.row(j)).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < tol, "gram[{i}][{j}] = {dot}");
            }
        }
    }

    #[test]
    fn line_direction() {
        let pts: Vec<Vec<f64>> = (-5..=5).map(|t| vec![t as f64, 2.0 * t as f64]).collect();
        let m = fit_incremental_pca([&DenseMatrix::from_rows(&pts).unwrap()], 1).unwrap();
        let want = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
        let c = m.components.row(0);
        let dot = (c[0] * want[0] + c[1] * want[1]).abs();
        assert!((dot - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_rank_preserves_distances() {
        let x = random(30, 6, 1);
        let m = fit_incremental_pca([&x], 6).unwrap();
        gram_is_identity(&m.components, 1e-8);
        let p = m.project(&x).unwrap();
        for i in 0..x.rows {
            for j in 0..x.rows {
                let a = sq_dist_rows(&x, i, j).sqrt();
                let b = sq_dist_rows(&p, i, j).sqrt();
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    fn sq_dist_rows(m: &DenseMatrix, i: usize, j: usize) -> f64 {
        super::super::sq_dist(m.row(i), m.row(j))
    }

    #[test]
    fn projection_identities() {
        let x = random(40, 5, 2);
        let m = fit_incremental_pca([&x], 3).unwrap();
        let at_mean = m.project(&DenseMatrix::new(1, 5, m.mean.clone()).unwrap()).unwrap();
        assert!(at_mean.data.iter().all(|v| v.abs() < 1e-12));

        let mut shifted = m.components.clone();
        for r in 0..shifted.rows {
            for (v, mu) in shifted.row_mut(r).iter_mut().zip(&m.mean) {
                *v += mu;
            }
        }
        let p = m.project(&shifted).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p.row(i)[j] - want).abs() < 1e-9);
            }
        }

        let batch = m.project(&x).unwrap();
        for i in 0..x.rows {
            let single = m.project(&DenseMatrix::new(1, 5, x.row(i).to_vec()).unwrap()).unwrap();
            assert_eq!(single.row(0), batch.row(i));
        }
    }

    #[test]
    fn incremental_full_rank_matches_single_batch() {
        let x = random(60, 4, 3);
        let whole = fit_incremental_pca([&x], 4).unwrap();
        let parts: Vec<DenseMatrix> = (0..3)
            .map(|b| DenseMatrix::new(20, 4, x.data[b * 80..(b + 1) * 80].to_vec()).unwrap())
            .collect();
        let inc = fit_incremental_pca(parts.iter(), 4).unwrap();
        assert_eq!(inc.n_seen, 60);
        gram_is_identity(&inc.components, 1e-8);
        for (a, b) in whole.mean.iter().zip(&inc.mean) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in whole.singular_values.iter().zip(&inc.singular_values) {
            assert!((a - b).abs() < 1e-9);
        }
        for r in 0..4 {
            let dot: f64 = whole.components.row(r).iter().zip(inc.components.row(r)).map(|(a, b)| a * b).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_values_descend() {
        let parts: Vec<DenseMatrix> = (0..4).map(|s| random(25, 10, 10 + s)).collect();
        let m = fit_incremental_pca(parts.iter(), 5).unwrap();
        assert!(m.singular_values.windows(2).all(|w| w[0] >= w[1]));
        gram_is_identity(&m.components, 1e-8);
    }

    #[test]
    fn error_cases() {
        let x = random(3, 5, 4);
        assert_eq!(
            fit_incremental_pca([&x], 4).unwrap_err(),
            TopicError::BatchTooSmall { got: 3, out_dim: 4 }
        );
        let narrow = random(10, 2, 5);
        assert!(matches!(fit_incremental_pca([&narrow], 3), Err(TopicError::DimError(_))));
        let m = fit_incremental_pca([&random(10, 3, 6)], 2).unwrap();
        assert!(matches!(m.project(&random(2, 4, 7)), Err(TopicError::DimError(_))));
    }
}
