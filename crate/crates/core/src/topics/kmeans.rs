use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{nearest, sq_dist, DenseMatrix, TopicError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    /// `k x out_dim`.
    pub centroids: DenseMatrix,
    /// Number of samples folded into each centroid.
    pub counts: Vec<u64>,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Independent restarts; the run with the lowest inertia is kept.
    pub n_init: usize,
}

impl TopicModel {
    /// Sum of squared distances from each vector to its nearest centroid.
    pub fn inertia(&self, vectors: &DenseMatrix) -> f64 {
        let per_row: Vec<f64> = (0..vectors.rows)
            .into_par_iter()
            .map(|i| nearest(&self.centroids, vectors.row(i)).1)
            .collect();
        per_row.iter().sum()
    }

    /// Drops centroids flagged in `keep == false`, returning the compacted
    /// model and the old-to-new index map.
    pub fn retain(&self, keep: &[bool]) -> (TopicModel, Vec<Option<usize>>) {
        let mut map = vec![None; self.k];
        let mut data = Vec::new();
        let mut counts = Vec::new();
        for j in 0..self.k {
            if keep[j] {
                map[j] = Some(counts.len());
                data.extend_from_slice(self.centroids.row(j));
                counts.push(self.counts[j]);
            }
        }
        let k = counts.len();
        let centroids = DenseMatrix {
            rows: k,
            cols: self.centroids.cols,
            data,
        };
        (
            TopicModel {
                centroids,
                counts,
                k,
                seed: self.seed,
            },
            map,
        )
    }
}

/// k-means++ seeding over the rows listed in `sample`.
fn kmeans_plus_plus(
    vectors: &DenseMatrix,
    sample: &[usize],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> DenseMatrix {
    let mut centroids = DenseMatrix::zeros(k, vectors.cols);
    let first = sample[rng.gen_range(0..sample.len())];
    centroids.row_mut(0).copy_from_slice(vectors.row(first));
    let mut d2: Vec<f64> = sample
        .iter()
        .map(|&i| sq_dist(vectors.row(i), vectors.row(first)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (pos, w) in d2.iter().enumerate() {
                acc += w;
                if *w > 0.0 && acc > target {
                    chosen = Some(pos);
                    break;
                }
            }
            // Rounding can leave `target` just above the running sum.
            chosen.unwrap_or_else(|| d2.iter().rposition(|w| *w > 0.0).unwrap())
        } else {
            rng.gen_range(0..sample.len())
        };
        let row = vectors.row(sample[pick]).to_vec();
        centroids.row_mut(c).copy_from_slice(&row);
        for (pos, &i) in sample.iter().enumerate() {
            let d = sq_dist(vectors.row(i), &row);
            if d < d2[pos] {
                d2[pos] = d;
            }
        }
    }
    centroids
}

/// Mini-batch k-means with per-centroid learning rate `1 / count`.
///
/// Runs `n_init` restarts; restart `i` is seeded from `seed` mixed with
/// `i` (restart 0 uses `seed` itself) and the lowest-inertia model wins,
/// ties going to the earliest restart. Within a restart, each epoch visits the rows in a seeded random order, in batches of
/// `batch_size`. Centroids are seeded by k-means++ on the first batch (at
/// least `k` rows). Batch assignments use the centroids as they were before
/// the batch; updates are then applied sequentially in batch order. A
/// centroid that has still received no samples after a batch is moved onto
/// the batch row farthest from its assigned centroid.
pub fn fit_minibatch_kmeans(vectors: &DenseMatrix, params: KMeansParams) -> Result<TopicModel, TopicError> {
    let KMeansParams {
        k,
        seed,
        batch_size,
        epochs,
        n_init,
    } = params;
    if k < 2 {
        return Err(TopicError::InvalidK(k));
    }
    if vectors.rows < k {
        return Err(TopicError::TooFewSamples { n: vectors.rows, k });
    }
    if batch_size == 0 || epochs == 0 || n_init == 0 {
        return Err(TopicError::InvalidParameter(
            "batch_size, epochs and n_init must be positive".into(),
        ));
    }
    let mut best: Option<(TopicModel, f64)> = None;
    for restart in 0..n_init as u64 {
        let run_seed = seed ^ restart.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut model = fit_once(vectors, k, run_seed, batch_size, epochs);
        model.seed = seed;
        let inertia = model.inertia(vectors);
        if best.as_ref().is_none_or(|(_, b)| inertia < *b) {
            best = Some((model, inertia));
        }
    }
    Ok(best.expect("n_init >= 1").0)
}

fn fit_once(vectors: &DenseMatrix, k: usize, seed: u64, batch_size: usize, epochs: usize) -> TopicModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..vectors.rows).collect();
    let mut centroids: Option<DenseMatrix> = None;
    let mut counts = vec![0u64; k];

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        let mut start = 0;
        while start < order.len() {
            let init_len = if centroids.is_none() { batch_size.max(k) } else { batch_size };
            let end = (start + init_len).min(order.len());
            let batch = &order[start..end];
            start = end;
            let cents = centroids.get_or_insert_with(|| kmeans_plus_plus(vectors, batch, k, &mut rng));

            let assigned: Vec<(usize, f64)> = batch
                .par_iter()
                .map(|&i| nearest(cents, vectors.row(i)))
                .collect();
            for (&i, &(label, _)) in batch.iter().zip(&assigned) {
                counts[label] += 1;
                let eta = 1.0 / counts[label] as f64;
                for (c, x) in cents.row_mut(label).iter_mut().zip(vectors.row(i)) {
                    *c += eta * (x - *c);
                }
            }

            let mut used = vec![false; batch.len()];
            for j in 0..k {
                if counts[j] > 0 {
                    continue;
                }
                let mut far: Option<(usize, f64)> = None;
                for (pos, &i) in batch.iter().enumerate() {
                    if used[pos] {
                        continue;
                    }
                    let d = sq_dist(vectors.row(i), cents.row(assigned[pos].0));
                    if far.is_none_or(|(_, best)| d > best) {
                        far = Some((pos, d));
                    }
                }
                if let Some((pos, _)) = far {
                    used[pos] = true;
                    let row = vectors.row(batch[pos]).to_vec();
                    cents.row_mut(j).copy_from_slice(&row);
                }
            }
        }
    }
    TopicModel {
        centroids: centroids.expect("at least one batch"),
        counts,
        k,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(k: usize, seed: u64) -> KMeansParams {
        KMeansParams {
            k,
            seed,
            batch_size: 8,
            epochs: 5,
            n_init: 1,
        }
    }

    #[test]
    fn separated_clusters() {
        let mut rows = vec![vec![0.0, 0.0]; 10];
        rows.extend(vec![vec![10.0, 10.0]; 10]);
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let m = fit_minibatch_kmeans(&x, params(2, 11)).unwrap();
        let mut cs: Vec<&[f64]> = m.centroids.iter_rows().collect();
        cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!(sq_dist(cs[0], &[0.0, 0.0]).sqrt() < 0.5);
        assert!(sq_dist(cs[1], &[10.0, 10.0]).sqrt() < 0.5);
        assert_eq!(m.counts.iter().sum::<u64>(), 20 * 5);
    }

    #[test]
    fn one_point_per_centroid() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let m = fit_minibatch_kmeans(&x, params(6, 3)).unwrap();
        assert!(m.inertia(&x) < 1e-9);
    }

    #[test]
    fn duplicate_rows_reseed_empty_centroids() {
        let mut rows = vec![vec![1.0, 1.0]; 5];
        rows.push(vec![4.0, 0.0]);
        rows.push(vec![-3.0, 2.0]);
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let m = fit_minibatch_kmeans(&x, params(3, 0)).unwrap();
        assert!(m.inertia(&x) < 1e-9);
    }

    #[test]
    fn errors() {
        let x = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(
            fit_minibatch_kmeans(&x, params(3, 0)).unwrap_err(),
            TopicError::TooFewSamples { n: 2, k: 3 }
        );
        assert_eq!(fit_minibatch_kmeans(&x, params(1, 0)).unwrap_err(), TopicError::InvalidK(1));
    }

    #[test]
    fn retain_compacts() {
        let x = DenseMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let m = fit_minibatch_kmeans(&x, params(3, 0)).unwrap();
        let (r, map) = m.retain(&[true, false, true]);
        assert_eq!(r.k, 2);
        assert_eq!(map, vec![Some(0), None, Some(1)]);
        assert_eq!(r.centroids.row(1), m.centroids.row(2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn deterministic_and_counts_add_up(
            pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..40),
            k in 2usize..4,
            seed in any::<u64>(),
            batch in 1usize..10,
        ) {
            let rows: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
            let x = DenseMatrix::from_rows(&rows).unwrap();
            let p = KMeansParams { k, seed, batch_size: batch, epochs: 3, n_init: 2 };
            let a = fit_minibatch_kmeans(&x, p).unwrap();
            let b = fit_minibatch_kmeans(&x, p).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.counts.iter().sum::<u64>(), 3 * rows.len() as u64);
            let single = fit_minibatch_kmeans(&x, KMeansParams { n_init: 1, ..p }).unwrap();
            prop_assert!(a.inertia(&x) <= single.inertia(&x));
            prop_assert!(a.centroids.data.iter().all(|v| v.is_finite()));
        }
    }
}
