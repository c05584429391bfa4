use serde::{Deserialize, Serialize};

use super::{TopicError, TopicModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Average,
    Ward,
}

/// One agglomeration step. Leaves are `0..k`; the cluster created by merge
/// `i` gets node id `k + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub linkage: Linkage,
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
    pub cut_k: usize,
    /// Topic to flat cluster index at `cut_k` clusters.
    pub flat_labels: Vec<usize>,
}

impl Dendrogram {
    /// Flat cluster labels after applying the first `n_leaves - cut_k`
    /// merges. Clusters are numbered by their smallest topic index.
    pub fn cut(&self, cut_k: usize) -> Result<Vec<usize>, TopicError> {
        let k = self.n_leaves;
        if cut_k < 1 || cut_k > k {
            return Err(TopicError::CutError { k, cut_k });
        }
        let mut parent: Vec<usize> = (0..2 * k).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, m) in self.merges.iter().take(k - cut_k).enumerate() {
            let node = k + i;
            let ra = find(&mut parent, m.a);
            let rb = find(&mut parent, m.b);
            parent[ra] = node;
            parent[rb] = node;
        }
        let mut root_label = std::collections::HashMap::new();
        Ok((0..k)
            .map(|leaf| {
                let r = find(&mut parent, leaf);
                let next = root_label.len();
                *root_label.entry(r).or_insert(next)
            })
            .collect())
    }
}

fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na * nb)).max(0.0)
}

/// Agglomerative clustering of centroids under cosine distance, updated
/// with the Lance-Williams recurrence. Equal distances merge the pair with
/// the lowest node ids first.
pub fn topic_hierarchy(model: &TopicModel, linkage: Linkage, cut_k: usize) -> Result<Dendrogram, TopicError> {
    let k = model.k;
    if cut_k < 2 || cut_k > k {
        return Err(TopicError::CutError { k, cut_k });
    }
    let total = 2 * k - 1;
    let mut dist = vec![f64::INFINITY; total * total];
    for i in 0..k {
        for j in (i + 1)..k {
            let d = cosine_distance(model.centroids.row(i), model.centroids.row(j));
            dist[i * total + j] = d;
            dist[j * total + i] = d;
        }
    }
    let mut size = vec![0usize; total];
    size[..k].iter_mut().for_each(|s| *s = 1);
    let mut active: Vec<usize> = (0..k).collect();
    let mut merges = Vec::with_capacity(k - 1);

    for step in 0..k - 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for (ia, &a) in active.iter().enumerate() {
            for &b in &active[ia + 1..] {
                let d = dist[a * total + b];
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, d) = best.expect("at least two active clusters");
        let node = k + step;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        size[node] = size[a] + size[b];
        active.retain(|&x| x != a && x != b);
        for &c in &active {
            let dac = dist[a * total + c];
            let dbc = dist[b * total + c];
            let nd = match linkage {
                Linkage::Average => (na * dac + nb * dbc) / (na + nb),
                Linkage::Ward => {
                    let nc = size[c] as f64;
                    (((na + nc) * dac * dac + (nb + nc) * dbc * dbc - nc * d * d) / (na + nb + nc))
                        .max(0.0)
                        .sqrt()
                }
            };
            dist[node * total + c] = nd;
            dist[c * total + node] = nd;
        }
        // `active` stays sorted because new node ids are the largest so far.
        active.push(node);
        merges.push(Merge {
            a,
            b,
            distance: d,
            size: size[node],
        });
    }
    let mut dendro = Dendrogram {
        linkage,
        n_leaves: k,
        merges,
        cut_k,
        flat_labels: Vec::new(),
    };
    dendro.flat_labels = dendro.cut(cut_k)?;
    Ok(dendro)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topics::DenseMatrix;
    use proptest::prelude::*;

    fn model(rows: Vec<Vec<f64>>) -> TopicModel {
        let k = rows.len();
        TopicModel {
            centroids: DenseMatrix::from_rows(&rows).unwrap(),
            counts: vec![1; k],
            k,
            seed: 0,
        }
    }

    fn pairs() -> TopicModel {
        model(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.99, 0.05, 0.0],
            vec![0.0, 0.04, 1.0],
        ])
    }

    #[test]
    fn tight_pairs_merge_first() {
        for linkage in [Linkage::Average, Linkage::Ward] {
            let d = topic_hierarchy(&pairs(), linkage, 2).unwrap();
            assert_eq!(d.merges.len(), 3);
            let first: Vec<(usize, usize)> = d.merges[..2].iter().map(|m| (m.a, m.b)).collect();
            assert!(first.contains(&(0, 2)) && first.contains(&(1, 3)));
            assert_eq!(d.flat_labels, vec![0, 1, 0, 1]);
        }
    }

    #[test]
    fn cut_at_k_is_identity() {
        let d = topic_hierarchy(&pairs(), Linkage::Average, 4).unwrap();
        assert_eq!(d.flat_labels, vec![0, 1, 2, 3]);
        assert!(matches!(topic_hierarchy(&pairs(), Linkage::Average, 5), Err(TopicError::CutError { .. })));
        assert!(matches!(topic_hierarchy(&pairs(), Linkage::Average, 1), Err(TopicError::CutError { .. })));
    }

    #[test]
    fn ties_prefer_lowest_pair() {
        let m = model(vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let d = topic_hierarchy(&m, Linkage::Average, 2).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 1));
        assert_eq!((d.merges[1].a, d.merges[1].b), (2, 3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn average_linkage_is_monotone_and_cuts_exactly(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 3..14)
        ) {
            prop_assume!(rows.iter().all(|r| r.iter().map(|x| x * x).sum::<f64>() > 1e-6));
            let k = rows.len();
            let m = model(rows);
            let d = topic_hierarchy(&m, Linkage::Average, 2).unwrap();
            prop_assert_eq!(d.merges.len(), k - 1);
            for w in d.merges.windows(2) {
                prop_assert!(w[1].distance >= w[0].distance - 1e-12);
            }
            for cut in 1..=k {
                let labels = d.cut(cut).unwrap();
                let distinct: std::collections::BTreeSet<_> = labels.iter().collect();
                prop_assert_eq!(distinct.len(), cut);
            }
        }
    }
}
