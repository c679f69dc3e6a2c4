use crate::error::{Error, Result};
use crate::exec::Execution;

use super::check_dimension;

/// Lazy learner: keeps every training vector.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnModel {
    pub(crate) vectors: Vec<Vec<f64>>,
    pub(crate) labels: Vec<u8>,
    pub(crate) k: usize,
    pub(crate) dim: usize,
}

pub fn knn_fit(vectors: Vec<Vec<f64>>, labels: Vec<u8>, k: usize) -> Result<KnnModel> {
    if vectors.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if k > vectors.len() {
        return Err(Error::Config(format!(
            "k = {k} exceeds the {} training vectors",
            vectors.len()
        )));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Validation("training vectors differ in dimension".into()));
    }
    Ok(KnnModel {
        vectors,
        labels,
        k,
        dim,
    })
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// The `k` nearest stored vectors as `(squared distance, index)`, nearest
    /// first; equal distances keep the lower index first.
    pub fn neighbors(&self, query: &[f64]) -> Result<Vec<(f64, usize)>> {
        check_dimension(self.dim, query.len())?;
        let k = self.k;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, v) in self.vectors.iter().enumerate() {
            let d = squared_distance(v, query);
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            // strictly-greater insertion point keeps earlier indices ahead on ties
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(k);
        }
        Ok(best)
    }

    /// Majority label of the k nearest neighbours. Vote ties go to the label
    /// whose nearest member is closest, then to the lower label code.
    pub fn predict(&self, query: &[f64]) -> Result<u8> {
        let neighbors = self.neighbors(query)?;
        // (votes, nearest distance) per label
        let mut tally: Vec<(usize, f64)> = Vec::new();
        for &(d, i) in &neighbors {
            let label = self.labels[i] as usize;
            if tally.len() <= label {
                tally.resize(label + 1, (0, f64::INFINITY));
            }
            let entry = &mut tally[label];
            entry.0 += 1;
            entry.1 = entry.1.min(d);
        }
        let mut winner = 0;
        for (label, &(votes, nearest)) in tally.iter().enumerate() {
            let (best_votes, best_nearest) = tally[winner];
            if votes > best_votes || (votes == best_votes && nearest < best_nearest) {
                winner = label;
            }
        }
        Ok(winner as u8)
    }

    pub fn predict_batch(&self, queries: &[Vec<f64>], exec: Execution) -> Result<Vec<u8>> {
        exec.try_map_range(queries.len(), |i| self.predict(&queries[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(points: &[(f64, f64, u8)], k: usize) -> KnnModel {
        knn_fit(
            points.iter().map(|&(x, y, _)| vec![x, y]).collect(),
            points.iter().map(|&(_, _, l)| l).collect(),
            k,
        )
        .unwrap()
    }

    #[test]
    fn exact_match_with_k1() {
        let m = model(&[(0.0, 0.0, 0), (1.0, 1.0, 1), (2.0, 0.5, 2)], 1);
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), 1);
        assert_eq!(m.predict(&[2.0, 0.5]).unwrap(), 2);
        assert_eq!(m.vectors()[2], vec![2.0, 0.5]);
    }

    #[test]
    fn three_point_example() {
        // distances from (0, 0.4): 0.4, 0.6, ~7.4
        let m = model(&[(0.0, 0.0, 0), (0.0, 1.0, 0), (5.0, 5.0, 1)], 3);
        assert_eq!(m.predict(&[0.0, 0.4]).unwrap(), 0);
        let n = m.neighbors(&[0.0, 0.4]).unwrap();
        assert_eq!(n.iter().map(|x| x.1).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn k_equal_to_train_size_is_global_majority() {
        let m = model(
            &[(0.0, 0.0, 2), (9.0, 9.0, 1), (9.1, 9.0, 1), (8.9, 9.0, 1), (0.1, 0.0, 2)],
            5,
        );
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let m = model(&[(1.0, 0.0, 1), (-1.0, 0.0, 0), (0.0, 1.0, 2)], 1);
        assert_eq!(m.neighbors(&[0.0, 0.0]).unwrap(), vec![(1.0, 0)]);
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn vote_ties_prefer_nearest_then_lower_label() {
        // labels 1 and 0 each get one vote; label 1 is nearer
        let m = model(&[(3.0, 0.0, 0), (1.0, 0.0, 1)], 2);
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 1);
        // equal nearest distances: lower label wins
        let m = model(&[(0.0, 2.0, 2), (2.0, 0.0, 1)], 2);
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            knn_fit(vec![vec![0.0]], vec![0], 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            knn_fit(vec![vec![0.0]], vec![0], 2),
            Err(Error::Config(_))
        ));
        assert!(knn_fit(vec![vec![0.0], vec![1.0]], vec![0, 1], 2).is_ok());
        let m = model(&[(0.0, 0.0, 0)], 1);
        assert!(matches!(m.predict(&[0.0]), Err(Error::Validation(_))));
    }
}
