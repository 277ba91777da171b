use std::collections::{BTreeSet, HashSet};

use super::ClusteringError;
use crate::features::QueryFeatures;
use crate::Scalar;

/// Symmetric query distance matrix with zero diagonal and entries in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<D> {
    ids: Vec<String>,
    d: Vec<D>,
}

impl<D: Scalar> DistanceMatrix<D> {
    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<D>>) -> Result<Self, ClusteringError> {
        let n = ids.len();
        if n == 0 {
            return Err(ClusteringError::Empty);
        }
        let mut seen = HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(ClusteringError::DuplicateId(dup.clone()));
        }
        if rows.len() != n {
            return Err(ClusteringError::Shape { ids: n, row: rows.len(), len: 0 });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(ClusteringError::Shape { ids: n, row, len: r.len() });
            }
        }
        let (zero, one) = (D::zero(), D::one());
        for i in 0..n {
            for j in 0..n {
                let v = &rows[i][j];
                let ok = if i == j { *v == zero } else { *v >= zero && *v <= one && *v == rows[j][i] };
                if !ok {
                    return Err(ClusteringError::InvalidEntry(i, j));
                }
            }
        }
        Ok(DistanceMatrix { ids, d: rows.into_iter().flatten().collect() })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> &D {
        &self.d[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[D] {
        let n = self.len();
        &self.d[i * n..(i + 1) * n]
    }

    /// The matrix with rows and columns reordered so that new index `i` is
    /// old index `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.len();
        assert_eq!(order.len(), n, "permutation length");
        let ids = order.iter().map(|&i| self.ids[i].clone()).collect();
        let mut d = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                d.push(self.get(i, j).clone());
            }
        }
        DistanceMatrix { ids, d }
    }
}

/// `1 - |A ∩ B| / |A ∪ B|`; zero for two empty sets.
pub fn jaccard_distance_sets<T: Ord, D: Scalar>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> D {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return D::zero();
    }
    D::ratio(union - inter, union)
}

/// Jaccard distance over the P/PO feature sets of two queries.
pub fn jaccard_distance<D: Scalar>(a: &QueryFeatures, b: &QueryFeatures) -> D {
    jaccard_distance_sets(&a.features, &b.features)
}

pub fn build_distance_matrix<D: Scalar>(workload: &[QueryFeatures]) -> Result<DistanceMatrix<D>, ClusteringError> {
    let n = workload.len();
    let rows = (0..n)
        .map(|i| (0..n).map(|j| if i == j { D::zero() } else { jaccard_distance(&workload[i], &workload[j]) }).collect())
        .collect();
    DistanceMatrix::from_rows(workload.iter().map(|q| q.query_id.clone()).collect(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_query_features, fixtures, Feature};
    use crate::rdf::Term;
    use crate::Rational64;

    fn qf(id: &str, feats: &[&str]) -> QueryFeatures {
        QueryFeatures {
            query_id: id.into(),
            features: feats.iter().map(|f| Feature::P(Term::iri(*f))).collect(),
            joins: vec![],
            per_pattern_feature: feats.iter().map(|f| Feature::P(Term::iri(*f))).collect(),
        }
    }

    #[test]
    fn student_course_pair_distance_is_one_third() {
        let q7 = extract_query_features(&fixtures::q7()).unwrap();
        let q9 = extract_query_features(&fixtures::q9()).unwrap();
        assert_eq!(jaccard_distance::<Rational64>(&q7, &q9), Rational64::new(1, 3));
        assert_eq!(format!("{:.2}", jaccard_distance::<f64>(&q7, &q9)), "0.33");
    }

    #[test]
    fn identical_and_disjoint() {
        let a = qf("a", &["x", "y"]);
        assert_eq!(jaccard_distance::<Rational64>(&a, &a), Rational64::from_integer(0));
        assert_eq!(jaccard_distance::<Rational64>(&a, &qf("b", &["z"])), Rational64::from_integer(1));
    }

    #[test]
    fn three_set_matrix_by_hand() {
        // {a,b} vs {b,c}: |∩| = 1, |∪| = 3, distance 2/3.
        let wl = [qf("Q1", &["a", "b"]), qf("Q2", &["b", "c"]), qf("Q3", &["d"])];
        let m = build_distance_matrix::<Rational64>(&wl).unwrap();
        let r = |n, d| Rational64::new(n, d);
        let expected = [[r(0, 1), r(2, 3), r(1, 1)], [r(2, 3), r(0, 1), r(1, 1)], [r(1, 1), r(1, 1), r(0, 1)]];
        for i in 0..3 {
            assert_eq!(m.row(i), &expected[i]);
        }
    }

    #[test]
    fn single_query_and_copies() {
        let m = build_distance_matrix::<f64>(&[qf("Q1", &["a"])]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(*m.get(0, 0), 0.0);
        let m = build_distance_matrix::<f64>(&[qf("Q1", &["a", "b"]), qf("Q2", &["a", "b"])]).unwrap();
        assert_eq!(*m.get(0, 1), 0.0);
    }

    #[test]
    fn duplicate_ids_and_bad_entries_are_rejected() {
        let err = build_distance_matrix::<f64>(&[qf("Q1", &["a"]), qf("Q1", &["b"])]).unwrap_err();
        assert_eq!(err, ClusteringError::DuplicateId("Q1".into()));
        assert_eq!(build_distance_matrix::<f64>(&[]).unwrap_err(), ClusteringError::Empty);
        let ids = vec!["a".to_string(), "b".to_string()];
        let err = DistanceMatrix::from_rows(ids.clone(), vec![vec![0.0, 0.5], vec![0.4, 0.0]]).unwrap_err();
        assert_eq!(err, ClusteringError::InvalidEntry(0, 1));
        let err = DistanceMatrix::from_rows(ids, vec![vec![0.0, 1.5], vec![1.5, 0.0]]).unwrap_err();
        assert_eq!(err, ClusteringError::InvalidEntry(0, 1));
    }
}
