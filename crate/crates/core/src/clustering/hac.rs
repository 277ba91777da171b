use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ClusteringError, DistanceMatrix};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Single,
    Complete,
    Average,
}

impl FromStr for Linkage {
    type Err = ClusteringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            _ => Err(ClusteringError::UnknownLinkage(s.to_owned())),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

/// One agglomeration step. Leaves are nodes `0..n`; merge `i` creates node
/// `n + i`. `left` is the child holding the smaller leaf index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge<D> {
    pub new: usize,
    pub left: usize,
    pub right: usize,
    pub height: D,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram<D> {
    pub leaves: Vec<String>,
    pub linkage: Linkage,
    pub merges: Vec<Merge<D>>,
}

impl<D> Dendrogram<D> {
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }
}

/// Agglomerative clustering over a full distance matrix. At each step the
/// closest pair of clusters merges; equal distances go to the pair whose
/// (smaller, larger) smallest-leaf indices is lexicographically first, so the
/// result does not depend on floating-point accident or hash order.
///
/// The working matrix keeps each cluster in the slot of its smallest leaf,
/// which makes slot order and tie order coincide.
pub fn hac<D: Scalar>(matrix: &DistanceMatrix<D>, linkage: Linkage) -> Dendrogram<D> {
    let n = matrix.len();
    let mut d: Vec<Vec<D>> = (0..n).map(|i| matrix.row(i).to_vec()).collect();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                // Strict comparison keeps the first pair in (i, j) order.
                if best.is_none_or(|(bi, bj)| d[i][j] < d[bi][bj]) {
                    best = Some((i, j));
                }
            }
        }
        let (a, b) = best.expect("two active clusters remain");
        let height = d[a][b].clone();
        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let v = match linkage {
                Linkage::Single => min(&d[a][k], &d[b][k]),
                Linkage::Complete => max(&d[a][k], &d[b][k]),
                Linkage::Average => {
                    let (sa, sb) = (D::from_count(size[a]), D::from_count(size[b]));
                    (sa.clone() * d[a][k].clone() + sb.clone() * d[b][k].clone()) / (sa + sb)
                }
            };
            d[a][k] = v.clone();
            d[k][a] = v;
        }
        active[b] = false;
        size[a] += size[b];
        merges.push(Merge { new: n + step, left: node[a], right: node[b], height, size: size[a] });
        node[a] = n + step;
    }
    Dendrogram { leaves: matrix.ids().to_vec(), linkage, merges }
}

fn min<D: Scalar>(a: &D, b: &D) -> D {
    if b < a { b.clone() } else { a.clone() }
}

fn max<D: Scalar>(a: &D, b: &D) -> D {
    if b > a { b.clone() } else { a.clone() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CutTarget<D> {
    /// Keep merges with height at most this value.
    Distance(D),
    /// Undo merges until exactly this many clusters remain.
    Count(usize),
}

/// Flat clustering. Clusters are ordered by smallest leaf; members are leaf
/// indices in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCut<D> {
    pub cut_distance: D,
    pub clusters: Vec<Vec<usize>>,
}

pub fn cut<D: Scalar>(dendrogram: &Dendrogram<D>, target: &CutTarget<D>) -> Result<ClusterCut<D>, ClusteringError> {
    let n = dendrogram.leaf_count();
    let (applied, cut_distance) = match target {
        CutTarget::Count(k) => {
            if *k == 0 || *k > n {
                return Err(ClusteringError::CountOutOfRange { k: *k, n });
            }
            let applied = n - k;
            let height = applied.checked_sub(1).map_or(D::zero(), |i| dendrogram.merges[i].height.clone());
            (applied, height)
        }
        CutTarget::Distance(t) => {
            // Heights are monotone for all three linkages.
            let applied = dendrogram.merges.iter().take_while(|m| m.height <= *t).count();
            (applied, t.clone())
        }
    };

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut leaf_of: Vec<usize> = (0..n).collect();
    for m in &dendrogram.merges[..applied] {
        let (l, r) = (leaf_of[m.left], leaf_of[m.right]);
        let (rl, rr) = (find(&mut parent, l), find(&mut parent, r));
        parent[rl.max(rr)] = rl.min(rr);
        leaf_of.push(l);
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[root]].push(leaf);
    }
    Ok(ClusterCut { cut_distance, clusters })
}


#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use crate::Rational64;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("Q{i}")).collect()
    }

    fn three_set() -> DistanceMatrix<Rational64> {
        let r = |n, d| Rational64::new(n, d);
        DistanceMatrix::from_rows(
            ids(3),
            vec![vec![r(0, 1), r(2, 3), r(1, 1)], vec![r(2, 3), r(0, 1), r(1, 1)], vec![r(1, 1), r(1, 1), r(0, 1)]],
        )
        .unwrap()
    }

    #[test]
    fn three_set_merges_close_pair_first() {
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let d = hac(&three_set(), linkage);
            assert_eq!(d.merges[0], Merge { new: 3, left: 0, right: 1, height: Rational64::new(2, 3), size: 2 });
            assert_eq!(d.merges[1], Merge { new: 4, left: 3, right: 2, height: Rational64::from_integer(1), size: 3 });
        }
    }

    #[test]
    fn cuts_on_three_sets() {
        let d = hac(&three_set(), Linkage::Single);
        assert_eq!(cut(&d, &CutTarget::Count(2)).unwrap().clusters, vec![vec![0, 1], vec![2]]);
        assert_eq!(cut(&d, &CutTarget::Count(3)).unwrap().clusters, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(cut(&d, &CutTarget::Count(1)).unwrap().clusters, vec![vec![0, 1, 2]]);
        let c = cut(&d, &CutTarget::Distance(Rational64::new(1, 2))).unwrap();
        assert_eq!(c.clusters.len(), 3);
        let c = cut(&d, &CutTarget::Distance(Rational64::new(2, 3))).unwrap();
        assert_eq!(c.clusters, vec![vec![0, 1], vec![2]]);
        assert_eq!(cut(&d, &CutTarget::Count(2)).unwrap().cut_distance, Rational64::new(2, 3));
        assert_eq!(cut(&d, &CutTarget::Count(0)).unwrap_err(), ClusteringError::CountOutOfRange { k: 0, n: 3 });
        assert_eq!(cut(&d, &CutTarget::Count(4)).unwrap_err(), ClusteringError::CountOutOfRange { k: 4, n: 3 });
    }

    #[test]
    fn single_leaf_and_all_equal() {
        let m = DistanceMatrix::from_rows(ids(1), vec![vec![0.0f64]]).unwrap();
        let d = hac(&m, Linkage::Average);
        assert!(d.merges.is_empty());
        assert_eq!(cut(&d, &CutTarget::Count(1)).unwrap().clusters, vec![vec![0]]);

        let m = DistanceMatrix::from_rows(ids(4), (0..4).map(|i| (0..4).map(|j| if i == j { 0.0 } else { 0.5 }).collect()).collect()).unwrap();
        let d = hac(&m, Linkage::Single);
        let pairs: Vec<_> = d.merges.iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(pairs, [(0, 1), (4, 2), (5, 3)]);
    }

    #[test]
    fn average_height_is_mean_of_pairs() {
        let m = DistanceMatrix::from_rows(
            ids(4),
            vec![
                vec![0.0, 0.1, 0.6, 0.9],
                vec![0.1, 0.0, 0.7, 0.8],
                vec![0.6, 0.7, 0.0, 0.2],
                vec![0.9, 0.8, 0.2, 0.0],
            ],
        )
        .unwrap();
        let d = hac(&m, Linkage::Average);
        let last = d.merges.last().unwrap();
        assert!((last.height - (0.6f64 + 0.9 + 0.7 + 0.8) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn linkage_names() {
        assert_eq!("Average".parse::<Linkage>().unwrap(), Linkage::Average);
        assert!("ward".parse::<Linkage>().is_err());
        assert_eq!(Linkage::default().to_string(), "single");
    }

    fn arb_matrix() -> impl Strategy<Value = DistanceMatrix<Rational64>> {
        (1usize..=8).prop_flat_map(|n| {
            prop::collection::vec(0i64..=6, n * (n - 1) / 2).prop_map(move |upper| {
                let mut rows = vec![vec![Rational64::from_integer(0); n]; n];
                let mut it = upper.into_iter();
                for i in 0..n {
                    for j in i + 1..n {
                        let v = Rational64::new(it.next().unwrap(), 6);
                        rows[i][j] = v;
                        rows[j][i] = v;
                    }
                }
                DistanceMatrix::from_rows(ids(n), rows).unwrap()
            })
        })
    }

    fn partition_key(clusters: &[Vec<usize>], order: &[usize]) -> Vec<Vec<usize>> {
        let mut mapped: Vec<Vec<usize>> = clusters
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.iter().map(|&i| order[i]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        mapped.sort();
        mapped
    }

    proptest! {
        #[test]
        fn matches_naive_oracle(m in arb_matrix()) {
            for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
                let got: Vec<_> = hac(&m, linkage).merges.into_iter().map(|m| (m.left, m.right, m.height)).collect();
                prop_assert_eq!(got, naive_hac(&m, linkage));
            }
        }

        #[test]
        fn heights_are_monotone(m in arb_matrix()) {
            for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
                let d = hac(&m, linkage);
                prop_assert!(d.merges.windows(2).all(|w| w[0].height <= w[1].height));
            }
        }

        #[test]
        fn cut_count_yields_k_clusters(m in arb_matrix(), k in 1usize..=8) {
            let d = hac(&m, Linkage::Complete);
            let k = k.min(m.len());
            let c = cut(&d, &CutTarget::Count(k)).unwrap();
            prop_assert_eq!(c.clusters.len(), k);
            let mut all: Vec<usize> = c.clusters.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..m.len()).collect::<Vec<_>>());
        }

        #[test]
        fn single_linkage_is_permutation_invariant(m in arb_matrix(), seed in any::<u64>()) {
            // Single-linkage clusters at a threshold are connected components,
            // so they cannot depend on input order even with ties.
            use rand::{seq::SliceRandom, SeedableRng};
            let mut order: Vec<usize> = (0..m.len()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pm = m.permuted(&order);
            for t in 0..=6 {
                let t = CutTarget::Distance(Rational64::new(t, 6));
                let a = cut(&hac(&m, Linkage::Single), &t).unwrap().clusters;
                let b = cut(&hac(&pm, Linkage::Single), &t).unwrap().clusters;
                let identity: Vec<usize> = (0..m.len()).collect();
                prop_assert_eq!(partition_key(&a, &identity), partition_key(&b, &order));
            }
        }
    }
}
