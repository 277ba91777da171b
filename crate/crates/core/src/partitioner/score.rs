use std::collections::BTreeSet;

use serde::Serialize;

use super::{FeatureGroup, PartitionError};
use crate::features::{Feature, FeatureCatalog};
use crate::Scalar;

/// Weights of the replicated-feature score, `w[0]` being w1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreWeights<W> {
    pub w: [W; 7],
}

impl<W: Scalar> Default for ScoreWeights<W> {
    fn default() -> Self {
        ScoreWeights { w: std::array::from_fn(|_| W::one()) }
    }
}

impl<W: Scalar> ScoreWeights<W> {
    pub fn new(w: [W; 7]) -> Result<Self, PartitionError> {
        let weights = ScoreWeights { w };
        weights.validate()?;
        Ok(weights)
    }

    pub fn validate(&self) -> Result<(), PartitionError> {
        if let Some(i) = self.w.iter().position(|w| *w < W::zero()) {
            return Err(PartitionError::InvalidWeights(format!("w{} is negative", i + 1)));
        }
        if self.w.iter().all(|w| *w == W::zero()) {
            return Err(PartitionError::InvalidWeights("all weights are zero".into()));
        }
        Ok(())
    }
}

/// Unweighted terms of the score of one feature for one candidate group.
/// `_c` terms are relative to the group, `_t` terms to the whole workload
/// or dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ScoreTerms {
    /// Join links from a pattern of the feature to a pattern whose feature
    /// is in the group.
    pub d_qr: usize,
    /// Co-occurring features in the group.
    pub p_c: usize,
    /// Queries using the feature whose features all lie in the group.
    pub q_c: usize,
    /// Triple count of the group's features.
    pub s_c: usize,
    pub p_t: usize,
    pub q_t: usize,
    pub s_t: usize,
}

impl ScoreTerms {
    pub fn weighted<W: Scalar>(&self, weights: &ScoreWeights<W>) -> W {
        let w = &weights.w;
        let c = W::from_count;
        w[6].clone() * c(self.d_qr)
            + (w[0].clone() * c(self.p_c) + w[1].clone() * c(self.q_c) + w[2].clone() * c(self.s_c))
            + (w[3].clone() * c(self.p_t) + w[4].clone() * c(self.q_t) + w[5].clone() * c(self.s_t))
    }
}

pub fn score_terms(f: &Feature, group: &FeatureGroup, catalog: &FeatureCatalog) -> Result<ScoreTerms, PartitionError> {
    let users: Vec<_> = catalog.workload.iter().filter(|q| q.uses(f)).collect();
    if users.is_empty() && !catalog.contains(f) {
        return Err(PartitionError::UnknownFeature(f.key()));
    }
    let peers: BTreeSet<&Feature> = users.iter().flat_map(|q| q.features.iter()).filter(|g| *g != f).collect();
    let mut d_qr = 0;
    for q in &catalog.workload {
        for link in q.links_of(f) {
            let (l, r) = (&q.per_pattern_feature[link.left], &q.per_pattern_feature[link.right]);
            let other = if l == f { r } else { l };
            if group.features.contains(other) {
                d_qr += 1;
            }
        }
    }
    Ok(ScoreTerms {
        d_qr,
        p_c: peers.iter().filter(|g| group.features.contains(**g)).count(),
        q_c: users.iter().filter(|q| q.features.is_subset(&group.features)).count(),
        s_c: group.features.iter().map(|g| catalog.count(g)).sum(),
        p_t: peers.len(),
        q_t: users.len(),
        s_t: catalog.total_triples,
    })
}

/// `w7·D_QR + (p_c·w1 + q_c·w2 + s_c·w3) + (p_t·w4 + q_t·w5 + s_t·w6)`.
pub fn score_replicated<W: Scalar>(
    f: &Feature,
    group: &FeatureGroup,
    catalog: &FeatureCatalog,
    weights: &ScoreWeights<W>,
) -> Result<W, PartitionError> {
    Ok(score_terms(f, group, catalog)?.weighted(weights))
}
