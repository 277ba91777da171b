use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{Partitioning, PartitionError};
use crate::features::Feature;
use crate::ShardId;

/// `{"k", "sizes": {shard: n}, "features": {key: shard}}` with sorted keys.
pub fn emit_metadata(p: &Partitioning) -> Value {
    let sizes: BTreeMap<String, usize> = p.sizes.iter().map(|(s, n)| (s.0.to_string(), *n)).collect();
    let features: BTreeMap<String, usize> = p.feature_home.iter().map(|(f, s)| (f.key(), s.0)).collect();
    json!({ "k": p.k, "sizes": sizes, "features": features })
}

/// Restores the feature home map from an emitted document.
pub fn load_metadata(doc: &Value) -> Result<BTreeMap<Feature, ShardId>, PartitionError> {
    let bad = |m: &str| PartitionError::Metadata(m.to_owned());
    let k = doc.get("k").and_then(Value::as_u64).ok_or_else(|| bad("missing k"))? as usize;
    let features = doc.get("features").and_then(Value::as_object).ok_or_else(|| bad("missing features"))?;
    let mut home = BTreeMap::new();
    for (key, shard) in features {
        let feature = Feature::from_key(key).ok_or_else(|| bad(&format!("bad feature key {key}")))?;
        let shard = shard.as_u64().map(|s| s as usize).filter(|s| *s < k);
        let shard = shard.ok_or_else(|| bad(&format!("bad shard for {key}")))?;
        home.insert(feature, ShardId(shard));
    }
    Ok(home)
}
