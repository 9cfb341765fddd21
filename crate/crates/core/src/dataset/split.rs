//! Seeded deterministic train/test/val splitting.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetError, LabeledImage, SplitManifest, SplitSet};

/// Split a corpus of labeled images. See [`split_ids`].
pub fn split_dataset(
    corpus: &[LabeledImage],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SplitManifest, DatasetError> {
    let ids: Vec<String> = corpus.iter().map(|img| img.image_id.clone()).collect();
    split_ids(ids, ratios, seed)
}

/// Shuffle the (sorted) ids with a seeded generator, then assign the first
/// `floor(n * train)` to train, the next `floor(n * test)` to test, and the
/// remainder to val. Sorting before shuffling makes the result a function
/// of (seed, id set) alone, not of input order.
pub fn split_ids(
    mut ids: Vec<String>,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SplitManifest, DatasetError> {
    validate_ratios(ratios)?;
    if ids.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    ids.sort();
    ids.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let n = ids.len();
    let n_train = (n as f64 * ratios.0).floor() as usize;
    let n_test = (n as f64 * ratios.1).floor() as usize;

    let mut assignment = BTreeMap::new();
    for (i, id) in ids.into_iter().enumerate() {
        let set = if i < n_train {
            SplitSet::Train
        } else if i < n_train + n_test {
            SplitSet::Test
        } else {
            SplitSet::Val
        };
        assignment.insert(id, set);
    }
    Ok(SplitManifest { seed, ratios, assignment })
}

fn validate_ratios(ratios: (f64, f64, f64)) -> Result<(), DatasetError> {
    let (t, e, v) = ratios;
    for r in [t, e, v] {
        if !r.is_finite() || r < 0.0 {
            return Err(DatasetError::InvalidRatios(format!("ratio {r} out of range")));
        }
    }
    if ((t + e + v) - 1.0).abs() > 1e-9 {
        return Err(DatasetError::InvalidRatios(format!(
            "ratios sum to {}, expected 1",
            t + e + v
        )));
    }
    Ok(())
}
