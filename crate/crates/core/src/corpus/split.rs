//! Pattern-constrained development/validation splitting.
//!
//! The development slice is drawn only from examples whose pattern is *not*
//! in the held-out set, so structurally complex constructions can be kept
//! entirely for validation. Sampling is stratified by label and seeded.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{pattern_of, Corpus, CorpusError, DevValSplit, DfIndex, Pattern};
use crate::hashing::derive_seed;

/// Knobs for [`split_dev_validation`].
#[derive(Debug, Clone)]
pub struct SplitConfig {
    /// Fraction of the whole corpus that goes to dev.
    pub dev_fraction: f64,
    /// Seed for the sampling permutation.
    pub seed: u64,
    /// Document-frequency threshold for noun extraction.
    pub df_threshold: f64,
}

impl Default for SplitConfig {
    fn default() -> SplitConfig {
        SplitConfig {
            dev_fraction: 0.3,
            seed: 0,
            df_threshold: super::DF_NOUN_THRESHOLD,
        }
    }
}

/// Split a corpus into dev and validation slices.
///
/// Every example whose derived pattern appears in `held_out` is forced into
/// validation. The dev slice then draws `round(dev_fraction * N)` examples
/// from the rest, apportioned across label strata by largest remainder so the
/// dev label mix tracks the free pool's mix to within one example per label.
/// Output slices preserve corpus order.
pub fn split_dev_validation(
    corpus: &Corpus,
    df_index: &DfIndex,
    held_out: &[Pattern],
    config: &SplitConfig,
) -> Result<DevValSplit, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    if !(config.dev_fraction > 0.0 && config.dev_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(config.dev_fraction));
    }

    let held: BTreeSet<&Pattern> = held_out.iter().collect();
    let patterns = crate::par::map(&corpus.examples, |e| {
        pattern_of(e, df_index, config.df_threshold).ok().map(|(p, _)| p)
    });

    // Free examples, grouped into label strata (Likert corpora form one).
    let mut strata: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    let mut covered = 0usize;
    for (i, e) in corpus.examples.iter().enumerate() {
        let forced = patterns[i].as_ref().map_or(false, |p| held.contains(p));
        if forced {
            covered += 1;
        } else {
            strata.entry(e.label().unwrap_or(0)).or_default().push(i);
        }
    }

    let total = corpus.len();
    let free = total - covered;
    let dev_target = (config.dev_fraction * total as f64).round() as usize;
    if free < dev_target {
        return Err(CorpusError::InfeasibleSplit {
            covered,
            total,
            needed: dev_target,
            dev_fraction: config.dev_fraction,
        });
    }

    let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
    let quota = apportion(dev_target, &sizes);

    let mut dev_indices = Vec::with_capacity(dev_target);
    for ((label, indices), take) in strata.into_iter().zip(quota) {
        let mut pool = indices;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[u64::from(label)]));
        pool.shuffle(&mut rng);
        dev_indices.extend(pool.into_iter().take(take));
    }
    dev_indices.sort_unstable();

    let in_dev: BTreeSet<usize> = dev_indices.iter().copied().collect();
    let mut dev = Vec::with_capacity(dev_target);
    let mut val = Vec::with_capacity(total - dev_target);
    for (i, e) in corpus.examples.iter().enumerate() {
        if in_dev.contains(&i) {
            dev.push(e.clone());
        } else {
            val.push(e.clone());
        }
    }

    Ok(DevValSplit {
        dev: Corpus::new(corpus.language, dev)?,
        val: Corpus::new(corpus.language, val)?,
        held_out_patterns: held_out.iter().cloned().collect(),
    })
}

/// Integer apportionment by largest remainder: each bucket gets
/// `floor(target * size / total)`, leftovers go to the largest fractional
/// parts (earlier bucket wins ties).
fn apportion(target: usize, sizes: &[usize]) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut out: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut remainders: Vec<(usize, usize)> = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        out.push(target * n / total);
        remainders.push((target * n % total, i));
    }
    let mut leftover = target - out.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in remainders {
        if leftover == 0 {
            break;
        }
        out[i] += 1;
        leftover -= 1;
    }
    out
}
