//! One-target selection: keep exactly one target per source group.
//!
//! Six deterministic strategies rank each target against its source by
//! Levenshtein ratio, Jaccard similarity or merged edit count and take the
//! extreme; `random` draws uniformly. Ties go to the earliest target.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Sample, Sentence, SourceGroup};
use crate::edits::extract_edits;
use crate::textmetrics::{jaccard_similarity, levenshtein_ratio, SimilarityScore};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectError {
    #[error("unknown strategy {0:?}; valid strategies: lev_sim, lev_dis, jac_sim, jac_dis, edi_least, edi_most, random")]
    UnknownStrategy(String),
    #[error("the random strategy has no ranking key")]
    RandomHasNoKey,
    #[error("source group {0:?} has no targets")]
    EmptyGroup(String),
    #[error("ablation size n={n} must be between 1 and k_min={k_min}")]
    AblationSize { n: usize, k_min: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    LevSim,
    LevDis,
    JacSim,
    JacDis,
    EdiLeast,
    EdiMost,
    Random,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        StrategyKind::LevSim,
        StrategyKind::LevDis,
        StrategyKind::JacSim,
        StrategyKind::JacDis,
        StrategyKind::EdiLeast,
        StrategyKind::EdiMost,
        StrategyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::LevSim => "lev_sim",
            StrategyKind::LevDis => "lev_dis",
            StrategyKind::JacSim => "jac_sim",
            StrategyKind::JacDis => "jac_dis",
            StrategyKind::EdiLeast => "edi_least",
            StrategyKind::EdiMost => "edi_most",
            StrategyKind::Random => "random",
        }
    }

    pub fn is_deterministic(self) -> bool {
        self != StrategyKind::Random
    }

    /// Whether the strategy keeps the target with the largest key.
    fn prefers_max(self) -> bool {
        matches!(
            self,
            StrategyKind::LevSim | StrategyKind::JacSim | StrategyKind::EdiMost
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = SelectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SelectError::UnknownStrategy(s.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub strategy: StrategyKind,
    /// Only consulted by [`StrategyKind::Random`].
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(strategy: StrategyKind, seed: u64) -> Self {
        SelectionConfig { strategy, seed }
    }
}

/// Ranking key of one target; keys of the same strategy share a variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RankKey {
    Similarity(SimilarityScore),
    EditCount(usize),
}

pub fn score_target(
    strategy: StrategyKind,
    source: &Sentence,
    target: &Sentence,
) -> Result<RankKey, SelectError> {
    let (s, t) = (source.tokens(), target.tokens());
    Ok(match strategy {
        StrategyKind::LevSim | StrategyKind::LevDis => RankKey::Similarity(levenshtein_ratio(s, t)),
        StrategyKind::JacSim | StrategyKind::JacDis => {
            RankKey::Similarity(jaccard_similarity(s, t))
        }
        StrategyKind::EdiLeast | StrategyKind::EdiMost => {
            RankKey::EditCount(extract_edits(source, target).edits.len())
        }
        StrategyKind::Random => return Err(SelectError::RandomHasNoKey),
    })
}

/// A ChaCha stream keyed by `(purpose, seed, source text)`, so a group's
/// draws do not depend on which other groups exist or on processing order.
pub(crate) fn group_rng(purpose: &str, seed: u64, source: &Sentence) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(purpose.as_bytes());
    hasher.update([0u8]);
    hasher.update(seed.to_le_bytes());
    hasher.update(source.as_str().as_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// Index of the selected target within `group.targets`.
pub fn select_index(group: &SourceGroup, config: SelectionConfig) -> Result<usize, SelectError> {
    let n = group.targets.len();
    if n == 0 {
        return Err(SelectError::EmptyGroup(group.source.to_string()));
    }
    if n == 1 {
        return Ok(0);
    }
    if config.strategy == StrategyKind::Random {
        return Ok(group_rng("select", config.seed, &group.source).gen_range(0..n));
    }
    let mut best = 0;
    let mut best_key = score_target(config.strategy, &group.source, &group.targets[0])?;
    for (i, target) in group.targets.iter().enumerate().skip(1) {
        let key = score_target(config.strategy, &group.source, target)?;
        let better = if config.strategy.prefers_max() {
            key > best_key
        } else {
            key < best_key
        };
        if better {
            best = i;
            best_key = key;
        }
    }
    Ok(best)
}

pub fn select(group: &SourceGroup, config: SelectionConfig) -> Result<Sample, SelectError> {
    let i = select_index(group, config)?;
    Ok(Sample::new(group.source.clone(), group.targets[i].clone()))
}

/// One sample per group, in group order. Runs on the current rayon pool.
pub fn clean_corpus(
    groups: &[SourceGroup],
    config: SelectionConfig,
) -> Result<Vec<Sample>, SelectError> {
    groups.par_iter().map(|g| select(g, config)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AblationDataset {
    pub n: usize,
    pub samples: Vec<Sample>,
}

/// Builds n-target datasets over the groups that have at least `k_min`
/// targets.
///
/// Each kept group's targets are shuffled once with its own seeded stream;
/// dataset `n` takes the first `n` shuffled targets of every kept group, so
/// smaller datasets are per-group prefixes of larger ones. With
/// `max_groups`, the kept groups are first sub-sampled (order preserved).
/// Datasets are returned in ascending `n`.
pub fn build_ablation(
    groups: &[SourceGroup],
    k_min: usize,
    n_values: &[usize],
    seed: u64,
    max_groups: Option<usize>,
) -> Result<Vec<AblationDataset>, SelectError> {
    let sizes: BTreeSet<usize> = n_values.iter().copied().collect();
    if let Some(&n) = sizes.iter().find(|&&n| n == 0 || n > k_min) {
        return Err(SelectError::AblationSize { n, k_min });
    }

    let mut kept: Vec<&SourceGroup> = groups.iter().filter(|g| g.targets.len() >= k_min).collect();
    if let Some(limit) = max_groups.filter(|&m| m < kept.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, kept.len(), limit).into_vec();
        picked.sort_unstable();
        kept = picked.into_iter().map(|i| kept[i]).collect();
    }

    let shuffled: Vec<Vec<&Sentence>> = kept
        .par_iter()
        .map(|g| {
            let mut targets: Vec<&Sentence> = g.targets.iter().collect();
            targets.shuffle(&mut group_rng("ablate", seed, &g.source));
            targets
        })
        .collect();

    Ok(sizes
        .into_iter()
        .map(|n| AblationDataset {
            n,
            samples: kept
                .iter()
                .zip(&shuffled)
                .flat_map(|(g, ts)| {
                    ts[..n]
                        .iter()
                        .map(|t| Sample::new(g.source.clone(), (*t).clone()))
                })
                .collect(),
        })
        .collect())
}
