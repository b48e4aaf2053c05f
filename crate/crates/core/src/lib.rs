//! Corpus curation for multi-reference grammatical error correction data.
//!
//! The crate turns a parallel corpus (one source sentence, possibly many
//! corrected targets) into a single-target training set, and carries the
//! machinery that selection relies on:
//!
//! - [`corpus`]: TSV ingestion, normalization, grouping by unique source.
//! - [`textmetrics`]: Levenshtein distance/ratio and Jaccard similarity.
//! - [`edits`]: character alignment, merged edit extraction, M² I/O.
//! - [`select`]: the seven one-target selection strategies and ablation sets.
//! - [`stats`]: corpus-level and per-target-count statistics.
//! - [`scorer`]: multi-reference edit-level P/R/F0.5.
//!
//! Everything operates on character tokens (Unicode scalar values after NFC).

pub mod cli;
pub mod corpus;
pub mod edits;
pub mod scorer;
pub mod select;
pub mod stats;
pub mod textmetrics;

pub use corpus::{
    filter_groups, group_by_source, normalize, parse_parallel, write_parallel, CorpusError,
    FilterOptions, Layout, Sample, Sentence, SourceGroup,
};
pub use edits::{
    align, apply_edits, extract_edits, parse_m2, parse_m2_file, to_m2, to_m2_file, AlignStep,
    Annotation, Edit, EditError, EditKind, M2Entry,
};
pub use scorer::{
    evaluate_corpus, evaluate_sentence, f_beta, ScoreEntry, ScoreError, ScoreReport, SentenceScore,
};
pub use select::{
    build_ablation, clean_corpus, score_target, select, AblationDataset, RankKey, SelectError,
    SelectionConfig, StrategyKind,
};
pub use stats::{bucket_stats, overall_stats, Bucket, CorpusStats, TargetCountBucketStats};
pub use textmetrics::{
    jaccard_similarity, levenshtein_distance, levenshtein_ratio, SimilarityScore,
};
