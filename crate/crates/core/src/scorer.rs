//! Multi-reference edit-level precision, recall and F0.5.
//!
//! Hypothesis edits are extracted against the source with the same aligner
//! used for gold data and matched exactly on `(start, end, replacement)`.
//! Each sentence is scored against its most favorable annotator; counts are
//! micro-averaged over the corpus.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Sentence;
use crate::edits::{extract_edits, Annotation, EditError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("entry {index}: no gold annotations")]
    NoGold { index: usize },
    #[error("entry {index}: invalid gold annotation: {source}")]
    InvalidGold { index: usize, source: EditError },
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
}

/// `(1 + b^2) p r / (b^2 p + r)`, or 0 when the denominator vanishes.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SentenceScore {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub annotator: usize,
}

fn counts(hyp: &HashSet<(usize, usize, &str)>, gold: &Annotation) -> (usize, usize, usize) {
    let tp = gold.edits.iter().filter(|e| hyp.contains(&e.key())).count();
    (tp, hyp.len() - tp, gold.edits.len() - tp)
}

/// Scores one hypothesis against every annotator and keeps the best by
/// (max tp, min fp + fn, min annotator id).
pub fn evaluate_sentence(
    source: &Sentence,
    hypothesis: &Sentence,
    gold: &[Annotation],
) -> Result<SentenceScore, ScoreError> {
    evaluate_entry(0, source, hypothesis, gold)
}

fn evaluate_entry(
    index: usize,
    source: &Sentence,
    hypothesis: &Sentence,
    gold: &[Annotation],
) -> Result<SentenceScore, ScoreError> {
    if gold.is_empty() {
        return Err(ScoreError::NoGold { index });
    }
    let hyp_ann = extract_edits(source, hypothesis);
    let hyp: HashSet<(usize, usize, &str)> = hyp_ann.edits.iter().map(|e| e.key()).collect();
    let mut best: Option<SentenceScore> = None;
    for ann in gold {
        ann.validate(source.len())
            .map_err(|source| ScoreError::InvalidGold { index, source })?;
        let (tp, fp, fn_) = counts(&hyp, ann);
        let cand = SentenceScore {
            tp,
            fp,
            fn_,
            annotator: ann.annotator,
        };
        let better = match best {
            None => true,
            Some(b) => {
                (
                    cand.tp,
                    std::cmp::Reverse(cand.fp + cand.fn_),
                    std::cmp::Reverse(cand.annotator),
                ) > (
                    b.tp,
                    std::cmp::Reverse(b.fp + b.fn_),
                    std::cmp::Reverse(b.annotator),
                )
            }
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("gold is non-empty"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScoreReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_half: f64,
}

impl ScoreReport {
    /// Builds a report from micro-averaged counts. An empty denominator
    /// gives a precision (or recall) of 1.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            1.0
        };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            1.0
        };
        ScoreReport {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_half: f_beta(precision, recall, 0.5),
        }
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TP    FP    FN    Prec    Rec     F0.5")?;
        writeln!(
            f,
            "{:<6}{:<6}{:<6}{:<8.4}{:<8.4}{:.4}",
            self.tp, self.fp, self.fn_, self.precision, self.recall, self.f_half
        )
    }
}

/// One sentence to score: the source, a system hypothesis, and all gold
/// annotations for the source.
#[derive(Clone, Debug)]
pub struct ScoreEntry {
    pub source: Sentence,
    pub hypothesis: Sentence,
    pub gold: Vec<Annotation>,
}

pub fn evaluate_corpus(entries: &[ScoreEntry]) -> Result<ScoreReport, ScoreError> {
    if entries.is_empty() {
        return Err(ScoreError::EmptyCorpus);
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (index, e) in entries.iter().enumerate() {
        let s = evaluate_entry(index, &e.source, &e.hypothesis, &e.gold)?;
        tp += s.tp;
        fp += s.fp;
        fn_ += s.fn_;
    }
    Ok(ScoreReport::from_counts(tp, fp, fn_))
}
