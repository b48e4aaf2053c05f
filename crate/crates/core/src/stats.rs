//! Corpus statistics: an overall table and a breakdown by number of targets
//! per unique source.
//!
//! Lengths are in character tokens. Floating-point sums use compensated
//! (Neumaier) summation in input order, so reports are reproducible.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::corpus::{Sample, SourceGroup};
use crate::edits::extract_edits;
use crate::textmetrics::levenshtein_ratio;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut acc = CompensatedSum::default();
    values.iter().for_each(|v| acc.add(*v));
    acc.total() / values.len() as f64
}

/// Population variance, two-pass.
fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    let mut acc = CompensatedSum::default();
    values.iter().for_each(|v| acc.add((v - m) * (v - m)));
    acc.total() / values.len() as f64
}

fn ratio(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStats {
    pub sample_count: usize,
    pub erroneous_count: usize,
    pub erroneous_proportion: f64,
    pub unique_source_count: usize,
    pub unique_source_proportion: f64,
    pub mean_source_length: f64,
    pub mean_lev_ratio: f64,
}

pub fn overall_stats(samples: &[Sample]) -> CorpusStats {
    let n = samples.len();
    let erroneous = samples.iter().filter(|s| s.is_erroneous()).count();
    let unique = samples
        .iter()
        .map(|s| &s.source)
        .collect::<HashSet<_>>()
        .len();
    let lengths: Vec<f64> = samples.iter().map(|s| s.source.len() as f64).collect();
    let ratios: Vec<f64> = samples
        .iter()
        .map(|s| levenshtein_ratio(s.source.tokens(), s.target.tokens()).value())
        .collect();
    CorpusStats {
        sample_count: n,
        erroneous_count: erroneous,
        erroneous_proportion: ratio(erroneous, n),
        unique_source_count: unique,
        unique_source_proportion: ratio(unique, n),
        mean_source_length: mean(&lengths),
        mean_lev_ratio: mean(&ratios),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bucket {
    /// Exactly this many targets (1..=7).
    Exact(usize),
    AtLeast8,
    Total,
}

impl Bucket {
    pub const ROWS: [Bucket; 9] = [
        Bucket::Exact(1),
        Bucket::Exact(2),
        Bucket::Exact(3),
        Bucket::Exact(4),
        Bucket::Exact(5),
        Bucket::Exact(6),
        Bucket::Exact(7),
        Bucket::AtLeast8,
        Bucket::Total,
    ];

    pub fn for_count(targets: usize) -> Bucket {
        if targets >= 8 {
            Bucket::AtLeast8
        } else {
            Bucket::Exact(targets)
        }
    }

    pub fn label(&self) -> String {
        match self {
            Bucket::Exact(n) => n.to_string(),
            Bucket::AtLeast8 => ">=8".into(),
            Bucket::Total => "total".into(),
        }
    }

    fn contains(&self, targets: usize) -> bool {
        match self {
            Bucket::Total => true,
            b => *b == Bucket::for_count(targets),
        }
    }
}

impl Serialize for Bucket {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetCountBucketStats {
    pub bucket: Bucket,
    pub source_count: usize,
    pub source_proportion: f64,
    pub mean_source_length: f64,
    pub mean_lev_ratio: f64,
    pub variance_lev_ratio: f64,
    pub mean_edits_per_target: f64,
}

/// Per-bucket statistics for groups that have already had grammatical
/// sources removed. Always returns the nine rows of [`Bucket::ROWS`]; empty
/// buckets are all zeros.
pub fn bucket_stats(groups: &[SourceGroup]) -> Vec<TargetCountBucketStats> {
    // (lev ratio, edit count) per pair, computed once
    let per_group: Vec<Vec<(f64, f64)>> = groups
        .iter()
        .map(|g| {
            g.targets
                .iter()
                .map(|t| {
                    let r = levenshtein_ratio(g.source.tokens(), t.tokens()).value();
                    (r, extract_edits(&g.source, t).edits.len() as f64)
                })
                .collect()
        })
        .collect();

    Bucket::ROWS
        .iter()
        .map(|bucket| {
            let members: Vec<usize> = (0..groups.len())
                .filter(|&i| bucket.contains(groups[i].targets.len()))
                .collect();
            let lengths: Vec<f64> = members
                .iter()
                .map(|&i| groups[i].source.len() as f64)
                .collect();
            let ratios: Vec<f64> = members
                .iter()
                .flat_map(|&i| per_group[i].iter().map(|p| p.0))
                .collect();
            let edits: Vec<f64> = members
                .iter()
                .flat_map(|&i| per_group[i].iter().map(|p| p.1))
                .collect();
            TargetCountBucketStats {
                bucket: *bucket,
                source_count: members.len(),
                source_proportion: ratio(members.len(), groups.len()),
                mean_source_length: mean(&lengths),
                mean_lev_ratio: mean(&ratios),
                variance_lev_ratio: variance(&ratios),
                mean_edits_per_target: mean(&edits),
            }
        })
        .collect()
}

/// Left-aligned columns separated by two spaces; no trailing whitespace.
fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header_row: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header_row).chain(rows) {
        let mut line = String::new();
        for (k, (cell, w)) in row.iter().zip(&widths).enumerate() {
            if k > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<w$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn count_with_percent(count: usize, proportion: f64) -> String {
    format!("{count} ({:.2}%)", proportion * 100.0)
}

pub fn render_overall(stats: &CorpusStats) -> String {
    render_table(
        &[
            "samples",
            "erroneous",
            "unique_sources",
            "avg_length",
            "lev_ratio",
        ],
        &[vec![
            stats.sample_count.to_string(),
            count_with_percent(stats.erroneous_count, stats.erroneous_proportion),
            count_with_percent(stats.unique_source_count, stats.unique_source_proportion),
            format!("{:.2}", stats.mean_source_length),
            format!("{:.4}", stats.mean_lev_ratio),
        ]],
    )
}

pub fn render_buckets(rows: &[TargetCountBucketStats]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.bucket.label(),
                count_with_percent(r.source_count, r.source_proportion),
                format!("{:.2}", r.mean_source_length),
                format!("{:.4}", r.mean_lev_ratio),
                format!("{:.6}", r.variance_lev_ratio),
                format!("{:.2}", r.mean_edits_per_target),
            ]
        })
        .collect();
    render_table(
        &[
            "targets",
            "sources",
            "avg_length",
            "lev_ratio",
            "lev_var",
            "edits_per_target",
        ],
        &body,
    )
}
