//! Literal similarity measures over character tokens.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

/// An exact similarity value `numerator / denominator` in `[0, 1]`.
///
/// Comparisons are exact (cross-multiplication), so equal ratios such as
/// 7/8 and 14/16 compare equal and ties are never an artifact of rounding.
#[derive(Clone, Copy, Debug)]
pub struct SimilarityScore {
    numerator: u64,
    denominator: u64,
}

impl SimilarityScore {
    pub const ONE: SimilarityScore = SimilarityScore {
        numerator: 1,
        denominator: 1,
    };

    /// Panics unless `0 <= numerator <= denominator` and `denominator > 0`.
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "zero denominator");
        assert!(numerator <= denominator, "similarity above 1");
        SimilarityScore {
            numerator,
            denominator,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl PartialEq for SimilarityScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SimilarityScore {}

impl PartialOrd for SimilarityScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimilarityScore {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.numerator as u128 * other.denominator as u128;
        let rhs = other.numerator as u128 * self.denominator as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for SimilarityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Unit-cost Levenshtein distance (insert, delete, substitute).
///
/// Two rows of the DP table are kept, sized by the shorter input.
pub fn levenshtein_distance(a: &[char], b: &[char]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0; short.len() + 1];
    for (i, lc) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let sub = prev[j] + usize::from(lc != sc);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// `(|a| + |b| - dist(a, b)) / (|a| + |b|)`; two empty inputs score 1.
pub fn levenshtein_ratio(a: &[char], b: &[char]) -> SimilarityScore {
    let sum = (a.len() + b.len()) as u64;
    if sum == 0 {
        return SimilarityScore::ONE;
    }
    let dist = levenshtein_distance(a, b) as u64;
    SimilarityScore::new(sum - dist, sum)
}

/// Set-based Jaccard index over the characters of `a` and `b`; two empty
/// inputs score 1.
pub fn jaccard_similarity(a: &[char], b: &[char]) -> SimilarityScore {
    let sa: HashSet<char> = a.iter().copied().collect();
    let sb: HashSet<char> = b.iter().copied().collect();
    let inter = sa.intersection(&sb).count() as u64;
    let union = (sa.len() + sb.len()) as u64 - inter;
    if union == 0 {
        return SimilarityScore::ONE;
    }
    SimilarityScore::new(inter, union)
}
