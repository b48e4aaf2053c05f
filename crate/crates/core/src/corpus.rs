//! Parallel-corpus ingestion: TSV parsing, text normalization and grouping
//! of samples by their (exact) source sentence.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A normalized sentence and its character tokens.
///
/// `raw` is always exactly the concatenation of `tokens`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Sentence {
    raw: String,
    tokens: Vec<char>,
}

impl Sentence {
    /// Builds a sentence from tokens without normalizing them.
    ///
    /// Tab, CR and LF tokens are dropped so the no-control-character
    /// invariant holds for sentences produced by edit application.
    pub fn from_tokens<I: IntoIterator<Item = char>>(tokens: I) -> Self {
        let tokens: Vec<char> = tokens.into_iter().filter(|c| !is_stripped(*c)).collect();
        let raw = tokens.iter().collect();
        Sentence { raw, tokens }
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[char] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl From<&str> for Sentence {
    fn from(raw: &str) -> Self {
        normalize(raw)
    }
}

fn is_stripped(c: char) -> bool {
    matches!(c, '\t' | '\r' | '\n')
}

/// NFC-normalizes `raw`, removes tab/CR/LF characters and trims surrounding
/// whitespace. No other folding is applied.
pub fn normalize(raw: &str) -> Sentence {
    let composed: String = raw.nfc().filter(|c| !is_stripped(*c)).collect();
    let trimmed = composed.trim();
    Sentence {
        raw: trimmed.to_owned(),
        tokens: trimmed.chars().collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sample {
    pub source: Sentence,
    pub target: Sentence,
}

impl Sample {
    pub fn new(source: Sentence, target: Sentence) -> Self {
        Sample { source, target }
    }

    /// True when the target differs from the source.
    pub fn is_erroneous(&self) -> bool {
        self.source.tokens != self.target.tokens
    }
}

/// One unique source sentence and its distinct targets in first-appearance order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceGroup {
    pub source: Sentence,
    pub targets: Vec<Sentence>,
}

impl SourceGroup {
    pub fn new(source: Sentence, targets: Vec<Sentence>) -> Self {
        SourceGroup { source, targets }
    }

    /// Flattens the group back into `(source, target)` samples.
    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        self.targets
            .iter()
            .map(move |t| Sample::new(self.source.clone(), t.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Layout {
    /// `source<TAB>target`
    #[default]
    PairPerLine,
    /// `source<TAB>t1<TAB>t2...`
    MultiTargetPerLine,
}

/// Parses a UTF-8 TSV stream into samples, preserving line order.
///
/// Blank lines are skipped. LF and CRLF endings are both accepted.
pub fn parse_parallel<R: BufRead>(
    mut reader: R,
    layout: Layout,
) -> Result<Vec<Sample>, CorpusError> {
    let mut samples = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
        if buf.is_empty() {
            continue;
        }
        let line = std::str::from_utf8(&buf).map_err(|e| CorpusError::Malformed {
            line: line_no,
            reason: format!("invalid UTF-8: {e}"),
        })?;
        parse_line(line, line_no, layout, &mut samples)?;
    }
    Ok(samples)
}

fn parse_line(
    line: &str,
    line_no: usize,
    layout: Layout,
    out: &mut Vec<Sample>,
) -> Result<(), CorpusError> {
    let malformed = |reason: String| CorpusError::Malformed {
        line: line_no,
        reason,
    };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 2 {
        return Err(malformed("expected at least 2 tab-separated fields".into()));
    }
    if layout == Layout::PairPerLine && fields.len() > 2 {
        return Err(malformed(format!(
            "expected 2 tab-separated fields, found {} (multi-target lines need --multi-target-lines)",
            fields.len()
        )));
    }
    let mut sentences = Vec::with_capacity(fields.len());
    for (i, field) in fields.iter().enumerate() {
        let sentence = normalize(field);
        if sentence.is_empty() {
            return Err(malformed(format!("field {} is empty", i + 1)));
        }
        sentences.push(sentence);
    }
    let mut iter = sentences.into_iter();
    let source = iter.next().expect("at least two fields");
    for target in iter {
        out.push(Sample::new(source.clone(), target));
    }
    Ok(())
}

/// Writes samples as `source<TAB>target` lines with LF endings.
pub fn write_parallel<'a, W, I>(mut writer: W, samples: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Sample>,
{
    for sample in samples {
        writeln!(writer, "{}\t{}", sample.source, sample.target)?;
    }
    Ok(())
}

/// Groups samples by exact source token sequence.
///
/// Groups appear in first-appearance order of their source; within a group
/// duplicate targets collapse and the remaining ones keep input order.
pub fn group_by_source<'a, I>(samples: I) -> Vec<SourceGroup>
where
    I: IntoIterator<Item = &'a Sample>,
{
    let mut index: HashMap<&'a Sentence, usize> = HashMap::new();
    let mut seen: Vec<HashSet<&'a Sentence>> = Vec::new();
    let mut groups: Vec<SourceGroup> = Vec::new();
    for sample in samples {
        let gi = *index.entry(&sample.source).or_insert_with(|| {
            groups.push(SourceGroup::new(sample.source.clone(), Vec::new()));
            seen.push(HashSet::new());
            groups.len() - 1
        });
        if seen[gi].insert(&sample.target) {
            groups[gi].targets.push(sample.target.clone());
        }
    }
    groups
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterOptions {
    /// Remove groups whose targets all equal the source.
    pub drop_correct: bool,
    /// Remove targets identical to their source.
    pub drop_identity_targets: bool,
}

impl FilterOptions {
    pub fn both() -> Self {
        FilterOptions {
            drop_correct: true,
            drop_identity_targets: true,
        }
    }
}

/// Applies the correct-sentence filters. A group left without targets is
/// always removed, so the output never contains an empty group.
pub fn filter_groups(groups: Vec<SourceGroup>, opts: FilterOptions) -> Vec<SourceGroup> {
    groups
        .into_iter()
        .filter_map(|mut group| {
            let fully_correct = group.targets.iter().all(|t| *t == group.source);
            if opts.drop_correct && fully_correct {
                return None;
            }
            if opts.drop_identity_targets {
                let source = &group.source;
                group.targets.retain(|t| t != source);
            }
            (!group.targets.is_empty()).then_some(group)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Sentence {
        normalize(text)
    }

    fn pair(a: &str, b: &str) -> Sample {
        Sample::new(s(a), s(b))
    }

    #[test]
    fn parse_single_pair() {
        let got = parse_parallel("a\tb\n".as_bytes(), Layout::PairPerLine).unwrap();
        assert_eq!(got, vec![pair("a", "b")]);
    }

    #[test]
    fn parse_multi_target_fans_out() {
        let got = parse_parallel("a\tb\tc\n".as_bytes(), Layout::MultiTargetPerLine).unwrap();
        assert_eq!(got, vec![pair("a", "b"), pair("a", "c")]);
    }

    #[test]
    fn parse_missing_target_reports_line() {
        match parse_parallel("a\n".as_bytes(), Layout::PairPerLine) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let input = "a\tb\n\nc\t\n";
        match parse_parallel(input.as_bytes(), Layout::PairPerLine) {
            Err(CorpusError::Malformed { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("empty"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad_utf8: &[u8] = b"a\tb\n\xff\tb\n";
        assert!(matches!(
            parse_parallel(bad_utf8, Layout::PairPerLine),
            Err(CorpusError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_parallel("a\tb\tc\n".as_bytes(), Layout::PairPerLine),
            Err(CorpusError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn parse_empty_input_and_crlf() {
        assert!(parse_parallel("".as_bytes(), Layout::PairPerLine)
            .unwrap()
            .is_empty());
        let got = parse_parallel("a\tb\r\nc\td".as_bytes(), Layout::PairPerLine).unwrap();
        assert_eq!(got, vec![pair("a", "b"), pair("c", "d")]);
    }

    #[test]
    fn normalize_trims_and_splits_chars() {
        let n = normalize(" ab ");
        assert_eq!(n.as_str(), "ab");
        assert_eq!(n.tokens(), &['a', 'b']);
        assert_eq!(normalize("我能").tokens(), &['我', '能']);
        assert_eq!(normalize("a\r\nb").as_str(), "ab");
    }

    #[test]
    fn normalize_composes() {
        let n = normalize("e\u{0301}");
        assert_eq!(n.tokens(), &['\u{00e9}']);
    }

    #[test]
    fn grouping_collapses_duplicates() {
        let samples = vec![pair("s", "t1"), pair("s", "t2"), pair("s", "t1")];
        let groups = group_by_source(&samples);
        assert_eq!(
            groups,
            vec![SourceGroup::new(s("s"), vec![s("t1"), s("t2")])]
        );

        let samples = vec![pair("s1", "t"), pair("s2", "t")];
        let groups = group_by_source(&samples);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].source, s("s1"));
        assert_eq!(groups[1].source, s("s2"));
    }

    #[test]
    fn grouping_six_line_fixture() {
        let input = "x\tx1\ny\ty1\nx\tx2\ny\ty2\nx\tx3\ny\ty3\n";
        let samples = parse_parallel(input.as_bytes(), Layout::PairPerLine).unwrap();
        let groups = group_by_source(&samples);
        assert_eq!(
            groups,
            vec![
                SourceGroup::new(s("x"), vec![s("x1"), s("x2"), s("x3")]),
                SourceGroup::new(s("y"), vec![s("y1"), s("y2"), s("y3")]),
            ]
        );
    }

    #[test]
    fn filtering() {
        let g =
            |src: &str, ts: &[&str]| SourceGroup::new(s(src), ts.iter().map(|t| s(t)).collect());
        assert!(filter_groups(vec![g("s", &["s"])], FilterOptions::both()).is_empty());
        assert_eq!(
            filter_groups(vec![g("s", &["s", "t"])], FilterOptions::both()),
            vec![g("s", &["t"])]
        );
        // drop_correct alone keeps identity targets of erroneous groups
        let only_correct = FilterOptions {
            drop_correct: true,
            drop_identity_targets: false,
        };
        assert_eq!(
            filter_groups(vec![g("s", &["s"]), g("s", &["s", "t"])], only_correct),
            vec![g("s", &["s", "t"])]
        );
        assert_eq!(
            filter_groups(vec![g("s", &["s"])], FilterOptions::default()),
            vec![g("s", &["s"])]
        );
    }

    #[test]
    fn filtering_ten_groups_three_correct() {
        let mut groups = Vec::new();
        for i in 0..10 {
            let src = format!("src{i}");
            let tgt = if i % 3 == 0 {
                src.clone()
            } else {
                format!("tgt{i}")
            };
            groups.push(SourceGroup::new(s(&src), vec![s(&tgt)]));
        }
        // i = 0, 3, 6, 9 are correct; make 9 erroneous to get exactly three
        groups[9].targets = vec![s("fixed9")];
        assert_eq!(filter_groups(groups, FilterOptions::both()).len(), 7);
    }

    #[test]
    fn serialize_round_trip() {
        let samples = vec![pair("a b", "c"), pair("我能", "我能。")];
        let mut out = Vec::new();
        write_parallel(&mut out, &samples).unwrap();
        assert_eq!(
            String::from_utf8(out.clone()).unwrap(),
            "a b\tc\n我能\t我能。\n"
        );
        let back = parse_parallel(out.as_slice(), Layout::PairPerLine).unwrap();
        assert_eq!(back, samples);
    }
}
