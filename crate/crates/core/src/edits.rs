//! Character-level edit extraction and the M² annotation format.
//!
//! A source/target pair is aligned with unit-cost Levenshtein operations;
//! every maximal run of non-match steps becomes one [`Edit`]. Edits are
//! typed by span shape only: `M` (insertion), `U` (deletion), `R`
//! (replacement).
//!
//! M² blocks are character-tokenized: the `S` line and every replacement
//! field are written as space-separated characters, so a token that is
//! itself a space (or a `|`) still decodes unambiguously.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::Sentence;

/// Pairs longer than this (in tokens) are still aligned, but callers may
/// want to flag them: backtrace memory is `O(|s| * |t|)`.
pub const LENGTH_CAP: usize = 512;

pub fn exceeds_length_cap(source: &Sentence, target: &Sentence) -> bool {
    source.len() > LENGTH_CAP || target.len() > LENGTH_CAP
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EditError {
    #[error("edit {start}..{end} is out of bounds for a source of {len} tokens")]
    OutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("edit {start}..{end} overlaps the previous edit")]
    Overlap { start: usize, end: usize },
    #[error("edit {start}..{end} is empty (no span and no replacement)")]
    Empty { start: usize, end: usize },
    #[error("edit {start}..{end} has kind {kind} but its shape implies {expected}")]
    KindMismatch {
        start: usize,
        end: usize,
        kind: EditKind,
        expected: EditKind,
    },
    #[error("replacement contains a tab or newline")]
    ControlChar,
    #[error("annotator {0} appears more than once")]
    DuplicateAnnotator(usize),
    #[error("M2 line {line}: {reason}")]
    M2 { line: usize, reason: String },
}

impl EditError {
    fn at_line(self, line: usize) -> EditError {
        match self {
            EditError::M2 { .. } => self,
            other => EditError::M2 {
                line,
                reason: other.to_string(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlignStep {
    Match,
    Substitute,
    Delete,
    Insert,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EditKind {
    /// Missing: pure insertion.
    M,
    /// Unnecessary: pure deletion.
    U,
    /// Replacement.
    R,
}

impl EditKind {
    fn for_shape(start: usize, end: usize, replacement: &str) -> Option<EditKind> {
        match (start == end, replacement.is_empty()) {
            (true, true) => None,
            (true, false) => Some(EditKind::M),
            (false, true) => Some(EditKind::U),
            (false, false) => Some(EditKind::R),
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EditKind::M => "M",
            EditKind::U => "U",
            EditKind::R => "R",
        };
        f.write_str(s)
    }
}

impl FromStr for EditKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "M" => Ok(EditKind::M),
            "U" => Ok(EditKind::U),
            "R" => Ok(EditKind::R),
            other => Err(format!("unknown edit kind {other:?}")),
        }
    }
}

/// A half-open span `start..end` over source tokens and its replacement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edit {
    start: usize,
    end: usize,
    replacement: String,
    kind: EditKind,
}

impl Edit {
    /// Builds an edit, deriving its kind from the span shape.
    pub fn new(
        start: usize,
        end: usize,
        replacement: impl Into<String>,
    ) -> Result<Edit, EditError> {
        let replacement = replacement.into();
        if end < start {
            return Err(EditError::OutOfBounds {
                start,
                end,
                len: end,
            });
        }
        if replacement.contains(['\t', '\n', '\r']) {
            return Err(EditError::ControlChar);
        }
        let kind =
            EditKind::for_shape(start, end, &replacement).ok_or(EditError::Empty { start, end })?;
        Ok(Edit {
            start,
            end,
            replacement,
            kind,
        })
    }

    /// Like [`Edit::new`] but rejects a `kind` that disagrees with the shape.
    pub fn with_kind(
        start: usize,
        end: usize,
        replacement: impl Into<String>,
        kind: EditKind,
    ) -> Result<Edit, EditError> {
        let edit = Edit::new(start, end, replacement)?;
        if edit.kind != kind {
            return Err(EditError::KindMismatch {
                start,
                end,
                kind,
                expected: edit.kind,
            });
        }
        Ok(edit)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn replacement(&self) -> &str {
        &self.replacement
    }

    pub fn kind(&self) -> EditKind {
        self.kind
    }

    /// The `(start, end, replacement)` triple used for scoring.
    pub fn key(&self) -> (usize, usize, &str) {
        (self.start, self.end, &self.replacement)
    }
}

/// One annotator's edits for a sentence, ordered by `(start, end)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Annotation {
    pub annotator: usize,
    pub edits: Vec<Edit>,
}

impl Annotation {
    pub fn new(annotator: usize, edits: Vec<Edit>) -> Self {
        Annotation { annotator, edits }
    }

    pub fn is_noop(&self) -> bool {
        self.edits.is_empty()
    }

    /// Checks bounds against a source of `len` tokens, ordering, and
    /// non-overlap (two insertions may not share a position).
    pub fn validate(&self, len: usize) -> Result<(), EditError> {
        let mut prev: Option<&Edit> = None;
        for e in &self.edits {
            if e.end > len {
                return Err(EditError::OutOfBounds {
                    start: e.start,
                    end: e.end,
                    len,
                });
            }
            if let Some(p) = prev {
                let same_insertion_point =
                    p.start == p.end && e.start == e.end && p.start == e.start;
                if p.end > e.start || same_insertion_point || (p.start, p.end) > (e.start, e.end) {
                    return Err(EditError::Overlap {
                        start: e.start,
                        end: e.end,
                    });
                }
            }
            prev = Some(e);
        }
        Ok(())
    }
}

/// Minimum-cost alignment of `source` onto `target`.
///
/// The backtrace starts at the end of both sequences and, among steps that
/// stay on an optimal path, prefers match, then substitute, then delete,
/// then insert.
pub fn align(source: &[char], target: &[char]) -> Vec<AlignStep> {
    let n = source.len();
    let m = target.len();
    let width = m + 1;
    let mut dp = vec![0u32; (n + 1) * width];
    for (j, cell) in dp.iter_mut().take(width).enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n {
        dp[i * width] = i as u32;
        for j in 1..=m {
            let sub = dp[(i - 1) * width + j - 1] + u32::from(source[i - 1] != target[j - 1]);
            let del = dp[(i - 1) * width + j] + 1;
            let ins = dp[i * width + j - 1] + 1;
            dp[i * width + j] = sub.min(del).min(ins);
        }
    }

    let mut path = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 {
            let diag = dp[(i - 1) * width + j - 1];
            if source[i - 1] == target[j - 1] && diag == here {
                path.push(AlignStep::Match);
                i -= 1;
                j -= 1;
                continue;
            }
            if source[i - 1] != target[j - 1] && diag + 1 == here {
                path.push(AlignStep::Substitute);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[(i - 1) * width + j] + 1 == here {
            path.push(AlignStep::Delete);
            i -= 1;
        } else {
            path.push(AlignStep::Insert);
            j -= 1;
        }
    }
    path.reverse();
    path
}

/// Number of non-match steps in an alignment path.
pub fn alignment_cost(path: &[AlignStep]) -> usize {
    path.iter().filter(|s| **s != AlignStep::Match).count()
}

/// Extracts merged edits turning `source` into `target` (annotator 0).
pub fn extract_edits(source: &Sentence, target: &Sentence) -> Annotation {
    let path = align(source.tokens(), target.tokens());
    let tgt = target.tokens();
    let mut edits = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let mut run: Option<(usize, usize)> = None;

    let mut close = |run: &mut Option<(usize, usize)>, i: usize, j: usize| {
        if let Some((si, sj)) = run.take() {
            let replacement: String = tgt[sj..j].iter().collect();
            edits.push(
                Edit::new(si, i, replacement).expect("non-match run yields a non-empty edit"),
            );
        }
    };

    for step in path {
        match step {
            AlignStep::Match => {
                close(&mut run, i, j);
                i += 1;
                j += 1;
            }
            AlignStep::Substitute | AlignStep::Delete | AlignStep::Insert => {
                run.get_or_insert((i, j));
                if step != AlignStep::Insert {
                    i += 1;
                }
                if step != AlignStep::Delete {
                    j += 1;
                }
            }
        }
    }
    close(&mut run, i, j);
    Annotation::new(0, edits)
}

/// Applies an annotation to `source`, right to left.
pub fn apply_edits(source: &Sentence, annotation: &Annotation) -> Result<Sentence, EditError> {
    annotation.validate(source.len())?;
    let mut tokens = source.tokens().to_vec();
    for e in annotation.edits.iter().rev() {
        tokens.splice(e.start..e.end, e.replacement.chars());
    }
    Ok(Sentence::from_tokens(tokens))
}

/// A source sentence with all of its annotators' edits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct M2Entry {
    pub source: Sentence,
    pub annotations: Vec<Annotation>,
}

const NONE: &str = "-NONE-";
const REQUIRED: &str = "REQUIRED";

fn push_spaced(out: &mut String, chars: impl Iterator<Item = char>) {
    for (k, c) in chars.enumerate() {
        if k > 0 {
            out.push(' ');
        }
        out.push(c);
    }
}

/// Inverse of `push_spaced`: tokens sit at even positions, spaces at odd.
fn decode_spaced(field: &str) -> Option<Vec<char>> {
    let mut tokens = Vec::new();
    for (k, c) in field.chars().enumerate() {
        if k % 2 == 0 {
            tokens.push(c);
        } else if c != ' ' {
            return None;
        }
    }
    if !field.is_empty() && field.chars().count().is_multiple_of(2) {
        return None;
    }
    Some(tokens)
}

/// Renders one M² block (terminated by `\n`, no trailing blank line).
pub fn to_m2(source: &Sentence, annotations: &[Annotation]) -> Result<String, EditError> {
    let mut out = String::from("S ");
    push_spaced(&mut out, source.tokens().iter().copied());
    out.push('\n');
    let mut seen = Vec::with_capacity(annotations.len());
    for ann in annotations {
        if seen.contains(&ann.annotator) {
            return Err(EditError::DuplicateAnnotator(ann.annotator));
        }
        seen.push(ann.annotator);
        ann.validate(source.len())?;
        if ann.edits.is_empty() {
            out.push_str(&format!(
                "A -1 -1|||noop|||{NONE}|||{REQUIRED}|||{NONE}|||{}\n",
                ann.annotator
            ));
            continue;
        }
        for e in &ann.edits {
            out.push_str(&format!("A {} {}|||{}|||", e.start, e.end, e.kind));
            if e.replacement.is_empty() {
                out.push_str(NONE);
            } else {
                push_spaced(&mut out, e.replacement.chars());
            }
            out.push_str(&format!("|||{REQUIRED}|||{NONE}|||{}\n", ann.annotator));
        }
    }
    Ok(out)
}

/// Renders a whole M² file: blocks separated by a single blank line.
pub fn to_m2_file(entries: &[M2Entry]) -> Result<String, EditError> {
    let mut out = String::new();
    for (k, entry) in entries.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str(&to_m2(&entry.source, &entry.annotations)?);
    }
    Ok(out)
}

enum ALine {
    Noop(usize),
    Edit(usize, Edit),
}

fn parse_a_line(body: &str, source_len: usize) -> Result<ALine, String> {
    let mut head = body.splitn(3, "|||");
    let coords = head.next().unwrap_or_default();
    let kind = head.next().ok_or("missing kind field")?;
    let rest = head.next().ok_or("missing replacement field")?;
    let mut tail = rest.rsplitn(4, "|||");
    let id = tail.next().unwrap_or_default();
    let comment = tail.next().ok_or("missing annotator field")?;
    let required = tail.next().ok_or("missing annotator field")?;
    let replacement = tail.next().ok_or("missing annotator field")?;
    if required != REQUIRED || comment != NONE {
        return Err(format!(
            "expected |||{REQUIRED}|||{NONE}||| before the annotator id"
        ));
    }
    let annotator: usize = id.parse().map_err(|_| format!("bad annotator id {id:?}"))?;

    let (start, end) = coords
        .split_once(' ')
        .ok_or_else(|| format!("bad span {coords:?}"))?;
    if kind == "noop" {
        if start != "-1" || end != "-1" || replacement != NONE {
            return Err("noop line must read -1 -1|||noop|||-NONE-".into());
        }
        return Ok(ALine::Noop(annotator));
    }
    let kind: EditKind = kind.parse()?;
    let start: usize = start
        .parse()
        .map_err(|_| format!("bad span start {start:?}"))?;
    let end: usize = end.parse().map_err(|_| format!("bad span end {end:?}"))?;
    if end > source_len || start > end {
        return Err(EditError::OutOfBounds {
            start,
            end,
            len: source_len,
        }
        .to_string());
    }
    let replacement: String = if replacement == NONE {
        String::new()
    } else {
        decode_spaced(replacement)
            .ok_or_else(|| {
                format!("replacement {replacement:?} is not space-separated characters")
            })?
            .into_iter()
            .collect()
    };
    let edit = Edit::with_kind(start, end, replacement, kind).map_err(|e| e.to_string())?;
    Ok(ALine::Edit(annotator, edit))
}

fn parse_block(lines: &[(usize, &str)]) -> Result<M2Entry, EditError> {
    let err = |line: usize, reason: String| EditError::M2 { line, reason };
    let (first_no, first) = *lines.first().ok_or_else(|| err(1, "empty block".into()))?;
    let source_text = if first == "S" {
        ""
    } else {
        first
            .strip_prefix("S ")
            .ok_or_else(|| err(first_no, "block must start with an S line".into()))?
    };
    let tokens = decode_spaced(source_text)
        .ok_or_else(|| err(first_no, "S line is not space-separated characters".into()))?;
    let source = Sentence::from_tokens(tokens);
    if source.as_str().chars().count() != source_text.chars().count().div_ceil(2) {
        return Err(err(
            first_no,
            "S line contains a tab or newline token".into(),
        ));
    }

    let mut annotations: Vec<Annotation> = Vec::new();
    let mut by_id: HashMap<usize, (usize, bool)> = HashMap::new();
    for &(no, line) in &lines[1..] {
        let body = line
            .strip_prefix("A ")
            .ok_or_else(|| err(no, format!("expected an A line, found {line:?}")))?;
        let parsed = parse_a_line(body, source.len()).map_err(|r| err(no, r))?;
        let (id, edit) = match parsed {
            ALine::Noop(id) => (id, None),
            ALine::Edit(id, e) => (id, Some(e)),
        };
        let is_noop = edit.is_none();
        let slot = match by_id.get(&id) {
            Some(&(slot, was_noop)) => {
                if was_noop || is_noop {
                    return Err(err(no, format!("annotator {id} mixes noop and edits")));
                }
                slot
            }
            None => {
                annotations.push(Annotation::new(id, Vec::new()));
                by_id.insert(id, (annotations.len() - 1, is_noop));
                annotations.len() - 1
            }
        };
        if let Some(e) = edit {
            annotations[slot].edits.push(e);
            annotations[slot]
                .validate(source.len())
                .map_err(|e| e.at_line(no))?;
        }
    }
    Ok(M2Entry {
        source,
        annotations,
    })
}

/// Parses a single M² block; the exact inverse of [`to_m2`].
pub fn parse_m2(block: &str) -> Result<M2Entry, EditError> {
    let lines: Vec<(usize, &str)> = block
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    parse_block(&lines)
}

/// Parses a file of blank-line-separated blocks. Line numbers in errors are
/// file-relative.
pub fn parse_m2_file(text: &str) -> Result<Vec<M2Entry>, EditError> {
    let mut entries = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    for (k, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            if !block.is_empty() {
                entries.push(parse_block(&block)?);
                block.clear();
            }
        } else {
            block.push((k + 1, line));
        }
    }
    if !block.is_empty() {
        entries.push(parse_block(&block)?);
    }
    Ok(entries)
}
