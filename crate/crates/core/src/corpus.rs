//! Dataset model and text formats for scored sentence pairs.
//!
//! Two input formats are supported:
//! - `columnar`: tab-separated with header `id<TAB>sentence1<TAB>sentence2<TAB>score`;
//!   the score column is absent for unscored (test) files.
//! - `semrel-compat`: CSV with columns `PairID,Text,Score` where `Text` holds
//!   both sentences joined by a literal `\n` sequence (a real newline inside a
//!   quoted field is accepted too).
//!
//! Predictions are written as CSV `PairID,Pred_Score` with scores at six
//! decimal places. All files are UTF-8 with LF line endings.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use core::fmt;

/// Lowercase three-letter language tag, e.g. `eng`, `esp`, `amh`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct LanguageCode(String);

impl LanguageCode {
    pub fn new(code: &str) -> Result<Self, CorpusError> {
        if code.len() == 3 && code.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(Self(code.to_owned()))
        } else {
            Err(CorpusError::InvalidLanguage {
                code: code.to_owned(),
            })
        }
    }

    /// Tag used for merged datasets spanning several languages.
    pub fn multilingual() -> Self {
        Self("mul".to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for LanguageCode {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, CorpusError> {
        Self::new(&s)
    }
}

impl From<LanguageCode> for String {
    fn from(l: LanguageCode) -> String {
        l.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    /// Train and dev rows must carry a gold score; test rows may omit it.
    pub fn requires_scores(self) -> bool {
        matches!(self, Split::Train | Split::Dev)
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Split {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, CorpusError> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(CorpusError::InvalidSplit { name: s.to_owned() }),
        }
    }
}

/// A sentence pair with an optional gold relatedness score in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPair {
    pub id: String,
    pub lang: LanguageCode,
    pub sentence1: String,
    pub sentence2: String,
    pub score: Option<f64>,
}

/// An ordered collection of pairs for one language and split. A merged
/// multilingual dataset uses the `mul` tag and may mix pair languages.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    lang: LanguageCode,
    split: Split,
    pairs: Vec<LabeledPair>,
}

impl Dataset {
    /// Validates the dataset invariants: unique ids, non-empty sentences,
    /// scores in [0, 1] and present wherever the split requires them, and
    /// pair languages consistent with the dataset language.
    pub fn new(
        lang: LanguageCode,
        split: Split,
        pairs: Vec<LabeledPair>,
    ) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for pair in &pairs {
            if !seen.insert(pair.id.clone()) {
                return Err(CorpusError::DuplicateId {
                    id: pair.id.clone(),
                });
            }
            if pair.sentence1.trim().is_empty() || pair.sentence2.trim().is_empty() {
                return Err(CorpusError::EmptySentence {
                    id: pair.id.clone(),
                });
            }
            match pair.score {
                Some(s) if !(0.0..=1.0).contains(&s) => {
                    return Err(CorpusError::ScoreOutOfRange {
                        id: pair.id.clone(),
                        value: s,
                    });
                }
                None if split.requires_scores() => {
                    return Err(CorpusError::MissingScore {
                        id: pair.id.clone(),
                    });
                }
                _ => {}
            }
            if lang.as_str() != "mul" && pair.lang != lang {
                return Err(CorpusError::LanguageMismatch {
                    id: pair.id.clone(),
                    expected: lang.clone(),
                    found: pair.lang.clone(),
                });
            }
        }
        Ok(Self { lang, split, pairs })
    }

    pub fn lang(&self) -> &LanguageCode {
        &self.lang
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn pairs(&self) -> &[LabeledPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Gold scores in dataset order, or None if any pair is unscored.
    pub fn gold_scores(&self) -> Option<Vec<f64>> {
        self.pairs.iter().map(|p| p.score).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Format {
    Columnar,
    SemrelCompat,
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("unparseable score at line {line}: {text:?}")]
    BadScore { line: usize, text: String },
    #[error("score {value} out of [0, 1] for pair {id:?}")]
    ScoreOutOfRange { id: String, value: f64 },
    #[error("missing score for pair {id:?} in a scored split")]
    MissingScore { id: String },
    #[error("duplicate pair id {id:?}")]
    DuplicateId { id: String },
    #[error("empty sentence in pair {id:?}")]
    EmptySentence { id: String },
    #[error("invalid language code {code:?} (want three lowercase letters)")]
    InvalidLanguage { code: String },
    #[error("invalid split {name:?} (want train, dev, or test)")]
    InvalidSplit { name: String },
    #[error("pair {id:?} has language {found}, dataset is {expected}")]
    LanguageMismatch {
        id: String,
        expected: LanguageCode,
        found: LanguageCode,
    },
    #[error("cannot merge datasets from different splits")]
    MixedSplits,
    #[error("cannot merge an empty dataset sequence")]
    EmptyMerge,
    #[error("{scores} scores for {pairs} pairs")]
    LengthMismatch { pairs: usize, scores: usize },
    #[error("non-finite score at index {index}")]
    NonFiniteScore { index: usize },
    #[error("dataset mixes scored and unscored pairs; columnar output needs one or the other")]
    MixedScorePresence,
}

/// Parses a dataset file. The first line is always consumed as a header;
/// blank lines are skipped; row order is preserved.
pub fn parse_dataset(
    bytes: &[u8],
    format: Format,
    lang: LanguageCode,
    split: Split,
) -> Result<Dataset, CorpusError> {
    let text = core::str::from_utf8(bytes).map_err(|_| CorpusError::InvalidUtf8)?;
    let pairs = match format {
        Format::Columnar => parse_columnar(text, &lang, split)?,
        Format::SemrelCompat => parse_semrel_compat(text, &lang, split)?,
    };
    Dataset::new(lang, split, pairs)
}

fn parse_score(raw: &str, line: usize) -> Result<f64, CorpusError> {
    let value: f64 = raw.trim().parse().map_err(|_| CorpusError::BadScore {
        line,
        text: raw.to_owned(),
    })?;
    if !value.is_finite() {
        return Err(CorpusError::BadScore {
            line,
            text: raw.to_owned(),
        });
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(CorpusError::ScoreOutOfRange {
            id: format!("line {line}"),
            value,
        });
    }
    Ok(value)
}

fn parse_columnar(
    text: &str,
    lang: &LanguageCode,
    split: Split,
) -> Result<Vec<LabeledPair>, CorpusError> {
    let mut pairs = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx == 0 {
            continue; // header
        }
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (id, s1, s2, score) = match fields.as_slice() {
            [id, s1, s2] => (*id, *s1, *s2, None),
            [id, s1, s2, score] => (*id, *s1, *s2, Some(parse_score(score, line_no)?)),
            other => {
                return Err(CorpusError::MalformedRow {
                    line: line_no,
                    reason: format!("expected 3 or 4 tab-separated fields, found {}", other.len()),
                });
            }
        };
        if score.is_none() && split.requires_scores() {
            return Err(CorpusError::MissingScore { id: id.to_owned() });
        }
        pairs.push(LabeledPair {
            id: id.to_owned(),
            lang: lang.clone(),
            sentence1: s1.to_owned(),
            sentence2: s2.to_owned(),
            score,
        });
    }
    Ok(pairs)
}

fn parse_semrel_compat(
    text: &str,
    lang: &LanguageCode,
    split: Split,
) -> Result<Vec<LabeledPair>, CorpusError> {
    let records = csv_records(text)?;
    let mut pairs = Vec::new();
    for (idx, record) in records.iter().enumerate() {
        if idx == 0 {
            continue; // header
        }
        let line_no = idx + 1;
        let (id, joined, score) = match record.as_slice() {
            [id, text] => (id, text, None),
            [id, text, score] if score.trim().is_empty() => (id, text, None),
            [id, text, score] => (id, text, Some(parse_score(score, line_no)?)),
            other => {
                return Err(CorpusError::MalformedRow {
                    line: line_no,
                    reason: format!("expected 2 or 3 CSV fields, found {}", other.len()),
                });
            }
        };
        let (s1, s2) = split_joined_text(joined).ok_or_else(|| CorpusError::MalformedRow {
            line: line_no,
            reason: "Text field does not contain a \\n sentence separator".to_owned(),
        })?;
        if score.is_none() && split.requires_scores() {
            return Err(CorpusError::MissingScore { id: id.clone() });
        }
        pairs.push(LabeledPair {
            id: id.clone(),
            lang: lang.clone(),
            sentence1: s1.trim().to_owned(),
            sentence2: s2.trim().to_owned(),
            score,
        });
    }
    Ok(pairs)
}

/// Splits the compat `Text` field at the first `\n` separator. The escaped
/// two-character sequence takes precedence; a raw newline is accepted as a
/// fallback for files whose quoting preserved real line breaks.
fn split_joined_text(text: &str) -> Option<(&str, &str)> {
    if let Some(i) = text.find("\\n") {
        Some((&text[..i], &text[i + 2..]))
    } else {
        text.find('\n').map(|i| (&text[..i], &text[i + 1..]))
    }
}

/// Small RFC 4180-style record reader: quoted fields may contain commas,
/// doubled quotes, and newlines. Blank records are dropped.
fn csv_records(text: &str) -> Result<Vec<Vec<String>>, CorpusError> {
    let mut records = Vec::new();
    let mut record: Vec<String> = Vec::new();
    let mut field = String::new();
    let mut in_quotes = false;
    let mut line = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => in_quotes = false,
                '\n' => {
                    line += 1;
                    field.push(c);
                }
                _ => field.push(c),
            }
            continue;
        }
        match c {
            '"' if field.is_empty() => in_quotes = true,
            ',' => record.push(core::mem::take(&mut field)),
            '\r' => {}
            '\n' => {
                line += 1;
                record.push(core::mem::take(&mut field));
                if record.len() > 1 || !record[0].is_empty() {
                    records.push(core::mem::take(&mut record));
                } else {
                    record.clear();
                }
            }
            _ => field.push(c),
        }
    }
    if in_quotes {
        return Err(CorpusError::MalformedRow {
            line,
            reason: "unterminated quoted field".to_owned(),
        });
    }
    if !field.is_empty() || !record.is_empty() {
        record.push(field);
        records.push(record);
    }
    Ok(records)
}

/// Concatenates datasets of one split. A single input is returned unchanged.
/// With several inputs, ids are prefixed `lang:` to keep them unique and the
/// dataset language becomes `mul` when the inputs disagree.
pub fn merge_datasets(datasets: &[Dataset]) -> Result<Dataset, CorpusError> {
    let first = datasets.first().ok_or(CorpusError::EmptyMerge)?;
    if datasets.iter().any(|d| d.split() != first.split()) {
        return Err(CorpusError::MixedSplits);
    }
    if datasets.len() == 1 {
        return Ok(first.clone());
    }
    let same_lang = datasets.iter().all(|d| d.lang() == first.lang());
    let lang = if same_lang {
        first.lang().clone()
    } else {
        LanguageCode::multilingual()
    };
    let mut pairs = Vec::new();
    for ds in datasets {
        for pair in ds.pairs() {
            let mut merged = pair.clone();
            merged.id = format!("{}:{}", ds.lang(), pair.id);
            pairs.push(merged);
        }
    }
    Dataset::new(lang, first.split(), pairs)
}

/// Renders predictions as `PairID,Pred_Score` CSV, one row per pair in
/// dataset order, scores at six decimal places.
pub fn write_predictions(dataset: &Dataset, scores: &[f64]) -> Result<String, CorpusError> {
    if scores.len() != dataset.len() {
        return Err(CorpusError::LengthMismatch {
            pairs: dataset.len(),
            scores: scores.len(),
        });
    }
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(CorpusError::NonFiniteScore { index });
    }
    let mut out = String::from("PairID,Pred_Score\n");
    for (pair, score) in dataset.pairs().iter().zip(scores) {
        out.push_str(&csv_escape(&pair.id));
        out.push(',');
        out.push_str(&format!("{score:.6}"));
        out.push('\n');
    }
    Ok(out)
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

/// Renders a dataset in the columnar format. The score column is written
/// only when every pair is scored; mixing scored and unscored pairs is an
/// error because the format has a fixed column count.
pub fn format_columnar(dataset: &Dataset) -> Result<String, CorpusError> {
    let scored = dataset.pairs().iter().filter(|p| p.score.is_some()).count();
    let with_scores = if scored == dataset.len() {
        true
    } else if scored == 0 {
        false
    } else {
        return Err(CorpusError::MixedScorePresence);
    };
    let mut out = String::from(if with_scores {
        "id\tsentence1\tsentence2\tscore\n"
    } else {
        "id\tsentence1\tsentence2\n"
    });
    for pair in dataset.pairs() {
        out.push_str(&pair.id);
        out.push('\t');
        out.push_str(&pair.sentence1);
        out.push('\t');
        out.push_str(&pair.sentence2);
        if let Some(score) = pair.score {
            out.push('\t');
            out.push_str(&format!("{score:.6}"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn lang(code: &str) -> LanguageCode {
        LanguageCode::new(code).unwrap()
    }

    fn pair(id: &str, l: &str, s1: &str, s2: &str, score: Option<f64>) -> LabeledPair {
        LabeledPair {
            id: id.into(),
            lang: lang(l),
            sentence1: s1.into(),
            sentence2: s2.into(),
            score,
        }
    }

    fn tiny(l: &str, split: Split, n: usize) -> Dataset {
        let pairs = (0..n)
            .map(|i| {
                pair(
                    &format!("p{i}"),
                    l,
                    "a cat sat",
                    "a feline sat",
                    if split == Split::Test {
                        None
                    } else {
                        Some(0.5)
                    },
                )
            })
            .collect();
        Dataset::new(lang(l), split, pairs).unwrap()
    }

    #[test]
    fn parses_columnar_row() {
        let text = "id\tsentence1\tsentence2\tscore\np1\ta cat sat\ta feline sat\t0.9\n";
        let ds = parse_dataset(text.as_bytes(), Format::Columnar, lang("eng"), Split::Train)
            .unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.pairs()[0].id, "p1");
        assert_eq!(ds.pairs()[0].score, Some(0.9));
        assert_eq!(ds.pairs()[0].sentence2, "a feline sat");
    }

    #[test]
    fn rejects_out_of_range_score() {
        let text = "id\ts1\ts2\tscore\np1\ta\tb\t1.5\n";
        let err = parse_dataset(text.as_bytes(), Format::Columnar, lang("eng"), Split::Train)
            .unwrap_err();
        assert!(matches!(err, CorpusError::ScoreOutOfRange { .. }));
    }

    #[test]
    fn test_split_without_scores_is_fine() {
        let text = "id\tsentence1\tsentence2\np1\ta cat\ta dog\np2\tup\tdown\n";
        let ds =
            parse_dataset(text.as_bytes(), Format::Columnar, lang("eng"), Split::Test).unwrap();
        assert_eq!(ds.len(), 2);
        assert!(ds.pairs().iter().all(|p| p.score.is_none()));
    }

    #[test]
    fn train_split_requires_scores() {
        let text = "id\tsentence1\tsentence2\np1\ta cat\ta dog\n";
        let err = parse_dataset(text.as_bytes(), Format::Columnar, lang("eng"), Split::Train)
            .unwrap_err();
        assert!(matches!(err, CorpusError::MissingScore { .. }));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let text = "h\np1\ta\tb\t0.1\np1\tc\td\t0.2\n";
        let err = parse_dataset(text.as_bytes(), Format::Columnar, lang("eng"), Split::Train)
            .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { .. }));
    }

    #[test]
    fn rejects_wrong_column_count() {
        let text = "h\np1\tonly one sentence\n";
        let err = parse_dataset(text.as_bytes(), Format::Columnar, lang("eng"), Split::Test)
            .unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { .. }));
    }

    #[test]
    fn rejects_non_utf8() {
        let err = parse_dataset(&[0xff, 0xfe, 0x00], Format::Columnar, lang("eng"), Split::Test)
            .unwrap_err();
        assert_eq!(err, CorpusError::InvalidUtf8);
    }

    #[test]
    fn parses_semrel_compat_with_escaped_separator() {
        let text = "PairID,Text,Score\nENG-1,\"a cat sat.\\na feline sat.\",0.75\n";
        let ds = parse_dataset(
            text.as_bytes(),
            Format::SemrelCompat,
            lang("eng"),
            Split::Train,
        )
        .unwrap();
        assert_eq!(ds.pairs()[0].sentence1, "a cat sat.");
        assert_eq!(ds.pairs()[0].sentence2, "a feline sat.");
        assert_eq!(ds.pairs()[0].score, Some(0.75));
    }

    #[test]
    fn parses_semrel_compat_with_quoted_real_newline() {
        let text = "PairID,Text,Score\nENG-1,\"first one\nsecond, one\",0.25\n";
        let ds = parse_dataset(
            text.as_bytes(),
            Format::SemrelCompat,
            lang("eng"),
            Split::Dev,
        )
        .unwrap();
        assert_eq!(ds.pairs()[0].sentence1, "first one");
        assert_eq!(ds.pairs()[0].sentence2, "second, one");
    }

    #[test]
    fn merge_concatenates_and_tags_multilingual() {
        let merged = merge_datasets(&[tiny("eng", Split::Train, 3), tiny("esp", Split::Train, 2)])
            .unwrap();
        assert_eq!(merged.len(), 5);
        assert_eq!(merged.lang().as_str(), "mul");
        assert_eq!(merged.pairs()[0].id, "eng:p0");
        assert_eq!(merged.pairs()[3].id, "esp:p0");
        // pair languages are preserved
        assert_eq!(merged.pairs()[4].lang.as_str(), "esp");
    }

    #[test]
    fn merge_of_single_dataset_is_identity() {
        let ds = tiny("eng", Split::Train, 3);
        let merged = merge_datasets(core::slice::from_ref(&ds)).unwrap();
        assert_eq!(merged, ds);
    }

    #[test]
    fn merge_rejects_mixed_splits() {
        let err =
            merge_datasets(&[tiny("eng", Split::Train, 1), tiny("eng", Split::Dev, 1)])
                .unwrap_err();
        assert_eq!(err, CorpusError::MixedSplits);
    }

    #[test]
    fn merge_rejects_empty_input() {
        assert_eq!(merge_datasets(&[]).unwrap_err(), CorpusError::EmptyMerge);
    }

    #[test]
    fn predictions_format_is_exact() {
        let ds = Dataset::new(
            lang("eng"),
            Split::Test,
            alloc::vec![pair("p1", "eng", "a", "b", None)],
        )
        .unwrap();
        let csv = write_predictions(&ds, &[0.5]).unwrap();
        assert_eq!(csv, "PairID,Pred_Score\np1,0.500000\n");
    }

    #[test]
    fn empty_predictions_is_header_only() {
        let ds = Dataset::new(lang("eng"), Split::Test, Vec::new()).unwrap();
        assert_eq!(write_predictions(&ds, &[]).unwrap(), "PairID,Pred_Score\n");
    }

    #[test]
    fn predictions_reject_nan_and_length_mismatch() {
        let ds = Dataset::new(
            lang("eng"),
            Split::Test,
            alloc::vec![pair("p1", "eng", "a", "b", None)],
        )
        .unwrap();
        assert!(matches!(
            write_predictions(&ds, &[f64::NAN]).unwrap_err(),
            CorpusError::NonFiniteScore { index: 0 }
        ));
        assert!(matches!(
            write_predictions(&ds, &[]).unwrap_err(),
            CorpusError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn columnar_round_trip_preserves_ids_and_scores() {
        let ds = Dataset::new(
            lang("eng"),
            Split::Train,
            alloc::vec![
                pair("p1", "eng", "a cat", "a dog", Some(0.1234564)),
                pair("p2", "eng", "left", "right", Some(1.0)),
            ],
        )
        .unwrap();
        let text = format_columnar(&ds).unwrap();
        let back = parse_dataset(
            text.as_bytes(),
            Format::Columnar,
            lang("eng"),
            Split::Train,
        )
        .unwrap();
        assert_eq!(back.len(), ds.len());
        for (a, b) in ds.pairs().iter().zip(back.pairs()) {
            assert_eq!(a.id, b.id);
            let (sa, sb) = (a.score.unwrap(), b.score.unwrap());
            assert!((sa - sb).abs() < 5e-7, "{sa} vs {sb}");
        }
    }

    #[test]
    fn row_order_is_preserved() {
        let text = "h\nz\ta\tb\t0.1\na\tc\td\t0.2\nm\te\tf\t0.3\n";
        let ds = parse_dataset(text.as_bytes(), Format::Columnar, lang("eng"), Split::Train)
            .unwrap();
        let ids: Vec<&str> = ds.pairs().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["z", "a", "m"]);
    }
}
