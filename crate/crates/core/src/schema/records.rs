//! Line-delimited record files.
//!
//! One JSON object per line, UTF-8, fields in declaration order. Every line
//! either yields a validated record or a located error; nothing is skipped
//! except whitespace-only lines.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use super::Violation;

/// A record type that can live in a record file.
pub trait Record: Serialize + DeserializeOwned {
    /// Discriminator used in error messages and manifests.
    const KIND: &'static str;
    /// Top-level field names; anything else is an unknown field.
    const FIELDS: &'static [&'static str];

    fn validate(&self) -> Result<(), Violation>;

    /// Field name and key that must be unique within one file.
    fn unique_key(&self) -> Option<(&'static str, String)> {
        None
    }
}

/// Unknown-field policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Strict,
    /// Unknown top-level fields are kept in [`Entry::extra`].
    Lenient,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed {kind} record: {message}")]
    Malformed {
        line: usize,
        kind: &'static str,
        message: String,
    },
    #[error("line {line}: unknown field {field:?} in {kind} record")]
    UnknownField {
        line: usize,
        kind: &'static str,
        field: String,
    },
    #[error("line {line}: {violation}")]
    Invalid { line: usize, violation: Violation },
    #[error("line {line}: duplicate {field} {key:?}")]
    Duplicate {
        line: usize,
        field: &'static str,
        key: String,
    },
    #[error("record {index}: {violation}")]
    InvalidInput { index: usize, violation: Violation },
    #[error("record {index}: duplicate {field} {key:?}")]
    DuplicateInput {
        index: usize,
        field: &'static str,
        key: String,
    },
}

impl RecordError {
    /// 1-based line number for read errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            RecordError::Malformed { line, .. }
            | RecordError::UnknownField { line, .. }
            | RecordError::Invalid { line, .. }
            | RecordError::Duplicate { line, .. } => Some(*line),
            _ => None,
        }
    }

    /// Field named by the error, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            RecordError::UnknownField { field, .. } => Some(field),
            RecordError::Invalid { violation, .. } | RecordError::InvalidInput { violation, .. } => {
                Some(&violation.field)
            }
            RecordError::Duplicate { field, .. } | RecordError::DuplicateInput { field, .. } => {
                Some(field)
            }
            _ => None,
        }
    }
}

/// A record together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry<T> {
    pub line: usize,
    pub record: T,
    pub extra: Map<String, Value>,
}

/// Streaming reader over a record file.
pub struct RecordReader<R, T> {
    lines: io::Lines<R>,
    line: usize,
    mode: Mode,
    seen: HashSet<String>,
    failed: bool,
    _kind: std::marker::PhantomData<T>,
}

impl<R: BufRead, T: Record> RecordReader<R, T> {
    pub fn new(src: R, mode: Mode) -> Self {
        Self {
            lines: src.lines(),
            line: 0,
            mode,
            seen: HashSet::new(),
            failed: false,
            _kind: std::marker::PhantomData,
        }
    }

    fn decode(&mut self, text: &str) -> Result<Entry<T>, RecordError> {
        let line = self.line;
        let value: Value = serde_json::from_str(text).map_err(|e| RecordError::Malformed {
            line,
            kind: T::KIND,
            message: e.to_string(),
        })?;
        let Value::Object(object) = value else {
            return Err(RecordError::Malformed {
                line,
                kind: T::KIND,
                message: "expected a JSON object".into(),
            });
        };
        let mut known = Map::new();
        let mut extra = Map::new();
        for (k, v) in object {
            if T::FIELDS.contains(&k.as_str()) {
                known.insert(k, v);
            } else {
                extra.insert(k, v);
            }
        }
        if self.mode == Mode::Strict {
            if let Some(field) = extra.keys().next() {
                return Err(RecordError::UnknownField {
                    line,
                    kind: T::KIND,
                    field: field.clone(),
                });
            }
        }
        let record: T =
            serde_json::from_value(Value::Object(known)).map_err(|e| RecordError::Malformed {
                line,
                kind: T::KIND,
                message: e.to_string(),
            })?;
        record
            .validate()
            .map_err(|violation| RecordError::Invalid { line, violation })?;
        if let Some((field, key)) = record.unique_key() {
            if !self.seen.insert(key.clone()) {
                return Err(RecordError::Duplicate { line, field, key });
            }
        }
        Ok(Entry {
            line,
            record,
            extra,
        })
    }
}

impl<R: BufRead, T: Record> Iterator for RecordReader<R, T> {
    type Item = Result<Entry<T>, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => {
                    self.failed = true;
                    self.line += 1;
                    // invalid UTF-8 surfaces here
                    return Some(Err(RecordError::Malformed {
                        line: self.line,
                        kind: T::KIND,
                        message: e.to_string(),
                    }));
                }
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let out = self.decode(&text);
            if out.is_err() {
                self.failed = true;
            }
            return Some(out);
        }
    }
}

/// Read and validate every record; fails on the first located error.
pub fn read_records<T: Record, R: BufRead>(src: R, mode: Mode) -> Result<Vec<T>, RecordError> {
    RecordReader::<R, T>::new(src, mode)
        .map(|e| e.map(|e| e.record))
        .collect()
}

/// Like [`read_records`] but keeps line numbers and lenient-mode extras.
pub fn read_entries<T: Record, R: BufRead>(
    src: R,
    mode: Mode,
) -> Result<Vec<Entry<T>>, RecordError> {
    RecordReader::<R, T>::new(src, mode).collect()
}

fn check_all<'a, T: Record + 'a>(
    records: impl IntoIterator<Item = &'a T>,
) -> Result<(), RecordError> {
    let mut seen = HashSet::new();
    for (index, r) in records.into_iter().enumerate() {
        r.validate()
            .map_err(|violation| RecordError::InvalidInput { index, violation })?;
        if let Some((field, key)) = r.unique_key() {
            if !seen.insert(key.clone()) {
                return Err(RecordError::DuplicateInput { index, field, key });
            }
        }
    }
    Ok(())
}

/// Validate every record, then write one per line. Nothing is written when
/// any record is invalid.
pub fn write_records<T: Record, W: Write>(records: &[T], mut dest: W) -> Result<usize, RecordError> {
    check_all(records)?;
    for r in records {
        serde_json::to_writer(&mut dest, r).map_err(io::Error::from)?;
        dest.write_all(b"\n")?;
    }
    dest.flush()?;
    Ok(records.len())
}

/// Write entries, re-attaching lenient-mode extras after the known fields.
pub fn write_entries<T: Record, W: Write>(
    entries: &[Entry<T>],
    mut dest: W,
) -> Result<usize, RecordError> {
    check_all(entries.iter().map(|e| &e.record))?;
    for e in entries {
        let mut value = serde_json::to_value(&e.record).map_err(io::Error::from)?;
        if let Value::Object(map) = &mut value {
            for (k, v) in &e.extra {
                map.entry(k.clone()).or_insert_with(|| v.clone());
            }
        }
        serde_json::to_writer(&mut dest, &value).map_err(io::Error::from)?;
        dest.write_all(b"\n")?;
    }
    dest.flush()?;
    Ok(entries.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FaceImageRef, GoldLabel, QAPair, SourceDataset, TaskKind, YesNo};

    fn qa(id: &str) -> QAPair {
        QAPair {
            id: id.into(),
            image: FaceImageRef::new(format!("img-{id}"), format!("{id}.jpg"), SourceDataset::Lfwa),
            task: TaskKind::YesNo,
            category: "attribute".into(),
            question: "Does the person in the image possess the property of Smiling? Answer directly with Yes or No.".into(),
            options: None,
            gold: GoldLabel::Boolean(YesNo::Yes),
            aux_description: None,
        }
    }

    #[test]
    fn empty_input_writes_nothing() {
        let mut buf = Vec::new();
        assert_eq!(write_records::<QAPair, _>(&[], &mut buf).unwrap(), 0);
        assert!(buf.is_empty());
        let back: Vec<QAPair> = read_records(&buf[..], Mode::Strict).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn three_pairs_round_trip() {
        let recs = vec![qa("a"), qa("b"), qa("c")];
        let mut buf = Vec::new();
        assert_eq!(write_records(&recs, &mut buf).unwrap(), 3);
        assert_eq!(buf.iter().filter(|b| **b == b'\n').count(), 3);
        let back: Vec<QAPair> = read_records(&buf[..], Mode::Strict).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn field_order_is_stable() {
        let mut buf = Vec::new();
        write_records(&[qa("a")], &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with(r#"{"id":"a","image":{"id":"img-a""#), "{line}");
    }

    #[test]
    fn options_with_age_task_is_rejected_at_line() {
        let mut r = qa("x");
        r.task = TaskKind::Age;
        r.gold = GoldLabel::Number(30);
        let mut v = serde_json::to_value(&r).unwrap();
        v["options"] = serde_json::json!([{"letter":"A","text":"x"},{"letter":"B","text":"y"}]);
        let text = format!("{}\n{}\n", serde_json::to_string(&qa("ok")).unwrap(), v);
        let err = read_records::<QAPair, _>(text.as_bytes(), Mode::Strict).unwrap_err();
        assert_eq!(err.line(), Some(2));
        assert_eq!(err.field(), Some("options"));
    }

    #[test]
    fn truncated_final_line_is_located() {
        let mut buf = Vec::new();
        write_records(&[qa("a"), qa("b"), qa("c")], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut = &text[..text.len() - 15];
        let err = read_records::<QAPair, _>(cut.as_bytes(), Mode::Strict).unwrap_err();
        assert!(matches!(err, RecordError::Malformed { line: 3, .. }), "{err}");
    }

    #[test]
    fn unknown_fields_strict_vs_lenient() {
        let mut v = serde_json::to_value(qa("a")).unwrap();
        v["note"] = serde_json::json!("kept");
        let text = format!("{v}\n");
        let err = read_records::<QAPair, _>(text.as_bytes(), Mode::Strict).unwrap_err();
        assert_eq!(err.field(), Some("note"));

        let entries = read_entries::<QAPair, _>(text.as_bytes(), Mode::Lenient).unwrap();
        assert_eq!(entries[0].extra["note"], "kept");
        let mut out = Vec::new();
        write_entries(&entries, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn duplicate_ids_rejected_on_read_and_write() {
        let recs = vec![qa("a"), qa("a")];
        assert!(matches!(
            write_records(&recs, Vec::new()),
            Err(RecordError::DuplicateInput { index: 1, .. })
        ));
        let line = serde_json::to_string(&qa("a")).unwrap();
        let text = format!("{line}\n{line}\n");
        let err = read_records::<QAPair, _>(text.as_bytes(), Mode::Strict).unwrap_err();
        assert!(matches!(err, RecordError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn invalid_record_rejected_with_index() {
        let mut bad = qa("b");
        bad.question.clear();
        let err = write_records(&[qa("a"), bad], Vec::new()).unwrap_err();
        assert!(matches!(err, RecordError::InvalidInput { index: 1, .. }));
        assert_eq!(err.field(), Some("question"));
    }

    #[test]
    fn non_object_line_is_malformed() {
        let err = read_records::<QAPair, _>("[1,2]\n".as_bytes(), Mode::Strict).unwrap_err();
        assert_eq!(err.line(), Some(1));
    }
}
