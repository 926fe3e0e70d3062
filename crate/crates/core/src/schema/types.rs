use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::records::Record;
use super::Violation;

/// Datasets an image may originate from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDataset {
    LaionFace,
    Agedb,
    Rafdb,
    Emotionet,
    Lfwa,
    Utkface,
    Affectnet,
    Biwi,
    Celeba,
    ZeroShot,
    Other,
}

impl SourceDataset {
    pub const ALL: [SourceDataset; 11] = [
        SourceDataset::LaionFace,
        SourceDataset::Agedb,
        SourceDataset::Rafdb,
        SourceDataset::Emotionet,
        SourceDataset::Lfwa,
        SourceDataset::Utkface,
        SourceDataset::Affectnet,
        SourceDataset::Biwi,
        SourceDataset::Celeba,
        SourceDataset::ZeroShot,
        SourceDataset::Other,
    ];
}

/// An image referenced by locator only; pixels are never decoded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceImageRef {
    pub id: String,
    pub uri: String,
    pub source_dataset: SourceDataset,
}

impl FaceImageRef {
    pub fn new(id: impl Into<String>, uri: impl Into<String>, source: SourceDataset) -> Self {
        Self {
            id: id.into(),
            uri: uri.into(),
            source_dataset: source,
        }
    }

    pub(crate) fn check(&self, field: &str) -> Result<(), Violation> {
        if self.id.trim().is_empty() {
            return Err(Violation::new(format!("{field}.id"), "must be non-empty"));
        }
        if self.uri.trim().is_empty() {
            return Err(Violation::new(format!("{field}.uri"), "must be non-empty"));
        }
        Ok(())
    }
}

impl Record for FaceImageRef {
    const KIND: &'static str = "face_image_ref";
    const FIELDS: &'static [&'static str] = &["id", "uri", "source_dataset"];

    fn validate(&self) -> Result<(), Violation> {
        if self.id.trim().is_empty() {
            return Err(Violation::new("id", "must be non-empty"));
        }
        if self.uri.trim().is_empty() {
            return Err(Violation::new("uri", "must be non-empty"));
        }
        Ok(())
    }

    fn unique_key(&self) -> Option<(&'static str, String)> {
        Some(("id", self.id.clone()))
    }
}

/// One person's annotation parsed from an annotation-service response.
///
/// Attribute keys are the schema's attribute names. The position slot is
/// kept in `position`, never in `attributes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonAnnotation {
    pub image: FaceImageRef,
    pub person_index: u32,
    #[serde(default)]
    pub position: Option<String>,
    pub caption: String,
    pub attributes: BTreeMap<String, String>,
}

impl Record for PersonAnnotation {
    const KIND: &'static str = "person_annotation";
    const FIELDS: &'static [&'static str] =
        &["image", "person_index", "position", "caption", "attributes"];

    fn validate(&self) -> Result<(), Violation> {
        self.image.check("image")?;
        for (name, value) in &self.attributes {
            if name.trim().is_empty() {
                return Err(Violation::new("attributes", "empty attribute name"));
            }
            if value.trim().is_empty() {
                return Err(Violation::new(
                    "attributes",
                    format!("empty value for attribute {name:?}"),
                ));
            }
        }
        Ok(())
    }

    fn unique_key(&self) -> Option<(&'static str, String)> {
        Some((
            "person_index",
            format!("{}#{}", self.image.id, self.person_index),
        ))
    }
}

/// Scoring regime of a question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Age,
    YesNo,
    MultipleChoice,
    Description,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Age => "age",
            TaskKind::YesNo => "yes_no",
            TaskKind::MultipleChoice => "multiple_choice",
            TaskKind::Description => "description",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YesNo {
    Yes,
    No,
}

impl YesNo {
    pub fn from_bool(b: bool) -> Self {
        if b {
            YesNo::Yes
        } else {
            YesNo::No
        }
    }

    pub fn as_bool(self) -> bool {
        self == YesNo::Yes
    }
}

impl fmt::Display for YesNo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            YesNo::Yes => "Yes",
            YesNo::No => "No",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldLabel {
    Number(u32),
    Boolean(YesNo),
    Letter(char),
    Text(String),
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoldLabel::Number(n) => write!(f, "{n}"),
            GoldLabel::Boolean(b) => write!(f, "{b}"),
            GoldLabel::Letter(c) => write!(f, "{c}"),
            GoldLabel::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionChoice {
    pub letter: char,
    pub text: String,
}

/// An image-question-answer triple.
///
/// `category` names the benchmark column the pair is scored under
/// (`expression`, `attribute`, `au`, `gender`, `age`, `eye_shape`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QAPair {
    pub id: String,
    pub image: FaceImageRef,
    pub task: TaskKind,
    pub category: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<OptionChoice>>,
    pub gold: GoldLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_description: Option<String>,
}

impl QAPair {
    /// Option text under `letter`, if any.
    pub fn option_text(&self, letter: char) -> Option<&str> {
        self.options
            .as_deref()?
            .iter()
            .find(|o| o.letter == letter)
            .map(|o| o.text.as_str())
    }

    pub fn letters(&self) -> Vec<char> {
        self.options
            .as_deref()
            .map(|opts| opts.iter().map(|o| o.letter).collect())
            .unwrap_or_default()
    }
}

impl Record for QAPair {
    const KIND: &'static str = "qa_pair";
    const FIELDS: &'static [&'static str] = &[
        "id",
        "image",
        "task",
        "category",
        "question",
        "options",
        "gold",
        "aux_description",
    ];

    fn validate(&self) -> Result<(), Violation> {
        if self.id.trim().is_empty() {
            return Err(Violation::new("id", "must be non-empty"));
        }
        self.image.check("image")?;
        if self.question.trim().is_empty() {
            return Err(Violation::new("question", "must be non-empty"));
        }
        match (&self.options, self.task) {
            (Some(_), t) if t != TaskKind::MultipleChoice => {
                return Err(Violation::new(
                    "options",
                    format!("options present but task is {t}"),
                ))
            }
            (None, TaskKind::MultipleChoice) => {
                return Err(Violation::new(
                    "options",
                    "multiple_choice task requires options",
                ))
            }
            (Some(opts), _) => {
                if opts.len() < 2 || opts.len() > 26 {
                    return Err(Violation::new(
                        "options",
                        format!("expected 2..=26 options, got {}", opts.len()),
                    ));
                }
                for (i, opt) in opts.iter().enumerate() {
                    let expected = (b'A' + i as u8) as char;
                    if opt.letter != expected {
                        return Err(Violation::new(
                            "options",
                            format!("letter {:?} at position {i}, expected {expected:?}", opt.letter),
                        ));
                    }
                    if opt.text.trim().is_empty() {
                        return Err(Violation::new("options", format!("option {expected} is empty")));
                    }
                }
            }
            (None, _) => {}
        }
        match (self.task, &self.gold) {
            (TaskKind::Age, GoldLabel::Number(n)) => {
                if !(1..=100).contains(n) {
                    return Err(Violation::new("gold", format!("age {n} outside 1..=100")));
                }
            }
            (TaskKind::YesNo, GoldLabel::Boolean(_)) => {}
            (TaskKind::MultipleChoice, GoldLabel::Letter(c)) => {
                if self.option_text(*c).is_none() {
                    return Err(Violation::new(
                        "gold",
                        format!("letter {c:?} is not among the options"),
                    ));
                }
            }
            (TaskKind::Description, GoldLabel::Text(_)) => {}
            (task, gold) => {
                return Err(Violation::new(
                    "gold",
                    format!("gold {gold:?} inconsistent with task {task}"),
                ))
            }
        }
        Ok(())
    }

    fn unique_key(&self) -> Option<(&'static str, String)> {
        Some(("id", self.id.clone()))
    }
}
