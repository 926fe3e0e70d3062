//! Label cleaning: drop indeterminate or off-schema values, then drop people
//! left with too little to train on.

use serde::{Deserialize, Serialize};

use crate::schema::attributes::normalize_value;
use crate::schema::{AttributeSchema, PersonAnnotation, Record, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    IndeterminateValue,
    MissingFaceDescription,
    EmptyAttributes,
    UnknownAttributeValue,
}

/// Missing keys in a rules file take their default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleaningConfig {
    /// Values meaning "the annotator could not tell".
    pub indeterminate: Vec<String>,
    /// Words that mark a caption as describing a face, besides attribute names.
    pub face_keywords: Vec<String>,
    /// People with fewer surviving attributes are dropped.
    pub min_attributes: usize,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self {
            indeterminate: ["cannot determine", "unknown", "n/a", "not visible", "unclear"]
                .map(String::from)
                .to_vec(),
            face_keywords: ["face", "eyes", "hair", "skin", "expression"]
                .map(String::from)
                .to_vec(),
            min_attributes: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonDrop {
    pub person_index: u32,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDrop {
    pub person_index: u32,
    pub attribute: String,
    pub value: String,
    pub reason: DropReason,
}

/// `kept` and `dropped` partition the input people; `attribute_drops`
/// lists values removed from people in either set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CleaningOutcome {
    pub kept: Vec<PersonAnnotation>,
    pub dropped: Vec<PersonDrop>,
    pub attribute_drops: Vec<AttributeDrop>,
}

/// One line of a cleaning report file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    pub image_id: String,
    pub person_index: u32,
    pub level: DropLevel,
    pub reason: DropReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropLevel {
    Person,
    Attribute,
}

impl Record for DropRecord {
    const KIND: &'static str = "drop";
    const FIELDS: &'static [&'static str] =
        &["image_id", "person_index", "level", "reason", "attribute", "value"];

    fn validate(&self) -> Result<(), Violation> {
        if self.image_id.is_empty() {
            return Err(Violation::new("image_id", "must be non-empty"));
        }
        if (self.level == DropLevel::Attribute) != self.attribute.is_some() {
            return Err(Violation::new("attribute", "present iff level is attribute"));
        }
        Ok(())
    }
}

impl CleaningOutcome {
    /// Report lines for one image's outcome.
    pub fn drop_records(&self, image_id: &str) -> Vec<DropRecord> {
        let attrs = self.attribute_drops.iter().map(|d| DropRecord {
            image_id: image_id.to_string(),
            person_index: d.person_index,
            level: DropLevel::Attribute,
            reason: d.reason,
            attribute: Some(d.attribute.clone()),
            value: Some(d.value.clone()),
        });
        let persons = self.dropped.iter().map(|d| DropRecord {
            image_id: image_id.to_string(),
            person_index: d.person_index,
            level: DropLevel::Person,
            reason: d.reason,
            attribute: None,
            value: None,
        });
        attrs.chain(persons).collect()
    }
}

fn padded(s: &str) -> String {
    format!(" {s} ")
}

/// Whether the caption says anything about the face.
pub fn describes_face(caption: &str, schema: &AttributeSchema, config: &CleaningConfig) -> bool {
    let text = padded(&normalize_value(caption));
    if text.trim().is_empty() {
        return false;
    }
    let keywords = config.face_keywords.iter().map(|k| normalize_value(k));
    let names = schema.describable().map(|a| normalize_value(&a.name));
    keywords
        .chain(names)
        .filter(|k| !k.is_empty())
        .any(|k| text.contains(&padded(&k)))
}

/// Apply the cleaning rules to every person. Total; never fails.
pub fn clean_labels(
    persons: &[PersonAnnotation],
    schema: &AttributeSchema,
    config: &CleaningConfig,
) -> CleaningOutcome {
    let indeterminate: Vec<String> = config.indeterminate.iter().map(|v| normalize_value(v)).collect();
    let mut out = CleaningOutcome::default();

    for person in persons {
        let mut cleaned = person.clone();
        cleaned.attributes.clear();
        for (name, value) in &person.attributes {
            let reject = |reason| AttributeDrop {
                person_index: person.person_index,
                attribute: name.clone(),
                value: value.clone(),
                reason,
            };
            let Some(spec) = schema.find(name) else {
                out.attribute_drops.push(reject(DropReason::UnknownAttributeValue));
                continue;
            };
            if spec.is_position() {
                if cleaned.position.is_none() {
                    cleaned.position = Some(value.trim().to_string());
                }
                continue;
            }
            if indeterminate.contains(&normalize_value(value)) {
                out.attribute_drops.push(reject(DropReason::IndeterminateValue));
                continue;
            }
            let kept_value = if spec.is_closed() {
                match spec.canonical_value(value) {
                    Some(v) => v.to_string(),
                    None => {
                        out.attribute_drops.push(reject(DropReason::UnknownAttributeValue));
                        continue;
                    }
                }
            } else {
                spec.canonical_value(value)
                    .map(str::to_string)
                    .unwrap_or_else(|| value.trim().to_string())
            };
            if kept_value.is_empty() {
                out.attribute_drops.push(reject(DropReason::UnknownAttributeValue));
                continue;
            }
            cleaned.attributes.insert(spec.name.clone(), kept_value);
        }

        let reason = if cleaned.attributes.len() < config.min_attributes {
            Some(DropReason::EmptyAttributes)
        } else if !describes_face(&cleaned.caption, schema, config) {
            Some(DropReason::MissingFaceDescription)
        } else {
            None
        };
        match reason {
            Some(reason) => out.dropped.push(PersonDrop {
                person_index: person.person_index,
                reason,
            }),
            None => {
                cleaned.caption = cleaned.caption.trim().to_string();
                out.kept.push(cleaned)
            }
        }
    }
    out
}
