//! Shared domain types, validation rules and the record file format.

pub(crate) mod attributes;
pub mod records;
mod types;

pub use attributes::{AttributeSchema, AttributeSpec, SchemaError, BUILTIN_SCHEMA_VERSION};
pub use records::{read_records, write_records, Mode, Record, RecordError, RecordReader};
pub use types::{
    FaceImageRef, GoldLabel, OptionChoice, PersonAnnotation, QAPair, SourceDataset, TaskKind,
    YesNo,
};

use std::fmt;

/// A broken record invariant, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for Violation {}
