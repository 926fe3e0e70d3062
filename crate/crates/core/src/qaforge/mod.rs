//! Question-answer generation: caption pairs, attribute questions,
//! reformulated face datasets, the zero-shot suite and training mixes.

mod attribute_qa;
mod captions;
pub mod datasets;
pub mod labels;
pub mod mix;
mod reformulate;
mod shuffle;
pub mod templates;
pub mod zeroshot;

pub use attribute_qa::{gen_attribute_qa, AttributeQa, QaSkip};
pub use captions::{gen_caption_pairs, CaptionPair, CaptionRun};
pub use datasets::{reformulate_dataset, AdapterOptions, Dataset, DatasetSkip, ReformulateOutput};
pub use mix::{assemble_mix, MixManifest, MixOutput, MixSource, MixSpec, Scale, TargetCount};
pub use reformulate::{
    reformulate_attribute, reformulate_au, reformulate_age, reformulate_expression,
    reformulate_gender, reformulate_head_pose,
};
pub use shuffle::{lettered, shuffle_options};
pub use templates::{QuestionTemplate, MC_INSTRUCTION, YES_NO_INSTRUCTION};
pub use zeroshot::{build_zeroshot_suite, FeatureDescriptions, ZeroShotCategory, ZeroShotItem};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("duplicate option text {0:?}")]
    DuplicateOption(String),
    #[error("age {0} outside 1..=100")]
    AgeOutOfRange(i64),
    #[error("unknown gender label {0:?}")]
    UnknownGender(String),
    #[error("class {0:?} is not in the class list")]
    UnknownClass(String),
    #[error("unknown action unit {0:?}")]
    UnknownActionUnit(String),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("missing description for {0:?}")]
    MissingDescription(String),
    #[error("person {person_index} of image {image} has no position but multi_face is set")]
    MissingPosition { image: String, person_index: u32 },
    #[error("{value:?} is not a {category} value")]
    OutOfVocabulary { category: String, value: String },
    #[error("line {line}: {message}")]
    Label { line: usize, message: String },
    #[error("mix spec: {0}")]
    MixSpec(String),
    #[error("source {role:?} holds {available} records, {needed} requested")]
    InventoryTooSmall {
        role: String,
        needed: u64,
        available: u64,
    },
    #[error("cannot reach {target} questions from {images} images at 2-3 per image")]
    UnreachableTarget { target: usize, images: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
