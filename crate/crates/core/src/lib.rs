//! Face-perception QA data pipeline and vision-language benchmark harness.
//!
//! The crate covers four stages:
//!
//! - [`annotator`]: builds the attribute-annotation prompt, parses structured
//!   multi-person responses and cleans indeterminate labels.
//! - [`qaforge`]: turns annotations and classic face datasets into
//!   image-question-answer records, builds the zero-shot attribute suite and
//!   assembles seeded data mixes.
//! - [`eval`]: runs QA benchmarks against an inference endpoint, extracts
//!   answers from free-form responses and scores them.
//! - [`manifest`]: the three-stage training recipe as validated manifests.
//!
//! Everything is exchanged as line-delimited JSON records, see [`schema::records`].

pub mod annotator;
pub mod batch;
pub mod endpoint;
pub mod eval;
pub mod manifest;
pub mod qaforge;
pub mod schema;
pub mod seed;

pub use schema::{
    AttributeSchema, AttributeSpec, FaceImageRef, GoldLabel, OptionChoice, PersonAnnotation,
    QAPair, SourceDataset, TaskKind, YesNo,
};
