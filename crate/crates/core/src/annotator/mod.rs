//! Attribute re-annotation: prompt, response parsing, label cleaning and the
//! batch runner that ties them to an endpoint.

mod batch;
mod clean;
mod parse;
mod prompt;

pub use batch::{
    annotate_batch, AnnotateRun, AnnotationFailure, AnnotationRequest, FailureReason,
    ImageOutcome, RawAnnotationResponse,
};
pub use clean::{
    clean_labels, describes_face, AttributeDrop, CleaningConfig, CleaningOutcome, DropLevel,
    DropReason, DropRecord, PersonDrop,
};
pub use parse::{
    parse_annotation_response, render_annotation_response, ParseFailure, ParsedPerson,
    ParsedResponse,
};
pub use prompt::{attribute_line, render_annotation_prompt, ANNOTATION_PROMPT_PREAMBLE};
