use serde::{Deserialize, Serialize};

use super::clean::{clean_labels, CleaningConfig, DropRecord};
use super::parse::parse_annotation_response;
use super::prompt::render_annotation_prompt;
use crate::batch::{run_ordered, Abort, Limits};
use crate::endpoint::{Endpoint, EndpointRequest};
use crate::schema::{AttributeSchema, FaceImageRef, PersonAnnotation, Record, Violation};

/// What is sent for one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRequest {
    pub image: FaceImageRef,
    pub prompt: String,
    pub attempt: u32,
}

impl AnnotationRequest {
    pub fn to_endpoint_request(&self) -> EndpointRequest {
        EndpointRequest::new(self.image.uri.clone(), self.prompt.clone())
    }
}

/// Verbatim service output, kept for audits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAnnotationResponse {
    pub image_id: String,
    pub response_text: String,
    pub latency_ms: u64,
    pub endpoint_id: String,
    pub attempts: u32,
}

impl Record for RawAnnotationResponse {
    const KIND: &'static str = "raw_annotation_response";
    const FIELDS: &'static [&'static str] =
        &["image_id", "response_text", "latency_ms", "endpoint_id", "attempts"];

    fn validate(&self) -> Result<(), Violation> {
        if self.image_id.is_empty() {
            return Err(Violation::new("image_id", "must be non-empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    Transport,
    Parse,
    CleanedEmpty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationFailure {
    pub image: FaceImageRef,
    pub reason: FailureReason,
    pub detail: String,
    pub attempts: u32,
}

impl Record for AnnotationFailure {
    const KIND: &'static str = "annotation_failure";
    const FIELDS: &'static [&'static str] = &["image", "reason", "detail", "attempts"];

    fn validate(&self) -> Result<(), Violation> {
        self.image.check("image")
    }

    fn unique_key(&self) -> Option<(&'static str, String)> {
        Some(("image.id", self.image.id.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageOutcome {
    Annotated {
        persons: Vec<PersonAnnotation>,
        drops: Vec<DropRecord>,
        raw: RawAnnotationResponse,
    },
    Failed {
        failure: AnnotationFailure,
        drops: Vec<DropRecord>,
        raw: Option<RawAnnotationResponse>,
    },
}

#[derive(Debug)]
pub struct AnnotateRun {
    /// Input order; `None` where the batch aborted before the image.
    pub outcomes: Vec<Option<ImageOutcome>>,
    pub aborted: Option<Abort>,
}

impl AnnotateRun {
    fn completed(&self) -> impl Iterator<Item = &ImageOutcome> {
        self.outcomes.iter().flatten()
    }

    pub fn annotations(&self) -> Vec<PersonAnnotation> {
        self.completed()
            .flat_map(|o| match o {
                ImageOutcome::Annotated { persons, .. } => persons.clone(),
                ImageOutcome::Failed { .. } => Vec::new(),
            })
            .collect()
    }

    pub fn failures(&self) -> Vec<AnnotationFailure> {
        self.completed()
            .filter_map(|o| match o {
                ImageOutcome::Failed { failure, .. } => Some(failure.clone()),
                ImageOutcome::Annotated { .. } => None,
            })
            .collect()
    }

    pub fn drops(&self) -> Vec<DropRecord> {
        self.completed()
            .flat_map(|o| match o {
                ImageOutcome::Annotated { drops, .. } | ImageOutcome::Failed { drops, .. } => {
                    drops.clone()
                }
            })
            .collect()
    }

    pub fn raw_responses(&self) -> Vec<RawAnnotationResponse> {
        self.completed()
            .filter_map(|o| match o {
                ImageOutcome::Annotated { raw, .. } => Some(raw.clone()),
                ImageOutcome::Failed { raw, .. } => raw.clone(),
            })
            .collect()
    }
}

/// Annotate, parse and clean every image.
///
/// Each completed image yields at least one cleaned person or a failure
/// record. Output order is input order at any concurrency.
pub fn annotate_batch(
    images: &[FaceImageRef],
    endpoint: &dyn Endpoint,
    limits: &Limits,
    schema: &AttributeSchema,
    cleaning: &CleaningConfig,
) -> AnnotateRun {
    let prompt = render_annotation_prompt(schema);
    let run = run_ordered(
        images,
        endpoint,
        limits,
        |image| {
            AnnotationRequest {
                image: image.clone(),
                prompt: prompt.clone(),
                attempt: 1,
            }
            .to_endpoint_request()
        },
        |_, image, outcome| {
            let fail = |reason, detail: String, drops, raw| ImageOutcome::Failed {
                failure: AnnotationFailure {
                    image: image.clone(),
                    reason,
                    detail,
                    attempts: outcome.attempts,
                },
                drops,
                raw,
            };
            let response = match &outcome.result {
                Ok(r) => r,
                Err(e) => return fail(FailureReason::Transport, e.to_string(), Vec::new(), None),
            };
            let raw = RawAnnotationResponse {
                image_id: image.id.clone(),
                response_text: response.text.clone(),
                latency_ms: outcome.latency_ms,
                endpoint_id: endpoint.id().to_string(),
                attempts: outcome.attempts,
            };
            let parsed = match parse_annotation_response(&response.text, schema) {
                Ok(p) => p,
                Err(e) => return fail(FailureReason::Parse, e.reason, Vec::new(), Some(raw)),
            };
            let persons = parsed.into_annotations(image);
            let cleaned = clean_labels(&persons, schema, cleaning);
            let drops = cleaned.drop_records(&image.id);
            if cleaned.kept.is_empty() {
                let detail = format!("all {} parsed people dropped by cleaning", persons.len());
                return fail(FailureReason::CleanedEmpty, detail, drops, Some(raw));
            }
            ImageOutcome::Annotated {
                persons: cleaned.kept,
                drops,
                raw,
            }
        },
    );
    AnnotateRun {
        outcomes: run.outcomes,
        aborted: run.aborted,
    }
}
