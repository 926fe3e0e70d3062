//! Inference endpoint contract.
//!
//! One request carries one image locator (or inline bytes) and one prompt;
//! one response carries free text. Transport details live with the
//! implementor; this crate only distinguishes retryable from fatal errors.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Environment variable holding the bearer token, unless overridden.
pub const DEFAULT_CREDENTIAL_ENV: &str = "FACEQA_API_TOKEN";

/// Wire body sent to an endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointRequest {
    pub image_uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_base64: Option<String>,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
}

impl EndpointRequest {
    pub fn new(image_uri: impl Into<String>, prompt: impl Into<String>) -> Self {
        Self {
            image_uri: image_uri.into(),
            image_base64: None,
            prompt: prompt.into(),
            system: None,
        }
    }
}

/// Wire body returned by an endpoint. `latency_ms` is optional server-side
/// timing; when absent the runner records its own measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
}

impl EndpointResponse {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            latency_ms: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Timeouts, rate limits, server errors.
    Retryable,
    /// Authentication and other errors that will not go away on retry.
    Fatal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointError {
    pub kind: ErrorKind,
    pub message: String,
}

impl EndpointError {
    pub fn retryable(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Retryable,
            message: message.into(),
        }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Fatal,
            message: message.into(),
        }
    }
}

impl fmt::Display for EndpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Retryable => "retryable",
            ErrorKind::Fatal => "fatal",
        };
        write!(f, "{kind} endpoint error: {}", self.message)
    }
}

impl std::error::Error for EndpointError {}

pub trait Endpoint: Send + Sync {
    fn id(&self) -> &str;
    fn call(&self, request: &EndpointRequest) -> Result<EndpointResponse, EndpointError>;
}

impl<E: Endpoint + ?Sized> Endpoint for &E {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn call(&self, request: &EndpointRequest) -> Result<EndpointResponse, EndpointError> {
        (**self).call(request)
    }
}

impl<E: Endpoint + ?Sized> Endpoint for Box<E> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn call(&self, request: &EndpointRequest) -> Result<EndpointResponse, EndpointError> {
        (**self).call(request)
    }
}

pub mod mock {
    //! Deterministic endpoints for tests and offline rehearsal.

    use std::collections::BTreeMap;

    use rand::seq::IndexedRandom;
    use rand::Rng;

    use super::*;
    use crate::annotator::{render_annotation_response, ParsedPerson, ANNOTATION_PROMPT_PREAMBLE};
    use crate::qaforge::templates::{MC_INSTRUCTION, YES_NO_INSTRUCTION};
    use crate::schema::AttributeSchema;
    use crate::seed;

    /// Endpoint backed by a closure.
    pub struct FnEndpoint<F> {
        id: String,
        f: F,
    }

    impl<F> FnEndpoint<F>
    where
        F: Fn(&EndpointRequest) -> Result<EndpointResponse, EndpointError> + Send + Sync,
    {
        pub fn new(id: impl Into<String>, f: F) -> Self {
            Self { id: id.into(), f }
        }
    }

    impl<F> Endpoint for FnEndpoint<F>
    where
        F: Fn(&EndpointRequest) -> Result<EndpointResponse, EndpointError> + Send + Sync,
    {
        fn id(&self) -> &str {
            &self.id
        }
        fn call(&self, request: &EndpointRequest) -> Result<EndpointResponse, EndpointError> {
            (self.f)(request)
        }
    }

    /// Answers every request with a pure function of the request.
    ///
    /// Annotation prompts get a well-formed multi-person attribute listing;
    /// questions get an answer in the format their instruction asks for.
    /// Reports a synthetic server latency so outputs are reproducible.
    pub struct HashMock {
        id: String,
        seed: u64,
        schema: AttributeSchema,
    }

    impl HashMock {
        pub fn new(seed: u64) -> Self {
            Self {
                id: format!("mock-hash-{seed}"),
                seed,
                schema: AttributeSchema::builtin(),
            }
        }

        fn annotation(&self, uri: &str) -> String {
            const POSITIONS: [&str; 3] = ["leftmost", "center", "rightmost"];
            const OPENERS: [&str; 4] = [
                "The person has a calm expression and neat hair.",
                "A face with clear skin and bright eyes.",
                "This person shows a relaxed expression with visible eyes.",
                "The face is well lit, the hair is tidy.",
            ];
            let mut rng = seed::rng_for(self.seed, &["annotation", uri]);
            let n_persons = rng.random_range(1..=3usize);
            let mut persons = Vec::new();
            for (i, slot) in POSITIONS.iter().take(n_persons).enumerate() {
                let mut attributes = BTreeMap::new();
                for spec in self.schema.describable() {
                    if rng.random_bool(0.7) {
                        let v = spec.allowed_values.choose(&mut rng).expect("non-empty");
                        attributes.insert(spec.name.clone(), v.clone());
                    }
                }
                if rng.random_bool(0.1) {
                    attributes.insert("Expression".into(), "Cannot determine.".into());
                }
                let position = if n_persons == 1 { "center" } else { slot };
                let caption = OPENERS.choose(&mut rng).expect("non-empty").to_string();
                persons.push(ParsedPerson {
                    person_index: i as u32,
                    position: Some(position.to_string()),
                    caption,
                    attributes,
                });
            }
            render_annotation_response(&self.schema, None, &persons)
        }

        fn answer(&self, req: &EndpointRequest) -> String {
            let mut rng = seed::rng_for(self.seed, &["answer", &req.image_uri, &req.prompt]);
            let q = req.prompt.trim_end();
            if q.ends_with(YES_NO_INSTRUCTION) {
                return if rng.random_bool(0.5) { "Yes" } else { "No" }.to_string();
            }
            if q.ends_with(MC_INSTRUCTION) {
                let letters: Vec<char> = ('A'..='Z')
                    .filter(|c| q.contains(&format!(" {c}.")) || q.contains(&format!("?{c}.")))
                    .collect();
                if let Some(c) = letters.choose(&mut rng) {
                    return format!("{c}");
                }
                return "A".to_string();
            }
            if q.contains("number from 1 to 100") {
                return format!("{}", rng.random_range(1..=90u32));
            }
            "The person in the picture has a neutral expression and short hair.".to_string()
        }
    }

    impl Endpoint for HashMock {
        fn id(&self) -> &str {
            &self.id
        }

        fn call(&self, req: &EndpointRequest) -> Result<EndpointResponse, EndpointError> {
            let text = if req.prompt.starts_with(ANNOTATION_PROMPT_PREAMBLE) {
                self.annotation(&req.image_uri)
            } else {
                self.answer(req)
            };
            let latency = seed::derive_seed(self.seed, &["latency", &req.image_uri]) % 900 + 100;
            Ok(EndpointResponse {
                text,
                latency_ms: Some(latency),
            })
        }
    }
}
