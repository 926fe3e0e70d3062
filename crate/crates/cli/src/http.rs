//! JSON-over-HTTP inference endpoint.
//!
//! Each call POSTs an [`EndpointRequest`] as JSON and expects a body with at
//! least a `text` field. When the image URI names a readable local file its
//! bytes are sent inline as base64.

use std::time::Duration;

use base64::Engine as _;
use reqwest::blocking::Client;
use reqwest::StatusCode;

use faceqa_core::endpoint::{Endpoint, EndpointError, EndpointRequest, EndpointResponse};

pub struct HttpEndpoint {
    url: String,
    token: Option<String>,
    client: Client,
}

impl HttpEndpoint {
    pub fn new(url: &str, token: Option<String>, timeout: Duration) -> anyhow::Result<Self> {
        let client = Client::builder().timeout(timeout).build()?;
        Ok(Self {
            url: url.to_string(),
            token,
            client,
        })
    }
}

/// 408, 429 and 5xx are worth retrying; any other failure status is fatal.
pub fn classify(status: StatusCode, body: &str) -> EndpointError {
    let msg = format!("HTTP {status}: {}", body.chars().take(200).collect::<String>());
    if status == StatusCode::TOO_MANY_REQUESTS || status == StatusCode::REQUEST_TIMEOUT || status.is_server_error() {
        EndpointError::retryable(msg)
    } else {
        EndpointError::fatal(msg)
    }
}

impl Endpoint for HttpEndpoint {
    fn id(&self) -> &str {
        &self.url
    }

    fn call(&self, request: &EndpointRequest) -> Result<EndpointResponse, EndpointError> {
        let mut body = request.clone();
        if body.image_base64.is_none() {
            if let Ok(bytes) = std::fs::read(&request.image_uri) {
                body.image_base64 = Some(base64::engine::general_purpose::STANDARD.encode(bytes));
            }
        }
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| EndpointError::retryable(format!("transport: {e}")))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| EndpointError::retryable(format!("reading body: {e}")))?;
        if !status.is_success() {
            return Err(classify(status, &text));
        }
        serde_json::from_str::<EndpointResponse>(&text)
            .map_err(|e| EndpointError::retryable(format!("malformed response body: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faceqa_core::endpoint::ErrorKind;

    #[test]
    fn status_classes() {
        assert_eq!(classify(StatusCode::UNAUTHORIZED, "").kind, ErrorKind::Fatal);
        assert_eq!(classify(StatusCode::FORBIDDEN, "").kind, ErrorKind::Fatal);
        assert_eq!(classify(StatusCode::TOO_MANY_REQUESTS, "").kind, ErrorKind::Retryable);
        assert_eq!(classify(StatusCode::BAD_GATEWAY, "").kind, ErrorKind::Retryable);
        assert_eq!(classify(StatusCode::REQUEST_TIMEOUT, "").kind, ErrorKind::Retryable);
    }
}
