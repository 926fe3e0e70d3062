use serde::{Deserialize, Serialize};

use super::answers::{parse_answer, ParsedAnswer, UnparseableReason};
use crate::batch::{run_ordered, Abort, Limits};
use crate::endpoint::{Endpoint, EndpointRequest};
use crate::schema::{QAPair, Record, TaskKind, Violation};

use super::answers::Answer;

/// One question sent to one endpoint, with its parsed answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRecord {
    pub benchmark: String,
    pub endpoint_id: String,
    pub qa: QAPair,
    pub response: Option<String>,
    pub latency_ms: u64,
    pub attempts: u32,
    pub parsed: ParsedAnswer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record for EvalRecord {
    const KIND: &'static str = "eval_record";
    const FIELDS: &'static [&'static str] = &[
        "benchmark",
        "endpoint_id",
        "qa",
        "response",
        "latency_ms",
        "attempts",
        "parsed",
        "error",
    ];

    fn validate(&self) -> Result<(), Violation> {
        if self.benchmark.trim().is_empty() {
            return Err(Violation::new("benchmark", "must be non-empty"));
        }
        self.qa
            .validate()
            .map_err(|v| Violation::new(format!("qa.{}", v.field), v.message))?;
        let ok = match (&self.parsed.answer, self.qa.task) {
            (Answer::Unparseable(_), _) => true,
            (Answer::Number(n), TaskKind::Age) => (1..=100).contains(n),
            (Answer::YesNo(_), TaskKind::YesNo) => true,
            (Answer::Letter(c), TaskKind::MultipleChoice) => self.qa.option_text(*c).is_some(),
            (Answer::Text(_), TaskKind::Description) => true,
            _ => false,
        };
        if !ok {
            return Err(Violation::new(
                "parsed",
                format!("{:?} is not a valid answer to a {} question", self.parsed.answer, self.qa.task),
            ));
        }
        Ok(())
    }

    fn unique_key(&self) -> Option<(&'static str, String)> {
        Some(("qa.id", self.qa.id.clone()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub benchmark: String,
    /// Sent as the system message; none by default.
    pub system: Option<String>,
}

#[derive(Debug)]
pub struct EvalRun {
    /// Input order; `None` where the batch aborted before the question.
    pub records: Vec<Option<EvalRecord>>,
    pub aborted: Option<Abort>,
}

impl EvalRun {
    pub fn completed(&self) -> Vec<EvalRecord> {
        self.records.iter().flatten().cloned().collect()
    }
}

/// Ask every question and parse the answers, in input order at any
/// concurrency.
pub fn run_benchmark(qa: &[QAPair], endpoint: &dyn Endpoint, limits: &Limits, opts: &EvalOptions) -> EvalRun {
    let run = run_ordered(
        qa,
        endpoint,
        limits,
        |q| EndpointRequest {
            system: opts.system.clone(),
            ..EndpointRequest::new(q.image.uri.clone(), q.question.clone())
        },
        |_, q, outcome| {
            let (response, parsed, error) = match &outcome.result {
                Ok(r) => (Some(r.text.clone()), parse_answer(q, &r.text), None),
                Err(e) => (
                    None,
                    ParsedAnswer::unparseable(UnparseableReason::EndpointError),
                    Some(e.to_string()),
                ),
            };
            EvalRecord {
                benchmark: opts.benchmark.clone(),
                endpoint_id: endpoint.id().to_string(),
                qa: q.clone(),
                response,
                latency_ms: outcome.latency_ms,
                attempts: outcome.attempts,
                parsed,
                error,
            }
        },
    );
    EvalRun {
        records: run.outcomes,
        aborted: run.aborted,
    }
}
