//! Bounded-concurrency request runner shared by annotation and evaluation.
//!
//! Items are claimed in input order by up to `max_concurrency` workers and
//! their outcomes land in an index-addressed buffer, so the output order is
//! the input order whatever the completion order.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::endpoint::{Endpoint, EndpointError, EndpointRequest, EndpointResponse, ErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Limits {
    pub max_concurrency: usize,
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// Requests per second across all workers.
    pub qps_cap: Option<f64>,
    pub backoff_base: Duration,
    pub backoff_max: Duration,
    /// Abort the batch after this many items in a row failed at transport level.
    pub abort_after: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_concurrency: 4,
            max_retries: 3,
            qps_cap: None,
            backoff_base: Duration::from_millis(500),
            backoff_max: Duration::from_secs(30),
            abort_after: 20,
        }
    }
}

impl Limits {
    /// No sleeping between retries; for mocks and tests.
    pub fn immediate(max_concurrency: usize, max_retries: u32) -> Self {
        Self {
            max_concurrency,
            max_retries,
            backoff_base: Duration::ZERO,
            backoff_max: Duration::ZERO,
            ..Self::default()
        }
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry.saturating_sub(1)).unwrap_or(u32::MAX);
        self.backoff_base
            .checked_mul(factor)
            .unwrap_or(self.backoff_max)
            .min(self.backoff_max)
    }
}

/// Result of one request after retries.
#[derive(Debug, Clone)]
pub struct CallOutcome {
    pub result: Result<EndpointResponse, EndpointError>,
    /// Attempts made, including the successful one.
    pub attempts: u32,
    pub latency_ms: u64,
}

/// Spaces request starts at least `1/qps` apart.
struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(qps: f64) -> Self {
        Self {
            interval: Duration::from_secs_f64(1.0 / qps),
            next: Mutex::new(Instant::now()),
        }
    }

    fn acquire(&self) {
        let wait = {
            let mut next = self.next.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let start = (*next).max(now);
            *next = start + self.interval;
            start - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

fn call_with_retry(
    endpoint: &dyn Endpoint,
    request: &EndpointRequest,
    limits: &Limits,
    limiter: Option<&RateLimiter>,
) -> CallOutcome {
    let mut attempts = 0;
    loop {
        attempts += 1;
        if let Some(l) = limiter {
            l.acquire();
        }
        let started = Instant::now();
        let result = endpoint.call(request);
        let measured = started.elapsed().as_millis() as u64;
        match result {
            Ok(resp) => {
                let latency_ms = resp.latency_ms.unwrap_or(measured);
                return CallOutcome {
                    result: Ok(resp),
                    attempts,
                    latency_ms,
                };
            }
            Err(e) if e.kind == ErrorKind::Retryable && attempts <= limits.max_retries => {
                let delay = limits.backoff(attempts);
                if !delay.is_zero() {
                    thread::sleep(delay);
                }
            }
            Err(e) => {
                return CallOutcome {
                    result: Err(e),
                    attempts,
                    latency_ms: measured,
                }
            }
        }
    }
}

/// Why a batch stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abort {
    pub reason: String,
    /// Index of the item whose failure triggered the abort.
    pub at_index: usize,
}

#[derive(Debug)]
pub struct BatchRun<O> {
    /// `None` for items never attempted because the batch aborted.
    pub outcomes: Vec<Option<O>>,
    pub aborted: Option<Abort>,
}

impl<O> BatchRun<O> {
    pub fn completed(&self) -> impl Iterator<Item = &O> {
        self.outcomes.iter().flatten()
    }
}

/// Run one request per item and map each outcome with `finish`.
///
/// A fatal endpoint error aborts immediately; `limits.abort_after`
/// consecutive exhausted items abort as well. Items already in flight
/// finish and are kept.
pub fn run_ordered<I, O, R, F>(
    items: &[I],
    endpoint: &dyn Endpoint,
    limits: &Limits,
    make_request: R,
    finish: F,
) -> BatchRun<O>
where
    I: Sync,
    O: Send,
    R: Fn(&I) -> EndpointRequest + Sync,
    F: Fn(usize, &I, CallOutcome) -> O + Sync,
{
    let slots: Mutex<Vec<Option<O>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let consecutive = AtomicUsize::new(0);
    let abort: Mutex<Option<Abort>> = Mutex::new(None);
    let limiter = limits.qps_cap.filter(|q| *q > 0.0).map(RateLimiter::new);
    let workers = limits.max_concurrency.max(1).min(items.len().max(1));

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= items.len() {
                    break;
                }
                let item = &items[index];
                let request = make_request(item);
                let outcome = call_with_retry(endpoint, &request, limits, limiter.as_ref());
                match &outcome.result {
                    Ok(_) => consecutive.store(0, Ordering::SeqCst),
                    Err(e) => {
                        let run = consecutive.fetch_add(1, Ordering::SeqCst) + 1;
                        let reason = if e.kind == ErrorKind::Fatal {
                            Some(format!("fatal endpoint error: {}", e.message))
                        } else if limits.abort_after > 0 && run >= limits.abort_after {
                            Some(format!(
                                "{run} consecutive endpoint failures, last: {}",
                                e.message
                            ))
                        } else {
                            None
                        };
                        if let Some(reason) = reason {
                            stop.store(true, Ordering::SeqCst);
                            let mut slot = abort.lock().expect("abort poisoned");
                            if slot.is_none() {
                                *slot = Some(Abort {
                                    reason,
                                    at_index: index,
                                });
                            }
                        }
                    }
                }
                let out = finish(index, item, outcome);
                slots.lock().expect("slots poisoned")[index] = Some(out);
            });
        }
    });

    BatchRun {
        outcomes: slots.into_inner().expect("slots poisoned"),
        aborted: abort.into_inner().expect("abort poisoned"),
    }
}
