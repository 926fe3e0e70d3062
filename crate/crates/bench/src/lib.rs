//! Benchmark fixtures built from the mock endpoint, so timings see realistic text.

use faceqa_core::annotator::render_annotation_prompt;
use faceqa_core::batch::Limits;
use faceqa_core::endpoint::mock::HashMock;
use faceqa_core::endpoint::{Endpoint, EndpointRequest};
use faceqa_core::eval::{run_benchmark, EvalOptions, EvalRecord};
use faceqa_core::qaforge::{reformulate_dataset, AdapterOptions, Dataset};
use faceqa_core::{AttributeSchema, QAPair};

/// Replies of the kind seen from real models, including ones no rule accepts.
pub const FREE_TEXT: &[&str] = &[
    "Yes",
    "no.",
    "Yes, the person in the picture is wearing glasses.",
    "I cannot tell from this image.",
    "Answer: B",
    "(C) Happiness",
    "The correct option is D. Surprise",
    "The person looks to be around 34 years old.",
    "Approximately 60-65.",
    "Looking closely, I would say the expression is neutral, so A.",
];

pub fn annotation_responses(n: usize) -> Vec<String> {
    let schema = AttributeSchema::builtin();
    let prompt = render_annotation_prompt(&schema);
    let mock = HashMock::new(1);
    (0..n)
        .map(|i| {
            let req = EndpointRequest {
                image_uri: format!("/bench/img{i}.jpg"),
                image_base64: None,
                prompt: prompt.clone(),
                system: None,
            };
            mock.call(&req).expect("mock endpoint never fails").text
        })
        .collect()
}

fn agedb_labels(n: usize) -> String {
    let mut s = String::from("image,age,gender\n");
    for i in 0..n {
        s += &format!("{i}.jpg,{},{}\n", 1 + (i * 37) % 100, if i % 2 == 0 { "m" } else { "f" });
    }
    s
}

fn rafdb_labels(n: usize) -> String {
    (0..n).map(|i| format!("test_{i:04}.jpg {}\n", 1 + (i * 5) % 7)).collect()
}

/// Questions from two reformulated datasets, about `n` per dataset and task.
pub fn questions(n: usize) -> Vec<QAPair> {
    let opts = AdapterOptions {
        image_root: "/bench/".to_string(),
        seed: 9,
        shuffle_options: true,
        describe_attributes: true,
    };
    let mut qa = reformulate_dataset(Dataset::Agedb, &agedb_labels(n), &opts).expect("valid labels").pairs;
    qa.extend(reformulate_dataset(Dataset::Rafdb, &rafdb_labels(n), &opts).expect("valid labels").pairs);
    qa
}

pub fn eval_records(n: usize) -> Vec<EvalRecord> {
    let qa = questions(n);
    let opts = EvalOptions {
        benchmark: "bench".to_string(),
        system: None,
    };
    run_benchmark(&qa, &HashMock::new(2), &Limits::immediate(1, 0), &opts).completed()
}
