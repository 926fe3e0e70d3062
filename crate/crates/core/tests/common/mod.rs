//! Generators and brute-force oracles shared by the integration tests.
//! Oracles here are written from the record definitions, not from the
//! library code they check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use faceqa_core::annotator::{CleaningConfig, ParsedPerson};
use faceqa_core::eval::{Answer, EvalRecord, ParseRule, ParsedAnswer, UnparseableReason};
use faceqa_core::qaforge::lettered;
use faceqa_core::{AttributeSchema, FaceImageRef, GoldLabel, PersonAnnotation, QAPair, SourceDataset, TaskKind, YesNo};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

const WORDS: [&str; 20] = [
    "smiling", "calm", "woman", "man", "bright", "soft", "light", "outdoor", "portrait", "close",
    "looking", "toward", "camera", "warm", "with", "a", "the", "tidy", "gentle", "studio",
];
const POSITIONS: [&str; 7] = ["left", "center", "right", "leftmost", "second from left", "far right", "background"];

pub fn sentence(rng: &mut impl Rng) -> String {
    let n = rng.random_range(3..=9);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

/// People as an annotation service would describe them.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub image_caption: Option<String>,
    pub persons: Vec<ParsedPerson>,
}

pub fn random_set(rng: &mut impl Rng, schema: &AttributeSchema) -> AnnotationSet {
    let n = rng.random_range(1..=4);
    let specs: Vec<_> = schema.describable().collect();
    let image_caption = (n > 1 && rng.random_bool(0.5)).then(|| sentence(rng));
    let persons = (0..n)
        .map(|i| {
            let k = rng.random_range(1..=10);
            let attributes = specs
                .choose_multiple(rng, k)
                .map(|s| (s.name.clone(), s.allowed_values.choose(rng).unwrap().clone()))
                .collect();
            ParsedPerson {
                person_index: i as u32,
                position: rng.random_bool(0.8).then(|| POSITIONS.choose(rng).unwrap().to_string()),
                caption: if rng.random_bool(0.7) { sentence(rng) } else { String::new() },
                attributes,
            }
        })
        .collect();
    AnnotationSet { image_caption, persons }
}

/// Writes a set as `* Name: Value` bullets with varied headers, bullet
/// marks, name casing and attribute order.
pub fn render_bullets(set: &AnnotationSet, rng: &mut impl Rng) -> String {
    let mut out = String::new();
    if let Some(c) = &set.image_caption {
        out += &format!("{c}\n\n");
    }
    let headers = set.persons.len() > 1 || set.image_caption.is_some() || rng.random_bool(0.5);
    for (i, p) in set.persons.iter().enumerate() {
        let mut position_in_header = false;
        if headers {
            let n = i + 1;
            let header = match (rng.random_range(0..4), &p.position) {
                (0, _) => format!("Person {n}:"),
                (1, _) => format!("**Person {n}**"),
                (2, _) => format!("### Person {n}"),
                (_, Some(pos)) => {
                    position_in_header = true;
                    format!("Person {n} ({pos}):")
                }
                (_, None) => format!("Face {n}:"),
            };
            out += &header;
            out.push('\n');
        }
        if !p.caption.is_empty() {
            out += &p.caption;
            out.push('\n');
        }
        if let Some(pos) = &p.position {
            if !position_in_header || rng.random_bool(0.5) {
                out += &format!("{} Position: {pos}\n", mark(rng));
            }
        }
        let mut attrs: Vec<_> = p.attributes.iter().collect();
        attrs.shuffle(rng);
        for (name, value) in attrs {
            let shown = match rng.random_range(0..3) {
                0 => name.clone(),
                1 => name.to_lowercase(),
                _ => format!("**{name}**"),
            };
            out += &format!("{} {shown}: {value}\n", mark(rng));
        }
        out.push('\n');
    }
    out
}

fn mark(rng: &mut impl Rng) -> &'static str {
    ["*", "-", "•", "1."].choose(rng).unwrap()
}

pub const CATEGORIES: [(&str, TaskKind); 7] = [
    ("age", TaskKind::Age),
    ("gender", TaskKind::YesNo),
    ("au", TaskKind::YesNo),
    ("attribute", TaskKind::YesNo),
    ("expression", TaskKind::MultipleChoice),
    ("eye_shape", TaskKind::MultipleChoice),
    ("caption", TaskKind::Description),
];

pub fn eval_record(i: usize, category: &str, task: TaskKind, gold: GoldLabel, answer: Answer) -> EvalRecord {
    let options = (task == TaskKind::MultipleChoice)
        .then(|| lettered(&["one".into(), "two".into(), "three".into(), "four".into()]).unwrap());
    let parsed = match answer {
        Answer::Unparseable(r) => ParsedAnswer::unparseable(r),
        a => ParsedAnswer { answer: a, raw_excerpt: String::new(), rule: Some(ParseRule::FreeText) },
    };
    EvalRecord {
        benchmark: "synthetic".into(),
        endpoint_id: "fixture".into(),
        qa: QAPair {
            id: format!("q{i}"),
            image: FaceImageRef::new(format!("img{i}"), format!("img{i}.jpg"), SourceDataset::Other),
            task,
            category: category.into(),
            question: "?".into(),
            options,
            gold,
            aux_description: None,
        },
        response: Some(String::new()),
        latency_ms: 0,
        attempts: 1,
        parsed,
        error: None,
    }
}

pub fn random_eval_set(rng: &mut impl Rng, max: usize) -> Vec<EvalRecord> {
    let n = rng.random_range(1..=max);
    (0..n)
        .map(|i| {
            let (category, task) = *CATEGORIES.choose(rng).unwrap();
            let missed = rng.random_bool(0.15);
            let (gold, answer) = match task {
                TaskKind::Age => (
                    GoldLabel::Number(rng.random_range(1..=100)),
                    Answer::Number(rng.random_range(1..=100)),
                ),
                TaskKind::YesNo => {
                    let yn = |b| if b { YesNo::Yes } else { YesNo::No };
                    (GoldLabel::Boolean(yn(rng.random_bool(0.5))), Answer::YesNo(yn(rng.random_bool(0.5))))
                }
                TaskKind::MultipleChoice => {
                    let l = |r: &mut dyn rand::RngCore| (b'A' + r.random_range(0..4u8)) as char;
                    (GoldLabel::Letter(l(rng)), Answer::Letter(l(rng)))
                }
                TaskKind::Description => (GoldLabel::Text("a face".into()), Answer::Text("a face".into())),
            };
            let answer = if missed && task != TaskKind::Description {
                Answer::Unparseable(UnparseableReason::NoMatch)
            } else {
                answer
            };
            eval_record(i, category, task, gold, answer)
        })
        .collect()
}

/// Metrics recomputed by direct counting over one category.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveStats {
    pub n: usize,
    pub correct: usize,
    pub parsed: usize,
    pub f1: Option<f64>,
    pub mae: Option<f64>,
}

fn answer_text(a: &Answer) -> Option<String> {
    match a {
        Answer::Number(n) => Some(n.to_string()),
        Answer::YesNo(y) => Some(y.to_string()),
        Answer::Letter(c) => Some(c.to_string()),
        Answer::Text(_) | Answer::Unparseable(_) => None,
    }
}

pub fn naive_stats(records: &[EvalRecord], category: Option<&str>) -> NaiveStats {
    let scored: Vec<&EvalRecord> = records
        .iter()
        .filter(|r| r.qa.task != TaskKind::Description)
        .filter(|r| category.is_none_or(|c| r.qa.category == c))
        .collect();
    let correct = scored
        .iter()
        .filter(|r| answer_text(&r.parsed.answer) == Some(r.qa.gold.to_string()))
        .count();
    let parsed = scored.iter().filter(|r| !matches!(r.parsed.answer, Answer::Unparseable(_))).count();

    let yes_no: Vec<_> = scored.iter().filter(|r| r.qa.task == TaskKind::YesNo).collect();
    let count = |g: &str, p: &str| {
        yes_no
            .iter()
            .filter(|r| r.qa.gold.to_string() == g && answer_text(&r.parsed.answer).as_deref() == Some(p))
            .count()
    };
    let (tp, fp, fn_) = (count("Yes", "Yes"), count("No", "Yes"), count("Yes", "No"));
    let f1 = (!yes_no.is_empty() && 2 * tp + fp + fn_ > 0).then(|| (2 * tp) as f64 / (2 * tp + fp + fn_) as f64);

    let errors: Vec<f64> = scored
        .iter()
        .filter_map(|r| match (&r.qa.gold, &r.parsed.answer) {
            (GoldLabel::Number(g), Answer::Number(p)) => Some((*g as f64 - *p as f64).abs()),
            _ => None,
        })
        .collect();
    let mae = (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64);
    NaiveStats { n: scored.len(), correct, parsed, f1, mae }
}

fn letters_only(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// Which people survive cleaning, and with which values, by exhaustive
/// checks of each rule.
pub fn brute_force_clean(
    persons: &[PersonAnnotation],
    schema: &AttributeSchema,
    config: &CleaningConfig,
) -> (BTreeMap<u32, BTreeMap<String, String>>, Vec<u32>) {
    let mut kept = BTreeMap::new();
    let mut dropped = Vec::new();
    for p in persons {
        let mut survivors = BTreeMap::new();
        for (name, value) in &p.attributes {
            let Some(spec) = schema.attributes.iter().find(|s| letters_only(&s.name) == letters_only(name)) else {
                continue;
            };
            if config.indeterminate.iter().any(|i| letters_only(i) == letters_only(value)) {
                continue;
            }
            let matched = spec.allowed_values.iter().find(|a| letters_only(a) == letters_only(value));
            match matched {
                Some(v) => {
                    survivors.insert(spec.name.clone(), v.clone());
                }
                None if spec.open_ended => {
                    survivors.insert(spec.name.clone(), value.trim().to_string());
                }
                None => {}
            }
        }
        let words: Vec<String> = p
            .caption
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        let phrase_in = |phrase: &str| {
            let parts: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
            !parts.is_empty() && words.windows(parts.len()).any(|w| w == parts.as_slice())
        };
        let about_face = config.face_keywords.iter().any(|k| phrase_in(k))
            || schema.describable().any(|s| phrase_in(&s.name));
        if survivors.len() >= config.min_attributes && about_face {
            kept.insert(p.person_index, survivors);
        } else {
            dropped.push(p.person_index);
        }
    }
    (kept, dropped)
}

/// Annotations with injected indeterminate, off-vocabulary and unknown
/// labels, and captions that do or do not mention the face.
pub fn noisy_corpus(rng: &mut impl Rng, schema: &AttributeSchema, n: usize) -> Vec<PersonAnnotation> {
    const NOISE: [&str; 6] = ["Cannot determine.", "unknown", "N/A", "Not visible", "unclear", "cannot determine"];
    const OFF: [&str; 4] = ["purple", "zigzag", "enormous", "checkered"];
    const CAPTIONS: [&str; 4] = [
        "A close portrait showing her face.",
        "The man has short hair and a beard.",
        "A sunny beach at noon.",
        "Two dogs running in a park.",
    ];
    let specs: Vec<_> = schema.describable().collect();
    (0..n)
        .map(|i| {
            let k = rng.random_range(0..=8);
            let mut attributes = BTreeMap::new();
            for s in specs.choose_multiple(rng, k) {
                let base = s.allowed_values.choose(rng).unwrap().clone();
                let value = match rng.random_range(0..10) {
                    0..=1 => NOISE.choose(rng).unwrap().to_string(),
                    2 => OFF.choose(rng).unwrap().to_string(),
                    3 => base.to_uppercase(),
                    4 => format!("{base}."),
                    _ => base,
                };
                attributes.insert(s.name.clone(), value);
            }
            if rng.random_bool(0.1) {
                attributes.insert("Tattoo".into(), "sleeve".into());
            }
            PersonAnnotation {
                image: FaceImageRef::new(format!("img{}", i / 2), format!("img{}.jpg", i / 2), SourceDataset::LaionFace),
                person_index: i as u32,
                position: Some("center".into()),
                caption: CAPTIONS.choose(rng).unwrap().to_string(),
                attributes,
            }
        })
        .collect()
}

/// Label files shaped like the public benchmark releases.
pub mod labels {
    use faceqa_core::qaforge::labels::{EMOTIONET_AUS, FACE_ATTRIBUTES};
    use rand::Rng;

    pub fn agedb(rng: &mut impl Rng, n: usize) -> String {
        let mut s = String::from("image,age,gender\n");
        for i in 0..n {
            let g = if rng.random_bool(0.5) { "m" } else { "f" };
            s += &format!("{i}.jpg,{},{g}\n", rng.random_range(1..=100));
        }
        s
    }

    pub fn rafdb(rng: &mut impl Rng, n: usize) -> String {
        (0..n).map(|i| format!("test_{i:04}.jpg {}\n", rng.random_range(1..=7))).collect()
    }

    pub fn emotionet(rng: &mut impl Rng, n: usize) -> String {
        let codes: Vec<&str> = EMOTIONET_AUS.iter().map(|a| a.code).collect();
        let mut s = format!("image,{}\n", codes.join(","));
        for i in 0..n {
            let v: Vec<&str> = codes.iter().map(|_| if rng.random_bool(0.3) { "1" } else { "0" }).collect();
            s += &format!("e{i}.jpg,{}\n", v.join(","));
        }
        s
    }

    pub fn lfwa(rng: &mut impl Rng, n: usize) -> String {
        let keys: Vec<&str> = FACE_ATTRIBUTES.iter().map(|a| a.key).collect();
        let mut s = format!("{n}\n{}\n", keys.join(" "));
        for i in 0..n {
            let v: Vec<&str> = keys.iter().map(|_| if rng.random_bool(0.4) { "1" } else { "-1" }).collect();
            s += &format!("lfw_{i}.jpg {}\n", v.join(" "));
        }
        s
    }
}
