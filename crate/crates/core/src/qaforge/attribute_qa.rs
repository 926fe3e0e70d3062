use rand::seq::{IndexedRandom, IteratorRandom};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::shuffle::shuffle_options;
use super::templates::{
    attribute_mc_templates, attribute_yes_no_templates, gender_yes_no_template, QuestionTemplate,
    Slots,
};
use super::ForgeError;
use crate::schema::attributes::normalize_value;
use crate::schema::{AttributeSchema, GoldLabel, PersonAnnotation, QAPair, Record, TaskKind, Violation, YesNo};
use crate::seed;

pub const ATTRIBUTE_CATEGORY: &str = "face_attribute";

/// A question variant not emitted for an attribute, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaSkip {
    pub image_id: String,
    pub person_index: u32,
    pub attribute: String,
    pub variant: String,
    pub reason: String,
}

impl Record for QaSkip {
    const KIND: &'static str = "qa_skip";
    const FIELDS: &'static [&'static str] = &["image_id", "person_index", "attribute", "variant", "reason"];

    fn validate(&self) -> Result<(), Violation> {
        if self.reason.trim().is_empty() {
            return Err(Violation::new("reason", "must be non-empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeQa {
    pub pairs: Vec<QAPair>,
    pub skipped: Vec<QaSkip>,
}

/// Yes/no (true value), yes/no (distractor) and multiple-choice questions
/// for every attribute of a cleaned annotation.
///
/// Output depends only on the annotation, `multi_face`, `seed` and the
/// schema; attributes are visited in schema order.
pub fn gen_attribute_qa(
    annotation: &PersonAnnotation,
    multi_face: bool,
    seed: u64,
    schema: &AttributeSchema,
) -> Result<AttributeQa, ForgeError> {
    let position = if multi_face {
        match annotation.position.as_deref().map(str::trim) {
            Some(p) if !p.is_empty() => Some(p),
            _ => {
                return Err(ForgeError::MissingPosition {
                    image: annotation.image.id.clone(),
                    person_index: annotation.person_index,
                })
            }
        }
    } else {
        None
    };

    let mut specs = Vec::with_capacity(annotation.attributes.len());
    for (name, value) in &annotation.attributes {
        let spec = schema
            .find(name)
            .filter(|s| !s.is_position())
            .ok_or_else(|| ForgeError::UnknownAttribute(name.clone()))?;
        specs.push((spec, value.as_str()));
    }
    specs.sort_by_key(|(spec, _)| spec.slot);

    let person = annotation.person_index.to_string();
    let mut rng = seed::rng_for(seed, &["attribute_qa", &annotation.image.id, &person]);
    let yes_no = attribute_yes_no_templates();
    let mc = attribute_mc_templates();
    let gender = gender_yes_no_template();
    let mut out = AttributeQa::default();

    for (spec, value) in specs {
        let attribute = spec.name.to_lowercase();
        let slug = attribute.replace(' ', "_");
        let id = |variant: &str| {
            format!("{}#p{}/{slug}/{variant}", annotation.image.id, annotation.person_index)
        };
        let pair = |variant: &str, task, question: String, options, gold| QAPair {
            id: id(variant),
            image: annotation.image.clone(),
            task,
            category: ATTRIBUTE_CATEGORY.to_string(),
            question,
            options,
            gold,
            aux_description: None,
        };
        let skip = |variant: &str, reason: &str| QaSkip {
            image_id: annotation.image.id.clone(),
            person_index: annotation.person_index,
            attribute: spec.name.clone(),
            variant: variant.to_string(),
            reason: reason.to_string(),
        };
        let template = |rng: &mut dyn RngCore| -> &QuestionTemplate {
            if attribute == "gender" {
                &gender
            } else {
                yes_no.choose(rng).expect("non-empty")
            }
        };
        let fill = |t: &QuestionTemplate, value: &str, options: &[_]| {
            t.fill(&Slots {
                position,
                attribute: &attribute,
                value,
                description: &spec.description,
                options,
            })
        };

        let shown = value.trim().to_string();
        let t = template(&mut rng);
        out.pairs.push(pair(
            "yes",
            TaskKind::YesNo,
            fill(t, &shown, &[]),
            None,
            GoldLabel::Boolean(YesNo::Yes),
        ));

        let key = normalize_value(value);
        let others: Vec<&String> = spec
            .allowed_values
            .iter()
            .filter(|v| normalize_value(v) != key)
            .collect();

        match others.choose(&mut rng) {
            Some(distractor) => {
                let t = template(&mut rng);
                out.pairs.push(pair(
                    "no",
                    TaskKind::YesNo,
                    fill(t, distractor, &[]),
                    None,
                    GoldLabel::Boolean(YesNo::No),
                ));
            }
            None => out.skipped.push(skip("no", "no other allowed value")),
        }

        if others.len() + 1 >= 3 {
            let n = others.len().min(3);
            let mut options = vec![shown.clone()];
            options.extend(others.iter().copied().choose_multiple(&mut rng, n).into_iter().cloned());
            let (choices, letter) = shuffle_options(&options, 0, rng.next_u64())?;
            let t = mc.choose(&mut rng).expect("non-empty");
            out.pairs.push(pair(
                "mc",
                TaskKind::MultipleChoice,
                fill(t, "", &choices),
                Some(choices),
                GoldLabel::Letter(letter),
            ));
        } else {
            out.skipped.push(skip("mc", "fewer than 3 candidate values"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FaceImageRef, SourceDataset};
    use std::collections::BTreeMap;

    fn anno(attrs: &[(&str, &str)], position: Option<&str>) -> PersonAnnotation {
        PersonAnnotation {
            image: FaceImageRef::new("img-7", "laion/7.jpg", SourceDataset::LaionFace),
            person_index: 0,
            position: position.map(str::to_string),
            caption: "A face with short hair.".into(),
            attributes: attrs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect::<BTreeMap<_, _>>(),
        }
    }

    #[test]
    fn gender_single_face() {
        let out = gen_attribute_qa(&anno(&[("gender", "male")], None), false, 1, &AttributeSchema::builtin()).unwrap();
        assert_eq!(
            out.pairs[0].question,
            "Is the person in the picture male? Answer directly with Yes or No."
        );
        assert_eq!(out.pairs[0].gold, GoldLabel::Boolean(YesNo::Yes));
        assert_eq!(out.pairs[1].question, "Is the person in the picture female? Answer directly with Yes or No.");
        assert_eq!(out.pairs[1].gold, GoldLabel::Boolean(YesNo::No));
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].variant, "mc");
    }

    #[test]
    fn positional_phrase_iff_multi_face() {
        let schema = AttributeSchema::builtin();
        let a = anno(&[("Hair color", "black")], Some("leftmost"));
        let multi = gen_attribute_qa(&a, true, 3, &schema).unwrap();
        assert_eq!(multi.pairs.len(), 3);
        assert!(multi.pairs.iter().all(|p| p.question.contains("the leftmost face in the image")));
        let single = gen_attribute_qa(&a, false, 3, &schema).unwrap();
        assert!(single.pairs.iter().all(|p| !p.question.contains("leftmost")));
    }

    #[test]
    fn multi_face_without_position_is_an_error() {
        let err = gen_attribute_qa(&anno(&[("gender", "male")], None), true, 1, &AttributeSchema::builtin());
        assert!(matches!(err, Err(ForgeError::MissingPosition { .. })));
    }

    #[test]
    fn seeds_change_order_and_repeat_exactly() {
        let schema = AttributeSchema::builtin();
        let a = anno(&[("race", "East Asian"), ("Hair color", "brown"), ("Eye Shape", "Almond")], None);
        let s1 = gen_attribute_qa(&a, false, 1, &schema).unwrap();
        assert_eq!(s1, gen_attribute_qa(&a, false, 1, &schema).unwrap());
        let differs = (2..10).any(|s| {
            let other = gen_attribute_qa(&a, false, s, &schema).unwrap();
            other.pairs.iter().zip(&s1.pairs).any(|(x, y)| x.options != y.options)
        });
        assert!(differs);
    }

    #[test]
    fn mc_gold_points_at_true_value_and_templates_hold() {
        let schema = AttributeSchema::builtin();
        let a = anno(&[("race", "South Asian"), ("Hair length", "short"), ("Nose size", "big nose")], None);
        for s in 0..50 {
            let out = gen_attribute_qa(&a, false, s, &schema).unwrap();
            for p in &out.pairs {
                crate::schema::Record::validate(p).unwrap();
                match (&p.task, &p.gold) {
                    (TaskKind::MultipleChoice, GoldLabel::Letter(l)) => {
                        let text = p.option_text(*l).unwrap();
                        assert!(["South Asian", "short", "big nose"].contains(&text), "{text}");
                        assert!(p.question.ends_with(super::super::MC_INSTRUCTION));
                    }
                    (TaskKind::YesNo, _) => assert!(p.question.ends_with(super::super::YES_NO_INSTRUCTION)),
                    _ => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn unknown_attribute_rejected() {
        let err = gen_attribute_qa(&anno(&[("aura", "calm")], None), false, 1, &AttributeSchema::builtin());
        assert!(matches!(err, Err(ForgeError::UnknownAttribute(_))));
    }
}
