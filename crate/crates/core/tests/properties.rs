mod common;

use std::collections::BTreeMap;

use faceqa_core::annotator::{clean_labels, parse_annotation_response, CleaningConfig};
use faceqa_core::eval::{score, zero_shot_mean, RunMeta};
use faceqa_core::qaforge::labels::RAFDB_CLASSES;
use faceqa_core::qaforge::{
    build_zeroshot_suite, gen_attribute_qa, reformulate_dataset, reformulate_expression, reformulate_head_pose,
    AdapterOptions, Dataset, FeatureDescriptions, ZeroShotCategory, ZeroShotItem, MC_INSTRUCTION, YES_NO_INSTRUCTION,
};
use faceqa_core::schema::{read_records, write_records, Mode};
use faceqa_core::seed;
use faceqa_core::{AttributeSchema, FaceImageRef, GoldLabel, PersonAnnotation, QAPair, SourceDataset, TaskKind};
use proptest::prelude::*;

fn check_pair(qa: &QAPair) -> Result<(), TestCaseError> {
    match (&qa.task, &qa.gold) {
        (TaskKind::MultipleChoice, GoldLabel::Letter(c)) => {
            prop_assert!(qa.option_text(*c).is_some(), "{}: gold {c} has no option", qa.id);
            prop_assert!(qa.question.ends_with(MC_INSTRUCTION), "{}", qa.question);
        }
        (TaskKind::YesNo, GoldLabel::Boolean(_)) => {
            prop_assert!(qa.question.ends_with(YES_NO_INSTRUCTION), "{}", qa.question);
        }
        (TaskKind::Age, GoldLabel::Number(n)) => prop_assert!((1..=100).contains(n)),
        (t, g) => prop_assert!(false, "{t} question with gold {g:?}"),
    }
    Ok(())
}

fn annotated(seed: u64, schema: &AttributeSchema) -> Vec<PersonAnnotation> {
    let mut rng = seed::rng(seed);
    let set = common::random_set(&mut rng, schema);
    let image = FaceImageRef::new(format!("img{seed}"), "x.jpg", SourceDataset::LaionFace);
    set.persons
        .into_iter()
        .map(|p| PersonAnnotation {
            image: image.clone(),
            person_index: p.person_index,
            position: p.position,
            caption: p.caption,
            attributes: p.attributes,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rendered_responses_parse_back(seed in any::<u64>()) {
        let schema = AttributeSchema::builtin();
        let mut rng = seed::rng(seed);
        let set = common::random_set(&mut rng, &schema);
        let text = common::render_bullets(&set, &mut rng);
        let parsed = parse_annotation_response(&text, &schema).unwrap();
        prop_assert_eq!(&parsed.persons, &set.persons, "{}", text);
        prop_assert_eq!(parsed.image_caption, set.image_caption.unwrap_or_default());
        prop_assert!(parsed.unrecognized.is_empty());
    }

    #[test]
    fn annotations_and_questions_round_trip(seed in any::<u64>()) {
        let schema = AttributeSchema::builtin();
        let people = annotated(seed, &schema);
        let mut buf = Vec::new();
        write_records(&people, &mut buf).unwrap();
        prop_assert_eq!(read_records::<PersonAnnotation, _>(&buf[..], Mode::Strict).unwrap(), people.clone());

        let qa: Vec<QAPair> = people
            .iter()
            .filter(|p| p.position.is_some())
            .flat_map(|p| gen_attribute_qa(p, true, seed, &schema).unwrap().pairs)
            .collect();
        let mut buf = Vec::new();
        write_records(&qa, &mut buf).unwrap();
        prop_assert_eq!(read_records::<QAPair, _>(&buf[..], Mode::Strict).unwrap(), qa);
    }

    #[test]
    fn cleaning_is_idempotent_and_stays_in_schema(seed in any::<u64>()) {
        let schema = AttributeSchema::builtin();
        let config = CleaningConfig::default();
        let corpus = common::noisy_corpus(&mut seed::rng(seed), &schema, 30);
        let once = clean_labels(&corpus, &schema, &config);
        let twice = clean_labels(&once.kept, &schema, &config);
        prop_assert_eq!(&twice.kept, &once.kept);
        prop_assert!(twice.dropped.is_empty());
        for p in &once.kept {
            for name in p.attributes.keys() {
                prop_assert!(schema.get(name).is_some(), "{name} not in schema");
            }
        }
    }

    #[test]
    fn attribute_questions_are_consistent(seed in any::<u64>(), multi in any::<bool>()) {
        let schema = AttributeSchema::builtin();
        for p in annotated(seed, &schema).iter().filter(|p| !multi || p.position.is_some()) {
            let a = gen_attribute_qa(p, multi, seed, &schema).unwrap();
            prop_assert_eq!(&a, &gen_attribute_qa(p, multi, seed, &schema).unwrap());
            for qa in &a.pairs {
                check_pair(qa)?;
                let positional = qa.question.contains(&format!("{} ", p.position.clone().unwrap_or_default()))
                    && p.position.is_some();
                if multi {
                    prop_assert!(positional, "{}", qa.question);
                }
                if let GoldLabel::Letter(c) = qa.gold {
                    let gold = qa.option_text(c).unwrap();
                    prop_assert!(p.attributes.values().any(|v| v == gold), "{} -> {gold}", qa.id);
                }
            }
        }
    }

    #[test]
    fn shuffled_expression_gold_points_at_class(seed in any::<u64>(), class in 0usize..7) {
        let img = FaceImageRef::new("r", "r.jpg", SourceDataset::Rafdb);
        let qa = reformulate_expression(&img, RAFDB_CLASSES[class], &RAFDB_CLASSES, Some(seed)).unwrap();
        check_pair(&qa)?;
        let GoldLabel::Letter(c) = qa.gold else { unreachable!() };
        prop_assert_eq!(qa.option_text(c), Some(RAFDB_CLASSES[class]));
    }

    #[test]
    fn head_pose_gold_matches_yaw(seed in any::<u64>(), yaw in -90.0f64..90.0) {
        let img = FaceImageRef::new("b", "b.jpg", SourceDataset::Biwi);
        let qa = reformulate_head_pose(&img, yaw, seed).unwrap();
        check_pair(&qa)?;
        let GoldLabel::Letter(c) = qa.gold else { unreachable!() };
        let want = if yaw <= -15.0 { "left" } else if yaw >= 15.0 { "right" } else { "front" };
        prop_assert!(qa.option_text(c).unwrap().contains(want));
    }

    #[test]
    fn zero_shot_suite_is_consistent(seed in any::<u64>(), n in 1usize..40) {
        let cats = [ZeroShotCategory::EyelidType, ZeroShotCategory::EyeShape, ZeroShotCategory::NoseShape, ZeroShotCategory::LipShape];
        let mut rng = seed::rng(seed);
        let items: Vec<ZeroShotItem> = (0..n)
            .map(|i| {
                let category = cats[i % 4];
                let vocab = category.vocabulary();
                ZeroShotItem {
                    image: FaceImageRef::new(format!("z{i}"), format!("z{i}.jpg"), SourceDataset::ZeroShot),
                    category,
                    gold_value: vocab[rand::Rng::random_range(&mut rng, 0..vocab.len())].to_string(),
                }
            })
            .collect();
        let desc = FeatureDescriptions::default();
        let suite = build_zeroshot_suite(&items, &desc, seed, None).unwrap();
        prop_assert_eq!(&suite, &build_zeroshot_suite(&items, &desc, seed, None).unwrap());
        prop_assert!(suite.len() >= 2 * n && suite.len() <= 3 * n);
        for qa in &suite {
            check_pair(qa)?;
            let item = items.iter().find(|i| i.image.id == qa.image.id).unwrap();
            if let GoldLabel::Letter(c) = qa.gold {
                prop_assert_eq!(qa.option_text(c), Some(item.gold_value.as_str()));
            }
        }
    }

    #[test]
    fn reformulated_counts_add_up(seed in any::<u64>(), n in 1usize..30, unknown in 0usize..5) {
        let mut rng = seed::rng(seed);
        let mut text = common::labels::emotionet(&mut rng, n);
        for i in 0..unknown {
            let line = text.lines().nth(1 + i % n).unwrap().to_string();
            text = text.replacen(&line, &line.replacen(",0", ",999", 1).replacen(",1", ",999", 1), 1);
        }
        let out = reformulate_dataset(Dataset::Emotionet, &text, &AdapterOptions { seed, ..Default::default() }).unwrap();
        prop_assert_eq!(out.items, n);
        prop_assert_eq!(out.pairs.len() + out.skips.len(), n * 12);
        for qa in &out.pairs {
            check_pair(qa)?;
        }
    }

    #[test]
    fn score_matches_direct_count(seed in any::<u64>()) {
        let records = common::random_eval_set(&mut seed::rng(seed), 300);
        let has_scored = records.iter().any(|r| r.qa.task != TaskKind::Description);
        prop_assume!(has_scored);
        let report = score(&records, &RunMeta::default()).unwrap();
        let all = common::naive_stats(&records, None);
        prop_assert_eq!(report.overall.n as usize, all.n);
        prop_assert_eq!(report.overall.accuracy, all.correct as f64 / all.n as f64);
        prop_assert!(report.overall.parse_rate >= report.overall.accuracy);
        for t in &report.tasks {
            let naive = common::naive_stats(&records, Some(&t.category));
            prop_assert_eq!(t.n_correct as usize, naive.correct);
            prop_assert_eq!(t.accuracy, naive.correct as f64 / naive.n as f64);
            prop_assert_eq!(t.f1, naive.f1);
            match (t.mae, naive.mae) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn zero_shot_mean_is_arithmetic_mean(accs in proptest::array::uniform4(0u32..=100)) {
        let names = ["eyelid_type", "eye_shape", "nose_shape", "lip_shape"];
        let mut records = Vec::new();
        for (c, (name, correct)) in names.iter().zip(accs).enumerate() {
            for i in 0..100 {
                let got = if i < correct { 'A' } else { 'B' };
                records.push(common::eval_record(c * 100 + i as usize, name, TaskKind::MultipleChoice, GoldLabel::Letter('A'), faceqa_core::eval::Answer::Letter(got)));
            }
        }
        let report = score(&records, &RunMeta::default()).unwrap();
        let want = accs.iter().map(|a| *a as f64 / 100.0).sum::<f64>() / 4.0;
        prop_assert!((zero_shot_mean(&report).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn brute_force_agrees_on_a_fixed_corpus() {
    let schema = AttributeSchema::builtin();
    let config = CleaningConfig::default();
    let corpus = common::noisy_corpus(&mut seed::rng(7), &schema, 500);
    let out = clean_labels(&corpus, &schema, &config);
    let (kept, dropped) = common::brute_force_clean(&corpus, &schema, &config);
    let got: BTreeMap<u32, BTreeMap<String, String>> =
        out.kept.iter().map(|p| (p.person_index, p.attributes.clone())).collect();
    assert_eq!(got, kept);
    let got_dropped: Vec<u32> = out.dropped.iter().map(|d| d.person_index).collect();
    assert_eq!(got_dropped, dropped);
    assert!(!kept.is_empty() && !dropped.is_empty());
}
