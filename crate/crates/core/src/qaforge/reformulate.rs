//! Single-label face dataset samples rewritten as benchmark questions.

use rand::Rng;

use super::labels::{action_unit, face_attribute};
use super::shuffle::{lettered, shuffle_options};
use super::templates::{format_options, AGE_QUESTION, EXPRESSION_STEM, MC_INSTRUCTION, YES_NO_INSTRUCTION};
use super::ForgeError;
use crate::schema::{FaceImageRef, GoldLabel, OptionChoice, QAPair, TaskKind, YesNo};
use crate::seed;

pub const HEAD_POSE_CLASSES: [&str; 3] = ["left", "front", "right"];

/// Yaw magnitude in degrees beyond which a head counts as turned.
pub const HEAD_POSE_YAW_THRESHOLD: f64 = 15.0;

fn yes_no(image: &FaceImageRef, id: String, category: &str, question: String, gold: bool, aux: Option<String>) -> QAPair {
    QAPair {
        id,
        image: image.clone(),
        task: TaskKind::YesNo,
        category: category.to_string(),
        question,
        options: None,
        gold: GoldLabel::Boolean(YesNo::from_bool(gold)),
        aux_description: aux,
    }
}

fn multiple_choice(
    image: &FaceImageRef,
    id: String,
    category: &str,
    stem: &str,
    options: Vec<OptionChoice>,
    gold: char,
) -> QAPair {
    QAPair {
        id,
        image: image.clone(),
        task: TaskKind::MultipleChoice,
        category: category.to_string(),
        question: format!("{stem} {} {MC_INSTRUCTION}", format_options(&options)),
        options: Some(options),
        gold: GoldLabel::Letter(gold),
        aux_description: None,
    }
}

pub fn reformulate_age(image: &FaceImageRef, gold_age: i64) -> Result<QAPair, ForgeError> {
    if !(1..=100).contains(&gold_age) {
        return Err(ForgeError::AgeOutOfRange(gold_age));
    }
    Ok(QAPair {
        id: format!("{}/age", image.id),
        image: image.clone(),
        task: TaskKind::Age,
        category: "age".to_string(),
        question: AGE_QUESTION.to_string(),
        options: None,
        gold: GoldLabel::Number(gold_age as u32),
        aux_description: None,
    })
}

/// `true` for female, `false` for male.
pub(crate) fn parse_gender(label: &str) -> Result<bool, ForgeError> {
    match label.trim().to_lowercase().as_str() {
        "female" | "f" | "woman" => Ok(true),
        "male" | "m" | "man" => Ok(false),
        _ => Err(ForgeError::UnknownGender(label.to_string())),
    }
}

/// Asks "female?" or "male?" by a coin seeded on the image id.
pub fn reformulate_gender(image: &FaceImageRef, gender: &str, seed: u64) -> Result<QAPair, ForgeError> {
    let female = parse_gender(gender)?;
    let ask_female = seed::rng_for(seed, &["gender", &image.id]).random_bool(0.5);
    Ok(gender_question(image, female, ask_female))
}

pub(crate) fn gender_question(image: &FaceImageRef, female: bool, ask_female: bool) -> QAPair {
    let asked = if ask_female { "female" } else { "male" };
    yes_no(
        image,
        format!("{}/gender", image.id),
        "gender",
        format!("Is the person in the picture {asked}? {YES_NO_INSTRUCTION}"),
        female == ask_female,
        None,
    )
}

/// Multiple choice over every class. With `seed` unset the options keep
/// `classes` order.
pub fn reformulate_expression(
    image: &FaceImageRef,
    gold_class: &str,
    classes: &[&str],
    seed: Option<u64>,
) -> Result<QAPair, ForgeError> {
    let gold = classes
        .iter()
        .position(|c| c.eq_ignore_ascii_case(gold_class.trim()))
        .ok_or_else(|| ForgeError::UnknownClass(gold_class.to_string()))?;
    let texts: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
    let (options, letter) = match seed {
        Some(s) => shuffle_options(&texts, gold, seed::derive_seed(s, &["expression", &image.id]))?,
        None => (lettered(&texts)?, (b'A' + gold as u8) as char),
    };
    Ok(multiple_choice(
        image,
        format!("{}/expression", image.id),
        "expression",
        EXPRESSION_STEM,
        options,
        letter,
    ))
}

pub fn reformulate_au(
    image: &FaceImageRef,
    au_name: &str,
    au_description: &str,
    present: bool,
) -> Result<QAPair, ForgeError> {
    let au = action_unit(au_name).ok_or_else(|| ForgeError::UnknownActionUnit(au_name.to_string()))?;
    let description = au_description.trim();
    if description.is_empty() {
        return Err(ForgeError::MissingDescription(au.name.to_string()));
    }
    Ok(yes_no(
        image,
        format!("{}/au/{}", image.id, au.code),
        "au",
        format!(
            "{description} Does the person in the image contains the AU of {}? {YES_NO_INSTRUCTION}",
            au.name
        ),
        present,
        Some(description.to_string()),
    ))
}

pub fn reformulate_attribute(
    image: &FaceImageRef,
    attr_name: &str,
    attr_description: Option<&str>,
    present: bool,
) -> Result<QAPair, ForgeError> {
    let attr = face_attribute(attr_name).ok_or_else(|| ForgeError::UnknownAttribute(attr_name.to_string()))?;
    let description = attr_description.map(str::trim).filter(|d| !d.is_empty());
    let ask = format!(
        "Does the person in the image possess the property of {}? {YES_NO_INSTRUCTION}",
        attr.name
    );
    let question = match description {
        Some(d) => format!("{d} {ask}"),
        None => ask,
    };
    Ok(yes_no(
        image,
        format!("{}/attr/{}", image.id, attr.key),
        "attribute",
        question,
        present,
        description.map(str::to_string),
    ))
}

/// Three-way head direction from yaw in degrees (negative turns left).
pub fn reformulate_head_pose(image: &FaceImageRef, yaw: f64, seed: u64) -> Result<QAPair, ForgeError> {
    if !yaw.is_finite() {
        return Err(ForgeError::Label { line: 0, message: format!("yaw {yaw} is not finite") });
    }
    let gold = if yaw <= -HEAD_POSE_YAW_THRESHOLD {
        0
    } else if yaw >= HEAD_POSE_YAW_THRESHOLD {
        2
    } else {
        1
    };
    let texts: Vec<String> = HEAD_POSE_CLASSES.iter().map(|c| c.to_string()).collect();
    let (options, letter) = shuffle_options(&texts, gold, seed::derive_seed(seed, &["head_pose", &image.id]))?;
    Ok(multiple_choice(
        image,
        format!("{}/head_pose", image.id),
        "head_pose",
        "Which direction is the person in the picture facing?",
        options,
        letter,
    ))
}
