//! Question wording.
//!
//! Yes/no questions end with [`YES_NO_INSTRUCTION`], multiple-choice questions
//! with [`MC_INSTRUCTION`]; answer parsers and the mock endpoint rely on it.

use serde::{Deserialize, Serialize};

use crate::schema::{OptionChoice, TaskKind};

pub const YES_NO_INSTRUCTION: &str = "Answer directly with Yes or No.";
pub const MC_INSTRUCTION: &str = "Answer with the option's letter from the given choices directly.";

pub const AGE_QUESTION: &str = "What is the age of the person in the picture? Estimate with a number from 1 to 100, such as 1,2,3,...";
pub const EXPRESSION_STEM: &str = "What's the expression of this person?";

/// Caption instructions, rotated over images. The first is always used for
/// the first image.
pub const CAPTION_INSTRUCTIONS: [&str; 4] = [
    "Please describe the person in the picture in detail according to his/her face.",
    "Describe the face of the person in this image in detail.",
    "Give a detailed description of the facial attributes of the person in the picture.",
    "What does the person in the picture look like? Describe the face in detail.",
];

/// How a template's gold answer is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerRule {
    /// Yes, the question states the annotated value.
    TrueValue,
    /// No, the question states a distractor value.
    DistractorValue,
    /// Letter of the annotated value after shuffling.
    OptionLetter,
    /// Taken from a dataset label.
    DatasetLabel,
}

/// A question pattern with `{position}`, `{attribute}`, `{value}`,
/// `{description}` and `{options}` slots.
///
/// `{position}` expands to `"<phrase> "` for multi-face images and to
/// nothing otherwise, so "the {position}face" reads "the face" or
/// "the leftmost face".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionTemplate {
    pub task: TaskKind,
    pub pattern: String,
    pub answer_rule: AnswerRule,
}

#[derive(Debug, Clone, Default)]
pub struct Slots<'a> {
    pub position: Option<&'a str>,
    pub attribute: &'a str,
    pub value: &'a str,
    pub description: &'a str,
    pub options: &'a [OptionChoice],
}

const SLOTS: [&str; 5] = ["{position}", "{attribute}", "{value}", "{description}", "{options}"];

impl QuestionTemplate {
    pub fn new(task: TaskKind, pattern: &str, answer_rule: AnswerRule) -> Self {
        Self {
            task,
            pattern: pattern.to_string(),
            answer_rule,
        }
    }

    /// Instruction suffix and slot names are well-formed.
    pub fn check(&self) -> Result<(), String> {
        let required = match self.task {
            TaskKind::YesNo => Some(YES_NO_INSTRUCTION),
            TaskKind::MultipleChoice => Some(MC_INSTRUCTION),
            _ => None,
        };
        if let Some(suffix) = required {
            if !self.pattern.ends_with(suffix) {
                return Err(format!("{} template must end with {suffix:?}", self.task));
            }
        }
        if self.task == TaskKind::MultipleChoice && !self.pattern.contains("{options}") {
            return Err("multiple_choice template needs an {options} slot".into());
        }
        let mut rest = self.pattern.as_str();
        while let Some(open) = rest.find('{') {
            let close = rest[open..]
                .find('}')
                .ok_or_else(|| format!("unclosed slot in {:?}", self.pattern))?;
            let slot = &rest[open..open + close + 1];
            if !SLOTS.contains(&slot) {
                return Err(format!("unknown slot {slot}"));
            }
            rest = &rest[open + close + 1..];
        }
        Ok(())
    }

    pub fn fill(&self, slots: &Slots<'_>) -> String {
        let position = slots.position.map(|p| format!("{p} ")).unwrap_or_default();
        self.pattern
            .replace("{position}", &position)
            .replace("{attribute}", slots.attribute)
            .replace("{value}", slots.value)
            .replace("{description}", slots.description)
            .replace("{options}", &format_options(slots.options))
    }
}

/// `A.surprise B.fear C.disgust`
pub fn format_options(options: &[OptionChoice]) -> String {
    options
        .iter()
        .map(|o| format!("{}.{}", o.letter, o.text))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Yes/no phrasings for annotated attributes, rotated per question.
pub fn attribute_yes_no_templates() -> Vec<QuestionTemplate> {
    vec![
        QuestionTemplate::new(
            TaskKind::YesNo,
            "Does the {position}face in the image have the attribute {attribute}: {value}? Answer directly with Yes or No.",
            AnswerRule::TrueValue,
        ),
        QuestionTemplate::new(
            TaskKind::YesNo,
            "Is the {attribute} of the {position}face in the image {value}? Answer directly with Yes or No.",
            AnswerRule::TrueValue,
        ),
    ]
}

/// Gender uses the benchmark's own wording.
pub fn gender_yes_no_template() -> QuestionTemplate {
    QuestionTemplate::new(
        TaskKind::YesNo,
        "Is the {position}person in the picture {value}? Answer directly with Yes or No.",
        AnswerRule::TrueValue,
    )
}

pub fn attribute_mc_templates() -> Vec<QuestionTemplate> {
    vec![
        QuestionTemplate::new(
            TaskKind::MultipleChoice,
            "What is the {attribute} of the {position}face in the image? {options} Answer with the option's letter from the given choices directly.",
            AnswerRule::OptionLetter,
        ),
        QuestionTemplate::new(
            TaskKind::MultipleChoice,
            "Which option best describes the {attribute} of the {position}face in the image? {options} Answer with the option's letter from the given choices directly.",
            AnswerRule::OptionLetter,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_templates_are_well_formed() {
        let all = attribute_yes_no_templates()
            .into_iter()
            .chain(attribute_mc_templates())
            .chain([gender_yes_no_template()]);
        for t in all {
            t.check().unwrap();
        }
    }

    #[test]
    fn bad_suffix_and_slot_rejected() {
        let t = QuestionTemplate::new(TaskKind::YesNo, "Is it {value}?", AnswerRule::TrueValue);
        assert!(t.check().is_err());
        let t = QuestionTemplate::new(
            TaskKind::YesNo,
            "Is it {colour}? Answer directly with Yes or No.",
            AnswerRule::TrueValue,
        );
        assert!(t.check().unwrap_err().contains("{colour}"));
    }

    #[test]
    fn position_slot_expands() {
        let t = &attribute_yes_no_templates()[0];
        let single = t.fill(&Slots { attribute: "hair color", value: "black", ..Default::default() });
        assert!(single.starts_with("Does the face in the image have"));
        let multi = t.fill(&Slots {
            position: Some("leftmost"),
            attribute: "hair color",
            value: "black",
            ..Default::default()
        });
        assert!(multi.contains("the leftmost face in the image"));
    }

    #[test]
    fn options_render_like_benchmark() {
        let opts = vec![
            OptionChoice { letter: 'A', text: "surprise".into() },
            OptionChoice { letter: 'B', text: "fear".into() },
        ];
        assert_eq!(format_options(&opts), "A.surprise B.fear");
    }
}
