use std::fmt::Write as _;

use crate::schema::{AttributeSchema, AttributeSpec};

pub const ANNOTATION_PROMPT_PREAMBLE: &str = "Suppose you are a face fine-grained attribute analyst; based on a given image, you can output both the image caption in detail and the list of fine-grained attributes for each person.";

const REQUIREMENTS: [&str; 4] = [
    "A. The image caption should be generated according to the fine-grained attributes.",
    "B. Please extract them from the image, do not imagine yourself.",
    "C. If there are multiple people in the image, please separate each person, point out the position of each person, and list a list of fine-grained attributes for each person.",
    "D. The list of fine-grained attributes should be formatted as follows:",
];

const FORMAT_EXAMPLE: [&str; 5] = [
    "* Attribute name: Attribute value",
    "For example:",
    "* Gender: Male",
    "* Age: Child",
    "* Hair color: Black",
];

const ATTRIBUTE_INTRO: &str =
    "E. The fine-grained attributes include but are not limited to the following:";

/// Numbered prompt line for one attribute slot.
pub fn attribute_line(spec: &AttributeSpec) -> String {
    let mut line = format!("{}. {}", spec.slot, spec.name);
    if let Some(display) = &spec.candidates_display {
        let _ = write!(line, " ({display})");
    } else if !spec.allowed_values.is_empty() {
        let mut list = spec.allowed_values.join(", ");
        if spec.open_ended {
            list.push_str(", etc.");
        }
        let _ = write!(line, " ({list})");
    }
    line
}

/// Full annotation prompt for `schema`, attributes in schema order.
pub fn render_annotation_prompt(schema: &AttributeSchema) -> String {
    let mut out = String::new();
    out.push_str(ANNOTATION_PROMPT_PREAMBLE);
    out.push_str("\n\nRequirements:\n");
    for line in REQUIREMENTS.iter().chain(FORMAT_EXAMPLE.iter()) {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(ATTRIBUTE_INTRO);
    out.push('\n');
    for spec in &schema.attributes {
        out.push_str(&attribute_line(spec));
        out.push('\n');
    }
    out
}
