//! Parser for `* Attribute name: Attribute value` annotation responses.
//!
//! A response may describe several people. Person blocks start at a header
//! line (`Person 2 (rightmost):`, `**Face 1**`), at a second `Position`
//! bullet, or at a repeated attribute name. Prose before the first block is
//! the image caption; prose inside a block is that person's caption.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;

use crate::schema::{AttributeSchema, FaceImageRef, PersonAnnotation};

/// One person as recovered from a response, before binding to an image.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedPerson {
    pub person_index: u32,
    pub position: Option<String>,
    pub caption: String,
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedResponse {
    pub persons: Vec<ParsedPerson>,
    /// Prose not attached to any person.
    pub image_caption: String,
    /// Bullets whose name is not in the schema, as (name, value).
    pub unrecognized: Vec<(String, String)>,
}

impl ParsedResponse {
    /// Bind to an image. People without their own caption share the image caption.
    pub fn into_annotations(self, image: &FaceImageRef) -> Vec<PersonAnnotation> {
        let shared = self.image_caption;
        self.persons
            .into_iter()
            .map(|p| PersonAnnotation {
                image: image.clone(),
                person_index: p.person_index,
                position: p.position,
                caption: if p.caption.is_empty() { shared.clone() } else { p.caption },
                attributes: p.attributes,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub reason: String,
    pub text: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "annotation parse failure: {}", self.reason)
    }
}

impl std::error::Error for ParseFailure {}

static BULLET: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:[*\-•+]|\d{1,2}[.)])\s+(.*)$").unwrap());
static HEADER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:person|face|individual|subject)\b\s*(?:#?\s*(\d+)\b)?\s*(.*)$").unwrap()
});
static CAPTION_LABEL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:\*\*)?\s*(?:image\s+|overall\s+)?(?:caption|description)\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*")
        .unwrap()
});

fn strip_emphasis(s: &str) -> &str {
    s.trim().trim_matches('*').trim_matches('_').trim()
}

/// Recognise a person header and pull a position phrase out of it.
fn header_position(line: &str) -> Option<Option<String>> {
    let raw = line.trim();
    let emphasised = raw.starts_with('#') || raw.starts_with("**");
    let ends_colon = raw.trim_end_matches('*').trim_end().ends_with(':');
    let inner = strip_emphasis(raw.trim_start_matches('#'));
    let inner = inner.trim_end_matches(':').trim();
    let inner = strip_emphasis(inner);
    if inner.len() > 60 {
        return None;
    }
    let caps = HEADER.captures(inner)?;
    let numbered = caps.get(1).is_some();
    if !(emphasised || ends_colon || numbered) {
        return None;
    }
    let rest = caps.get(2).map(|m| m.as_str()).unwrap_or("").trim();
    if !numbered && !rest.is_empty() && !rest.starts_with(['(', '-', '–', ':']) && !ends_colon {
        return None;
    }
    let position = if let (Some(open), Some(close)) = (rest.find('('), rest.rfind(')')) {
        rest[open + 1..close].trim().to_string()
    } else {
        let r = rest.trim_start_matches(['-', '–', ':', ',']).trim();
        let r = ["on the ", "at the ", "in the "]
            .iter()
            .find_map(|p| r.strip_prefix(p))
            .unwrap_or(r);
        r.trim().to_string()
    };
    Some(if position.is_empty() { None } else { Some(position) })
}

#[derive(Default)]
struct Block {
    person: ParsedPerson,
    position_from_bullet: bool,
    caption_lines: Vec<String>,
}

impl Block {
    fn has_attributes(&self) -> bool {
        !self.person.attributes.is_empty()
    }

    fn is_empty(&self) -> bool {
        self.person.attributes.is_empty() && self.person.position.is_none()
    }
}

/// Parse a free-text annotation response.
///
/// Fails only when no line yields a recognised `* Name: Value` pair.
pub fn parse_annotation_response(
    text: &str,
    schema: &AttributeSchema,
) -> Result<ParsedResponse, ParseFailure> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut image_caption: Vec<String> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut unrecognized = Vec::new();
    let mut recognised = 0usize;

    // Prose seen after a block's bullets is held in `pending` until we know
    // whether the next block starts with a header (prose belongs to the
    // previous person) or implicitly (prose introduces the next person).
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(caps) = BULLET.captures(line) {
            let body = caps.get(1).map(|m| m.as_str()).unwrap_or("");
            let body = body.replace("**", "");
            if let Some((name, value)) = body.split_once(':') {
                let name = strip_emphasis(name);
                let value = strip_emphasis(value);
                if CAPTION_LABEL.is_match(&format!("{name}:")) {
                    if !value.is_empty() {
                        push_prose(&mut blocks, &mut image_caption, &mut pending, value);
                    }
                    continue;
                }
                let Some(spec) = schema.find(name) else {
                    if !value.is_empty() {
                        unrecognized.push((name.to_string(), value.to_string()));
                    }
                    continue;
                };
                if value.is_empty() {
                    continue;
                }
                recognised += 1;
                let start_new = match blocks.last() {
                    None => true,
                    Some(b) if spec.is_position() => b.has_attributes() || b.position_from_bullet,
                    Some(b) => b.person.attributes.contains_key(&spec.name),
                };
                if start_new {
                    let mut block = Block::default();
                    block.caption_lines.append(&mut pending);
                    blocks.push(block);
                }
                let block = blocks.last_mut().expect("pushed above");
                if spec.is_position() {
                    block.person.position = Some(value.to_string());
                    block.position_from_bullet = true;
                } else {
                    block.person.attributes.insert(spec.name.clone(), value.to_string());
                }
                continue;
            }
            // bullet without a colon is prose
            push_prose(&mut blocks, &mut image_caption, &mut pending, strip_emphasis(&body));
            continue;
        }
        if let Some(position) = header_position(line) {
            if let Some(prev) = blocks.last_mut() {
                prev.caption_lines.append(&mut pending);
            }
            let mut block = Block::default();
            block.person.position = position;
            blocks.push(block);
            continue;
        }
        let prose = CAPTION_LABEL.replace(line, "");
        let prose = strip_emphasis(&prose);
        if !prose.is_empty() {
            push_prose(&mut blocks, &mut image_caption, &mut pending, prose);
        }
    }

    if let Some(last) = blocks.last_mut() {
        last.caption_lines.append(&mut pending);
    }

    if recognised == 0 {
        return Err(ParseFailure {
            reason: "no recognised `* Name: Value` lines".into(),
            text: text.to_string(),
        });
    }

    let mut persons: Vec<ParsedPerson> = blocks
        .into_iter()
        .filter(|b| !b.is_empty())
        .enumerate()
        .map(|(i, mut b)| {
            b.person.person_index = i as u32;
            b.person.caption = b.caption_lines.join(" ");
            b.person
        })
        .collect();
    let mut image_caption = image_caption.join(" ");
    // a lone person's leading prose is their caption
    if let [only] = persons.as_mut_slice() {
        if only.caption.is_empty() {
            only.caption = std::mem::take(&mut image_caption);
        }
    }

    Ok(ParsedResponse {
        persons,
        image_caption,
        unrecognized,
    })
}

fn push_prose(blocks: &mut [Block], image: &mut Vec<String>, pending: &mut Vec<String>, text: &str) {
    match blocks.last_mut() {
        None => image.push(text.to_string()),
        Some(b) if !b.has_attributes() && !b.position_from_bullet => {
            b.caption_lines.push(text.to_string())
        }
        Some(_) => pending.push(text.to_string()),
    }
}

fn display_name(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Serialize people in the bullet response format. Inverse of
/// [`parse_annotation_response`] for captions that are single prose lines.
pub fn render_annotation_response(
    schema: &AttributeSchema,
    image_caption: Option<&str>,
    persons: &[ParsedPerson],
) -> String {
    let mut out = String::new();
    if let Some(c) = image_caption.filter(|c| !c.is_empty()) {
        out.push_str(c);
        out.push_str("\n\n");
    }
    let headers = persons.len() > 1 || image_caption.is_some_and(|c| !c.is_empty());
    let position_name = schema
        .attributes
        .iter()
        .find(|a| a.is_position())
        .map(|a| display_name(&a.name))
        .unwrap_or_else(|| "Position".to_string());
    for (i, p) in persons.iter().enumerate() {
        if headers {
            out.push_str(&format!("Person {}:\n", i + 1));
        }
        if !p.caption.is_empty() {
            out.push_str(&p.caption);
            out.push('\n');
        }
        if let Some(pos) = &p.position {
            out.push_str(&format!("* {position_name}: {pos}\n"));
        }
        for spec in &schema.attributes {
            if let Some(v) = p.attributes.get(&spec.name) {
                out.push_str(&format!("* {}: {}\n", display_name(&spec.name), v));
            }
        }
        out.push('\n');
    }
    out
}
