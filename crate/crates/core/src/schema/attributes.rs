use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BUILTIN_SCHEMA_VERSION: &str = "face-attributes-1";

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("reading schema {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing schema: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid schema: {0}")]
    Invalid(String),
}

/// One attribute slot of the annotation prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    /// Number printed in front of the slot in the prompt.
    pub slot: u32,
    pub name: String,
    #[serde(default)]
    pub allowed_values: Vec<String>,
    /// Candidate list is illustrative ("etc."), values outside it are legal.
    #[serde(default)]
    pub open_ended: bool,
    /// Literal candidate text for the prompt when it is not a plain list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates_display: Option<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

impl AttributeSpec {
    /// Whether values outside `allowed_values` must be rejected.
    pub fn is_closed(&self) -> bool {
        !self.open_ended && !self.allowed_values.is_empty()
    }

    /// Schema spelling of `value`, matched case- and punctuation-insensitively.
    pub fn canonical_value(&self, value: &str) -> Option<&str> {
        let key = normalize_value(value);
        self.allowed_values
            .iter()
            .find(|v| normalize_value(v) == key)
            .map(String::as_str)
    }

    pub fn is_position(&self) -> bool {
        normalize_name(&self.name) == "position"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub version: String,
    pub attributes: Vec<AttributeSpec>,
}

/// Lowercase, `_`/`-` to space, collapsed whitespace.
pub(crate) fn normalize_name(name: &str) -> String {
    normalized_chars(name).collect()
}

/// The characters of [`normalize_name`] without allocating.
fn normalized_chars(name: &str) -> impl Iterator<Item = char> + '_ {
    let mut started = false;
    let mut gap = false;
    name.trim()
        .trim_matches(|c: char| c == '*' || c == '_')
        .chars()
        .map(|c| if c == '_' || c == '-' { ' ' } else { c.to_ascii_lowercase() })
        .flat_map(move |c| {
            if c.is_whitespace() {
                gap |= started;
                [None, None]
            } else {
                let sep = std::mem::take(&mut gap).then_some(' ');
                started = true;
                [sep, Some(c)]
            }
        })
        .flatten()
}

fn name_matches(raw: &str, key: &str) -> bool {
    normalized_chars(raw).eq(key.chars())
}

/// Lowercase, punctuation stripped (hyphens become spaces), collapsed whitespace.
pub(crate) fn normalize_value(value: &str) -> String {
    value
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c.to_lowercase().next().unwrap_or(c)
            } else if c == '-' || c == '_' || c == '/' {
                ' '
            } else {
                '\u{0}'
            }
        })
        .filter(|c| *c != '\u{0}')
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

macro_rules! attr {
    ($slot:expr, $name:expr, [$($v:expr),*], open = $open:expr, $desc:expr) => {
        attr!($slot, $name, [$($v),*], open = $open, $desc, aliases = [])
    };
    ($slot:expr, $name:expr, [$($v:expr),*], open = $open:expr, $desc:expr, aliases = [$($a:expr),*]) => {
        AttributeSpec {
            slot: $slot,
            name: $name.to_string(),
            allowed_values: vec![$($v.to_string()),*],
            open_ended: $open,
            candidates_display: None,
            description: $desc.to_string(),
            aliases: vec![$($a.to_string()),*],
        }
    };
}

impl AttributeSchema {
    /// The 37-slot attribute list of the re-annotation prompt.
    pub fn builtin() -> Self {
        let mut moles = attr!(30, "Moles", ["with", "without"], open = false, "presence of moles");
        moles.candidates_display = Some("with or without".to_string());
        let attributes = vec![
            attr!(0, "position", [], open = true, "where the person is in the image", aliases = ["location"]),
            attr!(1, "age", ["infant", "toddler", "child", "teenager", "young adult", "middle-aged", "elderly"], open = false, "apparent age group", aliases = ["age group"]),
            attr!(2, "gender", ["male", "female"], open = false, "apparent gender", aliases = ["sex"]),
            attr!(3, "race", ["East Asian", "Southeast Asian", "South Asian", "Central Asian", "West Asian", "African", "European", "Native American"], open = false, "apparent ethnic group", aliases = ["ethnicity"]),
            attr!(4, "Hair color", ["black", "brown", "blonde", "red", "gray", "white"], open = true, "color of the hair", aliases = ["hair colour"]),
            attr!(5, "Hair length", ["long", "medium", "short", "bald"], open = false, "length of the hair"),
            attr!(6, "Hair type", ["straight", "curly", "wavy"], open = false, "texture of the hair"),
            attr!(7, "Bangs", ["with bangs", "without bangs"], open = false, "hair falling over the forehead", aliases = ["fringe"]),
            attr!(8, "Hairline", ["high", "low"], open = false, "height of the hairline"),
            attr!(9, "Eye size", ["big eyes", "small eyes"], open = false, "size of the eyes"),
            attr!(10, "Eye Shape", ["Round", "Almond", "Phoenix"], open = false, "outline of the eyes"),
            attr!(11, "Double eyelids", ["double eyelids", "single eyelids"], open = false, "eyelid crease type", aliases = ["eyelids", "eyelid type", "eyelid"]),
            attr!(12, "Distance between eyes", ["wide", "narrow"], open = false, "spacing of the eyes", aliases = ["eye distance"]),
            attr!(13, "Eye corners", ["upward", "downward"], open = false, "tilt of the outer eye corners"),
            attr!(14, "Bags under eyes", ["with bags", "without bags"], open = false, "puffiness below the eyes"),
            attr!(15, "Dark Circles", ["with dark circles", "without dark circles"], open = false, "darkened skin below the eyes"),
            attr!(16, "Eye color", ["black", "brown", "blue", "green"], open = true, "iris color", aliases = ["eye colour"]),
            attr!(17, "Nose size", ["big nose", "small nose"], open = false, "size of the nose"),
            attr!(18, "Nose height", ["high bridge", "low bridge"], open = false, "height of the nose bridge", aliases = ["nose bridge"]),
            attr!(19, "Nose width", ["wide nose", "narrow nose"], open = false, "width of the nose"),
            attr!(20, "Nose tip shape", ["rounded tip", "pointed tip"], open = false, "shape of the nose tip", aliases = ["nose tip"]),
            attr!(21, "Lip thickness", ["thick lips", "narrow lips"], open = false, "fullness of the lips"),
            attr!(22, "Lip color", ["red lips", "pink lips"], open = false, "color of the lips", aliases = ["lip colour"]),
            attr!(23, "Mouth corners", ["upturned", "downturned"], open = false, "direction of the mouth corners"),
            attr!(24, "Face shape", ["round face", "square face", "goose egg face", "melon face", "long face", "diamond face"], open = false, "outline of the face"),
            attr!(25, "Chin shape", ["pointed chin", "round chin", "square chin"], open = false, "shape of the chin"),
            attr!(26, "Cheekbones", ["high cheekbones", "low cheekbones"], open = false, "prominence of the cheekbones"),
            attr!(27, "Skin color", ["fair", "yellowish", "wheatish", "tanned"], open = false, "skin tone", aliases = ["skin tone", "skin colour"]),
            attr!(28, "Skin texture", ["smooth", "rough"], open = false, "texture of the skin"),
            attr!(29, "Freckles", ["freckled", "freckle-free"], open = false, "presence of freckles"),
            moles,
            attr!(31, "Beard", ["bearded", "unshaven"], open = false, "facial hair", aliases = ["facial hair"]),
            attr!(32, "Eyeglasses", ["glasses", "no glasses"], open = false, "whether glasses are worn", aliases = ["glasses"]),
            attr!(33, "Hat", ["Hat", "no hat"], open = false, "whether a hat is worn", aliases = ["headwear"]),
            attr!(34, "Expression", ["happy", "sad", "angry", "surprised", "disgusted", "fearful"], open = false, "facial expression", aliases = ["facial expression", "emotion"]),
            attr!(35, "Makeup", ["make-up", "face"], open = false, "whether make-up is worn", aliases = ["make-up", "make up"]),
            attr!(36, "Jewelry", ["earrings", "necklace"], open = true, "visible jewelry", aliases = ["jewellery", "accessories"]),
        ];
        Self {
            version: BUILTIN_SCHEMA_VERSION.to_string(),
            attributes,
        }
    }

    /// Load a user schema from TOML. Slots default to list position.
    pub fn from_toml_str(text: &str) -> Result<Self, SchemaError> {
        #[derive(Deserialize)]
        struct FileSpec {
            slot: Option<u32>,
            name: String,
            #[serde(default)]
            allowed_values: Vec<String>,
            #[serde(default)]
            open_ended: bool,
            candidates_display: Option<String>,
            #[serde(default)]
            description: String,
            #[serde(default)]
            aliases: Vec<String>,
        }
        #[derive(Deserialize)]
        struct File {
            version: String,
            attributes: Vec<FileSpec>,
        }
        let file: File = toml::from_str(text)?;
        let schema = Self {
            version: file.version,
            attributes: file
                .attributes
                .into_iter()
                .enumerate()
                .map(|(i, a)| AttributeSpec {
                    slot: a.slot.unwrap_or(i as u32),
                    name: a.name,
                    allowed_values: a.allowed_values,
                    open_ended: a.open_ended,
                    candidates_display: a.candidates_display,
                    description: a.description,
                    aliases: a.aliases,
                })
                .collect(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let mut names = HashSet::new();
        let mut slots = HashSet::new();
        for spec in &self.attributes {
            let key = normalize_name(&spec.name);
            if key.is_empty() {
                return Err(SchemaError::Invalid("empty attribute name".into()));
            }
            if !names.insert(key) {
                return Err(SchemaError::Invalid(format!("duplicate attribute {:?}", spec.name)));
            }
            if !slots.insert(spec.slot) {
                return Err(SchemaError::Invalid(format!("duplicate slot {}", spec.slot)));
            }
            if spec.allowed_values.iter().any(|v| v.trim().is_empty()) {
                return Err(SchemaError::Invalid(format!("empty candidate in {:?}", spec.name)));
            }
        }
        for spec in &self.attributes {
            for alias in &spec.aliases {
                let key = normalize_name(alias);
                if self
                    .attributes
                    .iter()
                    .any(|other| other.name != spec.name && normalize_name(&other.name) == key)
                {
                    return Err(SchemaError::Invalid(format!(
                        "alias {alias:?} of {:?} shadows another attribute",
                        spec.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolve a response's attribute label against names and aliases.
    pub fn find(&self, label: &str) -> Option<&AttributeSpec> {
        let key = normalize_name(label);
        if key.is_empty() {
            return None;
        }
        self.attributes
            .iter()
            .find(|a| name_matches(&a.name, &key))
            .or_else(|| {
                self.attributes
                    .iter()
                    .find(|a| a.aliases.iter().any(|al| name_matches(al, &key)))
            })
    }

    /// Exact lookup by schema name.
    pub fn get(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn without(&self, name: &str) -> Self {
        Self {
            version: self.version.clone(),
            attributes: self.attributes.iter().filter(|a| a.name != name).cloned().collect(),
        }
    }

    /// Attribute slots excluding the position slot.
    pub fn describable(&self) -> impl Iterator<Item = &AttributeSpec> {
        self.attributes.iter().filter(|a| !a.is_position())
    }
}

impl Default for AttributeSchema {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn lazy_normalization_agrees_with_split_join(name in "[ *_a-zA-Z\\-\t]{0,24}") {
            let reference = name
                .trim()
                .trim_matches(|c: char| c == '*' || c == '_')
                .replace(['_', '-'], " ")
                .to_ascii_lowercase()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            prop_assert_eq!(normalize_name(&name), reference);
        }
    }

    #[test]
    fn builtin_has_37_slots_from_position_to_jewelry() {
        let s = AttributeSchema::builtin();
        assert_eq!(s.attributes.len(), 37);
        assert_eq!(s.attributes[0].name, "position");
        assert_eq!(s.attributes[36].name, "Jewelry");
        let slots: Vec<u32> = s.attributes.iter().map(|a| a.slot).collect();
        assert_eq!(slots, (0..37).collect::<Vec<_>>());
        s.validate().unwrap();
    }

    #[test]
    fn enumerated_slots_have_candidates() {
        for a in AttributeSchema::builtin().attributes {
            assert_eq!(a.allowed_values.is_empty(), a.is_position(), "{}", a.name);
        }
    }

    #[test]
    fn find_is_case_and_alias_insensitive() {
        let s = AttributeSchema::builtin();
        assert_eq!(s.find("HAIR COLOR").unwrap().name, "Hair color");
        assert_eq!(s.find("hair_colour").unwrap().name, "Hair color");
        assert_eq!(s.find("Facial Expression").unwrap().name, "Expression");
        assert_eq!(s.find("eye shape").unwrap().name, "Eye Shape");
        assert!(s.find("Tattoos").is_none());
    }

    #[test]
    fn canonical_value_ignores_case_and_punctuation() {
        let s = AttributeSchema::builtin();
        let age = s.get("age").unwrap();
        assert_eq!(age.canonical_value("Middle aged."), Some("middle-aged"));
        assert_eq!(age.canonical_value("Young Adult"), Some("young adult"));
        assert_eq!(age.canonical_value("ancient"), None);
    }

    #[test]
    fn toml_round_trip_of_user_schema() {
        let text = r#"
            version = "custom"
            [[attributes]]
            name = "position"
            [[attributes]]
            name = "Gender"
            allowed_values = ["male", "female"]
        "#;
        let s = AttributeSchema::from_toml_str(text).unwrap();
        assert_eq!(s.attributes[1].slot, 1);
        assert!(s.attributes[1].is_closed());
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = r#"
            version = "x"
            [[attributes]]
            name = "Hat"
            [[attributes]]
            name = "hat"
        "#;
        assert!(AttributeSchema::from_toml_str(text).is_err());
    }
}
