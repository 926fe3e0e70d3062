//! Zero-shot questions about facial features outside the training labels.
//!
//! Each image yields a multiple-choice question over its category's
//! vocabulary and one or two yes/no questions, every one opening with
//! descriptions of the features it mentions.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::shuffle::shuffle_options;
use super::templates::{format_options, MC_INSTRUCTION, YES_NO_INSTRUCTION};
use super::ForgeError;
use crate::schema::{FaceImageRef, GoldLabel, QAPair, Record, TaskKind, Violation, YesNo};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroShotCategory {
    EyelidType,
    EyeShape,
    NoseShape,
    LipShape,
}

impl ZeroShotCategory {
    pub const ALL: [ZeroShotCategory; 4] = [
        ZeroShotCategory::EyelidType,
        ZeroShotCategory::EyeShape,
        ZeroShotCategory::NoseShape,
        ZeroShotCategory::LipShape,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ZeroShotCategory::EyelidType => "eyelid_type",
            ZeroShotCategory::EyeShape => "eye_shape",
            ZeroShotCategory::NoseShape => "nose_shape",
            ZeroShotCategory::LipShape => "lip_shape",
        }
    }

    fn phrase(self) -> &'static str {
        match self {
            ZeroShotCategory::EyelidType => "eyelid type",
            ZeroShotCategory::EyeShape => "eye shape",
            ZeroShotCategory::NoseShape => "nose shape",
            ZeroShotCategory::LipShape => "lip shape",
        }
    }

    /// The noun shared by the vocabulary entries.
    fn noun(self) -> &'static str {
        match self {
            ZeroShotCategory::EyelidType => "eyelids",
            ZeroShotCategory::EyeShape => "eyes",
            ZeroShotCategory::NoseShape => "nose",
            ZeroShotCategory::LipShape => "lips",
        }
    }

    pub fn vocabulary(self) -> &'static [&'static str] {
        match self {
            ZeroShotCategory::EyelidType => &["single eyelids", "double eyelids"],
            ZeroShotCategory::EyeShape => &["phoenix eyes", "almond eyes", "peach blossom eyes"],
            ZeroShotCategory::NoseShape => &["upturned nose", "aquiline nose", "low bridge nose"],
            ZeroShotCategory::LipShape => &["cherry lips", "thick lips"],
        }
    }

    /// Vocabulary entry for `value`, with or without the category noun.
    pub fn resolve(self, value: &str) -> Option<&'static str> {
        let v = value.trim().to_lowercase().replace(['-', '_'], " ");
        let v = v.split_whitespace().collect::<Vec<_>>().join(" ");
        let singular = self.noun().trim_end_matches('s');
        self.vocabulary().iter().copied().find(|entry| {
            let bare = entry.trim_end_matches(self.noun()).trim_end();
            v == *entry || v == bare || v == format!("{bare} {singular}")
        })
    }
}

impl fmt::Display for ZeroShotCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ZeroShotCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase().replace([' ', '-'], "_");
        ZeroShotCategory::ALL
            .into_iter()
            .find(|c| c.key() == key)
            .ok_or_else(|| format!("unknown zero-shot category {s:?}"))
    }
}

/// An image with its gold feature value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroShotItem {
    pub image: FaceImageRef,
    pub category: ZeroShotCategory,
    pub gold_value: String,
}

impl Record for ZeroShotItem {
    const KIND: &'static str = "zero_shot_item";
    const FIELDS: &'static [&'static str] = &["image", "category", "gold_value"];

    fn validate(&self) -> Result<(), Violation> {
        self.image.check("image")?;
        if self.category.resolve(&self.gold_value).is_none() {
            return Err(Violation::new(
                "gold_value",
                format!("{:?} is not a {} value", self.gold_value, self.category),
            ));
        }
        Ok(())
    }

    fn unique_key(&self) -> Option<(&'static str, String)> {
        Some(("image.id", self.image.id.clone()))
    }
}

/// Feature descriptions keyed by vocabulary entry.
///
/// The TOML form is a `[descriptions]` table; entries override the
/// built-in text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDescriptions {
    pub descriptions: BTreeMap<String, String>,
}

const BUILTIN_DESCRIPTIONS: [(&str, &str); 10] = [
    ("single eyelids", "Single eyelids have no visible crease above the eye, so the upper lid looks smooth from the lashes to the brow."),
    ("double eyelids", "Double eyelids have a visible crease above the lashes that splits the upper lid into two folds."),
    ("phoenix eyes", "Phoenix eyes are long and narrow, with outer corners that sweep upward like the tail of a phoenix."),
    ("almond eyes", "Almond eyes are oval, wider in the middle and tapering to slightly pointed corners like an almond."),
    ("peach blossom eyes", "Peach blossom eyes are gently curved with slightly upturned outer corners and a soft, moist look."),
    ("upturned nose", "An upturned nose has a tip that points slightly upward, showing more of the nostrils from the front."),
    ("aquiline nose", "An aquiline nose has a prominent bridge with a convex curve, like the beak of an eagle."),
    ("low bridge nose", "A low bridge nose has a flat bridge that barely rises between the eyes."),
    ("cherry lips", "Cherry lips are small, full and rounded, with a clear cupid's bow like a cherry."),
    ("thick lips", "Thick lips are full and voluminous in both the upper and the lower lip."),
];

impl Default for FeatureDescriptions {
    fn default() -> Self {
        Self {
            descriptions: BUILTIN_DESCRIPTIONS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl FeatureDescriptions {
    /// Built-in descriptions overridden by the file's entries.
    pub fn from_toml_str(text: &str) -> Result<Self, ForgeError> {
        let parsed: FeatureDescriptions =
            toml::from_str(text).map_err(|e| ForgeError::Label { line: 0, message: e.to_string() })?;
        let mut out = Self::default();
        for (k, v) in parsed.descriptions {
            let entry = ZeroShotCategory::ALL
                .iter()
                .find_map(|c| c.resolve(&k))
                .ok_or_else(|| ForgeError::OutOfVocabulary { category: "zero-shot".into(), value: k.clone() })?;
            if v.trim().is_empty() {
                return Err(ForgeError::MissingDescription(k));
            }
            out.descriptions.insert(entry.to_string(), v.trim().to_string());
        }
        Ok(out)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, ForgeError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, entry: &str) -> Result<&str, ForgeError> {
        self.descriptions
            .get(entry)
            .map(String::as_str)
            .filter(|d| !d.trim().is_empty())
            .ok_or_else(|| ForgeError::MissingDescription(entry.to_string()))
    }
}

/// Questions for every item, two or three per image.
///
/// With `target` set, exactly `target - 2n` seeded-chosen images get a third
/// question; otherwise each image gets one by a seeded coin.
pub fn build_zeroshot_suite(
    items: &[ZeroShotItem],
    descriptions: &FeatureDescriptions,
    seed: u64,
    target: Option<usize>,
) -> Result<Vec<QAPair>, ForgeError> {
    let n = items.len();
    let third: Vec<bool> = match target {
        Some(t) => {
            if t < 2 * n || t > 3 * n {
                return Err(ForgeError::UnreachableTarget { target: t, images: n });
            }
            let mut flags = vec![false; n];
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut seed::rng_for(seed, &["zeroshot", "third"]));
            for &i in &idx[..t - 2 * n] {
                flags[i] = true;
            }
            flags
        }
        None => items
            .iter()
            .map(|it| seed::rng_for(seed, &["zeroshot", "third", &it.image.id]).random_bool(0.5))
            .collect(),
    };

    let mut out = Vec::with_capacity(3 * n);
    for (item, extra) in items.iter().zip(third) {
        let cat = item.category;
        let gold = cat.resolve(&item.gold_value).ok_or_else(|| ForgeError::OutOfVocabulary {
            category: cat.phrase().to_string(),
            value: item.gold_value.clone(),
        })?;
        let mut rng = seed::rng_for(seed, &["zeroshot", &item.image.id]);
        let vocab: Vec<String> = cat.vocabulary().iter().map(|s| s.to_string()).collect();
        let gold_idx = vocab.iter().position(|v| v == gold).expect("resolved");
        let (options, letter) = shuffle_options(&vocab, gold_idx, rng.next_u64())?;
        let all_desc = options
            .iter()
            .map(|o| descriptions.get(&o.text))
            .collect::<Result<Vec<_>, _>>()?
            .join(" ");
        out.push(QAPair {
            id: format!("{}/zs/{}/mc", item.image.id, cat),
            image: item.image.clone(),
            task: TaskKind::MultipleChoice,
            category: cat.key().to_string(),
            question: format!(
                "{all_desc} Which {} does the person in the picture have? {} {MC_INSTRUCTION}",
                cat.phrase(),
                format_options(&options)
            ),
            options: Some(options),
            gold: GoldLabel::Letter(letter),
            aux_description: Some(all_desc),
        });

        let distractors: Vec<&str> = cat.vocabulary().iter().copied().filter(|v| *v != gold).collect();
        let distractor = *distractors.choose(&mut rng).expect("vocabulary has two or more entries");
        let asked: Vec<&str> = if extra {
            vec![gold, distractor]
        } else if rng.random_bool(0.5) {
            vec![gold]
        } else {
            vec![distractor]
        };
        for value in asked {
            let desc = descriptions.get(value)?;
            out.push(QAPair {
                id: format!("{}/zs/{}/yn/{}", item.image.id, cat, value.replace(' ', "_")),
                image: item.image.clone(),
                task: TaskKind::YesNo,
                category: cat.key().to_string(),
                question: format!("{desc} Does the person in the picture have {value}? {YES_NO_INSTRUCTION}"),
                options: None,
                gold: GoldLabel::Boolean(YesNo::from_bool(value == gold)),
                aux_description: Some(desc.to_string()),
            });
        }
    }
    Ok(out)
}
