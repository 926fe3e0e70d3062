use serde::{Deserialize, Serialize};

use super::templates::CAPTION_INSTRUCTIONS;
use crate::schema::{FaceImageRef, PersonAnnotation, Record, Violation};

/// An image paired with a description instruction and its caption.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptionPair {
    pub id: String,
    pub image: FaceImageRef,
    pub instruction: String,
    pub caption: String,
}

impl Record for CaptionPair {
    const KIND: &'static str = "caption_pair";
    const FIELDS: &'static [&'static str] = &["id", "image", "instruction", "caption"];

    fn validate(&self) -> Result<(), Violation> {
        self.image.check("image")?;
        if self.instruction.trim().is_empty() {
            return Err(Violation::new("instruction", "must be non-empty"));
        }
        if self.caption.trim().is_empty() {
            return Err(Violation::new("caption", "must be non-empty"));
        }
        Ok(())
    }

    fn unique_key(&self) -> Option<(&'static str, String)> {
        Some(("id", self.id.clone()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaptionRun {
    pub pairs: Vec<CaptionPair>,
    /// Images whose every caption was empty.
    pub skipped: Vec<String>,
}

/// One caption pair per image, in order of first appearance.
///
/// The caption merges the distinct non-empty person captions in person
/// order. Instructions rotate over images starting with the first entry of
/// [`CAPTION_INSTRUCTIONS`].
pub fn gen_caption_pairs(annotations: &[PersonAnnotation]) -> CaptionRun {
    let mut order: Vec<&FaceImageRef> = Vec::new();
    let mut people: Vec<Vec<&PersonAnnotation>> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for a in annotations {
        let slot = *index.entry(a.image.id.as_str()).or_insert_with(|| {
            order.push(&a.image);
            people.push(Vec::new());
            order.len() - 1
        });
        people[slot].push(a);
    }

    let mut run = CaptionRun::default();
    for (image, mut persons) in order.into_iter().zip(people) {
        persons.sort_by_key(|p| p.person_index);
        let mut parts: Vec<&str> = Vec::new();
        for p in persons {
            let c = p.caption.trim();
            if !c.is_empty() && !parts.contains(&c) {
                parts.push(c);
            }
        }
        if parts.is_empty() {
            run.skipped.push(image.id.clone());
            continue;
        }
        let instruction = CAPTION_INSTRUCTIONS[run.pairs.len() % CAPTION_INSTRUCTIONS.len()];
        run.pairs.push(CaptionPair {
            id: format!("{}/caption", image.id),
            image: image.clone(),
            instruction: instruction.to_string(),
            caption: parts.join(" "),
        });
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::SourceDataset;
    use std::collections::{BTreeMap, HashSet};

    fn anno(image: &str, idx: u32, caption: &str) -> PersonAnnotation {
        PersonAnnotation {
            image: FaceImageRef::new(image, format!("{image}.jpg"), SourceDataset::LaionFace),
            person_index: idx,
            position: None,
            caption: caption.into(),
            attributes: BTreeMap::new(),
        }
    }

    #[test]
    fn single_caption_uses_reference_instruction() {
        let run = gen_caption_pairs(&[anno("a", 0, "A smiling face.")]);
        assert_eq!(run.pairs.len(), 1);
        assert_eq!(
            run.pairs[0].instruction,
            "Please describe the person in the picture in detail according to his/her face."
        );
        assert_eq!(run.pairs[0].caption, "A smiling face.");
    }

    #[test]
    fn empty_input() {
        assert_eq!(gen_caption_pairs(&[]), CaptionRun::default());
    }

    #[test]
    fn one_record_per_distinct_image() {
        let mut rng = crate::seed::rng(5);
        use rand::Rng;
        let annos: Vec<_> = (0..150)
            .map(|i| anno(&format!("img-{}", rng.random_range(0..60)), i, "Short hair and brown eyes."))
            .collect();
        let distinct: HashSet<_> = annos.iter().map(|a| a.image.id.clone()).collect();
        assert_eq!(gen_caption_pairs(&annos).pairs.len(), distinct.len());
    }

    #[test]
    fn merges_and_skips() {
        let run = gen_caption_pairs(&[
            anno("a", 1, "Second face."),
            anno("b", 0, "  "),
            anno("a", 0, "First face."),
            anno("a", 2, "First face."),
        ]);
        assert_eq!(run.pairs.len(), 1);
        assert_eq!(run.pairs[0].caption, "First face. Second face.");
        assert_eq!(run.skipped, vec!["b".to_string()]);
    }
}
