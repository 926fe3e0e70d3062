//! Three-stage training recipe as validated manifests. Nothing here trains;
//! a manifest is handed to an external trainer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qaforge::{MixSource, MixSpec, Scale, TargetCount};
use crate::schema::{Record, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    VisionEncoder,
    Projector,
    LanguageModel,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::VisionEncoder => "vision_encoder",
            Component::Projector => "projector",
            Component::LanguageModel => "language_model",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Adaptation {
    None,
    LowRank { rank: u32 },
}

pub const STAGE2_RANK: u32 = 16;
pub const STAGE3_RANK: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub stage: u8,
    pub trainable: BTreeSet<Component>,
    pub adaptation: Adaptation,
    /// Opaque to this crate; the trainer decides which weights get adapters.
    #[serde(default)]
    pub adapter_targets: Vec<String>,
    pub data_mix: MixSpec,
    /// Optimizer settings. No defaults are supplied.
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("stage must be 1, 2 or 3, got {0}")]
    StageOutOfRange(u8),
}

/// A broken manifest rule; `rule` is a stable identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestViolation {
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for ManifestViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

const GENERAL: (&str, u64) = ("general_instruct", 660_000);
const TEXT_ONLY: (&str, u64) = ("text_only_qa", 140_000);

fn mix(stage: u8, sources: Vec<MixSource>) -> MixSpec {
    let total = sources.iter().map(|s| s.target.exact()).sum::<Option<u64>>();
    MixSpec {
        name: format!("stage{stage}"),
        seed: 0,
        total,
        sources,
    }
}

fn exact(role: &str, n: u64) -> MixSource {
    MixSource::new(role, TargetCount::Exact(n))
}

pub fn default_stage_spec(stage: u8) -> Result<StageSpec, ManifestError> {
    use Component::*;
    let (trainable, adaptation, sources) = match stage {
        1 => (
            vec![Projector],
            Adaptation::None,
            vec![exact("face_captions", 150_000), exact("general_pairs", 660_000)],
        ),
        2 => (
            vec![Projector, LanguageModel],
            Adaptation::LowRank { rank: STAGE2_RANK },
            vec![exact("face_qa", 4_750_000), exact(GENERAL.0, GENERAL.1), exact(TEXT_ONLY.0, TEXT_ONLY.1)],
        ),
        3 => (
            vec![Projector, LanguageModel],
            Adaptation::LowRank { rank: STAGE3_RANK },
            vec![
                MixSource::new("reformulated_face_qa", TargetCount::ALL),
                exact(GENERAL.0, GENERAL.1),
                exact(TEXT_ONLY.0, TEXT_ONLY.1),
            ],
        ),
        s => return Err(ManifestError::StageOutOfRange(s)),
    };
    Ok(StageSpec {
        stage,
        trainable: trainable.into_iter().collect(),
        adaptation,
        adapter_targets: Vec::new(),
        data_mix: mix(stage, sources),
        hyperparameters: BTreeMap::new(),
    })
}

impl StageSpec {
    /// Every exact mix count multiplied by `scale`.
    pub fn scaled(&self, scale: Scale) -> StageSpec {
        StageSpec {
            data_mix: self.data_mix.scaled(scale),
            ..self.clone()
        }
    }

    /// Share of each exact-count source in the mix total.
    pub fn proportions(&self) -> Vec<(String, f64)> {
        let total: u64 = self.data_mix.sources.iter().filter_map(|s| s.target.exact()).sum();
        self.data_mix
            .sources
            .iter()
            .filter_map(|s| s.target.exact().map(|n| (s.role.clone(), n as f64 / total as f64)))
            .collect()
    }
}

/// Every broken rule; empty when the manifest is valid.
pub fn validate_manifest(spec: &StageSpec) -> Vec<ManifestViolation> {
    let mut out = Vec::new();
    let mut push = |rule, message: String| out.push(ManifestViolation { rule, message });
    let has = |c| spec.trainable.contains(&c);
    let rank = match spec.adaptation {
        Adaptation::None => None,
        Adaptation::LowRank { rank } => Some(rank),
    };
    match spec.stage {
        1 => {
            if spec.trainable.iter().ne([Component::Projector].iter()) {
                let listed: Vec<String> = spec.trainable.iter().map(|c| c.to_string()).collect();
                push(
                    "stage1_projector_only",
                    format!("stage 1 trains the projector only, vision encoder and language model frozen; trainable is [{}]", listed.join(", ")),
                );
            }
            if let Some(r) = rank {
                push("stage1_no_adaptation", format!("stage 1 uses no low-rank adaptation, got rank {r}"));
            }
        }
        2 | 3 => {
            let expected = if spec.stage == 2 { STAGE2_RANK } else { STAGE3_RANK };
            for c in [Component::Projector, Component::LanguageModel] {
                if !has(c) {
                    push("trainable_projector_and_language_model", format!("stage {} must train {c}", spec.stage));
                }
            }
            if rank != Some(expected) {
                let got = rank.map_or("none".to_string(), |r| r.to_string());
                push("low_rank", format!("stage {} expects low-rank adaptation with rank {expected}, got {got}", spec.stage));
            }
        }
        s => push("stage_range", format!("stage must be 1, 2 or 3, got {s}")),
    }
    if let Some(0) = rank {
        push("low_rank", "rank must be positive".to_string());
    }
    if let Err(e) = spec.data_mix.validate() {
        push("mix_arithmetic", e.to_string());
    }
    if spec.data_mix.sources.is_empty() {
        push("mix_arithmetic", "data mix has no sources".to_string());
    }
    out
}

impl Record for StageSpec {
    const KIND: &'static str = "stage_spec";
    const FIELDS: &'static [&'static str] =
        &["stage", "trainable", "adaptation", "adapter_targets", "data_mix", "hyperparameters"];

    fn validate(&self) -> Result<(), Violation> {
        match validate_manifest(self).into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Violation::new(v.rule, v.message)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{read_records, write_records, Mode};

    fn counts(spec: &StageSpec) -> Vec<Option<u64>> {
        spec.data_mix.sources.iter().map(|s| s.target.exact()).collect()
    }

    #[test]
    fn defaults_are_valid_and_round_trip() {
        for s in 1..=3 {
            let spec = default_stage_spec(s).unwrap();
            assert!(validate_manifest(&spec).is_empty(), "{s}: {:?}", validate_manifest(&spec));
            let mut buf = Vec::new();
            write_records(std::slice::from_ref(&spec), &mut buf).unwrap();
            let back: Vec<StageSpec> = read_records(&buf[..], Mode::Strict).unwrap();
            assert_eq!(back, vec![spec]);
        }
        assert_eq!(default_stage_spec(4).unwrap_err(), ManifestError::StageOutOfRange(4));
        assert_eq!(default_stage_spec(0).unwrap_err(), ManifestError::StageOutOfRange(0));
    }

    #[test]
    fn stage_settings() {
        let s1 = default_stage_spec(1).unwrap();
        assert_eq!(s1.trainable, BTreeSet::from([Component::Projector]));
        assert_eq!(s1.adaptation, Adaptation::None);
        assert_eq!(default_stage_spec(2).unwrap().adaptation, Adaptation::LowRank { rank: 16 });
        assert_eq!(default_stage_spec(3).unwrap().adaptation, Adaptation::LowRank { rank: 8 });
        let s3 = default_stage_spec(3).unwrap();
        assert_eq!(s3.data_mix.sources[0].target, TargetCount::ALL);
        assert_eq!(s3.data_mix.total, None);
    }

    #[test]
    fn scaled_counts() {
        let k = Scale { num: 1, den: 1000 };
        assert_eq!(counts(&default_stage_spec(1).unwrap().scaled(k)), [Some(150), Some(660)]);
        let s2 = default_stage_spec(2).unwrap().scaled(k);
        assert_eq!(counts(&s2), [Some(4750), Some(660), Some(140)]);
        assert_eq!(s2.data_mix.total, Some(5550));
        assert!(validate_manifest(&s2).is_empty());
    }

    #[test]
    fn stage2_proportions() {
        let p = default_stage_spec(2).unwrap().proportions();
        let want = [0.856, 0.119, 0.025];
        for ((_, got), w) in p.iter().zip(want) {
            assert!((got - w).abs() < 1e-3, "{got} vs {w}");
        }
    }

    #[test]
    fn violations_name_their_rule() {
        let mut s1 = default_stage_spec(1).unwrap();
        s1.trainable.insert(Component::LanguageModel);
        let v = validate_manifest(&s1);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "stage1_projector_only");
        assert!(v[0].message.contains("frozen"));

        let mut s2 = default_stage_spec(2).unwrap();
        s2.adaptation = Adaptation::LowRank { rank: 8 };
        let v = validate_manifest(&s2);
        assert_eq!(v[0].rule, "low_rank");
        assert!(v[0].message.contains("16"));
    }

    #[test]
    fn every_violation_is_listed() {
        let mut s3 = default_stage_spec(3).unwrap();
        s3.trainable.clear();
        s3.adaptation = Adaptation::None;
        s3.data_mix.total = Some(1);
        let rules: Vec<_> = validate_manifest(&s3).iter().map(|v| v.rule).collect();
        assert_eq!(
            rules,
            ["trainable_projector_and_language_model", "trainable_projector_and_language_model", "low_rank", "mix_arithmetic"]
        );
    }
}
