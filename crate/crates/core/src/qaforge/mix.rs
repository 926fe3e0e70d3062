//! Training-mix assembly: seeded per-source sampling and interleaving.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::ForgeError;
use crate::schema::{Record, Violation};
use crate::seed;

/// A source's requested count: a number or every available record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetCount {
    Exact(u64),
    All(AllMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllMarker {
    All,
}

impl TargetCount {
    pub const ALL: TargetCount = TargetCount::All(AllMarker::All);

    pub fn exact(self) -> Option<u64> {
        match self {
            TargetCount::Exact(n) => Some(n),
            TargetCount::All(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSource {
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub target: TargetCount,
    /// Dotted field path; sampling spreads the target evenly over its values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance_by: Option<String>,
}

impl MixSource {
    pub fn new(role: &str, target: TargetCount) -> Self {
        Self {
            role: role.to_string(),
            path: None,
            target,
            balance_by: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSpec {
    pub name: String,
    pub seed: u64,
    /// Sum of the exact targets; absent when any source takes all records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<u64>,
    #[serde(default)]
    pub sources: Vec<MixSource>,
}

impl MixSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, ForgeError> {
        let spec: MixSpec = toml::from_str(text).map_err(|e| ForgeError::MixSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, ForgeError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("mix spec serializes")
    }

    pub fn validate(&self) -> Result<(), ForgeError> {
        let mut roles = std::collections::HashSet::new();
        let mut sum = 0u64;
        let mut has_all = false;
        for s in &self.sources {
            if s.role.trim().is_empty() {
                return Err(ForgeError::MixSpec("source role must be non-empty".into()));
            }
            if !roles.insert(s.role.as_str()) {
                return Err(ForgeError::MixSpec(format!("duplicate source role {:?}", s.role)));
            }
            match s.target {
                TargetCount::Exact(0) => {
                    return Err(ForgeError::MixSpec(format!("source {:?} has target 0", s.role)))
                }
                TargetCount::Exact(n) => sum += n,
                TargetCount::All(_) => has_all = true,
            }
        }
        match (self.total, has_all) {
            (Some(_), true) => Err(ForgeError::MixSpec(
                "total must be omitted when a source takes all records".into(),
            )),
            (Some(t), false) if t != sum => Err(ForgeError::MixSpec(format!(
                "source targets sum to {sum}, total is {t}"
            ))),
            _ => Ok(()),
        }
    }

    /// Every exact target multiplied by `scale`, total recomputed.
    pub fn scaled(&self, scale: Scale) -> MixSpec {
        let mut out = self.clone();
        for s in &mut out.sources {
            if let TargetCount::Exact(n) = s.target {
                s.target = TargetCount::Exact(scale.apply(n));
            }
        }
        if out.total.is_some() {
            out.total = Some(out.sources.iter().filter_map(|s| s.target.exact()).sum());
        }
        out
    }
}

/// A rational downscaling factor such as `1/1000`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub num: u64,
    pub den: u64,
}

impl Scale {
    pub const ONE: Scale = Scale { num: 1, den: 1 };

    /// Rounded half up, never below 1 for a positive count.
    pub fn apply(self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        let scaled = (n as u128 * self.num as u128 * 2 + self.den as u128) / (2 * self.den as u128);
        (scaled as u64).max(1)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let scale = if let Some((a, b)) = s.split_once('/') {
            let num = a.trim().parse().map_err(|_| format!("bad scale numerator in {s:?}"))?;
            let den = b.trim().parse().map_err(|_| format!("bad scale denominator in {s:?}"))?;
            Scale { num, den }
        } else {
            let x: f64 = s.parse().map_err(|_| format!("bad scale {s:?}"))?;
            if !(x.is_finite() && x > 0.0) {
                return Err(format!("scale {s:?} must be positive"));
            }
            Scale {
                num: (x * 1_000_000.0).round() as u64,
                den: 1_000_000,
            }
        };
        if scale.num == 0 || scale.den == 0 {
            return Err(format!("scale {s:?} must be positive"));
        }
        Ok(scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixManifestSource {
    pub role: String,
    /// `None` when every available record was requested.
    pub requested: Option<u64>,
    pub available: u64,
    pub sampled: u64,
    pub proportion: f64,
}

/// What a mix contains and how it was drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixManifest {
    pub name: String,
    pub seed: u64,
    pub scale: Option<String>,
    pub total: u64,
    pub sources: Vec<MixManifestSource>,
}

impl Record for MixManifest {
    const KIND: &'static str = "mix_manifest";
    const FIELDS: &'static [&'static str] = &["name", "seed", "scale", "total", "sources"];

    fn validate(&self) -> Result<(), Violation> {
        let sum: u64 = self.sources.iter().map(|s| s.sampled).sum();
        if sum != self.total {
            return Err(Violation::new("total", format!("sources sum to {sum}, total is {}", self.total)));
        }
        for s in &self.sources {
            if s.sampled > s.available {
                return Err(Violation::new("sources", format!("{} sampled more than available", s.role)));
            }
            if !(0.0..=1.0).contains(&s.proportion) {
                return Err(Violation::new("sources", format!("{} proportion outside [0, 1]", s.role)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MixOutput {
    pub manifest: MixManifest,
    /// Sampled record lines, interleaved.
    pub records: Vec<String>,
}

/// Sample every source without replacement and interleave the result.
///
/// `inventories` maps source roles to record lines.
pub fn assemble_mix(
    spec: &MixSpec,
    inventories: &BTreeMap<String, Vec<String>>,
    scale: Option<Scale>,
) -> Result<MixOutput, ForgeError> {
    spec.validate()?;
    let spec = match scale {
        Some(s) => spec.scaled(s),
        None => spec.clone(),
    };
    let empty = Vec::new();
    let mut records = Vec::new();
    let mut sources = Vec::new();
    for src in &spec.sources {
        let inv = inventories.get(&src.role).unwrap_or(&empty);
        let available = inv.len() as u64;
        let need = src.target.exact().unwrap_or(available);
        if need > available {
            return Err(ForgeError::InventoryTooSmall {
                role: src.role.clone(),
                needed: need,
                available,
            });
        }
        let mut rng = seed::rng_for(spec.seed, &["mix", &src.role]);
        let picked: Vec<usize> = match &src.balance_by {
            Some(field) => balanced(inv, field, need as usize, &mut rng)?,
            None => index::sample(&mut rng, inv.len(), need as usize).into_vec(),
        };
        records.extend(picked.into_iter().map(|i| inv[i].clone()));
        sources.push(MixManifestSource {
            role: src.role.clone(),
            requested: src.target.exact(),
            available,
            sampled: need,
            proportion: 0.0,
        });
    }
    records.shuffle(&mut seed::rng_for(spec.seed, &["mix", "interleave"]));
    let total = records.len() as u64;
    for s in &mut sources {
        s.proportion = if total == 0 { 0.0 } else { s.sampled as f64 / total as f64 };
    }
    Ok(MixOutput {
        manifest: MixManifest {
            name: spec.name.clone(),
            seed: spec.seed,
            scale: scale.map(|s| s.to_string()),
            total,
            sources,
        },
        records,
    })
}

fn field_value(line: &str, path: &str) -> Result<String, String> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let mut cur = &value;
    for part in path.split('.') {
        cur = cur.get(part).ok_or_else(|| format!("missing field {path:?}"))?;
    }
    Ok(match cur {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    })
}

/// Round-robin over the field's values, each group in seeded order.
fn balanced(inv: &[String], field: &str, need: usize, rng: &mut impl rand::Rng) -> Result<Vec<usize>, ForgeError> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, line) in inv.iter().enumerate() {
        let key = field_value(line, field).map_err(|m| ForgeError::Label { line: i + 1, message: m })?;
        groups.entry(key).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut groups {
        g.shuffle(rng);
        g.reverse();
    }
    let mut out = Vec::with_capacity(need);
    while out.len() < need {
        for g in &mut groups {
            if out.len() == need {
                break;
            }
            if let Some(i) = g.pop() {
                out.push(i);
            }
        }
    }
    Ok(out)
}
