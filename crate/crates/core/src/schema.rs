//! Feature inventories and the factored/unfactored tag bijection.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Every feature name a schema may declare, in canonical dialect order.
pub const KNOWN_FEATURES: [&str; 16] = [
    "pos", "per", "gen", "num", "asp", "vox", "mod", "stt", "cas", "prc3", "prc2", "prc1", "prc0",
    "enc0", "enc1", "enc2",
];

/// Features shared by every variant once cross-dialect harmonization has run.
pub const ALL_TAGS_10: [&str; 10] = [
    "pos", "per", "gen", "num", "asp", "prc3", "prc2", "prc1", "prc0", "enc0",
];

pub const CLITIC_FEATURES: [&str; 7] = ["prc3", "prc2", "prc1", "prc0", "enc0", "enc1", "enc2"];

pub const PROCLITIC_FEATURES: [&str; 4] = ["prc3", "prc2", "prc1", "prc0"];

/// Separator between feature values in an unfactored tag.
pub const TAG_SEPARATOR: char = '+';

/// One feature with its closed value set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub values: BTreeSet<String>,
    pub default: String,
}

impl FeatureDef {
    pub fn new<I, S>(name: &str, values: I, default: &str) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FeatureDef {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
            default: default.into(),
        }
    }

    pub fn contains(&self, value: &str) -> bool {
        self.values.contains(value)
    }
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    variant: String,
    version: String,
    features: Vec<FeatureDef>,
}

/// Ordered morphosyntactic feature inventory for one language variant.
///
/// The feature order is the serialization order of unfactored tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct FeatureSchema {
    variant: String,
    version: String,
    features: Vec<FeatureDef>,
    index: BTreeMap<String, usize>,
}

impl TryFrom<RawSchema> for FeatureSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        FeatureSchema::new(raw.variant, raw.version, raw.features)
    }
}

impl From<FeatureSchema> for RawSchema {
    fn from(s: FeatureSchema) -> Self {
        RawSchema {
            variant: s.variant,
            version: s.version,
            features: s.features,
        }
    }
}

impl FeatureSchema {
    pub fn new(
        variant: impl Into<String>,
        version: impl Into<String>,
        features: Vec<FeatureDef>,
    ) -> Result<Self> {
        let variant = variant.into();
        if features.is_empty() {
            return Err(Error::schema("schema declares no features"));
        }
        let mut index = BTreeMap::new();
        for (i, def) in features.iter().enumerate() {
            if !KNOWN_FEATURES.contains(&def.name.as_str()) {
                return Err(Error::schema(format!("unknown feature {:?}", def.name)));
            }
            if index.insert(def.name.clone(), i).is_some() {
                return Err(Error::schema(format!("duplicate feature {:?}", def.name)));
            }
            if def.values.is_empty() {
                return Err(Error::schema(format!("feature {:?} has no values", def.name)));
            }
            if let Some(bad) = def
                .values
                .iter()
                .find(|v| v.is_empty() || v.contains(TAG_SEPARATOR))
            {
                return Err(Error::schema(format!(
                    "feature {:?}: value {bad:?} is empty or contains {TAG_SEPARATOR:?}",
                    def.name
                )));
            }
            if !def.values.contains(&def.default) {
                return Err(Error::schema(format!(
                    "feature {:?}: default {:?} missing from value set",
                    def.name, def.default
                )));
            }
        }
        let expected = match variant.as_str() {
            "msa" => Some(14),
            "glf" | "egy" | "lev" => Some(16),
            _ => None,
        };
        if let Some(n) = expected {
            if features.len() != n {
                return Err(Error::schema(format!(
                    "variant {variant:?} needs {n} features, found {}",
                    features.len()
                )));
            }
        }
        Ok(FeatureSchema {
            variant,
            version: version.into(),
            features,
            index,
        })
    }

    pub fn variant(&self) -> &str {
        &self.variant
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureDef> {
        self.position(name).map(|i| &self.features[i])
    }

    pub fn has_feature(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Number of distinct unfactored tags the schema can express.
    pub fn tag_space_size(&self) -> u128 {
        self.features
            .iter()
            .map(|f| f.values.len() as u128)
            .product()
    }

    /// Restricts the schema to `names`, keeping this schema's order.
    pub fn project(&self, names: &[&str], variant: impl Into<String>) -> Result<FeatureSchema> {
        for n in names {
            if !self.has_feature(n) {
                return Err(Error::UnknownFeature((*n).to_owned()));
            }
        }
        let features = self
            .features
            .iter()
            .filter(|f| names.contains(&f.name.as_str()))
            .cloned()
            .collect();
        FeatureSchema::new(variant, self.version.clone(), features)
    }

    /// The value `bundle` assigns to `feature`, or the feature's default.
    pub fn value_of<'a>(&'a self, bundle: &'a FeatureBundle, feature: &str) -> Option<&'a str> {
        let def = self.feature(feature)?;
        Some(bundle.get(feature).unwrap_or(def.default.as_str()))
    }

    /// Checks every entry of `bundle` against the schema. Missing features are fine.
    pub fn validate_bundle(&self, bundle: &FeatureBundle) -> Result<()> {
        for (name, value) in bundle.iter() {
            let def = self
                .feature(name)
                .ok_or_else(|| Error::UnknownFeature(name.to_owned()))?;
            if !def.contains(value) {
                return Err(Error::value(name, value));
            }
        }
        Ok(())
    }

    /// Validates `bundle` and fills every missing feature with its default.
    pub fn fill_defaults(&self, bundle: &FeatureBundle) -> Result<FeatureBundle> {
        self.validate_bundle(bundle)?;
        Ok(FeatureBundle(
            self.features
                .iter()
                .map(|f| {
                    let v = bundle.get(&f.name).unwrap_or(&f.default);
                    (f.name.clone(), v.to_owned())
                })
                .collect(),
        ))
    }

    pub fn defaults(&self) -> FeatureBundle {
        FeatureBundle(
            self.features
                .iter()
                .map(|f| (f.name.clone(), f.default.clone()))
                .collect(),
        )
    }

    pub fn serialize_unfactored(&self, bundle: &FeatureBundle) -> Result<UnfactoredTag> {
        self.validate_bundle(bundle)?;
        let mut text = String::new();
        for (i, f) in self.features.iter().enumerate() {
            if i > 0 {
                text.push(TAG_SEPARATOR);
            }
            text.push_str(bundle.get(&f.name).unwrap_or(&f.default));
        }
        Ok(UnfactoredTag(text))
    }

    pub fn parse_unfactored(&self, tag: &UnfactoredTag) -> Result<FeatureBundle> {
        self.parse_tag_str(tag.as_str())
    }

    pub fn parse_tag_str(&self, tag: &str) -> Result<FeatureBundle> {
        if tag.is_empty() {
            return Err(Error::Parse("empty tag".into()));
        }
        let fields: Vec<&str> = tag.split(TAG_SEPARATOR).collect();
        if fields.len() != self.features.len() {
            return Err(Error::Parse(format!(
                "tag {tag:?} has {} fields, schema {:?} expects {}",
                fields.len(),
                self.variant,
                self.features.len()
            )));
        }
        let mut map = BTreeMap::new();
        for (def, value) in self.features.iter().zip(fields) {
            if !def.contains(value) {
                return Err(Error::Parse(format!(
                    "invalid value {value:?} for feature {:?}",
                    def.name
                )));
            }
            map.insert(def.name.clone(), value.to_owned());
        }
        Ok(FeatureBundle(map))
    }
}

/// Feature name to value map for one reading of a word.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureBundle(pub BTreeMap<String, String>);

impl FeatureBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, feature: &str) -> Option<&str> {
        self.0.get(feature).map(String::as_str)
    }

    pub fn insert(&mut self, feature: impl Into<String>, value: impl Into<String>) {
        self.0.insert(feature.into(), value.into());
    }

    pub fn remove(&mut self, feature: &str) -> Option<String> {
        self.0.remove(feature)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for FeatureBundle {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        FeatureBundle(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}

/// Feature values joined by `+` in schema order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnfactoredTag(pub String);

impl UnfactoredTag {
    pub fn new(text: impl Into<String>) -> Self {
        UnfactoredTag(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UnfactoredTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
