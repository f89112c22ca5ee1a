//! Per-feature text comparison and category ranking.
//!
//! A text is compared with every category on each requested feature. The
//! per-feature distances form a vector whose Euclidean norm ranks the
//! categories; the smallest norm wins, ties go to the lexicographically
//! smaller category name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::distance::{distance_between, DistanceError, DistanceParams};
use crate::features::{
    build_grammar_pts, build_letter_pts_with, build_pos_pts, combine, parse_tagged_tsv,
    parse_trees, FeatureError, FeaturePts, DEFAULT_TERMINATORS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Letters,
    Pos,
    Grammar,
}

impl Feature {
    /// Row order used when no explicit feature list is given.
    pub const DEFAULT_ORDER: [Feature; 3] = [Feature::Pos, Feature::Grammar, Feature::Letters];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Letters => "letters",
            Feature::Pos => "pos",
            Feature::Grammar => "grammar",
        }
    }

    /// Row heading in rendered tables.
    pub fn heading(self) -> &'static str {
        match self {
            Feature::Letters => "Letters",
            Feature::Pos => "POS",
            Feature::Grammar => "Grammar",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "letters" | "letter" => Ok(Feature::Letters),
            "pos" => Ok(Feature::Pos),
            "grammar" | "trees" => Ok(Feature::Grammar),
            _ => Err(format!(
                "unknown feature {s:?} (expected letters, pos or grammar)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("no categories given")]
    NoCategories,
    #[error("no features given")]
    NoFeatures,
    #[error("feature {0} requested twice")]
    DuplicateFeature(Feature),
    #[error("category {0:?} given twice")]
    DuplicateCategory(String),
    #[error("{input} has no {feature} input")]
    Unavailable { input: String, feature: Feature },
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("category {category:?}, feature {feature}: {source}")]
    Category {
        category: String,
        feature: Feature,
        #[source]
        source: Box<ClassifyError>,
    },
}

/// Feature systems of one text or one category, with content digests of
/// the inputs they were built from.
#[derive(Debug, Clone, Default)]
pub struct TextInputs {
    systems: BTreeMap<Feature, FeaturePts>,
    digests: BTreeMap<Feature, String>,
}

impl TextInputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_raw_text(self, text: &str) -> Result<Self, FeatureError> {
        self.with_raw_text_terminated(text, DEFAULT_TERMINATORS)
    }

    pub fn with_raw_text_terminated(
        self,
        text: &str,
        terminators: &[char],
    ) -> Result<Self, FeatureError> {
        let system = build_letter_pts_with(text, terminators)?;
        Ok(self.insert(Feature::Letters, system, text))
    }

    pub fn with_tagged_tsv(self, tsv: &str) -> Result<Self, FeatureError> {
        let system = build_pos_pts(&parse_tagged_tsv(tsv)?)?;
        Ok(self.insert(Feature::Pos, system, tsv))
    }

    pub fn with_trees(self, trees: &str) -> Result<Self, FeatureError> {
        let system = build_grammar_pts(&parse_trees(trees)?)?;
        Ok(self.insert(Feature::Grammar, system, trees))
    }

    /// Uses an already built system; its digest covers the system's JSON form.
    pub fn with_system(self, feature: Feature, system: FeaturePts) -> Self {
        let json = system.pts().to_json();
        self.insert(feature, system, &json)
    }

    fn insert(mut self, feature: Feature, system: FeaturePts, source: &str) -> Self {
        self.systems.insert(feature, system);
        self.digests.insert(feature, sha256_hex(source.as_bytes()));
        self
    }

    pub fn features(&self) -> impl Iterator<Item = Feature> + '_ {
        self.systems.keys().copied()
    }

    pub fn system(&self, feature: Feature) -> Option<&FeaturePts> {
        self.systems.get(&feature)
    }

    /// SHA-256 over the per-feature input digests, in feature order.
    pub fn digest(&self) -> String {
        let mut joined = String::new();
        for (feature, digest) in &self.digests {
            joined.push_str(feature.name());
            joined.push(':');
            joined.push_str(digest);
            joined.push('\n');
        }
        sha256_hex(joined.as_bytes())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Distance between the start states of `a` and `b` after joining their
/// `feature` systems at the end state.
pub fn feature_distance(
    a: &TextInputs,
    b: &TextInputs,
    feature: Feature,
    params: &DistanceParams,
) -> Result<f64, ClassifyError> {
    named_feature_distance((a, "first input"), (b, "second input"), feature, params)
}

fn named_feature_distance(
    (a, a_name): (&TextInputs, &str),
    (b, b_name): (&TextInputs, &str),
    feature: Feature,
    params: &DistanceParams,
) -> Result<f64, ClassifyError> {
    let unavailable = |input: &str| ClassifyError::Unavailable {
        input: input.to_string(),
        feature,
    };
    let first = a.system(feature).ok_or_else(|| unavailable(a_name))?;
    let second = b.system(feature).ok_or_else(|| unavailable(b_name))?;
    let joined = combine(first, second);
    Ok(distance_between(
        &joined.pts,
        joined.start_a,
        joined.start_b,
        params,
    )?)
}

/// Per-feature distances in request order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<(Feature, f64)>);

impl FeatureVector {
    pub fn entries(&self) -> &[(Feature, f64)] {
        &self.0
    }

    pub fn get(&self, feature: Feature) -> Option<f64> {
        self.0.iter().find(|(f, _)| *f == feature).map(|&(_, v)| v)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (feature, value) in &self.0 {
            map.serialize_entry(feature.name(), &value.to_string())?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryScore {
    pub category: String,
    pub distances: FeatureVector,
    #[serde(serialize_with = "as_decimal")]
    pub euclid: f64,
    pub digest: String,
}

fn as_decimal<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&value.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub format_version: u32,
    pub params: DistanceParams,
    pub features: Vec<Feature>,
    pub text_digest: String,
    /// In the order the categories were given.
    pub scores: Vec<CategoryScore>,
    /// Category names, best first.
    pub ranking: Vec<String>,
    pub tie_break: &'static str,
}

impl ClassificationReport {
    pub fn best(&self) -> &str {
        &self.ranking[0]
    }

    pub fn score(&self, category: &str) -> Option<&CategoryScore> {
        self.scores.iter().find(|s| s.category == category)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Features as rows plus a final `Euclid` row, categories as columns,
    /// four decimals, followed by the ranking.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, Vec<f64>)> = self
            .features
            .iter()
            .map(|&f| {
                let values = self
                    .scores
                    .iter()
                    .map(|s| s.distances.get(f).unwrap())
                    .collect();
                (f.heading().to_string(), values)
            })
            .collect();
        rows.push((
            "Euclid".into(),
            self.scores.iter().map(|s| s.euclid).collect(),
        ));

        let head_width = rows.iter().map(|(h, _)| h.len()).max().unwrap_or(0);
        let widths: Vec<usize> = self
            .scores
            .iter()
            .map(|s| s.category.chars().count().max(6))
            .collect();

        let mut out = format!("{:head_width$}", "");
        for (score, w) in self.scores.iter().zip(&widths) {
            out.push_str(&format!("  {:>w$}", score.category));
        }
        out.push('\n');
        for (heading, values) in rows {
            out.push_str(&format!("{heading:head_width$}"));
            for (v, w) in values.iter().zip(&widths) {
                out.push_str(&format!("  {v:>w$.4}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("\nranking: {}\n", self.ranking.join(", ")));
        out
    }
}

/// Compares `text` with every category on every feature and ranks the
/// categories by the Euclidean norm of their distance vectors.
pub fn classify(
    text: &TextInputs,
    categories: &[(String, TextInputs)],
    features: &[Feature],
    params: &DistanceParams,
) -> Result<ClassificationReport, ClassifyError> {
    if categories.is_empty() {
        return Err(ClassifyError::NoCategories);
    }
    if features.is_empty() {
        return Err(ClassifyError::NoFeatures);
    }
    let mut seen = BTreeSet::new();
    if let Some(&dup) = features.iter().find(|&&f| !seen.insert(f)) {
        return Err(ClassifyError::DuplicateFeature(dup));
    }
    let mut names = BTreeSet::new();
    if let Some((dup, _)) = categories.iter().find(|(name, _)| !names.insert(name)) {
        return Err(ClassifyError::DuplicateCategory(dup.clone()));
    }

    let jobs: Vec<(usize, Feature)> = (0..categories.len())
        .flat_map(|c| features.iter().map(move |&f| (c, f)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(c, feature)| {
            let (name, inputs) = &categories[c];
            let label = format!("category {name:?}");
            named_feature_distance((text, "text"), (inputs, &label), feature, params).map_err(|e| {
                ClassifyError::Category {
                    category: name.clone(),
                    feature,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<f64>, _>>()?;

    let scores: Vec<CategoryScore> = categories
        .iter()
        .zip(values.chunks(features.len()))
        .map(|((name, inputs), row)| {
            let distances =
                FeatureVector(features.iter().copied().zip(row.iter().copied()).collect());
            CategoryScore {
                category: name.clone(),
                euclid: distances.euclidean_norm(),
                distances,
                digest: inputs.digest(),
            }
        })
        .collect();

    let mut order: Vec<&CategoryScore> = scores.iter().collect();
    order.sort_by(|a, b| {
        a.euclid
            .total_cmp(&b.euclid)
            .then_with(|| a.category.cmp(&b.category))
    });
    let ranking = order.into_iter().map(|s| s.category.clone()).collect();

    Ok(ClassificationReport {
        format_version: 1,
        params: *params,
        features: features.to_vec(),
        text_digest: text.digest(),
        scores,
        ranking,
        tie_break: "lexicographic by category name",
    })
}
