use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// The nine style keywords used when no keyword set is configured.
pub const DEFAULT_STYLES: [&str; 9] = [
    "aerodynamic",
    "classic",
    "dynamic",
    "elegant",
    "futuristic",
    "luxury",
    "rugged",
    "sleek",
    "sporty",
];

/// An aesthetic descriptor, stored as a lowercase token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StyleKeyword(String);

impl StyleKeyword {
    pub fn new(name: &str) -> Result<Self, CorpusError> {
        let token = name.trim().to_lowercase();
        if token.is_empty() || token.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(CorpusError::InvalidStyle(name.to_string()));
        }
        Ok(Self(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StyleKeyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The configured set of admissible style keywords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleSet(BTreeSet<StyleKeyword>);

impl StyleSet {
    pub fn new<I, S>(names: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set = names
            .into_iter()
            .map(|n| StyleKeyword::new(n.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if set.is_empty() {
            return Err(CorpusError::InvalidStyle(String::new()));
        }
        Ok(Self(set))
    }

    /// Parses `name` and checks membership.
    pub fn keyword(&self, name: &str) -> Result<StyleKeyword, CorpusError> {
        let kw = StyleKeyword::new(name).map_err(|_| CorpusError::UnknownStyle(name.to_string()))?;
        if self.0.contains(&kw) {
            Ok(kw)
        } else {
            Err(CorpusError::UnknownStyle(name.to_string()))
        }
    }

    pub fn contains(&self, kw: &StyleKeyword) -> bool {
        self.0.contains(kw)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StyleKeyword> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for StyleSet {
    fn default() -> Self {
        Self::new(DEFAULT_STYLES).expect("default styles are valid")
    }
}

/// One product image and what is known about it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub id: String,
    pub image_path: PathBuf,
    pub caption: Option<String>,
    pub embedding: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl FromStr for Side {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            _ => Err(CorpusError::InvalidValue {
                field: "winner",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "Left",
            Side::Right => "Right",
        })
    }
}

/// One forced choice between two stimuli under a style keyword.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub judge_id: String,
    pub style: StyleKeyword,
    pub left_id: String,
    pub right_id: String,
    pub winner: Side,
}

impl Judgment {
    pub fn winner_id(&self) -> &str {
        match self.winner {
            Side::Left => &self.left_id,
            Side::Right => &self.right_id,
        }
    }

    pub fn loser_id(&self) -> &str {
        match self.winner {
            Side::Left => &self.right_id,
            Side::Right => &self.left_id,
        }
    }
}

/// Spoke split category. The derived ordering (`None < Single < Split`)
/// is the tie-break order used when aggregating annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SplitType {
    None,
    Single,
    Split,
}

impl SplitType {
    pub const ALL: [SplitType; 3] = [SplitType::None, SplitType::Single, SplitType::Split];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitType::None => "none",
            SplitType::Single => "single",
            SplitType::Split => "split",
        }
    }
}

impl FromStr for SplitType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "zero" => Ok(SplitType::None),
            "single" => Ok(SplitType::Single),
            "split" => Ok(SplitType::Split),
            _ => Err(CorpusError::InvalidValue {
                field: "split type",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnotationValue {
    Presence(bool),
    SpokeCount(u32),
    Split(SplitType),
}

impl AnnotationValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            AnnotationValue::Presence(_) => ValueKind::Presence,
            AnnotationValue::SpokeCount(_) => ValueKind::SpokeCount,
            AnnotationValue::Split(_) => ValueKind::Split,
        }
    }

    /// Parses the textual cell form: `TRUE`/`FALSE`, a non-negative integer,
    /// or one of the split categories.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let t = text.trim();
        match t.to_ascii_lowercase().as_str() {
            "true" => return Ok(AnnotationValue::Presence(true)),
            "false" => return Ok(AnnotationValue::Presence(false)),
            _ => {}
        }
        if let Ok(n) = t.parse::<u32>() {
            return Ok(AnnotationValue::SpokeCount(n));
        }
        t.parse::<SplitType>()
            .map(AnnotationValue::Split)
            .map_err(|_| CorpusError::InvalidValue {
                field: "annotation value",
                value: text.to_string(),
            })
    }
}

impl fmt::Display for AnnotationValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotationValue::Presence(true) => f.write_str("TRUE"),
            AnnotationValue::Presence(false) => f.write_str("FALSE"),
            AnnotationValue::SpokeCount(n) => write!(f, "{n}"),
            AnnotationValue::Split(s) => f.write_str(s.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValueKind {
    Presence,
    SpokeCount,
    Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub annotator_id: String,
    pub stimulus_id: String,
    pub feature_name: String,
    pub value: AnnotationValue,
}

/// A participant's free-text account of the cues used for one style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseText {
    pub respondent_id: String,
    pub style: StyleKeyword,
    pub text: String,
    pub embedding: Option<Vec<f64>>,
}

/// Designer-informed wheel feature vocabulary and the value kind each
/// feature is annotated with.
pub const FEATURE_REGISTRY: [(&str, ValueKind); 12] = [
    ("directional", ValueKind::Presence),
    ("split_type", ValueKind::Split),
    ("spokes", ValueKind::SpokeCount),
    ("doublesplit", ValueKind::Presence),
    ("triplesplit", ValueKind::Presence),
    ("vsplit", ValueKind::Presence),
    ("ysplit", ValueKind::Presence),
    ("complexsplit", ValueKind::Presence),
    ("offset", ValueKind::Presence),
    ("doublestacked", ValueKind::Presence),
    ("hollowed", ValueKind::Presence),
    ("indented", ValueKind::Presence),
];

pub fn registered_kind(feature: &str) -> Option<ValueKind> {
    FEATURE_REGISTRY
        .iter()
        .find(|(name, _)| *name == feature)
        .map(|&(_, kind)| kind)
}
