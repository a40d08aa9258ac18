use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Facial/vocal expression selected for a patient reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseEmotion {
    Neutral,
    Happy,
    Sad,
    Angry,
    Surprised,
    Afraid,
    Disgusted,
}

impl BaseEmotion {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseEmotion::Neutral => "neutral",
            BaseEmotion::Happy => "happy",
            BaseEmotion::Sad => "sad",
            BaseEmotion::Angry => "angry",
            BaseEmotion::Surprised => "surprised",
            BaseEmotion::Afraid => "afraid",
            BaseEmotion::Disgusted => "disgusted",
        }
    }
}

impl FromStr for BaseEmotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "neutral" => BaseEmotion::Neutral,
            "happy" => BaseEmotion::Happy,
            "sad" => BaseEmotion::Sad,
            "angry" => BaseEmotion::Angry,
            "surprised" => BaseEmotion::Surprised,
            "afraid" => BaseEmotion::Afraid,
            "disgusted" => BaseEmotion::Disgusted,
            other => return Err(format!("unknown emotion {other:?}")),
        })
    }
}

/// Highest intensity an emotion can escalate to.
pub const MAX_INTENSITY: u8 = 3;

/// An emotion with an intensity in `1..=3`. Neutral always has intensity 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTag", into = "RawTag")]
pub struct EmotionTag {
    base: BaseEmotion,
    intensity: u8,
}

#[derive(Serialize, Deserialize)]
struct RawTag {
    base: BaseEmotion,
    intensity: u8,
}

impl TryFrom<RawTag> for EmotionTag {
    type Error = String;

    fn try_from(raw: RawTag) -> Result<Self, Self::Error> {
        EmotionTag::new(raw.base, raw.intensity)
            .ok_or_else(|| format!("invalid intensity {} for {}", raw.intensity, raw.base.as_str()))
    }
}

impl From<EmotionTag> for RawTag {
    fn from(t: EmotionTag) -> Self {
        RawTag { base: t.base, intensity: t.intensity }
    }
}

impl EmotionTag {
    pub const NEUTRAL: EmotionTag = EmotionTag { base: BaseEmotion::Neutral, intensity: 1 };

    pub fn new(base: BaseEmotion, intensity: u8) -> Option<Self> {
        let ok = match base {
            BaseEmotion::Neutral => intensity == 1,
            _ => (1..=MAX_INTENSITY).contains(&intensity),
        };
        ok.then_some(Self { base, intensity })
    }

    pub fn base(&self) -> BaseEmotion {
        self.base
    }

    pub fn intensity(&self) -> u8 {
        self.intensity
    }

    pub fn is_neutral(&self) -> bool {
        self.base == BaseEmotion::Neutral
    }

    /// One step up, capped at [`MAX_INTENSITY`]. Neutral is unchanged.
    pub fn escalated(self) -> Self {
        if self.is_neutral() {
            return self;
        }
        Self { intensity: (self.intensity + 1).min(MAX_INTENSITY), ..self }
    }

    /// One step down, floored at 1.
    pub fn soothed(self) -> Self {
        Self { intensity: self.intensity.saturating_sub(1).max(1), ..self }
    }

    /// Same intensity, different expression. Switching to neutral resets the
    /// intensity to 1.
    pub fn with_base(self, base: BaseEmotion) -> Self {
        if base == BaseEmotion::Neutral {
            Self::NEUTRAL
        } else {
            Self { base, intensity: self.intensity }
        }
    }
}

impl fmt::Display for EmotionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.base.as_str(), self.intensity)
    }
}
