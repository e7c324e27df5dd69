use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which architecture a model instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    UnimodalVisual,
    UnimodalAudio,
    /// Gated features concatenated, then one shared embedding.
    LowFusion,
    /// Per-modality embeddings plus a joint embedding, concatenated.
    MidFusion,
    /// Per-modality recurrent encoders fused before prediction.
    HighFusion,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::UnimodalVisual,
        ModelKind::UnimodalAudio,
        ModelKind::LowFusion,
        ModelKind::MidFusion,
        ModelKind::HighFusion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::UnimodalVisual => "unimodal-visual",
            ModelKind::UnimodalAudio => "unimodal-audio",
            ModelKind::LowFusion => "low-fusion",
            ModelKind::MidFusion => "mid-fusion",
            ModelKind::HighFusion => "high-fusion",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            ModelKind::UnimodalVisual => 0,
            ModelKind::UnimodalAudio => 1,
            ModelKind::LowFusion => 2,
            ModelKind::MidFusion => 3,
            ModelKind::HighFusion => 4,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        ModelKind::ALL.get(code as usize).copied()
    }

    pub fn uses_visual(self) -> bool {
        self != ModelKind::UnimodalAudio
    }

    pub fn uses_audio(self) -> bool {
        self != ModelKind::UnimodalVisual
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "unimodal-visual" | "visual" => ModelKind::UnimodalVisual,
            "unimodal-audio" | "audio" => ModelKind::UnimodalAudio,
            "low-fusion" | "low" => ModelKind::LowFusion,
            "mid-fusion" | "mid" | "middle" => ModelKind::MidFusion,
            "high-fusion" | "high" => ModelKind::HighFusion,
            other => return Err(Error::InvalidArgument(format!("unknown model kind `{other}`"))),
        })
    }
}

/// Architecture descriptor; together with a seed it fully determines the
/// initial parameter set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub visual_dim: usize,
    pub audio_dim: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    /// Adds a bias to the output head.
    pub head_bias: bool,
}

impl ModelSpec {
    pub const DEFAULT_WIDTH: usize = 512;

    /// Spec with default widths; the modality the kind does not use is zeroed.
    pub fn new(kind: ModelKind, visual_dim: usize, audio_dim: usize) -> Self {
        ModelSpec {
            kind,
            visual_dim: if kind.uses_visual() { visual_dim } else { 0 },
            audio_dim: if kind.uses_audio() { audio_dim } else { 0 },
            embed_dim: Self::DEFAULT_WIDTH,
            hidden: Self::DEFAULT_WIDTH,
            head_bias: false,
        }
    }

    pub fn with_widths(mut self, embed_dim: usize, hidden: usize) -> Self {
        self.embed_dim = embed_dim;
        self.hidden = hidden;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.embed_dim == 0 || self.hidden == 0 {
            return bad(format!(
                "embed_dim ({}) and hidden ({}) must be positive",
                self.embed_dim, self.hidden
            ));
        }
        match self.kind {
            ModelKind::UnimodalVisual | ModelKind::UnimodalAudio => {
                if (self.visual_dim > 0) == (self.audio_dim > 0) {
                    return bad(format!(
                        "{} needs exactly one modality, got visual_dim={} audio_dim={}",
                        self.kind, self.visual_dim, self.audio_dim
                    ));
                }
                if (self.kind == ModelKind::UnimodalVisual) != (self.visual_dim > 0) {
                    return bad(format!("{} has the wrong modality populated", self.kind));
                }
            }
            _ => {
                if self.visual_dim == 0 || self.audio_dim == 0 {
                    return bad(format!(
                        "{} needs both modalities, got visual_dim={} audio_dim={}",
                        self.kind, self.visual_dim, self.audio_dim
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip_through_strings_and_codes() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
            assert_eq!(ModelKind::from_code(k.code()), Some(k));
        }
        assert_eq!("mid".parse::<ModelKind>().unwrap(), ModelKind::MidFusion);
        assert!("late".parse::<ModelKind>().is_err());
    }

    #[test]
    fn validation() {
        assert!(ModelSpec::new(ModelKind::UnimodalVisual, 8, 4).validate().is_ok());
        assert!(ModelSpec::new(ModelKind::UnimodalAudio, 0, 4).validate().is_ok());
        assert!(ModelSpec::new(ModelKind::UnimodalAudio, 8, 0).validate().is_err());
        assert!(ModelSpec::new(ModelKind::LowFusion, 8, 0).validate().is_err());
        assert!(ModelSpec::new(ModelKind::HighFusion, 8, 4).with_widths(0, 3).validate().is_err());
        let mut s = ModelSpec::new(ModelKind::UnimodalVisual, 8, 0);
        s.audio_dim = 2;
        assert!(s.validate().is_err());
    }
}
