//! Episode data: feature sequences, engagement labels, manifests and the
//! synthetic generator.

mod engagement;
mod features;
mod manifest;
mod normalize;
mod synth;

pub use engagement::{duration_normalize, EngagementRecord, Indicator, LABEL_HEADER};
pub use features::{read_fvseq, write_fvseq, FeatureSequence, Modality, FVSEQ_MAGIC};
pub use manifest::{Dataset, Episode, Manifest, ManifestEntry, MANIFEST_HEADER};
pub use normalize::{moments, standardize, StandardizeScope};
pub use synth::{
    category_name, episode_id, generate_synthetic, strong_indicators, SynthConfig,
    SyntheticDataset, SyntheticEpisode,
};
