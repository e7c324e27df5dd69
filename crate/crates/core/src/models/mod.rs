//! The unimodal and fusion architectures, their ensemble and checkpoints.

mod checkpoint;
mod ensemble;
mod model;
mod spec;
#[cfg(test)]
mod tests;

pub use checkpoint::{
    checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use ensemble::{ensemble_mean, ensemble_predict};
pub use model::{ForwardCache, ModalInputs, ModelState, PredictionSeries};
pub use spec::{ModelKind, ModelSpec};
