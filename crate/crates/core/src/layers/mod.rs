//! Trainable building blocks: context gating, the LSTM cell and the
//! embedding / linear projections the fusion models compose.

mod embedding;
mod gating;
mod lstm;

pub use embedding::{EmbedCache, Embedding, Linear};
pub use gating::{ContextGating, GateCache};
pub use lstm::{LstmCache, LstmCell, LstmStepGrads};
