use super::model::{ModalInputs, ModelState, PredictionSeries};
use crate::error::{Error, Result};

/// Per-step (optionally weighted) mean of member predictions.
///
/// Computed as an offset from the first member so that identical members
/// reproduce their prediction bit-for-bit.
pub fn ensemble_mean(members: &[PredictionSeries], weights: Option<&[f64]>) -> Result<PredictionSeries> {
    let first = members.first().ok_or(Error::Empty("ensemble members"))?;
    let weights: Vec<f64> = match weights {
        Some(w) if w.len() != members.len() => {
            return Err(Error::dim("ensemble weights", members.len(), w.len()))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; members.len()],
    };
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidArgument(format!("bad ensemble weights {weights:?}")));
    }
    let total: f64 = weights.iter().sum();
    for m in members {
        if m.len() != first.len() {
            return Err(Error::dim(
                "ensemble lengths",
                format!("{} steps", first.len()),
                format!("{} steps ({})", m.len(), m.episode_id),
            ));
        }
    }
    let values = (0..first.len())
        .map(|t| {
            let base = first.values[t];
            let offset: f64 = members
                .iter()
                .zip(&weights)
                .map(|(m, w)| w * (m.values[t] - base))
                .sum();
            base + offset / total
        })
        .collect();
    Ok(PredictionSeries {
        episode_id: first.episode_id.clone(),
        values,
    })
}

/// Runs every member on its own inputs and averages the predictions.
pub fn ensemble_predict(episode_id: &str, members: &[(&ModelState, ModalInputs<'_>)]) -> Result<PredictionSeries> {
    if members.is_empty() {
        return Err(Error::Empty("ensemble members"));
    }
    let preds = members
        .iter()
        .map(|(m, inputs)| m.predict(episode_id, *inputs))
        .collect::<Result<Vec<_>>>()?;
    ensemble_mean(&preds, None)
}
