use crate::error::{Error, Result};

/// Whether z-scoring uses each episode's own moments or pooled ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StandardizeScope {
    #[default]
    PerEpisode,
    Global,
}

/// Z-score with population (1/n) variance.
pub fn standardize(series: &[f64]) -> Result<Vec<f64>> {
    let (mean, sd) = moments(series)?;
    Ok(series.iter().map(|v| (v - mean) / sd).collect())
}

/// Population mean and standard deviation, rejecting degenerate series.
pub fn moments(series: &[f64]) -> Result<(f64, f64)> {
    if series.len() < 2 {
        return Err(Error::DegenerateSeries("need at least two values to standardize"));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::DegenerateSeries("constant series has no variance"));
    }
    Ok((mean, var.sqrt()))
}
