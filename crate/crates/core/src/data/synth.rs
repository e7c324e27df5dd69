//! Deterministic synthetic episodes with a known latent structure.
//!
//! Each episode carries two smooth AR(1) latents: `u` is observable only
//! through the visual features and `v` only through the audio features.
//! Attractiveness mixes both, so a bimodal model can explain strictly more
//! than either unimodal one. Engagement indicators are monotone transforms
//! of attractiveness with fixed signed coupling strengths.

use std::fs;
use std::path::{Path, PathBuf};

use super::engagement::{EngagementRecord, Indicator};
use super::features::{write_fvseq, FeatureSequence, Modality};
use super::manifest::{Dataset, Episode, Manifest, ManifestEntry};
use super::normalize::StandardizeScope;
use crate::error::{Error, Result};
use crate::numcore::{Matrix, SplitRng};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_categories: usize,
    pub episodes_per_category: usize,
    pub episode_len_seconds: usize,
    pub visual_dim: usize,
    pub audio_dim: usize,
    /// AR(1) coefficient of every latent signal.
    pub ar_coef: f64,
    /// Weight of the visual latent in attractiveness; audio gets the rest.
    pub visual_share: f64,
    /// Std-dev of white noise added to attractiveness.
    pub target_noise: f64,
    /// Std-dev of white noise added to every feature.
    pub feature_noise: f64,
    /// Std-dev of the nuisance latents mixed into the features alongside
    /// the informative one.
    pub nuisance_scale: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_categories: 2,
            episodes_per_category: 10,
            episode_len_seconds: 600,
            visual_dim: 32,
            audio_dim: 26,
            ar_coef: 0.95,
            visual_share: 0.5,
            target_noise: 0.1,
            feature_noise: 0.05,
            nuisance_scale: 0.5,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_categories", self.n_categories),
            ("episodes_per_category", self.episodes_per_category),
            ("episode_len_seconds", self.episode_len_seconds),
            ("visual_dim", self.visual_dim),
            ("audio_dim", self.audio_dim),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if self.episode_len_seconds < 2 {
            return Err(Error::InvalidArgument("episodes need at least 2 seconds".into()));
        }
        if !(0.0..1.0).contains(&self.ar_coef.abs()) {
            return Err(Error::InvalidArgument(format!("ar_coef {} must be in (-1, 1)", self.ar_coef)));
        }
        if !(0.0..=1.0).contains(&self.visual_share) {
            return Err(Error::InvalidArgument("visual_share must be in [0, 1]".into()));
        }
        if self.target_noise < 0.0 || self.feature_noise < 0.0 || self.nuisance_scale < 0.0 {
            return Err(Error::InvalidArgument("noise levels must be non-negative".into()));
        }
        Ok(())
    }

    pub fn total_episodes(&self) -> usize {
        self.n_categories * self.episodes_per_category
    }
}

/// Signed latent coupling of each indicator with attractiveness, in
/// [`Indicator::ALL`] order, and its typical per-second level.
const COUPLING: [(f64, f64); 9] = [
    (-0.149, 4.0),  // exit
    (-0.117, 6.0),  // start ff
    (-0.537, 6.0),  // end ff
    (0.327, 3.0),   // start fr
    (0.227, 3.0),   // end fr
    (-0.139, 20.0), // bullet screens
    (0.027, 40.0),  // bullet screen likes
    (-0.351, 8.0),  // ff skips
    (0.022, 2.0),   // fr skips
];
const INDICATOR_SPREAD: f64 = 0.25;
const VIEW_BASE_RATE: f64 = 1000.0;
const VIEW_RATE_SCALE: f64 = 150.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticEpisode {
    pub visual: FeatureSequence,
    pub audio: FeatureSequence,
    pub record: EngagementRecord,
    /// Latent visible through the visual features.
    pub latent_visual: Vec<f64>,
    /// Latent visible through the audio features.
    pub latent_audio: Vec<f64>,
    /// Attractiveness before it is turned into view counts.
    pub attractiveness: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    pub config: SynthConfig,
    pub episodes: Vec<SyntheticEpisode>,
}

fn ar1(rng: &mut SplitRng, len: usize, coef: f64) -> Vec<f64> {
    let innovation = (1.0 - coef * coef).sqrt();
    let mut out = Vec::with_capacity(len);
    let mut x = rng.normal();
    for _ in 0..len {
        out.push(x);
        x = coef * x + innovation * rng.normal();
    }
    out
}

/// Random orthogonal matrix (Gram-Schmidt on Gaussian columns).
fn orthogonal(rng: &mut SplitRng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = rng.normal_vec(n);
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    let mut m = Matrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for (i, &v) in c.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

/// Features whose first latent coordinate is `signal`; the rest are smooth
/// nuisance signals. All mixed through the fixed orthogonal `mixing`.
fn features(
    rng: &mut SplitRng,
    signal: &[f64],
    mixing: &Matrix,
    cfg: &SynthConfig,
) -> Matrix {
    let d = mixing.rows();
    let nuisance: Vec<Vec<f64>> = (1..d).map(|_| ar1(rng, signal.len(), cfg.ar_coef)).collect();
    let mut out = Matrix::zeros(signal.len(), d);
    let mut z = vec![0.0; d];
    for t in 0..signal.len() {
        z[0] = signal[t];
        for (k, n) in nuisance.iter().enumerate() {
            z[k + 1] = cfg.nuisance_scale * n[t];
        }
        let row = mixing.matvec(&z).expect("square mixing");
        for (o, v) in out.row_mut(t).iter_mut().zip(row) {
            *o = v + cfg.feature_noise * rng.normal();
        }
    }
    out
}

pub fn episode_id(index: usize) -> String {
    format!("ep{index:03}")
}

pub fn category_name(index: usize) -> String {
    format!("season{index}")
}

/// Generates the whole dataset; a pure function of `cfg`.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let mut shared = SplitRng::with_stream(cfg.seed, 0);
    let visual_mixing = orthogonal(&mut shared, cfg.visual_dim);
    let audio_mixing = orthogonal(&mut shared, cfg.audio_dim);
    let (sv, sa) = (cfg.visual_share, 1.0 - cfg.visual_share);
    let target_sd = (sv * sv + sa * sa + cfg.target_noise * cfg.target_noise).sqrt();
    let len = cfg.episode_len_seconds;

    let mut episodes = Vec::with_capacity(cfg.total_episodes());
    for index in 0..cfg.total_episodes() {
        let mut rng = SplitRng::with_stream(cfg.seed, 1 + index as u64);
        let u = ar1(&mut rng, len, cfg.ar_coef);
        let v = ar1(&mut rng, len, cfg.ar_coef);
        let y: Vec<f64> = (0..len)
            .map(|t| sv * u[t] + sa * v[t] + cfg.target_noise * rng.normal())
            .collect();
        let visual = features(&mut rng, &u, &visual_mixing, cfg);
        let audio = features(&mut rng, &v, &audio_mixing, cfg);

        let age = 3.0 + 87.0 * rng.unit();
        let views = y
            .iter()
            .map(|a| (age * (VIEW_BASE_RATE + VIEW_RATE_SCALE * a)).round().max(0.0))
            .collect();
        let indicators: [Vec<f64>; 9] = std::array::from_fn(|k| {
            let (rho, level) = COUPLING[k];
            let resid = (1.0 - rho * rho).sqrt();
            y.iter()
                .map(|a| {
                    let z = rho * a / target_sd + resid * rng.normal();
                    level * (INDICATOR_SPREAD * z).exp()
                })
                .collect()
        });
        let id = episode_id(index);
        let category = category_name(index % cfg.n_categories);
        let record = EngagementRecord {
            episode_id: id.clone(),
            category,
            upload_age_days: age,
            views,
            indicators,
        };
        record.validate()?;
        episodes.push(SyntheticEpisode {
            visual: FeatureSequence::new(id.clone(), Modality::Visual, visual)?,
            audio: FeatureSequence::new(id, Modality::Audio, audio)?,
            record,
            latent_visual: u,
            latent_audio: v,
            attractiveness: y,
        });
    }
    Ok(SyntheticDataset {
        config: cfg.clone(),
        episodes,
    })
}

impl SyntheticDataset {
    pub fn manifest(&self) -> Manifest {
        Manifest {
            entries: self
                .episodes
                .iter()
                .map(|e| {
                    let id = &e.record.episode_id;
                    ManifestEntry {
                        id: id.clone(),
                        category: e.record.category.clone(),
                        upload_age_days: e.record.upload_age_days,
                        visual: Some(PathBuf::from(format!("{id}.visual.fvseq"))),
                        audio: Some(PathBuf::from(format!("{id}.audio.fvseq"))),
                        labels: Some(PathBuf::from(format!("{id}.labels.csv"))),
                    }
                })
                .collect(),
        }
    }

    /// Writes features, label CSVs and `manifest.txt` into `dir`; returns
    /// the manifest path.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = self.manifest();
        for (e, entry) in self.episodes.iter().zip(&manifest.entries) {
            write_fvseq(&e.visual, dir.join(entry.visual.as_ref().expect("set")))?;
            write_fvseq(&e.audio, dir.join(entry.audio.as_ref().expect("set")))?;
            e.record.write_csv(dir.join(entry.labels.as_ref().expect("set")))?;
        }
        let path = dir.join("manifest.txt");
        manifest.write(&path)?;
        Ok(path)
    }

    /// The in-memory equivalent of writing and re-loading the dataset.
    pub fn to_dataset(&self, scope: StandardizeScope) -> Result<Dataset> {
        let episodes = self
            .episodes
            .iter()
            .map(|e| Episode {
                id: e.record.episode_id.clone(),
                category: e.record.category.clone(),
                upload_age_days: e.record.upload_age_days,
                visual: Some(e.visual.clone()),
                audio: Some(e.audio.clone()),
                labels: Some(e.record.clone()),
            })
            .collect();
        Dataset::new(episodes, scope)
    }
}

/// Names of the indicators whose coupling is strong enough to fix a sign.
pub fn strong_indicators() -> Vec<(Indicator, f64)> {
    Indicator::ALL
        .iter()
        .zip(COUPLING)
        .filter(|(_, (rho, _))| rho.abs() > 0.1)
        .map(|(&i, (rho, _))| (i, rho.signum()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{duration_normalize, standardize};
    use crate::metrics::pcc;

    fn small() -> SynthConfig {
        SynthConfig {
            n_categories: 2,
            episodes_per_category: 2,
            episode_len_seconds: 120,
            visual_dim: 6,
            audio_dim: 4,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_per_config() {
        let a = generate_synthetic(&small()).unwrap();
        let b = generate_synthetic(&small()).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&SynthConfig { seed: 7, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shapes_and_categories() {
        let d = generate_synthetic(&small()).unwrap();
        assert_eq!(d.episodes.len(), 4);
        for (i, e) in d.episodes.iter().enumerate() {
            assert_eq!(e.visual.matrix().shape(), (120, 6));
            assert_eq!(e.audio.matrix().shape(), (120, 4));
            assert_eq!(e.record.len(), 120);
            assert_eq!(e.record.category, category_name(i % 2));
        }
    }

    #[test]
    fn invalid_config() {
        assert!(generate_synthetic(&SynthConfig { episode_len_seconds: 0, ..small() }).is_err());
        assert!(generate_synthetic(&SynthConfig { visual_dim: 0, ..small() }).is_err());
        assert!(generate_synthetic(&SynthConfig { ar_coef: 1.0, ..small() }).is_err());
    }

    #[test]
    fn orthogonal_mixing_is_orthogonal() {
        let q = orthogonal(&mut SplitRng::new(3), 7);
        for i in 0..7 {
            for j in 0..7 {
                let d: f64 = (0..7).map(|k| q.get(k, i) * q.get(k, j)).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn views_recover_attractiveness() {
        let d = generate_synthetic(&small()).unwrap();
        for e in &d.episodes {
            let z = standardize(&duration_normalize(&e.record).unwrap()).unwrap();
            assert!(pcc(&z, &e.attractiveness).unwrap() > 0.999);
        }
    }

    #[test]
    fn latents_are_smooth_and_unit_scale() {
        let cfg = SynthConfig { episode_len_seconds: 20000, episodes_per_category: 1, n_categories: 1, ..small() };
        let d = generate_synthetic(&cfg).unwrap();
        let u = &d.episodes[0].latent_visual;
        let n = u.len() as f64;
        let mean = u.iter().sum::<f64>() / n;
        let var = u.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.25, "var {var}");
        let lag1 = pcc(&u[1..], &u[..u.len() - 1]).unwrap();
        assert!((lag1 - 0.95).abs() < 0.02, "lag1 {lag1}");
    }

    #[test]
    fn default_table_has_documented_sign_structure() {
        let d = generate_synthetic(&SynthConfig::default()).unwrap();
        let table = d.to_dataset(StandardizeScope::PerEpisode).unwrap().correlation_table().unwrap();
        assert_eq!(table.rows.len(), 9);
        for (ind, sign) in strong_indicators() {
            let r = table.row(ind.display_name()).unwrap().pcc.unwrap();
            assert_eq!(r.signum(), sign, "{ind:?} {r}");
        }
        for weak in [Indicator::BulletScreenLikes, Indicator::FastRewindSkips] {
            assert!(table.row(weak.display_name()).unwrap().pcc.unwrap().abs() < 0.1);
        }
    }

    /// Least squares of y on [1, u, v] via the 3x3 normal equations.
    #[test]
    fn attractiveness_is_explained_by_latents() {
        let d = generate_synthetic(&SynthConfig::default()).unwrap();
        let mut xtx = [[0.0; 3]; 3];
        let mut xty = [0.0; 3];
        let mut ys = Vec::new();
        for e in &d.episodes {
            for t in 0..e.attractiveness.len() {
                let x = [1.0, e.latent_visual[t], e.latent_audio[t]];
                for i in 0..3 {
                    xty[i] += x[i] * e.attractiveness[t];
                    for j in 0..3 {
                        xtx[i][j] += x[i] * x[j];
                    }
                }
                ys.push(e.attractiveness[t]);
            }
        }
        // Gaussian elimination
        let mut a = xtx;
        let mut b = xty;
        for col in 0..3 {
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for k in 0..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut beta = [0.0; 3];
        for i in (0..3).rev() {
            let tail: f64 = (i + 1..3).map(|k| a[i][k] * beta[k]).sum();
            beta[i] = (b[i] - tail) / a[i][i];
        }
        let mut k = 0;
        let mut ss_res = 0.0;
        for e in &d.episodes {
            for t in 0..e.attractiveness.len() {
                let fit = beta[0] + beta[1] * e.latent_visual[t] + beta[2] * e.latent_audio[t];
                ss_res += (ys[k] - fit).powi(2);
                k += 1;
            }
        }
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
        let r2 = 1.0 - ss_res / ss_tot;
        assert!(r2 > 0.9, "R^2 {r2}");
    }
}
