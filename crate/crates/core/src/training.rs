//! Splits, clip partitioning, the MSE objective, the training loop with
//! composite-score early stopping, and whole-episode evaluation.

use std::fmt::{self, Write as _};
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::models::{ModelKind, ModelSpec, ModelState};
use crate::numcore::{derive_seed, Adam, AdamConfig, Matrix, ParamSet, SplitRng};

/// How per-episode predictions are combined into one report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pooling {
    /// Concatenate every (prediction, truth) pair, then compute metrics.
    #[default]
    Pooled,
    /// Compute metrics per episode and average each field.
    PerEpisodeMean,
}

impl Pooling {
    pub fn as_str(self) -> &'static str {
        match self {
            Pooling::Pooled => "pooled",
            Pooling::PerEpisodeMean => "per-episode-mean",
        }
    }
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(Pooling::Pooled),
            "per-episode-mean" => Ok(Pooling::PerEpisodeMean),
            _ => Err(Error::InvalidArgument(format!(
                "unknown pooling `{s}` (expected pooled or per-episode-mean)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub clip_len: usize,
    pub max_epochs: usize,
    /// Epochs without a composite improvement before stopping.
    pub patience: usize,
    /// Global gradient-norm cap; `None` disables clipping.
    pub grad_clip_norm: Option<f64>,
    pub seed: u64,
    pub pooling: Pooling,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 5e-4,
            batch_size: 16,
            clip_len: 300,
            max_epochs: 100,
            patience: 5,
            grad_clip_norm: Some(5.0),
            seed: 0,
            pooling: Pooling::Pooled,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArgument(format!("lr must be positive, got {}", self.lr)));
        }
        if self.batch_size == 0 || self.clip_len == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidArgument(
                "batch size, clip length and max epochs must be at least 1".into(),
            ));
        }
        if let Some(c) = self.grad_clip_norm {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument(format!("grad clip norm must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// Episode ids of one category, partitioned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategorySplit {
    pub category: String,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitManifest {
    pub categories: Vec<CategorySplit>,
}

impl SplitManifest {
    fn collect(&self, f: impl Fn(&CategorySplit) -> &Vec<String>) -> Vec<String> {
        self.categories.iter().flat_map(|c| f(c).iter().cloned()).collect()
    }

    pub fn train(&self) -> Vec<String> {
        self.collect(|c| &c.train)
    }

    pub fn val(&self) -> Vec<String> {
        self.collect(|c| &c.val)
    }

    pub fn test(&self) -> Vec<String> {
        self.collect(|c| &c.test)
    }

    /// Ids of a named split: `train`, `val` (or `validation`) or `test`.
    pub fn named(&self, split: &str) -> Result<Vec<String>> {
        match split {
            "train" => Ok(self.train()),
            "val" | "validation" => Ok(self.val()),
            "test" => Ok(self.test()),
            "all" => Ok([self.train(), self.val(), self.test()].concat()),
            _ => Err(Error::InvalidArgument(format!(
                "unknown split `{split}` (expected train, val, test or all)"
            ))),
        }
    }
}

/// `(n_train, n_val, n_test)` for a category of `n` episodes: test and
/// validation take the floor of 20% and 10%, train keeps the remainder.
pub fn split_counts(n: usize) -> (usize, usize, usize) {
    let test = n * 2 / 10;
    let val = n / 10;
    (n - test - val, val, test)
}

/// Per-category shuffle then 70/10/20 train/val/test partition. Categories
/// appear in order of first occurrence.
pub fn make_splits(episodes: &[(String, String)], seed: u64) -> Result<SplitManifest> {
    if episodes.is_empty() {
        return Err(Error::Empty("make_splits needs at least one episode"));
    }
    let mut order: Vec<String> = Vec::new();
    for (_, cat) in episodes {
        if !order.contains(cat) {
            order.push(cat.clone());
        }
    }
    let categories = order
        .into_iter()
        .enumerate()
        .map(|(k, category)| {
            let mut ids: Vec<String> = episodes
                .iter()
                .filter(|(_, c)| *c == category)
                .map(|(id, _)| id.clone())
                .collect();
            SplitRng::with_stream(seed, k as u64).shuffle(&mut ids);
            let (n_train, n_val, _) = split_counts(ids.len());
            let test = ids.split_off(n_train + n_val);
            let val = ids.split_off(n_train);
            CategorySplit {
                category,
                train: ids,
                val,
                test,
            }
        })
        .collect();
    Ok(SplitManifest { categories })
}

/// Spec for `kind` sized to the dataset's feature widths. Fails with a
/// missing-modality error naming the first episode that lacks one.
pub fn spec_for_dataset(kind: ModelKind, data: &Dataset) -> Result<ModelSpec> {
    for e in data.episodes() {
        let missing = if kind.uses_visual() && e.visual.is_none() {
            Some("visual")
        } else if kind.uses_audio() && e.audio.is_none() {
            Some("audio")
        } else {
            None
        };
        if let Some(m) = missing {
            return Err(Error::MissingModality(format!(
                "{kind} needs {m} features but episode `{}` has none",
                e.id
            )));
        }
    }
    let (dv, da) = data.dims();
    Ok(ModelSpec::new(kind, dv, da))
}

/// Consecutive windows of `clip_len`; a shorter remainder is its own clip.
pub fn partition_clips(len: usize, clip_len: usize) -> Result<Vec<Range<usize>>> {
    if len == 0 {
        return Err(Error::Empty("cannot partition a zero-length episode"));
    }
    if clip_len == 0 {
        return Err(Error::InvalidArgument("clip length must be at least 1".into()));
    }
    Ok((0..len)
        .step_by(clip_len)
        .map(|s| s..(s + clip_len).min(len))
        .collect())
}

/// Sum of squared errors and its gradient `2(pred - truth)`.
pub fn mse_loss(pred: &[f64], truth: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != truth.len() {
        return Err(Error::dim("mse_loss", pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(Error::Empty("mse_loss on an empty series"));
    }
    let grad: Vec<f64> = pred.iter().zip(truth).map(|(p, y)| 2.0 * (p - y)).collect();
    let loss = pred.iter().zip(truth).map(|(p, y)| (p - y) * (p - y)).sum();
    Ok((loss, grad))
}

/// Whole-episode evaluation.
pub fn evaluate(model: &ModelState, ids: &[String], data: &Dataset, pooling: Pooling) -> Result<MetricReport> {
    if ids.is_empty() {
        return Err(Error::Empty("evaluate needs at least one episode"));
    }
    let mut sorted = ids.to_vec();
    sorted.sort();
    let series = sorted
        .iter()
        .map(|id| {
            let ep = data.require(id)?;
            let truth = data.require_target(id)?;
            let pred = model.predict(id, ep.inputs())?;
            Ok((pred.values, truth.to_vec()))
        })
        .collect::<Result<Vec<_>>>()?;
    report_from_series(&series, pooling)
}

/// Metrics for `(prediction, truth)` pairs under `pooling`.
pub fn report_from_series(series: &[(Vec<f64>, Vec<f64>)], pooling: Pooling) -> Result<MetricReport> {
    match pooling {
        Pooling::Pooled => {
            let pred: Vec<f64> = series.iter().flat_map(|(p, _)| p.iter().copied()).collect();
            let truth: Vec<f64> = series.iter().flat_map(|(_, y)| y.iter().copied()).collect();
            MetricReport::compute(&pred, &truth)
        }
        Pooling::PerEpisodeMean => {
            let reports = series
                .iter()
                .map(|(p, y)| MetricReport::compute(p, y))
                .collect::<Result<Vec<_>>>()?;
            let k = reports.len() as f64;
            let mean = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
            let mut r = MetricReport::new(
                reports.iter().map(|r| r.n).sum(),
                mean(|r| r.mae),
                mean(|r| r.rmse),
                mean(|r| r.rmsle),
                mean(|r| r.srcc),
            );
            r.srcc_defined = reports.iter().all(|r| r.srcc_defined);
            r.rmsle_clamped = reports.iter().map(|r| r.rmsle_clamped).sum();
            Ok(r)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean squared error per training second.
    pub loss: f64,
    pub validation: MetricReport,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
    /// Epoch (1-based) whose parameters were returned.
    pub best_epoch: usize,
}

impl TrainLog {
    pub const CSV_HEADER: &'static str = "epoch,loss,mae,rmse,rmsle,srcc,composite,best";

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.epochs {
            let v = &e.validation;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                e.epoch,
                e.loss,
                v.mae,
                v.rmse,
                v.rmsle,
                v.srcc,
                v.composite,
                u8::from(e.epoch == self.best_epoch)
            );
        }
        out
    }
}

struct Clip<'a> {
    id: &'a str,
    visual: Option<Matrix>,
    audio: Option<Matrix>,
    truth: &'a [f64],
    start: usize,
}

fn build_clips<'a>(data: &'a Dataset, ids: &[String], clip_len: usize) -> Result<Vec<Clip<'a>>> {
    let mut clips = Vec::new();
    for id in ids {
        let ep = data.require(id)?;
        let truth = data.require_target(id)?;
        let slice = |m: Option<&crate::data::FeatureSequence>, r: &Range<usize>| {
            m.map(|s| s.matrix().slice_rows(r.start, r.end)).transpose()
        };
        for r in partition_clips(truth.len(), clip_len)? {
            clips.push(Clip {
                id: &ep.id,
                visual: slice(ep.visual.as_ref(), &r)?,
                audio: slice(ep.audio.as_ref(), &r)?,
                truth: &truth[r.clone()],
                start: r.start,
            });
        }
    }
    Ok(clips)
}

/// Loss and parameter gradients of one clip, computed on a private copy.
fn clip_gradient(model: &ModelState, clip: &Clip<'_>) -> Result<(f64, Vec<Matrix>)> {
    let mut local = model.clone();
    local.zero_grads();
    let inputs = crate::models::ModalInputs::new(clip.visual.as_ref(), clip.audio.as_ref());
    let (pred, cache) = local.forward(inputs)?;
    let (loss, dpred) = mse_loss(&pred, clip.truth)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!(
            "training loss on episode `{}` clip starting at second {}",
            clip.id, clip.start
        )));
    }
    local.backward(&cache, &dpred)?;
    Ok((loss, local.params().into_iter().map(|p| p.grad.clone()).collect()))
}

/// Mean of the batch's clip gradients, written into `model`'s accumulators.
/// Returns the batch's summed loss.
fn batch_gradient(model: &mut ModelState, batch: &[&Clip<'_>]) -> Result<f64> {
    let results: Vec<Result<(f64, Vec<Matrix>)>> =
        batch.par_iter().map(|c| clip_gradient(model, c)).collect();
    model.zero_grads();
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for r in results {
        let (loss, grads) = r?;
        total += loss;
        for (p, g) in model.params_mut().into_iter().zip(&grads) {
            p.grad.add_scaled(g, scale)?;
        }
    }
    Ok(total)
}

fn clip_global_norm(model: &mut ModelState, max_norm: f64) {
    let norm = model.grad_norm();
    if norm > max_norm {
        let s = max_norm / norm;
        for p in model.params_mut() {
            p.grad.scale(s);
        }
    }
}

/// Trains on the split's train ids and early-stops on its validation ids.
pub fn train(
    model: ModelState,
    data: &Dataset,
    splits: &SplitManifest,
    cfg: &TrainConfig,
) -> Result<(ModelState, TrainLog)> {
    train_on(model, data, &splits.train(), &splits.val(), cfg)
}

/// Training loop over explicit id lists. Returns the parameters of the
/// epoch with the highest validation composite score.
pub fn train_on(
    mut model: ModelState,
    data: &Dataset,
    train_ids: &[String],
    val_ids: &[String],
    cfg: &TrainConfig,
) -> Result<(ModelState, TrainLog)> {
    cfg.validate()?;
    if train_ids.is_empty() {
        return Err(Error::Empty("training split is empty"));
    }
    if val_ids.is_empty() {
        return Err(Error::Empty("validation split is empty"));
    }
    for id in val_ids {
        data.require_target(id)?;
    }
    let clips = build_clips(data, train_ids, cfg.clip_len)?;
    let seconds: usize = clips.iter().map(|c| c.truth.len()).sum();
    let mut adam = Adam::new(&model, AdamConfig { lr: cfg.lr, ..Default::default() });
    let mut log = TrainLog::default();
    let mut best: Option<(f64, ModelState)> = None;

    for epoch in 1..=cfg.max_epochs {
        let mut order: Vec<&Clip<'_>> = clips.iter().collect();
        SplitRng::with_stream(derive_seed(cfg.seed, 0x7a11), epoch as u64).shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            epoch_loss += batch_gradient(&mut model, batch)?;
            if let Some(max) = cfg.grad_clip_norm {
                clip_global_norm(&mut model, max);
            }
            adam.step(&mut model);
        }
        let validation = evaluate(&model, val_ids, data, cfg.pooling)?;
        let score = validation.composite;
        log.epochs.push(EpochRecord {
            epoch,
            loss: epoch_loss / seconds as f64,
            validation,
        });
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, model.clone()));
            log.best_epoch = epoch;
        }
        if epoch - log.best_epoch >= cfg.patience {
            break;
        }
    }
    let (_, mut best_model) = best.expect("at least one epoch ran");
    best_model.zero_grads();
    Ok((best_model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, StandardizeScope, SynthConfig};
    use crate::models::{ModalInputs, ModelKind, ModelSpec};
    use proptest::prelude::*;

    fn tiny_data(seed: u64) -> Dataset {
        let cfg = SynthConfig {
            n_categories: 1,
            episodes_per_category: 10,
            episode_len_seconds: 40,
            visual_dim: 4,
            audio_dim: 3,
            seed,
            ..Default::default()
        };
        generate_synthetic(&cfg).unwrap().to_dataset(StandardizeScope::PerEpisode).unwrap()
    }

    fn tiny_model(kind: ModelKind, seed: u64) -> ModelState {
        ModelState::build(ModelSpec::new(kind, 4, 3).with_widths(6, 5), seed).unwrap()
    }

    fn ids(n: usize) -> Vec<(String, String)> {
        (0..n).map(|i| (format!("e{i}"), "c".to_string())).collect()
    }

    #[test]
    fn split_counts_follow_ratios() {
        assert_eq!(split_counts(10), (7, 1, 2));
        assert_eq!(split_counts(1), (1, 0, 0));
        let s = make_splits(&ids(10), 3).unwrap();
        assert_eq!((s.train().len(), s.val().len(), s.test().len()), (7, 1, 2));
        assert_eq!(make_splits(&ids(10), 3).unwrap(), s);
        assert_ne!(make_splits(&ids(10), 4).unwrap(), s);
        let one = make_splits(&ids(1), 0).unwrap();
        assert_eq!(one.train(), vec!["e0".to_string()]);
        assert!(make_splits(&[], 0).is_err());
    }

    proptest! {
        #[test]
        fn splits_partition_episodes(n in 1usize..40, cats in 1usize..4, seed in any::<u64>()) {
            let eps: Vec<(String, String)> =
                (0..n).map(|i| (format!("e{i}"), format!("c{}", i % cats))).collect();
            let s = make_splits(&eps, seed).unwrap();
            let mut all = s.named("all").unwrap();
            prop_assert_eq!(all.len(), n);
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), n);
            for c in &s.categories {
                let k = c.train.len() + c.val.len() + c.test.len();
                prop_assert_eq!(split_counts(k), (c.train.len(), c.val.len(), c.test.len()));
            }
        }

        #[test]
        fn clips_reassemble_episode(len in 1usize..2000, clip in 1usize..400) {
            let clips = partition_clips(len, clip).unwrap();
            let mut next = 0;
            for (i, r) in clips.iter().enumerate() {
                prop_assert_eq!(r.start, next);
                prop_assert!(r.len() == clip || (i + 1 == clips.len() && r.len() < clip));
                next = r.end;
            }
            prop_assert_eq!(next, len);
        }
    }

    #[test]
    fn clip_examples() {
        assert_eq!(partition_clips(2700, 300).unwrap().len(), 9);
        assert_eq!(partition_clips(299, 300).unwrap(), vec![0..299]);
        assert!(partition_clips(0, 300).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), (5.0, vec![2.0, 4.0]));
        assert_eq!(mse_loss(&[3.0], &[3.0]).unwrap(), (0.0, vec![0.0]));
        assert!(mse_loss(&[], &[]).is_err());
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
        let mut rng = SplitRng::new(5);
        let p = rng.normal_vec(50);
        let y = rng.normal_vec(50);
        let mut oracle = 0.0;
        for i in 0..50 {
            oracle += (p[i] - y[i]) * (p[i] - y[i]);
        }
        assert!((mse_loss(&p, &y).unwrap().0 - oracle).abs() < 1e-12);
    }

    #[test]
    fn evaluate_perfect_constant_and_order() {
        let data = tiny_data(1);
        let model = tiny_model(ModelKind::LowFusion, 0);
        let ids: Vec<String> = data.episodes().iter().map(|e| e.id.clone()).collect();
        let a = evaluate(&model, &ids, &data, Pooling::Pooled).unwrap();
        let mut rev = ids.clone();
        rev.reverse();
        assert_eq!(evaluate(&model, &rev, &data, Pooling::Pooled).unwrap(), a);

        let one = &ids[..1];
        let direct = MetricReport::compute(
            &model.predict(&one[0], data.episodes()[0].inputs()).unwrap().values,
            data.target(&one[0]).unwrap(),
        )
        .unwrap();
        assert_eq!(evaluate(&model, one, &data, Pooling::Pooled).unwrap(), direct);
        assert_eq!(evaluate(&model, one, &data, Pooling::PerEpisodeMean).unwrap().srcc, direct.srcc);

        let truth = data.target(&ids[0]).unwrap().to_vec();
        let perfect = report_from_series(&[(truth.clone(), truth.clone())], Pooling::Pooled).unwrap();
        assert_eq!((perfect.mae, perfect.rmse, perfect.rmsle), (0.0, 0.0, 0.0));
        assert!((perfect.srcc - 1.0).abs() < 1e-12);
        let flat = report_from_series(&[(vec![0.0; truth.len()], truth)], Pooling::Pooled).unwrap();
        assert!(!flat.srcc_defined);
        assert!(evaluate(&model, &["nope".to_string()], &data, Pooling::Pooled).is_err());
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig { clip_len: 20, batch_size: 4, max_epochs: 3, seed: 9, ..Default::default() }
    }

    #[test]
    fn patience_zero_runs_one_epoch() {
        let data = tiny_data(2);
        let splits = make_splits(&data.categories(), 0).unwrap();
        let cfg = TrainConfig { patience: 0, ..quick_cfg() };
        let (best, log) = train(tiny_model(ModelKind::MidFusion, 1), &data, &splits, &cfg).unwrap();
        assert_eq!(log.epochs.len(), 1);
        assert_eq!(log.best_epoch, 1);
        let v = evaluate(&best, &splits.val(), &data, Pooling::Pooled).unwrap();
        assert_eq!(v, log.epochs[0].validation);
    }

    #[test]
    fn training_is_deterministic_and_best_is_max() {
        let data = tiny_data(3);
        let splits = make_splits(&data.categories(), 0).unwrap();
        let run = || train(tiny_model(ModelKind::HighFusion, 2), &data, &splits, &quick_cfg()).unwrap();
        let (m1, l1) = run();
        let (m2, l2) = run();
        assert_eq!(m1, m2);
        assert_eq!(l1.to_csv(), l2.to_csv());
        let best = l1.best().unwrap().validation.composite;
        assert!(l1.epochs.iter().all(|e| e.validation.composite <= best));
        assert_eq!(l1.to_csv().lines().count(), l1.epochs.len() + 1);
    }

    #[test]
    fn vanishing_lr_leaves_params_unchanged() {
        let data = tiny_data(4);
        let model = tiny_model(ModelKind::UnimodalVisual, 3);
        let clips = build_clips(&data, &[data.episodes()[0].id.clone()], 20).unwrap();
        let mut m = model.clone();
        let mut adam = Adam::new(&m, AdamConfig { lr: 1e-300, ..Default::default() });
        batch_gradient(&mut m, &[&clips[0]]).unwrap();
        adam.step(&mut m);
        for (a, b) in m.params().iter().zip(model.params()) {
            for (x, y) in a.value.as_slice().iter().zip(b.value.as_slice()) {
                assert!((x - y).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn tiny_step_descends() {
        let data = tiny_data(5);
        let mut failures = 0;
        for seed in 0..20 {
            let mut m = tiny_model(ModelKind::ALL[seed as usize % 5], seed);
            let ep = &data.episodes()[seed as usize % 10];
            let clips = build_clips(&data, std::slice::from_ref(&ep.id), 20).unwrap();
            let clip = &clips[0];
            let loss = |m: &ModelState| {
                let (p, _) = m.forward(ModalInputs::new(clip.visual.as_ref(), clip.audio.as_ref())).unwrap();
                mse_loss(&p, clip.truth).unwrap().0
            };
            let before = loss(&m);
            let mut adam = Adam::new(&m, AdamConfig { lr: 1e-6, ..Default::default() });
            batch_gradient(&mut m, &[clip]).unwrap();
            adam.step(&mut m);
            if loss(&m) > before {
                failures += 1;
            }
        }
        assert!(failures <= 1, "{failures} ascents");
    }

    #[test]
    fn batch_gradient_is_clip_mean() {
        let data = tiny_data(6);
        let ids: Vec<String> = data.episodes()[..2].iter().map(|e| e.id.clone()).collect();
        let clips = build_clips(&data, &ids, 40).unwrap();
        let model = tiny_model(ModelKind::LowFusion, 4);
        let (_, g0) = clip_gradient(&model, &clips[0]).unwrap();
        let (_, g1) = clip_gradient(&model, &clips[1]).unwrap();
        let mut m = model.clone();
        batch_gradient(&mut m, &[&clips[0], &clips[1]]).unwrap();
        for ((p, a), b) in m.params().iter().zip(&g0).zip(&g1) {
            for ((x, y), z) in p.grad.as_slice().iter().zip(a.as_slice()).zip(b.as_slice()) {
                assert!((x - (y + z) / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn config_and_split_errors() {
        assert!(TrainConfig { lr: 0.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { grad_clip_norm: Some(-1.0), ..Default::default() }.validate().is_err());
        let data = tiny_data(7);
        let m = tiny_model(ModelKind::LowFusion, 0);
        assert!(train_on(m.clone(), &data, &[], &["ep000".into()], &quick_cfg()).is_err());
        assert!(train_on(m, &data, &["ep000".into()], &["missing".into()], &quick_cfg()).is_err());
        assert_eq!("per-episode-mean".parse::<Pooling>().unwrap(), Pooling::PerEpisodeMean);
        assert!("mean".parse::<Pooling>().is_err());
    }
}
