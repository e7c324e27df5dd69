//! The `viewpulse` command line.
//!
//! Every option can also come from a `key=value` file given with
//! `--config`; flags override the file, the file overrides defaults.
//! Commands that write a directory echo the resolved values there as
//! `config.txt`, which is itself a valid `--config` file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::data::{generate_synthetic, write_fvseq, Dataset, StandardizeScope, SynthConfig};
use crate::metrics::MetricReport;
use crate::mfcc::{extract_audio_features, read_wav, MfccConfig};
use crate::models::{ensemble_predict, load_checkpoint, save_checkpoint, ModelKind, ModelState};
use crate::numcore::derive_seed;
use crate::training::{
    make_splits, report_from_series, spec_for_dataset, train, Pooling, TrainConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRAINLOG_FILE: &str = "trainlog.csv";
pub const CONFIG_FILE: &str = "config.txt";
pub const SPLITS_FILE: &str = "splits.txt";

#[derive(Parser, Debug)]
#[command(name = "viewpulse", version, about = "Per-second video attractiveness prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic dataset (manifest, features, label CSVs).
    GenSynth(GenSynthArgs),
    /// Extract T x 26 MFCC audio features from a WAV file.
    Mfcc(MfccArgs),
    /// Train one model on the train split, early-stopping on validation.
    Train(TrainArgs),
    /// Score checkpoints (and their ensemble) on a split.
    Evaluate(EvaluateArgs),
    /// Correlate the engagement indicators with attractiveness.
    Correlate(CorrelateArgs),
    /// Write per-second predictions for one episode.
    Predict(PredictArgs),
}

#[derive(Args, Debug)]
pub struct GenSynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total number of episodes, spread evenly over the categories.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub episodes: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub categories: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub seconds: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub visual_dim: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub audio_dim: Option<u64>,
}

#[derive(Args, Debug)]
pub struct MfccArgs {
    #[arg(long)]
    pub wav: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Episode id stored in the feature file; defaults to the WAV file stem.
    #[arg(long)]
    pub id: Option<String>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// unimodal-visual, unimodal-audio, low, mid or high.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub embed: Option<usize>,
    #[arg(long)]
    pub clip_seconds: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Global gradient-norm cap; 0 disables clipping.
    #[arg(long)]
    pub grad_clip: Option<f64>,
    /// pooled or per-episode-mean.
    #[arg(long)]
    pub pooling: Option<String>,
    /// per-episode or global target standardization.
    #[arg(long)]
    pub scope: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub head_bias: Option<bool>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// train, val, test or all.
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Comma-separated checkpoint paths.
    #[arg(long)]
    pub checkpoints: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pooling: Option<String>,
    #[arg(long)]
    pub scope: Option<String>,
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub episode: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub scope: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Merges defaults, a config file and flags, remembering what it resolved.
struct Layers {
    file: BTreeMap<String, String>,
    resolved: Vec<(String, String)>,
}

impl Layers {
    fn load(path: Option<&Path>, known: &[&str]) -> CliResult<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Failure::Usage(format!(
                        "{}:{}: expected key=value",
                        path.display(),
                        n + 1
                    )));
                };
                let k = k.trim().replace('_', "-");
                if !known.contains(&k.as_str()) {
                    return Err(Failure::Usage(format!(
                        "{}:{}: unknown key `{k}` (known: {})",
                        path.display(),
                        n + 1,
                        known.join(", ")
                    )));
                }
                file.insert(k, v.trim().to_string());
            }
        }
        Ok(Layers {
            file,
            resolved: Vec::new(),
        })
    }

    fn get<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(raw)) => raw
                .parse()
                .map_err(|e| Failure::Usage(format!("config value for `{key}`: {e}")))?,
            (None, None) => default
                .ok_or_else(|| Failure::Usage(format!("missing required option --{key}")))?,
        };
        self.resolved.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> CliResult<PathBuf> {
        let s: String = self.get(key, flag.map(|p| p.display().to_string()), None)?;
        Ok(PathBuf::from(s))
    }

    fn echo(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn usage<T, E: Display>(r: std::result::Result<T, E>) -> CliResult<T> {
    r.map_err(|e| Failure::Usage(e.to_string()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn scope_from(s: &str) -> CliResult<StandardizeScope> {
    match s {
        "per-episode" => Ok(StandardizeScope::PerEpisode),
        "global" => Ok(StandardizeScope::Global),
        _ => Err(Failure::Usage(format!(
            "unknown scope `{s}` (expected per-episode or global)"
        ))),
    }
}

fn cmd_gen_synth(a: GenSynthArgs) -> CliResult<()> {
    let known = ["out", "seed", "episodes", "categories", "seconds", "visual-dim", "audio-dim"];
    let mut l = Layers::load(a.config.as_deref(), &known)?;
    let d = SynthConfig::default();
    let out = l.path("out", a.out)?;
    let seed = l.get("seed", a.seed, Some(d.seed))?;
    let episodes = l.get("episodes", a.episodes, Some(d.total_episodes() as u64))?;
    let categories = l.get("categories", a.categories, Some(d.n_categories as u64))?;
    let seconds = l.get("seconds", a.seconds, Some(d.episode_len_seconds as u64))?;
    let visual_dim = l.get("visual-dim", a.visual_dim, Some(d.visual_dim as u64))?;
    let audio_dim = l.get("audio-dim", a.audio_dim, Some(d.audio_dim as u64))?;
    if categories == 0 || episodes % categories != 0 {
        return Err(Failure::Usage(format!(
            "--episodes ({episodes}) must be a positive multiple of --categories ({categories})"
        )));
    }
    let cfg = SynthConfig {
        n_categories: categories as usize,
        episodes_per_category: (episodes / categories) as usize,
        episode_len_seconds: seconds as usize,
        visual_dim: visual_dim as usize,
        audio_dim: audio_dim as usize,
        seed,
        ..d
    };
    usage(cfg.validate())?;
    let data = generate_synthetic(&cfg)?;
    create_dir(&out)?;
    let manifest = data.write_to_dir(&out)?;
    write_file(&out.join(CONFIG_FILE), &l.echo())?;
    println!("wrote {} episodes to {}", data.episodes.len(), manifest.display());
    Ok(())
}

fn cmd_mfcc(a: MfccArgs) -> CliResult<()> {
    let clip = read_wav(&a.wav)?;
    let id = match a.id {
        Some(id) => id,
        None => a
            .wav
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "audio".into()),
    };
    let seq = extract_audio_features(&clip, &MfccConfig::default(), &id)?;
    write_fvseq(&seq, &a.out)?;
    println!("wrote {} ({} x {})", a.out.display(), seq.len(), seq.dim());
    Ok(())
}

const TRAIN_KEYS: [&str; 16] = [
    "manifest", "model", "out", "lr", "batch", "hidden", "embed", "clip-seconds", "patience",
    "max-epochs", "seed", "split-seed", "grad-clip", "pooling", "scope", "head-bias",
];

fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let mut l = Layers::load(a.config.as_deref(), &TRAIN_KEYS)?;
    let d = TrainConfig::default();
    let manifest = l.path("manifest", a.manifest)?;
    let kind: String = l.get("model", a.model, None)?;
    let kind: ModelKind = usage(kind.parse())?;
    let out = l.path("out", a.out)?;
    let lr = l.get("lr", a.lr, Some(d.lr))?;
    let batch = l.get("batch", a.batch, Some(d.batch_size))?;
    let hidden = l.get("hidden", a.hidden, Some(512))?;
    let embed = l.get("embed", a.embed, Some(512))?;
    let clip_len = l.get("clip-seconds", a.clip_seconds, Some(d.clip_len))?;
    let patience = l.get("patience", a.patience, Some(d.patience))?;
    let max_epochs = l.get("max-epochs", a.max_epochs, Some(d.max_epochs))?;
    let seed = l.get("seed", a.seed, Some(d.seed))?;
    let split_seed = l.get("split-seed", a.split_seed, Some(0))?;
    let grad_clip = l.get("grad-clip", a.grad_clip, Some(d.grad_clip_norm.unwrap_or(0.0)))?;
    let pooling: String = l.get("pooling", a.pooling, Some(d.pooling.to_string()))?;
    let scope: String = l.get("scope", a.scope, Some("per-episode".into()))?;
    let head_bias = l.get("head-bias", a.head_bias, Some(false))?;

    let cfg = TrainConfig {
        lr,
        batch_size: batch,
        clip_len,
        max_epochs,
        patience,
        grad_clip_norm: (grad_clip > 0.0).then_some(grad_clip),
        seed,
        pooling: usage(pooling.parse::<Pooling>())?,
    };
    usage(cfg.validate())?;
    if grad_clip < 0.0 {
        return Err(Failure::Usage("--grad-clip must be >= 0".into()));
    }
    let scope = scope_from(&scope)?;

    let data = Dataset::load(&manifest, scope)?;
    let mut spec = spec_for_dataset(kind, &data)?.with_widths(embed, hidden);
    spec.head_bias = head_bias;
    usage(spec.validate())?;
    let splits = make_splits(&data.categories(), split_seed)?;
    let model = ModelState::build(spec, derive_seed(seed, 1))?;
    let (best, log) = train(model, &data, &splits, &cfg)?;

    create_dir(&out)?;
    save_checkpoint(&best, out.join(CHECKPOINT_FILE))?;
    write_file(&out.join(TRAINLOG_FILE), &log.to_csv())?;
    write_file(&out.join(CONFIG_FILE), &l.echo())?;
    let mut split_text = String::new();
    for (name, ids) in [("train", splits.train()), ("val", splits.val()), ("test", splits.test())] {
        for id in ids {
            split_text.push_str(&format!("{name}\t{id}\n"));
        }
    }
    write_file(&out.join(SPLITS_FILE), &split_text)?;
    let b = log.best().expect("training logs at least one epoch");
    println!(
        "{kind}: {} epochs, best epoch {} (validation srcc {:.4}, composite {:.4})",
        log.epochs.len(),
        b.epoch,
        b.validation.srcc,
        b.validation.composite
    );
    Ok(())
}

pub const REPORT_HEADER: &str = "model,n,mae,rmse,rmsle,srcc,composite";

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<()> {
    let known = ["manifest", "split", "split-seed", "checkpoints", "out", "pooling", "scope"];
    let mut l = Layers::load(a.config.as_deref(), &known)?;
    let manifest = l.path("manifest", a.manifest)?;
    let split: String = l.get("split", a.split, Some("test".into()))?;
    let split_seed = l.get("split-seed", a.split_seed, Some(0))?;
    let checkpoints: String = l.get("checkpoints", a.checkpoints, None)?;
    let out = l.path("out", a.out)?;
    let pooling: String = l.get("pooling", a.pooling, Some(Pooling::default().to_string()))?;
    let scope: String = l.get("scope", a.scope, Some("per-episode".into()))?;
    let pooling: Pooling = usage(pooling.parse())?;
    let scope = scope_from(&scope)?;
    let paths: Vec<&str> = checkpoints.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if paths.is_empty() {
        return Err(Failure::Usage("--checkpoints lists no files".into()));
    }

    let data = Dataset::load(&manifest, scope)?;
    let splits = make_splits(&data.categories(), split_seed)?;
    let mut ids = usage(splits.named(&split))?;
    if ids.is_empty() {
        return Err(Failure::Runtime(anyhow::anyhow!("split `{split}` has no episodes")));
    }
    ids.sort();
    let models = paths
        .iter()
        .map(|p| load_checkpoint(p).with_context(|| format!("loading checkpoint {p}")))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut per_model: Vec<Vec<(Vec<f64>, Vec<f64>)>> = vec![Vec::new(); models.len()];
    let mut ensemble = Vec::new();
    for id in &ids {
        let ep = data.require(id)?;
        let truth = data.require_target(id)?.to_vec();
        for (m, acc) in models.iter().zip(per_model.iter_mut()) {
            acc.push((m.predict(id, ep.inputs())?.values, truth.clone()));
        }
        if models.len() > 1 {
            let members: Vec<_> = models.iter().map(|m| (m, ep.inputs())).collect();
            ensemble.push((ensemble_predict(id, &members)?.values, truth));
        }
    }
    let mut rows: Vec<(String, MetricReport)> = Vec::new();
    for (p, series) in paths.iter().zip(&per_model) {
        rows.push((p.to_string(), report_from_series(series, pooling)?));
    }
    if models.len() > 1 {
        rows.push(("ensemble".into(), report_from_series(&ensemble, pooling)?));
    }
    let mut text = format!("{REPORT_HEADER}\n");
    for (name, r) in &rows {
        text.push_str(&format!("{name},{}\n", r.csv_row()));
        println!("{name}: srcc {:.4} mae {:.4} rmse {:.4} rmsle {:.4} composite {:.4}", r.srcc, r.mae, r.rmse, r.rmsle, r.composite);
        if r.rmsle_clamped > 0 {
            eprintln!("note: {name}: {} values clamped in RMSLE", r.rmsle_clamped);
        }
    }
    write_file(&out, &text)?;
    Ok(())
}

fn cmd_correlate(a: CorrelateArgs) -> CliResult<()> {
    let data = Dataset::load(&a.manifest, StandardizeScope::PerEpisode)?;
    let table = data.correlation_table()?;
    write_file(&a.out, &table.to_csv())?;
    let cell = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:+.3}"));
    for r in &table.rows {
        println!("{:<22} pcc {}  cs {}  srcc {}", r.name, cell(r.pcc), cell(r.cs), cell(r.srcc));
    }
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> CliResult<()> {
    let scope = scope_from(a.scope.as_deref().unwrap_or("per-episode"))?;
    let model = load_checkpoint(&a.checkpoint)?;
    let data = Dataset::load(&a.manifest, scope)?;
    let ep = data.require(&a.episode)?;
    let pred = model.predict(&ep.id, ep.inputs())?;
    let truth = data.target(&ep.id);
    let mut text = String::from("second,predicted,truth\n");
    for (t, p) in pred.values.iter().enumerate() {
        match truth {
            Some(y) => text.push_str(&format!("{t},{p},{}\n", y[t])),
            None => text.push_str(&format!("{t},{p},\n")),
        }
    }
    write_file(&a.out, &text)?;
    println!("wrote {} rows to {}", pred.len(), a.out.display());
    Ok(())
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("VIEWPULSE_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("VIEWPULSE_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("VIEWPULSE_THREADS must be at least 1");
        }
        // A pool may already exist when embedded; keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().map_err(Failure::from).and_then(|()| match cli.command {
        Command::GenSynth(a) => cmd_gen_synth(a),
        Command::Mfcc(a) => cmd_mfcc(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::Predict(a) => cmd_predict(a),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}
