//! Episode manifests and the in-memory dataset they describe.
//!
//! A manifest is plain text, one episode per line, tab- or
//! space-separated: `id category upload_age_days visual audio labels`.
//! Paths are relative to the manifest's directory; `-` marks an absent
//! file. Blank lines and `#` comments are ignored.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::engagement::{duration_normalize, EngagementRecord, Indicator};
use super::features::{read_fvseq, FeatureSequence, Modality};
use super::normalize::{moments, standardize, StandardizeScope};
use crate::error::{Error, Result};
use crate::metrics::{correlation_table, CorrelationTable};
use crate::models::ModalInputs;

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub category: String,
    pub upload_age_days: f64,
    pub visual: Option<PathBuf>,
    pub audio: Option<PathBuf>,
    pub labels: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_HEADER: &str = "# id\tcategory\tupload_age_days\tvisual\taudio\tlabels";

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let bad = |detail: String| Error::Format {
                what: "manifest",
                detail: format!("line {}: {detail}", lineno + 1),
            };
            if cols.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", cols.len())));
            }
            let age: f64 = cols[2]
                .parse()
                .map_err(|e| bad(format!("upload_age_days `{}`: {e}", cols[2])))?;
            if !(age > 0.0) {
                return Err(bad(format!("upload_age_days must be positive, got {age}")));
            }
            let path = |s: &str| (s != "-").then(|| PathBuf::from(s));
            entries.push(ManifestEntry {
                id: cols[0].to_string(),
                category: cols[1].to_string(),
                upload_age_days: age,
                visual: path(cols[3]),
                audio: path(cols[4]),
                labels: path(cols[5]),
            });
        }
        let mut seen = HashMap::new();
        for e in &entries {
            if seen.insert(e.id.as_str(), ()).is_some() {
                return Err(Error::Format {
                    what: "manifest",
                    detail: format!("duplicate episode id `{}`", e.id),
                });
            }
        }
        Ok(Manifest { entries })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        let p = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                e.id,
                e.category,
                e.upload_age_days,
                p(&e.visual),
                p(&e.audio),
                p(&e.labels)
            ));
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// One episode with whatever modalities and labels the manifest provides.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub id: String,
    pub category: String,
    pub upload_age_days: f64,
    pub visual: Option<FeatureSequence>,
    pub audio: Option<FeatureSequence>,
    pub labels: Option<EngagementRecord>,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.visual
            .as_ref()
            .map(FeatureSequence::len)
            .or(self.audio.as_ref().map(FeatureSequence::len))
            .or(self.labels.as_ref().map(EngagementRecord::len))
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inputs(&self) -> ModalInputs<'_> {
        ModalInputs::new(
            self.visual.as_ref().map(FeatureSequence::matrix),
            self.audio.as_ref().map(FeatureSequence::matrix),
        )
    }

    fn check_aligned(&self) -> Result<()> {
        let lens = [
            self.visual.as_ref().map(|s| ("visual", s.len())),
            self.audio.as_ref().map(|s| ("audio", s.len())),
            self.labels.as_ref().map(|s| ("labels", s.len())),
        ];
        let present: Vec<_> = lens.iter().flatten().collect();
        if let Some(&&(first, n)) = present.first() {
            for &&(name, m) in &present[1..] {
                if m != n {
                    return Err(Error::dim(
                        "episode alignment",
                        format!("{}: {first} T={n}", self.id),
                        format!("{name} T={m}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Loaded episodes plus their regression targets (normalized, standardized
/// views).
#[derive(Clone, Debug)]
pub struct Dataset {
    episodes: Vec<Episode>,
    targets: HashMap<String, Vec<f64>>,
    scope: StandardizeScope,
}

impl Dataset {
    pub fn new(episodes: Vec<Episode>, scope: StandardizeScope) -> Result<Self> {
        for e in &episodes {
            e.check_aligned()?;
        }
        let rates: Vec<(String, Vec<f64>)> = episodes
            .iter()
            .filter_map(|e| e.labels.as_ref().map(|l| (e.id.clone(), l)))
            .map(|(id, l)| duration_normalize(l).map(|r| (id, r)))
            .collect::<Result<_>>()?;
        let targets = match scope {
            StandardizeScope::PerEpisode => rates
                .into_iter()
                .map(|(id, r)| {
                    standardize(&r).map(|z| (id.clone(), z)).map_err(|e| {
                        Error::MissingData(format!("episode `{id}` has unusable views: {e}"))
                    })
                })
                .collect::<Result<_>>()?,
            StandardizeScope::Global => {
                let pooled: Vec<f64> = rates.iter().flat_map(|(_, r)| r.iter().copied()).collect();
                let (mean, sd) = moments(&pooled)?;
                rates
                    .into_iter()
                    .map(|(id, r)| (id, r.iter().map(|v| (v - mean) / sd).collect()))
                    .collect()
            }
        };
        Ok(Dataset {
            episodes,
            targets,
            scope,
        })
    }

    /// Reads every file referenced by the manifest at `path`.
    pub fn load(path: impl AsRef<Path>, scope: StandardizeScope) -> Result<Self> {
        let path = path.as_ref();
        let manifest = Manifest::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut episodes = Vec::with_capacity(manifest.entries.len());
        for entry in &manifest.entries {
            let feature = |p: &Option<PathBuf>, modality: Modality| -> Result<Option<FeatureSequence>> {
                let Some(p) = p else { return Ok(None) };
                let seq = read_fvseq(base.join(p)).map_err(|e| {
                    Error::MissingData(format!("episode `{}` {modality} features: {e}", entry.id))
                })?;
                if seq.modality != modality {
                    return Err(Error::Format {
                        what: "FVSEQ1 file",
                        detail: format!(
                            "episode `{}`: {} is a {} file, listed as {modality}",
                            entry.id,
                            p.display(),
                            seq.modality
                        ),
                    });
                }
                Ok(Some(seq))
            };
            let labels = match &entry.labels {
                None => None,
                Some(p) => {
                    let full = base.join(p);
                    let text = fs::read_to_string(&full).map_err(|e| {
                        Error::MissingData(format!(
                            "episode `{}` label CSV {}: {e}",
                            entry.id,
                            full.display()
                        ))
                    })?;
                    Some(EngagementRecord::from_csv(
                        &text,
                        &entry.id,
                        &entry.category,
                        entry.upload_age_days,
                    )?)
                }
            };
            episodes.push(Episode {
                id: entry.id.clone(),
                category: entry.category.clone(),
                upload_age_days: entry.upload_age_days,
                visual: feature(&entry.visual, Modality::Visual)?,
                audio: feature(&entry.audio, Modality::Audio)?,
                labels,
            });
        }
        Dataset::new(episodes, scope)
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn scope(&self) -> StandardizeScope {
        self.scope
    }

    pub fn episode(&self, id: &str) -> Option<&Episode> {
        self.episodes.iter().find(|e| e.id == id)
    }

    /// Episode lookup whose error lists the known ids.
    pub fn require(&self, id: &str) -> Result<&Episode> {
        self.episode(id).ok_or_else(|| {
            let ids: Vec<&str> = self.episodes.iter().map(|e| e.id.as_str()).collect();
            Error::MissingData(format!("unknown episode `{id}`; available: {}", ids.join(", ")))
        })
    }

    pub fn target(&self, id: &str) -> Option<&[f64]> {
        self.targets.get(id).map(Vec::as_slice)
    }

    pub fn require_target(&self, id: &str) -> Result<&[f64]> {
        self.target(id)
            .ok_or_else(|| Error::MissingData(format!("episode `{id}` has no labels")))
    }

    /// `(id, category)` pairs in manifest order.
    pub fn categories(&self) -> Vec<(String, String)> {
        self.episodes
            .iter()
            .map(|e| (e.id.clone(), e.category.clone()))
            .collect()
    }

    /// Pools every labelled episode's standardized attractiveness and
    /// per-episode standardized indicators, then correlates them. An
    /// indicator that is constant within an episode contributes zeros.
    pub fn correlation_table(&self) -> Result<CorrelationTable> {
        let mut attr = Vec::new();
        let mut pooled: [Vec<f64>; 9] = Default::default();
        for e in &self.episodes {
            let Some(labels) = &e.labels else { continue };
            attr.extend_from_slice(self.require_target(&e.id)?);
            for (k, &ind) in Indicator::ALL.iter().enumerate() {
                let raw = labels.indicator(ind);
                match standardize(raw) {
                    Ok(z) => pooled[k].extend(z),
                    Err(Error::DegenerateSeries(_)) => pooled[k].extend(std::iter::repeat_n(0.0, raw.len())),
                    Err(err) => return Err(err),
                }
            }
        }
        if attr.is_empty() {
            return Err(Error::MissingData("no episode in the dataset has labels".into()));
        }
        let named: Vec<(&str, &[f64])> = Indicator::ALL
            .iter()
            .zip(&pooled)
            .map(|(i, s)| (i.display_name(), s.as_slice()))
            .collect();
        correlation_table(&attr, &named)
    }

    /// Feature widths `(visual, audio)`; 0 for an absent modality.
    pub fn dims(&self) -> (usize, usize) {
        let first = self.episodes.first();
        (
            first.and_then(|e| e.visual.as_ref()).map_or(0, FeatureSequence::dim),
            first.and_then(|e| e.audio.as_ref()).map_or(0, FeatureSequence::dim),
        )
    }
}
