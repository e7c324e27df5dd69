use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// The nine per-second viewer-behaviour indicators, in label-file order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Indicator {
    Exit,
    StartFastForward,
    EndFastForward,
    StartFastRewind,
    EndFastRewind,
    BulletScreens,
    BulletScreenLikes,
    FastForwardSkips,
    FastRewindSkips,
}

impl Indicator {
    pub const ALL: [Indicator; 9] = [
        Indicator::Exit,
        Indicator::StartFastForward,
        Indicator::EndFastForward,
        Indicator::StartFastRewind,
        Indicator::EndFastRewind,
        Indicator::BulletScreens,
        Indicator::BulletScreenLikes,
        Indicator::FastForwardSkips,
        Indicator::FastRewindSkips,
    ];

    /// Column name in label CSVs.
    pub fn column(self) -> &'static str {
        match self {
            Indicator::Exit => "exit",
            Indicator::StartFastForward => "start_ff",
            Indicator::EndFastForward => "end_ff",
            Indicator::StartFastRewind => "start_fr",
            Indicator::EndFastRewind => "end_fr",
            Indicator::BulletScreens => "bullets",
            Indicator::BulletScreenLikes => "bullet_likes",
            Indicator::FastForwardSkips => "ff_skips",
            Indicator::FastRewindSkips => "fr_skips",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Indicator::Exit => "Exit",
            Indicator::StartFastForward => "Start of Fast-Forward",
            Indicator::EndFastForward => "End of Fast-Forward",
            Indicator::StartFastRewind => "Start of Fast-Rewind",
            Indicator::EndFastRewind => "End of Fast-Rewind",
            Indicator::BulletScreens => "Bullet Screens",
            Indicator::BulletScreenLikes => "Bullet Screen Likes",
            Indicator::FastForwardSkips => "Fast-Forward Skips",
            Indicator::FastRewindSkips => "Fast-Rewind Skips",
        }
    }
}

pub const LABEL_HEADER: &str =
    "second,views,exit,start_ff,end_ff,start_fr,end_fr,bullets,bullet_likes,ff_skips,fr_skips";

/// Raw per-second view counts and engagement indicators for one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EngagementRecord {
    pub episode_id: String,
    pub category: String,
    pub upload_age_days: f64,
    pub views: Vec<f64>,
    /// Indexed like [`Indicator::ALL`].
    pub indicators: [Vec<f64>; 9],
}

impl EngagementRecord {
    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn indicator(&self, which: Indicator) -> &[f64] {
        let idx = Indicator::ALL.iter().position(|&i| i == which).expect("listed");
        &self.indicators[idx]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.upload_age_days > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "episode `{}` has non-positive upload age {}",
                self.episode_id, self.upload_age_days
            )));
        }
        for (k, series) in self.indicators.iter().enumerate() {
            if series.len() != self.views.len() {
                return Err(Error::dim(
                    "engagement record",
                    format!("views T={}", self.views.len()),
                    format!("{} T={}", Indicator::ALL[k].column(), series.len()),
                ));
            }
        }
        let all = self.views.iter().chain(self.indicators.iter().flatten());
        if all.clone().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "episode `{}` has negative or non-finite counts",
                self.episode_id
            )));
        }
        Ok(())
    }

    /// Label CSV text (`second,views,<indicators>`).
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(LABEL_HEADER);
        out.push('\n');
        for t in 0..self.len() {
            out.push_str(&t.to_string());
            out.push(',');
            out.push_str(&self.views[t].to_string());
            for series in &self.indicators {
                out.push(',');
                out.push_str(&series[t].to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Parses a label CSV; id, category and age come from the manifest.
    pub fn from_csv(
        text: &str,
        episode_id: &str,
        category: &str,
        upload_age_days: f64,
    ) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let bad = |detail: String| Error::Format {
            what: "label CSV",
            detail: format!("{episode_id}: {detail}"),
        };
        let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        let got: Vec<&str> = headers.iter().collect();
        let want: Vec<&str> = LABEL_HEADER.split(',').collect();
        if got != want {
            return Err(bad(format!("header {got:?} does not match {LABEL_HEADER}")));
        }
        let mut views = Vec::new();
        let mut indicators: [Vec<f64>; 9] = Default::default();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| bad(format!("row {row} too short")))?
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {row} column {k}: {e}")))
            };
            let second = field(0)?;
            if second != row as f64 {
                return Err(bad(format!("row {row} has second {second}")));
            }
            views.push(field(1)?);
            for (k, series) in indicators.iter_mut().enumerate() {
                series.push(field(2 + k)?);
            }
        }
        let record = EngagementRecord {
            episode_id: episode_id.to_string(),
            category: category.to_string(),
            upload_age_days,
            views,
            indicators,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Views per day since upload, for every second of the episode.
pub fn duration_normalize(record: &EngagementRecord) -> Result<Vec<f64>> {
    if !(record.upload_age_days > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "upload age must be positive, got {}",
            record.upload_age_days
        )));
    }
    Ok(record
        .views
        .iter()
        .map(|v| v / record.upload_age_days)
        .collect())
}
