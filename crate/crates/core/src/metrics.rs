//! Regression metrics, correlation coefficients and the composite
//! early-stopping score.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Floor applied to `1 + x` before taking logs in [`rmsle`].
pub const RMSLE_FLOOR: f64 = 1e-9;

fn check_pair(op: &'static str, p: &[f64], y: &[f64]) -> Result<()> {
    if p.len() != y.len() {
        return Err(Error::dim(op, p.len(), y.len()));
    }
    if p.is_empty() {
        return Err(Error::Empty(op));
    }
    Ok(())
}

pub fn mae(p: &[f64], y: &[f64]) -> Result<f64> {
    check_pair("mae", p, y)?;
    Ok(p.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.len() as f64)
}

pub fn rmse(p: &[f64], y: &[f64]) -> Result<f64> {
    check_pair("rmse", p, y)?;
    Ok((p.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / p.len() as f64).sqrt())
}

/// RMSLE plus the number of values whose `1 + x` hit [`RMSLE_FLOOR`].
pub fn rmsle_with_clamps(p: &[f64], y: &[f64]) -> Result<(f64, usize)> {
    check_pair("rmsle", p, y)?;
    let mut clamped = 0;
    let mut log1p = |x: f64| {
        let v = 1.0 + x;
        if v < RMSLE_FLOOR {
            clamped += 1;
            RMSLE_FLOOR.ln()
        } else {
            v.ln()
        }
    };
    let mut acc = 0.0;
    for (a, b) in p.iter().zip(y) {
        let d = log1p(*a) - log1p(*b);
        acc += d * d;
    }
    Ok(((acc / p.len() as f64).sqrt(), clamped))
}

pub fn rmsle(p: &[f64], y: &[f64]) -> Result<f64> {
    rmsle_with_clamps(p, y).map(|(v, _)| v)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn check_corr(op: &'static str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dim(op, a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::UndefinedCorrelation("need at least two observations"));
    }
    Ok(())
}

/// Pearson correlation (population moments).
pub fn pcc(a: &[f64], b: &[f64]) -> Result<f64> {
    check_corr("pcc", a, b)?;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("constant series"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    check_corr("cosine", a, b)?;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("zero vector"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based fractional ranks; tied values share the mean of their positions.
pub fn fractional_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let r = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

/// Spearman rank-order correlation: Pearson over fractional ranks.
pub fn srcc(a: &[f64], b: &[f64]) -> Result<f64> {
    check_corr("srcc", a, b)?;
    pcc(&fractional_ranks(a), &fractional_ranks(b))
        .map_err(|_| Error::UndefinedCorrelation("all values tied"))
}

/// One evaluation pass.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub n: usize,
    pub mae: f64,
    pub rmse: f64,
    pub rmsle: f64,
    /// Zero when the rank correlation is undefined (see `srcc_defined`).
    pub srcc: f64,
    pub composite: f64,
    pub srcc_defined: bool,
    /// Values whose `1 + x` was clamped inside RMSLE.
    pub rmsle_clamped: usize,
}

impl MetricReport {
    /// Assembles a report, deriving the composite score.
    pub fn new(n: usize, mae: f64, rmse: f64, rmsle: f64, srcc: f64) -> Self {
        let mut r = MetricReport {
            n,
            mae,
            rmse,
            rmsle,
            srcc,
            composite: 0.0,
            srcc_defined: true,
            rmsle_clamped: 0,
        };
        r.composite = composite(&r);
        r
    }

    /// All metrics on one set of (prediction, truth) pairs. An undefined
    /// SRCC (either side constant) is reported as 0.
    pub fn compute(pred: &[f64], truth: &[f64]) -> Result<Self> {
        let (rmsle, clamped) = rmsle_with_clamps(pred, truth)?;
        let (srcc_value, defined) = match srcc(pred, truth) {
            Ok(v) => (v, true),
            Err(Error::UndefinedCorrelation(_)) => (0.0, false),
            Err(e) => return Err(e),
        };
        let mut r = MetricReport::new(pred.len(), mae(pred, truth)?, rmse(pred, truth)?, rmsle, srcc_value);
        r.srcc_defined = defined;
        r.rmsle_clamped = clamped;
        Ok(r)
    }

    pub const CSV_HEADER: &'static str = "n,mae,rmse,rmsle,srcc,composite";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n, self.mae, self.rmse, self.rmsle, self.srcc, self.composite
        )
    }
}

/// `3·SRCC − MAE − RMSE − RMSLE`; larger is better.
pub fn composite(r: &MetricReport) -> f64 {
    3.0 * r.srcc - r.mae - r.rmse - r.rmsle
}

/// Correlations of one engagement indicator with attractiveness.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationRow {
    pub name: String,
    /// `None` when the coefficient is undefined for this indicator.
    pub pcc: Option<f64>,
    pub cs: Option<f64>,
    pub srcc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CorrelationTable {
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationTable {
    pub const CSV_HEADER: &'static str = "name,pcc,cs,srcc";

    pub fn row(&self, name: &str) -> Option<&CorrelationRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |v| v.to_string());
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.name, cell(r.pcc), cell(r.cs), cell(r.srcc));
        }
        out
    }
}

/// Correlates each indicator with the attractiveness series. Inputs are
/// expected to be standardized already. Undefined coefficients mark the
/// row rather than failing the table.
pub fn correlation_table<S: AsRef<str>>(
    attractiveness: &[f64],
    indicators: &[(S, &[f64])],
) -> Result<CorrelationTable> {
    let mut rows = Vec::with_capacity(indicators.len());
    for (name, series) in indicators {
        if series.len() != attractiveness.len() {
            return Err(Error::dim("correlation_table", attractiveness.len(), series.len()));
        }
        rows.push(CorrelationRow {
            name: name.as_ref().to_string(),
            pcc: pcc(attractiveness, series).ok(),
            cs: cosine(attractiveness, series).ok(),
            srcc: srcc(attractiveness, series).ok(),
        });
    }
    Ok(CorrelationTable { rows })
}
