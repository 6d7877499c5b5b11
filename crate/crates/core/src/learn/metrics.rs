use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Percent DS at or above which an artery is considered diseased.
pub const DS_THRESHOLD: f64 = 70.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    Diseased,
}

impl Label {
    pub fn is_diseased(self) -> bool {
        self == Label::Diseased
    }

    pub fn from_diseased(d: bool) -> Self {
        if d {
            Label::Diseased
        } else {
            Label::Normal
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Normal => "normal",
            Label::Diseased => "diseased",
        })
    }
}

/// Normal below `threshold` percent DS, diseased at or above it.
pub fn binarize_ds_at(percent_ds: f64, threshold: f64) -> Result<Label> {
    if !(0.0..=100.0).contains(&percent_ds) {
        return Err(Error::arg(format!("percent DS {percent_ds} outside [0, 100]")));
    }
    Ok(Label::from_diseased(percent_ds >= threshold))
}

pub fn binarize_ds(percent_ds: f64) -> Result<Label> {
    binarize_ds_at(percent_ds, DS_THRESHOLD)
}

/// 2×2 counts with diseased as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// actual diseased, predicted diseased
    pub tp: u64,
    /// actual diseased, predicted normal
    pub fn_: u64,
    /// actual normal, predicted diseased
    pub fp: u64,
    /// actual normal, predicted normal
    pub tn: u64,
}

impl ConfusionMatrix {
    /// Counts in row order (DD, DN, ND, NN): actual × predicted.
    pub fn from_counts(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    pub fn from_predictions(actual: &[Label], predicted: &[Label]) -> Result<Self> {
        if actual.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: actual.len(),
                got: predicted.len(),
            });
        }
        let mut cm = Self::default();
        for (&a, &p) in actual.iter().zip(predicted) {
            cm.record(a, p);
        }
        Ok(cm)
    }

    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual, predicted) {
            (Label::Diseased, Label::Diseased) => self.tp += 1,
            (Label::Diseased, Label::Normal) => self.fn_ += 1,
            (Label::Normal, Label::Diseased) => self.fp += 1,
            (Label::Normal, Label::Normal) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// Rows are actual (diseased, normal), columns predicted (diseased, normal).
    pub fn matrix(&self) -> [[u64; 2]; 2] {
        [[self.tp, self.fn_], [self.fp, self.tn]]
    }

    fn ratio(num: u64, den: u64) -> Option<Ratio<u64>> {
        (den > 0).then(|| Ratio::new(num, den))
    }

    pub fn accuracy(&self) -> Option<Ratio<u64>> {
        Self::ratio(self.tp + self.tn, self.total())
    }

    /// Normals predicted diseased, over all actual normals.
    pub fn false_alarm_rate(&self) -> Option<Ratio<u64>> {
        Self::ratio(self.fp, self.fp + self.tn)
    }

    /// Diseased predicted normal, over all actual diseased.
    pub fn miss_rate(&self) -> Option<Ratio<u64>> {
        Self::ratio(self.fn_, self.tp + self.fn_)
    }

    pub fn summary(&self) -> ConfusionSummary {
        let fmt = |r: Option<Ratio<u64>>| r.map(RateReport::new);
        ConfusionSummary {
            matrix: self.matrix(),
            total: self.total(),
            accuracy: fmt(self.accuracy()),
            false_alarm_rate: fmt(self.false_alarm_rate()),
            miss_rate: fmt(self.miss_rate()),
        }
    }
}

impl std::str::FromStr for ConfusionMatrix {
    type Err = Error;

    /// Parses `tp,fn,fp,tn`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u64> = s
            .split(',')
            .map(|p| p.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::arg(format!("confusion counts '{s}' are not non-negative integers")))?;
        match parts[..] {
            [a, b, c, d] => Ok(Self::from_counts(a, b, c, d)),
            _ => Err(Error::arg(format!(
                "expected four counts DD,DN,ND,NN, got {}",
                parts.len()
            ))),
        }
    }
}

/// Decimal expansion of `r` truncated (not rounded) to `decimals` places.
pub fn truncated_decimal(r: Ratio<u64>, decimals: u32) -> String {
    let scale = 10u128.pow(decimals);
    let scaled = (*r.numer() as u128 * scale) / *r.denom() as u128;
    let int = scaled / scale;
    if decimals == 0 {
        return int.to_string();
    }
    format!("{int}.{:0width$}", scaled % scale, width = decimals as usize)
}

/// A rate as an exact fraction, truncated to 4 places, and as a percentage
/// truncated to 2 places.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub exact: String,
    pub value: f64,
    pub percent: f64,
}

impl RateReport {
    pub fn new(r: Ratio<u64>) -> Self {
        let parse = |s: String| s.parse::<f64>().expect("decimal string");
        Self {
            exact: format!("{}/{}", r.numer(), r.denom()),
            value: parse(truncated_decimal(r, 4)),
            percent: parse(truncated_decimal(r * 100, 2)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    /// Actual (diseased, normal) × predicted (diseased, normal).
    pub matrix: [[u64; 2]; 2],
    pub total: u64,
    pub accuracy: Option<RateReport>,
    pub false_alarm_rate: Option<RateReport>,
    pub miss_rate: Option<RateReport>,
}
