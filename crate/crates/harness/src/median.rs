use std::fmt;
use std::str::FromStr;

use crate::error::{HarnessError, Result};
use crate::trace::TraceRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceField {
    Distance,
    CondC,
    Sigma,
    /// Best value found so far.
    BestF,
}

impl TraceField {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Distance => "distance",
            Self::CondC => "cond_c",
            Self::Sigma => "sigma",
            Self::BestF => "best_f",
        }
    }

    pub fn get(self, row: &TraceRow) -> Option<f64> {
        match self {
            Self::Distance => row.distance,
            Self::CondC => Some(row.cond_c),
            Self::Sigma => Some(row.sigma),
            Self::BestF => Some(row.best_f_so_far),
        }
    }
}

impl fmt::Display for TraceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TraceField {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(Self::Distance),
            "cond_c" => Ok(Self::CondC),
            "sigma" => Ok(Self::Sigma),
            "best_f" => Ok(Self::BestF),
            other => Err(HarnessError::UnknownField(other.to_owned())),
        }
    }
}

/// Median of a slice; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-generation median of `field` across traces, truncated to the
/// shortest trace.
pub fn median_trajectory(traces: &[Vec<TraceRow>], field: TraceField) -> Result<Vec<f64>> {
    if traces.is_empty() {
        return Err(HarnessError::Empty("no traces".into()));
    }
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|t| {
            let column = traces
                .iter()
                .map(|tr| field.get(&tr[t]))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| HarnessError::Config(format!("trace has no {field} values")))?;
            Ok(median(&column))
        })
        .collect()
}
