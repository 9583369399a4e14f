//! Turning a pair of recorded channels into measure bundles, under either
//! the Gaussian closed form or plug-in estimation on binned symbols.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::info::{
    covariance_of, discretize_values, distinct_count, empirical_joint, empirical_zero_lag,
    symbolize_levels, CovarianceModel, InfoSource, SymbolSeries, TemporalLayout,
};
use crate::measures::{measure_bundle, MeasureBundle};

/// How information quantities are estimated from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Gaussian,
    /// Quantile binning into `bins` symbols per channel.
    Discrete { bins: usize },
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Gaussian => write!(f, "gaussian"),
            Estimator::Discrete { bins } => write!(f, "discrete({bins})"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    /// Accepts `gaussian`, `discrete(k)` and `discrete:k`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "gaussian" {
            return Ok(Estimator::Gaussian);
        }
        let bins = s
            .strip_prefix("discrete(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("discrete:"))
            .ok_or_else(|| Error::Argument(format!("unknown estimator `{s}`")))?;
        let bins = bins
            .parse()
            .map_err(|_| Error::Argument(format!("bad bin count in `{s}`")))?;
        Ok(Estimator::Discrete { bins })
    }
}

/// The two channels of a pair, prepared for one estimator. Real values are
/// kept for the Gaussian path; the discrete path bins once so that shifting
/// later permutes symbols without re-binning.
#[derive(Debug, Clone, PartialEq)]
pub enum PairData {
    Real([Vec<f64>; 2]),
    Symbols([SymbolSeries; 2]),
}

impl PairData {
    /// Channels already taking exactly `bins` distinct values are coded by
    /// level instead of quantile-binned, so ties in simulated symbolic data
    /// are not split across bins.
    pub fn prepare(x: &[f64], y: &[f64], names: [&str; 2], estimator: Estimator) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Length(format!(
                "channels have {} and {} samples",
                x.len(),
                y.len()
            )));
        }
        match estimator {
            Estimator::Gaussian => Ok(PairData::Real([x.to_vec(), y.to_vec()])),
            Estimator::Discrete { bins } => {
                let code = |v: &[f64], name: &str| {
                    if bins >= 2 && distinct_count(v) == bins {
                        symbolize_levels(v, name, bins)
                    } else {
                        discretize_values(v, name, bins)
                    }
                };
                Ok(PairData::Symbols([code(x, names[0])?, code(y, names[1])?]))
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PairData::Real(c) => c[0].len(),
            PairData::Symbols(s) => s[0].len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Both channels circularly shifted by their own offsets.
    pub fn shifted(&self, offsets: (usize, usize)) -> Result<Self> {
        use crate::surrogates::circular_shift;
        Ok(match self {
            PairData::Real([a, b]) => {
                PairData::Real([circular_shift(a, offsets.0)?, circular_shift(b, offsets.1)?])
            }
            PairData::Symbols([a, b]) => PairData::Symbols([
                SymbolSeries::new(circular_shift(a.symbols(), offsets.0)?, a.cardinality())?,
                SymbolSeries::new(circular_shift(b.symbols(), offsets.1)?, b.cardinality())?,
            ]),
        })
    }

    /// Full measure bundle of the lag-`lag` past/future joint.
    pub fn bundle(&self, lag: usize) -> Result<MeasureBundle> {
        measure_bundle(self.joint(lag)?.as_ref())
    }

    /// Past/future description the measures operate on.
    pub fn joint(&self, lag: usize) -> Result<Box<dyn InfoSource>> {
        if lag == 0 {
            return Err(Error::Argument("lag must be at least 1".into()));
        }
        match self {
            PairData::Real([a, b]) => {
                let t = a.len();
                if t <= lag + 1 {
                    return Err(Error::Length(format!("{t} samples leave nothing at lag {lag}")));
                }
                let cols: [&[f64]; 4] = [&a[..t - lag], &b[..t - lag], &a[lag..], &b[lag..]];
                let names = ["x1_t", "x2_t"]
                    .iter()
                    .map(|s| s.to_string())
                    .chain([format!("x1_t+{lag}"), format!("x2_t+{lag}")])
                    .collect();
                let model = CovarianceModel::new(names, covariance_of(&cols))?
                    .with_layout(TemporalLayout::paired(2))?;
                Ok(Box::new(model))
            }
            PairData::Symbols(s) => Ok(Box::new(empirical_joint(s, lag)?)),
        }
    }

    /// Zero-lag mutual information between the two channels.
    pub fn zero_lag_mi(&self) -> Result<f64> {
        match self {
            PairData::Real([a, b]) => {
                let m = CovarianceModel::new(
                    vec!["x1".into(), "x2".into()],
                    covariance_of(&[a.as_slice(), b.as_slice()]),
                )?;
                m.mi_idx(&[0], &[1])
            }
            PairData::Symbols(s) => empirical_zero_lag(s)?.mi_idx(&[0], &[1]),
        }
    }
}
