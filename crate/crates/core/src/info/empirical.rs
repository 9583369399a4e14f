//! Estimation from data: sample covariances, quantile discretization and
//! plug-in joint tables.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::info::{CovarianceModel, DiscreteDistribution, TemporalLayout, Variable};
use crate::series::{is_constant, TimeSeriesMatrix};

/// Shortest series accepted by [`sample_covariance`].
pub const MIN_COVARIANCE_LENGTH: usize = 8;

/// Default number of quantile bins for discrete estimation.
pub const DEFAULT_BINS: usize = 4;

/// A discretized channel: integers in `[0, cardinality)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSeries {
    symbols: Vec<usize>,
    cardinality: usize,
}

impl SymbolSeries {
    pub fn new(symbols: Vec<usize>, cardinality: usize) -> Result<Self> {
        if cardinality == 0 {
            return Err(Error::Argument("cardinality must be positive".into()));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= cardinality) {
            return Err(Error::Argument(format!(
                "symbol {s} outside alphabet of size {cardinality}"
            )));
        }
        Ok(Self {
            symbols,
            cardinality,
        })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Histogram of symbol counts.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.cardinality];
        for &s in &self.symbols {
            c[s] += 1;
        }
        c
    }

    /// Symbols as real values, for writing out or Gaussian estimation.
    pub fn as_f64(&self) -> Vec<f64> {
        self.symbols.iter().map(|&s| s as f64).collect()
    }
}

/// Unbiased sample covariance of the selected channels.
pub fn sample_covariance(ts: &TimeSeriesMatrix, channels: &[usize]) -> Result<CovarianceModel> {
    let t = ts.sample_count();
    if t < MIN_COVARIANCE_LENGTH {
        return Err(Error::Length(format!(
            "{t} samples; covariance needs at least {MIN_COVARIANCE_LENGTH}"
        )));
    }
    if channels.is_empty() {
        return Err(Error::Argument("no channels selected".into()));
    }
    let cols: Vec<&[f64]> = channels
        .iter()
        .map(|&c| {
            if c >= ts.channel_count() {
                Err(Error::Argument(format!("channel index {c} out of range")))
            } else {
                Ok(ts.channel(c))
            }
        })
        .collect::<Result<_>>()?;
    let names: Vec<String> = channels
        .iter()
        .map(|&c| ts.channel_names()[c].clone())
        .collect();
    for (name, col) in names.iter().zip(&cols) {
        if is_constant(col) {
            return Err(Error::DegenerateChannel(name.clone()));
        }
    }
    CovarianceModel::new(names, covariance_of(&cols))
}

pub(crate) fn covariance_of(cols: &[&[f64]]) -> DMatrix<f64> {
    let k = cols.len();
    let t = cols[0].len();
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / t as f64;
            c.iter().map(|x| x - mean).collect()
        })
        .collect();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum();
            let v = s / (t - 1) as f64;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Quantile binning of one channel.
///
/// Samples are ranked by value with ties broken by sample order; rank `r`
/// goes to bin `⌊r·bins/T⌋`, so every bin holds `⌊T/bins⌋` or `⌈T/bins⌉`
/// samples.
pub fn discretize(ts: &TimeSeriesMatrix, channel: usize, bins: usize) -> Result<SymbolSeries> {
    if channel >= ts.channel_count() {
        return Err(Error::Argument(format!("channel index {channel} out of range")));
    }
    discretize_values(ts.channel(channel), &ts.channel_names()[channel], bins)
}

pub(crate) fn discretize_values(values: &[f64], name: &str, bins: usize) -> Result<SymbolSeries> {
    if bins < 2 {
        return Err(Error::Argument(format!("bins must be at least 2, got {bins}")));
    }
    let distinct = distinct_count(values);
    if bins > distinct {
        return Err(Error::Cardinality {
            channel: name.to_string(),
            bins,
            distinct,
        });
    }
    let t = values.len();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut symbols = vec![0; t];
    for (rank, &i) in order.iter().enumerate() {
        symbols[i] = rank * bins / t;
    }
    SymbolSeries::new(symbols, bins)
}

/// Codes each distinct value by its rank among the distinct values. Used
/// when a channel already takes exactly `levels` values.
pub(crate) fn symbolize_levels(values: &[f64], name: &str, levels: usize) -> Result<SymbolSeries> {
    let mut uniq: Vec<f64> = values.to_vec();
    uniq.sort_by(f64::total_cmp);
    uniq.dedup();
    if uniq.len() != levels {
        return Err(Error::Cardinality {
            channel: name.to_string(),
            bins: levels,
            distinct: uniq.len(),
        });
    }
    let symbols = values
        .iter()
        .map(|v| uniq.binary_search_by(|u| u.total_cmp(v)).unwrap())
        .collect();
    SymbolSeries::new(symbols, levels)
}

pub(crate) fn distinct_count(values: &[f64]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Plug-in estimate of the joint table of all channels at `t` and at
/// `t + lag`, from the `T − lag` aligned samples.
///
/// Variables are named `x{i}_t` then `x{i}_t+{lag}`; the returned table
/// carries the matching [`TemporalLayout`].
pub fn empirical_joint(series: &[SymbolSeries], lag: usize) -> Result<DiscreteDistribution> {
    if series.is_empty() {
        return Err(Error::Argument("no series given".into()));
    }
    if lag == 0 {
        return Err(Error::Argument("lag must be at least 1".into()));
    }
    let t = series[0].len();
    if let Some(s) = series.iter().find(|s| s.len() != t) {
        return Err(Error::Length(format!(
            "series lengths differ ({} vs {t})",
            s.len()
        )));
    }
    if t <= lag {
        return Err(Error::Length(format!("{t} samples leave nothing at lag {lag}")));
    }
    let n = series.len();
    let state_count: usize = series.iter().map(|s| s.cardinality()).product();
    let encode = |time: usize| {
        series
            .iter()
            .fold(0usize, |acc, s| acc * s.cardinality() + s.symbols()[time])
    };
    let mut counts = vec![0.0; state_count * state_count];
    for time in 0..t - lag {
        counts[encode(time) * state_count + encode(time + lag)] += 1.0;
    }
    let mut variables: Vec<Variable> = series
        .iter()
        .enumerate()
        .map(|(i, s)| Variable::new(format!("x{}_t", i + 1), s.cardinality()))
        .collect();
    variables.extend(
        series
            .iter()
            .enumerate()
            .map(|(i, s)| Variable::new(format!("x{}_t+{lag}", i + 1), s.cardinality())),
    );
    DiscreteDistribution::from_counts(variables, &counts)?.with_layout(TemporalLayout::paired(n))
}

/// Plug-in joint table of several channels at the same time step.
pub fn empirical_zero_lag(series: &[SymbolSeries]) -> Result<DiscreteDistribution> {
    if series.is_empty() {
        return Err(Error::Argument("no series given".into()));
    }
    let t = series[0].len();
    if series.iter().any(|s| s.len() != t) {
        return Err(Error::Length("series lengths differ".into()));
    }
    let size: usize = series.iter().map(|s| s.cardinality()).product();
    let mut counts = vec![0.0; size];
    for time in 0..t {
        let idx = series
            .iter()
            .fold(0usize, |acc, s| acc * s.cardinality() + s.symbols()[time]);
        counts[idx] += 1.0;
    }
    let variables = series
        .iter()
        .enumerate()
        .map(|(i, s)| Variable::new(format!("x{}", i + 1), s.cardinality()))
        .collect();
    DiscreteDistribution::from_counts(variables, &counts)
}
