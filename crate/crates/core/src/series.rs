//! Real-valued multichannel recordings.

use crate::error::{Error, Result};

/// Minimum length accepted by the empirical pipeline.
pub const MIN_ANALYSIS_LENGTH: usize = 32;

/// A `T × N` recording stored channel by channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    channel_names: Vec<String>,
    channels: Vec<Vec<f64>>,
}

impl TimeSeriesMatrix {
    /// Checks shape and finiteness only. Use [`validate_for_analysis`]
    /// before running the pipeline.
    ///
    /// [`validate_for_analysis`]: Self::validate_for_analysis
    pub fn new(channel_names: Vec<String>, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channel_names.len() != channels.len() {
            return Err(Error::Length(format!(
                "{} names for {} channels",
                channel_names.len(),
                channels.len()
            )));
        }
        if channels.is_empty() {
            return Err(Error::Length("no channels".into()));
        }
        let t = channels[0].len();
        if t == 0 {
            return Err(Error::Length("no samples".into()));
        }
        for (name, ch) in channel_names.iter().zip(&channels) {
            if ch.len() != t {
                return Err(Error::Length(format!(
                    "channel `{name}` has {} samples, expected {t}",
                    ch.len()
                )));
            }
            if let Some(pos) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::Argument(format!(
                    "channel `{name}` has a non-finite value at sample {pos}"
                )));
            }
        }
        Ok(Self {
            channel_names,
            channels,
        })
    }

    /// Builds a matrix with generated names `ch1..chN`.
    pub fn from_channels(channels: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=channels.len()).map(|i| format!("ch{i}")).collect();
        Self::new(names, channels)
    }

    /// Rejects constant channels and recordings shorter than
    /// [`MIN_ANALYSIS_LENGTH`].
    pub fn validate_for_analysis(&self) -> Result<()> {
        if self.sample_count() < MIN_ANALYSIS_LENGTH {
            return Err(Error::Length(format!(
                "{} samples; at least {MIN_ANALYSIS_LENGTH} required",
                self.sample_count()
            )));
        }
        for (name, ch) in self.channel_names.iter().zip(&self.channels) {
            if is_constant(ch) {
                return Err(Error::DegenerateChannel(name.clone()));
            }
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.channel_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

pub(crate) fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == xs[0])
}
