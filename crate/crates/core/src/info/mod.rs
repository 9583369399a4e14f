//! Information-theoretic primitives in bits: discrete tables, the Gaussian
//! closed form, and estimation from recorded data.

mod discrete;
mod empirical;
mod gaussian;

pub use discrete::{entropy_bits, DiscreteDistribution, Variable, DISCRETE_CLAMP_TOLERANCE, MASS_TOLERANCE};
pub use empirical::{
    discretize, empirical_joint, empirical_zero_lag, sample_covariance, SymbolSeries, DEFAULT_BINS,
    MIN_COVARIANCE_LENGTH,
};
pub(crate) use empirical::{covariance_of, discretize_values, distinct_count, symbolize_levels};
pub use gaussian::{CovarianceModel, GAUSSIAN_CLAMP_TOLERANCE, MAX_CONDITION};

use crate::error::{Error, Result};

/// Which variables hold each element's past and future value.
///
/// `past[i]` and `future[i]` are variable indices for element `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalLayout {
    pub past: Vec<usize>,
    pub future: Vec<usize>,
}

impl TemporalLayout {
    /// Layout for `n` elements stored as all pasts followed by all futures.
    pub fn paired(n: usize) -> Self {
        Self {
            past: (0..n).collect(),
            future: (n..2 * n).collect(),
        }
    }

    pub fn element_count(&self) -> usize {
        self.past.len()
    }

    pub(crate) fn validate(&self, var_count: usize) -> Result<()> {
        if self.past.is_empty() || self.past.len() != self.future.len() {
            return Err(Error::Argument(
                "temporal layout needs matching nonempty past and future sets".into(),
            ));
        }
        let mut all: Vec<usize> = self.past.iter().chain(&self.future).copied().collect();
        if all.iter().any(|&v| v >= var_count) {
            return Err(Error::Argument("temporal layout index out of range".into()));
        }
        all.sort_unstable();
        all.dedup();
        if all.len() != 2 * self.past.len() {
            return Err(Error::Argument("temporal layout repeats a variable".into()));
        }
        Ok(())
    }
}

/// Anything that can evaluate (conditional) mutual information between
/// sets of its variables, addressed by index.
pub trait InfoSource {
    fn layout(&self) -> Option<&TemporalLayout>;
    fn mi(&self, a: &[usize], b: &[usize]) -> Result<f64>;
    fn cmi(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64>;
    /// Largest negative residue treated as zero for derived quantities.
    fn clamp_tolerance(&self) -> f64;
}

/// Zeroes tiny negative rounding residue; anything more negative than
/// `tolerance` is a bug upstream.
pub(crate) fn clamp_nonnegative(value: f64, tolerance: f64, quantity: &'static str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tolerance {
        Ok(0.0)
    } else {
        Err(Error::Inconsistent { quantity, value })
    }
}
