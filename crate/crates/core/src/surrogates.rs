//! Circular-shift nulls: rotate one channel of a pair to break cross-channel
//! alignment while keeping each channel's own autocorrelation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimator::PairData;
use crate::measures::MeasureBundle;

/// Shortest recording the surrogate machinery accepts.
pub const MIN_SURROGATE_LENGTH: usize = 32;

/// Fraction of `T` used as the minimum shift when the near-identity guard
/// is on.
pub const NEAR_IDENTITY_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    pub n_permutations: usize,
    pub master_seed: u64,
    pub min_shift: usize,
    /// `None` means `T − 1`.
    pub max_shift: Option<usize>,
    /// Shift both channels independently instead of only the second.
    pub shift_both: bool,
    /// Raise `min_shift` to `⌈0.05·T⌉` to avoid near-identity rotations.
    pub near_identity_guard: bool,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            n_permutations: 100,
            master_seed: 0,
            min_shift: 1,
            max_shift: None,
            shift_both: false,
            near_identity_guard: false,
        }
    }
}

impl SurrogateConfig {
    /// Effective `[min, max]` shift range for a recording of length `t`.
    pub fn shift_range(&self, t: usize) -> Result<(usize, usize)> {
        if self.n_permutations == 0 {
            return Err(Error::Argument("at least one permutation is required".into()));
        }
        if t < 2 {
            return Err(Error::Length(format!("{t} samples cannot be shifted")));
        }
        let mut lo = self.min_shift;
        if self.near_identity_guard {
            lo = lo.max((NEAR_IDENTITY_FRACTION * t as f64).ceil() as usize);
        }
        let hi = self.max_shift.unwrap_or(t - 1);
        if lo < 1 || lo > hi || hi > t - 1 {
            return Err(Error::Argument(format!(
                "shift range [{lo}, {hi}] invalid for {t} samples"
            )));
        }
        Ok((lo, hi))
    }
}

/// `out[t] = xs[(t − offset) mod T]`.
pub fn circular_shift<T: Clone>(xs: &[T], offset: usize) -> Result<Vec<T>> {
    let t = xs.len();
    if offset >= t.max(1) {
        return Err(Error::Argument(format!("offset {offset} out of range for {t} samples")));
    }
    let mut out = Vec::with_capacity(t);
    out.extend_from_slice(&xs[t - offset..]);
    out.extend_from_slice(&xs[..t - offset]);
    Ok(out)
}

/// Generator keyed directly by `(master_seed, pair_id, permutation)`.
/// ChaCha is a keyed permutation, so distinct keys give independent
/// streams and the result depends on nothing but the triple.
fn keyed_rng(master_seed: u64, pair_id: u64, permutation: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&pair_id.to_le_bytes());
    key[16..24].copy_from_slice(&permutation.to_le_bytes());
    key[24..].copy_from_slice(b"cshift\0\0");
    ChaCha8Rng::from_seed(key)
}

/// Offsets for the two channels of pair `pair_id` in permutation
/// `permutation`. The first channel stays put unless `shift_both` is set.
pub fn surrogate_offsets(
    cfg: &SurrogateConfig,
    t: usize,
    pair_id: u64,
    permutation: u64,
) -> Result<(usize, usize)> {
    let (lo, hi) = cfg.shift_range(t)?;
    let mut rng = keyed_rng(cfg.master_seed, pair_id, permutation);
    let second = rng.random_range(lo..=hi);
    let first = if cfg.shift_both {
        rng.random_range(lo..=hi)
    } else {
        0
    };
    Ok((first, second))
}

/// Bundle averaged over `cfg.n_permutations` circularly shifted copies of
/// the pair.
pub fn surrogate_average(
    data: &PairData,
    cfg: &SurrogateConfig,
    lag: usize,
    pair_id: u64,
) -> Result<MeasureBundle> {
    let t = data.len();
    if t < MIN_SURROGATE_LENGTH {
        return Err(Error::Length(format!(
            "{t} samples; surrogates need at least {MIN_SURROGATE_LENGTH}"
        )));
    }
    let bundles = (0..cfg.n_permutations as u64)
        .map(|p| {
            let offsets = surrogate_offsets(cfg, t, pair_id, p)?;
            data.shifted(offsets)?.bundle(lag)
        })
        .collect::<Result<Vec<_>>>()?;
    MeasureBundle::average(&bundles)
}
