//! Synthetic recordings with known coupling and autocorrelation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::series::TimeSeriesMatrix;
use crate::system::{simulate, DynamicalSystem};

/// Coupling and autocorrelation levels `0.0, 0.1, …, 0.9`.
pub fn default_grid_levels() -> Vec<f64> {
    (0..10).map(|k| k as f64 / 10.0).collect()
}

/// One pair of channels sharing a latent AR(1) driver.
///
/// The driver `s_t = φ s_{t−1} + √(1−φ²) e_t` has unit variance; each
/// channel is `√ρ · s_t + √(1−ρ) · w_t` with private white noise `w`, so the
/// zero-lag correlation of the pair is `ρ` and each channel's lag-1
/// autocorrelation is `ρφ`.
pub fn shared_driver_pair(rho: f64, phi: f64, t: usize, rng: &mut impl Rng) -> Result<[Vec<f64>; 2]> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Argument(format!("coupling must lie in [0, 1), got {rho}")));
    }
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::Argument(format!("autocorrelation must lie in [0, 1), got {phi}")));
    }
    let innovation = (1.0 - phi * phi).sqrt();
    let (shared, private) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut s: f64 = rng.sample(StandardNormal);
    let mut a = Vec::with_capacity(t);
    let mut b = Vec::with_capacity(t);
    for step in 0..t {
        if step > 0 {
            let e: f64 = rng.sample(StandardNormal);
            s = phi * s + innovation * e;
        }
        let (w1, w2): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        a.push(shared * s + private * w1);
        b.push(shared * s + private * w2);
    }
    Ok([a, b])
}

/// A grid cell of [`ar_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub rho: f64,
    pub phi: f64,
    /// Column indices of the cell's two channels.
    pub pair: (usize, usize),
}

/// Every `(ρ, φ)` combination as one independent channel pair, named
/// `r{ρ}_p{φ}_a` / `_b`. Each cell draws from its own stream of `seed`.
pub fn ar_grid(
    rhos: &[f64],
    phis: &[f64],
    t: usize,
    seed: u64,
) -> Result<(TimeSeriesMatrix, Vec<GridCell>)> {
    let mut names = Vec::new();
    let mut channels = Vec::new();
    let mut cells = Vec::new();
    for &rho in rhos {
        for &phi in phis {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(cells.len() as u64);
            let [a, b] = shared_driver_pair(rho, phi, t, &mut rng)?;
            let k = channels.len();
            cells.push(GridCell {
                rho,
                phi,
                pair: (k, k + 1),
            });
            names.push(format!("r{rho}_p{phi}_a"));
            names.push(format!("r{rho}_p{phi}_b"));
            channels.push(a);
            channels.push(b);
        }
    }
    Ok((TimeSeriesMatrix::new(names, channels)?, cells))
}

/// A simulated trajectory as a real-valued recording with columns
/// `x1 .. xn`.
pub fn trajectory_matrix(sys: &DynamicalSystem, steps: usize, seed: u64) -> Result<TimeSeriesMatrix> {
    let series = simulate(sys, steps, seed)?;
    let names = (1..=series.len()).map(|i| format!("x{i}")).collect();
    TimeSeriesMatrix::new(names, series.iter().map(|s| s.as_f64()).collect())
}
