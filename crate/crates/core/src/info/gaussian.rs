//! Closed-form mutual information for jointly Gaussian variables.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::info::{clamp_nonnegative, InfoSource, TemporalLayout};

/// Submatrices with a larger condition number are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Log-determinant differences accumulate more rounding than table sums.
pub const GAUSSIAN_CLAMP_TOLERANCE: f64 = 1e-7;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    names: Vec<String>,
    matrix: DMatrix<f64>,
    layout: Option<TemporalLayout>,
}

impl CovarianceModel {
    pub fn new(names: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        let n = names.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Argument(format!(
                "covariance is {}x{} but {} names were given",
                matrix.nrows(),
                matrix.ncols(),
                n
            )));
        }
        for i in 0..n {
            if !(matrix[(i, i)] > 0.0) {
                return Err(Error::DegenerateChannel(names[i].clone()));
            }
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Argument(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            names,
            matrix,
            layout: None,
        })
    }

    pub fn with_layout(mut self, layout: TemporalLayout) -> Result<Self> {
        layout.validate(self.names.len())?;
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn indices_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n)).collect()
    }

    fn submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }

    fn check_sets(&self, sets: &[&[usize]]) -> Result<()> {
        let mut seen = Vec::new();
        for set in sets {
            for &v in *set {
                if v >= self.names.len() {
                    return Err(Error::Argument(format!("variable index {v} out of range")));
                }
                if seen.contains(&v) {
                    return Err(Error::Argument(format!(
                        "variable `{}` appears in two sets",
                        self.names[v]
                    )));
                }
                seen.push(v);
            }
        }
        Ok(())
    }

    fn log_det(&self, m: &DMatrix<f64>, idx: &[usize]) -> Result<f64> {
        log_det_checked(m, || idx.iter().map(|&i| self.names[i].clone()).collect())
    }

    /// `I(a; b)` in bits from the covariance determinants.
    pub fn gaussian_mi(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.mi_idx(&self.indices_of(a)?, &self.indices_of(b)?)
    }

    /// `I(a; b | z)` in bits, computed by partialling `z` out of the joint
    /// covariance of `a ∪ b` (Schur complement).
    pub fn gaussian_cmi(&self, a: &[&str], b: &[&str], z: &[&str]) -> Result<f64> {
        self.cmi_idx(&self.indices_of(a)?, &self.indices_of(b)?, &self.indices_of(z)?)
    }

    pub fn mi_idx(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Argument("mutual information needs nonempty sets".into()));
        }
        self.check_sets(&[a, b])?;
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let joint = self.submatrix(&ab);
        mi_from_joint(&joint, a.len(), |local| {
            local.iter().map(|&i| self.names[ab[i]].clone()).collect()
        })
    }

    pub fn cmi_idx(&self, a: &[usize], b: &[usize], z: &[usize]) -> Result<f64> {
        if z.is_empty() {
            return self.mi_idx(a, b);
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::Argument("mutual information needs nonempty sets".into()));
        }
        self.check_sets(&[a, b, z])?;
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let abz: Vec<usize> = ab.iter().chain(z).copied().collect();
        self.log_det(&self.submatrix(z), z)?;
        self.log_det(&self.submatrix(&abz), &abz)?;

        let s_ab = self.submatrix(&ab);
        let s_zz = self.submatrix(z);
        let s_abz = DMatrix::from_fn(ab.len(), z.len(), |i, j| self.matrix[(ab[i], z[j])]);
        let inv_zz = s_zz
            .cholesky()
            .ok_or_else(|| self.degenerate(z, f64::INFINITY))?
            .inverse();
        let partial = &s_ab - &s_abz * inv_zz * s_abz.transpose();
        let partial = (&partial + partial.transpose()) * 0.5;
        mi_from_joint(&partial, a.len(), |local| {
            local.iter().map(|&i| self.names[ab[i]].clone()).collect()
        })
    }

    fn degenerate(&self, idx: &[usize], condition: f64) -> Error {
        Error::DegenerateCovariance {
            variables: idx.iter().map(|&i| self.names[i].clone()).collect(),
            condition,
        }
    }
}

impl InfoSource for CovarianceModel {
    fn layout(&self) -> Option<&TemporalLayout> {
        self.layout.as_ref()
    }

    fn mi(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.mi_idx(a, b)
    }

    fn cmi(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        self.cmi_idx(a, b, c)
    }

    fn clamp_tolerance(&self) -> f64 {
        GAUSSIAN_CLAMP_TOLERANCE
    }
}

/// MI between the first `split` coordinates of `joint` and the rest.
fn mi_from_joint(
    joint: &DMatrix<f64>,
    split: usize,
    names: impl Fn(&[usize]) -> Vec<String>,
) -> Result<f64> {
    let n = joint.nrows();
    let a: Vec<usize> = (0..split).collect();
    let b: Vec<usize> = (split..n).collect();
    let sub = |idx: &[usize]| DMatrix::from_fn(idx.len(), idx.len(), |i, j| joint[(idx[i], idx[j])]);
    let all: Vec<usize> = (0..n).collect();
    let ld_a = log_det_checked(&sub(&a), || names(&a))?;
    let ld_b = log_det_checked(&sub(&b), || names(&b))?;
    let ld_ab = log_det_checked(joint, || names(&all))?;
    let raw = 0.5 * (ld_a + ld_b - ld_ab) / std::f64::consts::LN_2;
    clamp_nonnegative(raw, GAUSSIAN_CLAMP_TOLERANCE, "Gaussian mutual information")
}

/// Natural log-determinant of a symmetric positive-definite matrix, refusing
/// matrices whose condition number exceeds [`MAX_CONDITION`].
fn log_det_checked(m: &DMatrix<f64>, names: impl FnOnce() -> Vec<String>) -> Result<f64> {
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::DegenerateCovariance {
            variables: names(),
            condition,
        });
    }
    Ok(eig.eigenvalues.iter().map(|l| l.ln()).sum())
}
