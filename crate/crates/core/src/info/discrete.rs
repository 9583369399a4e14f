//! Joint probability tables over finite-alphabet variables.
//!
//! Tables are dense and row-major: the last variable varies fastest. All
//! quantities are reported in bits, with `0 log 0 = 0`.

use crate::error::{Error, Result};
use crate::info::{clamp_nonnegative, InfoSource, TemporalLayout};

/// Tolerance on total mass when validating a table.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Negative MI/CMI values down to this magnitude are rounding noise.
pub const DISCRETE_CLAMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub cardinality: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Self {
        Self {
            name: name.into(),
            cardinality,
        }
    }
}

/// A joint probability mass table.
///
/// The optional [`TemporalLayout`] marks which variables are the past and
/// future of each element; the temporal measures refuse tables without one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    variables: Vec<Variable>,
    probs: Vec<f64>,
    layout: Option<TemporalLayout>,
}

impl DiscreteDistribution {
    pub fn new(variables: Vec<Variable>, probs: Vec<f64>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidDistribution("no variables".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if v.cardinality == 0 {
                return Err(Error::InvalidDistribution(format!(
                    "variable `{}` has cardinality 0",
                    v.name
                )));
            }
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate variable name `{}`",
                    v.name
                )));
            }
        }
        let expected: usize = variables.iter().map(|v| v.cardinality).product();
        if probs.len() != expected {
            return Err(Error::InvalidDistribution(format!(
                "table has {} entries, cardinalities require {}",
                probs.len(),
                expected
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("invalid mass {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "total mass {total} differs from 1"
            )));
        }
        Ok(Self {
            variables,
            probs,
            layout: None,
        })
    }

    /// Builds a table from non-negative counts (or weights) by normalizing.
    pub fn from_counts(variables: Vec<Variable>, counts: &[f64]) -> Result<Self> {
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("counts sum to zero".into()));
        }
        Self::new(variables, counts.iter().map(|c| c / total).collect())
    }

    /// Uniform mass over every joint outcome.
    pub fn uniform(variables: Vec<Variable>) -> Result<Self> {
        let n: usize = variables.iter().map(|v| v.cardinality).product();
        Self::new(variables, vec![1.0 / n as f64; n])
    }

    /// Attaches past/future metadata. Every index must name a variable and
    /// past/future sets must be disjoint with matching cardinalities.
    pub fn with_layout(mut self, layout: TemporalLayout) -> Result<Self> {
        layout.validate(self.variables.len())?;
        for (&p, &f) in layout.past.iter().zip(&layout.future) {
            if self.variables[p].cardinality != self.variables[f].cardinality {
                return Err(Error::Argument(format!(
                    "past `{}` and future `{}` differ in cardinality",
                    self.variables[p].name, self.variables[f].name
                )));
            }
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn layout(&self) -> Option<&TemporalLayout> {
        self.layout.as_ref()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn indices_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n)).collect()
    }

    /// Mass of one joint outcome given per-variable values.
    pub fn prob_of(&self, outcome: &[usize]) -> f64 {
        assert_eq!(outcome.len(), self.variables.len());
        let mut idx = 0;
        for (v, &x) in self.variables.iter().zip(outcome) {
            assert!(x < v.cardinality);
            idx = idx * v.cardinality + x;
        }
        self.probs[idx]
    }

    /// Marginal mass table over `keep` (in the order given), as a flat
    /// row-major vector.
    pub(crate) fn marginal_probs(&self, keep: &[usize]) -> Vec<f64> {
        let cards = self.cardinalities();
        let mut strides = vec![1usize; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cards[i + 1];
        }
        let out_len: usize = keep.iter().map(|&k| cards[k]).product();
        let mut out = vec![0.0; out_len];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut sub = 0;
            for &k in keep {
                sub = sub * cards[k] + (flat / strides[k]) % cards[k];
            }
            out[sub] += p;
        }
        out
    }

    fn check_set(&self, set: &[usize], what: &str) -> Result<()> {
        if set.is_empty() {
            return Err(Error::Argument(format!("{what} variable set is empty")));
        }
        for (i, &v) in set.iter().enumerate() {
            if v >= self.variables.len() {
                return Err(Error::Argument(format!("variable index {v} out of range")));
            }
            if set[..i].contains(&v) {
                return Err(Error::Argument(format!(
                    "variable `{}` repeated in {what} set",
                    self.variables[v].name
                )));
            }
        }
        Ok(())
    }

    /// Entropy (bits) of the marginal over variable indices.
    pub fn entropy_idx(&self, vars: &[usize]) -> Result<f64> {
        self.check_set(vars, "entropy")?;
        Ok(entropy_bits(&self.marginal_probs(vars)))
    }

    fn entropy_or_zero(&self, vars: &[usize]) -> f64 {
        if vars.is_empty() {
            0.0
        } else {
            entropy_bits(&self.marginal_probs(vars))
        }
    }

    /// Shannon entropy of the marginal over `vars`, in bits.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        self.entropy_idx(&self.indices_of(vars)?)
    }

    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.mi_idx(&self.indices_of(a)?, &self.indices_of(b)?)
    }

    /// `I(a; b | c)`; an empty `c` reduces to plain mutual information.
    pub fn conditional_mi(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        self.cmi_idx(&self.indices_of(a)?, &self.indices_of(b)?, &self.indices_of(c)?)
    }

    pub fn mi_idx(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.cmi_idx(a, b, &[])
    }

    pub fn cmi_idx(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        self.check_set(a, "first")?;
        self.check_set(b, "second")?;
        if !c.is_empty() {
            self.check_set(c, "conditioning")?;
        }
        disjoint(&self.variables, a, b)?;
        disjoint(&self.variables, a, c)?;
        disjoint(&self.variables, b, c)?;

        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        let raw = self.entropy_or_zero(&ac) + self.entropy_or_zero(&bc)
            - self.entropy_or_zero(&abc)
            - self.entropy_or_zero(c);
        let quantity = if c.is_empty() {
            "mutual information"
        } else {
            "conditional mutual information"
        };
        clamp_nonnegative(raw, DISCRETE_CLAMP_TOLERANCE, quantity)
    }

    pub fn marginalize_idx(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Argument("marginalize requires a nonempty keep set".into()));
        }
        self.check_set(keep, "keep")?;
        let variables = keep.iter().map(|&k| self.variables[k].clone()).collect();
        Ok(Self {
            variables,
            probs: self.marginal_probs(keep),
            layout: None,
        })
    }

    /// Sums out every variable not in `keep`. The result lists variables in
    /// the order given by `keep` and carries no temporal layout.
    pub fn marginalize(&self, keep: &[&str]) -> Result<Self> {
        self.marginalize_idx(&self.indices_of(keep)?)
    }

    /// Total-variation distance to another table with the same shape.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.cardinalities() != other.cardinalities() {
            return Err(Error::Argument("tables differ in shape".into()));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }
}

impl InfoSource for DiscreteDistribution {
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
        DISCRETE_CLAMP_TOLERANCE
    }
}

fn disjoint(vars: &[Variable], a: &[usize], b: &[usize]) -> Result<()> {
    if let Some(&v) = a.iter().find(|v| b.contains(v)) {
        return Err(Error::Argument(format!(
            "variable `{}` appears in two sets",
            vars[v].name
        )));
    }
    Ok(())
}

/// Entropy in bits of a mass vector.
pub fn entropy_bits(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    h.max(0.0)
}
