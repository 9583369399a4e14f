//! Finite-state dynamical systems built from a transition probability
//! matrix over a set of elements.
//!
//! Joint states use a mixed-radix code with element 1 as the most
//! significant digit: for cardinalities `(c1, c2)` the state `(a, b)` is
//! `a * c2 + b`.

mod tpm_file;

pub use tpm_file::{parse_tpm, read_tpm, write_tpm, format_tpm};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::info::{DiscreteDistribution, SymbolSeries, TemporalLayout, Variable};

const ROW_TOLERANCE: f64 = 1e-9;

/// Residual at which power iteration stops.
pub const STATIONARY_TOLERANCE: f64 = 1e-12;
/// Residual above which a capped power iteration is reported as unconverged.
pub const STATIONARY_WARN_RESIDUAL: f64 = 1e-6;
pub const STATIONARY_MAX_ITERATIONS: usize = 10_000;

/// Row-stochastic matrix over the joint states of a set of elements.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    element_cardinalities: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl TransitionModel {
    pub fn new(element_cardinalities: Vec<usize>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if element_cardinalities.is_empty() || element_cardinalities.contains(&0) {
            return Err(Error::InvalidModel(
                "element cardinalities must be nonempty and positive".into(),
            ));
        }
        let n: usize = element_cardinalities.iter().product();
        if rows.len() != n {
            return Err(Error::InvalidModel(format!("{} rows, expected {n}", rows.len())));
        }
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidModel(format!(
                    "row {s} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidModel(format!("row {s} has an invalid entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidModel(format!("row {s} sums to {total}")));
            }
        }
        Ok(Self {
            element_cardinalities,
            rows,
        })
    }

    pub fn element_cardinalities(&self) -> &[usize] {
        &self.element_cardinalities
    }

    pub fn element_count(&self) -> usize {
        self.element_cardinalities.len()
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.rows[state]
    }

    /// `P(next | current)`.
    pub fn prob(&self, current: usize, next: usize) -> f64 {
        self.rows[current][next]
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        encode_state(&self.element_cardinalities, values)
    }

    pub fn decode(&self, state: usize) -> Vec<usize> {
        decode_state(&self.element_cardinalities, state)
    }
}

pub(crate) fn encode_state(cards: &[usize], values: &[usize]) -> usize {
    debug_assert_eq!(cards.len(), values.len());
    cards.iter().zip(values).fold(0, |acc, (c, v)| acc * c + v)
}

pub(crate) fn decode_state(cards: &[usize], mut state: usize) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (slot, c) in out.iter_mut().zip(cards).rev() {
        *slot = state % c;
        state /= c;
    }
    out
}

fn past_variables(cards: &[usize]) -> Vec<Variable> {
    cards
        .iter()
        .enumerate()
        .map(|(i, &c)| Variable::new(format!("x{}_t", i + 1), c))
        .collect()
}

fn future_variables(cards: &[usize]) -> Vec<Variable> {
    cards
        .iter()
        .enumerate()
        .map(|(i, &c)| Variable::new(format!("x{}_t+1", i + 1), c))
        .collect()
}

/// A transition model together with a distribution over the past state.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalSystem {
    model: TransitionModel,
    input: DiscreteDistribution,
}

impl DynamicalSystem {
    /// The input must be a table over variables `x1_t .. xn_t` whose
    /// cardinalities match the model's elements.
    pub fn new(model: TransitionModel, input: DiscreteDistribution) -> Result<Self> {
        let expected = past_variables(model.element_cardinalities());
        if input.variables() != expected.as_slice() {
            return Err(Error::InvalidModel(
                "input distribution does not match element structure".into(),
            ));
        }
        Ok(Self { model, input })
    }

    /// Uniform (maximum-entropy) input distribution.
    pub fn with_uniform_input(model: TransitionModel) -> Result<Self> {
        let input = DiscreteDistribution::uniform(past_variables(model.element_cardinalities()))?;
        Self::new(model, input)
    }

    /// Input given as a flat mass vector over joint states.
    pub fn with_input_probs(model: TransitionModel, probs: Vec<f64>) -> Result<Self> {
        let input = DiscreteDistribution::new(past_variables(model.element_cardinalities()), probs)?;
        Self::new(model, input)
    }

    /// Same dynamics, all input mass on one joint state.
    pub fn starting_from(&self, values: &[usize]) -> Result<Self> {
        if values.len() != self.element_count()
            || values
                .iter()
                .zip(self.model.element_cardinalities())
                .any(|(v, c)| v >= c)
        {
            return Err(Error::Argument(format!("invalid state {values:?}")));
        }
        let mut probs = vec![0.0; self.model.state_count()];
        probs[self.model.encode(values)] = 1.0;
        Self::with_input_probs(self.model.clone(), probs)
    }

    /// Same dynamics with the input replaced by the stationary distribution.
    pub fn with_stationary_input(&self) -> Result<Self> {
        let st = stationary_distribution(&self.model)?;
        Self::with_input_probs(self.model.clone(), st.distribution.probs().to_vec())
    }

    pub fn model(&self) -> &TransitionModel {
        &self.model
    }

    pub fn input(&self) -> &DiscreteDistribution {
        &self.input
    }

    pub fn element_count(&self) -> usize {
        self.model.element_count()
    }
}

/// Two binary elements that each flip deterministically: `(a, b) → (1−a, 1−b)`.
pub fn make_system_x() -> DynamicalSystem {
    let cards = vec![2, 2];
    let rows = (0..4)
        .map(|s| {
            let v = decode_state(&cards, s);
            let next = encode_state(&cards, &[1 - v[0], 1 - v[1]]);
            (0..4).map(|t| if t == next { 1.0 } else { 0.0 }).collect()
        })
        .collect();
    let model = TransitionModel::new(cards, rows).expect("system X is row-stochastic");
    DynamicalSystem::with_uniform_input(model).expect("uniform input matches")
}

/// Two binary elements whose parity is preserved while the micro-state is
/// redrawn uniformly among the two states of that parity.
pub fn make_system_y() -> DynamicalSystem {
    let cards = vec![2, 2];
    let rows = (0..4)
        .map(|s| {
            let v = decode_state(&cards, s);
            let parity = v[0] ^ v[1];
            (0..4)
                .map(|t| {
                    let w = decode_state(&cards, t);
                    if w[0] ^ w[1] == parity {
                        0.5
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let model = TransitionModel::new(cards, rows).expect("system Y is row-stochastic");
    DynamicalSystem::with_uniform_input(model).expect("uniform input matches")
}

/// Random system whose rows are independent symmetric Dirichlet draws.
///
/// Small `concentration` gives near-deterministic rows, large gives
/// near-uniform ones. Input is uniform.
pub fn random_system(
    element_cardinalities: &[usize],
    seed: u64,
    concentration: f64,
) -> Result<DynamicalSystem> {
    if !(concentration > 0.0) || !concentration.is_finite() {
        return Err(Error::Argument(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    let n: usize = element_cardinalities.iter().product();
    let gamma = Gamma::new(concentration, 1.0)
        .map_err(|e| Error::Argument(format!("concentration: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = row.iter().sum();
            if total > 0.0 && total.is_finite() {
                row.iter_mut().for_each(|p| *p /= total);
            } else {
                // every draw underflowed: the Dirichlet limit is a vertex
                let k = rng.random_range(0..n);
                row = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
            }
            row
        })
        .collect();
    DynamicalSystem::with_uniform_input(TransitionModel::new(element_cardinalities.to_vec(), rows)?)
}

/// Joint table over `(x1_t .. xn_t, x1_t+1 .. xn_t+1)` with mass
/// `input(s) · P(s' | s)`.
pub fn joint_past_future(sys: &DynamicalSystem) -> DiscreteDistribution {
    let cards = sys.model.element_cardinalities();
    let n = sys.model.state_count();
    let input = sys.input.probs();
    let mut probs = Vec::with_capacity(n * n);
    for (s, row) in sys.model.rows.iter().enumerate() {
        probs.extend(row.iter().map(|p| input[s] * p));
    }
    let mut vars = past_variables(cards);
    vars.extend(future_variables(cards));
    DiscreteDistribution::new(vars, probs)
        .and_then(|d| d.with_layout(TemporalLayout::paired(cards.len())))
        .expect("joint of a valid system is a valid table")
}

/// The single-element process of element `element`: its input marginal and
/// `P(x_i' | x_i)` obtained by conditioning the joint past-future table.
/// Rows conditioned on zero-mass states are uniform.
pub fn marginal_transition(sys: &DynamicalSystem, element: usize) -> Result<DynamicalSystem> {
    let n = sys.element_count();
    if element >= n {
        return Err(Error::Argument(format!(
            "element {element} out of range for {n}-element system"
        )));
    }
    let card = sys.model.element_cardinalities()[element];
    let pair = joint_past_future(sys).marginalize_idx(&[element, n + element])?;
    let table = pair.probs();
    let rows = (0..card)
        .map(|x| {
            let row = &table[x * card..(x + 1) * card];
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter().map(|p| p / total).collect()
            } else {
                vec![1.0 / card as f64; card]
            }
        })
        .collect();
    let input = sys.input.marginal_probs(&[element]);
    DynamicalSystem::with_input_probs(TransitionModel::new(vec![card], rows)?, input)
}

/// Disintegrated twin: the product of the elements' marginal processes.
///
/// Input is the product of per-element input marginals; each transition row
/// is the product of per-element marginal rows.
pub fn independent_twin(sys: &DynamicalSystem) -> Result<DynamicalSystem> {
    let cards = sys.model.element_cardinalities().to_vec();
    let parts: Vec<DynamicalSystem> = (0..cards.len())
        .map(|i| marginal_transition(sys, i))
        .collect::<Result<_>>()?;
    let n = sys.model.state_count();
    let decoded: Vec<Vec<usize>> = (0..n).map(|s| decode_state(&cards, s)).collect();
    let input = decoded
        .iter()
        .map(|v| {
            parts
                .iter()
                .zip(v)
                .map(|(p, &x)| p.input.probs()[x])
                .product()
        })
        .collect();
    let rows = decoded
        .iter()
        .map(|from| {
            decoded
                .iter()
                .map(|to| {
                    parts
                        .iter()
                        .zip(from.iter().zip(to))
                        .map(|(p, (&a, &b))| p.model.rows[a][b])
                        .product()
                })
                .collect()
        })
        .collect();
    DynamicalSystem::with_input_probs(TransitionModel::new(cards, rows)?, input)
}

fn sample_index(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or_else(|| {
            // u landed in the rounding gap above the last partial sum
            cumulative.iter().rposition(|&c| c > 0.0).unwrap_or(0)
        })
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(if x > 0.0 { *acc } else { f64::NEG_INFINITY })
        })
        .collect()
}

/// Draws a trajectory of `steps` joint states: the first from the input
/// distribution, then `steps − 1` transitions. Returns one series per
/// element.
pub fn simulate(sys: &DynamicalSystem, steps: usize, seed: u64) -> Result<Vec<SymbolSeries>> {
    if steps == 0 {
        return Err(Error::Argument("steps must be at least 1".into()));
    }
    let cards = sys.model.element_cardinalities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_cdf = cumulative(sys.input.probs());
    let row_cdfs: Vec<Vec<f64>> = sys.model.rows.iter().map(|r| cumulative(r)).collect();

    let mut columns = vec![Vec::with_capacity(steps); cards.len()];
    let mut state = sample_index(&input_cdf, rng.random::<f64>());
    for step in 0..steps {
        if step > 0 {
            state = sample_index(&row_cdfs[state], rng.random::<f64>());
        }
        for (col, v) in columns.iter_mut().zip(decode_state(cards, state)) {
            col.push(v);
        }
    }
    columns
        .into_iter()
        .zip(cards)
        .map(|(col, &c)| SymbolSeries::new(col, c))
        .collect()
}

/// Outcome of [`stationary_distribution`].
#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub distribution: DiscreteDistribution,
    /// L1 norm of `πP − π` for the returned `π`.
    pub residual: f64,
    pub iterations: usize,
    /// Set when the iteration cap was hit with residual above
    /// [`STATIONARY_WARN_RESIDUAL`].
    pub warning: Option<String>,
}

/// Fixed point of the chain by power iteration from the uniform start.
///
/// When the plain iterates do not settle (periodic chains), the Cesàro
/// average of the iterates is returned instead.
pub fn stationary_distribution(model: &TransitionModel) -> Result<Stationary> {
    let n = model.state_count();
    let step = |pi: &[f64]| -> Vec<f64> {
        let mut next = vec![0.0; n];
        for (s, row) in model.rows.iter().enumerate() {
            if pi[s] == 0.0 {
                continue;
            }
            for (t, p) in row.iter().enumerate() {
                next[t] += pi[s] * p;
            }
        }
        next
    };
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();

    let mut pi = vec![1.0 / n as f64; n];
    let mut running = vec![0.0; n];
    let mut result = None;
    let mut iterations = 0;
    for it in 1..=STATIONARY_MAX_ITERATIONS {
        iterations = it;
        running.iter_mut().zip(&pi).for_each(|(r, p)| *r += p);
        let next = step(&pi);
        let residual = l1(&next, &pi);
        pi = next;
        if residual < STATIONARY_TOLERANCE {
            result = Some((pi.clone(), residual));
            break;
        }
    }
    let (probs, residual) = match result {
        Some(r) => r,
        None => {
            let mean: Vec<f64> = running.iter().map(|r| r / iterations as f64).collect();
            let residual = l1(&step(&mean), &mean);
            (mean, residual)
        }
    };
    let total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
    let warning = (residual > STATIONARY_WARN_RESIDUAL).then(|| {
        format!("power iteration did not converge: residual {residual:.3e} after {iterations} iterations")
    });
    Ok(Stationary {
        distribution: DiscreteDistribution::new(past_variables(model.element_cardinalities()), probs)?,
        residual,
        iterations,
        warning,
    })
}
