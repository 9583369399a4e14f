//! Random-system sweeps over the sign of the change in synergy under
//! disintegration, and the exact toy-system table.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{delta_synergy_closed_form, measure_bundle, MeasureBundle};
use crate::system::{
    independent_twin, joint_past_future, make_system_x, make_system_y, random_system,
    DynamicalSystem,
};

/// Magnitude below which a change is reported as zero.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Threshold for reporting a clearly signed change.
pub const SIGN_THRESHOLD: f64 = 0.01;

/// Distribution over the past state of each random system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// Stationary distribution of the drawn chain. Lets the elements be
    /// correlated at time `t`, which is what allows synergy to grow.
    Stationary,
    /// Maximum-entropy product input.
    Uniform,
}

impl std::str::FromStr for InputKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(InputKind::Stationary),
            "uniform" => Ok(InputKind::Uniform),
            _ => Err(Error::Argument(format!("unknown input kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub count: usize,
    pub seed: u64,
    pub concentration_min: f64,
    pub concentration_max: f64,
    pub input: InputKind,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            seed: 0,
            concentration_min: 0.1,
            concentration_max: 10.0,
            input: InputKind::Stationary,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub system_seed: u64,
    pub concentration: f64,
    pub original: MeasureBundle,
    pub twin: MeasureBundle,
    pub delta_syn: f64,
    pub closed_form: f64,
    /// `closed_form − delta_syn`.
    pub discrepancy: f64,
    /// One-based element treated as the primary source by the closed form.
    pub primary_element: usize,
    /// The original's most informative source is also maximal in the twin.
    pub argmax_stable: bool,
    pub stationary_warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub p05: f64,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
    pub mean: f64,
    pub mean_abs: f64,
}

impl Quantiles {
    fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |f: f64| v[((v.len() - 1) as f64 * f).round() as usize];
        let n = v.len() as f64;
        Self {
            min: v[0],
            p05: q(0.05),
            median: q(0.5),
            p95: q(0.95),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / n,
            mean_abs: v.iter().map(|x| x.abs()).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub count: usize,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub above_threshold: usize,
    pub below_threshold: usize,
    pub delta_syn: Quantiles,
    pub discrepancy: Quantiles,
    pub discrepancy_zero: usize,
    pub argmax_unstable: usize,
    pub stationary_warnings: usize,
}

/// Seed of system `index`, keyed by the sweep seed so records do not
/// depend on evaluation order.
fn system_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

fn draw_concentration(cfg: &SweepConfig, system_seed: u64) -> f64 {
    let (lo, hi) = (cfg.concentration_min, cfg.concentration_max);
    if lo == hi {
        return lo;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(system_seed);
    rng.set_stream(u64::MAX);
    // log-uniform: Dirichlet behaviour changes on a multiplicative scale
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Measures one system and its independent twin.
pub fn sweep_record(
    sys: &DynamicalSystem,
    index: usize,
    system_seed: u64,
    concentration: f64,
    stationary_warning: Option<String>,
) -> Result<SweepRecord> {
    let twin = independent_twin(sys)?;
    let jpf = joint_past_future(sys);
    let original = measure_bundle(&jpf)?;
    let twin_bundle = measure_bundle(&joint_past_future(&twin))?;
    let closed = delta_synergy_closed_form(&jpf)?;
    let delta = twin_bundle.synergy_mmi - original.synergy_mmi;
    let twin_max = twin_bundle
        .single_source_mi
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SweepRecord {
        index,
        system_seed,
        concentration,
        argmax_stable: twin_bundle.single_source_mi[original.argmax_source] >= twin_max - ZERO_TOLERANCE,
        original,
        twin: twin_bundle,
        delta_syn: delta,
        closed_form: closed.value,
        discrepancy: closed.value - delta,
        primary_element: closed.primary_element + 1,
        stationary_warning,
    })
}

/// Random 2×2 binary systems with Dirichlet rows.
pub fn run_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    if cfg.count == 0 {
        return Err(Error::Argument("count must be at least 1".into()));
    }
    let (lo, hi) = (cfg.concentration_min, cfg.concentration_max);
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::Argument(format!("invalid concentration range [{lo}, {hi}]")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
    let records = pool.install(|| {
        (0..cfg.count)
            .into_par_iter()
            .map(|index| {
                let seed = system_seed(cfg.seed, index);
                let concentration = draw_concentration(cfg, seed);
                let sys = random_system(&[2, 2], seed, concentration)?;
                let (sys, warning) = match cfg.input {
                    InputKind::Uniform => (sys, None),
                    InputKind::Stationary => {
                        let st = crate::system::stationary_distribution(sys.model())?;
                        let probs = st.distribution.probs().to_vec();
                        (DynamicalSystem::with_input_probs(sys.model().clone(), probs)?, st.warning)
                    }
                };
                sweep_record(&sys, index, seed, concentration, warning)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize_sweep(&records);
    Ok((records, summary))
}

pub fn summarize_sweep(records: &[SweepRecord]) -> SweepSummary {
    let deltas: Vec<f64> = records.iter().map(|r| r.delta_syn).collect();
    let disc: Vec<f64> = records.iter().map(|r| r.discrepancy).collect();
    SweepSummary {
        count: records.len(),
        positive: deltas.iter().filter(|&&d| d > ZERO_TOLERANCE).count(),
        negative: deltas.iter().filter(|&&d| d < -ZERO_TOLERANCE).count(),
        zero: deltas.iter().filter(|&&d| d.abs() <= ZERO_TOLERANCE).count(),
        above_threshold: deltas.iter().filter(|&&d| d > SIGN_THRESHOLD).count(),
        below_threshold: deltas.iter().filter(|&&d| d < -SIGN_THRESHOLD).count(),
        delta_syn: Quantiles::of(&deltas),
        discrepancy: Quantiles::of(&disc),
        discrepancy_zero: disc.iter().filter(|d| d.abs() <= ZERO_TOLERANCE).count(),
        argmax_unstable: records.iter().filter(|r| !r.argmax_stable).count(),
        stationary_warnings: records.iter().filter(|r| r.stationary_warning.is_some()).count(),
    }
}

/// Per-system JSON lines followed by the summary object, plus a tidy CSV
/// with one row per system.
pub fn write_sweep(path: &Path, records: &[SweepRecord], summary: &SweepSummary) -> Result<()> {
    let io = |e: std::io::Error| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        writeln!(w, "{}", serde_json::to_string(r).expect("records serialize")).map_err(io)?;
    }
    writeln!(w, "{}", serde_json::to_string(summary).expect("summary serializes")).map_err(io)?;
    w.flush().map_err(io)?;

    let csv_path = crate::pipeline::csv_mirror_path(path);
    let cerr = |e: csv::Error| Error::io(&csv_path, e);
    let mut c = csv::Writer::from_writer(BufWriter::new(
        File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?,
    ));
    let cols = MeasureBundle::field_names(2);
    let mut header: Vec<String> = vec!["index".into(), "system_seed".into(), "concentration".into()];
    header.extend(cols.iter().map(|k| format!("orig_{k}")));
    header.extend(cols.iter().map(|k| format!("twin_{k}")));
    header.extend(
        ["delta_syn", "closed_form", "discrepancy", "primary_element", "argmax_stable"]
            .map(String::from),
    );
    c.write_record(&header).map_err(cerr)?;
    for r in records {
        let mut row = vec![
            r.index.to_string(),
            r.system_seed.to_string(),
            r.concentration.to_string(),
        ];
        row.extend(r.original.fields().iter().map(|(_, v)| v.to_string()));
        row.extend(r.twin.fields().iter().map(|(_, v)| v.to_string()));
        row.extend([
            r.delta_syn.to_string(),
            r.closed_form.to_string(),
            r.discrepancy.to_string(),
            r.primary_element.to_string(),
            r.argmax_stable.to_string(),
        ]);
        c.write_record(&row).map_err(cerr)?;
    }
    c.flush().map_err(|e| Error::io(&csv_path, e))
}

/// One row of the toy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRow {
    pub system: String,
    pub tmi: f64,
    pub phi_wms: f64,
    pub red_mmi: f64,
    pub syn_mmi: f64,
    pub delta_syn: f64,
    pub delta_syn_closed_form: f64,
}

impl ToyRow {
    pub const COLUMNS: [&'static str; 6] =
        ["tmi", "phi_wms", "red_mmi", "syn_mmi", "delta_syn", "delta_syn_closed_form"];

    pub fn values(&self) -> [f64; 6] {
        [
            self.tmi,
            self.phi_wms,
            self.red_mmi,
            self.syn_mmi,
            self.delta_syn,
            self.delta_syn_closed_form,
        ]
    }
}

fn toy_row(name: &str, sys: &DynamicalSystem) -> Result<ToyRow> {
    let jpf = joint_past_future(sys);
    let b = measure_bundle(&jpf)?;
    let twin = measure_bundle(&joint_past_future(&independent_twin(sys)?))?;
    Ok(ToyRow {
        system: name.into(),
        tmi: b.temporal_mi,
        phi_wms: b.phi_wms,
        red_mmi: b.redundancy_mmi,
        syn_mmi: b.synergy_mmi,
        delta_syn: twin.synergy_mmi - b.synergy_mmi,
        delta_syn_closed_form: delta_synergy_closed_form(&jpf)?.value,
    })
}

/// Exact table for systems X and Y and their independent twins.
pub fn toy_table() -> Result<Vec<ToyRow>> {
    let x = make_system_x();
    let y = make_system_y();
    Ok(vec![
        toy_row("X", &x)?,
        toy_row("Y", &y)?,
        toy_row("twin(X)", &independent_twin(&x)?)?,
        toy_row("twin(Y)", &independent_twin(&y)?)?,
    ])
}

/// Reference values for [`toy_table`], in [`ToyRow::COLUMNS`] order.
///
/// The closed-form column is the literal pairwise expression
/// `I(X¹_t;X²_t) − I(X¹_t;X_{t+1}|X²_t)`: on X (and its twin, which is X
/// itself) the conditional term is a full bit, so it reads −1 even though
/// the change in synergy is 0.
pub fn toy_oracle(system: &str) -> Option<[f64; 6]> {
    match system {
        "X" | "twin(X)" => Some([2.0, 0.0, 0.0, 1.0, 0.0, -1.0]),
        "Y" => Some([1.0, 1.0, 0.0, 1.0, -1.0, -1.0]),
        "twin(Y)" => Some([0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        _ => None,
    }
}

/// `(system, column, got, expected)` for every entry off by more than
/// `tolerance`.
pub fn toy_mismatches(rows: &[ToyRow], tolerance: f64) -> Vec<(String, &'static str, f64, f64)> {
    let mut out = Vec::new();
    for row in rows {
        let Some(expected) = toy_oracle(&row.system) else {
            continue;
        };
        for ((col, got), want) in ToyRow::COLUMNS.iter().zip(row.values()).zip(expected) {
            if (got - want).abs() > tolerance {
                out.push((row.system.clone(), *col, got, want));
            }
        }
    }
    out
}

pub fn write_toy_csv(path: &Path, rows: &[ToyRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
