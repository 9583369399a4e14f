//! Pairwise empirical analysis of a multichannel recording: original and
//! circular-shift surrogate bundles, functional connectivity, and the
//! correlations between their changes across pairs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::estimator::{Estimator, PairData};
use crate::measures::MeasureBundle;
use crate::series::TimeSeriesMatrix;
use crate::surrogates::{surrogate_average, SurrogateConfig};

/// Smallest p-value ever reported.
pub const P_VALUE_FLOOR: f64 = 1e-300;

/// Reads a CSV with a header row of channel names and one numeric row per
/// sample.
pub fn load_csv(path: &Path) -> Result<TimeSeriesMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(|n| n.is_empty()) {
        return Err(Error::Parse {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let mut channels = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column `{}`: `{field}` is not a number", names[col]),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column `{}`: non-finite value `{field}`", names[col]),
                });
            }
            channels[col].push(value);
        }
    }
    if channels[0].is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    let ts = TimeSeriesMatrix::new(names, channels)?;
    ts.validate_for_analysis()?;
    Ok(ts)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse {
            line: p.line() as usize,
            message: e.to_string(),
        },
        None => Error::io(path, e),
    }
}

/// Writes a recording in the format [`load_csv`] reads. Values use the
/// shortest representation that round-trips exactly.
pub fn write_csv(ts: &TimeSeriesMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(ts.channel_names()).map_err(|e| Error::io(path, e))?;
    let mut row = Vec::with_capacity(ts.channel_count());
    for t in 0..ts.sample_count() {
        row.clear();
        row.extend(ts.channels().iter().map(|c| c[t].to_string()));
        w.write_record(&row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Number of unordered pairs among `n` channels.
pub fn pair_budget(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `k` distinct unordered pairs `(i, j)` with `i < j`, sampled uniformly
/// without replacement and returned in lexicographic order.
pub fn sample_pairs(n: usize, k: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let budget = pair_budget(n);
    if k > budget {
        return Err(Error::Argument(format!(
            "{k} pairs requested but {n} channels only give {budget}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut linear = rand::seq::index::sample(&mut rng, budget, k).into_vec();
    linear.sort_unstable();
    Ok(linear.into_iter().map(|l| unrank_pair(n, l)).collect())
}

/// Inverse of the lexicographic ranking of pairs `(i, j)`, `i < j`.
fn unrank_pair(n: usize, mut l: usize) -> (usize, usize) {
    let mut i = 0;
    while l >= n - 1 - i {
        l -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + l)
}

/// Which functional-connectivity column the summary correlations use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FcField {
    FcMi,
    FcPearson,
}

impl FcField {
    pub fn name(self) -> &'static str {
        match self {
            FcField::FcMi => "fc_mi",
            FcField::FcPearson => "fc_pearson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub estimator: Estimator,
    pub lag: usize,
    pub surrogates: SurrogateConfig,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    pub fc: FcField,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::Gaussian,
            lag: 1,
            surrogates: SurrogateConfig::default(),
            jobs: 0,
            fc: FcField::FcMi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    /// Zero-based column indices.
    pub pair: (usize, usize),
    pub channels: (String, String),
    pub original: MeasureBundle,
    pub surrogate: MeasureBundle,
    pub delta_syn: f64,
    pub delta_tmi: f64,
    pub fc_pearson: f64,
    pub fc_mi: f64,
    pub estimator_tag: String,
}

impl PairMetrics {
    fn field(&self, name: &str) -> f64 {
        match name {
            "delta_syn" => self.delta_syn,
            "delta_tmi" => self.delta_tmi,
            "fc_mi" => self.fc_mi,
            "fc_pearson" => self.fc_pearson,
            "phi_wms" => self.original.phi_wms,
            _ => unreachable!("unknown field {name}"),
        }
    }
}

/// A pair the estimator could not handle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFailure {
    pub pair: (usize, usize),
    pub channels: (String, String),
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairOutcome {
    Ok(PairMetrics),
    Failed(PairFailure),
}

impl PairOutcome {
    pub fn metrics(&self) -> Option<&PairMetrics> {
        match self {
            PairOutcome::Ok(m) => Some(m),
            PairOutcome::Failed(_) => None,
        }
    }
}

/// Stable identifier of a pair, independent of which other pairs are
/// analysed; keys the surrogate offsets.
fn pair_id(n: usize, (i, j): (usize, usize)) -> u64 {
    (i * n + j) as u64
}

/// Original and surrogate-averaged bundles, deltas and FC for one pair.
pub fn analyze_pair(
    ts: &TimeSeriesMatrix,
    pair: (usize, usize),
    cfg: &AnalysisConfig,
) -> Result<PairMetrics> {
    let (i, j) = pair;
    let n = ts.channel_count();
    if i >= n || j >= n || i == j {
        return Err(Error::Argument(format!("invalid pair ({i}, {j}) for {n} channels")));
    }
    let names = ts.channel_names();
    let (x, y) = (ts.channel(i), ts.channel(j));
    let data = PairData::prepare(x, y, [&names[i], &names[j]], cfg.estimator)?;
    let original = data.bundle(cfg.lag)?;
    let surrogate = surrogate_average(&data, &cfg.surrogates, cfg.lag, pair_id(n, pair))?;
    Ok(PairMetrics {
        pair,
        channels: (names[i].clone(), names[j].clone()),
        delta_syn: surrogate.synergy_mmi - original.synergy_mmi,
        delta_tmi: surrogate.temporal_mi - original.temporal_mi,
        fc_pearson: pearson_r(x, y)?.0,
        fc_mi: data.zero_lag_mi()?,
        estimator_tag: cfg.estimator.to_string(),
        original,
        surrogate,
    })
}

/// Sample Pearson correlation and its two-sided p-value under the
/// t-distribution with `n − 2` degrees of freedom.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Length(format!("{} vs {} values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Argument(format!("correlation needs at least 3 values, got {n}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Argument("correlation of a constant sequence".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t2 = r * r * df / (1.0 - r * r);
        beta_reg(df / 2.0, 0.5, df / (df + t2))
    };
    Ok((r, p.clamp(P_VALUE_FLOOR, 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub x: String,
    pub y: String,
    /// `None` when fewer than three pairs succeeded or a column is constant.
    pub r: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub pair_count: usize,
    pub failed_pairs: usize,
    pub fraction_tmi_increase: f64,
    pub correlations: Vec<Correlation>,
}

impl RunSummary {
    pub fn correlation(&self, x: &str, y: &str) -> Option<&Correlation> {
        self.correlations.iter().find(|c| c.x == x && c.y == y)
    }
}

/// Summary over the successful pairs of `outcomes`.
pub fn summarize(outcomes: &[PairOutcome], fc: FcField) -> Result<RunSummary> {
    let ok: Vec<&PairMetrics> = outcomes.iter().filter_map(PairOutcome::metrics).collect();
    if ok.is_empty() {
        return Err(Error::AllPairsFailed(outcomes.len()));
    }
    let panels = [
        ("delta_tmi", "delta_syn"),
        (fc.name(), "delta_syn"),
        (fc.name(), "delta_tmi"),
        ("phi_wms", "delta_syn"),
    ];
    let correlations = panels
        .iter()
        .map(|&(x, y)| {
            let xs: Vec<f64> = ok.iter().map(|m| m.field(x)).collect();
            let ys: Vec<f64> = ok.iter().map(|m| m.field(y)).collect();
            let (r, p) = pearson_r(&xs, &ys).ok().unzip();
            Correlation {
                x: x.into(),
                y: y.into(),
                r,
                p,
            }
        })
        .collect();
    Ok(RunSummary {
        pair_count: ok.len(),
        failed_pairs: outcomes.len() - ok.len(),
        fraction_tmi_increase: ok.iter().filter(|m| m.delta_tmi > 0.0).count() as f64
            / ok.len() as f64,
        correlations,
    })
}

/// Analyses the given pairs in parallel. Results keep the input order, so
/// output is independent of the worker count.
pub fn run_analysis_pairs(
    ts: &TimeSeriesMatrix,
    pairs: &[(usize, usize)],
    cfg: &AnalysisConfig,
) -> Result<(Vec<PairOutcome>, RunSummary)> {
    ts.validate_for_analysis()?;
    let n = ts.channel_count();
    if pairs.is_empty() {
        return Err(Error::Argument("no pairs to analyse".into()));
    }
    if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= n || j >= n || i == j) {
        return Err(Error::Argument(format!("invalid pair ({i}, {j}) for {n} channels")));
    }
    cfg.surrogates.shift_range(ts.sample_count())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
    let names = ts.channel_names();
    let outcomes: Vec<PairOutcome> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&pair| match analyze_pair(ts, pair, cfg) {
                Ok(m) => PairOutcome::Ok(m),
                Err(e) => PairOutcome::Failed(PairFailure {
                    pair,
                    channels: (names[pair.0].clone(), names[pair.1].clone()),
                    error: e.to_string(),
                }),
            })
            .collect()
    });
    let summary = summarize(&outcomes, cfg.fc)?;
    Ok((outcomes, summary))
}

/// Samples `k` pairs with `seed`, then runs [`run_analysis_pairs`].
pub fn run_analysis(
    ts: &TimeSeriesMatrix,
    k: usize,
    cfg: &AnalysisConfig,
    seed: u64,
) -> Result<(Vec<PairOutcome>, RunSummary)> {
    let pairs = sample_pairs(ts.channel_count(), k, seed)?;
    run_analysis_pairs(ts, &pairs, cfg)
}

/// Reads pairs of channel names, one `name_a,name_b` per line; blank lines
/// and `#` comments are skipped.
pub fn read_pair_file(path: &Path, ts: &TimeSeriesMatrix) -> Result<Vec<(usize, usize)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: k + 1, message };
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| parse_err("expected `name_a,name_b`".into()))?;
        let idx = |name: &str| {
            ts.index_of(name.trim())
                .map_err(|_| parse_err(format!("unknown channel `{}`", name.trim())))
        };
        pairs.push((idx(a)?, idx(b)?));
    }
    Ok(pairs)
}

/// Writes a pair list in the format [`read_pair_file`] reads.
pub fn write_pair_file(path: &Path, ts: &TimeSeriesMatrix, pairs: &[(usize, usize)]) -> Result<()> {
    let names = ts.channel_names();
    let text: String = pairs
        .iter()
        .map(|&(i, j)| format!("{},{}\n", names[i], names[j]))
        .collect();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Path of the flat CSV written next to a JSON-lines results file.
pub fn csv_mirror_path(results: &Path) -> PathBuf {
    let candidate = results.with_extension("csv");
    if candidate == results {
        let mut s = results.as_os_str().to_owned();
        s.push(".csv");
        PathBuf::from(s)
    } else {
        candidate
    }
}

/// One JSON object per pair, then the summary object on the last line;
/// plus a flat CSV mirror with one row per pair.
pub fn write_results(path: &Path, outcomes: &[PairOutcome], summary: &RunSummary) -> Result<()> {
    let io = |e: std::io::Error| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for o in outcomes {
        let line = serde_json::to_string(o).expect("pair records serialize");
        writeln!(w, "{line}").map_err(io)?;
    }
    let line = serde_json::to_string(summary).expect("summary serializes");
    writeln!(w, "{line}").map_err(io)?;
    w.flush().map_err(io)?;
    write_results_csv(&csv_mirror_path(path), outcomes)
}

fn write_results_csv(path: &Path, outcomes: &[PairOutcome]) -> Result<()> {
    let element_count = outcomes
        .iter()
        .filter_map(PairOutcome::metrics)
        .map(|m| m.original.element_count())
        .next()
        .unwrap_or(2);
    let bundle_cols = MeasureBundle::field_names(element_count);
    let mut header: Vec<String> = ["i", "j", "channel_i", "channel_j", "status", "estimator_tag"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(bundle_cols.iter().map(|c| format!("orig_{c}")));
    header.extend(bundle_cols.iter().map(|c| format!("surr_{c}")));
    header.extend(
        ["delta_syn", "delta_tmi", "fc_pearson", "fc_mi", "error"]
            .iter()
            .map(|s| s.to_string()),
    );
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(&header).map_err(|e| Error::io(path, e))?;
    for o in outcomes {
        let row: Vec<String> = match o {
            PairOutcome::Ok(m) => {
                let mut row = vec![
                    m.pair.0.to_string(),
                    m.pair.1.to_string(),
                    m.channels.0.clone(),
                    m.channels.1.clone(),
                    "ok".into(),
                    m.estimator_tag.clone(),
                ];
                row.extend(m.original.fields().iter().map(|(_, v)| v.to_string()));
                row.extend(m.surrogate.fields().iter().map(|(_, v)| v.to_string()));
                row.extend([m.delta_syn, m.delta_tmi, m.fc_pearson, m.fc_mi].map(|v| v.to_string()));
                row.push(String::new());
                row
            }
            PairOutcome::Failed(f) => {
                let mut row = vec![
                    f.pair.0.to_string(),
                    f.pair.1.to_string(),
                    f.channels.0.clone(),
                    f.channels.1.clone(),
                    "failed".into(),
                    String::new(),
                ];
                row.extend(std::iter::repeat_n(String::new(), 2 * bundle_cols.len() + 4));
                row.push(f.error.clone());
                row
            }
        };
        w.write_record(&row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_three_columns() {
        let mut text = String::from("a,b,c\n");
        for t in 0..100 {
            text += &format!("{},{},{}\n", t, (t * 7) % 11, (t as f64).sin());
        }
        let f = write_temp(&text);
        let ts = load_csv(f.path()).unwrap();
        assert_eq!((ts.channel_count(), ts.sample_count()), (3, 100));
        assert_eq!(ts.channel(1)[3], 10.0);
    }

    #[test]
    fn constant_column_is_named() {
        let mut text = String::from("a,flat\n");
        for t in 0..40 {
            text += &format!("{t},5\n");
        }
        let f = write_temp(&text);
        assert_eq!(load_csv(f.path()), Err(Error::DegenerateChannel("flat".into())));
    }

    #[test]
    fn nan_token_reports_line() {
        let mut text = String::from("a,b\n");
        for t in 0..40 {
            if t == 5 {
                text += "1,NaN\n";
            } else {
                text += &format!("{t},{}\n", t * t);
            }
        }
        let f = write_temp(&text);
        match load_csv(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        let g = write_temp("a,b\n1,2\n3,x\n");
        assert!(matches!(load_csv(g.path()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_csv(Path::new("/definitely/not/here.csv")).unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.csv"), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let ts = TimeSeriesMatrix::new(
            vec!["u".into(), "v".into()],
            vec![
                (0..40).map(|i| i as f64 * 0.1).collect(),
                (0..40).map(|i| (i as f64).exp().recip()).collect(),
            ],
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(&ts, f.path()).unwrap();
        assert_eq!(load_csv(f.path()).unwrap(), ts);
    }

    #[test]
    fn pair_sampling() {
        assert_eq!(sample_pairs(3, 3, 1).unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(sample_pairs(10, 7, 5).unwrap(), sample_pairs(10, 7, 5).unwrap());
        assert!(sample_pairs(4, 7, 0).is_err());
        let pairs = sample_pairs(100, 1000, 3).unwrap();
        let mut dedup = pairs.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 1000);
        assert!(pairs.iter().all(|&(i, j)| i < j && j < 100));
    }

    #[test]
    fn unranking_enumerates_lexicographically() {
        let n = 6;
        let all: Vec<_> = (0..pair_budget(n)).map(|l| unrank_pair(n, l)).collect();
        let expected: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn pearson_examples() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.01).collect();
        let (r, p) = pearson_r(&x, &x).unwrap();
        assert!((r - 1.0).abs() < 1e-12 && p == P_VALUE_FLOOR);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap().0 + 1.0).abs() < 1e-12);
        assert!(pearson_r(&x, &vec![1.0; 50]).is_err());
        assert!(pearson_r(&[1.0, 2.0], &[2.0, 1.0]).is_err());
    }

    #[test]
    fn pearson_p_matches_closed_form_t2() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        let (r, p) = pearson_r(&x, &y).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        // with 2 degrees of freedom the t CDF is elementary:
        // two-sided p = 1 − t / sqrt(2 + t²)
        let t = r * (2.0f64 / (1.0 - r * r)).sqrt();
        let closed = 1.0 - t / (2.0 + t * t).sqrt();
        assert!((p - closed).abs() < 1e-12, "{p} vs {closed}");
    }

    #[test]
    fn null_correlations_are_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ok = 0;
        for _ in 0..100 {
            let x: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
            let (r, p) = pearson_r(&x, &y).unwrap();
            if r.abs() < 0.04 && p > 0.001 {
                ok += 1;
            }
        }
        assert!(ok >= 99, "{ok}");
    }

    #[test]
    fn csv_mirror_path_differs() {
        assert_eq!(csv_mirror_path(Path::new("out/r.jsonl")), PathBuf::from("out/r.csv"));
        assert_eq!(csv_mirror_path(Path::new("r.csv")), PathBuf::from("r.csv.csv"));
    }
}
