use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use phiid::estimator::{Estimator, PairData};
use phiid::measures::measure_bundle;
use phiid::pipeline::{
    analyze_pair, read_pair_file, run_analysis, run_analysis_pairs, write_pair_file, write_results,
    AnalysisConfig, PairOutcome,
};
use phiid::series::TimeSeriesMatrix;
use phiid::surrogates::{surrogate_average, SurrogateConfig};
use phiid::synthetic::{ar_grid, trajectory_matrix};
use phiid::system::{joint_past_future, random_system, DynamicalSystem};

fn noise(t: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..t).map(|_| rng.sample(StandardNormal)).collect()
}

fn config(estimator: Estimator, perms: usize) -> AnalysisConfig {
    AnalysisConfig {
        estimator,
        surrogates: SurrogateConfig {
            n_permutations: perms,
            master_seed: 1,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn identical_copies_fail_as_a_record() {
    let x = noise(500, 1);
    let ts = TimeSeriesMatrix::new(vec!["a".into(), "b".into(), "c".into()], vec![x.clone(), x, noise(500, 2)]).unwrap();
    let (outcomes, summary) = run_analysis_pairs(&ts, &[(0, 1), (0, 2)], &config(Estimator::Gaussian, 5)).unwrap();
    assert!(matches!(&outcomes[0], PairOutcome::Failed(f) if f.error.contains("degenerate")));
    assert!(matches!(outcomes[1], PairOutcome::Ok(_)));
    assert_eq!((summary.pair_count, summary.failed_pairs), (1, 1));
}

#[test]
fn iid_noise_has_nothing_to_measure() {
    let ts = TimeSeriesMatrix::from_channels(vec![noise(20_000, 3), noise(20_000, 4)]).unwrap();
    for est in [Estimator::Gaussian, Estimator::Discrete { bins: 3 }] {
        let m = analyze_pair(&ts, (0, 1), &config(est, 10)).unwrap();
        for v in [m.original.temporal_mi, m.original.synergy_mmi, m.fc_mi] {
            assert!(v.abs() < 0.005, "{est}: {v}");
        }
        assert!(m.delta_syn.abs() < 0.005, "{est}: {}", m.delta_syn);
    }
}

#[test]
fn independent_channels_surrogate_matches_original() {
    let ts = TimeSeriesMatrix::from_channels(vec![ar1(0.8, 20_000, 8), ar1(0.5, 20_000, 9)]).unwrap();
    let m = analyze_pair(&ts, (0, 1), &config(Estimator::Gaussian, 20)).unwrap();
    for ((k, o), (_, s)) in m.original.fields().iter().zip(m.surrogate.fields()) {
        if k != "argmax_source" {
            assert!((o - s).abs() < 0.01, "{k}: {o} vs {s}");
        }
    }
}

fn ar1(phi: f64, t: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = 0.0;
    (0..t)
        .map(|_| {
            let e: f64 = rng.sample(StandardNormal);
            s = phi * s + e;
            s
        })
        .collect()
}

#[test]
fn exact_copy_gains_temporal_information_when_shifted() {
    // With channel 2 = channel 1 the joint past carries no more than one
    // channel does, so TMI equals the self-information; shifting decouples
    // the copies and TMI approaches twice that.
    let a = ar1(0.9, 10_000, 5);
    let ts = TimeSeriesMatrix::from_channels(vec![a.clone(), a]).unwrap();
    let m = analyze_pair(&ts, (0, 1), &config(Estimator::Discrete { bins: 4 }, 20)).unwrap();
    assert!((m.original.temporal_mi - m.original.self_mi[0]).abs() < 1e-9);
    let ratio = m.surrogate.temporal_mi / m.original.temporal_mi;
    assert!((1.8..2.2).contains(&ratio), "{ratio}");
}

#[test]
fn lagged_driver_loses_temporal_information_when_shifted() {
    // channel 2 repeats channel 1 one step later: all temporal information
    // is cross-channel and the shift removes it
    let a = ar1(0.0, 10_000, 6);
    let mut b = vec![0.0; a.len()];
    b[1..].copy_from_slice(&a[..a.len() - 1]);
    b[0] = 0.123;
    let ts = TimeSeriesMatrix::from_channels(vec![a, b]).unwrap();
    let m = analyze_pair(&ts, (0, 1), &config(Estimator::Discrete { bins: 4 }, 20)).unwrap();
    assert!(m.original.temporal_mi > 1.9);
    assert!(m.surrogate.temporal_mi <= 0.5 * m.original.temporal_mi, "{m:?}");
}

#[test]
fn surrogate_phi_collapses_on_coupled_pairs() {
    let (ts, cells) = ar_grid(&[0.8, 0.9], &[0.8, 0.9], 20_000, 2).unwrap();
    let cfg = config(Estimator::Gaussian, 20);
    for c in cells {
        let m = analyze_pair(&ts, c.pair, &cfg).unwrap();
        let limit = f64::max(0.05, 0.1 * m.original.phi_wms.abs());
        assert!(m.surrogate.phi_wms.abs() < limit, "{c:?}: {}", m.surrogate.phi_wms);
        assert!(m.delta_syn > 0.0, "{c:?}: {}", m.delta_syn);
    }
}

#[test]
fn permutation_count_reduces_spread() {
    let (ts, cells) = ar_grid(&[0.5], &[0.7], 4_000, 9).unwrap();
    let (i, j) = cells[0].pair;
    let data = PairData::prepare(ts.channel(i), ts.channel(j), ["a", "b"], Estimator::Gaussian).unwrap();
    let cfg = |n| SurrogateConfig {
        n_permutations: n,
        ..Default::default()
    };
    let single: Vec<f64> = (0..100)
        .map(|p| {
            let offsets = phiid::surrogates::surrogate_offsets(&cfg(1), ts.sample_count(), 0, p).unwrap();
            data.shifted(offsets).unwrap().bundle(1).unwrap().synergy_mmi
        })
        .collect();
    let mean = single.iter().sum::<f64>() / 100.0;
    let sd = (single.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
    let one = surrogate_average(&data, &cfg(1), 1, 0).unwrap().synergy_mmi;
    let hundred = surrogate_average(&data, &cfg(100), 1, 0).unwrap().synergy_mmi;
    assert!((hundred - mean).abs() < 1e-12);
    assert_ne!(one, hundred);
    // the single draw and the average lie within 3 standard errors of each
    // other, the error of the difference being dominated by the single draw
    assert!((one - hundred).abs() < 3.0 * sd * (1.0 + 1.0 / 100.0f64).sqrt(), "{one} {hundred} {sd}");
}

fn discrete_deviation(sys: &DynamicalSystem, t: usize, seed: u64) -> f64 {
    let exact = measure_bundle(&joint_past_future(sys)).unwrap();
    let ts = trajectory_matrix(sys, t, seed).unwrap();
    let data = PairData::prepare(ts.channel(0), ts.channel(1), ["x1", "x2"], Estimator::Discrete { bins: 2 }).unwrap();
    let est = data.bundle(1).unwrap();
    let mut devs: Vec<f64> = exact
        .fields()
        .iter()
        .zip(est.fields())
        .filter(|(a, _)| a.0 != "argmax_source")
        .map(|((_, a), (_, b))| (a - b).abs())
        .collect();
    devs.sort_by(f64::total_cmp);
    devs[devs.len() / 2]
}

#[test]
fn discrete_estimates_converge_with_length() {
    // median over seeds of the per-run median absolute deviation
    let sys = random_system(&[2, 2], 21, 1.0).unwrap().with_stationary_input().unwrap();
    let med = |t: usize| {
        let mut v: Vec<f64> = (0..15).map(|s| discrete_deviation(&sys, t, s)).collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (short, long) = (med(5_000), med(10_000));
    // doubling T nominally halves the deviation; a factor 2 slack either way
    // admits ratios in [1/4, 1]
    let ratio = long / short;
    assert!((0.25..=1.0).contains(&ratio), "{short} -> {long}");
}

#[test]
fn outputs_are_order_and_worker_independent() {
    let ts = TimeSeriesMatrix::from_channels((0..6).map(|s| noise(300, s)).collect()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for jobs in [1, 4] {
        let cfg = AnalysisConfig {
            jobs,
            ..config(Estimator::Gaussian, 7)
        };
        let (o, s) = run_analysis(&ts, 10, &cfg, 3).unwrap();
        let path = dir.path().join(format!("r{jobs}.jsonl"));
        write_results(&path, &o, &s).unwrap();
        files.push((std::fs::read(&path).unwrap(), std::fs::read(path.with_extension("csv")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].0.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    let parsed: Vec<PairOutcome> = lines[..10].iter().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(parsed.iter().all(|p| p.metrics().is_some()));
    let summary: serde_json::Value = serde_json::from_str(lines[10]).unwrap();
    assert_eq!(summary["correlations"].as_array().unwrap().len(), 4);
}

#[test]
fn null_input_gives_weak_correlations() {
    let ts = TimeSeriesMatrix::from_channels((0..16).map(|s| noise(2_000, 100 + s)).collect()).unwrap();
    let (_, s) = run_analysis(&ts, 60, &config(Estimator::Gaussian, 10), 0).unwrap();
    assert!((0.2..=0.8).contains(&s.fraction_tmi_increase), "{}", s.fraction_tmi_increase);
    for c in &s.correlations {
        let r = c.r.unwrap();
        if c.x != "delta_tmi" && c.x != "phi_wms" {
            assert!(r.abs() < 0.5, "{c:?}");
        }
    }
}

#[test]
fn pair_file_round_trip() {
    let (ts, cells) = ar_grid(&[0.1, 0.2], &[0.3], 40, 0).unwrap();
    let pairs: Vec<_> = cells.iter().map(|c| c.pair).collect();
    let f = tempfile::NamedTempFile::new().unwrap();
    write_pair_file(f.path(), &ts, &pairs).unwrap();
    assert_eq!(read_pair_file(f.path(), &ts).unwrap(), pairs);
    std::fs::write(f.path(), "r0.1_p0.3_a,nope\n").unwrap();
    assert!(read_pair_file(f.path(), &ts).is_err());
}
