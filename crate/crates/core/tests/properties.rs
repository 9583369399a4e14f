use nalgebra::DMatrix;
use proptest::prelude::*;

use phiid::info::{CovarianceModel, DiscreteDistribution, InfoSource, Variable};
use phiid::measures::{
    delta_synergy, measure_bundle, phi_wms, single_source_mi, synergy_mmi, temporal_mi, MeasureBundle,
};
use phiid::pipeline::sample_pairs;
use phiid::surrogates::circular_shift;
use phiid::system::{independent_twin, joint_past_future, random_system, DynamicalSystem};

const TOL: f64 = 1e-9;

fn system_strategy() -> impl Strategy<Value = DynamicalSystem> {
    (
        prop::sample::select(vec![vec![2, 2], vec![2, 3], vec![3, 2], vec![2, 2, 2]]),
        any::<u64>(),
        0.05f64..20.0,
        any::<bool>(),
    )
        .prop_map(|(cards, seed, conc, stationary)| {
            let sys = random_system(&cards, seed, conc).unwrap();
            if stationary {
                sys.with_stationary_input().unwrap()
            } else {
                sys
            }
        })
}

fn pair_system_strategy() -> impl Strategy<Value = DynamicalSystem> {
    (any::<u64>(), 0.05f64..20.0, any::<bool>()).prop_map(|(seed, conc, stationary)| {
        let sys = random_system(&[2, 2], seed, conc).unwrap();
        if stationary {
            sys.with_stationary_input().unwrap()
        } else {
            sys
        }
    })
}

fn cond_entropy(d: &DiscreteDistribution, target: &[usize], given: &[usize]) -> f64 {
    let all: Vec<usize> = target.iter().chain(given).copied().collect();
    d.entropy_idx(&all).unwrap() - if given.is_empty() { 0.0 } else { d.entropy_idx(given).unwrap() }
}

proptest! {
    #[test]
    fn mutual_information_is_symmetric_and_nonnegative(sys in system_strategy()) {
        let j = joint_past_future(&sys);
        let n = sys.element_count();
        for a in 0..2 * n {
            for b in 0..2 * n {
                if a == b { continue; }
                let ab = j.mi_idx(&[a], &[b]).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert!((ab - j.mi_idx(&[b], &[a]).unwrap()).abs() < TOL);
            }
        }
    }

    #[test]
    fn chain_rule(sys in system_strategy()) {
        let j = joint_past_future(&sys);
        let n = sys.element_count();
        let past: Vec<usize> = (0..n).collect();
        // I(X_t; X_{t+1}) = I(X¹_t; X_{t+1}) + I(X²..ⁿ_t; X_{t+1} | X¹_t)
        let future: Vec<usize> = (n..2 * n).collect();
        let whole = j.mi_idx(&past, &future).unwrap();
        let first = j.mi_idx(&[0], &future).unwrap();
        let rest = j.cmi_idx(&past[1..], &future, &[0]).unwrap();
        prop_assert!((whole - first - rest).abs() < TOL, "{} vs {}", whole, first + rest);
    }

    #[test]
    fn factorization_under_independence(sys in system_strategy()) {
        let twin = joint_past_future(&independent_twin(&sys).unwrap());
        let n = sys.element_count();
        let sum: f64 = (0..n).map(|i| single_source_mi(&twin, i).unwrap()).sum();
        prop_assert!((temporal_mi(&twin).unwrap() - sum).abs() < TOL);
    }

    #[test]
    fn synergy_entropy_and_conditional_forms(sys in pair_system_strategy()) {
        let j = joint_past_future(&sys);
        let b = measure_bundle(&j).unwrap();
        let (m, other) = (b.argmax_source, 1 - b.argmax_source);
        let future = [2, 3];
        let raw = b.temporal_mi - b.single_source_mi[m];
        let entropy_form = cond_entropy(&j, &future, &[m]) - cond_entropy(&j, &future, &[0, 1]);
        prop_assert!((raw - entropy_form).abs() < TOL);
        let cmi_form = j.cmi_idx(&[other], &future, &[m]).unwrap();
        prop_assert!((b.synergy_mmi - cmi_form).abs() < TOL);
    }

    #[test]
    fn twin_is_idempotent_and_unintegrated(sys in system_strategy()) {
        let twin = independent_twin(&sys).unwrap();
        let twice = independent_twin(&twin).unwrap();
        let tv = joint_past_future(&twin).total_variation(&joint_past_future(&twice)).unwrap();
        prop_assert!(tv < 1e-12);
        prop_assert!(phi_wms(&joint_past_future(&twin)).unwrap().abs() < TOL);
    }

    #[test]
    fn product_input_never_gains_synergy(seed in any::<u64>(), conc in 0.05f64..20.0) {
        let sys = random_system(&[2, 2], seed, conc).unwrap();
        prop_assert!(delta_synergy(&sys).unwrap() <= TOL);
    }

    #[test]
    fn bundle_orderings(sys in system_strategy()) {
        let b = measure_bundle(&joint_past_future(&sys)).unwrap();
        prop_assert!(b.synergy_mmi >= 0.0);
        let min_self = b.self_mi.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(b.redundancy_mmi <= min_self + TOL);
        for s in &b.single_source_mi {
            prop_assert!(*s <= b.temporal_mi + TOL);
        }
        prop_assert!((synergy_mmi(&joint_past_future(&sys)).unwrap() - b.synergy_mmi).abs() < TOL);
    }

    #[test]
    fn bundle_serialization_round_trips(sys in system_strategy()) {
        let b = measure_bundle(&joint_past_future(&sys)).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        let back: MeasureBundle = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, b);
    }

    #[test]
    fn shift_preserves_histogram_and_most_transitions(
        xs in prop::collection::vec(0usize..4, 2..300),
        frac in 0.0f64..1.0,
    ) {
        let t = xs.len();
        let offset = ((t as f64 * frac) as usize).min(t - 1);
        let ys = circular_shift(&xs, offset).unwrap();
        let hist = |v: &[usize]| (0..4).map(|k| v.iter().filter(|&&x| x == k).count()).collect::<Vec<_>>();
        prop_assert_eq!(hist(&xs), hist(&ys));
        let pairs = |v: &[usize]| {
            let mut c = vec![0i64; 16];
            for w in v.windows(2) { c[w[0] * 4 + w[1]] += 1; }
            c
        };
        let diff: i64 = pairs(&xs).iter().zip(pairs(&ys)).map(|(a, b)| (a - b).abs()).sum();
        // one transition lost at the seam, one gained: at most 2 cell changes
        prop_assert!(diff <= 2);
    }

    #[test]
    fn shifts_compose(xs in prop::collection::vec(any::<i32>(), 1..100), a in 0usize..1000, b in 0usize..1000) {
        let t = xs.len();
        let (a, b) = (a % t, b % t);
        let twice = circular_shift(&circular_shift(&xs, a).unwrap(), b).unwrap();
        prop_assert_eq!(twice, circular_shift(&xs, (a + b) % t).unwrap());
    }

    #[test]
    fn gaussian_cmi_matches_determinants(entries in prop::collection::vec(-1.0f64..1.0, 16)) {
        // A Aᵀ + I is symmetric positive definite and well conditioned
        let a = DMatrix::from_row_slice(4, 4, &entries);
        let m = &a * a.transpose() + DMatrix::identity(4, 4);
        let names: Vec<String> = (0..4).map(|i| format!("v{i}")).collect();
        let model = CovarianceModel::new(names, m.clone()).unwrap();
        let ld = |idx: &[usize]| {
            DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]).determinant().log2()
        };
        let expected = 0.5 * (ld(&[0, 3]) + ld(&[1, 2, 3]) - ld(&[3]) - ld(&[0, 1, 2, 3]));
        let got = model.cmi(&[0], &[1, 2], &[3]).unwrap();
        prop_assert!((got - expected).abs() < 1e-9, "{} vs {}", got, expected);
    }

    #[test]
    fn sampled_pairs_are_distinct(n in 2usize..40, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let budget = n * (n - 1) / 2;
        let k = (budget as f64 * frac) as usize;
        let pairs = sample_pairs(n, k, seed).unwrap();
        prop_assert_eq!(pairs.len(), k);
        prop_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(pairs.iter().all(|&(i, j)| i < j && j < n));
    }
}

#[test]
fn uniform_table_has_no_information() {
    let d = DiscreteDistribution::uniform(vec![Variable::new("a", 3), Variable::new("b", 2)]).unwrap();
    assert!(d.mutual_information(&["a"], &["b"]).unwrap().abs() < TOL);
}
