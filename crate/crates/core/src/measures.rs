//! Temporal information measures of a joint past/future description:
//! whole-minus-sum integration, MMI redundancy and synergy, and the change
//! in synergy when a system is replaced by its independent twin.
//!
//! Every function takes an [`InfoSource`] carrying a [`TemporalLayout`], so
//! the same code serves exact tables, plug-in estimates and Gaussian
//! covariances.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::info::{clamp_nonnegative, InfoSource, TemporalLayout};
use crate::system::{independent_twin, joint_past_future, DynamicalSystem};

fn layout_of<S: InfoSource + ?Sized>(src: &S) -> Result<&TemporalLayout> {
    src.layout()
        .ok_or_else(|| Error::Argument("distribution has no past/future split".into()))
}

fn element_check(layout: &TemporalLayout, element: usize) -> Result<()> {
    if element >= layout.element_count() {
        return Err(Error::Argument(format!(
            "element {element} out of range for {} elements",
            layout.element_count()
        )));
    }
    Ok(())
}

fn need_pair(layout: &TemporalLayout) -> Result<()> {
    if layout.element_count() < 2 {
        return Err(Error::Argument("measure requires at least two elements".into()));
    }
    Ok(())
}

/// `I(X_t; X_{t+1})` between the whole past and the whole future.
pub fn temporal_mi<S: InfoSource + ?Sized>(src: &S) -> Result<f64> {
    let l = layout_of(src)?;
    src.mi(&l.past, &l.future)
}

/// `I(X^i_t; X^i_{t+1})`: the element's own first-order autocorrelation.
pub fn self_mi<S: InfoSource + ?Sized>(src: &S, element: usize) -> Result<f64> {
    let l = layout_of(src)?;
    element_check(l, element)?;
    src.mi(&[l.past[element]], &[l.future[element]])
}

/// `I(X^i_t; X_{t+1})`: what one element's past tells about the joint future.
pub fn single_source_mi<S: InfoSource + ?Sized>(src: &S, element: usize) -> Result<f64> {
    let l = layout_of(src)?;
    element_check(l, element)?;
    src.mi(&[l.past[element]], &l.future)
}

/// Whole-minus-sum integrated information. Not clamped: negative values
/// flag redundancy-dominated systems.
pub fn phi_wms<S: InfoSource + ?Sized>(src: &S) -> Result<f64> {
    let l = layout_of(src)?;
    let whole = temporal_mi(src)?;
    let parts = (0..l.element_count())
        .map(|i| self_mi(src, i))
        .sum::<Result<f64>>()?;
    Ok(whole - parts)
}

/// Minimum over all ordered element pairs `(i, j)`, self-pairs included, of
/// `I(X^i_t; X^j_{t+1})`.
pub fn redundancy_mmi<S: InfoSource + ?Sized>(src: &S) -> Result<f64> {
    let l = layout_of(src)?;
    need_pair(l)?;
    let mut min = f64::INFINITY;
    for &p in &l.past {
        for &f in &l.future {
            min = min.min(src.mi(&[p], &[f])?);
        }
    }
    Ok(min)
}

/// Index of the largest entry; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

/// Temporal MI minus the largest single-source MI.
pub fn synergy_mmi<S: InfoSource + ?Sized>(src: &S) -> Result<f64> {
    let l = layout_of(src)?;
    need_pair(l)?;
    let sources = (0..l.element_count())
        .map(|i| single_source_mi(src, i))
        .collect::<Result<Vec<_>>>()?;
    let best = sources[argmax(&sources)];
    clamp_nonnegative(temporal_mi(src)? - best, src.clamp_tolerance(), "MMI synergy")
}

/// All headline quantities for one system or estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureBundle {
    pub temporal_mi: f64,
    pub phi_wms: f64,
    pub redundancy_mmi: f64,
    pub synergy_mmi: f64,
    /// `I(X^i_t; X_{t+1})` per element.
    pub single_source_mi: Vec<f64>,
    /// `I(X^i_t; X^i_{t+1})` per element.
    pub self_mi: Vec<f64>,
    /// Zero-based index of the most informative single source.
    pub argmax_source: usize,
}

/// Computes every field of a [`MeasureBundle`] in one pass.
pub fn measure_bundle<S: InfoSource + ?Sized>(src: &S) -> Result<MeasureBundle> {
    let l = layout_of(src)?;
    need_pair(l)?;
    let n = l.element_count();
    let tmi = temporal_mi(src)?;
    let single_source_mi = (0..n)
        .map(|i| src.mi(&[l.past[i]], &l.future))
        .collect::<Result<Vec<_>>>()?;
    let self_mi = (0..n)
        .map(|i| src.mi(&[l.past[i]], &[l.future[i]]))
        .collect::<Result<Vec<_>>>()?;
    let mut redundancy = f64::INFINITY;
    for (i, &p) in l.past.iter().enumerate() {
        for (j, &f) in l.future.iter().enumerate() {
            let v = if i == j { self_mi[i] } else { src.mi(&[p], &[f])? };
            redundancy = redundancy.min(v);
        }
    }
    let argmax_source = argmax(&single_source_mi);
    let synergy = clamp_nonnegative(
        tmi - single_source_mi[argmax_source],
        src.clamp_tolerance(),
        "MMI synergy",
    )?;
    Ok(MeasureBundle {
        temporal_mi: tmi,
        phi_wms: tmi - self_mi.iter().sum::<f64>(),
        redundancy_mmi: redundancy,
        synergy_mmi: synergy,
        single_source_mi,
        self_mi,
        argmax_source,
    })
}

impl MeasureBundle {
    pub fn element_count(&self) -> usize {
        self.self_mi.len()
    }

    /// Field-wise arithmetic mean; `argmax_source` is the modal index
    /// (lowest on ties). All bundles must have the same element count.
    pub fn average(bundles: &[MeasureBundle]) -> Result<MeasureBundle> {
        let first = bundles
            .first()
            .ok_or_else(|| Error::Argument("cannot average zero bundles".into()))?;
        let n = first.element_count();
        if bundles.iter().any(|b| b.element_count() != n) {
            return Err(Error::Argument("bundles differ in element count".into()));
        }
        let k = bundles.len() as f64;
        let mean = |f: &dyn Fn(&MeasureBundle) -> f64| bundles.iter().map(f).sum::<f64>() / k;
        let mean_vec = |f: &dyn Fn(&MeasureBundle) -> &Vec<f64>| {
            (0..n)
                .map(|i| bundles.iter().map(|b| f(b)[i]).sum::<f64>() / k)
                .collect::<Vec<_>>()
        };
        let mut votes = vec![0usize; n];
        for b in bundles {
            votes[b.argmax_source] += 1;
        }
        let modal = votes
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > votes[best] { i } else { best });
        Ok(MeasureBundle {
            temporal_mi: mean(&|b| b.temporal_mi),
            phi_wms: mean(&|b| b.phi_wms),
            redundancy_mmi: mean(&|b| b.redundancy_mmi),
            synergy_mmi: mean(&|b| b.synergy_mmi),
            single_source_mi: mean_vec(&|b| &b.single_source_mi),
            self_mi: mean_vec(&|b| &b.self_mi),
            argmax_source: modal,
        })
    }

    /// Flat `(name, value)` view with the fixed external field names
    /// `tmi, phi_wms, red_mmi, syn_mmi, src_mi_1..n, self_mi_1..n,
    /// argmax_source`. Element numbering, including `argmax_source`, is
    /// one-based.
    pub fn fields(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("tmi".to_string(), self.temporal_mi),
            ("phi_wms".to_string(), self.phi_wms),
            ("red_mmi".to_string(), self.redundancy_mmi),
            ("syn_mmi".to_string(), self.synergy_mmi),
        ];
        for (i, v) in self.single_source_mi.iter().enumerate() {
            out.push((format!("src_mi_{}", i + 1), *v));
        }
        for (i, v) in self.self_mi.iter().enumerate() {
            out.push((format!("self_mi_{}", i + 1), *v));
        }
        out.push(("argmax_source".to_string(), (self.argmax_source + 1) as f64));
        out
    }

    /// Column names matching [`fields`](Self::fields) for `n` elements.
    pub fn field_names(n: usize) -> Vec<String> {
        let mut out: Vec<String> = ["tmi", "phi_wms", "red_mmi", "syn_mmi"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        out.extend((1..=n).map(|i| format!("src_mi_{i}")));
        out.extend((1..=n).map(|i| format!("self_mi_{i}")));
        out.push("argmax_source".into());
        out
    }

    fn from_map(map: &BTreeMap<String, f64>) -> std::result::Result<Self, String> {
        let get = |k: &str| map.get(k).copied().ok_or_else(|| format!("missing field `{k}`"));
        let collect = |prefix: &str| {
            let mut out = Vec::new();
            while let Some(v) = map.get(&format!("{prefix}{}", out.len() + 1)) {
                out.push(*v);
            }
            out
        };
        let single_source_mi = collect("src_mi_");
        let self_mi = collect("self_mi_");
        if single_source_mi.len() != self_mi.len() || self_mi.is_empty() {
            return Err("src_mi_* and self_mi_* fields disagree".into());
        }
        let argmax = get("argmax_source")?;
        if argmax.fract() != 0.0 || argmax < 1.0 || argmax as usize > self_mi.len() {
            return Err(format!("invalid argmax_source {argmax}"));
        }
        Ok(MeasureBundle {
            temporal_mi: get("tmi")?,
            phi_wms: get("phi_wms")?,
            redundancy_mmi: get("red_mmi")?,
            synergy_mmi: get("syn_mmi")?,
            single_source_mi,
            self_mi,
            argmax_source: argmax as usize - 1,
        })
    }
}

impl Serialize for MeasureBundle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let fields = self.fields();
        let mut map = serializer.serialize_map(Some(fields.len()))?;
        for (k, v) in &fields {
            if k == "argmax_source" {
                map.serialize_entry(k, &(*v as u64))?;
            } else {
                map.serialize_entry(k, v)?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MeasureBundle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(deserializer)?;
        MeasureBundle::from_map(&map).map_err(D::Error::custom)
    }
}

/// `I_Syn(twin) − I_Syn(original)` with both evaluated on exact tables.
pub fn delta_synergy(sys: &DynamicalSystem) -> Result<f64> {
    if sys.element_count() < 2 {
        return Err(Error::Argument("measure requires at least two elements".into()));
    }
    let twin = independent_twin(sys)?;
    Ok(synergy_mmi(&joint_past_future(&twin))? - synergy_mmi(&joint_past_future(sys))?)
}

/// Result of [`delta_synergy_closed_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormDelta {
    /// `I(X¹_t; X²_t) − I(X¹_t; X_{t+1} | X²_t)` in bits.
    pub value: f64,
    /// Zero-based element treated as `X¹` (the single-source argmax).
    pub primary_element: usize,
}

/// Pairwise-MI diagnostic for the change in synergy of a two-element
/// system, computed on the original system only. Elements are relabelled
/// so that `X¹` is the most informative single source.
pub fn delta_synergy_closed_form<S: InfoSource + ?Sized>(src: &S) -> Result<ClosedFormDelta> {
    let l = layout_of(src)?;
    if l.element_count() != 2 {
        return Err(Error::Argument(format!(
            "closed form needs exactly two elements, got {}",
            l.element_count()
        )));
    }
    let sources = [single_source_mi(src, 0)?, single_source_mi(src, 1)?];
    let primary = argmax(&sources);
    let other = 1 - primary;
    let (p1, p2) = (l.past[primary], l.past[other]);
    let pairwise = src.mi(&[p1], &[p2])?;
    let conditional = src.cmi(&[p1], &l.future, &[p2])?;
    Ok(ClosedFormDelta {
        value: pairwise - conditional,
        primary_element: primary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{DiscreteDistribution, Variable};
    use crate::system::{make_system_x, make_system_y, DynamicalSystem, TransitionModel};

    const TOL: f64 = 1e-9;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < TOL
    }

    /// Both elements copy a shared persistent bit: states (0,0) and (1,1)
    /// each persist, inputs uniform on those two states.
    fn duplicated_persistent_bit() -> DynamicalSystem {
        let mut rows = vec![vec![0.0; 4]; 4];
        rows[0][0] = 1.0;
        rows[3][3] = 1.0;
        rows[1][0] = 1.0;
        rows[2][3] = 1.0;
        DynamicalSystem::with_input_probs(
            TransitionModel::new(vec![2, 2], rows).unwrap(),
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap()
    }

    fn memoryless_coins() -> DynamicalSystem {
        DynamicalSystem::with_uniform_input(
            TransitionModel::new(vec![2, 2], vec![vec![0.25; 4]; 4]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn toy_values() {
        let x = measure_bundle(&joint_past_future(&make_system_x())).unwrap();
        assert!(close(x.temporal_mi, 2.0) && close(x.phi_wms, 0.0));
        assert!(close(x.redundancy_mmi, 0.0) && close(x.synergy_mmi, 1.0));
        assert!(close(x.single_source_mi[0], 1.0));

        let y = measure_bundle(&joint_past_future(&make_system_y())).unwrap();
        assert!(close(y.temporal_mi, 1.0) && close(y.phi_wms, 1.0));
        assert!(close(y.redundancy_mmi, 0.0) && close(y.synergy_mmi, 1.0));
        assert!(close(y.single_source_mi[0], 0.0) && close(y.single_source_mi[1], 0.0));
    }

    #[test]
    fn x_self_information_is_one_bit() {
        let j = joint_past_future(&make_system_x());
        assert!(close(j.mutual_information(&["x1_t"], &["x1_t+1"]).unwrap(), 1.0));
    }

    #[test]
    fn copy_system_has_negative_phi_and_full_redundancy() {
        let j = joint_past_future(&duplicated_persistent_bit());
        assert!(close(phi_wms(&j).unwrap(), -1.0));
        assert!(close(redundancy_mmi(&j).unwrap(), 1.0));
    }

    #[test]
    fn memoryless_coins_have_no_synergy() {
        let j = joint_past_future(&memoryless_coins());
        assert_eq!(synergy_mmi(&j).unwrap(), 0.0);
        assert_eq!(temporal_mi(&j).unwrap(), 0.0);
        let cf = delta_synergy_closed_form(&j).unwrap();
        assert!(close(cf.value, 0.0));
    }

    #[test]
    fn twin_of_y_is_empty() {
        let t = joint_past_future(&independent_twin(&make_system_y()).unwrap());
        assert!(close(temporal_mi(&t).unwrap(), 0.0));
        assert!(close(single_source_mi(&t, 0).unwrap(), 0.0));
        assert!(close(single_source_mi(&t, 1).unwrap(), 0.0));
    }

    #[test]
    fn delta_synergy_on_toys() {
        assert!(close(delta_synergy(&make_system_x()).unwrap(), 0.0));
        assert!(close(delta_synergy(&make_system_y()).unwrap(), -1.0));
        let y = delta_synergy_closed_form(&joint_past_future(&make_system_y())).unwrap();
        assert!(close(y.value, -1.0));
        assert_eq!(y.primary_element, 0);
        // Literal evaluation on X: the pairwise term is 0 under uniform input,
        // while given X2_t the element X1_t still fixes X1_{t+1}, so the
        // conditional term is a full bit. The diagnostic therefore differs
        // from delta_synergy(X) = 0.
        let x = delta_synergy_closed_form(&joint_past_future(&make_system_x())).unwrap();
        assert!(close(x.value, -1.0), "{}", x.value);
    }

    #[test]
    fn errors() {
        let plain = DiscreteDistribution::uniform(vec![Variable::new("a", 2), Variable::new("b", 2)]).unwrap();
        assert!(matches!(temporal_mi(&plain), Err(Error::Argument(_))));

        let single = DynamicalSystem::with_uniform_input(
            TransitionModel::new(vec![2], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
        )
        .unwrap();
        let j = joint_past_future(&single);
        assert!(matches!(redundancy_mmi(&j), Err(Error::Argument(_))));
        assert!(matches!(synergy_mmi(&j), Err(Error::Argument(_))));
        assert!(matches!(single_source_mi(&j, 1), Err(Error::Argument(_))));
        assert!(delta_synergy(&single).is_err());
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[1.0, 1.0, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 1.0, 1.0]), 1);
    }

    #[test]
    fn serialization_uses_fixed_names() {
        let b = measure_bundle(&joint_past_future(&make_system_y())).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        let keys = MeasureBundle::field_names(2);
        let positions: Vec<usize> = keys
            .iter()
            .map(|k| text.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["argmax_source"], 1);
        let back: MeasureBundle = serde_json::from_value(v).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn average_uses_modal_argmax() {
        let mk = |v: f64, a: usize| MeasureBundle {
            temporal_mi: v,
            phi_wms: v,
            redundancy_mmi: v,
            synergy_mmi: v,
            single_source_mi: vec![v, 2.0 * v],
            self_mi: vec![v, v],
            argmax_source: a,
        };
        let avg = MeasureBundle::average(&[mk(1.0, 1), mk(2.0, 0), mk(3.0, 1)]).unwrap();
        assert_eq!(avg.temporal_mi, 2.0);
        assert_eq!(avg.single_source_mi, vec![2.0, 4.0]);
        assert_eq!(avg.argmax_source, 1);
        assert!(MeasureBundle::average(&[]).is_err());
    }
}
