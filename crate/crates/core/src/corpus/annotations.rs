use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::table::FeatureTable;
use super::types::{AnnotationRecord, AnnotationValue, SplitType, ValueKind};
use super::CorpusError;

/// One stimulus-level feature value after pooling annotators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AggregatedValue {
    /// Fraction of annotators who marked the feature present.
    Proportion(f64),
    /// Modal spoke count.
    Count(u32),
    /// Modal split category.
    Category(SplitType),
}

/// stimulus id → feature name → pooled value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregatedFeatures {
    pub rows: BTreeMap<String, BTreeMap<String, AggregatedValue>>,
}

#[derive(Default)]
struct Tally {
    present: u64,
    total: u64,
    counts: BTreeMap<u32, u64>,
    splits: BTreeMap<SplitType, u64>,
}

/// Most frequent key; ties go to the smallest key in the map's order.
fn mode<K: Copy + Ord>(counts: &BTreeMap<K, u64>) -> Option<K> {
    let mut best: Option<(K, u64)> = None;
    for (&k, &n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((k, n));
        }
    }
    best.map(|(k, _)| k)
}

/// Pools annotator records per (stimulus, feature).
///
/// Presence features become the proportion of TRUE records, spoke counts
/// the modal count (ties toward fewer spokes), split type the modal
/// category (ties in the order none < single < split).
pub fn aggregate_annotations(records: &[AnnotationRecord]) -> Result<AggregatedFeatures, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let mut kinds: HashMap<&str, ValueKind> = HashMap::new();
    let mut tallies: BTreeMap<(&str, &str), Tally> = BTreeMap::new();
    for r in records {
        let kind = r.value.kind();
        if *kinds.entry(&r.feature_name).or_insert(kind) != kind {
            return Err(CorpusError::MixedValueKinds(r.feature_name.clone()));
        }
        let t = tallies
            .entry((r.stimulus_id.as_str(), r.feature_name.as_str()))
            .or_default();
        t.total += 1;
        match r.value {
            AnnotationValue::Presence(p) => t.present += u64::from(p),
            AnnotationValue::SpokeCount(n) => *t.counts.entry(n).or_default() += 1,
            AnnotationValue::Split(s) => *t.splits.entry(s).or_default() += 1,
        }
    }

    let mut out = AggregatedFeatures::default();
    for ((stimulus, feature), t) in tallies {
        let value = match kinds[feature] {
            ValueKind::Presence => AggregatedValue::Proportion(t.present as f64 / t.total as f64),
            ValueKind::SpokeCount => AggregatedValue::Count(mode(&t.counts).expect("nonempty")),
            ValueKind::Split => AggregatedValue::Category(mode(&t.splits).expect("nonempty")),
        };
        out.rows
            .entry(stimulus.to_string())
            .or_default()
            .insert(feature.to_string(), value);
    }
    Ok(out)
}

impl AggregatedFeatures {
    /// Numeric table for regression. Categorical features expand into one
    /// indicator column per non-baseline level (`<feature>.single`,
    /// `<feature>.split`; `none` is the baseline). Absent values are missing.
    pub fn to_feature_table(&self) -> FeatureTable {
        let mut columns: BTreeMap<String, ValueShape> = BTreeMap::new();
        for features in self.rows.values() {
            for (name, v) in features {
                columns.entry(name.clone()).or_insert(match v {
                    AggregatedValue::Category(_) => ValueShape::Categorical,
                    _ => ValueShape::Scalar,
                });
            }
        }
        let mut names = Vec::new();
        for (name, shape) in &columns {
            match shape {
                ValueShape::Scalar => names.push(name.clone()),
                ValueShape::Categorical => {
                    for level in &SplitType::ALL[1..] {
                        names.push(format!("{name}.{}", level.as_str()));
                    }
                }
            }
        }
        let mut table = FeatureTable::new(names);
        for (id, features) in &self.rows {
            let mut row = Vec::with_capacity(table.columns.len());
            for (name, shape) in &columns {
                let v = features.get(name);
                match shape {
                    ValueShape::Scalar => row.push(match v {
                        Some(AggregatedValue::Proportion(p)) => Some(*p),
                        Some(AggregatedValue::Count(n)) => Some(f64::from(*n)),
                        _ => None,
                    }),
                    ValueShape::Categorical => {
                        for level in &SplitType::ALL[1..] {
                            row.push(match v {
                                Some(AggregatedValue::Category(c)) => Some(if c == level { 1.0 } else { 0.0 }),
                                _ => None,
                            });
                        }
                    }
                }
            }
            table.rows.insert(id.clone(), row);
        }
        table
    }
}

#[derive(Clone, Copy)]
enum ValueShape {
    Scalar,
    Categorical,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(annotator: &str, stim: &str, feature: &str, value: AnnotationValue) -> AnnotationRecord {
        AnnotationRecord {
            annotator_id: annotator.into(),
            stimulus_id: stim.into(),
            feature_name: feature.into(),
            value,
        }
    }

    fn presence(flags: &[bool]) -> Vec<AnnotationRecord> {
        flags
            .iter()
            .enumerate()
            .map(|(i, &f)| rec(&format!("a{i}"), "w1", "indented", AnnotationValue::Presence(f)))
            .collect()
    }

    #[test]
    fn unanimous_presence_is_one() {
        let agg = aggregate_annotations(&presence(&[true; 5])).unwrap();
        assert_eq!(agg.rows["w1"]["indented"], AggregatedValue::Proportion(1.0));
    }

    #[test]
    fn three_of_five_is_point_six() {
        let agg = aggregate_annotations(&presence(&[true, false, true, false, true])).unwrap();
        assert_eq!(agg.rows["w1"]["indented"], AggregatedValue::Proportion(0.6));
    }

    #[test]
    fn spoke_mode_tie_goes_to_smaller() {
        let recs: Vec<_> = [5, 5, 6, 10, 6]
            .iter()
            .enumerate()
            .map(|(i, &n)| rec(&format!("a{i}"), "w1", "spokes", AnnotationValue::SpokeCount(n)))
            .collect();
        let agg = aggregate_annotations(&recs).unwrap();
        assert_eq!(agg.rows["w1"]["spokes"], AggregatedValue::Count(5));
    }

    #[test]
    fn split_mode_tie_follows_fixed_order() {
        let recs = vec![
            rec("a1", "w1", "split_type", AnnotationValue::Split(SplitType::Split)),
            rec("a2", "w1", "split_type", AnnotationValue::Split(SplitType::Single)),
        ];
        let agg = aggregate_annotations(&recs).unwrap();
        assert_eq!(
            agg.rows["w1"]["split_type"],
            AggregatedValue::Category(SplitType::Single)
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(aggregate_annotations(&[]), Err(CorpusError::EmptyInput)));
        let recs = vec![
            rec("a1", "w1", "offset", AnnotationValue::Presence(true)),
            rec("a2", "w2", "offset", AnnotationValue::SpokeCount(3)),
        ];
        assert!(matches!(
            aggregate_annotations(&recs),
            Err(CorpusError::MixedValueKinds(f)) if f == "offset"
        ));
    }

    #[test]
    fn table_dummy_encodes_split_type() {
        let recs = vec![
            rec("a1", "w1", "split_type", AnnotationValue::Split(SplitType::Split)),
            rec("a1", "w2", "split_type", AnnotationValue::Split(SplitType::None)),
            rec("a1", "w1", "offset", AnnotationValue::Presence(true)),
        ];
        let t = aggregate_annotations(&recs).unwrap().to_feature_table();
        assert_eq!(t.columns, vec!["offset", "split_type.single", "split_type.split"]);
        assert_eq!(t.rows["w1"], vec![Some(1.0), Some(0.0), Some(1.0)]);
        assert_eq!(t.rows["w2"], vec![None, Some(0.0), Some(0.0)]);
    }

    proptest! {
        #[test]
        fn proportion_is_exact_ratio(flags in proptest::collection::vec(any::<bool>(), 1..40)) {
            let agg = aggregate_annotations(&presence(&flags)).unwrap();
            let expected = flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64;
            match agg.rows["w1"]["indented"] {
                AggregatedValue::Proportion(p) => {
                    prop_assert!((0.0..=1.0).contains(&p));
                    prop_assert_eq!(p, expected);
                }
                other => prop_assert!(false, "unexpected {:?}", other),
            }
        }
    }
}
