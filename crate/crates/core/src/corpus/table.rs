use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Marker written for missing cells.
pub const MISSING: &str = "NA";

/// Per-stimulus numeric features with named columns. `None` marks a
/// missing value, excluded listwise at fit time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub rows: BTreeMap<String, Vec<Option<f64>>>,
}

impl FeatureTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: BTreeMap::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, id: &str, column: &str) -> Option<f64> {
        let j = self.column_index(column)?;
        self.rows.get(id)?.get(j).copied().flatten()
    }

    /// Column-wise union keyed by stimulus id. Ids present in only one side
    /// get missing values for the other side's columns.
    pub fn join(&self, other: &FeatureTable) -> FeatureTable {
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        let mut out = FeatureTable::new(columns);
        let ids: std::collections::BTreeSet<&String> = self.rows.keys().chain(other.rows.keys()).collect();
        for id in ids {
            let mut row = self
                .rows
                .get(id)
                .cloned()
                .unwrap_or_else(|| vec![None; self.columns.len()]);
            row.extend(
                other
                    .rows
                    .get(id)
                    .cloned()
                    .unwrap_or_else(|| vec![None; other.columns.len()]),
            );
            out.rows.insert(id.clone(), row);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CorpusError> {
        let csv_err = |source| CorpusError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header = vec!["stimulus_id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (id, row) in &self.rows {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| match v {
                Some(x) => x.to_string(),
                None => MISSING.to_string(),
            }));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_csv(path: &Path) -> Result<FeatureTable, CorpusError> {
        let csv_err = |source| CorpusError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut r = csv::Reader::from_reader(file);
        let headers = r.headers().map_err(csv_err)?.clone();
        if headers.get(0) != Some("stimulus_id") {
            return Err(CorpusError::MissingColumn {
                path: path.to_path_buf(),
                column: "stimulus_id".into(),
            });
        }
        let mut table = FeatureTable::new(headers.iter().skip(1).map(String::from).collect());
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let id = rec.get(0).unwrap_or_default().to_string();
            let row = rec
                .iter()
                .skip(1)
                .map(|cell| {
                    if cell == MISSING || cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>().map(Some).map_err(|_| CorpusError::InvalidValue {
                            field: "feature value",
                            value: cell.to_string(),
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            if table.rows.insert(id.clone(), row).is_some() {
                return Err(CorpusError::DuplicateId(id));
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_missing() {
        let mut t = FeatureTable::new(vec!["a".into(), "b".into()]);
        t.rows.insert("w1".into(), vec![Some(0.1), None]);
        t.rows.insert("w2".into(), vec![Some(-3.25e-7), Some(1.0)]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(FeatureTable::read_csv(&p).unwrap(), t);
    }

    #[test]
    fn join_fills_missing() {
        let mut a = FeatureTable::new(vec!["x".into()]);
        a.rows.insert("w1".into(), vec![Some(1.0)]);
        let mut b = FeatureTable::new(vec!["y".into()]);
        b.rows.insert("w2".into(), vec![Some(2.0)]);
        let j = a.join(&b);
        assert_eq!(j.rows["w1"], vec![Some(1.0), None]);
        assert_eq!(j.rows["w2"], vec![None, Some(2.0)]);
    }
}
