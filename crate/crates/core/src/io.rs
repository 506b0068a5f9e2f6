//! Dataset ingestion and report serialization.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Result, SoilError};
use crate::importance::{rank_variables, threshold_select};
use crate::pipeline::SoilResult;
use crate::simulation::StudyResult;
use crate::weighting::WeightingMethod;

pub const SCHEMA_VERSION: u32 = 1;

/// Reads a comma-separated file with a header row. Every column other than
/// `response` becomes a predictor, in file order.
pub fn load_dataset(path: impl AsRef<Path>, response: &str, task: Task) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| SoilError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_dataset(file, response, task)
}

/// [`load_dataset`] over any reader. Row numbers in errors count data rows
/// from 1, excluding the header.
pub fn read_dataset<R: Read>(reader: R, response: &str, task: Task) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| SoilError::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let y_col = header
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| SoilError::MissingColumn(response.to_string()))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != y_col)
        .map(|(_, h)| h.clone())
        .collect();
    let mut values = Vec::new();
    let mut y = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| SoilError::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        for (j, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| SoilError::Parse {
                row,
                column: header[j].clone(),
                message: format!("'{cell}' is not a finite number"),
            })?;
            if j == y_col {
                if task == Task::Classification && v != 0.0 && v != 1.0 {
                    return Err(SoilError::NonBinaryResponse {
                        row,
                        value: cell.to_string(),
                    });
                }
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = y.len();
    let x = DMatrix::from_row_slice(n, names.len(), &values);
    Dataset::new(x, DVector::from_vec(y), task, names)
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub name: String,
    pub method: WeightingMethod,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionEntry {
    pub method: WeightingMethod,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_missed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_over_selected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_symdiff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_symdiff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_symdiff_ratio: Option<f64>,
}

impl SelectionEntry {
    fn bare(method: WeightingMethod, threshold: f64) -> Self {
        Self {
            method,
            threshold,
            selected: None,
            mean_missed: None,
            mean_over_selected: None,
            mean_symdiff: None,
            se_symdiff: None,
            mean_symdiff_ratio: None,
        }
    }
}

/// Structured output shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub meta: Meta,
    pub importance: Vec<ImportanceEntry>,
    pub selection: Vec<SelectionEntry>,
}

impl Report {
    /// Importance entries are listed per method in rank order.
    pub fn from_soil(result: &SoilResult, meta: Meta, thresholds: &[f64]) -> Result<Self> {
        let mut importance = Vec::new();
        let mut selection = Vec::new();
        for m in &result.methods {
            for j in rank_variables(&m.importance) {
                importance.push(ImportanceEntry {
                    name: m.importance.names[j].clone(),
                    method: m.method,
                    value: m.importance.values[j],
                    std_error: None,
                });
            }
            for &c in thresholds {
                let sel = threshold_select(&m.importance, c, None)?;
                selection.push(SelectionEntry {
                    selected: Some(sel.selected.iter().map(|&j| m.importance.names[j].clone()).collect()),
                    ..SelectionEntry::bare(m.method, c)
                });
            }
        }
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            meta,
            importance,
            selection,
        })
    }

    /// Mean importances in column order, with standard errors.
    pub fn from_study(study: &StudyResult, meta: Meta) -> Self {
        let importance = study
            .methods
            .iter()
            .flat_map(|m| {
                study.names.iter().enumerate().map(move |(j, name)| ImportanceEntry {
                    name: name.clone(),
                    method: m.method,
                    value: m.mean_importance[j],
                    std_error: Some(m.std_error[j]),
                })
            })
            .collect();
        let selection = study
            .selection_stats
            .iter()
            .map(|s| SelectionEntry {
                mean_missed: Some(s.mean_missed),
                mean_over_selected: Some(s.mean_over_selected),
                mean_symdiff: Some(s.mean_symdiff),
                se_symdiff: Some(s.se_symdiff),
                mean_symdiff_ratio: s.mean_symdiff_ratio,
                ..SelectionEntry::bare(s.method, s.threshold)
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            meta,
            importance,
            selection,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SoilError::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| SoilError::Io(e.to_string()))
    }

    /// One row per method and variable: `method,name,value,std_error`, with
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| SoilError::Io(e.to_string());
        w.write_record(["method", "name", "value", "std_error"]).map_err(io)?;
        for e in &self.importance {
            let se = e.std_error.map(format_float).unwrap_or_default();
            w.write_record([e.method.as_str(), &e.name, &format_float(e.value), &se])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, task: Task) -> Result<Dataset> {
        read_dataset(text.as_bytes(), "y", task)
    }

    #[test]
    fn well_formed_file() {
        let d = load("x,y\n1,2\n3,4\n5,6\n", Task::Regression).unwrap();
        assert_eq!((d.n_rows(), d.n_cols()), (3, 1));
        assert_eq!(d.names(), &["x".to_string()]);
        assert_eq!(d.y().as_slice(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn response_position_is_free() {
        let d = load("y,a,b\n1,2,3\n4,5,6\n", Task::Regression).unwrap();
        assert_eq!(d.column(1), &[3.0, 6.0]);
    }

    #[test]
    fn missing_cell_names_row() {
        let err = load("x,y\n1,2\nNA,4\n", Task::Regression).unwrap_err();
        assert!(matches!(err, SoilError::Parse { row: 2, ref column, .. } if column == "x"));
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn missing_response_column() {
        assert_eq!(load("a,b\n1,2\n", Task::Regression).unwrap_err(), SoilError::MissingColumn("y".into()));
    }

    #[test]
    fn non_binary_classification_response() {
        let err = load("x,y\n1,0\n2,2\n3,1\n", Task::Classification).unwrap_err();
        assert_eq!(err, SoilError::NonBinaryResponse { row: 2, value: "2".into() });
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2f64.sqrt() * 1e-7, 0.0, -123456.789] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_output_shape() {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            meta: Meta {
                command: "importance".into(),
                seed: 1,
                config: serde_json::Value::Null,
            },
            importance: vec![ImportanceEntry {
                name: "x".into(),
                method: WeightingMethod::Arm,
                value: 0.25,
                std_error: None,
            }],
            selection: vec![],
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "method,name,value,std_error\narm,x,2.5000000000000000e-1,\n"
        );
        assert_eq!(Report::from_json(&report.to_json().unwrap()).unwrap(), report);
    }
}
