use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SoilError};

/// Kind of response carried by a [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = SoilError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regression" | "gaussian" => Ok(Task::Regression),
            "classification" | "binomial" | "logistic" => Ok(Task::Classification),
            other => Err(SoilError::ConfigInvalid(format!("unknown task '{other}'"))),
        }
    }
}

/// Design matrix, response and column labels.
///
/// The design is stored column-major (the nalgebra layout), so column
/// slices are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    task: Task,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, task: Task, names: Vec<String>) -> Result<Self> {
        let (n, p) = x.shape();
        if n < 2 {
            return Err(SoilError::InvalidDataset(format!("need at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(SoilError::InvalidDataset("need at least 1 predictor".into()));
        }
        if y.len() != n {
            return Err(SoilError::InvalidDataset(format!(
                "response has {} entries for {n} rows",
                y.len()
            )));
        }
        if names.len() != p {
            return Err(SoilError::InvalidDataset(format!(
                "{} column names for {p} columns",
                names.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(SoilError::InvalidDataset("non-finite entry".into()));
        }
        if task == Task::Classification {
            if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(SoilError::NonBinaryResponse {
                    row: i,
                    value: y[i].to_string(),
                });
            }
        }
        Ok(Self { x, y, task, names })
    }

    /// Builds a dataset with default column names `X1..Xp`.
    pub fn with_default_names(x: DMatrix<f64>, y: DVector<f64>, task: Task) -> Result<Self> {
        let names = default_names(x.ncols());
        Self::new(x, y, task, names)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.x.nrows();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }

    /// Same design, new response. The task is kept.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.task, self.names.clone())
    }

    /// Reorders columns so that new column `k` is old column `order[k]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        let p = self.n_cols();
        let mut seen = vec![false; p];
        if order.len() != p || order.iter().any(|&j| j >= p || std::mem::replace(&mut seen[j], true)) {
            return Err(SoilError::ConfigInvalid("column order is not a permutation".into()));
        }
        let x = DMatrix::from_fn(self.n_rows(), p, |i, k| self.x[(i, order[k])]);
        let names = order.iter().map(|&j| self.names[j].clone()).collect();
        Self::new(x, self.y.clone(), self.task, names)
    }

    pub(crate) fn require_task(&self, task: Task) -> Result<()> {
        if self.task == task {
            Ok(())
        } else {
            Err(SoilError::WrongTask {
                expected: task.as_str(),
            })
        }
    }
}

pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("X{j}")).collect()
}
