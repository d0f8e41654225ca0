use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{RVector, Rational};
use crate::reduction::OffsetMode;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed dataset JSON")]
    Json(#[from] serde_json::Error),
    #[error("{what} has dimension {found}, expected {expected}")]
    Dimension { what: String, expected: usize, found: usize },
    #[error("{0} has a negative entry")]
    Negative(String),
    #[error("{0}")]
    Invalid(String),
}

/// A purchased bundle `x` at prices `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub x: RVector,
    pub p: RVector,
    /// 1-based clause (level) that generated the row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<usize>,
    /// Gadget index of the bundle within its clause.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// A bundle that is never purchased but must be compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationPoint {
    pub x: RVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

/// Finite consumption data; bundles split as `x = (z, o)` with `z` the first
/// `n_z` coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub n_z: usize,
    pub n_o: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_mode: Option<OffsetMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rational>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<Rational>,
    /// η added to zero price coordinates, when the perturbation was applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_prices: Option<Rational>,
    pub observations: Vec<Observation>,
    #[serde(default)]
    pub evaluation_points: Vec<EvaluationPoint>,
}

/// Where a bundle of the dataset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceRef {
    Observation(usize),
    Evaluation(usize),
}

impl Dataset {
    /// Dataset with no reduction metadata.
    pub fn plain(n_z: usize, n_o: usize, observations: Vec<Observation>, evaluation_points: Vec<EvaluationPoint>) -> Self {
        Dataset {
            n_z,
            n_o,
            offset_mode: None,
            epsilon: None,
            big_m: None,
            positive_prices: None,
            observations,
            evaluation_points,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_z + self.n_o
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let ds: Dataset = serde_json::from_str(text)?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.n_z == 0 {
            return Err(DatasetError::Invalid("n_z must be positive".into()));
        }
        if self.observations.is_empty() {
            return Err(DatasetError::Invalid("dataset has no observations".into()));
        }
        let dim = self.dim();
        let check = |what: String, v: &RVector| -> Result<(), DatasetError> {
            if v.dim() != dim {
                return Err(DatasetError::Dimension { what, expected: dim, found: v.dim() });
            }
            if v.iter().any(Rational::is_negative) {
                return Err(DatasetError::Negative(what));
            }
            Ok(())
        };
        for (i, o) in self.observations.iter().enumerate() {
            check(format!("observation {i} bundle"), &o.x)?;
            check(format!("observation {i} price"), &o.p)?;
            if o.p.iter().all(Rational::is_zero) {
                return Err(DatasetError::Invalid(format!("observation {i} has an all-zero price")));
            }
        }
        for (i, e) in self.evaluation_points.iter().enumerate() {
            check(format!("evaluation point {i}"), &e.x)?;
        }
        Ok(())
    }

    /// Whether every price entry of every observation is strictly positive.
    pub fn has_positive_prices(&self) -> bool {
        self.observations.iter().all(|o| o.p.iter().all(Rational::is_positive))
    }

    pub fn bundle(&self, src: SourceRef) -> &RVector {
        match src {
            SourceRef::Observation(i) => &self.observations[i].x,
            SourceRef::Evaluation(i) => &self.evaluation_points[i].x,
        }
    }

    /// `(clause, gadget index)` tag of a source, if it carries one.
    pub fn tag(&self, src: SourceRef) -> (Option<usize>, Option<usize>) {
        match src {
            SourceRef::Observation(i) => (self.observations[i].clause, self.observations[i].k),
            SourceRef::Evaluation(i) => (self.evaluation_points[i].clause, self.evaluation_points[i].t),
        }
    }

    /// Observations first, then evaluation points.
    pub fn sources(&self) -> impl Iterator<Item = SourceRef> + '_ {
        (0..self.observations.len())
            .map(SourceRef::Observation)
            .chain((0..self.evaluation_points.len()).map(SourceRef::Evaluation))
    }

    pub fn split(&self, x: &RVector) -> (RVector, RVector) {
        (x.slice(0..self.n_z), x.slice(self.n_z..self.dim()))
    }
}
