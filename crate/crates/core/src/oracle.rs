//! The labeling oracle: the single channel to hidden labels.
//!
//! Every question returns one bit and costs one unit of budget. In
//! [`Mode::Streaming`] the `t`-th question must concern sample `t - 1`, so each
//! sample is looked at once, in arrival order; [`Mode::Resampling`] allows any
//! index sequence.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{dot, UnitVector};
use crate::kernel::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Streaming,
    Resampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Halfspace,
    Threshold,
    Membership,
}

impl QueryKind {
    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Halfspace => "halfspace",
            QueryKind::Threshold => "threshold",
            QueryKind::Membership => "membership",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRecord {
    /// 1-based query counter
    pub t: usize,
    pub index: usize,
    pub kind: QueryKind,
    pub cost: usize,
}

#[derive(Debug, Clone)]
enum Labels {
    Real { values: Vec<Vec<f64>>, dim: usize },
    /// 1-based classes, embedded as basis vectors of `R^n_classes`
    Classes { classes: Vec<usize>, n_classes: usize },
}

#[derive(Debug, Clone)]
pub struct QueryOracle {
    labels: Labels,
    budget_total: usize,
    budget_used: usize,
    mode: Mode,
    log: Option<Vec<QueryRecord>>,
}

impl QueryOracle {
    /// Oracle over real vector labels.
    pub fn regression(labels: Vec<Vec<f64>>, budget: usize, mode: Mode) -> Result<Self> {
        let dim = labels.first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidDimension("labels must be nonempty vectors".into()));
        }
        if let Some(bad) = labels.iter().find(|l| l.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(QueryOracle {
            labels: Labels::Real { values: labels, dim },
            budget_total: budget,
            budget_used: 0,
            mode,
            log: None,
        })
    }

    /// Oracle over 1-based class labels in `1..=n_classes`.
    pub fn classification(classes: Vec<usize>, n_classes: usize, budget: usize, mode: Mode) -> Result<Self> {
        if n_classes == 0 || classes.is_empty() {
            return Err(Error::InvalidDimension("classification oracle needs classes and samples".into()));
        }
        if let Some(&bad) = classes.iter().find(|&&c| c == 0 || c > n_classes) {
            return Err(Error::InvalidParameter(format!("class {bad} outside 1..={n_classes}")));
        }
        Ok(QueryOracle {
            labels: Labels::Classes { classes, n_classes },
            budget_total: budget,
            budget_used: 0,
            mode,
            log: None,
        })
    }

    /// Enables the query log.
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn budget_total(&self) -> usize {
        self.budget_total
    }

    pub fn budget_used(&self) -> usize {
        self.budget_used
    }

    pub fn remaining(&self) -> usize {
        self.budget_total - self.budget_used
    }

    pub fn n_samples(&self) -> usize {
        match &self.labels {
            Labels::Real { values, .. } => values.len(),
            Labels::Classes { classes, .. } => classes.len(),
        }
    }

    /// Dimension of the (embedded) label space.
    pub fn label_dim(&self) -> usize {
        match &self.labels {
            Labels::Real { dim, .. } => *dim,
            Labels::Classes { n_classes, .. } => *n_classes,
        }
    }

    pub fn n_classes(&self) -> Option<usize> {
        match &self.labels {
            Labels::Classes { n_classes, .. } => Some(*n_classes),
            Labels::Real { .. } => None,
        }
    }

    pub fn log(&self) -> Option<&[QueryRecord]> {
        self.log.as_deref()
    }

    /// Ledger and index checks shared by all query kinds; does not mutate.
    fn admit(&self, index: usize) -> Result<()> {
        if self.budget_used >= self.budget_total {
            return Err(Error::BudgetExhausted {
                total: self.budget_total,
            });
        }
        let n = self.n_samples();
        if self.mode == Mode::Streaming && index != self.budget_used {
            return Err(Error::StreamingViolation {
                query: self.budget_used + 1,
                requested: index,
                expected: self.budget_used,
            });
        }
        if index >= n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        Ok(())
    }

    fn charge(&mut self, index: usize, kind: QueryKind) {
        self.budget_used += 1;
        let t = self.budget_used;
        if let Some(log) = &mut self.log {
            log.push(QueryRecord { t, index, kind, cost: 1 });
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        let expected = self.label_dim();
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// `<Y_index, u>` for the hidden label.
    fn label_projection(&self, index: usize, u: &[f64]) -> f64 {
        match &self.labels {
            Labels::Real { values, .. } => dot(&values[index], u),
            Labels::Classes { classes, .. } => u[classes[index] - 1],
        }
    }

    /// `sign(<Y_index - z, u>)`, with `sign(0) = +1`.
    pub fn halfspace_query(&mut self, index: usize, z: &[f64], u: &UnitVector) -> Result<Sign> {
        self.admit(index)?;
        self.check_dim(z.len())?;
        self.check_dim(u.dim())?;
        let answer = Sign::of(self.label_projection(index, u.coords()) - dot(z, u.coords()));
        self.charge(index, QueryKind::Halfspace);
        Ok(answer)
    }

    /// `1{<Y_index, u> < c}`.
    pub fn threshold_query(&mut self, index: usize, u: &UnitVector, c: f64) -> Result<bool> {
        self.admit(index)?;
        self.check_dim(u.dim())?;
        let answer = self.label_projection(index, u.coords()) < c;
        self.charge(index, QueryKind::Threshold);
        Ok(answer)
    }

    /// `1{class(Y_index) ∈ set}` for a nonempty proper subset of 1-based classes.
    pub fn membership_query(&mut self, index: usize, set: &[usize]) -> Result<bool> {
        let Labels::Classes { classes, n_classes } = &self.labels else {
            return Err(Error::UnsupportedQuery("membership queries need class labels"));
        };
        let n_classes = *n_classes;
        let mut members = vec![false; n_classes];
        for &c in set {
            if c == 0 || c > n_classes {
                return Err(Error::InvalidParameter(format!("class {c} outside 1..={n_classes}")));
            }
            members[c - 1] = true;
        }
        let size = members.iter().filter(|&&b| b).count();
        if size == 0 || size == n_classes {
            return Err(Error::TrivialSet { n_classes });
        }
        self.admit(index)?;
        let answer = members[classes[index] - 1];
        self.charge(index, QueryKind::Membership);
        Ok(answer)
    }

    /// Writes the query log as CSV with columns `t,index,kind,cost`.
    pub fn write_log_csv<W: Write>(&self, out: W) -> Result<()> {
        let log = self
            .log
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("query log was not enabled".into()))?;
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Data(format!("writing query log: {e}"));
        w.write_record(["t", "index", "kind", "cost"]).map_err(to_err)?;
        for r in log {
            w.write_record([
                r.t.to_string(),
                r.index.to_string(),
                r.kind.name().to_string(),
                r.cost.to_string(),
            ])
            .map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::Data(format!("writing query log: {e}")))?;
        Ok(())
    }
}
