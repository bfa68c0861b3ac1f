//! Classification by regressing the one-hot embedding of the class under the
//! absolute deviation loss, then decoding with an argmax.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{geometric_median, norm, UnitVector};
use crate::kernel::KernelModel;
use crate::learner::{drive_oracle, run_median_sgd, StepSchedule, TrainReport};
use crate::oracle::QueryOracle;

/// One-hot embedding of classes `1..=n_classes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassEmbedding {
    n_classes: usize,
}

impl ClassEmbedding {
    pub fn new(n_classes: usize) -> Result<Self> {
        if n_classes == 0 {
            return Err(Error::InvalidDimension("need at least one class".into()));
        }
        Ok(Self { n_classes })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn encode(&self, y: usize) -> Result<Vec<f64>> {
        if y == 0 || y > self.n_classes {
            return Err(Error::IndexOutOfRange {
                index: y,
                len: self.n_classes,
            });
        }
        let mut e = vec![0.0; self.n_classes];
        e[y - 1] = 1.0;
        Ok(e)
    }

    pub fn decode(&self, g: &[f64]) -> Result<usize> {
        if g.len() != self.n_classes {
            return Err(Error::DimensionMismatch {
                expected: self.n_classes,
                got: g.len(),
            });
        }
        decode(g)
    }
}

/// 1-based index of the largest entry; ties go to the lowest index.
pub fn decode(g: &[f64]) -> Result<usize> {
    if g.is_empty() {
        return Err(Error::InvalidDimension("cannot decode an empty score vector".into()));
    }
    let mut best = 0;
    for (j, &v) in g.iter().enumerate().skip(1) {
        if v > g[best] {
            best = j;
        }
    }
    Ok(best + 1)
}

fn require_classes(oracle: &QueryOracle) -> Result<usize> {
    oracle
        .n_classes()
        .ok_or_else(|| Error::UnsupportedQuery("classification strategies need class labels"))
}

/// Active strategy: median SGD on the embedded labels with `U` uniform on the
/// sphere. The oracle answers `sign(<e_Y - g(X), U>)`.
pub fn run_active_classification<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    oracle: &mut QueryOracle,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
) -> Result<TrainReport> {
    require_classes(oracle)?;
    run_median_sgd(inputs, oracle, schedule, model0, rng, grid)
}

/// Coordinate-sampling baseline: like the active strategy but with `U` drawn
/// uniformly from the canonical basis, so each query only asks `1{Y = j}`
/// against the current score `g_j(X)`.
pub fn run_passive_classification<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    oracle: &mut QueryOracle,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
) -> Result<TrainReport> {
    let m = require_classes(oracle)?;
    let basis: Vec<UnitVector> = (0..m).map(|j| UnitVector::basis(m, j)).collect::<Result<_>>()?;
    drive_oracle(inputs, oracle, schedule, model0, rng, grid, |model, step, oracle, rng| {
        let u = &basis[rng.random_range(0..m)];
        let z = model.predict_from_column(step.column);
        let eps = oracle.halfspace_query(step.index, &z, u)?;
        model.update_from_column(step.column, u.coords(), eps.value() * step.gamma, step.gamma);
        Ok(())
    })
}

/// Draws sets of classes with every class included independently with
/// probability one half, redrawing the empty and the full set.
#[derive(Debug, Clone, Copy)]
pub struct RandomSetGenerator {
    n_classes: usize,
}

impl RandomSetGenerator {
    pub fn new(n_classes: usize) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::TrivialSet { n_classes });
        }
        Ok(Self { n_classes })
    }

    /// Sorted 1-based class indices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        loop {
            let set: Vec<usize> = (1..=self.n_classes).filter(|_| rng.random::<bool>()).collect();
            if !set.is_empty() && set.len() < self.n_classes {
                return set;
            }
        }
    }
}

/// Class `y` in `candidates` maximizing `g_y`, lowest index on ties.
fn best_in(g: &[f64], candidates: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for y in candidates {
        if best.map_or(true, |b| g[y - 1] > g[b - 1]) {
            best = Some(y);
        }
    }
    best.expect("candidate set is nonempty")
}

/// Target class and unit descent direction for one infimum-loss step.
/// Returns `None` for the direction when `g = e_{y*}`.
pub fn infimum_loss_direction(g: &[f64], set: &[usize], in_set: bool) -> (usize, Option<Vec<f64>>) {
    let y_star = if in_set {
        best_in(g, set.iter().copied())
    } else {
        best_in(g, (1..=g.len()).filter(|y| !set.contains(y)))
    };
    let mut d = g.to_vec();
    d[y_star - 1] -= 1.0;
    let n = norm(&d);
    if n > 0.0 {
        d.iter_mut().for_each(|v| *v /= n);
        (y_star, Some(d))
    } else {
        (y_star, None)
    }
}

/// Partial-label baseline: per step one membership query `1{Y ∈ S}` on a
/// random set, then a subgradient step towards the best-scoring class of the
/// observed side (`S` or its complement).
pub fn infimum_loss_sgd<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    sets: &RandomSetGenerator,
    oracle: &mut QueryOracle,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
) -> Result<TrainReport> {
    let m = require_classes(oracle)?;
    if sets.n_classes != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: sets.n_classes,
        });
    }
    drive_oracle(inputs, oracle, schedule, model0, rng, grid, |model, step, oracle, rng| {
        let set = sets.sample(rng);
        let answer = oracle.membership_query(step.index, &set)?;
        let g = model.predict_from_column(step.column);
        match infimum_loss_direction(&g, &set, answer).1 {
            Some(d) => model.update_from_column(step.column, &d, -step.gamma, step.gamma),
            None => model.shrink(step.gamma),
        }
        Ok(())
    })
}

/// Weighted geometric median of the simplex vertices, checked against the
/// class distribution it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub theta: Vec<f64>,
    pub decoded: usize,
    pub decoded_in_argmax: bool,
    /// Pairs `(y, z)`, 1-based, with `p_y > p_z + tol` but `θ_y < θ_z - tol`.
    pub violations: Vec<(usize, usize)>,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.decoded_in_argmax && self.violations.is_empty()
    }
}

pub const MAX_CHECK_CLASSES: usize = 6;

pub fn surrogate_target_check(p: &[f64], tol: f64) -> Result<OrderingReport> {
    let m = p.len();
    if m == 0 || m > MAX_CHECK_CLASSES {
        return Err(Error::InvalidDimension(format!(
            "ordering check supports 1 to {MAX_CHECK_CLASSES} classes, got {m}"
        )));
    }
    if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("{p:?} is not a probability vector")));
    }
    let emb = ClassEmbedding::new(m)?;
    let vertices: Vec<Vec<f64>> = (1..=m).map(|y| emb.encode(y)).collect::<Result<_>>()?;
    let theta = geometric_median(&vertices, p, tol)?;
    let decoded = decode(&theta)?;
    let p_max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut violations = Vec::new();
    for y in 0..m {
        for z in 0..m {
            if p[y] > p[z] + tol && theta[y] < theta[z] - tol {
                violations.push((y + 1, z + 1));
            }
        }
    }
    Ok(OrderingReport {
        decoded_in_argmax: p[decoded - 1] >= p_max - tol,
        theta,
        decoded,
        violations,
    })
}
