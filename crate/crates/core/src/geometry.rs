//! Sphere sampling, reconstruction constants and the geometric median.
//!
//! The weak-gradient estimators in [`crate::learner`] rest on two identities
//! for a direction `U` drawn uniformly on the unit sphere of `R^m`:
//!
//! * `E[sign(<z, U>) U] = c2(m) z / |z|` (median / half-space queries),
//! * `E[1{<z, U> >= V} U] = c1(m, M) z` for `V ~ Unif[0, 2M]` and `|z| <= 2M`
//!   (least-squares / threshold queries).
//!
//! Closed forms are provided by [`c2_constant`] and [`c1_constant`]; the Monte
//! Carlo estimators in this module are the arbiters used by the test suites
//! and by the `constants` command.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A point on the unit sphere `S^{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `coords`. Fails on the zero vector or an empty slice.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDimension("unit vector of dimension 0".into()));
        }
        let norm = norm(&coords);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(UnitVector(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// The `index`-th canonical basis vector of `R^dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("unit vector of dimension 0".into()));
        }
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut coords = vec![0.0; dim];
        coords[index] = 1.0;
        Ok(UnitVector(coords))
    }

    /// Wraps coordinates already known to have unit norm.
    pub(crate) fn from_unit(coords: Vec<f64>) -> Self {
        debug_assert!((norm(&coords) - 1.0).abs() < 1e-9);
        UnitVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Fills `out` with a uniform draw on the sphere of dimension `out.len()`.
pub(crate) fn fill_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        // S^0 = {-1, +1}; g / sqrt(g * g) is not exact in floating point
        let g: f64 = rng.sample(StandardNormal);
        out[0] = if g < 0.0 { -1.0 } else { 1.0 };
        return;
    }
    loop {
        let mut sq = 0.0;
        for c in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *c = g;
            sq += g * g;
        }
        if sq > 0.0 {
            let norm = sq.sqrt();
            out.iter_mut().for_each(|c| *c /= norm);
            return;
        }
    }
}

/// Draws a direction uniformly on `S^{m-1}` by normalizing a standard
/// Gaussian vector.
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<UnitVector> {
    if m == 0 {
        return Err(Error::InvalidDimension("sphere S^{-1} is empty (m = 0)".into()));
    }
    let mut coords = vec![0.0; m];
    fill_sphere(rng, &mut coords);
    Ok(UnitVector(coords))
}

/// `E|<e1, U>|` for `U` uniform on `S^{m-1}`, i.e. `Γ(m/2) / (√π Γ((m+1)/2))`.
///
/// Evaluated through the recurrence `c2(m + 2) = c2(m) m / (m + 1)` from
/// `c2(1) = 1` and `c2(2) = 2/π`, which avoids gamma-function overflow.
pub fn c2_constant(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidDimension("m must be at least 1".into()));
    }
    let (mut k, mut value) = if m % 2 == 1 {
        (1usize, 1.0)
    } else {
        (2usize, 2.0 / std::f64::consts::PI)
    };
    while k < m {
        value *= k as f64 / (k + 1) as f64;
        k += 2;
    }
    Ok(value)
}

/// The scalar `c1` with `E[1{<z,U> >= V} U] = c1 z` for `V ~ Unif[0, 2M]`,
/// equal to `1 / (4 m M)`.
pub fn c1_constant(m: usize, scale: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidDimension("m must be at least 1".into()));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidScale(scale));
    }
    Ok(1.0 / (4.0 * m as f64 * scale))
}

/// Which reconstruction constant a Monte Carlo run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantKind {
    /// `c2`: mean of `|U_1|`.
    Median,
    /// `c1`: mean of `1{U_1 >= V} U_1`, `V ~ Unif[0, 2M]`.
    LeastSquares,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl MonteCarloEstimate {
    /// True when `|mean - value| <= k_sigma * std_error`.
    ///
    /// A zero standard error (degenerate distribution) requires agreement to
    /// within a few ulps of `value`.
    pub fn agrees_with(&self, value: f64, k_sigma: f64) -> bool {
        let slack = 4.0 * f64::EPSILON * value.abs().max(1.0);
        (self.mean - value).abs() <= k_sigma * self.std_error + slack
    }

    /// Signed deviation in units of standard error (0 when both vanish).
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = self.mean - value;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff.abs() <= 4.0 * f64::EPSILON * value.abs().max(1.0) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Welford accumulator for a scalar stream.
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn estimate(&self) -> MonteCarloEstimate {
        let var = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        MonteCarloEstimate {
            mean: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            n_samples: self.n,
        }
    }
}

pub const MIN_MC_SAMPLES: usize = 1000;

/// Monte Carlo estimate of `c2(m)` or `c1(m, M)` from `n` sphere draws.
pub fn estimate_constant_mc<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    scale: Option<f64>,
    kind: ConstantKind,
    n: usize,
) -> Result<MonteCarloEstimate> {
    if m == 0 {
        return Err(Error::InvalidDimension("m must be at least 1".into()));
    }
    if n < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {n}"
        )));
    }
    let threshold_span = match kind {
        ConstantKind::Median => 0.0,
        ConstantKind::LeastSquares => {
            let scale = scale.ok_or(Error::MissingParameter("scale bound M"))?;
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::InvalidScale(scale));
            }
            2.0 * scale
        }
    };
    let mut u = vec![0.0; m];
    let mut acc = Moments::default();
    for _ in 0..n {
        fill_sphere(rng, &mut u);
        let x = match kind {
            ConstantKind::Median => u[0].abs(),
            ConstantKind::LeastSquares => {
                let v = rng.random::<f64>() * threshold_span;
                if u[0] >= v {
                    u[0]
                } else {
                    0.0
                }
            }
        };
        acc.push(x);
    }
    Ok(acc.estimate())
}

/// Componentwise Monte Carlo estimate of a vector-valued expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_samples: usize,
}

impl VectorEstimate {
    /// Largest `|mean_j - target_j| / std_error_j` over components.
    pub fn max_z_score(&self, target: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.std_error)
            .zip(target)
            .map(|((&mean, &se), &t)| {
                MonteCarloEstimate {
                    mean,
                    std_error: se,
                    n_samples: self.n_samples,
                }
                .z_score(t)
                .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Estimates `E[sign(<z,U>) U]` (median) or `E[1{<z,U> >= V} U]` with
/// `V ~ Unif[0, 2M]` (least-squares) over `n` sphere draws. `sign(0) = +1`.
pub fn estimate_reconstruction<R: Rng + ?Sized>(
    rng: &mut R,
    z: &[f64],
    kind: ConstantKind,
    scale: Option<f64>,
    n: usize,
) -> Result<VectorEstimate> {
    let m = z.len();
    if m == 0 {
        return Err(Error::InvalidDimension("z must be nonempty".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let span = match kind {
        ConstantKind::Median => 0.0,
        ConstantKind::LeastSquares => {
            let scale = scale.ok_or(Error::MissingParameter("scale bound M"))?;
            if !(scale > 0.0) {
                return Err(Error::InvalidScale(scale));
            }
            2.0 * scale
        }
    };
    let mut u = vec![0.0; m];
    let mut acc = vec![Moments::default(); m];
    for _ in 0..n {
        fill_sphere(rng, &mut u);
        let proj = dot(z, &u);
        let weight = match kind {
            ConstantKind::Median => {
                if proj >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            ConstantKind::LeastSquares => {
                let v = rng.random::<f64>() * span;
                if proj >= v {
                    1.0
                } else {
                    0.0
                }
            }
        };
        for (a, &c) in acc.iter_mut().zip(&u) {
            a.push(weight * c);
        }
    }
    let est: Vec<_> = acc.iter().map(Moments::estimate).collect();
    Ok(VectorEstimate {
        mean: est.iter().map(|e| e.mean).collect(),
        std_error: est.iter().map(|e| e.std_error).collect(),
        n_samples: n,
    })
}

/// Iteration cap of [`geometric_median`].
pub const WEISZFELD_MAX_ITER: usize = 100_000;

/// Weighted sum of distances `Σ w_i |θ - p_i|`.
pub fn median_objective(theta: &[f64], points: &[Vec<f64>], weights: &[f64]) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(p, &w)| w * distance(theta, p))
        .sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Weighted geometric median `argmin_θ Σ w_i |θ - p_i|` by Weiszfeld's
/// iteration with the Vardi–Zhang treatment of anchor points.
///
/// Data points satisfying their optimality condition are returned as is.
/// Otherwise stops when an iterate moves less than `tol`. When an iterate comes within
/// `tol` of an anchor `p_k`, the anchor is returned if the pull of the other
/// points at `p_k` has norm at most `w_k` (its optimality condition).
pub fn geometric_median(points: &[Vec<f64>], weights: &[f64], tol: f64) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("geometric median of no points".into()));
    }
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("weights are all zero".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }

    // a data point is the median iff the pull of the others has norm <= its weight;
    // testing this directly avoids Weiszfeld's slow approach to boundary anchors
    let mut pull = vec![0.0; dim];
    for (k, (pk, &wk)) in points.iter().zip(weights).enumerate() {
        if wk == 0.0 {
            continue;
        }
        pull.iter_mut().for_each(|x| *x = 0.0);
        let mut here = 0.0;
        for (i, (p, &w)) in points.iter().zip(weights).enumerate() {
            let d = distance(pk, p);
            if i == k || d < tol {
                here += w;
                continue;
            }
            for ((f, &c), &t) in pull.iter_mut().zip(p).zip(pk) {
                *f += w * (c - t) / d;
            }
        }
        if norm(&pull) <= here * (1.0 + 1e-12) + tol {
            return Ok(pk.clone());
        }
    }

    // weighted mean as starting point
    let mut theta = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        for (t, &c) in theta.iter_mut().zip(p) {
            *t += w * c / total;
        }
    }

    let mut numer = vec![0.0; dim];
    let mut force = vec![0.0; dim];
    let mut last_step = f64::INFINITY;
    for _ in 0..WEISZFELD_MAX_ITER {
        numer.iter_mut().for_each(|x| *x = 0.0);
        force.iter_mut().for_each(|x| *x = 0.0);
        let mut denom = 0.0;
        let mut anchor: Option<usize> = None;
        let mut anchor_weight = 0.0;
        for (k, (p, &w)) in points.iter().zip(weights).enumerate() {
            if w == 0.0 {
                continue;
            }
            let d = distance(&theta, p);
            if d < tol {
                // points closer than tol count as one anchor
                if anchor.is_none() {
                    anchor = Some(k);
                }
                anchor_weight += w;
                continue;
            }
            denom += w / d;
            for ((n, f), (&c, &t)) in numer.iter_mut().zip(force.iter_mut()).zip(p.iter().zip(&theta)) {
                *n += w * c / d;
                *f += w * (c - t) / d;
            }
        }

        if let Some(k) = anchor {
            let pull = norm(&force);
            if pull <= anchor_weight * (1.0 + 1e-12) + tol {
                return Ok(points[k].clone());
            }
        }
        if denom == 0.0 {
            // every weighted point sits at theta
            return Ok(theta);
        }

        let mut next: Vec<f64> = numer.iter().map(|n| n / denom).collect();
        if anchor_weight > 0.0 {
            let pull = norm(&force);
            let mix = (anchor_weight / pull).min(1.0);
            for (x, &t) in next.iter_mut().zip(&theta) {
                *x = (1.0 - mix) * *x + mix * t;
            }
        }
        last_step = distance(&next, &theta);
        theta = next;
        if last_step < tol {
            return Ok(snap_to_optimal_anchor(theta, points, weights, tol));
        }
    }
    Err(Error::NoConvergence {
        iterations: WEISZFELD_MAX_ITER,
        last_step,
        last_iterate: theta,
    })
}

/// Weiszfeld steps shrink near an optimal anchor; once the iteration stalls,
/// prefer the nearest anchor when its optimality condition holds and it does
/// not worsen the objective.
fn snap_to_optimal_anchor(theta: Vec<f64>, points: &[Vec<f64>], weights: &[f64], tol: f64) -> Vec<f64> {
    let Some((k, _)) = points
        .iter()
        .enumerate()
        .filter(|(k, _)| weights[*k] > 0.0)
        .map(|(k, p)| (k, distance(&theta, p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
    else {
        return theta;
    };
    let anchor = &points[k];
    let mut force = vec![0.0; anchor.len()];
    let mut anchor_weight = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        let d = distance(anchor, p);
        if d < tol {
            anchor_weight += w;
            continue;
        }
        for ((f, &c), &a) in force.iter_mut().zip(p).zip(anchor) {
            *f += w * (c - a) / d;
        }
    }
    if norm(&force) <= anchor_weight * (1.0 + 1e-12) + tol
        && median_objective(anchor, points, weights) <= median_objective(&theta, points, weights) + tol
    {
        anchor.clone()
    } else {
        theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn sphere_zero_dimension_is_rejected() {
        assert!(matches!(sample_sphere(&mut rng(0), 0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn sphere_in_one_dimension_is_two_points() {
        let mut r = rng(1);
        for _ in 0..200 {
            let u = sample_sphere(&mut r, 1).unwrap();
            assert!(u.coords() == [1.0] || u.coords() == [-1.0]);
        }
    }

    #[test]
    fn sphere_samples_have_unit_norm() {
        let mut r = rng(2);
        for _ in 0..1000 {
            let u = sample_sphere(&mut r, 5).unwrap();
            assert!((norm(u.coords()) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_mean_is_centered() {
        let mut r = rng(3);
        let n = 1_000_000;
        let mut sum = [0.0; 3];
        let mut u = [0.0; 3];
        for _ in 0..n {
            fill_sphere(&mut r, &mut u);
            for (s, c) in sum.iter_mut().zip(&u) {
                *s += c;
            }
        }
        for s in sum {
            assert!((s / n as f64).abs() < 4e-3);
        }
    }

    #[test]
    fn sphere_is_deterministic_per_seed() {
        let a = sample_sphere(&mut rng(9), 7).unwrap();
        let b = sample_sphere(&mut rng(9), 7).unwrap();
        assert_eq!(a.coords(), b.coords());
    }

    #[test]
    fn c2_closed_form_values() {
        assert_eq!(c2_constant(1).unwrap(), 1.0);
        assert!((c2_constant(2).unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!((c2_constant(3).unwrap() - 0.5).abs() < 1e-15);
        // m = 5: Γ(5/2)/(√π Γ(3)) = (3/4)√π/(2√π) = 3/8
        assert!((c2_constant(5).unwrap() - 0.375).abs() < 1e-15);
        // m = 4: Γ(2)/(√π Γ(5/2)) = 4/(3π)
        assert!((c2_constant(4).unwrap() - 4.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!(c2_constant(0).is_err());
    }

    #[test]
    fn c1_closed_form_values() {
        assert_eq!(c1_constant(1, 1.0).unwrap(), 0.25);
        let ratio = c1_constant(3, 2.0).unwrap() / c1_constant(3, 1.0).unwrap();
        assert_eq!(ratio, 0.5);
        assert!(matches!(c1_constant(3, 0.0), Err(Error::InvalidScale(_))));
        assert!(matches!(c1_constant(3, -1.0), Err(Error::InvalidScale(_))));
    }

    #[test]
    fn mc_median_in_one_dimension_is_exact() {
        let est = estimate_constant_mc(&mut rng(4), 1, None, ConstantKind::Median, 5000).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn mc_median_m3() {
        let est = estimate_constant_mc(&mut rng(5), 3, None, ConstantKind::Median, 1_000_000).unwrap();
        assert!(est.agrees_with(0.5, 3.0), "{est:?}");
    }

    #[test]
    fn mc_least_squares_m1() {
        let est =
            estimate_constant_mc(&mut rng(6), 1, Some(1.0), ConstantKind::LeastSquares, 1_000_000).unwrap();
        assert!(est.agrees_with(0.25, 3.0), "{est:?}");
    }

    #[test]
    fn mc_least_squares_m3_matches_closed_form() {
        let est =
            estimate_constant_mc(&mut rng(7), 3, Some(1.0), ConstantKind::LeastSquares, 1_000_000).unwrap();
        assert!(est.agrees_with(c1_constant(3, 1.0).unwrap(), 4.0), "{est:?}");
    }

    #[test]
    fn mc_argument_errors() {
        assert!(matches!(
            estimate_constant_mc(&mut rng(0), 3, None, ConstantKind::LeastSquares, 5000),
            Err(Error::MissingParameter(_))
        ));
        assert!(estimate_constant_mc(&mut rng(0), 3, None, ConstantKind::Median, 999).is_err());
    }

    #[test]
    fn std_error_shrinks_like_inverse_sqrt_n() {
        let a = estimate_constant_mc(&mut rng(8), 3, None, ConstantKind::Median, 10_000).unwrap();
        let b = estimate_constant_mc(&mut rng(8), 3, None, ConstantKind::Median, 1_000_000).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio - 10.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn median_of_single_point() {
        let p = vec![vec![0.3, -1.2, 4.0]];
        assert_eq!(geometric_median(&p, &[1.0], 1e-9).unwrap(), p[0]);
    }

    fn simplex() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]
    }

    #[test]
    fn median_of_simplex_vertices_is_centroid() {
        let tol = 1e-10;
        let theta = geometric_median(&simplex(), &[1.0, 1.0, 1.0], tol).unwrap();
        for t in theta {
            assert!((t - 1.0 / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn median_boundary_weights_land_on_vertex() {
        let tol = 1e-7;
        let w3 = 2.0 * (std::f64::consts::PI / 6.0).cos();
        let theta = geometric_median(&simplex(), &[1.0, 1.0, w3], tol).unwrap();
        let err = distance(&theta, &[0.0, 0.0, 1.0]);
        assert!(err <= 10.0 * tol, "{theta:?} err {err}");
    }

    #[test]
    fn median_dominant_weight_is_that_vertex() {
        let theta = geometric_median(&simplex(), &[1.0, 1.0, 5.0], 1e-9).unwrap();
        assert_eq!(theta, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn median_argument_errors() {
        assert!(geometric_median(&[], &[], 1e-6).is_err());
        assert!(geometric_median(&simplex(), &[0.0, 0.0, 0.0], 1e-6).is_err());
        assert!(geometric_median(&simplex(), &[1.0, -1.0, 1.0], 1e-6).is_err());
        assert!(geometric_median(&simplex(), &[1.0, 1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn median_collinear_points() {
        // 1-D median of {0, 1, 5} with unit weights is 1
        let pts = vec![vec![0.0], vec![1.0], vec![5.0]];
        let theta = geometric_median(&pts, &[1.0, 1.0, 1.0], 1e-10).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-8, "{theta:?}");
    }
}
