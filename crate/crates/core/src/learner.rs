//! Stochastic gradient drivers.
//!
//! All drivers share one loop: at step `t` pick a sample (index `t - 1` when
//! streaming, uniform when resampling), compute the kernel column at its
//! input, let the strategy ask its question and move the coefficients, then
//! fold the new coefficients into the running average. Checkpoints capture the
//! averaged model.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{dot, fill_sphere, norm, UnitVector};
use crate::kernel::{AveragedModel, KernelModel};
use crate::oracle::{Mode, QueryOracle};

/// Step size rule `γ(t)`, `t >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `γ = M / (κ √T)` for all steps.
    ConstantHorizon { scale: f64, kappa: f64, budget: usize },
    /// `γ(t) = γ0 / √t`.
    Decaying { gamma0: f64 },
    /// A fixed step.
    Constant { gamma: f64 },
}

impl StepSchedule {
    pub fn horizon(scale: f64, kappa: f64, budget: usize) -> Result<Self> {
        if !(scale > 0.0) || !(kappa > 0.0) || budget == 0 {
            return Err(Error::InvalidParameter(
                "constant step needs M > 0, κ > 0 and T >= 1".into(),
            ));
        }
        Ok(StepSchedule::ConstantHorizon { scale, kappa, budget })
    }

    pub fn decaying(gamma0: f64) -> Result<Self> {
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::InvalidParameter(format!("γ0 must be positive, got {gamma0}")));
        }
        Ok(StepSchedule::Decaying { gamma0 })
    }

    pub fn constant(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("γ must be positive, got {gamma}")));
        }
        Ok(StepSchedule::Constant { gamma })
    }

    pub fn step(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::ConstantHorizon { scale, kappa, budget } => scale / (kappa * (budget as f64).sqrt()),
            StepSchedule::Decaying { gamma0 } => gamma0 / (t.max(1) as f64).sqrt(),
            StepSchedule::Constant { gamma } => gamma,
        }
    }
}

/// Averaged model after `budget_used` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub budget_used: usize,
    pub model: KernelModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub final_model: KernelModel,
    pub averaged_model: KernelModel,
    /// sorted by `budget_used`
    pub checkpoints: Vec<Checkpoint>,
    pub queries_used: usize,
}

/// Powers of two up to `budget`, plus `budget` itself.
pub fn power_of_two_grid(budget: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut t = 1usize;
    while t <= budget {
        grid.push(t);
        t = match t.checked_mul(2) {
            Some(v) => v,
            None => break,
        };
    }
    if budget > 0 && grid.last() != Some(&budget) {
        grid.push(budget);
    }
    grid
}

/// What one step sees.
pub(crate) struct Step<'a> {
    pub index: usize,
    pub column: &'a [f64],
    pub gamma: f64,
}

/// Number of steps a run performs against `oracle`.
fn oracle_steps(inputs: &[Vec<f64>], oracle: &QueryOracle) -> Result<usize> {
    if inputs.len() != oracle.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: oracle.n_samples(),
            got: inputs.len(),
        });
    }
    Ok(match oracle.mode() {
        Mode::Streaming => oracle
            .remaining()
            .min(oracle.n_samples().saturating_sub(oracle.budget_used())),
        Mode::Resampling => oracle.remaining(),
    })
}

fn check_output_dim(model: &KernelModel, dim: usize) -> Result<()> {
    if model.output_dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: model.output_dim(),
        });
    }
    Ok(())
}

/// The shared SGD loop.
pub(crate) fn drive<R, F>(
    inputs: &[Vec<f64>],
    steps: usize,
    mode: Mode,
    first_index: usize,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
    mut step_fn: F,
) -> Result<TrainReport>
where
    R: Rng + ?Sized,
    F: FnMut(&mut KernelModel, &Step<'_>, &mut R) -> Result<()>,
{
    if let Some(&bad) = grid.iter().find(|&&g| g > steps) {
        return Err(Error::InvalidParameter(format!(
            "checkpoint {bad} exceeds the {steps} available steps"
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("checkpoint grid must be strictly increasing".into()));
    }
    if steps > 0 && inputs.is_empty() {
        return Err(Error::InvalidParameter("no inputs".into()));
    }

    let mut model = model0.clone();
    let mut avg = AveragedModel::for_model(&model);
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut next_cp = 0;
    if grid.first() == Some(&0) {
        checkpoints.push(Checkpoint {
            budget_used: 0,
            model: model0.clone(),
        });
        next_cp = 1;
    }

    for t in 1..=steps {
        let index = match mode {
            Mode::Streaming => first_index + t - 1,
            Mode::Resampling => rng.random_range(0..inputs.len()),
        };
        let column = model.kernel_column(&inputs[index])?;
        let step = Step {
            index,
            column: &column,
            gamma: schedule.step(t),
        };
        step_fn(&mut model, &step, rng)?;
        avg.accumulate(&model)?;
        if next_cp < grid.len() && grid[next_cp] == t {
            checkpoints.push(Checkpoint {
                budget_used: t,
                model: avg.to_model(&model0)?,
            });
            next_cp += 1;
        }
    }

    Ok(TrainReport {
        averaged_model: avg.to_model(&model0)?,
        final_model: model,
        checkpoints,
        queries_used: 0,
    })
}

/// Runs a strategy that talks to the oracle and records the budget it spent.
pub(crate) fn drive_oracle<R, F>(
    inputs: &[Vec<f64>],
    oracle: &mut QueryOracle,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
    mut step_fn: F,
) -> Result<TrainReport>
where
    R: Rng + ?Sized,
    F: FnMut(&mut KernelModel, &Step<'_>, &mut QueryOracle, &mut R) -> Result<()>,
{
    check_output_dim(&model0, oracle.label_dim())?;
    let steps = oracle_steps(inputs, oracle)?;
    let start = oracle.budget_used();
    let mode = oracle.mode();
    let mut report = drive(inputs, steps, mode, start, schedule, model0, rng, grid, |model, step, rng| {
        step_fn(model, step, oracle, rng)
    })?;
    report.queries_used = oracle.budget_used() - start;
    Ok(report)
}

/// Median regression from half-space queries: per step draw `U` uniform on
/// the sphere, ask `ε = sign(<Y - f(X), U>)` and move
/// `a ← a + γ ε (U_j k(X, x_i))_ij`.
pub fn run_median_sgd<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    oracle: &mut QueryOracle,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
) -> Result<TrainReport> {
    let m = model0.output_dim();
    let mut u = vec![0.0; m];
    drive_oracle(inputs, oracle, schedule, model0, rng, grid, |model, step, oracle, rng| {
        fill_sphere(rng, &mut u);
        let direction = UnitVector::from_unit(u.clone());
        let z = model.predict_from_column(step.column);
        let eps = oracle.halfspace_query(step.index, &z, &direction)?;
        model.update_from_column(step.column, direction.coords(), eps.value() * step.gamma, step.gamma);
        Ok(())
    })
}

/// Least-squares regression from threshold queries: per step draw `U` on the
/// sphere and `V ~ Unif[0, 2M]`, ask `b = 1{<Y, U> < <f(X), U> - V}` and
/// move `a ← a - γ b (U_j k(X, x_i))_ij`.
///
/// Unbiased for the least-squares gradient (up to `c1`) only while
/// `|f(X) - Y| <= 2M`; the caller is responsible for that bound.
pub fn run_least_squares_sgd<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    oracle: &mut QueryOracle,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    scale: f64,
    grid: &[usize],
) -> Result<TrainReport> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidScale(scale));
    }
    let m = model0.output_dim();
    let mut u = vec![0.0; m];
    drive_oracle(inputs, oracle, schedule, model0, rng, grid, |model, step, oracle, rng| {
        fill_sphere(rng, &mut u);
        let v = rng.random::<f64>() * 2.0 * scale;
        let direction = UnitVector::from_unit(u.clone());
        let z = model.predict_from_column(step.column);
        let c = dot(&z, &u) - v;
        if oracle.threshold_query(step.index, &direction, c)? {
            model.update_from_column(step.column, &u, -step.gamma, step.gamma);
        } else {
            model.shrink(step.gamma);
        }
        Ok(())
    })
}

/// Fully supervised subgradient descent on `|f(X) - Y|` with visible labels.
/// The subgradient at `f(X) = Y` is taken as zero.
///
/// `steps` samples are visited in order when `mode` is streaming (capped at the
/// number of samples) or drawn uniformly with replacement when resampling.
pub fn run_full_sgd<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    labels: &[Vec<f64>],
    steps: usize,
    mode: Mode,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
) -> Result<TrainReport> {
    if inputs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: labels.len(),
        });
    }
    if let Some(l) = labels.iter().find(|l| l.len() != model0.output_dim()) {
        return Err(Error::DimensionMismatch {
            expected: model0.output_dim(),
            got: l.len(),
        });
    }
    let steps = match mode {
        Mode::Streaming => steps.min(inputs.len()),
        Mode::Resampling => steps,
    };
    let mut resid = vec![0.0; model0.output_dim()];
    drive(inputs, steps, mode, 0, schedule, model0, rng, grid, |model, step, _| {
        let f = model.predict_from_column(step.column);
        for ((r, a), b) in resid.iter_mut().zip(&f).zip(&labels[step.index]) {
            *r = a - b;
        }
        let n = norm(&resid);
        if n > 0.0 {
            resid.iter_mut().for_each(|r| *r /= n);
            model.update_from_column(step.column, &resid, -step.gamma, step.gamma);
        } else {
            model.shrink(step.gamma);
        }
        Ok(())
    })
}

/// Passive scalar baseline: per step draw a threshold `v ~ N(0, 1)`, learn
/// `1{Y > v}`, and take a subgradient step on `inf_{y ∈ S} |f(X) - y|` where
/// `S` is the observed half-line. No move when `f(X)` already lies in `S`.
pub fn run_passive_median<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    oracle: &mut QueryOracle,
    schedule: &StepSchedule,
    model0: KernelModel,
    rng: &mut R,
    grid: &[usize],
) -> Result<TrainReport> {
    if model0.output_dim() != 1 || oracle.label_dim() != 1 {
        return Err(Error::Unsupported(format!(
            "passive threshold baseline is scalar; got output dimension {}",
            oracle.label_dim().max(model0.output_dim())
        )));
    }
    let e1 = UnitVector::basis(1, 0)?;
    drive_oracle(inputs, oracle, schedule, model0, rng, grid, |model, step, oracle, rng| {
        let v: f64 = rng.sample(StandardNormal);
        let above = !oracle.threshold_query(step.index, &e1, v)?;
        let f = model.predict_from_column(step.column)[0];
        if above && f < v {
            model.update_from_column(step.column, &[1.0], step.gamma, step.gamma);
        } else if !above && f > v {
            model.update_from_column(step.column, &[1.0], -step.gamma, step.gamma);
        } else {
            model.shrink(step.gamma);
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::c1_constant;
    use crate::kernel::KernelSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn model(reps: Vec<Vec<f64>>, m: usize) -> KernelModel {
        KernelModel::zeros(reps, m, KernelSpec::gaussian(0.2).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn schedules() {
        let c = StepSchedule::horizon(2.0, 1.0, 16).unwrap();
        assert_eq!(c.step(1), 0.5);
        assert_eq!(c.step(16), 0.5);
        let d = StepSchedule::decaying(1.0).unwrap();
        assert_eq!(d.step(4), 0.5);
        assert_eq!(d.step(1), 1.0);
        assert!(StepSchedule::decaying(0.0).is_err());
        assert!(StepSchedule::horizon(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn grid_is_powers_of_two_and_budget() {
        assert_eq!(power_of_two_grid(0), Vec::<usize>::new());
        assert_eq!(power_of_two_grid(8), vec![1, 2, 4, 8]);
        assert_eq!(power_of_two_grid(30), vec![1, 2, 4, 8, 16, 30]);
    }

    #[test]
    fn zero_budget_leaves_model() {
        let m0 = model(vec![vec![0.0], vec![0.5]], 1);
        let mut oracle = QueryOracle::regression(vec![vec![1.0], vec![2.0]], 0, Mode::Streaming).unwrap();
        let sched = StepSchedule::decaying(1.0).unwrap();
        let inputs = vec![vec![0.0], vec![0.5]];
        let r = run_median_sgd(&inputs, &mut oracle, &sched, m0.clone(), &mut rng(0), &[]).unwrap();
        assert_eq!(r.final_model, m0);
        assert_eq!(r.averaged_model, m0);
        assert_eq!(r.queries_used, 0);
        let r = run_least_squares_sgd(&inputs, &mut oracle, &sched, m0.clone(), &mut rng(0), 1.0, &[]).unwrap();
        assert_eq!(r.final_model, m0);
        let r = run_passive_median(&inputs, &mut oracle, &sched, m0.clone(), &mut rng(0), &[0]).unwrap();
        assert_eq!(r.final_model, m0);
        assert_eq!(r.checkpoints.len(), 1);
    }

    #[test]
    fn one_scalar_step_moves_toward_label() {
        // m = 1: U ∈ {±1} and ε U = sign(Y - 0) = +1 whatever U is
        for seed in 0..20 {
            let m0 = model(vec![vec![0.3]], 1);
            let mut oracle = QueryOracle::regression(vec![vec![0.7]], 1, Mode::Streaming).unwrap();
            let sched = StepSchedule::decaying(0.8).unwrap();
            let r = run_median_sgd(&[vec![0.3]], &mut oracle, &sched, m0, &mut rng(seed), &[1]).unwrap();
            assert_eq!(r.final_model.coefficient(0, 0), 0.8);
            assert_eq!(r.queries_used, 1);
        }
    }

    #[test]
    fn checkpoint_beyond_budget_is_rejected() {
        let m0 = model(vec![vec![0.0]], 1);
        let mut oracle = QueryOracle::regression(vec![vec![1.0]; 4], 4, Mode::Streaming).unwrap();
        let sched = StepSchedule::decaying(1.0).unwrap();
        let inputs = vec![vec![0.0]; 4];
        assert!(run_median_sgd(&inputs, &mut oracle, &sched, m0.clone(), &mut rng(0), &[2, 8]).is_err());
        assert!(run_median_sgd(&inputs, &mut oracle, &sched, m0, &mut rng(0), &[2, 1]).is_err());
        assert_eq!(oracle.budget_used(), 0);
    }

    #[test]
    fn budget_is_min_of_budget_and_data() {
        let inputs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0]).collect();
        let labels: Vec<Vec<f64>> = inputs.iter().map(|x| vec![x[0].sin(), 0.5]).collect();
        let sched = StepSchedule::decaying(1.0).unwrap();
        for budget in [3usize, 10, 25] {
            let mut oracle = QueryOracle::regression(labels.clone(), budget, Mode::Streaming).unwrap();
            let r = run_median_sgd(&inputs, &mut oracle, &sched, model(inputs.clone(), 2), &mut rng(1), &[]).unwrap();
            assert_eq!(r.queries_used, budget.min(10));
            let mut oracle = QueryOracle::regression(labels.clone(), budget, Mode::Resampling).unwrap();
            let r = run_least_squares_sgd(&inputs, &mut oracle, &sched, model(inputs.clone(), 2), &mut rng(1), 1.0, &[])
                .unwrap();
            assert_eq!(r.queries_used, budget);
        }
    }

    #[test]
    fn least_squares_zero_bit_keeps_model() {
        // label far below the prediction direction can never give b = 1 when
        // <Y, U> >= <f, U> - V always: f = 0, Y = 0, V > 0 ⇒ b = 1{0 < -V} = 0
        let m0 = model(vec![vec![0.0]], 2);
        let mut oracle = QueryOracle::regression(vec![vec![0.0, 0.0]; 50], 50, Mode::Streaming).unwrap();
        let sched = StepSchedule::constant(0.5).unwrap();
        let r = run_least_squares_sgd(&vec![vec![0.0]; 50], &mut oracle, &sched, m0.clone(), &mut rng(3), 1.0, &[])
            .unwrap();
        assert_eq!(r.final_model, m0);
        assert_eq!(r.queries_used, 50);
    }

    #[test]
    fn least_squares_direction_is_c1_scaled_residual() {
        // Monte Carlo mean of b U over (U, V) equals c1 (f - y)
        let mut r = rng(4);
        let m = 3;
        let f = [0.4, -0.2, 0.1];
        let y = [-0.3, 0.5, 0.2];
        let scale = 1.0;
        let n = 1_000_000;
        let mut u = vec![0.0; m];
        let mut sum = vec![0.0; m];
        let mut sumsq = vec![0.0; m];
        for _ in 0..n {
            fill_sphere(&mut r, &mut u);
            let v = r.random::<f64>() * 2.0 * scale;
            let b = dot(&y, &u) < dot(&f, &u) - v;
            if b {
                for j in 0..m {
                    sum[j] += u[j];
                    sumsq[j] += u[j] * u[j];
                }
            }
        }
        let c1 = c1_constant(m, scale).unwrap();
        for j in 0..m {
            let mean = sum[j] / n as f64;
            let se = ((sumsq[j] / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((mean - c1 * (f[j] - y[j])).abs() <= 4.0 * se, "{j}: {mean}");
        }
    }

    #[test]
    fn full_sgd_fixed_point_and_scalar_direction() {
        let inputs = vec![vec![0.0], vec![0.5]];
        let sched = StepSchedule::constant(0.3).unwrap();
        let m0 = model(inputs.clone(), 1);
        // labels equal to the zero prediction: never moves
        let r = run_full_sgd(&inputs, &[vec![0.0], vec![0.0]], 2, Mode::Streaming, &sched, m0.clone(), &mut rng(0), &[])
            .unwrap();
        assert_eq!(r.final_model, m0);

        // one step, f = 0 > y = -1: direction -sign(f - y) k-column = -(k)
        let r = run_full_sgd(&inputs[..1], &[vec![-1.0]], 1, Mode::Streaming, &sched, m0.clone(), &mut rng(0), &[])
            .unwrap();
        let column = m0.kernel_column(&inputs[0]).unwrap();
        for i in 0..2 {
            assert_eq!(r.final_model.coefficient(i, 0), -0.3 * column[i]);
        }
    }

    #[test]
    fn passive_rules() {
        let inputs = vec![vec![0.0]];
        let sched = StepSchedule::constant(0.5).unwrap();
        let m0 = model(inputs.clone(), 1);
        // Y = 10: always above any plausible threshold; f = 0 moves up iff v > 0
        for seed in 0..30 {
            let mut r = rng(seed);
            let mut probe = r.clone();
            let v: f64 = probe.sample(StandardNormal);
            let mut oracle = QueryOracle::regression(vec![vec![10.0]], 1, Mode::Streaming).unwrap();
            let out = run_passive_median(&inputs, &mut oracle, &sched, m0.clone(), &mut r, &[]).unwrap();
            let expected = if v > 0.0 { 0.5 } else { 0.0 };
            assert_eq!(out.final_model.coefficient(0, 0), expected, "v = {v}");
        }
        let two = model(inputs.clone(), 2);
        let mut oracle = QueryOracle::regression(vec![vec![1.0, 1.0]], 1, Mode::Streaming).unwrap();
        assert!(matches!(
            run_passive_median(&inputs, &mut oracle, &sched, two, &mut rng(0), &[]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn runs_are_reproducible() {
        let inputs: Vec<Vec<f64>> = (0..64).map(|i| vec![(i as f64 * 0.37) % 1.0]).collect();
        let labels: Vec<Vec<f64>> = inputs.iter().map(|x| vec![(6.28 * x[0]).sin(), x[0]]).collect();
        let sched = StepSchedule::decaying(1.0).unwrap();
        let run = |seed| {
            let mut oracle = QueryOracle::regression(labels.clone(), 64, Mode::Streaming).unwrap();
            run_median_sgd(&inputs, &mut oracle, &sched, model(inputs[..8].to_vec(), 2), &mut rng(seed), &[8, 64])
                .unwrap()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5).final_model, run(6).final_model);
    }

    #[test]
    fn averaged_model_is_mean_of_iterates() {
        let inputs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 / 5.0]).collect();
        let labels: Vec<Vec<f64>> = inputs.iter().map(|x| vec![x[0] + 0.3]).collect();
        let sched = StepSchedule::decaying(1.0).unwrap();
        let m0 = model(inputs.clone(), 1);
        let mut sum = vec![0.0; 5];
        for t in 1..=5 {
            let r = run_full_sgd(&inputs, &labels, t, Mode::Streaming, &sched, m0.clone(), &mut rng(0), &[]).unwrap();
            for (s, a) in sum.iter_mut().zip(r.final_model.coefficients()) {
                *s += a;
            }
        }
        let r = run_full_sgd(&inputs, &labels, 5, Mode::Streaming, &sched, m0, &mut rng(0), &[5]).unwrap();
        for (s, a) in sum.iter().zip(r.averaged_model.coefficients()) {
            assert!((s / 5.0 - a).abs() < 1e-14);
        }
        assert_eq!(r.checkpoints[0].model, r.averaged_model);
    }
}
