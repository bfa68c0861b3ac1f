//! Seeded multi-trial experiments and their artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use active_labeling::data::{
    gen_anchor_task, gen_phase_sin_regression, parse_csv_regression, parse_libsvm, sin_target, split, standardize,
    AnchorTask, LabeledDataset, SplitSpec, Targets,
};
use active_labeling::eval::{
    aggregate_trials, emit_csv, empirical_risk, excess_risk_anchor, excess_risk_noiseless, render_svg, Axes, Loss,
    RiskCurve, RISK_GRID,
};
use active_labeling::kernel::{select_representers, KernelModel, KernelSpec};
use active_labeling::learner::{
    power_of_two_grid, run_full_sgd, run_least_squares_sgd, run_median_sgd, run_passive_median, StepSchedule,
    TrainReport,
};
use active_labeling::oracle::{Mode, QueryOracle};
use active_labeling::surrogate::{
    infimum_loss_sgd, run_active_classification, run_passive_classification, RandomSetGenerator,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ScheduleKind, Strategy, Task};
use crate::CliError;

/// Grid resolution for the anchor task's excess risk.
pub const ANCHOR_GRID: usize = 4096;

/// Default kernel bandwidth of the synthetic tasks.
pub const SYNTHETIC_SIGMA: f64 = 0.2;

/// Data shared by every trial.
#[derive(Debug, Clone)]
pub enum Source {
    Sin,
    Anchor(AnchorTask),
    Dataset(LabeledDataset),
}

impl Source {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        Ok(match cfg.task {
            Task::SinRegression => Source::Sin,
            Task::AnchorClassification => Source::Anchor(AnchorTask::new(cfg.m, cfg.epsilon)?),
            Task::Libsvm | Task::CsvRegression => {
                let path = cfg.input.as_ref().ok_or_else(|| CliError::Validation("missing `input`".into()))?;
                let file = fs::File::open(path)
                    .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
                let reader = std::io::BufReader::new(file);
                let data = if cfg.task == Task::Libsvm {
                    parse_libsvm(reader)
                } else {
                    let names: Vec<&str> = cfg.targets.iter().map(String::as_str).collect();
                    parse_csv_regression(reader, &names)
                }
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
                Source::Dataset(data)
            }
            Task::Constants | Task::Game => {
                return Err(CliError::Validation(format!("task `{}` has its own subcommand", cfg.task)))
            }
        })
    }
}

fn schedule(cfg: &ExperimentConfig, kappa: f64) -> Result<StepSchedule, CliError> {
    Ok(match cfg.schedule {
        ScheduleKind::Horizon => StepSchedule::horizon(cfg.scale, kappa, cfg.budget)?,
        ScheduleKind::Decaying => StepSchedule::decaying(cfg.gamma0)?,
        ScheduleKind::Constant => StepSchedule::constant(cfg.gamma0)?,
    })
}

/// RNG of trial `trial`: seeded with `seed + trial`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

/// Trains on `train` with the configured strategy. Synthetic tasks stream
/// through their samples; dataset tasks resample so the budget may exceed `n`.
fn train(
    cfg: &ExperimentConfig,
    train: &LabeledDataset,
    mode: Mode,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<TrainReport, CliError> {
    let inputs = train.features();
    let reps = select_representers(inputs, cfg.rank.min(inputs.len()), rng)?;
    let spec = KernelSpec::gaussian(sigma)?;
    let model0 = KernelModel::zeros(reps, train.output_dim(), spec, cfg.lambda)?;
    let sched = schedule(cfg, spec.kappa())?;
    let grid = power_of_two_grid(cfg.budget);
    let mut oracle = match train.targets() {
        Targets::Real(ys) => QueryOracle::regression(ys.clone(), cfg.budget, mode)?,
        Targets::Classes { labels, n_classes, .. } => {
            QueryOracle::classification(labels.clone(), *n_classes, cfg.budget, mode)?
        }
    };
    if mode == Mode::Streaming && inputs.len() < cfg.budget {
        return Err(CliError::Runtime(format!(
            "streaming run needs {} samples, have {}",
            cfg.budget,
            inputs.len()
        )));
    }
    let report = match (cfg.strategy, cfg.task.is_classification()) {
        (Strategy::ActiveMedian, false) => run_median_sgd(inputs, &mut oracle, &sched, model0, rng, &grid)?,
        (Strategy::ActiveMedian, true) => {
            run_active_classification(inputs, &mut oracle, &sched, model0, rng, &grid)?
        }
        (Strategy::ActiveLeastSquares, _) => {
            run_least_squares_sgd(inputs, &mut oracle, &sched, model0, rng, cfg.scale, &grid)?
        }
        (Strategy::Passive, _) => run_passive_median(inputs, &mut oracle, &sched, model0, rng, &grid)?,
        (Strategy::CoordinatePassive, _) => {
            run_passive_classification(inputs, &mut oracle, &sched, model0, rng, &grid)?
        }
        (Strategy::InfimumLoss, _) => {
            let sets = RandomSetGenerator::new(train.output_dim())?;
            infimum_loss_sgd(inputs, &sets, &mut oracle, &sched, model0, rng, &grid)?
        }
        (Strategy::FullSgd, _) => {
            let labels = train.embedded_targets();
            run_full_sgd(inputs, &labels, cfg.budget, mode, &sched, model0, rng, &grid)?
        }
    };
    Ok(report)
}

/// Risk after every checkpoint of one seeded trial.
pub fn run_trial(cfg: &ExperimentConfig, source: &Source, trial: usize) -> Result<Vec<(usize, f64)>, CliError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let risks = |report: TrainReport, risk: &dyn Fn(&KernelModel) -> active_labeling::Result<f64>| {
        report
            .checkpoints
            .iter()
            .map(|c| Ok((c.budget_used, risk(&c.model)?)))
            .collect::<Result<Vec<_>, CliError>>()
    };
    match source {
        Source::Sin => {
            let data = gen_phase_sin_regression(cfg.budget, cfg.m, &mut rng)?;
            let report = train(cfg, &data, Mode::Streaming, cfg.sigma.unwrap_or(SYNTHETIC_SIGMA), &mut rng)?;
            let m = cfg.m;
            risks(report, &|model| excess_risk_noiseless(model, |x| sin_target(x, m), RISK_GRID))
        }
        Source::Anchor(task) => {
            let data = gen_anchor_task(task, cfg.budget, &mut rng)?;
            let report = train(cfg, &data, Mode::Streaming, cfg.sigma.unwrap_or(SYNTHETIC_SIGMA), &mut rng)?;
            risks(report, &|model| excess_risk_anchor(model, task, ANCHOR_GRID))
        }
        Source::Dataset(data) => {
            let spec = SplitSpec {
                train_fraction: cfg.train_fraction,
                seed: cfg.seed.wrapping_add(trial as u64),
            };
            let (tr, te) = split(data, spec)?;
            let (tr, fit) = standardize(&tr)?;
            let te = fit.apply_dataset(&te);
            let sigma = cfg.sigma.unwrap_or(tr.n_features() as f64 / 5.0);
            let report = train(cfg, &tr, Mode::Resampling, sigma, &mut rng)?;
            let loss = if cfg.task.is_classification() {
                Loss::ZeroOne
            } else {
                Loss::AbsoluteDeviation
            };
            risks(report, &|model| empirical_risk(model, &te, loss))
        }
    }
}

/// Runs `cfg.trials` trials on at most `jobs` threads (all cores when
/// `None`). The curve does not depend on `jobs`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RiskCurve, CliError> {
    cfg.validate()?;
    let source = Source::load(cfg)?;
    let work = || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, &source, t))
            .collect::<Result<Vec<_>, CliError>>()
    };
    let runs = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(aggregate_trials(&runs)?)
}

pub fn manifest(cfg: &ExperimentConfig) -> String {
    format!(
        "# active-labeling {}\n# active-labeling-cli {}\n# trial i uses ChaCha8 seeded with seed + i\n{}",
        active_labeling::VERSION,
        env!("CARGO_PKG_VERSION"),
        cfg.serialize()
    )
}

pub const CURVE_CSV: &str = "curve.csv";
pub const CURVE_SVG: &str = "curve.svg";
pub const MANIFEST: &str = "manifest.txt";

/// Writes `curve.csv`, `curve.svg` and `manifest.txt` into `dir`. On failure
/// the files written so far are removed.
pub fn write_outputs(cfg: &ExperimentConfig, curve: &RiskCurve, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        let csv = dir.join(CURVE_CSV);
        written.push(csv.clone());
        emit_csv(curve, &csv)?;

        let svg_path = dir.join(CURVE_SVG);
        let curves = [(cfg.strategy.to_string(), curve.clone())];
        let axes = if curve.points.iter().any(|p| p.budget > 0 && p.mean_risk > 0.0) {
            Axes::LogLog
        } else {
            Axes::Linear
        };
        let svg = render_svg(&curves, axes)?;
        written.push(svg_path.clone());
        fs::write(&svg_path, svg).map_err(|e| CliError::Runtime(format!("{}: {e}", svg_path.display())))?;

        let man = dir.join(MANIFEST);
        written.push(man.clone());
        fs::write(&man, manifest(cfg)).map_err(|e| CliError::Runtime(format!("{}: {e}", man.display())))?;
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}
