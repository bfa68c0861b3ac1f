//! Library-level runs that cross module boundaries.

use active_labeling::data::{gen_anchor_task, gen_sin_regression, sin_target, AnchorTask};
use active_labeling::eval::{aggregate_trials, excess_risk_anchor, excess_risk_noiseless, loglog_slope, RISK_GRID};
use active_labeling::kernel::{select_representers, KernelModel, KernelSpec};
use active_labeling::learner::{power_of_two_grid, run_least_squares_sgd, run_median_sgd, StepSchedule};
use active_labeling::oracle::{Mode, QueryOracle};
use active_labeling::surrogate::run_active_classification;
use active_labeling::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sin_trial(seed: u64, budget: usize, least_squares: bool) -> Vec<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = gen_sin_regression(budget, &mut rng).unwrap();
    let reps = select_representers(data.features(), 50, &mut rng).unwrap();
    let model0 = KernelModel::zeros(reps, 1, KernelSpec::gaussian(0.2).unwrap(), 0.0).unwrap();
    let mut oracle = QueryOracle::regression(data.real_targets().unwrap().to_vec(), budget, Mode::Streaming).unwrap();
    let sched = StepSchedule::decaying(0.3).unwrap();
    let grid = power_of_two_grid(budget);
    let report = if least_squares {
        run_least_squares_sgd(data.features(), &mut oracle, &sched, model0, &mut rng, 1.0, &grid)
    } else {
        run_median_sgd(data.features(), &mut oracle, &sched, model0, &mut rng, &grid)
    }
    .unwrap();
    assert_eq!(report.queries_used, budget);
    report
        .checkpoints
        .iter()
        .map(|c| {
            let r = excess_risk_noiseless(&c.model, |x| sin_target(x, 1), RISK_GRID).unwrap();
            (c.budget_used, r)
        })
        .collect()
}

#[test]
fn median_sgd_on_sine_decreases_risk() {
    let runs: Vec<_> = (0..8).map(|s| sin_trial(s, 2048, false)).collect();
    let curve = aggregate_trials(&runs).unwrap();
    let first = curve.at(16).unwrap().mean_risk;
    let last = curve.at(2048).unwrap().mean_risk;
    assert!(last < 0.25 * first, "{first} -> {last}");
    assert!(loglog_slope(&curve, 64, 2048).unwrap() < -0.2);
}

#[test]
fn least_squares_sgd_on_sine_decreases_risk() {
    let runs: Vec<_> = (0..8).map(|s| sin_trial(s, 2048, true)).collect();
    let curve = aggregate_trials(&runs).unwrap();
    // the zero model sits at 2/pi
    assert!(curve.at(2048).unwrap().mean_risk < 0.3, "{:?}", curve.points.last());
}

#[test]
fn anchor_task_classifier_approaches_bayes() {
    let task = AnchorTask::new(5, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let budget = 4096;
    let data = gen_anchor_task(&task, budget, &mut rng).unwrap();
    let (labels, m) = data.classes().unwrap();
    let reps = select_representers(data.features(), 60, &mut rng).unwrap();
    let model0 = KernelModel::zeros(reps, m, KernelSpec::gaussian(0.2).unwrap(), 0.0).unwrap();
    let mut oracle = QueryOracle::classification(labels.to_vec(), m, budget, Mode::Streaming).unwrap();
    let sched = StepSchedule::decaying(0.3).unwrap();
    let before = excess_risk_anchor(&model0, &task, 1024).unwrap();
    let report =
        run_active_classification(data.features(), &mut oracle, &sched, model0, &mut rng, &[budget]).unwrap();
    let after = excess_risk_anchor(&report.averaged_model, &task, 1024).unwrap();
    assert!(before > 0.3, "{before}");
    assert!(after < 0.05, "{after}");
}

#[test]
fn streaming_budget_is_enforced_across_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let data = gen_sin_regression(10, &mut rng).unwrap();
    let model0 = KernelModel::zeros(data.features()[..3].to_vec(), 1, KernelSpec::gaussian(0.3).unwrap(), 0.0).unwrap();
    let mut oracle = QueryOracle::regression(data.real_targets().unwrap().to_vec(), 6, Mode::Streaming)
        .unwrap()
        .with_log();
    let sched = StepSchedule::constant(0.1).unwrap();
    run_median_sgd(data.features(), &mut oracle, &sched, model0.clone(), &mut rng, &[]).unwrap();
    assert_eq!(oracle.remaining(), 0);
    // a second run has nothing left to spend
    let r = run_median_sgd(data.features(), &mut oracle, &sched, model0, &mut rng, &[]).unwrap();
    assert_eq!(r.queries_used, 0);
    assert!(matches!(
        oracle.membership_query(6, &[1]),
        Err(Error::BudgetExhausted { .. }) | Err(Error::UnsupportedQuery(_))
    ));

    let mut csv = Vec::new();
    oracle.write_log_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,index,kind,cost");
    assert_eq!(lines.len(), 7);
    for (k, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{},{},", k + 1, k)), "{line}");
    }
}

#[test]
fn trained_model_survives_a_checkpoint_file() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = gen_sin_regression(256, &mut rng).unwrap();
    let reps = select_representers(data.features(), 20, &mut rng).unwrap();
    let model0 = KernelModel::zeros(reps, 1, KernelSpec::gaussian(0.2).unwrap(), 1e-3).unwrap();
    let mut oracle = QueryOracle::regression(data.real_targets().unwrap().to_vec(), 256, Mode::Streaming).unwrap();
    let sched = StepSchedule::horizon(1.0, 1.0, 256).unwrap();
    let report = run_median_sgd(data.features(), &mut oracle, &sched, model0, &mut rng, &[]).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    report.averaged_model.write_text(std::fs::File::create(&path).unwrap()).unwrap();
    let back = KernelModel::read_text(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, report.averaged_model);
    for x in [0.0, 0.37, 0.9] {
        assert_eq!(back.predict(&[x]).unwrap(), report.averaged_model.predict(&[x]).unwrap());
    }
}
