//! Experiment configuration: flat `key = value` files with `#` comments.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    SinRegression,
    AnchorClassification,
    Libsvm,
    CsvRegression,
    Constants,
    Game,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    ActiveMedian,
    ActiveLeastSquares,
    Passive,
    FullSgd,
    InfimumLoss,
    CoordinatePassive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `M / (κ √T)`
    Horizon,
    /// `γ0 / √t`
    Decaying,
    /// `γ0`
    Constant,
}

macro_rules! named {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }
        impl FromStr for $ty {
            type Err = CliError;
            fn from_str(s: &str) -> Result<Self, CliError> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(CliError::Validation(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        other,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named!(Task, "task",
    Task::SinRegression => "sin-regression",
    Task::AnchorClassification => "anchor-classification",
    Task::Libsvm => "libsvm",
    Task::CsvRegression => "csv-regression",
    Task::Constants => "constants",
    Task::Game => "game",
);

named!(Strategy, "strategy",
    Strategy::ActiveMedian => "active-median",
    Strategy::ActiveLeastSquares => "active-least-squares",
    Strategy::Passive => "passive",
    Strategy::FullSgd => "full-sgd",
    Strategy::InfimumLoss => "infimum-loss",
    Strategy::CoordinatePassive => "coordinate-passive",
);

named!(ScheduleKind, "schedule",
    ScheduleKind::Horizon => "horizon",
    ScheduleKind::Decaying => "decaying",
    ScheduleKind::Constant => "constant",
);

impl Task {
    pub fn is_classification(self) -> bool {
        matches!(self, Task::AnchorClassification | Task::Libsvm)
    }

    /// Strategies `run` accepts for this task.
    pub fn strategies(self) -> &'static [Strategy] {
        use Strategy::*;
        match self {
            Task::SinRegression | Task::CsvRegression => &[ActiveMedian, ActiveLeastSquares, Passive, FullSgd],
            Task::AnchorClassification => &[ActiveMedian, CoordinatePassive, InfimumLoss, FullSgd],
            Task::Libsvm => &[ActiveMedian, CoordinatePassive, InfimumLoss],
            Task::Constants | Task::Game => &[],
        }
    }
}

/// Every knob of a `run`. Unset optional fields take task-dependent defaults
/// when the experiment is built.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub strategy: Strategy,
    pub budget: usize,
    pub trials: usize,
    pub seed: u64,
    /// kernel bandwidth; LIBSVM runs default to `d / 5`, others to 0.2
    pub sigma: Option<f64>,
    pub schedule: ScheduleKind,
    pub gamma0: f64,
    pub lambda: f64,
    /// label bound `M`
    pub scale: f64,
    /// output dimension (regression) or number of classes (anchor task)
    pub m: usize,
    pub epsilon: f64,
    /// number of Nyström representers
    pub rank: usize,
    pub train_fraction: f64,
    pub input: Option<PathBuf>,
    /// target column names for CSV regression
    pub targets: Vec<String>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::SinRegression,
            strategy: Strategy::ActiveMedian,
            budget: 1024,
            trials: 100,
            seed: 0,
            sigma: None,
            schedule: ScheduleKind::Decaying,
            gamma0: 0.3,
            lambda: 0.0,
            scale: 1.0,
            m: 1,
            epsilon: 0.05,
            rank: 100,
            train_fraction: 2.0 / 3.0,
            input: None,
            targets: Vec::new(),
            output: None,
        }
    }
}

/// Canonical key order of serialized configs.
pub const KEYS: &[&str] = &[
    "task",
    "strategy",
    "budget",
    "trials",
    "seed",
    "sigma",
    "schedule",
    "gamma0",
    "lambda",
    "scale",
    "m",
    "epsilon",
    "rank",
    "train_fraction",
    "input",
    "targets",
    "output",
];

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Validation(format!("`{key}`: cannot parse `{value}`")))
}

impl ExperimentConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "task" => self.task = value.parse()?,
            "strategy" => self.strategy = value.parse()?,
            "budget" => self.budget = number(key, value)?,
            "trials" => self.trials = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "sigma" => self.sigma = Some(number(key, value)?),
            "schedule" => self.schedule = value.parse()?,
            "gamma0" => self.gamma0 = number(key, value)?,
            "lambda" => self.lambda = number(key, value)?,
            "scale" => self.scale = number(key, value)?,
            "m" => self.m = number(key, value)?,
            "epsilon" => self.epsilon = number(key, value)?,
            "rank" => self.rank = number(key, value)?,
            "train_fraction" => self.train_fraction = number(key, value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "targets" => {
                self.targets = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(CliError::Validation(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Textual form of one field, `None` when unset.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "task" => self.task.to_string(),
            "strategy" => self.strategy.to_string(),
            "budget" => self.budget.to_string(),
            "trials" => self.trials.to_string(),
            "seed" => self.seed.to_string(),
            "sigma" => self.sigma?.to_string(),
            "schedule" => self.schedule.to_string(),
            "gamma0" => self.gamma0.to_string(),
            "lambda" => self.lambda.to_string(),
            "scale" => self.scale.to_string(),
            "m" => self.m.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "rank" => self.rank.to_string(),
            "train_fraction" => self.train_fraction.to_string(),
            "input" => self.input.as_ref()?.display().to_string(),
            "targets" if self.targets.is_empty() => return None,
            "targets" => self.targets.join(","),
            "output" => self.output.as_ref()?.display().to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and
    /// everything after `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| CliError::Validation(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Every set key in canonical order, one `key = value` per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = self.get(key) {
                out.push_str(key);
                out.push_str(" = ");
                out.push_str(&v);
                out.push('\n');
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if matches!(self.task, Task::Constants | Task::Game) {
            return bad(format!("task `{}` has its own subcommand", self.task));
        }
        if !self.task.strategies().contains(&self.strategy) {
            let ok: Vec<&str> = self.task.strategies().iter().map(|s| s.name()).collect();
            return bad(format!(
                "strategy `{}` is not available for task `{}` (allowed: {})",
                self.strategy,
                self.task,
                ok.join(", ")
            ));
        }
        for (key, v) in [("budget", self.budget), ("trials", self.trials), ("m", self.m), ("rank", self.rank)] {
            if v == 0 {
                return bad(format!("`{key}` must be positive"));
            }
        }
        for (key, v) in [("gamma0", self.gamma0), ("scale", self.scale), ("sigma", self.sigma.unwrap_or(1.0))] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("`{key}` must be positive, got {v}"));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("`lambda` must be nonnegative, got {}", self.lambda));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("`train_fraction` must lie in (0, 1), got {}", self.train_fraction));
        }
        match self.task {
            Task::AnchorClassification => {
                if self.m < 3 {
                    return bad(format!("anchor task needs m >= 3, got {}", self.m));
                }
                if !(0.0..0.25).contains(&self.epsilon) {
                    return bad(format!("`epsilon` must lie in [0, 1/4), got {}", self.epsilon));
                }
            }
            Task::Libsvm | Task::CsvRegression if self.input.is_none() => {
                return bad(format!("task `{}` needs `input`", self.task));
            }
            _ => {}
        }
        if self.task == Task::CsvRegression && self.targets.is_empty() {
            return bad("task `csv-regression` needs `targets`".into());
        }
        if self.strategy == Strategy::Passive && self.task == Task::SinRegression && self.m != 1 {
            return bad("the passive threshold baseline is scalar; set m = 1".into());
        }
        Ok(())
    }
}
