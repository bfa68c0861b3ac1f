//! The `constants`, `game` and `verify` subcommands.

use std::fmt::Write as _;

use active_labeling::eval::{read_curve_csv, write_curve_csv, RiskCurve, RiskPoint};
use active_labeling::geometry::{
    c1_constant, c2_constant, estimate_constant_mc, estimate_reconstruction, geometric_median, sample_sphere,
    ConstantKind, MonteCarloEstimate,
};
use active_labeling::minmax::{build_game, singleton_family, solve_game_with, GameSolution, MatrixGame, Solver};
use active_labeling::surrogate::surrogate_target_check;
use rand::Rng;
use rayon::prelude::*;

use crate::experiment::trial_rng;
use crate::CliError;

/// Agreement threshold, in standard errors.
pub const K_SIGMA: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsRow {
    pub m: usize,
    pub c2_closed: f64,
    pub c2_mc: MonteCarloEstimate,
    pub c1_closed: f64,
    pub c1_mc: MonteCarloEstimate,
}

impl ConstantsRow {
    pub fn c2_agrees(&self) -> bool {
        self.c2_mc.agrees_with(self.c2_closed, K_SIGMA)
    }

    pub fn c1_agrees(&self) -> bool {
        self.c1_mc.agrees_with(self.c1_closed, K_SIGMA)
    }

    pub fn agrees(&self) -> bool {
        self.c2_agrees() && self.c1_agrees()
    }
}

/// Closed forms against Monte Carlo for each `m`. Row `k` draws from the
/// stream seeded with `seed + k`. `corrupt` perturbs the closed forms by 10%
/// so the verdict path can be exercised.
pub fn constants_table(
    ms: &[usize],
    scale: f64,
    n: usize,
    seed: u64,
    corrupt: bool,
) -> Result<Vec<ConstantsRow>, CliError> {
    let bump = if corrupt { 1.1 } else { 1.0 };
    ms.par_iter()
        .enumerate()
        .map(|(k, &m)| {
            let mut rng = trial_rng(seed, k);
            Ok(ConstantsRow {
                m,
                c2_closed: c2_constant(m)? * bump,
                c2_mc: estimate_constant_mc(&mut rng, m, None, ConstantKind::Median, n)?,
                c1_closed: c1_constant(m, scale)? * bump,
                c1_mc: estimate_constant_mc(&mut rng, m, Some(scale), ConstantKind::LeastSquares, n)?,
            })
        })
        .collect()
}

pub const CONSTANTS_HEADER: &str = "m,c2_closed,c2_mc,c2_stderr,c1_closed,c1_mc,c1_stderr,agree";

pub fn constants_csv(rows: &[ConstantsRow]) -> String {
    let mut s = String::from(CONSTANTS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.m, r.c2_closed, r.c2_mc.mean, r.c2_mc.std_error, r.c1_closed, r.c1_mc.mean, r.c1_mc.std_error, r.agrees()
        );
    }
    s
}

pub fn constants_table_text(rows: &[ConstantsRow]) -> String {
    let mut s = format!(
        "{:>4}  {:>10}  {:>22}  {:>10}  {:>22}  {}\n",
        "m", "c2", "c2 (MC)", "c1", "c1 (MC)", "verdict"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>4}  {:>10.6}  {:>10.6} ± {:<9.2e}  {:>10.6}  {:>10.6} ± {:<9.2e}  {}",
            r.m,
            r.c2_closed,
            r.c2_mc.mean,
            r.c2_mc.std_error,
            r.c1_closed,
            r.c1_mc.mean,
            r.c1_mc.std_error,
            if r.agrees() { "ok" } else { "MISMATCH" }
        );
    }
    s
}

/// `p = (.4, .3, .3)` with singleton queries.
pub fn counterexample() -> (Vec<f64>, Vec<Vec<usize>>) {
    (vec![0.4, 0.3, 0.3], singleton_family(3))
}

/// Parses `1;2,3` into `[[1], [2, 3]]`; `singletons` expands to all singletons.
pub fn parse_family(spec: &str, m: usize) -> Result<Vec<Vec<usize>>, CliError> {
    if spec.trim() == "singletons" {
        return Ok(singleton_family(m));
    }
    spec.split(';')
        .map(|set| {
            set.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Validation(format!("bad class `{c}` in family `{spec}`")))
                })
                .collect()
        })
        .collect()
}

pub fn parse_distribution(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad probability `{v}`")))
        })
        .collect()
}

pub fn solve(
    p: &[f64],
    family: &[Vec<usize>],
    solver: Solver,
    iterations: usize,
    tol: f64,
) -> Result<(MatrixGame, GameSolution), CliError> {
    let game = build_game(p, family).map_err(|e| CliError::Validation(e.to_string()))?;
    let sol = solve_game_with(&game, solver, iterations, tol)?;
    Ok((game, sol))
}

/// CSV rows `kind,label,value`.
pub fn game_csv(game: &MatrixGame, sol: &GameSolution) -> String {
    let mut s = String::from("kind,label,value\n");
    let _ = writeln!(s, "value,,{:.6}", sol.value);
    let _ = writeln!(s, "gap,,{:.3e}", sol.gap);
    for (set, w) in game.row_labels().iter().zip(&sol.row_strategy) {
        let label: Vec<String> = set.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "query,{{{}}},{:.6}", label.join(" "), w);
    }
    for (y, w) in game.col_labels().iter().zip(&sol.col_strategy) {
        let _ = writeln!(s, "prediction,{y},{w:.6}");
    }
    s
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<(bool, String), CliError>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Quick invariant suite: constants, reconstruction, geometric median,
/// surrogate consistency, the counter-example game and CSV round-trips.
pub fn verify_suite(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(check(
        "constants",
        constants_table(&[1, 2, 3, 10], 1.0, 200_000, seed, false).map(|rows| {
            let bad: Vec<usize> = rows.iter().filter(|r| !r.agrees()).map(|r| r.m).collect();
            (bad.is_empty(), format!("disagreeing m: {bad:?}"))
        }),
    ));
    out.push(check("reconstruction", (|| {
        let mut rng = trial_rng(seed, 1);
        let mut worst: f64 = 0.0;
        for m in [2, 3, 8] {
            let z = sample_sphere(&mut rng, m)?.into_inner();
            let e = estimate_reconstruction(&mut rng, &z, ConstantKind::Median, None, 100_000)?;
            let target: Vec<f64> = z.iter().map(|v| v * c2_constant(m).unwrap()).collect();
            worst = worst.max(e.max_z_score(&target));
        }
        Ok((worst <= K_SIGMA, format!("max z = {worst:.2}")))
    })()));
    out.push(check("geometric median", (|| {
        let c = 2.0 * (std::f64::consts::PI / 6.0).cos();
        let pts = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let th = geometric_median(&pts, &[1.0, 1.0, c], 1e-10)?;
        let d = th.iter().zip([0.0, 0.0, 1.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok((d <= 1e-4, format!("distance to e3 = {d:.2e}")))
    })()));
    out.push(check("surrogate consistency", (|| {
        let mut rng = trial_rng(seed, 2);
        let mut violations = 0;
        for k in 0..50 {
            let m = 2 + k % 3;
            let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|v| v / s).collect();
            if !surrogate_target_check(&p, 1e-6)?.passed() {
                violations += 1;
            }
        }
        Ok((violations == 0, format!("{violations} violations")))
    })()));
    out.push(check("counter-example game", (|| {
        let (p, fam) = counterexample();
        let (_, s) = solve(&p, &fam, Solver::Simplex, 1000, 1e-6)?;
        Ok(((s.value + 0.1).abs() <= 1e-3, format!("value = {:.6}", s.value)))
    })()));
    out.push(check("curve csv round trip", (|| {
        let curve = RiskCurve {
            points: vec![RiskPoint {
                budget: 64,
                mean_risk: 1.0 / 3.0,
                std_risk: 0.1,
                n_trials: 7,
            }],
        };
        let mut buf = Vec::new();
        write_curve_csv(&curve, &mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok((read_curve_csv(buf.as_slice())? == curve, String::new()))
    })()));
    out
}
