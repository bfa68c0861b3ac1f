//! Pointwise zero-sum game between a query player, who picks a set `S` of
//! classes, and a prediction player, who picks a distribution `v` over simplex
//! vertices.
//!
//! Rows maximize, columns minimize. The payoff of row `S` against column `y`
//! is `-(2 P(Y ∈ S) - 1) (1{y ∈ S} - 1{y ∉ S})`.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    payoff: Vec<Vec<f64>>,
    row_labels: Vec<Vec<usize>>,
    col_labels: Vec<usize>,
}

impl MatrixGame {
    /// A game from a raw payoff matrix. Rows are labelled by their index as a
    /// singleton set and columns by `1..=n_cols`.
    pub fn from_matrix(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let rows = payoff.len();
        let cols = payoff.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension("payoff matrix must be nonempty".into()));
        }
        if let Some(r) = payoff.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: r.len(),
            });
        }
        if payoff.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("payoff entries must be finite".into()));
        }
        Ok(Self {
            row_labels: (1..=rows).map(|i| vec![i]).collect(),
            col_labels: (1..=cols).collect(),
            payoff,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.payoff.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn payoff(&self) -> &[Vec<f64>] {
        &self.payoff
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.payoff[row][col]
    }

    pub fn row_labels(&self) -> &[Vec<usize>] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[usize] {
        &self.col_labels
    }

    /// `(A y)_i` for every row.
    pub fn row_payoffs(&self, col_strategy: &[f64]) -> Vec<f64> {
        self.payoff
            .iter()
            .map(|r| r.iter().zip(col_strategy).map(|(a, y)| a * y).sum())
            .collect()
    }

    /// `(x^T A)_j` for every column.
    pub fn col_payoffs(&self, row_strategy: &[f64]) -> Vec<f64> {
        (0..self.n_cols())
            .map(|j| self.payoff.iter().zip(row_strategy).map(|(r, x)| r[j] * x).sum())
            .collect()
    }

    /// Best row response against `y` minus best column response against `x`.
    pub fn duality_gap(&self, row_strategy: &[f64], col_strategy: &[f64]) -> f64 {
        let upper = self.row_payoffs(col_strategy).into_iter().fold(f64::NEG_INFINITY, f64::max);
        let lower = self.col_payoffs(row_strategy).into_iter().fold(f64::INFINITY, f64::min);
        upper - lower
    }
}

/// Payoff matrix for class distribution `p` and a family of sets (1-based).
pub fn build_game(p: &[f64], family: &[Vec<usize>]) -> Result<MatrixGame> {
    let m = p.len();
    check_distribution(p)?;
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty query family".into()));
    }
    let mut payoff = Vec::with_capacity(family.len());
    for set in family {
        let mut member = vec![false; m];
        for &y in set {
            if y == 0 || y > m {
                return Err(Error::IndexOutOfRange { index: y, len: m });
            }
            member[y - 1] = true;
        }
        let size = member.iter().filter(|&&b| b).count();
        if size == 0 || size == m {
            return Err(Error::TrivialSet { n_classes: m });
        }
        let mass: f64 = p.iter().zip(&member).filter(|(_, &b)| b).map(|(q, _)| q).sum();
        let w = -(2.0 * mass - 1.0);
        payoff.push(member.iter().map(|&b| if b { w } else { -w }).collect());
    }
    let mut sorted: Vec<Vec<usize>> = family.to_vec();
    sorted.iter_mut().for_each(|s| s.sort_unstable());
    Ok(MatrixGame {
        payoff,
        row_labels: sorted,
        col_labels: (1..=m).collect(),
    })
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::InvalidDimension("need at least two classes".into()));
    }
    if p.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("{p:?} is not a probability vector")));
    }
    Ok(())
}

/// All singletons `{1}, ..., {m}`.
pub fn singleton_family(m: usize) -> Vec<Vec<usize>> {
    (1..=m).map(|y| vec![y]).collect()
}

/// Uniformly random proper nonempty subset of `1..=m`.
pub fn random_proper_set<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (1..=m).filter(|_| rng.random::<bool>()).collect();
        if !s.is_empty() && s.len() < m {
            return s;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    /// `x^T A y`
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Exact LP with Bland's pivoting rule; `iterations` caps the pivots.
    #[default]
    Simplex,
    /// Hedge self-play with averaged strategies.
    MultiplicativeWeights,
}

/// Solves with the simplex method. Fails with [`Error::GapNotReached`] when
/// the duality gap exceeds `2 tol`.
pub fn solve_game(game: &MatrixGame, iterations: usize, tol: f64) -> Result<GameSolution> {
    solve_game_with(game, Solver::Simplex, iterations, tol)
}

pub fn solve_game_with(game: &MatrixGame, solver: Solver, iterations: usize, tol: f64) -> Result<GameSolution> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (x, y, iters) = match solver {
        Solver::Simplex => simplex(game, iterations)?,
        Solver::MultiplicativeWeights => hedge(game, iterations, tol),
    };
    let gap = game.duality_gap(&x, &y).max(0.0);
    if gap > 2.0 * tol {
        return Err(Error::GapNotReached { gap, target: 2.0 * tol });
    }
    let value = game.row_payoffs(&y).iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(GameSolution {
        value,
        row_strategy: x,
        col_strategy: y,
        gap,
        iterations: iters,
    })
}

const PIVOT_EPS: f64 = 1e-12;

/// With `B = A + c > 0`, the column player's problem is
/// `max 1^T y' s.t. B y' <= 1, y' >= 0`; the optimal duals give the row
/// strategy and `1 / 1^T y'` is the value of `B`.
fn simplex(game: &MatrixGame, max_pivots: usize) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let (r, c) = (game.n_rows(), game.n_cols());
    let min = game.payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let width = c + r + 1;
    // rows 0..r are constraints, row r is the objective
    let mut t = vec![vec![0.0; width]; r + 1];
    for i in 0..r {
        for j in 0..c {
            t[i][j] = game.payoff[i][j] + shift;
        }
        t[i][c + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    for j in 0..c {
        t[r][j] = -1.0;
    }
    let mut basis: Vec<usize> = (c..c + r).collect();

    let mut pivots = 0;
    loop {
        let Some(enter) = (0..c + r).find(|&j| t[r][j] < -PIVOT_EPS) else {
            break;
        };
        if pivots == max_pivots {
            return Err(Error::NoConvergence {
                iterations: pivots,
                last_step: t[r][enter],
                last_iterate: Vec::new(),
            });
        }
        let mut leave: Option<usize> = None;
        for i in 0..r {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][width - 1] / t[l][enter];
                        if ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        // B > 0 keeps the LP bounded, so some row always qualifies
        let leave = leave.expect("bounded LP");
        let pivot = t[leave][enter];
        t[leave].iter_mut().for_each(|v| *v /= pivot);
        let prow = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave && row[enter] != 0.0 {
                let f = row[enter];
                row.iter_mut().zip(&prow).for_each(|(v, p)| *v -= f * p);
            }
        }
        basis[leave] = enter;
        pivots += 1;
    }

    let total = t[r][width - 1];
    let mut y = vec![0.0; c];
    for (i, &b) in basis.iter().enumerate() {
        if b < c {
            y[b] = t[i][width - 1] / total;
        }
    }
    let x: Vec<f64> = (0..r).map(|i| t[r][c + i].max(0.0) / total).collect();
    Ok((normalize(x), normalize(y), pivots))
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|a| *a /= s);
    v
}

fn hedge(game: &MatrixGame, iterations: usize, tol: f64) -> (Vec<f64>, Vec<f64>, usize) {
    let (r, c) = (game.n_rows(), game.n_cols());
    let flat = game.payoff.iter().flatten();
    let range = flat.clone().copied().fold(f64::NEG_INFINITY, f64::max) - flat.copied().fold(f64::INFINITY, f64::min);
    let range = if range > 0.0 { range } else { 1.0 };
    let eta = (8.0 * (r.max(c) as f64).ln().max(1.0) / iterations as f64).sqrt() / range;

    let mut lx = vec![0.0; r];
    let mut ly = vec![0.0; c];
    let mut sx = vec![0.0; r];
    let mut sy = vec![0.0; c];
    let softmax = |l: &[f64], sign: f64| {
        let top = l.iter().map(|v| sign * v).fold(f64::NEG_INFINITY, f64::max);
        normalize(l.iter().map(|v| (eta * (sign * v - top)).exp()).collect())
    };
    for k in 1..=iterations {
        let x = softmax(&lx, 1.0);
        let y = softmax(&ly, -1.0);
        sx.iter_mut().zip(&x).for_each(|(s, v)| *s += v);
        sy.iter_mut().zip(&y).for_each(|(s, v)| *s += v);
        game.row_payoffs(&y).iter().zip(&mut lx).for_each(|(p, l)| *l += p);
        game.col_payoffs(&x).iter().zip(&mut ly).for_each(|(p, l)| *l += p);
        if k % 1024 == 0 || k == iterations {
            let (ax, ay) = (normalize(sx.clone()), normalize(sy.clone()));
            if game.duality_gap(&ax, &ay) <= 2.0 * tol || k == iterations {
                return (ax, ay, k);
            }
        }
    }
    unreachable!("loop returns at the final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linf(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn counterexample_matrix() {
        let g = build_game(&[0.4, 0.3, 0.3], &singleton_family(3)).unwrap();
        let expected = [[0.2, -0.2, -0.2], [-0.4, 0.4, -0.4], [-0.4, -0.4, 0.4]];
        for (row, e) in g.payoff().iter().zip(expected) {
            assert!(linf(row, &e) < 1e-15, "{row:?}");
        }
    }

    #[test]
    fn build_game_edge_cases() {
        let g = build_game(&[0.5, 0.25, 0.25], &[vec![1], vec![2, 3]]).unwrap();
        assert!(g.payoff().iter().all(|r| r.iter().all(|&v| v == 0.0)));
        let g = build_game(&[1.0, 0.0], &[vec![1]]).unwrap();
        assert_eq!(g.payoff()[0], vec![-1.0, 1.0]);
        assert!(matches!(build_game(&[0.5, 0.5], &[vec![1, 2]]), Err(Error::TrivialSet { .. })));
        assert!(build_game(&[0.5, 0.5], &[vec![]]).is_err());
        assert!(build_game(&[0.6, 0.6], &[vec![1]]).is_err());
    }

    #[test]
    fn counterexample_equilibrium() {
        let g = build_game(&[0.4, 0.3, 0.3], &singleton_family(3)).unwrap();
        for solver in [Solver::Simplex, Solver::MultiplicativeWeights] {
            let tol = 1e-4;
            let s = solve_game_with(&g, solver, 2_000_000, tol).unwrap();
            assert!((s.value + 0.1).abs() <= tol, "{solver:?} {}", s.value);
            assert!(linf(&s.row_strategy, &[0.5, 0.25, 0.25]) <= 10.0 * tol, "{solver:?} {s:?}");
            assert!(linf(&s.col_strategy, &[0.25, 0.375, 0.375]) <= 10.0 * tol, "{solver:?} {s:?}");
            assert!(s.gap <= 2.0 * tol);
        }
    }

    #[test]
    fn matching_pennies_and_zero_game() {
        let g = MatrixGame::from_matrix(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let s = solve_game(&g, 100, 1e-9).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!(linf(&s.row_strategy, &[0.5, 0.5]) < 1e-12 && linf(&s.col_strategy, &[0.5, 0.5]) < 1e-12);

        let z = MatrixGame::from_matrix(vec![vec![0.0; 3]; 2]).unwrap();
        let s = solve_game(&z, 100, 1e-9).unwrap();
        assert_eq!((s.value, s.gap), (0.0, 0.0));
    }

    #[test]
    fn sure_class_game_has_value_minus_one() {
        let g = build_game(&[1.0, 0.0], &singleton_family(2)).unwrap();
        let s = solve_game(&g, 100, 1e-9).unwrap();
        assert!((s.value + 1.0).abs() < 1e-12);
        assert!(linf(&s.col_strategy, &[1.0, 0.0]) < 1e-12);
        let u = build_game(&[0.5, 0.5], &singleton_family(2)).unwrap();
        assert_eq!(solve_game(&u, 100, 1e-9).unwrap().value, 0.0);
    }

    #[test]
    fn errors() {
        let g = MatrixGame::from_matrix(vec![vec![3.0, -1.0], vec![-2.0, 1.0]]).unwrap();
        assert!(solve_game(&g, 0, 1e-3).is_err());
        assert!(matches!(
            solve_game_with(&g, Solver::MultiplicativeWeights, 3, 1e-9),
            Err(Error::GapNotReached { .. })
        ));
        assert!(MatrixGame::from_matrix(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(MatrixGame::from_matrix(vec![]).is_err());
    }

    /// Equal-payoff system on square supports; returns the mixed strategy on
    /// `support` and the common payoff against `other` of matrix `a`.
    fn equalizer(a: &[Vec<f64>], support: &[usize], other: &[usize]) -> Option<(Vec<f64>, f64)> {
        let k = support.len();
        // unknowns: weights on support, then v
        let mut m = vec![vec![0.0; k + 2]; k + 1];
        for (e, &j) in other.iter().enumerate() {
            for (u, &i) in support.iter().enumerate() {
                m[e][u] = a[i][j];
            }
            m[e][k] = -1.0;
        }
        for u in 0..k {
            m[k][u] = 1.0;
        }
        m[k][k + 1] = 1.0;
        let n = k + 1;
        for col in 0..n {
            let piv = (col..n).max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))?;
            if m[piv][col].abs() < 1e-10 {
                return None;
            }
            m.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let f = m[r][col] / m[col][col];
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
        let sol: Vec<f64> = (0..n).map(|r| m[r][n] / m[r][r]).collect();
        Some((sol[..k].to_vec(), sol[k]))
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|b| b.count_ones() as usize == k)
            .map(|b| (0..n).filter(|i| b >> i & 1 == 1).collect())
            .collect()
    }

    /// Value of the game by enumerating square supports.
    fn support_enumeration(a: &[Vec<f64>]) -> f64 {
        let (r, c) = (a.len(), a[0].len());
        let at: Vec<Vec<f64>> = (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect();
        for k in 1..=r.min(c) {
            for rows in subsets(r, k) {
                for cols in subsets(c, k) {
                    let Some((x, v)) = equalizer(a, &rows, &cols) else { continue };
                    let Some((y, w)) = equalizer(&at, &cols, &rows) else { continue };
                    if x.iter().chain(&y).any(|&p| p < -1e-12) || (v - w).abs() > 1e-9 {
                        continue;
                    }
                    let guaranteed_low = (0..c).all(|j| rows.iter().zip(&x).map(|(&i, p)| a[i][j] * p).sum::<f64>() >= v - 1e-9);
                    let guaranteed_high = (0..r).all(|i| cols.iter().zip(&y).map(|(&j, p)| a[i][j] * p).sum::<f64>() <= v + 1e-9);
                    if guaranteed_low && guaranteed_high {
                        return v;
                    }
                }
            }
        }
        panic!("no equilibrium found for {a:?}");
    }

    #[test]
    fn agrees_with_support_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for case in 0..20 {
            let n = 2 + case % 2;
            let a: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-5i32..=5) as f64).collect())
                .collect();
            let expected = support_enumeration(&a);
            let s = solve_game(&MatrixGame::from_matrix(a.clone()).unwrap(), 1000, 1e-9).unwrap();
            assert!((s.value - expected).abs() < 1e-4, "{a:?}: {} vs {expected}", s.value);
        }
    }

    #[test]
    fn low_noise_prediction_is_the_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tol = 1e-6;
        for _ in 0..20 {
            let m = rng.random_range(2..=5);
            let top = rng.random_range(0..m);
            let big = 0.5 + 0.45 * rng.random::<f64>() + 0.01;
            let rest: Vec<f64> = (0..m - 1).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = rest.iter().sum();
            let mut p = Vec::with_capacity(m);
            let mut it = rest.iter();
            for y in 0..m {
                p.push(if y == top { big } else { it.next().unwrap() / s * (1.0 - big) });
            }
            let mut family = singleton_family(m);
            if m > 2 {
                family.extend((0..10).map(|_| random_proper_set(m, &mut rng)));
            }
            let g = build_game(&p, &family).unwrap();
            let sol = solve_game(&g, 10_000, tol).unwrap();
            let mut delta = vec![0.0; m];
            delta[top] = 1.0;
            assert!(linf(&sol.col_strategy, &delta) <= 10.0 * tol, "p = {p:?}, v = {:?}", sol.col_strategy);
        }
    }
}
