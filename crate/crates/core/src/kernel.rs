//! Gaussian-kernel models with a Nyström parameterization.
//!
//! A [`KernelModel`] holds `p` representer points `x_1..x_p` and a `p × m`
//! coefficient matrix `a`, and predicts
//!
//! ```text
//! f_a(x)_j = Σ_i a_ij k(x, x_i),    k(x, x') = exp(-|x - x'|² / (2σ²)).
//! ```
//!
//! The model is linear in `a`, so the directional derivative along an output
//! direction `u` is the rank-one matrix `(u_j k(x, x_i))_ij`; that is the
//! quantity every weak-gradient step adds to the coefficients.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::UnitVector;

/// Kernel family. Only the Gaussian kernel is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    bandwidth: f64,
    kind: KernelKind,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(KernelSpec {
            bandwidth,
            kind: KernelKind::Gaussian,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Bound on `sqrt(k(x, x))`; the Gaussian kernel has unit diagonal.
    pub fn kappa(&self) -> f64 {
        1.0
    }
}

/// `exp(-|x - x'|² / (2σ²))`.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], other: &[f64]) -> Result<f64> {
    if x.len() != other.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: other.len(),
        });
    }
    Ok(gaussian(spec.bandwidth, x, other))
}

#[inline]
fn gaussian(bandwidth: f64, x: &[f64], other: &[f64]) -> f64 {
    let sq: f64 = x.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum();
    (-sq / (2.0 * bandwidth * bandwidth)).exp()
}

/// Sign answer of a half-space query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Vector-valued kernel model `x ↦ Σ_i a_i k(x, x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    representers: Vec<Vec<f64>>,
    /// row-major `p × m`
    coefficients: Vec<f64>,
    spec: KernelSpec,
    ridge: f64,
    output_dim: usize,
}

impl KernelModel {
    /// Zero-initialized model over the given representers.
    pub fn zeros(representers: Vec<Vec<f64>>, output_dim: usize, spec: KernelSpec, ridge: f64) -> Result<Self> {
        let p = representers.len();
        let coefficients = vec![0.0; p * output_dim];
        Self::from_parts(representers, coefficients, output_dim, spec, ridge)
    }

    pub fn from_parts(
        representers: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        output_dim: usize,
        spec: KernelSpec,
        ridge: f64,
    ) -> Result<Self> {
        if representers.is_empty() {
            return Err(Error::InvalidDimension("model needs at least one representer".into()));
        }
        if output_dim == 0 {
            return Err(Error::InvalidDimension("output dimension must be at least 1".into()));
        }
        let d = representers[0].len();
        if let Some(bad) = representers.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        if coefficients.len() != representers.len() * output_dim {
            return Err(Error::DimensionMismatch {
                expected: representers.len() * output_dim,
                got: coefficients.len(),
            });
        }
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(Error::InvalidParameter(format!("ridge must be nonnegative, got {ridge}")));
        }
        Ok(KernelModel {
            representers,
            coefficients,
            spec,
            ridge,
            output_dim,
        })
    }

    pub fn n_representers(&self) -> usize {
        self.representers.len()
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn input_dim(&self) -> usize {
        self.representers[0].len()
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn representers(&self) -> &[Vec<f64>] {
        &self.representers
    }

    /// Row-major `p × m` coefficients.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.coefficients[i * self.output_dim + j]
    }

    pub fn set_coefficients(&mut self, coefficients: Vec<f64>) -> Result<()> {
        if coefficients.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len(),
                got: coefficients.len(),
            });
        }
        self.coefficients = coefficients;
        Ok(())
    }

    /// `(k(x, x_i))_i`.
    pub fn kernel_column(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let bw = self.spec.bandwidth;
        Ok(self.representers.iter().map(|r| gaussian(bw, x, r)).collect())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let column = self.kernel_column(x)?;
        Ok(self.predict_from_column(&column))
    }

    /// Prediction given a precomputed kernel column.
    pub fn predict_from_column(&self, column: &[f64]) -> Vec<f64> {
        let m = self.output_dim;
        let mut out = vec![0.0; m];
        for (row, &k) in self.coefficients.chunks_exact(m).zip(column) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * k;
            }
        }
        out
    }

    /// One weak-gradient step:
    /// `a_ij ← (1 - γλ) a_ij + γ ε u_j k(x, x_i)`.
    pub fn weak_update(&mut self, x: &[f64], direction: &UnitVector, sign: Sign, step: f64) -> Result<()> {
        if direction.dim() != self.output_dim {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim,
                got: direction.dim(),
            });
        }
        let column = self.kernel_column(x)?;
        self.update_from_column(&column, direction.coords(), sign.value() * step, step);
        Ok(())
    }

    /// `a ← (1 - step·λ) a + scale · column ⊗ direction`.
    pub(crate) fn update_from_column(&mut self, column: &[f64], direction: &[f64], scale: f64, step: f64) {
        let shrink = 1.0 - step * self.ridge;
        let m = self.output_dim;
        for (row, &k) in self.coefficients.chunks_exact_mut(m).zip(column) {
            let ks = scale * k;
            for (a, &u) in row.iter_mut().zip(direction) {
                *a = shrink * *a + ks * u;
            }
        }
    }

    /// Ridge shrinkage alone, for steps whose gradient term vanishes.
    pub(crate) fn shrink(&mut self, step: f64) {
        if self.ridge > 0.0 {
            let shrink = 1.0 - step * self.ridge;
            self.coefficients.iter_mut().for_each(|a| *a *= shrink);
        }
    }

    /// Writes the textual checkpoint format (see `read_text`).
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "# active-labeling kernel model v1");
        let _ = writeln!(s, "p {}", self.n_representers());
        let _ = writeln!(s, "m {}", self.output_dim);
        let _ = writeln!(s, "d {}", self.input_dim());
        let _ = writeln!(s, "kernel gaussian");
        let _ = writeln!(s, "sigma {:.16e}", self.spec.bandwidth);
        let _ = writeln!(s, "lambda {:.16e}", self.ridge);
        let _ = writeln!(s, "representers");
        for r in &self.representers {
            write_row(&mut s, r);
        }
        let _ = writeln!(s, "coefficients");
        for row in self.coefficients.chunks_exact(self.output_dim) {
            write_row(&mut s, row);
        }
        out.write_all(s.as_bytes())
    }

    /// Parses the format produced by [`KernelModel::write_text`]:
    ///
    /// ```text
    /// # active-labeling kernel model v1
    /// p <rows>
    /// m <outputs>
    /// d <input dim>
    /// kernel gaussian
    /// sigma <bandwidth>
    /// lambda <ridge>
    /// representers
    /// <p lines of d values>
    /// coefficients
    /// <p lines of m values>
    /// ```
    ///
    /// Values are written with 17 significant digits, so a write/read cycle
    /// is bit-exact.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('#')));
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((n, Err(e))) => Err(Error::parse(n, e.to_string())),
                None => Err(Error::parse(0, format!("unexpected end of input, expected {what}"))),
            }
        };
        let mut header = |key: &str| -> Result<String> {
            let (n, line) = next(key)?;
            let mut it = line.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
                _ => Err(Error::parse(n, format!("expected `{key} <value>`"))),
            }
        };
        let parse_usize = |s: String, key: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(0, format!("invalid {key}: {s}")))
        };
        let p = parse_usize(header("p")?, "p")?;
        let m = parse_usize(header("m")?, "m")?;
        let d = parse_usize(header("d")?, "d")?;
        let kind = header("kernel")?;
        if kind != "gaussian" {
            return Err(Error::parse(0, format!("unknown kernel {kind}")));
        }
        let sigma = parse_f64(&header("sigma")?, 0)?;
        let lambda = parse_f64(&header("lambda")?, 0)?;
        drop(header);

        let mut block = |name: &str, rows: usize, cols: usize| -> Result<Vec<Vec<f64>>> {
            let (n, line) = next(name)?;
            if line.trim() != name {
                return Err(Error::parse(n, format!("expected `{name}`")));
            }
            (0..rows)
                .map(|_| {
                    let (n, line) = next("matrix row")?;
                    let row = line
                        .split_whitespace()
                        .map(|t| parse_f64(t, n))
                        .collect::<Result<Vec<_>>>()?;
                    if row.len() != cols {
                        return Err(Error::parse(n, format!("expected {cols} values, got {}", row.len())));
                    }
                    Ok(row)
                })
                .collect()
        };
        let representers = block("representers", p, d)?;
        let coefficients = block("coefficients", p, m)?.concat();
        KernelModel::from_parts(representers, coefficients, m, KernelSpec::gaussian(sigma)?, lambda)
    }
}

fn write_row(s: &mut String, row: &[f64]) {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s.push('\n');
}

fn parse_f64(t: &str, line: usize) -> Result<f64> {
    t.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid number `{t}`")))
}

/// Running arithmetic mean of coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedModel {
    running_mean: Vec<f64>,
    count: usize,
}

impl AveragedModel {
    pub fn new(n_coefficients: usize) -> Self {
        AveragedModel {
            running_mean: vec![0.0; n_coefficients],
            count: 0,
        }
    }

    pub fn for_model(model: &KernelModel) -> Self {
        Self::new(model.coefficients().len())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.running_mean
    }

    /// `mean ← mean + (a - mean) / (count + 1)`.
    pub fn accumulate(&mut self, model: &KernelModel) -> Result<()> {
        self.accumulate_slice(model.coefficients())
    }

    pub fn accumulate_slice(&mut self, coefficients: &[f64]) -> Result<()> {
        if coefficients.len() != self.running_mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.running_mean.len(),
                got: coefficients.len(),
            });
        }
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        for (m, &a) in self.running_mean.iter_mut().zip(coefficients) {
            *m += (a - *m) * inv;
        }
        Ok(())
    }

    /// A copy of `template` carrying the averaged coefficients, or the
    /// template itself when nothing was accumulated.
    pub fn to_model(&self, template: &KernelModel) -> Result<KernelModel> {
        let mut model = template.clone();
        if self.count > 0 {
            model.set_coefficients(self.running_mean.clone())?;
        }
        Ok(model)
    }
}

/// Uniform random subset of `inputs` of size `min(p, n)`, without replacement.
pub fn select_representers<R: Rng + ?Sized>(inputs: &[Vec<f64>], p: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if inputs.is_empty() {
        return Err(Error::InvalidDimension("no inputs to pick representers from".into()));
    }
    if p == 0 {
        return Err(Error::InvalidParameter("number of representers must be positive".into()));
    }
    let k = p.min(inputs.len());
    let mut idx = rand::seq::index::sample(rng, inputs.len(), k).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| inputs[i].clone()).collect())
}
