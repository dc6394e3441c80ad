//! Mean estimation from noisy reports and the error-scaling experiment.

use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::domain::{PrivacyBudget, UnitValue};
use crate::error::{Error, Result};
use crate::fmt::real;
use crate::mechanisms::{multidim_perturb, MechanismKind, NoisyTuple, RandomSource};

/// Arithmetic mean of the noisy reports.
pub fn estimate_mean(noisy: &[f64]) -> Result<f64> {
    if noisy.is_empty() {
        return Err(Error::arg("cannot estimate a mean from zero reports"));
    }
    Ok(noisy.iter().sum::<f64>() / noisy.len() as f64)
}

/// Coordinate-wise mean of sparse `d`-dimensional reports.
pub fn estimate_means_multidim(tuples: &[NoisyTuple], d: usize) -> Result<Vec<f64>> {
    if tuples.is_empty() {
        return Err(Error::arg("cannot estimate means from zero reports"));
    }
    let mut sums = vec![0.0; d];
    for (row, t) in tuples.iter().enumerate() {
        if t.dimension() != d {
            return Err(Error::arg(format!(
                "report {} has dimension {}, expected {d}",
                row + 1,
                t.dimension()
            )));
        }
        for (s, v) in sums.iter_mut().zip(&t.values) {
            *s += v;
        }
    }
    let n = tuples.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Distribution of the true values fed to an experiment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum ValueDistribution {
    Constant(f64),
    #[default]
    Uniform,
    /// `+c` or `-c` with equal probability.
    TwoPoint(f64),
}

impl ValueDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ValueDistribution::Constant(c) | ValueDistribution::TwoPoint(c) => {
                UnitValue::new(c).map(|_| ())
            }
            ValueDistribution::Uniform => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        match *self {
            ValueDistribution::Constant(c) => c,
            ValueDistribution::Uniform => 2.0 * rng.uniform() - 1.0,
            ValueDistribution::TwoPoint(c) => {
                if rng.uniform() < 0.5 {
                    -c
                } else {
                    c
                }
            }
        }
    }
}

impl std::fmt::Display for ValueDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValueDistribution::Constant(c) => write!(f, "constant:{}", real(*c)),
            ValueDistribution::Uniform => f.write_str("uniform"),
            ValueDistribution::TwoPoint(c) => write!(f, "two-point:{}", real(*c)),
        }
    }
}

/// Parses `uniform`, `constant:<c>` or `two-point:<c>`.
impl FromStr for ValueDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_c = |tok: &str| {
            tok.parse::<f64>()
                .map_err(|_| Error::arg(format!("cannot parse '{tok}' as a real in '{s}'")))
        };
        let dist = match s.split_once(':') {
            None if s == "uniform" => ValueDistribution::Uniform,
            Some(("constant", c)) => ValueDistribution::Constant(parse_c(c)?),
            Some(("two-point", c)) => ValueDistribution::TwoPoint(parse_c(c)?),
            _ => {
                return Err(Error::arg(format!(
                    "unknown distribution '{s}', expected uniform, constant:<c> or two-point:<c>"
                )))
            }
        };
        dist.validate()?;
        Ok(dist)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub epsilon: PrivacyBudget,
    pub d: usize,
    pub mechanism: MechanismKind,
    pub trials: usize,
    pub beta: f64,
    pub distribution: ValueDistribution,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(Error::arg(
                "n values must be a non-empty list of positive integers",
            ));
        }
        if self.d == 0 {
            return Err(Error::arg("d must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::arg("trials must be positive"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::arg(format!("beta = {} outside (0, 1)", self.beta)));
        }
        let me = self.mechanism.epsilon().value();
        if (me - self.epsilon.value()).abs() > 1e-12 * me {
            return Err(Error::arg(format!(
                "mechanism budget {me} differs from experiment budget {}",
                self.epsilon.value()
            )));
        }
        self.distribution.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub mechanism: String,
    pub mean_abs_err: f64,
    pub max_err: f64,
    pub quantile_err: f64,
    pub beta: f64,
    pub trials: usize,
    /// Almost-sure bound on one report's deviation from its input; `None`
    /// for unbounded noise.
    pub m_bound: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub const HEADER: &'static str =
        "n,d,epsilon,mechanism,mean_abs_err,max_err,quantile_err,beta,trials,m_bound";

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", Self::HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.d,
                real(r.epsilon),
                r.mechanism,
                real(r.mean_abs_err),
                real(r.max_err),
                real(r.quantile_err),
                real(r.beta),
                r.trials,
                r.m_bound.map(real).unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

/// Nearest-rank empirical quantile of sorted data.
fn nearest_rank(sorted: &[f64], level: f64) -> f64 {
    let rank = (level * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Estimation error of one simulated population: the largest coordinate
/// error `|estimate - true sample mean|`.
fn run_trial(config: &ExperimentConfig, n: usize, rng: &mut RandomSource) -> Result<f64> {
    let d = config.d;
    let mut truth = vec![0.0; d];
    let mut noisy = vec![0.0; d];
    let mut tuple = vec![UnitValue::default(); d];
    for _ in 0..n {
        for (slot, t) in tuple.iter_mut().zip(truth.iter_mut()) {
            let x = config.distribution.sample(rng);
            *t += x;
            *slot = UnitValue::new(x)?;
        }
        if d == 1 {
            noisy[0] += config.mechanism.perturb(tuple[0], rng)?;
        } else {
            let report = multidim_perturb(&tuple, &config.mechanism, rng)?;
            let j = report.chosen_index - 1;
            noisy[j] += report.values[j];
        }
    }
    let n = n as f64;
    Ok(truth
        .iter()
        .zip(&noisy)
        .map(|(t, y)| ((y - t) / n).abs())
        .fold(0.0, f64::max))
}

/// Runs `trials` simulations per population size. Trial `j` at the `i`-th
/// size draws from `RandomSource::new(seed).child(i).child(j)`, so results do
/// not depend on scheduling.
pub fn run_scaling_experiment(config: &ExperimentConfig) -> Result<ErrorTable> {
    config.validate()?;
    let master = RandomSource::new(config.seed);
    let m_bound = config.mechanism.deviation_bound().map(|m| {
        if config.d == 1 {
            m
        } else {
            config.d as f64 * (m - 1.0) + 1.0
        }
    });
    let mut rows = Vec::with_capacity(config.ns.len());
    for (i, &n) in config.ns.iter().enumerate() {
        let stream = master.child(i as u64);
        let mut errors = (0..config.trials)
            .into_par_iter()
            .map(|j| run_trial(config, n, &mut stream.child(j as u64)))
            .collect::<Result<Vec<f64>>>()?;
        let mean_abs_err = errors.iter().sum::<f64>() / errors.len() as f64;
        errors.sort_by(f64::total_cmp);
        rows.push(ErrorRow {
            n,
            d: config.d,
            epsilon: config.epsilon.value(),
            mechanism: config.mechanism.label().to_string(),
            mean_abs_err,
            max_err: *errors.last().unwrap(),
            quantile_err: nearest_rank(&errors, 1.0 - config.beta),
            beta: config.beta,
            trials: config.trials,
            m_bound,
        });
    }
    Ok(ErrorTable { rows })
}

/// Least-squares line through `(ln n, ln mean_abs_err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl SlopeFit {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"slope\":{},\"intercept\":{},\"r_squared\":{}}}",
            real(self.slope),
            real(self.intercept),
            real(self.r_squared)
        )
    }
}

pub fn fit_error_slope(table: &ErrorTable) -> Result<SlopeFit> {
    let mut ns: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::arg(format!(
            "slope fit needs at least 3 distinct n values, got {}",
            ns.len()
        )));
    }
    if let Some(r) = table
        .rows
        .iter()
        .find(|r| r.mean_abs_err.is_nan() || r.mean_abs_err <= 0.0)
    {
        return Err(Error::arg(format!(
            "mean error at n = {} is {}, cannot take its logarithm",
            r.n, r.mean_abs_err
        )));
    }
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean_abs_err.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
