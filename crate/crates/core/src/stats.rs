use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// A computed number together with how it was obtained and how far to trust it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub method: Method,
    /// Standard error of a Monte Carlo mean; 0 for quadrature.
    pub std_error: f64,
    /// Monte Carlo sample count; 0 for quadrature.
    pub samples: u64,
    pub seed: Option<u64>,
    /// Change under the last panel doubling, for quadrature.
    pub refinement_delta: Option<f64>,
}

impl Estimate {
    pub fn quadrature(value: f64, delta: f64) -> Self {
        Estimate {
            value,
            method: Method::Quadrature,
            std_error: 0.0,
            samples: 0,
            seed: None,
            refinement_delta: Some(delta),
        }
    }

    /// Sample mean with its standard error.
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let (mean, se) = mean_and_std_error(values);
        Estimate {
            value: mean,
            method: Method::MonteCarlo,
            std_error: se,
            samples: values.len() as u64,
            seed: Some(seed),
            refinement_delta: None,
        }
    }

    /// Fraction of `hits` among `total` trials, with the binomial standard error.
    pub fn proportion(hits: u64, total: u64, seed: u64) -> Self {
        let p = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        Estimate {
            value: p,
            method: Method::MonteCarlo,
            std_error: if total == 0 { 0.0 } else { (p * (1.0 - p) / total as f64).sqrt() },
            samples: total,
            seed: Some(seed),
            refinement_delta: None,
        }
    }

    /// Numerical uncertainty: standard error for Monte Carlo, refinement delta for quadrature.
    pub fn uncertainty(&self) -> f64 {
        match self.method {
            Method::MonteCarlo => self.std_error,
            Method::Quadrature => self.refinement_delta.unwrap_or(0.0),
        }
    }
}

/// Welford mean and standard error of the mean.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    let n = values.len();
    if n < 2 {
        return (mean, 0.0);
    }
    (mean, (m2 / (n - 1) as f64 / n as f64).sqrt())
}

/// Kolmogorov–Smirnov distance between the sample and the uniform law on `[lo, hi]`.
pub fn ks_uniform(values: &[f64], lo: f64, hi: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| (x - lo) / (hi - lo)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Pearson test of 2-D points against the uniform law on a rectangle.
pub fn chi_square_uniform_2d(points: &[(f64, f64)], x: (f64, f64), y: (f64, f64), bins: (usize, usize)) -> ChiSquare {
    let (bx, by) = bins;
    let mut counts = vec![0u64; bx * by];
    for &(px, py) in points {
        let i = (((px - x.0) / (x.1 - x.0)) * bx as f64).floor().clamp(0.0, (bx - 1) as f64) as usize;
        let j = (((py - y.0) / (y.1 - y.0)) * by as f64).floor().clamp(0.0, (by - 1) as f64) as usize;
        counts[i * by + j] += 1;
    }
    let expected = points.len() as f64 / (bx * by) as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let dof = (bx * by - 1) as f64;
    let p_value = ChiSquared::new(dof).map(|d| 1.0 - d.cdf(statistic)).unwrap_or(f64::NAN);
    ChiSquare { statistic, dof, p_value }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
