//! Curvature as a one-sided knotting proxy.
//!
//! A closed curve of total curvature below `4 pi` is unknotted (Fáry–Milnor).
//! The converse fails, so a polygon at or above `4 pi` is only *possibly*
//! knotted and every fraction reported here is an upper bound on the true
//! knotting fraction.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{diameter_of_vertices, total_curvature_of_vertices, Polygon};
use crate::moduli::ConfinedRegionSpec;
use crate::sampling::{confined_curvatures, sample_confined_map, sample_shell_map, SamplerOptions, ShellSpec};
use crate::stats::{loglog_slope, Estimate};

/// Margin below `4 pi` required to certify an unknot.
pub const UNKNOT_MARGIN: f64 = 1e-9;

/// Slack on the lower curvature bound at diameter one.
pub const TIGHT_BOUND_TOL: f64 = 1e-8;

/// Radii used by default in the loose-confinement scaling fit.
pub const SCALING_EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// True when the curvature alone proves the polygon is unknotted.
pub fn unknot_certified(p: &Polygon) -> bool {
    certifies_unknot(p.total_curvature())
}

pub fn certifies_unknot(curvature: f64) -> bool {
    curvature < 2.0 * TAU - UNKNOT_MARGIN
}

/// Curvature statistics of a batch of polygons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProxyReport {
    pub n: usize,
    pub r: f64,
    pub samples: usize,
    pub seed: u64,
    pub mean_curvature: Estimate,
    pub min_curvature: f64,
    pub max_curvature: f64,
    /// Largest `|kappa - 2 pi|`.
    pub max_deviation_from_planar: f64,
    /// Fraction whose curvature does not certify an unknot.
    pub frac_possibly_knotted: Estimate,
    pub acceptance_rate: f64,
}

impl ProxyReport {
    pub fn from_curvatures(n: usize, r: f64, curvatures: &[f64], seed: u64, acceptance_rate: f64) -> Self {
        let fold = |init, f: fn(f64, f64) -> f64| curvatures.iter().cloned().fold(init, f);
        let knotted = curvatures.iter().filter(|k| !certifies_unknot(**k)).count() as u64;
        ProxyReport {
            n,
            r,
            samples: curvatures.len(),
            seed,
            mean_curvature: Estimate::from_samples(curvatures, seed),
            min_curvature: fold(f64::INFINITY, f64::min),
            max_curvature: fold(f64::NEG_INFINITY, f64::max),
            max_deviation_from_planar: curvatures.iter().map(|k| (k - TAU).abs()).fold(0.0, f64::max),
            frac_possibly_knotted: Estimate::proportion(knotted, curvatures.len() as u64, seed),
            acceptance_rate,
        }
    }
}

/// Curvatures at diameter one against the lower bound `2 pi n / 3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightReport {
    pub report: ProxyReport,
    pub bound: f64,
    pub violations: usize,
    /// `min_curvature - bound`.
    pub margin: f64,
}

impl TightReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Samples polygons of diameter at most 1 and checks `kappa >= 2 pi n / 3`.
pub fn extreme_confinement_check(n: usize, samples: usize, seed: u64, opts: &SamplerOptions) -> Result<TightReport> {
    let spec = ConfinedRegionSpec::new(n, 1.0)?;
    let run = confined_curvatures(&spec, samples, seed, opts)?;
    let bound = TAU * n as f64 / 3.0;
    let report = ProxyReport::from_curvatures(n, 1.0, &run.items, seed, run.acceptance_rate());
    Ok(TightReport {
        violations: run.items.iter().filter(|k| **k < bound - TIGHT_BOUND_TOL).count(),
        margin: report.min_curvature - bound,
        bound,
        report,
    })
}

/// Curvatures of polygons whose diameter is within `epsilon` of the largest possible, `n / 2`.
pub fn loose_confinement_check(n: usize, epsilon: f64, samples: usize, seed: u64, opts: &SamplerOptions) -> Result<ProxyReport> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(Error::domain("loose_confinement_check", format!("epsilon = {epsilon} not in (0, 0.25]")));
    }
    let spec = ShellSpec::new(n, (n / 2) as f64 - epsilon)?;
    let run = sample_shell_map(&spec, samples, seed, opts, |_, _, v| total_curvature_of_vertices(v))
        .map_err(|e| match e {
            Error::Exhausted { .. } | Error::BudgetSpent { .. } => Error::domain(
                "loose_confinement_check",
                format!("{e}; try a larger epsilon than {epsilon}"),
            ),
            other => other,
        })?;
    Ok(ProxyReport::from_curvatures(n, spec.min_diameter, &run.items, seed, run.acceptance_rate()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LooseScaling {
    pub epsilons: Vec<f64>,
    pub reports: Vec<ProxyReport>,
    /// Log-log slope of the largest `|kappa - 2 pi|` against `epsilon`.
    pub exponent: f64,
    /// Whether the largest deviation shrinks strictly with `epsilon`.
    pub decreasing: bool,
}

/// Runs [`loose_confinement_check`] for each `epsilon` (decreasing) with the same seed.
///
/// The proposal box scales linearly in `epsilon`, so a shared seed makes
/// the runs self-similar and the fitted exponent far less noisy than with
/// independent seeds.
pub fn loose_scaling(n: usize, epsilons: &[f64], samples: usize, seed: u64, opts: &SamplerOptions) -> Result<LooseScaling> {
    let reports = epsilons
        .iter()
        .map(|&e| loose_confinement_check(n, e, samples, seed, opts))
        .collect::<Result<Vec<_>>>()?;
    let maxima: Vec<f64> = reports.iter().map(|r| r.max_deviation_from_planar).collect();
    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&a, &b| epsilons[b].total_cmp(&epsilons[a]));
    let decreasing = order.windows(2).all(|w| maxima[w[1]] < maxima[w[0]]);
    Ok(LooseScaling {
        epsilons: epsilons.to_vec(),
        exponent: loglog_slope(epsilons, &maxima),
        decreasing,
        reports,
    })
}

/// Large-`n` limit `pi n / 2 + pi / 4` of the unconfined mean curvature.
pub fn asymptotic_mean(n: usize) -> f64 {
    PI * n as f64 / 2.0 + PI / 4.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteRow {
    pub n: usize,
    pub mean_curvature: Estimate,
    pub target: f64,
    /// `mean - target`.
    pub deviation: f64,
}

/// Unconfined mean curvature for each `n`, compared with [`asymptotic_mean`].
pub fn asymptote_check(n_list: &[usize], samples: usize, seed: u64, opts: &SamplerOptions) -> Result<Vec<AsymptoteRow>> {
    n_list
        .iter()
        .map(|&n| {
            let spec = ConfinedRegionSpec::new(n, (n / 2) as f64)?;
            let run = confined_curvatures(&spec, samples, seed, opts)?;
            let mean = Estimate::from_samples(&run.items, seed);
            let target = asymptotic_mean(n);
            Ok(AsymptoteRow { n, mean_curvature: mean, target, deviation: mean.value - target })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnotFraction {
    pub r: f64,
    /// Fraction of polygons with diameter at most `r` that are possibly knotted.
    pub frac_possibly_knotted: Estimate,
}

/// Possibly-knotted fraction among uniform polygons of diameter at most `r`, for each `r`.
///
/// One unconfined sample of size `samples` is drawn and restricted to each
/// radius, which is exact because the confined measure is the restriction
/// of the uniform one; the subsets are nested in `r`.
pub fn knotting_fraction_scan(
    n: usize,
    r_grid: &[f64],
    samples: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<Vec<KnotFraction>> {
    let spec = ConfinedRegionSpec::new(n, (n / 2) as f64)?;
    let run = sample_confined_map(&spec, samples, seed, opts, |_, _, v| {
        (diameter_of_vertices(v), total_curvature_of_vertices(v))
    })?;
    Ok(r_grid
        .iter()
        .map(|&r| {
            let inside: Vec<f64> = run.items.iter().filter(|(d, _)| *d <= r).map(|(_, k)| *k).collect();
            let knotted = inside.iter().filter(|k| !certifies_unknot(**k)).count() as u64;
            KnotFraction { r, frac_possibly_knotted: Estimate::proportion(knotted, inside.len() as u64, seed) }
        })
        .collect())
}
