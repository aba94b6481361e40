//! Expected total curvature of confined quadrilaterals, the boundary
//! expectations that drive its derivative, and the Crofton identity
//!
//! ```text
//! d kappa_bar / dr = (kappa_B - kappa_bar) * A'(r) / A(r)
//! ```
//!
//! that ties them together. `A(r)` is the chart area of the confined
//! half-chart and `kappa_B` the curvature averaged against the boundary
//! measure.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::quad_curvature;
use crate::measures::{
    dtheta_max_dr, ell_saturation, integrate_interior_ell, theta_max, MuMeasures, NuMeasures, MU_INTERVAL,
    NU_INTERVAL,
};
use crate::moduli::{theta_long_diagonal, ConfinedRegionSpec};
use crate::par::Exec;
use crate::quadrature::{composite, composite_graded, composite_sqrt_end, refine, DEFAULT_TOL};
use crate::sampling::{confined_curvatures, SamplerOptions};
pub use crate::stats::{Estimate, Method};

/// Convergence target of the panel doubling for `kappa_bar`.
pub const KAPPA_TOL: f64 = 1e-9;

/// Default central-difference step in `r`.
pub const DEFAULT_H: f64 = 1e-3;

/// Slack allowed between successive `kappa_bar` values before the scan fails.
pub const MONOTONE_TOL: f64 = 1e-6;

/// Half-width of the band around `sqrt(2)` where residuals are reported but not checked.
pub const SQRT2_COLLAR: f64 = 0.02;

const START_PANELS: usize = 2;

/// Finest outer segment near `ell = 0`; the outer integrand only has an
/// `ell^2 log ell` corner there, which one panel of this width resolves.
const OUTER_GRADING: f64 = 1e-3;

fn check_r(what: &'static str, r: f64) -> Result<()> {
    if (1.0..=2.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Regime { what, interval: "[1, 2]", r })
    }
}

/// Chart area `int_0^r theta_max(ell, r) d ell` of the confined half-chart.
pub fn area_region(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::Regime { what: "area_region", interval: "(0, 2]", r });
    }
    let end = ell_saturation(r);
    let upper = r.min(end);
    let v = refine(
        |p| composite_sqrt_end(|l| theta_max(l, r), 0.0, upper, end, p),
        START_PANELS,
        DEFAULT_TOL,
    )?;
    Ok(v.value + PI * (r - end).max(0.0))
}

/// Chart area of the long-diagonal part `{d(v2, v4) <= ell <= r}`.
pub fn area_long_diagonal(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::Regime { what: "area_long_diagonal", interval: "(0, 2]", r });
    }
    let upper = r.min(SQRT_2);
    let v = refine(
        |p| composite_sqrt_end(theta_long_diagonal, 0.0, upper, SQRT_2, p),
        START_PANELS,
        DEFAULT_TOL,
    )?;
    Ok(v.value + PI * (r - SQRT_2).max(0.0))
}

/// `int int f(ell, theta)` over the confined half-chart with `panels` per segment.
///
/// The curvature has a cone at `(ell, theta) = (0, pi)` whose width in
/// `theta` is `ell`, so the inner rule is graded toward `theta = pi` at that
/// scale. The outer integrand has a square-root corner where `theta_max`
/// saturates at `pi`, and another at `ell = 2` where the quadrilateral
/// flattens.
fn region_integral<F: Fn(f64, f64) -> f64>(f: &F, r: f64, panels: usize) -> f64 {
    let end = ell_saturation(r);
    let upper = r.min(end);
    let inner = |l: f64| composite_graded(|t| f(l, t), 0.0, theta_max(l, r), PI, l, panels);
    let saturated = |l: f64| composite_graded(|t| f(l, t), 0.0, PI, PI, l, panels);
    let mid = 0.5 * (end + r);
    composite_sqrt_end(inner, 0.0, upper, end, panels)
        + composite_graded(saturated, end, mid, 0.0, end.max(OUTER_GRADING), panels)
        + composite_sqrt_end(saturated, mid, r, 2.0, panels)
}

/// Options for [`kappa_bar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaMethod {
    Quadrature { tol: f64 },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for KappaMethod {
    fn default() -> Self {
        KappaMethod::Quadrature { tol: KAPPA_TOL }
    }
}

/// Mean total curvature over the confined quadrilaterals of diameter at most `r`.
pub fn kappa_bar(r: f64, method: KappaMethod, exec: Exec) -> Result<Estimate> {
    check_r("kappa_bar", r)?;
    match method {
        KappaMethod::Quadrature { tol } => kappa_bar_quadrature(r, tol),
        KappaMethod::MonteCarlo { samples, seed } => {
            let spec = ConfinedRegionSpec::new(4, r)?;
            let opts = SamplerOptions { exec, ..Default::default() };
            let run = confined_curvatures(&spec, samples, seed, &opts)?;
            Ok(Estimate::from_samples(&run.items, seed))
        }
    }
}

fn kappa_bar_quadrature(r: f64, tol: f64) -> Result<Estimate> {
    let area = area_region(r)?;
    let f = |l: f64, t: f64| quad_curvature(l, t);
    let v = refine(|p| region_integral(&f, r, p), START_PANELS, tol * area)?;
    Ok(Estimate::quadrature(v.value / area, v.delta / area))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    MuB,
    MuI,
    NuB,
    NuI,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Measure::MuB => "mu_B",
            Measure::MuI => "mu_I",
            Measure::NuB => "nu_B",
            Measure::NuI => "nu_I",
        }
    }
}

/// Mean quadrilateral curvature against one of the boundary measures at `r`.
pub fn kappa_boundary(r: f64, measure: Measure) -> Result<Estimate> {
    let regime = |interval| Error::Regime { what: measure.label(), interval, r };
    let refined = match measure {
        Measure::MuB | Measure::MuI => {
            let m = MuMeasures::new(r).map_err(|_| regime(MU_INTERVAL))?;
            let end = ell_saturation(r);
            let ell_arc_end = theta_max(r, r);
            if measure == Measure::MuB {
                refine(
                    |p| {
                        let ell_arc = composite(|t| quad_curvature(r, t), 0.0, ell_arc_end, p);
                        let theta_arc = composite_sqrt_end(
                            |l| quad_curvature(l, theta_max(l, r)) * dtheta_max_dr(l, r),
                            0.0,
                            r,
                            end,
                            p,
                        );
                        (ell_arc + theta_arc) / m.boundary_speed
                    },
                    START_PANELS,
                    DEFAULT_TOL,
                )?
            } else {
                refine(
                    |p| {
                        let ell_arc = integrate_interior_ell(&m, |t| quad_curvature(r, t), p);
                        let theta_arc = composite_sqrt_end(
                            |l| quad_curvature(l, theta_max(l, r)) * m.interior_theta(l),
                            0.0,
                            r,
                            end,
                            p,
                        );
                        ell_arc + theta_arc
                    },
                    START_PANELS,
                    DEFAULT_TOL,
                )?
            }
        }
        Measure::NuB | Measure::NuI => {
            let m = NuMeasures::new(r).map_err(|_| regime(NU_INTERVAL))?;
            let density = |t: f64| match measure {
                Measure::NuB => m.boundary(t),
                _ => m.interior(t),
            };
            refine(
                |p| composite(|t| quad_curvature(r, t) * density(t), 0.0, m.arc_end, p),
                START_PANELS,
                DEFAULT_TOL,
            )?
        }
    };
    Ok(Estimate::quadrature(refined.value, refined.delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `r < sqrt(2)`: boundary measure `mu_B` on both arcs.
    Mu,
    /// `r > sqrt(2)`: boundary measure `nu_B` on the long-diagonal arc.
    Nu,
}

/// The two sides of the Crofton identity at one `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CroftonResidual {
    pub r: f64,
    pub h: f64,
    pub regime: Regime,
    pub kappa_bar: f64,
    pub kappa_boundary: f64,
    /// Central difference of `kappa_bar`.
    pub derivative: f64,
    /// `(kappa_boundary - kappa_bar) * A'(r) / A(r)`.
    pub rhs: f64,
    pub residual: f64,
}

/// Compares the central difference of `kappa_bar` with the Crofton right-hand side.
///
/// Below `sqrt(2)` the boundary measure is `mu_B` and `A` is the confined
/// chart area; above it the boundary measure is `nu_B` and `A` is the
/// long-diagonal area. Both areas give the same `A'/A` because the
/// long-diagonal part is exactly half of the confined chart.
pub fn crofton_residual(r: f64, h: f64) -> Result<CroftonResidual> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::domain("crofton_residual", format!("step h = {h} must be positive")));
    }
    if !(r - h >= 1.0 && r + h <= 2.0) || (r - SQRT_2).abs() <= h {
        return Err(Error::Regime {
            what: "crofton_residual",
            interval: "[1 + h, 2 - h] away from sqrt(2) by more than h",
            r,
        });
    }
    let kb = |x: f64| kappa_bar_quadrature(x, KAPPA_TOL).map(|e| e.value);
    let derivative = (kb(r + h)? - kb(r - h)?) / (2.0 * h);
    let kappa = kb(r)?;
    let (regime, boundary, area): (Regime, f64, fn(f64) -> Result<f64>) = if r < SQRT_2 {
        (Regime::Mu, kappa_boundary(r, Measure::MuB)?.value, area_region)
    } else {
        (Regime::Nu, kappa_boundary(r, Measure::NuB)?.value, area_long_diagonal)
    };
    let area_prime = (area(r + h)? - area(r - h)?) / (2.0 * h);
    let rhs = (boundary - kappa) * area_prime / area(r)?;
    Ok(CroftonResidual {
        r,
        h,
        regime,
        kappa_bar: kappa,
        kappa_boundary: boundary,
        derivative,
        rhs,
        residual: (derivative - rhs).abs(),
    })
}

/// Boundary curvature used in the curve output: `mu_B` below `sqrt(2)`, `nu_B` from there on.
pub fn regime_boundary_kappa(r: f64) -> Result<f64> {
    let measure = if r < SQRT_2 { Measure::MuB } else { Measure::NuB };
    Ok(kappa_boundary(r, measure)?.value)
}

/// `kappa_bar` and its companions on a grid of radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureCurve {
    pub r_values: Vec<f64>,
    pub kappa_bar: Vec<Estimate>,
    pub area: Vec<f64>,
    pub kappa_b: Vec<f64>,
    /// `NaN` where the central difference would straddle `sqrt(2)` or leave `[1, 2]`.
    pub crofton_residual: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneVerdict {
    pub pass: bool,
    /// Largest `kappa_bar[i + 1] - kappa_bar[i] - allowance[i]`; negative when the curve drops everywhere.
    pub worst_excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub method: KappaMethod,
    pub h: f64,
    pub exec: Exec,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { method: KappaMethod::default(), h: DEFAULT_H, exec: Exec::default() }
    }
}

/// Tabulates `kappa_bar` on `r_grid` and checks that it never increases.
///
/// Consecutive values may rise by at most `1e-6` plus their reported
/// numerical uncertainty (three combined standard errors for Monte Carlo).
pub fn monotonicity_scan(r_grid: &[f64], opts: &ScanOptions) -> Result<(CurvatureCurve, MonotoneVerdict)> {
    for &r in r_grid {
        check_r("monotonicity_scan", r)?;
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("monotonicity_scan", "r grid must be strictly increasing"));
    }
    let rows = opts.exec.map(r_grid, |&r| -> Result<(Estimate, f64, f64, f64)> {
        // Inner work stays sequential; the scan already fans out over r.
        let k = kappa_bar(r, opts.method, Exec::Sequential)?;
        let a = area_region(r)?;
        let b = regime_boundary_kappa(r)?;
        let res = match crofton_residual(r, opts.h) {
            Ok(c) => c.residual,
            Err(Error::Regime { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        Ok((k, a, b, res))
    });
    let mut curve = CurvatureCurve {
        r_values: r_grid.to_vec(),
        kappa_bar: Vec::with_capacity(r_grid.len()),
        area: Vec::with_capacity(r_grid.len()),
        kappa_b: Vec::with_capacity(r_grid.len()),
        crofton_residual: Vec::with_capacity(r_grid.len()),
    };
    for row in rows {
        let (k, a, b, res) = row?;
        curve.kappa_bar.push(k);
        curve.area.push(a);
        curve.kappa_b.push(b);
        curve.crofton_residual.push(res);
    }
    let verdict = monotone_verdict(&curve.kappa_bar);
    Ok((curve, verdict))
}

fn monotone_verdict(values: &[Estimate]) -> MonotoneVerdict {
    let worst_excess = values
        .windows(2)
        .map(|w| {
            let allowance = match w[0].method {
                Method::Quadrature => w[0].uncertainty() + w[1].uncertainty(),
                Method::MonteCarlo => 3.0 * w[0].std_error.hypot(w[1].std_error),
            };
            w[1].value - w[0].value - MONOTONE_TOL - allowance
        })
        .fold(f64::NEG_INFINITY, f64::max);
    MonotoneVerdict { pass: worst_excess <= 0.0, worst_excess }
}
