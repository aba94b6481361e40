//! Boundary arcs of the confined quadrilateral chart and the measures that
//! live on them.
//!
//! The confined half-chart `{ell <= r, d(v2, v4) <= r, 0 <= theta <= pi}`
//! grows with `r` along two arcs: the `ell = r` side (parametrized by
//! `theta`) and the `d(v2, v4) = r` side (parametrized by `ell`). The
//! boundary measure `mu_B` weights each arc point by the outward speed of
//! the boundary; the interior measure `mu_I` is the push-forward of the
//! uniform measure along the coordinate projections. Both put mass `alpha`
//! on the `ell` arc and `1 - alpha` on the `theta` arc.
//!
//! For the long-diagonal region `{d(v1, v3) >= d(v2, v4)}` only the `ell = r`
//! side moves, carrying `nu_B` (uniform) and `nu_I` (interior push-forward).

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::crofton::{area_long_diagonal, area_region};
use crate::error::{Error, Result};
use crate::geom::QuadCoords;
use crate::moduli::{ell_long_diagonal, in_region_plus, in_region_plus_ell, theta_long_diagonal};
use crate::quadrature::{composite, composite_sqrt_end, composite_sqrt_start, refine, DEFAULT_TOL};

pub const DEFAULT_GRID: usize = 1024;
pub const MIN_GRID: usize = 16;
pub const DOMINANCE_TOL: f64 = 1e-8;

pub const MU_INTERVAL: &str = "[1, sqrt(2))";
pub const NU_INTERVAL: &str = "[1, 2]";

/// Largest `theta` keeping `d(v2, v4) <= r` at this `ell`.
pub fn theta_max(ell: f64, r: f64) -> f64 {
    let den = 2.0 - ell * ell / 2.0;
    if den <= 0.0 {
        return PI;
    }
    (1.0 - r * r / den).clamp(-1.0, 1.0).acos()
}

/// `d theta_max / d r`, zero where `theta_max` is pinned at `pi`.
pub fn dtheta_max_dr(ell: f64, r: f64) -> f64 {
    let den = 2.0 - ell * ell / 2.0;
    if den <= 0.0 {
        return 0.0;
    }
    let a = 1.0 - r * r / den;
    if a <= -1.0 {
        return 0.0;
    }
    2.0 * r / (den * (1.0 - a * a).sqrt())
}

/// The `ell` at which `theta_max(ell, r)` reaches `pi`.
pub fn ell_saturation(r: f64) -> f64 {
    (4.0 - r * r).max(0.0).sqrt()
}

/// Smallest `ell` with `d(v2, v4) <= r` at this `theta`. A value above `r`
/// means the fiber at `theta` is empty.
pub fn ell_min(theta: f64, r: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    let s = (theta / 2.0).sin();
    let chord_sq = 4.0 * s * s;
    2.0 * (1.0 - r * r / chord_sq).max(0.0).sqrt()
}

fn check_mu(what: &'static str, r: f64) -> Result<()> {
    if (1.0..SQRT_2).contains(&r) {
        Ok(())
    } else {
        Err(Error::Regime { what, interval: MU_INTERVAL, r })
    }
}

fn check_nu(what: &'static str, r: f64) -> Result<()> {
    if (1.0..=2.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Regime { what, interval: NU_INTERVAL, r })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcKind {
    /// `ell = r`, parametrized by `theta`.
    Ell,
    /// `d(v2, v4) = r`, parametrized by `ell`.
    Theta,
    /// `ell = r` side of the long-diagonal region, parametrized by `theta`.
    LongDiagonal,
}

impl ArcKind {
    pub fn label(self) -> &'static str {
        match self {
            ArcKind::Ell => "ell",
            ArcKind::Theta => "theta",
            ArcKind::LongDiagonal => "long_diagonal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub kind: ArcKind,
    pub r: f64,
    pub lo: f64,
    pub hi: f64,
}

impl BoundaryArc {
    pub fn ell(r: f64) -> Self {
        BoundaryArc { kind: ArcKind::Ell, r, lo: 0.0, hi: theta_max(r, r).min(PI) }
    }

    pub fn theta(r: f64) -> Self {
        BoundaryArc { kind: ArcKind::Theta, r, lo: 0.0, hi: r.min(2.0) }
    }

    pub fn long_diagonal(r: f64) -> Self {
        BoundaryArc { kind: ArcKind::LongDiagonal, r, lo: 0.0, hi: theta_long_diagonal(r) }
    }

    /// Chart point at arc parameter `s`.
    pub fn point(&self, s: f64) -> QuadCoords {
        match self.kind {
            ArcKind::Ell | ArcKind::LongDiagonal => QuadCoords { ell: self.r, theta: s },
            ArcKind::Theta => QuadCoords { ell: s, theta: theta_max(s, self.r) },
        }
    }
}

/// Density values tabulated on a uniform grid over an arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub arc: BoundaryArc,
    pub params: Vec<f64>,
    pub density: Vec<f64>,
    /// Mass of the measure on this arc, from the quadrature normalization.
    pub mass: f64,
    /// Trapezoidal integral of the tabulated values.
    pub normalized_mass: f64,
}

impl DensityGrid {
    pub fn tabulate<F: Fn(f64) -> f64>(arc: BoundaryArc, grid_size: usize, mass: f64, f: F) -> Result<Self> {
        if grid_size < MIN_GRID {
            return Err(Error::domain("DensityGrid", format!("grid_size {grid_size} < {MIN_GRID}")));
        }
        let h = (arc.hi - arc.lo) / (grid_size - 1) as f64;
        let params: Vec<f64> = (0..grid_size)
            .map(|i| if i + 1 == grid_size { arc.hi } else { arc.lo + h * i as f64 })
            .collect();
        let density: Vec<f64> = params.iter().map(|&s| f(s).max(0.0)).collect();
        let normalized_mass = trapezoid(&params, &density);
        Ok(DensityGrid { arc, params, density, mass, normalized_mass })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Cumulative trapezoidal distribution, scaled to end at 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 1..self.len() {
            acc += 0.5 * (self.density[i] + self.density[i - 1]) * (self.params[i] - self.params[i - 1]);
            out.push(acc);
        }
        if acc > 0.0 {
            out.iter_mut().for_each(|v| *v /= acc);
        }
        out
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
        .sum()
}

/// Closed-form densities of `mu_B` and `mu_I` at a fixed `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuMeasures {
    pub r: f64,
    /// Mass of both measures on the `ell` arc.
    pub alpha: f64,
    /// Boundary speed integrated over both arcs, `d/dr` of the chart area.
    pub boundary_speed: f64,
    pub area: f64,
}

impl MuMeasures {
    pub fn new(r: f64) -> Result<Self> {
        check_mu("mu measures", r)?;
        let ell_part = theta_max(r, r);
        let theta_part = theta_arc_speed(r)?;
        let boundary_speed = ell_part + theta_part;
        Ok(MuMeasures {
            r,
            alpha: ell_part / boundary_speed,
            boundary_speed,
            area: area_region(r)?,
        })
    }

    pub fn boundary_ell(&self, _theta: f64) -> f64 {
        1.0 / self.boundary_speed
    }

    pub fn boundary_theta(&self, ell: f64) -> f64 {
        dtheta_max_dr(ell, self.r) / self.boundary_speed
    }

    /// Fiber length `r - ell_min` of the chart at `theta`, scaled to mass `alpha`.
    pub fn interior_ell(&self, theta: f64) -> f64 {
        self.alpha * (self.r - ell_min(theta, self.r)).max(0.0) / self.area
    }

    /// Fiber length `theta_max` at `ell`, scaled to mass `1 - alpha`.
    pub fn interior_theta(&self, ell: f64) -> f64 {
        (1.0 - self.alpha) * theta_max(ell, self.r) / self.area
    }

    /// Where `ell_min(theta, r)` leaves zero; the interior `ell`-arc density has a
    /// square-root corner there.
    pub fn interior_kink(&self) -> f64 {
        theta_max(0.0, self.r)
    }
}

/// `int_0^r d theta_max / dr d ell`; the integrand has an inverse square-root
/// singularity at `ell_saturation(r)`, which is integrated by substitution.
fn theta_arc_speed(r: f64) -> Result<f64> {
    let end = ell_saturation(r);
    let upper = r.min(end);
    let v = refine(
        |p| composite_sqrt_end(|l| dtheta_max_dr(l, r), 0.0, upper, end, p),
        2,
        DEFAULT_TOL,
    )?;
    Ok(v.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuGrids {
    pub ell: DensityGrid,
    pub theta: DensityGrid,
    pub alpha: f64,
}

/// Tabulated `mu_B` on both arcs, jointly normalized to total mass 1.
pub fn mu_b_grid(r: f64, grid_size: usize) -> Result<MuGrids> {
    let m = MuMeasures::new(r)?;
    Ok(MuGrids {
        ell: DensityGrid::tabulate(BoundaryArc::ell(r), grid_size, m.alpha, |t| m.boundary_ell(t))?,
        theta: DensityGrid::tabulate(BoundaryArc::theta(r), grid_size, 1.0 - m.alpha, |l| {
            m.boundary_theta(l)
        })?,
        alpha: m.alpha,
    })
}

/// Tabulated `mu_I`, with mass `alpha` on the `ell` arc and `1 - alpha` on the `theta` arc.
pub fn mu_i_grid(r: f64, grid_size: usize, alpha: f64) -> Result<MuGrids> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("mu_i_grid", format!("alpha = {alpha} not in [0, 1]")));
    }
    let m = MuMeasures { alpha, ..MuMeasures::new(r)? };
    Ok(MuGrids {
        ell: DensityGrid::tabulate(BoundaryArc::ell(r), grid_size, alpha, |t| m.interior_ell(t))?,
        theta: DensityGrid::tabulate(BoundaryArc::theta(r), grid_size, 1.0 - alpha, |l| {
            m.interior_theta(l)
        })?,
        alpha,
    })
}

/// Closed-form densities of `nu_B` and `nu_I` at a fixed `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuMeasures {
    pub r: f64,
    pub arc_end: f64,
    pub area: f64,
}

impl NuMeasures {
    pub fn new(r: f64) -> Result<Self> {
        check_nu("nu measures", r)?;
        Ok(NuMeasures { r, arc_end: theta_long_diagonal(r), area: area_long_diagonal(r)? })
    }

    pub fn boundary(&self, _theta: f64) -> f64 {
        1.0 / self.arc_end
    }

    pub fn interior(&self, theta: f64) -> f64 {
        (self.r - ell_long_diagonal(theta)).max(0.0) / self.area
    }
}

pub fn nu_grids(r: f64, grid_size: usize) -> Result<(DensityGrid, DensityGrid)> {
    let m = NuMeasures::new(r)?;
    let arc = BoundaryArc::long_diagonal(r);
    Ok((
        DensityGrid::tabulate(arc, grid_size, 1.0, |t| m.boundary(t))?,
        DensityGrid::tabulate(arc, grid_size, 1.0, |t| m.interior(t))?,
    ))
}

/// Integral of `f` along the `ell` arc against the `mu_I` density, split at
/// the corner of `ell_min`.
pub fn integrate_interior_ell<F: Fn(f64) -> f64>(m: &MuMeasures, f: F, panels: usize) -> f64 {
    let kink = m.interior_kink();
    let end = theta_max(m.r, m.r);
    let g = |t: f64| f(t) * m.interior_ell(t);
    composite(g, 0.0, kink.min(end), panels) + composite_sqrt_start(g, kink.min(end), end, kink.min(end), panels)
}

pub fn project_pi_ell(q: QuadCoords, r: f64) -> Result<QuadCoords> {
    if !in_region_plus(q, r)? {
        return Err(Error::domain("project_pi_ell", format!("{q:?} outside the confined region at r = {r}")));
    }
    Ok(QuadCoords { ell: r, theta: q.theta })
}

pub fn project_pi_theta(q: QuadCoords, r: f64) -> Result<QuadCoords> {
    if !in_region_plus(q, r)? {
        return Err(Error::domain(
            "project_pi_theta",
            format!("{q:?} outside the confined region at r = {r}"),
        ));
    }
    Ok(QuadCoords { ell: q.ell, theta: theta_max(q.ell, r) })
}

pub fn project_pi_long_diagonal(q: QuadCoords, r: f64) -> Result<QuadCoords> {
    if !in_region_plus_ell(q, r)? {
        return Err(Error::domain(
            "project_pi_long_diagonal",
            format!("{q:?} outside the long-diagonal region at r = {r}"),
        ));
    }
    Ok(QuadCoords { ell: r, theta: q.theta })
}

fn psi_bracket(ell: f64, r: f64) -> f64 {
    let d = 4.0 - ell * ell;
    r * r * (d - r * r) / (d * d)
}

/// `-2 sqrt(r^2 (4 - ell^2 - r^2) / (4 - ell^2)^2) + acos((ell^2 + 2 r^2 - 4) / (ell^2 - 4))`.
pub fn psi1(ell: f64, r: f64) -> Result<f64> {
    if !(ell >= 0.0 && r > 0.0 && ell * ell + r * r <= 4.0 + 1e-12) {
        return Err(Error::domain("psi1", format!("(ell, r) = ({ell}, {r}) outside ell >= 0, r > 0, ell^2 + r^2 <= 4")));
    }
    let arg = (ell * ell + 2.0 * r * r - 4.0) / (ell * ell - 4.0);
    Ok(-2.0 * psi_bracket(ell, r).max(0.0).sqrt() + arg.clamp(-1.0, 1.0).acos())
}

/// `d psi1 / d ell = 4 ell r^4 / ((4 - ell^2)^3 sqrt(r^2 (4 - ell^2 - r^2) / (4 - ell^2)^2))`.
pub fn dpsi1_dell(ell: f64, r: f64) -> f64 {
    let d = 4.0 - ell * ell;
    4.0 * ell * r.powi(4) / (d.powi(3) * psi_bracket(ell, r).sqrt())
}

/// Likelihood ratio `d mu_B / d mu_I` on the `theta` arc, up to a constant:
/// `(d theta_max / d r) / theta_max`.
pub fn likelihood_ratio(ell: f64, r: f64) -> f64 {
    dtheta_max_dr(ell, r) / theta_max(ell, r)
}

/// Closed-form `d/d ell` of [`likelihood_ratio`]; its sign is the sign of `psi1`.
pub fn likelihood_ratio_slope(ell: f64, r: f64) -> Result<f64> {
    let p = psi1(ell, r)?;
    let d = ell * ell - 4.0;
    let a = theta_max(ell, r);
    let den = d.powi(3) * psi_bracket(ell, r).powf(1.5) * a * a;
    Ok(-2.0 * ell * r.powi(3) * p / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    /// `max_x (F_upper(x) - F_lower(x))`, clipped at 0.
    pub cdf_violation: f64,
    /// Smallest gap `F_lower - F_upper` over interior grid points.
    pub cdf_min_margin: f64,
    /// Most negative slope of the ratio `upper / lower`, as a positive number.
    pub mlr_violation: f64,
    pub min_ratio_slope: f64,
    pub cdf_holds: bool,
    pub mlr_holds: bool,
    pub tolerance: f64,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.cdf_holds && self.mlr_holds
    }
}

/// First-order and likelihood-ratio dominance of `upper` over `lower`.
pub fn stochastic_dominance(lower: &DensityGrid, upper: &DensityGrid) -> Result<DominanceReport> {
    if lower.arc.kind != upper.arc.kind {
        return Err(Error::GridMismatch(format!("arcs {:?} and {:?}", lower.arc.kind, upper.arc.kind)));
    }
    if lower.len() != upper.len() {
        return Err(Error::GridMismatch(format!("{} vs {} grid points", lower.len(), upper.len())));
    }
    if lower.params.iter().zip(&upper.params).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::GridMismatch("parameter grids differ".into()));
    }
    if (lower.mass - upper.mass).abs() > 1e-9 * lower.mass.abs().max(1.0) {
        return Err(Error::GridMismatch(format!("masses {} and {} differ", lower.mass, upper.mass)));
    }
    let fl = lower.cdf();
    let fu = upper.cdf();
    let mut cdf_violation = 0.0_f64;
    let mut cdf_min_margin = f64::INFINITY;
    for i in 0..fl.len() {
        cdf_violation = cdf_violation.max(fu[i] - fl[i]);
        if i > 0 && i + 1 < fl.len() {
            cdf_min_margin = cdf_min_margin.min(fl[i] - fu[i]);
        }
    }

    let scale = lower.density.iter().cloned().fold(0.0, f64::max);
    let mut min_ratio_slope = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..lower.len() {
        let (lo, up) = (lower.density[i], upper.density[i]);
        if lo <= 1e-12 * scale || up <= 0.0 {
            prev = None;
            continue;
        }
        let ratio = up / lo;
        if let Some((x0, r0)) = prev {
            min_ratio_slope = min_ratio_slope.min((ratio - r0) / (lower.params[i] - x0));
        }
        prev = Some((lower.params[i], ratio));
    }
    let mlr_violation = (-min_ratio_slope).max(0.0);
    Ok(DominanceReport {
        cdf_violation,
        cdf_min_margin,
        mlr_violation,
        min_ratio_slope,
        cdf_holds: cdf_violation <= DOMINANCE_TOL,
        mlr_holds: mlr_violation <= DOMINANCE_TOL,
        tolerance: DOMINANCE_TOL,
    })
}
