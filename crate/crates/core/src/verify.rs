//! Named numerical checks of every structural claim the library relies on,
//! grouped into suites and reported with their tolerances and margins.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::crofton::{
    crofton_residual, kappa_bar, kappa_boundary, monotonicity_scan, KappaMethod, Measure, ScanOptions, DEFAULT_H,
    SQRT2_COLLAR,
};
use crate::error::{Error, Result};
use crate::geom::{
    d24_closed, dkappa_dt_closed, psi2, quad_curvature_closed, quad_from_coords, QuadCoords, BRANCH_MARGIN,
};
use crate::knotproxy::{
    asymptote_check, extreme_confinement_check, knotting_fraction_scan, loose_confinement_check, loose_scaling,
    SCALING_EPSILONS, TIGHT_BOUND_TOL,
};
use crate::measures::{
    ell_min, likelihood_ratio_slope, mu_b_grid, mu_i_grid, nu_grids, psi1, stochastic_dominance, theta_max,
    MuMeasures, DOMINANCE_TOL,
};
use crate::moduli::{in_region_plus, recover, reconstruct, ActionAngle, ConfinedRegionSpec};
use crate::par::Exec;
use crate::sampling::{sample_confined, SamplerOptions};
use crate::stats::chi_square_uniform_2d;

/// Chart grid resolution for the pointwise geometric checks.
pub const CHART_GRID: usize = 200;

/// Tolerance of the pointwise geometric identities.
pub const GEOM_TOL: f64 = 1e-9;

pub const CROFTON_TOL: f64 = 1e-3;
pub const ALPHA_TOL: f64 = 5e-3;
pub const ALPHA_GRID: usize = 2048;

/// Radii for the Crofton residual check, clear of the `sqrt(2)` collar.
pub const CROFTON_RADII: [f64; 10] = [1.05, 1.1, 1.2, 1.3, 1.38, 1.45, 1.55, 1.7, 1.85, 1.95];

/// Radii where the boundary, interior and region means are compared.
pub const CHAIN_RADII: [f64; 6] = [1.1, 1.15, 1.2, 1.25, 1.3, 1.35];

pub const ALPHA_RADII: [f64; 3] = [1.1, 1.2, 1.3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Dominance,
    Crofton,
    Alpha,
    Knotproxy,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["lemmas", "dominance", "crofton", "alpha", "knotproxy", "all"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemmas" => Suite::Lemmas,
            "dominance" => Suite::Dominance,
            "crofton" => Suite::Crofton,
            "alpha" => Suite::Alpha,
            "knotproxy" => Suite::Knotproxy,
            "all" => Suite::All,
            _ => {
                return Err(Error::domain(
                    "suite",
                    format!("unknown suite {s:?}; expected one of {}", Suite::NAMES.join(", ")),
                ))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [Suite::Lemmas, Suite::Dominance, Suite::Crofton, Suite::Alpha, Suite::Knotproxy, Suite::All]
            .iter()
            .position(|s| s == self)
            .unwrap_or(0);
        f.write_str(Suite::NAMES[i])
    }
}

/// One named pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The quantity compared against the tolerance.
    pub measured: f64,
    pub tolerance: f64,
    /// Distance to failure; nonnegative exactly when the check passes.
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let margin = tolerance - measured;
        Check { name: name.into(), measured, tolerance, margin, pass: margin >= 0.0 }
    }

    /// Passes when `measured >= bound`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        let margin = measured - bound;
        Check { name: name.into(), measured, tolerance: bound, margin, pass: margin >= 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Samples for the extreme- and loose-confinement checks.
    pub samples: usize,
    /// Samples for the Monte Carlo means and the uniformity test.
    pub mc_samples: usize,
    pub grid_size: usize,
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 7, samples: 10_000, mc_samples: 100_000, grid_size: 1024, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let checks = match suite {
        Suite::Lemmas => lemma_checks()?,
        Suite::Dominance => dominance_checks(cfg)?,
        Suite::Crofton => crofton_checks(cfg)?,
        Suite::Alpha => alpha_checks(cfg)?,
        Suite::Knotproxy => knotproxy_checks(cfg)?,
        Suite::All => {
            let mut all = lemma_checks()?;
            all.extend(dominance_checks(cfg)?);
            all.extend(crofton_checks(cfg)?);
            all.extend(alpha_checks(cfg)?);
            all.extend(knotproxy_checks(cfg)?);
            all
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { suite, seed: cfg.seed, checks, pass })
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// Chart grid `ell in [0, 2]` by `theta in [0, pi]`, row-major in `ell`.
fn chart_curvatures() -> Vec<Vec<f64>> {
    grid(0.0, 2.0, CHART_GRID)
        .map(|l| grid(0.0, PI, CHART_GRID).map(|t| quad_from_coords(QuadCoords { ell: l, theta: t }).total_curvature()).collect())
        .collect()
}

fn largest<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Pointwise geometry, region shape, `psi` functions and likelihood-ratio slope.
pub fn lemma_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let ells: Vec<f64> = grid(0.0, 2.0, CHART_GRID).collect();
    let thetas: Vec<f64> = grid(0.0, PI, CHART_GRID).collect();
    let kappa = chart_curvatures();

    let mut closure = 0.0_f64;
    let mut closed_form = 0.0_f64;
    let mut d24 = 0.0_f64;
    for (i, &l) in ells.iter().enumerate() {
        for (j, &t) in thetas.iter().enumerate() {
            let q = QuadCoords { ell: l, theta: t };
            let p = quad_from_coords(q);
            let e = p.edges();
            closure = closure
                .max(e.iter().sum::<crate::geom::Vec3>().norm())
                .max(largest(e.iter().map(|x| (x.norm() - 1.0).abs())));
            closed_form = closed_form.max((quad_curvature_closed(l * l / 4.0, t.cos())? - kappa[i][j]).abs());
            let v = p.vertices();
            d24 = d24.max((d24_closed(q) - (v[1] - v[3]).norm()).abs());
        }
    }
    out.push(Check::at_most("chart polygons close with unit edges", closure, GEOM_TOL));
    out.push(Check::at_most("closed-form curvature matches vertex curvature", closed_form, GEOM_TOL));
    out.push(Check::at_most("closed-form d(v2,v4) matches vertex distance", d24, GEOM_TOL));

    let rise_theta = largest(kappa.iter().flat_map(|row| row.windows(2).map(|w| w[1] - w[0])));
    let rise_ell = largest((1..CHART_GRID).flat_map(|i| (0..CHART_GRID).map(move |j| (i, j))).map(|(i, j)| kappa[i][j] - kappa[i - 1][j]));
    let flat = largest(kappa.iter().map(|row| (row[CHART_GRID - 1] - TAU).abs()));
    out.push(Check::at_most("curvature non-increasing in theta", rise_theta, GEOM_TOL));
    out.push(Check::at_most("curvature non-increasing in ell", rise_ell, GEOM_TOL));
    out.push(Check::at_most("curvature equals 2 pi at theta = pi", flat, GEOM_TOL));

    // d kappa / dt against central differences, away from the arccos branch points.
    let h = 1e-6;
    let mut worst = 0.0_f64;
    let mut positive = f64::NEG_INFINITY;
    for t in grid(0.05, 0.95, 37) {
        for c in grid(-1.0, 0.9, 39) {
            let d = dkappa_dt_closed(t, c)?;
            let fd = (quad_curvature_closed(t + h, c)? - quad_curvature_closed(t - h, c)?) / (2.0 * h);
            worst = worst.max((d - fd).abs() / (1e-6_f64).max(1e-4 * d.abs()));
            positive = positive.max(d);
        }
    }
    out.push(Check::at_most("d kappa/dt matches finite differences (relative)", worst, 1.0));
    out.push(Check::at_most("d kappa/dt is non-positive", positive, GEOM_TOL));

    let mut second = f64::NEG_INFINITY;
    for t in grid(0.1, 0.9, 9) {
        let hx = 1e-3;
        for x in grid(-1.0 + 2.0 * hx, 1.0 - 2.0 * hx, 400) {
            second = second.max(psi2(x + hx, t) - 2.0 * psi2(x, t) + psi2(x - hx, t));
        }
    }
    out.push(Check::at_most("psi2 is concave in x", second, GEOM_TOL));

    // Region shape: every theta fiber is an initial segment and every ell fiber a final one.
    let mut star = 0usize;
    let mut ell_mono = 0usize;
    for r in grid(1.0, 2.0, 11) {
        let member: Vec<Vec<bool>> = ells
            .iter()
            .map(|&l| thetas.iter().map(|&t| in_region_plus(QuadCoords { ell: l, theta: t }, r)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        for (i, row) in member.iter().enumerate() {
            star += row.windows(2).filter(|w| w[1] && !w[0]).count();
            if i > 0 {
                ell_mono += (0..CHART_GRID).filter(|&j| member[i - 1][j] && !row[j] && ells[i] <= r).count();
            }
        }
    }
    out.push(Check::at_most("confined region is star-shaped in theta (violations)", star as f64, 0.0));
    out.push(Check::at_most("confined region grows with ell up to r (violations)", ell_mono as f64, 0.0));

    let mut roundtrip = 0.0_f64;
    for l in grid(0.05, 1.95, 40) {
        for t in grid(0.05, PI - 0.05, 40) {
            let a = recover(&reconstruct(&ActionAngle::quad(QuadCoords { ell: l, theta: t }))?);
            roundtrip = roundtrip.max((a.ells[0] - l).abs()).max((a.thetas[0] - t).abs());
        }
    }
    out.push(Check::at_most("action-angle round trip", roundtrip, 1e-8));

    let mut duality = 0.0_f64;
    for r in grid(1.0, 2.0, 11) {
        for &t in &thetas {
            let m = ell_min(t, r);
            if m > 0.0 && m <= 2.0 {
                duality = duality.max((d24_closed(QuadCoords { ell: m, theta: t }) - r).abs());
            }
        }
        for &l in &ells {
            let t = theta_max(l, r);
            if t < PI - BRANCH_MARGIN {
                duality = duality.max((d24_closed(QuadCoords { ell: l, theta: t }) - r).abs());
            }
        }
    }
    out.push(Check::at_most("theta_max and ell_min invert d(v2,v4) = r", duality, 1e-8));

    let mut psi_min = f64::INFINITY;
    let mut slope_min = f64::INFINITY;
    for r in grid(1.0, SQRT_2 - 0.01, 60) {
        let top = (4.0 - r * r).sqrt() - 0.01;
        for l in grid(0.0, top, 200) {
            psi_min = psi_min.min(psi1(l, r)?);
        }
        for l in grid(0.0, r, 202).skip(1).take(200) {
            slope_min = slope_min.min(likelihood_ratio_slope(l, r)?);
        }
    }
    out.push(Check::at_least("psi1 is nonnegative", psi_min, -1e-10));
    out.push(Check::at_least("likelihood ratio d mu_B / d mu_I increases along the theta arc", slope_min, -DOMINANCE_TOL));
    Ok(out)
}

/// CDF and likelihood-ratio ordering of the boundary and interior measures,
/// at the configured grid size and at twice that.
pub fn dominance_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for size in [cfg.grid_size, 2 * cfg.grid_size] {
        for r in ALPHA_RADII {
            let b = mu_b_grid(r, size)?;
            let i = mu_i_grid(r, size, b.alpha)?;
            for (arc, lower, upper) in [("theta", &i.theta, &b.theta), ("ell", &i.ell, &b.ell)] {
                let d = stochastic_dominance(lower, upper)?;
                let tag = format!("r={r} {arc} arc grid={size}");
                out.push(Check::at_most(format!("mu_B dominates mu_I in CDF, {tag}"), d.cdf_violation, DOMINANCE_TOL));
                out.push(Check::at_most(format!("mu_B/mu_I ratio increasing, {tag}"), d.mlr_violation, DOMINANCE_TOL));
            }
        }
        for r in [1.5, 1.7] {
            let (nb, ni) = nu_grids(r, size)?;
            let d = stochastic_dominance(&ni, &nb)?;
            let tag = format!("r={r} grid={size}");
            out.push(Check::at_most(format!("nu_B dominates nu_I in CDF, {tag}"), d.cdf_violation, DOMINANCE_TOL));
            out.push(Check::at_most(format!("nu_B/nu_I ratio increasing, {tag}"), d.mlr_violation, DOMINANCE_TOL));
        }
    }
    Ok(out)
}

/// The monotone curve, the Crofton identity, the strict inequality chain and
/// the Monte Carlo cross-checks.
pub fn crofton_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let r_grid: Vec<f64> = (0..=20).map(|i| 1.0 + 0.05 * i as f64).collect();
    let (curve, verdict) = monotonicity_scan(&r_grid, &ScanOptions { exec: cfg.exec, ..Default::default() })?;
    out.push(Check::at_most("kappa_bar non-increasing on r = 1.00..2.00", verdict.worst_excess, 0.0));

    let first = curve.kappa_bar[0].value;
    let last = curve.kappa_bar[curve.kappa_bar.len() - 1].value;
    let outside = curve
        .kappa_bar
        .iter()
        .map(|k| (k.value - first).max(last - k.value))
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most("kappa_bar(1) >= kappa_bar(r) >= kappa_bar(2)", outside, 1e-12));

    for r in CROFTON_RADII {
        debug_assert!((r - SQRT_2).abs() > SQRT2_COLLAR);
        let c = crofton_residual(r, DEFAULT_H)?;
        out.push(Check::at_most(format!("Crofton residual at r={r}"), c.residual, CROFTON_TOL));
    }
    let near_two = crofton_residual(1.99, DEFAULT_H)?;
    out.push(Check::at_most("Crofton residual at r=1.99", near_two.residual, CROFTON_TOL));

    for r in CHAIN_RADII {
        let b = kappa_boundary(r, Measure::MuB)?;
        let i = kappa_boundary(r, Measure::MuI)?;
        let k = kappa_bar(r, KappaMethod::default(), cfg.exec)?;
        let err_bi = b.uncertainty() + i.uncertainty();
        let err_ik = i.uncertainty() + k.uncertainty();
        out.push(Check::at_least(format!("kappa_mu_I - kappa_mu_B at r={r}"), i.value - b.value, 10.0 * err_bi));
        out.push(Check::at_least(format!("kappa_bar - kappa_mu_I at r={r}"), k.value - i.value, 10.0 * err_ik));
    }
    for r in [1.5, 1.7] {
        let b = kappa_boundary(r, Measure::NuB)?;
        let i = kappa_boundary(r, Measure::NuI)?;
        let k = kappa_bar(r, KappaMethod::default(), cfg.exec)?;
        out.push(Check::at_least(format!("kappa_nu_I - kappa_nu_B at r={r}"), i.value - b.value, 10.0 * (b.uncertainty() + i.uncertainty())));
        out.push(Check::at_least(format!("kappa_bar - kappa_nu_I at r={r}"), k.value - i.value, 10.0 * (i.uncertainty() + k.uncertainty())));
    }

    let opts = SamplerOptions { exec: cfg.exec, ..Default::default() };
    let spec = ConfinedRegionSpec::new(4, 2.0)?;
    let s = sample_confined(&spec, cfg.mc_samples, cfg.seed, &opts)?;
    let pts: Vec<(f64, f64)> = s
        .items
        .iter()
        .map(|p| {
            let t = p.coords.thetas[0];
            (p.coords.ells[0], if t > PI { TAU - t } else { t })
        })
        .collect();
    let chi = chi_square_uniform_2d(&pts, (0.0, 2.0), (0.0, PI), (20, 20));
    out.push(Check::at_least("confined quadrilaterals uniform on the chart at r=2 (chi-square p)", chi.p_value, 0.01));

    let mc = opts.exec.map(&r_grid, |&r| {
        kappa_bar(r, KappaMethod::MonteCarlo { samples: cfg.mc_samples, seed: cfg.seed }, Exec::Sequential)
    });
    for ((r, m), q) in r_grid.iter().zip(mc).zip(&curve.kappa_bar) {
        let m = m?;
        out.push(Check::at_most(
            format!("Monte Carlo kappa_bar within 3 sigma of quadrature at r={r:.2}"),
            (m.value - q.value).abs(),
            3.0 * m.std_error,
        ));
    }
    Ok(out)
}

/// Mass fraction of the `ell` arc under `mu_B`, by quadrature and from the tabulated grid.
pub fn alpha_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let size = cfg.grid_size.max(ALPHA_GRID);
    let mut out = Vec::new();
    for r in ALPHA_RADII {
        let m = MuMeasures::new(r)?;
        out.push(Check::at_most(format!("|alpha - 1/2| at r={r} (quadrature)"), (m.alpha - 0.5).abs(), ALPHA_TOL));
        let g = mu_b_grid(r, size)?;
        let ell = g.ell.normalized_mass;
        let grid_alpha = ell / (ell + g.theta.normalized_mass);
        out.push(Check::at_most(format!("|alpha - 1/2| at r={r} (grid {size})"), (grid_alpha - 0.5).abs(), ALPHA_TOL));
    }
    Ok(out)
}

/// Curvature bounds under extreme and loose confinement, the large-`n`
/// asymptote and the knotting proxy.
pub fn knotproxy_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let opts = SamplerOptions { exec: cfg.exec, ..Default::default() };
    let mut out = Vec::new();
    for n in [4, 6] {
        let t = extreme_confinement_check(n, cfg.samples, cfg.seed, &opts)?;
        out.push(Check::at_least(format!("n={n}, r=1: min curvature - 2 pi n/3"), t.margin, -TIGHT_BOUND_TOL));
    }

    let s = loose_scaling(6, &SCALING_EPSILONS, cfg.samples, cfg.seed, &opts)?;
    out.push(Check::at_least("n=6 shell: max |kappa - 2 pi| decreases with epsilon", f64::from(u8::from(s.decreasing)), 1.0));
    out.push(Check::at_most("n=6 shell: |fitted exponent - 0.5|", (s.exponent - 0.5).abs(), 0.1));
    let at = loose_confinement_check(6, 0.05, cfg.samples, cfg.seed, &opts)?;
    out.push(Check::at_least("n=6 shell, epsilon=0.05: 4 pi - max curvature", 4.0 * PI - at.max_curvature, 0.0));

    let rows = asymptote_check(&[8, 64], cfg.mc_samples, cfg.seed, &opts)?;
    let sigma = rows[0].mean_curvature.std_error.hypot(rows[1].mean_curvature.std_error);
    out.push(Check::at_most(
        "|deviation(64)| - |deviation(8)| from pi n/2 + pi/4",
        rows[1].deviation.abs() - rows[0].deviation.abs(),
        3.0 * sigma,
    ));
    for row in &rows {
        let k = row.mean_curvature.value;
        out.push(Check::at_least(format!("n={} mean curvature inside [0, n pi]", row.n), k.min(row.n as f64 * PI - k), 0.0));
    }

    let r_grid = [2.6, 2.7, 2.8, 2.9, 3.0];
    let fr = knotting_fraction_scan(6, &r_grid, cfg.mc_samples, cfg.seed, &opts)?;
    let rise = fr
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0].frac_possibly_knotted, &w[1].frac_possibly_knotted);
            b.value - a.value - 3.0 * a.std_error.hypot(b.std_error)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most("n=6: possibly-knotted fraction non-increasing as r -> 3", rise, 0.0));
    Ok(out)
}
