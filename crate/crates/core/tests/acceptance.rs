//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p polyconf --test acceptance -- --nocapture` to see
//! the report. Every criterion calls the library directly; tolerances are
//! pinned below.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::time::{Duration, Instant};

use polyconf::crofton::{
    crofton_residual, kappa_bar, kappa_boundary, monotonicity_scan, KappaMethod, Measure, ScanOptions, DEFAULT_H,
    MONOTONE_TOL, SQRT2_COLLAR,
};
use polyconf::geom::{d24_closed, dkappa_dt_closed, quad_curvature_closed, quad_from_coords, QuadCoords};
use polyconf::knotproxy::{asymptote_check, extreme_confinement_check, loose_confinement_check, loose_scaling};
use polyconf::measures::{likelihood_ratio_slope, mu_b_grid, mu_i_grid, psi1, stochastic_dominance};
use polyconf::moduli::ConfinedRegionSpec;
use polyconf::par::Exec;
use polyconf::sampling::{confined_curvatures, sample_confined_map, SamplerOptions};
use polyconf::stats::chi_square_uniform_2d;

const SEED: u64 = 7;

const CURVE_RUNTIME: Duration = Duration::from_secs(60);
const STRICT_GAP_FACTOR: f64 = 10.0;
const CROFTON_TOL: f64 = 1e-3;
const ALPHA_TOL: f64 = 5e-3;
const ALPHA_GRID: usize = 2048;
const DOMINANCE_TOL: f64 = 1e-8;
const DOMINANCE_GRID: usize = 1024;
const PSI1_FLOOR: f64 = -1e-10;
const CHART_GRID: usize = 200;
const CHART_TOL: f64 = 1e-9;
const DERIVATIVE_REL_TOL: f64 = 1e-4;
const CHI2_MIN_P: f64 = 0.01;
const MC_SIGMAS: f64 = 3.0;
const MC_SAMPLES: usize = 100_000;
const SAMPLER_RUNTIME: Duration = Duration::from_secs(120);
const TIGHT_SAMPLES: usize = 10_000;
const TIGHT_TOL: f64 = 1e-8;
const SCALING_SAMPLES: usize = 10_000;
const SCALING_EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
const SCALING_SLOPE: (f64, f64) = (0.4, 0.6);

struct Outcome {
    id: usize,
    claim: &'static str,
    pass: bool,
    detail: String,
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn r_grid() -> Vec<f64> {
    (0..=20).map(|i| 1.0 + 0.05 * i as f64).collect()
}

fn monotone_curve() -> Outcome {
    let start = Instant::now();
    let (curve, verdict) = monotonicity_scan(&r_grid(), &ScanOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let allowance = curve.kappa_bar.iter().map(|k| k.uncertainty()).fold(0.0, f64::max);
    let rise = curve.kappa_bar.windows(2).map(|w| w[1].value - w[0].value).fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        id: 1,
        claim: "quadrature kappa_bar non-increasing on r = 1.00..2.00",
        pass: verdict.pass && rise <= MONOTONE_TOL + 2.0 * allowance && elapsed < CURVE_RUNTIME,
        detail: format!(
            "largest rise {rise:.3e} (allowed {MONOTONE_TOL:e} + {:.1e}), {:.1} s of {} s",
            2.0 * allowance,
            elapsed.as_secs_f64(),
            CURVE_RUNTIME.as_secs()
        ),
    }
}

fn inequality_chain() -> Outcome {
    let mut worst = f64::INFINITY;
    for r in [1.1, 1.2, 1.3] {
        let b = kappa_boundary(r, Measure::MuB).unwrap();
        let i = kappa_boundary(r, Measure::MuI).unwrap();
        let k = kappa_bar(r, KappaMethod::default(), Exec::default()).unwrap();
        let err_bi = (b.uncertainty() + i.uncertainty()).max(f64::EPSILON);
        let err_ik = (i.uncertainty() + k.uncertainty()).max(f64::EPSILON);
        worst = worst.min((i.value - b.value) / err_bi).min((k.value - i.value) / err_ik);
    }
    Outcome {
        id: 2,
        claim: "kappa_mu_B < kappa_mu_I < kappa_bar at r = 1.1, 1.2, 1.3",
        pass: worst > STRICT_GAP_FACTOR,
        detail: format!("smallest gap / combined error {worst:.3e} (need > {STRICT_GAP_FACTOR})"),
    }
}

fn crofton_identity() -> Outcome {
    let radii = [1.05, 1.1, 1.2, 1.3, 1.38, 1.45, 1.55, 1.7, 1.85, 1.95];
    let mut worst = 0.0_f64;
    for r in radii {
        assert!((r - SQRT_2).abs() > SQRT2_COLLAR);
        worst = worst.max(crofton_residual(r, DEFAULT_H).unwrap().residual);
    }
    Outcome {
        id: 3,
        claim: "Crofton residual at 10 radii off the sqrt(2) collar",
        pass: worst <= CROFTON_TOL,
        detail: format!("max residual {worst:.3e} (tol {CROFTON_TOL:e})"),
    }
}

fn alpha_half() -> Outcome {
    let mut worst = 0.0_f64;
    for r in [1.1, 1.2, 1.3] {
        let g = mu_b_grid(r, ALPHA_GRID).unwrap();
        let on_grid = g.ell.normalized_mass / (g.ell.normalized_mass + g.theta.normalized_mass);
        worst = worst.max((g.alpha - 0.5).abs()).max((on_grid - 0.5).abs());
    }
    Outcome {
        id: 4,
        claim: "alpha = 1/2 at r = 1.1, 1.2, 1.3 (grid 2048)",
        pass: worst <= ALPHA_TOL,
        detail: format!("max |alpha - 0.5| {worst:.3e} (tol {ALPHA_TOL:e})"),
    }
}

fn dominance() -> Outcome {
    let mut cdf = 0.0_f64;
    let mut mlr = 0.0_f64;
    let mut slope = f64::INFINITY;
    for r in [1.1, 1.2, 1.3] {
        let b = mu_b_grid(r, DOMINANCE_GRID).unwrap();
        let i = mu_i_grid(r, DOMINANCE_GRID, b.alpha).unwrap();
        for (lower, upper) in [(&i.theta, &b.theta), (&i.ell, &b.ell)] {
            let d = stochastic_dominance(lower, upper).unwrap();
            cdf = cdf.max(d.cdf_violation);
            mlr = mlr.max(d.mlr_violation);
        }
        for l in grid(0.0, r, DOMINANCE_GRID).into_iter().skip(1).take(DOMINANCE_GRID - 2) {
            slope = slope.min(likelihood_ratio_slope(l, r).unwrap());
        }
    }
    Outcome {
        id: 5,
        claim: "mu_B dominates mu_I in CDF and likelihood ratio",
        pass: cdf <= DOMINANCE_TOL && mlr <= DOMINANCE_TOL && slope >= -DOMINANCE_TOL,
        detail: format!("CDF violation {cdf:.2e}, grid MLR violation {mlr:.2e}, min ratio slope {slope:.3e}"),
    }
}

fn psi1_nonnegative() -> Outcome {
    let mut least = f64::INFINITY;
    for r in grid(1.0, SQRT_2 - 0.01, 100) {
        for l in grid(0.0, (4.0 - r * r).sqrt() - 0.01, 200) {
            least = least.min(psi1(l, r).unwrap());
        }
    }
    Outcome {
        id: 6,
        claim: "psi1 >= 0 on r in [1, sqrt(2) - 0.01], ell in [0, sqrt(4 - r^2) - 0.01]",
        pass: least >= PSI1_FLOOR,
        detail: format!("min psi1 {least:.3e} (floor {PSI1_FLOOR:e})"),
    }
}

fn chart_kappa() -> Vec<Vec<f64>> {
    let thetas = grid(0.0, PI, CHART_GRID);
    grid(0.0, 2.0, CHART_GRID)
        .into_iter()
        .map(|l| thetas.iter().map(|&t| quad_from_coords(QuadCoords::new(l, t).unwrap()).total_curvature()).collect())
        .collect()
}

fn curvature_monotone(kappa: &[Vec<f64>]) -> Outcome {
    let n = CHART_GRID;
    let in_theta = kappa.iter().flat_map(|row| row.windows(2).map(|w| w[1] - w[0])).fold(f64::NEG_INFINITY, f64::max);
    let in_ell = (1..n)
        .flat_map(|i| (0..n).map(move |j| kappa[i][j] - kappa[i - 1][j]))
        .fold(f64::NEG_INFINITY, f64::max);
    let flat = kappa.iter().map(|row| (row[n - 1] - TAU).abs()).fold(0.0, f64::max);
    Outcome {
        id: 7,
        claim: "kappa non-increasing in theta and ell; kappa(., pi) = 2 pi",
        pass: in_theta <= CHART_TOL && in_ell <= CHART_TOL && flat <= CHART_TOL,
        detail: format!("max rise theta {in_theta:.2e}, ell {in_ell:.2e}; max |kappa(., pi) - 2 pi| {flat:.2e}"),
    }
}

fn closed_forms(kappa: &[Vec<f64>]) -> Outcome {
    let mut curvature = 0.0_f64;
    let mut distance = 0.0_f64;
    for (i, l) in grid(0.0, 2.0, CHART_GRID).into_iter().enumerate() {
        for (j, t) in grid(0.0, PI, CHART_GRID).into_iter().enumerate() {
            let q = QuadCoords::new(l, t).unwrap();
            curvature = curvature.max((quad_curvature_closed(l * l / 4.0, t.cos()).unwrap() - kappa[i][j]).abs());
            let v = quad_from_coords(q).vertices();
            distance = distance.max((d24_closed(q) - (v[1] - v[3]).norm()).abs());
        }
    }
    // Central differences in t, kept off the arccos branch points.
    let h = 1e-6;
    let mut rel = 0.0_f64;
    for t in grid(0.05, 0.95, 37) {
        for c in grid(-1.0, 0.9, 39) {
            let d = dkappa_dt_closed(t, c).unwrap();
            let fd = (quad_curvature_closed(t + h, c).unwrap() - quad_curvature_closed(t - h, c).unwrap()) / (2.0 * h);
            rel = rel.max((d - fd).abs() / d.abs().max(1e-2));
        }
    }
    Outcome {
        id: 8,
        claim: "closed forms match vertex oracles; d kappa/dt matches finite differences",
        pass: curvature <= CHART_TOL && distance <= CHART_TOL && rel <= DERIVATIVE_REL_TOL,
        detail: format!("curvature {curvature:.2e}, d(v2,v4) {distance:.2e}, derivative rel {rel:.2e}"),
    }
}

fn sampler() -> Outcome {
    let start = Instant::now();
    let opts = SamplerOptions::default();
    // Reflection theta -> 2 pi - theta is an isometry, so the chart is the half [0, 2] x [0, pi].
    let unconfined = ConfinedRegionSpec::new(4, 2.0).unwrap();
    let run = sample_confined_map(&unconfined, MC_SAMPLES, SEED, &opts, |ells, thetas, _| {
        (ells[0], if thetas[0] > PI { TAU - thetas[0] } else { thetas[0] })
    })
    .unwrap();
    let chi = chi_square_uniform_2d(&run.items, (0.0, 2.0), (0.0, PI), (20, 20));

    let mut worst_z = 0.0_f64;
    for r in r_grid() {
        let mc = confined_curvatures(&ConfinedRegionSpec::new(4, r).unwrap(), MC_SAMPLES, SEED, &opts).unwrap();
        let mean = polyconf::Estimate::from_samples(&mc.items, SEED);
        let q = kappa_bar(r, KappaMethod::default(), Exec::default()).unwrap();
        worst_z = worst_z.max((mean.value - q.value).abs() / mean.std_error);
    }
    let elapsed = start.elapsed();
    Outcome {
        id: 9,
        claim: "n=4 sampler uniform; Monte Carlo kappa_bar within 3 sigma of quadrature",
        pass: chi.p_value > CHI2_MIN_P && worst_z <= MC_SIGMAS && elapsed < SAMPLER_RUNTIME,
        detail: format!(
            "chi2 p = {:.3}, max |z| = {worst_z:.2} over 21 radii, {:.1} s of {} s",
            chi.p_value,
            elapsed.as_secs_f64(),
            SAMPLER_RUNTIME.as_secs()
        ),
    }
}

fn tight_confinement() -> Outcome {
    let mut margin = f64::INFINITY;
    for n in [4, 6] {
        let t = extreme_confinement_check(n, TIGHT_SAMPLES, SEED, &SamplerOptions::default()).unwrap();
        assert_eq!(t.report.samples, TIGHT_SAMPLES);
        margin = margin.min(t.margin);
    }
    Outcome {
        id: 10,
        claim: "kappa >= 2 pi n / 3 at r = 1 for n = 4, 6",
        pass: margin >= -TIGHT_TOL,
        detail: format!("min kappa - bound {margin:.4e} over {TIGHT_SAMPLES} samples each"),
    }
}

fn loose_confinement() -> Outcome {
    let opts = SamplerOptions::default();
    let s = loose_scaling(6, &SCALING_EPSILONS, SCALING_SAMPLES, SEED, &opts).unwrap();
    let at = loose_confinement_check(6, 0.05, SCALING_SAMPLES, SEED, &opts).unwrap();
    let in_band = (SCALING_SLOPE.0..=SCALING_SLOPE.1).contains(&s.exponent);
    Outcome {
        id: 11,
        claim: "n=6 max |kappa - 2 pi| shrinks like epsilon^(1/2); unknotted at epsilon = 0.05",
        pass: s.decreasing && in_band && at.max_curvature < 4.0 * PI,
        detail: format!(
            "decreasing {}, slope {:.4}, max kappa at 0.05 = {:.4} (< 4 pi = {:.4})",
            s.decreasing,
            s.exponent,
            at.max_curvature,
            4.0 * PI
        ),
    }
}

fn asymptote() -> Outcome {
    let rows = asymptote_check(&[8, 64], MC_SAMPLES, SEED, &SamplerOptions::default()).unwrap();
    let sigma = rows[0].mean_curvature.std_error.hypot(rows[1].mean_curvature.std_error);
    let (d8, d64) = (rows[0].deviation.abs(), rows[1].deviation.abs());
    Outcome {
        id: 12,
        claim: "mean curvature approaches pi n / 2 + pi / 4 from n = 8 to n = 64",
        pass: d64 <= d8 + MC_SIGMAS * sigma,
        detail: format!("|dev(8)| = {d8:.4}, |dev(64)| = {d64:.4}, 3 sigma = {:.4}", MC_SIGMAS * sigma),
    }
}

#[test]
fn acceptance_criteria() {
    let kappa = chart_kappa();
    let outcomes = vec![
        monotone_curve(),
        inequality_chain(),
        crofton_identity(),
        alpha_half(),
        dominance(),
        psi1_nonnegative(),
        curvature_monotone(&kappa),
        closed_forms(&kappa),
        sampler(),
        tight_confinement(),
        loose_confinement(),
        asymptote(),
    ];
    for o in &outcomes {
        println!("{} {:>2} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.claim, o.detail);
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
