//! Uniform samplers on the moduli space of equilateral polygons.
//!
//! The invariant volume form is Lebesgue measure in action-angle
//! coordinates, so uniform sampling means: diagonals uniform on the moment
//! polytope, angles independently uniform on `[0, 2 pi)`.
//!
//! Diagonals are drawn by rejection. The default proposal works in step
//! space: `ell_3 = 1 + s_3` and `ell_{i+1} = ell_i + s_{i+1}` with every
//! step uniform on `[-1, 1]`. The map from steps to diagonals has unit
//! Jacobian and its image contains the polytope, so accepted draws are
//! exactly uniform. When the confinement radius is small, a box clipped to
//! `ell_i <= r` is used instead because it wastes fewer proposals.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{diameter_of_vertices, total_curvature_of_vertices, Polygon, Vec3};
use crate::moduli::{build_vertices, ell_cap, ells_feasible, ActionAngle, ConfinedRegionSpec};
use crate::par::{collect_accepted, stream_rng, Exec, RunLimits, RunStatus};

#[derive(Debug, Clone, Copy, Default)]
pub struct SamplerOptions {
    pub exec: Exec,
    pub limits: RunLimits,
}

/// Proposal distribution for the diagonals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposal {
    /// Steps between consecutive diagonals uniform on `[-1, 1]`.
    StepCube,
    /// `ell_i` uniform on `[lo_i, hi_i]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Proposal {
    /// Cheapest exact proposal for polygons of diameter at most `r`.
    pub fn for_confinement(n: usize, r: f64) -> Self {
        let hi: Vec<f64> = (3..n).map(|i| ell_cap(n, i).min(r)).collect();
        let clipped = Proposal::Box { lo: vec![0.0; n - 3], hi };
        if clipped.ell_volume(n) < Proposal::StepCube.ell_volume(n) {
            clipped
        } else {
            Proposal::StepCube
        }
    }

    fn ell_volume(&self, n: usize) -> f64 {
        match self {
            Proposal::StepCube => 2f64.powi((n - 3) as i32),
            Proposal::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
        }
    }

    /// Volume of the proposal region in the full action-angle space.
    pub fn volume(&self, n: usize) -> f64 {
        self.ell_volume(n) * TAU.powi((n - 3) as i32)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, ells: &mut [f64]) {
        match self {
            Proposal::StepCube => {
                let mut l = 1.0;
                for e in ells.iter_mut() {
                    l += rng.random_range(-1.0..=1.0);
                    *e = l;
                }
            }
            Proposal::Box { lo, hi } => {
                for ((e, a), b) in ells.iter_mut().zip(lo).zip(hi) {
                    *e = a + (b - a) * rng.random::<f64>();
                }
            }
        }
    }
}

/// Accepted draws together with the bookkeeping needed to interpret them.
#[derive(Debug, Clone, Serialize)]
pub struct Sampled<T> {
    pub items: Vec<T>,
    pub proposals: u64,
    /// Acceptances across every consumed block, which may exceed `items.len()`.
    pub accepted: u64,
    pub proposal: Proposal,
    /// Volume of the proposal region under the invariant volume form.
    pub proposal_volume: f64,
    /// Factor relating accepted mass to region volume (see [`sample_shell`]).
    pub volume_multiplier: f64,
    /// Set for Markov-chain output, whose draws are only asymptotically uniform.
    pub approximate: bool,
}

impl<T> Sampled<T> {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    /// Volume of the target region with its binomial standard error.
    pub fn region_volume(&self) -> (f64, f64) {
        let p = self.acceptance_rate();
        let se = (p * (1.0 - p) / self.proposals.max(1) as f64).sqrt();
        let scale = self.proposal_volume * self.volume_multiplier;
        (p * scale, se * scale)
    }
}

/// One accepted polygon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonSample {
    pub coords: ActionAngle,
    #[serde(skip)]
    pub vertices: Vec<Vec3>,
    pub curvature: f64,
    pub diameter: f64,
}

impl PolygonSample {
    fn new(n: usize, ells: &[f64], thetas: &[f64], vertices: &[Vec3]) -> Self {
        PolygonSample {
            coords: ActionAngle { n, ells: ells.to_vec(), thetas: thetas.to_vec() },
            vertices: vertices.to_vec(),
            curvature: total_curvature_of_vertices(vertices),
            diameter: diameter_of_vertices(vertices),
        }
    }

    pub fn polygon(&self) -> Result<Polygon> {
        Polygon::from_vertices(&self.vertices)
    }
}

/// Rejection loop shared by every exact sampler.
///
/// `accept` sees each proposal whose diagonals are feasible, with fresh
/// uniform angles and a scratch vertex buffer.
fn rejection<T, F>(
    n: usize,
    r: f64,
    count: usize,
    seed: u64,
    opts: &SamplerOptions,
    proposal: Proposal,
    accept: F,
) -> Result<Sampled<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, &[f64], &[f64], &mut Vec<Vec3>) -> Option<T> + Sync + Send,
{
    let run = collect_accepted(opts.exec, seed, count, opts.limits, |rng, k| {
        let mut ells = vec![0.0; n - 3];
        let mut thetas = vec![0.0; n - 3];
        let mut verts = Vec::with_capacity(n);
        let mut out = Vec::new();
        for _ in 0..k {
            proposal.draw(rng, &mut ells);
            if !ells_feasible(&ells) {
                continue;
            }
            for t in thetas.iter_mut() {
                *t = TAU * rng.random::<f64>();
            }
            if let Some(x) = accept(rng, &ells, &thetas, &mut verts) {
                out.push(x);
            }
        }
        out
    });
    match run.status {
        RunStatus::Exhausted => Err(Error::Exhausted { n, r, proposals: run.proposals }),
        RunStatus::BudgetSpent => Err(Error::BudgetSpent {
            budget: run.proposals,
            accepted: run.items.len(),
            requested: count,
        }),
        RunStatus::Complete => Ok(Sampled {
            items: run.items,
            proposals: run.proposals,
            accepted: run.accepted,
            proposal_volume: proposal.volume(n),
            proposal,
            volume_multiplier: 1.0,
            approximate: false,
        }),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::domain("sampler", format!("n = {n} < 4")));
    }
    Ok(())
}

/// `count` uniform draws from the whole moduli space.
pub fn sample_unconfined(n: usize, count: usize, seed: u64, opts: &SamplerOptions) -> Result<Sampled<ActionAngle>> {
    check_n(n)?;
    rejection(n, f64::INFINITY, count, seed, opts, Proposal::StepCube, |_, ells, thetas, _| {
        Some(ActionAngle { n, ells: ells.to_vec(), thetas: thetas.to_vec() })
    })
}

/// Uniform draws from polygons of diameter at most `spec.r`, mapped through `f`.
///
/// `f` receives the diagonals, angles and vertices of each accepted polygon.
pub fn sample_confined_map<T, F>(
    spec: &ConfinedRegionSpec,
    count: usize,
    seed: u64,
    opts: &SamplerOptions,
    f: F,
) -> Result<Sampled<T>>
where
    T: Send,
    F: Fn(&[f64], &[f64], &[Vec3]) -> T + Sync + Send,
{
    let n = spec.n;
    let r = spec.r;
    check_n(n)?;
    let (proposal, bound) = if spec.is_inactive() {
        (Proposal::StepCube, None)
    } else {
        (Proposal::for_confinement(n, r), Some(r))
    };
    rejection(n, r, count, seed, opts, proposal, |_, ells, thetas, verts| {
        build_vertices(ells, thetas, verts, bound).then(|| f(ells, thetas, verts))
    })
}

pub fn sample_confined(
    spec: &ConfinedRegionSpec,
    count: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<Sampled<PolygonSample>> {
    let n = spec.n;
    sample_confined_map(spec, count, seed, opts, |e, t, v| PolygonSample::new(n, e, t, v))
}

/// Total curvatures of uniform confined polygons.
pub fn confined_curvatures(
    spec: &ConfinedRegionSpec,
    count: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<Sampled<f64>> {
    sample_confined_map(spec, count, seed, opts, |_, _, v| total_curvature_of_vertices(v))
}

/// Polygons of even `n` whose diameter is at least `min_diameter`, nearly
/// the largest possible value `n / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellSpec {
    pub n: usize,
    pub min_diameter: f64,
}

impl ShellSpec {
    /// Requires even `n >= 4` and `n/2 - 1 < min_diameter <= n/2`, so that
    /// only opposite vertices can realize the diameter.
    pub fn new(n: usize, min_diameter: f64) -> Result<Self> {
        let half = (n / 2) as f64;
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::domain("ShellSpec", format!("n = {n} must be even and at least 4")));
        }
        if !(min_diameter > half - 1.0 && min_diameter <= half) {
            return Err(Error::domain(
                "ShellSpec",
                format!("min_diameter = {min_diameter} must lie in ({}, {half}]", half - 1.0),
            ));
        }
        Ok(ShellSpec { n, min_diameter })
    }

    /// Distance `n/2 - min_diameter` below the largest diameter.
    pub fn epsilon(&self) -> f64 {
        (self.n / 2) as f64 - self.min_diameter
    }
}

/// Draws from polygons of diameter at least `spec.min_diameter`, mapped through `f`.
///
/// Proposals put the fan apex `v_1` at one end of a near-diameter: the
/// diagonals are drawn from the box where `d(v_1, v_{1+n/2}) >= min_diameter`
/// is consistent with the chain of unit edges, which has width `epsilon` in
/// every coordinate. A polygon in the shell may realize the near-diameter
/// through several of its `n/2` opposite pairs; accepting with probability
/// one over that count makes every statistic invariant under cyclic
/// relabeling (curvature, diameter) distributed exactly as under the
/// uniform measure on the shell. The diagonal coordinates themselves are
/// not uniform on the shell.
pub fn sample_shell_map<T, F>(spec: &ShellSpec, count: usize, seed: u64, opts: &SamplerOptions, f: F) -> Result<Sampled<T>>
where
    T: Send,
    F: Fn(&[f64], &[f64], &[Vec3]) -> T + Sync + Send,
{
    let n = spec.n;
    let m = n / 2;
    let d = spec.min_diameter;
    let k = 1 + m;
    let hi: Vec<f64> = (3..n).map(|i| (m - i.abs_diff(k)) as f64).collect();
    let lo: Vec<f64> = (3..n).map(|i| (d - i.abs_diff(k) as f64).max(0.0)).collect();
    let d_sq = d * d;
    let mut sampled = rejection(n, d, count, seed, opts, Proposal::Box { lo, hi }, |rng, ells, thetas, verts| {
        build_vertices(ells, thetas, verts, None);
        let pairs = (0..m).filter(|&j| (verts[j] - verts[j + m]).norm_squared() >= d_sq).count();
        if pairs == 0 {
            return None;
        }
        let keep = pairs == 1 || rng.random::<f64>() * (pairs as f64) < 1.0;
        keep.then(|| f(ells, thetas, verts))
    })?;
    sampled.volume_multiplier = m as f64;
    Ok(sampled)
}

pub fn sample_shell(spec: &ShellSpec, count: usize, seed: u64, opts: &SamplerOptions) -> Result<Sampled<PolygonSample>> {
    let n = spec.n;
    sample_shell_map(spec, count, seed, opts, |e, t, v| PolygonSample::new(n, e, t, v))
}

/// Hit-and-run walk on the moment polytope, with uniform angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitAndRun {
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for HitAndRun {
    fn default() -> Self {
        HitAndRun { burn_in: 1000, thinning: 10 }
    }
}

impl HitAndRun {
    /// Chord of the polytope through `x` in direction `dir`, as a parameter interval.
    fn chord(x: &[f64], dir: &[f64]) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        // g . (x + t dir) <= h for each facet.
        let mut clip = |gx: f64, gd: f64, h: f64| {
            if gd > 0.0 {
                hi = hi.min((h - gx) / gd);
            } else if gd < 0.0 {
                lo = lo.max((h - gx) / gd);
            }
        };
        for i in 0..x.len() {
            clip(-x[i], -dir[i], 0.0);
        }
        // Chain 1, x_0, .., x_{m-1}, 1 with the fixed ends contributing no direction.
        let m = x.len();
        for j in 0..=m {
            let (a, da) = if j == 0 { (1.0, 0.0) } else { (x[j - 1], dir[j - 1]) };
            let (b, db) = if j == m { (1.0, 0.0) } else { (x[j], dir[j]) };
            clip(b - a, db - da, 1.0);
            clip(a - b, da - db, 1.0);
            clip(-a - b, -da - db, -1.0);
        }
        (lo, hi)
    }

    /// One chain seeded by `seed`, started at the interior point `ell_i = 1`.
    pub fn sample(&self, n: usize, count: usize, seed: u64) -> Result<Sampled<ActionAngle>> {
        check_n(n)?;
        let mut rng = stream_rng(seed, 0);
        let mut x = vec![1.0; n - 3];
        let mut dir = vec![0.0; n - 3];
        let mut items = Vec::with_capacity(count);
        let thin = self.thinning.max(1);
        let mut steps = 0u64;
        while items.len() < count {
            for d in dir.iter_mut() {
                *d = rng.sample(StandardNormal);
            }
            let (lo, hi) = Self::chord(&x, &dir);
            let t = rng.random_range(lo..=hi);
            for (xi, di) in x.iter_mut().zip(&dir) {
                *xi += t * di;
            }
            steps += 1;
            if steps as usize > self.burn_in && (steps as usize - self.burn_in).is_multiple_of(thin) {
                let thetas = (0..n - 3).map(|_| TAU * rng.random::<f64>()).collect();
                items.push(ActionAngle { n, ells: x.clone(), thetas });
            }
        }
        Ok(Sampled {
            accepted: items.len() as u64,
            items,
            proposals: steps,
            proposal: Proposal::StepCube,
            proposal_volume: f64::NAN,
            volume_multiplier: 1.0,
            approximate: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crofton::area_region;
    use crate::moduli::{polytope_contains, reconstruct};
    use crate::stats::{chi_square_uniform_2d, ks_uniform};
    use std::f64::consts::PI;

    fn opts() -> SamplerOptions {
        SamplerOptions::default()
    }

    #[test]
    fn quadrilateral_diagonal_is_uniform() {
        let s = sample_unconfined(4, 100_000, 3, &opts()).unwrap();
        assert_eq!(s.acceptance_rate(), 1.0);
        let ells: Vec<f64> = s.items.iter().map(|a| a.ells[0]).collect();
        let d = ks_uniform(&ells, 0.0, 2.0);
        assert!(d < 1.63 / (ells.len() as f64).sqrt(), "KS {d}");
    }

    #[test]
    fn pentagon_acceptance_matches_polytope_area() {
        // Step cube [-1,1]^2 has area 4; the feasible set {|l3 - l4| <= 1,
        // l3 + l4 >= 1, |l3 - 1| <= 1, |l4 - 1| <= 1} has area 2.5 by
        // counting on a fine grid below.
        let m = 2000;
        let mut hits = 0;
        for i in 0..m {
            for j in 0..m {
                let a = 2.0 * (i as f64 + 0.5) / m as f64;
                let b = 2.0 * (j as f64 + 0.5) / m as f64;
                if (a - b).abs() <= 1.0 && a + b >= 1.0 {
                    hits += 1;
                }
            }
        }
        let area = 4.0 * hits as f64 / (m * m) as f64;
        assert!((area - 2.5).abs() < 1e-2);
        let s = sample_unconfined(5, 50_000, 11, &opts()).unwrap();
        let p = s.acceptance_rate();
        let expected = area / 4.0;
        let sigma = (expected * (1.0 - expected) / s.proposals as f64).sqrt();
        assert!((p - expected).abs() < 3.0 * sigma + 1e-3, "{p} vs {expected}");
        assert!(s.items.iter().all(polytope_contains));
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let spec = ConfinedRegionSpec::new(6, 1.5).unwrap();
        let seq = SamplerOptions { exec: Exec::Sequential, ..opts() };
        let a = sample_confined(&spec, 500, 42, &seq).unwrap();
        let b = sample_confined(&spec, 500, 42, &opts()).unwrap();
        assert_eq!(a.items, b.items);
        assert_eq!(a.proposals, b.proposals);
    }

    #[test]
    fn confined_quadrilaterals_are_uniform_on_the_chart() {
        let spec = ConfinedRegionSpec::new(4, 2.0).unwrap();
        let s = sample_confined(&spec, 100_000, 5, &opts()).unwrap();
        assert_eq!(s.acceptance_rate(), 1.0);
        let pts: Vec<(f64, f64)> = s
            .items
            .iter()
            .map(|p| {
                let t = p.coords.thetas[0];
                (p.coords.ells[0], if t > PI { 2.0 * PI - t } else { t })
            })
            .collect();
        let c = chi_square_uniform_2d(&pts, (0.0, 2.0), (0.0, PI), (20, 20));
        assert!(c.p_value > 0.01, "{c:?}");
    }

    #[test]
    fn confined_volume_matches_chart_area() {
        let r = 1.2;
        let spec = ConfinedRegionSpec::new(4, r).unwrap();
        let s = sample_confined(&spec, 50_000, 9, &opts()).unwrap();
        assert!(matches!(s.proposal, Proposal::Box { .. }));
        let (vol, se) = s.region_volume();
        // Both halves of the chart, theta in [0, pi] and [pi, 2 pi).
        let exact = 2.0 * area_region(r).unwrap();
        assert!((vol - exact).abs() < 3.0 * se, "{vol} +- {se} vs {exact}");
        assert!(s.items.iter().all(|p| p.diameter <= r + 1e-9));
    }

    #[test]
    fn samples_reconstruct_to_the_same_polygon() {
        let spec = ConfinedRegionSpec::new(7, 2.5).unwrap();
        let s = sample_confined(&spec, 200, 1, &opts()).unwrap();
        for p in &s.items {
            let q = reconstruct(&p.coords).unwrap();
            assert!((q.total_curvature() - p.curvature).abs() < 1e-9);
            assert!((q.diameter() - p.diameter).abs() < 1e-9);
        }
    }

    #[test]
    fn exhaustion_is_reported() {
        // Octagons of diameter at most 1 are far rarer than one per 2000 proposals.
        let spec = ConfinedRegionSpec::new(8, 1.0).unwrap();
        let o = SamplerOptions {
            limits: RunLimits { block_size: 1000, probe_budget: 2000, max_proposals: None },
            ..opts()
        };
        let e = sample_confined(&spec, 10, 1, &o).unwrap_err();
        assert!(e.is_exhaustion());
        assert!(e.to_string().contains("region too small for rejection sampling at this r"));
    }

    /// Oracle for the shell sampler: plain rejection from the whole space,
    /// keeping polygons of diameter at least `d`.
    #[test]
    fn shell_sampler_matches_plain_rejection() {
        let d = 2.6;
        let spec = ShellSpec::new(6, d).unwrap();
        let shell = sample_shell_map(&spec, 4000, 3, &opts(), |_, _, v| total_curvature_of_vertices(v)).unwrap();
        let all = sample_unconfined(6, 400_000, 4, &opts()).unwrap();
        let mut plain = Vec::new();
        let mut v = Vec::new();
        for a in &all.items {
            build_vertices(&a.ells, &a.thetas, &mut v, None);
            if diameter_of_vertices(&v) >= d {
                plain.push(total_curvature_of_vertices(&v));
            }
        }
        assert!(plain.len() > 300, "{}", plain.len());
        let (ms, ss) = crate::stats::mean_and_std_error(&shell.items);
        let (mp, sp) = crate::stats::mean_and_std_error(&plain);
        assert!((ms - mp).abs() < 3.5 * ss.hypot(sp), "{ms} +- {ss} vs {mp} +- {sp}");

        // Volume fractions agree as well.
        let (vs, es) = shell.region_volume();
        let frac = plain.len() as f64 / all.items.len() as f64;
        let total = all.region_volume().0;
        let vp = frac * total;
        let ep = (frac * (1.0 - frac) / all.items.len() as f64).sqrt() * total;
        assert!((vs - vp).abs() < 3.5 * es.hypot(ep), "{vs} +- {es} vs {vp} +- {ep}");
    }

    #[test]
    fn hit_and_run_stays_feasible_and_spreads() {
        let s = HitAndRun::default().sample(6, 5000, 2).unwrap();
        assert!(s.approximate);
        assert!(s.items.iter().all(polytope_contains));
        // Exact mean of ell_3 from the rejection sampler.
        let exact = sample_unconfined(6, 50_000, 8, &opts()).unwrap();
        let m_exact = exact.items.iter().map(|a| a.ells[0]).sum::<f64>() / 50_000.0;
        let m_hr = s.items.iter().map(|a| a.ells[0]).sum::<f64>() / 5000.0;
        assert!((m_exact - m_hr).abs() < 0.05, "{m_exact} vs {m_hr}");
    }
}
