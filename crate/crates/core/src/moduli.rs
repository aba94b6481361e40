//! Action-angle coordinates on the moduli space of equilateral n-gons.
//!
//! The action coordinates are the fan diagonals `ell_i = d(v_1, v_i)` for
//! `i = 3..n-1`; the angle coordinate `theta_i` is the dihedral rotation of
//! triangle `(v_1, v_i, v_{i+1})` about the line `v_1 v_i`, measured from the
//! half-plane of the previous triangle. `theta_i = 0` folds the new triangle
//! onto the previous one and `theta_i = pi` lays it out flat on the other
//! side. For `n = 4` the reconstruction is exactly the chart embedding of
//! [`crate::geom::quad_from_coords`].

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{d24_closed, Polygon, QuadCoords, Vec3};

/// Slack on the polytope inequalities.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Slack on region membership tests in the quadrilateral chart.
pub const REGION_TOL: f64 = 1e-12;

const DEGENERATE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionAngle {
    pub n: usize,
    /// `ell_3 .. ell_{n-1}`.
    pub ells: Vec<f64>,
    /// `theta_3 .. theta_{n-1}`, in `[0, 2 pi)`.
    pub thetas: Vec<f64>,
}

impl ActionAngle {
    pub fn new(n: usize, ells: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        if n < 4 {
            return Err(Error::domain("ActionAngle", format!("n = {n} < 4")));
        }
        if ells.len() != n - 3 || thetas.len() != n - 3 {
            return Err(Error::domain(
                "ActionAngle",
                format!(
                    "expected {} ells and thetas for n = {n}, got {} and {}",
                    n - 3,
                    ells.len(),
                    thetas.len()
                ),
            ));
        }
        Ok(ActionAngle { n, ells, thetas })
    }

    /// Chart point of a quadrilateral.
    pub fn quad(q: QuadCoords) -> Self {
        ActionAngle {
            n: 4,
            ells: vec![q.ell],
            thetas: vec![q.theta],
        }
    }
}

/// Upper bound of `ell_i` on the polytope: `min(i - 1, n - i + 1)`.
pub fn ell_cap(n: usize, i: usize) -> f64 {
    (i - 1).min(n + 1 - i) as f64
}

/// Fan-triangle inequalities for a diagonal vector `ell_3..ell_{n-1}`.
///
/// With `ell_2 = ell_n = 1` (the first and last edges), every consecutive
/// pair must satisfy `|a - b| <= 1 <= a + b`, and all diagonals are
/// nonnegative.
pub fn ells_feasible(ells: &[f64]) -> bool {
    if ells.iter().any(|l| !l.is_finite() || *l < -FEASIBILITY_TOL) {
        return false;
    }
    let mut prev = 1.0;
    for &l in ells.iter().chain(std::iter::once(&1.0)) {
        if (prev - l).abs() > 1.0 + FEASIBILITY_TOL || prev + l < 1.0 - FEASIBILITY_TOL {
            return false;
        }
        prev = l;
    }
    true
}

pub fn polytope_contains(aa: &ActionAngle) -> bool {
    aa.ells.len() + 3 == aa.n && ells_feasible(&aa.ells)
}

/// Unit vector perpendicular to `u`, chosen deterministically.
fn any_perpendicular(u: &Vec3) -> Vec3 {
    let axis = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vec3::x()
    } else if u.y.abs() <= u.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    u.cross(&axis).normalize()
}

/// Writes the vertices of the polygon with the given coordinates into `out`.
///
/// When `bound` is set, stops early and returns `false` as soon as a vertex
/// lies farther than the bound from an earlier one.
pub fn build_vertices(ells: &[f64], thetas: &[f64], out: &mut Vec<Vec3>, bound: Option<f64>) -> bool {
    let n = ells.len() + 3;
    out.clear();
    let l3 = ells[0];
    let half = l3 / 2.0;
    out.push(Vec3::zeros());
    out.push(Vec3::new(half, (1.0 - half * half).max(0.0).sqrt(), 0.0));
    out.push(Vec3::new(l3, 0.0, 0.0));
    let bound_sq = bound.map(|b| b * b * (1.0 + 1e-12) + 1e-12);
    if let Some(b2) = bound_sq {
        if l3 * l3 > b2 {
            return false;
        }
    }
    // Direction of v_1 -> v_i, kept as the limiting direction when v_i = v_1.
    let mut axis = Vec3::x();
    for i in 3..n {
        // 1-based vertex i is out[i - 1]; the new vertex is v_{i+1}.
        let a = out[i - 1];
        let prev = out[i - 2];
        let li = a.norm();
        let lnext = if i + 1 == n { 1.0 } else { ells[i - 2] };
        let theta = thetas[i - 3];

        let (u, x) = if li > DEGENERATE {
            (a / li, (lnext * lnext + li * li - 1.0) / (2.0 * li))
        } else {
            (axis, 0.0)
        };
        let mut w = prev - u * prev.dot(&u);
        let wn = w.norm();
        w = if wn > DEGENERATE { w / wn } else { any_perpendicular(&u) };
        let h = (lnext * lnext - x * x).max(0.0).sqrt();
        let (s, c) = theta.sin_cos();
        let turn = w * c + u.cross(&w) * s;
        let v = u * x + turn * h;

        if let Some(b2) = bound_sq {
            if out.iter().any(|p| (p - v).norm_squared() > b2) {
                return false;
            }
        }
        let vn = v.norm();
        axis = if vn > DEGENERATE { v / vn } else { turn };
        out.push(v);
    }
    true
}

/// Polygon with the given action-angle coordinates.
pub fn reconstruct(aa: &ActionAngle) -> Result<Polygon> {
    if !polytope_contains(aa) {
        return Err(Error::domain(
            "reconstruct",
            format!("diagonals {:?} violate the fan-triangle inequalities", aa.ells),
        ));
    }
    let mut v = Vec::with_capacity(aa.n);
    build_vertices(&aa.ells, &aa.thetas, &mut v, None);
    Polygon::from_vertices(&v)
}

/// Action-angle coordinates of a polygon, with `v_1` as the fan apex.
pub fn recover(p: &Polygon) -> ActionAngle {
    let v = p.vertices();
    let n = v.len();
    let mut ells = Vec::with_capacity(n - 3);
    let mut thetas = Vec::with_capacity(n - 3);
    for i in 3..n {
        let a = v[i - 1] - v[0];
        let li = a.norm();
        ells.push(li);
        if li <= DEGENERATE {
            thetas.push(0.0);
            continue;
        }
        let u = a / li;
        let perp = |p: Vec3| p - u * p.dot(&u);
        let w0 = perp(v[i - 2] - v[0]);
        let w1 = perp(v[i % n] - v[0]);
        let mut t = u.dot(&w0.cross(&w1)).atan2(w0.dot(&w1));
        if t < 0.0 {
            t += TAU;
        }
        thetas.push(if t >= TAU { 0.0 } else { t });
    }
    ActionAngle { n, ells, thetas }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfinedRegionSpec {
    pub n: usize,
    pub r: f64,
}

impl ConfinedRegionSpec {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::domain("ConfinedRegionSpec", format!("n = {n} < 4")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain("ConfinedRegionSpec", format!("r = {r} must be positive")));
        }
        Ok(ConfinedRegionSpec { n, r })
    }

    /// Confinement never binds once `r` reaches the largest possible diameter.
    pub fn is_inactive(&self) -> bool {
        self.r >= (self.n / 2) as f64
    }
}

fn check_quad_r(op: &'static str, r: f64) -> Result<()> {
    if (1.0..=2.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Regime { what: op, interval: "[1, 2]", r })
    }
}

/// Membership in the confined half-chart `{ell <= r, d(v2, v4) <= r, theta in [0, pi]}`.
pub fn in_region_plus(q: QuadCoords, r: f64) -> Result<bool> {
    check_quad_r("in_region_plus", r)?;
    Ok(q.ell <= r + REGION_TOL && d24_closed(q) <= r + REGION_TOL)
}

/// Largest `theta` with `d(v2, v4) <= ell`: `acos((4 - 3 ell^2) / (4 - ell^2))`.
pub fn theta_long_diagonal(ell: f64) -> f64 {
    let den = 4.0 - ell * ell;
    if den <= 0.0 {
        return PI;
    }
    ((4.0 - 3.0 * ell * ell) / den).clamp(-1.0, 1.0).acos()
}

/// Inverse of [`theta_long_diagonal`]: smallest `ell` with `d(v2, v4) <= ell` at `theta`.
pub fn ell_long_diagonal(theta: f64) -> f64 {
    let c = theta.cos();
    2.0 * ((1.0 - c) / (3.0 - c)).max(0.0).sqrt()
}

/// Membership in the part of the confined half-chart where `v1 v3` is the
/// longer diagonal.
pub fn in_region_plus_ell(q: QuadCoords, r: f64) -> Result<bool> {
    check_quad_r("in_region_plus_ell", r)?;
    Ok(in_region_plus(q, r)? && d24_closed(q) <= q.ell + REGION_TOL)
}

/// Angle form of the long-diagonal test, `theta <= theta_long_diagonal(ell)`.
pub fn below_long_diagonal_curve(q: QuadCoords) -> bool {
    q.theta <= theta_long_diagonal(q.ell) + REGION_TOL
}
