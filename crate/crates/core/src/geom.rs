//! Equilateral polygons in 3-space and the closed-form quadrilateral
//! expressions in the `(ell, theta)` chart.
//!
//! Lengths are in edge units (every edge has length 1) and angles are in
//! radians throughout.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Tolerance for the unit-length and closure invariants of [`Polygon`].
pub const POLYGON_TOL: f64 = 1e-9;

/// How far outside `[-1, 1]` an `acos` argument may drift from rounding
/// before it is treated as a domain error.
pub const ACOS_SLACK: f64 = 1e-12;

/// Distance from the `acos` branch points below which the curvature
/// derivative is not evaluated.
pub const BRANCH_MARGIN: f64 = 1e-8;

/// `acos` that clamps rounding excursions and rejects genuine ones.
pub fn acos_checked(x: f64, op: &'static str) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + ACOS_SLACK {
        return Err(Error::domain(op, format!("acos argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0).acos())
}

/// Closed equilateral polygon stored as its ordered unit edge vectors.
///
/// Vertex `v_1` sits at the origin and `v_{i+1} = v_i + e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    edges: Vec<Vec3>,
}

impl Polygon {
    /// Validates unit edge lengths and closure to [`POLYGON_TOL`].
    pub fn from_edges(edges: Vec<Vec3>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 edges, got {}",
                edges.len()
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if !e.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidPolygon(format!("edge {i} is not finite")));
            }
            let len = e.norm();
            if (len - 1.0).abs() > POLYGON_TOL {
                return Err(Error::InvalidPolygon(format!(
                    "edge {i} has length {len}, expected 1"
                )));
            }
        }
        let gap = edges.iter().sum::<Vec3>().norm();
        if gap > POLYGON_TOL {
            return Err(Error::InvalidPolygon(format!(
                "edges do not close: |sum e_i| = {gap}"
            )));
        }
        Ok(Polygon { edges })
    }

    /// Builds the polygon through the given vertices, closing back to the first.
    pub fn from_vertices(vertices: &[Vec3]) -> Result<Self> {
        let n = vertices.len();
        let edges = (0..n)
            .map(|i| vertices[(i + 1) % n] - vertices[i])
            .collect();
        Self::from_edges(edges)
    }

    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec3] {
        &self.edges
    }

    /// Vertices `v_1..v_n` with `v_1` at the origin.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.edges.len());
        let mut v = Vec3::zeros();
        for e in &self.edges {
            out.push(v);
            v += e;
        }
        out
    }

    /// Sum of the turning angles between consecutive edges, in `[0, n*pi]`.
    pub fn total_curvature(&self) -> f64 {
        total_curvature_of_edges(&self.edges)
    }

    /// Largest distance between any two vertices.
    pub fn diameter(&self) -> f64 {
        diameter_of_vertices(&self.vertices())
    }

    /// Sorted multiset of all pairwise vertex distances; invariant under
    /// rigid motions and reflections.
    pub fn distance_profile(&self) -> Vec<f64> {
        let v = self.vertices();
        let mut d = Vec::with_capacity(v.len() * (v.len() - 1) / 2);
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d.push((v[i] - v[j]).norm());
            }
        }
        d.sort_by(f64::total_cmp);
        d
    }
}

pub fn total_curvature_of_edges(edges: &[Vec3]) -> f64 {
    let n = edges.len();
    (0..n)
        .map(|i| turning_angle(&edges[i], &edges[(i + 1) % n]))
        .sum()
}

/// Total curvature of the closed polygon through `v`.
pub fn total_curvature_of_vertices(v: &[Vec3]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[(i + 1) % n] - v[i];
            let b = v[(i + 2) % n] - v[(i + 1) % n];
            turning_angle(&a, &b)
        })
        .sum()
}

/// Angle between `a` and `b`.
///
/// `atan2` of the cross and dot products keeps full precision near `0` and
/// `pi`, where `acos` of the dot product loses about half the digits.
pub fn turning_angle(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

pub fn diameter_of_vertices(v: &[Vec3]) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max((v[i] - v[j]).norm_squared());
        }
    }
    best.sqrt()
}

/// Point of the quadrilateral chart: `ell = d(v1, v3)`, `theta` the
/// dihedral angle between the triangles `v1 v2 v3` and `v1 v4 v3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCoords {
    pub ell: f64,
    pub theta: f64,
}

impl QuadCoords {
    pub fn new(ell: f64, theta: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&ell) {
            return Err(Error::domain("QuadCoords", format!("ell = {ell} not in [0, 2]")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::domain(
                "QuadCoords",
                format!("theta = {theta} not in [0, pi]"),
            ));
        }
        Ok(QuadCoords { ell, theta })
    }

    /// Half the angle at `v1` between the diagonal and the first edge.
    pub fn phi(&self) -> f64 {
        (self.ell / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// The four chart vertices `v1..v4`.
pub fn quad_vertices(q: QuadCoords) -> [Vec3; 4] {
    let (s, c) = q.phi().sin_cos();
    let (st, ct) = q.theta.sin_cos();
    [
        Vec3::zeros(),
        Vec3::new(c, s, 0.0),
        Vec3::new(2.0 * c, 0.0, 0.0),
        Vec3::new(c, s * ct, s * st),
    ]
}

pub fn quad_from_coords(q: QuadCoords) -> Polygon {
    let v = quad_vertices(q);
    let edges = (0..4).map(|i| v[(i + 1) % 4] - v[i]).collect();
    Polygon { edges }
}

/// `kappa(t, c) = 2 acos(-t - (1 - t) c) + 2 acos(2t - 1)` with
/// `t = ell^2 / 4` and `c = cos(theta)`.
pub fn quad_curvature_closed(t: f64, c: f64) -> Result<f64> {
    const OP: &str = "quad_curvature_closed";
    if !(-ACOS_SLACK..=1.0 + ACOS_SLACK).contains(&t) {
        return Err(Error::domain(OP, format!("t = {t} not in [0, 1]")));
    }
    if !(-1.0 - ACOS_SLACK..=1.0 + ACOS_SLACK).contains(&c) {
        return Err(Error::domain(OP, format!("c = {c} not in [-1, 1]")));
    }
    Ok(2.0 * acos_checked(-t - (1.0 - t) * c, OP)? + 2.0 * acos_checked(2.0 * t - 1.0, OP)?)
}

/// Same curvature in the half-angle form
/// `2 pi + 4 phi - 4 asin(sin(phi) sin(theta / 2))`, which stays smooth at
/// `theta = 0` where the `acos` form has an infinite slope.
pub fn quad_curvature(ell: f64, theta: f64) -> f64 {
    let phi = (ell / 2.0).clamp(-1.0, 1.0).acos();
    let s = (phi.sin() * (theta / 2.0).sin()).clamp(-1.0, 1.0);
    2.0 * PI + 4.0 * phi - 4.0 * s.asin()
}

pub fn d24_closed(q: QuadCoords) -> f64 {
    ((1.0 - q.ell * q.ell / 4.0) * (2.0 - 2.0 * q.theta.cos()))
        .max(0.0)
        .sqrt()
}

/// Partial derivative of [`quad_curvature_closed`] in `t`.
pub fn dkappa_dt_closed(t: f64, c: f64) -> Result<f64> {
    const OP: &str = "dkappa_dt_closed";
    if !(BRANCH_MARGIN..=1.0 - BRANCH_MARGIN).contains(&t) {
        return Err(Error::domain(
            OP,
            format!("t = {t} too close to the singular points 0 and 1"),
        ));
    }
    if !(-1.0..1.0).contains(&c) {
        return Err(Error::domain(OP, format!("c = {c} not in [-1, 1)")));
    }
    let x = -c * (1.0 - t) - t;
    let y = 2.0 * t - 1.0;
    let gx = 1.0 - x * x;
    let gy = 1.0 - y * y;
    if gx < BRANCH_MARGIN || gy < BRANCH_MARGIN {
        return Err(Error::domain(OP, "argument at an acos branch point"));
    }
    Ok(-2.0 * (c - 1.0) / gx.sqrt() - 4.0 / gy.sqrt())
}

/// `sqrt(1 - (-x (1 - t) - t)^2)`, concave in `x` on `(-1, 1)`.
pub fn psi2(x: f64, t: f64) -> f64 {
    let y = -x * (1.0 - t) - t;
    (1.0 - y * y).max(0.0).sqrt()
}
