//! Composite Gauss–Legendre rules with panel doubling.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

pub const NODES_PER_PANEL: usize = 64;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NODES_PER_PANEL)
            .expect("64-point Gauss-Legendre rule")
            .into_node_weight_pairs()
    })
}

/// `panels` equal Gauss–Legendre panels over `[a, b]`.
pub fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for &(x, w) in rule() {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `int_a^b f(x) dx` for `f` with square-root behaviour at `end >= b`.
///
/// Substitutes `x = end - u^2`, which turns an integrable `1/sqrt(end - x)`
/// singularity (or a `sqrt(end - x)` cusp) into a smooth integrand in `u`.
/// When `end` lies beyond `b` the map still clusters nodes toward `b`.
pub fn composite_sqrt_end<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, end: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    debug_assert!(end >= b);
    let u_hi = (end - a).max(0.0).sqrt();
    let u_lo = (end - b).max(0.0).sqrt();
    composite(|u| 2.0 * u * f(end - u * u), u_lo, u_hi, panels)
}

/// `int_a^b f(x) dx` for `f` with square-root behaviour at `start <= a`.
pub fn composite_sqrt_start<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    start: f64,
    panels: usize,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    debug_assert!(start <= a);
    let u_lo = (a - start).max(0.0).sqrt();
    let u_hi = (b - start).max(0.0).sqrt();
    composite(|u| 2.0 * u * f(start + u * u), u_lo, u_hi, panels)
}

/// Smallest segment width used by [`composite_graded`].
const GRADING_FLOOR: f64 = 1e-9;

/// `int_a^b f(x) dx` for `f` with a near-singularity at `point`, just outside
/// `[a, b]`, of size `scale` (for instance a complex branch point at distance
/// `scale` from `point`).
///
/// The interval is cut into segments whose widths double with distance from
/// `point`, starting at `max(scale, distance of the near end)`; each segment
/// gets `panels` Gauss–Legendre panels.
pub fn composite_graded<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    point: f64,
    scale: f64,
    panels: usize,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let toward_b = point >= b;
    debug_assert!(toward_b || point <= a);
    let (d_lo, d_hi) = if toward_b { (point - b, point - a) } else { (a - point, b - point) };
    let first = scale.max(GRADING_FLOOR);
    let mut d0 = d_lo;
    let mut d1 = if d_lo < first { first } else { 2.0 * d_lo };
    let mut total = 0.0;
    loop {
        d1 = d1.min(d_hi);
        total += if toward_b {
            composite(&f, point - d1, point - d0, panels)
        } else {
            composite(&f, point + d0, point + d1, panels)
        };
        if d1 >= d_hi {
            return total;
        }
        d0 = d1;
        d1 *= 2.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub value: f64,
    /// `|I(2p) - I(p)|` at the accepted panel count.
    pub delta: f64,
    pub panels: usize,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_PANELS: usize = 1024;

/// Doubles the panel count until two successive values differ by less than `tol`.
pub fn refine<F: Fn(usize) -> f64>(eval: F, start: usize, tol: f64) -> Result<Refined> {
    let mut p = start.max(1);
    let mut prev = eval(p);
    while p < MAX_PANELS {
        p *= 2;
        let next = eval(p);
        let delta = (next - prev).abs();
        if delta < tol.max(f64::EPSILON * next.abs()) {
            return Ok(Refined { value: next, delta, panels: p });
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "no convergence to {tol:e} within {MAX_PANELS} panels (last value {prev})"
    )))
}
