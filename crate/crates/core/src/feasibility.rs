//! Finite-aperture realizability of Airy trajectories.
//!
//! The main lobe is the envelope of straight rays; every tangent line must
//! trace back onto the transmit aperture. Because the tangent intercept
//! grows monotonically with depth, the binding constraint sits at the
//! receiver, and after dropping the tiny constant term of the curvature
//! formula it reduces to the linear waypoint boundaries [`xs_max`] and
//! [`xs_min`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::airy::{curvature_cubed, k16, AiryParams, Sigma};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Boundary comparisons tolerate this much overshoot (m).
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// Slope and inverse-depth differences between waypoint and target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricRatios {
    /// `x_s / z_b - x_r / z_r`
    pub u: f64,
    /// `1 / z_b - 1 / z_r` (m^-1)
    pub v: f64,
    /// `u / v` (m)
    pub x: f64,
}

impl GeometricRatios {
    pub fn new(waypoint: Point, target: Point) -> Result<Self> {
        let v = 1.0 / waypoint.z - 1.0 / target.z;
        if v == 0.0 || !v.is_finite() {
            return Err(Error::DegenerateGeometry {
                z_b: waypoint.z,
                z_r: target.z,
            });
        }
        let u = waypoint.x / waypoint.z - target.x / target.z;
        Ok(Self { u, v, x: u / v })
    }
}

/// Intercept on the `z = 0` plane of the trajectory tangent at depth `z`.
pub fn tangent_intercept(z: f64, params: &AiryParams, wavelength: f64) -> Result<f64> {
    if params.b == 0.0 {
        return Err(Error::Singular { b: 0.0 });
    }
    if !(z > 0.0) || params.f == 0.0 {
        return Err(Error::Domain(format!("tangent intercept needs z > 0 and F != 0 (z = {z})")));
    }
    Ok((1.0 / params.f - 1.0 / z) / (8.0 * wavelength * PI * PI * params.b.powi(3)))
}

/// Tangent intercept at the receiver depth expressed through the waypoint
/// and target geometry.
pub fn intercept_at_receiver(waypoint: Point, target: Point, b: f64, wavelength: f64) -> Result<f64> {
    let r = GeometricRatios::new(waypoint, target)?;
    if b == 0.0 {
        return Err(Error::Singular { b });
    }
    Ok(r.x + r.v / (k16(wavelength) * b.powi(3)))
}

/// Approximate `B^3 / v` as a function of `X`; strictly positive.
pub fn m_of_x(x: f64, wavelength: f64, beam_waist: f64) -> f64 {
    let w2 = beam_waist * beam_waist;
    let lin = 3.0 * x / (k16(wavelength) * w2);
    let c = 3.0 / (128.0 * wavelength * wavelength * PI.powi(4) * w2);
    if lin >= 0.0 {
        lin + (lin * lin + c).sqrt()
    } else {
        // Same value, rearranged to avoid cancellation for large negative X.
        c / ((lin * lin + c).sqrt() - lin)
    }
}

/// Critical geometric ratio `X* = 5 D_t / 12`.
pub fn critical_x(d_t: f64) -> f64 {
    5.0 * d_t / 12.0
}

/// Result of the bisection on the scalar boundary equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRoot {
    pub root: f64,
    /// `root + 1/(16 lambda pi^2 M(root)) - D_t/2` (m).
    pub residual: f64,
    pub iterations: u32,
}

fn boundary_lhs(x: f64, d_t: f64, wavelength: f64, beam_waist: f64) -> f64 {
    x + 1.0 / (k16(wavelength) * m_of_x(x, wavelength, beam_waist)) - d_t / 2.0
}

/// Bisection root of `X + 1/(16 lambda pi^2 M(X)) = D_t / 2` on `[0, D_t/2]`.
pub fn solve_scalar_boundary(d_t: f64, wavelength: f64, beam_waist: f64) -> Result<BoundaryRoot> {
    if !(d_t > 0.0) {
        return Err(Error::Domain(format!("aperture must be positive, got {d_t}")));
    }
    let g = |x: f64| boundary_lhs(x, d_t, wavelength, beam_waist);
    let (mut lo, mut hi) = (0.0, d_t / 2.0);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Solver(format!(
            "no sign change on [0, {hi}]: g(0) = {g_lo:e}, g(D_t/2) = {g_hi:e}"
        )));
    }
    let rising = g_hi > 0.0;
    let mut iterations = 0;
    while hi - lo > 1e-15 * d_t.max(1.0) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let root = 0.5 * (lo + hi);
    Ok(BoundaryRoot {
        root,
        residual: g(root),
        iterations,
    })
}

/// Upper feasible waypoint boundary at depth `z_b` for target `x_r`.
pub fn xs_max(z_b: f64, z_r: f64, x_r: f64, d_t: f64) -> f64 {
    critical_x(d_t) * (1.0 - z_b / z_r) + x_r * z_b / z_r
}

/// Lower feasible waypoint boundary (downward bending).
pub fn xs_min(z_b: f64, z_r: f64, x_r: f64, d_t: f64) -> f64 {
    -critical_x(d_t) * (1.0 - z_b / z_r) + x_r * z_b / z_r
}

/// Linear-boundary feasibility: the production pruning test.
pub fn waypoint_feasible(waypoint: Point, target: Point, sigma: Sigma, d_t: f64) -> bool {
    match sigma {
        Sigma::Up => waypoint.x <= xs_max(waypoint.z, target.z, target.x, d_t) + BOUNDARY_SLACK,
        Sigma::Down => waypoint.x >= xs_min(waypoint.z, target.z, target.x, d_t) - BOUNDARY_SLACK,
    }
}

/// Intercept-based feasibility using the full closed-form curvature:
/// `|X_int(z_r)| <= D_t / 2`. Validation path for [`waypoint_feasible`].
pub fn intercept_feasible(
    waypoint: Point,
    target: Point,
    sigma: Sigma,
    d_t: f64,
    wavelength: f64,
    beam_waist: f64,
) -> Result<bool> {
    let b = curvature_cubed(waypoint, target, sigma, beam_waist, wavelength).cbrt();
    let x_int = intercept_at_receiver(waypoint, target, b, wavelength)?;
    Ok(x_int.abs() <= d_t / 2.0 + BOUNDARY_SLACK)
}
