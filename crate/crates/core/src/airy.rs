//! Airy beam synthesis: the cubic phase profile, the analytic main-lobe
//! trajectory, the closed-form `{B, F, theta}` solver that threads a beam
//! through a waypoint to a target, and the mapping onto array weights.
//!
//! Sign convention: the channel uses the `exp(-j 2 pi r / lambda)`
//! propagation kernel, so an array weight carries the *conjugate* of the
//! cubic phase profile. With that pairing a positive steering angle moves
//! the beam towards `-x`, a positive `F` focuses at depth `F`, and the
//! main lobe follows [`trajectory`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Point, Scene};

/// First maximum of the Airy function: the main-lobe center.
pub const XI_PEAK: f64 = -1.019;

/// Curvatures with `|B|` below this are treated as singular.
pub const NEAR_SINGULAR_B: f64 = 1e-6;

/// Bending direction of the main lobe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sigma {
    Up,
    Down,
}

impl Sigma {
    pub fn sign(self) -> f64 {
        match self {
            Sigma::Up => 1.0,
            Sigma::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sigma::Up => Sigma::Down,
            Sigma::Down => Sigma::Up,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sigma::Up => 1,
            Sigma::Down => -1,
        }
    }
}

impl From<Sigma> for i8 {
    fn from(s: Sigma) -> i8 {
        s.as_i8()
    }
}

impl TryFrom<i8> for Sigma {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Sigma::Up),
            -1 => Ok(Sigma::Down),
            other => Err(format!("sigma must be +1 or -1, got {other}")),
        }
    }
}

impl std::fmt::Display for Sigma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// Cubic-phase beam parameters. `f` may be infinite (collimated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryParams {
    /// Curvature parameter (m^-1).
    pub b: f64,
    /// Focal length (m).
    pub f: f64,
    /// Steering angle (rad).
    pub theta: f64,
    pub sigma: Sigma,
}

impl AiryParams {
    /// Check the invariants a solved design must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.b == 0.0 {
            return Err(Error::Singular { b: self.b });
        }
        if self.f == 0.0 {
            return Err(Error::Domain("focal length F = 0".into()));
        }
        if !(self.theta.abs() < PI / 2.0) {
            return Err(Error::Domain(format!("steering angle {} out of range", self.theta)));
        }
        if (self.b > 0.0) != (self.sigma == Sigma::Up) {
            return Err(Error::Domain("sign of B disagrees with sigma".into()));
        }
        Ok(())
    }

    pub fn mirrored(&self) -> Self {
        Self {
            b: -self.b,
            f: self.f,
            theta: -self.theta,
            sigma: self.sigma.flipped(),
        }
    }
}

/// A waypoint/target pair together with the parameters that realize it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamDesign {
    pub waypoint: Point,
    pub target: Point,
    pub params: AiryParams,
}

/// What a codeword was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CodewordMeta {
    /// Closed-form Airy design through a waypoint.
    Airy(BeamDesign),
    /// Spherical-phase conjugation onto a point.
    Focusing { target: Point },
    /// Raw phase-profile parameters (parameter-grid baselines).
    Profile { params: AiryParams },
}

impl CodewordMeta {
    pub fn params(&self) -> Option<AiryParams> {
        match self {
            CodewordMeta::Airy(d) => Some(d.params),
            CodewordMeta::Profile { params } => Some(*params),
            CodewordMeta::Focusing { .. } => None,
        }
    }

    pub fn waypoint(&self) -> Option<Point> {
        match self {
            CodewordMeta::Airy(d) => Some(d.waypoint),
            _ => None,
        }
    }

    pub fn target(&self) -> Option<Point> {
        match self {
            CodewordMeta::Airy(d) => Some(d.target),
            CodewordMeta::Focusing { target } => Some(*target),
            CodewordMeta::Profile { .. } => None,
        }
    }
}

/// Unit-power transmit weight vector with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codeword {
    pub weights: Vec<Complex64>,
    pub meta: CodewordMeta,
}

impl Codeword {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }
}

/// Cubic phase profile at transverse array coordinate `x0` (rad, unwrapped).
pub fn airy_phase(x0: f64, params: &AiryParams, wavelength: f64) -> Result<f64> {
    if params.f == 0.0 {
        return Err(Error::Domain("focal length F = 0".into()));
    }
    Ok(phase_unchecked(x0, params, wavelength))
}

#[inline]
fn phase_unchecked(x0: f64, params: &AiryParams, wavelength: f64) -> f64 {
    let cubic = (2.0 * PI * params.b).powi(3) * x0.powi(3) / 3.0;
    let focus = PI / (wavelength * params.f) * x0 * x0;
    let steer = 2.0 * PI / wavelength * params.theta.sin() * x0;
    cubic - focus - steer
}

/// `16 lambda pi^2`, which shows up in every trajectory-related formula.
#[inline]
pub(crate) fn k16(wavelength: f64) -> f64 {
    16.0 * wavelength * PI * PI
}

/// Main-lobe transverse position at depth `z` for Airy argument `xi`.
pub fn trajectory_with_xi(
    z: f64,
    params: &AiryParams,
    beam_waist: f64,
    wavelength: f64,
    xi: f64,
) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("trajectory needs z > 0, got {z}")));
    }
    if params.b == 0.0 {
        return Err(Error::Singular { b: 0.0 });
    }
    let s_r = 1.0 / z - 1.0 / params.f;
    let s_i = wavelength / (PI * beam_waist * beam_waist);
    let b3 = params.b.powi(3);
    Ok(-xi * wavelength * z * params.b
        - params.theta.sin() * z
        - (s_r * s_r - s_i * s_i) / (k16(wavelength) * b3) * z)
}

/// Main-lobe trajectory `x(z)`.
pub fn trajectory(z: f64, params: &AiryParams, beam_waist: f64, wavelength: f64) -> Result<f64> {
    trajectory_with_xi(z, params, beam_waist, wavelength, XI_PEAK)
}

/// Closed-form cube of the curvature, `B^3`, for a waypoint/target pair,
/// keeping the small constant term under the square root.
pub fn curvature_cubed(
    waypoint: Point,
    target: Point,
    sigma: Sigma,
    beam_waist: f64,
    wavelength: f64,
) -> f64 {
    let w2 = beam_waist * beam_waist;
    let slope = target.x / target.z - waypoint.x / waypoint.z;
    let a = 3.0 * slope / (k16(wavelength) * w2);
    let inv = 1.0 / target.z - 1.0 / waypoint.z;
    let constant = 2.0 / ((2.0 * PI).powi(6) * w2 * w2 * w2);
    let depth = 3.0 * inv * inv / (128.0 * wavelength * wavelength * PI.powi(4) * w2);
    -a + sigma.sign() * (a * a + constant + depth).sqrt()
}

/// Solve `{B, F, theta}` so the main lobe passes through `waypoint` and
/// lands on `target`.
pub fn solve_params(
    waypoint: Point,
    target: Point,
    sigma: Sigma,
    beam_waist: f64,
    wavelength: f64,
) -> Result<AiryParams> {
    let (z_b, x_s) = (waypoint.z, waypoint.x);
    let (z_r, x_r) = (target.z, target.x);
    if z_b == z_r {
        return Err(Error::DegenerateGeometry { z_b, z_r });
    }
    if !(z_b > 0.0 && z_b < z_r) {
        return Err(Error::Domain(format!(
            "waypoint depth {z_b} must lie in (0, {z_r})"
        )));
    }
    let b3 = curvature_cubed(waypoint, target, sigma, beam_waist, wavelength);
    let b = b3.cbrt();
    if !(b.abs() >= NEAR_SINGULAR_B) {
        return Err(Error::NearSingular { b });
    }
    let k = k16(wavelength);
    let slope = x_r / z_r - x_s / z_b;
    let inv_f = 0.5 * (1.0 / z_r + 1.0 / z_b) + k / 2.0 * slope / (1.0 / z_r - 1.0 / z_b) * b3;
    let f = 1.0 / inv_f;
    let s_i = wavelength / (PI * beam_waist * beam_waist);
    let s_r = 1.0 / z_b - inv_f;
    let arg = -XI_PEAK * wavelength * b - x_s / z_b - (s_r * s_r - s_i * s_i) / (k * b3);
    if !(arg.abs() < 1.0) {
        return Err(Error::InfeasibleDesign { arg });
    }
    Ok(AiryParams {
        b,
        f,
        theta: arg.asin(),
        sigma,
    })
}

/// Map phase-profile parameters onto unit-power array weights.
pub fn phase_vector(params: &AiryParams, tx: &ArrayGeometry, wavelength: f64) -> Result<Vec<Complex64>> {
    if params.f == 0.0 {
        return Err(Error::Domain("focal length F = 0".into()));
    }
    let norm = 1.0 / (tx.num_elements as f64).sqrt();
    Ok((0..tx.num_elements)
        .map(|n| Complex64::from_polar(norm, -phase_unchecked(tx.element_x(n), params, wavelength)))
        .collect())
}

/// Spherical-phase conjugation onto `target`.
pub fn focusing_codeword(target: Point, tx: &ArrayGeometry, wavelength: f64) -> Codeword {
    let norm = 1.0 / (tx.num_elements as f64).sqrt();
    let k = 2.0 * PI / wavelength;
    let weights = tx
        .element_positions()
        .iter()
        .map(|p| Complex64::from_polar(norm, k * p.distance(&target)))
        .collect();
    Codeword {
        weights,
        meta: CodewordMeta::Focusing { target },
    }
}

/// Solve and synthesize one Airy codeword for `scene`. Near-singular
/// curvatures fall back to plain focusing on the target.
pub fn design_codeword(scene: &Scene, waypoint: Point, target: Point, sigma: Sigma) -> Result<Codeword> {
    let solved = solve_params(waypoint, target, sigma, scene.beam_waist(), scene.wavelength);
    codeword_from_solution(scene, waypoint, target, solved)
}

fn codeword_from_solution(
    scene: &Scene,
    waypoint: Point,
    target: Point,
    solved: Result<AiryParams>,
) -> Result<Codeword> {
    match solved {
        Ok(params) => Ok(Codeword {
            weights: phase_vector(&params, &scene.tx, scene.wavelength)?,
            meta: CodewordMeta::Airy(BeamDesign {
                waypoint,
                target,
                params,
            }),
        }),
        Err(Error::NearSingular { .. }) => Ok(focusing_codeword(target, &scene.tx, scene.wavelength)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const LAMBDA: f64 = 2.141375e-3;

    fn reference_design() -> (Scene, AiryParams) {
        let scene = Scene::reference();
        let p = solve_params(
            Point::new(1.5, 0.114),
            Point::new(3.0, 0.0),
            Sigma::Up,
            scene.beam_waist(),
            scene.wavelength,
        )
        .unwrap();
        (scene, p)
    }

    #[test]
    fn phase_at_origin_is_zero() {
        let p = AiryParams { b: 50.0, f: 2.0, theta: 0.01, sigma: Sigma::Up };
        assert_eq!(airy_phase(0.0, &p, LAMBDA).unwrap(), 0.0);
    }

    #[test]
    fn phase_matches_term_by_term_oracle() {
        let p = AiryParams { b: 50.0, f: 2.0, theta: 0.01, sigma: Sigma::Up };
        let x0: f64 = 0.1;
        // Independent evaluation, each term written out longhand.
        let two_pi_b = 2.0 * std::f64::consts::PI * 50.0;
        let t1 = two_pi_b * two_pi_b * two_pi_b * (x0 * x0 * x0) / 3.0;
        let t2 = std::f64::consts::PI / (LAMBDA * 2.0) * (x0 * x0);
        let t3 = 2.0 * std::f64::consts::PI / LAMBDA * 0.01f64.sin() * x0;
        assert_relative_eq!(airy_phase(x0, &p, LAMBDA).unwrap(), t1 - t2 - t3, max_relative = 1e-14);
    }

    #[test]
    fn phase_without_curvature_is_pure_focusing() {
        let p = AiryParams { b: 0.0, f: 2.0, theta: 0.0, sigma: Sigma::Up };
        let x0 = 0.2;
        assert_relative_eq!(
            airy_phase(x0, &p, LAMBDA).unwrap(),
            -std::f64::consts::PI * x0 * x0 / (LAMBDA * 2.0),
            max_relative = 1e-15
        );
        let bad = AiryParams { f: 0.0, ..p };
        assert!(airy_phase(x0, &bad, LAMBDA).is_err());
    }

    #[test]
    fn trajectory_passes_through_waypoint_and_target() {
        let (scene, p) = reference_design();
        assert!(p.b > 0.0);
        assert!(p.f.is_finite() && p.theta.is_finite());
        let w0 = scene.beam_waist();
        let x_b = trajectory(1.5, &p, w0, scene.wavelength).unwrap();
        let x_r = trajectory(3.0, &p, w0, scene.wavelength).unwrap();
        assert_abs_diff_eq!(x_b, 0.114, epsilon = 1e-9 * 3.0);
        assert_abs_diff_eq!(x_r, 0.0, epsilon = 1e-9 * 3.0);
    }

    #[test]
    fn trajectory_domain_errors() {
        let (scene, p) = reference_design();
        assert!(trajectory(0.0, &p, scene.beam_waist(), LAMBDA).is_err());
        let flat = AiryParams { b: 0.0, ..p };
        assert!(matches!(
            trajectory(1.0, &flat, scene.beam_waist(), LAMBDA),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn mirrored_inputs_mirror_the_solution() {
        let scene = Scene::reference();
        let w0 = scene.beam_waist();
        let up = solve_params(Point::new(1.2, 0.08), Point::new(3.0, 0.03), Sigma::Up, w0, LAMBDA)
            .unwrap();
        let down =
            solve_params(Point::new(1.2, -0.08), Point::new(3.0, -0.03), Sigma::Down, w0, LAMBDA)
                .unwrap();
        assert_relative_eq!(down.b, -up.b, max_relative = 1e-12);
        assert_relative_eq!(down.theta, -up.theta, max_relative = 1e-10);
        assert_relative_eq!(down.f, up.f, max_relative = 1e-12);
        for z in [0.3, 1.0, 2.2, 3.0] {
            assert_abs_diff_eq!(
                trajectory(z, &down, w0, LAMBDA).unwrap(),
                -trajectory(z, &up, w0, LAMBDA).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn straight_line_case_keeps_only_the_root_terms() {
        let scene = Scene::reference();
        let w0 = scene.beam_waist();
        let wp = Point::new(1.5, 0.05);
        let tg = Point::new(3.0, 0.1);
        let b3 = curvature_cubed(wp, tg, Sigma::Up, w0, LAMBDA);
        let pi = std::f64::consts::PI;
        let w2 = w0 * w0;
        let inv = 1.0 / 3.0 - 1.0 / 1.5;
        let expected = (2.0 / ((2.0 * pi).powi(6) * w2 * w2 * w2)
            + 3.0 * inv * inv / (128.0 * LAMBDA * LAMBDA * pi.powi(4) * w2))
            .sqrt();
        assert_relative_eq!(b3, expected, max_relative = 1e-12);
        assert!(solve_params(wp, tg, Sigma::Up, w0, LAMBDA).unwrap().b > 0.0);
    }

    #[test]
    fn solver_error_paths() {
        let w0 = Scene::reference().beam_waist();
        assert!(matches!(
            solve_params(Point::new(3.0, 0.0), Point::new(3.0, 0.0), Sigma::Up, w0, LAMBDA),
            Err(Error::DegenerateGeometry { .. })
        ));
        assert!(matches!(
            solve_params(Point::new(4.0, 0.0), Point::new(3.0, 0.0), Sigma::Up, w0, LAMBDA),
            Err(Error::Domain(_))
        ));
        // A waypoint far off axis needs a steering sine beyond 1.
        assert!(matches!(
            solve_params(Point::new(0.01, 0.5), Point::new(3.0, 0.0), Sigma::Up, w0, LAMBDA),
            Err(Error::InfeasibleDesign { .. })
        ));
    }

    #[test]
    fn codeword_is_unit_power() {
        let (scene, p) = reference_design();
        let w = phase_vector(&p, &scene.tx, scene.wavelength).unwrap();
        assert_eq!(w.len(), 512);
        let m = 1.0 / 512f64.sqrt();
        for c in &w {
            assert_abs_diff_eq!(c.norm(), m, epsilon = 1e-15);
        }
        let total: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_profile_gives_uniform_weights() {
        let scene = Scene::reference();
        let p = AiryParams { b: 0.0, f: f64::INFINITY, theta: 0.0, sigma: Sigma::Up };
        let w = phase_vector(&p, &scene.tx, scene.wavelength).unwrap();
        let m = 1.0 / 512f64.sqrt();
        for c in &w {
            assert_abs_diff_eq!(c.re, m, epsilon = 1e-15);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn focusing_phase_difference_matches_path_difference() {
        let scene = Scene::reference();
        let target = Point::new(3.0, 0.0);
        let cw = focusing_codeword(target, &scene.tx, scene.wavelength);
        let pos = scene.tx.element_positions();
        let (edge, center) = (0usize, 256usize);
        let r_edge = pos[edge].distance(&target);
        let r_center = pos[center].distance(&target);
        let expected = 2.0 * std::f64::consts::PI * (r_center - r_edge) / scene.wavelength;
        let measured = (cw.weights[center] * cw.weights[edge].conj()).arg();
        let wrapped = (expected + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        assert_abs_diff_eq!(measured, wrapped, epsilon = 1e-9);
    }

    #[test]
    fn far_focus_approaches_plane_wave() {
        let scene = Scene::reference();
        let cw = focusing_codeword(Point::new(1e7, 0.0), &scene.tx, scene.wavelength);
        // Broadside plane wave: all weights share one phase.
        let ref_phase = cw.weights[0].arg();
        for w in &cw.weights {
            let d = (w.arg() - ref_phase + std::f64::consts::PI)
                .rem_euclid(2.0 * std::f64::consts::PI)
                - std::f64::consts::PI;
            assert!(d.abs() < 0.05);
        }
    }

    #[test]
    fn near_singular_design_falls_back_to_focusing() {
        let scene = Scene::reference();
        let wp = Point::new(1.5, 0.0);
        let target = Point::new(3.0, 0.01);
        let cw = codeword_from_solution(&scene, wp, target, Err(Error::NearSingular { b: 1e-9 }))
            .unwrap();
        assert_eq!(cw, focusing_codeword(target, &scene.tx, scene.wavelength));
        let err = codeword_from_solution(&scene, wp, target, Err(Error::InfeasibleDesign { arg: 2.0 }));
        assert!(err.is_err());
        let cw = design_codeword(&scene, wp, target, Sigma::Up).unwrap();
        assert!(matches!(cw.meta, CodewordMeta::Airy(_)));
    }
}
