//! Codebook construction.
//!
//! * Probe pair: two boundary-hugging Airy beams aimed at the Rx edges that
//!   decide the bending direction before any sweep.
//! * NUPC: waypoints sampled uniformly in `(1/z, x/z)`, pruned by the LoS
//!   region and the linear feasibility boundary, each with a clamped target.
//! * FS1C: a one-parameter family of waypoints on a single depth plane whose
//!   targets are linked linearly across the Rx aperture.
//! * HFAC-style baseline: a plain grid over curvature, focal length and
//!   steering angle.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{design_codeword, focusing_codeword, phase_vector, AiryParams, Codeword, CodewordMeta, Sigma};
use crate::error::{Error, Result};
use crate::feasibility::{critical_x, m_of_x, waypoint_feasible, xs_max, xs_min};
use crate::geometry::{Point, Scene};

/// Relative slack when counting grid levels, so exact multiples are inclusive.
const LEVEL_EPS: f64 = 1e-9;

/// Probe energies within this relative gap count as a tie.
pub const PROBE_TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    Probe,
    Nupc,
    Fs1c,
    Hfac,
    Focusing,
}

impl CodebookKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodebookKind::Probe => "probe",
            CodebookKind::Nupc => "nupc",
            CodebookKind::Fs1c => "fs1c",
            CodebookKind::Hfac => "hfac",
            CodebookKind::Focusing => "focusing",
        }
    }
}

/// Candidates that did not make it into a codebook, by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub outside_los: usize,
    pub beyond_boundary: usize,
    pub degenerate: usize,
    pub infeasible: usize,
    pub other_errors: usize,
    /// Designs that were kept but replaced by a focusing beam.
    pub focusing_fallback: usize,
}

impl SkipCounts {
    pub fn total_skipped(&self) -> usize {
        self.outside_los + self.beyond_boundary + self.degenerate + self.infeasible + self.other_errors
    }

    fn record_error(&mut self, e: &Error) {
        match e {
            Error::DegenerateGeometry { .. } => self.degenerate += 1,
            Error::InfeasibleDesign { .. } => self.infeasible += 1,
            _ => self.other_errors += 1,
        }
    }
}

/// An ordered set of codewords plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub kind: CodebookKind,
    pub sigma: Option<Sigma>,
    pub entries: Vec<Codeword>,
    /// Generation parameters, keyed by name.
    pub params: BTreeMap<String, f64>,
    pub raw_candidates: usize,
    pub skipped: SkipCounts,
}

/// One row of the exported codebook table. Fields that do not apply to a
/// codeword's construction are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryRow {
    pub index: usize,
    pub kind: CodebookKind,
    pub z_b: Option<f64>,
    pub x_s: Option<f64>,
    pub x_r: Option<f64>,
    pub b: Option<f64>,
    pub f: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<i8>,
}

impl EntryRow {
    pub fn describe(index: usize, kind: CodebookKind, cw: &Codeword) -> Self {
        let params = cw.meta.params();
        let waypoint = cw.meta.waypoint();
        let target = cw.meta.target();
        Self {
            index,
            kind,
            z_b: waypoint.map(|p| p.z),
            x_s: waypoint.map(|p| p.x),
            x_r: target.map(|p| p.x),
            b: params.map(|p| p.b),
            f: params.map(|p| p.f),
            theta: params.map(|p| p.theta),
            sigma: params.map(|p| p.sigma.as_i8()),
        }
    }

    pub const HEADER: [&'static str; 9] = ["index", "kind", "z_b", "x_s", "x_r", "B", "F", "theta", "sigma"];

    pub fn record(&self) -> Vec<String> {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            self.index.to_string(),
            self.kind.as_str().to_string(),
            cell(self.z_b),
            cell(self.x_s),
            cell(self.x_r),
            cell(self.b),
            cell(self.f),
            cell(self.theta),
            self.sigma.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn row(&self, index: usize) -> EntryRow {
        EntryRow::describe(index, self.kind, &self.entries[index])
    }

    pub fn rows(&self) -> Vec<EntryRow> {
        (0..self.len()).map(|i| self.row(i)).collect()
    }

    /// Self-describing table: `index,kind,z_b,x_s,x_r,B,F,theta,sigma`.
    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(EntryRow::HEADER)?;
        for row in self.rows() {
            w.write_record(row.record())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Generation metadata (everything but the weights) as JSON.
    pub fn metadata_json(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            kind: CodebookKind,
            sigma: Option<Sigma>,
            size: usize,
            raw_candidates: usize,
            params: &'a BTreeMap<String, f64>,
            skipped: SkipCounts,
            rows: Vec<EntryRow>,
        }
        serde_json::to_string(&Meta {
            kind: self.kind,
            sigma: self.sigma,
            size: self.len(),
            raw_candidates: self.raw_candidates,
            params: &self.params,
            skipped: self.skipped,
            rows: self.rows(),
        })
        .expect("metadata serializes")
    }

    /// Single-entry codebook focusing on the Rx center.
    pub fn focusing(scene: &Scene) -> Self {
        let target = Point::new(scene.z_r(), scene.x_c());
        Self {
            kind: CodebookKind::Focusing,
            sigma: None,
            entries: vec![focusing_codeword(target, &scene.tx, scene.wavelength)],
            params: BTreeMap::from([("target_x".to_string(), target.x), ("target_z".to_string(), target.z)]),
            raw_candidates: 1,
            skipped: SkipCounts::default(),
        }
    }
}

fn level_count(range: f64, step: f64) -> usize {
    (range / step + LEVEL_EPS).floor() as usize + 1
}

fn at_receiver_plane(z: f64, z_r: f64) -> bool {
    (z - z_r).abs() <= 1e-12 * z_r
}

// ---------------------------------------------------------------------------
// Probing
// ---------------------------------------------------------------------------

/// Upward (`sigma = +1`) and downward probe beams anchored on the boundary
/// lines at depth `z_p` and aimed at the Rx edges.
pub fn probe_pair(scene: &Scene, z_p: f64) -> Result<(Codeword, Codeword)> {
    let z_r = scene.z_r();
    if !(z_p > 0.0 && z_p <= z_r) {
        return Err(Error::Domain(format!("probe depth {z_p} outside (0, {z_r}]")));
    }
    let top = Point::new(z_r, scene.x_c() + scene.d_r() / 2.0);
    let bottom = Point::new(z_r, scene.x_c() - scene.d_r() / 2.0);
    if at_receiver_plane(z_p, z_r) {
        // The waypoint collapses onto the target.
        return Ok((
            focusing_codeword(top, &scene.tx, scene.wavelength),
            focusing_codeword(bottom, &scene.tx, scene.wavelength),
        ));
    }
    let d_t = scene.d_t();
    let up = Point::new(z_p, xs_max(z_p, z_r, top.x, d_t));
    let down = Point::new(z_p, xs_min(z_p, z_r, bottom.x, d_t));
    Ok((
        design_codeword(scene, up, top, Sigma::Up)?,
        design_codeword(scene, down, bottom, Sigma::Down)?,
    ))
}

/// The probe pair as a two-entry codebook (up first).
pub fn probe_codebook(scene: &Scene, z_p: f64) -> Result<Codebook> {
    let (up, down) = probe_pair(scene, z_p)?;
    Ok(Codebook {
        kind: CodebookKind::Probe,
        sigma: None,
        entries: vec![up, down],
        params: BTreeMap::from([("z_p".to_string(), z_p)]),
        raw_candidates: 2,
        skipped: SkipCounts::default(),
    })
}

/// Received probe energies and the direction they select.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub energy_up: f64,
    pub energy_down: f64,
    pub sigma: Sigma,
}

impl ProbeResult {
    pub fn new(energy_up: f64, energy_down: f64) -> Self {
        Self {
            energy_up,
            energy_down,
            sigma: resolve_direction(energy_up, energy_down),
        }
    }
}

/// `+1` unless the downward probe is clearly stronger; ties go up.
pub fn resolve_direction(energy_up: f64, energy_down: f64) -> Sigma {
    if energy_down > energy_up * (1.0 + PROBE_TIE_RTOL) {
        Sigma::Down
    } else {
        Sigma::Up
    }
}

// ---------------------------------------------------------------------------
// NUPC
// ---------------------------------------------------------------------------

/// Uniform sampling lattice in inverse depth `gamma = 1/z` and slope
/// `phi = x/z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub phi_max: f64,
    pub dgamma: f64,
    pub dphi: f64,
    /// Depth levels.
    pub m: usize,
    /// Slope levels.
    pub n: usize,
}

impl PolarGrid {
    /// Grid over depths `[z_min, z_r]` and the LoS slope span
    /// `phi_max = (D_r - D_t)/(2 z_r) + D_t/(2 z_min)`.
    pub fn new(scene: &Scene, z_min: f64, dgamma: f64, dphi: f64) -> Result<Self> {
        let phi_max = (scene.d_r() - scene.d_t()) / (2.0 * scene.z_r()) + scene.d_t() / (2.0 * z_min);
        Self::with_phi_max(scene, z_min, dgamma, dphi, phi_max)
    }

    pub fn with_phi_max(scene: &Scene, z_min: f64, dgamma: f64, dphi: f64, phi_max: f64) -> Result<Self> {
        let z_r = scene.z_r();
        if !(z_min > 0.0 && z_min < z_r) {
            return Err(Error::Domain(format!("z_min {z_min} outside (0, {z_r})")));
        }
        if !(dgamma > 0.0 && dphi > 0.0 && phi_max >= 0.0) {
            return Err(Error::Domain("polar grid steps must be positive".into()));
        }
        let gamma_min = 1.0 / z_r;
        let gamma_max = 1.0 / z_min;
        Ok(Self {
            gamma_min,
            gamma_max,
            phi_max,
            dgamma,
            dphi,
            m: level_count(gamma_max - gamma_min, dgamma),
            n: level_count(2.0 * phi_max, dphi),
        })
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian waypoint of grid cell `(m, n)`.
    pub fn candidate(&self, m: usize, n: usize) -> Point {
        let z_b = 1.0 / (self.gamma_min + m as f64 * self.dgamma);
        Point::new(z_b, z_b * (-self.phi_max + n as f64 * self.dphi))
    }
}

/// How the NUPC target on the Rx is chosen from the boundary-implied
/// position `x_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClamp {
    /// Stay on the Rx center unless the boundary pushes the target towards
    /// the `sigma` edge; never past that edge.
    #[default]
    Intent,
    /// `max(D_r/2, min(x_c, x_bound))`, mirrored for `sigma = -1`.
    Literal,
}

/// Rx-plane position that puts `waypoint` exactly on the feasibility
/// boundary for direction `sigma`.
pub fn boundary_target(waypoint: Point, z_r: f64, d_t: f64, sigma: Sigma) -> f64 {
    let ratio = z_r / waypoint.z;
    ratio * waypoint.x - sigma.sign() * critical_x(d_t) * (ratio - 1.0)
}

/// Choose the NUPC target `x_r` for a boundary-implied `x_bound`.
pub fn select_target(x_bound: f64, x_c: f64, d_r: f64, sigma: Sigma, clamp: TargetClamp) -> f64 {
    match (clamp, sigma) {
        (TargetClamp::Intent, Sigma::Up) => (x_c + d_r / 2.0).min(x_c.max(x_bound)),
        (TargetClamp::Intent, Sigma::Down) => (x_c - d_r / 2.0).max(x_c.min(x_bound)),
        (TargetClamp::Literal, Sigma::Up) => (d_r / 2.0).max(x_c.min(x_bound)),
        (TargetClamp::Literal, Sigma::Down) => (-d_r / 2.0).min(x_c.max(x_bound)),
    }
}

enum Candidate {
    OutsideLos,
    BeyondBoundary,
    Design(Point, Point),
}

/// Non-uniform polar codebook for one bending direction.
pub fn nupc_generate(scene: &Scene, grid: &PolarGrid, sigma: Sigma, clamp: TargetClamp) -> Result<Codebook> {
    let z_r = scene.z_r();
    let d_t = scene.d_t();
    let (x_c, d_r) = (scene.x_c(), scene.d_r());
    let best_case = Point::new(z_r, x_c + sigma.sign() * d_r / 2.0);

    let candidates: Vec<Candidate> = (0..grid.m)
        .flat_map(|m| (0..grid.n).map(move |n| (m, n)))
        .map(|(m, n)| {
            let wp = grid.candidate(m, n);
            if !(wp.z > 0.0 && wp.z < z_r) || at_receiver_plane(wp.z, z_r) || !scene.in_los_region(wp) {
                return Candidate::OutsideLos;
            }
            if !waypoint_feasible(wp, best_case, sigma, d_t) {
                return Candidate::BeyondBoundary;
            }
            let x_bound = boundary_target(wp, z_r, d_t, sigma);
            let x_r = select_target(x_bound, x_c, d_r, sigma, clamp);
            Candidate::Design(wp, Point::new(z_r, x_r))
        })
        .collect();

    let designed: Vec<Option<Result<Codeword>>> = candidates
        .par_iter()
        .map(|c| match c {
            Candidate::Design(wp, tg) => Some(design_codeword(scene, *wp, *tg, sigma)),
            _ => None,
        })
        .collect();

    let mut skipped = SkipCounts::default();
    let mut entries = Vec::new();
    for (c, d) in candidates.iter().zip(designed) {
        match (c, d) {
            (Candidate::OutsideLos, _) => skipped.outside_los += 1,
            (Candidate::BeyondBoundary, _) => skipped.beyond_boundary += 1,
            (Candidate::Design(..), Some(Ok(cw))) => {
                if matches!(cw.meta, CodewordMeta::Focusing { .. }) {
                    skipped.focusing_fallback += 1;
                }
                entries.push(cw);
            }
            (Candidate::Design(..), Some(Err(e))) => skipped.record_error(&e),
            (Candidate::Design(..), None) => unreachable!("every design candidate is synthesized"),
        }
    }

    let params = BTreeMap::from([
        ("gamma_min".to_string(), grid.gamma_min),
        ("gamma_max".to_string(), grid.gamma_max),
        ("phi_max".to_string(), grid.phi_max),
        ("dgamma".to_string(), grid.dgamma),
        ("dphi".to_string(), grid.dphi),
        ("levels_m".to_string(), grid.m as f64),
        ("levels_n".to_string(), grid.n as f64),
        ("literal_clamp".to_string(), if clamp == TargetClamp::Literal { 1.0 } else { 0.0 }),
    ]);
    Ok(Codebook {
        kind: CodebookKind::Nupc,
        sigma: Some(sigma),
        entries,
        params,
        raw_candidates: grid.len(),
        skipped,
    })
}

// ---------------------------------------------------------------------------
// FS1C
// ---------------------------------------------------------------------------

/// Scan range `[x_s^min, x_s^max]` on the plane `z = z_f` for direction
/// `sigma`: between the LoS edge and the Airy boundary towards the Rx center.
pub fn fs1c_scan_range(scene: &Scene, z_f: f64, sigma: Sigma) -> Result<(f64, f64)> {
    let z_r = scene.z_r();
    if !(z_f > 0.0 && z_f < z_r) {
        return Err(Error::Domain(format!("z_f {z_f} outside (0, {z_r})")));
    }
    let (los_lo, los_hi) = scene.los_cross_section(z_f)?;
    Ok(match sigma {
        Sigma::Up => (los_lo, xs_max(z_f, z_r, scene.x_c(), scene.d_t())),
        Sigma::Down => (xs_min(z_f, z_r, scene.x_c(), scene.d_t()), los_hi),
    })
}

/// Number of FS1C codewords for a scan span and nominal step: the span is
/// tiled by whole steps, rounding to the nearest count.
pub fn fs1c_count(span: f64, dxs: f64) -> usize {
    (span / dxs).round() as usize + 1
}

/// Linear waypoint-to-target link across the Rx aperture.
pub fn fs1c_target(x_s: f64, range: (f64, f64), x_c: f64, d_r: f64) -> f64 {
    (x_c - d_r / 2.0) + d_r * (x_s - range.0) / (range.1 - range.0)
}

/// Fast-scanning one-dimensional codebook for one bending direction.
pub fn fs1c_generate(scene: &Scene, z_f: f64, dxs: f64, sigma: Sigma) -> Result<Codebook> {
    if !(dxs > 0.0) {
        return Err(Error::Domain(format!("scan step must be positive, got {dxs}")));
    }
    let range = fs1c_scan_range(scene, z_f, sigma)?;
    let span = range.1 - range.0;
    if !(span > 0.0) {
        return Err(Error::Generation(format!(
            "empty scan range [{}, {}] at z_f = {z_f}",
            range.0, range.1
        )));
    }
    let q_count = fs1c_count(span, dxs);
    let step = if q_count > 1 { span / (q_count - 1) as f64 } else { 0.0 };
    let (x_c, d_r, z_r) = (scene.x_c(), scene.d_r(), scene.z_r());

    let designs: Vec<Result<Codeword>> = (0..q_count)
        .into_par_iter()
        .map(|q| {
            // Entry q of the downward book mirrors entry q of the upward one.
            let x_s = match sigma {
                Sigma::Up => range.0 + q as f64 * step,
                Sigma::Down => range.1 - q as f64 * step,
            };
            let x_r = fs1c_target(x_s, range, x_c, d_r);
            design_codeword(scene, Point::new(z_f, x_s), Point::new(z_r, x_r), sigma)
        })
        .collect();

    let mut skipped = SkipCounts::default();
    let mut entries = Vec::with_capacity(q_count);
    let mut first_err = None;
    for d in designs {
        match d {
            Ok(cw) => {
                if matches!(cw.meta, CodewordMeta::Focusing { .. }) {
                    skipped.focusing_fallback += 1;
                }
                entries.push(cw);
            }
            Err(e) => {
                skipped.record_error(&e);
                first_err.get_or_insert(e);
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::Generation(format!(
            "no realizable FS1C codeword at z_f = {z_f}: {}",
            first_err.map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    let params = BTreeMap::from([
        ("z_f".to_string(), z_f),
        ("dxs".to_string(), dxs),
        ("step".to_string(), step),
        ("xs_min".to_string(), range.0),
        ("xs_max".to_string(), range.1),
        ("count".to_string(), q_count as f64),
    ]);
    Ok(Codebook {
        kind: CodebookKind::Fs1c,
        sigma: Some(sigma),
        entries,
        params,
        raw_candidates: q_count,
        skipped,
    })
}

// ---------------------------------------------------------------------------
// HFAC-style parameter grid
// ---------------------------------------------------------------------------

/// Sampling intervals and ranges of the parameter-grid baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfacConfig {
    /// Curvature step on the normalized range `[-1, 1]`.
    pub s_a: f64,
    /// Focal step on the normalized range `[z_min / z_r, 1]`.
    pub s_r: f64,
    /// Steering step (rad) across the angular span of the Rx aperture.
    pub s_theta: f64,
    pub z_min: f64,
    /// Curvature at normalized level 1 (m^-1); derived when `None`.
    pub b_max: Option<f64>,
}

impl Default for HfacConfig {
    fn default() -> Self {
        Self {
            s_a: 0.25,
            s_r: 1.0 / 3.0,
            s_theta: 0.0078,
            z_min: 0.5,
            b_max: None,
        }
    }
}

/// Largest curvature a waypoint at `z_min` on the boundary can demand.
pub fn hfac_default_b_max(scene: &Scene, z_min: f64) -> f64 {
    let v = 1.0 / z_min - 1.0 / scene.z_r();
    (v * m_of_x(critical_x(scene.d_t()), scene.wavelength, scene.beam_waist())).cbrt()
}

/// Normalized curvature levels: `0, ±s_a, ±2 s_a, ...` up to ±1, ascending.
pub fn hfac_curvature_levels(s_a: f64) -> Vec<f64> {
    let per_sign = level_count(1.0, s_a);
    let positive: Vec<f64> = (1..per_sign).map(|k| k as f64 * s_a).collect();
    positive
        .iter()
        .rev()
        .map(|a| -a)
        .chain(std::iter::once(0.0))
        .chain(positive.iter().cloned())
        .collect()
}

/// Parameter-grid baseline sweeping curvature, focal length and steering.
pub fn hfac_generate(scene: &Scene, cfg: &HfacConfig) -> Result<Codebook> {
    if !(cfg.s_a > 0.0 && cfg.s_r > 0.0 && cfg.s_theta > 0.0) {
        return Err(Error::Domain("HFAC sampling intervals must be positive".into()));
    }
    let z_r = scene.z_r();
    if !(cfg.z_min > 0.0 && cfg.z_min < z_r) {
        return Err(Error::Domain(format!("z_min {} outside (0, {z_r})", cfg.z_min)));
    }
    let b_max = cfg.b_max.unwrap_or_else(|| hfac_default_b_max(scene, cfg.z_min));
    let curvature = hfac_curvature_levels(cfg.s_a);
    let r_lo = cfg.z_min / z_r;
    let focal: Vec<f64> = (0..level_count(1.0 - r_lo, cfg.s_r))
        .map(|k| (r_lo + k as f64 * cfg.s_r) * z_r)
        .collect();
    // Positive steering moves the beam towards -x.
    let theta_lo = -((scene.x_c() + scene.d_r() / 2.0) / z_r).atan();
    let theta_hi = -((scene.x_c() - scene.d_r() / 2.0) / z_r).atan();
    let steering: Vec<f64> = (0..level_count(theta_hi - theta_lo, cfg.s_theta))
        .map(|k| theta_lo + k as f64 * cfg.s_theta)
        .collect();

    let mut grid = Vec::with_capacity(curvature.len() * focal.len() * steering.len());
    for &a in &curvature {
        for &f in &focal {
            for &theta in &steering {
                grid.push(AiryParams {
                    b: a * b_max,
                    f,
                    theta,
                    sigma: if a < 0.0 { Sigma::Down } else { Sigma::Up },
                });
            }
        }
    }
    let entries = grid
        .par_iter()
        .map(|p| {
            Ok(Codeword {
                weights: phase_vector(p, &scene.tx, scene.wavelength)?,
                meta: CodewordMeta::Profile { params: *p },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let params = BTreeMap::from([
        ("s_a".to_string(), cfg.s_a),
        ("s_r".to_string(), cfg.s_r),
        ("s_theta".to_string(), cfg.s_theta),
        ("z_min".to_string(), cfg.z_min),
        ("b_max".to_string(), b_max),
        ("theta_lo".to_string(), theta_lo),
        ("theta_hi".to_string(), theta_hi),
        ("levels_curvature".to_string(), curvature.len() as f64),
        ("levels_focal".to_string(), focal.len() as f64),
        ("levels_steering".to_string(), steering.len() as f64),
    ]);
    Ok(Codebook {
        kind: CodebookKind::Hfac,
        sigma: None,
        raw_candidates: entries.len(),
        entries,
        params,
        skipped: SkipCounts::default(),
    })
}
