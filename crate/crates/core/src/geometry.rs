//! Planar scene geometry: uniform linear arrays, the line-of-sight region
//! spanned between them, and zero-thickness blockages.
//!
//! Coordinates are `(z, x)` in metres. Propagation runs along `+z`; the
//! transmit array sits on the `z = 0` plane and the receive array on
//! `z = z_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in the propagation plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: f64,
    pub x: f64,
}

impl Point {
    pub const fn new(z: f64, x: f64) -> Self {
        Self { z, x }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.z - other.z).hypot(self.x - other.x)
    }

    pub fn mirrored(&self) -> Self {
        Self::new(self.z, -self.x)
    }
}

/// Uniform linear array laid out along `x` at a fixed depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub num_elements: usize,
    pub spacing: f64,
    pub center_x: f64,
    pub depth_z: f64,
}

impl ArrayGeometry {
    pub fn new(num_elements: usize, spacing: f64, center_x: f64, depth_z: f64) -> Result<Self> {
        let geom = Self {
            num_elements,
            spacing,
            center_x,
            depth_z,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements == 0 {
            return Err(Error::InvalidScene("array needs at least one element".into()));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "element spacing must be positive, got {}",
                self.spacing
            )));
        }
        if !(self.depth_z >= 0.0 && self.depth_z.is_finite()) || !self.center_x.is_finite() {
            return Err(Error::InvalidScene(format!(
                "array placement must be finite with depth >= 0, got ({}, {})",
                self.depth_z, self.center_x
            )));
        }
        Ok(())
    }

    /// `(N - 1) * d`.
    pub fn aperture(&self) -> f64 {
        (self.num_elements - 1) as f64 * self.spacing
    }

    pub fn lower_edge(&self) -> f64 {
        self.center_x - self.aperture() / 2.0
    }

    pub fn upper_edge(&self) -> f64 {
        self.center_x + self.aperture() / 2.0
    }

    /// Transverse coordinate of element `n`.
    #[inline]
    pub fn element_x(&self, n: usize) -> f64 {
        self.center_x + (n as f64 - (self.num_elements as f64 - 1.0) / 2.0) * self.spacing
    }

    pub fn x_positions(&self) -> Vec<f64> {
        (0..self.num_elements).map(|n| self.element_x(n)).collect()
    }

    pub fn element_positions(&self) -> Vec<Point> {
        (0..self.num_elements)
            .map(|n| Point::new(self.depth_z, self.element_x(n)))
            .collect()
    }

    pub fn mirrored(&self) -> Self {
        Self {
            center_x: -self.center_x,
            ..*self
        }
    }
}

/// Zero-thickness obstacle occupying `[x_lo, x_hi]` on the plane `z = depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blockage {
    pub depth: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

/// How a blockage "height" maps to its transverse interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightConvention {
    /// Height is the half-extent about the center: `[x_b - h, x_b + h]`.
    #[default]
    HalfExtent,
    /// Height is the full extent: `[x_b - h/2, x_b + h/2]`.
    FullExtent,
}

impl Blockage {
    pub fn new(depth: f64, x_lo: f64, x_hi: f64) -> Result<Self> {
        if !(x_lo <= x_hi) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::InvalidScene(format!(
                "blockage interval [{x_lo}, {x_hi}] is not ordered"
            )));
        }
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "blockage depth must be positive, got {depth}"
            )));
        }
        Ok(Self { depth, x_lo, x_hi })
    }

    /// Blockage centered on `center` at `depth` with the given height.
    pub fn from_height(
        depth: f64,
        center: f64,
        height: f64,
        convention: HeightConvention,
    ) -> Result<Self> {
        if !(height >= 0.0) {
            return Err(Error::InvalidScene(format!(
                "blockage height must be non-negative, got {height}"
            )));
        }
        let half = match convention {
            HeightConvention::HalfExtent => height,
            HeightConvention::FullExtent => height / 2.0,
        };
        Self::new(depth, center - half, center + half)
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_lo + self.x_hi)
    }

    pub fn mirrored(&self) -> Self {
        Self {
            depth: self.depth,
            x_lo: -self.x_hi,
            x_hi: -self.x_lo,
        }
    }
}

/// The physical world: carrier, both arrays, and the obstacles between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub wavelength: f64,
    pub tx: ArrayGeometry,
    pub rx: ArrayGeometry,
    pub blockages: Vec<Blockage>,
}

impl Scene {
    pub fn new(
        wavelength: f64,
        tx: ArrayGeometry,
        rx: ArrayGeometry,
        blockages: Vec<Blockage>,
    ) -> Result<Self> {
        let scene = Self {
            wavelength,
            tx,
            rx,
            blockages,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// 140 GHz, 512-element Tx and 256-element Rx at half-wavelength
    /// spacing, Rx centered on the axis 3 m away, no blockage.
    pub fn reference() -> Self {
        let wavelength = SPEED_OF_LIGHT / 140e9;
        let d = wavelength / 2.0;
        Self {
            wavelength,
            tx: ArrayGeometry {
                num_elements: 512,
                spacing: d,
                center_x: 0.0,
                depth_z: 0.0,
            },
            rx: ArrayGeometry {
                num_elements: 256,
                spacing: d,
                center_x: 0.0,
                depth_z: 3.0,
            },
            blockages: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        self.tx.validate()?;
        self.rx.validate()?;
        if self.tx.depth_z != 0.0 {
            return Err(Error::InvalidScene("Tx array must sit at z = 0".into()));
        }
        if !(self.rx.depth_z > 0.0) {
            return Err(Error::InvalidScene("Rx array must sit at z > 0".into()));
        }
        for b in &self.blockages {
            if !(b.depth > 0.0 && b.depth < self.rx.depth_z) {
                return Err(Error::InvalidScene(format!(
                    "blockage depth {} outside (0, {})",
                    b.depth, self.rx.depth_z
                )));
            }
            if !(b.x_lo <= b.x_hi) {
                return Err(Error::InvalidScene("blockage interval not ordered".into()));
            }
        }
        Ok(())
    }

    /// Receiver depth `z_r`.
    pub fn z_r(&self) -> f64 {
        self.rx.depth_z
    }

    /// Tx aperture `D_t`.
    pub fn d_t(&self) -> f64 {
        self.tx.aperture()
    }

    /// Rx aperture `D_r`.
    pub fn d_r(&self) -> f64 {
        self.rx.aperture()
    }

    /// Rx center `x_c`.
    pub fn x_c(&self) -> f64 {
        self.rx.center_x
    }

    /// Gaussian beam waist used by the Airy design equations, `D_t / 2`.
    pub fn beam_waist(&self) -> f64 {
        self.d_t() / 2.0
    }

    pub fn with_blockages(&self, blockages: Vec<Blockage>) -> Result<Self> {
        Self::new(self.wavelength, self.tx, self.rx, blockages)
    }

    pub fn unblocked(&self) -> Self {
        Self {
            blockages: Vec::new(),
            ..self.clone()
        }
    }

    /// Reflect every transverse coordinate through `x = 0`.
    pub fn mirrored(&self) -> Self {
        Self {
            wavelength: self.wavelength,
            tx: self.tx.mirrored(),
            rx: self.rx.mirrored(),
            blockages: self.blockages.iter().map(Blockage::mirrored).collect(),
        }
    }

    /// LoS cross-section `(x_lo, x_hi)` at depth `z`: the straight lines
    /// joining corresponding Tx and Rx aperture edges.
    pub fn los_cross_section(&self, z: f64) -> Result<(f64, f64)> {
        let z_r = self.z_r();
        if !(0.0..=z_r).contains(&z) {
            return Err(Error::Domain(format!("depth {z} outside [0, {z_r}]")));
        }
        let t = z / z_r;
        let lo = self.tx.lower_edge() * (1.0 - t) + self.rx.lower_edge() * t;
        let hi = self.tx.upper_edge() * (1.0 - t) + self.rx.upper_edge() * t;
        Ok((lo, hi))
    }

    /// Whether `p` lies in the LoS region (borders count as inside).
    pub fn in_los_region(&self, p: Point) -> bool {
        match self.los_cross_section(p.z) {
            Ok((lo, hi)) => p.x >= lo && p.x <= hi,
            Err(_) => false,
        }
    }

    /// Does the straight segment `p0 -> p1` clear every blockage?
    pub fn ray_clear(&self, p0: Point, p1: Point) -> bool {
        self.blockages
            .iter()
            .all(|b| !crosses(b, p0, p1))
    }

    /// Fraction of the LoS cross-section at the blockage depth covered by
    /// the blockage interval.
    pub fn blockage_ratio(&self, blockage: &Blockage) -> Result<f64> {
        let (lo, hi) = self.los_cross_section(blockage.depth)?;
        let covered = (blockage.x_hi.min(hi) - blockage.x_lo.max(lo)).max(0.0);
        Ok((covered / (hi - lo)).clamp(0.0, 1.0))
    }
}

#[inline]
fn crosses(b: &Blockage, p0: Point, p1: Point) -> bool {
    if !(b.depth > p0.z && b.depth < p1.z) {
        return false;
    }
    let t = (b.depth - p0.z) / (p1.z - p0.z);
    let x = p0.x + t * (p1.x - p0.x);
    x >= b.x_lo && x <= b.x_hi
}

/// True iff the segment `p0 -> p1` passes through the blockage interval at
/// the blockage depth, which must lie strictly between the endpoints.
pub fn ray_blocked(blockage: &Blockage, p0: Point, p1: Point) -> Result<bool> {
    if p0.z == p1.z {
        return Err(Error::Domain("degenerate ray: p0.z == p1.z".into()));
    }
    if p0.z > p1.z {
        return Err(Error::Domain("ray must propagate towards +z".into()));
    }
    Ok(crosses(blockage, p0, p1))
}
