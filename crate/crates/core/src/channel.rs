//! Near-field spherical-wave channel with hard ray occlusion, received
//! power under matched receive combining, spectral efficiency, the
//! full-digital upper bound, SNR calibration and Huygens field maps.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{Point, Scene};

/// `N_r x N_t` complex gains. Blocked rays are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub fingerprint: String,
}

impl ChannelMatrix {
    pub fn num_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_tx(&self) -> usize {
        self.entries.ncols()
    }
}

/// Short stable hash of a scene, used to tag derived artifacts.
pub fn scene_fingerprint(scene: &Scene) -> String {
    let json = serde_json::to_vec(scene).expect("scene serializes");
    hex::encode(Sha256::digest(&json))[..16].to_string()
}

/// Free-space gain `lambda / (4 pi r) * exp(-j 2 pi r / lambda)`.
#[inline]
fn free_space(r: f64, wavelength: f64) -> Complex64 {
    Complex64::from_polar(wavelength / (4.0 * PI * r), -2.0 * PI * r / wavelength)
}

pub fn channel_matrix(scene: &Scene) -> ChannelMatrix {
    let tx = scene.tx.element_positions();
    let rx = scene.rx.element_positions();
    let nr = rx.len();
    // Column-major: one column per Tx element.
    let data: Vec<Complex64> = tx
        .par_iter()
        .flat_map_iter(|t| {
            rx.iter().map(move |r| {
                if scene.ray_clear(*t, *r) {
                    free_space(t.distance(r), scene.wavelength)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    ChannelMatrix {
        entries: DMatrix::from_vec(nr, tx.len(), data),
        fingerprint: scene_fingerprint(scene),
    }
}

/// `||H f||^2`: power collected by an optimal single-stream combiner.
pub fn received_power(h: &ChannelMatrix, weights: &[Complex64]) -> Result<f64> {
    let (nr, nt) = h.entries.shape();
    if weights.len() != nt {
        return Err(Error::DimensionMismatch {
            expected: nt,
            got: weights.len(),
        });
    }
    let mut y = vec![Complex64::new(0.0, 0.0); nr];
    for (col, &w) in h.entries.as_slice().chunks_exact(nr).zip(weights) {
        if w.re == 0.0 && w.im == 0.0 {
            continue;
        }
        for (acc, &g) in y.iter_mut().zip(col) {
            *acc += g * w;
        }
    }
    Ok(y.iter().map(|c| c.norm_sqr()).sum())
}

/// Transmit SNR (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub rho: f64,
}

impl LinkBudget {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { rho })
    }
}

/// `log2(1 + rho * power)` in bit/s/Hz.
pub fn spectral_efficiency(power: f64, budget: LinkBudget) -> f64 {
    (1.0 + budget.rho * power).log2()
}

/// Largest singular value of `H`, from the eigenvalues of the smaller Gram
/// matrix.
pub fn largest_singular_value(h: &ChannelMatrix) -> f64 {
    let m = &h.entries;
    if m.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    top.max(0.0).sqrt()
}

/// Best rank-one precoder/combiner SE, `log2(1 + rho * sigma_max^2)`.
pub fn digital_upper_bound(h: &ChannelMatrix, budget: LinkBudget) -> f64 {
    let s = largest_singular_value(h);
    spectral_efficiency(s * s, budget)
}

/// Pick `rho` so the unblocked digital upper bound equals `target_se`.
pub fn calibrate_snr(scene: &Scene, target_se: f64) -> Result<LinkBudget> {
    if !(target_se > 0.0 && target_se.is_finite()) {
        return Err(Error::Domain(format!("target SE must be positive, got {target_se}")));
    }
    let h = channel_matrix(&scene.unblocked());
    let s = largest_singular_value(&h);
    if s == 0.0 {
        return Err(Error::Domain("unblocked channel is identically zero".into()));
    }
    LinkBudget::new((2f64.powf(target_se) - 1.0) / (s * s))
}

/// Diffraction-limited main-lobe width `lambda z / D` of an aperture `D`
/// observed at depth `z`.
pub fn main_lobe_width(wavelength: f64, z: f64, aperture: f64) -> f64 {
    wavelength * z / aperture
}

/// Rectangular `(z, x)` sample lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
}

impl FieldGrid {
    /// `nz` depths `z_r * (i + 1) / nz` and `nx` transverse samples spanning
    /// the box that encloses the LoS region.
    pub fn covering(scene: &Scene, nz: usize, nx: usize) -> Result<Self> {
        if nz == 0 || nx < 2 {
            return Err(Error::Domain(format!("field grid needs nz >= 1 and nx >= 2, got {nz}x{nx}")));
        }
        let z_r = scene.z_r();
        let lo = scene.tx.lower_edge().min(scene.rx.lower_edge());
        let hi = scene.tx.upper_edge().max(scene.rx.upper_edge());
        Ok(Self {
            z: (0..nz).map(|i| z_r * (i + 1) as f64 / nz as f64).collect(),
            x: (0..nx)
                .map(|i| lo + (hi - lo) * i as f64 / (nx - 1) as f64)
                .collect(),
        })
    }
}

/// Linear-power intensity on a [`FieldGrid`], row-major by depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub grid: FieldGrid,
    pub intensity: Vec<f64>,
}

impl FieldMap {
    pub fn at(&self, iz: usize, ix: usize) -> f64 {
        self.intensity[iz * self.grid.x.len() + ix]
    }

    /// Intensities across `x` at depth index `iz`.
    pub fn x_slice(&self, iz: usize) -> &[f64] {
        let nx = self.grid.x.len();
        &self.intensity[iz * nx..(iz + 1) * nx]
    }

    /// Transverse position of the brightest sample at depth index `iz`.
    pub fn argmax_x(&self, iz: usize) -> f64 {
        let slice = self.x_slice(iz);
        let (best, _) = slice
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        self.grid.x[best]
    }

    pub fn peak(&self) -> f64 {
        self.intensity.iter().cloned().fold(0.0, f64::max)
    }

    /// Write `z,x,intensity,intensity_db` rows; dB is relative to the map
    /// peak and floored at -300 dB.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let peak = self.peak();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "x", "intensity", "intensity_db"])?;
        for (iz, z) in self.grid.z.iter().enumerate() {
            for (ix, x) in self.grid.x.iter().enumerate() {
                let v = self.at(iz, ix);
                let db = if peak > 0.0 {
                    10.0 * (v / peak).max(1e-30).log10()
                } else {
                    -300.0
                };
                w.write_record(&[z.to_string(), x.to_string(), v.to_string(), db.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Huygens superposition of the Tx elements at every grid point, with the
/// same occlusion rule as [`channel_matrix`].
pub fn field_map(weights: &[Complex64], grid: &FieldGrid, scene: &Scene) -> Result<FieldMap> {
    if weights.len() != scene.tx.num_elements {
        return Err(Error::DimensionMismatch {
            expected: scene.tx.num_elements,
            got: weights.len(),
        });
    }
    if let Some(z) = grid.z.iter().find(|&&z| !(z > 0.0 && z <= scene.z_r())) {
        return Err(Error::Domain(format!("grid depth {z} outside (0, z_r]")));
    }
    let tx = scene.tx.element_positions();
    let intensity: Vec<f64> = grid
        .z
        .par_iter()
        .flat_map_iter(|&z| {
            let tx = &tx;
            grid.x.iter().map(move |&x| field_at(weights, tx, Point::new(z, x), scene).norm_sqr())
        })
        .collect();
    Ok(FieldMap {
        grid: grid.clone(),
        intensity,
    })
}

/// Complex field radiated by `weights` at `p`.
pub fn field_at(weights: &[Complex64], tx: &[Point], p: Point, scene: &Scene) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, &w) in tx.iter().zip(weights) {
        let r = t.distance(&p);
        if r == 0.0 || !scene.ray_clear(*t, p) {
            continue;
        }
        acc += w * free_space(r, scene.wavelength);
    }
    acc
}
