//! Experiment configuration: a flat TOML file whose keys all have defaults.
//! Unknown keys are rejected so a typo in a physics parameter cannot pass
//! silently.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codebooks::{HfacConfig, TargetClamp};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Blockage, HeightConvention, Scene, SPEED_OF_LIGHT};
use crate::training::{Strategy, TrainingConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    // Scene.
    pub frequency_hz: f64,
    pub n_t: usize,
    pub n_r: usize,
    /// Element spacing in wavelengths.
    pub spacing_wavelengths: f64,
    pub z_r: f64,
    pub x_c: f64,

    // Training.
    pub strategies: Vec<Strategy>,
    pub z_p: f64,
    pub z_min: f64,
    pub dgamma: f64,
    pub dphi: f64,
    pub z_f: f64,
    pub dxs: f64,
    pub target_clamp: TargetClamp,
    pub s_a: f64,
    pub s_r: f64,
    pub s_theta: f64,
    pub hfac_b_max: Option<f64>,

    /// Unblocked digital upper bound the SNR is calibrated to (bit/s/Hz).
    pub target_se: f64,
    pub height_convention: HeightConvention,

    // Field map and height sweep scene.
    pub blockage_depth: f64,
    pub blockage_height: f64,
    pub blockage_center: f64,
    pub field_nz: usize,
    pub field_nx: usize,
    pub height_min: f64,
    pub height_max: f64,
    pub height_step: f64,

    // Monte Carlo.
    pub scenarios: usize,
    pub mc_depth_min: f64,
    pub mc_depth_max: f64,
    pub mc_height_min: f64,
    pub mc_height_max: f64,

    pub seed: u64,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = TrainingConfig::default();
        let hf = HfacConfig::default();
        Self {
            frequency_hz: 140e9,
            n_t: 512,
            n_r: 256,
            spacing_wavelengths: 0.5,
            z_r: 3.0,
            x_c: 0.0,
            strategies: vec![Strategy::Nupc, Strategy::Fs1c, Strategy::Hfac],
            z_p: t.z_p,
            z_min: t.z_min,
            dgamma: t.dgamma,
            dphi: t.dphi,
            z_f: t.z_f,
            dxs: t.dxs,
            target_clamp: t.clamp,
            s_a: hf.s_a,
            s_r: hf.s_r,
            s_theta: hf.s_theta,
            hfac_b_max: hf.b_max,
            target_se: 15.5,
            height_convention: HeightConvention::HalfExtent,
            blockage_depth: 1.5,
            blockage_height: 0.135,
            blockage_center: 0.0,
            field_nz: 300,
            field_nx: 200,
            height_min: 0.0,
            height_max: 0.15,
            height_step: 0.005,
            scenarios: 200,
            mc_depth_min: 0.5,
            mc_depth_max: 2.5,
            mc_height_min: 0.05,
            mc_height_max: 0.15,
            seed: 7,
            out_dir: "out".into(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("frequency_hz", self.frequency_hz),
            ("spacing_wavelengths", self.spacing_wavelengths),
            ("z_r", self.z_r),
            ("z_p", self.z_p),
            ("z_min", self.z_min),
            ("dgamma", self.dgamma),
            ("dphi", self.dphi),
            ("z_f", self.z_f),
            ("dxs", self.dxs),
            ("s_a", self.s_a),
            ("s_r", self.s_r),
            ("s_theta", self.s_theta),
            ("target_se", self.target_se),
            ("blockage_depth", self.blockage_depth),
            ("height_step", self.height_step),
            ("mc_depth_min", self.mc_depth_min),
            ("mc_depth_max", self.mc_depth_max),
        ] {
            positive(name, v)?;
        }
        if let Some(b) = self.hfac_b_max {
            positive("hfac_b_max", b)?;
        }
        if !self.x_c.is_finite() || !self.blockage_center.is_finite() {
            return Err(Error::Config("`x_c` and `blockage_center` must be finite".into()));
        }
        if self.n_t < 2 || self.n_r < 2 {
            return Err(Error::Config("arrays need at least two elements".into()));
        }
        for (name, v) in [
            ("z_p", self.z_p),
            ("z_min", self.z_min),
            ("z_f", self.z_f),
            ("blockage_depth", self.blockage_depth),
            ("mc_depth_max", self.mc_depth_max),
        ] {
            if v >= self.z_r {
                return Err(Error::Config(format!("`{name}` = {v} must be below z_r = {}", self.z_r)));
            }
        }
        if self.mc_depth_min > self.mc_depth_max {
            return Err(Error::Config("`mc_depth_min` exceeds `mc_depth_max`".into()));
        }
        if !(self.blockage_height >= 0.0 && self.height_min >= 0.0 && self.mc_height_min >= 0.0) {
            return Err(Error::Config("blockage heights must be non-negative".into()));
        }
        if self.height_min > self.height_max || self.mc_height_min > self.mc_height_max {
            return Err(Error::Config("height ranges must satisfy min <= max".into()));
        }
        if self.field_nz == 0 || self.field_nx == 0 {
            return Err(Error::Config("field grid needs at least one sample per axis".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategy list is empty".into()));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    /// Arrays only, no blockage.
    pub fn base_scene(&self) -> Result<Scene> {
        let lambda = self.wavelength();
        let d = self.spacing_wavelengths * lambda;
        Scene::new(
            lambda,
            ArrayGeometry::new(self.n_t, d, 0.0, 0.0)?,
            ArrayGeometry::new(self.n_r, d, self.x_c, self.z_r)?,
            vec![],
        )
    }

    pub fn blockage_with_height(&self, height: f64) -> Result<Blockage> {
        Blockage::from_height(self.blockage_depth, self.blockage_center, height, self.height_convention)
    }

    /// The configured single-blockage scene used by field maps.
    pub fn blocked_scene(&self) -> Result<Scene> {
        self.base_scene()?
            .with_blockages(vec![self.blockage_with_height(self.blockage_height)?])
    }

    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            z_p: self.z_p,
            z_min: self.z_min,
            dgamma: self.dgamma,
            dphi: self.dphi,
            z_f: self.z_f,
            dxs: self.dxs,
            clamp: self.target_clamp,
            hfac: HfacConfig {
                s_a: self.s_a,
                s_r: self.s_r,
                s_theta: self.s_theta,
                z_min: self.z_min,
                b_max: self.hfac_b_max,
            },
        }
    }

    /// Heights of the sweep, inclusive of both ends.
    pub fn heights(&self) -> Vec<f64> {
        let n = ((self.height_max - self.height_min) / self.height_step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.height_min + k as f64 * self.height_step).collect()
    }

    /// Hash of every physics and experiment parameter. The seed and output
    /// directory are excluded; outputs record the seed next to the hash.
    pub fn config_hash(&self) -> String {
        let mut canon = self.clone();
        canon.seed = 0;
        canon.out_dir.clear();
        let json = serde_json::to_vec(&canon).expect("config serializes");
        hex::encode(Sha256::digest(&json))[..16].to_string()
    }
}
