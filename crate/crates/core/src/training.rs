//! Beam training: probe pair, direction decision, codebook sweep, winner
//! selection and pilot accounting.
//!
//! Codebooks depend only on the array geometry, so a [`Trainer`] builds each
//! one at most once and reuses it across blockage scenarios.

use std::io::Write;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::Sigma;
use crate::channel::{
    channel_matrix, digital_upper_bound, received_power, spectral_efficiency, ChannelMatrix, LinkBudget,
};
use crate::codebooks::{
    fs1c_generate, hfac_generate, nupc_generate, probe_pair, Codebook, EntryRow, HfacConfig, PolarGrid,
    ProbeResult, TargetClamp,
};
use crate::error::{Error, Result};
use crate::geometry::Scene;

/// Pilots spent on the probe pair.
pub const PROBE_PILOTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Nupc,
    Fs1c,
    Hfac,
    Focusing,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Nupc, Strategy::Fs1c, Strategy::Hfac, Strategy::Focusing];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Nupc => "nupc",
            Strategy::Fs1c => "fs1c",
            Strategy::Hfac => "hfac",
            Strategy::Focusing => "focusing",
        }
    }

    /// Whether the strategy spends the probe pair before sweeping.
    pub fn uses_probes(self) -> bool {
        matches!(self, Strategy::Nupc | Strategy::Fs1c)
    }

    /// Parse a comma-separated list, keeping order and dropping duplicates.
    pub fn parse_list(s: &str) -> Result<Vec<Strategy>> {
        let mut out = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let st: Strategy = tok.parse()?;
            if !out.contains(&st) {
                out.push(st);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("strategy list is empty".into()));
        }
        Ok(out)
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nupc" => Ok(Strategy::Nupc),
            "fs1c" => Ok(Strategy::Fs1c),
            "hfac" => Ok(Strategy::Hfac),
            "focusing" => Ok(Strategy::Focusing),
            other => Err(Error::Config(format!("unknown strategy `{other}`"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Received powers of a full sweep and the winning index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub powers: Vec<f64>,
    pub best: usize,
}

impl SweepResult {
    pub fn best_power(&self) -> f64 {
        self.powers[self.best]
    }
}

/// Lowest index among the maximal entries.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Transmit every codeword through `h` and pick the strongest.
pub fn sweep(cb: &Codebook, h: &ChannelMatrix) -> Result<SweepResult> {
    if cb.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let powers = cb
        .entries
        .par_iter()
        .map(|cw| received_power(h, &cw.weights))
        .collect::<Result<Vec<_>>>()?;
    let best = argmax_first(&powers).expect("non-empty sweep");
    Ok(SweepResult { powers, best })
}

/// Codebook parameters shared by all strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub z_p: f64,
    pub z_min: f64,
    pub dgamma: f64,
    pub dphi: f64,
    pub z_f: f64,
    pub dxs: f64,
    pub clamp: TargetClamp,
    pub hfac: HfacConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            z_p: 0.5,
            z_min: 0.5,
            dgamma: 0.221,
            dphi: 0.02,
            z_f: 0.5,
            dxs: 0.02205,
            clamp: TargetClamp::Intent,
            hfac: HfacConfig::default(),
        }
    }
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub strategy: Strategy,
    /// Direction chosen by the probes; `None` for strategies without probes.
    pub sigma: Option<Sigma>,
    pub probe: Option<ProbeResult>,
    pub powers: Vec<f64>,
    pub best_index: usize,
    pub best_power: f64,
    pub se: f64,
    /// Pilot count, probes included.
    pub overhead: usize,
    pub probe_pilots: usize,
    pub codebook_size: usize,
    pub best: EntryRow,
}

impl TrainingReport {
    pub const CSV_HEADER: [&'static str; 13] = [
        "strategy",
        "sigma",
        "best_index",
        "best_power",
        "se",
        "overhead",
        "probe_pilots",
        "codebook_size",
        "z_b",
        "x_s",
        "x_r",
        "B",
        "theta",
    ];

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Flat summary row matching [`Self::CSV_HEADER`].
    pub fn csv_record(&self) -> Vec<String> {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            self.strategy.to_string(),
            self.sigma.map(|s| s.as_i8().to_string()).unwrap_or_default(),
            self.best_index.to_string(),
            self.best_power.to_string(),
            self.se.to_string(),
            self.overhead.to_string(),
            self.probe_pilots.to_string(),
            self.codebook_size.to_string(),
            cell(self.best.z_b),
            cell(self.best.x_s),
            cell(self.best.x_r),
            cell(self.best.b),
            cell(self.best.theta),
        ]
    }
}

/// Codebook cache for one array geometry.
pub struct Trainer {
    scene: Scene,
    cfg: TrainingConfig,
    probes: OnceLock<(crate::airy::Codeword, crate::airy::Codeword)>,
    nupc: [OnceLock<Codebook>; 2],
    fs1c: [OnceLock<Codebook>; 2],
    hfac: OnceLock<Codebook>,
    focusing: OnceLock<Codebook>,
}

fn slot(sigma: Sigma) -> usize {
    match sigma {
        Sigma::Up => 0,
        Sigma::Down => 1,
    }
}

fn cached(cell: &OnceLock<Codebook>, build: impl FnOnce() -> Result<Codebook>) -> Result<&Codebook> {
    if let Some(cb) = cell.get() {
        return Ok(cb);
    }
    let cb = build()?;
    Ok(cell.get_or_init(|| cb))
}

impl Trainer {
    /// Blockages in `scene` are ignored; only the arrays matter.
    pub fn new(scene: &Scene, cfg: TrainingConfig) -> Result<Self> {
        scene.validate()?;
        let z_r = scene.z_r();
        for (name, v) in [("z_p", cfg.z_p), ("z_min", cfg.z_min), ("z_f", cfg.z_f)] {
            if !(v > 0.0 && v < z_r) {
                return Err(Error::Config(format!("{name} = {v} must lie in (0, {z_r})")));
            }
        }
        Ok(Self {
            scene: scene.unblocked(),
            cfg,
            probes: OnceLock::new(),
            nupc: [OnceLock::new(), OnceLock::new()],
            fs1c: [OnceLock::new(), OnceLock::new()],
            hfac: OnceLock::new(),
            focusing: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.cfg
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn nupc(&self, sigma: Sigma) -> Result<&Codebook> {
        cached(&self.nupc[slot(sigma)], || {
            let grid = PolarGrid::new(&self.scene, self.cfg.z_min, self.cfg.dgamma, self.cfg.dphi)?;
            nupc_generate(&self.scene, &grid, sigma, self.cfg.clamp)
        })
    }

    pub fn fs1c(&self, sigma: Sigma) -> Result<&Codebook> {
        cached(&self.fs1c[slot(sigma)], || {
            fs1c_generate(&self.scene, self.cfg.z_f, self.cfg.dxs, sigma)
        })
    }

    pub fn hfac(&self) -> Result<&Codebook> {
        cached(&self.hfac, || hfac_generate(&self.scene, &self.cfg.hfac))
    }

    pub fn focusing(&self) -> &Codebook {
        self.focusing.get_or_init(|| Codebook::focusing(&self.scene))
    }

    /// The codebook a strategy sweeps; `sigma` is required for probing
    /// strategies and ignored otherwise.
    pub fn codebook(&self, strategy: Strategy, sigma: Option<Sigma>) -> Result<&Codebook> {
        let need = || Error::Config(format!("strategy `{strategy}` needs a bending direction"));
        match strategy {
            Strategy::Nupc => self.nupc(sigma.ok_or_else(need)?),
            Strategy::Fs1c => self.fs1c(sigma.ok_or_else(need)?),
            Strategy::Hfac => self.hfac(),
            Strategy::Focusing => Ok(self.focusing()),
        }
    }

    /// Build every codebook up front so later parallel use never races to
    /// generate the same one.
    pub fn warm(&self, strategies: &[Strategy]) -> Result<()> {
        for &s in strategies {
            if s.uses_probes() {
                self.codebook(s, Some(Sigma::Up))?;
                self.codebook(s, Some(Sigma::Down))?;
            } else {
                self.codebook(s, None)?;
            }
        }
        if strategies.iter().any(|s| s.uses_probes()) && self.probes.get().is_none() {
            let p = probe_pair(&self.scene, self.cfg.z_p)?;
            self.probes.get_or_init(|| p);
        }
        Ok(())
    }

    /// Send both probes through `h` and decide the bending direction.
    pub fn probe(&self, h: &ChannelMatrix) -> Result<ProbeResult> {
        let (up, down) = match self.probes.get() {
            Some(p) => p,
            None => {
                let p = probe_pair(&self.scene, self.cfg.z_p)?;
                self.probes.get_or_init(|| p)
            }
        };
        Ok(ProbeResult::new(
            received_power(h, &up.weights)?,
            received_power(h, &down.weights)?,
        ))
    }

    /// Run one strategy against a channel built from the same arrays.
    pub fn train(&self, h: &ChannelMatrix, strategy: Strategy, budget: LinkBudget) -> Result<TrainingReport> {
        let (probe, cb) = match strategy {
            Strategy::Nupc | Strategy::Fs1c => {
                let pr = self.probe(h)?;
                let cb = if strategy == Strategy::Nupc {
                    self.nupc(pr.sigma)?
                } else {
                    self.fs1c(pr.sigma)?
                };
                (Some(pr), cb)
            }
            Strategy::Hfac => (None, self.hfac()?),
            Strategy::Focusing => (None, self.focusing()),
        };
        let swept = sweep(cb, h)?;
        let probe_pilots = if probe.is_some() { PROBE_PILOTS } else { 0 };
        let best_power = swept.best_power();
        Ok(TrainingReport {
            strategy,
            sigma: probe.map(|p| p.sigma),
            probe,
            best_index: swept.best,
            best_power,
            se: spectral_efficiency(best_power, budget),
            overhead: probe_pilots + cb.len(),
            probe_pilots,
            codebook_size: cb.len(),
            best: cb.row(swept.best),
            powers: swept.powers,
        })
    }

    /// One report per strategy, in the given order, plus the digital bound.
    pub fn compare(&self, h: &ChannelMatrix, strategies: &[Strategy], budget: LinkBudget) -> Result<Comparison> {
        if strategies.is_empty() {
            return Err(Error::Config("strategy list is empty".into()));
        }
        let reports = strategies
            .iter()
            .map(|&s| self.train(h, s, budget))
            .collect::<Result<Vec<_>>>()?;
        Ok(Comparison {
            reports,
            digital_se: digital_upper_bound(h, budget),
        })
    }
}

/// Convenience wrapper: build the channel and a fresh trainer for one run.
pub fn train(scene: &Scene, strategy: Strategy, cfg: TrainingConfig, budget: LinkBudget) -> Result<TrainingReport> {
    let trainer = Trainer::new(scene, cfg)?;
    trainer.train(&channel_matrix(scene), strategy, budget)
}

/// Strategy reports for one channel and the digital upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reports: Vec<TrainingReport>,
    pub digital_se: f64,
}

impl Comparison {
    pub const CSV_HEADER: [&'static str; 3] = ["strategy", "se", "overhead"];

    /// `strategy,se,overhead` rows; the bound is tagged `digital` with an
    /// empty overhead.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.reports {
            w.write_record([r.strategy.to_string(), r.se.to_string(), r.overhead.to_string()])?;
        }
        w.write_record(["digital".to_string(), self.digital_se.to_string(), String::new()])?;
        w.flush()?;
        Ok(())
    }
}
