//! Experiment drivers: field maps of the winning beams, SE versus blockage
//! height, a Monte Carlo over random blockages, and the feasibility oracle
//! check.
//!
//! Every CSV starts with a `# config_hash=...,seed=...,rho=...` comment line
//! followed by the column header. Outputs depend only on the config and the
//! seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{trajectory, Sigma};
use crate::channel::{calibrate_snr, channel_matrix, digital_upper_bound, field_map, FieldGrid, LinkBudget};
use crate::codebooks::fs1c_scan_range;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::feasibility::{critical_x, intercept_feasible, solve_scalar_boundary, waypoint_feasible, xs_max, xs_min};
use crate::geometry::{Blockage, Point, Scene};
use crate::training::{Strategy, TrainingReport, Trainer};

/// SE excess over the digital bound tolerated as round-off.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Validated config plus everything derived from it once: base scene,
/// codebook cache and calibrated link budget.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub base: Scene,
    pub trainer: Trainer,
    pub budget: LinkBudget,
    pub config_hash: String,
}

impl Context {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let base = cfg.base_scene()?;
        let trainer = Trainer::new(&base, cfg.training())?;
        let budget = calibrate_snr(&base, cfg.target_se)?;
        let config_hash = cfg.config_hash();
        Ok(Self {
            cfg,
            base,
            trainer,
            budget,
            config_hash,
        })
    }

    pub fn comment_line(&self) -> String {
        format!(
            "# config_hash={},seed={},rho={}",
            self.config_hash, self.cfg.seed, self.budget.rho
        )
    }

    fn create(&self, dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "{}", self.comment_line())?;
        Ok((path, f))
    }

    /// Focusing first, then the configured strategies in order.
    fn with_focusing(&self) -> Vec<Strategy> {
        let mut out = vec![Strategy::Focusing];
        out.extend(self.cfg.strategies.iter().copied().filter(|s| *s != Strategy::Focusing));
        out
    }

    /// Base scene with one blockage; a zero-height obstacle is absent.
    pub fn scene_with(&self, blockage: Option<Blockage>) -> Result<Scene> {
        match blockage {
            Some(b) if b.width() > 0.0 => self.base.with_blockages(vec![b]),
            _ => Ok(self.base.clone()),
        }
    }
}

fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

// ---------------------------------------------------------------------------
// Field maps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMapEntry {
    pub strategy: Strategy,
    pub sigma: Option<Sigma>,
    pub best_index: usize,
    pub best_power: f64,
    /// Winner power relative to the NUPC winner (dB).
    pub power_db_rel_nupc: f64,
    pub se: f64,
    pub overhead: usize,
    pub target_x: Option<f64>,
    /// Brightest transverse sample on the last (Rx) depth of the map.
    pub peak_x_at_rx: f64,
    pub field_csv: String,
    pub overlay_csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMapSummary {
    pub config_hash: String,
    pub seed: u64,
    pub rho: f64,
    pub blockage: Blockage,
    pub blockage_ratio: f64,
    pub digital_se: f64,
    pub reference_strategy: Strategy,
    pub overhead_includes_probes: bool,
    pub strategies: Vec<FieldMapEntry>,
}

impl FieldMapSummary {
    pub fn entry(&self, s: Strategy) -> Option<&FieldMapEntry> {
        self.strategies.iter().find(|e| e.strategy == s)
    }
}

/// Polyline rows `(curve, z, x)` drawn over a field map.
pub fn overlay_rows(
    scene: &Scene,
    report: &TrainingReport,
    params: Option<crate::airy::AiryParams>,
    depths: &[f64],
) -> Vec<(String, f64, f64)> {
    let z_r = scene.z_r();
    let d_t = scene.d_t();
    let x_r = report.best.x_r.unwrap_or(scene.x_c());
    let mut rows = Vec::new();
    if let Some(p) = params {
        for &z in depths {
            if let Ok(x) = trajectory(z, &p, scene.beam_waist(), scene.wavelength) {
                rows.push(("trajectory".to_string(), z, x));
            }
        }
    }
    for z in [0.0, z_r] {
        rows.push(("upper_boundary".to_string(), z, xs_max(z, z_r, x_r, d_t)));
    }
    for z in [0.0, z_r] {
        rows.push(("lower_boundary".to_string(), z, xs_min(z, z_r, x_r, d_t)));
    }
    for b in &scene.blockages {
        rows.push(("blockage".to_string(), b.depth, b.x_lo));
        rows.push(("blockage".to_string(), b.depth, b.x_hi));
    }
    rows
}

/// Train every configured strategy on the blocked scene and render the
/// winners. Writes `fieldmap_<s>.csv`, `overlay_<s>.csv` and
/// `fieldmap_summary.json` under `out`.
pub fn run_field_map(ctx: &Context, out: &Path) -> Result<FieldMapSummary> {
    let cfg = &ctx.cfg;
    let blockage = cfg.blockage_with_height(cfg.blockage_height)?;
    let scene = ctx.scene_with(Some(blockage))?;
    let blockage_ratio = scene.blockage_ratio(&blockage)?;
    let h = channel_matrix(&scene);
    let grid = FieldGrid::covering(&scene, cfg.field_nz, cfg.field_nx)?;
    let reference = ctx.trainer.train(&h, Strategy::Nupc, ctx.budget)?;

    let mut entries = Vec::with_capacity(cfg.strategies.len());
    for &s in &cfg.strategies {
        let report = if s == Strategy::Nupc {
            reference.clone()
        } else {
            ctx.trainer.train(&h, s, ctx.budget)?
        };
        let cb = ctx.trainer.codebook(s, report.sigma)?;
        let winner = &cb.entries[report.best_index];
        let fm = field_map(&winner.weights, &grid, &scene)?;

        let field_name = format!("fieldmap_{s}.csv");
        let (_, mut f) = ctx.create(out, &field_name)?;
        fm.write_csv(&mut f)?;
        f.flush()?;

        let overlay_name = format!("overlay_{s}.csv");
        let (_, f) = ctx.create(out, &overlay_name)?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["curve", "z", "x"])?;
        for (curve, z, x) in overlay_rows(&scene, &report, winner.meta.params(), &grid.z) {
            w.write_record([curve, z.to_string(), x.to_string()])?;
        }
        w.flush()?;

        entries.push(FieldMapEntry {
            strategy: s,
            sigma: report.sigma,
            best_index: report.best_index,
            best_power: report.best_power,
            power_db_rel_nupc: db(report.best_power / reference.best_power),
            se: report.se,
            overhead: report.overhead,
            target_x: report.best.x_r,
            peak_x_at_rx: fm.argmax_x(grid.z.len() - 1),
            field_csv: field_name,
            overlay_csv: overlay_name,
        });
    }

    let summary = FieldMapSummary {
        config_hash: ctx.config_hash.clone(),
        seed: cfg.seed,
        rho: ctx.budget.rho,
        blockage,
        blockage_ratio,
        digital_se: digital_upper_bound(&h, ctx.budget),
        reference_strategy: Strategy::Nupc,
        overhead_includes_probes: true,
        strategies: entries,
    };
    std::fs::create_dir_all(out)?;
    let mut f = BufWriter::new(File::create(out.join("fieldmap_summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// SE versus blockage height
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub se: f64,
    pub overhead: usize,
    pub sigma: Option<Sigma>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightRow {
    pub height: f64,
    pub blockage_ratio: f64,
    pub se_digital: f64,
    pub outcomes: Vec<StrategyOutcome>,
}

impl HeightRow {
    pub fn se(&self, s: Strategy) -> Option<f64> {
        self.outcomes.iter().find(|o| o.strategy == s).map(|o| o.se)
    }
}

fn evaluate(ctx: &Context, scene: &Scene, strategies: &[Strategy]) -> Result<(f64, Vec<StrategyOutcome>)> {
    let h = channel_matrix(scene);
    let outcomes = strategies
        .iter()
        .map(|&s| {
            let r = ctx.trainer.train(&h, s, ctx.budget)?;
            Ok(StrategyOutcome {
                strategy: s,
                se: r.se,
                overhead: r.overhead,
                sigma: r.sigma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((digital_upper_bound(&h, ctx.budget), outcomes))
}

fn strategy_columns(strategies: &[Strategy]) -> Vec<String> {
    let mut cols: Vec<String> = strategies.iter().map(|s| format!("se_{s}")).collect();
    cols.extend(strategies.iter().map(|s| format!("overhead_{s}")));
    cols
}

fn strategy_cells(outcomes: &[StrategyOutcome]) -> Vec<String> {
    let mut cells: Vec<String> = outcomes.iter().map(|o| o.se.to_string()).collect();
    cells.extend(outcomes.iter().map(|o| o.overhead.to_string()));
    cells
}

/// SE of every strategy as the blockage grows. Writes `heights.csv`.
pub fn run_height_sweep(ctx: &Context, out: &Path) -> Result<Vec<HeightRow>> {
    let strategies = ctx.with_focusing();
    ctx.trainer.warm(&strategies)?;
    let rows = ctx
        .cfg
        .heights()
        .into_par_iter()
        .map(|height| {
            let blockage = ctx.cfg.blockage_with_height(height)?;
            let scene = ctx.scene_with(Some(blockage))?;
            let ratio = ctx.base.blockage_ratio(&blockage)?;
            let (se_digital, outcomes) = evaluate(ctx, &scene, &strategies)?;
            Ok(HeightRow {
                height,
                blockage_ratio: ratio,
                se_digital,
                outcomes,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (_, f) = ctx.create(out, "heights.csv")?;
    let mut w = csv::Writer::from_writer(f);
    let mut header = vec!["height".to_string(), "blockage_ratio".into(), "se_digital".into()];
    header.extend(strategy_columns(&strategies));
    w.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![r.height.to_string(), r.blockage_ratio.to_string(), r.se_digital.to_string()];
        rec.extend(strategy_cells(&r.outcomes));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub index: usize,
    pub blockage: Blockage,
    pub height: f64,
    pub blockage_ratio: f64,
    pub se_digital: f64,
    pub outcomes: Vec<StrategyOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    /// Strategy name, or `digital` for the upper bound.
    pub strategy: String,
    pub mean_se: f64,
    pub mean_overhead: Option<f64>,
    pub bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOutcome {
    pub scenarios: Vec<ScenarioRow>,
    pub aggregate: Vec<AggregateRow>,
}

impl MonteCarloOutcome {
    pub fn aggregate_for(&self, s: Strategy) -> Option<&AggregateRow> {
        self.aggregate.iter().find(|a| a.strategy == s.as_str())
    }

    pub fn total_violations(&self) -> usize {
        self.aggregate.iter().map(|a| a.bound_violations).sum()
    }
}

/// Blockage for scenario `index`: its own ChaCha stream under `seed`.
pub fn draw_blockage(ctx: &Context, seed: u64, index: usize) -> Result<(Blockage, f64)> {
    let cfg = &ctx.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let depth = uniform(&mut rng, cfg.mc_depth_min, cfg.mc_depth_max);
    let height = uniform(&mut rng, cfg.mc_height_min, cfg.mc_height_max);
    let (lo, hi) = ctx.base.los_cross_section(depth)?;
    let center = uniform(&mut rng, lo, hi);
    Ok((Blockage::from_height(depth, center, height, cfg.height_convention)?, height))
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Random blockage scenarios. Writes `montecarlo_scenarios.csv` and
/// `montecarlo_aggregate.csv`.
pub fn run_monte_carlo(ctx: &Context, out: &Path) -> Result<MonteCarloOutcome> {
    let k = ctx.cfg.scenarios;
    if k == 0 {
        return Err(Error::Config("Monte Carlo needs at least one scenario".into()));
    }
    let strategies = ctx.with_focusing();
    ctx.trainer.warm(&strategies)?;
    let seed = ctx.cfg.seed;
    let scenarios = (0..k)
        .into_par_iter()
        .map(|i| {
            let (blockage, height) = draw_blockage(ctx, seed, i)?;
            let scene = ctx.scene_with(Some(blockage))?;
            let (se_digital, outcomes) = evaluate(ctx, &scene, &strategies)?;
            Ok(ScenarioRow {
                index: i,
                blockage,
                height,
                blockage_ratio: ctx.base.blockage_ratio(&blockage)?,
                se_digital,
                outcomes,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = k as f64;
    let mut aggregate: Vec<AggregateRow> = strategies
        .iter()
        .enumerate()
        .map(|(j, s)| AggregateRow {
            strategy: s.to_string(),
            mean_se: scenarios.iter().map(|r| r.outcomes[j].se).sum::<f64>() / n,
            mean_overhead: Some(scenarios.iter().map(|r| r.outcomes[j].overhead as f64).sum::<f64>() / n),
            bound_violations: scenarios
                .iter()
                .filter(|r| r.outcomes[j].se > r.se_digital + BOUND_TOLERANCE)
                .count(),
        })
        .collect();
    aggregate.push(AggregateRow {
        strategy: "digital".into(),
        mean_se: scenarios.iter().map(|r| r.se_digital).sum::<f64>() / n,
        mean_overhead: None,
        bound_violations: 0,
    });

    let (_, f) = ctx.create(out, "montecarlo_scenarios.csv")?;
    let mut w = csv::Writer::from_writer(f);
    let mut header: Vec<String> = ["scenario", "z_b", "x_lo", "x_hi", "height", "blockage_ratio", "se_digital"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(strategy_columns(&strategies));
    header.extend(strategies.iter().filter(|s| s.uses_probes()).map(|s| format!("sigma_{s}")));
    w.write_record(&header)?;
    for r in &scenarios {
        let mut rec = vec![
            r.index.to_string(),
            r.blockage.depth.to_string(),
            r.blockage.x_lo.to_string(),
            r.blockage.x_hi.to_string(),
            r.height.to_string(),
            r.blockage_ratio.to_string(),
            r.se_digital.to_string(),
        ];
        rec.extend(strategy_cells(&r.outcomes));
        rec.extend(
            r.outcomes
                .iter()
                .filter(|o| o.strategy.uses_probes())
                .map(|o| o.sigma.map(|s| s.as_i8().to_string()).unwrap_or_default()),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;

    let (_, f) = ctx.create(out, "montecarlo_aggregate.csv")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["strategy", "mean_se", "mean_overhead", "bound_violations"])?;
    for a in &aggregate {
        w.write_record([
            a.strategy.clone(),
            a.mean_se.to_string(),
            a.mean_overhead.map(|o| o.to_string()).unwrap_or_default(),
            a.bound_violations.to_string(),
        ])?;
    }
    w.flush()?;

    Ok(MonteCarloOutcome { scenarios, aggregate })
}

// ---------------------------------------------------------------------------
// Feasibility oracle check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub samples: usize,
    pub agreements: usize,
    pub rate: f64,
    /// Largest `|x_s - boundary|` among disagreements (m).
    pub max_disagreement_distance: f64,
    /// Disagreements farther than `band` from the linear boundary.
    pub outside_band: usize,
    pub band: f64,
}

/// Compare the linear-boundary and intercept verdicts on random waypoints
/// in the LoS region at depths `[z_lo, z_hi]`, with random Rx targets and
/// directions. Disagreements are measured against a band of `band` metres.
pub fn oracle_agreement(
    scene: &Scene,
    samples: usize,
    depths: (f64, f64),
    band: f64,
    seed: u64,
) -> Result<AgreementStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d_t, z_r) = (scene.d_t(), scene.z_r());
    let (mut agreements, mut outside_band, mut max_dist) = (0, 0, 0.0_f64);
    for _ in 0..samples {
        let z_b = uniform(&mut rng, depths.0, depths.1);
        let (lo, hi) = scene.los_cross_section(z_b)?;
        let x_s = uniform(&mut rng, lo, hi);
        let x_r = uniform(&mut rng, scene.rx.lower_edge(), scene.rx.upper_edge());
        let sigma = if rng.gen_bool(0.5) { Sigma::Up } else { Sigma::Down };
        let wp = Point::new(z_b, x_s);
        let tg = Point::new(z_r, x_r);
        let linear = waypoint_feasible(wp, tg, sigma, d_t);
        let full = intercept_feasible(wp, tg, sigma, d_t, scene.wavelength, scene.beam_waist())?;
        if linear == full {
            agreements += 1;
        } else {
            let edge = match sigma {
                Sigma::Up => xs_max(z_b, z_r, x_r, d_t),
                Sigma::Down => xs_min(z_b, z_r, x_r, d_t),
            };
            let dist = (x_s - edge).abs();
            max_dist = max_dist.max(dist);
            if dist >= band {
                outside_band += 1;
            }
        }
    }
    Ok(AgreementStats {
        samples,
        agreements,
        rate: agreements as f64 / samples.max(1) as f64,
        max_disagreement_distance: max_dist,
        outside_band,
        band,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub aperture: f64,
    pub root: f64,
    pub residual: f64,
    pub iterations: u32,
    pub closed_form: f64,
    pub relative_error: f64,
    pub fs1c_range: (f64, f64),
    pub agreement: AgreementStats,
}

/// Scalar boundary root versus the closed form, the FS1C scan range, and
/// oracle agreement over 1000 random waypoints.
pub fn boundary_check(ctx: &Context) -> Result<BoundaryCheck> {
    let s = &ctx.base;
    let root = solve_scalar_boundary(s.d_t(), s.wavelength, s.beam_waist())?;
    let closed = critical_x(s.d_t());
    let depths = (ctx.cfg.mc_depth_min, ctx.cfg.mc_depth_max);
    Ok(BoundaryCheck {
        aperture: s.d_t(),
        root: root.root,
        residual: root.residual,
        iterations: root.iterations,
        closed_form: closed,
        relative_error: (root.root - closed).abs() / closed,
        fs1c_range: fs1c_scan_range(s, ctx.cfg.z_f, Sigma::Up)?,
        agreement: oracle_agreement(s, 1000, depths, 0.02 * s.d_t(), ctx.cfg.seed)?,
    })
}
