//! Monte Carlo drops, association modes and parameter sweeps.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::near_orth_reuse;
use crate::antenna::Codebooks;
use crate::beam_training::{
    exhaustive_sweep, hierarchical_sweep, perfect_alignment, Alignment, BeamDecision, PilotPartition, Scene,
};
use crate::channel::{sample_links, LinkSet, Ray};
use crate::config::{DataInterfererBeams, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{associate, sample_network, NetworkRealization};
use crate::metrics::{
    data_sinr, drop_rate, hierarchical_efficiency, hierarchical_training_symbols, resource_efficiency,
};
use crate::rng::stream;

/// Every random quantity of one drop, drawn up front so that all modes and
/// reuse factors see the same realization.
#[derive(Debug, Clone)]
pub struct Drop {
    pub net: NetworkRealization,
    pub links: LinkSet,
    /// Empty windows rejected before this one.
    pub discarded: u32,
    /// Co-pilot uniforms of the (stage-2) search.
    pub pilot_u: Vec<f64>,
    /// Co-pilot uniforms of the stage-1 search.
    pub pilot_u_wide: Vec<f64>,
    /// Beam each BS transmits on while the user trains.
    pub train_beams: Vec<usize>,
    /// Independent redraw used when data beams are not kept.
    pub fresh_beams: Vec<usize>,
}

impl Drop {
    pub fn serving(&self) -> usize {
        self.net.serving.expect("sampled networks are non-empty")
    }

    pub fn data_beams(&self, cfg: &ScenarioConfig) -> &[usize] {
        match cfg.data_interferer_beams {
            DataInterfererBeams::Fixed => &self.train_beams,
            DataInterfererBeams::Redrawn => &self.fresh_beams,
        }
    }

    pub fn partition(&self, reuse: f64) -> PilotPartition {
        PilotPartition::from_uniforms(&self.pilot_u, self.serving(), reuse)
    }

    pub fn partition_wide(&self, reuse: f64) -> PilotPartition {
        PilotPartition::from_uniforms(&self.pilot_u_wide, self.serving(), reuse)
    }

    /// The same drop seen through a smaller window: BSs beyond `radius` are
    /// removed and the user re-associates. `None` when no BS remains.
    pub fn within(&self, radius: f64) -> Option<Drop> {
        let keep: Vec<usize> = (0..self.net.len())
            .filter(|&i| self.net.bs[i].distance <= radius)
            .collect();
        if keep.is_empty() {
            return None;
        }
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let path_gain = pick(&self.net.path_gain);
        let mut links = LinkSet {
            rays: Vec::new(),
            offsets: vec![0],
        };
        for (new, &old) in keep.iter().enumerate() {
            links
                .rays
                .extend(self.links.rays_of(old).iter().map(|r| Ray { bs: new, ..*r }));
            links.offsets.push(links.rays.len());
        }
        Some(Drop {
            net: NetworkRealization {
                bs: keep.iter().map(|&i| self.net.bs[i]).collect(),
                serving: associate(&path_gain),
                path_gain,
            },
            links,
            discarded: self.discarded,
            pilot_u: pick(&self.pilot_u),
            pilot_u_wide: pick(&self.pilot_u_wide),
            train_beams: keep.iter().map(|&i| self.train_beams[i]).collect(),
            fresh_beams: keep.iter().map(|&i| self.fresh_beams[i]).collect(),
        })
    }
}

pub fn sample_drop<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Drop> {
    let (net, discarded) = sample_network(cfg, rng);
    let links = sample_links(&net.bs, cfg, rng)?;
    let n = net.len();
    let pilot_u = (0..n).map(|_| rng.random::<f64>()).collect();
    let pilot_u_wide = (0..n).map(|_| rng.random::<f64>()).collect();
    let train_beams = (0..n).map(|_| rng.random_range(0..cfg.n_bs_beams)).collect();
    let fresh_beams = (0..n).map(|_| rng.random_range(0..cfg.n_bs_beams)).collect();
    Ok(Drop {
        net,
        links,
        discarded,
        pilot_u,
        pilot_u_wide,
        train_beams,
        fresh_beams,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Genie beam choice, no training overhead.
    Perfect,
    /// Exhaustive search at the smallest reuse factor keeping co-pilot interference negligible.
    NearOrth,
    /// Exhaustive search at the scenario's reuse factor (1 by default).
    FullReuse,
    /// Wide-then-narrow two-stage search.
    Hierarchical,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Perfect, Mode::NearOrth, Mode::FullReuse, Mode::Hierarchical];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Perfect => "perfect",
            Mode::NearOrth => "near-orth",
            Mode::FullReuse => "full-reuse",
            Mode::Hierarchical => "hierarchical",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Mode::Perfect),
            "near-orth" | "near_orth" => Ok(Mode::NearOrth),
            "full-reuse" | "full_reuse" | "exhaustive" => Ok(Mode::FullReuse),
            "hierarchical" | "hier" => Ok(Mode::Hierarchical),
            _ => Err(Error::Invalid(format!(
                "unknown mode `{s}`; expected one of perfect, near-orth, full-reuse, hierarchical"
            ))),
        }
    }
}

/// Fixed per-point state shared by all drops.
#[derive(Debug, Clone)]
pub struct PointContext {
    pub cfg: ScenarioConfig,
    pub narrow: Codebooks,
    pub wide: Codebooks,
}

impl PointContext {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            narrow: Codebooks::narrow(cfg)?,
            wide: Codebooks::wide(cfg)?,
        })
    }

    /// Wide codebooks equal to the narrow ones: the hierarchy is a flat search.
    pub fn hierarchy_is_exhaustive(&self) -> bool {
        self.cfg.n_bs_wide == self.cfg.n_bs_beams && self.cfg.n_ms_wide == self.cfg.n_ms_beams
    }

    pub fn scene<'a>(&'a self, drop: &'a Drop) -> Scene<'a> {
        Scene {
            links: &drop.links,
            serving: drop.serving(),
            data_beams: &drop.train_beams,
            data_book: &self.narrow.bs,
        }
    }

    fn outcome(&self, drop: &Drop, decision: BeamDecision) -> DropOutcome {
        let scene = Scene {
            data_beams: drop.data_beams(&self.cfg),
            ..self.scene(drop)
        };
        DropOutcome {
            sinr: data_sinr(&decision, &scene, &self.narrow, &self.cfg),
            alignment: decision.alignment,
        }
    }

    pub fn perfect(&self, drop: &Drop) -> DropOutcome {
        self.outcome(drop, perfect_alignment(&self.scene(drop), &self.narrow))
    }

    pub fn exhaustive(&self, drop: &Drop, reuse: f64) -> DropOutcome {
        let d = exhaustive_sweep(&self.scene(drop), &drop.partition(reuse), &self.narrow, &self.cfg);
        self.outcome(drop, d)
    }

    pub fn hierarchical(&self, drop: &Drop, reuse_wide: f64, reuse: f64) -> Result<DropOutcome> {
        if self.hierarchy_is_exhaustive() {
            return Ok(self.exhaustive(drop, reuse));
        }
        let d = hierarchical_sweep(
            &self.scene(drop),
            &drop.partition_wide(reuse_wide),
            &drop.partition(reuse),
            &self.wide,
            &self.narrow,
            &self.cfg,
        )?;
        Ok(self.outcome(drop, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropOutcome {
    pub sinr: f64,
    pub alignment: Alignment,
}

/// Reuse factors and overhead of one mode at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSetting {
    pub mode: Mode,
    pub reuse: f64,
    pub reuse_wide: f64,
    pub eta: f64,
    pub training_symbols: f64,
    /// Hierarchical mode whose wide codebooks equal the narrow ones.
    pub exhaustive: bool,
}

impl ModeSetting {
    pub fn new(mode: Mode, ctx: &PointContext, reuse: f64, reuse_wide: f64) -> Self {
        let c = &ctx.cfg;
        let lc = c.coherence_symbols as f64;
        let flat_cost = (c.n_bs_beams * c.n_ms_beams) as f64 / reuse;
        let (eta, training_symbols, exhaustive) = match mode {
            Mode::Perfect => (1.0, 0.0, false),
            Mode::NearOrth | Mode::FullReuse => (
                resource_efficiency(1.0 / reuse, c.n_bs_beams, c.n_ms_beams, lc),
                flat_cost,
                false,
            ),
            Mode::Hierarchical if ctx.hierarchy_is_exhaustive() => (
                resource_efficiency(1.0 / reuse, c.n_bs_beams, c.n_ms_beams, lc),
                flat_cost,
                true,
            ),
            Mode::Hierarchical => (
                hierarchical_efficiency(
                    c.n_bs_wide,
                    c.n_ms_wide,
                    reuse_wide,
                    c.n_bs_beams,
                    c.n_ms_beams,
                    reuse,
                    lc,
                ),
                hierarchical_training_symbols(c.n_bs_wide, c.n_ms_wide, reuse_wide, c.n_bs_beams, c.n_ms_beams, reuse),
                false,
            ),
        };
        Self {
            mode,
            reuse,
            reuse_wide,
            eta,
            training_symbols,
            exhaustive,
        }
    }
}

/// Per-drop outcomes of one mode at one point, in drop order.
#[derive(Debug, Clone)]
pub struct ModeSamples {
    pub setting: ModeSetting,
    pub outcomes: Vec<DropOutcome>,
}

impl ModeSamples {
    pub fn sinr(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.sinr).collect()
    }

    pub fn fraction(&self, a: Alignment) -> f64 {
        self.outcomes.iter().filter(|o| o.alignment == a).count() as f64 / self.outcomes.len() as f64
    }

    /// `log2(1 + min(SINR, T_max)) 1{SINR >= T_th}` per drop, before `eta`.
    pub fn drop_rates(&self, cfg: &ScenarioConfig) -> Vec<f64> {
        self.outcomes
            .iter()
            .map(|o| drop_rate(o.sinr, cfg.sinr_threshold_min, cfg.sinr_threshold_max))
            .collect()
    }

    pub fn rate(&self, cfg: &ScenarioConfig) -> f64 {
        if self.setting.eta == 0.0 {
            return 0.0;
        }
        let r = self.drop_rates(cfg);
        self.setting.eta * r.iter().sum::<f64>() / r.len() as f64
    }

    /// Standard error of [`Self::rate`].
    pub fn rate_std_error(&self, cfg: &ScenarioConfig) -> f64 {
        let r = self.drop_rates(cfg);
        self.setting.eta * std_error(&r)
    }
}

pub fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (v / n).sqrt()
}

/// Drops `0..n_drops` of sweep point `point`, sampled in parallel and returned in order.
pub fn sample_drops(cfg: &ScenarioConfig, n_drops: usize, seed: u64, point: u64) -> Result<Vec<Drop>> {
    DropSet::new(cfg, n_drops, seed, point).map(|d| Ok(d.clone()))
}

/// The drops of one sweep point. A drop is a pure function of
/// `(seed, point, index)`, so it is re-sampled wherever it is needed rather
/// than stored; memory stays flat in the drop count.
#[derive(Debug, Clone, Copy)]
pub struct DropSet<'a> {
    pub cfg: &'a ScenarioConfig,
    pub n_drops: usize,
    pub seed: u64,
    pub point: u64,
}

impl<'a> DropSet<'a> {
    pub fn new(cfg: &'a ScenarioConfig, n_drops: usize, seed: u64, point: u64) -> Self {
        Self {
            cfg,
            n_drops,
            seed,
            point,
        }
    }

    pub fn get(&self, i: usize) -> Result<Drop> {
        sample_drop(self.cfg, &mut stream(self.seed, self.point, i as u64))
    }

    /// Evaluate `f` on every drop in parallel, keeping drop order.
    pub fn map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&Drop) -> Result<T> + Sync + Send,
    {
        (0..self.n_drops).into_par_iter().map(|i| f(&self.get(i)?)).collect()
    }
}

impl PointContext {
    pub fn evaluate(&self, drop: &Drop, setting: &ModeSetting) -> Result<DropOutcome> {
        match setting.mode {
            Mode::Perfect => Ok(self.perfect(drop)),
            Mode::NearOrth | Mode::FullReuse => Ok(self.exhaustive(drop, setting.reuse)),
            Mode::Hierarchical => self.hierarchical(drop, setting.reuse_wide, setting.reuse),
        }
    }
}

/// Run several settings in one pass over the drops, so every setting sees
/// the same realizations.
pub fn run_settings(ctx: &PointContext, drops: &DropSet, settings: &[ModeSetting]) -> Result<Vec<ModeSamples>> {
    let per_drop = drops.map(|d| settings.iter().map(|s| ctx.evaluate(d, s)).collect::<Result<Vec<_>>>())?;
    Ok(settings
        .iter()
        .enumerate()
        .map(|(k, &setting)| ModeSamples {
            setting,
            outcomes: per_drop.iter().map(|o| o[k]).collect(),
        })
        .collect())
}

pub fn run_mode(ctx: &PointContext, drops: &DropSet, setting: ModeSetting) -> Result<ModeSamples> {
    Ok(run_settings(ctx, drops, &[setting])?.remove(0))
}

/// Settings of `mode` over a reuse grid (both stages for the hierarchy),
/// largest factors first.
pub fn reuse_settings(ctx: &PointContext, mode: Mode, grid: &[f64]) -> Result<Vec<ModeSetting>> {
    if grid.is_empty() || grid.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
        return Err(Error::Invalid(
            "pilot reuse grid must be non-empty and inside (0, 1]".into(),
        ));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    let two_stage = mode == Mode::Hierarchical && !ctx.hierarchy_is_exhaustive();
    let mut out = Vec::new();
    for &rw in if two_stage { &sorted[..] } else { &sorted[..1] } {
        for &r in &sorted {
            out.push(ModeSetting::new(mode, ctx, r, if two_stage { rw } else { r }));
        }
    }
    Ok(out)
}

/// Index of the best rate; the first one wins ties.
fn best_by_rate(cfg: &ScenarioConfig, samples: &[ModeSamples]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in samples.iter().enumerate() {
        let rate = s.rate(cfg);
        if best.is_none_or(|(_, b)| rate > b) {
            best = Some((i, rate));
        }
    }
    best.expect("at least one setting").0
}

/// Best reuse factors of `mode` over `grid` (both stages for the hierarchy).
/// Ties go to the larger factor. Returns the winning samples.
pub fn optimize_pilot_reuse(ctx: &PointContext, drops: &DropSet, mode: Mode, grid: &[f64]) -> Result<ModeSamples> {
    let settings = reuse_settings(ctx, mode, grid)?;
    let mut samples = run_settings(ctx, drops, &settings)?;
    let best = best_by_rate(&ctx.cfg, &samples);
    Ok(samples.swap_remove(best))
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    CellRadius,
    BsBeamwidth,
    MsBeamwidth,
    PilotReuse,
    CoherenceSymbols,
    LosRange,
    WideCodebookSize,
}

impl SweepParam {
    pub const NAMES: [&'static str; 7] = [
        "cell_radius",
        "bs_beamwidth",
        "ms_beamwidth",
        "pilot_reuse",
        "coherence_symbols",
        "los_range",
        "wide_codebook_size",
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    /// Copy of `cfg` with this parameter set to `value`. Beamwidths are in
    /// degrees and are rounded to the nearest whole number of beams.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut c = cfg.clone();
        let beams = |deg: f64| -> Result<usize> {
            if !(deg > 0.0 && deg <= 360.0) {
                return Err(Error::field(self.name(), "beamwidth must lie in (0, 360] degrees"));
            }
            Ok((360.0 / deg).round().max(1.0) as usize)
        };
        match self {
            SweepParam::CellRadius => {
                if !(value > 0.0) {
                    return Err(Error::field("cell_radius", "must be positive"));
                }
                c = c.with_cell_radius(value);
            }
            SweepParam::BsBeamwidth => {
                c.n_bs_beams = beams(value)?;
                c.n_bs_wide = c.n_bs_wide.min(c.n_bs_beams);
            }
            SweepParam::MsBeamwidth => {
                c.n_ms_beams = beams(value)?;
                c.n_ms_wide = c.n_ms_wide.min(c.n_ms_beams);
            }
            SweepParam::PilotReuse => c.pilot_reuse = value,
            SweepParam::CoherenceSymbols => {
                if !(value >= 1.0) {
                    return Err(Error::field("coherence_symbols", "must be at least 1"));
                }
                c.coherence_symbols = value.round() as u64;
            }
            SweepParam::LosRange => c.los_range = value,
            SweepParam::WideCodebookSize => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::field("wide_codebook_size", "must be a positive integer"));
                }
                c.n_bs_wide = value as usize;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const ALL: [SweepParam; 7] = [
            SweepParam::CellRadius,
            SweepParam::BsBeamwidth,
            SweepParam::MsBeamwidth,
            SweepParam::PilotReuse,
            SweepParam::CoherenceSymbols,
            SweepParam::LosRange,
            SweepParam::WideCodebookSize,
        ];
        ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            Error::Invalid(format!(
                "unknown sweep parameter `{s}`; valid names: {}",
                Self::NAMES.join(", ")
            ))
        })
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub base: ScenarioConfig,
    /// `None` runs the base scenario as a single point.
    pub sweep: Option<Sweep>,
    pub modes: Vec<Mode>,
    pub n_drops: usize,
    pub seed: u64,
    /// Optimize reuse factors over this grid for the searched modes.
    pub pilot_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub param: String,
    pub value: f64,
    pub mode: Mode,
    pub reuse: f64,
    pub reuse_wide: f64,
    pub eta: f64,
    pub training_symbols: f64,
    /// Effective reliable rate, bits/s/Hz.
    pub rate: f64,
    pub rate_std_error: f64,
    /// Coverage at the reliability threshold.
    pub coverage: f64,
    pub p_obp: f64,
    pub p_sbp: f64,
    pub p_miss: f64,
    pub exhaustive: bool,
    pub n_drops: usize,
    pub seed: u64,
    pub runtime_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRow {
    fn from_samples(param: &str, value: f64, s: &ModeSamples, cfg: &ScenarioConfig, seed: u64, runtime_s: f64) -> Self {
        let covered = s.outcomes.iter().filter(|o| o.sinr >= cfg.sinr_threshold_min).count();
        ResultRow {
            param: param.to_string(),
            value,
            mode: s.setting.mode,
            reuse: s.setting.reuse,
            reuse_wide: s.setting.reuse_wide,
            eta: s.setting.eta,
            training_symbols: s.setting.training_symbols,
            rate: s.rate(cfg),
            rate_std_error: s.rate_std_error(cfg),
            coverage: covered as f64 / s.outcomes.len() as f64,
            p_obp: s.fraction(Alignment::Obp),
            p_sbp: s.fraction(Alignment::Sbp),
            p_miss: s.fraction(Alignment::Miss),
            exhaustive: s.setting.exhaustive,
            n_drops: s.outcomes.len(),
            seed,
            runtime_s,
            error: None,
        }
    }

    fn failed(param: &str, value: f64, mode: Mode, seed: u64, n_drops: usize, e: &Error) -> Self {
        ResultRow {
            param: param.to_string(),
            value,
            mode,
            reuse: f64::NAN,
            reuse_wide: f64::NAN,
            eta: f64::NAN,
            training_symbols: f64::NAN,
            rate: f64::NAN,
            rate_std_error: f64::NAN,
            coverage: f64::NAN,
            p_obp: f64::NAN,
            p_sbp: f64::NAN,
            p_miss: f64::NAN,
            exhaustive: false,
            n_drops,
            seed,
            runtime_s: 0.0,
            error: Some(e.to_string()),
        }
    }
}

/// Drops for the near-orthogonal threshold search.
pub const PILOT_SEARCH_DROPS: usize = 10_000;

/// Evaluate every requested mode at one scenario, sharing drops across modes.
pub fn run_point(
    cfg: &ScenarioConfig,
    modes: &[Mode],
    n_drops: usize,
    seed: u64,
    point: u64,
    pilot_grid: Option<&[f64]>,
) -> Result<Vec<ModeSamples>> {
    let ctx = PointContext::new(cfg)?;
    let drops = DropSet::new(cfg, n_drops, seed, point);
    // all settings of all modes share one pass over the drops
    let mut groups: Vec<std::ops::Range<usize>> = Vec::with_capacity(modes.len());
    let mut settings = Vec::new();
    for &mode in modes {
        let start = settings.len();
        match (mode, pilot_grid) {
            (Mode::Perfect, _) => settings.push(ModeSetting::new(mode, &ctx, 1.0, 1.0)),
            (Mode::NearOrth, _) => {
                let m = near_orth_reuse(cfg, PILOT_SEARCH_DROPS, seed ^ 0x005e_ed0f_d1e7)?;
                settings.push(ModeSetting::new(mode, &ctx, m.delta_min, m.delta_min));
            }
            (Mode::FullReuse | Mode::Hierarchical, Some(grid)) => settings.extend(reuse_settings(&ctx, mode, grid)?),
            (Mode::FullReuse | Mode::Hierarchical, None) => {
                settings.push(ModeSetting::new(mode, &ctx, cfg.pilot_reuse, cfg.wide_pilot_reuse()))
            }
        }
        groups.push(start..settings.len());
    }
    let mut samples: Vec<Option<ModeSamples>> = run_settings(&ctx, &drops, &settings)?.into_iter().map(Some).collect();
    Ok(groups
        .into_iter()
        .map(|g| {
            let group: Vec<ModeSamples> = samples[g]
                .iter_mut()
                .map(|s| s.take().expect("each setting is used once"))
                .collect();
            let best = best_by_rate(cfg, &group);
            group.into_iter().nth(best).expect("index is in range")
        })
        .collect())
}

/// One row per (sweep value, mode). A failing point yields error rows and
/// the sweep continues.
pub fn run_experiment(exp: &Experiment) -> Result<Vec<ResultRow>> {
    if exp.n_drops == 0 {
        return Err(Error::Invalid("n_drops must be at least 1".into()));
    }
    if exp.modes.is_empty() {
        return Err(Error::Invalid("at least one mode is required".into()));
    }
    let points: Vec<(String, f64, Result<ScenarioConfig>)> = match &exp.sweep {
        None => vec![("none".to_string(), f64::NAN, Ok(exp.base.clone()))],
        Some(s) => {
            if s.values.is_empty() {
                return Err(Error::Invalid("sweep needs at least one value".into()));
            }
            s.values
                .iter()
                .map(|&v| (s.param.name().to_string(), v, s.param.apply(&exp.base, v)))
                .collect()
        }
    };
    let mut rows = Vec::new();
    for (i, (param, value, cfg)) in points.into_iter().enumerate() {
        let start = Instant::now();
        let result = cfg.and_then(|c| {
            run_point(
                &c,
                &exp.modes,
                exp.n_drops,
                exp.seed,
                i as u64,
                exp.pilot_grid.as_deref(),
            )
            .map(|s| (c, s))
        });
        let elapsed = start.elapsed().as_secs_f64();
        match result {
            Ok((c, samples)) => {
                for s in &samples {
                    rows.push(ResultRow::from_samples(&param, value, s, &c, exp.seed, elapsed));
                }
            }
            Err(e) => {
                for &m in &exp.modes {
                    rows.push(ResultRow::failed(&param, value, m, exp.seed, exp.n_drops, &e));
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_are_reproducible() {
        let cfg = ScenarioConfig::default();
        let a = sample_drops(&cfg, 4, 9, 0).unwrap();
        let b = sample_drops(&cfg, 4, 9, 0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.net, y.net);
            assert_eq!(x.links, y.links);
            assert_eq!(x.train_beams, y.train_beams);
        }
        let c = sample_drops(&cfg, 1, 9, 1).unwrap();
        assert_ne!(a[0].net, c[0].net);
    }

    #[test]
    fn perfect_dominates_per_drop() {
        let cfg = ScenarioConfig::default();
        let ctx = PointContext::new(&cfg).unwrap();
        let drops = sample_drops(&cfg, 300, 2, 0).unwrap();
        for d in &drops {
            let p = ctx.perfect(d);
            let e = ctx.exhaustive(d, 1.0);
            assert!(p.sinr >= e.sinr);
            if e.alignment == Alignment::Obp {
                assert_eq!(p.sinr, e.sinr);
            }
            assert_ne!(e.alignment, Alignment::Sbp);
        }
    }

    #[test]
    fn sweep_params() {
        let cfg = ScenarioConfig::default();
        assert_eq!(SweepParam::BsBeamwidth.apply(&cfg, 45.0).unwrap().n_bs_beams, 8);
        assert_eq!(SweepParam::WideCodebookSize.apply(&cfg, 16.0).unwrap().n_bs_wide, 16);
        assert!((SweepParam::CellRadius.apply(&cfg, 30.0).unwrap().cell_radius() - 30.0).abs() < 1e-9);
        assert!("bogus".parse::<SweepParam>().is_err());
        assert_eq!("los_range".parse::<SweepParam>().unwrap(), SweepParam::LosRange);
        assert!(SweepParam::PilotReuse.apply(&cfg, 0.0).is_err());
    }

    #[test]
    fn single_value_grid() {
        let cfg = ScenarioConfig::default();
        let ctx = PointContext::new(&cfg).unwrap();
        let drops = DropSet::new(&cfg, 50, 3, 0);
        let s = optimize_pilot_reuse(&ctx, &drops, Mode::FullReuse, &[0.3]).unwrap();
        assert_eq!(s.setting.reuse, 0.3);
        assert!(optimize_pilot_reuse(&ctx, &drops, Mode::FullReuse, &[]).is_err());
        assert!(optimize_pilot_reuse(&ctx, &drops, Mode::FullReuse, &[1.5]).is_err());
    }

    #[test]
    fn one_pass_matches_separate_runs() {
        let cfg = ScenarioConfig::default();
        let ctx = PointContext::new(&cfg).unwrap();
        let drops = DropSet::new(&cfg, 40, 5, 0);
        let settings = [
            ModeSetting::new(Mode::Perfect, &ctx, 1.0, 1.0),
            ModeSetting::new(Mode::FullReuse, &ctx, 0.5, 0.5),
            ModeSetting::new(Mode::Hierarchical, &ctx, 0.7, 0.2),
        ];
        let joint = run_settings(&ctx, &drops, &settings).unwrap();
        for (s, j) in settings.iter().zip(&joint) {
            assert_eq!(run_mode(&ctx, &drops, *s).unwrap().outcomes, j.outcomes);
        }
    }

    #[test]
    fn restricted_window_matches_inner_sample() {
        let cfg = ScenarioConfig::default();
        let d = DropSet::new(&cfg, 1, 11, 0).get(0).unwrap();
        let r = cfg.cell_radius() * 3.0;
        let inner = d.within(r).unwrap();
        assert!(inner.net.bs.iter().all(|b| b.distance <= r));
        assert_eq!(inner.links.n_bs(), inner.net.len());
        assert_eq!(inner.net.bs[inner.serving()], d.net.bs[d.serving()]);
        assert!(d.within(1e-9).is_none());
        let same = d.within(f64::INFINITY).unwrap();
        assert_eq!(same.net, d.net);
        assert_eq!(same.links, d.links);
    }
}
