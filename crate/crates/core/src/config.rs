//! Scenario parameters.
//!
//! A [`ScenarioConfig`] holds every physical and system parameter of one
//! experiment point in linear SI units (watts, meters, radians). Decibel
//! values only appear at the text boundary, through `_db`/`_dbm` keys.
//!
//! The text format is TOML. Sections are allowed and only group keys: a
//! nested table is flattened into the top level, so
//!
//! ```toml
//! [network]
//! cell_radius = 50.0
//! los_range = 50.0
//!
//! [radio]
//! tx_power_dbm = 43.0
//! ```
//!
//! is the same scenario as writing the keys at the top level.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Thermal noise density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const DEFAULT_CELL_RADIUS: f64 = 50.0;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 100e6;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 10.0;
pub const DEFAULT_CARRIER_HZ: f64 = 28e9;
pub const DEFAULT_TX_POWER_DBM: f64 = 43.0;
pub const DEFAULT_FRONT_TO_BACK: f64 = 0.1;
/// Simulation disc radius in units of the mean cell radius.
pub const DEFAULT_WINDOW_CELLS: f64 = 20.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Thermal noise power in watts for a receiver bandwidth and noise figure.
pub fn thermal_noise_watts(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

/// Free-space path gain at 1 m, `(c / 4 pi f)^2`.
pub fn free_space_intercept(carrier_hz: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    (wavelength / (4.0 * PI)).powi(2)
}

pub fn density_from_cell_radius(cell_radius: f64) -> f64 {
    1.0 / (PI * cell_radius * cell_radius)
}

pub fn cell_radius_from_density(density: f64) -> f64 {
    1.0 / (PI * density).sqrt()
}

/// Beam pattern family used by both ends of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntennaModel {
    Sectored,
    Ula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    SinglePath,
    Multipath,
}

/// What non-serving co-pilot BSs radiate while the typical user sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingInterference {
    /// Each interferer keeps transmitting data on one random beam of its codebook.
    RandomBeam,
    /// All BSs sweep synchronously: beam `n` of every BS is active in slot `n`.
    Sweep,
}

/// Whether interferer data beams are the ones seen during training or fresh draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataInterfererBeams {
    Fixed,
    Redrawn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// BSs per square meter.
    pub bs_density: f64,
    /// LOS range constant of the blockage model, meters.
    pub los_range: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Linear path gain at 1 m.
    pub intercept_los: f64,
    pub intercept_nlos: f64,
    pub nakagami_los: u32,
    pub nakagami_nlos: u32,
    /// Watts.
    pub tx_power: f64,
    /// Watts.
    pub noise_power: f64,
    pub n_bs_beams: usize,
    pub n_ms_beams: usize,
    pub front_to_back_constant: f64,
    pub pilot_reuse: f64,
    pub coherence_symbols: u64,
    /// Linear SINR below which no MCS is reliable.
    pub sinr_threshold_min: f64,
    /// Linear SINR cap of the highest MCS; may be infinite.
    pub sinr_threshold_max: f64,
    pub sim_window_radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interference_radius: Option<f64>,
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// Stage-1 codebook sizes of the hierarchical search.
    pub n_bs_wide: usize,
    pub n_ms_wide: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pilot_reuse_wide: Option<f64>,
    pub antenna_model: AntennaModel,
    pub channel_model: ChannelModel,
    pub n_clusters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_power: Option<Vec<f64>>,
    pub training_interference: TrainingInterference,
    pub data_interferer_beams: DataInterfererBeams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let intercept = free_space_intercept(DEFAULT_CARRIER_HZ);
        Self {
            bs_density: density_from_cell_radius(DEFAULT_CELL_RADIUS),
            los_range: 50.0,
            alpha_los: 2.5,
            alpha_nlos: 4.5,
            intercept_los: intercept,
            intercept_nlos: intercept,
            nakagami_los: 2,
            nakagami_nlos: 3,
            tx_power: dbm_to_watts(DEFAULT_TX_POWER_DBM),
            noise_power: thermal_noise_watts(DEFAULT_BANDWIDTH_HZ, DEFAULT_NOISE_FIGURE_DB),
            n_bs_beams: 64,
            n_ms_beams: 8,
            front_to_back_constant: DEFAULT_FRONT_TO_BACK,
            pilot_reuse: 1.0,
            coherence_symbols: 70_000,
            sinr_threshold_min: 1.0,
            sinr_threshold_max: f64::INFINITY,
            sim_window_radius: DEFAULT_WINDOW_CELLS * DEFAULT_CELL_RADIUS,
            interference_radius: None,
            epsilon1: 0.01,
            epsilon2: 0.01,
            n_bs_wide: 8,
            n_ms_wide: 8,
            pilot_reuse_wide: None,
            antenna_model: AntennaModel::Sectored,
            channel_model: ChannelModel::SinglePath,
            n_clusters: 3,
            cluster_power: None,
            training_interference: TrainingInterference::RandomBeam,
            data_interferer_beams: DataInterfererBeams::Fixed,
        }
    }
}

/// Every key accepted in a scenario file. Derived keys (`cell_radius`,
/// `*_dbm`, `bandwidth_hz`, ...) are resolved into linear fields by
/// [`RawScenario::resolve`].
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    bs_density: Option<f64>,
    cell_radius: Option<f64>,
    los_range: Option<f64>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
    intercept_los: Option<f64>,
    intercept_nlos: Option<f64>,
    intercept_los_db: Option<f64>,
    intercept_nlos_db: Option<f64>,
    carrier_frequency_hz: Option<f64>,
    nakagami_los: Option<u32>,
    nakagami_nlos: Option<u32>,
    tx_power: Option<f64>,
    tx_power_dbm: Option<f64>,
    noise_power: Option<f64>,
    noise_power_dbm: Option<f64>,
    bandwidth_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    n_bs_beams: Option<usize>,
    n_ms_beams: Option<usize>,
    bs_beamwidth_deg: Option<f64>,
    ms_beamwidth_deg: Option<f64>,
    front_to_back_constant: Option<f64>,
    pilot_reuse: Option<f64>,
    coherence_symbols: Option<u64>,
    sinr_threshold_min: Option<f64>,
    sinr_threshold_max: Option<f64>,
    sinr_threshold_min_db: Option<f64>,
    sinr_threshold_max_db: Option<f64>,
    sim_window_radius: Option<f64>,
    interference_radius: Option<f64>,
    epsilon1: Option<f64>,
    epsilon2: Option<f64>,
    n_bs_wide: Option<usize>,
    n_ms_wide: Option<usize>,
    pilot_reuse_wide: Option<f64>,
    antenna_model: Option<AntennaModel>,
    channel_model: Option<ChannelModel>,
    n_clusters: Option<usize>,
    cluster_power: Option<Vec<f64>>,
    training_interference: Option<TrainingInterference>,
    data_interferer_beams: Option<DataInterfererBeams>,
}

fn exclusive<T>(a: Option<T>, a_name: &str, b: Option<T>, b_name: &str) -> Result<Option<(T, bool)>> {
    match (a, b) {
        (Some(_), Some(_)) => Err(Error::field(
            a_name,
            format!("conflicts with `{b_name}`; give only one"),
        )),
        (Some(x), None) => Ok(Some((x, true))),
        (None, Some(y)) => Ok(Some((y, false))),
        (None, None) => Ok(None),
    }
}

fn beams_from_width(deg: f64, field: &str) -> Result<usize> {
    if !(deg > 0.0 && deg <= 360.0) {
        return Err(Error::field(field, "beamwidth must lie in (0, 360] degrees"));
    }
    Ok((360.0 / deg).round().max(1.0) as usize)
}

impl RawScenario {
    fn resolve(self) -> Result<ScenarioConfig> {
        let d = ScenarioConfig::default();

        let bs_density = match exclusive(self.bs_density, "bs_density", self.cell_radius, "cell_radius")? {
            Some((v, true)) => v,
            Some((rc, false)) => {
                if !(rc > 0.0) {
                    return Err(Error::field("cell_radius", "must be positive"));
                }
                density_from_cell_radius(rc)
            }
            None => d.bs_density,
        };

        let carrier = self.carrier_frequency_hz.unwrap_or(DEFAULT_CARRIER_HZ);
        if !(carrier > 0.0) {
            return Err(Error::field("carrier_frequency_hz", "must be positive"));
        }
        let fs = free_space_intercept(carrier);
        let intercept_los = exclusive(
            self.intercept_los,
            "intercept_los",
            self.intercept_los_db,
            "intercept_los_db",
        )?
        .map(|(v, lin)| if lin { v } else { db_to_linear(v) })
        .unwrap_or(fs);
        let intercept_nlos = exclusive(
            self.intercept_nlos,
            "intercept_nlos",
            self.intercept_nlos_db,
            "intercept_nlos_db",
        )?
        .map(|(v, lin)| if lin { v } else { db_to_linear(v) })
        .unwrap_or(fs);

        let tx_power = exclusive(self.tx_power, "tx_power", self.tx_power_dbm, "tx_power_dbm")?
            .map(|(v, lin)| if lin { v } else { dbm_to_watts(v) })
            .unwrap_or(d.tx_power);

        let explicit_noise = exclusive(self.noise_power, "noise_power", self.noise_power_dbm, "noise_power_dbm")?
            .map(|(v, lin)| if lin { v } else { dbm_to_watts(v) });
        let noise_power = match explicit_noise {
            Some(n) => {
                if self.bandwidth_hz.is_some() || self.noise_figure_db.is_some() {
                    return Err(Error::field(
                        "noise_power",
                        "give either an explicit noise power or bandwidth_hz/noise_figure_db",
                    ));
                }
                n
            }
            None => {
                let bw = self.bandwidth_hz.unwrap_or(DEFAULT_BANDWIDTH_HZ);
                if !(bw > 0.0) {
                    return Err(Error::field("bandwidth_hz", "must be positive"));
                }
                thermal_noise_watts(bw, self.noise_figure_db.unwrap_or(DEFAULT_NOISE_FIGURE_DB))
            }
        };

        let n_bs_beams = match (self.n_bs_beams, self.bs_beamwidth_deg) {
            (Some(_), Some(_)) => {
                return Err(Error::field(
                    "n_bs_beams",
                    "conflicts with `bs_beamwidth_deg`; give only one",
                ))
            }
            (Some(n), None) => n,
            (None, Some(deg)) => beams_from_width(deg, "bs_beamwidth_deg")?,
            (None, None) => d.n_bs_beams,
        };
        let n_ms_beams = match (self.n_ms_beams, self.ms_beamwidth_deg) {
            (Some(_), Some(_)) => {
                return Err(Error::field(
                    "n_ms_beams",
                    "conflicts with `ms_beamwidth_deg`; give only one",
                ))
            }
            (Some(n), None) => n,
            (None, Some(deg)) => beams_from_width(deg, "ms_beamwidth_deg")?,
            (None, None) => d.n_ms_beams,
        };

        let t_min = exclusive(
            self.sinr_threshold_min,
            "sinr_threshold_min",
            self.sinr_threshold_min_db,
            "sinr_threshold_min_db",
        )?
        .map(|(v, lin)| if lin { v } else { db_to_linear(v) })
        .unwrap_or(d.sinr_threshold_min);
        let t_max = exclusive(
            self.sinr_threshold_max,
            "sinr_threshold_max",
            self.sinr_threshold_max_db,
            "sinr_threshold_max_db",
        )?
        .map(|(v, lin)| if lin { v } else { db_to_linear(v) })
        .unwrap_or(d.sinr_threshold_max);

        let window = self
            .sim_window_radius
            .unwrap_or_else(|| DEFAULT_WINDOW_CELLS * cell_radius_from_density(bs_density));

        let cfg = ScenarioConfig {
            bs_density,
            los_range: self.los_range.unwrap_or(d.los_range),
            alpha_los: self.alpha_los.unwrap_or(d.alpha_los),
            alpha_nlos: self.alpha_nlos.unwrap_or(d.alpha_nlos),
            intercept_los,
            intercept_nlos,
            nakagami_los: self.nakagami_los.unwrap_or(d.nakagami_los),
            nakagami_nlos: self.nakagami_nlos.unwrap_or(d.nakagami_nlos),
            tx_power,
            noise_power,
            n_bs_beams,
            n_ms_beams,
            front_to_back_constant: self.front_to_back_constant.unwrap_or(d.front_to_back_constant),
            pilot_reuse: self.pilot_reuse.unwrap_or(d.pilot_reuse),
            coherence_symbols: self.coherence_symbols.unwrap_or(d.coherence_symbols),
            sinr_threshold_min: t_min,
            sinr_threshold_max: t_max,
            sim_window_radius: window,
            interference_radius: self.interference_radius,
            epsilon1: self.epsilon1.unwrap_or(d.epsilon1),
            epsilon2: self.epsilon2.unwrap_or(d.epsilon2),
            n_bs_wide: self.n_bs_wide.unwrap_or(d.n_bs_wide),
            n_ms_wide: self.n_ms_wide.unwrap_or(d.n_ms_wide),
            pilot_reuse_wide: self.pilot_reuse_wide,
            antenna_model: self.antenna_model.unwrap_or(d.antenna_model),
            channel_model: self.channel_model.unwrap_or(d.channel_model),
            n_clusters: self.n_clusters.unwrap_or(d.n_clusters),
            cluster_power: self.cluster_power,
            training_interference: self.training_interference.unwrap_or(d.training_interference),
            data_interferer_beams: self.data_interferer_beams.unwrap_or(d.data_interferer_beams),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Merge nested tables into the top level. Section names only group keys.
fn flatten(table: toml::Table, out: &mut toml::Table) -> Result<()> {
    for (key, value) in table {
        match value {
            toml::Value::Table(inner) => flatten(inner, out)?,
            other => {
                if out.insert(key.clone(), other).is_some() {
                    return Err(Error::field(&key, "given more than once"));
                }
            }
        }
    }
    Ok(())
}

/// Parse a single override value the way it would appear on the right of `=`.
fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.to_string())),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::field(field, format!("must be finite and > 0, got {v}")))
    }
}

impl ScenarioConfig {
    /// Parse and validate scenario text, applying `key=value` overrides on top.
    pub fn from_toml_str_with(source: &str, overrides: &[(String, String)]) -> Result<Self> {
        let table: toml::Table = source
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let mut flat = toml::Table::new();
        flatten(table, &mut flat)?;
        for (key, value) in overrides {
            flat.insert(key.clone(), parse_value(value));
        }
        let raw: RawScenario = toml::Value::Table(flat)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        raw.resolve()
    }

    pub fn from_toml_str(source: &str) -> Result<Self> {
        Self::from_toml_str_with(source, &[])
    }

    /// Canonical text form: every field in linear units. Reloads to an identical config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    pub fn cell_radius(&self) -> f64 {
        cell_radius_from_density(self.bs_density)
    }

    pub fn wide_pilot_reuse(&self) -> f64 {
        self.pilot_reuse_wide.unwrap_or(self.pilot_reuse)
    }

    /// Mean power fraction of each multipath cluster.
    pub fn cluster_fractions(&self) -> Vec<f64> {
        match &self.cluster_power {
            Some(f) => f.clone(),
            None => vec![1.0 / self.n_clusters as f64; self.n_clusters],
        }
    }

    /// Copy with a new density; the simulation window follows the cell radius.
    pub fn with_cell_radius(&self, cell_radius: f64) -> Self {
        let mut c = self.clone();
        c.bs_density = density_from_cell_radius(cell_radius);
        c.sim_window_radius = DEFAULT_WINDOW_CELLS * cell_radius;
        c
    }

    /// Hex SHA-256 of the canonical JSON encoding (sorted keys).
    pub fn fingerprint(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        positive("bs_density", self.bs_density)?;
        positive("los_range", self.los_range)?;
        positive("alpha_los", self.alpha_los)?;
        positive("alpha_nlos", self.alpha_nlos)?;
        positive("intercept_los", self.intercept_los)?;
        positive("intercept_nlos", self.intercept_nlos)?;
        positive("tx_power", self.tx_power)?;
        positive("noise_power", self.noise_power)?;
        positive("front_to_back_constant", self.front_to_back_constant)?;
        positive("sim_window_radius", self.sim_window_radius)?;
        if let Some(r) = self.interference_radius {
            positive("interference_radius", r)?;
        }
        if self.nakagami_los == 0 {
            return Err(Error::field("nakagami_los", "must be a positive integer"));
        }
        if self.nakagami_nlos == 0 {
            return Err(Error::field("nakagami_nlos", "must be a positive integer"));
        }
        if !(self.pilot_reuse > 0.0 && self.pilot_reuse <= 1.0) {
            return Err(Error::field(
                "pilot_reuse",
                format!("reuse factor out of range (0, 1]: {}", self.pilot_reuse),
            ));
        }
        if let Some(w) = self.pilot_reuse_wide {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::field(
                    "pilot_reuse_wide",
                    format!("reuse factor out of range (0, 1]: {w}"),
                ));
            }
        }
        if self.n_bs_beams < 2 {
            return Err(Error::field("n_bs_beams", "need at least 2 BS beams"));
        }
        if self.n_ms_beams < 1 {
            return Err(Error::field("n_ms_beams", "need at least 1 MS beam"));
        }
        if self.coherence_symbols == 0 {
            return Err(Error::field("coherence_symbols", "must be positive"));
        }
        if !(self.sinr_threshold_min >= 0.0) || self.sinr_threshold_min.is_infinite() {
            return Err(Error::field("sinr_threshold_min", "must be finite and non-negative"));
        }
        if !(self.sinr_threshold_min < self.sinr_threshold_max) {
            return Err(Error::field("sinr_threshold_max", "must exceed sinr_threshold_min"));
        }
        positive("epsilon1", self.epsilon1)?;
        if !(self.epsilon2 > 0.0 && self.epsilon2 < 1.0) {
            return Err(Error::field("epsilon2", "must lie in (0, 1)"));
        }
        // nesting (wide dividing narrow) is checked by the hierarchical search itself
        if self.n_bs_wide == 0 || self.n_bs_wide > self.n_bs_beams {
            return Err(Error::field(
                "n_bs_wide",
                format!("must lie in 1..={}", self.n_bs_beams),
            ));
        }
        if self.n_ms_wide == 0 || self.n_ms_wide > self.n_ms_beams {
            return Err(Error::field(
                "n_ms_wide",
                format!("must lie in 1..={}", self.n_ms_beams),
            ));
        }
        if !(1..=3).contains(&self.n_clusters) {
            return Err(Error::field("n_clusters", "must be 1, 2 or 3"));
        }
        if let Some(f) = &self.cluster_power {
            if f.len() != self.n_clusters {
                return Err(Error::field("cluster_power", "needs one fraction per cluster"));
            }
            let sum: f64 = f.iter().sum();
            if f.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::field(
                    "cluster_power",
                    "fractions must be non-negative and sum to 1",
                ));
            }
        }
        Ok(())
    }
}

/// Read, parse and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    load_scenario_with(path, &[])
}

pub fn load_scenario_with(path: &Path, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_toml_str_with(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::InvalidField { field, .. } => field,
            other => panic!("expected a field error, got {other}"),
        }
    }

    #[test]
    fn analysis_scenario_loads() {
        let cfg = ScenarioConfig::from_toml_str(
            "cell_radius = 50.0\nalpha_los = 2.5\nalpha_nlos = 4.5\nnakagami_los = 2\nnakagami_nlos = 3\n\
             tx_power_dbm = 43.0\nn_bs_beams = 64\nn_ms_beams = 8\n",
        )
        .unwrap();
        assert_eq!(cfg.bs_density, 1.0 / (PI * 2500.0));
        assert_eq!(cfg.n_bs_beams, 64);
        assert!((cfg.tx_power - 19.952_623_149_688_8).abs() < 1e-9);
        assert!((cfg.sim_window_radius - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn zero_reuse_rejected() {
        let err = ScenarioConfig::from_toml_str("pilot_reuse = 0.0").unwrap_err();
        assert_eq!(field_of(err), "pilot_reuse");
    }

    #[test]
    fn noise_from_bandwidth() {
        let cfg =
            ScenarioConfig::from_toml_str("cell_radius = 50.0\nbandwidth_hz = 1e8\nnoise_figure_db = 10.0").unwrap();
        // -174 + 80 + 10 = -84 dBm
        let expected = 10f64.powf((-174.0 + 80.0 + 10.0 - 30.0) / 10.0);
        assert!((cfg.noise_power / expected - 1.0).abs() < 1e-12);
        assert!((cfg.noise_power - 3.981_071_705_534_97e-12).abs() < 1e-24);
    }

    #[test]
    fn sections_flatten() {
        let a = ScenarioConfig::from_toml_str("[network]\ncell_radius = 75.0\n[radio]\ntx_power_dbm = 40.0").unwrap();
        let b = ScenarioConfig::from_toml_str("tx_power_dbm = 40.0\ncell_radius = 75.0").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn duplicate_and_conflicting_keys() {
        assert!(ScenarioConfig::from_toml_str("[a]\nlos_range = 1.0\n[b]\nlos_range = 2.0").is_err());
        let err = ScenarioConfig::from_toml_str("cell_radius = 50.0\nbs_density = 1e-4").unwrap_err();
        assert_eq!(field_of(err), "bs_density");
    }

    #[test]
    fn unknown_key_is_parse_error() {
        assert!(matches!(
            ScenarioConfig::from_toml_str("bogus = 1"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn invariant_violations_name_field() {
        for (text, field) in [
            ("n_bs_beams = 1", "n_bs_beams"),
            ("los_range = -3.0", "los_range"),
            (
                "sinr_threshold_min_db = 10.0\nsinr_threshold_max_db = 5.0",
                "sinr_threshold_max",
            ),
            ("n_bs_wide = 0", "n_bs_wide"),
            ("epsilon2 = 1.5", "epsilon2"),
        ] {
            let err = ScenarioConfig::from_toml_str(text).unwrap_err();
            assert_eq!(field_of(err), field, "{text}");
        }
    }

    #[test]
    fn beamwidth_keys() {
        let cfg = ScenarioConfig::from_toml_str("bs_beamwidth_deg = 6.0\nms_beamwidth_deg = 45.0").unwrap();
        assert_eq!(cfg.n_bs_beams, 60);
        assert_eq!(cfg.n_ms_beams, 8);
    }

    #[test]
    fn overrides_apply() {
        let cfg = ScenarioConfig::from_toml_str_with(
            "cell_radius = 50.0",
            &[
                ("pilot_reuse".into(), "0.25".into()),
                ("antenna_model".into(), "ula".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.pilot_reuse, 0.25);
        assert_eq!(cfg.antenna_model, AntennaModel::Ula);
    }

    #[test]
    fn infinite_cap_round_trips() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml_string();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
