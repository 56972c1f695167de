//! CSV tables and their JSON sidecars.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use beamassoc::sim_engine::ResultRow;
use beamassoc::ScenarioConfig;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

pub fn version_string() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), env!("BEAMASSOC_GIT_DESCRIBE"))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

/// Coverage table: one row per threshold, empty cells for absent curves.
pub struct CoverageTable {
    pub t_db: Vec<f64>,
    pub sim: Option<Vec<f64>>,
    pub thm1_ub: Option<Vec<f64>>,
    pub thm2_lb: Option<Vec<f64>>,
    pub near_orth: Option<Vec<f64>>,
}

impl CoverageTable {
    pub const HEADER: [&'static str; 5] = ["t_db", "p_c_sim", "p_c_thm1_ub", "p_c_thm2_lb", "p_c_near_orth"];

    fn columns(&self) -> [&Option<Vec<f64>>; 4] {
        [&self.sim, &self.thm1_ub, &self.thm2_lb, &self.near_orth]
    }

    pub fn write_csv<W: Write>(&self, out: W, timestamp: bool) -> Result<()> {
        let mut out = out;
        if timestamp {
            writeln!(out, "# generated_unix={}", unix_now())?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::HEADER)?;
        for (i, t) in self.t_db.iter().enumerate() {
            let mut rec = vec![format!("{t}")];
            rec.extend(self.columns().iter().map(|c| cell(c.as_ref().map(|v| v[i]))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `(t_db, p_c)` pairs per present curve.
    pub fn curves(&self) -> Vec<CurveRecord> {
        Self::HEADER[1..]
            .iter()
            .zip(self.columns())
            .filter_map(|(name, col)| {
                col.as_ref().map(|v| CurveRecord {
                    name: name.trim_start_matches("p_c_").to_string(),
                    points: self.t_db.iter().copied().zip(v.iter().copied()).collect(),
                })
            })
            .collect()
    }
}

pub const SWEEP_HEADER: [&str; 17] = [
    "param",
    "value",
    "mode",
    "reuse",
    "reuse_wide",
    "eta",
    "training_symbols",
    "rate",
    "rate_std_error",
    "coverage",
    "p_obp",
    "p_sbp",
    "p_miss",
    "exhaustive",
    "n_drops",
    "seed",
    "error",
];

/// Sweep table. Run times stay out of the CSV so equal inputs give equal bytes.
pub fn write_sweep_csv<W: Write>(rows: &[ResultRow], out: W, timestamp: bool) -> Result<()> {
    let mut out = out;
    if timestamp {
        writeln!(out, "# generated_unix={}", unix_now())?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.param.clone(),
            cell(Some(r.value)),
            r.mode.to_string(),
            cell(Some(r.reuse)),
            cell(Some(r.reuse_wide)),
            cell(Some(r.eta)),
            cell(Some(r.training_symbols)),
            cell(Some(r.rate)),
            cell(Some(r.rate_std_error)),
            cell(Some(r.coverage)),
            cell(Some(r.p_obp)),
            cell(Some(r.p_sbp)),
            cell(Some(r.p_miss)),
            r.exhaustive.to_string(),
            r.n_drops.to_string(),
            r.seed.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CurveRecord {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
pub struct OutputRecord<'a> {
    pub schema_version: u32,
    pub version: String,
    pub command: &'a str,
    pub fingerprint: String,
    pub config: &'a ScenarioConfig,
    pub seed: u64,
    pub n_drops: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alzer_terms: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alzer_converged: Option<bool>,
}

impl<'a> OutputRecord<'a> {
    pub fn new(command: &'a str, config: &'a ScenarioConfig, seed: u64, n_drops: usize, timestamp: bool) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            version: version_string(),
            command,
            fingerprint: config.fingerprint(),
            config,
            seed,
            n_drops,
            generated_unix: timestamp.then(unix_now),
            rows: Vec::new(),
            curves: Vec::new(),
            alzer_terms: None,
            alzer_converged: None,
        }
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Write the CSV to `path` (stdout when `None`) and, for files, the sidecar next to it.
pub fn emit<F>(path: Option<&Path>, record: &OutputRecord, write_csv: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock)
        }
        Some(p) => {
            let mut file = fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            write_csv(&mut file)?;
            let side = sidecar_path(p);
            let json = serde_json::to_string_pretty(record)?;
            fs::write(&side, json + "\n").with_context(|| format!("cannot write {}", side.display()))?;
            Ok(())
        }
    }
}
