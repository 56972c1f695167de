//! Cross-module consistency checks run by `beamassoc validate`.

use anyhow::Result;
use beamassoc::analytic::{self, quad, AnalyticModel, QuadratureSpec};
use beamassoc::beam_training::Alignment;
use beamassoc::geometry::Tier;
use beamassoc::metrics::{
    coverage_estimate, effective_rate_empirical, effective_rate_from_coverage, t_grid_covering, Provenance,
};
use beamassoc::sim_engine::{run_settings, DropSet, Mode, ModeSetting, PointContext};
use beamassoc::ScenarioConfig;
use rayon::prelude::*;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

const SANDWICH_DB: [f64; 3] = [0.0, 10.0, 20.0];
const SANDWICH_SLACK: f64 = 0.03;
const RATE_REL_TOL: f64 = 0.02;
const EDGE_TOL: f64 = 0.005;
/// Window edge check thresholds, dB.
const EDGE_DB: [f64; 5] = [-10.0, 0.0, 10.0, 20.0, 30.0];

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub fn run_checks(cfg: &ScenarioConfig, n_drops: usize, seed: u64) -> Result<Vec<Check>> {
    let q = QuadratureSpec::default();
    let model = AnalyticModel::new(cfg)?;
    let mut checks = Vec::new();

    let tol = quad::Tolerance::new(1e-12, 1e-12);
    let worst = [cfg.nakagami_los, cfg.nakagami_nlos]
        .iter()
        .map(|&n| quad::integrate_to_inf(|g| analytic::gamma_pdf(g, n), 0.0, 1.0, tol).map(|v| (v - 1.0).abs()))
        .collect::<beamassoc::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "fading pdf normalization",
        worst < 1e-6,
        format!("max |int - 1| = {worst:.2e}"),
    ));

    let (a_los, a_nlos) = model.association_probs(&q)?;
    let mut pdf_err: f64 = (a_los + a_nlos - 1.0).abs();
    for tier in [Tier::Los, Tier::Nlos] {
        let v = quad::integrate_to_inf(
            |x| model.serving_distance_pdf(x, tier, &q).unwrap_or(f64::NAN),
            0.0,
            model.cell_radius(),
            quad::Tolerance::new(1e-10, 1e-10),
        )?;
        pdf_err = pdf_err.max((v - 1.0).abs());
    }
    checks.push(Check::new(
        "association and distance pdf normalization",
        pdf_err < 1e-6,
        format!("max error {pdf_err:.2e}"),
    ));

    let ctx = PointContext::new(cfg)?;
    let drops = DropSet::new(cfg, n_drops, seed, 0);
    let settings = [
        ModeSetting::new(Mode::FullReuse, &ctx, 1.0, 1.0),
        ModeSetting::new(Mode::Perfect, &ctx, 1.0, 1.0),
    ];
    let los = drops.map(|d| Ok(d.net.bs[d.serving()].is_los))?;
    let los_freq = los.iter().filter(|&&l| l).count() as f64 / n_drops as f64;
    let assoc_tol = 0.01f64.max(4.0 * (a_los * (1.0 - a_los) / n_drops as f64).sqrt());
    checks.push(Check::new(
        "LOS association frequency",
        (los_freq - a_los).abs() <= assoc_tol,
        format!("simulated {los_freq:.4}, analytic {a_los:.4}, tolerance {assoc_tol:.4}"),
    ));

    let mut samples = run_settings(&ctx, &drops, &settings)?;
    let perfect = samples.pop().expect("two settings");
    let full = samples.pop().expect("two settings");
    let grid: Vec<f64> = SANDWICH_DB.iter().map(|&d| db(d)).collect();
    let sim = coverage_estimate(&full.sinr(), &grid, Provenance::Sim)?;
    let bounds: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| {
            Ok((
                analytic::theorem2_lower(t, cfg, &q)?,
                analytic::theorem1_upper(t, cfg, &q)?,
            ))
        })
        .collect::<beamassoc::Result<_>>()?;
    let mut sandwich_ok = true;
    let mut detail = Vec::new();
    for (i, &(lb, ub)) in bounds.iter().enumerate() {
        let s = sim.coverage[i];
        // widened by three standard errors so short runs are not judged on noise
        let slack = SANDWICH_SLACK + 3.0 * (s * (1.0 - s) / n_drops as f64).sqrt();
        sandwich_ok &= lb - slack <= s && s <= ub + slack;
        detail.push(format!("{} dB: {lb:.3} <= {s:.3} <= {ub:.3}", SANDWICH_DB[i]));
    }
    checks.push(Check::new("bound sandwich", sandwich_ok, detail.join("; ")));

    let (t_th, t_max) = (cfg.sinr_threshold_min, cfg.sinr_threshold_max);
    let sinr = full.sinr();
    let empirical = effective_rate_empirical(&sinr, 1.0, t_th, t_max);
    let curve = coverage_estimate(&sinr, &t_grid_covering(&sinr, -20.0, 50.0, 200), Provenance::Sim)?;
    let (rate_ok, rate_detail) = match effective_rate_from_coverage(&curve, 1.0, t_th, t_max) {
        Ok(from_curve) => {
            let rel = (from_curve - empirical).abs() / empirical.max(f64::MIN_POSITIVE);
            (
                rel <= RATE_REL_TOL,
                format!("per-drop {empirical:.4}, from curve {from_curve:.4}, rel {rel:.2e}"),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    checks.push(Check::new("rate estimator agreement", rate_ok, rate_detail));

    // the doubled window restricted to the configured one is a sample of the
    // configured window, so both coverages come from the same drops
    let mut wide_cfg = cfg.clone();
    wide_cfg.sim_window_radius = 2.0 * cfg.sim_window_radius;
    let wide_ctx = PointContext::new(&wide_cfg)?;
    let pairs = DropSet::new(&wide_cfg, n_drops, seed, 1).map(|d| {
        Ok(d.within(cfg.sim_window_radius)
            .map(|inner| (wide_ctx.perfect(d).sinr, wide_ctx.perfect(&inner).sinr)))
    })?;
    let (outer_sinr, inner_sinr): (Vec<f64>, Vec<f64>) = pairs.into_iter().flatten().unzip();
    let edge_grid: Vec<f64> = EDGE_DB.iter().map(|&d| db(d)).collect();
    let a = coverage_estimate(&outer_sinr, &edge_grid, Provenance::Sim)?;
    let b = coverage_estimate(&inner_sinr, &edge_grid, Provenance::Sim)?;
    let shift = a
        .coverage
        .iter()
        .zip(&b.coverage)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "window edge effect",
        shift <= EDGE_TOL,
        format!("max coverage shift on doubling the window {shift:.4}"),
    ));

    let dominated = full
        .outcomes
        .iter()
        .zip(&perfect.outcomes)
        .all(|(f, p)| f.sinr <= p.sinr);
    let sbp = full.outcomes.iter().filter(|o| o.alignment == Alignment::Sbp).count();
    checks.push(Check::new(
        "perfect alignment dominance",
        dominated,
        "full-reuse SINR never exceeds perfect-alignment SINR".into(),
    ));
    checks.push(Check::new(
        "no side-lobe pairs under full reuse",
        sbp == 0,
        format!("{sbp} SBP drops"),
    ));

    Ok(checks)
}
