//! Data-phase SINR, coverage curves, training overhead and effective rate.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::antenna::Codebooks;
use crate::beam_training::{BeamDecision, Scene};
use crate::config::{db_to_linear, linear_to_db, ScenarioConfig};
use crate::error::{Error, Result};

/// Coverage below this level is treated as the end of the SINR support.
pub const TAIL_COVERAGE: f64 = 1e-4;

/// SINR of the data phase for a given beam decision. All non-serving BSs
/// interfere on their data beams (`scene.data_beams`).
pub fn data_sinr(decision: &BeamDecision, scene: &Scene, books: &Codebooks, cfg: &ScenarioConfig) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for l in 0..scene.links.n_bs() {
        for ray in scene.links.rays_of(l) {
            let g_ms = books.ms.gain_unchecked(decision.ms_beam, ray.aoa);
            if g_ms == 0.0 {
                continue;
            }
            let p = ray.power(cfg.tx_power) * g_ms;
            if l == scene.serving {
                signal += p * books.bs.gain_unchecked(decision.bs_beam, ray.aod);
            } else {
                interference += p * scene.data_book.gain_unchecked(scene.data_beams[l], ray.aod);
            }
        }
    }
    if signal == 0.0 {
        return 0.0;
    }
    signal / (cfg.noise_power + interference)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Sim,
    Thm1Ub,
    Thm2Lb,
    NearOrth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    /// Linear SINR thresholds, strictly ascending.
    pub thresholds: Vec<f64>,
    pub coverage: Vec<f64>,
    pub provenance: Provenance,
}

impl CoverageCurve {
    pub fn thresholds_db(&self) -> Vec<f64> {
        self.thresholds.iter().map(|&t| linear_to_db(t)).collect()
    }

    /// Coverage at `t`, linear in `ln t` between grid points.
    pub fn at(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.thresholds[0], *self.thresholds.last().expect("non-empty"));
        if !(t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12)) {
            return Err(Error::CurveRange {
                curve_lo: lo,
                curve_hi: hi,
                lo: t,
                hi: t,
            });
        }
        let i = self.thresholds.partition_point(|&x| x < t);
        if i == 0 {
            return Ok(self.coverage[0]);
        }
        if i == self.thresholds.len() {
            return Ok(*self.coverage.last().unwrap());
        }
        let (t0, t1) = (self.thresholds[i - 1].ln(), self.thresholds[i].ln());
        let w = (t.ln() - t0) / (t1 - t0);
        Ok(self.coverage[i - 1] + w * (self.coverage[i] - self.coverage[i - 1]))
    }
}

pub fn check_ascending(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::GridNotAscending);
    }
    Ok(())
}

/// `n` thresholds log-spaced from `lo_db` to `hi_db`, as linear values.
pub fn t_grid_db(lo_db: f64, hi_db: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![db_to_linear(lo_db)];
    }
    (0..n)
        .map(|i| db_to_linear(lo_db + (hi_db - lo_db) * i as f64 / (n - 1) as f64))
        .collect()
}

/// 200 points from -20 dB to 50 dB.
pub fn default_t_grid() -> Vec<f64> {
    t_grid_db(-20.0, 50.0, 200)
}

/// `n` thresholds from `lo_db` to the larger of `hi_db` and the largest
/// finite sample, so an empirical curve on this grid ends at zero coverage.
pub fn t_grid_covering(sinr: &[f64], lo_db: f64, hi_db: f64, n: usize) -> Vec<f64> {
    let top = sinr
        .iter()
        .filter(|x| x.is_finite() && **x > 0.0)
        .fold(f64::MIN, |m, &x| m.max(10.0 * x.log10()));
    t_grid_db(lo_db, hi_db.max(top.ceil() + 1.0), n)
}

/// Fraction of samples with SINR strictly above each threshold. Every
/// threshold sees the same samples, so the curve is non-increasing.
pub fn coverage_estimate(sinr: &[f64], thresholds: &[f64], provenance: Provenance) -> Result<CoverageCurve> {
    check_ascending(thresholds)?;
    if sinr.is_empty() {
        return Err(Error::Invalid("coverage needs at least one drop".into()));
    }
    let mut sorted = sinr.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let coverage = thresholds
        .iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&x| x <= t)) as f64 / n)
        .collect();
    Ok(CoverageCurve {
        thresholds: thresholds.to_vec(),
        coverage,
        provenance,
    })
}

/// Fraction of the coherence block left for data after `training_symbols`.
pub fn efficiency_from_cost(training_symbols: f64, coherence_symbols: f64) -> f64 {
    (1.0 - training_symbols / coherence_symbols).max(0.0)
}

/// Exhaustive search with `pilots` orthogonal pilot slots per beam pair.
pub fn resource_efficiency(pilots: f64, n_bs: usize, n_ms: usize, coherence_symbols: f64) -> f64 {
    efficiency_from_cost(pilots * (n_bs * n_ms) as f64, coherence_symbols)
}

/// Symbols spent by the two-stage search.
pub fn hierarchical_training_symbols(
    n_bs_wide: usize,
    n_ms_wide: usize,
    reuse_wide: f64,
    n_bs: usize,
    n_ms: usize,
    reuse: f64,
) -> f64 {
    (n_bs_wide * n_ms_wide) as f64 / reuse_wide
        + (n_bs as f64 / n_bs_wide as f64) * (n_ms as f64 / n_ms_wide as f64) / reuse
}

pub fn hierarchical_efficiency(
    n_bs_wide: usize,
    n_ms_wide: usize,
    reuse_wide: f64,
    n_bs: usize,
    n_ms: usize,
    reuse: f64,
    coherence_symbols: f64,
) -> f64 {
    efficiency_from_cost(
        hierarchical_training_symbols(n_bs_wide, n_ms_wide, reuse_wide, n_bs, n_ms, reuse),
        coherence_symbols,
    )
}

/// Rate from a coverage curve:
/// `eta [ (1/ln 2) int_{T_th}^{T_max} P_c(y)/(1+y) dy + log2(1+T_th) P_c(T_th) ]`.
///
/// The integral is a trapezoid rule in `ln y` on the curve's own grid. With
/// an infinite `T_max` the curve must fall below [`TAIL_COVERAGE`] before its
/// last threshold; the neglected tail is at most that level times the mean
/// excess `log2` SINR beyond the grid.
pub fn effective_rate_from_coverage(curve: &CoverageCurve, eta: f64, t_th: f64, t_max: f64) -> Result<f64> {
    check_ascending(&curve.thresholds)?;
    let (lo, hi) = (curve.thresholds[0], *curve.thresholds.last().unwrap());
    let upper = if t_max.is_infinite() {
        let last = *curve.coverage.last().unwrap();
        if last >= TAIL_COVERAGE {
            return Err(Error::CurveRange {
                curve_lo: lo,
                curve_hi: hi,
                lo: t_th,
                hi: t_max,
            });
        }
        hi
    } else {
        t_max
    };
    if !(t_th >= lo * (1.0 - 1e-12) && upper <= hi * (1.0 + 1e-12)) {
        return Err(Error::CurveRange {
            curve_lo: lo,
            curve_hi: hi,
            lo: t_th,
            hi: upper,
        });
    }
    let mut knots = vec![(t_th, curve.at(t_th)?)];
    for (&t, &p) in curve.thresholds.iter().zip(&curve.coverage) {
        if t > t_th && t < upper {
            knots.push((t, p));
        }
    }
    if upper > t_th {
        knots.push((upper, curve.at(upper)?));
    }
    let mut integral = 0.0;
    for w in knots.windows(2) {
        let (t0, p0) = w[0];
        let (t1, p1) = w[1];
        let f0 = p0 * t0 / (1.0 + t0);
        let f1 = p1 * t1 / (1.0 + t1);
        integral += 0.5 * (f0 + f1) * (t1.ln() - t0.ln());
    }
    let head = (1.0 + t_th).log2() * knots[0].1;
    Ok(eta * (integral / LN_2 + head))
}

/// Per-drop rate contribution `log2(1 + min(SINR, T_max)) 1{SINR >= T_th}`.
pub fn drop_rate(sinr: f64, t_th: f64, t_max: f64) -> f64 {
    if sinr >= t_th {
        (1.0 + sinr.min(t_max)).log2()
    } else {
        0.0
    }
}

/// `eta` times the sample mean of [`drop_rate`].
pub fn effective_rate_empirical(sinr: &[f64], eta: f64, t_th: f64, t_max: f64) -> f64 {
    if sinr.is_empty() || eta == 0.0 {
        return 0.0;
    }
    eta * sinr.iter().map(|&s| drop_rate(s, t_th, t_max)).sum::<f64>() / sinr.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub eta: f64,
    /// bits/s/Hz.
    pub rate: f64,
    /// Orthogonal pilots per beam pair, `1 / delta`.
    pub pilot_count: f64,
    pub training_symbols: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(p: f64, lo_db: f64, hi_db: f64) -> CoverageCurve {
        let thresholds = t_grid_db(lo_db, hi_db, 400);
        CoverageCurve {
            coverage: vec![p; thresholds.len()],
            thresholds,
            provenance: Provenance::Sim,
        }
    }

    #[test]
    fn efficiency_examples() {
        assert!((resource_efficiency(1.0, 64, 8, 70000.0) - (1.0 - 512.0 / 70000.0)).abs() < 1e-15);
        assert_eq!(resource_efficiency(200.0, 64, 8, 70000.0), 0.0);
        let h = hierarchical_efficiency(8, 8, 1.0, 64, 8, 1.0, 70000.0);
        assert!((h - (1.0 - 72.0 / 70000.0)).abs() < 1e-15);
        assert_eq!(hierarchical_efficiency(8, 8, 1.0, 64, 8, 1.0, 50.0), 0.0);
        let degenerate = hierarchical_training_symbols(64, 8, 0.5, 64, 8, 0.5);
        assert_eq!(degenerate, 512.0 / 0.5 + 1.0 / 0.5);
        assert!(degenerate > 512.0 / 0.5);
    }

    #[test]
    fn rate_of_unit_coverage() {
        let c = flat(1.0, -10.0, 10.0);
        let r = effective_rate_from_coverage(&c, 0.7, 1.0, 3.0).unwrap();
        // (1/ln 2)(ln 4 - ln 2) + 1 = 2; trapezoid in ln y of y/(1+y) is near exact
        assert!((r - 1.4).abs() < 1e-5, "{r}");
        let z = flat(0.0, -10.0, 10.0);
        assert_eq!(effective_rate_from_coverage(&z, 1.0, 1.0, 3.0).unwrap(), 0.0);
        assert!(effective_rate_from_coverage(&c, 1.0, 1.0, 100.0).is_err());
        assert!(effective_rate_from_coverage(&c, 1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn empirical_rate_edges() {
        let s = [0.5, 2.0, 10.0, 1e3];
        assert_eq!(effective_rate_empirical(&s, 1.0, 1e300, f64::INFINITY), 0.0);
        let r = effective_rate_empirical(&[2.0, 10.0], 0.5, 1.0, 1.0);
        assert!((r - 0.5).abs() < 1e-15);
        assert_eq!(effective_rate_empirical(&s, 0.0, 1.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn coverage_counts_strictly_above() {
        let c = coverage_estimate(&[0.0, 1.0, 2.0, 3.0], &[0.5, 1.0, 2.5], Provenance::Sim).unwrap();
        assert_eq!(c.coverage, vec![0.75, 0.5, 0.25]);
        assert!(matches!(
            coverage_estimate(&[1.0], &[2.0, 1.0], Provenance::Sim),
            Err(Error::GridNotAscending)
        ));
    }

    #[test]
    fn estimators_agree_on_samples() {
        // exponential SINR samples; both rate forms estimate the same quantity
        let n = 20_000;
        let sinr: Vec<f64> = (0..n).map(|i| -((i as f64 + 0.5) / n as f64).ln() * 30.0).collect();
        let mut hi = sinr.iter().cloned().fold(0.0, f64::max);
        hi = linear_to_db(hi) + 1.0;
        let curve = coverage_estimate(&sinr, &t_grid_db(-20.0, hi, 400), Provenance::Sim).unwrap();
        let a = effective_rate_from_coverage(&curve, 0.9, 1.0, f64::INFINITY).unwrap();
        let b = effective_rate_empirical(&sinr, 0.9, 1.0, f64::INFINITY);
        assert!((a - b).abs() / b < 0.005, "{a} {b}");
    }
}
