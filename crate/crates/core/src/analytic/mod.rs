//! Analytic coverage machinery: association probabilities, serving-distance
//! densities, interference Laplace functionals and the coverage bounds.

mod coverage;
pub mod quad;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::antenna::sectored_gains;
use crate::beam_training::ideal_beams;
use crate::config::{ScenarioConfig, TrainingInterference};
use crate::error::{Error, Result};
use crate::geometry::Tier;
use crate::sim_engine::{DropSet, PointContext};
use quad::{integrate_vec_to_inf, Tolerance};

pub use coverage::{
    near_orth_coverage, near_orth_curve, theorem1_curve, theorem1_upper, theorem1_upper_detailed, theorem2_curve,
    theorem2_lower, upsilon, Theorem1Value,
};

/// Tolerances of the nested integrals and the truncation policy of the
/// alternating sum in the upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Relative tolerance of the radial interference integrals.
    pub inner_rel: f64,
    /// Absolute tolerance of the fading-gain integral.
    pub middle_abs: f64,
    /// Absolute tolerance of the serving-distance integral.
    pub outer_abs: f64,
    /// Largest number of terms of the alternating sum.
    pub alzer_cap: usize,
    /// Stop adding terms once successive values differ by less than this.
    pub alzer_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            inner_rel: 1e-9,
            middle_abs: 1e-7,
            outer_abs: 1e-6,
            alzer_cap: 10,
            alzer_tol: 1e-3,
        }
    }
}

impl QuadratureSpec {
    /// Same policy with every tolerance halved.
    pub fn halved(&self) -> Self {
        Self {
            inner_rel: self.inner_rel / 2.0,
            middle_abs: self.middle_abs / 2.0,
            outer_abs: self.outer_abs / 2.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inner_rel > 0.0 && self.middle_abs > 0.0 && self.outer_abs > 0.0) {
            return Err(Error::Invalid("quadrature tolerances must be positive".into()));
        }
        if self.alzer_cap == 0 {
            return Err(Error::Invalid("alzer_cap must be at least 1".into()));
        }
        Ok(())
    }

    fn inner(&self) -> Tolerance {
        Tolerance::new(1e-300, self.inner_rel)
    }

    fn middle(&self) -> Tolerance {
        Tolerance::new(self.middle_abs, 1e-12)
    }

    fn outer(&self) -> Tolerance {
        Tolerance::new(self.outer_abs, 1e-12)
    }
}

/// Normalized gamma density `N^N g^(N-1) e^(-N g) / (N-1)!`.
pub fn gamma_pdf(g: f64, n: u32) -> f64 {
    if g < 0.0 {
        return 0.0;
    }
    let nf = f64::from(n);
    if g == 0.0 {
        return if n == 1 { 1.0 } else { 0.0 };
    }
    (nf * nf.ln() + (nf - 1.0) * g.ln() - nf * g - ln_factorial(n - 1)).exp()
}

/// `1 - (1 + x)^-N`.
pub fn alzer_f(n: u32, x: f64) -> f64 {
    let nf = f64::from(n);
    if x < 1e-4 {
        // series keeps relative accuracy for tiny arguments
        return nf * x * (1.0 - (nf + 1.0) * x / 2.0 + (nf + 1.0) * (nf + 2.0) * x * x / 6.0);
    }
    1.0 - (1.0 + x).powi(-(n as i32))
}

pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// `N (N!)^(-1/N)`.
pub fn alzer_a(n: u32) -> f64 {
    let nf = f64::from(n);
    nf * (-ln_factorial(n) / nf).exp()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TierModel {
    intercept: f64,
    alpha: f64,
    nakagami: u32,
}

/// The scenario reduced to what the analytic expressions need.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticModel {
    pub density: f64,
    pub los_range: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    pub bs_main: f64,
    pub bs_side: f64,
    pub ms_main: f64,
    pub n_bs: usize,
    pub n_ms: usize,
    los: TierModel,
    nlos: TierModel,
}

impl AnalyticModel {
    /// Sectored gains are used whatever the scenario's antenna model.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let (bs_main, bs_side) = sectored_gains(2.0 * PI / cfg.n_bs_beams as f64, cfg.front_to_back_constant);
        let ms_main = if cfg.n_ms_beams == 1 {
            1.0
        } else {
            sectored_gains(2.0 * PI / cfg.n_ms_beams as f64, cfg.front_to_back_constant).0
        };
        Ok(Self {
            density: cfg.bs_density,
            los_range: cfg.los_range,
            tx_power: cfg.tx_power,
            noise_power: cfg.noise_power,
            bs_main,
            bs_side,
            ms_main,
            n_bs: cfg.n_bs_beams,
            n_ms: cfg.n_ms_beams,
            los: TierModel {
                intercept: cfg.intercept_los,
                alpha: cfg.alpha_los,
                nakagami: cfg.nakagami_los,
            },
            nlos: TierModel {
                intercept: cfg.intercept_nlos,
                alpha: cfg.alpha_nlos,
                nakagami: cfg.nakagami_nlos,
            },
        })
    }

    fn tier(&self, t: Tier) -> &TierModel {
        match t {
            Tier::Los => &self.los,
            Tier::Nlos => &self.nlos,
        }
    }

    pub fn cell_radius(&self) -> f64 {
        1.0 / (PI * self.density).sqrt()
    }

    /// Fraction of BSs of tier `t` at distance `r`.
    fn weight(&self, t: Tier, r: f64) -> f64 {
        let p = (-r / self.los_range).exp();
        match t {
            Tier::Los => p,
            Tier::Nlos => 1.0 - p,
        }
    }

    /// `int_0^r weight(t) t dt` in closed form.
    fn cumulative(&self, t: Tier, r: f64) -> f64 {
        let mu = self.los_range;
        let z = r / mu;
        let los = if z < 0.1 {
            let mut term = z * z / 2.0;
            let mut s = term;
            for k in 3..=9 {
                term *= -z * (k - 1) as f64 / ((k - 2) as f64 * k as f64);
                s += term;
            }
            mu * mu * s
        } else {
            mu * mu * (1.0 - (-z).exp() * (1.0 + z))
        };
        match t {
            Tier::Los => los,
            Tier::Nlos => r * r / 2.0 - los,
        }
    }

    /// Closest other-tier distance with the path gain of a `serving`-tier BS at `x`.
    pub fn exclusion_radius(&self, x: f64, serving: Tier) -> f64 {
        let own = self.tier(serving);
        let other = self.tier(serving.other());
        (other.intercept / own.intercept).powf(1.0 / other.alpha) * x.powf(own.alpha / other.alpha)
    }

    /// Density of "serving BS is of tier `t` at distance `x`".
    pub fn association_integrand(&self, x: f64, t: Tier) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let two_pi_lambda = 2.0 * PI * self.density;
        let psi = self.exclusion_radius(x, t);
        two_pi_lambda
            * x
            * self.weight(t, x)
            * (-two_pi_lambda * (self.cumulative(t, x) + self.cumulative(t.other(), psi))).exp()
    }

    pub fn association_probs(&self, quad: &QuadratureSpec) -> Result<(f64, f64)> {
        let v = integrate_vec_to_inf(
            |x, out| {
                out[0] = self.association_integrand(x, Tier::Los);
                out[1] = self.association_integrand(x, Tier::Nlos);
            },
            0.0,
            self.cell_radius(),
            2,
            Tolerance::new(quad.outer_abs * 1e-3, 1e-10),
        )?;
        Ok((v[0], v[1]))
    }

    /// Serving-distance density given association with tier `t`.
    pub fn serving_distance_pdf(&self, x: f64, t: Tier, quad: &QuadratureSpec) -> Result<f64> {
        let (al, an) = self.association_probs(quad)?;
        let a = match t {
            Tier::Los => al,
            Tier::Nlos => an,
        };
        if !(a > 0.0) {
            return Err(Error::UndefinedDensity(t.name()));
        }
        Ok(self.association_integrand(x, t) / a)
    }
}

/// `(A_L, A_N)`; their sum is not renormalized.
pub fn association_probs(cfg: &ScenarioConfig) -> Result<(f64, f64)> {
    AnalyticModel::new(cfg)?.association_probs(&QuadratureSpec::default())
}

pub fn serving_distance_pdf(x: f64, t: Tier, cfg: &ScenarioConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonPositiveDistance(x));
    }
    AnalyticModel::new(cfg)?.serving_distance_pdf(x, t, &QuadratureSpec::default())
}

/// Result of the near-orthogonal reuse search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotReuseMin {
    pub delta_min: f64,
    /// Co-pilot BS density, per square meter.
    pub copilot_density: f64,
    /// Radius holding one co-pilot BS on average.
    pub interference_radius: f64,
    /// False when no reuse factor met the target and 1 was returned.
    pub attained: bool,
}

impl PilotReuseMin {
    fn new(delta: f64, density: f64, attained: bool) -> Self {
        let lc = delta * density;
        Self {
            delta_min: delta,
            copilot_density: lc,
            interference_radius: 1.0 / (PI * lc).sqrt(),
            attained,
        }
    }

    /// Orthogonal pilots needed, `pi lambda R_I^2`.
    pub fn pilot_count(&self, density: f64) -> f64 {
        PI * density * self.interference_radius * self.interference_radius
    }
}

/// Bisection steps of [`min_pilot_reuse`].
pub const PILOT_BISECTION_STEPS: usize = 12;
const PILOT_SEARCH_FLOOR: f64 = 1e-6;

/// Largest reuse factor for which the co-pilot interference-to-noise ratio
/// at the correct beam pair stays below `epsilon1` with probability at least
/// `1 - epsilon2`. The search bisects `log(delta)` on `[1e-6, 1]` with the same
/// drops at every probe. If even the floor fails, returns 1 with
/// `attained = false`.
pub fn min_pilot_reuse(cfg: &ScenarioConfig, n_drops: usize, seed: u64) -> Result<PilotReuseMin> {
    let ctx = PointContext::new(cfg)?;
    // per drop: co-pilot uniforms sorted ascending with the running INR
    let profiles: Vec<(Vec<f64>, Vec<f64>)> = DropSet::new(cfg, n_drops.max(1), seed, u64::MAX).map(|d| {
        let scene = ctx.scene(d);
        let (m0, n0) = ideal_beams(&scene, &ctx.narrow);
        let mut terms: Vec<(f64, f64)> = Vec::new();
        for l in 0..d.links.n_bs() {
            if l == scene.serving {
                continue;
            }
            let mut inr = 0.0;
            for ray in d.links.rays_of(l) {
                let g_ms = ctx.narrow.ms.gain_unchecked(m0, ray.aoa);
                if g_ms == 0.0 {
                    continue;
                }
                let g_bs = match cfg.training_interference {
                    TrainingInterference::RandomBeam => ctx.narrow.bs.gain_unchecked(d.train_beams[l], ray.aod),
                    TrainingInterference::Sweep => ctx.narrow.bs.gain_unchecked(n0, ray.aod),
                };
                inr += ray.power(cfg.tx_power) * g_ms * g_bs / cfg.noise_power;
            }
            if inr > 0.0 {
                terms.push((d.pilot_u[l], inr));
            }
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let (u, cum) = terms
            .into_iter()
            .map(|(u, v)| {
                acc += v;
                (u, acc)
            })
            .unzip();
        Ok((u, cum))
    })?;
    let meets = |delta: f64| -> bool {
        let ok = profiles
            .iter()
            .filter(|(u, cum)| {
                let k = u.partition_point(|&x| x < delta);
                k == 0 || cum[k - 1] < cfg.epsilon1
            })
            .count();
        ok as f64 >= (1.0 - cfg.epsilon2) * profiles.len() as f64
    };
    if meets(1.0) {
        return Ok(PilotReuseMin::new(1.0, cfg.bs_density, true));
    }
    if !meets(PILOT_SEARCH_FLOOR) {
        return Ok(PilotReuseMin::new(1.0, cfg.bs_density, false));
    }
    let (mut lo, mut hi) = (PILOT_SEARCH_FLOOR, 1.0f64);
    for _ in 0..PILOT_BISECTION_STEPS {
        let mid = (lo * hi).sqrt();
        if meets(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(PilotReuseMin::new(lo, cfg.bs_density, true))
}

/// Reuse factor of the near-orthogonal mode: from a configured interference
/// radius when present, otherwise from [`min_pilot_reuse`].
pub fn near_orth_reuse(cfg: &ScenarioConfig, n_drops: usize, seed: u64) -> Result<PilotReuseMin> {
    match cfg.interference_radius {
        Some(r) => {
            let delta = (1.0 / (PI * cfg.bs_density * r * r)).min(1.0);
            Ok(PilotReuseMin::new(delta, cfg.bs_density, true))
        }
        None => min_pilot_reuse(cfg, n_drops, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::quad::integrate_to_inf;

    #[test]
    fn gamma_pdf_values() {
        assert_eq!(gamma_pdf(0.0, 1), 1.0);
        assert!((gamma_pdf(1.0, 2) - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
        for n in [1, 2, 3, 5] {
            let s = integrate_to_inf(|g| gamma_pdf(g, n), 0.0, 1.0, Tolerance::new(1e-12, 1e-12)).unwrap();
            assert!((s - 1.0).abs() < 1e-8, "{n}: {s}");
        }
    }

    #[test]
    fn alzer_values() {
        assert_eq!(alzer_f(3, 0.0), 0.0);
        assert!((alzer_f(1, 1.0) - 0.5).abs() < 1e-15);
        assert!((alzer_f(2, 1e9) - 1.0).abs() < 1e-8);
        assert!((alzer_f(3, 1e-5) - (1.0 - (1.0f64 + 1e-5).powi(-3))).abs() < 1e-15);
        assert_eq!(alzer_a(1), 1.0);
        assert!((alzer_a(2) - 2f64.sqrt()).abs() < 1e-14);
        assert!((alzer_a(10) - 2.208_125_213).abs() < 1e-8);
        assert_eq!(binomial(10, 3), 120.0);
    }

    #[test]
    fn cumulative_series_matches_closed_form() {
        let cfg = ScenarioConfig::default();
        let m = AnalyticModel::new(&cfg).unwrap();
        for r in [0.5, 2.0, 4.9, 5.1, 20.0] {
            let z: f64 = r / cfg.los_range;
            let closed = cfg.los_range.powi(2) * (1.0 - (-z).exp() * (1.0 + z));
            assert!((m.cumulative(Tier::Los, r) - closed).abs() <= 1e-9 * closed, "{r}");
        }
    }

    #[test]
    fn blockage_limits() {
        let mut cfg = ScenarioConfig::default();
        cfg.los_range = 1e6 * cfg.cell_radius();
        let (al, _) = association_probs(&cfg).unwrap();
        assert!((al - 1.0).abs() < 1e-3);
        cfg.los_range = 1e-3 * ScenarioConfig::default().cell_radius();
        let (_, an) = association_probs(&cfg).unwrap();
        assert!((an - 1.0).abs() < 1e-3);
    }
}
