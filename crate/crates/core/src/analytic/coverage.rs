//! Interference Laplace functionals and the coverage expressions built on them.

use rayon::prelude::*;

use super::quad::{compensated_sum, integrate_vec_to_inf};
use super::{alzer_a, alzer_f, binomial, gamma_pdf, AnalyticModel, QuadratureSpec};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::Tier;
use crate::metrics::{check_ascending, CoverageCurve, Provenance};

/// Beyond this value `exp(-upsilon)` is treated as zero.
const UPSILON_CUTOFF: f64 = 60.0;
const TABLE_PER_DECADE: f64 = 16.0;
const TABLE_CHUNK: usize = 32;
const TABLE_MAX_POINTS: usize = 2048;

/// Cubic interpolation of `ln upsilon` in `ln s`.
struct UpsilonTable {
    ln_s0: f64,
    step: f64,
    ln_values: Vec<f64>,
    first: f64,
    last: f64,
}

impl UpsilonTable {
    fn new(ln_s0: f64, step: f64, values: Vec<f64>) -> Self {
        Self {
            ln_s0,
            step,
            first: values[0],
            last: values[values.len() - 1],
            // floor keeps the log finite if the smallest entries underflow
            ln_values: values.iter().map(|v| v.max(1e-300).ln()).collect(),
        }
    }

    fn eval(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 0.0;
        }
        let p = (s.ln() - self.ln_s0) / self.step;
        let n = self.ln_values.len();
        if p <= 0.0 {
            // linear regime of the functional
            return self.first * (s / self.ln_s0.exp());
        }
        if p >= (n - 1) as f64 {
            return if self.last > UPSILON_CUTOFF {
                f64::INFINITY
            } else {
                self.last
            };
        }
        let i = (p.floor() as usize).clamp(1, n - 3);
        let t = p - i as f64;
        let [y0, y1, y2, y3] = [
            self.ln_values[i - 1],
            self.ln_values[i],
            self.ln_values[i + 1],
            self.ln_values[i + 2],
        ];
        // Lagrange cubic through nodes -1, 0, 1, 2
        let v = -y0 * t * (t - 1.0) * (t - 2.0) / 6.0 + y1 * (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
            - y2 * (t + 1.0) * t * (t - 2.0) / 2.0
            + y3 * (t + 1.0) * t * (t - 1.0) / 6.0;
        v.exp()
    }
}

/// `(-1)^(n+1) C(N, n)` for `n = 1..=N`.
fn alternating_coefficients(n_terms: u32) -> Vec<f64> {
    (1..=n_terms)
        .map(|n| if n % 2 == 1 { 1.0 } else { -1.0 } * binomial(n_terms, n))
        .collect()
}

impl AnalyticModel {
    /// `(b_k, G_k)`: an interferer points its main lobe at the user with
    /// probability `1 / N_BS`.
    fn beam_mixture(&self) -> [(f64, f64); 2] {
        let nb = self.n_bs as f64;
        [
            (1.0 / nb, self.bs_main * self.ms_main),
            ((nb - 1.0) / nb, self.bs_side * self.ms_main),
        ]
    }

    /// Density of interferers inside the user's receive sector.
    fn sector_density(&self) -> f64 {
        self.density / self.n_ms as f64
    }

    /// For every `s` in `s`, the log Laplace functional
    /// `2 pi lambda_m sum_k b_k int_lower^inf F(N, s C P G_k t^-alpha / N) w(t) t dt`
    /// of the tier-`interferer` interference beyond `lower`, where
    /// `lambda_m = lambda / N_MS`.
    pub(crate) fn upsilon_many(
        &self,
        s: &[f64],
        lower: f64,
        interferer: Tier,
        quad: &QuadratureSpec,
    ) -> Result<Vec<f64>> {
        let tier = *self.tier(interferer);
        let nf = f64::from(tier.nakagami);
        let mix = self.beam_mixture();
        let s_max = s.iter().cloned().fold(0.0, f64::max);
        if s_max == 0.0 {
            return Ok(vec![0.0; s.len()]);
        }
        let reach = (s_max * tier.intercept * self.tx_power * mix[0].1 / nf).powf(1.0 / tier.alpha);
        let scale = lower.max(reach.min(1e9)).max(1e-3);
        let coefs: Vec<[f64; 2]> = s
            .iter()
            .map(|&si| {
                [
                    si * tier.intercept * self.tx_power * mix[0].1 / nf,
                    si * tier.intercept * self.tx_power * mix[1].1 / nf,
                ]
            })
            .collect();
        let mut v = integrate_vec_to_inf(
            |t, out| {
                let w = self.weight(interferer, t) * t;
                if w == 0.0 {
                    return;
                }
                let ta = t.powf(-tier.alpha);
                for (o, c) in out.iter_mut().zip(&coefs) {
                    *o = w
                        * (mix[0].0 * alzer_f(tier.nakagami, c[0] * ta) + mix[1].0 * alzer_f(tier.nakagami, c[1] * ta));
                }
            },
            lower,
            scale,
            s.len(),
            quad.inner(),
        )?;
        let k = 2.0 * std::f64::consts::PI * self.sector_density();
        v.iter_mut().for_each(|x| *x *= k);
        Ok(v)
    }

    /// Received data power at distance `x` through matched beams, before fading.
    fn matched_power(&self, x: f64, serving: Tier) -> f64 {
        let t = self.tier(serving);
        self.tx_power * self.bs_main * self.ms_main * t.intercept * x.powf(-t.alpha)
    }

    /// Total log Laplace functional at a serving distance `x` as a function of
    /// `s`, tabulated on a log grid from `s_lo` until it exceeds
    /// [`UPSILON_CUTOFF`].
    fn upsilon_table(&self, x: f64, serving: Tier, s_lo: f64, quad: &QuadratureSpec) -> Result<UpsilonTable> {
        let psi = self.exclusion_radius(x, serving);
        let step = std::f64::consts::LN_10 / TABLE_PER_DECADE;
        let ln_s0 = s_lo.ln();
        let mut values: Vec<f64> = Vec::new();
        while values.last().is_none_or(|&v| v <= UPSILON_CUTOFF) {
            if values.len() >= TABLE_MAX_POINTS {
                return Err(Error::Quadrature(format!(
                    "interference functional still below cutoff at x = {x}"
                )));
            }
            let k0 = values.len();
            let s: Vec<f64> = (k0..k0 + TABLE_CHUNK)
                .map(|k| (ln_s0 + k as f64 * step).exp())
                .collect();
            let own = self.upsilon_many(&s, x, serving, quad)?;
            let other = self.upsilon_many(&s, psi, serving.other(), quad)?;
            values.extend(own.iter().zip(&other).map(|(a, b)| a + b));
        }
        Ok(UpsilonTable::new(ln_s0, step, values))
    }

    /// Upper-bound integrands for every truncation level `N = 1..=n_max`,
    /// already weighted by the association probability of `serving`.
    fn theorem1_tier(&self, thr: f64, serving: Tier, n_max: u32, quad: &QuadratureSpec) -> Result<Vec<f64>> {
        let own = *self.tier(serving);
        let mut base = Vec::new();
        let mut coef = Vec::new();
        for big_n in 1..=n_max {
            let a = alzer_a(big_n);
            base.extend((1..=big_n).map(|n| a * f64::from(n)));
            coef.push(alternating_coefficients(big_n));
        }
        let dim = n_max as usize;
        // fading beyond this point carries no mass
        let g_hi = 80.0 / f64::from(own.nakagami);
        let mut failure = None;
        let v = integrate_vec_to_inf(
            |x, out| {
                let assoc = self.association_integrand(x, serving);
                if assoc == 0.0 || failure.is_some() {
                    return;
                }
                let signal = self.matched_power(x, serving) / thr;
                let g_min = self.noise_power / signal;
                let s_lo = 1.0 / (signal * (g_min + g_hi) - self.noise_power);
                let table = match self.upsilon_table(x, serving, s_lo, quad) {
                    Ok(t) => t,
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                };
                let inner = integrate_vec_to_inf(
                    |g, gout| {
                        let tau = signal * g - self.noise_power;
                        if !(tau > 0.0) {
                            return;
                        }
                        let pdf = gamma_pdf(g, own.nakagami);
                        let mut offset = 0;
                        for (level, c) in coef.iter().enumerate() {
                            let sum = compensated_sum(
                                c.iter()
                                    .enumerate()
                                    .map(|(i, ci)| ci * (-table.eval(base[offset + i] / tau)).exp()),
                            );
                            gout[level] = pdf * sum;
                            offset += c.len();
                        }
                    },
                    g_min,
                    1.0,
                    dim,
                    quad.middle(),
                );
                match inner {
                    Ok(v) => {
                        for (o, vi) in out.iter_mut().zip(v) {
                            *o = assoc * vi;
                        }
                    }
                    Err(e) => failure = Some(e),
                }
            },
            0.0,
            self.cell_radius(),
            dim,
            quad.outer(),
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Upper bound for every truncation level `1..=n_max`.
    pub fn theorem1_levels(&self, thr: f64, n_max: u32, quad: &QuadratureSpec) -> Result<Vec<f64>> {
        let l = self.theorem1_tier(thr, Tier::Los, n_max, quad)?;
        let n = self.theorem1_tier(thr, Tier::Nlos, n_max, quad)?;
        Ok(l.iter().zip(&n).map(|(a, b)| a + b).collect())
    }

    /// `[A, int first-factor, int bracket-factor]` of the lower bound for one tier,
    /// the last two weighted by the association density.
    fn theorem2_tier(&self, thr: f64, serving: Tier, quad: &QuadratureSpec) -> Result<[f64; 3]> {
        let own = *self.tier(serving);
        let other = serving.other();
        let a = alzer_a(own.nakagami);
        let coef = alternating_coefficients(own.nakagami);
        let mut failure = None;
        let v = integrate_vec_to_inf(
            |x, out| {
                let assoc = self.association_integrand(x, serving);
                if assoc == 0.0 || failure.is_some() {
                    return;
                }
                let signal = self.matched_power(x, serving);
                let s: Vec<f64> = (1..=own.nakagami).map(|n| a * f64::from(n) * thr / signal).collect();
                let res = self.upsilon_many(&s, x, serving, quad).and_then(|u1| {
                    self.upsilon_many(&s, self.exclusion_radius(x, serving), other, quad)
                        .map(|u2| (u1, u2))
                });
                let (u1, u2) = match res {
                    Ok(v) => v,
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                };
                let first = compensated_sum(
                    coef.iter()
                        .enumerate()
                        .map(|(i, c)| c * (-s[i] * self.noise_power - u1[i] - u2[i]).exp()),
                );
                let bracket = compensated_sum(coef.iter().enumerate().map(|(i, c)| c * (-u1[i] - u2[i]).exp()));
                out[0] = assoc;
                out[1] = assoc * first;
                out[2] = assoc * bracket;
            },
            0.0,
            self.cell_radius(),
            3,
            quad.outer(),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok([v[0], v[1], v[2]])
    }

    /// `(lower bound, near-orthogonal coverage)` at one threshold.
    pub fn theorem2_and_near_orth(&self, thr: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
        let mut lower = 0.0;
        let mut near = 0.0;
        for tier in [Tier::Los, Tier::Nlos] {
            let [assoc, first, bracket] = self.theorem2_tier(thr, tier, quad)?;
            near += first;
            if assoc > 0.0 {
                lower += first * (bracket / assoc).powi(self.n_ms as i32 - 1);
            }
        }
        Ok((lower, near))
    }
}

fn check_threshold(thr: f64) -> Result<()> {
    if !(thr > 0.0) || thr.is_infinite() {
        return Err(Error::Invalid(format!(
            "threshold must be positive and finite, got {thr}"
        )));
    }
    Ok(())
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Log Laplace functional `j` (1..=4) of the upper bound at term `n` of an
/// `n_terms`-term alternating sum, for serving gain `g` at distance `x`.
/// Infinite when the threshold cannot be met over noise alone.
#[allow(clippy::too_many_arguments)]
pub fn upsilon(
    j: u8,
    n: u32,
    n_terms: u32,
    thr: f64,
    g: f64,
    x: f64,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let m = AnalyticModel::new(cfg)?;
    let (serving, interferer, lower) = match j {
        1 => (Tier::Los, Tier::Los, x),
        2 => (Tier::Los, Tier::Nlos, m.exclusion_radius(x, Tier::Los)),
        3 => (Tier::Nlos, Tier::Nlos, x),
        4 => (Tier::Nlos, Tier::Los, m.exclusion_radius(x, Tier::Nlos)),
        _ => return Err(Error::Invalid(format!("functional index must be 1..=4, got {j}"))),
    };
    let tau = m.matched_power(x, serving) * g / thr - m.noise_power;
    if !(tau > 0.0) {
        return Ok(f64::INFINITY);
    }
    let s = alzer_a(n_terms) * f64::from(n) / tau;
    Ok(m.upsilon_many(&[s], lower, interferer, quad)?[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Value {
    pub value: f64,
    /// Terms of the alternating sum actually used.
    pub terms: u32,
    /// False when the cap was reached before successive values settled.
    pub converged: bool,
    /// Values at every truncation level `1..=cap`.
    pub levels: Vec<f64>,
}

fn pick_level(levels: &[Vec<f64>], tol: f64) -> (u32, bool) {
    let cap = levels[0].len();
    for n in 2..=cap {
        if levels.iter().all(|l| (l[n - 1] - l[n - 2]).abs() < tol) {
            return (n as u32, true);
        }
    }
    (cap as u32, false)
}

pub fn theorem1_upper_detailed(thr: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<Theorem1Value> {
    check_threshold(thr)?;
    quad.validate()?;
    let m = AnalyticModel::new(cfg)?;
    let levels = m.theorem1_levels(thr, quad.alzer_cap as u32, quad)?;
    let (terms, converged) = pick_level(std::slice::from_ref(&levels), quad.alzer_tol);
    Ok(Theorem1Value {
        value: clamp_probability(levels[terms as usize - 1]),
        terms,
        converged,
        levels,
    })
}

pub fn theorem1_upper(thr: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<f64> {
    Ok(theorem1_upper_detailed(thr, cfg, quad)?.value)
}

pub fn theorem2_lower(thr: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<f64> {
    check_threshold(thr)?;
    Ok(clamp_probability(
        AnalyticModel::new(cfg)?.theorem2_and_near_orth(thr, quad)?.0,
    ))
}

/// Coverage with the serving link's beams and no co-pilot interference in training.
pub fn near_orth_coverage(thr: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<f64> {
    check_threshold(thr)?;
    Ok(clamp_probability(
        AnalyticModel::new(cfg)?.theorem2_and_near_orth(thr, quad)?.1,
    ))
}

/// Upper-bound curve with one truncation level for the whole grid, so the
/// curve is non-increasing. Returns the curve, the level and whether it settled.
pub fn theorem1_curve(grid: &[f64], cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<(CoverageCurve, u32, bool)> {
    check_ascending(grid)?;
    quad.validate()?;
    grid.iter().try_for_each(|&t| check_threshold(t))?;
    let m = AnalyticModel::new(cfg)?;
    let levels: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&t| m.theorem1_levels(t, quad.alzer_cap as u32, quad))
        .collect::<Result<_>>()?;
    let (terms, converged) = pick_level(&levels, quad.alzer_tol);
    let coverage = levels
        .iter()
        .map(|l| clamp_probability(l[terms as usize - 1]))
        .collect();
    Ok((
        CoverageCurve {
            thresholds: grid.to_vec(),
            coverage,
            provenance: Provenance::Thm1Ub,
        },
        terms,
        converged,
    ))
}

fn theorem2_pairs(grid: &[f64], cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    check_ascending(grid)?;
    grid.iter().try_for_each(|&t| check_threshold(t))?;
    let m = AnalyticModel::new(cfg)?;
    grid.par_iter().map(|&t| m.theorem2_and_near_orth(t, quad)).collect()
}

pub fn theorem2_curve(grid: &[f64], cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<CoverageCurve> {
    let pairs = theorem2_pairs(grid, cfg, quad)?;
    Ok(CoverageCurve {
        thresholds: grid.to_vec(),
        coverage: pairs.iter().map(|p| clamp_probability(p.0)).collect(),
        provenance: Provenance::Thm2Lb,
    })
}

pub fn near_orth_curve(grid: &[f64], cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<CoverageCurve> {
    let pairs = theorem2_pairs(grid, cfg, quad)?;
    Ok(CoverageCurve {
        thresholds: grid.to_vec(),
        coverage: pairs.iter().map(|p| clamp_probability(p.1)).collect(),
        provenance: Provenance::NearOrth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsilon_limits() {
        let q = QuadratureSpec::default();
        let mut cfg = ScenarioConfig::default();
        let r = cfg.cell_radius();
        for j in 1..=4 {
            let tiny = upsilon(j, 1, 2, 1e-12, 1.0, r, &cfg, &q).unwrap();
            assert!(tiny < 1e-6, "{j}: {tiny}");
        }
        cfg.bs_density = 1e-15;
        for j in 1..=4 {
            assert!(upsilon(j, 2, 2, 1.0, 1.0, r, &cfg, &q).unwrap() < 1e-9);
        }
        assert_eq!(
            upsilon(1, 1, 2, 1.0, 1e-30, r, &ScenarioConfig::default(), &q).unwrap(),
            f64::INFINITY
        );
    }
}
