//! Beam codebooks and beamforming gains.
//!
//! Two pattern families are provided. The sectored model has a flat main
//! lobe of gain `G` over `[start, start + width)` and a flat side lobe `g`
//! elsewhere, with `G` and `g` tied to the beamwidth by the front-to-back
//! model `gamma = 2 pi / (C0 (2 pi - width))`. The ULA model is a
//! half-wavelength uniform linear array with beamsteering weights.

use std::f64::consts::{PI, TAU};
use std::ops::Range;

use num_complex::Complex64;

use crate::config::{AntennaModel, ScenarioConfig};
use crate::error::{Error, Result};

/// Angles this close to a sector boundary are treated as lying on it.
const BOUNDARY_SNAP: f64 = 1e-12;

/// Main and side lobe gains `(G, g)` of a sectored beam of the given width.
///
/// Satisfies `G w / 2 pi + g (2 pi - w) / 2 pi = 1`.
pub fn sectored_gains(beamwidth: f64, front_to_back_constant: f64) -> (f64, f64) {
    let rest = TAU - beamwidth;
    let gamma = TAU / (front_to_back_constant * rest);
    let main = TAU / beamwidth * gamma / (gamma + 1.0);
    let side = TAU / rest / (gamma + 1.0);
    (main, side)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectoredCodebook {
    pub n_beams: usize,
    pub beamwidth: f64,
    pub main_gain: f64,
    pub side_gain: f64,
    /// Start of the main lobe of beam 0.
    pub reference: f64,
}

impl SectoredCodebook {
    /// Start of beam `n`'s main lobe, wrapped to `[0, 2 pi)`.
    pub fn sector_start(&self, n: usize) -> f64 {
        (self.reference + n as f64 * self.beamwidth).rem_euclid(TAU)
    }

    /// Beam whose main lobe contains `angle` (half-open sectors).
    pub fn beam_of(&self, angle: f64) -> usize {
        let rel = (angle - self.reference).rem_euclid(TAU);
        let pos = rel / self.beamwidth;
        let nearest = pos.round();
        let k = if (pos - nearest).abs() * self.beamwidth < BOUNDARY_SNAP {
            nearest
        } else {
            pos.floor()
        };
        (k as usize) % self.n_beams
    }

    pub fn contains(&self, n: usize, angle: f64) -> bool {
        self.beam_of(angle) == n
    }

    fn gain_unchecked(&self, n: usize, angle: f64) -> f64 {
        if self.beam_of(angle) == n {
            self.main_gain
        } else {
            self.side_gain
        }
    }
}

/// Codebook of `n_beams` non-overlapping sectors covering `[0, 2 pi)`.
pub fn build_sectored(n_beams: usize, front_to_back_constant: f64, reference: f64) -> Result<SectoredCodebook> {
    if n_beams < 2 {
        return Err(Error::TooFewBeams(n_beams));
    }
    if !(front_to_back_constant > 0.0) {
        return Err(Error::field("front_to_back_constant", "must be positive"));
    }
    let beamwidth = TAU / n_beams as f64;
    let (main_gain, side_gain) = sectored_gains(beamwidth, front_to_back_constant);
    Ok(SectoredCodebook {
        n_beams,
        beamwidth,
        main_gain,
        side_gain,
        reference: reference.rem_euclid(TAU),
    })
}

/// MS combiner codebook: side lobes neglected. A single beam is the omni pattern.
pub fn build_ms_sectored(n_beams: usize, front_to_back_constant: f64) -> Result<SectoredCodebook> {
    if n_beams == 1 {
        return Ok(SectoredCodebook {
            n_beams: 1,
            beamwidth: TAU,
            main_gain: 1.0,
            side_gain: 0.0,
            reference: 0.0,
        });
    }
    let mut cb = build_sectored(n_beams, front_to_back_constant, 0.0)?;
    cb.side_gain = 0.0;
    Ok(cb)
}

/// Unnormalized half-wavelength ULA response, `exp(i pi k sin(angle))`.
pub fn ula_response(n_antennas: usize, angle: f64) -> Vec<Complex64> {
    let s = PI * angle.sin();
    (0..n_antennas)
        .map(|k| Complex64::from_polar(1.0, s * k as f64))
        .collect()
}

/// `|w^H a(angle)|^2` for unit-norm `w`; equals `n_antennas` when `w` is matched.
pub fn ula_gain(weights: &[Complex64], angle: f64) -> f64 {
    let s = PI * angle.sin();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, w) in weights.iter().enumerate() {
        acc += w.conj() * Complex64::from_polar(1.0, s * k as f64);
    }
    acc.norm_sqr()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UlaCodebook {
    pub n_antennas: usize,
    pub steering_angles: Vec<f64>,
    pub weights: Vec<Vec<Complex64>>,
}

/// Beamsteering codebook with `n_beams` directions uniform in `sin(angle)`.
pub fn build_ula(n_antennas: usize, n_beams: usize) -> UlaCodebook {
    let steering_angles: Vec<f64> = (0..n_beams)
        .map(|n| (-1.0 + (2 * n + 1) as f64 / n_beams as f64).asin())
        .collect();
    let norm = 1.0 / (n_antennas as f64).sqrt();
    let weights = steering_angles
        .iter()
        .map(|&a| ula_response(n_antennas, a).into_iter().map(|x| x * norm).collect())
        .collect();
    UlaCodebook {
        n_antennas,
        steering_angles,
        weights,
    }
}

/// Gain profile of one codebook toward one direction, across all beams.
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    /// `main` on `beam`, `side` on every other beam.
    Sector {
        beam: usize,
        main: f64,
        side: f64,
    },
    Dense(Vec<f64>),
}

impl Pattern {
    pub fn get(&self, n: usize) -> f64 {
        match self {
            Pattern::Sector { beam, main, side } => {
                if *beam == n {
                    *main
                } else {
                    *side
                }
            }
            Pattern::Dense(v) => v[n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Codebook {
    Sectored(SectoredCodebook),
    Ula(UlaCodebook),
}

impl Codebook {
    pub fn n_beams(&self) -> usize {
        match self {
            Codebook::Sectored(c) => c.n_beams,
            Codebook::Ula(c) => c.weights.len(),
        }
    }

    /// Best-covering beam for a direction: the containing sector, or the
    /// highest-gain ULA beam (lowest index on ties).
    pub fn beam_of(&self, angle: f64) -> usize {
        match self {
            Codebook::Sectored(c) => c.beam_of(angle),
            Codebook::Ula(c) => {
                let mut best = (0, f64::NEG_INFINITY);
                for (n, w) in c.weights.iter().enumerate() {
                    let g = ula_gain(w, angle);
                    if g > best.1 {
                        best = (n, g);
                    }
                }
                best.0
            }
        }
    }

    pub(crate) fn gain_unchecked(&self, n: usize, angle: f64) -> f64 {
        match self {
            Codebook::Sectored(c) => c.gain_unchecked(n, angle),
            Codebook::Ula(c) => ula_gain(&c.weights[n], angle),
        }
    }

    pub fn pattern(&self, angle: f64) -> Pattern {
        match self {
            Codebook::Sectored(c) => Pattern::Sector {
                beam: c.beam_of(angle),
                main: c.main_gain,
                side: c.side_gain,
            },
            Codebook::Ula(c) => Pattern::Dense(c.weights.iter().map(|w| ula_gain(w, angle)).collect()),
        }
    }

    /// Highest gain any beam can deliver in a matched direction.
    pub fn peak_gain(&self) -> f64 {
        match self {
            Codebook::Sectored(c) => c.main_gain,
            Codebook::Ula(c) => c.n_antennas as f64,
        }
    }
}

/// BS transmit and MS receive codebooks of one search stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebooks {
    pub bs: Codebook,
    pub ms: Codebook,
}

impl Codebooks {
    /// Codebooks of the given sizes under the scenario's antenna model.
    pub fn build(cfg: &ScenarioConfig, n_bs: usize, n_ms: usize) -> Result<Self> {
        Ok(match cfg.antenna_model {
            AntennaModel::Sectored => Codebooks {
                bs: Codebook::Sectored(build_sectored(n_bs, cfg.front_to_back_constant, 0.0)?),
                ms: Codebook::Sectored(build_ms_sectored(n_ms, cfg.front_to_back_constant)?),
            },
            AntennaModel::Ula => Codebooks {
                bs: Codebook::Ula(build_ula(n_bs, n_bs)),
                ms: Codebook::Ula(build_ula(n_ms, n_ms)),
            },
        })
    }

    pub fn narrow(cfg: &ScenarioConfig) -> Result<Self> {
        Self::build(cfg, cfg.n_bs_beams, cfg.n_ms_beams)
    }

    pub fn wide(cfg: &ScenarioConfig) -> Result<Self> {
        Self::build(cfg, cfg.n_bs_wide, cfg.n_ms_wide)
    }
}

/// Gain of beam `n` toward `angle` (wrapped mod 2 pi).
pub fn effective_gain(codebook: &Codebook, n: usize, angle: f64) -> Result<f64> {
    if n >= codebook.n_beams() {
        return Err(Error::BeamIndex {
            index: n,
            n_beams: codebook.n_beams(),
        });
    }
    Ok(codebook.gain_unchecked(n, angle))
}

/// Narrow beams refining wide beam `k` when the narrow codebook nests `narrow / wide` beams per wide beam.
pub fn child_beams(k: usize, wide: usize, narrow: usize) -> Result<Range<usize>> {
    if wide == 0 || !narrow.is_multiple_of(wide) {
        return Err(Error::NotNested { wide, narrow });
    }
    if k >= wide {
        return Err(Error::BeamIndex {
            index: k,
            n_beams: wide,
        });
    }
    let r = narrow / wide;
    Ok(k * r..(k + 1) * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cb(n: usize) -> SectoredCodebook {
        build_sectored(n, 0.1, 0.3).unwrap()
    }

    #[test]
    fn omni_limit() {
        let (g_main, g_side) = sectored_gains(TAU - 1e-6, 0.1);
        assert!((g_main - 1.0).abs() < 1e-4);
        assert!(g_side * 1e-6 < 1e-4);
    }

    #[test]
    fn sixty_four_beams() {
        let c = cb(64);
        let theta = TAU / 64.0;
        let gamma = TAU / (0.1 * (TAU - theta));
        assert!((c.main_gain - 64.0 * gamma / (gamma + 1.0)).abs() < 1e-12);
        let total = c.main_gain * theta / TAU + c.side_gain * (TAU - theta) / TAU;
        assert!((total - 1.0).abs() < 1e-12);
        assert!(c.main_gain > c.side_gain && c.side_gain > 0.0);
    }

    #[test]
    fn ms_side_lobe_zero() {
        let ms = build_ms_sectored(8, 0.1).unwrap();
        assert_eq!(ms.side_gain, 0.0);
        let omni = build_ms_sectored(1, 0.1).unwrap();
        assert_eq!(omni.main_gain, 1.0);
        assert_eq!(omni.beam_of(4.0), 0);
        assert!(matches!(build_sectored(1, 0.1, 0.0), Err(Error::TooFewBeams(1))));
    }

    #[test]
    fn gain_in_and_out_of_sector() {
        let c = cb(8);
        let book = Codebook::Sectored(c.clone());
        for n in 0..8 {
            let centre = c.sector_start(n) + c.beamwidth / 2.0;
            assert_eq!(effective_gain(&book, n, centre).unwrap(), c.main_gain);
            assert_eq!(effective_gain(&book, n, centre + PI).unwrap(), c.side_gain);
            assert_eq!(effective_gain(&book, n, c.sector_start(n)).unwrap(), c.main_gain);
            assert_eq!(c.beam_of(c.sector_start(n) + c.beamwidth), (n + 1) % 8);
            // wrapping
            assert_eq!(effective_gain(&book, n, centre + 3.0 * TAU).unwrap(), c.main_gain);
        }
        assert!(matches!(
            effective_gain(&book, 8, 0.0),
            Err(Error::BeamIndex { index: 8, .. })
        ));
    }

    #[test]
    fn sectors_tile_the_circle() {
        // each angle is claimed by exactly one beam; coverage adds to 2 pi
        let c = cb(12);
        let k = 10_000;
        let mut claimed = [0usize; 12];
        for i in 0..k {
            let a = TAU * i as f64 / k as f64;
            let owners = (0..12).filter(|&n| c.contains(n, a)).count();
            assert_eq!(owners, 1);
            claimed[c.beam_of(a)] += 1;
        }
        let covered: f64 = claimed.iter().map(|&m| m as f64 / k as f64 * TAU).sum();
        assert!((covered - TAU).abs() < 1e-9);
        assert!(claimed.iter().all(|&m| (m as i64 - (k / 12) as i64).abs() <= 1));
    }

    #[test]
    fn angular_integral_is_two_pi() {
        for n in [2usize, 3, 8, 64] {
            let c = cb(n);
            let book = Codebook::Sectored(c.clone());
            let k = 64 * 1024;
            for beam in [0, n - 1] {
                let s: f64 = (0..k)
                    .map(|i| effective_gain(&book, beam, TAU * (i as f64 + 0.5) / k as f64).unwrap())
                    .sum::<f64>()
                    * TAU
                    / k as f64;
                assert!((s - TAU).abs() < 1e-3 * TAU, "n={n}: {s}");
            }
        }
    }

    #[test]
    fn main_gain_decreases_with_width() {
        let mut prev = f64::INFINITY;
        for i in 1..=200 {
            let w = PI * i as f64 / 200.0;
            let (g, _) = sectored_gains(w, 0.1);
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn ula_examples() {
        let n = 16;
        let phi0 = 0.4;
        let w: Vec<Complex64> = ula_response(n, phi0)
            .into_iter()
            .map(|x| x / (n as f64).sqrt())
            .collect();
        assert!((ula_gain(&w, phi0) - n as f64).abs() < 1e-9);

        let single = vec![Complex64::new(1.0, 0.0)];
        for a in [0.0, 1.0, 2.5, -3.0] {
            assert!((ula_gain(&single, a) - 1.0).abs() < 1e-12);
        }

        let w0: Vec<Complex64> = ula_response(n, 0.0)
            .into_iter()
            .map(|x| x / (n as f64).sqrt())
            .collect();
        let null = (2.0 / n as f64).asin();
        assert!(ula_gain(&w0, null) < 1e-20);
    }

    #[test]
    fn ula_weights_unit_norm_and_energy() {
        let book = build_ula(8, 8);
        for w in &book.weights {
            let norm: f64 = w.iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        // a complete steering codebook is an orthonormal basis, so the gain
        // summed over beams is N at every angle
        let m = 4096;
        let mean = (0..m)
            .map(|i| {
                let a = TAU * i as f64 / m as f64;
                book.weights.iter().map(|w| ula_gain(w, a)).sum::<f64>() / 8.0
            })
            .sum::<f64>()
            / m as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn children_nest() {
        assert_eq!(child_beams(2, 8, 64).unwrap(), 16..24);
        assert!(matches!(child_beams(0, 6, 64), Err(Error::NotNested { .. })));
        let wide = cb(8);
        let narrow = cb(64);
        for i in 0..1000 {
            let a = TAU * i as f64 / 1000.0;
            let k = wide.beam_of(a);
            assert!(child_beams(k, 8, 64).unwrap().contains(&narrow.beam_of(a)));
        }
    }
}
