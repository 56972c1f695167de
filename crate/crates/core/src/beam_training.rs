//! Initial beam association: pilot reuse thinning, the control SNR surface
//! and the exhaustive and hierarchical sweeps.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::{child_beams, effective_gain, Codebook, Codebooks, Pattern};
use crate::channel::LinkSet;
use crate::config::{ScenarioConfig, TrainingInterference};
use crate::error::Result;
use crate::geometry::NetworkRealization;

/// Which BSs share the serving BS's control pilot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotPartition {
    copilot: Vec<bool>,
}

impl PilotPartition {
    /// Every BS reuses the pilot.
    pub fn full(n_bs: usize) -> Self {
        Self {
            copilot: vec![true; n_bs],
        }
    }

    /// BS `l` is co-pilot when `u[l] < reuse`; the serving BS always is.
    /// Sharing `u` across reuse factors makes the co-pilot sets nested.
    pub fn from_uniforms(u: &[f64], serving: usize, reuse: f64) -> Self {
        let mut copilot: Vec<bool> = u.iter().map(|&x| x < reuse).collect();
        copilot[serving] = true;
        Self { copilot }
    }

    pub fn len(&self) -> usize {
        self.copilot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copilot.is_empty()
    }

    pub fn is_copilot(&self, l: usize) -> bool {
        self.copilot[l]
    }

    pub fn copilot_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&l| self.copilot[l]).collect()
    }

    pub fn orthogonal_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&l| !self.copilot[l]).collect()
    }
}

/// Independent Bernoulli(`reuse`) co-pilot membership for each non-serving BS.
pub fn thin_copilot<R: Rng + ?Sized>(net: &NetworkRealization, reuse: f64, rng: &mut R) -> PilotPartition {
    let u: Vec<f64> = (0..net.len()).map(|_| rng.random::<f64>()).collect();
    let serving = net.serving.expect("network has a serving BS");
    PilotPartition::from_uniforms(&u, serving, reuse)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Both BS and MS beams are the ones the serving link alone would pick.
    Obp,
    /// Only the MS beam is right.
    Sbp,
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeamDecision {
    pub bs_beam: usize,
    pub ms_beam: usize,
    pub alignment: Alignment,
}

/// The per-drop quantities the beam search sees.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub links: &'a LinkSet,
    pub serving: usize,
    /// Beam each BS transmits data on, indexing `data_book`.
    pub data_beams: &'a [usize],
    pub data_book: &'a Codebook,
}

/// Control SNR of every (MS beam, BS beam) pair: `base[m] + cells[m][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSurface {
    pub n_ms: usize,
    pub n_bs: usize,
    base: Vec<f64>,
    cells: Vec<f64>,
}

enum BsTerm<'p> {
    Pattern(&'p Pattern),
    Constant(f64),
}

impl SnrSurface {
    fn zeros(n_ms: usize, n_bs: usize) -> Self {
        Self {
            n_ms,
            n_bs,
            base: vec![0.0; n_ms],
            cells: vec![0.0; n_ms * n_bs],
        }
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.base[m] + self.cells[m * self.n_bs + n]
    }

    fn add(&mut self, power: f64, ms: &Pattern, bs: BsTerm) {
        let rows: Box<dyn Iterator<Item = (usize, f64)>> = match ms {
            Pattern::Sector { beam, main, side } if *side == 0.0 => Box::new(std::iter::once((*beam, *main))),
            _ => Box::new((0..self.n_ms).map(|m| (m, ms.get(m)))),
        };
        for (m, w) in rows {
            if w == 0.0 {
                continue;
            }
            let p = power * w;
            match &bs {
                BsTerm::Constant(c) => self.base[m] += p * c,
                BsTerm::Pattern(Pattern::Sector { beam, main, side }) => {
                    self.base[m] += p * side;
                    self.cells[m * self.n_bs + beam] += p * (main - side);
                }
                BsTerm::Pattern(Pattern::Dense(v)) => {
                    let row = &mut self.cells[m * self.n_bs..(m + 1) * self.n_bs];
                    for (c, g) in row.iter_mut().zip(v) {
                        *c += p * g;
                    }
                }
            }
        }
    }

    /// Largest entry over the given ranges, lowest `m` then lowest `n` on ties.
    /// `None` when every entry is zero.
    pub fn argmax_in(&self, ms: Range<usize>, bs: Range<usize>) -> Option<(usize, usize)> {
        let mut best = None;
        let mut best_v = 0.0;
        for m in ms {
            for n in bs.clone() {
                let v = self.get(m, n);
                if v > best_v {
                    best_v = v;
                    best = Some((m, n));
                }
            }
        }
        best
    }

    pub fn argmax(&self) -> Option<(usize, usize)> {
        self.argmax_in(0..self.n_ms, 0..self.n_bs)
    }
}

fn accumulate_bs(
    surface: &mut SnrSurface,
    scene: &Scene,
    l: usize,
    books: &Codebooks,
    model: TrainingInterference,
    scale: f64,
) {
    let sweeping = l == scene.serving || model == TrainingInterference::Sweep;
    for ray in scene.links.rays_of(l) {
        let ms = books.ms.pattern(ray.aoa);
        if sweeping {
            let bs = books.bs.pattern(ray.aod);
            surface.add(ray.power(scale), &ms, BsTerm::Pattern(&bs));
        } else {
            let g = scene.data_book.gain_unchecked(scene.data_beams[l], ray.aod);
            surface.add(ray.power(scale), &ms, BsTerm::Constant(g));
        }
    }
}

/// Control SNR over all beam pairs. The serving BS sweeps its codebook; the
/// other co-pilot BSs either sweep too or keep their data beam, per
/// `cfg.training_interference`. Orthogonal-pilot BSs are invisible.
pub fn snr_surface(scene: &Scene, partition: &PilotPartition, books: &Codebooks, cfg: &ScenarioConfig) -> SnrSurface {
    let mut s = SnrSurface::zeros(books.ms.n_beams(), books.bs.n_beams());
    let scale = cfg.tx_power / cfg.noise_power;
    for l in 0..scene.links.n_bs() {
        if partition.is_copilot(l) {
            accumulate_bs(&mut s, scene, l, books, cfg.training_interference, scale);
        }
    }
    s
}

/// Control SNR of one beam pair, summed term by term.
pub fn control_snr(
    m: usize,
    n: usize,
    scene: &Scene,
    partition: &PilotPartition,
    books: &Codebooks,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for l in 0..scene.links.n_bs() {
        if !partition.is_copilot(l) {
            continue;
        }
        let sweeping = l == scene.serving || cfg.training_interference == TrainingInterference::Sweep;
        for ray in scene.links.rays_of(l) {
            let g_ms = effective_gain(&books.ms, m, ray.aoa)?;
            let g_bs = if sweeping {
                effective_gain(&books.bs, n, ray.aod)?
            } else {
                effective_gain(scene.data_book, scene.data_beams[l], ray.aod)?
            };
            total += cfg.tx_power * ray.fading * ray.mean_power * g_ms * g_bs;
        }
    }
    Ok(total / cfg.noise_power)
}

/// Beam pair the serving link alone would select.
pub fn ideal_beams(scene: &Scene, books: &Codebooks) -> (usize, usize) {
    let mut s = SnrSurface::zeros(books.ms.n_beams(), books.bs.n_beams());
    accumulate_bs(&mut s, scene, scene.serving, books, TrainingInterference::Sweep, 1.0);
    s.argmax().unwrap_or((0, 0))
}

pub fn classify(scene: &Scene, books: &Codebooks, bs_beam: usize, ms_beam: usize) -> Alignment {
    let (m0, n0) = ideal_beams(scene, books);
    if ms_beam != m0 {
        Alignment::Miss
    } else if bs_beam != n0 {
        Alignment::Sbp
    } else {
        Alignment::Obp
    }
}

/// Perfect beam alignment: the serving link's own best pair.
pub fn perfect_alignment(scene: &Scene, books: &Codebooks) -> BeamDecision {
    let (ms_beam, bs_beam) = ideal_beams(scene, books);
    BeamDecision {
        bs_beam,
        ms_beam,
        alignment: Alignment::Obp,
    }
}

fn decide(surface: &SnrSurface, ms: Range<usize>, bs: Range<usize>, scene: &Scene, books: &Codebooks) -> BeamDecision {
    match surface.argmax_in(ms, bs) {
        Some((ms_beam, bs_beam)) => BeamDecision {
            bs_beam,
            ms_beam,
            alignment: classify(scene, books, bs_beam, ms_beam),
        },
        None => BeamDecision {
            bs_beam: 0,
            ms_beam: 0,
            alignment: Alignment::Miss,
        },
    }
}

/// Pick the pair with the largest control SNR over the full codebooks.
pub fn exhaustive_sweep(
    scene: &Scene,
    partition: &PilotPartition,
    books: &Codebooks,
    cfg: &ScenarioConfig,
) -> BeamDecision {
    let s = snr_surface(scene, partition, books, cfg);
    decide(&s, 0..s.n_ms, 0..s.n_bs, scene, books)
}

/// Two-stage search: an exhaustive sweep over the wide codebooks, then a
/// sweep over the narrow children of the winning wide pair.
pub fn hierarchical_sweep(
    scene: &Scene,
    stage1: &PilotPartition,
    stage2: &PilotPartition,
    wide: &Codebooks,
    narrow: &Codebooks,
    cfg: &ScenarioConfig,
) -> Result<BeamDecision> {
    let (nw_bs, nw_ms) = (wide.bs.n_beams(), wide.ms.n_beams());
    let (nn_bs, nn_ms) = (narrow.bs.n_beams(), narrow.ms.n_beams());
    // validate nesting before looking at the channel
    child_beams(0, nw_bs, nn_bs)?;
    child_beams(0, nw_ms, nn_ms)?;
    let s1 = snr_surface(scene, stage1, wide, cfg);
    let (k_ms, k_bs) = s1.argmax().unwrap_or((0, 0));
    let s2 = snr_surface(scene, stage2, narrow, cfg);
    Ok(decide(
        &s2,
        child_beams(k_ms, nw_ms, nn_ms)?,
        child_beams(k_bs, nw_bs, nn_bs)?,
        scene,
        narrow,
    ))
}
