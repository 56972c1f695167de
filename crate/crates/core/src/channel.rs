//! Small-scale fading and angles of the links from every BS to the typical user.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::config::{ChannelModel, ScenarioConfig};
use crate::error::Result;
use crate::geometry::{path_loss, BsPoint};

/// Unit-mean Gamma(N, 1/N) power gain (Nakagami-m amplitude squared).
pub fn sample_fading<R: Rng + ?Sized>(nakagami: u32, rng: &mut R) -> f64 {
    let n = f64::from(nakagami.max(1));
    Gamma::new(n, 1.0 / n)
        .expect("shape and scale are positive")
        .sample(rng)
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    TAU * rng.random::<f64>()
}

/// Single-path link between BS `bs_index` and the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub bs_index: usize,
    pub fading: f64,
    /// Angle of departure in the BS's own frame.
    pub aod: f64,
    /// Angle of arrival in the user's frame.
    pub aoa: f64,
    /// Mean path gain `C r^-alpha`.
    pub path_loss: f64,
    pub is_los: bool,
}

impl Link {
    pub fn received_power(&self, tx_power: f64, bs_gain: f64, ms_gain: f64) -> f64 {
        tx_power * self.fading * self.path_loss * bs_gain * ms_gain
    }
}

pub fn sample_link<R: Rng + ?Sized>(bs_index: usize, bs: &BsPoint, cfg: &ScenarioConfig, rng: &mut R) -> Result<Link> {
    let path_loss = path_loss(bs.distance, bs.is_los, cfg)?;
    let nakagami = if bs.is_los { cfg.nakagami_los } else { cfg.nakagami_nlos };
    Ok(Link {
        bs_index,
        fading: sample_fading(nakagami, rng),
        aod: uniform_angle(rng),
        aoa: uniform_angle(rng),
        path_loss,
        is_los: bs.is_los,
    })
}

/// One ray of a clustered channel. `mean_power` already includes the cluster's
/// share of the BS's path gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub fading: f64,
    pub aod: f64,
    pub aoa: f64,
    pub mean_power: f64,
    pub is_los: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipathLink {
    pub bs_index: usize,
    /// Mean path gain of the whole link; the cluster mean powers sum to it.
    pub path_loss: f64,
    pub clusters: Vec<Cluster>,
}

/// Clustered link: independent angles and fading per cluster. The first
/// cluster inherits the BS's LOS state, later clusters are NLOS.
pub fn sample_multipath<R: Rng + ?Sized>(
    bs_index: usize,
    bs: &BsPoint,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<MultipathLink> {
    let path_loss = path_loss(bs.distance, bs.is_los, cfg)?;
    let clusters = cfg
        .cluster_fractions()
        .iter()
        .enumerate()
        .map(|(k, &frac)| {
            let is_los = k == 0 && bs.is_los;
            let nakagami = if is_los { cfg.nakagami_los } else { cfg.nakagami_nlos };
            Cluster {
                fading: sample_fading(nakagami, rng),
                aod: uniform_angle(rng),
                aoa: uniform_angle(rng),
                mean_power: frac * path_loss,
                is_los,
            }
        })
        .collect();
    Ok(MultipathLink {
        bs_index,
        path_loss,
        clusters,
    })
}

/// One propagation path as seen by the beam search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub bs: usize,
    pub fading: f64,
    pub aod: f64,
    pub aoa: f64,
    pub mean_power: f64,
}

impl Ray {
    pub fn power(&self, tx_power: f64) -> f64 {
        tx_power * self.fading * self.mean_power
    }
}

/// Rays of every BS in one drop, grouped by BS (`offsets[l]..offsets[l + 1]`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkSet {
    pub rays: Vec<Ray>,
    pub offsets: Vec<usize>,
}

impl LinkSet {
    pub fn n_bs(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn rays_of(&self, bs: usize) -> &[Ray] {
        &self.rays[self.offsets[bs]..self.offsets[bs + 1]]
    }

    pub fn from_links(links: &[Link]) -> Self {
        let mut set = LinkSet {
            rays: Vec::with_capacity(links.len()),
            offsets: vec![0],
        };
        for l in links {
            set.rays.push(Ray {
                bs: l.bs_index,
                fading: l.fading,
                aod: l.aod,
                aoa: l.aoa,
                mean_power: l.path_loss,
            });
            set.offsets.push(set.rays.len());
        }
        set
    }
}

/// Sample the links of every BS under the configured channel model.
pub fn sample_links<R: Rng + ?Sized>(bs: &[BsPoint], cfg: &ScenarioConfig, rng: &mut R) -> Result<LinkSet> {
    let mut set = LinkSet {
        rays: Vec::with_capacity(bs.len()),
        offsets: Vec::with_capacity(bs.len() + 1),
    };
    set.offsets.push(0);
    for (l, b) in bs.iter().enumerate() {
        match cfg.channel_model {
            ChannelModel::SinglePath => {
                let link = sample_link(l, b, cfg, rng)?;
                set.rays.push(Ray {
                    bs: l,
                    fading: link.fading,
                    aod: link.aod,
                    aoa: link.aoa,
                    mean_power: link.path_loss,
                });
            }
            ChannelModel::Multipath => {
                let link = sample_multipath(l, b, cfg, rng)?;
                set.rays.extend(link.clusters.iter().map(|c| Ray {
                    bs: l,
                    fading: c.fading,
                    aod: c.aod,
                    aoa: c.aoa,
                    mean_power: c.mean_power,
                }));
            }
        }
        set.offsets.push(set.rays.len());
    }
    Ok(set)
}
