//! BS point process, blockage, path loss and cell association for the
//! typical user at the origin.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsPoint {
    pub position: [f64; 2],
    /// Distance to the typical user, meters.
    pub distance: f64,
    pub is_los: bool,
    /// Array orientation in `[0, 2 pi)`; the reference of the BS's own AoDs.
    pub orientation: f64,
}

impl BsPoint {
    pub fn new(position: [f64; 2], is_los: bool, orientation: f64) -> Self {
        Self {
            position,
            distance: position[0].hypot(position[1]),
            is_los,
            orientation: orientation.rem_euclid(TAU),
        }
    }
}

/// One sampled network. `path_gain[l]` is the linear gain `C r^-alpha` of BS `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub bs: Vec<BsPoint>,
    pub path_gain: Vec<f64>,
    /// Minimum path-loss BS, `None` for an empty network.
    pub serving: Option<usize>,
}

impl NetworkRealization {
    /// Build from points, computing path gains and the serving BS.
    pub fn from_points(bs: Vec<BsPoint>, cfg: &ScenarioConfig) -> Result<Self> {
        let path_gain = bs
            .iter()
            .map(|b| path_loss(b.distance, b.is_los, cfg))
            .collect::<Result<Vec<_>>>()?;
        let serving = associate(&path_gain);
        Ok(Self { bs, path_gain, serving })
    }

    pub fn len(&self) -> usize {
        self.bs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bs.is_empty()
    }
}

/// Homogeneous PPP on a disc centred at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window_radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mean = density * PI * window_radius * window_radius;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    (0..count)
        .map(|_| {
            let r = window_radius * rng.random::<f64>().sqrt();
            let a = TAU * rng.random::<f64>();
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

pub fn los_probability(distance: f64, los_range: f64) -> f64 {
    (-distance / los_range).exp()
}

/// Independent Bernoulli blockage with `P(LOS) = exp(-r / mu)`.
pub fn assign_los<R: Rng + ?Sized>(points: &[[f64; 2]], los_range: f64, rng: &mut R) -> Vec<bool> {
    points
        .iter()
        .map(|p| rng.random::<f64>() < los_probability(p[0].hypot(p[1]), los_range))
        .collect()
}

/// Linear path gain `C r^-alpha` of the LOS or NLOS law.
pub fn path_loss(distance: f64, is_los: bool, cfg: &ScenarioConfig) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::NonPositiveDistance(distance));
    }
    Ok(if is_los {
        cfg.intercept_los * distance.powf(-cfg.alpha_los)
    } else {
        cfg.intercept_nlos * distance.powf(-cfg.alpha_nlos)
    })
}

/// Index of the largest path gain (smallest path loss); ties go to the lowest index.
pub fn associate(path_gain: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &g) in path_gain.iter().enumerate() {
        match best {
            Some((_, b)) if g <= b => {}
            _ => best = Some((i, g)),
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Los,
    Nlos,
}

impl Tier {
    pub fn of(is_los: bool) -> Self {
        if is_los {
            Tier::Los
        } else {
            Tier::Nlos
        }
    }

    pub fn other(self) -> Self {
        match self {
            Tier::Los => Tier::Nlos,
            Tier::Nlos => Tier::Los,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Los => "LOS",
            Tier::Nlos => "NLOS",
        }
    }
}

/// Closest distance at which a BS of the other tier has the same path gain
/// as a `serving`-tier BS at distance `x`.
///
/// For a LOS server this is `(C_N / C_L)^(1/alpha_N) x^(alpha_L/alpha_N)`;
/// the NLOS case swaps the roles.
pub fn exclusion_radius(x: f64, serving: Tier, cfg: &ScenarioConfig) -> f64 {
    let (c_own, a_own, c_other, a_other) = match serving {
        Tier::Los => (cfg.intercept_los, cfg.alpha_los, cfg.intercept_nlos, cfg.alpha_nlos),
        Tier::Nlos => (cfg.intercept_nlos, cfg.alpha_nlos, cfg.intercept_los, cfg.alpha_los),
    };
    (c_other / c_own).powf(1.0 / a_other) * x.powf(a_own / a_other)
}

/// Sample a non-empty network. Returns the realization and how many empty
/// windows were discarded before it.
pub fn sample_network<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> (NetworkRealization, u32) {
    let mut discarded = 0;
    loop {
        let points = sample_ppp(cfg.bs_density, cfg.sim_window_radius, rng);
        if points.is_empty() {
            discarded += 1;
            continue;
        }
        let los = assign_los(&points, cfg.los_range, rng);
        let bs: Vec<BsPoint> = points
            .iter()
            .zip(&los)
            .map(|(&p, &l)| BsPoint::new(p, l, TAU * rng.random::<f64>()))
            .collect();
        // a point exactly at the origin has probability zero
        if bs.iter().any(|b| b.distance <= 0.0) {
            discarded += 1;
            continue;
        }
        let net = NetworkRealization::from_points(bs, cfg).expect("distances are positive");
        return (net, discarded);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig {
            intercept_los: 1.0,
            intercept_nlos: 1.0,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn empty_process() {
        let mut rng = stream(1, 0, 0);
        assert!(sample_ppp(0.0, 100.0, &mut rng).is_empty());
    }

    #[test]
    fn ppp_mean_count() {
        let density = 1.0 / (PI * 50.0 * 50.0);
        let mut rng = stream(2, 0, 0);
        let draws = 10_000;
        let mut total = 0usize;
        for _ in 0..draws {
            let pts = sample_ppp(density, 500.0, &mut rng);
            assert!(pts.iter().all(|p| p[0].hypot(p[1]) <= 500.0));
            total += pts.len();
        }
        let mean = total as f64 / draws as f64;
        // mean = lambda pi R^2 = 100, standard error 0.1
        assert!((mean - 100.0).abs() < 3.0, "mean {mean}");
    }

    #[test]
    fn los_fraction_at_mu() {
        let mut rng = stream(3, 0, 0);
        let pts = vec![[50.0, 0.0]; 100_000];
        let frac = assign_los(&pts, 50.0, &mut rng).iter().filter(|&&l| l).count() as f64 / 1e5;
        assert!((frac - (-1.0f64).exp()).abs() < 0.005, "{frac}");

        let far = vec![[1000.0, 0.0]; 100_000];
        let frac = assign_los(&far, 50.0, &mut rng).iter().filter(|&&l| l).count() as f64 / 1e5;
        assert!(frac < 1e-4);
        assert_eq!(los_probability(0.0, 50.0), 1.0);
    }

    #[test]
    fn path_loss_values() {
        let c = cfg();
        assert_eq!(path_loss(1.0, true, &c).unwrap(), 1.0);
        assert!((path_loss(100.0, true, &c).unwrap() - 1e-5).abs() < 1e-17);
        let ratio = path_loss(50.0, true, &c).unwrap() / path_loss(50.0, false, &c).unwrap();
        assert!((ratio / 2500.0 - 1.0).abs() < 1e-12);
        assert!(matches!(path_loss(0.0, true, &c), Err(Error::NonPositiveDistance(_))));
        assert!(path_loss(-1.0, false, &c).is_err());
    }

    #[test]
    fn association_examples() {
        let c = cfg();
        let g = |r: f64, los: bool| path_loss(r, los, &c).unwrap();
        assert_eq!(associate(&[g(10.0, true), g(20.0, true)]), Some(0));
        // 200^-2.5 = 1.77e-6 vs 50^-4.5 = 2.26e-8
        assert_eq!(associate(&[g(50.0, false), g(200.0, true)]), Some(1));
        assert_eq!(associate(&[g(70.0, false)]), Some(0));
        assert_eq!(associate(&[]), None);
        assert_eq!(associate(&[1.0, 1.0]), Some(0));
    }

    #[test]
    fn exclusion_radius_examples() {
        let mut c = cfg();
        assert!((exclusion_radius(100.0, Tier::Los, &c) - 100f64.powf(2.5 / 4.5)).abs() < 1e-12);
        assert!((exclusion_radius(100.0, Tier::Los, &c) - 12.915_496_650_148_84).abs() < 1e-8);
        c.alpha_nlos = c.alpha_los;
        assert!((exclusion_radius(37.0, Tier::Los, &c) - 37.0).abs() < 1e-12);
        assert!((exclusion_radius(37.0, Tier::Nlos, &c) - 37.0).abs() < 1e-12);
    }

    #[test]
    fn empty_windows_are_resampled() {
        // mean count 0.16
        let c = ScenarioConfig {
            sim_window_radius: 20.0,
            ..ScenarioConfig::default()
        };
        let mut rng = stream(4, 0, 0);
        let mut discarded = 0;
        for _ in 0..200 {
            let (net, d) = sample_network(&c, &mut rng);
            assert!(!net.is_empty());
            assert!(net.serving.is_some());
            discarded += d;
        }
        assert!(discarded > 100);
    }

    #[test]
    fn los_density_follows_blockage_law() {
        // LOS fraction per annulus against exp(-r/mu)
        let c = ScenarioConfig::default();
        let mut rng = stream(5, 0, 0);
        let edges = [0.0, 25.0, 50.0, 100.0, 150.0];
        let mut los = [0usize; 4];
        let mut all = [0usize; 4];
        for _ in 0..2_000 {
            let (net, _) = sample_network(&c, &mut rng);
            for b in &net.bs {
                if let Some(k) = edges.windows(2).position(|w| b.distance >= w[0] && b.distance < w[1]) {
                    all[k] += 1;
                    los[k] += b.is_los as usize;
                }
            }
        }
        for k in 0..4 {
            let (a, b) = (edges[k], edges[k + 1]);
            // area-weighted mean of exp(-r/mu) over the annulus
            let mu = c.los_range;
            let prim = |r: f64| -mu * (-r / mu).exp() * (r + mu);
            let expected = (prim(b) - prim(a)) / ((b * b - a * a) / 2.0);
            let n = all[k] as f64;
            let frac = los[k] as f64 / n;
            let se = (expected * (1.0 - expected) / n).sqrt();
            assert!(
                (frac - expected).abs() < 4.0 * se + 1e-3,
                "bin {k}: {frac} vs {expected}"
            );
        }
    }

    proptest! {
        #[test]
        fn psi_identity(x in 0.5f64..2000.0, al in 2.0f64..4.0, an in 2.5f64..6.0, cl in 1e-8f64..1e-5, cn in 1e-8f64..1e-5) {
            let c = ScenarioConfig { alpha_los: al, alpha_nlos: an, intercept_los: cl, intercept_nlos: cn, ..ScenarioConfig::default() };
            let psi = exclusion_radius(x, Tier::Los, &c);
            let lhs = cn * psi.powf(-an);
            let rhs = cl * x.powf(-al);
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
            let psi_n = exclusion_radius(x, Tier::Nlos, &c);
            prop_assert!((cl * psi_n.powf(-al) / (cn * x.powf(-an)) - 1.0).abs() < 1e-12);
            prop_assert!(exclusion_radius(x * 1.1, Tier::Los, &c) > psi);
        }

        #[test]
        fn association_scale_invariant(seed in 0u64..500, scale in 1e-3f64..1e3) {
            let c = ScenarioConfig::default();
            let mut rng = stream(seed, 9, 0);
            let (net, _) = sample_network(&c, &mut rng);
            let mut scaled = c.clone();
            scaled.intercept_los *= scale;
            scaled.intercept_nlos *= scale;
            let again = NetworkRealization::from_points(net.bs.clone(), &scaled).unwrap();
            prop_assert_eq!(again.serving, net.serving);
            let s = net.serving.unwrap();
            prop_assert!(net.path_gain.iter().all(|&g| g <= net.path_gain[s]));
        }
    }
}
