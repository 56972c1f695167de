use beamassoc::beam_training::Alignment;
use beamassoc::sim_engine::{
    optimize_pilot_reuse, run_experiment, run_point, DropSet, Experiment, Mode, PointContext, Sweep, SweepParam,
};
use beamassoc::ScenarioConfig;

#[test]
fn modes_share_drops() {
    let cfg = ScenarioConfig::default();
    let s = run_point(
        &cfg,
        &[Mode::Perfect, Mode::FullReuse, Mode::Hierarchical],
        400,
        9,
        0,
        None,
    )
    .unwrap();
    for (p, (f, h)) in s[0].outcomes.iter().zip(s[1].outcomes.iter().zip(&s[2].outcomes)) {
        assert!(f.sinr <= p.sinr && h.sinr <= p.sinr);
        assert_eq!(p.alignment, Alignment::Obp);
    }
    assert!(s[0].rate(&cfg) >= s[1].rate(&cfg));
}

#[test]
fn seeds_and_points_select_streams() {
    let cfg = ScenarioConfig::default();
    let a = run_point(&cfg, &[Mode::FullReuse], 200, 1, 0, None).unwrap()[0].sinr();
    let b = run_point(&cfg, &[Mode::FullReuse], 200, 1, 0, None).unwrap()[0].sinr();
    let c = run_point(&cfg, &[Mode::FullReuse], 200, 2, 0, None).unwrap()[0].sinr();
    let d = run_point(&cfg, &[Mode::FullReuse], 200, 1, 1, None).unwrap()[0].sinr();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, d);
    // a prefix of a longer run is the shorter run
    let long = run_point(&cfg, &[Mode::FullReuse], 300, 1, 0, None).unwrap()[0].sinr();
    assert_eq!(&long[..200], &a[..]);
}

#[test]
fn optimized_reuse_is_on_the_grid_and_best() {
    let cfg = ScenarioConfig {
        n_bs_beams: 2,
        n_ms_beams: 2,
        n_bs_wide: 2,
        n_ms_wide: 2,
        ..ScenarioConfig::default()
    };
    let ctx = PointContext::new(&cfg).unwrap();
    let drops = DropSet::new(&cfg, 500, 3, 0);
    let grid = [0.25, 0.5, 1.0];
    let best = optimize_pilot_reuse(&ctx, &drops, Mode::FullReuse, &grid).unwrap();
    assert!(grid.contains(&best.setting.reuse));
    let at_one = run_point(&cfg, &[Mode::FullReuse], 500, 3, 0, None).unwrap();
    assert!(best.rate(&cfg) >= at_one[0].rate(&cfg));
}

#[test]
fn sweep_rows_cover_every_value_and_mode() {
    let exp = Experiment {
        base: ScenarioConfig::default(),
        sweep: Some(Sweep {
            param: SweepParam::CellRadius,
            values: vec![30.0, 60.0],
        }),
        modes: vec![Mode::Perfect, Mode::FullReuse],
        n_drops: 200,
        seed: 5,
        pilot_grid: None,
    };
    let rows = run_experiment(&exp).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r.error.is_none() && r.rate.is_finite() && r.p_sbp == 0.0));
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.eta)));
}
