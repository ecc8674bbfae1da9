use std::f64::consts::PI;

use proptest::prelude::*;
use specwave_core::dynamics::FlowState;
use specwave_core::spectral::Grid;
use specwave_core::tank::{
    blend_weight, harmonic_amplitudes, mass, BarBathymetry, GaugeSet, MassSeries, Relaxation, RelaxationZone, ZoneKind,
};
use specwave_core::waves::{AiryWave, WaveKinematics, WaveParameters};

fn wavy_state(grid: &Grid, t: f64) -> FlowState {
    let mut s = FlowState::rest(grid);
    s.u = grid.field_from(|x, sg| (1.3 * x).sin() + sg);
    s.w = grid.field_from(|x, sg| (0.7 * x).cos() * sg);
    s.eta = grid.x.nodes().iter().map(|x| 0.01 * (2.1 * x).cos()).collect();
    s.t = t;
    s
}

fn airy(length: f64) -> AiryWave {
    AiryWave::new(WaveParameters::from_length(0.02, length, 0.5, 9.81).unwrap())
}

#[test]
fn relaxing_twice_squares_the_weight() {
    let length = 6.0;
    let grid = Grid::new(40, 6, length).unwrap();
    let h = vec![0.5; grid.x.len()];
    let relax = Relaxation {
        zones: vec![
            RelaxationZone::new(0.0, 2.0, ZoneKind::Generation, true).unwrap(),
            RelaxationZone::new(4.0, 5.9, ZoneKind::Absorption, false).unwrap(),
        ],
        wave: Some(Box::new(airy(length))),
        ramp: 0.0,
    };
    let t = 0.37;
    let q = wavy_state(&grid, t);
    let mut twice = q.clone();
    relax.apply(&grid, &h, &mut twice);
    relax.apply(&grid, &h, &mut twice);
    let wave = airy(length);
    let sigma = grid.z.sigma();
    for (i, &x) in grid.x.nodes().iter().enumerate() {
        let zone = relax.zones.iter().find(|z| z.weight(x).is_some());
        let g2 = zone.map_or(1.0, |z| z.weight(x).unwrap().powi(2));
        let generating = zone.is_some_and(|z| z.kind == ZoneKind::Generation);
        let eta_t = if generating { wave.elevation(x, t) } else { 0.0 };
        let expect = g2 * q.eta[i] + (1.0 - g2) * eta_t;
        assert!((twice.eta[i] - expect).abs() < 1e-15, "eta at x = {x}");
        for (m, s) in sigma.iter().enumerate() {
            let (ut, wt) = if generating {
                wave.velocity(x, -h[i] + s * (h[i] + wave.elevation(x, t)), t)
            } else {
                (0.0, 0.0)
            };
            assert!((twice.u[[i, m]] - (g2 * q.u[[i, m]] + (1.0 - g2) * ut)).abs() < 1e-14);
            assert!((twice.w[[i, m]] - (g2 * q.w[[i, m]] + (1.0 - g2) * wt)).abs() < 1e-14);
        }
    }
}

#[test]
fn weight_is_one_at_the_interior_edge() {
    let gen = RelaxationZone::new(1.0, 3.0, ZoneKind::Generation, true).unwrap();
    assert_eq!(gen.weight(3.0), Some(1.0));
    assert_eq!(gen.weight(1.0), Some(0.0));
    assert_eq!(gen.weight(3.5), None);
    let abs = RelaxationZone::new(5.0, 8.0, ZoneKind::Absorption, false).unwrap();
    assert_eq!(abs.weight(5.0), Some(1.0));
    assert_eq!(abs.weight(8.0), Some(0.0));
    assert!(RelaxationZone::new(2.0, 2.0, ZoneKind::Absorption, false).is_err());
}

#[test]
fn ramp_starts_from_rest() {
    let length = 4.0;
    let grid = Grid::new(20, 4, length).unwrap();
    let h = vec![0.5; grid.x.len()];
    let relax = Relaxation {
        zones: vec![RelaxationZone::new(0.0, 4.0, ZoneKind::Generation, true).unwrap()],
        wave: Some(Box::new(airy(length))),
        ramp: 2.0,
    };
    let mut s = FlowState::rest(&grid);
    relax.apply(&grid, &h, &mut s);
    assert!(s.eta.iter().chain(s.u.iter()).all(|v| *v == 0.0));
}

#[test]
fn gauges_are_exact_on_resolved_modes() {
    let length = 5.0;
    let grid = Grid::new(32, 4, length).unwrap();
    let k = 2.0 * PI / length;
    let f = |x: f64, t: f64| 0.3 * (3.0 * k * x - t).cos() + 0.1 * (7.0 * k * x).sin() + 0.05;
    let positions = vec![0.0, 0.123, 2.5, 4.999];
    let mut gauges = GaugeSet::new(positions.clone(), length).unwrap();
    for step in 0..3 {
        let t = 0.1 * step as f64;
        let eta: Vec<f64> = grid.x.nodes().iter().map(|&x| f(x, t)).collect();
        gauges.record(&grid, t, &eta).unwrap();
    }
    for (g, &x) in positions.iter().enumerate() {
        for (j, &t) in gauges.times.iter().enumerate() {
            assert!((gauges.series[g][j] - f(x, t)).abs() < 1e-12);
        }
    }
    assert!(gauges.record(&grid, 0.2, &vec![0.0; grid.x.len()]).is_err());
    assert!(GaugeSet::new(vec![5.0], length).is_err());
}

#[test]
fn mass_is_exact_for_band_limited_surfaces() {
    let length = 7.0;
    let grid = Grid::new(30, 4, length).unwrap();
    let k = 2.0 * PI / length;
    let h: Vec<f64> = grid.x.nodes().iter().map(|x| 0.4 - 0.1 * (k * x).cos()).collect();
    let eta: Vec<f64> = grid.x.nodes().iter().map(|x| 0.02 * (3.0 * k * x).sin() + 0.001).collect();
    // integral of h + η over one period: 0.4 L + 0.001 L
    let exact = 0.401 * length;
    assert!((mass(&grid, &h, &eta) - exact).abs() < 1e-13);
}

#[test]
fn mass_series_drifts() {
    let mut s = MassSeries::default();
    for i in 0..40 {
        let t = i as f64 * 0.1;
        s.push(t, 10.0 + 0.01 * (2.0 * PI * t).sin() + 1e-3 * t);
    }
    assert!((s.rate[1] - (s.mass[1] - s.mass[0]) / 0.1).abs() < 1e-12);
    assert_eq!(s.rate[0], 0.0);
    // one-period windows remove the oscillation and leave the trend
    let trend = s.secular_drift(10);
    assert!((trend - 1e-3 * 3.0 / 10.0).abs() < 1e-9, "{trend}");
    assert!(s.averaged_drift(10) >= trend.abs() - 1e-15);
}

#[test]
fn harmonics_of_a_synthetic_signal() {
    let omega = 2.0 * PI / 2.0;
    let times: Vec<f64> = (0..=800).map(|i| i as f64 * 0.025).collect();
    let series: Vec<f64> = times
        .iter()
        .map(|t| 0.01 * (omega * t).cos() + 0.004 * (2.0 * omega * t + 0.3).sin() + 0.001 * (3.0 * omega * t).cos())
        .collect();
    let a = harmonic_amplitudes(&times, &series, omega, 4, 3);
    for (got, want) in a.iter().zip([0.01, 0.004, 0.001]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn bar_profile_shape() {
    let bar = BarBathymetry::default();
    bar.validate().unwrap();
    assert!((bar.depth(0.0) - 0.4).abs() < 1e-15);
    assert!((bar.depth(13.0) - 0.1).abs() < 1e-15);
    assert!((bar.depth(25.0) - 0.4).abs() < 1e-15);
    // slopes 1:20 and 1:10 away from the rounded corners
    assert!(((bar.depth(8.0) - bar.depth(10.0)) / 2.0 - 0.05).abs() < 1e-12);
    assert!(((bar.depth(15.5) - bar.depth(15.0)) / 0.5 - 0.1).abs() < 1e-12);
    let bad = BarBathymetry {
        crest_depth: 0.5,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
}

proptest! {
    #[test]
    fn blend_weight_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(blend_weight(lo, 3.0) <= blend_weight(hi, 3.0));
        prop_assert!((0.0..=1.0).contains(&blend_weight(a, 3.0)));
    }

    #[test]
    fn bar_depth_is_bounded_and_continuous(x in -5.0f64..40.0) {
        let bar = BarBathymetry::default();
        let d = bar.depth(x);
        prop_assert!((0.1 - 1e-12..=0.4 + 1e-12).contains(&d));
        let e = 1e-7;
        prop_assert!((bar.depth(x + e) - d).abs() < 0.11 * e + 1e-14);
    }

    #[test]
    fn absorption_only_damps(seed in 0.0f64..10.0) {
        let grid = Grid::new(16, 4, 4.0).unwrap();
        let h = vec![0.5; grid.x.len()];
        let relax = Relaxation {
            zones: vec![RelaxationZone::new(1.0, 3.0, ZoneKind::Absorption, false).unwrap()],
            wave: None,
            ramp: 0.0,
        };
        let q = wavy_state(&grid, seed);
        let mut r = q.clone();
        relax.apply(&grid, &h, &mut r);
        for i in 0..grid.x.len() {
            prop_assert!(r.eta[i].abs() <= q.eta[i].abs());
            for m in 0..grid.z.len() {
                prop_assert!(r.u[[i, m]].abs() <= q.u[[i, m]].abs());
            }
        }
    }
}
