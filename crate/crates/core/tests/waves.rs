use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use specwave_core::waves::*;

fn solve(kh: f64, frac: f64, modes: usize) -> SteadyWave {
    let h = 1.0;
    let lin = WaveParameters::from_length(0.0, 2.0 * PI * h / kh, h, GRAVITY).unwrap();
    let height = frac * battjes_max_steepness(kh) * lin.length;
    let opts = StreamFunctionOptions { modes, ..Default::default() };
    stream_function_solve(height, h, lin.period, opts).unwrap()
}

#[test]
fn vanishing_steepness_matches_linear_theory() {
    for kh in [0.5, 2.0, 2.0 * PI] {
        let sw = solve(kh, 1e-4, 16);
        let lin = WaveParameters::from_period(sw.height, sw.period, sw.depth, GRAVITY).unwrap();
        let airy = AiryWave::new(lin);
        let amp_u = 0.5 * sw.height * lin.omega / lin.kh().tanh();
        for i in 0..12 {
            let x = i as f64 * lin.length / 12.0;
            let e = sw.elevation(x, 0.0) - airy.elevation(x, 0.0);
            assert!(e.abs() <= 1e-3 * 0.5 * sw.height, "kh {kh} eta err {e}");
            for z in [-0.9, -0.5, -0.1] {
                let (u1, w1) = sw.velocity(x, z, 0.0);
                let (u2, w2) = airy.velocity(x, z, 0.0);
                assert!((u1 - u2).abs() <= 1e-3 * amp_u, "kh {kh} u");
                assert!((w1 - w2).abs() <= 1e-3 * amp_u, "kh {kh} w");
            }
        }
    }
}

#[test]
fn steep_wave_converges_with_warning_free_limit() {
    let sw = solve(2.0, 0.9, 32);
    assert!(sw.residual <= 1e-12);
    assert!(sw.warnings.is_empty());
    // mean elevation vanishes (trapezoid over one wavelength is exact for the series)
    let n = 256;
    let mean: f64 = (0..n).map(|i| sw.elevation_at_phase(2.0 * PI * i as f64 / n as f64)).sum::<f64>() / n as f64;
    assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(sw.elevation_at_phase(0.0) - sw.elevation_at_phase(PI), sw.height, epsilon = 1e-12);
}

#[test]
fn steady_in_moving_frame() {
    let sw = solve(2.0, 0.7, 32);
    let dt = 0.137;
    for i in 0..10 {
        let x = i as f64 * 0.31;
        assert_abs_diff_eq!(sw.elevation(x, 0.0), sw.elevation(x + sw.c * dt, dt), epsilon = 1e-10);
        let (u1, w1) = sw.velocity(x, -0.4, 0.0);
        let (u2, w2) = sw.velocity(x + sw.c * dt, -0.4, dt);
        assert_abs_diff_eq!(u1, u2, epsilon = 1e-10);
        assert_abs_diff_eq!(w1, w2, epsilon = 1e-10);
    }
}

/// Gauss–Legendre quadrature of the co-moving flux `∫ (c - u) dz`.
#[test]
fn volume_flux_matches_quadrature() {
    let sw = solve(0.5, 0.4, 32);
    let (nodes, weights) = gauss_legendre(40);
    for theta in [0.0, 0.7, 2.1, PI] {
        let x = theta / sw.k;
        let top = sw.elevation(x, 0.0);
        let half = 0.5 * (top + sw.depth);
        let flux: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(s, w)| {
                let z = -sw.depth + half * (s + 1.0);
                w * half * (sw.c - sw.velocity(x, z, 0.0).0)
            })
            .sum();
        assert_abs_diff_eq!(flux, sw.q, epsilon = 1e-10);
    }
}

#[test]
fn doubling_modes_agrees() {
    let a = solve(2.0, 0.4, 16);
    let b = solve(2.0, 0.4, 32);
    for i in 0..20 {
        let th = i as f64 * PI / 19.0;
        assert_abs_diff_eq!(a.elevation_at_phase(th), b.elevation_at_phase(th), epsilon = 1e-10);
    }
}

#[test]
fn dispersion_larger_period_gives_smaller_k() {
    let a = solve_dispersion(1.0, 0.5, GRAVITY).unwrap();
    let b = solve_dispersion(1.5, 0.5, GRAVITY).unwrap();
    assert!(b.k < a.k);
}

proptest! {
    #[test]
    fn dispersion_self_consistent(t in 0.2f64..30.0, h in 0.01f64..2000.0) {
        let p = solve_dispersion(t, h, GRAVITY).unwrap();
        let omega = (GRAVITY * p.k * (p.k * h).tanh()).sqrt();
        prop_assert!((omega - 2.0 * PI / t).abs() <= 1e-12 * omega);
    }
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}
