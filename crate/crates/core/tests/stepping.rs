use std::f64::consts::PI;

use num_complex::Complex64;
use specwave_core::dynamics::{BedCondition, FlowState, ModelMode, PhysicalConstants};
use specwave_core::poisson::SolverOptions;
use specwave_core::sigma::Bathymetry;
use specwave_core::spectral::{bed_row, Grid};
use specwave_core::time_integration::{LserkScheme, Stepper, StepperConfig};
use specwave_core::waves::{sample, stream_function_solve, StreamFunctionOptions, WaveParameters};

/// Integrates `y' = λ y` (complex, as a real pair) to `t = 1`.
fn lserk_error(lambda: Complex64, steps: usize) -> f64 {
    let s = LserkScheme::carpenter_kennedy();
    let dt = 1.0 / steps as f64;
    let f = |_t: f64, y: &[f64]| {
        let z = lambda * Complex64::new(y[0], y[1]);
        vec![z.re, z.im]
    };
    let y = s.integrate(f, &[1.0, 0.0], 0.0, dt, steps);
    (Complex64::new(y[0], y[1]) - lambda.exp()).norm()
}

#[test]
fn lserk_is_fourth_order() {
    for lambda in [Complex64::new(-1.0, 0.0), Complex64::new(-0.3, 2.0), Complex64::new(0.0, 3.0)] {
        let steps: Vec<usize> = (0..6).map(|i| 10 << i).collect();
        let errs: Vec<f64> = steps.iter().map(|&n| lserk_error(lambda, n)).collect();
        // least-squares slope of log error against log Δt
        let xs: Vec<f64> = steps.iter().map(|&n| -(n as f64).ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 6.0, ys.iter().sum::<f64>() / 6.0);
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let order = num / den;
        assert!(order >= 3.9, "λ = {lambda}: order {order}, errors {errs:?}");
    }
}

#[test]
fn scheme_coefficients_are_consistent() {
    let s = LserkScheme::carpenter_kennedy();
    assert_eq!(s.a[0], 0.0);
    // one step of y' = 1 advances by exactly Δt
    let y = s.integrate(|_, _| vec![1.0], &[0.0], 0.0, 0.1, 1);
    assert!((y[0] - 0.1).abs() < 1e-15);
    assert!(LserkScheme::new(vec![0.5], vec![1.0], vec![0.0]).is_err());
}

fn config(dt: f64, mode: ModelMode, bed: BedCondition) -> StepperConfig {
    StepperConfig {
        dt,
        mode,
        bed,
        consts: PhysicalConstants::default(),
        filter: None,
        divergence_limit: 1e-6,
        solver: SolverOptions::default(),
    }
}

#[test]
fn rest_is_a_fixed_point() {
    let grid = Grid::new(12, 8, 3.0).unwrap();
    let bathy = Bathymetry::from_fn(&grid, |x| 0.5 + 0.1 * (2.0 * PI * x / 3.0).sin()).unwrap();
    for mode in [ModelMode::Nonlinear, ModelMode::Linearized] {
        let mut stepper = Stepper::new(
            grid.clone(),
            bathy.clone(),
            LserkScheme::carpenter_kennedy(),
            config(0.01, mode, BedCondition::Impermeable),
        )
        .unwrap();
        let mut state = FlowState::rest(&grid);
        for _ in 0..5 {
            stepper.step(&mut state).unwrap();
        }
        let worst = state.u.iter().chain(state.w.iter()).chain(state.eta.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst < 1e-14, "{mode:?}: {worst:e}");
        assert!((state.t - 0.05).abs() < 1e-15);
    }
}

#[test]
fn bed_conditions_hold_after_each_step() {
    let grid = Grid::new(16, 10, 2.0).unwrap();
    let k = PI;
    let bathy = Bathymetry::from_fn(&grid, |x| 0.6 + 0.08 * (k * x).cos()).unwrap();
    let p = WaveParameters::from_length(0.02, 2.0, 0.6, 9.81).unwrap();
    let wave = specwave_core::waves::AiryWave::new(p);
    for bed in [BedCondition::Impermeable, BedCondition::NoSlip] {
        let (eta, u, w) = sample(&wave, &grid, &bathy.h, 0.0);
        let mut state = FlowState { u, w, p: grid.zeros(), eta, t: 0.0 };
        let mut stepper = Stepper::new(
            grid.clone(),
            bathy.clone(),
            LserkScheme::carpenter_kennedy(),
            config(p.period / 50.0, ModelMode::Nonlinear, bed),
        )
        .unwrap();
        stepper.config.filter = Some((
            specwave_core::spectral::FilterSpec::with_fraction(grid.x.max_mode(), 0.5, 36.0, 2.0).unwrap(),
            specwave_core::spectral::FilterSpec::with_fraction(10, 0.9, 36.0, 2.0).unwrap(),
        ));
        for _ in 0..3 {
            stepper.step(&mut state).unwrap();
            let ub = bed_row(&state.u);
            let wb = bed_row(&state.w);
            for i in 0..grid.x.len() {
                let flux = ub[i] * bathy.hx[i] + wb[i];
                assert!(flux.abs() < 1e-15, "{bed:?}: normal flux {flux:e}");
                if bed == BedCondition::NoSlip {
                    assert_eq!(ub[i], 0.0);
                }
            }
        }
    }
}

#[test]
fn steady_wave_translates_with_its_phase_speed() {
    let g = 9.81;
    let period = WaveParameters::from_length(0.0, PI, 1.0, g).unwrap().period;
    let opts = StreamFunctionOptions { g, ..Default::default() };
    let wave = stream_function_solve(0.05, 1.0, period, opts).unwrap();
    let grid = Grid::new(24, 16, wave.length()).unwrap();
    let bathy = Bathymetry::flat(&grid, 1.0).unwrap();
    let (eta, u, w) = sample(&wave, &grid, &bathy.h, 0.0);
    let mut state = FlowState { u, w, p: grid.zeros(), eta, t: 0.0 };
    let steps = 40;
    let dt = wave.period / 4.0 / steps as f64;
    let mut stepper = Stepper::new(
        grid.clone(),
        bathy.clone(),
        LserkScheme::carpenter_kennedy(),
        config(dt, ModelMode::Nonlinear, BedCondition::Impermeable),
    )
    .unwrap();
    let mut worst_div: f64 = 0.0;
    for _ in 0..steps {
        let d = stepper.step(&mut state).unwrap();
        worst_div = worst_div.max(d.max_divergence());
    }
    let (exact, _, _) = sample(&wave, &grid, &bathy.h, state.t);
    let err = state.eta.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6 * wave.height, "surface error {err:e}");
    assert!(worst_div < 1e-9, "stage divergence {worst_div:e}");
}

#[test]
fn rejects_bad_time_step() {
    let grid = Grid::new(4, 4, 1.0).unwrap();
    let bathy = Bathymetry::flat(&grid, 1.0).unwrap();
    let r = Stepper::new(grid, bathy, LserkScheme::carpenter_kennedy(), config(0.0, ModelMode::Nonlinear, BedCondition::Impermeable));
    assert!(r.is_err());
}
