//! Experiment runners producing result tables.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use specwave_core::dynamics::{explicit_forcing, surface_rhs, BedCondition, FlowState, ModelMode, PhysicalConstants};
use specwave_core::poisson::{
    assemble_rhs, solve, CycleKind, GmresOptions, Hierarchy, Layout, SolverOptions, SolverStats,
};
use specwave_core::sigma::{compute_geometry, Bathymetry, SigmaGeometry, SurfaceRate, SurfaceState};
use specwave_core::spectral::{surface_row, Field, Grid};
use specwave_core::tank::{harmonic_amplitudes, BarBathymetry, BarConfig, BarTank};
use specwave_core::time_integration::{LserkScheme, Stepper, StepperConfig};
use specwave_core::waves::{
    battjes_max_steepness, sample, sample_still, stream_function_solve, AiryWave, SteadyWave, StokesLayer, StreamFunctionOptions,
    WaveKinematics, WaveParameters,
};

use crate::config::{ExperimentConfig, ExperimentKind, FilterSection};
use crate::error::Result;
use crate::output::{Cell, StudyResult, Table};

/// Progress sink for long runs.
pub type Progress<'a> = &'a (dyn Fn(&str) + Sync);

pub fn run_study(cfg: &ExperimentConfig, progress: Progress) -> Result<StudyResult> {
    match cfg.kind() {
        ExperimentKind::Converge => run_convergence_study(cfg, progress),
        ExperimentKind::Dispersion => run_dispersion_study(cfg, progress),
        ExperimentKind::BoundaryLayer => run_boundary_layer_study(cfg, progress),
        ExperimentKind::Bar => run_bar_study(cfg, progress),
        ExperimentKind::PoissonBench => run_poisson_bench(cfg, progress),
    }
}

fn status<T>(r: &std::result::Result<T, String>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("failed: {e}").into(),
    }
}

/// Stream-function wave at a fraction of the breaking limit for given `kh`.
pub fn steady_wave_for(kh: f64, fraction: f64, depth: f64, modes: usize, g: f64) -> specwave_core::Result<SteadyWave> {
    let length = 2.0 * PI * depth / kh;
    let lin = WaveParameters::from_length(0.0, length, depth, g)?;
    let height = fraction * battjes_max_steepness(kh) * length;
    stream_function_solve(
        height,
        depth,
        lin.period,
        StreamFunctionOptions {
            modes,
            g,
            ..Default::default()
        },
    )
}

/// Flow state sampled from a wave on a flat bed.
pub fn wave_state<W: WaveKinematics + ?Sized>(wave: &W, grid: &Grid, bathy: &Bathymetry, t: f64) -> FlowState {
    let (eta, u, w) = sample(wave, grid, &bathy.h, t);
    FlowState {
        u,
        w,
        p: grid.zeros(),
        eta,
        t,
    }
}

/// Initial state of the linearized model: velocities on the still column.
pub fn linear_wave_state<W: WaveKinematics + ?Sized>(wave: &W, grid: &Grid, bathy: &Bathymetry, t: f64) -> FlowState {
    let (eta, u, w) = sample_still(wave, grid, &bathy.h, t);
    FlowState {
        u,
        w,
        p: grid.zeros(),
        eta,
        t,
    }
}

/// Errors of one nonlinear step against the translated exact wave.
#[derive(Clone, Copy, Debug)]
pub struct OneStepError {
    pub error_u: f64,
    pub error_w: f64,
    pub error_eta: f64,
    pub max_divergence: f64,
    pub iterations: usize,
}

fn max_abs_diff<'a, I: IntoIterator<Item = (&'a f64, &'a f64)>>(pairs: I) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
pub fn one_step_error(
    wave: &SteadyWave,
    n: usize,
    m: usize,
    dt: f64,
    consts: PhysicalConstants,
    solver: SolverOptions,
    filter: Option<&FilterSection>,
    divergence_limit: f64,
) -> specwave_core::Result<OneStepError> {
    let grid = Grid::new(n, m, wave.length())?;
    let bathy = Bathymetry::flat(&grid, wave.depth)?;
    let mut state = wave_state(wave, &grid, &bathy, 0.0);
    let filter = match filter {
        Some(f) => f.specs(grid.x.max_mode(), m)?,
        None => None,
    };
    let mut stepper = Stepper::new(
        grid.clone(),
        bathy.clone(),
        LserkScheme::carpenter_kennedy(),
        StepperConfig {
            dt,
            mode: ModelMode::Nonlinear,
            bed: BedCondition::Impermeable,
            consts,
            filter,
            divergence_limit,
            solver,
        },
    )?;
    let diag = stepper.step(&mut state)?;
    let exact = wave_state(wave, &grid, &bathy, dt);
    Ok(OneStepError {
        error_u: max_abs_diff(state.u.iter().zip(exact.u.iter())),
        error_w: max_abs_diff(state.w.iter().zip(exact.w.iter())),
        error_eta: max_abs_diff(state.eta.iter().zip(&exact.eta)),
        max_divergence: diag.max_divergence(),
        iterations: diag.iterations(),
    })
}

pub fn run_convergence_study(cfg: &ExperimentConfig, progress: Progress) -> Result<StudyResult> {
    let start = Instant::now();
    let sec = cfg.converge.clone().unwrap_or_default();
    let consts = cfg.physics.constants();
    let solver = cfg.solver.options();
    let filter = sec.filter.then_some(&cfg.filter);
    let pairs: Vec<(usize, usize)> = if sec.m.is_empty() {
        sec.n.iter().map(|&n| (n, n)).collect()
    } else {
        sec.n.iter().flat_map(|&n| sec.m.iter().map(move |&m| (n, m))).collect()
    };
    let mut waves = Vec::new();
    for &kh in &sec.kh {
        for &frac in &sec.steepness {
            let w = steady_wave_for(kh, frac, sec.depth, sec.sf_modes, consts.g).map_err(|e| e.to_string());
            waves.push((kh, frac, w));
        }
    }
    let cases: Vec<(usize, (usize, usize))> = (0..waves.len())
        .flat_map(|w| pairs.iter().map(move |p| (w, *p)))
        .collect();
    let rows: Vec<Vec<Cell>> = cases
        .par_iter()
        .map(|&(wi, (n, m))| {
            let (kh, frac, wave) = &waves[wi];
            let res = wave.clone().and_then(|wave| {
                let dt = sec.dt_fraction * wave.period;
                let run = |dt| {
                    one_step_error(&wave, n, m, dt, consts, solver, filter, cfg.solver.divergence_limit)
                        .map_err(|e| e.to_string())
                };
                let full = run(dt)?;
                let half = if sec.dt_check { Some(run(0.5 * dt)?) } else { None };
                Ok((wave, dt, full, half))
            });
            progress(&format!("converge kh={kh:.4} fraction={frac} N={n} M={m}: {}", if res.is_ok() { "ok" } else { "failed" }));
            let (height, length, dt, eu, ew, ee, eh, div, it) = match &res {
                Ok((w, dt, f, h)) => (
                    Some(w.height),
                    Some(w.length()),
                    Some(*dt),
                    Some(f.error_u),
                    Some(f.error_w),
                    Some(f.error_eta),
                    h.map(|h| h.error_u),
                    Some(f.max_divergence),
                    Some(f.iterations),
                ),
                Err(_) => (None, None, None, None, None, None, None, None, None),
            };
            vec![
                (*kh).into(),
                (*frac).into(),
                height.into(),
                length.into(),
                n.into(),
                m.into(),
                dt.into(),
                eu.into(),
                ew.into(),
                ee.into(),
                eh.into(),
                div.into(),
                it.into(),
                status(&res),
            ]
        })
        .collect();
    let mut table = Table::new(
        "converge",
        &[
            "kh",
            "steepness_fraction",
            "height",
            "length",
            "n",
            "m",
            "dt",
            "error_u",
            "error_w",
            "error_eta",
            "error_u_half_dt",
            "max_divergence",
            "iterations",
            "status",
        ],
    );
    rows.into_iter().for_each(|r| table.push(r));
    let failures = table.column("status").iter().filter(|c| c.as_str() != Some("ok")).count();
    Ok(StudyResult {
        summary: json!({ "cases": table.len(), "failures": failures }),
        tables: vec![table],
        json_lines: Vec::new(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Relative dispersion error of a linear wave after `periods` periods.
#[allow(clippy::too_many_arguments)]
pub fn relative_dispersion_error(
    kh: f64,
    n: usize,
    m: usize,
    depth: f64,
    height_ratio: f64,
    periods: f64,
    steps_per_period: usize,
    consts: PhysicalConstants,
    solver: SolverOptions,
    divergence_limit: f64,
) -> specwave_core::Result<f64> {
    let k = kh / depth;
    let params = WaveParameters::from_length(height_ratio * depth, 2.0 * PI / k, depth, consts.g)?;
    let wave = AiryWave::new(params);
    let grid = Grid::new(n, m, params.length)?;
    let bathy = Bathymetry::flat(&grid, depth)?;
    let mut state = linear_wave_state(&wave, &grid, &bathy, 0.0);
    let dt = params.period / steps_per_period as f64;
    let steps = (periods * steps_per_period as f64).round() as usize;
    let mut stepper = Stepper::new(
        grid.clone(),
        bathy,
        LserkScheme::carpenter_kennedy(),
        StepperConfig {
            dt,
            mode: ModelMode::Linearized,
            bed: BedCondition::Impermeable,
            consts,
            filter: None,
            divergence_limit,
            solver,
        },
    )?;
    for _ in 0..steps {
        stepper.step(&mut state)?;
    }
    let t = steps as f64 * dt;
    let scale = params.k * kh.tanh();
    let ws = surface_row(&state.w);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, w) in grid.x.nodes().iter().zip(&ws) {
        let phi_e = wave.potential(*x, 0.0, t);
        let phi_s = w / scale;
        num += (phi_e - phi_s).powi(2);
        den += phi_e * phi_e;
    }
    Ok((num / den).sqrt())
}

pub fn run_dispersion_study(cfg: &ExperimentConfig, progress: Progress) -> Result<StudyResult> {
    let start = Instant::now();
    let sec = cfg.dispersion.clone().unwrap_or_default();
    let consts = PhysicalConstants {
        nu: sec.nu,
        ..cfg.physics.constants()
    };
    let solver = cfg.solver.options();
    let cases: Vec<(usize, f64)> = sec.m.iter().flat_map(|&m| sec.kh.iter().map(move |&kh| (m, kh))).collect();
    let rows: Vec<Vec<Cell>> = cases
        .par_iter()
        .map(|&(m, kh)| {
            let res = relative_dispersion_error(
                kh,
                sec.n,
                m,
                sec.depth,
                sec.height_ratio,
                sec.periods,
                sec.steps_per_period,
                consts,
                solver,
                cfg.solver.divergence_limit,
            )
            .map_err(|e| e.to_string());
            progress(&format!("dispersion M={m} kh={kh:.4}"));
            vec![kh.into(), sec.n.into(), m.into(), res.clone().ok().into(), status(&res)]
        })
        .collect();
    let mut table = Table::new("dispersion", &["kh", "n", "m", "rde", "status"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(StudyResult {
        summary: json!({ "cases": table.len() }),
        tables: vec![table],
        json_lines: Vec::new(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Outcome of the oscillatory boundary-layer run.
#[derive(Clone, Debug)]
pub struct BoundaryLayerOutcome {
    pub layer: StokesLayer,
    /// RMS deviation over all columns and the comparison window, over `U0m`.
    pub rms_error: f64,
    pub bed_max_abs_u: f64,
    /// Numerical over analytic free-stream amplitude.
    pub free_stream_ratio: f64,
    pub time: f64,
    /// `(z, u_numeric, u_analytic)` above the bed at `x = 0`.
    pub profile: Vec<(f64, f64, f64)>,
}

/// Amplitude of the `cos(ωt - kx)` mode sampled on the Fourier nodes.
fn mode_amplitude(grid: &Grid, values: &[f64], omega: f64, k: f64, t: f64) -> f64 {
    let (mut a, mut b) = (0.0, 0.0);
    for (x, v) in grid.x.nodes().iter().zip(values) {
        let th = omega * t - k * x;
        a += v * th.cos();
        b += v * th.sin();
    }
    2.0 * a.hypot(b) / values.len() as f64
}

pub fn boundary_layer_run(cfg: &ExperimentConfig, progress: Progress) -> specwave_core::Result<BoundaryLayerOutcome> {
    let sec = cfg.boundary_layer.clone().unwrap_or_default();
    let consts = cfg.physics.constants();
    let params = WaveParameters::from_length(sec.height, 2.0 * PI * sec.depth / sec.kh, sec.depth, consts.g)?;
    let wave = AiryWave::new(params);
    let layer = StokesLayer::new(&params, consts.nu);
    let grid = Grid::new(sec.n, sec.m, params.length)?;
    let bathy = Bathymetry::flat(&grid, sec.depth)?;
    let mut state = linear_wave_state(&wave, &grid, &bathy, 0.0);
    let dt = params.period / sec.steps_per_period as f64;
    let steps = (sec.periods * sec.steps_per_period as f64).round() as usize;
    let filter = if sec.filter {
        cfg.filter.specs(grid.x.max_mode(), sec.m)?
    } else {
        None
    };
    let mut stepper = Stepper::new(
        grid.clone(),
        bathy,
        LserkScheme::carpenter_kennedy(),
        StepperConfig {
            dt,
            mode: ModelMode::Linearized,
            bed: BedCondition::NoSlip,
            consts,
            filter,
            divergence_limit: cfg.solver.divergence_limit,
            solver: cfg.solver.options(),
        },
    )?;
    for s in 1..=steps {
        stepper.step(&mut state)?;
        if s % sec.steps_per_period == 0 {
            progress(&format!("boundary layer: period {}", s / sec.steps_per_period));
        }
    }
    let t = steps as f64 * dt;
    let delta = layer.thickness();
    let depth = sec.depth;
    let column = |i: usize| -> Vec<f64> { state.u.row(i).to_vec() };
    let eval = |coeffs: &[f64], z: f64| specwave_core::spectral::ChebyshevGrid::evaluate_coefficients(coeffs, z / depth);
    let window = 61;
    let (mut sq, mut count) = (0.0, 0usize);
    let mut profile = Vec::with_capacity(sec.profile_points);
    for (i, &x) in grid.x.nodes().iter().enumerate() {
        let coeffs = grid.z.transform(&column(i))?;
        for j in 0..window {
            let z = sec.compare_extent * delta * j as f64 / (window - 1) as f64;
            let e = eval(&coeffs, z) - layer.velocity(z, t, x);
            sq += e * e;
            count += 1;
        }
        if i == 0 {
            for j in 0..sec.profile_points {
                let z = sec.profile_extent * delta * j as f64 / (sec.profile_points - 1) as f64;
                profile.push((z, eval(&coeffs, z), layer.velocity(z, t, x)));
            }
        }
    }
    let bed = grid.z.len() - 1;
    let bed_max_abs_u = (0..grid.x.len()).map(|i| state.u[[i, bed]].abs()).fold(0.0, f64::max);
    // free stream well above the layer, against the inviscid amplitude there
    let z_free = 10.0 * delta;
    let free: Vec<f64> = (0..grid.x.len())
        .map(|i| {
            let coeffs = grid.z.transform(&column(i)).expect("column length");
            eval(&coeffs, z_free)
        })
        .collect();
    let numeric = mode_amplitude(&grid, &free, params.omega, params.k, t);
    let inviscid = layer.u0m * (params.k * z_free).cosh();
    Ok(BoundaryLayerOutcome {
        rms_error: (sq / count as f64).sqrt() / layer.u0m,
        bed_max_abs_u,
        free_stream_ratio: numeric / inviscid,
        time: t,
        profile,
        layer,
    })
}

pub fn run_boundary_layer_study(cfg: &ExperimentConfig, progress: Progress) -> Result<StudyResult> {
    let start = Instant::now();
    let out = boundary_layer_run(cfg, progress)?;
    let delta = out.layer.thickness();
    let mut profile = Table::new("boundary_layer_profile", &["z", "z_over_delta", "u_numeric", "u_analytic"]);
    for &(z, un, ua) in &out.profile {
        profile.push(vec![z.into(), (z / delta).into(), un.into(), ua.into()]);
    }
    let mut summary = Table::new(
        "boundary_layer_summary",
        &["time", "u0m", "delta1", "delta", "rms_error_over_u0m", "bed_max_abs_u", "free_stream_ratio"],
    );
    summary.push(vec![
        out.time.into(),
        out.layer.u0m.into(),
        out.layer.delta1.into(),
        delta.into(),
        out.rms_error.into(),
        out.bed_max_abs_u.into(),
        out.free_stream_ratio.into(),
    ]);
    Ok(StudyResult {
        summary: json!({
            "rms_error_over_u0m": out.rms_error,
            "bed_max_abs_u": out.bed_max_abs_u,
            "free_stream_ratio": out.free_stream_ratio,
            "delta1": out.layer.delta1,
        }),
        tables: vec![profile, summary],
        json_lines: Vec::new(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Crest-to-trough height averaged over the last `periods` whole periods.
pub fn mean_wave_height(times: &[f64], series: &[f64], period: f64, periods: usize) -> f64 {
    let t_end = *times.last().unwrap_or(&0.0);
    let heights: Vec<f64> = (0..periods)
        .map(|p| {
            let hi = t_end - p as f64 * period;
            let lo = hi - period;
            let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
            for (t, v) in times.iter().zip(series) {
                if *t > lo + 1e-12 && *t <= hi + 1e-12 {
                    mn = mn.min(*v);
                    mx = mx.max(*v);
                }
            }
            mx - mn
        })
        .collect();
    heights.iter().sum::<f64>() / heights.len().max(1) as f64
}

pub fn bar_config(cfg: &ExperimentConfig) -> BarConfig {
    let b = cfg.bar.clone().unwrap_or_default();
    BarConfig {
        height: b.height,
        period: b.period,
        bar: BarBathymetry {
            offshore_depth: b.offshore_depth,
            up_start: b.up_start,
            up_end: b.up_end,
            crest_depth: b.crest_depth,
            crest_end: b.crest_end,
            down_end: b.down_end,
            smoothing: b.smoothing,
        },
        wavelengths: b.wavelengths,
        absorption_start: b.absorption_start,
        gauges: b.gauges,
        n: b.n,
        m: b.m,
        steps_per_period: b.steps_per_period,
        duration: b.duration,
        ramp_periods: b.ramp_periods,
        sf_modes: b.sf_modes,
        current: b.current.into(),
        consts: cfg.physics.constants(),
        bed: BedCondition::Impermeable,
        filter: cfg.filter.enabled.then_some((cfg.filter.x_cutoff, cfg.filter.sigma_cutoff)),
        solver: cfg.solver.options(),
        divergence_limit: cfg.solver.divergence_limit,
    }
}

pub fn run_bar_study(cfg: &ExperimentConfig, progress: Progress) -> Result<StudyResult> {
    let start = Instant::now();
    let sec = cfg.bar.clone().unwrap_or_default();
    let bc = bar_config(cfg);
    let tank = BarTank::new(bc)?;
    let per = sec.steps_per_period;
    let result = tank.run(|n, t| {
        if n % per == 0 {
            progress(&format!("bar: t = {t:.2} s"));
        }
    })?;
    let g = &result.gauges;
    let mut cols: Vec<String> = vec!["t".into()];
    cols.extend((1..=g.positions.len()).map(|i| format!("gauge_{i}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut gauges = Table::new("gauges", &col_refs);
    for (j, t) in g.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*t).into()];
        row.extend(g.series.iter().map(|s| Cell::from(s[j])));
        gauges.push(row);
    }
    let mut mass = Table::new("mass", &["t", "mass", "dmass_dt"]);
    for ((t, m), r) in result.mass.times.iter().zip(&result.mass.mass).zip(&result.mass.rate) {
        mass.push(vec![(*t).into(), (*m).into(), (*r).into()]);
    }
    let omega = result.wave.omega();
    let mut harmonics = Table::new(
        "harmonics",
        &["gauge", "x", "amplitude_1", "amplitude_2", "amplitude_3", "ratio_2", "ratio_3", "wave_height"],
    );
    for (i, (x, s)) in g.positions.iter().zip(&g.series).enumerate() {
        let a = harmonic_amplitudes(&g.times, s, omega, sec.analysis_periods, 3);
        let h = mean_wave_height(&g.times, s, sec.period, sec.analysis_periods);
        harmonics.push(vec![
            (i + 1).into(),
            (x - result.offset).into(),
            a[0].into(),
            a[1].into(),
            a[2].into(),
            (a[1] / a[0]).into(),
            (a[2] / a[0]).into(),
            h.into(),
        ]);
    }
    let m0 = result.mass.mass[0];
    let rate_max = result.mass.rate.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let sign_changes = result
        .mass
        .rate
        .windows(2)
        .skip(1)
        .filter(|w| w[0] * w[1] < 0.0)
        .count();
    let summary = json!({
        "domain_length": result.domain_length,
        "offset": result.offset,
        "wavelength": result.wave.length(),
        "dt": result.dt,
        "steps": result.steps,
        "pressure_iterations": result.iterations,
        "max_divergence": result.max_divergence,
        "gauge_positions": g.positions.iter().map(|x| x - result.offset).collect::<Vec<_>>(),
        "incident_height": harmonics.rows[0][7].as_f64(),
        "mass_initial": m0,
        "mass_drift": result.mass.secular_drift(per),
        "mass_excursion": result.mass.averaged_drift(per),
        "mass_rate_max_abs": rate_max,
        "mass_rate_sign_changes": sign_changes,
    });
    Ok(StudyResult {
        tables: vec![gauges, mass, harmonics],
        json_lines: Vec::new(),
        summary,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Pressure problem of the first stage of a step from a stream-function wave.
#[derive(Clone, Debug)]
pub struct BenchProblem {
    pub grid: Grid,
    pub geom_k: SigmaGeometry,
    pub geom_km1: SigmaGeometry,
    pub rhs: Field,
}

pub fn poisson_bench_problem(
    n: usize,
    m: usize,
    wave: &SteadyWave,
    dt_fraction: f64,
    consts: PhysicalConstants,
) -> specwave_core::Result<BenchProblem> {
    let grid = Grid::new(n, m, wave.length())?;
    let bathy = Bathymetry::flat(&grid, wave.depth)?;
    let state = wave_state(wave, &grid, &bathy, 0.0);
    let dt = dt_fraction * wave.period;
    let b = LserkScheme::carpenter_kennedy().b[0];
    let us = surface_row(&state.u);
    let ws = surface_row(&state.w);
    let eta_x = grid.dx_line(&state.eta, 1);
    let geom_km1 = compute_geometry(
        &grid,
        &bathy,
        &SurfaceState::new(&grid, state.eta.clone())?,
        SurfaceRate::Kinematic { u: &us, w: &ws },
    )?;
    let rate = surface_rhs(&us, &ws, &eta_x, ModelMode::Nonlinear);
    let eta_k: Vec<f64> = state.eta.iter().zip(&rate).map(|(e, r)| e + b * dt * r).collect();
    let geom_k = compute_geometry(&grid, &bathy, &SurfaceState::new(&grid, eta_k)?, SurfaceRate::Static)?;
    let (fu, fw) = explicit_forcing(&grid, &state.u, &state.w, &eta_x, &geom_km1, &consts, ModelMode::Nonlinear);
    let mut u_star = state.u.clone();
    let mut w_star = state.w.clone();
    u_star.scaled_add(b * dt, &fu);
    w_star.scaled_add(b * dt, &fw);
    let rhs = assemble_rhs(&grid, &geom_k, &u_star, &w_star, consts.rho / (b * dt));
    Ok(BenchProblem {
        grid,
        geom_k,
        geom_km1,
        rhs,
    })
}

/// One timed solve of a bench problem.
#[derive(Clone, Debug)]
pub struct BenchSolve {
    pub precond: CycleKind,
    pub tol: f64,
    pub iterations: usize,
    pub seconds: f64,
    pub setup_seconds: f64,
    pub true_residual: f64,
    /// `None` on success, otherwise the reason the solver stopped.
    pub failure: Option<String>,
}

/// Solves `problem` with the given preconditioner and tolerance. The
/// unpreconditioned solver runs without restarts up to `max_iter_none`.
pub fn bench_solve(
    problem: &BenchProblem,
    kind: CycleKind,
    tol: f64,
    solver: &SolverOptions,
    max_iter_none: usize,
) -> specwave_core::Result<BenchSolve> {
    let setup = Instant::now();
    let layout = std::sync::Arc::new(Layout::new(&problem.grid, solver.multigrid)?);
    let h = Hierarchy::new(layout, &problem.geom_k, &problem.geom_km1)?;
    let setup_seconds = if kind == CycleKind::None { 0.0 } else { setup.elapsed().as_secs_f64() };
    let opts = if kind == CycleKind::None {
        GmresOptions {
            tol,
            restart: max_iter_none,
            max_iter: max_iter_none,
            stagnation: max_iter_none,
        }
    } else {
        GmresOptions { tol, ..solver.gmres }
    };
    let mg = (kind != CycleKind::None).then_some(&h);
    let record = |stats: &SolverStats, failure: Option<String>| BenchSolve {
        precond: kind,
        tol,
        iterations: stats.iterations,
        seconds: stats.seconds,
        setup_seconds,
        true_residual: stats.true_residual,
        failure,
    };
    match solve(h.operator(0), &problem.rhs, None, kind, mg, &opts) {
        Ok((_, stats)) => Ok(record(&stats, None)),
        Err(specwave_core::Error::MaxIterations(stats)) => Ok(record(&stats, Some("iteration cap".into()))),
        Err(specwave_core::Error::Stagnation(stats)) => Ok(record(&stats, Some("stagnated".into()))),
        Err(e) => Err(e),
    }
}

pub fn run_poisson_bench(cfg: &ExperimentConfig, progress: Progress) -> Result<StudyResult> {
    let start = Instant::now();
    let sec = cfg.poisson_bench.clone().unwrap_or_default();
    let consts = cfg.physics.constants();
    let solver = cfg.solver.options();
    let wave = steady_wave_for(sec.kh, sec.steepness, sec.depth, sec.sf_modes, consts.g)?;
    let problem = poisson_bench_problem(sec.n, sec.m, &wave, sec.dt_fraction, consts)?;
    let mut table = Table::new(
        "poisson_bench",
        &["precond", "tol", "iterations", "seconds", "setup_seconds", "true_residual", "n", "m", "status"],
    );
    let mut lines: Vec<Value> = Vec::new();
    // timings are taken serially so that solves do not compete for cores
    for &p in &sec.preconds {
        let kind: CycleKind = p.into();
        for &tol in &sec.tols {
            let r = bench_solve(&problem, kind, tol, &solver, sec.max_iter_unpreconditioned)?;
            progress(&format!("poisson-bench {kind} tol={tol:e}: {} iterations", r.iterations));
            let st = match &r.failure {
                None => "ok".to_string(),
                Some(f) => format!("capped: {f}"),
            };
            lines.push(json!({
                "precond": kind.to_string(),
                "tol": tol,
                "iterations": r.iterations,
                "seconds": r.seconds,
                "N": sec.n,
                "M": sec.m,
            }));
            table.push(vec![
                kind.to_string().into(),
                tol.into(),
                r.iterations.into(),
                r.seconds.into(),
                r.setup_seconds.into(),
                r.true_residual.into(),
                sec.n.into(),
                sec.m.into(),
                st.into(),
            ]);
        }
    }
    Ok(StudyResult {
        summary: json!({ "wave_height": wave.height, "wavelength": wave.length() }),
        tables: vec![table],
        json_lines: vec![("poisson_bench".into(), lines)],
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
