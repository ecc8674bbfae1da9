//! Numerical wave tank: relaxation zones, gauges, mass diagnostics and the
//! submerged-bar experiment.

use std::f64::consts::PI;

use crate::dynamics::{BedCondition, FlowState, ModelMode, PhysicalConstants};
use crate::error::{Error, Result};
use crate::poisson::SolverOptions;
use crate::sigma::Bathymetry;
use crate::spectral::{FilterSpec, Grid};
use crate::time_integration::{LserkScheme, Stepper, StepperConfig};
use crate::waves::{stream_function_solve, MeanCurrent, SteadyWave, StreamFunctionOptions, WaveKinematics};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZoneKind {
    Generation,
    Absorption,
}

/// Blend weight `Γ(x̂) = 1 - (1 - x̂)^p`.
pub fn blend_weight(xhat: f64, exponent: f64) -> f64 {
    1.0 - (1.0 - xhat.clamp(0.0, 1.0)).powf(exponent)
}

/// Interval where the state is relaxed towards a target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationZone {
    pub start: f64,
    pub end: f64,
    pub kind: ZoneKind,
    /// True when the computational interior lies beyond `end`.
    pub interior_at_end: bool,
    pub exponent: f64,
}

impl RelaxationZone {
    pub fn new(start: f64, end: f64, kind: ZoneKind, interior_at_end: bool) -> Result<Self> {
        if !(end > start) {
            return Err(Error::InvalidParameter(format!(
                "relaxation zone [{start}, {end}] is empty"
            )));
        }
        Ok(Self {
            start,
            end,
            kind,
            interior_at_end,
            exponent: 3.0,
        })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// `Γ` at `x`, `None` outside the zone. `Γ = 1` at the interior edge.
    pub fn weight(&self, x: f64) -> Option<f64> {
        if x < self.start || x > self.end {
            return None;
        }
        let s = (x - self.start) / self.length();
        let xhat = if self.interior_at_end { s } else { 1.0 - s };
        Some(blend_weight(xhat, self.exponent))
    }
}

/// Generation and absorption zones with their targets.
pub struct Relaxation {
    pub zones: Vec<RelaxationZone>,
    pub wave: Option<Box<dyn WaveKinematics + Send + Sync>>,
    /// Duration of the smooth start-up of the generated wave.
    pub ramp: f64,
}

impl std::fmt::Debug for Relaxation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Relaxation")
            .field("zones", &self.zones)
            .field("ramp", &self.ramp)
            .finish()
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

impl Relaxation {
    fn ramp_factor(&self, t: f64) -> f64 {
        if self.ramp > 0.0 {
            smoothstep(t / self.ramp)
        } else {
            1.0
        }
    }

    /// `q ← Γ q + (1 - Γ) q_target` for `u`, `w`, `η` in every zone.
    pub fn apply(&self, grid: &Grid, h: &[f64], state: &mut FlowState) {
        let t = state.t;
        let r = self.ramp_factor(t);
        let sigma = grid.z.sigma();
        for (i, &x) in grid.x.nodes().iter().enumerate() {
            for zone in &self.zones {
                let Some(gamma) = zone.weight(x) else { continue };
                let keep = 1.0 - gamma;
                match (zone.kind, &self.wave) {
                    (ZoneKind::Generation, Some(wave)) => {
                        let eta_t = wave.elevation(x, t);
                        let d = h[i] + eta_t;
                        state.eta[i] = gamma * state.eta[i] + keep * r * eta_t;
                        for (m, s) in sigma.iter().enumerate() {
                            let (ut, wt) = wave.velocity(x, -h[i] + s * d, t);
                            state.u[[i, m]] = gamma * state.u[[i, m]] + keep * r * ut;
                            state.w[[i, m]] = gamma * state.w[[i, m]] + keep * r * wt;
                        }
                    }
                    _ => {
                        state.eta[i] *= gamma;
                        state.u.row_mut(i).mapv_inplace(|v| v * gamma);
                        state.w.row_mut(i).mapv_inplace(|v| v * gamma);
                    }
                }
            }
        }
    }
}

/// Free-surface gauges sampled by spectral interpolation.
#[derive(Clone, Debug, Default)]
pub struct GaugeSet {
    pub positions: Vec<f64>,
    pub times: Vec<f64>,
    /// One series per gauge.
    pub series: Vec<Vec<f64>>,
}

impl GaugeSet {
    pub fn new(positions: Vec<f64>, domain: f64) -> Result<Self> {
        if let Some(x) = positions.iter().find(|x| !(**x >= 0.0 && **x < domain)) {
            return Err(Error::InvalidParameter(format!(
                "gauge at x = {x} lies outside the domain [0, {domain})"
            )));
        }
        let series = vec![Vec::new(); positions.len()];
        Ok(Self {
            positions,
            times: Vec::new(),
            series,
        })
    }

    pub fn record(&mut self, grid: &Grid, t: f64, eta: &[f64]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidParameter(format!(
                    "gauge time {t} does not increase past {last}"
                )));
            }
        }
        let coeffs = grid.x.coefficients(eta);
        for (s, &x) in self.series.iter_mut().zip(&self.positions) {
            s.push(grid.x.evaluate_coefficients(&coeffs, x));
        }
        self.times.push(t);
        Ok(())
    }
}

/// Water volume per unit width, `L · mean(h + η)`.
pub fn mass(grid: &Grid, h: &[f64], eta: &[f64]) -> f64 {
    let s: f64 = h.iter().zip(eta).map(|(a, b)| a + b).sum();
    grid.x.length() * s / h.len() as f64
}

/// Mass and its finite-difference rate.
#[derive(Clone, Debug, Default)]
pub struct MassSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub rate: Vec<f64>,
}

impl MassSeries {
    pub fn push(&mut self, t: f64, m: f64) {
        let rate = match (self.times.last(), self.mass.last()) {
            (Some(t0), Some(m0)) => (m - m0) / (t - t0),
            _ => 0.0,
        };
        self.times.push(t);
        self.mass.push(m);
        self.rate.push(rate);
    }

    /// Largest deviation of the running average over `window` samples from
    /// the first full window, relative to the initial mass.
    pub fn averaged_drift(&self, window: usize) -> f64 {
        if self.mass.is_empty() || window == 0 || self.mass.len() < window {
            return 0.0;
        }
        let avg = |s: usize| self.mass[s..s + window].iter().sum::<f64>() / window as f64;
        let first = avg(0);
        (0..=self.mass.len() - window)
            .map(|s| (avg(s) - first).abs())
            .fold(0.0, f64::max)
            / self.mass[0]
    }

    /// Net change between the first and last `window`-sample averages,
    /// relative to the initial mass. Periodic zone oscillations average out
    /// when `window` spans one wave period.
    pub fn secular_drift(&self, window: usize) -> f64 {
        if self.mass.is_empty() || window == 0 || self.mass.len() < window {
            return 0.0;
        }
        let avg = |s: usize| self.mass[s..s + window].iter().sum::<f64>() / window as f64;
        (avg(self.mass.len() - window) - avg(0)) / self.mass[0]
    }
}

/// Submerged bar: 1:20 up-slope, flat crest, 1:10 down-slope, with corners
/// smoothed over `smoothing` so that `∂²h/∂x²` stays bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarBathymetry {
    pub offshore_depth: f64,
    pub up_start: f64,
    pub up_end: f64,
    pub crest_depth: f64,
    pub crest_end: f64,
    pub down_end: f64,
    pub smoothing: f64,
}

impl Default for BarBathymetry {
    fn default() -> Self {
        Self {
            offshore_depth: 0.4,
            up_start: 6.0,
            up_end: 12.0,
            crest_depth: 0.1,
            crest_end: 14.0,
            down_end: 17.0,
            smoothing: 0.2,
        }
    }
}

/// `∫ S` of the quintic smoothstep, a C³ rounded `max(y, 0)` of width `w`.
fn smooth_ramp(y: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return y.max(0.0);
    }
    let t = (y + 0.5 * w) / w;
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        y
    } else {
        w * t * t * t * t * (t * t - 3.0 * t + 2.5)
    }
}

impl BarBathymetry {
    pub fn validate(&self) -> Result<()> {
        let ok = self.offshore_depth > self.crest_depth
            && self.crest_depth > 0.0
            && self.up_start < self.up_end
            && self.up_end < self.crest_end
            && self.crest_end < self.down_end
            && self.smoothing >= 0.0
            && self.smoothing < (self.up_end - self.up_start).min(self.crest_end - self.up_end);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("inconsistent bar geometry {self:?}")))
        }
    }

    pub fn depth(&self, x: f64) -> f64 {
        let rise = self.offshore_depth - self.crest_depth;
        let s_up = rise / (self.up_end - self.up_start);
        let s_down = rise / (self.down_end - self.crest_end);
        let w = self.smoothing;
        self.offshore_depth - s_up * smooth_ramp(x - self.up_start, w)
            + s_up * smooth_ramp(x - self.up_end, w)
            + s_down * smooth_ramp(x - self.crest_end, w)
            - s_down * smooth_ramp(x - self.down_end, w)
    }
}

/// Parameters of the submerged-bar run.
#[derive(Clone, Debug)]
pub struct BarConfig {
    pub height: f64,
    pub period: f64,
    pub bar: BarBathymetry,
    /// Domain length in incident wavelengths.
    pub wavelengths: usize,
    /// Start of the absorption zone in bar coordinates.
    pub absorption_start: f64,
    /// Gauge positions in bar coordinates.
    pub gauges: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub steps_per_period: usize,
    pub duration: f64,
    pub ramp_periods: f64,
    pub sf_modes: usize,
    /// Mean-current condition of the generated wave.
    pub current: MeanCurrent,
    pub consts: PhysicalConstants,
    pub bed: BedCondition,
    pub filter: Option<(f64, f64)>,
    pub solver: SolverOptions,
    pub divergence_limit: f64,
}

impl Default for BarConfig {
    fn default() -> Self {
        Self {
            height: 0.02,
            period: 2.02,
            bar: BarBathymetry::default(),
            wavelengths: 9,
            absorption_start: 20.0,
            gauges: vec![5.7, 10.5, 12.5, 13.5, 14.5, 15.7, 17.3],
            n: 404,
            m: 12,
            steps_per_period: 40,
            duration: 40.0,
            ramp_periods: 2.0,
            sf_modes: 32,
            current: MeanCurrent::Eulerian,
            consts: PhysicalConstants::default(),
            bed: BedCondition::Impermeable,
            filter: Some((0.5, 0.9)),
            solver: SolverOptions::default(),
            divergence_limit: 1e-6,
        }
    }
}

/// Output of the submerged-bar run.
#[derive(Debug)]
pub struct BarResult {
    pub gauges: GaugeSet,
    pub mass: MassSeries,
    pub wave: SteadyWave,
    pub domain_length: f64,
    /// Shift between tank and bar coordinates.
    pub offset: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_divergence: f64,
    pub iterations: usize,
}

/// Builds tank geometry, zones and stepper for the bar run.
pub struct BarTank {
    pub config: BarConfig,
    pub wave: SteadyWave,
    pub grid: Grid,
    pub bathy: Bathymetry,
    pub relaxation: Relaxation,
    pub stepper: Stepper,
    pub offset: f64,
}

impl BarTank {
    pub fn new(config: BarConfig) -> Result<Self> {
        config.bar.validate()?;
        let h0 = config.bar.offshore_depth;
        let wave = stream_function_solve(
            config.height,
            h0,
            config.period,
            StreamFunctionOptions {
                modes: config.sf_modes,
                current: config.current,
                g: config.consts.g,
                ..Default::default()
            },
        )?;
        let l = wave.length();
        let domain = config.wavelengths as f64 * l;
        let offset = l;
        let absorb_start = offset + config.absorption_start;
        let absorb_end = domain - l;
        if !(absorb_end - absorb_start >= 0.999 * l) || offset + config.bar.down_end >= absorb_start {
            return Err(Error::InvalidParameter(format!(
                "domain of {} wavelengths leaves no room for a one-wavelength absorption zone",
                config.wavelengths
            )));
        }
        let grid = Grid::new(config.n, config.m, domain)?;
        let bar = config.bar;
        let bathy = Bathymetry::from_fn(&grid, |x| bar.depth(x - offset))?;
        let zones = vec![
            RelaxationZone::new(0.0, l, ZoneKind::Generation, true)?,
            RelaxationZone::new(absorb_start, absorb_end, ZoneKind::Absorption, false)?,
            RelaxationZone::new(absorb_end, domain, ZoneKind::Generation, false)?,
        ];
        let relaxation = Relaxation {
            zones,
            wave: Some(Box::new(wave.clone())),
            ramp: config.ramp_periods * config.period,
        };
        let filter = match config.filter {
            Some((fx, fz)) => Some((
                FilterSpec::with_fraction(grid.x.max_mode(), fx, 36.0, 2.0)?,
                FilterSpec::with_fraction(config.m, fz, 36.0, 2.0)?,
            )),
            None => None,
        };
        let stepper = Stepper::new(
            grid.clone(),
            bathy.clone(),
            LserkScheme::carpenter_kennedy(),
            StepperConfig {
                dt: config.period / config.steps_per_period as f64,
                mode: ModelMode::Nonlinear,
                bed: config.bed,
                consts: config.consts,
                filter,
                divergence_limit: config.divergence_limit,
                solver: config.solver,
            },
        )?;
        Ok(Self {
            config,
            wave,
            grid,
            bathy,
            relaxation,
            stepper,
            offset,
        })
    }

    /// Runs to `config.duration`, calling `progress(step, t)` after each step.
    pub fn run<F: FnMut(usize, f64)>(mut self, mut progress: F) -> Result<BarResult> {
        let grid = self.grid.clone();
        let positions: Vec<f64> = self.config.gauges.iter().map(|x| x + self.offset).collect();
        let mut gauges = GaugeSet::new(positions, grid.x.length())?;
        let mut masses = MassSeries::default();
        let mut state = FlowState::rest(&grid);
        gauges.record(&grid, 0.0, &state.eta)?;
        masses.push(0.0, mass(&grid, &self.bathy.h, &state.eta));
        let dt = self.stepper.config.dt;
        let steps = (self.config.duration / dt).round() as usize;
        let (mut max_div, mut iters) = (0.0f64, 0usize);
        for n in 1..=steps {
            let last_t = state.t;
            let diag = self.stepper.step(&mut state).map_err(|e| match e {
                Error::Unstable { .. } => Error::Unstable { time: last_t },
                other => other,
            })?;
            self.relaxation.apply(&grid, &self.bathy.h, &mut state);
            if !state.is_finite() {
                return Err(Error::Unstable { time: last_t });
            }
            max_div = max_div.max(diag.max_divergence());
            iters += diag.iterations();
            gauges.record(&grid, state.t, &state.eta)?;
            masses.push(state.t, mass(&grid, &self.bathy.h, &state.eta));
            progress(n, state.t);
        }
        Ok(BarResult {
            gauges,
            mass: masses,
            domain_length: grid.x.length(),
            offset: self.offset,
            wave: self.wave,
            dt,
            steps,
            max_divergence: max_div,
            iterations: iters,
        })
    }
}

/// Amplitudes of the first `harmonics` multiples of `omega` in a uniformly
/// sampled series, fitted over whole periods at its end.
pub fn harmonic_amplitudes(times: &[f64], series: &[f64], omega: f64, periods: usize, harmonics: usize) -> Vec<f64> {
    let period = 2.0 * PI / omega;
    let t_end = *times.last().unwrap_or(&0.0);
    let t0 = t_end - periods as f64 * period;
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] > t0 + 1e-12).collect();
    let n = idx.len().max(1) as f64;
    (1..=harmonics)
        .map(|j| {
            let (mut a, mut b) = (0.0, 0.0);
            for &i in &idx {
                let ph = j as f64 * omega * times[i];
                a += series[i] * ph.cos();
                b += series[i] * ph.sin();
            }
            2.0 * (a * a + b * b).sqrt() / n
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn blend_endpoints() {
        assert_eq!(blend_weight(0.0, 3.0), 0.0);
        assert_eq!(blend_weight(1.0, 3.0), 1.0);
        let mut prev = 0.0;
        for i in 1..=100 {
            let g = blend_weight(i as f64 / 100.0, 3.0);
            assert!(g >= prev);
            prev = g;
        }
        let z = RelaxationZone::new(2.0, 4.0, ZoneKind::Absorption, false).unwrap();
        assert_eq!(z.weight(2.0), Some(1.0));
        assert_eq!(z.weight(4.0), Some(0.0));
        assert_eq!(z.weight(5.0), None);
    }

    #[test]
    fn bar_profile() {
        let b = BarBathymetry::default();
        assert_abs_diff_eq!(b.depth(0.0), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(b.depth(9.0), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(b.depth(13.0), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(b.depth(15.5), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(b.depth(25.0), 0.4, epsilon = 1e-12);
        // continuity across the smoothed corner
        let e = 1e-7;
        assert!((b.depth(12.1 - e) - b.depth(12.1 + e)).abs() < 1e-8);
        assert!(b.validate().is_ok());
    }

    #[test]
    fn mass_of_still_water() {
        let grid = Grid::new(8, 4, 3.0).unwrap();
        let h: Vec<f64> = grid.x.nodes().iter().map(|x| 1.0 + 0.1 * (2.0 * PI * x / 3.0).cos()).collect();
        assert_abs_diff_eq!(mass(&grid, &h, &vec![0.0; 9]), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn harmonic_fit() {
        let omega = 2.0;
        let times: Vec<f64> = (0..400).map(|i| i as f64 * 0.01 * PI).collect();
        let s: Vec<f64> = times.iter().map(|t| 0.5 * (omega * t).cos() + 0.1 * (2.0 * omega * t + 0.3).sin()).collect();
        let a = harmonic_amplitudes(&times, &s, omega, 3, 3);
        assert_abs_diff_eq!(a[0], 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(a[1], 0.1, epsilon = 1e-3);
        assert!(a[2] < 1e-3);
    }
}
