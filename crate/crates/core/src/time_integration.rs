//! Low-storage explicit Runge–Kutta stepping with a pressure projection at
//! every stage.
//!
//! Per stage `k`: the surface is advanced first (it needs no pressure), the
//! mixed-stage Poisson problem is solved with the stage-`k` geometry in the
//! outer divergence and the stage-`k-1` geometry in the inner gradient, the
//! velocity is updated and finally the filter and the bed condition are applied.

use crate::dynamics::{
    bottom_bc_apply, explicit_forcing, surface_rhs, BedCondition, FlowState, ModelMode,
    PhysicalConstants,
};
use crate::error::{Error, Result};
use crate::poisson::{assemble_rhs, PoissonSolver, SolverOptions, SolverStats};
use crate::sigma::{compute_geometry, Bathymetry, SigmaGeometry, SurfaceRate, SurfaceState};
use crate::spectral::{surface_row, Field, FilterSpec, Grid};

/// Coefficients of a low-storage scheme `K = a_k K + Δt f`, `y += b_k K`.
#[derive(Clone, Debug, PartialEq)]
pub struct LserkScheme {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl LserkScheme {
    /// Five-stage fourth-order scheme of Carpenter and Kennedy.
    pub fn carpenter_kennedy() -> Self {
        Self {
            a: vec![
                0.0,
                -567301805773.0 / 1357537059087.0,
                -2404267990393.0 / 2016746695238.0,
                -3550918686646.0 / 2091501179385.0,
                -1275806237668.0 / 842570457699.0,
            ],
            b: vec![
                1432997174477.0 / 9575080441755.0,
                5161836677717.0 / 13612068292357.0,
                1720146321549.0 / 2090206949498.0,
                3134564353537.0 / 4481467310338.0,
                2277821191437.0 / 14882151754819.0,
            ],
            c: vec![
                0.0,
                1432997174477.0 / 9575080441755.0,
                2526269341429.0 / 6820363183093.0,
                2006345519317.0 / 3224310063776.0,
                2802321613138.0 / 2924317926251.0,
            ],
        }
    }

    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() || a.len() != c.len() {
            return Err(Error::InvalidParameter(
                "LSERK coefficient arrays must be non-empty and of equal length".into(),
            ));
        }
        if a[0] != 0.0 {
            return Err(Error::InvalidParameter("first LSERK coefficient a_1 must be 0".into()));
        }
        if b.iter().any(|v| *v == 0.0) {
            return Err(Error::InvalidParameter("LSERK coefficients b_k must be nonzero".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    /// Integrates `y' = f(t, y)` for `steps` steps of size `dt`.
    pub fn integrate<F>(&self, mut f: F, y0: &[f64], t0: f64, dt: f64, steps: usize) -> Vec<f64>
    where
        F: FnMut(f64, &[f64]) -> Vec<f64>,
    {
        let mut y = y0.to_vec();
        let mut k = vec![0.0; y.len()];
        for n in 0..steps {
            let t = t0 + n as f64 * dt;
            for s in 0..self.stages() {
                let r = f(t + self.c[s] * dt, &y);
                for ((ki, yi), ri) in k.iter_mut().zip(y.iter_mut()).zip(r) {
                    *ki = self.a[s] * *ki + dt * ri;
                    *yi += self.b[s] * *ki;
                }
            }
        }
        y
    }
}

/// Stepper settings.
#[derive(Clone, Debug)]
pub struct StepperConfig {
    pub dt: f64,
    pub mode: ModelMode,
    pub bed: BedCondition,
    pub consts: PhysicalConstants,
    /// Horizontal and vertical filters, applied after each stage.
    pub filter: Option<(FilterSpec, FilterSpec)>,
    /// Largest accepted scaled stage divergence.
    pub divergence_limit: f64,
    pub solver: SolverOptions,
}

/// Record of one stage.
#[derive(Clone, Debug)]
pub struct StageDiagnostics {
    /// `‖∇_σ·u‖∞` over interior nodes, scaled by the velocity-gradient size.
    pub divergence: f64,
    pub solver: SolverStats,
    /// Squared nodal norm removed by the filter from `u`, `w`, `η`.
    pub filtered: [f64; 3],
}

#[derive(Clone, Debug, Default)]
pub struct StepDiagnostics {
    pub stages: Vec<StageDiagnostics>,
}

impl StepDiagnostics {
    pub fn max_divergence(&self) -> f64 {
        self.stages.iter().map(|s| s.divergence).fold(0.0, f64::max)
    }

    pub fn iterations(&self) -> usize {
        self.stages.iter().map(|s| s.solver.iterations).sum()
    }
}

/// Scaled interior divergence of `(u, w)` in geometry `geom`.
pub fn scaled_divergence(grid: &Grid, geom: &SigmaGeometry, u: &Field, w: &Field) -> f64 {
    let div = geom.divergence(grid, u, w);
    let ux = grid.dx(u);
    let ws = grid.ds(w);
    let (nx, nz) = grid.shape();
    let (mut dmax, mut scale) = (0.0f64, 0.0f64);
    for i in 0..nx {
        for m in 0..nz {
            scale = scale.max(ux[[i, m]].abs()).max((ws[[i, m]] * geom.dsdz[i]).abs());
            if m > 0 && m + 1 < nz {
                dmax = dmax.max(div[[i, m]].abs());
            }
        }
    }
    if scale > 0.0 {
        dmax / scale
    } else {
        dmax
    }
}

fn filter_field(grid: &Grid, f: &mut Field, spec: &(FilterSpec, FilterSpec)) -> f64 {
    let before: f64 = f.iter().map(|v| v * v).sum();
    grid.filter(f, &spec.0, &spec.1);
    before - f.iter().map(|v| v * v).sum::<f64>()
}

/// Advances a [`FlowState`] by whole time steps.
#[derive(Debug)]
pub struct Stepper {
    pub grid: Grid,
    pub bathy: Bathymetry,
    pub scheme: LserkScheme,
    pub config: StepperConfig,
    solver: PoissonSolver,
    still: SigmaGeometry,
}

impl Stepper {
    pub fn new(grid: Grid, bathy: Bathymetry, scheme: LserkScheme, config: StepperConfig) -> Result<Self> {
        if !(config.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", config.dt)));
        }
        config.consts.validate()?;
        let mut solver = PoissonSolver::new(&grid, config.solver)?;
        let still = SigmaGeometry::still(&grid, &bathy)?;
        if config.mode == ModelMode::Linearized {
            solver.prepare(&still, &still)?;
            solver.freeze(true);
        }
        Ok(Self {
            grid,
            bathy,
            scheme,
            config,
            solver,
            still,
        })
    }

    pub fn solver(&self) -> &PoissonSolver {
        &self.solver
    }

    /// Geometry of a state, with `∂σ/∂t` from the kinematic condition.
    pub fn geometry(&self, state: &FlowState) -> Result<SigmaGeometry> {
        if self.config.mode == ModelMode::Linearized {
            return Ok(self.still.clone());
        }
        let surf = SurfaceState::new(&self.grid, state.eta.clone())?;
        let us = surface_row(&state.u);
        let ws = surface_row(&state.w);
        compute_geometry(&self.grid, &self.bathy, &surf, SurfaceRate::Kinematic { u: &us, w: &ws })
    }

    /// One step of size `config.dt`.
    pub fn step(&mut self, state: &mut FlowState) -> Result<StepDiagnostics> {
        let dt = self.config.dt;
        let rho = self.config.consts.rho;
        let mode = self.config.mode;
        let grid = self.grid.clone();
        let mut ku = grid.zeros();
        let mut kw = grid.zeros();
        let mut keta = vec![0.0; grid.x.len()];
        let mut diag = StepDiagnostics::default();
        for s in 0..self.scheme.stages() {
            let (a, b) = (self.scheme.a[s], self.scheme.b[s]);
            let geom_prev = self.geometry(state)?;
            let eta_x = grid.dx_line(&state.eta, 1);
            let rate = surface_rhs(&surface_row(&state.u), &surface_row(&state.w), &eta_x, mode);
            for ((k, e), r) in keta.iter_mut().zip(state.eta.iter_mut()).zip(&rate) {
                *k = a * *k + dt * r;
                *e += b * *k;
            }
            let geom_next = if mode == ModelMode::Linearized {
                self.still.clone()
            } else {
                let surf = SurfaceState::new(&grid, state.eta.clone())?;
                compute_geometry(&grid, &self.bathy, &surf, SurfaceRate::Static)?
            };
            let (fu, fw) = explicit_forcing(
                &grid,
                &state.u,
                &state.w,
                &eta_x,
                &geom_prev,
                &self.config.consts,
                mode,
            );
            // provisional velocity u* = u + b (a K + Δt F)
            ku.mapv_inplace(|v| a * v);
            kw.mapv_inplace(|v| a * v);
            ku.scaled_add(dt, &fu);
            kw.scaled_add(dt, &fw);
            let mut us = state.u.clone();
            let mut ws = state.w.clone();
            us.scaled_add(b, &ku);
            ws.scaled_add(b, &kw);
            let scale = rho / (b * dt);
            let rhs = assemble_rhs(&grid, &geom_next, &us, &ws, scale);
            self.solver.prepare(&geom_next, &geom_prev)?;
            let (p, stats) = self.solver.solve(&rhs, Some(&state.p))?;
            let (gx, gz) = self.solver.operator().gradient(&p);
            ku.scaled_add(-dt / rho, &gx);
            kw.scaled_add(-dt / rho, &gz);
            us.scaled_add(-b * dt / rho, &gx);
            ws.scaled_add(-b * dt / rho, &gz);
            let divergence = scaled_divergence(&grid, &geom_next, &us, &ws);
            state.u = us;
            state.w = ws;
            state.p = p;
            let mut filtered = [0.0; 3];
            if let Some(spec) = &self.config.filter {
                filtered[0] = filter_field(&grid, &mut state.u, spec);
                filtered[1] = filter_field(&grid, &mut state.w, spec);
                let before: f64 = state.eta.iter().map(|v| v * v).sum();
                grid.filter_line(&mut state.eta, &spec.0);
                filtered[2] = before - state.eta.iter().map(|v| v * v).sum::<f64>();
            }
            // after the filter, so the bed condition holds exactly
            bottom_bc_apply(&mut state.u, &mut state.w, &self.bathy.hx, self.config.bed);
            diag.stages.push(StageDiagnostics {
                divergence,
                solver: stats,
                filtered,
            });
            if divergence > self.config.divergence_limit {
                return Err(Error::Divergence {
                    stage: s + 1,
                    divergence,
                    tolerance: self.config.divergence_limit,
                });
            }
        }
        state.t += dt;
        if !state.is_finite() {
            return Err(Error::Unstable { time: state.t });
        }
        Ok(diag)
    }
}

/// Advective time-step estimate `safety · min(spacing / (|u| + √(g d_max)))`.
pub fn cfl_timestep(grid: &Grid, state: &FlowState, bathy: &Bathymetry, g: f64, safety: f64) -> Result<f64> {
    let d: Vec<f64> = bathy.h.iter().zip(&state.eta).map(|(h, e)| h + e).collect();
    if let Some((index, &depth)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::DryNode { index, depth });
    }
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    let c = (g * dmax).sqrt();
    let sigma = grid.z.sigma();
    let nz = sigma.len();
    let ds: Vec<f64> = (0..nz)
        .map(|m| {
            let up = if m > 0 { sigma[m - 1] - sigma[m] } else { f64::INFINITY };
            let down = if m + 1 < nz { sigma[m] - sigma[m + 1] } else { f64::INFINITY };
            up.min(down)
        })
        .collect();
    let dx = grid.x.spacing();
    let mut dt = f64::INFINITY;
    for (i, di) in d.iter().enumerate() {
        for m in 0..nz {
            let speed = state.u[[i, m]].hypot(state.w[[i, m]]) + c;
            dt = dt.min(dx.min(ds[m] * di) / speed);
        }
    }
    Ok(safety * dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_shape() {
        let s = LserkScheme::carpenter_kennedy();
        assert_eq!(s.stages(), 5);
        assert_eq!(s.a[0], 0.0);
        assert!(LserkScheme::new(vec![0.1], vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn integrates_exponential() {
        let s = LserkScheme::carpenter_kennedy();
        let y = s.integrate(|_, y| vec![-y[0]], &[1.0], 0.0, 0.01, 100);
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn time_dependent_forcing() {
        // y' = cos t  →  y = sin t
        let s = LserkScheme::carpenter_kennedy();
        let y = s.integrate(|t, _| vec![t.cos()], &[0.0], 0.0, 0.01, 150);
        assert!((y[0] - 1.5f64.sin()).abs() < 1e-10);
    }
}
