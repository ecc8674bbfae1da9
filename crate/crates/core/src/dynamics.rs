//! Right-hand sides of the σ-transformed momentum equations and the
//! kinematic free-surface condition.
//!
//! Gravity and the vertical static-pressure gradient cancel analytically, so
//! only `g ∂η/∂x` of the static split enters the horizontal equation.

use crate::error::{Error, Result};
use crate::sigma::SigmaGeometry;
use crate::spectral::{bed_row, surface_row, Field, Grid};
use crate::waves::GRAVITY;

/// Gravity, density and kinematic viscosity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub g: f64,
    pub rho: f64,
    pub nu: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            g: GRAVITY,
            rho: 1000.0,
            nu: 1e-6,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.rho > 0.0 && self.nu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "constants must be positive: g = {}, rho = {}, nu = {}",
                self.g, self.rho, self.nu
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelMode {
    Nonlinear,
    /// Small-amplitude equations on the still-water geometry.
    Linearized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BedCondition {
    /// `u · n = 0`, tangential slip allowed.
    Impermeable,
    NoSlip,
}

/// Velocities, dynamic pressure and surface elevation at time `t`.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub u: Field,
    pub w: Field,
    pub p: Field,
    pub eta: Vec<f64>,
    pub t: f64,
}

impl FlowState {
    pub fn rest(grid: &Grid) -> Self {
        Self {
            u: grid.zeros(),
            w: grid.zeros(),
            p: grid.zeros(),
            eta: vec![0.0; grid.x.len()],
            t: 0.0,
        }
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        grid.check(&self.u)?;
        grid.check(&self.w)?;
        grid.check(&self.p)?;
        if self.eta.len() != grid.x.len() {
            return Err(Error::LengthMismatch {
                expected: grid.x.len(),
                got: self.eta.len(),
            });
        }
        if let Some(index) = self.eta.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "eta", index });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.w.iter()).chain(self.eta.iter()).all(|v| v.is_finite())
    }
}

/// Momentum forcing without the dynamic-pressure gradient: advection,
/// horizontal static-pressure gradient and viscosity.
pub fn explicit_forcing(
    grid: &Grid,
    u: &Field,
    w: &Field,
    eta_x: &[f64],
    geom: &SigmaGeometry,
    consts: &PhysicalConstants,
    mode: ModelMode,
) -> (Field, Field) {
    let (nx, nz) = grid.shape();
    let mut fu = grid.zeros();
    let mut fw = grid.zeros();
    if consts.nu > 0.0 {
        fu = geom.laplacian(grid, u);
        fw = geom.laplacian(grid, w);
        fu.mapv_inplace(|v| v * consts.nu);
        fw.mapv_inplace(|v| v * consts.nu);
    }
    for i in 0..nx {
        let gx = consts.g * eta_x[i];
        for m in 0..nz {
            fu[[i, m]] -= gx;
        }
    }
    if mode == ModelMode::Nonlinear {
        let ws = geom.w_sigma(u, w);
        let ux = grid.dx(u);
        let us = grid.ds(u);
        let wx = grid.dx(w);
        let wsig = grid.ds(w);
        for i in 0..nx {
            for m in 0..nz {
                let (a, b) = (u[[i, m]], ws[[i, m]]);
                fu[[i, m]] -= a * ux[[i, m]] + b * us[[i, m]];
                fw[[i, m]] -= a * wx[[i, m]] + b * wsig[[i, m]];
            }
        }
    }
    (fu, fw)
}

/// Full momentum tendency including `-(1/ρ) ∇_σ p_D`.
pub fn momentum_rhs(
    grid: &Grid,
    state: &FlowState,
    geom: &SigmaGeometry,
    consts: &PhysicalConstants,
    mode: ModelMode,
) -> (Field, Field) {
    let eta_x = grid.dx_line(&state.eta, 1);
    let (mut fu, mut fw) = explicit_forcing(grid, &state.u, &state.w, &eta_x, geom, consts, mode);
    let (px, pz) = geom.gradient(grid, &state.p);
    fu.scaled_add(-1.0 / consts.rho, &px);
    fw.scaled_add(-1.0 / consts.rho, &pz);
    (fu, fw)
}

/// `∂η/∂t` from the surface traces.
pub fn surface_rhs(u_surf: &[f64], w_surf: &[f64], eta_x: &[f64], mode: ModelMode) -> Vec<f64> {
    match mode {
        ModelMode::Linearized => w_surf.to_vec(),
        ModelMode::Nonlinear => w_surf
            .iter()
            .zip(u_surf)
            .zip(eta_x)
            .map(|((w, u), e)| w - u * e)
            .collect(),
    }
}

/// `∂η/∂t` of a state.
pub fn surface_rate(grid: &Grid, state: &FlowState, mode: ModelMode) -> Vec<f64> {
    let eta_x = grid.dx_line(&state.eta, 1);
    surface_rhs(&surface_row(&state.u), &surface_row(&state.w), &eta_x, mode)
}

/// Imposes the bed condition on the bed row; `hx` is the bed slope.
pub fn bottom_bc_apply(u: &mut Field, w: &mut Field, hx: &[f64], kind: BedCondition) {
    let bed = u.ncols() - 1;
    for (i, s) in hx.iter().enumerate() {
        match kind {
            BedCondition::NoSlip => {
                u[[i, bed]] = 0.0;
                w[[i, bed]] = 0.0;
            }
            BedCondition::Impermeable => {
                // bed z = -h(x) has normal (h_x, 1)
                let n2 = s * s + 1.0;
                let un = (u[[i, bed]] * s + w[[i, bed]]) / n2;
                u[[i, bed]] -= un * s;
                w[[i, bed]] -= un;
            }
        }
    }
}

/// Normal velocity `u h_x + w` along the bed.
pub fn bed_normal_flux(u: &Field, w: &Field, hx: &[f64]) -> Vec<f64> {
    bed_row(u)
        .iter()
        .zip(bed_row(w))
        .zip(hx)
        .map(|((a, b), s)| a * s + b)
        .collect()
}
