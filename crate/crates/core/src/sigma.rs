//! Geometry of the σ-transformed domain `σ = (z + h) / (h + η)`.
//!
//! Horizontal quantities (`h`, `η`, `d`) are stored per horizontal node; the
//! σ-dependent metric coefficients are full nodal fields.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Still-water depth and its spectral derivatives.
#[derive(Clone, Debug)]
pub struct Bathymetry {
    pub h: Vec<f64>,
    pub hx: Vec<f64>,
    pub hxx: Vec<f64>,
}

impl Bathymetry {
    pub fn new(grid: &Grid, h: Vec<f64>) -> Result<Self> {
        if h.len() != grid.x.len() {
            return Err(Error::LengthMismatch {
                expected: grid.x.len(),
                got: h.len(),
            });
        }
        if let Some((index, &depth)) = h.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            return Err(Error::DryNode { index, depth });
        }
        let hx = grid.x.diff(&h, 1)?;
        let hxx = grid.x.diff(&h, 2)?;
        Ok(Self { h, hx, hxx })
    }

    pub fn flat(grid: &Grid, depth: f64) -> Result<Self> {
        Self::new(grid, vec![depth; grid.x.len()])
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid, depth: F) -> Result<Self> {
        Self::new(grid, grid.x.nodes().iter().map(|&x| depth(x)).collect())
    }

    pub fn is_flat(&self) -> bool {
        self.h.iter().all(|v| *v == self.h[0])
    }
}

/// Free-surface elevation and its spectral derivatives.
#[derive(Clone, Debug)]
pub struct SurfaceState {
    pub eta: Vec<f64>,
    pub eta_x: Vec<f64>,
    pub eta_xx: Vec<f64>,
}

impl SurfaceState {
    pub fn new(grid: &Grid, eta: Vec<f64>) -> Result<Self> {
        let eta_x = grid.x.diff(&eta, 1)?;
        let eta_xx = grid.x.diff(&eta, 2)?;
        Ok(Self { eta, eta_x, eta_xx })
    }

    pub fn still(grid: &Grid) -> Self {
        let n = grid.x.len();
        Self {
            eta: vec![0.0; n],
            eta_x: vec![0.0; n],
            eta_xx: vec![0.0; n],
        }
    }
}

/// Source of the water-column rate `∂d/∂t` entering `∂σ/∂t`.
#[derive(Clone, Copy, Debug)]
pub enum SurfaceRate<'a> {
    /// Frozen column, `∂d/∂t = 0`.
    Static,
    /// Prescribed `∂d/∂t` per horizontal node.
    Given(&'a [f64]),
    /// Kinematic condition from the surface velocity traces.
    Kinematic { u: &'a [f64], w: &'a [f64] },
}

/// Metric coefficients of the σ-transform at one time level.
#[derive(Clone, Debug)]
pub struct SigmaGeometry {
    pub h: Vec<f64>,
    pub hx: Vec<f64>,
    pub eta: Vec<f64>,
    /// Water-column height `d = h + η`.
    pub d: Vec<f64>,
    pub dx: Vec<f64>,
    pub dt: Vec<f64>,
    /// `∂σ/∂z = 1/d`, independent of σ.
    pub dsdz: Vec<f64>,
    pub dsdx: Field,
    pub d2sdx2: Field,
    pub dsdt: Field,
}

/// Builds all metric coefficients from bathymetry and surface.
pub fn compute_geometry(
    grid: &Grid,
    bathy: &Bathymetry,
    surf: &SurfaceState,
    rate: SurfaceRate<'_>,
) -> Result<SigmaGeometry> {
    let nx = grid.x.len();
    if bathy.h.len() != nx || surf.eta.len() != nx {
        return Err(Error::LengthMismatch {
            expected: nx,
            got: surf.eta.len().min(bathy.h.len()),
        });
    }
    let d: Vec<f64> = bathy.h.iter().zip(&surf.eta).map(|(h, e)| h + e).collect();
    if let Some((index, &depth)) = d
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
    {
        return Err(Error::DryNode { index, depth });
    }
    let dx: Vec<f64> = bathy.hx.iter().zip(&surf.eta_x).map(|(a, b)| a + b).collect();
    let dxx: Vec<f64> = bathy
        .hxx
        .iter()
        .zip(&surf.eta_xx)
        .map(|(a, b)| a + b)
        .collect();
    let dt: Vec<f64> = match rate {
        SurfaceRate::Static => vec![0.0; nx],
        SurfaceRate::Given(r) => {
            if r.len() != nx {
                return Err(Error::LengthMismatch {
                    expected: nx,
                    got: r.len(),
                });
            }
            r.to_vec()
        }
        SurfaceRate::Kinematic { u, w } => (0..nx).map(|i| w[i] - u[i] * surf.eta_x[i]).collect(),
    };
    let sigma = grid.z.sigma();
    let shape = grid.shape();
    let dsdx = Array2::from_shape_fn(shape, |(i, m)| (bathy.hx[i] - sigma[m] * dx[i]) / d[i]);
    let d2sdx2 = Array2::from_shape_fn(shape, |(i, m)| {
        (bathy.hxx[i] - sigma[m] * dxx[i] - 2.0 * dsdx[[i, m]] * dx[i]) / d[i]
    });
    let dsdt = Array2::from_shape_fn(shape, |(i, m)| -sigma[m] * dt[i] / d[i]);
    let dsdz = d.iter().map(|v| 1.0 / v).collect();
    Ok(SigmaGeometry {
        h: bathy.h.clone(),
        hx: bathy.hx.clone(),
        eta: surf.eta.clone(),
        d,
        dx,
        dt,
        dsdz,
        dsdx,
        d2sdx2,
        dsdt,
    })
}

impl SigmaGeometry {
    /// Geometry of a still, undisturbed column over `bathy`.
    pub fn still(grid: &Grid, bathy: &Bathymetry) -> Result<Self> {
        compute_geometry(grid, bathy, &SurfaceState::still(grid), SurfaceRate::Static)
    }

    /// Rebuilds the geometry on another grid from resampled `h` and `η`.
    pub fn resample(&self, from: &Grid, to: &Grid) -> Result<Self> {
        let h = from.x.resample_to(&self.h, &to.x);
        let eta = from.x.resample_to(&self.eta, &to.x);
        let bathy = Bathymetry::new(to, h)?;
        let surf = SurfaceState::new(to, eta)?;
        compute_geometry(to, &bathy, &surf, SurfaceRate::Static)
    }

    /// Transformed gradient `(∂f/∂x, ∂f/∂z)`.
    pub fn gradient(&self, grid: &Grid, f: &Field) -> (Field, Field) {
        let fs = grid.ds(f);
        self.gradient_with(grid, f, &fs)
    }

    /// Gradient when `∂f/∂σ` is already available.
    pub fn gradient_with(&self, grid: &Grid, f: &Field, fs: &Field) -> (Field, Field) {
        let mut fx = grid.dx(f);
        fx.zip_mut_with(&(&self.dsdx * fs), |a, b| *a += b);
        let mut fz = fs.clone();
        for (mut row, s) in fz.rows_mut().into_iter().zip(&self.dsdz) {
            row.mapv_inplace(|v| v * s);
        }
        (fx, fz)
    }

    /// Transformed divergence `∂vx/∂x + ∂vz/∂z` of a vector field.
    pub fn divergence(&self, grid: &Grid, vx: &Field, vz: &Field) -> Field {
        let mut out = grid.dx(vx);
        let sx = grid.ds(vx);
        let sz = grid.ds(vz);
        let (nx, nz) = grid.shape();
        for i in 0..nx {
            let b = self.dsdz[i];
            for m in 0..nz {
                out[[i, m]] += self.dsdx[[i, m]] * sx[[i, m]] + b * sz[[i, m]];
            }
        }
        out
    }

    /// Transformed Laplacian with all metric terms.
    pub fn laplacian(&self, grid: &Grid, f: &Field) -> Field {
        let fs = grid.ds(f);
        let fss = grid.dss(f);
        let fxx = grid.dxx(f);
        let fxs = grid.dx(&fs);
        let (nx, nz) = grid.shape();
        let mut out = fxx;
        for i in 0..nx {
            let b = self.dsdz[i];
            for m in 0..nz {
                let a = self.dsdx[[i, m]];
                out[[i, m]] += (a * a + b * b) * fss[[i, m]]
                    + 2.0 * a * fxs[[i, m]]
                    + self.d2sdx2[[i, m]] * fs[[i, m]];
            }
        }
        out
    }

    /// Transformed vertical velocity `∂σ/∂t + u ∂σ/∂x + w ∂σ/∂z`.
    pub fn w_sigma(&self, u: &Field, w: &Field) -> Field {
        let mut out = self.dsdt.clone();
        let (nx, nz) = out.dim();
        for i in 0..nx {
            let b = self.dsdz[i];
            for m in 0..nz {
                out[[i, m]] += u[[i, m]] * self.dsdx[[i, m]] + w[[i, m]] * b;
            }
        }
        out
    }

    /// Physical elevation `z = -h + σ d` of every node.
    pub fn node_elevations(&self, grid: &Grid) -> Field {
        let sigma = grid.z.sigma();
        Array2::from_shape_fn(grid.shape(), |(i, m)| -self.h[i] + sigma[m] * self.d[i])
    }
}
