use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::{s, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::sigma::SigmaGeometry;
use crate::spectral::{Field, Grid};

/// Grid plus dense differentiation matrices shared by every operator on it.
#[derive(Debug)]
pub struct Discretization {
    pub grid: Grid,
    pub dx: Array2<f64>,
    /// `Dx · Dx`, which is what the composed operator applies.
    pub dxx: Array2<f64>,
    pub ds: Array2<f64>,
    pub dss: Array2<f64>,
}

impl Discretization {
    pub fn new(grid: Grid) -> Self {
        let dx = grid.x.diff_matrix(1);
        let ds = grid.z.diff_matrix(1);
        Self {
            dxx: dx.dot(&dx),
            dss: ds.dot(&ds),
            dx,
            ds,
            grid,
        }
    }
}

/// Mixed-stage pressure operator `∇^k · ∇^{k-1}` with a Dirichlet surface
/// row and the bed row `n · ∇^{k-1} p`, `n = (∂h/∂x, 1)`.
#[derive(Clone, Debug)]
pub struct PoissonOperator {
    disc: Arc<Discretization>,
    // inner gradient (stage k-1)
    a1: Field,
    b1: Vec<f64>,
    // outer divergence (stage k)
    a2: Field,
    b2: Vec<f64>,
    hx: Vec<f64>,
}

impl PoissonOperator {
    pub fn new(
        disc: Arc<Discretization>,
        geom_k: &SigmaGeometry,
        geom_km1: &SigmaGeometry,
    ) -> Result<Self> {
        let shape = disc.grid.shape();
        for g in [geom_k, geom_km1] {
            if g.dsdx.dim() != shape {
                return Err(Error::ShapeMismatch {
                    expected: shape,
                    got: g.dsdx.dim(),
                });
            }
        }
        Ok(Self {
            a1: geom_km1.dsdx.clone(),
            b1: geom_km1.dsdz.clone(),
            a2: geom_k.dsdx.clone(),
            b2: geom_k.dsdz.clone(),
            hx: geom_km1.hx.clone(),
            disc,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.disc.grid
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    /// Inner gradient `∇^{k-1} p`.
    pub fn gradient(&self, p: &Field) -> (Field, Field) {
        let grid = self.grid();
        let ps = grid.ds(p);
        let mut gx = grid.dx(p);
        gx.zip_mut_with(&(&self.a1 * &ps), |a, b| *a += b);
        let mut gz = ps;
        for (mut row, b) in gz.axis_iter_mut(Axis(0)).zip(&self.b1) {
            row.mapv_inplace(|v| v * b);
        }
        (gx, gz)
    }

    /// Matrix-free application including both boundary rows.
    pub fn apply(&self, p: &Field) -> Field {
        let grid = self.grid();
        let (gx, gz) = self.gradient(p);
        let mut out = grid.dx(&gx);
        let sx = grid.ds(&gx);
        let sz = grid.ds(&gz);
        let (nx, nz) = grid.shape();
        let bed = nz - 1;
        for i in 0..nx {
            for m in 1..bed {
                out[[i, m]] += self.a2[[i, m]] * sx[[i, m]] + self.b2[i] * sz[[i, m]];
            }
            out[[i, 0]] = p[[i, 0]];
            out[[i, bed]] = self.hx[i] * gx[[i, bed]] + gz[[i, bed]];
        }
        out
    }

    /// `b - A x`.
    pub fn residual(&self, b: &Field, x: &Field) -> Field {
        let mut r = self.apply(x);
        r.zip_mut_with(b, |a, b| *a = b - *a);
        r
    }

    /// `A δ` for a correction `δ` supported on columns `j0 .. j0 + δ.nrows()`.
    pub fn apply_columns(&self, j0: usize, delta: ArrayView2<f64>) -> Field {
        let d = &*self.disc;
        let (nx, nz) = d.grid.shape();
        let bed = nz - 1;
        let nb = delta.nrows();
        let cols = j0..j0 + nb;
        let sd = delta.dot(&d.ds.t());
        let t = &self.a1.slice(s![cols.clone(), ..]) * &sd;
        let dxb = d.dx.slice(s![.., cols.clone()]);
        let mut out = d.dxx.slice(s![.., cols.clone()]).dot(&delta);
        out += &dxb.dot(&t);
        let y = dxb.dot(&sd);
        // vertical couplings stay inside the block
        let local_t = t.dot(&d.ds.t());
        let local_s = sd.dot(&d.ds.t());
        let xdelta_bed = dxb.dot(&delta.column(bed));
        for i in 0..nx {
            for m in 1..bed {
                out[[i, m]] += self.a2[[i, m]] * y[[i, m]];
            }
            out[[i, 0]] = 0.0;
            out[[i, bed]] = self.hx[i] * xdelta_bed[i];
        }
        for (q, j) in cols.enumerate() {
            for m in 1..bed {
                out[[j, m]] +=
                    self.a2[[j, m]] * local_t[[q, m]] + self.b2[j] * self.b1[j] * local_s[[q, m]];
            }
            out[[j, 0]] = delta[[q, 0]];
            out[[j, bed]] += (self.hx[j] * self.a1[[j, bed]] + self.b1[j]) * sd[[q, bed]];
        }
        out
    }

    /// Dense operator rows for nodes in column range `rows`, restricted to
    /// unknowns in column range `cols`. Ordering is column-major over `(i, m)`
    /// with `m` fastest.
    pub fn assemble(&self, rows: Range<usize>, cols: Range<usize>) -> DMatrix<f64> {
        let d = &*self.disc;
        let nz = d.grid.z.len();
        let bed = nz - 1;
        let mut a = DMatrix::zeros(rows.len() * nz, cols.len() * nz);
        let mut diag_block = Array2::zeros((nz, nz));
        for (ri, i) in rows.clone().enumerate() {
            let has_diag = cols.contains(&i);
            if has_diag {
                // Ds diag(a1_i) Ds
                let scaled = Array2::from_shape_fn((nz, nz), |(m, n)| self.a1[[i, m]] * d.ds[[m, n]]);
                diag_block.assign(&d.ds.dot(&scaled));
            }
            for (ci, j) in cols.clone().enumerate() {
                let (dx, dxx) = (d.dx[[i, j]], d.dxx[[i, j]]);
                let diag = i == j;
                let r0 = ri * nz;
                let c0 = ci * nz;
                if diag {
                    a[(r0, c0)] = 1.0;
                }
                for m in 1..bed {
                    let row = r0 + m;
                    a[(row, c0 + m)] += dxx;
                    for n in 0..nz {
                        let mut v = dx * (self.a1[[j, m]] + self.a2[[i, m]]) * d.ds[[m, n]];
                        if diag {
                            v += self.a2[[i, m]] * diag_block[[m, n]]
                                + self.b2[i] * self.b1[i] * d.dss[[m, n]];
                        }
                        a[(row, c0 + n)] += v;
                    }
                }
                let row = r0 + bed;
                a[(row, c0 + bed)] += self.hx[i] * dx;
                if diag {
                    for n in 0..nz {
                        a[(row, c0 + n)] += (self.hx[i] * self.a1[[i, bed]] + self.b1[i]) * d.ds[[bed, n]];
                    }
                }
            }
        }
        a
    }
}

/// Euclidean norm over interior and bed rows (the Dirichlet row is exact).
pub fn norm(f: &Field) -> f64 {
    dot(f, f).sqrt()
}

/// Inner product over interior and bed rows.
pub fn dot(a: &Field, b: &Field) -> f64 {
    let mut s = 0.0;
    for (ra, rb) in a.axis_iter(Axis(0)).zip(b.axis_iter(Axis(0))) {
        for m in 1..ra.len() {
            s += ra[m] * rb[m];
        }
    }
    s
}

/// Pressure problem for one stage.
#[derive(Clone, Debug)]
pub struct PoissonProblem {
    pub op: PoissonOperator,
    pub rhs: Field,
}

/// Right-hand side making `u* - (βΔt/ρ) ∇^{k-1} p` divergence free in the
/// stage-k geometry and impermeable at the bed. `scale = ρ / (βΔt)`.
pub fn assemble_rhs(
    grid: &Grid,
    geom_k: &SigmaGeometry,
    u_star: &Field,
    w_star: &Field,
    scale: f64,
) -> Field {
    let mut rhs = geom_k.divergence(grid, u_star, w_star);
    let (nx, nz) = grid.shape();
    let bed = nz - 1;
    for i in 0..nx {
        rhs[[i, 0]] = 0.0;
        rhs[[i, bed]] = geom_k.hx[i] * u_star[[i, bed]] + w_star[[i, bed]];
    }
    rhs.mapv_inplace(|v| v * scale);
    rhs
}

/// Gathers the unknowns of a column range in [`PoissonOperator::assemble`] order.
pub(crate) fn gather(f: &Field, cols: Range<usize>) -> nalgebra::DVector<f64> {
    let nz = f.ncols();
    nalgebra::DVector::from_iterator(
        cols.len() * nz,
        f.slice(s![cols, ..]).iter().copied(),
    )
}

pub(crate) fn scatter(v: &nalgebra::DVector<f64>, nb: usize, nz: usize) -> Array2<f64> {
    Array2::from_shape_vec((nb, nz), v.iter().copied().collect()).expect("block shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::{compute_geometry, Bathymetry, SurfaceRate, SurfaceState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn wavy_operator(n: usize, m: usize) -> PoissonOperator {
        let grid = Grid::new(n, m, 2.0).unwrap();
        let bathy = Bathymetry::from_fn(&grid, |x| 0.8 + 0.2 * (PI * x).cos()).unwrap();
        let e1: Vec<f64> = grid.x.nodes().iter().map(|x| 0.05 * (PI * x).sin()).collect();
        let e2: Vec<f64> = grid.x.nodes().iter().map(|x| 0.06 * (PI * x + 0.2).sin()).collect();
        let g1 = compute_geometry(&grid, &bathy, &SurfaceState::new(&grid, e1).unwrap(), SurfaceRate::Static).unwrap();
        let g2 = compute_geometry(&grid, &bathy, &SurfaceState::new(&grid, e2).unwrap(), SurfaceRate::Static).unwrap();
        PoissonOperator::new(Arc::new(Discretization::new(grid)), &g2, &g1).unwrap()
    }

    #[test]
    fn assembled_matches_matrix_free() {
        let op = wavy_operator(6, 5);
        let (nx, nz) = op.grid().shape();
        let a = op.assemble(0..nx, 0..nx);
        for j in 0..nx {
            for n in 0..nz {
                let mut p = op.grid().zeros();
                p[[j, n]] = 1.0;
                let ap = op.apply(&p);
                for i in 0..nx {
                    for m in 0..nz {
                        assert_abs_diff_eq!(a[(i * nz + m, j * nz + n)], ap[[i, m]], epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn column_update_matches_full_apply() {
        let op = wavy_operator(8, 6);
        let (nx, nz) = op.grid().shape();
        let delta = Array2::from_shape_fn((3, nz), |(q, m)| (q as f64 + 1.0) * (m as f64 * 0.7).sin() + 0.1);
        let mut full = op.grid().zeros();
        full.slice_mut(s![2..5, ..]).assign(&delta);
        let a = op.apply(&full);
        let b = op.apply_columns(2, delta.view());
        for i in 0..nx {
            for m in 0..nz {
                assert_abs_diff_eq!(a[[i, m]], b[[i, m]], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let op = wavy_operator(6, 4);
        assert!(op.apply(&op.grid().zeros()).iter().all(|v| *v == 0.0));
    }
}
