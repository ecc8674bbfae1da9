use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, LU};
use ndarray::{s, Array2};

use super::operator::{gather, scatter, Discretization, PoissonOperator};
use crate::error::{Error, Result};
use crate::sigma::SigmaGeometry;
use crate::spectral::{copy_into, Field, Grid};

/// Multigrid settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultigridOptions {
    pub pre_smooth: usize,
    pub post_smooth: usize,
    /// Target number of grid columns per smoother block.
    pub columns_per_block: usize,
    /// Coarsening stops once a level has at most this many unknowns.
    pub coarse_unknowns: usize,
}

impl Default for MultigridOptions {
    fn default() -> Self {
        Self {
            pre_smooth: 2,
            post_smooth: 2,
            columns_per_block: 4,
            coarse_unknowns: 100,
        }
    }
}

fn halve(v: usize) -> usize {
    let h = v.div_ceil(2);
    h + h % 2
}

/// Polynomial orders `(N, M)` of all levels, finest first. A dimension is
/// halved only while it is not smaller than the other one.
pub fn level_orders(n: usize, m: usize, coarse_unknowns: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(n, m)];
    let (mut n, mut m) = (n, m);
    while (n + 1) * (m + 1) > coarse_unknowns {
        let (nn, mm) = if n == m {
            (halve(n), halve(m))
        } else if n > m {
            (halve(n), m)
        } else {
            (n, halve(m))
        };
        let nn = if nn < n { nn } else { n };
        let mm = if mm < m { mm } else { m };
        if (nn, mm) == (n, m) || nn < 2 || mm < 2 {
            break;
        }
        n = nn;
        m = mm;
        out.push((n, m));
    }
    out
}

struct LevelLayout {
    disc: Arc<Discretization>,
    blocks: Vec<Range<usize>>,
    /// Interior-row restriction in σ to the next coarser level.
    restrict_z: Option<Array2<f64>>,
}

/// Grid hierarchy and transfer operators, independent of the geometry.
pub struct Layout {
    levels: Vec<LevelLayout>,
    pub options: MultigridOptions,
}

impl std::fmt::Debug for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Layout")
            .field("orders", &self.orders())
            .field("options", &self.options)
            .finish()
    }
}

fn partition(n: usize, k: usize) -> Vec<Range<usize>> {
    let k = k.clamp(1, n);
    let base = n / k;
    let extra = n % k;
    let mut start = 0;
    (0..k)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Maps interior values of a fine Chebyshev column to the coarse interior
/// nodes: interpolate by the degree `M-2` polynomial, drop modes above the
/// coarse order, evaluate.
fn interior_restriction(fine: &Grid, coarse: &Grid) -> Array2<f64> {
    let xf = fine.z.xi();
    let xc = coarse.z.xi();
    let mf = xf.len() - 1;
    let mc = xc.len() - 1;
    let ni = mf - 1;
    let cheb = |j: usize, x: f64| (j as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    let v = DMatrix::from_fn(ni, ni, |r, j| cheb(j, xf[r + 1]));
    let vinv = v.try_inverse().expect("interior Chebyshev Vandermonde");
    let keep = ni.min(mc + 1);
    let e = DMatrix::from_fn(mc - 1, ni, |q, j| if j < keep { cheb(j, xc[q + 1]) } else { 0.0 });
    let r = e * vinv;
    Array2::from_shape_fn((mc - 1, ni), |(q, j)| r[(q, j)])
}

impl Layout {
    pub fn new(fine: &Grid, options: MultigridOptions) -> Result<Self> {
        if options.columns_per_block == 0 {
            return Err(Error::InvalidParameter("columns_per_block must be positive".into()));
        }
        let orders = level_orders(fine.x.order(), fine.z.order(), options.coarse_unknowns);
        let mut grids = vec![fine.clone()];
        for &(n, m) in &orders[1..] {
            grids.push(Grid::new(n, m, fine.x.length())?);
        }
        let mut levels = Vec::with_capacity(grids.len());
        for (l, grid) in grids.iter().enumerate() {
            let nx = grid.x.len();
            let k = (nx / options.columns_per_block).max(2);
            let restrict_z = grids.get(l + 1).map(|c| interior_restriction(grid, c));
            levels.push(LevelLayout {
                disc: Arc::new(Discretization::new(grid.clone())),
                blocks: partition(nx, k),
                restrict_z,
            });
        }
        Ok(Self { levels, options })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn orders(&self) -> Vec<(usize, usize)> {
        self.levels
            .iter()
            .map(|l| (l.disc.grid.x.order(), l.disc.grid.z.order()))
            .collect()
    }

    pub fn grid(&self, level: usize) -> &Grid {
        &self.levels[level].disc.grid
    }

    pub fn discretization(&self, level: usize) -> &Arc<Discretization> {
        &self.levels[level].disc
    }

    /// Fine-to-coarse transfer from `level` to `level + 1`.
    pub fn restrict(&self, level: usize, f: &Field) -> Field {
        let fine = self.grid(level);
        let coarse = self.grid(level + 1);
        let (_, nzf) = fine.shape();
        let (ncx, nzc) = coarse.shape();
        let mut rx = Field::zeros((ncx, nzf));
        if ncx == fine.x.len() {
            rx.assign(f);
        } else {
            for m in 0..nzf {
                let line = f.column(m).to_vec();
                copy_into(rx.column_mut(m), &fine.x.resample_to(&line, &coarse.x));
            }
        }
        let mut out = Field::zeros((ncx, nzc));
        out.column_mut(0).assign(&rx.column(0));
        out.column_mut(nzc - 1).assign(&rx.column(nzf - 1));
        if nzc == nzf {
            out.assign(&rx);
            return out;
        }
        let rz = self.levels[level].restrict_z.as_ref().expect("coarser level");
        let interior = rx.slice(s![.., 1..nzf - 1]).dot(&rz.t());
        out.slice_mut(s![.., 1..nzc - 1]).assign(&interior);
        out
    }

    /// Coarse-to-fine transfer from `level + 1` to `level` by zero padding.
    pub fn prolong(&self, level: usize, f: &Field) -> Field {
        self.grid(level + 1).resample(f, self.grid(level))
    }
}

/// Operators and factorizations of all levels for one geometry pair.
pub struct Hierarchy {
    layout: Arc<Layout>,
    ops: Vec<PoissonOperator>,
    blocks: Vec<Vec<LU<f64, Dyn, Dyn>>>,
    coarse: LU<f64, Dyn, Dyn>,
}

impl std::fmt::Debug for Hierarchy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hierarchy").field("layout", &self.layout).finish()
    }
}

fn factor(a: DMatrix<f64>, what: &'static str) -> Result<LU<f64, Dyn, Dyn>> {
    let lu = a.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular(what));
    }
    Ok(lu)
}

impl Hierarchy {
    /// Rediscretizes the operator on every level from resampled geometry.
    pub fn new(
        layout: Arc<Layout>,
        geom_k: &SigmaGeometry,
        geom_km1: &SigmaGeometry,
    ) -> Result<Self> {
        let fine = layout.grid(0).clone();
        let mut ops = Vec::with_capacity(layout.depth());
        for l in 0..layout.depth() {
            let disc = layout.discretization(l).clone();
            let op = if l == 0 {
                PoissonOperator::new(disc, geom_k, geom_km1)?
            } else {
                let g = layout.grid(l);
                let gk = geom_k.resample(&fine, g)?;
                let gkm1 = geom_km1.resample(&fine, g)?;
                PoissonOperator::new(disc, &gk, &gkm1)?
            };
            ops.push(op);
        }
        let last = layout.depth() - 1;
        let mut blocks = Vec::with_capacity(last);
        for (l, op) in ops.iter().enumerate().take(last) {
            let lus = layout.levels[l]
                .blocks
                .iter()
                .map(|r| factor(op.assemble(r.clone(), r.clone()), "smoother block"))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(lus);
        }
        let nx = layout.grid(last).x.len();
        let coarse = factor(ops[last].assemble(0..nx, 0..nx), "coarsest level")?;
        Ok(Self {
            layout,
            ops,
            blocks,
            coarse,
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn operator(&self, level: usize) -> &PoissonOperator {
        &self.ops[level]
    }

    pub fn depth(&self) -> usize {
        self.ops.len()
    }

    /// Direct solve on the coarsest level.
    pub fn coarse_solve(&self, b: &Field) -> Field {
        let last = self.depth() - 1;
        let nx = b.nrows();
        let nz = b.ncols();
        let x = self
            .coarse
            .solve(&gather(b, 0..nx))
            .expect("factorization checked at construction");
        debug_assert_eq!(last + 1, self.depth());
        scatter(&x, nx, nz)
    }

    /// One block Gauss–Seidel sweep on `level`.
    pub fn smooth(&self, level: usize, b: &Field, x: &mut Field, forward: bool) {
        let op = &self.ops[level];
        let ranges = &self.layout.levels[level].blocks;
        let lus = &self.blocks[level];
        let nz = x.ncols();
        let mut r = op.residual(b, x);
        let order: Vec<usize> = if forward {
            (0..ranges.len()).collect()
        } else {
            (0..ranges.len()).rev().collect()
        };
        for (pos, &k) in order.iter().enumerate() {
            let cols = ranges[k].clone();
            let d = lus[k]
                .solve(&gather(&r, cols.clone()))
                .expect("factorization checked at construction");
            let delta = scatter(&d, cols.len(), nz);
            {
                let mut xs = x.slice_mut(s![cols.clone(), ..]);
                xs += &delta;
            }
            if pos + 1 < order.len() {
                r -= &op.apply_columns(cols.start, delta.view());
            }
        }
    }

    fn cycle(&self, level: usize, b: &Field, x: &mut Field) {
        if level + 1 == self.depth() {
            *x = self.coarse_solve(b);
            return;
        }
        let opts = &self.layout.options;
        for _ in 0..opts.pre_smooth {
            self.smooth(level, b, x, true);
        }
        let r = self.ops[level].residual(b, x);
        let rc = self.layout.restrict(level, &r);
        let mut ec = Field::zeros(rc.dim());
        self.cycle(level + 1, &rc, &mut ec);
        *x += &self.layout.prolong(level, &ec);
        for _ in 0..opts.post_smooth {
            self.smooth(level, b, x, false);
        }
    }

    /// One V-cycle on the finest level, updating `x` in place.
    pub fn v_cycle(&self, b: &Field, x: &mut Field) {
        self.cycle(0, b, x);
    }

    /// Full multigrid from a zero guess: coarse solve, then prolongation and
    /// one V-cycle on each finer level.
    pub fn fmg(&self, b: &Field) -> Field {
        let depth = self.depth();
        let mut rhs = vec![b.clone()];
        for l in 0..depth - 1 {
            let next = self.layout.restrict(l, &rhs[l]);
            rhs.push(next);
        }
        let mut x = self.coarse_solve(&rhs[depth - 1]);
        for l in (0..depth - 1).rev() {
            let mut xf = self.layout.prolong(l, &x);
            self.cycle(l, &rhs[l], &mut xf);
            x = xf;
        }
        x
    }

    /// Dense operator of the finest level (small problems only).
    pub fn dense_fine(&self) -> DMatrix<f64> {
        let nx = self.layout.grid(0).x.len();
        self.ops[0].assemble(0..nx, 0..nx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_follow_coarsening_rule() {
        assert_eq!(level_orders(40, 40, 100), vec![(40, 40), (20, 20), (10, 10), (6, 6)]);
        let bar = level_orders(400, 12, 100);
        assert_eq!(bar[1], (200, 12));
        for w in bar.windows(2) {
            let ((n0, m0), (n1, m1)) = (w[0], w[1]);
            assert!(n1 < n0 || m1 < m0);
            if n1 < n0 {
                assert!(n0 >= m0);
            }
            if m1 < m0 {
                assert!(m0 >= n0);
            }
        }
        assert_eq!(level_orders(4, 4, 100), vec![(4, 4)]);
    }

    #[test]
    fn partition_is_contiguous() {
        let p = partition(41, 10);
        assert_eq!(p.len(), 10);
        assert_eq!(p[0].start, 0);
        assert_eq!(p.last().unwrap().end, 41);
        for w in p.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
    }

    #[test]
    fn interior_restriction_reproduces_low_degree() {
        let f = Grid::new(4, 16, 1.0).unwrap();
        let c = Grid::new(4, 8, 1.0).unwrap();
        let r = interior_restriction(&f, &c);
        let q = |s: f64| 1.0 + s - 3.0 * s.powi(4) + s.powi(7);
        let vf: Vec<f64> = f.z.sigma()[1..16].iter().map(|s| q(*s)).collect();
        for (qi, s) in c.z.sigma()[1..8].iter().enumerate() {
            let v: f64 = (0..15).map(|j| r[[qi, j]] * vf[j]).sum();
            assert!((v - q(*s)).abs() < 1e-11);
        }
    }
}
