use std::time::Instant;

use super::multigrid::Hierarchy;
use super::operator::{dot, norm, PoissonOperator};
use super::stats::{CycleKind, SolverStats};
use crate::error::{Error, Result};
use crate::spectral::Field;

/// GMRES settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions {
    /// Relative residual target.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Iterations without residual reduction before giving up.
    pub stagnation: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            restart: 30,
            max_iter: 500,
            stagnation: 50,
        }
    }
}

fn precondition(kind: CycleKind, mg: Option<&Hierarchy>, v: &Field) -> Field {
    match (kind, mg) {
        (CycleKind::VCycle, Some(h)) => {
            let mut z = Field::zeros(v.dim());
            h.v_cycle(v, &mut z);
            z
        }
        (CycleKind::Fmg, Some(h)) => h.fmg(v),
        _ => v.clone(),
    }
}

fn zero_surface(f: &mut Field) {
    f.column_mut(0).fill(0.0);
}

/// Solves `A p = b` by restarted, right-preconditioned (flexible) GMRES.
/// The Dirichlet surface row is imposed on the initial guess and kept out
/// of the Krylov space.
pub fn solve(
    op: &PoissonOperator,
    rhs: &Field,
    x0: Option<&Field>,
    kind: CycleKind,
    mg: Option<&Hierarchy>,
    opts: &GmresOptions,
) -> Result<(Field, SolverStats)> {
    if kind != CycleKind::None && mg.is_none() {
        return Err(Error::InvalidParameter(format!(
            "preconditioner {kind} requires a multigrid hierarchy"
        )));
    }
    if opts.restart == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("GMRES needs restart > 0 and tol > 0".into()));
    }
    op.grid().check(rhs)?;
    let start = Instant::now();
    let mut x = match x0 {
        Some(g) => g.clone(),
        None => Field::zeros(rhs.dim()),
    };
    x.column_mut(0).assign(&rhs.column(0));
    let bnorm = norm(rhs);
    let mut stats = SolverStats {
        iterations: 0,
        residuals: Vec::new(),
        true_residual: 0.0,
        seconds: 0.0,
        cycle: kind,
    };
    if bnorm == 0.0 {
        x.fill(0.0);
        x.column_mut(0).assign(&rhs.column(0));
        stats.residuals.push(0.0);
        return Ok((x, stats));
    }
    let mut r = op.residual(rhs, &x);
    zero_surface(&mut r);
    let mut rel = norm(&r) / bnorm;
    stats.residuals.push(rel);
    stats.true_residual = rel;
    let mut best = rel;
    let mut best_at = 0;
    let m = opts.restart;
    while rel > opts.tol {
        let beta = norm(&r);
        let mut v: Vec<Field> = vec![r.mapv(|a| a / beta)];
        let mut z: Vec<Field> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m {
            let mut zk = precondition(kind, mg, &v[k]);
            zero_surface(&mut zk);
            let mut w = op.apply(&zk);
            zero_surface(&mut w);
            z.push(zk);
            // modified Gram-Schmidt, twice for stability
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    h[i][k] += hij;
                    w.scaled_add(-hij, vi);
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                return Err(Error::Singular("GMRES Hessenberg"));
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            stats.iterations += 1;
            rel = g[k].abs() / bnorm;
            stats.residuals.push(rel);
            if rel < best * (1.0 - 1e-8) {
                best = rel;
                best_at = stats.iterations;
            }
            if rel <= opts.tol
                || stats.iterations >= opts.max_iter
                || stats.iterations - best_at >= opts.stagnation
                || hn == 0.0
            {
                break;
            }
            v.push(w.mapv(|a| a / hn));
        }
        // back substitution
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (zi, yi) in z.iter().zip(&y) {
            x.scaled_add(*yi, zi);
        }
        r = op.residual(rhs, &x);
        zero_surface(&mut r);
        let true_rel = norm(&r) / bnorm;
        stats.true_residual = true_rel;
        if rel <= opts.tol {
            break;
        }
        rel = true_rel;
        stats.seconds = start.elapsed().as_secs_f64();
        if stats.iterations - best_at >= opts.stagnation {
            return Err(Error::Stagnation(Box::new(stats)));
        }
        if stats.iterations >= opts.max_iter {
            return Err(Error::MaxIterations(Box::new(stats)));
        }
    }
    stats.seconds = start.elapsed().as_secs_f64();
    Ok((x, stats))
}
