//! Mixed-stage pressure Poisson problem: matrix-free operator, p-multigrid
//! preconditioner and GMRES.

mod gmres;
mod multigrid;
mod operator;
mod stats;

use std::sync::Arc;

pub use gmres::{solve, GmresOptions};
pub use multigrid::{level_orders, Hierarchy, Layout, MultigridOptions};
pub use operator::{assemble_rhs, dot, norm, Discretization, PoissonOperator, PoissonProblem};
pub use stats::{CycleKind, SolverStats};

use crate::error::Result;
use crate::sigma::SigmaGeometry;
use crate::spectral::{Field, Grid};

/// Full solver configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub precond: CycleKind,
    pub gmres: GmresOptions,
    pub multigrid: MultigridOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            precond: CycleKind::VCycle,
            gmres: GmresOptions::default(),
            multigrid: MultigridOptions::default(),
        }
    }
}

/// Pressure solver bound to one fine grid. The multigrid layout is built
/// once; operators are rebuilt for each geometry pair unless frozen.
#[derive(Debug)]
pub struct PoissonSolver {
    pub options: SolverOptions,
    layout: Arc<Layout>,
    hierarchy: Option<Hierarchy>,
    frozen: bool,
}

impl PoissonSolver {
    pub fn new(grid: &Grid, options: SolverOptions) -> Result<Self> {
        let layout = Arc::new(Layout::new(grid, options.multigrid)?);
        Ok(Self {
            options,
            layout,
            hierarchy: None,
            frozen: false,
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Keeps the current hierarchy for all later solves (constant geometry).
    pub fn freeze(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    /// Builds operators and factorizations for a geometry pair.
    pub fn prepare(&mut self, geom_k: &SigmaGeometry, geom_km1: &SigmaGeometry) -> Result<()> {
        if self.frozen && self.hierarchy.is_some() {
            return Ok(());
        }
        self.hierarchy = Some(Hierarchy::new(self.layout.clone(), geom_k, geom_km1)?);
        Ok(())
    }

    pub fn hierarchy(&self) -> Option<&Hierarchy> {
        self.hierarchy.as_ref()
    }

    pub fn operator(&self) -> &PoissonOperator {
        self.hierarchy
            .as_ref()
            .expect("prepare() must be called before solving")
            .operator(0)
    }

    /// Solves with the prepared operator.
    pub fn solve(&self, rhs: &Field, x0: Option<&Field>) -> Result<(Field, SolverStats)> {
        let h = self
            .hierarchy
            .as_ref()
            .expect("prepare() must be called before solving");
        solve(
            h.operator(0),
            rhs,
            x0,
            self.options.precond,
            Some(h),
            &self.options.gmres,
        )
    }
}
