use std::fmt;

/// Preconditioner applied inside GMRES.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleKind {
    None,
    VCycle,
    Fmg,
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleKind::None => "none",
            CycleKind::VCycle => "vcycle",
            CycleKind::Fmg => "fmg",
        })
    }
}

/// Convergence record of one pressure solve.
#[derive(Clone, Debug)]
pub struct SolverStats {
    pub iterations: usize,
    /// GMRES relative residual after each iteration, starting with the initial one.
    pub residuals: Vec<f64>,
    /// Recomputed `‖b - A x‖ / ‖b‖` of the returned solution.
    pub true_residual: f64,
    pub seconds: f64,
    pub cycle: CycleKind,
}

impl SolverStats {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    /// True when the residual history never increases (up to `slack`).
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack) + slack)
    }
}
