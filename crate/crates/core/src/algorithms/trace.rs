//! Per-iteration record of a solve.

/// One row per iterate `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// `D_k = ‖x^k − x*‖`, when a solution is known.
    pub error: Option<f64>,
    /// Step size iteration `k` starts from.
    pub gamma: f64,
    /// Inertial weight iteration `k` applies.
    pub delta: f64,
    /// Solver time spent until `x^k` was available.
    pub elapsed_seconds: f64,
    /// Inequality residuals of iteration `k`, in [`ConvergenceTrace::residual_names`]
    /// order; `None` entries are checks that do not apply at this `k`.
    pub residuals: Option<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub residual_names: Vec<String>,
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn new(residual_names: Vec<String>) -> Self {
        Self {
            residual_names,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&TraceRow> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn row(&self, k: usize) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    /// `D_k` column (`None` when no solution is known).
    pub fn errors(&self) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gamma).collect()
    }

    pub fn residual_index(&self, name: &str) -> Option<usize> {
        self.residual_names.iter().position(|n| n == name)
    }

    /// Recorded values of one residual column, skipping inapplicable rows.
    pub fn residual_column(&self, name: &str) -> Vec<(usize, f64)> {
        let Some(i) = self.residual_index(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| Some((r.k, r.residuals.as_ref()?.get(i).copied()??)))
            .collect()
    }

    /// Largest entry of a residual column.
    pub fn max_residual(&self, name: &str) -> Option<f64> {
        self.residual_column(name).into_iter().map(|(_, v)| v).reduce(f64::max)
    }

    /// `D_last / D_1`.
    pub fn error_ratio(&self) -> Option<f64> {
        Some(self.last()?.error? / self.first()?.error?)
    }

    /// Rows strictly increasing in `k`, elapsed time nondecreasing.
    pub fn is_well_ordered(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[0].k < w[1].k && w[0].elapsed_seconds <= w[1].elapsed_seconds)
    }
}
