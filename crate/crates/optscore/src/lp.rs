//! A small dense linear-program solver.
//!
//! Maximizes `c·z` over free variables subject to `≤ / = / ≥` row
//! constraints. The algorithm is a two-phase primal simplex on the standard
//! form (free variables split into differences of nonnegative ones) with
//! Bland's anti-cycling pivot rule. Instances in this crate are small and
//! extremely degenerate — many zero right-hand sides — so robustness is
//! worth more than speed here.
//!
//! [`LpBackend`] keeps the solver swappable: anything that can answer
//! optimal/unbounded/infeasible for a [`LinearProgram`] can replace the
//! embedded simplex without touching callers.

use std::fmt;

/// Relation of a constraint row to its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// `maximize c·z  s.t.  Aᵢ·z  {≤,=,≥}  bᵢ`, with `z` free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<(Vec<f64>, Relation, f64)>,
}

/// Errors from the solver machinery itself (statuses like infeasible or
/// unbounded are results, not errors).
#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("simplex stalled: iteration cap {cap} hit in {phase}")]
    IterationLimit { cap: usize, phase: &'static str },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_constraint(&mut self, row: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push((row, relation, rhs));
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.objective.is_empty() {
            return Err(LpError::Malformed("no variables".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed(
                "non-finite objective coefficient".into(),
            ));
        }
        for (i, (row, _, rhs)) in self.constraints.iter().enumerate() {
            if row.len() != self.objective.len() {
                return Err(LpError::Malformed(format!(
                    "constraint {i} has {} coefficients, expected {}",
                    row.len(),
                    self.objective.len()
                )));
            }
            if row.iter().any(|c| !c.is_finite()) || !rhs.is_finite() {
                return Err(LpError::Malformed(format!(
                    "non-finite data in constraint {i}"
                )));
            }
        }
        Ok(())
    }

    /// Plain-text rendering of the program, for debug dumps.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "maximize");
        let _ = writeln!(out, "  {}", render_row(&self.objective));
        let _ = writeln!(out, "subject to");
        for (row, rel, rhs) in &self.constraints {
            let _ = writeln!(out, "  {} {} {}", render_row(row), rel, rhs);
        }
        out
    }
}

fn render_row(row: &[f64]) -> String {
    row.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| format!("{c:+} z{j}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Solver outcome. For feasible bounded programs the solution is a vertex
/// of the standard-form polytope and the run is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { solution: Vec<f64>, value: f64 },
    Unbounded,
    Infeasible,
}

impl LpResult {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpResult::Optimal { solution, value } => Some((solution, *value)),
            _ => None,
        }
    }
}

/// A strategy that solves [`LinearProgram`]s.
pub trait LpBackend {
    fn solve(&self, lp: &LinearProgram) -> Result<LpResult, LpError>;
}

/// Solves with the default embedded simplex.
pub fn solve(lp: &LinearProgram) -> Result<LpResult, LpError> {
    DenseSimplex::default().solve(lp)
}

/// Two-phase dense tableau simplex with Bland's rule.
#[derive(Debug, Clone)]
pub struct DenseSimplex {
    /// Entries smaller than this are treated as zero during pivoting.
    pub pivot_tol: f64,
    /// Iteration cap multiplier: `cap = factor · (rows + cols)`.
    pub iteration_factor: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-9,
            iteration_factor: 100,
        }
    }
}

impl LpBackend for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpResult, LpError> {
        lp.validate()?;
        Tableau::build(lp, self.pivot_tol).solve(self.iteration_factor)
    }
}

struct Tableau {
    rows: usize,
    cols: usize,    // structural + slack/surplus + artificial (rhs kept separately)
    data: Vec<f64>, // rows × cols
    rhs: Vec<f64>,
    cost: Vec<f64>, // phase-2 objective (minimization form)
    cost_rhs: f64,
    art_cost: Vec<f64>, // phase-1 objective
    art_rhs: f64,
    basis: Vec<usize>,
    artificial_start: usize,
    num_free: usize, // original free variable count (split into 2·num_free columns)
    tol: f64,
}

impl Tableau {
    /// Standard-form construction. Free variables split as `z = z⁺ − z⁻`;
    /// rows are sign-normalized to nonnegative rhs; `≥` rows with zero rhs
    /// are flipped to `≤` so they start feasible with a slack basis and no
    /// artificial variable.
    fn build(lp: &LinearProgram, tol: f64) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();

        struct RowSpec {
            coeffs: Vec<f64>,
            rhs: f64,
            relation: Relation,
        }
        let mut specs: Vec<RowSpec> = Vec::with_capacity(m);
        for (row, rel, rhs) in &lp.constraints {
            let (mut coeffs, mut rhs, mut rel) = (row.clone(), *rhs, *rel);
            if rhs < 0.0 {
                for c in &mut coeffs {
                    *c = -*c;
                }
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            if rel == Relation::Ge && rhs == 0.0 {
                for c in &mut coeffs {
                    *c = -*c;
                }
                rel = Relation::Le;
            }
            specs.push(RowSpec {
                coeffs,
                rhs,
                relation: rel,
            });
        }

        let num_slack = specs.iter().filter(|s| s.relation != Relation::Eq).count();
        let num_artificial = specs.iter().filter(|s| s.relation != Relation::Le).count();
        let structural = 2 * n;
        let cols = structural + num_slack + num_artificial;
        let artificial_start = structural + num_slack;

        let mut data = vec![0.0; m * cols];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![0usize; m];
        let (mut next_slack, mut next_art) = (structural, artificial_start);

        for (i, spec) in specs.iter().enumerate() {
            for j in 0..n {
                data[i * cols + j] = spec.coeffs[j];
                data[i * cols + n + j] = -spec.coeffs[j];
            }
            rhs[i] = spec.rhs;
            match spec.relation {
                Relation::Le => {
                    data[i * cols + next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    data[i * cols + next_slack] = -1.0;
                    next_slack += 1;
                    data[i * cols + next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    data[i * cols + next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }

        // phase-2 cost (minimize −c·z)
        let mut cost = vec![0.0; cols];
        for j in 0..n {
            cost[j] = -lp.objective[j];
            cost[n + j] = lp.objective[j];
        }
        // phase-1 cost (minimize Σ artificials), reduced against the basis
        let mut art_cost = vec![0.0; cols];
        let mut art_rhs = 0.0;
        for c in art_cost.iter_mut().skip(artificial_start) {
            *c = 1.0;
        }
        let mut t = Self {
            rows: m,
            cols,
            data,
            rhs,
            cost,
            cost_rhs: 0.0,
            art_cost,
            art_rhs: 0.0,
            basis,
            artificial_start,
            num_free: n,
            tol,
        };
        // price out basic artificials so the phase-1 cost row is reduced
        for i in 0..m {
            if t.basis[i] >= artificial_start {
                for j in 0..cols {
                    t.art_cost[j] -= t.data[i * cols + j];
                }
                art_rhs -= t.rhs[i];
            }
        }
        t.art_rhs = art_rhs;
        t
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols;
        let p = self.at(row, col);
        let inv = 1.0 / p;
        for j in 0..cols {
            self.data[row * cols + j] *= inv;
        }
        self.rhs[row] *= inv;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.at(i, col);
            if factor == 0.0 {
                continue;
            }
            for j in 0..cols {
                self.data[i * cols + j] -= factor * self.data[row * cols + j];
            }
            self.rhs[i] -= factor * self.rhs[row];
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for j in 0..cols {
                self.cost[j] -= factor * self.data[row * cols + j];
            }
            self.cost_rhs -= factor * self.rhs[row];
        }
        let factor = self.art_cost[col];
        if factor != 0.0 {
            for j in 0..cols {
                self.art_cost[j] -= factor * self.data[row * cols + j];
            }
            self.art_rhs -= factor * self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// Pivot iterations on the given reduced-cost row. `allowed_cols`
    /// limits the entering columns (used to ban artificials in phase 2).
    ///
    /// Entering column: steepest reduced cost by default, switching to
    /// Bland's smallest-index rule after a stall of degenerate pivots and
    /// back once the objective strictly improves. Bland's rule alone cannot
    /// cycle, so the combination terminates; the steepest rule keeps the
    /// heavily degenerate menus here from crawling.
    fn run_phase(
        &mut self,
        phase_one: bool,
        cap: usize,
        allowed_cols: usize,
    ) -> Result<bool, LpError> {
        let stall_threshold = self.rows + 10;
        let mut stall = 0usize;
        let mut use_bland = false;
        for _ in 0..cap {
            let reduced = |t: &Self, j: usize| if phase_one { t.art_cost[j] } else { t.cost[j] };
            let col = if use_bland {
                (0..allowed_cols).find(|&j| reduced(self, j) < -self.tol)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..allowed_cols {
                    let c = reduced(self, j);
                    if c < -self.tol && best.is_none_or(|(_, bc)| c < bc) {
                        best = Some((j, c));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = col else {
                return Ok(true); // optimal for this phase
            };

            // exact ratio test; ties go to the smallest basis index so that
            // Bland stretches are genuinely anti-cycling
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > self.tol {
                    let ratio = self.rhs[i].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < best_ratio
                                || (ratio == best_ratio && self.basis[i] < self.basis[best_row])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Ok(false); // unbounded direction
            };
            self.pivot(row, col);

            if ratio > self.tol {
                stall = 0;
                use_bland = false;
            } else {
                stall += 1;
                if stall > stall_threshold {
                    use_bland = true;
                }
            }
        }
        Err(LpError::IterationLimit {
            cap,
            phase: if phase_one { "phase 1" } else { "phase 2" },
        })
    }

    fn solve(mut self, iteration_factor: usize) -> Result<LpResult, LpError> {
        let cap = iteration_factor * (self.rows + self.cols).max(1);
        let has_artificials = self.artificial_start < self.cols;

        if has_artificials {
            let finished = self.run_phase(true, cap, self.cols)?;
            if !finished {
                // phase 1 minimizes a sum of nonnegative variables and is
                // bounded below; an unbounded direction means corruption
                return Err(LpError::Numerical("unbounded direction in phase 1".into()));
            }
            let infeasibility = -self.art_rhs; // current Σ artificials
            if infeasibility > 1e-7 {
                return Ok(LpResult::Infeasible);
            }
            self.evict_artificials();
        }

        let finished = self.run_phase(false, cap, self.artificial_start)?;
        if !finished {
            return Ok(LpResult::Unbounded);
        }

        let mut z = vec![0.0; self.num_free];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_free {
                z[b] += self.rhs[i];
            } else if b < 2 * self.num_free {
                z[b - self.num_free] -= self.rhs[i];
            }
        }
        // the cost row carries the negated min-form objective, which for
        // `minimize −c·z` is exactly `c·z`
        let value = self.cost_rhs;
        Ok(LpResult::Optimal { solution: z, value })
    }

    /// Pivots basic artificial variables out (they all sit at zero after a
    /// successful phase 1); rows with no eligible pivot are redundant and
    /// are blanked.
    fn evict_artificials(&mut self) {
        for i in 0..self.rows {
            if self.basis[i] < self.artificial_start {
                continue;
            }
            let col = (0..self.artificial_start).find(|&j| self.at(i, j).abs() > self.tol);
            match col {
                Some(j) => self.pivot(i, j),
                None => {
                    // redundant constraint: zero the row, keep the artificial
                    // basic at zero; it can never re-enter phase 2.
                    for j in 0..self.cols {
                        self.data[i * self.cols + j] = 0.0;
                    }
                    self.data[i * self.cols + self.basis[i]] = 1.0;
                    self.rhs[i] = 0.0;
                }
            }
        }
    }
}
