//! Small dense linear-programming solver.
//!
//! Two-phase primal simplex on a dense tableau with Bland's rule. Instances in
//! this crate have at most a few hundred columns, so the tableau is rebuilt for
//! every call and no factorization is kept.

use thiserror::Error;

/// Feasibility tolerance on constraint residuals.
pub const FEAS_TOL: f64 = 1e-7;
/// Entries below this magnitude are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-10;
/// Reduced-cost threshold for optimality.
const OPT_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("variable {var} has empty bound interval [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("non-finite coefficient in {0}")]
    NotFinite(&'static str),
    #[error("pivot limit {0} exceeded")]
    PivotLimit(usize),
    #[error("linear-fractional program over an unbounded region")]
    UnboundedRegion,
    #[error("basis enumeration needs {count} subsets, cap is {cap}")]
    EnumerationCap { count: u128, cap: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `opt c·x  s.t.  a_i·x (≤|=|≥) b_i,  lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// Variables default to `0 ≤ x < ∞`.
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            direction,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// Feasibility-only program (zero objective).
    pub fn feasibility(vars: usize) -> Self {
        Self::new(Direction::Minimize, vec![0.0; vars])
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.bound(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Same feasible region, new objective.
    pub fn with_objective(&self, direction: Direction, objective: Vec<f64>) -> Self {
        assert_eq!(objective.len(), self.vars());
        Self {
            direction,
            objective,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "{} objective coefficients but {}/{} bounds",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NotFinite("objective"));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(LpError::NotFinite("constraints"));
            }
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidBounds {
                    var: j,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal objective; `NaN` when infeasible, `±inf` when unbounded.
    pub value: f64,
    pub primal: Vec<f64>,
    /// Shadow price of each constraint: the rate of change of the optimal
    /// value per unit increase of its right-hand side.
    pub dual: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Optimality certificate residuals, recomputed from `lp` alone.
    pub fn residuals(&self, lp: &LinearProgram) -> Residuals {
        let s = match lp.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let x = &self.primal;
        let mut out = Residuals::default();
        // duals of the equivalent minimization
        let y: Vec<f64> = self.dual.iter().map(|v| s * v).collect();
        let mut reduced: Vec<f64> = lp.objective.iter().map(|c| s * c).collect();
        let mut dual_obj = 0.0;
        for (row, &yi) in lp.constraints.iter().zip(&y) {
            let ax: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let slack = ax - row.rhs;
            let (viol, sign_viol) = match row.sense {
                Sense::Le => (slack.max(0.0), yi.max(0.0)),
                Sense::Ge => ((-slack).max(0.0), (-yi).max(0.0)),
                Sense::Eq => (slack.abs(), 0.0),
            };
            out.primal = out.primal.max(viol);
            out.dual = out.dual.max(sign_viol);
            out.complementary = out.complementary.max((yi * slack).abs());
            for (r, a) in reduced.iter_mut().zip(&row.coeffs) {
                *r -= a * yi;
            }
            dual_obj += row.rhs * yi;
        }
        for j in 0..lp.vars() {
            let (l, u, rc) = (lp.lower[j], lp.upper[j], reduced[j]);
            out.primal = out.primal.max((l - x[j]).max(0.0)).max((x[j] - u).max(0.0));
            if rc > OPT_TOL {
                if l.is_finite() {
                    dual_obj += rc * l;
                    out.complementary = out.complementary.max(rc * (x[j] - l));
                } else {
                    out.dual = out.dual.max(rc);
                }
            } else if rc < -OPT_TOL {
                if u.is_finite() {
                    dual_obj += rc * u;
                    out.complementary = out.complementary.max(-rc * (u - x[j]));
                } else {
                    out.dual = out.dual.max(-rc);
                }
            }
        }
        let primal_obj: f64 = lp.objective.iter().zip(x).map(|(c, v)| s * c * v).sum();
        out.gap = (primal_obj - dual_obj).abs();
        out.dual_value = s * dual_obj;
        out
    }
}

/// Residuals of an optimal primal/dual pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub complementary: f64,
    /// `|primal objective − dual objective|`.
    pub gap: f64,
    /// Dual objective in the direction of the original program.
    pub dual_value: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal
            .max(self.dual)
            .max(self.complementary)
            .max(self.gap)
    }
}

// ---------------------------------------------------------------------------
// standard form: min c·x, A x (sense) b, x ≥ 0

#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
struct StandardForm {
    rows: Vec<Vec<f64>>,
    senses: Vec<Sense>,
    rhs: Vec<f64>,
    /// Minimization costs over standard columns.
    cost: Vec<f64>,
    cols: usize,
    vars: Vec<VarMap>,
    user_rows: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let sign = match lp.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let mut vars = Vec::with_capacity(lp.vars());
        let mut cols = 0usize;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..lp.vars() {
            let (l, u) = (lp.lower[j], lp.upper[j]);
            let map = if l.is_finite() {
                if u.is_finite() {
                    bound_rows.push((cols, u - l));
                }
                cols += 1;
                VarMap {
                    offset: l,
                    cols: vec![(cols - 1, 1.0)],
                }
            } else if u.is_finite() {
                cols += 1;
                VarMap {
                    offset: u,
                    cols: vec![(cols - 1, -1.0)],
                }
            } else {
                cols += 2;
                VarMap {
                    offset: 0.0,
                    cols: vec![(cols - 2, 1.0), (cols - 1, -1.0)],
                }
            };
            vars.push(map);
        }
        let mut rows = Vec::new();
        let mut senses = Vec::new();
        let mut rhs = Vec::new();
        for c in &lp.constraints {
            let mut row = vec![0.0; cols];
            let mut b = c.rhs;
            for (j, &a) in c.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                b -= a * vars[j].offset;
                for &(k, coef) in &vars[j].cols {
                    row[k] += a * coef;
                }
            }
            rows.push(row);
            senses.push(c.sense);
            rhs.push(b);
        }
        for (k, ub) in bound_rows {
            let mut row = vec![0.0; cols];
            row[k] = 1.0;
            rows.push(row);
            senses.push(Sense::Le);
            rhs.push(ub);
        }
        let mut cost = vec![0.0; cols];
        for (j, &c) in lp.objective.iter().enumerate() {
            for &(k, coef) in &vars[j].cols {
                cost[k] += sign * c * coef;
            }
        }
        Self {
            rows,
            senses,
            rhs,
            cost,
            cols,
            vars,
            user_rows: lp.constraints.len(),
        }
    }

    fn recover(&self, x_std: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|m| m.offset + m.cols.iter().map(|&(k, c)| c * x_std[k]).sum::<f64>())
            .collect()
    }
}

struct Tableau {
    /// m rows of width `width + 1`; the last entry is the right-hand side.
    t: Vec<Vec<f64>>,
    /// reduced costs, last entry = −objective
    z: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
    blocked: Vec<bool>,
    pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.t[r][c] = 1.0;
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..=w {
                    row[k] -= f * prow[k];
                }
                row[c] = 0.0;
                if row[w].abs() < 1e-13 {
                    row[w] = 0.0;
                }
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for k in 0..=w {
                self.z[k] -= f * prow[k];
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.z = vec![0.0; w + 1];
        self.z[..cost.len()].copy_from_slice(cost);
        for (i, row) in self.t.iter().enumerate() {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for k in 0..=w {
                    self.z[k] -= cb * row[k];
                }
            }
        }
    }

    /// Bland's rule: lowest-index improving column, ratio ties broken by the
    /// lowest-index leaving variable.
    fn run(&mut self) -> Result<Phase, LpError> {
        let w = self.width;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::PivotLimit(MAX_PIVOTS));
            }
            let entering = (0..w).find(|&j| !self.blocked[j] && self.z[j] < -OPT_TOL);
            let Some(c) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[c];
                if a > PIVOT_TOL {
                    let ratio = row[w].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(Phase::Unbounded),
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Solves `lp` to optimality, or reports infeasibility/unboundedness.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let sf = StandardForm::build(lp);
    let m = sf.rows.len();
    let n = sf.cols;

    // orient rows so that b ≥ 0
    let mut flip = vec![1.0; m];
    let mut senses = sf.senses.clone();
    for i in 0..m {
        if sf.rhs[i] < 0.0 {
            flip[i] = -1.0;
            senses[i] = match senses[i] {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let slack_count = senses.iter().filter(|s| **s != Sense::Eq).count();
    let art_count = senses.iter().filter(|s| **s != Sense::Le).count();
    let width = n + slack_count + art_count;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let mut unit_col = vec![0usize; m];
    let mut is_art = vec![false; width];
    let mut next_slack = n;
    let mut next_art = n + slack_count;
    for i in 0..m {
        for k in 0..n {
            t[i][k] = flip[i] * sf.rows[i][k];
        }
        t[i][width] = flip[i] * sf.rhs[i];
        match senses[i] {
            Sense::Le => {
                t[i][next_slack] = 1.0;
                basis[i] = next_slack;
                unit_col[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                t[i][next_slack] = -1.0;
                next_slack += 1;
                t[i][next_art] = 1.0;
                is_art[next_art] = true;
                basis[i] = next_art;
                unit_col[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                t[i][next_art] = 1.0;
                is_art[next_art] = true;
                basis[i] = next_art;
                unit_col[i] = next_art;
                next_art += 1;
            }
        }
    }
    let mut tab = Tableau {
        t,
        z: Vec::new(),
        basis,
        width,
        blocked: vec![false; width],
        pivots: 0,
    };

    // phase 1
    if art_count > 0 {
        let phase1: Vec<f64> = (0..width)
            .map(|j| if is_art[j] { 1.0 } else { 0.0 })
            .collect();
        tab.set_costs(&phase1);
        tab.run()?;
        let infeas: f64 = -tab.z[width];
        let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeas > FEAS_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                primal: vec![f64::NAN; lp.vars()],
                dual: vec![f64::NAN; lp.constraints.len()],
            });
        }
        // drive basic artificials out where possible; remaining rows are redundant
        for r in 0..m {
            if is_art[tab.basis[r]] {
                if let Some(c) = (0..width).find(|&j| !is_art[j] && tab.t[r][j].abs() > 1e-9) {
                    tab.pivot(r, c);
                }
            }
        }
        tab.blocked[..width].copy_from_slice(&is_art[..width]);
    }

    // phase 2
    let mut cost = sf.cost.clone();
    cost.resize(width, 0.0);
    tab.set_costs(&cost);
    let phase = tab.run()?;
    let mut x_std = vec![0.0; width];
    for (i, &b) in tab.basis.iter().enumerate() {
        x_std[b] = tab.t[i][width].max(0.0);
    }
    let primal = sf.recover(&x_std);
    if let Phase::Unbounded = phase {
        let value = match lp.direction {
            Direction::Minimize => f64::NEG_INFINITY,
            Direction::Maximize => f64::INFINITY,
        };
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value,
            primal,
            dual: vec![f64::NAN; lp.constraints.len()],
        });
    }
    let value: f64 = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
    let dir = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    // reduced cost of a unit column is −y_i of the oriented row
    let dual = (0..sf.user_rows)
        .map(|i| {
            let y = -tab.z[unit_col[i]] * flip[i] * dir;
            if y == 0.0 {
                0.0
            } else {
                y
            }
        })
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        primal,
        dual,
    })
}

// ---------------------------------------------------------------------------
// linear-fractional programs

/// `coeffs·x + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl Affine {
    pub fn linear(coeffs: Vec<f64>) -> Self {
        Self {
            coeffs,
            constant: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fractional {
    /// Supremum of the ratio and a maximizer.
    Optimal { value: f64, argmax: Vec<f64> },
    /// The denominator is nonpositive on the whole feasible region.
    Unreachable,
}

/// Maximizes `num(x) / den(x)` over the feasible region of `feasible`
/// (its objective is ignored), restricted to points with `den(x) > 0`.
///
/// Charnes–Cooper: with `y = t·x`, `t ≥ 0`, solve
/// `max num·y + n₀t  s.t.  A y − b t (sense) 0,  den·y + d₀t = 1` and recover
/// `x = y / t`. The region must be bounded.
pub fn solve_linear_fractional(
    num: &Affine,
    den: &Affine,
    feasible: &LinearProgram,
) -> Result<Fractional, LpError> {
    feasible.validate()?;
    let n = feasible.vars();
    if num.coeffs.len() != n || den.coeffs.len() != n {
        return Err(LpError::DimensionMismatch(
            "fractional objective length".into(),
        ));
    }
    let tcol = n;
    let mut obj = num.coeffs.clone();
    obj.push(num.constant);
    let mut cc = LinearProgram::new(Direction::Maximize, obj);
    let row = |coeffs: &[f64], t: f64| {
        let mut r = coeffs.to_vec();
        r.push(t);
        r
    };
    for c in &feasible.constraints {
        cc.constrain(row(&c.coeffs, -c.rhs), c.sense, 0.0);
    }
    for j in 0..n {
        let (l, u) = (feasible.lower[j], feasible.upper[j]);
        cc.lower[j] = if l == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        if l.is_finite() && l != 0.0 {
            let mut r = vec![0.0; n + 1];
            r[j] = 1.0;
            r[tcol] = -l;
            cc.constrain(r, Sense::Ge, 0.0);
        }
        if u.is_finite() {
            let mut r = vec![0.0; n + 1];
            r[j] = 1.0;
            r[tcol] = -u;
            cc.constrain(r, Sense::Le, 0.0);
        }
    }
    cc.constrain(row(&den.coeffs, den.constant), Sense::Eq, 1.0);
    let sol = solve(&cc)?;
    match sol.status {
        LpStatus::Infeasible => Ok(Fractional::Unreachable),
        LpStatus::Unbounded => Err(LpError::UnboundedRegion),
        LpStatus::Optimal => {
            let t = sol.primal[tcol];
            if t <= 1e-14 {
                return Err(LpError::UnboundedRegion);
            }
            let argmax = sol.primal[..n].iter().map(|y| y / t).collect();
            Ok(Fractional::Optimal {
                value: sol.value,
                argmax,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// vertex enumeration

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Drops linearly dependent rows of `[A | b]`. `None` if inconsistent.
fn independent_rows(rows: &[Vec<f64>], rhs: &[f64]) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut work: Vec<Vec<f64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(*b);
            v
        })
        .collect();
    let mut keep = Vec::new();
    let mut pivot_rows: Vec<(usize, usize)> = Vec::new(); // (row index in work, pivot column)
    for i in 0..work.len() {
        for &(pr, pc) in &pivot_rows {
            let f = work[i][pc] / work[pr][pc];
            if f != 0.0 {
                let src = work[pr].clone();
                for (v, s) in work[i].iter_mut().zip(&src) {
                    *v -= f * s;
                }
            }
        }
        let scale = 1.0 + work[i].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        match (0..cols).max_by(|&a, &b| work[i][a].abs().total_cmp(&work[i][b].abs())) {
            Some(pc) if work[i][pc].abs() > 1e-9 * scale => {
                pivot_rows.push((i, pc));
                keep.push(i);
            }
            _ => {
                if work[i][cols].abs() > 1e-9 * scale {
                    return None;
                }
            }
        }
    }
    Some((
        keep.iter().map(|&i| rows[i].clone()).collect(),
        keep.iter().map(|&i| rhs[i]).collect(),
    ))
}

/// All vertices of the feasible region of `feasible` (objective ignored), by
/// enumerating bases of its standard form. Fails when more than `cap` column
/// subsets would have to be examined.
pub fn vertices(feasible: &LinearProgram, cap: u128) -> Result<Vec<Vec<f64>>, LpError> {
    feasible.validate()?;
    let sf = StandardForm::build(feasible);
    // equality form: append a slack column per inequality row
    let ineq = sf.senses.iter().filter(|s| **s != Sense::Eq).count();
    let width = sf.cols + ineq;
    let mut rows = Vec::with_capacity(sf.rows.len());
    let mut next = sf.cols;
    for (r, s) in sf.rows.iter().zip(&sf.senses) {
        let mut row = r.clone();
        row.resize(width, 0.0);
        match s {
            Sense::Le => {
                row[next] = 1.0;
                next += 1;
            }
            Sense::Ge => {
                row[next] = -1.0;
                next += 1;
            }
            Sense::Eq => {}
        }
        rows.push(row);
    }
    let Some((rows, rhs)) = independent_rows(&rows, &sf.rhs) else {
        return Ok(Vec::new());
    };
    let m = rows.len();
    if m == 0 {
        // no constraints left: the origin of the standard form is the only vertex
        return Ok(vec![sf.recover(&vec![0.0; width])]);
    }
    let count = binomial(width, m);
    if count > cap {
        return Err(LpError::EnumerationCap { count, cap });
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let a: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| idx.iter().map(|&j| r[j]).collect())
            .collect();
        if let Some(xb) = solve_square(a, rhs.clone()) {
            if xb.iter().all(|&v| v >= -1e-9) {
                let mut x = vec![0.0; width];
                for (&j, v) in idx.iter().zip(&xb) {
                    x[j] = v.max(0.0);
                }
                let point = sf.recover(&x);
                let dup = out
                    .iter()
                    .any(|p| p.iter().zip(&point).all(|(a, b)| (a - b).abs() <= 1e-9));
                if !dup {
                    out.push(point);
                }
            }
        }
        // next combination
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if idx[i] < width - m + i {
                idx[i] += 1;
                for k in i + 1..m {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_single_variable() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0]);
        lp.constrain(vec![1.0], Sense::Le, 3.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!((s.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_face() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Sense::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(s.residuals(&lp).max() < 1e-9);
    }

    #[test]
    fn infeasible() {
        let mut lp = LinearProgram::new(Direction::Minimize, vec![0.0]);
        lp.constrain(vec![1.0], Sense::Eq, 1.0);
        lp.constrain(vec![1.0], Sense::Le, 0.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0, 0.0]);
        lp.constrain(vec![1.0, -1.0], Sense::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        assert_eq!(s.value, f64::INFINITY);
    }

    #[test]
    fn free_and_bounded_variables() {
        // min x - y  s.t. x + y = 1, -2 ≤ x ≤ 5, y free, y ≤ 4
        let mut lp = LinearProgram::new(Direction::Minimize, vec![1.0, -1.0]);
        lp.constrain(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.bound(0, -2.0, 5.0);
        lp.bound(1, f64::NEG_INFINITY, 4.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - (-5.0)).abs() < 1e-12, "{s:?}");
        assert!((s.primal[0] + 2.0).abs() < 1e-12 && (s.primal[1] - 3.0).abs() < 1e-12);
        let r = s.residuals(&lp);
        assert!(r.max() < 1e-9, "{r:?}");
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 stated twice, plus 2x + 2y = 2
        let mut lp = LinearProgram::new(Direction::Maximize, vec![2.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.constrain(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.constrain(vec![2.0, 2.0], Sense::Eq, 2.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!(s.residuals(&lp).max() < 1e-9);
    }

    #[test]
    fn negative_rhs_rows() {
        // min x s.t. -x ≤ -2  (x ≥ 2)
        let mut lp = LinearProgram::new(Direction::Minimize, vec![1.0]);
        lp.constrain(vec![-1.0], Sense::Le, -2.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!((s.dual[0] + 1.0).abs() < 1e-12);
        assert!(s.residuals(&lp).max() < 1e-9);
    }

    #[test]
    fn dimension_errors() {
        let mut lp = LinearProgram::new(Direction::Minimize, vec![1.0, 1.0]);
        lp.constrain(vec![1.0], Sense::Le, 1.0);
        assert!(matches!(solve(&lp), Err(LpError::DimensionMismatch(_))));
        let mut lp = LinearProgram::new(Direction::Minimize, vec![1.0]);
        lp.bound(0, 2.0, 1.0);
        assert!(matches!(solve(&lp), Err(LpError::InvalidBounds { .. })));
    }

    #[test]
    fn fractional_reduces_to_lp() {
        let mut region = LinearProgram::feasibility(1);
        region.bound(0, 0.0, 2.0);
        let r = solve_linear_fractional(
            &Affine::linear(vec![1.0]),
            &Affine {
                coeffs: vec![0.0],
                constant: 1.0,
            },
            &region,
        )
        .unwrap();
        match r {
            Fractional::Optimal { value, argmax } => {
                assert!((value - 2.0).abs() < 1e-12);
                assert!((argmax[0] - 2.0).abs() < 1e-12);
            }
            Fractional::Unreachable => panic!(),
        }
    }

    #[test]
    fn fractional_on_simplex() {
        let mut region = LinearProgram::feasibility(2);
        region.constrain(vec![1.0, 1.0], Sense::Eq, 1.0);
        let r = solve_linear_fractional(
            &Affine::linear(vec![1.0, 2.0]),
            &Affine::linear(vec![1.0, 1.0]),
            &region,
        )
        .unwrap();
        let Fractional::Optimal { value, argmax } = r else {
            panic!()
        };
        assert!((value - 2.0).abs() < 1e-12);
        assert!(argmax[0].abs() < 1e-12 && (argmax[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_unreachable() {
        // denominator x₂ with x₂ pinned to zero
        let mut region = LinearProgram::feasibility(2);
        region.constrain(vec![1.0, 1.0], Sense::Eq, 1.0);
        region.bound(1, 0.0, 0.0);
        let r = solve_linear_fractional(
            &Affine::linear(vec![1.0, 1.0]),
            &Affine::linear(vec![0.0, 1.0]),
            &region,
        )
        .unwrap();
        assert_eq!(r, Fractional::Unreachable);
    }

    #[test]
    fn vertices_of_box_and_simplex() {
        let mut sq = LinearProgram::feasibility(2);
        sq.bound(0, 0.0, 1.0).bound(1, 0.0, 1.0);
        let mut v = vertices(&sq, 1000).unwrap();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            v,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0]
            ]
        );

        let mut simplex = LinearProgram::feasibility(3);
        simplex.constrain(vec![1.0; 3], Sense::Eq, 1.0);
        simplex.constrain(vec![1.0; 3], Sense::Eq, 1.0); // redundant
        assert_eq!(vertices(&simplex, 1000).unwrap().len(), 3);

        assert!(matches!(
            vertices(&simplex, 1),
            Err(LpError::EnumerationCap { .. })
        ));
    }

    #[test]
    fn deterministic_resolve() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![0.3, 0.7, 0.2]);
        lp.constrain(vec![1.0, 1.0, 1.0], Sense::Eq, 1.0);
        lp.constrain(vec![0.0, 1.0, -1.0], Sense::Le, 0.25);
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a, b);
    }
}
