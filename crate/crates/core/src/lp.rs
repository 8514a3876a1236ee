//! Exact linear programming over rationals.
//!
//! Dense two-phase tableau simplex with Bland's rule. Every optimal
//! solution carries a dual certificate that can be checked independently
//! with [`DualCertificate::verify`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, v)| a * v).sum()
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// A linear program. Variables are free unless bounds are set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactLinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Dual multipliers for the minimization form of the program (the objective
/// is negated for maximization problems).
///
/// Stationarity reads `c_j = Σ_i y_i a_ij + λ_j − μ_j` with `y_i <= 0` on
/// `<=` rows, `y_i >= 0` on `>=` rows, `λ, μ >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub row_duals: Vec<Rational>,
    pub lower_duals: Vec<Rational>,
    pub upper_duals: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<Rational>,
    pub objective: Rational,
    /// Constraints holding with equality at `values`.
    pub active: Vec<usize>,
    pub certificate: Option<DualCertificate>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_point(status: LpStatus) -> Self {
        LpSolution { status, values: Vec::new(), objective: Rational::zero(), active: Vec::new(), certificate: None }
    }
}

impl ExactLinearProgram {
    pub fn new(num_vars: usize) -> Self {
        ExactLinearProgram {
            num_vars,
            sense: Sense::Minimize,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            lower: vec![None; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<Rational>) -> &mut Self {
        self.sense = sense;
        self.objective = coeffs;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> usize {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    /// Marks every variable `>= 0`.
    pub fn nonnegative(&mut self) -> &mut Self {
        for l in &mut self.lower {
            *l = Some(Rational::zero());
        }
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(Error::MalformedProgram("no variables".into()));
        }
        let bad = |what: &str, len: usize| {
            Err(Error::MalformedProgram(format!("{what} has length {len}, expected {}", self.num_vars)))
        };
        if self.objective.len() != self.num_vars {
            return bad("objective", self.objective.len());
        }
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return bad("bounds", self.lower.len().min(self.upper.len()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return bad(&format!("constraint {i}"), c.coeffs.len());
            }
        }
        Ok(())
    }

    /// Does `x` satisfy every constraint and bound exactly?
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.constraints.iter().all(|c| c.is_satisfied(x))
            && x.iter().zip(&self.lower).all(|(v, l)| l.as_ref().is_none_or(|l| v >= l))
            && x.iter().zip(&self.upper).all(|(v, u)| u.as_ref().is_none_or(|u| v <= u))
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).filter(|(c, _)| !c.is_zero()).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.check()?;
        Ok(Simplex::build(self).run(self, None))
    }

    /// Like [`solve`](Self::solve), appending a text dump of the tableau after every pivot.
    pub fn solve_traced(&self, trace: &mut String) -> Result<LpSolution> {
        self.check()?;
        Ok(Simplex::build(self).run(self, Some(trace)))
    }

    /// Phase one only: an exact feasible point, if one exists.
    pub fn feasible(&self) -> Result<Option<Vec<Rational>>> {
        let mut lp = self.clone();
        lp.objective = vec![Rational::zero(); lp.num_vars];
        lp.sense = Sense::Minimize;
        let sol = lp.solve()?;
        Ok(match sol.status {
            LpStatus::Optimal => Some(sol.values),
            _ => None,
        })
    }

    /// Human-readable listing of the program.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let term_list = |coeffs: &[Rational]| {
            let terms: Vec<String> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| format!("{c}*x{j}"))
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            }
        };
        let _ = writeln!(out, "{:?} {}", self.sense, term_list(&self.objective));
        for c in &self.constraints {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, "  {} {} {}", term_list(&c.coeffs), rel, c.rhs);
        }
        for j in 0..self.num_vars {
            let l = self.lower[j].as_ref().map_or("-inf".to_string(), ToString::to_string);
            let u = self.upper[j].as_ref().map_or("+inf".to_string(), ToString::to_string);
            let _ = writeln!(out, "  {l} <= x{j} <= {u}");
        }
        out
    }
}

impl DualCertificate {
    /// Checks sign conditions, stationarity and strong duality against `solution`.
    pub fn verify(&self, lp: &ExactLinearProgram, solution: &LpSolution) -> bool {
        let n = lp.num_vars;
        if self.row_duals.len() != lp.constraints.len() || self.lower_duals.len() != n || self.upper_duals.len() != n {
            return false;
        }
        let signs_ok = lp.constraints.iter().zip(&self.row_duals).all(|(c, y)| match c.relation {
            Relation::Le => !y.is_positive(),
            Relation::Ge => !y.is_negative(),
            Relation::Eq => true,
        });
        let bounds_ok = (0..n).all(|j| {
            !self.lower_duals[j].is_negative()
                && !self.upper_duals[j].is_negative()
                && (lp.lower[j].is_some() || self.lower_duals[j].is_zero())
                && (lp.upper[j].is_some() || self.upper_duals[j].is_zero())
        });
        if !signs_ok || !bounds_ok {
            return false;
        }
        let flip = lp.sense == Sense::Maximize;
        let stationary = (0..n).all(|j| {
            let c = if flip { -&lp.objective[j] } else { lp.objective[j].clone() };
            let mut rhs = &self.lower_duals[j] - &self.upper_duals[j];
            for (con, y) in lp.constraints.iter().zip(&self.row_duals) {
                if !y.is_zero() && !con.coeffs[j].is_zero() {
                    rhs += y * &con.coeffs[j];
                }
            }
            c == rhs
        });
        if !stationary {
            return false;
        }
        let mut dual_obj: Rational = lp.constraints.iter().zip(&self.row_duals).map(|(c, y)| y * &c.rhs).sum();
        for j in 0..n {
            if let Some(l) = &lp.lower[j] {
                dual_obj += &self.lower_duals[j] * l;
            }
            if let Some(u) = &lp.upper[j] {
                dual_obj -= &self.upper_duals[j] * u;
            }
        }
        let primal = if flip { -&solution.objective } else { solution.objective.clone() };
        dual_obj == primal
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// x = lower + y
    Shift { col: usize, lower: Rational, upper_row: Option<usize> },
    /// x = upper - y
    Mirror { col: usize, upper: Rational },
    /// x = y⁺ - y⁻
    Split { pos: usize, neg: usize },
}

struct Simplex {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
    /// Column holding the initial identity entry of each row.
    unit_col: Vec<usize>,
    /// Rows multiplied by -1 to make the right-hand side nonnegative.
    negated: Vec<bool>,
    first_artificial: usize,
    var_map: Vec<VarMap>,
    /// Number of rows coming from user constraints (upper-bound rows follow).
    user_rows: usize,
}

impl Simplex {
    fn build(lp: &ExactLinearProgram) -> Self {
        let n = lp.num_vars;
        let mut var_map = Vec::with_capacity(n);
        let mut ncols = 0;
        let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
        for j in 0..n {
            match (&lp.lower[j], &lp.upper[j]) {
                (Some(l), u) => {
                    let upper_row = u.as_ref().map(|u| {
                        bound_rows.push((ncols, u - l));
                        lp.constraints.len() + bound_rows.len() - 1
                    });
                    var_map.push(VarMap::Shift { col: ncols, lower: l.clone(), upper_row });
                    ncols += 1;
                }
                (None, Some(u)) => {
                    var_map.push(VarMap::Mirror { col: ncols, upper: u.clone() });
                    ncols += 1;
                }
                (None, None) => {
                    var_map.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                    ncols += 2;
                }
            }
        }
        let structural = ncols;

        // rows over structural columns
        let mut raw: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
        for c in &lp.constraints {
            let mut row = vec![Rational::zero(); structural];
            let mut rhs = c.rhs.clone();
            for (j, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                match &var_map[j] {
                    VarMap::Shift { col, lower, .. } => {
                        row[*col] = a.clone();
                        rhs -= a * lower;
                    }
                    VarMap::Mirror { col, upper } => {
                        row[*col] = -a;
                        rhs -= a * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        row[*pos] = a.clone();
                        row[*neg] = -a;
                    }
                }
            }
            raw.push((row, c.relation, rhs));
        }
        for (col, span) in bound_rows {
            let mut row = vec![Rational::zero(); structural];
            row[col] = Rational::one();
            raw.push((row, Relation::Le, span));
        }

        let m = raw.len();
        let mut negated = vec![false; m];
        let mut slack_of: Vec<Option<(usize, bool)>> = vec![None; m];
        for (i, (row, rel, rhs)) in raw.iter_mut().enumerate() {
            if rhs.is_negative() {
                for a in row.iter_mut() {
                    *a = -&*a;
                }
                *rhs = -&*rhs;
                negated[i] = true;
            }
            if *rel != Relation::Eq {
                // +1 slack for <=, -1 surplus for >=, then the row sign flip
                let plus = (*rel == Relation::Le) != negated[i];
                slack_of[i] = Some((ncols, plus));
                ncols += 1;
            }
        }
        let first_artificial = ncols;
        let mut unit_col = vec![0; m];
        let mut artificial_of = vec![None; m];
        for i in 0..m {
            match slack_of[i] {
                Some((col, true)) => unit_col[i] = col,
                _ => {
                    artificial_of[i] = Some(ncols);
                    unit_col[i] = ncols;
                    ncols += 1;
                }
            }
        }

        let mut rows = Vec::with_capacity(m);
        for (i, (row, _, rhs)) in raw.into_iter().enumerate() {
            let mut full = row;
            full.resize(ncols + 1, Rational::zero());
            if let Some((col, plus)) = slack_of[i] {
                full[col] = if plus { Rational::one() } else { -Rational::one() };
            }
            if let Some(col) = artificial_of[i] {
                full[col] = Rational::one();
            }
            full[ncols] = rhs;
            rows.push(full);
        }
        let basis = unit_col.clone();
        Simplex {
            rows,
            basis,
            ncols,
            unit_col,
            negated,
            first_artificial,
            var_map,
            user_rows: lp.constraints.len(),
        }
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d: Vec<Rational> = cost.to_vec();
        d.push(Rational::zero());
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn pivot(&mut self, d: &mut [Rational], r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        if !p.is_one() {
            let inv = p.recip();
            for a in self.rows[r].iter_mut() {
                if !a.is_zero() {
                    *a *= &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let prow: Vec<(usize, Rational)> = nz.iter().map(|&j| (j, self.rows[r][j].clone())).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][e].is_zero() {
                continue;
            }
            let f = self.rows[i][e].clone();
            let row = &mut self.rows[i];
            for (j, a) in &prow {
                row[*j] -= &f * a;
            }
        }
        if !d[e].is_zero() {
            let f = d[e].clone();
            for (j, a) in &prow {
                d[*j] -= &f * a;
            }
        }
        self.basis[r] = e;
    }

    /// Bland's rule. Returns false if unbounded.
    fn optimize(&mut self, d: &mut [Rational], allowed: usize, mut trace: Option<&mut String>) -> bool {
        loop {
            let Some(e) = (0..allowed).find(|&j| d[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[e];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(d, r, e);
            if let Some(t) = trace.as_deref_mut() {
                let _ = writeln!(t, "pivot row {r} col {e}");
                self.render(d, t);
            }
        }
    }

    fn render(&self, d: &[Rational], out: &mut String) {
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "  [b={:>3}] {}", self.basis[i], cells.join("\t"));
        }
        let cells: Vec<String> = d.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "  [  obj] {}", cells.join("\t"));
    }

    fn run(mut self, lp: &ExactLinearProgram, mut trace: Option<&mut String>) -> LpSolution {
        // phase one
        let mut cost1 = vec![Rational::zero(); self.ncols];
        for c in cost1.iter_mut().skip(self.first_artificial) {
            *c = Rational::one();
        }
        let mut d = self.reduced_costs(&cost1);
        if let Some(t) = trace.as_deref_mut() {
            t.push_str("phase 1\n");
            self.render(&d, t);
        }
        let bounded = self.optimize(&mut d, self.ncols, trace.as_deref_mut());
        debug_assert!(bounded, "phase one is bounded below by zero");
        if !d[self.ncols].is_zero() {
            return LpSolution::without_point(LpStatus::Infeasible);
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..self.rows.len() {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            if let Some(e) = (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                self.pivot(&mut d, r, e);
            }
        }

        // phase two, minimization form
        let flip = lp.sense == Sense::Maximize;
        let mut cost2 = vec![Rational::zero(); self.ncols];
        for (j, map) in self.var_map.iter().enumerate() {
            let c = if flip { -&lp.objective[j] } else { lp.objective[j].clone() };
            match map {
                VarMap::Shift { col, .. } => cost2[*col] = c,
                VarMap::Mirror { col, .. } => cost2[*col] = -c,
                VarMap::Split { pos, neg } => {
                    cost2[*neg] = -&c;
                    cost2[*pos] = c;
                }
            }
        }
        let mut d = self.reduced_costs(&cost2);
        if let Some(t) = trace.as_deref_mut() {
            t.push_str("phase 2\n");
            self.render(&d, t);
        }
        if !self.optimize(&mut d, self.first_artificial, trace) {
            return LpSolution::without_point(LpStatus::Unbounded);
        }

        let mut col_value = vec![Rational::zero(); self.ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            col_value[b] = self.rows[r][self.ncols].clone();
        }
        let values: Vec<Rational> = self
            .var_map
            .iter()
            .map(|map| match map {
                VarMap::Shift { col, lower, .. } => lower + &col_value[*col],
                VarMap::Mirror { col, upper } => upper - &col_value[*col],
                VarMap::Split { pos, neg } => &col_value[*pos] - &col_value[*neg],
            })
            .collect();

        // π_r = Σ_k c_B[k] · (B⁻¹)_{k r}, read from the initial identity columns
        let pi: Vec<Rational> = (0..self.rows.len())
            .map(|r| {
                let col = self.unit_col[r];
                let mut acc = Rational::zero();
                for (k, row) in self.rows.iter().enumerate() {
                    let cb = &cost2[self.basis[k]];
                    if !cb.is_zero() && !row[col].is_zero() {
                        acc += cb * &row[col];
                    }
                }
                if self.negated[r] {
                    -acc
                } else {
                    acc
                }
            })
            .collect();
        let n = lp.num_vars;
        let mut lower_duals = vec![Rational::zero(); n];
        let mut upper_duals = vec![Rational::zero(); n];
        for (j, map) in self.var_map.iter().enumerate() {
            match map {
                VarMap::Shift { col, upper_row, .. } => {
                    lower_duals[j] = d[*col].clone();
                    if let Some(r) = upper_row {
                        upper_duals[j] = -&pi[*r];
                    }
                }
                VarMap::Mirror { col, .. } => upper_duals[j] = d[*col].clone(),
                VarMap::Split { .. } => {}
            }
        }
        let certificate = DualCertificate { row_duals: pi[..self.user_rows].to_vec(), lower_duals, upper_duals };
        let objective = lp.evaluate(&values);
        let active = lp
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.lhs(&values) == c.rhs)
            .map(|(i, _)| i)
            .collect();
        LpSolution { status: LpStatus::Optimal, values, objective, active, certificate: Some(certificate) }
    }
}
