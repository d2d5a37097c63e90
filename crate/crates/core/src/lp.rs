//! Linear programs and a two-phase primal simplex over exact rationals or
//! `f64`, plus a reader/writer for the CPLEX-style LP text format.

use std::collections::HashMap;
use std::fmt::{self, Debug, Write as _};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{format_decimal_or_fraction, from_f64, parse_rational, to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// Upper bound; every variable has lower bound 0.
    pub upper: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `optimize c·x` subject to linear constraints and `0 ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProgram {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, Rational)>,
    pub constraints: Vec<Constraint>,
}

impl LpProgram {
    pub fn new(sense: Sense) -> Self {
        LpProgram {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            upper: None,
        });
        self.variables.len() - 1
    }

    pub fn set_upper(&mut self, var: usize, upper: Rational) {
        self.variables[var].upper = Some(upper);
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs: merge_terms(coeffs),
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, Rational)>) {
        self.objective = merge_terms(coeffs);
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn check_well_formed(&self) -> Result<()> {
        let n = self.variables.len();
        let bad = |what: &str| Error::invalid(format!("{what} references an undeclared variable"));
        if self.objective.iter().any(|(j, _)| *j >= n) {
            return Err(bad("objective"));
        }
        for c in &self.constraints {
            if c.coeffs.iter().any(|(j, _)| *j >= n) {
                return Err(bad(&format!("constraint {}", c.name)));
            }
        }
        for v in &self.variables {
            if v.upper.as_ref().is_some_and(|u| u.is_negative()) {
                return Err(Error::invalid(format!("variable {} has a negative upper bound", v.name)));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective.iter().map(|(j, c)| c * &values[*j]).sum()
    }

    /// First constraint or bound violated by `values`, if any.
    pub fn first_violation(&self, values: &[Rational]) -> Option<String> {
        for (v, x) in self.variables.iter().zip(values) {
            if x.is_negative() {
                return Some(format!("{} is negative", v.name));
            }
            if v.upper.as_ref().is_some_and(|u| x > u) {
                return Some(format!("{} exceeds its upper bound", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: Rational = c.coeffs.iter().map(|(j, a)| a * &values[*j]).sum();
            let ok = match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            };
            if !ok {
                return Some(format!("constraint {} is violated", c.name));
            }
        }
        None
    }
}

fn merge_terms(coeffs: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut sorted = coeffs;
    sorted.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(sorted.len());
    for (j, c) in sorted {
        match out.last_mut() {
            Some((k, acc)) if *k == j => *acc += c,
            _ => out.push((j, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

/// Number type the simplex runs over.
pub trait Scalar: Clone + Debug + PartialOrd + Send + Sync {
    fn zero_value() -> Self;
    fn unit() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn near_zero(&self) -> bool;
    fn positive(&self) -> bool;
    fn negative(&self) -> bool;
}

impl Scalar for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn near_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

/// Absolute tolerance used by the floating-point mode.
pub const FLOAT_EPS: f64 = 1e-9;

impl Scalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
    fn to_rational(&self) -> Rational {
        from_f64(*self).unwrap_or_default()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn near_zero(&self) -> bool {
        self.abs() <= FLOAT_EPS
    }
    fn positive(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn negative(&self) -> bool {
        *self < -FLOAT_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    #[default]
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Most negative reduced cost; falls back to Bland for the rest of the
    /// solve after a run of degenerate pivots.
    Dantzig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub arithmetic: Arithmetic,
    pub pivot_rule: PivotRule,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            arithmetic: Arithmetic::Rational,
            pivot_rule: PivotRule::Bland,
            max_iterations: 1_000_000,
        }
    }
}

impl SolverOptions {
    pub fn float() -> Self {
        SolverOptions {
            arithmetic: Arithmetic::Float,
            pivot_rule: PivotRule::Dantzig,
            ..Self::default()
        }
    }

    pub fn with_arithmetic(arithmetic: Arithmetic) -> Self {
        match arithmetic {
            Arithmetic::Rational => Self::default(),
            Arithmetic::Float => Self::float(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Objective in the program's own sense; `None` unless optimal.
    pub objective: Option<Rational>,
    /// Primal values (the last basic solution for non-optimal statuses).
    pub values: Vec<Rational>,
    /// One multiplier per constraint followed by one per upper bound, in the
    /// program's sense (`objective = Σ duals·rhs` at optimality).
    pub duals: Vec<Rational>,
    pub iterations: usize,
}

/// Solves `program`. Deterministic for a fixed pivot rule.
pub fn solve(program: &LpProgram, options: &SolverOptions) -> Result<LpResult> {
    program.check_well_formed()?;
    match options.arithmetic {
        Arithmetic::Rational => Simplex::<Rational>::build(program).run(program, options),
        Arithmetic::Float => Simplex::<f64>::build(program).run(program, options),
    }
}

/// Dual objective `Σ y_i b_i`, dual sign feasibility and nonnegativity of
/// every reduced cost, all recomputed from the original data.
pub fn check_strong_duality(program: &LpProgram, result: &LpResult) -> Result<()> {
    if result.status != LpStatus::Optimal {
        return Err(Error::invalid("strong duality applies to optimal solutions only"));
    }
    let primal = result.objective.clone().unwrap_or_default();
    if let Some(v) = program.first_violation(&result.values) {
        return Err(Error::invariant(format!("primal infeasible: {v}")));
    }
    let rows = expanded_rows(program);
    if result.duals.len() != rows.len() {
        return Err(Error::invariant("dual vector has the wrong length"));
    }
    // Work in minimisation form: min s·c x with multipliers s·y.
    let s = if program.sense == Sense::Maximize { -Rational::one() } else { Rational::one() };
    let mut dual_obj = Rational::zero();
    let mut reduced: Vec<Rational> = vec![Rational::zero(); program.num_variables()];
    for (j, c) in &program.objective {
        reduced[*j] = &s * c;
    }
    for (row, y) in rows.iter().zip(&result.duals) {
        let y = &s * y;
        let sign_ok = match row.relation {
            Relation::Le => !y.is_positive(),
            Relation::Ge => !y.is_negative(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(Error::invariant(format!("dual of {} has the wrong sign", row.name)));
        }
        dual_obj += &y * &row.rhs;
        for (j, a) in &row.coeffs {
            reduced[*j] -= &y * a;
        }
    }
    if let Some(j) = reduced.iter().position(|d| d.is_negative()) {
        return Err(Error::invariant(format!(
            "reduced cost of {} is negative",
            program.variables[j].name
        )));
    }
    if &s * &primal != dual_obj {
        return Err(Error::invariant(format!(
            "primal objective {} differs from dual objective {}",
            primal,
            &s * &dual_obj
        )));
    }
    Ok(())
}

/// Constraints followed by one `x_j <= u_j` row per upper bound.
fn expanded_rows(program: &LpProgram) -> Vec<Constraint> {
    let mut rows = program.constraints.clone();
    for (j, v) in program.variables.iter().enumerate() {
        if let Some(u) = &v.upper {
            rows.push(Constraint {
                name: format!("{}_ub", v.name),
                coeffs: vec![(j, Rational::one())],
                relation: Relation::Le,
                rhs: u.clone(),
            });
        }
    }
    rows
}

type SparseRow<S> = Vec<(u32, S)>;

struct Simplex<S: Scalar> {
    rows: Vec<SparseRow<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    /// Columns: structural, then slack/surplus, then artificial.
    num_structural: usize,
    num_columns: usize,
    first_artificial: usize,
    /// Identity column (+1 in row i at start) and the sign applied to row i.
    identity_col: Vec<usize>,
    row_sign: Vec<S>,
    cost: Vec<S>,
}

impl<S: Scalar> Simplex<S> {
    fn build(program: &LpProgram) -> Self {
        let rows_in = expanded_rows(program);
        let m = rows_in.len();
        let n = program.num_variables();
        // Orient every row so that its right-hand side is nonnegative.
        let mut oriented = Vec::with_capacity(m);
        for r in &rows_in {
            let flip = r.rhs.is_negative();
            let rel = match (r.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (rel, _) => rel,
            };
            oriented.push((flip, rel));
        }
        let num_slack = oriented.iter().filter(|(_, rel)| *rel != Relation::Eq).count();
        let num_art = oriented.iter().filter(|(_, rel)| *rel != Relation::Le).count();
        let first_slack = n;
        let first_artificial = n + num_slack;
        let num_columns = first_artificial + num_art;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut identity_col = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (first_slack, first_artificial);
        for (r, (flip, rel)) in rows_in.iter().zip(oriented) {
            let sign = if flip { S::unit().neg() } else { S::unit() };
            let mut row: SparseRow<S> = r
                .coeffs
                .iter()
                .map(|(j, a)| (*j as u32, S::from_rational(a).mul(&sign)))
                .filter(|(_, a)| !a.near_zero())
                .collect();
            match rel {
                Relation::Le => {
                    row.push((next_slack as u32, S::unit()));
                    basis.push(next_slack);
                    identity_col.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row.push((next_slack as u32, S::unit().neg()));
                    row.push((next_art as u32, S::unit()));
                    basis.push(next_art);
                    identity_col.push(next_art);
                    next_slack += 1;
                    next_art += 1;
                }
                Relation::Eq => {
                    row.push((next_art as u32, S::unit()));
                    basis.push(next_art);
                    identity_col.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
            rhs.push(S::from_rational(&r.rhs).mul(&sign));
            row_sign.push(sign);
        }
        let mut cost = vec![S::zero_value(); num_columns];
        let s = if program.sense == Sense::Maximize { S::unit().neg() } else { S::unit() };
        for (j, c) in &program.objective {
            cost[*j] = S::from_rational(c).mul(&s);
        }
        Simplex {
            rows,
            rhs,
            basis,
            num_structural: n,
            num_columns,
            first_artificial,
            identity_col,
            row_sign,
            cost,
        }
    }

    fn entry(row: &SparseRow<S>, col: usize) -> Option<&S> {
        row.binary_search_by_key(&(col as u32), |(j, _)| *j)
            .ok()
            .map(|k| &row[k].1)
    }

    /// Reduced costs `d = c − c_B B⁻¹ A` and objective `c_B x_B` for `cost`.
    fn pricing(&self, cost: &[S]) -> (Vec<S>, S) {
        let mut d = cost.to_vec();
        let mut obj = S::zero_value();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.near_zero() {
                continue;
            }
            obj = obj.add(&cb.mul(&self.rhs[i]));
            for (j, a) in row {
                d[*j as usize] = d[*j as usize].sub(&cb.mul(a));
            }
        }
        (d, obj)
    }

    fn pivot(&mut self, r: usize, c: usize, d: &mut [S], obj: &mut S) {
        let piv = Self::entry(&self.rows[r], c).expect("pivot entry").clone();
        let inv = S::unit().div(&piv);
        for (_, a) in self.rows[r].iter_mut() {
            *a = a.mul(&inv);
        }
        self.rhs[r] = self.rhs[r].mul(&inv);
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let Some(f) = Self::entry(&self.rows[i], c).cloned() else { continue };
            self.rows[i] = Self::axpy(&self.rows[i], &f, &prow);
            self.rhs[i] = self.rhs[i].sub(&f.mul(&prhs));
        }
        let dc = d[c].clone();
        if !dc.near_zero() {
            for (j, a) in &prow {
                d[*j as usize] = d[*j as usize].sub(&dc.mul(a));
            }
            *obj = obj.add(&dc.mul(&prhs));
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// `row − f·prow`, dropping exact (or tolerance) zeros.
    fn axpy(row: &SparseRow<S>, f: &S, prow: &SparseRow<S>) -> SparseRow<S> {
        let mut out = Vec::with_capacity(row.len() + prow.len());
        let (mut a, mut b) = (0, 0);
        while a < row.len() || b < prow.len() {
            let ja = row.get(a).map(|e| e.0).unwrap_or(u32::MAX);
            let jb = prow.get(b).map(|e| e.0).unwrap_or(u32::MAX);
            if ja < jb {
                out.push(row[a].clone());
                a += 1;
            } else if jb < ja {
                let v = f.mul(&prow[b].1).neg();
                if !v.near_zero() {
                    out.push((jb, v));
                }
                b += 1;
            } else {
                let v = row[a].1.sub(&f.mul(&prow[b].1));
                if !v.near_zero() {
                    out.push((ja, v));
                }
                a += 1;
                b += 1;
            }
        }
        out
    }

    /// Runs primal simplex iterations with the reduced costs `d`.
    fn iterate(
        &mut self,
        d: &mut [S],
        obj: &mut S,
        allowed: usize,
        options: &SolverOptions,
        iterations: &mut usize,
    ) -> LpStatus {
        let mut bland = options.pivot_rule == PivotRule::Bland;
        let mut degenerate_run = 0usize;
        loop {
            if *iterations >= options.max_iterations {
                return LpStatus::IterationLimit;
            }
            let entering = if bland {
                (0..allowed).find(|&j| d[j].negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..allowed {
                    if d[j].negative() && best.is_none_or(|b| d[j] < d[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else { return LpStatus::Optimal };
            let mut leave: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let Some(a) = Self::entry(row, c) else { continue };
                if !a.positive() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best
                            || (!(ratio > *best) && !(ratio < *best) && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, theta)) = leave else { return LpStatus::Unbounded };
            if theta.near_zero() {
                degenerate_run += 1;
                if degenerate_run > 50 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c, d, obj);
            *iterations += 1;
        }
    }

    fn run(mut self, program: &LpProgram, options: &SolverOptions) -> Result<LpResult> {
        let m = self.rows.len();
        let mut iterations = 0;
        let has_artificial = self.first_artificial < self.num_columns;
        if has_artificial {
            let mut phase1_cost = vec![S::zero_value(); self.num_columns];
            for c in phase1_cost.iter_mut().skip(self.first_artificial) {
                *c = S::unit();
            }
            let (mut d, mut obj) = self.pricing(&phase1_cost);
            let status = self.iterate(&mut d, &mut obj, self.num_columns, options, &mut iterations);
            match status {
                LpStatus::Optimal => {}
                LpStatus::IterationLimit => return Ok(self.partial(LpStatus::IterationLimit, iterations)),
                LpStatus::Unbounded | LpStatus::Infeasible => {
                    return Err(Error::invariant("phase one of the simplex cannot be unbounded"))
                }
            }
            if obj.positive() {
                return Ok(self.partial(LpStatus::Infeasible, iterations));
            }
            // Drive zero-valued artificials out of the basis where possible.
            for i in 0..m {
                if self.basis[i] < self.first_artificial {
                    continue;
                }
                let col = self.rows[i]
                    .iter()
                    .find(|(j, a)| (*j as usize) < self.first_artificial && !a.near_zero())
                    .map(|(j, _)| *j as usize);
                if let Some(c) = col {
                    self.pivot(i, c, &mut d, &mut obj);
                }
            }
        }
        let cost = self.cost.clone();
        let (mut d, mut obj) = self.pricing(&cost);
        let status = self.iterate(&mut d, &mut obj, self.first_artificial, options, &mut iterations);
        if status != LpStatus::Optimal {
            return Ok(self.partial(status, iterations));
        }
        let values = self.primal_values();
        let duals: Vec<Rational> = (0..m)
            .map(|i| {
                // d_j = 0 − y_i for the identity column of row i.
                let y = d[self.identity_col[i]].neg().mul(&self.row_sign[i]);
                let y = if program.sense == Sense::Maximize { y.neg() } else { y };
                y.to_rational()
            })
            .collect();
        let objective = program.objective_value(&values);
        Ok(LpResult {
            status: LpStatus::Optimal,
            objective: Some(objective),
            values,
            duals,
            iterations,
        })
    }

    fn primal_values(&self) -> Vec<Rational> {
        let mut values = vec![Rational::zero(); self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                values[b] = self.rhs[i].to_rational();
            }
        }
        values
    }

    fn partial(&self, status: LpStatus, iterations: usize) -> LpResult {
        LpResult {
            status,
            objective: None,
            values: self.primal_values(),
            duals: Vec::new(),
            iterations,
        }
    }
}

/// Writes `program` in CPLEX LP format. Coefficients are decimals when they
/// have a finite expansion and `p/q` otherwise.
pub fn write_lp(program: &LpProgram) -> String {
    let mut out = String::new();
    let name = |j: usize| program.variables[j].name.as_str();
    let terms = |coeffs: &[(usize, Rational)]| -> String {
        if coeffs.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (j, c)) in coeffs.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if k == 0 && sign == "+" {
                let _ = write!(s, "{} {}", format_decimal_or_fraction(c), name(*j));
            } else {
                let _ = write!(s, " {} {} {}", sign, format_decimal_or_fraction(&c.abs()), name(*j));
            }
        }
        s
    };
    out.push_str(match program.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let _ = writeln!(out, " obj: {}", terms(&program.objective));
    out.push_str("Subject To\n");
    for c in &program.constraints {
        let _ = writeln!(
            out,
            " {}: {} {} {}",
            c.name,
            terms(&c.coeffs),
            c.relation,
            format_decimal_or_fraction(&c.rhs)
        );
    }
    out.push_str("Bounds\n");
    for v in &program.variables {
        match &v.upper {
            Some(u) => {
                let _ = writeln!(out, " 0 <= {} <= {}", v.name, format_decimal_or_fraction(u));
            }
            None => {
                let _ = writeln!(out, " {} >= 0", v.name);
            }
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Objective,
    Constraints,
    Bounds,
    End,
}

/// Reads the subset of the LP format produced by [`write_lp`]: one
/// statement per line, tokens separated by whitespace.
pub fn parse_lp(text: &str) -> Result<LpProgram> {
    let mut program = LpProgram::new(Sense::Minimize);
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut section = Section::Start;
    let mut var = |program: &mut LpProgram, name: &str| -> usize {
        if let Some(&j) = index.get(name) {
            return j;
        }
        let j = program.add_variable(name);
        index.insert(name.to_string(), j);
        j
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => {
                program.sense = Sense::Minimize;
                section = Section::Objective;
                continue;
            }
            "maximize" | "maximise" | "max" => {
                program.sense = Sense::Maximize;
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        let (label, body) = match line.split_once(':') {
            Some((l, b)) => (Some(l.trim().to_string()), b.trim()),
            None => (None, line),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match section {
            Section::Objective => {
                let (coeffs, rest) = parse_terms(&tokens, line_no, &mut program, &mut var)?;
                if !rest.is_empty() {
                    return Err(Error::parse(line_no, "unexpected tokens after objective"));
                }
                program.set_objective(coeffs);
            }
            Section::Constraints => {
                let (coeffs, rest) = parse_terms(&tokens, line_no, &mut program, &mut var)?;
                if rest.len() != 2 {
                    return Err(Error::parse(line_no, "expected `<relation> <rhs>`"));
                }
                let relation = match rest[0] {
                    "<=" | "=<" | "<" => Relation::Le,
                    ">=" | "=>" | ">" => Relation::Ge,
                    "=" => Relation::Eq,
                    other => return Err(Error::parse(line_no, format!("unknown relation `{other}`"))),
                };
                let rhs = parse_rational(rest[1]).map_err(|m| Error::parse(line_no, m))?;
                let name = label.unwrap_or_else(|| format!("c{}", program.constraints.len() + 1));
                program.add_constraint(name, coeffs, relation, rhs);
            }
            Section::Bounds => match tokens.as_slice() {
                [name, ">=", zero] if parse_rational(zero).is_ok_and(|z| z.is_zero()) => {
                    var(&mut program, name);
                }
                [zero, "<=", name, "<=", upper] if parse_rational(zero).is_ok_and(|z| z.is_zero()) => {
                    let u = parse_rational(upper).map_err(|m| Error::parse(line_no, m))?;
                    let j = var(&mut program, name);
                    program.set_upper(j, u);
                }
                [name, "<=", upper] => {
                    let u = parse_rational(upper).map_err(|m| Error::parse(line_no, m))?;
                    let j = var(&mut program, name);
                    program.set_upper(j, u);
                }
                _ => return Err(Error::parse(line_no, "unsupported bound (lower bounds must be 0)")),
            },
            Section::Start | Section::End => {
                return Err(Error::parse(line_no, "statement outside any section"));
            }
        }
    }
    if section != Section::End {
        return Err(Error::parse(text.lines().count(), "missing `End`"));
    }
    Ok(program)
}

type Terms<'t> = (Vec<(usize, Rational)>, Vec<&'t str>);

fn parse_terms<'t>(
    tokens: &[&'t str],
    line: usize,
    program: &mut LpProgram,
    var: &mut impl FnMut(&mut LpProgram, &str) -> usize,
) -> Result<Terms<'t>> {
    let mut coeffs = Vec::new();
    let mut sign = Rational::one();
    let mut coef: Option<Rational> = None;
    let mut k = 0;
    while k < tokens.len() {
        let t = tokens[k];
        if matches!(t, "<=" | ">=" | "=" | "<" | ">" | "=<" | "=>") {
            break;
        }
        match t {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Ok(c) = parse_rational(t) {
                    if coef.is_some() {
                        // A lone constant, as in `obj: 0`.
                        return Err(Error::parse(line, "two consecutive numbers"));
                    }
                    coef = Some(c);
                } else {
                    let j = var(program, t);
                    let c = coef.take().unwrap_or_else(Rational::one);
                    coeffs.push((j, &sign * c));
                    sign = Rational::one();
                }
            }
        }
        k += 1;
    }
    if let Some(c) = coef {
        if !c.is_zero() {
            return Err(Error::parse(line, "constant terms are not supported"));
        }
    }
    Ok((coeffs, tokens[k..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn small_max() -> LpProgram {
        // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3
        let mut p = LpProgram::new(Sense::Maximize);
        let x = p.add_variable("x");
        let y = p.add_variable("y");
        p.set_objective(vec![(x, int(3)), (y, int(2))]);
        p.add_constraint("a", vec![(x, int(1)), (y, int(1))], Relation::Le, int(4));
        p.add_constraint("b", vec![(x, int(1)), (y, int(3))], Relation::Le, int(6));
        p.set_upper(x, int(3));
        p
    }

    #[test]
    fn bounded_single_variable() {
        let mut p = LpProgram::new(Sense::Maximize);
        let y = p.add_variable("y");
        p.set_objective(vec![(y, int(1))]);
        p.add_constraint("cap", vec![(y, int(1))], Relation::Le, int(1));
        let r = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.objective, Some(int(1)));
        check_strong_duality(&p, &r).unwrap();
    }

    #[test]
    fn textbook_max() {
        let p = small_max();
        for options in [SolverOptions::default(), SolverOptions { pivot_rule: PivotRule::Dantzig, ..Default::default() }] {
            let r = solve(&p, &options).unwrap();
            assert_eq!(r.objective, Some(int(11)));
            assert_eq!(r.values, vec![int(3), int(1)]);
            check_strong_duality(&p, &r).unwrap();
        }
        let f = solve(&p, &SolverOptions::float()).unwrap();
        assert!((to_f64(f.objective.as_ref().unwrap()) - 11.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 1, x - y >= -1/2, y >= 1/3
        let mut p = LpProgram::new(Sense::Minimize);
        let x = p.add_variable("x");
        let y = p.add_variable("y");
        p.set_objective(vec![(x, int(1)), (y, int(2))]);
        p.add_constraint("sum", vec![(x, int(1)), (y, int(1))], Relation::Eq, int(1));
        p.add_constraint("diff", vec![(x, int(1)), (y, int(-1))], Relation::Ge, ratio(-1, 2));
        p.add_constraint("low", vec![(y, int(1))], Relation::Ge, ratio(1, 3));
        let r = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(r.objective, Some(ratio(4, 3)));
        check_strong_duality(&p, &r).unwrap();
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = LpProgram::new(Sense::Minimize);
        let x = p.add_variable("x");
        p.add_constraint("lo", vec![(x, int(1))], Relation::Ge, int(2));
        p.add_constraint("hi", vec![(x, int(1))], Relation::Le, int(1));
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, LpStatus::Infeasible);

        let mut q = LpProgram::new(Sense::Maximize);
        let x = q.add_variable("x");
        q.set_objective(vec![(x, int(1))]);
        q.add_constraint("lo", vec![(x, int(1))], Relation::Ge, int(2));
        assert_eq!(solve(&q, &SolverOptions::default()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn iteration_limit_reported() {
        let p = small_max();
        let options = SolverOptions { max_iterations: 0, ..Default::default() };
        assert_eq!(solve(&p, &options).unwrap().status, LpStatus::IterationLimit);
    }

    #[test]
    fn degenerate_program_terminates() {
        // Beale's classic cycling example for the largest-coefficient rule.
        let mut p = LpProgram::new(Sense::Minimize);
        let x: Vec<usize> = (0..4).map(|i| p.add_variable(format!("x{i}"))).collect();
        p.set_objective(vec![(x[0], ratio(-3, 4)), (x[1], int(150)), (x[2], ratio(-1, 50)), (x[3], int(6))]);
        p.add_constraint("r1", vec![(x[0], ratio(1, 4)), (x[1], int(-60)), (x[2], ratio(-1, 25)), (x[3], int(9))], Relation::Le, int(0));
        p.add_constraint("r2", vec![(x[0], ratio(1, 2)), (x[1], int(-90)), (x[2], ratio(-1, 50)), (x[3], int(3))], Relation::Le, int(0));
        p.add_constraint("r3", vec![(x[2], int(1))], Relation::Le, int(1));
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let r = solve(&p, &SolverOptions { pivot_rule: rule, ..Default::default() }).unwrap();
            assert_eq!(r.status, LpStatus::Optimal);
            assert_eq!(r.objective, Some(ratio(-1, 20)));
            check_strong_duality(&p, &r).unwrap();
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProgram::new(Sense::Maximize);
        let x = p.add_variable("x");
        let y = p.add_variable("y");
        p.set_objective(vec![(x, int(1))]);
        p.add_constraint("e1", vec![(x, int(1)), (y, int(1))], Relation::Eq, int(1));
        p.add_constraint("e2", vec![(x, int(2)), (y, int(2))], Relation::Eq, int(2));
        let r = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(r.objective, Some(int(1)));
        check_strong_duality(&p, &r).unwrap();
    }

    #[test]
    fn lp_text_round_trip() {
        let mut p = small_max();
        p.add_constraint("third", vec![(0, ratio(1, 3)), (1, ratio(-5, 2))], Relation::Ge, ratio(-7, 3));
        let text = write_lp(&p);
        assert!(text.contains("1/3 x"));
        assert!(text.contains("- 2.5 y"));
        let q = parse_lp(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn lp_parse_errors() {
        assert!(parse_lp("Minimize\n obj: x\nSubject To\n c: x ?? 1\nEnd\n").is_err());
        assert!(parse_lp("Minimize\n obj: x\n").is_err());
    }
}
