//! Mixed-integer model of the selection problem in CPLEX LP text format.
//!
//! Variables (indices are 1-based in names):
//! * `x_i_k` binary, query `i` reads view `k` (only where the gain is positive)
//! * `y_k` binary, view `k` is materialized
//! * `z_e` binary, storage volume falls in tariff segment `e`
//! * `u_e` continuous, GB stored beyond the start of segment `e`
//! * `t_proc t_mat t_maint s_total c_c c_s c_t c_total` continuous
//!
//! The storage tariff is linearized over `[0, s(D) + sum s(V_k)]` with one
//! binary and one load variable per segment: `sum z_e = 1`,
//! `u_e <= len_e z_e`, `S = sum (start_e z_e + u_e)` and
//! `c_s = t(D) n_s sum (base_e z_e + gradient_e u_e)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use super::Objective;
use crate::viewcost::{evaluate_valid, validate_selection, ProblemInstance, Selection, ViewCostError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Le,
    Ge,
    Eq,
}

impl Comparison {
    fn symbol(self) -> &'static str {
        match self {
            Self::Le => "<=",
            Self::Ge => ">=",
            Self::Eq => "=",
        }
    }

    fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Self::Le => lhs <= rhs + tol,
            Self::Ge => lhs >= rhs - tol,
            Self::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpTerm {
    pub coef: f64,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpConstraint {
    pub name: String,
    pub terms: Vec<LpTerm>,
    pub cmp: Comparison,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    pub name: String,
    pub maximize: bool,
    pub objective: Vec<LpTerm>,
    pub constraints: Vec<LpConstraint>,
    /// Explicit bounds `(var, lower, upper)`; unlisted variables are `[0, inf)`.
    pub bounds: Vec<(String, f64, f64)>,
    pub binaries: Vec<String>,
}

/// Outcome of substituting values into a model.
#[derive(Debug, Clone, PartialEq)]
pub struct LpCheck {
    pub objective: f64,
    pub violations: Vec<String>,
}

impl LpCheck {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn eval_terms(terms: &[LpTerm], values: &BTreeMap<String, f64>) -> (f64, Vec<String>) {
    let mut missing = Vec::new();
    let mut sum = 0.0;
    for t in terms {
        match values.get(&t.var) {
            Some(v) => sum += t.coef * v,
            None => missing.push(t.var.clone()),
        }
    }
    (sum, missing)
}

impl LpModel {
    /// Every variable name, in first-appearance order.
    pub fn variables(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        let names = self
            .objective
            .iter()
            .chain(self.constraints.iter().flat_map(|c| c.terms.iter()))
            .map(|t| t.var.as_str())
            .chain(self.bounds.iter().map(|b| b.0.as_str()))
            .chain(self.binaries.iter().map(String::as_str));
        for n in names {
            if !seen.contains(&n) {
                seen.push(n);
            }
        }
        seen
    }

    pub fn constraint(&self, name: &str) -> Option<&LpConstraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    /// Substitutes `values` into the objective and every row.
    pub fn check(&self, values: &BTreeMap<String, f64>, tol: f64) -> LpCheck {
        let mut violations = Vec::new();
        for var in self.variables() {
            let Some(&v) = values.get(var) else {
                violations.push(format!("{var} has no value"));
                continue;
            };
            let (lo, hi) = self
                .bounds
                .iter()
                .find(|b| b.0 == var)
                .map_or((0.0, f64::INFINITY), |b| (b.1, b.2));
            if v < lo - tol || v > hi + tol {
                violations.push(format!("{var} = {v} outside [{lo}, {hi}]"));
            }
            if self.binaries.iter().any(|b| b == var) && v.abs() > tol && (v - 1.0).abs() > tol {
                violations.push(format!("{var} = {v} is not binary"));
            }
        }
        for c in &self.constraints {
            let (lhs, missing) = eval_terms(&c.terms, values);
            if missing.is_empty() && !c.cmp.holds(lhs, c.rhs, tol) {
                violations.push(format!("{}: {lhs} {} {}", c.name, c.cmp.symbol(), c.rhs));
            }
        }
        LpCheck {
            objective: eval_terms(&self.objective, values).0,
            violations,
        }
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, terms: &[LpTerm]) -> fmt::Result {
    if terms.is_empty() {
        return f.write_str("0");
    }
    for (i, t) in terms.iter().enumerate() {
        let sign = if t.coef < 0.0 { "-" } else { "+" };
        if i > 0 {
            write!(f, " {sign} ")?;
        } else if t.coef < 0.0 {
            f.write_str("- ")?;
        }
        let mag = t.coef.abs();
        if mag == 1.0 {
            f.write_str(&t.var)?;
        } else {
            write!(f, "{} {}", mag, t.var)?;
        }
    }
    Ok(())
}

fn num(v: f64) -> f64 {
    // Normalizes -0.0 so it prints as 0.
    v + 0.0
}

impl fmt::Display for LpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "\\Problem name: {}", self.name)?;
        writeln!(f, "{}", if self.maximize { "Maximize" } else { "Minimize" })?;
        f.write_str(" obj: ")?;
        write_expr(f, &self.objective)?;
        writeln!(f)?;
        writeln!(f, "Subject To")?;
        for c in &self.constraints {
            write!(f, " {}: ", c.name)?;
            write_expr(f, &c.terms)?;
            writeln!(f, " {} {}", c.cmp.symbol(), num(c.rhs))?;
        }
        if !self.bounds.is_empty() {
            writeln!(f, "Bounds")?;
            for (v, lo, hi) in &self.bounds {
                match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => writeln!(f, " {} <= {v} <= {}", num(*lo), num(*hi))?,
                    (true, false) => writeln!(f, " {v} >= {}", num(*lo))?,
                    (false, true) => writeln!(f, " -inf <= {v} <= {}", num(*hi))?,
                    (false, false) => writeln!(f, " {v} free")?,
                }
            }
        }
        if !self.binaries.is_empty() {
            writeln!(f, "Binary")?;
            for b in &self.binaries {
                writeln!(f, " {b}")?;
            }
        }
        writeln!(f, "End")
    }
}

struct Builder {
    model: LpModel,
}

impl Builder {
    fn row(&mut self, name: impl Into<String>, terms: Vec<(f64, String)>, cmp: Comparison, rhs: f64) {
        let terms = terms
            .into_iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(coef, var)| LpTerm { coef, var })
            .collect();
        self.model.constraints.push(LpConstraint {
            name: name.into(),
            terms,
            cmp,
            rhs,
        });
    }
}

fn x_var(i: usize, k: usize) -> String {
    format!("x_{}_{}", i + 1, k + 1)
}

fn y_var(k: usize) -> String {
    format!("y_{}", k + 1)
}

/// Storage tariff segments intersecting `[0, max stored size]`, as
/// `(start, length, gradient, base)`.
fn storage_segments(instance: &ProblemInstance) -> Vec<(f64, f64, f64, f64)> {
    let s_max = instance.dataset_size() + instance.views().iter().map(|v| v.size).sum::<f64>();
    let segs = instance.catalog().storage().price.segments();
    let mut out = Vec::new();
    for (e, s) in segs.iter().enumerate() {
        if e > 0 && s.start >= s_max {
            break;
        }
        let end = segs.get(e + 1).map_or(s_max, |n| n.start.min(s_max));
        out.push((s.start, (end - s.start).max(0.0), s.gradient, s.base));
    }
    out
}

/// Builds the model for `objective`.
pub fn build_lp(instance: &ProblemInstance, objective: &Objective) -> LpModel {
    let mut b = Builder {
        model: LpModel {
            name: "view_selection".into(),
            ..LpModel::default()
        },
    };
    let gains = instance.gains();
    let f = instance.frequency();
    let v = |s: &str| s.to_string();

    // At most one view per query.
    for i in 0..instance.n_queries() {
        let row = gains.row(i);
        if !row.is_empty() {
            let terms = row.iter().map(|&(k, _)| (1.0, x_var(i, k))).collect();
            b.row(format!("one_view_{}", i + 1), terms, Comparison::Le, 1.0);
        }
    }
    // Only materialized views are read.
    for (i, k, _) in gains.iter() {
        b.row(
            format!("use_{}_{}", i + 1, k + 1),
            alloc::vec![(1.0, x_var(i, k)), (-1.0, y_var(k))],
            Comparison::Le,
            0.0,
        );
    }
    // Materialized views are read by someone.
    let mut readers: Vec<Vec<usize>> = (0..instance.n_views()).map(|_| Vec::new()).collect();
    for (i, k, _) in gains.iter() {
        readers[k].push(i);
    }
    for (k, qs) in readers.iter().enumerate() {
        let mut terms = alloc::vec![(1.0, y_var(k))];
        terms.extend(qs.iter().map(|&i| (-1.0, x_var(i, k))));
        b.row(format!("useful_{}", k + 1), terms, Comparison::Le, 0.0);
    }

    let mut t_proc = alloc::vec![(1.0, v("t_proc"))];
    t_proc.extend(gains.iter().map(|(i, k, g)| (f * g, x_var(i, k))));
    b.row("def_t_proc", t_proc, Comparison::Eq, instance.baseline_time());

    let mut t_mat = alloc::vec![(1.0, v("t_mat"))];
    let mut t_maint = alloc::vec![(1.0, v("t_maint"))];
    let mut s_total = alloc::vec![(1.0, v("s_total"))];
    for (k, view) in instance.views().iter().enumerate() {
        t_mat.push((-view.mat_time, y_var(k)));
        t_maint.push((-view.maint_time, y_var(k)));
        s_total.push((-view.size, y_var(k)));
    }
    b.row("def_t_mat", t_mat, Comparison::Eq, 0.0);
    b.row("def_t_maint", t_maint, Comparison::Eq, 0.0);
    b.row("def_s_total", s_total, Comparison::Eq, instance.dataset_size());

    let storage_scale = instance.storage_months() * instance.storage_copies();
    let mut z_vars = Vec::new();
    if instance.n_views() == 0 {
        let c_s = instance.catalog().storage().price.at(instance.dataset_size()) * storage_scale;
        b.row("def_c_s", alloc::vec![(1.0, v("c_s"))], Comparison::Eq, c_s);
    } else {
        let segs = storage_segments(instance);
        let z = |e: usize| format!("z_{}", e + 1);
        let u = |e: usize| format!("u_{}", e + 1);
        b.row("seg_pick", (0..segs.len()).map(|e| (1.0, z(e))).collect(), Comparison::Eq, 1.0);
        for (e, &(_, len, _, _)) in segs.iter().enumerate() {
            b.row(
                format!("seg_load_{}", e + 1),
                alloc::vec![(1.0, u(e)), (-len, z(e))],
                Comparison::Le,
                0.0,
            );
        }
        let mut sum = alloc::vec![(1.0, v("s_total"))];
        for (e, &(start, _, _, _)) in segs.iter().enumerate() {
            sum.push((-start, z(e)));
            sum.push((-1.0, u(e)));
        }
        b.row("seg_size", sum, Comparison::Eq, 0.0);
        let mut c_s = alloc::vec![(1.0, v("c_s"))];
        for (e, &(_, _, gradient, base)) in segs.iter().enumerate() {
            c_s.push((-storage_scale * base, z(e)));
            c_s.push((-storage_scale * gradient, u(e)));
        }
        b.row("def_c_s", c_s, Comparison::Eq, 0.0);
        z_vars = (0..segs.len()).map(z).collect();
    }

    let rate = instance.fleet().hourly_rate();
    b.row(
        "def_c_c",
        alloc::vec![(1.0, v("c_c")), (-rate, v("t_proc")), (-rate, v("t_mat")), (-rate, v("t_maint"))],
        Comparison::Eq,
        0.0,
    );
    let c_t = instance.catalog().transfer_out().at(instance.download_volume());
    b.row("def_c_t", alloc::vec![(1.0, v("c_t"))], Comparison::Eq, c_t);
    b.row(
        "def_c_total",
        alloc::vec![(1.0, v("c_total")), (-1.0, v("c_c")), (-1.0, v("c_s")), (-1.0, v("c_t"))],
        Comparison::Eq,
        0.0,
    );

    let objective_terms = match *objective {
        Objective::MinTimeWithinBudget(budget) => {
            if budget.is_finite() {
                b.row("budget", alloc::vec![(1.0, v("c_total"))], Comparison::Le, budget);
            }
            alloc::vec![(1.0, v("t_proc"))]
        }
        Objective::MinCostWithinDeadline(deadline) => {
            if deadline.is_finite() {
                b.row("deadline", alloc::vec![(1.0, v("t_proc"))], Comparison::Le, deadline);
            }
            alloc::vec![(1.0, v("c_total"))]
        }
        Objective::Weighted(alpha) => alloc::vec![(alpha, v("t_proc")), (1.0 - alpha, v("c_total"))],
    };
    b.model.objective = objective_terms
        .into_iter()
        .filter(|(c, _)| *c != 0.0)
        .map(|(coef, var)| LpTerm { coef, var })
        .collect();

    b.model.binaries = gains
        .iter()
        .map(|(i, k, _)| x_var(i, k))
        .chain((0..instance.n_views()).map(y_var))
        .chain(z_vars)
        .collect();
    b.model
}

/// LP text for `objective`.
pub fn export_lp(instance: &ProblemInstance, objective: &Objective) -> String {
    build_lp(instance, objective).to_string()
}

/// Values of every model variable for a selection, for substitution checks.
pub fn lp_values(instance: &ProblemInstance, sel: &Selection) -> Result<BTreeMap<String, f64>, ViewCostError> {
    validate_selection(instance, sel).map_err(ViewCostError::InvalidSelection)?;
    let b = evaluate_valid(instance, sel);
    let mut out = BTreeMap::new();
    for (i, k, _) in instance.gains().iter() {
        let on = sel.assignment[i] == Some(k);
        out.insert(x_var(i, k), if on { 1.0 } else { 0.0 });
    }
    for (k, &m) in sel.materialized.iter().enumerate() {
        out.insert(y_var(k), if m { 1.0 } else { 0.0 });
    }
    if instance.n_views() > 0 {
        let segs = storage_segments(instance);
        let active = segs
            .iter()
            .rposition(|s| s.0 <= b.stored_size)
            .unwrap_or(0);
        for (e, s) in segs.iter().enumerate() {
            let on = e == active;
            out.insert(format!("z_{}", e + 1), if on { 1.0 } else { 0.0 });
            out.insert(format!("u_{}", e + 1), if on { b.stored_size - s.0 } else { 0.0 });
        }
    }
    for (name, value) in [
        ("t_proc", b.t_proc),
        ("t_mat", b.t_mat),
        ("t_maint", b.t_maint),
        ("s_total", b.stored_size),
        ("c_c", b.c_c),
        ("c_s", b.c_s),
        ("c_t", b.c_t),
        ("c_total", b.total_cost),
    ] {
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binary,
    General,
    End,
}

fn section_header(line: &str) -> Option<(Section, bool)> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "minimize" | "minimise" | "min" | "minimum" => (Section::Objective, false),
        "maximize" | "maximise" | "max" | "maximum" => (Section::Objective, true),
        "subject to" | "such that" | "st" | "s.t." | "st." => (Section::Constraints, false),
        "bounds" | "bound" => (Section::Bounds, false),
        "binary" | "binaries" | "bin" => (Section::Binary, false),
        "general" | "generals" | "gen" => (Section::General, false),
        "end" => (Section::End, false),
        _ => return None,
    })
}

fn parse_number(tok: &str) -> Option<f64> {
    let lower = tok.to_ascii_lowercase();
    match lower.trim_start_matches(['+', '-']) {
        "inf" | "infinity" => {
            return Some(if lower.starts_with('-') { f64::NEG_INFINITY } else { f64::INFINITY })
        }
        _ => {}
    }
    let body = tok.trim_start_matches(['+', '-']);
    if body.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        tok.parse().ok()
    } else {
        None
    }
}

fn parse_cmp(tok: &str) -> Option<Comparison> {
    match tok {
        "<=" | "=<" | "<" => Some(Comparison::Le),
        ">=" | "=>" | ">" => Some(Comparison::Ge),
        "=" => Some(Comparison::Eq),
        _ => None,
    }
}

struct Tokens<'a> {
    toks: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn peek(&self) -> Option<(usize, &'a str)> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn last_line(&self) -> usize {
        self.toks.last().map_or(0, |t| t.0)
    }

    /// Optional `name:` label.
    fn label(&mut self) -> Option<String> {
        let (_, t) = self.peek()?;
        if let Some(name) = t.strip_suffix(':') {
            self.pos += 1;
            return Some(name.to_string());
        }
        if self.toks.get(self.pos + 1).map(|t| t.1) == Some(":") {
            self.pos += 2;
            return Some(t.to_string());
        }
        None
    }

    /// Linear terms up to a comparison operator or the end of the stream.
    fn terms(&mut self) -> Result<Vec<LpTerm>, LpError> {
        let mut out = Vec::new();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        while let Some((line, t)) = self.peek() {
            if parse_cmp(t).is_some() {
                break;
            }
            self.pos += 1;
            match t {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                _ => {
                    if let Some(n) = parse_number(t) {
                        if coef.is_some() {
                            return Err(LpError::Parse { line, msg: format!("unexpected number `{t}`") });
                        }
                        coef = Some(n);
                    } else {
                        out.push(LpTerm {
                            coef: sign * coef.take().unwrap_or(1.0),
                            var: t.to_string(),
                        });
                        sign = 1.0;
                    }
                }
            }
        }
        if let Some(c) = coef {
            // Bare constants in the objective are ignored; in rows they are an error.
            if c != 0.0 && self.peek().is_some() {
                return Err(LpError::Parse {
                    line: self.peek().map_or(0, |t| t.0),
                    msg: "constant term on the left-hand side".into(),
                });
            }
        }
        Ok(out)
    }
}

/// Parses the LP subset written by [`export_lp`] plus common variants
/// (multi-line rows, `Maximize`, `Bounds` forms, `General` ignored).
pub fn parse_lp(text: &str) -> Result<LpModel, LpError> {
    let mut model = LpModel::default();
    let mut section = Section::Preamble;
    let mut buckets: [Vec<(usize, &str)>; 2] = [Vec::new(), Vec::new()];

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (content, comment) = match raw.find('\\') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if section == Section::Preamble {
            if let Some(name) = comment.and_then(|c| c.trim().strip_prefix("Problem name:")) {
                model.name = name.trim().to_string();
            }
        }
        if content.trim().is_empty() {
            continue;
        }
        if let Some((s, max)) = section_header(content) {
            section = s;
            if s == Section::Objective {
                model.maximize = max;
            }
            continue;
        }
        match section {
            Section::Preamble => {
                return Err(LpError::Parse { line: line_no, msg: "content before objective section".into() })
            }
            Section::Objective => buckets[0].extend(content.split_whitespace().map(|t| (line_no, t))),
            Section::Constraints => buckets[1].extend(content.split_whitespace().map(|t| (line_no, t))),
            Section::Bounds => model.bounds.push(parse_bound(line_no, content)?),
            Section::Binary => model.binaries.extend(content.split_whitespace().map(str::to_string)),
            Section::General => {}
            Section::End => {
                return Err(LpError::Parse { line: line_no, msg: "content after End".into() })
            }
        }
    }

    let [obj, rows] = buckets;
    let mut toks = Tokens { toks: obj, pos: 0 };
    toks.label();
    model.objective = toks.terms()?;
    if let Some((line, t)) = toks.peek() {
        return Err(LpError::Parse { line, msg: format!("unexpected `{t}` in objective") });
    }

    let mut toks = Tokens { toks: rows, pos: 0 };
    let mut unnamed = 0;
    while toks.peek().is_some() {
        let name = toks.label().unwrap_or_else(|| {
            unnamed += 1;
            format!("R{unnamed}")
        });
        let terms = toks.terms()?;
        let (line, op) = toks.next().ok_or(LpError::Parse {
            line: toks.last_line(),
            msg: format!("row `{name}` has no comparison"),
        })?;
        let cmp = parse_cmp(op).ok_or(LpError::Parse { line, msg: format!("bad operator `{op}`") })?;
        let mut sign = 1.0;
        let mut tok = toks.next();
        if let Some((_, "-")) = tok {
            sign = -1.0;
            tok = toks.next();
        } else if let Some((_, "+")) = tok {
            tok = toks.next();
        }
        let rhs = tok
            .and_then(|(_, t)| parse_number(t))
            .ok_or(LpError::Parse { line, msg: format!("row `{name}` has no right-hand side") })?;
        model.constraints.push(LpConstraint {
            name,
            terms,
            cmp,
            rhs: sign * rhs,
        });
    }
    Ok(model)
}

fn parse_bound(line: usize, content: &str) -> Result<(String, f64, f64), LpError> {
    let err = || LpError::Parse { line, msg: format!("unsupported bound `{}`", content.trim()) };
    let t: Vec<&str> = content.split_whitespace().collect();
    match t.as_slice() {
        [v, free] if free.eq_ignore_ascii_case("free") => {
            Ok((v.to_string(), f64::NEG_INFINITY, f64::INFINITY))
        }
        [lo, op1, v, op2, hi] => {
            let (Some(Comparison::Le), Some(Comparison::Le)) = (parse_cmp(op1), parse_cmp(op2)) else {
                return Err(err());
            };
            Ok((v.to_string(), parse_number(lo).ok_or_else(err)?, parse_number(hi).ok_or_else(err)?))
        }
        [v, op, n] => {
            let n = parse_number(n).ok_or_else(err)?;
            match parse_cmp(op).ok_or_else(err)? {
                Comparison::Le => Ok((v.to_string(), 0.0, n)),
                Comparison::Ge => Ok((v.to_string(), n, f64::INFINITY)),
                Comparison::Eq => Ok((v.to_string(), n, n)),
            }
        }
        _ => Err(err()),
    }
}
