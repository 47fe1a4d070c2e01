//! Exhaustive solver for the three objectives, budget bounds and levels,
//! weighted-sum sweeps and LP export.
//!
//! Once the set of materialized views is fixed, giving each query its best
//! materialized view is optimal, so enumerating every materialization
//! vector and assigning greedily solves the problem exactly.

mod lp;

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use thiserror::Error;

pub use lp::{
    build_lp, export_lp, lp_values, parse_lp, Comparison, LpCheck, LpConstraint, LpError, LpModel,
    LpTerm,
};

use crate::viewcost::{evaluate_valid, greedy_assignment, CostBreakdown, ProblemInstance, Selection};
use crate::FEASIBILITY_TOL;

/// Default enumeration cap: 2^22 materialization vectors.
pub const DEFAULT_MAX_VIEWS: usize = 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("{views} candidate views exceed the enumeration limit of {limit}")]
    EnumerationLimitExceeded { views: usize, limit: usize },
    #[error("invalid objective: {0}")]
    InvalidObjective(&'static str),
    #[error("lower bound {c_minus} exceeds upper bound {c_plus}")]
    ReversedBounds { c_minus: f64, c_plus: f64 },
    #[error("mask range {start}..{end} exceeds 2^{views}")]
    MaskRange { start: u64, end: u64, views: usize },
}

/// What to optimize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// MV1: minimize processing time subject to total cost <= budget (USD).
    MinTimeWithinBudget(f64),
    /// MV2: minimize total cost subject to processing time <= deadline (hours).
    MinCostWithinDeadline(f64),
    /// MV3: minimize `alpha * t_proc + (1 - alpha) * cost`, hours and USD
    /// summed as raw numbers.
    Weighted(f64),
}

impl Objective {
    pub fn validate(&self) -> Result<(), ExactError> {
        match *self {
            Self::MinTimeWithinBudget(c) if c.is_nan() || c < 0.0 => {
                Err(ExactError::InvalidObjective("budget must be >= 0"))
            }
            Self::MinCostWithinDeadline(t) if t.is_nan() || t < 0.0 => {
                Err(ExactError::InvalidObjective("deadline must be >= 0"))
            }
            Self::Weighted(a) if !(0.0..=1.0).contains(&a) => {
                Err(ExactError::InvalidObjective("alpha must lie in [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, b: &CostBreakdown) -> f64 {
        match *self {
            Self::MinTimeWithinBudget(_) => b.t_proc,
            Self::MinCostWithinDeadline(_) => b.total_cost,
            Self::Weighted(alpha) => alpha * b.t_proc + (1.0 - alpha) * b.total_cost,
        }
    }

    pub fn is_feasible(&self, b: &CostBreakdown) -> bool {
        match *self {
            Self::MinTimeWithinBudget(budget) => b.total_cost <= budget + FEASIBILITY_TOL,
            Self::MinCostWithinDeadline(deadline) => b.t_proc <= deadline + FEASIBILITY_TOL,
            Self::Weighted(_) => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// Proven optimal by enumeration.
    Optimal,
    /// Feasible heuristic answer.
    Feasible,
    /// No selection satisfies the constraint.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub selection: Selection,
    pub breakdown: CostBreakdown,
    /// Objective value of `breakdown`.
    pub objective: f64,
}

impl Solution {
    pub fn new(objective: &Objective, selection: Selection, breakdown: CostBreakdown) -> Self {
        Self {
            objective: objective.value(&breakdown),
            selection,
            breakdown,
        }
    }

    /// Total order used to pick among solutions: objective, then fewer
    /// materialized views, then the lexicographically smallest vector.
    pub fn rank(&self, other: &Self) -> Ordering {
        self.objective
            .total_cmp(&other.objective)
            .then_with(|| tie_break(&self.selection, &other.selection))
    }
}

/// Fewer materialized views first, then lexicographically smallest
/// materialization vector (`false < true`).
pub fn tie_break(a: &Selection, b: &Selection) -> Ordering {
    a.materialized_count()
        .cmp(&b.materialized_count())
        .then_with(|| a.materialized.cmp(&b.materialized))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// `None` exactly when the status is `Infeasible`.
    pub solution: Option<Solution>,
    /// Number of materialization vectors (or heuristic rounds) examined.
    pub explored: u64,
}

impl SolveResult {
    pub fn is_feasible(&self) -> bool {
        self.solution.is_some()
    }

    /// Combines results over disjoint parts of the search space. The
    /// outcome does not depend on argument order.
    pub fn merge(self, other: Self) -> Self {
        let explored = self.explored + other.explored;
        let solution = match (self.solution, other.solution) {
            (Some(a), Some(b)) => Some(if b.rank(&a) == Ordering::Less { b } else { a }),
            (a, b) => a.or(b),
        };
        let status = match (&solution, self.status) {
            (None, _) => SolveStatus::Infeasible,
            (Some(_), SolveStatus::Infeasible) => other.status,
            (Some(_), s) => s,
        };
        Self {
            status,
            solution,
            explored,
        }
    }
}

/// Exhaustive enumeration over materialization vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactSolver {
    pub max_views: usize,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self {
            max_views: DEFAULT_MAX_VIEWS,
        }
    }
}

impl ExactSolver {
    pub fn new(max_views: usize) -> Self {
        Self { max_views }
    }

    fn check_size(&self, instance: &ProblemInstance) -> Result<(), ExactError> {
        let views = instance.n_views();
        // Masks are u64 and must stay enumerable.
        if views > self.max_views || views >= 63 {
            return Err(ExactError::EnumerationLimitExceeded {
                views,
                limit: self.max_views.min(62),
            });
        }
        Ok(())
    }

    /// Number of materialization vectors for `instance`.
    pub fn mask_count(instance: &ProblemInstance) -> u64 {
        1u64 << instance.n_views()
    }

    pub fn solve(&self, instance: &ProblemInstance, objective: &Objective) -> Result<SolveResult, ExactError> {
        self.check_size(instance)?;
        self.solve_range(instance, objective, 0..Self::mask_count(instance))
    }

    /// Enumerates only the masks in `masks` (bit `k` set = view `k`
    /// materialized). Results over a partition of `0..2^n` combine with
    /// [`SolveResult::merge`] into the full answer.
    pub fn solve_range(
        &self,
        instance: &ProblemInstance,
        objective: &Objective,
        masks: Range<u64>,
    ) -> Result<SolveResult, ExactError> {
        self.check_size(instance)?;
        objective.validate()?;
        let n = instance.n_views();
        if masks.end > Self::mask_count(instance) || masks.start > masks.end {
            return Err(ExactError::MaskRange {
                start: masks.start,
                end: masks.end,
                views: n,
            });
        }

        let mut best: Option<Solution> = None;
        let mut y = alloc::vec![false; n];
        let explored = masks.end - masks.start;
        for mask in masks {
            for (k, slot) in y.iter_mut().enumerate() {
                *slot = mask >> k & 1 == 1;
            }
            let sel = greedy_assignment(instance, &y);
            let breakdown = evaluate_valid(instance, &sel);
            if !objective.is_feasible(&breakdown) {
                continue;
            }
            let value = objective.value(&breakdown);
            let better = match &best {
                None => true,
                Some(b) => value
                    .total_cmp(&b.objective)
                    .then_with(|| tie_break(&sel, &b.selection))
                    == Ordering::Less,
            };
            if better {
                best = Some(Solution {
                    selection: sel,
                    breakdown,
                    objective: value,
                });
            }
        }

        Ok(SolveResult {
            status: if best.is_some() {
                SolveStatus::Optimal
            } else {
                SolveStatus::Infeasible
            },
            solution: best,
            explored,
        })
    }

    pub fn budget_bounds(&self, instance: &ProblemInstance) -> Result<BudgetBounds, ExactError> {
        let cheapest = self.solve(instance, &Objective::MinCostWithinDeadline(f64::INFINITY))?;
        let fastest = self.solve(instance, &Objective::MinTimeWithinBudget(f64::INFINITY))?;
        let cost = |r: &SolveResult| r.solution.as_ref().map_or(0.0, |s| s.breakdown.total_cost);
        Ok(BudgetBounds {
            c_minus: cost(&cheapest),
            c_plus: cost(&fastest),
        })
    }

    pub fn pareto_sweep(
        &self,
        instance: &ProblemInstance,
        alphas: &[f64],
    ) -> Result<Vec<(f64, SolveResult)>, ExactError> {
        let mut out: Vec<(f64, SolveResult)> = Vec::new();
        for &alpha in alphas {
            let result = self.solve(instance, &Objective::Weighted(alpha))?;
            let duplicate = out.iter().any(|(_, r)| {
                r.solution.as_ref().map(|s| &s.selection)
                    == result.solution.as_ref().map(|s| &s.selection)
            });
            if !duplicate {
                out.push((alpha, result));
            }
        }
        let points: Vec<Option<(f64, f64)>> = out
            .iter()
            .map(|(_, r)| r.solution.as_ref().map(|s| (s.breakdown.t_proc, s.breakdown.total_cost)))
            .collect();
        let mut keep = points.iter().map(|p| {
            let Some(p) = p else { return false };
            !points.iter().flatten().any(|q| dominates(*q, *p))
        });
        out.retain(|_| keep.next().unwrap_or(false));
        Ok(out)
    }
}

/// `a` is no worse than `b` on (time, cost) and strictly better on one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Solves with the default enumeration limit.
pub fn solve_exact(instance: &ProblemInstance, objective: &Objective) -> Result<SolveResult, ExactError> {
    ExactSolver::default().solve(instance, objective)
}

/// Minimum achievable cost, and the cost of the fastest solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetBounds {
    pub c_minus: f64,
    pub c_plus: f64,
}

pub fn budget_bounds(instance: &ProblemInstance) -> Result<BudgetBounds, ExactError> {
    ExactSolver::default().budget_bounds(instance)
}

/// One MV3 solve per alpha; duplicates and dominated points removed.
pub fn pareto_sweep(instance: &ProblemInstance, alphas: &[f64]) -> Result<Vec<(f64, SolveResult)>, ExactError> {
    ExactSolver::default().pareto_sweep(instance, alphas)
}

/// Budget groups: 5, 15 and 25 % of the way from `c_minus` to `c_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BudgetLevel {
    G1,
    G2,
    G3,
}

impl BudgetLevel {
    pub const ALL: [BudgetLevel; 3] = [BudgetLevel::G1, BudgetLevel::G2, BudgetLevel::G3];

    pub fn fraction(self) -> f64 {
        match self {
            Self::G1 => 0.05,
            Self::G2 => 0.15,
            Self::G3 => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::G1 => "G1",
            Self::G2 => "G2",
            Self::G3 => "G3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "G1" | "g1" | "C1" | "c1" => Some(Self::G1),
            "G2" | "g2" | "C2" | "c2" => Some(Self::G2),
            "G3" | "g3" | "C3" | "c3" => Some(Self::G3),
            _ => None,
        }
    }

    pub fn budget(self, bounds: &BudgetBounds) -> f64 {
        bounds.c_minus + self.fraction() * (bounds.c_plus - bounds.c_minus)
    }
}

/// `(C1, C2, C3)` for the given bounds.
pub fn budget_levels(c_minus: f64, c_plus: f64) -> Result<[f64; 3], ExactError> {
    if c_minus.is_nan() || c_plus.is_nan() || c_minus > c_plus {
        return Err(ExactError::ReversedBounds { c_minus, c_plus });
    }
    let bounds = BudgetBounds { c_minus, c_plus };
    Ok(BudgetLevel::ALL.map(|l| l.budget(&bounds)))
}
