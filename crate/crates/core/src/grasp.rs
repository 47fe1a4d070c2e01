//! GRASP for the budget-constrained problem (minimize processing time with
//! total cost under a budget).
//!
//! A solution is the set of materialized views; query assignments are
//! always the greedy best for that set. Each round runs a randomized greedy
//! construction that only adds views lowering total cost, then a local
//! search that adds views lowering processing time while staying within
//! budget. The best round wins.
//!
//! Randomness comes from ChaCha8 seeded with `seed`; round `r` uses stream
//! `r`, so a round's outcome does not depend on how many rounds run or in
//! which order. The generator is only drawn from when a restricted list has
//! more than one entry.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::{tie_break, SolveResult, SolveStatus, Solution};
use crate::viewcost::{
    evaluate_valid, greedy_assignment, validate_selection, ProblemInstance, Selection, Violation,
};
use crate::FEASIBILITY_TOL;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraspError {
    #[error("invalid GRASP parameters: {0}")]
    InvalidParams(&'static str),
    #[error("budget must be a non-negative number, got {0}")]
    InvalidBudget(f64),
    #[error("no feasible construction after {attempts} attempt(s)")]
    NoFeasible { attempts: u32 },
    #[error("local search start exceeds the budget ({cost} > {budget})")]
    InfeasibleStart { cost: f64, budget: f64 },
    #[error("invalid selection ({} violation(s))", .0.len())]
    InvalidSelection(Vec<Violation>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspParams {
    /// Independent construction + local search rounds (`it_GR`).
    pub restarts: u32,
    /// Construction attempts per round before giving up (`it_RC`).
    pub construction_attempts: u32,
    /// Share of the ranked candidates drawn from during construction.
    pub construction_fraction: f64,
    /// Share of the ranked moves drawn from during local search.
    pub search_fraction: f64,
    pub seed: u64,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self {
            restarts: 100,
            construction_attempts: 200,
            construction_fraction: 0.1,
            search_fraction: 0.1,
            seed: 0,
        }
    }
}

impl GraspParams {
    pub fn validate(&self) -> Result<(), GraspError> {
        let fraction_ok = |f: f64| f > 0.0 && f <= 1.0;
        if self.restarts == 0 {
            return Err(GraspError::InvalidParams("restarts must be >= 1"));
        }
        if self.construction_attempts == 0 {
            return Err(GraspError::InvalidParams("construction attempts must be >= 1"));
        }
        if !fraction_ok(self.construction_fraction) || !fraction_ok(self.search_fraction) {
            return Err(GraspError::InvalidParams("fractions must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Effect of materializing one more view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicator {
    pub view: usize,
    /// Extra materialization, maintenance and storage cost (USD).
    pub cost: f64,
    /// Processing time saved over the period (hours).
    pub gain: f64,
    /// Net saving: value of the time gain minus `cost` (USD).
    pub benefit: f64,
}

/// Indicators of every view not yet materialized, by increasing view index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViewIndicators {
    pub entries: Vec<Indicator>,
}

impl ViewIndicators {
    pub fn get(&self, view: usize) -> Option<&Indicator> {
        self.entries
            .binary_search_by_key(&view, |e| e.view)
            .ok()
            .map(|p| &self.entries[p])
    }
}

/// Indicators for `current`, which must be a valid selection.
///
/// A query's current gain is the best gain among materialized views, so
/// `benefit` is exactly the drop in total cost when the view is added and
/// assignments are redone, provided no other view becomes unused.
pub fn indicators(instance: &ProblemInstance, current: &Selection) -> Result<ViewIndicators, GraspError> {
    validate_selection(instance, current).map_err(GraspError::InvalidSelection)?;
    Ok(indicators_valid(instance, current))
}

fn indicators_valid(instance: &ProblemInstance, current: &Selection) -> ViewIndicators {
    let gains = instance.gains();
    let y = &current.materialized;
    let mut fresh = alloc::vec![0.0; instance.n_views()];
    for i in 0..instance.n_queries() {
        let row = gains.row(i);
        let cur = row
            .iter()
            .filter(|&&(l, _)| y[l])
            .map(|&(_, g)| g)
            .fold(0.0, f64::max);
        for &(k, g) in row {
            if !y[k] && g > cur {
                fresh[k] += g - cur;
            }
        }
    }

    let rate = instance.fleet().hourly_rate();
    let price = &instance.catalog().storage().price;
    let storage_scale = instance.storage_months() * instance.storage_copies();
    let stored: f64 = instance.dataset_size()
        + current.materialized_views().map(|k| instance.views()[k].size).sum::<f64>();
    let stored_cost = price.at(stored);

    let entries = instance
        .views()
        .iter()
        .enumerate()
        .filter(|&(k, _)| !y[k])
        .map(|(k, v)| {
            let compute = (v.mat_time + v.maint_time) * rate;
            let storage = (price.at(stored + v.size) - stored_cost) * storage_scale;
            let cost = compute + storage;
            let gain = instance.frequency() * fresh[k];
            Indicator {
                view: k,
                cost,
                gain,
                benefit: gain * rate - cost,
            }
        })
        .collect();
    ViewIndicators { entries }
}

/// `ceil(fraction * n)`, at least 1. The small slack keeps decimal
/// fractions such as 0.1 * 30 from rounding up to 4.
fn list_size(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64 - 1e-9;
    let k = x as usize;
    let k = if (k as f64) < x { k + 1 } else { k };
    k.clamp(1, n)
}

fn pick<R: Rng + ?Sized>(rng: &mut R, list_len: usize, fraction: f64) -> usize {
    let m = list_size(fraction, list_len);
    if m > 1 {
        rng.random_range(0..m)
    } else {
        0
    }
}

fn with_view(instance: &ProblemInstance, sel: &Selection, view: usize) -> Selection {
    let mut y = sel.materialized.clone();
    y[view] = true;
    greedy_assignment(instance, &y)
}

/// Randomized greedy construction, retried until its cost fits `budget`.
pub fn construct<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    budget: f64,
    params: &GraspParams,
    rng: &mut R,
) -> Result<Selection, GraspError> {
    params.validate()?;
    check_budget(budget)?;
    for attempt in 1..=params.construction_attempts {
        let mut sel = Selection::empty(instance);
        let mut randomized = false;
        loop {
            let ind = indicators_valid(instance, &sel);
            let mut cands: Vec<&Indicator> = ind.entries.iter().filter(|c| c.benefit > 0.0).collect();
            if cands.is_empty() {
                break;
            }
            cands.sort_by(|a, b| b.benefit.total_cmp(&a.benefit).then(a.view.cmp(&b.view)));
            randomized |= list_size(params.construction_fraction, cands.len()) > 1;
            let chosen = cands[pick(rng, cands.len(), params.construction_fraction)].view;
            sel = with_view(instance, &sel, chosen);
        }
        if evaluate_valid(instance, &sel).total_cost <= budget + FEASIBILITY_TOL {
            return Ok(sel);
        }
        if !randomized {
            // Every further attempt would rebuild the same selection.
            return Err(GraspError::NoFeasible { attempts: attempt });
        }
    }
    Err(GraspError::NoFeasible {
        attempts: params.construction_attempts,
    })
}

/// Adds views that cut processing time while the cost stays within budget.
pub fn local_search<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    start: &Selection,
    budget: f64,
    params: &GraspParams,
    rng: &mut R,
) -> Result<Selection, GraspError> {
    params.validate()?;
    check_budget(budget)?;
    validate_selection(instance, start).map_err(GraspError::InvalidSelection)?;
    let mut sel = start.clone();
    let mut cost = evaluate_valid(instance, &sel).total_cost;
    if cost > budget + FEASIBILITY_TOL {
        return Err(GraspError::InfeasibleStart { cost, budget });
    }
    loop {
        let ind = indicators_valid(instance, &sel);
        let mut moves: Vec<&Indicator> = ind
            .entries
            .iter()
            .filter(|m| m.gain > 0.0 && cost - m.benefit <= budget + FEASIBILITY_TOL)
            .collect();
        if moves.is_empty() {
            return Ok(sel);
        }
        moves.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.view.cmp(&b.view)));
        let chosen = moves[pick(rng, moves.len(), params.search_fraction)].view;
        sel = with_view(instance, &sel, chosen);
        cost = evaluate_valid(instance, &sel).total_cost;
    }
}

fn check_budget(budget: f64) -> Result<(), GraspError> {
    if budget.is_nan() || budget < 0.0 {
        return Err(GraspError::InvalidBudget(budget));
    }
    Ok(())
}

/// Generator for round `round`.
pub fn round_rng(seed: u64, round: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(round));
    rng
}

/// Runs one round; `None` when construction finds nothing within budget.
pub fn grasp_round(
    instance: &ProblemInstance,
    budget: f64,
    params: &GraspParams,
    round: u32,
) -> Result<Option<Solution>, GraspError> {
    let mut rng = round_rng(params.seed, round);
    let start = match construct(instance, budget, params, &mut rng) {
        Ok(s) => s,
        Err(GraspError::NoFeasible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let sel = local_search(instance, &start, budget, params, &mut rng)?;
    let breakdown = evaluate_valid(instance, &sel);
    Ok(Some(Solution {
        objective: breakdown.t_proc,
        selection: sel,
        breakdown,
    }))
}

/// Lower processing time, then lower cost, then the exact solver's tie-break.
fn better(a: &Solution, b: &Solution) -> bool {
    a.breakdown
        .t_proc
        .total_cmp(&b.breakdown.t_proc)
        .then(a.breakdown.total_cost.total_cmp(&b.breakdown.total_cost))
        .then_with(|| tie_break(&a.selection, &b.selection))
        == Ordering::Less
}

/// Best of `params.restarts` rounds.
pub fn grasp_solve(instance: &ProblemInstance, budget: f64, params: &GraspParams) -> Result<SolveResult, GraspError> {
    params.validate()?;
    check_budget(budget)?;
    let mut best: Option<Solution> = None;
    for round in 0..params.restarts {
        if let Some(s) = grasp_round(instance, budget, params, round)? {
            if best.as_ref().is_none_or(|b| better(&s, b)) {
                best = Some(s);
            }
        }
    }
    Ok(SolveResult {
        status: if best.is_some() {
            SolveStatus::Feasible
        } else {
            SolveStatus::Infeasible
        },
        solution: best,
        explored: u64::from(params.restarts),
    })
}
