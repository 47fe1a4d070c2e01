//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls the solvers or the cost evaluation under test: costs
//! are recomputed straight from the instance fields and the tariffs, and the
//! joint oracle enumerates query assignments directly.
#![allow(dead_code)]

use std::cmp::Ordering;

use cloudview_core::catalogs;
use cloudview_core::pricing::{Fleet, StorageMode};
use cloudview_core::{generate_instance, GenConfig, Objective, ProblemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eval {
    pub t_proc: f64,
    pub cost: f64,
}

/// Straight-line cost model for explicit `y` and `x`.
pub fn hand_eval(inst: &ProblemInstance, y: &[bool], x: &[Option<usize>]) -> Eval {
    let f = inst.frequency();
    let mut per_run = 0.0;
    for (i, q) in inst.queries().iter().enumerate() {
        let gain = x[i].map_or(0.0, |k| inst.gains().get(i, k));
        per_run += q.base_time - gain;
    }
    let t_proc = f * per_run;
    let mut t_mat = 0.0;
    let mut t_maint = 0.0;
    let mut stored = inst.dataset_size();
    for (k, v) in inst.views().iter().enumerate() {
        if y[k] {
            t_mat += v.mat_time;
            t_maint += v.maint_time;
            stored += v.size;
        }
    }
    let fleet = inst.fleet();
    let c_c = (t_proc + t_mat + t_maint) * fleet.instance().hourly_price * fleet.count() as f64;
    let copies = match inst.catalog().storage().mode {
        StorageMode::PerInstance => fleet.count() as f64,
        StorageMode::Global => 1.0,
    };
    let c_s = inst.catalog().storage().price.eval(stored).unwrap() * inst.storage_months() * copies;
    let download: f64 = f * inst.queries().iter().map(|q| q.result_size).sum::<f64>();
    let c_t = inst.catalog().transfer_out().eval(download).unwrap();
    Eval {
        t_proc,
        cost: c_c + c_s + c_t,
    }
}

/// Calls `visit(y, eval)` for every assignment `x` (each query: nothing,
/// or any view with a positive gain); `y` is the set of used views.
pub fn for_each_joint(inst: &ProblemInstance, mut visit: impl FnMut(&[bool], Eval)) {
    let n_q = inst.n_queries();
    let options: Vec<Vec<Option<usize>>> = (0..n_q)
        .map(|i| {
            std::iter::once(None)
                .chain(inst.gains().row(i).iter().map(|&(k, _)| Some(k)))
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; n_q];
    let mut x = vec![None; n_q];
    let mut y = vec![false; inst.n_views()];
    loop {
        y.iter_mut().for_each(|b| *b = false);
        for i in 0..n_q {
            x[i] = options[i][idx[i]];
            if let Some(k) = x[i] {
                y[k] = true;
            }
        }
        visit(&y, hand_eval(inst, &y, &x));
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == n_q {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Minimum cost over everything, and the cheapest cost among the fastest.
pub fn joint_bounds(inst: &ProblemInstance) -> (f64, f64) {
    let mut c_min = f64::INFINITY;
    let mut fastest = (f64::INFINITY, f64::INFINITY);
    for_each_joint(inst, |_, e| {
        c_min = c_min.min(e.cost);
        if (e.t_proc, e.cost) < fastest {
            fastest = (e.t_proc, e.cost);
        }
    });
    (c_min, fastest.1)
}

pub fn objective_value(obj: &Objective, e: &Eval) -> f64 {
    match *obj {
        Objective::MinTimeWithinBudget(_) => e.t_proc,
        Objective::MinCostWithinDeadline(_) => e.cost,
        Objective::Weighted(a) => a * e.t_proc + (1.0 - a) * e.cost,
    }
}

pub fn feasible(obj: &Objective, e: &Eval) -> bool {
    match *obj {
        Objective::MinTimeWithinBudget(c) => e.cost <= c + TOL,
        Objective::MinCostWithinDeadline(t) => e.t_proc <= t + TOL,
        Objective::Weighted(_) => true,
    }
}

/// Optimum of each objective over the joint space: objective value, then
/// fewer views, then the lexicographically smallest `y`.
pub fn joint_optima(inst: &ProblemInstance, objs: &[Objective]) -> Vec<Option<(Vec<bool>, Eval)>> {
    let count = |y: &[bool]| y.iter().filter(|&&b| b).count();
    let mut best: Vec<Option<(Vec<bool>, Eval)>> = vec![None; objs.len()];
    for_each_joint(inst, |y, e| {
        for (obj, slot) in objs.iter().zip(best.iter_mut()) {
            if !feasible(obj, &e) {
                continue;
            }
            let better = match slot {
                None => true,
                Some((by, be)) => {
                    objective_value(obj, &e)
                        .partial_cmp(&objective_value(obj, be))
                        .unwrap_or(Ordering::Equal)
                        .then(count(y).cmp(&count(by)))
                        .then(y.cmp(by.as_slice()))
                        == Ordering::Less
                }
            };
            if better {
                *slot = Some((y.to_vec(), e));
            }
        }
    });
    best
}

/// Minimum processing time over all assignments allowed by `y`
/// (each query may read any materialized view or none).
pub fn min_tproc_for(inst: &ProblemInstance, y: &[bool]) -> f64 {
    let n_q = inst.n_queries();
    let options: Vec<Vec<f64>> = (0..n_q)
        .map(|i| {
            std::iter::once(0.0)
                .chain(inst.gains().row(i).iter().filter(|(k, _)| y[*k]).map(|&(_, g)| g))
                .collect()
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; n_q];
    loop {
        let per_run: f64 = (0..n_q).map(|i| inst.queries()[i].base_time - options[i][idx[i]]).sum();
        best = best.min(inst.frequency() * per_run);
        let mut pos = 0;
        loop {
            if pos == n_q {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Varied random instance: catalog, fleet size, dataset size (around the
/// 1 TB storage breakpoint), frequency and gain density all depend on seed.
pub fn random_instance(seed: u64, n_q: usize, n_v: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let mut cfg = GenConfig::new(n_q, n_v, seed);
    cfg.catalog = catalogs::all().swap_remove((seed % 3) as usize);
    let instance_type = cfg.catalog.compute()[rng.random_range(0..cfg.catalog.compute().len())].clone();
    cfg.fleet = Fleet::new(instance_type, rng.random_range(1..=4)).unwrap();
    cfg.dataset_size = rng.random_range(0.0..1500.0);
    cfg.storage_months = rng.random_range(0.5..3.0);
    cfg.frequency = rng.random_range(1..=3) as f64;
    cfg.gain_density = rng.random_range(0.2..0.45);
    // Cheaper views so that some are worth materializing on cost alone.
    cfg.view_size = (0.1, rng.random_range(1.0..40.0));
    generate_instance(&cfg).unwrap()
}

pub fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
