//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::Instant;

use cloudview::bench::{run_gap_experiment, CellStatus, GapConfig};
use cloudview_core::exact::{lp_values, parse_lp};
use cloudview_core::pricing::PiecewisePrice;
use cloudview_core::{
    budget_bounds, catalogs, compute_cost, evaluate, export_lp, generate_instance, greedy_assignment, indicators,
    solve_exact, storage_cost, transfer_cost, BudgetLevel, Fleet, GenConfig, Objective, ProblemInstance, Selection,
    StoragePeriod,
};
use common::{joint_bounds, joint_optima, min_tproc_for, objective_value, random_instance, relative_close};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-6 * want.abs()
}

fn golden_examples() -> Outcome {
    let start = Instant::now();
    let s3 = catalogs::ec2_s3();
    let ebs = catalogs::ec2_ebs();
    let small = s3.instance_type("m1.small").unwrap().clone();
    let two = Fleet::new(small.clone(), 2).unwrap();
    let one = Fleet::new(small, 1).unwrap();
    let periods = [StoragePeriod::new(512.0, 7.0).unwrap(), StoragePeriod::new(2560.0, 5.0).unwrap()];
    let year = [StoragePeriod::new(512.0 + 50.0, 12.0).unwrap()];
    let cases = [
        ("transfer 10 GB", transfer_cost(10.0, &s3).unwrap(), 0.60),
        ("50 h on 2 m1.small", compute_cost(50.0, &two).unwrap(), 6.00),
        ("EBS two periods", storage_cost(&periods, &two, &ebs).unwrap(), 3276.80),
        ("S3 two periods", storage_cost(&periods, &two, &s3).unwrap(), 1441.28),
        ("S3 one year with views", storage_cost(&year, &one, &s3).unwrap(), 640.68),
    ];
    for (name, got, want) in cases {
        ensure(close(got, want), || format!("{name}: got {got}, want {want}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.3} s"))?;
    Ok(format!("5 examples match, {:.1} ms", secs * 1e3))
}

fn oracle_objectives(inst: &ProblemInstance) -> [Objective; 3] {
    let (c_min, c_fast) = joint_bounds(inst);
    [
        Objective::MinTimeWithinBudget(c_min + 0.15 * (c_fast - c_min)),
        Objective::MinCostWithinDeadline(0.8 * inst.baseline_time()),
        Objective::Weighted(0.5),
    ]
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    for seed in 0..25 {
        let inst = generate_instance(&GenConfig::new(8, 8, seed)).unwrap();
        let objs = oracle_objectives(&inst);
        for (obj, want) in objs.iter().zip(joint_optima(&inst, &objs)) {
            let got = solve_exact(&inst, obj).unwrap();
            match (want, got.solution) {
                (None, None) => {}
                (Some((y, e)), Some(sol)) => {
                    ensure(sol.selection.materialized == y, || {
                        format!("seed {seed} {obj:?}: y {:?} vs oracle {y:?}", sol.selection.materialized)
                    })?;
                    let value = objective_value(obj, &e);
                    ensure(relative_close(sol.objective, value, 1e-9), || {
                        format!("seed {seed} {obj:?}: objective {} vs oracle {value}", sol.objective)
                    })?;
                }
                (w, g) => {
                    return Err(format!(
                        "seed {seed} {obj:?}: oracle feasible {}, solver feasible {}",
                        w.is_some(),
                        g.is_some()
                    ))
                }
            }
            compared += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("25 instances, {compared} solves agree, {secs:.2} s"))
}

fn greedy_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for pair in 0..120u64 {
        let n_v = 1 + (pair % 8) as usize;
        let inst = random_instance(500 + pair, 7, n_v);
        let y: Vec<bool> = (0..n_v).map(|_| rng.random_bool(0.5)).collect();
        let got = evaluate(&inst, &greedy_assignment(&inst, &y)).unwrap().t_proc;
        let want = min_tproc_for(&inst, &y);
        ensure(got == want, || format!("pair {pair}: greedy {got} vs brute force {want}"))?;
    }
    Ok("120 pairs, exact match".into())
}

fn indicator_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut exact, mut demoting) = (0, 0);
    let mut worst: f64 = 0.0;
    for seed in 0..80 {
        let inst = random_instance(seed, 8, 6);
        let y: Vec<bool> = (0..6).map(|_| rng.random_bool(0.4)).collect();
        let current = greedy_assignment(&inst, &y);
        let before = evaluate(&inst, &current).unwrap().total_cost;
        let ind = indicators(&inst, &current).unwrap();
        for e in &ind.entries {
            let mut z = current.materialized.clone();
            z[e.view] = true;
            let next = greedy_assignment(&inst, &z);
            let after = evaluate(&inst, &next).unwrap().total_cost;
            if next.materialized == z {
                let err = (after - before + e.benefit).abs();
                worst = worst.max(err);
                ensure(err <= 1e-6, || format!("seed {seed} view {}: error {err}", e.view))?;
                exact += 1;
            } else {
                // Dropping views left unused can only lower the cost further.
                ensure(after <= before - e.benefit + 1e-6, || format!("seed {seed} view {}", e.view))?;
                demoting += 1;
            }
        }
    }
    ensure(exact >= 100, || format!("only {exact} additions kept every view"))?;
    Ok(format!("{exact} additions within {worst:.1e} USD ({demoting} with dropped views also bounded)"))
}

fn gap_experiment() -> Outcome {
    let cfg = GapConfig::default();
    let report = run_gap_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    let mut parts = Vec::new();
    for level in BudgetLevel::ALL {
        let recs: Vec<_> = report.records.iter().filter(|r| r.level == level.name()).collect();
        let missed = recs.iter().filter(|r| r.status == CellStatus::GraspInfeasible).count();
        let gaps: Vec<f64> = recs.iter().filter_map(|r| r.gap_pct).collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
        let max = gaps.iter().copied().fold(0.0, f64::max);
        let slowest = recs.iter().map(|r| r.grasp_ms).fold(0.0, f64::max);
        parts.push(format!("{} mean {mean:.2}% max {max:.2}%", level.name()));
        if missed > 0 {
            problems.push(format!("{}: GRASP infeasible on {missed} feasible instance(s)", level.name()));
        }
        if mean > 2.0 {
            problems.push(format!("{}: mean gap {mean:.2}% > 2%", level.name()));
        }
        if max > 5.0 {
            problems.push(format!("{}: max gap {max:.2}% > 5%", level.name()));
        }
        if slowest >= 1000.0 {
            problems.push(format!("{}: GRASP took {slowest:.0} ms", level.name()));
        }
    }
    let summary = parts.join(", ");
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn monotonicity() -> Outcome {
    const STEPS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
    for seed in 0..20 {
        let inst = generate_instance(&GenConfig::new(8, 8, 100 + seed)).unwrap();
        let b = budget_bounds(&inst).unwrap();
        let mut prev = f64::INFINITY;
        for s in STEPS {
            let r = solve_exact(&inst, &Objective::MinTimeWithinBudget(b.c_minus + s * (b.c_plus - b.c_minus))).unwrap();
            let t = r.solution.ok_or_else(|| format!("seed {seed}: MV1 infeasible at step {s}"))?.objective;
            ensure(t <= prev + 1e-12, || format!("seed {seed}: MV1 time rose to {t} from {prev}"))?;
            prev = t;
        }
        let fastest = solve_exact(&inst, &Objective::MinTimeWithinBudget(f64::INFINITY)).unwrap();
        let t_min = fastest.solution.unwrap().breakdown.t_proc;
        let t_max = inst.baseline_time();
        let mut prev = f64::INFINITY;
        for s in STEPS {
            let r = solve_exact(&inst, &Objective::MinCostWithinDeadline(t_min + s * (t_max - t_min))).unwrap();
            let c = r.solution.ok_or_else(|| format!("seed {seed}: MV2 infeasible at step {s}"))?.objective;
            ensure(c <= prev + 1e-12, || format!("seed {seed}: MV2 cost rose to {c} from {prev}"))?;
            prev = c;
        }
    }
    Ok("20 instances x 5 nested bounds, both objectives".into())
}

fn check_tariff(name: &str, p: &PiecewisePrice, rng: &mut ChaCha8Rng) -> Result<(), String> {
    for s in p.segments() {
        let b = s.start;
        let at = p.eval(b).unwrap();
        let right = p.eval(b + 1e-9).unwrap();
        ensure(at <= right, || format!("{name}: decreasing right of {b}"))?;
        if b > 0.0 {
            let left = p.eval(b - 1e-9).unwrap();
            ensure(left <= at, || format!("{name}: decreasing at {b}"))?;
            ensure((at - left).abs() <= 1e-6, || format!("{name}: jump of {} at {b}", at - left))?;
        }
    }
    let top = p.segments().last().unwrap().start * 2.0 + 100.0;
    let mut xs: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..top)).collect();
    xs.sort_by(f64::total_cmp);
    let ys: Vec<f64> = xs.iter().map(|&x| p.eval(x).unwrap()).collect();
    ensure(ys.windows(2).all(|w| w[0] <= w[1]), || format!("{name}: not monotone on random points"))
}

fn pricing_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut n = 0;
    for c in catalogs::all() {
        check_tariff(&format!("{} transfer", c.name()), c.transfer_out(), &mut rng)?;
        check_tariff(&format!("{} storage", c.name()), &c.storage().price, &mut rng)?;
        n += 2;
    }
    Ok(format!("{n} tariffs continuous and monotone"))
}

fn lp_substitution() -> Outcome {
    let mut checked = 0;
    for seed in 0..10u64 {
        let n_v = 4 + (seed % 7) as usize;
        let inst = random_instance(900 + seed, 8, n_v);
        let obj = oracle_objectives(&inst)[(seed % 3) as usize];
        let sol = solve_exact(&inst, &obj)
            .unwrap()
            .solution
            .ok_or_else(|| format!("seed {seed}: no optimum to substitute"))?;
        let model = parse_lp(&export_lp(&inst, &obj)).map_err(|e| e.to_string())?;
        let check = model.check(&lp_values(&inst, &sol.selection).unwrap(), 1e-6);
        ensure(check.is_feasible(), || format!("seed {seed}: {:?}", check.violations))?;
        ensure(relative_close(check.objective, sol.objective, 1e-9), || {
            format!("seed {seed}: LP objective {} vs {}", check.objective, sol.objective)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} instances, all rows hold"))
}

fn baseline_improvement() -> Outcome {
    let mut with_benefit = 0;
    let mut total = 0;
    for seed in 0..40u64 {
        let inst = if seed % 2 == 0 {
            generate_instance(&GenConfig::new(8, 8, seed)).unwrap()
        } else {
            random_instance(seed, 8, 8)
        };
        total += 1;
        let empty = Selection::empty(&inst);
        let base = evaluate(&inst, &empty).unwrap();
        let mv1 = solve_exact(&inst, &Objective::MinTimeWithinBudget(base.total_cost)).unwrap();
        let t = mv1.solution.ok_or_else(|| format!("seed {seed}: MV1 infeasible at baseline cost"))?;
        ensure(t.breakdown.t_proc <= base.t_proc + 1e-9, || format!("seed {seed}: MV1 slower than baseline"))?;
        let positive = indicators(&inst, &empty).unwrap().entries.iter().any(|e| e.benefit > 0.0);
        if positive {
            with_benefit += 1;
            let mv2 = solve_exact(&inst, &Objective::MinCostWithinDeadline(inst.baseline_time())).unwrap();
            let c = mv2.solution.unwrap().breakdown.total_cost;
            ensure(c < base.total_cost, || format!("seed {seed}: MV2 cost {c} not below baseline {}", base.total_cost))?;
        }
    }
    ensure(with_benefit > 0, || "no instance had a positive benefit".into())?;
    Ok(format!("{total} instances ({with_benefit} with a profitable view)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("golden pricing examples", golden_examples),
        ("exact solver equals joint brute force", oracle_equivalence),
        ("greedy assignment optimality", greedy_optimality),
        ("indicator consistency", indicator_consistency),
        ("GRASP gap experiment", gap_experiment),
        ("monotonicity in budget and deadline", monotonicity),
        ("piecewise pricing properties", pricing_properties),
        ("LP export substitution", lp_substitution),
        ("views beat the no-view baseline", baseline_improvement),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
