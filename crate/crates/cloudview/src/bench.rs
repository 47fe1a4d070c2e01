//! Exact versus GRASP gap experiments on generated instances.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use cloudview_core::{
    generate_instance, grasp_solve, BudgetLevel, ExactSolver, GenConfig, GraspParams, Objective,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Instance sizes, seeds and budget levels of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GapConfig {
    /// `(n_q, n_v)` pairs.
    pub sizes: Vec<(usize, usize)>,
    pub seeds_per_size: u32,
    pub levels: Vec<BudgetLevel>,
    /// Every instance seed is derived from this one.
    pub master_seed: u64,
    pub grasp: GraspParams,
    /// When false, times are reported as 0 so reports are reproducible.
    pub timing: bool,
    /// Enumeration limit for the exact baseline.
    pub max_views: usize,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            sizes: vec![(8, 8), (10, 10), (12, 12)],
            seeds_per_size: 5,
            levels: BudgetLevel::ALL.to_vec(),
            master_seed: 0,
            grasp: GraspParams::default(),
            timing: true,
            max_views: cloudview_core::exact::DEFAULT_MAX_VIEWS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    /// Both solvers found a solution.
    Ok,
    /// Nothing fits the budget; neither solver found a solution.
    Infeasible,
    /// The exact solver found a solution and GRASP did not.
    GraspInfeasible,
}

/// One (instance, level) measurement. Columns follow the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub n_q: usize,
    pub n_v: usize,
    pub level: String,
    pub seed: u64,
    pub exact_ms: f64,
    pub grasp_ms: f64,
    pub exact_tproc_h: Option<f64>,
    pub grasp_tproc_h: Option<f64>,
    pub gap_pct: Option<f64>,
    pub status: CellStatus,
}

/// Aggregate over the seeds of one (size, level) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub n_q: usize,
    pub n_v: usize,
    pub level: String,
    pub seeds: usize,
    pub mean_exact_ms: f64,
    pub mean_grasp_ms: f64,
    pub max_grasp_ms: f64,
    /// Over records where both solvers succeeded; 0 when there are none.
    pub mean_gap_pct: f64,
    pub max_gap_pct: f64,
    /// Records where both solvers succeeded.
    pub feasible: usize,
    pub grasp_missed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub records: Vec<GapRecord>,
}

/// `100 * (grasp - exact) / exact`.
pub fn gap_pct(exact: f64, grasp: f64) -> f64 {
    if exact == 0.0 {
        if grasp == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        100.0 * (grasp - exact) / exact
    }
}

/// Instance seeds, `seeds_per_size` per size, in declaration order.
pub fn instance_seeds(master_seed: u64, n_sizes: usize, seeds_per_size: u32) -> Vec<Vec<u64>> {
    (0..n_sizes)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(s as u64);
            (0..seeds_per_size).map(|_| rng.next_u64()).collect()
        })
        .collect()
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    let ms = if enabled { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    (out, ms)
}

fn run_instance(cfg: &GapConfig, n_q: usize, n_v: usize, seed: u64) -> anyhow::Result<Vec<GapRecord>> {
    let inst = generate_instance(&GenConfig::new(n_q, n_v, seed))?;
    let solver = ExactSolver::new(cfg.max_views);
    let bounds = solver.budget_bounds(&inst)?;
    let mut out = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        let budget = level.budget(&bounds);
        let (exact, exact_ms) = timed(cfg.timing, || solver.solve(&inst, &Objective::MinTimeWithinBudget(budget)));
        let (grasp, grasp_ms) = timed(cfg.timing, || grasp_solve(&inst, budget, &cfg.grasp));
        let exact_t = exact?.solution.map(|s| s.breakdown.t_proc);
        let grasp_t = grasp?.solution.map(|s| s.breakdown.t_proc);
        let status = match (exact_t, grasp_t) {
            (Some(_), Some(_)) => CellStatus::Ok,
            (None, None) => CellStatus::Infeasible,
            (Some(_), None) => CellStatus::GraspInfeasible,
            (None, Some(_)) => bail!("GRASP found a solution the exact solver ruled out (seed {seed}, {level:?})"),
        };
        out.push(GapRecord {
            n_q,
            n_v,
            level: level.name().to_string(),
            seed,
            exact_ms,
            grasp_ms,
            exact_tproc_h: exact_t,
            grasp_tproc_h: grasp_t,
            gap_pct: exact_t.zip(grasp_t).map(|(e, g)| gap_pct(e, g)),
            status,
        });
    }
    Ok(out)
}

/// Runs every (size, seed) instance, in parallel. Records come out by
/// size, then level, then seed.
pub fn run_gap_experiment(cfg: &GapConfig) -> anyhow::Result<GapReport> {
    if cfg.levels.is_empty() || cfg.sizes.is_empty() || cfg.seeds_per_size == 0 {
        bail!("need at least one size, seed and budget level");
    }
    if let Some(&(q, v)) = cfg.sizes.iter().find(|&&(q, v)| q == 0 || v == 0 || v > cfg.max_views) {
        bail!("size {q}x{v} is empty or above the enumeration limit of {} views", cfg.max_views);
    }
    cfg.grasp.validate()?;
    let seeds = instance_seeds(cfg.master_seed, cfg.sizes.len(), cfg.seeds_per_size);
    let jobs: Vec<(usize, usize, u64)> = cfg
        .sizes
        .iter()
        .zip(&seeds)
        .flat_map(|(&(q, v), s)| s.iter().map(move |&seed| (q, v, seed)))
        .collect();
    let per_job: Vec<Vec<GapRecord>> = jobs
        .par_iter()
        .map(|&(q, v, seed)| run_instance(cfg, q, v, seed))
        .collect::<anyhow::Result<_>>()?;
    let mut records = Vec::new();
    for (size_idx, &(q, v)) in cfg.sizes.iter().enumerate() {
        let n = cfg.seeds_per_size as usize;
        let chunk = &per_job[size_idx * n..(size_idx + 1) * n];
        for lvl in 0..cfg.levels.len() {
            records.extend(chunk.iter().map(|r| r[lvl].clone()));
        }
        debug_assert!(chunk.iter().all(|r| r.iter().all(|x| x.n_q == q && x.n_v == v)));
    }
    Ok(GapReport { records })
}

impl GapReport {
    /// One row per (size, level), in record order.
    pub fn summary(&self) -> Vec<GapSummary> {
        let mut rows: Vec<GapSummary> = Vec::new();
        let mut groups: Vec<Vec<&GapRecord>> = Vec::new();
        for r in &self.records {
            match groups.iter_mut().find(|g| {
                let h = g[0];
                h.n_q == r.n_q && h.n_v == r.n_v && h.level == r.level
            }) {
                Some(g) => g.push(r),
                None => groups.push(vec![r]),
            }
        }
        for g in groups {
            let n = g.len() as f64;
            let gaps: Vec<f64> = g.iter().filter_map(|r| r.gap_pct).collect();
            rows.push(GapSummary {
                n_q: g[0].n_q,
                n_v: g[0].n_v,
                level: g[0].level.clone(),
                seeds: g.len(),
                mean_exact_ms: g.iter().map(|r| r.exact_ms).sum::<f64>() / n,
                mean_grasp_ms: g.iter().map(|r| r.grasp_ms).sum::<f64>() / n,
                max_grasp_ms: g.iter().map(|r| r.grasp_ms).fold(0.0, f64::max),
                mean_gap_pct: if gaps.is_empty() { 0.0 } else { gaps.iter().sum::<f64>() / gaps.len() as f64 },
                max_gap_pct: gaps.iter().copied().fold(0.0, f64::max),
                feasible: gaps.len(),
                grasp_missed: g.iter().filter(|r| r.status == CellStatus::GraspInfeasible).count(),
            });
        }
        rows
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> anyhow::Result<()> {
        write_rows(w, &self.records)
    }

    pub fn read_csv<R: io::Read>(r: R) -> anyhow::Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let records = rdr
            .deserialize()
            .collect::<Result<Vec<GapRecord>, _>>()
            .context("malformed gap report CSV")?;
        Ok(Self { records })
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            records: &'a [GapRecord],
            summary: Vec<GapSummary>,
        }
        crate::formats::to_pretty(&Doc {
            records: &self.records,
            summary: self.summary(),
        })
    }
}

pub fn write_rows<W: io::Write, T: Serialize>(w: W, rows: &[T]) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `NQxNV`, e.g. `8x8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size(pub usize, pub usize);

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (q, v) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NQxNV, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
        Ok(Size(parse(q)?, parse(v)?))
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}
