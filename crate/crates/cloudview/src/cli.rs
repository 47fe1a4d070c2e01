//! Command-line front end.
//!
//! Documents go to stdout (or `--out`); diagnostics go to stderr. Exit
//! codes: 0 success, 1 nothing feasible, 2 bad input.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cloudview_core::{
    compute_cost, evaluate, exact, generate_instance, grasp_solve, greedy_assignment, storage_cost, transfer_cost,
    BudgetLevel, ExactSolver, Fleet, GenConfig, GraspParams, Objective, StoragePeriod,
};
use serde::Serialize;

use crate::bench::{run_gap_experiment, write_rows, GapConfig, Size};
use crate::formats::{
    instance_json, load_catalog, load_instance, load_params, load_selection, to_pretty, BreakdownDoc,
    SolveResultDoc,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "cloudview", version, about = "Cloud cost models and materialized view selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Baseline cost of running, storing and downloading without views.
    Price(PriceArgs),
    /// Choose views for an instance.
    Solve(SolveArgs),
    /// Cost breakdown of a given selection.
    Evaluate(EvaluateArgs),
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Exact versus GRASP gap experiment.
    Bench(BenchArgs),
    /// Write the mixed-integer model in LP format.
    ExportLp(ExportLpArgs),
}

/// `SIZE:MONTHS`, e.g. `512:7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodArg {
    pub size_gb: f64,
    pub months: f64,
}

impl FromStr for PeriodArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected SIZE:MONTHS, got {s:?}"))?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
        Ok(Self {
            size_gb: num(a)?,
            months: num(b)?,
        })
    }
}

/// `LO:HI`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeArg(pub f64, pub f64);

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
        Ok(Self(num(a)?, num(b)?))
    }
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write the document here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

impl OutArg {
    fn emit(&self, doc: &[u8]) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => fs::write(p, doc).with_context(|| format!("cannot write {}", p.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(doc)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    /// Bundled name (ec2-ebs, ec2-s3, azure), @file or inline JSON.
    #[arg(long, default_value = "ec2-s3")]
    pub catalog: String,
    /// Defaults to the catalog's first instance type.
    #[arg(long)]
    pub instance_type: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub count: u32,
    /// Compute hours per instance.
    #[arg(long, default_value_t = 0.0)]
    pub hours: f64,
    /// Storage period SIZE_GB:MONTHS; repeatable.
    #[arg(long = "period")]
    pub periods: Vec<PeriodArg>,
    /// Shorthand for one period of --months months.
    #[arg(long)]
    pub dataset_gb: Option<f64>,
    #[arg(long, requires = "dataset_gb")]
    pub months: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub download_gb: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveKind {
    /// Minimize processing time within --budget.
    Mv1,
    /// Minimize cost within --tmax.
    Mv2,
    /// Minimize alpha * time + (1 - alpha) * cost.
    Mv3,
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum, default_value = "mv1")]
    pub objective: ObjectiveKind,
    /// USD; `inf` for no limit.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Hours; `inf` for no limit.
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl ObjectiveArgs {
    pub fn objective(&self) -> anyhow::Result<Objective> {
        let given = [("--budget", self.budget), ("--tmax", self.tmax), ("--alpha", self.alpha)];
        let (want, obj) = match self.objective {
            ObjectiveKind::Mv1 => ("--budget", self.budget.map(Objective::MinTimeWithinBudget)),
            ObjectiveKind::Mv2 => ("--tmax", self.tmax.map(Objective::MinCostWithinDeadline)),
            ObjectiveKind::Mv3 => ("--alpha", self.alpha.map(Objective::Weighted)),
        };
        if let Some((flag, _)) = given.iter().find(|(f, v)| *f != want && v.is_some()) {
            bail!("{flag} does not apply to {:?}", self.objective);
        }
        let Some(obj) = obj else {
            bail!("{:?} needs {want}", self.objective);
        };
        obj.validate()?;
        Ok(obj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Grasp,
}

#[derive(Debug, Args)]
pub struct GraspArgs {
    /// GRASP parameters as JSON {it_gr, it_rc, sel_rc, sel_ls, seed}
    /// (@file or inline); the flags below override it.
    #[arg(long)]
    pub params: Option<String>,
    /// Restarts.
    #[arg(long)]
    pub it_gr: Option<u32>,
    /// Construction attempts per restart.
    #[arg(long)]
    pub it_rc: Option<u32>,
    /// Share of candidates drawn from during construction.
    #[arg(long)]
    pub sel_rc: Option<f64>,
    /// Share of moves drawn from during local search.
    #[arg(long)]
    pub sel_ls: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl GraspArgs {
    pub fn params(&self) -> anyhow::Result<GraspParams> {
        let mut p = match &self.params {
            Some(src) => load_params(src)?,
            None => GraspParams::default(),
        };
        if let Some(v) = self.it_gr {
            p.restarts = v;
        }
        if let Some(v) = self.it_rc {
            p.construction_attempts = v;
        }
        if let Some(v) = self.sel_rc {
            p.construction_fraction = v;
        }
        if let Some(v) = self.sel_ls {
            p.search_fraction = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance: @file, path or inline JSON.
    #[arg(long)]
    pub instance: String,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: Method,
    #[command(flatten)]
    pub grasp: GraspArgs,
    /// Largest view count the exact solver accepts.
    #[arg(long, default_value_t = exact::DEFAULT_MAX_VIEWS)]
    pub max_views: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub instance: String,
    /// Selection JSON {materialized, assignment}: @file, path or inline.
    #[arg(long, conflicts_with = "views")]
    pub selection: Option<String>,
    /// Comma-separated view ids; each query uses its best one.
    #[arg(long, value_delimiter = ',')]
    pub views: Option<Vec<String>>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub nq: usize,
    #[arg(long)]
    pub nv: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub gain_density: Option<f64>,
    /// Query base time range, hours.
    #[arg(long)]
    pub base_time: Option<RangeArg>,
    /// View size range, GB.
    #[arg(long)]
    pub view_size: Option<RangeArg>,
    #[arg(long)]
    pub mat_time: Option<RangeArg>,
    #[arg(long)]
    pub maint_time: Option<RangeArg>,
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long)]
    pub instance_type: Option<String>,
    #[arg(long)]
    pub count: Option<u32>,
    #[arg(long)]
    pub dataset_gb: Option<f64>,
    #[arg(long)]
    pub months: Option<f64>,
    #[arg(long)]
    pub frequency: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated NQxNV sizes.
    #[arg(long, value_delimiter = ',', default_value = "8x8,10x10,12x12")]
    pub sizes: Vec<Size>,
    /// Instances per size.
    #[arg(long, default_value_t = 5)]
    pub seeds: u32,
    /// Comma-separated budget levels.
    #[arg(long, value_delimiter = ',', default_value = "G1,G2,G3", value_parser = parse_level)]
    pub levels: Vec<BudgetLevel>,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Emit one row per (size, level) instead of per instance.
    #[arg(long)]
    pub summary: bool,
    /// Report times as 0 so that output is reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, default_value_t = exact::DEFAULT_MAX_VIEWS)]
    pub max_views: usize,
    #[command(flatten)]
    pub grasp: GraspArgs,
    #[command(flatten)]
    pub out: OutArg,
}

fn parse_level(s: &str) -> Result<BudgetLevel, String> {
    BudgetLevel::parse(s).ok_or_else(|| format!("unknown budget level {s:?} (G1, G2 or G3)"))
}

#[derive(Debug, Args)]
pub struct ExportLpArgs {
    #[arg(long)]
    pub instance: String,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Serialize)]
struct PeriodDoc {
    size_gb: f64,
    months: f64,
}

#[derive(Debug, Serialize)]
struct PriceDoc {
    catalog: String,
    instance_type: String,
    count: u32,
    hours: f64,
    download_gb: f64,
    periods: Vec<PeriodDoc>,
    c_c: f64,
    c_s: f64,
    c_t: f64,
    total_cost: f64,
}

fn price(a: &PriceArgs) -> anyhow::Result<u8> {
    let catalog = load_catalog(&a.catalog)?;
    let ty = match &a.instance_type {
        Some(n) => catalog
            .instance_type(n)
            .with_context(|| format!("catalog {:?} has no instance type {n:?}", catalog.name()))?,
        None => &catalog.compute()[0],
    };
    let fleet = Fleet::new(ty.clone(), a.count)?;
    let mut periods: Vec<StoragePeriod> = a
        .periods
        .iter()
        .map(|p| StoragePeriod::new(p.size_gb, p.months))
        .collect::<Result<_, _>>()?;
    if let Some(size) = a.dataset_gb {
        periods.push(StoragePeriod::new(size, a.months.unwrap_or(1.0))?);
    }
    let c_c = compute_cost(a.hours, &fleet)?;
    let c_s = storage_cost(&periods, &fleet, &catalog)?;
    let c_t = transfer_cost(a.download_gb, &catalog)?;
    let doc = PriceDoc {
        catalog: catalog.name().to_string(),
        instance_type: ty.name.clone(),
        count: a.count,
        hours: a.hours,
        download_gb: a.download_gb,
        periods: periods
            .iter()
            .map(|p| PeriodDoc {
                size_gb: p.size,
                months: p.months,
            })
            .collect(),
        c_c,
        c_s,
        c_t,
        total_cost: c_c + c_s + c_t,
    };
    a.out.emit(to_pretty(&doc).as_bytes())?;
    Ok(EXIT_OK)
}

fn solve(a: &SolveArgs) -> anyhow::Result<u8> {
    let objective = a.objective.objective()?;
    let inst = load_instance(&a.instance)?;
    let result = match a.method {
        Method::Exact => ExactSolver::new(a.max_views).solve(&inst, &objective)?,
        Method::Grasp => {
            let Objective::MinTimeWithinBudget(budget) = objective else {
                bail!("--method grasp only supports --objective mv1");
            };
            grasp_solve(&inst, budget, &a.grasp.params()?)?
        }
    };
    a.out.emit(to_pretty(&SolveResultDoc::new(&inst, &result)).as_bytes())?;
    if result.is_feasible() {
        Ok(EXIT_OK)
    } else {
        eprintln!("no selection satisfies the constraint");
        Ok(EXIT_INFEASIBLE)
    }
}

fn evaluate_cmd(a: &EvaluateArgs) -> anyhow::Result<u8> {
    let inst = load_instance(&a.instance)?;
    let sel = match (&a.selection, &a.views) {
        (Some(src), None) => load_selection(src, &inst)?,
        (None, Some(ids)) => {
            let mut y = vec![false; inst.n_views()];
            for id in ids {
                let k = inst.view_index(id).with_context(|| format!("unknown view id {id:?}"))?;
                y[k] = true;
            }
            greedy_assignment(&inst, &y)
        }
        (None, None) => cloudview_core::Selection::empty(&inst),
        (Some(_), Some(_)) => bail!("--selection and --views are exclusive"),
    };
    let b = evaluate(&inst, &sel)?;
    a.out.emit(to_pretty(&BreakdownDoc::from(&b)).as_bytes())?;
    Ok(EXIT_OK)
}

fn generate(a: &GenerateArgs) -> anyhow::Result<u8> {
    let mut cfg = GenConfig::new(a.nq, a.nv, a.seed);
    if let Some(src) = &a.catalog {
        cfg.catalog = load_catalog(src)?;
        if a.instance_type.is_none() {
            let ty = cfg.catalog.compute()[0].clone();
            cfg.fleet = Fleet::new(ty, cfg.fleet.count())?;
        }
    }
    if let Some(name) = &a.instance_type {
        let ty = cfg
            .catalog
            .instance_type(name)
            .with_context(|| format!("catalog {:?} has no instance type {name:?}", cfg.catalog.name()))?
            .clone();
        cfg.fleet = Fleet::new(ty, cfg.fleet.count())?;
    }
    if let Some(c) = a.count {
        cfg.fleet = Fleet::new(cfg.fleet.instance().clone(), c)?;
    }
    if let Some(d) = a.gain_density {
        cfg.gain_density = d;
    }
    for (slot, arg) in [
        (&mut cfg.base_time, a.base_time),
        (&mut cfg.view_size, a.view_size),
        (&mut cfg.mat_time, a.mat_time),
        (&mut cfg.maint_time, a.maint_time),
    ] {
        if let Some(RangeArg(lo, hi)) = arg {
            *slot = (lo, hi);
        }
    }
    if let Some(v) = a.dataset_gb {
        cfg.dataset_size = v;
    }
    if let Some(v) = a.months {
        cfg.storage_months = v;
    }
    if let Some(v) = a.frequency {
        cfg.frequency = v;
    }
    let inst = generate_instance(&cfg)?;
    a.out.emit(instance_json(&inst).as_bytes())?;
    Ok(EXIT_OK)
}

fn bench(a: &BenchArgs) -> anyhow::Result<u8> {
    let cfg = GapConfig {
        sizes: a.sizes.iter().map(|s| (s.0, s.1)).collect(),
        seeds_per_size: a.seeds,
        levels: a.levels.clone(),
        master_seed: a.master_seed,
        grasp: a.grasp.params()?,
        timing: !a.no_timing,
        max_views: a.max_views,
    };
    let report = run_gap_experiment(&cfg)?;
    let mut buf = Vec::new();
    match (a.format, a.summary) {
        (Format::Csv, false) => report.write_csv(&mut buf)?,
        (Format::Csv, true) => write_rows(&mut buf, &report.summary())?,
        (Format::Json, false) => buf = report.to_json().into_bytes(),
        (Format::Json, true) => buf = to_pretty(&report.summary()).into_bytes(),
    }
    a.out.emit(&buf)?;
    Ok(EXIT_OK)
}

fn export_lp(a: &ExportLpArgs) -> anyhow::Result<u8> {
    let objective = a.objective.objective()?;
    let inst = load_instance(&a.instance)?;
    a.out.emit(exact::export_lp(&inst, &objective).as_bytes())?;
    Ok(EXIT_OK)
}

/// Runs one command and returns its exit code.
pub fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Price(a) => price(a),
        Command::Solve(a) => solve(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Generate(a) => generate(a),
        Command::Bench(a) => bench(a),
        Command::ExportLp(a) => export_lp(a),
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit code 2.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT.into()
        }
    }
}
