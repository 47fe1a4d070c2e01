//! JSON documents for catalogs, instances, selections, GRASP parameters
//! and results.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cloudview_core::catalogs;
use cloudview_core::pricing::{Fleet, InstanceType, PiecewisePrice, PricingError, ProviderCatalog, StorageMode, StorageTariff};
use cloudview_core::{
    CandidateView, CostBreakdown, GainMatrix, GraspParams, InstanceError, InstanceParts, ProblemInstance,
    Query, Selection, SolveResult, SolveStatus, Violation,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("unknown catalog {0:?} (bundled: ec2-ebs, ec2-s3, azure)")]
    UnknownCatalog(String),
    #[error("catalog {catalog:?} has no instance type {name:?}")]
    UnknownInstanceType { catalog: String, name: String },
    #[error("tariff segments must start at 0 GB and strictly increase")]
    BadSegments,
    #[error("unknown query id {0:?}")]
    UnknownQuery(String),
    #[error("unknown view id {0:?}")]
    UnknownView(String),
    #[error("invalid selection: {}", join(.0))]
    Selection(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Reads `@path`, inline JSON (starting with `{`), or a plain path.
/// Returns the text and the directory relative references resolve against.
pub fn read_source(arg: &str) -> Result<(String, Option<PathBuf>), FormatError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return Ok((arg.to_string(), None));
    }
    let path = Path::new(arg.strip_prefix('@').unwrap_or(arg));
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((text, path.parent().map(Path::to_path_buf)))
}

// ---------------------------------------------------------------- catalogs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceTypeDoc {
    pub name: String,
    pub usd_per_hour: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSegmentDoc {
    pub from_gb: f64,
    pub usd_per_gb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferDoc {
    pub segments: Vec<TransferSegmentDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageModeDoc {
    PerInstance,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageSegmentDoc {
    pub from_gb: f64,
    pub usd_per_gb_month: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageDoc {
    pub mode: StorageModeDoc,
    pub segments: Vec<StorageSegmentDoc>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDoc {
    pub name: String,
    pub compute: Vec<InstanceTypeDoc>,
    pub transfer_out: TransferDoc,
    pub storage: StorageDoc,
    #[serde(default = "default_true")]
    pub transfer_in_free: bool,
}

fn tariff(rates: &[(f64, f64)]) -> Result<PiecewisePrice, FormatError> {
    let ordered = rates.first().is_some_and(|r| r.0 == 0.0) && rates.windows(2).all(|w| w[0].0 < w[1].0);
    if !ordered {
        return Err(FormatError::BadSegments);
    }
    Ok(PiecewisePrice::from_rates(rates)?)
}

fn rates(p: &PiecewisePrice) -> impl Iterator<Item = (f64, f64)> + '_ {
    p.segments().iter().map(|s| (s.start, s.gradient))
}

impl CatalogDoc {
    pub fn to_catalog(&self) -> Result<ProviderCatalog, FormatError> {
        let compute = self
            .compute
            .iter()
            .map(|c| InstanceType::new(c.name.clone(), c.usd_per_hour))
            .collect::<Result<Vec<_>, _>>()?;
        let transfer: Vec<_> = self.transfer_out.segments.iter().map(|s| (s.from_gb, s.usd_per_gb)).collect();
        let storage: Vec<_> = self.storage.segments.iter().map(|s| (s.from_gb, s.usd_per_gb_month)).collect();
        let mode = match self.storage.mode {
            StorageModeDoc::PerInstance => StorageMode::PerInstance,
            StorageModeDoc::Global => StorageMode::Global,
        };
        Ok(ProviderCatalog::new(
            self.name.clone(),
            compute,
            tariff(&transfer)?,
            self.transfer_in_free,
            StorageTariff {
                price: tariff(&storage)?,
                mode,
            },
        )?)
    }

    pub fn from_catalog(c: &ProviderCatalog) -> Self {
        Self {
            name: c.name().to_string(),
            compute: c
                .compute()
                .iter()
                .map(|t| InstanceTypeDoc {
                    name: t.name.clone(),
                    usd_per_hour: t.hourly_price,
                })
                .collect(),
            transfer_out: TransferDoc {
                segments: rates(c.transfer_out())
                    .map(|(from_gb, usd_per_gb)| TransferSegmentDoc { from_gb, usd_per_gb })
                    .collect(),
            },
            storage: StorageDoc {
                mode: match c.storage().mode {
                    StorageMode::PerInstance => StorageModeDoc::PerInstance,
                    StorageMode::Global => StorageModeDoc::Global,
                },
                segments: rates(&c.storage().price)
                    .map(|(from_gb, usd_per_gb_month)| StorageSegmentDoc {
                        from_gb,
                        usd_per_gb_month,
                    })
                    .collect(),
            },
            transfer_in_free: true,
        }
    }
}

/// Bundled catalog name, or a catalog given inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CatalogRef {
    Named(String),
    Inline(CatalogDoc),
}

impl CatalogRef {
    /// Bundled names win; any other string is a file path, relative to `base`.
    pub fn resolve(&self, base: Option<&Path>) -> Result<ProviderCatalog, FormatError> {
        match self {
            Self::Inline(doc) => doc.to_catalog(),
            Self::Named(name) => {
                if let Some(c) = catalogs::bundled(name) {
                    return Ok(c);
                }
                let raw = name.strip_prefix('@').unwrap_or(name);
                let path = match base {
                    Some(dir) if Path::new(raw).is_relative() => dir.join(raw),
                    _ => PathBuf::from(raw),
                };
                if !path.exists() {
                    return Err(FormatError::UnknownCatalog(name.clone()));
                }
                load_catalog(&format!("@{}", path.display()))
            }
        }
    }

    /// The bundled name when `c` is a bundled catalog, else inline.
    pub fn from_catalog(c: &ProviderCatalog) -> Self {
        match catalogs::bundled(c.name()) {
            Some(b) if &b == c => Self::Named(c.name().to_string()),
            _ => Self::Inline(CatalogDoc::from_catalog(c)),
        }
    }
}

/// Catalog from a bundled name, `@file`, path or inline JSON.
pub fn load_catalog(arg: &str) -> Result<ProviderCatalog, FormatError> {
    if let Some(c) = catalogs::bundled(arg) {
        return Ok(c);
    }
    let (text, _) = read_source(arg)?;
    serde_json::from_str::<CatalogDoc>(&text)?.to_catalog()
}

// ---------------------------------------------------------------- instances

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetDoc {
    #[serde(rename = "type")]
    pub instance_type: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryDoc {
    pub id: String,
    pub base_time_h: f64,
    #[serde(default)]
    pub result_gb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewDoc {
    pub id: String,
    pub size_gb: f64,
    pub mat_h: f64,
    pub maint_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainDoc {
    pub query: String,
    pub view: String,
    pub gain_h: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub catalog: CatalogRef,
    pub fleet: FleetDoc,
    pub dataset_gb: f64,
    pub storage_months: f64,
    #[serde(default = "one")]
    pub frequency: f64,
    pub queries: Vec<QueryDoc>,
    pub views: Vec<ViewDoc>,
    #[serde(default)]
    pub gains: Vec<GainDoc>,
}

impl InstanceDoc {
    pub fn to_instance(&self, base: Option<&Path>) -> Result<ProblemInstance, FormatError> {
        let catalog = self.catalog.resolve(base)?;
        let ty = catalog
            .instance_type(&self.fleet.instance_type)
            .ok_or_else(|| FormatError::UnknownInstanceType {
                catalog: catalog.name().to_string(),
                name: self.fleet.instance_type.clone(),
            })?
            .clone();
        let fleet = Fleet::new(ty, self.fleet.count)?;
        let queries: Vec<Query> = self
            .queries
            .iter()
            .map(|q| Query::new(q.id.clone(), q.base_time_h).with_result_size(q.result_gb))
            .collect();
        let views: Vec<CandidateView> = self
            .views
            .iter()
            .map(|v| CandidateView {
                id: v.id.clone(),
                size: v.size_gb,
                mat_time: v.mat_h,
                maint_time: v.maint_h,
            })
            .collect();
        let q_index: BTreeMap<&str, usize> = self.queries.iter().enumerate().map(|(i, q)| (q.id.as_str(), i)).collect();
        let v_index: BTreeMap<&str, usize> = self.views.iter().enumerate().map(|(k, v)| (v.id.as_str(), k)).collect();
        let entries = self
            .gains
            .iter()
            .map(|g| {
                let i = *q_index.get(g.query.as_str()).ok_or_else(|| FormatError::UnknownQuery(g.query.clone()))?;
                let k = *v_index.get(g.view.as_str()).ok_or_else(|| FormatError::UnknownView(g.view.clone()))?;
                Ok((i, k, g.gain_h))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let gains = GainMatrix::new(queries.len(), views.len(), entries)?;
        Ok(ProblemInstance::new(InstanceParts {
            catalog,
            fleet,
            dataset_size: self.dataset_gb,
            storage_months: self.storage_months,
            frequency: self.frequency,
            queries,
            views,
            gains,
        })?)
    }

    pub fn from_instance(inst: &ProblemInstance) -> Self {
        let q = inst.queries();
        let v = inst.views();
        Self {
            catalog: CatalogRef::from_catalog(inst.catalog()),
            fleet: FleetDoc {
                instance_type: inst.fleet().instance().name.clone(),
                count: inst.fleet().count(),
            },
            dataset_gb: inst.dataset_size(),
            storage_months: inst.storage_months(),
            frequency: inst.frequency(),
            queries: q
                .iter()
                .map(|q| QueryDoc {
                    id: q.id.clone(),
                    base_time_h: q.base_time,
                    result_gb: q.result_size,
                })
                .collect(),
            views: v
                .iter()
                .map(|v| ViewDoc {
                    id: v.id.clone(),
                    size_gb: v.size,
                    mat_h: v.mat_time,
                    maint_h: v.maint_time,
                })
                .collect(),
            gains: inst
                .gains()
                .iter()
                .map(|(i, k, g)| GainDoc {
                    query: q[i].id.clone(),
                    view: v[k].id.clone(),
                    gain_h: g,
                })
                .collect(),
        }
    }
}

/// Instance from `@file`, a path or inline JSON.
pub fn load_instance(arg: &str) -> Result<ProblemInstance, FormatError> {
    let (text, base) = read_source(arg)?;
    serde_json::from_str::<InstanceDoc>(&text)?.to_instance(base.as_deref())
}

pub fn instance_json(inst: &ProblemInstance) -> String {
    to_pretty(&InstanceDoc::from_instance(inst))
}

// ---------------------------------------------------------------- selections

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionDoc {
    pub materialized: Vec<String>,
    #[serde(default)]
    pub assignment: BTreeMap<String, String>,
}

impl SelectionDoc {
    pub fn to_selection(&self, inst: &ProblemInstance) -> Result<Selection, FormatError> {
        let mut sel = Selection::empty(inst);
        for id in &self.materialized {
            let k = inst.view_index(id).ok_or_else(|| FormatError::UnknownView(id.clone()))?;
            sel.materialized[k] = true;
        }
        for (q, v) in &self.assignment {
            let i = inst.query_index(q).ok_or_else(|| FormatError::UnknownQuery(q.clone()))?;
            let k = inst.view_index(v).ok_or_else(|| FormatError::UnknownView(v.clone()))?;
            sel.assignment[i] = Some(k);
        }
        cloudview_core::validate_selection(inst, &sel).map_err(FormatError::Selection)?;
        Ok(sel)
    }

    pub fn from_selection(inst: &ProblemInstance, sel: &Selection) -> Self {
        let views = inst.views();
        Self {
            materialized: sel.materialized_views().map(|k| views[k].id.clone()).collect(),
            assignment: sel
                .assignment
                .iter()
                .enumerate()
                .filter_map(|(i, a)| a.map(|k| (inst.queries()[i].id.clone(), views[k].id.clone())))
                .collect(),
        }
    }
}

pub fn load_selection(arg: &str, inst: &ProblemInstance) -> Result<Selection, FormatError> {
    let (text, _) = read_source(arg)?;
    serde_json::from_str::<SelectionDoc>(&text)?.to_selection(inst)
}

// ---------------------------------------------------------------- GRASP params

/// GRASP settings; missing fields take the library defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsDoc {
    pub it_gr: u32,
    pub it_rc: u32,
    pub sel_rc: f64,
    pub sel_ls: f64,
    pub seed: u64,
}

impl Default for ParamsDoc {
    fn default() -> Self {
        Self::from(GraspParams::default())
    }
}

impl From<GraspParams> for ParamsDoc {
    fn from(p: GraspParams) -> Self {
        Self {
            it_gr: p.restarts,
            it_rc: p.construction_attempts,
            sel_rc: p.construction_fraction,
            sel_ls: p.search_fraction,
            seed: p.seed,
        }
    }
}

impl From<ParamsDoc> for GraspParams {
    fn from(p: ParamsDoc) -> Self {
        Self {
            restarts: p.it_gr,
            construction_attempts: p.it_rc,
            construction_fraction: p.sel_rc,
            search_fraction: p.sel_ls,
            seed: p.seed,
        }
    }
}

pub fn load_params(arg: &str) -> Result<GraspParams, FormatError> {
    let (text, _) = read_source(arg)?;
    Ok(serde_json::from_str::<ParamsDoc>(&text)?.into())
}

// ---------------------------------------------------------------- outputs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownDoc {
    pub t_proc_h: f64,
    pub t_mat_h: f64,
    pub t_maint_h: f64,
    pub total_time_h: f64,
    pub c_c: f64,
    pub c_s: f64,
    pub c_t: f64,
    pub total_cost: f64,
    pub stored_gb: f64,
}

impl From<&CostBreakdown> for BreakdownDoc {
    fn from(b: &CostBreakdown) -> Self {
        Self {
            t_proc_h: b.t_proc,
            t_mat_h: b.t_mat,
            t_maint_h: b.t_maint,
            total_time_h: b.total_time,
            c_c: b.c_c,
            c_s: b.c_s,
            c_t: b.c_t,
            total_cost: b.total_cost,
            stored_gb: b.stored_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusDoc {
    Optimal,
    Feasible,
    Infeasible,
}

impl From<SolveStatus> for StatusDoc {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => Self::Optimal,
            SolveStatus::Feasible => Self::Feasible,
            SolveStatus::Infeasible => Self::Infeasible,
        }
    }
}

/// Solver output; the numeric fields are null when nothing is feasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResultDoc {
    pub status: StatusDoc,
    pub objective: Option<f64>,
    pub t_proc_h: Option<f64>,
    pub cost_usd: Option<f64>,
    pub materialized: Vec<String>,
    pub assignment: BTreeMap<String, String>,
    pub explored: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub breakdown: Option<BreakdownDoc>,
}

impl SolveResultDoc {
    pub fn new(inst: &ProblemInstance, r: &SolveResult) -> Self {
        let sel = r.solution.as_ref().map(|s| SelectionDoc::from_selection(inst, &s.selection));
        let (materialized, assignment) = sel.map_or_else(Default::default, |s| (s.materialized, s.assignment));
        Self {
            status: r.status.into(),
            objective: r.solution.as_ref().map(|s| s.objective),
            t_proc_h: r.solution.as_ref().map(|s| s.breakdown.t_proc),
            cost_usd: r.solution.as_ref().map(|s| s.breakdown.total_cost),
            materialized,
            assignment,
            explored: r.explored,
            breakdown: r.solution.as_ref().map(|s| (&s.breakdown).into()),
        }
    }
}

pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}
