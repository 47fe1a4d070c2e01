use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::pricing::{Fleet, ProviderCatalog};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("query `{0}` has a negative or non-finite time or result size")]
    InvalidQuery(String),
    #[error("view `{0}` has a negative or non-finite size or time")]
    InvalidView(String),
    #[error("duplicate query id `{0}`")]
    DuplicateQuery(String),
    #[error("duplicate view id `{0}`")]
    DuplicateView(String),
    #[error("dataset size and storage months must be finite and non-negative")]
    InvalidDataset,
    #[error("workload frequency must be finite and at least 1, got {0}")]
    InvalidFrequency(f64),
    #[error("gain ({query}, {view}) is out of range")]
    GainIndexOutOfRange { query: usize, view: usize },
    #[error("gain ({query}, {view}) appears twice")]
    DuplicateGain { query: usize, view: usize },
    #[error("gain ({query}, {view}) = {gain} must lie in [0, t_i]")]
    InvalidGain { query: usize, view: usize, gain: f64 },
    #[error("gain matrix is {rows}x{cols}, instance has {queries} queries and {views} views")]
    GainShape {
        rows: usize,
        cols: usize,
        queries: usize,
        views: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub id: String,
    /// Hours per execution without any view.
    pub base_time: f64,
    /// GB downloaded per execution.
    pub result_size: f64,
}

impl Query {
    pub fn new(id: impl Into<String>, base_time: f64) -> Self {
        Self {
            id: id.into(),
            base_time,
            result_size: 0.0,
        }
    }

    pub fn with_result_size(mut self, gb: f64) -> Self {
        self.result_size = gb;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateView {
    pub id: String,
    /// GB.
    pub size: f64,
    /// Hours to materialize once.
    pub mat_time: f64,
    /// Maintenance hours over the whole operating period.
    pub maint_time: f64,
}

/// Sparse query x view matrix of response-time gains, in hours.
///
/// Only strictly positive gains are stored; a missing entry is a zero gain,
/// so the stored entries of row `i` are exactly the views query `i` can use.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GainMatrix {
    n_views: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl GainMatrix {
    pub fn new(
        n_queries: usize,
        n_views: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, InstanceError> {
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n_queries).map(|_| Vec::new()).collect();
        for (query, view, gain) in entries {
            if query >= n_queries || view >= n_views {
                return Err(InstanceError::GainIndexOutOfRange { query, view });
            }
            if !(gain.is_finite() && gain >= 0.0) {
                return Err(InstanceError::InvalidGain { query, view, gain });
            }
            let row = &mut rows[query];
            match row.binary_search_by_key(&view, |&(k, _)| k) {
                Ok(_) => return Err(InstanceError::DuplicateGain { query, view }),
                Err(pos) if gain > 0.0 => row.insert(pos, (view, gain)),
                Err(_) => {}
            }
        }
        Ok(Self { n_views, rows })
    }

    pub fn n_queries(&self) -> usize {
        self.rows.len()
    }

    pub fn n_views(&self) -> usize {
        self.n_views
    }

    /// `g_ik`, zero when absent.
    pub fn get(&self, query: usize, view: usize) -> f64 {
        self.rows
            .get(query)
            .and_then(|r| r.binary_search_by_key(&view, |&(k, _)| k).ok().map(|p| r[p].1))
            .unwrap_or(0.0)
    }

    /// Positive gains of one query, sorted by view index.
    pub fn row(&self, query: usize) -> &[(usize, f64)] {
        &self.rows[query]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `(query, view, gain)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(k, g)| (i, k, g)))
    }
}

/// Raw fields of a [`ProblemInstance`], checked by [`ProblemInstance::new`].
#[derive(Debug, Clone)]
pub struct InstanceParts {
    pub catalog: ProviderCatalog,
    pub fleet: Fleet,
    /// GB.
    pub dataset_size: f64,
    pub storage_months: f64,
    /// Executions of the whole workload over the operating period.
    pub frequency: f64,
    pub queries: Vec<Query>,
    pub views: Vec<CandidateView>,
    pub gains: GainMatrix,
}

/// A validated view selection problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    catalog: ProviderCatalog,
    fleet: Fleet,
    dataset_size: f64,
    storage_months: f64,
    frequency: f64,
    queries: Vec<Query>,
    views: Vec<CandidateView>,
    gains: GainMatrix,
}

fn non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

impl ProblemInstance {
    pub fn new(parts: InstanceParts) -> Result<Self, InstanceError> {
        let InstanceParts {
            catalog,
            fleet,
            dataset_size,
            storage_months,
            frequency,
            queries,
            views,
            gains,
        } = parts;

        if !(non_negative(dataset_size) && non_negative(storage_months)) {
            return Err(InstanceError::InvalidDataset);
        }
        if !(frequency.is_finite() && frequency >= 1.0) {
            return Err(InstanceError::InvalidFrequency(frequency));
        }
        for (i, q) in queries.iter().enumerate() {
            if !(non_negative(q.base_time) && non_negative(q.result_size)) {
                return Err(InstanceError::InvalidQuery(q.id.clone()));
            }
            if queries[..i].iter().any(|o| o.id == q.id) {
                return Err(InstanceError::DuplicateQuery(q.id.clone()));
            }
        }
        for (k, v) in views.iter().enumerate() {
            if !(non_negative(v.size) && non_negative(v.mat_time) && non_negative(v.maint_time)) {
                return Err(InstanceError::InvalidView(v.id.clone()));
            }
            if views[..k].iter().any(|o| o.id == v.id) {
                return Err(InstanceError::DuplicateView(v.id.clone()));
            }
        }
        if gains.n_queries() != queries.len() || gains.n_views() != views.len() {
            return Err(InstanceError::GainShape {
                rows: gains.n_queries(),
                cols: gains.n_views(),
                queries: queries.len(),
                views: views.len(),
            });
        }
        for (query, view, gain) in gains.iter() {
            if gain > queries[query].base_time {
                return Err(InstanceError::InvalidGain { query, view, gain });
            }
        }

        Ok(Self {
            catalog,
            fleet,
            dataset_size,
            storage_months,
            frequency,
            queries,
            views,
            gains,
        })
    }

    pub fn catalog(&self) -> &ProviderCatalog {
        &self.catalog
    }

    pub fn fleet(&self) -> &Fleet {
        &self.fleet
    }

    pub fn dataset_size(&self) -> f64 {
        self.dataset_size
    }

    pub fn storage_months(&self) -> f64 {
        self.storage_months
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn views(&self) -> &[CandidateView] {
        &self.views
    }

    pub fn gains(&self) -> &GainMatrix {
        &self.gains
    }

    pub fn n_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn query_index(&self, id: &str) -> Option<usize> {
        self.queries.iter().position(|q| q.id == id)
    }

    pub fn view_index(&self, id: &str) -> Option<usize> {
        self.views.iter().position(|v| v.id == id)
    }

    /// Workload processing time with no view, `f * sum(t_i)`.
    pub fn baseline_time(&self) -> f64 {
        self.frequency * self.queries.iter().map(|q| q.base_time).sum::<f64>()
    }

    /// Total downloaded GB over the period.
    pub fn download_volume(&self) -> f64 {
        self.frequency * self.queries.iter().map(|q| q.result_size).sum::<f64>()
    }

    /// Copies of the stored data that are billed (`n_s`).
    pub fn storage_copies(&self) -> f64 {
        self.catalog.storage().billed_copies(&self.fleet)
    }
}
