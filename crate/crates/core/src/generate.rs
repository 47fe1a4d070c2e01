//! Seeded random problem instances for experiments.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::catalogs;
use crate::pricing::{Fleet, ProviderCatalog};
use crate::viewcost::{CandidateView, GainMatrix, InstanceError, InstanceParts, ProblemInstance, Query};

/// Largest gain as a share of the query's base time.
pub const MAX_GAIN_SHARE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Closed interval `[lo, hi]` sampled uniformly.
pub type Range = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_queries: usize,
    pub n_views: usize,
    /// Probability that a (query, view) pair has a positive gain.
    pub gain_density: f64,
    /// Query base time, hours.
    pub base_time: Range,
    /// View size, GB.
    pub view_size: Range,
    /// Materialization time, hours.
    pub mat_time: Range,
    /// Maintenance time over the period, hours.
    pub maint_time: Range,
    pub catalog: ProviderCatalog,
    pub fleet: Fleet,
    pub dataset_size: f64,
    pub storage_months: f64,
    pub frequency: f64,
    pub seed: u64,
}

impl GenConfig {
    /// Defaults: EC2 + S3 prices, two m1.small instances, one month,
    /// a 500 GB dataset and 30 % gain density.
    pub fn new(n_queries: usize, n_views: usize, seed: u64) -> Self {
        let catalog = catalogs::ec2_s3();
        let small = catalog.instance_type("m1.small").expect("bundled").clone();
        Self {
            n_queries,
            n_views,
            gain_density: 0.3,
            base_time: (0.1, 2.0),
            view_size: (1.0, 100.0),
            mat_time: (0.05, 0.5),
            maint_time: (0.01, 0.2),
            fleet: Fleet::new(small, 2).expect("non-empty fleet"),
            catalog,
            dataset_size: 500.0,
            storage_months: 1.0,
            frequency: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_queries == 0 || self.n_views == 0 {
            return Err(GenError::InvalidConfig("query and view counts must be >= 1"));
        }
        if !(self.gain_density > 0.0 && self.gain_density <= 1.0) {
            return Err(GenError::InvalidConfig("gain density must lie in (0, 1]"));
        }
        let ok = |(lo, hi): Range| lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi;
        if ![self.base_time, self.view_size, self.mat_time, self.maint_time]
            .into_iter()
            .all(ok)
        {
            return Err(GenError::InvalidConfig("ranges must be positive with lo <= hi"));
        }
        Ok(())
    }
}

fn sample<R: Rng>(rng: &mut R, (lo, hi): Range) -> f64 {
    rng.random_range(lo..=hi)
}

/// Draws base times, then views, then the gain matrix row by row.
pub fn generate_instance(cfg: &GenConfig) -> Result<ProblemInstance, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let queries: Vec<Query> = (0..cfg.n_queries)
        .map(|i| Query::new(format!("q{}", i + 1), sample(&mut rng, cfg.base_time)))
        .collect();
    let views: Vec<CandidateView> = (0..cfg.n_views)
        .map(|k| CandidateView {
            id: format!("v{}", k + 1),
            size: sample(&mut rng, cfg.view_size),
            mat_time: sample(&mut rng, cfg.mat_time),
            maint_time: sample(&mut rng, cfg.maint_time),
        })
        .collect();

    let mut entries = Vec::new();
    for (i, q) in queries.iter().enumerate() {
        for k in 0..cfg.n_views {
            if rng.random::<f64>() < cfg.gain_density {
                // 1 - U[0, 1) lies in (0, 1].
                let share = 1.0 - rng.random::<f64>();
                entries.push((i, k, MAX_GAIN_SHARE * q.base_time * share));
            }
        }
    }
    let gains = GainMatrix::new(cfg.n_queries, cfg.n_views, entries)?;

    Ok(ProblemInstance::new(InstanceParts {
        catalog: cfg.catalog.clone(),
        fleet: cfg.fleet.clone(),
        dataset_size: cfg.dataset_size,
        storage_months: cfg.storage_months,
        frequency: cfg.frequency,
        queries,
        views,
        gains,
    })?)
}
