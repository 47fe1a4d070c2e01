//! Pay-as-you-go cost models for data warehouses in public clouds, and
//! selection of materialized views under a budget or a deadline.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation over in-memory values; file formats, timing and the command
//! line live in the `cloudview` crate.
//!
//! * [`pricing`]: piecewise-linear tariffs, provider catalogs and the
//!   baseline transfer/compute/storage costs.
//! * [`catalogs`]: bundled EC2/EBS, EC2/S3 and Azure catalogs.
//! * [`viewcost`]: problem instances, selections and the full cost model.
//! * [`exact`]: exhaustive solver, budget bounds, weighted sweeps, LP export.
//! * [`grasp`]: randomized greedy construction plus local search.
//! * [`generate`]: seeded random instances.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod catalogs;
pub mod exact;
pub mod generate;
pub mod grasp;
pub mod pricing;
pub mod viewcost;

/// Absolute tolerance, in USD or hours, for budget and deadline checks.
pub const FEASIBILITY_TOL: f64 = 1e-6;

pub use exact::{
    budget_bounds, budget_levels, export_lp, pareto_sweep, solve_exact, BudgetBounds,
    BudgetLevel, ExactError, ExactSolver, Objective, SolveResult, SolveStatus, Solution,
};
pub use generate::{generate_instance, GenConfig};
pub use grasp::{construct, grasp_solve, indicators, local_search, GraspError, GraspParams};
pub use pricing::{
    compute_cost, storage_cost, transfer_cost, Fleet, InstanceType, PiecewisePrice,
    PricingError, ProviderCatalog, Segment, StorageMode, StoragePeriod, StorageTariff,
};
pub use viewcost::{
    evaluate, greedy_assignment, response_time, validate_selection, CandidateView,
    CostBreakdown, GainMatrix, InstanceError, InstanceParts, ProblemInstance, Query, Selection,
    ViewCostError, Violation,
};
