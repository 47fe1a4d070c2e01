//! Problem instances, view selections and the cost model with views.
//!
//! For a selection the total computing time is query processing plus view
//! materialization plus maintenance; compute cost bills that time on every
//! instance of the fleet. Storage holds the dataset and the materialized
//! views for one period of `storage_months`. Transfer cost depends only on
//! the downloaded query results, so views never change it.

mod instance;
mod selection;

use alloc::vec::Vec;

use thiserror::Error;

pub use instance::{CandidateView, GainMatrix, InstanceError, InstanceParts, ProblemInstance, Query};
pub use selection::{greedy_assignment, validate_selection, Selection, Violation};

use crate::pricing::{self, StoragePeriod};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViewCostError {
    #[error("invalid selection ({} violation(s))", .0.len())]
    InvalidSelection(Vec<Violation>),
}

/// Times in hours, costs in USD, stored size in GB.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub t_proc: f64,
    pub t_mat: f64,
    pub t_maint: f64,
    pub total_time: f64,
    pub c_c: f64,
    pub c_s: f64,
    pub c_t: f64,
    pub total_cost: f64,
    pub stored_size: f64,
}

/// Processing time of the workload over the period, `f * sum_i (t_i - g_i)`.
pub fn response_time(instance: &ProblemInstance, sel: &Selection) -> Result<f64, ViewCostError> {
    validate_selection(instance, sel).map_err(ViewCostError::InvalidSelection)?;
    Ok(processing_time(instance, sel))
}

/// Full cost breakdown of a valid selection.
pub fn evaluate(instance: &ProblemInstance, sel: &Selection) -> Result<CostBreakdown, ViewCostError> {
    validate_selection(instance, sel).map_err(ViewCostError::InvalidSelection)?;
    Ok(evaluate_valid(instance, sel))
}

pub(crate) fn processing_time(instance: &ProblemInstance, sel: &Selection) -> f64 {
    let gains = instance.gains();
    let per_run: f64 = instance
        .queries()
        .iter()
        .zip(&sel.assignment)
        .enumerate()
        .map(|(i, (q, slot))| match slot {
            Some(k) => q.base_time - gains.get(i, *k),
            None => q.base_time,
        })
        .sum();
    instance.frequency() * per_run
}

/// Evaluation without the validity check, for selections built by the
/// solvers themselves.
pub(crate) fn evaluate_valid(instance: &ProblemInstance, sel: &Selection) -> CostBreakdown {
    let views = instance.views();
    let mut t_mat = 0.0;
    let mut t_maint = 0.0;
    let mut stored_size = instance.dataset_size();
    for k in sel.materialized_views() {
        t_mat += views[k].mat_time;
        t_maint += views[k].maint_time;
        stored_size += views[k].size;
    }
    let t_proc = processing_time(instance, sel);
    let total_time = t_proc + t_mat + t_maint;

    // All quantities are non-negative by the instance invariants.
    let c_c = pricing::compute_cost(total_time, instance.fleet()).unwrap_or(0.0);
    let c_s = pricing::storage_cost(
        &[StoragePeriod {
            size: stored_size,
            months: instance.storage_months(),
        }],
        instance.fleet(),
        instance.catalog(),
    )
    .unwrap_or(0.0);
    let c_t = pricing::transfer_cost(instance.download_volume(), instance.catalog()).unwrap_or(0.0);

    CostBreakdown {
        t_proc,
        t_mat,
        t_maint,
        total_time,
        c_c,
        c_s,
        c_t,
        total_cost: c_c + c_s + c_t,
        stored_size,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogs;
    use crate::pricing::Fleet;
    use alloc::string::ToString;
    use alloc::vec;

    fn view(id: &str, size: f64) -> CandidateView {
        CandidateView {
            id: id.to_string(),
            size,
            mat_time: 0.0,
            maint_time: 0.0,
        }
    }

    fn instance(queries: Vec<Query>, views: Vec<CandidateView>, gains: &[(usize, usize, f64)]) -> ProblemInstance {
        let catalog = catalogs::ec2_s3();
        let fleet = Fleet::new(catalog.instance_type("m1.small").unwrap().clone(), 2).unwrap();
        let gains = GainMatrix::new(queries.len(), views.len(), gains.iter().copied()).unwrap();
        ProblemInstance::new(InstanceParts {
            catalog,
            fleet,
            dataset_size: 512.0,
            storage_months: 12.0,
            frequency: 1.0,
            queries,
            views,
            gains,
        })
        .unwrap()
    }

    fn running_example() -> ProblemInstance {
        instance(
            vec![Query::new("Q", 50.0).with_result_size(10.0)],
            vec![view("V", 50.0)],
            &[(0, 0, 10.0)],
        )
    }

    #[test]
    fn running_example_times() {
        let inst = running_example();
        let empty = Selection::empty(&inst);
        assert_eq!(response_time(&inst, &empty).unwrap(), 50.0);
        let with = greedy_assignment(&inst, &[true]);
        assert_eq!(response_time(&inst, &with).unwrap(), 40.0);
        let none = instance(vec![], vec![], &[]);
        assert_eq!(response_time(&none, &Selection::empty(&none)).unwrap(), 0.0);
    }

    #[test]
    fn running_example_storage_with_views() {
        let inst = running_example();
        let b = evaluate(&inst, &greedy_assignment(&inst, &[true])).unwrap();
        assert!((b.c_s - 640.68).abs() < 1e-6 * 640.68);
        assert_eq!(b.stored_size, 562.0);
        assert!((b.c_t - 0.60).abs() < 1e-9);
        assert!((b.c_c - 40.0 * 0.12).abs() < 1e-9);
    }

    #[test]
    fn empty_selection_matches_baseline_model() {
        let inst = running_example();
        let b = evaluate(&inst, &Selection::empty(&inst)).unwrap();
        assert_eq!(b.t_mat, 0.0);
        assert_eq!(b.t_maint, 0.0);
        assert_eq!(b.t_proc, 50.0);
        assert_eq!(b.stored_size, 512.0);
        let c_c = pricing::compute_cost(50.0, inst.fleet()).unwrap();
        let c_s = pricing::storage_cost(
            &[StoragePeriod::new(512.0, 12.0).unwrap()],
            inst.fleet(),
            inst.catalog(),
        )
        .unwrap();
        let c_t = pricing::transfer_cost(10.0, inst.catalog()).unwrap();
        assert_eq!(b.c_c, c_c);
        assert_eq!(b.c_s, c_s);
        assert_eq!(b.c_t, c_t);
        assert_eq!(b.total_cost, c_c + c_s + c_t);
    }

    #[test]
    fn validate_examples() {
        let inst = instance(
            vec![Query::new("q1", 1.0)],
            vec![view("v1", 1.0)],
            &[(0, 0, 0.5)],
        );
        assert!(validate_selection(&inst, &Selection::empty(&inst)).is_ok());

        let useless = Selection {
            materialized: vec![true],
            assignment: vec![None],
        };
        assert_eq!(
            validate_selection(&inst, &useless),
            Err(vec![Violation::UnusedView { view: 0 }])
        );

        let dangling = Selection {
            materialized: vec![false],
            assignment: vec![Some(0)],
        };
        assert_eq!(
            validate_selection(&inst, &dangling),
            Err(vec![Violation::NotMaterialized { query: 0, view: 0 }])
        );

        let bad = Selection {
            materialized: vec![false, true],
            assignment: vec![Some(5)],
        };
        let v = validate_selection(&inst, &bad).unwrap_err();
        assert!(v.contains(&Violation::MaterializedLength { expected: 1, actual: 2 }));
        assert!(v.contains(&Violation::ViewOutOfRange { query: 0, view: 5 }));
        assert!(matches!(evaluate(&inst, &bad), Err(ViewCostError::InvalidSelection(_))));
    }

    #[test]
    fn no_gain_assignment_rejected() {
        let inst = instance(
            vec![Query::new("q1", 1.0), Query::new("q2", 1.0)],
            vec![view("v1", 1.0)],
            &[(0, 0, 0.5)],
        );
        let sel = Selection {
            materialized: vec![true],
            assignment: vec![Some(0), Some(0)],
        };
        assert_eq!(
            validate_selection(&inst, &sel),
            Err(vec![Violation::NoGain { query: 1, view: 0 }])
        );
    }

    #[test]
    fn greedy_examples() {
        let inst = instance(
            vec![Query::new("q1", 1.0)],
            vec![view("v1", 1.0), view("v2", 1.0)],
            &[(0, 0, 0.3), (0, 1, 0.5)],
        );
        let none = greedy_assignment(&inst, &[false, false]);
        assert_eq!(none, Selection::empty(&inst));
        let both = greedy_assignment(&inst, &[true, true]);
        assert_eq!(both.assignment, vec![Some(1)]);
        assert_eq!(both.materialized, vec![false, true]);
        assert!(validate_selection(&inst, &both).is_ok());
    }

    #[test]
    fn gain_matrix_rules() {
        assert!(matches!(
            GainMatrix::new(1, 1, [(0, 1, 0.1)]),
            Err(InstanceError::GainIndexOutOfRange { .. })
        ));
        assert!(matches!(
            GainMatrix::new(1, 1, [(0, 0, 0.1), (0, 0, 0.2)]),
            Err(InstanceError::DuplicateGain { .. })
        ));
        assert!(GainMatrix::new(1, 1, [(0, 0, -0.1)]).is_err());
        let zero = GainMatrix::new(1, 2, [(0, 0, 0.0), (0, 1, 0.4)]).unwrap();
        assert_eq!(zero.nnz(), 1);
        assert_eq!(zero.get(0, 0), 0.0);
        assert_eq!(zero.get(0, 1), 0.4);

        let catalog = catalogs::ec2_s3();
        let fleet = Fleet::new(catalog.compute()[0].clone(), 1).unwrap();
        let parts = InstanceParts {
            catalog,
            fleet,
            dataset_size: 1.0,
            storage_months: 1.0,
            frequency: 1.0,
            queries: vec![Query::new("q", 1.0)],
            views: vec![view("v", 1.0)],
            gains: GainMatrix::new(1, 1, [(0, 0, 1.5)]).unwrap(),
        };
        assert!(matches!(
            ProblemInstance::new(parts.clone()),
            Err(InstanceError::InvalidGain { .. })
        ));
        let mut p = parts.clone();
        p.gains = GainMatrix::default();
        assert!(matches!(ProblemInstance::new(p), Err(InstanceError::GainShape { .. })));
        let mut p = parts;
        p.gains = GainMatrix::new(1, 1, []).unwrap();
        p.frequency = 0.5;
        assert!(matches!(ProblemInstance::new(p), Err(InstanceError::InvalidFrequency(_))));
    }

    #[test]
    fn transfer_independent_of_selection() {
        let inst = running_example();
        let a = evaluate(&inst, &Selection::empty(&inst)).unwrap();
        let b = evaluate(&inst, &greedy_assignment(&inst, &[true])).unwrap();
        assert_eq!(a.c_t, b.c_t);
    }
}
