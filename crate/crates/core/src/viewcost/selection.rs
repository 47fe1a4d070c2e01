use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::ProblemInstance;

/// Which views are materialized (`y`) and which view, if any, each query
/// reads from (`x`, at most one per query by construction).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selection {
    pub materialized: Vec<bool>,
    pub assignment: Vec<Option<usize>>,
}

impl Selection {
    /// Nothing materialized, every query on base data.
    pub fn empty(instance: &ProblemInstance) -> Self {
        Self {
            materialized: vec![false; instance.n_views()],
            assignment: vec![None; instance.n_queries()],
        }
    }

    pub fn materialized_count(&self) -> usize {
        self.materialized.iter().filter(|&&m| m).count()
    }

    pub fn materialized_views(&self) -> impl Iterator<Item = usize> + '_ {
        self.materialized
            .iter()
            .enumerate()
            .filter_map(|(k, &m)| m.then_some(k))
    }
}

/// A broken selection constraint. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `materialized` has the wrong length.
    MaterializedLength { expected: usize, actual: usize },
    /// `assignment` has the wrong length.
    AssignmentLength { expected: usize, actual: usize },
    ViewOutOfRange { query: usize, view: usize },
    /// Query reads a view that is not materialized (`x_ik <= y_k`).
    NotMaterialized { query: usize, view: usize },
    /// Materialized view used by no query (`y_k <= sum_i x_ik`).
    UnusedView { view: usize },
    /// Query assigned to a view that does not speed it up.
    NoGain { query: usize, view: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::MaterializedLength { expected, actual } => {
                write!(f, "materialized has {actual} entries, expected {expected}")
            }
            Self::AssignmentLength { expected, actual } => {
                write!(f, "assignment has {actual} entries, expected {expected}")
            }
            Self::ViewOutOfRange { query, view } => {
                write!(f, "query {query} assigned to unknown view {view}")
            }
            Self::NotMaterialized { query, view } => {
                write!(f, "query {query} uses view {view} which is not materialized")
            }
            Self::UnusedView { view } => write!(f, "view {view} is materialized but unused"),
            Self::NoGain { query, view } => {
                write!(f, "view {view} gives no gain to query {query}")
            }
        }
    }
}

/// Checks every selection constraint and reports all that fail.
pub fn validate_selection(
    instance: &ProblemInstance,
    sel: &Selection,
) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let (n_q, n_v) = (instance.n_queries(), instance.n_views());
    if sel.materialized.len() != n_v {
        out.push(Violation::MaterializedLength {
            expected: n_v,
            actual: sel.materialized.len(),
        });
    }
    if sel.assignment.len() != n_q {
        out.push(Violation::AssignmentLength {
            expected: n_q,
            actual: sel.assignment.len(),
        });
    }

    let mut used = vec![false; sel.materialized.len()];
    for (query, &slot) in sel.assignment.iter().enumerate().take(n_q) {
        let Some(view) = slot else { continue };
        if view >= n_v {
            out.push(Violation::ViewOutOfRange { query, view });
            continue;
        }
        match sel.materialized.get(view) {
            Some(true) => used[view] = true,
            _ => out.push(Violation::NotMaterialized { query, view }),
        }
        if instance.gains().get(query, view) <= 0.0 {
            out.push(Violation::NoGain { query, view });
        }
    }
    for (view, (&m, &u)) in sel.materialized.iter().zip(&used).enumerate().take(n_v) {
        if m && !u {
            out.push(Violation::UnusedView { view });
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Best assignment for a fixed set of materialized views: each query takes
/// the materialized view with the largest gain (lowest index on ties), then
/// views nobody uses are dropped.
///
/// # Panics
/// If `materialized.len()` differs from the instance's view count.
pub fn greedy_assignment(instance: &ProblemInstance, materialized: &[bool]) -> Selection {
    assert_eq!(materialized.len(), instance.n_views(), "materialized vector length");
    let gains = instance.gains();
    let mut used = vec![false; materialized.len()];
    let assignment = (0..instance.n_queries())
        .map(|i| {
            let mut best: Option<(usize, f64)> = None;
            for &(k, g) in gains.row(i) {
                if materialized[k] && best.is_none_or(|(_, bg)| g > bg) {
                    best = Some((k, g));
                }
            }
            best.map(|(k, _)| {
                used[k] = true;
                k
            })
        })
        .collect();
    Selection {
        materialized: used,
        assignment,
    }
}
