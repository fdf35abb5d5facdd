//! Ground truth independent of the primal-dual solver: an assignment
//! checker, exhaustive enumeration, a lower-bound circulation solver, and a
//! differential driver over random instances.

mod brute;
mod diff;
mod flow;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{Assignment, Instance, VertexRef};
use crate::scalar::Scalar;

pub use brute::{brute_force_optimum, BruteError, BRUTE_FORCE_MAX_PAIRS};
pub use diff::{
    compare_solvers, differential_test, random_feasible_instance, DiffReport, DiffSummary,
    GenParams, TrialRecord,
};
pub use flow::{
    feasibility_check, solve_flow_reference, Feasibility, FlowError, FlowNetwork, InfeasibilityCut,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeViolation {
    pub vertex: VertexRef,
    pub degree: usize,
    /// `[demand, capacity]`.
    pub bounds: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport<T> {
    pub feasible: bool,
    pub degree_violations: Vec<DegreeViolation>,
    pub duplicate_pairs: Vec<(usize, usize)>,
    /// Pairs naming a vertex that does not exist; these are skipped.
    pub out_of_range: Vec<(usize, usize)>,
    /// Cost of the distinct in-range pairs.
    pub recomputed_cost: T,
}

/// Checks degree bounds and pair uniqueness and recomputes the cost.
/// `asg.total_cost` is ignored.
pub fn check_assignment<T: Scalar>(inst: &Instance<T>, asg: &Assignment<T>) -> VerifyReport<T> {
    let mut deg_a = vec![0usize; inst.s];
    let mut deg_b = vec![0usize; inst.t];
    let mut seen = HashSet::new();
    let mut duplicate_pairs = Vec::new();
    let mut out_of_range = Vec::new();
    let mut cost = T::zero();
    for &(i, j) in &asg.pairs {
        if i >= inst.s || j >= inst.t || inst.cost.get(i).is_none_or(|r| j >= r.len()) {
            out_of_range.push((i, j));
            continue;
        }
        if !seen.insert((i, j)) {
            if !duplicate_pairs.contains(&(i, j)) {
                duplicate_pairs.push((i, j));
            }
            continue;
        }
        deg_a[i] += 1;
        deg_b[j] += 1;
        cost = cost + inst.cost[i][j];
    }

    let mut degree_violations = Vec::new();
    let degrees = deg_a
        .iter()
        .enumerate()
        .map(|(i, &d)| (VertexRef::a(i), d))
        .chain(deg_b.iter().enumerate().map(|(j, &d)| (VertexRef::b(j), d)));
    for (v, degree) in degrees {
        let bounds = [inst.demand(v), inst.capacity(v)];
        if degree < bounds[0] || degree > bounds[1] {
            degree_violations.push(DegreeViolation {
                vertex: v,
                degree,
                bounds,
            });
        }
    }

    VerifyReport {
        feasible: degree_violations.is_empty()
            && duplicate_pairs.is_empty()
            && out_of_range.is_empty(),
        degree_violations,
        duplicate_pairs,
        out_of_range,
        recomputed_cost: cost,
    }
}

/// Hex SHA-256 prefix of the instance's compact JSON form.
pub fn instance_digest<T: Serialize>(inst: &Instance<T>) -> String {
    let json = serde_json::to_vec(inst).expect("instance serializes");
    hex::encode(&Sha256::digest(&json)[..8])
}
