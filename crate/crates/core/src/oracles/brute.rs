use thiserror::Error;

use crate::model::{validate_instance, Assignment, Instance, ModelError, Rule};
use crate::scalar::Scalar;

/// Largest `s * t` enumerated (2^20 subsets).
pub const BRUTE_FORCE_MAX_PAIRS: usize = 20;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BruteError {
    #[error("{pairs} pairs exceed the enumeration budget of {BRUTE_FORCE_MAX_PAIRS}")]
    BudgetExceeded { pairs: usize },
    #[error("no subset of pairs satisfies all bounds")]
    Infeasible,
    #[error("invalid instance: {0}")]
    Invalid(ModelError),
}

/// Minimum-cost feasible pair set by enumerating all `2^(s·t)` subsets.
///
/// Among optimal sets the lexicographically smallest sorted pair list wins.
pub fn brute_force_optimum<T: Scalar>(inst: &Instance<T>) -> Result<Assignment<T>, BruteError> {
    let report = validate_instance(inst);
    if report.has(Rule::Shape) {
        return Err(BruteError::Invalid(ModelError::Shape(
            report.violations[0].detail.clone(),
        )));
    }
    if report.has(Rule::NegativeCost) {
        let (row, col) = (0..inst.s)
            .flat_map(|i| (0..inst.t).map(move |j| (i, j)))
            .find(|&(i, j)| inst.cost[i][j].is_negative())
            .expect("negative entry");
        return Err(BruteError::Invalid(ModelError::NegativeCost { row, col }));
    }
    let (s, t) = (inst.s, inst.t);
    let n = s * t;
    if n > BRUTE_FORCE_MAX_PAIRS {
        return Err(BruteError::BudgetExceeded { pairs: n });
    }

    let costs: Vec<T> = inst.cost.iter().flatten().copied().collect();
    let mut best: Option<(T, Vec<(usize, usize)>)> = None;
    let mut deg_a = vec![0usize; s];
    let mut deg_b = vec![0usize; t];
    for mask in 0u32..(1u32 << n) {
        deg_a.fill(0);
        deg_b.fill(0);
        let mut cost = T::zero();
        for k in (0..n).filter(|k| mask >> k & 1 == 1) {
            deg_a[k / t] += 1;
            deg_b[k % t] += 1;
            cost = cost + costs[k];
        }
        let ok = (0..s).all(|i| (inst.a_demand[i]..=inst.a_capacity[i]).contains(&deg_a[i]))
            && (0..t).all(|j| (inst.b_demand[j]..=inst.b_capacity[j]).contains(&deg_b[j]));
        if !ok || best.as_ref().is_some_and(|(c, _)| *c < cost) {
            continue;
        }
        let pairs: Vec<_> = (0..n)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| (k / t, k % t))
            .collect();
        let better = match &best {
            None => true,
            Some((c, p)) => cost < *c || pairs < *p,
        };
        if better {
            best = Some((cost, pairs));
        }
    }
    best.map(|(total_cost, pairs)| Assignment { pairs, total_cost })
        .ok_or(BruteError::Infeasible)
}
