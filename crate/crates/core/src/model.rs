//! Problem instances, assignments, and the cheap validation shared by all solvers.
//!
//! An instance pairs a set `A` of `s` elements with a set `B` of `t` elements.
//! Element `a_i` must be matched to at least `a_demand[i]` and at most
//! `a_capacity[i]` distinct elements of `B`, and symmetrically for `B`. Each
//! pair `(i, j)` is used at most once and costs `cost[i][j] >= 0`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

/// An original (unexpanded) vertex: `a_i` or `b_j`, zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexRef {
    pub side: Side,
    pub index: usize,
}

impl VertexRef {
    pub fn a(index: usize) -> Self {
        Self {
            side: Side::A,
            index,
        }
    }

    pub fn b(index: usize) -> Self {
        Self {
            side: Side::B,
            index,
        }
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::A => write!(f, "a_{}", self.index + 1),
            Side::B => write!(f, "b_{}", self.index + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance<T> {
    pub s: usize,
    pub t: usize,
    pub cost: Vec<Vec<T>>,
    pub a_demand: Vec<usize>,
    pub a_capacity: Vec<usize>,
    pub b_demand: Vec<usize>,
    pub b_capacity: Vec<usize>,
}

impl<T: Scalar> Instance<T> {
    /// Builds an instance, taking `s` and `t` from the vector lengths.
    pub fn new(
        cost: Vec<Vec<T>>,
        a_demand: Vec<usize>,
        a_capacity: Vec<usize>,
        b_demand: Vec<usize>,
        b_capacity: Vec<usize>,
    ) -> Self {
        Self {
            s: a_demand.len(),
            t: b_demand.len(),
            cost,
            a_demand,
            a_capacity,
            b_demand,
            b_capacity,
        }
    }

    /// Every vertex must take exactly one partner.
    pub fn one_to_one(cost: Vec<Vec<T>>) -> Self {
        let s = cost.len();
        let t = cost.first().map_or(0, Vec::len);
        Self::new(cost, vec![1; s], vec![1; s], vec![1; t], vec![1; t])
    }

    pub fn demand(&self, v: VertexRef) -> usize {
        match v.side {
            Side::A => self.a_demand[v.index],
            Side::B => self.b_demand[v.index],
        }
    }

    pub fn capacity(&self, v: VertexRef) -> usize {
        match v.side {
            Side::A => self.a_capacity[v.index],
            Side::B => self.b_capacity[v.index],
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexRef> + '_ {
        (0..self.s)
            .map(VertexRef::a)
            .chain((0..self.t).map(VertexRef::b))
    }

    pub fn max_cost(&self) -> T {
        self.cost
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or_else(T::zero)
    }

    pub fn has_unit_demands(&self) -> bool {
        self.a_demand.iter().chain(&self.b_demand).all(|&d| d == 1)
    }

    fn shape_ok(&self) -> bool {
        self.s >= 1
            && self.t >= 1
            && self.cost.len() == self.s
            && self.cost.iter().all(|row| row.len() == self.t)
            && self.a_demand.len() == self.s
            && self.a_capacity.len() == self.s
            && self.b_demand.len() == self.t
            && self.b_capacity.len() == self.t
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed instance: {0}")]
    Shape(String),
    #[error("negative cost at ({row}, {col})")]
    NegativeCost { row: usize, col: usize },
    #[error("{vertex} demand {demand} exceeds its capacity {capacity}")]
    DemandOverCapacity {
        vertex: VertexRef,
        demand: usize,
        capacity: usize,
    },
    #[error("{vertex} demand {demand} exceeds the {partners} available partners")]
    DemandOverPartners {
        vertex: VertexRef,
        demand: usize,
        partners: usize,
    },
    #[error("pair ({0}, {1}) is out of range")]
    PairOutOfRange(usize, usize),
    #[error("pair ({0}, {1}) occurs more than once")]
    DuplicatePair(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Shape,
    NegativeCost,
    DemandOverCapacity,
    DemandOverPartners,
    DemandSumOverCapacitySum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub feasible_necessary: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Checks the necessary conditions for feasibility. Never fails; a report is
/// always produced. Passing is not sufficient, see
/// [`crate::oracles::feasibility_check`] for the exact answer.
pub fn validate_instance<T: Scalar>(inst: &Instance<T>) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |rule, detail: String| violations.push(Violation { rule, detail });

    if !inst.shape_ok() {
        push(
            Rule::Shape,
            format!(
                "expected s, t >= 1, a {}x{} cost matrix, {} A-bounds and {} B-bounds",
                inst.s, inst.t, inst.s, inst.t
            ),
        );
        return ValidationReport {
            feasible_necessary: false,
            violations,
        };
    }

    for (i, row) in inst.cost.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if c.is_negative() {
                push(Rule::NegativeCost, format!("cost[{i}][{j}] = {c} < 0"));
            }
        }
    }

    for v in inst.vertices() {
        let (demand, capacity) = (inst.demand(v), inst.capacity(v));
        let (own, other, partners) = match v.side {
            Side::A => ("α", "t", inst.t),
            Side::B => ("β", "s", inst.s),
        };
        let k = v.index + 1;
        if demand > capacity {
            push(
                Rule::DemandOverCapacity,
                format!("{own}_{k} > {own}′_{k} ({demand} > {capacity})"),
            );
        }
        if demand > partners {
            push(
                Rule::DemandOverPartners,
                format!("{own}_{k} > {other} ({demand} > {partners})"),
            );
        }
    }

    let sum = |v: &[usize]| v.iter().sum::<usize>();
    if sum(&inst.a_demand) > sum(&inst.b_capacity) {
        push(
            Rule::DemandSumOverCapacitySum,
            format!(
                "Σα > Σβ′ ({} > {})",
                sum(&inst.a_demand),
                sum(&inst.b_capacity)
            ),
        );
    }
    if sum(&inst.b_demand) > sum(&inst.a_capacity) {
        push(
            Rule::DemandSumOverCapacitySum,
            format!(
                "Σβ > Σα′ ({} > {})",
                sum(&inst.b_demand),
                sum(&inst.a_capacity)
            ),
        );
    }

    ValidationReport {
        feasible_necessary: violations.is_empty(),
        violations,
    }
}

/// Clips every capacity to the size of the opposite set.
///
/// Fails on violations clipping cannot repair: malformed shape, negative
/// costs, or a demand above its capacity or above the opposite set size.
/// Sum-condition violations are left for the solvers to detect.
pub fn normalize_instance<T: Scalar>(inst: &Instance<T>) -> Result<Instance<T>, ModelError> {
    if !inst.shape_ok() {
        return Err(ModelError::Shape(format!(
            "s = {}, t = {}, cost rows = {}, bounds = ({}, {}, {}, {})",
            inst.s,
            inst.t,
            inst.cost.len(),
            inst.a_demand.len(),
            inst.a_capacity.len(),
            inst.b_demand.len(),
            inst.b_capacity.len()
        )));
    }
    for (i, row) in inst.cost.iter().enumerate() {
        if let Some(j) = row.iter().position(|c| c.is_negative()) {
            return Err(ModelError::NegativeCost { row: i, col: j });
        }
    }
    for v in inst.vertices() {
        let (demand, capacity) = (inst.demand(v), inst.capacity(v));
        let partners = match v.side {
            Side::A => inst.t,
            Side::B => inst.s,
        };
        if demand > capacity {
            return Err(ModelError::DemandOverCapacity {
                vertex: v,
                demand,
                capacity,
            });
        }
        if demand > partners {
            return Err(ModelError::DemandOverPartners {
                vertex: v,
                demand,
                partners,
            });
        }
    }

    let mut out = inst.clone();
    for c in &mut out.a_capacity {
        *c = (*c).min(inst.t);
    }
    for c in &mut out.b_capacity {
        *c = (*c).min(inst.s);
    }
    Ok(out)
}

/// Total cost of a pair set. Order of pairs is irrelevant.
pub fn assignment_cost<T: Scalar>(
    inst: &Instance<T>,
    pairs: &[(usize, usize)],
) -> Result<T, ModelError> {
    let mut seen = HashSet::with_capacity(pairs.len());
    let mut total = T::zero();
    for &(i, j) in pairs {
        if i >= inst.s || j >= inst.t {
            return Err(ModelError::PairOutOfRange(i, j));
        }
        if !seen.insert((i, j)) {
            return Err(ModelError::DuplicatePair(i, j));
        }
        total = total + inst.cost[i][j];
    }
    Ok(total)
}

/// A set of matched original pairs together with its cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment<T> {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: T,
}

impl<T: Scalar> Assignment<T> {
    /// Sorts the pairs and computes the cost; rejects duplicates and
    /// out-of-range indices.
    pub fn new(inst: &Instance<T>, mut pairs: Vec<(usize, usize)>) -> Result<Self, ModelError> {
        let total_cost = assignment_cost(inst, &pairs)?;
        pairs.sort_unstable();
        Ok(Self { pairs, total_cost })
    }

    pub fn empty() -> Self {
        Self {
            pairs: Vec::new(),
            total_cost: T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Degree of every A-vertex and every B-vertex.
    pub fn degrees(&self, s: usize, t: usize) -> (Vec<usize>, Vec<usize>) {
        let mut da = vec![0; s];
        let mut db = vec![0; t];
        for &(i, j) in &self.pairs {
            da[i] += 1;
            db[j] += 1;
        }
        (da, db)
    }
}
