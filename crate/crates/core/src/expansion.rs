//! The expanded bipartite graph and the cost-to-weight transform.
//!
//! Every original vertex `a_i` is split into a demand copy (quota `α_i`) and
//! a surplus copy `a′_i` (quota `α′_i - α_i`), and likewise on `B`. Demand
//! copies connect to both copies on the other side; surplus copies connect
//! only to demand copies. All copies of a pair carry the same weight.
//!
//! Dropping surplus–surplus edges loses nothing: with non-negative costs some
//! optimal assignment is edge-minimal (no pair can be removed without breaking
//! a demand), and in such an assignment every pair has at least one endpoint
//! sitting exactly at its demand.
//!
//! Copies are quota counters, not materialized vertices.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{normalize_instance, Assignment, Instance, ModelError, Side, VertexRef};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopyKind {
    Demand,
    Surplus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CopyRef {
    pub vertex: VertexRef,
    pub kind: CopyKind,
}

impl fmt::Display for CopyRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.vertex.side {
            Side::A => 'a',
            Side::B => 'b',
        };
        let prime = match self.kind {
            CopyKind::Demand => "",
            CopyKind::Surplus => "′",
        };
        write!(f, "{letter}{prime}_{}", self.vertex.index + 1)
    }
}

/// A matched edge of the expanded graph: a copy of `a_i` with a copy of `b_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpandedPair {
    pub i: usize,
    pub a_kind: CopyKind,
    pub j: usize,
    pub b_kind: CopyKind,
}

impl ExpandedPair {
    pub fn new(i: usize, a_kind: CopyKind, j: usize, b_kind: CopyKind) -> Self {
        Self {
            i,
            a_kind,
            j,
            b_kind,
        }
    }

    pub fn a_copy(&self) -> CopyRef {
        CopyRef {
            vertex: VertexRef::a(self.i),
            kind: self.a_kind,
        }
    }

    pub fn b_copy(&self) -> CopyRef {
        CopyRef {
            vertex: VertexRef::b(self.j),
            kind: self.b_kind,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    AffineNegation,
}

/// `W(e) = offset - c(e)` with `offset = max c + 1`.
///
/// A reciprocal weight `1 / c` would not do: it does not preserve the
/// minimizer of a sum (costs {1, 4} sum to less than {2, 2}, yet their
/// reciprocals sum to more). The affine map preserves optima among
/// assignments with the same number of pairs and keeps arithmetic exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightTransform<T> {
    pub c_max: T,
    pub offset: T,
    pub mode: TransformMode,
}

impl<T: Scalar> WeightTransform<T> {
    pub fn weight(&self, cost: T) -> T {
        self.offset - cost
    }

    pub fn cost(&self, weight: T) -> T {
        self.offset - weight
    }
}

pub fn transform_costs<T: Scalar>(inst: &Instance<T>) -> (Vec<Vec<T>>, WeightTransform<T>) {
    let c_max = inst.max_cost();
    let tr = WeightTransform {
        c_max,
        offset: c_max + T::one(),
        mode: TransformMode::AffineNegation,
    };
    let w = inst
        .cost
        .iter()
        .map(|row| row.iter().map(|&c| tr.weight(c)).collect())
        .collect();
    (w, tr)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandedGraph<T> {
    pub s: usize,
    pub t: usize,
    /// Transformed weights of the original pairs; shared by all copy combinations.
    pub weights: Vec<Vec<T>>,
    pub transform: WeightTransform<T>,
    pub a_demand_quota: Vec<usize>,
    pub a_surplus_quota: Vec<usize>,
    pub b_demand_quota: Vec<usize>,
    pub b_surplus_quota: Vec<usize>,
}

impl<T: Scalar> ExpandedGraph<T> {
    pub fn quota(&self, copy: CopyRef) -> usize {
        let k = copy.vertex.index;
        match (copy.vertex.side, copy.kind) {
            (Side::A, CopyKind::Demand) => self.a_demand_quota[k],
            (Side::A, CopyKind::Surplus) => self.a_surplus_quota[k],
            (Side::B, CopyKind::Demand) => self.b_demand_quota[k],
            (Side::B, CopyKind::Surplus) => self.b_surplus_quota[k],
        }
    }

    /// Weight of an expanded edge, `None` for the absent surplus–surplus edges.
    pub fn weight(&self, i: usize, a_kind: CopyKind, j: usize, b_kind: CopyKind) -> Option<T> {
        match (a_kind, b_kind) {
            (CopyKind::Surplus, CopyKind::Surplus) => None,
            _ => Some(self.weights[i][j]),
        }
    }

    pub fn cost(&self, i: usize, j: usize) -> T {
        self.transform.cost(self.weights[i][j])
    }

    pub fn copies(&self) -> impl Iterator<Item = CopyRef> + '_ {
        let side = |side, n: usize| {
            (0..n).flat_map(move |k| {
                [CopyKind::Demand, CopyKind::Surplus].map(|kind| CopyRef {
                    vertex: VertexRef { side, index: k },
                    kind,
                })
            })
        };
        side(Side::A, self.s).chain(side(Side::B, self.t))
    }
}

/// Builds the expanded graph; the instance is normalized first.
pub fn build_expanded_graph<T: Scalar>(inst: &Instance<T>) -> Result<ExpandedGraph<T>, ModelError> {
    let inst = normalize_instance(inst)?;
    let (weights, transform) = transform_costs(&inst);
    let surplus = |d: &[usize], c: &[usize]| d.iter().zip(c).map(|(d, c)| c - d).collect();
    Ok(ExpandedGraph {
        s: inst.s,
        t: inst.t,
        weights,
        transform,
        a_surplus_quota: surplus(&inst.a_demand, &inst.a_capacity),
        b_surplus_quota: surplus(&inst.b_demand, &inst.b_capacity),
        a_demand_quota: inst.a_demand,
        b_demand_quota: inst.b_demand,
    })
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("expanded pair {0:?} is out of range")]
    OutOfRange(ExpandedPair),
    #[error("no edge between surplus copies {0} and {1}")]
    SurplusToSurplus(CopyRef, CopyRef),
    #[error("copy {copy} matched {count} times, quota {quota}")]
    QuotaExceeded {
        copy: CopyRef,
        count: usize,
        quota: usize,
    },
    #[error("original pair ({0}, {1}) realized by more than one expanded edge")]
    DuplicatePair(usize, usize),
}

/// Routes each original pair through concrete copies. A vertex whose degree
/// exceeds its demand sends its lowest-index partners to the demand copy and
/// the rest to the surplus copy.
///
/// Succeeds when every pair has an endpoint at or below its demand (true of
/// edge-minimal assignments); otherwise a surplus–surplus edge is reported.
pub fn allocate_copies<T: Scalar>(
    graph: &ExpandedGraph<T>,
    pairs: &[(usize, usize)],
) -> Result<Vec<ExpandedPair>, ExpansionError> {
    let mut partners_a = vec![Vec::new(); graph.s];
    let mut partners_b = vec![Vec::new(); graph.t];
    for &(i, j) in pairs {
        if i >= graph.s || j >= graph.t {
            return Err(ExpansionError::OutOfRange(ExpandedPair::new(
                i,
                CopyKind::Demand,
                j,
                CopyKind::Demand,
            )));
        }
        partners_a[i].push(j);
        partners_b[j].push(i);
    }
    partners_a
        .iter_mut()
        .chain(&mut partners_b)
        .for_each(|p| p.sort_unstable());
    let kind = |partners: &[usize], quota: usize, other: usize| {
        let rank = partners
            .iter()
            .position(|&p| p == other)
            .expect("partner listed");
        if rank < quota {
            CopyKind::Demand
        } else {
            CopyKind::Surplus
        }
    };
    let out: Vec<_> = pairs
        .iter()
        .map(|&(i, j)| {
            ExpandedPair::new(
                i,
                kind(&partners_a[i], graph.a_demand_quota[i], j),
                j,
                kind(&partners_b[j], graph.b_demand_quota[j], i),
            )
        })
        .collect();
    project_matching(graph, &out)?;
    Ok(out)
}

/// Merges copies back onto their original vertices.
pub fn project_matching<T: Scalar>(
    graph: &ExpandedGraph<T>,
    expanded: &[ExpandedPair],
) -> Result<Assignment<T>, ExpansionError> {
    let mut counts = std::collections::HashMap::<CopyRef, usize>::new();
    let mut seen = HashSet::with_capacity(expanded.len());
    let mut total = T::zero();
    for p in expanded {
        if p.i >= graph.s || p.j >= graph.t {
            return Err(ExpansionError::OutOfRange(*p));
        }
        if graph.weight(p.i, p.a_kind, p.j, p.b_kind).is_none() {
            return Err(ExpansionError::SurplusToSurplus(p.a_copy(), p.b_copy()));
        }
        for copy in [p.a_copy(), p.b_copy()] {
            let count = counts.entry(copy).or_default();
            *count += 1;
            let quota = graph.quota(copy);
            if *count > quota {
                return Err(ExpansionError::QuotaExceeded {
                    copy,
                    count: *count,
                    quota,
                });
            }
        }
        if !seen.insert((p.i, p.j)) {
            return Err(ExpansionError::DuplicatePair(p.i, p.j));
        }
        total = total + graph.cost(p.i, p.j);
    }
    let mut pairs: Vec<_> = seen.into_iter().collect();
    pairs.sort_unstable();
    Ok(Assignment {
        pairs,
        total_cost: total,
    })
}
