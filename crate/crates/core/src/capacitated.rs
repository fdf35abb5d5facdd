//! Hungarian-style primal-dual augmentation on the expanded graph.
//!
//! Phase 1 roots an alternating forest at every `A`-demand copy that is still
//! below its quota and grows it toward `B ∪ B′`; phase 2 does the same from
//! `B`-demand copies toward `A ∪ A′`. Both phases run the same search with
//! the two sides swapped.
//!
//! Vertices may have several partners, so a copy is free while its counter is
//! below its quota, and absorbing a matched vertex into the tree brings all
//! of its partners along. A pair is used at most once no matter which copies
//! realize it.
//!
//! # Labels
//!
//! Demand copies carry their own labels `l(a_i)`, `l(b_j)`. All surplus copies
//! of one side share a label derived from a single pool label `p`:
//! `l(b′_j) = p` and `l(a′_i) = offset - p`. An `a′`–`b′` edge therefore has
//! slack `offset - W = c >= 0`, consistent with that edge being absent.
//!
//! A search may end in three ways:
//! - at a free demand copy on the far side (one more pair);
//! - by spending a unit of surplus quota on the far side (one more pair);
//! - by releasing a unit of surplus quota on the root's side (the pair count
//!   is unchanged; a surplus partner is traded for a demanded one).
//!
//! The third ending is required for exactness: without it, phase 2 can only
//! add pairs on top of phase 1's choices and may overpay.
//!
//! Each dual update shifts the tree labels by the smallest slack `α_l`, so the
//! augmenting path found is always a minimum reduced-cost one. Matched pairs
//! satisfy `l(a) + l(b) <= W`; the gap is the dual of the pair's unit
//! capacity. Adding that gap makes every matched pair tight.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expansion::{
    allocate_copies, build_expanded_graph, project_matching, CopyKind, CopyRef, ExpandedGraph,
    ExpandedPair, ExpansionError,
};
use crate::model::{Assignment, Instance, ModelError, Side, VertexRef};
use crate::scalar::{min_finite, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    /// The copy whose quota could not be filled, if the failure came from a search.
    pub root: Option<CopyRef>,
    /// Original vertices reached by the stuck search (its set `S ∪ T`).
    pub reached: Vec<VertexRef>,
    pub reason: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    Invalid(ModelError),
    #[error("infeasible instance: {}", .0.reason)]
    Infeasible(InfeasibilityCertificate),
    #[error("limited-capacity assignment requires every demand to be 1")]
    DemandsNotUnit,
    #[error("internal solver error: {0}")]
    Internal(String),
}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::DemandOverCapacity { vertex, .. }
            | ModelError::DemandOverPartners { vertex, .. } => {
                SolveError::Infeasible(InfeasibilityCertificate {
                    root: None,
                    reached: vec![vertex],
                    reason: e.to_string(),
                })
            }
            other => SolveError::Invalid(other),
        }
    }
}

/// Matched pairs plus the per-copy counters.
///
/// A vertex's pairs are not pinned to a copy; only the number routed through
/// the surplus copy is tracked. `Num(a_i) = deg(a_i) - Num(a′_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapacitatedMatching {
    s: usize,
    t: usize,
    used: Vec<bool>,
    partners_a: Vec<Vec<usize>>,
    partners_b: Vec<Vec<usize>>,
    surplus_a: Vec<usize>,
    surplus_b: Vec<usize>,
}

impl CapacitatedMatching {
    pub fn new(s: usize, t: usize) -> Self {
        Self {
            s,
            t,
            used: vec![false; s * t],
            partners_a: vec![Vec::new(); s],
            partners_b: vec![Vec::new(); t],
            surplus_a: vec![0; s],
            surplus_b: vec![0; t],
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.used[i * self.t + j]
    }

    pub fn len(&self) -> usize {
        self.partners_a.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .partners_a
            .iter()
            .enumerate()
            .flat_map(|(i, ps)| ps.iter().map(move |&j| (i, j)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn partners(&self, v: VertexRef) -> &[usize] {
        match v.side {
            Side::A => &self.partners_a[v.index],
            Side::B => &self.partners_b[v.index],
        }
    }

    pub fn degree(&self, v: VertexRef) -> usize {
        self.partners(v).len()
    }

    pub fn num(&self, copy: CopyRef) -> usize {
        let surplus = match copy.vertex.side {
            Side::A => self.surplus_a[copy.vertex.index],
            Side::B => self.surplus_b[copy.vertex.index],
        };
        match copy.kind {
            CopyKind::Surplus => surplus,
            CopyKind::Demand => self.degree(copy.vertex) - surplus,
        }
    }

    fn add(&mut self, i: usize, j: usize) {
        debug_assert!(!self.contains(i, j));
        self.used[i * self.t + j] = true;
        self.partners_a[i].push(j);
        self.partners_b[j].push(i);
    }

    fn remove(&mut self, i: usize, j: usize) {
        debug_assert!(self.contains(i, j));
        self.used[i * self.t + j] = false;
        self.partners_a[i].retain(|&x| x != j);
        self.partners_b[j].retain(|&x| x != i);
    }

    fn surplus_mut(&mut self, side: Side, k: usize) -> &mut usize {
        match side {
            Side::A => &mut self.surplus_a[k],
            Side::B => &mut self.surplus_b[k],
        }
    }
}

/// `num(v) < quota(v)`.
pub fn is_free<T: Scalar>(graph: &ExpandedGraph<T>, m: &CapacitatedMatching, v: CopyRef) -> bool {
    m.num(v) < graph.quota(v)
}

/// Copy labels of the expanded graph; see the module docs for the surplus labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacitatedDual<T> {
    pub label_a: Vec<T>,
    pub label_b: Vec<T>,
    pub pool: T,
    pub offset: T,
}

impl<T: Scalar> CapacitatedDual<T> {
    /// Row maxima on `A`, zeros on `B` and on the pool.
    pub fn initial(graph: &ExpandedGraph<T>) -> Self {
        let label_a = graph
            .weights
            .iter()
            .map(|row| row.iter().copied().max().expect("t >= 1"))
            .collect();
        Self {
            label_a,
            label_b: vec![T::zero(); graph.t],
            pool: T::zero(),
            offset: graph.transform.offset,
        }
    }

    pub fn copy_label(&self, copy: CopyRef) -> T {
        match (copy.kind, copy.vertex.side) {
            (CopyKind::Demand, Side::A) => self.label_a[copy.vertex.index],
            (CopyKind::Demand, Side::B) => self.label_b[copy.vertex.index],
            (CopyKind::Surplus, side) => self.surplus_label(side),
        }
    }

    fn surplus_label(&self, side: Side) -> T {
        match side {
            Side::A => self.offset - self.pool,
            Side::B => self.pool,
        }
    }

    fn labels(&self, side: Side) -> &[T] {
        match side {
            Side::A => &self.label_a,
            Side::B => &self.label_b,
        }
    }

    fn labels_mut(&mut self, side: Side) -> &mut [T] {
        match side {
            Side::A => &mut self.label_a,
            Side::B => &mut self.label_b,
        }
    }

    /// `l(a_i) + l(b_j) - W(i, j)`.
    pub fn pair_slack(&self, graph: &ExpandedGraph<T>, i: usize, j: usize) -> T {
        self.label_a[i] + self.label_b[j] - graph.weights[i][j]
    }

    /// Slack of the surplus-copy arcs of vertex `v`: `(spend, release)`,
    /// where spending must be non-negative while the surplus copy has room
    /// and releasing must be non-negative while it holds pairs.
    fn surplus_slacks(&self, v: VertexRef) -> (T, T) {
        let own = self.labels(v.side)[v.index];
        let sur = self.surplus_label(v.side);
        (sur - own, own - sur)
    }

    /// Lower bound on the minimum cost for any labels; equal to the optimum
    /// at a dual-optimal state.
    ///
    /// Uses `z_e = max(0, W - l(a) - l(b))` on pairs and the same clamping on
    /// surplus arcs, which makes every label vector dual feasible.
    pub fn objective(&self, graph: &ExpandedGraph<T>) -> T {
        let off = self.offset;
        let mut d = T::zero();
        let (mut sum_a, mut sum_b) = (0usize, 0usize);
        for i in 0..graph.s {
            let q = graph.a_demand_quota[i];
            sum_a += q;
            d = d - self.label_a[i].times(q);
            let (spend, _) = self.surplus_slacks(VertexRef::a(i));
            d = d - neg_part(spend).times(graph.a_surplus_quota[i]);
        }
        for j in 0..graph.t {
            let q = graph.b_demand_quota[j];
            sum_b += q;
            d = d + (off - self.label_b[j]).times(q);
            let (spend, _) = self.surplus_slacks(VertexRef::b(j));
            d = d - neg_part(spend).times(graph.b_surplus_quota[j]);
        }
        let pool_term = self.pool - off;
        d = d + pool_term.times(sum_b) - pool_term.times(sum_a);
        for i in 0..graph.s {
            for j in 0..graph.t {
                d = d - neg_part(self.pair_slack(graph, i, j));
            }
        }
        d
    }
}

fn neg_part<T: Scalar>(x: T) -> T {
    if x.is_negative() {
        -x
    } else {
        T::zero()
    }
}

/// A violated reduced-cost condition on the current matching.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualViolation {
    /// Unmatched pair with `l(a) + l(b) < W`.
    UnmatchedPair(usize, usize),
    /// Matched pair with `l(a) + l(b) > W`: no non-negative capacity dual closes it.
    MatchedPair(usize, usize),
    SurplusSpend(VertexRef),
    SurplusRelease(VertexRef),
}

/// All reduced-cost conditions on the expanded graph: pairs, plus the
/// demand/surplus copy arcs. An empty result means the labels certify the
/// matching as optimal for its current counters.
pub fn dual_violations<T: Scalar>(
    graph: &ExpandedGraph<T>,
    m: &CapacitatedMatching,
    dual: &CapacitatedDual<T>,
) -> Vec<DualViolation> {
    let mut out = Vec::new();
    for i in 0..graph.s {
        for j in 0..graph.t {
            let sl = dual.pair_slack(graph, i, j);
            if m.contains(i, j) {
                if sl.is_positive() {
                    out.push(DualViolation::MatchedPair(i, j));
                }
            } else if sl.is_negative() {
                out.push(DualViolation::UnmatchedPair(i, j));
            }
        }
    }
    let vertices = (0..graph.s)
        .map(VertexRef::a)
        .chain((0..graph.t).map(VertexRef::b));
    for v in vertices {
        let surplus = CopyRef {
            vertex: v,
            kind: CopyKind::Surplus,
        };
        let (spend, release) = dual.surplus_slacks(v);
        if m.num(surplus) < graph.quota(surplus) && spend.is_negative() {
            out.push(DualViolation::SurplusSpend(v));
        }
        if m.num(surplus) > 0 && release.is_negative() {
            out.push(DualViolation::SurplusRelease(v));
        }
    }
    out
}

/// Capacity duals `z_e = W - l(a) - l(b)` of the matched pairs; with them
/// every matched pair satisfies `l(a) + l(b) + z_e = W`.
pub fn pair_capacity_duals<T: Scalar>(
    graph: &ExpandedGraph<T>,
    m: &CapacitatedMatching,
    dual: &CapacitatedDual<T>,
) -> Vec<((usize, usize), T)> {
    m.pairs()
        .into_iter()
        .map(|(i, j)| ((i, j), -dual.pair_slack(graph, i, j)))
        .collect()
}

/// Which end a finished search reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Leaf {
    /// Free demand copy on the far side.
    Demand(usize),
    /// Spend one unit of a far-side surplus copy reached through this vertex.
    Spend(usize),
    /// Release one unit of a root-side surplus copy.
    Release(usize),
}

/// Alternating forest of one search. Indices on the root's side are `r`,
/// on the far side `o`.
#[derive(Clone, Debug)]
struct Forest<T> {
    root_side: Side,
    root: usize,
    settled_r: Vec<bool>,
    settled_o: Vec<bool>,
    slack_r: Vec<Option<T>>,
    slack_o: Vec<Option<T>>,
    parent_r: Vec<usize>,
    parent_o: Vec<usize>,
    /// Slack of releasing root-side surplus through `r`.
    release: Vec<Option<T>>,
    /// Slack of spending far-side surplus through `o`; together with
    /// `slack_o` this is the doubled slack array over `o` and `o′`.
    spend: Vec<Option<T>>,
}

impl<T: Scalar> Forest<T> {
    fn new(root_side: Side, root: usize, n_r: usize, n_o: usize) -> Self {
        Self {
            root_side,
            root,
            settled_r: vec![false; n_r],
            settled_o: vec![false; n_o],
            slack_r: vec![None; n_r],
            slack_o: vec![None; n_o],
            parent_r: vec![usize::MAX; n_r],
            parent_o: vec![usize::MAX; n_o],
            release: vec![None; n_r],
            spend: vec![None; n_o],
        }
    }

    fn far_side(&self) -> Side {
        match self.root_side {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn pair(&self, r: usize, o: usize) -> (usize, usize) {
        match self.root_side {
            Side::A => (r, o),
            Side::B => (o, r),
        }
    }

    fn reached(&self) -> Vec<VertexRef> {
        let tag = |side, settled: &[bool]| {
            settled
                .iter()
                .enumerate()
                .filter(|p| *p.1)
                .map(move |(k, _)| VertexRef { side, index: k })
                .collect::<Vec<_>>()
        };
        let mut v = tag(self.root_side, &self.settled_r);
        v.extend(tag(self.far_side(), &self.settled_o));
        v.sort_unstable();
        v
    }
}

/// Event passed to an observer after each state change.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineEvent<T> {
    DualUpdate { alpha: T },
    Augmented { phase: usize, leaf_kind: CopyKind },
}

/// Solver state shared by both phases.
pub struct Engine<'g, T> {
    graph: &'g ExpandedGraph<T>,
    matching: CapacitatedMatching,
    dual: CapacitatedDual<T>,
    augmentations: [usize; 2],
    dual_updates: usize,
}

impl<'g, T: Scalar> Engine<'g, T> {
    pub fn new(graph: &'g ExpandedGraph<T>) -> Self {
        Self {
            graph,
            matching: CapacitatedMatching::new(graph.s, graph.t),
            dual: CapacitatedDual::initial(graph),
            augmentations: [0; 2],
            dual_updates: 0,
        }
    }

    pub fn graph(&self) -> &'g ExpandedGraph<T> {
        self.graph
    }

    pub fn matching(&self) -> &CapacitatedMatching {
        &self.matching
    }

    pub fn dual(&self) -> &CapacitatedDual<T> {
        &self.dual
    }

    fn side_len(&self, side: Side) -> usize {
        match side {
            Side::A => self.graph.s,
            Side::B => self.graph.t,
        }
    }

    fn copy(side: Side, index: usize, kind: CopyKind) -> CopyRef {
        CopyRef {
            vertex: VertexRef { side, index },
            kind,
        }
    }

    fn free(&self, side: Side, index: usize, kind: CopyKind) -> bool {
        is_free(self.graph, &self.matching, Self::copy(side, index, kind))
    }

    /// Runs phase 1 then phase 2, calling `observe` after each dual update
    /// and each augmentation.
    pub fn run(
        &mut self,
        observe: &mut dyn FnMut(EngineEvent<T>, &Self),
    ) -> Result<(), SolveError> {
        for (phase, side) in [Side::A, Side::B].into_iter().enumerate() {
            for root in 0..self.side_len(side) {
                while self.free(side, root, CopyKind::Demand) {
                    let leaf = self.search(side, root, observe)?;
                    self.augmentations[phase] += 1;
                    let leaf_kind = match leaf {
                        Leaf::Demand(_) => CopyKind::Demand,
                        _ => CopyKind::Surplus,
                    };
                    log::trace!(
                        "phase {} root {}: {:?}, {} pairs",
                        phase + 1,
                        VertexRef { side, index: root },
                        leaf,
                        self.matching.len()
                    );
                    observe(EngineEvent::Augmented { phase, leaf_kind }, self);
                }
            }
        }
        Ok(())
    }

    fn search(
        &mut self,
        root_side: Side,
        root: usize,
        observe: &mut dyn FnMut(EngineEvent<T>, &Self),
    ) -> Result<Leaf, SolveError> {
        let far = match root_side {
            Side::A => Side::B,
            Side::B => Side::A,
        };
        let mut f = Forest::new(
            root_side,
            root,
            self.side_len(root_side),
            self.side_len(far),
        );
        f.slack_r[root] = Some(T::zero());
        self.settle_root_side(&mut f, root);

        loop {
            if let Some(leaf) = self.pick_leaf(&f) {
                self.augment(&f, leaf);
                return Ok(leaf);
            }
            if let Some(o) = (0..f.slack_o.len())
                .find(|&o| !f.settled_o[o] && f.slack_o[o].is_some_and(|s| s.is_zero()))
            {
                self.settle_far_side(&mut f, o);
                continue;
            }
            if let Some(r) = (0..f.slack_r.len())
                .find(|&r| !f.settled_r[r] && f.slack_r[r].is_some_and(|s| s.is_zero()))
            {
                self.settle_root_side(&mut f, r);
                continue;
            }

            let unsettled = |slack: &[Option<T>], settled: &[bool]| {
                min_finite(slack.iter().zip(settled).filter(|p| !*p.1).map(|p| *p.0))
            };
            let alpha = min_finite([
                unsettled(&f.slack_o, &f.settled_o),
                unsettled(&f.slack_r, &f.settled_r),
                min_finite(f.spend.iter().copied()),
                min_finite(f.release.iter().copied()),
            ]);
            let Some(alpha) = alpha else {
                let kind = CopyKind::Demand;
                return Err(SolveError::Infeasible(InfeasibilityCertificate {
                    root: Some(Self::copy(root_side, root, kind)),
                    reached: f.reached(),
                    reason: format!(
                        "no alternating path from {} reaches a free copy",
                        Self::copy(root_side, root, kind)
                    ),
                }));
            };
            debug_assert!(alpha.is_positive());
            self.apply_dual_update(&mut f, alpha);
            self.dual_updates += 1;
            observe(EngineEvent::DualUpdate { alpha }, self);
        }
    }

    /// Zero-slack leaf, preferring a demand copy, then a release, then a
    /// spend, lowest index first within each kind.
    fn pick_leaf(&self, f: &Forest<T>) -> Option<Leaf> {
        let far = f.far_side();
        let zero = |x: &Option<T>| x.is_some_and(|s| s.is_zero());
        let demand = (0..f.slack_o.len()).find(|&o| {
            !f.settled_o[o] && zero(&f.slack_o[o]) && self.free(far, o, CopyKind::Demand)
        });
        demand
            .map(Leaf::Demand)
            .or_else(|| f.release.iter().position(zero).map(Leaf::Release))
            .or_else(|| f.spend.iter().position(zero).map(Leaf::Spend))
    }

    fn settle_root_side(&mut self, f: &mut Forest<T>, r: usize) {
        f.settled_r[r] = true;
        let side = f.root_side;
        let far = f.far_side();
        let sur = Self::copy(side, r, CopyKind::Surplus);
        if self.matching.num(sur) > 0 {
            let (_, release) = self.dual.surplus_slacks(sur.vertex);
            relax(&mut f.release[r], release);
        }
        let lr = self.dual.labels(side)[r];
        for o in 0..f.slack_o.len() {
            if f.settled_o[o] {
                continue;
            }
            let (i, j) = f.pair(r, o);
            if self.matching.contains(i, j) {
                continue;
            }
            let cand = lr + self.dual.labels(far)[o] - self.graph.weights[i][j];
            if relax(&mut f.slack_o[o], cand) {
                f.parent_o[o] = r;
                if self.free(far, o, CopyKind::Surplus) {
                    let (spend, _) = self.dual.surplus_slacks(VertexRef {
                        side: far,
                        index: o,
                    });
                    f.spend[o] = Some(cand + spend);
                }
            }
        }
    }

    /// `o` is matched up to its demand quota; every partner joins the tree
    /// side at the reduced cost of its pair.
    fn settle_far_side(&mut self, f: &mut Forest<T>, o: usize) {
        f.settled_o[o] = true;
        let side = f.root_side;
        let far = f.far_side();
        let lo = self.dual.labels(far)[o];
        let partners = self
            .matching
            .partners(VertexRef {
                side: far,
                index: o,
            })
            .to_vec();
        for r in partners {
            if f.settled_r[r] {
                continue;
            }
            let (i, j) = f.pair(r, o);
            let cand = self.graph.weights[i][j] - self.dual.labels(side)[r] - lo;
            if relax(&mut f.slack_r[r], cand) {
                f.parent_r[r] = o;
                if self.matching.num(Self::copy(side, r, CopyKind::Surplus)) > 0 {
                    let (_, release) = self.dual.surplus_slacks(VertexRef { side, index: r });
                    f.release[r] = Some(cand + release);
                }
            }
        }
    }

    /// Shifts tree labels by `alpha`: root-side tree vertices down, far-side
    /// tree vertices up; all pending slacks drop by `alpha`.
    fn apply_dual_update(&mut self, f: &mut Forest<T>, alpha: T) {
        let far = f.far_side();
        for (l, _) in self
            .dual
            .labels_mut(f.root_side)
            .iter_mut()
            .zip(&f.settled_r)
            .filter(|p| *p.1)
        {
            *l = *l - alpha;
        }
        for (l, _) in self
            .dual
            .labels_mut(far)
            .iter_mut()
            .zip(&f.settled_o)
            .filter(|p| *p.1)
        {
            *l = *l + alpha;
        }
        let dec = |v: &mut Option<T>| {
            if let Some(x) = v {
                *x = *x - alpha;
            }
        };
        for (s, _) in f.slack_r.iter_mut().zip(&f.settled_r).filter(|p| !*p.1) {
            dec(s);
        }
        for (s, _) in f.slack_o.iter_mut().zip(&f.settled_o).filter(|p| !*p.1) {
            dec(s);
        }
        f.release.iter_mut().for_each(dec);
        f.spend.iter_mut().for_each(dec);
    }

    /// Flips the path from the leaf back to the root.
    fn augment(&mut self, f: &Forest<T>, leaf: Leaf) {
        let side = f.root_side;
        let far = f.far_side();
        enum At {
            Root(usize),
            Far(usize),
        }
        let mut at = match leaf {
            Leaf::Demand(o) => At::Far(o),
            Leaf::Spend(o) => {
                *self.matching.surplus_mut(far, o) += 1;
                At::Far(o)
            }
            Leaf::Release(r) => {
                *self.matching.surplus_mut(side, r) -= 1;
                At::Root(r)
            }
        };
        loop {
            at = match at {
                At::Far(o) => {
                    let r = f.parent_o[o];
                    let (i, j) = f.pair(r, o);
                    self.matching.add(i, j);
                    At::Root(r)
                }
                At::Root(r) if r == f.root => break,
                At::Root(r) => {
                    let o = f.parent_r[r];
                    let (i, j) = f.pair(r, o);
                    self.matching.remove(i, j);
                    At::Far(o)
                }
            };
        }
        debug_assert!(self
            .graph
            .copies()
            .all(|c| self.matching.num(c) <= self.graph.quota(c)));
    }

    /// Drops pairs whose both endpoints route them through surplus copies.
    /// At an optimum such pairs cost zero; returns how many were dropped.
    fn prune_surplus_pairs(&mut self) -> Result<usize, SolveError> {
        let mut dropped = 0;
        for (i, j) in self.matching.pairs() {
            if self.matching.surplus_a[i] > 0 && self.matching.surplus_b[j] > 0 {
                if !self.graph.cost(i, j).is_zero() {
                    return Err(SolveError::Internal(format!(
                        "pair ({i}, {j}) with positive cost joins two surplus copies"
                    )));
                }
                self.matching.remove(i, j);
                self.matching.surplus_a[i] -= 1;
                self.matching.surplus_b[j] -= 1;
                dropped += 1;
            }
        }
        Ok(dropped)
    }
}

/// Lowers `slot` to `cand` if smaller; returns whether it changed.
fn relax<T: Scalar>(slot: &mut Option<T>, cand: T) -> bool {
    match slot {
        Some(cur) if *cur <= cand => false,
        _ => {
            *slot = Some(cand);
            true
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport<T> {
    pub algorithm: String,
    /// Augmentations in phase 1 (A roots) and phase 2 (B roots).
    pub phase_augmentations: [usize; 2],
    pub dual_updates: usize,
    /// Dual bound in cost units; equals `total_cost` at termination.
    pub dual_objective: T,
    pub pruned_pairs: usize,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub assignment: Assignment<T>,
    pub report: SolveReport<T>,
    pub graph: ExpandedGraph<T>,
    pub matching: CapacitatedMatching,
    pub dual: CapacitatedDual<T>,
    pub expanded_pairs: Vec<ExpandedPair>,
}

/// Minimum-cost assignment meeting every demand and capacity bound.
pub fn solve_ga<T: Scalar>(inst: &Instance<T>) -> Result<Solution<T>, SolveError> {
    solve_observed(inst, "ga", &mut |_, _| {})
}

/// The unit-demand special case; rejects any demand other than 1.
pub fn solve_lca<T: Scalar>(inst: &Instance<T>) -> Result<Solution<T>, SolveError> {
    if !inst.has_unit_demands() {
        return Err(SolveError::DemandsNotUnit);
    }
    solve_observed(inst, "lca", &mut |_, _| {})
}

/// [`solve_ga`] with an observer invoked after every dual update and augmentation.
pub fn solve_observed<T: Scalar>(
    inst: &Instance<T>,
    algorithm: &str,
    observe: &mut dyn FnMut(EngineEvent<T>, &Engine<'_, T>),
) -> Result<Solution<T>, SolveError> {
    let started = Instant::now();
    let graph = build_expanded_graph(inst)?;
    let mut engine = Engine::new(&graph);
    engine.run(observe)?;
    let pruned_pairs = engine.prune_surplus_pairs()?;

    let internal = |e: ExpansionError| SolveError::Internal(e.to_string());
    let expanded_pairs = allocate_copies(&graph, &engine.matching.pairs()).map_err(internal)?;
    let assignment = project_matching(&graph, &expanded_pairs).map_err(internal)?;
    let violations = dual_violations(&graph, &engine.matching, &engine.dual);
    if !violations.is_empty() {
        return Err(SolveError::Internal(format!(
            "final labels violate reduced-cost conditions: {violations:?}"
        )));
    }
    let dual_objective = engine.dual.objective(&graph);
    if dual_objective != assignment.total_cost {
        return Err(SolveError::Internal(format!(
            "dual objective {dual_objective} != primal cost {}",
            assignment.total_cost
        )));
    }

    let report = SolveReport {
        algorithm: algorithm.to_string(),
        phase_augmentations: engine.augmentations,
        dual_updates: engine.dual_updates,
        dual_objective,
        pruned_pairs,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let Engine { matching, dual, .. } = engine;
    Ok(Solution {
        assignment,
        report,
        graph,
        matching,
        dual,
        expanded_pairs,
    })
}
