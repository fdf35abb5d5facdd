use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_instance, Assignment, Instance, ModelError, Rule, VertexRef};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
struct Arc<T> {
    to: usize,
    rev: usize,
    cap: i64,
    cost: T,
}

/// Residual network of the lower-bound circulation built from an instance.
///
/// Nodes: `src`, one per `a_i`, one per `b_j`, `snk`, plus a super source and
/// super sink. Arcs `src → a_i` carry `[α_i, α′_i]`, `b_j → snk` carry
/// `[β_j, β′_j]`, every pair arc `a_i → b_j` carries `[0, 1]` at its cost,
/// and `snk → src` closes the circulation. Lower bounds are moved into
/// supplies on the super source and super sink.
#[derive(Clone, Debug)]
pub struct FlowNetwork<T> {
    s: usize,
    t: usize,
    adj: Vec<Vec<Arc<T>>>,
    /// `(node, arc index)` of each pair arc, row-major.
    pair_arcs: Vec<(usize, usize)>,
    required: i64,
}

impl<T: Scalar> FlowNetwork<T> {
    pub fn build(inst: &Instance<T>) -> Self {
        let (s, t) = (inst.s, inst.t);
        let n = s + t + 4;
        let mut net = Self {
            s,
            t,
            adj: vec![Vec::new(); n],
            pair_arcs: Vec::with_capacity(s * t),
            required: 0,
        };
        let (src, snk) = (net.src(), net.snk());
        let mut excess = vec![0i64; n];
        let mut bounded = |net: &mut Self, u: usize, v: usize, lo: usize, hi: usize| {
            net.add_arc(u, v, hi as i64 - lo as i64, T::zero());
            excess[u] -= lo as i64;
            excess[v] += lo as i64;
        };
        for i in 0..s {
            let v = net.a(i);
            bounded(&mut net, src, v, inst.a_demand[i], inst.a_capacity[i]);
        }
        for j in 0..t {
            let v = net.b(j);
            bounded(&mut net, v, snk, inst.b_demand[j], inst.b_capacity[j]);
        }
        for i in 0..s {
            for j in 0..t {
                let k = net.add_arc(net.a(i), net.b(j), 1, inst.cost[i][j]);
                net.pair_arcs.push((net.a(i), k));
            }
        }
        net.add_arc(snk, src, i64::MAX / 4, T::zero());
        let (ss, tt) = (net.super_source(), net.super_sink());
        for (v, &e) in excess.iter().enumerate() {
            if e > 0 {
                net.add_arc(ss, v, e, T::zero());
                net.required += e;
            } else if e < 0 {
                net.add_arc(v, tt, -e, T::zero());
            }
        }
        net
    }

    fn src(&self) -> usize {
        0
    }
    fn a(&self, i: usize) -> usize {
        1 + i
    }
    fn b(&self, j: usize) -> usize {
        1 + self.s + j
    }
    fn snk(&self) -> usize {
        1 + self.s + self.t
    }
    fn super_source(&self) -> usize {
        2 + self.s + self.t
    }
    fn super_sink(&self) -> usize {
        3 + self.s + self.t
    }

    fn add_arc(&mut self, u: usize, v: usize, cap: i64, cost: T) -> usize {
        let (ku, kv) = (self.adj[u].len(), self.adj[v].len());
        self.adj[u].push(Arc {
            to: v,
            rev: kv,
            cap,
            cost,
        });
        self.adj[v].push(Arc {
            to: u,
            rev: ku,
            cap: 0,
            cost: -cost,
        });
        ku
    }

    /// Total lower-bound mass that a feasible circulation must route.
    pub fn required(&self) -> i64 {
        self.required
    }

    /// Dinic max flow from the super source to the super sink.
    pub fn max_flow(&mut self) -> i64 {
        let (ss, tt) = (self.super_source(), self.super_sink());
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[ss] = 0;
            let mut queue = VecDeque::from([ss]);
            while let Some(u) = queue.pop_front() {
                for arc in &self.adj[u] {
                    if arc.cap > 0 && level[arc.to] == usize::MAX {
                        level[arc.to] = level[u] + 1;
                        queue.push_back(arc.to);
                    }
                }
            }
            if level[tt] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.blocking_push(ss, tt, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn blocking_push(
        &mut self,
        u: usize,
        tt: usize,
        limit: i64,
        level: &[usize],
        next: &mut [usize],
    ) -> i64 {
        if u == tt {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let k = next[u];
            let Arc { to, cap, rev, .. } = self.adj[u][k];
            if cap > 0 && level[to] == level[u] + 1 {
                let got = self.blocking_push(to, tt, limit.min(cap), level, next);
                if got > 0 {
                    self.adj[u][k].cap -= got;
                    self.adj[to][rev].cap += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0
    }

    /// Nodes reachable from the super source in the residual network.
    fn residual_reach(&self) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![self.super_source()];
        seen[self.super_source()] = true;
        while let Some(u) = stack.pop() {
            for arc in &self.adj[u] {
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }

    /// Successive shortest paths (Dijkstra with potentials) from the super
    /// source to the super sink. All costs are non-negative, so zero initial
    /// potentials are valid. Returns the flow value and its cost.
    pub fn min_cost_flow(&mut self) -> (i64, T) {
        let (ss, tt) = (self.super_source(), self.super_sink());
        let n = self.adj.len();
        let mut potential = vec![T::zero(); n];
        let (mut flow, mut cost) = (0i64, T::zero());
        loop {
            let mut dist: Vec<Option<T>> = vec![None; n];
            let mut prev = vec![(usize::MAX, usize::MAX); n];
            dist[ss] = Some(T::zero());
            let mut heap = BinaryHeap::from([Reverse((T::zero(), ss))]);
            while let Some(Reverse((d, u))) = heap.pop() {
                if dist[u].is_some_and(|x| x < d) {
                    continue;
                }
                for (k, arc) in self.adj[u].iter().enumerate() {
                    if arc.cap <= 0 {
                        continue;
                    }
                    let nd = d + arc.cost + potential[u] - potential[arc.to];
                    if dist[arc.to].is_none_or(|x| nd < x) {
                        dist[arc.to] = Some(nd);
                        prev[arc.to] = (u, k);
                        heap.push(Reverse((nd, arc.to)));
                    }
                }
            }
            let Some(_) = dist[tt] else {
                return (flow, cost);
            };
            for v in 0..n {
                if let Some(d) = dist[v] {
                    potential[v] = potential[v] + d;
                }
            }
            let mut push = i64::MAX;
            let mut v = tt;
            while v != ss {
                let (u, k) = prev[v];
                push = push.min(self.adj[u][k].cap);
                v = u;
            }
            let mut v = tt;
            while v != ss {
                let (u, k) = prev[v];
                let rev = self.adj[u][k].rev;
                self.adj[u][k].cap -= push;
                self.adj[v][rev].cap += push;
                cost = cost + self.adj[u][k].cost.times(push as usize);
                v = u;
            }
            flow += push;
        }
    }

    /// Pairs whose arc carries flow.
    pub fn used_pairs(&self) -> Vec<(usize, usize)> {
        self.pair_arcs
            .iter()
            .enumerate()
            .filter(|(_, &(u, k))| self.adj[u][k].cap == 0)
            .map(|(idx, _)| (idx / self.t, idx % self.t))
            .collect()
    }
}

/// Why an instance has no feasible assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfeasibilityCut {
    /// Some vertex has demand above capacity.
    BoundsInconsistent { vertex: VertexRef },
    /// A saturated cut: `source_side` lists the original vertices on the
    /// super source's side; only `max_flow` of the `required` lower-bound
    /// mass can cross it.
    SaturatedCut {
        required: i64,
        max_flow: i64,
        source_side: Vec<VertexRef>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub certificate: Option<InfeasibilityCut>,
}

/// Exact feasibility by max flow on the lower-bound circulation.
pub fn feasibility_check<T: Scalar>(inst: &Instance<T>) -> Feasibility {
    if let Some(vertex) = inst.vertices().find(|&v| inst.demand(v) > inst.capacity(v)) {
        return Feasibility {
            feasible: false,
            certificate: Some(InfeasibilityCut::BoundsInconsistent { vertex }),
        };
    }
    let mut net = FlowNetwork::build(inst);
    let max_flow = net.max_flow();
    if max_flow == net.required() {
        return Feasibility {
            feasible: true,
            certificate: None,
        };
    }
    let reach = net.residual_reach();
    let source_side = (0..inst.s)
        .filter(|&i| reach[net.a(i)])
        .map(VertexRef::a)
        .chain((0..inst.t).filter(|&j| reach[net.b(j)]).map(VertexRef::b))
        .collect();
    Feasibility {
        feasible: false,
        certificate: Some(InfeasibilityCut::SaturatedCut {
            required: net.required(),
            max_flow,
            source_side,
        }),
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("invalid instance: {0}")]
    Invalid(ModelError),
    #[error("instance is infeasible")]
    Infeasible(InfeasibilityCut),
}

/// Optimal assignment from the min-cost lower-bound circulation.
pub fn solve_flow_reference<T: Scalar>(inst: &Instance<T>) -> Result<Assignment<T>, FlowError> {
    let report = validate_instance(inst);
    if report.has(Rule::Shape) || report.has(Rule::NegativeCost) {
        let detail = report
            .violations
            .into_iter()
            .map(|v| v.detail)
            .collect::<Vec<_>>();
        return Err(FlowError::Invalid(ModelError::Shape(detail.join("; "))));
    }
    if let Some(vertex) = inst.vertices().find(|&v| inst.demand(v) > inst.capacity(v)) {
        return Err(FlowError::Infeasible(
            InfeasibilityCut::BoundsInconsistent { vertex },
        ));
    }
    let mut net = FlowNetwork::build(inst);
    let (flow, _) = net.min_cost_flow();
    if flow != net.required() {
        let cut = match feasibility_check(inst).certificate {
            Some(c) => c,
            None => unreachable!("max flow disagrees with min-cost flow value"),
        };
        return Err(FlowError::Infeasible(cut));
    }
    let pairs = net.used_pairs();
    let total_cost = pairs
        .iter()
        .fold(T::zero(), |acc, &(i, j)| acc + inst.cost[i][j]);
    Ok(Assignment { pairs, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(cost: Vec<Vec<i64>>, a: [&[usize]; 2], b: [&[usize]; 2]) -> Instance<i64> {
        Instance::new(
            cost,
            a[0].to_vec(),
            a[1].to_vec(),
            b[0].to_vec(),
            b[1].to_vec(),
        )
    }

    #[test]
    fn permutation_is_feasible() {
        assert!(feasibility_check(&Instance::one_to_one(vec![vec![3i64; 4]; 4])).feasible);
    }

    #[test]
    fn sum_bound_gives_cut() {
        let i = inst(
            vec![vec![1, 1], vec![1, 1]],
            [&[2, 2], &[2, 2]],
            [&[0, 0], &[1, 1]],
        );
        let f = feasibility_check(&i);
        assert!(!f.feasible);
        match f.certificate {
            Some(InfeasibilityCut::SaturatedCut {
                required, max_flow, ..
            }) => {
                assert!(max_flow < required)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complete_saturation() {
        let i = inst(
            vec![vec![1, 2], vec![3, 4]],
            [&[2, 2], &[2, 2]],
            [&[0, 0], &[2, 2]],
        );
        assert!(feasibility_check(&i).feasible);
        let a = solve_flow_reference(&i).unwrap();
        assert_eq!(a.pairs.len(), 4);
        assert_eq!(a.total_cost, 10);
    }

    #[test]
    fn reference_examples() {
        let p =
            solve_flow_reference(&Instance::one_to_one(vec![vec![1i64, 2], vec![3, 1]])).unwrap();
        assert_eq!(p.total_cost, 2);
        let forced = inst(vec![vec![5, 7]], [&[2], &[2]], [&[1, 1], &[1, 1]]);
        assert_eq!(solve_flow_reference(&forced).unwrap().total_cost, 12);
    }

    #[test]
    fn inconsistent_bounds() {
        let i = inst(vec![vec![1]], [&[2], &[1]], [&[0], &[1]]);
        assert_eq!(
            feasibility_check(&i).certificate,
            Some(InfeasibilityCut::BoundsInconsistent {
                vertex: VertexRef::a(0)
            })
        );
    }
}
