//! Max-weight perfect matching on a square bipartite graph.
//!
//! This is the classical primal-dual Hungarian method with a slack array:
//! vertex labels `l` stay feasible (`l(a) + l(b) >= W(a, b)` on every edge),
//! an alternating tree `S`/`T` is grown over tight edges, and when the tree
//! stalls every label in the tree is shifted by the smallest slack. The
//! solver can be driven one step at a time so tests can inspect the dual
//! state in the middle of a phase.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HungarianError {
    #[error("weight matrix is empty")]
    Empty,
    #[error("weight matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("alternating tree already covers every B-vertex")]
    TreeCoversB,
    #[error("certificate mismatch: matching weight {weight} != label sum {labels}")]
    Certificate { weight: String, labels: String },
}

/// Labels, slack array, alternating tree and current matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualState<T> {
    pub label_a: Vec<T>,
    pub label_b: Vec<T>,
    /// `slack[j] = min_{z in S} l(z) + l(b_j) - W(z, b_j)`, kept for `j` not in `T`.
    pub slack: Vec<T>,
    /// The `z in S` attaining `slack[j]`; the tree parent of `b_j` once it joins `T`.
    pub slack_from: Vec<usize>,
    pub in_s: Vec<bool>,
    pub in_t: Vec<bool>,
    pub match_of_a: Vec<Option<usize>>,
    pub match_of_b: Vec<Option<usize>>,
    pub root: Option<usize>,
}

fn check_square<T>(weights: &[Vec<T>]) -> Result<usize, HungarianError> {
    let n = weights.len();
    if n == 0 {
        return Err(HungarianError::Empty);
    }
    for (row, r) in weights.iter().enumerate() {
        if r.len() != n {
            return Err(HungarianError::NotSquare {
                row,
                len: r.len(),
                n,
            });
        }
    }
    Ok(n)
}

/// Row maxima on `A`, zeros on `B`, empty tree, empty matching.
pub fn init_labels<T: Scalar>(weights: &[Vec<T>]) -> Result<DualState<T>, HungarianError> {
    let n = check_square(weights)?;
    let label_a = weights
        .iter()
        .map(|row| row.iter().copied().max().expect("non-empty row"))
        .collect();
    Ok(DualState {
        label_a,
        label_b: vec![T::zero(); n],
        slack: vec![T::zero(); n],
        slack_from: vec![0; n],
        in_s: vec![false; n],
        in_t: vec![false; n],
        match_of_a: vec![None; n],
        match_of_b: vec![None; n],
        root: None,
    })
}

/// Smallest slack over `B`-vertices outside `T`.
pub fn compute_alpha_l<T: Scalar>(state: &DualState<T>) -> Result<T, HungarianError> {
    state
        .slack
        .iter()
        .zip(&state.in_t)
        .filter(|(_, &in_t)| !in_t)
        .map(|(&s, _)| s)
        .min()
        .ok_or(HungarianError::TreeCoversB)
}

/// Lowers labels in `S` and raises labels in `T` by `alpha`, and charges the
/// slack of every `B`-vertex outside `T`.
pub fn apply_dual_update<T: Scalar>(state: &mut DualState<T>, alpha: T) {
    for (l, _) in state.label_a.iter_mut().zip(&state.in_s).filter(|p| *p.1) {
        *l = *l - alpha;
    }
    for ((l, s), &in_t) in state
        .label_b
        .iter_mut()
        .zip(state.slack.iter_mut())
        .zip(&state.in_t)
    {
        if in_t {
            *l = *l + alpha;
        } else {
            *s = *s - alpha;
        }
    }
}

impl<T: Scalar> DualState<T> {
    pub fn n(&self) -> usize {
        self.label_a.len()
    }

    pub fn edge_slack(&self, weights: &[Vec<T>], i: usize, j: usize) -> T {
        self.label_a[i] + self.label_b[j] - weights[i][j]
    }

    /// `l(a) + l(b) >= W(a, b)` on all n² edges.
    pub fn is_feasible(&self, weights: &[Vec<T>]) -> bool {
        (0..self.n()).all(|i| (0..self.n()).all(|j| !self.edge_slack(weights, i, j).is_negative()))
    }

    pub fn is_tight(&self, weights: &[Vec<T>], i: usize, j: usize) -> bool {
        self.edge_slack(weights, i, j).is_zero()
    }

    /// Edges of the current alternating tree: for each `b in T`, the edge to
    /// its tree parent and the matched edge to the vertex it brought into `S`.
    pub fn tree_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for j in (0..self.n()).filter(|&j| self.in_t[j]) {
            edges.push((self.slack_from[j], j));
            if let Some(z) = self.match_of_b[j] {
                edges.push((z, j));
            }
        }
        edges
    }

    /// Lowest-index `b in N_l(S) - T`.
    pub fn next_tight(&self) -> Option<usize> {
        (0..self.n()).find(|&j| !self.in_t[j] && self.slack[j].is_zero())
    }

    pub fn label_sum(&self) -> T {
        self.label_a
            .iter()
            .chain(&self.label_b)
            .fold(T::zero(), |acc, &l| acc + l)
    }

    pub fn matched_pairs(&self) -> usize {
        self.match_of_a.iter().flatten().count()
    }

    fn begin_phase(&mut self, weights: &[Vec<T>], root: usize) {
        self.in_s.iter_mut().for_each(|x| *x = false);
        self.in_t.iter_mut().for_each(|x| *x = false);
        self.in_s[root] = true;
        self.root = Some(root);
        for j in 0..self.n() {
            self.slack[j] = self.edge_slack(weights, root, j);
            self.slack_from[j] = root;
        }
    }

    fn absorb(&mut self, weights: &[Vec<T>], j: usize, z: usize) {
        self.in_t[j] = true;
        self.in_s[z] = true;
        for k in 0..self.n() {
            let s = self.edge_slack(weights, z, k);
            if s < self.slack[k] {
                self.slack[k] = s;
                self.slack_from[k] = z;
            }
        }
    }

    fn augment(&mut self, free_b: usize) {
        let root = self.root.take().expect("augment outside a phase");
        let mut b = free_b;
        loop {
            let a = self.slack_from[b];
            let next = self.match_of_a[a];
            self.match_of_a[a] = Some(b);
            self.match_of_b[b] = Some(a);
            if a == root {
                break;
            }
            b = next.expect("non-root tree vertex is matched");
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step<T> {
    /// `N_l(S) = T`; labels were shifted by this amount.
    DualUpdate(T),
    /// Tight edge to matched `b`; its partner `z` joined `S`.
    Grow {
        b: usize,
        z: usize,
    },
    /// Tight edge to free `b`; the path from the root was flipped.
    Augment {
        root: usize,
        b: usize,
    },
    Done,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectMatching<T> {
    pub match_of_a: Vec<usize>,
    pub match_of_b: Vec<usize>,
    pub weight: T,
}

/// Step-wise driver for the Hungarian method.
pub struct HungarianSolver<'w, T> {
    weights: &'w [Vec<T>],
    state: DualState<T>,
    phases: usize,
    dual_updates: usize,
}

impl<'w, T: Scalar> HungarianSolver<'w, T> {
    pub fn new(weights: &'w [Vec<T>]) -> Result<Self, HungarianError> {
        Ok(Self {
            state: init_labels(weights)?,
            weights,
            phases: 0,
            dual_updates: 0,
        })
    }

    pub fn state(&self) -> &DualState<T> {
        &self.state
    }

    pub fn weights(&self) -> &'w [Vec<T>] {
        self.weights
    }

    /// Completed phases; each adds exactly one matched pair.
    pub fn phases(&self) -> usize {
        self.phases
    }

    pub fn dual_updates(&self) -> usize {
        self.dual_updates
    }

    /// Starts a phase at the lowest free `A`-vertex if none is active.
    /// Returns false when the matching is already perfect.
    pub fn ensure_phase(&mut self) -> bool {
        if self.state.root.is_some() {
            return true;
        }
        match self.state.match_of_a.iter().position(Option::is_none) {
            Some(root) => {
                self.state.begin_phase(self.weights, root);
                true
            }
            None => false,
        }
    }

    pub fn step(&mut self) -> Result<Step<T>, HungarianError> {
        if !self.ensure_phase() {
            return Ok(Step::Done);
        }
        match self.state.next_tight() {
            None => {
                let alpha = compute_alpha_l(&self.state)?;
                apply_dual_update(&mut self.state, alpha);
                self.dual_updates += 1;
                Ok(Step::DualUpdate(alpha))
            }
            Some(b) => match self.state.match_of_b[b] {
                Some(z) => {
                    self.state.absorb(self.weights, b, z);
                    Ok(Step::Grow { b, z })
                }
                None => {
                    let root = self.state.root.expect("phase active");
                    self.state.augment(b);
                    self.phases += 1;
                    Ok(Step::Augment { root, b })
                }
            },
        }
    }

    /// Runs to completion and checks the optimality certificate
    /// `weight == Σ l(v)`.
    pub fn run(mut self) -> Result<(PerfectMatching<T>, DualState<T>), HungarianError> {
        while self.step()? != Step::Done {}
        let state = self.state;
        let match_of_a: Vec<usize> = state.match_of_a.iter().map(|m| m.unwrap()).collect();
        let match_of_b: Vec<usize> = state.match_of_b.iter().map(|m| m.unwrap()).collect();
        let weight = match_of_a
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &j)| acc + self.weights[i][j]);
        let labels = state.label_sum();
        if weight != labels {
            return Err(HungarianError::Certificate {
                weight: weight.to_string(),
                labels: labels.to_string(),
            });
        }
        Ok((
            PerfectMatching {
                match_of_a,
                match_of_b,
                weight,
            },
            state,
        ))
    }
}

/// Max-weight perfect matching together with the final feasible labeling.
pub fn solve_max_weight_perfect<T: Scalar>(
    weights: &[Vec<T>],
) -> Result<(PerfectMatching<T>, DualState<T>), HungarianError> {
    HungarianSolver::new(weights)?.run()
}
