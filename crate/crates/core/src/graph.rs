//! Decomposable (chordal) graphs, junction trees, and single-edge proposals.
//!
//! A graph is decomposable exactly when it is chordal, and every chordal graph
//! admits a junction tree: an ordering of its maximal cliques `C_1..C_k` with
//! separators `S_j = C_j ∩ (C_1 ∪ … ∪ C_{j-1})` such that each separator is
//! contained in an earlier clique (running intersection). All clique/separator
//! factorized computations in this crate consume that ordering.
//!
//! Chordality is tested with maximum cardinality search followed by the
//! perfect-elimination verification of Tarjan and Yannakakis, O(q + |E|)
//! adjacency probes per test. Maximal cliques are read off the elimination
//! ordering; the clique ordering comes from a maximum-weight spanning forest
//! of the clique intersection graph, which guarantees running intersection.
//! Tie-breaking is by lowest node index everywhere so a fixed labeling always
//! produces the same tree.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};

/// Sorted, ascending vertex set of a clique or separator.
pub type NodeSet = Vec<usize>;

/// Undirected graph over `q` nodes that is chordal by construction.
///
/// Edges are unordered off-diagonal pairs stored as `(i, j)` with `i < j`,
/// 0-based. The diagonal is implicitly present. Values are immutable after
/// construction; proposals return fresh graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposableGraph {
    q: usize,
    adj: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl DecomposableGraph {
    /// Graph with no edges (always decomposable).
    pub fn empty(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid_argument("graph needs at least one node"));
        }
        Ok(DecomposableGraph {
            q,
            adj: vec![false; q * q],
            edges: Vec::new(),
        })
    }

    /// Complete graph on `q` nodes.
    pub fn complete(q: usize) -> Result<Self> {
        let mut g = Self::empty(q)?;
        for i in 0..q {
            for j in (i + 1)..q {
                g.insert_edge_unchecked(i, j);
            }
        }
        Ok(g)
    }

    /// Builds a graph from an edge list, rejecting non-decomposable inputs.
    pub fn from_edges(q: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(q)?;
        for &(a, b) in edges {
            let (i, j) = normalize_pair(q, a, b)?;
            if !g.adj[i * q + j] {
                g.insert_edge_unchecked(i, j);
            }
        }
        if !is_chordal_flat(q, &g.adj) {
            return Err(Error::invalid_state(
                "edge list does not describe a decomposable graph",
            ));
        }
        Ok(g)
    }

    /// Builds a graph from a dense symmetric 0/1 adjacency, rejecting
    /// non-symmetric and non-decomposable inputs.
    pub fn from_adjacency(rows: &[Vec<bool>]) -> Result<Self> {
        let (q, adj) = flatten_adjacency(rows)?;
        if !is_chordal_flat(q, &adj) {
            return Err(Error::invalid_state(
                "adjacency does not describe a decomposable graph",
            ));
        }
        let mut edges = Vec::new();
        for i in 0..q {
            for j in (i + 1)..q {
                if adj[i * q + j] {
                    edges.push((i, j));
                }
            }
        }
        Ok(DecomposableGraph { q, adj, edges })
    }

    pub fn node_count(&self) -> usize {
        self.q
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && i < self.q && j < self.q && self.adj[i * self.q + j]
    }

    /// Dense symmetric adjacency view, diagonal set to true.
    pub fn adjacency_rows(&self) -> Vec<Vec<bool>> {
        (0..self.q)
            .map(|i| {
                (0..self.q)
                    .map(|j| i == j || self.adj[i * self.q + j])
                    .collect()
            })
            .collect()
    }

    /// Junction tree of this graph. Infallible: the decomposability invariant
    /// is established at construction.
    pub fn junction_tree(&self) -> JunctionTree {
        let cliques = maximal_cliques(self.q, &self.adj);
        order_cliques(self.q, cliques)
    }

    /// Returns the graph with edge `(i, j)` toggled when the result is still
    /// decomposable, `None` otherwise.
    pub fn toggled(&self, i: usize, j: usize) -> Result<Option<Self>> {
        let (i, j) = normalize_pair(self.q, i, j)?;
        let mut adj = self.adj.clone();
        let present = adj[i * self.q + j];
        adj[i * self.q + j] = !present;
        adj[j * self.q + i] = !present;
        if !is_chordal_flat(self.q, &adj) {
            return Ok(None);
        }
        let mut edges = self.edges.clone();
        if present {
            let pos = edges.binary_search(&(i, j)).expect("edge present");
            edges.remove(pos);
        } else {
            let pos = edges.binary_search(&(i, j)).expect_err("edge absent");
            edges.insert(pos, (i, j));
        }
        Ok(Some(DecomposableGraph {
            q: self.q,
            adj,
            edges,
        }))
    }

    fn insert_edge_unchecked(&mut self, i: usize, j: usize) {
        self.adj[i * self.q + j] = true;
        self.adj[j * self.q + i] = true;
        match self.edges.binary_search(&(i, j)) {
            Ok(_) => {}
            Err(pos) => self.edges.insert(pos, (i, j)),
        }
    }
}

fn normalize_pair(q: usize, a: usize, b: usize) -> Result<(usize, usize)> {
    if a == b {
        return Err(Error::invalid_argument(format!(
            "self loop ({a}, {b}) is not a valid edge"
        )));
    }
    if a >= q || b >= q {
        return Err(Error::invalid_argument(format!(
            "edge ({a}, {b}) out of range for {q} nodes"
        )));
    }
    Ok((a.min(b), a.max(b)))
}

fn flatten_adjacency(rows: &[Vec<bool>]) -> Result<(usize, Vec<bool>)> {
    let q = rows.len();
    if q == 0 {
        return Err(Error::invalid_argument("adjacency must be non-empty"));
    }
    let mut adj = vec![false; q * q];
    for (i, row) in rows.iter().enumerate() {
        if row.len() != q {
            return Err(Error::invalid_argument(format!(
                "adjacency row {i} has {} entries, expected {q}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if i != j {
                adj[i * q + j] = v;
            }
        }
    }
    for i in 0..q {
        for j in (i + 1)..q {
            if adj[i * q + j] != adj[j * q + i] {
                return Err(Error::invalid_argument(format!(
                    "adjacency is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok((q, adj))
}

/// Chordality (equivalently decomposability) of a symmetric boolean
/// adjacency. The diagonal is ignored.
pub fn is_decomposable(rows: &[Vec<bool>]) -> Result<bool> {
    let (q, adj) = flatten_adjacency(rows)?;
    Ok(is_chordal_flat(q, &adj))
}

/// Maximum cardinality search visit order, ties broken by lowest node index.
fn mcs_order(q: usize, adj: &[bool]) -> Vec<usize> {
    let mut weight = vec![0usize; q];
    let mut visited = vec![false; q];
    let mut order = Vec::with_capacity(q);
    for _ in 0..q {
        let mut best = usize::MAX;
        let mut best_weight = 0usize;
        for v in 0..q {
            if !visited[v] && (best == usize::MAX || weight[v] > best_weight) {
                best = v;
                best_weight = weight[v];
            }
        }
        visited[best] = true;
        order.push(best);
        for u in 0..q {
            if !visited[u] && adj[best * q + u] {
                weight[u] += 1;
            }
        }
    }
    order
}

/// Tarjan–Yannakakis verification: the reverse of the MCS visit order is a
/// perfect elimination ordering iff for every vertex v the earlier-visited
/// neighbors of v, minus the latest-visited one, are all adjacent to it.
fn is_chordal_flat(q: usize, adj: &[bool]) -> bool {
    let order = mcs_order(q, adj);
    let mut pos = vec![0usize; q];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    for (i, &v) in order.iter().enumerate() {
        let mut parent = usize::MAX;
        for u in 0..q {
            if adj[v * q + u] && pos[u] < i && (parent == usize::MAX || pos[u] > pos[parent]) {
                parent = u;
            }
        }
        if parent == usize::MAX {
            continue;
        }
        for u in 0..q {
            if u != parent && adj[v * q + u] && pos[u] < i && !adj[parent * q + u] {
                return false;
            }
        }
    }
    true
}

/// Maximal cliques of a chordal graph, read off the MCS ordering: every
/// candidate {v} ∪ {earlier neighbors of v} is complete, and the maximal
/// candidates are exactly the cliques. Candidates are kept in visit order of
/// their defining vertex, which makes the output deterministic.
fn maximal_cliques(q: usize, adj: &[bool]) -> Vec<NodeSet> {
    let order = mcs_order(q, adj);
    let mut pos = vec![0usize; q];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut candidates: Vec<NodeSet> = Vec::with_capacity(q);
    for (i, &v) in order.iter().enumerate() {
        let mut set: NodeSet = (0..q).filter(|&u| adj[v * q + u] && pos[u] < i).collect();
        set.push(v);
        set.sort_unstable();
        candidates.push(set);
    }
    let mut keep = vec![true; candidates.len()];
    for a in 0..candidates.len() {
        for b in 0..candidates.len() {
            if a != b && keep[a] && is_subset(&candidates[a], &candidates[b]) {
                // Distinct candidates are never equal: each contains its
                // defining vertex as its latest-visited element.
                keep[a] = false;
                break;
            }
        }
    }
    candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect()
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut it = b.iter();
    'outer: for &x in a {
        for &y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

fn intersect(a: &[usize], b: &[usize]) -> NodeSet {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Arranges maximal cliques into a running-intersection ordering.
///
/// A spanning tree of the clique intersection graph is a junction tree iff
/// its total separator weight is maximal, so Kruskal over |C_i ∩ C_j| with
/// deterministic tie-breaking, followed by a breadth-first walk per
/// component, yields the ordering. Components after the first start with an
/// empty separator.
fn order_cliques(q: usize, cliques: Vec<NodeSet>) -> JunctionTree {
    let k = cliques.len();
    if k == 0 {
        return JunctionTree {
            q,
            cliques,
            separators: Vec::new(),
        };
    }
    let mut weighted: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            let w = intersect(&cliques[a], &cliques[b]).len();
            if w > 0 {
                weighted.push((w, a, b));
            }
        }
    }
    weighted.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut dsu = Dsu::new(k);
    let mut tree_adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (_, a, b) in weighted {
        if dsu.union(a, b) {
            tree_adj[a].push(b);
            tree_adj[b].push(a);
        }
    }

    let mut placed = vec![false; k];
    let mut ordered: Vec<NodeSet> = Vec::with_capacity(k);
    let mut separators: Vec<NodeSet> = Vec::with_capacity(k.saturating_sub(1));
    for root in 0..k {
        if placed[root] {
            continue;
        }
        placed[root] = true;
        if !ordered.is_empty() {
            separators.push(Vec::new());
        }
        ordered.push(cliques[root].clone());
        let mut frontier = vec![root];
        while let Some(c) = frontier.pop() {
            let mut nbrs = tree_adj[c].clone();
            nbrs.sort_unstable();
            for nb in nbrs {
                if !placed[nb] {
                    placed[nb] = true;
                    separators.push(intersect(&cliques[c], &cliques[nb]));
                    ordered.push(cliques[nb].clone());
                    frontier.push(nb);
                }
            }
        }
    }
    JunctionTree {
        q,
        cliques: ordered,
        separators,
    }
}

/// Ordered clique decomposition `C_1..C_k` with separators `S_2..S_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionTree {
    q: usize,
    cliques: Vec<NodeSet>,
    separators: Vec<NodeSet>,
}

impl JunctionTree {
    pub fn node_count(&self) -> usize {
        self.q
    }

    pub fn cliques(&self) -> &[NodeSet] {
        &self.cliques
    }

    /// Separators aligned with `cliques()[1..]`; empty sets mark the start of
    /// a new connected component and contribute nothing to factorized sums.
    pub fn separators(&self) -> &[NodeSet] {
        &self.separators
    }
}

/// Spec'd fallible form: junction tree of an arbitrary symmetric adjacency,
/// rejecting non-decomposable input.
pub fn junction_tree(rows: &[Vec<bool>]) -> Result<JunctionTree> {
    let (q, adj) = flatten_adjacency(rows)?;
    if !is_chordal_flat(q, &adj) {
        return Err(Error::invalid_state(
            "junction tree requested for a non-decomposable graph",
        ));
    }
    Ok(order_cliques(q, maximal_cliques(q, &adj)))
}

/// What a single edge toggle proposal did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToggleOutcome {
    Add,
    Delete,
    Stay,
    RejectedNondecomposable,
}

/// Result of one add/delete proposal on the graph.
#[derive(Debug, Clone)]
pub struct EdgeProposal {
    pub graph: DecomposableGraph,
    pub log_hastings: f64,
    pub outcome: ToggleOutcome,
    /// The off-diagonal pair that was selected, if any.
    pub pair: Option<(usize, usize)>,
}

/// Selects one off-diagonal pair uniformly; an absent edge is proposed for
/// addition with probability `eta`, a present edge for deletion with
/// probability `1 - eta`, otherwise the chain stays. Toggles that break
/// decomposability are discarded and the graph is left unchanged.
///
/// The Hastings correction is log{(1-η)/η} for an addition and log{η/(1-η)}
/// for a deletion; stays carry no correction.
pub fn propose_edge_toggle<R: Rng + ?Sized>(
    graph: &DecomposableGraph,
    eta: f64,
    rng: &mut R,
) -> Result<EdgeProposal> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid_argument(format!(
            "eta must lie in (0, 1), got {eta}"
        )));
    }
    let q = graph.node_count();
    let n_pairs = q * (q - 1) / 2;
    if n_pairs == 0 {
        return Ok(EdgeProposal {
            graph: graph.clone(),
            log_hastings: 0.0,
            outcome: ToggleOutcome::Stay,
            pair: None,
        });
    }
    let mut t = rng.random_range(0..n_pairs);
    let mut i = 0;
    loop {
        let row = q - 1 - i;
        if t < row {
            break;
        }
        t -= row;
        i += 1;
    }
    let j = i + 1 + t;

    let present = graph.has_edge(i, j);
    let move_prob = if present { 1.0 - eta } else { eta };
    if rng.random::<f64>() >= move_prob {
        return Ok(EdgeProposal {
            graph: graph.clone(),
            log_hastings: 0.0,
            outcome: ToggleOutcome::Stay,
            pair: Some((i, j)),
        });
    }
    match graph.toggled(i, j)? {
        Some(new_graph) => {
            let (outcome, log_hastings) = if present {
                (ToggleOutcome::Delete, (eta / (1.0 - eta)).ln())
            } else {
                (ToggleOutcome::Add, ((1.0 - eta) / eta).ln())
            };
            Ok(EdgeProposal {
                graph: new_graph,
                log_hastings,
                outcome,
                pair: Some((i, j)),
            })
        }
        None => Ok(EdgeProposal {
            graph: graph.clone(),
            log_hastings: 0.0,
            outcome: ToggleOutcome::RejectedNondecomposable,
            pair: Some((i, j)),
        }),
    }
}

/// Log prior mass of the graph under independent Bernoulli(α_G) edges:
/// |E| log α_G + (q(q-1)/2 - |E|) log(1 - α_G).
pub fn log_prior_graph(graph: &DecomposableGraph, alpha_g: f64) -> Result<f64> {
    if !(alpha_g > 0.0 && alpha_g < 1.0) {
        return Err(Error::invalid_argument(format!(
            "alpha_g must lie in (0, 1), got {alpha_g}"
        )));
    }
    let q = graph.node_count() as f64;
    let m = q * (q - 1.0) / 2.0;
    let e = graph.edge_count() as f64;
    Ok(e * alpha_g.ln() + (m - e) * (1.0 - alpha_g).ln())
}

/// Clique/separator multisets present in only one of two junction trees.
#[derive(Debug, Clone, Default)]
pub struct TreeDelta {
    pub removed_cliques: Vec<NodeSet>,
    pub added_cliques: Vec<NodeSet>,
    pub removed_separators: Vec<NodeSet>,
    pub added_separators: Vec<NodeSet>,
}

fn multiset_diff(old: &[NodeSet], new: &[NodeSet]) -> (Vec<NodeSet>, Vec<NodeSet>) {
    let mut counts: BTreeMap<&NodeSet, i64> = BTreeMap::new();
    for s in old {
        *counts.entry(s).or_insert(0) -= 1;
    }
    for s in new {
        *counts.entry(s).or_insert(0) += 1;
    }
    let mut removed = Vec::new();
    let mut added = Vec::new();
    for (set, c) in counts {
        for _ in 0..(-c).max(0) {
            removed.push(set.clone());
        }
        for _ in 0..c.max(0) {
            added.push(set.clone());
        }
    }
    (removed, added)
}

/// Multiset symmetric difference of two junction trees.
pub fn diff_trees(old: &JunctionTree, new: &JunctionTree) -> TreeDelta {
    let (removed_cliques, added_cliques) = multiset_diff(old.cliques(), new.cliques());
    let (removed_separators, added_separators) =
        multiset_diff(old.separators(), new.separators());
    TreeDelta {
        removed_cliques,
        added_cliques,
        removed_separators,
        added_separators,
    }
}

/// Cliques and separators that change when `old` is replaced by `new`, which
/// must differ in exactly one edge. Empty separators are dropped from the
/// delta since they contribute nothing to factorized sums.
pub fn affected_components(
    old: &DecomposableGraph,
    new: &DecomposableGraph,
) -> Result<TreeDelta> {
    if old.node_count() != new.node_count() {
        return Err(Error::invalid_argument(
            "graphs must share the same node count",
        ));
    }
    let mut diff = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    let (ea, eb) = (old.edges(), new.edges());
    while i < ea.len() || j < eb.len() {
        if i < ea.len() && j < eb.len() && ea[i] == eb[j] {
            i += 1;
            j += 1;
        } else if j >= eb.len() || (i < ea.len() && ea[i] < eb[j]) {
            diff += 1;
            i += 1;
        } else {
            diff += 1;
            j += 1;
        }
    }
    if diff != 1 {
        return Err(Error::invalid_argument(format!(
            "graphs must differ in exactly one edge, found {diff} differences"
        )));
    }
    let mut delta = diff_trees(&old.junction_tree(), &new.junction_tree());
    delta.removed_separators.retain(|s| !s.is_empty());
    delta.added_separators.retain(|s| !s.is_empty());
    Ok(delta)
}
