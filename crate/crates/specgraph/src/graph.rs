//! Finite reflexive graphs and their structural classification.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

/// A set of vertex indices, one bit per vertex.
pub type VertexSet = FixedBitSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("a graph needs at least one vertex")]
    Empty,
    #[error("edge refers to unknown vertex {0:?}")]
    DanglingPair(String),
    #[error("vertex index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("graph is not a {0}")]
    WrongShape(&'static str),
}

/// A finite non-empty graph whose edge relation is symmetric and reflexive.
///
/// Loops are stored: `star(v)` always contains `v`.
#[derive(Clone)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<FixedBitSet>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.adj == other.adj
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<(&str, &str)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (self.label(a), self.label(b)))
            .collect();
        f.debug_struct("Graph")
            .field("vertices", &self.labels)
            .field("edges", &edges)
            .finish()
    }
}

/// Structural flags of a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GraphClass {
    pub discrete: bool,
    pub connected: bool,
    pub triangle_free: bool,
    pub acyclic: bool,
    pub path: bool,
    pub tree: bool,
    pub cycle: bool,
    /// Root of the fan, when the graph is one.
    pub fan: Option<usize>,
}

/// Builds a vertex set of size `n` from indices.
pub fn vset(n: usize, items: impl IntoIterator<Item = usize>) -> VertexSet {
    let mut s = FixedBitSet::with_capacity(n);
    for i in items {
        s.insert(i);
    }
    s
}

/// The full vertex set of size `n`.
pub fn full_set(n: usize) -> VertexSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

impl Graph {
    /// Builds a graph from labels and adjacent label pairs; the reflexive
    /// symmetric closure of the pairs is taken.
    pub fn new<L, A, B>(
        labels: impl IntoIterator<Item = L>,
        pairs: impl IntoIterator<Item = (A, B)>,
    ) -> Result<Self, GraphError>
    where
        L: Into<String>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut g = Self::bare(labels)?;
        for (a, b) in pairs {
            let ia = g.lookup(a.as_ref())?;
            let ib = g.lookup(b.as_ref())?;
            g.link(ia, ib);
        }
        Ok(g)
    }

    /// Builds a graph from labels and index pairs.
    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::bare(labels)?;
        let n = g.len();
        for &(a, b) in edges {
            if a >= n {
                return Err(GraphError::IndexOutOfRange(a));
            }
            if b >= n {
                return Err(GraphError::IndexOutOfRange(b));
            }
            g.link(a, b);
        }
        Ok(g)
    }

    /// Graph on vertices labelled `0..n` with the given index edges.
    pub fn with_indices(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    fn bare(labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        let n = labels.len();
        let adj = (0..n).map(|i| vset(n, [i])).collect();
        Ok(Graph { labels, index, adj })
    }

    fn lookup(&self, l: &str) -> Result<usize, GraphError> {
        self.index
            .get(l)
            .copied()
            .ok_or_else(|| GraphError::DanglingPair(l.to_string()))
    }

    fn link(&mut self, a: usize, b: usize) {
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::with_indices(n, &edges).expect("path needs n >= 1")
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::with_indices(n, &edges).expect("cycle")
    }

    pub fn discrete(n: usize) -> Self {
        Self::with_indices(n, &[]).expect("discrete graph needs n >= 1")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Self::with_indices(n, &edges).expect("complete graph needs n >= 1")
    }

    /// Fan with root `"0"` and spokes of the given lengths (non-root vertex
    /// counts). Spoke `i` holds `"i.1"`, ..., `"i.len"`, outward from the root.
    pub fn fan(spokes: &[usize]) -> Self {
        let mut labels = vec!["0".to_string()];
        let mut edges = Vec::new();
        for (i, &len) in spokes.iter().enumerate() {
            let mut prev = 0;
            for j in 1..=len {
                labels.push(format!("{i}.{j}"));
                let v = labels.len() - 1;
                edges.push((prev, v));
                prev = v;
            }
        }
        Self::from_edges(labels, &edges).expect("fan labels are distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: graphs are non-empty.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// `a ⊓ b`: adjacent or equal.
    pub fn meets(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    /// `a ~ b`: adjacent and distinct.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b && self.adj[a].contains(b)
    }

    /// Closed neighbourhood `v^⊓`.
    pub fn star(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].ones().filter(move |&u| u != v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..) - 1
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Non-loop edges as index pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.adj[a].ones() {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn empty_set(&self) -> VertexSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn all(&self) -> VertexSet {
        full_set(self.len())
    }

    pub fn set(&self, items: impl IntoIterator<Item = usize>) -> VertexSet {
        vset(self.len(), items)
    }

    /// Vertex set from labels; unknown labels are an error.
    pub fn set_of_labels<S: AsRef<str>>(
        &self,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<VertexSet, GraphError> {
        let mut s = self.empty_set();
        for l in labels {
            s.insert(self.lookup(l.as_ref())?);
        }
        Ok(s)
    }

    pub fn labels_of(&self, s: &VertexSet) -> Vec<String> {
        s.ones().map(|v| self.labels[v].clone()).collect()
    }

    /// Whether `s` is a clique (pairwise `⊓`).
    pub fn is_clique(&self, s: &VertexSet) -> bool {
        s.ones().all(|v| s.is_subset(&self.adj[v]))
    }

    /// Connectivity of the induced subgraph on `s`; the empty set counts as
    /// connected.
    pub fn is_connected_set(&self, s: &VertexSet) -> bool {
        let Some(start) = s.ones().next() else {
            return true;
        };
        let reached = self.reach(start, s);
        reached.count_ones(..) == s.count_ones(..)
    }

    fn reach(&self, start: usize, within: &VertexSet) -> VertexSet {
        let mut seen = self.empty_set();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in self.adj[v].ones() {
                if within.contains(u) && !seen.contains(u) {
                    seen.insert(u);
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Maximal connected subsets of `s`, each sorted, ordered by least element.
    pub fn components_of(&self, s: &VertexSet) -> Vec<Vec<usize>> {
        let mut left = s.clone();
        let mut out = Vec::new();
        while let Some(v) = left.ones().next() {
            let comp = self.reach(v, &left);
            left.difference_with(&comp);
            out.push(comp.ones().collect());
        }
        out
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_of(&self.all())
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_set(&self.all())
    }

    /// Vertices of degree at most one.
    pub fn ends(&self) -> VertexSet {
        self.set((0..self.len()).filter(|&v| self.degree(v) <= 1))
    }

    /// Induced subgraph on `s`, vertices in ascending index order.
    pub fn induced(&self, s: &VertexSet) -> Result<Graph, GraphError> {
        let keep: Vec<usize> = s.ones().collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        let mut edges = Vec::new();
        for (i, &v) in keep.iter().enumerate() {
            for u in self.adj[v].ones() {
                if let Some(&j) = pos.get(&u) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        Graph::from_edges(labels, &edges)
    }

    fn has_triangle(&self) -> bool {
        for (a, b) in self.edges() {
            let mut common = self.adj[a].clone();
            common.intersect_with(&self.adj[b]);
            if common.count_ones(..) > 2 {
                return true;
            }
        }
        false
    }

    pub fn classify(&self) -> GraphClass {
        let n = self.len();
        let connected = self.is_connected();
        let components = self.components().len();
        let acyclic = self.edge_count() + components == n;
        let tree = connected && acyclic;
        let max_deg = self.max_degree();
        let has_end = (0..n).any(|v| self.degree(v) <= 1);
        let path = connected && max_deg <= 2 && has_end;
        let cycle = connected && n >= 3 && (0..n).all(|v| self.degree(v) == 2);
        let branching: Vec<usize> = (0..n).filter(|&v| self.degree(v) >= 3).collect();
        let fan = if tree && branching.len() == 1 {
            Some(branching[0])
        } else {
            None
        };
        GraphClass {
            discrete: self.edge_count() == 0,
            connected,
            triangle_free: !self.has_triangle(),
            acyclic,
            path,
            tree,
            cycle,
            fan,
        }
    }

    pub fn is_path(&self) -> bool {
        self.classify().path
    }

    /// Vertices of a path listed end to end, starting from the end with the
    /// lexicographically least label.
    pub fn path_order(&self) -> Result<Vec<usize>, GraphError> {
        if !self.is_path() {
            return Err(GraphError::WrongShape("path"));
        }
        let start = self
            .ends()
            .ones()
            .min_by(|&a, &b| self.labels[a].cmp(&self.labels[b]))
            .expect("paths have ends");
        let mut order = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(next) = self.neighbors(cur).find(|&u| u != prev) {
            order.push(next);
            prev = cur;
            cur = next;
        }
        Ok(order)
    }

    /// `[q, r]`: the smallest connected subset of a path containing both.
    pub fn subpath(&self, q: usize, r: usize) -> Result<VertexSet, GraphError> {
        let order = self.path_order()?;
        let pos = |v: usize| order.iter().position(|&x| x == v);
        let (Some(i), Some(j)) = (pos(q), pos(r)) else {
            return Err(GraphError::IndexOutOfRange(q.max(r)));
        };
        let (lo, hi) = (i.min(j), i.max(j));
        Ok(self.set(order[lo..=hi].iter().copied()))
    }

    /// `(q, r) = [q, r] ∖ {q, r}`.
    pub fn open_subpath(&self, q: usize, r: usize) -> Result<VertexSet, GraphError> {
        let mut s = self.subpath(q, r)?;
        s.set(q, false);
        s.set(r, false);
        Ok(s)
    }

    /// Calls `f` on every non-empty connected vertex subset, each once.
    /// Stops early when `f` returns false; returns whether it ran to the end.
    pub fn for_each_connected_subset(&self, mut f: impl FnMut(&VertexSet) -> bool) -> bool {
        // Grow sets from their least vertex `v`, only adding vertices > v and
        // excluding vertices once they have been branched on.
        let n = self.len();
        for v in 0..n {
            let current = self.set([v]);
            let mut frontier = self.empty_set();
            for u in self.neighbors(v) {
                if u > v {
                    frontier.insert(u);
                }
            }
            let banned = self.set(0..=v);
            if !self.grow(&current, &frontier, &banned, &mut f) {
                return false;
            }
        }
        true
    }

    fn grow(
        &self,
        current: &VertexSet,
        frontier: &VertexSet,
        banned: &VertexSet,
        f: &mut impl FnMut(&VertexSet) -> bool,
    ) -> bool {
        if !f(current) {
            return false;
        }
        let mut banned = banned.clone();
        let mut frontier = frontier.clone();
        while let Some(u) = frontier.ones().next() {
            frontier.set(u, false);
            banned.insert(u);
            let mut next = current.clone();
            next.insert(u);
            let mut next_frontier = frontier.clone();
            for w in self.neighbors(u) {
                if !banned.contains(w) && !current.contains(w) {
                    next_frontier.insert(w);
                }
            }
            if !self.grow(&next, &next_frontier, &banned, f) {
                return false;
            }
        }
        true
    }

    /// All non-empty cliques in lexicographic order of their index lists.
    /// Returns `None` when there are more than `ceiling`.
    pub fn cliques(&self, ceiling: usize) -> Option<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for v in 0..self.len() {
            let mut cand = self.adj[v].clone();
            cand.set_range(..v + 1, false);
            stack.push(v);
            if !self.extend_cliques(&mut stack, &cand, ceiling, &mut out) {
                return None;
            }
            stack.pop();
        }
        Some(out)
    }

    fn extend_cliques(
        &self,
        stack: &mut Vec<usize>,
        cand: &VertexSet,
        ceiling: usize,
        out: &mut Vec<Vec<usize>>,
    ) -> bool {
        if out.len() >= ceiling {
            return false;
        }
        out.push(stack.clone());
        for u in cand.ones() {
            let mut next = cand.clone();
            next.intersect_with(&self.adj[u]);
            next.set_range(..u + 1, false);
            stack.push(u);
            let ok = self.extend_cliques(stack, &next, ceiling, out);
            stack.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

/// A family of finite sets indexed by vertices; set elements are vertex
/// pairs `(a, b)` with `a <= b`, `(a, a)` standing for `{a}`.
pub type Realisation = Vec<BTreeSet<(usize, usize)>>;

/// `s_g = {{g, h} : g ⊓ h}`.
pub fn overlap_realisation(g: &Graph) -> Realisation {
    (0..g.len())
        .map(|v| g.star(v).ones().map(|u| (v.min(u), v.max(u))).collect())
        .collect()
}

/// Overlap realisation law: `s_g ∩ s_h ≠ ∅ ⇔ g ⊓ h`.
pub fn is_overlap_realisation(g: &Graph, fam: &Realisation) -> bool {
    fam.len() == g.len()
        && (0..g.len()).all(|a| {
            (0..g.len()).all(|b| (!fam[a].is_disjoint(&fam[b])) == g.meets(a, b))
        })
}

/// Every member has an element found in no other member.
pub fn is_non_degenerate(fam: &Realisation) -> bool {
    fam.iter().enumerate().all(|(i, s)| {
        s.iter()
            .any(|x| fam.iter().enumerate().all(|(j, t)| j == i || !t.contains(x)))
    })
}

/// Whether `coarse` consolidates `fine`: every fine set lies in some coarse
/// set, and every coarse set is the union of the fine sets it contains.
pub fn consolidates(coarse: &Realisation, fine: &Realisation) -> bool {
    let refines = fine.iter().all(|b| coarse.iter().any(|a| b.is_subset(a)));
    let unions = coarse.iter().all(|a| {
        let mut u = BTreeSet::new();
        for b in fine.iter().filter(|b| b.is_subset(a)) {
            u.extend(b.iter().copied());
        }
        &u == a
    });
    refines && unions
}
