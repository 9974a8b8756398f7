//! Relational morphisms between graphs.
//!
//! A morphism from `G` to `H` is a relation `⊐ ⊆ H × G`, stored as one bit row
//! per codomain vertex (`h^⊐`) plus the transposed columns (`g^⊏`).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{overlap_realisation, Graph, Realisation, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    /// `h ⊐ g ⊓ g′ ⊏ h′` with `h` and `h′` apart; labels in that order.
    #[error("not edge-preserving: {0} ⊐ {1} ⊓ {2} ⊏ {3} but {0} and {3} are apart")]
    EdgePreservationViolation(String, String, String, String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("vertex index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("composition mismatch: outer domain differs from inner codomain")]
    DomainMismatch,
    #[error("precondition failed: {0}")]
    Precondition(&'static str),
    #[error("empty restriction")]
    EmptyRestriction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphProperty {
    Function,
    Surjective,
    Injective,
    CoSurjective,
    CoInjective,
    CoBijective,
    EdgeSurjective,
    EdgeWitnessing,
    AntiInjective,
    StrictlyAntiInjective,
    StarRefining,
    CoEdgeWitnessing,
    Monotone,
    EdgeReflective,
}

impl MorphProperty {
    pub const ALL: [MorphProperty; 14] = [
        MorphProperty::Function,
        MorphProperty::Surjective,
        MorphProperty::Injective,
        MorphProperty::CoSurjective,
        MorphProperty::CoInjective,
        MorphProperty::CoBijective,
        MorphProperty::EdgeSurjective,
        MorphProperty::EdgeWitnessing,
        MorphProperty::AntiInjective,
        MorphProperty::StrictlyAntiInjective,
        MorphProperty::StarRefining,
        MorphProperty::CoEdgeWitnessing,
        MorphProperty::Monotone,
        MorphProperty::EdgeReflective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MorphProperty::Function => "function",
            MorphProperty::Surjective => "surjective",
            MorphProperty::Injective => "injective",
            MorphProperty::CoSurjective => "co-surjective",
            MorphProperty::CoInjective => "co-injective",
            MorphProperty::CoBijective => "co-bijective",
            MorphProperty::EdgeSurjective => "edge-surjective",
            MorphProperty::EdgeWitnessing => "edge-witnessing",
            MorphProperty::AntiInjective => "anti-injective",
            MorphProperty::StrictlyAntiInjective => "strictly-anti-injective",
            MorphProperty::StarRefining => "star-refining",
            MorphProperty::CoEdgeWitnessing => "co-edge-witnessing",
            MorphProperty::Monotone => "monotone",
            MorphProperty::EdgeReflective => "edge-reflective",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MorphProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which derived vertex set `fibers` computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberKind {
    /// `C^⊐`, a domain set.
    Preimage,
    /// `T^⊏` of a domain set `T`, a codomain set.
    Image,
    /// `C_⊐ = {g : g^⊏ = C}`.
    Strict,
    /// `{g : g^⊏ ⊆ C}`.
    Sub,
    /// `C^•`: union of pairs `{f, g}` with `f ⊓ g` and `{f, g}^⊏ = C`.
    Edge,
}

/// An edge-preserving relation from `dom` to `cod`.
pub struct Morphism {
    dom: Arc<Graph>,
    cod: Arc<Graph>,
    rows: Vec<FixedBitSet>,
    cols: Vec<FixedBitSet>,
    cache: [OnceLock<bool>; 14],
}

impl Clone for Morphism {
    fn clone(&self) -> Self {
        Morphism {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            cache: self.cache.clone(),
        }
    }
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && same_graph(&self.dom, &other.dom) && same_graph(&self.cod, &other.cod)
    }
}

impl Eq for Morphism {}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Morphism")
            .field("dom", &self.dom.labels())
            .field("cod", &self.cod.labels())
            .field("pairs", &self.label_pairs())
            .finish()
    }
}

/// Graph equality with a pointer fast path.
pub fn same_graph(a: &Arc<Graph>, b: &Arc<Graph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Morphism {
    /// Builds a morphism from `(h, g)` index pairs meaning `h ⊐ g`.
    pub fn new(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MorphismError> {
        let mut rows = vec![FixedBitSet::with_capacity(dom.len()); cod.len()];
        for (h, g) in pairs {
            if h >= cod.len() {
                return Err(MorphismError::IndexOutOfRange(h));
            }
            if g >= dom.len() {
                return Err(MorphismError::IndexOutOfRange(g));
            }
            rows[h].insert(g);
        }
        Self::from_rows(dom, cod, rows)
    }

    /// Builds a morphism from `(h, g)` label pairs.
    pub fn from_labels<A: AsRef<str>, B: AsRef<str>>(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        pairs: impl IntoIterator<Item = (A, B)>,
    ) -> Result<Self, MorphismError> {
        let mut idx = Vec::new();
        for (h, g) in pairs {
            let hi = cod
                .index_of(h.as_ref())
                .ok_or_else(|| MorphismError::UnknownVertex(h.as_ref().to_string()))?;
            let gi = dom
                .index_of(g.as_ref())
                .ok_or_else(|| MorphismError::UnknownVertex(g.as_ref().to_string()))?;
            idx.push((hi, gi));
        }
        Self::new(dom, cod, idx)
    }

    /// Builds a morphism from rows `h^⊐`, checking edge preservation.
    pub fn from_rows(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        rows: Vec<FixedBitSet>,
    ) -> Result<Self, MorphismError> {
        let m = Self::from_rows_unchecked(dom, cod, rows);
        m.edge_preservation_violation().map_or(Ok(m), Err)
    }

    /// Builds a morphism from images `g^⊏`, checking edge preservation.
    pub fn from_images(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        images: &[VertexSet],
    ) -> Result<Self, MorphismError> {
        let mut rows = vec![FixedBitSet::with_capacity(dom.len()); cod.len()];
        for (g, img) in images.iter().enumerate() {
            for h in img.ones() {
                rows[h].insert(g);
            }
        }
        Self::from_rows(dom, cod, rows)
    }

    /// The function `g ↦ f[g]`.
    pub fn from_function(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        f: &[usize],
    ) -> Result<Self, MorphismError> {
        Self::new(dom, cod, f.iter().enumerate().map(|(g, &h)| (h, g)))
    }

    pub(crate) fn from_rows_unchecked(dom: Arc<Graph>, cod: Arc<Graph>, rows: Vec<FixedBitSet>) -> Self {
        let mut cols = vec![FixedBitSet::with_capacity(cod.len()); dom.len()];
        for (h, row) in rows.iter().enumerate() {
            for g in row.ones() {
                cols[g].insert(h);
            }
        }
        Morphism {
            dom,
            cod,
            rows,
            cols,
            cache: Default::default(),
        }
    }

    pub fn identity(g: Arc<Graph>) -> Self {
        let n = g.len();
        Self::new(g.clone(), g, (0..n).map(|v| (v, v))).expect("identity preserves edges")
    }

    /// The full relation onto a one-vertex graph.
    pub fn terminal(dom: Arc<Graph>) -> Self {
        let cod = Arc::new(Graph::discrete(1));
        let n = dom.len();
        Self::new(dom, cod, (0..n).map(|g| (0, g))).expect("terminal preserves edges")
    }

    fn edge_preservation_violation(&self) -> Option<MorphismError> {
        for g in 0..self.dom.len() {
            for g2 in self.dom.star(g).ones() {
                for h in self.cols[g].ones() {
                    for h2 in self.cols[g2].ones() {
                        if !self.cod.meets(h, h2) {
                            return Some(MorphismError::EdgePreservationViolation(
                                self.cod.label(h).into(),
                                self.dom.label(g).into(),
                                self.dom.label(g2).into(),
                                self.cod.label(h2).into(),
                            ));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn dom(&self) -> &Arc<Graph> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<Graph> {
        &self.cod
    }

    /// `h ⊐ g`.
    pub fn relates(&self, h: usize, g: usize) -> bool {
        self.rows[h].contains(g)
    }

    /// `h^⊐`.
    pub fn row(&self, h: usize) -> &VertexSet {
        &self.rows[h]
    }

    /// `g^⊏`.
    pub fn image_of(&self, g: usize) -> &VertexSet {
        &self.cols[g]
    }

    pub fn rows(&self) -> &[FixedBitSet] {
        &self.rows
    }

    /// All `(h, g)` with `h ⊐ g`, ordered by `h` then `g`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (h, row) in self.rows.iter().enumerate() {
            out.extend(row.ones().map(|g| (h, g)));
        }
        out
    }

    pub fn label_pairs(&self) -> Vec<(String, String)> {
        self.pairs()
            .into_iter()
            .map(|(h, g)| (self.cod.label(h).to_string(), self.dom.label(g).to_string()))
            .collect()
    }

    /// `S^⊐` for a codomain set `S`.
    pub fn preimage(&self, s: &VertexSet) -> VertexSet {
        let mut out = self.dom.empty_set();
        for h in s.ones() {
            out.union_with(&self.rows[h]);
        }
        out
    }

    /// `T^⊏` for a domain set `T`.
    pub fn image(&self, t: &VertexSet) -> VertexSet {
        let mut out = self.cod.empty_set();
        for g in t.ones() {
            out.union_with(&self.cols[g]);
        }
        out
    }

    /// `C_⊐`.
    pub fn strict_preimage(&self, c: &VertexSet) -> VertexSet {
        self.dom.set((0..self.dom.len()).filter(|&g| &self.cols[g] == c))
    }

    pub fn sub_preimage(&self, c: &VertexSet) -> VertexSet {
        self.dom.set((0..self.dom.len()).filter(|&g| self.cols[g].is_subset(c)))
    }

    /// `C^•`.
    pub fn edge_preimage(&self, c: &VertexSet) -> VertexSet {
        let mut out = self.dom.empty_set();
        for f in 0..self.dom.len() {
            if !self.cols[f].is_subset(c) {
                continue;
            }
            for g in self.dom.star(f).ones() {
                let mut u = self.cols[f].clone();
                u.union_with(&self.cols[g]);
                if &u == c {
                    out.insert(f);
                    out.insert(g);
                }
            }
        }
        out
    }

    pub fn fibers(&self, c: &VertexSet, kind: FiberKind) -> VertexSet {
        match kind {
            FiberKind::Preimage => self.preimage(c),
            FiberKind::Image => self.image(c),
            FiberKind::Strict => self.strict_preimage(c),
            FiberKind::Sub => self.sub_preimage(c),
            FiberKind::Edge => self.edge_preimage(c),
        }
    }

    /// `outer ∘ inner`: first `inner`, then `outer`.
    pub fn compose(outer: &Morphism, inner: &Morphism) -> Result<Morphism, MorphismError> {
        if !same_graph(&outer.dom, &inner.cod) {
            return Err(MorphismError::DomainMismatch);
        }
        let rows = outer.rows.iter().map(|r| inner.preimage(r)).collect();
        Ok(Self::from_rows_unchecked(inner.dom.clone(), outer.cod.clone(), rows))
    }

    /// `self ∘ inner`.
    pub fn then_after(&self, inner: &Morphism) -> Result<Morphism, MorphismError> {
        Self::compose(self, inner)
    }

    /// Containment of relations with equal endpoints.
    pub fn is_subrelation_of(&self, other: &Morphism) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    /// Restriction to induced subgraphs on `dom_sub` and `cod_sub`; the new
    /// vertices keep their labels and ascending index order.
    pub fn restrict(&self, dom_sub: &VertexSet, cod_sub: &VertexSet) -> Result<Morphism, MorphismError> {
        if dom_sub.is_clear() || cod_sub.is_clear() {
            return Err(MorphismError::EmptyRestriction);
        }
        let dom = Arc::new(self.dom.induced(dom_sub).map_err(|_| MorphismError::EmptyRestriction)?);
        let cod = Arc::new(self.cod.induced(cod_sub).map_err(|_| MorphismError::EmptyRestriction)?);
        let dkeep: Vec<usize> = dom_sub.ones().collect();
        let rows = cod_sub
            .ones()
            .map(|h| dom.set(dkeep.iter().enumerate().filter(|&(_, &g)| self.rows[h].contains(g)).map(|(i, _)| i)))
            .collect();
        Self::from_rows(dom, cod, rows)
    }

    /// Cached property check.
    pub fn check(&self, p: MorphProperty) -> bool {
        *self.cache[p.slot()].get_or_init(|| self.compute(p))
    }

    pub fn check_all(&self, ps: &[MorphProperty]) -> bool {
        ps.iter().all(|&p| self.check(p))
    }

    fn compute(&self, p: MorphProperty) -> bool {
        use MorphProperty::*;
        let (dom, cod) = (&*self.dom, &*self.cod);
        match p {
            Function => self.cols.iter().all(|c| c.count_ones(..) == 1),
            Surjective => self.rows.iter().all(|r| !r.is_clear()),
            CoSurjective => self.cols.iter().all(|c| !c.is_clear()),
            Injective => (0..dom.len()).all(|g| self.cols[g].ones().any(|h| self.rows[h].count_ones(..) == 1)),
            CoInjective => (0..cod.len()).all(|h| self.rows[h].ones().any(|g| self.cols[g].count_ones(..) == 1)),
            CoBijective => self.check(CoSurjective) && self.check(CoInjective),
            EdgeSurjective => (0..cod.len()).all(|h| {
                // h^⊓ ⊆ h^{⊐⊓⊏}
                let mut reach = dom.empty_set();
                for g in self.rows[h].ones() {
                    reach.union_with(dom.star(g));
                }
                cod.star(h).is_subset(&self.image(&reach))
            }),
            EdgeWitnessing => (0..cod.len()).all(|h| {
                cod.star(h).ones().all(|h2| {
                    let mut common = self.rows[h].clone();
                    common.intersect_with(&self.rows[h2]);
                    !common.is_clear()
                })
            }),
            AntiInjective => self.rows.iter().all(|r| r.count_ones(..) >= 2),
            StrictlyAntiInjective => (0..cod.len()).all(|h| {
                self.rows[h].ones().filter(|&g| self.cols[g].count_ones(..) == 1).count() >= 2
            }),
            // Any refining preimage must belong to a vertex in the image of g.
            StarRefining => {
                (0..dom.len()).all(|g| self.cols[g].ones().any(|h| dom.star(g).is_subset(&self.rows[h])))
            }
            CoEdgeWitnessing => (0..dom.len()).all(|f| {
                dom.star(f).ones().all(|g| !self.cols[f].is_disjoint(&self.cols[g]))
            }),
            Monotone => self.compute_monotone(),
            EdgeReflective => self.compute_edge_reflective(),
        }
    }

    fn compute_monotone(&self) -> bool {
        if self.check(MorphProperty::EdgeSurjective) {
            return self.rows.iter().all(|r| self.dom.is_connected_set(r));
        }
        self.cod
            .for_each_connected_subset(|c| self.dom.is_connected_set(&self.preimage(c)))
    }

    fn compute_edge_reflective(&self) -> bool {
        let (dom, cod) = (&*self.dom, &*self.cod);
        for (h, h2) in cod.edges().into_iter().flat_map(|(a, b)| [(a, b), (b, a)]) {
            let strict = self.strict_preimage(&cod.set([h]));
            let mut count = 0;
            for g in strict.ones() {
                for g2 in dom.neighbors(g) {
                    if self.rows[h2].contains(g2) {
                        count += 1;
                    }
                }
            }
            if count != 1 {
                return false;
            }
        }
        true
    }

    /// Edge-split construction: returns the split graph `H` and the
    /// morphism `H → G` with `g ↦ {g}` and `s_{g,g′} ↦ {g, g′}`.
    pub fn edge_split(g: &Arc<Graph>) -> Morphism {
        let n = g.len();
        let mut labels: Vec<String> = g.labels().to_vec();
        let mut taken: BTreeSet<String> = labels.iter().cloned().collect();
        let mut sid = Vec::new();
        for a in 0..n {
            for b in g.neighbors(a) {
                let l = fresh_label(format!("{}>{}", g.label(a), g.label(b)), &mut taken);
                labels.push(l);
                sid.push((a, b));
            }
        }
        let index: HashMap<(usize, usize), usize> = sid.iter().enumerate().map(|(i, &p)| (p, n + i)).collect();
        let pos = |a: usize, b: usize| index[&(a, b)];
        let mut edges = Vec::new();
        for &(a, b) in &sid {
            edges.push((a, pos(a, b)));
            if a < b {
                edges.push((pos(a, b), pos(b, a)));
            }
        }
        let h = Arc::new(Graph::from_edges(labels, &edges).expect("split labels are fresh"));
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|v| (v, v)).collect();
        for (i, &(a, b)) in sid.iter().enumerate() {
            pairs.push((a, n + i));
            pairs.push((b, n + i));
        }
        Morphism::new(h, g.clone(), pairs).expect("edge split preserves edges")
    }

    /// Consolidation realisation `(s, t)` with `t_h = ⋃_{g ⊏ h} s_g`.
    pub fn consolidation_realisation(&self) -> Result<(Realisation, Realisation), MorphismError> {
        use MorphProperty::*;
        if !self.check(CoSurjective) || !self.check(EdgeSurjective) {
            return Err(MorphismError::Precondition(
                "consolidation needs a co-surjective edge-surjective morphism",
            ));
        }
        let s = overlap_realisation(&self.dom);
        let t = self
            .rows
            .iter()
            .map(|r| r.ones().flat_map(|g| s[g].iter().copied()).collect())
            .collect();
        Ok((s, t))
    }
}

/// Appends primes to `base` until it is not in `taken`, then records it.
pub(crate) fn fresh_label(base: String, taken: &mut BTreeSet<String>) -> String {
    let mut l = base;
    while taken.contains(&l) {
        l.push('\'');
    }
    taken.insert(l.clone());
    l
}

/// Outcome of a bounded search that ran out of nodes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("search budget exhausted after {nodes} nodes with {found} hits")]
pub struct Exhausted {
    pub nodes: u64,
    pub found: usize,
}

/// Predicate on complete candidates of a morphism search.
pub type Acceptor = Arc<dyn Fn(&Morphism) -> bool + Send + Sync>;

/// Knobs for [`enumerate_morphisms`].
#[derive(Clone)]
pub struct SearchOptions {
    /// Stop after this many hits.
    pub limit: Option<usize>,
    /// Maximum number of search nodes.
    pub budget: u64,
    /// Domain vertices pinned to fixed images (e.g. a fan root).
    pub pinned: Vec<(usize, VertexSet)>,
    /// Domain vertices whose image must lie inside the given set.
    pub confined: Vec<(usize, VertexSet)>,
    /// Extra test applied to complete candidates.
    pub accept: Option<Acceptor>,
}

impl fmt::Debug for SearchOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchOptions")
            .field("limit", &self.limit)
            .field("budget", &self.budget)
            .field("pinned", &self.pinned.len())
            .field("confined", &self.confined.len())
            .field("accept", &self.accept.is_some())
            .finish()
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            limit: None,
            budget: 5_000_000,
            pinned: Vec::new(),
            confined: Vec::new(),
            accept: None,
        }
    }
}

/// Every morphism `dom → cod` with all `required` properties.
///
/// Each domain vertex receives an image clique (or the empty set when
/// co-surjectivity is not required). The search keeps the candidate lists
/// arc-consistent under edge preservation and branches on the vertex with
/// fewest candidates, ties going to the lower index.
pub fn enumerate_morphisms(
    dom: &Arc<Graph>,
    cod: &Arc<Graph>,
    required: &[MorphProperty],
    opts: &SearchOptions,
) -> Result<Vec<Morphism>, Exhausted> {
    use MorphProperty::*;
    let co_surj = required.iter().any(|p| matches!(p, CoSurjective | CoBijective));
    let function = required.contains(&Function);
    let mut cands: Vec<VertexSet> = Vec::new();
    if !co_surj && !function {
        cands.push(cod.empty_set());
    }
    let cliques = cod.cliques(usize::MAX).expect("no ceiling");
    for c in cliques {
        if function && c.len() != 1 {
            continue;
        }
        cands.push(cod.set(c));
    }
    let all: Vec<u32> = (0..cands.len() as u32).collect();
    let mut domains: Vec<Vec<u32>> = vec![all; dom.len()];
    for (g, img) in &opts.pinned {
        domains[*g].retain(|&c| &cands[c as usize] == img);
    }
    for (g, allowed) in &opts.confined {
        domains[*g].retain(|&c| cands[c as usize].is_subset(allowed));
    }
    // compat[a][b]: candidates a and b may sit on adjacent domain vertices.
    let k = cands.len();
    let mut compat = vec![FixedBitSet::with_capacity(k); k];
    for a in 0..k {
        for b in 0..k {
            let ok = cands[a].ones().all(|h| cands[b].is_subset(cod.star(h)));
            if ok {
                compat[a].insert(b);
            }
        }
    }
    let mut search = Search {
        dom,
        cod,
        cands: &cands,
        compat: &compat,
        required,
        opts,
        nodes: 0,
        out: Vec::new(),
    };
    let mut assigned = vec![None; dom.len()];
    if search.propagate(&mut domains, None) {
        search.run(&mut domains, &mut assigned)?;
    }
    Ok(search.out)
}

struct Search<'a> {
    dom: &'a Arc<Graph>,
    cod: &'a Arc<Graph>,
    cands: &'a [VertexSet],
    compat: &'a [FixedBitSet],
    required: &'a [MorphProperty],
    opts: &'a SearchOptions,
    nodes: u64,
    out: Vec<Morphism>,
}

impl Search<'_> {
    /// AC-3 over the domain's edges; returns false on a wipe-out.
    fn propagate(&self, domains: &mut [Vec<u32>], start: Option<usize>) -> bool {
        let n = self.dom.len();
        let mut queue: Vec<usize> = match start {
            Some(v) => vec![v],
            None => (0..n).collect(),
        };
        let mut queued = vec![false; n];
        for &v in &queue {
            queued[v] = true;
        }
        while let Some(v) = queue.pop() {
            queued[v] = false;
            for u in self.dom.neighbors(v) {
                let before = domains[u].len();
                let mut allowed = FixedBitSet::with_capacity(self.cands.len());
                for &cv in &domains[v] {
                    allowed.union_with(&self.compat[cv as usize]);
                }
                domains[u].retain(|&cu| allowed.contains(cu as usize));
                if domains[u].is_empty() {
                    return false;
                }
                if domains[u].len() != before && !queued[u] {
                    queued[u] = true;
                    queue.push(u);
                }
            }
        }
        true
    }

    fn cover_possible(&self, domains: &[Vec<u32>]) -> bool {
        use MorphProperty::*;
        let need_co_inj = self.required.iter().any(|p| matches!(p, CoInjective | CoBijective));
        let need_surj = self.required.iter().any(|p| {
            matches!(p, Surjective | CoInjective | CoBijective | EdgeSurjective | EdgeWitnessing | AntiInjective | StrictlyAntiInjective)
        });
        if !need_co_inj && !need_surj {
            return true;
        }
        let mut single = self.cod.empty_set();
        let mut any = self.cod.empty_set();
        for d in domains {
            for &c in d {
                let s = &self.cands[c as usize];
                any.union_with(s);
                if s.count_ones(..) == 1 {
                    single.union_with(s);
                }
            }
        }
        let full = self.cod.all();
        (!need_co_inj || single == full) && (!need_surj || any == full)
    }

    fn run(&mut self, domains: &mut [Vec<u32>], assigned: &mut [Option<u32>]) -> Result<bool, Exhausted> {
        self.nodes += 1;
        if self.nodes > self.opts.budget {
            return Err(Exhausted {
                nodes: self.nodes,
                found: self.out.len(),
            });
        }
        if !self.cover_possible(domains) {
            return Ok(true);
        }
        let next = (0..domains.len())
            .filter(|&v| assigned[v].is_none())
            .min_by_key(|&v| (domains[v].len(), v));
        let Some(v) = next else {
            let images: Vec<VertexSet> = assigned.iter().map(|c| self.cands[c.unwrap() as usize].clone()).collect();
            let m = Morphism::from_images(self.dom.clone(), self.cod.clone(), &images)
                .expect("arc consistency guarantees edge preservation");
            let ok = m.check_all(self.required) && self.opts.accept.as_ref().is_none_or(|f| f(&m));
            if ok {
                self.out.push(m);
                if self.opts.limit.is_some_and(|l| self.out.len() >= l) {
                    return Ok(false);
                }
            }
            return Ok(true);
        };
        let options = domains[v].clone();
        for c in options {
            let mut trial = domains.to_vec();
            trial[v] = vec![c];
            assigned[v] = Some(c);
            if self.propagate(&mut trial, Some(v)) && !self.run(&mut trial, assigned)? {
                assigned[v] = None;
                return Ok(false);
            }
            assigned[v] = None;
        }
        Ok(true)
    }
}
