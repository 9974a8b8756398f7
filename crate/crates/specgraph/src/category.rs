//! Categories of graphs: descriptors, path types, amalgamation, Fraïssé
//! prefixes and their finite-horizon certification.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clique::{clique_graph_with_ceiling, clique_map_between, membership_of, CliqueError};
use crate::fan::{
    branch_analysis, branches, classify_fan_limit, collapse_onto_claw, fan_structure, tree_of_spokes, FanError,
    FanProperty, FanStructure,
};
use crate::graph::{Graph, VertexSet};
use crate::relation::{enumerate_morphisms, same_graph, MorphProperty, Morphism, MorphismError, SearchOptions};
use crate::sequence::{Guarantee, Property, Provenance, Sequence, SequenceError, Shape, Verdict, Witness};

/// Clique graphs built during fan amalgamation stay far below this.
const CLIQUE_CEILING: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CategoryError {
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("category {0} has no amalgamation procedure")]
    NoAmalgamator(CategoryName),
    #[error("{0} is not available for category {1}")]
    Unsupported(&'static str, CategoryName),
    #[error("not in category {0}: {1}")]
    NotInCategory(CategoryName, String),
    #[error("the two morphisms have different codomains")]
    NotACospan,
    #[error("expected a morphism between paths")]
    NotPaths,
    #[error("invalid type: {0}")]
    InvalidType(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("sequences come from different categories: {0} and {1}")]
    Mismatch(CategoryName, CategoryName),
    #[error("ladder stuck at rung {rung}: {reason}")]
    Stuck { rung: usize, reason: String },
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Clique(#[from] CliqueError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CategoryName {
    D,
    A,
    P,
    X,
    L,
    C,
}

impl CategoryName {
    pub const ALL: [CategoryName; 6] = [
        CategoryName::D,
        CategoryName::A,
        CategoryName::P,
        CategoryName::X,
        CategoryName::L,
        CategoryName::C,
    ];

    pub fn describe(self) -> &'static str {
        match self {
            CategoryName::D => "discrete graphs, surjective functions",
            CategoryName::A => "paths, monotone co-bijective morphisms",
            CategoryName::P => "paths, co-bijective morphisms",
            CategoryName::X => "fans, co-bijective spoke-monotone end-preserving morphisms",
            CategoryName::L => "fans, co-bijective spoke-monotone morphisms",
            CategoryName::C => "cycles, monotone co-bijective morphisms",
        }
    }
}

impl fmt::Display for CategoryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for CategoryName {
    type Err = CategoryError;
    fn from_str(s: &str) -> Result<Self, CategoryError> {
        CategoryName::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CategoryError::UnknownCategory(s.to_string()))
    }
}

/// How a category builds amalgams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Amalgamator {
    /// Fibre products of surjections.
    FibreProduct,
    /// Pointwise maximum of path types.
    Types,
    /// Spoke-by-spoke gluing, through clique graphs for proper relations.
    Spokes,
}

/// Objects, morphisms and constructions of one category.
#[derive(Clone, Debug)]
pub struct CategorySpec {
    pub name: CategoryName,
    pub shape: Shape,
    /// Every morphism has all of these.
    pub properties: Vec<Property>,
    pub amalgamator: Option<Amalgamator>,
    pub weakly_terminal: Option<Arc<Graph>>,
}

impl CategorySpec {
    pub fn get(name: CategoryName) -> Self {
        use FanProperty::*;
        use MorphProperty::*;
        let (shape, properties, amalgamator, terminal): (Shape, Vec<Property>, _, Graph) = match name {
            CategoryName::D => (
                Shape::Discrete,
                vec![Function.into(), Surjective.into()],
                Some(Amalgamator::FibreProduct),
                Graph::discrete(1),
            ),
            CategoryName::A => (
                Shape::Path,
                vec![CoBijective.into(), Monotone.into()],
                Some(Amalgamator::Types),
                Graph::path(1),
            ),
            CategoryName::P => (Shape::Path, vec![CoBijective.into()], None, Graph::path(1)),
            CategoryName::X => (
                Shape::Fan,
                vec![CoBijective.into(), SpokeMonotone.into(), EndPreserving.into()],
                Some(Amalgamator::Spokes),
                Graph::fan(&[1, 1, 1]),
            ),
            CategoryName::L => (
                Shape::Fan,
                vec![CoBijective.into(), SpokeMonotone.into()],
                Some(Amalgamator::Spokes),
                Graph::fan(&[1, 1, 1]),
            ),
            CategoryName::C => (
                Shape::Cycle,
                vec![CoBijective.into(), Monotone.into()],
                None,
                Graph::cycle(3),
            ),
        };
        CategorySpec {
            name,
            shape,
            properties,
            amalgamator,
            weakly_terminal: Some(Arc::new(terminal)),
        }
    }

    pub fn parse(s: &str) -> Result<Self, CategoryError> {
        Ok(Self::get(s.parse()?))
    }

    pub fn object_violation(&self, g: &Graph) -> Option<String> {
        let c = g.classify();
        let ok = match self.shape {
            Shape::Discrete => c.discrete,
            Shape::Path => c.path,
            Shape::Cycle => c.cycle,
            Shape::Fan => c.fan.is_some(),
            Shape::Connected => c.connected,
        };
        (!ok).then(|| format!("a graph on {} vertices is not of shape {:?}", g.len(), self.shape))
    }

    pub fn contains_object(&self, g: &Graph) -> bool {
        self.object_violation(g).is_none()
    }

    pub fn morphism_violation(&self, m: &Morphism) -> Option<String> {
        if let Some(v) = self.object_violation(m.dom()) {
            return Some(format!("domain: {v}"));
        }
        if let Some(v) = self.object_violation(m.cod()) {
            return Some(format!("codomain: {v}"));
        }
        self.properties.iter().find_map(|p| p.violation(m))
    }

    pub fn contains_morphism(&self, m: &Morphism) -> bool {
        self.morphism_violation(m).is_none()
    }

    /// The relation-level part of the morphism predicate, for searches.
    pub fn search_properties(&self) -> Vec<MorphProperty> {
        self.properties
            .iter()
            .filter_map(|p| match p {
                Property::Morph(m) => Some(*m),
                Property::Fan(_) => None,
            })
            .collect()
    }

    /// One representative object per isomorphism class with at most `bound`
    /// vertices.
    pub fn small_objects(&self, bound: usize) -> Vec<Arc<Graph>> {
        let graphs: Vec<Graph> = match self.shape {
            Shape::Discrete => (1..=bound).map(Graph::discrete).collect(),
            Shape::Path => (1..=bound).map(Graph::path).collect(),
            Shape::Cycle => (3..=bound).map(Graph::cycle).collect(),
            Shape::Fan => (3..bound)
                .flat_map(|total| spoke_partitions(total, total, 3))
                .map(|lens| Graph::fan(&lens))
                .collect(),
            Shape::Connected => Vec::new(),
        };
        graphs.into_iter().map(Arc::new).collect()
    }
}

/// Nonincreasing sequences of at least `min_parts` positive parts summing to
/// `total`, each part at most `max_part`.
fn spoke_partitions(total: usize, max_part: usize, min_parts: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return if min_parts == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (1..=max_part.min(total)).rev() {
        for mut rest in spoke_partitions(total - first, first, min_parts.saturating_sub(1)) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

// Cliques of a path listed along `order` are keyed `2i` for `{q_i}` and
// `2i + 1` for `{q_i, q_{i+1}}`. Morphisms in A are exactly those whose
// image keys never decrease along one orientation of the domain.

fn positions(order: &[usize], n: usize) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

fn key_of(pos: &[usize], img: &VertexSet) -> Option<usize> {
    let mut it = img.ones().map(|v| pos[v]);
    let a = it.next()?;
    if a == usize::MAX {
        return None;
    }
    match (it.next(), it.next()) {
        (None, _) => Some(2 * a),
        (Some(b), None) if b != usize::MAX && a.abs_diff(b) == 1 => Some(2 * a.min(b) + 1),
        _ => None,
    }
}

/// Image keys of `dom_order` relative to the path `cod_order`.
fn keys_along(m: &Morphism, dom_order: &[usize], cod_order: &[usize]) -> Option<Vec<usize>> {
    let pos = positions(cod_order, m.cod().len());
    dom_order.iter().map(|&v| key_of(&pos, m.image_of(v))).collect()
}

fn nondecreasing(keys: &[usize]) -> bool {
    keys.windows(2).all(|w| w[0] <= w[1])
}

fn counts(keys: &[usize], r: usize) -> Vec<usize> {
    let mut c = vec![0; 2 * r - 1];
    for &k in keys {
        c[k] += 1;
    }
    c
}

fn expand(counts: &[usize]) -> Vec<usize> {
    counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c)).collect()
}

fn key_set(cod: &Graph, order: &[usize], key: usize) -> VertexSet {
    if key.is_multiple_of(2) {
        cod.set([order[key / 2]])
    } else {
        cod.set([order[key / 2], order[key / 2 + 1]])
    }
}

fn blocks(keys: &[usize], r: usize) -> Vec<Vec<usize>> {
    let mut b = vec![Vec::new(); 2 * r - 1];
    for (i, &k) in keys.iter().enumerate() {
        b[k].push(i);
    }
    b
}

/// Positions of `big` that position `i` of `small` relates to, so that the
/// composite has exactly the keys of `small`. Needs both key lists
/// nondecreasing, every singleton key present in `big`, and no key more
/// frequent in `big` than in `small`.
fn factor_keys(big: &[usize], small: &[usize], r: usize) -> Option<Vec<Vec<usize>>> {
    let (bp, bq) = (blocks(big, r), blocks(small, r));
    let mut out = vec![Vec::new(); small.len()];
    for c in 0..2 * r - 1 {
        if bp[c].len() > bq[c].len() || (c % 2 == 0 && bp[c].is_empty()) {
            return None;
        }
        for (i, &q) in bq[c].iter().enumerate() {
            out[q] = if bp[c].is_empty() {
                vec![*bp[c - 1].last()?, *bp[c + 1].first()?]
            } else {
                vec![bp[c][i.min(bp[c].len() - 1)]]
            };
        }
    }
    Some(out)
}

/// A morphism between paths read along fixed end-to-end orders, oriented so
/// that its keys never decrease.
struct Oriented {
    dom_order: Vec<usize>,
    cod_order: Vec<usize>,
    keys: Vec<usize>,
}

fn orient(m: &Morphism) -> Result<Oriented, CategoryError> {
    let cod_order = m.cod().path_order().map_err(|_| CategoryError::NotPaths)?;
    let mut dom_order = m.dom().path_order().map_err(|_| CategoryError::NotPaths)?;
    let mut keys = keys_along(m, &dom_order, &cod_order)
        .ok_or_else(|| CategoryError::NotInCategory(CategoryName::A, "an image is not a clique".into()))?;
    if keys.first() > keys.last() {
        dom_order.reverse();
        keys.reverse();
    }
    if !nondecreasing(&keys) {
        return Err(CategoryError::NotInCategory(CategoryName::A, "images double back".into()));
    }
    Ok(Oriented {
        dom_order,
        cod_order,
        keys,
    })
}

fn images_from_positions(order: &[usize], n: usize, dom_order: &[usize], pos: &[Vec<usize>]) -> Vec<VertexSet> {
    let mut images = vec![VertexSet::with_capacity(n); dom_order.len()];
    for (i, &v) in dom_order.iter().enumerate() {
        for &p in &pos[i] {
            images[v].insert(order[p]);
        }
    }
    images
}

/// A type on a path `Q`: a count for every singleton and every edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeFunction {
    /// Vertices of `Q` from end to end.
    pub order: Vec<usize>,
    /// `values[2i]` counts `{q_i}`; `values[2i + 1]` counts `{q_i, q_{i+1}}`.
    pub values: Vec<usize>,
}

impl TypeFunction {
    /// Values listed along the path order of `q`.
    pub fn new(q: &Graph, values: Vec<usize>) -> Result<Self, CategoryError> {
        let order = q.path_order().map_err(|_| CategoryError::NotPaths)?;
        if values.len() != 2 * order.len() - 1 {
            return Err(CategoryError::InvalidType(format!(
                "{} values for a path on {} vertices",
                values.len(),
                order.len()
            )));
        }
        Ok(TypeFunction { order, values })
    }

    pub fn from_fn(
        q: &Graph,
        single: impl Fn(usize) -> usize,
        edge: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, CategoryError> {
        let order = q.path_order().map_err(|_| CategoryError::NotPaths)?;
        let mut values = Vec::with_capacity(2 * order.len());
        for (i, &v) in order.iter().enumerate() {
            values.push(single(v));
            if let Some(&w) = order.get(i + 1) {
                values.push(edge(v, w));
            }
        }
        Ok(TypeFunction { order, values })
    }

    /// Value on a clique given by vertex indices.
    pub fn get(&self, clique: &[usize]) -> Option<usize> {
        let pos = |v: usize| self.order.iter().position(|&x| x == v);
        match *clique {
            [a] => Some(self.values[2 * pos(a)?]),
            [a, b] => {
                let (i, j) = (pos(a)?, pos(b)?);
                (i.abs_diff(j) == 1).then(|| self.values[2 * i.min(j) + 1])
            }
            _ => None,
        }
    }

    /// Every singleton counts at least once.
    pub fn is_type(&self) -> bool {
        self.values.iter().step_by(2).all(|&v| v >= 1)
    }

    /// Values read along `order`, which must be this path's order or its
    /// reverse.
    fn aligned(&self, order: &[usize]) -> Option<Vec<usize>> {
        if order == self.order.as_slice() {
            Some(self.values.clone())
        } else if order.iter().eq(self.order.iter().rev()) {
            Some(self.values.iter().rev().copied().collect())
        } else {
            None
        }
    }

    /// Pointwise `self <= other`.
    pub fn dominated_by(&self, other: &TypeFunction) -> bool {
        other
            .aligned(&self.order)
            .is_some_and(|o| self.values.iter().zip(&o).all(|(a, b)| a <= b))
    }

    pub fn max(&self, other: &TypeFunction) -> Result<TypeFunction, CategoryError> {
        let o = other
            .aligned(&self.order)
            .ok_or_else(|| CategoryError::InvalidType("types live on different paths".into()))?;
        Ok(TypeFunction {
            order: self.order.clone(),
            values: self.values.iter().zip(&o).map(|(a, b)| *a.max(b)).collect(),
        })
    }
}

/// Sizes of the strict preimages of the cliques of the codomain path.
pub fn type_of(m: &Morphism) -> Result<TypeFunction, CategoryError> {
    let cod = m.cod();
    if !m.dom().is_path() {
        return Err(CategoryError::NotPaths);
    }
    TypeFunction::from_fn(
        cod,
        |v| m.strict_preimage(&cod.set([v])).count_ones(..),
        |v, w| m.strict_preimage(&cod.set([v, w])).count_ones(..),
    )
}

fn realize_along(q: &Arc<Graph>, order: &[usize], values: &[usize]) -> (Arc<Graph>, Morphism) {
    let keys = expand(values);
    let p = Arc::new(Graph::path(keys.len()));
    let images: Vec<VertexSet> = keys.iter().map(|&k| key_set(q, order, k)).collect();
    let m = Morphism::from_images(p.clone(), q.clone(), &images).expect("consecutive keys meet");
    (p, m)
}

/// A path and a morphism in A onto `q` with type `t`: one block per clique,
/// laid out along the order of `t`.
pub fn realize_type(q: &Arc<Graph>, t: &TypeFunction) -> Result<(Arc<Graph>, Morphism), CategoryError> {
    if !t.is_type() {
        return Err(CategoryError::InvalidType("some singleton has count 0".into()));
    }
    let order = q.path_order().map_err(|_| CategoryError::NotPaths)?;
    let values = t
        .aligned(&order)
        .ok_or_else(|| CategoryError::InvalidType("type belongs to another path".into()))?;
    Ok(realize_along(q, &order, &values))
}

/// `φ` in A with `big ∘ φ = small`, when the type of `big` is dominated by
/// the type of `small`. A function whenever `big` is a function or `small`
/// has no vertex over an edge that `big` leaves empty.
pub fn factor_by_type(big: &Morphism, small: &Morphism) -> Result<Option<Morphism>, CategoryError> {
    if !same_graph(big.cod(), small.cod()) {
        return Err(CategoryError::NotACospan);
    }
    let ob = orient(big)?;
    let os = orient(small)?;
    let r = ob.cod_order.len();
    let Some(pos) = factor_keys(&ob.keys, &os.keys, r) else {
        return Ok(None);
    };
    let images = images_from_positions(&ob.dom_order, big.dom().len(), &os.dom_order, &pos);
    Ok(Some(Morphism::from_images(small.dom().clone(), big.dom().clone(), &images)?))
}

/// A surjective monotone function `φ` with `big ∘ φ ⊆ small`. Needs `|P|`
/// at most `|Q|` and at most the strict preimage under `small` of every
/// edge.
pub fn subfactor(big: &Morphism, small: &Morphism) -> Result<Morphism, CategoryError> {
    if !same_graph(big.cod(), small.cod()) {
        return Err(CategoryError::NotACospan);
    }
    let ob = orient(big)?;
    let os = orient(small)?;
    let (p, q) = (ob.dom_order.len(), os.dom_order.len());
    let r = ob.cod_order.len();
    if p > q {
        return Err(CategoryError::Hypothesis(format!("|P| = {p} exceeds |Q| = {q}")));
    }
    let bq = blocks(&os.keys, r);
    if let Some(c) = (0..r.saturating_sub(1)).find(|&i| bq[2 * i + 1].len() < p) {
        return Err(CategoryError::Hypothesis(format!(
            "edge {} has {} strict preimages, fewer than |P| = {p}",
            c,
            bq[2 * c + 1].len()
        )));
    }
    let mut f = vec![0usize; q];
    if r == 1 {
        for (i, slot) in f.iter_mut().enumerate() {
            *slot = i * p / q;
        }
    } else {
        let bp = blocks(&ob.keys, r);
        let mut anchor: Vec<usize> = (0..r).map(|i| *bp[2 * i].first().expect("co-injective")).collect();
        anchor[r - 1] = p - 1;
        for i in 0..r {
            for &x in &bq[2 * i] {
                f[x] = anchor[i];
            }
            if i + 1 < r {
                let (lo, hi) = (anchor[i] + 1, anchor[i + 1]);
                let block = &bq[2 * i + 1];
                for (j, &x) in block.iter().enumerate() {
                    f[x] = if lo >= hi { anchor[i] } else { lo + j * (hi - lo) / block.len() };
                }
            }
        }
    }
    let mut func = vec![0usize; small.dom().len()];
    for (i, &v) in os.dom_order.iter().enumerate() {
        func[v] = ob.dom_order[f[i]];
    }
    let phi = Morphism::from_function(small.dom().clone(), big.dom().clone(), &func)?;
    let composite = Morphism::compose(big, &phi)?;
    if !composite.is_subrelation_of(small) {
        return Err(CategoryError::Verification("subfactor composite escapes the target".into()));
    }
    let a = CategorySpec::get(CategoryName::A);
    if let Some(v) = a.morphism_violation(&phi).or_else(|| Property::from(MorphProperty::Function).violation(&phi)) {
        return Err(CategoryError::Verification(format!("subfactor: {v}")));
    }
    Ok(phi)
}

/// An amalgam of a cospan `f: H → G`, `g: I → G`: an apex `J` with legs
/// `left: J → H` and `right: J → I` such that `f ∘ left = g ∘ right`.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub apex: Arc<Graph>,
    pub left: Morphism,
    pub right: Morphism,
}

/// Completes the cospan to a commuting square inside the category. The
/// square and both legs are checked before returning.
pub fn amalgamate(cat: &CategorySpec, f: &Morphism, g: &Morphism) -> Result<Amalgam, CategoryError> {
    if !same_graph(f.cod(), g.cod()) {
        return Err(CategoryError::NotACospan);
    }
    for m in [f, g] {
        if let Some(v) = cat.morphism_violation(m) {
            return Err(CategoryError::NotInCategory(cat.name, v));
        }
    }
    let am = match cat.amalgamator {
        None => return Err(CategoryError::NoAmalgamator(cat.name)),
        Some(Amalgamator::FibreProduct) => fibre_product(f, g)?,
        Some(Amalgamator::Types) => amalgamate_paths(f, g)?,
        Some(Amalgamator::Spokes) => amalgamate_fans(cat, f, g)?,
    };
    verify_square(cat, f, g, &am)?;
    Ok(am)
}

fn verify_square(cat: &CategorySpec, f: &Morphism, g: &Morphism, am: &Amalgam) -> Result<(), CategoryError> {
    if Morphism::compose(f, &am.left)? != Morphism::compose(g, &am.right)? {
        return Err(CategoryError::Verification("square does not commute".into()));
    }
    for (side, leg) in [("left", &am.left), ("right", &am.right)] {
        if let Some(v) = cat.morphism_violation(leg) {
            return Err(CategoryError::Verification(format!("{side} leg: {v}")));
        }
    }
    Ok(())
}

fn function_of(m: &Morphism) -> Vec<usize> {
    (0..m.dom().len())
        .map(|v| m.image_of(v).ones().next().expect("functions are total"))
        .collect()
}

fn fibre_product(f: &Morphism, g: &Morphism) -> Result<Amalgam, CategoryError> {
    let (ff, gf) = (function_of(f), function_of(g));
    let mut pairs = Vec::new();
    for (h, &x) in ff.iter().enumerate() {
        for (i, &y) in gf.iter().enumerate() {
            if x == y {
                pairs.push((h, i));
            }
        }
    }
    let labels: Vec<String> = pairs
        .iter()
        .map(|&(h, i)| format!("({},{})", f.dom().label(h), g.dom().label(i)))
        .collect();
    let apex = Arc::new(match Graph::from_edges(labels, &[]) {
        Ok(j) => j,
        Err(_) => Graph::discrete(pairs.len()),
    });
    let left: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let right: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    Ok(Amalgam {
        left: Morphism::from_function(apex.clone(), f.dom().clone(), &left)?,
        right: Morphism::from_function(apex.clone(), g.dom().clone(), &right)?,
        apex,
    })
}

fn amalgamate_paths(f: &Morphism, g: &Morphism) -> Result<Amalgam, CategoryError> {
    let (of, og) = (orient(f)?, orient(g)?);
    let r = of.cod_order.len();
    let (cf, cg) = (counts(&of.keys, r), counts(&og.keys, r));
    let keys = expand(&cf.iter().zip(&cg).map(|(a, b)| *a.max(b)).collect::<Vec<_>>());
    let apex = Arc::new(Graph::path(keys.len()));
    let order: Vec<usize> = (0..keys.len()).collect();
    let leg = |o: &Oriented, target: &Arc<Graph>| -> Result<Morphism, CategoryError> {
        let pos = factor_keys(&o.keys, &keys, r).ok_or_else(|| CategoryError::Verification("type factor".into()))?;
        let images = images_from_positions(&o.dom_order, target.len(), &order, &pos);
        Ok(Morphism::from_images(apex.clone(), target.clone(), &images)?)
    };
    Ok(Amalgam {
        left: leg(&of, f.dom())?,
        right: leg(&og, g.dom())?,
        apex: apex.clone(),
    })
}

/// Root-first vertices of the spoke prefix that `set` covers.
fn prefix_order(fan: &FanStructure, set: &VertexSet) -> Option<Vec<usize>> {
    let spoke = set.ones().find(|&v| v != fan.root).and_then(|v| fan.spoke_of(v));
    let Some(j) = spoke else {
        return (set.count_ones(..) == 1 && set.contains(fan.root)).then(|| vec![fan.root]);
    };
    let order: Vec<usize> = fan.spokes[j].iter().copied().take_while(|&v| set.contains(v)).collect();
    (order.len() == set.count_ones(..)).then_some(order)
}

/// A piece of a fan being assembled: the domain spoke it maps into, root
/// first, and for every position of the new spoke the positions it relates
/// to. Position 0 is the shared root.
struct Piece {
    onto: Vec<usize>,
    pos: Vec<Vec<usize>>,
}

/// Glues pieces at their roots into a fan with a morphism into `target`.
fn glue(pieces: &[Piece], target: &Arc<Graph>) -> Result<Morphism, CategoryError> {
    let lens: Vec<usize> = pieces.iter().map(|p| p.pos.len() - 1).collect();
    let apex = Arc::new(Graph::fan(&lens));
    let mut images = Vec::with_capacity(apex.len());
    images.push(target.set([pieces[0].onto[0]]));
    for p in pieces {
        for pos in &p.pos[1..] {
            images.push(target.set(pos.iter().map(|&i| p.onto[i])));
        }
    }
    Ok(Morphism::from_images(apex, target.clone(), &images)?)
}

fn amalgamate_fans(cat: &CategorySpec, f: &Morphism, g: &Morphism) -> Result<Amalgam, CategoryError> {
    use MorphProperty::Function;
    if cat.name == CategoryName::X || (f.check(Function) && g.check(Function)) {
        return spoke_amalgam(f, g);
    }
    // Relations often glue directly as well; the clique graphs are the
    // general route but double every spoke.
    if let Ok(am) = spoke_amalgam(f, g) {
        if verify_square(cat, f, g, &am).is_ok() {
            return Ok(am);
        }
    }
    let xg = clique_graph_with_ceiling(f.cod(), CLIQUE_CEILING)?;
    let xh = clique_graph_with_ceiling(f.dom(), CLIQUE_CEILING)?;
    let xi = clique_graph_with_ceiling(g.dom(), CLIQUE_CEILING)?;
    let inner = spoke_amalgam(&clique_map_between(f, &xh, &xg)?, &clique_map_between(g, &xi, &xg)?)?;
    Ok(Amalgam {
        left: Morphism::compose(&membership_of(f.dom(), &xh), &inner.left)?,
        right: Morphism::compose(&membership_of(g.dom(), &xi), &inner.right)?,
        apex: inner.apex,
    })
}

/// Pairs spokes of `H` and `I` with nested images and amalgamates each
/// pair over the smaller image by types. Needs every spoke image inside the other image to be
/// covered by an initial segment of the other spoke, which holds for
/// functions and for end-preserving morphisms.
fn spoke_amalgam(f: &Morphism, g: &Morphism) -> Result<Amalgam, CategoryError> {
    let (fg, fh, fi) = (fan_structure(f.cod())?, fan_structure(f.dom())?, fan_structure(g.dom())?);
    let img = |m: &Morphism, fs: &FanStructure| -> Vec<VertexSet> {
        (0..fs.spokes.len()).map(|s| m.image(&fs.spoke_set(m.dom(), s))).collect()
    };
    let (img_f, img_g) = (img(f, &fh), img(g, &fi));
    let not_prefix = || CategoryError::NotInCategory(CategoryName::L, "a spoke image is not a spoke prefix".into());
    let initial = |m: &Morphism, spoke: &[usize], within: &VertexSet| -> Vec<usize> {
        spoke.iter().copied().take_while(|&v| m.image_of(v).is_subset(within)).collect()
    };
    // Each spoke is paired once, with the lowest-indexed spoke on the other
    // side whose image contains its own.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (si, a) in img_f.iter().enumerate() {
        let ti = img_g.iter().position(|b| a.is_subset(b)).ok_or_else(not_prefix)?;
        pairs.push((si, ti));
    }
    for (ti, b) in img_g.iter().enumerate() {
        let si = img_f.iter().position(|a| b.is_subset(a)).ok_or_else(not_prefix)?;
        pairs.push((si, ti));
    }
    pairs.sort_unstable();
    pairs.dedup();
    let mut left_pieces = Vec::new();
    let mut right_pieces = Vec::new();
    for (si, ti) in pairs {
        let (s, t) = (&fh.spokes[si], &fi.spokes[ti]);
        {
            let (a, b) = (&img_f[si], &img_g[ti]);
            let (r, hp, ip) = if a.is_subset(b) {
                (prefix_order(&fg, a).ok_or_else(not_prefix)?, s.clone(), initial(g, t, a))
            } else if b.is_subset(a) {
                (prefix_order(&fg, b).ok_or_else(not_prefix)?, initial(f, s, b), t.clone())
            } else {
                unreachable!("paired spokes have nested images")
            };
            let kh = keys_along(f, &hp, &r).ok_or_else(not_prefix)?;
            let ki = keys_along(g, &ip, &r).ok_or_else(not_prefix)?;
            if !nondecreasing(&kh) || !nondecreasing(&ki) {
                return Err(CategoryError::NotInCategory(CategoryName::L, "spoke images double back".into()));
            }
            let n = r.len();
            let (ch, ci) = (counts(&kh, n), counts(&ki, n));
            let keys = expand(&ch.iter().zip(&ci).map(|(x, y)| *x.max(y)).collect::<Vec<_>>());
            let fail = || CategoryError::Verification("spoke pair does not factor".into());
            left_pieces.push(Piece {
                onto: hp,
                pos: factor_keys(&kh, &keys, n).ok_or_else(fail)?,
            });
            right_pieces.push(Piece {
                onto: ip,
                pos: factor_keys(&ki, &keys, n).ok_or_else(fail)?,
            });
        }
    }
    if left_pieces.is_empty() {
        return Err(CategoryError::Verification("no comparable spoke pairs".into()));
    }
    let left = glue(&left_pieces, f.dom())?;
    let right = glue(&right_pieces, g.dom())?;
    let apex = left.dom().clone();
    let right = Morphism::from_rows(apex.clone(), right.cod().clone(), right.rows().to_vec())?;
    Ok(Amalgam { apex, left, right })
}

/// Vertices of a cycle in cyclic order, starting at index 0.
fn cycle_order(g: &Graph) -> Vec<usize> {
    let mut order = vec![0];
    let mut prev = usize::MAX;
    let mut cur = 0;
    while let Some(next) = g.neighbors(cur).filter(|&u| u != prev && u != 0).min() {
        if order.len() == g.len() {
            break;
        }
        order.push(next);
        prev = cur;
        cur = next;
    }
    order
}

/// Keys of one random spoke piece over the root-first prefix `r`: the root
/// block has `root` entries, every other singleton 1 to `bound`, every edge
/// 0 to `bound`.
fn random_piece_keys(rng: &mut impl Rng, len: usize, root: usize, bound: usize) -> Vec<usize> {
    let mut c = Vec::with_capacity(2 * len);
    c.push(root);
    for k in 1..2 * len - 1 {
        c.push(if k % 2 == 0 { rng.gen_range(1..=bound) } else { rng.gen_range(0..=bound) });
    }
    expand(&c)
}

/// A random morphism of the category onto `target`. Block sizes are at
/// most `bound`, which is at least 1.
pub fn random_morphism_onto(
    cat: CategoryName,
    target: &Arc<Graph>,
    rng: &mut impl Rng,
    bound: usize,
) -> Result<Morphism, CategoryError> {
    let bound = bound.max(1);
    let spec = CategorySpec::get(cat);
    if let Some(v) = spec.object_violation(target) {
        return Err(CategoryError::NotInCategory(cat, v));
    }
    let m = match cat {
        CategoryName::D => {
            let n = target.len();
            let extra = rng.gen_range(0..=bound);
            let mut f: Vec<usize> = (0..n).chain((0..extra).map(|_| rng.gen_range(0..n))).collect();
            for i in (1..f.len()).rev() {
                f.swap(i, rng.gen_range(0..=i));
            }
            Morphism::from_function(Arc::new(Graph::discrete(f.len())), target.clone(), &f)?
        }
        CategoryName::A | CategoryName::P => {
            let order = target.path_order().map_err(|_| CategoryError::NotPaths)?;
            let values: Vec<usize> = (0..2 * order.len() - 1)
                .map(|k| if k % 2 == 0 { rng.gen_range(1..=bound) } else { rng.gen_range(0..=bound) })
                .collect();
            realize_along(target, &order, &values).1
        }
        CategoryName::C => {
            let order = cycle_order(target);
            let n = order.len();
            let mut images = Vec::new();
            for i in 0..n {
                for _ in 0..rng.gen_range(1..=bound) {
                    images.push(target.set([order[i]]));
                }
                for _ in 0..rng.gen_range(0..=bound) {
                    images.push(target.set([order[i], order[(i + 1) % n]]));
                }
            }
            let dom = Arc::new(Graph::cycle(images.len().max(3)));
            while images.len() < 3 {
                images.push(target.set([order[0]]));
            }
            Morphism::from_images(dom, target.clone(), &images)?
        }
        CategoryName::X | CategoryName::L => {
            let fs = fan_structure(target)?;
            let mut pieces = Vec::new();
            for spoke in &fs.spokes {
                let copies = rng.gen_range(1..=2);
                for c in 0..copies {
                    let full = c == 0 || cat == CategoryName::X || rng.gen_bool(0.5);
                    let len = if full { spoke.len() } else { rng.gen_range(1..spoke.len()) };
                    let onto = spoke[..len].to_vec();
                    let root = if len == 1 { 1 + rng.gen_range(1..=bound) } else { 1 };
                    let keys = random_piece_keys(rng, len, root, bound);
                    pieces.push(Piece {
                        onto,
                        pos: keys.iter().map(|&k| if k % 2 == 0 { vec![k / 2] } else { vec![k / 2, k / 2 + 1] }).collect(),
                    });
                }
            }
            glue(&pieces, target)?
        }
    };
    if let Some(v) = spec.morphism_violation(&m) {
        return Err(CategoryError::Verification(format!("sampled morphism: {v}")));
    }
    Ok(m)
}

/// A small random object of the category.
pub fn random_object(cat: CategoryName, rng: &mut impl Rng) -> Arc<Graph> {
    Arc::new(match cat {
        CategoryName::D => Graph::discrete(rng.gen_range(1..=4)),
        CategoryName::A | CategoryName::P => Graph::path(rng.gen_range(1..=4)),
        CategoryName::C => Graph::cycle(rng.gen_range(3..=6)),
        CategoryName::X | CategoryName::L => {
            let lens: Vec<usize> = (0..rng.gen_range(3..=4)).map(|_| rng.gen_range(1..=3)).collect();
            Graph::fan(&lens)
        }
    })
}

/// One absorbed request of a Fraïssé prefix.
#[derive(Clone, Debug, Serialize)]
pub struct AbsorptionRecord {
    pub step: usize,
    /// Level the request maps onto.
    pub level: usize,
    /// Vertices of the request's domain.
    pub request_size: usize,
    /// Level whose composite the request factors.
    pub resolved_at: usize,
    pub widening: Widening,
    pub verified: bool,
}

#[derive(Clone, Debug)]
pub struct FraissePrefix {
    pub sequence: Sequence,
    pub log: Vec<AbsorptionRecord>,
    /// `requests[k]` maps onto level `log[k].level`.
    pub requests: Vec<Morphism>,
    /// `factors[k]` goes from level `log[k].resolved_at` to the domain of
    /// `requests[k]`.
    pub factors: Vec<Morphism>,
}

/// What a builder step does to the amalgam before appending it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Widening {
    /// Append the amalgam as it is.
    Keep,
    /// Raise the type: discrete doubling, every path singleton twice and
    /// every edge once, or every spoke edge twice with split ends in X.
    Types,
    /// Add truncated spokes so ends sit over every vertex.
    Ends,
}

impl Widening {
    /// X raises types every other step. L alternates between raising types
    /// and adding ends, since doing both at once grows quadratically in the
    /// widened spoke length.
    pub fn at(cat: CategoryName, step: usize) -> Self {
        match (cat, step % 2) {
            (CategoryName::X, 0) => Widening::Keep,
            (CategoryName::L, 1) => Widening::Ends,
            _ => Widening::Types,
        }
    }
}

fn widen(cat: CategoryName, b: &Morphism, mode: Widening) -> Result<Morphism, CategoryError> {
    let j = b.dom();
    match mode {
        Widening::Keep => return Ok(Morphism::identity(j.clone())),
        Widening::Ends => return add_ends(b),
        Widening::Types => {}
    }
    match cat {
        CategoryName::D => {
            let f: Vec<usize> = (0..2 * j.len()).map(|v| v / 2).collect();
            Ok(Morphism::from_function(Arc::new(Graph::discrete(2 * j.len())), j.clone(), &f)?)
        }
        CategoryName::A => {
            let o = orient(b)?;
            let r = o.cod_order.len();
            let mut c = counts(&o.keys, r);
            for (k, v) in c.iter_mut().enumerate() {
                *v = (*v).max(if k % 2 == 0 { 2 } else { 1 });
            }
            let keys = expand(&c);
            let apex = Arc::new(Graph::path(keys.len()));
            let pos = factor_keys(&o.keys, &keys, r).ok_or_else(|| CategoryError::Verification("widening".into()))?;
            let order: Vec<usize> = (0..keys.len()).collect();
            let images = images_from_positions(&o.dom_order, j.len(), &order, &pos);
            Ok(Morphism::from_images(apex, j.clone(), &images)?)
        }
        CategoryName::X | CategoryName::L => widen_fan(cat, b),
        CategoryName::P | CategoryName::C => Err(CategoryError::NoAmalgamator(cat)),
    }
}

fn widen_fan(cat: CategoryName, b: &Morphism) -> Result<Morphism, CategoryError> {
    let (j, g) = (b.dom(), b.cod());
    let (fj, fg) = (fan_structure(j)?, fan_structure(g)?);
    let fail = || CategoryError::Verification("fan widening".into());
    // (spoke of J, prefix of G it covers, new keys, positions)
    type Widened = (Vec<usize>, Vec<usize>, Vec<usize>, Vec<Vec<usize>>);
    let mut full: Vec<Widened> = Vec::new();
    for (si, s) in fj.spokes.iter().enumerate() {
        let r = prefix_order(&fg, &b.image(&fj.spoke_set(j, si))).ok_or_else(fail)?;
        let ks = keys_along(b, s, &r).ok_or_else(fail)?;
        let mut c = counts(&ks, r.len());
        for (k, v) in c.iter_mut().enumerate() {
            *v = (*v).max(if k % 2 == 0 { 1 } else { 2 });
        }
        let keys = expand(&c);
        let pos = factor_keys(&ks, &keys, r.len()).ok_or_else(fail)?;
        full.push((s.clone(), r, keys, pos));
    }
    let mut pieces: Vec<Piece> = Vec::new();
    let mut ends_over = vec![0usize; g.len()];
    let add = |pieces: &mut Vec<Piece>,
               ends_over: &mut Vec<usize>,
               onto: &[usize],
               r: &[usize],
               keys: &[usize],
               pos: &[Vec<usize>]| {
        for v in key_set(g, r, *keys.last().expect("non-empty")).ones() {
            ends_over[v] += 1;
        }
        pieces.push(Piece {
            onto: onto.to_vec(),
            pos: pos.to_vec(),
        });
    };
    for (s, r, keys, pos) in &full {
        add(&mut pieces, &mut ends_over, s, r, keys, pos);
    }
    if cat == CategoryName::X {
        for (s, r, keys, pos) in &full {
            let end = *r.last().expect("non-empty");
            if ends_over[end] < 2 {
                add(&mut pieces, &mut ends_over, s, r, keys, pos);
            }
        }
    }
    glue(&pieces, j)
}

/// Keeps every spoke of `J` and adds truncated copies until every vertex of
/// the codomain lies under an end, and every end under two.
fn add_ends(b: &Morphism) -> Result<Morphism, CategoryError> {
    let (j, g) = (b.dom(), b.cod());
    let (fj, fg) = (fan_structure(j)?, fan_structure(g)?);
    let ident = |len: usize| (0..len).map(|i| vec![i]).collect::<Vec<_>>();
    let mut ends_over = vec![0usize; g.len()];
    let mut pieces = Vec::new();
    for s in &fj.spokes {
        for v in b.image_of(*s.last().expect("non-empty")).ones() {
            ends_over[v] += 1;
        }
        pieces.push(Piece {
            onto: s.clone(),
            pos: ident(s.len()),
        });
    }
    // Shortest spoke prefix of J reaching each vertex of G.
    let mut best: Vec<Option<(usize, usize)>> = vec![None; g.len()];
    for (si, s) in fj.spokes.iter().enumerate() {
        for (c, &u) in s.iter().enumerate().skip(1) {
            for v in b.image_of(u).ones() {
                if best[v].is_none_or(|(_, bc)| c < bc) {
                    best[v] = Some((si, c));
                }
            }
        }
    }
    if ends_over[fg.root] == 0 {
        ends_over[fg.root] += 1;
        pieces.push(Piece {
            onto: vec![fj.root],
            pos: vec![vec![0], vec![0]],
        });
    }
    let g_ends = g.ends();
    for v in 0..g.len() {
        let need = if g_ends.contains(v) { 2 } else { 1 };
        while ends_over[v] < need {
            let (si, c) = best[v].ok_or_else(|| CategoryError::Verification("vertex outside every spoke image".into()))?;
            let s = &fj.spokes[si];
            for x in b.image_of(s[c]).ones() {
                ends_over[x] += 1;
            }
            pieces.push(Piece {
                onto: s[..=c].to_vec(),
                pos: ident(c + 1),
            });
        }
    }
    glue(&pieces, j)
}

fn builder_guarantees(cat: CategoryName) -> Vec<Guarantee> {
    use FanProperty::*;
    use MorphProperty::*;
    let every = |p: Property| Guarantee::EveryStep { property: p };
    let stride = |p: Property| Guarantee::Stride { property: p, stride: 2 };
    let mut g = vec![Guarantee::Growing];
    match cat {
        CategoryName::D => {
            g.push(every(AntiInjective.into()));
            g.push(Guarantee::EveryGraph { shape: Shape::Discrete });
        }
        CategoryName::A => {
            g.push(every(EdgeWitnessing.into()));
            g.push(every(StrictlyAntiInjective.into()));
            g.push(stride(StarRefining.into()));
            g.push(Guarantee::EveryGraph { shape: Shape::Path });
        }
        CategoryName::X | CategoryName::L => {
            g.push(stride(StarRefining.into()));
            g.push(stride(EndSplitting.into()));
            if cat == CategoryName::L {
                g.push(stride(EndDense.into()));
            }
            g.push(Guarantee::EveryGraph { shape: Shape::Fan });
        }
        CategoryName::P | CategoryName::C => {}
    }
    g
}

/// Builds `steps` steps of a Fraïssé sequence. Each step pops a level off a
/// FIFO queue, samples a morphism onto that level, amalgamates it with the
/// composite down to that level and then widens the amalgam as
/// [`Widening::at`] says; the next level and a random earlier level are
/// queued behind it.
pub fn fraisse_prefix(cat: &CategorySpec, steps: usize, seed: u64, size_bound: usize) -> Result<FraissePrefix, CategoryError> {
    if cat.amalgamator.is_none() {
        return Err(CategoryError::NoAmalgamator(cat.name));
    }
    let g0 = cat
        .weakly_terminal
        .clone()
        .ok_or(CategoryError::Unsupported("a weakly terminal object", cat.name))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps = vec![Morphism::identity(g0.clone())];
    let mut queue = VecDeque::from([0usize]);
    let mut order = Vec::new();
    let (mut log, mut requests, mut factors, mut step_list) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for n in 0..steps {
        let level = queue.pop_front().unwrap_or(n);
        order.push(level);
        let target = comps[level].cod().clone();
        let r = random_morphism_onto(cat.name, &target, &mut rng, size_bound)?;
        let am = amalgamate(cat, &r, &comps[level])?;
        let widening = Widening::at(cat.name, n);
        let w = widen(cat.name, &am.right, widening)?;
        let step = Morphism::compose(&am.right, &w)?;
        let factor = Morphism::compose(&am.left, &w)?;
        let mut next: Vec<Morphism> = comps
            .iter()
            .map(|c| Morphism::compose(c, &step))
            .collect::<Result<_, _>>()?;
        next.push(Morphism::identity(step.dom().clone()));
        comps = next;
        let verified = Morphism::compose(&r, &factor)? == comps[level]
            && cat.contains_morphism(&step)
            && cat.contains_morphism(&factor);
        if !verified {
            return Err(CategoryError::Verification(format!("step {n}: request at level {level} not absorbed")));
        }
        log.push(AbsorptionRecord {
            step: n,
            level,
            request_size: r.dom().len(),
            resolved_at: n + 1,
            widening,
            verified,
        });
        requests.push(r);
        factors.push(factor);
        step_list.push(step);
        queue.push_back(n + 1);
        queue.push_back(rng.gen_range(0..=n + 1));
    }
    let provenance = Provenance::named("fraisse")
        .with("category", cat.name)
        .with("steps", steps)
        .with("seed", seed)
        .with("size_bound", size_bound)
        .with("queue", order.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","));
    let sequence = Sequence::from_steps(g0, step_list)?
        .with_provenance(provenance)
        .with_guarantees(builder_guarantees(cat.name));
    Ok(FraissePrefix {
        sequence,
        log,
        requests,
        factors,
    })
}

fn steps_in_category(cat: &CategorySpec, s: &Sequence, from: usize, to: usize) -> Result<(), CategoryError> {
    for n in from..to {
        if let Some(v) = cat.morphism_violation(s.step(n)) {
            return Err(CategoryError::NotInCategory(cat.name, format!("step {n}: {v}")));
        }
    }
    Ok(())
}

fn nontrivial(s: &Sequence, h: usize) -> Verdict {
    match (0..=h).find(|&n| s.graph(n).len() != 1) {
        Some(n) => Verdict::Holds {
            witness: Witness::Level {
                level: n,
                detail: format!("{} vertices", s.graph(n).len()),
            },
        },
        None => Verdict::Unknown {
            horizon: h,
            note: "every level so far is a single vertex".into(),
        },
    }
}

/// Lax-Fraïssé at horizon `h`: the finite-horizon conditions that
/// characterise lax-Fraïssé sequences of the category.
pub fn lax_fraisse_check(cat: &CategorySpec, s: &Sequence, horizon: usize) -> Result<Verdict, CategoryError> {
    certify(cat, s, horizon, false)
}

/// Fraïssé at horizon `h`; adds the strict conditions to the lax ones.
pub fn fraisse_check(cat: &CategorySpec, s: &Sequence, horizon: usize) -> Result<Verdict, CategoryError> {
    certify(cat, s, horizon, true)
}

fn certify(cat: &CategorySpec, s: &Sequence, horizon: usize, strict: bool) -> Result<Verdict, CategoryError> {
    use MorphProperty::*;
    let h = horizon.min(s.last());
    let mut parts: Vec<(String, Verdict)> = Vec::new();
    match cat.name {
        CategoryName::P => return Err(CategoryError::Unsupported("Fraïssé certification", cat.name)),
        CategoryName::X | CategoryName::L => return certify_fans(cat, s, h, strict),
        CategoryName::D => {
            steps_in_category(cat, s, 0, h)?;
            parts.push(("anti-injective subsequence".into(), s.has_subsequence_in(AntiInjective.into(), h)?));
        }
        CategoryName::A | CategoryName::C => {
            steps_in_category(cat, s, 0, h)?;
            if cat.name == CategoryName::A {
                parts.push(("nontrivial".into(), nontrivial(s, h)));
            }
            parts.push(("edge-witnessing subsequence".into(), s.has_subsequence_in(EdgeWitnessing.into(), h)?));
            if strict {
                parts.push((
                    "strictly anti-injective subsequence".into(),
                    s.has_subsequence_in(StrictlyAntiInjective.into(), h)?,
                ));
            }
        }
    }
    Ok(Verdict::all(h, parts))
}

fn certify_fans(cat: &CategorySpec, s: &Sequence, h: usize, strict: bool) -> Result<Verdict, CategoryError> {
    let tree = tree_of_spokes(s)?;
    if h <= tree.start {
        return Ok(Verdict::Unknown {
            horizon: h,
            note: format!("fans start at level {}", tree.start),
        });
    }
    steps_in_category(cat, s, tree.start, h)?;
    let limit = classify_fan_limit(s, h)?;
    let mut parts = vec![("fan evidence".to_string(), limit.evidence.clone())];
    if cat.name == CategoryName::L && !limit.evidence.fails() {
        // Steps that happen to preserve ends are judged by the end-preserving
        // route; the Lelek conditions also ask for end-density.
        let suffix = s.subsequence(&(tree.start..=h).collect::<Vec<_>>())?;
        let wanted: Vec<Property> = vec![
            MorphProperty::StarRefining.into(),
            FanProperty::EndDense.into(),
            FanProperty::EndSplitting.into(),
        ];
        parts.push((
            "star-refining end-dense end-splitting subsequence".into(),
            crate::fan::joint_subsequence(&suffix, &wanted, suffix.last()),
        ));
    }
    if strict && cat.name == CategoryName::X {
        let suffix = s.subsequence(&(tree.start..=h).collect::<Vec<_>>())?;
        for b in branches(&suffix, suffix.last())? {
            let report = branch_analysis(&suffix, &b)?;
            let label = format!("branch ending in spoke {}", b.spokes.last().expect("non-empty"));
            let v = match report.modification {
                Some(m) if m.last() > 0 => Verdict::all(
                    m.last(),
                    vec![
                        ("nontrivial".into(), nontrivial(&m, m.last())),
                        (
                            "edge-witnessing subsequence".into(),
                            m.has_subsequence_in(MorphProperty::EdgeWitnessing.into(), m.last())?,
                        ),
                    ],
                ),
                Some(_) => Verdict::Unknown {
                    horizon: h,
                    note: "branch too short".into(),
                },
                None => Verdict::FailsOnPrefix {
                    witness: Witness::Note {
                        text: "branch core has no co-bijective modification".into(),
                    },
                },
            };
            parts.push((label, v));
        }
    }
    let verdict = Verdict::all(h, parts.clone());
    if verdict.fails() {
        let target = Arc::new(Graph::fan(&[2, 2, 2]));
        let probe = cofinality_probe(cat, s, &target, h, 200_000)?;
        parts.push(("cofinal onto the three-spoke fan of spoke length 2".into(), probe));
        return Ok(Verdict::all(h, parts));
    }
    Ok(verdict)
}

/// Looks for a morphism of the category from some level up to the horizon
/// onto `target`. Fails only when every level is refuted exhaustively.
pub fn cofinality_probe(
    cat: &CategorySpec,
    s: &Sequence,
    target: &Arc<Graph>,
    horizon: usize,
    budget: u64,
) -> Result<Verdict, CategoryError> {
    if let Some(v) = cat.object_violation(target) {
        return Err(CategoryError::NotInCategory(cat.name, format!("target: {v}")));
    }
    let h = horizon.min(s.last());
    let props = cat.search_properties();
    let fan_target = matches!(cat.name, CategoryName::X | CategoryName::L);
    let claw = fan_target && fan_structure(target)?.lengths() == [1, 1, 1];
    let mut refuted = Vec::new();
    let mut open = Vec::new();
    for n in 0..=h {
        let g = s.graph(n);
        let found = |m: &Morphism| Verdict::Holds {
            witness: Witness::Morphism {
                level: n,
                pairs: m.label_pairs(),
            },
        };
        if !cat.contains_object(g) {
            refuted.push((
                format!("level {n}"),
                Verdict::FailsOnPrefix {
                    witness: Witness::Level {
                        level: n,
                        detail: "not an object of the category".into(),
                    },
                },
            ));
            continue;
        }
        if claw {
            if let Some(m) = collapse_onto_claw(g).filter(|m| cat.contains_morphism(m)) {
                return Ok(found(&m));
            }
        }
        let spec = cat.clone();
        let mut opts = SearchOptions {
            limit: Some(1),
            budget,
            accept: Some(Arc::new(move |m: &Morphism| spec.contains_morphism(m))),
            ..SearchOptions::default()
        };
        if fan_target {
            let (fd, ft) = (fan_structure(g)?, fan_structure(target)?);
            opts.pinned.push((fd.root, target.set([ft.root])));
            if cat.name == CategoryName::X {
                let ends = target.ends();
                opts.confined.extend(g.ends().ones().map(|e| (e, ends.clone())));
            }
        }
        match enumerate_morphisms(g, target, &props, &opts) {
            Ok(ms) if !ms.is_empty() => return Ok(found(&ms[0])),
            Ok(_) => refuted.push((
                format!("level {n}"),
                Verdict::FailsOnPrefix {
                    witness: Witness::Level {
                        level: n,
                        detail: format!("no morphism onto the {}-vertex target", target.len()),
                    },
                },
            )),
            Err(e) => open.push(format!("level {n}: {e}")),
        }
    }
    if !open.is_empty() {
        return Ok(Verdict::Unknown {
            horizon: h,
            note: open.join("; "),
        });
    }
    Ok(Verdict::FailsOnPrefix {
        witness: Witness::All { parts: refuted },
    })
}

/// One rung of a back-and-forth ladder.
#[derive(Clone, Debug)]
pub struct Rung {
    /// Sequence (1 or 2) the rung starts from.
    pub from_sequence: usize,
    pub from_level: usize,
    pub to_level: usize,
    pub morphism: Morphism,
}

#[derive(Clone, Debug)]
pub struct Ladder {
    pub lax: bool,
    pub rungs: Vec<Rung>,
}

impl Ladder {
    /// Back-and-forth rungs after the initial one.
    pub fn depth(&self) -> usize {
        self.rungs.len().saturating_sub(1)
    }
}

/// `β` from some level `i' > i` of `s` into the domain of `alpha` with
/// `alpha ∘ β` equal to (or, when lax, inside) the composite from `i'` to `i`.
fn lift(cat: &CategorySpec, s: &Sequence, i: usize, alpha: &Morphism, lax: bool) -> Option<(usize, Morphism)> {
    let fits = |beta: &Morphism, c: &Morphism| {
        Morphism::compose(alpha, beta).is_ok_and(|x| if lax { x.is_subrelation_of(c) } else { x == *c })
            && cat.contains_morphism(beta)
    };
    for j in i + 1..=s.last() {
        let c = s.comp(i, j);
        let beta = match cat.name {
            CategoryName::D => {
                let (fa, fc) = (function_of(alpha), function_of(c));
                let mut over: Vec<Vec<usize>> = vec![Vec::new(); alpha.cod().len()];
                for (v, &y) in fa.iter().enumerate() {
                    over[y].push(v);
                }
                let mut seen = vec![0usize; alpha.cod().len()];
                let mut f = vec![0usize; fc.len()];
                let mut ok = true;
                for (x, &y) in fc.iter().enumerate() {
                    let b = &over[y];
                    if b.is_empty() {
                        ok = false;
                        break;
                    }
                    f[x] = b[seen[y].min(b.len() - 1)];
                    seen[y] += 1;
                }
                ok &= (0..over.len()).all(|y| seen[y] >= over[y].len());
                ok.then(|| Morphism::from_function(c.dom().clone(), alpha.dom().clone(), &f).ok())
                    .flatten()
            }
            CategoryName::A => factor_by_type(alpha, c)
                .ok()
                .flatten()
                .or_else(|| lax.then(|| subfactor(alpha, c).ok()).flatten()),
            _ => {
                let (spec, target, a) = (cat.clone(), c.clone(), alpha.clone());
                let opts = SearchOptions {
                    limit: Some(1),
                    budget: 200_000,
                    accept: Some(Arc::new(move |b: &Morphism| {
                        Morphism::compose(&a, b).is_ok_and(|x| if lax { x.is_subrelation_of(&target) } else { x == target })
                            && spec.contains_morphism(b)
                    })),
                    ..SearchOptions::default()
                };
                enumerate_morphisms(c.dom(), alpha.dom(), &cat.search_properties(), &opts)
                    .ok()
                    .and_then(|v| v.into_iter().next())
            }
        };
        if let Some(b) = beta.filter(|b| fits(b, c)) {
            return Some((j, b));
        }
    }
    None
}

/// Alternating morphisms between levels of two (lax-)Fraïssé prefixes of
/// the same category, each rung absorbing the previous one.
pub fn intertwine(
    cat: &CategorySpec,
    s1: &Sequence,
    s2: &Sequence,
    depth: usize,
    lax: bool,
) -> Result<Ladder, CategoryError> {
    for s in [s1, s2] {
        if let Some(c) = s.provenance.params.get("category") {
            let c: CategoryName = c.parse()?;
            if c != cat.name {
                return Err(CategoryError::Mismatch(cat.name, c));
            }
        }
        if let Some(v) = s.graphs().iter().find_map(|g| cat.object_violation(g)) {
            return Err(CategoryError::NotInCategory(cat.name, v));
        }
    }
    let (a0, b0) = (s1.graph(0), s2.graph(0));
    let first = if a0.len() == 1 {
        Morphism::terminal(b0.clone())
    } else {
        let opts = SearchOptions {
            limit: Some(1),
            ..SearchOptions::default()
        };
        let spec = cat.clone();
        let opts = SearchOptions {
            accept: Some(Arc::new(move |m: &Morphism| spec.contains_morphism(m))),
            ..opts
        };
        enumerate_morphisms(b0, a0, &cat.search_properties(), &opts)
            .ok()
            .and_then(|v| v.into_iter().next())
            .ok_or(CategoryError::Stuck {
                rung: 0,
                reason: "no morphism between the first levels".into(),
            })?
    };
    let first = Morphism::from_rows(b0.clone(), a0.clone(), first.rows().to_vec())?;
    if !cat.contains_morphism(&first) {
        return Err(CategoryError::Stuck {
            rung: 0,
            reason: "the first levels are not related in the category".into(),
        });
    }
    let mut rungs = vec![Rung {
        from_sequence: 2,
        from_level: 0,
        to_level: 0,
        morphism: first,
    }];
    for k in 1..=depth {
        let prev = rungs.last().expect("non-empty");
        // The previous rung lands in `s`, so `s` absorbs it.
        let (s, into) = if prev.from_sequence == 2 { (s1, 1) } else { (s2, 2) };
        let (j, beta) = lift(cat, s, prev.to_level, &prev.morphism, lax).ok_or_else(|| CategoryError::Stuck {
            rung: k,
            reason: format!("no level of sequence {into} absorbs the rung from level {}", prev.to_level),
        })?;
        rungs.push(Rung {
            from_sequence: into,
            from_level: j,
            to_level: prev.from_level,
            morphism: beta,
        });
    }
    Ok(Ladder { lax, rungs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clique::membership;
    use MorphProperty::*;

    fn path(n: usize) -> Arc<Graph> {
        Arc::new(Graph::path(n))
    }

    fn a() -> CategorySpec {
        CategorySpec::get(CategoryName::A)
    }

    /// Brute-force factor search, independent of types.
    fn oracle_factor(big: &Morphism, small: &Morphism) -> Option<Morphism> {
        let target = small.clone();
        let b = big.clone();
        let opts = SearchOptions {
            limit: Some(1),
            accept: Some(Arc::new(move |phi: &Morphism| {
                Morphism::compose(&b, phi).is_ok_and(|c| c == target)
            })),
            ..SearchOptions::default()
        };
        enumerate_morphisms(small.dom(), big.dom(), &[CoBijective, Monotone], &opts)
            .unwrap()
            .into_iter()
            .next()
    }

    #[test]
    fn names_round_trip() {
        for c in CategoryName::ALL {
            assert_eq!(c.to_string().parse::<CategoryName>().unwrap(), c);
        }
        assert_eq!("l".parse::<CategoryName>().unwrap(), CategoryName::L);
        assert!(matches!("Q".parse::<CategoryName>(), Err(CategoryError::UnknownCategory(_))));
    }

    #[test]
    fn small_objects_are_canonical() {
        assert_eq!(CategorySpec::get(CategoryName::D).small_objects(3).len(), 3);
        assert_eq!(CategorySpec::get(CategoryName::C).small_objects(5).len(), 3);
        // Three or more spokes with at most five non-root vertices:
        // 111, 211, 1111, 311, 221, 2111, 11111.
        let fans = CategorySpec::get(CategoryName::X).small_objects(6);
        assert_eq!(fans.len(), 7);
        assert!(fans.iter().all(|g| g.classify().fan.is_some()));
    }

    #[test]
    fn fibre_product_of_two_point_sets_has_four_points() {
        let d = CategorySpec::get(CategoryName::D);
        let one = Arc::new(Graph::discrete(1));
        let two = Arc::new(Graph::discrete(2));
        let f = Morphism::terminal(two.clone());
        let f = Morphism::from_rows(two.clone(), one.clone(), f.rows().to_vec()).unwrap();
        let am = amalgamate(&d, &f, &f).unwrap();
        assert_eq!(am.apex.len(), 4);
        assert!(am.apex.classify().discrete);
    }

    #[test]
    fn membership_and_identity_amalgamate_in_a() {
        let p2 = path(2);
        let m = membership(&p2).unwrap();
        let id = Morphism::identity(p2.clone());
        let am = amalgamate(&a(), &m, &id).unwrap();
        assert!(am.apex.is_path());
        assert_eq!(Morphism::compose(&m, &am.left).unwrap(), Morphism::compose(&id, &am.right).unwrap());
        // The legs are among the morphisms a brute-force search finds.
        let lefts = enumerate_morphisms(&am.apex, m.dom(), &[CoBijective, Monotone], &SearchOptions::default()).unwrap();
        assert!(lefts.contains(&am.left));
    }

    #[test]
    fn monotone_surjective_paths_do_not_amalgamate() {
        let (f, g, h) = (path(2), path(1), path(3));
        let over_g = Morphism::new(g.clone(), f.clone(), [(0, 0), (1, 0)]).unwrap();
        let over_h = Morphism::from_function(h.clone(), f.clone(), &[0, 0, 1]).unwrap();
        assert!(over_g.check_all(&[Monotone, Surjective]) && over_h.check_all(&[Monotone, Surjective]));
        for n in 1..=6 {
            let p = path(n);
            let legs_g = enumerate_morphisms(&p, &g, &[Monotone, Surjective], &SearchOptions::default()).unwrap();
            let legs_h = enumerate_morphisms(&p, &h, &[Monotone, Surjective], &SearchOptions::default()).unwrap();
            for x in &legs_g {
                let left = Morphism::compose(&over_g, x).unwrap();
                assert!(legs_h.iter().all(|y| Morphism::compose(&over_h, y).unwrap() != left));
            }
        }
    }

    #[test]
    fn spec_without_amalgamator_refuses() {
        let c = CategorySpec::get(CategoryName::C);
        let id = Morphism::identity(Arc::new(Graph::cycle(4)));
        assert_eq!(amalgamate(&c, &id, &id).unwrap_err(), CategoryError::NoAmalgamator(CategoryName::C));
        let p = CategorySpec::get(CategoryName::P);
        assert!(matches!(fraisse_prefix(&p, 2, 0, 2), Err(CategoryError::NoAmalgamator(_))));
        let s = Sequence::from_steps(path(1), Vec::new()).unwrap();
        assert!(matches!(lax_fraisse_check(&p, &s, 0), Err(CategoryError::Unsupported(..))));
    }

    #[test]
    fn type_of_membership_is_one_everywhere() {
        for n in 1..=5 {
            let t = type_of(&membership(&path(n)).unwrap()).unwrap();
            assert!(t.values.iter().all(|&v| v == 1), "{t:?}");
        }
    }

    #[test]
    fn type_of_edge_split_counts_two_on_the_edge() {
        let m = Morphism::edge_split(&path(2));
        let t = type_of(&m).unwrap();
        assert_eq!(t.get(&[0]), Some(1));
        assert_eq!(t.get(&[1]), Some(1));
        assert_eq!(t.get(&[0, 1]), Some(2));
    }

    #[test]
    fn type_of_identity_is_one_on_vertices_zero_on_edges() {
        let t = type_of(&Morphism::identity(path(4))).unwrap();
        assert_eq!(t.values, vec![1, 0, 1, 0, 1, 0, 1]);
        let not_path = Morphism::identity(Arc::new(Graph::cycle(3)));
        assert_eq!(type_of(&not_path).unwrap_err(), CategoryError::NotPaths);
    }

    #[test]
    fn realizing_types() {
        let q = path(2);
        let (p, m) = realize_type(&q, &TypeFunction::new(&q, vec![1, 0, 1]).unwrap()).unwrap();
        assert_eq!(p.len(), 2);
        assert!(m.check(Function) && m.check(Injective));

        let (p, m) = realize_type(&q, &TypeFunction::new(&q, vec![2, 1, 2]).unwrap()).unwrap();
        assert_eq!(p.len(), 5);
        assert!(a().contains_morphism(&m));

        let t = TypeFunction::new(&q, vec![1, 3, 1]).unwrap();
        let (p, m) = realize_type(&q, &t).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(type_of(&m).unwrap(), t);
        assert_eq!(m.image_of(2).count_ones(..), 2);

        let bad = TypeFunction::new(&q, vec![0, 1, 1]).unwrap();
        assert!(matches!(realize_type(&q, &bad), Err(CategoryError::InvalidType(_))));
    }

    #[test]
    fn factor_of_a_morphism_through_itself() {
        let m = Morphism::edge_split(&path(3));
        let phi = factor_by_type(&m, &m).unwrap().unwrap();
        assert_eq!(Morphism::compose(&m, &phi).unwrap(), m);
        assert!(a().contains_morphism(&phi));
    }

    #[test]
    fn factor_through_membership_of_a_composite() {
        let r = path(3);
        let big = membership(&r).unwrap();
        let small = Morphism::compose(&big, &membership(big.dom()).unwrap()).unwrap();
        let (tb, ts) = (type_of(&big).unwrap(), type_of(&small).unwrap());
        assert!(tb.dominated_by(&ts));
        let phi = factor_by_type(&big, &small).unwrap().unwrap();
        assert_eq!(Morphism::compose(&big, &phi).unwrap(), small);
        assert!(oracle_factor(&big, &small).is_some());
    }

    #[test]
    fn heavier_edge_blocks_do_not_factor() {
        let r = path(2);
        let (_, big) = realize_type(&r, &TypeFunction::new(&r, vec![1, 2, 1]).unwrap()).unwrap();
        let (_, small) = realize_type(&r, &TypeFunction::new(&r, vec![1, 1, 1]).unwrap()).unwrap();
        assert_eq!(factor_by_type(&big, &small).unwrap(), None);
        assert!(oracle_factor(&big, &small).is_none());
    }

    #[test]
    fn factor_agrees_with_search_on_small_cospans() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let r = path(rng.gen_range(1..=3));
            let big = random_morphism_onto(CategoryName::A, &r, &mut rng, 2).unwrap();
            let small = random_morphism_onto(CategoryName::A, &r, &mut rng, 2).unwrap();
            if big.dom().len() > 6 || small.dom().len() > 6 {
                continue;
            }
            let ours = factor_by_type(&big, &small).unwrap();
            assert_eq!(ours.is_some(), oracle_factor(&big, &small).is_some());
            if let Some(phi) = ours {
                assert_eq!(Morphism::compose(&big, &phi).unwrap(), small);
            }
        }
    }

    #[test]
    fn subfactor_over_a_point_is_a_monotone_surjection() {
        let r = path(1);
        let big = Morphism::terminal(path(3));
        let big = Morphism::from_rows(big.dom().clone(), r.clone(), big.rows().to_vec()).unwrap();
        let small = Morphism::terminal(path(5));
        let small = Morphism::from_rows(small.dom().clone(), r, small.rows().to_vec()).unwrap();
        let phi = subfactor(&big, &small).unwrap();
        assert!(phi.check_all(&[Function, Surjective, Monotone]));
    }

    #[test]
    fn subfactor_absorbs_a_three_path() {
        let r = path(2);
        let (_, big) = realize_type(&r, &TypeFunction::new(&r, vec![1, 1, 1]).unwrap()).unwrap();
        let (_, small) = realize_type(&r, &TypeFunction::new(&r, vec![1, 3, 2]).unwrap()).unwrap();
        let phi = subfactor(&big, &small).unwrap();
        assert!(Morphism::compose(&big, &phi).unwrap().is_subrelation_of(&small));
        assert!(phi.check(Function) && a().contains_morphism(&phi));
    }

    #[test]
    fn subfactor_needs_a_small_enough_path() {
        let r = path(1);
        let big = Morphism::terminal(path(4));
        let big = Morphism::from_rows(big.dom().clone(), r.clone(), big.rows().to_vec()).unwrap();
        let small = Morphism::terminal(path(2));
        let small = Morphism::from_rows(small.dom().clone(), r, small.rows().to_vec()).unwrap();
        assert!(matches!(subfactor(&big, &small), Err(CategoryError::Hypothesis(_))));
    }

    #[test]
    fn sampled_morphisms_stay_in_their_category_under_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for cat in CategoryName::ALL {
            let spec = CategorySpec::get(cat);
            for _ in 0..10 {
                let g = random_object(cat, &mut rng);
                let m = random_morphism_onto(cat, &g, &mut rng, 2).unwrap();
                let n = random_morphism_onto(cat, m.dom(), &mut rng, 2).unwrap();
                assert!(spec.contains_morphism(&m), "{cat}");
                let c = Morphism::compose(&m, &n).unwrap();
                assert!(spec.contains_morphism(&c), "{cat}: {:?}", spec.morphism_violation(&c));
            }
        }
    }

    #[test]
    fn sampled_cospans_amalgamate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cat in [CategoryName::D, CategoryName::A, CategoryName::X, CategoryName::L] {
            let spec = CategorySpec::get(cat);
            for _ in 0..10 {
                let g = random_object(cat, &mut rng);
                let f = random_morphism_onto(cat, &g, &mut rng, 2).unwrap();
                let h = random_morphism_onto(cat, &g, &mut rng, 2).unwrap();
                let am = amalgamate(&spec, &f, &h).unwrap();
                assert_eq!(Morphism::compose(&f, &am.left).unwrap(), Morphism::compose(&h, &am.right).unwrap());
            }
        }
    }

    #[test]
    fn discrete_prefix_grows_and_is_anti_injective() {
        let d = CategorySpec::get(CategoryName::D);
        let p = fraisse_prefix(&d, 6, 0, 2).unwrap();
        let s = &p.sequence;
        assert!((0..s.last()).all(|n| s.graph(n + 1).len() > s.graph(n).len()));
        assert!(s.has_subsequence_in(AntiInjective.into(), 6).unwrap().holds());
        assert!(fraisse_check(&d, s, 6).unwrap().holds());
    }

    #[test]
    fn arc_prefix_is_lax_fraisse() {
        let p = fraisse_prefix(&a(), 6, 0, 2).unwrap();
        assert!(lax_fraisse_check(&a(), &p.sequence, 6).unwrap().holds());
        assert!(fraisse_check(&a(), &p.sequence, 6).unwrap().holds());
    }

    #[test]
    fn cantor_fan_prefix_is_star_refining_and_end_splitting() {
        let x = CategorySpec::get(CategoryName::X);
        let p = fraisse_prefix(&x, 5, 0, 2).unwrap();
        let s = &p.sequence;
        assert!(s.has_subsequence_in(StarRefining.into(), 5).unwrap().holds());
        assert!(s.has_subsequence_in(FanProperty::EndSplitting.into(), 5).unwrap().holds());
        assert!(lax_fraisse_check(&x, s, 5).unwrap().holds());
    }

    #[test]
    fn every_request_is_absorbed() {
        for cat in [CategoryName::D, CategoryName::A, CategoryName::X, CategoryName::L] {
            let p = fraisse_prefix(&CategorySpec::get(cat), 3, 5, 2).unwrap();
            for (k, rec) in p.log.iter().enumerate() {
                let composite = p.sequence.composite(rec.level, rec.resolved_at).unwrap();
                assert_eq!(&Morphism::compose(&p.requests[k], &p.factors[k]).unwrap(), composite);
                assert!(rec.verified);
            }
        }
    }

    #[test]
    fn a_point_is_cofinal_in_a() {
        let p = fraisse_prefix(&a(), 2, 0, 2).unwrap();
        let v = cofinality_probe(&a(), &p.sequence, &path(1), 2, 10_000).unwrap();
        assert!(matches!(v, Verdict::Holds { witness: Witness::Morphism { level: 0, .. } }));
    }

    #[test]
    fn discrete_prefixes_intertwine_exactly() {
        let d = CategorySpec::get(CategoryName::D);
        let s1 = fraisse_prefix(&d, 8, 1, 2).unwrap().sequence;
        let s2 = fraisse_prefix(&d, 8, 2, 2).unwrap().sequence;
        let ladder = intertwine(&d, &s1, &s2, 3, false).unwrap();
        assert_eq!(ladder.depth(), 3);
        for w in ladder.rungs.windows(2) {
            let (prev, next) = (&w[0], &w[1]);
            let s = if next.from_sequence == 1 { &s1 } else { &s2 };
            let c = s.composite(prev.to_level, next.from_level).unwrap();
            assert_eq!(&Morphism::compose(&prev.morphism, &next.morphism).unwrap(), c);
        }
    }

    #[test]
    fn arc_prefixes_intertwine_laxly() {
        let s1 = fraisse_prefix(&a(), 6, 1, 2).unwrap().sequence;
        let s2 = fraisse_prefix(&a(), 6, 2, 2).unwrap().sequence;
        let ladder = intertwine(&a(), &s1, &s2, 2, true).unwrap();
        assert_eq!(ladder.depth(), 2);
    }

    #[test]
    fn intertwining_across_categories_is_an_error() {
        let s1 = fraisse_prefix(&a(), 2, 1, 2).unwrap().sequence;
        let s2 = fraisse_prefix(&CategorySpec::get(CategoryName::D), 2, 1, 2).unwrap().sequence;
        assert!(matches!(intertwine(&a(), &s1, &s2, 1, true), Err(CategoryError::Mismatch(..))));
    }
}
