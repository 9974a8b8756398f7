//! Finite prefixes of graph sequences and the operations that only need the
//! prefix: composites, subsequences, restrictions, cores and modifications.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fan::{fan_check, FanProperty};
use crate::graph::{Graph, VertexSet};
use crate::relation::{same_graph, MorphProperty, Morphism};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("step {0} does not connect level {1} to level {0}")]
    ChainMismatch(usize, usize),
    #[error("step {0} is not co-surjective")]
    NotCoSurjective(usize),
    #[error("steps and graphs disagree in number")]
    Shape,
    #[error("level {0} outside the prefix")]
    OutOfRange(usize),
    #[error("index list is not strictly increasing")]
    NotIncreasing,
    #[error("restriction at level {0} is empty")]
    EmptyLevel(usize),
    #[error("step {0} is not surjective")]
    NotSurjective(usize),
    #[error("{0} is not an ideal property")]
    NotAnIdeal(Property),
    #[error("level {0} has too many optional vertices for an exact minimal dense search")]
    TooManyOptional(usize),
    #[error("the prefix is too short for the requested operation")]
    TooShort,
}

/// A morphism property or a fan property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Property {
    Morph(MorphProperty),
    Fan(FanProperty),
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Morph(p) => p.name(),
            Property::Fan(p) => p.name(),
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        MorphProperty::from_name(s)
            .map(Property::Morph)
            .or_else(|| FanProperty::from_name(s).map(Property::Fan))
    }

    pub fn check(self, m: &Morphism) -> bool {
        match self {
            Property::Morph(p) => m.check(p),
            Property::Fan(p) => fan_check(m, p).unwrap_or(false),
        }
    }

    /// Properties accepted by [`Sequence::has_subsequence_in`].
    pub fn is_ideal(self) -> bool {
        use MorphProperty::*;
        matches!(
            self,
            Property::Morph(AntiInjective | StrictlyAntiInjective | StarRefining | EdgeWitnessing)
                | Property::Fan(FanProperty::EndDense | FanProperty::EndSplitting)
        )
    }

    /// A short account of why `m` fails the property, if it does.
    pub fn violation(self, m: &Morphism) -> Option<String> {
        use MorphProperty::*;
        if self.check(m) {
            return None;
        }
        let (dom, cod) = (m.dom(), m.cod());
        let found = match self {
            Property::Morph(AntiInjective) => (0..cod.len())
                .find(|&h| m.row(h).count_ones(..) < 2)
                .map(|h| format!("|{}^⊐| = {}", cod.label(h), m.row(h).count_ones(..))),
            Property::Morph(StrictlyAntiInjective) => (0..cod.len()).find_map(|h| {
                let k = m.strict_preimage(&cod.set([h])).count_ones(..);
                (k < 2).then(|| format!("|{}_⊐| = {k}", cod.label(h)))
            }),
            Property::Morph(StarRefining) => (0..dom.len())
                .find(|&g| !m.rows().iter().any(|r| dom.star(g).is_subset(r)))
                .map(|g| format!("star of {} lies in no preimage", dom.label(g))),
            Property::Morph(EdgeWitnessing) => cod.edges().into_iter().find_map(|(a, b)| {
                let mut c = m.row(a).clone();
                c.intersect_with(m.row(b));
                c.is_clear()
                    .then(|| format!("edge {}~{} has no common preimage", cod.label(a), cod.label(b)))
            }),
            _ => None,
        };
        Some(found.unwrap_or_else(|| format!("not {}", self.name())))
    }
}

impl From<MorphProperty> for Property {
    fn from(p: MorphProperty) -> Self {
        Property::Morph(p)
    }
}

impl From<FanProperty> for Property {
    fn from(p: FanProperty) -> Self {
        Property::Fan(p)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<String> for Property {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        Property::from_name(&s).ok_or_else(|| format!("unknown property {s:?}"))
    }
}

impl From<Property> for String {
    fn from(p: Property) -> String {
        p.name().to_string()
    }
}

/// Shape every level of a generated sequence is guaranteed to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Discrete,
    Path,
    Cycle,
    Fan,
    Connected,
}

/// Facts a generator certifies for every level, including those beyond the
/// stored prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Guarantee {
    /// Every step has the property.
    EveryStep { property: Property },
    /// Every composite spanning `stride` steps has the property.
    Stride { property: Property, stride: usize },
    /// No composite over one or more steps ever has the property.
    Never { property: Property, reason: String },
    /// The surjective core is already visible at the end of any prefix.
    CoreStable,
    /// The levels grow without bound.
    Growing,
    /// Every level has this shape.
    EveryGraph { shape: Shape },
}

/// Where a sequence came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn named(generator: &str) -> Self {
        Provenance {
            generator: generator.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

/// Evidence attached to a [`Verdict`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Pairs `(m, n)` with the composite from level `n` to level `m` in the
    /// requested class.
    Subsequence { pairs: Vec<(usize, usize)> },
    /// A declared guarantee, with the prefix evidence that triggered it.
    Guarantee { guarantee: Guarantee, evidence: Vec<(usize, usize, String)> },
    /// Something observed at one level.
    Level { level: usize, detail: String },
    /// A common lower bound in the induced poset.
    LowerBound { level: usize, vertex: String },
    /// Two vertices of one level that are not adjacent.
    Apart { level: usize, a: String, b: String },
    /// A thread, one label per level.
    Thread { labels: Vec<String> },
    /// A morphism from a level onto a target.
    Morphism { level: usize, pairs: Vec<(String, String)> },
    /// Named sub-verdicts.
    All { parts: Vec<(String, Verdict)> },
    Note { text: String },
}

/// Finite-horizon answer to a question about all levels.
///
/// `Holds` means the condition was verified on the prefix up to the horizon;
/// `FailsOnPrefix` carries a counterexample that later levels cannot repair.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Holds { witness: Witness },
    FailsOnPrefix { witness: Witness },
    Unknown { horizon: usize, note: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::FailsOnPrefix { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "Holds",
            Verdict::FailsOnPrefix { .. } => "FailsOnPrefix",
            Verdict::Unknown { .. } => "Unknown",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds { witness } | Verdict::FailsOnPrefix { witness } => Some(witness),
            Verdict::Unknown { .. } => None,
        }
    }

    /// Conjunction: any failure fails, else any unknown is unknown.
    pub fn all(horizon: usize, parts: Vec<(String, Verdict)>) -> Verdict {
        let witness = Witness::All { parts: parts.clone() };
        if parts.iter().any(|(_, v)| v.fails()) {
            Verdict::FailsOnPrefix { witness }
        } else if parts.iter().all(|(_, v)| v.holds()) {
            Verdict::Holds { witness }
        } else {
            let note = parts
                .iter()
                .filter(|(_, v)| v.is_unknown())
                .map(|(n, _)| n.as_str())
                .collect::<Vec<_>>()
                .join(", ");
            Verdict::Unknown {
                horizon,
                note: format!("undecided: {note}"),
            }
        }
    }
}

/// A prefix `G_0, ..., G_N` with steps from `G_{n+1}` to `G_n`.
pub struct Sequence {
    graphs: Vec<Arc<Graph>>,
    steps: Vec<Morphism>,
    pub provenance: Provenance,
    pub guarantees: Vec<Guarantee>,
    composites: Vec<Vec<OnceLock<Morphism>>>,
}

impl Clone for Sequence {
    fn clone(&self) -> Self {
        Sequence {
            graphs: self.graphs.clone(),
            steps: self.steps.clone(),
            provenance: self.provenance.clone(),
            guarantees: self.guarantees.clone(),
            composites: self.composites.clone(),
        }
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence")
            .field("sizes", &self.graphs.iter().map(|g| g.len()).collect::<Vec<_>>())
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        self.graphs.len() == other.graphs.len()
            && self.graphs.iter().zip(&other.graphs).all(|(a, b)| same_graph(a, b))
            && self.steps == other.steps
    }
}

/// Outcome of restricting a sequence levelwise.
#[derive(Debug, Clone)]
pub enum Restriction {
    Sequence(Sequence),
    Lax { lax: LaxSequence, failure: LaxFailure },
}

/// Levels with a relation for every pair `m <= n`, coherent only up to
/// containment.
#[derive(Debug, Clone)]
pub struct LaxSequence {
    pub graphs: Vec<Arc<Graph>>,
    /// `rels[m][n - m]` goes from level `n` to level `m`.
    pub rels: Vec<Vec<Morphism>>,
}

impl LaxSequence {
    pub fn rel(&self, m: usize, n: usize) -> &Morphism {
        &self.rels[m][n - m]
    }
}

/// Why a restriction is not a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LaxFailure {
    /// `cod_vertex` at level `outer` relates to `dom_vertex` at level `inner`
    /// in the restricted composite but not through level `mid`.
    NotCoherent {
        outer: usize,
        mid: usize,
        inner: usize,
        cod_vertex: String,
        dom_vertex: String,
    },
    /// A vertex at `level` has no image in the restricted level below.
    NotCoSurjective { level: usize, vertex: String },
}

/// Largest surjective upper restriction visible at the end of the prefix.
#[derive(Debug, Clone)]
pub struct Core {
    pub sequence: Sequence,
    pub kept: Vec<VertexSet>,
    pub horizon_approximate: bool,
}

/// A co-bijective modification on levels `0..N` (the final prefix level only
/// serves as the density horizon and is dropped).
#[derive(Debug, Clone)]
pub struct Modification {
    pub sequence: Sequence,
    pub kept: Vec<VertexSet>,
    /// Each chosen set is the unique minimal dense subset of its level.
    pub unique: bool,
    pub horizon_approximate: bool,
}

#[derive(Debug, Clone)]
pub enum ModificationOutcome {
    Modified(Modification),
    NoModification { failure: LaxFailure, kept: Vec<VertexSet> },
}

impl ModificationOutcome {
    pub fn modified(&self) -> Option<&Modification> {
        match self {
            ModificationOutcome::Modified(m) => Some(m),
            ModificationOutcome::NoModification { .. } => None,
        }
    }
}

/// Optional vertices beyond this make the exact minimal dense search refuse.
const MAX_OPTIONAL: usize = 22;

impl Sequence {
    pub fn new(graphs: Vec<Arc<Graph>>, steps: Vec<Morphism>) -> Result<Self, SequenceError> {
        if graphs.is_empty() || graphs.len() != steps.len() + 1 {
            return Err(SequenceError::Shape);
        }
        for (n, step) in steps.iter().enumerate() {
            if !same_graph(step.cod(), &graphs[n]) || !same_graph(step.dom(), &graphs[n + 1]) {
                return Err(SequenceError::ChainMismatch(n + 1, n));
            }
            if !step.check(MorphProperty::CoSurjective) {
                return Err(SequenceError::NotCoSurjective(n));
            }
        }
        let composites = (0..graphs.len())
            .map(|m| (m..graphs.len()).map(|_| OnceLock::new()).collect())
            .collect();
        Ok(Sequence {
            graphs,
            steps,
            provenance: Provenance::default(),
            guarantees: Vec::new(),
            composites,
        })
    }

    /// Builds from a first graph and steps, reading levels off the steps.
    pub fn from_steps(first: Arc<Graph>, steps: Vec<Morphism>) -> Result<Self, SequenceError> {
        let mut graphs = vec![first];
        graphs.extend(steps.iter().map(|s| s.dom().clone()));
        Self::new(graphs, steps)
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn with_guarantees(mut self, g: Vec<Guarantee>) -> Self {
        self.guarantees = g;
        self
    }

    /// Index of the last level.
    pub fn last(&self) -> usize {
        self.graphs.len() - 1
    }

    pub fn levels(&self) -> usize {
        self.graphs.len()
    }

    pub fn graph(&self, n: usize) -> &Arc<Graph> {
        &self.graphs[n]
    }

    pub fn graphs(&self) -> &[Arc<Graph>] {
        &self.graphs
    }

    /// Step from level `n + 1` to level `n`.
    pub fn step(&self, n: usize) -> &Morphism {
        &self.steps[n]
    }

    pub fn steps(&self) -> &[Morphism] {
        &self.steps
    }

    /// Composite from level `n` to level `m`, for `m <= n`.
    pub fn composite(&self, m: usize, n: usize) -> Result<&Morphism, SequenceError> {
        if n > self.last() {
            return Err(SequenceError::OutOfRange(n));
        }
        if m > n {
            return Err(SequenceError::OutOfRange(m));
        }
        Ok(self.comp(m, n))
    }

    pub(crate) fn comp(&self, m: usize, n: usize) -> &Morphism {
        self.composites[m][n - m].get_or_init(|| {
            if m == n {
                Morphism::identity(self.graphs[m].clone())
            } else if n == m + 1 {
                self.steps[m].clone()
            } else {
                Morphism::compose(self.comp(m, n - 1), &self.steps[n - 1]).expect("chain checked")
            }
        })
    }

    pub fn guarantees_never(&self, p: Property) -> Option<&Guarantee> {
        self.guarantees
            .iter()
            .find(|g| matches!(g, Guarantee::Never { property, .. } if *property == p))
    }

    /// Smallest number of steps after which every composite is guaranteed
    /// to have `p`.
    pub fn stride_for(&self, p: Property) -> Option<usize> {
        self.guarantees
            .iter()
            .filter_map(|g| match g {
                Guarantee::EveryStep { property } if *property == p => Some(1),
                Guarantee::Stride { property, stride } if *property == p => Some(*stride),
                _ => None,
            })
            .min()
    }

    pub fn guarantees_shape(&self, s: Shape) -> bool {
        self.guarantees
            .iter()
            .any(|g| matches!(g, Guarantee::EveryGraph { shape } if *shape == s))
    }

    pub fn subsequence(&self, phi: &[usize]) -> Result<Sequence, SequenceError> {
        if phi.is_empty() || phi.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SequenceError::NotIncreasing);
        }
        if let Some(&n) = phi.iter().find(|&&n| n > self.last()) {
            return Err(SequenceError::OutOfRange(n));
        }
        let graphs = phi.iter().map(|&n| self.graphs[n].clone()).collect();
        let steps = phi.windows(2).map(|w| self.comp(w[0], w[1]).clone()).collect();
        let mut s = Sequence::new(graphs, steps)?;
        s.provenance = self.provenance.clone();
        s.provenance.params.insert(
            "subsequence".into(),
            phi.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        );
        // Step-wise guarantees survive only a contiguous run of levels.
        let contiguous = phi.windows(2).all(|w| w[1] == w[0] + 1);
        s.guarantees = self
            .guarantees
            .iter()
            .filter(|g| {
                contiguous
                    || matches!(g, Guarantee::Never { .. } | Guarantee::Growing | Guarantee::EveryGraph { .. })
            })
            .cloned()
            .collect();
        Ok(s)
    }

    /// Whether every `m < horizon` has some `n` in `(m, horizon]` with the
    /// composite from `n` to `m` in the ideal.
    pub fn has_subsequence_in(&self, p: Property, horizon: usize) -> Result<Verdict, SequenceError> {
        if !p.is_ideal() {
            return Err(SequenceError::NotAnIdeal(p));
        }
        let horizon = horizon.min(self.last());
        for m in 0..horizon {
            for n in m + 1..=horizon {
                // Warm the cache sequentially; property checks run in parallel.
                let _ = self.comp(m, n);
            }
        }
        let found: Vec<Option<usize>> = (0..horizon)
            .into_par_iter()
            .map(|m| (m + 1..=horizon).find(|&n| p.check(self.comp(m, n))))
            .collect();
        if horizon > 0 && found.iter().all(Option::is_some) {
            let pairs = found.iter().enumerate().map(|(m, n)| (m, n.unwrap())).collect();
            return Ok(Verdict::Holds {
                witness: Witness::Subsequence { pairs },
            });
        }
        let pairs: Vec<(usize, usize)> = found
            .iter()
            .enumerate()
            .filter_map(|(m, n)| n.map(|n| (m, n)))
            .collect();
        let missing: Vec<usize> = (0..horizon).filter(|&m| found[m].is_none()).collect();
        // Levels too close to the horizon for a declared stride are covered
        // by the guarantee; all earlier ones must have been witnessed.
        if let Some(k) = self.stride_for(p) {
            if missing.iter().all(|&m| m + k > horizon) {
                let guarantee = if k == 1 {
                    Guarantee::EveryStep { property: p }
                } else {
                    Guarantee::Stride { property: p, stride: k }
                };
                return Ok(Verdict::Holds {
                    witness: Witness::All {
                        parts: vec![
                            (
                                "prefix".into(),
                                Verdict::Holds {
                                    witness: Witness::Subsequence { pairs },
                                },
                            ),
                            (
                                "beyond the horizon".into(),
                                Verdict::Holds {
                                    witness: Witness::Guarantee {
                                        guarantee,
                                        evidence: Vec::new(),
                                    },
                                },
                            ),
                        ],
                    },
                });
            }
        }
        let stuck = missing.first().copied().unwrap_or(0);
        if let Some(g) = self.guarantees_never(p) {
            let evidence = (stuck + 1..=horizon)
                .map(|n| (stuck, n, p.violation(self.comp(stuck, n)).unwrap_or_default()))
                .collect();
            return Ok(Verdict::FailsOnPrefix {
                witness: Witness::Guarantee {
                    guarantee: g.clone(),
                    evidence,
                },
            });
        }
        Ok(Verdict::Unknown {
            horizon,
            note: if horizon == 0 {
                "no steps within the horizon".into()
            } else {
                format!("no {p} composite out of level {stuck} within the horizon")
            },
        })
    }

    /// Edge preservation (built in), edge surjectivity of the steps and an
    /// edge-witnessing subsequence.
    pub fn is_edge_faithful(&self, horizon: usize) -> Verdict {
        let horizon = horizon.min(self.last());
        let surj = match (0..horizon).find(|&n| !self.steps[n].check(MorphProperty::EdgeSurjective)) {
            Some(n) => Verdict::FailsOnPrefix {
                witness: Witness::Level {
                    level: n,
                    detail: format!("step {} -> {n} is not edge-surjective", n + 1),
                },
            },
            None => Verdict::Holds {
                witness: Witness::Note {
                    text: format!("steps below level {horizon} are edge-surjective"),
                },
            },
        };
        let witnessing = self
            .has_subsequence_in(MorphProperty::EdgeWitnessing.into(), horizon)
            .expect("edge-witnessing is an ideal");
        Verdict::all(
            horizon,
            vec![
                (
                    "edge-preserving".into(),
                    Verdict::Holds {
                        witness: Witness::Note {
                            text: "morphisms are edge-preserving by construction".into(),
                        },
                    },
                ),
                ("edge-surjective".into(), surj),
                ("edge-witnessing subsequence".into(), witnessing),
            ],
        )
    }

    pub fn is_surjective(&self) -> bool {
        self.steps.iter().all(|s| s.check(MorphProperty::Surjective))
    }

    /// Levelwise restriction to `subsets`, composites restricted too.
    pub fn upper_restriction(&self, subsets: &[VertexSet]) -> Result<Restriction, SequenceError> {
        self.restriction_upto(subsets, self.last())
    }

    fn restriction_upto(&self, subsets: &[VertexSet], top: usize) -> Result<Restriction, SequenceError> {
        if subsets.len() <= top {
            return Err(SequenceError::Shape);
        }
        if let Some(n) = (0..=top).find(|&n| subsets[n].is_clear()) {
            return Err(SequenceError::EmptyLevel(n));
        }
        let mut rels: Vec<Vec<Morphism>> = Vec::new();
        for m in 0..=top {
            let row = (m..=top)
                .map(|n| self.comp(m, n).restrict(&subsets[n], &subsets[m]).expect("non-empty"))
                .collect();
            rels.push(row);
        }
        let lax = LaxSequence {
            graphs: (0..=top).map(|n| rels[n][0].cod().clone()).collect(),
            rels,
        };
        for n in 1..=top {
            let step = lax.rel(n - 1, n);
            if let Some(g) = (0..step.dom().len()).find(|&g| step.image_of(g).is_clear()) {
                let failure = LaxFailure::NotCoSurjective {
                    level: n,
                    vertex: step.dom().label(g).to_string(),
                };
                return Ok(Restriction::Lax { lax, failure });
            }
        }
        for n in 2..=top {
            for m in 0..n - 1 {
                let via = Morphism::compose(lax.rel(m, n - 1), lax.rel(n - 1, n)).expect("chain");
                let direct = lax.rel(m, n);
                if via != *direct {
                    let (h, g) = direct
                        .pairs()
                        .into_iter()
                        .find(|&(h, g)| !via.relates(h, g))
                        .expect("restrictions only lose pairs through the middle");
                    let failure = LaxFailure::NotCoherent {
                        outer: m,
                        mid: n - 1,
                        inner: n,
                        cod_vertex: direct.cod().label(h).to_string(),
                        dom_vertex: direct.dom().label(g).to_string(),
                    };
                    return Ok(Restriction::Lax { lax, failure });
                }
            }
        }
        let steps = (0..top).map(|n| lax.rel(n, n + 1).clone()).collect();
        let seq = Sequence::new(lax.graphs.clone(), steps)?.with_provenance(self.provenance.clone());
        Ok(Restriction::Sequence(seq))
    }

    /// `H_n = G_N^{⊏ⁿ_N}`.
    pub fn surjective_core(&self) -> Core {
        let top = self.last();
        let kept: Vec<VertexSet> = (0..=top)
            .map(|n| self.comp(n, top).image(&self.graphs[top].all()))
            .collect();
        let sequence = match self.upper_restriction(&kept).expect("images are non-empty") {
            Restriction::Sequence(s) => s,
            Restriction::Lax { .. } => unreachable!("upper restrictions are sequences"),
        };
        let stable = self.guarantees.contains(&Guarantee::CoreStable);
        Core {
            sequence: sequence.with_guarantees(self.guarantees.clone()),
            kept,
            horizon_approximate: !stable && top > 0,
        }
    }

    /// Whether `h ⊆ G_m` is dense: some level `k <= N` is covered by its
    /// preimage.
    pub fn is_dense(&self, m: usize, h: &VertexSet) -> bool {
        (m..=self.last()).any(|k| {
            let pre = self.comp(m, k).preimage(h);
            pre.count_ones(..) == self.graphs[k].len()
        })
    }

    /// Minimum-cardinality dense subset of `within` at level `m`, least in
    /// lexicographic order; also whether the forced vertices alone are dense.
    pub fn minimal_dense(&self, m: usize, within: &VertexSet) -> Result<Option<(VertexSet, bool)>, SequenceError> {
        if !self.is_dense(m, within) {
            return Ok(None);
        }
        let mut forced = self.graphs[m].empty_set();
        let mut optional = Vec::new();
        for g in within.ones() {
            let mut rest = within.clone();
            rest.set(g, false);
            if self.is_dense(m, &rest) {
                optional.push(g);
            } else {
                forced.insert(g);
            }
        }
        if self.is_dense(m, &forced) {
            return Ok(Some((forced, true)));
        }
        if optional.len() > MAX_OPTIONAL {
            return Err(SequenceError::TooManyOptional(m));
        }
        for size in 1..=optional.len() {
            let mut pick: Vec<usize> = (0..size).collect();
            loop {
                let mut h = forced.clone();
                for &i in &pick {
                    h.insert(optional[i]);
                }
                if self.is_dense(m, &h) {
                    return Ok(Some((h, false)));
                }
                if !next_combination(&mut pick, optional.len()) {
                    break;
                }
            }
        }
        unreachable!("the whole set is dense")
    }

    /// Greedy minimal dense lax-restriction, kept only when it is a sequence.
    pub fn cobijective_modification(&self) -> Result<ModificationOutcome, SequenceError> {
        if let Some(n) = (0..self.steps.len()).find(|&n| !self.steps[n].check(MorphProperty::Surjective)) {
            return Err(SequenceError::NotSurjective(n));
        }
        let top = self.last();
        if top == 0 {
            return Err(SequenceError::TooShort);
        }
        let mut kept: Vec<VertexSet> = Vec::new();
        let mut unique = true;
        let mut within = self.graphs[0].all();
        for n in 0..top {
            let (h, forced_dense) = self
                .minimal_dense(n, &within)?
                .expect("children of a dense set are dense");
            // Unique when the forced vertices of the whole level are dense
            // and coincide with the chosen set.
            let whole = self.minimal_dense(n, &self.graphs[n].all())?.expect("level is dense");
            unique &= forced_dense && whole.1 && whole.0 == h;
            within = self.steps[n].preimage(&h);
            kept.push(h);
        }
        let approximate = !self.guarantees.contains(&Guarantee::CoreStable);
        let mut padded = kept.clone();
        padded.push(self.graphs[top].all());
        match self.restriction_upto(&padded, top - 1)? {
            Restriction::Sequence(s) => Ok(ModificationOutcome::Modified(Modification {
                sequence: s,
                kept,
                unique,
                horizon_approximate: approximate,
            })),
            Restriction::Lax { failure, .. } => Ok(ModificationOutcome::NoModification { failure, kept }),
        }
    }
}

/// Advances `pick` to the next `k`-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    for i in (0..k).rev() {
        if pick[i] < n - k + i {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
