//! Fans: spokes, fan-specific morphism properties, the tree of spokes and
//! the classification of fan sequences.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexSet};
use crate::relation::{MorphProperty, Morphism};
use crate::sequence::{
    Guarantee, ModificationOutcome, Property, Restriction, Sequence, SequenceError, Verdict, Witness,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("graph is not a fan")]
    NotAFan,
    #[error("no suffix of the prefix consists of fans")]
    NoFanLevels,
    #[error("level {0}: a spoke image is not inside a single spoke")]
    NotSpokeMonotone(usize),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FanProperty {
    SpokeMonotone,
    EndPreserving,
    EndDense,
    EndSplitting,
}

impl FanProperty {
    pub const ALL: [FanProperty; 4] = [
        FanProperty::SpokeMonotone,
        FanProperty::EndPreserving,
        FanProperty::EndDense,
        FanProperty::EndSplitting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FanProperty::SpokeMonotone => "spoke-monotone",
            FanProperty::EndPreserving => "end-preserving",
            FanProperty::EndDense => "end-dense",
            FanProperty::EndSplitting => "end-splitting",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for FanProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Root and spokes of a fan. Each spoke lists the root first and runs out
/// to its end; spokes are sorted by end label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanStructure {
    pub root: usize,
    pub spokes: Vec<Vec<usize>>,
}

impl FanStructure {
    pub fn spoke_set(&self, g: &Graph, i: usize) -> VertexSet {
        g.set(self.spokes[i].iter().copied())
    }

    pub fn end(&self, i: usize) -> usize {
        *self.spokes[i].last().expect("spokes are non-empty")
    }

    /// Spoke containing a non-root vertex.
    pub fn spoke_of(&self, v: usize) -> Option<usize> {
        self.spokes.iter().position(|s| s[1..].contains(&v))
    }

    /// Lengths counted in non-root vertices.
    pub fn lengths(&self) -> Vec<usize> {
        self.spokes.iter().map(|s| s.len() - 1).collect()
    }
}

pub fn fan_structure(g: &Graph) -> Result<FanStructure, FanError> {
    let root = g.classify().fan.ok_or(FanError::NotAFan)?;
    let mut spokes: Vec<Vec<usize>> = g
        .neighbors(root)
        .map(|first| {
            let mut spoke = vec![root, first];
            let (mut prev, mut cur) = (root, first);
            while let Some(next) = g.neighbors(cur).find(|&u| u != prev) {
                spoke.push(next);
                prev = cur;
                cur = next;
            }
            spoke
        })
        .collect();
    spokes.sort_by(|a, b| g.label(*a.last().unwrap()).cmp(g.label(*b.last().unwrap())));
    Ok(FanStructure { root, spokes })
}

/// Fan property check; both ends of the morphism must be fans.
pub fn fan_check(m: &Morphism, p: FanProperty) -> Result<bool, FanError> {
    let df = fan_structure(m.dom())?;
    let cf = fan_structure(m.cod())?;
    Ok(fan_check_with(m, p, &df, &cf))
}

pub(crate) fn fan_check_with(m: &Morphism, p: FanProperty, df: &FanStructure, cf: &FanStructure) -> bool {
    let (dom, cod) = (m.dom(), m.cod());
    let dom_ends = dom.ends();
    let cod_ends = cod.ends();
    match p {
        FanProperty::SpokeMonotone => {
            if *m.image_of(df.root) != cod.set([cf.root]) {
                return false;
            }
            (0..df.spokes.len()).all(|i| {
                let s = df.spoke_set(dom, i);
                let img = m.image(&s);
                (0..cf.spokes.len()).any(|j| {
                    let t = cf.spoke_set(cod, j);
                    img.is_subset(&t) && m.restrict(&s, &t).is_ok_and(|r| r.check(MorphProperty::Monotone))
                })
            })
        }
        FanProperty::EndPreserving => dom_ends.ones().all(|e| m.image_of(e).is_subset(&cod_ends)),
        FanProperty::EndDense => (0..cod.len()).all(|h| !m.row(h).is_disjoint(&dom_ends)),
        FanProperty::EndSplitting => cod_ends.ones().all(|e| {
            let mut below = m.row(e).clone();
            below.intersect_with(&dom_ends);
            below.count_ones(..) >= 2
        }),
    }
}

/// Spokes of every fan level and who descends from whom.
#[derive(Clone, Debug)]
pub struct SpokeTree {
    /// First level of the fan suffix.
    pub start: usize,
    /// Fan structure of levels `start..=N`.
    pub fans: Vec<FanStructure>,
    /// `parent[n - start][j]`: spoke of level `n - 1` that spoke `j` of level
    /// `n` succeeds; `None` for orphans (image is the root alone) and for
    /// every spoke of the first level.
    pub parent: Vec<Vec<Option<usize>>>,
}

impl SpokeTree {
    pub fn fan(&self, n: usize) -> &FanStructure {
        &self.fans[n - self.start]
    }

    pub fn parent(&self, n: usize, j: usize) -> Option<usize> {
        self.parent[n - self.start][j]
    }

    pub fn successors(&self, n: usize, i: usize) -> Vec<usize> {
        let level = &self.parent[n + 1 - self.start];
        (0..level.len()).filter(|&j| level[j] == Some(i)).collect()
    }

    pub fn orphans(&self, n: usize) -> Vec<usize> {
        if n == self.start {
            return Vec::new();
        }
        let level = &self.parent[n - self.start];
        (0..level.len()).filter(|&j| level[j].is_none()).collect()
    }
}

pub fn tree_of_spokes(s: &Sequence) -> Result<SpokeTree, FanError> {
    let top = s.last();
    let mut start = top + 1;
    while start > 0 && s.graph(start - 1).classify().fan.is_some() {
        start -= 1;
    }
    if start > top {
        return Err(FanError::NoFanLevels);
    }
    let fans: Vec<FanStructure> = (start..=top)
        .map(|n| fan_structure(s.graph(n)))
        .collect::<Result<_, _>>()?;
    let mut parent = vec![vec![None; fans[0].spokes.len()]];
    for n in start + 1..=top {
        let (lower, upper) = (&fans[n - 1 - start], &fans[n - start]);
        let (gl, gu) = (s.graph(n - 1), s.graph(n));
        let step = s.step(n - 1);
        let root = gl.set([lower.root]);
        let mut level = Vec::new();
        for j in 0..upper.spokes.len() {
            let img = step.image(&upper.spoke_set(gu, j));
            if img == root {
                level.push(None);
                continue;
            }
            let i = (0..lower.spokes.len())
                .find(|&i| img.is_subset(&lower.spoke_set(gl, i)))
                .ok_or(FanError::NotSpokeMonotone(n))?;
            level.push(Some(i));
        }
        parent.push(level);
    }
    Ok(SpokeTree { start, fans, parent })
}

/// A branch of spokes: degenerate below `start`, then one spoke per level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchOfSpokes {
    pub start: usize,
    pub spokes: Vec<usize>,
}

impl BranchOfSpokes {
    pub fn depth(&self) -> usize {
        self.start + self.spokes.len() - 1
    }
}

/// One branch per spoke of level `depth`, traced back through parents.
pub fn branches(s: &Sequence, depth: usize) -> Result<Vec<BranchOfSpokes>, FanError> {
    let tree = tree_of_spokes(s)?;
    branches_in(&tree, depth.min(s.last()))
}

pub fn branches_in(tree: &SpokeTree, depth: usize) -> Result<Vec<BranchOfSpokes>, FanError> {
    if depth < tree.start {
        return Err(FanError::NoFanLevels);
    }
    let mut out = Vec::new();
    for j in 0..tree.fan(depth).spokes.len() {
        let mut spokes = vec![j];
        let mut n = depth;
        let mut cur = j;
        while n > tree.start {
            match tree.parent(n, cur) {
                Some(p) => {
                    spokes.push(p);
                    cur = p;
                    n -= 1;
                }
                None => break,
            }
        }
        spokes.reverse();
        out.push(BranchOfSpokes { start: n, spokes });
    }
    Ok(out)
}

/// What a single branch of spokes looks like at the horizon.
#[derive(Clone, Debug)]
pub struct BranchReport {
    pub branch: BranchOfSpokes,
    pub core: Sequence,
    /// Co-bijective modification of the core, when one exists.
    pub modification: Option<Sequence>,
    pub unique: bool,
    /// End thread of the modification, as vertex indices of the original
    /// levels.
    pub endpoint_thread: Option<Vec<usize>>,
    pub nondegenerate: bool,
}

pub fn branch_analysis(s: &Sequence, b: &BranchOfSpokes) -> Result<BranchReport, FanError> {
    let tree = tree_of_spokes(s)?;
    let depth = b.depth().min(s.last());
    let top_fan = tree.fan(depth);
    let top_set = top_fan.spoke_set(s.graph(depth), *b.spokes.last().expect("non-empty branch"));
    let mut subsets: Vec<VertexSet> = Vec::new();
    for n in 0..=depth {
        if n >= b.start {
            let f = tree.fan(n);
            subsets.push(f.spoke_set(s.graph(n), b.spokes[n - b.start]));
        } else {
            subsets.push(s.composite(n, depth)?.image(&top_set));
        }
    }
    // Levels below the branch start only see the image of the top spoke.
    for n in (0..b.start).rev() {
        let above = subsets[n + 1].clone();
        subsets[n] = s.step(n).image(&above);
    }
    let prefix = s.subsequence(&(0..=depth).collect::<Vec<_>>())?;
    let restricted = match prefix.upper_restriction(&subsets)? {
        Restriction::Sequence(r) => r,
        Restriction::Lax { .. } => return Err(FanError::NotSpokeMonotone(b.start)),
    };
    let core = restricted.with_guarantees(Vec::new()).surjective_core().sequence;
    let (modification, unique) = if core.last() == 0 {
        (Some(core.clone()), true)
    } else {
        match core.cobijective_modification()? {
            ModificationOutcome::Modified(m) => (Some(m.sequence), m.unique),
            ModificationOutcome::NoModification { .. } => (None, false),
        }
    };
    let growing = s.guarantees.contains(&Guarantee::Growing);
    let nondegenerate = growing || modification.as_ref().is_some_and(|m| m.graph(m.last()).len() >= 2);
    let endpoint_thread = match (&modification, nondegenerate) {
        (Some(m), true) => endpoint_thread(s, &tree, m),
        _ => None,
    };
    Ok(BranchReport {
        branch: b.clone(),
        core,
        modification,
        unique,
        endpoint_thread,
        nondegenerate,
    })
}

fn endpoint_thread(s: &Sequence, tree: &SpokeTree, m: &Sequence) -> Option<Vec<usize>> {
    let mut thread = Vec::new();
    for n in 0..=m.last() {
        let g = m.graph(n);
        let orig = s.graph(n);
        let depth_of = |v: usize| -> usize {
            if n < tree.start {
                return 0;
            }
            let f = tree.fan(n);
            f.spokes.iter().find_map(|sp| sp.iter().position(|&x| x == v)).unwrap_or(0)
        };
        let far = g
            .ends()
            .ones()
            .map(|v| orig.index_of(g.label(v)).expect("labels survive restriction"))
            .max_by_key(|&v| (depth_of(v), std::cmp::Reverse(v)))?;
        thread.push(far);
    }
    let ok = thread.windows(2).enumerate().all(|(n, w)| s.step(n).relates(w[0], w[1]));
    ok.then_some(thread)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FanLimitKind {
    CantorFanEvidence,
    LelekEvidence,
    Negative,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct FanLimit {
    pub kind: FanLimitKind,
    /// First level of the fan suffix the analysis ran on.
    pub start: usize,
    pub evidence: Verdict,
}

/// Checks the prefix steps from the first fan level on: all co-bijective and
/// spoke-monotone, plus end-preserving for the Cantor route. The Cantor
/// route asks for a star-refining end-splitting subsequence; the Lelek
/// route for a star-refining end-dense end-splitting one.
pub fn classify_fan_limit(s: &Sequence, horizon: usize) -> Result<FanLimit, FanError> {
    let tree = tree_of_spokes(s)?;
    let top = horizon.min(s.last());
    if top <= tree.start {
        return Err(FanError::NoFanLevels);
    }
    let suffix = s.subsequence(&(tree.start..=top).collect::<Vec<_>>())?;
    let h = suffix.last();
    let mut in_l = true;
    let mut end_preserving = true;
    for n in 0..h {
        let (df, cf) = (tree.fan(tree.start + n + 1), tree.fan(tree.start + n));
        let step = suffix.step(n);
        in_l &= step.check(MorphProperty::CoBijective) && fan_check_with(step, FanProperty::SpokeMonotone, df, cf);
        end_preserving &= fan_check_with(step, FanProperty::EndPreserving, df, cf);
    }
    if !in_l {
        return Ok(FanLimit {
            kind: FanLimitKind::Unknown,
            start: tree.start,
            evidence: Verdict::Unknown {
                horizon: top,
                note: "steps are not all co-bijective and spoke-monotone".into(),
            },
        });
    }
    let mut parts = Vec::new();
    let sr = suffix.has_subsequence_in(MorphProperty::StarRefining.into(), h)?;
    parts.push(("star-refining subsequence".to_string(), sr));
    let wanted: Vec<Property> = if end_preserving {
        vec![MorphProperty::StarRefining.into(), FanProperty::EndSplitting.into()]
    } else {
        vec![
            MorphProperty::StarRefining.into(),
            FanProperty::EndDense.into(),
            FanProperty::EndSplitting.into(),
        ]
    };
    for p in &wanted[1..] {
        let v = suffix.has_subsequence_in(*p, h)?;
        parts.push((format!("{p} subsequence"), v));
    }
    parts.push(("joint subsequence".to_string(), joint_subsequence(&suffix, &wanted, h)));
    let evidence = Verdict::all(top, parts);
    let kind = match (&evidence, end_preserving) {
        (Verdict::Holds { .. }, true) => FanLimitKind::CantorFanEvidence,
        (Verdict::Holds { .. }, false) => FanLimitKind::LelekEvidence,
        (Verdict::FailsOnPrefix { .. }, _) => FanLimitKind::Negative,
        _ => FanLimitKind::Unknown,
    };
    Ok(FanLimit {
        kind,
        start: tree.start,
        evidence,
    })
}

/// Every `m < horizon` reaches some `n` whose composite has all properties.
pub fn joint_subsequence(s: &Sequence, ps: &[Property], horizon: usize) -> Verdict {
    let horizon = horizon.min(s.last());
    // Every property certified at some stride covers the levels that sit
    // too close to the horizon to be witnessed.
    let stride = ps.iter().map(|&p| s.stride_for(p)).collect::<Option<Vec<_>>>().and_then(|v| v.into_iter().max());
    let mut pairs = Vec::new();
    for m in 0..horizon {
        match (m + 1..=horizon).find(|&n| ps.iter().all(|p| p.check(s.comp(m, n)))) {
            Some(n) => pairs.push((m, n)),
            None if stride.is_some_and(|k| m + k > horizon) => {
                return Verdict::Holds {
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
                                    witness: Witness::Note {
                                        text: format!(
                                            "every composite over {} steps is guaranteed to qualify",
                                            stride.unwrap_or(1)
                                        ),
                                    },
                                },
                            ),
                        ],
                    },
                };
            }
            None => {
                if let Some(g) = ps.iter().find_map(|&p| s.guarantees_never(p)) {
                    return Verdict::FailsOnPrefix {
                        witness: Witness::Guarantee {
                            guarantee: g.clone(),
                            evidence: vec![(m, horizon, "no joint witness".into())],
                        },
                    };
                }
                return Verdict::Unknown {
                    horizon,
                    note: format!("no joint witness out of level {m}"),
                };
            }
        }
    }
    if pairs.is_empty() {
        return Verdict::Unknown {
            horizon,
            note: "no steps within the horizon".into(),
        };
    }
    Verdict::Holds {
        witness: Witness::Subsequence { pairs },
    }
}

/// Morphism from a fan onto the claw collapsing each spoke onto one claw
/// spoke, when the fan has at least three spokes. Spoke `i` goes to claw
/// spoke `min(i, 2)`; every non-root vertex goes to the claw end except the
/// first vertex of the spoke, which also relates to the root.
pub fn collapse_onto_claw(fan: &Arc<Graph>) -> Option<Morphism> {
    let f = fan_structure(fan).ok()?;
    if f.spokes.len() < 3 {
        return None;
    }
    let claw = Arc::new(Graph::fan(&[1, 1, 1]));
    let mut pairs = vec![(0, f.root)];
    for (i, spoke) in f.spokes.iter().enumerate() {
        let target = 1 + i.min(2);
        for (k, &v) in spoke.iter().enumerate().skip(1) {
            pairs.push((target, v));
            if k == 1 && spoke.len() > 2 {
                pairs.push((0, v));
            }
        }
    }
    Morphism::new(fan.clone(), claw, pairs).ok()
}
