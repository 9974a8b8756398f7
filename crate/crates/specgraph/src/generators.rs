//! Named constructions of concrete sequences.
//!
//! Every generator returns the prefix `G_0, ..., G_N` for a requested `N`
//! together with the guarantees it certifies for all levels.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::clique::{clique_graph, membership_of, CliqueError};
use crate::fan::{fan_check, FanProperty};
use crate::graph::Graph;
use crate::relation::{MorphProperty, Morphism, MorphismError};
use crate::sequence::{Guarantee, Property, Provenance, Sequence, SequenceError, Shape};

/// Largest level any generator will build.
pub const MAX_LEVEL_VERTICES: usize = 1 << 21;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("bad parameter {name:?}: {reason}")]
    BadParam { name: String, reason: String },
    #[error("level {level} would have {vertices} vertices, above the limit of {MAX_LEVEL_VERTICES}")]
    TooLarge { level: usize, vertices: usize },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Clique(#[from] CliqueError),
}

fn bad(name: &str, reason: impl ToString) -> GeneratorError {
    GeneratorError::BadParam {
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorName {
    CantorDoubling,
    ArcDyadic,
    CliqueIteration,
    EdgeSplittingSeq,
    CycleRoots,
    CantorFan,
    Lelek,
    NastyFan,
    ModificationPatterns,
    ModificationFail,
    Constant,
}

impl GeneratorName {
    pub const ALL: [GeneratorName; 11] = [
        GeneratorName::CantorDoubling,
        GeneratorName::ArcDyadic,
        GeneratorName::CliqueIteration,
        GeneratorName::EdgeSplittingSeq,
        GeneratorName::CycleRoots,
        GeneratorName::CantorFan,
        GeneratorName::Lelek,
        GeneratorName::NastyFan,
        GeneratorName::ModificationPatterns,
        GeneratorName::ModificationFail,
        GeneratorName::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorName::CantorDoubling => "cantor_doubling",
            GeneratorName::ArcDyadic => "arc_dyadic",
            GeneratorName::CliqueIteration => "clique_iteration",
            GeneratorName::EdgeSplittingSeq => "edge_splitting_seq",
            GeneratorName::CycleRoots => "cycle_roots",
            GeneratorName::CantorFan => "cantor_fan",
            GeneratorName::Lelek => "lelek",
            GeneratorName::NastyFan => "nasty_fan",
            GeneratorName::ModificationPatterns => "modification_patterns",
            GeneratorName::ModificationFail => "modification_fail",
            GeneratorName::Constant => "constant",
        }
    }

    /// Accepted `--param` keys with their defaults.
    pub fn params(self) -> &'static [(&'static str, &'static str)] {
        match self {
            GeneratorName::EdgeSplittingSeq => &[("graph", "P2")],
            GeneratorName::Constant => &[("graph", "P2")],
            GeneratorName::CantorFan => &[("alpha", "n"), ("beta", "n")],
            GeneratorName::ModificationPatterns => &[("variant", "1")],
            _ => &[],
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            GeneratorName::CantorDoubling => "discrete levels of size 2^n with prefix projections",
            GeneratorName::ArcDyadic => "paths of dyadic intervals ordered by containment",
            GeneratorName::CliqueIteration => "iterated clique graphs of a single edge with membership steps",
            GeneratorName::EdgeSplittingSeq => "iterated edge splitting of a seed graph",
            GeneratorName::CycleRoots => "cycles of length 2^(n+2) with doubling steps",
            GeneratorName::CantorFan => "fans from products of dyadic interval covers and Cantor cylinders",
            GeneratorName::Lelek => "truncated clique-iteration fans with end-dense steps",
            GeneratorName::NastyFan => "fans with one short spoke that never grows",
            GeneratorName::ModificationPatterns => "two-vertex paths with end threads",
            GeneratorName::ModificationFail => "a surjective sequence without a co-bijective modification",
            GeneratorName::Constant => "a single graph repeated with identity steps",
        }
    }
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorName {
    type Err = GeneratorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        GeneratorName::ALL
            .into_iter()
            .find(|g| g.name() == key)
            .ok_or_else(|| GeneratorError::UnknownGenerator(s.to_string()))
    }
}

/// Builds levels `0..=levels` of the named sequence.
pub fn generate(name: GeneratorName, levels: usize, params: &BTreeMap<String, String>) -> Result<Sequence, GeneratorError> {
    let allowed = name.params();
    if let Some(k) = params.keys().find(|k| !allowed.iter().any(|(a, _)| a == k)) {
        return Err(bad(k, format!("{name} takes no such parameter")));
    }
    let get = |key: &str| -> &str {
        params
            .get(key)
            .map(String::as_str)
            .or_else(|| allowed.iter().find(|(a, _)| *a == key).map(|(_, d)| *d))
            .expect("declared parameter")
    };
    let s = match name {
        GeneratorName::CantorDoubling => cantor_doubling(levels)?,
        GeneratorName::ArcDyadic => arc_dyadic(levels)?,
        GeneratorName::CliqueIteration => clique_iteration(levels)?,
        GeneratorName::EdgeSplittingSeq => edge_splitting_seq(&parse_graph(get("graph"))?, levels)?,
        GeneratorName::CycleRoots => cycle_roots(levels)?,
        GeneratorName::CantorFan => {
            let alpha = Progression::parse("alpha", get("alpha"), levels)?;
            let beta = Progression::parse("beta", get("beta"), levels)?;
            cantor_fan(levels, &alpha, &beta)?
        }
        GeneratorName::Lelek => lelek(levels)?,
        GeneratorName::NastyFan => nasty_fan(levels)?,
        GeneratorName::ModificationPatterns => {
            let variant = match get("variant") {
                "1" => 1,
                "2" => 2,
                other => return Err(bad("variant", format!("expected 1 or 2, got {other:?}"))),
            };
            modification_patterns(levels, variant)?
        }
        GeneratorName::ModificationFail => modification_fail(levels)?,
        GeneratorName::Constant => constant(&parse_graph(get("graph"))?, levels)?,
    };
    Ok(s)
}

/// Reads `P<n>`, `C<n>`, `K<n>`, `D<n>`, `claw` or `fan:<len>,<len>,...`.
pub fn parse_graph(spec: &str) -> Result<Graph, GeneratorError> {
    let spec = spec.trim();
    let err = |why: &str| bad("graph", format!("{spec:?}: {why}"));
    if spec.eq_ignore_ascii_case("claw") {
        return Ok(Graph::fan(&[1, 1, 1]));
    }
    if let Some(rest) = spec.strip_prefix("fan:") {
        let lens: Vec<usize> = rest
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| err("spoke lengths must be integers"))?;
        if lens.len() < 3 || lens.contains(&0) {
            return Err(err("a fan needs at least three non-empty spokes"));
        }
        return Ok(Graph::fan(&lens));
    }
    let mut chars = spec.chars();
    let kind = chars.next().ok_or_else(|| err("empty"))?.to_ascii_uppercase();
    let n: usize = chars.as_str().parse().map_err(|_| err("expected a size after the letter"))?;
    if n == 0 {
        return Err(err("graphs need at least one vertex"));
    }
    match kind {
        'P' => Ok(Graph::path(n)),
        'K' => Ok(Graph::complete(n)),
        'D' => Ok(Graph::discrete(n)),
        'C' if n >= 3 => Ok(Graph::cycle(n)),
        'C' => Err(err("cycles need at least three vertices")),
        _ => Err(err("unknown graph family")),
    }
}

/// Strictly increasing `ω → ω`, as `<c>n`, `<c>n+<b>` or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Progression {
    pub text: String,
    values: Vec<usize>,
}

impl Progression {
    pub fn parse(name: &str, text: &str, levels: usize) -> Result<Self, GeneratorError> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let values: Vec<usize> = if let Some((coef, rest)) = t.split_once('n') {
            let c: usize = if coef.is_empty() {
                1
            } else {
                coef.parse().map_err(|_| bad(name, format!("bad coefficient in {text:?}")))?
            };
            let b: usize = match rest.strip_prefix('+') {
                Some(b) => b.parse().map_err(|_| bad(name, format!("bad offset in {text:?}")))?,
                None if rest.is_empty() => 0,
                None => return Err(bad(name, format!("cannot read {text:?}"))),
            };
            (0..=levels).map(|n| c * n + b).collect()
        } else {
            t.split(',')
                .map(|v| v.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(name, format!("expected a list of integers or a form like 2n+1, got {text:?}")))?
        };
        if values.len() <= levels {
            return Err(bad(name, format!("needs {} values, got {}", levels + 1, values.len())));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad(name, "must be strictly increasing"));
        }
        if values[levels] > 20 {
            return Err(bad(name, "values above 20 are out of reach"));
        }
        Ok(Progression {
            text: text.to_string(),
            values,
        })
    }

    pub fn at(&self, n: usize) -> usize {
        self.values[n]
    }
}

fn guard(level: usize, vertices: usize) -> Result<(), GeneratorError> {
    if vertices > MAX_LEVEL_VERTICES {
        return Err(GeneratorError::TooLarge { level, vertices });
    }
    Ok(())
}

fn every(ps: &[MorphProperty]) -> impl Iterator<Item = Guarantee> + '_ {
    ps.iter().map(|&p| Guarantee::EveryStep { property: p.into() })
}

fn stride(p: impl Into<Property>, k: usize) -> Guarantee {
    Guarantee::Stride {
        property: p.into(),
        stride: k,
    }
}

fn never(p: impl Into<Property>, reason: &str) -> Guarantee {
    Guarantee::Never {
        property: p.into(),
        reason: reason.to_string(),
    }
}

fn shaped(s: Shape) -> Guarantee {
    Guarantee::EveryGraph { shape: s }
}

fn finish(graphs: Vec<Arc<Graph>>, steps: Vec<Morphism>, prov: Provenance, g: Vec<Guarantee>) -> Result<Sequence, GeneratorError> {
    Ok(Sequence::new(graphs, steps)?.with_provenance(prov).with_guarantees(g))
}

/// Relation from `dom` onto `cod` given by the image of each domain vertex.
fn by_images(dom: &Arc<Graph>, cod: &Arc<Graph>, images: impl Fn(usize) -> Vec<usize>) -> Result<Morphism, MorphismError> {
    let pairs: Vec<(usize, usize)> = (0..dom.len()).flat_map(|g| images(g).into_iter().map(move |h| (h, g))).collect();
    Morphism::new(dom.clone(), cod.clone(), pairs)
}

/// Positions `0..len` of a path: even `2k` goes to `k`, odd `2k+1` to
/// `k` and `k+1` as long as `k+1 < cap`.
fn doubling(pos: usize, cap: usize) -> Vec<usize> {
    let k = pos / 2;
    if pos.is_multiple_of(2) || k + 1 >= cap {
        vec![k.min(cap - 1)]
    } else {
        vec![k, k + 1]
    }
}

fn bits(s: usize, len: usize) -> String {
    let body: String = (0..len).rev().map(|i| if s >> i & 1 == 1 { '1' } else { '0' }).collect();
    format!("s{body}")
}

pub fn cantor_doubling(levels: usize) -> Result<Sequence, GeneratorError> {
    guard(levels, 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX))?;
    let graphs: Vec<Arc<Graph>> = (0..=levels)
        .map(|n| {
            let labels = (0..1usize << n).map(|s| bits(s, n)).collect();
            Arc::new(Graph::from_edges(labels, &[]).expect("distinct strings"))
        })
        .collect();
    let steps = (0..levels)
        .map(|n| Morphism::from_function(graphs[n + 1].clone(), graphs[n].clone(), &(0..2usize << n).map(|s| s >> 1).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut g: Vec<Guarantee> = every(&[
        MorphProperty::CoBijective,
        MorphProperty::AntiInjective,
        MorphProperty::StrictlyAntiInjective,
        MorphProperty::StarRefining,
        MorphProperty::EdgeWitnessing,
    ])
    .collect();
    g.extend([shaped(Shape::Discrete), Guarantee::Growing]);
    finish(graphs, steps, Provenance::named("cantor_doubling").with("levels", levels), g)
}

/// Level `n ≥ 1` holds the intervals `((k-1)/2^n, (k+1)/2^n)` for
/// `k = 1, ..., 2^n - 1`; level 0 is the single interval `(0, 1)`.
pub fn arc_dyadic(levels: usize) -> Result<Sequence, GeneratorError> {
    let width = |n: usize| if n == 0 { 1 } else { (1usize << n) - 1 };
    guard(levels, 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX))?;
    let graphs: Vec<Arc<Graph>> = (0..=levels)
        .map(|n| {
            let d = 1usize << n.max(1);
            let labels = (1..=width(n)).map(|k| format!("({}/{d},{}/{d})", k - 1, k + 1)).collect();
            let edges: Vec<_> = (1..width(n)).map(|i| (i - 1, i)).collect();
            Arc::new(Graph::from_edges(labels, &edges).expect("distinct intervals"))
        })
        .collect();
    let mut steps = Vec::new();
    for n in 0..levels {
        // Index i stands for k = i + 1; containment is |j - 2k| <= 1.
        let m = if n == 0 {
            Morphism::from_function(graphs[1].clone(), graphs[0].clone(), &[0])?
        } else {
            by_images(&graphs[n + 1], &graphs[n], |i| {
                let j = i + 1;
                (1..=width(n)).filter(|&k| j.abs_diff(2 * k) <= 1).map(|k| k - 1).collect()
            })?
        };
        steps.push(m);
    }
    let mut g: Vec<Guarantee> = every(&[MorphProperty::CoBijective, MorphProperty::EdgeWitnessing, MorphProperty::Monotone]).collect();
    g.extend([
        stride(MorphProperty::StarRefining, 2),
        stride(MorphProperty::AntiInjective, 2),
        shaped(Shape::Path),
        Guarantee::Growing,
    ]);
    finish(graphs, steps, Provenance::named("arc_dyadic").with("levels", levels), g)
}

pub fn clique_iteration(levels: usize) -> Result<Sequence, GeneratorError> {
    let mut graphs = vec![Arc::new(Graph::path(2))];
    let mut steps = Vec::new();
    for n in 0..levels {
        guard(n + 1, 2 * graphs[n].len())?;
        let x = clique_graph(&graphs[n])?;
        steps.push(membership_of(&graphs[n], &x));
        graphs.push(x.graph.clone());
    }
    let mut g: Vec<Guarantee> = every(&[MorphProperty::CoBijective, MorphProperty::EdgeWitnessing, MorphProperty::Monotone]).collect();
    g.extend([
        stride(MorphProperty::StarRefining, 2),
        stride(MorphProperty::AntiInjective, 2),
        never(
            MorphProperty::StrictlyAntiInjective,
            "an end vertex v keeps the singleton clique {v} as its only strict preimage",
        ),
        shaped(Shape::Path),
        Guarantee::Growing,
    ]);
    finish(graphs, steps, Provenance::named("clique_iteration").with("levels", levels).with("seed_graph", "P2"), g)
}

pub fn edge_splitting_seq(seed: &Graph, levels: usize) -> Result<Sequence, GeneratorError> {
    let mut graphs = vec![Arc::new(seed.clone())];
    let mut steps = Vec::new();
    for n in 0..levels {
        guard(n + 1, graphs[n].len() + 2 * graphs[n].edge_count())?;
        let m = Morphism::edge_split(&graphs[n]);
        graphs.push(m.dom().clone());
        steps.push(m);
    }
    let mut g: Vec<Guarantee> = every(&[
        MorphProperty::CoBijective,
        MorphProperty::Monotone,
        MorphProperty::EdgeWitnessing,
        MorphProperty::StarRefining,
    ])
    .collect();
    if seed.edge_count() > 0 {
        g.push(Guarantee::Growing);
    }
    let label = seed_name(seed);
    finish(graphs, steps, Provenance::named("edge_splitting_seq").with("levels", levels).with("graph", label), g)
}

fn seed_name(g: &Graph) -> String {
    let c = g.classify();
    let shape = if c.discrete {
        "discrete"
    } else if c.path {
        "path"
    } else if c.cycle {
        "cycle"
    } else if c.fan.is_some() {
        "fan"
    } else {
        "graph"
    };
    format!("{shape} on {} vertices", g.len())
}

/// Level `n` is the cycle of length `2^(n+2)`; vertex `k` stands for the
/// angle `2πk / 2^(n+2)`.
pub fn cycle_roots(levels: usize) -> Result<Sequence, GeneratorError> {
    guard(levels, 1usize.checked_shl(levels as u32 + 2).unwrap_or(usize::MAX))?;
    let graphs: Vec<Arc<Graph>> = (0..=levels)
        .map(|n| {
            let len = 4usize << n;
            let labels = (0..len).map(|k| format!("{k}/{len}")).collect();
            let edges: Vec<_> = (0..len).map(|k| (k, (k + 1) % len)).collect();
            Arc::new(Graph::from_edges(labels, &edges).expect("distinct angles"))
        })
        .collect();
    let steps = (0..levels)
        .map(|n| {
            let len = 4usize << n;
            by_images(&graphs[n + 1], &graphs[n], |v| {
                if v % 2 == 0 {
                    vec![v / 2]
                } else {
                    vec![v / 2, (v / 2 + 1) % len]
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut g: Vec<Guarantee> = every(&[MorphProperty::CoBijective, MorphProperty::Monotone, MorphProperty::EdgeWitnessing]).collect();
    g.extend([
        stride(MorphProperty::StarRefining, 2),
        every(&[MorphProperty::AntiInjective]).next().expect("one"),
        shaped(Shape::Cycle),
        Guarantee::Growing,
    ]);
    finish(graphs, steps, Provenance::named("cycle_roots").with("levels", levels).with("first_length", 4), g)
}

/// Level `n` is the fan whose root is the cover of `0` and whose vertex
/// `(k, s)` is the product of the `k`-th interval at resolution `α(n)`
/// with the cylinder of the binary string `s` of length `β(n)`. Steps
/// relate a set to every coarser set containing it.
pub fn cantor_fan(levels: usize, alpha: &Progression, beta: &Progression) -> Result<Sequence, GeneratorError> {
    for n in 0..=levels {
        guard(n, 1 + (1usize << (alpha.at(n) + beta.at(n))))?;
    }
    let graphs: Vec<Arc<Graph>> = (0..=levels)
        .map(|n| {
            let (a, b) = (alpha.at(n), beta.at(n));
            let len = 1usize << a;
            let mut labels = vec!["r".to_string()];
            let mut edges = Vec::new();
            for s in 0..1usize << b {
                for k in 1..=len {
                    labels.push(format!("{}:{k}", bits(s, b)));
                    let v = labels.len() - 1;
                    edges.push((if k == 1 { 0 } else { v - 1 }, v));
                }
            }
            Arc::new(Graph::from_edges(labels, &edges).expect("distinct cells"))
        })
        .collect();
    let steps = (0..levels)
        .map(|n| {
            let (a, b) = (alpha.at(n), beta.at(n));
            let (a2, b2) = (alpha.at(n + 1), beta.at(n + 1));
            let d = a2 - a;
            let (len, len2) = (1usize << a, 1usize << a2);
            let reach = (1usize << d) - 1;
            by_images(&graphs[n + 1], &graphs[n], |v| {
                if v == 0 {
                    return vec![0];
                }
                let (s2, j) = ((v - 1) / len2, (v - 1) % len2 + 1);
                let s = s2 >> (b2 - b);
                let mut img: Vec<usize> = (1..=len)
                    .filter(|&k| j.abs_diff(k << d) <= reach)
                    .map(|k| 1 + s * len + k - 1)
                    .collect();
                if j <= reach {
                    img.insert(0, 0);
                }
                img
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut g: Vec<Guarantee> = every(&[MorphProperty::CoBijective, MorphProperty::EdgeWitnessing]).collect();
    g.extend([
        Guarantee::EveryStep {
            property: FanProperty::EndSplitting.into(),
        },
        stride(MorphProperty::StarRefining, 2),
        Guarantee::Growing,
    ]);
    let prov = Provenance::named("cantor_fan")
        .with("levels", levels)
        .with("alpha", &alpha.text)
        .with("beta", &beta.text);
    finish(graphs, steps, prov, g)
}

/// Spoke of a truncated fan: `kept` vertices from the root out, inside a
/// spoke of `full` vertices of the untruncated fan (root counted in both).
#[derive(Clone, Copy)]
struct Truncated {
    kept: usize,
    full: usize,
}

fn fan_from_spokes(spokes: &[Truncated], prefix: &str) -> Arc<Graph> {
    let mut labels = vec!["r".to_string()];
    let mut edges = Vec::new();
    for (i, sp) in spokes.iter().enumerate() {
        for t in 1..sp.kept {
            labels.push(format!("{prefix}{i}.{t}"));
            let v = labels.len() - 1;
            edges.push((if t == 1 { 0 } else { v - 1 }, v));
        }
    }
    Arc::new(Graph::from_edges(labels, &edges).expect("distinct spoke positions"))
}

/// Vertex index of position `t` (root is 0) on spoke `i`.
fn spoke_offsets(spokes: &[Truncated]) -> Vec<usize> {
    let mut off = Vec::with_capacity(spokes.len());
    let mut next = 1;
    for sp in spokes {
        off.push(next);
        next += sp.kept - 1;
    }
    off
}

fn at(off: &[usize], i: usize, t: usize) -> usize {
    if t == 0 {
        0
    } else {
        off[i] + t - 1
    }
}

/// Starts from the claw. Every spoke `S` of the full fan is followed by
/// `|S|` copies of its clique graph, and the `j`-th copy keeps the cliques
/// inside the first `j` vertices of the kept part of `S`. Copies keeping
/// only the root are dropped.
pub fn lelek(levels: usize) -> Result<Sequence, GeneratorError> {
    let mut level: Vec<Truncated> = vec![Truncated { kept: 2, full: 2 }; 3];
    let mut graphs = vec![fan_from_spokes(&level, "")];
    let mut steps = Vec::new();
    for n in 0..levels {
        let mut next = Vec::new();
        let mut parent = Vec::new();
        for (i, sp) in level.iter().enumerate() {
            for j in 2..=sp.full {
                let q = j.min(sp.kept);
                next.push(Truncated {
                    kept: 2 * q - 1,
                    full: 2 * sp.full - 1,
                });
                parent.push(i);
            }
        }
        let size = 1 + next.iter().map(|s| s.kept - 1).sum::<usize>();
        guard(n + 1, size)?;
        let dom = fan_from_spokes(&next, "");
        let (off, off2) = (spoke_offsets(&level), spoke_offsets(&next));
        let mut pairs = vec![(0, 0)];
        for (i2, sp) in next.iter().enumerate() {
            let i = parent[i2];
            for t in 1..sp.kept {
                for p in doubling(t, level[i].kept) {
                    pairs.push((at(&off, i, p), at(&off2, i2, t)));
                }
            }
        }
        steps.push(Morphism::new(dom.clone(), graphs[n].clone(), pairs)?);
        graphs.push(dom);
        level = next;
    }
    let mut g: Vec<Guarantee> = every(&[MorphProperty::CoBijective, MorphProperty::EdgeWitnessing]).collect();
    g.extend([
        Guarantee::EveryStep {
            property: FanProperty::SpokeMonotone.into(),
        },
        stride(MorphProperty::StarRefining, 2),
        stride(FanProperty::EndDense, 2),
        stride(FanProperty::EndSplitting, 2),
        shaped(Shape::Fan),
        Guarantee::Growing,
    ]);
    let prov = Provenance::named("lelek").with("levels", levels).with("alpha", "2n");
    finish(graphs, steps, prov, g)
}

/// Level `k` has `2^(k+2)` spokes: all but the last carry `2^(k+2) - 1`
/// vertices besides the root, the last carries one.
pub fn nasty_fan(levels: usize) -> Result<Sequence, GeneratorError> {
    let spokes_at = |k: usize| -> Vec<Truncated> {
        let p = 4usize << k;
        let mut v = vec![Truncated { kept: p, full: p }; p - 1];
        v.push(Truncated { kept: 2, full: 2 });
        v
    };
    guard(levels, 1 + (4usize << levels).pow(2))?;
    let graphs: Vec<Arc<Graph>> = (0..=levels).map(|k| fan_from_spokes(&spokes_at(k), "")).collect();
    let mut steps = Vec::new();
    for k in 0..levels {
        let (lo, hi) = (spokes_at(k), spokes_at(k + 1));
        let (off, off2) = (spoke_offsets(&lo), spoke_offsets(&hi));
        let (p, p2) = (lo.len(), hi.len());
        let mut pairs = vec![(0, 0)];
        for (i2, spoke) in hi.iter().enumerate() {
            for t in 1..spoke.kept {
                let (i, img): (usize, Vec<usize>) = if i2 + 2 < p2 {
                    (i2 / 2, doubling(t, p))
                } else if i2 + 2 == p2 {
                    (p - 1, if t == 1 { vec![0, 1] } else { vec![1] })
                } else {
                    (p - 1, vec![t])
                };
                for q in img {
                    pairs.push((at(&off, i, q), at(&off2, i2, t)));
                }
            }
        }
        steps.push(Morphism::new(graphs[k + 1].clone(), graphs[k].clone(), pairs)?);
    }
    let mut g: Vec<Guarantee> = every(&[MorphProperty::CoBijective, MorphProperty::EdgeWitnessing]).collect();
    g.extend([
        Guarantee::EveryStep {
            property: FanProperty::SpokeMonotone.into(),
        },
        Guarantee::EveryStep {
            property: FanProperty::EndPreserving.into(),
        },
        never(
            MorphProperty::StarRefining,
            "the short spoke's end has the root in its star, and the root's preimage never reaches that end",
        ),
        shaped(Shape::Fan),
        Guarantee::Growing,
    ]);
    let prov = Provenance::named("nasty_fan").with("levels", levels).with("first_index", 2);
    finish(graphs, steps, prov, g)
}

/// Both variants live on the path `a - b`. Variant 1 relates `a_n` to
/// `a_{n+1}` and `b_{n+1}` and `b_n` to `b_{n+1}`; variant 2 instead
/// relates `b_n` to `a_{n+1}`.
pub fn modification_patterns(levels: usize, variant: u8) -> Result<Sequence, GeneratorError> {
    let graphs: Vec<Arc<Graph>> = (0..=levels)
        .map(|n| Arc::new(Graph::from_edges(vec![format!("a{n}"), format!("b{n}")], &[(0, 1)]).expect("two labels")))
        .collect();
    let pairs: &[(usize, usize)] = if variant == 1 {
        &[(0, 0), (0, 1), (1, 1)]
    } else {
        &[(0, 0), (0, 1), (1, 0)]
    };
    let steps = (0..levels)
        .map(|n| Morphism::new(graphs[n + 1].clone(), graphs[n].clone(), pairs.iter().copied()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut g: Vec<Guarantee> = every(&[MorphProperty::Monotone, MorphProperty::StarRefining, MorphProperty::EdgeWitnessing]).collect();
    g.extend([
        shaped(Shape::Path),
        never(MorphProperty::AntiInjective, "one of the two vertices has a single preimage at every level"),
    ]);
    let prov = Provenance::named("modification_patterns").with("levels", levels).with("variant", variant);
    finish(graphs, steps, prov, g)
}

/// Threads `a` and `b`, isolated threads `c_{2m}` starting below `a_{2m}`,
/// and connectors `b_{2n} > d_{2n+1} > a_{2n+2}`. Even levels join `a` and
/// `b`; odd levels join `a`, `b` and `d` pairwise.
pub fn modification_fail(levels: usize) -> Result<Sequence, GeneratorError> {
    let labels_at = |k: usize| -> Vec<String> {
        let mut l = vec![format!("a{k}"), format!("b{k}")];
        if k % 2 == 1 {
            l.push(format!("d{k}"));
        }
        l.extend((0..k).step_by(2).map(|m| format!("c{m},{k}")));
        l
    };
    let graphs: Vec<Arc<Graph>> = (0..=levels)
        .map(|k| {
            let edges: &[(usize, usize)] = if k % 2 == 1 { &[(0, 1), (0, 2), (1, 2)] } else { &[(0, 1)] };
            Arc::new(Graph::from_edges(labels_at(k), edges).expect("distinct labels"))
        })
        .collect();
    let mut steps = Vec::new();
    for k in 0..levels {
        let up = k + 1;
        let mut pairs: Vec<(String, String)> = vec![(format!("a{k}"), format!("a{up}")), (format!("b{k}"), format!("b{up}"))];
        if up % 2 == 1 {
            pairs.push((format!("b{k}"), format!("d{up}")));
            pairs.push((format!("a{k}"), format!("c{k},{up}")));
        } else {
            pairs.push((format!("d{k}"), format!("a{up}")));
        }
        for m in (0..k).step_by(2) {
            pairs.push((format!("c{m},{k}"), format!("c{m},{up}")));
        }
        steps.push(Morphism::from_labels(graphs[up].clone(), graphs[k].clone(), pairs)?);
    }
    finish(graphs, steps, Provenance::named("modification_fail").with("levels", levels), Vec::new())
}

pub fn constant(g: &Graph, levels: usize) -> Result<Sequence, GeneratorError> {
    let g = Arc::new(g.clone());
    let graphs = vec![g.clone(); levels + 1];
    let steps = (0..levels).map(|_| Morphism::identity(g.clone())).collect();
    let mut gs: Vec<Guarantee> = every(&[MorphProperty::CoBijective, MorphProperty::Monotone]).collect();
    gs.push(never(MorphProperty::AntiInjective, "identity composites have singleton preimages"));
    gs.push(never(MorphProperty::StrictlyAntiInjective, "identity composites have singleton preimages"));
    if g.edge_count() > 0 {
        gs.push(never(MorphProperty::StarRefining, "an edge's star is not inside a singleton preimage"));
        gs.push(never(MorphProperty::EdgeWitnessing, "no vertex lies below both ends of an edge"));
    }
    finish(graphs, steps, Provenance::named("constant").with("levels", levels).with("graph", seed_name(&g)), gs)
}

/// Outcome of re-checking one declared guarantee on the stored prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuaranteeCheck {
    pub guarantee: Guarantee,
    /// First counterexample `(m, n)` with a note, if any.
    pub counterexample: Option<(usize, usize, String)>,
}

impl GuaranteeCheck {
    pub fn ok(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Fan properties are claimed only between fan levels.
fn claim_applies(p: Property, m: &Morphism) -> bool {
    match p {
        Property::Fan(_) => m.dom().classify().fan.is_some() && m.cod().classify().fan.is_some(),
        Property::Morph(_) => true,
    }
}

fn holds(p: Property, m: &Morphism) -> bool {
    match p {
        Property::Fan(f) => fan_check(m, f).unwrap_or(false),
        Property::Morph(q) => m.check(q),
    }
}

/// Re-verifies every declared guarantee against the levels present.
/// `Growing` asks the last level to be strictly larger than the first.
pub fn recheck_guarantees(s: &Sequence) -> Result<Vec<GuaranteeCheck>, SequenceError> {
    let top = s.last();
    let mut out = Vec::new();
    for g in &s.guarantees {
        let mut bad = None;
        match g {
            Guarantee::EveryStep { property } | Guarantee::Stride { property, .. } => {
                let k = match g {
                    Guarantee::Stride { stride, .. } => *stride,
                    _ => 1,
                };
                for m in 0..top.saturating_sub(k - 1) {
                    let c = s.composite(m, m + k)?;
                    if claim_applies(*property, c) && !holds(*property, c) {
                        bad = Some((m, m + k, property.violation(c).unwrap_or_default()));
                        break;
                    }
                }
            }
            Guarantee::Never { property, .. } => {
                'outer: for m in 0..top {
                    for n in m + 1..=top {
                        let c = s.composite(m, n)?;
                        if claim_applies(*property, c) && holds(*property, c) {
                            bad = Some((m, n, format!("composite is {property}")));
                            break 'outer;
                        }
                    }
                }
            }
            Guarantee::EveryGraph { shape } => {
                bad = (0..=top)
                    .find(|&n| !has_shape(s.graph(n), *shape))
                    .map(|n| (n, n, format!("G_{n} is not {shape:?}")));
            }
            Guarantee::Growing => {
                if top > 0 && s.graph(top).len() <= s.graph(0).len() {
                    bad = Some((0, top, "the last level is no larger than the first".into()));
                }
            }
            Guarantee::CoreStable => {
                if !s.is_surjective() {
                    bad = Some((0, top, "the prefix is not surjective".into()));
                }
            }
        }
        out.push(GuaranteeCheck {
            guarantee: g.clone(),
            counterexample: bad,
        });
    }
    Ok(out)
}

fn has_shape(g: &Graph, shape: Shape) -> bool {
    let c = g.classify();
    match shape {
        Shape::Discrete => c.discrete,
        Shape::Path => c.path,
        Shape::Cycle => c.cycle,
        Shape::Fan => c.fan.is_some(),
        Shape::Connected => c.connected,
    }
}
