//! The induced poset of a sequence prefix and finite-horizon spectrum
//! analysis.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::VertexSet;
use crate::relation::MorphProperty;
use crate::sequence::{Sequence, Verdict, Witness};

/// Vertex `vertex` of level `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PosetElement {
    pub level: usize,
    pub vertex: usize,
}

impl PosetElement {
    pub fn new(level: usize, vertex: usize) -> Self {
        PosetElement { level, vertex }
    }

    pub fn label(&self, s: &Sequence) -> String {
        format!("{}@{}", s.graph(self.level).label(self.vertex), self.level)
    }
}

/// One vertex per level `0..=d`, each step relating consecutive entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Thread(pub Vec<usize>);

impl Thread {
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_valid(&self, s: &Sequence) -> bool {
        self.0.len() <= s.levels() && self.0.windows(2).enumerate().all(|(n, w)| s.step(n).relates(w[0], w[1]))
    }

    pub fn labels(&self, s: &Sequence) -> Vec<String> {
        self.0.iter().enumerate().map(|(n, &v)| s.graph(n).label(v).to_string()).collect()
    }
}

/// `(p, n) ≤ (q, m)`: `m <= n` and `q ⊐ᵐ_n p`.
pub fn leq(s: &Sequence, p: PosetElement, q: PosetElement) -> bool {
    q.level <= p.level && s.comp(q.level, p.level).relates(q.vertex, p.vertex)
}

/// Common lower bound search up to `horizon`.
pub fn wedge(s: &Sequence, p: PosetElement, q: PosetElement, horizon: usize) -> Verdict {
    let horizon = horizon.min(s.last());
    let lo = p.level.max(q.level);
    for k in lo..=horizon {
        let mut below = s.comp(p.level, k).row(p.vertex).clone();
        below.intersect_with(s.comp(q.level, k).row(q.vertex));
        if let Some(r) = below.ones().next() {
            return Verdict::Holds {
                witness: Witness::LowerBound {
                    level: k,
                    vertex: s.graph(k).label(r).to_string(),
                },
            };
        }
    }
    // Anything below both lies below every element above either, so two
    // apart elements above them on one level rule out a bound forever.
    let (hi, deep) = if p.level <= q.level { (p, q) } else { (q, p) };
    let above = s.comp(hi.level, deep.level).image_of(deep.vertex);
    let g = s.graph(hi.level);
    if let Some(x) = above.ones().find(|&x| !g.meets(hi.vertex, x)) {
        return Verdict::FailsOnPrefix {
            witness: Witness::Apart {
                level: hi.level,
                a: g.label(hi.vertex).to_string(),
                b: g.label(x).to_string(),
            },
        };
    }
    Verdict::Unknown {
        horizon,
        note: "no common lower bound within the horizon".into(),
    }
}

/// All threads through levels `0..=depth`, in lexicographic order.
pub fn enumerate_threads(s: &Sequence, depth: usize) -> Vec<Thread> {
    let depth = depth.min(s.last());
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for v in 0..s.graph(0).len() {
        cur.push(v);
        extend_threads(s, depth, &mut cur, &mut out);
        cur.pop();
    }
    out
}

fn extend_threads(s: &Sequence, depth: usize, cur: &mut Vec<usize>, out: &mut Vec<Thread>) {
    let n = cur.len() - 1;
    if n == depth {
        out.push(Thread(cur.clone()));
        return;
    }
    let last = *cur.last().unwrap();
    for next in s.step(n).row(last).ones() {
        cur.push(next);
        extend_threads(s, depth, cur, out);
        cur.pop();
    }
}

/// Level `n` part of the upset of a thread: the image of its deepest entry.
pub fn upset_level(s: &Sequence, t: &Thread, n: usize) -> VertexSet {
    let d = t.depth();
    s.comp(n, d).image_of(t.0[d]).clone()
}

/// Elements above some entry of the thread, within the thread's depth.
pub fn thread_upset(s: &Sequence, t: &Thread) -> BTreeSet<PosetElement> {
    (0..=t.depth())
        .flat_map(|n| upset_level(s, t, n).ones().map(move |v| PosetElement::new(n, v)).collect::<Vec<_>>())
        .collect()
}

/// Threads whose upsets are minimal among all thread upsets, one
/// representative per distinct upset.
///
/// Threads run to `depth`, but upsets are compared only on levels up to
/// `depth / 2`. The deepest entries of a truncated thread see too little of
/// what lies below them, so comparing there separates threads whose infinite
/// extensions have the same upset.
pub fn minimal_selectors(s: &Sequence, depth: usize) -> Vec<Thread> {
    let depth = depth.min(s.last());
    let cut = depth / 2;
    let mut seen: Vec<(BTreeSet<PosetElement>, Thread)> = Vec::new();
    for t in enumerate_threads(s, depth) {
        let u: BTreeSet<PosetElement> = (0..=cut)
            .flat_map(|n| upset_level(s, &t, n).ones().map(move |v| PosetElement::new(n, v)).collect::<Vec<_>>())
            .collect();
        if !seen.iter().any(|(v, _)| *v == u) {
            seen.push((u, t));
        }
    }
    seen.iter()
        .filter(|(u, _)| !seen.iter().any(|(v, _)| v != u && v.is_subset(u)))
        .map(|(_, t)| t.clone())
        .collect()
}

/// `[A]_n`: level-`n` vertices above some element of a thread in `threads`.
pub fn trace(s: &Sequence, threads: &[Thread], n: usize) -> VertexSet {
    let mut out = s.graph(n).empty_set();
    for t in threads {
        if n <= t.depth() {
            out.union_with(&upset_level(s, t, n));
        }
    }
    out
}

/// Maximum number of threads examined when looking for a cap counterexample.
const THREAD_CAP: usize = 200_000;

/// Whether some level up to `horizon` refines `c`.
pub fn is_cap(s: &Sequence, c: &[PosetElement], horizon: usize) -> Verdict {
    let horizon = horizon.min(s.last());
    for k in 0..=horizon {
        let refined = (0..s.graph(k).len()).all(|x| c.iter().any(|&q| leq(s, PosetElement::new(k, x), q)));
        if refined {
            return Verdict::Holds {
                witness: Witness::Level {
                    level: k,
                    detail: "every vertex lies below the set".into(),
                },
            };
        }
    }
    // Look for a thread whose upset misses the set.
    let mut cur = Vec::new();
    let mut budget = THREAD_CAP;
    for v in 0..s.graph(0).len() {
        cur.push(v);
        if let Some(t) = avoiding_thread(s, horizon, c, &mut cur, &mut budget) {
            return Verdict::FailsOnPrefix {
                witness: Witness::Thread { labels: t.labels(s) },
            };
        }
        cur.pop();
    }
    Verdict::Unknown {
        horizon,
        note: "no refining level and no avoiding thread found".into(),
    }
}

fn avoiding_thread(
    s: &Sequence,
    depth: usize,
    c: &[PosetElement],
    cur: &mut Vec<usize>,
    budget: &mut usize,
) -> Option<Thread> {
    let n = cur.len() - 1;
    if n == depth {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let t = Thread(cur.clone());
        let avoids = c.iter().all(|q| q.level > depth || !upset_level(s, &t, q.level).contains(q.vertex));
        return avoids.then_some(t);
    }
    let last = *cur.last().unwrap();
    for next in s.step(n).row(last).ones() {
        cur.push(next);
        if let Some(t) = avoiding_thread(s, depth, c, cur, budget) {
            return Some(t);
        }
        cur.pop();
    }
    None
}

/// `p ◁ q` through level `k`: every level-`k` element meeting `p` below
/// (decided at the end of the prefix) lies below `q`.
pub fn star_below(s: &Sequence, p: PosetElement, q: PosetElement, k: usize) -> bool {
    let top = s.last();
    (0..s.graph(k).len()).all(|x| {
        let c = PosetElement::new(k, x);
        !wedge(s, c, p, top).holds() || leq(s, c, q)
    })
}

/// Finite-horizon topological verdicts about the spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub horizon: usize,
    pub co_bijective: bool,
    pub edge_faithful: Verdict,
    pub connected: Verdict,
    pub hausdorff: Verdict,
    pub perfect: Verdict,
    /// Present only when every level is a tree.
    pub tree_like: Option<Verdict>,
    pub hereditarily_unicoherent: Option<Verdict>,
}

pub fn spectrum_report(s: &Sequence, horizon: usize) -> SpectrumReport {
    let horizon = horizon.min(s.last());
    let co_bijective = (0..horizon).all(|n| s.step(n).check(MorphProperty::CoBijective));
    let edge_faithful = s.is_edge_faithful(horizon);
    let subseq = |p: MorphProperty| s.has_subsequence_in(p.into(), horizon).expect("ideal");
    let witnessing = subseq(MorphProperty::EdgeWitnessing);
    let star = subseq(MorphProperty::StarRefining);
    let all_trees = (0..=horizon).all(|n| s.graph(n).classify().tree);
    let not_b = |what: &str| Verdict::Unknown {
        horizon,
        note: format!("{what}: steps are not all co-bijective"),
    };

    let disconnected = (0..=horizon).find(|&n| !s.graph(n).is_connected());
    let connected = match (co_bijective, disconnected) {
        (false, _) => not_b("connectedness"),
        (true, Some(n)) => Verdict::FailsOnPrefix {
            witness: Witness::Level {
                level: n,
                detail: format!("G_{n} has {} components", s.graph(n).components().len()),
            },
        },
        (true, None) if all_trees => relabel(witnessing.clone(), "all levels connected trees"),
        (true, None) => match &edge_faithful {
            Verdict::Holds { .. } => Verdict::Holds {
                witness: Witness::Note {
                    text: "all levels connected and the sequence is edge-faithful".into(),
                },
            },
            _ => Verdict::Unknown {
                horizon,
                note: "all levels connected but edge-faithfulness is not established".into(),
            },
        },
    };

    let hausdorff = if !co_bijective {
        not_b("Hausdorffness")
    } else if edge_faithful.holds() || (all_trees && witnessing.holds()) {
        star.clone()
    } else {
        Verdict::Unknown {
            horizon,
            note: "edge-faithfulness is not established".into(),
        }
    };

    let perfect = if co_bijective {
        subseq(MorphProperty::AntiInjective)
    } else {
        not_b("perfectness")
    };

    let (tree_like, hereditarily_unicoherent) = if all_trees && co_bijective {
        let v = Verdict::all(
            horizon,
            vec![
                ("edge-witnessing subsequence".into(), witnessing),
                ("star-refining subsequence".into(), star),
            ],
        );
        (Some(v.clone()), Some(v))
    } else {
        (None, None)
    };

    SpectrumReport {
        horizon,
        co_bijective,
        edge_faithful,
        connected,
        hausdorff,
        perfect,
        tree_like,
        hereditarily_unicoherent,
    }
}

fn relabel(v: Verdict, context: &str) -> Verdict {
    match v {
        Verdict::Holds { witness } => Verdict::Holds {
            witness: Witness::All {
                parts: vec![(context.to_string(), Verdict::Holds { witness })],
            },
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cantor_doubling, cycle_roots, generate, modification_patterns, GeneratorName};
    use std::collections::BTreeMap;

    fn arc(levels: usize) -> Sequence {
        generate(GeneratorName::ArcDyadic, levels, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn order_follows_composites() {
        let s = arc(3);
        let e = PosetElement::new;
        // Interval 1 of level 3 sits inside interval 0 of level 2 and below
        // the single interval of level 0.
        assert!(leq(&s, e(3, 1), e(2, 0)));
        assert!(leq(&s, e(3, 6), e(0, 0)));
        assert!(!leq(&s, e(3, 6), e(2, 0)));
        assert!(leq(&s, e(2, 1), e(2, 1)));
        assert!(!leq(&s, e(1, 0), e(2, 0)));
    }

    #[test]
    fn neighbours_meet_and_distant_vertices_do_not() {
        let s = arc(4);
        let e = PosetElement::new;
        assert!(wedge(&s, e(2, 0), e(2, 1), 4).holds());
        let v = wedge(&s, e(3, 0), e(3, 2), 4);
        assert!(v.fails(), "{v:?}");
    }

    #[test]
    fn cantor_threads_are_binary_strings() {
        let s = cantor_doubling(3).unwrap();
        let t = enumerate_threads(&s, 3);
        assert_eq!(t.len(), 8);
        assert!(t.iter().all(|t| t.is_valid(&s)));
        // Compared on levels 0 and 1 only, the eight threads fall into two
        // classes.
        assert_eq!(minimal_selectors(&s, 3).len(), 2);
        let deep = cantor_doubling(6).unwrap();
        assert_eq!(minimal_selectors(&deep, 6).len(), 8);
    }

    #[test]
    fn end_threads_give_one_point_with_different_traces() {
        let s1 = modification_patterns(4, 1).unwrap();
        let sel = minimal_selectors(&s1, 4);
        assert_eq!(sel.len(), 1);
        assert_eq!(sel[0].labels(&s1), ["a0", "a1", "a2", "a3", "a4"]);
        assert_eq!(trace(&s1, &sel, 4).ones().collect::<Vec<_>>(), vec![0]);
        assert_eq!(trace(&s1, &sel, 2).ones().collect::<Vec<_>>(), vec![0]);

        let s2 = modification_patterns(4, 2).unwrap();
        let sel = minimal_selectors(&s2, 4);
        assert_eq!(sel.len(), 1);
        for n in 0..4 {
            assert_eq!(trace(&s2, &sel, n).count_ones(..), 2, "level {n}");
        }
    }

    #[test]
    fn caps_refine_or_get_avoided() {
        let s = cantor_doubling(3).unwrap();
        let e = PosetElement::new;
        assert!(is_cap(&s, &[e(1, 0), e(1, 1)], 3).holds());
        match is_cap(&s, &[e(1, 0)], 3) {
            Verdict::FailsOnPrefix {
                witness: Witness::Thread { labels },
            } => assert_eq!(labels[1], "s1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn star_below_on_the_arc() {
        let s = arc(5);
        let e = PosetElement::new;
        // Deep enough, everything touching an interval sits inside its parent.
        assert!(star_below(&s, e(2, 1), e(1, 0), 4));
        assert!(!star_below(&s, e(2, 0), e(2, 0), 3));
    }

    #[test]
    fn reports_match_the_classic_spaces() {
        let c = spectrum_report(&cantor_doubling(5).unwrap(), 5);
        assert!(c.connected.fails() && c.hausdorff.holds() && c.perfect.holds());

        let a = spectrum_report(&arc(5), 5);
        assert!(a.connected.holds() && a.hausdorff.holds() && a.perfect.holds());
        assert!(a.tree_like.as_ref().unwrap().holds());

        let o = spectrum_report(&cycle_roots(4).unwrap(), 4);
        assert!(o.connected.holds(), "{:?}", o.connected);
        assert!(o.hausdorff.holds(), "{:?}", o.hausdorff);
        assert!(o.tree_like.is_none());
    }
}
