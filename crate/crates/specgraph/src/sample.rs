//! Random graphs, morphisms and path sequences for property testing.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;
use crate::relation::Morphism;
use crate::sequence::Sequence;

/// Erdős–Rényi graph on `n` vertices labelled `0..n`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::with_indices(n, &edges).expect("n >= 1")
}

/// Knobs for [`random_cover`].
#[derive(Clone, Debug)]
pub struct CoverOptions {
    /// Vertices over each target vertex alone, drawn from this range.
    pub copies: (usize, usize),
    /// Additional vertices over a random edge (or vertex) of the target.
    pub extra: usize,
    /// Chance of joining two domain vertices whose images may be joined.
    pub edge_p: f64,
    /// Join only vertices whose images share a point.
    pub overlapping_only: bool,
    /// Put one vertex over every target edge, so the result witnesses edges.
    pub witness_edges: bool,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            copies: (1, 2),
            extra: 2,
            edge_p: 0.5,
            overlapping_only: false,
            witness_edges: false,
        }
    }
}

fn random_clique(rng: &mut impl Rng, g: &Graph) -> Vec<usize> {
    let h = rng.gen_range(0..g.len());
    let nb: Vec<usize> = g.neighbors(h).collect();
    if nb.is_empty() || rng.gen_bool(0.3) {
        return vec![h];
    }
    let h2 = *nb.choose(rng).expect("non-empty");
    let mut c = vec![h, h2];
    // Occasionally grow to a triangle.
    if let Some(&h3) = nb.iter().find(|&&x| x != h2 && g.adjacent(x, h2)) {
        if rng.gen_bool(0.3) {
            c.push(h3);
        }
    }
    c.sort_unstable();
    c
}

fn assemble(rng: &mut impl Rng, target: &Arc<Graph>, images: Vec<Vec<usize>>, edge_p: f64, overlapping_only: bool) -> Morphism {
    let mut images = images;
    images.shuffle(rng);
    let k = images.len();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let all_meet = images[a].iter().all(|&x| images[b].iter().all(|&y| target.meets(x, y)));
            let overlap = images[a].iter().any(|x| images[b].contains(x));
            if all_meet && (overlap || !overlapping_only) && rng.gen_bool(edge_p) {
                edges.push((a, b));
            }
        }
    }
    let labels = (0..k).map(|i| format!("x{i}")).collect();
    let dom = Arc::new(Graph::from_edges(labels, &edges).expect("fresh labels"));
    let pairs = images.iter().enumerate().flat_map(|(g, img)| img.iter().map(move |&h| (h, g)));
    Morphism::new(dom, target.clone(), pairs).expect("images of joined vertices meet")
}

/// Random co-injective edge-preserving relation onto `target`. Every target
/// vertex keeps at least `opts.copies.0` exclusive preimages.
pub fn random_cover(rng: &mut impl Rng, target: &Arc<Graph>, opts: &CoverOptions) -> Morphism {
    let mut images = Vec::new();
    for h in 0..target.len() {
        for _ in 0..rng.gen_range(opts.copies.0..=opts.copies.1) {
            images.push(vec![h]);
        }
    }
    for _ in 0..opts.extra {
        images.push(random_clique(rng, target));
    }
    if opts.witness_edges {
        images.extend(target.edges().into_iter().map(|(a, b)| vec![a, b]));
    }
    assemble(rng, target, images, opts.edge_p, opts.overlapping_only)
}

/// Random co-surjective edge-preserving relation onto `target` with at most
/// `max_dom` domain vertices where possible; co-injectivity is not forced.
pub fn random_cosurjective(rng: &mut impl Rng, target: &Arc<Graph>, max_dom: usize) -> Morphism {
    let mut images: Vec<Vec<usize>> = Vec::new();
    let mut covered = vec![false; target.len()];
    let want = rng.gen_range(1..=max_dom.max(1));
    while images.len() < want || covered.iter().any(|c| !c) {
        let c = if images.len() >= want {
            let h = covered.iter().position(|c| !c).expect("something uncovered");
            let mut c = vec![h];
            if let Some(h2) = target.neighbors(h).find(|_| rng.gen_bool(0.5)) {
                c.push(h2);
                c.sort_unstable();
            }
            c
        } else {
            random_clique(rng, target)
        };
        for &h in &c {
            covered[h] = true;
        }
        images.push(c);
    }
    assemble(rng, target, images, 0.5, false)
}

/// Keys along a path: `2i` stands for `{i}` and `2i + 1` for `{i, i + 1}`.
fn key_image(key: usize) -> Vec<usize> {
    if key.is_multiple_of(2) {
        vec![key / 2]
    } else {
        vec![key / 2, key / 2 + 1]
    }
}

/// Random monotone co-surjective morphism from some path of at most
/// `max_len` vertices onto the path with `cod_len` vertices.
pub fn random_monotone_path_morphism(rng: &mut impl Rng, cod_len: usize, max_len: usize) -> Morphism {
    let cod = Arc::new(Graph::path(cod_len));
    let last = 2 * (cod_len - 1);
    loop {
        let mut k = if cod_len > 1 && rng.gen_bool(0.3) { 1 } else { 0 };
        let mut keys = vec![k];
        let done = |k: usize| k >= last || (cod_len > 1 && k + 1 == last && k % 2 == 1);
        while !done(k) {
            let step = match (k % 2, rng.gen_range(0..4)) {
                (_, 0) => 0,
                (0, 1) => 2,
                _ => 1,
            };
            k += step;
            keys.push(k);
        }
        if keys.len() > max_len {
            continue;
        }
        while keys.len() < max_len && rng.gen_bool(0.3) {
            let i = rng.gen_range(0..keys.len());
            keys.insert(i, keys[i]);
        }
        if rng.gen_bool(0.5) {
            keys.reverse();
        }
        let dom = Arc::new(Graph::path(keys.len()));
        let pairs = keys.iter().enumerate().flat_map(|(g, &key)| key_image(key).into_iter().map(move |h| (h, g)));
        return Morphism::new(dom, cod, pairs).expect("keys change by one image at a time");
    }
}

/// Random monotone co-surjective sequence of paths on `levels + 1` levels,
/// each with at most `max_len` vertices.
pub fn random_monotone_path_sequence(rng: &mut impl Rng, levels: usize, max_len: usize) -> Sequence {
    let mut len = rng.gen_range(1..=max_len.min(3));
    let first = Arc::new(Graph::path(len));
    let mut steps: Vec<Morphism> = Vec::new();
    for _ in 0..levels {
        let m = random_monotone_path_morphism(rng, len, max_len);
        // Reuse the level graph so consecutive steps chain exactly.
        let m = match steps.last() {
            Some(prev) => Morphism::new(m.dom().clone(), prev.dom().clone(), m.pairs()).expect("same path"),
            None => Morphism::new(m.dom().clone(), first.clone(), m.pairs()).expect("same path"),
        };
        len = m.dom().len();
        steps.push(m);
    }
    Sequence::from_steps(first, steps).expect("co-surjective steps")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::MorphProperty;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn covers_are_co_injective() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let n = rng.gen_range(1..=6);
            let g = Arc::new(random_graph(&mut rng, n, 0.5));
            let m = random_cover(&mut rng, &g, &CoverOptions::default());
            assert!(m.check(MorphProperty::CoInjective));
            assert!(m.check(MorphProperty::CoSurjective));
        }
    }

    #[test]
    fn witnessing_covers_witness_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let opts = CoverOptions {
            witness_edges: true,
            ..CoverOptions::default()
        };
        for _ in 0..50 {
            let g = Arc::new(random_graph(&mut rng, 5, 0.6));
            assert!(random_cover(&mut rng, &g, &opts).check(MorphProperty::EdgeWitnessing));
        }
    }

    #[test]
    fn cosurjective_samples_cover_the_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut non_injective = 0;
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let g = Arc::new(random_graph(&mut rng, n, 0.5));
            let m = random_cosurjective(&mut rng, &g, 5);
            assert!(m.check(MorphProperty::CoSurjective));
            non_injective += usize::from(!m.check(MorphProperty::CoInjective));
        }
        assert!(non_injective > 0, "the sampler should reach beyond co-injective relations");
    }

    #[test]
    fn path_morphisms_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let m = random_monotone_path_morphism(&mut rng, n, 7);
            assert!(m.dom().len() <= 7);
            assert!(m.check_all(&[MorphProperty::CoSurjective, MorphProperty::Monotone]));
        }
    }

    #[test]
    fn path_sequences_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let s = random_monotone_path_sequence(&mut rng, 5, 7);
            assert_eq!(s.last(), 5);
            assert!((0..=5).all(|n| s.graph(n).is_path() && s.graph(n).len() <= 7));
        }
    }
}
