//! The clique graph construction and its action on morphisms.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::Graph;
use crate::relation::{MorphProperty, Morphism};

/// Default cap on the number of cliques enumerated.
pub const DEFAULT_CEILING: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliqueError {
    #[error("more than {0} cliques")]
    TooLarge(usize),
    #[error("the clique map needs a co-surjective morphism")]
    NotCoSurjective,
}

/// `𝖷G` together with the member list of each of its vertices.
#[derive(Clone, Debug)]
pub struct CliqueGraph {
    pub graph: Arc<Graph>,
    /// Members of each clique vertex, ascending.
    pub cliques: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl CliqueGraph {
    pub fn index_of(&self, members: &[usize]) -> Option<usize> {
        self.lookup.get(members).copied()
    }
}

/// Vertices are the non-empty cliques of `g`, joined when one contains the
/// other. Cliques are ordered lexicographically by member index and labelled
/// `{a,b,...}` with the member labels.
pub fn clique_graph(g: &Graph) -> Result<CliqueGraph, CliqueError> {
    clique_graph_with_ceiling(g, DEFAULT_CEILING)
}

pub fn clique_graph_with_ceiling(g: &Graph, ceiling: usize) -> Result<CliqueGraph, CliqueError> {
    let cliques = g.cliques(ceiling).ok_or(CliqueError::TooLarge(ceiling))?;
    let labels: Vec<String> = cliques
        .iter()
        .map(|c| {
            let names: Vec<&str> = c.iter().map(|&v| g.label(v)).collect();
            format!("{{{}}}", names.join(","))
        })
        .collect();
    let sets: Vec<_> = cliques.iter().map(|c| g.set(c.iter().copied())).collect();
    let lookup: HashMap<Vec<usize>, usize> = cliques.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    // Every proper non-empty subset of a clique is a clique, so comparable
    // pairs are found by listing subsets rather than testing all pairs.
    let mut edges = Vec::new();
    for (a, c) in cliques.iter().enumerate() {
        let k = c.len();
        if k > 20 {
            for b in 0..cliques.len() {
                if b != a && sets[b].is_subset(&sets[a]) {
                    edges.push((b, a));
                }
            }
            continue;
        }
        for mask in 1..(1u32 << k) - 1 {
            let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| c[i]).collect();
            edges.push((lookup[&sub], a));
        }
    }
    let graph = Arc::new(
        Graph::from_edges(labels.clone(), &edges)
            .or_else(|_| {
                // Labels can collide when vertex labels contain commas or braces.
                let fallback = (0..cliques.len()).map(|i| format!("{}#{i}", labels[i])).collect();
                Graph::from_edges(fallback, &edges)
            })
            .expect("clique labels are distinct"),
    );
    Ok(CliqueGraph { graph, cliques, lookup })
}

/// The function `𝖷^⊐ : C ↦ C^⊏` from `𝖷(dom)` to `𝖷(cod)`.
pub fn clique_map(m: &Morphism) -> Result<Morphism, CliqueError> {
    let xd = clique_graph(m.dom())?;
    let xc = clique_graph(m.cod())?;
    clique_map_between(m, &xd, &xc)
}

/// Like [`clique_map`] but reusing precomputed clique graphs.
pub fn clique_map_between(m: &Morphism, xd: &CliqueGraph, xc: &CliqueGraph) -> Result<Morphism, CliqueError> {
    if !m.check(MorphProperty::CoSurjective) {
        return Err(CliqueError::NotCoSurjective);
    }
    let f: Vec<usize> = xd
        .cliques
        .iter()
        .map(|c| {
            let img: Vec<usize> = m.image(&m.dom().set(c.iter().copied())).ones().collect();
            xc.index_of(&img).expect("images of cliques are cliques")
        })
        .collect();
    Ok(Morphism::from_function(xd.graph.clone(), xc.graph.clone(), &f).expect("clique maps preserve edges"))
}

/// `∈_G : 𝖷G → G`, relating each vertex to the cliques containing it.
pub fn membership(g: &Arc<Graph>) -> Result<Morphism, CliqueError> {
    let x = clique_graph(g)?;
    Ok(membership_of(g, &x))
}

pub fn membership_of(g: &Arc<Graph>, x: &CliqueGraph) -> Morphism {
    let pairs = x
        .cliques
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&v| (v, i)));
    Morphism::new(x.graph.clone(), g.clone(), pairs).expect("membership preserves edges")
}
