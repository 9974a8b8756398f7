//! JSON interchange for graphs, morphisms, sequences and amalgam squares.
//!
//! Output is deterministic: vertices keep their index order, edges and
//! pairs are sorted, so a load followed by a save reproduces the bytes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::Amalgam;
use crate::graph::{Graph, GraphError};
use crate::relation::{same_graph, Morphism, MorphismError};
use crate::sequence::{Guarantee, Provenance, Sequence, SequenceError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("step {0} does not join the neighbouring graphs")]
    StepMismatch(usize),
    #[error("vertex index {0} out of range")]
    Index(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub dom: GraphJson,
    pub cod: GraphJson,
    /// `[h, g]` with `h` in the codomain and `g` in the domain.
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceJson {
    pub graphs: Vec<GraphJson>,
    pub steps: Vec<MorphismJson>,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default)]
    pub guarantees: Vec<Guarantee>,
}

/// A cospan `f, g` with its amalgam.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareJson {
    pub f: MorphismJson,
    pub g: MorphismJson,
    pub apex: GraphJson,
    pub left: MorphismJson,
    pub right: MorphismJson,
}

impl GraphJson {
    pub fn of(g: &Graph) -> Self {
        GraphJson {
            vertices: g.labels().to_vec(),
            edges: g.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    /// Loops in the input are dropped; every vertex meets itself anyway.
    pub fn build(&self) -> Result<Graph, IoError> {
        let n = self.vertices.len();
        let mut edges = Vec::with_capacity(self.edges.len());
        for &[a, b] in &self.edges {
            if a >= n || b >= n {
                return Err(IoError::Index(a.max(b)));
            }
            if a != b {
                edges.push((a, b));
            }
        }
        Ok(Graph::from_edges(self.vertices.clone(), &edges)?)
    }
}

impl MorphismJson {
    pub fn of(m: &Morphism) -> Self {
        MorphismJson {
            dom: GraphJson::of(m.dom()),
            cod: GraphJson::of(m.cod()),
            pairs: m.pairs().into_iter().map(|(h, g)| [h, g]).collect(),
        }
    }

    pub fn build(&self) -> Result<Morphism, IoError> {
        let dom = Arc::new(self.dom.build()?);
        let cod = Arc::new(self.cod.build()?);
        self.build_between(dom, cod)
    }

    fn build_between(&self, dom: Arc<Graph>, cod: Arc<Graph>) -> Result<Morphism, IoError> {
        Ok(Morphism::new(dom, cod, self.pairs.iter().map(|&[h, g]| (h, g)))?)
    }
}

impl SequenceJson {
    pub fn of(s: &Sequence) -> Self {
        SequenceJson {
            graphs: s.graphs().iter().map(|g| GraphJson::of(g)).collect(),
            steps: s.steps().iter().map(MorphismJson::of).collect(),
            provenance: s.provenance.clone(),
            guarantees: s.guarantees.clone(),
        }
    }

    /// Steps are rebuilt on the shared level graphs after checking that
    /// their embedded copies agree with them.
    pub fn build(&self) -> Result<Sequence, IoError> {
        let graphs: Vec<Arc<Graph>> = self.graphs.iter().map(|g| g.build().map(Arc::new)).collect::<Result<_, _>>()?;
        if graphs.is_empty() || graphs.len() != self.steps.len() + 1 {
            return Err(SequenceError::Shape.into());
        }
        let mut steps = Vec::with_capacity(self.steps.len());
        for (n, st) in self.steps.iter().enumerate() {
            let (dom, cod) = (Arc::new(st.dom.build()?), Arc::new(st.cod.build()?));
            if !same_graph(&dom, &graphs[n + 1]) || !same_graph(&cod, &graphs[n]) {
                return Err(IoError::StepMismatch(n));
            }
            steps.push(st.build_between(graphs[n + 1].clone(), graphs[n].clone())?);
        }
        Ok(Sequence::new(graphs, steps)?
            .with_provenance(self.provenance.clone())
            .with_guarantees(self.guarantees.clone()))
    }
}

impl SquareJson {
    pub fn of(f: &Morphism, g: &Morphism, a: &Amalgam) -> Self {
        SquareJson {
            f: MorphismJson::of(f),
            g: MorphismJson::of(g),
            apex: GraphJson::of(&a.apex),
            left: MorphismJson::of(&a.left),
            right: MorphismJson::of(&a.right),
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn graph_to_json(g: &Graph) -> String {
    pretty(&GraphJson::of(g))
}

pub fn graph_from_json(text: &str) -> Result<Graph, IoError> {
    serde_json::from_str::<GraphJson>(text)?.build()
}

pub fn morphism_to_json(m: &Morphism) -> String {
    pretty(&MorphismJson::of(m))
}

pub fn morphism_from_json(text: &str) -> Result<Morphism, IoError> {
    serde_json::from_str::<MorphismJson>(text)?.build()
}

pub fn sequence_to_json(s: &Sequence) -> String {
    pretty(&SequenceJson::of(s))
}

pub fn sequence_from_json(text: &str) -> Result<Sequence, IoError> {
    serde_json::from_str::<SequenceJson>(text)?.build()
}

pub fn square_to_json(f: &Morphism, g: &Morphism, a: &Amalgam) -> String {
    pretty(&SquareJson::of(f, g, a))
}

/// Any serializable report, in the same layout as the other files.
pub fn to_json<T: Serialize>(v: &T) -> String {
    pretty(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorName};
    use std::collections::BTreeMap;

    #[test]
    fn graph_schema_matches() {
        let g = Graph::path(3);
        let v: serde_json::Value = serde_json::from_str(&graph_to_json(&g)).unwrap();
        assert_eq!(v["vertices"], serde_json::json!(["0", "1", "2"]));
        assert_eq!(v["edges"], serde_json::json!([[0, 1], [1, 2]]));
    }

    #[test]
    fn loops_are_ignored_on_load() {
        let g = graph_from_json(r#"{"vertices":["a","b"],"edges":[[0,0],[0,1]]}"#).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(graph_from_json(r#"{"vertices":["a"],"edges":[[0,3]]}"#).is_err());
    }

    #[test]
    fn morphisms_round_trip() {
        let g = Arc::new(Graph::path(3));
        let m = Morphism::edge_split(&g);
        let text = morphism_to_json(&m);
        let back = morphism_from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(morphism_to_json(&back), text);
    }

    #[test]
    fn edge_breaking_morphisms_are_rejected() {
        let text = r#"{"dom":{"vertices":["x","y"],"edges":[[0,1]]},
                       "cod":{"vertices":["a","b"],"edges":[]},
                       "pairs":[[0,0],[1,1]]}"#;
        assert!(matches!(morphism_from_json(text), Err(IoError::Morphism(_))));
    }

    #[test]
    fn every_generator_round_trips_byte_for_byte() {
        for name in GeneratorName::ALL {
            let s = generate(name, 3, &BTreeMap::new()).unwrap();
            let text = sequence_to_json(&s);
            let back = sequence_from_json(&text).unwrap();
            assert_eq!(back, s, "{name}");
            assert_eq!(back.guarantees, s.guarantees);
            assert_eq!(back.provenance, s.provenance);
            assert_eq!(sequence_to_json(&back), text, "{name}");
        }
    }

    #[test]
    fn mismatched_steps_are_rejected() {
        let s = generate(GeneratorName::ArcDyadic, 2, &BTreeMap::new()).unwrap();
        let mut j = SequenceJson::of(&s);
        j.graphs.swap(1, 2);
        assert!(j.build().is_err());
    }
}
