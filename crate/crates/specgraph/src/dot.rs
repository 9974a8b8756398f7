//! Graphviz output. Node names are positional (`v3`, `L2_5`, ...) and the
//! original labels go into `label` attributes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::fan::{tree_of_spokes, SpokeTree};
use crate::graph::Graph;
use crate::sequence::Sequence;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Undirected DOT of one graph; loops are left implicit.
pub fn graph_dot(g: &Graph, name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "graph {} {{", quote(name));
    for v in 0..g.len() {
        let _ = writeln!(s, "  v{v} [label={}];", quote(g.label(v)));
    }
    for (a, b) in g.edges() {
        let _ = writeln!(s, "  v{a} -- v{b};");
    }
    s.push_str("}\n");
    s
}

/// Hasse diagram of the induced poset on levels `0..=horizon`. Levels sit
/// on their own ranks, coarse above fine; the covering pairs are exactly the
/// step relations.
pub fn poset_dot(s: &Sequence, horizon: usize) -> String {
    let top = horizon.min(s.last());
    let mut out = String::from("digraph poset {\n  rankdir=TB;\n  node [shape=plaintext];\n");
    for n in 0..=top {
        let g = s.graph(n);
        let _ = writeln!(out, "  subgraph level{n} {{\n    rank=same;");
        for v in 0..g.len() {
            let _ = writeln!(out, "    L{n}_{v} [label={}];", quote(g.label(v)));
        }
        out.push_str("  }\n");
    }
    for n in 0..top {
        for (h, g) in s.step(n).pairs() {
            let _ = writeln!(out, "  L{n}_{h} -> L{}_{g} [arrowhead=none];", n + 1);
        }
    }
    out.push_str("}\n");
    out
}

/// Tree of spokes: one node per spoke per fan level, joined to the spoke it
/// succeeds. Orphans get no incoming edge.
pub fn spoke_tree_dot(s: &Sequence, tree: &SpokeTree) -> String {
    let mut out = String::from("digraph spokes {\n  rankdir=TB;\n");
    let top = tree.start + tree.fans.len() - 1;
    for n in tree.start..=top {
        let g = s.graph(n);
        let fan = tree.fan(n);
        let _ = writeln!(out, "  subgraph level{n} {{\n    rank=same;");
        for (i, spoke) in fan.spokes.iter().enumerate() {
            let end = g.label(*spoke.last().expect("non-empty spoke"));
            let _ = writeln!(out, "    S{n}_{i} [label={}];", quote(&format!("{n}: {end}")));
        }
        out.push_str("  }\n");
    }
    for n in tree.start + 1..=top {
        for j in 0..tree.fan(n).spokes.len() {
            if let Some(i) = tree.parent(n, j) {
                let _ = writeln!(out, "  S{}_{i} -> S{n}_{j};", n - 1);
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Writes `level_<n>.dot` for every level, plus `poset.dot` when asked and
/// `spokes.dot` when the prefix ends in fans. Returns the files written.
pub fn write_dot_dir(s: &Sequence, dir: &Path, with_poset: bool) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: String, body: String| -> std::io::Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        files.push(p);
        Ok(())
    };
    for n in 0..=s.last() {
        put(format!("level_{n}.dot"), graph_dot(s.graph(n), &format!("G_{n}")))?;
    }
    if with_poset {
        put("poset.dot".into(), poset_dot(s, s.last()))?;
    }
    if let Ok(tree) = tree_of_spokes(s) {
        put("spokes.dot".into(), spoke_tree_dot(s, &tree))?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorName};
    use std::collections::BTreeMap;

    fn count(hay: &str, needle: &str) -> usize {
        hay.matches(needle).count()
    }

    #[test]
    fn claw_has_four_nodes() {
        let d = graph_dot(&Graph::fan(&[1, 1, 1]), "claw");
        assert_eq!(count(&d, "[label="), 4);
        assert_eq!(count(&d, " -- "), 3);
    }

    #[test]
    fn arc_level_three_is_a_seven_node_path() {
        let s = generate(GeneratorName::ArcDyadic, 3, &BTreeMap::new()).unwrap();
        let d = graph_dot(s.graph(3), "G_3");
        assert_eq!(count(&d, "[label="), 7);
        assert_eq!(count(&d, " -- "), 6);
    }

    #[test]
    fn labels_are_escaped() {
        let g = Graph::from_edges(vec!["a\"b".into(), "c".into()], &[(0, 1)]).unwrap();
        assert!(graph_dot(&g, "x").contains(r#"label="a\"b""#));
    }

    #[test]
    fn modification_fail_poset_has_the_figure_shape() {
        let s = generate(GeneratorName::ModificationFail, 4, &BTreeMap::new()).unwrap();
        let d = poset_dot(&s, 4);
        // 2 + 4 + 3 + 5 + 4 points.
        assert_eq!(count(&d, "[label="), 18);
        // Each step carries the a and b threads, one connector and one new or
        // continued c chain, plus the chains already running.
        let covers = count(&d, "->");
        assert_eq!(covers, 4 + 4 + 5 + 5);
        assert!(d.contains("L1_2 -> L2_0"), "d1 lies above a2");
        assert!(d.contains("L0_0 -> L1_3"), "a0 lies above c0,1");
    }

    #[test]
    fn spoke_tree_links_levels() {
        let s = generate(GeneratorName::NastyFan, 2, &BTreeMap::new()).unwrap();
        let tree = tree_of_spokes(&s).unwrap();
        let d = spoke_tree_dot(&s, &tree);
        assert_eq!(count(&d, "->"), 8 + 16);
    }

    #[test]
    fn directory_export_names_files_by_level() {
        let s = generate(GeneratorName::CantorFan, 2, &BTreeMap::new()).unwrap();
        let dir = std::env::temp_dir().join(format!("specgraph-dot-{}", std::process::id()));
        let files = write_dot_dir(&s, &dir, true).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["level_0.dot", "level_1.dot", "level_2.dot", "poset.dot", "spokes.dot"]);
        fs::remove_dir_all(dir).unwrap();
    }
}
