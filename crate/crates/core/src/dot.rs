//! Graphviz export. Vertices on the same level share a rank.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::divisor_trees::{DetailedTree, Link};
use crate::strata::FaceCensus;
use crate::trees::{DecoratedTree, Node};

fn ranks(out: &mut String, by_level: BTreeMap<usize, Vec<usize>>) {
    for (level, vs) in by_level {
        let names: Vec<String> = vs.iter().map(|v| format!("v{v}")).collect();
        let _ = writeln!(
            out,
            "  {{ rank=same; /* level {level} */ {}; }}",
            names.join("; ")
        );
    }
}

pub fn decorated_tree(t: &DecoratedTree) -> String {
    let mut out = String::from("digraph tree {\n");
    let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, n) in t.nodes.iter().enumerate() {
        match n {
            Node::Inside { alpha, level } => {
                by_level.entry(*level).or_default().push(i);
                let _ = writeln!(out, "  v{i} [label=\"{alpha}\"];");
            }
            Node::Outside => {
                let label = t.outside.iter().position(|&o| o == i).unwrap_or(i);
                let _ = writeln!(out, "  v{i} [shape=point, xlabel=\"{label}\"];");
            }
        }
    }
    for e in &t.edges {
        let _ = writeln!(out, "  v{} -> v{} [label=\"{}\"];", e.source, e.target, e.m);
    }
    ranks(&mut out, by_level);
    out.push_str("}\n");
    out
}

pub fn ribbon_tree(t: &DetailedTree) -> String {
    let mut out = String::from("digraph ribbon {\n");
    let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in t.preorder() {
        let x = &t.vertices[v];
        by_level.entry(x.level).or_default().push(v);
        let label = if x.alpha.is_zero() {
            x.color.to_string()
        } else {
            format!("{} {}", x.color, x.alpha)
        };
        let _ = writeln!(out, "  v{v} [label=\"{label}\"];");
    }
    for v in t.preorder() {
        let Some(p) = t.vertices[v].parent else {
            continue;
        };
        let style = match &t.vertices[v].link {
            Link::Divisor(m) => format!("style=dashed, label=\"{m}\""),
            Link::Ribbon(Some(pt)) => format!("label=\"{pt}\""),
            _ => String::new(),
        };
        let _ = writeln!(out, "  v{p} -> v{v} [{style}];");
    }
    ranks(&mut out, by_level);
    out.push_str("}\n");
    out
}

/// The top stratum above its codimension-one faces.
pub fn face_lattice(census: &FaceCensus, top: &str) -> String {
    let mut out = String::from("digraph faces {\n  top [label=\"");
    out.push_str(&top.replace('"', "'"));
    out.push_str("\"];\n");
    for (i, f) in census.faces.iter().enumerate() {
        let _ = writeln!(out, "  f{i} [label=\"R{} {}\"];", f.kind(), f.data.class());
        let _ = writeln!(out, "  top -> f{i};");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor_trees::fixtures::decorated_strip;

    #[test]
    fn ranks_follow_levels() {
        let t = decorated_strip();
        let dot = ribbon_tree(&t);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("level 1"));
        assert!(dot.contains("style=dashed"));
        let d = DecoratedTree::minimal(&crate::trees::TreeType::new(
            "e".parse().unwrap(),
            vec![1, 1],
        ));
        assert!(decorated_tree(&d).contains("rank=same"));
    }
}
