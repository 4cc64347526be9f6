use std::collections::BTreeMap;

use super::{Color, DetailedTree, RibbonError, RibbonKind, Side};
use crate::trees::{DecoratedTree, Node};
use crate::ClassExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SColor {
    /// The disc or strip component itself.
    Root,
    /// Sphere in the ambient manifold.
    Sphere,
    /// Divisor vertex carrying a decorated rooted tree.
    Divisor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SVertex {
    pub color: SColor,
    pub alpha: ClassExpr,
    pub parent: Option<usize>,
    /// Positive multiplicity of the edge to the parent.
    pub m: i64,
    pub tree: Option<DecoratedTree>,
}

/// A single disc or strip component with the tree `S` of its sphere bubbles;
/// each divisor vertex of `S` carries its own decorated rooted tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTree {
    pub kind: RibbonKind,
    pub k0: usize,
    pub k1: usize,
    /// `vertices[0]` is the root.
    pub vertices: Vec<SVertex>,
    /// Global level of each inside vertex `(S vertex, node of its tree)`.
    pub levels: BTreeMap<(usize, usize), usize>,
}

fn invalid(clause: &'static str, detail: String) -> RibbonError {
    RibbonError::InvalidInput { clause, detail }
}

impl DivisorTree {
    pub fn new(kind: RibbonKind, root_alpha: ClassExpr) -> Self {
        let root = SVertex {
            color: SColor::Root,
            alpha: root_alpha,
            parent: None,
            m: 0,
            tree: None,
        };
        DivisorTree {
            kind,
            k0: 0,
            k1: 0,
            vertices: vec![root],
            levels: BTreeMap::new(),
        }
    }

    pub fn add_sphere(&mut self, parent: usize, alpha: ClassExpr, m: i64) -> usize {
        self.vertices.push(SVertex {
            color: SColor::Sphere,
            alpha,
            parent: Some(parent),
            m,
            tree: None,
        });
        self.vertices.len() - 1
    }

    /// Adds a divisor vertex; its global levels start as the tree's own levels
    /// shifted by `offset`.
    pub fn add_divisor(
        &mut self,
        parent: usize,
        tree: DecoratedTree,
        m: i64,
        offset: usize,
    ) -> usize {
        let id = self.vertices.len();
        for v in tree.inside() {
            self.levels.insert((id, v), tree.level(v) + offset);
        }
        let alpha = tree.total_class();
        self.vertices.push(SVertex {
            color: SColor::Divisor,
            alpha,
            parent: Some(parent),
            m,
            tree: Some(tree),
        });
        id
    }

    fn s_children(&self, v: usize) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&c| self.vertices[c].parent == Some(v))
            .collect()
    }

    pub fn total_class(&self) -> ClassExpr {
        self.vertices.iter().map(|v| v.alpha.clone()).sum()
    }

    /// Inlines every decorated tree into `S`, producing the one-interior-vertex
    /// detailed ribbon tree.
    pub fn detail(&self) -> Result<DetailedTree, RibbonError> {
        let root = self
            .vertices
            .first()
            .ok_or_else(|| invalid("shape", "empty tree".into()))?;
        if root.color != SColor::Root || root.parent.is_some() {
            return Err(invalid("shape", "vertex 0 must be the root".into()));
        }
        if self
            .vertices
            .iter()
            .skip(1)
            .any(|v| v.color == SColor::Root)
        {
            return Err(invalid("colour", "exactly one root vertex".into()));
        }
        let mut out = DetailedTree::with_root(self.kind.clone());
        let top = match &self.kind {
            RibbonKind::Disc(side) => {
                if self.k(side.flip()) != 0 {
                    return Err(invalid(
                        "marks",
                        format!("disc tree on {side:?} has marks on the other side"),
                    ));
                }
                let d = out.add_ribbon(0, Color::Disc(*side), root.alpha.clone(), None);
                for _ in 0..self.k(*side) {
                    out.add_ribbon(d, Color::Marked(*side), ClassExpr::zero(), None);
                }
                d
            }
            RibbonKind::Strip { from, to } => {
                let s = out.add_ribbon(0, Color::Strip, root.alpha.clone(), Some(from));
                for _ in 0..self.k0 {
                    out.add_ribbon(s, Color::Marked(Side::L0), ClassExpr::zero(), None);
                }
                out.add_ribbon(s, Color::Right, ClassExpr::zero(), Some(to));
                for _ in 0..self.k1 {
                    out.add_ribbon(s, Color::Marked(Side::L1), ClassExpr::zero(), None);
                }
                s
            }
        };
        for c in self.s_children(0) {
            self.graft(c, top, &mut out)?;
        }
        Ok(out)
    }

    fn k(&self, side: Side) -> usize {
        match side {
            Side::L0 => self.k0,
            Side::L1 => self.k1,
        }
    }

    /// Places the divisor vertex `v` of `S` (and everything below it) under `at`.
    fn graft(&self, v: usize, at: usize, out: &mut DetailedTree) -> Result<(), RibbonError> {
        let sv = &self.vertices[v];
        if sv.m <= 0 {
            return Err(invalid(
                "multiplicity",
                format!("S edge into {v} must be positive"),
            ));
        }
        if sv.color != SColor::Divisor {
            return Err(invalid(
                "colour",
                format!("vertex {v} must be a divisor vertex: no D-D, d-s or s-s edges"),
            ));
        }
        let tree = sv
            .tree
            .as_ref()
            .ok_or_else(|| invalid("tree", format!("divisor vertex {v} has no tree")))?;
        tree.check_shape()
            .map_err(|e| invalid("tree", e.to_string()))?;
        let ty = tree.tree_type();
        let kids = self.s_children(v);
        if ty.alpha != sv.alpha {
            return Err(invalid(
                "type",
                format!(
                    "tree at {v} has class {} but the vertex has {}",
                    ty.alpha, sv.alpha
                ),
            ));
        }
        if ty.input_multiplicity() != sv.m {
            return Err(invalid(
                "type",
                format!(
                    "tree at {v} has input multiplicity {}",
                    ty.input_multiplicity()
                ),
            ));
        }
        if ty.outputs().len() != kids.len() {
            return Err(invalid(
                "type",
                format!(
                    "tree at {v} has {} outputs for {} S-children",
                    ty.outputs().len(),
                    kids.len()
                ),
            ));
        }
        for (&mo, &c) in ty.outputs().iter().zip(&kids) {
            if mo != -self.vertices[c].m {
                return Err(invalid(
                    "type",
                    format!("output multiplicity {mo} at {v} does not match edge to {c}"),
                ));
            }
        }
        self.check_levels(v, tree)?;
        // Inline the tree, walking from the root edge.
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        let first = tree.child_edges(tree.root()).next().expect("shape checked");
        let mut stack = vec![(first.target, at, first.m)];
        while let Some((node, parent, m)) = stack.pop() {
            match &tree.nodes[node] {
                Node::Inside { alpha, .. } => {
                    let level = self.levels[&(v, node)];
                    let id = out.add_divisor(parent, Color::Divisor, alpha.clone(), level, m);
                    map.insert(node, id);
                    stack.extend(tree.child_edges(node).map(|e| (e.target, id, e.m)));
                }
                Node::Outside => {
                    let i = tree
                        .outside
                        .iter()
                        .position(|&o| o == node)
                        .expect("outside vertex");
                    let c = kids[i - 1];
                    let sc = &self.vertices[c];
                    if sc.color != SColor::Sphere {
                        return Err(invalid(
                            "colour",
                            format!("S-child {c} of a divisor vertex must be a sphere"),
                        ));
                    }
                    let s = out.add_divisor(parent, Color::Sphere, sc.alpha.clone(), 0, m);
                    for g in self.s_children(c) {
                        self.graft(g, s, out)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// The global order restricted to one decorated tree must be that tree's order.
    fn check_levels(&self, v: usize, tree: &DecoratedTree) -> Result<(), RibbonError> {
        let inside = tree.inside();
        for &a in &inside {
            let ga = *self
                .levels
                .get(&(v, a))
                .ok_or_else(|| invalid("levels", format!("no level for ({v},{a})")))?;
            if ga == 0 {
                return Err(invalid("levels", "divisor levels start at 1".into()));
            }
            for &b in &inside {
                let gb = self.levels.get(&(v, b)).copied().unwrap_or(0);
                if (tree.level(a) <= tree.level(b)) != (ga <= gb) {
                    return Err(invalid(
                        "levels",
                        format!("global order disagrees with the tree at {v}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::sd_palette;
    use super::*;
    use crate::trees::{Edge, TreeType};

    fn pq() -> RibbonKind {
        RibbonKind::Strip {
            from: "p".into(),
            to: "q".into(),
        }
    }

    #[test]
    fn bare_strip_details_to_itself() {
        let t = DivisorTree::new(pq(), ClassExpr::atom("b"))
            .detail()
            .unwrap();
        assert_eq!(t.num_levels(), 0);
        assert_eq!(t.len(), 3);
        assert!(t.is_valid(&sd_palette()));
    }

    #[test]
    fn minimal_tree_inlines_at_level_one() {
        let mut s = DivisorTree::new(RibbonKind::Disc(Side::L0), ClassExpr::atom("h0"));
        s.k0 = 1;
        let minimal = DecoratedTree::minimal(&TreeType::new(ClassExpr::atom("e"), vec![-1]));
        s.add_divisor(0, minimal, 1, 0);
        let t = s.detail().unwrap();
        assert_eq!(t.num_levels(), 1);
        assert!(t.is_valid(&sd_palette()), "{:?}", t.validate(&sd_palette()));
        assert_eq!(t.total_class(), s.total_class());
    }

    /// `S` with three divisor vertices: two on the disc, one above a sphere
    /// hanging off the first.
    fn three_divisor_tree() -> DivisorTree {
        let mut s = DivisorTree::new(RibbonKind::Disc(Side::L1), "h1+a1".parse().unwrap());
        s.k1 = 2;
        // Divisor tree with class f, input 1 and one output -1 towards a sphere.
        let t1 = DecoratedTree::minimal(&TreeType::new(ClassExpr::atom("f"), vec![-1, -1]));
        let v1 = s.add_divisor(0, t1, 1, 1);
        let sp = s.add_sphere(v1, "2*x".parse().unwrap(), 1);
        // Two-vertex chain: f above g, joined by a negative edge.
        let chain = DecoratedTree {
            nodes: vec![
                Node::Outside,
                Node::Inside {
                    alpha: ClassExpr::atom("f"),
                    level: 2,
                },
                Node::Inside {
                    alpha: ClassExpr::atom("g"),
                    level: 1,
                },
            ],
            edges: vec![
                Edge {
                    source: 0,
                    target: 1,
                    m: 1,
                },
                Edge {
                    source: 1,
                    target: 2,
                    m: -1,
                },
            ],
            outside: vec![0],
        };
        let v3 = s.add_divisor(sp, chain, 1, 0);
        s.levels.insert((v3, 1), 3);
        s.levels.insert((v3, 2), 2);
        s.levels.insert((v1, 1), 1);
        s
    }

    #[test]
    fn nested_fixture_details_validly() {
        let p = sd_palette();
        let s = three_divisor_tree();
        let t = s.detail().unwrap();
        assert!(t.is_valid(&p), "{:?}", t.validate(&p));
        assert_eq!(t.num_levels(), 3);
        assert_eq!(t.count(|c| c == Color::Divisor), 3);
        assert_eq!(t.count(|c| c == Color::Sphere), 1);
        assert_eq!(t.total_class(), s.total_class());
    }

    #[test]
    fn level_disagreement_is_reported() {
        let mut s = three_divisor_tree();
        let v3 = 3;
        s.levels.insert((v3, 1), 1);
        s.levels.insert((v3, 2), 2);
        assert!(matches!(
            s.detail(),
            Err(RibbonError::InvalidInput {
                clause: "levels",
                ..
            })
        ));
    }

    #[test]
    fn output_sign_must_match_s_edge() {
        let mut s = DivisorTree::new(pq(), ClassExpr::atom("bh"));
        let t1 = DecoratedTree::minimal(&TreeType::new(ClassExpr::atom("f"), vec![-1, 1]));
        let v = s.add_divisor(0, t1, 1, 0);
        s.add_sphere(v, ClassExpr::atom("x"), 1);
        assert!(matches!(
            s.detail(),
            Err(RibbonError::InvalidInput { clause: "type", .. })
        ));
    }

    #[test]
    fn detail_separates_level_choices() {
        // Same S, two decorated trees whose global order differs.
        let build = |l1: usize, l2: usize| {
            let pr = RibbonKind::Strip {
                from: "p".into(),
                to: "r".into(),
            };
            let mut s = DivisorTree::new(pr, "bg".parse().unwrap());
            let e = DecoratedTree::minimal(&TreeType::new(ClassExpr::atom("e"), vec![-1]));
            let a = s.add_divisor(0, e.clone(), 1, 0);
            let b = s.add_divisor(0, e, 1, 0);
            s.levels.insert((a, 1), l1);
            s.levels.insert((b, 1), l2);
            s.detail().unwrap()
        };
        let p = sd_palette();
        let forms: std::collections::BTreeSet<String> = [(1, 1), (1, 2), (2, 1)]
            .iter()
            .map(|&(a, b)| build(a, b))
            .inspect(|t| assert!(t.is_valid(&p)))
            .map(|t| t.canonical_form())
            .collect();
        // (1,2) and (2,1) are isomorphic by swapping the two identical branches.
        assert_eq!(forms.len(), 2);
    }
}
