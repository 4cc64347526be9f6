use std::collections::BTreeMap;

use serde::Serialize;

use super::StrataError;
use crate::divisor_trees::{Color, DetailedTree, RibbonKind};
use crate::palette::{pairings, pushed_maslov};
use crate::trees::DecoratedTree;
use crate::Palette;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Corrections {
    /// Ribbon edges joining two interior vertices off the strip path; each costs `n`.
    pub level0_edge_count: usize,
    /// Edges through the divisor; each costs `2(n-1)`.
    pub n_gt0: usize,
    /// Strip edges between strip vertices; they cost nothing.
    pub strip_edge_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub ambient: i64,
    pub per_vertex: BTreeMap<usize, i64>,
    pub corrections: Corrections,
    /// Dimension of the fibre product before dividing by the level actions.
    pub sum_dimension: i64,
    /// `sum - 2|λ|`.
    pub quotient_dimension: i64,
    pub levels: usize,
    /// Closed form where one is known; always equal to the relevant computed value.
    pub closed_form: Option<i64>,
    /// Unproved closed form for disc trees, reported for comparison only.
    pub conjectural: Option<i64>,
    /// `#interior - 1`, the codimension of the corner the stratum lies in.
    pub corner_codim: usize,
}

/// Dimension contributed by one vertex of a detailed tree in a complex `n`-dimensional ambient space.
pub fn vertex_dimension(
    t: &DetailedTree,
    v: usize,
    palette: &Palette,
    n: i64,
) -> Result<i64, StrataError> {
    let x = &t.vertices[v];
    let child_ms = || x.divisor.iter().filter_map(|&c| t.parent_m(c));
    let k_other = t.ribbon_valency(v) as i64;
    Ok(match x.color {
        Color::Divisor => {
            let c1_d = pairings(&x.alpha, palette)?.c1_d;
            2 * (n - 1) + 2 * c1_d + 2 * t.divisor_valency(v) as i64 - 6 + 2
        }
        Color::Sphere => {
            let c1_x = pairings(&x.alpha, palette)?.c1_x;
            let edges: i64 = t
                .parent_m(v)
                .into_iter()
                .chain(child_ms())
                .map(|m| 1 - m.abs())
                .sum();
            2 * n + 2 * c1_x + 2 * edges - 6
        }
        Color::Disc(_) => {
            let mu = pushed_maslov(&x.alpha, palette)?;
            n + mu + 2 * child_ms().map(|m| 1 - m).sum::<i64>() + (k_other - 1) - 2
        }
        Color::Strip => {
            let mu = pushed_maslov(&x.alpha, palette)?;
            mu + 2 * child_ms().map(|m| 1 - m).sum::<i64>() + (k_other - 2) - 1
        }
        Color::Left | Color::Right | Color::Marked(_) => 0,
    })
}

/// Per-vertex dimensions, the corrected total and its quotient by the level
/// actions. For strip trees the closed form is checked and a mismatch is an error.
pub fn stratum_dimension(
    t: &DetailedTree,
    palette: &Palette,
    n: i64,
) -> Result<DimensionReport, StrataError> {
    let mut per_vertex = BTreeMap::new();
    for v in 0..t.len() {
        per_vertex.insert(v, vertex_dimension(t, v, palette, n)?);
    }
    let interior = |v: usize| t.color(v).is_interior();
    let mut corrections = Corrections {
        level0_edge_count: 0,
        n_gt0: 0,
        strip_edge_count: 0,
    };
    for (v, x) in t.vertices.iter().enumerate() {
        match (x.parent, &x.link) {
            (Some(_), crate::divisor_trees::Link::Divisor(_)) => corrections.n_gt0 += 1,
            (Some(p), _) if interior(p) && interior(v) => {
                if t.color(p) == Color::Strip && x.color == Color::Strip {
                    corrections.strip_edge_count += 1;
                } else {
                    corrections.level0_edge_count += 1;
                }
            }
            _ => {}
        }
    }
    let sum_dimension = per_vertex.values().sum::<i64>()
        - n * corrections.level0_edge_count as i64
        - 2 * (n - 1) * corrections.n_gt0 as i64;
    let levels = t.num_levels();
    let ty = t.ribbon_type();
    let mu = pushed_maslov(&ty.beta, palette)?;
    let interior_count = t.interior().len();
    let (closed_form, conjectural) = match &t.kind {
        RibbonKind::Strip { .. } => {
            let closed = mu + ty.k() as i64 - interior_count as i64;
            if closed != sum_dimension {
                return Err(StrataError::IdentityViolation {
                    sum: sum_dimension,
                    closed,
                });
            }
            (Some(closed), None)
        }
        RibbonKind::Disc(_) => (
            None,
            Some(mu + n + ty.k() as i64 - 1 - interior_count as i64),
        ),
    };
    Ok(DimensionReport {
        ambient: n,
        per_vertex,
        corrections,
        sum_dimension,
        quotient_dimension: sum_dimension - 2 * levels as i64,
        levels,
        closed_form,
        conjectural,
        corner_codim: interior_count.saturating_sub(1),
    })
}

/// Dimension of the stratum of a decorated rooted tree. Every inside vertex is
/// a sphere in the divisor and every inside edge costs `2(n-1)`. The closed
/// form is the dimension of the open stratum of the tree's type, so the
/// quotient equals it exactly when there is one level.
pub fn tree_dimension(
    tree: &DecoratedTree,
    palette: &Palette,
    n: i64,
) -> Result<DimensionReport, StrataError> {
    tree.check_shape()?;
    let mut per_vertex = BTreeMap::new();
    for v in tree.inside() {
        let c1_d = pairings(tree.alpha(v), palette)?.c1_d;
        per_vertex.insert(
            v,
            2 * (n - 1) + 2 * c1_d + 2 * tree.valency(v) as i64 - 6 + 2,
        );
    }
    let inner_edges = tree
        .edges
        .iter()
        .filter(|e| tree.nodes[e.source].is_inside() && tree.nodes[e.target].is_inside())
        .count();
    let sum_dimension = per_vertex.values().sum::<i64>() - 2 * (n - 1) * inner_edges as i64;
    let levels = tree.num_levels();
    let c1_d = pairings(&tree.total_class(), palette)?.c1_d;
    let closed = 2 * c1_d + 2 * n + 2 * tree.outside.len() as i64 - 8;
    let quotient = sum_dimension - 2 * levels as i64;
    if quotient != closed - 2 * (levels as i64 - 1) {
        return Err(StrataError::IdentityViolation {
            sum: sum_dimension,
            closed,
        });
    }
    Ok(DimensionReport {
        ambient: n,
        per_vertex,
        corrections: Corrections {
            level0_edge_count: 0,
            n_gt0: inner_edges,
            strip_edge_count: 0,
        },
        sum_dimension,
        quotient_dimension: quotient,
        levels,
        closed_form: Some(closed),
        conjectural: None,
        corner_codim: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor_trees::fixtures::{
        decorated_strip, four_disc_tree, sd_palette, single_strip,
    };
    use crate::divisor_trees::{Side, Vertex};
    use crate::trees::fixtures::{chain_palette, five_vertex_tree};
    use crate::trees::TreeType;
    use crate::{ClassAtom, ClassExpr, Space};

    #[test]
    fn vertex_formulas_evaluate_directly() {
        // D vertex, n = 2, c1_D = 0, one output: 2 + 0 + 4 - 6 + 2 = 2.
        let p = Palette::new([
            ClassAtom::new("z", Space::D, 0, 0, None, crate::q(1)),
            ClassAtom::new("y", Space::X, 0, 1, None, crate::q(1)),
            ClassAtom::new("s", Space::strip("p", "q"), 0, 0, Some(1), crate::q(1)),
        ]);
        let mut t = DetailedTree::with_root(RibbonKind::Strip {
            from: "p".into(),
            to: "q".into(),
        });
        let st = t.add_ribbon(0, Color::Strip, ClassExpr::atom("s"), Some("p"));
        t.add_ribbon(st, Color::Right, ClassExpr::zero(), Some("q"));
        let d = t.add_divisor(st, Color::Divisor, ClassExpr::atom("z"), 1, 1);
        let s = t.add_divisor(d, Color::Sphere, ClassExpr::atom("y"), 0, -1);
        t.add_divisor(s, Color::Divisor, ClassExpr::atom("z"), 1, 1);
        assert_eq!(vertex_dimension(&t, d, &p, 2).unwrap(), 2 + 0 + 4 - 6 + 2);
        // s vertex, c1_X = 1, multiplicities (-1, 1): 4 + 2 + 0 - 6 = 0.
        assert_eq!(vertex_dimension(&t, s, &p, 2).unwrap(), 0);
        // Bare strip with μ = 1 and no marks: 1 + 0 + 0 - 1 = 0.
        let bare = single_strip("b");
        assert_eq!(vertex_dimension(&bare, 1, &sd_palette(), 2).unwrap(), 0);
    }

    #[test]
    fn bare_strip_is_zero_dimensional() {
        let r = stratum_dimension(&single_strip("b"), &sd_palette(), 2).unwrap();
        assert_eq!(
            (r.sum_dimension, r.closed_form, r.quotient_dimension),
            (0, Some(0), 0)
        );
    }

    #[test]
    fn decorated_strip_matches_closed_form() {
        for n in [2, 3] {
            let r = stratum_dimension(&decorated_strip(), &sd_palette(), n).unwrap();
            // μ(bh + a1 + e) = 3 + 2 + 2, two marks, two interior vertices.
            assert_eq!(r.closed_form, Some(7 + 2 - 2));
            assert_eq!(r.quotient_dimension, r.sum_dimension - 2);
            assert_eq!(r.corrections.level0_edge_count, 1);
            assert_eq!(r.corrections.n_gt0, 1);
        }
    }

    #[test]
    fn wrong_dimension_is_an_identity_violation() {
        // A stray divisor edge to an exterior vertex adds a correction with no vertex term.
        let mut t = decorated_strip();
        let extra = t.len();
        t.vertices.push(Vertex {
            color: Color::Marked(Side::L0),
            alpha: ClassExpr::zero(),
            level: 0,
            parent: Some(1),
            link: crate::divisor_trees::Link::Divisor(1),
            ribbon: vec![],
            divisor: vec![],
        });
        t.vertices[1].divisor.push(extra);
        assert!(matches!(
            stratum_dimension(&t, &sd_palette(), 2),
            Err(StrataError::IdentityViolation { .. })
        ));
    }

    #[test]
    fn disc_tree_reports_the_conjectural_form() {
        let p = sd_palette();
        let t = four_disc_tree();
        let r = stratum_dimension(&t, &p, 2).unwrap();
        assert_eq!(r.closed_form, None);
        assert_eq!(r.conjectural, Some(r.sum_dimension));
        assert_eq!(r.corner_codim, 3);
    }

    #[test]
    fn minimal_decorated_tree() {
        let p = Palette::new([ClassAtom::new("z", Space::D, 0, 0, None, crate::q(1))]);
        let t = DecoratedTree::minimal(&TreeType::new(ClassExpr::atom("z"), vec![-1, 1]));
        let r = tree_dimension(&t, &p, 2).unwrap();
        assert_eq!(
            (r.sum_dimension, r.quotient_dimension, r.closed_form),
            (2, 0, Some(0))
        );
    }

    #[test]
    fn decorated_sum_is_independent_of_the_shape() {
        let p = chain_palette();
        let t = five_vertex_tree();
        let r = tree_dimension(&t, &p, 3).unwrap();
        let c1_d = pairings(&t.total_class(), &p).unwrap().c1_d;
        assert_eq!(
            r.sum_dimension,
            2 * 3 + 2 * c1_d + 2 * t.outside.len() as i64 - 6
        );
        assert_eq!(
            r.quotient_dimension,
            r.closed_form.unwrap() - 2 * (t.num_levels() as i64 - 1)
        );
    }
}
