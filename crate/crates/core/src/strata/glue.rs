use std::collections::BTreeSet;

use super::StrataError;
use crate::divisor_trees::{Color, DetailedTree, Link, RibbonKind};
use crate::trees::level_functions;

/// One way of gluing two strip trees: the glued tree, the merged level
/// function on the disjoint union of the two level sets, and the number `h`
/// of levels lost to ties.
#[derive(Debug, Clone)]
pub struct Glued {
    pub tree: DetailedTree,
    pub levels: Vec<usize>,
    pub h: usize,
}

fn ends(t: &DetailedTree) -> Result<(&str, &str), StrataError> {
    match &t.kind {
        RibbonKind::Strip { from, to } => Ok((from, to)),
        RibbonKind::Disc(_) => Err(StrataError::WrongKind("strip")),
    }
}

/// Renumbers the levels in use to `1..=k`, keeping their order.
fn compress_levels(t: &mut DetailedTree) {
    let used: BTreeSet<usize> = t
        .vertices
        .iter()
        .map(|x| x.level)
        .filter(|&l| l > 0)
        .collect();
    let rank: Vec<usize> = used.into_iter().collect();
    for x in t.vertices.iter_mut().filter(|x| x.level > 0) {
        x.level = rank.binary_search(&x.level).expect("level in use") + 1;
    }
}

/// Every tree obtained by joining `left` (ending at `r`) to `right` (starting
/// at `r`): one for each merge of the two level orders allowing ties.
pub fn glue(left: &DetailedTree, right: &DetailedTree) -> Result<Vec<Glued>, StrataError> {
    let (from, mid) = ends(left)?;
    let (start, to) = ends(right)?;
    if mid != start {
        return Err(StrataError::EndpointMismatch {
            left: mid.into(),
            right: start.into(),
        });
    }
    let (a, b) = (left.num_levels(), right.num_levels());

    let mut base = left.clone();
    base.kind = RibbonKind::Strip {
        from: from.into(),
        to: to.into(),
    };
    let x = (0..base.len())
        .find(|&v| base.color(v) == Color::Right)
        .ok_or(StrataError::WrongKind("strip"))?;
    let p = base.vertices[x].parent.expect("right end has a parent");
    let offset = base.len();
    let first = right.vertices[right.root].ribbon[0];
    for (v, y) in right.vertices.iter().enumerate() {
        let mut y = y.clone();
        y.parent = if v == first {
            Some(p)
        } else {
            y.parent.map(|q| q + offset)
        };
        y.ribbon
            .iter_mut()
            .chain(y.divisor.iter_mut())
            .for_each(|c| *c += offset);
        base.vertices.push(y);
    }
    let slot = base.vertices[p]
        .ribbon
        .iter()
        .position(|&c| c == x)
        .expect("right end is a ribbon child");
    base.vertices[p].ribbon[slot] = first + offset;
    base.vertices[x].parent = None;

    let strict: Vec<(usize, usize)> = (1..a)
        .map(|i| (i - 1, i))
        .chain((1..b).map(|i| (a + i - 1, a + i)))
        .collect();
    let mut out = Vec::new();
    for levels in level_functions(a + b, &strict, &[], a + b) {
        let mut t = base.clone();
        for (v, y) in t.vertices.iter_mut().enumerate() {
            if y.level > 0 {
                y.level = if v < offset {
                    levels[y.level - 1]
                } else {
                    levels[a + y.level - 1]
                };
            }
        }
        let k = levels.iter().copied().max().unwrap_or(0);
        out.push(Glued {
            tree: t.normalized(),
            h: a + b - k,
            levels,
        });
    }
    Ok(out)
}

/// Cuts a strip tree after its first `at` strip vertices; inverse to [`glue`].
pub fn split(t: &DetailedTree, at: usize) -> Result<(DetailedTree, DetailedTree), StrataError> {
    let (from, to) = ends(t)?;
    let path = t.strip_path();
    if at == 0 || at >= path.len() {
        return Err(StrataError::IndexOutOfRange {
            j: at,
            k: path.len().saturating_sub(1),
        });
    }
    let (p, c) = (path[at - 1], path[at]);
    let Link::Ribbon(Some(r)) = &t.vertices[c].link else {
        return Err(StrataError::WrongKind("labelled strip"));
    };

    let mut left = t.clone();
    left.kind = RibbonKind::Strip {
        from: from.into(),
        to: r.clone(),
    };
    let end = left.add_ribbon(p, Color::Right, crate::ClassExpr::zero(), Some(r));
    left.vertices[p].ribbon.pop();
    let slot = left.vertices[p]
        .ribbon
        .iter()
        .position(|&x| x == c)
        .expect("strip child");
    left.vertices[p].ribbon[slot] = end;
    left.vertices[c].parent = None;

    let mut right = t.clone();
    right.kind = RibbonKind::Strip {
        from: r.clone(),
        to: to.into(),
    };
    let root = right.root;
    let old = right.vertices[root].ribbon[0];
    right.vertices[old].parent = None;
    right.vertices[root].ribbon = vec![c];
    right.vertices[c].parent = Some(root);

    let (mut left, mut right) = (left.normalized(), right.normalized());
    compress_levels(&mut left);
    compress_levels(&mut right);
    Ok((left, right))
}
