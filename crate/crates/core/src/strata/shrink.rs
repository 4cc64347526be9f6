use std::collections::BTreeSet;

use super::StrataError;
use crate::divisor_trees::{Color, DetailedTree, Link};

/// Merges `c` into its parent: classes add, `c`'s ribbon children take its
/// place in the parent's ribbon order, divisor children move across.
fn merge_into_parent(t: &mut DetailedTree, c: usize) {
    let p = t.vertices[c].parent.expect("merged vertex has a parent");
    let alpha = t.vertices[c].alpha.clone();
    t.vertices[p].alpha += &alpha;
    let ribbon = std::mem::take(&mut t.vertices[c].ribbon);
    let divisor = std::mem::take(&mut t.vertices[c].divisor);
    for &x in ribbon.iter().chain(&divisor) {
        t.vertices[x].parent = Some(p);
    }
    match t.vertices[p].ribbon.iter().position(|&x| x == c) {
        Some(pos) => {
            t.vertices[p].ribbon.splice(pos..=pos, ribbon);
        }
        None => {
            t.vertices[p].divisor.retain(|&x| x != c);
            t.vertices[p].ribbon.extend(ribbon);
        }
    }
    t.vertices[p].divisor.extend(divisor);
    t.vertices[c].parent = None;
}

/// Contracts the parent edges of `children`, deepest first.
fn contract(t: &mut DetailedTree, children: &BTreeSet<usize>) {
    for c in t.preorder().into_iter().rev() {
        if children.contains(&c) {
            merge_into_parent(t, c);
        }
    }
}

/// The `(i, i+1)` level shrinking. For `i >= 1` divisor vertices on levels `i`
/// and `i+1` joined by an edge merge; for `i = 0` every level-1 vertex is
/// absorbed into the level-0 component it touches, or becomes an ambient
/// sphere if it touches none.
pub fn level_shrink(t: &DetailedTree, i: usize) -> Result<DetailedTree, StrataError> {
    let levels = t.num_levels();
    if i + 1 > levels {
        return Err(StrataError::LevelOutOfRange { level: i, levels });
    }
    let mut out = t.clone();
    if i == 0 {
        shrink_zero(&mut out);
    } else {
        let merge: BTreeSet<usize> = (0..t.len())
            .filter(|&v| {
                let p = t.vertices[v].parent;
                let pair = p.map(|p| (t.vertices[p].level, t.vertices[v].level));
                t.color(v) == Color::Divisor
                    && matches!(t.vertices[v].link, Link::Divisor(_))
                    && matches!(pair, Some((a, b)) if a.min(b) == i && a.max(b) == i + 1)
            })
            .collect();
        contract(&mut out, &merge);
    }
    for x in out.vertices.iter_mut() {
        if x.level > i {
            x.level -= 1;
        }
    }
    Ok(out.normalized())
}

fn shrink_zero(t: &mut DetailedTree) {
    let n = t.len();
    let low = |t: &DetailedTree, v: usize| t.vertices[v].level <= 1 && !t.color(v).is_exterior();
    // Components of level <= 1 vertices joined by divisor edges.
    let mut comp: Vec<Option<usize>> = vec![None; n];
    let mut tops = Vec::new();
    for v in t.preorder() {
        if !low(t, v) || comp[v].is_some() {
            continue;
        }
        let top = v;
        let mut stack = vec![v];
        let mut members = Vec::new();
        while let Some(w) = stack.pop() {
            if comp[w].is_some() {
                continue;
            }
            comp[w] = Some(top);
            members.push(w);
            for c in t.vertices[w].divisor.clone() {
                if low(t, c) && comp[c].is_none() {
                    stack.push(c);
                }
            }
        }
        if members.iter().any(|&w| t.vertices[w].level == 1) {
            tops.push((top, members));
        }
    }
    let mut merge = BTreeSet::new();
    for (top, members) in &tops {
        merge.extend(members.iter().copied().filter(|w| w != top));
        // Only the top of a component can be a ribbon vertex; a level-1 top is
        // absorbed by nothing and becomes an ambient sphere.
        if t.vertices[*top].level == 1 {
            t.vertices[*top].color = Color::Sphere;
            t.vertices[*top].level = 0;
        }
    }
    contract(t, &merge);
}

/// Contracts the ribbon edge above `child`, which must join two interior vertices.
pub fn level0_edge_shrink(t: &DetailedTree, child: usize) -> Result<DetailedTree, StrataError> {
    let p = t
        .vertices
        .get(child)
        .and_then(|x| x.parent)
        .ok_or(StrataError::NotLevel0Edge(child))?;
    let ribbon = matches!(t.vertices[child].link, Link::Ribbon(_));
    if !(ribbon && t.color(p).is_interior() && t.color(child).is_interior()) {
        return Err(StrataError::NotLevel0Edge(child));
    }
    let mut out = t.clone();
    merge_into_parent(&mut out, child);
    Ok(out.normalized())
}

/// Repeated `(0,1)` shrinking down to a tree with no levels: the top stratum
/// of the corner the tree lies in.
pub fn flatten(t: &DetailedTree) -> DetailedTree {
    let mut cur = t.clone();
    while cur.num_levels() > 0 {
        cur = level_shrink(&cur, 0).expect("at least one level");
    }
    cur
}

/// Every tree reachable by one shrinking move.
pub(super) fn moves(t: &DetailedTree) -> Vec<DetailedTree> {
    let mut out: Vec<DetailedTree> = (0..t.num_levels())
        .filter_map(|i| level_shrink(t, i).ok())
        .collect();
    for v in 0..t.len() {
        if let Ok(s) = level0_edge_shrink(t, v) {
            out.push(s);
        }
    }
    out
}
