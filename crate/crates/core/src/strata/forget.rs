use super::StrataError;
use crate::divisor_trees::{DetailedTree, RibbonKind};

#[derive(Debug, Clone)]
pub struct Forgotten {
    pub tree: DetailedTree,
    /// 1: the vertex carrying the mark has nonzero class; 2: zero class but
    /// still stable; 3: zero class and the vertex is removed.
    pub case: u8,
}

/// Forgets the `j`-th boundary marked point (1-based, in counter-clockwise
/// order) of a disc tree.
pub fn forget_boundary_mark(t: &DetailedTree, j: usize) -> Result<Forgotten, StrataError> {
    if !matches!(t.kind, RibbonKind::Disc(_)) {
        return Err(StrataError::WrongKind("disc"));
    }
    let marks = t.marks();
    if j == 0 {
        return Err(StrataError::CannotForgetRoot);
    }
    if j > marks.len() {
        return Err(StrataError::IndexOutOfRange { j, k: marks.len() });
    }
    let x = marks[j - 1];
    let v = t.vertices[x]
        .parent
        .expect("a mark other than the root has a parent");
    let zero = t.decoration_class(v).is_zero();
    let k_v = t.ribbon_valency(v) - 1;
    let mut out = t.clone();
    out.vertices[v].ribbon.retain(|&c| c != x);
    out.vertices[x].parent = None;
    let case = if !zero {
        1
    } else if k_v >= 3 {
        2
    } else {
        let y = out.vertices[v].ribbon[0];
        let p = out.vertices[v]
            .parent
            .expect("interior vertex has a parent");
        if out.color(p).is_exterior() && out.color(y).is_exterior() {
            return Err(StrataError::Degenerate);
        }
        let slot = out.vertices[p]
            .ribbon
            .iter()
            .position(|&c| c == v)
            .expect("v is a ribbon child");
        out.vertices[p].ribbon[slot] = y;
        out.vertices[y].parent = Some(p);
        out.vertices[y].link = out.vertices[v].link.clone();
        out.vertices[v].parent = None;
        3
    };
    Ok(Forgotten {
        tree: out.normalized(),
        case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor_trees::fixtures::{four_disc_tree, sd_palette};
    use crate::divisor_trees::{random_dd, Color, Side};
    use crate::ClassExpr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_disc(alpha: &str, marks: usize) -> DetailedTree {
        let mut t = DetailedTree::with_root(RibbonKind::Disc(Side::L0));
        let d = t.add_ribbon(0, Color::Disc(Side::L0), alpha.parse().unwrap(), None);
        for _ in 0..marks {
            t.add_ribbon(d, Color::Marked(Side::L0), ClassExpr::zero(), None);
        }
        t
    }

    #[test]
    fn nonzero_class_drops_the_mark() {
        let p = sd_palette();
        let t = one_disc("a0", 2);
        let f = forget_boundary_mark(&t, 1).unwrap();
        assert_eq!(f.case, 1);
        assert!(f.tree.is_valid(&p));
        assert_eq!(f.tree.ribbon_type().k(), 1);
        assert_eq!(f.tree.total_class(), t.total_class());
    }

    #[test]
    fn stable_constant_disc_drops_the_mark() {
        let p = sd_palette();
        let f = forget_boundary_mark(&one_disc("0", 3), 2).unwrap();
        assert_eq!(f.case, 2);
        assert!(f.tree.is_valid(&p));
    }

    #[test]
    fn unstable_constant_disc_is_removed() {
        let p = sd_palette();
        let t = four_disc_tree();
        let f = forget_boundary_mark(&t, 3).unwrap();
        assert_eq!(f.case, 3);
        assert!(f.tree.is_valid(&p), "{:?}", f.tree.validate(&p));
        assert_eq!(f.tree.interior().len(), t.interior().len() - 1);
        assert_eq!(f.tree.ribbon_type().k(), 3);
    }

    #[test]
    fn errors() {
        let t = one_disc("a0", 2);
        assert_eq!(
            forget_boundary_mark(&t, 0).unwrap_err(),
            StrataError::CannotForgetRoot
        );
        assert!(matches!(
            forget_boundary_mark(&t, 3),
            Err(StrataError::IndexOutOfRange { j: 3, k: 2 })
        ));
        assert_eq!(
            forget_boundary_mark(&one_disc("0", 2), 1).unwrap_err(),
            StrataError::Degenerate
        );
    }

    #[test]
    fn forgetting_two_marks_commutes() {
        let p = sd_palette();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let t = random_dd(
                &p,
                Side::L1,
                rng.gen_range(1..=3),
                rng.gen_range(2..=4),
                &mut rng,
            );
            let k = t.ribbon_type().k();
            let (a, b) = (rng.gen_range(1..=k), rng.gen_range(1..=k));
            if a == b {
                continue;
            }
            let shift = |i: usize, gone: usize| if i > gone { i - 1 } else { i };
            let one = forget_boundary_mark(&t, a)
                .and_then(|f| forget_boundary_mark(&f.tree, shift(b, a)));
            let two = forget_boundary_mark(&t, b)
                .and_then(|f| forget_boundary_mark(&f.tree, shift(a, b)));
            match (one, two) {
                (Ok(x), Ok(y)) => {
                    assert_eq!(x.tree.canonical_form(), y.tree.canonical_form());
                    assert!(x.tree.is_valid(&p));
                }
                (Err(x), Err(y)) => assert_eq!(x, y),
                (x, y) => panic!("{:?} vs {:?}", x.map(|f| f.case), y.map(|f| f.case)),
            }
        }
    }
}
