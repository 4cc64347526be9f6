use std::collections::BTreeMap;

use super::{Color, DetailedTree, RibbonError, RibbonKind, RibbonType, Side};
use crate::palette::{pairings, PaletteError};
use crate::{ClassExpr, Palette, Space};

/// Data of a codimension-one SD ribbon tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryData {
    /// Two strips joined at `r`; `k[i][s]` marks on side `s` of strip `i`.
    Break {
        r: String,
        beta1: ClassExpr,
        beta2: ClassExpr,
        k: [[usize; 2]; 2],
    },
    /// A strip with a disc bubble on `side`. The strip keeps `on_strip` marks
    /// on that side and the disc carries `on_disc`; the disc edge is the
    /// `j`-th (1-based) edge on that side of the strip. `other` marks sit on
    /// the opposite side.
    Bubble {
        side: Side,
        beta1: ClassExpr,
        beta2: ClassExpr,
        on_strip: usize,
        on_disc: usize,
        j: usize,
        other: usize,
    },
}

impl BoundaryData {
    /// 1 for a break, 2 for a bubble on `L1`, 3 for a bubble on `L0`.
    pub fn kind(&self) -> u8 {
        match self {
            BoundaryData::Break { .. } => 1,
            BoundaryData::Bubble { side: Side::L1, .. } => 2,
            BoundaryData::Bubble { side: Side::L0, .. } => 3,
        }
    }

    pub fn class(&self) -> ClassExpr {
        match self {
            BoundaryData::Break { beta1, beta2, .. }
            | BoundaryData::Bubble { beta1, beta2, .. } => beta1 + beta2,
        }
    }

    fn marks(&self) -> (usize, usize) {
        match self {
            BoundaryData::Break { k, .. } => (k[0][0] + k[1][0], k[0][1] + k[1][1]),
            BoundaryData::Bubble {
                side: Side::L1,
                on_strip,
                on_disc,
                other,
                ..
            } => (*other, on_strip + on_disc),
            BoundaryData::Bubble {
                side: Side::L0,
                on_strip,
                on_disc,
                other,
                ..
            } => (on_strip + on_disc, *other),
        }
    }

    /// The data of the reflected tree, exchanging `L0` and `L1`. The bubble
    /// keeps its position along the strip, so `j` counts from the other end.
    pub fn mirrored(&self) -> Self {
        match self {
            BoundaryData::Bubble {
                side,
                beta1,
                beta2,
                on_strip,
                on_disc,
                j,
                other,
            } => BoundaryData::Bubble {
                side: side.flip(),
                beta1: beta1.clone(),
                beta2: beta2.clone(),
                on_strip: *on_strip,
                on_disc: *on_disc,
                j: on_strip + 2 - j,
                other: *other,
            },
            b => b.clone(),
        }
    }
}

fn marks(t: &mut DetailedTree, at: usize, side: Side, n: usize) {
    for _ in 0..n {
        t.add_ribbon(at, Color::Marked(side), ClassExpr::zero(), None);
    }
}

/// The codimension-one SD ribbon tree of type `ty` described by `data`.
pub fn boundary_template(
    ty: &RibbonType,
    data: &BoundaryData,
    palette: &Palette,
) -> Result<DetailedTree, RibbonError> {
    let RibbonKind::Strip { from, to } = &ty.kind else {
        return Err(RibbonError::IncompatibleSplit(
            "boundary templates are strip trees".into(),
        ));
    };
    if data.class() != ty.beta {
        return Err(RibbonError::IncompatibleSplit(format!(
            "{} does not add up to {}",
            data.class(),
            ty.beta
        )));
    }
    if data.marks() != (ty.k0, ty.k1) {
        return Err(RibbonError::IncompatibleSplit(format!(
            "mark split {:?} does not add up to ({}, {})",
            data.marks(),
            ty.k0,
            ty.k1
        )));
    }
    let mut t = DetailedTree::with_root(ty.kind.clone());
    match data {
        BoundaryData::Break { r, beta1, beta2, k } => {
            let s1 = t.add_ribbon(0, Color::Strip, beta1.clone(), Some(from));
            marks(&mut t, s1, Side::L0, k[0][0]);
            let s2 = t.add_ribbon(s1, Color::Strip, beta2.clone(), Some(r));
            marks(&mut t, s1, Side::L1, k[0][1]);
            marks(&mut t, s2, Side::L0, k[1][0]);
            t.add_ribbon(s2, Color::Right, ClassExpr::zero(), Some(to));
            marks(&mut t, s2, Side::L1, k[1][1]);
        }
        BoundaryData::Bubble {
            side,
            beta1,
            beta2,
            on_strip,
            on_disc,
            j,
            other,
        } => {
            if *j == 0 || *j > on_strip + 1 {
                return Err(RibbonError::IncompatibleSplit(format!(
                    "position {j} outside 1..={}",
                    on_strip + 1
                )));
            }
            let s = t.add_ribbon(0, Color::Strip, beta1.clone(), Some(from));
            let mut disc = None;
            let mut bubble_side = |t: &mut DetailedTree| {
                for i in 1..=on_strip + 1 {
                    if i == *j {
                        let d = t.add_ribbon(s, Color::Disc(*side), beta2.clone(), None);
                        disc = Some(d);
                    }
                    if i <= *on_strip {
                        marks(t, s, *side, 1);
                    }
                }
            };
            match side {
                Side::L0 => {
                    bubble_side(&mut t);
                    t.add_ribbon(s, Color::Right, ClassExpr::zero(), Some(to));
                    marks(&mut t, s, Side::L1, *other);
                }
                Side::L1 => {
                    marks(&mut t, s, Side::L0, *other);
                    t.add_ribbon(s, Color::Right, ClassExpr::zero(), Some(to));
                    bubble_side(&mut t);
                }
            }
            marks(&mut t, disc.expect("position in range"), *side, *on_disc);
        }
    }
    if let Some(v) = t.validate(palette).into_iter().next() {
        return Err(RibbonError::InvalidInput {
            clause: v.clause,
            detail: v.detail,
        });
    }
    Ok(t)
}

/// Which strip and disc classes of divisor degree zero exist.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplittingTable {
    /// `(from, to, class)`.
    pub strips: Vec<(String, String, ClassExpr)>,
    /// Disc classes, including the zero class on each side.
    pub discs: Vec<(Side, ClassExpr)>,
}

impl SplittingTable {
    /// All effective sums of at most `max_atoms` atoms with zero divisor
    /// degree, sorted into strip classes (by endpoints) and disc classes.
    pub fn from_palette(palette: &Palette, max_atoms: usize) -> Result<Self, PaletteError> {
        let ids: Vec<&str> = palette.atoms().iter().map(|a| a.id.as_str()).collect();
        let mut table = SplittingTable {
            strips: Vec::new(),
            discs: vec![(Side::L0, ClassExpr::zero()), (Side::L1, ClassExpr::zero())],
        };
        let mut stack: Vec<(usize, ClassExpr, usize)> = vec![(0, ClassExpr::zero(), 0)];
        while let Some((start, expr, n)) = stack.pop() {
            if !expr.is_zero() && pairings(&expr, palette)?.pair_d == 0 {
                table.classify(&expr, palette)?;
            }
            if n < max_atoms {
                for (i, id) in ids.iter().enumerate().skip(start) {
                    stack.push((i, &expr + &ClassExpr::atom(id), n + 1));
                }
            }
        }
        table.strips.sort();
        table.strips.dedup();
        table.discs.sort_by_key(|(s, c)| (*s, c.to_string()));
        table.discs.dedup();
        Ok(table)
    }

    fn classify(&mut self, expr: &ClassExpr, palette: &Palette) -> Result<(), PaletteError> {
        let mut boundary: BTreeMap<String, i64> = BTreeMap::new();
        let mut sides = [false, false];
        let mut strips = false;
        for (id, c) in expr.terms() {
            match &palette.get(id)?.space {
                Space::Strip { from, to } => {
                    strips = true;
                    *boundary.entry(to.clone()).or_default() += c;
                    *boundary.entry(from.clone()).or_default() -= c;
                }
                Space::XL0 => sides[0] = true,
                Space::XL1 => sides[1] = true,
                Space::D | Space::X => {}
            }
        }
        boundary.retain(|_, c| *c != 0);
        if strips {
            let ends: Vec<(&String, &i64)> = boundary.iter().collect();
            if let [(a, -1), (b, 1)] | [(b, 1), (a, -1)] = ends.as_slice() {
                self.strips.push(((*a).clone(), (*b).clone(), expr.clone()));
            }
        } else if sides[0] != sides[1] {
            let side = if sides[0] { Side::L0 } else { Side::L1 };
            self.discs.push((side, expr.clone()));
        }
        Ok(())
    }

    pub fn strip_classes<'a>(
        &'a self,
        from: &'a str,
        to: &'a str,
    ) -> impl Iterator<Item = &'a ClassExpr> + 'a {
        self.strips
            .iter()
            .filter(move |(a, b, _)| a == from && b == to)
            .map(|(_, _, c)| c)
    }

    pub fn disc_classes(&self, side: Side) -> impl Iterator<Item = &ClassExpr> + '_ {
        self.discs
            .iter()
            .filter(move |(s, _)| *s == side)
            .map(|(_, c)| c)
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .strips
            .iter()
            .flat_map(|(a, b, _)| [a.clone(), b.clone()])
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::sd_palette;
    use super::*;

    fn pq(beta: &str, k0: usize, k1: usize) -> RibbonType {
        RibbonType {
            kind: RibbonKind::Strip {
                from: "p".into(),
                to: "q".into(),
            },
            beta: beta.parse().unwrap(),
            k0,
            k1,
        }
    }

    #[test]
    fn break_without_marks_is_two_strips() {
        let p = sd_palette();
        let data = BoundaryData::Break {
            r: "r".into(),
            beta1: "b1".parse().unwrap(),
            beta2: "b2".parse().unwrap(),
            k: [[0, 0], [0, 0]],
        };
        let t = boundary_template(&pq("b1+b2", 0, 0), &data, &p).unwrap();
        assert_eq!(t.strip_path().len(), 2);
        assert_eq!(t.interior().len(), 2);
        assert_eq!(
            t.vertices[t.strip_path()[1]].link,
            super::super::Link::Ribbon(Some("r".into()))
        );
    }

    #[test]
    fn bubble_position_out_of_range() {
        let p = sd_palette();
        let data = BoundaryData::Bubble {
            side: Side::L1,
            beta1: "b".parse().unwrap(),
            beta2: "a1".parse().unwrap(),
            on_strip: 1,
            on_disc: 0,
            j: 3,
            other: 0,
        };
        assert!(matches!(
            boundary_template(&pq("b+a1", 0, 1), &data, &p),
            Err(RibbonError::IncompatibleSplit(_))
        ));
        let ok = BoundaryData::Bubble {
            side: Side::L1,
            beta1: "b".parse().unwrap(),
            beta2: "a1".parse().unwrap(),
            on_strip: 1,
            on_disc: 0,
            j: 2,
            other: 0,
        };
        let t = boundary_template(&pq("b+a1", 0, 1), &ok, &p).unwrap();
        // The disc is the second edge on the L1 side: after the mark.
        let s = t.strip_path()[0];
        let kids: Vec<Color> = t.vertices[s].ribbon.iter().map(|&c| t.color(c)).collect();
        assert_eq!(
            kids,
            vec![Color::Right, Color::Marked(Side::L1), Color::Disc(Side::L1)]
        );
    }

    #[test]
    fn mismatched_split_is_rejected() {
        let p = sd_palette();
        let data = BoundaryData::Break {
            r: "r".into(),
            beta1: "b1".parse().unwrap(),
            beta2: "b2".parse().unwrap(),
            k: [[1, 0], [0, 0]],
        };
        assert!(matches!(
            boundary_template(&pq("b1+b2", 0, 0), &data, &p),
            Err(RibbonError::IncompatibleSplit(_))
        ));
        assert!(matches!(
            boundary_template(&pq("b", 1, 0), &data, &p),
            Err(RibbonError::IncompatibleSplit(_))
        ));
    }

    #[test]
    fn mirror_reflects_the_ribbon_order() {
        let p = sd_palette();
        let two = BoundaryData::Bubble {
            side: Side::L1,
            beta1: "b".parse().unwrap(),
            beta2: "a1".parse().unwrap(),
            on_strip: 1,
            on_disc: 1,
            j: 1,
            other: 1,
        };
        let BoundaryData::Bubble {
            side,
            beta1,
            on_strip,
            on_disc,
            j,
            other,
            ..
        } = two.mirrored()
        else {
            unreachable!()
        };
        let three = BoundaryData::Bubble {
            side,
            beta1,
            beta2: "a0".parse().unwrap(),
            on_strip,
            on_disc,
            j,
            other,
        };
        assert_eq!(three.kind(), 3);
        let t2 = boundary_template(&pq("b+a1", 1, 2), &two, &p).unwrap();
        let t3 = boundary_template(&pq("b+a0", 2, 1), &three, &p).unwrap();
        let colors = |t: &DetailedTree| -> Vec<String> {
            let s = t.strip_path()[0];
            t.vertices[s]
                .ribbon
                .iter()
                .map(|&c| t.color(c).to_string())
                .collect()
        };
        assert_eq!(colors(&t2), vec!["mk0", "ri", "d1", "mk1"]);
        // Reflection reverses the ribbon order and swaps the sides.
        let reflected: Vec<String> = colors(&t2)
            .iter()
            .rev()
            .map(|c| c.replace('0', "#").replace('1', "0").replace('#', "1"))
            .collect();
        assert_eq!(colors(&t3), reflected);
    }

    #[test]
    fn splitting_table_from_palette() {
        let p = sd_palette();
        let table = SplittingTable::from_palette(&p, 2).unwrap();
        assert!(table.strip_classes("p", "r").any(|c| c.to_string() == "b1"));
        assert!(table
            .strip_classes("p", "q")
            .any(|c| c.to_string() == "b1+b2"));
        // bh has divisor degree one and only enters paired with a degree -1 sphere.
        assert!(!table.strip_classes("p", "q").any(|c| c.to_string() == "bh"));
        assert!(table
            .strip_classes("p", "q")
            .any(|c| c.to_string() == "bh+e"));
        assert!(table.disc_classes(Side::L1).any(|c| c.is_zero()));
    }
}
