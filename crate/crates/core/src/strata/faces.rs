use std::collections::BTreeMap;

use super::shrink::flatten;
use super::StrataError;
use crate::divisor_trees::{
    boundary_template, BoundaryData, DetailedTree, RibbonError, RibbonKind, RibbonType, Side,
    SplittingTable,
};
use crate::palette::pairings;
use crate::{ClassExpr, Palette};

const MAX_CANDIDATES: usize = 100_000;

/// A codimension-one face: its describing data, the two-vertex tree of its
/// open part and the universe trees whose corner it is.
#[derive(Debug, Clone)]
pub struct Face {
    pub data: BoundaryData,
    pub template: DetailedTree,
    pub members: Vec<usize>,
}

impl Face {
    pub fn kind(&self) -> u8 {
        self.data.kind()
    }
}

#[derive(Debug, Clone, Default)]
pub struct FaceCensus {
    pub faces: Vec<Face>,
    /// Offered splittings with nonzero divisor degree, as `class: reason`.
    pub rejected: Vec<String>,
    /// Universe trees with two interior vertices that match no face.
    pub unassigned: Vec<usize>,
}

fn splits(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=k).map(move |a| (a, k - a))
}

/// Codimension-one faces of the strip moduli of type `ty`, from the
/// splittings offered by `table`. Offered classes must have divisor degree
/// zero; others are rejected and reported.
pub fn boundary_faces(
    ty: &RibbonType,
    palette: &Palette,
    table: &SplittingTable,
    universe: &[DetailedTree],
) -> Result<FaceCensus, StrataError> {
    let RibbonKind::Strip { from, to } = &ty.kind else {
        return Err(StrataError::WrongKind("strip"));
    };
    let mut census = FaceCensus::default();
    let admissible = |c: &ClassExpr, census: &mut FaceCensus| -> Result<bool, StrataError> {
        let pair = pairings(c, palette)?.pair_d;
        if pair != 0 {
            let line = format!("{c}: divisor degree {pair}");
            if !census.rejected.contains(&line) {
                census.rejected.push(line);
            }
        }
        Ok(pair == 0)
    };
    let mut candidates = Vec::new();
    for r in table.labels() {
        for b1 in table.strip_classes(from, &r) {
            for b2 in table.strip_classes(&r, to) {
                if b1 + b2 != ty.beta
                    || !(admissible(b1, &mut census)? & admissible(b2, &mut census)?)
                {
                    continue;
                }
                for (a0, b0) in splits(ty.k0) {
                    for (a1, b1k) in splits(ty.k1) {
                        candidates.push(BoundaryData::Break {
                            r: r.clone(),
                            beta1: b1.clone(),
                            beta2: b2.clone(),
                            k: [[a0, a1], [b0, b1k]],
                        });
                    }
                }
            }
        }
    }
    for side in [Side::L0, Side::L1] {
        let (here, other) = match side {
            Side::L0 => (ty.k0, ty.k1),
            Side::L1 => (ty.k1, ty.k0),
        };
        let mut strip_classes: Vec<ClassExpr> = table.strip_classes(from, to).cloned().collect();
        if from == to {
            strip_classes.push(ClassExpr::zero());
        }
        for b1 in &strip_classes {
            for b2 in table.disc_classes(side) {
                if b1 + b2 != ty.beta
                    || !(admissible(b1, &mut census)? & admissible(b2, &mut census)?)
                {
                    continue;
                }
                for (on_strip, on_disc) in splits(here) {
                    for j in 1..=on_strip + 1 {
                        candidates.push(BoundaryData::Bubble {
                            side,
                            beta1: b1.clone(),
                            beta2: b2.clone(),
                            on_strip,
                            on_disc,
                            j,
                            other,
                        });
                    }
                }
            }
        }
        if candidates.len() > MAX_CANDIDATES {
            return Err(StrataError::BoundsTooLoose(MAX_CANDIDATES));
        }
    }
    let mut by_key: BTreeMap<String, Face> = BTreeMap::new();
    for data in candidates {
        match boundary_template(ty, &data, palette) {
            Ok(template) => {
                by_key.entry(template.canonical_form()).or_insert(Face {
                    data,
                    template,
                    members: Vec::new(),
                });
            }
            // Unstable configurations are not faces.
            Err(RibbonError::InvalidInput { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    for (i, t) in universe.iter().enumerate() {
        if t.ribbon_type() != *ty {
            continue;
        }
        let top = flatten(t);
        match by_key.get_mut(&top.canonical_form()) {
            Some(face) => face.members.push(i),
            None if top.interior().len() == 2 => census.unassigned.push(i),
            None => {}
        }
    }
    census.faces = by_key.into_values().collect();
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor_trees::fixtures::sd_palette;
    use crate::divisor_trees::{enumerate_sd, SdBounds};

    fn ty(beta: &str, k0: usize, k1: usize) -> RibbonType {
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
    fn one_break_through_one_label() {
        let p = sd_palette();
        let table = SplittingTable {
            strips: vec![
                ("p".into(), "r".into(), "b1".parse().unwrap()),
                ("r".into(), "q".into(), "b2".parse().unwrap()),
            ],
            discs: vec![],
        };
        let c = boundary_faces(&ty("b1+b2", 0, 0), &p, &table, &[]).unwrap();
        assert_eq!(c.faces.len(), 1);
        assert_eq!(c.faces[0].kind(), 1);
    }

    #[test]
    fn splitting_with_divisor_degree_is_rejected() {
        let p = sd_palette();
        let table = SplittingTable {
            strips: vec![
                ("p".into(), "r".into(), "b1+g".parse().unwrap()),
                ("r".into(), "q".into(), "b2+e".parse().unwrap()),
            ],
            discs: vec![],
        };
        let c = boundary_faces(&ty("b1+b2+e+g", 0, 0), &p, &table, &[]).unwrap();
        assert!(c.faces.is_empty());
        assert_eq!(c.rejected.len(), 2);
    }

    #[test]
    fn census_matches_brute_force_classification() {
        let p = sd_palette();
        let table = SplittingTable::from_palette(&p, 4).unwrap();
        let universe = enumerate_sd(
            &p,
            "p",
            "q",
            &SdBounds {
                max_interior: 2,
                max_marks: 1,
                max_levels: 1,
                ..SdBounds::default()
            },
        )
        .unwrap();
        let types: std::collections::BTreeSet<String> = universe
            .iter()
            .map(|t| t.ribbon_type().to_string())
            .collect();
        assert!(types.len() > 3);
        for t in universe
            .iter()
            .map(|t| t.ribbon_type())
            .collect::<std::collections::BTreeSet<_>>()
        {
            let census = boundary_faces(&t, &p, &table, &universe).unwrap();
            // Brute force: group the universe trees of this type with two
            // interior vertices by their flattened form.
            let mut groups: BTreeMap<String, usize> = BTreeMap::new();
            for u in universe.iter().filter(|u| u.ribbon_type() == t) {
                let top = flatten(u);
                if top.interior().len() == 2 {
                    *groups.entry(top.canonical_form()).or_default() += 1;
                }
            }
            let assigned: usize = census.faces.iter().map(|f| f.members.len()).sum();
            assert_eq!(
                assigned + census.unassigned.len(),
                groups.values().sum::<usize>(),
                "{t}"
            );
            assert!(census.unassigned.is_empty(), "{t}: {:?}", census.unassigned);
            for f in &census.faces {
                if !f.members.is_empty() {
                    assert_eq!(
                        groups.get(&f.template.canonical_form()),
                        Some(&f.members.len())
                    );
                }
            }
        }
    }

    #[test]
    fn bubble_faces_carry_positions() {
        let p = sd_palette();
        let table = SplittingTable::from_palette(&p, 2).unwrap();
        let c = boundary_faces(&ty("b+a0", 1, 0), &p, &table, &[]).unwrap();
        let js: Vec<usize> = c
            .faces
            .iter()
            .filter_map(|f| match f.data {
                BoundaryData::Bubble {
                    side: Side::L0,
                    on_strip: 1,
                    j,
                    ..
                } => Some(j),
                _ => None,
            })
            .collect();
        assert_eq!(js, vec![1, 2]);
    }
}
