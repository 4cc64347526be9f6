//! Floer boundary operators assembled from given moduli counts, and audits
//! of the identities those counts must satisfy.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::divisor_trees::Side;
use crate::linalg::Matrix;
use crate::novikov::{homology_decomposition, GappedComplex, Novikov, NovikovError};
use crate::palette::{pairings, PaletteError};
use crate::{ClassExpr, Palette, Space, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FloerError {
    #[error(transparent)]
    Palette(#[from] PaletteError),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("class {class} does not run from {from} to {to}")]
    EndpointMismatch {
        class: String,
        from: String,
        to: String,
    },
    #[error("class {class} meets the divisor with degree {pair}")]
    DivisorDegree { class: String, pair: i64 },
    #[error("class {class} has negative energy {energy}")]
    NegativeEnergy { class: String, energy: Q },
    #[error("class {0} from a point to itself has zero energy")]
    ZeroEnergyLoop(String),
    #[error("strip {from} -> {to} joins generators of equal parity")]
    DegreeMismatch { from: String, to: String },
    #[error("disc class {class} has Maslov index {maslov}, not 2")]
    WrongMaslov { class: String, maslov: i64 },
    #[error("no weight for boundary class `{0}`")]
    UnknownBoundaryClass(String),
    #[error("class {0} has no Maslov index")]
    MissingMaslov(String),
    #[error("boundary squares to {0} times the identity, not zero")]
    NonzeroDefect(Q),
    #[error("boundary does not square to a multiple of the identity")]
    NotScalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub id: String,
    /// Connected component of the path space the generator lies in.
    pub component: String,
    /// Mod-2 degree, or an integer degree when one is available.
    pub degree: i64,
}

/// Signed count of the strips of one class between two generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripCount {
    pub from: String,
    pub to: String,
    pub class: ClassExpr,
    pub count: Q,
    /// Defaults to the palette area.
    pub energy: Option<Q>,
    /// Defaults to the palette Maslov index.
    pub maslov: Option<i64>,
}

/// Count of discs of one Maslov-2 class through a boundary point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscCount {
    pub class: ClassExpr,
    pub count: Q,
    /// Tag of the boundary class, used to look up the local-system weight.
    pub boundary: String,
    pub maslov: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FloerData {
    pub generators: Vec<Generator>,
    pub strips: Vec<StripCount>,
    pub discs_l0: Vec<DiscCount>,
    pub discs_l1: Vec<DiscCount>,
    pub monotonicity: Option<Q>,
}

impl FloerData {
    pub fn discs(&self, side: Side) -> &[DiscCount] {
        match side {
            Side::L0 => &self.discs_l0,
            Side::L1 => &self.discs_l1,
        }
    }

    fn index(&self) -> BTreeMap<&str, usize> {
        self.generators
            .iter()
            .enumerate()
            .map(|(i, g)| (g.id.as_str(), i))
            .collect()
    }

    fn energy(&self, s: &StripCount, palette: &Palette) -> Result<Q, FloerError> {
        match &s.energy {
            Some(e) => Ok(e.clone()),
            None => Ok(pairings(&s.class, palette)?.area),
        }
    }

    fn strip_maslov(&self, s: &StripCount, palette: &Palette) -> Result<i64, FloerError> {
        match s.maslov {
            Some(m) => Ok(m),
            None => pairings(&s.class, palette)?
                .maslov
                .ok_or_else(|| FloerError::MissingMaslov(s.class.to_string())),
        }
    }

    /// Endpoints, divisor degree and parity of every strip.
    pub fn validate(&self, palette: &Palette) -> Result<(), FloerError> {
        let index = self.index();
        for s in &self.strips {
            let (Some(&a), Some(&b)) = (index.get(s.from.as_str()), index.get(s.to.as_str()))
            else {
                let missing = if index.contains_key(s.from.as_str()) {
                    &s.to
                } else {
                    &s.from
                };
                return Err(FloerError::UnknownGenerator(missing.clone()));
            };
            let mut boundary: BTreeMap<&str, i64> = BTreeMap::new();
            for (id, c) in s.class.terms() {
                if let Space::Strip { from, to } = &palette.get(id)?.space {
                    *boundary.entry(to.as_str()).or_default() += c;
                    *boundary.entry(from.as_str()).or_default() -= c;
                }
            }
            *boundary.entry(s.to.as_str()).or_default() -= 1;
            *boundary.entry(s.from.as_str()).or_default() += 1;
            if boundary.values().any(|&c| c != 0) {
                return Err(FloerError::EndpointMismatch {
                    class: s.class.to_string(),
                    from: s.from.clone(),
                    to: s.to.clone(),
                });
            }
            let pair = pairings(&s.class, palette)?.pair_d;
            if pair != 0 {
                return Err(FloerError::DivisorDegree {
                    class: s.class.to_string(),
                    pair,
                });
            }
            if !s.count.is_zero()
                && (self.generators[a].degree - self.generators[b].degree).rem_euclid(2) != 1
            {
                return Err(FloerError::DegreeMismatch {
                    from: s.from.clone(),
                    to: s.to.clone(),
                });
            }
        }
        for d in self.discs_l0.iter().chain(&self.discs_l1) {
            let pair = pairings(&d.class, palette)?.pair_d;
            if pair != 0 {
                return Err(FloerError::DivisorDegree {
                    class: d.class.to_string(),
                    pair,
                });
            }
        }
        Ok(())
    }
}

/// `⟨∂p, q⟩ = Σ_β count(p → q; β)` as a rational matrix; column `p`, row `q`.
pub fn assemble_boundary(data: &FloerData, palette: &Palette) -> Result<Matrix<Q>, FloerError> {
    data.validate(palette)?;
    let index = data.index();
    let n = data.generators.len();
    let mut d: Matrix<Q> = Matrix::zeros(n, n);
    for s in &data.strips {
        let (p, q) = (index[s.from.as_str()], index[s.to.as_str()]);
        d[(q, p)] = d[(q, p)].clone() + s.count.clone();
    }
    Ok(d)
}

/// The same boundary with each class weighted by `T^{energy}`.
pub fn assemble_novikov(
    data: &FloerData,
    palette: &Palette,
) -> Result<Matrix<Novikov<Q>>, FloerError> {
    data.validate(palette)?;
    let index = data.index();
    let n = data.generators.len();
    let mut d: Matrix<Novikov<Q>> = Matrix::zeros(n, n);
    for s in &data.strips {
        let energy = data.energy(s, palette)?;
        if energy.is_negative() {
            return Err(FloerError::NegativeEnergy {
                class: s.class.to_string(),
                energy,
            });
        }
        if energy.is_zero() && s.from == s.to {
            return Err(FloerError::ZeroEnergyLoop(s.class.to_string()));
        }
        let (p, q) = (index[s.from.as_str()], index[s.to.as_str()]);
        d[(q, p)] = d[(q, p)].clone() + Novikov::monomial(s.count.clone(), energy);
    }
    Ok(d)
}

/// `Σ ρ(∂β) · count(β)` over the Maslov-2 disc classes on one side; `None`
/// weights every boundary class by one.
pub fn potential(
    data: &FloerData,
    side: Side,
    palette: &Palette,
    rho: Option<&BTreeMap<String, Q>>,
) -> Result<Q, FloerError> {
    let mut total = Q::zero();
    for d in data.discs(side) {
        let maslov = match d.maslov {
            Some(m) => m,
            None => pairings(&d.class, palette)?
                .maslov
                .ok_or_else(|| FloerError::MissingMaslov(d.class.to_string()))?,
        };
        if maslov != 2 {
            return Err(FloerError::WrongMaslov {
                class: d.class.to_string(),
                maslov,
            });
        }
        let weight = match rho {
            None => Q::one(),
            Some(r) => r
                .get(&d.boundary)
                .cloned()
                .ok_or_else(|| FloerError::UnknownBoundaryClass(d.boundary.clone()))?,
        };
        total += weight * &d.count;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    /// `PO_{L1}(1) - PO_{L0}(1)`.
    pub expected: Q,
    pub observed: Matrix<Q>,
    /// The scalar `c` when `∂∘∂ = c·id`.
    pub scalar: Option<Q>,
    /// Entries of `∂∘∂ - expected·id` that are nonzero.
    pub offending: Vec<(usize, usize)>,
}

impl DefectReport {
    pub fn is_scalar_multiple_of_identity(&self) -> bool {
        self.scalar.is_some()
    }

    pub fn passed(&self) -> bool {
        self.offending.is_empty()
    }
}

/// Compares `∂∘∂` with the potential difference times the identity.
pub fn d_squared_audit(data: &FloerData, palette: &Palette) -> Result<DefectReport, FloerError> {
    let d = assemble_boundary(data, palette)?;
    let sq = d.mul(&d);
    let expected =
        potential(data, Side::L1, palette, None)? - potential(data, Side::L0, palette, None)?;
    let n = sq.rows();
    let diagonal_constant = (0..n).all(|i| sq[(i, i)] == sq[(0, 0)]);
    let off_diagonal_zero = sq.entries().all(|(i, j, x)| i == j || x.is_zero());
    let scalar = (n > 0 && diagonal_constant && off_diagonal_zero)
        .then(|| sq[(0, 0)].clone())
        .or_else(|| (n == 0).then(Q::zero));
    let offending = sq
        .entries()
        .filter(|(i, j, x)| {
            if i == j {
                **x != expected
            } else {
                !x.is_zero()
            }
        })
        .map(|(i, j, _)| (i, j))
        .collect();
    Ok(DefectReport {
        expected,
        observed: sq,
        scalar,
        offending,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloerHomology {
    pub generators: usize,
    /// Dimension over `Q` (rational mode) or rank over the Novikov field.
    pub rank: usize,
    /// Torsion exponents, descending; empty in rational mode.
    pub torsion: Vec<Q>,
    pub rank_bound_ok: bool,
}

/// Homology over `Q`; fails unless `∂∘∂ = 0`.
pub fn floer_homology(data: &FloerData, palette: &Palette) -> Result<FloerHomology, FloerError> {
    let audit = d_squared_audit(data, palette)?;
    if !audit.observed.is_zero() {
        return Err(audit
            .scalar
            .map_or(FloerError::NotScalar, FloerError::NonzeroDefect));
    }
    let d = assemble_boundary(data, palette)?;
    let n = d.rows();
    let rank = n - 2 * d.rank();
    Ok(FloerHomology {
        generators: n,
        rank,
        torsion: Vec::new(),
        rank_bound_ok: rank <= n,
    })
}

/// Homology over `Λ₀` of the energy-weighted boundary, cut at `energy_cut`
/// (all terms kept when `None`).
pub fn floer_homology_novikov(
    data: &FloerData,
    palette: &Palette,
    energy_cut: Option<&Q>,
) -> Result<FloerHomology, FloerError> {
    let d = assemble_novikov(data, palette)?;
    let top = d
        .entries()
        .filter_map(|(_, _, x)| x.max_exponent().cloned())
        .max()
        .unwrap_or_else(Q::zero);
    let energy = energy_cut.cloned().unwrap_or(top);
    let monoid: Vec<Q> = {
        let mut m: Vec<Q> = d
            .entries()
            .flat_map(|(_, _, x)| x.terms().iter().map(|(e, _)| e.clone()))
            .filter(|e| e.is_positive())
            .collect();
        m.sort();
        m.dedup();
        m
    };
    let c = GappedComplex::from_differential(
        data.generators.iter().map(|g| g.id.clone()).collect(),
        data.generators.iter().map(|g| g.degree).collect(),
        monoid,
        energy,
        &d,
    );
    let dec = homology_decomposition(&c, None).map_err(|e| match e {
        NovikovError::NotAComplex => FloerError::NotScalar,
        e => e.into(),
    })?;
    let n = c.len();
    Ok(FloerHomology {
        generators: n,
        rank: dec.betti,
        torsion: dec.torsion,
        rank_bound_ok: dec.betti <= n,
    })
}

/// Why the energies of some strips are not `c·μ - c(p, q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonotonicityWitness {
    /// Two classes between the same generators give different offsets.
    Conflict {
        from: String,
        to: String,
        first: ClassExpr,
        second: ClassExpr,
        offsets: (Q, Q),
    },
    /// `c(p, q) + c(q, r) != c(p, r)`.
    NotAdditive { p: String, q: String, r: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityReport {
    pub offsets: BTreeMap<(String, String), Q>,
    pub witness: Option<MonotonicityWitness>,
}

impl MonotonicityReport {
    pub fn consistent(&self) -> bool {
        self.witness.is_none()
    }
}

/// Solves `ω(β) = c·μ(β) - c(p, q)` for the offsets, strip by strip.
pub fn monotonicity_audit(
    data: &FloerData,
    palette: &Palette,
    c: &Q,
) -> Result<MonotonicityReport, FloerError> {
    let mut offsets: BTreeMap<(String, String), (Q, ClassExpr)> = BTreeMap::new();
    for s in &data.strips {
        let pair = pairings(&s.class, palette)?.pair_d;
        if pair != 0 {
            return Err(FloerError::DivisorDegree {
                class: s.class.to_string(),
                pair,
            });
        }
        let mu = Q::from_integer(data.strip_maslov(s, palette)?.into());
        let offset = c * mu - data.energy(s, palette)?;
        let key = (s.from.clone(), s.to.clone());
        match offsets.get(&key) {
            Some((o, first)) if *o != offset => {
                let witness = MonotonicityWitness::Conflict {
                    from: s.from.clone(),
                    to: s.to.clone(),
                    first: first.clone(),
                    second: s.class.clone(),
                    offsets: (o.clone(), offset),
                };
                let offsets = offsets.into_iter().map(|(k, (o, _))| (k, o)).collect();
                return Ok(MonotonicityReport {
                    offsets,
                    witness: Some(witness),
                });
            }
            Some(_) => {}
            None => {
                offsets.insert(key, (offset, s.class.clone()));
            }
        }
    }
    let offsets: BTreeMap<(String, String), Q> =
        offsets.into_iter().map(|(k, (o, _))| (k, o)).collect();
    let mut witness = None;
    'outer: for ((p, q), a) in &offsets {
        for ((q2, r), b) in offsets.range((q.clone(), String::new())..) {
            if q2 != q {
                break;
            }
            if let Some(c) = offsets.get(&(p.clone(), r.clone())) {
                if &(a + b) != c {
                    witness = Some(MonotonicityWitness::NotAdditive {
                        p: p.clone(),
                        q: q.clone(),
                        r: r.clone(),
                    });
                    break 'outer;
                }
            }
        }
    }
    Ok(MonotonicityReport { offsets, witness })
}

/// Sample data shared by the unit tests, the self-test and the acceptance suite.
pub mod fixtures {
    use super::*;
    use crate::palette::ClassAtom;
    use crate::q;

    /// Strip atoms `s_a_b` between all pairs of the given generators, plus
    /// Maslov-2 disc atoms `w0` on `L0` and `w1` on `L1`.
    pub fn strip_palette(ids: &[&str]) -> Palette {
        let mut atoms = Vec::new();
        for a in ids {
            for b in ids {
                atoms.push(ClassAtom::new(
                    &format!("s_{a}_{b}"),
                    Space::strip(a, b),
                    0,
                    0,
                    Some(1),
                    q(1),
                ));
            }
        }
        atoms.push(ClassAtom::new("w0", Space::XL0, 0, 0, Some(2), q(1)));
        atoms.push(ClassAtom::new("w1", Space::XL1, 0, 0, Some(2), q(1)));
        atoms.push(ClassAtom::new("heavy", Space::XL1, 1, 0, Some(2), q(1)));
        Palette::new(atoms)
    }

    pub fn strip(from: &str, to: &str, count: Q) -> StripCount {
        StripCount {
            from: from.into(),
            to: to.into(),
            class: ClassExpr::atom(&format!("s_{from}_{to}")),
            count,
            energy: None,
            maslov: None,
        }
    }

    pub fn generators(degrees: &[(&str, i64)]) -> Vec<Generator> {
        degrees
            .iter()
            .map(|(id, d)| Generator {
                id: id.to_string(),
                component: "o".into(),
                degree: *d,
            })
            .collect()
    }

    /// Two generators with `∂p = q`, `∂q = 3p` and potentials 2 on `L0`, 5
    /// on `L1`, so that `∂∘∂ = 3·id` matches the potential difference.
    pub fn obstructed() -> (FloerData, Palette) {
        let data = FloerData {
            generators: generators(&[("p", 0), ("q", 1)]),
            strips: vec![strip("p", "q", q(1)), strip("q", "p", q(3))],
            discs_l0: vec![DiscCount {
                class: ClassExpr::atom("w0"),
                count: q(2),
                boundary: "c0".into(),
                maslov: None,
            }],
            discs_l1: vec![DiscCount {
                class: ClassExpr::atom("w1"),
                count: q(5),
                boundary: "c1".into(),
                maslov: None,
            }],
            monotonicity: None,
        };
        (data, strip_palette(&["p", "q"]))
    }

    /// Random counts with equal potentials: cancelling pairs `x ↦ c·y` between
    /// generators of opposite degree plus free cycles, conjugated by
    /// elementary changes of basis within each degree. Also returns the
    /// number of free cycles, which is the rank of the homology.
    pub fn random_unobstructed(rng: &mut impl rand::Rng) -> (FloerData, Palette, usize) {
        let pairs = rng.gen_range(0..=3);
        let free = rng.gen_range(0..=3);
        let n = 2 * pairs + free;
        let ids: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        let degree: Vec<i64> = (0..n)
            .map(|i| {
                if i < 2 * pairs {
                    (i % 2) as i64
                } else {
                    rng.gen_range(0..2)
                }
            })
            .collect();
        let mut d: Matrix<Q> = Matrix::zeros(n, n);
        for i in 0..pairs {
            d[(2 * i, 2 * i + 1)] = q(rng.gen_range(1..4));
        }
        for _ in 0..2 * n {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if i == j || degree[i] != degree[j] {
                continue;
            }
            let c = q(rng.gen_range(-2..=2));
            for col in 0..n {
                let v = d[(i, col)].clone() + c.clone() * d[(j, col)].clone();
                d[(i, col)] = v;
            }
            for row in 0..n {
                let v = d[(row, j)].clone() - c.clone() * d[(row, i)].clone();
                d[(row, j)] = v;
            }
        }
        let mut strips = Vec::new();
        for to in 0..n {
            for from in 0..n {
                if !d[(to, from)].is_zero() {
                    strips.push(strip(&ids[from], &ids[to], d[(to, from)].clone()));
                }
            }
        }
        let disc = |atom: &str, count: i64| DiscCount {
            class: ClassExpr::atom(atom),
            count: q(count),
            boundary: "c".into(),
            maslov: None,
        };
        let po = rng.gen_range(-3..=3);
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let data = FloerData {
            generators: ids
                .iter()
                .zip(&degree)
                .map(|(id, d)| Generator {
                    id: id.clone(),
                    component: "o".into(),
                    degree: *d,
                })
                .collect(),
            strips,
            discs_l0: vec![disc("w0", po)],
            discs_l1: vec![disc("w1", po)],
            monotonicity: None,
        };
        (data, strip_palette(&refs), free)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::{q, qr};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_counts_give_zero() {
        let p = strip_palette(&["a", "b"]);
        let data = FloerData {
            generators: generators(&[("a", 0), ("b", 1)]),
            ..Default::default()
        };
        assert!(assemble_boundary(&data, &p).unwrap().is_zero());
        let audit = d_squared_audit(&data, &p).unwrap();
        assert_eq!((audit.expected, audit.scalar), (q(0), Some(q(0))));
        let h = floer_homology(&data, &p).unwrap();
        assert_eq!((h.rank, h.rank_bound_ok), (2, true));
    }

    #[test]
    fn single_strip_in_novikov_form() {
        let p = strip_palette(&["a", "b"]);
        let mut s = strip("a", "b", q(1));
        s.energy = Some(qr(1, 2));
        let data = FloerData {
            generators: generators(&[("a", 0), ("b", 1)]),
            strips: vec![s],
            ..Default::default()
        };
        let d = assemble_novikov(&data, &p).unwrap();
        assert_eq!(d[(1, 0)], Novikov::monomial(q(1), qr(1, 2)));
        let h = floer_homology_novikov(&data, &p, None).unwrap();
        assert_eq!((h.rank, h.torsion.clone()), (0, vec![qr(1, 2)]));
    }

    #[test]
    fn three_generators_sum_entrywise() {
        let p = strip_palette(&["x", "y", "z"]);
        let data = FloerData {
            generators: generators(&[("x", 1), ("y", 0), ("z", 1)]),
            strips: vec![
                strip("x", "y", q(2)),
                strip("x", "y", q(-1)),
                strip("z", "y", q(1)),
                strip("y", "x", q(4)),
            ],
            ..Default::default()
        };
        let d = assemble_boundary(&data, &p).unwrap();
        let mut hand = Matrix::zeros(3, 3);
        hand[(1, 0)] = q(1);
        hand[(1, 2)] = q(1);
        hand[(0, 1)] = q(4);
        assert_eq!(d, hand);
    }

    #[test]
    fn validation_errors() {
        let p = strip_palette(&["a", "b"]);
        let mut data = FloerData {
            generators: generators(&[("a", 0), ("b", 1)]),
            strips: vec![strip("a", "b", q(1))],
            ..Default::default()
        };
        data.strips[0].class = ClassExpr::atom("s_b_a");
        assert!(matches!(
            assemble_boundary(&data, &p),
            Err(FloerError::EndpointMismatch { .. })
        ));
        data.strips[0] = strip("a", "c", q(1));
        assert_eq!(
            assemble_boundary(&data, &p),
            Err(FloerError::UnknownGenerator("c".into()))
        );
        data.strips[0] = strip("a", "a", q(1));
        assert!(matches!(
            assemble_boundary(&data, &p),
            Err(FloerError::DegreeMismatch { .. })
        ));
        data.strips[0] = strip("a", "b", q(1));
        data.strips[0].energy = Some(q(-1));
        assert!(matches!(
            assemble_novikov(&data, &p),
            Err(FloerError::NegativeEnergy { .. })
        ));
        data.discs_l1.push(DiscCount {
            class: ClassExpr::atom("heavy"),
            count: q(1),
            boundary: "h".into(),
            maslov: None,
        });
        assert!(matches!(
            data.validate(&p),
            Err(FloerError::DivisorDegree { .. })
        ));
    }

    #[test]
    fn potentials() {
        let (mut data, p) = obstructed();
        assert_eq!(
            potential(&FloerData::default(), Side::L0, &p, None).unwrap(),
            q(0)
        );
        assert_eq!(potential(&data, Side::L1, &p, None).unwrap(), q(5));
        data.discs_l0 = vec![
            DiscCount {
                class: ClassExpr::atom("w0"),
                count: q(1),
                boundary: "u".into(),
                maslov: None,
            },
            DiscCount {
                class: ClassExpr::atom("w0"),
                count: q(4),
                boundary: "v".into(),
                maslov: None,
            },
        ];
        let rho: BTreeMap<String, Q> = [("u".to_string(), q(2)), ("v".to_string(), q(-1))].into();
        assert_eq!(potential(&data, Side::L0, &p, Some(&rho)).unwrap(), q(-2));
        data.discs_l0[0].maslov = Some(4);
        assert!(matches!(
            potential(&data, Side::L0, &p, None),
            Err(FloerError::WrongMaslov { .. })
        ));
    }

    #[test]
    fn obstruction_identity_on_the_engineered_fixture() {
        let (data, p) = obstructed();
        let audit = d_squared_audit(&data, &p).unwrap();
        assert_eq!(audit.expected, q(3));
        assert_eq!(audit.scalar, Some(q(3)));
        assert!(audit.passed());
        assert_eq!(
            floer_homology(&data, &p),
            Err(FloerError::NonzeroDefect(q(3)))
        );
    }

    #[test]
    fn non_scalar_square_is_reported() {
        let p = strip_palette(&["a", "b", "c"]);
        let data = FloerData {
            generators: generators(&[("a", 0), ("b", 1), ("c", 0)]),
            strips: vec![strip("a", "b", q(1)), strip("b", "c", q(1))],
            ..Default::default()
        };
        let audit = d_squared_audit(&data, &p).unwrap();
        assert!(!audit.is_scalar_multiple_of_identity());
        assert_eq!(audit.offending, vec![(2, 0)]);
    }

    #[test]
    fn random_unobstructed_fixtures_obey_the_rank_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let pairs = rng.gen_range(0..4);
            let free = rng.gen_range(0..3);
            let n = 2 * pairs + free;
            let ids: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
            let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
            let p = strip_palette(&refs);
            // ∂ e_{2i+1} = c·e_{2i}; the remaining generators are cycles.
            let degree = |i: usize| (i % 2) as i64;
            let mut strips = Vec::new();
            for i in 0..pairs {
                strips.push(strip(&ids[2 * i + 1], &ids[2 * i], q(rng.gen_range(1..5))));
            }
            let data = FloerData {
                generators: generators(
                    &ids.iter()
                        .enumerate()
                        .map(|(i, s)| (s.as_str(), degree(i)))
                        .collect::<Vec<_>>(),
                ),
                strips,
                ..Default::default()
            };
            let h = floer_homology(&data, &p).unwrap();
            assert_eq!(h.rank, free);
            assert!(h.rank_bound_ok);
        }
    }

    #[test]
    fn monotonicity() {
        let p = strip_palette(&["a", "b", "c"]);
        let c = qr(1, 2);
        let mut two = strip("a", "b", q(1));
        two.maslov = Some(3);
        two.energy = Some(q(1) + q(2) * &c);
        let mut one = strip("a", "b", q(1));
        one.maslov = Some(1);
        one.energy = Some(q(1));
        let data = FloerData {
            generators: generators(&[("a", 0), ("b", 1), ("c", 0)]),
            strips: vec![one.clone(), two],
            ..Default::default()
        };
        let r = monotonicity_audit(&data, &p, &c).unwrap();
        assert!(r.consistent());
        assert_eq!(
            r.offsets[&("a".to_string(), "b".to_string())],
            c.clone() - q(1)
        );

        let mut clash = one.clone();
        clash.energy = Some(q(2));
        let data = FloerData {
            strips: vec![one.clone(), clash],
            ..data
        };
        assert!(matches!(
            monotonicity_audit(&data, &p, &c).unwrap().witness,
            Some(MonotonicityWitness::Conflict { .. })
        ));

        let mut bc = strip("b", "c", q(1));
        bc.energy = Some(q(1));
        let mut ac = strip("a", "c", q(1));
        ac.energy = Some(q(1));
        let data = FloerData {
            strips: vec![one, bc, ac],
            ..data
        };
        assert!(matches!(
            monotonicity_audit(&data, &p, &c).unwrap().witness,
            Some(MonotonicityWitness::NotAdditive { .. })
        ));
    }
}
