//! Symbolic homology classes.
//!
//! A class is a formal integer combination of named atoms. Atoms carry the
//! numbers the rest of the crate needs (divisor degree, Chern pairings,
//! Maslov index, area); everything downstream reads classes only through
//! [`pairings`] and the Maslov helpers here.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{parse_rational, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaletteError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("Maslov index undefined for divisor atom `{0}`")]
    MaslovUndefined(String),
    #[error("atom `{0}` has no Maslov index")]
    MissingMaslov(String),
    #[error("bad space `{0}`")]
    BadSpace(String),
    #[error("bad rational `{0}`")]
    BadRational(String),
}

/// Ambient group a class atom lives in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    /// Spheres in the divisor.
    D,
    /// Spheres in the ambient manifold.
    X,
    /// Discs with boundary on `L0`.
    XL0,
    /// Discs with boundary on `L1`.
    XL1,
    /// Strips from `from` to `to`.
    Strip { from: String, to: String },
}

impl Space {
    pub fn strip(from: &str, to: &str) -> Self {
        Space::Strip {
            from: from.to_string(),
            to: to.to_string(),
        }
    }

    /// Disc space for the given boundary side.
    pub fn disc(side: crate::divisor_trees::Side) -> Self {
        match side {
            crate::divisor_trees::Side::L0 => Space::XL0,
            crate::divisor_trees::Side::L1 => Space::XL1,
        }
    }

    pub fn needs_maslov(&self) -> bool {
        matches!(self, Space::XL0 | Space::XL1 | Space::Strip { .. })
    }

    /// True for sphere classes (pushed forward into disc or strip groups).
    pub fn is_sphere(&self) -> bool {
        matches!(self, Space::D | Space::X)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::D => write!(f, "D"),
            Space::X => write!(f, "X"),
            Space::XL0 => write!(f, "XL0"),
            Space::XL1 => write!(f, "XL1"),
            Space::Strip { from, to } => write!(f, "STRIP({from},{to})"),
        }
    }
}

impl FromStr for Space {
    type Err = PaletteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t {
            "D" => return Ok(Space::D),
            "X" => return Ok(Space::X),
            "XL0" => return Ok(Space::XL0),
            "XL1" => return Ok(Space::XL1),
            _ => {}
        }
        let inner = t
            .strip_prefix("STRIP(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| PaletteError::BadSpace(s.to_string()))?;
        let mut parts = inner.split(',').map(str::trim);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => Ok(Space::strip(a, b)),
            _ => Err(PaletteError::BadSpace(s.to_string())),
        }
    }
}

impl Serialize for Space {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Space {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAtom {
    pub id: String,
    pub space: Space,
    pub pair_d: i64,
    pub c1_x: i64,
    pub maslov: Option<i64>,
    pub area: Q,
}

impl ClassAtom {
    pub fn new(
        id: &str,
        space: Space,
        pair_d: i64,
        c1_x: i64,
        maslov: Option<i64>,
        area: Q,
    ) -> Self {
        ClassAtom {
            id: id.to_string(),
            space,
            pair_d,
            c1_x,
            maslov,
            area,
        }
    }

    /// Maslov index after pushing forward into a disc or strip group.
    fn pushed_maslov(&self) -> Result<i64, PaletteError> {
        if self.space.is_sphere() {
            Ok(2 * self.c1_x)
        } else {
            self.maslov
                .ok_or_else(|| PaletteError::MissingMaslov(self.id.clone()))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    id: String,
    space: Space,
    #[serde(rename = "pair_D")]
    pair_d: i64,
    #[serde(rename = "c1_X", default)]
    c1_x: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    maslov: Option<i64>,
    area: String,
}

#[derive(Serialize, Deserialize)]
struct PaletteRecord {
    #[serde(default)]
    schema: Option<String>,
    classes: Vec<AtomRecord>,
}

/// A finite table of class atoms, keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Palette {
    atoms: Vec<ClassAtom>,
    index: BTreeMap<String, usize>,
}

impl Palette {
    pub fn new(atoms: impl IntoIterator<Item = ClassAtom>) -> Self {
        let mut p = Palette::default();
        for a in atoms {
            p.push(a);
        }
        p
    }

    /// Adds an atom. A repeated id keeps the first entry in the index; the
    /// duplicate is still reported by [`validate_palette`].
    pub fn push(&mut self, atom: ClassAtom) {
        self.index
            .entry(atom.id.clone())
            .or_insert(self.atoms.len());
        self.atoms.push(atom);
    }

    pub fn atoms(&self) -> &[ClassAtom] {
        &self.atoms
    }

    pub fn get(&self, id: &str) -> Result<&ClassAtom, PaletteError> {
        self.index
            .get(id)
            .map(|&i| &self.atoms[i])
            .ok_or_else(|| PaletteError::UnknownAtom(id.to_string()))
    }

    pub fn atoms_in<'a>(&'a self, space: &'a Space) -> impl Iterator<Item = &'a ClassAtom> + 'a {
        self.atoms.iter().filter(move |a| &a.space == space)
    }

    pub fn from_json(text: &str) -> Result<Self, crate::io::IoError> {
        let rec: PaletteRecord = serde_json::from_str(text)?;
        let mut p = Palette::default();
        for r in rec.classes {
            let area = parse_rational(&r.area).ok_or(PaletteError::BadRational(r.area.clone()))?;
            p.push(ClassAtom {
                id: r.id,
                space: r.space,
                pair_d: r.pair_d,
                c1_x: r.c1_x,
                maslov: r.maslov,
                area,
            });
        }
        Ok(p)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = PaletteRecord {
            schema: Some(crate::SCHEMA.to_string()),
            classes: self
                .atoms
                .iter()
                .map(|a| AtomRecord {
                    id: a.id.clone(),
                    space: a.space.clone(),
                    pair_d: a.pair_d,
                    c1_x: a.c1_x,
                    maslov: a.maslov,
                    area: a.area.to_string(),
                })
                .collect(),
        };
        serde_json::to_value(rec).expect("palette serializes")
    }
}

/// Formal integer combination of atoms. Zero coefficients are never stored,
/// so structural equality is class equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassExpr {
    terms: BTreeMap<String, i64>,
}

impl ClassExpr {
    pub fn zero() -> Self {
        ClassExpr::default()
    }

    pub fn atom(id: &str) -> Self {
        ClassExpr::term(id, 1)
    }

    pub fn term(id: &str, coeff: i64) -> Self {
        let mut e = ClassExpr::zero();
        e.add_term(id, coeff);
        e
    }

    pub fn add_term(&mut self, id: &str, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let c = self.terms.entry(id.to_string()).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.terms.remove(id);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, i64)> {
        self.terms.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn scaled(&self, k: i64) -> Self {
        let mut e = ClassExpr::zero();
        for (id, c) in self.terms() {
            e.add_term(id, c * k);
        }
        e
    }

    /// True when every coefficient is positive.
    pub fn is_effective(&self) -> bool {
        self.terms.values().all(|&c| c > 0)
    }

    /// Total number of atoms counted with multiplicity (for effective classes).
    pub fn atom_count(&self) -> i64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Distinct spaces of the atoms involved.
    pub fn spaces(&self, palette: &Palette) -> Result<Vec<Space>, PaletteError> {
        let mut out: Vec<Space> = Vec::new();
        for (id, _) in self.terms() {
            let s = palette.get(id)?.space.clone();
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out.sort();
        Ok(out)
    }
}

impl std::ops::Add for &ClassExpr {
    type Output = ClassExpr;
    fn add(self, rhs: &ClassExpr) -> ClassExpr {
        let mut e = self.clone();
        for (id, c) in rhs.terms() {
            e.add_term(id, c);
        }
        e
    }
}

impl std::ops::AddAssign<&ClassExpr> for ClassExpr {
    fn add_assign(&mut self, rhs: &ClassExpr) {
        for (id, c) in rhs.terms() {
            self.add_term(id, c);
        }
    }
}

impl std::ops::Sub for &ClassExpr {
    type Output = ClassExpr;
    fn sub(self, rhs: &ClassExpr) -> ClassExpr {
        self + &rhs.scaled(-1)
    }
}

impl std::iter::Sum for ClassExpr {
    fn sum<I: Iterator<Item = ClassExpr>>(iter: I) -> Self {
        let mut acc = ClassExpr::zero();
        for e in iter {
            acc += &e;
        }
        acc
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (id, c) in self.terms() {
            if !first || c < 0 {
                write!(f, "{}", if c < 0 { "-" } else { "+" })?;
            }
            if c.abs() != 1 {
                write!(f, "{}*", c.abs())?;
            }
            write!(f, "{id}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for ClassExpr {
    type Err = PaletteError;

    /// Parses `0`, `A`, `2*A+B-C`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut e = ClassExpr::zero();
        if t.is_empty() || t == "0" {
            return Ok(e);
        }
        let mut rest = t.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ => (1, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let chunk = &body[..end];
            rest = &body[end..];
            let (coeff, id) = match chunk.split_once('*') {
                Some((c, id)) => (
                    c.parse::<i64>()
                        .map_err(|_| PaletteError::UnknownAtom(chunk.to_string()))?,
                    id,
                ),
                None => (1, chunk),
            };
            if id.is_empty() {
                return Err(PaletteError::UnknownAtom(chunk.to_string()));
            }
            e.add_term(id, sign * coeff);
        }
        Ok(e)
    }
}

impl Serialize for ClassExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClassExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Numerical pairings of a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairings {
    pub pair_d: i64,
    pub c1_x: i64,
    /// `c1_x - pair_d`; meaningful for divisor classes.
    pub c1_d: i64,
    /// `None` as soon as a divisor atom (or an atom with no recorded index) is involved.
    pub maslov: Option<i64>,
    pub area: Q,
}

impl std::ops::Add for Pairings {
    type Output = Pairings;
    fn add(self, o: Pairings) -> Pairings {
        Pairings {
            pair_d: self.pair_d + o.pair_d,
            c1_x: self.c1_x + o.c1_x,
            c1_d: self.c1_d + o.c1_d,
            maslov: self.maslov.zip(o.maslov).map(|(a, b)| a + b),
            area: self.area + o.area,
        }
    }
}

pub fn pairings(expr: &ClassExpr, palette: &Palette) -> Result<Pairings, PaletteError> {
    let mut p = Pairings {
        pair_d: 0,
        c1_x: 0,
        c1_d: 0,
        maslov: Some(0),
        area: Q::zero(),
    };
    for (id, c) in expr.terms() {
        let a = palette.get(id)?;
        p.pair_d += c * a.pair_d;
        p.c1_x += c * a.c1_x;
        let mu = match a.space {
            Space::D => None,
            Space::X => Some(2 * a.c1_x),
            _ => a.maslov,
        };
        p.maslov = p.maslov.zip(mu).map(|(m, mu)| m + c * mu);
        p.area += Q::from_integer(c.into()) * &a.area;
    }
    p.c1_d = p.c1_x - p.pair_d;
    Ok(p)
}

/// Maslov index where it is demanded outright: divisor atoms are an error.
pub fn maslov(expr: &ClassExpr, palette: &Palette) -> Result<i64, PaletteError> {
    let mut total = 0;
    for (id, c) in expr.terms() {
        let a = palette.get(id)?;
        if a.space == Space::D {
            return Err(PaletteError::MaslovUndefined(id.to_string()));
        }
        total += c * a.pushed_maslov()?;
    }
    Ok(total)
}

/// Maslov index of the class pushed into a disc or strip group: sphere atoms
/// (in `D` or `X`) contribute `2 c1_X`.
pub fn pushed_maslov(expr: &ClassExpr, palette: &Palette) -> Result<i64, PaletteError> {
    expr.terms().try_fold(0, |acc, (id, c)| {
        Ok(acc + c * palette.get(id)?.pushed_maslov()?)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaletteViolation {
    pub atom: String,
    pub problem: String,
}

/// Lists every violated atom invariant; an empty list means the palette is valid.
pub fn validate_palette(palette: &Palette) -> Vec<PaletteViolation> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut flag = |atom: &str, problem: String| {
        out.push(PaletteViolation {
            atom: atom.to_string(),
            problem,
        })
    };
    for a in palette.atoms() {
        if !seen.insert(a.id.clone()) {
            flag(&a.id, "duplicate id".into());
        }
        if a.area.is_negative() {
            flag(&a.id, format!("negative area {}", a.area));
        } else if a.area.is_zero() && (a.pair_d != 0 || a.c1_x != 0 || a.maslov.unwrap_or(0) != 0) {
            flag(&a.id, "zero area on a nonzero class".into());
        }
        match &a.space {
            s if s.needs_maslov() && a.maslov.is_none() => {
                flag(&a.id, format!("space {s} requires a Maslov index"))
            }
            Space::X => {
                if let Some(m) = a.maslov {
                    if m != 2 * a.c1_x {
                        flag(
                            &a.id,
                            format!(
                                "sphere Maslov index {m} differs from 2*c1_X = {}",
                                2 * a.c1_x
                            ),
                        );
                    }
                }
            }
            Space::D if a.maslov.is_some() => {
                flag(&a.id, "divisor atoms carry no Maslov index".into())
            }
            _ => {}
        }
    }
    out
}
