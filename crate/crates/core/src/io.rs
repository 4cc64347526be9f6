//! JSON documents for trees, counts and complexes. Rationals travel as
//! `"num/den"` strings; every document written carries `"schema"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::divisor_trees::{Color, DetailedTree, Link, RibbonError, RibbonKind, Side, Vertex};
use crate::floer::{DiscCount, FloerData, Generator, StripCount};
use crate::linalg::Matrix;
use crate::novikov::GappedComplex;
use crate::palette::PaletteError;
use crate::spectral::{FilteredComplex, SpectralError};
use crate::trees::{DecoratedTree, Edge, Node};
use crate::{parse_rational, ClassExpr, Q, SCHEMA};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Palette(#[from] PaletteError),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("unsupported schema `{0}`")]
    Schema(String),
    #[error("not a rational: `{0}`")]
    BadRational(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("{0}")]
    Malformed(String),
}

fn rational(s: &str) -> Result<Q, IoError> {
    parse_rational(s).ok_or_else(|| IoError::BadRational(s.to_string()))
}

fn class(s: &str) -> Result<ClassExpr, IoError> {
    Ok(s.parse::<ClassExpr>()?)
}

fn check_schema(schema: &Option<String>) -> Result<(), IoError> {
    match schema {
        Some(s) if s != SCHEMA => Err(IoError::Schema(s.clone())),
        _ => Ok(()),
    }
}

/// Vertex ids may be written as numbers or strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
enum Id {
    Num(u64),
    Text(String),
}

impl Id {
    fn key(&self) -> String {
        match self {
            Id::Num(n) => n.to_string(),
            Id::Text(s) => s.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TreeVertexRecord {
    id: Id,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TreeEdgeRecord {
    a: Id,
    b: Id,
    m: i64,
}

#[derive(Serialize, Deserialize)]
struct TreeRecord {
    #[serde(default)]
    schema: Option<String>,
    vertices: Vec<TreeVertexRecord>,
    edges: Vec<TreeEdgeRecord>,
    root: Id,
    outside_order: Vec<Id>,
}

/// Reads a decorated tree; edge `a` is the endpoint nearer the root.
pub fn decorated_tree_from_json(text: &str) -> Result<DecoratedTree, IoError> {
    let rec: TreeRecord = serde_json::from_str(text)?;
    check_schema(&rec.schema)?;
    let index: BTreeMap<String, usize> = rec
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.id.key(), i))
        .collect();
    let find = |id: &Id| {
        index
            .get(&id.key())
            .copied()
            .ok_or_else(|| IoError::UnknownVertex(id.key()))
    };
    let nodes = rec
        .vertices
        .iter()
        .map(|v| match v.kind.as_str() {
            "inside" => Ok(Node::Inside {
                alpha: class(v.alpha.as_deref().unwrap_or("0"))?,
                level: v.level.unwrap_or(1),
            }),
            "outside" => Ok(Node::Outside),
            other => Err(IoError::Malformed(format!("vertex kind `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let edges = rec
        .edges
        .iter()
        .map(|e| {
            Ok(Edge {
                source: find(&e.a)?,
                target: find(&e.b)?,
                m: e.m,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let outside = rec
        .outside_order
        .iter()
        .map(find)
        .collect::<Result<Vec<_>, _>>()?;
    if outside.first() != Some(&find(&rec.root)?) {
        return Err(IoError::Malformed(
            "the root must come first in outside_order".into(),
        ));
    }
    Ok(DecoratedTree {
        nodes,
        edges,
        outside,
    })
}

pub fn decorated_tree_to_json(t: &DecoratedTree) -> Value {
    let vertices = t
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| match n {
            Node::Inside { alpha, level } => TreeVertexRecord {
                id: Id::Num(i as u64),
                kind: "inside".into(),
                alpha: Some(alpha.to_string()),
                level: Some(*level),
            },
            Node::Outside => TreeVertexRecord {
                id: Id::Num(i as u64),
                kind: "outside".into(),
                alpha: None,
                level: None,
            },
        })
        .collect();
    let rec = TreeRecord {
        schema: Some(SCHEMA.into()),
        vertices,
        edges: t
            .edges
            .iter()
            .map(|e| TreeEdgeRecord {
                a: Id::Num(e.source as u64),
                b: Id::Num(e.target as u64),
                m: e.m,
            })
            .collect(),
        root: Id::Num(t.root() as u64),
        outside_order: t.outside.iter().map(|&o| Id::Num(o as u64)).collect(),
    };
    serde_json::to_value(rec).expect("tree serializes")
}

#[derive(Serialize, Deserialize)]
struct RibbonVertexRecord {
    color: String,
    #[serde(default = "zero_class")]
    alpha: String,
    #[serde(default)]
    level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<usize>,
    /// Multiplicity of a divisor edge to the parent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<i64>,
    /// Intersection point at a strip edge to the parent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pt: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ribbon: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    divisor: Vec<usize>,
}

fn zero_class() -> String {
    "0".into()
}

#[derive(Serialize, Deserialize)]
struct RibbonTreeRecord {
    #[serde(default)]
    schema: Option<String>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    to: Option<String>,
    root: usize,
    vertices: Vec<RibbonVertexRecord>,
}

/// Reads a ribbon tree with inlined divisor decorations and global levels.
/// Vertices are referred to by position; `ribbon` lists children in cyclic
/// order after the parent edge.
pub fn ribbon_tree_from_json(text: &str) -> Result<DetailedTree, IoError> {
    let rec: RibbonTreeRecord = serde_json::from_str(text)?;
    check_schema(&rec.schema)?;
    let kind = match (rec.kind.as_str(), rec.side, rec.from, rec.to) {
        ("disc", Some(side), _, _) => RibbonKind::Disc(side),
        ("strip", _, Some(from), Some(to)) => RibbonKind::Strip { from, to },
        _ => {
            return Err(IoError::Malformed(
                "kind must be `disc` with a side or `strip` with from and to".into(),
            ))
        }
    };
    let n = rec.vertices.len();
    let in_range = |i: usize| {
        if i < n {
            Ok(i)
        } else {
            Err(IoError::UnknownVertex(i.to_string()))
        }
    };
    in_range(rec.root)?;
    let vertices = rec
        .vertices
        .into_iter()
        .map(|v| {
            for &c in v.ribbon.iter().chain(&v.divisor) {
                in_range(c)?;
            }
            let link = match (v.parent, v.m) {
                (None, _) => Link::Root,
                (Some(_), Some(m)) => Link::Divisor(m),
                (Some(_), None) => Link::Ribbon(v.pt),
            };
            Ok(Vertex {
                color: v.color.parse::<Color>()?,
                alpha: class(&v.alpha)?,
                level: v.level,
                parent: v.parent.map(in_range).transpose()?,
                link,
                ribbon: v.ribbon,
                divisor: v.divisor,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(DetailedTree {
        kind,
        vertices,
        root: rec.root,
    })
}

pub fn ribbon_tree_to_json(t: &DetailedTree) -> Value {
    let (kind, side, from, to) = match &t.kind {
        RibbonKind::Disc(s) => ("disc", Some(*s), None, None),
        RibbonKind::Strip { from, to } => ("strip", None, Some(from.clone()), Some(to.clone())),
    };
    let vertices = t
        .vertices
        .iter()
        .map(|v| {
            let (m, pt) = match &v.link {
                Link::Root => (None, None),
                Link::Ribbon(pt) => (None, pt.clone()),
                Link::Divisor(m) => (Some(*m), None),
            };
            RibbonVertexRecord {
                color: v.color.to_string(),
                alpha: v.alpha.to_string(),
                level: v.level,
                parent: v.parent,
                m,
                pt,
                ribbon: v.ribbon.clone(),
                divisor: v.divisor.clone(),
            }
        })
        .collect();
    let rec = RibbonTreeRecord {
        schema: Some(SCHEMA.into()),
        kind: kind.into(),
        side,
        from,
        to,
        root: t.root,
        vertices,
    };
    serde_json::to_value(rec).expect("ribbon tree serializes")
}

#[derive(Serialize, Deserialize)]
struct GeneratorRecord {
    id: String,
    #[serde(default = "default_component")]
    o: String,
    #[serde(default)]
    deg: i64,
}

fn default_component() -> String {
    "o".into()
}

#[derive(Serialize, Deserialize)]
struct StripRecord {
    from: String,
    to: String,
    class: String,
    count: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    maslov: Option<i64>,
}

#[derive(Serialize, Deserialize)]
struct DiscRecord {
    class: String,
    count: String,
    #[serde(default)]
    boundary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    maslov: Option<i64>,
}

#[derive(Serialize, Deserialize, Default)]
struct DiscsRecord {
    #[serde(rename = "L0", default)]
    l0: Vec<DiscRecord>,
    #[serde(rename = "L1", default)]
    l1: Vec<DiscRecord>,
}

#[derive(Serialize, Deserialize)]
struct CountsRecord {
    #[serde(default)]
    schema: Option<String>,
    generators: Vec<GeneratorRecord>,
    #[serde(default)]
    strips: Vec<StripRecord>,
    #[serde(default)]
    discs: DiscsRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    monotonicity_c: Option<String>,
}

fn disc_from(r: &DiscRecord) -> Result<DiscCount, IoError> {
    Ok(DiscCount {
        class: class(&r.class)?,
        count: rational(&r.count)?,
        boundary: r.boundary.clone(),
        maslov: r.maslov,
    })
}

fn disc_record(d: &DiscCount) -> DiscRecord {
    DiscRecord {
        class: d.class.to_string(),
        count: d.count.to_string(),
        boundary: d.boundary.clone(),
        maslov: d.maslov,
    }
}

pub fn floer_from_json(text: &str) -> Result<FloerData, IoError> {
    let rec: CountsRecord = serde_json::from_str(text)?;
    check_schema(&rec.schema)?;
    let strips = rec
        .strips
        .iter()
        .map(|s| {
            Ok(StripCount {
                from: s.from.clone(),
                to: s.to.clone(),
                class: class(&s.class)?,
                count: rational(&s.count)?,
                energy: s.energy.as_deref().map(rational).transpose()?,
                maslov: s.maslov,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(FloerData {
        generators: rec
            .generators
            .into_iter()
            .map(|g| Generator {
                id: g.id,
                component: g.o,
                degree: g.deg,
            })
            .collect(),
        strips,
        discs_l0: rec
            .discs
            .l0
            .iter()
            .map(disc_from)
            .collect::<Result<_, _>>()?,
        discs_l1: rec
            .discs
            .l1
            .iter()
            .map(disc_from)
            .collect::<Result<_, _>>()?,
        monotonicity: rec.monotonicity_c.as_deref().map(rational).transpose()?,
    })
}

pub fn floer_to_json(data: &FloerData) -> Value {
    let rec = CountsRecord {
        schema: Some(SCHEMA.into()),
        generators: data
            .generators
            .iter()
            .map(|g| GeneratorRecord {
                id: g.id.clone(),
                o: g.component.clone(),
                deg: g.degree,
            })
            .collect(),
        strips: data
            .strips
            .iter()
            .map(|s| StripRecord {
                from: s.from.clone(),
                to: s.to.clone(),
                class: s.class.to_string(),
                count: s.count.to_string(),
                energy: s.energy.as_ref().map(Q::to_string),
                maslov: s.maslov,
            })
            .collect(),
        discs: DiscsRecord {
            l0: data.discs_l0.iter().map(disc_record).collect(),
            l1: data.discs_l1.iter().map(disc_record).collect(),
        },
        monotonicity_c: data.monotonicity.as_ref().map(Q::to_string),
    };
    serde_json::to_value(rec).expect("counts serialize")
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    #[serde(alias = "λ")]
    lambda: String,
    row: usize,
    col: usize,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct GappedRecord {
    #[serde(default)]
    schema: Option<String>,
    generators: Vec<String>,
    #[serde(default)]
    grading: Vec<i64>,
    #[serde(default)]
    monoid: Vec<String>,
    #[serde(rename = "E")]
    energy: String,
    terms: Vec<TermRecord>,
}

pub fn gapped_from_json(text: &str) -> Result<GappedComplex<Q>, IoError> {
    let rec: GappedRecord = serde_json::from_str(text)?;
    check_schema(&rec.schema)?;
    let n = rec.generators.len();
    let degrees = if rec.grading.is_empty() {
        vec![0; n]
    } else {
        rec.grading
    };
    let monoid = rec
        .monoid
        .iter()
        .map(|m| rational(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut c = GappedComplex::new(rec.generators, degrees, monoid, rational(&rec.energy)?);
    for t in &rec.terms {
        if t.row >= n || t.col >= n {
            return Err(IoError::Malformed(format!(
                "term ({}, {}) outside {n} generators",
                t.row, t.col
            )));
        }
        c.add_term(rational(&t.lambda)?, t.row, t.col, rational(&t.coeff)?);
    }
    Ok(c)
}

fn sparse(m: &Matrix<Q>) -> impl Iterator<Item = (usize, usize, &Q)> {
    m.entries()
        .filter(|(_, _, x)| !num_traits::Zero::is_zero(*x))
}

pub fn gapped_to_json(c: &GappedComplex<Q>) -> Value {
    let terms = c
        .parts
        .iter()
        .flat_map(|(e, m)| {
            sparse(m).map(move |(row, col, x)| TermRecord {
                lambda: e.to_string(),
                row,
                col,
                coeff: x.to_string(),
            })
        })
        .collect();
    let rec = GappedRecord {
        schema: Some(SCHEMA.into()),
        generators: c.generators.clone(),
        grading: c.degrees.clone(),
        monoid: c.monoid.iter().map(Q::to_string).collect(),
        energy: c.energy.to_string(),
        terms,
    };
    serde_json::to_value(rec).expect("complex serializes")
}

#[derive(Serialize, Deserialize)]
struct BasisRecord {
    id: String,
    deg: i64,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    row: usize,
    col: usize,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct PartRecord {
    k: usize,
    entries: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct FilteredRecord {
    #[serde(default)]
    schema: Option<String>,
    basis: Vec<BasisRecord>,
    parts: Vec<PartRecord>,
}

pub fn filtered_from_json(text: &str) -> Result<FilteredComplex<Q>, IoError> {
    let rec: FilteredRecord = serde_json::from_str(text)?;
    check_schema(&rec.schema)?;
    let n = rec.basis.len();
    let mut fc = FilteredComplex::new(
        rec.basis.iter().map(|b| b.id.clone()).collect(),
        rec.basis.iter().map(|b| b.deg).collect(),
    );
    for p in &rec.parts {
        let mut m: Matrix<Q> = Matrix::zeros(n, n);
        for e in &p.entries {
            if e.row >= n || e.col >= n {
                return Err(IoError::Malformed(format!(
                    "entry ({}, {}) outside {n} generators",
                    e.row, e.col
                )));
            }
            m[(e.row, e.col)] = m[(e.row, e.col)].clone() + rational(&e.coeff)?;
        }
        let merged = fc.part(p.k).add(&m);
        fc.set_part(p.k, merged)?;
    }
    Ok(fc)
}

pub fn filtered_to_json(fc: &FilteredComplex<Q>) -> Value {
    let parts = fc
        .parts()
        .filter(|(_, m)| !m.is_zero())
        .map(|(k, m)| PartRecord {
            k,
            entries: sparse(m)
                .map(|(row, col, x)| EntryRecord {
                    row,
                    col,
                    coeff: x.to_string(),
                })
                .collect(),
        })
        .collect();
    let basis = fc
        .labels
        .iter()
        .zip(&fc.degrees)
        .map(|(id, &deg)| BasisRecord {
            id: id.clone(),
            deg,
        })
        .collect();
    serde_json::to_value(FilteredRecord {
        schema: Some(SCHEMA.into()),
        basis,
        parts,
    })
    .expect("complex serializes")
}

/// Wraps a result object with the schema tag.
pub fn document(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), json!(SCHEMA));
    }
    v
}
