//! Disc and strip components with their sphere bubbles, in detailed form.
//!
//! Everything here is stored as a [`DetailedTree`]: one rooted tree whose
//! vertices are coloured disc/strip components (level 0), spheres in the
//! ambient manifold (level 0), spheres in the divisor (level >= 1), and the
//! exterior vertices of the ribbon skeleton. A single DD- or SD-tree is the
//! special case of a ribbon tree with one interior vertex; [`DivisorTree`]
//! is the un-inlined form, converted by [`DivisorTree::detail`].

mod build;
mod enumerate;
mod templates;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::palette::{pairings, PaletteError};
use crate::{ClassExpr, Palette, Space};

pub use build::{DivisorTree, SColor, SVertex};
pub use enumerate::{enumerate_sd, random_dd, random_sd, SdBounds};
pub use templates::{boundary_template, BoundaryData, SplittingTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RibbonError {
    #[error(transparent)]
    Palette(#[from] PaletteError),
    #[error("invalid input ({clause}): {detail}")]
    InvalidInput {
        clause: &'static str,
        detail: String,
    },
    #[error("incompatible split: {0}")]
    IncompatibleSplit(String),
    #[error("bad colour `{0}`")]
    BadColor(String),
}

/// One of the two Lagrangians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L0,
    L1,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::L0 => Side::L1,
            Side::L1 => Side::L0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::L0 => 0,
            Side::L1 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    /// Disc component with boundary on the given Lagrangian.
    Disc(Side),
    Strip,
    /// Sphere in the ambient manifold meeting the divisor.
    Sphere,
    /// Sphere inside the divisor.
    Divisor,
    /// Left end of the strip path; the root of an SD ribbon tree.
    Left,
    Right,
    /// Boundary marked point.
    Marked(Side),
}

impl Color {
    pub fn is_exterior(self) -> bool {
        matches!(self, Color::Left | Color::Right | Color::Marked(_))
    }

    /// Interior vertices of the ribbon skeleton.
    pub fn is_interior(self) -> bool {
        matches!(self, Color::Disc(_) | Color::Strip)
    }

    pub fn on_ribbon(self) -> bool {
        !matches!(self, Color::Sphere | Color::Divisor)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Color::Disc(Side::L0) => "d0",
            Color::Disc(Side::L1) => "d1",
            Color::Strip => "str",
            Color::Sphere => "s",
            Color::Divisor => "D",
            Color::Left => "le",
            Color::Right => "ri",
            Color::Marked(Side::L0) => "mk0",
            Color::Marked(Side::L1) => "mk1",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Color {
    type Err = RibbonError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "d0" => Color::Disc(Side::L0),
            "d1" => Color::Disc(Side::L1),
            "str" => Color::Strip,
            "s" => Color::Sphere,
            "D" => Color::Divisor,
            "le" => Color::Left,
            "ri" => Color::Right,
            "mk0" => Color::Marked(Side::L0),
            "mk1" => Color::Marked(Side::L1),
            _ => return Err(RibbonError::BadColor(s.to_string())),
        })
    }
}

/// Label of the edge from a vertex to its parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Link {
    Root,
    /// Ribbon edge; strip edges carry the intersection point they limit to.
    Ribbon(Option<String>),
    /// Edge through the divisor with its multiplicity.
    Divisor(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub color: Color,
    pub alpha: ClassExpr,
    pub level: usize,
    pub parent: Option<usize>,
    pub link: Link,
    /// Ribbon children, counter-clockwise starting after the parent edge.
    pub ribbon: Vec<usize>,
    pub divisor: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RibbonKind {
    /// Discs with boundary on one Lagrangian.
    Disc(Side),
    /// Strips between `L1` and `L0` from `from` to `to`.
    Strip { from: String, to: String },
}

/// Homology class and marked-point counts of a ribbon tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RibbonType {
    pub kind: RibbonKind,
    pub beta: ClassExpr,
    pub k0: usize,
    pub k1: usize,
}

impl RibbonType {
    pub fn k(&self) -> usize {
        self.k0 + self.k1
    }
}

impl fmt::Display for RibbonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RibbonKind::Strip { from, to } => {
                write!(f, "({from},{to};{};{},{})", self.beta, self.k0, self.k1)
            }
            RibbonKind::Disc(side) => write!(f, "({side:?};{};{})", self.beta, self.k()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RibbonViolation {
    pub clause: &'static str,
    pub vertex: Option<usize>,
    pub detail: String,
}

/// A ribbon tree with every divisor decoration inlined and a global level
/// function (0 off the divisor).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetailedTree {
    pub kind: RibbonKind,
    pub vertices: Vec<Vertex>,
    pub root: usize,
}

impl DetailedTree {
    /// A tree holding only its root exterior vertex.
    pub fn with_root(kind: RibbonKind) -> Self {
        let color = match &kind {
            RibbonKind::Disc(side) => Color::Marked(*side),
            RibbonKind::Strip { .. } => Color::Left,
        };
        let root = Vertex {
            color,
            alpha: ClassExpr::zero(),
            level: 0,
            parent: None,
            link: Link::Root,
            ribbon: Vec::new(),
            divisor: Vec::new(),
        };
        DetailedTree {
            kind,
            vertices: vec![root],
            root: 0,
        }
    }

    fn push(
        &mut self,
        parent: usize,
        color: Color,
        alpha: ClassExpr,
        level: usize,
        link: Link,
    ) -> usize {
        let id = self.vertices.len();
        let ribbon = matches!(link, Link::Ribbon(_));
        self.vertices.push(Vertex {
            color,
            alpha,
            level,
            parent: Some(parent),
            link,
            ribbon: vec![],
            divisor: vec![],
        });
        if ribbon {
            self.vertices[parent].ribbon.push(id);
        } else {
            self.vertices[parent].divisor.push(id);
        }
        id
    }

    /// Appends a ribbon child after the existing ones.
    pub fn add_ribbon(
        &mut self,
        parent: usize,
        color: Color,
        alpha: ClassExpr,
        point: Option<&str>,
    ) -> usize {
        self.push(
            parent,
            color,
            alpha,
            0,
            Link::Ribbon(point.map(str::to_string)),
        )
    }

    pub fn add_divisor(
        &mut self,
        parent: usize,
        color: Color,
        alpha: ClassExpr,
        level: usize,
        m: i64,
    ) -> usize {
        self.push(parent, color, alpha, level, Link::Divisor(m))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn color(&self, v: usize) -> Color {
        self.vertices[v].color
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.vertices[v]
            .ribbon
            .iter()
            .chain(&self.vertices[v].divisor)
            .copied()
    }

    /// Vertices in depth-first order, ribbon children first.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            let kids: Vec<usize> = self.children(v).collect();
            stack.extend(kids.into_iter().rev());
        }
        out
    }

    pub fn interior(&self) -> Vec<usize> {
        self.preorder()
            .into_iter()
            .filter(|&v| self.color(v).is_interior())
            .collect()
    }

    pub fn count(&self, pred: impl Fn(Color) -> bool) -> usize {
        self.vertices.iter().filter(|v| pred(v.color)).count()
    }

    pub fn num_levels(&self) -> usize {
        self.vertices.iter().map(|v| v.level).max().unwrap_or(0)
    }

    /// The child of a strip vertex continuing the strip path.
    pub fn strip_child(&self, v: usize) -> Option<usize> {
        self.vertices[v]
            .ribbon
            .iter()
            .copied()
            .find(|&c| matches!(self.color(c), Color::Strip | Color::Right))
    }

    /// Strip vertices from left to right.
    pub fn strip_path(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.vertices[self.root].ribbon.first().copied();
        while let Some(v) = cur.filter(|&v| self.color(v) == Color::Strip) {
            out.push(v);
            cur = self.strip_child(v);
        }
        out
    }

    /// Boundary side of every ribbon vertex off the strip path, read from the
    /// ribbon order at strip vertices.
    pub fn sides(&self) -> BTreeMap<usize, Side> {
        let mut out = BTreeMap::new();
        let mut stack: Vec<(usize, Option<Side>)> = vec![(self.root, None)];
        if let RibbonKind::Disc(side) = self.kind {
            stack = vec![(self.root, Some(side))];
        }
        while let Some((v, side)) = stack.pop() {
            if let Some(s) = side {
                out.insert(v, s);
            }
            let vx = &self.vertices[v];
            if vx.color == Color::Strip {
                let pos = self
                    .strip_child(v)
                    .and_then(|c| vx.ribbon.iter().position(|&x| x == c));
                for (i, &c) in vx.ribbon.iter().enumerate() {
                    let s = match pos {
                        Some(p) if i == p => None,
                        Some(p) if i > p => Some(Side::L1),
                        _ => Some(Side::L0),
                    };
                    stack.push((c, s));
                }
            } else {
                stack.extend(vx.ribbon.iter().map(|&c| (c, side)));
            }
        }
        out
    }

    /// Non-root marked points in ribbon order.
    pub fn marks(&self) -> Vec<usize> {
        self.preorder()
            .into_iter()
            .filter(|&v| v != self.root && matches!(self.color(v), Color::Marked(_)))
            .collect()
    }

    pub fn marks_on(&self, side: Side) -> Vec<usize> {
        self.marks()
            .into_iter()
            .filter(|&v| self.color(v) == Color::Marked(side))
            .collect()
    }

    pub fn parent_m(&self, v: usize) -> Option<i64> {
        match self.vertices[v].link {
            Link::Divisor(m) => Some(m),
            _ => None,
        }
    }

    pub fn ribbon_valency(&self, v: usize) -> usize {
        self.vertices[v].ribbon.len()
            + usize::from(matches!(self.vertices[v].link, Link::Ribbon(_)))
    }

    pub fn divisor_valency(&self, v: usize) -> usize {
        self.vertices[v].divisor.len()
            + usize::from(matches!(self.vertices[v].link, Link::Divisor(_)))
    }

    pub fn total_class(&self) -> ClassExpr {
        self.vertices.iter().map(|v| v.alpha.clone()).sum()
    }

    /// Class of a vertex together with everything hanging off it through the divisor.
    pub fn decoration_class(&self, v: usize) -> ClassExpr {
        let mut total = self.vertices[v].alpha.clone();
        let mut stack: Vec<usize> = self.vertices[v].divisor.clone();
        while let Some(w) = stack.pop() {
            total += &self.vertices[w].alpha;
            stack.extend(self.children(w));
        }
        total
    }

    pub fn ribbon_type(&self) -> RibbonType {
        let marks = self.marks();
        let k_on = |s: Side| {
            marks
                .iter()
                .filter(|&&v| self.color(v) == Color::Marked(s))
                .count()
        };
        RibbonType {
            kind: self.kind.clone(),
            beta: self.total_class(),
            k0: k_on(Side::L0),
            k1: k_on(Side::L1),
        }
    }

    /// Renumbers vertices in preorder and drops anything unreachable from the root.
    pub fn normalized(&self) -> Self {
        let order = self.preorder();
        let index: BTreeMap<usize, usize> =
            order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let vertices = order
            .iter()
            .map(|&v| {
                let x = &self.vertices[v];
                Vertex {
                    color: x.color,
                    alpha: x.alpha.clone(),
                    level: x.level,
                    parent: x.parent.map(|p| index[&p]),
                    link: x.link.clone(),
                    ribbon: x.ribbon.iter().map(|c| index[c]).collect(),
                    divisor: x.divisor.iter().map(|c| index[c]).collect(),
                }
            })
            .collect();
        DetailedTree {
            kind: self.kind.clone(),
            vertices,
            root: 0,
        }
    }

    fn encode(&self, v: usize) -> String {
        let x = &self.vertices[v];
        let link = match &x.link {
            Link::Root => String::new(),
            Link::Ribbon(None) => "-".to_string(),
            Link::Ribbon(Some(p)) => format!("@{p}"),
            Link::Divisor(m) => format!("{m}>"),
        };
        let ribbon: Vec<String> = x.ribbon.iter().map(|&c| self.encode(c)).collect();
        let mut divisor: Vec<String> = x.divisor.iter().map(|&c| self.encode(c)).collect();
        divisor.sort();
        format!(
            "{link}{}[{}|{}]({};{})",
            x.color,
            x.alpha,
            x.level,
            ribbon.join(","),
            divisor.join(",")
        )
    }

    /// Isomorphism-invariant encoding: ribbon children keep their cyclic
    /// order, divisor children are unordered.
    pub fn canonical_form(&self) -> String {
        let head = match &self.kind {
            RibbonKind::Disc(s) => format!("DD{s:?}"),
            RibbonKind::Strip { from, to } => format!("SD({from},{to})"),
        };
        format!("{head}:{}", self.encode(self.root))
    }

    /// Lists every violated clause; empty iff the tree is a valid ribbon tree.
    pub fn validate(&self, palette: &Palette) -> Vec<RibbonViolation> {
        let mut out = Vec::new();
        let mut flag = |clause: &'static str, vertex: Option<usize>, detail: String| {
            out.push(RibbonViolation {
                clause,
                vertex,
                detail,
            })
        };
        if let Err(detail) = self.check_shape() {
            flag("shape", None, detail);
            return out;
        }
        self.check_colors(&mut flag);
        self.check_levels(&mut flag);
        if let Err(e) = self.check_classes(palette, &mut flag) {
            flag("class", None, e.to_string());
        }
        out
    }

    pub fn is_valid(&self, palette: &Palette) -> bool {
        self.validate(palette).is_empty()
    }

    fn check_shape(&self) -> Result<(), String> {
        let n = self.len();
        if self.root >= n || self.vertices[self.root].parent.is_some() {
            return Err("root must exist and have no parent".into());
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(format!("vertex {v} reached twice"));
            }
            for c in self.children(v) {
                if c >= n || self.vertices[c].parent != Some(v) {
                    return Err(format!("child {c} of {v} does not point back"));
                }
                let ribbon = self.vertices[v].ribbon.contains(&c);
                if ribbon != matches!(self.vertices[c].link, Link::Ribbon(_)) {
                    return Err(format!("edge {v}-{c} stored under the wrong kind"));
                }
                stack.push(c);
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(format!("vertex {v} unreachable from the root"));
        }
        Ok(())
    }

    fn check_colors(&self, flag: &mut impl FnMut(&'static str, Option<usize>, String)) {
        let root = &self.vertices[self.root];
        let expected_root = match &self.kind {
            RibbonKind::Disc(s) => Color::Marked(*s),
            RibbonKind::Strip { .. } => Color::Left,
        };
        if root.color != expected_root || root.ribbon.len() != 1 || !root.divisor.is_empty() {
            flag(
                "root",
                Some(self.root),
                format!("root must be a {expected_root} vertex with a single ribbon edge"),
            );
        }
        for (v, x) in self.vertices.iter().enumerate() {
            if x.color.is_exterior()
                && v != self.root
                && !(x.ribbon.is_empty() && x.divisor.is_empty())
            {
                flag(
                    "exterior",
                    Some(v),
                    "exterior vertex must have valency one".into(),
                );
            }
            if let Some(p) = x.parent {
                let pc = self.color(p);
                match x.link {
                    Link::Ribbon(_) if !(x.color.on_ribbon() && pc.on_ribbon()) => flag(
                        "ribbon",
                        Some(v),
                        format!("ribbon edge joins {pc} and {}", x.color),
                    ),
                    Link::Divisor(m) => {
                        let ok = match (pc, x.color) {
                            (_, Color::Divisor) => !pc.is_exterior(),
                            (Color::Divisor, Color::Sphere) => true,
                            _ => false,
                        };
                        if !ok {
                            flag(
                                "divisor edge",
                                Some(v),
                                format!("divisor edge joins {pc} and {}", x.color),
                            );
                        }
                        if m == 0 {
                            flag("multiplicity", Some(v), "zero multiplicity".into());
                        }
                    }
                    _ => {}
                }
            }
        }
        match &self.kind {
            RibbonKind::Disc(side) => {
                for (v, x) in self.vertices.iter().enumerate() {
                    let ok = match x.color {
                        Color::Disc(s) | Color::Marked(s) => s == *side,
                        Color::Sphere | Color::Divisor => true,
                        _ => false,
                    };
                    if !ok {
                        flag(
                            "colour",
                            Some(v),
                            format!("{} not allowed in a disc tree on {side:?}", x.color),
                        );
                    }
                    if matches!(x.link, Link::Ribbon(Some(_))) {
                        flag(
                            "point",
                            Some(v),
                            "only strip edges carry intersection points".into(),
                        );
                    }
                }
            }
            RibbonKind::Strip { from, to } => self.check_strip_path(from, to, flag),
        }
        if self.interior().is_empty() {
            flag(
                "interior",
                None,
                "at least one interior vertex is required".into(),
            );
        }
    }

    fn check_strip_path(
        &self,
        from: &str,
        to: &str,
        flag: &mut impl FnMut(&'static str, Option<usize>, String),
    ) {
        let path = self.strip_path();
        if path.is_empty() {
            flag(
                "strip path",
                None,
                "the path from left to right needs at least one strip vertex".into(),
            );
            return;
        }
        let right = path.last().and_then(|&v| self.strip_child(v));
        let on_path: BTreeSet<usize> = path
            .iter()
            .copied()
            .chain(right)
            .chain([self.root])
            .collect();
        if right.map(|r| self.color(r)) != Some(Color::Right) {
            flag(
                "strip path",
                None,
                "strip path does not end at the right exterior vertex".into(),
            );
        }
        if self.count(|c| c == Color::Strip) != path.len() || self.count(|c| c == Color::Right) != 1
        {
            flag(
                "strip path",
                None,
                "strip and right vertices must all lie on the path".into(),
            );
        }
        for &v in &path {
            let strip_kids = self.vertices[v]
                .ribbon
                .iter()
                .filter(|&&c| matches!(self.color(c), Color::Strip | Color::Right));
            if strip_kids.count() != 1 {
                flag(
                    "strip path",
                    Some(v),
                    "strip vertex must continue the path exactly once".into(),
                );
            }
        }
        let first = path[0];
        if self.vertices[first].link != Link::Ribbon(Some(from.to_string())) {
            flag(
                "point",
                Some(first),
                format!("first strip edge must be labelled {from}"),
            );
        }
        if let Some(r) = right {
            if self.vertices[r].link != Link::Ribbon(Some(to.to_string())) {
                flag(
                    "point",
                    Some(r),
                    format!("last strip edge must be labelled {to}"),
                );
            }
        }
        let sides = self.sides();
        for (v, x) in self.vertices.iter().enumerate() {
            let labelled = matches!(x.link, Link::Ribbon(Some(_)));
            if on_path.contains(&v) {
                if v != self.root && !labelled {
                    flag(
                        "point",
                        Some(v),
                        "strip edge without an intersection point".into(),
                    );
                }
                continue;
            }
            if labelled {
                flag(
                    "point",
                    Some(v),
                    "only strip edges carry intersection points".into(),
                );
            }
            if let Color::Disc(s) | Color::Marked(s) = x.color {
                if sides.get(&v) != Some(&s) {
                    flag(
                        "side",
                        Some(v),
                        format!("{} sits on the other side of the strip", x.color),
                    );
                }
            }
        }
    }

    fn check_levels(&self, flag: &mut impl FnMut(&'static str, Option<usize>, String)) {
        let mut used = BTreeSet::new();
        for (v, x) in self.vertices.iter().enumerate() {
            match (x.color, x.level) {
                (Color::Divisor, 0) => flag("levels", Some(v), "divisor vertex at level 0".into()),
                (Color::Divisor, l) => {
                    used.insert(l);
                }
                (_, 0) => {}
                (c, _) => flag("levels", Some(v), format!("{c} vertex off level 0")),
            }
            if let (Some(p), Link::Divisor(m)) = (x.parent, &x.link) {
                let (lp, lv) = (self.vertices[p].level, x.level);
                let ok = if *m > 0 { lp < lv } else { lp > lv };
                if !ok {
                    flag(
                        "order",
                        Some(v),
                        format!("multiplicity {m} between levels {lp} and {lv}"),
                    );
                }
            }
        }
        if used.len() != self.num_levels() {
            flag("levels", None, "level function is not onto 1..|λ|".into());
        }
    }

    fn check_classes(
        &self,
        palette: &Palette,
        flag: &mut impl FnMut(&'static str, Option<usize>, String),
    ) -> Result<(), PaletteError> {
        for (v, x) in self.vertices.iter().enumerate() {
            let p = pairings(&x.alpha, palette)?;
            let spaces = x.alpha.spaces(palette)?;
            let allowed = |s: &Space| match x.color {
                Color::Divisor => *s == Space::D,
                Color::Sphere => s.is_sphere(),
                Color::Disc(side) => s.is_sphere() || *s == Space::disc(side),
                Color::Strip => true,
                _ => false,
            };
            if let Some(s) = spaces.iter().find(|s| !allowed(s)) {
                flag(
                    "class",
                    Some(v),
                    format!("{} vertex carries a class in {s}", x.color),
                );
            }
            if x.color == Color::Strip {
                self.check_strip_class(v, palette, flag)?;
            }
            if !x.alpha.is_effective() && !x.alpha.is_zero() {
                flag(
                    "class",
                    Some(v),
                    format!("class {} is not effective", x.alpha),
                );
            }
            let out: i64 = x.divisor.iter().filter_map(|&c| self.parent_m(c)).sum();
            let balance = match x.color {
                Color::Divisor | Color::Sphere => out - p.pair_d == self.parent_m(v).unwrap_or(0),
                Color::Disc(_) | Color::Strip => out == p.pair_d,
                _ => x.alpha.is_zero(),
            };
            if !balance {
                flag(
                    "balancing",
                    Some(v),
                    format!(
                        "{} vertex with α·D = {} and outgoing {out}",
                        x.color, p.pair_d
                    ),
                );
            }
            let area = p.area.is_positive();
            let stable = match x.color {
                Color::Divisor | Color::Sphere => area || self.divisor_valency(v) >= 3,
                Color::Disc(_) | Color::Strip => {
                    area || self.ribbon_valency(v) + 2 * x.divisor.len() >= 3
                }
                _ => true,
            };
            if !stable {
                flag(
                    "stability",
                    Some(v),
                    format!("{} vertex is unstable", x.color),
                );
            }
        }
        Ok(())
    }

    /// The strip atoms of a strip vertex must connect its two strip-edge labels.
    fn check_strip_class(
        &self,
        v: usize,
        palette: &Palette,
        flag: &mut impl FnMut(&'static str, Option<usize>, String),
    ) -> Result<(), PaletteError> {
        let x = &self.vertices[v];
        let label = |w: Option<usize>| match w.map(|w| &self.vertices[w].link) {
            Some(Link::Ribbon(Some(p))) => Some(p.clone()),
            _ => None,
        };
        let (Some(a), Some(b)) = (label(Some(v)), label(self.strip_child(v))) else {
            return Ok(());
        };
        let mut boundary: BTreeMap<String, i64> = BTreeMap::new();
        for (id, c) in x.alpha.terms() {
            match &palette.get(id)?.space {
                Space::Strip { from, to } => {
                    *boundary.entry(to.clone()).or_default() += c;
                    *boundary.entry(from.clone()).or_default() -= c;
                }
                Space::XL0 | Space::XL1 | Space::D | Space::X => {}
            }
        }
        *boundary.entry(b.clone()).or_default() -= 1;
        *boundary.entry(a.clone()).or_default() += 1;
        if boundary.values().any(|&c| c != 0) {
            flag(
                "class",
                Some(v),
                format!("class {} is not a strip from {a} to {b}", x.alpha),
            );
        }
        Ok(())
    }
}

/// Sample data shared by the unit tests, the self-test and the acceptance suite.
pub mod fixtures {
    use super::*;
    use crate::{q, ClassAtom};

    /// Strips between `p`, `r`, `q`, discs on both sides, divisor spheres and
    /// an ambient sphere. Areas follow `ω = μ/2` plus a per-pair offset.
    pub fn sd_palette() -> Palette {
        let st = Space::strip;
        Palette::new([
            ClassAtom::new("b", st("p", "q"), 0, 0, Some(1), q(1)),
            ClassAtom::new("bh", st("p", "q"), 1, 0, Some(3), q(2)),
            ClassAtom::new("b1", st("p", "r"), 0, 0, Some(1), q(1)),
            ClassAtom::new("b2", st("r", "q"), 0, 0, Some(1), q(1)),
            ClassAtom::new("bg", st("p", "r"), 2, 0, Some(5), q(3)),
            ClassAtom::new("a0", Space::XL0, 0, 0, Some(2), q(1)),
            ClassAtom::new("h0", Space::XL0, 1, 0, Some(4), q(2)),
            ClassAtom::new("a1", Space::XL1, 0, 0, Some(2), q(1)),
            ClassAtom::new("h1", Space::XL1, 1, 0, Some(4), q(2)),
            ClassAtom::new("e", Space::D, -1, 1, None, q(1)),
            ClassAtom::new("f", Space::D, -2, 1, None, q(1)),
            ClassAtom::new("g", Space::D, 1, 1, None, q(1)),
            ClassAtom::new("x", Space::X, 1, 1, None, q(1)),
        ])
    }

    pub fn single_strip(atom: &str) -> DetailedTree {
        let mut t = DetailedTree::with_root(RibbonKind::Strip {
            from: "p".into(),
            to: "q".into(),
        });
        let s = t.add_ribbon(0, Color::Strip, ClassExpr::atom(atom), Some("p"));
        t.add_ribbon(s, Color::Right, ClassExpr::zero(), Some("q"));
        t
    }

    /// Strip with a disc bubble on `L1`, a divisor sphere on the strip, and one
    /// marked point on each side.
    pub fn decorated_strip() -> DetailedTree {
        let mut t = DetailedTree::with_root(RibbonKind::Strip {
            from: "p".into(),
            to: "q".into(),
        });
        let s = t.add_ribbon(0, Color::Strip, ClassExpr::atom("bh"), Some("p"));
        t.add_ribbon(s, Color::Marked(Side::L0), ClassExpr::zero(), None);
        t.add_ribbon(s, Color::Right, ClassExpr::zero(), Some("q"));
        let d = t.add_ribbon(s, Color::Disc(Side::L1), ClassExpr::atom("a1"), None);
        t.add_ribbon(d, Color::Marked(Side::L1), ClassExpr::zero(), None);
        t.add_divisor(s, Color::Divisor, ClassExpr::atom("e"), 1, 1);
        t
    }

    /// Disc tree with four interior vertices: a root disc `v1` carrying a
    /// divisor chain, two children `v2`, `v3`, and `v4` below `v3`.
    pub fn four_disc_tree() -> DetailedTree {
        let l = Side::L0;
        let mut t = DetailedTree::with_root(RibbonKind::Disc(l));
        let v1 = t.add_ribbon(0, Color::Disc(l), ClassExpr::atom("h0"), None);
        let v2 = t.add_ribbon(v1, Color::Disc(l), ClassExpr::atom("a0"), None);
        t.add_ribbon(v1, Color::Marked(l), ClassExpr::zero(), None);
        let v3 = t.add_ribbon(v1, Color::Disc(l), ClassExpr::zero(), None);
        t.add_ribbon(v2, Color::Marked(l), ClassExpr::zero(), None);
        t.add_ribbon(v3, Color::Marked(l), ClassExpr::zero(), None);
        let v4 = t.add_ribbon(v3, Color::Disc(l), ClassExpr::atom("a0"), None);
        t.add_ribbon(v4, Color::Marked(l), ClassExpr::zero(), None);
        let d1 = t.add_divisor(v1, Color::Divisor, ClassExpr::atom("f"), 1, 1);
        t.add_divisor(d1, Color::Sphere, ClassExpr::atom("x"), 0, -1);
        t
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn clauses(t: &DetailedTree, p: &Palette) -> Vec<&'static str> {
        t.validate(p).into_iter().map(|v| v.clause).collect()
    }

    #[test]
    fn single_strip_is_valid() {
        let p = sd_palette();
        let t = single_strip("b");
        assert_eq!(clauses(&t, &p), Vec::<&str>::new());
        let ty = t.ribbon_type();
        assert_eq!((ty.beta.to_string(), ty.k0, ty.k1), ("b".to_string(), 0, 0));
    }

    #[test]
    fn empty_strip_path_is_rejected() {
        let p = sd_palette();
        let mut t = DetailedTree::with_root(RibbonKind::Strip {
            from: "p".into(),
            to: "q".into(),
        });
        t.add_ribbon(0, Color::Right, ClassExpr::zero(), Some("q"));
        assert!(clauses(&t, &p).contains(&"strip path"));
    }

    #[test]
    fn decorated_strip_is_valid_and_sided() {
        let p = sd_palette();
        let t = decorated_strip();
        assert_eq!(clauses(&t, &p), Vec::<&str>::new());
        let ty = t.ribbon_type();
        assert_eq!((ty.k0, ty.k1), (1, 1));
        assert_eq!(ty.beta, "bh+a1+e".parse().unwrap());
        // Swapping the disc bubble to the L0 side of the strip breaks the side rule.
        let mut bad = t.clone();
        bad.vertices[1].ribbon.reverse();
        assert!(clauses(&bad, &p).contains(&"side"));
    }

    #[test]
    fn balancing_and_order_are_checked() {
        let p = sd_palette();
        let mut t = decorated_strip();
        let d = t
            .vertices
            .iter()
            .position(|v| v.color == Color::Divisor)
            .unwrap();
        t.vertices[d].link = Link::Divisor(2);
        assert!(clauses(&t, &p).contains(&"balancing"));
        t.vertices[d].link = Link::Divisor(-1);
        assert!(clauses(&t, &p).contains(&"order"));
    }

    #[test]
    fn strip_class_must_connect_the_endpoints() {
        let p = sd_palette();
        let t = single_strip("b1");
        assert!(clauses(&t, &p).contains(&"class"));
    }

    #[test]
    fn four_disc_fixture_is_valid() {
        let p = sd_palette();
        let t = four_disc_tree();
        assert_eq!(clauses(&t, &p), Vec::<&str>::new());
        assert_eq!(t.interior().len(), 4);
        assert_eq!(t.ribbon_type().k(), 4);
        assert_eq!(t.ribbon_type().beta, "h0+2*a0+f+x".parse().unwrap());
    }

    #[test]
    fn canonical_form_ignores_numbering_and_divisor_order() {
        let t = four_disc_tree();
        let n = t.normalized();
        assert_eq!(t.canonical_form(), n.canonical_form());
        let mut swapped = decorated_strip();
        let s = swapped.strip_path()[0];
        swapped.add_divisor(s, Color::Divisor, ClassExpr::atom("e"), 1, 1);
        let mut other = swapped.clone();
        other.vertices[s].divisor.reverse();
        assert_eq!(swapped.canonical_form(), other.canonical_form());
        // Ribbon order is part of the structure.
        let mut flipped = four_disc_tree();
        flipped.vertices[1].ribbon.reverse();
        assert_ne!(flipped.canonical_form(), t.canonical_form());
    }
}
