//! Decorated rooted trees: multiplicity-weighted trees of divisor sphere
//! classes with a level structure, plus quasi orders, canonical forms,
//! automorphisms and bounded enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::palette::{pairings, ClassExpr, Palette, PaletteError, Space};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error(transparent)]
    Palette(#[from] PaletteError),
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("relation is not a quasi order: {0}")]
    NotQuasiOrder(String),
    #[error("quasi order is not finer than the base order at ({0}, {1})")]
    NotFiner(usize, usize),
    #[error("quasi order is not total: {0} and {1} are incomparable")]
    NotTotal(usize, usize),
    #[error("level {level} out of range (tree has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("search space of {estimate} candidates exceeds the cap {cap}")]
    BoundsTooLoose { estimate: u128, cap: u128 },
    #[error("class {0} is not a nonnegative combination of divisor atoms")]
    NonEffectiveClass(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Outside,
    Inside { alpha: ClassExpr, level: usize },
}

impl Node {
    pub fn is_inside(&self) -> bool {
        matches!(self, Node::Inside { .. })
    }

    pub fn level(&self) -> Option<usize> {
        match self {
            Node::Inside { level, .. } => Some(*level),
            Node::Outside => None,
        }
    }

    pub fn alpha(&self) -> Option<&ClassExpr> {
        match self {
            Node::Inside { alpha, .. } => Some(alpha),
            Node::Outside => None,
        }
    }
}

/// Edge oriented away from the root: `source` is the root-side endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub m: i64,
}

/// `(α; m₀, m₁, …, m_ℓ)` with `m₀ = −m(root edge)` and `mᵢ` the multiplicity
/// of the edge to the i-th outside vertex, so that `α·D = Σ mᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TreeType {
    pub alpha: ClassExpr,
    pub m: Vec<i64>,
}

impl TreeType {
    pub fn new(alpha: ClassExpr, m: Vec<i64>) -> Self {
        TreeType { alpha, m }
    }

    pub fn input_multiplicity(&self) -> i64 {
        -self.m[0]
    }

    pub fn outputs(&self) -> &[i64] {
        &self.m[1..]
    }

    /// The degree identity `α·D = Σ mᵢ`.
    pub fn degree_identity_holds(&self, palette: &Palette) -> Result<bool, PaletteError> {
        Ok(pairings(&self.alpha, palette)?.pair_d == self.m.iter().sum::<i64>())
    }
}

impl fmt::Display for TreeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms: Vec<String> = self.m.iter().map(i64::to_string).collect();
        write!(f, "({}; {})", self.alpha, ms.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecoratedTree {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Outside vertices in label order; `outside[0]` is the root.
    pub outside: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeViolation {
    pub clause: &'static str,
    pub vertex: Option<usize>,
    pub detail: String,
}

impl TreeViolation {
    fn new(clause: &'static str, vertex: Option<usize>, detail: String) -> Self {
        TreeViolation {
            clause,
            vertex,
            detail,
        }
    }
}

impl DecoratedTree {
    pub fn root(&self) -> usize {
        self.outside[0]
    }

    pub fn inside(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| self.nodes[v].is_inside())
            .collect()
    }

    pub fn num_levels(&self) -> usize {
        self.nodes.iter().filter_map(Node::level).max().unwrap_or(0)
    }

    pub fn alpha(&self, v: usize) -> &ClassExpr {
        self.nodes[v].alpha().expect("inside vertex")
    }

    pub fn level(&self, v: usize) -> usize {
        self.nodes[v].level().expect("inside vertex")
    }

    /// Edge whose target is `v` (the first edge of an inside vertex).
    pub fn parent_edge(&self, v: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.target == v)
    }

    pub fn child_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.source == v)
    }

    pub fn valency(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.source == v || e.target == v)
            .count()
    }

    pub fn total_class(&self) -> ClassExpr {
        self.inside()
            .into_iter()
            .map(|v| self.alpha(v).clone())
            .sum()
    }

    pub fn tree_type(&self) -> TreeType {
        let root_m = self.child_edges(self.root()).next().map_or(0, |e| e.m);
        let mut m = vec![-root_m];
        for &o in &self.outside[1..] {
            m.push(self.parent_edge(o).map_or(0, |e| e.m));
        }
        TreeType {
            alpha: self.total_class(),
            m,
        }
    }

    /// The single-vertex tree of the given type with level 1.
    pub fn minimal(ty: &TreeType) -> Self {
        let ell = ty.m.len() - 1;
        let mut nodes = vec![
            Node::Outside,
            Node::Inside {
                alpha: ty.alpha.clone(),
                level: 1,
            },
        ];
        let mut edges = vec![Edge {
            source: 0,
            target: 1,
            m: -ty.m[0],
        }];
        let mut outside = vec![0];
        for i in 1..=ell {
            nodes.push(Node::Outside);
            edges.push(Edge {
                source: 1,
                target: i + 1,
                m: ty.m[i],
            });
            outside.push(i + 1);
        }
        DecoratedTree {
            nodes,
            edges,
            outside,
        }
    }

    /// Structural checks: a tree, rooted at an outside vertex, edges oriented away from the root.
    pub fn check_shape(&self) -> Result<(), TreeError> {
        let n = self.nodes.len();
        let bad = |s: String| Err(TreeError::Malformed(s));
        if self.outside.is_empty() {
            return bad("no root".into());
        }
        let outs: BTreeSet<usize> = self.outside.iter().copied().collect();
        let declared: BTreeSet<usize> = (0..n).filter(|&v| !self.nodes[v].is_inside()).collect();
        if outs != declared || outs.len() != self.outside.len() {
            return bad("outside order must list every outside vertex exactly once".into());
        }
        if self.edges.len() + 1 != n {
            return bad(format!("{} vertices but {} edges", n, self.edges.len()));
        }
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            if e.source >= n || e.target >= n {
                return bad("edge endpoint out of range".into());
            }
            indeg[e.target] += 1;
        }
        if indeg[self.root()] != 0 || (0..n).any(|v| v != self.root() && indeg[v] != 1) {
            return bad("edges are not oriented away from the root".into());
        }
        // Reachability from the root rules out cycles given the edge count.
        let mut seen = vec![false; n];
        let mut stack = vec![self.root()];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                return bad("cycle".into());
            }
            stack.extend(self.child_edges(v).map(|e| e.target));
        }
        if seen.iter().any(|s| !s) {
            return bad("disconnected".into());
        }
        Ok(())
    }

    /// Lists every violated clause of the decorated-tree definition.
    pub fn validate(&self, palette: &Palette) -> Vec<TreeViolation> {
        let mut out = Vec::new();
        if let Err(e) = self.check_shape() {
            out.push(TreeViolation::new("shape", None, e.to_string()));
            return out;
        }
        for &o in &self.outside {
            if self.valency(o) != 1 {
                out.push(TreeViolation::new(
                    "valency",
                    Some(o),
                    "outside vertex must have valency one".into(),
                ));
            }
        }
        for e in &self.edges {
            if e.m == 0 {
                out.push(TreeViolation::new(
                    "multiplicity",
                    Some(e.target),
                    "edge multiplicity is zero".into(),
                ));
            }
        }
        let levels: BTreeSet<usize> = self.inside().iter().map(|&v| self.level(v)).collect();
        let k = levels.len();
        if levels.iter().copied().ne(1..=k) {
            out.push(TreeViolation::new(
                "levels",
                None,
                format!("levels {levels:?} are not 1..|λ|"),
            ));
        }
        for v in self.inside() {
            let alpha = self.alpha(v);
            match alpha.spaces(palette) {
                Ok(spaces) if spaces.iter().any(|s| *s != Space::D) => {
                    out.push(TreeViolation::new(
                        "class",
                        Some(v),
                        format!("class {alpha} is not a divisor class"),
                    ))
                }
                Err(e) => {
                    out.push(TreeViolation::new("class", Some(v), e.to_string()));
                    continue;
                }
                _ => {}
            }
            let p = match pairings(alpha, palette) {
                Ok(p) => p,
                Err(e) => {
                    out.push(TreeViolation::new("class", Some(v), e.to_string()));
                    continue;
                }
            };
            let incoming = self.parent_edge(v).map_or(0, |e| e.m);
            let outgoing: i64 = self.child_edges(v).map(|e| e.m).sum();
            if incoming + p.pair_d != outgoing {
                out.push(TreeViolation::new(
                    "balancing",
                    Some(v),
                    format!("{incoming} + {} != {outgoing}", p.pair_d),
                ));
            }
            if self.valency(v) < 3 && !p.area.is_positive() {
                out.push(TreeViolation::new(
                    "stability",
                    Some(v),
                    "fewer than 3 edges and zero area".into(),
                ));
            }
        }
        for e in &self.edges {
            if !(self.nodes[e.source].is_inside() && self.nodes[e.target].is_inside()) {
                continue;
            }
            let (ls, lt) = (self.level(e.source), self.level(e.target));
            if (e.m > 0 && ls >= lt) || (e.m < 0 && ls <= lt) {
                out.push(TreeViolation::new(
                    "order",
                    Some(e.target),
                    format!(
                        "edge {}->{} with m = {} joins levels {ls} and {lt}",
                        e.source, e.target, e.m
                    ),
                ));
            }
        }
        out
    }

    /// Strict relations of the base order `≤₀` on inside vertices, as
    /// pairs of positions in [`DecoratedTree::inside`].
    pub fn base_relations(&self) -> Vec<(usize, usize)> {
        let inside = self.inside();
        let pos: BTreeMap<usize, usize> = inside.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        self.edges
            .iter()
            .filter_map(|e| {
                let (&s, &t) = (pos.get(&e.source)?, pos.get(&e.target)?);
                Some(if e.m > 0 { (s, t) } else { (t, s) })
            })
            .collect()
    }

    pub fn base_quasi_order(&self) -> QuasiOrder {
        QuasiOrder::generated_by(self.inside().len(), &self.base_relations())
    }

    pub fn levels(&self) -> Vec<usize> {
        self.inside().iter().map(|&v| self.level(v)).collect()
    }

    /// Same tree with the levels of the inside vertices replaced.
    pub fn with_levels(&self, levels: &[usize]) -> Self {
        let mut t = self.clone();
        for (&v, &l) in self.inside().iter().zip(levels) {
            if let Node::Inside { level, .. } = &mut t.nodes[v] {
                *level = l;
            }
        }
        t
    }

    /// Renumbers vertices: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut nodes = vec![Node::Outside; self.nodes.len()];
        for (v, node) in self.nodes.iter().enumerate() {
            nodes[perm[v]] = node.clone();
        }
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                source: perm[e.source],
                target: perm[e.target],
                m: e.m,
            })
            .collect();
        edges.sort_by_key(|e| (e.source, e.target));
        DecoratedTree {
            nodes,
            edges,
            outside: self.outside.iter().map(|&o| perm[o]).collect(),
        }
    }

    fn encode(&self, v: usize) -> String {
        match &self.nodes[v] {
            Node::Outside => {
                let idx = self
                    .outside
                    .iter()
                    .position(|&o| o == v)
                    .unwrap_or(usize::MAX);
                let kids = self
                    .child_edges(v)
                    .map(|e| format!("{}>{}", e.m, self.encode(e.target)))
                    .collect::<Vec<_>>();
                format!("O{idx}{{{}}}", kids.join(","))
            }
            Node::Inside { alpha, level } => {
                let mut kids: Vec<String> = self
                    .child_edges(v)
                    .map(|e| format!("{}>{}", e.m, self.encode(e.target)))
                    .collect();
                kids.sort();
                format!("I[{alpha}|{level}]{{{}}}", kids.join(","))
            }
        }
    }

    /// Isomorphism-invariant encoding (root-preserving, decoration-preserving,
    /// outside-label-preserving).
    pub fn canonical_form(&self) -> String {
        self.encode(self.root())
    }

    /// Vertex bijection `a ↦ b` between two subtrees with equal encodings.
    fn match_subtrees(&self, a: usize, b: usize, map: &mut [usize]) {
        map[a] = b;
        let sorted = |v: usize| {
            let mut kids: Vec<(String, usize)> = self
                .child_edges(v)
                .map(|e| (format!("{}>{}", e.m, self.encode(e.target)), e.target))
                .collect();
            kids.sort();
            kids
        };
        for ((_, x), (_, y)) in sorted(a).into_iter().zip(sorted(b)) {
            self.match_subtrees(x, y, map);
        }
    }

    /// Automorphisms fixing every outside vertex: the group order, and
    /// generating permutations of the vertex set.
    pub fn automorphisms(&self) -> Automorphisms {
        let n = self.nodes.len();
        let mut gens = Vec::new();
        let order = self.aut_at(self.root(), &mut gens, n);
        Automorphisms {
            order,
            generators: gens,
        }
    }

    fn aut_at(&self, v: usize, gens: &mut Vec<Vec<usize>>, n: usize) -> u128 {
        let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for e in self.child_edges(v) {
            groups
                .entry(format!("{}>{}", e.m, self.encode(e.target)))
                .or_default()
                .push(e.target);
        }
        let mut order: u128 = 1;
        for members in groups.values() {
            let sub = self.aut_at(members[0], gens, n);
            let k = members.len() as u128;
            order *= (1..=k).product::<u128>() * sub.pow(k as u32);
            for w in members.windows(2) {
                let mut to = (0..n).collect::<Vec<_>>();
                let mut back = (0..n).collect::<Vec<_>>();
                self.match_subtrees(w[0], w[1], &mut to);
                self.match_subtrees(w[1], w[0], &mut back);
                let mut perm: Vec<usize> = (0..n).collect();
                for x in 0..n {
                    if to[x] != x {
                        perm[x] = to[x];
                    }
                    if back[x] != x {
                        perm[x] = back[x];
                    }
                }
                gens.push(perm);
            }
        }
        order
    }

    /// Contracts the edges selected by `merge`; merged vertices get the summed
    /// class and the level chosen by `level_of` from the component's old levels.
    pub(crate) fn contract(
        &self,
        merge: impl Fn(&Edge) -> bool,
        level_of: impl Fn(usize) -> usize,
    ) -> Self {
        let n = self.nodes.len();
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(rep: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while rep[r] != r {
                r = rep[r];
            }
            rep[x] = r;
            r
        }
        for e in self.edges.iter().filter(|e| merge(e)) {
            let (a, b) = (find(&mut rep, e.source), find(&mut rep, e.target));
            rep[b.max(a)] = a.min(b);
        }
        let roots: Vec<usize> = (0..n).filter(|&v| find(&mut rep, v) == v).collect();
        let new_index: BTreeMap<usize, usize> =
            roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut nodes: Vec<Node> = roots
            .iter()
            .map(|&r| match &self.nodes[r] {
                Node::Outside => Node::Outside,
                Node::Inside { .. } => Node::Inside {
                    alpha: ClassExpr::zero(),
                    level: 0,
                },
            })
            .collect();
        for v in 0..n {
            let r = new_index[&find(&mut rep, v)];
            if let (Node::Inside { alpha: a, level: l }, Node::Inside { alpha, level }) =
                (&mut nodes[r], &self.nodes[v])
            {
                *a += alpha;
                *l = (*l).max(level_of(*level));
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| !merge(e))
            .map(|e| Edge {
                source: new_index[&find(&mut rep, e.source)],
                target: new_index[&find(&mut rep, e.target)],
                m: e.m,
            })
            .collect();
        let outside = self
            .outside
            .iter()
            .map(|&o| new_index[&find(&mut rep, o)])
            .collect();
        DecoratedTree {
            nodes,
            edges,
            outside,
        }
    }

    /// The `(i, i+1)` level shrinking, `1 <= i < |λ|`.
    pub fn shrink_levels(&self, i: usize) -> Result<Self, TreeError> {
        let levels = self.num_levels();
        if i == 0 || i + 1 > levels {
            return Err(TreeError::LevelOutOfRange { level: i, levels });
        }
        let joins = |e: &Edge| {
            let (a, b) = (self.nodes[e.source].level(), self.nodes[e.target].level());
            matches!((a, b), (Some(x), Some(y)) if x.min(y) == i && x.max(y) == i + 1)
        };
        Ok(self.contract(joins, |l| {
            if l <= i {
                l
            } else if l == i + 1 {
                i
            } else {
                l - 1
            }
        }))
    }

    /// Every tree reachable by one level shrinking.
    pub fn shrink_moves(&self) -> Vec<Self> {
        (1..self.num_levels())
            .filter_map(|i| self.shrink_levels(i).ok())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Automorphisms {
    pub order: u128,
    pub generators: Vec<Vec<usize>>,
}

/// A reflexive, transitive relation on `{0..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuasiOrder {
    n: usize,
    rel: Vec<Vec<bool>>,
}

impl QuasiOrder {
    pub fn new(rel: Vec<Vec<bool>>) -> Result<Self, TreeError> {
        let n = rel.len();
        if rel.iter().any(|r| r.len() != n) {
            return Err(TreeError::NotQuasiOrder(
                "relation matrix is not square".into(),
            ));
        }
        for a in 0..n {
            if !rel[a][a] {
                return Err(TreeError::NotQuasiOrder(format!(
                    "{a} is not related to itself"
                )));
            }
            for b in 0..n {
                for c in 0..n {
                    if rel[a][b] && rel[b][c] && !rel[a][c] {
                        return Err(TreeError::NotQuasiOrder(format!(
                            "{a} <= {b} <= {c} but not {a} <= {c}"
                        )));
                    }
                }
            }
        }
        Ok(QuasiOrder { n, rel })
    }

    /// Reflexive-transitive closure of the given pairs.
    pub fn generated_by(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut rel = vec![vec![false; n]; n];
        for (a, row) in rel.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in pairs {
            rel[a][b] = true;
        }
        for k in 0..n {
            for a in 0..n {
                if rel[a][k] {
                    for b in 0..n {
                        if rel[k][b] {
                            rel[a][b] = true;
                        }
                    }
                }
            }
        }
        QuasiOrder { n, rel }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.rel[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.rel[a][b] && !self.rel[b][a]
    }

    pub fn incomparable_pair(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| (a + 1..self.n).map(move |b| (a, b)))
            .find(|&(a, b)| !self.rel[a][b] && !self.rel[b][a])
    }

    pub fn is_total(&self) -> bool {
        self.incomparable_pair().is_none()
    }

    /// First strict relation of `base` that `self` does not keep strict.
    pub fn finer_violation(&self, base: &QuasiOrder) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| (0..self.n).map(move |b| (a, b)))
            .find(|&(a, b)| base.lt(a, b) && !self.lt(a, b))
    }

    pub fn is_finer_than(&self, base: &QuasiOrder) -> bool {
        self.finer_violation(base).is_none()
    }

    pub fn from_levels(levels: &[usize]) -> Self {
        let n = levels.len();
        QuasiOrder {
            n,
            rel: (0..n)
                .map(|a| (0..n).map(|b| levels[a] <= levels[b]).collect())
                .collect(),
        }
    }

    /// Level function of a total quasi order finer than `base`: the rank of each
    /// element's equivalence class.
    pub fn to_levels(&self, base: &QuasiOrder) -> Result<Vec<usize>, TreeError> {
        if let Some((a, b)) = self.incomparable_pair() {
            return Err(TreeError::NotTotal(a, b));
        }
        if let Some((a, b)) = self.finer_violation(base) {
            return Err(TreeError::NotFiner(a, b));
        }
        // In a total quasi order, the number of classes strictly below `a` is its level minus one.
        let below = |a: usize| -> BTreeSet<usize> {
            (0..self.n)
                .filter(|&b| self.lt(b, a))
                .map(|b| {
                    (0..self.n)
                        .find(|&c| self.leq(c, b) && self.leq(b, c))
                        .unwrap()
                })
                .collect()
        };
        Ok((0..self.n).map(|a| below(a).len() + 1).collect())
    }
}

/// Level functions `λ : {0..n} → {1..k}` (surjective) with `λ(a) < λ(b)` for
/// every `(a, b)` in `strict` and `λ(a) = λ(b)` for every pair in `equal`,
/// `k <= max_levels`. Returned in lexicographic order.
pub fn level_functions(
    n: usize,
    strict: &[(usize, usize)],
    equal: &[(usize, usize)],
    max_levels: usize,
) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    // Collapse forced ties into classes first.
    let mut class: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for &(a, b) in equal {
            let m = class[a].min(class[b]);
            let old = class[a].max(class[b]);
            if class[a] != class[b] {
                class.iter_mut().filter(|c| **c == old).for_each(|c| *c = m);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let ids: Vec<usize> = class
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |c: usize| ids.iter().position(|&x| x == c).unwrap();
    let k = ids.len();
    let mut preds = vec![0u64; k];
    for &(a, b) in strict {
        let (ca, cb) = (idx(class[a]), idx(class[b]));
        if ca == cb {
            return Vec::new();
        }
        preds[cb] |= 1 << ca;
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    fn rec(
        remaining: u64,
        level: usize,
        max: usize,
        preds: &[u64],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        if level > max {
            return;
        }
        let avail: Vec<usize> = (0..preds.len())
            .filter(|&c| remaining >> c & 1 == 1 && preds[c] & remaining == 0)
            .collect();
        for mask in 1u64..(1 << avail.len()) {
            let mut chosen = 0u64;
            for (i, &c) in avail.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    chosen |= 1 << c;
                    cur[c] = level;
                }
            }
            rec(remaining & !chosen, level + 1, max, preds, cur, out);
        }
    }
    rec((1u64 << k) - 1, 1, max_levels, &preds, &mut cur, &mut out);
    let mut res: Vec<Vec<usize>> = out
        .into_iter()
        .map(|lv| (0..n).map(|a| lv[idx(class[a])]).collect())
        .collect();
    res.sort();
    res
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumBounds {
    pub max_inside: usize,
    pub max_levels: usize,
    /// When set, only these atom ids may appear in vertex classes.
    pub atom_whitelist: Option<Vec<String>>,
    /// Upper bound on raw candidates examined before giving up.
    pub cap: u128,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds {
            max_inside: 4,
            max_levels: 4,
            atom_whitelist: None,
            cap: 5_000_000,
        }
    }
}

/// Splits a multiset of `total` copies into `parts` ordered parts.
fn compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Rooted shapes on `k` inside vertices: `parent[i] < i`, vertex 0 attached to the root.
fn shapes(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![usize::MAX]];
    for i in 1..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..i).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    out
}

/// All decorated trees of the given type within bounds, up to isomorphism,
/// sorted by canonical form.
pub fn enumerate(
    ty: &TreeType,
    palette: &Palette,
    bounds: &EnumBounds,
) -> Result<Vec<DecoratedTree>, TreeError> {
    if ty.m.is_empty() || ty.m.contains(&0) {
        return Ok(Vec::new());
    }
    let atoms: Vec<(String, i64)> = ty
        .alpha
        .terms()
        .map(|(id, c)| (id.to_string(), c))
        .collect();
    for (id, c) in &atoms {
        let atom = palette.get(id)?;
        if *c < 0 || atom.space != Space::D {
            return Err(TreeError::NonEffectiveClass(ty.alpha.to_string()));
        }
    }
    if let Some(wl) = &bounds.atom_whitelist {
        if atoms.iter().any(|(id, _)| !wl.contains(id)) {
            return Ok(Vec::new());
        }
    }
    if !ty.degree_identity_holds(palette)? {
        return Ok(Vec::new());
    }
    let ell = ty.m.len() - 1;
    let mut estimate: u128 = 0;
    for k in 1..=bounds.max_inside {
        let shapes = (1..k).product::<usize>().max(1) as u128;
        let outs = (k as u128).pow(ell as u32);
        let dist: u128 = atoms
            .iter()
            .map(|(_, c)| binom(*c as u128 + k as u128 - 1, k as u128 - 1))
            .product();
        estimate = estimate.saturating_add(shapes.saturating_mul(outs).saturating_mul(dist));
    }
    if estimate > bounds.cap {
        return Err(TreeError::BoundsTooLoose {
            estimate,
            cap: bounds.cap,
        });
    }
    let pair =
        |alpha: &ClassExpr| pairings(alpha, palette).map(|p| (p.pair_d, p.area.is_positive()));
    let mut found: BTreeMap<String, DecoratedTree> = BTreeMap::new();
    for k in 1..=bounds.max_inside {
        // Per-vertex classes: product over atoms of compositions into k parts.
        let mut classes: Vec<Vec<ClassExpr>> = vec![vec![ClassExpr::zero(); k]];
        for (id, c) in &atoms {
            let comps = compositions(*c, k);
            classes = classes
                .into_iter()
                .flat_map(|cl| {
                    comps.iter().map(move |comp| {
                        let mut cl = cl.clone();
                        for (slot, &x) in cl.iter_mut().zip(comp) {
                            slot.add_term(id, x);
                        }
                        cl
                    })
                })
                .collect();
        }
        let attachments: Vec<Vec<usize>> = (0..(k as u64).pow(ell as u32))
            .map(|mut code| {
                (0..ell)
                    .map(|_| {
                        let d = (code % k as u64) as usize;
                        code /= k as u64;
                        d
                    })
                    .collect()
            })
            .collect();
        for parent in shapes(k) {
            for attach in &attachments {
                for cl in &classes {
                    let data: Vec<(i64, bool)> = cl.iter().map(&pair).collect::<Result<_, _>>()?;
                    // Multiplicities of first edges, forced bottom-up by balancing.
                    let mut first = vec![0i64; k];
                    let mut val = vec![1usize; k];
                    for (i, &a) in attach.iter().enumerate() {
                        first[a] += ty.m[i + 1];
                        val[a] += 1;
                    }
                    let mut ok = true;
                    for v in (0..k).rev() {
                        let m = first[v] - data[v].0;
                        if m == 0 {
                            ok = false;
                            break;
                        }
                        first[v] = m;
                        if v > 0 {
                            first[parent[v]] += m;
                            val[parent[v]] += 1;
                        }
                    }
                    if !ok || first[0] != -ty.m[0] {
                        continue;
                    }
                    if (0..k).any(|v| val[v] < 3 && !data[v].1) {
                        continue;
                    }
                    // Node layout: 0 = root, 1..=k inside, then outputs.
                    let mut strict = Vec::new();
                    for v in 1..k {
                        let m = first[v];
                        strict.push(if m > 0 {
                            (parent[v], v)
                        } else {
                            (v, parent[v])
                        });
                    }
                    for lv in level_functions(k, &strict, &[], bounds.max_levels) {
                        let mut nodes = vec![Node::Outside];
                        nodes.extend((0..k).map(|v| Node::Inside {
                            alpha: cl[v].clone(),
                            level: lv[v],
                        }));
                        let mut edges = vec![Edge {
                            source: 0,
                            target: 1,
                            m: first[0],
                        }];
                        edges.extend((1..k).map(|v| Edge {
                            source: parent[v] + 1,
                            target: v + 1,
                            m: first[v],
                        }));
                        let mut outside = vec![0];
                        for (i, &a) in attach.iter().enumerate() {
                            nodes.push(Node::Outside);
                            edges.push(Edge {
                                source: a + 1,
                                target: k + 1 + i,
                                m: ty.m[i + 1],
                            });
                            outside.push(k + 1 + i);
                        }
                        let t = DecoratedTree {
                            nodes,
                            edges,
                            outside,
                        };
                        found.entry(t.canonical_form()).or_insert(t);
                    }
                }
            }
        }
    }
    Ok(found.into_values().collect())
}

fn binom(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Whether the area of a class is positive.
pub fn has_area(alpha: &ClassExpr, palette: &Palette) -> Result<bool, PaletteError> {
    Ok(pairings(alpha, palette)?.area.is_positive())
}

/// Sample data shared by the unit tests, the self-test and the acceptance suite.
pub mod fixtures {
    use super::*;
    use crate::palette::ClassAtom;
    use crate::q;

    /// Divisor atoms with degrees −3, −2, −1, +2 and positive area.
    pub fn chain_palette() -> Palette {
        Palette::new([
            ClassAtom::new("A3", Space::D, -3, 0, None, q(1)),
            ClassAtom::new("A2", Space::D, -2, 0, None, q(1)),
            ClassAtom::new("A1", Space::D, -1, 0, None, q(1)),
            ClassAtom::new("P2", Space::D, 2, 1, None, q(1)),
            ClassAtom::new("Z", Space::D, 0, 0, None, q(1)),
        ])
    }

    /// Five inside vertices over four levels, input multiplicity 3, one output of multiplicity −1.
    pub fn five_vertex_tree() -> DecoratedTree {
        let inside = |a: &str, l| Node::Inside {
            alpha: a.parse().unwrap(),
            level: l,
        };
        DecoratedTree {
            nodes: vec![
                Node::Outside,
                inside("0", 1),
                inside("A3", 2),
                inside("A2", 3),
                inside("A1", 4),
                inside("P2", 1),
                Node::Outside,
            ],
            edges: vec![
                Edge {
                    source: 0,
                    target: 1,
                    m: 3,
                },
                Edge {
                    source: 1,
                    target: 6,
                    m: -1,
                },
                Edge {
                    source: 1,
                    target: 2,
                    m: 4,
                },
                Edge {
                    source: 2,
                    target: 3,
                    m: 3,
                },
                Edge {
                    source: 3,
                    target: 4,
                    m: 1,
                },
                Edge {
                    source: 2,
                    target: 5,
                    m: -2,
                },
            ],
            outside: vec![0, 6],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    /// Every reflexive, transitive, total relation on `n` points finer than `base`.
    fn brute_force_total_orders(n: usize, base: &QuasiOrder) -> usize {
        (0u32..1 << (n * n))
            .filter(|bits| {
                let rel: Vec<Vec<bool>> = (0..n)
                    .map(|a| (0..n).map(|b| bits >> (a * n + b) & 1 == 1).collect())
                    .collect();
                matches!(QuasiOrder::new(rel), Ok(qo) if qo.is_total() && qo.is_finer_than(base))
            })
            .count()
    }

    #[test]
    fn level_counts_match_brute_force() {
        for n in 1..=3 {
            let antichain = QuasiOrder::generated_by(n, &[]);
            let chain_pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
            let chain = QuasiOrder::generated_by(n, &chain_pairs);
            assert_eq!(
                level_functions(n, &[], &[], n).len(),
                brute_force_total_orders(n, &antichain)
            );
            assert_eq!(
                level_functions(n, &chain_pairs, &[], n).len(),
                brute_force_total_orders(n, &chain)
            );
            assert_eq!(level_functions(n, &chain_pairs, &[], n).len(), 1);
        }
        assert_eq!(level_functions(2, &[], &[], 2).len(), 3);
        assert_eq!(level_functions(3, &[], &[], 3).len(), 13);
    }

    #[test]
    fn five_vertex_fixture_is_valid() {
        let t = five_vertex_tree();
        assert_eq!(t.validate(&chain_palette()), vec![]);
        let ty = t.tree_type();
        assert_eq!(ty.m, vec![-3, -1]);
        assert!(ty.degree_identity_holds(&chain_palette()).unwrap());
    }

    #[test]
    fn balancing_violation_detected() {
        let p = chain_palette();
        let t = DecoratedTree::minimal(&TreeType::new("Z".parse().unwrap(), vec![1, -1]));
        assert!(t.validate(&p).is_empty());
        let bad = DecoratedTree::minimal(&TreeType::new("P2".parse().unwrap(), vec![1, -1]));
        assert!(bad.validate(&p).iter().any(|v| v.clause == "balancing"));
    }

    #[test]
    fn base_order_follows_edge_signs() {
        let t = five_vertex_tree();
        let qo = t.base_quasi_order();
        // inside positions: 0 = v1, 1 = v2, 2 = v3, 3 = v4, 4 = v5
        assert!(qo.lt(0, 1) && qo.lt(1, 2) && qo.lt(0, 3));
        assert!(qo.lt(4, 1));
        assert!(!qo.leq(4, 0) && !qo.leq(0, 4));
        let lv = t.levels();
        assert_eq!(QuasiOrder::from_levels(&lv).to_levels(&qo).unwrap(), lv);
    }

    #[test]
    fn quasi_order_errors() {
        let base = QuasiOrder::generated_by(2, &[(0, 1)]);
        assert_eq!(
            QuasiOrder::from_levels(&[1, 1]).to_levels(&base),
            Err(TreeError::NotFiner(0, 1))
        );
        assert_eq!(
            QuasiOrder::generated_by(2, &[]).to_levels(&base),
            Err(TreeError::NotTotal(0, 1))
        );
    }

    #[test]
    fn three_level_shrink() {
        let t = five_vertex_tree();
        let s = t.shrink_levels(3).unwrap();
        assert_eq!(s.num_levels(), 3);
        assert_eq!(s.inside().len(), 4);
        assert!(s.validate(&chain_palette()).is_empty());
        assert_eq!(s.tree_type(), t.tree_type());
        assert!(s
            .inside()
            .iter()
            .any(|&v| s.alpha(v).to_string() == "A1+A2" && s.level(v) == 3));
        assert_eq!(
            t.shrink_levels(4),
            Err(TreeError::LevelOutOfRange {
                level: 4,
                levels: 4
            })
        );
    }

    #[test]
    fn enumeration_finds_fixture() {
        let p = chain_palette();
        let t = five_vertex_tree();
        let bounds = EnumBounds {
            max_inside: 5,
            max_levels: 5,
            ..Default::default()
        };
        let all = enumerate(&t.tree_type(), &p, &bounds).unwrap();
        assert!(all.iter().any(|x| x.canonical_form() == t.canonical_form()));
        assert!(all.iter().all(|x| x.validate(&p).is_empty()));
        let tight = EnumBounds { cap: 10, ..bounds };
        assert!(matches!(
            enumerate(&t.tree_type(), &p, &tight),
            Err(TreeError::BoundsTooLoose { .. })
        ));
    }

    #[test]
    fn minimal_tree_enumeration() {
        let p = chain_palette();
        let b = EnumBounds {
            max_inside: 1,
            ..Default::default()
        };
        let ty = TreeType::new("Z".parse().unwrap(), vec![1, -1]);
        let got = enumerate(&ty, &p, &b).unwrap();
        assert_eq!(got, vec![DecoratedTree::minimal(&ty)]);
        let ty = TreeType::new("Z".parse().unwrap(), vec![2, -1]);
        assert!(enumerate(&ty, &p, &b).unwrap().is_empty());
    }

    fn brute_isomorphic(a: &DecoratedTree, b: &DecoratedTree) -> bool {
        if a.nodes.len() != b.nodes.len() || a.outside.len() != b.outside.len() {
            return false;
        }
        let ia = a.inside();
        let ib = b.inside();
        if ia.len() != ib.len() {
            return false;
        }
        permutations(ia.len()).into_iter().any(|p| {
            let mut map = vec![usize::MAX; a.nodes.len()];
            for (&x, &y) in a.outside.iter().zip(&b.outside) {
                map[x] = y;
            }
            for (i, &v) in ia.iter().enumerate() {
                map[v] = ib[p[i]];
            }
            ia.iter().all(|&v| a.nodes[v] == b.nodes[map[v]])
                && a.edges.iter().all(|e| {
                    b.edges.contains(&Edge {
                        source: map[e.source],
                        target: map[e.target],
                        m: e.m,
                    })
                })
        })
    }

    pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        permutations(n - 1)
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    q
                })
            })
            .collect()
    }

    fn brute_aut_order(t: &DecoratedTree) -> usize {
        let ins = t.inside();
        permutations(ins.len())
            .into_iter()
            .filter(|p| {
                let mut map: Vec<usize> = (0..t.nodes.len()).collect();
                for (i, &v) in ins.iter().enumerate() {
                    map[v] = ins[p[i]];
                }
                ins.iter().all(|&v| t.nodes[v] == t.nodes[map[v]])
                    && t.edges.iter().all(|e| {
                        t.edges.contains(&Edge {
                            source: map[e.source],
                            target: map[e.target],
                            m: e.m,
                        })
                    })
            })
            .count()
    }

    fn star(copies: usize) -> DecoratedTree {
        // Root → hub (class Z, level 1) → `copies` identical leaves (class A1, level 2, m = 1).
        let mut nodes = vec![
            Node::Outside,
            Node::Inside {
                alpha: "Z".parse().unwrap(),
                level: 1,
            },
        ];
        let mut edges = vec![Edge {
            source: 0,
            target: 1,
            m: copies as i64,
        }];
        for i in 0..copies {
            nodes.push(Node::Inside {
                alpha: "A1".parse().unwrap(),
                level: 2,
            });
            edges.push(Edge {
                source: 1,
                target: 2 + i,
                m: 1,
            });
        }
        DecoratedTree {
            nodes,
            edges,
            outside: vec![0],
        }
    }

    #[test]
    fn automorphism_orders() {
        assert_eq!(five_vertex_tree().automorphisms().order, 1);
        for k in 2..=3 {
            let t = star(k);
            assert!(t.validate(&chain_palette()).is_empty());
            let aut = t.automorphisms();
            assert_eq!(aut.order as usize, brute_aut_order(&t));
            for g in &aut.generators {
                assert_eq!(t.relabel(g).canonical_form(), t.canonical_form());
                assert_eq!(
                    t.relabel(g).edges.iter().collect::<BTreeSet<_>>().len(),
                    t.edges.len()
                );
            }
        }
        assert_eq!(star(2).automorphisms().order, 2);
        assert_eq!(star(3).automorphisms().order, 6);
    }

    #[test]
    fn canonical_form_matches_brute_force_on_enumerated_pairs() {
        let p = chain_palette();
        let ty = five_vertex_tree().tree_type();
        let all = enumerate(
            &ty,
            &p,
            &EnumBounds {
                max_inside: 4,
                max_levels: 4,
                ..Default::default()
            },
        )
        .unwrap();
        let sample: Vec<&DecoratedTree> = all.iter().step_by((all.len() / 25).max(1)).collect();
        for a in &sample {
            for b in &sample {
                assert_eq!(
                    a.canonical_form() == b.canonical_form(),
                    brute_isomorphic(a, b)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn canonical_form_ignores_relabeling(seed in 0u64..1000) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let t = five_vertex_tree();
            let mut perm: Vec<usize> = (0..t.nodes.len()).collect();
            perm.shuffle(&mut rng);
            let r = t.relabel(&perm);
            prop_assert_eq!(r.canonical_form(), t.canonical_form());
            prop_assert!(brute_isomorphic(&t, &r));
        }

        #[test]
        fn level_roundtrip(n in 1usize..5, seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut strict = Vec::new();
            for i in 1..n {
                if rng.gen_bool(0.5) {
                    strict.push((rng.gen_range(0..i), i));
                }
            }
            let base = QuasiOrder::generated_by(n, &strict);
            for lv in level_functions(n, &strict, &[], n) {
                let qo = QuasiOrder::from_levels(&lv);
                prop_assert!(qo.is_total() && qo.is_finer_than(&base));
                prop_assert_eq!(qo.to_levels(&base).unwrap(), lv);
            }
        }
    }
}
