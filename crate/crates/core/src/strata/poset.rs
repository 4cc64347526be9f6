use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::shrink;
use super::StrataError;
use crate::divisor_trees::DetailedTree;
use crate::trees::DecoratedTree;

/// An object indexing a stratum, with the one-step shrinking moves out of it.
pub trait Stratum: Sized {
    /// Canonical key; two objects are isomorphic iff their keys agree.
    fn key(&self) -> String;
    /// The type, preserved by every move.
    fn type_key(&self) -> String;
    fn moves(&self) -> Vec<Self>;
}

impl Stratum for DecoratedTree {
    fn key(&self) -> String {
        self.canonical_form()
    }

    fn type_key(&self) -> String {
        self.tree_type().to_string()
    }

    fn moves(&self) -> Vec<Self> {
        self.shrink_moves()
    }
}

impl Stratum for DetailedTree {
    fn key(&self) -> String {
        self.canonical_form()
    }

    fn type_key(&self) -> String {
        self.ribbon_type().to_string()
    }

    fn moves(&self) -> Vec<Self> {
        shrink::moves(self)
    }
}

/// Keys of everything reachable from `s` by finitely many moves, `s` included.
fn reachable<S: Stratum>(s: &S, memo: &mut HashMap<String, BTreeSet<String>>) -> BTreeSet<String> {
    let key = s.key();
    if let Some(r) = memo.get(&key) {
        return r.clone();
    }
    let mut out = BTreeSet::from([key.clone()]);
    for m in s.moves() {
        out.extend(reachable(&m, memo));
    }
    memo.insert(key, out.clone());
    out
}

/// True iff `a` is obtained from `b` by finitely many shrinkings.
pub fn shrink_leq<S: Stratum>(a: &S, b: &S) -> Result<bool, StrataError> {
    if a.type_key() != b.type_key() {
        return Err(StrataError::TypeMismatch);
    }
    Ok(reachable(b, &mut HashMap::new()).contains(&a.key()))
}

/// Every object reachable from the seeds, deduplicated and sorted by key.
pub fn close_under_moves<S: Stratum + Clone>(seeds: &[S]) -> Vec<S> {
    let mut seen: BTreeMap<String, S> = BTreeMap::new();
    let mut stack: Vec<S> = seeds.to_vec();
    while let Some(s) = stack.pop() {
        let key = s.key();
        if seen.contains_key(&key) {
            continue;
        }
        stack.extend(s.moves());
        seen.insert(key, s);
    }
    seen.into_values().collect()
}

/// A finite universe of strata ordered by shrinking.
#[derive(Debug, Clone)]
pub struct Poset {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    /// `shrinks[i]`: universe members reachable from member `i`, itself included.
    shrinks: Vec<BTreeSet<usize>>,
}

impl Poset {
    /// Duplicates (by key) collapse to one element.
    pub fn from_universe<S: Stratum>(universe: &[S]) -> Self {
        let mut keys = Vec::new();
        let mut index = HashMap::new();
        let mut members = Vec::new();
        for s in universe {
            let k = s.key();
            if !index.contains_key(&k) {
                index.insert(k.clone(), keys.len());
                keys.push(k);
                members.push(s);
            }
        }
        let mut memo = HashMap::new();
        let shrinks = members
            .iter()
            .map(|s| {
                reachable(*s, &mut memo)
                    .iter()
                    .filter_map(|k| index.get(k).copied())
                    .collect()
            })
            .collect();
        Poset {
            keys,
            index,
            shrinks,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, i: usize) -> &str {
        &self.keys[i]
    }

    pub fn position(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// `a <= b`: `a` is a shrinking of `b`.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.shrinks[b].contains(&a)
    }

    /// Down-closure in the degeneration order: everything that shrinks onto
    /// some member of `set`. This is the closure of the union of the strata.
    pub fn closure(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        (0..self.len())
            .filter(|&a| !self.shrinks[a].is_disjoint(set))
            .collect()
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.len()).all(|a| self.shrinks[a].iter().all(|&b| b == a || !self.leq(a, b)))
    }
}

/// Closure of the stratum of `b` inside `universe`: `b` and every member that shrinks onto it.
pub fn closure<S: Stratum>(b: &S, universe: &[S]) -> Result<Vec<usize>, StrataError> {
    let ty = b.type_key();
    let key = b.key();
    if universe.iter().any(|a| a.type_key() != ty) {
        return Err(StrataError::TypeMismatch);
    }
    let mut memo = HashMap::new();
    Ok((0..universe.len())
        .filter(|&i| reachable(&universe[i], &mut memo).contains(&key))
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub universe: usize,
    pub pairs: usize,
    pub empty: bool,
    pub extensive: bool,
    pub idempotent: bool,
    pub additive: bool,
}

impl ClosureReport {
    pub fn holds(&self) -> bool {
        self.empty && self.extensive && self.idempotent && self.additive
    }
}

/// Checks the closure axioms on `pairs` random pairs of subsets plus the
/// whole universe.
pub fn closure_axioms(poset: &Poset, pairs: usize, rng: &mut impl Rng) -> ClosureReport {
    let all: BTreeSet<usize> = (0..poset.len()).collect();
    let mut report = ClosureReport {
        universe: poset.len(),
        pairs,
        empty: poset.closure(&BTreeSet::new()).is_empty(),
        extensive: poset.closure(&all) == all,
        idempotent: true,
        additive: true,
    };
    let indices: Vec<usize> = (0..poset.len()).collect();
    let sample = |rng: &mut _| -> BTreeSet<usize> {
        let size = if indices.is_empty() {
            0
        } else {
            Rng::gen_range(rng, 0..=indices.len())
        };
        indices.choose_multiple(rng, size).copied().collect()
    };
    for _ in 0..pairs {
        let a = sample(rng);
        let b = sample(rng);
        let (ca, cb) = (poset.closure(&a), poset.closure(&b));
        report.extensive &= a.is_subset(&ca) && b.is_subset(&cb);
        report.idempotent &= poset.closure(&ca) == ca && poset.closure(&cb) == cb;
        let union: BTreeSet<usize> = a.union(&b).copied().collect();
        report.additive &= poset.closure(&union) == ca.union(&cb).copied().collect();
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor_trees::fixtures::{decorated_strip, sd_palette};
    use crate::divisor_trees::{enumerate_sd, SdBounds};
    use crate::strata::flatten;
    use crate::trees::fixtures::five_vertex_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn universe() -> Vec<DetailedTree> {
        enumerate_sd(
            &sd_palette(),
            "p",
            "q",
            &SdBounds {
                max_interior: 2,
                max_marks: 1,
                ..SdBounds::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn reflexive_and_fully_shrunk_is_below() {
        let t = decorated_strip();
        assert!(shrink_leq(&t, &t).unwrap());
        let top = flatten(&t);
        assert!(shrink_leq(&top, &t).unwrap());
        assert!(!shrink_leq(&t, &top).unwrap());
    }

    #[test]
    fn level_shrink_of_the_five_vertex_tree_is_below_it() {
        let t = five_vertex_tree();
        let last = t.num_levels() - 1;
        let s = t.shrink_levels(last).unwrap();
        assert!(shrink_leq(&s, &t).unwrap());
    }

    #[test]
    fn different_types_do_not_compare() {
        let u = universe();
        let a = u.iter().find(|t| t.ribbon_type().k() == 0).unwrap();
        let b = u.iter().find(|t| t.ribbon_type().k() == 1).unwrap();
        assert_eq!(shrink_leq(a, b), Err(StrataError::TypeMismatch));
    }

    #[test]
    fn closed_universe_is_antisymmetric() {
        let u = close_under_moves(&universe());
        assert_eq!(close_under_moves(&u).len(), u.len());
        assert!(Poset::from_universe(&u).is_antisymmetric());
    }

    #[test]
    fn closure_of_a_top_stratum_contains_its_degenerations() {
        let all = close_under_moves(&universe());
        let t = all.iter().find(|t| t.num_levels() > 0).unwrap();
        let top = flatten(t);
        let u: Vec<DetailedTree> = all
            .iter()
            .filter(|a| a.type_key() == t.type_key())
            .cloned()
            .collect();
        let idx = closure(&top, &u).unwrap();
        assert!(idx.len() >= 2);
        assert!(idx.iter().all(|&i| shrink_leq(&top, &u[i]).unwrap()));
        let poset = Poset::from_universe(&u);
        let b = poset.position(&top.key()).unwrap();
        assert_eq!(poset.closure(&BTreeSet::from([b])).len(), idx.len());
        assert_eq!(closure(&top, &all), Err(StrataError::TypeMismatch));
    }

    #[test]
    fn axioms_hold_on_random_subsets() {
        let poset = Poset::from_universe(&universe());
        let r = closure_axioms(&poset, 20, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn singleton_universe() {
        let poset = Poset::from_universe(&[decorated_strip()]);
        assert!(closure_axioms(&poset, 5, &mut ChaCha8Rng::seed_from_u64(0)).holds());
    }
}
