use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Color, DetailedTree, Link, RibbonKind, Side};
use crate::palette::PaletteError;
use crate::trees::level_functions;
use crate::{ClassExpr, Palette, Space};

/// Bounds for [`enumerate_sd`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdBounds {
    /// Strip plus disc vertices.
    pub max_interior: usize,
    pub max_levels: usize,
    /// Divisor and ambient-sphere vertices, summed over the whole tree.
    pub max_divisor: usize,
    pub max_marks: usize,
    /// Cap on the number of trees produced before giving up.
    pub cap: usize,
}

impl Default for SdBounds {
    fn default() -> Self {
        SdBounds {
            max_interior: 4,
            max_levels: 3,
            max_divisor: 2,
            max_marks: 2,
            cap: 200_000,
        }
    }
}

/// One subtree of the ribbon skeleton hanging off a disc or strip vertex.
#[derive(Debug, Clone)]
enum Slot {
    Mark,
    Disc(Vec<Slot>),
}

fn slot_counts(slots: &[Slot]) -> (usize, usize) {
    slots.iter().fold((0, 0), |(d, k), s| match s {
        Slot::Mark => (d, k + 1),
        Slot::Disc(kids) => {
            let (d2, k2) = slot_counts(kids);
            (d + 1 + d2, k + k2)
        }
    })
}

/// Ordered forests with exactly `discs` disc vertices and `marks` marked points.
fn forests(discs: usize, marks: usize) -> Vec<Vec<Slot>> {
    if discs == 0 && marks == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    // First tree of the forest, then the rest.
    if marks > 0 {
        for rest in forests(discs, marks - 1) {
            let mut f = vec![Slot::Mark];
            f.extend(rest);
            out.push(f);
        }
    }
    for d in 1..=discs {
        for k in 0..=marks {
            for kids in forests(d - 1, k) {
                for rest in forests(discs - d, marks - k) {
                    let mut f = vec![Slot::Disc(kids.clone())];
                    f.extend(rest);
                    out.push(f);
                }
            }
        }
    }
    out
}

/// A divisor node hanging (directly or indirectly) off a level-0 anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
struct DecoNode {
    /// `None` means the anchor.
    parent: Option<usize>,
    color: Color,
    atom: String,
    m: i64,
}

/// Decorations of one anchor: each is a small forest of divisor/sphere nodes
/// with multiplicities forced by balancing, and the total multiplicity it
/// demands from the anchor.
fn decorations(
    palette: &Palette,
    budget: usize,
) -> Result<Vec<(Vec<DecoNode>, i64)>, PaletteError> {
    let d_atoms: Vec<(&str, i64)> = palette
        .atoms_in(&Space::D)
        .map(|a| (a.id.as_str(), a.pair_d))
        .collect();
    let x_atoms: Vec<(&str, i64)> = palette
        .atoms_in(&Space::X)
        .map(|a| (a.id.as_str(), a.pair_d))
        .collect();
    let mut out: BTreeMap<String, (Vec<DecoNode>, i64)> = BTreeMap::new();
    out.insert(String::new(), (Vec::new(), 0));
    for n in 1..=budget {
        // parent[i] is None (anchor) or an earlier index.
        let mut shapes: Vec<Vec<Option<usize>>> = vec![vec![None]];
        for i in 1..n {
            shapes = shapes
                .into_iter()
                .flat_map(|p| {
                    (0..=i).map(move |j| {
                        let mut q = p.clone();
                        q.push(if j == i { None } else { Some(j) });
                        q
                    })
                })
                .collect();
        }
        for shape in shapes {
            let mut partial: Vec<Vec<(Color, &str, i64)>> = vec![Vec::new()];
            for parent in &shape {
                partial = partial
                    .into_iter()
                    .flat_map(|chosen| {
                        let pc = parent.map(|p| chosen[p].0);
                        let options: Vec<(Color, &str, i64)> = match pc {
                            None | Some(Color::Sphere) => d_atoms
                                .iter()
                                .map(|&(a, d)| (Color::Divisor, a, d))
                                .collect(),
                            _ => d_atoms
                                .iter()
                                .map(|&(a, d)| (Color::Divisor, a, d))
                                .chain(x_atoms.iter().map(|&(a, d)| (Color::Sphere, a, d)))
                                .collect(),
                        };
                        options.into_iter().map(move |o| {
                            let mut c = chosen.clone();
                            c.push(o);
                            c
                        })
                    })
                    .collect();
            }
            for chosen in partial {
                let mut m = vec![0i64; n];
                for i in (0..n).rev() {
                    let out_m: i64 = (0..n).filter(|&c| shape[c] == Some(i)).map(|c| m[c]).sum();
                    m[i] = out_m - chosen[i].2;
                }
                let signs_ok = (0..n).all(|i| {
                    let pc = shape[i].map(|p| chosen[p].0);
                    match (pc, chosen[i].0) {
                        (None, _) | (Some(Color::Sphere), _) => m[i] > 0,
                        (Some(Color::Divisor), Color::Sphere) => m[i] < 0,
                        _ => m[i] != 0,
                    }
                });
                if !signs_ok {
                    continue;
                }
                let nodes: Vec<DecoNode> = (0..n)
                    .map(|i| DecoNode {
                        parent: shape[i],
                        color: chosen[i].0,
                        atom: chosen[i].1.to_string(),
                        m: m[i],
                    })
                    .collect();
                let demand = (0..n).filter(|&i| shape[i].is_none()).map(|i| m[i]).sum();
                out.entry(deco_key(&nodes, None)).or_insert((nodes, demand));
            }
        }
    }
    Ok(out.into_values().collect())
}

fn deco_key(nodes: &[DecoNode], at: Option<usize>) -> String {
    let mut kids: Vec<String> = (0..nodes.len())
        .filter(|&i| nodes[i].parent == at)
        .map(|i| {
            format!(
                "{}{}:{}({})",
                nodes[i].color,
                nodes[i].atom,
                nodes[i].m,
                deco_key(nodes, Some(i))
            )
        })
        .collect();
    kids.sort();
    kids.join(",")
}

fn attach(tree: &mut DetailedTree, anchor: usize, nodes: &[DecoNode]) {
    let mut ids = vec![0usize; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        let parent = n.parent.map_or(anchor, |p| ids[p]);
        let level = usize::from(n.color == Color::Divisor);
        ids[i] = tree.add_divisor(parent, n.color, ClassExpr::atom(&n.atom), level, n.m);
    }
}

/// Strip-atom labels reachable from `from` in `steps` strip vertices and ending at `to`.
fn strip_paths(palette: &Palette, from: &str, to: &str, steps: usize) -> Vec<Vec<String>> {
    let edges: BTreeSet<(String, String)> = palette
        .atoms()
        .iter()
        .filter_map(|a| match &a.space {
            Space::Strip { from, to } => Some((from.clone(), to.clone())),
            _ => None,
        })
        .collect();
    let mut paths = vec![vec![from.to_string()]];
    for _ in 0..steps {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                let last = p.last().unwrap().clone();
                edges
                    .iter()
                    .filter(move |(a, _)| *a == last)
                    .map(move |(_, b)| {
                        let mut q = p.clone();
                        q.push(b.clone());
                        q
                    })
            })
            .collect();
    }
    paths.retain(|p| p.last().map(String::as_str) == Some(to));
    paths
}

/// Splits `n` items into `parts` ordered parts.
fn splits(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    (0..=n)
        .flat_map(|first| {
            splits(n - first, parts - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Builds the bare ribbon skeleton for a strip path `from = x0, x1, .., to`
/// and the `(R0, R1)` forests at each strip vertex.
fn skeleton(path: &[String], sides: &[(Vec<Slot>, Vec<Slot>)]) -> DetailedTree {
    let kind = RibbonKind::Strip {
        from: path[0].clone(),
        to: path.last().unwrap().clone(),
    };
    let mut t = DetailedTree::with_root(kind);
    fn grow(t: &mut DetailedTree, at: usize, side: Side, slots: &[Slot]) {
        for s in slots {
            match s {
                Slot::Mark => {
                    t.add_ribbon(at, Color::Marked(side), ClassExpr::zero(), None);
                }
                Slot::Disc(kids) => {
                    let d = t.add_ribbon(at, Color::Disc(side), ClassExpr::zero(), None);
                    grow(t, d, side, kids);
                }
            }
        }
    }
    // Appending R0, then the strip child, then R1 gives the ribbon order at a strip vertex.
    fn strip(
        t: &mut DetailedTree,
        at: usize,
        i: usize,
        path: &[String],
        sides: &[(Vec<Slot>, Vec<Slot>)],
    ) {
        let s = t.add_ribbon(at, Color::Strip, ClassExpr::zero(), Some(&path[i]));
        grow(t, s, Side::L0, &sides[i].0);
        if i + 1 < sides.len() {
            strip(t, s, i + 1, path, sides);
        } else {
            t.add_ribbon(
                s,
                Color::Right,
                ClassExpr::zero(),
                Some(path.last().unwrap()),
            );
        }
        grow(t, s, Side::L1, &sides[i].1);
    }
    strip(&mut t, 0, 0, path, sides);
    t
}

/// Every valid SD ribbon tree from `from` to `to` within the bounds, up to
/// isomorphism, sorted by canonical form. Strip and disc vertices carry a
/// single atom (or zero); divisor vertices a single divisor atom.
pub fn enumerate_sd(
    palette: &Palette,
    from: &str,
    to: &str,
    bounds: &SdBounds,
) -> Result<Vec<DetailedTree>, PaletteError> {
    let decos = decorations(palette, bounds.max_divisor)?;
    let mut found: BTreeMap<String, DetailedTree> = BTreeMap::new();
    for strips in 1..=bounds.max_interior {
        for path in strip_paths(palette, from, to, strips) {
            for discs in 0..=bounds.max_interior - strips {
                for marks in 0..=bounds.max_marks {
                    for dsplit in splits(discs, 2 * strips) {
                        for ksplit in splits(marks, 2 * strips) {
                            let per_slot: Vec<Vec<Vec<Slot>>> = (0..2 * strips)
                                .map(|i| forests(dsplit[i], ksplit[i]))
                                .collect();
                            for choice in
                                cartesian(&per_slot.iter().map(Vec::len).collect::<Vec<_>>())
                            {
                                let sides: Vec<(Vec<Slot>, Vec<Slot>)> = (0..strips)
                                    .map(|s| {
                                        (
                                            per_slot[2 * s][choice[2 * s]].clone(),
                                            per_slot[2 * s + 1][choice[2 * s + 1]].clone(),
                                        )
                                    })
                                    .collect();
                                debug_assert_eq!(
                                    sides
                                        .iter()
                                        .map(|(a, b)| slot_counts(a).0 + slot_counts(b).0)
                                        .sum::<usize>(),
                                    discs
                                );
                                let skel = skeleton(&path, &sides);
                                dress(palette, &skel, &decos, bounds, &mut found)?;
                                if found.len() > bounds.cap {
                                    return Ok(found.into_values().collect());
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(found.into_values().collect())
}

fn cartesian(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

/// Chooses classes and decorations for the interior vertices of a skeleton,
/// then every admissible level function.
fn dress(
    palette: &Palette,
    skel: &DetailedTree,
    decos: &[(Vec<DecoNode>, i64)],
    bounds: &SdBounds,
    found: &mut BTreeMap<String, DetailedTree>,
) -> Result<(), PaletteError> {
    let interior = skel.interior();
    let sides = skel.sides();
    // Candidate (atom, decoration) pairs per interior vertex.
    let mut options: Vec<Vec<(Option<String>, usize)>> = Vec::new();
    for &v in &interior {
        let atoms: Vec<(Option<String>, i64)> = match skel.color(v) {
            Color::Strip => {
                let (a, b) = strip_ends(skel, v);
                palette
                    .atoms_in(&Space::strip(&a, &b))
                    .map(|x| (Some(x.id.clone()), x.pair_d))
                    .collect()
            }
            Color::Disc(_) => {
                let side = sides[&v];
                std::iter::once((None, 0))
                    .chain(
                        palette
                            .atoms_in(&Space::disc(side))
                            .map(|x| (Some(x.id.clone()), x.pair_d)),
                    )
                    .collect()
            }
            _ => unreachable!(),
        };
        let mut opts = Vec::new();
        for (atom, pair) in atoms {
            for (i, (_, demand)) in decos.iter().enumerate() {
                if *demand == pair {
                    opts.push((atom.clone(), i));
                }
            }
        }
        options.push(opts);
    }
    for choice in cartesian(&options.iter().map(Vec::len).collect::<Vec<_>>()) {
        let used: usize = choice
            .iter()
            .enumerate()
            .map(|(i, &c)| decos[options[i][c].1].0.len())
            .sum();
        if used > bounds.max_divisor {
            continue;
        }
        let mut t = skel.clone();
        for (i, &c) in choice.iter().enumerate() {
            let (atom, deco) = &options[i][c];
            let v = interior[i];
            t.vertices[v].alpha = atom
                .as_deref()
                .map_or_else(ClassExpr::zero, ClassExpr::atom);
            attach(&mut t, v, &decos[*deco].0);
        }
        let divisor: Vec<usize> = (0..t.len())
            .filter(|&v| t.color(v) == Color::Divisor)
            .collect();
        let index: BTreeMap<usize, usize> =
            divisor.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut strict = Vec::new();
        for &v in &divisor {
            if let (Some(p), Some(m)) = (t.vertices[v].parent, t.parent_m(v)) {
                if let Some(&pi) = index.get(&p) {
                    strict.push(if m > 0 {
                        (pi, index[&v])
                    } else {
                        (index[&v], pi)
                    });
                }
            }
        }
        for levels in level_functions(divisor.len(), &strict, &[], bounds.max_levels) {
            let mut lt = t.clone();
            for (i, &v) in divisor.iter().enumerate() {
                lt.vertices[v].level = levels[i];
            }
            if lt.is_valid(palette) {
                found
                    .entry(lt.canonical_form())
                    .or_insert_with(|| lt.normalized());
            }
        }
    }
    Ok(())
}

fn strip_ends(t: &DetailedTree, v: usize) -> (String, String) {
    let label = |w: usize| match &t.vertices[w].link {
        Link::Ribbon(Some(p)) => p.clone(),
        _ => String::new(),
    };
    (label(v), t.strip_child(v).map(label).unwrap_or_default())
}

/// Assigns uniformly random levels in `1..=max_levels` to the divisor
/// vertices (which must carry no internal constraints) and compresses them.
fn random_levels<R: Rng>(t: &mut DetailedTree, rng: &mut R, max_levels: usize) {
    let divisor: Vec<usize> = (0..t.len())
        .filter(|&v| t.color(v) == Color::Divisor)
        .collect();
    let raw: Vec<usize> = divisor
        .iter()
        .map(|_| rng.gen_range(1..=max_levels.max(1)))
        .collect();
    let distinct: BTreeSet<usize> = raw.iter().copied().collect();
    for (&v, r) in divisor.iter().zip(raw) {
        t.vertices[v].level = distinct.iter().position(|&x| x == r).unwrap() + 1;
    }
}

/// Hangs `pair` leaves of a divisor atom with degree -1 off `v`.
fn leaves(t: &mut DetailedTree, v: usize, pair: i64, leaf: &str) {
    for _ in 0..pair {
        t.add_divisor(v, Color::Divisor, ClassExpr::atom(leaf), 1, 1);
    }
}

fn leaf_atom(palette: &Palette) -> Option<String> {
    palette
        .atoms_in(&Space::D)
        .find(|a| a.pair_d == -1 && a.area > crate::q(0))
        .map(|a| a.id.clone())
}

/// A random valid disc ribbon tree on `side` with `marks` marked points.
/// Discs carry zero or a single disc atom; atoms of positive degree receive
/// divisor leaves at random levels.
pub fn random_dd<R: Rng>(
    palette: &Palette,
    side: Side,
    discs: usize,
    marks: usize,
    rng: &mut R,
) -> DetailedTree {
    let atoms: Vec<(String, i64)> = palette
        .atoms_in(&Space::disc(side))
        .filter(|a| a.pair_d >= 0)
        .map(|a| (a.id.clone(), a.pair_d))
        .collect();
    let leaf = leaf_atom(palette);
    loop {
        let mut t = DetailedTree::with_root(RibbonKind::Disc(side));
        let mut interior = Vec::new();
        for i in 0..discs.max(1) {
            let parent = if i == 0 {
                0
            } else {
                *interior.choose(rng).unwrap()
            };
            let pos = rng.gen_range(0..=t.vertices[parent].ribbon.len());
            let d = t.add_ribbon(parent, Color::Disc(side), ClassExpr::zero(), None);
            let last = t.vertices[parent].ribbon.pop().unwrap();
            t.vertices[parent].ribbon.insert(pos, last);
            interior.push(d);
        }
        for _ in 0..marks {
            let parent = *interior.choose(rng).unwrap();
            let pos = rng.gen_range(0..=t.vertices[parent].ribbon.len());
            t.add_ribbon(parent, Color::Marked(side), ClassExpr::zero(), None);
            let last = t.vertices[parent].ribbon.pop().unwrap();
            t.vertices[parent].ribbon.insert(pos, last);
        }
        for &d in &interior {
            if rng.gen_bool(0.6) {
                if let Some((id, pair)) = atoms.choose(rng) {
                    t.vertices[d].alpha = ClassExpr::atom(id);
                    match &leaf {
                        Some(l) => leaves(&mut t, d, *pair, l),
                        None if *pair != 0 => t.vertices[d].alpha = ClassExpr::zero(),
                        None => {}
                    }
                }
            }
        }
        random_levels(&mut t, rng, 3);
        if t.is_valid(palette) {
            return t.normalized();
        }
    }
}

/// A random valid SD ribbon tree from `from` to `to` with one or two strip
/// vertices, a few disc bubbles and marks, and divisor leaves at random levels.
/// Returns `None` when the palette has no suitable strip atoms.
pub fn random_sd<R: Rng>(
    palette: &Palette,
    from: &str,
    to: &str,
    max_levels: usize,
    rng: &mut R,
) -> Option<DetailedTree> {
    let leaf = leaf_atom(palette);
    let usable = |pair: i64| pair == 0 || (pair > 0 && leaf.is_some());
    let strip_atoms = |a: &str, b: &str| -> Vec<(String, i64)> {
        palette
            .atoms_in(&Space::strip(a, b))
            .filter(|x| usable(x.pair_d))
            .map(|x| (x.id.clone(), x.pair_d))
            .collect()
    };
    let mut paths: Vec<Vec<String>> = strip_paths(palette, from, to, 1);
    paths.extend(strip_paths(palette, from, to, 2));
    paths.retain(|p| p.windows(2).all(|w| !strip_atoms(&w[0], &w[1]).is_empty()));
    if paths.is_empty() {
        return None;
    }
    for _ in 0..1000 {
        let path = paths.choose(rng).unwrap().clone();
        let sides: Vec<(Vec<Slot>, Vec<Slot>)> = (1..path.len())
            .map(|_| {
                let mut pick = || {
                    let mut f = Vec::new();
                    for _ in 0..rng.gen_range(0..=1) {
                        f.push(if rng.gen_bool(0.5) {
                            Slot::Mark
                        } else {
                            Slot::Disc(vec![Slot::Mark])
                        });
                    }
                    f
                };
                (pick(), pick())
            })
            .collect();
        let mut t = skeleton(&path, &sides);
        let tsides = t.sides();
        for v in t.interior() {
            let choices: Vec<(String, i64)> = match t.color(v) {
                Color::Strip => {
                    let (a, b) = strip_ends(&t, v);
                    strip_atoms(&a, &b)
                }
                Color::Disc(_) => palette
                    .atoms_in(&Space::disc(tsides[&v]))
                    .filter(|x| usable(x.pair_d))
                    .map(|x| (x.id.clone(), x.pair_d))
                    .collect(),
                _ => unreachable!(),
            };
            if let Some((id, pair)) = choices.choose(rng) {
                t.vertices[v].alpha = ClassExpr::atom(id);
                if let Some(l) = &leaf {
                    leaves(&mut t, v, *pair, l);
                }
            }
        }
        random_levels(&mut t, rng, max_levels);
        if t.is_valid(palette) {
            return Some(t.normalized());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::sd_palette;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forest_counts_match_catalan_style_recursion() {
        // One disc and one mark: [m, d], [d, m], [d(m)].
        assert_eq!(forests(1, 1).len(), 3);
        assert_eq!(forests(0, 3).len(), 1);
        assert_eq!(forests(2, 0).len(), 2);
    }

    #[test]
    fn decorations_are_balanced() {
        let p = sd_palette();
        let decos = decorations(&p, 2).unwrap();
        let demands: BTreeSet<i64> = decos.iter().map(|d| d.1).collect();
        assert!(demands.contains(&0) && demands.contains(&1) && demands.contains(&2));
        assert!(decos.iter().all(|d| d.1 >= 0));
    }

    #[test]
    fn enumeration_is_valid_and_deduplicated() {
        let p = sd_palette();
        let bounds = SdBounds {
            max_interior: 2,
            max_marks: 1,
            max_divisor: 1,
            ..SdBounds::default()
        };
        let all = enumerate_sd(&p, "p", "q", &bounds).unwrap();
        assert!(all.len() > 10);
        let forms: BTreeSet<String> = all.iter().map(DetailedTree::canonical_form).collect();
        assert_eq!(forms.len(), all.len());
        for t in &all {
            assert!(t.is_valid(&p));
            assert!(t.interior().len() <= 2);
        }
        // The two-strip path through r appears.
        assert!(all.iter().any(|t| t.strip_path().len() == 2));
    }

    #[test]
    fn random_generators_produce_valid_trees() {
        let p = sd_palette();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = random_dd(&p, Side::L0, 3, 3, &mut rng);
            assert!(t.is_valid(&p));
            assert_eq!(t.ribbon_type().k(), 3);
            let s = random_sd(&p, "p", "r", 2, &mut rng).unwrap();
            assert!(s.is_valid(&p), "{:?}", s.validate(&p));
        }
    }
}
