//! Spectral sequence of a graded complex whose differential splits into
//! pieces of degree `-1 + 2k`, filtered so that the first computed page is
//! the homology of the degree `-1` piece.

use std::cell::RefCell;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{rref_rows, Field, Matrix, Subspace};
use crate::{q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("the total differential does not square to zero")]
    NotAComplex,
    #[error(
        "entry ({row}, {col}) maps degree {from} to degree {to}, not by an odd step of at least -1"
    )]
    BadDegree {
        row: usize,
        col: usize,
        from: i64,
        to: i64,
    },
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Dimension {
        rows: usize,
        cols: usize,
        expected: usize,
    },
}

/// Which subspace of the boundary degree the filtration keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fringe {
    /// `F_ℓ = C_{>ℓ} ⊕ (im ∂₀ ∩ C_ℓ)`; page `p` sits in degree `p + 1`.
    #[default]
    Image,
    /// `F_ℓ = C_{>ℓ} ⊕ (ker ∂₀ ∩ C_ℓ)`; page `p` sits in degree `p`.
    Kernel,
}

impl Fringe {
    fn degree(self, p: i64) -> i64 {
        match self {
            Fringe::Image => p + 1,
            Fringe::Kernel => p,
        }
    }
}

/// A graded vector space with `∂̂ = Σ_k ∂_k`, `∂_k` of degree `-1 + 2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex<F> {
    pub labels: Vec<String>,
    pub degrees: Vec<i64>,
    parts: BTreeMap<usize, Matrix<F>>,
}

impl<F: Field> FilteredComplex<F> {
    pub fn new(labels: Vec<String>, degrees: Vec<i64>) -> Self {
        FilteredComplex {
            labels,
            degrees,
            parts: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Splits a total differential into its homogeneous pieces.
    pub fn from_total(
        labels: Vec<String>,
        degrees: Vec<i64>,
        total: &Matrix<F>,
    ) -> Result<Self, SpectralError> {
        let mut c = Self::new(labels, degrees);
        c.check_shape(total)?;
        for (i, j, x) in total.entries() {
            if x.is_zero() {
                continue;
            }
            let k = c.step(i, j)?;
            let n = c.len();
            let part = c.parts.entry(k).or_insert_with(|| Matrix::zeros(n, n));
            part[(i, j)] = x.clone();
        }
        Ok(c)
    }

    fn check_shape(&self, m: &Matrix<F>) -> Result<(), SpectralError> {
        let n = self.len();
        if m.rows() != n || m.cols() != n {
            return Err(SpectralError::Dimension {
                rows: m.rows(),
                cols: m.cols(),
                expected: n,
            });
        }
        Ok(())
    }

    /// The `k` with `deg(row) - deg(col) = -1 + 2k`.
    fn step(&self, row: usize, col: usize) -> Result<usize, SpectralError> {
        let (from, to) = (self.degrees[col], self.degrees[row]);
        let shift = to - from + 1;
        if shift < 0 || shift % 2 != 0 {
            return Err(SpectralError::BadDegree { row, col, from, to });
        }
        Ok((shift / 2) as usize)
    }

    /// Sets `∂_k`; every nonzero entry must have the right degree.
    pub fn set_part(&mut self, k: usize, m: Matrix<F>) -> Result<(), SpectralError> {
        self.check_shape(&m)?;
        for (i, j, x) in m.entries() {
            if !x.is_zero() && self.step(i, j)? != k {
                return Err(SpectralError::BadDegree {
                    row: i,
                    col: j,
                    from: self.degrees[j],
                    to: self.degrees[i],
                });
            }
        }
        self.parts.insert(k, m);
        Ok(())
    }

    pub fn part(&self, k: usize) -> Matrix<F> {
        self.parts
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.len(), self.len()))
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &Matrix<F>)> {
        self.parts.iter().map(|(k, m)| (*k, m))
    }

    pub fn total(&self) -> Matrix<F> {
        self.parts
            .values()
            .fold(Matrix::zeros(self.len(), self.len()), |acc, m| acc.add(m))
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        let d = self.total();
        if d.mul(&d).is_zero() {
            Ok(())
        } else {
            Err(SpectralError::NotAComplex)
        }
    }

    fn degree_range(&self) -> (i64, i64) {
        let lo = self.degrees.iter().copied().min().unwrap_or(0);
        let hi = self.degrees.iter().copied().max().unwrap_or(0);
        (lo, hi)
    }

    fn in_degree(&self, d: i64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degrees[i] == d).collect()
    }

    /// `dim H_d(C, ∂₀)` for every degree present.
    pub fn d0_homology(&self) -> BTreeMap<i64, usize> {
        let d0 = self.part(0);
        let all: Vec<usize> = (0..self.len()).collect();
        let rank_out = |d: i64| d0.select(&all, &self.in_degree(d)).rank();
        let (lo, hi) = self.degree_range();
        (lo..=hi)
            .filter(|&d| !self.in_degree(d).is_empty())
            .map(|d| (d, self.in_degree(d).len() - rank_out(d) - rank_out(d + 1)))
            .collect()
    }

    /// `dim H(C, ∂̂)`.
    pub fn total_homology(&self) -> usize {
        self.len() - 2 * self.total().rank()
    }
}

/// The filtration step `F_ℓ`.
pub fn filtration_step<F: Field>(
    fc: &FilteredComplex<F>,
    level: i64,
    fringe: Fringe,
) -> Subspace<F> {
    let n = fc.len();
    let above = Subspace::coordinate(n, (0..n).filter(|&i| fc.degrees[i] > level));
    let here = Subspace::coordinate(n, fc.in_degree(level));
    let d0 = fc.part(0);
    let fringe_space = match fringe {
        Fringe::Image => Subspace::full(n).image(&d0).intersect(&here),
        Fringe::Kernel => here.preimage_within(&d0, &Subspace::zero(n)),
    };
    above.sum(&fringe_space)
}

/// `F_ℓ` for every `ℓ` from the last step equal to `C` to the first equal
/// to zero.
pub fn build_filtration<F: Field>(
    fc: &FilteredComplex<F>,
    fringe: Fringe,
) -> Result<Vec<(i64, Subspace<F>)>, SpectralError> {
    fc.validate()?;
    let (lo, hi) = fc.degree_range();
    Ok((lo - 1..=hi + 1)
        .map(|l| (l, filtration_step(fc, l, fringe)))
        .collect())
}

/// Triangular basis built one vector at a time: each vector vanishes at the
/// pivots of the vectors before it.
struct Echelon<F> {
    rows: Vec<(usize, Vec<F>)>,
}

impl<F> Default for Echelon<F> {
    fn default() -> Self {
        Echelon { rows: Vec::new() }
    }
}

impl<F: Field> Echelon<F> {
    /// Adds `v` unless it is already in the span; reports whether it was added.
    fn insert(&mut self, v: &[F]) -> bool {
        let mut r = v.to_vec();
        for (p, b) in &self.rows {
            if r[*p].is_zero() {
                continue;
            }
            let f = r[*p].clone();
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = F::one() / r[p].clone();
        r.iter_mut().for_each(|x| *x = x.clone() * inv.clone());
        self.rows.push((p, r));
        true
    }
}

/// `Z/D` with a chosen complement basis and a coordinate map for it.
struct Quotient<F> {
    complement: Vec<Vec<F>>,
    rows: Vec<usize>,
    inverse: Matrix<F>,
    kept: usize,
}

impl<F: Field> Quotient<F> {
    fn new(z: &Subspace<F>, d: &Subspace<F>) -> Self {
        let n = z.ambient();
        let mut grown = Echelon::default();
        for v in d.basis() {
            grown.insert(v);
        }
        let complement: Vec<Vec<F>> = z
            .basis()
            .iter()
            .filter(|v| grown.insert(v))
            .cloned()
            .collect();
        let columns: Vec<Vec<F>> = d.basis().iter().chain(&complement).cloned().collect();
        let kept = d.dim();
        let (_, rows) = rref_rows(columns.clone(), n);
        let square = Matrix::from_fn(columns.len(), columns.len(), |i, j| {
            columns[j][rows[i]].clone()
        });
        let inverse = square
            .inverse()
            .expect("independent columns restrict to an invertible square");
        Quotient {
            complement,
            rows,
            inverse,
            kept,
        }
    }

    fn dim(&self) -> usize {
        self.complement.len()
    }

    /// Coordinates of `v` (which must lie in `Z`) along the complement.
    fn coords(&self, v: &[F]) -> Vec<F> {
        let restricted: Vec<F> = self.rows.iter().map(|&r| v[r].clone()).collect();
        self.inverse.apply(&restricted).split_off(self.kept)
    }
}

/// One page: graded dimensions and the differentials `d_r: E^p → E^{p+s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Page<F> {
    /// Page number, so that the first page is 2.
    pub r: usize,
    /// Dimension by degree (not by filtration index).
    pub dims: BTreeMap<i64, usize>,
    /// `(p, d_r on E^p)`, only for nonempty source and target.
    pub differentials: Vec<(i64, Matrix<F>)>,
}

impl<F> Page<F> {
    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }
}

struct Sequence<'a, F> {
    fc: &'a FilteredComplex<F>,
    fringe: Fringe,
    d: Matrix<F>,
    steps: BTreeMap<i64, Subspace<F>>,
    cycles: RefCell<BTreeMap<(i64, i64), Subspace<F>>>,
    boundaries: RefCell<BTreeMap<(i64, i64), Subspace<F>>>,
    lo: i64,
    hi: i64,
}

impl<'a, F: Field> Sequence<'a, F> {
    fn new(fc: &'a FilteredComplex<F>, fringe: Fringe) -> Result<Self, SpectralError> {
        let steps = build_filtration(fc, fringe)?
            .into_iter()
            .collect::<BTreeMap<_, _>>();
        let (lo, hi) = fc.degree_range();
        Ok(Sequence {
            fc,
            fringe,
            d: fc.total(),
            steps,
            cycles: RefCell::default(),
            boundaries: RefCell::default(),
            lo: lo - 1,
            hi: hi + 1,
        })
    }

    fn step(&self, l: i64) -> Subspace<F> {
        let n = self.fc.len();
        if l < self.lo {
            Subspace::full(n)
        } else if l > self.hi {
            Subspace::zero(n)
        } else {
            self.steps[&l].clone()
        }
    }

    /// `Z_s^p = {x ∈ F_p : ∂̂x ∈ F_{p+s}}`.
    fn cycles(&self, s: i64, p: i64) -> Subspace<F> {
        // Steps outside the range are all of `C` or zero.
        let key = self.key(s, p);
        if let Some(z) = self.cycles.borrow().get(&key) {
            return z.clone();
        }
        let z = self.step(key.0).preimage_within(&self.d, &self.step(key.1));
        self.cycles.borrow_mut().insert(key, z.clone());
        z
    }

    fn key(&self, s: i64, p: i64) -> (i64, i64) {
        (
            p.clamp(self.lo - 1, self.hi + 1),
            (p + s).clamp(self.lo - 1, self.hi + 1),
        )
    }

    /// `∂̂ Z_s^p`.
    fn boundaries(&self, s: i64, p: i64) -> Subspace<F> {
        let key = self.key(s, p);
        if let Some(b) = self.boundaries.borrow().get(&key) {
            return b.clone();
        }
        let b = self.cycles(s, p).image(&self.d);
        self.boundaries.borrow_mut().insert(key, b.clone());
        b
    }

    /// `E_s^p = Z_s^p / (Z_{s-1}^{p+1} + ∂̂ Z_{s-1}^{p-s+1})`, for `s ≥ 1`.
    fn quotient(&self, s: i64, p: i64) -> Quotient<F> {
        let z = self.cycles(s, p);
        let boundaries = self.boundaries(s - 1, p - s + 1);
        let denominator = self.cycles(s - 1, p + 1).sum(&boundaries);
        Quotient::new(&z, &denominator)
    }

    /// Page `s` in the usual count, reported as `r = s + 1`.
    fn page(&self, s: i64) -> Page<F> {
        let quotients: BTreeMap<i64, Quotient<F>> = (self.lo..=self.hi)
            .map(|p| (p, self.quotient(s, p)))
            .collect();
        let dims = quotients
            .iter()
            .filter(|(_, e)| e.dim() > 0)
            .map(|(&p, e)| (self.fringe.degree(p), e.dim()))
            .collect();
        let mut differentials = Vec::new();
        for (&p, source) in &quotients {
            let Some(target) = quotients.get(&(p + s)) else {
                continue;
            };
            if source.dim() == 0 || target.dim() == 0 {
                continue;
            }
            let columns: Vec<Vec<F>> = source
                .complement
                .iter()
                .map(|w| target.coords(&self.d.apply(w)))
                .collect();
            differentials.push((
                p,
                Matrix::from_fn(target.dim(), source.dim(), |i, j| columns[j][i].clone()),
            ));
        }
        Page {
            r: s as usize + 1,
            dims,
            differentials,
        }
    }

    /// From this page on every differential leaves the filtration range.
    fn last_step(&self) -> i64 {
        self.hi - self.lo + 1
    }
}

/// Pages `2..=r_max`, or up to the page after which nothing changes when
/// `r_max` is `None`.
pub fn pages<F: Field>(
    fc: &FilteredComplex<F>,
    r_max: Option<usize>,
    fringe: Fringe,
) -> Result<Vec<Page<F>>, SpectralError> {
    let seq = Sequence::new(fc, fringe)?;
    let last = r_max.map_or(seq.last_step(), |r| r as i64 - 1);
    Ok((1..=last).map(|s| seq.page(s)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub e2: BTreeMap<i64, usize>,
    pub e_infinity: BTreeMap<i64, usize>,
    /// First page equal to every later one.
    pub stable_page: usize,
    /// `dim H(C, ∂₀)` by degree, computed directly.
    pub d0_homology: BTreeMap<i64, usize>,
    /// Associated graded of `H(C, ∂̂)` for the filtration, by degree.
    pub graded_homology: BTreeMap<i64, usize>,
    pub total_homology: usize,
    /// Every `d_r` squares to zero and `E_{r+1} = H(E_r, d_r)` in dimension.
    pub pages_consistent: bool,
}

impl ConvergenceReport {
    pub fn e2_matches(&self) -> bool {
        self.e2 == self.d0_homology
    }

    pub fn limit_matches(&self) -> bool {
        self.e_infinity == self.graded_homology
            && self.e_infinity.values().sum::<usize>() == self.total_homology
    }

    pub fn passed(&self) -> bool {
        self.e2_matches() && self.limit_matches() && self.pages_consistent
    }
}

fn nonzero(dims: BTreeMap<i64, usize>) -> BTreeMap<i64, usize> {
    dims.into_iter().filter(|&(_, v)| v > 0).collect()
}

/// `dim F_p H / F_{p+1} H` where `F_p H` is the image of `H(F_p)`.
fn graded_homology<F: Field>(seq: &Sequence<F>) -> BTreeMap<i64, usize> {
    let n = seq.fc.len();
    let boundaries = Subspace::full(n).image(&seq.d);
    let cycles = Subspace::full(n).preimage_within(&seq.d, &Subspace::zero(n));
    let filtered =
        |p: i64| cycles.intersect(&seq.step(p)).sum(&boundaries).dim() - boundaries.dim();
    nonzero(
        (seq.lo..=seq.hi)
            .map(|p| (seq.fringe.degree(p), filtered(p) - filtered(p + 1)))
            .collect(),
    )
}

fn pages_consistent<F: Field>(pages: &[Page<F>], fringe: Fringe) -> bool {
    let back = |d: i64| match fringe {
        Fringe::Image => d - 1,
        Fringe::Kernel => d,
    };
    pages.windows(2).all(|w| {
        let (page, next) = (&w[0], &w[1]);
        let s = page.r as i64 - 1;
        let maps: BTreeMap<i64, &Matrix<F>> =
            page.differentials.iter().map(|(p, m)| (*p, m)).collect();
        let squares_vanish = maps.iter().all(|(p, m)| {
            maps.get(&(p + s))
                .is_none_or(|next| next.mul(m).is_zero())
        });
        let homology = page.dims.iter().map(|(&deg, &dim)| {
            let p = back(deg);
            let out = maps.get(&p).map_or(0, |m| m.rank());
            let into = maps.get(&(p - s)).map_or(0, |m| m.rank());
            (deg, dim - out - into)
        });
        squares_vanish && nonzero(homology.collect()) == next.dims
    })
}

/// Computes every page and compares both ends with direct homology.
pub fn converge_check<F: Field>(
    fc: &FilteredComplex<F>,
    fringe: Fringe,
) -> Result<ConvergenceReport, SpectralError> {
    let seq = Sequence::new(fc, fringe)?;
    let all: Vec<Page<F>> = (1..=seq.last_step()).map(|s| seq.page(s)).collect();
    let last = all.last().expect("at least one page");
    let stable_page = all
        .iter()
        .rev()
        .take_while(|p| p.dims == last.dims)
        .last()
        .map_or(2, |p| p.r);
    let d0_homology = nonzero(fc.d0_homology());
    Ok(ConvergenceReport {
        e2: all[0].dims.clone(),
        e_infinity: last.dims.clone(),
        stable_page,
        d0_homology,
        graded_homology: graded_homology(&seq),
        total_homology: fc.total_homology(),
        pages_consistent: pages_consistent(&all, fringe),
    })
}

/// Critical points graded by Morse index, with the Morse differential as
/// `∂₀` and corrections `(k, ∂_k)` for `k ≥ 1`.
pub fn morse_model(
    critical_points: &[(&str, i64)],
    morse: Matrix<Q>,
    corrections: Vec<(usize, Matrix<Q>)>,
) -> Result<FilteredComplex<Q>, SpectralError> {
    let mut fc = FilteredComplex::new(
        critical_points.iter().map(|(l, _)| l.to_string()).collect(),
        critical_points.iter().map(|(_, d)| *d).collect(),
    );
    fc.set_part(0, morse)?;
    for (k, m) in corrections {
        fc.set_part(k, m)?;
    }
    fc.validate()?;
    Ok(fc)
}

/// A random complex on `n` generators with degrees in `0..=max_degree`:
/// cancelling pairs `x ↦ y` plus free cycles, then conjugated by random
/// elementary changes of basis that respect the degree steps.
pub fn random_complex(n: usize, max_degree: i64, rng: &mut impl Rng) -> FilteredComplex<Q> {
    let mut degrees = vec![0i64; n];
    let mut d = Matrix::<Q>::zeros(n, n);
    let pairs = rng.gen_range(0..=n / 2);
    for i in 0..pairs {
        let (x, y) = (2 * i, 2 * i + 1);
        loop {
            let from = rng.gen_range(0..=max_degree);
            let k = *[0i64, 0, 1, 1, 2].choose(rng).expect("nonempty");
            let to = from - 1 + 2 * k;
            if (0..=max_degree).contains(&to) {
                degrees[x] = from;
                degrees[y] = to;
                break;
            }
        }
        d[(y, x)] = q(1);
    }
    for deg in degrees.iter_mut().skip(2 * pairs) {
        *deg = rng.gen_range(0..=max_degree);
    }
    // e_j ↦ e_j + c·e_i needs deg i - deg j even and non-negative.
    for _ in 0..3 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let gap = degrees[i] - degrees[j];
        if i == j || gap < 0 || gap % 2 != 0 {
            continue;
        }
        let c = q(*[-1i64, 1, 2].choose(rng).expect("nonempty"));
        for col in 0..n {
            let v = d[(i, col)].clone() + c.clone() * d[(j, col)].clone();
            d[(i, col)] = v;
        }
        for row in 0..n {
            let v = d[(row, j)].clone() - c.clone() * d[(row, i)].clone();
            d[(row, j)] = v;
        }
    }
    let labels = (0..n).map(|i| format!("g{i}")).collect();
    FilteredComplex::from_total(labels, degrees, &d).expect("conjugation keeps the degree steps")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dims(pairs: &[(i64, usize)]) -> BTreeMap<i64, usize> {
        pairs.iter().copied().collect()
    }

    fn two_generator() -> FilteredComplex<Q> {
        let mut fc = FilteredComplex::new(vec!["x".into(), "y".into()], vec![0, 1]);
        let mut d1 = Matrix::zeros(2, 2);
        d1[(1, 0)] = q(1);
        fc.set_part(1, d1).unwrap();
        fc
    }

    fn closed_under_total(fc: &FilteredComplex<Q>, fringe: Fringe) -> bool {
        let d = fc.total();
        build_filtration(fc, fringe)
            .unwrap()
            .iter()
            .all(|(_, f)| f.contains_space(&f.image(&d)))
    }

    #[test]
    fn zero_differential_in_one_degree() {
        let fc: FilteredComplex<Q> = FilteredComplex::new(vec!["a".into(), "b".into()], vec![0, 0]);
        let f: BTreeMap<i64, Subspace<Q>> = build_filtration(&fc, Fringe::Image)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(f[&0].dim(), 0);
        assert_eq!(f[&-1].dim(), 2);
        let r = converge_check(&fc, Fringe::Image).unwrap();
        assert_eq!((r.e2.clone(), r.stable_page), (dims(&[(0, 2)]), 2));
        assert!(r.passed());
    }

    #[test]
    fn two_generators_cancel_late() {
        let fc = two_generator();
        assert!(closed_under_total(&fc, Fringe::Image));
        let r = converge_check(&fc, Fringe::Image).unwrap();
        assert_eq!(r.e2, dims(&[(0, 1), (1, 1)]));
        assert!(r.e_infinity.is_empty());
        assert!(r.stable_page > 2);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn degenerate_when_only_the_first_piece_is_nonzero() {
        let mut fc = FilteredComplex::new((0..3).map(|i| i.to_string()).collect(), vec![1, 0, 0]);
        let mut d0 = Matrix::zeros(3, 3);
        d0[(1, 0)] = q(2);
        fc.set_part(0, d0).unwrap();
        let r = converge_check(&fc, Fringe::Image).unwrap();
        assert_eq!(r.e2, r.e_infinity);
        assert_eq!(r.e2, dims(&[(0, 1)]));
        assert_eq!(r.stable_page, 2);
    }

    #[test]
    fn wrong_degrees_and_non_complexes_are_refused() {
        let mut fc: FilteredComplex<Q> =
            FilteredComplex::new(vec!["x".into(), "y".into()], vec![0, 0]);
        let mut m = Matrix::zeros(2, 2);
        m[(1, 0)] = q(1);
        assert!(matches!(
            fc.set_part(0, m.clone()),
            Err(SpectralError::BadDegree { .. })
        ));
        let mut fc = FilteredComplex::new(vec!["x".into(), "y".into(), "z".into()], vec![2, 1, 0]);
        let mut d0 = Matrix::zeros(3, 3);
        d0[(1, 0)] = q(1);
        d0[(2, 1)] = q(1);
        fc.set_part(0, d0).unwrap();
        assert_eq!(
            build_filtration(&fc, Fringe::Image).unwrap_err(),
            SpectralError::NotAComplex
        );
    }

    #[test]
    fn morse_circle() {
        let fc = morse_model(&[("min", 0), ("max", 1)], Matrix::zeros(2, 2), vec![]).unwrap();
        let r = converge_check(&fc, Fringe::Image).unwrap();
        assert_eq!(r.e2, dims(&[(0, 1), (1, 1)]));
        assert_eq!(r.e_infinity, r.e2);
    }

    #[test]
    fn correction_pairing_index_zero_and_one() {
        // Sphere-like data plus an extra cancelling pair joined by ∂₁.
        let points = [("min", 0), ("max", 2), ("a", 0), ("b", 1)];
        let mut d1 = Matrix::zeros(4, 4);
        d1[(3, 2)] = q(1);
        let fc = morse_model(&points, Matrix::zeros(4, 4), vec![(1, d1)]).unwrap();
        let r = converge_check(&fc, Fringe::Image).unwrap();
        assert_eq!(r.e2.values().sum::<usize>(), 4);
        assert_eq!(r.e_infinity.values().sum::<usize>(), 2);
        assert!(r.passed());
    }

    #[test]
    fn torus_with_corrections() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points = [("m", 0), ("s1", 1), ("s2", 1), ("M", 2)];
        for _ in 0..20 {
            // ∂₁ from index 0 to index 1, ∂₁ from index 1 to index 2; ∂̂² = ∂₁² must vanish.
            let mut d1 = Matrix::zeros(4, 4);
            let (a, b) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            d1[(1, 0)] = q(a);
            d1[(2, 0)] = q(b);
            let (c, e) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            // (c, e)·(a, b) = 0 keeps the square zero.
            let (c, e) = if c * a + e * b == 0 { (c, e) } else { (b, -a) };
            d1[(3, 1)] = q(c);
            d1[(3, 2)] = q(e);
            let fc = morse_model(&points, Matrix::zeros(4, 4), vec![(1, d1)]).unwrap();
            let r = converge_check(&fc, Fringe::Image).unwrap();
            assert_eq!(r.e2, dims(&[(0, 1), (1, 2), (2, 1)]));
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn random_complexes_are_closed_and_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let fc = random_complex(16, 4, &mut rng);
            assert!(closed_under_total(&fc, Fringe::Image));
            assert!(closed_under_total(&fc, Fringe::Kernel));
            let a = converge_check(&fc, Fringe::Image).unwrap();
            assert!(a.passed(), "{a:?}");
            let b = converge_check(&fc, Fringe::Kernel).unwrap();
            assert!(b.passed(), "{b:?}");
            assert_eq!(a.e2, b.e2);
            assert_eq!(a.total_homology, b.e_infinity.values().sum::<usize>());
        }
    }

    #[test]
    fn pages_shrink() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let fc = random_complex(20, 3, &mut rng);
        let ps = pages(&fc, None, Fringe::Image).unwrap();
        assert_eq!(ps[0].r, 2);
        assert!(ps.windows(2).all(|w| w[1].total() <= w[0].total()));
        assert_eq!(pages(&fc, Some(3), Fringe::Image).unwrap().len(), 2);
    }
}
