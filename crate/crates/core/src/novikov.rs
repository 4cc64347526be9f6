//! Novikov-ring scalars `Σ c_i T^{λ_i}`, gapped partial chain complexes and
//! their homology over the valuation ring `Λ₀`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{Field, Matrix};
use crate::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NovikovError {
    #[error("energy cut {cut} exceeds the complex's cut {energy}")]
    CutAboveE { cut: Q, energy: Q },
    #[error("exponent {exponent} is not a multiple of 1/{denominator}")]
    MixedDenominators { exponent: Q, denominator: BigInt },
    #[error("exponent {0} is negative")]
    NegativeExponent(Q),
    #[error("exponent {exponent} exceeds the energy cut {energy}")]
    ExponentAboveCut { exponent: Q, energy: Q },
    #[error("exponent {0} is not in the monoid spanned by the declared generators")]
    NotInMonoid(Q),
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Dimension {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("differential does not square to zero")]
    NotAComplex,
    #[error("map is not invertible over the valuation ring")]
    NotInvertible,
    #[error("map is not a chain map through energy {energy}: entry ({row}, {col}) at exponent {exponent}")]
    NotChainMapModE {
        row: usize,
        col: usize,
        exponent: Q,
        energy: Q,
    },
}

/// `T`-adic valuation; zero has valuation `Infinite`, which sorts last.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(Q),
    Infinite,
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// A finite Novikov sum with coefficients in `F`, kept sorted by exponent
/// with no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Novikov<F> {
    terms: Vec<(Q, F)>,
}

impl<F: Field> Novikov<F> {
    pub fn monomial(coeff: F, exponent: Q) -> Self {
        Self::from_terms([(exponent, coeff)])
    }

    /// Sums like exponents and drops zero coefficients.
    pub fn from_terms(terms: impl IntoIterator<Item = (Q, F)>) -> Self {
        let mut acc: BTreeMap<Q, F> = BTreeMap::new();
        for (e, c) in terms {
            match acc.remove(&e) {
                Some(old) => {
                    acc.insert(e, old + c);
                }
                None => {
                    acc.insert(e, c);
                }
            }
        }
        Novikov {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn terms(&self) -> &[(Q, F)] {
        &self.terms
    }

    pub fn valuation(&self) -> Valuation {
        self.terms
            .first()
            .map_or(Valuation::Infinite, |(e, _)| Valuation::Finite(e.clone()))
    }

    pub fn max_exponent(&self) -> Option<&Q> {
        self.terms.last().map(|(e, _)| e)
    }

    pub fn coefficient(&self, exponent: &Q) -> F {
        self.terms
            .iter()
            .find(|(e, _)| e == exponent)
            .map_or_else(F::zero, |(_, c)| c.clone())
    }

    /// Multiplication by `T^shift`.
    pub fn shifted(&self, shift: &Q) -> Self {
        Novikov {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e + shift, c.clone()))
                .collect(),
        }
    }

    /// Keeps the terms with exponent at most `cut`.
    pub fn cut(&self, cut: &Q) -> Self {
        Novikov {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e <= cut)
                .cloned()
                .collect(),
        }
    }

    /// Keeps the terms with exponent strictly below `precision`.
    pub fn truncated(&self, precision: &Q) -> Self {
        Novikov {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e < precision)
                .cloned()
                .collect(),
        }
    }

    /// Inverse modulo `T^precision` of an element of valuation zero, by long division.
    pub fn inverse_mod(&self, precision: &Q) -> Option<Self> {
        let (e0, c0) = self.terms.first()?;
        if !e0.is_zero() {
            return None;
        }
        let lead_inv = F::one() / c0.clone();
        let mut out = Vec::new();
        let mut rest = Self::one().truncated(precision);
        while let Some((e, c)) = rest.terms.first().cloned() {
            let q = Self::monomial(c * lead_inv.clone(), e);
            rest = (rest - q.clone() * self.clone()).truncated(precision);
            out.extend(q.terms);
        }
        Some(Novikov { terms: out })
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().flat_map(|(a, x)| {
            rhs.terms
                .iter()
                .map(move |(b, y)| (a + b, x.clone() * y.clone()))
        }))
    }
}

impl<F: Field> Zero for Novikov<F> {
    fn zero() -> Self {
        Novikov { terms: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<F: Field> One for Novikov<F> {
    fn one() -> Self {
        Self::monomial(F::one(), Q::zero())
    }
}

impl<F: Field> Add for Novikov<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut a, mut b) = (
            self.terms.into_iter().peekable(),
            rhs.terms.into_iter().peekable(),
        );
        loop {
            let take_a = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some((x, _)), Some((y, _))) if x == y => {
                    let ((e, c), (_, d)) = (a.next().unwrap(), b.next().unwrap());
                    let s = c + d;
                    if !s.is_zero() {
                        out.push((e, s));
                    }
                    continue;
                }
                (Some((x, _)), Some((y, _))) => x < y,
            };
            out.push(if take_a {
                a.next().unwrap()
            } else {
                b.next().unwrap()
            });
        }
        Novikov { terms: out }
    }
}

impl<F: Field> Neg for Novikov<F> {
    type Output = Self;

    fn neg(self) -> Self {
        Novikov {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl<F: Field> Sub for Novikov<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<F: Field> Mul for Novikov<F> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<F: Field + fmt::Display> fmt::Display for Novikov<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}T^{e}")?;
            }
        }
        Ok(())
    }
}

/// Least common denominator of a set of exponents.
pub fn common_denominator<'a>(exponents: impl IntoIterator<Item = &'a Q>) -> BigInt {
    exponents
        .into_iter()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()))
}

fn in_monoid(x: &Q, generators: &[Q]) -> bool {
    if x.is_zero() {
        return true;
    }
    let gens: Vec<&Q> = generators.iter().filter(|g| g.is_positive()).collect();
    let den = common_denominator(gens.iter().copied().chain([x]));
    let scale = |q: &Q| -> usize {
        let n = q * Q::from_integer(den.clone());
        n.to_integer().try_into().unwrap_or(usize::MAX)
    };
    let target = scale(x);
    if target == usize::MAX {
        return false;
    }
    let steps: Vec<usize> = gens.iter().map(|g| scale(g)).collect();
    let mut reach = vec![false; target + 1];
    reach[0] = true;
    for i in 1..=target {
        reach[i] = steps.iter().any(|&s| s <= i && reach[i - s]);
    }
    reach[target]
}

/// One entry of `∂∘∂` below the energy cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Offending {
    pub row: usize,
    pub col: usize,
    pub exponent: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialComplexReport {
    pub ok: bool,
    pub offending: Vec<Offending>,
}

/// A gapped partial chain complex: `∂ = Σ T^λ ∂_λ` over exponents `λ` in the
/// monoid spanned by `monoid`, with `0 <= λ <= energy`.
#[derive(Debug, Clone, PartialEq)]
pub struct GappedComplex<F> {
    pub generators: Vec<String>,
    pub degrees: Vec<i64>,
    pub monoid: Vec<Q>,
    pub energy: Q,
    pub parts: BTreeMap<Q, Matrix<F>>,
}

impl<F: Field> GappedComplex<F> {
    pub fn new(generators: Vec<String>, degrees: Vec<i64>, monoid: Vec<Q>, energy: Q) -> Self {
        GappedComplex {
            generators,
            degrees,
            monoid,
            energy,
            parts: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Adds `coeff·T^exponent` to the `(row, col)` entry of `∂`.
    pub fn add_term(&mut self, exponent: Q, row: usize, col: usize, coeff: F) {
        let n = self.len();
        let part = self
            .parts
            .entry(exponent)
            .or_insert_with(|| Matrix::zeros(n, n));
        part[(row, col)] = part[(row, col)].clone() + coeff;
    }

    /// Builds the complex from a full differential, dropping terms above `energy`.
    pub fn from_differential(
        generators: Vec<String>,
        degrees: Vec<i64>,
        monoid: Vec<Q>,
        energy: Q,
        d: &Matrix<Novikov<F>>,
    ) -> Self {
        let mut c = Self::new(generators, degrees, monoid, energy);
        for (i, j, x) in d.entries() {
            for (e, coeff) in x.terms() {
                if *e <= c.energy {
                    c.add_term(e.clone(), i, j, coeff.clone());
                }
            }
        }
        c.parts.retain(|_, m| !m.is_zero());
        c
    }

    pub fn differential(&self) -> Matrix<Novikov<F>> {
        let n = self.len();
        Matrix::from_fn(n, n, |i, j| {
            Novikov::from_terms(
                self.parts
                    .iter()
                    .map(|(e, m)| (e.clone(), m[(i, j)].clone())),
            )
        })
    }

    pub fn validate(&self) -> Result<(), NovikovError> {
        let n = self.len();
        if self.degrees.len() != n {
            return Err(NovikovError::Dimension {
                rows: self.degrees.len(),
                cols: 1,
                expected: n,
            });
        }
        for (e, m) in &self.parts {
            if m.rows() != n || m.cols() != n {
                return Err(NovikovError::Dimension {
                    rows: m.rows(),
                    cols: m.cols(),
                    expected: n,
                });
            }
            if e.is_negative() {
                return Err(NovikovError::NegativeExponent(e.clone()));
            }
            if *e > self.energy {
                return Err(NovikovError::ExponentAboveCut {
                    exponent: e.clone(),
                    energy: self.energy.clone(),
                });
            }
            if !in_monoid(e, &self.monoid) {
                return Err(NovikovError::NotInMonoid(e.clone()));
            }
        }
        Ok(())
    }

    /// `∂∘∂ ≡ 0 mod T^E`: every term of `∂²` below the energy cut must vanish.
    pub fn check_partial_complex(&self) -> PartialComplexReport {
        let d = self.differential();
        let sq = d.mul(&d);
        let mut offending = Vec::new();
        for (row, col, x) in sq.entries() {
            for (e, _) in x.terms().iter().take_while(|(e, _)| *e < self.energy) {
                offending.push(Offending {
                    row,
                    col,
                    exponent: e.clone(),
                });
            }
        }
        PartialComplexReport {
            ok: offending.is_empty(),
            offending,
        }
    }

    /// Removes every term with exponent above `cut`.
    pub fn energy_cut(&self, cut: &Q) -> Result<Self, NovikovError> {
        if *cut > self.energy {
            return Err(NovikovError::CutAboveE {
                cut: cut.clone(),
                energy: self.energy.clone(),
            });
        }
        let mut out = self.clone();
        out.energy = cut.clone();
        out.parts.retain(|e, _| e <= cut);
        Ok(out)
    }
}

/// Valuations of the nonzero invariant factors of a matrix over `Λ₀`,
/// ascending; their number is the rank over the Novikov field.
pub fn invariant_factors<F: Field>(a: &Matrix<Novikov<F>>) -> Vec<Q> {
    let (m, n) = (a.rows(), a.cols());
    let max = a
        .entries()
        .filter_map(|(_, _, x)| x.max_exponent().cloned())
        .max()
        .unwrap_or_else(Q::zero);
    let den = common_denominator(
        a.entries()
            .flat_map(|(_, _, x)| x.terms().iter().map(|(e, _)| e)),
    );
    // The product of the invariant factors is the valuation of a nonzero
    // minor of size at most min(m, n), so none of them reaches this precision.
    let precision = max * Q::from_integer(BigInt::from(m.min(n))) + Q::new(BigInt::one(), den);
    let mut rows: Vec<Vec<Novikov<F>>> = (0..m)
        .map(|i| (0..n).map(|j| a[(i, j)].truncated(&precision)).collect())
        .collect();
    let mut live_rows: BTreeSet<usize> = (0..m).collect();
    let mut live_cols: BTreeSet<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        let pivot = live_rows
            .iter()
            .flat_map(|&i| live_cols.iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| !rows[i][j].is_zero())
            .min_by(|&(i, j), &(k, l)| rows[i][j].valuation().cmp(&rows[k][l].valuation()));
        let Some((pi, pj)) = pivot else { break };
        let Valuation::Finite(v) = rows[pi][pj].valuation() else {
            unreachable!()
        };
        let unit = rows[pi][pj].shifted(&-v.clone());
        let inv = unit
            .inverse_mod(&precision)
            .expect("pivot has minimal valuation");
        for &k in live_rows.iter().filter(|&&k| k != pi) {
            if rows[k][pj].is_zero() {
                continue;
            }
            let f = (rows[k][pj].shifted(&-v.clone()) * inv.clone()).truncated(&precision);
            for &l in &live_cols {
                if !rows[pi][l].is_zero() {
                    let x = rows[k][l].clone() - (f.clone() * rows[pi][l].clone());
                    rows[k][l] = x.truncated(&precision);
                }
            }
        }
        // Column operations only touch the pivot row now.
        for &l in live_cols.iter().filter(|&&l| l != pj) {
            rows[pi][l] = Novikov::zero();
        }
        live_rows.remove(&pi);
        live_cols.remove(&pj);
        out.push(v);
    }
    out.sort();
    out
}

/// `Λ₀^b ⊕ ⊕ Λ₀/T^{a_i}Λ₀` with `a_1 >= a_2 >= ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub betti: usize,
    pub torsion: Vec<Q>,
}

fn check_denominator<F: Field>(
    d: &Matrix<Novikov<F>>,
    denominator: Option<&BigInt>,
) -> Result<(), NovikovError> {
    if let Some(den) = denominator {
        for (_, _, x) in d.entries() {
            for (e, _) in x.terms() {
                if !den.is_multiple_of(e.denom()) {
                    return Err(NovikovError::MixedDenominators {
                        exponent: e.clone(),
                        denominator: den.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Homology of `(C, ∂)` over `Λ₀`. With `denominator = Some(N)` every
/// exponent must lie in `(1/N)ℤ`; with `None` the common refinement is used.
pub fn homology_decomposition<F: Field>(
    c: &GappedComplex<F>,
    denominator: Option<&BigInt>,
) -> Result<Decomposition, NovikovError> {
    let d = c.differential();
    check_denominator(&d, denominator)?;
    if !d.mul(&d).is_zero() {
        return Err(NovikovError::NotAComplex);
    }
    let factors = invariant_factors(&d);
    let mut torsion: Vec<Q> = factors
        .iter()
        .filter(|a| a.is_positive())
        .cloned()
        .collect();
    torsion.reverse();
    Ok(Decomposition {
        betti: c.len() - 2 * factors.len(),
        torsion,
    })
}

/// Kernel plus cokernel of a map `Λ₀^n → Λ₀^m`, as the homology of the
/// two-term complex it defines.
pub fn map_decomposition<F: Field>(a: &Matrix<Novikov<F>>) -> Decomposition {
    let factors = invariant_factors(a);
    let mut torsion: Vec<Q> = factors
        .iter()
        .filter(|x| x.is_positive())
        .cloned()
        .collect();
    torsion.reverse();
    Decomposition {
        betti: a.rows() + a.cols() - 2 * factors.len(),
        torsion,
    }
}

/// Inverse modulo `T^precision` of a matrix whose constant part is invertible.
pub fn inverse_mod<F: Field>(a: &Matrix<Novikov<F>>, precision: &Q) -> Option<Matrix<Novikov<F>>> {
    let n = a.rows();
    let constant = Matrix::from_fn(n, a.cols(), |i, j| a[(i, j)].coefficient(&Q::zero()));
    let c_inv = constant.inverse()?;
    let c_inv = c_inv.map(|x| Novikov::monomial(x.clone(), Q::zero()));
    // a = c(1 + h) with h of positive valuation; (1 + h)^-1 = Σ (-h)^k.
    let h = c_inv.mul(a).sub(&Matrix::identity(n));
    let trunc = |m: Matrix<Novikov<F>>| m.map(|x| x.truncated(precision));
    let mut term: Matrix<Novikov<F>> = Matrix::identity(n);
    let mut sum = term.clone();
    loop {
        term = trunc(term.mul(&h).scale(&-Novikov::one()));
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
    }
    Some(trunc(sum.mul(&c_inv)))
}

#[derive(Debug, Clone)]
pub struct Extension<F> {
    pub complex: GappedComplex<F>,
    pub phi: Matrix<Novikov<F>>,
}

/// Given `small` of cut `E`, `big` of cut `E' > E` on the same generators
/// and `phi` invertible over `Λ₀` with `phi∘∂_small = ∂_big∘phi` through
/// energy `E`, returns `Ĉ` with `∂̂ = phi⁻¹∘∂_big∘phi` cut at `E'`; its
/// cut at `E` is `small` and `phi` is a chain map `Ĉ → big`.
pub fn pullback_extend<F: Field>(
    small: &GappedComplex<F>,
    big: &GappedComplex<F>,
    phi: &Matrix<Novikov<F>>,
) -> Result<Extension<F>, NovikovError> {
    let n = small.len();
    if big.len() != n || phi.rows() != n || phi.cols() != n {
        return Err(NovikovError::Dimension {
            rows: phi.rows(),
            cols: phi.cols(),
            expected: n,
        });
    }
    if big.energy < small.energy {
        return Err(NovikovError::CutAboveE {
            cut: big.energy.clone(),
            energy: small.energy.clone(),
        });
    }
    let (e, e_big) = (&small.energy, &big.energy);
    let (d_small, d_big) = (small.differential(), big.differential());
    let defect = phi.mul(&d_small).sub(&d_big.mul(phi));
    for (row, col, x) in defect.entries() {
        if let Some((exponent, _)) = x.terms().iter().find(|(x, _)| x <= e) {
            return Err(NovikovError::NotChainMapModE {
                row,
                col,
                exponent: exponent.clone(),
                energy: e.clone(),
            });
        }
    }
    let precision = e_big + Q::one();
    let inv = inverse_mod(phi, &precision).ok_or(NovikovError::NotInvertible)?;
    let d_hat = inv.mul(&d_big).mul(phi).map(|x| x.cut(e_big));
    let complex = GappedComplex::from_differential(
        small.generators.clone(),
        small.degrees.clone(),
        big.monoid.clone(),
        e_big.clone(),
        &d_hat,
    );
    Ok(Extension {
        complex,
        phi: phi.clone(),
    })
}

/// Clause-by-clause comparison of two decompositions related by a
/// Hamiltonian isotopy of norm `norm`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisplacementReport {
    /// `b = b'`.
    pub betti: bool,
    /// `I' >= #{i : a_i > norm}` and `a'_i >= a_i - norm` for those `i`.
    pub forward: bool,
    /// The same with the roles exchanged.
    pub backward: bool,
}

impl DisplacementReport {
    pub fn passed(&self) -> bool {
        self.betti && self.forward && self.backward
    }
}

fn dominates(a: &[Q], b: &[Q], norm: &Q) -> bool {
    let mut a: Vec<&Q> = a.iter().collect();
    let mut b: Vec<&Q> = b.iter().collect();
    a.sort_by(|x, y| y.cmp(x));
    b.sort_by(|x, y| y.cmp(x));
    let long: Vec<&&Q> = a.iter().take_while(|x| **x > norm).collect();
    b.len() >= long.len()
        && long
            .iter()
            .zip(&b)
            .all(|(x, y)| **y >= (**x).clone() - norm)
}

pub fn displacement_check(
    dec: &Decomposition,
    other: &Decomposition,
    norm: &Q,
) -> DisplacementReport {
    DisplacementReport {
        betti: dec.betti == other.betti,
        forward: dominates(&dec.torsion, &other.torsion, norm),
        backward: dominates(&other.torsion, &dec.torsion, norm),
    }
}
