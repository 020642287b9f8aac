//! Exterior algebra on `N` degree-one generators with exact rational
//! coefficients.
//!
//! Generators of the McCool family are labelled by ordered pairs `(p,q)`,
//! `p != q`, flattened lexicographically. Monomials are square-free and
//! stored as bitmasks over the flat generator indices, so at most 64
//! generators are supported. Bitmask order on monomials of one degree is
//! colexicographic order on their index sets, and that is the order used for
//! every basis listing in this crate.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest number of generators a [`Monomial`] can address.
pub const MAX_GENERATORS: usize = 64;

/// An ordered pair `(p,q)` labelling the generator `e_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorLabel {
    pub p: usize,
    pub q: usize,
}

impl GeneratorLabel {
    pub fn new(p: usize, q: usize, n: usize) -> Result<Self> {
        if p == q || p == 0 || q == 0 || p > n || q > n {
            return Err(Error::InvalidLabel { p, q, n });
        }
        Ok(GeneratorLabel { p, q })
    }

    /// Position of `(p,q)` among all ordered pairs of distinct elements of
    /// `1..=n`, ordered lexicographically.
    pub fn flat_index(self, n: usize) -> Result<usize> {
        let GeneratorLabel { p, q } = GeneratorLabel::new(self.p, self.q, n)?;
        Ok((p - 1) * (n - 1) + (q - 1) - usize::from(q > p))
    }

    pub fn from_flat(index: usize, n: usize) -> Result<Self> {
        if n < 2 || index >= n * (n - 1) {
            return Err(Error::InvalidIndex { index, n });
        }
        let p = index / (n - 1) + 1;
        let r = index % (n - 1) + 1;
        let q = if r >= p { r + 1 } else { r };
        Ok(GeneratorLabel { p, q })
    }
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.p, self.q)
    }
}

/// Convenience for code that works with a fixed, already validated `n`.
pub fn flat(p: usize, q: usize, n: usize) -> usize {
    GeneratorLabel { p, q }
        .flat_index(n)
        .expect("generator label within range")
}

/// All generator labels for `n`, in flat-index order.
pub fn labels(n: usize) -> Vec<GeneratorLabel> {
    (1..=n)
        .flat_map(|p| {
            (1..=n)
                .filter(move |&q| q != p)
                .map(move |q| GeneratorLabel { p, q })
        })
        .collect()
}

/// A square-free exterior monomial: a set of flat generator indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn generator(index: usize) -> Monomial {
        assert!(
            index < MAX_GENERATORS,
            "generator index {index} exceeds bitmask width"
        );
        Monomial(1 << index)
    }

    /// Builds a monomial from a strictly increasing index sequence.
    pub fn from_sorted(indices: &[usize]) -> Result<Monomial> {
        let mut bits = 0u64;
        for (pos, &i) in indices.iter().enumerate() {
            if i >= MAX_GENERATORS {
                return Err(Error::Shape(format!(
                    "generator index {i} exceeds {MAX_GENERATORS}"
                )));
            }
            if pos > 0 && indices[pos - 1] >= i {
                return Err(Error::Shape(format!(
                    "monomial indices not strictly increasing: {indices:?}"
                )));
            }
            bits |= 1 << i;
        }
        Ok(Monomial(bits))
    }

    /// The ordered product `e_{i_1} e_{i_2} ... e_{i_k}` as a sign and a
    /// canonical monomial, or `None` when an index repeats.
    pub fn ordered_product(indices: &[usize]) -> Option<(bool, Monomial)> {
        let mut acc = Monomial::ONE;
        let mut negative = false;
        for &i in indices {
            let (neg, m) = acc.wedge(Monomial::generator(i))?;
            negative ^= neg;
            acc = m;
        }
        Some((negative, acc))
    }

    pub fn from_bits(bits: u64) -> Monomial {
        Monomial(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_GENERATORS && self.0 >> index & 1 == 1
    }

    /// Indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Exterior product. Returns `(negative, product)` or `None` when the
    /// factors share a generator. The sign is `(-1)^inv` where `inv` counts
    /// pairs `i` in `self`, `j` in `other` with `i > j`.
    pub fn wedge(self, other: Monomial) -> Option<(bool, Monomial)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut inversions = 0u32;
        for j in other.indices() {
            // elements of self strictly above j
            let above = if j + 1 >= 64 { 0 } else { self.0 >> (j + 1) };
            inversions += above.count_ones();
        }
        Some((inversions % 2 == 1, Monomial(self.0 | other.0)))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

/// All monomials of `degree` in `n_gens` generators, in colex order.
pub fn basis_monomials(degree: usize, n_gens: usize) -> Vec<Monomial> {
    assert!(n_gens <= MAX_GENERATORS);
    if degree > n_gens {
        return Vec::new();
    }
    if degree == 0 {
        return vec![Monomial::ONE];
    }
    let limit: u128 = 1u128 << n_gens;
    let mut out = Vec::new();
    let mut v: u64 = if degree == 64 {
        u64::MAX
    } else {
        (1u64 << degree) - 1
    };
    loop {
        out.push(Monomial(v));
        // Gosper's hack: next integer with the same popcount
        let c = v & v.wrapping_neg();
        let (r, overflow) = v.overflowing_add(c);
        if overflow || c == 0 {
            break;
        }
        let next = (((r ^ v) >> 2) / c) | r;
        if (next as u128) >= limit {
            break;
        }
        v = next;
    }
    out
}

/// Homogeneous element of the exterior algebra with exact rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct ExtElement {
    degree: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl ExtElement {
    pub fn zero(degree: usize) -> Self {
        ExtElement {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::ONE, Rational::one())
    }

    pub fn generator(index: usize) -> Self {
        Self::monomial(Monomial::generator(index), Rational::one())
    }

    pub fn monomial(m: Monomial, coeff: Rational) -> Self {
        let mut e = ExtElement::zero(m.degree());
        if !coeff.is_zero() {
            e.terms.insert(m, coeff);
        }
        e
    }

    /// Collects `(monomial, coefficient)` pairs, summing repeats. Fails if a
    /// monomial has the wrong degree.
    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut e = ExtElement::zero(degree);
        for (m, c) in terms {
            if m.degree() != degree {
                return Err(Error::DegreeMismatch {
                    left: degree,
                    right: m.degree(),
                });
            }
            e.add_term(m, c);
        }
        Ok(e)
    }

    /// Degree-one element `sum_i coords[i] e_i`.
    pub fn from_coords(coords: &[Rational]) -> Self {
        let mut e = ExtElement::zero(1);
        for (i, c) in coords.iter().enumerate() {
            e.add_term(Monomial::generator(i), c.clone());
        }
        e
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn try_add(&self, other: &ExtElement) -> Result<ExtElement> {
        self.check_degree(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &ExtElement) -> Result<ExtElement> {
        self.try_add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> ExtElement {
        if c.is_zero() {
            return ExtElement::zero(self.degree);
        }
        ExtElement {
            degree: self.degree,
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
        }
    }

    /// Exterior product; the result has degree `deg self + deg other`.
    pub fn multiply(&self, other: &ExtElement) -> ExtElement {
        let mut out = ExtElement::zero(self.degree + other.degree);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((negative, m)) = m1.wedge(*m2) {
                    let c = c1 * c2;
                    out.add_term(m, if negative { -c } else { c });
                }
            }
        }
        out
    }

    /// Coordinates in the given monomial basis. Monomials absent from the
    /// basis are reported as an error.
    pub fn coordinates(
        &self,
        index_of: &BTreeMap<Monomial, usize>,
        len: usize,
    ) -> Result<Vec<Rational>> {
        let mut v = vec![Rational::zero(); len];
        for (m, c) in &self.terms {
            let i = index_of
                .get(m)
                .ok_or_else(|| Error::Shape(format!("monomial {m:?} not in basis")))?;
            v[*i] = c.clone();
        }
        Ok(v)
    }

    fn check_degree(&self, other: &ExtElement) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for ExtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            write!(f, "{sign}{}{m:?}", c.abs())?;
        }
        Ok(())
    }
}
