//! Exact linear algebra over the rationals.
//!
//! Two elimination routes are provided and kept independent of each other:
//! sparse rational echelon insertion ([`SparseEchelon`], used for ranks and
//! kernels) and dense fraction-free Bareiss elimination over the integers
//! (used for determinants and as a cross-check of ranks).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exterior::{Monomial, Rational};

/// Sparse vector: strictly increasing indices, no zero entries.
pub type SparseVec = Vec<(usize, Rational)>;

/// `a - c * b` for sparse vectors.
fn axpy_sub(a: &SparseVec, c: &Rational, b: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, -(c * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - c * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn scale_sparse(v: &mut SparseVec, c: &Rational) {
    for (_, x) in v.iter_mut() {
        *x *= c;
    }
}

pub fn sparse_from_dense(v: &[Rational]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

#[derive(Clone)]
struct PivotRow {
    row: SparseVec,
    combo: SparseVec,
}

/// Incremental row echelon form over the rationals for sparse vectors.
///
/// Each stored pivot row has leading coefficient 1 and a distinct leading
/// index. When tracking is enabled every row carries the combination of
/// inserted vectors it represents, which turns dependencies into kernel
/// vectors.
#[derive(Clone, Default)]
pub struct SparseEchelon {
    pivots: HashMap<usize, PivotRow>,
    track: bool,
    inserted: usize,
}

impl SparseEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tracking() -> Self {
        SparseEchelon {
            track: true,
            ..Self::default()
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Inserts a vector. Returns `None` when it was independent of the
    /// previous ones, otherwise the dependency: a combination of inserted
    /// vectors (by insertion number) that vanishes. Without tracking the
    /// dependency is empty.
    pub fn insert(&mut self, v: SparseVec) -> Option<SparseVec> {
        let id = self.inserted;
        self.inserted += 1;
        let mut row = v;
        let mut combo = if self.track {
            vec![(id, Rational::one())]
        } else {
            Vec::new()
        };
        while let Some((lead, c)) = row.first().cloned() {
            match self.pivots.get(&lead) {
                Some(p) => {
                    row = axpy_sub(&row, &c, &p.row);
                    if self.track {
                        combo = axpy_sub(&combo, &c, &p.combo);
                    }
                }
                None => {
                    let inv = c.recip();
                    scale_sparse(&mut row, &inv);
                    scale_sparse(&mut combo, &inv);
                    self.pivots.insert(lead, PivotRow { row, combo });
                    return None;
                }
            }
        }
        Some(combo)
    }

    /// Rank of a collection of sparse vectors. Shorter vectors go in first,
    /// which keeps fill-in low for the very sparse spans this crate produces.
    pub fn rank_of(mut vectors: Vec<SparseVec>) -> usize {
        vectors.sort_by_key(|v| v.len());
        let mut e = SparseEchelon::new();
        for v in vectors {
            if !v.is_empty() {
                e.insert(v);
            }
        }
        e.rank()
    }
}

/// Reduced row echelon form of a small dense set of vectors; zero rows are
/// dropped. Each returned row has leading entry 1.
pub fn rref_rows(mut rows: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    let width = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for col in 0..width {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let c = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &c * p;
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    rows
}

/// Dense matrix of exact rationals with optional row and column labels.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
    pub row_labels: Option<Vec<String>>,
    pub col_labels: Option<Vec<String>>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RationalMatrix {
            rows,
            cols,
            data,
            row_labels: None,
            col_labels: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| Rational::from_integer(x.into()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column_sparse(&self, c: usize) -> SparseVec {
        (0..self.rows)
            .filter_map(|r| {
                let x = self.get(r, c);
                (!x.is_zero()).then(|| (r, x.clone()))
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t.row_labels = self.col_labels.clone();
        t.col_labels = self.row_labels.clone();
        t
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape("matrix sum with different shapes".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_vec(self.rows, self.cols, data)
    }

    /// New matrix whose row `i` is row `perm[i]` of `self`.
    pub fn select_rows(&self, perm: &[usize]) -> Self {
        let data = perm
            .iter()
            .flat_map(|&r| self.row(r).iter().cloned())
            .collect();
        let mut m = Self::from_vec(perm.len(), self.cols, data).expect("row selection shape");
        m.row_labels = self
            .row_labels
            .as_ref()
            .map(|l| perm.iter().map(|&r| l[r].clone()).collect());
        m.col_labels = self.col_labels.clone();
        m
    }

    /// New matrix whose column `j` is column `perm[j]` of `self`.
    pub fn select_cols(&self, perm: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, perm.len());
        for r in 0..self.rows {
            for (j, &c) in perm.iter().enumerate() {
                m.set(r, j, self.get(r, c).clone());
            }
        }
        m.row_labels = self.row_labels.clone();
        m.col_labels = self
            .col_labels
            .as_ref()
            .map(|l| perm.iter().map(|&c| l[c].clone()).collect());
        m
    }

    pub fn scale_row(&mut self, r: usize, c: &Rational) {
        for j in 0..self.cols {
            let v = self.get(r, j) * c;
            self.set(r, j, v);
        }
    }

    /// Column-by-column echelon insertion with tracking. Returns the rank and
    /// the raw column dependencies.
    fn column_echelon(&self) -> (usize, Vec<SparseVec>) {
        let mut e = SparseEchelon::tracking();
        let mut deps = Vec::new();
        for c in 0..self.cols {
            if let Some(dep) = e.insert(self.column_sparse(c)) {
                deps.push(dep);
            }
        }
        (e.rank(), deps)
    }

    /// Exact rank by sparse rational elimination.
    pub fn rank(&self) -> usize {
        if self.rows < self.cols {
            // fewer rows: eliminate those instead
            SparseEchelon::rank_of(
                (0..self.rows)
                    .map(|r| sparse_from_dense(self.row(r)))
                    .collect(),
            )
        } else {
            SparseEchelon::rank_of((0..self.cols).map(|c| self.column_sparse(c)).collect())
        }
    }

    /// Basis of the right kernel `{v : M v = 0}`, in reduced echelon form:
    /// each vector has leading coordinate 1 and the leading positions are
    /// cleared in every other vector. Empty iff the columns are independent.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let (_, deps) = self.column_echelon();
        let dense: Vec<Vec<Rational>> = deps
            .into_iter()
            .map(|d| {
                let mut v = vec![Rational::zero(); self.cols];
                for (i, x) in d {
                    v[i] = x;
                }
                v
            })
            .collect();
        rref_rows(dense)
    }

    /// Integer rows obtained by clearing denominators row by row, together
    /// with the product of the multipliers used.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut scale = BigInt::one();
        let rows = (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                scale *= &lcm;
                row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
            })
            .collect();
        (rows, scale)
    }

    /// Rank by dense fraction-free Bareiss elimination.
    pub fn rank_bareiss(&self) -> usize {
        let (mut a, _) = self.integer_rows();
        bareiss(&mut a, self.cols).0
    }

    /// Exact determinant by Bareiss elimination.
    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!(
                "determinant of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if self.rows == 0 {
            return Ok(Rational::one());
        }
        let (mut a, scale) = self.integer_rows();
        let (rank, negative) = bareiss(&mut a, self.cols);
        if rank < self.rows {
            return Ok(Rational::zero());
        }
        let det = a[self.rows - 1][self.cols - 1].clone();
        let det = if negative { -det } else { det };
        Ok(Rational::new(det, scale))
    }
}

/// In-place Bareiss elimination. Returns the rank and whether an odd number
/// of row swaps happened. For a nonsingular square input the last diagonal
/// entry is the determinant (up to that sign).
fn bareiss(a: &mut [Vec<BigInt>], cols: usize) -> (usize, bool) {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut negative = false;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            a.swap(p, r);
            negative = !negative;
        }
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = &pivot_row[c];
        for row in rest.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..cols {
                let v = pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
            row[c] = BigInt::zero();
        }
        prev = pivot.clone();
        r += 1;
    }
    (r, negative)
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Linear form `sum_i c_i a_i` in the point coordinates, without constant
/// term.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearForm {
    terms: BTreeMap<usize, Rational>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(index: usize) -> Self {
        Self::term(index, Rational::one())
    }

    pub fn term(index: usize, c: Rational) -> Self {
        let mut f = Self::zero();
        f.add_term(index, c);
        f
    }

    /// From `(variable, integer coefficient)` pairs.
    pub fn from_pairs(pairs: &[(usize, i64)]) -> Self {
        let mut f = Self::zero();
        for &(i, c) in pairs {
            f.add_term(i, Rational::from_integer(c.into()));
        }
        f
    }

    pub fn add_term(&mut self, index: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(index).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&index);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&usize, &Rational)> {
        self.terms.iter()
    }

    pub fn neg(&self) -> Self {
        LinearForm {
            terms: self.terms.iter().map(|(i, c)| (*i, -c)).collect(),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.terms
            .iter()
            .filter(|(i, _)| !point[**i].is_zero())
            .fold(Rational::zero(), |acc, (i, c)| acc + c * &point[*i])
    }

    /// Renders with a caller-supplied variable name, e.g. `-a[1,2]-a[3,2]`.
    pub fn render(&self, name: impl Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (i, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.abs();
            if mag.is_one() {
                s.push_str(&format!("{sign}{}", name(*i)));
            } else {
                s.push_str(&format!("{sign}{mag}*{}", name(*i)));
            }
        }
        s
    }
}

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(|i| format!("a{i}")))
    }
}

/// Matrix whose entries are linear forms in the point coordinates, stored
/// sparsely by column. Rows are labelled by degree-3 monomials, columns by
/// relation identifiers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinFormMatrix {
    n_vars: usize,
    columns: Vec<BTreeMap<usize, LinearForm>>,
    pub row_labels: Vec<Monomial>,
    pub col_labels: Vec<String>,
}

impl LinFormMatrix {
    pub fn new(n_vars: usize, row_labels: Vec<Monomial>, col_labels: Vec<String>) -> Self {
        LinFormMatrix {
            n_vars,
            columns: vec![BTreeMap::new(); col_labels.len()],
            row_labels,
            col_labels,
        }
    }

    /// Builds from a dense table of forms; labels are synthetic.
    pub fn from_dense(n_vars: usize, entries: Vec<Vec<LinearForm>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        let mut m = LinFormMatrix::new(
            n_vars,
            vec![Monomial::ONE; rows],
            (0..cols).map(|c| format!("c{c}")).collect(),
        );
        for (r, row) in entries.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape("ragged linear-form rows".into()));
            }
            for (c, f) in row.into_iter().enumerate() {
                m.set(r, c, f)?;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn set(&mut self, r: usize, c: usize, f: LinearForm) -> Result<()> {
        if r >= self.rows() || c >= self.cols() {
            return Err(Error::Shape(format!("entry ({r},{c}) outside matrix")));
        }
        if f.max_var().is_some_and(|v| v >= self.n_vars) {
            return Err(Error::Shape(format!(
                "form {f:?} uses a variable beyond {}",
                self.n_vars
            )));
        }
        if f.is_zero() {
            self.columns[c].remove(&r);
        } else {
            self.columns[c].insert(r, f);
        }
        Ok(())
    }

    pub fn entry(&self, r: usize, c: usize) -> LinearForm {
        self.columns[c].get(&r).cloned().unwrap_or_default()
    }

    pub fn column_entries(&self, c: usize) -> impl Iterator<Item = (&usize, &LinearForm)> {
        self.columns[c].iter()
    }

    /// Evaluates every entry at the point.
    pub fn specialize(&self, point: &[Rational]) -> Result<RationalMatrix> {
        if point.len() != self.n_vars {
            return Err(Error::Shape(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.n_vars
            )));
        }
        let mut m = RationalMatrix::zeros(self.rows(), self.cols());
        for (c, col) in self.columns.iter().enumerate() {
            for (r, f) in col {
                m.set(*r, c, f.eval(point));
            }
        }
        Ok(m)
    }

    /// Entry-wise equality, ignoring labels.
    pub fn entries_equal(&self, other: &LinFormMatrix) -> bool {
        self.rows() == other.rows()
            && self.cols() == other.cols()
            && (0..self.rows())
                .all(|r| (0..self.cols()).all(|c| self.entry(r, c) == other.entry(r, c)))
    }

    /// Sub-matrix with the given rows, in the given order.
    pub fn restrict_rows(&self, rows: &[usize]) -> Self {
        let mut m = LinFormMatrix::new(
            self.n_vars,
            rows.iter().map(|&r| self.row_labels[r]).collect(),
            self.col_labels.clone(),
        );
        for (new_r, &old_r) in rows.iter().enumerate() {
            for c in 0..self.cols() {
                if let Some(f) = self.columns[c].get(&old_r) {
                    m.columns[c].insert(new_r, f.clone());
                }
            }
        }
        m
    }
}
