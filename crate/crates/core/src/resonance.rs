//! Resonance membership for `A = E/I` with `I` generated in degree 2.
//!
//! For `a != 0` the complex `(E, a.)` is acyclic, so `H^1(A, a.)` is the
//! kernel of `psi_a : I^2 -> E^3`, `x -> a x`. With the relations as a basis
//! of `I^2`, `psi_a` is a matrix of linear forms in the coordinates of `a`,
//! built once per presentation. [`ResonanceEngine::h1_direct`] computes the
//! same number inside the quotient and serves as the oracle.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{basis_monomials, ExtElement, Monomial, Rational};
use crate::linalg::{
    rref_rows, LinFormMatrix, LinearForm, RationalMatrix, SparseEchelon, SparseVec,
};
use crate::presentation::{i2_basis, Point, Presentation};

/// Row index of a degree-3 monomial in `basis_monomials(3, N)`.
fn row_of(rows: &[Monomial], m: &Monomial) -> usize {
    rows.binary_search(m)
        .expect("degree-3 monomial present in basis")
}

/// The matrix of `psi_a` with entries linear in `a`: rows are the degree-3
/// monomials of `E`, column `r` holds the coordinates of `a * relation_r`.
pub fn psi_matrix(p: &Presentation) -> Result<LinFormMatrix> {
    if !p.relations_independent() {
        return Err(Error::Precondition(
            "relations are linearly dependent; they do not form a basis of I^2".into(),
        ));
    }
    let n_gens = p.num_generators();
    let rows = basis_monomials(3, n_gens);
    let mut m = LinFormMatrix::new(n_gens, rows.clone(), p.relation_ids.clone());
    for (c, rel) in p.relations.iter().enumerate() {
        let mut col: HashMap<usize, LinearForm> = HashMap::new();
        for g in 0..n_gens {
            let prod = ExtElement::generator(g).multiply(rel);
            for (mono, coeff) in prod.terms() {
                col.entry(row_of(&rows, mono))
                    .or_default()
                    .add_term(g, coeff.clone());
            }
        }
        for (r, f) in col {
            m.set(r, c, f)?;
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    #[serde(skip)]
    pub point: Point,
    pub is_zero_point: bool,
    pub kernel_dim: usize,
    /// Kernel vectors of `psi_a` in relation coordinates, reduced echelon.
    #[serde(skip)]
    pub kernel_basis: Vec<Vec<Rational>>,
    pub resonant: bool,
    pub h1_direct: Option<usize>,
    pub notes: Vec<String>,
}

/// Presentation together with its `psi` matrix, shared across many points.
pub struct ResonanceEngine {
    presentation: Presentation,
    psi: LinFormMatrix,
    e2_index: HashMap<Monomial, usize>,
    i2_rows: Vec<SparseVec>,
    i2_dim: usize,
}

impl ResonanceEngine {
    pub fn new(p: &Presentation) -> Result<Self> {
        let psi = psi_matrix(p)?;
        let e2 = basis_monomials(2, p.num_generators());
        let e2_index: HashMap<Monomial, usize> =
            e2.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let i2_rows: Vec<SparseVec> = p
            .relations
            .iter()
            .map(|r| to_sparse(r, &e2_index))
            .collect();
        let i2_dim = i2_basis(p).dim;
        Ok(ResonanceEngine {
            presentation: p.clone(),
            psi,
            e2_index,
            i2_rows,
            i2_dim,
        })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn psi(&self) -> &LinFormMatrix {
        &self.psi
    }

    fn check_point(&self, a: &Point) -> Result<()> {
        if a.len() != self.presentation.num_generators() {
            return Err(Error::Shape(format!(
                "point has {} coordinates, presentation has {} generators",
                a.len(),
                self.presentation.num_generators()
            )));
        }
        Ok(())
    }

    /// `psi_a` as a rational matrix.
    pub fn psi_at(&self, a: &Point) -> Result<RationalMatrix> {
        self.psi.specialize(&a.coords)
    }

    /// Decides `a in R^1(A)` through the kernel of `psi_a`. The zero point is
    /// resonant by convention (`H^1(A, 0) = A^1`); its kernel is all of
    /// `I^2`.
    pub fn membership(&self, a: &Point) -> Result<MembershipReport> {
        self.check_point(a)?;
        let m = self.psi_at(a)?;
        let kernel_basis = m.kernel_basis();
        let is_zero_point = a.is_zero();
        let mut notes = Vec::new();
        if is_zero_point {
            notes.push("zero point: resonant by convention, H^1(A, 0) = A^1".to_string());
        }
        Ok(MembershipReport {
            point: a.clone(),
            is_zero_point,
            kernel_dim: kernel_basis.len(),
            resonant: is_zero_point || !kernel_basis.is_empty(),
            kernel_basis,
            h1_direct: None,
            notes,
        })
    }

    /// [`membership`](Self::membership) plus the quotient-side cross-check.
    pub fn membership_checked(&self, a: &Point) -> Result<MembershipReport> {
        let mut report = self.membership(a)?;
        let h1 = self.h1_direct(a)?;
        report.h1_direct = Some(h1);
        if !report.is_zero_point && h1 != report.kernel_dim {
            report.notes.push(format!(
                "oracle mismatch: dim ker psi_a = {}, dim H^1(A, a) = {h1}",
                report.kernel_dim
            ));
        }
        Ok(report)
    }

    /// `dim H^1(A, a.)` computed in the quotient: the kernel of
    /// `A^1 -> A^2 = E^2 / I^2` minus the image of `A^0`, which is spanned
    /// by `a`.
    pub fn h1_direct(&self, a: &Point) -> Result<usize> {
        self.check_point(a)?;
        let n_gens = self.presentation.num_generators();
        let elem = a.as_element();
        let mut rows = self.i2_rows.clone();
        for g in 0..n_gens {
            rows.push(to_sparse(
                &elem.multiply(&ExtElement::generator(g)),
                &self.e2_index,
            ));
        }
        let image_rank = SparseEchelon::rank_of(rows) - self.i2_dim;
        let kernel = n_gens - image_rank;
        Ok(kernel - usize::from(!a.is_zero()))
    }

    /// Independent route to column `r` of `psi_a`: the coordinates of the
    /// exterior product `a * relation_r` in the degree-3 basis.
    pub fn product_column(&self, a: &Point, r: usize) -> Vec<Rational> {
        let prod = a.as_element().multiply(&self.presentation.relations[r]);
        let mut col = vec![Rational::zero(); self.psi.rows()];
        for (m, c) in prod.terms() {
            col[row_of(&self.psi.row_labels, m)] = c.clone();
        }
        col
    }
}

fn to_sparse(e: &ExtElement, index: &HashMap<Monomial, usize>) -> SparseVec {
    let mut v: SparseVec = e.terms().map(|(m, c)| (index[m], c.clone())).collect();
    v.sort_by_key(|x| x.0);
    v
}

pub fn membership(p: &Presentation, a: &Point) -> Result<MembershipReport> {
    ResonanceEngine::new(p)?.membership(a)
}

/// `dim H^1(A, a.)` by direct computation in `A = E/I`. Needs no
/// independence of the relation list.
pub fn h1_direct(p: &Presentation, a: &Point) -> Result<usize> {
    if a.len() != p.num_generators() {
        return Err(Error::Shape(
            "point length differs from generator count".into(),
        ));
    }
    let e2 = basis_monomials(2, p.num_generators());
    let index: HashMap<Monomial, usize> = e2.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let i2: Vec<SparseVec> = p.relations.iter().map(|r| to_sparse(r, &index)).collect();
    let i2_dim = SparseEchelon::rank_of(i2.clone());
    let elem = a.as_element();
    let mut rows = i2;
    for g in 0..p.num_generators() {
        rows.push(to_sparse(&elem.multiply(&ExtElement::generator(g)), &index));
    }
    let image_rank = SparseEchelon::rank_of(rows) - i2_dim;
    Ok(p.num_generators() - image_rank - usize::from(!a.is_zero()))
}

// ---------------------------------------------------------------------------
// Hilbert dimensions

/// Finest grading of the generators by integer vectors for which every
/// relation is homogeneous: the class of `e_g` in `Q^N` modulo the span of
/// differences of exponent vectors of terms within one relation, scaled to
/// integers.
pub fn relation_grading(p: &Presentation) -> Vec<Vec<i64>> {
    let n_gens = p.num_generators();
    let mut diffs = Vec::new();
    for r in &p.relations {
        let monos: Vec<Monomial> = r.terms().map(|(m, _)| *m).collect();
        for m in monos.iter().skip(1) {
            let mut v = vec![Rational::zero(); n_gens];
            for i in m.indices() {
                v[i] += Rational::one();
            }
            for i in monos[0].indices() {
                v[i] -= Rational::one();
            }
            diffs.push(v);
        }
    }
    let reduced = rref_rows(diffs);
    let pivots: Vec<usize> = reduced
        .iter()
        .map(|row| row.iter().position(|x| !x.is_zero()).expect("nonzero row"))
        .collect();
    let weights: Vec<Vec<Rational>> = (0..n_gens)
        .map(|g| {
            let mut v = vec![Rational::zero(); n_gens];
            v[g] = Rational::one();
            for (row, &pc) in reduced.iter().zip(&pivots) {
                if !v[pc].is_zero() {
                    let c = v[pc].clone();
                    for (x, y) in v.iter_mut().zip(row) {
                        *x -= &c * y;
                    }
                }
            }
            v
        })
        .collect();
    let lcm = weights
        .iter()
        .flatten()
        .fold(num_bigint::BigInt::one(), |acc, x| {
            num_integer::Integer::lcm(&acc, x.denom())
        });
    let free: Vec<usize> = (0..n_gens).filter(|c| !pivots.contains(c)).collect();
    weights
        .iter()
        .map(|v| {
            free.iter()
                .map(|&c| {
                    let x = &v[c] * Rational::from_integer(lcm.clone());
                    num_traits::ToPrimitive::to_i64(x.numer()).expect("grading weight fits in i64")
                })
                .collect()
        })
        .collect()
}

fn weight_of(m: Monomial, grading: &[Vec<i64>]) -> Vec<i64> {
    let width = grading.first().map_or(0, |w| w.len());
    let mut w = vec![0i64; width];
    for i in m.indices() {
        for (x, y) in w.iter_mut().zip(&grading[i]) {
            *x += y;
        }
    }
    w
}

/// Rank of `span(E^{k-2} * relations)` inside `E^k`.
fn ideal_rank_graded(p: &Presentation, k: usize, grading: &[Vec<i64>]) -> usize {
    let n_gens = p.num_generators();
    let rel_weights: Vec<Option<Vec<i64>>> = p
        .relations
        .iter()
        .map(|r| r.terms().next().map(|(m, _)| weight_of(*m, grading)))
        .collect();
    let lower = basis_monomials(k - 2, n_gens);
    // group (monomial, relation) pairs by the weight of their product
    let mut groups: HashMap<Vec<i64>, Vec<(Monomial, usize)>> = HashMap::new();
    for m in lower {
        let wm = weight_of(m, grading);
        for (r, wr) in rel_weights.iter().enumerate() {
            let Some(wr) = wr else { continue };
            if p.relations[r]
                .terms()
                .all(|(t, _)| t.bits() & m.bits() != 0)
            {
                continue;
            }
            let key: Vec<i64> = wm.iter().zip(wr).map(|(a, b)| a + b).collect();
            groups.entry(key).or_default().push((m, r));
        }
    }
    let mut groups: Vec<Vec<(Monomial, usize)>> = groups.into_values().collect();
    // biggest first so the parallel tail is short
    groups.sort_by_key(|g| std::cmp::Reverse(g.len()));
    groups
        .par_iter()
        .map(|pairs| {
            let mut columns: HashMap<Monomial, usize> = HashMap::new();
            let rows: Vec<SparseVec> = pairs
                .iter()
                .map(|&(m, r)| {
                    let mut row: Vec<(Monomial, Rational)> = Vec::new();
                    for (t, c) in p.relations[r].terms() {
                        if let Some((neg, prod)) = m.wedge(*t) {
                            row.push((prod, if neg { -c.clone() } else { c.clone() }));
                        }
                    }
                    let mut v: SparseVec = row
                        .into_iter()
                        .map(|(mono, c)| {
                            let next = columns.len();
                            (*columns.entry(mono).or_insert(next), c)
                        })
                        .collect();
                    v.sort_by_key(|x| x.0);
                    v
                })
                .collect();
            SparseEchelon::rank_of(rows)
        })
        .sum()
}

/// `dim A^k` for `k = 0..=kmax`. Products of degree-`k-2` monomials with the
/// relations span `I^k`; the span is split by the finest grading making the
/// relations homogeneous and each piece is eliminated separately.
pub fn hilbert_dims(p: &Presentation, kmax: usize) -> Result<Vec<usize>> {
    let n_gens = p.num_generators();
    if kmax > n_gens {
        return Err(Error::Parameter(format!(
            "kmax = {kmax} exceeds N = {n_gens}"
        )));
    }
    let grading = relation_grading(p);
    Ok((0..=kmax)
        .map(|k| {
            let total = crate::presentation::binomial(n_gens, k) as usize;
            if k < 2 {
                total
            } else {
                total - ideal_rank_graded(p, k, &grading)
            }
        })
        .collect())
}

/// Reference route for [`hilbert_dims`]: one elimination per degree over the
/// full monomial basis, no grading. Only practical for small `N`.
pub fn hilbert_dims_ungraded(p: &Presentation, kmax: usize) -> Result<Vec<usize>> {
    let n_gens = p.num_generators();
    if kmax > n_gens {
        return Err(Error::Parameter(format!(
            "kmax = {kmax} exceeds N = {n_gens}"
        )));
    }
    let mut out = Vec::new();
    for k in 0..=kmax {
        let basis = basis_monomials(k, n_gens);
        if k < 2 {
            out.push(basis.len());
            continue;
        }
        let index: HashMap<Monomial, usize> =
            basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut rows = Vec::new();
        for m in basis_monomials(k - 2, n_gens) {
            let me = ExtElement::monomial(m, Rational::one());
            for r in &p.relations {
                rows.push(to_sparse(&me.multiply(r), &index));
            }
        }
        out.push(basis.len() - SparseEchelon::rank_of(rows));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::flat;
    use crate::presentation::{expected_poincare, mccool_presentation, product_free_presentation};

    #[test]
    fn psi_shapes() {
        let p3 = psi_matrix(&mccool_presentation(3).unwrap()).unwrap();
        assert_eq!((p3.rows(), p3.cols()), (20, 6));
        let p4 = psi_matrix(&mccool_presentation(4).unwrap()).unwrap();
        assert_eq!((p4.rows(), p4.cols()), (220, 18));
    }

    #[test]
    fn eta_column_support() {
        for n in 3..=4 {
            let p = mccool_presentation(n).unwrap();
            let psi = psi_matrix(&p).unwrap();
            let c = p.relation_index("eta_{1,2}").unwrap();
            let eta_mono = Monomial::from_sorted(&[flat(1, 2, n), flat(2, 1, n)]).unwrap();
            let mut seen = 0;
            for (r, f) in psi.column_entries(c) {
                let terms: Vec<_> = f.terms().collect();
                assert_eq!(terms.len(), 1);
                let g = *terms[0].0;
                let lab = crate::exterior::GeneratorLabel::from_flat(g, n).unwrap();
                assert!(!(lab.p.min(lab.q) == 1 && lab.p.max(lab.q) == 2));
                let (_, expect) = Monomial::generator(g).wedge(eta_mono).unwrap();
                assert_eq!(psi.row_labels[*r], expect);
                seen += 1;
            }
            assert_eq!(seen, n * (n - 1) - 2);
        }
    }

    #[test]
    fn dependent_relations_rejected() {
        let p = mccool_presentation(3).unwrap();
        let mut rels = p.relations.clone();
        rels.push(p.relations[0].clone());
        let mut ids = p.relation_ids.clone();
        ids.push("dup".into());
        let dup = Presentation::new(
            "d",
            crate::presentation::Family::Custom,
            0,
            p.generators.clone(),
            rels,
            ids,
            None,
        )
        .unwrap();
        assert!(matches!(psi_matrix(&dup), Err(Error::Precondition(_))));
        // the direct route still works
        let a = Point::sparse(6, &[(0, 1)]);
        assert_eq!(h1_direct(&dup, &a).unwrap(), h1_direct(&p, &a).unwrap());
    }

    #[test]
    fn n2_is_entirely_resonant() {
        let p = mccool_presentation(2).unwrap();
        let eng = ResonanceEngine::new(&p).unwrap();
        let r = eng.membership(&Point::from_i64(&[1, 0])).unwrap();
        assert!(r.resonant);
        assert_eq!(r.kernel_dim, 1);
    }

    #[test]
    fn triple_point_kernel_contains_tau() {
        let n = 3;
        let p = mccool_presentation(n).unwrap();
        let eng = ResonanceEngine::new(&p).unwrap();
        let a = Point::sparse(6, &[(flat(2, 1, n), 1), (flat(3, 1, n), -1)]);
        let r = eng.membership(&a).unwrap();
        assert!(r.resonant);
        let t = p.relation_index("tau^3_{1,2}").unwrap();
        let mut e = vec![Rational::zero(); 6];
        e[t] = Rational::one();
        let m = eng.psi_at(&a).unwrap();
        assert!(m.mul_vec(&e).unwrap().iter().all(Zero::is_zero));
        assert!(r.kernel_basis.contains(&e) || r.kernel_dim >= 1);
    }

    #[test]
    fn case_one_point_not_resonant() {
        let n = 4;
        let p = mccool_presentation(n).unwrap();
        let eng = ResonanceEngine::new(&p).unwrap();
        let a = Point::sparse(12, &[(flat(2, 1, n), 1), (flat(3, 4, n), 1)]);
        let r = eng.membership_checked(&a).unwrap();
        assert!(!r.resonant);
        assert_eq!(r.h1_direct, Some(0));
    }

    #[test]
    fn zero_point_conventions() {
        let p = mccool_presentation(3).unwrap();
        let eng = ResonanceEngine::new(&p).unwrap();
        let r = eng.membership(&Point::zero(6)).unwrap();
        assert!(r.resonant && r.is_zero_point);
        assert_eq!(r.kernel_dim, 6);
        assert_eq!(eng.h1_direct(&Point::zero(6)).unwrap(), 6);
        assert!(eng.membership(&Point::zero(5)).is_err());
    }

    #[test]
    fn h1_direct_matches_kernel_on_pair_point() {
        let n = 3;
        let p = mccool_presentation(n).unwrap();
        let eng = ResonanceEngine::new(&p).unwrap();
        let a = Point::sparse(6, &[(flat(1, 2, n), 1), (flat(2, 1, n), 1)]);
        let r = eng.membership(&a).unwrap();
        assert_eq!(eng.h1_direct(&a).unwrap(), r.kernel_dim);
        assert_eq!(h1_direct(&p, &a).unwrap(), r.kernel_dim);
        assert!(r.kernel_dim >= 1);
    }

    #[test]
    fn hilbert_small_cases() {
        let p3 = mccool_presentation(3).unwrap();
        assert_eq!(hilbert_dims(&p3, 2).unwrap(), vec![1, 6, 9]);
        let p2 = mccool_presentation(2).unwrap();
        assert_eq!(hilbert_dims(&p2, 1).unwrap(), vec![1, 2]);
        assert!(hilbert_dims(&p2, 3).is_err());
        let pf = product_free_presentation(3).unwrap();
        assert_eq!(hilbert_dims(&pf, 3).unwrap(), vec![1, 6, 9, 0]);
    }

    #[test]
    fn graded_and_ungraded_agree() {
        for p in [
            mccool_presentation(3).unwrap(),
            product_free_presentation(3).unwrap(),
        ] {
            assert_eq!(
                hilbert_dims(&p, 4).unwrap(),
                hilbert_dims_ungraded(&p, 4).unwrap()
            );
        }
    }

    #[test]
    fn mccool_grading_is_by_target_index() {
        let n = 4;
        let p = mccool_presentation(n).unwrap();
        let w = relation_grading(&p);
        for g in 0..12 {
            for h in 0..12 {
                let lg = crate::exterior::GeneratorLabel::from_flat(g, n).unwrap();
                let lh = crate::exterior::GeneratorLabel::from_flat(h, n).unwrap();
                assert_eq!(w[g] == w[h], lg.q == lh.q);
            }
        }
    }

    #[test]
    fn hilbert_n4() {
        let p = mccool_presentation(4).unwrap();
        let expect: Vec<usize> = expected_poincare(4).iter().map(|&x| x as usize).collect();
        assert_eq!(hilbert_dims(&p, 4).unwrap(), expect);
    }
}
