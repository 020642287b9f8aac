use num_traits::{One, Zero};
use proptest::prelude::*;
use resonance_lab::exterior::{basis_monomials, ExtElement, Monomial, Rational};
use resonance_lab::linalg::RationalMatrix;
use resonance_lab::presentation::{mccool_presentation, parse_point_str, Point};
use resonance_lab::resonance::ResonanceEngine;
use resonance_lab::theorem::in_c;

fn q(x: i64) -> Rational {
    Rational::from_integer(x.into())
}

/// Random element of degree `deg` on `n_gens` generators.
fn element(n_gens: usize, deg: usize) -> impl Strategy<Value = ExtElement> {
    let basis = basis_monomials(deg, n_gens);
    prop::collection::vec(-3i64..=3, basis.len()).prop_map(move |cs| {
        ExtElement::from_terms(deg, basis.iter().zip(cs).map(|(m, c)| (*m, q(c)))).unwrap()
    })
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = RationalMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        // small range so dependent rows show up
        prop::collection::vec(-2i64..=2, r * c).prop_map(move |v| {
            RationalMatrix::from_vec(r, c, v.into_iter().map(q).collect()).unwrap()
        })
    })
}

fn square(max: usize) -> impl Strategy<Value = RationalMatrix> {
    (1..=max).prop_flat_map(|s| {
        prop::collection::vec(-5i64..=5, s * s).prop_map(move |v| {
            RationalMatrix::from_vec(s, s, v.into_iter().map(q).collect()).unwrap()
        })
    })
}

/// Determinant by cofactor expansion along the first row.
fn laplace(m: &[Vec<Rational>]) -> Rational {
    if m.is_empty() {
        return Rational::one();
    }
    let mut total = Rational::zero();
    for j in 0..m.len() {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * laplace(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn rows_of(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

fn parity(perm: &[usize]) -> bool {
    let mut odd = false;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            odd ^= perm[i] > perm[j];
        }
    }
    odd
}

fn point_strategy(len: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-4i64..=4, len).prop_map(|v| Point::from_i64(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative(x in element(6, 1), y in element(6, 1), z in element(6, 2)) {
        prop_assert_eq!(x.multiply(&y).multiply(&z), x.multiply(&y.multiply(&z)));
    }

    #[test]
    fn product_is_graded_commutative(x in element(6, 1), y in element(6, 2), z in element(6, 1)) {
        prop_assert_eq!(x.multiply(&y), y.multiply(&x));
        prop_assert_eq!(x.multiply(&z), z.multiply(&x).scale(&q(-1)));
        prop_assert!(x.multiply(&x).is_zero());
    }

    #[test]
    fn monomial_product_sign_matches_sorting(a in prop::collection::btree_set(0usize..10, 0..4),
                                             b in prop::collection::btree_set(0usize..10, 0..4)) {
        let ma = Monomial::from_sorted(&a.iter().copied().collect::<Vec<_>>()).unwrap();
        let mb = Monomial::from_sorted(&b.iter().copied().collect::<Vec<_>>()).unwrap();
        let seq: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        match ma.wedge(mb) {
            None => prop_assert!(!a.is_disjoint(&b)),
            Some((neg, m)) => {
                prop_assert!(a.is_disjoint(&b));
                prop_assert_eq!(neg, parity(&seq));
                prop_assert_eq!(m.degree(), a.len() + b.len());
            }
        }
    }

    #[test]
    fn rank_is_stable(m in matrix(6, 6), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let r = m.rank();
        prop_assert_eq!(r, m.rank_bareiss());
        prop_assert_eq!(r, m.transpose().rank());
        let mut rp: Vec<usize> = (0..m.rows()).collect();
        rp.shuffle(&mut rng);
        let mut cp: Vec<usize> = (0..m.cols()).collect();
        cp.shuffle(&mut rng);
        let mut pm = m.select_rows(&rp).select_cols(&cp);
        pm.scale_row(0, &q(-7));
        prop_assert_eq!(r, pm.rank());
        let kernel = m.kernel_basis();
        prop_assert_eq!(r + kernel.len(), m.cols());
        for v in &kernel {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn determinant_agrees_with_cofactors(m in square(5), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let d = m.determinant().unwrap();
        prop_assert_eq!(&d, &laplace(&rows_of(&m)));
        prop_assert_eq!(d.is_zero(), m.rank() < m.rows());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..m.rows()).collect();
        perm.shuffle(&mut rng);
        let pd = m.select_rows(&perm).determinant().unwrap();
        prop_assert_eq!(pd, if parity(&perm) { -d } else { d });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn membership_is_scale_and_relabel_invariant(a in point_strategy(6), c in prop_oneof![-5i64..=-1, 1i64..=5],
                                                 perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let eng = ResonanceEngine::new(&mccool_presentation(3).unwrap()).unwrap();
        let base = eng.membership(&a).unwrap();
        let scaled = eng.membership(&a.scale(&q(c))).unwrap();
        prop_assert_eq!(base.resonant, scaled.resonant);
        prop_assert_eq!(base.kernel_dim, scaled.kernel_dim);
        let moved = eng.membership(&a.permuted(3, &perm)).unwrap();
        prop_assert_eq!(base.kernel_dim, moved.kernel_dim);
        prop_assert_eq!(in_c(3, &a).unwrap().is_empty(), in_c(3, &a.scale(&q(c))).unwrap().is_empty());
    }

    #[test]
    fn psi_columns_are_products(a in point_strategy(12), r in 0usize..18) {
        let eng = ResonanceEngine::new(&mccool_presentation(4).unwrap()).unwrap();
        let m = eng.psi_at(&a).unwrap();
        let col: Vec<Rational> = (0..m.rows()).map(|i| m.get(i, r).clone()).collect();
        prop_assert_eq!(col, eng.product_column(&a, r));
    }

    #[test]
    fn kernel_matches_quotient_cohomology(a in point_strategy(12)) {
        let eng = ResonanceEngine::new(&mccool_presentation(4).unwrap()).unwrap();
        let m = eng.membership(&a).unwrap();
        prop_assume!(!m.is_zero_point);
        prop_assert_eq!(m.kernel_dim, eng.h1_direct(&a).unwrap());
    }

    #[test]
    fn point_json_round_trips(a in point_strategy(6)) {
        let p = mccool_presentation(3).unwrap();
        let text = a.to_json(&p.generators).to_string();
        prop_assert_eq!(parse_point_str(&text, &p).unwrap(), a);
    }
}
