use num_traits::Zero;
use resonance_lab::exterior::{flat, Rational};
use resonance_lab::linalg::RationalMatrix;
use resonance_lab::presentation::{
    expected_poincare, i2_basis, mccool_presentation, parse_presentation_str,
    product_free_presentation, Point, Presentation,
};
use resonance_lab::replay::{case1_witness, case2_final_set, m3_reference};
use resonance_lab::resonance::{hilbert_dims, hilbert_dims_ungraded, ResonanceEngine};
use resonance_lab::sampling::{coord, rng_for};
use resonance_lab::theorem::{block_components, components, Subspace};

fn expected(n: usize) -> Vec<usize> {
    expected_poincare(n)
        .into_iter()
        .map(|x| x as usize)
        .collect()
}

#[test]
fn hilbert_mccool_small() {
    for n in 2..=5 {
        let p = mccool_presentation(n).unwrap();
        assert_eq!(hilbert_dims(&p, n).unwrap(), expected(n), "n = {n}");
    }
}

#[test]
fn hilbert_product_free() {
    for n in 2..=4 {
        let p = product_free_presentation(n).unwrap();
        assert_eq!(hilbert_dims(&p, n).unwrap(), expected(n), "n = {n}");
    }
}

#[test]
fn hilbert_routes_agree() {
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
fn custom_presentation_matches_builtin() {
    let p = mccool_presentation(3).unwrap();
    let text = p.to_json().to_string();
    let q = parse_presentation_str(&text).unwrap();
    assert_eq!(p, q);
    assert_eq!(hilbert_dims(&q, 3).unwrap(), vec![1, 6, 9, 0]);
}

/// A single-relation presentation on two generators: `A = E/(e_1 e_2)`.
#[test]
fn custom_single_relation() {
    let doc = r#"{"name": "x", "generators": ["x", "y"], "relations": [[[[1, 1], ["x", "y"]]]]}"#;
    let p: Presentation = parse_presentation_str(doc).unwrap();
    assert_eq!(hilbert_dims(&p, 2).unwrap(), vec![1, 2, 0]);
    let eng = ResonanceEngine::new(&p).unwrap();
    // psi maps into E^3 = 0, so every point has kernel I^2
    let m = eng.membership(&Point::from_i64(&[1, 0])).unwrap();
    assert!(m.resonant);
    assert_eq!(eng.h1_direct(&Point::from_i64(&[1, 0])).unwrap(), 1);
}

fn oracle_run(p: &Presentation, comps: &[Subspace], count: usize, seed: u64) {
    let eng = ResonanceEngine::new(p).unwrap();
    let mut resonant = 0;
    for s in 0..count {
        let mut rng = rng_for(seed, "oracle-test", s as u64);
        let a = if s % 2 == 0 {
            comps[s / 2 % comps.len()].random_point(&mut rng)
        } else {
            let v: Vec<i64> = (0..p.num_generators()).map(|_| coord(&mut rng)).collect();
            Point::from_i64(&v)
        };
        let m = eng.membership_checked(&a).unwrap();
        if m.is_zero_point {
            continue;
        }
        resonant += usize::from(m.resonant);
        assert_eq!(
            Some(m.kernel_dim),
            m.h1_direct,
            "{} at {:?}",
            p.name,
            a.render(&p.generators)
        );
    }
    assert!(resonant > 0, "{}: no resonant points sampled", p.name);
}

#[test]
fn oracle_product_free() {
    for n in 2..=3 {
        let p = product_free_presentation(n).unwrap();
        oracle_run(&p, &block_components(&p).unwrap(), 100, 5);
    }
}

#[test]
fn components_meet_trivially() {
    let comps = components(3).unwrap();
    for (i, a) in comps.iter().enumerate() {
        for b in &comps[i + 1..] {
            let rows: Vec<Vec<Rational>> = a
                .basis
                .iter()
                .chain(&b.basis)
                .map(|p| p.coords.clone())
                .collect();
            let r = RationalMatrix::from_rows(rows).unwrap().rank();
            assert_eq!(r, a.dim() + b.dim(), "{} and {}", a.id(), b.id());
        }
    }
}

#[test]
fn eta_column_vanishes_on_its_plane() {
    let n = 4;
    let p = mccool_presentation(n).unwrap();
    let eng = ResonanceEngine::new(&p).unwrap();
    for c in components(n).unwrap().iter().take(6) {
        let resonance_lab::theorem::ComponentKind::Pair(i, j) = c.kind else {
            unreachable!()
        };
        let col = p.relation_index(&format!("eta_{{{i},{j}}}")).unwrap();
        let mut rng = rng_for(2, "eta-column", (i * 10 + j) as u64);
        let a = c.random_point(&mut rng);
        assert!(eng.product_column(&a, col).iter().all(Zero::is_zero));
    }
}

#[test]
fn dim_i2_formula() {
    for n in 2..=6 {
        let want = n * (n - 1) * (n - 1) / 2;
        assert_eq!(i2_basis(&mccool_presentation(n).unwrap()).dim, want);
    }
}

#[test]
fn known_points() {
    let eng = ResonanceEngine::new(&mccool_presentation(4).unwrap()).unwrap();
    let n = 4;
    let off = Point::sparse(12, &[(flat(2, 1, n), 1), (flat(3, 4, n), 1)]);
    assert!(!eng.membership(&off).unwrap().resonant);
    let plane = Point::sparse(12, &[(flat(1, 2, n), 2), (flat(2, 1, n), -3)]);
    assert!(eng.membership(&plane).unwrap().resonant);
}

#[test]
fn witness_monomials_distinct_and_square() {
    let w = case1_witness(5).unwrap();
    assert!(w.is_injective());
    assert_eq!(w.square_matrix.rows(), w.square_matrix.cols());
    let set = case2_final_set(4, (3, 1), (1, 4)).unwrap();
    assert_eq!(set.len(), 18);
    assert_eq!(m3_reference().rows(), 20);
}
