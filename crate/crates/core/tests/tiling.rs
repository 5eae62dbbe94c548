use std::collections::BTreeSet;
use std::time::Instant;

use pds_core::abelian::{hom_from_generator_matrix, restriction_bijective, IntMatrix};
use pds_core::lattice::{closed_neighborhood_shape, Isometry, Point, Shape};
use pds_core::tiling::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn matrix_one() -> IntMatrix {
    IntMatrix::from_rows(vec![vec![1, 0, 3], vec![0, 2, 5], vec![0, 0, 10]]).unwrap()
}

fn q2() -> Shape {
    Shape::square(3, 0, 1)
}

fn canonical_on(m: i64) -> PdsSolution {
    let pds = build_lattice_like(&q2(), &matrix_one()).unwrap();
    materialize_on_torus(&pds, &Torus::cubic(3, m).unwrap()).unwrap()
}

#[test]
fn matrix_one_builds() {
    let pds = build_lattice_like(&q2(), &matrix_one()).unwrap();
    assert!(pds.contains(&Point::from([1, 1, 0])));
    assert!(!pds.contains(&Point::from([2, 0, 0])));
    // rows of the matrix are lattice vectors: S is invariant under them
    for row in matrix_one().to_rows() {
        let z = Point::new(row);
        assert!(pds.contains(&z));
        assert_eq!(pds.component_offset(&(&z + &Point::from([0, 1, 0]))), Some(z));
    }
}

#[test]
fn lee_code_from_cyclic_seven() {
    // rows span the kernel of x ↦ x₁ + 2x₂ + 3x₃ mod 7
    let m = IntMatrix::from_rows(vec![vec![7, 0, 0], vec![-2, 1, 0], vec![-3, 0, 1]]).unwrap();
    let base: Shape = [Point::origin(3)].into_iter().collect();
    let pds = build_lattice_like(&base, &m).unwrap();
    assert_eq!(pds.phi.target.order(), 7);
    assert!(matches!(materialize_on_torus(&pds, &Torus::cubic(3, 7).unwrap()), Err(TilingError::UnsupportedBase)));
}

#[test]
fn rejected_constructions() {
    let two = IntMatrix::diagonal(&[2, 2, 2]);
    assert!(matches!(build_lattice_like(&q2(), &two), Err(TilingError::IndexMismatch { .. })));
    let base: Shape = [Point::origin(3)].into_iter().collect();
    assert!(build_lattice_like(&base, &IntMatrix::identity(3)).is_err());
    // index 20 but Φ = (1,0,0): collapses the base
    let flat = IntMatrix::diagonal(&[20, 1, 1]);
    assert!(matches!(build_lattice_like(&q2(), &flat), Err(TilingError::OverlapError)));
    // injective on the base, not bijective on the neighborhood
    let cyc = IntMatrix::from_rows(vec![vec![20, 0, 0], vec![-2, 1, 0], vec![-3, 0, 1]]).unwrap();
    assert!(matches!(build_lattice_like(&q2(), &cyc), Err(TilingError::TheoremCViolation)));
}

fn random_det20(rng: &mut StdRng) -> IntMatrix {
    // upper triangular with diagonal from a factorisation of 20, then mixed
    let diags = [[1, 1, 20], [1, 2, 10], [1, 4, 5], [2, 2, 5], [1, 5, 4], [2, 10, 1], [4, 5, 1], [20, 1, 1]];
    let d = diags[rng.gen_range(0..diags.len())];
    let mut rows = vec![vec![d[0], 0, 0], vec![0, d[1], 0], vec![0, 0, d[2]]];
    for (i, row) in rows.iter_mut().enumerate() {
        for x in &mut row[i + 1..] {
            *x = rng.gen_range(-9..=9);
        }
    }
    let mut m = IntMatrix::from_rows(rows).unwrap();
    for _ in 0..3 {
        let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
        if i != j {
            let k = rng.gen_range(-2..=2);
            let mut r = m.to_rows();
            let src = r[j].clone();
            for (x, y) in r[i].iter_mut().zip(src) {
                *x += k * y;
            }
            m = IntMatrix::from_rows(r).unwrap();
        }
    }
    m
}

#[test]
fn build_succeeds_iff_bijective_and_then_verifies() {
    let star = closed_neighborhood_shape(&q2()).unwrap();
    let torus = Torus::cubic(3, 20).unwrap();
    let mut rng = StdRng::seed_from_u64(20);
    let mut accepted = 0;
    let mut mats = vec![matrix_one()];
    mats.extend((0..50).map(|_| random_det20(&mut rng)));
    for m in mats {
        assert_eq!(m.determinant().unwrap().abs(), 20);
        let phi = hom_from_generator_matrix(&m).unwrap();
        let built = build_lattice_like(&q2(), &m);
        assert_eq!(built.is_ok(), restriction_bijective(&phi, &star), "{m}");
        if let Ok(pds) = built {
            accepted += 1;
            // 20ℤ³ lies in every index-20 lattice
            let sol = materialize_on_torus(&pds, &torus).unwrap();
            assert!(verify_pds(&sol).is_valid());
        }
    }
    assert!(accepted >= 1);
}

#[test]
fn canonical_counts_and_verification() {
    let sol = canonical_on(20);
    assert_eq!(sol.component_count(), 400);
    assert_eq!(sol.s_vertices().len(), 1600);
    assert!(verify_pds(&sol).is_valid());
    let pds = build_lattice_like(&q2(), &matrix_one()).unwrap();
    let e = materialize_on_torus(&pds, &Torus::cubic(3, 10).unwrap());
    assert!(matches!(e, Err(TilingError::IncompatibleTorus { .. })));
    // the order-4 axis allows a period of 4 along e2
    let thin = materialize_on_torus(&pds, &Torus::new(vec![20, 4, 20]).unwrap()).unwrap();
    assert_eq!(thin.component_count(), 80);
    assert!(verify_pds(&thin).is_valid());
}

#[test]
fn translation_closure() {
    let sol = canonical_on(20);
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..10 {
        let z = Point::new(vec![rng.gen_range(0..20), rng.gen_range(0..20), rng.gen_range(0..20)]);
        let moved = sol.translate(&z);
        assert!(verify_pds(&moved).is_valid());
        assert!(solution_equivalent(&sol, &moved).unwrap());
    }
}

#[test]
fn report_contents() {
    let t5 = Torus::cubic(3, 5).unwrap();
    let empty = PdsSolution::new(t5, []).unwrap();
    let r = verify_pds(&empty);
    assert_eq!(r.domination.len(), 125);
    assert!(r.domination.iter().all(|(_, c)| *c == 0));

    let t20 = Torus::cubic(3, 20).unwrap();
    let a = Placement::new(Point::from([0, 0, 0]), (0, 1)).unwrap();
    let b = Placement::new(Point::from([1, 0, 0]), (0, 1)).unwrap();
    let two = PdsSolution::new(t20.clone(), [a.clone(), b]).unwrap();
    let r = verify_pds(&two);
    assert!(!r.overlaps.is_empty());
    let c = Placement::new(Point::from([2, 0, 0]), (0, 1)).unwrap();
    let r = verify_pds(&PdsSolution::new(t20, [a, c]).unwrap());
    assert!(r.overlaps.is_empty());
    assert_eq!(r.merged.len(), 2);
}

#[test]
fn perturbations_break_both_views() {
    let sol = canonical_on(20);
    let mut ps = sol.placements().to_vec();
    ps[17].anchor = &ps[17].anchor + &Point::from([0, 0, 1]);
    let bad = PdsSolution::new(sol.torus.clone(), ps).unwrap();
    assert!(!verify_pds(&bad).is_valid());
    // tile view: covered cells are no longer a partition
    let t = &bad.torus;
    let mut count = vec![0u32; t.vertex_count()];
    for p in bad.placements() {
        for c in closed_neighborhood_shape(&p.shape()).unwrap().vertices() {
            count[t.index(c)] += 1;
        }
    }
    assert!(count.iter().any(|&c| c != 1));
}

#[test]
fn equivalence_examples() {
    let sol = canonical_on(20);
    let shifted = sol.translate(&Point::from([1, 2, 3]));
    assert!(solution_equivalent(&sol, &shifted).unwrap());
    let flip = Isometry::new(vec![0, 1, 2], vec![1, 1, -1], Point::origin(3)).unwrap();
    let reflected = sol.transform(&flip);
    assert!(verify_pds(&reflected).is_valid());
    assert!(solution_equivalent(&sol, &reflected).unwrap());
    let empty = PdsSolution::new(sol.torus.clone(), []).unwrap();
    assert!(!solution_equivalent(&sol, &empty).unwrap());
    let other = PdsSolution::new(Torus::cubic(3, 10).unwrap(), []).unwrap();
    assert_eq!(solution_equivalent(&empty, &other), Err(TilingError::DifferentTorus));
    let w = equivalence_witness(&sol, &reflected, Symmetry::Full).unwrap();
    let image: BTreeSet<Point> = sol.s_vertices().iter().map(|p| sol.torus.reduce(&w.apply(p))).collect();
    assert_eq!(image, reflected.s_vertices());
}

#[test]
fn json_and_geometry_round_trip() {
    let sol = canonical_on(20);
    let text = sol.to_json();
    assert!(text.contains("\"schema_version\": 1"));
    assert_eq!(PdsSolution::from_json(&text).unwrap(), sol);
    let off = to_off(&sol);
    assert!(off.starts_with("OFF\n"));
    assert!(off.contains("\n1600 400 0\n"));
    let obj = to_obj(&sol);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 400);
    assert_eq!(obj.lines().filter(|l| l.starts_with("g ")).count(), 1);
    assert!(PdsSolution::from_json("{\"schema_version\":9,\"torus\":[5,5,5],\"placements\":[]}").is_err());
}

#[test]
fn no_solutions_on_small_cubic_tori() {
    for m in [5, 10] {
        let t = Torus::cubic(3, m).unwrap();
        let start = Instant::now();
        let res = search_torus(&t, &SearchConfig { symmetry_reduction: false, ..Default::default() }).unwrap();
        eprintln!("Z{m}^3: {} nodes in {:?}", res.nodes, start.elapsed());
        assert!(res.exhaustive());
        assert!(res.solutions.is_empty());
    }
}

#[test]
fn search_twenty_cubed_finds_one_class() {
    let t = Torus::cubic(3, 20).unwrap();
    let start = Instant::now();
    let res = search_torus(&t, &SearchConfig::default()).unwrap();
    eprintln!(
        "Z20^3: {} solutions, {} classes, {} nodes in {:?}",
        res.solutions.len(),
        res.classes.len(),
        res.nodes,
        start.elapsed()
    );
    assert!(res.exhaustive());
    assert!(!res.solutions.is_empty());
    assert_eq!(res.classes.len(), 1);
    let canonical = canonical_on(20);
    for s in &res.solutions {
        assert!(verify_pds(s).is_valid());
        assert!(solution_equivalent(s, &canonical).unwrap());
    }
}
