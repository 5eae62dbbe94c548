use std::collections::BTreeSet;

use pds_core::abelian::{smith_normal_form, IntMatrix};
use pds_core::lattice::{
    canonical_form, classify_component, signed_permutations, BoxPatch, ComponentClass, Isometry, Point, Shape,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (0..n)
        .flat_map(|first| {
            subsets(n - first - 1, k - 1).into_iter().map(move |rest| {
                let mut v = vec![first];
                v.extend(rest.into_iter().map(|x| x + first + 1));
                v
            })
        })
        .collect()
}

/// Invariant factors as quotients of successive gcds of k×k minors.
fn invariant_factors_by_minors(m: &[Vec<i64>]) -> Vec<i64> {
    let (r, c) = (m.len(), m[0].len());
    let mut prev = 1;
    let mut out = Vec::new();
    for k in 1..=r.min(c) {
        let mut g = 0;
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                let minor: Vec<Vec<i64>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j]).collect()).collect();
                g = gcd(g, det(&minor));
            }
        }
        out.push(if prev == 0 { 0 } else { g / prev });
        prev = g;
    }
    out
}

#[test]
fn smith_form_matches_minor_gcds() {
    let mut rng = StdRng::seed_from_u64(2024);
    for trial in 0..200 {
        let (r, c) = [(3, 3), (3, 3), (2, 3), (3, 2), (4, 4)][trial % 5];
        let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let m = IntMatrix::from_rows(rows.clone()).unwrap();
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal(), invariant_factors_by_minors(&rows), "matrix {rows:?}");
        assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.d);
        assert_eq!(det(&snf.u.to_rows()).abs(), 1);
        assert_eq!(det(&snf.v.to_rows()).abs(), 1);
        let d = snf.diagonal();
        for w in d.windows(2) {
            assert!(w[0] >= 0 && (w[1] == 0 || (w[0] != 0 && w[1] % w[0] == 0)), "chain {d:?}");
        }
    }
}

fn product_of_projections(shape: &Shape) -> bool {
    let n = shape.dim().unwrap();
    let axes: Vec<BTreeSet<i64>> = (0..n).map(|i| shape.vertices().map(|p| p.0[i]).collect()).collect();
    let contiguous = axes.iter().all(|a| (*a.last().unwrap() - *a.first().unwrap() + 1) as usize == a.len());
    contiguous && shape.len() == axes.iter().map(|a| a.len()).product::<usize>()
}

#[test]
fn classify_every_box_up_to_four() {
    for a in 1..=4 {
        for b in 1..=4 {
            for c in 1..=4 {
                let bx = BoxPatch::new(Point::from([0, 0, 0]), Point::from([a - 1, b - 1, c - 1])).unwrap();
                let shape = bx.as_shape();
                assert_eq!(classify_component(&shape).unwrap(), ComponentClass::Box(vec![a as usize, b as usize, c as usize]));
                for hole in bx.cells() {
                    let rest = shape.difference(&Shape::new([hole]).unwrap());
                    if rest.is_empty() || !rest.is_connected() {
                        assert!(rest.is_empty() || classify_component(&rest).is_err());
                        continue;
                    }
                    let got = classify_component(&rest).unwrap();
                    assert_eq!(matches!(got, ComponentClass::Box(_)), product_of_projections(&rest));
                }
            }
        }
    }
}

#[test]
fn classify_every_subset_of_small_boxes() {
    for hi in [[1, 1, 1], [1, 1, 2], [0, 2, 3], [1, 2, 1]] {
        let cells = BoxPatch::new(Point::from([0, 0, 0]), Point::from(hi)).unwrap().cells();
        for mask in 1u32..(1 << cells.len()) {
            let shape = Shape::new((0..cells.len()).filter(|i| mask >> i & 1 == 1).map(|i| cells[i].clone())).unwrap();
            match classify_component(&shape) {
                Err(_) => assert!(!shape.is_connected()),
                Ok(ComponentClass::Box(sides)) => {
                    assert!(product_of_projections(&shape));
                    assert_eq!(sides.iter().product::<usize>(), shape.len());
                }
                Ok(ComponentClass::NotABox) => assert!(!product_of_projections(&shape)),
            }
        }
    }
}

fn shape_strategy() -> impl Strategy<Value = Shape> {
    prop::collection::btree_set((0i64..4, 0i64..4, 0i64..3), 1..10)
        .prop_map(|cells| Shape::new(cells.into_iter().map(|(x, y, z)| Point::from([x, y, z]))).unwrap())
}

proptest! {
    #[test]
    fn canonical_form_is_isometry_invariant(
        shape in shape_strategy(),
        g in 0usize..48,
        shift in (-5i64..5, -5i64..5, -5i64..5),
    ) {
        let iso: Isometry = signed_permutations(3)[g].with_shift(Point::from([shift.0, shift.1, shift.2]));
        let image = iso.apply_shape(&shape);
        prop_assert_eq!(canonical_form(&image), canonical_form(&shape));
        prop_assert_eq!(canonical_form(&shape).len(), shape.len());
    }
}
