use std::collections::{BTreeMap, BTreeSet, HashMap};

use pds_core::caseproof::*;
use pds_core::lattice::{BoxPatch, Point, Shape};
use pds_core::tiling::{materialize_on_torus, verify_pds, ExactCover, Placement, Torus};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn p(c: [i64; 3]) -> Point {
    Point::from(c)
}

fn edge(a: [i64; 3], b: [i64; 3]) -> Edge {
    Edge::new(p(a), p(b)).unwrap()
}

fn base() -> Placement {
    Placement { anchor: Point::origin(3), plane: (0, 1) }
}

/// Perfect matchings counted as exact covers of the region by unit edges.
fn matchings_by_cover(region: &[Point]) -> u64 {
    let index: HashMap<&Point, usize> = region.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let mut ec = ExactCover::new(region.len());
    for (i, a) in region.iter().enumerate() {
        for b in a.neighbors() {
            if let Some(&j) = index.get(&b) {
                if i < j {
                    ec.add_option(&[i, j]);
                }
            }
        }
    }
    ec.solve(&[], None, |_| true).unwrap().solutions
}

fn corners() -> Vec<Point> {
    theta_prime(&base().shape()).unwrap().corners()
}

fn factor_count(corners_in: &[Point]) -> usize {
    let premise = OneFactorPremise { base: base(), corners_in: corners_in.to_vec() };
    let region = one_factor_region(&premise);
    let n = enumerate_one_factors(&region).len();
    assert_eq!(n as u64, matchings_by_cover(&region), "enumeration disagrees with the cover count");
    n
}

fn corner_seed(inside: &[Point]) -> Seed {
    let q = base();
    let mut facts = vec![Fact::Component(q.clone())];
    for c in corners() {
        facts.push(if inside.contains(&c) { Fact::InS(c) } else { Fact::OutS(c) });
    }
    Seed {
        patch: theta_prime(&q.shape()).unwrap().expand(2),
        facts,
        pairs: Vec::new(),
        one_factor: Some(OneFactorPremise { base: q, corners_in: inside.to_vec() }),
    }
}

#[test]
fn theta_prime_of_the_base_cycle() {
    let box_ = theta_prime(&base().shape()).unwrap();
    assert_eq!(box_, BoxPatch::new(p([-1, -1, -1]), p([2, 2, 1])).unwrap());
    assert_eq!(box_.cell_count(), 48);
    let want: BTreeSet<Point> = [-1, 2]
        .iter()
        .flat_map(|&x| [-1, 2].into_iter().flat_map(move |y| [-1, 1].into_iter().map(move |z| p([x, y, z]))))
        .collect();
    assert_eq!(corners().into_iter().collect::<BTreeSet<_>>(), want);
    assert_eq!(outer_region(&base()).len(), 28);

    let upright = Placement { anchor: p([0, 0, 0]), plane: (1, 2) };
    let b = theta_prime(&upright.shape()).unwrap();
    assert_eq!(b, BoxPatch::new(p([-1, -1, -1]), p([1, 2, 2])).unwrap());

    let bar = Shape::new([p([0, 0, 0]), p([1, 0, 0]), p([2, 0, 0]), p([3, 0, 0])]).unwrap();
    assert_eq!(theta_prime(&bar), Err(CaseError::NotAQ2));
}

#[test]
fn one_factor_counts_by_corner_pattern() {
    let cs = corners();
    assert_eq!(factor_count(&[]), 8);
    for c in &cs {
        assert_eq!(factor_count(std::slice::from_ref(c)), 0);
    }
    let mut by_distance: BTreeMap<i64, BTreeSet<usize>> = BTreeMap::new();
    for i in 0..8 {
        for j in i + 1..8 {
            by_distance.entry(cs[i].distance(&cs[j])).or_default().insert(factor_count(&[cs[i].clone(), cs[j].clone()]));
        }
    }
    let want: BTreeMap<i64, BTreeSet<usize>> =
        [(2, 0), (3, 1), (5, 1), (6, 0), (8, 0)].into_iter().map(|(d, n)| (d, BTreeSet::from([n]))).collect();
    assert_eq!(by_distance, want);
    for mask in 0u32..256 {
        let inside: Vec<Point> = (0..8).filter(|i| mask >> i & 1 == 1).map(|i| cs[i].clone()).collect();
        let n = factor_count(&inside);
        match inside.len() {
            3 | 5 | 7 => assert_eq!(n, 0),
            4 => {
                let top = inside.iter().filter(|c| c.0[2] == 1).count();
                let lows: BTreeSet<(i64, i64)> = inside.iter().map(|c| (c.0[0], c.0[1])).collect();
                // a whole face plane, or two corners on each plane over
                // opposite sides of the square
                let expect = if top == 0 || top == 4 {
                    2
                } else if top == 2 && lows.len() == 4 && inside.iter().all(|c| {
                    inside.iter().filter(|d| d.0[2] == c.0[2] && *d != c).all(|d| d.distance(c) == 3)
                }) {
                    1
                } else {
                    0
                };
                assert_eq!(n, expect, "corners {inside:?}");
            }
            _ => {}
        }
    }
}

#[test]
fn two_corners_at_distance_6_and_8_have_no_factor() {
    for far in [p([2, 2, -1]), p([2, 2, 1])] {
        let premise = OneFactorPremise { base: base(), corners_in: vec![p([-1, -1, -1]), far] };
        assert!(enumerate_one_factors(&one_factor_region(&premise)).is_empty());
    }
}

#[test]
fn zero_corner_dispositions_are_factors() {
    let region = outer_region(&base());
    let all = enumerate_one_factors(&region);
    for id in ["zero-a1", "zero-b"] {
        let mut pairs = paper_case(id).unwrap().seed.pairs;
        pairs.sort();
        assert!(all.iter().any(|f| f.edges == pairs), "{id} lists no matching");
    }
}

#[test]
fn every_catalog_case_replays_and_matches() {
    for id in case_ids() {
        let spec = paper_case(id).unwrap();
        let cert = run_paper_case(id).unwrap();
        let summary = replay_certificate(&cert).unwrap_or_else(|e| panic!("{id}: {e}"));
        assert_eq!(summary.nodes, cert.node_count());
        assert_eq!(summary.deductions, cert.deduction_count());
        if *id == "A.a" {
            continue;
        }
        assert!(cert.is_refutation(), "{id} is not refuted");
        spec.check(&cert).unwrap_or_else(|e| panic!("{id}: {e}"));
    }
}

#[test]
fn case_a_a_completes_to_the_canonical_solution() {
    // with the corner cycles placed as the geometry forces, this case is
    // the lattice-like solution itself and cannot be refuted
    let cert = run_paper_case("A.a").unwrap();
    let completions = cert.completions();
    assert_eq!(completions.len(), 1);
    let canon = canonical_restrictions();
    let s: Vec<Point> = completions[0].iter().flat_map(|q| q.cells()).collect();
    assert!(canon.iter().any(|pds| s.iter().all(|c| pds.contains(c))));
}

#[test]
fn named_witnesses() {
    let leaf = |id: &str| run_paper_case(id).unwrap().contradictions().into_iter().map(|(k, s)| (k, s.clone())).collect::<Vec<_>>();
    let f9 = edge([1, 2, 1], [2, 2, 1]);
    assert!(leaf("zero-a1").iter().any(|(_, s)| match s {
        Subject::Edge(e) => *e == f9,
        Subject::Vertex(v) => f9.ends().0 == v || f9.ends().1 == v,
        _ => false,
    }));
    assert_eq!(leaf("A.c"), vec![(ContradictionKind::UndominatedVertex, Subject::Vertex(p([0, 0, -2])))]);
    for id in ["one-corner", "two-corners-d6", "two-corners-d8", "three-corners-336", "three-corners-358", "four-mixed"] {
        assert!(leaf(id).iter().all(|(k, _)| *k == ContradictionKind::NoOneFactor), "{id}");
    }
    assert!(matches!(run_paper_case("nope"), Err(CaseError::UnknownCase(_))));
}

#[test]
fn tampered_certificates_are_rejected() {
    let cert = run_paper_case("zero-a1").unwrap();
    assert!(replay_certificate(&cert).is_ok());

    let mut moved = cert.clone();
    let step = 5;
    let shift = p([0, 0, 5]);
    match &mut moved.root.deductions[step].reason {
        Reason::Dominator { vertex }
        | Reason::UniqueDominator { vertex, .. }
        | Reason::Completion { vertex }
        | Reason::Unplaceable { vertex } => *vertex = &*vertex + &shift,
        Reason::PairDomination { edge } => *edge = edge.translate(&shift),
    }
    match replay_certificate(&moved) {
        Err(ReplayError::Deduction { step: s, .. }) => assert_eq!(s, step),
        other => panic!("perturbed reason accepted: {other:?}"),
    }

    let mut flipped = cert.clone();
    let d = &mut flipped.root.deductions[0];
    d.fact = match &d.fact {
        Fact::InS(v) => Fact::OutS(v.clone()),
        Fact::OutS(v) => Fact::InS(v.clone()),
        Fact::Edge(e) => Fact::OutS(e.ends().0.clone()),
        Fact::Component(q) => Fact::Component(q.translate(&p([1, 0, 0]))),
    };
    assert!(replay_certificate(&flipped).is_err());

    let mut truncated = cert.clone();
    truncated.root.deductions.truncate(3);
    assert!(matches!(replay_certificate(&truncated), Err(ReplayError::Outcome { .. })));

    let mut witness = cert.clone();
    witness.root.outcome =
        Outcome::Contradiction { kind: ContradictionKind::UndominatedVertex, witness: Subject::Vertex(p([0, 0, -1])) };
    assert!(replay_certificate(&witness).is_err());

    let mut fake = cert.clone();
    fake.root.outcome = Outcome::Contradiction { kind: ContradictionKind::NoOneFactor, witness: Subject::Region(vec![]) };
    assert!(replay_certificate(&fake).is_err());

    let mut version = cert.clone();
    version.schema_version = 99;
    assert_eq!(replay_certificate(&version), Err(ReplayError::Schema(99)));
}

#[test]
fn split_omitting_a_branch_is_rejected() {
    let cert = run_paper_case("two-corners-d5").unwrap();
    assert!(matches!(cert.root.outcome, Outcome::Split { .. }));
    let mut cut = cert.clone();
    if let Outcome::Split { branches, .. } = &mut cut.root.outcome {
        branches.pop();
    }
    assert!(replay_certificate(&cut).is_err());
}

#[test]
fn hand_written_certificate_for_zero_a2() {
    // f4 must be dominated from below, f10 from above; then f11, whose
    // other candidate f11-e2 meets f1-e2, has no parallel dominator left
    let seed = paper_case("zero-a2").unwrap().seed;
    let f4 = edge([0, -1, -1], [1, -1, -1]);
    let f10 = edge([1, -1, 1], [2, -1, 1]);
    let f11 = edge([0, -1, 1], [-1, -1, 1]);
    let cert = Certificate {
        schema_version: SCHEMA_VERSION,
        case_id: "zero-a2 by hand".into(),
        seed,
        root: ProofNode {
            deductions: vec![
                Deduction { fact: Fact::Edge(f4.translate(&p([0, 0, -1]))), reason: Reason::PairDomination { edge: f4 } },
                Deduction { fact: Fact::Edge(f10.translate(&p([0, 0, 1]))), reason: Reason::PairDomination { edge: f10 } },
            ],
            outcome: Outcome::Contradiction { kind: ContradictionKind::UndominatedVertex, witness: Subject::Edge(f11) },
        },
    };
    let summary = replay_certificate(&cert).unwrap();
    assert!(summary.refutes());
}

#[test]
fn certificates_round_trip_through_json() {
    for id in ["zero-b", "two-corners-d5", "one-corner"] {
        let cert = run_paper_case(id).unwrap();
        let back = Certificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        assert!(replay_certificate(&back).is_ok());
    }
}

#[test]
fn transcript_reads_as_forced_steps() {
    let text = transcript(&run_paper_case("zero-a1").unwrap());
    assert!(text.starts_with("Case zero-a1."));
    assert!(text.contains("forced, since"));
    assert!(text.trim_end().ends_with("a contradiction."));
}

fn canonical_config(patch: &BoxPatch) -> PartialConfig {
    let pds = &canonical_restrictions()[0];
    let mut config = PartialConfig::new(patch.clone());
    for c in patch.expand(5).cells() {
        config.assign.insert(c.clone(), if pds.contains(&c) { CellState::InS } else { CellState::OutS });
    }
    for c in patch.expand(3).cells() {
        if let Some(z) = pds.component_offset(&c) {
            config.components.insert(base().translate(&z));
        }
    }
    config
}

#[test]
fn canonical_patch_is_a_fixpoint() {
    let patch = theta_prime(&base().shape()).unwrap();
    let config = canonical_config(&patch);
    let out = propagate(&config).unwrap();
    assert!(out.deductions.is_empty());
    assert!(out.contradiction.is_none());
}

#[test]
fn propagation_is_confluent() {
    let configs: Vec<PartialConfig> = ["A.a", "B.a", "zero-b"]
        .iter()
        .map(|id| {
            let mut s = paper_case(id).unwrap().seed;
            if *id == "zero-b" {
                // without the committed edge the fixpoint is contradiction free
                s.facts.pop();
            }
            PartialConfig::from_seed(&s).unwrap()
        })
        .chain([PartialConfig::from_seed(&corner_seed(&[])).unwrap()])
        .collect();
    for config in configs {
        let reference = propagate(&config).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let out = propagate_in_order(&config, Some(rng.gen())).unwrap();
            assert_eq!(out.contradiction.is_some(), reference.contradiction.is_some());
            if reference.contradiction.is_none() {
                assert_eq!(out.config, reference.config);
            }
        }
    }
}

#[test]
fn every_corner_subset_is_refuted_or_canonical() {
    let cs = corners();
    let box_ = theta_prime(&base().shape()).unwrap();
    let mut canonical = Vec::new();
    for mask in 0u32..256 {
        let inside: Vec<Point> = (0..8).filter(|i| mask >> i & 1 == 1).map(|i| cs[i].clone()).collect();
        let out = rigidity_from_seed("corners", &corner_seed(&inside), &box_, 100_000);
        assert!(replay_certificate(out.certificate()).is_ok());
        match out {
            RigidityOutcome::Rigid(c) if c.is_refutation() => {}
            RigidityOutcome::Rigid(_) => canonical.push(inside),
            other => panic!("corners {inside:?}: {other:?}"),
        }
    }
    // one corner pattern up to the symmetries of the base cycle
    assert_eq!(canonical.len(), 4);
    assert!(canonical.iter().all(|c| c.len() == 4));
    assert!(canonical.contains(&vec![p([-1, -1, -1]), p([-1, 2, 1]), p([2, -1, -1]), p([2, 2, 1])]));
}

#[test]
fn rigidity_radius_two() {
    let out = local_rigidity_search(2, 100_000);
    assert!(out.is_rigid());
    assert!(replay_certificate(out.certificate()).is_ok());
    match rigidity_search_with_inner(2, 2, 100_000) {
        RigidityOutcome::Completions { noncanonical, .. } => assert!(!noncanonical.is_empty()),
        other => panic!("whole radius-2 patch rigid: {}", other.is_rigid()),
    }
}

#[test]
fn rigidity_radius_three_folds_onto_the_torus() {
    let out = rigidity_search_with_inner(3, 3, 100_000);
    assert!(out.is_rigid());
    let cert = out.certificate();
    assert!(replay_certificate(cert).is_ok());
    let torus = Torus::cubic(3, 20).unwrap();
    for comps in cert.completions() {
        let pds = canonical_restrictions()
            .into_iter()
            .find(|pds| comps.iter().flat_map(|q| q.cells()).all(|c| pds.contains(&c)))
            .expect("completion lies in a lattice-like solution");
        assert!(verify_pds(&materialize_on_torus(&pds, &torus).unwrap()).is_valid());
    }
}

#[test]
fn canonical_seed_has_one_completion() {
    let patch = base().shape().bounding_box().unwrap().expand(2);
    let config = canonical_config(&patch);
    let mut facts: Vec<Fact> = config.components.iter().cloned().map(Fact::Component).collect();
    facts.extend(config.assign.iter().map(|(c, s)| match s {
        CellState::InS => Fact::InS(c.clone()),
        _ => Fact::OutS(c.clone()),
    }));
    let seed = Seed { patch: patch.clone(), facts, pairs: Vec::new(), one_factor: None };
    let out = rigidity_from_seed("canonical", &seed, &patch, 1000);
    assert!(out.is_rigid());
    let completions = out.certificate().completions();
    assert_eq!(completions.len(), 1);
    assert_eq!(completions[0].iter().cloned().collect::<BTreeSet<_>>(), config.components);
}

#[test]
fn random_seeds_replay() {
    let mut rng = StdRng::seed_from_u64(11);
    let cs = corners();
    let mut proved = 0;
    for _ in 0..40 {
        let inside: Vec<Point> = cs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        let mut seed = corner_seed(&inside);
        seed.one_factor = None;
        for _ in 0..rng.gen_range(0..4) {
            let c = p([rng.gen_range(-3..5), rng.gen_range(-3..5), rng.gen_range(-3..4)]);
            seed.facts.push(if rng.gen_bool(0.3) { Fact::InS(c) } else { Fact::OutS(c) });
        }
        let options = ProverOptions { max_nodes: Some(300), ..ProverOptions::default() };
        let Ok(cert) = prove("random", &seed, &options) else { continue };
        replay_certificate(&cert).unwrap_or_else(|e| panic!("{e}"));
        proved += 1;
    }
    assert!(proved > 20);
}
