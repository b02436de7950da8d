//! Randomized invariants across modules.

use std::sync::OnceLock;

use proptest::prelude::*;

use gifs_lab::address::{digit_transform, enumerate_addresses};
use gifs_lab::appendix::{build_example_space, retract, ExampleSpace, Retracted};
use gifs_lab::gifs::{
    build_refined_system, build_witness_system, hutchinson_step_ifs, hutchinson_step_inf, iterate_to_fixed_point,
    GifsInfSystem, IfsSystem, InfOperator, TuplePolicy,
};
use gifs_lab::lipschitz::{mcshane_extend, Anchor, SampleInput, SampledMap};
use gifs_lab::measure::{premeasure_upper, CellHierarchy, CoverStrategy, GaugeFunction};
use gifs_lab::metric::set_distance;
use gifs_lab::{
    build_balanced_set, hausdorff_distance, seq_metric, verify_conditions, Address, ArityProfile, BoundedSeq,
    CellTree, CompactNet, Interval, Point,
};

fn tree() -> &'static CellTree {
    static T: OnceLock<CellTree> = OnceLock::new();
    T.get_or_init(|| build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8]).unwrap(), Interval::new(0.0, 1.0)).unwrap())
}

fn witness() -> &'static GifsInfSystem {
    static S: OnceLock<GifsInfSystem> = OnceLock::new();
    S.get_or_init(|| build_witness_system(tree()).unwrap())
}

fn refined() -> &'static GifsInfSystem {
    static S: OnceLock<GifsInfSystem> = OnceLock::new();
    S.get_or_init(|| build_refined_system(tree(), 0.3).unwrap())
}

fn space() -> &'static ExampleSpace {
    static S: OnceLock<ExampleSpace> = OnceLock::new();
    S.get_or_init(|| build_example_space(6, 0.05).unwrap())
}

fn planar_net(max: usize) -> impl Strategy<Value = CompactNet> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..max)
        .prop_map(|v| CompactNet::exact(v.into_iter().map(|(x, y)| Point::xy(x, y)).collect()).unwrap())
}

fn line_net(max: usize) -> impl Strategy<Value = CompactNet> {
    prop::collection::vec(0.0..1.0f64, 1..max).prop_map(|v| CompactNet::from_scalars(&v).unwrap())
}

/// Nonempty subset of the leaf points of the default tree.
fn leaf_subset() -> impl Strategy<Value = CompactNet> {
    prop::collection::btree_set(0usize..32, 1..8).prop_map(|ranks| {
        let leaves = witness().domain().leaves();
        CompactNet::exact(ranks.into_iter().map(|r| leaves[r].clone()).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hausdorff_is_a_metric(a in planar_net(10), b in planar_net(10), c in planar_net(10)) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab == 0.0, a.same_points(&b));
        let (bc, ac) = (hausdorff_distance(&b, &c).unwrap(), hausdorff_distance(&a, &c).unwrap());
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn union_is_closer_than_the_other_set(a in planar_net(10), b in planar_net(10)) {
        let u = a.union(&b).unwrap();
        prop_assert!(hausdorff_distance(&a, &u).unwrap() <= hausdorff_distance(&a, &b).unwrap() + 1e-12);
        prop_assert!(set_distance(&a, &b).unwrap() <= hausdorff_distance(&a, &b).unwrap());
    }

    #[test]
    fn sequence_metric_is_coordinate_max(
        xs in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..8),
        shift in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8),
    ) {
        let x: Vec<Point> = xs.iter().map(|&(a, b)| Point::xy(a, b)).collect();
        let y: Vec<Point> = xs.iter().zip(&shift).map(|(&(a, b), &(u, v))| Point::xy(a + u, b + v)).collect();
        let brute = x.iter().zip(&y).map(|(p, q)| p.distance(q)).fold(0.0, f64::max);
        let d = seq_metric(1.0, &BoundedSeq::repeat_last(x).unwrap(), &BoundedSeq::repeat_last(y).unwrap()).unwrap();
        prop_assert_eq!(d.value, brute);
    }

    #[test]
    fn transform_reads_only_parities(
        ranks in prop::collection::vec(0usize..32, 7),
        first in 1u32..=2,
        entry in 0usize..7,
        level in 1usize..=3,
    ) {
        let p = tree().profile();
        let leaves = enumerate_addresses(p, 3).unwrap();
        let inputs: Vec<Address> = ranks.iter().map(|&r| leaves[r].clone()).collect();
        let out = digit_transform(first, &inputs, p, 3).unwrap();
        let mut digits = inputs[entry].digits().to_vec();
        let d = digits[level - 1];
        let bumped = if d + 2 <= p.arity(level) { d + 2 } else if d > 2 { d - 2 } else { d };
        digits[level - 1] = bumped;
        let mut moved = inputs.clone();
        moved[entry] = Address::new(digits);
        prop_assert_eq!(digit_transform(first, &moved, p, 3).unwrap(), out.clone());
        for j in 2..=3 {
            prop_assert!(out.digit(j) >= 1 && out.digit(j) <= p.arity(j));
        }
    }

    #[test]
    fn hutchinson_contracts_on_leaf_subsets(a in leaf_subset(), b in leaf_subset()) {
        let h = hausdorff_distance(&a, &b).unwrap();
        for sys in [witness(), refined()] {
            let fa = hutchinson_step_inf(sys, &a, TuplePolicy::ReadView).unwrap();
            let fb = hutchinson_step_inf(sys, &b, TuplePolicy::ReadView).unwrap();
            prop_assert!(hausdorff_distance(&fa, &fb).unwrap() <= sys.contraction() * h + 1e-9);
        }
    }

    #[test]
    fn classical_hutchinson_contracts(a in line_net(12), b in line_net(12)) {
        let sys = IfsSystem::cantor();
        let (fa, fb) = (hutchinson_step_ifs(&sys, &a).unwrap(), hutchinson_step_ifs(&sys, &b).unwrap());
        let h = hausdorff_distance(&a, &b).unwrap();
        prop_assert!(hausdorff_distance(&fa, &fb).unwrap() <= h / 3.0 + 1e-12);
    }

    #[test]
    fn interval_cover_is_subadditive(
        a in line_net(20),
        b in line_net(20),
        rho in 0.0..0.02f64,
        delta in 0.01..0.5f64,
        s in 0.2..1.0f64,
    ) {
        let h = GaugeFunction::power(s).unwrap();
        let up = |n: &CompactNet| premeasure_upper(n, &h, delta, CoverStrategy::Intervals, None).unwrap().value;
        let (a, b) = (a.with_resolution(rho), b.with_resolution(rho));
        let u = a.union(&b).unwrap();
        prop_assert_eq!(u.resolution(), rho);
        prop_assert!(up(&u) <= up(&a) + up(&b) + 1e-12);
    }

    #[test]
    fn interval_cover_grows_as_delta_shrinks(a in line_net(30), d1 in 1e-3..1.0f64, d2 in 1e-3..1.0f64) {
        let a = a.with_resolution(1e-3);
        let h = GaugeFunction::power(0.63).unwrap();
        let (small, large) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let at = |d| premeasure_upper(&a, &h, d, CoverStrategy::Intervals, None).unwrap();
        let (vs, vl) = (at(small), at(large));
        prop_assert!(vs.value >= vl.value - 1e-12);
        prop_assert!(vs.max_diameter <= small + 1e-15);
    }

    #[test]
    fn cell_cover_grows_as_delta_shrinks(d1 in 1e-3..1.0f64, d2 in 1e-3..1.0f64, s in 0.1..1.0f64) {
        let hier = CellHierarchy::of_tree(tree());
        let net = tree().materialize_net(3).unwrap();
        let h = GaugeFunction::power(s).unwrap();
        let (small, large) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let at = |d| premeasure_upper(&net, &h, d, CoverStrategy::Cells(None), Some(&hier)).map(|r| r.value);
        // below the finest cell bound no cell cover is admissible
        if let Ok(v_small) = at(small) {
            prop_assert!(v_small >= at(large).unwrap());
        }
    }

    #[test]
    fn retraction_is_idempotent(picks in prop::collection::btree_set(0usize..200, 1..12)) {
        let all = space().net().unwrap();
        let pts: Vec<Point> = picks.into_iter().map(|i| all.points()[i % all.len()].clone()).collect();
        let k = CompactNet::exact(pts).unwrap();
        match retract(&k, space()).unwrap() {
            Retracted::Set(r) => prop_assert_eq!(retract(&r, space()).unwrap(), Retracted::Set(r)),
            Retracted::Empty => prop_assert!(k.points().iter().all(|p| p.x() > 0.0)),
        }
    }

    #[test]
    fn mcshane_matches_anchors_and_respects_bound(
        anchors in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..12),
        probes in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2),
    ) {
        // anchors of a 1-Lipschitz map from the line to the plane, per coordinate
        let list: Vec<Anchor> = anchors
            .iter()
            .map(|&(x, _)| Anchor { input: SampleInput::Point(Point::scalar(x)), output: Point::xy(0.6 * x, 0.8 * x.abs()) })
            .collect();
        let f = SampledMap::new(list.clone(), 1.0).unwrap();
        for a in &list {
            prop_assert_eq!(&mcshane_extend(&f, &a.input).unwrap(), &a.output);
        }
        let (x, y) = (SampleInput::Point(Point::scalar(probes[0].0)), SampleInput::Point(Point::scalar(probes[1].0)));
        let (fx, fy) = (mcshane_extend(&f, &x).unwrap(), mcshane_extend(&f, &y).unwrap());
        let d = x.distance(&y).unwrap();
        for c in 0..2 {
            prop_assert!((fx.coords()[c] - fy.coords()[c]).abs() <= d + 1e-9);
        }
        prop_assert!(fx.distance(&fy) <= 2f64.sqrt() * d + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn iterations_from_different_starts_agree(i in 0usize..32, j in 0usize..32) {
        let sys = witness();
        let op = InfOperator { sys, policy: TuplePolicy::ReadView };
        let tol = 1e-6;
        let leaves = sys.domain().leaves();
        let run = |r: usize| iterate_to_fixed_point(&op, &CompactNet::exact(vec![leaves[r].clone()]).unwrap(), tol, 64).unwrap();
        let (a, b) = (run(i), run(j));
        prop_assert!(a.converged && b.converged);
        prop_assert!(hausdorff_distance(&a.net, &b.net).unwrap() <= 2.0 * tol);
    }

    #[test]
    fn built_trees_survive_a_json_round_trip(q in 2.0..4.0f64) {
        let t = build_balanced_set(q, &ArityProfile::new(vec![2, 2, 8]).unwrap(), Interval::new(-1.0, 2.0)).unwrap();
        let back = CellTree::from_json(&t.to_json().unwrap()).unwrap();
        prop_assert!(verify_conditions(&back).all_passed());
        for k in 1..=3 {
            prop_assert_eq!(back.cells_at(k).len(), t.profile().count(k));
            let coarse = back.materialize_net(k).unwrap();
            let fine = back.materialize_net(3).unwrap();
            prop_assert!(hausdorff_distance(&coarse, &fine).unwrap() <= back.diam_bound(k));
        }
    }
}
