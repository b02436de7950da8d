//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one line; the process fails if any line fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gifs_lab::balanced::{Condition, STRICT_TOL};
use gifs_lab::gifs::{
    build_refined_system, build_union_system, build_witness_system, certify_lipschitz,
    check_image_characterization, hutchinson_step_ifs, hutchinson_step_inf, iterate_to_fixed_point, trace_dominated,
    CertMethod, GifsInfSystem, IfsSystem, InfMapKind, InfOperator, TuplePolicy,
};
use gifs_lab::lipschitz::{check_extension_agreement, extend_system, sample_ambient_ratio};
use gifs_lab::measure::{premeasure_upper, CellHierarchy, CoverStrategy, GaugeFunction};
use gifs_lab::metric::hausdorff_distance_brute;
use gifs_lab::{
    build_balanced_set, hausdorff_distance, seq_metric, verify_conditions, ArityProfile, BoundedSeq, CellTree,
    CompactNet, Interval, Point, Result,
};

fn default_tree(q: f64) -> CellTree {
    build_balanced_set(q, &ArityProfile::new(vec![2, 2, 8]).unwrap(), Interval::new(0.0, 1.0)).unwrap()
}

/// `Ok(detail)` on pass, `Err(detail)` on failure.
type Outcome = std::result::Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_balanced_construction() -> Result<Outcome> {
    let t0 = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for q in [2.0, 3.0] {
        let tree = default_tree(q);
        let report = verify_conditions(&tree);
        // strict inequalities need a margin above the tolerance; the
        // non-strict ones (nesting, diameter) may be tight
        let strict = [Condition::Separation, Condition::OddLevel]
            .into_iter()
            .map(|c| report.margin(c))
            .fold(f64::INFINITY, f64::min);
        let leaves = tree.cells_at(3).len();
        ok &= report.all_passed() && strict >= STRICT_TOL * report.scale && strict > 0.0 && leaves == 32;
        details.push(format!("q={q}: all={} strict margin {strict:.3e} leaves {leaves}", report.all_passed()));
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    Ok(check(ok, format!("{} in {secs:.3}s", details.join("; "))))
}

fn c2_self_similarity() -> Result<Outcome> {
    let tree = default_tree(2.0);
    let mut details = Vec::new();
    let mut ok = true;
    for (label, sys) in [
        ("witness", build_witness_system(&tree)?),
        ("refined p=2", build_refined_system(&tree, 0.3)?),
    ] {
        let knet = sys.domain().knet();
        let out = hutchinson_step_inf(&sys, knet, TuplePolicy::ReadView)?;
        let h = hausdorff_distance(&out, knet)?;
        let same = out.same_points(knet);
        ok &= same && h == 0.0;
        details.push(format!("{label}: {} maps, same set {same}, H = {h}", sys.maps().len()));
    }
    Ok(check(ok, details.join("; ")))
}

fn c3_lipschitz_certificate() -> Result<Outcome> {
    let tree = default_tree(2.0);
    let mut details = Vec::new();
    let mut ok = true;
    for (label, sys, bound) in [
        ("witness", build_witness_system(&tree)?, 0.5),
        ("refined p=2", build_refined_system(&tree, 0.3)?, 0.25),
    ] {
        let r = certify_lipschitz(&sys)?;
        let exhaustive = r.maps.iter().all(|m| m.method == CertMethod::ClassPairs);
        let worst = r.maps.iter().map(|m| m.certified_ratio).fold(0.0, f64::max);
        ok &= r.passed() && r.violations() == 0 && r.chain_failures() == 0 && exhaustive;
        ok &= r.certified_bound() == bound && worst <= bound;
        details.push(format!(
            "{label}: bound {} (worst ratio {worst:.4}), violations {}, exhaustive {exhaustive}",
            r.certified_bound(),
            r.violations()
        ));
    }
    Ok(check(ok, details.join("; ")))
}

fn c4_fixed_point() -> Result<Outcome> {
    let tree = default_tree(2.0);
    let sys = build_witness_system(&tree)?;
    let knet = sys.domain().knet().clone();
    let s0 = CompactNet::exact(vec![sys.domain().leaves()[0].clone()])?;
    let op = InfOperator {
        sys: &sys,
        policy: TuplePolicy::ReadView,
    };
    let run = iterate_to_fixed_point(&op, &s0, 1e-9, 64)?;
    let h = hausdorff_distance(&run.net, &knet)?;
    let dominated = trace_dominated(&run.trace, 0.5, 1e-9);
    let ok = run.converged && h <= tree.diam_bound(3) && dominated && run.contraction == 0.5;
    Ok(check(
        ok,
        format!(
            "{} steps, H(S, K-net) = {h:.3e} <= b3 = {:.3e}, trace dominated {dominated}",
            run.steps,
            tree.diam_bound(3)
        ),
    ))
}

fn c5_classical_baseline() -> Result<Outcome> {
    let sys = IfsSystem::cantor();
    let mut s = CompactNet::interval_grid(0.0, 1.0, 33)?;
    let mut next = hutchinson_step_ifs(&sys, &s)?;
    let h01 = hausdorff_distance(&s, &next)?;
    let mut worst: f64 = 0.0;
    let mut ok = h01 > 0.0;
    for m in 0..=10 {
        let h = hausdorff_distance(&s, &next)?;
        let cap = 3f64.powi(-m) * h01 * (1.0 + 1e-9);
        ok &= h <= cap;
        worst = worst.max(h / cap);
        s = next;
        next = hutchinson_step_ifs(&sys, &s)?;
    }
    Ok(check(ok, format!("H(S0,S1) = {h01:.4}, worst H(S_m,S_m+1)/bound = {worst:.6} over m <= 10")))
}

fn c6_extension() -> Result<Outcome> {
    let tree = default_tree(2.0);
    let mut details = Vec::new();
    let mut ok = true;
    for n in [1usize, 2] {
        let base = gifs_lab::gifs::witness::build_witness_system_in(&tree, n)?;
        let ext = extend_system(&base, 0.5)?;
        let agree = check_extension_agreement(&ext, 200, 7)?;
        let (mut pairs, mut worst_excess) = (0usize, f64::NEG_INFINITY);
        for (i, f) in ext.maps().iter().enumerate() {
            let InfMapKind::Extended { coordinate_bound, .. } = f.kind() else {
                return Ok(Err(format!("map {i} is not extended")));
            };
            let limit = (n as f64).sqrt() * coordinate_bound + 1e-9;
            let r = sample_ambient_ratio(f, 10_000, 0.5, 100 + i as u64)?;
            pairs += r.pairs;
            worst_excess = worst_excess.max(r.max_ratio - limit);
            ok &= r.max_ratio <= limit && (f.declared_bound() - (n as f64).sqrt() * coordinate_bound).abs() < 1e-15;
        }
        let knet = ext.domain().knet();
        let fixes = hutchinson_step_inf(&ext, knet, TuplePolicy::Auto)?.same_points(knet);
        ok &= agree.passed() && fixes && pairs >= 10_000;
        details.push(format!(
            "n={n}: {} anchor tuples, mismatches {}, {pairs} pairs, max ratio - sqrt(n) L = {worst_excess:.3e}, net fixed {fixes}",
            agree.class_tuples + agree.random_tuples,
            agree.mismatches
        ));
    }
    Ok(check(ok, details.join("; ")))
}

fn c7_union() -> Result<Outcome> {
    let tree = default_tree(2.0);
    let p = CompactNet::from_scalars(&[5.0])?;
    let sys: GifsInfSystem = build_union_system(&tree, &p, 0.3)?;
    let mut ok = true;
    for f in sys.maps() {
        ok &= f.declared_bound() <= 0.3;
        if matches!(f.kind(), InfMapKind::Constant { .. }) {
            ok &= f.declared_bound() == 0.0;
        }
    }
    let r = sys.domain().full_net()?;
    let out = hutchinson_step_inf(&sys, &r, TuplePolicy::Auto)?;
    let same = out.same_points(&r);
    ok &= same && r.len() == 33;
    Ok(check(
        ok,
        format!("{} maps, max bound {}, |R| = {}, step reproduces R {same}", sys.maps().len(), sys.contraction(), r.len()),
    ))
}

fn c8_image_characterization() -> Result<Outcome> {
    let tree = default_tree(2.0);
    let sys = build_witness_system(&tree)?;
    let dom = sys.domain().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let configs = 24;
    let mut equal = 0;
    let mut exhaustive = 0;
    for c in 0..configs {
        let f = &sys.maps()[c % sys.maps().len()];
        let w = f.consumption().entries;
        let ks: Vec<CompactNet> = (0..w)
            .map(|_| {
                let size = rng.gen_range(1..=5);
                let pts = (0..size)
                    .map(|_| dom.leaves()[rng.gen_range(0..dom.leaves().len())].clone())
                    .collect();
                CompactNet::exact(pts)
            })
            .collect::<Result<_>>()?;
        let r = check_image_characterization(f, &ks)?;
        equal += r.equal as usize;
        exhaustive += matches!(r.policy, TuplePolicy::Exhaustive { .. }) as usize;
    }
    Ok(check(
        equal == configs && exhaustive == configs,
        format!("{equal}/{configs} random subset configurations equal, {exhaustive} by exhaustive enumeration"),
    ))
}

fn c9_appendix() -> Result<Outcome> {
    use gifs_lab::appendix::{build_example_space, discontinuity_witness};
    let space = build_example_space(50, 1e-4)?;
    let mut ok = true;
    let mut rows = Vec::new();
    for n in [5, 10, 20, 50] {
        let w = discontinuity_witness(n, &space)?;
        ok &= w.h2 == 1.0;
        if n == 5 {
            ok &= (w.h1 - 0.2236).abs() <= space.resolution + 1e-3;
        }
        if n == 50 {
            ok &= w.h1 <= 0.05;
        }
        rows.push(format!("h1({n}) = {:.4}, h2 = {}", w.h1, w.h2));
    }
    Ok(check(ok, format!("{} at resolution {:.1e}", rows.join("; "), space.resolution)))
}

fn c10_measure() -> Result<Outcome> {
    let h = GaugeFunction::cantor();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for m in 1..=8 {
        let hier = CellHierarchy::ternary_cantor(m)?;
        let net = hier.net()?;
        for delta in [1.0, 3f64.powi(-(m as i32)) * (1.0 + 1e-12)] {
            let r = premeasure_upper(&net, &h, delta, CoverStrategy::Cells(Some(m)), Some(&hier))?;
            worst = worst.max((r.value - 1.0).abs());
            ok &= (r.value - 1.0).abs() <= 1e-9;
        }
    }
    let tree = default_tree(2.0);
    let hier = CellHierarchy::of_tree(&tree);
    let net = tree.materialize_net(tree.depth())?;
    let g = GaugeFunction::power(0.5)?;
    let mut prev = 0.0;
    let mut monotone = true;
    let mut deltas: Vec<f64> = (1..=tree.depth()).map(|k| tree.diam_bound(k)).collect();
    deltas.extend([1.0, 0.3, 0.05, 0.01]);
    deltas.sort_by(|a, b| b.total_cmp(a));
    for d in deltas {
        let v = premeasure_upper(&net, &g, d, CoverStrategy::Cells(None), Some(&hier))?.value;
        monotone &= v >= prev;
        prev = v;
    }
    ok &= monotone;
    Ok(check(
        ok,
        format!("ternary Cantor depth 1..=8: max |value - 1| = {worst:.2e}; balanced tree monotone in delta {monotone}"),
    ))
}

fn random_net(rng: &mut ChaCha8Rng) -> Result<CompactNet> {
    let n = rng.gen_range(1..=12);
    CompactNet::exact(
        (0..n)
            .map(|_| Point::xy(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

fn c11_metric_axioms() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::NEG_INFINITY;
    let mut agree = true;
    for _ in 0..1000 {
        let (a, b, c) = (random_net(&mut rng)?, random_net(&mut rng)?, random_net(&mut rng)?);
        let (ab, bc, ac) = (hausdorff_distance(&a, &b)?, hausdorff_distance(&b, &c)?, hausdorff_distance(&a, &c)?);
        worst = worst.max(ac - ab - bc);
        agree &= ab == hausdorff_distance_brute(&a, &b)?;
    }
    let mut seq_ok = true;
    for _ in 0..200 {
        let len = rng.gen_range(1..=6);
        let draw = |rng: &mut ChaCha8Rng, k: usize| -> Vec<Point> {
            (0..k).map(|_| Point::xy(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect()
        };
        let len_y = rng.gen_range(1..=6);
        let (x, y) = (draw(&mut rng, len), draw(&mut rng, len_y));
        let m = len.max(y.len());
        let at = |v: &[Point], i: usize| v[i.min(v.len() - 1)].clone();
        let brute = (0..m).map(|i| at(&x, i).distance(&at(&y, i))).fold(0.0, f64::max);
        let pad = |v: &[Point]| (0..m).map(|i| at(v, i)).collect::<Vec<_>>();
        let d = seq_metric(1.0, &BoundedSeq::repeat_last(pad(&x))?, &BoundedSeq::repeat_last(pad(&y))?)?.value;
        seq_ok &= d == brute;
    }
    Ok(check(
        worst <= 1e-9 && agree && seq_ok,
        format!(
            "1000 triples: max triangle excess {worst:.2e}, fast = brute {agree}; sequence metric q=1 = coordinate max {seq_ok}"
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("balanced construction", c1_balanced_construction),
        ("self-similarity identity", c2_self_similarity),
        ("lipschitz certificate", c3_lipschitz_certificate),
        ("fixed-point convergence", c4_fixed_point),
        ("classical cantor baseline", c5_classical_baseline),
        ("extension to R^n", c6_extension),
        ("union with a finite set", c7_union),
        ("image characterization", c8_image_characterization),
        ("retraction discontinuity", c9_appendix),
        ("cantor premeasure closed form", c10_measure),
        ("metric axioms", c11_metric_axioms),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (status, detail) = match run() {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        failed += (status == "FAIL") as usize;
        println!(
            "criterion {:>2} {status} {name} [{:.2}s]: {detail}",
            i + 1,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
