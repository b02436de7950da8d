//! Upper bounds on the delta-premeasure of Cantor-type sets: cell covers
//! against interval covers.

use gifs_lab::measure::{premeasure_upper, CellHierarchy, CoverStrategy, GaugeFunction};
use gifs_lab::{build_balanced_set, ArityProfile, Interval};

fn main() -> gifs_lab::Result<()> {
    let h = GaugeFunction::cantor();
    println!("gauge {h}");
    for m in [2, 4, 6, 8] {
        let hier = CellHierarchy::ternary_cantor(m)?;
        let net = hier.net()?.with_resolution(0.5 * 3f64.powi(-(m as i32)));
        let delta = hier.bound(m);
        let cells = premeasure_upper(&net, &h, delta, CoverStrategy::Cells(Some(m)), Some(&hier))?;
        let intervals = premeasure_upper(&net, &h, delta, CoverStrategy::Intervals, None)?;
        println!("depth {m}: cells {:.6} ({} pieces), intervals {:.6} ({} pieces)", cells.value, cells.pieces, intervals.value, intervals.pieces);
    }
    let tree = build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8])?, Interval::new(0.0, 1.0))?;
    let hier = CellHierarchy::of_tree(&tree);
    let net = tree.materialize_net(3)?;
    let g = GaugeFunction::power(0.5)?;
    for k in 1..=3 {
        let r = premeasure_upper(&net, &g, tree.diam_bound(k), CoverStrategy::Cells(None), Some(&hier))?;
        println!("balanced set, delta = b_{k}: {:.4} at level {:?}", r.value, r.level);
    }
    Ok(())
}
