//! The transformer system of a balanced set reproduces the set in one
//! Hutchinson step, and so does its refinement with smaller bounds.

use gifs_lab::gifs::{build_refined_system, build_witness_system, hutchinson_step_inf, TuplePolicy};
use gifs_lab::{build_balanced_set, hausdorff_distance, ArityProfile, Interval};

fn main() -> gifs_lab::Result<()> {
    let tree = build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8])?, Interval::new(0.0, 1.0))?;
    for (label, sys) in [("witness", build_witness_system(&tree)?), ("refined", build_refined_system(&tree, 0.3)?)] {
        let knet = sys.domain().knet();
        let image = hutchinson_step_inf(&sys, knet, TuplePolicy::ReadView)?;
        println!(
            "{label}: {} maps with bound {}, image has {} points, H(image, K) = {}",
            sys.maps().len(),
            sys.contraction(),
            image.len(),
            hausdorff_distance(&image, knet)?
        );
        for f in sys.maps() {
            let c = f.consumption();
            println!("  prefix {:?} reads {} entries to digit depth {}", f.prefix().map(|p| p.key()), c.entries, c.digit_depth);
        }
    }
    Ok(())
}
