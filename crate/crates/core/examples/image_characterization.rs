//! Images of products of small subsets: brute force against the joint
//! parity-count description, with the per-level product as an outer bound.

use gifs_lab::gifs::{build_witness_system, check_image_characterization};
use gifs_lab::{build_balanced_set, ArityProfile, CompactNet, Interval};

fn main() -> gifs_lab::Result<()> {
    let tree = build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8])?, Interval::new(0.0, 1.0))?;
    let sys = build_witness_system(&tree)?;
    let leaves = sys.domain().leaves().to_vec();
    let f = &sys.maps()[0];
    let w = f.consumption().entries;
    for picks in [vec![0], vec![0, 5], vec![0, 9, 17], vec![3, 4, 20, 31]] {
        let k = CompactNet::exact(picks.iter().map(|&r| leaves[r].clone()).collect())?;
        let c = check_image_characterization(f, &vec![k; w])?;
        println!(
            "subset {picks:?}: image {} addresses, description {}, product bound {}, equal {}",
            c.brute.len(),
            c.combinatorial.len(),
            c.per_level_product,
            c.equal
        );
    }
    Ok(())
}
