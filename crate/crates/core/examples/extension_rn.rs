//! Extends the transformer maps from the balanced set to all sequences in
//! the plane and samples the ambient Lipschitz ratio.

use gifs_lab::gifs::witness::build_witness_system_in;
use gifs_lab::gifs::{hutchinson_step_inf, TuplePolicy};
use gifs_lab::lipschitz::{check_extension_agreement, extend_system, sample_ambient_ratio};
use gifs_lab::{build_balanced_set, ArityProfile, Interval};

fn main() -> gifs_lab::Result<()> {
    let tree = build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8])?, Interval::new(0.0, 1.0))?;
    for dim in [1, 2, 3] {
        let ext = extend_system(&build_witness_system_in(&tree, dim)?, 0.5)?;
        let agree = check_extension_agreement(&ext, 100, 1)?;
        let worst = ext
            .maps()
            .iter()
            .enumerate()
            .map(|(i, f)| sample_ambient_ratio(f, 2_000, 0.5, i as u64).map(|r| r.max_ratio))
            .collect::<gifs_lab::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let knet = ext.domain().knet();
        let fixed = hutchinson_step_inf(&ext, knet, TuplePolicy::Auto)?.same_points(knet);
        println!(
            "R^{dim}: {} maps, declared {:.4}, sampled {:.4}, mismatches on K {}, K fixed {fixed}",
            ext.maps().len(),
            ext.contraction(),
            worst,
            agree.mismatches
        );
    }
    Ok(())
}
