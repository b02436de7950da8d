//! Adds a finite set far from the balanced set: piecewise maps on the set
//! plus one constant map per extra point.

use gifs_lab::gifs::{build_union_system, certify_lipschitz, hutchinson_step_inf, union_geometry, TuplePolicy};
use gifs_lab::{build_balanced_set, ArityProfile, CompactNet, Interval};

fn main() -> gifs_lab::Result<()> {
    let tree = build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8])?, Interval::new(0.0, 1.0))?;
    let extra = CompactNet::from_scalars(&[5.0, 7.5])?;
    let geo = union_geometry(&tree, &extra, 0.3)?;
    println!("{geo:#?}");
    let sys = build_union_system(&tree, &extra, 0.3)?;
    let r = sys.domain().full_net()?;
    let image = hutchinson_step_inf(&sys, &r, TuplePolicy::Auto)?;
    let cert = certify_lipschitz(&sys)?;
    println!(
        "{} maps, max bound {}, |R| = {}, step reproduces R: {}, certificate passed: {}",
        sys.maps().len(),
        sys.contraction(),
        r.len(),
        image.same_points(&r),
        cert.passed()
    );
    Ok(())
}
