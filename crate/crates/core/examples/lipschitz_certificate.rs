//! Certifies declared Lipschitz bounds from cell geometry, then shows that
//! an overclaimed bound is caught.

use gifs_lab::gifs::{build_witness_system, certify_lipschitz, GifsInfMap, GifsInfSystem};
use gifs_lab::{build_balanced_set, ArityProfile, Interval};

fn main() -> gifs_lab::Result<()> {
    let tree = build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8])?, Interval::new(0.0, 1.0))?;
    let sys = build_witness_system(&tree)?;
    let report = certify_lipschitz(&sys)?;
    for m in &report.maps {
        println!(
            "map {} ({:?}): declared {}, worst certified ratio {:.4} over {} classes",
            m.map, m.method, m.declared_bound, m.certified_ratio, m.classes
        );
    }
    println!("passed: {}", report.passed());

    // claim 0.4 for every map; the certificate must find violating pairs
    let dom = sys.domain().clone();
    let maps = sys
        .maps()
        .iter()
        .map(|f| GifsInfMap::from_kind(&dom, f.kind().clone(), 0.4))
        .collect::<gifs_lab::Result<Vec<_>>>()?;
    let tight = certify_lipschitz(&GifsInfSystem::new(dom, maps)?)?;
    println!("with bound 0.4: passed {}, {} violations", tight.passed(), tight.violations());
    if let Some(v) = tight.maps.iter().flat_map(|m| &m.violations).next() {
        println!("  e.g. outputs {} and {} at ratio {:.4}", v.output_a.key(), v.output_b.key(), v.ratio);
    }
    Ok(())
}
