//! A finite-order generalized system on the line: maps of pairs of points.
//! Iterating from a single point fills in the attractor; the set grows
//! quadratically, so only the first steps fit under the tuple cap.

use gifs_lab::gifs::{GifsSystem, HutchinsonOperator};
use gifs_lab::{hausdorff_distance, CompactNet};

fn main() -> gifs_lab::Result<()> {
    let sys = GifsSystem::averaging();
    println!("order {}, {} maps, contraction {}", sys.order(), sys.maps().len(), sys.contraction());
    for m in sys.maps() {
        println!("  {}", m.name());
    }
    let mut s = CompactNet::from_scalars(&[0.5])?;
    for k in 0..8 {
        let next = match sys.step(&s) {
            Ok(n) => n,
            Err(e) => {
                println!("step {k}: stopped ({e})");
                break;
            }
        };
        let xs: Vec<f64> = next.points().iter().map(|p| p.x()).collect();
        println!(
            "step {k}: {} points in [{:.4}, {:.4}], H(S_k, S_k+1) = {:.3e}",
            next.len(),
            xs[0],
            xs[xs.len() - 1],
            hausdorff_distance(&s, &next)?
        );
        s = next;
    }
    Ok(())
}
