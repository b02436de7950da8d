//! Classical middle-thirds IFS: iterate from a grid of [0, 1] and watch the
//! step distances shrink by a factor of three.

use gifs_lab::gifs::{iterate_to_fixed_point, trace_dominated, IfsSystem};
use gifs_lab::CompactNet;

fn main() -> gifs_lab::Result<()> {
    let sys = IfsSystem::cantor();
    let s0 = CompactNet::interval_grid(0.0, 1.0, 33)?;
    let run = iterate_to_fixed_point(&sys, &s0, 1e-6, 40)?;
    for (k, d) in run.trace.iter().enumerate() {
        let ratio = if k > 0 { d / run.trace[k - 1] } else { f64::NAN };
        println!("step {k:>2}: H(S_k, S_k+1) = {d:.3e}  ratio {ratio:.4}");
    }
    println!(
        "converged {} after {} steps with {} points; error bound {:.2e}; dominated by 3^-k: {}",
        run.converged,
        run.steps,
        run.net.len(),
        run.error_bound(),
        trace_dominated(&run.trace, run.contraction, 1e-9)
    );
    Ok(())
}
