//! Keeping only the perfect part of a compact set is not continuous: K_n
//! converges to a segment while their retractions stay at distance one.

use gifs_lab::appendix::{build_example_space, discontinuity_witness, witness_csv};

fn main() -> gifs_lab::Result<()> {
    let space = build_example_space(100, 1e-4)?;
    let rows = [2, 5, 10, 20, 50, 100]
        .into_iter()
        .map(|n| discontinuity_witness(n, &space))
        .collect::<gifs_lab::Result<Vec<_>>>()?;
    print!("{}", witness_csv(&rows));
    for w in &rows {
        println!("n = {:>3}: sqrt(5)/(2n) = {:.4}", w.n, 5f64.sqrt() / (2.0 * w.n as f64));
    }
    Ok(())
}
