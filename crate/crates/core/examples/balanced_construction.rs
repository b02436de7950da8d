//! Builds balanced sets for a few separation ratios and arity profiles and
//! prints the worst margin of every condition.

use gifs_lab::balanced::Condition;
use gifs_lab::{build_balanced_set, verify_conditions, ArityProfile, Interval};

fn main() -> gifs_lab::Result<()> {
    for (q, arities) in [(2.0, vec![2, 2, 8]), (3.0, vec![2, 2, 8]), (2.0, vec![2, 2, 8, 96])] {
        let profile = ArityProfile::new(arities)?;
        let tree = build_balanced_set(q, &profile, Interval::new(0.0, 1.0))?;
        let report = verify_conditions(&tree);
        println!("q = {q}, profile {:?}: all passed = {}", profile.arities(), report.all_passed());
        for c in [Condition::Nesting, Condition::Diameter, Condition::Separation, Condition::OddLevel] {
            println!("  {:<22} worst margin {:.3e}", c.to_string(), report.margin(c));
        }
        let widths: Vec<String> = (1..=tree.depth()).map(|k| format!("{:.2e}", tree.diam_bound(k))).collect();
        println!("  diameter bounds per level: {}", widths.join(", "));
    }
    Ok(())
}
