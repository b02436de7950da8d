//! Images of products of subsets of `K`, computed by brute force and by a
//! parity-count reachability argument, and the diameter bound on images.
//!
//! The output digit at level `j` is one plus the number of entries among
//! the first `a_(j+p) - 1` whose digit `j` is odd. Since one entry feeds
//! several levels at once, the reachable digit vectors are not a product of
//! per-level ranges; the combinatorial side tracks the joint counts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{GifsError, Result};
use crate::metric::{diameter, CompactNet};

use super::ifs::DEFAULT_TUPLE_CAP;
use super::inf::{map_image, GifsInfMap, InfMapKind, Located, TuplePolicy};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImageCheck {
    /// Tuple policy used for the brute-force side.
    pub policy: TuplePolicy,
    pub brute: BTreeSet<Address>,
    pub combinatorial: BTreeSet<Address>,
    /// Size of the per-level product of reachable digits, an outer bound.
    pub per_level_product: u128,
    pub equal: bool,
}

/// Compares the brute-force image of `K_1 × K_2 × ...` under `f` with the
/// reachable-count description. `ks[m]` is the set for entry `m + 1`; the
/// list must cover the read window.
pub fn check_image_characterization(f: &GifsInfMap, ks: &[CompactNet]) -> Result<ImageCheck> {
    if matches!(f.kind(), InfMapKind::Constant { .. }) {
        return Err(GifsError::Unsupported("constant maps have no address image".into()));
    }
    let dom = f.domain();
    let tree = dom.tree();
    let w = f.consumption().entries;
    if ks.len() < w {
        return Err(GifsError::InsufficientInput(format!(
            "the map reads {w} entries, got {} sets",
            ks.len()
        )));
    }
    // per-entry parity patterns restricted to the levels that entry feeds
    let mut patterns: Vec<BTreeSet<u64>> = Vec::with_capacity(w);
    for (m, k) in ks.iter().take(w).enumerate() {
        if k.is_empty() {
            return Err(GifsError::EmptySet);
        }
        let mask = f.level_mask(m + 1);
        let mut set = BTreeSet::new();
        for x in k.points() {
            match dom.locate(x)? {
                Located::Cell(r) => set.insert(dom.parity_bits(r) & mask),
                Located::Extra => return Err(GifsError::OutsideDomain(x.coords().to_vec())),
            };
        }
        patterns.push(set);
    }

    let tuples = ks
        .iter()
        .take(w)
        .fold(1u128, |acc, k| acc.saturating_mul(k.len() as u128));
    let policy = if tuples <= DEFAULT_TUPLE_CAP {
        TuplePolicy::Exhaustive {
            cap: DEFAULT_TUPLE_CAP,
        }
    } else {
        TuplePolicy::ReadView
    };
    let brute = map_image(f, &ks[..w.max(1)], policy)?
        .iter()
        .map(|x| tree.address_of_point(x))
        .collect::<Result<BTreeSet<_>>>()?;

    let combinatorial = reachable_outputs(f, &patterns)?;
    let per_level_product = per_level_product(f, &patterns);
    Ok(ImageCheck {
        policy,
        equal: brute == combinatorial,
        brute,
        combinatorial,
        per_level_product,
    })
}

/// Levels fed by the map, as `(bit index, entries read)`.
fn level_reads(f: &GifsInfMap) -> Vec<(usize, usize)> {
    let tree = f.domain().tree();
    let p = f.prefix().map_or(0, Address::len);
    (1..=tree.depth() - p)
        .map(|j| (j - 1, tree.profile().arity(j + p) as usize - 1))
        .collect()
}

fn reachable_outputs(f: &GifsInfMap, patterns: &[BTreeSet<u64>]) -> Result<BTreeSet<Address>> {
    let levels = level_reads(f);
    let mut states: BTreeSet<Vec<u32>> = BTreeSet::from([vec![0; levels.len()]]);
    for (m, options) in patterns.iter().enumerate() {
        let mut next = BTreeSet::new();
        for s in &states {
            for &pat in options {
                let mut t = s.clone();
                for (c, &(bit, reads)) in t.iter_mut().zip(&levels) {
                    if m < reads && pat >> bit & 1 == 1 {
                        *c += 1;
                    }
                }
                next.insert(t);
            }
        }
        states = next;
    }
    let prefix = f.prefix().expect("checked above");
    Ok(states
        .into_iter()
        .map(|counts| {
            let mut d = prefix.digits().to_vec();
            d.extend(counts.iter().map(|c| c + 1));
            Address::new(d)
        })
        .collect())
}

fn per_level_product(f: &GifsInfMap, patterns: &[BTreeSet<u64>]) -> u128 {
    level_reads(f)
        .into_iter()
        .map(|(bit, reads)| {
            // sums of independent {0,1}-or-fixed contributions form a range
            let (lo, hi) = patterns[..reads].iter().fold((0u128, 0u128), |(lo, hi), opts| {
                let odd = opts.iter().any(|p| p >> bit & 1 == 1);
                let even = opts.iter().any(|p| p >> bit & 1 == 0);
                (lo + u128::from(!even), hi + u128::from(odd))
            });
            hi - lo + 1
        })
        .product()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C1Check {
    pub image_diameter: f64,
    pub input_diameter: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `diam f(K_1 × K_2 × ...) <= Lip(f) diam(∪ K_k)`, with slack `1e-9`.
pub fn check_c1_boundedness(f: &GifsInfMap, ks: &[CompactNet], policy: TuplePolicy) -> Result<C1Check> {
    let first = ks.first().ok_or(GifsError::EmptySet)?;
    let union = ks[1..].iter().try_fold(first.clone(), |acc, k| acc.union(k))?;
    let image = CompactNet::exact(map_image(f, ks, policy)?)?;
    let image_diameter = diameter(&image);
    let input_diameter = diameter(&union);
    let bound = f.declared_bound() * input_diameter;
    Ok(C1Check {
        image_diameter,
        input_diameter,
        bound,
        holds: image_diameter <= bound + 1e-9,
    })
}
