//! Symbolic coding: arity profiles `(a_n)`, finite addresses, the indexing
//! function over odd numbers, and the parity-sum digit transformer that the
//! witnessing maps are built from.
//!
//! Digits are 1-based throughout: an address `(i_1, ..., i_k)` has
//! `1 <= i_j <= a_j`. Infinite addresses are represented by finite prefixes
//! with an implicit all-ones tail.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GifsError, Result};

/// The arity sequence `(a_1, ..., a_N)` of a balanced set.
///
/// Construction enforces `a_1 >= 2` and `a_{n+1} >= n * a_1 * ... * a_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct ArityProfile {
    arities: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    arities: Vec<u32>,
}

impl TryFrom<ProfileRepr> for ArityProfile {
    type Error = GifsError;
    fn try_from(r: ProfileRepr) -> Result<Self> {
        ArityProfile::new(r.arities)
    }
}

impl From<ArityProfile> for ProfileRepr {
    fn from(p: ArityProfile) -> Self {
        ProfileRepr { arities: p.arities }
    }
}

impl ArityProfile {
    pub fn new(arities: Vec<u32>) -> Result<Self> {
        let Some(&first) = arities.first() else {
            return Err(GifsError::InvalidProfile("profile needs at least one arity".into()));
        };
        if first < 2 {
            return Err(GifsError::InvalidProfile(format!("a_1 = {first} must be at least 2")));
        }
        let mut product: u128 = 1;
        for n in 1..arities.len() {
            product *= arities[n - 1] as u128;
            let needed = n as u128 * product;
            if (arities[n] as u128) < needed {
                return Err(GifsError::InvalidProfile(format!(
                    "a_{} = {} is below {} * a_1 * ... * a_{} = {}",
                    n + 1,
                    arities[n],
                    n,
                    n,
                    needed
                )));
            }
        }
        Ok(ArityProfile { arities })
    }

    /// The smallest admissible profile of the given depth: `(2, 2, 8, 96, ...)`.
    pub fn minimal(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(GifsError::InvalidProfile("depth must be at least 1".into()));
        }
        let mut arities = vec![2u32];
        let mut product: u64 = 2;
        for n in 1..depth {
            let next = n as u64 * product;
            let next = u32::try_from(next)
                .map_err(|_| GifsError::InvalidProfile(format!("arity overflow at depth {}", n + 1)))?;
            arities.push(next);
            product *= next as u64;
        }
        ArityProfile::new(arities)
    }

    pub fn depth(&self) -> usize {
        self.arities.len()
    }

    pub fn arities(&self) -> &[u32] {
        &self.arities
    }

    /// `a_k`, 1-based.
    pub fn arity(&self, k: usize) -> u32 {
        self.arities[k - 1]
    }

    /// `|I_k| = a_1 * ... * a_k`.
    pub fn count(&self, k: usize) -> usize {
        self.arities[..k].iter().map(|&a| a as usize).product()
    }

    /// Profile cut to its first `depth` arities.
    pub fn truncated(&self, depth: usize) -> Result<Self> {
        if depth == 0 || depth > self.depth() {
            return Err(GifsError::InvalidParameter(format!(
                "depth {depth} outside 1..={}",
                self.depth()
            )));
        }
        Ok(ArityProfile {
            arities: self.arities[..depth].to_vec(),
        })
    }

    /// Entries read when producing output digits `p+1 ..= out_len` with a
    /// prefix of length `p`: `max_j (a_{j+p} - 1)`.
    pub fn window_entries(&self, p: usize, out_len: usize) -> usize {
        (1..=out_len.saturating_sub(p))
            .map(|j| self.arity(j + p) as usize - 1)
            .max()
            .unwrap_or(0)
    }

    /// Digit levels `j` (1-based) at which input entry `m` (1-based) is read.
    pub fn levels_read(&self, p: usize, out_len: usize, m: usize) -> Vec<usize> {
        (1..=out_len.saturating_sub(p))
            .filter(|&j| m < self.arity(j + p) as usize)
            .collect()
    }
}

impl FromStr for ArityProfile {
    type Err = GifsError;
    fn from_str(s: &str) -> Result<Self> {
        let arities = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| GifsError::Parse(format!("bad arity {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ArityProfile::new(arities)
    }
}

/// A finite address `(i_1, ..., i_k)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(Vec<u32>);

impl Address {
    pub fn new(digits: Vec<u32>) -> Self {
        Address(digits)
    }

    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Digit `k`, 1-based.
    pub fn digit(&self, k: usize) -> u32 {
        self.0[k - 1]
    }

    pub fn prefix(&self, k: usize) -> Address {
        Address(self.0[..k].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, digit: u32) -> Address {
        let mut d = self.0.clone();
        d.push(digit);
        d.into()
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Address) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Extends to length `len` with trailing ones (the implicit tail).
    pub fn padded(&self, len: usize) -> Address {
        let mut d = self.0.clone();
        d.resize(len.max(d.len()), 1);
        Address(d)
    }

    /// Membership in `I_k` for `k = len`.
    pub fn validate(&self, profile: &ArityProfile) -> Result<()> {
        if self.len() > profile.depth() {
            return Err(GifsError::InvalidAddress {
                digits: self.0.clone(),
                reason: format!("longer than profile depth {}", profile.depth()),
            });
        }
        for (k, &d) in self.0.iter().enumerate() {
            if d == 0 || d > profile.arity(k + 1) {
                return Err(GifsError::InvalidAddress {
                    digits: self.0.clone(),
                    reason: format!("digit {} = {d} outside 1..={}", k + 1, profile.arity(k + 1)),
                });
            }
        }
        Ok(())
    }

    /// Lexicographic rank among the addresses of the same length.
    pub fn rank(&self, profile: &ArityProfile) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &d)| acc * profile.arity(k + 1) as usize + (d as usize - 1))
    }

    /// Inverse of [`Address::rank`].
    pub fn from_rank(profile: &ArityProfile, len: usize, mut rank: usize) -> Address {
        let mut digits = vec![0u32; len];
        for k in (0..len).rev() {
            let a = profile.arity(k + 1) as usize;
            digits[k] = (rank % a) as u32 + 1;
            rank /= a;
        }
        Address(digits)
    }

    /// Dotted form used as a JSON key, e.g. `"1.2.3"`.
    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse_key(s: &str) -> Result<Address> {
        if s.is_empty() {
            return Ok(Address::root());
        }
        s.split('.')
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|e| GifsError::Parse(format!("bad address key {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Address)
    }
}

impl From<Vec<u32>> for Address {
    fn from(d: Vec<u32>) -> Self {
        Address(d)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key().replace('.', ","))
    }
}

/// All addresses of length `k` in lexicographic order.
pub fn enumerate_addresses(profile: &ArityProfile, k: usize) -> Result<Vec<Address>> {
    if k == 0 || k > profile.depth() {
        return Err(GifsError::InvalidParameter(format!(
            "depth {k} outside 1..={}",
            profile.depth()
        )));
    }
    Ok((0..profile.count(k))
        .map(|r| Address::from_rank(profile, k, r))
        .collect())
}

/// A surjection from odd numbers onto the addresses of depth at most `N`,
/// with `Phi(n)` of length at most `n`. Even arguments are never assigned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, Address>", into = "BTreeMap<String, Address>")]
pub struct IndexingFunction {
    assignment: BTreeMap<u64, Address>,
}

// string keys survive buffered (tagged or flattened) deserialization
impl From<IndexingFunction> for BTreeMap<String, Address> {
    fn from(indexing: IndexingFunction) -> Self {
        indexing.assignment.into_iter().map(|(n, a)| (n.to_string(), a)).collect()
    }
}

impl TryFrom<BTreeMap<String, Address>> for IndexingFunction {
    type Error = GifsError;

    fn try_from(m: BTreeMap<String, Address>) -> Result<Self> {
        let assignment = m
            .into_iter()
            .map(|(k, a)| {
                k.parse::<u64>()
                    .map(|n| (n, a))
                    .map_err(|_| GifsError::Parse(format!("indexing key {k:?} is not a number")))
            })
            .collect::<Result<_>>()?;
        Ok(IndexingFunction { assignment })
    }
}

impl IndexingFunction {
    pub fn from_assignment(assignment: BTreeMap<u64, Address>) -> Self {
        IndexingFunction { assignment }
    }

    pub fn get(&self, n: u64) -> Option<&Address> {
        self.assignment.get(&n)
    }

    pub fn assignment(&self) -> &BTreeMap<u64, Address> {
        &self.assignment
    }

    /// Largest assigned odd number.
    pub fn max_index(&self) -> u64 {
        self.assignment.keys().next_back().copied().unwrap_or(0)
    }

    /// Checks oddness, `len(Phi(n)) <= n`, membership of every image, and
    /// surjectivity onto all addresses of depth `1..=N`.
    pub fn validate(&self, profile: &ArityProfile) -> Result<()> {
        for (&n, addr) in &self.assignment {
            if n % 2 == 0 {
                return Err(GifsError::IndexingConstraint(format!("even argument {n} assigned")));
            }
            if addr.is_empty() || addr.len() as u64 > n {
                return Err(GifsError::IndexingConstraint(format!(
                    "Phi({n}) = {addr:?} has length {} outside 1..={n}",
                    addr.len()
                )));
            }
            addr.validate(profile)
                .map_err(|e| GifsError::IndexingConstraint(e.to_string()))?;
        }
        let image: std::collections::BTreeSet<&Address> = self.assignment.values().collect();
        for k in 1..=profile.depth() {
            for a in enumerate_addresses(profile, k)? {
                if !image.contains(&a) {
                    return Err(GifsError::IndexingConstraint(format!("{a:?} is not in the image")));
                }
            }
        }
        Ok(())
    }
}

/// Assigns the m-th address of the length-then-lex enumeration of
/// `I_1 ∪ ... ∪ I_N` to the odd number `2m - 1`, then validates the result.
pub fn build_indexing_function(profile: &ArityProfile) -> Result<IndexingFunction> {
    let mut assignment = BTreeMap::new();
    let mut m: u64 = 1;
    for k in 1..=profile.depth() {
        for a in enumerate_addresses(profile, k)? {
            assignment.insert(2 * m - 1, a);
            m += 1;
        }
    }
    let indexing = IndexingFunction { assignment };
    indexing.validate(profile)?;
    Ok(indexing)
}

/// `(i, beta_1, ..., beta_{out_len-1})` with
/// `beta_j = 1 + sum_{m=1}^{a_{j+1}-1} (alpha_m^(j) mod 2)`.
pub fn digit_transform(
    first: u32,
    inputs: &[Address],
    profile: &ArityProfile,
    out_len: usize,
) -> Result<Address> {
    transform_with_prefix(&Address::new(vec![first]), inputs, profile, out_len)
}

/// Prefix-`p` form of [`digit_transform`]: the output is
/// `(prefix, beta_1, ..., beta_{out_len-p})` with `beta_j` summing the parity
/// of digit `j` over the first `a_{j+p} - 1` inputs.
pub fn transform_with_prefix(
    prefix: &Address,
    inputs: &[Address],
    profile: &ArityProfile,
    out_len: usize,
) -> Result<Address> {
    let p = prefix.len();
    if p == 0 || out_len < p || out_len > profile.depth() {
        return Err(GifsError::InvalidParameter(format!(
            "output length {out_len} incompatible with prefix length {p} and depth {}",
            profile.depth()
        )));
    }
    prefix.validate(profile)?;
    let mut digits = prefix.digits().to_vec();
    for j in 1..=out_len - p {
        let used = profile.arity(j + p) as usize - 1;
        if inputs.len() < used {
            return Err(GifsError::InsufficientInput(format!(
                "digit {} needs {used} inputs, got {}",
                j + p,
                inputs.len()
            )));
        }
        let mut odd = 0u32;
        for (m, alpha) in inputs[..used].iter().enumerate() {
            if alpha.len() < j {
                return Err(GifsError::InsufficientInput(format!(
                    "input {} has length {}, digit {j} is needed",
                    m + 1,
                    alpha.len()
                )));
            }
            let d = alpha.digit(j);
            if d == 0 || d > profile.arity(j) {
                return Err(GifsError::InvalidAddress {
                    digits: alpha.digits().to_vec(),
                    reason: format!("digit {j} = {d} outside 1..={}", profile.arity(j)),
                });
            }
            odd += d % 2;
        }
        digits.push(1 + odd);
    }
    Ok(Address(digits))
}

/// A first digit and inputs that [`digit_transform`] maps onto `target`:
/// input `j` has digit `k` equal to 1 when `j < i_{k+1}` and 2 otherwise.
pub fn preimage_witness(target: &Address, profile: &ArityProfile) -> Result<(u32, Vec<Address>)> {
    if target.is_empty() {
        return Err(GifsError::InvalidParameter("target must have length at least 1".into()));
    }
    let inputs = preimage_with_prefix(target, 1, profile)?;
    Ok((target.digit(1), inputs))
}

/// Inputs for the prefix-`p` transformer `f_(t_1..t_p)` reaching `target`.
pub fn preimage_with_prefix(target: &Address, p: usize, profile: &ArityProfile) -> Result<Vec<Address>> {
    target.validate(profile)?;
    if p == 0 || p > target.len() {
        return Err(GifsError::InvalidParameter(format!(
            "prefix length {p} outside 1..={}",
            target.len()
        )));
    }
    let levels = target.len() - p;
    let count = profile.window_entries(p, target.len()).max(1);
    Ok((1..=count)
        .map(|j| {
            Address::new(
                (1..=levels)
                    .map(|k| if j < target.digit(k + p) as usize { 1 } else { 2 })
                    .collect(),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> ArityProfile {
        ArityProfile::new(vec![2, 2, 8]).unwrap()
    }

    fn addr(d: &[u32]) -> Address {
        Address::new(d.to_vec())
    }

    #[test]
    fn profile_growth_condition() {
        assert!(ArityProfile::new(vec![2, 2, 8, 96]).is_ok());
        assert!(ArityProfile::new(vec![1, 2]).is_err());
        assert!(ArityProfile::new(vec![2, 1, 8]).is_err());
        assert!(ArityProfile::new(vec![2, 2, 7]).is_err());
        assert!(ArityProfile::new(vec![]).is_err());
        assert_eq!(ArityProfile::minimal(4).unwrap().arities(), &[2, 2, 8, 96]);
        assert_eq!("2,2,8".parse::<ArityProfile>().unwrap(), profile());
    }

    #[test]
    fn enumeration_counts() {
        let p = profile();
        assert_eq!(enumerate_addresses(&p, 1).unwrap(), vec![addr(&[1]), addr(&[2])]);
        assert_eq!(
            enumerate_addresses(&p, 2).unwrap(),
            vec![addr(&[1, 1]), addr(&[1, 2]), addr(&[2, 1]), addr(&[2, 2])]
        );
        assert_eq!(enumerate_addresses(&p, 3).unwrap().len(), 32);
        assert!(enumerate_addresses(&p, 0).is_err());
        assert!(enumerate_addresses(&p, 4).is_err());
    }

    #[test]
    fn rank_round_trip() {
        let p = profile();
        for (r, a) in enumerate_addresses(&p, 3).unwrap().iter().enumerate() {
            assert_eq!(a.rank(&p), r);
            assert_eq!(Address::from_rank(&p, 3, r), *a);
        }
    }

    #[test]
    fn indexing_function_examples() {
        let indexing = build_indexing_function(&profile()).unwrap();
        assert_eq!(indexing.get(1), Some(&addr(&[1])));
        assert_eq!(indexing.get(3), Some(&addr(&[2])));
        assert_eq!(indexing.get(5), Some(&addr(&[1, 1])));
        assert_eq!(indexing.get(2), None);
        // 2 + 4 addresses of depth <= 2 sit at 1, 3, ..., 11
        let shallow: Vec<_> = (0..6).map(|m| indexing.get(2 * m + 1).unwrap().len()).collect();
        assert!(shallow.iter().all(|&l| l <= 2));
        assert_eq!(indexing.get(13).unwrap().len(), 3);
        for (&n, a) in indexing.assignment() {
            assert!(a.len() as u64 <= n);
        }
    }

    #[test]
    fn indexing_validation_catches_long_images() {
        let mut bad = build_indexing_function(&profile()).unwrap().assignment().clone();
        bad.insert(1, addr(&[1, 1]));
        assert!(IndexingFunction::from_assignment(bad).validate(&profile()).is_err());
    }

    #[test]
    fn transform_examples() {
        let p = profile();
        let first_odd = vec![addr(&[1, 2])];
        assert_eq!(digit_transform(1, &first_odd, &p, 2).unwrap(), addr(&[1, 2]));

        let even = vec![addr(&[2, 2]); 7];
        assert_eq!(digit_transform(2, &even, &p, 3).unwrap(), addr(&[2, 1, 1]));

        let mixed: Vec<Address> = [1, 1, 2, 2, 2, 2, 2].iter().map(|&d| addr(&[2, d])).collect();
        assert_eq!(digit_transform(1, &mixed, &p, 3).unwrap().digit(3), 3);
    }

    #[test]
    fn transform_reports_insufficient_input() {
        let p = profile();
        assert!(matches!(
            digit_transform(1, &[addr(&[1, 1])], &p, 3),
            Err(GifsError::InsufficientInput(_))
        ));
        assert!(matches!(
            digit_transform(1, &vec![addr(&[1]); 7], &p, 3),
            Err(GifsError::InsufficientInput(_))
        ));
        assert!(digit_transform(3, &vec![addr(&[1, 1]); 7], &p, 3).is_err());
    }

    #[test]
    fn preimage_example() {
        let p = profile();
        let (i, alphas) = preimage_witness(&addr(&[2, 1, 3]), &p).unwrap();
        assert_eq!(i, 2);
        assert_eq!(alphas.len(), 7);
        assert!(alphas.iter().all(|a| a.digit(1) == 2));
        let second: Vec<u32> = alphas.iter().map(|a| a.digit(2)).collect();
        assert_eq!(second, vec![1, 1, 2, 2, 2, 2, 2]);
        assert_eq!(digit_transform(i, &alphas, &p, 3).unwrap(), addr(&[2, 1, 3]));
    }

    #[test]
    fn preimage_of_all_ones_uses_even_digits() {
        let p = profile();
        let (_, alphas) = preimage_witness(&addr(&[1, 1, 1]), &p).unwrap();
        assert!(alphas.iter().all(|a| a.digits().iter().all(|&d| d == 2)));
    }

    #[test]
    fn round_trip_on_every_depth_three_target() {
        let p = profile();
        for target in enumerate_addresses(&p, 3).unwrap() {
            let (i, alphas) = preimage_witness(&target, &p).unwrap();
            assert_eq!(digit_transform(i, &alphas, &p, 3).unwrap(), target);
        }
    }

    #[test]
    fn beta_digits_stay_in_range() {
        // every parity pattern of the 7 inputs at depth 3
        let p = profile();
        for first_digits in 0..4u32 {
            for mask in 0..(1u32 << 7) {
                let inputs: Vec<Address> = (0..7)
                    .map(|m| {
                        let d1 = if m == 0 { 1 + (first_digits & 1) } else { 1 };
                        let d2 = if mask >> m & 1 == 1 { 1 } else { 2 };
                        addr(&[d1, d2])
                    })
                    .collect();
                let out = digit_transform(1 + (first_digits >> 1), &inputs, &p, 3).unwrap();
                out.validate(&p).unwrap();
            }
        }
    }

    #[test]
    fn window_and_levels() {
        let p = profile();
        assert_eq!(p.window_entries(1, 3), 7);
        assert_eq!(p.levels_read(1, 3, 1), vec![1, 2]);
        assert_eq!(p.levels_read(1, 3, 2), vec![2]);
        assert_eq!(p.window_entries(2, 3), 7);
        assert_eq!(p.levels_read(2, 3, 7), vec![1]);
    }

    #[test]
    fn key_round_trip() {
        let a = addr(&[1, 12, 3]);
        assert_eq!(a.key(), "1.12.3");
        assert_eq!(Address::parse_key("1.12.3").unwrap(), a);
        assert!(Address::parse_key("1.x").is_err());
    }
}
