//! GIFS of infinite order on a balanced set `K` (optionally joined with a
//! finite set `P`), and the Hutchinson operator over finitely read tuples.
//!
//! Every map reads a fixed window of leading sequence entries, at a fixed
//! digit depth, and ignores the rest (piecewise maps also look at whether the
//! tail leaves `K`). Tuples are enumerated over that window only; entries
//! past it are filled with a constant tail.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::address::{transform_with_prefix, Address};
use crate::balanced::CellTree;
use crate::error::{GifsError, Result};
use crate::metric::{BoundedSeq, CompactNet, Point, TailRule};

use super::ifs::DEFAULT_TUPLE_CAP;

/// Where a point of the domain lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Located {
    /// Inside the leaf cell of the given rank.
    Cell(usize),
    /// One of the extra points `P`.
    Extra,
}

/// The balanced set embedded on the first axis of `R^dim`, plus an optional
/// finite set `P` disjoint from it.
#[derive(Debug)]
pub struct TreeDomain {
    tree: CellTree,
    dim: usize,
    extra: Option<CompactNet>,
    knet: CompactNet,
    leaves: Vec<Point>,
    parity: Vec<u64>,
}

impl TreeDomain {
    pub fn new(tree: CellTree, dim: usize, extra: Option<CompactNet>) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(GifsError::InvalidParameter("dimension must be at least 1".into()));
        }
        if tree.depth() > 64 {
            return Err(GifsError::Unsupported("trees deeper than 64 levels".into()));
        }
        if let Some(p) = &extra {
            if p.dim() != dim {
                return Err(GifsError::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if let Some(x) = p.points().iter().find(|x| {
                x.coords()[1..].iter().all(|&c| c == 0.0) && tree.leaf_rank_of_scalar(x.x()).is_some()
            }) {
                return Err(GifsError::InvalidParameter(format!(
                    "extra point {x:?} lies in a cell of K"
                )));
            }
        }
        let n = tree.depth();
        let profile = tree.profile().clone();
        let leaves: Vec<Point> = tree
            .cells_at(n)
            .iter()
            .map(|c| Point::on_first_axis(c.lo, dim))
            .collect();
        let parity = (0..leaves.len())
            .map(|r| {
                Address::from_rank(&profile, n, r)
                    .digits()
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, d)| acc | (((d % 2) as u64) << j))
            })
            .collect();
        let knet = tree.materialize_net_in(n, dim)?;
        Ok(Arc::new(TreeDomain {
            tree,
            dim,
            extra,
            knet,
            leaves,
            parity,
        }))
    }

    pub fn tree(&self) -> &CellTree {
        &self.tree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extra(&self) -> Option<&CompactNet> {
        self.extra.as_ref()
    }

    /// Depth-`N` net of `K`, one point per leaf.
    pub fn knet(&self) -> &CompactNet {
        &self.knet
    }

    /// `K`-net joined with `P`.
    pub fn full_net(&self) -> Result<CompactNet> {
        match &self.extra {
            Some(p) => Ok(self.knet.union(&p.clone().with_resolution(0.0))?),
            None => Ok(self.knet.clone()),
        }
    }

    /// Leaf representatives in rank order.
    pub fn leaves(&self) -> &[Point] {
        &self.leaves
    }

    /// Bit `j-1` is set when digit `j` of the leaf address is odd.
    pub fn parity_bits(&self, rank: usize) -> u64 {
        self.parity[rank]
    }

    pub fn locate(&self, x: &Point) -> Result<Located> {
        if x.dim() != self.dim {
            return Err(GifsError::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        if x.coords()[1..].iter().all(|&c| c == 0.0) {
            if let Some(r) = self.tree.leaf_rank_of_scalar(x.x()) {
                return Ok(Located::Cell(r));
            }
        }
        if self.extra.as_ref().is_some_and(|p| p.contains(x)) {
            return Ok(Located::Extra);
        }
        Err(GifsError::OutsideDomain(x.coords().to_vec()))
    }

    /// Representative of the leaf below `addr` padded with ones.
    pub fn point_of(&self, addr: &Address) -> Result<Point> {
        self.tree.representative_point(addr, self.dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfMapKind {
    /// `(x_a1, x_a2, ...) -> x_(prefix, beta_1, beta_2, ...)`.
    AddressTransformer { prefix: Address },
    /// The transformer on `l_inf(K)`, and its value at the constant anchor
    /// sequence whenever some entry lies in `P`.
    Piecewise { prefix: Address },
    Constant { point: Point },
    /// Per-coordinate McShane extension of the transformer to `l_inf(R^n)`
    /// with coordinate constant `coordinate_bound`.
    Extended { prefix: Address, coordinate_bound: f64 },
}

/// How many leading entries a map reads and to what digit depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Consumption {
    pub entries: usize,
    pub digit_depth: usize,
    pub reads_tail: bool,
}

#[derive(Clone, Debug)]
pub struct GifsInfMap {
    kind: InfMapKind,
    declared_bound: f64,
    domain: Arc<TreeDomain>,
}

impl GifsInfMap {
    /// Transformer with declared bound `q^-p`.
    pub fn transformer(domain: &Arc<TreeDomain>, prefix: Address) -> Result<Self> {
        let bound = prefix_bound(domain, &prefix)?;
        Ok(GifsInfMap {
            kind: InfMapKind::AddressTransformer { prefix },
            declared_bound: bound,
            domain: domain.clone(),
        })
    }

    pub fn piecewise(domain: &Arc<TreeDomain>, prefix: Address, declared_bound: f64) -> Result<Self> {
        prefix_bound(domain, &prefix)?;
        GifsInfMap::from_kind(domain, InfMapKind::Piecewise { prefix }, declared_bound)
    }

    pub fn constant(domain: &Arc<TreeDomain>, point: Point) -> Result<Self> {
        GifsInfMap::from_kind(domain, InfMapKind::Constant { point }, 0.0)
    }

    /// Extension with coordinate constant `q^-p` and declared bound
    /// `sqrt(n) q^-p`.
    pub fn extended(domain: &Arc<TreeDomain>, prefix: Address) -> Result<Self> {
        let l = prefix_bound(domain, &prefix)?;
        let declared = (domain.dim as f64).sqrt() * l;
        GifsInfMap::from_kind(
            domain,
            InfMapKind::Extended {
                prefix,
                coordinate_bound: l,
            },
            declared,
        )
    }

    /// Generic constructor, used when loading descriptions.
    pub fn from_kind(domain: &Arc<TreeDomain>, kind: InfMapKind, declared_bound: f64) -> Result<Self> {
        if !declared_bound.is_finite() || declared_bound < 0.0 {
            return Err(GifsError::InvalidParameter(format!(
                "declared bound {declared_bound} must be finite and nonnegative"
            )));
        }
        match &kind {
            InfMapKind::AddressTransformer { prefix }
            | InfMapKind::Piecewise { prefix }
            | InfMapKind::Extended { prefix, .. } => {
                prefix_bound(domain, prefix)?;
            }
            InfMapKind::Constant { point } => {
                if point.dim() != domain.dim {
                    return Err(GifsError::DimensionMismatch {
                        expected: domain.dim,
                        found: point.dim(),
                    });
                }
            }
        }
        Ok(GifsInfMap {
            kind,
            declared_bound,
            domain: domain.clone(),
        })
    }

    pub fn kind(&self) -> &InfMapKind {
        &self.kind
    }

    pub fn declared_bound(&self) -> f64 {
        self.declared_bound
    }

    pub fn domain(&self) -> &Arc<TreeDomain> {
        &self.domain
    }

    pub fn prefix(&self) -> Option<&Address> {
        match &self.kind {
            InfMapKind::AddressTransformer { prefix }
            | InfMapKind::Piecewise { prefix }
            | InfMapKind::Extended { prefix, .. } => Some(prefix),
            InfMapKind::Constant { .. } => None,
        }
    }

    pub fn consumption(&self) -> Consumption {
        let n = self.domain.tree.depth();
        match &self.kind {
            InfMapKind::Constant { .. } => Consumption {
                entries: 0,
                digit_depth: 0,
                reads_tail: false,
            },
            InfMapKind::AddressTransformer { prefix }
            | InfMapKind::Piecewise { prefix }
            | InfMapKind::Extended { prefix, .. } => {
                let p = prefix.len();
                Consumption {
                    entries: self.domain.tree.profile().window_entries(p, n),
                    digit_depth: n - p,
                    reads_tail: !matches!(self.kind, InfMapKind::AddressTransformer { .. }),
                }
            }
        }
    }

    /// Bitmask of digit levels (bit `j-1` for level `j`) read from entry `m`.
    pub fn level_mask(&self, m: usize) -> u64 {
        match self.prefix() {
            None => 0,
            Some(prefix) => {
                let n = self.domain.tree.depth();
                self.domain
                    .tree
                    .profile()
                    .levels_read(prefix.len(), n, m)
                    .into_iter()
                    .fold(0, |acc, j| acc | 1 << (j - 1))
            }
        }
    }

    /// Output address of the transformer part for the given leaf ranks of the
    /// read entries.
    pub fn output_address(&self, ranks: &[usize]) -> Result<Address> {
        let prefix = self
            .prefix()
            .ok_or_else(|| GifsError::Unsupported("constant maps have no address output".into()))?;
        let tree = &self.domain.tree;
        let inputs: Vec<Address> = ranks
            .iter()
            .map(|&r| Address::from_rank(tree.profile(), tree.depth(), r))
            .collect();
        transform_with_prefix(prefix, &inputs, tree.profile(), tree.depth())
    }

    /// Output address for entries given by parity patterns (bit `j-1` for
    /// level `j`); only the parity of each digit matters.
    pub fn output_from_parities(&self, patterns: &[u64]) -> Result<Address> {
        let prefix = self
            .prefix()
            .ok_or_else(|| GifsError::Unsupported("constant maps have no address output".into()))?;
        let tree = &self.domain.tree;
        let profile = tree.profile();
        let p = prefix.len();
        let mut digits = prefix.digits().to_vec();
        for j in 1..=tree.depth() - p {
            let used = profile.arity(j + p) as usize - 1;
            if patterns.len() < used {
                return Err(GifsError::InsufficientInput(format!(
                    "level {j} reads {used} entries, got {}",
                    patterns.len()
                )));
            }
            let odd = patterns[..used].iter().filter(|&&b| b >> (j - 1) & 1 == 1).count();
            digits.push(1 + odd as u32);
        }
        Ok(Address::new(digits))
    }

    fn anchor_output(&self) -> Result<Address> {
        let w = self.consumption().entries;
        self.output_address(&vec![0; w])
    }
}

fn prefix_bound(domain: &TreeDomain, prefix: &Address) -> Result<f64> {
    let tree = &domain.tree;
    if prefix.is_empty() || prefix.len() > tree.depth() {
        return Err(GifsError::InvalidParameter(format!(
            "prefix length {} outside 1..={}",
            prefix.len(),
            tree.depth()
        )));
    }
    prefix.validate(tree.profile())?;
    Ok(tree.q().powi(-(prefix.len() as i32)))
}

/// Evaluates `f` at a sequence whose entries lie in the domain.
pub fn apply_inf_map(f: &GifsInfMap, s: &BoundedSeq) -> Result<Point> {
    let dom = &f.domain;
    if s.dim() != dom.dim {
        return Err(GifsError::DimensionMismatch {
            expected: dom.dim,
            found: s.dim(),
        });
    }
    let w = f.consumption().entries;
    match &f.kind {
        InfMapKind::Constant { point } => Ok(point.clone()),
        InfMapKind::AddressTransformer { .. } => {
            let ranks = (0..w)
                .map(|m| match dom.locate(s.get(m))? {
                    Located::Cell(r) => Ok(r),
                    Located::Extra => Err(GifsError::OutsideDomain(s.get(m).coords().to_vec())),
                })
                .collect::<Result<Vec<_>>>()?;
            dom.point_of(&f.output_address(&ranks)?)
        }
        InfMapKind::Piecewise { .. } => {
            let mut ranks = Vec::with_capacity(w);
            let mut leaves_k = false;
            for m in 0..s.depth().max(w) {
                match dom.locate(s.get(m))? {
                    Located::Cell(r) if m < w => ranks.push(r),
                    Located::Cell(_) => {}
                    Located::Extra => leaves_k = true,
                }
            }
            if dom.locate(s.tail_point())? == Located::Extra {
                leaves_k = true;
            }
            let out = if leaves_k {
                f.anchor_output()?
            } else {
                f.output_address(&ranks)?
            };
            dom.point_of(&out)
        }
        InfMapKind::Extended { .. } => crate::lipschitz::extended_transformer_value(f, s),
    }
}

/// Tuple enumeration strategy for the Hutchinson operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuplePolicy {
    /// `ReadView` for maps on the domain, `AnchorNearest` for extended maps.
    Auto,
    /// One representative per class of points that the map cannot tell
    /// apart (same parity pattern at the levels read from that entry). Exact.
    ReadView,
    /// Every tuple over the read window, refused above `cap`.
    Exhaustive { cap: u128 },
    /// Per entry and per parity class of the `K`-net, the input point
    /// nearest to that class.
    AnchorNearest,
}

/// Candidate points per read slot plus candidate tail points; tuples are the
/// full product.
struct TupleGrid {
    slots: Vec<Vec<Point>>,
    tails: Vec<Point>,
}

impl TupleGrid {
    fn total(&self) -> u128 {
        self.slots
            .iter()
            .fold(self.tails.len() as u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }

    fn tuple(&self, mut idx: usize) -> Result<BoundedSeq> {
        let mut entries = Vec::with_capacity(self.slots.len().max(1));
        for s in &self.slots {
            entries.push(s[idx % s.len()].clone());
            idx /= s.len();
        }
        let tail = self.tails[idx % self.tails.len()].clone();
        if entries.is_empty() {
            entries.push(tail.clone());
        }
        BoundedSeq::new(entries, TailRule::Constant(tail))
    }
}

fn class_key(f: &GifsInfMap, m: usize, loc: Located) -> u64 {
    match loc {
        Located::Cell(r) => f.domain.parity[r] & f.level_mask(m),
        Located::Extra => u64::MAX,
    }
}

fn first_per_key<I: Iterator<Item = (u64, Point)>>(items: I) -> Vec<Point> {
    let mut seen: BTreeMap<u64, Point> = BTreeMap::new();
    for (k, p) in items {
        seen.entry(k).or_insert(p);
    }
    seen.into_values().collect()
}

fn build_grid(f: &GifsInfMap, sets: &[CompactNet], policy: TuplePolicy) -> Result<TupleGrid> {
    if sets.is_empty() {
        return Err(GifsError::EmptySet);
    }
    let w = f.consumption().entries;
    let set_for = |m: usize| &sets[m.min(sets.len()) - 1];
    let policy = match policy {
        TuplePolicy::Auto if matches!(f.kind, InfMapKind::Extended { .. }) => TuplePolicy::AnchorNearest,
        TuplePolicy::Auto => TuplePolicy::ReadView,
        p => p,
    };
    let tail_set = set_for(w + 1);
    match policy {
        TuplePolicy::Exhaustive { .. } => Ok(TupleGrid {
            slots: (1..=w).map(|m| set_for(m).points().to_vec()).collect(),
            tails: if f.consumption().reads_tail {
                tail_set.points().to_vec()
            } else {
                vec![tail_set.points()[0].clone()]
            },
        }),
        TuplePolicy::ReadView => {
            let mut slots = Vec::with_capacity(w);
            for m in 1..=w {
                let items = set_for(m)
                    .points()
                    .iter()
                    .map(|x| Ok((class_key(f, m, f.domain.locate(x)?), x.clone())))
                    .collect::<Result<Vec<_>>>()?;
                slots.push(first_per_key(items.into_iter()));
            }
            let tails = if f.consumption().reads_tail {
                let items = tail_set
                    .points()
                    .iter()
                    .map(|x| Ok(((f.domain.locate(x)? == Located::Extra) as u64, x.clone())))
                    .collect::<Result<Vec<_>>>()?;
                first_per_key(items.into_iter())
            } else {
                vec![tail_set.points()[0].clone()]
            };
            Ok(TupleGrid { slots, tails })
        }
        TuplePolicy::AnchorNearest => {
            let dom = &f.domain;
            let mut slots = Vec::with_capacity(w);
            for m in 1..=w {
                let mask = f.level_mask(m);
                let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
                for r in 0..dom.leaves.len() {
                    groups.entry(dom.parity[r] & mask).or_default().push(r);
                }
                let cands = set_for(m).points();
                let mut picks: Vec<Point> = groups
                    .values()
                    .map(|members| {
                        nearest(cands, |x| {
                            members
                                .iter()
                                .map(|&r| x.distance(&dom.leaves[r]))
                                .fold(f64::INFINITY, f64::min)
                        })
                    })
                    .collect();
                picks.sort();
                picks.dedup();
                slots.push(picks);
            }
            let tail = nearest(tail_set.points(), |x| {
                dom.leaves.iter().map(|y| x.distance(y)).fold(f64::INFINITY, f64::min)
            });
            Ok(TupleGrid {
                slots,
                tails: vec![tail],
            })
        }
        TuplePolicy::Auto => unreachable!("resolved above"),
    }
}

fn nearest(cands: &[Point], dist: impl Fn(&Point) -> f64) -> Point {
    let mut best = (f64::INFINITY, 0);
    for (i, x) in cands.iter().enumerate() {
        let d = dist(x);
        if d < best.0 {
            best = (d, i);
        }
    }
    cands[best.1].clone()
}

/// All tuples generated by `policy`, materialized.
pub(crate) fn policy_tuples(f: &GifsInfMap, sets: &[CompactNet], policy: TuplePolicy) -> Result<Vec<BoundedSeq>> {
    let grid = build_grid(f, sets, policy)?;
    let total = grid.total();
    if total > DEFAULT_TUPLE_CAP {
        return Err(GifsError::TupleExplosion {
            needed: total,
            cap: DEFAULT_TUPLE_CAP,
        });
    }
    (0..total as usize).map(|i| grid.tuple(i)).collect()
}

/// Image of `f` over tuples whose `m`-th entry ranges over `sets[m-1]` (the
/// last set repeats), as generated by `policy`.
pub fn map_image(f: &GifsInfMap, sets: &[CompactNet], policy: TuplePolicy) -> Result<Vec<Point>> {
    if let InfMapKind::Constant { point } = &f.kind {
        return Ok(vec![point.clone()]);
    }
    let grid = build_grid(f, sets, policy)?;
    let total = grid.total();
    let cap = match policy {
        TuplePolicy::Exhaustive { cap } => cap,
        _ => DEFAULT_TUPLE_CAP,
    };
    if total > cap {
        return Err(GifsError::TupleExplosion { needed: total, cap });
    }
    let mut out = (0..total as usize)
        .into_par_iter()
        .map(|i| apply_inf_map(f, &grid.tuple(i)?))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct GifsInfSystem {
    maps: Vec<GifsInfMap>,
    domain: Arc<TreeDomain>,
}

impl GifsInfSystem {
    pub fn new(domain: Arc<TreeDomain>, maps: Vec<GifsInfMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(GifsError::InvalidParameter("a system needs at least one map".into()));
        }
        if maps.iter().any(|m| !Arc::ptr_eq(&m.domain, &domain)) {
            return Err(GifsError::InvalidParameter("all maps must share the system domain".into()));
        }
        if let Some(m) = maps.iter().find(|m| m.declared_bound >= 1.0) {
            return Err(GifsError::NonContractive(m.declared_bound));
        }
        Ok(GifsInfSystem { maps, domain })
    }

    pub fn maps(&self) -> &[GifsInfMap] {
        &self.maps
    }

    pub fn domain(&self) -> &Arc<TreeDomain> {
        &self.domain
    }

    pub fn contraction(&self) -> f64 {
        self.maps.iter().map(|m| m.declared_bound).fold(0.0, f64::max)
    }
}

/// `S -> ∪_i f_i(S × S × ...)`. Images are finite, so no closure is taken.
/// Output resolution is `b_N + c * resolution(S)`.
pub fn hutchinson_step_inf(sys: &GifsInfSystem, s: &CompactNet, policy: TuplePolicy) -> Result<CompactNet> {
    let sets = std::slice::from_ref(s);
    let images = sys
        .maps
        .iter()
        .map(|f| map_image(f, sets, policy))
        .collect::<Result<Vec<_>>>()?;
    let tree = sys.domain.tree();
    CompactNet::new(
        images.into_iter().flatten().collect(),
        tree.diam_bound(tree.depth()) + sys.contraction() * s.resolution(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::{digit_transform, enumerate_addresses, ArityProfile};
    use crate::balanced::build_balanced_set;
    use crate::metric::Interval;

    fn domain() -> Arc<TreeDomain> {
        let tree = build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8]).unwrap(), Interval::new(0.0, 1.0))
            .unwrap();
        TreeDomain::new(tree, 1, None).unwrap()
    }

    fn addr(d: &[u32]) -> Address {
        Address::new(d.to_vec())
    }

    #[test]
    fn consumption_contract() {
        let dom = domain();
        let f = GifsInfMap::transformer(&dom, addr(&[1])).unwrap();
        assert_eq!(
            f.consumption(),
            Consumption {
                entries: 7,
                digit_depth: 2,
                reads_tail: false
            }
        );
        assert_eq!(f.declared_bound(), 0.5);
        assert_eq!(f.level_mask(1), 0b11);
        assert_eq!(f.level_mask(2), 0b10);
        let g = GifsInfMap::transformer(&dom, addr(&[1, 2])).unwrap();
        assert_eq!(g.consumption().entries, 7);
        assert_eq!(g.declared_bound(), 0.25);
    }

    #[test]
    fn all_even_entries_give_all_ones() {
        let dom = domain();
        let f = GifsInfMap::transformer(&dom, addr(&[1])).unwrap();
        let x = dom.point_of(&addr(&[2, 2, 2])).unwrap();
        let out = apply_inf_map(&f, &BoundedSeq::constant(x)).unwrap();
        assert_eq!(out, dom.point_of(&addr(&[1, 1, 1])).unwrap());
    }

    #[test]
    fn odd_first_entry_sets_second_digit() {
        let dom = domain();
        let f = GifsInfMap::transformer(&dom, addr(&[1])).unwrap();
        let mut entries = vec![dom.point_of(&addr(&[1, 2, 1])).unwrap()];
        entries.extend(vec![dom.point_of(&addr(&[2, 2, 1])).unwrap(); 6]);
        let out = apply_inf_map(&f, &BoundedSeq::repeat_last(entries).unwrap()).unwrap();
        let a = dom.tree().address_of_point(&out).unwrap();
        assert_eq!(a.prefix(2), addr(&[1, 2]));
    }

    #[test]
    fn apply_matches_digit_transform_exhaustively() {
        // every leaf as entry 1 combined with every leaf as the other entries
        let dom = domain();
        let p = dom.tree().profile().clone();
        let leaves = enumerate_addresses(&p, 3).unwrap();
        for i in 1..=2 {
            let f = GifsInfMap::transformer(&dom, addr(&[i])).unwrap();
            for a in &leaves {
                for b in &leaves {
                    let inputs: Vec<Address> = std::iter::once(a.clone()).chain(vec![b.clone(); 6]).collect();
                    let entries = inputs.iter().map(|x| dom.point_of(x).unwrap()).collect();
                    let out = apply_inf_map(&f, &BoundedSeq::repeat_last(entries).unwrap()).unwrap();
                    let expect = digit_transform(i, &inputs, &p, 3).unwrap();
                    assert_eq!(dom.tree().address_of_point(&out).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn witness_step_fixes_net() {
        let dom = domain();
        let maps = (1..=2).map(|i| GifsInfMap::transformer(&dom, addr(&[i])).unwrap()).collect();
        let sys = GifsInfSystem::new(dom.clone(), maps).unwrap();
        let out = hutchinson_step_inf(&sys, dom.knet(), TuplePolicy::Auto).unwrap();
        assert!(out.same_points(dom.knet()));
    }

    #[test]
    fn single_point_step_counts() {
        let dom = domain();
        let maps = (1..=2).map(|i| GifsInfMap::transformer(&dom, addr(&[i])).unwrap()).collect();
        let sys = GifsInfSystem::new(dom.clone(), maps).unwrap();
        let s = CompactNet::exact(vec![dom.leaves()[5].clone()]).unwrap();
        assert!(hutchinson_step_inf(&sys, &s, TuplePolicy::Auto).unwrap().len() <= 2);
    }

    #[test]
    fn constant_only_system() {
        let dom = domain();
        let c = GifsInfMap::constant(&dom, Point::scalar(0.0)).unwrap();
        let sys = GifsInfSystem::new(dom.clone(), vec![c]).unwrap();
        let out = hutchinson_step_inf(&sys, dom.knet(), TuplePolicy::Auto).unwrap();
        assert_eq!(out.points(), &[Point::scalar(0.0)]);
    }

    #[test]
    fn read_view_equals_exhaustive_on_small_sets() {
        let dom = domain();
        let f = GifsInfMap::transformer(&dom, addr(&[2])).unwrap();
        let s = CompactNet::exact(vec![dom.leaves()[0].clone(), dom.leaves()[9].clone(), dom.leaves()[30].clone()])
            .unwrap();
        let a = map_image(&f, std::slice::from_ref(&s), TuplePolicy::ReadView).unwrap();
        let b = map_image(
            &f,
            std::slice::from_ref(&s),
            TuplePolicy::Exhaustive {
                cap: DEFAULT_TUPLE_CAP,
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exhaustive_refuses_full_net() {
        let dom = domain();
        let f = GifsInfMap::transformer(&dom, addr(&[1])).unwrap();
        let err = map_image(
            &f,
            std::slice::from_ref(dom.knet()),
            TuplePolicy::Exhaustive {
                cap: DEFAULT_TUPLE_CAP,
            },
        );
        assert!(matches!(err, Err(GifsError::TupleExplosion { .. })));
    }

    #[test]
    fn outside_points_are_rejected() {
        let dom = domain();
        let f = GifsInfMap::transformer(&dom, addr(&[1])).unwrap();
        let bad = BoundedSeq::constant(Point::scalar(0.5));
        assert!(matches!(apply_inf_map(&f, &bad), Err(GifsError::OutsideDomain(_))));
    }
}
