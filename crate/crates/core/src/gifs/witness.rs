//! Systems whose attractor is a given balanced set `K`, or `K ∪ P` for a
//! finite set `P`.

use serde::{Deserialize, Serialize};

use crate::address::{enumerate_addresses, Address};
use crate::balanced::CellTree;
use crate::error::{GifsError, Result};
use crate::metric::{CompactNet, Interval};

use super::inf::{GifsInfMap, GifsInfSystem, TreeDomain};

/// Least `p` with `q^-p < target` (`strict`) or `q^-p <= target`.
pub fn refinement_order(q: f64, target: f64, strict: bool, depth: usize) -> Result<usize> {
    if !(target > 0.0) {
        return Err(GifsError::InvalidParameter(format!("target bound {target} must be positive")));
    }
    let mut p = 1;
    loop {
        let b = q.powi(-(p as i32));
        if (strict && b < target) || (!strict && b <= target) {
            return Ok(p);
        }
        p += 1;
        if p > depth {
            return Err(GifsError::DepthExceeded { needed: p, depth });
        }
    }
}

/// The `a_1` transformer maps `f_i`, each with bound `1/q`, on `K ⊂ R`.
pub fn build_witness_system(tree: &CellTree) -> Result<GifsInfSystem> {
    build_witness_system_in(tree, 1)
}

/// As [`build_witness_system`] with `K` on the first axis of `R^dim`.
pub fn build_witness_system_in(tree: &CellTree, dim: usize) -> Result<GifsInfSystem> {
    let dom = TreeDomain::new(tree.clone(), dim, None)?;
    let maps = (1..=tree.profile().arity(1))
        .map(|i| GifsInfMap::transformer(&dom, Address::new(vec![i])))
        .collect::<Result<Vec<_>>>()?;
    GifsInfSystem::new(dom, maps)
}

/// One transformer per depth-`p` address, `p` least with `q^-p < r`.
pub fn build_refined_system(tree: &CellTree, r: f64) -> Result<GifsInfSystem> {
    build_refined_system_in(tree, r, 1)
}

pub fn build_refined_system_in(tree: &CellTree, r: f64, dim: usize) -> Result<GifsInfSystem> {
    check_ratio(r)?;
    let p = refinement_order(tree.q(), r, true, tree.depth())?;
    let dom = TreeDomain::new(tree.clone(), dim, None)?;
    let maps = enumerate_addresses(tree.profile(), p)?
        .into_iter()
        .map(|prefix| GifsInfMap::transformer(&dom, prefix))
        .collect::<Result<Vec<_>>>()?;
    GifsInfSystem::new(dom, maps)
}

fn check_ratio(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(GifsError::InvalidParameter(format!("r = {r} must lie in (0, 1)")))
    }
}

/// Distances entering the bound for the union construction, all computed
/// from cell intervals rather than net points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionGeometry {
    /// Lower bound on `dist(K, P)`.
    pub gap_lower: f64,
    /// Upper bound on `diam(K)`.
    pub diam_upper: f64,
    /// `r * min{1, gap / diam}`.
    pub base_target: f64,
    pub order: usize,
    /// Bound declared for every piecewise map.
    pub piecewise_bound: f64,
}

/// Distance from each point of `extra` to the nearest leaf cell of `K` on
/// the first axis, minimized over `extra`.
pub fn cell_distance_to(tree: &CellTree, extra: &CompactNet) -> f64 {
    let leaves = tree.cells_at(tree.depth());
    extra
        .points()
        .iter()
        .map(|x| {
            let off: f64 = x.coords()[1..].iter().map(|c| c * c).sum();
            let axis = nearest_cell_gap(leaves, x.x());
            (axis * axis + off).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn nearest_cell_gap(leaves: &[Interval], x: f64) -> f64 {
    let idx = leaves.partition_point(|c| c.lo <= x);
    let mut best = f64::INFINITY;
    if idx > 0 {
        best = best.min(leaves[idx - 1].distance_to(x));
    }
    if idx < leaves.len() {
        best = best.min(leaves[idx].distance_to(x));
    }
    best
}

pub fn union_geometry(tree: &CellTree, extra: &CompactNet, r: f64) -> Result<UnionGeometry> {
    check_ratio(r)?;
    let gap_lower = cell_distance_to(tree, extra);
    if !(gap_lower > 0.0) {
        return Err(GifsError::InvalidParameter("the finite set meets K".into()));
    }
    let diam_upper = tree.hull().width();
    let base_target = r * (gap_lower / diam_upper).min(1.0);
    let order = refinement_order(tree.q(), base_target, true, tree.depth())?;
    let piecewise_bound = tree.q().powi(-(order as i32)) * (diam_upper / gap_lower).max(1.0);
    Ok(UnionGeometry {
        gap_lower,
        diam_upper,
        base_target,
        order,
        piecewise_bound,
    })
}

/// Piecewise maps built from the refined system with bound
/// `r min{1, gap/diam K}`, anchored at the all-ones point of `K`, plus one
/// constant map per point of `P`.
pub fn build_union_system(tree: &CellTree, extra: &CompactNet, r: f64) -> Result<GifsInfSystem> {
    let geo = union_geometry(tree, extra, r)?;
    let dom = TreeDomain::new(tree.clone(), extra.dim(), Some(extra.clone()))?;
    let mut maps = enumerate_addresses(tree.profile(), geo.order)?
        .into_iter()
        .map(|prefix| GifsInfMap::piecewise(&dom, prefix, geo.piecewise_bound))
        .collect::<Result<Vec<_>>>()?;
    for x in extra.points() {
        maps.push(GifsInfMap::constant(&dom, x.clone())?);
    }
    GifsInfSystem::new(dom, maps)
}
