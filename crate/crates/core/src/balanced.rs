//! q-balanced Cantor-type sets on the real line.
//!
//! A [`CellTree`] stores the nested closed intervals `C_(i_1..i_n)` level by
//! level, the diameter bounds `b_n`, the separation factor `q` and the
//! indexing function used by the odd-level condition. Cells at each level are
//! kept in lexicographic address order, which is also their left-to-right
//! order on the line.
//!
//! [`build_balanced_set`] places children top-down: at odd levels the
//! children of cells inside `C_Phi(n)` are spread over the whole parent while
//! all other families are packed into a short left-aligned cluster, and at
//! even levels every family is spread. Widths are fixed up front with a 10%
//! slack on every strict inequality.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::address::{build_indexing_function, Address, ArityProfile, IndexingFunction};
use crate::error::{GifsError, Result};
use crate::metric::{CompactNet, Interval, Point};

/// Slack factor applied to every strict inequality during construction.
const SAFETY: f64 = 1.1;

/// Relative tolerance separating a strict pass from a float tie.
pub const STRICT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct CellTree {
    q: f64,
    profile: ArityProfile,
    diam_bounds: Vec<f64>,
    indexing: IndexingFunction,
    levels: Vec<Vec<Interval>>,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    q: f64,
    arities: Vec<u32>,
    diam_bounds: Vec<f64>,
    indexing: IndexingFunction,
    cells: BTreeMap<String, Interval>,
}

impl From<CellTree> for TreeRepr {
    fn from(t: CellTree) -> Self {
        let mut cells = BTreeMap::new();
        for (k, level) in t.levels.iter().enumerate() {
            for (r, c) in level.iter().enumerate() {
                cells.insert(Address::from_rank(&t.profile, k + 1, r).key(), *c);
            }
        }
        TreeRepr {
            q: t.q,
            arities: t.profile.arities().to_vec(),
            diam_bounds: t.diam_bounds,
            indexing: t.indexing,
            cells,
        }
    }
}

impl TryFrom<TreeRepr> for CellTree {
    type Error = GifsError;

    fn try_from(repr: TreeRepr) -> Result<Self> {
        let profile = ArityProfile::new(repr.arities)?;
        let mut levels: Vec<Vec<Option<Interval>>> = (1..=profile.depth())
            .map(|k| vec![None; profile.count(k)])
            .collect();
        for (key, cell) in repr.cells {
            let addr = Address::parse_key(&key)?;
            if addr.is_empty() {
                return Err(GifsError::Parse("empty cell key".into()));
            }
            addr.validate(&profile)?;
            levels[addr.len() - 1][addr.rank(&profile)] = Some(cell);
        }
        let levels = levels
            .into_iter()
            .enumerate()
            .map(|(k, level)| {
                level
                    .into_iter()
                    .enumerate()
                    .map(|(r, c)| {
                        c.ok_or_else(|| {
                            GifsError::Parse(format!(
                                "missing cell {}",
                                Address::from_rank(&profile, k + 1, r).key()
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CellTree::from_parts(repr.q, profile, repr.diam_bounds, repr.indexing, levels)
    }
}

impl CellTree {
    /// Assembles a tree from explicit levels (`levels[k-1]` in lexicographic
    /// order). Only the shape is checked here; the geometric conditions are
    /// left to [`verify_conditions`].
    pub fn from_parts(
        q: f64,
        profile: ArityProfile,
        diam_bounds: Vec<f64>,
        indexing: IndexingFunction,
        levels: Vec<Vec<Interval>>,
    ) -> Result<Self> {
        let depth = profile.depth();
        if !q.is_finite() || q <= 0.0 {
            return Err(GifsError::InvalidParameter(format!("q = {q} must be positive")));
        }
        if diam_bounds.len() != depth || levels.len() != depth {
            return Err(GifsError::InvalidParameter(format!(
                "profile depth {depth} but {} bounds and {} levels",
                diam_bounds.len(),
                levels.len()
            )));
        }
        if diam_bounds.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(GifsError::InvalidParameter("diameter bounds must be positive".into()));
        }
        for (k, level) in levels.iter().enumerate() {
            if level.len() != profile.count(k + 1) {
                return Err(GifsError::InvalidParameter(format!(
                    "level {} has {} cells, expected {}",
                    k + 1,
                    level.len(),
                    profile.count(k + 1)
                )));
            }
            if level
                .iter()
                .any(|c| !c.lo.is_finite() || !c.hi.is_finite() || c.lo > c.hi)
            {
                return Err(GifsError::InvalidParameter(format!("malformed cell at level {}", k + 1)));
            }
        }
        Ok(CellTree {
            q,
            profile,
            diam_bounds,
            indexing,
            levels,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn profile(&self) -> &ArityProfile {
        &self.profile
    }

    pub fn depth(&self) -> usize {
        self.profile.depth()
    }

    /// Diameter bound of level `k`, 1-based.
    pub fn diam_bound(&self, k: usize) -> f64 {
        self.diam_bounds[k - 1]
    }

    pub fn diam_bounds(&self) -> &[f64] {
        &self.diam_bounds
    }

    pub fn indexing(&self) -> &IndexingFunction {
        &self.indexing
    }

    /// Cells of depth `k` in lexicographic order.
    pub fn cells_at(&self, k: usize) -> &[Interval] {
        &self.levels[k - 1]
    }

    pub fn cell(&self, addr: &Address) -> Result<Interval> {
        if addr.is_empty() {
            return Ok(self.hull());
        }
        addr.validate(&self.profile)?;
        Ok(self.levels[addr.len() - 1][addr.rank(&self.profile)])
    }

    /// Convex hull of the depth-1 cells.
    pub fn hull(&self) -> Interval {
        let first = &self.levels[0];
        Interval::new(first[0].lo, first[first.len() - 1].hi)
    }

    /// Range of leaf ranks below the cell `addr`.
    pub fn leaf_range(&self, addr: &Address) -> std::ops::Range<usize> {
        let below: usize = (addr.len() + 1..=self.depth())
            .map(|k| self.profile.arity(k) as usize)
            .product();
        let start = addr.rank(&self.profile) * below;
        start..start + below
    }

    /// Left endpoint of the deepest all-ones descendant of `addr`.
    pub fn representative(&self, addr: &Address) -> Result<f64> {
        addr.validate(&self.profile)?;
        let leaf = addr.padded(self.depth());
        Ok(self.levels[self.depth() - 1][leaf.rank(&self.profile)].lo)
    }

    pub fn representative_point(&self, addr: &Address, dim: usize) -> Result<Point> {
        Ok(Point::on_first_axis(self.representative(addr)?, dim))
    }

    /// One representative per depth-`k` cell, resolution `b_k`.
    pub fn materialize_net(&self, k: usize) -> Result<CompactNet> {
        self.materialize_net_in(k, 1)
    }

    /// As [`CellTree::materialize_net`], embedded on the first axis of `R^dim`.
    pub fn materialize_net_in(&self, k: usize, dim: usize) -> Result<CompactNet> {
        if k == 0 || k > self.depth() || dim == 0 {
            return Err(GifsError::InvalidParameter(format!(
                "net depth {k} outside 1..={} or zero dimension",
                self.depth()
            )));
        }
        let stride: usize = (k + 1..=self.depth())
            .map(|j| self.profile.arity(j) as usize)
            .product();
        let leaves = &self.levels[self.depth() - 1];
        let points = (0..self.profile.count(k))
            .map(|r| Point::on_first_axis(leaves[r * stride].lo, dim))
            .collect();
        CompactNet::new(points, self.diam_bound(k))
    }

    /// The depth-`N` address whose cell contains `x`. Points off the first
    /// axis are rejected.
    pub fn address_of_point(&self, x: &Point) -> Result<Address> {
        if x.coords()[1..].iter().any(|&c| c != 0.0) {
            return Err(GifsError::NotInSet(x.coords().to_vec()));
        }
        self.address_of_scalar(x.x())
            .ok_or_else(|| GifsError::NotInSet(x.coords().to_vec()))
    }

    pub fn address_of_scalar(&self, x: f64) -> Option<Address> {
        self.leaf_rank_of_scalar(x)
            .map(|r| Address::from_rank(&self.profile, self.depth(), r))
    }

    /// Rank of the leaf cell containing `x`.
    pub fn leaf_rank_of_scalar(&self, x: f64) -> Option<usize> {
        let leaves = &self.levels[self.depth() - 1];
        let idx = leaves.partition_point(|c| c.lo <= x);
        (idx > 0 && leaves[idx - 1].contains(x)).then(|| idx - 1)
    }

    /// Smallest distance between two distinct depth-`k` cells, computed
    /// exactly from the intervals.
    pub fn min_gap(&self, k: usize) -> f64 {
        sweep_min_gap(&self.levels[k - 1]).map(|(g, _)| g).unwrap_or(f64::INFINITY)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        CellTree::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Minimum distance between distinct intervals of a list sorted by `lo`,
/// together with the index of the right-hand member of the worst pair.
/// Overlaps give zero.
fn sweep_min_gap(cells: &[Interval]) -> Option<(f64, usize)> {
    let mut max_hi = f64::NEG_INFINITY;
    let mut best: Option<(f64, usize)> = None;
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| cells[a].lo.total_cmp(&cells[b].lo));
    for &i in &order {
        if max_hi > f64::NEG_INFINITY {
            let g = (cells[i].lo - max_hi).max(0.0);
            if best.is_none_or(|(bg, _)| g < bg) {
                best = Some((g, i));
            }
        }
        max_hi = max_hi.max(cells[i].hi);
    }
    best
}

/// Builds a q-balanced set for `profile` inside `ambient`.
pub fn build_balanced_set(q: f64, profile: &ArityProfile, ambient: Interval) -> Result<CellTree> {
    if !q.is_finite() || q < 2.0 {
        return Err(GifsError::InvalidParameter(format!("q = {q} must be at least 2")));
    }
    if !ambient.lo.is_finite() || !ambient.hi.is_finite() || ambient.width() <= 0.0 {
        return Err(GifsError::InvalidParameter(format!(
            "ambient interval [{}, {}] must have positive length",
            ambient.lo, ambient.hi
        )));
    }
    let indexing = build_indexing_function(profile)?;

    let a1 = profile.arity(1) as f64;
    let w1 = ambient.width() / (a1 + SAFETY * q * (a1 - 1.0));
    let root = vec![ambient];
    let mut levels: Vec<Vec<Interval>> = Vec::with_capacity(profile.depth());
    levels.push(spread(&root[0], profile.arity(1), w1));

    for n in 1..profile.depth() {
        let parents = &levels[n - 1];
        let a = profile.arity(n + 1);
        let af = a as f64;
        let min_parent = parents.iter().map(Interval::width).fold(f64::INFINITY, f64::min);
        let cluster_units = af + SAFETY * q * (af - 1.0);
        let mut children = Vec::with_capacity(parents.len() * a as usize);
        if n % 2 == 1 {
            let w = min_parent / (af + SAFETY * (af - 1.0) * cluster_units);
            let target = indexing.get(n as u64).ok_or_else(|| GifsError::InfeasibleGeometry {
                depth: n + 1,
                reason: format!("indexing function unassigned at {n}"),
            })?;
            let region = levels[target.len() - 1][target.rank(profile)];
            for p in parents {
                if region.contains_interval(p) {
                    children.extend(spread(p, a, w));
                } else {
                    children.extend(cluster(p, a, w, SAFETY * q * w));
                }
            }
        } else {
            let w = min_parent / cluster_units;
            for p in parents {
                children.extend(spread(p, a, w));
            }
        }
        if children.iter().any(|c| !(c.width() > 0.0)) {
            return Err(GifsError::InfeasibleGeometry {
                depth: n + 1,
                reason: "cell width underflowed".into(),
            });
        }
        levels.push(children);
    }

    let diam_bounds = levels
        .iter()
        .map(|l| l.iter().map(Interval::width).fold(0.0, f64::max))
        .collect();
    let tree = CellTree::from_parts(q, profile.clone(), diam_bounds, indexing, levels)?;
    let report = verify_conditions(&tree);
    if let Some(bad) = report.conditions.iter().find(|c| !c.passed) {
        return Err(GifsError::InfeasibleGeometry {
            depth: bad.level.unwrap_or(0),
            reason: format!("{} failed with margin {:e}", bad.condition, bad.margin),
        });
    }
    Ok(tree)
}

/// `a` children of width `w`, first flush left, last flush right, equal gaps.
fn spread(parent: &Interval, a: u32, w: f64) -> Vec<Interval> {
    let step = (parent.width() - w) / (a as f64 - 1.0);
    (0..a)
        .map(|k| {
            if k + 1 == a {
                Interval::new(parent.hi - w, parent.hi)
            } else {
                let lo = parent.lo + k as f64 * step;
                Interval::new(lo, lo + w)
            }
        })
        .collect()
}

/// `a` children of width `w` packed from the left with gap `gap`.
fn cluster(parent: &Interval, a: u32, w: f64, gap: f64) -> Vec<Interval> {
    (0..a)
        .map(|k| {
            let lo = parent.lo + k as f64 * (w + gap);
            Interval::new(lo, lo + w)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Arity growth `a_1 >= 2`, `a_(n+1) >= n a_1...a_n`.
    Arity,
    Nesting,
    Diameter,
    Separation,
    OddLevel,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Arity => "(i) arity growth",
            Condition::Nesting => "(ii) nesting",
            Condition::Diameter => "(iii) diameter",
            Condition::Separation => "(iv) separation",
            Condition::OddLevel => "(v) odd-level spread",
        };
        f.write_str(s)
    }
}

/// Outcome of one condition at one level (or globally for `level == None`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub level: Option<usize>,
    pub passed: bool,
    /// Worst-case slack; strict conditions need it above `STRICT_TOL * scale`.
    pub margin: f64,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub q: f64,
    pub q_valid: bool,
    pub indexing_valid: bool,
    pub scale: f64,
    pub conditions: Vec<ConditionCheck>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.q_valid && self.indexing_valid && self.conditions.iter().all(|c| c.passed)
    }

    pub fn passed(&self, condition: Condition) -> bool {
        self.conditions
            .iter()
            .filter(|c| c.condition == condition)
            .all(|c| c.passed)
    }

    /// Smallest margin recorded for `condition` over all levels.
    pub fn margin(&self, condition: Condition) -> f64 {
        self.conditions
            .iter()
            .filter(|c| c.condition == condition)
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Re-checks every condition of a balanced set from the stored intervals.
pub fn verify_conditions(tree: &CellTree) -> VerificationReport {
    let profile = &tree.profile;
    let scale = tree.hull().width().max(f64::MIN_POSITIVE);
    let strict = STRICT_TOL * scale;
    let mut conditions = Vec::new();

    let mut arity_margin = profile.arity(1) as i128 - 2;
    let mut arity_witness = (arity_margin < 0).then(|| "a_1".to_string());
    let mut product: i128 = 1;
    for n in 1..profile.depth() {
        product *= profile.arity(n) as i128;
        let m = profile.arity(n + 1) as i128 - n as i128 * product;
        if m < arity_margin {
            arity_margin = m;
            arity_witness = Some(format!("a_{}", n + 1));
        }
    }
    conditions.push(ConditionCheck {
        condition: Condition::Arity,
        level: None,
        passed: arity_margin >= 0,
        margin: arity_margin as f64,
        witness: arity_witness,
    });

    for k in 1..=tree.depth() {
        let level = tree.cells_at(k);

        if k > 1 {
            let parents = tree.cells_at(k - 1);
            let a = profile.arity(k) as usize;
            let (margin, worst) = level
                .iter()
                .enumerate()
                .map(|(r, c)| {
                    let p = parents[r / a];
                    ((c.lo - p.lo).min(p.hi - c.hi), r)
                })
                .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc });
            conditions.push(ConditionCheck {
                condition: Condition::Nesting,
                level: Some(k),
                passed: margin >= 0.0,
                margin,
                witness: Some(Address::from_rank(profile, k, worst).key()),
            });
        }

        let bk = tree.diam_bound(k);
        let (margin, worst) = level
            .iter()
            .enumerate()
            .map(|(r, c)| (bk - c.width(), r))
            .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc });
        conditions.push(ConditionCheck {
            condition: Condition::Diameter,
            level: Some(k),
            passed: margin >= 0.0,
            margin,
            witness: Some(Address::from_rank(profile, k, worst).key()),
        });

        let (gap, worst) = sweep_min_gap(level).unwrap_or((f64::INFINITY, 0));
        let margin = gap - tree.q * bk;
        conditions.push(ConditionCheck {
            condition: Condition::Separation,
            level: Some(k),
            passed: margin > strict,
            margin,
            witness: Some(Address::from_rank(profile, k, worst).key()),
        });

        if k % 2 == 1 && k < tree.depth() {
            conditions.push(check_odd_level(tree, k, strict));
        }
    }

    VerificationReport {
        q: tree.q,
        q_valid: tree.q >= 2.0,
        indexing_valid: tree.indexing.validate(profile).is_ok(),
        scale,
        conditions,
    }
}

fn check_odd_level(tree: &CellTree, n: usize, strict: f64) -> ConditionCheck {
    let profile = &tree.profile;
    let Some(target) = tree.indexing.get(n as u64) else {
        return ConditionCheck {
            condition: Condition::OddLevel,
            level: Some(n),
            passed: false,
            margin: f64::NEG_INFINITY,
            witness: Some(format!("indexing function unassigned at {n}")),
        };
    };
    let region = match tree.cell(target) {
        Ok(c) => c,
        Err(e) => {
            return ConditionCheck {
                condition: Condition::OddLevel,
                level: Some(n),
                passed: false,
                margin: f64::NEG_INFINITY,
                witness: Some(e.to_string()),
            }
        }
    };
    let a = profile.arity(n + 1) as usize;
    let children = tree.cells_at(n + 1);
    let mut inside_gap = (f64::INFINITY, 0usize);
    let mut outside_span = (0.0f64, 0usize);
    for (r, p) in tree.cells_at(n).iter().enumerate() {
        let family = &children[r * a..(r + 1) * a];
        if region.contains_interval(p) {
            if let Some((g, _)) = sweep_min_gap(family) {
                if g < inside_gap.0 {
                    inside_gap = (g, r);
                }
            }
        } else {
            let lo = family.iter().map(|c| c.lo).fold(f64::INFINITY, f64::min);
            let hi = family.iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > outside_span.0 {
                outside_span = (hi - lo, r);
            }
        }
    }
    let margin = inside_gap.0 - outside_span.0;
    ConditionCheck {
        condition: Condition::OddLevel,
        level: Some(n),
        passed: margin > strict,
        margin,
        witness: Some(format!(
            "inside {} vs outside {}",
            Address::from_rank(profile, n, inside_gap.1).key(),
            Address::from_rank(profile, n, outside_span.1).key()
        )),
    }
}
