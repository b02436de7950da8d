//! Points, finite representations of compact sets, and the metrics on them.
//!
//! A compact set is carried as a [`CompactNet`]: a finite, deduplicated point
//! set together with a `resolution`, the guaranteed Hausdorff distance to the
//! ideal set the net stands for (`0.0` when the net *is* the set).
//!
//! The Hausdorff–Pompeiu distance is
//!
//! ```text
//! H(A, B) = max( sup_{b in B} inf_{a in A} d(a, b), sup_{a in A} inf_{b in B} d(a, b) )
//! ```
//!
//! and is evaluated exactly; large inputs go through a sorted sweep along the
//! widest axis, which prunes candidates without changing the result.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GifsError, Result};

/// A point of Euclidean space. Coordinates are finite; `-0.0` is normalised
/// to `0.0` so that equal points compare equal bitwise.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GifsError::InvalidParameter("point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GifsError::NonFinite);
        }
        Ok(Point(coords.into_iter().map(|c| c + 0.0).collect()))
    }

    /// One-dimensional point. Panics on a non-finite value.
    pub fn scalar(x: f64) -> Self {
        Point::new(vec![x]).expect("finite scalar")
    }

    /// Two-dimensional point. Panics on non-finite values.
    pub fn xy(x: f64, y: f64) -> Self {
        Point::new(vec![x, y]).expect("finite coordinates")
    }

    /// The point `x` on the first axis of `R^dim`.
    pub fn on_first_axis(x: f64, dim: usize) -> Self {
        let mut coords = vec![0.0; dim.max(1)];
        coords[0] = x;
        Point::new(coords).expect("finite coordinate")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn distance(&self, other: &Point) -> f64 {
        euclidean(&self.0, &other.0)
    }

    /// Total order used for sorting and deduplication (lexicographic).
    pub fn total_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = GifsError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Closed interval `[lo, hi]` of the real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Distance between the two closed intervals (zero when they meet).
    pub fn gap(&self, other: &Interval) -> f64 {
        (other.lo - self.hi).max(self.lo - other.hi).max(0.0)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn distance_to(&self, x: f64) -> f64 {
        (self.lo - x).max(x - self.hi).max(0.0)
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Finite nonempty point set standing for a compact set at a stated resolution.
///
/// Points are kept sorted (lexicographically) and deduplicated, so two nets
/// built from the same point multiset are identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetRepr", into = "NetRepr")]
pub struct CompactNet {
    dim: usize,
    resolution: f64,
    points: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct NetRepr {
    dim: usize,
    resolution: f64,
    points: Vec<Point>,
}

impl TryFrom<NetRepr> for CompactNet {
    type Error = GifsError;
    fn try_from(r: NetRepr) -> Result<Self> {
        let net = CompactNet::new(r.points, r.resolution)?;
        if net.dim != r.dim {
            return Err(GifsError::DimensionMismatch {
                expected: r.dim,
                found: net.dim,
            });
        }
        Ok(net)
    }
}

impl From<CompactNet> for NetRepr {
    fn from(n: CompactNet) -> Self {
        NetRepr {
            dim: n.dim,
            resolution: n.resolution,
            points: n.points,
        }
    }
}

impl CompactNet {
    pub fn new(mut points: Vec<Point>, resolution: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(GifsError::EmptySet);
        }
        if !(resolution >= 0.0) || !resolution.is_finite() {
            return Err(GifsError::InvalidParameter(format!(
                "resolution must be a finite nonnegative number, got {resolution}"
            )));
        }
        let dim = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(GifsError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        points.sort();
        points.dedup();
        Ok(CompactNet {
            dim,
            resolution,
            points,
        })
    }

    /// Exact net (resolution zero).
    pub fn exact(points: Vec<Point>) -> Result<Self> {
        CompactNet::new(points, 0.0)
    }

    /// Exact net of one-dimensional points.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        CompactNet::exact(xs.iter().map(|&x| Point::new(vec![x])).collect::<Result<_>>()?)
    }

    /// Evenly spaced net of `[lo, hi]` with `count >= 2` points, resolution half a step.
    pub fn interval_grid(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(GifsError::InvalidParameter("grid needs hi > lo and at least two points".into()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let pts = (0..count)
            .map(|i| {
                let x = if i + 1 == count { hi } else { lo + step * i as f64 };
                Point::scalar(x)
            })
            .collect();
        CompactNet::new(pts, step / 2.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// True when both nets hold exactly the same points (resolution ignored).
    pub fn same_points(&self, other: &CompactNet) -> bool {
        self.points == other.points
    }

    pub fn union(&self, other: &CompactNet) -> Result<CompactNet> {
        check_dims(self, other)?;
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        CompactNet::new(pts, self.resolution.max(other.resolution))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        CompactNet::from_json(&std::fs::read_to_string(path)?)
    }

    /// One point per row, coordinates comma separated, shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for p in &self.points {
            let row: Vec<String> = p.coords().iter().map(|c| format!("{c:?}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_dims(a: &CompactNet, b: &CompactNet) -> Result<()> {
    if a.dim != b.dim {
        return Err(GifsError::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(())
}

/// Nearest-neighbour index over a point set: points sorted along the axis of
/// widest extent, scanned outward from the query with exact pruning.
pub(crate) struct SweepIndex<'a> {
    axis: usize,
    sorted: Vec<&'a Point>,
}

impl<'a> SweepIndex<'a> {
    pub(crate) fn new(points: &'a [Point]) -> Self {
        let dim = points[0].dim();
        let axis = (0..dim)
            .max_by(|&i, &j| {
                extent(points, i)
                    .total_cmp(&extent(points, j))
                    .then(j.cmp(&i))
            })
            .unwrap_or(0);
        let mut sorted: Vec<&Point> = points.iter().collect();
        sorted.sort_by(|a, b| a.coords()[axis].total_cmp(&b.coords()[axis]));
        SweepIndex { axis, sorted }
    }

    pub(crate) fn nearest_distance(&self, q: &Point) -> f64 {
        let key = q.coords()[self.axis];
        let start = self.sorted.partition_point(|p| p.coords()[self.axis] < key);
        let mut best = f64::INFINITY;
        let (mut lo, mut hi) = (start, start);
        loop {
            let mut progressed = false;
            if hi < self.sorted.len() {
                let p = self.sorted[hi];
                if p.coords()[self.axis] - key < best {
                    best = best.min(q.distance(p));
                    hi += 1;
                    progressed = true;
                } else {
                    hi = self.sorted.len();
                }
            }
            if lo > 0 {
                let p = self.sorted[lo - 1];
                if key - p.coords()[self.axis] < best {
                    best = best.min(q.distance(p));
                    lo -= 1;
                    progressed = true;
                } else {
                    lo = 0;
                }
            }
            if !progressed {
                return best;
            }
        }
    }
}

fn extent(points: &[Point], axis: usize) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.min(p.coords()[axis]);
        hi = hi.max(p.coords()[axis]);
    }
    hi - lo
}

const BRUTE_FORCE_LIMIT: usize = 64;

/// `sup_{a in from} inf_{b in to} d(a, b)`.
pub fn directed_hausdorff(from: &CompactNet, to: &CompactNet) -> Result<f64> {
    check_dims(from, to)?;
    Ok(directed(from.points(), to.points()))
}

fn directed(from: &[Point], to: &[Point]) -> f64 {
    if to.len() <= BRUTE_FORCE_LIMIT {
        return from
            .par_iter()
            .map(|a| to.iter().map(|b| a.distance(b)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max);
    }
    let index = SweepIndex::new(to);
    from.par_iter()
        .map(|a| index.nearest_distance(a))
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff–Pompeiu distance between two nets of the same dimension.
pub fn hausdorff_distance(a: &CompactNet, b: &CompactNet) -> Result<f64> {
    check_dims(a, b)?;
    Ok(directed(a.points(), b.points()).max(directed(b.points(), a.points())))
}

/// Reference implementation: exhaustive double loop, no pruning.
pub fn hausdorff_distance_brute(a: &CompactNet, b: &CompactNet) -> Result<f64> {
    check_dims(a, b)?;
    let one_sided = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.distance(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a.points(), b.points()).max(one_sided(b.points(), a.points())))
}

/// `inf { d(a, b) : a in A, b in B }`.
pub fn set_distance(a: &CompactNet, b: &CompactNet) -> Result<f64> {
    check_dims(a, b)?;
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if large.len() <= BRUTE_FORCE_LIMIT {
        return Ok(small
            .points()
            .iter()
            .flat_map(|p| large.points().iter().map(move |q| p.distance(q)))
            .fold(f64::INFINITY, f64::min));
    }
    let index = SweepIndex::new(large.points());
    Ok(small
        .points()
        .par_iter()
        .map(|p| index.nearest_distance(p))
        .reduce(|| f64::INFINITY, f64::min))
}

/// Largest pairwise distance; zero for a singleton.
pub fn diameter(a: &CompactNet) -> f64 {
    let pts = a.points();
    if a.dim() == 1 {
        return pts[pts.len() - 1].x() - pts[0].x();
    }
    pts.par_iter()
        .enumerate()
        .map(|(i, p)| pts[i + 1..].iter().map(|q| p.distance(q)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// Membership in the open `r`-neighbourhood `{x : exists a in A, d(a, x) < r}`.
pub fn neighborhood_contains(a: &CompactNet, r: f64, x: &Point) -> Result<bool> {
    if !(r > 0.0) {
        return Err(GifsError::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    if x.dim() != a.dim() {
        return Err(GifsError::DimensionMismatch {
            expected: a.dim(),
            found: x.dim(),
        });
    }
    Ok(a.points().iter().any(|p| p.distance(x) < r))
}

/// How a truncated sequence continues past its stored entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Entries after the last stored one repeat it.
    RepeatLast,
    /// Entries after the last stored one equal a designated point.
    Constant(Point),
}

/// A bounded sequence of points, stored up to a truncation depth with a tail rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedSeq {
    entries: Vec<Point>,
    tail: TailRule,
}

impl BoundedSeq {
    pub fn new(entries: Vec<Point>, tail: TailRule) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(GifsError::InvalidParameter("sequence needs at least one entry".into()));
        };
        let dim = first.dim();
        let tail_dim = match &tail {
            TailRule::Constant(p) => Some(p.dim()),
            TailRule::RepeatLast => None,
        };
        if let Some(bad) = entries
            .iter()
            .map(Point::dim)
            .chain(tail_dim)
            .find(|&d| d != dim)
        {
            return Err(GifsError::DimensionMismatch {
                expected: dim,
                found: bad,
            });
        }
        Ok(BoundedSeq { entries, tail })
    }

    /// Sequence whose stored entries are followed by repeats of the last one.
    pub fn repeat_last(entries: Vec<Point>) -> Result<Self> {
        BoundedSeq::new(entries, TailRule::RepeatLast)
    }

    /// The constant sequence `(x, x, ...)`.
    pub fn constant(x: Point) -> Self {
        BoundedSeq {
            entries: vec![x],
            tail: TailRule::RepeatLast,
        }
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn entries(&self) -> &[Point] {
        &self.entries
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// Entry `m` (zero based), following the tail rule past the stored depth.
    pub fn get(&self, m: usize) -> &Point {
        match self.entries.get(m) {
            Some(p) => p,
            None => match &self.tail {
                TailRule::RepeatLast => self.entries.last().expect("nonempty"),
                TailRule::Constant(p) => p,
            },
        }
    }

    /// The point every entry past the stored depth equals.
    pub fn tail_point(&self) -> &Point {
        self.get(self.entries.len())
    }
}

/// Value of the weighted supremum metric, split into the stored head and the tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeqDistance {
    /// `max(head, tail)`: the distance between the full infinite sequences.
    pub value: f64,
    /// Supremum over the stored entries `n <= T`.
    pub head: f64,
    /// Supremum over `n > T`; exact because both tails are constant.
    pub tail: f64,
}

/// `d_q(x, y) = sup_n q^(n-1) d(x_n, y_n)` for `q in (0, 1]`; `q = 1` is the
/// plain supremum metric.
pub fn seq_metric(q: f64, x: &BoundedSeq, y: &BoundedSeq) -> Result<SeqDistance> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(GifsError::InvalidParameter(format!("q must lie in (0, 1], got {q}")));
    }
    if x.depth() != y.depth() {
        return Err(GifsError::InvalidParameter(format!(
            "truncation depths differ: {} vs {}",
            x.depth(),
            y.depth()
        )));
    }
    if x.dim() != y.dim() {
        return Err(GifsError::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let mut weight = 1.0;
    let mut head: f64 = 0.0;
    for (a, b) in x.entries().iter().zip(y.entries()) {
        head = head.max(weight * a.distance(b));
        weight *= q;
    }
    // past T both sequences are constant, so the sup is attained at n = T + 1
    let tail = weight * x.tail_point().distance(y.tail_point());
    Ok(SeqDistance {
        value: head.max(tail),
        head,
        tail,
    })
}
