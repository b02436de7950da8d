//! Gauge functions and upper bounds on the `delta`-premeasure
//! `H^h_delta(A) = inf { sum h(diam U_i) : (U_i) a delta-cover of A }`.
//!
//! Every value returned here is the cost of one explicit cover, hence an
//! upper bound on the infimum. Nothing here bounds a measure from below.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balanced::CellTree;
use crate::error::{GifsError, Result};
use crate::lipschitz::{mcshane_extend, SampleInput, SampledMap};
use crate::metric::{CompactNet, Interval, Point};

/// Nondecreasing `h` with `h(0) = 0` and `h(t) > 0` for `t > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum GaugeFunction {
    /// `t^exponent`, `exponent > 0`.
    PowerLaw { exponent: f64 },
    /// Linear interpolation through `(t, h)` knots starting at `(0, 0)`, held
    /// constant past the last knot.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl GaugeFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(GifsError::InvalidParameter(format!("gauge exponent {exponent} must be positive")));
        }
        Ok(GaugeFunction::PowerLaw { exponent })
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: &str| Err(GifsError::InvalidParameter(format!("tabulated gauge: {msg}")));
        if knots.len() < 2 || knots[0] != (0.0, 0.0) {
            return bad("needs at least two knots, the first (0, 0)");
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) || !(w[1].1 >= w[0].1) {
                return bad("arguments must increase and values must not decrease");
            }
        }
        if !(knots[1].1 > 0.0) {
            return bad("h must be positive away from 0");
        }
        if knots.iter().any(|(t, h)| !t.is_finite() || !h.is_finite()) {
            return bad("knots must be finite");
        }
        Ok(GaugeFunction::Tabulated { knots })
    }

    /// `t^(ln 2 / ln 3)`, the gauge matching the middle-thirds Cantor set.
    pub fn cantor() -> Self {
        GaugeFunction::PowerLaw {
            exponent: 2f64.ln() / 3f64.ln(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            GaugeFunction::PowerLaw { exponent } => t.powf(*exponent),
            GaugeFunction::Tabulated { knots } => {
                let i = knots.partition_point(|&(x, _)| x <= t);
                if i == knots.len() {
                    return knots[i - 1].1;
                }
                let (x0, y0) = knots[i - 1];
                let (x1, y1) = knots[i];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }
}

impl FromStr for GaugeFunction {
    type Err = GifsError;

    /// `t^s`, or `table:t1:h1,t2:h2,...` (the knot `0:0` is implied).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(e) = s.strip_prefix("t^") {
            let e: f64 = e.parse().map_err(|_| GifsError::Parse(format!("bad gauge exponent in {s:?}")))?;
            return GaugeFunction::power(e);
        }
        if s == "t" {
            return GaugeFunction::power(1.0);
        }
        if let Some(rest) = s.strip_prefix("table:") {
            let mut knots = vec![(0.0, 0.0)];
            for pair in rest.split(',') {
                let (t, h) = pair
                    .split_once(':')
                    .ok_or_else(|| GifsError::Parse(format!("bad knot {pair:?}")))?;
                let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| GifsError::Parse(format!("bad number {v:?}")));
                knots.push((parse(t)?, parse(h)?));
            }
            return GaugeFunction::tabulated(knots);
        }
        Err(GifsError::Parse(format!("unknown gauge {s:?}; expected t^s or table:...")))
    }
}

impl fmt::Display for GaugeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeFunction::PowerLaw { exponent } => write!(f, "t^{exponent}"),
            GaugeFunction::Tabulated { knots } => {
                let body: Vec<String> = knots[1..].iter().map(|(t, h)| format!("{t}:{h}")).collect();
                write!(f, "table:{}", body.join(","))
            }
        }
    }
}

/// Nested families of closed intervals, finest level last, with a declared
/// width bound per level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellHierarchy {
    levels: Vec<Vec<Interval>>,
    bounds: Vec<f64>,
}

impl CellHierarchy {
    pub fn new(levels: Vec<Vec<Interval>>, bounds: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.len() != bounds.len() || levels.iter().any(Vec::is_empty) {
            return Err(GifsError::InvalidParameter("one nonempty level per width bound".into()));
        }
        Ok(CellHierarchy { levels, bounds })
    }

    pub fn of_tree(tree: &CellTree) -> Self {
        CellHierarchy {
            levels: (1..=tree.depth()).map(|k| tree.cells_at(k).to_vec()).collect(),
            bounds: (1..=tree.depth()).map(|k| tree.diam_bound(k)).collect(),
        }
    }

    /// Middle-thirds cells of `[0, 1]` down to `depth`.
    pub fn ternary_cantor(depth: usize) -> Result<Self> {
        if depth == 0 || depth > 30 {
            return Err(GifsError::InvalidParameter(format!("cantor depth {depth} outside 1..=30")));
        }
        let mut levels = Vec::with_capacity(depth);
        let mut cur = vec![Interval::new(0.0, 1.0)];
        for _ in 0..depth {
            cur = cur
                .iter()
                .flat_map(|c| {
                    let w = c.width() / 3.0;
                    [Interval::new(c.lo, c.lo + w), Interval::new(c.hi - w, c.hi)]
                })
                .collect();
            levels.push(cur.clone());
        }
        let bounds = (1..=depth).map(|k| 3f64.powi(-(k as i32))).collect();
        Ok(CellHierarchy { levels, bounds })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn cells(&self, level: usize) -> &[Interval] {
        &self.levels[level - 1]
    }

    pub fn bound(&self, level: usize) -> f64 {
        self.bounds[level - 1]
    }

    /// Left endpoints of the finest cells.
    pub fn net(&self) -> Result<CompactNet> {
        let d = self.depth();
        CompactNet::new(
            self.cells(d).iter().map(|c| Point::scalar(c.lo)).collect(),
            self.bound(d),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverStrategy {
    /// All cells of one level meeting the set; with no level given, the
    /// cheapest admissible level.
    Cells(Option<usize>),
    /// Thickened hulls of groups of nearby points, grouped optimally.
    Intervals,
}

impl FromStr for CoverStrategy {
    type Err = GifsError;

    /// `cell:N`, `cell` or `intervals` (alias `greedy`).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "intervals" | "greedy" => Ok(CoverStrategy::Intervals),
            "cell" | "cell:auto" => Ok(CoverStrategy::Cells(None)),
            other => {
                let n = other
                    .strip_prefix("cell:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| GifsError::Parse(format!("unknown cover strategy {other:?}")))?;
                Ok(CoverStrategy::Cells(Some(n)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    /// `sum h(diam U_i)` over the cover.
    pub value: f64,
    pub pieces: usize,
    pub max_diameter: f64,
    /// Cell level used, for cell covers.
    pub level: Option<usize>,
}

/// Cost of the chosen `delta`-cover of `set`. Cell strategies need a
/// hierarchy on the line and cover only the cells meeting the set.
pub fn premeasure_upper(
    set: &CompactNet,
    h: &GaugeFunction,
    delta: f64,
    strategy: CoverStrategy,
    cells: Option<&CellHierarchy>,
) -> Result<CoverReport> {
    if !(delta > 0.0) {
        return Err(GifsError::InvalidParameter(format!("delta {delta} must be positive")));
    }
    if set.dim() != 1 {
        return Err(GifsError::Unsupported("covers are built for sets on the line".into()));
    }
    match strategy {
        CoverStrategy::Intervals => Ok(interval_cover(set, h, delta)),
        CoverStrategy::Cells(level) => {
            let hier =
                cells.ok_or_else(|| GifsError::InvalidParameter("cell covers need a cell hierarchy".into()))?;
            match level {
                Some(n) => cell_cover(set, hier, n, h, delta),
                None => best_cell_cover(set, hier, h, delta),
            }
        }
    }
}

/// Sum of `h(width)` over the level-`n` cells meeting `set`; requires the
/// level's width bound to be at most `delta`.
pub fn cell_cover(
    set: &CompactNet,
    hier: &CellHierarchy,
    n: usize,
    h: &GaugeFunction,
    delta: f64,
) -> Result<CoverReport> {
    if n == 0 || n > hier.depth() {
        return Err(GifsError::InvalidParameter(format!("level {n} outside 1..={}", hier.depth())));
    }
    if hier.bound(n) > delta {
        return Err(GifsError::CoverTooCoarse {
            depth: n,
            bound: hier.bound(n),
            delta,
        });
    }
    let cells = hier.cells(n);
    let mut hit = vec![false; cells.len()];
    for x in set.points() {
        let x = x.x();
        let i = cells.partition_point(|c| c.lo <= x);
        if i > 0 && cells[i - 1].contains(x) {
            hit[i - 1] = true;
        } else {
            return Err(GifsError::NotInSet(vec![x]));
        }
    }
    let used: Vec<&Interval> = cells.iter().zip(&hit).filter(|(_, &h)| h).map(|(c, _)| c).collect();
    let value = used.par_iter().map(|c| h.eval(c.width())).sum();
    Ok(CoverReport {
        value,
        pieces: used.len(),
        max_diameter: used.iter().map(|c| c.width()).fold(0.0, f64::max),
        level: Some(n),
    })
}

/// Cheapest cell cover among the levels admissible for `delta`. Fewer
/// levels qualify as `delta` shrinks, so the value never decreases.
pub fn best_cell_cover(set: &CompactNet, hier: &CellHierarchy, h: &GaugeFunction, delta: f64) -> Result<CoverReport> {
    let admissible: Vec<usize> = (1..=hier.depth()).filter(|&n| hier.bound(n) <= delta).collect();
    let finest = hier.depth();
    if admissible.is_empty() {
        return Err(GifsError::CoverTooCoarse {
            depth: finest,
            bound: hier.bound(finest),
            delta,
        });
    }
    let mut best: Option<CoverReport> = None;
    for n in admissible {
        let r = cell_cover(set, hier, n, h, delta)?;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one admissible level"))
}

/// Cheapest cover whose pieces are the thickened hulls of groups of net
/// points. Some optimal grouping uses runs of consecutive points, so a
/// dynamic program over the sorted points finds it exactly. Because the
/// value is a minimum over a class closed under joining covers, it is
/// subadditive in the set and nonincreasing in `delta`.
fn interval_cover(set: &CompactNet, h: &GaugeFunction, delta: f64) -> CoverReport {
    let rho = set.resolution();
    let mut xs: Vec<f64> = set.points().iter().map(Point::x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let n = xs.len();
    if 2.0 * rho > delta {
        // every point alone, its thickening cut into equal pieces
        let k = (2.0 * rho / delta).ceil();
        let piece = 2.0 * rho / k;
        return CoverReport {
            value: n as f64 * k * h.eval(piece),
            pieces: n * k as usize,
            max_diameter: piece,
            level: None,
        };
    }
    let reach = delta - 2.0 * rho;
    // best[j]: cost of covering the first j points; from[j]: start of the last group
    let mut best = vec![0.0f64; n + 1];
    let mut from = vec![0usize; n + 1];
    for j in 0..n {
        let (mut cost, mut arg) = (f64::INFINITY, j);
        for i in (0..=j).rev() {
            let span = xs[j] - xs[i];
            if span > reach {
                break;
            }
            let c = best[i] + h.eval(span + 2.0 * rho);
            if c < cost {
                (cost, arg) = (c, i);
            }
        }
        best[j + 1] = cost;
        from[j + 1] = arg;
    }
    let (mut pieces, mut max_diameter, mut j) = (0, 0.0f64, n);
    while j > 0 {
        let i = from[j];
        pieces += 1;
        max_diameter = max_diameter.max(xs[j - 1] - xs[i] + 2.0 * rho);
        j = i;
    }
    CoverReport {
        value: best[n],
        pieces,
        max_diameter,
        level: None,
    }
}

/// Points of the tree's finest net lying within the net resolution of the
/// image of that net under `f`.
pub fn overlap_set(tree: &CellTree, f: &SampledMap) -> Result<Option<CompactNet>> {
    let net = tree.materialize_net(tree.depth())?;
    let image = net
        .points()
        .par_iter()
        .map(|x| mcshane_extend(f, &SampleInput::Point(x.clone())))
        .collect::<Result<Vec<_>>>()?;
    let image = CompactNet::exact(image)?;
    let res = net.resolution();
    let mut near = Vec::new();
    for x in net.points() {
        let i = image.points().partition_point(|y| y.x() < x.x());
        let close = [i.wrapping_sub(1), i]
            .iter()
            .filter_map(|&j| image.points().get(j))
            .any(|y| (y.x() - x.x()).abs() <= res);
        if close {
            near.push(x.clone());
        }
    }
    if near.is_empty() {
        return Ok(None);
    }
    Ok(Some(CompactNet::new(near, res)?))
}

/// Interval-cover cost of the overlap between the net and its image; an empty
/// overlap costs `0` since `diam(∅) = 0`.
pub fn overlap_upper(tree: &CellTree, f: &SampledMap, h: &GaugeFunction, delta: f64) -> Result<f64> {
    if f.output_dim() != 1 {
        return Err(GifsError::DimensionMismatch {
            expected: 1,
            found: f.output_dim(),
        });
    }
    match overlap_set(tree, f)? {
        None => Ok(0.0),
        Some(set) => Ok(premeasure_upper(&set, h, delta, CoverStrategy::Intervals, None)?.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::ArityProfile;
    use crate::balanced::build_balanced_set;
    use crate::lipschitz::Anchor;

    fn tree() -> CellTree {
        build_balanced_set(2.0, &ArityProfile::new(vec![2, 2, 8]).unwrap(), Interval::new(0.0, 1.0)).unwrap()
    }

    #[test]
    fn gauge_parsing_and_values() {
        let g: GaugeFunction = "t^0.5".parse().unwrap();
        assert_eq!(g.eval(0.25), 0.5);
        assert_eq!(g.eval(0.0), 0.0);
        let t: GaugeFunction = "table:1:2,2:3".parse().unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(1.5), 2.5);
        assert_eq!(t.eval(10.0), 3.0);
        assert_eq!(t.to_string().parse::<GaugeFunction>().unwrap(), t);
        assert!("t^-1".parse::<GaugeFunction>().is_err());
        assert!("table:1:0".parse::<GaugeFunction>().is_err());
        assert!("table:1:2,0.5:3".parse::<GaugeFunction>().is_err());
    }

    #[test]
    fn strategies_parse() {
        assert_eq!("cell:3".parse::<CoverStrategy>().unwrap(), CoverStrategy::Cells(Some(3)));
        assert_eq!("greedy".parse::<CoverStrategy>().unwrap(), CoverStrategy::Intervals);
        assert!("cell:0".parse::<CoverStrategy>().is_err());
    }

    #[test]
    fn unit_interval_length() {
        let net = CompactNet::interval_grid(0.0, 1.0, 10_001).unwrap();
        for delta in [1e-3, 1e-2, 0.3] {
            let r = premeasure_upper(&net, &GaugeFunction::power(1.0).unwrap(), delta, CoverStrategy::Intervals, None)
                .unwrap();
            assert!(r.value >= 1.0 && r.value <= 1.0 + delta, "{delta}: {}", r.value);
            assert!(r.max_diameter <= delta);
        }
    }

    #[test]
    fn cantor_cell_cover_closed_form() {
        let h = GaugeFunction::cantor();
        for m in 1..=8 {
            let hier = CellHierarchy::ternary_cantor(m).unwrap();
            let r = cell_cover(&hier.net().unwrap(), &hier, m, &h, hier.bound(m)).unwrap();
            assert_eq!(r.pieces, 1 << m);
            assert!((r.value - 1.0).abs() < 1e-9, "{m}: {}", r.value);
        }
    }

    #[test]
    fn singleton_costs_nothing() {
        let s = CompactNet::from_scalars(&[0.3]).unwrap();
        let r = premeasure_upper(&s, &GaugeFunction::cantor(), 0.1, CoverStrategy::Intervals, None).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn coarse_cells_are_refused() {
        let t = tree();
        let hier = CellHierarchy::of_tree(&t);
        let net = t.materialize_net(3).unwrap();
        let err = cell_cover(&net, &hier, 1, &GaugeFunction::cantor(), t.diam_bound(1) / 2.0);
        assert!(matches!(err, Err(GifsError::CoverTooCoarse { depth: 1, .. })));
    }

    #[test]
    fn cell_value_is_sum_over_cells() {
        let t = tree();
        let hier = CellHierarchy::of_tree(&t);
        let net = t.materialize_net(3).unwrap();
        let h = GaugeFunction::power(0.7).unwrap();
        for n in 1..=3 {
            let r = cell_cover(&net, &hier, n, &h, t.diam_bound(n)).unwrap();
            let direct: f64 = t.cells_at(n).iter().map(|c| c.width().powf(0.7)).sum();
            assert!((r.value - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    fn affine_sample(t: &CellTree, scale: f64, shift: f64) -> SampledMap {
        let anchors = t
            .materialize_net(t.depth())
            .unwrap()
            .points()
            .iter()
            .map(|x| Anchor {
                input: SampleInput::Point(x.clone()),
                output: Point::scalar(scale * x.x() + shift),
            })
            .collect();
        SampledMap::new(anchors, scale.abs()).unwrap()
    }

    #[test]
    fn overlap_cases() {
        let t = tree();
        let h = GaugeFunction::cantor();
        assert_eq!(overlap_upper(&t, &affine_sample(&t, 0.5, 10.0), &h, 0.1).unwrap(), 0.0);
        let x = t.representative(&crate::address::Address::new(vec![2, 1, 1])).unwrap();
        let konst = affine_sample(&t, 0.0, x);
        let set = overlap_set(&t, &konst).unwrap().unwrap();
        assert_eq!(set.len(), 1);
        let v = overlap_upper(&t, &konst, &h, 0.1).unwrap();
        assert!(v <= h.eval(2.0 * t.diam_bound(3)) + 1e-15);
    }
}
