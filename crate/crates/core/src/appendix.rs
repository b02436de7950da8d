//! A space where keeping only the perfect part of a compact set is not
//! continuous in the Hausdorff metric.
//!
//! `X = {0} × ([0,1] ∪ [2,3])  ∪  {(1/n, i/n) : i ∈ {0..n} ∪ {2n..3n}, n >= 1}`.
//! The isolated points accumulate onto the segments, so
//! `K_n = {(0,0)} ∪ {(1/n, i/n) : i = 0..n}` tends to `{0} × [0,1]`, while
//! the retraction `R(K) = K ∩ X*` sends every `K_n` to `{(0,0)}` and the
//! limit to the whole segment.

use serde::{Deserialize, Serialize};

use crate::error::{GifsError, Result};
use crate::metric::{hausdorff_distance, neighborhood_contains, CompactNet, Point};

/// Finite window of `X`: segment grids at a declared resolution and the
/// isolated points with `n <= n_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExampleSpace {
    pub n_max: usize,
    pub resolution: f64,
    /// Grid step on each segment.
    pub step: f64,
    pub perfect: CompactNet,
    pub isolated: CompactNet,
}

fn isolated_point(n: usize, i: usize) -> Point {
    Point::xy(1.0 / n as f64, i as f64 / n as f64)
}

fn segment_grid(k: usize, lo: f64) -> impl Iterator<Item = Point> {
    (0..=k).map(move |j| Point::xy(0.0, if j == k { lo + 1.0 } else { lo + j as f64 / k as f64 }))
}

pub fn build_example_space(n_max: usize, resolution: f64) -> Result<ExampleSpace> {
    if n_max == 0 {
        return Err(GifsError::InvalidParameter("n_max must be at least 1".into()));
    }
    if !(resolution > 0.0 && resolution < 0.5) {
        return Err(GifsError::InvalidParameter(format!("resolution {resolution} outside (0, 0.5)")));
    }
    // step 1/k <= 2 resolution puts every segment point within `resolution`
    let k = (1.0 / (2.0 * resolution)).ceil() as usize;
    let perfect = CompactNet::new(segment_grid(k, 0.0).chain(segment_grid(k, 2.0)).collect(), 0.5 / k as f64)?;
    let isolated = CompactNet::exact(
        (1..=n_max)
            .flat_map(|n| (0..=n).chain(2 * n..=3 * n).map(move |i| isolated_point(n, i)))
            .collect(),
    )?;
    Ok(ExampleSpace {
        n_max,
        resolution: perfect.resolution(),
        step: 1.0 / k as f64,
        perfect,
        isolated,
    })
}

impl ExampleSpace {
    /// On a segment of the perfect part.
    pub fn in_perfect_part(&self, p: &Point) -> bool {
        let y = p.coords()[1];
        p.x() == 0.0 && ((0.0..=1.0).contains(&y) || (2.0..=3.0).contains(&y))
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == 2 && (self.in_perfect_part(p) || self.isolated.contains(p))
    }

    /// Grid of `{0} × [0, 1]`.
    pub fn lower_segment(&self) -> Result<CompactNet> {
        let pts = self
            .perfect
            .points()
            .iter()
            .filter(|p| p.coords()[1] <= 1.0)
            .cloned()
            .collect();
        CompactNet::new(pts, self.resolution)
    }

    /// `{(0,0)} ∪ {(1/n, i/n) : i = 0..n}`.
    pub fn k_n(&self, n: usize) -> Result<CompactNet> {
        if n == 0 || n > self.n_max {
            return Err(GifsError::InvalidParameter(format!("n = {n} outside 1..={}", self.n_max)));
        }
        let pts = std::iter::once(Point::xy(0.0, 0.0))
            .chain((0..=n).map(|i| isolated_point(n, i)))
            .collect();
        CompactNet::exact(pts)
    }

    /// The whole window as one net.
    pub fn net(&self) -> Result<CompactNet> {
        self.perfect.union(&self.isolated)
    }
}

/// Value of the retraction; the empty set sits at distance `1` from every
/// nonempty set and `0` from itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Retracted {
    Empty,
    Set(CompactNet),
}

impl Retracted {
    pub fn distance(&self, other: &Retracted) -> Result<f64> {
        match (self, other) {
            (Retracted::Empty, Retracted::Empty) => Ok(0.0),
            (Retracted::Empty, _) | (_, Retracted::Empty) => Ok(1.0),
            (Retracted::Set(a), Retracted::Set(b)) => hausdorff_distance(a, b),
        }
    }
}

/// `K ∩ X*`, the part of `K` on the segments.
pub fn retract(k: &CompactNet, space: &ExampleSpace) -> Result<Retracted> {
    if let Some(p) = k.points().iter().find(|p| !space.contains(p)) {
        return Err(GifsError::NotInSet(p.coords().to_vec()));
    }
    let kept: Vec<Point> = k.points().iter().filter(|p| space.in_perfect_part(p)).cloned().collect();
    if kept.is_empty() {
        Ok(Retracted::Empty)
    } else {
        Ok(Retracted::Set(CompactNet::new(kept, k.resolution())?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityWitness {
    pub n: usize,
    /// `H(K_n, K)`, tends to `0`.
    pub h1: f64,
    /// `H(R(K_n), R(K))`, stays at `1`.
    pub h2: f64,
    pub resolution: f64,
}

pub fn discontinuity_witness(n: usize, space: &ExampleSpace) -> Result<DiscontinuityWitness> {
    let kn = space.k_n(n)?;
    let k = space.lower_segment()?;
    let h1 = hausdorff_distance(&kn, &k)?;
    let h2 = retract(&kn, space)?.distance(&retract(&k, space)?)?;
    Ok(DiscontinuityWitness {
        n,
        h1,
        h2,
        resolution: space.resolution,
    })
}

/// `(n, h1, h2)` rows with a header.
pub fn witness_csv(rows: &[DiscontinuityWitness]) -> String {
    let mut out = String::from("n,h1,h2\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.n, r.h1, r.h2));
    }
    out
}

/// Whether `B(A ∪ B, r) = B(A, r) ∪ B(B, r)` on every point of the window.
pub fn ball_union_identity(space: &ExampleSpace, a: &CompactNet, b: &CompactNet, r: f64) -> Result<bool> {
    let ab = a.union(b)?;
    for x in space.net()?.points() {
        let lhs = neighborhood_contains(&ab, r, x)?;
        let rhs = neighborhood_contains(a, r, x)? || neighborhood_contains(b, r, x)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
