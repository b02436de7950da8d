//! Lipschitz constants of sampled maps, McShane extension, and extension of
//! transformer systems on a balanced set to all of `l_inf(R^n)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{GifsError, Result};
use crate::gifs::inf::{apply_inf_map, policy_tuples, GifsInfMap, GifsInfSystem, InfMapKind, TuplePolicy};
use crate::gifs::witness::refinement_order;
use crate::metric::{seq_metric, BoundedSeq, Point};

/// Input of a sampled map: a point (Euclidean metric) or a sequence (`d_1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleInput {
    Point(Point),
    Seq(BoundedSeq),
}

impl SampleInput {
    pub fn distance(&self, other: &SampleInput) -> Result<f64> {
        match (self, other) {
            (SampleInput::Point(a), SampleInput::Point(b)) => {
                if a.dim() != b.dim() {
                    return Err(GifsError::DimensionMismatch {
                        expected: a.dim(),
                        found: b.dim(),
                    });
                }
                Ok(a.distance(b))
            }
            (SampleInput::Seq(a), SampleInput::Seq(b)) => Ok(seq_metric(1.0, a, b)?.value),
            _ => Err(GifsError::InvalidParameter("mixed point and sequence inputs".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub input: SampleInput,
    pub output: Point,
}

/// Finitely many input/output pairs, optionally with a declared bound that
/// every pair respects.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledMap {
    anchors: Vec<Anchor>,
    bound: Option<f64>,
}

impl SampledMap {
    /// Anchors without a declared bound; usable for estimation only.
    pub fn from_anchors(anchors: Vec<Anchor>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(GifsError::EmptySet);
        }
        let dim = anchors[0].output.dim();
        if let Some(a) = anchors.iter().find(|a| a.output.dim() != dim) {
            return Err(GifsError::DimensionMismatch {
                expected: dim,
                found: a.output.dim(),
            });
        }
        Ok(SampledMap { anchors, bound: None })
    }

    /// Anchors with declared bound `bound`; every pair must satisfy
    /// `d(out_i, out_j) <= bound * d(in_i, in_j) + 1e-12 * scale`.
    pub fn new(anchors: Vec<Anchor>, bound: f64) -> Result<Self> {
        if !bound.is_finite() || bound < 0.0 {
            return Err(GifsError::InvalidParameter(format!("bound {bound} must be finite and nonnegative")));
        }
        let mut map = SampledMap::from_anchors(anchors)?;
        map.bound = Some(bound);
        let scale = map.output_scale();
        let n = map.anchors.len();
        let bad = (0..n)
            .into_par_iter()
            .map(|i| -> Result<Option<(usize, usize, f64)>> {
                for j in 0..i {
                    let din = map.anchors[i].input.distance(&map.anchors[j].input)?;
                    let dout = map.anchors[i].output.distance(&map.anchors[j].output);
                    if dout > bound * din + 1e-12 * scale {
                        let ratio = if din > 0.0 { dout / din } else { f64::INFINITY };
                        return Ok(Some((j, i, ratio)));
                    }
                }
                Ok(None)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .next();
        if let Some((i, j, ratio)) = bad {
            return Err(GifsError::InconsistentSample { bound, i, j, ratio });
        }
        Ok(map)
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn output_dim(&self) -> usize {
        self.anchors[0].output.dim()
    }

    fn output_scale(&self) -> f64 {
        self.anchors
            .iter()
            .flat_map(|a| a.output.coords().iter().map(|c| c.abs()))
            .fold(1.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// Largest finite ratio `d(out)/d(in)` over anchor pairs.
    pub value: f64,
    /// Some pair has equal inputs and different outputs.
    pub infinite: bool,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs: usize,
}

/// Maximum of `d(out)/d(in)` over all anchor pairs.
pub fn estimate_lipschitz(f: &SampledMap) -> Result<LipschitzEstimate> {
    let n = f.anchors.len();
    if n < 2 {
        return Err(GifsError::InsufficientInput("at least two anchors are needed".into()));
    }
    let rows = (1..n)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool, Option<(usize, usize)>)> {
            let mut best = (0.0f64, false, None);
            for j in 0..i {
                let din = f.anchors[i].input.distance(&f.anchors[j].input)?;
                let dout = f.anchors[i].output.distance(&f.anchors[j].output);
                if din == 0.0 {
                    best.1 |= dout > 0.0;
                } else if dout / din > best.0 {
                    best = (dout / din, best.1, Some((j, i)));
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut est = LipschitzEstimate {
        value: 0.0,
        infinite: false,
        worst_pair: None,
        pairs: n * (n - 1) / 2,
    };
    for (v, inf, pair) in rows {
        est.infinite |= inf;
        if v > est.value {
            est.value = v;
            est.worst_pair = pair;
        }
    }
    Ok(est)
}

/// `f~_c(x) = min_a (f_c(a) + L d(x, a))` in every output coordinate.
pub fn mcshane_extend(f: &SampledMap, x: &SampleInput) -> Result<Point> {
    let l = f
        .bound
        .ok_or_else(|| GifsError::InvalidParameter("extension needs a declared bound".into()))?;
    let dists = f
        .anchors
        .iter()
        .map(|a| a.input.distance(x))
        .collect::<Result<Vec<_>>>()?;
    let coords = (0..f.output_dim())
        .map(|c| {
            f.anchors
                .iter()
                .zip(&dists)
                .map(|(a, d)| a.output.coords()[c] + l * d)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Point::new(coords)
}

/// Value of the per-coordinate McShane extension of a transformer map, with
/// the net tuples of `l_inf(K)` as anchors.
///
/// Outputs depend only on the vector of parity counts per level, so the
/// minimum over anchors splits into a bottleneck problem over those vectors:
/// for each reachable count vector `o`, `B_o` is the smallest possible
/// `max_m d(x_m, a_m)` over read entries, and unread entries contribute their
/// distance `tau` to the net.
pub(crate) fn extended_transformer_value(f: &GifsInfMap, s: &BoundedSeq) -> Result<Point> {
    let InfMapKind::Extended {
        prefix,
        coordinate_bound: l,
    } = f.kind()
    else {
        return Err(GifsError::Unsupported("not an extended map".into()));
    };
    let dom = f.domain();
    let tree = dom.tree();
    let profile = tree.profile();
    let n = tree.depth();
    let p = prefix.len();
    let levels = n - p;
    let radix: Vec<usize> = (1..=levels).map(|j| profile.arity(j + p) as usize).collect();
    let mut stride = vec![1usize; levels];
    for j in (0..levels.saturating_sub(1)).rev() {
        stride[j] = stride[j + 1] * radix[j + 1];
    }
    let states: usize = radix.iter().product();
    let leaves = dom.leaves();
    let w = f.consumption().entries;

    let mut best = vec![f64::INFINITY; states];
    best[0] = 0.0;
    for m in 1..=w {
        let mask = f.level_mask(m);
        let x = s.get(m - 1);
        let mut group: BTreeMap<u64, f64> = BTreeMap::new();
        for (r, y) in leaves.iter().enumerate() {
            let d = x.distance(y);
            let e = group.entry(dom.parity_bits(r) & mask).or_insert(f64::INFINITY);
            *e = e.min(d);
        }
        let shifts: Vec<(usize, f64)> = group
            .into_iter()
            .map(|(key, d)| {
                let shift = (0..levels).filter(|&j| key >> j & 1 == 1).map(|j| stride[j]).sum();
                (shift, d)
            })
            .collect();
        let mut next = vec![f64::INFINITY; states];
        for (st, &b) in best.iter().enumerate() {
            if b.is_infinite() {
                continue;
            }
            for &(shift, d) in &shifts {
                let v = b.max(d);
                if v < next[st + shift] {
                    next[st + shift] = v;
                }
            }
        }
        best = next;
    }

    let net_dist = |x: &Point| leaves.iter().map(|y| x.distance(y)).fold(f64::INFINITY, f64::min);
    let mut tau = net_dist(s.tail_point());
    for m in w..s.depth() {
        tau = tau.max(net_dist(s.get(m)));
    }

    let mut coords = vec![f64::INFINITY; dom.dim()];
    for (st, &b) in best.iter().enumerate() {
        if b.is_infinite() {
            continue;
        }
        let mut digits = prefix.digits().to_vec();
        digits.extend((0..levels).map(|j| 1 + ((st / stride[j]) % radix[j]) as u32));
        let y = dom.point_of(&Address::new(digits))?;
        let slack = l * b.max(tau);
        for (c, v) in coords.iter_mut().enumerate() {
            *v = v.min(y.coords()[c] + slack);
        }
    }
    Point::new(coords)
}

/// Extends every map of a transformer system on `K ⊂ R^n` to `l_inf(R^n)`
/// with ambient bound at most `r`: the base refinement order `p` is the
/// least with `q^-p <= r / sqrt(n)`, and each extended map has bound
/// `sqrt(n) q^-p`.
pub fn extend_system(sys: &GifsInfSystem, r: f64) -> Result<GifsInfSystem> {
    if !(r > 0.0 && r < 1.0) {
        return Err(GifsError::InvalidParameter(format!("r = {r} must lie in (0, 1)")));
    }
    let dom = sys.domain();
    let tree = dom.tree();
    let target = r / (dom.dim() as f64).sqrt();
    let p = refinement_order(tree.q(), target, false, tree.depth())?;
    let maps = crate::address::enumerate_addresses(tree.profile(), p)?
        .into_iter()
        .map(|prefix| GifsInfMap::extended(dom, prefix))
        .collect::<Result<Vec<_>>>()?;
    GifsInfSystem::new(dom.clone(), maps)
}

/// Bitwise comparison of extended maps with their base transformers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgreementReport {
    pub class_tuples: usize,
    pub random_tuples: usize,
    pub mismatches: usize,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Checks `f~ = f` on one net tuple per read class and on `random` uniformly
/// drawn net tuples per map.
pub fn check_extension_agreement(ext: &GifsInfSystem, random: usize, seed: u64) -> Result<AgreementReport> {
    let dom = ext.domain();
    let knet = dom.knet();
    let mut report = AgreementReport {
        class_tuples: 0,
        random_tuples: 0,
        mismatches: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for f in ext.maps() {
        let prefix = f
            .prefix()
            .ok_or_else(|| GifsError::Unsupported("agreement needs extended maps".into()))?
            .clone();
        let base = GifsInfMap::transformer(dom, prefix)?;
        let mut tuples = policy_tuples(&base, std::slice::from_ref(knet), TuplePolicy::ReadView)?;
        report.class_tuples += tuples.len();
        let w = f.consumption().entries.max(1);
        for _ in 0..random {
            let entries = (0..w)
                .map(|_| knet.points()[rng.gen_range(0..knet.len())].clone())
                .collect();
            tuples.push(BoundedSeq::repeat_last(entries)?);
        }
        report.random_tuples += random;
        let mismatches = tuples
            .par_iter()
            .map(|t| Ok((apply_inf_map(f, t)? != apply_inf_map(&base, t)?) as usize))
            .collect::<Result<Vec<_>>>()?;
        report.mismatches += mismatches.into_iter().sum::<usize>();
    }
    Ok(report)
}

/// Largest ratios seen over random pairs of ambient sequences.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmbientRatio {
    pub pairs: usize,
    /// `max d(f x, f y) / d_1(x, y)`.
    pub max_ratio: f64,
    /// Same with the Euclidean output distance replaced by the worst
    /// single coordinate.
    pub max_coordinate_ratio: f64,
}

/// Samples `pairs` pairs of sequences with entries uniform in a box that
/// extends `margin` beyond `K` on every axis. Half of the pairs are
/// independent; the other half perturb a few entries of the first sequence
/// at a random scale between `1e-4` and `1`, so that short distances are
/// exercised too.
pub fn sample_ambient_ratio(f: &GifsInfMap, pairs: usize, margin: f64, seed: u64) -> Result<AmbientRatio> {
    let dom = f.domain();
    let hull = dom.tree().hull();
    let dim = dom.dim();
    let len = f.consumption().entries + 1;
    let draw = |rng: &mut ChaCha8Rng| -> Result<Point> {
        let coords = (0..dim)
            .map(|c| {
                let (lo, hi) = if c == 0 { (hull.lo, hull.hi) } else { (0.0, 0.0) };
                rng.gen_range(lo - margin..=hi + margin)
            })
            .collect();
        Point::new(coords)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(pairs);
    for k in 0..pairs {
        let x: Vec<Point> = (0..len).map(|_| draw(&mut rng)).collect::<Result<_>>()?;
        let y = if k % 2 == 0 {
            (0..len).map(|_| draw(&mut rng)).collect::<Result<_>>()?
        } else {
            let scale = 10f64.powf(rng.gen_range(-4.0..=0.0));
            let mut y = x.clone();
            for _ in 0..rng.gen_range(1..=len) {
                let m = rng.gen_range(0..len);
                let moved = y[m].coords().iter().map(|v| v + scale * rng.gen_range(-1.0..=1.0)).collect();
                y[m] = Point::new(moved)?;
            }
            y
        };
        inputs.push((BoundedSeq::repeat_last(x)?, BoundedSeq::repeat_last(y)?));
    }
    let ratios = inputs
        .par_iter()
        .map(|(x, y)| {
            let d = seq_metric(1.0, x, y)?.value;
            if d == 0.0 {
                return Ok((0.0, 0.0));
            }
            let (fx, fy) = (apply_inf_map(f, x)?, apply_inf_map(f, y)?);
            let coord = fx
                .coords()
                .iter()
                .zip(fy.coords())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok((fx.distance(&fy) / d, coord / d))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    Ok(AmbientRatio {
        pairs,
        max_ratio: ratios.iter().map(|r| r.0).fold(0.0, f64::max),
        max_coordinate_ratio: ratios.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}
