//! Classical IFS and generalized IFS of finite order `m`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GifsError, Result};
use crate::metric::{CompactNet, Point};

/// Default ceiling on evaluated tuples per Hutchinson step.
pub const DEFAULT_TUPLE_CAP: u128 = 1_000_000;

type SelfMap = dyn Fn(&Point) -> Point + Send + Sync;
type TupleMap = dyn Fn(&[Point]) -> Point + Send + Sync;

/// Affine similarity `x -> scale * x + shift`, the serializable IFS map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub scale: f64,
    pub shift: Vec<f64>,
}

/// `(x_1, ..., x_m) -> sum_k weights[k] * x_k + shift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTupleParams {
    pub weights: Vec<f64>,
    pub shift: Vec<f64>,
}

#[derive(Clone)]
pub struct IfsMap {
    name: String,
    lip: f64,
    params: Option<AffineParams>,
    f: Arc<SelfMap>,
}

impl IfsMap {
    pub fn new<F>(name: impl Into<String>, lip: f64, f: F) -> Self
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        IfsMap {
            name: name.into(),
            lip,
            params: None,
            f: Arc::new(f),
        }
    }

    pub fn affine(params: AffineParams) -> Self {
        let s = params.clone();
        IfsMap {
            name: format!("{}x+{:?}", params.scale, params.shift),
            lip: params.scale.abs(),
            params: Some(params),
            f: Arc::new(move |x: &Point| {
                Point::new(x.coords().iter().zip(&s.shift).map(|(c, t)| s.scale * c + t).collect())
                    .expect("affine image of a finite point is finite")
            }),
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        (self.f)(x)
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> Option<&AffineParams> {
        self.params.as_ref()
    }
}

impl fmt::Debug for IfsMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IfsMap").field("name", &self.name).field("lip", &self.lip).finish()
    }
}

#[derive(Clone, Debug)]
pub struct IfsSystem {
    maps: Vec<IfsMap>,
}

impl IfsSystem {
    pub fn new(maps: Vec<IfsMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(GifsError::InvalidParameter("an IFS needs at least one map".into()));
        }
        if let Some(m) = maps.iter().find(|m| !(0.0..1.0).contains(&m.lip)) {
            return Err(GifsError::NonContractive(m.lip));
        }
        Ok(IfsSystem { maps })
    }

    /// `{x/3, x/3 + 2/3}` on the line.
    pub fn cantor() -> Self {
        IfsSystem::new(vec![
            IfsMap::affine(AffineParams {
                scale: 1.0 / 3.0,
                shift: vec![0.0],
            }),
            IfsMap::affine(AffineParams {
                scale: 1.0 / 3.0,
                shift: vec![2.0 / 3.0],
            }),
        ])
        .expect("cantor maps are contractions")
    }

    pub fn maps(&self) -> &[IfsMap] {
        &self.maps
    }

    pub fn contraction(&self) -> f64 {
        self.maps.iter().map(IfsMap::lip).fold(0.0, f64::max)
    }
}

/// `S -> f_1(S) ∪ ... ∪ f_n(S)`, resolution scaled by the contraction factor.
pub fn hutchinson_step_ifs(sys: &IfsSystem, s: &CompactNet) -> Result<CompactNet> {
    let points: Vec<Point> = sys
        .maps
        .par_iter()
        .flat_map_iter(|f| s.points().iter().map(move |x| f.apply(x)))
        .collect();
    CompactNet::new(points, sys.contraction() * s.resolution())
}

#[derive(Clone)]
pub struct GifsMap {
    name: String,
    lip: f64,
    params: Option<AffineTupleParams>,
    f: Arc<TupleMap>,
}

impl GifsMap {
    pub fn new<F>(name: impl Into<String>, lip: f64, f: F) -> Self
    where
        F: Fn(&[Point]) -> Point + Send + Sync + 'static,
    {
        GifsMap {
            name: name.into(),
            lip,
            params: None,
            f: Arc::new(f),
        }
    }

    /// Lipschitz bound `sum |w_k|` for the maximum metric on `X^m`.
    pub fn affine(params: AffineTupleParams) -> Self {
        let s = params.clone();
        GifsMap {
            name: format!("{:?}.x+{:?}", params.weights, params.shift),
            lip: params.weights.iter().map(|w| w.abs()).sum(),
            params: Some(params),
            f: Arc::new(move |xs: &[Point]| {
                let coords = s
                    .shift
                    .iter()
                    .enumerate()
                    .map(|(c, t)| t + xs.iter().zip(&s.weights).map(|(x, w)| w * x.coords()[c]).sum::<f64>())
                    .collect();
                Point::new(coords).expect("affine image of finite points is finite")
            }),
        }
    }

    pub fn apply(&self, xs: &[Point]) -> Point {
        (self.f)(xs)
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> Option<&AffineTupleParams> {
        self.params.as_ref()
    }
}

impl fmt::Debug for GifsMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GifsMap").field("name", &self.name).field("lip", &self.lip).finish()
    }
}

#[derive(Clone, Debug)]
pub struct GifsSystem {
    order: usize,
    maps: Vec<GifsMap>,
}

impl GifsSystem {
    pub fn new(order: usize, maps: Vec<GifsMap>) -> Result<Self> {
        if order == 0 || maps.is_empty() {
            return Err(GifsError::InvalidParameter("a GIFS needs order >= 1 and at least one map".into()));
        }
        if let Some(m) = maps.iter().find(|m| !(0.0..1.0).contains(&m.lip)) {
            return Err(GifsError::NonContractive(m.lip));
        }
        if let Some(m) = maps.iter().find(|m| m.params.as_ref().is_some_and(|s| s.weights.len() != order)) {
            return Err(GifsError::InvalidParameter(format!("map {} has the wrong number of weights", m.name)));
        }
        Ok(GifsSystem { order, maps })
    }

    /// `(x+y)/4` and `(x+y)/4 + 1/2` on the line; the attractor is `[0, 1]`.
    pub fn averaging() -> Self {
        let g = |shift: f64| {
            GifsMap::affine(AffineTupleParams {
                weights: vec![0.25, 0.25],
                shift: vec![shift],
            })
        };
        GifsSystem::new(2, vec![g(0.0), g(0.5)]).expect("averaging maps are contractions")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn maps(&self) -> &[GifsMap] {
        &self.maps
    }

    pub fn contraction(&self) -> f64 {
        self.maps.iter().map(GifsMap::lip).fold(0.0, f64::max)
    }
}

/// Union over maps of the images of every `m`-tuple from `S`.
pub fn hutchinson_step_gifs(sys: &GifsSystem, s: &CompactNet, cap: u128) -> Result<CompactNet> {
    let n = s.len();
    let needed = (n as u128)
        .checked_pow(sys.order as u32)
        .unwrap_or(u128::MAX)
        .saturating_mul(sys.maps.len() as u128);
    if needed > cap {
        return Err(GifsError::TupleExplosion { needed, cap });
    }
    let total = n.pow(sys.order as u32);
    let pts = s.points();
    let points: Vec<Point> = (0..total)
        .into_par_iter()
        .flat_map_iter(|mut idx| {
            let mut tuple = Vec::with_capacity(sys.order);
            for _ in 0..sys.order {
                tuple.push(pts[idx % n].clone());
                idx /= n;
            }
            sys.maps.iter().map(move |g| g.apply(&tuple)).collect::<Vec<_>>()
        })
        .collect();
    CompactNet::new(points, sys.contraction() * s.resolution())
}
