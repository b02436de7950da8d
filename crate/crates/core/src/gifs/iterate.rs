//! Fixed-point iteration of Hutchinson operators on finite nets.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{GifsError, Result};
use crate::metric::{hausdorff_distance, CompactNet};

use super::ifs::{hutchinson_step_gifs, hutchinson_step_ifs, GifsSystem, IfsSystem, DEFAULT_TUPLE_CAP};
use super::inf::{hutchinson_step_inf, GifsInfSystem, TuplePolicy};

pub trait HutchinsonOperator {
    /// Declared contraction factor, the largest map bound.
    fn contraction(&self) -> f64;
    fn step(&self, s: &CompactNet) -> Result<CompactNet>;
}

impl HutchinsonOperator for IfsSystem {
    fn contraction(&self) -> f64 {
        IfsSystem::contraction(self)
    }

    fn step(&self, s: &CompactNet) -> Result<CompactNet> {
        hutchinson_step_ifs(self, s)
    }
}

impl HutchinsonOperator for GifsSystem {
    fn contraction(&self) -> f64 {
        GifsSystem::contraction(self)
    }

    fn step(&self, s: &CompactNet) -> Result<CompactNet> {
        hutchinson_step_gifs(self, s, DEFAULT_TUPLE_CAP)
    }
}

impl HutchinsonOperator for GifsInfSystem {
    fn contraction(&self) -> f64 {
        GifsInfSystem::contraction(self)
    }

    fn step(&self, s: &CompactNet) -> Result<CompactNet> {
        hutchinson_step_inf(self, s, TuplePolicy::Auto)
    }
}

/// A system paired with an explicit tuple policy.
pub struct InfOperator<'a> {
    pub sys: &'a GifsInfSystem,
    pub policy: TuplePolicy,
}

impl HutchinsonOperator for InfOperator<'_> {
    fn contraction(&self) -> f64 {
        self.sys.contraction()
    }

    fn step(&self, s: &CompactNet) -> Result<CompactNet> {
        hutchinson_step_inf(self.sys, s, self.policy)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointRun {
    pub net: CompactNet,
    /// `trace[k] = H(S_k, S_(k+1))`.
    pub trace: Vec<f64>,
    /// False when `max_iter` ran out before the stopping rule fired.
    pub converged: bool,
    pub steps: usize,
    /// Stopping threshold `tol (1 - c) / c`.
    pub threshold: f64,
    pub contraction: f64,
}

impl FixedPointRun {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,hausdorff_delta\n");
        for (k, d) in self.trace.iter().enumerate() {
            let _ = writeln!(out, "{k},{d}");
        }
        out
    }

    /// A priori distance from the last iterate to the true fixed point.
    pub fn error_bound(&self) -> f64 {
        match self.trace.last() {
            Some(d) if self.contraction < 1.0 => self.contraction * d / (1.0 - self.contraction),
            _ => f64::INFINITY,
        }
    }
}

/// Iterates `op` from `s0` until `H(S_k, S_(k+1)) <= tol (1 - c) / c`, which
/// places `S_(k+1)` within `tol` of the attractor.
pub fn iterate_to_fixed_point<O: HutchinsonOperator + ?Sized>(
    op: &O,
    s0: &CompactNet,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointRun> {
    let c = op.contraction();
    if !(0.0..1.0).contains(&c) {
        return Err(GifsError::NonContractive(c));
    }
    if !(tol > 0.0) {
        return Err(GifsError::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let threshold = if c == 0.0 { f64::INFINITY } else { tol * (1.0 - c) / c };
    let mut cur = s0.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = op.step(&cur)?;
        let d = hausdorff_distance(&cur, &next)?;
        trace.push(d);
        cur = next;
        if d <= threshold {
            converged = true;
            break;
        }
    }
    Ok(FixedPointRun {
        net: cur,
        steps: trace.len(),
        trace,
        converged,
        threshold,
        contraction: c,
    })
}

/// `trace[k] <= c^k trace[0] + slack` for every `k`.
pub fn trace_dominated(trace: &[f64], c: f64, slack: f64) -> bool {
    let Some(&t0) = trace.first() else { return true };
    trace
        .iter()
        .enumerate()
        .all(|(k, &d)| d <= c.powi(k as i32) * t0 + slack)
}
