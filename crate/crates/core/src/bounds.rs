//! From criterion values to circuit-depth lower bounds.
//!
//! A positive criterion at distance `x_AB` certifies depth at least
//! `⌊x_AB/2⌋ + 1`. Approximate preparation to trace distance ε raises the
//! threshold to `k(ε) = 2ε ln d_{A′} + 4 g(ε)` (general channels) or `12ε`
//! (second order in a weak measurement).

use crate::error::{Error, Result};

/// Criterion values at or below this are treated as zero.
pub const ZERO_GUARD: f64 = 1e-12;

/// `g(x) = (1+x) ln(1+x) − x ln x`, with `g(0) = 0`.
pub fn g_func(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("g(x) needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + x) * x.ln_1p() - x * x.ln())
}

/// `k(ε) = 2ε ln d_{A′} + 4 g(ε)` for ε in [0, 1].
pub fn k_func(epsilon: f64, d_a_prime: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if d_a_prime == 0 {
        return Err(Error::InvalidParameter("output dimension must be at least 1".into()));
    }
    Ok(2.0 * epsilon * (d_a_prime as f64).ln() + 4.0 * g_func(epsilon)?)
}

/// The ε in [0, ½] with `k(ε) = target`, by bisection to 1e-12.
pub fn k_inverse(target: f64, d_a_prime: usize) -> Result<f64> {
    let hi_val = k_func(0.5, d_a_prime)?;
    if !(0.0..=hi_val).contains(&target) {
        return Err(Error::InvalidParameter(format!("k target {target} outside [0, {hi_val}]")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 * hi.max(1e-300) && hi - lo > f64::MIN_POSITIVE {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if k_func(mid, d_a_prime)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which theorem produced the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    Exact,
    ApproxGeneral { d_a_prime: usize },
    ApproxWeak,
}

impl BoundMode {
    pub fn name(&self) -> &'static str {
        match self {
            BoundMode::Exact => "exact",
            BoundMode::ApproxGeneral { .. } => "approx-general",
            BoundMode::ApproxWeak => "approx-weak",
        }
    }
}

/// Verdict for one criterion evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthBoundResult {
    pub criterion_value: f64,
    pub threshold: f64,
    pub x_ab: usize,
    pub bound_active: bool,
    /// `⌊x_AB/2⌋ + 1` when active, else 0.
    pub depth_lower_bound: usize,
    pub mode: BoundMode,
    pub epsilon: f64,
}

impl DepthBoundResult {
    pub fn d_a_prime(&self) -> Option<usize> {
        match self.mode {
            BoundMode::ApproxGeneral { d_a_prime } => Some(d_a_prime),
            _ => None,
        }
    }
}

/// Depth implied by an active bound at distance `x_ab`.
pub fn depth_from_distance(x_ab: usize) -> usize {
    x_ab / 2 + 1
}

fn verdict(criterion: f64, threshold: f64, x_ab: usize, mode: BoundMode, epsilon: f64) -> DepthBoundResult {
    let bound_active = criterion - threshold > ZERO_GUARD;
    DepthBoundResult {
        criterion_value: criterion,
        threshold,
        x_ab,
        bound_active,
        depth_lower_bound: if bound_active { depth_from_distance(x_ab) } else { 0 },
        mode,
        epsilon,
    }
}

/// Exact preparation: active iff the criterion exceeds the zero guard.
pub fn exact_verdict(criterion: f64, x_ab: usize) -> DepthBoundResult {
    verdict(criterion, 0.0, x_ab, BoundMode::Exact, 0.0)
}

/// ε-approximate preparation with threshold `k(ε)` or `12ε`.
pub fn approx_verdict(criterion: f64, x_ab: usize, epsilon: f64, mode: BoundMode) -> Result<DepthBoundResult> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} is negative")));
    }
    let threshold = match mode {
        BoundMode::Exact => return Err(Error::InvalidParameter("approximate verdict needs an approximate mode".into())),
        BoundMode::ApproxGeneral { d_a_prime } => k_func(epsilon, d_a_prime)?,
        BoundMode::ApproxWeak => 12.0 * epsilon,
    };
    Ok(verdict(criterion, threshold, x_ab, mode, epsilon))
}
