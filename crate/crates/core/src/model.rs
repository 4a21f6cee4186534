//! Domain types and the one-day stochastic recursion.
//!
//! Compartments are real-valued. The recursion is
//!
//! ```text
//! S(k+1) = S(k) - δ(k) I(k)
//! I(k+1) = (1 + δ(k) - d_I(k)) I(k) - v(k) u(k)
//! R(k+1) = R(k) + v(k) u(k)
//! D(k+1) = D(k) + d_I(k) I(k)
//! ```
//!
//! where δ is the rate of undetected infections, v the effectiveness of the
//! control u, and d_I the death rate. [`step`] does not clamp anything: a
//! control large enough to drive `I` negative produces a negative `I`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SirdError};

/// Bounds and means of the three uncertainty processes plus initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Initial susceptible count.
    pub s0: f64,
    /// Initial infected count.
    pub i0: f64,
    pub delta_max: f64,
    pub d_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub delta_mean: f64,
    pub d_mean: f64,
    pub v_mean: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("s0", self.s0),
            ("i0", self.i0),
            ("delta_max", self.delta_max),
            ("d_max", self.d_max),
            ("v_min", self.v_min),
            ("v_max", self.v_max),
            ("delta_mean", self.delta_mean),
            ("d_mean", self.d_mean),
            ("v_mean", self.v_mean),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, x)| !x.is_finite()) {
            return Err(SirdError::InvalidParams(format!("{name} is not finite")));
        }
        let invalid = |msg: String| Err(SirdError::InvalidParams(msg));
        if self.s0 <= 0.0 || self.i0 <= 0.0 {
            return invalid(format!("s0 = {} and i0 = {} must be positive", self.s0, self.i0));
        }
        if !(0.0 < self.v_min && self.v_min <= self.v_mean && self.v_mean <= self.v_max && self.v_max <= 1.0) {
            return invalid(format!(
                "need 0 < v_min <= v_mean <= v_max <= 1, got {} / {} / {}",
                self.v_min, self.v_mean, self.v_max
            ));
        }
        if !(0.0 <= self.delta_mean && self.delta_mean <= self.delta_max) {
            return invalid(format!("need 0 <= delta_mean <= delta_max, got {} / {}", self.delta_mean, self.delta_max));
        }
        if !(0.0 <= self.d_mean && self.d_mean <= self.d_max && self.d_max < 1.0) {
            return invalid(format!("need 0 <= d_mean <= d_max < 1, got {} / {}", self.d_mean, self.d_max));
        }
        if self.i0 * self.delta_max >= self.s0 {
            return invalid(format!("need i0 * delta_max < s0, got {} * {} >= {}", self.i0, self.delta_max, self.s0));
        }
        Ok(())
    }

    /// Rejects a draw that falls outside the declared bounds.
    pub fn check_draw(&self, draw: &UncertaintyDraw) -> Result<()> {
        draw.check_domain()?;
        if draw.delta > self.delta_max {
            return Err(SirdError::DrawOutOfBounds(format!("delta = {} > delta_max = {}", draw.delta, self.delta_max)));
        }
        if draw.v < self.v_min || draw.v > self.v_max {
            return Err(SirdError::DrawOutOfBounds(format!("v = {} outside [{}, {}]", draw.v, self.v_min, self.v_max)));
        }
        if draw.d_i > self.d_max {
            return Err(SirdError::DrawOutOfBounds(format!("d_i = {} > d_max = {}", draw.d_i, self.d_max)));
        }
        Ok(())
    }

    /// Mean one-day growth factor of the uncontrolled infected count, `1 + δ̄ - d̄`.
    pub fn mean_growth(&self) -> f64 {
        1.0 + self.delta_mean - self.d_mean
    }

    pub fn initial_state(&self) -> SirdState {
        SirdState { k: 0, s: self.s0, i: self.i0, r: 0.0, d: 0.0 }
    }
}

/// Compartment values on day `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirdState {
    pub k: usize,
    pub s: f64,
    pub i: f64,
    pub r: f64,
    pub d: f64,
}

impl SirdState {
    /// `S + I + R + D`, conserved by [`step`].
    pub fn total(&self) -> f64 {
        self.s + self.i + self.r + self.d
    }
}

/// One day's realized `(δ, v, d_I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyDraw {
    pub delta: f64,
    pub v: f64,
    pub d_i: f64,
}

impl UncertaintyDraw {
    pub fn new(delta: f64, v: f64, d_i: f64) -> Self {
        Self { delta, v, d_i }
    }

    /// Model-independent domain: `δ >= 0`, `0 < v <= 1`, `0 <= d_I < 1`.
    fn check_domain(&self) -> Result<()> {
        let ok = self.delta.is_finite()
            && self.delta >= 0.0
            && self.v > 0.0
            && self.v <= 1.0
            && self.d_i >= 0.0
            && self.d_i < 1.0;
        if ok {
            Ok(())
        } else {
            Err(SirdError::DrawOutOfBounds(format!(
                "need delta >= 0, 0 < v <= 1, 0 <= d_i < 1, got ({}, {}, {})",
                self.delta, self.v, self.d_i
            )))
        }
    }

    /// `1 + δ - d_I`, the uncontrolled growth factor for this day.
    pub fn growth(&self) -> f64 {
        1.0 + self.delta - self.d_i
    }
}

/// Advances `state` by one day under `draw` and control input `u`.
pub fn step(state: &SirdState, draw: &UncertaintyDraw, u: f64) -> Result<SirdState> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(SirdError::NegativeControl(u));
    }
    draw.check_domain()?;
    let infections = draw.delta * state.i;
    let removed = draw.v * u;
    let deaths = draw.d_i * state.i;
    Ok(SirdState {
        k: state.k + 1,
        s: state.s - infections,
        i: state.i + infections - removed - deaths,
        r: state.r + removed,
        d: state.d + deaths,
    })
}

/// State transition function of the uncontrolled infected count:
/// the product of `1 + δ - d_I` over `draws`. The empty product is 1.
///
/// `Φ(k, k0)` for a full draw sequence is `phi(&draws[k0..k])`.
pub fn phi(draws: &[UncertaintyDraw]) -> f64 {
    draws.iter().map(UncertaintyDraw::growth).product()
}

fn day_span(k: usize, k0: usize) -> Result<i32> {
    if k < k0 {
        return Err(SirdError::ReversedDayRange { k, k0 });
    }
    i32::try_from(k - k0).map_err(|_| SirdError::InvalidParams(format!("day span {} too large", k - k0)))
}

/// Almost-sure bounds `((1 - d_max)^(k-k0), (1 + δ_max)^(k-k0))` on `Φ(k, k0)`.
pub fn phi_bounds(params: &ModelParams, k: usize, k0: usize) -> Result<(f64, f64)> {
    params.validate()?;
    let n = day_span(k, k0)?;
    Ok(((1.0 - params.d_max).powi(n), (1.0 + params.delta_max).powi(n)))
}

/// `E[Φ(k, k0)] = (1 + δ̄ - d̄)^(k-k0)`.
pub fn phi_expectation(params: &ModelParams, k: usize, k0: usize) -> Result<f64> {
    params.validate()?;
    let n = day_span(k, k0)?;
    Ok(params.mean_growth().powi(n))
}

/// Per-day reproduction ratio `β / (γ + d_I)` with `β = δ (S + I) / S` and
/// `γ = v K` for a linear policy with gain `K`.
pub fn reproduction_ratio(state: &SirdState, draw: &UncertaintyDraw, gain: f64) -> Result<f64> {
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(SirdError::InvalidPolicy(format!("gain must be nonnegative, got {gain}")));
    }
    if state.s == 0.0 {
        return Err(SirdError::Singularity("susceptible count is zero".into()));
    }
    let removal = draw.v * gain + draw.d_i;
    if removal == 0.0 {
        return Err(SirdError::Singularity("removal rate v*K + d_I is zero".into()));
    }
    let beta = draw.delta * (state.s + state.i) / state.s;
    Ok(beta / removal)
}
