//! Linear feedback policy `u(k) = K I(k)` and gain selection.
//!
//! Two sufficient conditions are supported. The almost-sure one asks for
//! `δ_max / v_min < K < (1 - d_max) / v_max`; the average one asks for
//! `(δ̄ - d̄) / v̄ < K < (1 - d_max) / v_max`. Each is intersected with the
//! resource cap `[0, L]`. The selected gain is the cheapest gain of the
//! indicator form, falling back to `L` when the proviso fails.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SirdError};
use crate::model::{ModelParams, SirdState};

/// Gain `K` and resource cap `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub gain: f64,
    pub resource_cap: f64,
}

impl PolicyConfig {
    pub fn new(gain: f64, resource_cap: f64) -> Result<Self> {
        let config = Self { gain, resource_cap };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resource_cap.is_finite() && self.resource_cap >= 1.0) {
            return Err(SirdError::InvalidPolicy(format!("resource cap must be >= 1, got {}", self.resource_cap)));
        }
        if !(self.gain >= 0.0 && self.gain <= self.resource_cap) {
            return Err(SirdError::InvalidPolicy(format!("gain {} outside [0, {}]", self.gain, self.resource_cap)));
        }
        Ok(())
    }
}

/// `u = K I`.
pub fn control(config: &PolicyConfig, state: &SirdState) -> Result<f64> {
    if state.i.is_nan() || state.i < 0.0 {
        return Err(SirdError::InvalidPolicy(format!("infected count must be nonnegative, got {}", state.i)));
    }
    Ok(config.gain * state.i)
}

/// A real interval with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl GainInterval {
    /// `(lo, hi)`, or `None` when empty.
    pub fn open(lo: f64, hi: f64) -> Option<Self> {
        Self { lo, hi, lo_closed: false, hi_closed: false }.nonempty()
    }

    pub fn closed(lo: f64, hi: f64) -> Option<Self> {
        Self { lo, hi, lo_closed: true, hi_closed: true }.nonempty()
    }

    fn nonempty(self) -> Option<Self> {
        let keep = self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed);
        keep.then_some(self)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Self { lo, hi, lo_closed, hi_closed }.nonempty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    AlmostSure,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Controllable,
    Uncontrollable,
}

/// Outcome of a gain selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainFeasibility {
    pub mode: ControlMode,
    /// Lower end of the sufficient condition on `K`.
    pub lower_limit: f64,
    /// Upper end of the sufficient condition on `K`.
    pub upper_limit: f64,
    /// `(lower_limit, upper_limit)`; `None` when empty.
    pub interval: Option<GainInterval>,
    pub cap: f64,
    /// `interval ∩ [0, cap]`; `None` when empty.
    pub capped: Option<GainInterval>,
    /// Right-hand side of the proviso on the infection rate: `v_min (1 - d_max) / v_max`
    /// (almost sure) or `v̄ (1 - d_max) / v_max` (average).
    pub threshold: f64,
    /// Whether `δ_max` (or `δ̄`) is strictly below `threshold`.
    pub proviso_holds: bool,
    pub verdict: Verdict,
    pub selected_gain: f64,
    /// Whether the selected gain is strictly above `lower_limit`.
    pub selected_exceeds_lower_limit: bool,
}

fn check_cap(cap: f64) -> Result<()> {
    if cap.is_finite() && cap >= 1.0 {
        Ok(())
    } else {
        Err(SirdError::InvalidPolicy(format!("resource cap must be >= 1, got {cap}")))
    }
}

fn select(
    mode: ControlMode,
    lower_limit: f64,
    upper_limit: f64,
    cap: f64,
    rate: f64,
    effectiveness: f64,
    threshold: f64,
) -> GainFeasibility {
    let interval = GainInterval::open(lower_limit, upper_limit);
    let capped =
        interval.and_then(|i| i.intersect(&GainInterval { lo: 0.0, hi: cap, lo_closed: true, hi_closed: true }));
    let proviso_holds = rate < threshold;
    let selected_gain = if proviso_holds && rate <= cap * effectiveness { rate / effectiveness } else { cap };
    GainFeasibility {
        mode,
        lower_limit,
        upper_limit,
        interval,
        cap,
        capped,
        threshold,
        proviso_holds,
        verdict: if capped.is_some() { Verdict::Controllable } else { Verdict::Uncontrollable },
        selected_gain,
        selected_exceeds_lower_limit: selected_gain > lower_limit,
    }
}

/// Gain feasibility for controlling every trajectory.
pub fn feasibility_almost_sure(params: &ModelParams, cap: f64) -> Result<GainFeasibility> {
    params.validate()?;
    check_cap(cap)?;
    Ok(select(
        ControlMode::AlmostSure,
        params.delta_max / params.v_min,
        (1.0 - params.d_max) / params.v_max,
        cap,
        params.delta_max,
        params.v_min,
        params.v_min * (1.0 - params.d_max) / params.v_max,
    ))
}

/// Gain feasibility for controlling the expected trajectory.
pub fn feasibility_average(params: &ModelParams, cap: f64) -> Result<GainFeasibility> {
    params.validate()?;
    check_cap(cap)?;
    Ok(select(
        ControlMode::Average,
        (params.delta_mean - params.d_mean) / params.v_mean,
        (1.0 - params.d_max) / params.v_max,
        cap,
        params.delta_mean,
        params.v_mean,
        params.v_mean * (1.0 - params.d_max) / params.v_max,
    ))
}

/// `[0, (1 - d_max) / v_max]`: gains that keep `I(k) >= 0` on every path.
pub fn admissible_gain_range(params: &ModelParams) -> Result<GainInterval> {
    params.validate()?;
    Ok(GainInterval { lo: 0.0, hi: (1.0 - params.d_max) / params.v_max, lo_closed: true, hi_closed: true })
}

pub(crate) fn check_admissible(params: &ModelParams, gain: f64) -> Result<()> {
    let range = admissible_gain_range(params)?;
    if range.contains(gain) {
        Ok(())
    } else {
        Err(SirdError::GainOutOfRange { gain, lo: range.lo, hi: range.hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(delta_max: f64, d_max: f64, v_min: f64, v_max: f64) -> ModelParams {
        ModelParams {
            s0: 1e6,
            i0: 100.0,
            delta_max,
            d_max,
            v_min,
            v_max,
            delta_mean: delta_max,
            d_mean: d_max,
            v_mean: v_min,
        }
    }

    fn with_means(delta_mean: f64, d_mean: f64, v_mean: f64) -> ModelParams {
        ModelParams {
            s0: 1e6,
            i0: 100.0,
            delta_max: 0.5135,
            d_max: 0.0449,
            v_min: 0.1,
            v_max: 0.2,
            delta_mean,
            d_mean,
            v_mean,
        }
    }

    fn state(i: f64) -> SirdState {
        SirdState { k: 0, s: 1e6, i, r: 0.0, d: 0.0 }
    }

    #[test]
    fn control_examples() {
        assert_eq!(control(&PolicyConfig::new(0.0, 1.0).unwrap(), &state(123.0)).unwrap(), 0.0);
        assert_eq!(control(&PolicyConfig::new(2.0, 2.0).unwrap(), &state(150.0)).unwrap(), 300.0);
        assert_relative_eq!(
            control(&PolicyConfig::new(1.4245, 2.0).unwrap(), &state(100.0)).unwrap(),
            142.45,
            max_relative = 1e-12
        );
        assert!(control(&PolicyConfig::new(1.0, 1.0).unwrap(), &state(-1.0)).is_err());
    }

    #[test]
    fn policy_config_validation() {
        assert!(PolicyConfig::new(0.5, 0.9).is_err());
        assert!(PolicyConfig::new(2.5, 2.0).is_err());
        assert!(PolicyConfig::new(-0.1, 2.0).is_err());
    }

    #[test]
    fn empty_capped_set_is_uncontrollable() {
        let f = feasibility_almost_sure(&params(0.1, 0.01, 0.01, 0.01), 1.0).unwrap();
        assert_eq!((f.lower_limit, f.upper_limit), (10.0, 99.0));
        assert_eq!(f.interval, GainInterval::open(10.0, 99.0));
        assert!(f.interval.is_some());
        assert!(f.capped.is_none());
        assert_eq!(f.verdict, Verdict::Uncontrollable);
        assert_eq!(f.selected_gain, 1.0);
    }

    #[test]
    fn failed_proviso_selects_cap() {
        let f = feasibility_almost_sure(&params(0.5135, 0.0449, 0.1, 0.2), 2.0).unwrap();
        assert!((f.threshold - 0.4775).abs() < 1e-3);
        assert!(!f.proviso_holds);
        assert!(f.interval.is_none());
        assert_eq!(f.verdict, Verdict::Uncontrollable);
        assert_eq!(f.selected_gain, 2.0);
    }

    #[test]
    fn zero_rate_selects_zero() {
        let f = feasibility_almost_sure(&params(0.0, 0.0449, 0.1, 0.2), 1.0).unwrap();
        assert_eq!(f.selected_gain, 0.0);
        assert_eq!(f.verdict, Verdict::Controllable);
    }

    #[test]
    fn controllable_selects_lower_end() {
        let f = feasibility_almost_sure(&params(0.1, 0.05, 0.4, 0.6), 1.0).unwrap();
        assert_eq!(f.verdict, Verdict::Controllable);
        assert_relative_eq!(f.selected_gain, 0.25, max_relative = 1e-15);
        let capped = f.capped.unwrap();
        assert_eq!((capped.lo, capped.lo_closed), (f.lower_limit, false));
        assert_eq!((capped.hi, capped.hi_closed), (1.0, true));
    }

    #[test]
    fn average_selector_examples() {
        let f = feasibility_average(&with_means(0.215, 0.002, 0.15), 2.0).unwrap();
        assert!(f.proviso_holds);
        assert_relative_eq!(f.selected_gain, 0.215 / 0.15, max_relative = 1e-15);
        assert!((f.selected_gain - 1.4333).abs() < 1e-4);
        assert!(f.selected_exceeds_lower_limit);
        assert_eq!(f.verdict, Verdict::Controllable);

        // with no deaths the selected gain sits on the lower limit
        let f = feasibility_average(&with_means(0.04, 0.0, 0.15), 2.0).unwrap();
        assert_eq!(f.lower_limit, f.selected_gain);
        assert!(!f.selected_exceeds_lower_limit);

        // δ̄ > L v̄ → K* = L
        let f = feasibility_average(&with_means(0.35, 0.002, 0.15), 2.0).unwrap();
        assert_eq!(f.selected_gain, 2.0);
    }

    #[test]
    fn admissible_range_examples() {
        let r = admissible_gain_range(&params(0.1, 0.0, 0.5, 1.0)).unwrap();
        assert_eq!((r.lo, r.hi), (0.0, 1.0));
        let r = admissible_gain_range(&params(0.1, 0.0449, 0.1, 0.2)).unwrap();
        assert_relative_eq!(r.hi, 4.7755, max_relative = 1e-12);
    }

    #[test]
    fn interval_algebra() {
        let open = GainInterval::open(1.0, 3.0).unwrap();
        assert!(!open.contains(1.0) && open.contains(2.0) && !open.contains(3.0));
        assert!(GainInterval::open(2.0, 2.0).is_none());
        assert!(GainInterval::closed(2.0, 2.0).is_some());
        let cap = GainInterval::closed(0.0, 1.0).unwrap();
        assert!(open.intersect(&cap).is_none());
        assert!(GainInterval::open(1.0, 5.0).unwrap().intersect(&GainInterval::closed(0.0, 1.0).unwrap()).is_none());
        let i = GainInterval::open(0.5, 5.0).unwrap().intersect(&GainInterval::closed(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(i, GainInterval { lo: 0.5, hi: 2.0, lo_closed: false, hi_closed: true });
    }
}
