//! Analytic solutions, expectations and bounds.
//!
//! The path oracles evaluate the explicit sums for one realized sequence of
//! draws and controls; they never call [`crate::model::step`]. The expectation
//! curves assume the linear policy `u(k) = K I(k)` with an admissible gain.
//!
//! Two-branch formulas switch on a discriminant `Δ` (`K v̄ - δ̄ + d̄` or
//! `K v_min - δ_max`). `|Δ| <= 1e-12` takes the linear branch, `Δ > 1e-12`
//! the geometric one, and anything below is rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SirdError};
use crate::model::{phi, ModelParams, UncertaintyDraw};
use crate::policy::check_admissible;

/// Discriminant tolerance for branch selection.
pub const BRANCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Infected,
    Susceptible,
    Deceased,
    RecoveredUpper,
    RecoveredLower,
}

/// Values for days `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationCurve {
    pub kind: CurveKind,
    pub values: Vec<f64>,
}

impl ExpectationCurve {
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }
}

/// Linear-in-`k` or geometric branch of a two-branch formula.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Linear,
    /// Carries `Δ = 1 - ρ > 0`.
    Geometric(f64),
}

fn branch(discriminant: f64) -> Result<Branch> {
    if discriminant.abs() <= BRANCH_TOL {
        Ok(Branch::Linear)
    } else if discriminant > 0.0 {
        Ok(Branch::Geometric(discriminant))
    } else {
        Err(SirdError::OutOfBranch(discriminant))
    }
}

/// `Σ_{i<k} ρ^i` with `ρ = 1 - Δ`, written as `(1 - ρ^k) / Δ` and evaluated
/// without cancellation for small `Δ`.
fn geometric_sum(b: Branch, k: usize) -> f64 {
    match b {
        Branch::Linear => k as f64,
        Branch::Geometric(gap) => -((k as f64) * (-gap).ln_1p()).exp_m1() / gap,
    }
}

fn check_lengths(draws: &[UncertaintyDraw], controls: &[f64]) -> Result<()> {
    if draws.len() != controls.len() {
        return Err(SirdError::LengthMismatch { expected: draws.len(), found: controls.len() });
    }
    Ok(())
}

/// `I(k) = Φ(k,0) I0 - Σ_{i<k} Φ(k,i+1) v(i) u(i)` for `k = 0..=n`.
pub fn infected_path_oracle(params: &ModelParams, draws: &[UncertaintyDraw], controls: &[f64]) -> Result<Vec<f64>> {
    check_lengths(draws, controls)?;
    Ok((0..=draws.len())
        .map(|k| {
            // walk i = k-1 down to 0 so `tail` is Φ(k, i+1) at each term
            let mut tail = 1.0;
            let mut forced = 0.0;
            for i in (0..k).rev() {
                forced += tail * draws[i].v * controls[i];
                tail *= draws[i].growth();
            }
            tail * params.i0 - forced
        })
        .collect())
}

/// `S(k) = S0 - Σ_{i<k} δ(i) I(i)`, with `I` from [`infected_path_oracle`].
pub fn susceptible_path_oracle(params: &ModelParams, draws: &[UncertaintyDraw], controls: &[f64]) -> Result<Vec<f64>> {
    let infected = infected_path_oracle(params, draws, controls)?;
    Ok(cumulative(params.s0, draws.iter().zip(&infected).map(|(d, i)| -d.delta * i)))
}

/// `R(k) = Σ_{i<k} v(i) u(i)`.
pub fn recovered_path_oracle(draws: &[UncertaintyDraw], controls: &[f64]) -> Result<Vec<f64>> {
    check_lengths(draws, controls)?;
    if let Some(&u) = controls.iter().find(|u| u.is_nan() || **u < 0.0) {
        return Err(SirdError::NegativeControl(u));
    }
    Ok(cumulative(0.0, draws.iter().zip(controls).map(|(d, u)| d.v * u)))
}

/// `D(k) = Σ_{i<k} d_I(i) I(i)`, with `I` from [`infected_path_oracle`].
pub fn deceased_path_oracle(params: &ModelParams, draws: &[UncertaintyDraw], controls: &[f64]) -> Result<Vec<f64>> {
    let infected = infected_path_oracle(params, draws, controls)?;
    Ok(cumulative(0.0, draws.iter().zip(&infected).map(|(d, i)| d.d_i * i)))
}

fn cumulative(start: f64, terms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = start;
    std::iter::once(start)
        .chain(terms.map(|t| {
            acc += t;
            acc
        }))
        .collect()
}

/// Per-compartment paths with no control at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoControlProfile {
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    pub d: Vec<f64>,
}

/// Trajectory when `u ≡ 0`: `I(k) = Φ(k,0) I0` grows whenever `δ >= d_I`.
pub fn no_control_profile(params: &ModelParams, draws: &[UncertaintyDraw]) -> NoControlProfile {
    let i: Vec<f64> = (0..=draws.len()).map(|k| phi(&draws[..k]) * params.i0).collect();
    NoControlProfile {
        s: cumulative(params.s0, draws.iter().zip(&i).map(|(d, x)| -d.delta * x)),
        d: cumulative(0.0, draws.iter().zip(&i).map(|(d, x)| d.d_i * x)),
        r: vec![0.0; draws.len() + 1],
        i,
    }
}

/// Discriminant `K v̄ - δ̄ + d̄` of the expectation formulas.
fn mean_discriminant(params: &ModelParams, gain: f64) -> f64 {
    gain * params.v_mean - params.delta_mean + params.d_mean
}

/// `E[I(k)] = ρ^k I0` with `ρ = 1 + δ̄ - d̄ - K v̄`.
pub fn expected_infected_linear(params: &ModelParams, gain: f64, horizon: usize) -> Result<ExpectationCurve> {
    check_admissible(params, gain)?;
    let ratio = params.mean_growth() - gain * params.v_mean;
    let mut value = params.i0;
    let values = (0..=horizon)
        .map(|_| {
            let current = value;
            value *= ratio;
            current
        })
        .collect();
    Ok(ExpectationCurve { kind: CurveKind::Infected, values })
}

/// Days through which `S(k) >= 0` is guaranteed on every path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Days(u64),
    Unbounded,
}

impl Horizon {
    pub fn covers(&self, horizon: usize) -> bool {
        match self {
            Self::Days(n) => horizon as u64 <= *n,
            Self::Unbounded => true,
        }
    }
}

/// `floor(S0 / (I0 δ_max))`, or unbounded when `δ_max = 0`.
pub fn susceptible_nonneg_horizon(params: &ModelParams) -> Result<Horizon> {
    params.validate()?;
    if params.delta_max == 0.0 {
        return Ok(Horizon::Unbounded);
    }
    Ok(Horizon::Days((params.s0 / (params.i0 * params.delta_max)).floor() as u64))
}

fn check_window(params: &ModelParams, horizon: usize) -> Result<()> {
    match susceptible_nonneg_horizon(params)? {
        Horizon::Days(window) if horizon as u64 > window => Err(SirdError::WindowExceeded { horizon, window }),
        _ => Ok(()),
    }
}

/// `E[S(k)] = S0 - δ̄ I0 Σ_{i<k} ρ^i` inside the susceptible validity window.
pub fn expected_susceptible_linear(params: &ModelParams, gain: f64, horizon: usize) -> Result<ExpectationCurve> {
    check_admissible(params, gain)?;
    check_window(params, horizon)?;
    let b = branch(mean_discriminant(params, gain))?;
    let values = (0..=horizon).map(|k| params.s0 - params.delta_mean * params.i0 * geometric_sum(b, k)).collect();
    Ok(ExpectationCurve { kind: CurveKind::Susceptible, values })
}

/// `E[D(k)] = d̄ I0 Σ_{i<k} ρ^i`.
pub fn expected_deceased_linear(params: &ModelParams, gain: f64, horizon: usize) -> Result<ExpectationCurve> {
    check_admissible(params, gain)?;
    let b = branch(mean_discriminant(params, gain))?;
    let values = (0..=horizon).map(|k| params.d_mean * params.i0 * geometric_sum(b, k)).collect();
    Ok(ExpectationCurve { kind: CurveKind::Deceased, values })
}

/// Bracket `v_min K Σ E[I(i)] <= E[R(k)] <= v_max K Σ E[I(i)]` under the linear policy.
pub fn expected_recovered_bounds(
    params: &ModelParams,
    gain: f64,
    horizon: usize,
) -> Result<(ExpectationCurve, ExpectationCurve)> {
    let infected = expected_infected_linear(params, gain, horizon)?;
    let sums = cumulative(0.0, infected.values[..horizon].iter().copied());
    let scaled = |c: f64, kind| ExpectationCurve { kind, values: sums.iter().map(|s| c * gain * s).collect() };
    Ok((scaled(params.v_min, CurveKind::RecoveredLower), scaled(params.v_max, CurveKind::RecoveredUpper)))
}

/// `lim E[D(k)]` as `k → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeceasedLimit {
    Finite(f64),
    Infinite,
}

pub fn expected_deceased_limit(params: &ModelParams, gain: f64) -> Result<DeceasedLimit> {
    check_admissible(params, gain)?;
    let disc = mean_discriminant(params, gain);
    Ok(match branch(disc)? {
        Branch::Linear if params.d_mean == 0.0 => DeceasedLimit::Finite(0.0),
        Branch::Linear => DeceasedLimit::Infinite,
        Branch::Geometric(gap) => DeceasedLimit::Finite(params.i0 * params.d_mean / gap),
    })
}

/// Pathwise `I(k) <= (1 + δ_max - K v_min)^k I0` for admissible gains.
pub fn infected_bound_pathwise(params: &ModelParams, gain: f64, horizon: usize) -> Result<Vec<f64>> {
    check_admissible(params, gain)?;
    let ratio = 1.0 + params.delta_max - gain * params.v_min;
    Ok((0..=horizon).map(|k| ratio.powi(k as i32) * params.i0).collect())
}

/// Pathwise `D(k) <= d_max I0 Σ_{i<k} (1 + δ_max - K v_min)^i`, valid for
/// `δ_max / v_min <= K <= (1 - d_max) / v_max`.
pub fn deceased_bound_pathwise(params: &ModelParams, gain: f64, horizon: usize) -> Result<Vec<f64>> {
    check_admissible(params, gain)?;
    let disc = gain * params.v_min - params.delta_max;
    let b = branch(disc).map_err(|_| SirdError::GainOutOfRange {
        gain,
        lo: params.delta_max / params.v_min,
        hi: (1.0 - params.d_max) / params.v_max,
    })?;
    Ok((0..=horizon).map(|k| params.d_max * params.i0 * geometric_sum(b, k)).collect())
}

/// Upper bound on `E[I(k)]` under any causal policy with mean controls
/// `expected_controls`:
/// `(1 + δ̄ - d̄)^k I0 - v_min Σ_{i<k} (1 + δ̄ - d̄)^(k-i-1) E[u(i)]`.
pub fn expected_infected_general_bound(
    params: &ModelParams,
    expected_controls: &[f64],
    horizon: usize,
) -> Result<Vec<f64>> {
    params.validate()?;
    if expected_controls.len() < horizon {
        return Err(SirdError::LengthMismatch { expected: horizon, found: expected_controls.len() });
    }
    if let Some(&u) = expected_controls.iter().find(|u| u.is_nan() || **u < 0.0) {
        return Err(SirdError::NegativeControl(u));
    }
    let growth = params.mean_growth();
    // b(k+1) = g b(k) - v_min E[u(k)], b(0) = I0
    let mut bound = params.i0;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(bound);
    for &u in &expected_controls[..horizon] {
        bound = growth * bound - params.v_min * u;
        out.push(bound);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_relative_eq, relative_eq};

    fn params() -> ModelParams {
        ModelParams {
            s0: 1e6,
            i0: 100.0,
            delta_max: 0.5,
            d_max: 0.0449,
            v_min: 0.1,
            v_max: 0.2,
            delta_mean: 0.215,
            d_mean: 0.002,
            v_mean: 0.15,
        }
    }

    fn draws() -> Vec<UncertaintyDraw> {
        vec![
            UncertaintyDraw::new(0.3, 0.5, 0.02),
            UncertaintyDraw::new(0.1, 0.2, 0.01),
            UncertaintyDraw::new(0.25, 0.7, 0.0),
        ]
    }

    #[test]
    fn infected_oracle_without_control_is_phi() {
        let p = params();
        let d = draws();
        let i = infected_path_oracle(&p, &d, &[0.0; 3]).unwrap();
        for k in 0..=3 {
            assert_relative_eq!(i[k], phi(&d[..k]) * p.i0, max_relative = 1e-14);
        }
        assert_eq!(infected_path_oracle(&p, &[], &[]).unwrap(), vec![100.0]);
        assert!(matches!(
            infected_path_oracle(&p, &d, &[0.0; 2]),
            Err(SirdError::LengthMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn susceptible_oracle_examples() {
        let p = params();
        let quiet: Vec<_> = draws().into_iter().map(|d| UncertaintyDraw { delta: 0.0, ..d }).collect();
        assert!(susceptible_path_oracle(&p, &quiet, &[1.0; 3]).unwrap().iter().all(|&s| s == p.s0));
        let s = susceptible_path_oracle(&p, &draws()[..1], &[5.0]).unwrap();
        assert_relative_eq!(s[1], p.s0 - 0.3 * p.i0, max_relative = 1e-15);
    }

    #[test]
    fn recovered_oracle_examples() {
        assert_eq!(recovered_path_oracle(&draws(), &[0.0; 3]).unwrap(), vec![0.0; 4]);
        let d = [UncertaintyDraw::new(0.1, 0.5, 0.0), UncertaintyDraw::new(0.1, 0.5, 0.0)];
        assert_eq!(recovered_path_oracle(&d, &[4.0, 6.0]).unwrap(), vec![0.0, 2.0, 5.0]);
        assert!(matches!(recovered_path_oracle(&d, &[4.0, -1.0]), Err(SirdError::NegativeControl(_))));
    }

    #[test]
    fn deceased_oracle_examples() {
        let p = ModelParams { i0: 10.0, ..params() };
        let quiet: Vec<_> = draws().into_iter().map(|d| UncertaintyDraw { d_i: 0.0, ..d }).collect();
        assert_eq!(deceased_path_oracle(&p, &quiet, &[1.0; 3]).unwrap(), vec![0.0; 4]);
        let d = deceased_path_oracle(&p, &[UncertaintyDraw::new(0.1, 0.5, 0.05)], &[0.0]).unwrap();
        assert_relative_eq!(d[1], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn expected_infected_examples() {
        let p = params();
        let boundary = (p.delta_mean - p.d_mean) / p.v_mean;
        let flat = expected_infected_linear(&p, boundary, 30).unwrap();
        assert!(flat.values.iter().all(|&x| (x - p.i0).abs() < 1e-9 * p.i0));
        let c = expected_infected_linear(&p, 1.4333, 10).unwrap();
        // ρ = 1 + 0.215 - 0.002 - 0.214995 = 0.998005
        assert_relative_eq!(c.values[10], 0.998005f64.powi(10) * 100.0, max_relative = 1e-12);
        assert!((c.values[10] - 98.02).abs() < 0.01);
        assert_eq!(expected_infected_linear(&p, 1.0, 0).unwrap().values, vec![100.0]);
        assert!(matches!(expected_infected_linear(&p, 5.0, 3), Err(SirdError::GainOutOfRange { .. })));
    }

    #[test]
    fn expected_susceptible_examples() {
        let p = ModelParams { delta_mean: 0.2, d_mean: 0.002, ..params() };
        let boundary = (p.delta_mean - p.d_mean) / p.v_mean;
        let c = expected_susceptible_linear(&p, boundary, 5).unwrap();
        assert_relative_eq!(c.values[5], 1e6 - 100.0, max_relative = 1e-12);

        let p0 = ModelParams { delta_mean: 0.0, d_mean: 0.0, ..params() };
        for gain in [0.0, 1.0, 3.0] {
            assert!(expected_susceptible_linear(&p0, gain, 20).unwrap().values.iter().all(|&s| s == 1e6));
        }

        // floor(1e6 / (100 * 0.5)) = 20000
        assert!(expected_susceptible_linear(&p, 2.0, 20_000).is_ok());
        assert!(matches!(
            expected_susceptible_linear(&p, 2.0, 20_001),
            Err(SirdError::WindowExceeded { window: 20_000, .. })
        ));
        assert!(matches!(expected_susceptible_linear(&p, 0.5, 5), Err(SirdError::OutOfBranch(_))));
    }

    #[test]
    fn branch_continuity() {
        let p = params();
        let boundary = (p.delta_mean - p.d_mean) / p.v_mean;
        let nudged = boundary + 1e-10 / p.v_mean;
        for k in [1, 10, 100, 1000] {
            let lin_s = expected_susceptible_linear(&p, boundary, k).unwrap().values[k];
            let geo_s = expected_susceptible_linear(&p, nudged, k).unwrap().values[k];
            assert_relative_eq!(lin_s, geo_s, max_relative = 1e-6);
            let lin_d = expected_deceased_linear(&p, boundary, k).unwrap().values[k];
            let geo_d = expected_deceased_linear(&p, nudged, k).unwrap().values[k];
            assert_relative_eq!(lin_d, geo_d, max_relative = 1e-6);
        }
        let p = ModelParams { delta_max: 0.3, ..params() };
        let edge = p.delta_max / p.v_min;
        let lin = deceased_bound_pathwise(&p, edge, 500).unwrap();
        let geo = deceased_bound_pathwise(&p, edge + 1e-10 / p.v_min, 500).unwrap();
        for k in [1, 50, 500] {
            assert_relative_eq!(lin[k], geo[k], max_relative = 1e-6);
        }
    }

    #[test]
    fn expected_deceased_examples() {
        let p = ModelParams { d_mean: 0.0, ..params() };
        assert!(expected_deceased_linear(&p, 2.0, 10).unwrap().values.iter().all(|&d| d == 0.0));
        let p = params();
        let boundary = (p.delta_mean - p.d_mean) / p.v_mean;
        assert_relative_eq!(expected_deceased_linear(&p, boundary, 10).unwrap().values[10], 2.0, max_relative = 1e-12);
        assert!(matches!(expected_deceased_linear(&p, 1.0, 10), Err(SirdError::OutOfBranch(_))));
    }

    #[test]
    fn deceased_limit_examples() {
        let p = ModelParams { d_mean: 0.0, ..params() };
        assert_eq!(expected_deceased_limit(&p, 2.0).unwrap(), DeceasedLimit::Finite(0.0));
        let p = params();
        match expected_deceased_limit(&p, p.delta_mean / p.v_mean).unwrap() {
            DeceasedLimit::Finite(x) => assert_relative_eq!(x, 100.0, max_relative = 1e-9),
            other => panic!("{other:?}"),
        }
        let boundary = (p.delta_mean - p.d_mean) / p.v_mean;
        assert_eq!(expected_deceased_limit(&p, boundary).unwrap(), DeceasedLimit::Infinite);
        assert!(expected_deceased_limit(&p, 1.0).is_err());
    }

    #[test]
    fn deceased_bound_examples() {
        let p = ModelParams { d_max: 0.0, d_mean: 0.0, delta_max: 0.3, ..params() };
        assert!(deceased_bound_pathwise(&p, 3.5, 20).unwrap().iter().all(|&b| b == 0.0));
        let p = ModelParams { delta_max: 0.3, ..params() };
        let b = deceased_bound_pathwise(&p, p.delta_max / p.v_min, 10).unwrap();
        assert_relative_eq!(b[10], 44.9, max_relative = 1e-12);
        assert!(matches!(deceased_bound_pathwise(&p, 2.0, 10), Err(SirdError::GainOutOfRange { .. })));
    }

    #[test]
    fn nonneg_horizon_examples() {
        assert_eq!(susceptible_nonneg_horizon(&params()).unwrap(), Horizon::Days(20_000));
        let p = ModelParams { s0: 50.0, ..params() };
        // i0 δ_max = 50 = s0 violates the standing assumption
        assert!(susceptible_nonneg_horizon(&p).is_err());
        let p = ModelParams { s0: 50.0, delta_max: 0.4999999, ..params() };
        assert_eq!(susceptible_nonneg_horizon(&p).unwrap(), Horizon::Days(1));
        let p = ModelParams { delta_max: 0.0, delta_mean: 0.0, ..params() };
        assert_eq!(susceptible_nonneg_horizon(&p).unwrap(), Horizon::Unbounded);
    }

    #[test]
    fn no_control_profile_examples() {
        let p = params();
        let flat = vec![UncertaintyDraw::new(0.0, 0.5, 0.0); 5];
        let prof = no_control_profile(&p, &flat);
        assert!(prof.i.iter().all(|&x| x == p.i0));
        assert!(prof.d.iter().all(|&x| x == 0.0));
        assert!(prof.s.iter().all(|&x| x == p.s0));
        assert!(prof.r.iter().all(|&x| x == 0.0));

        let prof = no_control_profile(&p, &draws());
        assert!(prof.i.windows(2).all(|w| w[1] >= w[0]));
        let oracle = infected_path_oracle(&p, &draws(), &[0.0; 3]).unwrap();
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| relative_eq!(x, y, max_relative = 1e-14));
        assert!(same(&prof.i, &oracle));
        assert!(same(&prof.s, &susceptible_path_oracle(&p, &draws(), &[0.0; 3]).unwrap()));
        assert!(same(&prof.d, &deceased_path_oracle(&p, &draws(), &[0.0; 3]).unwrap()));
    }

    #[test]
    fn general_bound_examples() {
        let p = params();
        let b = expected_infected_general_bound(&p, &[0.0; 6], 6).unwrap();
        for (k, x) in b.iter().enumerate() {
            assert_relative_eq!(*x, 1.213f64.powi(k as i32) * 100.0, max_relative = 1e-12);
        }
        let b = expected_infected_general_bound(&p, &[7.0], 1).unwrap();
        assert_relative_eq!(b[1], 1.213 * 100.0 - 0.1 * 7.0, max_relative = 1e-12);
        assert!(expected_infected_general_bound(&p, &[1.0], 2).is_err());
    }

    #[test]
    fn recovered_bounds_bracket() {
        let p = params();
        let (lo, hi) = expected_recovered_bounds(&p, 1.5, 20).unwrap();
        assert_eq!(lo.values[0], 0.0);
        assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| a <= b));
        assert_relative_eq!(hi.values[1], 0.2 * 1.5 * 100.0, max_relative = 1e-12);
    }
}
