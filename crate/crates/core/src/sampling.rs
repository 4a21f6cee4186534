//! Seeded draws of the uncertainty processes.
//!
//! Every path gets its own ChaCha8 streams derived from
//! `(master_seed, path_index)`: stream `4 * path_index + c` where `c` is 0 for
//! δ, 1 for v, 2 for d_I and 3 for the budget price. Separate components never
//! share generator state, so ensembles are independent of evaluation order.

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SirdError};
use crate::model::{ModelParams, UncertaintyDraw};

const PROB_TOL: f64 = 1e-12;
const MEAN_TOL: f64 = 1e-9;
const STREAMS_PER_PATH: u64 = 4;

/// One outcome of a discrete distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub value: f64,
    pub prob: f64,
}

/// Bounded distribution of one uncertainty process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Point { value: f64 },
    Uniform { low: f64, high: f64 },
    Discrete { outcomes: Vec<Outcome> },
}

impl DistributionSpec {
    pub fn point(value: f64) -> Self {
        Self::Point { value }
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        Self::Uniform { low, high }
    }

    pub fn discrete(pairs: &[(f64, f64)]) -> Self {
        Self::Discrete { outcomes: pairs.iter().map(|&(value, prob)| Outcome { value, prob }).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SirdError::InvalidDistribution(msg));
        match self {
            Self::Point { value } if !value.is_finite() => bad(format!("point value {value} is not finite")),
            Self::Point { .. } => Ok(()),
            Self::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low <= high) {
                    bad(format!("uniform needs finite low <= high, got [{low}, {high}]"))
                } else {
                    Ok(())
                }
            }
            Self::Discrete { outcomes } => {
                if outcomes.is_empty() {
                    return bad("discrete distribution has no outcomes".into());
                }
                if let Some(o) = outcomes.iter().find(|o| !o.value.is_finite() || !o.prob.is_finite() || o.prob < 0.0) {
                    return bad(format!("bad outcome ({}, {})", o.value, o.prob));
                }
                let total: f64 = outcomes.iter().map(|o| o.prob).sum();
                if (total - 1.0).abs() > PROB_TOL {
                    return bad(format!("probabilities sum to {total}, not 1"));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Point { value } => *value,
            Self::Uniform { low, high } => 0.5 * (low + high),
            Self::Discrete { outcomes } => outcomes.iter().map(|o| o.value * o.prob).sum(),
        }
    }

    /// Smallest and largest value with positive probability.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Point { value } => (*value, *value),
            Self::Uniform { low, high } => (*low, *high),
            Self::Discrete { outcomes } => outcomes
                .iter()
                .filter(|o| o.prob > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| (lo.min(o.value), hi.max(o.value))),
        }
    }

    fn check_within(&self, name: &str, lo: f64, hi: f64, mean: Option<f64>) -> Result<()> {
        self.validate()?;
        let (a, b) = self.support();
        if a < lo || b > hi {
            return Err(SirdError::InvalidDistribution(format!(
                "{name} support [{a}, {b}] is not inside the declared bounds [{lo}, {hi}]"
            )));
        }
        if let Some(m) = mean {
            if (self.mean() - m).abs() > MEAN_TOL {
                return Err(SirdError::InvalidDistribution(format!(
                    "{name} distribution mean {} differs from declared mean {m}",
                    self.mean()
                )));
            }
        }
        Ok(())
    }

    fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match self {
            Self::Point { value } => Sampler::Point(*value),
            Self::Uniform { low, high } => Sampler::Uniform {
                dist: Uniform::new_inclusive(*low, *high).map_err(|e| SirdError::InvalidDistribution(e.to_string()))?,
                low: *low,
                high: *high,
            },
            Self::Discrete { outcomes } => Sampler::Discrete {
                index: WeightedIndex::new(outcomes.iter().map(|o| o.prob))
                    .map_err(|e| SirdError::InvalidDistribution(e.to_string()))?,
                values: outcomes.iter().map(|o| o.value).collect(),
            },
        })
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Point(f64),
    Uniform { dist: Uniform<f64>, low: f64, high: f64 },
    Discrete { index: WeightedIndex<f64>, values: Vec<f64> },
}

impl Sampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Point(v) => *v,
            Self::Uniform { dist, low, high } => dist.sample(rng).clamp(*low, *high),
            Self::Discrete { index, values } => values[index.sample(rng)],
        }
    }
}

/// Distributions of `(δ, v, d_I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySpec {
    pub delta: DistributionSpec,
    pub v: DistributionSpec,
    pub d_i: DistributionSpec,
}

impl UncertaintySpec {
    pub fn new(delta: DistributionSpec, v: DistributionSpec, d_i: DistributionSpec) -> Self {
        Self { delta, v, d_i }
    }

    /// Checks supports against the declared bounds and means against the
    /// declared means.
    pub fn validate_against(&self, params: &ModelParams) -> Result<()> {
        params.validate()?;
        self.delta.check_within("delta", 0.0, params.delta_max, Some(params.delta_mean))?;
        self.v.check_within("v", params.v_min, params.v_max, Some(params.v_mean))?;
        self.d_i.check_within("d_i", 0.0, params.d_max, Some(params.d_mean))
    }

    /// Parameters whose bounds are the supports and whose means are the
    /// distribution means.
    pub fn implied_params(&self, s0: f64, i0: f64) -> Result<ModelParams> {
        for spec in [&self.delta, &self.v, &self.d_i] {
            spec.validate()?;
        }
        let (v_min, v_max) = self.v.support();
        let params = ModelParams {
            s0,
            i0,
            delta_max: self.delta.support().1,
            d_max: self.d_i.support().1,
            v_min,
            v_max,
            delta_mean: self.delta.mean(),
            d_mean: self.d_i.mean(),
            v_mean: self.v.mean(),
        };
        self.validate_against(&params)?;
        Ok(params)
    }
}

/// Identifies one path's random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub path_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        Self { master_seed, path_index }
    }

    pub(crate) fn rng(&self, component: u64) -> Result<ChaCha8Rng> {
        let stream = self
            .path_index
            .checked_mul(STREAMS_PER_PATH)
            .ok_or_else(|| SirdError::InvalidScenario(format!("path index {} too large", self.path_index)))?
            + component;
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(stream);
        Ok(rng)
    }
}

/// Endless iterator of i.i.d. draws for one path.
#[derive(Debug, Clone)]
pub struct DrawStream {
    delta: (Sampler, ChaCha8Rng),
    v: (Sampler, ChaCha8Rng),
    d_i: (Sampler, ChaCha8Rng),
}

impl DrawStream {
    pub fn new(spec: &UncertaintySpec, seed: SeedSpec) -> Result<Self> {
        Ok(Self {
            delta: (spec.delta.sampler()?, seed.rng(0)?),
            v: (spec.v.sampler()?, seed.rng(1)?),
            d_i: (spec.d_i.sampler()?, seed.rng(2)?),
        })
    }
}

impl Iterator for DrawStream {
    type Item = UncertaintyDraw;

    fn next(&mut self) -> Option<UncertaintyDraw> {
        Some(UncertaintyDraw {
            delta: self.delta.0.sample(&mut self.delta.1),
            v: self.v.0.sample(&mut self.v.1),
            d_i: self.d_i.0.sample(&mut self.d_i.1),
        })
    }
}

/// Endless iterator of i.i.d. budget prices for one path.
#[derive(Debug, Clone)]
pub struct PriceStream {
    sampler: Sampler,
    rng: ChaCha8Rng,
}

impl PriceStream {
    pub fn new(spec: &DistributionSpec, seed: SeedSpec) -> Result<Self> {
        Ok(Self { sampler: spec.sampler()?, rng: seed.rng(3)? })
    }
}

impl Iterator for PriceStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.sampler.sample(&mut self.rng))
    }
}

/// `horizon` draws for the path identified by `seed`.
pub fn draw_sequence(spec: &UncertaintySpec, seed: SeedSpec, horizon: usize) -> Result<Vec<UncertaintyDraw>> {
    Ok(DrawStream::new(spec, seed)?.take(horizon).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fitted_spec() -> UncertaintySpec {
        UncertaintySpec::new(
            DistributionSpec::uniform(0.0, 0.43),
            DistributionSpec::uniform(0.1, 0.2),
            DistributionSpec::discrete(&[(0.0, 0.5), (0.004, 0.5)]),
        )
    }

    #[test]
    fn point_distributions_repeat() {
        let spec = UncertaintySpec::new(
            DistributionSpec::point(0.1),
            DistributionSpec::point(0.5),
            DistributionSpec::point(0.05),
        );
        let draws = draw_sequence(&spec, SeedSpec::new(17, 3), 3).unwrap();
        assert_eq!(draws, vec![UncertaintyDraw::new(0.1, 0.5, 0.05); 3]);
    }

    #[test]
    fn uniform_effectiveness_stays_in_range() {
        let draws = draw_sequence(&fitted_spec(), SeedSpec::new(1, 0), 100_000).unwrap();
        assert!(draws.iter().all(|d| (0.1..=0.2).contains(&d.v)));
        let mean = draws.iter().map(|d| d.v).sum::<f64>() / draws.len() as f64;
        // sd of U[0.1, 0.2] is 0.0289; 4 standard errors at n = 1e5 is 3.7e-4
        assert!((mean - 0.15).abs() < 4e-4, "mean = {mean}");
    }

    #[test]
    fn same_seed_same_sequence() {
        let a = draw_sequence(&fitted_spec(), SeedSpec::new(9, 4), 50).unwrap();
        let b = draw_sequence(&fitted_spec(), SeedSpec::new(9, 4), 50).unwrap();
        assert_eq!(a, b);
        let c = draw_sequence(&fitted_spec(), SeedSpec::new(9, 5), 50).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn implied_params_match_supports() {
        let p = fitted_spec().implied_params(1e6, 100.0).unwrap();
        assert_eq!((p.v_min, p.v_max), (0.1, 0.2));
        assert_eq!(p.delta_max, 0.43);
        assert!((p.delta_mean - 0.215).abs() < 1e-15);
        assert_eq!(p.d_max, 0.004);
        assert!((p.d_mean - 0.002).abs() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_specs() {
        let p = fitted_spec().implied_params(1e6, 100.0).unwrap();
        let wide = UncertaintySpec::new(
            DistributionSpec::uniform(0.0, 0.5),
            DistributionSpec::uniform(0.1, 0.2),
            DistributionSpec::discrete(&[(0.0, 0.5), (0.004, 0.5)]),
        );
        assert!(wide.validate_against(&p).is_err());
        let shifted = UncertaintySpec::new(
            DistributionSpec::uniform(0.0, 0.43),
            DistributionSpec::uniform(0.1, 0.2),
            DistributionSpec::discrete(&[(0.0, 0.6), (0.004, 0.4)]),
        );
        assert!(shifted.validate_against(&p).is_err());
        assert!(DistributionSpec::discrete(&[(0.1, 0.5), (0.2, 0.4)]).validate().is_err());
        assert!(DistributionSpec::uniform(0.3, 0.2).validate().is_err());
        assert!(DistributionSpec::discrete(&[]).validate().is_err());
    }

    #[test]
    fn serde_shape() {
        let json = serde_json::to_string(&DistributionSpec::uniform(0.1, 0.2)).unwrap();
        assert_eq!(json, r#"{"kind":"uniform","low":0.1,"high":0.2}"#);
    }
}
