//! Seeded draw streams: each path and component gets its own stream, so any
//! path can be regenerated on its own.

use sird_control::sampling::{draw_sequence, DrawStream, PriceStream};
use sird_control::{DistributionSpec, SeedSpec, UncertaintySpec};

fn main() -> sird_control::Result<()> {
    let spec = UncertaintySpec::new(
        DistributionSpec::uniform(0.0, 0.43),
        DistributionSpec::uniform(0.1, 0.2),
        DistributionSpec::discrete(&[(0.0, 0.5), (0.004, 0.5)]),
    );
    let params = spec.implied_params(1e6, 100.0)?;
    println!("implied parameters: {params:?}");

    for path in 0..3 {
        let draws = draw_sequence(&spec, SeedSpec::new(42, path), 3)?;
        println!("path {path}: {draws:?}");
    }

    let n = 100_000;
    let (mut delta, mut v, mut d) = (0.0, 0.0, 0.0);
    for draw in DrawStream::new(&spec, SeedSpec::new(42, 0))?.take(n) {
        delta += draw.delta;
        v += draw.v;
        d += draw.d_i;
    }
    let n = n as f64;
    println!("sample means over {n} days: delta {:.4}, v {:.4}, d_i {:.5}", delta / n, v / n, d / n);

    let prices: Vec<f64> =
        PriceStream::new(&DistributionSpec::uniform(0.5, 1.5), SeedSpec::new(42, 0))?.take(5).collect();
    println!("first prices: {prices:?}");
    Ok(())
}
