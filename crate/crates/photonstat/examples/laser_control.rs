//! Laser (coherent light) control: no antibunching at any intensity.
//!
//! Coherent light gives independent Poisson counts on the two detectors, so
//! every post-selected correlation is flat at 1. This run sweeps the mean
//! photon number and verifies the estimator reports g_10(0) = 1 throughout.

use photonstat::coherence::CoherenceModel;
use photonstat::correlate;
use photonstat::simulate::{self, SimConfig, Source};

fn main() -> photonstat::Result<()> {
    println!("{:>5} {:>9} {:>9} {:>7}", "nbar", "g10(0)", "stderr", "sigma");
    for (i, &nbar) in [0.1, 0.5, 1.0, 2.0, 5.0].iter().enumerate() {
        let cfg = SimConfig {
            source: Source::Laser,
            nbar,
            coherence: CoherenceModel::new(1.0, 2e-6, 1.0)?,
            bin_width_ps: 1_000_000,
            n_bins: 1_000_000,
            dx: 0.0,
            seed: 42 + i as u64,
            tag_resolution_ps: 1_000,
        };
        let stream = simulate::simulate_laser(&cfg)?;
        let curve = correlate::estimate_gmn(&stream, 1, 0, 5)?;
        let sigma = (curve.values[0] - 1.0) / curve.stderr[0];
        println!(
            "{nbar:>5} {:>9.4} {:>9.4} {sigma:>+7.2}",
            curve.values[0], curve.stderr[0]
        );
    }
    Ok(())
}
