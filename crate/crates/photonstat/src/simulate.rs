//! Monte Carlo generation of photon-detection streams whose joint count
//! statistics realize the thermal-light generating function exactly.
//!
//! For jointly circular complex Gaussian fields `(E1, E2)` with equal mean
//! square `nbar` and cross-correlation `nbar sqrt(mu)`, Poisson detection
//! conditioned on the intensities gives the joint count PGF
//!
//! ```text
//! M(x, y) = 1 / det(I - diag(x-1, y-1) Cov)
//!         = 1 / [1 - nbar(x-1) - nbar(y-1) + (1-mu) nbar^2 (x-1)(y-1)]
//! ```
//!
//! which is exactly the thermal-light generating function, term for term.
//! The simulator is therefore an independent realization of the closed
//! forms, not an approximation of them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::analytic::CountPair;
use crate::coherence::CoherenceModel;
use crate::error::{Error, Result};

/// Light source feeding the interferometer.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Thermal,
    Laser,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Thermal => write!(f, "thermal"),
            Source::Laser => write!(f, "laser"),
        }
    }
}

/// Full parameter set for one simulated acquisition run.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub source: Source,
    /// Mean photons per bin per detector.
    pub nbar: f64,
    pub coherence: CoherenceModel,
    /// Time-bin width in picoseconds (1 us bins: 1_000_000).
    pub bin_width_ps: u64,
    pub n_bins: usize,
    /// Detector separation for this run, same unit as `sigma_x`.
    pub dx: f64,
    pub seed: u64,
    /// Time-tag resolution in picoseconds; must divide the bin width.
    pub tag_resolution_ps: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nbar < 0.0 || !self.nbar.is_finite() {
            return Err(Error::InvalidParams(format!(
                "nbar must be finite and >= 0, got {}",
                self.nbar
            )));
        }
        if self.n_bins == 0 {
            return Err(Error::InvalidParams("n_bins must be >= 1".into()));
        }
        if self.bin_width_ps == 0 {
            return Err(Error::InvalidParams("bin_width must be > 0".into()));
        }
        if self.tag_resolution_ps == 0 || self.bin_width_ps % self.tag_resolution_ps != 0 {
            return Err(Error::InvalidParams(format!(
                "tag resolution {} ps must divide bin width {} ps",
                self.tag_resolution_ps, self.bin_width_ps
            )));
        }
        Ok(())
    }

    /// Bin duration in seconds.
    pub fn bin_width_secs(&self) -> f64 {
        self.bin_width_ps as f64 * 1e-12
    }

    /// AR(1) coefficient chosen so the lag-1 squared coherence of the field
    /// matches the Gaussian profile at one bin: `rho^2 = mu(0, dt)/mu_peak`.
    pub fn ar1_rho(&self) -> f64 {
        let s = self.bin_width_secs() / self.coherence.tau_c;
        (-0.5 * s * s).exp()
    }

    /// Squared coherence the simulated pair `(c1(t), c2(t+lag))` realizes:
    /// `mu(dx, 0) * rho^{2 lag}`. The AR(1) lag profile is exponential by
    /// construction, so curves are compared against this value rather than
    /// the Gaussian temporal profile.
    pub fn effective_mu(&self, lag: u32) -> f64 {
        self.coherence.mu_at(self.dx, 0.0) * self.ar1_rho().powi(2 * lag as i32)
    }
}

/// Per-bin photon counts for the two detector channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinnedCountStream {
    pub bin_width_ps: u64,
    pub counts_ch1: Vec<u32>,
    pub counts_ch2: Vec<u32>,
}

impl BinnedCountStream {
    pub fn n_bins(&self) -> usize {
        self.counts_ch1.len()
    }
}

/// One time-tagged detection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TagRecord {
    pub timestamp: u64,
    pub channel: u8,
}

/// Ordered detection events at a fixed tick resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeTagStream {
    pub resolution_ps: u64,
    pub records: Vec<TagRecord>,
}

fn poisson_count<R: Rng>(rng: &mut R, lambda: f64) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive lambda").sample(rng) as u32
}

/// Circular complex Gaussian with mean square `var`.
fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

const SAMPLE_CHUNK: u64 = 1 << 20;

/// Draw i.i.d. joint count pairs realizing the thermal generating function
/// at `(nbar, mu)`.
///
/// `E1` is circular Gaussian with mean square `nbar`;
/// `E2 = sqrt(mu) E1 + sqrt(1-mu) E_perp` with `E_perp` an independent copy;
/// counts are Poisson with means `|E1|^2` and `|E2|^2`.
///
/// Generation is chunked with per-chunk RNG streams derived from
/// `(seed, chunk index)`, so the result is deterministic and independent of
/// how many worker threads execute the chunks.
pub fn sample_joint_counts(nbar: f64, mu: f64, n_samples: usize, seed: u64) -> Vec<CountPair> {
    assert!((0.0..=1.0).contains(&mu), "mu must lie in [0, 1]");
    assert!(nbar >= 0.0, "nbar must be >= 0");
    let n_chunks = (n_samples as u64).div_ceil(SAMPLE_CHUNK);
    let mut chunks: Vec<Vec<CountPair>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let start = chunk * SAMPLE_CHUNK;
            let len = SAMPLE_CHUNK.min(n_samples as u64 - start) as usize;
            let mut out = Vec::with_capacity(len);
            let sm = mu.sqrt();
            let som = (1.0 - mu).sqrt();
            for _ in 0..len {
                let e1 = complex_gaussian(&mut rng, nbar);
                let ep = complex_gaussian(&mut rng, nbar);
                let e2 = sm * e1 + som * ep;
                let m = poisson_count(&mut rng, e1.norm_sqr());
                let n = poisson_count(&mut rng, e2.norm_sqr());
                out.push(CountPair::new(m, n));
            }
            out
        })
        .collect();
    let mut all = Vec::with_capacity(n_samples);
    for c in &mut chunks {
        all.append(c);
    }
    all
}

/// Simulate a thermal (pseudothermal) acquisition with temporal coherence.
///
/// The common field evolves as a discrete AR(1) complex Gaussian process
/// with stationary mean square `nbar`; the second detector sees
/// `E2 = sqrt(mu_s) F + sqrt(1-mu_s) G` with `G` an independent copy of the
/// process and `mu_s = mu(dx, 0)`. The run starts from the stationary
/// distribution and discards a burn-in of `20 tau_c / dt` bins so chunk-free
/// sequential generation carries no transient.
pub fn simulate_temporal(config: &SimConfig) -> Result<BinnedCountStream> {
    config.validate()?;
    if config.source != Source::Thermal {
        return Err(Error::Config(
            "simulate_temporal requires a thermal source (use simulate_laser)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rho = config.ar1_rho();
    let drive = (1.0 - rho * rho).sqrt();
    let mu_s = config.coherence.mu_at(config.dx, 0.0);
    let sm = mu_s.sqrt();
    let som = (1.0 - mu_s).sqrt();

    let mut f = complex_gaussian(&mut rng, config.nbar);
    let mut g = complex_gaussian(&mut rng, config.nbar);
    let burn_in = (20.0 * config.coherence.tau_c / config.bin_width_secs()).ceil() as usize;
    let step = |rng: &mut ChaCha8Rng, z: Complex64| {
        rho * z + drive * complex_gaussian(rng, config.nbar)
    };
    for _ in 0..burn_in {
        f = step(&mut rng, f);
        g = step(&mut rng, g);
    }

    let mut counts_ch1 = Vec::with_capacity(config.n_bins);
    let mut counts_ch2 = Vec::with_capacity(config.n_bins);
    for _ in 0..config.n_bins {
        let e1 = f;
        let e2 = sm * f + som * g;
        counts_ch1.push(poisson_count(&mut rng, e1.norm_sqr()));
        counts_ch2.push(poisson_count(&mut rng, e2.norm_sqr()));
        f = step(&mut rng, f);
        g = step(&mut rng, g);
    }
    Ok(BinnedCountStream {
        bin_width_ps: config.bin_width_ps,
        counts_ch1,
        counts_ch2,
    })
}

/// Simulate a single-mode cw laser acquisition: both channels independent
/// Poisson with constant mean `nbar` per bin.
pub fn simulate_laser(config: &SimConfig) -> Result<BinnedCountStream> {
    config.validate()?;
    if config.source != Source::Laser {
        return Err(Error::Config(
            "simulate_laser requires a laser source (use simulate_temporal)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counts_ch1 = Vec::with_capacity(config.n_bins);
    let mut counts_ch2 = Vec::with_capacity(config.n_bins);
    if config.nbar == 0.0 {
        counts_ch1.resize(config.n_bins, 0);
        counts_ch2.resize(config.n_bins, 0);
    } else {
        let dist = Poisson::new(config.nbar).expect("positive nbar");
        for _ in 0..config.n_bins {
            counts_ch1.push(dist.sample(&mut rng) as u32);
            counts_ch2.push(dist.sample(&mut rng) as u32);
        }
    }
    Ok(BinnedCountStream {
        bin_width_ps: config.bin_width_ps,
        counts_ch1,
        counts_ch2,
    })
}

/// Run whichever generator matches `config.source`.
pub fn simulate(config: &SimConfig) -> Result<BinnedCountStream> {
    match config.source {
        Source::Thermal => simulate_temporal(config),
        Source::Laser => simulate_laser(config),
    }
}

/// Expand binned counts into per-event time tags, calling `emit` for each
/// tag in globally non-decreasing timestamp order.
///
/// Each count in bin `b` gets a timestamp uniform over the bin's ticks;
/// re-binning at the same bin width recovers the input counts exactly.
pub fn emit_timetags(
    stream: &BinnedCountStream,
    resolution_ps: u64,
    seed: u64,
    mut emit: impl FnMut(u64, u8),
) -> Result<()> {
    if resolution_ps == 0 || stream.bin_width_ps % resolution_ps != 0 {
        return Err(Error::InvalidParams(format!(
            "resolution {} ps must divide bin width {} ps",
            resolution_ps, stream.bin_width_ps
        )));
    }
    let ticks_per_bin = stream.bin_width_ps / resolution_ps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bin_tags: Vec<(u64, u8)> = Vec::new();
    for (b, (&c1, &c2)) in stream
        .counts_ch1
        .iter()
        .zip(&stream.counts_ch2)
        .enumerate()
    {
        bin_tags.clear();
        let base = b as u64 * ticks_per_bin;
        for _ in 0..c1 {
            bin_tags.push((base + rng.gen_range(0..ticks_per_bin), 1));
        }
        for _ in 0..c2 {
            bin_tags.push((base + rng.gen_range(0..ticks_per_bin), 2));
        }
        bin_tags.sort_unstable();
        for &(ts, ch) in &bin_tags {
            emit(ts, ch);
        }
    }
    Ok(())
}

/// Materialize the time tags for a binned stream.
pub fn counts_to_timetags(
    stream: &BinnedCountStream,
    resolution_ps: u64,
    seed: u64,
) -> Result<TimeTagStream> {
    let expected: u64 = stream.counts_ch1.iter().map(|&c| c as u64).sum::<u64>()
        + stream.counts_ch2.iter().map(|&c| c as u64).sum::<u64>();
    let mut records = Vec::with_capacity(expected as usize);
    emit_timetags(stream, resolution_ps, seed, |timestamp, channel| {
        records.push(TagRecord { timestamp, channel });
    })?;
    Ok(TimeTagStream {
        resolution_ps,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(source: Source, nbar: f64, n_bins: usize, seed: u64) -> SimConfig {
        SimConfig {
            source,
            nbar,
            coherence: CoherenceModel::new(1.0, 2e-6, 1.0).unwrap(),
            bin_width_ps: 1_000_000,
            n_bins,
            dx: 0.0,
            seed,
            tag_resolution_ps: 1_000,
        }
    }

    #[test]
    fn vacuum_samples_all_zero() {
        let pairs = sample_joint_counts(0.0, 0.7, 1000, 1);
        assert!(pairs.iter().all(|p| p.m == 0 && p.n == 0));
    }

    #[test]
    fn samples_deterministic_given_seed() {
        let a = sample_joint_counts(0.8, 0.5, 5000, 99);
        let b = sample_joint_counts(0.8, 0.5, 5000, 99);
        assert_eq!(a, b);
        let c = sample_joint_counts(0.8, 0.5, 5000, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_matches_nbar() {
        let pairs = sample_joint_counts(1.5, 0.5, 200_000, 7);
        let mean1: f64 = pairs.iter().map(|p| p.m as f64).sum::<f64>() / pairs.len() as f64;
        let mean2: f64 = pairs.iter().map(|p| p.n as f64).sum::<f64>() / pairs.len() as f64;
        // thermal variance nbar(1+nbar): stderr ~ sqrt(3.75/2e5) = 0.0043
        assert!((mean1 - 1.5).abs() < 0.02, "mean1 = {mean1}");
        assert!((mean2 - 1.5).abs() < 0.02, "mean2 = {mean2}");
    }

    #[test]
    fn temporal_rejects_laser_config() {
        let cfg = config(Source::Laser, 0.5, 10, 1);
        assert!(matches!(
            simulate_temporal(&cfg).unwrap_err(),
            Error::Config(_)
        ));
        let cfg = config(Source::Thermal, 0.5, 10, 1);
        assert!(matches!(
            simulate_laser(&cfg).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn laser_zero_intensity_is_silent() {
        let cfg = config(Source::Laser, 0.0, 100, 3);
        let s = simulate_laser(&cfg).unwrap();
        assert!(s.counts_ch1.iter().all(|&c| c == 0));
        assert!(s.counts_ch2.iter().all(|&c| c == 0));
    }

    #[test]
    fn streams_deterministic_given_seed() {
        let cfg = config(Source::Thermal, 0.66, 2000, 11);
        assert_eq!(
            simulate_temporal(&cfg).unwrap(),
            simulate_temporal(&cfg).unwrap()
        );
        let cfg = config(Source::Laser, 0.66, 2000, 11);
        assert_eq!(
            simulate_laser(&cfg).unwrap(),
            simulate_laser(&cfg).unwrap()
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(Source::Thermal, 0.5, 10, 1);
        cfg.tag_resolution_ps = 3_000; // does not divide 1_000_000
        assert!(cfg.validate().is_err());
        cfg.tag_resolution_ps = 1_000;
        cfg.n_bins = 0;
        assert!(cfg.validate().is_err());
        cfg.n_bins = 1;
        cfg.nbar = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn effective_mu_decays() {
        let cfg = config(Source::Thermal, 0.5, 10, 1);
        assert!((cfg.effective_mu(0) - 1.0).abs() < 1e-12);
        let rho = cfg.ar1_rho();
        assert!((cfg.effective_mu(3) - rho.powi(6)).abs() < 1e-12);
        assert!(cfg.effective_mu(5) < cfg.effective_mu(2));
    }

    #[test]
    fn empty_counts_give_empty_tags() {
        let stream = BinnedCountStream {
            bin_width_ps: 1_000_000,
            counts_ch1: vec![0, 0],
            counts_ch2: vec![0, 0],
        };
        let tags = counts_to_timetags(&stream, 1_000, 5).unwrap();
        assert!(tags.records.is_empty());
    }

    #[test]
    fn tags_sorted_and_counted() {
        let cfg = config(Source::Thermal, 0.66, 5000, 21);
        let stream = simulate_temporal(&cfg).unwrap();
        let tags = counts_to_timetags(&stream, cfg.tag_resolution_ps, 77).unwrap();
        let total: u64 = stream.counts_ch1.iter().map(|&c| c as u64).sum::<u64>()
            + stream.counts_ch2.iter().map(|&c| c as u64).sum::<u64>();
        assert_eq!(tags.records.len() as u64, total);
        assert!(tags
            .records
            .windows(2)
            .all(|w| w[0].timestamp <= w[1].timestamp));
        assert!(tags.records.iter().all(|r| r.channel == 1 || r.channel == 2));
    }

    #[test]
    fn tag_count_expectation() {
        // 1e5 bins at nbar = 0.66 -> about 1.32e5 total tags across channels
        let cfg = config(Source::Thermal, 0.66, 100_000, 13);
        let stream = simulate_temporal(&cfg).unwrap();
        let total: f64 = stream.counts_ch1.iter().map(|&c| c as f64).sum::<f64>()
            + stream.counts_ch2.iter().map(|&c| c as f64).sum::<f64>();
        let expect = 2.0 * 0.66 * 100_000.0;
        // thermal counts are overdispersed and the AR(1) correlates bins;
        // allow a wide but finite band
        assert!((total - expect).abs() < 0.05 * expect, "total = {total}");
    }
}
