//! Statistical validation of the simulator and estimator: distributional
//! goodness of fit, direct realization of the generating function, error-bar
//! scaling, and exact time-reversal/channel-swap symmetry.

use photonstat::analytic::{self, ThermalParams};
use photonstat::coherence::CoherenceModel;
use photonstat::correlate;
use photonstat::simulate::{self, BinnedCountStream, SimConfig, Source};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn sim_cfg(nbar: f64, n_bins: usize, seed: u64) -> SimConfig {
    SimConfig {
        source: Source::Thermal,
        nbar,
        coherence: CoherenceModel::new(1.0, 2e-6, 1.0).unwrap(),
        bin_width_ps: 1_000_000,
        n_bins,
        dx: 0.0,
        seed,
        tag_resolution_ps: 1_000,
    }
}

/// Chi-square goodness of fit of the sampled channel-1 counts against the
/// Bose-Einstein marginal, tail pooled, alpha = 0.001.
#[test]
fn marginal_histogram_chi_square() {
    let params = ThermalParams::new(1.0, 0.5).unwrap();
    let n_samples = 1_000_000usize;
    let pairs = simulate::sample_joint_counts(1.0, 0.5, n_samples, 1234);

    // pool the tail so every expected cell count stays above ~20
    let kmax = 16u32;
    let mut observed = vec![0u64; kmax as usize + 2];
    for p in &pairs {
        let cell = (p.m.min(kmax + 1)) as usize;
        observed[cell] += 1;
    }
    let mut expected = vec![0.0f64; kmax as usize + 2];
    let mut head = 0.0;
    for q in 0..=kmax {
        let pq = analytic::marginal_pq(params, q);
        expected[q as usize] = pq * n_samples as f64;
        head += pq;
    }
    expected[kmax as usize + 1] = (1.0 - head) * n_samples as f64;

    let stat: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = (observed.len() - 1) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.999);
    assert!(
        stat < critical,
        "chi-square {stat:.2} exceeds critical {critical:.2} (dof {dof})"
    );
}

/// The empirical mean of `x^m y^n` over sampled pairs is the generating
/// function itself; compare against the closed form at several points.
#[test]
fn samples_realize_generating_function() {
    let n_samples = 1_000_000usize;
    for &(nbar, mu) in &[(0.5, 1.0), (1.0, 0.5), (2.0, 0.0)] {
        let params = ThermalParams::new(nbar, mu).unwrap();
        let pairs = simulate::sample_joint_counts(nbar, mu, n_samples, 555);
        for &x in &[0.0f64, 0.5] {
            for &y in &[0.0f64, 0.5] {
                let vals: Vec<f64> = pairs
                    .iter()
                    .map(|p| x.powi(p.m as i32) * y.powi(p.n as i32))
                    .collect();
                let mean: f64 = vals.iter().sum::<f64>() / n_samples as f64;
                let var: f64 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (n_samples - 1) as f64;
                let stderr = (var / n_samples as f64).sqrt();
                let exact = analytic::joint_pgf(params, x, y).unwrap();
                assert!(
                    (mean - exact).abs() < 4.0 * stderr,
                    "M({x},{y}) at ({nbar},{mu}): empirical {mean} +- {stderr} vs {exact}"
                );
            }
        }
    }
}

/// Counting error bars shrink like 1/sqrt(N) and stay calibrated: the
/// estimate tracks the analytic value within a few reported stderr.
#[test]
fn stderr_scales_as_inverse_sqrt_n() {
    let exact = analytic::g_m0(ThermalParams::new(0.66, 1.0).unwrap(), 1).unwrap();
    let mut errs = Vec::new();
    for (i, &n_bins) in [100_000usize, 1_000_000, 10_000_000].iter().enumerate() {
        let cfg = sim_cfg(0.66, n_bins, 900 + i as u64);
        let stream = simulate::simulate_temporal(&cfg).unwrap();
        let curve = correlate::estimate_gmn(&stream, 1, 0, 5).unwrap();
        let (v, se) = (curve.values[0], curve.stderr[0]);
        assert!(
            (v - exact).abs() < 5.0 * se,
            "n_bins {n_bins}: {v} +- {se} vs exact {exact}"
        );
        errs.push(se);
    }
    let expected_ratio = 10.0f64.sqrt();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            ratio > expected_ratio / 2.0 && ratio < expected_ratio * 2.0,
            "stderr ratio {ratio} not compatible with sqrt(10): {errs:?}"
        );
    }
}

/// Exact identity: correlating the time-reversed stream at (m, n) equals
/// correlating the channel-swapped stream at (n, m), tally for tally.
#[test]
fn time_reversal_equals_channel_swap() {
    let cfg = sim_cfg(0.8, 20_000, 4321);
    let stream = simulate::simulate_temporal(&cfg).unwrap();
    let reversed = BinnedCountStream {
        bin_width_ps: stream.bin_width_ps,
        counts_ch1: stream.counts_ch1.iter().rev().copied().collect(),
        counts_ch2: stream.counts_ch2.iter().rev().copied().collect(),
    };
    let swapped = BinnedCountStream {
        bin_width_ps: stream.bin_width_ps,
        counts_ch1: stream.counts_ch2.clone(),
        counts_ch2: stream.counts_ch1.clone(),
    };
    for (m, n) in [(1u32, 0u32), (2, 1), (0, 0)] {
        let rev = correlate::tally_gmn(&reversed, m, n, 25).unwrap();
        let swp = correlate::tally_gmn(&swapped, n, m, 25).unwrap();
        assert_eq!(rev.co, swp.co, "coincidences differ for ({m},{n})");
        assert_eq!(rev.s1, swp.s2, "marginal 1 differs for ({m},{n})");
        assert_eq!(rev.s2, swp.s1, "marginal 2 differs for ({m},{n})");
    }
}

/// The g_11 estimate from binned pairs at mu = 1 reproduces 32/27 at
/// nbar = 1 (the distinguished point where g_11 attains its minimum).
#[test]
fn g11_minimum_realized_by_simulation() {
    let pairs = simulate::sample_joint_counts(1.0, 1.0, 4_000_000, 2024);
    let total = pairs.len() as f64;
    let co = pairs.iter().filter(|p| p.m == 1 && p.n == 1).count() as f64;
    let s1 = pairs.iter().filter(|p| p.m == 1).count() as f64;
    let s2 = pairs.iter().filter(|p| p.n == 1).count() as f64;
    let g = total * co / (s1 * s2);
    let se = g * (1.0 / co + 1.0 / s1 + 1.0 / s2).sqrt();
    let exact = 32.0 / 27.0;
    assert!(
        (g - exact).abs() < 4.0 * se,
        "g_11 = {g} +- {se} vs 32/27 = {exact}"
    );
}
