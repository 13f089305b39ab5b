//! Acceptance criterion 11: the streaming correlator processes a 10^8-tag
//! PTAG file in a single pass, in bounded memory (<= 256 MiB peak RSS) and
//! under 30 s wall clock, and streaming tallies exactly equal batch tallies.
//!
//! The correlation runs in a subprocess (the `photonstat` binary) so its
//! peak resident set can be read from `getrusage(RUSAGE_CHILDREN)` without
//! the generator's buffers contaminating the measurement.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, Uniform};

use photonstat::correlate;
use photonstat::ptag::{self, PtagWriter};
use photonstat::simulate::{self, BinnedCountStream};

const TARGET_TAGS: u64 = 100_000_000;
const BIN_WIDTH_PS: u64 = 1_000_000;
const RESOLUTION_PS: u64 = 1_000;
const TICKS_PER_BIN: u64 = BIN_WIDTH_PS / RESOLUTION_PS;

/// Stream a PTAG file of roughly `TARGET_TAGS` Poisson tags without ever
/// materializing the bin or tag arrays.
fn write_big_file(path: &std::path::Path) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let poisson = Poisson::new(1.0).unwrap();
    let offset = Uniform::new(0, TICKS_PER_BIN);
    let file = std::fs::File::create(path).unwrap();
    let mut writer = PtagWriter::new(file, RESOLUTION_PS).unwrap();
    let mut written = 0u64;
    let mut bin = 0u64;
    let mut tags: Vec<(u64, u8)> = Vec::with_capacity(16);
    while written < TARGET_TAGS {
        let base = bin * TICKS_PER_BIN;
        tags.clear();
        let c1 = poisson.sample(&mut rng) as u32;
        let c2 = poisson.sample(&mut rng) as u32;
        for _ in 0..c1 {
            tags.push((base + offset.sample(&mut rng), 1));
        }
        for _ in 0..c2 {
            tags.push((base + offset.sample(&mut rng), 2));
        }
        tags.sort_unstable();
        for &(ts, ch) in &tags {
            writer.push(ts, ch).unwrap();
        }
        written += tags.len() as u64;
        bin += 1;
    }
    writer.finish().unwrap()
}

fn children_peak_rss_bytes() -> u64 {
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let rc = unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) };
    assert_eq!(rc, 0, "getrusage failed");
    // ru_maxrss is in kilobytes on Linux
    usage.ru_maxrss as u64 * 1024
}

/// Exact streaming == batch equality at a scale where the quadratic batch
/// reference is affordable.
fn streaming_equals_batch() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let poisson = Poisson::new(1.0).unwrap();
    let n_bins = 200_000usize;
    let max_lag = 100usize;
    let stream = BinnedCountStream {
        bin_width_ps: BIN_WIDTH_PS,
        counts_ch1: (0..n_bins).map(|_| poisson.sample(&mut rng) as u32).collect(),
        counts_ch2: (0..n_bins).map(|_| poisson.sample(&mut rng) as u32).collect(),
    };
    let streaming = correlate::tally_gmn(&stream, 1, 0, max_lag).map_err(|e| e.to_string())?;

    let mut co = vec![0u64; max_lag + 1];
    let mut s1 = vec![0u64; max_lag + 1];
    let mut s2 = vec![0u64; max_lag + 1];
    for k in 0..=max_lag {
        for t in 0..n_bins - k {
            co[k] += (stream.counts_ch1[t] == 1 && stream.counts_ch2[t + k] == 0) as u64;
            s1[k] += (stream.counts_ch1[t] == 1) as u64;
            s2[k] += (stream.counts_ch2[t + k] == 0) as u64;
        }
    }
    if streaming.co != co || streaming.s1 != s1 || streaming.s2 != s2 {
        return Err("streaming tallies differ from batch tallies".into());
    }

    // and the PTAG path reproduces the binned path tag-for-tag
    let tags = simulate::counts_to_timetags(&stream, RESOLUTION_PS, 3).map_err(|e| e.to_string())?;
    let mut buf = std::io::Cursor::new(Vec::new());
    ptag::write_stream(&mut buf, &tags).map_err(|e| e.to_string())?;
    let mut reader = ptag::PtagReader::new(
        std::io::Cursor::new(buf.into_inner()),
        std::path::PathBuf::from("<memory>"),
    )
    .map_err(|e| e.to_string())?;
    let from_ptag = correlate::correlate_ptag(&mut reader, BIN_WIDTH_PS, 1, 0, max_lag)
        .map_err(|e| e.to_string())?;
    let rebinned = correlate::bin_timetags(&tags, BIN_WIDTH_PS).map_err(|e| e.to_string())?;
    let from_bins = correlate::tally_gmn(&rebinned, 1, 0, max_lag).map_err(|e| e.to_string())?;
    if from_ptag != from_bins {
        return Err("PTAG streaming tallies differ from binned-path tallies".into());
    }
    Ok(format!("tallies identical over {n_bins} bins, {} lags", max_lag + 1))
}

#[test]
fn acceptance_throughput() {
    let mut all_passed = true;

    match streaming_equals_batch() {
        Ok(d) => println!("PASS criterion-11a streaming == batch: {d}"),
        Err(d) => {
            all_passed = false;
            println!("FAIL criterion-11a streaming == batch: {d}");
        }
    }

    let dir = std::env::temp_dir().join("photonstat-throughput");
    std::fs::create_dir_all(&dir).unwrap();
    let big = dir.join("big.ptag");
    let n_tags = write_big_file(&big);
    let bytes = std::fs::metadata(&big).unwrap().len();
    println!(
        "generated {n_tags} tags, {:.2} GiB",
        bytes as f64 / (1u64 << 30) as f64
    );
    assert!(n_tags >= TARGET_TAGS);

    let start = Instant::now();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_photonstat"))
        .args([
            "--out-dir",
            dir.to_str().unwrap(),
            "correlate",
            "--input",
            big.to_str().unwrap(),
            "--m",
            "1",
            "--n",
            "0",
            "--max-lag",
            "100",
            "--bin-width",
            "1e-6",
        ])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    let elapsed = start.elapsed();
    let peak = children_peak_rss_bytes();

    let time_ok = status.success() && elapsed.as_secs_f64() < 30.0;
    let mem_ok = peak <= 256 * 1024 * 1024;
    let summary = std::fs::read_to_string(dir.join("gmn.summary.json")).unwrap();
    println!("correlator summary: {}", summary.replace('\n', " "));
    println!(
        "{} criterion-11b single-pass runtime: {:.2?} (limit 30 s), exit {:?}",
        if time_ok { "PASS" } else { "FAIL" },
        elapsed,
        status.code()
    );
    println!(
        "{} criterion-11c bounded memory: peak RSS {:.1} MiB (limit 256 MiB)",
        if mem_ok { "PASS" } else { "FAIL" },
        peak as f64 / (1u64 << 20) as f64
    );
    all_passed &= time_ok && mem_ok;

    std::fs::remove_dir_all(&dir).ok();
    assert!(all_passed, "throughput criterion failed");
    let _ = std::io::stdout().flush();
}
