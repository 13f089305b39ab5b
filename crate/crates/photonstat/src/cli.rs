//! Command-line frontend: analytic sweeps, simulation, correlation, figure
//! data bundles, and self-verification.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O or
//! format error. `PHOTONSTAT_THREADS` caps the worker count.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{self, CountPair, ThermalParams};
use crate::coherence::CoherenceModel;
use crate::correlate;
use crate::error::{Error, Result};
use crate::manifest::ManifestBuilder;
use crate::oracle::{self, ContourConfig};
use crate::ptag;
use crate::simulate::{self, BinnedCountStream, SimConfig, Source};

#[derive(Debug, Parser)]
#[command(name = "photonstat", version, about = "Photon-number projection statistics in a Hanbury Brown-Twiss interferometer")]
pub struct Cli {
    /// RNG seed for anything stochastic.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Directory receiving output files and manifests.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate closed-form g_mn over a parameter grid.
    Analytic(AnalyticArgs),
    /// Generate a photon-detection stream and write it as PTAG.
    Simulate(SimulateArgs),
    /// Estimate g_mn from a PTAG or counts-CSV file.
    Correlate(CorrelateArgs),
    /// Emit the data bundle underlying one of the reference figures.
    Figure(FigureArgs),
    /// Run the oracle triangle and the analytic invariant suite.
    Verify,
}

/// A value grid: a single number, a comma list, or `start:stop:step`.
#[derive(Debug, Clone)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("grid '{s}' must be start:stop:step"));
            }
            let start: f64 = parts[0].parse().map_err(|e| format!("{e}"))?;
            let stop: f64 = parts[1].parse().map_err(|e| format!("{e}"))?;
            let step: f64 = parts[2].parse().map_err(|e| format!("{e}"))?;
            if step <= 0.0 || stop < start {
                return Err(format!("grid '{s}' must have step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step).round() as usize + 1;
            let mut vals: Vec<f64> = (0..count)
                .map(|i| start + i as f64 * step)
                .filter(|&v| v <= stop + 1e-9 * step)
                .collect();
            if vals.is_empty() {
                vals.push(start);
            }
            Ok(Grid(vals))
        } else {
            let vals = s
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{e}")))
                .collect::<std::result::Result<Vec<f64>, String>>()?;
            Ok(Grid(vals))
        }
    }
}

/// Semicolon-separated `(m,n)` pairs, e.g. `1,0;1,1;0,0`.
#[derive(Debug, Clone)]
pub struct PairList(pub Vec<(u32, u32)>);

impl FromStr for PairList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut pairs = Vec::new();
        for part in s.split(';') {
            let (m, n) = part
                .split_once(',')
                .ok_or_else(|| format!("pair '{part}' must be m,n"))?;
            pairs.push((
                m.trim().parse().map_err(|e| format!("{e}"))?,
                n.trim().parse().map_err(|e| format!("{e}"))?,
            ));
        }
        Ok(PairList(pairs))
    }
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Mean photon number grid (single value, list, or start:stop:step).
    #[arg(long, default_value = "0.1:5:0.1")]
    pub nbar: Grid,
    /// Squared coherence grid.
    #[arg(long, default_value = "0:1:0.25")]
    pub mu: Grid,
    /// Count pairs to evaluate, e.g. `1,0;1,1`.
    #[arg(long, default_value = "1,0")]
    pub pairs: PairList,
    /// Output file name inside --out-dir.
    #[arg(long, default_value = "analytic.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Source::Thermal)]
    pub source: Source,
    /// Mean photons per bin per detector.
    #[arg(long, default_value_t = 0.66)]
    pub nbar: f64,
    /// Squared coherence at zero separation and lag.
    #[arg(long, default_value_t = 1.0)]
    pub mu_peak: f64,
    /// Spatial coherence width (same unit as --dx).
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x: f64,
    /// Coherence time in seconds.
    #[arg(long, default_value_t = 2e-6)]
    pub tau_c: f64,
    /// Time-bin width in seconds.
    #[arg(long, default_value_t = 1e-6)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_bins: usize,
    /// Detector separation.
    #[arg(long, default_value_t = 0.0)]
    pub dx: f64,
    /// Time-tag resolution in seconds.
    #[arg(long, default_value_t = 1e-9)]
    pub tag_resolution: f64,
    /// Output PTAG file name inside --out-dir.
    #[arg(long, default_value = "sim.ptag")]
    pub out: PathBuf,
    /// Also write the per-bin counts as CSV.
    #[arg(long)]
    pub counts_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Input file: `.ptag` (streamed) or a counts CSV (`bin,counts_ch1,counts_ch2`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 200)]
    pub max_lag: usize,
    /// Time-bin width in seconds (PTAG input).
    #[arg(long, default_value_t = 1e-6)]
    pub bin_width: f64,
    /// Output format for the summary.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Output curve file name inside --out-dir.
    #[arg(long, default_value = "gmn.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Figure id: 2, 3, 4a1, 4a2, 4b1, 4b2, 6, 7, 8a, 8b.
    pub id: String,
}

fn secs_to_ps(label: &str, secs: f64) -> Result<u64> {
    let ps = (secs * 1e12).round();
    if !(ps >= 1.0 && ps < 9.2e18) {
        return Err(Error::InvalidParams(format!(
            "{label} = {secs} s is out of range (must round to >= 1 ps)"
        )));
    }
    Ok(ps as u64)
}

/// Map an error onto the documented exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Format { .. } | Error::UnsortedTags { .. } => 3,
        _ => 2,
    }
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    if let Ok(threads) = std::env::var("PHOTONSTAT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            // ignore failure: the global pool can only be built once
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    std::fs::create_dir_all(&cli.out_dir)?;
    match &cli.command {
        Command::Analytic(args) => cmd_analytic(args, cli.seed, &cli.out_dir).map(|_| 0),
        Command::Simulate(args) => cmd_simulate(args, cli.seed, &cli.out_dir).map(|_| 0),
        Command::Correlate(args) => cmd_correlate(args, cli.seed, &cli.out_dir).map(|_| 0),
        Command::Figure(args) => cmd_figure(&args.id, cli.seed, &cli.out_dir).map(|_| 0),
        Command::Verify => {
            let report = run_verification(cli.seed);
            let mut ok = true;
            for (name, outcome) in &report {
                match outcome {
                    Ok(()) => println!("ok   {name}"),
                    Err(msg) => {
                        ok = false;
                        println!("FAIL {name}: {msg}");
                    }
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
    }
}

pub fn cmd_analytic(args: &AnalyticArgs, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let mut manifest = ManifestBuilder::new(
        "analytic",
        serde_json::json!({
            "nbar": args.nbar.0,
            "mu": args.mu.0,
            "pairs": args.pairs.0,
        }),
        seed,
    );
    let out = out_dir.join(&args.out);
    let mut body = String::from("nbar,mu,m,n,g_value,reference_g2\n");
    for &nbar in &args.nbar.0 {
        for &mu in &args.mu.0 {
            let params = ThermalParams::new(nbar, mu)?;
            let reference = analytic::reference_g2(mu)?;
            for &(m, n) in &args.pairs.0 {
                let g = analytic::g_mn(params, CountPair::new(m, n))?;
                writeln!(body, "{nbar},{mu},{m},{n},{g},{reference}").unwrap();
            }
        }
    }
    std::fs::write(&out, body)?;
    manifest.add_output(&out);
    manifest.write(&manifest_path(&out))?;
    Ok(out)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn sim_config_from_args(args: &SimulateArgs, seed: u64) -> Result<SimConfig> {
    let coherence = CoherenceModel::new(args.sigma_x, args.tau_c, args.mu_peak)?;
    let cfg = SimConfig {
        source: args.source,
        nbar: args.nbar,
        coherence,
        bin_width_ps: secs_to_ps("bin width", args.bin_width)?,
        n_bins: args.n_bins,
        dx: args.dx,
        seed,
        tag_resolution_ps: secs_to_ps("tag resolution", args.tag_resolution)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_simulate(args: &SimulateArgs, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let cfg = sim_config_from_args(args, seed)?;
    let mut manifest =
        ManifestBuilder::new("simulate", serde_json::to_value(cfg).unwrap(), seed);
    let stream = simulate::simulate(&cfg)?;
    let out = out_dir.join(&args.out);
    // tag placement gets its own derived seed, separate from the count draw
    ptag::write_counts(
        File::create(&out)?,
        &stream,
        cfg.tag_resolution_ps,
        seed.wrapping_add(1),
    )?;
    manifest.add_output(&out);
    if let Some(csv) = &args.counts_csv {
        let csv_path = out_dir.join(csv);
        write_counts_csv(&csv_path, &stream)?;
        manifest.add_output(&csv_path);
    }
    manifest.write(&manifest_path(&out))?;
    Ok(out)
}

fn write_counts_csv(path: &Path, stream: &BinnedCountStream) -> Result<()> {
    let mut w = std::io::BufWriter::new(File::create(path)?);
    writeln!(w, "bin,counts_ch1,counts_ch2")?;
    for (b, (c1, c2)) in stream.counts_ch1.iter().zip(&stream.counts_ch2).enumerate() {
        writeln!(w, "{b},{c1},{c2}")?;
    }
    w.flush()?;
    Ok(())
}

fn read_counts_csv(path: &Path, bin_width_ps: u64) -> Result<BinnedCountStream> {
    let text = std::fs::read_to_string(path)?;
    let mut counts_ch1 = Vec::new();
    let mut counts_ch2 = Vec::new();
    let mut offset = 0u64;
    for (i, line) in text.lines().enumerate() {
        let line_offset = offset;
        offset += line.len() as u64 + 1;
        if i == 0 {
            if line.trim() != "bin,counts_ch1,counts_ch2" {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    offset: 0,
                    msg: "expected header 'bin,counts_ch1,counts_ch2'".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                offset: line_offset,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let parse = |f: &str| -> std::result::Result<u32, Error> {
            f.trim().parse().map_err(|e| Error::Format {
                path: path.to_path_buf(),
                offset: line_offset,
                msg: format!("bad count '{f}': {e}"),
            })
        };
        counts_ch1.push(parse(fields[1])?);
        counts_ch2.push(parse(fields[2])?);
    }
    Ok(BinnedCountStream {
        bin_width_ps,
        counts_ch1,
        counts_ch2,
    })
}

pub fn cmd_correlate(args: &CorrelateArgs, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let bin_width_ps = secs_to_ps("bin width", args.bin_width)?;
    let mut manifest = ManifestBuilder::new(
        "correlate",
        serde_json::json!({
            "input": args.input,
            "m": args.m,
            "n": args.n,
            "max_lag": args.max_lag,
            "bin_width_ps": bin_width_ps,
            "format": args.format,
        }),
        seed,
    );
    let is_ptag = args.input.extension().is_some_and(|e| e == "ptag");
    let tallies = if is_ptag {
        let mut reader = ptag::PtagReader::open(&args.input)?;
        correlate::correlate_ptag(&mut reader, bin_width_ps, args.m, args.n, args.max_lag)?
    } else {
        let stream = read_counts_csv(&args.input, bin_width_ps)?;
        correlate::tally_gmn(&stream, args.m, args.n, args.max_lag)?
    };
    let curve = tallies.to_curve();
    let out = out_dir.join(&args.out);
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    std::fs::write(&out, buf)?;
    manifest.add_output(&out);

    let summary_path = out.with_extension("summary.json");
    let summary = serde_json::json!({
        "m": args.m,
        "n": args.n,
        "max_lag": args.max_lag,
        "n_bins": tallies.n_bins,
        "g_lag0": curve.values[0],
        "stderr_lag0": curve.stderr[0],
        "coincidences_lag0": curve.event_counts[0],
        "total_m_events": tallies.s1[0],
        "total_n_events": tallies.s2[0],
    });
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap())?;
    manifest.add_output(&summary_path);
    manifest.write(&manifest_path(&out))?;
    Ok(out)
}

/// Default simulation config for the experiment-style figures.
fn figure_sim_config(nbar: f64, n_bins: usize, seed: u64) -> SimConfig {
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

pub fn cmd_figure(id: &str, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let mut manifest =
        ManifestBuilder::new("figure", serde_json::json!({ "id": id }), seed);
    let out = out_dir.join(format!("fig{id}.csv"));
    let body = match id {
        "2" | "3" => {
            let mut body = String::from("nbar,mu,g_value\n");
            for i in 1..=100 {
                let nbar = i as f64 * 0.05;
                for j in 0..=20 {
                    let mu = (j as f64 * 0.05).min(1.0);
                    let p = ThermalParams::new(nbar, mu)?;
                    let g = if id == "2" {
                        analytic::g11(p)?
                    } else {
                        analytic::g_m0(p, 1)?
                    };
                    writeln!(body, "{nbar},{mu},{g}").unwrap();
                }
            }
            body
        }
        "4a1" | "4a2" => {
            let nbar = if id == "4a1" { 1.0 } else { 5.0 };
            let mut body = String::from("mu,g00,g10,g20,g11,reference_g2\n");
            for i in 0..=100 {
                let mu = i as f64 / 100.0;
                let p = ThermalParams::new(nbar, mu)?;
                writeln!(
                    body,
                    "{mu},{},{},{},{},{}",
                    analytic::g_m0(p, 0)?,
                    analytic::g_m0(p, 1)?,
                    analytic::g_m0(p, 2)?,
                    analytic::g11(p)?,
                    analytic::reference_g2(mu)?
                )
                .unwrap();
            }
            body
        }
        "4b1" | "4b2" => {
            let mu = if id == "4b1" { 0.5 } else { 1.0 };
            let mut body = String::from("nbar,g00,g10,g20,g11,reference_g2\n");
            for i in 1..=1000 {
                let nbar = i as f64 / 100.0;
                let p = ThermalParams::new(nbar, mu)?;
                writeln!(
                    body,
                    "{nbar},{},{},{},{},{}",
                    analytic::g_m0(p, 0)?,
                    analytic::g_m0(p, 1)?,
                    analytic::g_m0(p, 2)?,
                    analytic::g11(p)?,
                    analytic::reference_g2(mu)?
                )
                .unwrap();
            }
            body
        }
        "6" => {
            let cfg = figure_sim_config(0.66, 2_000_000, seed);
            let stream = simulate::simulate_temporal(&cfg)?;
            let mut body = String::from("m,lag,g_value,stderr,coincidences,g_analytic\n");
            for m in 0..=4u32 {
                let curve = correlate::estimate_gmn(&stream, m, 0, 30)?;
                for k in 0..curve.len() {
                    let mu_k = cfg.effective_mu(k as u32);
                    let p = ThermalParams::new(cfg.nbar, mu_k)?;
                    writeln!(
                        body,
                        "{m},{k},{},{},{},{}",
                        curve.values[k],
                        curve.stderr[k],
                        curve.event_counts[k],
                        analytic::g_m0(p, m)?
                    )
                    .unwrap();
                }
            }
            body
        }
        "7" => {
            let mut body = String::from("source,nbar,m,g_value,stderr\n");
            for (i, &nbar) in [0.1, 0.2, 0.5, 1.0, 2.0, 5.0].iter().enumerate() {
                let cfg = figure_sim_config(nbar, 1_000_000, seed.wrapping_add(i as u64));
                let stream = simulate::simulate_temporal(&cfg)?;
                for m in 0..=4u32 {
                    let curve = correlate::estimate_gmn(&stream, m, 0, 10)?;
                    writeln!(
                        body,
                        "thermal,{nbar},{m},{},{}",
                        curve.values[0], curve.stderr[0]
                    )
                    .unwrap();
                }
                let mut laser_cfg = cfg;
                laser_cfg.source = Source::Laser;
                laser_cfg.seed = cfg.seed.wrapping_add(1000);
                let stream = simulate::simulate_laser(&laser_cfg)?;
                let curve = correlate::estimate_gmn(&stream, 1, 0, 10)?;
                writeln!(
                    body,
                    "laser,{nbar},1,{},{}",
                    curve.values[0], curve.stderr[0]
                )
                .unwrap();
            }
            body
        }
        "8a" | "8b" => {
            let nbar = if id == "8a" { 0.66 } else { 1.98 };
            let base = figure_sim_config(nbar, 500_000, seed);
            let dx_grid: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.25).collect();
            let mut body = String::from("m,dx,g_value,stderr,coincidences\n");
            for m in 0..=2u32 {
                let curve = correlate::spatial_scan(&base, &dx_grid, m, 0)?;
                for i in 0..curve.len() {
                    writeln!(
                        body,
                        "{m},{},{},{},{}",
                        curve.lags[i], curve.values[i], curve.stderr[i], curve.event_counts[i]
                    )
                    .unwrap();
                }
            }
            body
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown figure id '{other}' (expected 2, 3, 4a1, 4a2, 4b1, 4b2, 6, 7, 8a, 8b)"
            )))
        }
    };
    std::fs::write(&out, body)?;
    manifest.add_output(&out);
    manifest.write(&manifest_path(&out))?;
    Ok(out)
}

type Check = (String, std::result::Result<(), String>);

fn check(name: &str, outcome: std::result::Result<(), String>) -> Check {
    (name.to_string(), outcome)
}

/// The oracle triangle plus the analytic invariant suite; one entry per
/// check with a human-readable failure description.
pub fn run_verification(seed: u64) -> Vec<Check> {
    let mut report = Vec::new();

    report.push(check("oracle-triangle", oracle_triangle(seed, 200, 1e-8)));

    // normalization over the validation grid
    report.push(check("normalization", {
        let mut r = Ok(());
        'outer: for &nbar in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            for &mu in &[0.0, 0.25, 0.5, 0.75, 1.0] {
                let p = ThermalParams::new(nbar, mu).unwrap();
                let k = analytic::truncation_order(nbar);
                let table = analytic::pmn_table(p, k, k);
                let sum = 1.0 - table.tail_mass;
                let bound = 2.0 * analytic::marginal_tail_bound(nbar, k);
                if sum + bound < 1.0 - 1e-9 || sum > 1.0 + 1e-9 {
                    r = Err(format!("({nbar},{mu}): sum={sum}, bound={bound}"));
                    break 'outer;
                }
            }
        }
        r
    }));

    report.push(check("marginal-consistency", {
        let mut r = Ok(());
        'outer: for &(nbar, mu) in &[(0.5, 0.5), (1.0, 1.0), (2.0, 0.25), (5.0, 0.75)] {
            let p = ThermalParams::new(nbar, mu).unwrap();
            let k = analytic::truncation_order(nbar);
            let table = analytic::pmn_table(p, 20, 2 * k);
            for m in 0..=20u32 {
                let rs = table.row_sum(m);
                let pm = analytic::marginal_pq(p, m);
                if (rs - pm).abs() > 1e-10 {
                    r = Err(format!("({nbar},{mu}) m={m}: |{rs} - {pm}|"));
                    break 'outer;
                }
            }
        }
        r
    }));

    report.push(check("symmetry", {
        let mut r = Ok(());
        let p = ThermalParams::new(1.7, 0.6).unwrap();
        'outer: for m in 0..=8u32 {
            for n in 0..=8u32 {
                let a = analytic::joint_pmn(p, CountPair::new(m, n));
                let b = analytic::joint_pmn(p, CountPair::new(n, m));
                if a != b {
                    r = Err(format!("P_{m}{n} = {a} != P_{n}{m} = {b}"));
                    break 'outer;
                }
            }
        }
        r
    }));

    report.push(check("independence-at-mu-zero", {
        let mut r = Ok(());
        'outer: for &nbar in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let p = ThermalParams::new(nbar, 0.0).unwrap();
            for m in 0..=10u32 {
                for n in 0..=10u32 {
                    let g = analytic::g_mn(p, CountPair::new(m, n)).unwrap();
                    if (g - 1.0).abs() > 1e-12 {
                        r = Err(format!("nbar={nbar}: g_{m}{n} = {g}"));
                        break 'outer;
                    }
                }
            }
        }
        r
    }));

    report.push(check("pgf-consistency", {
        let mut r = Ok(());
        for &(nbar, mu) in &[(0.1, 0.0), (0.5, 0.5), (1.0, 1.0), (2.0, 0.25), (5.0, 0.9)] {
            let p = ThermalParams::new(nbar, mu).unwrap();
            let at_one = analytic::joint_pgf(p, 1.0, 1.0).unwrap();
            if at_one != 1.0 {
                r = Err(format!("M(1,1) = {at_one} at ({nbar},{mu})"));
                break;
            }
            let h = 1e-5;
            let d = (analytic::joint_pgf(p, 1.0 + h, 1.0).unwrap()
                - analytic::joint_pgf(p, 1.0 - h, 1.0).unwrap())
                / (2.0 * h);
            if (d - nbar).abs() > 1e-6 {
                r = Err(format!("dM/dx = {d} != {nbar} at ({nbar},{mu})"));
                break;
            }
        }
        r
    }));

    report.push(check("g00-g11-bounds", {
        let mut r = Ok(());
        'outer: for &nbar in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            for &mu in &[0.0, 0.25, 0.5, 0.75, 1.0] {
                let p = ThermalParams::new(nbar, mu).unwrap();
                let g00 = analytic::g_m0(p, 0).unwrap();
                let g11 = analytic::g11(p).unwrap();
                if g00 < 1.0 - 1e-12 || g11 < 1.0 - 1e-12 {
                    r = Err(format!("({nbar},{mu}): g00={g00}, g11={g11}"));
                    break 'outer;
                }
            }
        }
        r
    }));

    report.push(check("gm0-monotone-in-m", {
        let mut r = Ok(());
        'outer: for &nbar in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            for &mu in &[0.25, 0.5, 0.75, 1.0] {
                let p = ThermalParams::new(nbar, mu).unwrap();
                for m in 0..6u32 {
                    let a = analytic::g_m0(p, m).unwrap();
                    let b = analytic::g_m0(p, m + 1).unwrap();
                    if b >= a {
                        r = Err(format!("({nbar},{mu}): g_{}0 = {b} >= g_{m}0 = {a}", m + 1));
                        break 'outer;
                    }
                }
            }
        }
        r
    }));

    report.push(check("special-case-agreement", {
        // ratio built straight from P_mn, bypassing the simplified forms
        let generic = |p: ThermalParams, m: u32, n: u32| {
            analytic::joint_pmn(p, CountPair::new(m, n))
                / (analytic::marginal_pq(p, m) * analytic::marginal_pq(p, n))
        };
        let mut r = Ok(());
        for &(nbar, mu) in &[(0.3, 0.8), (1.0, 1.0), (2.5, 0.4)] {
            let p = ThermalParams::new(nbar, mu).unwrap();
            let a = analytic::g_m0(p, 1).unwrap();
            let b = generic(p, 1, 0);
            let c = analytic::g11(p).unwrap();
            let d = generic(p, 1, 1);
            if (a - b).abs() > 1e-12 * a.max(1.0) || (c - d).abs() > 1e-12 * c.max(1.0) {
                r = Err(format!("({nbar},{mu}): {a} vs {b}, {c} vs {d}"));
                break;
            }
        }
        r
    }));

    report
}

/// Max pairwise discrepancy among closed form, series, and contour routes
/// on `n_tuples` random parameter/count tuples.
pub fn oracle_triangle(seed: u64, n_tuples: usize, tol: f64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for _ in 0..n_tuples {
        let nbar: f64 = rng.gen_range(0.0..5.0);
        let mu: f64 = rng.gen_range(0.0..=1.0);
        let m: u32 = rng.gen_range(0..=8);
        let n: u32 = rng.gen_range(0..=8);
        let p = ThermalParams::new(nbar, mu).unwrap();
        let pair = CountPair::new(m, n);
        let closed = analytic::joint_pmn(p, pair);
        let series = oracle::pmn_series(p, pair);
        let cfg = ContourConfig {
            radius: oracle::adaptive_radius(p),
            ..ContourConfig::default()
        };
        let contour = match oracle::pmn_contour(p, pair, &cfg) {
            Ok(v) => v,
            Err(e) => return Err(format!("contour failed at ({nbar},{mu},{m},{n}): {e}")),
        };
        let d = (closed - series)
            .abs()
            .max((closed - contour).abs())
            .max((series - contour).abs());
        if d > worst {
            worst = d;
            worst_at = format!("({nbar:.4},{mu:.4},{m},{n})");
        }
    }
    if worst < tol {
        Ok(())
    } else {
        Err(format!("max discrepancy {worst:.3e} at {worst_at} exceeds {tol:.0e}"))
    }
}
