//! Throughput sweeps over image sizes.
//!
//! Throughput counts one read and one write of the whole image:
//! `2 * width * height * bytes_per_sample / seconds / 1e9` GB/s.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::compile;
use crate::image::{polyphase_split, Extension, Precision};
use crate::rng::random_image;
use crate::scheme::{build_variant, SchemeKind};
use crate::wavelet::WaveletSpec;

pub const THROUGHPUT_MODEL: &str = "throughput_gbps = 2 * width * height * bytes_per_sample / time_s / 1e9";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub scheme: String,
    pub wavelet: String,
    pub width: usize,
    pub height: usize,
    pub megapixels: f64,
    pub precision: String,
    pub workers: usize,
    pub time_s: f64,
    pub throughput_gbps: f64,
}

pub const CSV_HEADER: [&str; 9] = [
    "scheme",
    "wavelet",
    "width",
    "height",
    "megapixels",
    "precision",
    "workers",
    "time_s",
    "throughput_gbps",
];

pub fn throughput_gbps(width: usize, height: usize, precision: Precision, seconds: f64) -> f64 {
    2.0 * (width * height * precision.bytes_per_sample()) as f64 / seconds / 1e9
}

/// Measures one call of `f` in seconds.
pub trait Timer {
    fn measure(&mut self, f: &mut dyn FnMut()) -> f64;
}

pub struct WallClock;

impl Timer for WallClock {
    fn measure(&mut self, f: &mut dyn FnMut()) -> f64 {
        let start = Instant::now();
        f();
        start.elapsed().as_secs_f64()
    }
}

/// Runs the work but reports a fixed duration, for reproducible output.
pub struct FixedTimer(pub f64);

impl Timer for FixedTimer {
    fn measure(&mut self, f: &mut dyn FnMut()) -> f64 {
        f();
        self.0
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub wavelet: WaveletSpec,
    /// `(scheme, optimized)` in output order.
    pub schemes: Vec<(SchemeKind, bool)>,
    pub sizes: Vec<(usize, usize)>,
    pub workers: usize,
    pub repeats: usize,
    pub precision: Precision,
    pub extension: Extension,
    pub seed: u64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// One record per scheme and size, scheme-major, each the median of
/// `repeats` timed runs.
pub fn run_bench(config: &BenchConfig, timer: &mut dyn Timer) -> Result<Vec<BenchRecord>> {
    if config.repeats < 3 {
        return Err(Error::InvalidArgument(format!(
            "repeats must be at least 3, got {}",
            config.repeats
        )));
    }
    for &(w, h) in &config.sizes {
        if w == 0 || h == 0 || w % 2 == 1 || h % 2 == 1 {
            return Err(Error::InvalidArgument(format!("size {w}x{h} is not even")));
        }
    }
    let mut records = Vec::with_capacity(config.schemes.len() * config.sizes.len());
    for &(kind, optimize) in &config.schemes {
        let scheme = build_variant(kind, &config.wavelet, optimize)?;
        let plan = compile(&scheme, config.precision, config.extension, config.workers);
        for &(w, h) in &config.sizes {
            let input = polyphase_split(&random_image(w, h, config.seed, config.precision), config.extension)?;
            let mut failure = None;
            let times: Vec<f64> = (0..config.repeats)
                .map(|_| {
                    timer.measure(&mut || {
                        if let Err(e) = plan.run(&input) {
                            failure = Some(e);
                        }
                    })
                })
                .collect();
            if let Some(e) = failure {
                return Err(e);
            }
            let time_s = median(times);
            records.push(BenchRecord {
                scheme: scheme.id(),
                wavelet: config.wavelet.name().to_string(),
                width: w,
                height: h,
                megapixels: (w * h) as f64 / 1e6,
                precision: config.precision.name().to_string(),
                workers: plan.worker_count(),
                time_s,
                throughput_gbps: throughput_gbps(w, h, config.precision, time_s),
            });
        }
    }
    Ok(records)
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Parses `256,512x256,1024` into `(width, height)` pairs.
pub fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let s = s.trim();
            let bad = || Error::InvalidArgument(format!("bad size `{s}`"));
            match s.split_once('x') {
                Some((w, h)) => Ok((w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?)),
                None => {
                    let n = s.parse().map_err(|_| bad())?;
                    Ok((n, n))
                }
            }
        })
        .collect()
}
