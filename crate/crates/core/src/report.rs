//! Cross-scheme equivalence checks and step/operation tables.

use std::fmt::Write as _;

use crate::error::Result;
use crate::exec::{compile, relative_deviation_within};
use crate::image::{polyphase_split, Extension, PolyphaseImage, Precision};
use crate::rng::random_image;
use crate::scheme::{all_variants, build_variant, SchemeKind};
use crate::wavelet::WaveletSpec;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Interior margin, in component samples, excluded from symmetric-extension
/// comparisons (16 image samples).
pub const SYMMETRIC_MARGIN: usize = 8;

#[derive(Clone, Debug)]
pub struct EquivReport {
    pub wavelet: String,
    pub size: usize,
    pub seed: u64,
    pub extension: Extension,
    pub margin: usize,
    pub schemes: Vec<String>,
    /// Deviation of each scheme from the first one (separable convolution).
    pub deviation_from_first: Vec<f64>,
    pub max_pairwise: f64,
    pub worst_pair: (String, String),
    pub tolerance: f64,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.max_pairwise <= self.tolerance
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "wavelet={} size={} seed={} extension={} margin={}",
            self.wavelet, self.size, self.seed, self.extension, self.margin
        );
        for (s, d) in self.schemes.iter().zip(&self.deviation_from_first) {
            let _ = writeln!(out, "{s:<16} {d:.3e}");
        }
        let _ = writeln!(
            out,
            "max pairwise deviation {:.3e} ({} vs {}), tolerance {:.1e}: {}",
            self.max_pairwise,
            self.worst_pair.0,
            self.worst_pair.1,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Outputs of every baseline and optimized scheme on one input.
pub fn run_all_schemes(
    w: &WaveletSpec,
    input: &PolyphaseImage,
    workers: usize,
) -> Result<Vec<(String, PolyphaseImage)>> {
    all_variants(w)?
        .into_iter()
        .map(|s| {
            let plan = compile(&s, input.precision(), input.extension(), workers);
            Ok((s.id(), plan.run(input)?))
        })
        .collect()
}

/// Runs every scheme on a seeded random `size x size` image in double
/// precision and reports the largest pairwise relative deviation. Symmetric
/// extension compares only the interior.
pub fn cmd_equiv(w: &WaveletSpec, size: usize, seed: u64, extension: Extension, tolerance: f64) -> Result<EquivReport> {
    let img = random_image(size, size, seed, Precision::F64);
    let input = polyphase_split(&img, extension)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outputs = run_all_schemes(w, &input, workers)?;
    let margin = match extension {
        Extension::Periodic => 0,
        Extension::Symmetric => SYMMETRIC_MARGIN,
    };
    let mut max_pairwise = 0.0f64;
    let mut worst_pair = (outputs[0].0.clone(), outputs[0].0.clone());
    for i in 0..outputs.len() {
        for j in i + 1..outputs.len() {
            let d = relative_deviation_within(&outputs[i].1, &outputs[j].1, margin);
            if d > max_pairwise {
                max_pairwise = d;
                worst_pair = (outputs[i].0.clone(), outputs[j].0.clone());
            }
        }
    }
    Ok(EquivReport {
        wavelet: w.name().to_string(),
        size,
        seed,
        extension,
        margin,
        deviation_from_first: outputs
            .iter()
            .map(|(_, o)| relative_deviation_within(&outputs[0].1, o, margin))
            .collect(),
        schemes: outputs.into_iter().map(|(s, _)| s).collect(),
        max_pairwise,
        worst_pair,
        tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRow {
    pub scheme: SchemeKind,
    pub optimized: bool,
    pub steps: usize,
    pub operations: usize,
}

/// Steps and operations of every scheme, baseline then optimized.
pub fn count_table(w: &WaveletSpec) -> Result<Vec<CountRow>> {
    let mut rows = Vec::with_capacity(10);
    for kind in SchemeKind::ALL {
        for optimized in [false, true] {
            let s = build_variant(kind, w, optimized)?;
            rows.push(CountRow {
                scheme: kind,
                optimized,
                steps: s.count_steps(),
                operations: s.count_operations(),
            });
        }
    }
    Ok(rows)
}

/// Comma-separated rendering with a header row.
pub fn cmd_count(w: &WaveletSpec) -> Result<String> {
    let mut out = String::from("wavelet,scheme,optimized,steps,operations\n");
    for row in count_table(w)? {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            w.name(),
            row.scheme.id(),
            if row.optimized { "yes" } else { "no" },
            row.steps,
            row.operations
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::get_wavelet;

    #[test]
    fn count_layout() {
        let text = cmd_count(&get_wavelet("cdf53").unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[0], "wavelet,scheme,optimized,steps,operations");
        assert!(lines.contains(&"cdf53,sep-lift,no,4,16"));
        assert!(lines.contains(&"cdf53,ns-lift,yes,2,18"));
    }

    #[test]
    fn equivalence_small_image() {
        let r = cmd_equiv(
            &get_wavelet("cdf53").unwrap(),
            32,
            1,
            Extension::Periodic,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!(r.schemes.len(), 9);
        assert!(r.passed(), "{}", r.render());
        assert!(r.render().contains("PASS"));
    }

    #[test]
    fn equivalence_rejects_odd_size() {
        assert!(cmd_equiv(
            &get_wavelet("cdf53").unwrap(),
            65,
            1,
            Extension::Periodic,
            DEFAULT_TOLERANCE
        )
        .is_err());
    }
}
