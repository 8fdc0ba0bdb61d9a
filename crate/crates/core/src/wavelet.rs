//! Wavelets as already-factored lifting steps.
//!
//! Built-ins: `cdf53`, `cdf97` and `dd137`. Custom wavelets can be loaded from
//! a plain-text definition:
//!
//! ```text
//! # comments start with '#'
//! name cdf53
//! predict 0:-1/2 1:-1/2
//! update 0:1/4 -1:1/4
//! scaling 1
//! ```
//!
//! Each `predict`/`update` line is one lifting polynomial given as
//! `exponent:coefficient` pairs, where exponent `k` is the term
//! `g_k * z^{-k}` (it reads the neighbour `k` positions ahead). Lines must
//! alternate, starting with `predict`. Coefficients are integers, fractions
//! `a/b` or decimal literals, all read exactly. `scaling` is optional and
//! defaults to 1; a scaling `s` multiplies the low band by `s` and divides
//! the high band by `s`.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::{One, Signed};

use crate::error::{io_err, Error, Result};
use crate::laurent::{parse_coeff, Coeff, LaurentPoly};
use crate::matrix::{predict_1d, update_1d, PolyMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftingPair {
    pub predict: LaurentPoly,
    pub update: LaurentPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaveletSpec {
    name: String,
    pairs: Vec<LiftingPair>,
    scaling: Coeff,
}

pub const BUILTIN_NAMES: [&str; 3] = ["cdf53", "cdf97", "dd137"];

const CDF97_ALPHA: &str = "-1.586134342059924";
const CDF97_BETA: &str = "-0.052980118572961";
const CDF97_GAMMA: &str = "0.882911075530934";
const CDF97_DELTA: &str = "0.443506852043971";
const CDF97_ZETA: &str = "1.149604398860241";

impl WaveletSpec {
    pub fn new(name: impl Into<String>, pairs: Vec<LiftingPair>, scaling: Coeff) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::InvalidWavelet(format!("`{name}` has no lifting pairs")));
        }
        for (k, pair) in pairs.iter().enumerate() {
            for (what, p) in [("predict", &pair.predict), ("update", &pair.update)] {
                if p.univariate_axis().is_none() {
                    return Err(Error::InvalidWavelet(format!(
                        "`{name}` {what} polynomial {} is not univariate",
                        k + 1
                    )));
                }
            }
        }
        if !scaling.is_positive() {
            return Err(Error::InvalidWavelet(format!("`{name}` scaling must be positive")));
        }
        Ok(Self { name, pairs, scaling })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pairs(&self) -> &[LiftingPair] {
        &self.pairs
    }

    /// Number of predict/update pairs.
    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn scaling(&self) -> &Coeff {
        &self.scaling
    }

    pub fn has_scaling(&self) -> bool {
        !self.scaling.is_one()
    }

    /// 2x2 polyphase matrix `prod_k [1 U; 0 1][1 0; P 1]`, first pair applied
    /// first, without the scaling stage.
    pub fn polyphase_1d(&self) -> Result<PolyMatrix> {
        let mut m = PolyMatrix::identity(2);
        for pair in &self.pairs {
            m = predict_1d(&pair.predict)?.mat_mul(&m)?;
            m = update_1d(&pair.update)?.mat_mul(&m)?;
        }
        Ok(m)
    }

    /// Tap counts `(low, high)` of the equivalent analysis filters.
    pub fn filter_lengths(&self) -> Result<(usize, usize)> {
        let m = self.polyphase_1d()?;
        let low = m.row_support(0).map_or(0, |s| s.0);
        let high = m.row_support(1).map_or(0, |s| s.0);
        Ok((low, high))
    }

    pub fn to_definition(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name {}", self.name);
        for pair in &self.pairs {
            for (what, p) in [("predict", &pair.predict), ("update", &pair.update)] {
                out.push_str(what);
                for (&(km, kn), c) in p.terms() {
                    let _ = write!(out, " {}:{c}", km + kn);
                }
                out.push('\n');
            }
        }
        let _ = writeln!(out, "scaling {}", self.scaling);
        out
    }

    pub fn parse_definition(text: &str) -> Result<Self> {
        let mut name = None;
        let mut scaling = Coeff::one();
        let mut pending: Option<LaurentPoly> = None;
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap_or_default();
            match keyword {
                "name" => {
                    name = Some(words.next().ok_or_else(|| err("missing name"))?.to_string());
                }
                "scaling" => {
                    scaling = parse_coeff(words.next().ok_or_else(|| err("missing scaling"))?)?;
                }
                "predict" | "update" => {
                    let mut taps = Vec::new();
                    for word in words {
                        let (e, c) = word
                            .split_once(':')
                            .ok_or_else(|| err(&format!("expected exponent:coefficient, got `{word}`")))?;
                        let e: i32 = e.trim().parse().map_err(|_| err(&format!("bad exponent `{e}`")))?;
                        taps.push((e, parse_coeff(c)?));
                    }
                    let poly = LaurentPoly::horizontal(taps);
                    match (keyword, pending.take()) {
                        ("predict", None) => pending = Some(poly),
                        ("update", Some(predict)) => pairs.push(LiftingPair { predict, update: poly }),
                        ("predict", Some(_)) => return Err(err("two predict lines in a row")),
                        _ => return Err(err("update line without a preceding predict")),
                    }
                }
                other => return Err(err(&format!("unknown keyword `{other}`"))),
            }
        }
        if pending.is_some() {
            return Err(Error::Parse("trailing predict line without update".into()));
        }
        let name = name.ok_or_else(|| Error::Parse("missing `name` line".into()))?;
        Self::new(name, pairs, scaling)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse_definition(&text)
    }

    /// Lifting inverse: negated steps in reverse order. The scaling becomes
    /// its reciprocal and is applied first by [`crate::exec::inverse_lifting`].
    pub(crate) fn negated_pairs(&self) -> Vec<LiftingPair> {
        self.pairs
            .iter()
            .rev()
            .map(|p| LiftingPair {
                predict: -&p.predict,
                update: -&p.update,
            })
            .collect()
    }
}

fn pair(predict: LaurentPoly, update: LaurentPoly) -> LiftingPair {
    LiftingPair { predict, update }
}

fn two_tap(c: &str, toward: i32) -> LaurentPoly {
    let c = parse_coeff(c).expect("built-in constant");
    LaurentPoly::horizontal([(0, c.clone()), (toward, c)])
}

/// Looks up a built-in wavelet by name.
pub fn get_wavelet(name: &str) -> Result<WaveletSpec> {
    match name {
        // P(z) = -1/2 (1 + z^-1), U(z) = 1/4 (1 + z)
        "cdf53" => WaveletSpec::new(
            "cdf53",
            vec![pair(
                LaurentPoly::horizontal_ratios(&[(0, -1, 2), (1, -1, 2)]),
                LaurentPoly::horizontal_ratios(&[(0, 1, 4), (-1, 1, 4)]),
            )],
            Coeff::one(),
        ),
        "cdf97" => WaveletSpec::new(
            "cdf97",
            vec![
                pair(two_tap(CDF97_ALPHA, 1), two_tap(CDF97_BETA, -1)),
                pair(two_tap(CDF97_GAMMA, 1), two_tap(CDF97_DELTA, -1)),
            ],
            parse_coeff(CDF97_ZETA).expect("built-in constant"),
        ),
        // Four-point interpolating predict and its half-weight update.
        "dd137" => WaveletSpec::new(
            "dd137",
            vec![pair(
                LaurentPoly::horizontal_ratios(&[(-1, 1, 16), (0, -9, 16), (1, -9, 16), (2, 1, 16)]),
                LaurentPoly::horizontal_ratios(&[(-2, -1, 32), (-1, 9, 32), (0, 9, 32), (1, -1, 32)]),
            )],
            Coeff::one(),
        ),
        _ => Err(Error::UnknownWavelet {
            name: name.to_string(),
            valid: BUILTIN_NAMES.join(", "),
        }),
    }
}

/// Built-in name, or a path to a definition file.
pub fn resolve_wavelet(name_or_path: &str) -> Result<WaveletSpec> {
    match get_wavelet(name_or_path) {
        Ok(w) => Ok(w),
        Err(e) => {
            let path = Path::new(name_or_path);
            if path.is_file() {
                WaveletSpec::load(path)
            } else {
                Err(e)
            }
        }
    }
}

/// One pair with zero predict and update: every scheme built from it is the
/// identity.
pub fn identity_wavelet() -> WaveletSpec {
    WaveletSpec::new(
        "identity",
        vec![pair(LaurentPoly::zero(), LaurentPoly::zero())],
        Coeff::one(),
    )
    .expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::ratio;

    #[test]
    fn cdf53_definition() {
        let w = get_wavelet("cdf53").unwrap();
        assert_eq!(w.k(), 1);
        let p = &w.pairs()[0].predict;
        assert_eq!(p.coeff((0, 0)), ratio(-1, 2));
        assert_eq!(p.coeff((1, 0)), ratio(-1, 2));
        assert_eq!(p.term_count(), 2);
        let u = &w.pairs()[0].update;
        assert_eq!(u.coeff((0, 0)), ratio(1, 4));
        assert_eq!(u.coeff((-1, 0)), ratio(1, 4));
        assert!(!w.has_scaling());
    }

    #[test]
    fn cdf97_definition() {
        let w = get_wavelet("cdf97").unwrap();
        assert_eq!(w.k(), 2);
        let approx = |c: &Coeff| crate::laurent::to_f64(c);
        let taps = [
            w.pairs()[0].predict.coeff((0, 0)),
            w.pairs()[0].update.coeff((0, 0)),
            w.pairs()[1].predict.coeff((0, 0)),
            w.pairs()[1].update.coeff((0, 0)),
        ];
        let expected = [-1.58613434, -0.05298012, 0.88291108, 0.44350685];
        for (t, e) in taps.iter().zip(expected) {
            assert!((approx(t) - e).abs() < 1e-8);
        }
        assert!((approx(w.scaling()) - 1.14960440).abs() < 1e-8);
    }

    #[test]
    fn dd137_definition() {
        let w = get_wavelet("dd137").unwrap();
        assert_eq!(w.k(), 1);
        assert_eq!(w.pairs()[0].predict.term_count(), 4);
        assert_eq!(w.pairs()[0].update.term_count(), 4);
        assert_eq!(w.pairs()[0].update.coeff((0, 0)), ratio(9, 32));
    }

    #[test]
    fn repeated_lookups_agree() {
        for name in BUILTIN_NAMES {
            assert_eq!(get_wavelet(name).unwrap(), get_wavelet(name).unwrap());
        }
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = get_wavelet("haar").unwrap_err();
        let msg = err.to_string();
        for name in BUILTIN_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn filter_lengths_match_names() {
        assert_eq!(get_wavelet("cdf53").unwrap().filter_lengths().unwrap(), (5, 3));
        assert_eq!(get_wavelet("cdf97").unwrap().filter_lengths().unwrap(), (9, 7));
        assert_eq!(get_wavelet("dd137").unwrap().filter_lengths().unwrap(), (13, 7));
    }

    #[test]
    fn definition_round_trip() {
        for name in BUILTIN_NAMES {
            let w = get_wavelet(name).unwrap();
            let text = w.to_definition();
            assert_eq!(WaveletSpec::parse_definition(&text).unwrap(), w, "{text}");
        }
    }

    #[test]
    fn definition_errors() {
        let cases = [
            "predict 0:1\nupdate 0:1\n",
            "name x\nupdate 0:1\n",
            "name x\npredict 0:1\npredict 0:1\n",
            "name x\npredict 0:1\n",
            "name x\n",
            "name x\npredict 0=1\nupdate\n",
            "name x\npredict 0:1\nupdate 0:1\nscaling -2\n",
            "name x\nwhatever\n",
        ];
        for text in cases {
            assert!(WaveletSpec::parse_definition(text).is_err(), "{text}");
        }
    }

    #[test]
    fn empty_and_bivariate_specs_rejected() {
        assert!(WaveletSpec::new("e", vec![], Coeff::one()).is_err());
        let bad = LaurentPoly::monomial((1, 1), ratio(1, 1));
        assert!(WaveletSpec::new("b", vec![pair(bad, LaurentPoly::zero())], Coeff::one()).is_err());
    }
}
