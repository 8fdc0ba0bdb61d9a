//! Calculation schemes: ordered steps separated by barriers, each step a
//! fused group of polyphase matrices evaluated without synchronization.

use std::fmt::{self, Write as _};

use num_traits::One;

use crate::error::{Error, Result};
use crate::laurent::{Coeff, LaurentPoly};
use crate::matrix::{
    polyconvolution, predict_h, predict_v, scaling_2d, spatial_predict, spatial_update, update_h, update_v, PolyMatrix,
};
use crate::wavelet::{LiftingPair, WaveletSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    SeparableConvolution,
    SeparableLifting,
    NonSeparableConvolution,
    NonSeparablePolyconvolution,
    NonSeparableLifting,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::SeparableConvolution,
        SchemeKind::SeparableLifting,
        SchemeKind::NonSeparableConvolution,
        SchemeKind::NonSeparablePolyconvolution,
        SchemeKind::NonSeparableLifting,
    ];

    /// Short identifier used on the command line and in CSV output.
    pub fn id(self) -> &'static str {
        match self {
            SchemeKind::SeparableConvolution => "sep-conv",
            SchemeKind::SeparableLifting => "sep-lift",
            SchemeKind::NonSeparableConvolution => "ns-conv",
            SchemeKind::NonSeparablePolyconvolution => "ns-polyconv",
            SchemeKind::NonSeparableLifting => "ns-lift",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SchemeKind::SeparableConvolution => "separable convolution",
            SchemeKind::SeparableLifting => "separable lifting",
            SchemeKind::NonSeparableConvolution => "non-separable convolution",
            SchemeKind::NonSeparablePolyconvolution => "non-separable polyconvolution",
            SchemeKind::NonSeparableLifting => "non-separable lifting",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.id() == id)
            .ok_or_else(|| Error::UnknownScheme {
                name: id.to_string(),
                valid: Self::ALL.map(|k| k.id()).join(", "),
            })
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub matrix: PolyMatrix,
}

impl Factor {
    fn new(label: impl Into<String>, matrix: PolyMatrix) -> Self {
        Self {
            label: label.into(),
            matrix,
        }
    }
}

/// Matrices evaluated back to back with no barrier in between. Factors are
/// stored in application order, so the group's matrix is
/// `factors[n-1] * ... * factors[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusedGroup {
    factors: Vec<Factor>,
}

impl FusedGroup {
    pub fn new(factors: Vec<Factor>) -> Self {
        assert!(!factors.is_empty(), "fused group needs at least one factor");
        Self { factors }
    }

    fn single(label: impl Into<String>, matrix: PolyMatrix) -> Self {
        Self::new(vec![Factor::new(label, matrix)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn product(&self) -> PolyMatrix {
        let mut iter = self.factors.iter();
        let first = iter.next().expect("nonempty").matrix.clone();
        iter.fold(first, |acc, f| f.matrix.mat_mul(&acc).expect("uniform dimensions"))
    }

    pub fn operation_count(&self) -> usize {
        self.factors.iter().map(|f| f.matrix.operation_count()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    kind: SchemeKind,
    optimized: bool,
    wavelet: String,
    steps: Vec<FusedGroup>,
    scaling: Coeff,
}

impl Scheme {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn is_optimized(&self) -> bool {
        self.optimized
    }

    pub fn wavelet(&self) -> &str {
        &self.wavelet
    }

    pub fn steps(&self) -> &[FusedGroup] {
        &self.steps
    }

    /// 1-D subband gain applied after the last step; not part of any step and
    /// not counted as work.
    pub fn scaling(&self) -> &Coeff {
        &self.scaling
    }

    pub fn label(&self) -> String {
        if self.optimized {
            format!("{} (optimized)", self.kind.description())
        } else {
            self.kind.description().to_string()
        }
    }

    /// Identifier such as `ns-lift` or `ns-lift+opt`.
    pub fn id(&self) -> String {
        if self.optimized {
            format!("{}+opt", self.kind.id())
        } else {
            self.kind.id().to_string()
        }
    }

    pub fn count_steps(&self) -> usize {
        self.steps.len()
    }

    /// Terms of all polynomials in all matrices of all steps, per column,
    /// excluding units on the diagonals.
    pub fn count_operations(&self) -> usize {
        self.steps.iter().map(FusedGroup::operation_count).sum()
    }

    /// Product of every step in application order, without the scaling.
    pub fn total_product(&self) -> PolyMatrix {
        self.steps.iter().fold(PolyMatrix::identity(4), |acc, g| {
            g.product().mat_mul(&acc).expect("4x4")
        })
    }

    /// Full transform matrix, scaling included.
    pub fn transform_matrix(&self) -> PolyMatrix {
        let total = self.total_product();
        if self.scaling.is_one() {
            total
        } else {
            scaling_2d(&self.scaling).mat_mul(&total).expect("4x4")
        }
    }

    /// Human-readable listing of steps, factors and their entries.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scheme: {}", self.label());
        let _ = writeln!(out, "wavelet: {}", self.wavelet);
        let _ = writeln!(out, "steps: {}", self.count_steps());
        let _ = writeln!(out, "operations: {}", self.count_operations());
        let _ = writeln!(out, "scaling: {}", self.scaling);
        for (i, step) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "step {}: {} factor(s)", i + 1, step.factors.len());
            for (j, f) in step.factors.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  factor {}: {} ({} operations)",
                    j + 1,
                    f.label,
                    f.matrix.operation_count()
                );
                for line in f.matrix.to_string().lines() {
                    let _ = writeln!(out, "    {line}");
                }
            }
        }
        out
    }
}

fn tag(k: usize, count: usize) -> String {
    if count > 1 {
        format!("({})", k + 1)
    } else {
        String::new()
    }
}

fn scheme(kind: SchemeKind, w: &WaveletSpec, steps: Vec<FusedGroup>) -> Scheme {
    Scheme {
        kind,
        optimized: false,
        wavelet: w.name().to_string(),
        steps,
        scaling: w.scaling().clone(),
    }
}

/// Horizontal 1-D transform of a run of pairs collapsed to one matrix.
fn collapsed_h(pairs: &[LiftingPair]) -> Result<PolyMatrix> {
    let mut m = PolyMatrix::identity(4);
    for p in pairs {
        m = update_h(&p.update)?.mat_mul(&predict_h(&p.predict)?.mat_mul(&m)?)?;
    }
    Ok(m)
}

fn collapsed_v(pairs: &[LiftingPair]) -> Result<PolyMatrix> {
    let mut m = PolyMatrix::identity(4);
    for p in pairs {
        m = update_v(&p.update)?.mat_mul(&predict_v(&p.predict)?.mat_mul(&m)?)?;
    }
    Ok(m)
}

fn collapsed_2d(pairs: &[LiftingPair]) -> Result<PolyMatrix> {
    collapsed_v(pairs)?.mat_mul(&collapsed_h(pairs)?)
}

pub fn build_separable_lifting(w: &WaveletSpec) -> Result<Scheme> {
    let k_total = w.k();
    let mut steps = Vec::with_capacity(4 * k_total);
    for (k, pair) in w.pairs().iter().enumerate() {
        let t = tag(k, k_total);
        steps.push(FusedGroup::single(format!("T[P]^H{t}"), predict_h(&pair.predict)?));
        steps.push(FusedGroup::single(format!("T[P]^V{t}"), predict_v(&pair.predict)?));
        steps.push(FusedGroup::single(format!("S[U]^H{t}"), update_h(&pair.update)?));
        steps.push(FusedGroup::single(format!("S[U]^V{t}"), update_v(&pair.update)?));
    }
    Ok(scheme(SchemeKind::SeparableLifting, w, steps))
}

pub fn build_separable_convolution(w: &WaveletSpec) -> Result<Scheme> {
    let steps = vec![
        FusedGroup::single("N^H", collapsed_h(w.pairs())?),
        FusedGroup::single("N^V", collapsed_v(w.pairs())?),
    ];
    Ok(scheme(SchemeKind::SeparableConvolution, w, steps))
}

pub fn build_nonseparable_convolution(w: &WaveletSpec) -> Result<Scheme> {
    let steps = vec![FusedGroup::single("N", collapsed_2d(w.pairs())?)];
    Ok(scheme(SchemeKind::NonSeparableConvolution, w, steps))
}

pub fn build_nonseparable_polyconvolution(w: &WaveletSpec) -> Result<Scheme> {
    let k_total = w.k();
    let steps = w
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            Ok(FusedGroup::single(
                format!("N[P,U]{}", tag(k, k_total)),
                polyconvolution(&p.predict, &p.update)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(scheme(SchemeKind::NonSeparablePolyconvolution, w, steps))
}

pub fn build_nonseparable_lifting(w: &WaveletSpec) -> Result<Scheme> {
    let k_total = w.k();
    let mut steps = Vec::with_capacity(2 * k_total);
    for (k, pair) in w.pairs().iter().enumerate() {
        let t = tag(k, k_total);
        steps.push(FusedGroup::single(format!("T[P]{t}"), spatial_predict(&pair.predict)?));
        steps.push(FusedGroup::single(format!("S[U]{t}"), spatial_update(&pair.update)?));
    }
    Ok(scheme(SchemeKind::NonSeparableLifting, w, steps))
}

pub fn build(kind: SchemeKind, w: &WaveletSpec) -> Result<Scheme> {
    match kind {
        SchemeKind::SeparableConvolution => build_separable_convolution(w),
        SchemeKind::SeparableLifting => build_separable_lifting(w),
        SchemeKind::NonSeparableConvolution => build_nonseparable_convolution(w),
        SchemeKind::NonSeparablePolyconvolution => build_nonseparable_polyconvolution(w),
        SchemeKind::NonSeparableLifting => build_nonseparable_lifting(w),
    }
}

/// Builds `kind` and, when `optimize` is set, applies the constant split.
pub fn build_variant(kind: SchemeKind, w: &WaveletSpec, optimize: bool) -> Result<Scheme> {
    let base = build(kind, w)?;
    if optimize {
        optimize_constant_split(&base, w)
    } else {
        Ok(base)
    }
}

/// Collects the factors of an optimized group in application order, dropping
/// identities. A group whose factors are all identities keeps one identity.
fn fused(factors: Vec<(String, PolyMatrix)>, fallback_label: &str) -> FusedGroup {
    let kept: Vec<Factor> = factors
        .into_iter()
        .filter(|(_, m)| !m.is_identity())
        .map(|(l, m)| Factor::new(l, m))
        .collect();
    if kept.is_empty() {
        FusedGroup::single(fallback_label, PolyMatrix::identity(4))
    } else {
        FusedGroup::new(kept)
    }
}

/// `pairs` with the constant part removed from the first predict and the last
/// update, plus those two constants.
fn strip_outer_constants(pairs: &[LiftingPair]) -> (Vec<LiftingPair>, LaurentPoly, LaurentPoly) {
    let mut inner = pairs.to_vec();
    let (p0, p1) = inner[0].predict.split_constant();
    inner[0].predict = p1;
    let last = inner.len() - 1;
    let (u0, u1) = inner[last].update.split_constant();
    inner[last].update = u1;
    (inner, p0, u0)
}

/// Pulls the constant parts `P0`, `U0` of the lifting polynomials out of each
/// step into separable lifting factors fused with the remainder, keeping the
/// number of steps. Separable lifting is returned unchanged.
pub fn optimize_constant_split(s: &Scheme, w: &WaveletSpec) -> Result<Scheme> {
    let not_derived = || Error::NotDerived {
        scheme: s.label(),
        wavelet: w.name().to_string(),
    };
    if s.wavelet != w.name() || s.scaling != *w.scaling() {
        return Err(not_derived());
    }
    let optimized = optimized_steps(s.kind, w)?;
    let reference = if s.optimized {
        &optimized
    } else {
        &build(s.kind, w)?.steps
    };
    if s.steps != *reference {
        return Err(not_derived());
    }
    Ok(Scheme {
        kind: s.kind,
        optimized: true,
        wavelet: s.wavelet.clone(),
        steps: optimized,
        scaling: s.scaling.clone(),
    })
}

fn optimized_steps(kind: SchemeKind, w: &WaveletSpec) -> Result<Vec<FusedGroup>> {
    let k_total = w.k();
    let steps = match kind {
        SchemeKind::SeparableLifting => build_separable_lifting(w)?.steps,
        SchemeKind::NonSeparableLifting => {
            let mut steps = Vec::with_capacity(2 * k_total);
            for (k, pair) in w.pairs().iter().enumerate() {
                let t = tag(k, k_total);
                let (p0, p1) = pair.predict.split_constant();
                steps.push(fused(
                    vec![
                        (format!("T[P0]^H{t}"), predict_h(&p0)?),
                        (format!("T[P0]^V{t}"), predict_v(&p0)?),
                        (format!("T[P1]{t}"), spatial_predict(&p1)?),
                    ],
                    &format!("T[P]{t}"),
                ));
                let (u0, u1) = pair.update.split_constant();
                steps.push(fused(
                    vec![
                        (format!("S[U0]^H{t}"), update_h(&u0)?),
                        (format!("S[U0]^V{t}"), update_v(&u0)?),
                        (format!("S[U1]{t}"), spatial_update(&u1)?),
                    ],
                    &format!("S[U]{t}"),
                ));
            }
            steps
        }
        SchemeKind::NonSeparablePolyconvolution => w
            .pairs()
            .iter()
            .enumerate()
            .map(|(k, pair)| {
                let t = tag(k, k_total);
                let (p0, p1) = pair.predict.split_constant();
                let (u0, u1) = pair.update.split_constant();
                Ok(fused(
                    vec![
                        (format!("T[P0]^H{t}"), predict_h(&p0)?),
                        (format!("T[P0]^V{t}"), predict_v(&p0)?),
                        (format!("N[P1,U1]{t}"), polyconvolution(&p1, &u1)?),
                        (format!("S[U0]^H{t}"), update_h(&u0)?),
                        (format!("S[U0]^V{t}"), update_v(&u0)?),
                    ],
                    &format!("N[P,U]{t}"),
                ))
            })
            .collect::<Result<_>>()?,
        SchemeKind::NonSeparableConvolution => {
            let (inner, p0, u0) = strip_outer_constants(w.pairs());
            vec![fused(
                vec![
                    ("T[P0]^H".into(), predict_h(&p0)?),
                    ("T[P0]^V".into(), predict_v(&p0)?),
                    ("N'".into(), collapsed_2d(&inner)?),
                    ("S[U0]^H".into(), update_h(&u0)?),
                    ("S[U0]^V".into(), update_v(&u0)?),
                ],
                "N",
            )]
        }
        SchemeKind::SeparableConvolution => {
            let (inner, p0, u0) = strip_outer_constants(w.pairs());
            vec![
                fused(
                    vec![
                        ("T[P0]^H".into(), predict_h(&p0)?),
                        ("N'^H".into(), collapsed_h(&inner)?),
                        ("S[U0]^H".into(), update_h(&u0)?),
                    ],
                    "N^H",
                ),
                fused(
                    vec![
                        ("T[P0]^V".into(), predict_v(&p0)?),
                        ("N'^V".into(), collapsed_v(&inner)?),
                        ("S[U0]^V".into(), update_v(&u0)?),
                    ],
                    "N^V",
                ),
            ]
        }
    };
    Ok(steps)
}

/// Every scheme for `w`, baseline and optimized, in a fixed order. The
/// optimized separable lifting is omitted since it equals the baseline.
pub fn all_variants(w: &WaveletSpec) -> Result<Vec<Scheme>> {
    let mut out = Vec::with_capacity(9);
    for kind in SchemeKind::ALL {
        let base = build(kind, w)?;
        if kind != SchemeKind::SeparableLifting {
            let opt = optimize_constant_split(&base, w)?;
            out.push(base);
            out.push(opt);
        } else {
            out.push(base);
        }
    }
    Ok(out)
}

/// Inverse of the separable lifting scheme of `w`, reciprocal scaling folded
/// into the first step.
pub fn build_inverse_lifting(w: &WaveletSpec) -> Result<Scheme> {
    let negated = w.negated_pairs();
    let k_total = negated.len();
    let mut steps = Vec::with_capacity(4 * k_total);
    for (k, pair) in negated.iter().enumerate() {
        let t = tag(k_total - 1 - k, k_total);
        let mut first = vec![Factor::new(format!("S[-U]^V{t}"), update_v(&pair.update)?)];
        if k == 0 && w.has_scaling() {
            let inv = num_traits::Inv::inv(w.scaling().clone());
            first.insert(0, Factor::new("scaling^-1", scaling_2d(&inv)));
        }
        steps.push(FusedGroup::new(first));
        steps.push(FusedGroup::single(format!("S[-U]^H{t}"), update_h(&pair.update)?));
        steps.push(FusedGroup::single(format!("T[-P]^V{t}"), predict_v(&pair.predict)?));
        steps.push(FusedGroup::single(format!("T[-P]^H{t}"), predict_h(&pair.predict)?));
    }
    Ok(Scheme {
        kind: SchemeKind::SeparableLifting,
        optimized: false,
        wavelet: format!("{}^-1", w.name()),
        steps,
        scaling: Coeff::one(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::ratio;
    use crate::wavelet::{get_wavelet, identity_wavelet};

    fn cdf53() -> WaveletSpec {
        get_wavelet("cdf53").unwrap()
    }

    #[test]
    fn step_counts_per_builder() {
        let expect = [
            ("cdf53", [2, 4, 1, 1, 2]),
            ("cdf97", [2, 8, 1, 2, 4]),
            ("dd137", [2, 4, 1, 1, 2]),
        ];
        for (name, counts) in expect {
            let w = get_wavelet(name).unwrap();
            for (kind, n) in SchemeKind::ALL.into_iter().zip(counts) {
                assert_eq!(build(kind, &w).unwrap().count_steps(), n, "{name} {kind}");
            }
        }
    }

    #[test]
    fn separable_lifting_operation_counts() {
        for (name, ops) in [("cdf53", 16), ("cdf97", 32), ("dd137", 32)] {
            let s = build_separable_lifting(&get_wavelet(name).unwrap()).unwrap();
            assert_eq!(s.count_operations(), ops, "{name}");
        }
    }

    #[test]
    fn optimized_nonseparable_lifting_counts() {
        let base = build_nonseparable_lifting(&cdf53()).unwrap();
        assert_eq!(base.count_operations(), 24);
        let opt = optimize_constant_split(&base, &cdf53()).unwrap();
        assert_eq!(opt.count_steps(), 2);
        assert_eq!(opt.count_operations(), 18);
        for (name, ops) in [("cdf97", 36), ("dd137", 50)] {
            let w = get_wavelet(name).unwrap();
            let opt = build_variant(SchemeKind::NonSeparableLifting, &w, true).unwrap();
            assert_eq!(opt.count_operations(), ops, "{name}");
        }
    }

    #[test]
    fn optimizer_fused_group_reproduces_original_step() {
        for name in ["cdf53", "cdf97", "dd137"] {
            let w = get_wavelet(name).unwrap();
            for kind in SchemeKind::ALL {
                let base = build(kind, &w).unwrap();
                let opt = optimize_constant_split(&base, &w).unwrap();
                assert_eq!(opt.count_steps(), base.count_steps());
                for (a, b) in base.steps().iter().zip(opt.steps()) {
                    assert_eq!(a.product(), b.product(), "{name} {kind}");
                }
            }
        }
    }

    #[test]
    fn optimizer_leaves_separable_lifting_alone() {
        let base = build_separable_lifting(&cdf53()).unwrap();
        let opt = optimize_constant_split(&base, &cdf53()).unwrap();
        assert_eq!(opt.steps(), base.steps());
        assert!(opt.is_optimized());
    }

    #[test]
    fn optimizer_without_constant_terms_changes_nothing() {
        let w = WaveletSpec::new(
            "shifted",
            vec![LiftingPair {
                predict: LaurentPoly::horizontal_ratios(&[(1, -1, 1)]),
                update: LaurentPoly::horizontal_ratios(&[(-1, 1, 2)]),
            }],
            ratio(1, 1),
        )
        .unwrap();
        let base = build_nonseparable_lifting(&w).unwrap();
        let opt = optimize_constant_split(&base, &w).unwrap();
        for (a, b) in base.steps().iter().zip(opt.steps()) {
            assert_eq!(b.factors().len(), 1);
            assert_eq!(a.factors()[0].matrix, b.factors()[0].matrix);
        }
        assert_eq!(opt.count_operations(), base.count_operations());
    }

    #[test]
    fn optimizer_rejects_foreign_schemes() {
        let s = build_nonseparable_lifting(&cdf53()).unwrap();
        let other = get_wavelet("dd137").unwrap();
        assert!(matches!(
            optimize_constant_split(&s, &other),
            Err(Error::NotDerived { .. })
        ));
        let mut tampered = s.clone();
        tampered.steps.pop();
        assert!(matches!(
            optimize_constant_split(&tampered, &cdf53()),
            Err(Error::NotDerived { .. })
        ));
    }

    #[test]
    fn optimizer_is_idempotent() {
        let w = get_wavelet("cdf97").unwrap();
        let once = build_variant(SchemeKind::NonSeparablePolyconvolution, &w, true).unwrap();
        assert_eq!(optimize_constant_split(&once, &w).unwrap(), once);
    }

    #[test]
    fn identity_wavelet_schemes_are_identity() {
        let w = identity_wavelet();
        for kind in SchemeKind::ALL {
            let s = build(kind, &w).unwrap();
            assert_eq!(s.count_operations(), 0, "{kind}");
            assert!(s.steps().iter().all(|g| g.product().is_identity()));
        }
        assert_eq!(build_separable_convolution(&w).unwrap().count_steps(), 2);
    }

    #[test]
    fn cdf97_separable_convolution_row_lengths() {
        let w = get_wavelet("cdf97").unwrap();
        let s = build_separable_convolution(&w).unwrap();
        let nh = &s.steps()[0].factors()[0].matrix;
        let widths: Vec<_> = (0..4).map(|r| nh.row_support(r).unwrap().0).collect();
        assert_eq!(widths, vec![9, 7, 9, 7]);
    }

    #[test]
    fn inverse_cancels_forward_symbolically() {
        for name in ["cdf53", "cdf97", "dd137"] {
            let w = get_wavelet(name).unwrap();
            let fwd = build_separable_lifting(&w).unwrap().transform_matrix();
            let inv = build_inverse_lifting(&w).unwrap().transform_matrix();
            assert!(inv.mat_mul(&fwd).unwrap().is_identity(), "{name}");
        }
    }

    #[test]
    fn dump_lists_every_factor() {
        let s = build_variant(SchemeKind::NonSeparableLifting, &cdf53(), true).unwrap();
        let text = s.dump();
        assert!(text.starts_with("scheme: non-separable lifting (optimized)\n"));
        assert!(text.contains("steps: 2\n"));
        assert!(text.contains("operations: 18\n"));
        assert_eq!(text.matches("  factor ").count(), 6);
    }

    #[test]
    fn scheme_ids_round_trip() {
        for kind in SchemeKind::ALL {
            assert_eq!(SchemeKind::from_id(kind.id()).unwrap(), kind);
        }
        assert!(SchemeKind::from_id("nope").is_err());
    }
}
