//! Executes schemes on polyphase images.
//!
//! Each fused group is composed into a single 4x4 matrix and lowered to a
//! stencil kernel. Kernels run one after another with a full barrier in
//! between; a kernel reads the previous buffer and writes the other one, so
//! no kernel ever reads its own output. Work is split into horizontal bands of
//! component rows, one band per worker.
//!
//! A term keyed `(k_m, k_n)` in entry `(r, c)` adds `g * in_c[x + k_m, y + k_n]`
//! to output `r` at `(x, y)`, with out-of-range indices folded back by the
//! plan's [`Extension`]. Terms are summed in a fixed order per sample, so the
//! result does not depend on the number of workers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Barrier, RwLock};

use num_traits::{Float, One};

use crate::error::{Error, Result};
use crate::image::{extend_index, Extension, ImagePlane, PolyphaseImage, Precision, Samples};
use crate::matrix::{scaling_2d, PolyMatrix};
use crate::scheme::{build_inverse_lifting, Scheme};
use crate::wavelet::WaveletSpec;

/// One multiply-accumulate of a stencil.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap<T> {
    pub source: usize,
    pub dx: i32,
    pub dy: i32,
    pub coeff: T,
}

/// Taps of each of the four outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    pub outputs: [Vec<Tap<T>>; 4],
}

impl<T: Float> Kernel<T> {
    fn lower(m: &PolyMatrix) -> Self {
        let outputs = std::array::from_fn(|r| {
            let mut taps = Vec::new();
            for c in 0..4 {
                for ((dx, dy), g) in m.get(r, c).to_f64_terms() {
                    taps.push(Tap {
                        source: c,
                        dx,
                        dy,
                        coeff: T::from(g).expect("finite coefficient"),
                    });
                }
            }
            taps
        });
        Self { outputs }
    }

    pub fn tap_count(&self) -> usize {
        self.outputs.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kernels {
    F32(Vec<Kernel<f32>>),
    F64(Vec<Kernel<f64>>),
}

#[derive(Debug)]
pub struct ExecPlan {
    label: String,
    precision: Precision,
    extension: Extension,
    worker_count: usize,
    composed: Vec<PolyMatrix>,
    kernels: Kernels,
    barrier_counter: AtomicUsize,
}

/// Lowers `scheme` to one kernel per step. The scheme's scaling is folded
/// into the last kernel.
pub fn compile(scheme: &Scheme, precision: Precision, extension: Extension, worker_count: usize) -> ExecPlan {
    let mut composed: Vec<PolyMatrix> = scheme.steps().iter().map(|g| g.product()).collect();
    if !scheme.scaling().is_one() {
        if let Some(last) = composed.last_mut() {
            *last = scaling_2d(scheme.scaling()).mat_mul(last).expect("4x4");
        }
    }
    let kernels = match precision {
        Precision::F32 => Kernels::F32(composed.iter().map(Kernel::lower).collect()),
        Precision::F64 => Kernels::F64(composed.iter().map(Kernel::lower).collect()),
    };
    ExecPlan {
        label: scheme.label(),
        precision,
        extension,
        worker_count: worker_count.max(1),
        composed,
        kernels,
        barrier_counter: AtomicUsize::new(0),
    }
}

impl ExecPlan {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn worker_count(&self) -> usize {
        self.worker_count
    }

    pub fn kernel_count(&self) -> usize {
        self.composed.len()
    }

    /// Symbolic matrix each kernel evaluates.
    pub fn composed(&self) -> &[PolyMatrix] {
        &self.composed
    }

    /// Barriers crossed by the most recent [`ExecPlan::run`]: one between
    /// each pair of consecutive kernels.
    pub fn barrier_counter(&self) -> usize {
        self.barrier_counter.load(Ordering::Acquire)
    }

    pub fn taps_per_kernel(&self) -> Vec<usize> {
        match &self.kernels {
            Kernels::F32(k) => k.iter().map(Kernel::tap_count).collect(),
            Kernels::F64(k) => k.iter().map(Kernel::tap_count).collect(),
        }
    }

    /// Runs every kernel on `input`. The output carries the plan's extension.
    pub fn run(&self, input: &PolyphaseImage) -> Result<PolyphaseImage> {
        if input.precision() != self.precision {
            return Err(Error::PrecisionMismatch {
                plan: self.precision.name(),
                data: input.precision().name(),
            });
        }
        let (cw, ch) = input.component_size();
        if cw == 0 || ch == 0 {
            return Err(Error::EmptyImage);
        }
        self.barrier_counter.store(0, Ordering::Release);
        let comps = input.components();
        let out = match &self.kernels {
            Kernels::F32(kernels) => {
                let src = comps.each_ref().map(|c| match c.samples() {
                    Samples::F32(v) => v.as_slice(),
                    Samples::F64(_) => unreachable!("checked precision"),
                });
                let out = self.execute(kernels, src, cw, ch);
                out.map(|v| ImagePlane::from_f32(cw, ch, v).expect("sized"))
            }
            Kernels::F64(kernels) => {
                let src = comps.each_ref().map(|c| match c.samples() {
                    Samples::F64(v) => v.as_slice(),
                    Samples::F32(_) => unreachable!("checked precision"),
                });
                let out = self.execute(kernels, src, cw, ch);
                out.map(|v| ImagePlane::from_f64(cw, ch, v).expect("sized"))
            }
        };
        PolyphaseImage::new(out, self.extension)
    }

    fn execute<T: Float + Default + Send + Sync>(
        &self,
        kernels: &[Kernel<T>],
        input: [&[T]; 4],
        cw: usize,
        ch: usize,
    ) -> [Vec<T>; 4] {
        if kernels.is_empty() {
            return input.map(<[T]>::to_vec);
        }
        let workers = self.worker_count.min(ch);
        let band_rows = ch.div_ceil(workers);
        let bands = Banded::new(input, cw, ch, band_rows);
        let scratch = Banded::zeros(cw, ch, band_rows);
        let buffers = [&bands, &scratch];
        let barrier = Barrier::new(workers);
        let work = |worker: usize| {
            for (k, kernel) in kernels.iter().enumerate() {
                let src = buffers[k % 2].read_all();
                let rows = src.row_lookup();
                let mut dst = buffers[(k + 1) % 2].write_band(worker);
                let y0 = worker * band_rows;
                apply_kernel(kernel, &rows, &mut dst, y0, cw, ch, self.extension);
                drop(dst);
                drop(rows);
                drop(src);
                if k + 1 < kernels.len() && barrier.wait().is_leader() {
                    self.barrier_counter.fetch_add(1, Ordering::AcqRel);
                }
            }
        };
        if workers == 1 {
            work(0);
        } else {
            std::thread::scope(|scope| {
                for worker in 1..workers {
                    let work = &work;
                    scope.spawn(move || work(worker));
                }
                work(0);
            });
        }
        buffers[kernels.len() % 2].gather()
    }
}

/// Four components stored as row bands, each band behind its own lock so
/// workers can write their bands while nobody reads them.
struct Banded<T> {
    comps: [Vec<RwLock<Vec<T>>>; 4],
    cw: usize,
    ch: usize,
    band_rows: usize,
}

struct ReadAll<'a, T> {
    guards: [Vec<std::sync::RwLockReadGuard<'a, Vec<T>>>; 4],
    cw: usize,
    band_rows: usize,
}

/// Row slices of all four components, indexed `[component][row]`.
struct Rows<'a, T> {
    rows: [Vec<&'a [T]>; 4],
}

impl<T: Copy + Default> Banded<T> {
    fn new(src: [&[T]; 4], cw: usize, ch: usize, band_rows: usize) -> Self {
        let comps = src.map(|c| {
            c.chunks(band_rows * cw)
                .map(|chunk| RwLock::new(chunk.to_vec()))
                .collect()
        });
        Self {
            comps,
            cw,
            ch,
            band_rows,
        }
    }

    fn zeros(cw: usize, ch: usize, band_rows: usize) -> Self {
        let comps = std::array::from_fn(|_| {
            (0..ch.div_ceil(band_rows))
                .map(|b| {
                    let rows = band_rows.min(ch - b * band_rows);
                    RwLock::new(vec![T::default(); rows * cw])
                })
                .collect()
        });
        Self {
            comps,
            cw,
            ch,
            band_rows,
        }
    }

    fn read_all(&self) -> ReadAll<'_, T> {
        ReadAll {
            guards: self
                .comps
                .each_ref()
                .map(|bands| bands.iter().map(|b| b.read().expect("worker panicked")).collect()),
            cw: self.cw,
            band_rows: self.band_rows,
        }
    }

    /// Write guards for band `band` of every component; empty when the band
    /// lies past the last row.
    fn write_band(&self, band: usize) -> Vec<std::sync::RwLockWriteGuard<'_, Vec<T>>> {
        if band >= self.comps[0].len() {
            return Vec::new();
        }
        self.comps
            .iter()
            .map(|bands| bands[band].write().expect("worker panicked"))
            .collect()
    }

    fn gather(&self) -> [Vec<T>; 4] {
        self.comps.each_ref().map(|bands| {
            let mut out = Vec::with_capacity(self.cw * self.ch);
            for b in bands {
                out.extend_from_slice(&b.read().expect("worker panicked"));
            }
            out
        })
    }
}

impl<'a, T> ReadAll<'a, T> {
    fn row_lookup(&self) -> Rows<'_, T> {
        let cw = self.cw;
        let rows = self
            .guards
            .each_ref()
            .map(|bands| bands.iter().flat_map(|b| b.chunks(cw).take(self.band_rows)).collect());
        Rows { rows }
    }
}

fn apply_kernel<T: Float>(
    kernel: &Kernel<T>,
    src: &Rows<'_, T>,
    dst: &mut [std::sync::RwLockWriteGuard<'_, Vec<T>>],
    y0: usize,
    cw: usize,
    ch: usize,
    ext: Extension,
) {
    if dst.is_empty() {
        return;
    }
    for (r, out) in dst.iter_mut().enumerate() {
        let taps = &kernel.outputs[r];
        for (local_y, out_row) in out.chunks_mut(cw).enumerate() {
            let y = (y0 + local_y) as i64;
            out_row.fill(T::zero());
            for tap in taps {
                let sy = extend_index(y + tap.dy as i64, ch, ext);
                let in_row = src.rows[tap.source][sy];
                accumulate_row(out_row, in_row, tap.dx, tap.coeff, ext);
            }
        }
    }
}

/// `out[x] += g * in[ext(x + dx)]` over the whole row.
fn accumulate_row<T: Float>(out: &mut [T], input: &[T], dx: i32, g: T, ext: Extension) {
    let n = out.len() as i64;
    let dx = dx as i64;
    let lo = (-dx).clamp(0, n) as usize;
    let hi = (n - dx).clamp(0, n) as usize;
    let folded = |x: usize| input[extend_index(x as i64 + dx, n as usize, ext)];
    if lo >= hi {
        for (x, o) in out.iter_mut().enumerate() {
            *o = *o + g * folded(x);
        }
        return;
    }
    for x in (0..lo).chain(hi..out.len()) {
        out[x] = out[x] + g * folded(x);
    }
    let shifted = &input[(lo as i64 + dx) as usize..(hi as i64 + dx) as usize];
    for (o, &s) in out[lo..hi].iter_mut().zip(shifted) {
        *o = *o + g * s;
    }
}

/// Exact inverse of the separable lifting transform of `w`, scaling included,
/// using the extension carried by `p`.
pub fn inverse_lifting(w: &WaveletSpec, p: &PolyphaseImage) -> Result<PolyphaseImage> {
    let inverse = build_inverse_lifting(w)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    compile(&inverse, p.precision(), p.extension(), workers).run(p)
}

/// Largest absolute sample difference divided by the largest magnitude in
/// either image. Zero when both are zero.
pub fn relative_deviation(a: &PolyphaseImage, b: &PolyphaseImage) -> f64 {
    relative_deviation_within(a, b, 0)
}

/// [`relative_deviation`] restricted to component samples at least `margin`
/// samples away from every edge.
pub fn relative_deviation_within(a: &PolyphaseImage, b: &PolyphaseImage, margin: usize) -> f64 {
    let (cw, ch) = a.component_size();
    assert_eq!((cw, ch), b.component_size(), "images differ in size");
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (ca, cb) in a.components().iter().zip(b.components()) {
        for y in margin..ch.saturating_sub(margin) {
            for x in margin..cw.saturating_sub(margin) {
                let (va, vb) = (ca.get(x, y), cb.get(x, y));
                diff = diff.max((va - vb).abs());
                scale = scale.max(va.abs()).max(vb.abs());
            }
        }
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{polyphase_merge, polyphase_split};
    use crate::rng::random_image;
    use crate::scheme::{build, build_variant, SchemeKind};
    use crate::wavelet::{get_wavelet, identity_wavelet};

    fn image(size: usize, seed: u64, ext: Extension) -> PolyphaseImage {
        polyphase_split(&random_image(size, size, seed, Precision::F64), ext).unwrap()
    }

    #[test]
    fn identity_scheme_is_a_copy() {
        let w = identity_wavelet();
        let input = image(16, 1, Extension::Periodic);
        for kind in SchemeKind::ALL {
            let plan = compile(&build(kind, &w).unwrap(), Precision::F64, Extension::Periodic, 3);
            assert_eq!(plan.run(&input).unwrap(), input);
        }
    }

    #[test]
    fn constant_image_has_empty_high_bands() {
        let w = get_wavelet("cdf53").unwrap();
        let img = ImagePlane::from_f64(16, 16, vec![0.75; 256]).unwrap();
        let input = polyphase_split(&img, Extension::Symmetric).unwrap();
        let plan = compile(
            &build(SchemeKind::SeparableLifting, &w).unwrap(),
            Precision::F64,
            Extension::Symmetric,
            1,
        );
        let out = plan.run(&input).unwrap();
        let c = out.components();
        for band in &c[1..] {
            assert!(band.to_f64_vec().iter().all(|&v| v == 0.0));
        }
        assert!(c[0].to_f64_vec().iter().all(|&v| (v - 0.75).abs() < 1e-15));
    }

    #[test]
    fn kernels_match_steps() {
        let w = get_wavelet("cdf97").unwrap();
        let s = build(SchemeKind::SeparableLifting, &w).unwrap();
        assert_eq!(compile(&s, Precision::F32, Extension::Periodic, 1).kernel_count(), 8);
        let s = build(SchemeKind::NonSeparableConvolution, &w).unwrap();
        assert_eq!(compile(&s, Precision::F32, Extension::Periodic, 1).kernel_count(), 1);
    }

    #[test]
    fn optimized_kernels_equal_spatial_steps() {
        let w = get_wavelet("cdf53").unwrap();
        let opt = build_variant(SchemeKind::NonSeparableLifting, &w, true).unwrap();
        let plan = compile(&opt, Precision::F64, Extension::Periodic, 2);
        let p = &w.pairs()[0];
        assert_eq!(plan.composed()[0], crate::matrix::spatial_predict(&p.predict).unwrap());
        assert_eq!(plan.composed()[1], crate::matrix::spatial_update(&p.update).unwrap());
    }

    #[test]
    fn precision_mismatch_and_empty_input() {
        let w = get_wavelet("cdf53").unwrap();
        let plan = compile(
            &build(SchemeKind::SeparableLifting, &w).unwrap(),
            Precision::F32,
            Extension::Periodic,
            1,
        );
        let err = plan.run(&image(8, 1, Extension::Periodic)).unwrap_err();
        assert!(matches!(err, Error::PrecisionMismatch { .. }));
        let empty = PolyphaseImage::new(
            std::array::from_fn(|_| ImagePlane::zeros(0, 0, Precision::F32)),
            Extension::Periodic,
        )
        .unwrap();
        assert!(matches!(plan.run(&empty), Err(Error::EmptyImage)));
    }

    #[test]
    fn worker_counts_are_bit_identical() {
        let w = get_wavelet("cdf97").unwrap();
        let input = image(40, 9, Extension::Symmetric);
        for kind in SchemeKind::ALL {
            let s = build(kind, &w).unwrap();
            let reference = compile(&s, Precision::F64, Extension::Symmetric, 1)
                .run(&input)
                .unwrap();
            for workers in [2, 3, 7, 40, 64] {
                let plan = compile(&s, Precision::F64, Extension::Symmetric, workers);
                assert_eq!(plan.run(&input).unwrap(), reference, "{kind} x{workers}");
                assert_eq!(plan.barrier_counter(), s.count_steps() - 1);
            }
        }
    }

    #[test]
    fn impulse_round_trip_is_exact() {
        let w = get_wavelet("cdf53").unwrap();
        let mut data = vec![0.0; 64];
        data[27] = 1.0;
        let img = ImagePlane::from_f64(8, 8, data).unwrap();
        let input = polyphase_split(&img, Extension::Periodic).unwrap();
        let fwd = compile(
            &build(SchemeKind::SeparableLifting, &w).unwrap(),
            Precision::F64,
            Extension::Periodic,
            1,
        )
        .run(&input)
        .unwrap();
        let back = polyphase_merge(&inverse_lifting(&w, &fwd).unwrap()).unwrap();
        for (a, b) in back.to_f64_vec().iter().zip(img.to_f64_vec()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_image_inverts_to_zero() {
        let w = get_wavelet("cdf97").unwrap();
        let zero = polyphase_split(&ImagePlane::zeros(8, 8, Precision::F64), Extension::Symmetric).unwrap();
        let back = inverse_lifting(&w, &zero).unwrap();
        assert!(back
            .components()
            .iter()
            .all(|c| c.to_f64_vec().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn row_accumulation_handles_every_shift() {
        let input: Vec<f64> = (0..5).map(|i| i as f64).collect();
        for ext in [Extension::Periodic, Extension::Symmetric] {
            for dx in -12..12 {
                let mut out = vec![0.0; 5];
                accumulate_row(&mut out, &input, dx, 2.0, ext);
                for (x, &o) in out.iter().enumerate() {
                    let expect = 2.0 * input[extend_index(x as i64 + dx as i64, 5, ext)];
                    assert_eq!(o, expect, "{ext} dx={dx} x={x}");
                }
            }
        }
    }
}
