//! Sample planes, polyphase components and boundary extension.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            Precision::F32 => 4,
            Precision::F64 => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "f32" | "32" | "single" => Ok(Precision::F32),
            "f64" | "64" | "double" => Ok(Precision::F64),
            _ => Err(Error::InvalidArgument(format!(
                "unknown precision `{s}`; expected f32 or f64"
            ))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Boundary handling for reads outside a component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extension {
    Periodic,
    /// Whole-sample reflection: the edge sample is not repeated.
    Symmetric,
}

impl Extension {
    pub fn name(self) -> &'static str {
        match self {
            Extension::Periodic => "periodic",
            Extension::Symmetric => "symmetric",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" | "per" => Ok(Extension::Periodic),
            "symmetric" | "sym" => Ok(Extension::Symmetric),
            _ => Err(Error::InvalidArgument(format!(
                "unknown extension `{s}`; expected periodic or symmetric"
            ))),
        }
    }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps any integer index into `[0, n)`.
pub fn extend_index(i: i64, n: usize, mode: Extension) -> usize {
    assert!(n >= 1, "extension of an empty axis");
    let n = n as i64;
    match mode {
        Extension::Periodic => i.rem_euclid(n) as usize,
        Extension::Symmetric => {
            if n == 1 {
                return 0;
            }
            let period = 2 * n - 2;
            let r = i.rem_euclid(period);
            (if r < n { r } else { period - r }) as usize
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Samples {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::F32(v) => v.len(),
            Samples::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precision(&self) -> Precision {
        match self {
            Samples::F32(_) => Precision::F32,
            Samples::F64(_) => Precision::F64,
        }
    }
}

/// Row-major plane of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    samples: Samples,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, samples: Samples) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::SizeMismatch(format!(
                "{width}x{height} plane given {} samples",
                samples.len()
            )));
        }
        Ok(Self { width, height, samples })
    }

    pub fn from_f64(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        Self::new(width, height, Samples::F64(samples))
    }

    pub fn from_f32(width: usize, height: usize, samples: Vec<f32>) -> Result<Self> {
        Self::new(width, height, Samples::F32(samples))
    }

    pub fn zeros(width: usize, height: usize, precision: Precision) -> Self {
        let samples = match precision {
            Precision::F32 => Samples::F32(vec![0.0; width * height]),
            Precision::F64 => Samples::F64(vec![0.0; width * height]),
        };
        Self { width, height, samples }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn precision(&self) -> Precision {
        self.samples.precision()
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut Samples {
        &mut self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        let i = y * self.width + x;
        match &self.samples {
            Samples::F32(v) => v[i] as f64,
            Samples::F64(v) => v[i],
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.samples {
            Samples::F32(v) => v.iter().map(|&s| s as f64).collect(),
            Samples::F64(v) => v.clone(),
        }
    }

    pub fn to_precision(&self, precision: Precision) -> Self {
        if precision == self.precision() {
            return self.clone();
        }
        let samples = match (&self.samples, precision) {
            (Samples::F64(v), Precision::F32) => Samples::F32(v.iter().map(|&s| s as f32).collect()),
            (Samples::F32(v), Precision::F64) => Samples::F64(v.iter().map(|&s| s as f64).collect()),
            _ => unreachable!(),
        };
        Self {
            width: self.width,
            height: self.height,
            samples,
        }
    }

    pub(crate) fn check_even(&self) -> Result<()> {
        for (axis, len) in [("width", self.width), ("height", self.height)] {
            if len == 0 || len % 2 == 1 {
                return Err(Error::OddDimension { axis, len });
            }
        }
        Ok(())
    }
}

pub const COMPONENT_LABELS: [&str; 4] = ["ee", "oe", "eo", "oo"];

/// The four polyphase components `(ee, oe, eo, oo)`, indexed by
/// (column parity, row parity).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyphaseImage {
    components: [ImagePlane; 4],
    extension: Extension,
}

impl PolyphaseImage {
    pub fn new(components: [ImagePlane; 4], extension: Extension) -> Result<Self> {
        let (w, h, p) = (components[0].width, components[0].height, components[0].precision());
        for (label, c) in COMPONENT_LABELS.iter().zip(&components) {
            if c.width != w || c.height != h {
                return Err(Error::SizeMismatch(format!(
                    "component {label} is {}x{}, expected {w}x{h}",
                    c.width, c.height
                )));
            }
            if c.precision() != p {
                return Err(Error::SizeMismatch(format!(
                    "component {label} has precision {}",
                    c.precision()
                )));
            }
        }
        Ok(Self { components, extension })
    }

    pub fn components(&self) -> &[ImagePlane; 4] {
        &self.components
    }

    pub fn into_components(self) -> [ImagePlane; 4] {
        self.components
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    /// Component width and height.
    pub fn component_size(&self) -> (usize, usize) {
        (self.components[0].width, self.components[0].height)
    }

    pub fn precision(&self) -> Precision {
        self.components[0].precision()
    }

    pub fn with_extension(mut self, extension: Extension) -> Self {
        self.extension = extension;
        self
    }
}

fn split_typed<T: Copy>(src: &[T], width: usize, height: usize) -> [Vec<T>; 4] {
    let (cw, ch) = (width / 2, height / 2);
    let mut out: [Vec<T>; 4] = std::array::from_fn(|_| Vec::with_capacity(cw * ch));
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        let base = (y & 1) * 2;
        for (x, &s) in row.iter().enumerate() {
            out[base + (x & 1)].push(s);
        }
    }
    out
}

fn merge_typed<T: Copy + Default>(comps: [&[T]; 4], cw: usize, ch: usize) -> Vec<T> {
    let width = 2 * cw;
    let mut out = vec![T::default(); width * 2 * ch];
    for (c, comp) in comps.iter().enumerate() {
        let (px, py) = (c & 1, c >> 1);
        for y in 0..ch {
            for x in 0..cw {
                out[(2 * y + py) * width + 2 * x + px] = comp[y * cw + x];
            }
        }
    }
    out
}

pub fn polyphase_split(img: &ImagePlane, extension: Extension) -> Result<PolyphaseImage> {
    img.check_even()?;
    let (cw, ch) = (img.width / 2, img.height / 2);
    let components = match &img.samples {
        Samples::F32(v) => split_typed(v, img.width, img.height).map(|c| ImagePlane {
            width: cw,
            height: ch,
            samples: Samples::F32(c),
        }),
        Samples::F64(v) => split_typed(v, img.width, img.height).map(|c| ImagePlane {
            width: cw,
            height: ch,
            samples: Samples::F64(c),
        }),
    };
    PolyphaseImage::new(components, extension)
}

pub fn polyphase_merge(p: &PolyphaseImage) -> Result<ImagePlane> {
    let (cw, ch) = p.component_size();
    let c = &p.components;
    let samples = match p.precision() {
        Precision::F32 => {
            let parts: Vec<&[f32]> = c
                .iter()
                .map(|pl| match &pl.samples {
                    Samples::F32(v) => Ok(v.as_slice()),
                    _ => Err(Error::SizeMismatch("mixed precision components".into())),
                })
                .collect::<Result<_>>()?;
            Samples::F32(merge_typed([parts[0], parts[1], parts[2], parts[3]], cw, ch))
        }
        Precision::F64 => {
            let parts: Vec<&[f64]> = c
                .iter()
                .map(|pl| match &pl.samples {
                    Samples::F64(v) => Ok(v.as_slice()),
                    _ => Err(Error::SizeMismatch("mixed precision components".into())),
                })
                .collect::<Result<_>>()?;
            Samples::F64(merge_typed([parts[0], parts[1], parts[2], parts[3]], cw, ch))
        }
    };
    ImagePlane::new(2 * cw, 2 * ch, samples)
}
