//! Raw subband files.
//!
//! Each polyphase component `<label>` is written as `<label>.raw`, row-major
//! little-endian IEEE floats, next to a text sidecar `<label>.txt`:
//!
//! ```text
//! width 128
//! height 128
//! precision f32
//! component ee
//! ```

use std::path::{Path, PathBuf};

use crate::error::{io_err, Error, Result};
use crate::image::{Extension, ImagePlane, PolyphaseImage, Precision, Samples, COMPONENT_LABELS};

fn paths(dir: &Path, label: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{label}.raw")), dir.join(format!("{label}.txt")))
}

pub fn write_subband(plane: &ImagePlane, label: &str, dir: &Path) -> Result<()> {
    let (raw, side) = paths(dir, label);
    let bytes: Vec<u8> = match plane.samples() {
        Samples::F32(v) => v.iter().flat_map(|s| s.to_le_bytes()).collect(),
        Samples::F64(v) => v.iter().flat_map(|s| s.to_le_bytes()).collect(),
    };
    std::fs::write(&raw, bytes).map_err(io_err(&raw))?;
    let header = format!(
        "width {}\nheight {}\nprecision {}\ncomponent {label}\n",
        plane.width(),
        plane.height(),
        plane.precision()
    );
    std::fs::write(&side, header).map_err(io_err(&side))
}

/// Writes all four components into `dir`, creating it if needed. Returns the
/// raw file paths in component order.
pub fn write_subbands(p: &PolyphaseImage, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut out = Vec::with_capacity(4);
    for (plane, label) in p.components().iter().zip(COMPONENT_LABELS) {
        write_subband(plane, label, dir)?;
        out.push(paths(dir, label).0);
    }
    Ok(out)
}

pub fn read_subband(dir: &Path, label: &str) -> Result<ImagePlane> {
    let (raw, side) = paths(dir, label);
    let text = std::fs::read_to_string(&side).map_err(io_err(&side))?;
    let bad = |reason: String| Error::SubbandHeader {
        path: side.clone(),
        reason,
    };
    let (mut width, mut height, mut precision, mut component) = (None, None, None, None);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (key, value) = line
            .trim()
            .split_once(' ')
            .ok_or_else(|| bad(format!("malformed line `{line}`")))?;
        let value = value.trim();
        let dim = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("bad {key} `{v}`")));
        match key {
            "width" => width = Some(dim(value)?),
            "height" => height = Some(dim(value)?),
            "precision" => precision = Some(Precision::parse(value).map_err(|e| bad(e.to_string()))?),
            "component" => component = Some(value.to_string()),
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }
    let (Some(width), Some(height), Some(precision), Some(component)) = (width, height, precision, component) else {
        return Err(bad("missing width, height, precision or component".into()));
    };
    if component != label {
        return Err(bad(format!("component is `{component}`, expected `{label}`")));
    }
    let bytes = std::fs::read(&raw).map_err(io_err(&raw))?;
    let expected = width * height * precision.bytes_per_sample();
    if bytes.len() != expected {
        return Err(bad(format!(
            "{} holds {} bytes, header implies {expected}",
            raw.display(),
            bytes.len()
        )));
    }
    let samples = match precision {
        Precision::F32 => Samples::F32(
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect(),
        ),
        Precision::F64 => Samples::F64(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        ),
    };
    ImagePlane::new(width, height, samples)
}

pub fn read_subbands(dir: &Path, extension: Extension) -> Result<PolyphaseImage> {
    let planes: Vec<ImagePlane> = COMPONENT_LABELS
        .iter()
        .map(|l| read_subband(dir, l))
        .collect::<Result<_>>()?;
    let [a, b, c, d]: [ImagePlane; 4] = planes.try_into().expect("four labels");
    PolyphaseImage::new([a, b, c, d], extension)
}
