//! Netpbm graymap (P2/P5) input, normalized to `[0, 1]`.

use std::path::Path;

use crate::error::{io_err, Error, Result};
use crate::image::ImagePlane;

pub fn read_pgm(path: &Path) -> Result<ImagePlane> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_pgm(&bytes)
}

struct Header {
    ascii: bool,
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 {
        return Err(Error::PgmHeader("file too short".into()));
    }
    let ascii = match &bytes[..2] {
        b"P2" => true,
        b"P5" => false,
        other => return Err(Error::PgmMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for (i, name) in ["width", "height", "maxval"].iter().enumerate() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::PgmHeader(format!("missing {name}")));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits");
        fields[i] = text
            .parse()
            .map_err(|_| Error::PgmHeader(format!("{name} `{text}` out of range")))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::PgmHeader("expected whitespace after maxval".into()));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::PgmHeader(format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::PgmHeader(format!("maxval {maxval} outside 1..=65535")));
    }
    Ok(Header {
        ascii,
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_start: pos + 1,
    })
}

pub fn decode_pgm(bytes: &[u8]) -> Result<ImagePlane> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let scale = 1.0 / h.maxval as f64;
    let body = &bytes[h.data_start..];
    let mut samples = Vec::with_capacity(n);
    if h.ascii {
        for token in std::str::from_utf8(body)
            .map_err(|_| Error::PgmHeader("non-text data in P2 file".into()))?
            .split_ascii_whitespace()
            .take(n)
        {
            let v: u32 = token
                .parse()
                .map_err(|_| Error::PgmHeader(format!("bad sample `{token}`")))?;
            if v > h.maxval {
                return Err(Error::PgmHeader(format!("sample {v} exceeds maxval {}", h.maxval)));
            }
            samples.push(v as f64 * scale);
        }
    } else if h.maxval < 256 {
        samples.extend(body.iter().take(n).map(|&b| b as f64 * scale));
    } else {
        samples.extend(
            body.chunks_exact(2)
                .take(n)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale),
        );
    }
    if samples.len() < n {
        return Err(Error::PgmTruncated {
            expected: n,
            found: samples.len(),
        });
    }
    ImagePlane::from_f64(h.width, h.height, samples)
}

/// Encodes samples in `[0, 1]` as binary PGM with the given maxval; values
/// outside the range are clamped.
pub fn encode_pgm(img: &ImagePlane, maxval: u16) -> Vec<u8> {
    let maxval = maxval.max(1);
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    for v in img.to_f64_vec() {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u16;
        if maxval < 256 {
            out.push(q as u8);
        } else {
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    out
}

pub fn write_pgm(img: &ImagePlane, maxval: u16, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pgm(img, maxval)).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_eight_bit() {
        let img = decode_pgm(b"P5\n2 2\n255\n\x00\xff\x00\xff").unwrap();
        assert_eq!(img.to_f64_vec(), vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!((img.width(), img.height()), (2, 2));
    }

    #[test]
    fn ascii_matches_binary() {
        let a = decode_pgm(b"P2\n# comment\n2 2\n255\n0 255\n0 255\n").unwrap();
        let b = decode_pgm(b"P5\n2 2\n255\n\x00\xff\x00\xff").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sixteen_bit_big_endian() {
        let img = decode_pgm(b"P5 2 1 65535\n\x00\x01\xff\xff").unwrap();
        assert_eq!(img.to_f64_vec(), vec![1.0 / 65535.0, 1.0]);
        let img = decode_pgm(b"P5 1 1 1000\n\x01\xf4").unwrap();
        assert_eq!(img.to_f64_vec(), vec![0.5]);
    }

    #[test]
    fn errors_are_distinct() {
        assert!(matches!(decode_pgm(b"P6\n1 1\n255\n\0"), Err(Error::PgmMagic(_))));
        assert!(matches!(decode_pgm(b"P5\n2\n"), Err(Error::PgmHeader(_))));
        assert!(matches!(decode_pgm(b"P5\n1 1\n70000\n\0"), Err(Error::PgmHeader(_))));
        assert!(matches!(
            decode_pgm(b"P5\n2 2\n255\n\0\0\0"),
            Err(Error::PgmTruncated { expected: 4, found: 3 })
        ));
        assert!(matches!(
            decode_pgm(b"P2\n2 1\n255\n7"),
            Err(Error::PgmTruncated { .. })
        ));
        assert!(matches!(decode_pgm(b"P2\n1 1\n9\n10"), Err(Error::PgmHeader(_))));
    }

    #[test]
    fn encode_decode_round_trip() {
        let img = decode_pgm(b"P2\n3 1\n65535\n0 12345 65535\n").unwrap();
        assert_eq!(decode_pgm(&encode_pgm(&img, 65535)).unwrap(), img);
        let img = decode_pgm(b"P2\n3 1\n255\n0 17 255\n").unwrap();
        assert_eq!(decode_pgm(&encode_pgm(&img, 255)).unwrap(), img);
    }
}
