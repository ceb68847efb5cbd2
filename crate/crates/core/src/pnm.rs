//! Minimal netpbm support: PGM (P2/P5) in, PGM masks and PPM contour
//! overlays out.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{IntensityImage, ScalarField, SegmentationMask};
use crate::speckle::INTENSITY_FLOOR;

/// A decoded graymap: raw sample values and the declared maxval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader {
                offset: start,
                reason: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::MalformedHeader {
                offset: start,
                reason: format!("{what} out of range"),
            })
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Graymap> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        let magic = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::UnsupportedFormat { magic });
    }
    let binary = match bytes[1] {
        b'2' => false,
        b'5' => true,
        _ => {
            return Err(Error::UnsupportedFormat {
                magic: String::from_utf8_lossy(&bytes[..2]).into_owned(),
            })
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval_pos = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader {
            offset: maxval_pos,
            reason: format!("empty image {width}x{height}"),
        });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader {
            offset: maxval_pos,
            reason: format!("maxval {maxval} not in 1..=65535"),
        });
    }
    let count = width * height;
    let samples = if binary {
        // exactly one whitespace byte separates the header from the raster
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::MalformedHeader {
                offset: cur.pos,
                reason: "missing separator after maxval".into(),
            });
        }
        let start = cur.pos + 1;
        let bps = if maxval > 255 { 2 } else { 1 };
        let need = count * bps;
        let available = bytes.len() - start;
        if available < need {
            return Err(Error::Truncated {
                offset: bytes.len(),
                expected: need - available,
            });
        }
        let raster = &bytes[start..start + need];
        if bps == 1 {
            raster.iter().map(|&b| b as u16).collect()
        } else {
            raster
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        }
    } else {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            cur.skip_space_and_comments();
            if cur.pos >= bytes.len() {
                return Err(Error::Truncated {
                    offset: cur.pos,
                    expected: count - out.len(),
                });
            }
            let offset = cur.pos;
            let v = cur.number("sample")?;
            if v > maxval {
                return Err(Error::MalformedHeader {
                    offset,
                    reason: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            out.push(v as u16);
        }
        out
    };
    for (k, &s) in samples.iter().enumerate() {
        if s as u32 > maxval {
            return Err(Error::MalformedHeader {
                offset: k,
                reason: format!("sample {s} exceeds maxval {maxval}"),
            });
        }
    }
    Ok(Graymap {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

/// Loads a PGM as raw sample values; zeros are lifted to the intensity floor.
pub fn load_image(path: impl AsRef<Path>) -> Result<IntensityImage> {
    let map = decode_pgm(&fs::read(path)?)?;
    let values = map
        .samples
        .iter()
        .map(|&s| if s == 0 { INTENSITY_FLOOR } else { s as f64 })
        .collect();
    IntensityImage::from_values(map.width, map.height, values)
}

/// Any nonzero sample is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<SegmentationMask> {
    let map = decode_pgm(&fs::read(path)?)?;
    SegmentationMask::new(
        map.width,
        map.height,
        map.samples.iter().map(|&s| s != 0).collect(),
    )
}

fn pgm_header(width: usize, height: usize, maxval: u16) -> Vec<u8> {
    format!("P5\n{width} {height}\n{maxval}\n").into_bytes()
}

pub fn encode_mask(mask: &SegmentationMask) -> Vec<u8> {
    let mut out = pgm_header(mask.width(), mask.height(), 255);
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Binary PGM with 0 for background and 255 for foreground.
pub fn save_mask(mask: &SegmentationMask, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_mask(mask))?;
    Ok(())
}

/// Rounds to integer gray levels; 8-bit when everything fits, 16-bit otherwise.
pub fn encode_image(f: &ScalarField) -> Vec<u8> {
    let samples: Vec<u16> = f
        .values()
        .iter()
        .map(|v| v.round().clamp(0.0, 65535.0) as u16)
        .collect();
    let wide = samples.iter().any(|&s| s > 255);
    let mut out = pgm_header(f.width(), f.height(), if wide { 65535 } else { 255 });
    for s in samples {
        if wide {
            out.extend_from_slice(&s.to_be_bytes());
        } else {
            out.push(s as u8);
        }
    }
    out
}

pub fn save_image(f: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_image(f))?;
    Ok(())
}

/// P6 rendering of `f` (clamped to 0..=255) with the mask contour in red.
pub fn encode_overlay(f: &IntensityImage, mask: &SegmentationMask) -> Result<Vec<u8>> {
    if f.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            left: f.dims(),
            right: mask.dims(),
        });
    }
    let contour = mask.boundary();
    let mut out = format!("P6\n{} {}\n255\n", f.width(), f.height()).into_bytes();
    for (&v, &edge) in f.values().iter().zip(contour.bits()) {
        if edge {
            out.extend_from_slice(&[255, 0, 0]);
        } else {
            let gray = v.round().clamp(0.0, 255.0) as u8;
            out.extend_from_slice(&[gray, gray, gray]);
        }
    }
    Ok(out)
}

pub fn save_overlay(
    f: &IntensityImage,
    mask: &SegmentationMask,
    path: impl AsRef<Path>,
) -> Result<()> {
    fs::write(path, encode_overlay(f, mask)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_bytes_map_directly() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255, 64]);
        let map = decode_pgm(&bytes).unwrap();
        assert_eq!(map.samples, vec![0, 128, 255, 64]);
    }

    #[test]
    fn ascii_and_binary_agree() {
        let ascii = b"P2\n# comment line\n3 2\n255\n0 1 2\n 250 251 255\n";
        let mut binary = b"P5 3 2 255\n".to_vec();
        binary.extend_from_slice(&[0, 1, 2, 250, 251, 255]);
        assert_eq!(decode_pgm(ascii).unwrap(), decode_pgm(&binary).unwrap());
    }

    #[test]
    fn sixteen_bit_big_endian() {
        let mut bytes = b"P5\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0xff, 0xfe]);
        assert_eq!(decode_pgm(&bytes).unwrap().samples, vec![0x0102, 0xfffe]);
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(
            decode_pgm(b"P7\n1 1\n255\n\0"),
            Err(Error::UnsupportedFormat { .. })
        ));
        assert!(matches!(
            decode_pgm(b"P6\n1 1\n255\n\0\0\0"),
            Err(Error::UnsupportedFormat { .. })
        ));
        assert!(matches!(
            decode_pgm(b"P5\nx 1\n255\n\0"),
            Err(Error::MalformedHeader { offset: 3, .. })
        ));
        assert!(matches!(
            decode_pgm(b"P5\n1 1\n70000\n\0"),
            Err(Error::MalformedHeader { .. })
        ));
        assert!(matches!(
            decode_pgm(b"P5\n2 2\n255\n\0\0"),
            Err(Error::Truncated {
                offset: 13,
                expected: 2
            })
        ));
        assert!(matches!(
            decode_pgm(b"P2\n2 2\n255\n1 2 3"),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(
            decode_pgm(b"P2\n1 1\n10\n11"),
            Err(Error::MalformedHeader { .. })
        ));
    }

    #[test]
    fn overlay_marks_contour_red() {
        let f = IntensityImage::from_values(3, 3, vec![100.0; 9]).unwrap();
        let full = SegmentationMask::from_fn(3, 3, |_, _| true);
        let bytes = encode_overlay(&f, &full).unwrap();
        let body = &bytes[bytes.len() - 27..];
        assert!(body.chunks(3).all(|p| p == [100, 100, 100]));

        let single = SegmentationMask::from_fn(3, 3, |i, j| i == 1 && j == 1);
        let bytes = encode_overlay(&f, &single).unwrap();
        let body = &bytes[bytes.len() - 27..];
        assert_eq!(body.chunks(3).filter(|p| *p == [255, 0, 0]).count(), 1);
    }

    #[test]
    fn mask_encoding_round_trips() {
        let m = SegmentationMask::from_fn(5, 3, |i, j| (i + j) % 3 == 0);
        let map = decode_pgm(&encode_mask(&m)).unwrap();
        let back = SegmentationMask::new(
            map.width,
            map.height,
            map.samples.iter().map(|&s| s != 0).collect(),
        )
        .unwrap();
        assert_eq!(back, m);
    }
}
