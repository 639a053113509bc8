//! Binary PPM (`P6`) reading and writing.
//!
//! Only the 8-bit flavor is supported: magic `P6`, maxval 255. Header
//! tokens may be separated by any run of whitespace, and `#` comments
//! are honored anywhere whitespace is allowed. Errors carry the byte
//! offset at which parsing stopped.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::image::Raster8;

#[derive(Debug, Error)]
pub enum PpmError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported magic {found:?} at byte {offset}; only binary P6 is handled")]
    UnsupportedMagic { offset: usize, found: String },
    #[error("malformed header at byte {offset}: {what}")]
    MalformedHeader { offset: usize, what: String },
    #[error("unsupported maxval {maxval} at byte {offset}; only 255 is handled")]
    UnsupportedMaxval { offset: usize, maxval: u64 },
    #[error("truncated payload at byte {offset}: expected {expected} bytes, found {actual}")]
    TruncatedPayload {
        offset: usize,
        expected: usize,
        actual: usize,
    },
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    /// Returns how many bytes were consumed.
    fn skip_separators(&mut self) -> usize {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
        self.pos - start
    }

    /// Reads one whitespace-preceded decimal token, returning its
    /// starting offset and value.
    fn read_number(&mut self, what: &str) -> Result<(usize, u64), PpmError> {
        if self.skip_separators() == 0 {
            return Err(PpmError::MalformedHeader {
                offset: self.pos,
                what: format!("missing separator before {what}"),
            });
        }
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(b) = self.peek() {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .ok_or_else(|| PpmError::MalformedHeader {
                    offset: start,
                    what: format!("{what} does not fit in 64 bits"),
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PpmError::MalformedHeader {
                offset: start,
                what: format!("expected a decimal {what}"),
            });
        }
        Ok((start, value))
    }
}

/// Decodes a binary PPM image from an in-memory buffer.
pub fn parse_ppm(bytes: &[u8]) -> Result<Raster8, PpmError> {
    let mut cur = Cursor::new(bytes);
    let magic = bytes.get(..2).unwrap_or(bytes);
    if magic != b"P6" {
        return Err(PpmError::UnsupportedMagic {
            offset: 0,
            found: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    cur.pos = 2;

    let (_, width) = cur.read_number("width")?;
    let (_, height) = cur.read_number("height")?;
    let (maxval_at, maxval) = cur.read_number("maxval")?;
    if maxval != 255 {
        return Err(PpmError::UnsupportedMaxval {
            offset: maxval_at,
            maxval,
        });
    }
    // exactly one whitespace byte separates the header from the payload
    match cur.peek() {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(PpmError::MalformedHeader {
                offset: cur.pos,
                what: "expected a single whitespace byte after maxval".into(),
            })
        }
    }

    if width == 0 || height == 0 {
        return Err(PpmError::MalformedHeader {
            offset: 2,
            what: format!("image dimensions must be positive, got {width}x{height}"),
        });
    }
    let expected = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(3))
        .filter(|n| *n <= isize::MAX as usize)
        .ok_or_else(|| PpmError::MalformedHeader {
            offset: 2,
            what: format!("image dimensions {width}x{height} overflow"),
        })?;
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(PpmError::TruncatedPayload {
            offset: cur.pos,
            expected,
            actual: payload.len(),
        });
    }
    let raster = Raster8::new(
        width as usize,
        height as usize,
        payload[..expected].to_vec(),
    )
    .expect("dimensions and payload length were validated");
    Ok(raster)
}

/// Encodes an image as binary PPM. The layout is canonical: a one-line
/// `P6` header, dimensions, maxval 255, then the raw interleaved bytes.
pub fn encode_ppm(img: &Raster8) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.data().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.data());
    out
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<Raster8, PpmError> {
    parse_ppm(&fs::read(path)?)
}

pub fn write_ppm(path: impl AsRef<Path>, img: &Raster8) -> Result<(), PpmError> {
    fs::write(path, encode_ppm(img))?;
    Ok(())
}
