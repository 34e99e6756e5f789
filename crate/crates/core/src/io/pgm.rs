use crate::error::{Error, Result};
use crate::laser::GrayImage;

/// Encodes a binary (`P5`) PGM with maxval 255.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    /// Skips whitespace and `#` comments that run to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|c| *c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                Error::Truncated
            } else {
                Error::BadDimensions
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::BadDimensions)
    }
}

/// Decodes a binary (`P5`) PGM with maxval 255.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::BadMagic("P5"));
    }
    let mut h = Header { bytes, pos: 2 };
    let width = h.number()?;
    let height = h.number()?;
    let maxval = h.number()?;
    if width == 0 || height == 0 {
        return Err(Error::BadDimensions);
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval.min(u64::from(u32::MAX)) as u32));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        Some(_) => return Err(Error::BadDimensions),
        None => return Err(Error::Truncated),
    }
    let (w, ht) = (
        usize::try_from(width).map_err(|_| Error::BadDimensions)?,
        usize::try_from(height).map_err(|_| Error::BadDimensions)?,
    );
    let len = w.checked_mul(ht).ok_or(Error::BadDimensions)?;
    let raster = &bytes[h.pos..];
    if raster.len() < len {
        return Err(Error::Truncated);
    }
    GrayImage::from_pixels(w, ht, raster[..len].to_vec())
}
