//! Grayscale PGM (P2 ASCII and P5 binary) reading and writing.
//!
//! A gray value `v` maps to probability `v / maxval`; writing always uses
//! binary P5 with maxval 255.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::ProbabilityGrid;

pub fn decode(data: &[u8]) -> Result<ProbabilityGrid> {
    let mut cursor = Cursor { data, pos: 0 };
    let magic = cursor.token()?;
    let binary = match magic.as_slice() {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::Pgm(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = cursor.number()?;
    let height = cursor.number()?;
    let maxval = cursor.number()?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("unsupported maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Pgm(format!("empty image {width}x{height}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("image dimensions overflow".into()))?;
    let scale = maxval as f64;
    let mut values = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        cursor.pos += 1;
        let raster = data
            .get(cursor.pos..cursor.pos + n)
            .ok_or_else(|| Error::Pgm(format!("truncated raster: expected {n} bytes")))?;
        for &v in raster {
            values.push(sample(v as usize, maxval)? / scale);
        }
    } else {
        for _ in 0..n {
            values.push(sample(cursor.number()?, maxval)? / scale);
        }
    }
    ProbabilityGrid::new(width, height, values)
}

fn sample(v: usize, maxval: usize) -> Result<f64> {
    if v > maxval {
        return Err(Error::Pgm(format!("sample {v} exceeds maxval {maxval}")));
    }
    Ok(v as f64)
}

/// P5 encoding with maxval 255; probabilities are rounded to the nearest
/// gray level.
pub fn encode(grid: &ProbabilityGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    out.extend(grid.values().iter().map(|&v| (v * 255.0).round() as u8));
    out
}

pub fn read(path: &Path) -> Result<ProbabilityGrid> {
    let data = std::fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&data)
}

pub fn write(path: &Path, grid: &ProbabilityGrid) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(&encode(grid))?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<Vec<u8>> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Pgm("unexpected end of header".into()));
        }
        Ok(self.data[start..self.pos].to_vec())
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("expected a number, got {:?}", String::from_utf8_lossy(&tok))))
    }
}
